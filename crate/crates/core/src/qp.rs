//! Constrained least squares over the residual slab
//! `{β : y_i − a ≤ X_i β ≤ y_i + a}` by a primal active-set method,
//! warm-started from the Chebyshev fit (which is feasible whenever the slab
//! is nonempty, since the Chebyshev radius is the minimal feasible one).

use crate::error::{Error, Result};
use crate::linalg::{dot, lu_solve, Matrix};
use crate::linf::solve_linf;
use crate::lp::{LpConfig, LpStatus};

#[derive(Debug, Clone)]
pub struct QpSolution {
    pub beta: Vec<f64>,
    pub iterations: usize,
    /// `‖∇f + C_Wᵀ μ‖∞` at the returned point.
    pub kkt_residual: f64,
    pub status: LpStatus,
}

struct SlabConstraints<'a> {
    x: &'a Matrix,
    y: &'a [f64],
    a: f64,
}

impl SlabConstraints<'_> {
    fn count(&self) -> usize {
        2 * self.x.rows()
    }

    /// Row of constraint `k` as (sign, observation): even k is the upper
    /// face `X_i β ≤ y_i + a`, odd k the lower face `−X_i β ≤ a − y_i`.
    #[inline]
    fn sign_obs(&self, k: usize) -> (f64, usize) {
        if k % 2 == 0 {
            (1.0, k / 2)
        } else {
            (-1.0, k / 2)
        }
    }

    fn dot_row(&self, k: usize, v: &[f64]) -> f64 {
        let (s, i) = self.sign_obs(k);
        s * dot(self.x.row(i), v)
    }

    fn rhs(&self, k: usize) -> f64 {
        let (s, i) = self.sign_obs(k);
        if s > 0.0 {
            self.y[i] + self.a
        } else {
            self.a - self.y[i]
        }
    }
}

/// Minimizes `(1/n) ‖y − Xβ‖²` over the slab of radius `a`, starting from
/// the Chebyshev point. Errors with `Infeasible` when the Chebyshev optimum
/// certifies the slab empty.
pub fn solve_qp_box_slab(x: &Matrix, y: &[f64], a: f64, cfg: &LpConfig) -> Result<QpSolution> {
    let n = x.rows();
    let p = x.cols();
    if y.len() != n {
        return Err(Error::DimensionMismatch(
            "X rows and y length differ".into(),
        ));
    }
    if !(a >= 0.0) {
        return Err(Error::InvalidSpec("slab radius a must be >= 0".into()));
    }

    let cheb = solve_linf(x, y, None, cfg, None)?;
    if cheb.status != LpStatus::Optimal {
        return Err(Error::Solver {
            status: cheb.status,
            context: "slab feasibility phase".into(),
        });
    }
    if cheb.a_hat > a + cfg.feas_tol * a.max(1.0) {
        return Err(Error::Infeasible(format!(
            "slab of radius {a} is empty: minimal feasible radius is {}",
            cheb.a_hat
        )));
    }

    let cons = SlabConstraints { x, y, a };
    let gram = x.gram();
    let xty = x.tr_matvec(y);
    let scale = gram.max_abs().max(1.0);

    let grad = |beta: &[f64]| -> Vec<f64> {
        let gb = gram.matvec(beta);
        (0..p)
            .map(|j| 2.0 / n as f64 * (gb[j] - xty[j]))
            .collect()
    };

    let mut beta = cheb.beta.clone();
    let mut working: Vec<usize> = Vec::new();
    let max_iters = 50 * (cons.count() + p);
    let mut iterations = 0usize;

    let kkt_of = |beta: &[f64], working: &[usize], mu: &[f64]| -> f64 {
        let mut r = grad(beta);
        for (w, &k) in working.iter().enumerate() {
            let (s, i) = cons.sign_obs(k);
            for j in 0..p {
                r[j] += mu[w] * s * x.get(i, j);
            }
        }
        r.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    };

    loop {
        if iterations >= max_iters {
            let mu = vec![0.0; working.len()];
            let kkt = kkt_of(&beta, &working, &mu);
            return Ok(QpSolution {
                beta,
                iterations,
                kkt_residual: kkt,
                status: LpStatus::IterationLimit,
            });
        }
        iterations += 1;

        // Equality-constrained step: KKT system on (d, mu).
        let w = working.len();
        let dim = p + w;
        let mut kkt = Matrix::zeros(dim, dim);
        for i in 0..p {
            for j in 0..p {
                kkt.set(i, j, 2.0 / n as f64 * gram.get(i, j));
            }
        }
        for (wi, &k) in working.iter().enumerate() {
            let (s, obs) = cons.sign_obs(k);
            for j in 0..p {
                let v = s * x.get(obs, j);
                kkt.set(p + wi, j, v);
                kkt.set(j, p + wi, v);
            }
        }
        let g = grad(&beta);
        let mut rhs = vec![0.0; dim];
        for j in 0..p {
            rhs[j] = -g[j];
        }
        let Some(sol) = lu_solve(&kkt, &rhs, 1e-14 * scale) else {
            // Dependent working set; drop the newest constraint and retry.
            if working.pop().is_none() {
                return Err(Error::InvalidSpec(
                    "rank-deficient Hessian in constrained least squares".into(),
                ));
            }
            continue;
        };
        let d = &sol[..p];
        let mu = &sol[p..];
        let dnorm = d.iter().fold(0.0f64, |m, v| m.max(v.abs()));

        if dnorm <= 1e-11 * beta.iter().fold(1.0f64, |m, v| m.max(v.abs())) {
            // Stationary on the working set: check multipliers.
            let (mut worst, mut worst_idx) = (0.0f64, None);
            for (wi, &m) in mu.iter().enumerate() {
                if m < worst {
                    worst = m;
                    worst_idx = Some(wi);
                }
            }
            match worst_idx {
                None => {
                    let kkt_res = kkt_of(&beta, &working, mu);
                    return Ok(QpSolution {
                        beta,
                        iterations,
                        kkt_residual: kkt_res,
                        status: LpStatus::Optimal,
                    });
                }
                Some(wi) => {
                    working.remove(wi);
                }
            }
            continue;
        }

        // Ratio test toward the nearest blocking constraint.
        let mut alpha = 1.0f64;
        let mut blocker: Option<usize> = None;
        for k in 0..cons.count() {
            if working.contains(&k) {
                continue;
            }
            let cd = cons.dot_row(k, d);
            if cd > 1e-12 * scale {
                let slack = cons.rhs(k) - cons.dot_row(k, &beta);
                let ratio = (slack / cd).max(0.0);
                if ratio < alpha {
                    alpha = ratio;
                    blocker = Some(k);
                }
            }
        }
        for (b, di) in beta.iter_mut().zip(d) {
            *b += alpha * di;
        }
        if let Some(k) = blocker {
            working.push(k);
        }
    }
}
