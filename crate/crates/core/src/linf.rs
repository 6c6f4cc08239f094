//! Shared LP drivers for the ℓ∞ objective fits.
//!
//! Both the Chebyshev fit and its ℓ1-penalized variant are LPs whose optimum
//! is pinned down by a small set of active residual constraints. The drivers
//! here solve a working subset of rows, scan all residuals for violations,
//! grow the subset, and repeat; the final point is feasible for every row
//! and optimal for a relaxation, hence optimal for the full LP.
//!
//! The subproblems use the shifted radius `u = a − ‖y‖∞`, which makes the
//! all-slack basis feasible (no phase-1 artificials) while leaving the
//! optimum untouched.

use crate::error::{Error, Result};
use crate::linalg::{dot, norm_inf, solve_least_squares, Matrix};
use crate::lp::{solve_lp, LpConfig, LpProblem, LpStatus};

#[derive(Debug, Clone)]
pub(crate) struct LinfFit {
    pub beta: Vec<f64>,
    /// `max_i |y_i − X_i β|` over every row.
    pub a_hat: f64,
    pub residuals: Vec<f64>,
    /// Simplex pivots summed over all row-generation rounds.
    pub iterations: usize,
    pub status: LpStatus,
    /// Final working row set; a good warm start for a neighboring λ.
    pub working: Vec<usize>,
}

/// Rows with the largest |y| seed the working set: with β = 0 they carry the
/// largest residuals.
fn seed_rows(y: &[f64], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..y.len()).collect();
    idx.sort_by(|&i, &j| {
        y[j].abs()
            .partial_cmp(&y[i].abs())
            .unwrap()
            .then(i.cmp(&j))
    });
    idx.truncate(k);
    idx.sort_unstable();
    idx
}

/// Builds and solves the subproblem restricted to `rows`.
///
/// Variables are `[β (or β⁺,β⁻) | u]`; constraints per row i:
///   `X_i β − u ≤ y_i + Y` and `−X_i β − u ≤ Y − y_i`, with `Y = ‖y‖∞`.
fn solve_subproblem(
    x: &Matrix,
    y: &[f64],
    rows: &[usize],
    lambda: Option<f64>,
    cfg: &LpConfig,
) -> Result<(Vec<f64>, f64, usize, LpStatus)> {
    let p = x.cols();
    let shift = norm_inf(y);
    let split = lambda.is_some();
    let d = if split { 2 * p + 1 } else { p + 1 };
    let m = 2 * rows.len();

    let mut cons = Matrix::zeros(m, d);
    let mut rhs = vec![0.0; m];
    for (k, &i) in rows.iter().enumerate() {
        let xi = x.row(i);
        for j in 0..p {
            cons.set(2 * k, j, xi[j]);
            cons.set(2 * k + 1, j, -xi[j]);
            if split {
                cons.set(2 * k, p + j, -xi[j]);
                cons.set(2 * k + 1, p + j, xi[j]);
            }
        }
        cons.set(2 * k, d - 1, -1.0);
        cons.set(2 * k + 1, d - 1, -1.0);
        rhs[2 * k] = y[i] + shift;
        rhs[2 * k + 1] = shift - y[i];
    }

    let mut objective = vec![0.0; d];
    objective[d - 1] = 1.0;
    let mut lower = vec![f64::NEG_INFINITY; d];
    let upper = vec![f64::INFINITY; d];
    if let Some(l) = lambda {
        for j in 0..2 * p {
            objective[j] = l;
            lower[j] = 0.0;
        }
    }
    // u = a − Y stays free: the row constraints bound it from below.

    let prob = LpProblem::new(objective, cons, rhs, lower, upper)?;
    let sol = solve_lp(&prob, cfg)?;
    let beta: Vec<f64> = if split {
        (0..p).map(|j| sol.x[j] - sol.x[p + j]).collect()
    } else {
        sol.x[..p].to_vec()
    };
    let a_sub = sol.x[d - 1] + shift;
    Ok((beta, a_sub, sol.iterations, sol.status))
}

fn full_residuals(x: &Matrix, y: &[f64], beta: &[f64]) -> Vec<f64> {
    (0..x.rows())
        .map(|i| y[i] - dot(x.row(i), beta))
        .collect()
}

/// Row-generation solve of `min a (+ λ‖β‖₁) s.t. |y_i − X_i β| ≤ a`.
pub(crate) fn solve_linf(
    x: &Matrix,
    y: &[f64],
    lambda: Option<f64>,
    cfg: &LpConfig,
    warm_rows: Option<&[usize]>,
) -> Result<LinfFit> {
    let n = x.rows();
    let p = x.cols();
    let seed_count = if lambda.is_some() {
        n.min(256)
    } else {
        n.min(3 * (p + 1))
    };
    let add_cap = if lambda.is_some() { 384 } else { (p + 1).max(16) };
    // Rounds that may also drop rows that went slack; pure growth afterwards
    // keeps termination trivial.
    let drop_rounds = if lambda.is_some() { 8 } else { 0 };

    let mut working: Vec<usize> = {
        let mut w = seed_rows(y, seed_count);
        if let Some(rows) = warm_rows {
            w.extend_from_slice(rows);
            w.sort_unstable();
            w.dedup();
        }
        w
    };

    let mut in_working = vec![false; n];
    for &i in &working {
        in_working[i] = true;
    }

    let mut iterations = 0usize;
    let mut last: Option<(Vec<f64>, f64, LpStatus)> = None;

    // Past the drop rounds, each round either certifies optimality or adds
    // at least one row, so the loop is finite.
    for round in 0..=(n + drop_rounds) {
        let (beta, a_sub, iters, status) = solve_subproblem(x, y, &working, lambda, cfg)?;
        iterations += iters;
        if status != LpStatus::Optimal {
            let residuals = full_residuals(x, y, &beta);
            let a_hat = norm_inf(&residuals);
            return Ok(LinfFit {
                beta,
                a_hat,
                residuals,
                iterations,
                status,
                working,
            });
        }

        let residuals = full_residuals(x, y, &beta);
        let scale = a_sub.abs().max(1.0);
        let mut violated: Vec<(f64, usize)> = residuals
            .iter()
            .enumerate()
            .filter(|(i, _)| !in_working[*i])
            .map(|(i, r)| (r.abs() - a_sub, i))
            .filter(|(v, _)| *v > cfg.feas_tol * scale)
            .collect();
        if violated.is_empty() {
            last = Some((beta, a_sub, status));
            break;
        }

        if round < drop_rounds {
            let active_tol = 1e-7 * scale;
            let active_count = working
                .iter()
                .filter(|&&i| residuals[i].abs() >= a_sub - active_tol)
                .count();
            if working.len() > active_count + active_count / 2 {
                working.retain(|&i| {
                    let keep = residuals[i].abs() >= a_sub - active_tol;
                    if !keep {
                        in_working[i] = false;
                    }
                    keep
                });
            }
        }

        violated.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
        violated.truncate(add_cap);
        for (_, i) in violated {
            in_working[i] = true;
            working.push(i);
        }
        working.sort_unstable();
    }

    let (mut beta, a_sub, status) = last.ok_or_else(|| Error::Solver {
        status: LpStatus::IterationLimit,
        context: "row generation failed to converge".into(),
    })?;

    // Vertex polish for the pure Chebyshev fit: re-solve the active equations
    // `X_i β + sign(r_i)·a = y_i` in one clean least-squares pass, clearing
    // pivoting roundoff. Kept only when it does not degrade the objective.
    if lambda.is_none() {
        let residuals = full_residuals(x, y, &beta);
        let a_lp = norm_inf(&residuals);
        let tol_active = 1e-7 * a_sub.abs().max(1.0);
        let mut active: Vec<usize> = (0..n)
            .filter(|&i| (residuals[i].abs() - a_sub).abs() <= tol_active)
            .collect();
        active.truncate(3 * (p + 1));
        if active.len() >= p + 1 {
            let mut rows = Vec::with_capacity(active.len());
            let mut rhs = Vec::with_capacity(active.len());
            for &i in &active {
                let mut row = x.row(i).to_vec();
                row.push(if residuals[i] >= 0.0 { 1.0 } else { -1.0 });
                rows.push(row);
                rhs.push(y[i]);
            }
            if let Ok(sys) = Matrix::from_rows(&rows) {
                if let Ok(sol) = solve_least_squares(&sys, &rhs) {
                    let cand = &sol[..p];
                    let cand_res = full_residuals(x, y, cand);
                    if norm_inf(&cand_res) <= a_lp + 1e-12 * a_lp.max(1.0) {
                        beta = cand.to_vec();
                    }
                }
            }
        }
    }

    let residuals = full_residuals(x, y, &beta);
    let a_hat = norm_inf(&residuals);
    Ok(LinfFit {
        beta,
        a_hat,
        residuals,
        iterations,
        status,
        working,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn midrange_on_intercept_only() {
        let x = Matrix::from_rows(&[vec![1.0], vec![1.0], vec![1.0]]).unwrap();
        let y = [0.0, 1.0, 4.0];
        let fit = solve_linf(&x, &y, None, &LpConfig::default(), None).unwrap();
        assert_eq!(fit.status, LpStatus::Optimal);
        assert!((fit.beta[0] - 2.0).abs() < 1e-9);
        assert!((fit.a_hat - 2.0).abs() < 1e-9);
    }

    #[test]
    fn noiseless_exact_recovery() {
        let x = Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let y = [1.0, -1.0, 0.0];
        let fit = solve_linf(&x, &y, None, &LpConfig::default(), None).unwrap();
        assert!((fit.beta[0] - 1.0).abs() < 1e-9);
        assert!((fit.beta[1] + 1.0).abs() < 1e-9);
        assert!(fit.a_hat < 1e-9);
    }

    #[test]
    fn huge_penalty_zeroes_coefficients() {
        let x = Matrix::from_rows(&[vec![1.0, 0.3], vec![-0.4, 1.0], vec![0.2, -0.8]]).unwrap();
        let y = [1.0, -2.0, 0.5];
        let fit = solve_linf(&x, &y, Some(1e6), &LpConfig::default(), None).unwrap();
        assert!(fit.beta.iter().all(|b| b.abs() < 1e-9));
        assert!((fit.a_hat - 2.0).abs() < 1e-9);
    }

    #[test]
    fn lambda_zero_matches_plain_fit() {
        let x = Matrix::from_rows(&[
            vec![0.5, -1.2],
            vec![1.1, 0.3],
            vec![-0.7, 0.9],
            vec![0.2, 0.4],
            vec![-1.0, -0.5],
            vec![0.8, 1.3],
        ])
        .unwrap();
        let y = [0.3, -1.0, 0.7, 1.2, -0.4, 0.9];
        let plain = solve_linf(&x, &y, None, &LpConfig::default(), None).unwrap();
        let pen = solve_linf(&x, &y, Some(0.0), &LpConfig::default(), None).unwrap();
        assert!((plain.a_hat - pen.a_hat).abs() < 1e-8);
    }
}
