//! Fitting procedures: the Chebyshev LP fit, Lawson's reweighting scheme,
//! constrained least squares with a known noise radius, the ℓ1-penalized
//! Chebyshev fit, coordinate-descent LASSO, and plain OLS.
//!
//! All fits are pure functions of `(dataset, config)`.

use crate::error::{Error, Result};
use crate::linalg::{dot, norm_inf, solve_least_squares, Matrix};
use crate::linf::solve_linf;
use crate::lp::{LpConfig, LpStatus};
use crate::model::{Dataset, EstimatorKind, FitResult};
use crate::qp::solve_qp_box_slab;

/// Lawson reweighting configuration.
#[derive(Debug, Clone)]
pub struct IrlsConfig {
    pub max_iters: usize,
    pub weight_floor: f64,
    /// Absolute tolerance on the change of the weighted objective.
    pub convergence_tol: f64,
}

impl Default for IrlsConfig {
    fn default() -> Self {
        Self {
            max_iters: 500,
            weight_floor: 1e-12,
            convergence_tol: 1e-10,
        }
    }
}

/// ℓ1 penalty configuration, shared by both LASSO variants.
#[derive(Debug, Clone)]
pub struct LassoConfig {
    pub lambda: f64,
    pub max_iters: usize,
    /// Tolerance on the largest coefficient change per sweep.
    pub tol: f64,
}

impl LassoConfig {
    pub fn new(lambda: f64) -> Self {
        Self {
            lambda,
            max_iters: 10_000,
            tol: 1e-9,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidSpec("lambda must be finite and >= 0".into()));
        }
        Ok(())
    }
}

/// Rank precondition for the dense fits. Only meaningful for n >= p; wider
/// problems (p > n) are the penalized fits' territory.
fn ensure_full_rank(x: &Matrix) -> Result<()> {
    if x.rows() >= x.cols() {
        solve_least_squares(x, &vec![0.0; x.rows()]).map(|_| ())
    } else {
        Ok(())
    }
}

fn lp_cfg() -> LpConfig {
    LpConfig::default()
}

/// Ordinary least squares; `a_hat` is the max absolute residual.
pub fn fit_ols(ds: &Dataset) -> Result<FitResult> {
    let beta_hat = solve_least_squares(&ds.x, &ds.y)?;
    let residuals: Vec<f64> = (0..ds.n())
        .map(|i| ds.y[i] - dot(ds.x.row(i), &beta_hat))
        .collect();
    Ok(FitResult {
        a_hat: norm_inf(&residuals),
        beta_hat,
        residuals,
        estimator: EstimatorKind::Ols,
        iterations: 0,
        status: LpStatus::Optimal,
    })
}

/// Chebyshev fit `argmin ‖y − Xβ‖∞` solved as an LP. Any optimal vertex is
/// acceptable; the argmin may be a face.
pub fn fit_chebyshev_lp(ds: &Dataset) -> Result<FitResult> {
    ensure_full_rank(&ds.x)?;
    let fit = solve_linf(&ds.x, &ds.y, None, &lp_cfg(), None)?;
    if fit.status != LpStatus::Optimal {
        return Err(Error::Solver {
            status: fit.status,
            context: "chebyshev fit".into(),
        });
    }
    Ok(FitResult {
        beta_hat: fit.beta,
        a_hat: fit.a_hat,
        residuals: fit.residuals,
        estimator: EstimatorKind::ChebyshevLp,
        iterations: fit.iterations,
        status: fit.status,
    })
}

/// Lawson's iteratively reweighted least squares for the ℓ∞ objective:
/// weights are multiplied by |residual| and renormalized each round, floored
/// at `weight_floor`. The weighted ℓ2 error grows monotonically toward the
/// minimax value; iteration stops when its change drops below tolerance.
pub fn fit_chebyshev_irls(ds: &Dataset, cfg: &IrlsConfig) -> Result<FitResult> {
    ensure_full_rank(&ds.x)?;
    let n = ds.n();
    let p = ds.p();
    let mut w = vec![1.0 / n as f64; n];
    let mut beta = vec![0.0; p];
    let mut residuals = ds.y.clone();
    let mut prev_obj = f64::INFINITY;
    let mut status = LpStatus::IterationLimit;
    let mut iterations = cfg.max_iters;

    for iter in 1..=cfg.max_iters {
        let sw: Vec<f64> = w.iter().map(|wi| wi.sqrt()).collect();
        let mut rows = Vec::with_capacity(n);
        let mut rhs = Vec::with_capacity(n);
        for i in 0..n {
            rows.push(ds.x.row(i).iter().map(|v| v * sw[i]).collect::<Vec<f64>>());
            rhs.push(ds.y[i] * sw[i]);
        }
        beta = solve_least_squares(&Matrix::from_rows(&rows)?, &rhs)?;
        for i in 0..n {
            residuals[i] = ds.y[i] - dot(ds.x.row(i), &beta);
        }
        let obj = w
            .iter()
            .zip(&residuals)
            .map(|(wi, ri)| wi * ri * ri)
            .sum::<f64>()
            .sqrt();
        if (obj - prev_obj).abs() < cfg.convergence_tol {
            status = LpStatus::Optimal;
            iterations = iter;
            break;
        }
        prev_obj = obj;

        let total: f64 = w.iter().zip(&residuals).map(|(wi, ri)| wi * ri.abs()).sum();
        if total <= f64::MIN_POSITIVE {
            // Exact interpolation; nothing left to reweight.
            status = LpStatus::Optimal;
            iterations = iter;
            break;
        }
        for (wi, ri) in w.iter_mut().zip(&residuals) {
            *wi = (*wi * ri.abs() / total).max(cfg.weight_floor);
        }
        let s: f64 = w.iter().sum();
        for wi in &mut w {
            *wi /= s;
        }
    }

    Ok(FitResult {
        a_hat: norm_inf(&residuals),
        beta_hat: beta,
        residuals,
        estimator: EstimatorKind::ChebyshevIrls,
        iterations,
        status,
    })
}

/// Least squares restricted to the slab `‖y − Xβ‖∞ ≤ a`; errors with
/// `Infeasible` when `a` lies below the Chebyshev optimum.
pub fn fit_constrained_ls(ds: &Dataset, a: f64) -> Result<FitResult> {
    ensure_full_rank(&ds.x)?;
    let qp = solve_qp_box_slab(&ds.x, &ds.y, a, &lp_cfg())?;
    let residuals: Vec<f64> = (0..ds.n())
        .map(|i| ds.y[i] - dot(ds.x.row(i), &qp.beta))
        .collect();
    Ok(FitResult {
        a_hat: norm_inf(&residuals),
        beta_hat: qp.beta,
        residuals,
        estimator: EstimatorKind::ConstrainedLs,
        iterations: qp.iterations,
        status: qp.status,
    })
}

/// Chebyshev's LASSO `min a + λ‖β‖₁ s.t. |y_i − X_i β| ≤ a`, solved as an LP
/// with the split `β = β⁺ − β⁻`.
pub fn fit_chebyshev_lasso(ds: &Dataset, cfg: &LassoConfig) -> Result<FitResult> {
    cfg.validate()?;
    let fit = solve_linf(&ds.x, &ds.y, Some(cfg.lambda), &lp_cfg(), None)?;
    if fit.status != LpStatus::Optimal {
        return Err(Error::Solver {
            status: fit.status,
            context: "chebyshev lasso fit".into(),
        });
    }
    Ok(FitResult {
        beta_hat: fit.beta,
        a_hat: fit.a_hat,
        residuals: fit.residuals,
        estimator: EstimatorKind::ChebyshevLasso,
        iterations: fit.iterations,
        status: fit.status,
    })
}

/// Fits the whole λ grid. Internally the grid is walked from the largest λ
/// down, the active rows of each solve warm-starting the next; results come
/// back in the grid's order.
pub fn chebyshev_lasso_path(ds: &Dataset, lambdas: &[f64]) -> Result<Vec<FitResult>> {
    if lambdas.iter().any(|l| !(*l >= 0.0 && l.is_finite())) {
        return Err(Error::InvalidSpec("lambda must be finite and >= 0".into()));
    }
    let mut order: Vec<usize> = (0..lambdas.len()).collect();
    order.sort_by(|&i, &j| lambdas[j].partial_cmp(&lambdas[i]).unwrap().then(i.cmp(&j)));
    let mut results: Vec<Option<FitResult>> = vec![None; lambdas.len()];
    let mut warm: Option<Vec<usize>> = None;
    for &idx in &order {
        let lambda = lambdas[idx];
        let fit = solve_linf(&ds.x, &ds.y, Some(lambda), &lp_cfg(), warm.as_deref())?;
        if fit.status != LpStatus::Optimal {
            return Err(Error::Solver {
                status: fit.status,
                context: format!("chebyshev lasso at lambda={lambda}"),
            });
        }
        warm = Some(fit.working.clone());
        results[idx] = Some(FitResult {
            beta_hat: fit.beta,
            a_hat: fit.a_hat,
            residuals: fit.residuals,
            estimator: EstimatorKind::ChebyshevLasso,
            iterations: fit.iterations,
            status: fit.status,
        });
    }
    Ok(results.into_iter().map(|r| r.expect("filled")).collect())
}

#[inline]
fn soft_threshold(z: f64, t: f64) -> f64 {
    if z > t {
        z - t
    } else if z < -t {
        z + t
    } else {
        0.0
    }
}

fn lasso_cd_from(
    ds: &Dataset,
    cfg: &LassoConfig,
    beta0: Vec<f64>,
) -> Result<FitResult> {
    cfg.validate()?;
    let n = ds.n();
    let p = ds.p();
    let nf = n as f64;
    let col_sq: Vec<f64> = (0..p)
        .map(|j| (0..n).map(|i| ds.x.get(i, j).powi(2)).sum::<f64>() / nf)
        .collect();

    let mut beta = beta0;
    let mut r: Vec<f64> = (0..n)
        .map(|i| ds.y[i] - dot(ds.x.row(i), &beta))
        .collect();

    let kkt_residual = |r: &[f64], beta: &[f64]| -> f64 {
        let mut worst = 0.0f64;
        for j in 0..p {
            let grad = -(0..n).map(|i| ds.x.get(i, j) * r[i]).sum::<f64>() / nf;
            let viol = if beta[j] > 0.0 {
                (grad + cfg.lambda).abs()
            } else if beta[j] < 0.0 {
                (grad - cfg.lambda).abs()
            } else {
                (grad.abs() - cfg.lambda).max(0.0)
            };
            worst = worst.max(viol);
        }
        worst
    };

    let mut status = LpStatus::IterationLimit;
    let mut iterations = cfg.max_iters;
    for sweep in 1..=cfg.max_iters {
        let mut max_delta = 0.0f64;
        for j in 0..p {
            if col_sq[j] <= 0.0 {
                continue;
            }
            let old = beta[j];
            let rho =
                (0..n).map(|i| ds.x.get(i, j) * r[i]).sum::<f64>() / nf + col_sq[j] * old;
            let new = soft_threshold(rho, cfg.lambda) / col_sq[j];
            if new != old {
                let delta = new - old;
                for i in 0..n {
                    r[i] -= ds.x.get(i, j) * delta;
                }
                beta[j] = new;
                max_delta = max_delta.max(delta.abs());
            }
        }
        if max_delta < cfg.tol && kkt_residual(&r, &beta) <= 1e-7 {
            status = LpStatus::Optimal;
            iterations = sweep;
            break;
        }
    }

    Ok(FitResult {
        a_hat: norm_inf(&r),
        beta_hat: beta,
        residuals: r,
        estimator: EstimatorKind::LassoCd,
        iterations,
        status,
    })
}

/// LASSO `(1/(2n))‖y − Xβ‖₂² + λ‖β‖₁` by cyclic coordinate descent with
/// soft thresholding; the KKT subgradient residual is at most 1e-7 on a
/// converged return.
pub fn fit_lasso_cd(ds: &Dataset, cfg: &LassoConfig) -> Result<FitResult> {
    lasso_cd_from(ds, cfg, vec![0.0; ds.p()])
}

/// Coordinate descent over a λ grid with warm starts along decreasing λ;
/// results come back in the grid's order.
pub fn lasso_cd_path(ds: &Dataset, lambdas: &[f64], template: &LassoConfig) -> Result<Vec<FitResult>> {
    let mut order: Vec<usize> = (0..lambdas.len()).collect();
    order.sort_by(|&i, &j| lambdas[j].partial_cmp(&lambdas[i]).unwrap().then(i.cmp(&j)));
    let mut results: Vec<Option<FitResult>> = vec![None; lambdas.len()];
    let mut beta = vec![0.0; ds.p()];
    for &idx in &order {
        let cfg = LassoConfig {
            lambda: lambdas[idx],
            ..template.clone()
        };
        let fit = lasso_cd_from(ds, &cfg, beta.clone())?;
        beta = fit.beta_hat.clone();
        results[idx] = Some(fit);
    }
    Ok(results.into_iter().map(|r| r.expect("filled")).collect())
}

/// `‖Xᵀy‖∞ / n`: the smallest λ at which the LASSO fit is identically zero.
pub fn lasso_lambda_max(ds: &Dataset) -> f64 {
    norm_inf(&ds.x.tr_matvec(&ds.y)) / ds.n() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::designs::{make_dataset, BetaPattern, DesignSpec, NoiseSpec};
    use crate::model::{check_feasible, residuals};

    fn gaussian_instance(n: usize, p: usize, seed: u64) -> Dataset {
        if p % 2 == 0 {
            return make_dataset(
                &DesignSpec::gaussian_identity(p),
                BetaPattern::HalfOnes,
                &NoiseSpec::uniform(2.0),
                n,
                seed,
            )
            .unwrap();
        }
        let x = crate::designs::sample_design(&DesignSpec::gaussian_identity(p), n, seed).unwrap();
        let eps = crate::designs::sample_noise(&NoiseSpec::uniform(2.0), n, seed).unwrap();
        let beta_star: Vec<f64> = (0..p).map(|j| if j % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let y: Vec<f64> = (0..n).map(|i| dot(x.row(i), &beta_star) + eps[i]).collect();
        Dataset::with_truth(
            x,
            y,
            crate::model::Truth {
                beta_star,
                a: 2.0,
                eps,
            },
        )
        .unwrap()
    }

    #[test]
    fn ols_identity_design() {
        let ds = Dataset::new(Matrix::identity(3), vec![1.0, 2.0, 3.0]).unwrap();
        let fit = fit_ols(&ds).unwrap();
        assert_eq!(fit.beta_hat, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn ols_mean_model() {
        let ds = Dataset::new(
            Matrix::from_rows(&[vec![1.0], vec![1.0], vec![1.0]]).unwrap(),
            vec![1.0, 2.0, 6.0],
        )
        .unwrap();
        let fit = fit_ols(&ds).unwrap();
        assert!((fit.beta_hat[0] - 3.0).abs() < 1e-12);
        assert!((fit.a_hat - 3.0).abs() < 1e-12);
    }

    #[test]
    fn chebyshev_lp_midrange() {
        let ds = Dataset::new(
            Matrix::from_rows(&[vec![1.0], vec![1.0], vec![1.0]]).unwrap(),
            vec![0.0, 1.0, 4.0],
        )
        .unwrap();
        let fit = fit_chebyshev_lp(&ds).unwrap();
        assert!((fit.beta_hat[0] - 2.0).abs() < 1e-9);
        assert!((fit.a_hat - 2.0).abs() < 1e-9);
        // a_hat is exactly the max absolute residual.
        assert!((fit.a_hat - norm_inf(&fit.residuals)).abs() < 1e-12);
    }

    #[test]
    fn chebyshev_lp_grid_oracle() {
        // n=7, p=2 random truth instance; no nearby grid point may beat the
        // LP objective by more than 1e-6.
        let ds = gaussian_instance(7, 2, 31);
        let fit = fit_chebyshev_lp(&ds).unwrap();
        let obj = |b: &[f64]| norm_inf(&residuals(&ds, b).unwrap());
        let mut best = f64::INFINITY;
        for di in -50..=50 {
            for dj in -50..=50 {
                let cand = [
                    fit.beta_hat[0] + 1e-3 * di as f64,
                    fit.beta_hat[1] + 1e-3 * dj as f64,
                ];
                best = best.min(obj(&cand));
            }
        }
        assert!(fit.a_hat <= best + 1e-6, "lp {} grid {}", fit.a_hat, best);
    }

    #[test]
    fn chebyshev_lp_no_feasible_beta_below() {
        use rand::Rng;
        let ds = gaussian_instance(40, 3, 77);
        let fit = fit_chebyshev_lp(&ds).unwrap();
        let mut rng = crate::rng::derive_rng(7, 99, 0);
        for _ in 0..100 {
            let cand: Vec<f64> = (0..3).map(|_| 4.0 * rng.random::<f64>() - 2.0).collect();
            let linf = norm_inf(&residuals(&ds, &cand).unwrap());
            assert!(linf >= fit.a_hat - 1e-9);
        }
    }

    #[test]
    fn chebyshev_feasible_at_true_radius() {
        for seed in [1, 2, 3] {
            let ds = gaussian_instance(30, 4, seed);
            let fit = fit_chebyshev_lp(&ds).unwrap();
            assert!(check_feasible(&ds, &fit.beta_hat, ds.truth().unwrap().a).unwrap());
            assert!(fit.a_hat <= ds.truth().unwrap().a + 1e-12);
        }
    }

    #[test]
    fn irls_midrange() {
        let ds = Dataset::new(
            Matrix::from_rows(&[vec![1.0], vec![1.0], vec![1.0]]).unwrap(),
            vec![0.0, 1.0, 4.0],
        )
        .unwrap();
        let fit = fit_chebyshev_irls(&ds, &IrlsConfig::default()).unwrap();
        assert!((fit.beta_hat[0] - 2.0).abs() < 1e-6, "beta {}", fit.beta_hat[0]);
    }

    #[test]
    fn irls_noiseless_quick_convergence() {
        let x = Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let y = vec![1.0, -1.0, 0.0];
        let ds = Dataset::new(x, y).unwrap();
        let fit = fit_chebyshev_irls(&ds, &IrlsConfig::default()).unwrap();
        assert!(fit.iterations <= 2);
        assert!(fit.a_hat < 1e-10);
    }

    #[test]
    fn irls_matches_lp_radius() {
        let ds = gaussian_instance(50, 3, 5);
        let lp = fit_chebyshev_lp(&ds).unwrap();
        let irls = fit_chebyshev_irls(
            &ds,
            &IrlsConfig {
                max_iters: 50_000,
                convergence_tol: 1e-14,
                ..IrlsConfig::default()
            },
        )
        .unwrap();
        assert!(
            (irls.a_hat - lp.a_hat).abs() <= 1e-6,
            "irls {} lp {}",
            irls.a_hat,
            lp.a_hat
        );
    }

    #[test]
    fn constrained_ls_wide_slab_is_ols() {
        let ds = gaussian_instance(25, 3, 13);
        let ols = fit_ols(&ds).unwrap();
        let a = 10.0 * norm_inf(&ds.y)
            + 10.0 * ds.x.max_abs() * ols.beta_hat.iter().map(|b| b.abs()).sum::<f64>();
        let cls = fit_constrained_ls(&ds, a).unwrap();
        for (u, v) in cls.beta_hat.iter().zip(&ols.beta_hat) {
            assert!((u - v).abs() < 1e-7);
        }
    }

    #[test]
    fn constrained_ls_at_chebyshev_radius() {
        let ds = gaussian_instance(20, 2, 21);
        let lp = fit_chebyshev_lp(&ds).unwrap();
        let cls = fit_constrained_ls(&ds, lp.a_hat).unwrap();
        assert!((cls.a_hat - lp.a_hat).abs() < 1e-6);
    }

    #[test]
    fn constrained_ls_below_radius_infeasible() {
        let ds = gaussian_instance(20, 2, 22);
        let lp = fit_chebyshev_lp(&ds).unwrap();
        match fit_constrained_ls(&ds, lp.a_hat * 0.9) {
            Err(Error::Infeasible(_)) => {}
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn cheb_lasso_zero_penalty_matches_lp_objective() {
        let ds = gaussian_instance(15, 3, 8);
        let lp = fit_chebyshev_lp(&ds).unwrap();
        let lasso = fit_chebyshev_lasso(&ds, &LassoConfig::new(0.0)).unwrap();
        assert!((lp.a_hat - lasso.a_hat).abs() < 1e-8);
    }

    #[test]
    fn cheb_lasso_infinite_penalty() {
        let ds = gaussian_instance(12, 2, 9);
        let fit = fit_chebyshev_lasso(&ds, &LassoConfig::new(1e6)).unwrap();
        assert!(fit.beta_hat.iter().all(|b| b.abs() < 1e-9));
        assert!((fit.a_hat - norm_inf(&ds.y)).abs() < 1e-9);
    }

    #[test]
    fn cheb_lasso_grid_oracle() {
        let ds = gaussian_instance(6, 2, 14);
        let lambda = 0.1;
        let fit = fit_chebyshev_lasso(&ds, &LassoConfig::new(lambda)).unwrap();
        let obj = |b: &[f64]| {
            norm_inf(&residuals(&ds, b).unwrap()) + lambda * (b[0].abs() + b[1].abs())
        };
        let fit_obj = fit.a_hat + lambda * fit.beta_hat.iter().map(|b| b.abs()).sum::<f64>();
        let mut best = f64::INFINITY;
        for di in -50..=50 {
            for dj in -50..=50 {
                let cand = [
                    fit.beta_hat[0] + 1e-3 * di as f64,
                    fit.beta_hat[1] + 1e-3 * dj as f64,
                ];
                best = best.min(obj(&cand));
            }
        }
        assert!(fit_obj <= best + 1e-6, "fit {fit_obj} grid {best}");
    }

    #[test]
    fn cheb_lasso_monotone_in_lambda() {
        let ds = gaussian_instance(20, 3, 25);
        let lambdas = [0.0, 0.05, 0.1, 0.3, 1.0, 3.0];
        let fits = chebyshev_lasso_path(&ds, &lambdas).unwrap();
        for w in fits.windows(2) {
            let (lo, hi) = (&w[0], &w[1]);
            assert!(hi.a_hat >= lo.a_hat - 1e-8);
            let l1 = |f: &FitResult| f.beta_hat.iter().map(|b| b.abs()).sum::<f64>();
            assert!(l1(hi) <= l1(lo) + 1e-8);
        }
    }

    #[test]
    fn lasso_cd_zero_penalty_is_ols() {
        let ds = gaussian_instance(30, 4, 18);
        let ols = fit_ols(&ds).unwrap();
        let cd = fit_lasso_cd(
            &ds,
            &LassoConfig {
                lambda: 0.0,
                max_iters: 100_000,
                tol: 1e-12,
            },
        )
        .unwrap();
        for (u, v) in cd.beta_hat.iter().zip(&ols.beta_hat) {
            assert!((u - v).abs() < 1e-6);
        }
    }

    #[test]
    fn lasso_cd_orthonormal_soft_threshold() {
        // Columns scaled so that XᵀX = nI: the solution is coordinatewise
        // soft thresholding of Xᵀy / n.
        let n = 8;
        let mut x = Matrix::zeros(n, 2);
        let s = (n as f64 / 2.0).sqrt();
        for i in 0..4 {
            x.set(i, 0, if i % 2 == 0 { s } else { -s });
        }
        for i in 4..8 {
            x.set(i, 1, if i % 2 == 0 { s } else { -s });
        }
        let y: Vec<f64> = (0..n).map(|i| (i as f64 * 0.7).sin() + 0.5).collect();
        let ds = Dataset::new(x.clone(), y.clone()).unwrap();
        let lambda = 0.2;
        let fit = fit_lasso_cd(&ds, &LassoConfig::new(lambda)).unwrap();
        let xty = x.tr_matvec(&y);
        for j in 0..2 {
            let want = soft_threshold(xty[j] / n as f64, lambda);
            assert!((fit.beta_hat[j] - want).abs() < 1e-9);
        }
    }

    #[test]
    fn lasso_cd_matches_ista_oracle() {
        let ds = gaussian_instance(20, 5, 33);
        let lambda = 0.3;
        let cd = fit_lasso_cd(&ds, &LassoConfig::new(lambda)).unwrap();

        // Proximal-gradient oracle run to a 1e-10 objective change.
        let n = ds.n() as f64;
        let gram = ds.x.gram();
        let mut lip = 0.0;
        let mut v = vec![1.0; ds.p()];
        for _ in 0..500 {
            let gv = gram.matvec(&v);
            let norm = crate::linalg::norm2(&gv);
            lip = norm;
            for (vi, g) in v.iter_mut().zip(&gv) {
                *vi = g / norm;
            }
        }
        lip /= n;
        let step = 1.0 / lip;
        let objective = |b: &[f64]| {
            let r = residuals(&ds, b).unwrap();
            r.iter().map(|v| v * v).sum::<f64>() / (2.0 * n)
                + lambda * b.iter().map(|v| v.abs()).sum::<f64>()
        };
        let mut b = vec![0.0; ds.p()];
        let mut prev = objective(&b);
        for _ in 0..200_000 {
            let r = residuals(&ds, &b).unwrap();
            let grad: Vec<f64> = ds.x.tr_matvec(&r).iter().map(|g| -g / n).collect();
            for j in 0..ds.p() {
                b[j] = soft_threshold(b[j] - step * grad[j], step * lambda);
            }
            let cur = objective(&b);
            if (prev - cur).abs() < 1e-10 {
                break;
            }
            prev = cur;
        }
        let cd_obj = objective(&cd.beta_hat);
        assert!(cd_obj <= prev + 1e-8, "cd {cd_obj} ista {prev}");
    }

    #[test]
    fn rank_deficient_rejected() {
        let x = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0], vec![1.5, 3.0]]).unwrap();
        let ds = Dataset::new(x, vec![1.0, 2.0, 3.0]).unwrap();
        assert!(matches!(
            fit_chebyshev_lp(&ds),
            Err(Error::RankDeficient { .. })
        ));
        assert!(matches!(fit_ols(&ds), Err(Error::RankDeficient { .. })));
    }
}
