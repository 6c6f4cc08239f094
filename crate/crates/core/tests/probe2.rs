//! Deeper look at the small-lambda LASSO LP (run with --ignored --release).

use std::time::Instant;

use chebfit_core::designs::{make_dataset, BetaPattern, DesignSpec, NoiseSpec};
use chebfit_core::estimators::fit_chebyshev_lasso;
use chebfit_core::estimators::LassoConfig;

#[test]
#[ignore]
fn probe_single_small_lambda() {
    let s = 4usize;
    let p = 1000 + s;
    let n = 600usize;
    let ds = make_dataset(
        &DesignSpec::gaussian_identity(p),
        BetaPattern::SparseSigned(s),
        &NoiseSpec::uniform(5.0),
        n,
        7,
    )
    .unwrap();
    let lo = 0.1 * ((p as f64).ln() / (n as f64).powf(0.4)).sqrt();
    for lambda in [lo, 2.0 * lo, 5.0 * lo] {
        let t0 = Instant::now();
        let fit = fit_chebyshev_lasso(&ds, &LassoConfig::new(lambda)).unwrap();
        let nnz = fit.beta_hat.iter().filter(|b| b.abs() > 1e-9).count();
        println!(
            "lambda={lambda:.4}: {:.2} s, {} pivots, nnz={} a_hat={:.3}",
            t0.elapsed().as_secs_f64(),
            fit.iterations,
            nnz,
            fit.a_hat
        );
    }
}
