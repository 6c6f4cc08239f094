//! Seeded generators for the random design families and bounded noise laws,
//! plus truth-dataset assembly. Everything is a pure function of
//! `(spec, n, seed)`: replications can be sampled concurrently and still
//! agree with a sequential run.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{cholesky, dot, Matrix};
use crate::model::{Dataset, Truth};
use crate::rng::{derive_rng, purpose};

/// Radial law `R` of an elliptical design `X = R·A·U`, exposed through its
/// sampling rule.
#[derive(Clone)]
pub enum RadialLaw {
    /// `R ≡ 1`: uniform on the ellipsoid surface (sphere when `A = I`).
    Unit,
    /// `R ~ chi(p)`: recovers a Gaussian when `A = I`.
    ChiOfDim,
    /// Inverse CDF on (0,1); sampled as `f(u)` with `u ~ U(0,1)`.
    InverseCdf(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for RadialLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RadialLaw::Unit => f.write_str("Unit"),
            RadialLaw::ChiOfDim => f.write_str("ChiOfDim"),
            RadialLaw::InverseCdf(_) => f.write_str("InverseCdf(..)"),
        }
    }
}

#[derive(Debug, Clone)]
pub enum DesignFamily {
    /// Rows `~ N(0, Σ)`, Σ symmetric positive definite.
    GaussianSigma(Matrix),
    /// i.i.d. ±1 entries.
    Rademacher,
    /// Uniform on the unit sphere.
    UniformSphere,
    /// `X = R·A·U` with `U` uniform on the sphere.
    Elliptical { radial: RadialLaw, transform: Matrix },
    /// Rows drawn uniformly from `√p·{v₁,…,vₚ}` for an orthonormal basis
    /// (columns of `basis`); no random signs at generation time.
    OrthonormalScaled(Matrix),
    /// i.i.d. standard Cauchy entries (no moments; estimators still run).
    CauchyIid,
}

#[derive(Debug, Clone)]
pub struct DesignSpec {
    pub family: DesignFamily,
    pub p: usize,
}

impl DesignSpec {
    pub fn gaussian_identity(p: usize) -> Self {
        Self {
            family: DesignFamily::GaussianSigma(Matrix::identity(p)),
            p,
        }
    }

    pub fn rademacher(p: usize) -> Self {
        Self {
            family: DesignFamily::Rademacher,
            p,
        }
    }

    pub fn sphere(p: usize) -> Self {
        Self {
            family: DesignFamily::UniformSphere,
            p,
        }
    }

    pub fn orthonormal_standard(p: usize) -> Self {
        Self {
            family: DesignFamily::OrthonormalScaled(Matrix::identity(p)),
            p,
        }
    }

    pub fn cauchy(p: usize) -> Self {
        Self {
            family: DesignFamily::CauchyIid,
            p,
        }
    }

    /// Validates matrix parameters: Σ must pass Cholesky, the orthonormal
    /// basis must satisfy `‖BᵀB − I‖max ≤ 1e-10`.
    pub fn validate(&self) -> Result<()> {
        if self.p == 0 {
            return Err(Error::InvalidSpec("design dimension p must be >= 1".into()));
        }
        match &self.family {
            DesignFamily::GaussianSigma(sigma) => {
                if sigma.rows() != self.p || sigma.cols() != self.p {
                    return Err(Error::InvalidSpec("Sigma must be p x p".into()));
                }
                if cholesky(sigma).is_none() {
                    return Err(Error::InvalidSpec(
                        "Sigma is not symmetric positive definite".into(),
                    ));
                }
            }
            DesignFamily::Elliptical { transform, .. } => {
                if transform.rows() != self.p || transform.cols() != self.p {
                    return Err(Error::InvalidSpec("elliptical A must be p x p".into()));
                }
            }
            DesignFamily::OrthonormalScaled(basis) => {
                if basis.rows() != self.p || basis.cols() != self.p {
                    return Err(Error::InvalidSpec("basis must be p x p".into()));
                }
                for j in 0..self.p {
                    for k in j..self.p {
                        let mut s = 0.0;
                        for i in 0..self.p {
                            s += basis.get(i, j) * basis.get(i, k);
                        }
                        let want = if j == k { 1.0 } else { 0.0 };
                        if (s - want).abs() > 1e-10 {
                            return Err(Error::InvalidSpec(format!(
                                "basis columns {j},{k} not orthonormal"
                            )));
                        }
                    }
                }
            }
            DesignFamily::Rademacher
            | DesignFamily::UniformSphere
            | DesignFamily::CauchyIid => {}
        }
        Ok(())
    }
}

/// Bounded symmetric noise laws on `[-a, a]`.
#[derive(Clone)]
pub enum NoiseSpec {
    Uniform {
        a: f64,
    },
    /// CDF must be nondecreasing with `F(-a) = 0`, `F(a) = 1`; draws use
    /// inverse-CDF bisection to 1e-12.
    SymmetricBounded {
        a: f64,
        cdf: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    },
}

impl fmt::Debug for NoiseSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NoiseSpec::Uniform { a } => write!(f, "Uniform {{ a: {a} }}"),
            NoiseSpec::SymmetricBounded { a, .. } => {
                write!(f, "SymmetricBounded {{ a: {a}, cdf: .. }}")
            }
        }
    }
}

impl NoiseSpec {
    pub fn uniform(a: f64) -> Self {
        NoiseSpec::Uniform { a }
    }

    pub fn a(&self) -> f64 {
        match self {
            NoiseSpec::Uniform { a } | NoiseSpec::SymmetricBounded { a, .. } => *a,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let a = self.a();
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::InvalidSpec("noise radius a must be > 0".into()));
        }
        if let NoiseSpec::SymmetricBounded { a, cdf } = self {
            if (cdf(-a)).abs() > 1e-9 || (cdf(*a) - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidSpec(
                    "cdf must satisfy F(-a)=0 and F(a)=1".into(),
                ));
            }
            let grid = 64;
            let mut prev = cdf(-a);
            for k in 1..=grid {
                let t = -a + 2.0 * a * (k as f64) / (grid as f64);
                let v = cdf(t);
                if v < prev - 1e-12 {
                    return Err(Error::InvalidSpec("cdf must be nondecreasing".into()));
                }
                prev = v;
            }
        }
        Ok(())
    }
}

/// Coefficient patterns used by the simulations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BetaPattern {
    /// First p/2 entries +1, the rest -1 (p must be even).
    HalfOnes,
    /// First s/2 entries +1, next s/2 entries -1, rest 0 (s even, s <= p).
    SparseSigned(usize),
}

impl BetaPattern {
    pub fn realize(&self, p: usize) -> Result<Vec<f64>> {
        match *self {
            BetaPattern::HalfOnes => {
                if p % 2 != 0 {
                    return Err(Error::InvalidSpec("HalfOnes needs even p".into()));
                }
                Ok((0..p).map(|j| if j < p / 2 { 1.0 } else { -1.0 }).collect())
            }
            BetaPattern::SparseSigned(s) => {
                if s % 2 != 0 || s > p {
                    return Err(Error::InvalidSpec(
                        "SparseSigned needs even s with s <= p".into(),
                    ));
                }
                Ok((0..p)
                    .map(|j| {
                        if j < s / 2 {
                            1.0
                        } else if j < s {
                            -1.0
                        } else {
                            0.0
                        }
                    })
                    .collect())
            }
        }
    }
}

fn standard_normal_vec(rng: &mut impl Rng, p: usize) -> Vec<f64> {
    (0..p).map(|_| StandardNormal.sample(rng)).collect()
}

fn unit_sphere_row(rng: &mut impl Rng, p: usize) -> Vec<f64> {
    loop {
        let g = standard_normal_vec(rng, p);
        let norm = dot(&g, &g).sqrt();
        if norm > 1e-12 {
            return g.into_iter().map(|v| v / norm).collect();
        }
    }
}

/// `n` i.i.d. rows from the family; deterministic per `(spec, n, seed)`.
pub fn sample_design(spec: &DesignSpec, n: usize, seed: u64) -> Result<Matrix> {
    spec.validate()?;
    if n == 0 {
        return Err(Error::InvalidSpec("need n >= 1".into()));
    }
    let p = spec.p;
    let mut rng = derive_rng(seed, purpose::DESIGN, 0);
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n);
    match &spec.family {
        DesignFamily::GaussianSigma(sigma) => {
            let l = cholesky(sigma).expect("validated SPD");
            for _ in 0..n {
                let z = standard_normal_vec(&mut rng, p);
                let mut row = vec![0.0; p];
                for i in 0..p {
                    let mut s = 0.0;
                    for k in 0..=i {
                        s += l.get(i, k) * z[k];
                    }
                    row[i] = s;
                }
                rows.push(row);
            }
        }
        DesignFamily::Rademacher => {
            for _ in 0..n {
                rows.push(
                    (0..p)
                        .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
                        .collect(),
                );
            }
        }
        DesignFamily::UniformSphere => {
            for _ in 0..n {
                rows.push(unit_sphere_row(&mut rng, p));
            }
        }
        DesignFamily::Elliptical { radial, transform } => {
            for _ in 0..n {
                let u = unit_sphere_row(&mut rng, p);
                let r = match radial {
                    RadialLaw::Unit => 1.0,
                    RadialLaw::ChiOfDim => {
                        let g = standard_normal_vec(&mut rng, p);
                        dot(&g, &g).sqrt()
                    }
                    RadialLaw::InverseCdf(f) => f(rng.random::<f64>()),
                };
                let row: Vec<f64> = (0..p).map(|i| r * dot(transform.row(i), &u)).collect();
                rows.push(row);
            }
        }
        DesignFamily::OrthonormalScaled(basis) => {
            let scale = (p as f64).sqrt();
            for _ in 0..n {
                let j = rng.random_range(0..p);
                rows.push((0..p).map(|i| scale * basis.get(i, j)).collect());
            }
        }
        DesignFamily::CauchyIid => {
            let cauchy = rand_distr::Cauchy::new(0.0, 1.0).expect("valid parameters");
            for _ in 0..n {
                rows.push((0..p).map(|_| cauchy.sample(&mut rng)).collect());
            }
        }
    }
    Matrix::from_rows(&rows)
}

/// Inverse of a nondecreasing CDF by bisection on `[-a, a]` to 1e-12.
fn inverse_cdf_bisect(cdf: &dyn Fn(f64) -> f64, a: f64, u: f64) -> f64 {
    let (mut lo, mut hi) = (-a, a);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if cdf(mid) < u {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `n` i.i.d. noise draws; deterministic per `(spec, n, seed)`.
pub fn sample_noise(spec: &NoiseSpec, n: usize, seed: u64) -> Result<Vec<f64>> {
    spec.validate()?;
    if n == 0 {
        return Err(Error::InvalidSpec("need n >= 1".into()));
    }
    let mut rng = derive_rng(seed, purpose::NOISE, 0);
    Ok(match spec {
        NoiseSpec::Uniform { a } => (0..n)
            .map(|_| a * (2.0 * rng.random::<f64>() - 1.0))
            .collect(),
        NoiseSpec::SymmetricBounded { a, cdf } => (0..n)
            .map(|_| inverse_cdf_bisect(cdf.as_ref(), *a, rng.random::<f64>()))
            .collect(),
    })
}

/// Assembles a truth-bearing dataset: `y = Xβ* + ε` exactly.
pub fn make_dataset(
    design: &DesignSpec,
    pattern: BetaPattern,
    noise: &NoiseSpec,
    n: usize,
    seed: u64,
) -> Result<Dataset> {
    let x = sample_design(design, n, seed)?;
    let eps = sample_noise(noise, n, seed)?;
    let beta_star = pattern.realize(design.p)?;
    let y: Vec<f64> = (0..n).map(|i| dot(x.row(i), &beta_star) + eps[i]).collect();
    Dataset::with_truth(
        x,
        y,
        Truth {
            beta_star,
            a: noise.a(),
            eps,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::norm2;

    #[test]
    fn rademacher_support_and_balance() {
        let spec = DesignSpec::rademacher(2);
        let x = sample_design(&spec, 1000, 5).unwrap();
        let mut means = [0.0f64; 2];
        for i in 0..1000 {
            for j in 0..2 {
                let v = x.get(i, j);
                assert!(v == 1.0 || v == -1.0);
                means[j] += v / 1000.0;
            }
        }
        assert!(means.iter().all(|m| m.abs() < 0.1));
    }

    #[test]
    fn sphere_rows_unit_norm() {
        let spec = DesignSpec::sphere(4);
        let x = sample_design(&spec, 50, 11).unwrap();
        for i in 0..50 {
            assert!((norm2(x.row(i)) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn gaussian_identity_covariance() {
        let spec = DesignSpec::gaussian_identity(3);
        let n = 5000;
        let x = sample_design(&spec, n, 42).unwrap();
        for j in 0..3 {
            for k in 0..3 {
                let mut s = 0.0;
                for i in 0..n {
                    s += x.get(i, j) * x.get(i, k);
                }
                let want = if j == k { 1.0 } else { 0.0 };
                assert!(
                    (s / n as f64 - want).abs() < 0.15,
                    "cov({j},{k}) = {}",
                    s / n as f64
                );
            }
        }
    }

    #[test]
    fn orthonormal_rows_scaled() {
        let spec = DesignSpec::orthonormal_standard(3);
        let x = sample_design(&spec, 40, 9).unwrap();
        let scale = 3.0_f64.sqrt();
        for i in 0..40 {
            assert!((norm2(x.row(i)) - scale).abs() < 1e-10);
            // Exactly one nonzero coordinate, equal to sqrt(p).
            let nz: Vec<f64> = x.row(i).iter().copied().filter(|v| *v != 0.0).collect();
            assert_eq!(nz.len(), 1);
            assert!((nz[0] - scale).abs() < 1e-12);
        }
    }

    #[test]
    fn elliptical_unit_radial_is_spherical() {
        let spec = DesignSpec {
            family: DesignFamily::Elliptical {
                radial: RadialLaw::Unit,
                transform: Matrix::identity(3),
            },
            p: 3,
        };
        let x = sample_design(&spec, 30, 3).unwrap();
        for i in 0..30 {
            assert!((norm2(x.row(i)) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn elliptical_chi_radial_recovers_gaussian_moments() {
        let spec = DesignSpec {
            family: DesignFamily::Elliptical {
                radial: RadialLaw::ChiOfDim,
                transform: Matrix::identity(2),
            },
            p: 2,
        };
        let n = 20000;
        let x = sample_design(&spec, n, 8).unwrap();
        let mut var = [0.0f64; 2];
        for i in 0..n {
            for j in 0..2 {
                var[j] += x.get(i, j) * x.get(i, j) / n as f64;
            }
        }
        for v in var {
            assert!((v - 1.0).abs() < 0.1, "variance {v}");
        }
    }

    #[test]
    fn uniform_noise_support_and_moments() {
        let spec = NoiseSpec::uniform(2.0);
        let eps = sample_noise(&spec, 1000, 7).unwrap();
        assert!(eps.iter().all(|e| e.abs() <= 2.0));

        let spec = NoiseSpec::uniform(1.0);
        let n = 100_000;
        let eps = sample_noise(&spec, n, 1).unwrap();
        let mean: f64 = eps.iter().sum::<f64>() / n as f64;
        let m2: f64 = eps.iter().map(|e| e * e).sum::<f64>() / n as f64;
        assert!(mean.abs() < 0.02);
        assert!((m2 - 1.0 / 3.0).abs() < 0.02);
    }

    #[test]
    fn symmetric_bounded_uniform_cdf_matches_uniform() {
        let a = 1.5;
        let spec = NoiseSpec::SymmetricBounded {
            a,
            cdf: Arc::new(move |t: f64| ((t + a) / (2.0 * a)).clamp(0.0, 1.0)),
        };
        let n = 100_000;
        let xs = sample_noise(&spec, n, 2).unwrap();
        let ys = sample_noise(&NoiseSpec::uniform(a), n, 3).unwrap();
        // Two-sample KS statistic below 0.02.
        let mut xs = xs;
        let mut ys = ys;
        xs.sort_by(|u, v| u.partial_cmp(v).unwrap());
        ys.sort_by(|u, v| u.partial_cmp(v).unwrap());
        let mut ks = 0.0f64;
        let (mut i, mut j) = (0usize, 0usize);
        while i < n && j < n {
            if xs[i] <= ys[j] {
                i += 1;
            } else {
                j += 1;
            }
            ks = ks.max(((i as f64 - j as f64) / n as f64).abs());
        }
        assert!(ks < 0.02, "KS = {ks}");
    }

    #[test]
    fn beta_patterns() {
        assert_eq!(
            BetaPattern::HalfOnes.realize(4).unwrap(),
            vec![1.0, 1.0, -1.0, -1.0]
        );
        let b = BetaPattern::SparseSigned(4).realize(1004).unwrap();
        assert_eq!(b.iter().filter(|v| **v != 0.0).count(), 4);
        assert_eq!(&b[..4], &[1.0, 1.0, -1.0, -1.0]);
        assert!(BetaPattern::HalfOnes.realize(5).is_err());
        assert!(BetaPattern::SparseSigned(3).realize(10).is_err());
    }

    #[test]
    fn dataset_truth_identity() {
        let ds = make_dataset(
            &DesignSpec::gaussian_identity(4),
            BetaPattern::HalfOnes,
            &NoiseSpec::uniform(2.0),
            25,
            123,
        )
        .unwrap();
        let truth = ds.truth().unwrap();
        for i in 0..ds.n() {
            let fitted = dot(ds.x.row(i), &truth.beta_star) + truth.eps[i];
            assert_eq!(ds.y[i].to_bits(), fitted.to_bits());
        }
    }

    #[test]
    fn determinism_bitwise() {
        let spec = DesignSpec::gaussian_identity(3);
        let a = sample_design(&spec, 20, 99).unwrap();
        let b = sample_design(&spec, 20, 99).unwrap();
        assert_eq!(a.data().len(), b.data().len());
        for (u, v) in a.data().iter().zip(b.data()) {
            assert_eq!(u.to_bits(), v.to_bits());
        }
        let c = sample_design(&spec, 20, 100).unwrap();
        assert!(a.data().iter().zip(c.data()).any(|(u, v)| u != v));
    }

    #[test]
    fn invalid_specs_rejected() {
        let bad_sigma = DesignSpec {
            family: DesignFamily::GaussianSigma(
                Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap(),
            ),
            p: 2,
        };
        assert!(sample_design(&bad_sigma, 5, 0).is_err());

        let bad_basis = DesignSpec {
            family: DesignFamily::OrthonormalScaled(
                Matrix::from_rows(&[vec![1.0, 1.0], vec![0.0, 1.0]]).unwrap(),
            ),
            p: 2,
        };
        assert!(sample_design(&bad_basis, 5, 0).is_err());

        let bad_cdf = NoiseSpec::SymmetricBounded {
            a: 1.0,
            cdf: Arc::new(|t: f64| 1.0 - (t + 1.0) / 2.0),
        };
        assert!(sample_noise(&bad_cdf, 5, 0).is_err());
    }

    #[test]
    fn sign_symmetry_of_symmetrized_design() {
        // eta X with independent Rademacher eta has mean zero in every
        // coordinate for each family with first moments.
        use rand::Rng;
        for spec in [
            DesignSpec::gaussian_identity(3),
            DesignSpec::rademacher(3),
            DesignSpec::sphere(3),
            DesignSpec::orthonormal_standard(3),
        ] {
            let n = 100_000;
            let x = sample_design(&spec, n, 77).unwrap();
            let mut rng = derive_rng(77, purpose::NOISE, 1);
            let mut mean = vec![0.0f64; 3];
            let mut m2 = vec![0.0f64; 3];
            for i in 0..n {
                let eta = if rng.random::<bool>() { 1.0 } else { -1.0 };
                for j in 0..3 {
                    mean[j] += eta * x.get(i, j);
                    m2[j] += x.get(i, j) * x.get(i, j);
                }
            }
            for j in 0..3 {
                mean[j] /= n as f64;
                m2[j] /= n as f64;
                // 3 sigma Monte-Carlo band; per-coordinate second moments are
                // at most 1 for these normalized families (p=3 orthonormal has
                // E X_j^2 = 1 as well).
                let band = 3.0 * (m2[j] / n as f64).sqrt().max(1e-6);
                assert!(mean[j].abs() < band.max(0.02), "family {spec:?}: mean {}", mean[j]);
            }
        }
    }
}
