//! Closed-form calculators for the tail bounds, ball-containment bounds,
//! estimation-rate bounds, minimax risks, and the restricted-eigenvalue
//! check. These are pure total functions on their valid domains; probability
//! outputs are clamped to [0, 1].

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::designs::{sample_design, DesignFamily, DesignSpec, NoiseSpec};
use crate::error::{Error, Result};
use crate::linalg::{dot, norm1, norm2, Matrix};
use crate::rng::{derive_rng, derive_seed, purpose};

/// `P(|ε̄(K)|/a < 1 − K(L+1)/n) ≤ exp(−K L²/2 / ((4/3)L + 1))` for the
/// K-th largest of n uniform noise magnitudes. The bound itself does not
/// involve `n`; the argument only requires `K ≤ n`.
pub fn order_stat_tail_bound(n: usize, k: usize, l: f64) -> f64 {
    debug_assert!(k <= n && k >= 1);
    debug_assert!(l > 0.0);
    let k = k as f64;
    (-(k * l * l / 2.0) / ((4.0 / 3.0) * l + 1.0)).exp().min(1.0)
}

/// Threshold `a_n(K, L) = inf{t ∈ [0, 2a] : 2n(1 − F(a − t)) > K(L+1)}` for
/// symmetric bounded noise, by bisection to 1e-10; `2a` when the set is
/// empty.
pub fn a_n_threshold(noise: &NoiseSpec, n: usize, k: usize, l: f64) -> Result<f64> {
    noise.validate()?;
    let a = noise.a();
    let target = k as f64 * (l + 1.0);
    let eval = |t: f64| -> f64 {
        let f = match noise {
            NoiseSpec::Uniform { a } => ((a - t) + a) / (2.0 * a),
            NoiseSpec::SymmetricBounded { cdf, .. } => cdf(a - t),
        };
        2.0 * n as f64 * (1.0 - f.clamp(0.0, 1.0))
    };
    if eval(2.0 * a) <= target {
        return Ok(2.0 * a);
    }
    let (mut lo, mut hi) = (0.0, 2.0 * a);
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if eval(mid) > target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Inputs for the small-ball parameters: θ ∈ [0,1), q > 1, α > 0, c > 0,
/// plus the three moment quantities of the symmetrized design
/// (`inf_v E|⟨v,X̃⟩|^α`, `sup_v E|⟨v,X̃⟩|^{qα}`, `E‖X̃‖`).
#[derive(Debug, Clone)]
pub struct PZParams {
    pub theta: f64,
    pub q: f64,
    pub alpha: f64,
    pub c: f64,
    pub moment_lower: f64,
    pub moment_upper: f64,
    pub norm_mean: f64,
}

#[derive(Debug, Clone)]
pub struct PZOutput {
    pub rho: f64,
    pub xi: f64,
    /// `Υ = c · E‖X̃‖`, the norm-truncation level.
    pub upsilon: f64,
    /// Set when ρ ≥ 1/2, where the containment bound degenerates.
    pub out_of_regime: bool,
}

/// Small-ball parameters
/// `ρ = c⁻¹ + (1 − ((1−θ) m_lo)^{q/(q−1)} / m_hi^{1/(q−1)}) / 2` and
/// `ξ = (θ m_lo)^{1/α} / 2`.
pub fn paley_zygmund_params(pz: &PZParams) -> Result<PZOutput> {
    if !(pz.theta >= 0.0 && pz.theta < 1.0) {
        return Err(Error::InvalidSpec("theta must lie in [0, 1)".into()));
    }
    if !(pz.q > 1.0) || !(pz.alpha > 0.0) || !(pz.c > 0.0) {
        return Err(Error::InvalidSpec("need q > 1, alpha > 0, c > 0".into()));
    }
    if !(pz.moment_lower > 0.0 && pz.moment_upper > 0.0 && pz.norm_mean > 0.0) {
        return Err(Error::InvalidSpec("moment inputs must be positive".into()));
    }
    let ratio = ((1.0 - pz.theta) * pz.moment_lower).powf(pz.q / (pz.q - 1.0))
        / pz.moment_upper.powf(1.0 / (pz.q - 1.0));
    let rho = 1.0 / pz.c + (1.0 - ratio) / 2.0;
    let xi = (pz.theta * pz.moment_lower).powf(1.0 / pz.alpha) / 2.0;
    Ok(PZOutput {
        rho,
        xi,
        upsilon: pz.c * pz.norm_mean,
        out_of_regime: rho >= 0.5,
    })
}

/// `min(1, (1 + 2Υ/ξ)^p (1/2 + ρ)^m)`, evaluated in log space.
pub fn containment_prob_bound(xi: f64, rho: f64, upsilon: f64, p: usize, m: usize) -> f64 {
    debug_assert!(xi > 0.0 && upsilon >= 0.0 && rho >= 0.0);
    let base = 0.5 + rho;
    if base >= 1.0 {
        return 1.0;
    }
    let log_bound = p as f64 * (1.0 + 2.0 * upsilon / xi).ln() + m as f64 * base.ln();
    log_bound.exp().min(1.0)
}

/// Named quantities behind a bound value.
#[derive(Debug, Clone)]
pub struct BoundComponents {
    pub xi: f64,
    pub rho: Option<f64>,
    pub upsilon: Option<f64>,
    pub f_val: f64,
    pub l: f64,
    pub m_required: Option<f64>,
}

/// A bound value together with the probability that it fails to hold.
#[derive(Debug, Clone)]
pub struct BoundReport {
    pub bound_value: f64,
    pub failure_probability: f64,
    pub components: BoundComponents,
}

/// Estimation-error bound `a (L+1) ⌈f⌉ / (ξ n)`, failing with probability at
/// most `γ + exp(−L²/2 / ((4/3)L + 1))`.
pub fn rate_bound(f_val: f64, gamma: f64, xi: f64, a: f64, l: f64, n: usize) -> BoundReport {
    debug_assert!(f_val >= 0.0 && gamma > 0.0 && xi > 0.0 && a >= 0.0 && l > 0.0 && n >= 1);
    let bound_value = a * (l + 1.0) * f_val.ceil() / (xi * n as f64);
    let failure =
        (gamma + (-(l * l / 2.0) / ((4.0 / 3.0) * l + 1.0)).exp()).clamp(0.0, 1.0);
    BoundReport {
        bound_value,
        failure_probability: failure,
        components: BoundComponents {
            xi,
            rho: None,
            upsilon: None,
            f_val,
            l,
            m_required: None,
        },
    }
}

/// Per-family parameters for the worked design examples.
#[derive(Debug, Clone)]
pub enum ExampleFamily {
    /// Scaled orthonormal-basis design; the ball certificate is combinatorial
    /// with `f = 2p log(2p/γ)` and `ξ = 1`.
    Orthonormal { p: usize },
    Gaussian { lambda_min: f64, trace: f64, p: usize },
    Rademacher { p: usize },
    Sphere { p: usize },
    Elliptical {
        r_mean: f64,
        r_second_moment: f64,
        lambda_min: f64,
        lambda_max: f64,
        p: usize,
    },
    /// Only `inf_v E(vᵀX)² = λ_min > 0` and `sup_v E(vᵀX)⁴ ≤ C` assumed.
    GeneralMoment { lambda_min: f64, fourth_moment: f64, p: usize },
}

impl ExampleFamily {
    /// Small-ball parameters `(ξ, ρ, Υ)`; `None` for the orthonormal family,
    /// whose certificate does not go through the Paley-Zygmund route.
    pub fn small_ball(&self) -> Option<(f64, f64, f64)> {
        use std::f64::consts::PI;
        match *self {
            ExampleFamily::Orthonormal { .. } => None,
            ExampleFamily::Gaussian { lambda_min, trace, .. } => {
                let xi = (lambda_min / (8.0 * PI)).sqrt();
                let rho = 0.5 - 1.0 / (8.0 * PI);
                let upsilon = 8.0 * PI * trace.sqrt();
                Some((xi, rho, upsilon))
            }
            ExampleFamily::Rademacher { p } => {
                let xi = 1.0 / (4.0 * 2.0_f64.sqrt());
                let rho = 15.0 / 32.0;
                let upsilon = 32.0 * (p as f64).sqrt();
                Some((xi, rho, upsilon))
            }
            ExampleFamily::Sphere { p } => {
                let xi = (1.0 / (8.0 * PI * p as f64)).sqrt();
                let rho = 0.5 - 1.0 / (8.0 * PI);
                let upsilon = 8.0 * PI;
                Some((xi, rho, upsilon))
            }
            ExampleFamily::Elliptical {
                r_mean,
                r_second_moment,
                lambda_min,
                lambda_max,
                p,
            } => {
                let xi = r_mean * lambda_min.sqrt() * (2.0 / PI).sqrt()
                    / (4.0 * (p as f64).sqrt());
                let c = 8.0 * PI * r_second_moment / (r_mean * r_mean);
                let rho = 0.5 - (r_mean * r_mean) / (8.0 * PI * r_second_moment);
                let upsilon = c * (r_second_moment * lambda_max).sqrt();
                Some((xi, rho, upsilon))
            }
            ExampleFamily::GeneralMoment {
                lambda_min,
                fourth_moment,
                p,
            } => {
                let xi = lambda_min.sqrt() / (2.0 * 2.0_f64.sqrt());
                let c = 16.0 * fourth_moment / (lambda_min * lambda_min);
                let rho = 0.5 - (lambda_min * lambda_min) / (16.0 * fourth_moment);
                let upsilon = c * (p as f64 * fourth_moment.sqrt()).sqrt();
                Some((xi, rho, upsilon))
            }
        }
    }

    fn dim(&self) -> usize {
        match *self {
            ExampleFamily::Orthonormal { p }
            | ExampleFamily::Gaussian { p, .. }
            | ExampleFamily::Rademacher { p }
            | ExampleFamily::Sphere { p }
            | ExampleFamily::Elliptical { p, .. }
            | ExampleFamily::GeneralMoment { p, .. } => p,
        }
    }
}

/// Maps a sampling design onto its worked-example parameters. The Cauchy
/// design has no moment-based certificate here.
pub fn example_family_of(design: &DesignSpec) -> Result<ExampleFamily> {
    let p = design.p;
    Ok(match &design.family {
        DesignFamily::OrthonormalScaled(_) => ExampleFamily::Orthonormal { p },
        DesignFamily::GaussianSigma(sigma) => {
            // λ_min via inverse power iteration would be overkill for the
            // diagonal-dominant cases used here; Gershgorin keeps it simple
            // and conservative for the identity.
            let trace: f64 = (0..p).map(|j| sigma.get(j, j)).sum();
            let mut lambda_min = f64::INFINITY;
            for i in 0..p {
                let off: f64 = (0..p)
                    .filter(|j| *j != i)
                    .map(|j| sigma.get(i, j).abs())
                    .sum();
                lambda_min = lambda_min.min(sigma.get(i, i) - off);
            }
            if lambda_min <= 0.0 {
                return Err(Error::UnsupportedFamily(
                    "Gaussian Sigma needs a positive Gershgorin lower bound".into(),
                ));
            }
            ExampleFamily::Gaussian {
                lambda_min,
                trace,
                p,
            }
        }
        DesignFamily::Rademacher => ExampleFamily::Rademacher { p },
        DesignFamily::UniformSphere => ExampleFamily::Sphere { p },
        DesignFamily::Elliptical { .. } => {
            return Err(Error::UnsupportedFamily(
                "elliptical bounds need radial moments; build ExampleFamily::Elliptical directly"
                    .into(),
            ))
        }
        DesignFamily::CauchyIid => {
            return Err(Error::UnsupportedFamily(
                "Cauchy design has no moment-based bound".into(),
            ))
        }
    })
}

/// Sample size `m` at which the containment bound drops below γ:
/// `(p log(1 + 2Υ/ξ) + log γ⁻¹) / (1/2 − ρ)`.
pub fn m_required(xi: f64, rho: f64, upsilon: f64, p: usize, gamma: f64) -> f64 {
    debug_assert!(rho < 0.5);
    (p as f64 * (1.0 + 2.0 * upsilon / xi).ln() + (1.0 / gamma).ln()) / (0.5 - rho)
}

/// Dispatches the per-family `m` threshold and ξ into `rate_bound`.
pub fn example_bound(
    family: &ExampleFamily,
    n: usize,
    gamma: f64,
    l: f64,
    a: f64,
) -> Result<BoundReport> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::InvalidSpec("gamma must lie in (0,1)".into()));
    }
    let p = family.dim();
    match family.small_ball() {
        None => {
            let f = 2.0 * p as f64 * (2.0 * p as f64 / gamma).ln();
            let mut report = rate_bound(f, gamma, 1.0, a, l, n);
            report.components.m_required = Some(f);
            Ok(report)
        }
        Some((xi, rho, upsilon)) => {
            if rho >= 0.5 {
                return Err(Error::InvalidSpec(
                    "family parameters leave rho >= 1/2".into(),
                ));
            }
            let m_req = m_required(xi, rho, upsilon, p, gamma);
            let mut report = rate_bound(m_req, gamma, xi, a, l, n);
            report.components.rho = Some(rho);
            report.components.upsilon = Some(upsilon);
            report.components.m_required = Some(m_req);
            Ok(report)
        }
    }
}

/// `𝓡 = a² p² / (16 n²)` for the scaled orthonormal design.
pub fn minimax_risk_orthonormal(a: f64, p: usize, n: usize) -> f64 {
    let (a, p, n) = (a, p as f64, n as f64);
    a * a * p * p / (16.0 * n * n)
}

#[derive(Debug, Clone)]
pub struct MinimaxMcEstimate {
    pub value: f64,
    /// `max_j` of the estimated `E|(XᵀR)_j|`.
    pub max_coord_mean: f64,
    /// The rotation is fixed rather than optimized, so the estimate sits at
    /// or below the true minimax risk.
    pub is_lower_bound: bool,
}

/// Monte-Carlo evaluation of `a²p / (16 (n · max_j E|(XᵀR)_j|)²)` at a fixed
/// rotation `R` (identity by default).
pub fn minimax_risk_mc(
    design: &DesignSpec,
    n: usize,
    a: f64,
    trials: usize,
    seed: u64,
    rotation: Option<&Matrix>,
) -> Result<MinimaxMcEstimate> {
    if trials == 0 {
        return Err(Error::InvalidSpec("need trials >= 1".into()));
    }
    let p = design.p;
    if let Some(r) = rotation {
        if r.rows() != p || r.cols() != p {
            return Err(Error::DimensionMismatch("rotation must be p x p".into()));
        }
    }
    let x = sample_design(design, trials, derive_seed(seed, purpose::MOMENT_MC, 0))?;
    let mut sums = vec![0.0f64; p];
    for i in 0..trials {
        let row = x.row(i);
        for j in 0..p {
            let v = match rotation {
                None => row[j],
                Some(r) => (0..p).map(|k| row[k] * r.get(k, j)).sum(),
            };
            sums[j] += v.abs();
        }
    }
    let max_coord_mean = sums
        .iter()
        .map(|s| s / trials as f64)
        .fold(0.0f64, f64::max);
    let denom = 16.0 * (n as f64 * max_coord_mean).powi(2);
    Ok(MinimaxMcEstimate {
        value: a * a * p as f64 / denom,
        max_coord_mean,
        is_lower_bound: true,
    })
}

/// Dimension-free risk floor `a² / (16 (inf_v E|Xᵀv|)²)`.
pub fn modded_lower_bound(a: f64, inf_abs_moment: f64) -> f64 {
    debug_assert!(inf_abs_moment > 0.0);
    a * a / (16.0 * inf_abs_moment * inf_abs_moment)
}

/// `C √(p/n) ‖Σ⁻¹‖_op` for the known-radius constrained fit; the suppressed
/// universal constant is taken as 1 and exposed through `c`.
pub fn constrained_ls_bound(p: usize, n: usize, sigma_inv_opnorm: f64, c: f64) -> f64 {
    c * (p as f64 / n as f64).sqrt() * sigma_inv_opnorm
}

/// `max(6(L+1)a / (λ n^{1−α}), 24(L+1)a √s log n / (κ n^{1−α}))`.
pub fn cheb_lasso_bound(
    a: f64,
    lambda: f64,
    n: usize,
    alpha_exp: f64,
    s: usize,
    kappa: f64,
    l: f64,
) -> f64 {
    debug_assert!(alpha_exp > 0.0 && alpha_exp < 1.0);
    let nf = n as f64;
    let n_pow = nf.powf(1.0 - alpha_exp);
    let first = 6.0 * (l + 1.0) * a / (lambda * n_pow);
    let second = 24.0 * (l + 1.0) * a * (s as f64).sqrt() * nf.ln() / (kappa * n_pow);
    first.max(second)
}

/// Restricted-eigenvalue condition `RE(κ, γ, s)`.
#[derive(Debug, Clone)]
pub struct REParams {
    pub kappa: f64,
    pub gamma_cone: f64,
    pub s: usize,
}

#[derive(Debug, Clone)]
pub struct ReCheck {
    pub holds: bool,
    pub min_ratio: f64,
    pub witness: Vec<f64>,
}

/// Samples cone directions `‖v_{S^c}‖₁ ≤ γ ‖v_S‖₁` for every size-s subset
/// and records the worst Rayleigh ratio `vᵀAv/‖v‖²`. Refutation is certain;
/// confirmation is approximate (sampled).
pub fn check_re_empirical(
    gram: &Matrix,
    re: &REParams,
    samples_per_subset: usize,
    seed: u64,
) -> Result<ReCheck> {
    let p = gram.rows();
    if gram.cols() != p {
        return Err(Error::DimensionMismatch("gram matrix must be square".into()));
    }
    if p > 16 {
        return Err(Error::InvalidSpec(
            "subset enumeration supported for p <= 16 only".into(),
        ));
    }
    if re.s == 0 || re.s > p {
        return Err(Error::InvalidSpec("need 1 <= s <= p".into()));
    }
    if samples_per_subset == 0 {
        return Err(Error::InvalidSpec("need samples_per_subset >= 1".into()));
    }

    let mut min_ratio = f64::INFINITY;
    let mut witness = vec![0.0; p];

    for (subset_index, subset) in combinations(p, re.s).into_iter().enumerate() {
        let mut rng = derive_rng(seed, purpose::RE_SAMPLE, subset_index as u64);
        let mut in_s = vec![false; p];
        for &j in &subset {
            in_s[j] = true;
        }

        for draw in 0..samples_per_subset {
            let mut v: Vec<f64> = vec![0.0; p];
            for &j in &subset {
                v[j] = StandardNormal.sample(&mut rng);
            }
            let l1_s: f64 = subset.iter().map(|&j| v[j].abs()).sum();
            if l1_s <= 1e-14 {
                continue;
            }
            // Cycle boundary, interior, and zero placements of the off-
            // support mass.
            let t = match draw % 3 {
                0 => 1.0,
                1 => rng.random::<f64>(),
                _ => 0.0,
            };
            if t > 0.0 && re.s < p {
                let w: Vec<f64> = (0..p - re.s)
                    .map(|_| StandardNormal.sample(&mut rng))
                    .collect();
                let l1_w = norm1(&w);
                if l1_w > 1e-14 {
                    let scale = t * re.gamma_cone * l1_s / l1_w;
                    let mut k = 0;
                    for j in 0..p {
                        if !in_s[j] {
                            v[j] = scale * w[k];
                            k += 1;
                        }
                    }
                }
            }
            let quad = dot(&v, &gram.matvec(&v));
            let nrm2 = dot(&v, &v);
            if nrm2 <= 1e-20 {
                continue;
            }
            let ratio = quad / nrm2;
            if ratio < min_ratio {
                min_ratio = ratio;
                witness = v;
            }
        }
    }

    Ok(ReCheck {
        holds: min_ratio >= re.kappa * re.kappa,
        min_ratio,
        witness,
    })
}

/// All size-k subsets of {0, …, n-1} in lexicographic order.
fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        out.push(cur.clone());
        // Advance the rightmost index that still has room.
        let mut i = k;
        while i > 0 {
            i -= 1;
            if cur[i] != i + n - k {
                cur[i] += 1;
                for j in (i + 1)..k {
                    cur[j] = cur[j - 1] + 1;
                }
                break;
            }
            if i == 0 {
                return out;
            }
        }
        if k == 0 {
            return out;
        }
    }
}

/// Monte-Carlo estimates of the moment inputs to `paley_zygmund_params`,
/// minimized/maximized over sampled directions. Note `|⟨v, ηX⟩| = |⟨v, X⟩|`,
/// so the symmetrization never changes these quantities.
#[derive(Debug, Clone)]
pub struct PZMomentEstimate {
    pub moment_lower: f64,
    pub moment_upper: f64,
    pub norm_mean: f64,
    pub se_lower: f64,
    pub se_upper: f64,
    pub se_norm: f64,
}

pub fn estimate_pz_moments(
    design: &DesignSpec,
    alpha: f64,
    q: f64,
    directions: usize,
    draws: usize,
    seed: u64,
) -> Result<PZMomentEstimate> {
    if directions == 0 || draws == 0 {
        return Err(Error::InvalidSpec("need directions >= 1 and draws >= 1".into()));
    }
    let p = design.p;
    let x = sample_design(design, draws, derive_seed(seed, purpose::MOMENT_MC, 1))?;
    let mut rng = derive_rng(seed, purpose::DIRECTIONS, 1);

    let mut lower = (f64::INFINITY, 0.0);
    let mut upper = (f64::NEG_INFINITY, 0.0);
    for _ in 0..directions {
        let mut v: Vec<f64> = (0..p).map(|_| StandardNormal.sample(&mut rng)).collect();
        let nv = norm2(&v);
        if nv <= 1e-14 {
            continue;
        }
        for vi in &mut v {
            *vi /= nv;
        }
        let (mut s1, mut s2, mut t1, mut t2) = (0.0, 0.0, 0.0, 0.0);
        for i in 0..draws {
            let z = dot(x.row(i), &v).abs();
            let za = z.powf(alpha);
            let zqa = z.powf(q * alpha);
            s1 += za;
            s2 += za * za;
            t1 += zqa;
            t2 += zqa * zqa;
        }
        let mean_a = s1 / draws as f64;
        let mean_qa = t1 / draws as f64;
        if mean_a < lower.0 {
            let var = (s2 / draws as f64 - mean_a * mean_a).max(0.0);
            lower = (mean_a, (var / draws as f64).sqrt());
        }
        if mean_qa > upper.0 {
            let var = (t2 / draws as f64 - mean_qa * mean_qa).max(0.0);
            upper = (mean_qa, (var / draws as f64).sqrt());
        }
    }
    let (mut n1, mut n2) = (0.0, 0.0);
    for i in 0..draws {
        let nr = norm2(x.row(i));
        n1 += nr;
        n2 += nr * nr;
    }
    let norm_mean = n1 / draws as f64;
    let var = (n2 / draws as f64 - norm_mean * norm_mean).max(0.0);
    Ok(PZMomentEstimate {
        moment_lower: lower.0,
        moment_upper: upper.0,
        norm_mean,
        se_lower: lower.1,
        se_upper: upper.1,
        se_norm: (var / draws as f64).sqrt(),
    })
}
