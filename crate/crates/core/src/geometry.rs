//! Ball-in-convex-hull testing for the symmetrized design points, and the
//! Monte-Carlo containment-failure estimator.
//!
//! The 2-d test is exact (hull facets). In higher dimension the support
//! function is minimized over sampled directions with local subgradient
//! refinement, so a `Refuted` verdict is always correct while containment is
//! only ever reported as `Approximate`.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::designs::{sample_design, DesignSpec};
use crate::error::{Error, Result};
use crate::linalg::{dot, norm2};
use crate::rng::{derive_rng, derive_seed, purpose};

/// Sampled directions per dimension for the high-dimensional test.
pub const DIRECTIONS_PER_DIM: usize = 20_000;
const REFINE_STARTS: usize = 5;
const REFINE_STEPS: usize = 50;

#[derive(Debug, Clone)]
pub struct PointCloud {
    points: Vec<Vec<f64>>,
    dim: usize,
}

impl PointCloud {
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        let dim = points.first().map_or(0, |p| p.len());
        if dim == 0 {
            return Err(Error::InvalidSpec("point cloud needs dimension >= 1".into()));
        }
        for (i, pt) in points.iter().enumerate() {
            if pt.len() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "point {i} has dimension {}, expected {dim}",
                    pt.len()
                )));
            }
            if pt.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite(format!("point {i}")));
            }
        }
        Ok(Self { points, dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Containment {
    /// Exact certificate that the ball fits inside the hull (2-d only).
    Certified,
    /// A direction with support below ξ exists; always correct.
    Refuted,
    /// No refuting direction found among the sampled ones.
    Approximate { directions: usize },
}

#[derive(Debug, Clone)]
pub struct ContainmentVerdict {
    pub containment: Containment,
    /// Direction with `max_i ⟨v, x_i⟩ < ξ` when refuted.
    pub witness: Option<Vec<f64>>,
    pub inradius_estimate: f64,
}

impl ContainmentVerdict {
    pub fn is_refuted(&self) -> bool {
        self.containment == Containment::Refuted
    }
}

/// `max_i ⟨v, x_i⟩` for unit `v` (‖v‖ must be 1 within 1e-10).
pub fn support_function(cloud: &PointCloud, v: &[f64]) -> Result<f64> {
    if v.len() != cloud.dim() {
        return Err(Error::DimensionMismatch(format!(
            "direction has dimension {}, cloud has {}",
            v.len(),
            cloud.dim()
        )));
    }
    if (norm2(v) - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidSpec("direction must be a unit vector".into()));
    }
    Ok(cloud
        .points
        .iter()
        .map(|p| dot(p, v))
        .fold(f64::NEG_INFINITY, f64::max))
}

fn cross(o: &[f64], a: &[f64], b: &[f64]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Monotone-chain convex hull, counter-clockwise without the closing point.
fn convex_hull_2d(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut pts: Vec<Vec<f64>> = points.to_vec();
    pts.sort_by(|a, b| a[0].partial_cmp(&b[0]).unwrap().then(a[1].partial_cmp(&b[1]).unwrap()));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut lower: Vec<Vec<f64>> = Vec::new();
    for p in &pts {
        while lower.len() >= 2 && cross(&lower[lower.len() - 2], &lower[lower.len() - 1], p) <= 0.0
        {
            lower.pop();
        }
        lower.push(p.clone());
    }
    let mut upper: Vec<Vec<f64>> = Vec::new();
    for p in pts.iter().rev() {
        while upper.len() >= 2 && cross(&upper[upper.len() - 2], &upper[upper.len() - 1], p) <= 0.0
        {
            upper.pop();
        }
        upper.push(p.clone());
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Exact 2-d verdict: the hull is the intersection of its edge half-planes,
/// so the inradius about the origin is the smallest outward facet offset.
pub fn ball_in_hull_2d(cloud: &PointCloud, xi: f64) -> Result<ContainmentVerdict> {
    if cloud.dim() != 2 {
        return Err(Error::DimensionMismatch(
            "ball_in_hull_2d needs p = 2".into(),
        ));
    }
    if !(xi >= 0.0) {
        return Err(Error::InvalidSpec("xi must be >= 0".into()));
    }
    let hull = convex_hull_2d(&cloud.points);
    if hull.len() < 3 {
        // Flat hull: empty interior. The least-support direction among the
        // normals and tangents of the degenerate segment refutes any xi > 0.
        let mut best: Option<(f64, Vec<f64>)> = None;
        let dirs = degenerate_directions(&hull);
        for v in dirs {
            let s = support_function(cloud, &v)?;
            if best.as_ref().map_or(true, |(bs, _)| s < *bs) {
                best = Some((s, v));
            }
        }
        let (s, v) = best.expect("at least one candidate direction");
        if s < xi || xi > 0.0 {
            return Ok(ContainmentVerdict {
                containment: Containment::Refuted,
                witness: Some(v),
                inradius_estimate: 0.0,
            });
        }
        // xi == 0 and the segment covers the origin.
        return Ok(ContainmentVerdict {
            containment: Containment::Certified,
            witness: None,
            inradius_estimate: 0.0,
        });
    }

    let mut inradius = f64::INFINITY;
    let mut worst_normal = vec![0.0; 2];
    let k = hull.len();
    for i in 0..k {
        let a = &hull[i];
        let b = &hull[(i + 1) % k];
        // CCW polygon: outward normal of edge a->b.
        let n = [b[1] - a[1], -(b[0] - a[0])];
        let len = (n[0] * n[0] + n[1] * n[1]).sqrt();
        if len == 0.0 {
            continue;
        }
        let n = [n[0] / len, n[1] / len];
        let d = n[0] * a[0] + n[1] * a[1];
        if d < inradius {
            inradius = d;
            worst_normal = n.to_vec();
        }
    }
    // Origin outside the hull shows up as a negative offset.
    let inradius = inradius.max(0.0).min(f64::INFINITY);
    if inradius >= xi {
        Ok(ContainmentVerdict {
            containment: Containment::Certified,
            witness: None,
            inradius_estimate: inradius,
        })
    } else {
        Ok(ContainmentVerdict {
            containment: Containment::Refuted,
            witness: Some(worst_normal),
            inradius_estimate: inradius,
        })
    }
}

fn degenerate_directions(hull: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut dirs = vec![vec![1.0, 0.0], vec![-1.0, 0.0], vec![0.0, 1.0], vec![0.0, -1.0]];
    if hull.len() == 2 {
        let t = [hull[1][0] - hull[0][0], hull[1][1] - hull[0][1]];
        let len = (t[0] * t[0] + t[1] * t[1]).sqrt();
        if len > 0.0 {
            let t = [t[0] / len, t[1] / len];
            let n = [t[1], -t[0]];
            dirs.push(vec![t[0], t[1]]);
            dirs.push(vec![-t[0], -t[1]]);
            dirs.push(vec![n[0], n[1]]);
            dirs.push(vec![-n[0], -n[1]]);
        }
    }
    dirs
}

fn normalize(v: &mut [f64]) -> bool {
    let n = norm2(v);
    if n <= 1e-14 {
        return false;
    }
    for x in v {
        *x /= n;
    }
    true
}

/// Direction-sampled verdict for any dimension, with subgradient refinement
/// from the worst sampled directions. `Refuted` is always correct;
/// containment itself is never certified.
pub fn ball_in_hull_sampled(
    cloud: &PointCloud,
    xi: f64,
    directions: usize,
    seed: u64,
) -> Result<ContainmentVerdict> {
    if cloud.dim() < 2 {
        return Err(Error::DimensionMismatch(
            "ball_in_hull_sampled needs p >= 2".into(),
        ));
    }
    if !(xi >= 0.0) {
        return Err(Error::InvalidSpec("xi must be >= 0".into()));
    }
    let p = cloud.dim();
    let mut rng = derive_rng(seed, purpose::DIRECTIONS, 0);

    let raw_support = |v: &[f64]| -> (f64, usize) {
        let mut best = f64::NEG_INFINITY;
        let mut arg = 0;
        for (i, pt) in cloud.points.iter().enumerate() {
            let s = dot(pt, v);
            if s > best {
                best = s;
                arg = i;
            }
        }
        (best, arg)
    };

    // Worst = smallest support; keep the REFINE_STARTS best candidates.
    let mut worst: Vec<(f64, Vec<f64>)> = Vec::new();
    let mut min_support = f64::INFINITY;
    let mut min_dir: Vec<f64> = vec![0.0; p];
    for _ in 0..directions.max(1) {
        let mut v: Vec<f64> = (0..p).map(|_| StandardNormal.sample(&mut rng)).collect();
        if !normalize(&mut v) {
            continue;
        }
        let (s, _) = raw_support(&v);
        if s < min_support {
            min_support = s;
            min_dir = v.clone();
        }
        if worst.len() < REFINE_STARTS {
            worst.push((s, v));
            worst.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        } else if s < worst[REFINE_STARTS - 1].0 {
            worst[REFINE_STARTS - 1] = (s, v);
            worst.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        }
    }

    // Local minimization of the support function over the sphere.
    for (_, start) in worst {
        let mut v = start;
        for _ in 0..REFINE_STEPS {
            let (s, arg) = raw_support(&v);
            if s < min_support {
                min_support = s;
                min_dir = v.clone();
            }
            let g = cloud.point(arg);
            let gn = norm2(g);
            if gn <= 1e-14 {
                break;
            }
            let step = 0.1 / gn;
            for (vi, gi) in v.iter_mut().zip(g) {
                *vi -= step * gi;
            }
            if !normalize(&mut v) {
                break;
            }
        }
        let (s, _) = raw_support(&v);
        if s < min_support {
            min_support = s;
            min_dir = v;
        }
    }

    if min_support < xi {
        Ok(ContainmentVerdict {
            containment: Containment::Refuted,
            witness: Some(min_dir),
            inradius_estimate: min_support.max(0.0),
        })
    } else {
        Ok(ContainmentVerdict {
            containment: Containment::Approximate { directions },
            witness: None,
            inradius_estimate: min_support,
        })
    }
}

/// Monte-Carlo estimate of the containment failure probability with its
/// binomial standard error.
#[derive(Debug, Clone)]
pub struct ContainmentEstimate {
    pub failure_rate: f64,
    pub standard_error: f64,
    pub trials: usize,
    /// Whether the per-trial verdicts were exact (p = 2) or one-sided
    /// sampled verdicts (p >= 3), which can only undercount failures.
    pub exact: bool,
}

/// Estimates `P(ξ B ⊄ conv(η₁X₁, …, η_m X_m))` over seeded trials. Trials
/// run in parallel; the verdict count is independent of scheduling.
pub fn estimate_containment_probability(
    design: &DesignSpec,
    m: usize,
    xi: f64,
    trials: usize,
    seed: u64,
) -> Result<ContainmentEstimate> {
    if trials == 0 {
        return Err(Error::InvalidSpec("need trials >= 1".into()));
    }
    let p = design.p;
    design.validate()?;
    let refuted: usize = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<usize> {
            let trial_seed = derive_seed(seed, purpose::GEOMETRY_TRIAL, t as u64);
            let x = sample_design(design, m, trial_seed)?;
            let mut rng = derive_rng(trial_seed, purpose::NOISE, 1);
            let points: Vec<Vec<f64>> = (0..m)
                .map(|i| {
                    let eta = if rng.random::<bool>() { 1.0 } else { -1.0 };
                    x.row(i).iter().map(|v| eta * v).collect()
                })
                .collect();
            let cloud = PointCloud::new(points)?;
            let verdict = if p == 2 {
                ball_in_hull_2d(&cloud, xi)?
            } else {
                ball_in_hull_sampled(&cloud, xi, DIRECTIONS_PER_DIM * p, trial_seed)?
            };
            Ok(verdict.is_refuted() as usize)
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;

    let rate = refuted as f64 / trials as f64;
    Ok(ContainmentEstimate {
        failure_rate: rate,
        standard_error: (rate * (1.0 - rate) / trials as f64).sqrt(),
        trials,
        exact: p == 2,
    })
}
