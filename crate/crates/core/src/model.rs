//! Regression data types, residual machinery, and the per-observation
//! critical-inequality report used to validate fits against a known truth.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::linalg::{dot, norm_inf, Matrix};
use crate::lp::LpStatus;

/// Feasibility slack used by `check_feasible` and the slack report.
pub const FEAS_TOL: f64 = 1e-9;

/// Generating truth behind a synthetic dataset.
#[derive(Debug, Clone)]
pub struct Truth {
    pub beta_star: Vec<f64>,
    pub a: f64,
    pub eps: Vec<f64>,
}

/// A regression instance: an n x p design and the n responses, optionally
/// carrying the truth that generated it.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub x: Matrix,
    pub y: Vec<f64>,
    pub truth: Option<Truth>,
}

impl Dataset {
    pub fn new(x: Matrix, y: Vec<f64>) -> Result<Self> {
        if x.rows() == 0 || x.cols() == 0 {
            return Err(Error::InvalidSpec("dataset needs n >= 1 and p >= 1".into()));
        }
        if y.len() != x.rows() {
            return Err(Error::DimensionMismatch(format!(
                "X has {} rows, y has {} entries",
                x.rows(),
                y.len()
            )));
        }
        if let Some(i) = y.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("y[{i}]")));
        }
        Ok(Self { x, y, truth: None })
    }

    /// Attaches a truth payload, verifying `y = Xβ* + ε` entrywise within
    /// 1e-12 (relative to the response scale) and `|εᵢ| ≤ a`.
    pub fn with_truth(x: Matrix, y: Vec<f64>, truth: Truth) -> Result<Self> {
        let ds = Self::new(x, y)?;
        if truth.beta_star.len() != ds.p() || truth.eps.len() != ds.n() {
            return Err(Error::DimensionMismatch(
                "truth payload dimensions do not match the dataset".into(),
            ));
        }
        if !(truth.a > 0.0) {
            return Err(Error::InvalidSpec("truth noise radius a must be > 0".into()));
        }
        let scale = norm_inf(&ds.y).max(1.0);
        for i in 0..ds.n() {
            let fitted = dot(ds.x.row(i), &truth.beta_star) + truth.eps[i];
            if (ds.y[i] - fitted).abs() > 1e-12 * scale {
                return Err(Error::InvalidSpec(format!(
                    "truth identity y = X beta* + eps fails at row {i}"
                )));
            }
            if truth.eps[i].abs() > truth.a {
                return Err(Error::InvalidSpec(format!(
                    "noise exceeds radius a at row {i}"
                )));
            }
        }
        Ok(Self {
            truth: Some(truth),
            ..ds
        })
    }

    pub fn n(&self) -> usize {
        self.x.rows()
    }

    pub fn p(&self) -> usize {
        self.x.cols()
    }

    pub fn truth(&self) -> Result<&Truth> {
        self.truth.as_ref().ok_or(Error::MissingTruth)
    }
}

/// Which fitting procedure produced a `FitResult`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimatorKind {
    ChebyshevLp,
    ChebyshevIrls,
    ConstrainedLs,
    ChebyshevLasso,
    LassoCd,
    Ols,
}

impl EstimatorKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EstimatorKind::ChebyshevLp => "linf",
            EstimatorKind::ChebyshevIrls => "irls",
            EstimatorKind::ConstrainedLs => "cls",
            EstimatorKind::ChebyshevLasso => "cheb-lasso",
            EstimatorKind::LassoCd => "lasso",
            EstimatorKind::Ols => "ols",
        }
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for EstimatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "linf" => EstimatorKind::ChebyshevLp,
            "irls" => EstimatorKind::ChebyshevIrls,
            "cls" => EstimatorKind::ConstrainedLs,
            "cheb-lasso" => EstimatorKind::ChebyshevLasso,
            "lasso" => EstimatorKind::LassoCd,
            "ols" => EstimatorKind::Ols,
            other => return Err(Error::Config(format!("unknown method `{other}`"))),
        })
    }
}

/// Output of any fit: coefficients, the radius estimate `â`, residuals, and
/// solver diagnostics. For ℓ∞-type fits `a_hat` equals `max |residual|`.
#[derive(Debug, Clone)]
pub struct FitResult {
    pub beta_hat: Vec<f64>,
    pub a_hat: f64,
    pub residuals: Vec<f64>,
    pub estimator: EstimatorKind,
    pub iterations: usize,
    pub status: LpStatus,
}

impl FitResult {
    pub fn l2_error(&self, beta_star: &[f64]) -> f64 {
        self.beta_hat
            .iter()
            .zip(beta_star)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    pub fn l1_error(&self, beta_star: &[f64]) -> f64 {
        self.beta_hat
            .iter()
            .zip(beta_star)
            .map(|(a, b)| (a - b).abs())
            .sum()
    }
}

/// `y - Xβ`.
pub fn residuals(ds: &Dataset, beta: &[f64]) -> Result<Vec<f64>> {
    if beta.len() != ds.p() {
        return Err(Error::DimensionMismatch(format!(
            "beta has {} entries for p={}",
            beta.len(),
            ds.p()
        )));
    }
    Ok(ds
        .y
        .iter()
        .enumerate()
        .map(|(i, yi)| yi - dot(ds.x.row(i), beta))
        .collect())
}

/// True iff `‖y − Xβ‖∞ ≤ a + FEAS_TOL`.
pub fn check_feasible(ds: &Dataset, beta: &[f64], a: f64) -> Result<bool> {
    if a < 0.0 {
        return Err(Error::InvalidSpec("radius a must be >= 0".into()));
    }
    let r = residuals(ds, beta)?;
    Ok(norm_inf(&r) <= a + FEAS_TOL)
}

/// `η = -sign(ε)` with `sign(0) := +1`. Zero noise has probability zero
/// under the continuous model; any convention preserves the slack bound.
#[inline]
pub fn eta(eps: f64) -> f64 {
    if eps >= 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// Per-observation slack of the critical inequality
/// `ηᵢ Xᵢᵀ(β̂ − β*) ≤ a − |εᵢ|`, plus the ordering of observations by
/// decreasing `|ε|` (the leading ones are the "critical" indices).
#[derive(Debug, Clone)]
pub struct CriticalInequalityReport {
    pub slack: Vec<f64>,
    /// Observation indices sorted by decreasing `|ε|`.
    pub order: Vec<usize>,
}

impl CriticalInequalityReport {
    pub fn min_slack(&self) -> f64 {
        self.slack.iter().fold(f64::INFINITY, |m, v| m.min(*v))
    }

    /// The `k` indices with the largest noise magnitudes.
    pub fn critical_indices(&self, k: usize) -> &[usize] {
        &self.order[..k.min(self.order.len())]
    }
}

/// Computes every critical-inequality slack for a fit on a truth-bearing
/// dataset: `slackᵢ = (a − |εᵢ|) − ηᵢ Xᵢᵀ(β̂ − β*)`.
pub fn critical_report(ds: &Dataset, beta_hat: &[f64]) -> Result<CriticalInequalityReport> {
    let truth = ds.truth()?;
    if beta_hat.len() != ds.p() {
        return Err(Error::DimensionMismatch(format!(
            "beta_hat has {} entries for p={}",
            beta_hat.len(),
            ds.p()
        )));
    }
    let delta: Vec<f64> = beta_hat
        .iter()
        .zip(&truth.beta_star)
        .map(|(b, s)| b - s)
        .collect();
    let slack: Vec<f64> = (0..ds.n())
        .map(|i| {
            let e = truth.eps[i];
            (truth.a - e.abs()) - eta(e) * dot(ds.x.row(i), &delta)
        })
        .collect();
    let mut order: Vec<usize> = (0..ds.n()).collect();
    order.sort_by(|&i, &j| {
        truth.eps[j]
            .abs()
            .partial_cmp(&truth.eps[i].abs())
            .unwrap()
            .then(i.cmp(&j))
    });
    Ok(CriticalInequalityReport { slack, order })
}

// --- CSV interchange -------------------------------------------------------
//
// Dataset file: header `y,x1,...,xp`, one row per observation.
// Truth sidecar (same stem, `.truth.csv`): long format `field,index,value`
// with fields `a`, `beta_star`, `eps`.

fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Sidecar path for a dataset file: `data.csv` -> `data.truth.csv`.
pub fn truth_sidecar_path(path: &Path) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "data".into());
    path.with_file_name(format!("{stem}.truth.csv"))
}

pub fn write_dataset_csv(ds: &Dataset, path: &Path) -> Result<()> {
    let p = ds.p();
    let mut out = String::new();
    out.push('y');
    for j in 1..=p {
        out.push_str(&format!(",x{j}"));
    }
    out.push('\n');
    for i in 0..ds.n() {
        out.push_str(&fmt_f64(ds.y[i]));
        for j in 0..p {
            out.push(',');
            out.push_str(&fmt_f64(ds.x.get(i, j)));
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| io_err(path, e))?;

    if let Some(truth) = &ds.truth {
        let side = truth_sidecar_path(path);
        let mut out = String::from("field,index,value\n");
        out.push_str(&format!("a,0,{}\n", fmt_f64(truth.a)));
        for (j, b) in truth.beta_star.iter().enumerate() {
            out.push_str(&format!("beta_star,{j},{}\n", fmt_f64(*b)));
        }
        for (i, e) in truth.eps.iter().enumerate() {
            out.push_str(&format!("eps,{i},{}\n", fmt_f64(*e)));
        }
        fs::write(&side, out).map_err(|e| io_err(&side, e))?;
    }
    Ok(())
}

fn parse_f64(tok: &str, what: &str) -> Result<f64> {
    tok.trim()
        .parse::<f64>()
        .map_err(|_| Error::Parse(format!("bad number `{tok}` in {what}")))
}

/// Reads a dataset, picking up the truth sidecar when one sits next to it.
pub fn read_dataset_csv(path: &Path) -> Result<Dataset> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse(format!("{}: empty file", path.display())))?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    if cols.first() != Some(&"y") {
        return Err(Error::Parse(format!(
            "{}: header must start with `y`",
            path.display()
        )));
    }
    let p = cols.len() - 1;
    for (j, c) in cols.iter().skip(1).enumerate() {
        if *c != format!("x{}", j + 1) {
            return Err(Error::Parse(format!(
                "{}: expected column x{}, found `{c}`",
                path.display(),
                j + 1
            )));
        }
    }
    let mut y = Vec::new();
    let mut rows = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let toks: Vec<&str> = line.split(',').collect();
        if toks.len() != p + 1 {
            return Err(Error::Parse(format!(
                "{}: line {} has {} fields, expected {}",
                path.display(),
                lineno + 2,
                toks.len(),
                p + 1
            )));
        }
        y.push(parse_f64(toks[0], "y")?);
        rows.push(
            toks[1..]
                .iter()
                .map(|t| parse_f64(t, "x"))
                .collect::<Result<Vec<f64>>>()?,
        );
    }
    let x = Matrix::from_rows(&rows)?;

    let side = truth_sidecar_path(path);
    if !side.exists() {
        return Dataset::new(x, y);
    }
    let text = fs::read_to_string(&side).map_err(|e| io_err(&side, e))?;
    let mut a = None;
    let mut beta: Vec<(usize, f64)> = Vec::new();
    let mut eps: Vec<(usize, f64)> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if lineno == 0 || line.trim().is_empty() {
            continue;
        }
        let toks: Vec<&str> = line.split(',').collect();
        if toks.len() != 3 {
            return Err(Error::Parse(format!(
                "{}: line {} needs 3 fields",
                side.display(),
                lineno + 1
            )));
        }
        let idx: usize = toks[1]
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad index `{}`", toks[1])))?;
        let val = parse_f64(toks[2], "truth value")?;
        match toks[0].trim() {
            "a" => a = Some(val),
            "beta_star" => beta.push((idx, val)),
            "eps" => eps.push((idx, val)),
            other => {
                return Err(Error::Parse(format!(
                    "{}: unknown field `{other}`",
                    side.display()
                )))
            }
        }
    }
    let a = a.ok_or_else(|| Error::Parse(format!("{}: missing field a", side.display())))?;
    beta.sort_by_key(|(i, _)| *i);
    eps.sort_by_key(|(i, _)| *i);
    let truth = Truth {
        beta_star: beta.into_iter().map(|(_, v)| v).collect(),
        a,
        eps: eps.into_iter().map(|(_, v)| v).collect(),
    };
    Dataset::with_truth(x, y, truth)
}
