//! Dense row-major matrices and the QR least-squares solve used by every
//! estimator in this crate. Deliberately self-contained: no external solver
//! or BLAS dependency.

use crate::error::{Error, Result};

/// Relative rank tolerance for the QR diagonal, scaled by `‖X‖max`.
pub const RANK_TOL: f64 = 1e-12;

/// Dense matrix, row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    /// Builds a matrix from row-major entries. Rejects size mismatches and
    /// non-finite entries.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "matrix {rows}x{cols} needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if let Some(idx) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!(
                "matrix entry ({}, {})",
                idx / cols.max(1),
                idx % cols.max(1)
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        let data: Vec<f64> = rows.iter().flatten().copied().collect();
        Self::new(r, c, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    /// Row `i` as a contiguous slice.
    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// `self * x`.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols, "matvec dimension mismatch");
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    /// `selfᵀ * x`.
    pub fn tr_matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.rows, "tr_matvec dimension mismatch");
        let mut out = vec![0.0; self.cols];
        for i in 0..self.rows {
            let xi = x[i];
            if xi != 0.0 {
                for (o, a) in out.iter_mut().zip(self.row(i)) {
                    *o += a * xi;
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    /// Largest absolute entry (`‖·‖max`).
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `selfᵀ * self`, symmetric `cols × cols`.
    pub fn gram(&self) -> Matrix {
        let p = self.cols;
        let mut g = Matrix::zeros(p, p);
        for i in 0..self.rows {
            let r = self.row(i);
            for j in 0..p {
                let rj = r[j];
                if rj != 0.0 {
                    for k in j..p {
                        g.data[j * p + k] += rj * r[k];
                    }
                }
            }
        }
        for j in 0..p {
            for k in 0..j {
                g.data[j * p + k] = g.data[k * p + j];
            }
        }
        g
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

pub fn norm1(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).sum()
}

pub fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Least squares `argmin ‖y − Xβ‖₂` by Householder QR.
///
/// Requires `n ≥ p` and numerically full column rank: every QR diagonal must
/// stay above `RANK_TOL · ‖X‖max`, otherwise the offending column index is
/// reported.
pub fn solve_least_squares(x: &Matrix, y: &[f64]) -> Result<Vec<f64>> {
    let n = x.rows();
    let p = x.cols();
    if y.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "X has {n} rows but y has {} entries",
            y.len()
        )));
    }
    if n < p {
        return Err(Error::DimensionMismatch(format!(
            "least squares needs n >= p, got n={n}, p={p}"
        )));
    }
    if let Some(i) = y.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("y[{i}]")));
    }

    let tol = RANK_TOL * x.max_abs().max(f64::MIN_POSITIVE);
    let mut a = x.clone();
    let mut rhs = y.to_vec();

    // Householder transforms applied column by column; diagonals checked as
    // they are produced so rank deficiency names the first bad column.
    for k in 0..p {
        let mut alpha = 0.0;
        for i in k..n {
            alpha += a.get(i, k) * a.get(i, k);
        }
        alpha = alpha.sqrt();
        if alpha <= tol {
            return Err(Error::RankDeficient { col: k });
        }
        if a.get(k, k) > 0.0 {
            alpha = -alpha;
        }
        // v = x_k - alpha e_k, stored in place below the diagonal
        let mut vnorm2 = 0.0;
        {
            let akk = a.get(k, k) - alpha;
            a.set(k, k, akk);
            for i in k..n {
                vnorm2 += a.get(i, k) * a.get(i, k);
            }
        }
        if vnorm2 > 0.0 {
            for j in (k + 1)..p {
                let mut s = 0.0;
                for i in k..n {
                    s += a.get(i, k) * a.get(i, j);
                }
                let f = 2.0 * s / vnorm2;
                for i in k..n {
                    let v = a.get(i, j) - f * a.get(i, k);
                    a.set(i, j, v);
                }
            }
            let mut s = 0.0;
            for i in k..n {
                s += a.get(i, k) * rhs[i];
            }
            let f = 2.0 * s / vnorm2;
            for i in k..n {
                rhs[i] -= f * a.get(i, k);
            }
        }
        a.set(k, k, alpha);
        if alpha.abs() <= tol {
            return Err(Error::RankDeficient { col: k });
        }
    }

    // Back substitution on the p x p upper triangle.
    let mut beta = vec![0.0; p];
    for k in (0..p).rev() {
        let mut s = rhs[k];
        for j in (k + 1)..p {
            s -= a.get(k, j) * beta[j];
        }
        beta[k] = s / a.get(k, k);
    }
    Ok(beta)
}

/// Solves the square system `A x = b` by LU with partial pivoting.
/// Returns `None` when a pivot falls below `tol`.
pub fn lu_solve(a: &Matrix, b: &[f64], tol: f64) -> Option<Vec<f64>> {
    let n = a.rows();
    assert_eq!(a.cols(), n, "lu_solve needs a square matrix");
    assert_eq!(b.len(), n);
    let mut m = a.clone();
    let mut x = b.to_vec();
    for k in 0..n {
        let mut piv = k;
        let mut best = m.get(k, k).abs();
        for i in (k + 1)..n {
            let v = m.get(i, k).abs();
            if v > best {
                best = v;
                piv = i;
            }
        }
        if best <= tol {
            return None;
        }
        if piv != k {
            for j in 0..n {
                let t = m.get(k, j);
                m.set(k, j, m.get(piv, j));
                m.set(piv, j, t);
            }
            x.swap(k, piv);
        }
        for i in (k + 1)..n {
            let f = m.get(i, k) / m.get(k, k);
            if f != 0.0 {
                for j in (k + 1)..n {
                    let v = m.get(i, j) - f * m.get(k, j);
                    m.set(i, j, v);
                }
                x[i] -= f * x[k];
            }
        }
    }
    for k in (0..n).rev() {
        let mut s = x[k];
        for j in (k + 1)..n {
            s -= m.get(k, j) * x[j];
        }
        x[k] = s / m.get(k, k);
    }
    Some(x)
}

/// Lower Cholesky factor of a symmetric positive definite matrix, or `None`
/// when the matrix is not SPD.
pub fn cholesky(a: &Matrix) -> Option<Matrix> {
    let n = a.rows();
    if a.cols() != n {
        return None;
    }
    let mut l = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let mut s = a.get(i, j);
            for k in 0..j {
                s -= l.get(i, k) * l.get(j, k);
            }
            if i == j {
                if s <= 0.0 {
                    return None;
                }
                l.set(i, j, s.sqrt());
            } else {
                l.set(i, j, s / l.get(j, j));
            }
        }
    }
    Some(l)
}
