//! Self-contained dense LP solver: bounded-variable primal simplex, two
//! phases, full-tableau updates. Pricing is Dantzig's rule with lowest-index
//! tie breaking; after a run of degenerate pivots the solver switches to
//! Bland's rule until it escapes the degenerate vertex, which rules out
//! cycling while keeping pivot counts reasonable.

use crate::error::{Error, Result};
use crate::linalg::{dot, Matrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

/// Solver tolerances. `max_iter_factor` caps pivots at `factor * (m + d)`.
#[derive(Debug, Clone)]
pub struct LpConfig {
    pub feas_tol: f64,
    pub pivot_tol: f64,
    pub max_iter_factor: usize,
}

impl Default for LpConfig {
    fn default() -> Self {
        Self {
            feas_tol: 1e-9,
            pivot_tol: 1e-10,
            max_iter_factor: 50,
        }
    }
}

/// minimize `objectiveᵀx` subject to `constraints · x ≤ rhs` and
/// `lower ≤ x ≤ upper` (entries of the bound vectors may be ±∞).
#[derive(Debug, Clone)]
pub struct LpProblem {
    pub objective: Vec<f64>,
    pub constraints: Matrix,
    pub rhs: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl LpProblem {
    pub fn new(
        objective: Vec<f64>,
        constraints: Matrix,
        rhs: Vec<f64>,
        lower: Vec<f64>,
        upper: Vec<f64>,
    ) -> Result<Self> {
        let m = constraints.rows();
        let d = constraints.cols();
        if m == 0 || d == 0 {
            return Err(Error::InvalidSpec("LP needs m >= 1 and d >= 1".into()));
        }
        if objective.len() != d || lower.len() != d || upper.len() != d {
            return Err(Error::DimensionMismatch(format!(
                "LP with d={d} got objective/lower/upper of lengths {}/{}/{}",
                objective.len(),
                lower.len(),
                upper.len()
            )));
        }
        if rhs.len() != m {
            return Err(Error::DimensionMismatch(format!(
                "LP with m={m} got rhs of length {}",
                rhs.len()
            )));
        }
        if objective.iter().any(|v| !v.is_finite()) || rhs.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("LP objective or rhs".into()));
        }
        if lower.iter().chain(upper.iter()).any(|v| v.is_nan()) {
            return Err(Error::NonFinite("LP bounds".into()));
        }
        Ok(Self {
            objective,
            constraints,
            rhs,
            lower,
            upper,
        })
    }

    /// All variables free.
    pub fn unbounded_vars(objective: Vec<f64>, constraints: Matrix, rhs: Vec<f64>) -> Result<Self> {
        let d = constraints.cols();
        Self::new(
            objective,
            constraints,
            rhs,
            vec![f64::NEG_INFINITY; d],
            vec![f64::INFINITY; d],
        )
    }
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Structural variable values (length d). Meaningful when `status` is
    /// `Optimal`; best effort otherwise.
    pub x: Vec<f64>,
    pub objective_value: f64,
    pub iterations: usize,
}

#[derive(Clone, Copy, PartialEq)]
enum VarState {
    Basic,
    AtLower,
    AtUpper,
    /// Free variable parked at zero.
    FreeZero,
}

struct Simplex<'a> {
    prob: &'a LpProblem,
    cfg: &'a LpConfig,
    m: usize,
    d: usize,
    ncols: usize,
    n_art: usize,
    /// m x ncols tableau, rows of B⁻¹[A | I | -I_art].
    t: Vec<f64>,
    /// Reduced costs for the current phase.
    cost: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    state: Vec<VarState>,
    /// Current value of every variable (basic or at its bound).
    x: Vec<f64>,
    basis: Vec<usize>,
    /// Devex reference weights for pricing.
    devex: Vec<f64>,
    iterations: usize,
    max_iterations: usize,
}

enum PhaseEnd {
    Converged,
    Unbounded,
    IterationLimit,
}

impl<'a> Simplex<'a> {
    fn new(prob: &'a LpProblem, cfg: &'a LpConfig) -> Self {
        let m = prob.constraints.rows();
        let d = prob.constraints.cols();

        let mut lower = prob.lower.clone();
        let mut upper = prob.upper.clone();
        lower.extend(std::iter::repeat(0.0).take(m));
        upper.extend(std::iter::repeat(f64::INFINITY).take(m));

        let mut state = Vec::with_capacity(d + m);
        let mut x = Vec::with_capacity(d + m);
        for j in 0..d {
            if prob.lower[j].is_finite() {
                state.push(VarState::AtLower);
                x.push(prob.lower[j]);
            } else if prob.upper[j].is_finite() {
                state.push(VarState::AtUpper);
                x.push(prob.upper[j]);
            } else {
                state.push(VarState::FreeZero);
                x.push(0.0);
            }
        }

        // Slack values for the all-slack basis.
        let mut slack = prob.rhs.clone();
        for (i, s) in slack.iter_mut().enumerate() {
            *s -= dot(prob.constraints.row(i), &x[..d]);
        }
        let art_rows: Vec<usize> = (0..m).filter(|&i| slack[i] < 0.0).collect();
        let n_art = art_rows.len();
        let ncols = d + m + n_art;

        let mut t = vec![0.0; m * ncols];
        for i in 0..m {
            let sign = if slack[i] < 0.0 { -1.0 } else { 1.0 };
            let row = &mut t[i * ncols..(i + 1) * ncols];
            for (j, v) in prob.constraints.row(i).iter().enumerate() {
                row[j] = sign * v;
            }
            row[d + i] = sign;
        }
        // Artificial columns: -e_i on their row, so B⁻¹(-e_i) = +e_i there.
        for (k, &i) in art_rows.iter().enumerate() {
            t[i * ncols + d + m + k] = 1.0;
        }

        let mut basis = Vec::with_capacity(m);
        let mut art_idx = 0;
        for i in 0..m {
            if slack[i] < 0.0 {
                let col = d + m + art_idx;
                art_idx += 1;
                basis.push(col);
                state.push(VarState::AtLower); // slack i nonbasic at 0
                x.push(0.0);
            } else {
                basis.push(d + i);
                state.push(VarState::Basic);
                x.push(slack[i]);
            }
        }
        lower.extend(std::iter::repeat(0.0).take(n_art));
        upper.extend(std::iter::repeat(f64::INFINITY).take(n_art));
        for (k, &i) in art_rows.iter().enumerate() {
            state.push(VarState::Basic);
            x.push(-slack[i]);
            debug_assert_eq!(basis[i], d + m + k);
        }
        for i in 0..m {
            if slack[i] >= 0.0 {
                state[basis[i]] = VarState::Basic;
            }
        }

        let max_iterations = cfg.max_iter_factor * (m + d);
        Simplex {
            prob,
            cfg,
            m,
            d,
            ncols,
            n_art,
            t,
            cost: vec![0.0; ncols],
            lower,
            upper,
            state,
            x,
            basis,
            devex: vec![1.0; ncols],
            iterations: 0,
            max_iterations,
        }
    }

    #[inline]
    fn trow(&self, i: usize) -> &[f64] {
        &self.t[i * self.ncols..(i + 1) * self.ncols]
    }

    /// Rebuilds the reduced-cost row `c - c_B B⁻¹ A` for the given raw costs.
    fn rebuild_cost(&mut self, raw: &[f64]) {
        self.cost.copy_from_slice(raw);
        for r in 0..self.m {
            let cb = raw[self.basis[r]];
            if cb != 0.0 {
                let (cost, t) = (&mut self.cost, &self.t);
                let row = &t[r * self.ncols..(r + 1) * self.ncols];
                for (c, a) in cost.iter_mut().zip(row) {
                    *c -= cb * a;
                }
            }
        }
        for r in 0..self.m {
            self.cost[self.basis[r]] = 0.0;
        }
    }

    /// Entering column and direction, or None when dual feasible. Default
    /// pricing is Devex (largest z²/weight); Bland mode takes the lowest
    /// eligible index.
    fn price(&self, bland: bool) -> Option<(usize, f64)> {
        let tol = self.cfg.pivot_tol;
        let mut best: Option<(usize, f64, f64)> = None; // (col, dir, score)
        for j in 0..self.ncols {
            if self.state[j] == VarState::Basic || self.lower[j] >= self.upper[j] {
                continue;
            }
            let z = self.cost[j];
            let dir = match self.state[j] {
                VarState::AtLower => {
                    if z < -tol {
                        1.0
                    } else {
                        continue;
                    }
                }
                VarState::AtUpper => {
                    if z > tol {
                        -1.0
                    } else {
                        continue;
                    }
                }
                VarState::FreeZero => {
                    if z < -tol {
                        1.0
                    } else if z > tol {
                        -1.0
                    } else {
                        continue;
                    }
                }
                VarState::Basic => unreachable!(),
            };
            if bland {
                return Some((j, dir));
            }
            let score = z * z / self.devex[j];
            match best {
                Some((_, _, s)) if s >= score => {}
                _ => best = Some((j, dir, score)),
            }
        }
        best.map(|(j, dir, _)| (j, dir))
    }

    /// One phase of the simplex method with the current cost row.
    fn run(&mut self) -> PhaseEnd {
        let pivot_tol = self.cfg.pivot_tol;
        let mut bland = false;
        let mut degenerate_run = 0usize;
        let stall_limit = self.m + self.d;
        let mut since_rebuild = 0usize;

        loop {
            if self.iterations >= self.max_iterations {
                return PhaseEnd::IterationLimit;
            }
            let Some((enter, dir)) = self.price(bland) else {
                return PhaseEnd::Converged;
            };

            // Ratio test: how far can x[enter] move along `dir`.
            let own_cap = if dir > 0.0 {
                self.upper[enter] - self.x[enter]
            } else {
                self.x[enter] - self.lower[enter]
            };
            let mut t_best = f64::INFINITY;
            let mut leave: Option<(usize, bool)> = None; // (row, hits_lower)
            for r in 0..self.m {
                let alpha = dir * self.trow(r)[enter];
                let b = self.basis[r];
                if alpha > pivot_tol {
                    let l = self.lower[b];
                    if l > f64::NEG_INFINITY {
                        let ratio = ((self.x[b] - l) / alpha).max(0.0);
                        if ratio < t_best - 1e-15
                            || (ratio <= t_best + 1e-15 && self.better_leave(leave, r, bland, enter))
                        {
                            t_best = ratio.min(t_best);
                            leave = Some((r, true));
                        }
                    }
                } else if alpha < -pivot_tol {
                    let u = self.upper[b];
                    if u < f64::INFINITY {
                        let ratio = ((u - self.x[b]) / (-alpha)).max(0.0);
                        if ratio < t_best - 1e-15
                            || (ratio <= t_best + 1e-15 && self.better_leave(leave, r, bland, enter))
                        {
                            t_best = ratio.min(t_best);
                            leave = Some((r, false));
                        }
                    }
                }
            }

            self.iterations += 1;
            if t_best.is_infinite() && own_cap.is_infinite() {
                return PhaseEnd::Unbounded;
            }

            if own_cap <= t_best {
                // Bound flip, no basis change.
                let step = own_cap;
                for r in 0..self.m {
                    let a = self.trow(r)[enter];
                    if a != 0.0 {
                        self.x[self.basis[r]] -= dir * step * a;
                    }
                }
                self.x[enter] += dir * step;
                self.state[enter] = if dir > 0.0 {
                    VarState::AtUpper
                } else {
                    VarState::AtLower
                };
                if dir > 0.0 {
                    self.x[enter] = self.upper[enter];
                } else {
                    self.x[enter] = self.lower[enter];
                }
                degenerate_run = 0;
                bland = false;
                continue;
            }

            let (r, hits_lower) = leave.expect("finite ratio must name a row");
            let step = t_best;

            // Update primal values with the pre-pivot column.
            for i in 0..self.m {
                let a = self.trow(i)[enter];
                if a != 0.0 {
                    self.x[self.basis[i]] -= dir * step * a;
                }
            }
            self.x[enter] += dir * step;

            let leaving = self.basis[r];
            self.x[leaving] = if hits_lower {
                self.lower[leaving]
            } else {
                self.upper[leaving]
            };
            self.state[leaving] = if hits_lower {
                VarState::AtLower
            } else {
                VarState::AtUpper
            };
            if self.lower[leaving] == f64::NEG_INFINITY && self.upper[leaving] == f64::INFINITY {
                self.state[leaving] = VarState::FreeZero;
                self.x[leaving] = 0.0;
            }
            self.state[enter] = VarState::Basic;
            self.basis[r] = enter;

            let wq = self.devex[enter].max(1.0);
            let pivot = self.trow(r)[enter];
            self.eliminate(r, enter);
            self.devex[leaving] = (wq / (pivot * pivot)).max(1.0);

            since_rebuild += 1;
            if since_rebuild >= 512 {
                // Periodic refresh to curb cost-row drift on long runs.
                since_rebuild = 0;
                let raw = self.current_raw_cost();
                self.rebuild_cost(&raw);
            }

            if step < 1e-12 {
                degenerate_run += 1;
                if degenerate_run > stall_limit {
                    bland = true;
                }
            } else {
                degenerate_run = 0;
                bland = false;
            }
        }
    }

    fn better_leave(&self, current: Option<(usize, bool)>, cand_row: usize, bland: bool, enter: usize) -> bool {
        match current {
            None => true,
            Some((r, _)) => {
                if bland {
                    // Bland's rule: smallest basic variable index leaves.
                    self.basis[cand_row] < self.basis[r]
                } else {
                    // Prefer the numerically larger pivot, then lowest index.
                    let a = self.trow(cand_row)[enter].abs();
                    let b = self.trow(r)[enter].abs();
                    a > b || (a == b && self.basis[cand_row] < self.basis[r])
                }
            }
        }
    }

    /// Gauss-Jordan elimination to make column `col` the unit vector e_r,
    /// folding in the Devex weight update from the normalized pivot row.
    fn eliminate(&mut self, r: usize, col: usize) {
        let ncols = self.ncols;
        let pivot = self.t[r * ncols + col];
        debug_assert!(pivot.abs() > 0.0);
        let inv = 1.0 / pivot;
        for v in &mut self.t[r * ncols..(r + 1) * ncols] {
            *v *= inv;
        }
        self.t[r * ncols + col] = 1.0;

        let (before, rest) = self.t.split_at_mut(r * ncols);
        let (prow, after) = rest.split_at_mut(ncols);

        let wq = self.devex[col].max(1.0);
        for (w, a) in self.devex.iter_mut().zip(prow.iter()) {
            if *a != 0.0 {
                let cand = a * a * wq;
                if cand > *w {
                    *w = cand;
                }
            }
        }
        for chunk in before.chunks_exact_mut(ncols) {
            let f = chunk[col];
            if f != 0.0 {
                for (v, p) in chunk.iter_mut().zip(prow.iter()) {
                    *v -= f * p;
                }
                chunk[col] = 0.0;
            }
        }
        for chunk in after.chunks_exact_mut(ncols) {
            let f = chunk[col];
            if f != 0.0 {
                for (v, p) in chunk.iter_mut().zip(prow.iter()) {
                    *v -= f * p;
                }
                chunk[col] = 0.0;
            }
        }
        let f = self.cost[col];
        if f != 0.0 {
            for (c, p) in self.cost.iter_mut().zip(prow.iter()) {
                *c -= f * p;
            }
            self.cost[col] = 0.0;
        }
    }

    fn current_raw_cost(&self) -> Vec<f64> {
        // Raw cost of whichever phase is active is reconstructed from the
        // artificial bound lock: phase 1 iff artificials are still unlocked.
        let mut raw = vec![0.0; self.ncols];
        if self.phase1_active() {
            for j in (self.d + self.m)..self.ncols {
                raw[j] = 1.0;
            }
        } else {
            raw[..self.d].copy_from_slice(&self.prob.objective);
        }
        raw
    }

    fn phase1_active(&self) -> bool {
        self.n_art > 0 && self.upper[self.d + self.m] == f64::INFINITY
    }

    fn infeasibility(&self) -> f64 {
        (self.d + self.m..self.ncols).map(|j| self.x[j]).sum()
    }

    /// Locks artificial variables at zero and pivots basic ones out where a
    /// non-artificial pivot entry exists.
    fn retire_artificials(&mut self) {
        for j in (self.d + self.m)..self.ncols {
            self.upper[j] = 0.0;
        }
        for r in 0..self.m {
            if self.basis[r] >= self.d + self.m {
                let col = (0..self.d + self.m).find(|&j| {
                    self.state[j] != VarState::Basic
                        && self.trow(r)[j].abs() > self.cfg.pivot_tol
                });
                if let Some(j) = col {
                    // Zero-step pivot: the primal point does not move, the
                    // entering variable keeps its current value as a basic.
                    let old = self.basis[r];
                    self.state[old] = VarState::AtLower;
                    self.x[old] = 0.0;
                    self.state[j] = VarState::Basic;
                    self.basis[r] = j;
                    self.eliminate(r, j);
                }
                // Otherwise the row is redundant: the artificial stays basic,
                // pinned to [0, 0] by its locked bounds.
            }
        }
    }

    /// Recomputes basic values from first principles through B⁻¹ (the slack
    /// block of the tableau), clearing accumulated drift.
    fn refresh_basics(&mut self) {
        let mut b_adj = self.prob.rhs.clone();
        for j in 0..self.d {
            if self.state[j] != VarState::Basic && self.x[j] != 0.0 {
                let xj = self.x[j];
                for i in 0..self.m {
                    b_adj[i] -= self.prob.constraints.get(i, j) * xj;
                }
            }
        }
        // Nonbasic slacks sit at 0 and artificials are locked at 0, so only
        // structural nonbasics contribute.
        for r in 0..self.m {
            let row = self.trow(r);
            let mut v = 0.0;
            for i in 0..self.m {
                v += row[self.d + i] * b_adj[i];
            }
            self.x[self.basis[r]] = v;
        }
    }
}

/// Solves the LP. `Infeasible`/`Unbounded`/`IterationLimit` are statuses on
/// the returned solution, not errors; errors are reserved for malformed
/// input. Optimality means the final basis is dual feasible (no reduced cost
/// passes the pricing test) and the recomputed primal point satisfies every
/// constraint within `feas_tol`.
pub fn solve_lp(prob: &LpProblem, cfg: &LpConfig) -> Result<LpSolution> {
    for j in 0..prob.lower.len() {
        if prob.lower[j] > prob.upper[j] {
            return Ok(LpSolution {
                status: LpStatus::Infeasible,
                x: vec![0.0; prob.objective.len()],
                objective_value: f64::NAN,
                iterations: 0,
            });
        }
    }

    let mut s = Simplex::new(prob, cfg);

    if s.n_art > 0 {
        let mut raw = vec![0.0; s.ncols];
        for j in (s.d + s.m)..s.ncols {
            raw[j] = 1.0;
        }
        s.rebuild_cost(&raw);
        match s.run() {
            PhaseEnd::Converged => {}
            PhaseEnd::Unbounded | PhaseEnd::IterationLimit => {
                // Phase 1 is bounded below by zero, so Unbounded here means
                // numerical breakdown; report the iteration limit either way.
                return Ok(finish(s, LpStatus::IterationLimit));
            }
        }
        let scale = prob.rhs.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
        if s.infeasibility() > cfg.feas_tol * scale {
            return Ok(finish(s, LpStatus::Infeasible));
        }
        s.retire_artificials();
    }

    let mut raw = vec![0.0; s.ncols];
    raw[..s.d].copy_from_slice(&prob.objective);
    s.rebuild_cost(&raw);
    s.devex.fill(1.0);
    let status = match s.run() {
        PhaseEnd::Converged => LpStatus::Optimal,
        PhaseEnd::Unbounded => LpStatus::Unbounded,
        PhaseEnd::IterationLimit => LpStatus::IterationLimit,
    };
    if status == LpStatus::Optimal {
        s.refresh_basics();
    }
    Ok(finish(s, status))
}

fn finish(s: Simplex<'_>, status: LpStatus) -> LpSolution {
    let x: Vec<f64> = s.x[..s.d].to_vec();
    let objective_value = dot(&s.prob.objective, &x);
    LpSolution {
        status,
        x,
        objective_value,
        iterations: s.iterations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cfg() -> LpConfig {
        LpConfig::default()
    }

    #[test]
    fn single_binding_constraint() {
        // min x s.t. x >= 1, written as -x <= -1.
        let prob = LpProblem::unbounded_vars(
            vec![1.0],
            Matrix::from_rows(&[vec![-1.0]]).unwrap(),
            vec![-1.0],
        )
        .unwrap();
        let sol = solve_lp(&prob, &cfg()).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.x[0] - 1.0).abs() < 1e-9);
        assert!((sol.objective_value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn empty_polytope_is_infeasible() {
        let prob = LpProblem::unbounded_vars(
            vec![0.0],
            Matrix::from_rows(&[vec![1.0], vec![-1.0]]).unwrap(),
            vec![-1.0, -1.0],
        )
        .unwrap();
        let sol = solve_lp(&prob, &cfg()).unwrap();
        assert_eq!(sol.status, LpStatus::Infeasible);
    }

    #[test]
    fn two_dim_vertex_optimum() {
        // min -x - y s.t. x + y <= 1, x <= 0.7, with 0 <= x, 0 <= y <= 0.8.
        let prob = LpProblem::new(
            vec![-1.0, -1.0],
            Matrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 0.0]]).unwrap(),
            vec![1.0, 0.7],
            vec![0.0, 0.0],
            vec![f64::INFINITY, 0.8],
        )
        .unwrap();
        let sol = solve_lp(&prob, &cfg()).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective_value - (-1.0)).abs() < 1e-9);
    }

    #[test]
    fn unbounded_detected() {
        let prob = LpProblem::unbounded_vars(
            vec![-1.0],
            Matrix::from_rows(&[vec![-1.0]]).unwrap(),
            vec![0.0],
        )
        .unwrap();
        let sol = solve_lp(&prob, &cfg()).unwrap();
        assert_eq!(sol.status, LpStatus::Unbounded);
    }

    #[test]
    fn deterministic_replay() {
        let prob = LpProblem::new(
            vec![-0.3, 0.7, -1.1],
            Matrix::from_rows(&[
                vec![1.0, 2.0, -0.5],
                vec![-1.3, 0.2, 1.0],
                vec![0.4, -0.9, 0.3],
            ])
            .unwrap(),
            vec![1.5, 0.7, 2.0],
            vec![-2.0, -2.0, -2.0],
            vec![2.0, 2.0, 2.0],
        )
        .unwrap();
        let a = solve_lp(&prob, &cfg()).unwrap();
        let b = solve_lp(&prob, &cfg()).unwrap();
        assert_eq!(a.status, b.status);
        for (u, v) in a.x.iter().zip(&b.x) {
            assert_eq!(u.to_bits(), v.to_bits());
        }
        assert_eq!(a.objective_value.to_bits(), b.objective_value.to_bits());
    }

    /// Brute-force vertex enumeration over {Ax <= b, l <= x <= u}: every
    /// d-subset of the m + 2d hyperplanes is intersected and checked.
    fn vertices(a: &Matrix, b: &[f64], l: &[f64], u: &[f64]) -> Vec<Vec<f64>> {
        let m = a.rows();
        let d = a.cols();
        let mut planes: Vec<(Vec<f64>, f64)> = Vec::new();
        for i in 0..m {
            planes.push((a.row(i).to_vec(), b[i]));
        }
        for j in 0..d {
            let mut e = vec![0.0; d];
            e[j] = 1.0;
            planes.push((e.clone(), u[j]));
            e[j] = -1.0;
            planes.push((e, -l[j]));
        }
        let mut out = Vec::new();
        let idx: Vec<usize> = (0..planes.len()).collect();
        let mut pick = vec![0usize; d];
        fn rec(
            idx: &[usize],
            pick: &mut Vec<usize>,
            k: usize,
            start: usize,
            planes: &[(Vec<f64>, f64)],
            a: &Matrix,
            b: &[f64],
            l: &[f64],
            u: &[f64],
            out: &mut Vec<Vec<f64>>,
        ) {
            let d = pick.len();
            if k == d {
                let sys = Matrix::from_rows(
                    &pick.iter().map(|&i| planes[i].0.clone()).collect::<Vec<_>>(),
                )
                .unwrap();
                let rhs: Vec<f64> = pick.iter().map(|&i| planes[i].1).collect();
                if let Some(x) = crate::linalg::lu_solve(&sys, &rhs, 1e-9) {
                    let feas = (0..a.rows()).all(|i| dot(a.row(i), &x) <= b[i] + 1e-7)
                        && x.iter()
                            .zip(l.iter().zip(u))
                            .all(|(v, (lo, hi))| *v >= lo - 1e-7 && *v <= hi + 1e-7);
                    if feas {
                        out.push(x);
                    }
                }
                return;
            }
            for s in start..idx.len() {
                pick[k] = idx[s];
                rec(idx, pick, k + 1, s + 1, planes, a, b, l, u, out);
            }
        }
        rec(&idx, &mut pick, 0, 0, &planes, a, b, l, u, &mut out);
        out
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(120))]
        #[test]
        fn optimal_matches_vertex_enumeration(
            d in 1usize..=3,
            m in 1usize..=6,
            seed_entries in proptest::collection::vec(-3.0f64..3.0, 6 * 3),
            rhs_entries in proptest::collection::vec(-2.0f64..3.0, 6),
            obj_entries in proptest::collection::vec(-1.0f64..1.0, 3),
        ) {
            let a = Matrix::new(
                m,
                d,
                (0..m * d).map(|k| seed_entries[k]).collect(),
            ).unwrap();
            let b: Vec<f64> = rhs_entries[..m].to_vec();
            let c: Vec<f64> = obj_entries[..d].to_vec();
            let l = vec![-5.0; d];
            let u = vec![5.0; d];
            let prob = LpProblem::new(c.clone(), a.clone(), b.clone(), l.clone(), u.clone()).unwrap();
            let sol = solve_lp(&prob, &cfg()).unwrap();
            let verts = vertices(&a, &b, &l, &u);
            match sol.status {
                LpStatus::Optimal => {
                    prop_assert!(!verts.is_empty());
                    let best = verts
                        .iter()
                        .map(|v| dot(&c, v))
                        .fold(f64::INFINITY, f64::min);
                    // Optimal LP value must match the best vertex.
                    prop_assert!(sol.objective_value <= best + 1e-8,
                        "lp {} vs vertex {}", sol.objective_value, best);
                    prop_assert!(sol.objective_value >= best - 1e-7);
                    // Primal feasibility of the returned point.
                    for i in 0..m {
                        prop_assert!(dot(a.row(i), &sol.x) <= b[i] + 1e-8);
                    }
                }
                LpStatus::Infeasible => {
                    prop_assert!(verts.is_empty());
                }
                // Box bounds keep the problem bounded.
                LpStatus::Unbounded => prop_assert!(false, "boxed LP cannot be unbounded"),
                LpStatus::IterationLimit => prop_assert!(false, "tiny LP hit iteration cap"),
            }
        }
    }
}
