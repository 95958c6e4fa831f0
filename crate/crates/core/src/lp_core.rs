//! Dense-tableau bounded-variable primal simplex.
//!
//! Every row `a·x (<= | =) b` gets a slack `s` with `a·x + s = b`, where
//! `s >= 0` for `<=` rows and `s = 0` for equality rows. Nonbasic columns sit
//! at a finite bound. Rows whose slack cannot start feasible receive an
//! artificial column, and phase one minimizes the artificial sum.
//!
//! The tableau `B^-1 A` is updated by pivoting and rebuilt from the original
//! rows every `refactor_every` pivots and before optimality is declared.

use crate::error::{Error, Result};
use crate::formulation::{LinearRow, MipModel, ObjSense, RowSense};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LpOptions {
    /// Primal feasibility tolerance.
    pub feas_tol: f64,
    /// Reduced-cost tolerance.
    pub opt_tol: f64,
    pub max_iterations: usize,
    /// Consecutive degenerate pivots before switching to Bland's rule.
    pub bland_after: usize,
    pub refactor_every: usize,
}

impl Default for LpOptions {
    fn default() -> Self {
        Self {
            feas_tol: 1e-7,
            opt_tol: 1e-9,
            max_iterations: 50_000,
            bland_after: 1000,
            refactor_every: 50,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Values of the structural columns.
    pub primal: Vec<f64>,
    /// Objective in the problem's own sense.
    pub objective: f64,
    /// Row duals in the problem's own sense: `c = A^T dual + reduced_costs`.
    pub dual: Vec<f64>,
    pub reduced_costs: Vec<f64>,
    pub iterations: usize,
}

/// Per-column bound replacement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundOverride {
    pub col: usize,
    pub lower: f64,
    pub upper: f64,
}

/// A continuous linear program `opt c·x` over rows and column bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    pub sense: ObjSense,
    pub cost: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub rows: Vec<LinearRow>,
}

impl LpProblem {
    /// LP relaxation of `model` (integrality dropped).
    pub fn from_model(model: &MipModel) -> Self {
        let n = model.num_vars();
        let mut cost = vec![0.0; n];
        for &(j, c) in &model.objective().coeffs {
            cost[j] += c;
        }
        Self {
            sense: model.objective().sense,
            cost,
            lower: model.variables().iter().map(|v| v.lower).collect(),
            upper: model.variables().iter().map(|v| v.upper).collect(),
            rows: model.constraints().to_vec(),
        }
    }

    pub fn num_cols(&self) -> usize {
        self.cost.len()
    }

    pub fn apply_overrides(&mut self, overrides: &[BoundOverride]) -> Result<()> {
        for o in overrides {
            if o.col >= self.num_cols() {
                return Err(Error::Lp(format!("override on unknown column {}", o.col)));
            }
            self.lower[o.col] = o.lower;
            self.upper[o.col] = o.upper;
        }
        Ok(())
    }
}

/// Solves the LP relaxation of `model` plus `extra_rows` with bound overrides.
pub fn solve_lp(
    model: &MipModel,
    extra_rows: &[LinearRow],
    overrides: &[BoundOverride],
) -> Result<LpSolution> {
    let mut problem = LpProblem::from_model(model);
    problem.rows.extend_from_slice(extra_rows);
    problem.apply_overrides(overrides)?;
    let mut solver = LpSolver::new(problem, LpOptions::default())?;
    Ok(solver.solve())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ColKind {
    Structural,
    Slack,
    Artificial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ColState {
    Basic,
    AtLower,
    AtUpper,
}

enum PhaseEnd {
    Optimal,
    Unbounded,
    IterationLimit,
}

/// Stateful simplex instance supporting row addition with warm start.
#[derive(Debug, Clone)]
pub struct LpSolver {
    opts: LpOptions,
    sense: ObjSense,
    n_struct: usize,
    /// Minimization cost per column (phase two).
    cost: Vec<f64>,
    kind: Vec<ColKind>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    state: Vec<ColState>,
    /// Original sparse rows over all columns, including slack and artificial.
    orig: Vec<Vec<(usize, f64)>>,
    rhs: Vec<f64>,
    tab: Vec<Vec<f64>>,
    beta: Vec<f64>,
    basis: Vec<usize>,
    iterations: usize,
    pivots_since_refactor: usize,
    degenerate_run: usize,
    bland: bool,
    solved: bool,
    last: Option<LpSolution>,
}

impl LpSolver {
    pub fn new(problem: LpProblem, opts: LpOptions) -> Result<Self> {
        let n = problem.num_cols();
        if problem.lower.len() != n || problem.upper.len() != n {
            return Err(Error::Lp("bound vectors do not match column count".into()));
        }
        for j in 0..n {
            let (l, u) = (problem.lower[j], problem.upper[j]);
            if l.is_nan() || u.is_nan() || (l == f64::NEG_INFINITY && u == f64::INFINITY) {
                return Err(Error::Lp(format!("column {j} has no finite bound")));
            }
        }
        let flip = if problem.sense == ObjSense::Maximize {
            -1.0
        } else {
            1.0
        };
        let mut solver = Self {
            opts,
            sense: problem.sense,
            n_struct: n,
            cost: problem.cost.iter().map(|c| flip * c).collect(),
            kind: vec![ColKind::Structural; n],
            lo: problem.lower.clone(),
            hi: problem.upper.clone(),
            state: Vec::with_capacity(n),
            orig: Vec::new(),
            rhs: Vec::new(),
            tab: Vec::new(),
            beta: Vec::new(),
            basis: Vec::new(),
            iterations: 0,
            pivots_since_refactor: 0,
            degenerate_run: 0,
            bland: false,
            solved: false,
            last: None,
        };
        for j in 0..n {
            let s = if solver.lo[j] > f64::NEG_INFINITY {
                ColState::AtLower
            } else {
                ColState::AtUpper
            };
            solver.state.push(s);
        }
        for row in &problem.rows {
            solver.check_row(row)?;
        }
        for row in problem.rows {
            solver.push_row(row);
        }
        Ok(solver)
    }

    fn check_row(&self, row: &LinearRow) -> Result<()> {
        if !row.rhs.is_finite() {
            return Err(Error::Lp("non-finite right-hand side".into()));
        }
        for &(j, a) in &row.coeffs {
            if j >= self.n_struct {
                return Err(Error::Lp(format!("row references unknown column {j}")));
            }
            if !a.is_finite() {
                return Err(Error::Lp("non-finite coefficient".into()));
            }
        }
        Ok(())
    }

    fn num_cols(&self) -> usize {
        self.kind.len()
    }

    fn add_column(&mut self, kind: ColKind, lo: f64, hi: f64, state: ColState) -> usize {
        let j = self.kind.len();
        self.kind.push(kind);
        self.lo.push(lo);
        self.hi.push(hi);
        self.cost.push(0.0);
        self.state.push(state);
        for r in &mut self.tab {
            r.push(0.0);
        }
        j
    }

    fn nonbasic_value(&self, j: usize) -> f64 {
        match self.state[j] {
            ColState::AtLower => self.lo[j],
            ColState::AtUpper => self.hi[j],
            ColState::Basic => unreachable!("basic column has no bound value"),
        }
    }

    fn value(&self, j: usize) -> f64 {
        match self.state[j] {
            ColState::Basic => {
                let r = self
                    .basis
                    .iter()
                    .position(|&b| b == j)
                    .expect("basic column");
                self.beta[r]
            }
            _ => self.nonbasic_value(j),
        }
    }

    fn all_values(&self) -> Vec<f64> {
        let mut x: Vec<f64> = (0..self.num_cols())
            .map(|j| match self.state[j] {
                ColState::Basic => 0.0,
                _ => self.nonbasic_value(j),
            })
            .collect();
        for (r, &b) in self.basis.iter().enumerate() {
            x[b] = self.beta[r];
        }
        x
    }

    /// Appends a row with its slack basic, or an artificial basic when the
    /// slack would start outside its bounds.
    fn push_row(&mut self, row: LinearRow) {
        let x = self.all_values();
        let (slack_lo, slack_hi) = match row.sense {
            RowSense::Le => (0.0, f64::INFINITY),
            RowSense::Eq => (0.0, 0.0),
        };
        let slack = self.add_column(ColKind::Slack, slack_lo, slack_hi, ColState::AtLower);
        let mut coeffs = row.coeffs.clone();
        coeffs.push((slack, 1.0));

        // New tableau row: eliminate current basic columns.
        let mut trow = vec![0.0; self.num_cols()];
        for &(j, a) in &coeffs {
            trow[j] += a;
        }
        for (k, &b) in self.basis.iter().enumerate() {
            let f = trow[b];
            if f != 0.0 {
                for (t, v) in trow.iter_mut().zip(&self.tab[k]) {
                    *t -= f * v;
                }
                trow[b] = 0.0;
            }
        }
        let activity: f64 = row.coeffs.iter().map(|&(j, a)| a * x[j]).sum();
        let resid = row.rhs - activity;
        let tol = self.opts.feas_tol;
        let slack_ok = resid >= slack_lo - tol && resid <= slack_hi + tol;

        self.rhs.push(row.rhs);
        if slack_ok {
            self.state[slack] = ColState::Basic;
            self.basis.push(slack);
            self.beta.push(resid);
            self.orig.push(coeffs);
            self.tab.push(trow);
        } else {
            let sigma = if resid >= 0.0 { 1.0 } else { -1.0 };
            let art = self.add_column(ColKind::Artificial, 0.0, f64::INFINITY, ColState::Basic);
            trow.push(sigma);
            for v in &mut trow {
                *v *= sigma;
            }
            coeffs.push((art, sigma));
            self.basis.push(art);
            self.beta.push(resid.abs());
            self.orig.push(coeffs);
            self.tab.push(trow);
        }
        self.solved = false;
    }

    fn reduced_costs(&self, cost: &[f64]) -> Vec<f64> {
        let mut d = cost.to_vec();
        for (r, &b) in self.basis.iter().enumerate() {
            let cb = cost[b];
            if cb != 0.0 {
                for (dj, t) in d.iter_mut().zip(&self.tab[r]) {
                    *dj -= cb * t;
                }
            }
        }
        for &b in &self.basis {
            d[b] = 0.0;
        }
        d
    }

    fn choose_entering(&self, d: &[f64]) -> Option<(usize, f64)> {
        let tol = self.opts.opt_tol;
        let mut best: Option<(usize, f64)> = None;
        let mut best_score = 0.0;
        for j in 0..self.num_cols() {
            if self.lo[j] == self.hi[j] {
                continue;
            }
            let dir = match self.state[j] {
                ColState::AtLower if d[j] < -tol => 1.0,
                ColState::AtUpper if d[j] > tol => -1.0,
                _ => continue,
            };
            if self.bland {
                return Some((j, dir));
            }
            let score = d[j].abs();
            if score > best_score {
                best_score = score;
                best = Some((j, dir));
            }
        }
        best
    }

    /// Returns `(leaving row or None for a bound flip, step)`; `None` if unbounded.
    fn ratio_test(&self, enter: usize, dir: f64) -> Option<(Option<usize>, f64)> {
        const PIV_TOL: f64 = 1e-9;
        let range = self.hi[enter] - self.lo[enter];
        let m = self.basis.len();
        let ratio = |r: usize, slack: f64| -> Option<(f64, f64)> {
            let g = dir * self.tab[r][enter];
            let b = self.basis[r];
            if g > PIV_TOL && self.lo[b] > f64::NEG_INFINITY {
                Some((((self.beta[r] - self.lo[b]) + slack) / g, g))
            } else if g < -PIV_TOL && self.hi[b] < f64::INFINITY {
                Some((((self.hi[b] - self.beta[r]) + slack) / -g, -g))
            } else {
                None
            }
        };

        if self.bland {
            let mut best: Option<(usize, f64)> = None;
            for r in 0..m {
                if let Some((t, _)) = ratio(r, 0.0) {
                    let t = t.max(0.0);
                    let better = match best {
                        None => true,
                        Some((br, bt)) => {
                            t < bt - 1e-12 || (t <= bt + 1e-12 && self.basis[r] < self.basis[br])
                        }
                    };
                    if better {
                        best = Some((r, t));
                    }
                }
            }
            return match best {
                Some((_, t)) if range <= t => Some((None, range)),
                Some((r, t)) => Some((Some(r), t)),
                None if range.is_finite() => Some((None, range)),
                None => None,
            };
        }

        // Harris two-pass test.
        let harris = self.opts.feas_tol * 0.1;
        let mut t_max = f64::INFINITY;
        for r in 0..m {
            if let Some((t, _)) = ratio(r, harris) {
                t_max = t_max.min(t);
            }
        }
        if range <= t_max {
            return if range.is_finite() {
                Some((None, range))
            } else {
                None
            };
        }
        let mut best: Option<(usize, f64, f64)> = None;
        for r in 0..m {
            if let Some((t, g)) = ratio(r, 0.0) {
                if t <= t_max {
                    let better = match best {
                        None => true,
                        Some((br, _, bg)) => g > bg || (g == bg && self.basis[r] < self.basis[br]),
                    };
                    if better {
                        best = Some((r, t.max(0.0), g));
                    }
                }
            }
        }
        best.map(|(r, t, _)| (Some(r), t))
    }

    fn pivot(&mut self, r: usize, enter: usize) {
        let p = self.tab[r][enter];
        let prow: Vec<f64> = self.tab[r].iter().map(|v| v / p).collect();
        for (k, row) in self.tab.iter_mut().enumerate() {
            if k == r {
                continue;
            }
            let f = row[enter];
            if f != 0.0 {
                for (v, pv) in row.iter_mut().zip(&prow) {
                    *v -= f * pv;
                }
                row[enter] = 0.0;
            }
        }
        self.tab[r] = prow;
        self.tab[r][enter] = 1.0;
    }

    fn step(&mut self, enter: usize, dir: f64, leave: Option<usize>, t: f64) {
        let delta = dir * t;
        for r in 0..self.basis.len() {
            let a = self.tab[r][enter];
            if a != 0.0 {
                self.beta[r] -= delta * a;
            }
        }
        let entering_value = self.nonbasic_value(enter) + delta;
        match leave {
            None => {
                self.state[enter] = match self.state[enter] {
                    ColState::AtLower => ColState::AtUpper,
                    _ => ColState::AtLower,
                };
            }
            Some(r) => {
                let out = self.basis[r];
                let g = dir * self.tab[r][enter];
                self.state[out] = if g > 0.0 {
                    ColState::AtLower
                } else {
                    ColState::AtUpper
                };
                self.pivot(r, enter);
                self.basis[r] = enter;
                self.state[enter] = ColState::Basic;
                self.beta[r] = entering_value;
                self.pivots_since_refactor += 1;
            }
        }
    }

    /// Rebuilds `B^-1 A` and basic values from the original rows.
    fn refactor(&mut self) -> bool {
        let m = self.basis.len();
        let ncols = self.num_cols();
        let mut mat: Vec<Vec<f64>> = self
            .orig
            .iter()
            .map(|coeffs| {
                let mut r = vec![0.0; ncols];
                for &(j, a) in coeffs {
                    r[j] += a;
                }
                r
            })
            .collect();
        let mut b: Vec<f64> = self.rhs.clone();
        for (i, row) in mat.iter().enumerate() {
            for j in 0..ncols {
                if self.state[j] != ColState::Basic && row[j] != 0.0 {
                    b[i] -= row[j] * self.nonbasic_value(j);
                }
            }
        }
        let cols = self.basis.clone();
        let mut assigned = vec![false; m];
        let mut new_basis = vec![usize::MAX; m];
        for &c in &cols {
            let mut best = None;
            let mut best_abs = 1e-11;
            for i in 0..m {
                if !assigned[i] && mat[i][c].abs() > best_abs {
                    best_abs = mat[i][c].abs();
                    best = Some(i);
                }
            }
            let Some(p) = best else {
                self.pivots_since_refactor = 0;
                return false;
            };
            assigned[p] = true;
            new_basis[p] = c;
            let pv = mat[p][c];
            for v in &mut mat[p] {
                *v /= pv;
            }
            b[p] /= pv;
            let prow = mat[p].clone();
            let pb = b[p];
            for i in 0..m {
                if i != p {
                    let f = mat[i][c];
                    if f != 0.0 {
                        for (v, pv) in mat[i].iter_mut().zip(&prow) {
                            *v -= f * pv;
                        }
                        mat[i][c] = 0.0;
                        b[i] -= f * pb;
                    }
                }
            }
        }
        self.tab = mat;
        self.beta = b;
        self.basis = new_basis;
        self.pivots_since_refactor = 0;
        true
    }

    fn run_phase(&mut self, cost: &[f64]) -> PhaseEnd {
        let mut confirmed = false;
        loop {
            if self.pivots_since_refactor >= self.opts.refactor_every {
                self.refactor();
            }
            let d = self.reduced_costs(cost);
            let Some((enter, dir)) = self.choose_entering(&d) else {
                if confirmed || self.pivots_since_refactor == 0 {
                    return PhaseEnd::Optimal;
                }
                // Confirm optimality on a fresh factorization.
                self.refactor();
                confirmed = true;
                continue;
            };
            confirmed = false;
            if self.iterations >= self.opts.max_iterations {
                return PhaseEnd::IterationLimit;
            }
            self.iterations += 1;
            let Some((leave, t)) = self.ratio_test(enter, dir) else {
                return PhaseEnd::Unbounded;
            };
            if t <= 1e-12 {
                self.degenerate_run += 1;
                if self.degenerate_run >= self.opts.bland_after {
                    self.bland = true;
                }
            } else {
                self.degenerate_run = 0;
            }
            self.step(enter, dir, leave, t);
        }
    }

    fn active_artificials(&self) -> Vec<usize> {
        (0..self.num_cols())
            .filter(|&j| self.kind[j] == ColKind::Artificial && self.hi[j] > 0.0)
            .collect()
    }

    /// Pivots basic artificials at zero out of the basis where possible.
    fn drive_out_artificials(&mut self) {
        for r in 0..self.basis.len() {
            let b = self.basis[r];
            if self.kind[b] != ColKind::Artificial {
                continue;
            }
            let candidate = (0..self.num_cols())
                .filter(|&j| {
                    self.state[j] != ColState::Basic
                        && self.kind[j] != ColKind::Artificial
                        && self.tab[r][j].abs() > 1e-7
                })
                .max_by(|&a, &c| {
                    self.tab[r][a]
                        .abs()
                        .total_cmp(&self.tab[r][c].abs())
                        .then(c.cmp(&a))
                });
            if let Some(j) = candidate {
                let value = self.nonbasic_value(j);
                self.state[b] = ColState::AtLower;
                self.pivot(r, j);
                self.basis[r] = j;
                self.state[j] = ColState::Basic;
                self.beta[r] = value;
                self.pivots_since_refactor += 1;
            }
        }
    }

    fn finish(&mut self, status: LpStatus) -> LpSolution {
        let x = self.all_values();
        let primal: Vec<f64> = x[..self.n_struct].to_vec();
        let flip = if self.sense == ObjSense::Maximize {
            -1.0
        } else {
            1.0
        };
        let objective = flip
            * self.cost[..self.n_struct]
                .iter()
                .zip(&primal)
                .map(|(c, v)| c * v)
                .sum::<f64>();
        let (dual, reduced_costs) = if status == LpStatus::Optimal {
            let d = self.reduced_costs(&self.cost);
            let mut dual = vec![0.0; self.orig.len()];
            for (i, coeffs) in self.orig.iter().enumerate() {
                let slack = coeffs
                    .iter()
                    .find(|&&(j, _)| self.kind[j] == ColKind::Slack)
                    .map(|&(j, _)| j)
                    .expect("every row has a slack");
                dual[i] = -flip * d[slack];
            }
            let rc = d[..self.n_struct].iter().map(|v| flip * v).collect();
            (dual, rc)
        } else {
            (Vec::new(), Vec::new())
        };
        let sol = LpSolution {
            status,
            primal,
            objective,
            dual,
            reduced_costs,
            iterations: self.iterations,
        };
        self.solved = true;
        self.last = Some(sol.clone());
        sol
    }

    /// Runs phase one (if needed) and phase two from the current basis.
    pub fn solve(&mut self) -> LpSolution {
        if self.solved {
            if let Some(s) = &self.last {
                return s.clone();
            }
        }
        for j in 0..self.n_struct {
            if self.lo[j] > self.hi[j] + self.opts.feas_tol {
                return self.finish(LpStatus::Infeasible);
            }
        }
        let arts = self.active_artificials();
        if !arts.is_empty() {
            let mut c1 = vec![0.0; self.num_cols()];
            for &j in &arts {
                c1[j] = 1.0;
            }
            match self.run_phase(&c1) {
                PhaseEnd::IterationLimit => return self.finish(LpStatus::IterationLimit),
                PhaseEnd::Unbounded => unreachable!("phase one is bounded below"),
                PhaseEnd::Optimal => {}
            }
            let infeas: f64 = arts.iter().map(|&j| self.value(j)).sum();
            let scale = self.rhs.iter().fold(1.0f64, |acc, v| acc.max(v.abs()));
            if infeas > self.opts.feas_tol * scale {
                return self.finish(LpStatus::Infeasible);
            }
            for &j in &arts {
                self.hi[j] = 0.0;
            }
            self.drive_out_artificials();
        }
        let cost = self.cost.clone();
        let status = match self.run_phase(&cost) {
            PhaseEnd::Optimal => LpStatus::Optimal,
            PhaseEnd::Unbounded => LpStatus::Unbounded,
            PhaseEnd::IterationLimit => LpStatus::IterationLimit,
        };
        self.finish(status)
    }

    /// Adds rows to a solved instance and re-optimizes from the current basis.
    pub fn add_rows(&mut self, rows: &[LinearRow]) -> Result<LpSolution> {
        for row in rows {
            self.check_row(row)?;
        }
        if !self.solved {
            self.solve();
        }
        if let Some(LpSolution {
            status: LpStatus::Infeasible,
            ..
        }) = &self.last
        {
            let mut sol = self.last.clone().expect("checked above");
            sol.dual = Vec::new();
            return Ok(sol);
        }
        for row in rows {
            self.push_row(row.clone());
        }
        self.degenerate_run = 0;
        Ok(self.solve())
    }

    /// Basic column of each row.
    pub fn basis(&self) -> &[usize] {
        &self.basis
    }

    pub fn num_rows(&self) -> usize {
        self.orig.len()
    }
}

/// Re-solves `previous` with `rows` appended, warm-starting from its basis.
pub fn resolve_with_rows(previous: &mut LpSolver, rows: &[LinearRow]) -> Result<LpSolution> {
    previous.add_rows(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formulation::{big_m_neuron, NeuronVars};
    use crate::relaxation::{build_context, AffineForm, InputBox};

    /// Big-M LP of the corner neuron over columns x1, x2, y, z with y bounded by [0, 0.5].
    fn corner_neuron_lp(x_fixed: Option<[f64; 2]>) -> LpProblem {
        let ctx = build_context(
            AffineForm::new(vec![1.0, 1.0], -1.5),
            InputBox::cube(2, 0.0, 1.0).unwrap(),
        )
        .unwrap();
        let vars = NeuronVars {
            x: vec![0, 1],
            y: 2,
            z: 3,
        };
        let rows = big_m_neuron(&ctx, &vars).unwrap();
        let (mut lower, mut upper) = (vec![0.0, 0.0, 0.0, 0.0], vec![1.0, 1.0, 0.5, 1.0]);
        if let Some(x) = x_fixed {
            lower[..2].copy_from_slice(&x);
            upper[..2].copy_from_slice(&x);
        }
        LpProblem {
            sense: ObjSense::Maximize,
            cost: vec![0.0, 0.0, 1.0, 0.0],
            lower,
            upper,
            rows,
        }
    }

    fn solve(p: LpProblem) -> LpSolution {
        LpSolver::new(p, LpOptions::default()).unwrap().solve()
    }

    #[test]
    fn corner_neuron_fixed_x() {
        let s = solve(corner_neuron_lp(Some([1.0, 0.0])));
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective - 0.25).abs() < 1e-9);
        assert!((s.primal[3] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn corner_neuron_free_x() {
        let s = solve(corner_neuron_lp(None));
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective - 0.5).abs() < 1e-9);
    }

    #[test]
    fn infeasible_pair() {
        let p = LpProblem {
            sense: ObjSense::Minimize,
            cost: vec![1.0],
            lower: vec![-10.0],
            upper: vec![10.0],
            rows: vec![
                LinearRow::le(vec![(0, 1.0)], 0.0),
                LinearRow::ge(vec![(0, 1.0)], 1.0),
            ],
        };
        assert_eq!(solve(p).status, LpStatus::Infeasible);
    }

    #[test]
    fn unbounded_detected() {
        let p = LpProblem {
            sense: ObjSense::Maximize,
            cost: vec![1.0, 0.0],
            lower: vec![0.0, 0.0],
            upper: vec![f64::INFINITY, 1.0],
            rows: vec![LinearRow::le(vec![(0, -1.0), (1, 1.0)], 1.0)],
        };
        assert_eq!(solve(p).status, LpStatus::Unbounded);
    }

    #[test]
    fn free_column_rejected() {
        let p = LpProblem {
            sense: ObjSense::Maximize,
            cost: vec![1.0],
            lower: vec![f64::NEG_INFINITY],
            upper: vec![f64::INFINITY],
            rows: vec![],
        };
        assert!(LpSolver::new(p, LpOptions::default()).is_err());
    }

    #[test]
    fn cut_row_warm_start() {
        let mut solver =
            LpSolver::new(corner_neuron_lp(Some([1.0, 0.0])), LpOptions::default()).unwrap();
        let first = solver.solve();
        assert!((first.objective - 0.25).abs() < 1e-9);
        // y <= x2 - 0.5 z
        let cut = LinearRow::le(vec![(1, -1.0), (2, 1.0), (3, 0.5)], 0.0);
        let second = resolve_with_rows(&mut solver, &[cut]).unwrap();
        assert_eq!(second.status, LpStatus::Optimal);
        assert!(second.objective.abs() < 1e-9);
    }

    #[test]
    fn redundant_row_keeps_objective() {
        let mut solver = LpSolver::new(corner_neuron_lp(None), LpOptions::default()).unwrap();
        solver.solve();
        let again = solver
            .add_rows(&[LinearRow::le(vec![(2, 1.0)], 10.0)])
            .unwrap();
        assert!((again.objective - 0.5).abs() < 1e-9);
    }

    #[test]
    fn row_infeasible_with_bounds() {
        let mut solver = LpSolver::new(corner_neuron_lp(None), LpOptions::default()).unwrap();
        solver.solve();
        let s = solver
            .add_rows(&[LinearRow::ge(vec![(0, 1.0), (1, 1.0)], 3.0)])
            .unwrap();
        assert_eq!(s.status, LpStatus::Infeasible);
    }

    #[test]
    fn iteration_limit_is_surfaced() {
        let opts = LpOptions {
            max_iterations: 0,
            ..LpOptions::default()
        };
        let s = LpSolver::new(corner_neuron_lp(None), opts).unwrap().solve();
        assert_eq!(s.status, LpStatus::IterationLimit);
    }

    #[test]
    fn equality_rows() {
        // min x + y s.t. x + y = 1, x - y = 0.5
        let p = LpProblem {
            sense: ObjSense::Minimize,
            cost: vec![1.0, 1.0],
            lower: vec![-5.0, -5.0],
            upper: vec![5.0, 5.0],
            rows: vec![
                LinearRow::eq(vec![(0, 1.0), (1, 1.0)], 1.0),
                LinearRow::eq(vec![(0, 1.0), (1, -1.0)], 0.5),
            ],
        };
        let s = solve(p);
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.primal[0] - 0.75).abs() < 1e-12);
        assert!((s.primal[1] - 0.25).abs() < 1e-12);
        assert!((s.objective - 1.0).abs() < 1e-12);
    }
}
