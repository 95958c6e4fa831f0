//! Best-bound branch and bound over the simplex, with an optional lazy
//! separation loop for the ideal inequalities.
//!
//! Internally every model is maximized; minimization objectives are negated
//! on entry and reported in their own sense. Separated cuts are globally
//! valid and shared by every node. Incumbents come only from LP solutions
//! whose binaries are integral.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formulation::{cut_to_constraint, LinearRow, MipModel, NeuronBlock, ObjSense};
use crate::lp_core::{BoundOverride, LpOptions, LpProblem, LpSolution, LpSolver, LpStatus};
use crate::separation::{separate, CutPool, DEFAULT_MIN_VIOLATION};

/// Absolute tolerance for pruning a node against the incumbent.
pub const FATHOM_TOLERANCE: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NodeSelection {
    BestBound,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branching {
    /// Most fractional binary; ties go to the earliest column.
    MostFractional,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BnbConfig {
    /// Wall-clock limit in seconds.
    pub time_limit: f64,
    pub node_limit: usize,
    pub integrality_tolerance: f64,
    pub cut_rounds_per_node: usize,
    pub min_violation: f64,
    pub node_selection: NodeSelection,
    pub branching: Branching,
    pub cuts_enabled: bool,
    pub lp: LpOptions,
}

impl Default for BnbConfig {
    fn default() -> Self {
        Self {
            time_limit: 60.0,
            node_limit: 1_000_000,
            integrality_tolerance: 1e-6,
            cut_rounds_per_node: 20,
            min_violation: DEFAULT_MIN_VIOLATION,
            node_selection: NodeSelection::BestBound,
            branching: Branching::MostFractional,
            cuts_enabled: true,
            lp: LpOptions::default(),
        }
    }
}

impl BnbConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v > 0.0 && !v.is_nan();
        if !positive(self.time_limit)
            || self.node_limit == 0
            || !positive(self.integrality_tolerance)
            || !positive(self.min_violation)
        {
            return Err(Error::InvalidModel(format!(
                "branch and bound limits and tolerances must be positive: {self:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MipStatus {
    Optimal,
    /// Time or node limit reached; `dual_bound` is still valid.
    TimeLimit,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Incumbent {
    pub x: Vec<f64>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MipResult {
    pub status: MipStatus,
    pub incumbent: Option<Incumbent>,
    /// Best proven bound in the model's sense.
    pub dual_bound: f64,
    /// `|bound - incumbent| / max(1, |incumbent|)`, or infinity without an incumbent.
    pub gap: f64,
    pub node_count: usize,
    pub cuts_added: usize,
    /// Seconds.
    pub wall_time: f64,
    /// Root LP value before any cut.
    pub root_bound_initial: f64,
    /// Root LP value after the root cut loop.
    pub root_bound: f64,
    pub root_cut_rounds: usize,
    pub lp_iterations: usize,
}

impl MipResult {
    pub fn incumbent_value(&self) -> Option<f64> {
        self.incumbent.as_ref().map(|i| i.value)
    }
}

/// Root LP bound before and after the cut loop (model sense).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootBound {
    pub no_cuts: f64,
    pub with_cuts: f64,
    pub rounds: usize,
    pub cuts: usize,
}

struct Node {
    id: usize,
    /// Parent LP value in maximization sense.
    bound: f64,
    fixings: Vec<BoundOverride>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    /// Max-heap order: higher bound first, then lower id.
    fn cmp(&self, other: &Self) -> Ordering {
        self.bound
            .total_cmp(&other.bound)
            .then_with(|| other.id.cmp(&self.id))
    }
}

/// Shared state for the LP solves of one search.
struct Search<'a> {
    base: LpProblem,
    sign: f64,
    blocks: &'a [NeuronBlock],
    config: BnbConfig,
    pool: CutPool,
    pool_rows: Vec<LinearRow>,
    lp_iterations: usize,
}

struct NodeLp {
    sol: LpSolution,
    /// Maximization-sense value.
    value: f64,
    initial_value: f64,
    rounds: usize,
    cuts: usize,
}

impl<'a> Search<'a> {
    fn new(model: &MipModel, blocks: &'a [NeuronBlock], config: BnbConfig) -> Self {
        let mut base = LpProblem::from_model(model);
        let sign = match base.sense {
            ObjSense::Maximize => 1.0,
            ObjSense::Minimize => -1.0,
        };
        base.sense = ObjSense::Maximize;
        for c in &mut base.cost {
            *c *= sign;
        }
        Self {
            base,
            sign,
            blocks,
            config,
            pool: CutPool::new(),
            pool_rows: Vec::new(),
            lp_iterations: 0,
        }
    }

    fn check(&mut self, sol: &LpSolution) -> Result<()> {
        self.lp_iterations += sol.iterations;
        match sol.status {
            LpStatus::Optimal | LpStatus::Infeasible => Ok(()),
            LpStatus::Unbounded => Err(Error::Lp("node relaxation is unbounded".into())),
            LpStatus::IterationLimit => Err(Error::Lp(format!(
                "simplex iteration limit ({}) reached",
                self.config.lp.max_iterations
            ))),
        }
    }

    /// Violated ideal inequalities at `primal` that are not yet pooled.
    fn separate_round(&mut self, primal: &[f64]) -> Result<Vec<LinearRow>> {
        let mut rows = Vec::new();
        for block in self.blocks {
            let x: Vec<f64> = block.vars.x.iter().map(|&c| primal[c]).collect();
            let (y, z) = (primal[block.vars.y], primal[block.vars.z]);
            let Some(found) = separate(&block.ctx, block.id, &x, y, z, self.config.min_violation)
            else {
                continue;
            };
            if self.pool.record(found.cut.clone(), found.violation) {
                let row = cut_to_constraint(&block.ctx, &found.cut, &block.vars)?;
                self.pool_rows.push(row.clone());
                rows.push(row);
            }
        }
        Ok(rows)
    }

    /// Solves one node LP and runs the cut loop while the node can still
    /// beat `cutoff`.
    fn solve_node(&mut self, fixings: &[BoundOverride], cutoff: f64) -> Result<NodeLp> {
        let mut problem = self.base.clone();
        problem.rows.extend_from_slice(&self.pool_rows);
        problem.apply_overrides(fixings)?;
        let mut solver = LpSolver::new(problem, self.config.lp)?;
        let mut sol = solver.solve();
        self.check(&sol)?;
        let initial_value = sol.objective;
        let (mut rounds, mut cuts) = (0, 0);
        if self.config.cuts_enabled && !self.blocks.is_empty() {
            while rounds < self.config.cut_rounds_per_node
                && sol.status == LpStatus::Optimal
                && sol.objective > cutoff + FATHOM_TOLERANCE
            {
                let rows = self.separate_round(&sol.primal)?;
                if rows.is_empty() {
                    break;
                }
                rounds += 1;
                cuts += rows.len();
                sol = solver.add_rows(&rows)?;
                self.check(&sol)?;
            }
        }
        let value = match sol.status {
            LpStatus::Optimal => sol.objective,
            _ => f64::NEG_INFINITY,
        };
        Ok(NodeLp {
            sol,
            value,
            initial_value,
            rounds,
            cuts,
        })
    }
}

/// Most fractional binary column, or `None` if all are integral.
fn branching_column(binaries: &[usize], primal: &[f64], tol: f64) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for &j in binaries {
        let v = primal[j];
        let frac = (v - v.floor()).min(v.ceil() - v);
        if frac > tol && best.is_none_or(|(_, f)| frac > f) {
            best = Some((j, frac));
        }
    }
    best.map(|(j, _)| j)
}

fn gap(bound: f64, incumbent: Option<f64>) -> f64 {
    match incumbent {
        Some(v) => (bound - v).abs() / v.abs().max(1.0),
        None => f64::INFINITY,
    }
}

/// Branch and bound over `model`. Separation runs on `blocks` when
/// `config.cuts_enabled`; pass `model.cut_eligible()` for the lazy-cut method.
pub fn solve_mip(
    model: &MipModel,
    config: &BnbConfig,
    blocks: &[NeuronBlock],
) -> Result<MipResult> {
    config.validate()?;
    model.validate()?;
    let start = Instant::now();
    let binaries = model.binary_cols();
    let mut search = Search::new(model, blocks, *config);
    let sign = search.sign;

    let mut heap = BinaryHeap::new();
    heap.push(Node {
        id: 0,
        bound: f64::INFINITY,
        fixings: Vec::new(),
    });
    let mut next_id = 1;
    let mut incumbent: Option<Incumbent> = None;
    let mut node_count = 0;
    let mut root: Option<(f64, f64, usize)> = None;
    let mut cuts_added = 0;
    let mut limit_hit = false;

    let best_value = |inc: &Option<Incumbent>| inc.as_ref().map_or(f64::NEG_INFINITY, |i| i.value);

    while let Some(node) = heap.pop() {
        let cutoff = best_value(&incumbent);
        if node.bound <= cutoff + FATHOM_TOLERANCE {
            continue;
        }
        // The root is always solved so a limited run still reports a finite bound.
        let out_of_time = node_count > 0 && start.elapsed().as_secs_f64() >= config.time_limit;
        if node_count >= config.node_limit || out_of_time {
            heap.push(node);
            limit_hit = true;
            break;
        }
        node_count += 1;
        let lp = search.solve_node(&node.fixings, cutoff)?;
        cuts_added += lp.cuts;
        if root.is_none() {
            root = Some((lp.initial_value, lp.value, lp.rounds));
        }
        if lp.sol.status == LpStatus::Infeasible || lp.value <= cutoff + FATHOM_TOLERANCE {
            continue;
        }
        match branching_column(&binaries, &lp.sol.primal, config.integrality_tolerance) {
            None => {
                let mut x = lp.sol.primal.clone();
                for &j in &binaries {
                    x[j] = x[j].round();
                }
                incumbent = Some(Incumbent { x, value: lp.value });
            }
            Some(j) => {
                for (lower, upper) in [(0.0, 0.0), (1.0, 1.0)] {
                    let mut fixings = node.fixings.clone();
                    fixings.push(BoundOverride {
                        col: j,
                        lower,
                        upper,
                    });
                    heap.push(Node {
                        id: next_id,
                        bound: lp.value,
                        fixings,
                    });
                    next_id += 1;
                }
            }
        }
    }

    let inc_value = best_value(&incumbent);
    let open_bound = heap
        .iter()
        .filter(|n| n.bound > inc_value + FATHOM_TOLERANCE)
        .map(|n| n.bound)
        .fold(f64::NEG_INFINITY, f64::max);
    let (status, bound) = if limit_hit && open_bound > f64::NEG_INFINITY {
        (MipStatus::TimeLimit, open_bound.max(inc_value))
    } else if incumbent.is_some() {
        (MipStatus::Optimal, inc_value)
    } else {
        (MipStatus::Infeasible, f64::NEG_INFINITY)
    };
    let (root_initial, root_final, root_rounds) =
        root.unwrap_or((f64::NEG_INFINITY, f64::NEG_INFINITY, 0));
    let incumbent = incumbent.map(|mut i| {
        i.value *= sign;
        i
    });
    let dual_bound = sign * bound;
    Ok(MipResult {
        status,
        gap: gap(dual_bound, incumbent.as_ref().map(|i| i.value)),
        incumbent,
        dual_bound,
        node_count,
        cuts_added,
        wall_time: start.elapsed().as_secs_f64(),
        root_bound_initial: sign * root_initial,
        root_bound: sign * root_final,
        root_cut_rounds: root_rounds,
        lp_iterations: search.lp_iterations,
    })
}

/// Root LP bound before and after up to `cut_rounds_per_node` separation
/// rounds over `blocks` (cuts run even if `cuts_enabled` is off).
pub fn root_bound(
    model: &MipModel,
    config: &BnbConfig,
    blocks: &[NeuronBlock],
) -> Result<RootBound> {
    config.validate()?;
    model.validate()?;
    let mut cfg = *config;
    cfg.cuts_enabled = true;
    let mut search = Search::new(model, blocks, cfg);
    let lp = search.solve_node(&[], f64::NEG_INFINITY)?;
    if lp.sol.status == LpStatus::Infeasible {
        return Err(Error::Lp("root relaxation is infeasible".into()));
    }
    Ok(RootBound {
        no_cuts: search.sign * lp.initial_value,
        with_cuts: search.sign * lp.value,
        rounds: lp.rounds,
        cuts: lp.cuts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formulation::{single_neuron_mip, FormulationKind, Objective, VarKey};
    use crate::relaxation::{build_context, AffineForm, InputBox};

    fn single_neuron(
        kind: FormulationKind,
        w: Vec<f64>,
        b: f64,
        lo: f64,
        hi: f64,
        fixed_x: Option<&[f64]>,
    ) -> MipModel {
        let bounds = InputBox::cube(w.len(), lo, hi).unwrap();
        let ctx = build_context(AffineForm::new(w, b), bounds).unwrap();
        single_neuron_mip(&ctx, kind, fixed_x).unwrap()
    }

    fn corner_neuron(kind: FormulationKind, fixed: Option<&[f64]>) -> MipModel {
        single_neuron(kind, vec![1.0, 1.0], -1.5, 0.0, 1.0, fixed)
    }

    #[test]
    fn corner_neuron_optimum() {
        for (kind, cuts) in [
            (FormulationKind::BigM, false),
            (FormulationKind::BigMPlusCuts, true),
        ] {
            let m = corner_neuron(kind, None);
            let cfg = BnbConfig {
                cuts_enabled: cuts,
                ..BnbConfig::default()
            };
            let r = solve_mip(&m, &cfg, m.cut_eligible()).unwrap();
            assert_eq!(r.status, MipStatus::Optimal);
            assert!((r.incumbent_value().unwrap() - 0.5).abs() < 1e-9);
            assert!((r.dual_bound - 0.5).abs() < 1e-9);
        }
    }

    #[test]
    fn corner_neuron_root_bounds() {
        let m = corner_neuron(FormulationKind::BigMPlusCuts, None);
        let rb = root_bound(&m, &BnbConfig::default(), m.cut_eligible()).unwrap();
        assert!((rb.no_cuts - 0.5).abs() < 1e-9 && (rb.with_cuts - 0.5).abs() < 1e-9);

        let m = corner_neuron(FormulationKind::BigMPlusCuts, Some(&[1.0, 0.0]));
        let rb = root_bound(&m, &BnbConfig::default(), m.cut_eligible()).unwrap();
        assert!((rb.no_cuts - 0.25).abs() < 1e-9, "{rb:?}");
        assert!(rb.with_cuts.abs() < 1e-9, "{rb:?}");
    }

    #[test]
    fn alternating_sum_fixed_alternating() {
        let x = [1.0, -1.0, 1.0, -1.0];
        let m = single_neuron(
            FormulationKind::BigMPlusCuts,
            vec![1.0; 4],
            0.0,
            -1.0,
            1.0,
            Some(&x),
        );
        let rb = root_bound(&m, &BnbConfig::default(), m.cut_eligible()).unwrap();
        assert!((rb.no_cuts - 2.0).abs() < 1e-9, "{rb:?}");
        assert!(rb.with_cuts.abs() < 1e-9, "{rb:?}");
        let r = solve_mip(&m, &BnbConfig::default(), m.cut_eligible()).unwrap();
        assert_eq!(r.status, MipStatus::Optimal);
        assert!(r.incumbent_value().unwrap().abs() < 1e-9);
    }

    #[test]
    fn fixed_binaries_solve_at_root() {
        let mut m = corner_neuron(FormulationKind::BigM, None);
        let z = m.col(&VarKey::indicator(1, 0)).unwrap();
        let mut fixed = MipModel::new(FormulationKind::BigM);
        for (j, v) in m.variables().iter().enumerate() {
            let (l, u) = if j == z {
                (1.0, 1.0)
            } else {
                (v.lower, v.upper)
            };
            fixed.add_variable(v.key, l, u, v.var_type).unwrap();
        }
        for row in m.constraints() {
            fixed.add_row(row.clone());
        }
        fixed.set_objective(m.objective().clone());
        m = fixed;
        let r = solve_mip(&m, &BnbConfig::default(), &[]).unwrap();
        assert_eq!(r.node_count, 1);
        assert_eq!(r.status, MipStatus::Optimal);
    }

    #[test]
    fn minimization_sense_is_reported_in_model_sense() {
        let mut m = corner_neuron(FormulationKind::BigM, None);
        let y = m.col(&VarKey::output(1, 0)).unwrap();
        m.set_objective(Objective {
            sense: ObjSense::Minimize,
            coeffs: vec![(y, -1.0)],
        });
        let r = solve_mip(&m, &BnbConfig::default(), &[]).unwrap();
        assert!((r.incumbent_value().unwrap() + 0.5).abs() < 1e-9);
        assert!((r.dual_bound + 0.5).abs() < 1e-9);
    }

    #[test]
    fn node_limit_reports_valid_bound() {
        let m = corner_neuron(FormulationKind::BigM, Some(&[1.0, 0.0]));
        let cfg = BnbConfig {
            node_limit: 1,
            cuts_enabled: false,
            ..BnbConfig::default()
        };
        let r = solve_mip(&m, &cfg, &[]).unwrap();
        assert_eq!(r.status, MipStatus::TimeLimit);
        assert!(r.dual_bound >= -1e-9);
        assert_eq!(r.node_count, 1);
    }

    #[test]
    fn config_validation() {
        let bad = BnbConfig {
            integrality_tolerance: 0.0,
            ..BnbConfig::default()
        };
        assert!(bad.validate().is_err());
        assert!(BnbConfig::default().validate().is_ok());
    }
}
