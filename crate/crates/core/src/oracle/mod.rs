//! Independent checks for the formulations and the separation routine.
//!
//! * [`brute_force_most_violated`] enumerates every subset of the support.
//! * [`build_facet_witness`] constructs `eta + 2` points tight on one ideal
//!   inequality; [`FacetWitness::verify`] checks feasibility, tightness and
//!   affine independence.
//! * [`check_redundancy_certificate`] shows that a member of the companion
//!   lower-bound family produced by projecting the extended formulation is a
//!   nonnegative combination of `y >= w·x + b`, `y >= 0`, variable bounds and
//!   `0 <= z <= 1`.
//! * [`hull_equivalence`] compares LP optima of the full ideal system and the
//!   extended formulation on random objectives.
//! * [`ideal_vertices`] enumerates vertices of the ideal system.

pub mod linalg;
pub mod suites;

use crate::error::{Error, Result};
use crate::formulation::{
    cut_to_constraint, extended_neuron, ideal_cut_rhs, Cut, LinearRow, NeuronId, NeuronVars,
    ObjSense,
};
use crate::lp_core::{BoundOverride, LpOptions, LpProblem, LpSolver, LpStatus};
use crate::relaxation::{ActivityState, NeuronContext};
use crate::sampling;
use rand::Rng;

/// Largest support handled by exhaustive enumeration.
pub const MAX_ENUMERATED_SUPPORT: usize = 20;

const ORACLE_NEURON: NeuronId = NeuronId {
    layer: 1,
    neuron: 0,
};

fn subset_from_mask(support: &[usize], mask: u64) -> Vec<usize> {
    support
        .iter()
        .enumerate()
        .filter(|(k, _)| mask >> k & 1 == 1)
        .map(|(_, &i)| i)
        .collect()
}

fn check_support_size(ctx: &NeuronContext) -> Result<()> {
    let s = ctx.support().len();
    if s > MAX_ENUMERATED_SUPPORT {
        return Err(Error::SupportTooLarge(s, MAX_ENUMERATED_SUPPORT));
    }
    Ok(())
}

/// Minimizes the ideal right side over all subsets of the support.
///
/// Returns the first minimizing subset in mask order and `y - min rhs`.
pub fn brute_force_most_violated(
    ctx: &NeuronContext,
    x: &[f64],
    y: f64,
    z: f64,
) -> Result<(Vec<usize>, f64)> {
    check_support_size(ctx)?;
    let support = ctx.support();
    let mut best: Option<(Vec<usize>, f64)> = None;
    for mask in 0..(1u64 << support.len()) {
        let subset = subset_from_mask(support, mask);
        let rhs = ideal_cut_rhs(ctx, &subset, x, z)?;
        if best.as_ref().is_none_or(|(_, b)| rhs < *b) {
            best = Some((subset, rhs));
        }
    }
    let (subset, rhs) = best.expect("at least the empty subset");
    Ok((subset, y - rhs))
}

/// Column layout used by the single-neuron checks: `x` then `y` then `z`.
pub fn single_neuron_vars(eta: usize) -> NeuronVars {
    NeuronVars {
        x: (0..eta).collect(),
        y: eta,
        z: eta + 1,
    }
}

/// `y >= w·x + b` plus every ideal inequality, over [`single_neuron_vars`].
pub fn ideal_system(ctx: &NeuronContext) -> Result<Vec<LinearRow>> {
    check_support_size(ctx)?;
    let vars = single_neuron_vars(ctx.dim());
    let mut rows = Vec::with_capacity(1 + (1 << ctx.support().len()));
    let mut affine: Vec<(usize, f64)> = ctx
        .support()
        .iter()
        .map(|&i| (vars.x[i], ctx.weights()[i]))
        .collect();
    affine.push((vars.y, -1.0));
    rows.push(LinearRow::le(affine, -ctx.bias()));
    for mask in 0..(1u64 << ctx.support().len()) {
        let cut = Cut::new(ORACLE_NEURON, subset_from_mask(ctx.support(), mask));
        rows.push(cut_to_constraint(ctx, &cut, &vars)?);
    }
    Ok(rows)
}

fn require_strict(ctx: &NeuronContext) -> Result<()> {
    if ctx.activity() == ActivityState::StrictlyActive {
        Ok(())
    } else {
        Err(Error::NotStrictlyActive {
            m_minus: ctx.m_minus(),
            m_plus: ctx.m_plus(),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WitnessPoint {
    pub x: Vec<f64>,
    pub y: f64,
    pub z: f64,
}

/// `eta + 2` points that are feasible and tight for the inequality of `subset`.
#[derive(Debug, Clone, PartialEq)]
pub struct FacetWitness {
    pub subset: Vec<usize>,
    pub points: Vec<WitnessPoint>,
    pub eps_w: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FacetReport {
    /// Largest violation of bounds, `y >= w·x + b`, or any ideal inequality.
    pub max_infeasibility: f64,
    /// Largest `|y - rhs_I(x, z)|` over the points.
    pub max_slack: f64,
    pub rank: usize,
    pub expected_rank: usize,
}

impl FacetReport {
    pub fn passed(&self, tol: f64) -> bool {
        self.max_infeasibility <= tol && self.max_slack <= tol && self.rank == self.expected_rank
    }
}

fn sign_or_one(w: f64) -> f64 {
    if w < 0.0 {
        -1.0
    } else {
        1.0
    }
}

pub fn build_facet_witness(ctx: &NeuronContext, subset: &[usize]) -> Result<FacetWitness> {
    require_strict(ctx)?;
    if !ctx.is_subset_of_support(subset) {
        return Err(Error::SubsetNotInSupport(subset.to_vec()));
    }
    let mut subset = subset.to_vec();
    subset.sort_unstable();
    subset.dedup();
    let n = ctx.dim();
    let w = ctx.weights();
    let (bl, bu) = (ctx.breve_lower(), ctx.breve_upper());
    let (lo, hi) = (ctx.bounds().lower(), ctx.bounds().upper());
    let min_width = (0..n).map(|i| hi[i] - lo[i]).fold(f64::INFINITY, f64::min);
    let max_w = w.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let eps_w = 0.5 * ctx.m_minus().abs().min(ctx.m_plus()).min(min_width) / max_w;

    let f = |x: &[f64]| ctx.affine().eval(x);
    let mut points = Vec::with_capacity(n + 2);
    points.push(WitnessPoint {
        x: bl.to_vec(),
        y: 0.0,
        z: 0.0,
    });
    points.push(WitnessPoint {
        x: bu.to_vec(),
        y: ctx.m_plus(),
        z: 1.0,
    });
    for i in 0..n {
        let s = sign_or_one(w[i]);
        if subset.binary_search(&i).is_ok() {
            let mut x = bu.to_vec();
            x[i] -= eps_w * s;
            points.push(WitnessPoint {
                y: f(&x),
                x,
                z: 1.0,
            });
        } else {
            let mut x = bl.to_vec();
            x[i] += eps_w * s;
            points.push(WitnessPoint { x, y: 0.0, z: 0.0 });
        }
    }
    Ok(FacetWitness {
        subset,
        points,
        eps_w,
    })
}

impl FacetWitness {
    /// Checks the witness against the full ideal system.
    pub fn verify(&self, ctx: &NeuronContext, rank_tol: f64) -> Result<FacetReport> {
        let n = ctx.dim();
        let mut infeas: f64 = 0.0;
        let mut slack: f64 = 0.0;
        for p in &self.points {
            for i in 0..n {
                let (l, u) = (ctx.bounds().lower()[i], ctx.bounds().upper()[i]);
                infeas = infeas.max(l - p.x[i]).max(p.x[i] - u);
            }
            infeas = infeas.max(-p.y).max(-p.z).max(p.z - 1.0);
            infeas = infeas.max(ctx.affine().eval(&p.x) - p.y);
            let (_, violation) = brute_force_most_violated(ctx, &p.x, p.y, p.z)?;
            infeas = infeas.max(violation);
            let rhs = ideal_cut_rhs(ctx, &self.subset, &p.x, p.z)?;
            slack = slack.max((p.y - rhs).abs());
        }

        // Difference matrix, columns scaled by box widths and the output range.
        let y_scale = ctx.m_minus().abs().max(ctx.m_plus());
        let base = &self.points[0];
        let rows: Vec<Vec<f64>> = self.points[1..]
            .iter()
            .map(|p| {
                let mut r: Vec<f64> = (0..n)
                    .map(|i| {
                        let width = ctx.bounds().upper()[i] - ctx.bounds().lower()[i];
                        (p.x[i] - base.x[i]) / width
                    })
                    .collect();
                r.push((p.y - base.y) / y_scale);
                r.push(p.z - base.z);
                let norm = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                r.iter().map(|v| v / norm).collect()
            })
            .collect();
        Ok(FacetReport {
            max_infeasibility: infeas.max(0.0),
            max_slack: slack,
            rank: linalg::rank(&rows, rank_tol),
            expected_rank: n + 1,
        })
    }
}

/// Base inequalities, each read as `expr >= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaseInequality {
    /// `y - w·x - b >= 0`
    YAboveAffine,
    /// `y >= 0`
    YNonnegative,
    /// `x_i - L_i >= 0`
    XAboveLower(usize),
    /// `U_i - x_i >= 0`
    XBelowUpper(usize),
    /// `1 - z >= 0`
    ZAtMostOne,
    /// `z >= 0`
    ZNonnegative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CertificateCase {
    /// `h >= 0`: built from `y >= w·x + b`, lower-side bounds and `z <= 1`.
    AffineLowerBound,
    /// `h < 0`: built from `y >= 0`, upper-side bounds and `z >= 0`.
    Nonnegativity,
}

/// Conic combination certifying that one lower-bound inequality is redundant.
#[derive(Debug, Clone, PartialEq)]
pub struct RedundancyCertificate {
    pub subset: Vec<usize>,
    /// `h` evaluated at the complement of `subset`.
    pub h_value: f64,
    pub case: CertificateCase,
    pub multipliers: Vec<(BaseInequality, f64)>,
    /// Largest coefficientwise difference between the combination and the target.
    pub residual: f64,
}

/// Linear form over `(x_1..x_eta, y, z, 1)`.
fn base_form(ctx: &NeuronContext, ineq: BaseInequality) -> Vec<f64> {
    let n = ctx.dim();
    let mut v = vec![0.0; n + 3];
    let (y, z, c) = (n, n + 1, n + 2);
    match ineq {
        BaseInequality::YAboveAffine => {
            for i in 0..n {
                v[i] = -ctx.weights()[i];
            }
            v[y] = 1.0;
            v[c] = -ctx.bias();
        }
        BaseInequality::YNonnegative => v[y] = 1.0,
        BaseInequality::XAboveLower(i) => {
            v[i] = 1.0;
            v[c] = -ctx.bounds().lower()[i];
        }
        BaseInequality::XBelowUpper(i) => {
            v[i] = -1.0;
            v[c] = ctx.bounds().upper()[i];
        }
        BaseInequality::ZAtMostOne => {
            v[z] = -1.0;
            v[c] = 1.0;
        }
        BaseInequality::ZNonnegative => v[z] = 1.0,
    }
    v
}

/// The lower-bound inequality for `subset`:
/// `y >= sum_{i in I} w_i x_i - sum_{i in I} w_i breve_U_i (1 - z)
///       + (b + sum_{i not in I} w_i breve_L_i) z`, read as `expr >= 0`.
fn lower_family_form(ctx: &NeuronContext, subset: &[usize]) -> Vec<f64> {
    let n = ctx.dim();
    let (w, bl, bu) = (ctx.weights(), ctx.breve_lower(), ctx.breve_upper());
    let mut v = vec![0.0; n + 3];
    let (y, z, c) = (n, n + 1, n + 2);
    v[y] = 1.0;
    let mut z_coeff = ctx.bias();
    for i in 0..n {
        if subset.binary_search(&i).is_ok() {
            v[i] -= w[i];
            // - ( - w_i bU_i (1 - z) ) = + w_i bU_i - w_i bU_i z
            v[c] += w[i] * bu[i];
            v[z] -= w[i] * bu[i];
        } else {
            z_coeff += w[i] * bl[i];
        }
    }
    v[z] -= z_coeff;
    v
}

/// Builds and checks the redundancy certificate for `subset`.
pub fn check_redundancy_certificate(
    ctx: &NeuronContext,
    subset: &[usize],
) -> Result<RedundancyCertificate> {
    require_strict(ctx)?;
    if !ctx.is_subset_of_support(subset) {
        return Err(Error::SubsetNotInSupport(subset.to_vec()));
    }
    let mut subset = subset.to_vec();
    subset.sort_unstable();
    subset.dedup();
    let n = ctx.dim();
    let (w, bl, bu) = (ctx.weights(), ctx.breve_lower(), ctx.breve_upper());
    let in_subset = |i: usize| subset.binary_search(&i).is_ok();
    let h_value = (0..n)
        .map(|i| {
            if in_subset(i) {
                w[i] * bu[i]
            } else {
                w[i] * bl[i]
            }
        })
        .sum::<f64>()
        + ctx.bias();

    // w_i x_i >= w_i breve_L_i is |w_i| times a lower (w_i > 0) or upper
    // (w_i < 0) bound; w_i x_i <= w_i breve_U_i likewise.
    let mut multipliers = Vec::new();
    let case = if h_value >= 0.0 {
        multipliers.push((BaseInequality::YAboveAffine, 1.0));
        for i in (0..n).filter(|&i| !in_subset(i) && w[i] != 0.0) {
            let ineq = if w[i] > 0.0 {
                BaseInequality::XAboveLower(i)
            } else {
                BaseInequality::XBelowUpper(i)
            };
            multipliers.push((ineq, w[i].abs()));
        }
        multipliers.push((BaseInequality::ZAtMostOne, h_value));
        CertificateCase::AffineLowerBound
    } else {
        multipliers.push((BaseInequality::YNonnegative, 1.0));
        for &i in &subset {
            let ineq = if w[i] > 0.0 {
                BaseInequality::XBelowUpper(i)
            } else {
                BaseInequality::XAboveLower(i)
            };
            multipliers.push((ineq, w[i].abs()));
        }
        multipliers.push((BaseInequality::ZNonnegative, -h_value));
        CertificateCase::Nonnegativity
    };

    if let Some((ineq, m)) = multipliers.iter().find(|(_, m)| *m < 0.0) {
        return Err(Error::Certificate(format!(
            "negative multiplier {m} on {ineq:?}"
        )));
    }
    let mut combo = vec![0.0; n + 3];
    for &(ineq, m) in &multipliers {
        for (c, v) in combo.iter_mut().zip(base_form(ctx, ineq)) {
            *c += m * v;
        }
    }
    let target = lower_family_form(ctx, &subset);
    let scale = target.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let residual = combo
        .iter()
        .zip(&target)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    if residual > 1e-10 * scale {
        return Err(Error::Certificate(format!(
            "combination differs from target by {residual:e} for subset {subset:?}"
        )));
    }
    Ok(RedundancyCertificate {
        subset,
        h_value,
        case,
        multipliers,
        residual,
    })
}

fn ideal_lp(ctx: &NeuronContext, objective: &[f64]) -> Result<LpProblem> {
    let n = ctx.dim();
    let mut lower = ctx.bounds().lower().to_vec();
    let mut upper = ctx.bounds().upper().to_vec();
    lower.extend([0.0, 0.0]);
    upper.extend([f64::INFINITY, 1.0]);
    Ok(LpProblem {
        sense: ObjSense::Maximize,
        cost: objective[..n + 2].to_vec(),
        lower,
        upper,
        rows: ideal_system(ctx)?,
    })
}

fn extended_lp(ctx: &NeuronContext, objective: &[f64]) -> Result<LpProblem> {
    let n = ctx.dim();
    let vars = single_neuron_vars(n);
    let block = extended_neuron(ctx, ORACLE_NEURON, &vars, n + 2)?;
    let mut lower = ctx.bounds().lower().to_vec();
    let mut upper = ctx.bounds().upper().to_vec();
    lower.extend([0.0, 0.0]);
    upper.extend([f64::INFINITY, 1.0]);
    let mut cost = objective[..n + 2].to_vec();
    for v in &block.aux {
        lower.push(v.lower);
        upper.push(v.upper);
        cost.push(0.0);
    }
    Ok(LpProblem {
        sense: ObjSense::Maximize,
        cost,
        lower,
        upper,
        rows: block.rows,
    })
}

fn lp_value(problem: LpProblem, overrides: &[BoundOverride]) -> Result<f64> {
    let mut problem = problem;
    problem.apply_overrides(overrides)?;
    let sol = LpSolver::new(problem, LpOptions::default())?.solve();
    match sol.status {
        LpStatus::Optimal => Ok(sol.objective),
        s => Err(Error::Lp(format!("hull comparison LP ended with {s:?}"))),
    }
}

/// Maximum of `objective · (x, y, z)` over the ideal system and over the
/// extended formulation, optionally with `x` fixed.
pub fn hull_values(
    ctx: &NeuronContext,
    objective: &[f64],
    fixed_x: Option<&[f64]>,
) -> Result<(f64, f64)> {
    require_strict(ctx)?;
    let n = ctx.dim();
    if objective.len() != n + 2 {
        return Err(Error::Dimension {
            expected: n + 2,
            got: objective.len(),
        });
    }
    let overrides: Vec<BoundOverride> = fixed_x
        .map(|x| {
            x.iter()
                .enumerate()
                .map(|(col, &v)| BoundOverride {
                    col,
                    lower: v,
                    upper: v,
                })
                .collect()
        })
        .unwrap_or_default();
    let ideal = lp_value(ideal_lp(ctx, objective)?, &overrides)?;
    let extended = lp_value(extended_lp(ctx, objective)?, &overrides)?;
    Ok((ideal, extended))
}

/// Largest gap between the two LP optima over `n_objectives` random objectives.
pub fn hull_equivalence(ctx: &NeuronContext, n_objectives: usize, seed: u64) -> Result<f64> {
    if ctx.dim() > 8 {
        return Err(Error::SupportTooLarge(ctx.dim(), 8));
    }
    let mut rng = sampling::rng(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..n_objectives {
        let obj: Vec<f64> = (0..ctx.dim() + 2)
            .map(|_| rng.random_range(-1.0..1.0))
            .collect();
        let (a, b) = hull_values(ctx, &obj, None)?;
        worst = worst.max((a - b).abs());
    }
    Ok(worst)
}

/// Vertices of the LP relaxation of the ideal system, as `(x, y, z)` vectors.
pub fn ideal_vertices(ctx: &NeuronContext) -> Result<Vec<Vec<f64>>> {
    let n = ctx.dim();
    let dim = n + 2;
    let mut cons: Vec<(Vec<f64>, f64)> = ideal_system(ctx)?
        .into_iter()
        .map(|r| {
            let mut a = vec![0.0; dim];
            for (j, c) in r.coeffs {
                a[j] = c;
            }
            (a, r.rhs)
        })
        .collect();
    let unit = |j: usize, s: f64| {
        let mut a = vec![0.0; dim];
        a[j] = s;
        a
    };
    for i in 0..n {
        cons.push((unit(i, 1.0), ctx.bounds().upper()[i]));
        cons.push((unit(i, -1.0), -ctx.bounds().lower()[i]));
    }
    cons.push((unit(n, -1.0), 0.0));
    cons.push((unit(n + 1, 1.0), 1.0));
    cons.push((unit(n + 1, -1.0), 0.0));
    Ok(linalg::enumerate_vertices(&cons, dim, 1e-9))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relaxation::{build_context, AffineForm, InputBox};

    fn corner_neuron() -> NeuronContext {
        build_context(
            AffineForm::new(vec![1.0, 1.0], -1.5),
            InputBox::cube(2, 0.0, 1.0).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn brute_force_corner_neuron() {
        let (subset, v) =
            brute_force_most_violated(&corner_neuron(), &[1.0, 0.0], 0.25, 0.5).unwrap();
        assert_eq!(subset, vec![1]);
        assert!((v - 0.5).abs() < 1e-15);
    }

    #[test]
    fn brute_force_on_graph_vertex() {
        let ctx = corner_neuron();
        let x = ctx.breve_upper().to_vec();
        let (_, v) = brute_force_most_violated(&ctx, &x, ctx.m_plus(), 1.0).unwrap();
        assert!(v.abs() < 1e-15);
    }

    #[test]
    fn brute_force_guards_support_size() {
        let ctx = build_context(
            AffineForm::new(vec![1.0; 21], -0.5),
            InputBox::cube(21, 0.0, 1.0).unwrap(),
        )
        .unwrap();
        assert!(matches!(
            brute_force_most_violated(&ctx, &[0.0; 21], 0.0, 0.0),
            Err(Error::SupportTooLarge(21, 20))
        ));
    }

    #[test]
    fn facet_witness_corner_neuron() {
        let w = build_facet_witness(&corner_neuron(), &[1]).unwrap();
        assert_eq!(w.points.len(), 4);
        let report = w.verify(&corner_neuron(), 1e-9).unwrap();
        assert_eq!(report.rank, 3);
        assert!(report.passed(1e-9), "{report:?}");
    }

    #[test]
    fn facet_witness_single_input() {
        let ctx = build_context(
            AffineForm::new(vec![1.0], -0.5),
            InputBox::cube(1, 0.0, 1.0).unwrap(),
        )
        .unwrap();
        let w = build_facet_witness(&ctx, &[0]).unwrap();
        assert_eq!(w.points.len(), 3);
        assert!(w.verify(&ctx, 1e-9).unwrap().passed(1e-9));
    }

    #[test]
    fn facet_witness_rejects_foreign_subset() {
        let ctx = build_context(
            AffineForm::new(vec![1.0, 0.0], -0.5),
            InputBox::cube(2, 0.0, 1.0).unwrap(),
        )
        .unwrap();
        assert!(matches!(
            build_facet_witness(&ctx, &[1]),
            Err(Error::SubsetNotInSupport(_))
        ));
    }

    #[test]
    fn certificates_corner_neuron() {
        // h at the complement of I: lower corners outside I, upper corners inside.
        let empty = check_redundancy_certificate(&corner_neuron(), &[]).unwrap();
        assert_eq!(empty.h_value, -1.5);
        assert_eq!(empty.case, CertificateCase::Nonnegativity);
        let full = check_redundancy_certificate(&corner_neuron(), &[0, 1]).unwrap();
        assert_eq!(full.h_value, 0.5);
        assert_eq!(full.case, CertificateCase::AffineLowerBound);
    }

    #[test]
    fn hull_corner_neuron() {
        let ctx = corner_neuron();
        let gap = hull_equivalence(&ctx, 20, 7).unwrap();
        assert!(gap <= 1e-6, "gap {gap}");
        // maximize y with x = (1, 0)
        let (a, b) = hull_values(&ctx, &[0.0, 0.0, 1.0, 0.0], Some(&[1.0, 0.0])).unwrap();
        assert!(a.abs() < 1e-9 && b.abs() < 1e-9);
        // maximize z
        let (a, b) = hull_values(&ctx, &[0.0, 0.0, 0.0, 1.0], None).unwrap();
        assert!((a - 1.0).abs() < 1e-9 && (b - 1.0).abs() < 1e-9);
    }

    #[test]
    fn corner_neuron_vertices_are_integral() {
        let verts = ideal_vertices(&corner_neuron()).unwrap();
        assert!(!verts.is_empty());
        for v in verts {
            let z = v[3];
            assert!(z.abs() < 1e-7 || (z - 1.0).abs() < 1e-7, "{v:?}");
        }
    }
}
