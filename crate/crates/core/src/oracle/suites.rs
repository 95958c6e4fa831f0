//! Seeded randomized runs of the oracle checks.
//!
//! Each runner returns a [`SuiteSummary`] whose fields depend only on the
//! seed and the case count, so two runs can be compared for equality.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{
    brute_force_most_violated, build_facet_witness, check_redundancy_certificate, hull_equivalence,
    ideal_vertices, CertificateCase,
};
use crate::bnb::{root_bound, BnbConfig, MipStatus};
use crate::error::Result;
use crate::formulation::{cut_to_constraint, single_neuron_mip, FormulationKind, NeuronId};
use crate::lp_core::{LpOptions, LpProblem, LpSolver, LpStatus};
use crate::relaxation::{build_context, AffineForm, InputBox};
use crate::sampling;
use crate::separation::separate;
use crate::verify::{generate_instances, verify, Method, ResultRecord, Robustness};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteSummary {
    pub name: String,
    pub seed: u64,
    pub cases: usize,
    pub failures: usize,
    /// Largest observed error in the suite's own metric.
    pub max_error: f64,
    pub tolerance: f64,
    /// Suite-specific counters.
    pub counters: Vec<(String, u64)>,
}

impl SuiteSummary {
    fn new(name: &str, seed: u64, tolerance: f64) -> Self {
        Self {
            name: name.to_string(),
            seed,
            cases: 0,
            failures: 0,
            max_error: 0.0,
            tolerance,
            counters: Vec::new(),
        }
    }

    fn observe(&mut self, error: f64) {
        self.cases += 1;
        if error.is_nan() || error > self.tolerance {
            self.failures += 1;
        }
        if error.is_nan() {
            self.max_error = f64::NAN;
        } else if !self.max_error.is_nan() {
            self.max_error = self.max_error.max(error);
        }
    }

    fn count(&mut self, key: &str, by: u64) {
        match self.counters.iter_mut().find(|(k, _)| k == key) {
            Some((_, v)) => *v += by,
            None => self.counters.push((key.to_string(), by)),
        }
    }

    pub fn counter(&self, key: &str) -> u64 {
        self.counters
            .iter()
            .find(|(k, _)| k == key)
            .map_or(0, |(_, v)| *v)
    }

    pub fn passed(&self) -> bool {
        self.cases > 0 && self.failures == 0
    }

    /// Bitwise comparison (NaN-safe, sign-of-zero aware).
    pub fn bitwise_eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.seed == other.seed
            && self.cases == other.cases
            && self.failures == other.failures
            && self.max_error.to_bits() == other.max_error.to_bits()
            && self.tolerance.to_bits() == other.tolerance.to_bits()
            && self.counters == other.counters
    }
}

const ID: NeuronId = NeuronId {
    layer: 1,
    neuron: 0,
};

/// Linear-time separation against exhaustive enumeration.
pub fn separation_suite(cases: usize, max_eta: usize, seed: u64) -> Result<SuiteSummary> {
    let mut s = SuiteSummary::new("separation", seed, 1e-9);
    let mut rng = sampling::rng(seed);
    for _ in 0..cases {
        let ctx = sampling::strictly_active_context(&mut rng, max_eta);
        let (x, y, z) = sampling::relaxation_point(&mut rng, &ctx);
        let fast =
            separate(&ctx, ID, &x, y, z, f64::NEG_INFINITY).expect("every violation exceeds -inf");
        let (subset, brute) = brute_force_most_violated(&ctx, &x, y, z)?;
        s.observe((fast.violation - brute).abs());
        if fast.cut.subset() == subset.as_slice() {
            s.count("same_subset", 1);
        }
        if brute > 0.0 {
            s.count("violated", 1);
        }
    }
    Ok(s)
}

/// Ideal system against the extended formulation on random objectives.
pub fn hull_suite(
    contexts: usize,
    objectives: usize,
    max_eta: usize,
    seed: u64,
) -> Result<SuiteSummary> {
    let mut s = SuiteSummary::new("hull_equivalence", seed, 1e-6);
    let mut rng = sampling::rng(seed);
    for _ in 0..contexts {
        let ctx = sampling::strictly_active_context(&mut rng, max_eta);
        let obj_seed: u64 = rng.random();
        s.observe(hull_equivalence(&ctx, objectives, obj_seed)?);
        s.count("objectives", objectives as u64);
    }
    Ok(s)
}

/// Facet witnesses on random contexts and subsets.
pub fn facet_suite(cases: usize, max_eta: usize, seed: u64) -> Result<SuiteSummary> {
    let mut s = SuiteSummary::new("facet", seed, 1e-9);
    let mut rng = sampling::rng(seed);
    for _ in 0..cases {
        let ctx = sampling::strictly_active_context(&mut rng, max_eta);
        let subset = sampling::support_subset(&mut rng, &ctx);
        let report = build_facet_witness(&ctx, &subset)?.verify(&ctx, 1e-9)?;
        let mut err = report.max_infeasibility.max(report.max_slack);
        if report.rank != report.expected_rank {
            s.count("rank_deficient", 1);
            err = f64::INFINITY;
        }
        s.observe(err);
    }
    Ok(s)
}

/// Redundancy certificates on random contexts and subsets.
pub fn certificate_suite(cases: usize, max_eta: usize, seed: u64) -> Result<SuiteSummary> {
    let mut s = SuiteSummary::new("certificate", seed, 1e-10);
    let mut rng = sampling::rng(seed);
    for _ in 0..cases {
        let ctx = sampling::strictly_active_context(&mut rng, max_eta);
        let subset = sampling::support_subset(&mut rng, &ctx);
        match check_redundancy_certificate(&ctx, &subset) {
            Ok(cert) => {
                s.count(
                    match cert.case {
                        CertificateCase::AffineLowerBound => "h_nonnegative",
                        CertificateCase::Nonnegativity => "h_negative",
                    },
                    1,
                );
                s.observe(cert.residual);
            }
            Err(crate::Error::Certificate(_)) => s.observe(f64::INFINITY),
            Err(e) => return Err(e),
        }
    }
    Ok(s)
}

/// Integrality of `z` at every vertex of the ideal system.
pub fn vertex_suite(cases: usize, max_eta: usize, seed: u64) -> Result<SuiteSummary> {
    let mut s = SuiteSummary::new("integral_vertices", seed, 1e-7);
    let mut rng = sampling::rng(seed);
    for _ in 0..cases {
        let ctx = sampling::strictly_active_context(&mut rng, max_eta);
        let verts = ideal_vertices(&ctx)?;
        let z_at = ctx.dim() + 1;
        let err = verts
            .iter()
            .map(|v| v[z_at].abs().min((v[z_at] - 1.0).abs()))
            .fold(0.0f64, f64::max);
        s.count("vertices", verts.len() as u64);
        if verts.is_empty() {
            s.observe(f64::INFINITY);
        } else {
            s.observe(err);
        }
    }
    Ok(s)
}

/// Radii cycled over the end-to-end instances.
pub const END_TO_END_RADII: [f64; 5] = [0.02, 0.05, 0.1, 0.2, 0.4];

/// Tolerance below which a root-bound decrease does not count as strict.
pub const STRICT_IMPROVEMENT: f64 = 1e-7;

/// Random tiny networks with one query each, solved by every method.
///
/// Counters record outcome classes, method disagreements, root-bound
/// violations and strict root improvements. Records have wall time zeroed.
pub fn end_to_end_suite(
    cases: usize,
    arch: &[usize],
    seed: u64,
    config: &BnbConfig,
) -> Result<(SuiteSummary, Vec<ResultRecord>)> {
    let mut s = SuiteSummary::new("end_to_end", seed, 1e-6);
    let mut rng = sampling::rng(seed);
    let mut records = Vec::new();
    for k in 0..cases {
        let net = sampling::random_network(&mut rng, arch)?;
        let eps = END_TO_END_RADII[k % END_TO_END_RADII.len()];
        let mut inst = generate_instances(&net, 1, &[eps], rng.random())?.remove(0);
        inst.id = format!("e2e{k:03}");

        let reports = Method::ALL
            .iter()
            .map(|&m| verify(&net, &inst, config, m))
            .collect::<Result<Vec<_>>>()?;
        let solved: Vec<_> = reports
            .iter()
            .filter(|r| r.stats.status == MipStatus::Optimal && r.method != Method::BigMNoCuts)
            .collect();
        let mut err: f64 = 0.0;
        if let Some(first) = solved.first() {
            for r in &solved[1..] {
                if r.robust != first.robust {
                    s.count("outcome_disagreements", 1);
                    err = f64::INFINITY;
                }
                match (r.objective_value, first.objective_value) {
                    (Some(a), Some(b)) => err = err.max((a - b).abs()),
                    (None, None) => {}
                    _ => err = f64::INFINITY,
                }
            }
            s.count(
                match first.robust {
                    Robustness::Proven => "proven",
                    Robustness::Falsified => "falsified",
                    Robustness::Unknown => "unknown",
                },
                1,
            );
        } else {
            s.count("unsolved", 1);
        }

        let root = |m: Method| {
            reports
                .iter()
                .find(|r| r.method == m)
                .map(|r| r.stats.root_bound)
                .expect("every method ran")
        };
        let (base, cut) = (root(Method::BigMNoCuts), root(Method::BigMPlusCuts));
        if cut > base + 1e-9 {
            s.count("root_bound_violations", 1);
            err = f64::INFINITY;
        }
        if cut < base - STRICT_IMPROVEMENT {
            s.count("strict_root_improvements", 1);
        }
        s.observe(err);
        records.extend(reports.iter().map(|r| r.to_record().without_time()));
    }
    Ok((s, records))
}

fn lp_value(sol: &crate::lp_core::LpSolution) -> f64 {
    if sol.status == LpStatus::Optimal {
        sol.objective
    } else {
        f64::NAN
    }
}

/// The two-input neuron `max(0, x1 + x2 - 1.5)` on the unit square, with
/// `x` fixed at `(1, 0)`: big-M LP value, separation at the fractional
/// point, and the value after one cut.
pub fn corner_neuron_suite() -> Result<SuiteSummary> {
    let mut s = SuiteSummary::new("corner_neuron", 0, 1e-8);
    let ctx = build_context(
        AffineForm::new(vec![1.0, 1.0], -1.5),
        InputBox::cube(2, 0.0, 1.0)?,
    )?;
    let x = [1.0, 0.0];
    let model = single_neuron_mip(&ctx, FormulationKind::BigMPlusCuts, Some(&x))?;
    let block = &model.cut_eligible()[0];

    let mut point = vec![0.0; model.num_vars()];
    point[..2].copy_from_slice(&x);
    point[block.vars.y] = 0.25;
    point[block.vars.z] = 0.5;
    s.observe(model.max_violation(&point));

    let mut solver = LpSolver::new(LpProblem::from_model(&model), LpOptions::default())?;
    let before = lp_value(&solver.solve());
    s.observe((before - 0.25).abs());

    match separate(&ctx, block.id, &x, 0.25, 0.5, 1e-6) {
        Some(found) => {
            let err = if found.cut.subset() == [1] {
                (found.violation - 0.5).abs()
            } else {
                f64::INFINITY
            };
            s.observe(err);
            let row = cut_to_constraint(&ctx, &found.cut, &block.vars)?;
            let after = lp_value(&solver.add_rows(&[row])?);
            s.observe(after.abs());
        }
        None => s.observe(f64::INFINITY),
    }
    Ok(s)
}

/// `y = max(0, sum x)` on `[-1, 1]^eta` with `x` fixed alternating: the
/// big-M root bound is `eta / 2` and the cut loop must close it to zero in
/// at most `eta` rounds.
pub fn alternating_sum_suite(etas: &[usize]) -> Result<SuiteSummary> {
    let mut s = SuiteSummary::new("alternating_sum", 0, 1e-8);
    for &eta in etas {
        let ctx = build_context(
            AffineForm::new(vec![1.0; eta], 0.0),
            InputBox::cube(eta, -1.0, 1.0)?,
        )?;
        let x: Vec<f64> = (0..eta)
            .map(|i| if i % 2 == 0 { 1.0 } else { -1.0 })
            .collect();
        let model = single_neuron_mip(&ctx, FormulationKind::BigMPlusCuts, Some(&x))?;
        let config = BnbConfig {
            cut_rounds_per_node: eta,
            ..BnbConfig::default()
        };
        let rb = root_bound(&model, &config, model.cut_eligible())?;
        s.observe((rb.no_cuts - 0.5 * eta as f64).abs());
        s.observe(rb.with_cuts.abs());
        s.count(&format!("rounds_eta_{eta}"), rb.rounds as u64);
    }
    Ok(s)
}

/// One gated check of the standard self-test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub number: usize,
    pub title: String,
    pub passed: bool,
    pub summary: SuiteSummary,
}

/// Standard sizes and seeds of the self-test.
pub const SELFTEST_SEED: u64 = 20190101;
pub const END_TO_END_ARCH: [usize; 4] = [4, 8, 8, 2];

/// Runs check `number` (1 to 8) at its standard size.
pub fn run_check(number: usize) -> Result<CheckOutcome> {
    let seed = SELFTEST_SEED + number as u64;
    let (title, passed, summary) = match number {
        1 => {
            let s = separation_suite(1000, 12, seed)?;
            ("separation matches enumeration", s.passed(), s)
        }
        2 => {
            let s = corner_neuron_suite()?;
            ("two-input worked example", s.passed(), s)
        }
        3 => {
            let etas = [2, 4, 6];
            let s = alternating_sum_suite(&etas)?;
            let rounds_ok = etas
                .iter()
                .all(|&e| s.counter(&format!("rounds_eta_{e}")) <= e as u64);
            ("alternating-input gap closes", s.passed() && rounds_ok, s)
        }
        4 => {
            let s = hull_suite(100, 20, 8, seed)?;
            ("ideal system matches extended LP", s.passed(), s)
        }
        5 => {
            let s = facet_suite(100, 8, seed)?;
            ("facet witnesses", s.passed(), s)
        }
        6 => {
            let s = certificate_suite(500, 10, seed)?;
            let both = s.counter("h_nonnegative") > 0 && s.counter("h_negative") > 0;
            ("redundancy certificates", s.passed() && both, s)
        }
        7 => {
            let s = vertex_suite(50, 3, seed)?;
            ("integral vertices", s.passed(), s)
        }
        8 => {
            let config = BnbConfig {
                time_limit: 3600.0,
                ..BnbConfig::default()
            };
            let (s, _) = end_to_end_suite(20, &END_TO_END_ARCH, seed, &config)?;
            let ok = s.passed()
                && s.counter("proven") > 0
                && s.counter("falsified") > 0
                && s.counter("root_bound_violations") == 0
                && 2 * s.counter("strict_root_improvements") >= s.cases as u64;
            ("end-to-end method agreement", ok, s)
        }
        _ => {
            return Err(crate::Error::InvalidInstance(format!(
                "no self-test check {number}"
            )))
        }
    };
    Ok(CheckOutcome {
        number,
        title: title.to_string(),
        passed,
        summary,
    })
}

/// Checks 1 to 8 in order.
pub fn run_all_checks() -> Result<Vec<CheckOutcome>> {
    (1..=8).map(run_check).collect()
}

/// Whether two runs produced bitwise-identical summaries.
pub fn identical_runs(a: &[CheckOutcome], b: &[CheckOutcome]) -> bool {
    a.len() == b.len()
        && a.iter().zip(b).all(|(x, y)| {
            x.number == y.number && x.passed == y.passed && x.summary.bitwise_eq(&y.summary)
        })
}
