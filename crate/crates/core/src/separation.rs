//! Linear-time separation over the ideal inequality family, and a cut pool.
//!
//! Every inequality in the family shares the left side `y`, so the most
//! violated one minimizes the right side. That minimization splits per
//! coordinate: index `i` belongs to the minimizing subset exactly when
//! `w_i x_i < w_i (breve_L_i (1 - z) + breve_U_i z)`.

use std::collections::BTreeMap;

use crate::formulation::{ideal_cut_rhs, Cut, NeuronId};
use crate::relaxation::NeuronContext;

/// Default minimum violation for a separated cut to be reported.
pub const DEFAULT_MIN_VIOLATION: f64 = 1e-6;

/// Subset whose inequality has the smallest right side at `(x, z)`.
pub fn most_violated_subset(ctx: &NeuronContext, x: &[f64], z: f64) -> Vec<usize> {
    let w = ctx.weights();
    let (bl, bu) = (ctx.breve_lower(), ctx.breve_upper());
    ctx.support()
        .iter()
        .copied()
        .filter(|&i| w[i] * x[i] < w[i] * (bl[i] * (1.0 - z) + bu[i] * z))
        .collect()
}

/// A separated inequality with its violation at the query point.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparatedCut {
    pub cut: Cut,
    pub violation: f64,
}

/// Returns the most violated inequality if it is violated by more than
/// `min_violation` at `(x, y, z)`.
pub fn separate(
    ctx: &NeuronContext,
    neuron: NeuronId,
    x: &[f64],
    y: f64,
    z: f64,
    min_violation: f64,
) -> Option<SeparatedCut> {
    let subset = most_violated_subset(ctx, x, z);
    let rhs = ideal_cut_rhs(ctx, &subset, x, z).expect("subset is drawn from the support");
    let violation = y - rhs;
    (violation > min_violation).then(|| SeparatedCut {
        cut: Cut::new(neuron, subset),
        violation,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CutStats {
    pub times_violated: usize,
    pub last_violation: f64,
}

/// Deduplicating store of cuts keyed by neuron and sorted subset.
#[derive(Debug, Clone, Default)]
pub struct CutPool {
    entries: BTreeMap<Cut, CutStats>,
}

impl CutPool {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts `cut`; returns false if it was already present.
    pub fn insert(&mut self, cut: Cut) -> bool {
        self.record(cut, f64::NAN)
    }

    /// Inserts or updates the violation record; returns true if new.
    pub fn record(&mut self, cut: Cut, violation: f64) -> bool {
        let cut = Cut::new(cut.neuron, cut.subset().to_vec());
        let mut inserted = false;
        let stats = self.entries.entry(cut).or_insert_with(|| {
            inserted = true;
            CutStats::default()
        });
        if !violation.is_nan() {
            stats.times_violated += 1;
            stats.last_violation = violation;
        }
        inserted
    }

    pub fn contains(&self, cut: &Cut) -> bool {
        self.entries.contains_key(cut)
    }

    pub fn stats(&self, cut: &Cut) -> Option<CutStats> {
        self.entries.get(cut).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Cut> {
        self.entries.keys()
    }
}

pub fn pool_insert(pool: &mut CutPool, cut: Cut) -> bool {
    pool.insert(cut)
}
