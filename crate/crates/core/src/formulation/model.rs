//! Solver-facing mixed-integer model.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::relaxation::NeuronContext;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarType {
    Continuous,
    Binary,
}

/// Role of a column within its neuron.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarRole {
    /// Network input (layer 0 only).
    X,
    /// Neuron output.
    Y,
    /// On/off indicator of a strictly active ReLU.
    Z,
    /// Copy of input coordinate `k` in the extended formulation.
    X0(usize),
}

/// Structured column address: `(layer, neuron, role)`. Layer 0 is the input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarKey {
    pub layer: usize,
    pub neuron: usize,
    pub role: VarRole,
}

impl VarKey {
    pub fn input(neuron: usize) -> Self {
        Self {
            layer: 0,
            neuron,
            role: VarRole::X,
        }
    }

    pub fn output(layer: usize, neuron: usize) -> Self {
        Self {
            layer,
            neuron,
            role: VarRole::Y,
        }
    }

    pub fn indicator(layer: usize, neuron: usize) -> Self {
        Self {
            layer,
            neuron,
            role: VarRole::Z,
        }
    }
}

impl fmt::Display for VarKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.role {
            VarRole::X => write!(f, "x_{}_{}", self.layer, self.neuron),
            VarRole::Y => write!(f, "y_{}_{}", self.layer, self.neuron),
            VarRole::Z => write!(f, "z_{}_{}", self.layer, self.neuron),
            VarRole::X0(k) => write!(f, "x0_{}_{}_{}", self.layer, self.neuron, k),
        }
    }
}

/// Identifies a neuron by 1-based layer and 0-based position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NeuronId {
    pub layer: usize,
    pub neuron: usize,
}

impl NeuronId {
    pub fn new(layer: usize, neuron: usize) -> Self {
        Self { layer, neuron }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub key: VarKey,
    pub lower: f64,
    pub upper: f64,
    pub var_type: VarType,
}

impl Variable {
    pub fn name(&self) -> String {
        self.key.to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RowSense {
    Le,
    Eq,
}

/// Sparse linear row `coeffs · x (<= | =) rhs`.
///
/// Rows are canonical: columns sorted and unique, zero coefficients dropped,
/// and `>=` rows are stored negated as `<=`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearRow {
    pub coeffs: Vec<(usize, f64)>,
    pub sense: RowSense,
    pub rhs: f64,
}

impl LinearRow {
    pub fn le(coeffs: Vec<(usize, f64)>, rhs: f64) -> Self {
        Self {
            coeffs: canonical_terms(coeffs),
            sense: RowSense::Le,
            rhs,
        }
    }

    pub fn ge(coeffs: Vec<(usize, f64)>, rhs: f64) -> Self {
        Self::le(coeffs.into_iter().map(|(j, a)| (j, -a)).collect(), -rhs)
    }

    pub fn eq(coeffs: Vec<(usize, f64)>, rhs: f64) -> Self {
        Self {
            coeffs: canonical_terms(coeffs),
            sense: RowSense::Eq,
            rhs,
        }
    }

    pub fn activity(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(j, a)| a * x[j]).sum()
    }

    /// Amount by which `x` violates the row (0 when satisfied).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let lhs = self.activity(x);
        match self.sense {
            RowSense::Le => (lhs - self.rhs).max(0.0),
            RowSense::Eq => (lhs - self.rhs).abs(),
        }
    }

    pub fn coeff(&self, col: usize) -> f64 {
        self.coeffs
            .binary_search_by_key(&col, |&(j, _)| j)
            .map(|k| self.coeffs[k].1)
            .unwrap_or(0.0)
    }
}

fn canonical_terms(mut coeffs: Vec<(usize, f64)>) -> Vec<(usize, f64)> {
    coeffs.sort_by_key(|&(j, _)| j);
    let mut out: Vec<(usize, f64)> = Vec::with_capacity(coeffs.len());
    for (j, a) in coeffs {
        match out.last_mut() {
            Some(last) if last.0 == j => last.1 += a,
            _ => out.push((j, a)),
        }
    }
    out.retain(|&(_, a)| a != 0.0);
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ObjSense {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Objective {
    pub sense: ObjSense,
    pub coeffs: Vec<(usize, f64)>,
}

impl Objective {
    pub fn value(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(j, c)| c * x[j]).sum()
    }
}

/// Which encoding was used for the strictly active ReLU neurons.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FormulationKind {
    BigM,
    Extended,
    /// Big-M base model whose neurons are eligible for lazy ideal cuts.
    BigMPlusCuts,
}

/// Columns of one neuron's `(x, y, z)` slice.
#[derive(Debug, Clone, PartialEq)]
pub struct NeuronVars {
    pub x: Vec<usize>,
    pub y: usize,
    pub z: usize,
}

/// A strictly active ReLU neuron together with its columns.
#[derive(Debug, Clone, PartialEq)]
pub struct NeuronBlock {
    pub id: NeuronId,
    pub ctx: NeuronContext,
    pub vars: NeuronVars,
}

#[derive(Debug, Clone)]
pub struct MipModel {
    pub kind: FormulationKind,
    variables: Vec<Variable>,
    constraints: Vec<LinearRow>,
    objective: Objective,
    var_index: HashMap<VarKey, usize>,
    blocks: Vec<NeuronBlock>,
}

impl MipModel {
    pub fn new(kind: FormulationKind) -> Self {
        Self {
            kind,
            variables: Vec::new(),
            constraints: Vec::new(),
            objective: Objective {
                sense: ObjSense::Maximize,
                coeffs: Vec::new(),
            },
            var_index: HashMap::new(),
            blocks: Vec::new(),
        }
    }

    pub fn add_variable(
        &mut self,
        key: VarKey,
        lower: f64,
        upper: f64,
        var_type: VarType,
    ) -> Result<usize> {
        if self.var_index.contains_key(&key) {
            return Err(Error::InvalidModel(format!("duplicate variable {key}")));
        }
        let col = self.variables.len();
        self.variables.push(Variable {
            key,
            lower,
            upper,
            var_type,
        });
        self.var_index.insert(key, col);
        Ok(col)
    }

    pub fn add_row(&mut self, row: LinearRow) {
        self.constraints.push(row);
    }

    pub fn set_objective(&mut self, objective: Objective) {
        self.objective = objective;
    }

    pub(crate) fn push_block(&mut self, block: NeuronBlock) {
        self.blocks.push(block);
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn constraints(&self) -> &[LinearRow] {
        &self.constraints
    }

    pub fn objective(&self) -> &Objective {
        &self.objective
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn col(&self, key: &VarKey) -> Option<usize> {
        self.var_index.get(key).copied()
    }

    pub fn col_by_name(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name() == name)
    }

    /// Strictly active ReLU neurons in network order.
    pub fn neuron_blocks(&self) -> &[NeuronBlock] {
        &self.blocks
    }

    /// Blocks eligible for lazy separation (empty unless built for cuts).
    pub fn cut_eligible(&self) -> &[NeuronBlock] {
        match self.kind {
            FormulationKind::BigMPlusCuts => &self.blocks,
            _ => &[],
        }
    }

    pub fn binary_cols(&self) -> Vec<usize> {
        self.variables
            .iter()
            .enumerate()
            .filter(|(_, v)| v.var_type == VarType::Binary)
            .map(|(j, _)| j)
            .collect()
    }

    pub fn count_continuous(&self) -> usize {
        self.variables
            .iter()
            .filter(|v| v.var_type == VarType::Continuous)
            .count()
    }

    /// Checks references, binary bounds and coefficient finiteness.
    pub fn validate(&self) -> Result<()> {
        let n = self.variables.len();
        for v in &self.variables {
            if v.lower.is_nan() || v.upper.is_nan() || v.lower > v.upper {
                return Err(Error::InvalidModel(format!("bad bounds on {}", v.key)));
            }
            if v.var_type == VarType::Binary && (v.lower < 0.0 || v.upper > 1.0) {
                return Err(Error::InvalidModel(format!(
                    "binary {} has bounds outside [0, 1]",
                    v.key
                )));
            }
        }
        let rows = self
            .constraints
            .iter()
            .map(|r| (&r.coeffs, r.rhs))
            .chain(std::iter::once((&self.objective.coeffs, 0.0)));
        for (k, (coeffs, rhs)) in rows.enumerate() {
            if !rhs.is_finite() {
                return Err(Error::NonFinite(format!("row {k} right-hand side")));
            }
            for &(j, a) in coeffs {
                if j >= n {
                    return Err(Error::InvalidModel(format!(
                        "row {k} references column {j} of {n}"
                    )));
                }
                if !a.is_finite() {
                    return Err(Error::NonFinite(format!("row {k} coefficient")));
                }
            }
        }
        Ok(())
    }

    /// Largest bound or row violation of `x` (integrality ignored).
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let bounds = self
            .variables
            .iter()
            .zip(x)
            .map(|(v, &xv)| (v.lower - xv).max(xv - v.upper).max(0.0));
        let rows = self.constraints.iter().map(|r| r.violation(x));
        bounds.chain(rows).fold(0.0, f64::max)
    }
}
