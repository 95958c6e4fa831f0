//! MIP encodings of ReLU networks.
//!
//! Three encodings of a strictly active neuron `y = max(0, w·x + b)` are
//! provided:
//!
//! * big-M: `y >= w·x + b`, `y <= w·x + b - M-(1 - z)`, `y <= M+ z`;
//! * the extended multiple-choice encoding with a copy `x0` of the inputs
//!   (the second copy and the split outputs are substituted out);
//! * the ideal non-extended family `y <= sum_{i in I} w_i (x_i - breve_L_i (1 - z))
//!   + (b + sum_{i not in I} w_i breve_U_i) z` over subsets `I` of the support,
//!   supplied lazily as [`Cut`]s on top of the big-M model.
//!
//! Neurons that are always off or always on are replaced by `y = 0` or
//! `y = w·x + b` and get no indicator.

mod lp_format;
mod model;

pub use lp_format::{export_lp, import_lp};
pub use model::{
    FormulationKind, LinearRow, MipModel, NeuronBlock, NeuronId, NeuronVars, ObjSense, Objective,
    RowSense, VarKey, VarRole, VarType, Variable,
};

use crate::error::{Error, Result};
use crate::nn_model::{Activation, Network};
use crate::relaxation::{propagate_bounds, ActivityState, InputBox, NeuronContext};

/// A member of the ideal inequality family: neuron plus subset of its support.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cut {
    pub neuron: NeuronId,
    subset: Vec<usize>,
}

impl Cut {
    /// Subset indices are sorted and deduplicated.
    pub fn new(neuron: NeuronId, mut subset: Vec<usize>) -> Self {
        subset.sort_unstable();
        subset.dedup();
        Self { neuron, subset }
    }

    pub fn subset(&self) -> &[usize] {
        &self.subset
    }
}

fn require_strict(ctx: &NeuronContext) -> Result<()> {
    match ctx.activity() {
        ActivityState::StrictlyActive => Ok(()),
        _ => Err(Error::NotStrictlyActive {
            m_minus: ctx.m_minus(),
            m_plus: ctx.m_plus(),
        }),
    }
}

fn check_vars(ctx: &NeuronContext, vars: &NeuronVars) -> Result<()> {
    if vars.x.len() != ctx.dim() {
        return Err(Error::Dimension {
            expected: ctx.dim(),
            got: vars.x.len(),
        });
    }
    Ok(())
}

/// `w·x` terms over the support.
fn affine_terms(ctx: &NeuronContext, x_cols: &[usize], scale: f64) -> Vec<(usize, f64)> {
    ctx.support()
        .iter()
        .map(|&i| (x_cols[i], scale * ctx.weights()[i]))
        .collect()
}

/// The three big-M rows of a strictly active neuron.
pub fn big_m_neuron(ctx: &NeuronContext, vars: &NeuronVars) -> Result<Vec<LinearRow>> {
    require_strict(ctx)?;
    check_vars(ctx, vars)?;
    let b = ctx.bias();
    let (m_minus, m_plus) = (ctx.m_minus(), ctx.m_plus());

    // y >= w·x + b
    let mut lower = affine_terms(ctx, &vars.x, 1.0);
    lower.push((vars.y, -1.0));
    // y <= w·x + b - M-(1 - z)
    let mut upper = affine_terms(ctx, &vars.x, -1.0);
    upper.push((vars.y, 1.0));
    upper.push((vars.z, -m_minus));

    Ok(vec![
        LinearRow::le(lower, -b),
        LinearRow::le(upper, b - m_minus),
        // y <= M+ z
        LinearRow::le(vec![(vars.y, 1.0), (vars.z, -m_plus)], 0.0),
    ])
}

/// Auxiliary columns and rows of the extended encoding of one neuron.
#[derive(Debug, Clone)]
pub struct ExtendedBlock {
    pub aux: Vec<Variable>,
    pub aux_cols: Vec<usize>,
    pub rows: Vec<LinearRow>,
}

/// Extended encoding with `x1 = x - x0`, `y0 = 0`, `y1 = y` substituted.
///
/// Auxiliary column `k` is `first_aux_col + k`.
pub fn extended_neuron(
    ctx: &NeuronContext,
    id: NeuronId,
    vars: &NeuronVars,
    first_aux_col: usize,
) -> Result<ExtendedBlock> {
    require_strict(ctx)?;
    check_vars(ctx, vars)?;
    let n = ctx.dim();
    let (lo, hi) = (ctx.bounds().lower(), ctx.bounds().upper());
    let b = ctx.bias();
    let aux_cols: Vec<usize> = (first_aux_col..first_aux_col + n).collect();
    let aux = (0..n)
        .map(|k| Variable {
            key: VarKey {
                layer: id.layer,
                neuron: id.neuron,
                role: VarRole::X0(k),
            },
            lower: lo[k].min(0.0),
            upper: hi[k].max(0.0),
            var_type: VarType::Continuous,
        })
        .collect();

    let mut rows = Vec::with_capacity(2 + 4 * n);
    // w·x0 + b(1 - z) <= 0
    let mut off = affine_terms(ctx, &aux_cols, 1.0);
    off.push((vars.z, -b));
    rows.push(LinearRow::le(off, -b));
    // y = w·(x - x0) + b z
    let mut on = vec![(vars.y, 1.0), (vars.z, -b)];
    on.extend(affine_terms(ctx, &vars.x, -1.0));
    on.extend(affine_terms(ctx, &aux_cols, 1.0));
    rows.push(LinearRow::eq(on, 0.0));
    for k in 0..n {
        let (x, x0) = (vars.x[k], aux_cols[k]);
        // L(1 - z) <= x0 <= U(1 - z)
        rows.push(LinearRow::ge(vec![(x0, 1.0), (vars.z, lo[k])], lo[k]));
        rows.push(LinearRow::le(vec![(x0, 1.0), (vars.z, hi[k])], hi[k]));
        // L z <= x - x0 <= U z
        rows.push(LinearRow::ge(
            vec![(x, 1.0), (x0, -1.0), (vars.z, -lo[k])],
            0.0,
        ));
        rows.push(LinearRow::le(
            vec![(x, 1.0), (x0, -1.0), (vars.z, -hi[k])],
            0.0,
        ));
    }
    Ok(ExtendedBlock {
        aux,
        aux_cols,
        rows,
    })
}

fn check_subset(ctx: &NeuronContext, subset: &[usize]) -> Result<()> {
    if ctx.is_subset_of_support(subset) {
        Ok(())
    } else {
        Err(Error::SubsetNotInSupport(subset.to_vec()))
    }
}

/// Right-hand side of the ideal inequality for `subset` at `(x, z)`.
///
/// `subset` must be sorted.
pub fn ideal_cut_rhs(ctx: &NeuronContext, subset: &[usize], x: &[f64], z: f64) -> Result<f64> {
    check_subset(ctx, subset)?;
    if x.len() != ctx.dim() {
        return Err(Error::Dimension {
            expected: ctx.dim(),
            got: x.len(),
        });
    }
    let w = ctx.weights();
    let (bl, bu) = (ctx.breve_lower(), ctx.breve_upper());
    let mut in_part = 0.0;
    let mut z_coeff = ctx.bias();
    let mut next = subset.iter().peekable();
    for &i in ctx.support() {
        if next.peek() == Some(&&i) {
            next.next();
            in_part += w[i] * (x[i] - bl[i] * (1.0 - z));
        } else {
            z_coeff += w[i] * bu[i];
        }
    }
    Ok(in_part + z_coeff * z)
}

/// The ideal inequality for `cut` as `y - rhs(x, z) <= 0` rearranged into a row.
pub fn cut_to_constraint(ctx: &NeuronContext, cut: &Cut, vars: &NeuronVars) -> Result<LinearRow> {
    check_subset(ctx, cut.subset())?;
    check_vars(ctx, vars)?;
    let w = ctx.weights();
    let (bl, bu) = (ctx.breve_lower(), ctx.breve_upper());
    let mut terms = vec![(vars.y, 1.0)];
    let mut z_coeff = ctx.bias();
    let mut rhs = 0.0;
    let mut next = cut.subset().iter().peekable();
    for &i in ctx.support() {
        if next.peek() == Some(&&i) {
            next.next();
            terms.push((vars.x[i], -w[i]));
            z_coeff += w[i] * bl[i];
            rhs -= w[i] * bl[i];
        } else {
            z_coeff += w[i] * bu[i];
        }
    }
    terms.push((vars.z, -z_coeff));
    Ok(LinearRow::le(terms, rhs))
}

/// Linear objective over structured variable names.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveSpec {
    pub sense: ObjSense,
    pub terms: Vec<(VarKey, f64)>,
}

impl ObjectiveSpec {
    pub fn maximize(terms: Vec<(VarKey, f64)>) -> Self {
        Self {
            sense: ObjSense::Maximize,
            terms,
        }
    }
}

/// Encodes the whole network over `input_box` with the requested formulation.
pub fn assemble_mip(
    net: &Network,
    input_box: &InputBox,
    objective: &ObjectiveSpec,
    kind: FormulationKind,
) -> Result<MipModel> {
    let bounds = propagate_bounds(net, input_box)?;
    let mut model = MipModel::new(kind);

    let mut prev_cols = Vec::with_capacity(net.input_dim());
    for j in 0..net.input_dim() {
        prev_cols.push(model.add_variable(
            VarKey::input(j),
            input_box.lower()[j],
            input_box.upper()[j],
            VarType::Continuous,
        )?);
    }

    for (l, layer) in net.layers().iter().enumerate() {
        let layer_no = l + 1;
        let out_box = &bounds.output_boxes[l];
        let mut cols = Vec::with_capacity(layer.output_dim());
        for (j, ctx) in bounds.contexts[l].iter().enumerate() {
            let y = model.add_variable(
                VarKey::output(layer_no, j),
                out_box.lower()[j],
                out_box.upper()[j],
                VarType::Continuous,
            )?;
            cols.push(y);
            let state = match layer.activation() {
                Activation::Linear => ActivityState::AlwaysOn,
                Activation::Relu => ctx.activity(),
            };
            match state {
                ActivityState::AlwaysOff => model.add_row(LinearRow::eq(vec![(y, 1.0)], 0.0)),
                ActivityState::AlwaysOn => {
                    let mut terms = affine_terms(ctx, &prev_cols, -1.0);
                    terms.push((y, 1.0));
                    model.add_row(LinearRow::eq(terms, ctx.bias()));
                }
                ActivityState::StrictlyActive => {
                    let z = model.add_variable(
                        VarKey::indicator(layer_no, j),
                        0.0,
                        1.0,
                        VarType::Binary,
                    )?;
                    let vars = NeuronVars {
                        x: prev_cols.clone(),
                        y,
                        z,
                    };
                    let id = NeuronId::new(layer_no, j);
                    match kind {
                        FormulationKind::BigM | FormulationKind::BigMPlusCuts => {
                            for row in big_m_neuron(ctx, &vars)? {
                                model.add_row(row);
                            }
                        }
                        FormulationKind::Extended => {
                            let block = extended_neuron(ctx, id, &vars, model.num_vars())?;
                            for v in block.aux {
                                model.add_variable(v.key, v.lower, v.upper, v.var_type)?;
                            }
                            for row in block.rows {
                                model.add_row(row);
                            }
                        }
                    }
                    model.push_block(NeuronBlock {
                        id,
                        ctx: ctx.clone(),
                        vars,
                    });
                }
            }
        }
        prev_cols = cols;
    }

    let mut coeffs = Vec::with_capacity(objective.terms.len());
    for (key, c) in &objective.terms {
        let col = model
            .col(key)
            .ok_or_else(|| Error::UnknownVariable(key.to_string()))?;
        coeffs.push((col, *c));
    }
    model.set_objective(Objective {
        sense: objective.sense,
        coeffs: LinearRow::le(coeffs, 0.0).coeffs,
    });
    model.validate()?;
    Ok(model)
}

/// One strictly active neuron over `ctx`'s box, maximizing `y`.
///
/// Columns are `x_0_*`, `y_1_0`, `z_1_0`, then any auxiliary copies. With
/// `fixed_x` the input columns are pinned to the given point.
pub fn single_neuron_mip(
    ctx: &NeuronContext,
    kind: FormulationKind,
    fixed_x: Option<&[f64]>,
) -> Result<MipModel> {
    require_strict(ctx)?;
    let n = ctx.dim();
    if let Some(x) = fixed_x {
        if x.len() != n {
            return Err(Error::Dimension {
                expected: n,
                got: x.len(),
            });
        }
    }
    let mut model = MipModel::new(kind);
    for i in 0..n {
        let (l, u) = match fixed_x {
            Some(x) => (x[i], x[i]),
            None => (ctx.bounds().lower()[i], ctx.bounds().upper()[i]),
        };
        model.add_variable(VarKey::input(i), l, u, VarType::Continuous)?;
    }
    let y = model.add_variable(VarKey::output(1, 0), 0.0, ctx.m_plus(), VarType::Continuous)?;
    let z = model.add_variable(VarKey::indicator(1, 0), 0.0, 1.0, VarType::Binary)?;
    let vars = NeuronVars {
        x: (0..n).collect(),
        y,
        z,
    };
    let id = NeuronId::new(1, 0);
    match kind {
        FormulationKind::BigM | FormulationKind::BigMPlusCuts => {
            for row in big_m_neuron(ctx, &vars)? {
                model.add_row(row);
            }
        }
        FormulationKind::Extended => {
            let block = extended_neuron(ctx, id, &vars, model.num_vars())?;
            for v in block.aux {
                model.add_variable(v.key, v.lower, v.upper, v.var_type)?;
            }
            for row in block.rows {
                model.add_row(row);
            }
        }
    }
    model.set_objective(Objective {
        sense: ObjSense::Maximize,
        coeffs: vec![(y, 1.0)],
    });
    model.push_block(NeuronBlock {
        id,
        ctx: ctx.clone(),
        vars,
    });
    model.validate()?;
    Ok(model)
}
