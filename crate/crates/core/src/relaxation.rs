//! Per-neuron bound data and interval propagation.
//!
//! For a neuron `f(x) = w·x + b` over a box `[L, U]`, the sign-adjusted
//! corners `breve_L`, `breve_U` pick, per coordinate, the end of the interval
//! that minimizes (resp. maximizes) `w_i x_i`. Then `M- = w·breve_L + b` and
//! `M+ = w·breve_U + b` are the exact minimum and maximum of `f` on the box.

use crate::error::{Error, Result};
use crate::nn_model::{Activation, Network};

/// Default widening applied to degenerate propagated intervals.
pub const DEFAULT_WIDENING: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct AffineForm {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl AffineForm {
    pub fn new(weights: Vec<f64>, bias: f64) -> Self {
        Self { weights, bias }
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    #[inline]
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.bias
    }
}

/// Axis-aligned box `[lower, upper]` with finite, strictly ordered bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct InputBox {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl InputBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::Dimension {
                expected: lower.len(),
                got: upper.len(),
            });
        }
        if lower.is_empty() {
            return Err(Error::InvalidBox("empty box".into()));
        }
        for (i, (l, u)) in lower.iter().zip(&upper).enumerate() {
            if !l.is_finite() || !u.is_finite() {
                return Err(Error::NonFinite(format!("box bound {i}")));
            }
            if l >= u {
                return Err(Error::InvalidBox(format!(
                    "component {i}: lower {l} is not below upper {u}"
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    /// The box `[lo, hi]^dim`.
    pub fn cube(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo; dim], vec![hi; dim])
    }

    /// Builds a box from possibly degenerate intervals, widening any
    /// component with `upper <= lower` to `[lower, lower + widen]`.
    pub fn widened(lower: Vec<f64>, mut upper: Vec<f64>, widen: f64) -> Result<Self> {
        for (u, l) in upper.iter_mut().zip(&lower) {
            if *u <= *l {
                *u = *l + widen;
            }
        }
        Self::new(lower, upper)
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (l, u))| *v >= l - tol && *v <= u + tol)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ActivityState {
    AlwaysOff,
    AlwaysOn,
    StrictlyActive,
}

/// Everything the formulations need to know about one neuron.
#[derive(Debug, Clone, PartialEq)]
pub struct NeuronContext {
    affine: AffineForm,
    bounds: InputBox,
    breve_lower: Vec<f64>,
    breve_upper: Vec<f64>,
    m_minus: f64,
    m_plus: f64,
    support: Vec<usize>,
}

impl NeuronContext {
    pub fn affine(&self) -> &AffineForm {
        &self.affine
    }

    pub fn weights(&self) -> &[f64] {
        &self.affine.weights
    }

    pub fn bias(&self) -> f64 {
        self.affine.bias
    }

    pub fn bounds(&self) -> &InputBox {
        &self.bounds
    }

    pub fn breve_lower(&self) -> &[f64] {
        &self.breve_lower
    }

    pub fn breve_upper(&self) -> &[f64] {
        &self.breve_upper
    }

    /// Minimum of the pre-activation over the box.
    pub fn m_minus(&self) -> f64 {
        self.m_minus
    }

    /// Maximum of the pre-activation over the box.
    pub fn m_plus(&self) -> f64 {
        self.m_plus
    }

    /// Sorted indices `i` with `w_i != 0`.
    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn dim(&self) -> usize {
        self.affine.dim()
    }

    pub fn activity(&self) -> ActivityState {
        activity(self)
    }

    pub fn is_subset_of_support(&self, subset: &[usize]) -> bool {
        subset.iter().all(|i| self.support.binary_search(i).is_ok())
    }
}

/// Derives breve bounds, `M-`, `M+` and the support in one pass over the inputs.
pub fn build_context(affine: AffineForm, bounds: InputBox) -> Result<NeuronContext> {
    if affine.dim() != bounds.dim() {
        return Err(Error::Dimension {
            expected: bounds.dim(),
            got: affine.dim(),
        });
    }
    if affine.weights.iter().any(|w| !w.is_finite()) || !affine.bias.is_finite() {
        return Err(Error::NonFinite("affine form".into()));
    }
    let n = affine.dim();
    let mut breve_lower = Vec::with_capacity(n);
    let mut breve_upper = Vec::with_capacity(n);
    let mut support = Vec::new();
    let mut m_minus = affine.bias;
    let mut m_plus = affine.bias;
    for i in 0..n {
        let w = affine.weights[i];
        let (lo, hi) = (bounds.lower[i], bounds.upper[i]);
        let (bl, bu) = if w >= 0.0 { (lo, hi) } else { (hi, lo) };
        breve_lower.push(bl);
        breve_upper.push(bu);
        m_minus += w * bl;
        m_plus += w * bu;
        if w != 0.0 {
            support.push(i);
        }
    }
    Ok(NeuronContext {
        affine,
        bounds,
        breve_lower,
        breve_upper,
        m_minus,
        m_plus,
        support,
    })
}

pub fn activity(ctx: &NeuronContext) -> ActivityState {
    if ctx.m_plus <= 0.0 {
        ActivityState::AlwaysOff
    } else if ctx.m_minus >= 0.0 {
        ActivityState::AlwaysOn
    } else {
        ActivityState::StrictlyActive
    }
}

/// Bounds for every neuron of a network, layer by layer.
#[derive(Debug, Clone)]
pub struct PropagatedBounds {
    /// `contexts[l][j]` is neuron `j` of layer `l + 1`.
    pub contexts: Vec<Vec<NeuronContext>>,
    /// Post-activation box of each layer (after widening).
    pub output_boxes: Vec<InputBox>,
}

impl PropagatedBounds {
    pub fn input_box(&self, layer: usize) -> &InputBox {
        self.contexts[layer][0].bounds()
    }
}

/// Interval propagation with the default widening.
pub fn propagate_bounds(net: &Network, input_box: &InputBox) -> Result<PropagatedBounds> {
    propagate_bounds_with(net, input_box, DEFAULT_WIDENING)
}

pub fn propagate_bounds_with(
    net: &Network,
    input_box: &InputBox,
    widen: f64,
) -> Result<PropagatedBounds> {
    if input_box.dim() != net.input_dim() {
        return Err(Error::Dimension {
            expected: net.input_dim(),
            got: input_box.dim(),
        });
    }
    let mut contexts = Vec::with_capacity(net.layers().len());
    let mut output_boxes = Vec::with_capacity(net.layers().len());
    let mut current = input_box.clone();
    for layer in net.layers() {
        let mut layer_ctx = Vec::with_capacity(layer.output_dim());
        let mut lo = Vec::with_capacity(layer.output_dim());
        let mut hi = Vec::with_capacity(layer.output_dim());
        for (row, &b) in layer.weights().iter().zip(layer.biases()) {
            let ctx = build_context(AffineForm::new(row.clone(), b), current.clone())?;
            match layer.activation() {
                Activation::Relu => {
                    lo.push(ctx.m_minus.max(0.0));
                    hi.push(ctx.m_plus.max(0.0));
                }
                Activation::Linear => {
                    lo.push(ctx.m_minus);
                    hi.push(ctx.m_plus);
                }
            }
            layer_ctx.push(ctx);
        }
        current = InputBox::widened(lo, hi, widen)?;
        contexts.push(layer_ctx);
        output_boxes.push(current.clone());
    }
    Ok(PropagatedBounds {
        contexts,
        output_boxes,
    })
}
