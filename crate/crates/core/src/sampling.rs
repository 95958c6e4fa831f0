//! Seeded generators for random contexts, query points and tiny networks.
//!
//! All generators draw from [`ChaCha8Rng`] so results are reproducible
//! across platforms for a given seed.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
pub use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::nn_model::{Activation, Layer, Network};
use crate::relaxation::{build_context, AffineForm, InputBox, NeuronContext};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random strictly active context with `1..=max_eta` inputs, mixed-sign
/// weights (about one in seven exactly zero) and a random box.
pub fn strictly_active_context(rng: &mut ChaCha8Rng, max_eta: usize) -> NeuronContext {
    let eta = rng.random_range(1..=max_eta);
    strictly_active_context_with_dim(rng, eta)
}

pub fn strictly_active_context_with_dim(rng: &mut ChaCha8Rng, eta: usize) -> NeuronContext {
    loop {
        let mut weights: Vec<f64> = (0..eta)
            .map(|_| {
                if rng.random_bool(1.0 / 7.0) {
                    0.0
                } else {
                    rng.random_range(-2.0..2.0)
                }
            })
            .collect();
        if weights.iter().all(|&w| w == 0.0) {
            let i = rng.random_range(0..eta);
            weights[i] = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        }
        let lower: Vec<f64> = (0..eta).map(|_| rng.random_range(-2.0..1.0)).collect();
        let upper: Vec<f64> = lower
            .iter()
            .map(|l| l + rng.random_range(0.1..2.0))
            .collect();
        let (lo_sum, hi_sum) = weights
            .iter()
            .zip(lower.iter().zip(&upper))
            .fold((0.0, 0.0), |(a, b), (&w, (&l, &u))| {
                (a + (w * l).min(w * u), b + (w * l).max(w * u))
            });
        let t = rng.random_range(0.05..0.95);
        let bias = -hi_sum + t * (hi_sum - lo_sum);
        let bounds = InputBox::new(lower, upper).expect("widths are positive");
        let ctx = build_context(AffineForm::new(weights, bias), bounds).expect("shapes agree");
        if ctx.m_minus() < 0.0 && ctx.m_plus() > 0.0 {
            return ctx;
        }
    }
}

/// A point in the box, `z` in `[0, 1]`, and `y` feasible for the big-M
/// relaxation when that slice is nonempty (otherwise `y` in `[0, M+]`).
pub fn relaxation_point(rng: &mut ChaCha8Rng, ctx: &NeuronContext) -> (Vec<f64>, f64, f64) {
    let b = ctx.bounds();
    let x: Vec<f64> = b
        .lower()
        .iter()
        .zip(b.upper())
        .map(|(&l, &u)| rng.random_range(l..=u))
        .collect();
    let z = rng.random_range(0.0..=1.0);
    let f = ctx.affine().eval(&x);
    let lo = f.max(0.0);
    let hi = (f - ctx.m_minus() * (1.0 - z)).min(ctx.m_plus() * z);
    let y = if hi >= lo {
        rng.random_range(lo..=hi)
    } else {
        rng.random_range(0.0..=ctx.m_plus())
    };
    (x, y, z)
}

/// Random subset of the context's support.
pub fn support_subset(rng: &mut ChaCha8Rng, ctx: &NeuronContext) -> Vec<usize> {
    ctx.support()
        .iter()
        .copied()
        .filter(|_| rng.random_bool(0.5))
        .collect()
}

/// Random dense network with the given layer widths (`arch[0]` is the input
/// dimension). Hidden layers use ReLU and the last layer is linear.
pub fn random_network(rng: &mut ChaCha8Rng, arch: &[usize]) -> Result<Network> {
    let mut layers = Vec::with_capacity(arch.len().saturating_sub(1));
    for (k, pair) in arch.windows(2).enumerate() {
        let (fan_in, width) = (pair[0], pair[1]);
        let scale = (2.0 / fan_in as f64).sqrt();
        let weights = (0..width)
            .map(|_| {
                (0..fan_in)
                    .map(|_| scale * rng.random_range(-1.0..1.0))
                    .collect()
            })
            .collect();
        let biases = (0..width).map(|_| rng.random_range(-0.3..0.3)).collect();
        let act = if k + 2 == arch.len() {
            Activation::Linear
        } else {
            Activation::Relu
        };
        layers.push(Layer::new(weights, biases, act)?);
    }
    Network::new(layers)
}

/// Random ReLU-only network (every layer, including the last, applies ReLU).
pub fn random_relu_network(rng: &mut ChaCha8Rng, arch: &[usize]) -> Result<Network> {
    let net = random_network(rng, arch)?;
    let layers = net
        .layers()
        .iter()
        .map(|l| Layer::new(l.weights().to_vec(), l.biases().to_vec(), Activation::Relu))
        .collect::<Result<Vec<_>>>()?;
    Network::new(layers)
}

pub fn uniform_point(rng: &mut ChaCha8Rng, bounds: &InputBox) -> Vec<f64> {
    bounds
        .lower()
        .iter()
        .zip(bounds.upper())
        .map(|(&l, &u)| rng.random_range(l..=u))
        .collect()
}
