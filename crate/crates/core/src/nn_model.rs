//! Dense feedforward ReLU networks.
//!
//! A [`Network`] is an ordered list of fully connected layers. Every hidden
//! layer applies `ReLU(v) = max(0, v)`; the final layer may be linear (logits).
//!
//! Networks are stored as a JSON document:
//!
//! ```json
//! {"layers": [{"weights": [[1.0, 1.0]], "biases": [-1.5], "activation": "relu"}]}
//! ```
//!
//! Weights are row-major: row `j` of layer `i` holds the incoming weights of
//! neuron `j`, indexed by the outputs of layer `i - 1` (or the network input).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Activation {
    Relu,
    Linear,
}

impl Activation {
    pub fn tag(self) -> &'static str {
        match self {
            Activation::Relu => "relu",
            Activation::Linear => "linear",
        }
    }

    fn from_tag(tag: &str) -> Result<Self> {
        match tag {
            "relu" => Ok(Activation::Relu),
            "linear" => Ok(Activation::Linear),
            other => Err(Error::UnknownActivation(other.to_string())),
        }
    }

    #[inline]
    pub fn apply(self, v: f64) -> f64 {
        match self {
            Activation::Relu => v.max(0.0),
            Activation::Linear => v,
        }
    }
}

/// One fully connected layer.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    weights: Vec<Vec<f64>>,
    biases: Vec<f64>,
    activation: Activation,
}

impl Layer {
    pub fn new(weights: Vec<Vec<f64>>, biases: Vec<f64>, activation: Activation) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Shape("layer has no neurons".into()));
        }
        if weights.len() != biases.len() {
            return Err(Error::Shape(format!(
                "{} weight rows but {} biases",
                weights.len(),
                biases.len()
            )));
        }
        let width = weights[0].len();
        if width == 0 {
            return Err(Error::Shape("layer has zero inputs".into()));
        }
        for (j, row) in weights.iter().enumerate() {
            if row.len() != width {
                return Err(Error::Shape(format!(
                    "weight row {j} has length {}, expected {width}",
                    row.len()
                )));
            }
            if row.iter().any(|w| !w.is_finite()) {
                return Err(Error::NonFinite(format!("weight row {j}")));
            }
        }
        if biases.iter().any(|b| !b.is_finite()) {
            return Err(Error::NonFinite("biases".into()));
        }
        Ok(Self {
            weights,
            biases,
            activation,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.weights[0].len()
    }

    pub fn output_dim(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    pub fn biases(&self) -> &[f64] {
        &self.biases
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    /// Pre-activation values `W x + b`.
    pub fn pre_activation(&self, x: &[f64]) -> Vec<f64> {
        self.weights
            .iter()
            .zip(&self.biases)
            .map(|(row, b)| row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + b)
            .collect()
    }
}

/// A validated feedforward network. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    layers: Vec<Layer>,
}

impl Network {
    pub fn new(layers: Vec<Layer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Shape("network has no layers".into()));
        }
        for (i, pair) in layers.windows(2).enumerate() {
            if pair[1].input_dim() != pair[0].output_dim() {
                return Err(Error::Shape(format!(
                    "layer {} expects {} inputs but layer {} has width {}",
                    i + 2,
                    pair[1].input_dim(),
                    i + 1,
                    pair[0].output_dim()
                )));
            }
        }
        let last = layers.len() - 1;
        if let Some(i) = layers[..last]
            .iter()
            .position(|l| l.activation != Activation::Relu)
        {
            return Err(Error::Shape(format!(
                "hidden layer {} must use relu",
                i + 1
            )));
        }
        Ok(Self { layers })
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].input_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].output_dim()
    }

    /// Evaluates the network at `x`.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_dim() {
            return Err(Error::Dimension {
                expected: self.input_dim(),
                got: x.len(),
            });
        }
        let mut current = x.to_vec();
        for layer in &self.layers {
            let act = layer.activation;
            current = layer
                .pre_activation(&current)
                .into_iter()
                .map(|v| act.apply(v))
                .collect();
        }
        Ok(current)
    }

    /// Evaluates the network and returns every layer's pre-activation values.
    pub fn forward_trace(&self, x: &[f64]) -> Result<Vec<Vec<f64>>> {
        if x.len() != self.input_dim() {
            return Err(Error::Dimension {
                expected: self.input_dim(),
                got: x.len(),
            });
        }
        let mut trace = Vec::with_capacity(self.layers.len());
        let mut current = x.to_vec();
        for layer in &self.layers {
            let pre = layer.pre_activation(&current);
            current = pre.iter().map(|&v| layer.activation.apply(v)).collect();
            trace.push(pre);
        }
        Ok(trace)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        load_network(text)
    }

    pub fn to_json(&self) -> String {
        save_network(self)
    }
}

#[derive(Serialize, Deserialize)]
struct RawLayer {
    weights: Vec<Vec<f64>>,
    biases: Vec<f64>,
    activation: String,
}

#[derive(Serialize, Deserialize)]
struct RawNetwork {
    layers: Vec<RawLayer>,
}

/// Parses and validates a network document.
pub fn load_network(text: &str) -> Result<Network> {
    let raw: RawNetwork = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let layers = raw
        .layers
        .into_iter()
        .map(|l| Layer::new(l.weights, l.biases, Activation::from_tag(&l.activation)?))
        .collect::<Result<Vec<_>>>()?;
    Network::new(layers)
}

/// Serializes a network. Floats are written in shortest round-trip form.
pub fn save_network(net: &Network) -> String {
    let raw = RawNetwork {
        layers: net
            .layers
            .iter()
            .map(|l| RawLayer {
                weights: l.weights.clone(),
                biases: l.biases.clone(),
                activation: l.activation.tag().to_string(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&raw).expect("network serialization cannot fail")
}

#[cfg(test)]
mod tests {
    use super::*;

    const CORNER_NET: &str =
        r#"{"layers": [{"weights": [[1, 1]], "biases": [-1.5], "activation": "relu"}]}"#;

    #[test]
    fn loads_single_identity_neuron() {
        let net = load_network(
            r#"{"layers": [{"weights": [[1]], "biases": [0], "activation": "relu"}]}"#,
        )
        .unwrap();
        assert_eq!(net.input_dim(), 1);
        assert_eq!(net.output_dim(), 1);
    }

    #[test]
    fn corner_neuron_forward() {
        let net = load_network(CORNER_NET).unwrap();
        assert_eq!(net.input_dim(), 2);
        assert_eq!(net.layers()[0].weights(), &[vec![1.0, 1.0]]);
        assert_eq!(net.layers()[0].biases(), &[-1.5]);
        assert_eq!(net.forward(&[1.0, 1.0]).unwrap(), vec![0.5]);
        assert_eq!(net.forward(&[1.0, 0.0]).unwrap(), vec![0.0]);
    }

    #[test]
    fn linear_last_layer_applies_no_max() {
        let net = load_network(
            r#"{"layers": [{"weights": [[1]], "biases": [-3], "activation": "linear"}]}"#,
        )
        .unwrap();
        assert_eq!(net.forward(&[1.0]).unwrap(), vec![-2.0]);
    }

    #[test]
    fn rejects_width_mismatch() {
        let text = r#"{"layers": [
            {"weights": [[1],[1],[1]], "biases": [0,0,0], "activation": "relu"},
            {"weights": [[1,1]], "biases": [0], "activation": "linear"}]}"#;
        assert!(matches!(load_network(text), Err(Error::Shape(_))));
    }

    #[test]
    fn rejects_unknown_activation() {
        let text = r#"{"layers": [{"weights": [[1]], "biases": [0], "activation": "tanh"}]}"#;
        assert!(matches!(
            load_network(text),
            Err(Error::UnknownActivation(t)) if t == "tanh"
        ));
    }

    #[test]
    fn rejects_ragged_rows_and_bias_count() {
        let ragged =
            r#"{"layers": [{"weights": [[1, 2],[1]], "biases": [0,0], "activation": "relu"}]}"#;
        assert!(matches!(load_network(ragged), Err(Error::Shape(_))));
        let biases = r#"{"layers": [{"weights": [[1]], "biases": [0, 1], "activation": "relu"}]}"#;
        assert!(matches!(load_network(biases), Err(Error::Shape(_))));
    }

    #[test]
    fn rejects_non_finite_weights() {
        let layer = Layer::new(vec![vec![f64::NAN]], vec![0.0], Activation::Relu);
        assert!(matches!(layer, Err(Error::NonFinite(_))));
    }

    #[test]
    fn rejects_linear_hidden_layer() {
        let a = Layer::new(vec![vec![1.0]], vec![0.0], Activation::Linear).unwrap();
        let b = Layer::new(vec![vec![1.0]], vec![0.0], Activation::Relu).unwrap();
        assert!(Network::new(vec![a, b]).is_err());
    }

    #[test]
    fn forward_checks_dimension() {
        let net = load_network(CORNER_NET).unwrap();
        assert!(matches!(
            net.forward(&[1.0]),
            Err(Error::Dimension {
                expected: 2,
                got: 1
            })
        ));
    }
}
