//! Robustness queries: does some input within `epsilon` (infinity norm) of
//! an anchor make the target logit exceed the source logit?
//!
//! The query is encoded as `max logit_target - logit_source` over the clipped
//! box and solved with any of the four method variants. A negative dual bound
//! proves robustness; a positive integral solution that re-evaluates to a
//! positive margin falsifies it.

mod records;

pub use records::{
    parse_records, shifted_geometric_mean, summarize, summarize_records, MethodSummary,
    ResultRecord, Summary, BASELINE_METHOD,
};

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bnb::{solve_mip, BnbConfig, MipResult, MipStatus};
use crate::error::{Error, Result};
use crate::formulation::{assemble_mip, FormulationKind, MipModel, ObjectiveSpec, VarKey};
use crate::nn_model::{Activation, Network};
use crate::relaxation::{InputBox, DEFAULT_WIDENING};
use crate::sampling::{self, ChaCha8Rng};

fn default_domain_lower() -> f64 {
    0.0
}

fn default_domain_upper() -> f64 {
    1.0
}

/// One robustness query. The domain is the same interval in every coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationInstance {
    pub id: String,
    pub anchor: Vec<f64>,
    pub epsilon: f64,
    pub source: usize,
    pub target: usize,
    #[serde(default = "default_domain_lower")]
    pub domain_lower: f64,
    #[serde(default = "default_domain_upper")]
    pub domain_upper: f64,
}

impl VerificationInstance {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serializes")
    }

    pub fn validate(&self, net: &Network) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidInstance(format!("{}: {msg}", self.id)));
        if self.anchor.len() != net.input_dim() {
            return Err(Error::Dimension {
                expected: net.input_dim(),
                got: self.anchor.len(),
            });
        }
        if !self.epsilon.is_finite() || self.epsilon <= 0.0 {
            return bad(format!("epsilon must be positive, got {}", self.epsilon));
        }
        if self.source == self.target {
            return bad("source and target classes coincide".into());
        }
        let classes = net.output_dim();
        if self.source >= classes || self.target >= classes {
            return bad(format!("class index out of range for {classes} outputs"));
        }
        if self.domain_lower.partial_cmp(&self.domain_upper) != Some(std::cmp::Ordering::Less) {
            return bad("empty input domain".into());
        }
        if self
            .anchor
            .iter()
            .any(|&a| !a.is_finite() || a < self.domain_lower || a > self.domain_upper)
        {
            return bad("anchor lies outside the input domain".into());
        }
        let last = net.layers().last().expect("networks are nonempty");
        if last.activation() != Activation::Linear {
            return bad("the output layer must be linear".into());
        }
        Ok(())
    }

    /// `[max(lo, a - eps), min(hi, a + eps)]` without widening.
    pub fn clipped_bounds(&self) -> (Vec<f64>, Vec<f64>) {
        let lower = self
            .anchor
            .iter()
            .map(|a| (a - self.epsilon).max(self.domain_lower))
            .collect();
        let upper = self
            .anchor
            .iter()
            .map(|a| (a + self.epsilon).min(self.domain_upper))
            .collect();
        (lower, upper)
    }

    /// The clipped box, widened where it is degenerate.
    pub fn input_box(&self) -> Result<InputBox> {
        let (lower, upper) = self.clipped_bounds();
        InputBox::widened(lower, upper, DEFAULT_WIDENING)
    }

    /// `logit_target - logit_source` at `x`.
    pub fn margin(&self, net: &Network, x: &[f64]) -> Result<f64> {
        let out = net.forward(x)?;
        Ok(out[self.target] - out[self.source])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "bigm")]
    BigM,
    #[serde(rename = "bigm-nocuts")]
    BigMNoCuts,
    #[serde(rename = "bigm-cuts")]
    BigMPlusCuts,
    #[serde(rename = "extended")]
    Extended,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::BigM,
        Method::BigMNoCuts,
        Method::BigMPlusCuts,
        Method::Extended,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Method::BigM => "bigm",
            Method::BigMNoCuts => "bigm-nocuts",
            Method::BigMPlusCuts => "bigm-cuts",
            Method::Extended => "extended",
        }
    }

    pub fn kind(self) -> FormulationKind {
        match self {
            Method::BigM | Method::BigMNoCuts => FormulationKind::BigM,
            Method::BigMPlusCuts => FormulationKind::BigMPlusCuts,
            Method::Extended => FormulationKind::Extended,
        }
    }

    pub fn uses_cuts(self) -> bool {
        self == Method::BigMPlusCuts
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.tag() == s)
            .ok_or_else(|| Error::Parse(format!("unknown method {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Robustness {
    Proven,
    Falsified,
    Unknown,
}

impl Robustness {
    /// Process exit code for this outcome.
    pub fn exit_code(self) -> i32 {
        match self {
            Robustness::Proven => 0,
            Robustness::Falsified => 1,
            Robustness::Unknown => 2,
        }
    }
}

/// Adversarial objective `max y_target - y_source` on the output layer.
pub fn build_instance_model(
    net: &Network,
    inst: &VerificationInstance,
    kind: FormulationKind,
) -> Result<MipModel> {
    inst.validate(net)?;
    let out_layer = net.layers().len();
    let objective = ObjectiveSpec::maximize(vec![
        (VarKey::output(out_layer, inst.target), 1.0),
        (VarKey::output(out_layer, inst.source), -1.0),
    ]);
    assemble_mip(net, &inst.input_box()?, &objective, kind)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub instance: String,
    pub method: Method,
    pub robust: Robustness,
    pub dual_bound: f64,
    pub objective_value: Option<f64>,
    /// `x - anchor` for the falsifying input.
    pub perturbation: Option<Vec<f64>>,
    /// Forward-evaluated margin at `anchor + perturbation`.
    pub margin: Option<f64>,
    pub stats: MipResult,
}

impl VerificationReport {
    pub fn to_record(&self) -> ResultRecord {
        ResultRecord::from_report(self)
    }
}

/// Solves the query with `method`. The method decides whether cuts run;
/// other limits come from `config`.
pub fn verify(
    net: &Network,
    inst: &VerificationInstance,
    config: &BnbConfig,
    method: Method,
) -> Result<VerificationReport> {
    let model = build_instance_model(net, inst, method.kind())?;
    let cfg = BnbConfig {
        cuts_enabled: method.uses_cuts(),
        ..*config
    };
    let stats = solve_mip(&model, &cfg, model.cut_eligible())?;

    let mut perturbation = None;
    let mut margin = None;
    if let Some(inc) = &stats.incumbent {
        let (lower, upper) = inst.clipped_bounds();
        let x: Vec<f64> = (0..net.input_dim())
            .map(|i| {
                let col = model.col(&VarKey::input(i)).expect("input columns exist");
                inc.x[col].clamp(lower[i], upper[i])
            })
            .collect();
        margin = Some(inst.margin(net, &x)?);
        perturbation = Some(x.iter().zip(&inst.anchor).map(|(v, a)| v - a).collect());
    }

    let falsified =
        stats.incumbent_value().is_some_and(|v| v > 0.0) && margin.is_some_and(|m| m > 0.0);
    let robust = if stats.status != MipStatus::Infeasible && stats.dual_bound < 0.0 {
        Robustness::Proven
    } else if falsified {
        Robustness::Falsified
    } else {
        Robustness::Unknown
    };
    Ok(VerificationReport {
        instance: inst.id.clone(),
        method,
        robust,
        dual_bound: stats.dual_bound,
        objective_value: stats.incumbent_value(),
        perturbation: if robust == Robustness::Falsified {
            perturbation
        } else {
            None
        },
        margin,
        stats,
    })
}

/// Runs every method on every instance, in instance-major order.
pub fn bench(
    net: &Network,
    instances: &[VerificationInstance],
    methods: &[Method],
    config: &BnbConfig,
) -> Result<Vec<VerificationReport>> {
    let mut out = Vec::with_capacity(instances.len() * methods.len());
    for inst in instances {
        for &m in methods {
            out.push(verify(net, inst, config, m)?);
        }
    }
    Ok(out)
}

/// Seeded instances: uniform anchors in the domain, source is the predicted
/// class at the anchor, target is a different class drawn uniformly.
pub fn generate_instances(
    net: &Network,
    count: usize,
    epsilons: &[f64],
    seed: u64,
) -> Result<Vec<VerificationInstance>> {
    if epsilons.is_empty() || net.output_dim() < 2 {
        return Err(Error::InvalidInstance(
            "need at least one radius and two classes".into(),
        ));
    }
    let mut rng = sampling::rng(seed);
    (0..count)
        .map(|k| {
            random_instance(
                &mut rng,
                net,
                epsilons[k % epsilons.len()],
                format!("inst{k:03}"),
            )
        })
        .collect()
}

fn random_instance(
    rng: &mut ChaCha8Rng,
    net: &Network,
    epsilon: f64,
    id: String,
) -> Result<VerificationInstance> {
    let unit = InputBox::cube(net.input_dim(), 0.0, 1.0)?;
    let anchor = sampling::uniform_point(rng, &unit);
    let logits = net.forward(&anchor)?;
    let source = (0..logits.len())
        .max_by(|&a, &b| logits[a].total_cmp(&logits[b]).then(b.cmp(&a)))
        .expect("at least two classes");
    let mut target = rng.random_range(0..logits.len() - 1);
    if target >= source {
        target += 1;
    }
    Ok(VerificationInstance {
        id,
        anchor,
        epsilon,
        source,
        target,
        domain_lower: 0.0,
        domain_upper: 1.0,
    })
}
