//! Line-delimited JSON result records and their aggregation.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{Method, Robustness, VerificationReport};
use crate::bnb::MipStatus;
use crate::error::{Error, Result};

/// Reference method for the root-bound improvement metric.
pub const BASELINE_METHOD: Method = Method::BigMNoCuts;

const TIME_SHIFT: f64 = 10.0;
const GAP_SHIFT: f64 = 1.0;

/// One solve. Non-finite numbers are written as `null`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub instance: String,
    pub method: Method,
    pub status: Robustness,
    pub mip_status: MipStatus,
    pub bound: Option<f64>,
    pub incumbent: Option<f64>,
    pub nodes: usize,
    pub cuts: usize,
    /// Seconds.
    pub time: f64,
    pub root_bound_initial: Option<f64>,
    pub root_bound: Option<f64>,
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

impl ResultRecord {
    pub fn from_report(r: &VerificationReport) -> Self {
        Self {
            instance: r.instance.clone(),
            method: r.method,
            status: r.robust,
            mip_status: r.stats.status,
            bound: finite(r.dual_bound),
            incumbent: r.objective_value,
            nodes: r.stats.node_count,
            cuts: r.stats.cuts_added,
            time: r.stats.wall_time,
            root_bound_initial: finite(r.stats.root_bound_initial),
            root_bound: finite(r.stats.root_bound),
        }
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("record serializes")
    }

    /// Relative gap in percent, if both bound and incumbent exist.
    pub fn gap_percent(&self) -> Option<f64> {
        match (self.bound, self.incumbent) {
            (Some(b), Some(i)) => Some(100.0 * (b - i).abs() / i.abs().max(1.0)),
            _ => None,
        }
    }

    /// The same record with wall time zeroed, for reproducibility checks.
    pub fn without_time(&self) -> Self {
        Self {
            time: 0.0,
            ..self.clone()
        }
    }
}

/// Parses JSON lines, skipping blank lines.
pub fn parse_records(text: &str) -> Result<Vec<ResultRecord>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(k, l)| {
            serde_json::from_str(l).map_err(|e| Error::Parse(format!("line {}: {e}", k + 1)))
        })
        .collect()
}

/// `exp(mean(ln(v + shift))) - shift`.
pub fn shifted_geometric_mean(values: &[f64], shift: f64) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mean = values.iter().map(|v| (v + shift).ln()).sum::<f64>() / values.len() as f64;
    Some(mean.exp() - shift)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: Method,
    pub runs: usize,
    pub optimal: usize,
    pub proven: usize,
    pub falsified: usize,
    pub unknown: usize,
    /// Shifted geometric mean of solve time (shift 10 s).
    pub time_sgm: Option<f64>,
    /// Shifted geometric mean of the gap in percent (shift 1), over runs with an incumbent.
    pub gap_sgm: Option<f64>,
    /// Instances on which this method solved fastest.
    pub wins: usize,
    /// Mean of `(base - this) / base` in percent over root bounds, where the baseline root bound is positive.
    pub root_improvement_percent: Option<f64>,
    pub improvement_instances: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub methods: Vec<MethodSummary>,
}

/// Aggregates records per method in `Method` order.
pub fn summarize(records: &[ResultRecord]) -> Summary {
    let mut by_instance: BTreeMap<&str, Vec<&ResultRecord>> = BTreeMap::new();
    for r in records {
        by_instance.entry(&r.instance).or_default().push(r);
    }

    let mut wins: BTreeMap<Method, usize> = BTreeMap::new();
    let mut improvements: BTreeMap<Method, Vec<f64>> = BTreeMap::new();
    for recs in by_instance.values() {
        let winner = recs
            .iter()
            .filter(|r| r.mip_status == MipStatus::Optimal)
            .min_by(|a, b| {
                a.time
                    .total_cmp(&b.time)
                    .then(a.nodes.cmp(&b.nodes))
                    .then(a.method.cmp(&b.method))
            });
        if let Some(w) = winner {
            *wins.entry(w.method).or_default() += 1;
        }
        let base = recs
            .iter()
            .find(|r| r.method == BASELINE_METHOD)
            .and_then(|r| r.root_bound);
        if let Some(base) = base.filter(|b| *b > 0.0) {
            for r in recs {
                if let Some(other) = r.root_bound {
                    improvements
                        .entry(r.method)
                        .or_default()
                        .push(100.0 * (base - other) / base);
                }
            }
        }
    }

    let mut methods: Vec<Method> = records.iter().map(|r| r.method).collect();
    methods.sort();
    methods.dedup();
    let methods = methods
        .into_iter()
        .map(|m| {
            let rs: Vec<&ResultRecord> = records.iter().filter(|r| r.method == m).collect();
            let count = |s: Robustness| rs.iter().filter(|r| r.status == s).count();
            let times: Vec<f64> = rs.iter().map(|r| r.time).collect();
            let gaps: Vec<f64> = rs.iter().filter_map(|r| r.gap_percent()).collect();
            let imp = improvements.get(&m).cloned().unwrap_or_default();
            MethodSummary {
                method: m,
                runs: rs.len(),
                optimal: rs
                    .iter()
                    .filter(|r| r.mip_status == MipStatus::Optimal)
                    .count(),
                proven: count(Robustness::Proven),
                falsified: count(Robustness::Falsified),
                unknown: count(Robustness::Unknown),
                time_sgm: shifted_geometric_mean(&times, TIME_SHIFT),
                gap_sgm: shifted_geometric_mean(&gaps, GAP_SHIFT),
                wins: wins.get(&m).copied().unwrap_or(0),
                root_improvement_percent: (!imp.is_empty())
                    .then(|| imp.iter().sum::<f64>() / imp.len() as f64),
                improvement_instances: imp.len(),
            }
        })
        .collect();
    Summary { methods }
}

/// Parses JSON lines and aggregates them.
pub fn summarize_records(text: &str) -> Result<Summary> {
    Ok(summarize(&parse_records(text)?))
}

fn opt(v: Option<f64>, digits: usize) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.digits$}"))
}

impl fmt::Display for Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<12} {:>5} {:>7} {:>6} {:>9} {:>7} {:>9} {:>9} {:>5} {:>12}",
            "method",
            "runs",
            "optimal",
            "proven",
            "falsified",
            "unknown",
            "time_sgm",
            "gap_sgm%",
            "wins",
            "root_impr%"
        )?;
        for m in &self.methods {
            writeln!(
                f,
                "{:<12} {:>5} {:>7} {:>6} {:>9} {:>7} {:>9} {:>9} {:>5} {:>12}",
                m.method.tag(),
                m.runs,
                m.optimal,
                m.proven,
                m.falsified,
                m.unknown,
                opt(m.time_sgm, 3),
                opt(m.gap_sgm, 3),
                m.wins,
                opt(m.root_improvement_percent, 2),
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(instance: &str, method: Method, time: f64, root: f64) -> ResultRecord {
        ResultRecord {
            instance: instance.into(),
            method,
            status: Robustness::Proven,
            mip_status: MipStatus::Optimal,
            bound: Some(-0.5),
            incumbent: Some(-1.0),
            nodes: 3,
            cuts: 0,
            time,
            root_bound_initial: Some(root),
            root_bound: Some(root),
        }
    }

    #[test]
    fn shifted_means() {
        assert_eq!(shifted_geometric_mean(&[], 10.0), None);
        let v = shifted_geometric_mean(&[5.0, 5.0], 10.0).unwrap();
        assert!((v - 5.0).abs() < 1e-12);
        // (1 + 1) * (7 + 1) = 16, sqrt = 4, minus shift = 3
        let v = shifted_geometric_mean(&[1.0, 7.0], 1.0).unwrap();
        assert!((v - 3.0).abs() < 1e-12);
    }

    #[test]
    fn improvement_and_wins() {
        let records = vec![
            rec("a", Method::BigMNoCuts, 2.0, 4.0),
            rec("a", Method::BigMPlusCuts, 1.0, 3.0),
            rec("b", Method::BigMNoCuts, 1.0, -1.0),
            rec("b", Method::BigMPlusCuts, 3.0, -2.0),
        ];
        let s = summarize(&records);
        let cuts = s
            .methods
            .iter()
            .find(|m| m.method == Method::BigMPlusCuts)
            .unwrap();
        assert_eq!(cuts.improvement_instances, 1);
        assert!((cuts.root_improvement_percent.unwrap() - 25.0).abs() < 1e-12);
        assert_eq!(cuts.wins, 1);
        let base = s
            .methods
            .iter()
            .find(|m| m.method == Method::BigMNoCuts)
            .unwrap();
        assert_eq!(base.wins, 1);
        assert_eq!(base.root_improvement_percent, Some(0.0));
        assert!((base.gap_sgm.unwrap() - 50.0).abs() < 1e-9);
    }

    #[test]
    fn json_lines_round_trip() {
        let mut r = rec("a", Method::Extended, 0.25, 1.0);
        r.bound = None;
        let text = format!("{}\n\n{}\n", r.to_json_line(), r.to_json_line());
        let parsed = parse_records(&text).unwrap();
        assert_eq!(parsed, vec![r.clone(), r]);
        assert!(parse_records("{").is_err());
    }
}
