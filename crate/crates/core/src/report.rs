//! Loop report document and its validator.
//!
//! The JSON Schema in `schema/report.schema.json` describes the same format
//! for external consumers; [`validate_report`] is the in-repo check.

use serde::{Deserialize, Serialize};

use crate::metrics::OverlapMetrics;
use crate::network::{LoopReport, NetworkInstance};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportFile {
    pub atoms: usize,
    pub distinct_rules: usize,
    pub k: usize,
    pub k_bar: String,
    #[serde(rename = "K_bar")]
    pub big_k_bar: String,
    pub loops: Vec<LoopRecord>,
    pub elapsed_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoopRecord {
    pub cycle: Vec<String>,
    pub containers: Vec<usize>,
    pub atom_size: String,
    pub witness: Option<String>,
}

pub const UNAVAILABLE: &str = "unavailable";

impl ReportFile {
    pub fn new(
        net: &NetworkInstance,
        report: &LoopReport,
        metrics: &OverlapMetrics,
        elapsed_ms: f64,
    ) -> Self {
        let loops = report
            .loops
            .iter()
            .map(|l| LoopRecord {
                cycle: l.cycle.iter().map(|&u| net.nodes()[u].id.clone()).collect(),
                containers: l.containers.clone(),
                atom_size: l.atom_size.to_string(),
                witness: l.witness.as_ref().map(|w| w.format_header()),
            })
            .collect();
        ReportFile {
            atoms: metrics.m,
            distinct_rules: metrics.n,
            k: metrics.k,
            k_bar: metrics.k_bar.to_string(),
            big_k_bar: metrics
                .big_k_bar
                .map_or_else(|| UNAVAILABLE.to_string(), |r| r.to_string()),
            loops,
            elapsed_ms,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

fn is_decimal(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit()) && (s == "0" || !s.starts_with('0'))
}

fn is_rational(s: &str) -> bool {
    match s.split_once('/') {
        Some((p, q)) => is_decimal(p) && is_decimal(q) && q != "0",
        None => false,
    }
}

/// Parses a report and checks every field against the format.
pub fn validate_report(text: &str) -> Result<ReportFile, String> {
    let r: ReportFile = serde_json::from_str(text).map_err(|e| e.to_string())?;
    if !is_rational(&r.k_bar) {
        return Err(format!("k_bar {:?} is not a p/q rational", r.k_bar));
    }
    if r.big_k_bar != UNAVAILABLE && !is_rational(&r.big_k_bar) {
        return Err(format!(
            "K_bar {:?} is neither p/q nor {UNAVAILABLE:?}",
            r.big_k_bar
        ));
    }
    if !(r.elapsed_ms.is_finite() && r.elapsed_ms >= 0.0) {
        return Err("elapsed_ms must be a nonnegative number".into());
    }
    if r.atoms == 0 {
        return Err("atoms must be at least 1".into());
    }
    for (i, l) in r.loops.iter().enumerate() {
        if l.cycle.is_empty() {
            return Err(format!("loops[{i}].cycle is empty"));
        }
        if !l.containers.windows(2).all(|w| w[0] < w[1]) {
            return Err(format!("loops[{i}].containers not strictly increasing"));
        }
        if l.containers.iter().any(|&c| c >= r.distinct_rules) {
            return Err(format!("loops[{i}].containers refers to an unknown rule"));
        }
        if !is_decimal(&l.atom_size) || l.atom_size == "0" {
            return Err(format!(
                "loops[{i}].atom_size {:?} is not a positive decimal",
                l.atom_size
            ));
        }
    }
    Ok(r)
}
