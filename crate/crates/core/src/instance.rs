//! JSON instance files.
//!
//! ```json
//! {"kind": "wildcard", "header_bits": 4,
//!  "nodes": [{"id": "n0", "rules": [
//!     {"match": "110*", "action": {"type": "drop"}},
//!     {"match": "****", "action": {"type": "forward", "to": "n0"}}]}]}
//! ```
//!
//! Multi-range instances declare `"field_widths": [w1, …]` instead of
//! `header_bits` and write each match as `[[a1, b1], …]`.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::{Number, Value};

use crate::network::{ActionSpec, NetworkInstance};
use crate::setrep::{Geometry, MultiRange, RuleSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KindTag {
    Wildcard,
    Multirange,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub kind: KindTag,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub header_bits: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field_widths: Option<Vec<u32>>,
    pub nodes: Vec<NodeFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeFile {
    pub id: String,
    pub rules: Vec<RuleFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleFile {
    #[serde(rename = "match")]
    pub matches: Value,
    pub action: ActionFile,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum ActionFile {
    Drop,
    Deliver,
    Forward { to: String },
}

/// Invalid instance input, located by a JSON path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InputError {
    pub path: String,
    pub message: String,
}

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

impl std::error::Error for InputError {}

fn input_err(path: impl Into<String>, message: impl fmt::Display) -> InputError {
    InputError {
        path: path.into(),
        message: message.to_string(),
    }
}

fn parse_match(g: &Geometry, value: &Value, path: &str) -> Result<RuleSet, InputError> {
    match (g, value) {
        (Geometry::Wildcard { .. }, Value::String(text)) => {
            g.parse(text).map_err(|e| input_err(path, e))
        }
        (Geometry::MultiRange { widths }, Value::Array(fields)) => {
            let mut ranges = Vec::with_capacity(fields.len());
            for (i, f) in fields.iter().enumerate() {
                let pair = f
                    .as_array()
                    .filter(|p| p.len() == 2)
                    .ok_or_else(|| input_err(format!("{path}[{i}]"), "expected [low, high]"))?;
                let mut bounds = [0u128; 2];
                for (j, v) in pair.iter().enumerate() {
                    bounds[j] = v.as_number().and_then(Number::as_u128).ok_or_else(|| {
                        input_err(
                            format!("{path}[{i}][{j}]"),
                            "expected a nonnegative integer",
                        )
                    })?;
                }
                ranges.push((bounds[0], bounds[1]));
            }
            MultiRange::new(widths.clone(), ranges)
                .map(RuleSet::MultiRange)
                .map_err(|e| input_err(path, e))
        }
        (Geometry::Wildcard { .. }, _) => Err(input_err(path, "expected a wildcard string")),
        (Geometry::MultiRange { .. }, _) => Err(input_err(path, "expected an array of ranges")),
    }
}

impl InstanceFile {
    pub fn geometry(&self) -> Result<Geometry, InputError> {
        match self.kind {
            KindTag::Wildcard => {
                let bits = self
                    .header_bits
                    .ok_or_else(|| input_err("header_bits", "required for wildcard instances"))?;
                if self.field_widths.is_some() {
                    return Err(input_err(
                        "field_widths",
                        "not allowed for wildcard instances",
                    ));
                }
                Geometry::wildcard(bits).map_err(|e| input_err("header_bits", e))
            }
            KindTag::Multirange => {
                let widths = self.field_widths.as_ref().ok_or_else(|| {
                    input_err("field_widths", "required for multirange instances")
                })?;
                if self.header_bits.is_some() {
                    return Err(input_err(
                        "header_bits",
                        "not allowed for multirange instances",
                    ));
                }
                Geometry::multirange(widths).map_err(|e| input_err("field_widths", e))
            }
        }
    }

    pub fn to_network(&self) -> Result<NetworkInstance, InputError> {
        let g = self.geometry()?;
        let mut ids = BTreeSet::new();
        for (i, n) in self.nodes.iter().enumerate() {
            if !ids.insert(n.id.as_str()) {
                return Err(input_err(
                    format!("nodes[{i}].id"),
                    format!("duplicate node id {:?}", n.id),
                ));
            }
        }
        let mut tables = Vec::with_capacity(self.nodes.len());
        for (i, n) in self.nodes.iter().enumerate() {
            let mut table = Vec::with_capacity(n.rules.len());
            for (j, r) in n.rules.iter().enumerate() {
                let path = format!("nodes[{i}].rules[{j}]");
                let set = parse_match(&g, &r.matches, &format!("{path}.match"))?;
                let action = match &r.action {
                    ActionFile::Drop => ActionSpec::Drop,
                    ActionFile::Deliver => ActionSpec::Deliver,
                    ActionFile::Forward { to } => {
                        if !ids.contains(to.as_str()) {
                            return Err(input_err(
                                format!("{path}.action.to"),
                                format!("unknown node {to:?}"),
                            ));
                        }
                        ActionSpec::Forward(to.clone())
                    }
                };
                table.push((set, action));
            }
            tables.push((n.id.clone(), table));
        }
        NetworkInstance::new(g, tables).map_err(|e| input_err("nodes", e))
    }

    pub fn from_network(net: &NetworkInstance) -> Self {
        let (kind, header_bits, field_widths) = match net.geometry() {
            Geometry::Wildcard { bits } => (KindTag::Wildcard, Some(*bits), None),
            Geometry::MultiRange { widths } => (KindTag::Multirange, None, Some(widths.to_vec())),
        };
        let nodes = net
            .tables()
            .into_iter()
            .map(|(id, table)| NodeFile {
                id,
                rules: table
                    .into_iter()
                    .map(|(set, action)| RuleFile {
                        matches: match_value(&set),
                        action: match action {
                            ActionSpec::Drop => ActionFile::Drop,
                            ActionSpec::Deliver => ActionFile::Deliver,
                            ActionSpec::Forward(to) => ActionFile::Forward { to },
                        },
                    })
                    .collect(),
            })
            .collect();
        InstanceFile {
            kind,
            header_bits,
            field_widths,
            nodes,
        }
    }
}

fn match_value(set: &RuleSet) -> Value {
    match set {
        RuleSet::Wildcard(_) => Value::String(set.to_string()),
        RuleSet::MultiRange(m) => Value::Array(
            m.ranges()
                .iter()
                .map(|&(a, b)| {
                    Value::Array(vec![
                        Value::Number(Number::from_u128(a).expect("u128 fits")),
                        Value::Number(Number::from_u128(b).expect("u128 fits")),
                    ])
                })
                .collect(),
        ),
    }
}

/// Parses and validates an instance document.
pub fn parse_instance(text: &str) -> Result<NetworkInstance, InputError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let file: InstanceFile = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        input_err(path, e.into_inner())
    })?;
    file.to_network()
}

pub fn write_instance(net: &NetworkInstance) -> String {
    let mut out = serde_json::to_string_pretty(&InstanceFile::from_network(net))
        .expect("instance serializes");
    out.push('\n');
    out
}
