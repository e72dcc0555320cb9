//! Brute-force ground truth over the full header space, for small `ℓ`.
//!
//! Headers are integers `h < 2^ℓ`; for wildcards the first letter is the most
//! significant bit, for multi-ranges the first field occupies the most
//! significant bits. Membership is evaluated directly on each header and
//! never goes through the intersection code of [`crate::setrep`].

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigUint;
use thiserror::Error;

use crate::atoms::AtomEngine;
use crate::network::{Action, NetworkInstance, NodeIdx};
use crate::par::{self, Exec};
use crate::setrep::{Geometry, RuleSet, Symbol};
use crate::store::RuleId;

pub const ORACLE_MAX_BITS: usize = 22;

const CHUNK: u64 = 1 << 12;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("header space of {0} bits exceeds the oracle cap of {ORACLE_MAX_BITS} bits")]
    TooLarge(usize),
}

fn check_cap(g: &Geometry) -> Result<(), OracleError> {
    let bits = g.header_bits();
    if bits > ORACLE_MAX_BITS {
        Err(OracleError::TooLarge(bits))
    } else {
        Ok(())
    }
}

/// A predicate compiled for direct header tests.
#[derive(Debug, Clone)]
enum Matcher {
    Mask { care: u64, value: u64 },
    Fields(Vec<(u32, u64, u64, u64)>), // (shift, mask, lo, hi)
}

impl Matcher {
    fn compile(g: &Geometry, s: &RuleSet) -> Self {
        match s {
            RuleSet::Wildcard(w) => {
                let len = w.len();
                let (mut care, mut value) = (0u64, 0u64);
                for (i, sym) in w.symbols().enumerate() {
                    let bit = 1u64 << (len - 1 - i);
                    match sym {
                        Symbol::Star => {}
                        Symbol::Zero => care |= bit,
                        Symbol::One => {
                            care |= bit;
                            value |= bit;
                        }
                    }
                }
                Matcher::Mask { care, value }
            }
            RuleSet::MultiRange(m) => {
                let mut shift = g.header_bits() as u32;
                let fields = m
                    .widths()
                    .iter()
                    .zip(m.ranges())
                    .map(|(&w, &(lo, hi))| {
                        shift -= w;
                        ((shift), (1u64 << w) - 1, lo as u64, hi as u64)
                    })
                    .collect();
                Matcher::Fields(fields)
            }
        }
    }

    fn matches(&self, h: u64) -> bool {
        match self {
            Matcher::Mask { care, value } => h & care == *value,
            Matcher::Fields(fields) => fields.iter().all(|&(shift, mask, lo, hi)| {
                let v = (h >> shift) & mask;
                lo <= v && v <= hi
            }),
        }
    }
}

/// Does header `h` belong to `s`?
pub fn header_matches(g: &Geometry, s: &RuleSet, h: u64) -> bool {
    Matcher::compile(g, s).matches(h)
}

/// Integer value of a singleton set, for `ℓ ≤ 64`.
pub fn header_value(g: &Geometry, singleton: &RuleSet) -> Option<u64> {
    if !singleton.is_singleton() || g.header_bits() > 64 {
        return None;
    }
    let value = match singleton {
        RuleSet::Wildcard(w) => w
            .symbols()
            .fold(0u64, |acc, s| (acc << 1) | u64::from(s == Symbol::One)),
        RuleSet::MultiRange(m) => m
            .widths()
            .iter()
            .zip(m.ranges())
            .fold(0u64, |acc, (&w, &(v, _))| (acc << w) | v as u64),
    };
    Some(value)
}

/// Header classes keyed by their sorted container lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleClasses {
    pub classes: BTreeMap<Vec<RuleId>, Vec<u64>>,
}

impl OracleClasses {
    /// Container list of a header.
    pub fn class_of(&self, h: u64) -> Option<&Vec<RuleId>> {
        self.classes
            .iter()
            .find(|(_, hs)| hs.binary_search(&h).is_ok())
            .map(|(k, _)| k)
    }
}

pub fn oracle_classes(
    g: &Geometry,
    rules: &[RuleSet],
    exec: Exec,
) -> Result<OracleClasses, OracleError> {
    check_cap(g)?;
    let matchers: Vec<Matcher> = rules.iter().map(|r| Matcher::compile(g, r)).collect();
    let parts = par::map_chunks(exec, 0..1u64 << g.header_bits(), CHUNK, |range| {
        let mut part: BTreeMap<Vec<RuleId>, Vec<u64>> = BTreeMap::new();
        for h in range {
            let key: Vec<RuleId> = matchers
                .iter()
                .enumerate()
                .filter(|(_, m)| m.matches(h))
                .map(|(i, _)| i)
                .collect();
            part.entry(key).or_default().push(h);
        }
        part
    });
    let mut classes: BTreeMap<Vec<RuleId>, Vec<u64>> = BTreeMap::new();
    for part in parts {
        for (k, hs) in part {
            classes.entry(k).or_default().extend(hs);
        }
    }
    Ok(OracleClasses { classes })
}

/// Headers whose per-header forwarding graph has a directed cycle.
pub fn oracle_loops(net: &NetworkInstance, exec: Exec) -> Result<BTreeSet<u64>, OracleError> {
    let g = net.geometry();
    check_cap(g)?;
    let tables: Vec<Vec<(Matcher, Action)>> = net
        .nodes()
        .iter()
        .map(|n| {
            n.rules
                .iter()
                .map(|r| (Matcher::compile(g, &r.predicate), r.action))
                .collect()
        })
        .collect();
    let successor = |u: NodeIdx, h: u64| -> Option<NodeIdx> {
        match tables[u].iter().find(|(m, _)| m.matches(h))?.1 {
            Action::Forward(v) => Some(v),
            Action::Drop | Action::Deliver => None,
        }
    };
    let n = tables.len();
    let parts = par::map_chunks(exec, 0..1u64 << g.header_bits(), CHUNK, |range| {
        let mut found = Vec::new();
        for h in range {
            // a walk longer than n steps from any start must revisit a node
            let looping = (0..n).any(|start| {
                let mut u = start;
                for _ in 0..=n {
                    match successor(u, h) {
                        Some(v) => u = v,
                        None => return false,
                    }
                }
                true
            });
            if looping {
                found.push(h);
            }
        }
        found
    });
    Ok(parts.into_iter().flatten().collect())
}

/// Differences between the engine and the oracle on one network.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CrossCheck {
    pub classes_compared: usize,
    pub looping_headers: usize,
    pub class_mismatches: Vec<String>,
    pub loop_mismatches: Vec<String>,
}

impl CrossCheck {
    pub fn is_clean(&self) -> bool {
        self.class_mismatches.is_empty() && self.loop_mismatches.is_empty()
    }
}

/// Compares the engine's classes (container lists and atom sizes) and
/// looping classes against brute force.
pub fn cross_check(
    net: &NetworkInstance,
    engine: &AtomEngine,
    looping: &BTreeSet<Vec<RuleId>>,
    exec: Exec,
) -> Result<CrossCheck, OracleError> {
    let g = net.geometry();
    let oracle = oracle_classes(g, engine.rules(), exec)?;
    let loops = oracle_loops(net, exec)?;
    let mut out = CrossCheck {
        classes_compared: oracle.classes.len(),
        looping_headers: loops.len(),
        ..CrossCheck::default()
    };

    let engine_classes: BTreeMap<&[RuleId], &BigUint> = engine
        .store()
        .iter()
        .map(|(_, c)| (c.cont.as_slice(), &c.atsize))
        .collect();
    for (cont, hs) in &oracle.classes {
        match engine_classes.get(cont.as_slice()) {
            None => out.class_mismatches.push(format!(
                "class {cont:?}: {} headers in oracle, missing in engine",
                hs.len()
            )),
            Some(&a) if *a != BigUint::from(hs.len()) => out.class_mismatches.push(format!(
                "class {cont:?}: engine atom size {a}, oracle {}",
                hs.len()
            )),
            _ => {}
        }
    }
    for (cont, a) in &engine_classes {
        if !oracle.classes.contains_key(*cont) {
            out.class_mismatches.push(format!(
                "class {cont:?}: engine atom size {a}, absent in oracle"
            ));
        }
    }

    for (cont, hs) in &oracle.classes {
        let flagged = looping.contains(cont);
        let in_loop = hs.iter().filter(|h| loops.contains(h)).count();
        if flagged && in_loop != hs.len() {
            out.loop_mismatches.push(format!(
                "class {cont:?}: engine reports a loop, oracle loops on {in_loop} of {} headers",
                hs.len()
            ));
        } else if !flagged && in_loop != 0 {
            out.loop_mismatches.push(format!(
                "class {cont:?}: engine reports no loop, oracle loops on {in_loop} headers"
            ));
        }
    }
    for cont in looping {
        if !oracle.classes.contains_key(cont) {
            out.loop_mismatches.push(format!(
                "class {cont:?}: flagged by engine, absent in oracle"
            ));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{fig2_rules, gen_hsa_hard, hsa_rule_sets};
    use crate::network::ActionSpec;

    #[test]
    fn fig2_classes() {
        let (g, rules) = fig2_rules();
        let oc = oracle_classes(&g, &rules, Exec::Sequential).unwrap();
        let mut groups: Vec<Vec<u64>> = oc.classes.values().cloned().collect();
        groups.sort();
        assert_eq!(
            groups,
            vec![
                vec![0],
                vec![1],
                vec![2, 4],
                vec![3],
                vec![5],
                vec![6],
                vec![7]
            ]
        );
        assert_eq!(oc, oracle_classes(&g, &rules, Exec::Parallel).unwrap());
    }

    #[test]
    fn no_rules_one_class() {
        let g = Geometry::wildcard(6).unwrap();
        let oc = oracle_classes(&g, &[], Exec::Sequential).unwrap();
        assert_eq!(oc.classes.len(), 1);
        assert_eq!(oc.classes[&vec![]].len(), 64);
    }

    #[test]
    fn hsa_classes() {
        let (g, sets) = hsa_rule_sets(4);
        let oc = oracle_classes(&g, &sets, Exec::Sequential).unwrap();
        let mut sizes: Vec<usize> = oc.classes.values().map(Vec::len).collect();
        sizes.sort();
        assert_eq!(sizes, vec![1, 1, 2, 4, 8]);
    }

    #[test]
    fn cap_is_enforced() {
        let g = Geometry::wildcard(23).unwrap();
        assert_eq!(
            oracle_classes(&g, &[], Exec::Sequential).unwrap_err(),
            OracleError::TooLarge(23)
        );
    }

    #[test]
    fn loops_by_simulation() {
        assert!(oracle_loops(&gen_hsa_hard(4), Exec::Sequential)
            .unwrap()
            .is_empty());

        let g = Geometry::wildcard(4).unwrap();
        let mut net = gen_hsa_hard(4);
        net.remove_rules(0, &g.parse("0***").unwrap());
        let got = oracle_loops(&net, Exec::Parallel).unwrap();
        assert_eq!(got, (0..8).collect());

        let p = g.parse("1***").unwrap();
        let quiet = NetworkInstance::new(
            g,
            vec![
                ("a".into(), vec![(p, ActionSpec::Deliver)]),
                ("b".into(), vec![]),
            ],
        )
        .unwrap();
        assert!(oracle_loops(&quiet, Exec::Sequential).unwrap().is_empty());
    }

    #[test]
    fn two_node_cycle() {
        let g = Geometry::wildcard(2).unwrap();
        let p = g.parse("1*").unwrap();
        let net = NetworkInstance::new(
            g.clone(),
            vec![
                (
                    "a".into(),
                    vec![(p.clone(), ActionSpec::Forward("b".into()))],
                ),
                ("b".into(), vec![(p, ActionSpec::Forward("a".into()))]),
            ],
        )
        .unwrap();
        assert_eq!(
            oracle_loops(&net, Exec::Sequential).unwrap(),
            BTreeSet::from([2, 3])
        );
    }

    #[test]
    fn direct_membership() {
        let g = Geometry::multirange(&[2, 3]).unwrap();
        let s = g.parse("[[1,2],[5,5]]").unwrap();
        assert!(header_matches(&g, &s, (1 << 3) | 5));
        assert!(!header_matches(&g, &s, (3 << 3) | 5));
        let w = Geometry::wildcard(3).unwrap();
        assert!(header_matches(&w, &w.parse("1*0").unwrap(), 0b110));
        assert!(!header_matches(&w, &w.parse("1*0").unwrap(), 0b011));
        let one = g.parse("[[2,2],[6,6]]").unwrap();
        assert_eq!(header_value(&g, &one), Some((2 << 3) | 6));
        assert_eq!(header_value(&w, &w.parse("101").unwrap()), Some(5));
        assert_eq!(header_value(&w, &w.parse("1*1").unwrap()), None);
    }
}
