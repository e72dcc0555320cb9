//! Overlapping-degree metrics of a rule-set collection.

use std::collections::BTreeSet;
use std::fmt;

use num_rational::Ratio;

use crate::atoms::AtomEngine;
use crate::par::{self, Exec};
use crate::setrep::RuleSet;

/// Atoms with more containers than this make `K̄` unavailable.
pub const CONTAINER_GATE: usize = 20;

/// Exact nonnegative rational, always rendered as `p/q` in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Rational(pub Ratio<u64>);

impl Rational {
    pub fn new(numer: u64, denom: u64) -> Self {
        Rational(Ratio::new(numer, denom))
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OverlapMetrics {
    /// Maximum number of containers of an atom.
    pub k: usize,
    /// Average number of containers per atom.
    pub k_bar: Rational,
    /// Average number of combinations containing an atom; `None` past the gate.
    pub big_k_bar: Option<Rational>,
    /// Number of atoms.
    pub m: usize,
    /// Number of distinct rule sets.
    pub n: usize,
}

/// Number of distinct intersections `∩S` over `S ⊆ containers`, `∩∅ = H`.
fn combinations_above(h: &RuleSet, containers: &[&RuleSet]) -> usize {
    let mut closure: BTreeSet<RuleSet> = BTreeSet::from([h.clone()]);
    for &r in containers {
        let grown: Vec<RuleSet> = closure
            .iter()
            .map(|c| c.intersect(r).expect("containers of one atom always meet"))
            .collect();
        closure.extend(grown);
    }
    closure.len()
}

pub fn metrics(engine: &AtomEngine, exec: Exec) -> OverlapMetrics {
    let store = engine.store();
    let conts: Vec<&[usize]> = store.iter().map(|(_, c)| c.cont.as_slice()).collect();
    let m = conts.len();
    let k = conts.iter().map(|c| c.len()).max().unwrap_or(0);
    let total: usize = conts.iter().map(|c| c.len()).sum();
    let big_k_bar = (k <= CONTAINER_GATE).then(|| {
        let h = engine.geometry().full();
        let rules = engine.rules();
        let counts = par::map(exec, &conts, |cont| {
            let sets: Vec<&RuleSet> = cont.iter().map(|&r| &rules[r]).collect();
            combinations_above(&h, &sets) as u64
        });
        Rational::new(counts.iter().sum(), m as u64)
    });
    OverlapMetrics {
        k,
        k_bar: Rational::new(total as u64, m as u64),
        big_k_bar,
        m,
        n: engine.rules().len(),
    }
}
