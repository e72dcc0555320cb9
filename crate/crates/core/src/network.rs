//! Network model and per-header-class forwarding-loop detection.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::atoms::{compute_uc, Algorithm, AtomEngine, AtomsError};
use crate::par::{self, Exec};
use crate::setrep::{CanonicalKey, Cardinal, Geometry, RuleSet};
use crate::store::RuleId;

/// Index of a node in [`NetworkInstance::nodes`] (nodes are sorted by id).
pub type NodeIdx = usize;

/// Witness enumeration stops after this many candidate headers.
pub const WITNESS_CAP: u64 = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Action {
    Forward(NodeIdx),
    Drop,
    Deliver,
}

/// Action as written in an instance, before node ids are resolved.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ActionSpec {
    Forward(String),
    Drop,
    Deliver,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ForwardingRule {
    pub predicate: RuleSet,
    pub action: Action,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub id: String,
    /// Priority order: the first matching rule applies.
    pub rules: Vec<ForwardingRule>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NetworkError {
    #[error("duplicate node id {0:?}")]
    DuplicateNode(String),
    #[error("node {node:?} rule {index}: forward target {target:?} is not a declared node")]
    UnknownTarget {
        node: String,
        index: usize,
        target: String,
    },
    #[error("node {node:?} rule {index}: predicate does not match the instance geometry")]
    Geometry { node: String, index: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkInstance {
    geometry: Geometry,
    nodes: Vec<Node>,
}

impl NetworkInstance {
    /// Validates and resolves a network given as `(node id, table)` pairs.
    pub fn new(
        geometry: Geometry,
        tables: Vec<(String, Vec<(RuleSet, ActionSpec)>)>,
    ) -> Result<Self, NetworkError> {
        let mut ids: BTreeMap<String, NodeIdx> = BTreeMap::new();
        for (id, _) in &tables {
            if ids.insert(id.clone(), 0).is_some() {
                return Err(NetworkError::DuplicateNode(id.clone()));
            }
        }
        for (i, v) in ids.values_mut().enumerate() {
            *v = i;
        }
        let mut tables = tables;
        tables.sort_by(|a, b| a.0.cmp(&b.0));
        let nodes = tables
            .into_iter()
            .map(|(id, table)| {
                let rules = table
                    .into_iter()
                    .enumerate()
                    .map(|(index, (predicate, spec))| {
                        if !geometry.admits(&predicate) {
                            return Err(NetworkError::Geometry {
                                node: id.clone(),
                                index,
                            });
                        }
                        let action = match spec {
                            ActionSpec::Drop => Action::Drop,
                            ActionSpec::Deliver => Action::Deliver,
                            ActionSpec::Forward(target) => match ids.get(&target) {
                                Some(&t) => Action::Forward(t),
                                None => {
                                    return Err(NetworkError::UnknownTarget {
                                        node: id.clone(),
                                        index,
                                        target,
                                    })
                                }
                            },
                        };
                        Ok(ForwardingRule { predicate, action })
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(Node { id, rules })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(NetworkInstance { geometry, nodes })
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node_index(&self, id: &str) -> Option<NodeIdx> {
        self.nodes.binary_search_by(|n| n.id.as_str().cmp(id)).ok()
    }

    /// Drops every rule of `node` whose predicate equals `predicate`;
    /// returns how many were removed.
    pub fn remove_rules(&mut self, node: NodeIdx, predicate: &RuleSet) -> usize {
        let table = &mut self.nodes[node].rules;
        let before = table.len();
        table.retain(|r| r.predicate != *predicate);
        before - table.len()
    }

    /// Tables in the unresolved form accepted by [`NetworkInstance::new`].
    pub fn tables(&self) -> Vec<(String, Vec<(RuleSet, ActionSpec)>)> {
        self.nodes
            .iter()
            .map(|n| {
                let table = n
                    .rules
                    .iter()
                    .map(|r| {
                        let spec = match r.action {
                            Action::Forward(t) => ActionSpec::Forward(self.nodes[t].id.clone()),
                            Action::Drop => ActionSpec::Drop,
                            Action::Deliver => ActionSpec::Deliver,
                        };
                        (r.predicate.clone(), spec)
                    })
                    .collect();
                (n.id.clone(), table)
            })
            .collect()
    }
}

/// One occurrence of a rule set in some forwarding table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IndexEntry {
    pub node: NodeIdx,
    pub position: usize,
    pub action: Action,
}

/// Occurrence lists per distinct rule set, each sorted by node then position.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RuleIndex {
    pub lists: Vec<Vec<IndexEntry>>,
}

/// Deduplicates predicates network-wide. Rule ids follow canonical order.
pub fn build_rule_index(net: &NetworkInstance) -> (Vec<RuleSet>, RuleIndex) {
    let mut by_set: BTreeMap<CanonicalKey, Vec<IndexEntry>> = BTreeMap::new();
    for (node, n) in net.nodes.iter().enumerate() {
        for (position, rule) in n.rules.iter().enumerate() {
            by_set
                .entry(rule.predicate.canonical_key())
                .or_default()
                .push(IndexEntry {
                    node,
                    position,
                    action: rule.action,
                });
        }
    }
    let (sets, lists) = by_set
        .into_iter()
        .map(|(k, list)| (k.set().clone(), list))
        .unzip();
    (sets, RuleIndex { lists })
}

/// Successor of each node for headers whose containers are `containers`:
/// the action of the highest-priority table entry among those rule sets.
pub fn forwarding_graph(
    containers: &[RuleId],
    index: &RuleIndex,
    node_count: usize,
) -> Vec<Option<NodeIdx>> {
    let mut best: Vec<Option<(usize, Action)>> = vec![None; node_count];
    for &r in containers {
        for e in &index.lists[r] {
            match best[e.node] {
                Some((pos, _)) if pos <= e.position => {}
                _ => best[e.node] = Some((e.position, e.action)),
            }
        }
    }
    best.into_iter()
        .map(|b| match b {
            Some((_, Action::Forward(v))) => Some(v),
            _ => None,
        })
        .collect()
}

/// Some directed cycle of a functional graph, found by pointer chasing from
/// each node in index order.
pub fn has_cycle(succ: &[Option<NodeIdx>]) -> Option<Vec<NodeIdx>> {
    let mut stamp = vec![0usize; succ.len()];
    for start in 0..succ.len() {
        if stamp[start] != 0 {
            continue;
        }
        let mark = start + 1;
        let mut u = start;
        loop {
            if stamp[u] == mark {
                let mut cycle = vec![u];
                let mut v = succ[u].expect("on a cycle");
                while v != u {
                    cycle.push(v);
                    v = succ[v].expect("on a cycle");
                }
                return Some(cycle);
            }
            if stamp[u] != 0 {
                break;
            }
            stamp[u] = mark;
            match succ[u] {
                Some(v) => u = v,
                None => break,
            }
        }
    }
    None
}

/// First element of `set` (canonical order, at most `cap` candidates) that
/// lies in none of `non_containers`.
pub fn witness_header(set: &RuleSet, non_containers: &[&RuleSet], cap: u64) -> Option<RuleSet> {
    set.elements()
        .take(usize::try_from(cap).unwrap_or(usize::MAX))
        .find(|h| non_containers.iter().all(|s| !h.is_subset(s)))
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LoopOptions {
    pub algorithm: Algorithm,
    /// Stop at the first looping class in canonical order.
    pub first: bool,
    pub witness: bool,
    pub exec: Exec,
}

/// One header class whose forwarding graph has a cycle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoopEntry {
    pub combination: RuleSet,
    pub containers: Vec<RuleId>,
    pub atom_size: Cardinal,
    pub cycle: Vec<NodeIdx>,
    pub witness: Option<RuleSet>,
}

#[derive(Debug, Clone)]
pub struct LoopReport {
    pub engine: AtomEngine,
    pub index: RuleIndex,
    /// Looping classes in canonical order of their combinations.
    pub loops: Vec<LoopEntry>,
}

pub fn detect_loops(net: &NetworkInstance, opts: &LoopOptions) -> Result<LoopReport, AtomsError> {
    let (sets, index) = build_rule_index(net);
    let engine = compute_uc(net.geometry(), &sets, opts.algorithm)?;
    log::debug!(
        "{} distinct rule sets, {} atoms",
        sets.len(),
        engine.atom_count()
    );
    let classes: Vec<(&RuleSet, &[RuleId], &Cardinal)> = engine
        .store()
        .iter()
        .map(|(_, c)| (&c.set, c.cont.as_slice(), &c.atsize))
        .collect();
    let examine = |&(set, cont, atsize): &(&RuleSet, &[RuleId], &Cardinal)| {
        let succ = forwarding_graph(cont, &index, net.nodes.len());
        let cycle = has_cycle(&succ)?;
        let witness = opts.witness.then(|| {
            let non: Vec<&RuleSet> = (0..sets.len())
                .filter(|r| cont.binary_search(r).is_err())
                .map(|r| &sets[r])
                .collect();
            witness_header(set, &non, WITNESS_CAP)
        });
        Some(LoopEntry {
            combination: set.clone(),
            containers: cont.to_vec(),
            atom_size: atsize.clone(),
            cycle,
            witness: witness.flatten(),
        })
    };
    let loops = if opts.first {
        par::find_map_first(opts.exec, &classes, examine)
            .into_iter()
            .collect()
    } else {
        par::map(opts.exec, &classes, examine)
            .into_iter()
            .flatten()
            .collect()
    };
    drop(classes);
    Ok(LoopReport {
        engine,
        index,
        loops,
    })
}

impl LoopReport {
    pub fn looping_classes(&self) -> BTreeSet<Vec<RuleId>> {
        self.loops.iter().map(|l| l.containers.clone()).collect()
    }
}
