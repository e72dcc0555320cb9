//! Incremental maintenance of the uncovered combinations `UC(R)`.
//!
//! Each stored combination `c` canonically represents the atom
//! `a(c) = c ∖ ∪{r ∈ R : c ⊄ r}`; combinations whose atom is empty are
//! covered and never kept. Two update procedures are provided: a simple one
//! that recomputes the inclusion relation from scratch on every insertion,
//! and the incremental one that only touches combinations contained in the
//! new rule set and their parents.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::Zero;
use thiserror::Error;

use crate::par::{self, Exec};
use crate::setrep::{CanonicalKey, Cardinal, Geometry, RuleSet, SetError};
use crate::store::{CombId, Combination, CombinationStore, Hit, RuleId, StoreError};

/// Update procedure used when a rule set is added.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Algorithm {
    /// Incremental update restricted to combinations inside the new set.
    #[default]
    Add,
    /// Full recomputation of the inclusion relation.
    Basic,
}

#[derive(Debug, Error)]
pub enum AtomsError {
    #[error(transparent)]
    Set(#[from] SetError),
    #[error("rule {index} ({text}) does not match the instance geometry")]
    RuleGeometry { index: usize, text: String },
    #[error("internal error: atom size of {0} would become negative")]
    NegativeAtomSize(String),
    #[error("internal error: {0}")]
    Store(#[from] StoreError),
}

/// `UC(R)` for a growing collection `R` of distinct rule sets.
#[derive(Debug, Clone)]
pub struct AtomEngine {
    geometry: Geometry,
    rules: Vec<RuleSet>,
    rule_ids: BTreeMap<CanonicalKey, RuleId>,
    store: CombinationStore,
}

fn subtract(
    store: &mut CombinationStore,
    target: CombId,
    amount: &Cardinal,
) -> Result<(), AtomsError> {
    let c = store.get_mut(target);
    if c.atsize < *amount {
        return Err(AtomsError::NegativeAtomSize(c.set.to_string()));
    }
    c.atsize -= amount;
    Ok(())
}

impl AtomEngine {
    /// Starts from `UC = {H}`.
    pub fn new(geometry: Geometry) -> Self {
        let mut store = CombinationStore::new();
        store
            .insert(Combination::new(geometry.full()))
            .expect("empty store");
        AtomEngine {
            geometry,
            rules: Vec::new(),
            rule_ids: BTreeMap::new(),
            store,
        }
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    /// Distinct rule sets, indexed by [`RuleId`].
    pub fn rules(&self) -> &[RuleSet] {
        &self.rules
    }

    pub fn rule_id(&self, r: &RuleSet) -> Option<RuleId> {
        self.rule_ids.get(r).copied()
    }

    pub fn store(&self) -> &CombinationStore {
        &self.store
    }

    /// Number of atoms `m`.
    pub fn atom_count(&self) -> usize {
        self.store.len()
    }

    /// Mutation hook for negative controls: forgets the first stored
    /// combination, leaving the engine deliberately wrong.
    #[doc(hidden)]
    pub fn corrupt(&mut self) {
        let first = self.store.iter().next().map(|(_, c)| c.set.clone());
        if let Some(set) = first {
            self.store.remove(&set).expect("present");
        }
    }

    /// Adds a rule set to `R`. A set already in `R` is not added twice and
    /// its existing id is returned.
    pub fn add_rule(&mut self, r: RuleSet, algorithm: Algorithm) -> Result<RuleId, AtomsError> {
        if !self.geometry.admits(&r) {
            return Err(AtomsError::RuleGeometry {
                index: self.rules.len(),
                text: r.to_string(),
            });
        }
        if let Some(id) = self.rule_id(&r) {
            return Ok(id);
        }
        let id = self.rules.len();
        self.rules.push(r.clone());
        self.rule_ids.insert(r.into(), id);
        match algorithm {
            Algorithm::Add => self.add(id)?,
            Algorithm::Basic => self.basic_add(id)?,
        }
        log::trace!("added rule {id}: {} atoms", self.store.len());
        Ok(id)
    }

    fn basic_add(&mut self, rid: RuleId) -> Result<(), AtomsError> {
        let r = &self.rules[rid];
        // UC' = UC ∪ {c ∩ r}; the flag marks combinations not previously stored.
        let mut next: BTreeMap<RuleSet, bool> = self
            .store
            .iter()
            .map(|(_, c)| (c.set.clone(), false))
            .collect();
        for (_, c) in self.store.iter() {
            if let Some(meet) = c.set.intersect(r) {
                next.entry(meet).or_insert(true);
            }
        }
        let mut list: Vec<(RuleSet, bool, Cardinal)> = next
            .into_iter()
            .map(|(s, fresh)| {
                let size = s.cardinality();
                (s, fresh, size)
            })
            .collect();
        // stable: canonical order among equal sizes
        list.sort_by(|a, b| a.2.cmp(&b.2));

        let n = list.len();
        let sup: Vec<Vec<usize>> = (0..n)
            .map(|i| {
                (0..n)
                    .filter(|&j| j != i && list[i].0.is_subset(&list[j].0))
                    .collect()
            })
            .collect();
        let mut atsize: Vec<Cardinal> = list.iter().map(|e| e.2.clone()).collect();
        for i in 0..n {
            let amount = atsize[i].clone();
            for &j in &sup[i] {
                if atsize[j] < amount {
                    return Err(AtomsError::NegativeAtomSize(list[j].0.to_string()));
                }
                atsize[j] -= &amount;
            }
        }

        let mut store = CombinationStore::new();
        let mut ids: Vec<Option<CombId>> = vec![None; n];
        for (i, (set, fresh, size)) in list.iter().enumerate() {
            if atsize[i].is_zero() {
                continue;
            }
            let cont = if *fresh {
                (0..self.rules.len())
                    .filter(|&s| set.is_subset(&self.rules[s]))
                    .collect()
            } else {
                let mut cont = self
                    .store
                    .by_set(set)
                    .expect("previous member")
                    .cont
                    .clone();
                if set.is_subset(r) {
                    cont.push(rid);
                }
                cont
            };
            let mut comb = Combination::new(set.clone());
            comb.size = size.clone();
            comb.atsize = atsize[i].clone();
            comb.cont = cont;
            ids[i] = Some(store.insert(comb)?);
        }
        for i in 0..n {
            let Some(id) = ids[i] else { continue };
            store.get_mut(id).sup = sup[i].iter().filter_map(|&j| ids[j]).collect();
        }
        self.store = store;
        Ok(())
    }

    fn add(&mut self, rid: RuleId) -> Result<(), AtomsError> {
        let r = self.rules[rid].clone();
        let store = &mut self.store;
        let mut incl: BTreeMap<RuleSet, CombId> = BTreeMap::new();
        let mut fresh: BTreeSet<CombId> = BTreeSet::new();

        // Parent computation.
        for Hit { id: c, meet } in store.intersect_query(&r) {
            if let Some(&produced) = incl.get(&meet) {
                let parent = store
                    .get(produced)
                    .parent
                    .expect("Incl member has a parent");
                if !store.get(parent).set.is_subset(&store.get(c).set) {
                    store.get_mut(produced).covered = true;
                }
                continue;
            }
            let produced = match store.id_of(&meet) {
                Some(id) => id,
                None => {
                    let mut comb = Combination::new(meet.clone());
                    comb.is_new = true;
                    let id = store.insert(comb)?;
                    fresh.insert(id);
                    id
                }
            };
            let e = store.get_mut(produced);
            e.parent = Some(c);
            e.covered = false;
            incl.insert(meet, produced);
        }
        let covered: Vec<(RuleSet, CombId)> = incl
            .iter()
            .filter(|(_, &id)| store.get(id).covered)
            .map(|(s, &id)| (s.clone(), id))
            .collect();
        for (set, id) in covered {
            debug_assert!(
                fresh.contains(&id),
                "only new combinations can be covered here"
            );
            incl.remove(&set);
            fresh.remove(&id);
            store.remove_id(id);
        }

        // Atom size computation.
        let mut order: Vec<CombId> = incl.values().copied().collect();
        store.sort_by_size(&mut order);
        for &c in &order {
            if store.get(c).atsize.is_zero() {
                continue;
            }
            let amount = store.get(c).atsize.clone();
            if fresh.contains(&c) {
                let parent = store.get(c).parent.expect("new combination has a parent");
                subtract(store, parent, &amount)?;
                let (mut sup, cont) = {
                    let p = store.get(parent);
                    (p.sup.clone(), p.cont.clone())
                };
                sup.insert(parent);
                let e = store.get_mut(c);
                e.sup = sup;
                e.cont = cont;
            }
            let extra: Vec<CombId> = store
                .get(c)
                .sup
                .iter()
                .filter_map(|&d| {
                    let meet = store.get(d).set.intersect(&r)?;
                    let e = *incl.get(&meet)?;
                    (e != c).then_some(e)
                })
                .collect();
            let e = store.get_mut(c);
            e.sup.extend(extra);
            e.cont.push(rid);
            let targets: Vec<CombId> = e
                .sup
                .iter()
                .copied()
                .filter(|d| fresh.contains(d))
                .collect();
            for d in targets {
                subtract(store, d, &amount)?;
            }
        }

        // Remove covered combinations.
        let mut doomed: BTreeSet<CombId> = BTreeSet::new();
        let mut doomed_outside = false;
        for &c in &order {
            let e = store.get(c);
            if e.atsize.is_zero() {
                doomed.insert(c);
            }
            if fresh.contains(&c) {
                let parent = e.parent.expect("new combination has a parent");
                if store.get(parent).atsize.is_zero() {
                    doomed.insert(parent);
                    doomed_outside = true;
                }
            }
        }
        if !doomed.is_empty() {
            // A doomed parent lies outside r and may sit in sup lists of
            // combinations outside Incl as well.
            let sweep: Vec<CombId> = if doomed_outside {
                store.ids()
            } else {
                order.clone()
            };
            for c in sweep {
                if !doomed.contains(&c) {
                    store.get_mut(c).sup.retain(|d| !doomed.contains(d));
                }
            }
            for &c in &doomed {
                store.remove_id(c);
            }
        }
        for &c in &order {
            if store.is_live(c) {
                store.get_mut(c).clear_transients();
            }
        }
        Ok(())
    }

    /// Comparable view of the store: combinations in canonical order with
    /// their atom sizes, containers and strict supersets as set values.
    pub fn snapshot(&self) -> Vec<CombinationView> {
        self.store
            .iter()
            .map(|(_, c)| CombinationView {
                set: c.set.clone(),
                atsize: c.atsize.clone(),
                containers: c.cont.iter().map(|&r| self.rules[r].clone()).collect(),
                sup: c
                    .sup
                    .iter()
                    .map(|&d| self.store.get(d).set.clone())
                    .collect(),
            })
            .collect()
    }

    /// Checks every structural invariant of a completed store.
    pub fn verify(&self) -> Result<(), String> {
        let space = self.geometry.space_size();
        let mut total = Cardinal::zero();
        let all: Vec<(CombId, &Combination)> = self.store.iter().collect();
        let mut seen_cont: BTreeSet<&[RuleId]> = BTreeSet::new();
        for &(id, c) in &all {
            let name = c.set.to_string();
            if c.atsize.is_zero() {
                return Err(format!("{name}: covered combination kept"));
            }
            if c.size != c.set.cardinality() {
                return Err(format!("{name}: stale cached size"));
            }
            if c.parent.is_some() || c.covered || c.is_new {
                return Err(format!("{name}: transient fields not cleared"));
            }
            total += &c.atsize;

            let expected_sup: BTreeSet<CombId> = all
                .iter()
                .filter(|&&(d, dc)| d != id && c.set.is_subset(&dc.set))
                .map(|&(d, _)| d)
                .collect();
            if c.sup != expected_sup {
                return Err(format!(
                    "{name}: sup list is not the set of strict supersets"
                ));
            }

            // |c| = Σ atsize over stored combinations inside c
            let inner: Cardinal = all
                .iter()
                .filter(|(_, e)| e.set.is_subset(&c.set))
                .map(|(_, e)| &e.atsize)
                .sum();
            if inner != c.size {
                return Err(format!(
                    "{name}: |c| = {} but inner atoms sum to {inner}",
                    c.size
                ));
            }

            let expected_cont: Vec<RuleId> = (0..self.rules.len())
                .filter(|&r| c.set.is_subset(&self.rules[r]))
                .collect();
            if c.cont != expected_cont {
                return Err(format!(
                    "{name}: containers {:?}, expected {expected_cont:?}",
                    c.cont
                ));
            }
            let meet = c.cont.iter().try_fold(self.geometry.full(), |acc, &r| {
                acc.intersect(&self.rules[r])
            });
            if meet.as_ref() != Some(&c.set) {
                return Err(format!("{name}: not the intersection of its containers"));
            }
            if !seen_cont.insert(&c.cont) {
                return Err(format!(
                    "{name}: container set shared with another combination"
                ));
            }
        }
        if total != space {
            return Err(format!("atom sizes sum to {total}, expected {space}"));
        }
        Ok(())
    }
}

/// Plain-value view of one stored combination, used for comparisons.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CombinationView {
    pub set: RuleSet,
    pub atsize: Cardinal,
    pub containers: BTreeSet<RuleSet>,
    pub sup: BTreeSet<RuleSet>,
}

/// Builds `UC(R)` by folding the chosen update over the distinct sets of
/// `rules`, in first-occurrence order.
pub fn compute_uc(
    geometry: &Geometry,
    rules: &[RuleSet],
    algorithm: Algorithm,
) -> Result<AtomEngine, AtomsError> {
    if let Some((index, r)) = rules.iter().enumerate().find(|(_, r)| !geometry.admits(r)) {
        return Err(AtomsError::RuleGeometry {
            index,
            text: r.to_string(),
        });
    }
    let mut engine = AtomEngine::new(geometry.clone());
    for r in rules {
        engine.add_rule(r.clone(), algorithm)?;
    }
    Ok(engine)
}

/// Cardinality form of weak completeness: for every pair of stored
/// combinations with a nonempty meet, the atoms of the stored combinations
/// inside the meet add up to its size.
pub fn weak_completeness_check(store: &CombinationStore, exec: Exec) -> bool {
    let all: Vec<(&RuleSet, &Cardinal)> = store.iter().map(|(_, c)| (&c.set, &c.atsize)).collect();
    par::map(exec, &all, |&(c, _)| {
        all.iter().all(|&(d, _)| match c.intersect(d) {
            None => true,
            Some(meet) => {
                let inner: Cardinal = all
                    .iter()
                    .filter(|(e, _)| e.is_subset(&meet))
                    .map(|(_, a)| *a)
                    .sum();
                inner == meet.cardinality()
            }
        })
    })
    .into_iter()
    .all(|ok| ok)
}
