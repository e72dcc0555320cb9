//! Keyed collection of combinations.
//!
//! Combinations live in an append-only arena so that `sup` lists can refer to
//! them by [`CombId`]; a canonical-key index provides membership and
//! deterministic iteration.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::setrep::{CanonicalKey, Cardinal, RuleSet};

/// Stable identifier of a distinct rule set.
pub type RuleId = usize;

/// Arena slot of a combination. Never reused within one store.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CombId(usize);

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StoreError {
    #[error("combination {0} is already stored")]
    Duplicate(String),
    #[error("combination {0} is not stored")]
    Missing(String),
}

/// A combination `c` together with the bookkeeping of the incremental
/// atom computation.
#[derive(Debug, Clone)]
pub struct Combination {
    pub set: RuleSet,
    /// Cached `|c|`.
    pub size: Cardinal,
    /// `|a(c)|`, the size of the atom represented by `c`.
    pub atsize: Cardinal,
    /// Stored combinations strictly containing `c`.
    pub sup: BTreeSet<CombId>,
    /// Rules whose sets contain `c`.
    pub cont: Vec<RuleId>,
    pub(crate) parent: Option<CombId>,
    pub(crate) covered: bool,
    pub(crate) is_new: bool,
}

impl Combination {
    pub fn new(set: RuleSet) -> Self {
        let size = set.cardinality();
        Combination {
            atsize: size.clone(),
            size,
            set,
            sup: BTreeSet::new(),
            cont: Vec::new(),
            parent: None,
            covered: false,
            is_new: false,
        }
    }

    pub(crate) fn clear_transients(&mut self) {
        self.parent = None;
        self.covered = false;
        self.is_new = false;
    }
}

/// Result of an intersection query: a stored combination and its meet with
/// the query set.
#[derive(Debug, Clone)]
pub struct Hit {
    pub id: CombId,
    pub meet: RuleSet,
}

#[derive(Debug, Clone, Default)]
pub struct CombinationStore {
    slots: Vec<Option<Combination>>,
    index: BTreeMap<CanonicalKey, CombId>,
}

impl CombinationStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn contains(&self, set: &RuleSet) -> bool {
        self.index.contains_key(set)
    }

    pub fn id_of(&self, set: &RuleSet) -> Option<CombId> {
        self.index.get(set).copied()
    }

    pub fn insert(&mut self, c: Combination) -> Result<CombId, StoreError> {
        if self.index.contains_key(&c.set) {
            return Err(StoreError::Duplicate(c.set.to_string()));
        }
        let id = CombId(self.slots.len());
        self.index.insert(c.set.canonical_key(), id);
        self.slots.push(Some(c));
        Ok(id)
    }

    pub fn remove(&mut self, set: &RuleSet) -> Result<Combination, StoreError> {
        let id = self
            .index
            .remove(set)
            .ok_or_else(|| StoreError::Missing(set.to_string()))?;
        Ok(self.slots[id.0].take().expect("indexed slot is occupied"))
    }

    pub(crate) fn remove_id(&mut self, id: CombId) -> Combination {
        let c = self.slots[id.0].take().expect("removing a vacant slot");
        self.index.remove(&c.set);
        c
    }

    pub fn is_live(&self, id: CombId) -> bool {
        self.slots.get(id.0).is_some_and(Option::is_some)
    }

    /// Panics if `id` was removed.
    pub fn get(&self, id: CombId) -> &Combination {
        self.slots[id.0].as_ref().expect("stale combination id")
    }

    pub fn get_mut(&mut self, id: CombId) -> &mut Combination {
        self.slots[id.0].as_mut().expect("stale combination id")
    }

    pub fn by_set(&self, set: &RuleSet) -> Option<&Combination> {
        self.id_of(set).map(|id| self.get(id))
    }

    /// Live combinations in canonical-key order.
    pub fn iter(&self) -> impl Iterator<Item = (CombId, &Combination)> + '_ {
        self.index.values().map(move |&id| (id, self.get(id)))
    }

    pub fn ids(&self) -> Vec<CombId> {
        self.index.values().copied().collect()
    }

    /// Stored combinations meeting `r`, by non-decreasing cardinality with
    /// ties broken by canonical key. Linear scan.
    pub fn intersect_query(&self, r: &RuleSet) -> Vec<Hit> {
        // canonical-key iteration + stable sort on size gives the tie order
        let mut hits: Vec<Hit> = self
            .iter()
            .filter_map(|(id, c)| c.set.intersect(r).map(|meet| Hit { id, meet }))
            .collect();
        hits.sort_by(|a, b| self.get(a.id).size.cmp(&self.get(b.id).size));
        hits
    }

    /// Sorts ids by non-decreasing cardinality, then canonical key.
    pub fn sort_by_size(&self, ids: &mut [CombId]) {
        ids.sort_by(|&a, &b| {
            let (ca, cb) = (self.get(a), self.get(b));
            ca.size.cmp(&cb.size).then_with(|| ca.set.cmp(&cb.set))
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::setrep::Geometry;

    fn g() -> Geometry {
        Geometry::multirange(&[3]).unwrap()
    }

    fn set(a: u128, b: u128) -> RuleSet {
        g().parse(&format!("[[{a},{b}]]")).unwrap()
    }

    #[test]
    fn membership() {
        let mut s = CombinationStore::new();
        s.insert(Combination::new(set(0, 4))).unwrap();
        assert!(s.contains(&set(0, 4)));
        assert_eq!(s.len(), 1);
        assert_eq!(
            s.insert(Combination::new(set(0, 4))).unwrap_err(),
            StoreError::Duplicate("[[0,4]]".into())
        );
        s.remove(&set(0, 4)).unwrap();
        assert!(!s.contains(&set(0, 4)));
        assert_eq!(s.len(), 0);
        assert!(s.remove(&set(0, 4)).is_err());
    }

    #[test]
    fn ids_are_not_reused() {
        let mut s = CombinationStore::new();
        let a = s.insert(Combination::new(set(0, 4))).unwrap();
        s.remove(&set(0, 4)).unwrap();
        let b = s.insert(Combination::new(set(0, 4))).unwrap();
        assert_ne!(a, b);
        assert!(!s.is_live(a));
        assert!(s.is_live(b));
    }

    #[test]
    fn query_order_and_filter() {
        let mut s = CombinationStore::new();
        for (a, b) in [(0, 7), (2, 6), (0, 4), (2, 5), (1, 4), (2, 4)] {
            s.insert(Combination::new(set(a, b))).unwrap();
        }
        let got: Vec<String> = s
            .intersect_query(&set(3, 3))
            .iter()
            .map(|h| s.get(h.id).set.to_string())
            .collect();
        assert_eq!(
            got,
            ["[[2,4]]", "[[1,4]]", "[[2,5]]", "[[0,4]]", "[[2,6]]", "[[0,7]]"]
        );
        assert_eq!(s.intersect_query(&g().full()).len(), 6);

        let mut t = CombinationStore::new();
        t.insert(Combination::new(set(0, 3))).unwrap();
        assert!(t.intersect_query(&set(4, 7)).is_empty());
    }
}
