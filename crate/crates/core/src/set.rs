//! Dense state sets over a fixed universe `0..n`.

use std::fmt;

use crate::graph::StateId;

const ABSENT: usize = usize::MAX;

/// A set of state ids drawn from `0..universe`.
///
/// Membership, insertion and removal are O(1). Members are also kept in a
/// packed list so iteration and [`StateSet::clear`] cost O(len) rather than
/// O(universe).
#[derive(Clone)]
pub struct StateSet {
    pos: Vec<usize>,
    members: Vec<StateId>,
}

impl StateSet {
    pub fn new(universe: usize) -> Self {
        StateSet {
            pos: vec![ABSENT; universe],
            members: Vec::new(),
        }
    }

    pub fn full(universe: usize) -> Self {
        StateSet {
            pos: (0..universe).collect(),
            members: (0..universe).collect(),
        }
    }

    pub fn from_iter<I: IntoIterator<Item = StateId>>(universe: usize, items: I) -> Self {
        let mut set = StateSet::new(universe);
        for s in items {
            set.insert(s);
        }
        set
    }

    pub fn universe(&self) -> usize {
        self.pos.len()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    #[inline]
    pub fn contains(&self, s: StateId) -> bool {
        self.pos[s] != ABSENT
    }

    /// Returns `true` if `s` was newly inserted.
    #[inline]
    pub fn insert(&mut self, s: StateId) -> bool {
        if self.pos[s] != ABSENT {
            return false;
        }
        self.pos[s] = self.members.len();
        self.members.push(s);
        true
    }

    /// Returns `true` if `s` was present.
    #[inline]
    pub fn remove(&mut self, s: StateId) -> bool {
        let p = self.pos[s];
        if p == ABSENT {
            return false;
        }
        let last = *self.members.last().expect("non-empty");
        self.members.swap_remove(p);
        if last != s {
            self.pos[last] = p;
        }
        self.pos[s] = ABSENT;
        true
    }

    pub fn clear(&mut self) {
        for &s in &self.members {
            self.pos[s] = ABSENT;
        }
        self.members.clear();
    }

    /// Members in insertion order (perturbed by removals).
    pub fn iter(&self) -> impl Iterator<Item = StateId> + '_ {
        self.members.iter().copied()
    }

    pub fn as_slice(&self) -> &[StateId] {
        &self.members
    }

    pub fn to_sorted_vec(&self) -> Vec<StateId> {
        let mut v = self.members.clone();
        v.sort_unstable();
        v
    }

    pub fn is_subset(&self, other: &StateSet) -> bool {
        self.len() <= other.len() && self.iter().all(|s| other.contains(s))
    }

    pub fn is_disjoint(&self, other: &StateSet) -> bool {
        let (small, large) = if self.len() <= other.len() {
            (self, other)
        } else {
            (other, self)
        };
        small.iter().all(|s| !large.contains(s))
    }

    pub fn union(&self, other: &StateSet) -> StateSet {
        let mut out = self.clone();
        for s in other.iter() {
            out.insert(s);
        }
        out
    }

    pub fn intersection(&self, other: &StateSet) -> StateSet {
        StateSet::from_iter(self.universe(), self.iter().filter(|&s| other.contains(s)))
    }

    pub fn difference(&self, other: &StateSet) -> StateSet {
        StateSet::from_iter(self.universe(), self.iter().filter(|&s| !other.contains(s)))
    }

    pub fn extend<I: IntoIterator<Item = StateId>>(&mut self, items: I) {
        for s in items {
            self.insert(s);
        }
    }
}

impl PartialEq for StateSet {
    fn eq(&self, other: &Self) -> bool {
        self.universe() == other.universe()
            && self.len() == other.len()
            && self.iter().all(|s| other.contains(s))
    }
}

impl Eq for StateSet {}

impl fmt::Debug for StateSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.to_sorted_vec()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn insert_remove_keeps_positions_consistent() {
        let mut s = StateSet::new(8);
        for i in [3, 1, 7, 0] {
            assert!(s.insert(i));
        }
        assert!(!s.insert(3));
        assert!(s.remove(1));
        assert!(!s.remove(1));
        assert_eq!(s.to_sorted_vec(), vec![0, 3, 7]);
        assert!(s.remove(0));
        assert!(s.remove(7));
        assert_eq!(s.to_sorted_vec(), vec![3]);
        s.clear();
        assert!(s.is_empty());
        assert!(!s.contains(3));
    }

    #[test]
    fn equality_ignores_order() {
        let a = StateSet::from_iter(5, [4, 2, 0]);
        let b = StateSet::from_iter(5, [0, 2, 4]);
        assert_eq!(a, b);
        assert_ne!(a, StateSet::from_iter(5, [0, 2]));
    }

    #[test]
    fn set_algebra() {
        let a = StateSet::from_iter(6, [0, 1, 2]);
        let b = StateSet::from_iter(6, [2, 3]);
        assert_eq!(a.union(&b).to_sorted_vec(), vec![0, 1, 2, 3]);
        assert_eq!(a.intersection(&b).to_sorted_vec(), vec![2]);
        assert_eq!(a.difference(&b).to_sorted_vec(), vec![0, 1]);
        assert!(StateSet::from_iter(6, [1]).is_subset(&a));
        assert!(StateSet::from_iter(6, [4, 5]).is_disjoint(&a));
    }
}
