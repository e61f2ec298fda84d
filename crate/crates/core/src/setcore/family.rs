use std::collections::HashSet;

use super::{GroundParams, KSet};
use crate::error::{Error, Result};

/// A duplicate-free family of k-subsets of `[n]`, kept in canonical
/// (lexicographic) order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Family {
    params: GroundParams,
    members: Vec<KSet>,
}

impl Family {
    /// Validates every member, rejects duplicates and sorts.
    pub fn new(params: GroundParams, mut members: Vec<KSet>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(members.len());
        for &m in &members {
            params.validate(m)?;
            if !seen.insert(m) {
                return Err(Error::param(format!("duplicate member {m}")));
            }
        }
        members.sort_unstable();
        Ok(Family { params, members })
    }

    /// Caller guarantees validity; members are sorted here.
    pub(crate) fn from_valid(params: GroundParams, mut members: Vec<KSet>) -> Self {
        members.sort_unstable();
        debug_assert!(members.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(members.iter().all(|&m| params.validate(m).is_ok()));
        Family { params, members }
    }

    pub fn empty(params: GroundParams) -> Self {
        Family {
            params,
            members: Vec::new(),
        }
    }

    pub fn params(&self) -> GroundParams {
        self.params
    }

    pub fn members(&self) -> &[KSet] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn get(&self, index: usize) -> Option<KSet> {
        self.members.get(index).copied()
    }

    pub fn contains(&self, set: KSet) -> bool {
        self.members.binary_search(&set).is_ok()
    }

    pub fn index_of(&self, set: KSet) -> Option<usize> {
        self.members.binary_search(&set).ok()
    }

    /// `|F_i ∩ F_j|` by member index.
    pub fn intersection_size(&self, i: usize, j: usize) -> u32 {
        self.members[i].intersection_size(self.members[j])
    }

    /// Union of all members.
    pub fn union_of(&self) -> KSet {
        self.members
            .iter()
            .fold(KSet::EMPTY, |acc, &m| acc.union(m))
    }

    /// Members at the given indices, as a new family.
    pub fn subfamily(&self, indices: &[usize]) -> Result<Family> {
        let mut members = Vec::with_capacity(indices.len());
        for &i in indices {
            let m = self.get(i).ok_or_else(|| {
                Error::param(format!(
                    "index {i} out of range for a family of {}",
                    self.len()
                ))
            })?;
            members.push(m);
        }
        Family::new(self.params, members)
    }

    /// Members satisfying `keep`, in canonical order.
    pub fn filter(&self, mut keep: impl FnMut(KSet) -> bool) -> Family {
        Family {
            params: self.params,
            members: self.members.iter().copied().filter(|&m| keep(m)).collect(),
        }
    }

    pub fn into_members(self) -> Vec<KSet> {
        self.members
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(e: &[u32]) -> KSet {
        KSet::from_elements(e)
    }

    #[test]
    fn new_sorts_and_validates() {
        let p = GroundParams::new(5, 2).unwrap();
        let f = Family::new(p, vec![set(&[3, 4]), set(&[1, 5]), set(&[1, 2])]).unwrap();
        assert_eq!(f.members(), &[set(&[1, 2]), set(&[1, 5]), set(&[3, 4])]);
        assert_eq!(f.index_of(set(&[1, 5])), Some(1));
        assert_eq!(f.union_of().to_vec(), vec![1, 2, 3, 4, 5]);

        assert!(Family::new(p, vec![set(&[1, 2]), set(&[1, 2])]).is_err());
        assert!(Family::new(p, vec![set(&[1, 2, 3])]).is_err());
        assert!(Family::new(p, vec![set(&[1, 6])]).is_err());
    }

    #[test]
    fn subfamily_checks_indices() {
        let p = GroundParams::new(4, 2).unwrap();
        let f = Family::new(p, vec![set(&[1, 2]), set(&[3, 4])]).unwrap();
        assert_eq!(f.subfamily(&[1]).unwrap().members(), &[set(&[3, 4])]);
        assert!(f.subfamily(&[2]).is_err());
        assert!(f.subfamily(&[0, 0]).is_err());
    }
}
