//! Blocks and partitions of the state space.
//!
//! The external observer's knowledge after `t` rounds is the set of states
//! sharing the true state's entire price history. Across all states those
//! sets form a partition, and each announcement can only split its blocks.

use crate::error::{Error, Result};
use crate::state::{check_player_count, state_count};

/// A nonempty set of price-indistinguishable states, stored as sorted
/// state bitmasks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    n: u32,
    members: Vec<u32>,
}

impl Block {
    pub fn new(n: u32, mut members: Vec<u32>) -> Result<Self> {
        check_player_count(n)?;
        if members.is_empty() {
            return Err(Error::InvalidArgument("block must be nonempty".into()));
        }
        members.sort_unstable();
        members.dedup();
        if let Some(&last) = members.last() {
            if last as usize >= state_count(n) {
                return Err(Error::InvalidArgument(format!(
                    "block member {last} out of range for {n} players"
                )));
            }
        }
        Ok(Block { n, members })
    }

    /// The whole state space.
    pub fn full(n: u32) -> Result<Self> {
        check_player_count(n)?;
        Ok(Block {
            n,
            members: (0..state_count(n) as u32).collect(),
        })
    }

    pub(crate) fn from_sorted(n: u32, members: Vec<u32>) -> Self {
        debug_assert!(!members.is_empty());
        debug_assert!(members.windows(2).all(|w| w[0] < w[1]));
        Block { n, members }
    }

    pub fn n_players(&self) -> u32 {
        self.n
    }

    pub fn members(&self) -> &[u32] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, state: u32) -> bool {
        self.members.binary_search(&state).is_ok()
    }

    pub fn is_subset_of(&self, other: &Block) -> bool {
        self.members.iter().all(|&s| other.contains(s))
    }
}

/// A partition of all `2^n` states at a given round.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    n: u32,
    round: u32,
    blocks: Vec<Block>,
}

impl Partition {
    /// The round-0 partition: a single block holding every state.
    pub fn trivial(n: u32) -> Result<Self> {
        Ok(Partition {
            n,
            round: 0,
            blocks: vec![Block::full(n)?],
        })
    }

    pub(crate) fn from_blocks(n: u32, round: u32, mut blocks: Vec<Block>) -> Self {
        blocks.sort_by_key(|b| b.members[0]);
        Partition { n, round, blocks }
    }

    pub fn n_players(&self) -> u32 {
        self.n
    }

    pub fn round(&self) -> u32 {
        self.round
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn block_containing(&self, state: u32) -> Option<&Block> {
        self.blocks.iter().find(|b| b.contains(state))
    }

    /// Checks disjoint cover of the full state space.
    pub fn validate(&self) -> Result<()> {
        let size = state_count(self.n);
        let mut seen = vec![false; size];
        for block in &self.blocks {
            if block.n_players() != self.n {
                return Err(Error::InvalidArgument(
                    "block dimension differs from partition".into(),
                ));
            }
            for &s in block.members() {
                if seen[s as usize] {
                    return Err(Error::Validation(format!(
                        "state {s} appears in two blocks"
                    )));
                }
                seen[s as usize] = true;
            }
        }
        if let Some(missing) = seen.iter().position(|covered| !covered) {
            return Err(Error::Validation(format!(
                "state {missing} is not covered by any block"
            )));
        }
        Ok(())
    }

    /// True when every block of `self` lies inside one block of `coarser`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        self.blocks.iter().all(|b| {
            coarser
                .block_containing(b.members()[0])
                .is_some_and(|outer| b.is_subset_of(outer))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn block_construction() {
        let b = Block::new(2, vec![3, 1, 3]).unwrap();
        assert_eq!(b.members(), &[1, 3]);
        assert!(b.contains(3));
        assert!(!b.contains(0));
        assert!(Block::new(2, vec![]).is_err());
        assert!(Block::new(2, vec![4]).is_err());
    }

    #[test]
    fn trivial_partition_covers_everything() {
        let p = Partition::trivial(3).unwrap();
        assert_eq!(p.round(), 0);
        assert_eq!(p.blocks().len(), 1);
        p.validate().unwrap();
        assert!(p.refines(&p));
    }

    #[test]
    fn validate_rejects_overlap_and_gaps() {
        let overlapping = Partition::from_blocks(
            1,
            1,
            vec![
                Block::new(1, vec![0, 1]).unwrap(),
                Block::new(1, vec![1]).unwrap(),
            ],
        );
        assert!(overlapping.validate().is_err());

        let gappy = Partition::from_blocks(1, 1, vec![Block::new(1, vec![0]).unwrap()]);
        assert!(gappy.validate().is_err());
    }

    #[test]
    fn refinement_relation() {
        let coarse = Partition::trivial(2).unwrap();
        let fine = Partition::from_blocks(
            2,
            1,
            vec![
                Block::new(2, vec![0]).unwrap(),
                Block::new(2, vec![1, 2]).unwrap(),
                Block::new(2, vec![3]).unwrap(),
            ],
        );
        assert!(fine.refines(&coarse));
        assert!(!coarse.refines(&fine));
    }
}
