//! Set partitions of the vertex set and enumeration of the proper ones.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest `n` the brute-force partition machinery accepts by default.
pub const DEFAULT_PARTITION_LIMIT: usize = 12;

/// A partition of `{1, ..., n}` into disjoint nonempty blocks.
///
/// Canonical form: blocks ordered by their smallest element, elements sorted
/// within each block.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Partition {
    pub blocks: Vec<Vec<usize>>,
}

impl Partition {
    /// Build from arbitrary blocks, canonicalizing the order.
    pub fn new(mut blocks: Vec<Vec<usize>>) -> Self {
        for b in &mut blocks {
            b.sort_unstable();
        }
        blocks.sort();
        Self { blocks }
    }

    /// From a restricted-growth string: `rgs[i]` is the block id of vertex `i+1`.
    pub(crate) fn from_rgs(rgs: &[usize]) -> Self {
        let p = rgs.iter().copied().max().map_or(0, |m| m + 1);
        let mut blocks = vec![Vec::new(); p];
        for (i, &b) in rgs.iter().enumerate() {
            blocks[b].push(i + 1);
        }
        Self { blocks }
    }

    pub fn size(&self) -> usize {
        self.blocks.len()
    }

    /// Every block intersects the seeker set.
    pub fn is_proper(&self, seekers: &BTreeSet<usize>) -> bool {
        self.blocks.iter().all(|b| b.iter().any(|v| seekers.contains(v)))
    }

    /// Block id of each vertex (1-based vertices).
    pub fn block_of(&self, n: usize) -> Vec<usize> {
        let mut owner = vec![usize::MAX; n + 1];
        for (bi, b) in self.blocks.iter().enumerate() {
            for &v in b {
                owner[v] = bi;
            }
        }
        owner
    }
}

/// Lazily yields every partition of `{1, ..., n}` whose blocks all intersect
/// `seekers`, each exactly once, in restricted-growth-string order.
pub struct ProperPartitions {
    n: usize,
    seekers: BTreeSet<usize>,
    /// `rgs[i]` = block of vertex i+1; rgs[0] == 0 always.
    rgs: Vec<usize>,
    /// running maximum of `rgs[0..=i]`
    max: Vec<usize>,
    done: bool,
}

impl ProperPartitions {
    fn advance(&mut self) -> bool {
        // next restricted growth string: rightmost position that can grow
        let n = self.n;
        let mut i = n - 1;
        loop {
            if i == 0 {
                return false;
            }
            if self.rgs[i] <= self.max[i - 1] {
                break;
            }
            i -= 1;
        }
        self.rgs[i] += 1;
        self.max[i] = self.max[i - 1].max(self.rgs[i]);
        for j in (i + 1)..n {
            self.rgs[j] = 0;
            self.max[j] = self.max[j - 1];
        }
        true
    }

    fn current_proper(&self) -> Option<Partition> {
        let part = Partition::from_rgs(&self.rgs);
        part.is_proper(&self.seekers).then_some(part)
    }
}

impl Iterator for ProperPartitions {
    type Item = Partition;

    fn next(&mut self) -> Option<Partition> {
        while !self.done {
            let item = self.current_proper();
            if !self.advance() {
                self.done = true;
            }
            if item.is_some() {
                return item;
            }
        }
        None
    }
}

/// Stream of all proper partitions of `{1, ..., n}`.
pub fn enumerate_proper_partitions(
    n: usize,
    seekers: &BTreeSet<usize>,
) -> Result<ProperPartitions> {
    enumerate_proper_partitions_with_limit(n, seekers, DEFAULT_PARTITION_LIMIT)
}

pub fn enumerate_proper_partitions_with_limit(
    n: usize,
    seekers: &BTreeSet<usize>,
    limit: usize,
) -> Result<ProperPartitions> {
    if n == 0 {
        return Err(Error::OutOfRange("cannot partition the empty set".into()));
    }
    if n > limit {
        return Err(Error::LimitExceeded(format!(
            "partition enumeration limited to {limit} elements, got {n}"
        )));
    }
    Ok(ProperPartitions {
        n,
        seekers: seekers.clone(),
        rgs: vec![0; n],
        max: vec![0; n],
        done: false,
    })
}
