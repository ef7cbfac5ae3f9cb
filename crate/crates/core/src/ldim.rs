//! Exact Littlestone dimension over a class's finite domain.
//!
//! `Ldim(V) = 0` when no domain point splits `V`; otherwise it is the maximum over
//! splitting points `x` of `1 + min(Ldim(V|x=0), Ldim(V|x=1))`. Values are memoized
//! on the member bitset.

use std::collections::HashMap;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypothesis::{FiniteHypothesisClass, Instance, Label, VersionSpace};

/// Witnesses are only extracted for member sets up to this size.
pub const DEFAULT_WITNESS_CAP: usize = 20;

const MEMO_LIMIT: usize = 1 << 20;

/// A complete binary tree of instances in heap order: node `1` is the root and
/// node `i` has children `2i` (label 0) and `2i + 1` (label 1). `nodes[i - 1]`
/// holds node `i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShatteredTree {
    depth: u32,
    nodes: Vec<Instance>,
}

impl ShatteredTree {
    pub fn new(depth: u32, nodes: Vec<Instance>) -> Result<Self> {
        let expected = (1usize << depth) - 1;
        if nodes.len() != expected {
            return Err(Error::InvalidClass(format!(
                "tree of depth {depth} needs {expected} nodes, got {}",
                nodes.len()
            )));
        }
        Ok(ShatteredTree { depth, nodes })
    }

    pub fn empty() -> Self {
        ShatteredTree {
            depth: 0,
            nodes: Vec::new(),
        }
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn nodes(&self) -> &[Instance] {
        &self.nodes
    }

    /// Instances visited along the root-to-leaf path of `labels`.
    pub fn path(&self, labels: &[Label]) -> Vec<Instance> {
        let mut node = 1usize;
        labels
            .iter()
            .map(|y| {
                let x = self.nodes[node - 1];
                node = 2 * node + y.bit() as usize;
                x
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LdimResult {
    pub value: u32,
    pub witness: Option<ShatteredTree>,
}

/// Memoizing Ldim evaluator bound to one class. Each caller owns its own solver.
#[derive(Debug)]
pub struct LdimSolver<'a> {
    class: &'a FiniteHypothesisClass,
    memo: HashMap<FixedBitSet, u32>,
}

impl<'a> LdimSolver<'a> {
    pub fn new(class: &'a FiniteHypothesisClass) -> Self {
        LdimSolver {
            class,
            memo: HashMap::new(),
        }
    }

    pub fn cached(&self) -> usize {
        self.memo.len()
    }

    pub fn value(&mut self, members: &VersionSpace) -> Result<u32> {
        if members.is_empty() {
            return Err(Error::EmptyVersionSpace);
        }
        Ok(self.solve(members.bits()))
    }

    /// Ldim of a possibly empty member set, with the empty set mapped to -1.
    pub fn value_or_neg(&mut self, members: &VersionSpace) -> i64 {
        if members.is_empty() {
            -1
        } else {
            self.solve(members.bits()) as i64
        }
    }

    fn solve(&mut self, set: &FixedBitSet) -> u32 {
        let size = set.count_ones(..);
        if size <= 1 {
            return 0;
        }
        if let Some(&v) = self.memo.get(set) {
            return v;
        }
        let upper = floor_log2(size);

        // Splitting points ordered by the best value they could possibly reach.
        let mut candidates: Vec<(u32, usize)> = (0..self.class.domain().len())
            .filter_map(|j| {
                let ones = set.intersection_count(self.class.column(j));
                let zeros = size - ones;
                (ones > 0 && zeros > 0).then(|| (1 + floor_log2(ones.min(zeros)), j))
            })
            .collect();
        candidates.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));

        let mut best = 0;
        for (reach, j) in candidates {
            if reach <= best {
                break;
            }
            let (zero, one) = VersionSpace::from_bits(set.clone()).split_by(self.class.column(j));
            let (small, large) = if zero.len() <= one.len() {
                (zero, one)
            } else {
                (one, zero)
            };
            let first = self.solve(small.bits());
            if first < best {
                continue;
            }
            let second = self.solve(large.bits());
            best = best.max(1 + first.min(second));
            if best == upper {
                break;
            }
        }

        if self.memo.len() >= MEMO_LIMIT {
            self.memo.clear();
        }
        self.memo.insert(set.clone(), best);
        best
    }

    /// A shattered tree of depth exactly `Ldim(members)`. At every node the
    /// lowest-indexed domain point that keeps the required depth is used.
    pub fn witness(&mut self, members: &VersionSpace) -> Result<ShatteredTree> {
        let value = self.value(members)?;
        let levels = self.build(members, value);
        Ok(ShatteredTree {
            depth: value,
            nodes: levels.into_iter().flatten().collect(),
        })
    }

    // Levels of a depth-`depth` tree shattered by `members` (requires Ldim >= depth).
    fn build(&mut self, members: &VersionSpace, depth: u32) -> Vec<Vec<Instance>> {
        if depth == 0 {
            return Vec::new();
        }
        let domain = self.class.domain().to_vec();
        for (j, &x) in domain.iter().enumerate() {
            let (zero, one) = members.split_by(self.class.column(j));
            if zero.is_empty() || one.is_empty() {
                continue;
            }
            if self.solve(zero.bits()) + 1 < depth || self.solve(one.bits()) + 1 < depth {
                continue;
            }
            let left = self.build(&zero, depth - 1);
            let right = self.build(&one, depth - 1);
            let mut levels = vec![vec![x]];
            for (l, r) in left.into_iter().zip(right) {
                levels.push(l.into_iter().chain(r).collect());
            }
            return levels;
        }
        unreachable!("member set has Ldim below the requested depth {depth}")
    }
}

fn floor_log2(n: usize) -> u32 {
    debug_assert!(n > 0);
    usize::BITS - 1 - n.leading_zeros()
}

/// Ldim of `members`, with a witness when the member set is small enough.
pub fn ldim(class: &FiniteHypothesisClass, members: &VersionSpace) -> Result<LdimResult> {
    ldim_with_cap(class, members, DEFAULT_WITNESS_CAP)
}

pub fn ldim_with_cap(
    class: &FiniteHypothesisClass,
    members: &VersionSpace,
    witness_cap: usize,
) -> Result<LdimResult> {
    let mut solver = LdimSolver::new(class);
    let value = solver.value(members)?;
    let witness = if members.len() <= witness_cap {
        Some(solver.witness(members)?)
    } else {
        None
    };
    Ok(LdimResult { value, witness })
}

/// True iff every one of the `2^depth` root-to-leaf labelings of `tree` is
/// realized by some member hypothesis. Nodes outside the domain make it false.
pub fn ldim_witness_check(
    class: &FiniteHypothesisClass,
    members: &VersionSpace,
    tree: &ShatteredTree,
) -> bool {
    let depth = tree.depth() as usize;
    (0u64..1 << depth).all(|mask| {
        let labels: Vec<Label> = (0..depth)
            .map(|t| Label::from(mask >> (depth - 1 - t) & 1 == 1))
            .collect();
        let mut space = members.clone();
        for (x, &y) in tree.path(&labels).into_iter().zip(&labels) {
            match space.restrict(class, x, y) {
                Ok(next) => space = next,
                Err(_) => return false,
            }
        }
        !space.is_empty()
    })
}
