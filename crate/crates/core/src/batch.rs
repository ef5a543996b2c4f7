//! Task batches and processing orders.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;

/// Task lengths `a₁..aₙ` in input order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct TaskBatch {
    lengths: Vec<f64>,
}

impl TryFrom<Vec<f64>> for TaskBatch {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        TaskBatch::new(v)
    }
}

impl From<TaskBatch> for Vec<f64> {
    fn from(b: TaskBatch) -> Self {
        b.lengths
    }
}

impl TaskBatch {
    pub fn new(lengths: Vec<f64>) -> Result<Self> {
        if let Some(bad) = lengths.iter().find(|a| !(a.is_finite() && **a > 0.0)) {
            return Err(Error::Domain(format!("task lengths must be finite and > 0, got {bad}")));
        }
        Ok(TaskBatch { lengths })
    }

    pub fn len(&self) -> usize {
        self.lengths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lengths.is_empty()
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn total(&self) -> f64 {
        self.lengths.iter().sum()
    }

    pub fn max_length(&self) -> f64 {
        self.lengths.iter().copied().fold(0.0, f64::max)
    }

    pub fn min_length(&self) -> f64 {
        self.lengths.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Prefix sums `A_i = a₁ + … + a_i` for `i = 1..n`.
    pub fn prefix_sums(&self) -> Vec<f64> {
        self.lengths
            .iter()
            .scan(0.0, |acc, &a| {
                *acc += a;
                Some(*acc)
            })
            .collect()
    }

    /// `A_{i:j} = Σ_{k=i}^{j} a_k` with 0-based inclusive indices.
    pub fn range_sum(&self, i: usize, j: usize) -> f64 {
        if i > j {
            return 0.0;
        }
        self.lengths[i..=j].iter().sum()
    }

    pub fn is_ascending(&self) -> bool {
        self.lengths.windows(2).all(|w| w[0] <= w[1])
    }

    /// The batch sorted ascending (stable), with the permutation that maps
    /// canonical positions back to input indices.
    pub fn canonical(&self) -> (TaskBatch, Permutation) {
        let perm = Permutation::sorted_by_length(self, false);
        (
            TaskBatch {
                lengths: perm.apply(self),
            },
            perm,
        )
    }

    /// Lengths of the tasks arranged by `perm`.
    pub fn ordered(&self, perm: &Permutation) -> Result<Vec<f64>> {
        perm.check_len(self.len())?;
        Ok(perm.apply(self))
    }
}

/// A processing order: `order[k]` is the (0-based) task processed in position `k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Permutation {
    order: Vec<usize>,
}

impl TryFrom<Vec<usize>> for Permutation {
    type Error = Error;
    fn try_from(v: Vec<usize>) -> Result<Self> {
        Permutation::new(v)
    }
}

impl From<Permutation> for Vec<usize> {
    fn from(p: Permutation) -> Self {
        p.order
    }
}

impl Permutation {
    pub fn new(order: Vec<usize>) -> Result<Self> {
        let n = order.len();
        let mut seen = vec![false; n];
        for &i in &order {
            if i >= n || seen[i] {
                return Err(Error::InvalidPermutation(format!("{order:?} is not a bijection on 0..{n}")));
            }
            seen[i] = true;
        }
        Ok(Permutation { order })
    }

    pub fn identity(n: usize) -> Self {
        Permutation {
            order: (0..n).collect(),
        }
    }

    pub fn reversal(n: usize) -> Self {
        Permutation {
            order: (0..n).rev().collect(),
        }
    }

    /// Ascending (or descending) by length, ties by ascending index.
    pub(crate) fn sorted_by_length(batch: &TaskBatch, descending: bool) -> Self {
        let mut order: Vec<usize> = (0..batch.len()).collect();
        let l = batch.lengths();
        order.sort_by(|&i, &j| {
            let c = l[i].total_cmp(&l[j]);
            if descending {
                c.reverse().then(i.cmp(&j))
            } else {
                c.then(i.cmp(&j))
            }
        });
        Permutation { order }
    }

    /// Parses a 1-based comma-separated list such as `3,1,2`.
    pub fn parse_one_based(s: &str) -> Result<Self> {
        let order = s
            .split(',')
            .map(|x| {
                x.trim()
                    .parse::<usize>()
                    .ok()
                    .and_then(|v| v.checked_sub(1))
                    .ok_or_else(|| Error::InvalidPermutation(format!("bad entry {x:?} in {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Permutation::new(order)
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.order.len()];
        for (pos, &task) in self.order.iter().enumerate() {
            inv[task] = pos;
        }
        Permutation { order: inv }
    }

    /// `self` after `other`: position `k` holds `other.order[self.order[k]]`.
    pub fn compose(&self, other: &Permutation) -> Self {
        Permutation {
            order: self.order.iter().map(|&i| other.order[i]).collect(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.order.iter().enumerate().all(|(k, &i)| k == i)
    }

    pub(crate) fn check_len(&self, n: usize) -> Result<()> {
        if self.order.len() != n {
            return Err(Error::InvalidPermutation(format!(
                "permutation of {} tasks applied to a batch of {n}",
                self.order.len()
            )));
        }
        Ok(())
    }

    pub(crate) fn apply(&self, batch: &TaskBatch) -> Vec<f64> {
        self.order.iter().map(|&i| batch.lengths[i]).collect()
    }

    /// All permutations of `0..n` in lexicographic order.
    pub fn all(n: usize) -> Vec<Permutation> {
        let mut cur: Vec<usize> = (0..n).collect();
        let mut out = vec![Permutation { order: cur.clone() }];
        while next_lexicographic(&mut cur) {
            out.push(Permutation { order: cur.clone() });
        }
        out
    }
}

/// Advances `v` to the next permutation in lexicographic order.
pub(crate) fn next_lexicographic(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

impl fmt::Display for Permutation {
    /// 1-based, e.g. `(2,1,3)`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.order.iter().map(|i| (i + 1).to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}
