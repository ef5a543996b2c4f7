//! Candidate sequences: SPT, LPT, their precedence-constrained variants and
//! brute-force search under an arbitrary makespan evaluator.

use crate::batch::{next_lexicographic, Permutation, TaskBatch};
use crate::error::{Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Largest number of feasible orders a scan will visit (`10!`).
pub const MAX_SCAN: u128 = 3_628_800;
/// Scans up to this size keep every evaluated value (`8!`).
pub const KEEP_ALL_LIMIT: u128 = 40_320;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SortOrder {
    Spt,
    Lpt,
}

/// Shortest first; ties by ascending index.
pub fn spt(batch: &TaskBatch) -> Permutation {
    Permutation::sorted_by_length(batch, false)
}

/// Longest first; ties by ascending index.
pub fn lpt(batch: &TaskBatch) -> Permutation {
    Permutation::sorted_by_length(batch, true)
}

/// Tasks pinned to processing slots; every other task is free.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PrecedenceSpec {
    /// `(task, slot)` pairs, both 0-based.
    pub fixed: Vec<(usize, usize)>,
}

impl PrecedenceSpec {
    pub fn all_free() -> Self {
        PrecedenceSpec::default()
    }

    pub fn new(fixed: Vec<(usize, usize)>) -> Self {
        PrecedenceSpec { fixed }
    }

    /// Checks the pairs against a batch of `n` tasks and returns the free
    /// tasks and free slots, both ascending.
    pub fn split(&self, n: usize) -> Result<(Vec<usize>, Vec<usize>)> {
        let mut task_used = vec![false; n];
        let mut slot_used = vec![false; n];
        for &(task, slot) in &self.fixed {
            if task >= n || slot >= n {
                return Err(Error::Config(format!("fixed pair (task {task}, slot {slot}) out of range for {n} tasks")));
            }
            if task_used[task] || slot_used[slot] {
                return Err(Error::Config(format!("task {task} or slot {slot} fixed twice")));
            }
            task_used[task] = true;
            slot_used[slot] = true;
        }
        let free_tasks = (0..n).filter(|&i| !task_used[i]).collect();
        let free_slots = (0..n).filter(|&i| !slot_used[i]).collect();
        Ok((free_tasks, free_slots))
    }

    fn place(&self, n: usize, free_slots: &[usize], arrangement: &[usize]) -> Vec<usize> {
        let mut order = vec![0; n];
        for &(task, slot) in &self.fixed {
            order[slot] = task;
        }
        for (&slot, &task) in free_slots.iter().zip(arrangement) {
            order[slot] = task;
        }
        order
    }
}

/// Free tasks in SPT (or LPT) order across the free slots; pinned tasks stay.
pub fn relative_sort(batch: &TaskBatch, spec: &PrecedenceSpec, order: SortOrder) -> Result<Permutation> {
    let n = batch.len();
    let (mut free, slots) = spec.split(n)?;
    let l = batch.lengths();
    free.sort_by(|&i, &j| {
        let c = l[i].total_cmp(&l[j]);
        match order {
            SortOrder::Spt => c.then(i.cmp(&j)),
            SortOrder::Lpt => c.reverse().then(i.cmp(&j)),
        }
    });
    Permutation::new(spec.place(n, &slots, &free))
}

fn factorial(m: usize) -> u128 {
    (1..=m as u128).product()
}

/// Result of a brute-force scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExhaustiveResult {
    pub best: Permutation,
    pub best_value: f64,
    pub worst: Permutation,
    pub worst_value: f64,
    pub count: u128,
    /// Every `(order, value)` in lexicographic order, kept for scans of at
    /// most [`KEEP_ALL_LIMIT`] orders.
    pub values: Vec<(Permutation, f64)>,
}

/// Extremes of a scan: `(order, value)` pairs.
pub(crate) struct Extremes {
    pub(crate) best: (Vec<usize>, f64),
    pub(crate) worst: (Vec<usize>, f64),
    pub(crate) values: Vec<(Vec<usize>, f64)>,
}

impl Extremes {
    /// Later chunks only win on strictly better values, so ties keep the
    /// lexicographically first order.
    fn merge(mut self, other: Extremes) -> Extremes {
        if other.best.1 < self.best.1 {
            self.best = other.best;
        }
        if other.worst.1 > self.worst.1 {
            self.worst = other.worst;
        }
        self.values.extend(other.values);
        self
    }
}

/// Visits every feasible order (lexicographically) and evaluates it.
/// `NaN` values are rejected.
pub(crate) fn scan<F>(n: usize, spec: &PrecedenceSpec, keep_all: bool, eval: F) -> Result<(Extremes, u128)>
where
    F: Fn(&[usize]) -> Result<f64> + Sync,
{
    let (free, slots) = spec.split(n)?;
    let m = free.len();
    let count = factorial(m);
    if count > MAX_SCAN {
        return Err(Error::TooManyPermutations {
            count,
            limit: MAX_SCAN,
        });
    }
    let keep = keep_all && count <= KEEP_ALL_LIMIT;
    let chunk = |lead: usize| -> Result<Extremes> {
        let mut arrangement: Vec<usize> = Vec::with_capacity(m);
        if m > 0 {
            arrangement.push(free[lead]);
            arrangement.extend(free.iter().copied().filter(|&t| t != free[lead]));
        }
        let mut ext: Option<Extremes> = None;
        loop {
            let order = spec.place(n, &slots, &arrangement);
            let v = eval(&order)?;
            if v.is_nan() {
                return Err(Error::Domain(format!("evaluator returned NaN for {order:?}")));
            }
            match ext.as_mut() {
                None => {
                    ext = Some(Extremes {
                        best: (order.clone(), v),
                        worst: (order.clone(), v),
                        values: if keep { vec![(order, v)] } else { Vec::new() },
                    })
                }
                Some(e) => {
                    if v < e.best.1 {
                        e.best = (order.clone(), v);
                    }
                    if v > e.worst.1 {
                        e.worst = (order.clone(), v);
                    }
                    if keep {
                        e.values.push((order, v));
                    }
                }
            }
            if m == 0 || !next_lexicographic(&mut arrangement[1..]) {
                break;
            }
        }
        Ok(ext.expect("at least one order per chunk"))
    };
    let leads = m.max(1);
    let parts: Vec<Result<Extremes>> = (0..leads).into_par_iter().map(chunk).collect();
    let mut acc: Option<Extremes> = None;
    for p in parts {
        let p = p?;
        acc = Some(match acc {
            None => p,
            Some(a) => a.merge(p),
        });
    }
    Ok((acc.expect("non-empty scan"), count))
}

/// Brute-force argmin of `evaluator` over all orders allowed by `spec`
/// (all orders when `None`). Ties go to the lexicographically first order.
pub fn best_sequence_exhaustive<F>(batch: &TaskBatch, spec: Option<&PrecedenceSpec>, evaluator: F) -> Result<ExhaustiveResult>
where
    F: Fn(&Permutation) -> Result<f64> + Sync,
{
    let free = PrecedenceSpec::all_free();
    let spec = spec.unwrap_or(&free);
    let (ext, count) = scan(batch.len(), spec, true, |order| {
        evaluator(&Permutation::new(order.to_vec())?)
    })?;
    let perm = |v: Vec<usize>| Permutation::new(v).expect("scan yields bijections");
    Ok(ExhaustiveResult {
        best: perm(ext.best.0),
        best_value: ext.best.1,
        worst: perm(ext.worst.0),
        worst_value: ext.worst.1,
        count,
        values: ext.values.into_iter().map(|(o, v)| (perm(o), v)).collect(),
    })
}
