//! Monte Carlo simulation of the preempt-repeat makespan.
//!
//! Tasks run in permutation order. A disruption during a task wipes its
//! progress and the task restarts at the disruption epoch; repair takes no
//! time. The single-failure variant lets only the first disruption act.

use crate::batch::{Permutation, TaskBatch};
use crate::error::{Error, Result};
use crate::rate_model::RateModel;
use crate::sampler::{ArrivalSource, LazyPath, RngStream, SamplingMethod};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub const DEFAULT_RESTART_CAP: u64 = 1_000_000;

/// One realized run of a batch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimOutcome {
    pub makespan: f64,
    /// Restarts per processing position.
    pub restarts_per_task: Vec<u64>,
}

impl SimOutcome {
    pub fn total_restarts(&self) -> u64 {
        self.restarts_per_task.iter().sum()
    }
}

/// Aggregate of independent replications.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MakespanEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub replications: u64,
    pub mean_restarts: f64,
    pub max_restarts: u64,
    pub max_makespan: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimOptions {
    pub method: SamplingMethod,
    /// Per-task restart cap before a divergence error.
    pub restart_cap: u64,
    /// Worker threads; `None` uses the global rayon pool.
    pub threads: Option<usize>,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            method: SamplingMethod::Inversion,
            restart_cap: DEFAULT_RESTART_CAP,
            threads: None,
        }
    }
}

/// Runs the preempt-repeat protocol against an arbitrary arrival source.
pub fn simulate_with_source<S: ArrivalSource>(
    source: &mut S,
    batch: &TaskBatch,
    perm: &Permutation,
    restart_cap: u64,
    rate_bound: f64,
) -> Result<SimOutcome> {
    let lengths = batch.ordered(perm)?;
    let mut clock = 0.0;
    let mut restarts = vec![0u64; lengths.len()];
    for (pos, &a) in lengths.iter().enumerate() {
        loop {
            match source.next_after(clock)? {
                Some(s) if s < clock + a => {
                    clock = s;
                    restarts[pos] += 1;
                    if restarts[pos] > restart_cap {
                        return Err(Error::Divergence {
                            replication: 0,
                            task: perm.order()[pos],
                            length: a,
                            cap: restart_cap,
                            expected_blowup: (rate_bound * a).exp(),
                        });
                    }
                }
                _ => {
                    clock += a;
                    break;
                }
            }
        }
    }
    Ok(SimOutcome {
        makespan: clock,
        restarts_per_task: restarts,
    })
}

/// Single-failure protocol: only the first disruption after time zero acts.
pub fn simulate_single_failure_with_source<S: ArrivalSource>(
    source: &mut S,
    batch: &TaskBatch,
    perm: &Permutation,
) -> Result<SimOutcome> {
    let lengths = batch.ordered(perm)?;
    let total: f64 = lengths.iter().sum();
    let mut restarts = vec![0u64; lengths.len()];
    let Some(s) = source.next_after(0.0)? else {
        return Ok(SimOutcome {
            makespan: total,
            restarts_per_task: restarts,
        });
    };
    let mut start = 0.0;
    for (pos, &a) in lengths.iter().enumerate() {
        if s > start && s < start + a {
            restarts[pos] = 1;
            return Ok(SimOutcome {
                makespan: s + (total - start),
                restarts_per_task: restarts,
            });
        }
        start += a;
    }
    Ok(SimOutcome {
        makespan: total,
        restarts_per_task: restarts,
    })
}

fn rate_bound(model: &RateModel, batch: &TaskBatch) -> f64 {
    let meta = model.metadata();
    meta.rate_max()
        .unwrap_or_else(|| model.rate_unchecked(100.0 * batch.total().max(1.0)))
}

/// One replication of the unrestricted model, drawing arrivals lazily.
pub fn simulate_makespan(
    model: &RateModel,
    batch: &TaskBatch,
    perm: &Permutation,
    rng: RngStream,
    options: &SimOptions,
) -> Result<SimOutcome> {
    let replication = rng.stream_index();
    let mut path = LazyPath::new(model, options.method, rng);
    simulate_with_source(&mut path, batch, perm, options.restart_cap, rate_bound(model, batch)).map_err(
        |e| match e {
            Error::Divergence {
                task,
                length,
                cap,
                expected_blowup,
                ..
            } => Error::Divergence {
                replication,
                task,
                length,
                cap,
                expected_blowup,
            },
            other => other,
        },
    )
}

/// One replication of the single-failure model.
pub fn simulate_single_failure(
    model: &RateModel,
    batch: &TaskBatch,
    perm: &Permutation,
    rng: RngStream,
    options: &SimOptions,
) -> Result<SimOutcome> {
    let mut path = LazyPath::new(model, options.method, rng);
    simulate_single_failure_with_source(&mut path, batch, perm)
}

/// Compensated running sum.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub(crate) fn add(&mut self, x: f64) {
        let y = x - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum
    }
}

/// Runs `replications` independent replications of `one`, keyed by stream
/// index, and aggregates them in index order.
pub fn estimate_with<F>(replications: u64, threads: Option<usize>, one: F) -> Result<MakespanEstimate>
where
    F: Fn(u64) -> Result<SimOutcome> + Sync,
{
    if replications < 2 {
        return Err(Error::Domain(format!("need at least 2 replications, got {replications}")));
    }
    let run = || -> Result<Vec<(f64, u64)>> {
        (0..replications)
            .into_par_iter()
            .map(|i| one(i).map(|o| (o.makespan, o.total_restarts())))
            .collect()
    };
    let samples = match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(run)?,
        None => run()?,
    };
    Ok(summarize(&samples))
}

fn summarize(samples: &[(f64, u64)]) -> MakespanEstimate {
    let n = samples.len() as f64;
    let mut sum = KahanSum::default();
    let mut restarts = KahanSum::default();
    let mut max_restarts = 0;
    let mut max_makespan = f64::NEG_INFINITY;
    for &(m, r) in samples {
        sum.add(m);
        restarts.add(r as f64);
        max_restarts = max_restarts.max(r);
        max_makespan = max_makespan.max(m);
    }
    let mean = sum.value() / n;
    let mut sq = KahanSum::default();
    for &(m, _) in samples {
        let d = m - mean;
        sq.add(d * d);
    }
    let var = sq.value() / (n - 1.0);
    MakespanEstimate {
        mean,
        std_error: (var / n).sqrt(),
        replications: samples.len() as u64,
        mean_restarts: restarts.value() / n,
        max_restarts,
        max_makespan,
    }
}

/// Monte Carlo estimate of the expected makespan; replication `i` uses
/// stream `(seed, i)`, so the result does not depend on the thread count.
pub fn estimate_makespan(
    model: &RateModel,
    batch: &TaskBatch,
    perm: &Permutation,
    replications: u64,
    seed: u64,
    options: &SimOptions,
) -> Result<MakespanEstimate> {
    batch.ordered(perm)?;
    estimate_with(replications, options.threads, |i| {
        simulate_makespan(model, batch, perm, RngStream::new(seed, i), options)
    })
}

/// Monte Carlo estimate of the single-failure expected makespan.
pub fn estimate_single_failure(
    model: &RateModel,
    batch: &TaskBatch,
    perm: &Permutation,
    replications: u64,
    seed: u64,
    options: &SimOptions,
) -> Result<MakespanEstimate> {
    batch.ordered(perm)?;
    estimate_with(replications, options.threads, |i| {
        simulate_single_failure(model, batch, perm, RngStream::new(seed, i), options)
    })
}
