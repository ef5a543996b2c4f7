//! The at-most-one-failure model: only the first disruption restarts the
//! task in progress, later ones are ignored.
//!
//! With `P(t) = 1 − e^{−Λ(0,t)}` the first-arrival CDF and `p = P'`, a first
//! disruption at `s` during position `k` gives makespan `s + A_{k:n}`, so
//!
//! ```text
//! R = A_n·e^{−Λ(0,A_n)} + Σ_k ∫_{A_{k−1}}^{A_k} p(s)(s + A_{k:n}) ds
//!   = ∫_0^{A_n} (1 − P(s)) ds + Σ_k a_k·P(A_k).
//! ```
//!
//! The first line is evaluated by adaptive quadrature of `p`, the second by
//! quadrature of the survival function; they are independent routes.

use crate::batch::{Permutation, TaskBatch};
use crate::error::{Error, Result};
use crate::quadrature::integrate_with_breaks;
use crate::rate_model::RateModel;
use serde::{Deserialize, Serialize};

const REL_TOL: f64 = 1e-12;
const ABS_TOL: f64 = 1e-13;
const PROBES: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityMonotonicity {
    StrictlyDecreasing,
    StrictlyIncreasing,
    Neither,
}

/// Single-failure expected makespan of one order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingleFailureResult {
    pub expected_makespan: f64,
    /// The same quantity by the survival-function route.
    pub rearranged: f64,
    pub permutation: Permutation,
    pub density_monotonicity: DensityMonotonicity,
}

/// `p(t) = λ(t)·e^{−Λ(0,t)}`.
pub fn first_failure_density(model: &RateModel, t: f64) -> Result<f64> {
    let lam = model.rate(t)?;
    if lam == 0.0 {
        return Ok(0.0);
    }
    Ok(lam * (-model.cumulative_from_zero(t)).exp())
}

/// `∫_0^t p = 1 − e^{−Λ(0,t)}`.
pub fn first_failure_cdf(model: &RateModel, t: f64) -> Result<f64> {
    Ok(-(-model.cumulative_intensity(0.0, t)?).exp_m1())
}

/// Shape of `p` on `[0, horizon]`.
///
/// `p' = (λ' − λ²)·e^{−Λ}`, so `p` falls exactly where `λ' < λ²`. A
/// non-increasing rate that stays positive therefore always gives a
/// decreasing density. Otherwise the sign of `λ' − λ²` is probed on a grid
/// (continuous kinds), or `p` itself is (kinds with jumps).
pub fn density_monotonicity(model: &RateModel, horizon: f64) -> Result<DensityMonotonicity> {
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(Error::Domain(format!("horizon must be finite and > 0, got {horizon}")));
    }
    let meta = model.metadata();
    let grid = (0..=PROBES).map(|k| horizon * k as f64 / PROBES as f64);
    if meta.monotonicity.is_non_increasing() {
        let inf = model.rate_left(horizon).min(model.rate_unchecked(horizon));
        if inf > 0.0 {
            return Ok(DensityMonotonicity::StrictlyDecreasing);
        }
    }
    let mut neg = true;
    let mut pos = true;
    if meta.continuous {
        for t in grid {
            let lam = model.rate_unchecked(t);
            // An infinite right derivative counts as positive.
            let d = model.rate_derivative(t)?.unwrap_or(f64::INFINITY);
            let s = d - lam * lam;
            neg &= s < 0.0;
            pos &= s > 0.0;
        }
    } else {
        let p: Vec<f64> = grid
            .map(|t| first_failure_density(model, t))
            .collect::<Result<_>>()?;
        for w in p.windows(2) {
            neg &= w[1] < w[0];
            pos &= w[1] > w[0];
        }
    }
    Ok(if neg {
        DensityMonotonicity::StrictlyDecreasing
    } else if pos {
        DensityMonotonicity::StrictlyIncreasing
    } else {
        DensityMonotonicity::Neither
    })
}

fn density_integral(model: &RateModel, a: f64, b: f64, shift: f64) -> Result<f64> {
    if b <= a {
        return Ok(0.0);
    }
    let breaks = model.breakpoints();
    integrate_with_breaks(
        |s| {
            let lam = model.rate_unchecked(s);
            if lam == 0.0 {
                0.0
            } else {
                lam * (-model.cumulative_from_zero(s)).exp() * (s + shift)
            }
        },
        a,
        b,
        &breaks,
        ABS_TOL,
        REL_TOL,
    )
}

/// Direct route: window integrals of the first-failure density.
fn direct(model: &RateModel, lengths: &[f64]) -> Result<f64> {
    let total: f64 = lengths.iter().sum();
    let mut value = total * (-model.cumulative_from_zero(total)).exp();
    let mut start = 0.0;
    for &a in lengths {
        value += density_integral(model, start, start + a, total - start)?;
        start += a;
    }
    Ok(value)
}

/// Survival route: `∫_0^{A_n} e^{−Λ(0,s)} ds + Σ a_k P(A_k)`.
fn rearranged(model: &RateModel, lengths: &[f64]) -> Result<f64> {
    let total: f64 = lengths.iter().sum();
    let survival = if total > 0.0 {
        integrate_with_breaks(
            |s| (-model.cumulative_from_zero(s)).exp(),
            0.0,
            total,
            &model.breakpoints(),
            ABS_TOL,
            REL_TOL,
        )?
    } else {
        0.0
    };
    Ok(survival + weighted_cdf_sum(model, lengths))
}

fn weighted_cdf_sum(model: &RateModel, lengths: &[f64]) -> f64 {
    let mut acc = 0.0;
    let mut prefix = 0.0;
    for &a in lengths {
        prefix += a;
        acc += a * -(-model.cumulative_from_zero(prefix)).exp_m1();
    }
    acc
}

/// Expected single-failure makespan of `batch` processed in order `perm`.
pub fn expected_makespan_single_failure(
    model: &RateModel,
    batch: &TaskBatch,
    perm: &Permutation,
) -> Result<SingleFailureResult> {
    let lengths = batch.ordered(perm)?;
    let r = direct(model, &lengths)?;
    let r2 = rearranged(model, &lengths)?;
    let density_monotonicity = if batch.is_empty() {
        DensityMonotonicity::Neither
    } else {
        density_monotonicity(model, batch.total())?
    };
    Ok(SingleFailureResult {
        expected_makespan: r,
        rearranged: r2,
        permutation: perm.clone(),
        density_monotonicity,
    })
}

/// `R(batch order) − R(π) = Σ_i (a_i P(A_i) − a_{π(i)} P(A_{π(i)}))`, where
/// `A_{π(i)}` is the prefix sum in the permuted order.
pub fn pairwise_difference(model: &RateModel, batch: &TaskBatch, perm: &Permutation) -> Result<f64> {
    let permuted = batch.ordered(perm)?;
    let mut acc = 0.0;
    let (mut pa, mut pb) = (0.0, 0.0);
    for (&a, &b) in batch.lengths().iter().zip(&permuted) {
        pa += a;
        pb += b;
        let fa = -(-model.cumulative_from_zero(pa)).exp_m1();
        let fb = -(-model.cumulative_from_zero(pb)).exp_m1();
        acc += a * fa - b * fb;
    }
    Ok(acc)
}
