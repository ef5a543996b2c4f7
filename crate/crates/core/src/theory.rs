//! Sufficient conditions for SPT/LPT optimality, evaluated numerically.
//!
//! Every check either verifies all of its hypotheses and the threshold
//! inequality, or names what failed; nothing is certified on a hunch.
//! Permutations in reports index the batch as given.

use crate::batch::{Permutation, TaskBatch};
use crate::error::{Error, Result};
use crate::exact::{refine_until, Closure, MakespanGrid, RefineOptions};
use crate::optimizer::{self, PrecedenceSpec};
use crate::rate_model::{RateKind, RateModel};
use crate::sim::{estimate_makespan, MakespanEstimate, SimOptions};
use serde::{Deserialize, Serialize};

/// Largest batch for which threshold minimizations scan every permutation.
pub const FULL_SCAN_MAX_TASKS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertifiedOrder {
    Spt,
    Lpt,
    None,
}

/// Which side of the threshold certifies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdRule {
    /// `tested_value < threshold_value` (rate scale, short-task length).
    Below,
    /// `tested_value > threshold_value` (slope of the rate at zero).
    Above,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub certified_order: CertifiedOrder,
    /// The competing order that attains the tightest threshold.
    pub binding_permutation: Option<Permutation>,
    /// `1/(2f₊aₙ)`.
    pub lambda_bar_cap: Option<f64>,
    pub threshold_value: Option<f64>,
    /// The model quantity compared against the threshold.
    pub tested_value: Option<f64>,
    pub rule: ThresholdRule,
    pub hypothesis_failures: Vec<String>,
    /// Set when the permutation scan was restricted to a neighbourhood;
    /// such reports never certify.
    pub heuristic: bool,
}

impl ThresholdReport {
    fn new(rule: ThresholdRule) -> Self {
        ThresholdReport {
            certified_order: CertifiedOrder::None,
            binding_permutation: None,
            lambda_bar_cap: None,
            threshold_value: None,
            tested_value: None,
            rule,
            hypothesis_failures: Vec::new(),
            heuristic: false,
        }
    }

    fn fail(&mut self, why: impl Into<String>) {
        self.hypothesis_failures.push(why.into());
    }

    fn certify_if_clear(&mut self, order: CertifiedOrder) {
        let met = match (self.tested_value, self.threshold_value, self.rule) {
            (Some(x), Some(t), ThresholdRule::Below) => x < t,
            (Some(x), Some(t), ThresholdRule::Above) => x > t,
            _ => false,
        };
        if !met && self.hypothesis_failures.is_empty() {
            self.fail("threshold inequality not met");
        }
        if self.hypothesis_failures.is_empty() && !self.heuristic {
            self.certified_order = order;
        }
    }

    pub fn is_certified(&self) -> bool {
        self.certified_order != CertifiedOrder::None
    }

    /// The certified order as a permutation of `batch`.
    pub fn certified_permutation(&self, batch: &TaskBatch) -> Option<Permutation> {
        match self.certified_order {
            CertifiedOrder::Spt => Some(optimizer::spt(batch)),
            CertifiedOrder::Lpt => Some(optimizer::lpt(batch)),
            CertifiedOrder::None => None,
        }
    }
}

/// Short tasks `a_i = ε·ā_i` with strictly ascending base lengths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShortTaskSpec {
    epsilon: f64,
    base: Vec<f64>,
}

impl ShortTaskSpec {
    pub fn new(epsilon: f64, base: Vec<f64>) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(Error::Domain(format!("epsilon must be finite and > 0, got {epsilon}")));
        }
        if base.is_empty() || !(base[0] > 0.0) || base.windows(2).any(|w| !(w[0] < w[1])) || !base.iter().all(|b| b.is_finite()) {
            return Err(Error::Domain(format!("base lengths must be positive and strictly ascending, got {base:?}")));
        }
        Ok(ShortTaskSpec { epsilon, base })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn base(&self) -> &[f64] {
        &self.base
    }

    /// `Ā_i` for `i = 1..n`.
    pub fn base_prefix(&self) -> Vec<f64> {
        TaskBatch::new(self.base.clone()).expect("validated").prefix_sums()
    }

    pub fn batch(&self) -> Result<TaskBatch> {
        TaskBatch::new(self.base.iter().map(|b| b * self.epsilon).collect())
    }
}

fn has_ties(batch: &TaskBatch) -> bool {
    let mut l = batch.lengths().to_vec();
    l.sort_by(f64::total_cmp);
    l.windows(2).any(|w| w[0] == w[1])
}

/// `S(π) = Σ_i a_{π(i)}·∫_0^{A_{π(i)}} f`, with `f = λ/λ̄`.
pub fn weighted_intensity_sum(model: &RateModel, batch: &TaskBatch, perm: &Permutation) -> Result<f64> {
    let lambda_bar = model.metadata().lambda_bar;
    if !(lambda_bar > 0.0) {
        return Err(Error::Domain("the rate scale is zero; f is undefined".into()));
    }
    let lengths = batch.ordered(perm)?;
    Ok(weighted_sum(model, lambda_bar, &lengths))
}

fn weighted_sum(model: &RateModel, lambda_bar: f64, lengths: &[f64]) -> f64 {
    let mut acc = 0.0;
    let mut prefix = 0.0;
    for &a in lengths {
        prefix += a;
        acc += a * model.cumulative_from_zero(prefix) / lambda_bar;
    }
    acc
}

fn ordered(batch: &TaskBatch, order: &[usize]) -> Vec<f64> {
    order.iter().map(|&i| batch.lengths()[i]).collect()
}

/// `min_{π ≠ target} g(π)` over all permutations, or over the adjacent
/// swaps of `target` plus its reversal for large batches. Returns the
/// minimizer, the minimum and whether the scan was heuristic.
fn min_over_others<G>(batch: &TaskBatch, target: &Permutation, g: G) -> Result<(Permutation, f64, bool)>
where
    G: Fn(&[usize]) -> f64 + Sync,
{
    let n = batch.len();
    if n <= FULL_SCAN_MAX_TASKS {
        let (ext, _) = optimizer::scan(n, &PrecedenceSpec::all_free(), false, |order| {
            Ok(if order == target.order() { f64::INFINITY } else { g(order) })
        })?;
        return Ok((Permutation::new(ext.best.0)?, ext.best.1, false));
    }
    let mut candidates: Vec<Vec<usize>> = (0..n - 1)
        .map(|k| {
            let mut o = target.order().to_vec();
            o.swap(k, k + 1);
            o
        })
        .collect();
    candidates.push(target.order().iter().rev().copied().collect());
    let mut best: Option<(Vec<usize>, f64)> = None;
    for c in candidates {
        let v = g(&c);
        if best.as_ref().is_none_or(|(bo, bv)| v < *bv || (v == *bv && c < *bo)) {
            best = Some((c, v));
        }
    }
    let (o, v) = best.expect("n >= 2");
    Ok((Permutation::new(o)?, v, true))
}

/// Target order from the strict monotonicity of `f` on `[0, horizon]`.
fn direction(model: &RateModel, horizon: f64) -> Option<CertifiedOrder> {
    let mono = model.metadata().monotonicity;
    if mono.strictly_decreasing_through(horizon) {
        Some(CertifiedOrder::Spt)
    } else if mono.strictly_increasing_through(horizon) {
        Some(CertifiedOrder::Lpt)
    } else {
        None
    }
}

/// Small-rate-scale condition: SPT (strictly decreasing `f` on `[0, A_n]`)
/// or LPT (strictly increasing) is optimal when `λ̄ ≤ 1/(2f₊aₙ)` and
///
/// ```text
/// λ̄ < min_{π ≠ target} (S(π) − S(target)) / (f₊²·(A_n·Σa_i² + ¾·A_n³)).
/// ```
pub fn theorem1_threshold(model: &RateModel, batch: &TaskBatch) -> Result<ThresholdReport> {
    let meta = model.metadata();
    let mut rep = ThresholdReport::new(ThresholdRule::Below);
    rep.tested_value = Some(meta.lambda_bar);
    if batch.len() < 2 {
        rep.fail("need at least two tasks");
        return Ok(rep);
    }
    if has_ties(batch) {
        rep.fail("task lengths must be distinct");
    }
    if !(meta.f_minus > 0.0) {
        rep.fail("f₋ ≤ 0");
    }
    if !(meta.lambda_bar > 0.0) {
        rep.fail("rate scale λ̄ is zero");
        return Ok(rep);
    }
    let Some(f_plus) = meta.f_plus else {
        rep.fail("f₊ unavailable (unbounded rate)");
        return Ok(rep);
    };
    let a_n = batch.max_length();
    let total = batch.total();
    let cap = 1.0 / (2.0 * f_plus * a_n);
    rep.lambda_bar_cap = Some(cap);
    if meta.lambda_bar > cap {
        rep.fail("λ̄ above the cap 1/(2f₊aₙ)");
    }
    let Some(order) = direction(model, total) else {
        rep.fail("f not strictly monotone on [0, A_n]");
        return Ok(rep);
    };
    let target = match order {
        CertifiedOrder::Spt => optimizer::spt(batch),
        _ => optimizer::lpt(batch),
    };
    let lb = meta.lambda_bar;
    let s_target = weighted_sum(model, lb, &batch.ordered(&target)?);
    let (binding, numerator, heuristic) =
        min_over_others(batch, &target, |o| weighted_sum(model, lb, &ordered(batch, o)) - s_target)?;
    let sum_sq: f64 = batch.lengths().iter().map(|a| a * a).sum();
    let denominator = f_plus * f_plus * (total * sum_sq + 0.75 * total.powi(3));
    rep.binding_permutation = Some(binding);
    rep.threshold_value = Some(numerator / denominator);
    if heuristic {
        rep.heuristic = true;
        rep.fail(format!("more than {FULL_SCAN_MAX_TASKS} tasks: heuristic threshold only"));
    }
    if !(numerator > 0.0) {
        rep.fail("numerator is not positive");
    }
    rep.certify_if_clear(order);
    Ok(rep)
}

/// Short-task condition for `a_i = ε·ā_i`: SPT (resp. LPT) is optimal for
/// sufficiently small `ε` when `|f′(0)|` exceeds
///
/// ```text
/// 2λ̄·f₊²·(Ā_n·Σā_i² + ¾·Ā_n³) / min_{π ≠ target} D(π),
/// ```
///
/// with `D(π) = Σ ā_i Ā_i² − Σ ā_{π(i)} Ā_{π(i)}²` for SPT and the mirror
/// image against LPT. No concrete `ε` is certified.
pub fn theorem2_threshold(model: &RateModel, spec: &ShortTaskSpec) -> Result<ThresholdReport> {
    let meta = model.metadata();
    let mut rep = ThresholdReport::new(ThresholdRule::Above);
    let base = TaskBatch::new(spec.base().to_vec())?;
    if base.len() < 2 {
        rep.fail("need at least two tasks");
        return Ok(rep);
    }
    let Some(fp0) = meta.f_prime_zero else {
        rep.fail("f not differentiable at 0");
        return Ok(rep);
    };
    rep.tested_value = Some(fp0.abs());
    if fp0 == 0.0 {
        rep.fail("f′(0) = 0");
        return Ok(rep);
    }
    let Some(f_plus) = meta.f_plus else {
        rep.fail("f₊ unavailable (unbounded rate)");
        return Ok(rep);
    };
    let horizon = spec.epsilon() * base.total();
    let Some(order) = direction(model, horizon) else {
        rep.fail("f not strictly monotone on [0, A_n]");
        return Ok(rep);
    };
    if (order == CertifiedOrder::Spt) != (fp0 < 0.0) {
        rep.fail("sign of f′(0) disagrees with the monotonicity of f");
        return Ok(rep);
    }
    let cube_sum = |lengths: &[f64]| {
        let mut acc = 0.0;
        let mut prefix = 0.0;
        for &a in lengths {
            prefix += a;
            acc += a * prefix * prefix;
        }
        acc
    };
    let target = match order {
        CertifiedOrder::Spt => optimizer::spt(&base),
        _ => optimizer::lpt(&base),
    };
    let t_sum = cube_sum(&base.ordered(&target)?);
    let sign = if order == CertifiedOrder::Spt { 1.0 } else { -1.0 };
    let (binding, d_min, heuristic) =
        min_over_others(&base, &target, |o| sign * (t_sum - cube_sum(&ordered(&base, o))))?;
    rep.binding_permutation = Some(binding);
    if heuristic {
        rep.heuristic = true;
        rep.fail(format!("more than {FULL_SCAN_MAX_TASKS} tasks: heuristic threshold only"));
    }
    if !(d_min > 0.0) {
        rep.fail("denominator is not positive");
        return Ok(rep);
    }
    let total = base.total();
    let sum_sq: f64 = base.lengths().iter().map(|a| a * a).sum();
    let k = f_plus * f_plus * (total * sum_sq + 0.75 * total.powi(3));
    rep.threshold_value = Some(2.0 * meta.lambda_bar * k / d_min);
    rep.lambda_bar_cap = Some(1.0 / (2.0 * f_plus * spec.epsilon() * base.max_length()));
    rep.certify_if_clear(order);
    Ok(rep)
}

/// Constants of the two-task small-`a` condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prop2Details {
    /// `𝓜₁` (decreasing case) or `𝓜₂` (increasing case).
    pub m_constant: f64,
    /// `M_b(0)`, solved numerically (decreasing case only).
    pub m_b0: Option<f64>,
    pub first_branch: f64,
    pub second_branch: f64,
}

/// Two tasks `a < b`: SPT is optimal for decreasing `λ` (strictly on
/// `[0, b]`) when `a < min{1/(2f₊λ̄), (1 − e^{bλ(b) − Λ(0,b)})/𝓜₁}`; LPT for
/// increasing `λ` when `a < min{1/(2f₊λ̄), e^{−Λ(0,b)}(e^{λ(b)b} − e^{Λ(0,b)})/𝓜₂}`.
pub fn prop2_cutoffs(model: &RateModel, a: f64, b: f64) -> Result<(ThresholdReport, Option<Prop2Details>)> {
    if !(a > 0.0 && a < b && b.is_finite()) {
        return Err(Error::Domain(format!("need 0 < a < b, got a = {a}, b = {b}")));
    }
    let meta = model.metadata();
    let mut rep = ThresholdReport::new(ThresholdRule::Below);
    rep.tested_value = Some(a);
    let lip = meta.lipschitz.filter(|l| *l > 0.0);
    if lip.is_none() {
        rep.fail("λ not Lipschitz with L > 0 (L unavailable)");
    }
    if !(meta.f_minus > 0.0) {
        rep.fail("f₋ ≤ 0");
    }
    let Some(f_plus) = meta.f_plus else {
        rep.fail("f₊ unavailable (unbounded rate)");
        return Ok((rep, None));
    };
    let mono = meta.monotonicity;
    let order = if mono.is_non_increasing() && mono.strictly_decreasing_through(b) {
        CertifiedOrder::Spt
    } else if mono.is_non_decreasing() && mono.strictly_increasing_through(b) {
        CertifiedOrder::Lpt
    } else {
        rep.fail("λ not monotone everywhere and strictly monotone on [0, b]");
        return Ok((rep, None));
    };
    let Some(l) = lip else {
        return Ok((rep, None));
    };
    let top = meta.lambda_bar * f_plus;
    let lam0 = model.rate(0.0)?;
    let lamb = model.rate(b)?;
    let big_lam = model.cumulative_intensity(0.0, b)?;
    let first_branch = 1.0 / (2.0 * f_plus * meta.lambda_bar);
    let pair = TaskBatch::new(vec![a, b])?;
    let details = match order {
        CertifiedOrder::Spt => {
            if (lam0 - top).abs() > 1e-12 * top.max(1.0) {
                rep.fail("f(0) ≠ f₊");
                return Ok((rep, None));
            }
            let single = TaskBatch::new(vec![b])?;
            let opts = RefineOptions {
                closure: Closure::auto_or_default_clamp(model, &single),
                ..RefineOptions::default()
            };
            let m_b = refine_until(model, &single, &Permutation::identity(1), 1e-6, &opts)?.value;
            let m1 = (l + top * top) * b
                + top * top * (b + (lam0 * b).exp_m1() / lam0)
                + 1.5 * lam0 * lamb * (1.0 / (2.0 * top) + b + (lamb * b).exp_m1() / lamb)
                + lamb
                + l * m_b
                + lam0 * lam0 * m_b
                + 1.5 * lam0;
            let second = -(b * lamb - big_lam).exp_m1() / m1;
            rep.binding_permutation = Some(Permutation::reversal(2));
            Prop2Details {
                m_constant: m1,
                m_b0: Some(m_b),
                first_branch,
                second_branch: second,
            }
        }
        _ => {
            let m2 = 2.5 * top
                + b * l
                + lam0 * ((top * b).exp() + 0.5)
                + lamb * (b * top - 1.0 + (top * b).exp());
            let second = (-big_lam).exp() * ((lamb * b).exp() - big_lam.exp()) / m2;
            rep.binding_permutation = Some(Permutation::identity(2));
            Prop2Details {
                m_constant: m2,
                m_b0: None,
                first_branch,
                second_branch: second,
            }
        }
    };
    rep.lambda_bar_cap = Some(1.0 / (2.0 * f_plus * pair.max_length()));
    rep.threshold_value = Some(details.first_branch.min(details.second_branch));
    rep.certify_if_clear(order);
    Ok((rep, Some(details)))
}

/// Grid-wide verification of `A_{i:n} ≤ M_{i:n}(t) ≤ A_{i:n} + λ̄f₊·Σ_{k≥i} a_k²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    /// Why the check did not run, if it did not.
    pub skipped: Option<String>,
    pub nodes_checked: usize,
    pub lower_violations: usize,
    pub upper_violations: usize,
    pub max_violation: f64,
    /// `max (M − A_{i:n})/A_{i:n}`; at most one half when the bounds hold.
    pub max_relative_excess: f64,
}

impl BoundsReport {
    pub fn passed(&self) -> bool {
        self.skipped.is_none() && self.lower_violations == 0 && self.upper_violations == 0
    }
}

/// Absolute slack for floating-point noise in [`bounds_check`].
pub const BOUNDS_SLACK: f64 = 1e-9;

/// Checks both bounds at every node of every stage, provided
/// `λ̄ ≤ 1/(2f₊aₙ)`.
pub fn bounds_check(grid: &MakespanGrid, lambda_bar: f64, f_plus: f64) -> BoundsReport {
    let mut rep = BoundsReport {
        skipped: None,
        nodes_checked: 0,
        lower_violations: 0,
        upper_violations: 0,
        max_violation: 0.0,
        max_relative_excess: 0.0,
    };
    let a_n = grid.lengths.iter().copied().fold(0.0, f64::max);
    if !(lambda_bar * f_plus * 2.0 * a_n <= 1.0) {
        rep.skipped = Some(format!("λ̄f₊ = {} exceeds 1/(2aₙ) = {}", lambda_bar * f_plus, 0.5 / a_n));
        return rep;
    }
    for (i, stage) in grid.values.iter().enumerate() {
        let work = grid.remaining_work(i);
        let sq: f64 = grid.lengths[i..].iter().map(|a| a * a).sum();
        let upper = work + lambda_bar * f_plus * sq;
        for &m in stage {
            rep.nodes_checked += 1;
            if m < work - BOUNDS_SLACK {
                rep.lower_violations += 1;
                rep.max_violation = rep.max_violation.max(work - m);
            }
            if m > upper + BOUNDS_SLACK {
                rep.upper_violations += 1;
                rep.max_violation = rep.max_violation.max(m - upper);
            }
            rep.max_relative_excess = rep.max_relative_excess.max((m - work) / work);
        }
    }
    rep
}

/// Controls for [`order_invariance_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InvarianceOptions {
    /// Refinement tolerance of each exact value.
    pub solver_tol: f64,
    /// Allowed spread of the exact values.
    pub agreement: f64,
    /// `(replications, seed)` for the Monte Carlo comparison.
    pub monte_carlo: Option<(u64, u64)>,
}

impl Default for InvarianceOptions {
    fn default() -> Self {
        InvarianceOptions {
            solver_tol: 1e-6,
            agreement: 1e-4,
            monte_carlo: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvarianceReport {
    pub skipped: Option<String>,
    pub exact: Vec<(Permutation, f64)>,
    pub exact_spread: f64,
    pub monte_carlo: Vec<(Permutation, MakespanEstimate)>,
    /// Largest `|m_i − m_j| / √(se_i² + se_j²)` over pairs of estimates.
    pub max_z: f64,
    pub exact_agree: bool,
    pub monte_carlo_agree: bool,
}

impl InvarianceReport {
    pub fn passed(&self) -> bool {
        self.skipped.is_none() && self.exact_agree && self.monte_carlo_agree
    }
}

/// When the rate is constant after `t₀` and every task is longer than `t₀`,
/// all orders have the same expected makespan.
pub fn order_invariance_check(model: &RateModel, batch: &TaskBatch, options: &InvarianceOptions) -> Result<InvarianceReport> {
    let mut rep = InvarianceReport {
        skipped: None,
        exact: Vec::new(),
        exact_spread: 0.0,
        monte_carlo: Vec::new(),
        max_z: 0.0,
        exact_agree: false,
        monte_carlo_agree: false,
    };
    let meta = model.metadata();
    let t0 = match (meta.tail_time, meta.tail_rate) {
        (Some(t0), Some(_)) => t0,
        _ => {
            rep.skipped = Some("rate is never constant".into());
            return Ok(rep);
        }
    };
    if batch.is_empty() || batch.len() > 5 {
        rep.skipped = Some(format!("need 1 to 5 tasks, got {}", batch.len()));
        return Ok(rep);
    }
    if !(batch.min_length() > t0) {
        rep.skipped = Some(format!("shortest task {} does not exceed t₀ = {t0}", batch.min_length()));
        return Ok(rep);
    }
    let opts = RefineOptions::default();
    for p in Permutation::all(batch.len()) {
        let v = refine_until(model, batch, &p, options.solver_tol, &opts)?.value;
        rep.exact.push((p, v));
    }
    let (lo, hi) = rep
        .exact
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (_, v)| (lo.min(*v), hi.max(*v)));
    rep.exact_spread = hi - lo;
    rep.exact_agree = rep.exact_spread <= options.agreement;
    rep.monte_carlo_agree = true;
    if let Some((reps, seed)) = options.monte_carlo {
        for (p, _) in &rep.exact {
            let est = estimate_makespan(model, batch, p, reps, seed, &SimOptions::default())?;
            rep.monte_carlo.push((p.clone(), est));
        }
        for (i, (_, x)) in rep.monte_carlo.iter().enumerate() {
            for (_, y) in &rep.monte_carlo[i + 1..] {
                let se = (x.std_error.powi(2) + y.std_error.powi(2)).sqrt();
                let d = (x.mean - y.mean).abs();
                let z = if se > 0.0 {
                    d / se
                } else if d == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                };
                rep.max_z = rep.max_z.max(z);
            }
        }
        rep.monte_carlo_agree = rep.max_z <= 3.0;
    }
    Ok(rep)
}

/// What a stress instance exercises.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "check", rename_all = "snake_case")]
pub enum StressCheck {
    Theorem1,
    Prop2 { a: f64, b: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StressInstance {
    pub name: String,
    pub model: RateModel,
    pub batch: TaskBatch,
    pub check: StressCheck,
}

impl StressInstance {
    pub fn report(&self) -> Result<ThresholdReport> {
        match self.check {
            StressCheck::Theorem1 => theorem1_threshold(&self.model, &self.batch),
            StressCheck::Prop2 { a, b } => Ok(prop2_cutoffs(&self.model, a, b)?.0),
        }
    }
}

fn decreasing_shape(scale: f64) -> Result<RateModel> {
    RateModel::new(RateKind::Exponential {
        scale,
        rate: -0.3,
        clamp: 10.0,
    })
}

/// `scale·(1 + 0.1·min(t, 10))/2`, so the supremum is `scale`.
fn increasing_shape(scale: f64) -> Result<RateModel> {
    RateModel::new(RateKind::Ramp {
        base: scale / 2.0,
        slope: scale / 20.0,
        until: 10.0,
    })
}

/// Twelve instances: the small-rate condition for decreasing and increasing
/// shapes, two and three tasks, rate scale well below and well above the
/// threshold; and the two-task small-`a` condition in both directions with
/// `a` below and above the cutoff.
pub fn stress_library() -> Result<Vec<StressInstance>> {
    let mut out = Vec::new();
    let shapes: [(&str, fn(f64) -> Result<RateModel>); 2] = [("decreasing", decreasing_shape), ("increasing", increasing_shape)];
    for (shape_name, shape) in shapes {
        for lengths in [vec![1.0, 2.0], vec![1.0, 2.0, 3.0]] {
            let batch = TaskBatch::new(lengths)?;
            let unit = theorem1_threshold(&shape(1.0)?, &batch)?;
            let limit = unit
                .threshold_value
                .unwrap_or(f64::NAN)
                .min(unit.lambda_bar_cap.unwrap_or(f64::NAN));
            if !(limit > 0.0) {
                return Err(Error::InvalidModel(format!("stress shape {shape_name} has no positive threshold")));
            }
            for (size, scale) in [("small", 0.5 * limit), ("large", 0.3)] {
                out.push(StressInstance {
                    name: format!("thm1-{shape_name}-n{}-{size}", batch.len()),
                    model: shape(scale)?,
                    batch: batch.clone(),
                    check: StressCheck::Theorem1,
                });
            }
        }
    }
    let b = 1.0;
    let dec = RateModel::new(RateKind::Exponential {
        scale: 0.2,
        rate: -1.0,
        clamp: 10.0,
    })?;
    let inc = RateModel::new(RateKind::Ramp {
        base: 0.1,
        slope: 0.1,
        until: 10.0,
    })?;
    for (shape_name, model) in [("decreasing", dec), ("increasing", inc)] {
        let (probe, _) = prop2_cutoffs(&model, 0.5 * b, b)?;
        let cutoff = probe.threshold_value.unwrap_or(f64::NAN);
        if !(cutoff > 0.0) {
            return Err(Error::InvalidModel(format!("stress shape {shape_name} has no positive cutoff")));
        }
        for (size, a) in [("small", 0.5 * cutoff.min(b)), ("large", 0.9 * b)] {
            out.push(StressInstance {
                name: format!("prop2-{shape_name}-{size}-a"),
                model: model.clone(),
                batch: TaskBatch::new(vec![a, b])?,
                check: StressCheck::Prop2 { a, b },
            });
        }
    }
    Ok(out)
}
