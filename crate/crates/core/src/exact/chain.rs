//! Numerical solution of the conditional-mean-remaining-makespan chain.
//!
//! For the tasks in processing positions `i..n`, `M_i(t)` is the expected
//! remaining makespan when task `i` (re)starts at clock time `t`:
//!
//! ```text
//! M_i(t) = e^{−Λ(t,t+a_i)}·(a_i + M_{i+1}(t+a_i))
//!        + ∫_t^{t+a_i} λ(s)e^{−Λ(t,s)}·(s − t + M_i(s)) ds,      M_{n+1} ≡ 0.
//! ```
//!
//! Past the closure point the rate is a constant `λ∞` and `M_i` is the
//! constant-rate closed form. The window integral `W_i(t)` (second line) is
//! carried along the backward sweep by a sliding recursion: the cell
//! `[t, t+h]` is added and `[t+a_i, t+a_i+h]` removed, so each node costs
//! O(1) and every carried quantity stays of the size of one window. Within
//! a cell (split at rate breakpoints and grid nodes) `M` is linear and the
//! weight `λe^{−Λ}` is integrated through the exact `Λ`, which makes the
//! scheme exact at constant rates and second order in general. Off-grid
//! points use linear interpolation, and the self-reference at the left node
//! is solved for directly since everything is linear in it.

use super::closed_form::single_or_limit;
use crate::batch::{Permutation, TaskBatch};
use crate::error::{Error, Result};
use crate::rate_model::RateModel;
use serde::{Deserialize, Serialize};

/// Terminal condition beyond the last grid node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum TailClosure {
    /// The model really is constant at `lambda_inf` from the closure point on.
    ExactConstantTail { lambda_inf: f64 },
    /// The rate is frozen at its value at the closure point (approximation).
    ClampedTail { lambda_inf: f64 },
}

impl TailClosure {
    pub fn lambda_inf(&self) -> f64 {
        match *self {
            TailClosure::ExactConstantTail { lambda_inf } | TailClosure::ClampedTail { lambda_inf } => lambda_inf,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, TailClosure::ExactConstantTail { .. })
    }
}

/// How the closure point is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "type", content = "at", rename_all = "snake_case")]
pub enum Closure {
    /// Exact tail where the model becomes constant; otherwise an error.
    #[default]
    Auto,
    /// Close at the given time: exact if the model is already constant
    /// there, clamped otherwise.
    ClampAt(f64),
}

impl Closure {
    /// The clamp used when the caller gives none: `max(10·A_n, 100)`.
    pub fn default_clamp(batch: &TaskBatch) -> Closure {
        Closure::ClampAt((10.0 * batch.total()).max(100.0))
    }

    /// `Auto` for models with a constant tail, the default clamp otherwise.
    pub fn auto_or_default_clamp(model: &RateModel, batch: &TaskBatch) -> Closure {
        if model.metadata().tail_time.is_some() && model.metadata().tail_rate.is_some() {
            Closure::Auto
        } else {
            Closure::default_clamp(batch)
        }
    }
}

/// Solved grid of `M_{i:n}(t)` for every stage of one processing order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MakespanGrid {
    pub h: f64,
    pub t_close: f64,
    pub tail: TailClosure,
    pub permutation: Permutation,
    /// Task lengths in processing order.
    pub lengths: Vec<f64>,
    /// `values[i][j] = M_{i:n}(j·h)` for 0-based stage `i`.
    pub values: Vec<Vec<f64>>,
    /// `tail_values[i]`: the constant value of stage `i` beyond `t_close`.
    pub tail_values: Vec<f64>,
}

impl MakespanGrid {
    pub fn stages(&self) -> usize {
        self.values.len()
    }

    pub fn nodes(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }

    /// Expected makespan of the whole order started at time zero.
    pub fn value_at_zero(&self) -> f64 {
        self.values.first().map_or(0.0, |v| v[0])
    }

    /// `M_{i:n}(t)` with linear interpolation between nodes; 0-based stage.
    pub fn value_at(&self, stage: usize, t: f64) -> Result<f64> {
        if stage >= self.stages() {
            return Err(Error::Domain(format!("stage {stage} out of range 0..{}", self.stages())));
        }
        if !(t >= 0.0) {
            return Err(Error::Domain(format!("time must be >= 0, got {t}")));
        }
        Ok(interp(&self.values[stage], self.h, t, self.tail_values[stage]))
    }

    pub fn stage(&self, stage: usize) -> &[f64] {
        &self.values[stage]
    }

    /// `A_{i:n}`: remaining work from 0-based stage `i`.
    pub fn remaining_work(&self, stage: usize) -> f64 {
        self.lengths[stage..].iter().sum()
    }
}

fn interp(v: &[f64], h: f64, t: f64, tail: f64) -> f64 {
    let last = v.len() - 1;
    let u = t / h;
    if u >= last as f64 {
        return tail;
    }
    let j = u.floor() as usize;
    let w = u - j as f64;
    if w == 0.0 {
        v[j]
    } else {
        v[j] + w * (v[j + 1] - v[j])
    }
}

/// Everything about the rate the sweep needs, clipped at the closure point.
struct RateView<'a> {
    model: &'a RateModel,
    t_close: f64,
    lam_inf: f64,
    cum_close: f64,
    breaks: Vec<f64>,
}

impl RateView<'_> {
    fn cum(&self, x: f64) -> f64 {
        if x <= self.t_close {
            self.model.cumulative_from_zero(x)
        } else {
            self.cum_close + self.lam_inf * (x - self.t_close)
        }
    }

    fn right(&self, x: f64) -> f64 {
        if x >= self.t_close {
            self.lam_inf
        } else {
            self.model.rate_unchecked(x)
        }
    }

    fn left(&self, x: f64) -> f64 {
        if x > self.t_close {
            self.lam_inf
        } else {
            self.model.rate_left(x)
        }
    }

    /// `∫_x^z λ(s)e^{−Λ(x,s)}(s − x + M(s)) ds` for `x < z` inside one grid
    /// cell, `M` linear between `mx` and `mz`; split at rate breakpoints.
    fn cell(&self, x: f64, z: f64, mx: f64, mz: f64) -> f64 {
        let lo = self.breaks.partition_point(|&b| b <= x);
        let hi = self.breaks.partition_point(|&b| b < z);
        if lo >= hi {
            return self.piece(x, z, mx, mz);
        }
        let mut pts = Vec::with_capacity(hi - lo + 2);
        pts.push(x);
        pts.extend_from_slice(&self.breaks[lo..hi]);
        pts.push(z);
        self.chain(&pts, |p| mx + (mz - mx) * (p - x) / (z - x))
    }

    /// Same integral over consecutive pieces `pts[k]..pts[k+1]`, each free
    /// of breakpoints, with `M` linear on each piece.
    fn chain(&self, pts: &[f64], m: impl Fn(f64) -> f64) -> f64 {
        let z = pts[pts.len() - 1];
        let cz = self.cum(z);
        // acc = ∫_p^z λe^{−Λ(p,s)}(s − p + M(s)) ds, built right to left.
        let mut acc = 0.0;
        let mut mq = m(z);
        for k in (0..pts.len() - 1).rev() {
            let (p, q) = (pts[k], pts[k + 1]);
            let mp = m(p);
            let cq = self.cum(q);
            let mass_q = -(-(cz - cq)).exp_m1();
            let e = (-(cq - self.cum(p))).exp();
            acc = self.piece(p, q, mp, mq) + e * (acc + (q - p) * mass_q);
            mq = mp;
        }
        acc
    }

    /// `∫_p^q g dP` with `g(s) = s − p + M(s)` linear and `P = 1 − e^{−Λ(p,·)}`
    /// (no breakpoint inside). By parts, `g(q)P(q) − g'·∫_p^q P`; the last
    /// integral takes the rate as constant across the piece, so the rule is
    /// exact for constant rates and second order otherwise.
    fn piece(&self, p: f64, q: f64, mp: f64, mq: f64) -> f64 {
        let d = self.cum(q) - self.cum(p);
        if d <= 0.0 {
            return 0.0;
        }
        let gq = (q - p) + mq;
        -(-d).exp_m1() * gq - (gq - mp) * excess_fraction(d)
    }
}

/// `1 − (1 − e^{−d})/d`, accurate for small `d`.
fn excess_fraction(d: f64) -> f64 {
    if d < 1e-3 {
        d * (0.5 - d * (1.0 / 6.0 - d * (1.0 / 24.0 - d / 120.0)))
    } else {
        (d + (-d).exp_m1()) / d
    }
}

struct Sweep<'a> {
    view: RateView<'a>,
    h: f64,
    n_nodes: usize,
    cum: Vec<f64>,
}

impl Sweep<'_> {
    fn node(&self, j: usize) -> f64 {
        j as f64 * self.h
    }

    /// `∫_y^{y+h} λe^{−Λ(y,s)}(s − y + M(s)) ds` for a window end `y` at or
    /// past the first unsolved node, split at grid nodes and breakpoints.
    fn span(&self, m: &[f64], m_tail: f64, y: f64) -> f64 {
        let z = y + self.h;
        let mut pts = vec![y];
        let first = (y / self.h).floor() as usize + 1;
        let mut k = first;
        let mut bi = self.view.breaks.partition_point(|&b| b <= y);
        loop {
            let node = if k < self.n_nodes { self.node(k) } else { f64::INFINITY };
            let brk = self.view.breaks.get(bi).copied().unwrap_or(f64::INFINITY);
            let next = node.min(brk);
            if next >= z {
                break;
            }
            if next > *pts.last().unwrap() {
                pts.push(next);
            }
            if node <= brk {
                k += 1;
            }
            if brk <= node {
                bi += 1;
            }
        }
        pts.push(z);
        self.view.chain(&pts, |s| interp(m, self.h, s, m_tail))
    }

    fn solve_stage(&self, a: f64, next: Option<(&[f64], f64)>, m_tail: f64) -> Vec<f64> {
        let n = self.n_nodes;
        let h = self.h;
        let lam = self.view.lam_inf;
        let mut m = vec![0.0; n];
        m[n - 1] = m_tail;
        // Window integral at the closure point, in the constant-rate regime.
        let mut w = if lam > 0.0 {
            let hit = -(-lam * a).exp_m1();
            hit / lam - a * (-lam * a).exp() + m_tail * hit
        } else {
            0.0
        };
        for j in (0..n - 1).rev() {
            let t = self.node(j);
            let x1 = self.node(j + 1);
            let y = t + a;
            let cy = self.view.cum(y);
            let cyh = self.view.cum(y + h);
            let e1 = (-(self.cum[j + 1] - self.cum[j])).exp();
            let e_y = (-(cy - self.cum[j])).exp();
            // W(t) = ∫_t^{t+h} + ∫_{t+h}^{y+h} − ∫_y^{y+h}, all based at t.
            let shifted = e1 * (w + h * -(-(cyh - self.cum[j + 1])).exp_m1());
            let removed = e_y * (self.span(&m, m_tail, y) + a * -(-(cyh - cy)).exp_m1());
            let carry = shifted - removed;
            let k0 = self.view.cell(t, x1, 0.0, m[j + 1]);
            let c = self.view.cell(t, x1, 1.0, m[j + 1]) - k0;
            let next_y = next.map_or(0.0, |(v, tail)| interp(v, h, y, tail));
            let value = (e_y * (a + next_y) + k0 + carry) / (1.0 - c);
            w = k0 + c * value + carry;
            m[j] = value;
        }
        m
    }
}

fn resolve_closure(model: &RateModel, batch: &TaskBatch, closure: Closure) -> Result<(f64, Option<f64>)> {
    let meta = model.metadata();
    let exact_tail = match (meta.tail_time, meta.tail_rate) {
        (Some(t0), Some(r)) => Some((t0, r)),
        _ => None,
    };
    match closure {
        Closure::Auto => {
            let (t0, r) = exact_tail.ok_or(Error::MissingClosure)?;
            Ok((t0.max(batch.total()), Some(r)))
        }
        Closure::ClampAt(t) => {
            if !(t.is_finite() && t > 0.0) {
                return Err(Error::Domain(format!("closure point must be finite and > 0, got {t}")));
            }
            match exact_tail {
                Some((t0, r)) if t >= t0 => Ok((t, Some(r))),
                _ => Ok((t, None)),
            }
        }
    }
}

/// Solves every stage for the given processing order on a grid of step `h`.
pub fn solve_chain(
    model: &RateModel,
    batch: &TaskBatch,
    perm: &Permutation,
    h: f64,
    closure: Closure,
) -> Result<MakespanGrid> {
    let lengths = batch.ordered(perm)?;
    let (sweep, tail) = prepare(model, batch, h, closure)?;
    let stages = run(&sweep, &lengths, true);
    let tail_values = tail_constants(&lengths, tail.lambda_inf());
    Ok(MakespanGrid {
        h,
        t_close: sweep.view.t_close,
        tail,
        permutation: perm.clone(),
        lengths,
        values: stages,
        tail_values,
    })
}

/// `M_{1:n}(0)` only, keeping two stages in memory at a time.
fn solve_value(model: &RateModel, batch: &TaskBatch, perm: &Permutation, h: f64, closure: Closure) -> Result<(f64, f64, TailClosure)> {
    let lengths = batch.ordered(perm)?;
    let (sweep, tail) = prepare(model, batch, h, closure)?;
    let v = run(&sweep, &lengths, false);
    Ok((v.first().map_or(0.0, |s| s[0]), sweep.view.t_close, tail))
}

fn tail_constants(lengths: &[f64], lam_inf: f64) -> Vec<f64> {
    let mut out = vec![0.0; lengths.len()];
    let mut acc = 0.0;
    for (i, &a) in lengths.iter().enumerate().rev() {
        acc += single_or_limit(lam_inf, a);
        out[i] = acc;
    }
    out
}

fn prepare<'a>(model: &'a RateModel, batch: &TaskBatch, h: f64, closure: Closure) -> Result<(Sweep<'a>, TailClosure)> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::Domain(format!("grid step must be finite and > 0, got {h}")));
    }
    if !batch.is_empty() && h > batch.min_length() {
        return Err(Error::StepTooCoarse {
            h,
            reason: format!("step exceeds the shortest task ({})", batch.min_length()),
        });
    }
    let (t_req, exact_rate) = resolve_closure(model, batch, closure)?;
    let steps = ((t_req / h) - 1e-9).ceil().max(1.0);
    if steps > 5e8 {
        return Err(Error::StepTooCoarse {
            h,
            reason: format!("grid of {steps} nodes is too large"),
        });
    }
    let n_nodes = steps as usize + 1;
    let t_close = steps * h;
    let (lam_inf, tail) = match exact_rate {
        Some(r) => (r, TailClosure::ExactConstantTail { lambda_inf: r }),
        None => {
            let r = model.rate_unchecked(t_close);
            (r, TailClosure::ClampedTail { lambda_inf: r })
        }
    };
    let mut breaks: Vec<f64> = model.breakpoints().into_iter().filter(|&b| b > 0.0 && b < t_close).collect();
    breaks.sort_by(f64::total_cmp);
    let view = RateView {
        model,
        t_close,
        lam_inf,
        cum_close: model.cumulative_from_zero(t_close),
        breaks,
    };
    let nodes: Vec<f64> = (0..n_nodes).map(|j| j as f64 * h).collect();
    let mut lam_max = lam_inf;
    for &x in &nodes {
        lam_max = lam_max.max(view.right(x)).max(view.left(x));
    }
    for &b in &view.breaks {
        lam_max = lam_max.max(view.right(b)).max(view.left(b));
    }
    if 0.5 * h * lam_max >= 0.5 {
        return Err(Error::StepTooCoarse {
            h,
            reason: format!("(h/2)·max rate = {} must be below 0.5", 0.5 * h * lam_max),
        });
    }
    let cum: Vec<f64> = nodes.iter().map(|&x| view.cum(x)).collect();
    Ok((
        Sweep {
            view,
            h,
            n_nodes,
            cum,
        },
        tail,
    ))
}

/// Backward sweep over stages. With `keep_all` every stage is returned,
/// otherwise only the first.
fn run(sweep: &Sweep<'_>, lengths: &[f64], keep_all: bool) -> Vec<Vec<f64>> {
    let tails = tail_constants(lengths, sweep.view.lam_inf);
    let mut out: Vec<Vec<f64>> = Vec::new();
    let mut next: Option<Vec<f64>> = None;
    for i in (0..lengths.len()).rev() {
        let prev = next.as_deref().map(|v| (v, tails[i + 1]));
        let m = sweep.solve_stage(lengths[i], prev, tails[i]);
        if keep_all {
            out.push(m.clone());
        }
        next = Some(m);
    }
    if keep_all {
        out.reverse();
        out
    } else {
        next.map(|m| vec![m]).unwrap_or_default()
    }
}

/// Controls for [`refine_until`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RefineOptions {
    pub closure: Closure,
    /// Starting step; default `min(0.1, shortest task / 2)`.
    pub h0: Option<f64>,
    /// Give up once the step would drop below this.
    pub h_min: f64,
}

impl Default for RefineOptions {
    fn default() -> Self {
        RefineOptions {
            closure: Closure::Auto,
            h0: None,
            h_min: 1e-5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefineResult {
    pub value: f64,
    /// Step of the returned value.
    pub h: f64,
    pub last_change: f64,
    pub t_close: f64,
    pub tail: TailClosure,
    /// `(h, M_{1:n}(0))` for every step tried, coarsest first.
    pub history: Vec<(f64, f64)>,
}

/// Halves the step until two successive values of `M_{1:n}(0)` differ by
/// less than `tol`.
pub fn refine_until(
    model: &RateModel,
    batch: &TaskBatch,
    perm: &Permutation,
    tol: f64,
    options: &RefineOptions,
) -> Result<RefineResult> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be finite and > 0, got {tol}")));
    }
    perm.check_len(batch.len())?;
    if batch.is_empty() {
        return Ok(RefineResult {
            value: 0.0,
            h: 0.0,
            last_change: 0.0,
            t_close: 0.0,
            tail: TailClosure::ExactConstantTail { lambda_inf: 0.0 },
            history: Vec::new(),
        });
    }
    let mut h = options.h0.unwrap_or_else(|| (batch.min_length() / 2.0).min(0.1));
    let mut history = Vec::new();
    let mut prev: Option<f64> = None;
    let mut last_change = f64::INFINITY;
    loop {
        if h < options.h_min {
            return Err(Error::NonConvergence { h, last_change, tol });
        }
        match solve_value(model, batch, perm, h, options.closure) {
            Ok((v, t_close, tail)) => {
                history.push((h, v));
                if let Some(p) = prev {
                    last_change = (v - p).abs();
                    if last_change < tol {
                        return Ok(RefineResult {
                            value: v,
                            h,
                            last_change,
                            t_close,
                            tail,
                            history,
                        });
                    }
                }
                prev = Some(v);
            }
            // Too coarse for the rate: retry finer without counting a step.
            Err(Error::StepTooCoarse { .. }) if prev.is_none() => {}
            Err(e) => return Err(e),
        }
        h /= 2.0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::closed_form::{constant_rate_batch, special_two_task};
    use crate::rate_model::RateKind;

    fn batch(v: &[f64]) -> TaskBatch {
        TaskBatch::new(v.to_vec()).unwrap()
    }

    #[test]
    fn constant_rate_matches_closed_form() {
        let m = RateModel::constant(1.0).unwrap();
        let b = batch(&[1.0, 2.0]);
        let want = constant_rate_batch(1.0, &b).unwrap();
        for p in Permutation::all(2) {
            let g = solve_chain(&m, &b, &p, 1e-3, Closure::Auto).unwrap();
            assert!((g.value_at_zero() - want).abs() < 1e-4, "{} vs {want}", g.value_at_zero());
            assert!(g.tail.is_exact());
        }
    }

    #[test]
    fn zero_then_constant_matches_two_task_formula() {
        let m = RateModel::new(RateKind::ZeroThenConstant { b: 2.0, lambda: 1.0 }).unwrap();
        let b = batch(&[1.0, 2.0]);
        let (ab, ba) = special_two_task(1.0, 2.0, 1.0).unwrap();
        let g = solve_chain(&m, &b, &Permutation::identity(2), 1e-3, Closure::Auto).unwrap();
        assert!((g.value_at_zero() - ab).abs() < 1e-4, "{}", g.value_at_zero());
        let g = solve_chain(&m, &b, &Permutation::reversal(2), 1e-3, Closure::Auto).unwrap();
        assert!((g.value_at_zero() - ba).abs() < 1e-4, "{}", g.value_at_zero());
    }

    #[test]
    fn zero_rate_is_total_work() {
        let b = batch(&[2.0, 4.0, 6.0, 8.0]);
        for h in [0.5, 0.1, 0.03] {
            let g = solve_chain(&RateModel::zero(), &b, &Permutation::identity(4), h, Closure::Auto).unwrap();
            assert_eq!(g.value_at_zero(), 20.0);
        }
    }

    #[test]
    fn guards() {
        let b = batch(&[1.0, 2.0]);
        let p = Permutation::identity(2);
        let fast = RateModel::constant(10.0).unwrap();
        assert!(matches!(solve_chain(&fast, &b, &p, 0.2, Closure::Auto), Err(Error::StepTooCoarse { .. })));
        let m = RateModel::constant(0.1).unwrap();
        assert!(matches!(solve_chain(&m, &b, &p, 1.5, Closure::Auto), Err(Error::StepTooCoarse { .. })));
        let convex = RateModel::new(RateKind::ConvexDecreasing { lambda: 0.4 }).unwrap();
        assert!(matches!(solve_chain(&convex, &b, &p, 0.01, Closure::Auto), Err(Error::MissingClosure)));
        let g = solve_chain(&convex, &b, &p, 0.05, Closure::ClampAt(50.0)).unwrap();
        assert!(!g.tail.is_exact());
    }

    #[test]
    fn refinement_converges() {
        let m = RateModel::constant(0.4).unwrap();
        let b = batch(&[2.0, 4.0, 6.0, 8.0]);
        let r = refine_until(&m, &b, &Permutation::identity(4), 1e-4, &RefineOptions::default()).unwrap();
        let want = constant_rate_batch(0.4, &b).unwrap();
        assert!((r.value - want).abs() < 1e-4, "{} vs {want}", r.value);

        let m = RateModel::new(RateKind::ConvexDecreasing { lambda: 0.4 }).unwrap();
        let opts = RefineOptions {
            h0: Some(0.2),
            closure: Closure::ClampAt(200.0),
            ..RefineOptions::default()
        };
        let r = refine_until(&m, &b, &Permutation::identity(4), 1e-6, &opts).unwrap();
        let d: Vec<f64> = r.history.windows(2).map(|w| (w[1].1 - w[0].1).abs()).collect();
        assert!(d.len() >= 3);
        assert!(d.windows(2).all(|w| w[1] < w[0]), "{d:?}");
    }
}
