//! Disruption-rate functions `λ(t) = λ̄·f(t)` on `t ≥ 0`.
//!
//! Every kind carries an exact cumulative intensity `Λ(t1, t2) = ∫ λ`, a
//! generalized inverse of `Λ(0, ·)` and the analytic metadata the optimality
//! checks consume (`f₋`, `f₊`, `λ̄`, Lipschitz constant, time after which the
//! rate is constant, monotonicity class).
//!
//! The scaling convention is `λ̄ = sup λ` whenever the rate is bounded, so
//! `f₊ = 1` for every bounded kind. The optimality thresholds are invariant
//! under the choice of normalization.
//!
//! Step-like kinds are right-continuous: at a breakpoint the rate already has
//! its new level. Queries at negative times are domain errors.

use crate::error::{Error, Result};
use crate::quadrature;
use serde::{Deserialize, Serialize};

fn default_one() -> f64 {
    1.0
}

/// JSON-facing descriptor of a rate function: `{"kind": "...", "params": {...}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params")]
pub enum RateKind {
    /// `λ(t) = λ`.
    Constant { lambda: f64 },
    /// `λ(t) = min(a·t, λ)`.
    LinearIncreasing { a: f64, lambda: f64 },
    /// `λ(t) = λ·√(a·min(t, cap))`; without `cap` the rate is unbounded.
    ConcaveIncreasing {
        lambda: f64,
        a: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cap: Option<f64>,
    },
    /// `λ/2` for `t < t0`, `λ` afterwards.
    StepIncreasing { lambda: f64, t0: f64 },
    /// `λ(t) = max(λ − a·t, λ0)`.
    LinearDecreasing { lambda: f64, a: f64, lambda0: f64 },
    /// `λ(t) = λ/√(t + 1)`.
    ConvexDecreasing {
        #[serde(default = "default_one")]
        lambda: f64,
    },
    /// `λ` for `t < t0`, `λ/2` afterwards.
    StepDecreasing { lambda: f64, t0: f64 },
    /// `λ(t) = λ·(1 + sin(a·t))`.
    Sinusoidal { lambda: f64, a: f64 },
    /// Linear from `λ` down to `λ/2` on `[0, t1)`, flat `λ/2` on `[t1, t2)`,
    /// linear back up to `λ` on `[t2, t3)`, then `λ`.
    Bathtub { lambda: f64, t1: f64, t2: f64, t3: f64 },
    /// Zero on `[0, b)`, `λ` afterwards.
    ZeroThenConstant { b: f64, lambda: f64 },
    /// `λ1` before `switch_time`, `λ2` afterwards.
    TwoPhaseConstant {
        lambda1: f64,
        lambda2: f64,
        switch_time: f64,
    },
    /// `levels[0]` before `breakpoints[0]`, `levels[k]` on `[breakpoints[k-1], breakpoints[k])`.
    PiecewiseConstant {
        breakpoints: Vec<f64>,
        levels: Vec<f64>,
    },
    /// `λ(t) = scale·exp(rate·min(t, clamp))`.
    Exponential { scale: f64, rate: f64, clamp: f64 },
    /// `λ(t) = base + slope·min(t, until)`.
    Ramp { base: f64, slope: f64, until: f64 },
}

/// Monotonicity class of `λ` on `[0, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum Monotonicity {
    Constant,
    /// Strictly increasing on `[0, until]` and constant afterwards
    /// (`until = None` means strictly increasing everywhere).
    StrictlyIncreasingOn { until: Option<f64> },
    /// Strictly decreasing on `[0, until]` and constant afterwards.
    StrictlyDecreasingOn { until: Option<f64> },
    /// Non-decreasing with jumps (step kinds).
    NonDecreasing,
    /// Non-increasing with jumps (step kinds).
    NonIncreasing,
    NonMonotone,
}

impl Monotonicity {
    /// Whether `λ` is strictly decreasing on `[0, horizon]`.
    pub fn strictly_decreasing_through(&self, horizon: f64) -> bool {
        matches!(self, Monotonicity::StrictlyDecreasingOn { until } if until.is_none_or(|u| u >= horizon))
    }

    /// Whether `λ` is strictly increasing on `[0, horizon]`.
    pub fn strictly_increasing_through(&self, horizon: f64) -> bool {
        matches!(self, Monotonicity::StrictlyIncreasingOn { until } if until.is_none_or(|u| u >= horizon))
    }

    /// Whether `λ` is non-increasing on the whole half-line.
    pub fn is_non_increasing(&self) -> bool {
        matches!(
            self,
            Monotonicity::Constant | Monotonicity::StrictlyDecreasingOn { .. } | Monotonicity::NonIncreasing
        )
    }

    /// Whether `λ` is non-decreasing on the whole half-line.
    pub fn is_non_decreasing(&self) -> bool {
        matches!(
            self,
            Monotonicity::Constant | Monotonicity::StrictlyIncreasingOn { .. } | Monotonicity::NonDecreasing
        )
    }
}

/// Analytic metadata of a rate model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateMetadata {
    /// `inf f`.
    pub f_minus: f64,
    /// `sup f`; `None` when the rate is unbounded.
    pub f_plus: Option<f64>,
    /// Scale `λ̄` (the supremum of `λ` for bounded kinds).
    pub lambda_bar: f64,
    /// `sup |λ'|`; `None` for kinds with jumps or unbounded slope.
    pub lipschitz: Option<f64>,
    /// Time after which `λ` is constant.
    pub tail_time: Option<f64>,
    /// The constant value of `λ` after `tail_time`.
    pub tail_rate: Option<f64>,
    pub monotonicity: Monotonicity,
    /// Right derivative of `f` at zero, when finite.
    pub f_prime_zero: Option<f64>,
    /// `λ` has no jumps.
    pub continuous: bool,
}

impl RateMetadata {
    /// `λ̄·f₊`, the global majorant of the rate.
    pub fn rate_max(&self) -> Option<f64> {
        self.f_plus.map(|fp| fp * self.lambda_bar)
    }
}

/// Piecewise-linear rate: segment `j` starts at `starts[j]` with value
/// `values[j]` and slope `slopes[j]`; the last segment is flat and unbounded.
#[derive(Debug, Clone, PartialEq)]
struct Segments {
    starts: Vec<f64>,
    values: Vec<f64>,
    slopes: Vec<f64>,
    cum: Vec<f64>,
}

impl Segments {
    fn new(pieces: Vec<(f64, f64, f64)>) -> Self {
        let starts: Vec<f64> = pieces.iter().map(|p| p.0).collect();
        let values: Vec<f64> = pieces.iter().map(|p| p.1).collect();
        let mut slopes: Vec<f64> = pieces.iter().map(|p| p.2).collect();
        if let Some(last) = slopes.last_mut() {
            *last = 0.0;
        }
        let mut cum = vec![0.0; starts.len()];
        for j in 1..starts.len() {
            let d = starts[j] - starts[j - 1];
            cum[j] = cum[j - 1] + values[j - 1] * d + 0.5 * slopes[j - 1] * d * d;
        }
        Segments {
            starts,
            values,
            slopes,
            cum,
        }
    }

    /// Index of the segment containing `t` (right-continuous convention).
    fn index(&self, t: f64) -> usize {
        self.starts.partition_point(|&s| s <= t).saturating_sub(1)
    }

    fn eval(&self, j: usize, t: f64) -> f64 {
        (self.values[j] + self.slopes[j] * (t - self.starts[j])).max(0.0)
    }

    fn rate(&self, t: f64) -> f64 {
        self.eval(self.index(t), t)
    }

    fn rate_left(&self, t: f64) -> f64 {
        let j = self.starts.partition_point(|&s| s < t).saturating_sub(1);
        self.eval(j, t)
    }

    fn slope(&self, t: f64) -> f64 {
        self.slopes[self.index(t)]
    }

    fn cumulative(&self, t: f64) -> f64 {
        let j = self.index(t);
        let d = t - self.starts[j];
        self.cum[j] + self.values[j] * d + 0.5 * self.slopes[j] * d * d
    }

    fn end_value(&self, j: usize) -> f64 {
        match self.starts.get(j + 1) {
            Some(&next) => self.values[j] + self.slopes[j] * (next - self.starts[j]),
            None => self.values[j],
        }
    }

    fn sup(&self) -> f64 {
        (0..self.starts.len())
            .flat_map(|j| [self.values[j], self.end_value(j)])
            .fold(0.0, f64::max)
    }

    fn inf(&self) -> f64 {
        (0..self.starts.len())
            .flat_map(|j| [self.values[j], self.end_value(j)])
            .fold(f64::INFINITY, f64::min)
    }

    fn max_abs_slope(&self) -> f64 {
        self.slopes.iter().fold(0.0, |m, s| m.max(s.abs()))
    }

    fn is_continuous(&self) -> bool {
        (1..self.starts.len()).all(|j| (self.end_value(j - 1) - self.values[j]).abs() <= 1e-15 * self.sup().max(1.0))
    }

    fn total(&self) -> f64 {
        if *self.values.last().unwrap() > 0.0 {
            f64::INFINITY
        } else {
            *self.cum.last().unwrap()
        }
    }

    fn inverse(&self, x: f64) -> Option<f64> {
        let m = self.starts.len();
        for j in 0..m {
            let next = if j + 1 < m { self.cum[j + 1] } else { f64::INFINITY };
            if j + 1 == m && self.values[j] <= 0.0 {
                return if x <= self.cum[j] { Some(self.starts[j]) } else { None };
            }
            if next < x {
                continue;
            }
            if self.cum[j] >= x {
                return Some(self.starts[j]);
            }
            let r = x - self.cum[j];
            let (v, s) = (self.values[j], self.slopes[j]);
            let d = if s.abs() < 1e-300 {
                r / v
            } else {
                let disc = (v * v + 2.0 * s * r).max(0.0);
                2.0 * r / (v + disc.sqrt())
            };
            let d = if j + 1 < m {
                d.min(self.starts[j + 1] - self.starts[j])
            } else {
                d
            };
            return Some(self.starts[j] + d);
        }
        None
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Shape {
    Segments(Segments),
    Concave { lambda: f64, a: f64, cap: Option<f64> },
    Convex { lambda: f64 },
    Sinusoid { lambda: f64, a: f64 },
    Exponential { scale: f64, rate: f64, clamp: f64 },
}

/// A validated disruption-rate function. Immutable after construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RateKind", into = "RateKind")]
pub struct RateModel {
    kind: RateKind,
    shape: Shape,
    meta: RateMetadata,
}

impl TryFrom<RateKind> for RateModel {
    type Error = Error;
    fn try_from(kind: RateKind) -> Result<Self> {
        RateModel::new(kind)
    }
}

impl From<RateModel> for RateKind {
    fn from(m: RateModel) -> Self {
        m.kind
    }
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidModel(msg()))
    }
}

fn finite_nonneg(name: &str, v: f64) -> Result<()> {
    check(v.is_finite() && v >= 0.0, || format!("{name} must be finite and >= 0, got {v}"))
}

fn finite_pos(name: &str, v: f64) -> Result<()> {
    check(v.is_finite() && v > 0.0, || format!("{name} must be finite and > 0, got {v}"))
}

impl RateModel {
    pub fn new(kind: RateKind) -> Result<Self> {
        let (shape, meta) = Self::build(&kind)?;
        Ok(RateModel { kind, shape, meta })
    }

    /// The zero-rate model (no disruptions at all).
    pub fn zero() -> Self {
        Self::constant(0.0).expect("zero rate is valid")
    }

    pub fn constant(lambda: f64) -> Result<Self> {
        Self::new(RateKind::Constant { lambda })
    }

    pub fn kind(&self) -> &RateKind {
        &self.kind
    }

    /// Short name of the kind, as used in JSON descriptors.
    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            RateKind::Constant { .. } => "Constant",
            RateKind::LinearIncreasing { .. } => "LinearIncreasing",
            RateKind::ConcaveIncreasing { .. } => "ConcaveIncreasing",
            RateKind::StepIncreasing { .. } => "StepIncreasing",
            RateKind::LinearDecreasing { .. } => "LinearDecreasing",
            RateKind::ConvexDecreasing { .. } => "ConvexDecreasing",
            RateKind::StepDecreasing { .. } => "StepDecreasing",
            RateKind::Sinusoidal { .. } => "Sinusoidal",
            RateKind::Bathtub { .. } => "Bathtub",
            RateKind::ZeroThenConstant { .. } => "ZeroThenConstant",
            RateKind::TwoPhaseConstant { .. } => "TwoPhaseConstant",
            RateKind::PiecewiseConstant { .. } => "PiecewiseConstant",
            RateKind::Exponential { .. } => "Exponential",
            RateKind::Ramp { .. } => "Ramp",
        }
    }

    pub fn metadata(&self) -> &RateMetadata {
        &self.meta
    }

    /// A copy with every intensity multiplied by `factor` (shape unchanged).
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        finite_nonneg("scale factor", factor)?;
        let c = factor;
        let kind = match self.kind.clone() {
            RateKind::Constant { lambda } => RateKind::Constant { lambda: lambda * c },
            RateKind::LinearIncreasing { a, lambda } => RateKind::LinearIncreasing {
                a: a * c,
                lambda: lambda * c,
            },
            RateKind::ConcaveIncreasing { lambda, a, cap } => RateKind::ConcaveIncreasing {
                lambda: lambda * c,
                a,
                cap,
            },
            RateKind::StepIncreasing { lambda, t0 } => RateKind::StepIncreasing { lambda: lambda * c, t0 },
            RateKind::LinearDecreasing { lambda, a, lambda0 } => RateKind::LinearDecreasing {
                lambda: lambda * c,
                a: a * c,
                lambda0: lambda0 * c,
            },
            RateKind::ConvexDecreasing { lambda } => RateKind::ConvexDecreasing { lambda: lambda * c },
            RateKind::StepDecreasing { lambda, t0 } => RateKind::StepDecreasing { lambda: lambda * c, t0 },
            RateKind::Sinusoidal { lambda, a } => RateKind::Sinusoidal { lambda: lambda * c, a },
            RateKind::Bathtub { lambda, t1, t2, t3 } => RateKind::Bathtub {
                lambda: lambda * c,
                t1,
                t2,
                t3,
            },
            RateKind::ZeroThenConstant { b, lambda } => RateKind::ZeroThenConstant { b, lambda: lambda * c },
            RateKind::TwoPhaseConstant {
                lambda1,
                lambda2,
                switch_time,
            } => RateKind::TwoPhaseConstant {
                lambda1: lambda1 * c,
                lambda2: lambda2 * c,
                switch_time,
            },
            RateKind::PiecewiseConstant { breakpoints, levels } => RateKind::PiecewiseConstant {
                breakpoints,
                levels: levels.into_iter().map(|l| l * c).collect(),
            },
            RateKind::Exponential { scale, rate, clamp } => RateKind::Exponential {
                scale: scale * c,
                rate,
                clamp,
            },
            RateKind::Ramp { base, slope, until } => RateKind::Ramp {
                base: base * c,
                slope: slope * c,
                until,
            },
        };
        Self::new(kind)
    }

    fn build(kind: &RateKind) -> Result<(Shape, RateMetadata)> {
        use Monotonicity as M;
        let seg_meta = |segs: &Segments, mono: Monotonicity, tail_time: f64, lipschitz: Option<f64>| {
            let sup = segs.sup();
            let lambda_bar = sup;
            let norm = if sup > 0.0 { sup } else { 1.0 };
            RateMetadata {
                f_minus: if sup > 0.0 { segs.inf() / sup } else { 1.0 },
                f_plus: Some(1.0),
                lambda_bar,
                lipschitz,
                tail_time: Some(tail_time),
                tail_rate: Some(*segs.values.last().unwrap()),
                monotonicity: mono,
                f_prime_zero: Some(segs.slopes[0] / norm),
                continuous: segs.is_continuous(),
            }
        };
        let step_mono = |lo: f64, hi: f64| {
            if lo < hi {
                M::NonDecreasing
            } else if lo > hi {
                M::NonIncreasing
            } else {
                M::Constant
            }
        };
        match *kind {
            RateKind::Constant { lambda } => {
                finite_nonneg("lambda", lambda)?;
                let segs = Segments::new(vec![(0.0, lambda, 0.0)]);
                let meta = seg_meta(&segs, M::Constant, 0.0, Some(0.0));
                Ok((Shape::Segments(segs), meta))
            }
            RateKind::LinearIncreasing { a, lambda } => {
                finite_pos("a", a)?;
                finite_pos("lambda", lambda)?;
                let t0 = lambda / a;
                let segs = Segments::new(vec![(0.0, 0.0, a), (t0, lambda, 0.0)]);
                let meta = seg_meta(&segs, M::StrictlyIncreasingOn { until: Some(t0) }, t0, Some(a));
                Ok((Shape::Segments(segs), meta))
            }
            RateKind::ConcaveIncreasing { lambda, a, cap } => {
                finite_pos("lambda", lambda)?;
                finite_pos("a", a)?;
                if let Some(c) = cap {
                    finite_pos("cap", c)?;
                }
                let sup = cap.map(|c| lambda * (a * c).sqrt());
                let meta = RateMetadata {
                    f_minus: 0.0,
                    f_plus: sup.map(|_| 1.0),
                    lambda_bar: sup.unwrap_or(lambda),
                    lipschitz: None,
                    tail_time: cap,
                    tail_rate: sup,
                    monotonicity: M::StrictlyIncreasingOn { until: cap },
                    f_prime_zero: None,
                    continuous: true,
                };
                Ok((Shape::Concave { lambda, a, cap }, meta))
            }
            RateKind::StepIncreasing { lambda, t0 } => {
                finite_pos("lambda", lambda)?;
                finite_pos("t0", t0)?;
                let segs = Segments::new(vec![(0.0, lambda / 2.0, 0.0), (t0, lambda, 0.0)]);
                let meta = seg_meta(&segs, M::NonDecreasing, t0, None);
                Ok((Shape::Segments(segs), meta))
            }
            RateKind::LinearDecreasing { lambda, a, lambda0 } => {
                finite_pos("lambda", lambda)?;
                finite_pos("a", a)?;
                finite_nonneg("lambda0", lambda0)?;
                check(lambda0 < lambda, || format!("lambda0 ({lambda0}) must be below lambda ({lambda})"))?;
                let t0 = (lambda - lambda0) / a;
                let segs = Segments::new(vec![(0.0, lambda, -a), (t0, lambda0, 0.0)]);
                let meta = seg_meta(&segs, M::StrictlyDecreasingOn { until: Some(t0) }, t0, Some(a));
                Ok((Shape::Segments(segs), meta))
            }
            RateKind::ConvexDecreasing { lambda } => {
                finite_pos("lambda", lambda)?;
                let meta = RateMetadata {
                    f_minus: 0.0,
                    f_plus: Some(1.0),
                    lambda_bar: lambda,
                    lipschitz: Some(lambda / 2.0),
                    tail_time: None,
                    tail_rate: None,
                    monotonicity: M::StrictlyDecreasingOn { until: None },
                    f_prime_zero: Some(-0.5),
                    continuous: true,
                };
                Ok((Shape::Convex { lambda }, meta))
            }
            RateKind::StepDecreasing { lambda, t0 } => {
                finite_pos("lambda", lambda)?;
                finite_pos("t0", t0)?;
                let segs = Segments::new(vec![(0.0, lambda, 0.0), (t0, lambda / 2.0, 0.0)]);
                let meta = seg_meta(&segs, M::NonIncreasing, t0, None);
                Ok((Shape::Segments(segs), meta))
            }
            RateKind::Sinusoidal { lambda, a } => {
                finite_pos("lambda", lambda)?;
                finite_pos("a", a)?;
                let meta = RateMetadata {
                    f_minus: 0.0,
                    f_plus: Some(1.0),
                    lambda_bar: 2.0 * lambda,
                    lipschitz: Some(lambda * a),
                    tail_time: None,
                    tail_rate: None,
                    monotonicity: M::NonMonotone,
                    f_prime_zero: Some(a / 2.0),
                    continuous: true,
                };
                Ok((Shape::Sinusoid { lambda, a }, meta))
            }
            RateKind::Bathtub { lambda, t1, t2, t3 } => {
                finite_pos("lambda", lambda)?;
                finite_pos("t1", t1)?;
                check(t1 < t2 && t2 < t3 && t3.is_finite(), || {
                    format!("bathtub breakpoints must satisfy 0 < t1 < t2 < t3, got ({t1}, {t2}, {t3})")
                })?;
                let down = lambda / (2.0 * t1);
                let up = lambda / (2.0 * (t3 - t2));
                let segs = Segments::new(vec![
                    (0.0, lambda, -down),
                    (t1, lambda / 2.0, 0.0),
                    (t2, lambda / 2.0, up),
                    (t3, lambda, 0.0),
                ]);
                let lip = segs.max_abs_slope();
                let meta = seg_meta(&segs, M::NonMonotone, t3, Some(lip));
                Ok((Shape::Segments(segs), meta))
            }
            RateKind::ZeroThenConstant { b, lambda } => {
                finite_pos("b", b)?;
                finite_pos("lambda", lambda)?;
                let segs = Segments::new(vec![(0.0, 0.0, 0.0), (b, lambda, 0.0)]);
                let meta = seg_meta(&segs, M::NonDecreasing, b, None);
                Ok((Shape::Segments(segs), meta))
            }
            RateKind::TwoPhaseConstant {
                lambda1,
                lambda2,
                switch_time,
            } => {
                finite_nonneg("lambda1", lambda1)?;
                finite_nonneg("lambda2", lambda2)?;
                finite_pos("switch_time", switch_time)?;
                let segs = Segments::new(vec![(0.0, lambda1, 0.0), (switch_time, lambda2, 0.0)]);
                let mono = step_mono(lambda1, lambda2);
                let lip = (lambda1 == lambda2).then_some(0.0);
                let meta = seg_meta(&segs, mono, switch_time, lip);
                Ok((Shape::Segments(segs), meta))
            }
            RateKind::PiecewiseConstant {
                ref breakpoints,
                ref levels,
            } => {
                check(levels.len() == breakpoints.len() + 1, || {
                    format!(
                        "need exactly one more level than breakpoints, got {} levels and {} breakpoints",
                        levels.len(),
                        breakpoints.len()
                    )
                })?;
                for &l in levels {
                    finite_nonneg("level", l)?;
                }
                for &b in breakpoints {
                    finite_pos("breakpoint", b)?;
                }
                check(breakpoints.windows(2).all(|w| w[0] < w[1]), || {
                    "breakpoints must be strictly increasing".to_string()
                })?;
                let mut pieces = vec![(0.0, levels[0], 0.0)];
                pieces.extend(breakpoints.iter().zip(&levels[1..]).map(|(&b, &l)| (b, l, 0.0)));
                let segs = Segments::new(pieces);
                let inc = levels.windows(2).all(|w| w[0] <= w[1]);
                let dec = levels.windows(2).all(|w| w[0] >= w[1]);
                let mono = match (inc, dec) {
                    (true, true) => M::Constant,
                    (true, false) => M::NonDecreasing,
                    (false, true) => M::NonIncreasing,
                    (false, false) => M::NonMonotone,
                };
                let lip = (mono == M::Constant).then_some(0.0);
                let tail = breakpoints.last().copied().unwrap_or(0.0);
                let meta = seg_meta(&segs, mono, tail, lip);
                Ok((Shape::Segments(segs), meta))
            }
            RateKind::Exponential { scale, rate, clamp } => {
                finite_pos("scale", scale)?;
                check(rate.is_finite(), || format!("rate must be finite, got {rate}"))?;
                finite_nonneg("clamp", clamp)?;
                let end = scale * (rate * clamp).exp();
                let (sup, inf) = if rate >= 0.0 { (end, scale) } else { (scale, end) };
                check(sup.is_finite(), || "rate overflows before the clamp".to_string())?;
                let mono = if rate > 0.0 {
                    M::StrictlyIncreasingOn { until: Some(clamp) }
                } else if rate < 0.0 {
                    M::StrictlyDecreasingOn { until: Some(clamp) }
                } else {
                    M::Constant
                };
                let meta = RateMetadata {
                    f_minus: inf / sup,
                    f_plus: Some(1.0),
                    lambda_bar: sup,
                    lipschitz: Some(rate.abs() * sup),
                    tail_time: Some(clamp),
                    tail_rate: Some(end),
                    monotonicity: mono,
                    f_prime_zero: Some(scale * rate / sup),
                    continuous: true,
                };
                Ok((Shape::Exponential { scale, rate, clamp }, meta))
            }
            RateKind::Ramp { base, slope, until } => {
                finite_nonneg("base", base)?;
                check(slope.is_finite(), || format!("slope must be finite, got {slope}"))?;
                finite_nonneg("until", until)?;
                let end = base + slope * until;
                check(end >= -1e-12, || format!("ramp becomes negative ({end}) before t = {until}"))?;
                let segs = if until > 0.0 && slope != 0.0 {
                    Segments::new(vec![(0.0, base, slope), (until, end.max(0.0), 0.0)])
                } else {
                    Segments::new(vec![(0.0, base, 0.0)])
                };
                let mono = if until == 0.0 || slope == 0.0 {
                    M::Constant
                } else if slope > 0.0 {
                    M::StrictlyIncreasingOn { until: Some(until) }
                } else {
                    M::StrictlyDecreasingOn { until: Some(until) }
                };
                let tail = if mono == M::Constant { 0.0 } else { until };
                let meta = seg_meta(&segs, mono, tail, Some(slope.abs()));
                Ok((Shape::Segments(segs), meta))
            }
        }
    }

    fn check_time(t: f64) -> Result<()> {
        if t.is_nan() || t < 0.0 {
            Err(Error::Domain(format!("time must be >= 0, got {t}")))
        } else {
            Ok(())
        }
    }

    /// `λ(t)`; negative times are rejected.
    pub fn rate(&self, t: f64) -> Result<f64> {
        Self::check_time(t)?;
        Ok(self.rate_unchecked(t))
    }

    pub(crate) fn rate_unchecked(&self, t: f64) -> f64 {
        match &self.shape {
            Shape::Segments(s) => s.rate(t),
            Shape::Concave { lambda, a, cap } => {
                let u = cap.map_or(t, |c| t.min(c));
                lambda * (a * u).sqrt()
            }
            Shape::Convex { lambda } => lambda / (t + 1.0).sqrt(),
            Shape::Sinusoid { lambda, a } => lambda * (1.0 + (a * t).sin()),
            Shape::Exponential { scale, rate, clamp } => scale * (rate * t.min(*clamp)).exp(),
        }
    }

    /// Left limit `λ(t−)`; equals `λ(t)` for continuous kinds and at `t = 0`.
    pub(crate) fn rate_left(&self, t: f64) -> f64 {
        match &self.shape {
            Shape::Segments(s) if t > 0.0 => s.rate_left(t),
            _ => self.rate_unchecked(t),
        }
    }

    /// Right derivative `λ'(t+)`; `None` where it is infinite.
    pub fn rate_derivative(&self, t: f64) -> Result<Option<f64>> {
        Self::check_time(t)?;
        Ok(match &self.shape {
            Shape::Segments(s) => Some(s.slope(t)),
            Shape::Concave { lambda, a, cap } => {
                if cap.is_some_and(|c| t >= c) {
                    Some(0.0)
                } else if t == 0.0 {
                    None
                } else {
                    Some(0.5 * lambda * a.sqrt() / t.sqrt())
                }
            }
            Shape::Convex { lambda } => Some(-0.5 * lambda * (t + 1.0).powf(-1.5)),
            Shape::Sinusoid { lambda, a } => Some(lambda * a * (a * t).cos()),
            Shape::Exponential { scale, rate, clamp } => {
                Some(if t >= *clamp { 0.0 } else { scale * rate * (rate * t).exp() })
            }
        })
    }

    /// Points where `λ` or `λ'` may be discontinuous.
    pub fn breakpoints(&self) -> Vec<f64> {
        match &self.shape {
            Shape::Segments(s) => s.starts[1..].to_vec(),
            Shape::Concave { cap, .. } => cap.iter().copied().collect(),
            Shape::Exponential { clamp, .. } if *clamp > 0.0 => vec![*clamp],
            _ => Vec::new(),
        }
    }

    /// `Λ(0, t)` from the closed-form antiderivative.
    pub(crate) fn cumulative_from_zero(&self, t: f64) -> f64 {
        match &self.shape {
            Shape::Segments(s) => s.cumulative(t),
            Shape::Concave { lambda, a, cap } => {
                let k = lambda * a.sqrt();
                match cap {
                    Some(c) if t > *c => 2.0 / 3.0 * k * c.powf(1.5) + k * c.sqrt() * (t - c),
                    _ => 2.0 / 3.0 * k * t.powf(1.5),
                }
            }
            Shape::Convex { lambda } => 2.0 * lambda * ((t + 1.0).sqrt() - 1.0),
            Shape::Sinusoid { lambda, a } => lambda * (t + (1.0 - (a * t).cos()) / a),
            Shape::Exponential { scale, rate, clamp } => {
                let u = t.min(*clamp);
                let head = if *rate == 0.0 {
                    scale * u
                } else {
                    scale * (rate * u).exp_m1() / rate
                };
                head + scale * (rate * clamp).exp() * (t - clamp).max(0.0)
            }
        }
    }

    /// `Λ(t1, t2) = ∫_{t1}^{t2} λ(s) ds` for `0 ≤ t1 ≤ t2`.
    pub fn cumulative_intensity(&self, t1: f64, t2: f64) -> Result<f64> {
        Self::check_time(t1)?;
        Self::check_time(t2)?;
        if t2 < t1 {
            return Err(Error::Domain(format!("interval end {t2} precedes start {t1}")));
        }
        if t1 == t2 {
            return Ok(0.0);
        }
        Ok((self.cumulative_from_zero(t2) - self.cumulative_from_zero(t1)).max(0.0))
    }

    /// `Λ(t1, t2)` by adaptive quadrature of `λ`, independent of the closed forms.
    pub fn cumulative_intensity_quadrature(&self, t1: f64, t2: f64) -> Result<f64> {
        Self::check_time(t1)?;
        if t2 < t1 {
            return Err(Error::Domain(format!("interval end {t2} precedes start {t1}")));
        }
        quadrature::integrate_with_breaks(|s| self.rate_unchecked(s), t1, t2, &self.breakpoints(), 1e-13, 1e-12)
    }

    /// `Λ(0, ∞)`; infinite unless the rate is eventually zero.
    pub fn total_mass(&self) -> f64 {
        match &self.shape {
            Shape::Segments(s) => s.total(),
            _ => f64::INFINITY,
        }
    }

    /// Generalized inverse `inf{ s ≥ 0 : Λ(0, s) ≥ x }`.
    pub fn inverse_cumulative(&self, x: f64) -> Result<f64> {
        if x.is_nan() || x < 0.0 {
            return Err(Error::Domain(format!("cumulative intensity must be >= 0, got {x}")));
        }
        if x == 0.0 {
            return Ok(0.0);
        }
        let total = self.total_mass();
        if x > total {
            return Err(Error::Unreachable { requested: x, total });
        }
        let t = match &self.shape {
            Shape::Segments(s) => s.inverse(x).ok_or(Error::Unreachable { requested: x, total })?,
            Shape::Concave { lambda, a, cap } => {
                let k = lambda * a.sqrt();
                match cap {
                    Some(c) if x > 2.0 / 3.0 * k * c.powf(1.5) => {
                        c + (x - 2.0 / 3.0 * k * c.powf(1.5)) / (k * c.sqrt())
                    }
                    _ => (1.5 * x / k).powf(2.0 / 3.0),
                }
            }
            Shape::Convex { lambda } => {
                let r = x / (2.0 * lambda) + 1.0;
                r * r - 1.0
            }
            Shape::Sinusoid { lambda, a } => sinusoid_inverse(*lambda, *a, x),
            Shape::Exponential { scale, rate, clamp } => {
                let head = self.cumulative_from_zero(*clamp);
                if x > head {
                    clamp + (x - head) / (scale * (rate * clamp).exp())
                } else if *rate == 0.0 {
                    x / scale
                } else {
                    (rate * x / scale).ln_1p() / rate
                }
            }
        };
        Ok(t.max(0.0))
    }

    /// Generalized inverse by bisection on `Λ(0, ·)`, bracketed by doubling,
    /// to an absolute time tolerance of `1e-12`.
    pub fn inverse_cumulative_bisect(&self, x: f64) -> Result<f64> {
        if x.is_nan() || x < 0.0 {
            return Err(Error::Domain(format!("cumulative intensity must be >= 0, got {x}")));
        }
        if x == 0.0 {
            return Ok(0.0);
        }
        let total = self.total_mass();
        if x > total {
            return Err(Error::Unreachable { requested: x, total });
        }
        let mut lo = 0.0;
        let mut hi = 1.0;
        while self.cumulative_from_zero(hi) < x {
            lo = hi;
            hi *= 2.0;
            if !hi.is_finite() {
                return Err(Error::Unreachable { requested: x, total });
            }
        }
        while hi - lo > 1e-12 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.cumulative_from_zero(mid) >= x {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(hi)
    }
}

/// Inverse of `Λ(0,t) = λ(t + (1 − cos(at))/a)`: Newton steps kept inside
/// the bracket `[x/λ − 2/a, x/λ]`, bisecting whenever a step leaves it.
fn sinusoid_inverse(lambda: f64, a: f64, x: f64) -> f64 {
    // Λ is strictly increasing (λ vanishes only at isolated points), so the
    // root is unique.
    let big = |t: f64| lambda * (t + (1.0 - (a * t).cos()) / a);
    let mut hi = x / lambda;
    let mut lo = (hi - 2.0 / a).max(0.0);
    let mut t = 0.5 * (lo + hi);
    for _ in 0..200 {
        let g = big(t) - x;
        if g.abs() <= 1e-15 * x.max(1.0) {
            return t;
        }
        if g > 0.0 {
            hi = t;
        } else {
            lo = t;
        }
        if hi - lo <= 1e-13 * hi.max(1.0) {
            break;
        }
        let d = lambda * (1.0 + (a * t).sin());
        let next = t - g / d;
        t = if d > 0.0 && next > lo && next < hi { next } else { 0.5 * (lo + hi) };
    }
    hi
}

#[cfg(test)]
mod tests {
    use super::*;

    fn approx(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn rate_examples() {
        approx(RateModel::constant(0.4).unwrap().rate(7.0).unwrap(), 0.4, 0.0);
        let convex = RateModel::new(RateKind::ConvexDecreasing { lambda: 1.0 }).unwrap();
        approx(convex.rate(3.0).unwrap(), 0.5, 1e-15);
        let lin = RateModel::new(RateKind::LinearIncreasing { a: 0.1, lambda: 0.4 }).unwrap();
        approx(lin.rate(10.0).unwrap(), 0.4, 1e-15);
        approx(lin.rate(2.0).unwrap(), 0.2, 1e-15);
    }

    #[test]
    fn negative_time_is_domain_error() {
        let m = RateModel::constant(0.4).unwrap();
        assert!(matches!(m.rate(-1.0), Err(Error::Domain(_))));
        assert!(matches!(m.cumulative_intensity(-1.0, 2.0), Err(Error::Domain(_))));
        assert!(matches!(m.cumulative_intensity(3.0, 2.0), Err(Error::Domain(_))));
    }

    #[test]
    fn cumulative_examples() {
        approx(RateModel::constant(0.4).unwrap().cumulative_intensity(0.0, 5.0).unwrap(), 2.0, 1e-15);
        let lin = RateModel::new(RateKind::LinearDecreasing {
            lambda: 0.4,
            a: 0.1,
            lambda0: 0.1,
        })
        .unwrap();
        approx(lin.cumulative_intensity(0.0, 2.0).unwrap(), 0.6, 1e-14);
        approx(lin.cumulative_intensity_quadrature(0.0, 2.0).unwrap(), 0.6, 1e-12);
        let z = RateModel::new(RateKind::ZeroThenConstant { b: 2.0, lambda: 1.0 }).unwrap();
        approx(z.cumulative_intensity(0.0, 2.0).unwrap(), 0.0, 0.0);
    }

    #[test]
    fn inverse_examples() {
        approx(RateModel::constant(0.4).unwrap().inverse_cumulative(2.0).unwrap(), 5.0, 1e-12);
        let z = RateModel::new(RateKind::ZeroThenConstant { b: 2.0, lambda: 1.0 }).unwrap();
        approx(z.inverse_cumulative(0.5).unwrap(), 2.5, 1e-12);
        approx(z.inverse_cumulative_bisect(0.5).unwrap(), 2.5, 1e-11);
        assert_eq!(z.inverse_cumulative(0.0).unwrap(), 0.0);
        assert!(matches!(
            RateModel::zero().inverse_cumulative(1.0),
            Err(Error::Unreachable { .. })
        ));
    }

    #[test]
    fn metadata_examples() {
        let c = RateModel::constant(0.4).unwrap();
        let m = c.metadata();
        assert_eq!((m.f_minus, m.f_plus, m.lambda_bar), (1.0, Some(1.0), 0.4));
        assert_eq!(m.lipschitz, Some(0.0));
        assert_eq!(m.tail_time, Some(0.0));
        assert_eq!(m.monotonicity, Monotonicity::Constant);

        let s = RateModel::new(RateKind::StepDecreasing { lambda: 0.4, t0: 5.0 }).unwrap();
        let m = s.metadata();
        assert_eq!((m.f_minus, m.f_plus, m.lambda_bar), (0.5, Some(1.0), 0.4));
        assert_eq!(m.lipschitz, None);
        assert_eq!(m.tail_time, Some(5.0));
        assert_eq!(m.monotonicity, Monotonicity::NonIncreasing);
        assert!(!m.continuous);

        let z = RateModel::new(RateKind::ZeroThenConstant { b: 2.0, lambda: 1.0 }).unwrap();
        assert_eq!(z.metadata().f_minus, 0.0);
        assert_eq!(z.metadata().tail_time, Some(2.0));

        let v = RateModel::new(RateKind::ConvexDecreasing { lambda: 1.0 }).unwrap();
        let m = v.metadata();
        assert_eq!(m.f_plus, Some(1.0));
        assert_eq!(m.lipschitz, Some(0.5));
        assert_eq!(m.tail_time, None);
        assert_eq!(m.monotonicity, Monotonicity::StrictlyDecreasingOn { until: None });
    }

    #[test]
    fn piecewise_constant_validation() {
        let bad = RateModel::new(RateKind::PiecewiseConstant {
            breakpoints: vec![2.0, 1.0],
            levels: vec![1.0, 1.0, 1.0],
        });
        assert!(bad.is_err());
        let neg = RateModel::new(RateKind::PiecewiseConstant {
            breakpoints: vec![1.0],
            levels: vec![1.0, -1.0],
        });
        assert!(neg.is_err());
        let ok = RateModel::new(RateKind::PiecewiseConstant {
            breakpoints: vec![1.0, 3.0],
            levels: vec![0.5, 0.0, 2.0],
        })
        .unwrap();
        approx(ok.cumulative_intensity(0.0, 4.0).unwrap(), 0.5 + 2.0, 1e-15);
        approx(ok.inverse_cumulative(0.5).unwrap(), 1.0, 1e-15);
        approx(ok.inverse_cumulative(0.6).unwrap(), 3.05, 1e-12);
    }

    #[test]
    fn json_descriptor_roundtrip() {
        let json = r#"{"kind":"LinearDecreasing","params":{"lambda":0.4,"a":0.03,"lambda0":0.1}}"#;
        let m: RateModel = serde_json::from_str(json).unwrap();
        assert_eq!(m.kind_name(), "LinearDecreasing");
        let back = serde_json::to_string(&m).unwrap();
        let again: RateModel = serde_json::from_str(&back).unwrap();
        assert_eq!(m, again);
        let bad = r#"{"kind":"Constant","params":{"lambda":-1.0}}"#;
        assert!(serde_json::from_str::<RateModel>(bad).is_err());
        let unknown = r#"{"kind":"Quadratic","params":{}}"#;
        assert!(serde_json::from_str::<RateModel>(unknown).is_err());
    }

    #[test]
    fn scaled_multiplies_rate() {
        let m = RateModel::new(RateKind::Bathtub {
            lambda: 0.4,
            t1: 5.0,
            t2: 10.0,
            t3: 15.0,
        })
        .unwrap();
        let s = m.scaled(2.5).unwrap();
        for t in [0.0, 3.0, 7.0, 12.0, 20.0] {
            approx(s.rate(t).unwrap(), 2.5 * m.rate(t).unwrap(), 1e-14);
        }
    }
}
