#![allow(dead_code)]

use nhpp_sched::{RateKind, RateModel};

/// One representative of every rate kind.
pub fn every_kind() -> Vec<RateKind> {
    vec![
        RateKind::Constant { lambda: 0.4 },
        RateKind::LinearIncreasing { a: 0.04, lambda: 0.4 },
        RateKind::ConcaveIncreasing { lambda: 0.4, a: 0.1, cap: Some(10.0) },
        RateKind::ConcaveIncreasing { lambda: 0.4, a: 0.1, cap: None },
        RateKind::StepIncreasing { lambda: 0.4, t0: 5.0 },
        RateKind::LinearDecreasing { lambda: 0.4, a: 0.03, lambda0: 0.1 },
        RateKind::ConvexDecreasing { lambda: 1.0 },
        RateKind::StepDecreasing { lambda: 0.4, t0: 5.0 },
        RateKind::Sinusoidal { lambda: 0.4, a: 1.0 },
        RateKind::Bathtub { lambda: 0.4, t1: 5.0, t2: 10.0, t3: 15.0 },
        RateKind::ZeroThenConstant { b: 2.0, lambda: 1.0 },
        RateKind::TwoPhaseConstant { lambda1: 0.5, lambda2: 1.0, switch_time: 1.0 },
        RateKind::PiecewiseConstant { breakpoints: vec![1.0, 3.0, 4.5], levels: vec![0.2, 0.0, 0.7, 0.3] },
        RateKind::Exponential { scale: 0.5, rate: -0.3, clamp: 10.0 },
        RateKind::Ramp { base: 0.1, slope: 0.05, until: 8.0 },
    ]
}

pub fn every_model() -> Vec<RateModel> {
    every_kind().into_iter().map(|k| RateModel::new(k).unwrap()).collect()
}

/// The six monotone families at the shipped Table-1 defaults.
pub fn monotone_families() -> Vec<(&'static str, RateKind, bool)> {
    vec![
        ("LinearIncreasing", RateKind::LinearIncreasing { a: 0.02, lambda: 0.4 }, true),
        ("ConcaveIncreasing", RateKind::ConcaveIncreasing { lambda: 0.4, a: 0.05, cap: Some(20.0) }, true),
        ("StepIncreasing", RateKind::StepIncreasing { lambda: 0.4, t0: 20.0 }, true),
        ("LinearDecreasing", RateKind::LinearDecreasing { lambda: 0.4, a: 0.015, lambda0: 0.1 }, false),
        ("ConvexDecreasing", RateKind::ConvexDecreasing { lambda: 0.4 }, false),
        ("StepDecreasing", RateKind::StepDecreasing { lambda: 0.4, t0: 20.0 }, false),
    ]
}
