mod common;

use common::{every_kind, every_model};
use nhpp_sched::optimizer::{best_sequence_exhaustive, lpt, relative_sort, spt, PrecedenceSpec, SortOrder};
use nhpp_sched::sampler::{RngStream, SamplingMethod, ReplayPath};
use nhpp_sched::sim::{simulate_makespan, simulate_single_failure, simulate_with_source, SimOptions};
use nhpp_sched::theory::weighted_intensity_sum;
use nhpp_sched::{Monotonicity, Permutation, RateKind, RateModel, TaskBatch};
use proptest::prelude::*;

fn kind_index() -> impl Strategy<Value = usize> {
    0..every_kind().len()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn cumulative_is_additive(k in kind_index(), x in 0.0..60.0f64, y in 0.0..60.0f64, z in 0.0..60.0f64) {
        let m = &every_model()[k];
        let mut t = [x, y, z];
        t.sort_by(f64::total_cmp);
        let whole = m.cumulative_intensity(t[0], t[2]).unwrap();
        let parts = m.cumulative_intensity(t[0], t[1]).unwrap() + m.cumulative_intensity(t[1], t[2]).unwrap();
        prop_assert!((whole - parts).abs() < 1e-9, "{whole} vs {parts}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn inverse_round_trip(k in kind_index(), u in 0.0..1.0f64, t in 0.0..100.0f64) {
        let m = &every_model()[k];
        let x = u * m.cumulative_intensity(0.0, 100.0).unwrap();
        let s = m.inverse_cumulative(x).unwrap();
        if m.rate(s).unwrap() > 0.0 {
            let back = m.cumulative_intensity(0.0, s).unwrap();
            prop_assert!((back - x).abs() <= 1e-9, "Λ(Λ⁻¹({x})) = {back}");
        }
        let lt = m.cumulative_intensity(0.0, t).unwrap();
        prop_assert!(m.inverse_cumulative(lt).unwrap() <= t + 1e-9);
        // The bisection fallback agrees with the closed-form inverse.
        let b = m.inverse_cumulative_bisect(x).unwrap();
        prop_assert!((b - s).abs() < 1e-8, "bisection {b} vs {s}");
    }

    #[test]
    fn closed_form_matches_quadrature(k in kind_index(), x in 0.0..50.0f64, len in 0.0..30.0f64) {
        let m = &every_model()[k];
        let exact = m.cumulative_intensity(x, x + len).unwrap();
        let quad = m.cumulative_intensity_quadrature(x, x + len).unwrap();
        prop_assert!((exact - quad).abs() <= 1e-8 * exact.abs().max(1e-12) + 1e-14, "{exact} vs {quad}");
    }

    #[test]
    fn lipschitz_and_bounds_hold(k in kind_index(), t in 0.0..60.0f64, dt in 0.0..1.0f64) {
        let m = &every_model()[k];
        let meta = m.metadata();
        let (a, b) = (m.rate(t).unwrap(), m.rate(t + dt).unwrap());
        if let Some(l) = meta.lipschitz {
            prop_assert!((a - b).abs() <= l * dt + 1e-12);
        }
        let f = a / meta.lambda_bar;
        prop_assert!(f >= meta.f_minus - 1e-12);
        if let Some(fp) = meta.f_plus {
            prop_assert!(f <= fp + 1e-12);
        }
        prop_assert!(a >= 0.0);
    }

    #[test]
    fn sorted_orders_are_reverses(v in prop::collection::btree_set(1u32..1000, 1..9)) {
        let mut lengths: Vec<f64> = v.into_iter().map(|x| f64::from(x) / 10.0).collect();
        lengths.reverse();
        let mid = lengths.len() / 2;
        lengths.rotate_left(mid);
        let b = TaskBatch::new(lengths).unwrap();
        let s = spt(&b);
        let l = lpt(&b);
        let rev: Vec<usize> = s.order().iter().rev().copied().collect();
        prop_assert_eq!(l.order(), &rev[..]);
    }

    #[test]
    fn relative_sort_is_idempotent(v in prop::collection::vec(1u32..20, 2..8), pin in any::<prop::sample::Index>(), spt_order in any::<bool>()) {
        let b = TaskBatch::new(v.iter().map(|&x| f64::from(x)).collect()).unwrap();
        let n = b.len();
        let task = pin.index(n);
        let spec = PrecedenceSpec::new(vec![(task, n - 1 - task)]);
        let order = if spt_order { SortOrder::Spt } else { SortOrder::Lpt };
        let once = relative_sort(&b, &spec, order).unwrap();
        let reordered = TaskBatch::new(b.ordered(&once).unwrap()).unwrap();
        // Sorting the already-sorted batch (pin moved to its slot) changes nothing.
        let spec2 = PrecedenceSpec::new(vec![(n - 1 - task, n - 1 - task)]);
        let twice = relative_sort(&reordered, &spec2, order).unwrap();
        prop_assert!(twice.is_identity(), "{once} then {twice}");
    }

    #[test]
    fn makespan_at_least_total_work(k in kind_index(), seed in any::<u64>(), idx in 0u64..1000) {
        let m = &every_model()[k];
        let b = TaskBatch::new(vec![1.0, 2.5, 0.5]).unwrap();
        let p = Permutation::identity(3);
        let opts = SimOptions::default();
        let full = simulate_makespan(m, &b, &p, RngStream::new(seed, idx), &opts).unwrap();
        let single = simulate_single_failure(m, &b, &p, RngStream::new(seed, idx), &opts).unwrap();
        prop_assert!(full.makespan >= b.total() - 1e-12);
        // Same stream, so both see the same first arrival.
        prop_assert!(single.makespan <= full.makespan + 1e-12);
    }
}

#[test]
fn monotonicity_metadata_matches_probes() {
    for m in every_model() {
        let mono = m.metadata().monotonicity;
        let horizon = match mono {
            Monotonicity::StrictlyDecreasingOn { until } | Monotonicity::StrictlyIncreasingOn { until } => {
                until.unwrap_or(100.0)
            }
            _ => continue,
        };
        let probes: Vec<f64> = (0..=1000).map(|k| horizon * k as f64 / 1000.0).collect();
        let rates: Vec<f64> = probes.iter().map(|&t| m.rate(t).unwrap()).collect();
        for w in rates.windows(2) {
            let ok = match mono {
                Monotonicity::StrictlyDecreasingOn { .. } => w[1] < w[0],
                _ => w[1] > w[0],
            };
            assert!(ok, "{:?}: {} then {}", m.kind(), w[0], w[1]);
        }
    }
}

#[test]
fn replayed_path_fixes_the_makespan() {
    let b = TaskBatch::new(vec![1.0, 2.0]).unwrap();
    let p = Permutation::identity(2);
    let path = vec![0.5, 0.7, 2.9, 5.0];
    let run = || simulate_with_source(&mut ReplayPath::new(path.clone()), &b, &p, 1000, 1.0).unwrap();
    let first = run();
    assert_eq!(first, run());
    // Task 1 restarts at 0.5 and 0.7, ends at 1.7; task 2 restarts at 2.9,
    // ends at 4.9, before the last arrival.
    assert!((first.makespan - 4.9).abs() < 1e-12);
    assert_eq!(first.restarts_per_task, vec![2, 1]);
}

#[test]
fn sampler_streams_are_deterministic() {
    for m in every_model() {
        for method in [SamplingMethod::Inversion, SamplingMethod::Thinning] {
            if method == SamplingMethod::Thinning && m.metadata().rate_max().is_none() {
                // No majorant to thin from.
                assert!(nhpp_sched::sampler::sample_path(&m, 20.0, method, &mut RngStream::new(9, 4)).is_err());
                continue;
            }
            let a = nhpp_sched::sampler::sample_path(&m, 20.0, method, &mut RngStream::new(9, 4)).unwrap();
            let b = nhpp_sched::sampler::sample_path(&m, 20.0, method, &mut RngStream::new(9, 4)).unwrap();
            assert_eq!(a, b);
            assert!(a.windows(2).all(|w| w[0] < w[1]));
        }
    }
}

/// Adjacent swaps that put the longer task first raise `S` for a strictly
/// decreasing `f` and lower it for a strictly increasing one.
#[test]
fn weighted_sums_move_strictly_under_swaps() {
    let dec = RateModel::new(RateKind::ConvexDecreasing { lambda: 1.0 }).unwrap();
    let inc = RateModel::new(RateKind::Ramp { base: 0.1, slope: 0.05, until: 100.0 }).unwrap();
    let b = TaskBatch::new(vec![0.3, 1.1, 1.7, 2.0, 2.6]).unwrap();
    for p in Permutation::all(5) {
        for k in 0..4 {
            let (i, j) = (p.order()[k], p.order()[k + 1]);
            if b.lengths()[i] >= b.lengths()[j] {
                continue;
            }
            let mut swapped = p.order().to_vec();
            swapped.swap(k, k + 1);
            let q = Permutation::new(swapped).unwrap();
            let (sd, qd) = (weighted_intensity_sum(&dec, &b, &p).unwrap(), weighted_intensity_sum(&dec, &b, &q).unwrap());
            assert!(sd < qd, "decreasing: {p} {sd} vs {q} {qd}");
            let (si, qi) = (weighted_intensity_sum(&inc, &b, &p).unwrap(), weighted_intensity_sum(&inc, &b, &q).unwrap());
            assert!(si > qi, "increasing: {p} {si} vs {q} {qi}");
        }
    }
    // Hence the sorted orders are the unique argmins.
    let best_dec = best_sequence_exhaustive(&b, None, |p| weighted_intensity_sum(&dec, &b, p)).unwrap();
    assert!(best_dec.best.is_identity());
    let best_inc = best_sequence_exhaustive(&b, None, |p| weighted_intensity_sum(&inc, &b, p)).unwrap();
    assert_eq!(best_inc.best, Permutation::reversal(5));
}

#[test]
fn exhaustive_scan_of_invariant_evaluator_is_flat() {
    let b = TaskBatch::new(vec![2.0, 4.0, 6.0, 8.0]).unwrap();
    let r = best_sequence_exhaustive(&b, None, |p| Ok(nhpp_sched::exact::constant_rate_batch(0.4, &TaskBatch::new(b.ordered(p)?)?)?)).unwrap();
    assert_eq!(r.count, 24);
    assert!(r.values.iter().all(|(_, v)| (v - r.best_value).abs() < 1e-9));
}
