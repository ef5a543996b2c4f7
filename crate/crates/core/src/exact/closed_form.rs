use crate::batch::TaskBatch;
use crate::error::{Error, Result};

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be finite and > 0, got {v}")))
    }
}

/// Expected completion time of one task of length `a` under a constant
/// disruption rate: `(e^{λa} − 1)/λ`.
pub fn constant_rate_single(lambda: f64, a: f64) -> Result<f64> {
    positive("lambda", lambda)?;
    positive("task length", a)?;
    Ok((lambda * a).exp_m1() / lambda)
}

/// `(e^{λa} − 1)/λ`, continued to `a` at `λ = 0`.
pub(crate) fn single_or_limit(lambda: f64, a: f64) -> f64 {
    if lambda > 0.0 {
        (lambda * a).exp_m1() / lambda
    } else {
        a
    }
}

/// Expected makespan of a batch at constant rate; independent of order.
pub fn constant_rate_batch(lambda: f64, batch: &TaskBatch) -> Result<f64> {
    positive("lambda", lambda)?;
    Ok(batch.lengths().iter().map(|&a| (lambda * a).exp_m1() / lambda).sum())
}

/// Both two-task expected makespans when the rate is zero on `[0, b]` and
/// `λ` afterwards (`b > a`): `(a first, b first)`.
pub fn special_two_task(a: f64, b: f64, lambda: f64) -> Result<(f64, f64)> {
    positive("a", a)?;
    positive("lambda", lambda)?;
    if !(b > a && b.is_finite()) {
        return Err(Error::Domain(format!("need b > a, got a = {a}, b = {b}")));
    }
    let a_first = b + ((lambda * b).exp() - (lambda * (b - a)).exp()) / lambda;
    let b_first = b + (lambda * a).exp_m1() / lambda;
    Ok((a_first, b_first))
}

/// `E[τ_{a,b}] − E[τ_{b,a}]` when the rate is `λ1` during the first task and
/// `λ2` during the second. Positive means longest-first is better.
pub fn two_phase_delta(a: f64, b: f64, lambda1: f64, lambda2: f64) -> Result<f64> {
    positive("a", a)?;
    positive("lambda1", lambda1)?;
    positive("lambda2", lambda2)?;
    if !(b >= a && b.is_finite()) {
        return Err(Error::Domain(format!("need b >= a, got a = {a}, b = {b}")));
    }
    let first = ((lambda1 * a).exp() - (lambda1 * b).exp()) / lambda1;
    let second = ((lambda2 * a).exp() - (lambda2 * b).exp()) / lambda2;
    Ok(first - second)
}

/// Analytic `dΔ/dε` at `b = a + ε`, `λ2 = λ1 + δ`:
/// `e^{λ1 a}(e^{δa}e^{(λ1+δ)ε} − e^{λ1 ε})`.
pub fn two_phase_delta_d_epsilon(a: f64, lambda1: f64, delta: f64, epsilon: f64) -> f64 {
    (lambda1 * a).exp() * ((delta * a).exp() * ((lambda1 + delta) * epsilon).exp() - (lambda1 * epsilon).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    #[test]
    fn single_task_values() {
        assert!((constant_rate_single(1.0, 1.0).unwrap() - (E - 1.0)).abs() < 1e-14);
        assert!((constant_rate_single(0.5, 2.0).unwrap() - 2.0 * (E - 1.0)).abs() < 1e-13);
        assert!((constant_rate_single(1e-8, 3.0).unwrap() - 3.0).abs() < 1e-6);
        assert!(constant_rate_single(0.0, 1.0).is_err());
        assert!(constant_rate_single(-1.0, 1.0).is_err());
    }

    #[test]
    fn batch_values() {
        let b = TaskBatch::new(vec![1.0, 2.0]).unwrap();
        let v = constant_rate_batch(1.0, &b).unwrap();
        assert!((v - 8.107_337).abs() < 1e-6);
        assert_eq!(constant_rate_batch(0.7, &TaskBatch::new(vec![]).unwrap()).unwrap(), 0.0);
        let b = TaskBatch::new(vec![2.0, 4.0, 6.0, 8.0]).unwrap();
        let direct: f64 = [2.0f64, 4.0, 6.0, 8.0].iter().map(|a| ((0.4 * a).exp() - 1.0) / 0.4).sum();
        assert!((constant_rate_batch(0.4, &b).unwrap() - direct).abs() < 1e-12);
    }

    #[test]
    fn zero_then_constant_values() {
        let (ab, ba) = special_two_task(1.0, 2.0, 1.0).unwrap();
        assert!((ab - (2.0 + E * E - E)).abs() < 1e-12);
        assert!((ab - 6.670_774).abs() < 1e-6);
        assert!((ba - 3.718_282).abs() < 1e-6);
        assert!(ba < ab);
        let (ab, ba) = special_two_task(2.0 - 1e-6, 2.0, 1.0).unwrap();
        assert!((ab - ba).abs() < 1e-4);
        assert!(special_two_task(2.0, 2.0, 1.0).is_err());
        assert!(special_two_task(3.0, 2.0, 1.0).is_err());
    }

    #[test]
    fn two_phase_values() {
        assert_eq!(two_phase_delta(1.0, 2.0, 0.7, 0.7).unwrap(), 0.0);
        assert_eq!(two_phase_delta(1.5, 1.5, 0.3, 0.9).unwrap(), 0.0);
        let d = two_phase_delta(1.0, 2.0, 0.5, 1.0).unwrap();
        // (e^0.5 − e)/0.5 − (e − e²) = 2.531653155 (evaluated independently).
        assert!((d - 2.531_653_155).abs() < 1e-9, "{d}");
    }
}
