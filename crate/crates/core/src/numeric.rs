//! Deterministic reductions shared by every norm.
//!
//! All sums go through [`kahan_sum`] in index order. Parallel code computes
//! per-item values first and reduces here, so results never depend on how
//! work was split across threads.

use crate::exponent::Exponent;

/// Compensated (Neumaier) summation in iteration order.
pub fn kahan_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// `(Σ w_i |v_i|^e)^{1/e}` for finite `e`, `max |v_i|` over nonzero weights for
/// `e = ∞`. Values are rescaled by their maximum first so large exponents
/// neither overflow nor underflow.
pub fn weighted_power_mean(values: &[f64], weights: &[f64], e: Exponent) -> f64 {
    debug_assert_eq!(values.len(), weights.len());
    let max = values
        .iter()
        .zip(weights)
        .filter(|(_, w)| **w > 0.0)
        .map(|(v, _)| v.abs())
        .fold(0.0_f64, f64::max);
    match e {
        Exponent::Infinity => max,
        Exponent::Finite(_) => {
            if max == 0.0 || !max.is_finite() {
                return max;
            }
            let ev = e.value();
            let s = kahan_sum(values.iter().zip(weights).map(|(v, w)| w * (v.abs() / max).powf(ev)));
            max * s.powf(1.0 / ev)
        }
    }
}

/// ℓ^e norm of a finite sequence.
pub fn lq_norm(values: &[f64], e: Exponent) -> f64 {
    let ones = vec![1.0; values.len()];
    weighted_power_mean(values, &ones, e)
}

/// Composite trapezoid weights for a strictly increasing node list.
pub fn trapezoid_weights(times: &[f64]) -> Vec<f64> {
    let n = times.len();
    let mut w = vec![0.0; n];
    for i in 1..n {
        let h = times[i] - times[i - 1];
        w[i - 1] += 0.5 * h;
        w[i] += 0.5 * h;
    }
    w
}

/// Least-squares slope of `y` against `x`.
pub fn fit_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = kahan_sum(x.iter().copied()) / n;
    let my = kahan_sum(y.iter().copied()) / n;
    let sxy = kahan_sum(x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)));
    let sxx = kahan_sum(x.iter().map(|a| (a - mx) * (a - mx)));
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kahan_recovers_small_terms() {
        let mut v = vec![1.0e16];
        v.extend(std::iter::repeat_n(1.0, 1000));
        v.push(-1.0e16);
        assert_eq!(kahan_sum(v), 1000.0);
    }

    #[test]
    fn lq_matches_closed_forms() {
        let v = [3.0, 4.0];
        assert!((lq_norm(&v, Exponent::integer(2)) - 5.0).abs() < 1e-15);
        assert_eq!(lq_norm(&v, Exponent::Infinity), 4.0);
        assert!((lq_norm(&v, Exponent::integer(1)) - 7.0).abs() < 1e-15);
    }

    #[test]
    fn huge_exponent_does_not_overflow() {
        let v = [1e200, 1e200];
        let n = lq_norm(&v, Exponent::integer(64));
        assert!((n / 1e200 - 2f64.powf(1.0 / 64.0)).abs() < 1e-12);
    }

    #[test]
    fn trapezoid_integrates_linear_exactly() {
        let t = [0.0, 0.5, 1.5, 2.0];
        let w = trapezoid_weights(&t);
        let integral: f64 = t.iter().zip(&w).map(|(x, w)| x * w).sum();
        assert!((integral - 2.0).abs() < 1e-15);
    }
}
