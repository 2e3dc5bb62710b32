//! Lambert W on the nonnegative reals and the few closed forms built on it.

use std::f64::consts::{E, PI};

use crate::{Error, Result};

const MAX_HALLEY_ITERATIONS: usize = 100;
const MAX_BISECTION_ITERATIONS: usize = 2000;

/// Result of evaluating the principal branch `W₀`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WEvaluation {
    pub value: f64,
    /// `|W·e^W − x|` at the returned value.
    pub residual: f64,
    pub iterations: usize,
}

fn residual(w: f64, x: f64) -> f64 {
    let direct = w * w.exp() - x;
    if direct.is_finite() {
        direct.abs()
    } else {
        x * (w * (w - x.ln()).exp() - 1.0).abs()
    }
}

fn tolerance(x: f64) -> f64 {
    1e-13 * x.max(1.0)
}

/// Principal branch of the Lambert W function on `x ≥ 0`.
///
/// Halley iteration on `w − x·e^{−w}` (the defining equation scaled by
/// `e^{−w}` so nothing overflows), seeded with `ln(1+x)` below `e` and with
/// `ln x − ln ln x` above. Falls back to bisection if Halley stalls.
pub fn lambert_w(x: f64) -> Result<WEvaluation> {
    if !(x.is_finite() && x >= 0.0) {
        return Err(Error::domain("lambert_w", x, "finite and >= 0"));
    }
    if x == 0.0 {
        return Ok(WEvaluation {
            value: 0.0,
            residual: 0.0,
            iterations: 0,
        });
    }

    let mut w = if x < E {
        x.ln_1p()
    } else {
        let l = x.ln();
        l - l.ln()
    };

    let mut iterations = 0;
    while iterations < MAX_HALLEY_ITERATIONS {
        iterations += 1;
        let f = w - x * (-w).exp();
        let d1 = w + 1.0;
        let d2 = w + 2.0;
        let step = f / (d1 - f * d2 / (2.0 * d1));
        if !step.is_finite() {
            break;
        }
        let next = w - step;
        let converged = (next - w).abs() <= 4.0 * f64::EPSILON * next.abs().max(1e-300);
        w = next;
        if converged {
            break;
        }
    }

    let r = residual(w, x);
    if w.is_finite() && w >= 0.0 && r <= tolerance(x) {
        return Ok(WEvaluation {
            value: w,
            residual: r,
            iterations,
        });
    }

    bisect_w(x, iterations)
}

fn bisect_w(x: f64, prior: usize) -> Result<WEvaluation> {
    // W(x) ≤ ln(1 + x) on x ≥ 0.
    let mut lo = 0.0_f64;
    let mut hi = x.ln_1p() + 1.0;
    let mut iterations = prior;
    for _ in 0..MAX_BISECTION_ITERATIONS {
        iterations += 1;
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if mid - x * (-mid).exp() < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (rl, rh) = (residual(lo, x), residual(hi, x));
    let (value, r) = if rl <= rh { (lo, rl) } else { (hi, rh) };
    if r <= tolerance(x) {
        Ok(WEvaluation {
            value,
            residual: r,
            iterations,
        })
    } else {
        Err(Error::Convergence {
            what: "lambert_w",
            iterations,
        })
    }
}

/// Truncated large-argument expansion of `W(x)`.
///
/// `order` 0 is `ln x`, 1 is `ln x − ln ln x`, 2 adds `ln ln x / ln x`.
pub fn lambert_w_asymptotic(x: f64, order: u32) -> Result<f64> {
    if !(x.is_finite() && x > E) {
        return Err(Error::domain("lambert_w_asymptotic", x, "finite and > e"));
    }
    let l1 = x.ln();
    let l2 = l1.ln();
    match order {
        0 => Ok(l1),
        1 => Ok(l1 - l2),
        2 => Ok(l1 - l2 + l2 / l1),
        _ => Err(Error::domain(
            "lambert_w_asymptotic order",
            order as f64,
            "0, 1 or 2",
        )),
    }
}

/// Unique solution of `x = a·e^{−x} + b`, i.e. `b + W(a·e^{−b})`.
pub fn solve_exp_equation(a: f64, b: f64) -> Result<f64> {
    if !(a.is_finite() && a > 0.0) {
        return Err(Error::domain("solve_exp_equation a", a, "finite and > 0"));
    }
    if !(b.is_finite() && b > 0.0) {
        return Err(Error::domain("solve_exp_equation b", b, "finite and > 0"));
    }
    Ok(b + lambert_w(a * (-b).exp())?.value)
}

fn stirling_term(k: u32) -> f64 {
    let k = k as f64;
    (2.0 * PI * k).sqrt() * (1.0 / (12.0 * k)).exp() / k.exp2()
}

/// `sup_{k ≥ 1} √(2πk)·e^{1/(12k)} / 2^k`.
///
/// The sequence is decreasing from `k = 1`; the maximum over the first 64
/// terms is the supremum.
pub fn stirling_supremum() -> f64 {
    (1..=64)
        .map(stirling_term)
        .fold(f64::NEG_INFINITY, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bisection_oracle(x: f64) -> f64 {
        let (mut lo, mut hi) = (0.0_f64, x.max(1.0));
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid * mid.exp() < x {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    #[test]
    fn exact_points() {
        assert_eq!(lambert_w(0.0).unwrap().value, 0.0);
        assert_eq!(lambert_w(0.0).unwrap().residual, 0.0);
        assert!((lambert_w(E).unwrap().value - 1.0).abs() < 1e-15);
    }

    #[test]
    fn omega_constant_matches_bisection() {
        let oracle = bisection_oracle(1.0);
        assert!((oracle - 0.567_143_290_409_784).abs() < 1e-12);
        let w = lambert_w(1.0).unwrap();
        assert!((w.value - oracle).abs() < 1e-12);
        assert!(w.residual <= 1e-13);
    }

    #[test]
    fn residual_on_log_grid() {
        let mut xs = vec![0.0];
        xs.extend((-3..=12).map(|k| 10f64.powi(k)));
        for x in xs {
            let w = lambert_w(x).unwrap();
            assert!(w.value >= 0.0);
            assert!(w.residual <= 1e-13 * x.max(1.0), "x={x} r={}", w.residual);
            assert!(w.iterations <= MAX_HALLEY_ITERATIONS);
        }
    }

    #[test]
    fn tiny_and_huge_arguments() {
        let w = lambert_w(1e-300).unwrap();
        assert!((w.value - 1e-300).abs() < 1e-310);
        let w = lambert_w(1e300).unwrap();
        assert!(w.value > 680.0 && w.value < 700.0);
        assert!(w.residual <= 1e-13 * 1e300);
    }

    #[test]
    fn bisection_fallback_agrees() {
        for x in [0.5, 3.0, 1e5] {
            let b = bisect_w(x, 0).unwrap();
            assert!((b.value - lambert_w(x).unwrap().value).abs() < 1e-12);
        }
    }

    #[test]
    fn domain_errors() {
        assert!(lambert_w(-1e-9).is_err());
        assert!(lambert_w(f64::NAN).is_err());
        assert!(lambert_w(f64::INFINITY).is_err());
        assert!(lambert_w_asymptotic(E, 0).is_err());
        assert!(lambert_w_asymptotic(2.0, 1).is_err());
        assert!(lambert_w_asymptotic(100.0, 3).is_err());
        assert!(solve_exp_equation(0.0, 1.0).is_err());
        assert!(solve_exp_equation(1.0, -1.0).is_err());
    }

    #[test]
    fn asymptotic_truncations() {
        let x = E.powf(E);
        assert!((lambert_w_asymptotic(x, 0).unwrap() - E).abs() < 1e-12);
        let x = 1e12_f64;
        let expected = x.ln() - x.ln().ln();
        assert_eq!(lambert_w_asymptotic(x, 1).unwrap(), expected);
        let w = lambert_w(1e6).unwrap().value;
        let a = lambert_w_asymptotic(1e6, 2).unwrap();
        assert!(((a - w) / w).abs() < 0.02);
    }

    #[test]
    fn exp_equation() {
        // a = e, b → 0⁺ gives W(e) = 1.
        assert!((solve_exp_equation(E, 1e-12).unwrap() - 1.0).abs() < 1e-11);

        let mut fixed = 1.0_f64;
        for _ in 0..200 {
            fixed = (-fixed).exp() + 1.0;
        }
        assert!((fixed - 1.278_464_542_761_074).abs() < 1e-14);
        let x = solve_exp_equation(1.0, 1.0).unwrap();
        assert!((x - fixed).abs() < 1e-12);

        let x = solve_exp_equation(5.0, 2.0).unwrap();
        assert!((x - 5.0 * (-x).exp() - 2.0).abs() <= 1e-12);
    }

    #[test]
    fn stirling_supremum_is_first_term() {
        let terms: Vec<f64> = (1..=64).map(stirling_term).collect();
        assert!(terms.windows(2).all(|w| w[1] < w[0]));
        let s = stirling_supremum();
        let closed = (PI / 2.0).sqrt() * (1.0f64 / 12.0).exp();
        assert!((s - closed).abs() < 1e-15);
        assert!((s - 1.362_232_211_170_422_7).abs() < 1e-14);
        assert!(s >= 1.0);
        assert!(s >= stirling_term(3));
    }
}
