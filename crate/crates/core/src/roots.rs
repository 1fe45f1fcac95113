//! Scalar root finding for monotone increasing functions.

use crate::error::{Error, Result};

/// Solves `f(x) = target` for an increasing `f` with derivative `df`.
///
/// Newton steps are kept inside a shrinking bracket; any step that leaves it is
/// replaced by bisection. The bracket `[lo, hi]` must contain the root.
pub fn solve_increasing<F, D>(f: F, df: D, target: f64, lo: f64, hi: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let (mut a, mut b) = (lo, hi);
    let fa = f(a) - target;
    let fb = f(b) - target;
    if !(fa.is_finite() && fb.is_finite()) {
        return Err(Error::NumericalFailure(format!("non-finite values on bracket [{lo}, {hi}]")));
    }
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa > 0.0 || fb < 0.0 {
        return Err(Error::Data(format!(
            "root of target {target} not bracketed in [{lo}, {hi}] (residuals {fa:e}, {fb:e})"
        )));
    }
    let mut x = 0.5 * (a + b);
    for _ in 0..200 {
        let r = f(x) - target;
        if r == 0.0 {
            return Ok(x);
        }
        if r < 0.0 {
            a = x;
        } else {
            b = x;
        }
        let d = df(x);
        let mut next = if d > 0.0 && d.is_finite() { x - r / d } else { f64::NAN };
        if !(next > a && next < b) {
            next = 0.5 * (a + b);
        }
        let step = (next - x).abs();
        x = next;
        if step <= tol * x.abs().max(1.0) || b - a <= tol * x.abs().max(1.0) {
            // One more Newton correction polishes the last digits.
            let r = f(x) - target;
            let d = df(x);
            if d > 0.0 && d.is_finite() {
                let polished = x - r / d;
                if polished >= a && polished <= b && (f(polished) - target).abs() <= r.abs() {
                    return Ok(polished);
                }
            }
            return Ok(x);
        }
    }
    Err(Error::NumericalFailure(format!("no convergence for target {target} in [{lo}, {hi}]")))
}

/// Expands `[lo, hi]` geometrically around its center until it brackets `target`.
pub fn expand_bracket<F: Fn(f64) -> f64>(f: F, target: f64, lo: f64, hi: f64, max_doublings: usize) -> Result<(f64, f64)> {
    let (mut a, mut b) = (lo.min(hi), lo.max(hi));
    for _ in 0..=max_doublings {
        if f(a) <= target && f(b) >= target {
            return Ok((a, b));
        }
        let w = (b - a).max(1e-12);
        if f(a) > target {
            a -= w;
        }
        if f(b) < target {
            b += w;
        }
    }
    Err(Error::Data(format!("could not bracket target {target} starting from [{lo}, {hi}]")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cube_root() {
        let x = solve_increasing(|x| x * x * x, |x| 3.0 * x * x, 27.0, 0.0, 10.0, 1e-15).unwrap();
        assert!((x - 3.0).abs() < 1e-14);
    }

    #[test]
    fn flat_derivative_falls_back_to_bisection() {
        let x = solve_increasing(|x| x.powi(3), |_| 0.0, 0.125, -1.0, 1.0, 1e-14).unwrap();
        assert!((x - 0.5).abs() < 1e-12);
    }

    #[test]
    fn unbracketed_target_is_data_error() {
        let e = solve_increasing(|x| x, |_| 1.0, 5.0, 0.0, 1.0, 1e-14).unwrap_err();
        assert!(matches!(e, Error::Data(_)));
    }

    #[test]
    fn bracket_expansion() {
        let (a, b) = expand_bracket(|x| x, 7.5, 0.0, 1.0, 10).unwrap();
        assert!(a <= 7.5 && b >= 7.5);
    }
}
