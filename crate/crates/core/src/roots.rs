//! Safeguarded Newton iteration for monotone decreasing functions.

use crate::error::{Error, Result};

pub const MAX_ITER: usize = 200;
pub const REL_TOL: f64 = 1e-12;

/// Root of a decreasing function `f` with `f(lo) >= 0`.
///
/// `f` returns `(value, derivative)`. The upper end of the bracket is found
/// by geometric expansion from `hint`; each Newton step that leaves the
/// bracket is replaced by bisection.
pub fn solve_decreasing<F>(f: F, lo: f64, hint: f64) -> Result<f64>
where
    F: Fn(f64) -> (f64, f64),
{
    let (f_lo, _) = f(lo);
    if f_lo.is_nan() || f_lo < 0.0 {
        return Err(Error::argument(format!("root bracket: f({lo}) = {f_lo} must be non-negative")));
    }
    if f_lo == 0.0 {
        return Ok(lo);
    }
    let mut lo = lo;
    let mut hi = if hint > lo { hint } else { lo + 1.0 };
    let mut expansions = 0;
    loop {
        let (v, _) = f(hi);
        if v <= 0.0 {
            break;
        }
        let width = (hi - lo).max(1.0);
        lo = hi;
        hi = lo + 2.0 * width;
        expansions += 1;
        if expansions > MAX_ITER || !hi.is_finite() {
            return Err(Error::numeric("could not bracket root", v));
        }
    }

    let mut x = 0.5 * (lo + hi);
    let mut residual = f64::INFINITY;
    for _ in 0..MAX_ITER {
        let (v, d) = f(x);
        residual = v.abs();
        if v == 0.0 {
            return Ok(x);
        }
        if v > 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let newton = x - v / d;
        let next = if newton.is_finite() && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        let scale = REL_TOL * x.abs().max(1.0);
        if (next - x).abs() <= scale || hi - lo <= scale {
            return Ok(next);
        }
        x = next;
    }
    Err(Error::numeric(format!("root finding did not converge in {MAX_ITER} iterations"), residual))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_simple_decreasing() {
        let r = solve_decreasing(|x: f64| (2.0 - x * x, -2.0 * x), 0.0, 1.0).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn expands_bracket() {
        let r = solve_decreasing(|x: f64| (1e6 - x, -1.0), 0.0, 1.0).unwrap();
        assert!((r - 1e6).abs() < 1e-6);
    }

    #[test]
    fn bisection_fallback_for_bad_derivative() {
        // derivative deliberately wrong: Newton steps leave the bracket
        let r = solve_decreasing(|x: f64| (3.0 - x, 1e-9), 0.0, 10.0).unwrap();
        assert!((r - 3.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_lower_end() {
        assert!(solve_decreasing(|x: f64| (-1.0 - x, -1.0), 0.0, 1.0).is_err());
    }
}
