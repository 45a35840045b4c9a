//! Bracketed scalar root finding: bisection to a fixed width, then a few
//! guarded Newton steps.

use crate::error::{Error, Result};

pub(crate) const BRACKET_WIDTH: f64 = 1e-13;
const MAX_BISECTIONS: usize = 400;

/// Finds a root of `f` in `[lo, hi]`, given `f(lo)` and `f(hi)` of opposite
/// sign (zero counts as either sign). `df` is only used for the final polish
/// and every Newton iterate must stay inside the final bracket.
pub(crate) fn solve_bracketed<F, D>(f: F, df: D, mut lo: f64, mut hi: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if !(f_lo.is_finite() && f_hi.is_finite()) || f_lo.signum() == f_hi.signum() {
        return Err(Error::NotFound(format!(
            "no sign change on [{lo}, {hi}]: f(lo) = {f_lo}, f(hi) = {f_hi}"
        )));
    }

    let mut iterations = 0;
    while hi - lo > BRACKET_WIDTH && iterations < MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }

    let mut best = 0.5 * (lo + hi);
    let mut best_res = f(best).abs();
    let mut x = best;
    for _ in 0..4 {
        let d = df(x);
        if !(d.is_finite() && d != 0.0) {
            break;
        }
        let next = x - f(x) / d;
        if !(lo..=hi).contains(&next) {
            break;
        }
        let res = f(next).abs();
        if res < best_res {
            best = next;
            best_res = res;
        }
        if res == 0.0 {
            break;
        }
        x = next;
    }
    for end in [lo, hi] {
        let res = f(end).abs();
        if res < best_res {
            best = end;
            best_res = res;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_sqrt_two() {
        let r = solve_bracketed(|x| x * x - 2.0, |x| 2.0 * x, 0.0, 2.0).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn decreasing_function() {
        let r = solve_bracketed(|x| 1.0 - x.exp(), |x| -x.exp(), -1.0, 3.0).unwrap();
        assert!(r.abs() < 1e-15);
    }

    #[test]
    fn tangent_root_at_endpoint() {
        let r =
            solve_bracketed(|x| -(x - 1.0) * (x - 1.0), |x| -2.0 * (x - 1.0), 0.0, 1.0).unwrap();
        assert_eq!(r, 1.0);
    }

    #[test]
    fn rejects_missing_sign_change() {
        assert!(solve_bracketed(|x| x * x + 1.0, |x| 2.0 * x, -1.0, 1.0).is_err());
    }
}
