//! Bracketing and bisection for monotone root finding.

use crate::error::{Error, Result};

/// Expand `[lo, hi]` by doubling `hi - lo` until `f(hi) >= 0`, assuming
/// `f(lo) <= 0` and `f` non-decreasing. Gives up once `hi > cap`.
pub fn expand_upper<F: Fn(f64) -> f64>(f: &F, lo: f64, mut hi: f64, cap: f64) -> Result<f64> {
    if hi <= lo {
        hi = lo + lo.abs().max(1.0);
    }
    let mut width = hi - lo;
    while f(hi) < 0.0 {
        width *= 2.0;
        hi = lo + width;
        if hi > cap {
            return Err(Error::Numeric(format!(
                "failed to bracket a root below {cap:e}"
            )));
        }
    }
    Ok(hi)
}

/// Bisection on a non-decreasing function with `f(lo) <= 0 <= f(hi)`.
/// Stops when the bracket's relative width falls below `rel_tol`.
pub fn bisect<F: Fn(f64) -> f64>(f: &F, mut lo: f64, mut hi: f64, rel_tol: f64) -> f64 {
    debug_assert!(lo <= hi);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= rel_tol * hi.abs().max(lo.abs()) {
            break;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_cube_root() {
        let f = |x: f64| x * x * x - 2.0;
        let hi = expand_upper(&f, 0.0, 1.0, 1e12).unwrap();
        let r = bisect(&f, 0.0, hi, 1e-15);
        assert!((r - 2f64.powf(1.0 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn bracket_failure_reported() {
        let f = |_: f64| -1.0;
        assert!(expand_upper(&f, 0.0, 1.0, 1e6).is_err());
    }
}
