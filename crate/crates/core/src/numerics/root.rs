//! Bracketing root finder: bisection with an opportunistic secant pick.

use crate::error::CoreError;

/// Finds a root of `f` in [lo, hi] to absolute x-tolerance `tol`.
///
/// Requires a sign change on the bracket. Each iteration tries the secant
/// point; if it falls safely inside the current bracket it is used, otherwise
/// the midpoint is, so convergence is never worse than bisection.
pub fn find_root(
    mut f: impl FnMut(f64) -> f64,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<f64, CoreError> {
    let (mut a, mut b) = (lo.min(hi), lo.max(hi));
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() || fa.is_nan() || fb.is_nan() {
        return Err(CoreError::NoBracket { lo, hi });
    }

    for _ in 0..200 {
        if b - a <= tol {
            break;
        }
        let mid = 0.5 * (a + b);
        // secant candidate, accepted only if it lands strictly inside
        // the middle 90% of the bracket
        let sec = b - fb * (b - a) / (fb - fa);
        let margin = 0.05 * (b - a);
        let x = if sec.is_finite() && sec > a + margin && sec < b - margin {
            sec
        } else {
            mid
        };
        if x <= a || x >= b {
            break; // bracket exhausted in f64
        }
        let fx = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if fx.signum() == fa.signum() {
            a = x;
            fa = fx;
        } else {
            b = x;
            fb = fx;
        }
    }
    Ok(0.5 * (a + b))
}
