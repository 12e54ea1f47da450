//! Bracketing root finders for the scalar reductions of the equilibrium
//! conditions.

use crate::error::LabError;

/// Bisection on a sign-changing bracket, run to machine precision.
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, mut lo: f64, mut hi: f64, max_iter: usize) -> Result<f64, LabError> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.is_nan() || fhi.is_nan() || flo.signum() == fhi.signum() {
        return Err(LabError::NonConvergence(format!("no sign change on [{lo}, {hi}]")));
    }
    for _ in 0..max_iter {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Ok(mid);
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.is_nan() {
            return Err(LabError::NonConvergence(format!("objective undefined at {mid}")));
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Err(LabError::NonConvergence(format!("bisection did not converge in {max_iter} iterations")))
}

/// Sign-change brackets of `f` on a uniform grid of `points` nodes.
pub fn brackets<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, points: usize) -> Vec<(f64, f64)> {
    let points = points.max(2);
    let step = (hi - lo) / (points - 1) as f64;
    let mut out = Vec::new();
    let mut prev = (lo, f(lo));
    for j in 1..points {
        let x = if j == points - 1 { hi } else { lo + step * j as f64 };
        let fx = f(x);
        if prev.1.is_finite() && fx.is_finite() {
            if prev.1 == 0.0 {
                out.push((prev.0, prev.0));
            } else if fx != 0.0 && prev.1.signum() != fx.signum() {
                out.push((prev.0, x));
            }
        }
        prev = (x, fx);
    }
    if prev.1 == 0.0 {
        out.push((prev.0, prev.0));
    }
    out
}

/// Every root found by scanning `[lo, hi]` and refining each bracket.
pub fn all_roots<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, points: usize, max_iter: usize) -> Vec<f64> {
    brackets(&mut f, lo, hi, points)
        .into_iter()
        .filter_map(|(a, b)| if a == b { Some(a) } else { bisect(&mut f, a, b, max_iter).ok() })
        .collect()
}

/// Root of an increasing function, expanding the bracket geometrically from
/// `(lo, hi)` until it straddles zero.
pub fn increasing_root<F: FnMut(f64) -> f64>(mut f: F, mut lo: f64, mut hi: f64, max_iter: usize) -> Result<f64, LabError> {
    let mut width = (hi - lo).max(1.0);
    for _ in 0..200 {
        if f(lo) <= 0.0 {
            break;
        }
        lo -= width;
        width *= 2.0;
    }
    width = (hi - lo).max(1.0);
    for _ in 0..200 {
        if f(hi) >= 0.0 {
            break;
        }
        hi += width;
        width *= 2.0;
    }
    bisect(f, lo, hi, max_iter)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_sqrt_two() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 200).unwrap();
        assert!((r - std::f64::consts::SQRT_2).abs() < 1e-14);
    }

    #[test]
    fn finds_all_roots_of_cubic() {
        let r = all_roots(|x| (x - 1.0) * (x + 0.5) * (x - 3.0), -2.0, 4.0, 1000, 200);
        assert_eq!(r.len(), 3);
        for (a, b) in r.iter().zip([-0.5, 1.0, 3.0]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn expands_bracket() {
        let r = increasing_root(|x| x - 1e6, 0.0, 1.0, 400).unwrap();
        assert!((r - 1e6).abs() < 1e-6);
    }

    #[test]
    fn rejects_missing_sign_change() {
        assert!(bisect(|x| x * x + 1.0, -1.0, 1.0, 100).is_err());
    }
}
