//! Safeguarded scalar root finding on a sign-changing bracket.

use crate::error::{Error, Result};

pub const MAX_ITER: usize = 100;

/// Root of `f` in `[lo, hi]` by secant steps, falling back to bisection
/// whenever a step leaves the bracket or fails to halve it.
///
/// Iterates until the bracket is narrower than `xtol` and then keeps going
/// while it still shrinks, so the result is accurate to the last bits that
/// `f` can resolve. Returns `Error::InvalidParameter` when `f(lo)` and
/// `f(hi)` share a sign.
pub fn find_root<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, xtol: f64) -> Result<f64> {
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() || fa.is_nan() || fb.is_nan() {
        return Err(Error::InvalidParameter(format!(
            "root not bracketed: f({lo}) = {fa}, f({hi}) = {fb}"
        )));
    }
    let mut width = (b - a).abs();
    for _ in 0..MAX_ITER {
        let secant = b - fb * (b - a) / (fb - fa);
        let inside = secant > a.min(b) && secant < a.max(b);
        let x = if inside { secant } else { 0.5 * (a + b) };
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
        let new_width = (b - a).abs();
        if new_width > 0.5 * width {
            // slow secant progress: force a bisection
            let m = 0.5 * (a + b);
            let fm = f(m);
            if fm == 0.0 {
                return Ok(m);
            }
            if fm.signum() == fa.signum() {
                a = m;
                fa = fm;
            } else {
                b = m;
                fb = fm;
            }
        }
        let new_width = (b - a).abs();
        let floor = 4.0 * f64::EPSILON * a.abs().max(b.abs());
        if new_width <= floor || (new_width < xtol && new_width >= width) {
            break;
        }
        width = new_width;
    }
    let width = (b - a).abs();
    if width > xtol {
        return Err(Error::NoConvergence(MAX_ITER));
    }
    Ok(if fa.abs() < fb.abs() { a } else { b })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_root() {
        let r = find_root(|x| x * x * x - 2.0, 0.0, 3.0, 1e-12).unwrap();
        assert!((r - 2f64.cbrt()).abs() < 1e-14);
    }

    #[test]
    fn decreasing_function() {
        let r = find_root(|x: f64| x.cos() - x, 0.0, 1.0, 1e-12).unwrap();
        assert!((r.cos() - r).abs() < 1e-15);
    }

    #[test]
    fn unbracketed() {
        assert!(find_root(|x| x * x + 1.0, -1.0, 1.0, 1e-12).is_err());
    }

    #[test]
    fn flat_tail_needs_bisection() {
        let r = find_root(|x: f64| (x - 0.3).powi(3) * 1e6, -10.0, 10.0, 1e-12).unwrap();
        assert!((r - 0.3).abs() < 1e-4);
    }
}
