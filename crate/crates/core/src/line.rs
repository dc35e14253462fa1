//! One-dimensional convex minimization along a search direction.
//!
//! Callers supply `c -> (F'(c), F''(c))` for a convex objective `F`. The
//! solver is Newton's method safeguarded by bisection on the sign of `F'`.

use crate::error::{Error, Result};

const MAX_ITERS: usize = 500;
const MAX_EXPANSION: f64 = 1e15;

/// When to accept an iterate inside the bracket `[a, b]` around the root of
/// `F'`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Stop {
    /// Accept once `|F'(c)| * (b - a) <= gap`. By convexity this bounds
    /// `F(c) - min F`.
    pub gap: f64,
    /// Accept once `|F'(c)| <= deriv`.
    pub deriv: f64,
}

/// Minimize `F` over `[lo, hi]`.
pub(crate) fn minimize_on_interval<D>(deriv: D, lo: f64, hi: f64, stop: Stop) -> Result<f64>
where
    D: Fn(f64) -> (f64, f64),
{
    let (d_lo, _) = deriv(lo);
    check(d_lo)?;
    if d_lo >= 0.0 {
        return Ok(lo);
    }
    let (d_hi, _) = deriv(hi);
    check(d_hi)?;
    if d_hi <= 0.0 {
        return Ok(hi);
    }
    let start = if lo < 0.0 && hi > 0.0 {
        0.0
    } else {
        0.5 * (lo + hi)
    };
    root_in_bracket(&deriv, lo, hi, start, stop)
}

/// Minimize `F` over the whole line. The caller has ruled out objectives
/// that decrease forever; if the bracket still cannot be closed the
/// objective is reported unbounded.
pub(crate) fn minimize_unbounded<D>(deriv: D, stop: Stop) -> Result<f64>
where
    D: Fn(f64) -> (f64, f64),
{
    let (d0, _) = deriv(0.0);
    check(d0)?;
    if d0.abs() <= stop.deriv || d0 == 0.0 {
        return Ok(0.0);
    }
    let dir = if d0 < 0.0 { 1.0 } else { -1.0 };
    let mut inner = 0.0;
    let mut outer = dir;
    loop {
        let (d, _) = deriv(outer);
        check(d)?;
        if d * dir >= 0.0 {
            break;
        }
        inner = outer;
        outer *= 2.0;
        if outer.abs() > MAX_EXPANSION {
            return Err(Error::Unbounded);
        }
    }
    let (lo, hi) = if dir > 0.0 {
        (inner, outer)
    } else {
        (outer, inner)
    };
    let (d_end, _) = deriv(outer);
    if d_end == 0.0 {
        return Ok(outer);
    }
    root_in_bracket(&deriv, lo, hi, 0.5 * (lo + hi), stop)
}

fn check(d: f64) -> Result<()> {
    if d.is_finite() {
        Ok(())
    } else {
        Err(Error::numeric(format!(
            "non-finite derivative {d} in line search"
        )))
    }
}

/// Requires `F'(a) < 0 < F'(b)`.
fn root_in_bracket<D>(deriv: &D, mut a: f64, mut b: f64, start: f64, stop: Stop) -> Result<f64>
where
    D: Fn(f64) -> (f64, f64),
{
    let mut c = start;
    let mut step = b - a;
    for _ in 0..MAX_ITERS {
        let (d, d2) = deriv(c);
        check(d)?;
        if d == 0.0 {
            return Ok(c);
        }
        if d < 0.0 {
            a = c;
        } else {
            b = c;
        }
        if d.abs() <= stop.deriv || d.abs() * (b - a) <= stop.gap {
            return Ok(c);
        }
        let scale = a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
        if b - a <= 4.0 * f64::EPSILON * scale {
            return Ok(c);
        }
        let newton = c - d / d2;
        // Bisect when Newton leaves the bracket or is not at least halving
        // the step from two iterations back.
        let in_bracket = d2 > 0.0 && newton > a && newton < b;
        let step_old = step;
        if !in_bracket || (2.0 * d).abs() > (step_old * d2).abs() {
            step = 0.5 * (b - a);
            c = a + step;
        } else {
            step = d / d2;
            c = newton;
        }
    }
    Err(Error::numeric("line search did not converge"))
}
