//! Small numerical kernels: adaptive Simpson quadrature, bracketed
//! bisection, the Thomas tridiagonal solver and a classical RK4 step.

use crate::error::{Error, Result};

const SIMPSON_MAX_DEPTH: u32 = 48;

/// Adaptive Simpson quadrature of `f` over `[a, b]`.
///
/// Stops refining a panel once the Richardson estimate is below
/// `max(abs_tol, rel_tol * |∫f|)` (halved at each level), where `|∫f|` is
/// taken from a coarse 16-panel pass. The tolerance never drops below the
/// rounding level `ε |b − a| max|f|`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> f64 {
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let (scale, peak) = {
        let n = 16;
        let h = (b - a) / n as f64;
        let mut s = 0.0;
        let mut peak = fa.abs().max(fm.abs()).max(fb.abs());
        for i in 0..n {
            let x0 = a + i as f64 * h;
            let (f0, f1, f2) = (f(x0), f(x0 + 0.5 * h), f(x0 + h));
            peak = peak.max(f0.abs()).max(f1.abs()).max(f2.abs());
            s += h / 6.0 * (f0 + 4.0 * f1 + f2);
        }
        (s.abs().max(whole.abs()), peak)
    };
    // Below this the Richardson estimate is rounding noise.
    let noise = 64.0 * f64::EPSILON * (b - a).abs() * peak;
    let tol = abs_tol.max(rel_tol * scale).max(noise);
    simpson_rec(f, a, b, fa, fm, fb, whole, tol, SIMPSON_MAX_DEPTH)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Bisection for a root of `f` on `[lo, hi]`, where `f(lo)` and `f(hi)`
/// have opposite signs. Stops when the bracket is below
/// `rel_tol * max(|lo|, |hi|)` or after `max_iter` halvings.
pub fn bisect<F: Fn(f64) -> f64>(
    f: F,
    mut lo: f64,
    mut hi: f64,
    rel_tol: f64,
    max_iter: usize,
) -> Result<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() || flo.is_nan() || fhi.is_nan() {
        return Err(Error::Numerical(format!(
            "root not bracketed on [{lo}, {hi}]: f = ({flo}, {fhi})"
        )));
    }
    for _ in 0..max_iter {
        let mid = 0.5 * (lo + hi);
        if (hi - lo).abs() <= rel_tol * lo.abs().max(hi.abs()) || mid == lo || mid == hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Root of an increasing-through-zero function on `(0, ∞)`: geometric
/// bracket expansion from `[1e-8, 1]`, then bisection (200-iteration cap).
pub fn positive_root<F: Fn(f64) -> f64>(f: F, rel_tol: f64) -> Result<f64> {
    let mut lo = 1e-8;
    while f(lo) >= 0.0 {
        lo *= 0.5;
        if lo < f64::MIN_POSITIVE {
            return Err(Error::Numerical("function non-negative down to 0".into()));
        }
    }
    let mut hi = 1.0;
    while f(hi) <= 0.0 || f(hi).is_nan() {
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::Numerical(format!(
                "bracket expansion failed: function non-positive on [{lo:e}, {hi:e})"
            )));
        }
    }
    bisect(f, lo, hi, rel_tol, 200)
}

/// Solves a tridiagonal system in place with the Thomas algorithm.
///
/// `lower[i]` multiplies `x[i-1]` in row `i` (`lower[0]` unused),
/// `upper[i]` multiplies `x[i+1]` (`upper[n-1]` unused). `scratch` must
/// have the same length as `rhs`. The solution overwrites `rhs`.
pub fn thomas(
    lower: &[f64],
    diag: &[f64],
    upper: &[f64],
    rhs: &mut [f64],
    scratch: &mut [f64],
) -> Result<()> {
    let n = rhs.len();
    debug_assert!(lower.len() == n && diag.len() == n && upper.len() == n && scratch.len() == n);
    if n == 0 {
        return Ok(());
    }
    let mut denom = diag[0];
    if denom == 0.0 || !denom.is_finite() {
        return Err(Error::Numerical(
            "tridiagonal pivot breakdown at row 0".into(),
        ));
    }
    scratch[0] = upper[0] / denom;
    rhs[0] /= denom;
    for i in 1..n {
        denom = diag[i] - lower[i] * scratch[i - 1];
        if denom == 0.0 || !denom.is_finite() {
            return Err(Error::Numerical(format!(
                "tridiagonal pivot breakdown at row {i}"
            )));
        }
        scratch[i] = upper[i] / denom;
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / denom;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= scratch[i] * rhs[i + 1];
    }
    Ok(())
}

/// One classical Runge–Kutta step for a two-dimensional autonomous system.
#[inline]
pub fn rk4_step2<F: Fn([f64; 2]) -> [f64; 2]>(f: &F, y: [f64; 2], h: f64) -> [f64; 2] {
    let k1 = f(y);
    let k2 = f([y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]]);
    let k3 = f([y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]]);
    let k4 = f([y[0] + h * k3[0], y[1] + h * k3[1]]);
    [
        y[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        y[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    ]
}

/// One classical Runge–Kutta step for a scalar autonomous ODE.
#[inline]
pub fn rk4_step<F: Fn(f64) -> f64>(f: &F, y: f64, h: f64) -> f64 {
    let k1 = f(y);
    let k2 = f(y + 0.5 * h * k1);
    let k3 = f(y + 0.5 * h * k2);
    let k4 = f(y + h * k3);
    y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
}

/// Linear interpolation of uniformly spaced samples starting at `x0`,
/// clamped to the end values outside the sampled range.
pub fn interp_uniform(x0: f64, dx: f64, values: &[f64], x: f64) -> f64 {
    let n = values.len();
    if n == 0 {
        return f64::NAN;
    }
    let s = (x - x0) / dx;
    if s <= 0.0 {
        return values[0];
    }
    let i = s.floor() as usize;
    if i >= n - 1 {
        return values[n - 1];
    }
    let t = s - i as f64;
    values[i] + t * (values[i + 1] - values[i])
}
