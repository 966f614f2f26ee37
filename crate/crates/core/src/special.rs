//! Multi-branch complex Lambert W function.
//!
//! `W_n(z)` is the n-th solution sheet of the transcendental equation
//! `w exp(w) = z`. The principal branch `W_0` is real on `(-1/e, inf)`;
//! branches 0 and -1 meet at the branch point `z = -1/e`, `w = -1`. That
//! point is where the dominant poles of a single-delay system coalesce, so
//! the evaluator has to stay accurate there: Halley iteration degenerates as
//! `w -> -1` and is replaced by a Puiseux expansion in
//! `p = sqrt(2 (e z + 1))` inside a small disk around the branch point.

use num_complex::Complex64;
use std::f64::consts::{E, TAU};

use crate::{Error, Result};

/// Modulus of the branch point `z = -1/e`.
pub const INV_E: f64 = 1.0 / E;

/// Inside this radius of `-1/e` the Halley seed comes from the Puiseux series.
const PUISEUX_SEED_RADIUS: f64 = 0.05;

/// Inside this radius of `-1/e` the truncated Puiseux series is returned
/// directly; the correction step degenerates as `w -> -1`.
const PUISEUX_DIRECT_RADIUS: f64 = 1e-10;

const MAX_ITER: usize = 64;

/// Evaluate branch `n` of the Lambert W function at `z`.
///
/// The returned `w` satisfies `|w exp(w) - z| <= 1e-12 (1 + |z|)`. Branch
/// selection follows the standard convention: `Im W_0 in (-pi, pi]`, branch
/// `n` lies in the n-th horizontal strip, and `W_0`, `W_-1` join at
/// `z = -1/e` with value `-1`.
///
/// `z = 0` is only in the domain of the principal branch; every other branch
/// has a logarithmic singularity there.
pub fn lambert_w(branch: i32, z: Complex64) -> Result<Complex64> {
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::InvalidInput(format!(
            "lambert_w: non-finite argument {z}"
        )));
    }
    if z.re == 0.0 && z.im == 0.0 {
        if branch == 0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        return Err(Error::Domain(format!(
            "lambert_w: branch {branch} has a logarithmic singularity at z = 0"
        )));
    }

    let dist_bp = (z + INV_E).norm();
    if dist_bp < PUISEUX_DIRECT_RADIUS {
        if let Some(sigma) = puiseux_sign(branch, z) {
            return Ok(puiseux(sigma, z));
        }
    }

    halley(seed(branch, z), z)
}

/// Which square-root sheet the Puiseux expansion uses for this branch near
/// the branch point, if the branch attains values near `w = -1` there.
fn puiseux_sign(branch: i32, z: Complex64) -> Option<f64> {
    match branch {
        0 => Some(1.0),
        // The lower sheet continues as W_-1 for Im z >= 0 and as W_+1 below
        // the cut.
        -1 if z.im >= 0.0 => Some(-1.0),
        1 if z.im < 0.0 => Some(-1.0),
        _ => None,
    }
}

/// Expansion of W around the branch point in `p = sigma sqrt(2 (e z + 1))`.
fn puiseux(sigma: f64, z: Complex64) -> Complex64 {
    let p = (2.0 * (E * z + 1.0)).sqrt() * sigma;
    let p2 = p * p;
    -1.0 + p - p2 / 3.0 + 11.0 / 72.0 * p2 * p - 43.0 / 540.0 * p2 * p2
}

fn seed(branch: i32, z: Complex64) -> Complex64 {
    if (z + INV_E).norm() < PUISEUX_SEED_RADIUS {
        if let Some(sigma) = puiseux_sign(branch, z) {
            return puiseux(sigma, z);
        }
    }

    if branch == 0 {
        if (z - 1.0).norm() < 0.5 {
            // Tangent line at z = 1: W(1) = Omega, W'(1) = Omega / (1 + Omega).
            const OMEGA: f64 = 0.567_143_290_409_783_8;
            return OMEGA + (z - 1.0) * (OMEGA / (1.0 + OMEGA));
        }
        // Past the branch point near the cut the root is complex; a real or
        // nearly real seed would pin the iteration to the axis, so fall
        // through to the logarithmic seed (whose imaginary part follows the
        // sign of Im z) instead of the Pade fit.
        let near_cut = z.re < -INV_E && z.im.abs() < 0.5;
        if z.norm() <= 1.0 && !near_cut {
            // Pade fit of the principal branch around the origin.
            let num = 1.0 + z * (2.331_643_981_597_124 + z * (1.812_187_885_639_363_4 + z * 0.1));
            let den = 1.0 + z * (3.331_643_981_597_124 + z * 1.812_187_885_639_363_4);
            return num / den;
        }
        let l = z.ln();
        return l - l.ln();
    }

    // W_-1 is real and decreasing on (-1/e, 0); keep the iteration on the
    // real axis there.
    if branch == -1 && z.im == 0.0 && z.re < 0.0 && z.re > -INV_E {
        let l = (-z.re).ln();
        return Complex64::new(l - (-l).ln(), 0.0);
    }

    let l = z.ln() + Complex64::new(0.0, TAU * f64::from(branch));
    l - l.ln()
}

/// Halley iteration on `f(w) = w exp(w) - z`, cubically convergent away from
/// the branch point.
fn halley(mut w: Complex64, z: Complex64) -> Result<Complex64> {
    for _ in 0..MAX_ITER {
        let ew = w.exp();
        let f = w * ew - z;
        // Near the branch point the correction stalls at rounding noise while
        // the residual is long converged; stop on the residual as well.
        if f.norm() <= 1e-15 * (1.0 + z.norm()) {
            return Ok(w);
        }
        let wp1 = w + 1.0;
        let mut denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        if denom.norm() == 0.0 {
            // Fall back to a plain Newton step.
            denom = ew * wp1;
        }
        let mut dw = f / denom;
        let cap = 5.0 + w.norm();
        if dw.norm() > cap {
            dw *= cap / dw.norm();
        }
        let w_next = w - dw;
        if dw.norm() <= 1e-15 * (1.0 + w_next.norm()) {
            let residual = (w_next * w_next.exp() - z).norm();
            if residual <= 1e-12 * (1.0 + z.norm()) {
                return Ok(w_next);
            }
            return Err(Error::NoConvergence {
                context: "lambert_w".into(),
                last: w_next,
                residual,
            });
        }
        w = w_next;
    }
    Err(Error::NoConvergence {
        context: "lambert_w".into(),
        last: w,
        residual: (w * w.exp() - z).norm(),
    })
}

/// `W_0` restricted to real arguments `x > -1/e`.
pub fn lambert_w0_real(x: f64) -> Result<f64> {
    if x < -INV_E {
        return Err(Error::Domain(format!(
            "lambert_w0_real: x = {x} lies below the branch point -1/e"
        )));
    }
    Ok(lambert_w(0, Complex64::new(x, 0.0))?.re)
}

/// Loose envelope of the n-th branch strip, used as a sanity check in tests:
/// the exact boundaries are curves, but `Im W_n` never leaves this band.
#[cfg(test)]
fn in_branch_strip(branch: i32, w: Complex64) -> bool {
    use std::f64::consts::PI;
    let im = w.im;
    match branch {
        0 => im.abs() < PI + 1e-9,
        n if n >= 1 => im >= -1e-9 && im < (2.0 * f64::from(n) + 1.0) * PI + 1e-9,
        n => im <= 1e-9 && im > (2.0 * f64::from(n) - 1.0) * PI - 1e-9,
    }
}
