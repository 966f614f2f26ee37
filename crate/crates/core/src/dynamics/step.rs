//! Method-of-steps integrator for linear systems with grid-aligned delays.
//!
//! The state obeys `dy/dt = L y(t) + sum_m B_m y(t - m tau) Theta(t - m tau)`
//! with constant matrices. Delays are required to be integer multiples of the
//! output step, so every delayed argument of a full Runge-Kutta step lands on
//! a stored node and the half-step stage values come from cubic Hermite
//! interpolation of already-computed history (node values plus one-sided
//! derivatives, fourth-order accurate). Each activation time `m tau` is a
//! node by construction: a step never straddles the switch-on of a delayed
//! term, and the integration restarts cleanly there.

use num_complex::Complex64;

use crate::{Error, Result};

type Mat = Vec<Vec<Complex64>>;

pub(crate) struct DelayedLinear {
    /// Base delay; meaningful only when `delayed` is non-empty.
    pub tau: f64,
    /// Instantaneous coupling matrix.
    pub local: Mat,
    /// Delayed couplings as (delay multiplier m >= 1, matrix).
    pub delayed: Vec<(usize, Mat)>,
}

impl DelayedLinear {
    pub fn dim(&self) -> usize {
        self.local.len()
    }

    /// Check that `tau` is an integer number of output steps and return that
    /// integer.
    pub fn grid_multiple(&self, dt: f64) -> Result<usize> {
        let ratio = self.tau / dt;
        let k = ratio.round();
        if k < 1.0 || (ratio - k).abs() > 1e-6 * ratio.max(1.0) {
            return Err(Error::GridMisaligned {
                ratio,
                nearest_dt: self.tau / k.max(1.0),
            });
        }
        Ok(k as usize)
    }

    /// Integrate from `y0` at t = 0 and return samples every `dt`, stepping
    /// internally at `dt / substeps`. History before t = 0 is identically
    /// zero; the first returned sample is `y0` itself.
    pub fn integrate(
        &self,
        y0: &[Complex64],
        t_max: f64,
        dt: f64,
        substeps: usize,
    ) -> Result<Vec<Vec<Complex64>>> {
        let d = self.dim();
        if y0.len() != d {
            return Err(Error::InvalidInput("state dimension mismatch".into()));
        }
        if !(t_max > 0.0) || !(dt > 0.0) || !t_max.is_finite() || !dt.is_finite() {
            return Err(Error::InvalidInput(
                "require finite t_max > 0 and dt > 0".into(),
            ));
        }
        if y0.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::InvalidInput("non-finite initial state".into()));
        }

        // Internal offset (in sub-nodes) of one base delay.
        let off = if self.delayed.is_empty() {
            0
        } else {
            self.grid_multiple(dt)? * substeps
        };

        let n_out = ((t_max / dt) - 1e-9).ceil().max(1.0) as usize;
        let n_int = n_out * substeps;
        let h = dt / substeps as f64;

        let mut values: Vec<Vec<Complex64>> = Vec::with_capacity(n_int + 1);
        values.push(y0.to_vec());
        // One-sided derivatives per completed interval: start (right limit)
        // and end (left limit). The RHS jumps at activation nodes, so both
        // limits are kept for the Hermite interpolant.
        let mut d_start: Vec<Vec<Complex64>> = Vec::with_capacity(n_int);
        let mut d_end: Vec<Vec<Complex64>> = Vec::with_capacity(n_int);

        let zero = vec![Complex64::new(0.0, 0.0); d];
        let mut forcing_node = zero.clone();
        let mut forcing_mid = zero.clone();
        let mut forcing_next = zero.clone();

        for j in 0..n_int {
            // Forcing from delayed terms at the three stage abscissae.
            for v in [&mut forcing_node, &mut forcing_mid, &mut forcing_next] {
                v.iter_mut().for_each(|c| *c = Complex64::new(0.0, 0.0));
            }
            for (m, mat) in &self.delayed {
                let q = m * off;
                if j < q {
                    continue; // not yet switched on for this step
                }
                let base = j - q;
                accumulate(mat, &values[base], &mut forcing_node);
                // Hermite midpoint of the past interval [base, base+1].
                let mid = hermite_mid(
                    &values[base],
                    &values[base + 1],
                    &d_start[base],
                    &d_end[base],
                    h,
                );
                accumulate(mat, &mid, &mut forcing_mid);
                accumulate(mat, &values[base + 1], &mut forcing_next);
            }

            let y = &values[j];
            let k1 = rhs(&self.local, y, &forcing_node);
            let y2 = axpy(y, &k1, 0.5 * h);
            let k2 = rhs(&self.local, &y2, &forcing_mid);
            let y3 = axpy(y, &k2, 0.5 * h);
            let k3 = rhs(&self.local, &y3, &forcing_mid);
            let y4 = axpy(y, &k3, h);
            let k4 = rhs(&self.local, &y4, &forcing_next);

            let mut y_next = y.clone();
            for i in 0..d {
                y_next[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
            let d_last = rhs(&self.local, &y_next, &forcing_next);
            values.push(y_next);
            d_start.push(k1);
            d_end.push(d_last);
        }

        Ok(values
            .into_iter()
            .step_by(substeps)
            .take(n_out + 1)
            .collect())
    }
}

fn accumulate(mat: &Mat, x: &[Complex64], out: &mut [Complex64]) {
    for (row, o) in mat.iter().zip(out.iter_mut()) {
        let mut acc = Complex64::new(0.0, 0.0);
        for (a, b) in row.iter().zip(x.iter()) {
            acc += a * b;
        }
        *o += acc;
    }
}

fn rhs(local: &Mat, y: &[Complex64], forcing: &[Complex64]) -> Vec<Complex64> {
    let mut out = forcing.to_vec();
    for (row, o) in local.iter().zip(out.iter_mut()) {
        let mut acc = Complex64::new(0.0, 0.0);
        for (a, b) in row.iter().zip(y.iter()) {
            acc += a * b;
        }
        *o += acc;
    }
    out
}

fn axpy(y: &[Complex64], k: &[Complex64], scale: f64) -> Vec<Complex64> {
    y.iter().zip(k).map(|(a, b)| a + scale * b).collect()
}

/// Value interpolant at the midpoint of one step from endpoint values and
/// one-sided derivatives.
fn hermite_mid(
    y0: &[Complex64],
    y1: &[Complex64],
    d0: &[Complex64],
    d1: &[Complex64],
    h: f64,
) -> Vec<Complex64> {
    (0..y0.len())
        .map(|i| 0.5 * (y0[i] + y1[i]) + h / 8.0 * (d0[i] - d1[i]))
        .collect()
}

/// Plain fixed-step RK4 for a delay-free linear system; `substeps` refines
/// below the sampling grid.
pub(crate) fn integrate_linear(
    local: Mat,
    y0: &[Complex64],
    t_max: f64,
    dt: f64,
    substeps: usize,
) -> Result<Vec<Vec<Complex64>>> {
    DelayedLinear {
        tau: 1.0,
        local,
        delayed: Vec::new(),
    }
    .integrate(y0, t_max, dt, substeps)
}
