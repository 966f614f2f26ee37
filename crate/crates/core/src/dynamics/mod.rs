//! Time-domain solvers for the delay systems and their embeddings.
//!
//! The workhorse is [`integrate`], a fourth-order method-of-steps scheme on
//! a grid aligned with the base delay. Alongside it sit the exact series
//! solution of the single-delay equation ([`series_amplitude`]), the coupled
//! two-emitter system ([`integrate_two_atom`]), the mode-discretized
//! microscopic oracle ([`field_oracle`]), finite Markovian embeddings of
//! exponential memory kernels ([`markovian_embedding`]), the two-pole
//! pseudomode reduction ([`pseudomode_two_pole`]), and decay-shape
//! diagnostics ([`oscillation_metrics`]).

mod oracle;
mod step;

use num_complex::Complex64;
use std::f64::consts::PI;
use std::io::Write;

use crate::models::{CollectiveModel, DelaySystem};
use crate::{Error, Result};

pub use oracle::{field_oracle, field_oracle_defaults, FieldOracleRun};
use step::{integrate_linear, DelayedLinear};

/// Terms allowed in the series solution before the caller is redirected to
/// the spectral methods; keeps per-term magnitudes inside double range.
const SERIES_MAX_TERMS: usize = 400;

/// Internal refinement of the integration grid below the sampling step.
const DELAY_SUBSTEPS: usize = 2;

/// Uniformly sampled complex amplitude.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    t0: f64,
    dt: f64,
    samples: Vec<Complex64>,
}

impl TimeSeries {
    pub(crate) fn new(t0: f64, dt: f64, samples: Vec<Complex64>) -> Self {
        assert!(dt > 0.0 && !samples.is_empty());
        TimeSeries { t0, dt, samples }
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction guarantees at least one sample
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + self.dt * k as f64
    }

    pub fn sample(&self, k: usize) -> Complex64 {
        self.samples[k]
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    /// Squared magnitude `|a(t_k)|^2`.
    pub fn abs2(&self, k: usize) -> f64 {
        self.samples[k].norm_sqr()
    }

    /// Largest pointwise magnitude difference against another series on the
    /// overlapping index range.
    pub fn max_abs_diff(&self, other: &TimeSeries) -> f64 {
        self.samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Write `t,re_a,im_a,abs2` rows with 17 significant digits.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "t,re_a,im_a,abs2")?;
        for (k, s) in self.samples.iter().enumerate() {
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e},{:.16e}",
                self.time(k),
                s.re,
                s.im,
                s.norm_sqr()
            )?;
        }
        Ok(())
    }
}

fn check_amplitude(a0: Complex64) -> Result<()> {
    if a0.re.is_finite() && a0.im.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput("non-finite initial amplitude".into()))
    }
}

/// Integrate the canonical delay system from `a(0) = a0` with zero history,
/// sampling every `dt`. Requires `tau` to be an integer number of steps so
/// that delayed samples are exact grid nodes; the global error is O(dt^4).
pub fn integrate(system: &DelaySystem, a0: Complex64, t_max: f64, dt: f64) -> Result<TimeSeries> {
    check_amplitude(a0)?;
    let coeffs = system.coeffs();
    let stepper = DelayedLinear {
        tau: system.base_delay(),
        local: vec![vec![coeffs[0]]],
        delayed: coeffs
            .iter()
            .enumerate()
            .skip(1)
            .filter(|(_, c)| **c != Complex64::new(0.0, 0.0))
            .map(|(m, c)| (m, vec![vec![*c]]))
            .collect(),
    };
    let states = stepper.integrate(&[a0], t_max, dt, DELAY_SUBSTEPS)?;
    Ok(TimeSeries::new(
        0.0,
        dt,
        states.into_iter().map(|v| v[0]).collect(),
    ))
}

/// Exact solution of the single-delay system
/// `da/dt = -gamma a - gamma e^{i phi} a(t - tau)` at time `t`, as the
/// finite sum over completed feedback intervals:
///
/// ```text
/// a(t) = sum_{n=0}^{floor(t/tau)} [-gamma e^{i phi} (t - n tau)]^n / n!
///        * exp(-gamma (t - n tau))
/// ```
///
/// Each term is evaluated in log magnitude, so large `t/tau` cannot
/// overflow; beyond [`SERIES_MAX_TERMS`] intervals the call is rejected in
/// favor of the residue or time-stepping methods.
pub fn series_amplitude(gamma: f64, phi: f64, tau: f64, t: f64) -> Result<Complex64> {
    if !(gamma > 0.0) || !(tau > 0.0) || !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidInput(
            "series_amplitude: require gamma > 0, tau > 0, t >= 0".into(),
        ));
    }
    let n_max = (t / tau + 1e-12).floor() as usize;
    if n_max + 1 > SERIES_MAX_TERMS {
        return Err(Error::SeriesOverflow {
            terms: n_max + 1,
            cap: SERIES_MAX_TERMS,
        });
    }

    let theta = phi + PI; // phase of (-e^{i phi})
    let mut ln_factorial = 0.0;
    let mut sum = Complex64::new(0.0, 0.0);
    for n in 0..=n_max {
        if n > 0 {
            ln_factorial += (n as f64).ln();
        }
        let x = t - n as f64 * tau;
        if x < 0.0 {
            break;
        }
        if n > 0 && gamma * x == 0.0 {
            continue; // 0^n = 0
        }
        let log_mag = if n == 0 {
            -gamma * x
        } else {
            n as f64 * (gamma * x).ln() - ln_factorial - gamma * x
        };
        let angle = theta * n as f64;
        sum += log_mag.exp() * Complex64::new(angle.cos(), angle.sin());
    }
    Ok(sum)
}

/// Integrate the coupled pair of emitter amplitudes
///
/// ```text
/// dc1/dt = -(gamma/2) [c1 + beta e^{i phase} c2(t - tau) Theta(t - tau)]
/// dc2/dt = -(gamma/2) [c2 + beta e^{i phase} c1(t - tau) Theta(t - tau)]
/// ```
///
/// For equal initial amplitudes the two outputs coincide and reproduce the
/// symmetric-sector reduction.
pub fn integrate_two_atom(
    model: &CollectiveModel,
    c1_0: Complex64,
    c2_0: Complex64,
    t_max: f64,
    dt: f64,
) -> Result<(TimeSeries, TimeSeries)> {
    check_amplitude(c1_0)?;
    check_amplitude(c2_0)?;
    let half = Complex64::new(-model.gamma / 2.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let cross = half
        * model.beta
        * Complex64::new(model.phase.cos(), model.phase.sin());
    let delayed = if model.beta == 0.0 {
        Vec::new()
    } else {
        vec![(1, vec![vec![zero, cross], vec![cross, zero]])]
    };
    let stepper = DelayedLinear {
        tau: model.tau,
        local: vec![vec![half, zero], vec![zero, half]],
        delayed,
    };
    let states = stepper.integrate(&[c1_0, c2_0], t_max, dt, DELAY_SUBSTEPS)?;
    let c1 = states.iter().map(|v| v[0]).collect();
    let c2 = states.iter().map(|v| v[1]).collect();
    Ok((
        TimeSeries::new(0.0, dt, c1),
        TimeSeries::new(0.0, dt, c2),
    ))
}

/// Integrate the memoryless extension of an exponential-kernel system,
///
/// ```text
/// dx/dt  = sum_i y_i,      dy_i/dt = -lambda_i y_i + gamma_i x,
/// ```
///
/// with `y_i(0) = 0`, and return `x(t)`. The auxiliary variables reproduce
/// the memory integral of the kernel `K(t) = sum_i gamma_i exp(-lambda_i t)`.
pub fn markovian_embedding(
    kernel_rates: &[Complex64],
    kernel_weights: &[Complex64],
    a0: Complex64,
    t_max: f64,
    dt: f64,
) -> Result<TimeSeries> {
    if kernel_rates.len() != kernel_weights.len() || kernel_rates.is_empty() {
        return Err(Error::InvalidInput(
            "kernel rate and weight lists must have equal nonzero length".into(),
        ));
    }
    check_amplitude(a0)?;
    let n = kernel_rates.len();
    let dim = n + 1;
    let zero = Complex64::new(0.0, 0.0);
    let mut local = vec![vec![zero; dim]; dim];
    for i in 0..n {
        local[0][i + 1] = Complex64::new(1.0, 0.0);
        local[i + 1][0] = kernel_weights[i];
        local[i + 1][i + 1] = -kernel_rates[i];
    }
    let rate = kernel_rates
        .iter()
        .map(|l| l.norm())
        .chain(std::iter::once(
            kernel_weights.iter().map(|g| g.norm()).sum::<f64>().sqrt(),
        ))
        .fold(1.0, f64::max);
    let substeps = ((dt * rate) / 0.05).ceil().max(1.0) as usize;

    let mut y0 = vec![zero; dim];
    y0[0] = a0;
    let states = integrate_linear(local, &y0, t_max, dt, substeps)?;
    Ok(TimeSeries::new(
        0.0,
        dt,
        states.into_iter().map(|v| v[0]).collect(),
    ))
}

/// Integrate the two-pole pseudomode reduction
/// `x'' - (s1 + s2) x' + s1 s2 x = 0` as a first-order Markovian system,
/// from `x(0) = a0` and `x'(0) = slope0`.
///
/// For the reduction of a delay system the natural slope is `c_0 a0`, the
/// exact initial derivative (the delayed channel is inactive at t = 0);
/// residue-matched two-pole approximations instead use `a0 = 0` with the
/// matched prefactor as slope. At `s1 = s2` the solution takes the
/// degenerate form `(a0 + c t) e^{s1 t}`.
pub fn pseudomode_two_pole(
    s1: Complex64,
    s2: Complex64,
    a0: Complex64,
    slope0: Complex64,
    t_max: f64,
    dt: f64,
) -> Result<TimeSeries> {
    check_amplitude(a0)?;
    check_amplitude(slope0)?;
    let zero = Complex64::new(0.0, 0.0);
    let local = vec![
        vec![zero, Complex64::new(1.0, 0.0)],
        vec![-s1 * s2, s1 + s2],
    ];
    let rate = s1.norm().max(s2.norm()).max(1.0);
    let substeps = ((dt * rate) / 0.02).ceil().max(1.0) as usize;
    let states = integrate_linear(local, &[a0, slope0], t_max, dt, substeps)?;
    Ok(TimeSeries::new(
        0.0,
        dt,
        states.into_iter().map(|v| v[0]).collect(),
    ))
}

/// Decay-shape diagnostics: sign changes of `Re a(t)`, interpolated minima
/// of `|a(t)|^2`, and the oscillation period inferred from them.
#[derive(Debug, Clone, PartialEq)]
pub struct OscillationMetrics {
    pub zero_crossings: usize,
    pub minima_times: Vec<f64>,
    /// Twice the mean spacing of successive minima: for a real decaying
    /// oscillation the squared magnitude dips twice per period. Absent when
    /// fewer than two minima were found.
    pub period: Option<f64>,
}

pub fn oscillation_metrics(ts: &TimeSeries) -> OscillationMetrics {
    let n = ts.len();

    let mut zero_crossings = 0;
    let mut last_sign = 0i8;
    for k in 0..n {
        let re = ts.sample(k).re;
        let sign = if re > 0.0 {
            1
        } else if re < 0.0 {
            -1
        } else {
            0
        };
        if sign != 0 {
            if last_sign != 0 && sign != last_sign {
                zero_crossings += 1;
            }
            last_sign = sign;
        }
    }

    let mut minima_times = Vec::new();
    for k in 1..n.saturating_sub(1) {
        let (ym, y0, yp) = (ts.abs2(k - 1), ts.abs2(k), ts.abs2(k + 1));
        if y0 < ym && y0 <= yp {
            // Quadratic interpolation through the three samples.
            let denom = ym - 2.0 * y0 + yp;
            let shift = if denom.abs() > 0.0 {
                0.5 * (ym - yp) / denom
            } else {
                0.0
            };
            minima_times.push(ts.time(k) + shift.clamp(-0.5, 0.5) * ts.dt());
        }
    }

    let period = (minima_times.len() >= 2).then(|| {
        let spacings: Vec<f64> = minima_times.windows(2).map(|w| w[1] - w[0]).collect();
        2.0 * spacings.iter().sum::<f64>() / spacings.len() as f64
    });

    OscillationMetrics {
        zero_crossings,
        minima_times,
        period,
    }
}
