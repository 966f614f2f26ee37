//! Physical models and their reduction to one canonical delay system.
//!
//! Two microscopic settings feed the same analysis machinery: a giant atom
//! touching the waveguide at `N` equally spaced points, and a pair of
//! distant identical emitters sharing the waveguide. Both reduce (in the
//! single-excitation sector, and for the pair in its symmetric sector) to a
//! scalar linear equation with delays that are integer multiples of one base
//! delay. [`DelaySystem`] is that canonical form; everything downstream
//! (time stepping, pole spectra, exceptional-point analysis) consumes only
//! it, so group velocity and absolute coupling scales never leak past this
//! module.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Giant atom coupled to the waveguide at `N >= 2` points with spacing delay
/// `tau` and per-point coupling strengths `g_j`.
///
/// The propagation phase `phi` is the phase accumulated over one spacing at
/// the transition frequency. Contact points sit at `x_j = (j-1) d` with
/// `d = v_g tau`.
#[derive(Debug, Clone, PartialEq)]
pub struct GiantAtomModel {
    pub couplings: Vec<f64>,
    pub group_velocity: f64,
    pub spacing_delay: f64,
    pub phase: f64,
}

impl GiantAtomModel {
    pub fn new(
        couplings: Vec<f64>,
        group_velocity: f64,
        spacing_delay: f64,
        phase: f64,
    ) -> Result<Self> {
        if couplings.len() < 2 {
            return Err(Error::InvalidInput(
                "giant atom needs at least two contact points".into(),
            ));
        }
        if !couplings.iter().all(|g| g.is_finite()) || couplings.iter().all(|&g| g == 0.0) {
            return Err(Error::InvalidInput(
                "couplings must be finite with at least one nonzero entry".into(),
            ));
        }
        if !(group_velocity > 0.0) || !(spacing_delay > 0.0) || !phase.is_finite() {
            return Err(Error::InvalidInput(
                "require group_velocity > 0, spacing_delay > 0, finite phase".into(),
            ));
        }
        Ok(Self {
            couplings,
            group_velocity,
            spacing_delay,
            phase,
        })
    }

    /// Aggregated weight of each delay class `m = |j - l|`:
    ///
    /// ```text
    /// kappa_0 = (pi / v_g) sum_j g_j^2
    /// kappa_m = (2 pi / v_g) sum_{j=1}^{N-m} g_j g_{j+m}    (m >= 1)
    /// ```
    ///
    /// Classes with zero weight are retained so the index always equals the
    /// physical delay multiplier. Accumulation is order-independent, which
    /// keeps the weights bit-identical under reversal of the coupling list.
    pub fn kappa_weights(&self) -> Vec<f64> {
        let g = &self.couplings;
        let n = g.len();
        let pref = std::f64::consts::PI / self.group_velocity;
        let mut kappa = Vec::with_capacity(n);
        kappa.push(pref * sorted_sum(g.iter().map(|gj| gj * gj)));
        for m in 1..n {
            let s = sorted_sum((0..n - m).map(|j| g[j] * g[j + m]));
            kappa.push(2.0 * pref * s);
        }
        kappa
    }

    /// Reduce to the canonical delay system: `c_m = -kappa_m e^{i m phi}`.
    pub fn delay_system(&self) -> DelaySystem {
        let coeffs = self
            .kappa_weights()
            .iter()
            .enumerate()
            .map(|(m, &k)| {
                let phase = self.phase * m as f64;
                -k * Complex64::new(phase.cos(), phase.sin())
            })
            .collect();
        DelaySystem {
            base_delay: self.spacing_delay,
            coeffs,
        }
    }
}

/// Sum floating-point terms in a value-canonical order so that any
/// permutation of the inputs yields the same rounded result.
fn sorted_sum(terms: impl Iterator<Item = f64>) -> f64 {
    let mut v: Vec<f64> = terms.collect();
    v.sort_by(f64::total_cmp);
    v.iter().sum()
}

/// Two identical point emitters a distance `d = v_g tau` apart on a shared
/// waveguide.
///
/// `gamma` is the single-emitter decay rate, `beta` the fraction of emission
/// mediated by the waveguide, and `phase` the propagation phase between the
/// emitters.
#[derive(Debug, Clone, PartialEq)]
pub struct CollectiveModel {
    pub gamma: f64,
    pub beta: f64,
    pub phase: f64,
    pub tau: f64,
}

impl CollectiveModel {
    pub fn new(gamma: f64, beta: f64, phase: f64, tau: f64) -> Result<Self> {
        if !(gamma > 0.0) || !(tau > 0.0) {
            return Err(Error::InvalidInput("require gamma > 0 and tau > 0".into()));
        }
        if !(0.0..=1.0).contains(&beta) {
            return Err(Error::InvalidInput(format!(
                "beta = {beta} must lie in [0, 1]"
            )));
        }
        if !phase.is_finite() {
            return Err(Error::InvalidInput("phase must be finite".into()));
        }
        Ok(Self {
            gamma,
            beta,
            phase,
            tau,
        })
    }

    /// Reduce the pair to a single delay equation in its symmetric sector
    /// (`c_1 = c_2`): `c_0 = -gamma/2`, `c_1 = -(gamma/2) beta e^{i phase}`.
    ///
    /// The reduction is only valid when the initial condition respects the
    /// exchange symmetry; callers tracking asymmetric amplitudes must use
    /// [`crate::dynamics::integrate_two_atom`] instead. At `beta = 0` the
    /// waveguide-mediated term is absent and the system is a bare
    /// exponential decay at rate `gamma/2`.
    pub fn delay_system(&self, symmetric: bool) -> Result<DelaySystem> {
        if !symmetric {
            return Err(Error::InvalidInput(
                "non-symmetric initial conditions do not reduce to a single delay equation; \
                 integrate the coupled pair instead"
                    .into(),
            ));
        }
        let half = self.gamma / 2.0;
        let mut coeffs = vec![Complex64::new(-half, 0.0)];
        if self.beta != 0.0 {
            coeffs.push(
                -half * self.beta * Complex64::new(self.phase.cos(), self.phase.sin()),
            );
        }
        DelaySystem::new(self.tau, coeffs)
    }
}

/// Canonical scalar linear multi-delay system
/// `da/dt = sum_m c_m a(t - m tau) Theta(t - m tau)`.
///
/// `coeffs[m]` is the coefficient of the delay class `m`; `coeffs[0]` is the
/// instantaneous term and must be nonzero for nondegenerate dynamics.
#[derive(Debug, Clone, PartialEq)]
pub struct DelaySystem {
    base_delay: f64,
    coeffs: Vec<Complex64>,
}

impl DelaySystem {
    pub fn new(base_delay: f64, coeffs: Vec<Complex64>) -> Result<Self> {
        if !(base_delay > 0.0) || !base_delay.is_finite() {
            return Err(Error::InvalidInput(format!(
                "base delay {base_delay} must be positive and finite"
            )));
        }
        if coeffs.is_empty() {
            return Err(Error::InvalidInput("at least one delay class required".into()));
        }
        if coeffs[0] == Complex64::new(0.0, 0.0) {
            return Err(Error::InvalidInput(
                "c_0 = 0 gives degenerate dynamics; the instantaneous term must be nonzero".into(),
            ));
        }
        if !coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
            return Err(Error::InvalidInput("coefficients must be finite".into()));
        }
        Ok(Self { base_delay, coeffs })
    }

    /// Single-delay system `da/dt = -gamma a - gamma e^{i phi} a(t - tau)`,
    /// the two-point giant atom with equal couplings.
    pub fn single_delay(gamma: f64, phi: f64, tau: f64) -> Result<Self> {
        if !(gamma > 0.0) {
            return Err(Error::InvalidInput("require gamma > 0".into()));
        }
        Self::new(
            tau,
            vec![
                Complex64::new(-gamma, 0.0),
                -gamma * Complex64::new(phi.cos(), phi.sin()),
            ],
        )
    }

    pub fn base_delay(&self) -> f64 {
        self.base_delay
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Number of delay classes, including the instantaneous one.
    pub fn classes(&self) -> usize {
        self.coeffs.len()
    }

    /// Longest delay appearing in the equation.
    pub fn max_delay(&self) -> f64 {
        self.base_delay * (self.coeffs.len() - 1) as f64
    }
}

/// JSON-serializable model descriptor accepted by the command-line tool.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ModelDescriptor {
    GiantAtom {
        couplings: Vec<f64>,
        group_velocity: f64,
        spacing_delay: f64,
        phase: f64,
    },
    Collective {
        gamma: f64,
        beta: f64,
        phase: f64,
        tau: f64,
    },
    DelaySystem {
        base_delay: f64,
        /// Coefficients as `[re, im]` pairs, index = delay multiplier.
        coeffs: Vec<[f64; 2]>,
    },
}

impl ModelDescriptor {
    pub fn delay_system(&self) -> Result<DelaySystem> {
        match self {
            ModelDescriptor::GiantAtom {
                couplings,
                group_velocity,
                spacing_delay,
                phase,
            } => Ok(GiantAtomModel::new(
                couplings.clone(),
                *group_velocity,
                *spacing_delay,
                *phase,
            )?
            .delay_system()),
            ModelDescriptor::Collective {
                gamma,
                beta,
                phase,
                tau,
            } => CollectiveModel::new(*gamma, *beta, *phase, *tau)?.delay_system(true),
            ModelDescriptor::DelaySystem { base_delay, coeffs } => DelaySystem::new(
                *base_delay,
                coeffs.iter().map(|c| Complex64::new(c[0], c[1])).collect(),
            ),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn kappa_two_equal_points() {
        let m = GiantAtomModel::new(vec![1.0, 1.0], 1.0, 0.5, 0.0).unwrap();
        let k = m.kappa_weights();
        assert_eq!(k.len(), 2);
        assert!((k[0] - 2.0 * PI).abs() < 1e-15);
        assert!((k[1] - 2.0 * PI).abs() < 1e-15);
    }

    #[test]
    fn kappa_three_point_mixed_sign() {
        let m = GiantAtomModel::new(vec![1.0, 1.0, -0.03846], 1.0, 0.5, 0.0).unwrap();
        let k = m.kappa_weights();
        assert!((k[0] - PI * (2.0 + 0.03846_f64.powi(2))).abs() < 1e-12);
        assert!((k[1] - 2.0 * PI * (1.0 - 0.03846)).abs() < 1e-12);
        assert!((k[2] - 2.0 * PI * (-0.03846)).abs() < 1e-12);
    }

    #[test]
    fn kappa_middle_coupling_zero() {
        let m = GiantAtomModel::new(vec![1.0, 0.0, 1.0], 1.0, 1.0, 0.0).unwrap();
        let k = m.kappa_weights();
        assert!((k[0] - 2.0 * PI).abs() < 1e-15);
        assert_eq!(k[1], 0.0);
        assert!((k[2] - 2.0 * PI).abs() < 1e-15);
    }

    #[test]
    fn kappa_reversal_exact() {
        let g = vec![0.3, -1.1, 0.7, 0.25];
        let fwd = GiantAtomModel::new(g.clone(), 1.3, 0.4, 0.0).unwrap();
        let rev = GiantAtomModel::new(g.into_iter().rev().collect(), 1.3, 0.4, 0.0).unwrap();
        assert_eq!(fwd.kappa_weights(), rev.kappa_weights());
    }

    #[test]
    fn kappa_dyadic_scaling_exact() {
        // Scaling every coupling by a power of two is exact in floating
        // point, so the quadratic weights scale exactly by its square.
        let g = vec![0.3, -1.1, 0.7];
        let base = GiantAtomModel::new(g.clone(), 1.0, 0.4, 0.0).unwrap();
        let scaled =
            GiantAtomModel::new(g.iter().map(|x| 2.0 * x).collect(), 1.0, 0.4, 0.0).unwrap();
        let k0 = base.kappa_weights();
        let k1 = scaled.kappa_weights();
        for (a, b) in k0.iter().zip(&k1) {
            assert_eq!(4.0 * a, *b);
        }
    }

    #[test]
    fn delay_system_coefficients_pick_up_phase() {
        let m = GiantAtomModel::new(vec![1.0, 1.0], 2.0 * PI, 1.0, PI).unwrap();
        // kappa_0 = kappa_1 = 1 here, so c = (-1, +1).
        let sys = m.delay_system();
        let c = sys.coeffs();
        assert!((c[0] - Complex64::new(-1.0, 0.0)).norm() < 1e-15);
        assert!((c[1] - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn superradiant_degeneracy_of_delay_classes() {
        let m = GiantAtomModel::new(vec![0.9, 0.9], 1.0, 0.3, 0.0).unwrap();
        let sys = m.delay_system();
        assert_eq!(sys.coeffs()[0], sys.coeffs()[1]);
    }

    #[test]
    fn collective_reduction() {
        let m = CollectiveModel::new(1.0, 1.0, 0.0, 0.5).unwrap();
        let sys = m.delay_system(true).unwrap();
        assert_eq!(sys.coeffs().len(), 2);
        assert!((sys.coeffs()[0] - Complex64::new(-0.5, 0.0)).norm() < 1e-15);
        assert!((sys.coeffs()[1] - Complex64::new(-0.5, 0.0)).norm() < 1e-15);

        let m = CollectiveModel::new(1.0, 0.5, PI, 0.5).unwrap();
        let sys = m.delay_system(true).unwrap();
        assert!((sys.coeffs()[0] - Complex64::new(-0.5, 0.0)).norm() < 1e-15);
        assert!((sys.coeffs()[1] - Complex64::new(0.25, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn collective_beta_zero_drops_delay_class() {
        let m = CollectiveModel::new(2.0, 0.0, 0.0, 0.5).unwrap();
        let sys = m.delay_system(true).unwrap();
        assert_eq!(sys.classes(), 1);
        assert!((sys.coeffs()[0] - Complex64::new(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn collective_asymmetric_rejected() {
        let m = CollectiveModel::new(1.0, 1.0, 0.0, 0.5).unwrap();
        assert!(m.delay_system(false).is_err());
    }

    #[test]
    fn invariants_enforced() {
        assert!(GiantAtomModel::new(vec![1.0], 1.0, 1.0, 0.0).is_err());
        assert!(GiantAtomModel::new(vec![0.0, 0.0], 1.0, 1.0, 0.0).is_err());
        assert!(GiantAtomModel::new(vec![1.0, 1.0], -1.0, 1.0, 0.0).is_err());
        assert!(CollectiveModel::new(1.0, 1.5, 0.0, 1.0).is_err());
        assert!(DelaySystem::new(1.0, vec![]).is_err());
        assert!(DelaySystem::new(0.0, vec![Complex64::new(-1.0, 0.0)]).is_err());
        assert!(DelaySystem::new(1.0, vec![Complex64::new(0.0, 0.0)]).is_err());
    }

    #[test]
    fn descriptor_round_trip() {
        let d = ModelDescriptor::GiantAtom {
            couplings: vec![1.0, 1.0],
            group_velocity: 1.0,
            spacing_delay: 0.5,
            phase: 0.0,
        };
        let json = serde_json::to_string(&d).unwrap();
        let back: ModelDescriptor = serde_json::from_str(&json).unwrap();
        assert_eq!(
            back.delay_system().unwrap().coeffs(),
            d.delay_system().unwrap().coeffs()
        );
    }
}
