//! Exceptional-point location and constructive design.
//!
//! An order-n exceptional point of a delay system is a simultaneous zero of
//! the characteristic function and its first n-1 derivatives. This module
//! locates the second-order point of the two-point giant atom, solves the
//! solvability conditions for a third-order point of the three-point atom,
//! designs an order-N point at a prescribed real rate by solving the linear
//! system for the delay-class weights and inverting the quadratic relations
//! back to physical couplings, and evaluates the critical separation of the
//! collectively emitting pair.

use num_complex::Complex64;
use serde::ser::{SerializeMap, SerializeStruct, Serializer};
use serde::Serialize;

use crate::linalg;
use crate::models::{DelaySystem, GiantAtomModel};
use crate::special::{lambert_w0_real, INV_E};
use crate::spectral::char_function;
use crate::{Error, Result};

/// Residual bound for a verified exceptional point:
/// every |D^(k)(s_EP)| <= EP_RESIDUAL * (1 + |s_EP|).
const EP_RESIDUAL: f64 = 1e-8;

/// Round-trip tolerance between designed delay-class weights and the weights
/// of the reconstructed physical model, relative to the largest weight.
const KAPPA_ROUND_TRIP: f64 = 1e-10;

/// A located or designed exceptional point.
#[derive(Debug, Clone, PartialEq)]
pub struct EpReport {
    pub order: usize,
    pub s_ep: Complex64,
    pub tau_ep: f64,
    /// Named engineered parameters (couplings, delay-class weights, rates),
    /// in a deterministic order.
    pub parameters: Vec<(String, f64)>,
    /// `|D(s_EP)|, |D'(s_EP)|, ..., |D^(order-1)(s_EP)|`.
    pub residuals: Vec<f64>,
    pub validity_notes: Vec<String>,
}

impl EpReport {
    pub fn parameter(&self, name: &str) -> Option<f64> {
        self.parameters
            .iter()
            .find(|(k, _)| k == name)
            .map(|(_, v)| *v)
    }
}

impl Serialize for EpReport {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct C {
            re: f64,
            im: f64,
        }
        struct Params<'a>(&'a [(String, f64)]);
        impl Serialize for Params<'_> {
            fn serialize<S: Serializer>(
                &self,
                serializer: S,
            ) -> std::result::Result<S::Ok, S::Error> {
                let mut map = serializer.serialize_map(Some(self.0.len()))?;
                for (k, v) in self.0 {
                    map.serialize_entry(k, v)?;
                }
                map.end()
            }
        }
        let mut s = serializer.serialize_struct("EpReport", 6)?;
        s.serialize_field("order", &self.order)?;
        s.serialize_field(
            "s_ep",
            &C {
                re: self.s_ep.re,
                im: self.s_ep.im,
            },
        )?;
        s.serialize_field("tau_ep", &self.tau_ep)?;
        s.serialize_field("parameters", &Params(&self.parameters))?;
        s.serialize_field("residuals", &self.residuals)?;
        s.serialize_field("notes", &self.validity_notes)?;
        s.end()
    }
}

/// Structured "no exceptional point here" answer: an outcome, not an error.
#[derive(Debug, Clone, PartialEq)]
pub struct NoEp {
    pub reason: String,
    /// For scan-based searches, the sampled residual curve that contained no
    /// sign change.
    pub scan: Option<Vec<(f64, f64)>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum EpOutcome {
    Found(EpReport),
    NoEp(NoEp),
}

impl EpOutcome {
    pub fn report(&self) -> Option<&EpReport> {
        match self {
            EpOutcome::Found(r) => Some(r),
            EpOutcome::NoEp(_) => None,
        }
    }
}

/// `[|D(s)|, |D'(s)|, ..., |D^(order-1)(s)|]` at a candidate point.
pub fn ep_residuals(system: &DelaySystem, s: Complex64, order: usize) -> Result<Vec<f64>> {
    if !(2..=6).contains(&order) {
        return Err(Error::InvalidInput(format!(
            "exceptional-point order {order} outside the supported range 2..=6"
        )));
    }
    Ok((0..order)
        .map(|k| char_function(system, s, k).norm())
        .collect())
}

fn verify_report(report: &EpReport) -> Result<()> {
    let scale = EP_RESIDUAL * (1.0 + report.s_ep.norm());
    for (k, r) in report.residuals.iter().enumerate() {
        if *r > scale {
            return Err(Error::NoConvergence {
                context: format!("exceptional-point residual |D^({k})|"),
                last: report.s_ep,
                residual: *r,
            });
        }
    }
    Ok(())
}

/// Second-order exceptional point of the two-point giant atom with equal
/// couplings and decay rate `gamma`.
///
/// Coalescence of the two dominant poles requires the superradiant phase;
/// there `gamma tau_EP` solves `u e^{1+u} = 1`, i.e. `u = W_0(1/e)`, and the
/// degenerate rate is `s_EP = -gamma - 1/tau_EP`. Away from the superradiant
/// phase the outcome is a structured no-EP answer (at the subradiant phase
/// the spectrum instead holds the bound-state pole at s = 0, and the two
/// phenomena never coexist).
pub fn find_ep2_single_delay(gamma: f64, phi: f64) -> Result<EpOutcome> {
    if !(gamma > 0.0) || !phi.is_finite() {
        return Err(Error::InvalidInput(
            "require gamma > 0 and finite phi".into(),
        ));
    }
    let wrapped = phi.rem_euclid(std::f64::consts::TAU);
    let off_axis = wrapped.min(std::f64::consts::TAU - wrapped);
    if off_axis > 1e-9 {
        return Ok(EpOutcome::NoEp(NoEp {
            reason: format!(
                "pole coalescence requires the superradiant phase (phi = 0 mod 2 pi); \
                 phi = {phi} is off by {off_axis:.3e}. At phi = pi the spectrum instead \
                 carries the bound-state pole at s = 0."
            ),
            scan: None,
        }));
    }

    let u = lambert_w0_real(INV_E)?; // gamma * tau_EP
    let tau_ep = u / gamma;
    let s_ep = Complex64::new(-gamma - 1.0 / tau_ep, 0.0);
    let system = DelaySystem::single_delay(gamma, 0.0, tau_ep)?;
    let residuals = ep_residuals(&system, s_ep, 2)?;
    let report = EpReport {
        order: 2,
        s_ep,
        tau_ep,
        parameters: vec![("gamma".into(), gamma), ("gamma_tau_ep".into(), u)],
        residuals,
        validity_notes: Vec::new(),
    };
    verify_report(&report)?;
    Ok(EpOutcome::Found(report))
}

/// Third-order exceptional point of the three-point giant atom with the
/// first two couplings prescribed.
///
/// With `phi = 0` the two solvability conditions reduce to one constraint on
/// `g_3` and an explicit delay. Writing `S = g1^2 + g2^2 + g3^2`, the
/// constraint is
///
/// ```text
/// exp(-4 g1 g3 S / (g2 (g1 + g3))^2 + 3/2) = -g2 (g1 + g3) / (4 g1 g3)
/// ```
///
/// and the delay and degenerate rate follow as
/// `tau = -(4 v_g / pi) g1 g3 / (g2 (g1 + g3))^2` and
/// `s_EP = -kappa_0 - 3/(2 tau)`. A positive delay forces `g1 g3 < 0`, so
/// the scan runs over `g3/g1 in (-1, 0)` in log spacing; every sign change
/// is bisected and all roots are reported, the one with the smallest |g3|
/// as the primary. Group velocity is fixed to 1; only the dimensionless
/// products matter.
pub fn find_ep3_symmetric(g1: f64, g2: f64, phi: f64) -> Result<EpOutcome> {
    if g1 == 0.0 || g2 == 0.0 || !g1.is_finite() || !g2.is_finite() {
        return Err(Error::InvalidInput("require nonzero finite g1, g2".into()));
    }
    if phi != 0.0 {
        return Err(Error::InvalidInput(
            "the solvability conditions are solved for phi = 0 only".into(),
        ));
    }
    let g1 = g1.abs(); // overall sign of the coupling list is a gauge
    let g2 = g2.abs();

    // Residual of the constraint in log form, as a function of r = g3/g1.
    let residual = |r: f64| -> Option<f64> {
        let g3 = r * g1;
        let s = g1 * g1 + g2 * g2 + g3 * g3;
        let denom = g2 * (g1 + g3);
        if denom == 0.0 {
            return None;
        }
        let exponent = -4.0 * g1 * g3 * s / (denom * denom) + 1.5;
        let rhs = -denom / (4.0 * g1 * g3);
        if rhs <= 0.0 {
            return None;
        }
        Some(exponent - rhs.ln())
    };

    // 200-point log-spaced scan of g3/g1 over (-0.999, -1e-6).
    let n_scan = 200;
    let (lo, hi) = (1e-6f64, 0.999f64);
    let mut scan = Vec::with_capacity(n_scan);
    for k in 0..n_scan {
        let mag = lo * (hi / lo).powf(k as f64 / (n_scan - 1) as f64);
        let r = -mag;
        if let Some(f) = residual(r) {
            scan.push((r, f));
        }
    }

    let mut roots = Vec::new();
    for w in scan.windows(2) {
        let (r0, f0) = w[0];
        let (r1, f1) = w[1];
        if f0 == 0.0 {
            roots.push(r0);
            continue;
        }
        if f0 * f1 < 0.0 {
            let (mut a, mut b, mut fa) = (r0, r1, f0);
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                let fm = residual(mid).unwrap_or(f64::NAN);
                if !fm.is_finite() {
                    break;
                }
                if fa * fm <= 0.0 {
                    b = mid;
                } else {
                    a = mid;
                    fa = fm;
                }
                if (b - a).abs() <= 1e-16 * a.abs().max(b.abs()) {
                    break;
                }
            }
            roots.push(0.5 * (a + b));
        }
    }

    if roots.is_empty() {
        return Ok(EpOutcome::NoEp(NoEp {
            reason: format!(
                "no sign change of the solvability residual for g3/g1 in (-{hi}, -{lo}) \
                 at g2/g1 = {:.6}",
                g2 / g1
            ),
            scan: Some(scan),
        }));
    }
    // Root of smallest magnitude: the one continuously connected to the
    // weak-third-coupling regime.
    roots.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
    let r = roots[0];

    let g3 = r * g1;
    let probe = GiantAtomModel::new(vec![g1, g2, g3], 1.0, 1.0, 0.0)?;
    let kappa = probe.kappa_weights();
    let tau = -8.0 * kappa[2] / (kappa[1] * kappa[1]);
    if !(tau > 0.0) {
        return Err(Error::Infeasible(format!(
            "solvability root g3/g1 = {r} gives non-positive delay {tau}"
        )));
    }
    let model = GiantAtomModel::new(vec![g1, g2, g3], 1.0, tau, 0.0)?;
    let system = model.delay_system();
    let s_ep = Complex64::new(-kappa[0] - 1.5 / tau, 0.0);
    let residuals = ep_residuals(&system, s_ep, 3)?;

    // Verify both solvability conditions directly.
    let cond_delay = (tau * kappa[1] * kappa[1] / (8.0 * kappa[2]) + 1.0).abs();
    let cond_phase = ((kappa[0] * tau + 1.5).exp() + kappa[1] / (4.0 * kappa[2])).abs();
    let scale = 1.0 + (kappa[1] / (4.0 * kappa[2])).abs();
    if cond_delay > 1e-10 || cond_phase > 1e-10 * scale {
        return Err(Error::NoConvergence {
            context: "three-point solvability conditions".into(),
            last: Complex64::new(cond_delay, cond_phase),
            residual: cond_delay.max(cond_phase),
        });
    }

    let gamma = std::f64::consts::PI * g1 * g1; // v_g = 1
    let mut notes = Vec::new();
    if roots.len() > 1 {
        notes.push(format!(
            "additional solvability roots at g3/g1 = {:?}",
            &roots[1..]
        ));
    }
    let report = EpReport {
        order: 3,
        s_ep,
        tau_ep: tau,
        parameters: vec![
            ("g1".into(), g1),
            ("g2".into(), g2),
            ("g3".into(), g3),
            ("g3_over_g1".into(), r),
            ("kappa0".into(), kappa[0]),
            ("kappa1".into(), kappa[1]),
            ("kappa2".into(), kappa[2]),
            ("gamma".into(), gamma),
            ("gamma_tau_ep".into(), gamma * tau),
            ("cond_delay_residual".into(), cond_delay),
            ("cond_phase_residual".into(), cond_phase),
        ],
        residuals,
        validity_notes: notes,
    };
    verify_report(&report)?;
    Ok(EpOutcome::Found(report))
}

/// Harmonic number `H_n = 1 + 1/2 + ... + 1/n`.
fn harmonic(n: usize) -> f64 {
    (1..=n).map(|k| 1.0 / k as f64).sum()
}

/// Design an order-`n` exceptional point at a prescribed real rate
/// `s_ep < 0` and delay `tau` for an n-point giant atom.
///
/// The degeneracy conditions are linear in the delay-class weights; in the
/// scaled variables `x_m = kappa_m e^{-s m tau}` they form a Vandermonde
/// system in the nodes `m tau`, solved by Gaussian elimination with partial
/// pivoting. Feasibility requires `kappa_0 > 0`, which pins the delay above
/// `H_{n-1} / |s_ep|` (3/(2 |s_ep|) at n = 3): the point cannot be reached
/// in the instantaneous-decay limit. The physical couplings then come from
/// [`hankel_invert`]; if no real coupling set exists the weight-level result
/// is returned with a flag. Group velocity is fixed to 1.
pub fn design_ep_n(n: usize, s_ep: f64, tau: f64, phi: f64) -> Result<EpOutcome> {
    if !(2..=6).contains(&n) {
        return Err(Error::InvalidInput(format!(
            "supported exceptional-point orders are 2..=6, got {n} \
             (higher orders are too ill-conditioned in double precision)"
        )));
    }
    if !(s_ep < 0.0) || !s_ep.is_finite() {
        return Err(Error::InvalidInput(
            "require a finite target rate s_ep < 0".into(),
        ));
    }
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::InvalidInput("require a finite delay tau > 0".into()));
    }
    if phi != 0.0 {
        return Err(Error::InvalidInput(
            "real delay-class weights require phi = 0".into(),
        ));
    }

    // Vandermonde system in x_m = kappa_m e^{-s m tau}: row k reads
    // sum_m (m tau)^k x_m = rhs_k with rhs = (-s_ep, 1, 0, ..., 0).
    let mut a: Vec<Vec<f64>> = (0..n)
        .map(|k| (0..n).map(|m| (m as f64 * tau).powi(k as i32)).collect())
        .collect();
    let mut b = vec![0.0; n];
    b[0] = -s_ep;
    b[1] = 1.0;
    let x = linalg::solve(&mut a, &mut b)?;
    let kappa: Vec<f64> = x
        .iter()
        .enumerate()
        .map(|(m, xm)| xm * (s_ep * m as f64 * tau).exp())
        .collect();

    if kappa[0] <= 0.0 {
        let bound = harmonic(n - 1) / s_ep.abs();
        return Err(Error::Infeasible(format!(
            "kappa_0 = {:.6} <= 0: tau = {tau} is below the feasibility bound \
             tau > H_{}/|s_ep| = {bound:.6} for an order-{n} point \
             (3/(2 |s_ep|) at n = 3); the point is unreachable in the \
             short-delay limit",
            kappa[0],
            n - 1
        )));
    }

    // Weight-level system (v_g = 1): c_m = -kappa_m.
    let kappa_system = DelaySystem::new(
        tau,
        kappa.iter().map(|&k| Complex64::new(-k, 0.0)).collect(),
    )?;
    let s = Complex64::new(s_ep, 0.0);
    let kappa_residuals = ep_residuals(&kappa_system, s, n)?;

    let mut parameters: Vec<(String, f64)> = kappa
        .iter()
        .enumerate()
        .map(|(m, &k)| (format!("kappa{m}"), k))
        .collect();
    parameters.push(("tau_s_ep".into(), tau * s_ep.abs()));

    // Quadratic coupling weights K_m = kappa_m v_g / pi, then invert.
    let k_weights: Vec<f64> = kappa.iter().map(|k| k / std::f64::consts::PI).collect();
    let mut notes = Vec::new();

    match hankel_invert(&k_weights) {
        Ok(g) => {
            let model = GiantAtomModel::new(g.clone(), 1.0, tau, 0.0)?;
            let kappa_back = model.kappa_weights();
            let scale = kappa.iter().fold(0.0f64, |m, k| m.max(k.abs()));
            for (m, (want, got)) in kappa.iter().zip(&kappa_back).enumerate() {
                if (want - got).abs() > KAPPA_ROUND_TRIP * scale.max(1.0) {
                    return Err(Error::NoConvergence {
                        context: format!("coupling round trip at delay class {m}"),
                        last: Complex64::new(*got, 0.0),
                        residual: (want - got).abs(),
                    });
                }
            }
            let system = model.delay_system();
            let residuals = ep_residuals(&system, s, n)?;
            for (j, gj) in g.iter().enumerate() {
                parameters.push((format!("g{}", j + 1), *gj));
            }
            let report = EpReport {
                order: n,
                s_ep: s,
                tau_ep: tau,
                parameters,
                residuals,
                validity_notes: notes,
            };
            verify_report(&report)?;
            Ok(EpOutcome::Found(report))
        }
        Err(Error::NoPhysicalCouplings { detail }) => {
            notes.push(format!(
                "no-physical-couplings: delay-class weights realize the point but no real \
                 coupling set reproduces them ({detail})"
            ));
            let report = EpReport {
                order: n,
                s_ep: s,
                tau_ep: tau,
                parameters,
                residuals: kappa_residuals,
                validity_notes: notes,
            };
            verify_report(&report)?;
            Ok(EpOutcome::Found(report))
        }
        Err(e) => Err(e),
    }
}

/// Recover real couplings `g_1..g_N` from the quadratic delay-class weights
///
/// ```text
/// K_0 = sum_j g_j^2,    K_m = 2 sum_j g_j g_{j+m}   (m >= 1),
/// ```
///
/// fixing the gauge `g_1 > 0` (the relations are invariant under a global
/// sign flip and under reversal of the coupling list).
///
/// For three couplings the system reduces to a scalar equation
/// `F(X) = K_0` in `X = g_1^2`, with
/// `F(X) = X + K_1^2 X / (2X + K_2)^2 + K_2^2 / (4X)`, scanned over a wide
/// bracket and bisected; the returned solution is the root nearest the
/// perturbative seed `X ~ K_0`, and [`hankel_invert_all`] exposes every real
/// solution (the quadratic system can admit several inequivalent ones). For
/// other sizes a Newton iteration runs from the perturbative seed
/// `g_1 ~ sqrt(K_0)`, `g_{m+1} ~ K_m / (2 g_1)`, which is the regime the
/// long-delay design produces.
pub fn hankel_invert(k: &[f64]) -> Result<Vec<f64>> {
    let mut all = hankel_solutions(k)?;
    // Nearest to the perturbative seed X = K_0 in log distance.
    let k0 = k[0];
    all.sort_by(|a, b| {
        let da = (a[0] * a[0] / k0).ln().abs();
        let db = (b[0] * b[0] / k0).ln().abs();
        da.total_cmp(&db)
    });
    Ok(all.swap_remove(0))
}

/// Every real coupling set consistent with the weights, gauge-fixed to
/// `g_1 >= 0` and sorted by descending leading coupling.
pub fn hankel_invert_all(k: &[f64]) -> Result<Vec<Vec<f64>>> {
    hankel_solutions(k)
}

fn forward_weights(g: &[f64]) -> Vec<f64> {
    let n = g.len();
    let mut out = Vec::with_capacity(n);
    out.push(g.iter().map(|x| x * x).sum());
    for m in 1..n {
        out.push(2.0 * (0..n - m).map(|j| g[j] * g[j + m]).sum::<f64>());
    }
    out
}

fn gauge_fix(mut g: Vec<f64>) -> Vec<f64> {
    if let Some(first) = g.iter().find(|x| **x != 0.0) {
        if *first < 0.0 {
            g.iter_mut().for_each(|x| *x = -*x);
        }
    }
    g
}

fn hankel_solutions(k: &[f64]) -> Result<Vec<Vec<f64>>> {
    if k.is_empty() || !(k[0] > 0.0) {
        return Err(Error::InvalidInput(
            "weight inversion requires K_0 > 0".into(),
        ));
    }
    let n = k.len();
    let residual_tol = 1e-10 * k[0];

    if n == 1 {
        return Ok(vec![vec![k[0].sqrt()]]);
    }

    if n == 3 {
        return hankel_three(k, residual_tol);
    }

    // Newton iteration on the full quadratic map from the perturbative seed.
    let mut g: Vec<f64> = Vec::with_capacity(n);
    g.push(k[0].sqrt());
    for m in 1..n {
        g.push(k[m] / (2.0 * g[0]));
    }
    for _ in 0..200 {
        let f: Vec<f64> = forward_weights(&g)
            .iter()
            .zip(k)
            .map(|(a, b)| a - b)
            .collect();
        let res = f.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if res <= residual_tol * 0.01 {
            return Ok(vec![gauge_fix(g)]);
        }
        // Jacobian of the quadratic map.
        let mut jac = vec![vec![0.0; n]; n];
        for (j, entry) in jac[0].iter_mut().enumerate() {
            *entry = 2.0 * g[j];
        }
        for m in 1..n {
            for j in 0..n {
                let mut d = 0.0;
                if j + m < n {
                    d += 2.0 * g[j + m];
                }
                if j >= m {
                    d += 2.0 * g[j - m];
                }
                jac[m][j] = d;
            }
        }
        let mut rhs: Vec<f64> = f.iter().map(|x| -x).collect();
        let step = match linalg::solve(&mut jac, &mut rhs) {
            Ok(s) => s,
            Err(_) => break,
        };
        // Damped update: halve until the residual does not grow.
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let trial: Vec<f64> = g.iter().zip(&step).map(|(a, b)| a + lambda * b).collect();
            let trial_res = forward_weights(&trial)
                .iter()
                .zip(k)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            if trial_res < res {
                g = trial;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    let final_res = forward_weights(&g)
        .iter()
        .zip(k)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    if final_res <= residual_tol {
        return Ok(vec![gauge_fix(g)]);
    }
    Err(Error::NoPhysicalCouplings {
        detail: format!(
            "Newton stalled at residual {final_res:.3e} (target {residual_tol:.3e}) for K = {k:?}"
        ),
    })
}

fn hankel_three(k: &[f64], residual_tol: f64) -> Result<Vec<Vec<f64>>> {
    let (k0, k1, k2) = (k[0], k[1], k[2]);

    // Back-substitution from X = g1^2; valid wherever denominators exist.
    let couplings_from = |x: f64| -> Option<Vec<f64>> {
        if !(x > 0.0) {
            return None;
        }
        let g1 = x.sqrt();
        let g3 = k2 / (2.0 * g1);
        let denom = 2.0 * x + k2;
        if denom == 0.0 {
            return None;
        }
        let g2 = k1 * g1 / denom;
        Some(vec![g1, g2, g3])
    };

    let f = |x: f64| -> Option<f64> {
        let g = couplings_from(x)?;
        Some(forward_weights(&g)[0] - k0)
    };

    // Log-spaced scan over a generous bracket around the seed X ~ K_0,
    // skipping across the pole of F at 2X + K_2 = 0 when K_2 < 0.
    let x_lo = 1e-8 * k0;
    let x_hi = 1e2 * k0;
    let n_scan = 2000;
    let mut samples: Vec<(f64, f64)> = Vec::with_capacity(n_scan);
    for i in 0..n_scan {
        let x = x_lo * (x_hi / x_lo).powf(i as f64 / (n_scan - 1) as f64);
        if let Some(v) = f(x) {
            if v.is_finite() {
                samples.push((x, v));
            }
        }
    }

    let pole_between = |a: f64, b: f64| -> bool {
        if k2 >= 0.0 {
            return false;
        }
        let xp = -k2 / 2.0;
        a < xp && xp < b
    };

    let mut solutions: Vec<Vec<f64>> = Vec::new();
    for w in samples.windows(2) {
        let (x0, f0) = w[0];
        let (x1, f1) = w[1];
        if pole_between(x0, x1) {
            continue;
        }
        if f0 == 0.0 || f0 * f1 < 0.0 {
            let (mut a, mut b, mut fa) = (x0, x1, f0);
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                match f(mid) {
                    Some(fm) if fm.is_finite() => {
                        if fa * fm <= 0.0 {
                            b = mid;
                        } else {
                            a = mid;
                            fa = fm;
                        }
                    }
                    _ => break,
                }
                if (b - a) <= 1e-16 * b {
                    break;
                }
            }
            let x = 0.5 * (a + b);
            if let Some(g) = couplings_from(x) {
                let res = forward_weights(&g)
                    .iter()
                    .zip(k)
                    .map(|(p, q)| (p - q).abs())
                    .fold(0.0f64, f64::max);
                if res <= residual_tol {
                    let g = gauge_fix(g);
                    if !solutions
                        .iter()
                        .any(|s: &Vec<f64>| s.iter().zip(&g).all(|(a, b)| (a - b).abs() < 1e-9))
                    {
                        solutions.push(g);
                    }
                }
            }
        }
    }
    solutions.sort_by(|a, b| b[0].total_cmp(&a[0]));
    if solutions.is_empty() {
        return Err(Error::NoPhysicalCouplings {
            detail: format!(
                "no real positive root of the reduced scalar equation for K = {k:?} \
                 over X in [{x_lo:.3e}, {x_hi:.3e}]"
            ),
        });
    }
    Ok(solutions)
}

/// Critical dimensionless separation `eta_c = gamma tau_c` at which the two
/// dominant poles of the collectively emitting pair coalesce:
/// `eta_c = 2 W_0(1 / (e beta))`, from the Lambert argument reaching the
/// branch point `-1/e`.
pub fn collective_critical_distance(beta: f64) -> Result<f64> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::Domain(format!(
            "collective critical distance needs beta in (0, 1], got {beta}"
        )));
    }
    Ok(2.0 * lambert_w0_real(1.0 / (std::f64::consts::E * beta))?)
}

/// Exceptional-point report for the collective pair at its critical
/// separation (symmetric sector, superradiant phase).
pub fn collective_ep(gamma: f64, beta: f64) -> Result<EpReport> {
    if !(gamma > 0.0) {
        return Err(Error::InvalidInput("require gamma > 0".into()));
    }
    let eta_c = collective_critical_distance(beta)?;
    let tau_ep = eta_c / gamma;
    let s_ep = Complex64::new(-gamma / 2.0 - 1.0 / tau_ep, 0.0);
    let model = crate::models::CollectiveModel::new(gamma, beta, 0.0, tau_ep)?;
    let system = model.delay_system(true)?;
    let residuals = ep_residuals(&system, s_ep, 2)?;
    let report = EpReport {
        order: 2,
        s_ep,
        tau_ep,
        parameters: vec![
            ("gamma".into(), gamma),
            ("beta".into(), beta),
            ("eta_c".into(), eta_c),
        ],
        residuals,
        validity_notes: vec!["symmetric-sector reduction of the emitter pair".into()],
    };
    verify_report(&report)?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent Newton solution of u e^u = x for real x > 0.
    fn newton_lambert(x: f64) -> f64 {
        let mut u = 0.3f64;
        for _ in 0..80 {
            let f = u * u.exp() - x;
            u -= f / ((u + 1.0) * u.exp());
        }
        u
    }

    #[test]
    fn ep2_location_and_rate() {
        let report = match find_ep2_single_delay(1.0, 0.0).unwrap() {
            EpOutcome::Found(r) => r,
            other => panic!("expected EP, got {other:?}"),
        };
        let u = newton_lambert(INV_E);
        assert!((report.tau_ep - u).abs() < 1e-12);
        assert!((report.tau_ep - 0.2784645427610738).abs() < 1e-9);
        assert!((report.s_ep.re - (-1.0 - 1.0 / u)).abs() < 1e-9);
        assert!((report.s_ep.re - (-4.591121)).abs() < 1e-5);
        assert!(report.residuals.iter().all(|r| *r <= 1e-8));
    }

    #[test]
    fn ep2_scales_inversely_with_rate() {
        let r1 = find_ep2_single_delay(1.0, 0.0).unwrap();
        let r2 = find_ep2_single_delay(2.0, 0.0).unwrap();
        let (r1, r2) = (r1.report().unwrap(), r2.report().unwrap());
        assert!((r2.tau_ep - r1.tau_ep / 2.0).abs() < 1e-14);
    }

    #[test]
    fn ep2_absent_off_superradiant_phase() {
        match find_ep2_single_delay(1.0, std::f64::consts::PI).unwrap() {
            EpOutcome::NoEp(no) => assert!(no.reason.contains("bound-state")),
            other => panic!("expected no-EP outcome, got {other:?}"),
        }
        // 2 pi is the superradiant phase again.
        assert!(matches!(
            find_ep2_single_delay(1.0, std::f64::consts::TAU).unwrap(),
            EpOutcome::Found(_)
        ));
    }

    #[test]
    fn ep_residuals_distinguish_simple_poles() {
        // Away from the critical delay the dominant pole is simple: |D| is
        // tiny there but |D'| stays order one.
        let sys = DelaySystem::single_delay(1.0, 0.0, 0.5).unwrap();
        let set = crate::spectral::poles_closed_form(&sys, 0..=0).unwrap();
        let s = set.poles()[0].s;
        let r = ep_residuals(&sys, s, 2).unwrap();
        assert!(r[0] <= 1e-10 * (1.0 + s.norm()));
        assert!(r[1] >= 0.1);
    }

    #[test]
    fn ep3_symmetric_matches_known_point() {
        let report = match find_ep3_symmetric(1.0, 1.0, 0.0).unwrap() {
            EpOutcome::Found(r) => r,
            other => panic!("expected EP, got {other:?}"),
        };
        let g3 = report.parameter("g3").unwrap();
        assert!((g3 - (-0.03846)).abs() < 5e-4, "g3 = {g3}");
        let gt = report.parameter("gamma_tau_ep").unwrap();
        assert!((gt - 0.1665).abs() < 5e-4, "gamma tau = {gt}");
        assert!(report.parameter("cond_delay_residual").unwrap() <= 1e-10);
        assert!(report
            .residuals
            .iter()
            .all(|r| *r <= 1e-8 * (1.0 + report.s_ep.norm())));
    }

    #[test]
    fn ep3_scaling_with_coupling_magnitude() {
        let a = find_ep3_symmetric(1.0, 1.0, 0.0).unwrap();
        let b = find_ep3_symmetric(2.0, 2.0, 0.0).unwrap();
        let (a, b) = (a.report().unwrap(), b.report().unwrap());
        let ra = a.parameter("g3_over_g1").unwrap();
        let rb = b.parameter("g3_over_g1").unwrap();
        assert!((ra - rb).abs() < 1e-12);
        assert!((b.tau_ep - a.tau_ep / 4.0).abs() < 1e-12 * a.tau_ep);
    }

    #[test]
    fn design_three_point_closed_forms() {
        let report = match design_ep_n(3, -2.0, 1.0, 0.0).unwrap() {
            EpOutcome::Found(r) => r,
            other => panic!("expected design, got {other:?}"),
        };
        let e2 = (-2.0f64).exp();
        let e4 = (-4.0f64).exp();
        assert!((report.parameter("kappa0").unwrap() - 0.5).abs() <= 1e-12);
        assert!((report.parameter("kappa1").unwrap() - 2.0 * e2).abs() <= 1e-12);
        assert!((report.parameter("kappa2").unwrap() - (-0.5 * e4)).abs() <= 1e-12);
        assert!(report.residuals.iter().all(|r| *r <= 1e-8 * 3.0));
        assert!(report.parameter("g1").is_some());
    }

    #[test]
    fn design_rejects_short_delay() {
        match design_ep_n(3, -2.0, 0.7, 0.0) {
            Err(Error::Infeasible(msg)) => {
                assert!(msg.contains("0.75"), "message should cite the bound: {msg}");
            }
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn design_two_point_reproduces_single_delay_relation() {
        // At order 2 the designed weights must satisfy s_ep = -kappa_0 - 1/tau.
        let report = design_ep_n(2, -3.0, 1.0, 0.0).unwrap();
        let report = report.report().unwrap();
        let k0 = report.parameter("kappa0").unwrap();
        assert!((report.s_ep.re - (-k0 - 1.0)).abs() < 1e-12);

        // Feeding the located equal-coupling point back into the designer
        // must reproduce equal weights kappa_0 = kappa_1 = gamma.
        let located = find_ep2_single_delay(1.0, 0.0).unwrap();
        let located = located.report().unwrap();
        let designed = design_ep_n(2, located.s_ep.re, located.tau_ep, 0.0).unwrap();
        let designed = designed.report().unwrap();
        assert!((designed.parameter("kappa0").unwrap() - 1.0).abs() < 1e-9);
        assert!((designed.parameter("kappa1").unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn design_infeasibility_boundary_is_harmonic() {
        // Just above H_{n-1}/|s| the design succeeds; just below it fails.
        for n in 2..=5usize {
            let h = harmonic(n - 1);
            let s = -1.0f64;
            assert!(design_ep_n(n, s, h * 1.01, 0.0).is_ok(), "n = {n} above");
            assert!(
                matches!(design_ep_n(n, s, h * 0.99, 0.0), Err(Error::Infeasible(_))),
                "n = {n} below"
            );
        }
    }

    #[test]
    fn hankel_single_nonzero_weight() {
        let g = hankel_invert(&[4.0, 0.0, 0.0, 0.0]).unwrap();
        assert!((g[0] - 2.0).abs() < 1e-12);
        for x in &g[1..] {
            assert!(x.abs() < 1e-12);
        }
    }

    #[test]
    fn hankel_round_trip_contains_original() {
        let g0 = vec![1.0, 1.0, -0.03846];
        let k = forward_weights(&g0);
        let all = hankel_invert_all(&k).unwrap();
        let matches_orig = |g: &Vec<f64>| -> bool {
            let rev: Vec<f64> = g0.iter().rev().cloned().collect();
            for cand in [g0.clone(), rev] {
                for sign in [1.0, -1.0] {
                    if g.iter()
                        .zip(&cand)
                        .all(|(a, b)| (a - sign * b).abs() < 1e-8)
                    {
                        return true;
                    }
                }
            }
            false
        };
        assert!(
            all.iter().any(matches_orig),
            "no solution matches the original couplings: {all:?}"
        );
        for g in &all {
            let res = forward_weights(g)
                .iter()
                .zip(&k)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            assert!(res <= 1e-10 * k[0]);
        }
    }

    #[test]
    fn design_round_trip_end_to_end() {
        let report = design_ep_n(3, -2.0, 1.0, 0.0).unwrap();
        let report = report.report().unwrap();
        let g: Vec<f64> = (1..=3)
            .map(|j| report.parameter(&format!("g{j}")).unwrap())
            .collect();
        let model = GiantAtomModel::new(g, 1.0, 1.0, 0.0).unwrap();
        let kappa = model.kappa_weights();
        for m in 0..3 {
            let want = report.parameter(&format!("kappa{m}")).unwrap();
            assert!((kappa[m] - want).abs() <= 1e-10);
        }
        let residuals = ep_residuals(&model.delay_system(), report.s_ep, 3).unwrap();
        assert!(residuals.iter().all(|r| *r <= 1e-8 * 3.0));
    }

    #[test]
    fn collective_distance_values() {
        let eta = collective_critical_distance(1.0).unwrap();
        assert!((eta - 0.556929).abs() < 1e-6);
        assert!((eta - 2.0 * newton_lambert(INV_E)).abs() < 1e-12);

        let eta01 = collective_critical_distance(0.1).unwrap();
        assert!((eta01 - 2.0 * newton_lambert(10.0 * INV_E)).abs() < 1e-12);
        assert!((eta01 - 2.3137).abs() < 1e-3);

        for beta in [0.1, 0.5, 1.0] {
            let eta = collective_critical_distance(beta).unwrap();
            let check = 0.5 * beta * eta * (eta / 2.0).exp();
            assert!((check - INV_E).abs() <= 1e-12, "beta = {beta}");
        }
        assert!(collective_critical_distance(0.0).is_err());
        assert!(collective_critical_distance(1.5).is_err());
    }

    #[test]
    fn collective_report_is_verified_ep() {
        let report = collective_ep(1.0, 1.0).unwrap();
        assert_eq!(report.order, 2);
        assert!(report.residuals.iter().all(|r| *r <= 1e-8 * 4.0));
        let eta = report.parameter("eta_c").unwrap();
        assert!((report.tau_ep - eta).abs() < 1e-15);
    }

    #[test]
    fn report_json_shape() {
        let report = find_ep2_single_delay(1.0, 0.0).unwrap();
        let json = serde_json::to_value(report.report().unwrap()).unwrap();
        assert_eq!(json["order"], 2);
        assert!(json["s_ep"]["re"].as_f64().unwrap() < 0.0);
        assert_eq!(json["s_ep"]["im"].as_f64().unwrap(), 0.0);
        assert!(json["tau_ep"].as_f64().unwrap() > 0.0);
        assert!(json["parameters"]["gamma"].as_f64().is_some());
        assert!(json["residuals"].as_array().unwrap().len() == 2);
        assert!(json["notes"].as_array().is_some());
    }
}
