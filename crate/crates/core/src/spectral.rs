//! Laplace-domain analysis of the delay systems.
//!
//! The Laplace transform of the canonical delay equation has the resolvent
//! `1 / D(s)` with the entire characteristic function
//!
//! ```text
//! D(s) = s - sum_m c_m exp(-s m tau)
//! ```
//!
//! Its zeros are the dynamical poles; simple zeros contribute
//! `exp(s_n t) / D'(s_n)` to the amplitude and coalescing zeros mark
//! exceptional points. For systems with a single delay class the full pole
//! set is available in closed form through the Lambert W branches; for
//! multi-delay systems a Newton search from a seed grid is certified
//! complete with the argument principle.

use num_complex::Complex64;
use rayon::prelude::*;
use std::io::Write;
use std::ops::RangeInclusive;

use crate::models::DelaySystem;
use crate::special::lambert_w;
use crate::{Error, Result};

/// Absolute tolerance scale for a pole: `|D(s)| <= POLE_RESIDUAL * (1 + |s|)`.
const POLE_RESIDUAL: f64 = 1e-10;

/// Poles closer than this are the same pole.
const DEDUP_TOL: f64 = 1e-8;

/// Poles within this distance whose `|D'|` also falls below it are treated
/// as numerically coalesced and reported once with a multiplicity flag.
const COALESCE_TOL: f64 = 1e-6;

/// Growing modes are rejected beyond this bound (exact bound states sit at
/// `Re s = 0`).
const MAX_RE: f64 = 1e-9;

/// A characteristic root with optional Lambert-branch label and residue
/// weight `1 / D'(s)` (zero when the pole is flagged as multiple).
#[derive(Debug, Clone, PartialEq)]
pub struct Pole {
    pub s: Complex64,
    pub branch: Option<i32>,
    pub residue_weight: Complex64,
    pub multiplicity: usize,
}

/// Poles sorted by descending real part, ties by ascending |Im s|.
#[derive(Debug, Clone, PartialEq)]
pub struct PoleSet {
    poles: Vec<Pole>,
}

impl PoleSet {
    fn from_raw(mut poles: Vec<Pole>) -> Self {
        poles.sort_by(|a, b| {
            b.s.re
                .total_cmp(&a.s.re)
                .then(a.s.im.abs().total_cmp(&b.s.im.abs()))
                .then(b.s.im.total_cmp(&a.s.im))
        });
        PoleSet { poles }
    }

    pub fn poles(&self) -> &[Pole] {
        &self.poles
    }

    pub fn len(&self) -> usize {
        self.poles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poles.is_empty()
    }

    /// Number of poles counted with multiplicity.
    pub fn count_with_multiplicity(&self) -> usize {
        self.poles.iter().map(|p| p.multiplicity).sum()
    }

    pub fn find_branch(&self, branch: i32) -> Option<&Pole> {
        self.poles.iter().find(|p| p.branch == Some(branch))
    }

    /// Write `branch,re_s,im_s,re_residue,im_residue,multiplicity` rows with
    /// 17 significant digits. Merged poles print the surviving branch label;
    /// searched poles have no label and print an empty field.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "branch,re_s,im_s,re_residue,im_residue,multiplicity")?;
        for p in &self.poles {
            let branch = p.branch.map(|n| n.to_string()).unwrap_or_default();
            writeln!(
                w,
                "{},{:.16e},{:.16e},{:.16e},{:.16e},{}",
                branch, p.s.re, p.s.im, p.residue_weight.re, p.residue_weight.im, p.multiplicity
            )?;
        }
        Ok(())
    }
}

/// Evaluate `D(s)` or one of its derivatives analytically.
///
/// `order = 0` gives `D(s) = s - sum_m c_m e^{-s m tau}`; order `k >= 1`
/// gives `d^k D / ds^k`, i.e. `1 + sum_m c_m (m tau) e^{-s m tau}` for the
/// first derivative and `-sum_m c_m (-m tau)^k e^{-s m tau}` beyond.
/// Orders above six are outside the supported exceptional-point range and
/// panic; this is a caller contract, not a runtime condition.
pub fn char_function(system: &DelaySystem, s: Complex64, order: usize) -> Complex64 {
    assert!(order <= 6, "derivative order capped at 6");
    let tau = system.base_delay();
    let mut acc = match order {
        0 => s,
        1 => Complex64::new(1.0, 0.0),
        _ => Complex64::new(0.0, 0.0),
    };
    for (m, c) in system.coeffs().iter().enumerate() {
        if *c == Complex64::new(0.0, 0.0) {
            continue;
        }
        let mt = -(m as f64) * tau;
        let factor = if order == 0 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(mt.powi(order as i32), 0.0)
        };
        acc -= c * factor * (s * mt).exp();
    }
    acc
}

fn pole_invariant(system: &DelaySystem, s: Complex64) -> Result<()> {
    let d = char_function(system, s, 0).norm();
    if d > POLE_RESIDUAL * (1.0 + s.norm()) {
        return Err(Error::NoConvergence {
            context: "pole residual check".into(),
            last: s,
            residual: d,
        });
    }
    if s.re > MAX_RE {
        return Err(Error::InvalidInput(format!(
            "root at s = {s} has positive real part; the system is not passive"
        )));
    }
    Ok(())
}

/// Collapse duplicate root candidates into poles.
///
/// Candidates within [`DEDUP_TOL`] are the same root; candidates within
/// [`COALESCE_TOL`] whose `|D'|` also falls below it are numerically
/// coalesced and collapse too. The multiplicity of a merged root is read off
/// the derivatives at the best representative: a root with `|D'|` below the
/// coalescence scale counts as the order of the first derivative that does
/// not vanish there. Different seeds repeatedly finding the same simple root
/// therefore do not inflate the count.
fn merge_candidates(system: &DelaySystem, mut cands: Vec<(Complex64, Option<i32>)>) -> Vec<Pole> {
    cands.sort_by(|a, b| {
        a.0.re
            .total_cmp(&b.0.re)
            .then(a.0.im.total_cmp(&b.0.im))
            .then(a.1.unwrap_or(0).cmp(&b.1.unwrap_or(0)))
    });
    let mut clusters: Vec<Vec<(Complex64, Option<i32>)>> = Vec::new();
    'outer: for (s, branch) in cands {
        for cl in clusters.iter_mut() {
            let rep = cl[0].0;
            let dist = (rep - s).norm();
            let coalesced = dist <= COALESCE_TOL
                && (char_function(system, s, 1).norm() < COALESCE_TOL
                    || char_function(system, rep, 1).norm() < COALESCE_TOL);
            if dist <= DEDUP_TOL || coalesced {
                cl.push((s, branch));
                continue 'outer;
            }
        }
        clusters.push(vec![(s, branch)]);
    }
    clusters
        .into_iter()
        .map(|cl| {
            let s = cl
                .iter()
                .map(|&(s, _)| s)
                .min_by(|a, b| {
                    char_function(system, *a, 0)
                        .norm()
                        .total_cmp(&char_function(system, *b, 0).norm())
                })
                .expect("clusters are non-empty");
            // Prefer the label closest to the principal branch.
            let branch = cl
                .iter()
                .filter_map(|&(_, b)| b)
                .min_by_key(|n| (n.abs(), *n));
            let scale = COALESCE_TOL * (1.0 + s.norm());
            let multiplicity = if char_function(system, s, 1).norm() < scale {
                (2..=6)
                    .find(|&k| char_function(system, s, k).norm() >= scale)
                    .unwrap_or(6)
            } else {
                1
            };
            let residue_weight = if multiplicity == 1 {
                char_function(system, s, 1).finv()
            } else {
                Complex64::new(0.0, 0.0)
            };
            Pole {
                s,
                branch,
                residue_weight,
                multiplicity,
            }
        })
        .collect()
}

/// Closed-form pole set of a system with delay classes {0, 1}:
/// `s_n = c_0 + W_n(c_1 tau e^{-c_0 tau}) / tau` over the requested branches.
///
/// For the two-point giant atom this specializes to
/// `s_n = -gamma + W_n(-gamma tau e^{gamma tau} e^{i phi}) / tau`, and for
/// the collective pair to the same form with `gamma -> gamma/2` and the
/// argument scaled by `beta`.
pub fn poles_closed_form(system: &DelaySystem, branches: RangeInclusive<i32>) -> Result<PoleSet> {
    if system.classes() != 2 {
        return Err(Error::InvalidInput(format!(
            "closed form requires exactly delay classes {{0, 1}}, got {}; use poles_search",
            system.classes()
        )));
    }
    let tau = system.base_delay();
    let c0 = system.coeffs()[0];
    let c1 = system.coeffs()[1];
    let arg = c1 * tau * (-c0 * tau).exp();

    let mut cands = Vec::new();
    if arg == Complex64::new(0.0, 0.0) {
        // Degenerate single-pole case: only the principal branch exists.
        if branches.contains(&0) {
            cands.push((c0, Some(0)));
        }
    } else {
        for n in branches {
            let w = lambert_w(n, arg)?;
            cands.push((c0 + w / tau, Some(n)));
        }
    }
    let poles = merge_candidates(system, cands);
    for p in &poles {
        pole_invariant(system, p.s)?;
    }
    Ok(PoleSet::from_raw(poles))
}

/// Complex rectangle `[re_min, re_max] x [im_min, im_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Rect {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Result<Self> {
        let r = Rect {
            re_min,
            re_max,
            im_min,
            im_max,
        };
        if !(re_min < re_max && im_min < im_max)
            || ![re_min, re_max, im_min, im_max]
                .iter()
                .all(|x| x.is_finite())
        {
            return Err(Error::InvalidInput(format!("degenerate rectangle {r:?}")));
        }
        Ok(r)
    }

    fn contains(&self, s: Complex64) -> bool {
        s.re >= self.re_min && s.re <= self.re_max && s.im >= self.im_min && s.im <= self.im_max
    }

    fn corners(&self) -> [Complex64; 4] {
        [
            Complex64::new(self.re_min, self.im_min),
            Complex64::new(self.re_max, self.im_min),
            Complex64::new(self.re_max, self.im_max),
            Complex64::new(self.re_min, self.im_max),
        ]
    }
}

/// Find every pole inside `rect` by Newton refinement from a seed grid, and
/// certify completeness with [`argument_principle_count`]. The seed spacing
/// resolves the asymptotic vertical string spacing `2 pi / ((M-1) tau)` of
/// an M-class system at least fourfold.
pub fn poles_search(system: &DelaySystem, rect: Rect, max_poles: usize) -> Result<PoleSet> {
    if max_poles == 0 {
        return Err(Error::InvalidInput("max_poles must be at least 1".into()));
    }

    let m_classes = system.classes();
    if m_classes == 1 {
        // No delayed terms: D(s) = s - c_0 has the single zero c_0.
        let c0 = system.coeffs()[0];
        let mut poles = Vec::new();
        if rect.contains(c0) {
            pole_invariant(system, c0)?;
            poles.push(Pole {
                s: c0,
                branch: None,
                residue_weight: Complex64::new(1.0, 0.0),
                multiplicity: 1,
            });
        }
        let found = poles.len();
        let expected = argument_principle_count(system, rect)?;
        if found != expected {
            return Err(Error::IncompleteSpectrum {
                found,
                expected,
                poles,
            });
        }
        return Ok(PoleSet::from_raw(poles));
    }

    let tau = system.base_delay();
    let spacing = std::f64::consts::PI / (2.0 * (m_classes - 1) as f64 * tau);
    let nx = (((rect.re_max - rect.re_min) / spacing).ceil() as usize + 2).max(2);
    let ny = (((rect.im_max - rect.im_min) / spacing).ceil() as usize + 2).max(2);
    if nx.saturating_mul(ny) > 4_000_000 {
        return Err(Error::InvalidInput(format!(
            "seed grid {nx} x {ny} too large; shrink the rectangle"
        )));
    }

    let seeds: Vec<Complex64> = (0..nx)
        .flat_map(|i| {
            let re = rect.re_min + (rect.re_max - rect.re_min) * i as f64 / (nx - 1) as f64;
            (0..ny).map(move |j| {
                let im = rect.im_min + (rect.im_max - rect.im_min) * j as f64 / (ny - 1) as f64;
                Complex64::new(re, im)
            })
        })
        .collect();

    let mut roots: Vec<Complex64> = seeds
        .par_iter()
        .filter_map(|&seed| newton_root(system, seed, spacing))
        .filter(|s| rect.contains(*s))
        .collect();
    // Deterministic merge order regardless of the parallel schedule.
    roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));

    let poles = merge_candidates(system, roots.into_iter().map(|s| (s, None)).collect());
    for p in &poles {
        pole_invariant(system, p.s)?;
    }

    let found = poles.iter().map(|p| p.multiplicity).sum::<usize>();
    if found > max_poles {
        return Err(Error::InvalidInput(format!(
            "{found} poles in the rectangle exceed max_poles = {max_poles}"
        )));
    }
    let expected = argument_principle_count(system, rect)?;
    if found != expected {
        return Err(Error::IncompleteSpectrum {
            found,
            expected,
            poles,
        });
    }
    Ok(PoleSet::from_raw(poles))
}

fn newton_root(system: &DelaySystem, mut s: Complex64, step_cap: f64) -> Option<Complex64> {
    let cap = 4.0 * step_cap.max(1e-3);
    for _ in 0..80 {
        let d = char_function(system, s, 0);
        let dp = char_function(system, s, 1);
        if dp.norm() < 1e-300 {
            return None;
        }
        let mut ds = d / dp;
        if ds.norm() > cap {
            ds *= cap / ds.norm();
        }
        s -= ds;
        if !s.re.is_finite() || !s.im.is_finite() {
            return None;
        }
        if ds.norm() <= 1e-13 * (1.0 + s.norm()) {
            return Some(s);
        }
    }
    None
}

/// Count the zeros of `D` (with multiplicity) inside `rect` by the winding
/// number of `D` along the boundary: the trapezoid rule on `D'/D` is refined
/// until the integral sits within 1e-3 of an integer and two consecutive
/// refinements agree. `D` is entire, so zeros are all the contour can wind
/// around. Fails if `|D|` nearly vanishes on the contour itself.
pub fn argument_principle_count(system: &DelaySystem, rect: Rect) -> Result<usize> {
    let corners = rect.corners();

    // Proximity scan: a zero on the contour makes the winding ill-defined.
    for edge in 0..4 {
        let a = corners[edge];
        let b = corners[(edge + 1) % 4];
        let samples = 256;
        for k in 0..=samples {
            let s = a + (b - a) * (k as f64 / samples as f64);
            let d = char_function(system, s, 0).norm();
            if d < 1e-9 * (1.0 + s.norm()) {
                return Err(Error::ContourNearZero { s, min_abs: d });
            }
        }
    }

    let integral = |n: usize| -> Complex64 {
        let mut total = Complex64::new(0.0, 0.0);
        for edge in 0..4 {
            let a = corners[edge];
            let b = corners[(edge + 1) % 4];
            let h = (b - a) / n as f64;
            let f = |s: Complex64| char_function(system, s, 1) / char_function(system, s, 0);
            let mut acc = 0.5 * (f(a) + f(b));
            for k in 1..n {
                acc += f(a + h * k as f64);
            }
            total += acc * h;
        }
        total / Complex64::new(0.0, std::f64::consts::TAU)
    };

    let mut n = 64;
    let mut prev = integral(n);
    while n <= (1 << 22) {
        n *= 2;
        let cur = integral(n);
        let nearest = cur.re.round();
        if (cur.re - nearest).abs() <= 1e-3 && cur.im.abs() <= 1e-3 && (cur - prev).norm() <= 1e-3
        {
            if nearest < 0.0 {
                return Err(Error::NoConvergence {
                    context: "argument principle".into(),
                    last: cur,
                    residual: cur.re,
                });
            }
            return Ok(nearest as usize);
        }
        prev = cur;
    }
    Err(Error::NoConvergence {
        context: "argument principle refinement".into(),
        last: prev,
        residual: (prev.re - prev.re.round()).abs(),
    })
}

/// Reconstruct the amplitude at time `t` (for unit initial amplitude) from a
/// set of simple poles: `a(t) = sum_n e^{s_n t} / D'(s_n)`.
///
/// The truncated sum converges slowly for `t` well below the base delay;
/// with a few hundred branch pairs it is reliable from about `tau / 2`
/// onward. Poles flagged with multiplicity are rejected: at an exceptional
/// point the simple-pole residue formula does not apply.
pub fn residue_sum(system: &DelaySystem, poles: &PoleSet, t: f64) -> Result<Complex64> {
    if !(t > 0.0) {
        return Err(Error::InvalidInput("residue_sum requires t > 0".into()));
    }
    let _ = system;
    let mut acc = Complex64::new(0.0, 0.0);
    for p in poles.poles() {
        if p.multiplicity > 1 {
            return Err(Error::MultiplePole {
                s: p.s,
                multiplicity: p.multiplicity,
            });
        }
        acc += (p.s * t).exp() * p.residue_weight;
    }
    Ok(acc)
}

/// Least-squares exponent of `Omega` against `tau - tau_ep` in log-log form.
/// Returns `(exponent, r_squared)`.
pub fn scaling_fit(taus: &[f64], omegas: &[f64], tau_ep: f64) -> Result<(f64, f64)> {
    if taus.len() != omegas.len() || taus.len() < 4 {
        return Err(Error::InvalidInput(
            "scaling fit needs at least 4 matched (tau, omega) points".into(),
        ));
    }
    if taus.iter().any(|&t| t <= tau_ep) {
        return Err(Error::InvalidInput(
            "all tau samples must lie strictly above tau_ep".into(),
        ));
    }
    if omegas.iter().any(|&w| !(w > 0.0)) {
        return Err(Error::InvalidInput(
            "all frequencies must be positive".into(),
        ));
    }
    let xs: Vec<f64> = taus.iter().map(|&t| (t - tau_ep).ln()).collect();
    let ys: Vec<f64> = omegas.iter().map(|&w| w.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::InvalidInput("degenerate scaling-fit data".into()));
    }
    let slope = sxy / sxx;
    let r2 = (sxy * sxy) / (sxx * syy);
    Ok((slope, r2))
}
