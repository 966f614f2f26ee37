//! Acceptance suite: one test per criterion, each printing a PASS line with
//! the measured numbers (run with `--nocapture` to see them).
//!
//! Expected values are pinned from independent oracles computed inside this
//! file: scalar Newton iterations for Lambert-type constants, the exact
//! series solution for time-domain comparisons, and forward quadratic maps
//! for coupling reconstructions.

use nmep::dynamics::{
    field_oracle, field_oracle_defaults, integrate, integrate_two_atom, oscillation_metrics,
    series_amplitude,
};
use nmep::ep::{
    collective_critical_distance, design_ep_n, ep_residuals, find_ep2_single_delay,
    find_ep3_symmetric, EpOutcome,
};
use nmep::models::{CollectiveModel, DelaySystem, GiantAtomModel};
use nmep::special::{lambert_w, INV_E};
use nmep::spectral::{
    argument_principle_count, char_function, poles_closed_form, poles_search, residue_sum, Rect,
};
use nmep::{Complex64, Error};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use std::f64::consts::PI;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Independent scalar Newton iteration on `u e^u = x` (real root, x > -1/e).
fn newton_lambert(x: f64, mut u: f64) -> f64 {
    for _ in 0..100 {
        let f = u * u.exp() - x;
        let step = f / ((u + 1.0) * u.exp());
        u -= step;
        if step.abs() < 1e-16 * (1.0 + u.abs()) {
            break;
        }
    }
    u
}

fn ep2_report() -> nmep::ep::EpReport {
    match find_ep2_single_delay(1.0, 0.0).unwrap() {
        EpOutcome::Found(r) => r,
        other => panic!("expected second-order point, got {other:?}"),
    }
}

#[test]
fn criterion_1_ep2_location() {
    let report = ep2_report();
    let oracle = newton_lambert(INV_E, 0.3);

    assert!(
        (report.tau_ep - 0.27846).abs() <= 1e-4,
        "gamma tau_EP = {} vs 0.27846",
        report.tau_ep
    );
    assert!(
        (report.tau_ep - oracle).abs() <= 1e-9,
        "gamma tau_EP = {} vs Newton oracle {oracle}",
        report.tau_ep
    );
    let w = lambert_w(0, c(INV_E, 0.0)).unwrap();
    assert!((report.tau_ep - w.re).abs() <= 1e-9);
    println!(
        "criterion 1 PASS: gamma tau_EP = {:.12} (oracle {:.12}), s_EP = {:.9}",
        report.tau_ep, oracle, report.s_ep.re
    );
}

#[test]
fn criterion_2_pole_coalescence_versus_phase() {
    let u = newton_lambert(INV_E, 0.3); // coalescence delay for phi = 0

    // phi = 0: real-distinct below, merged at, conjugate pair above.
    let mut checked_below = 0;
    let mut checked_above = 0;
    let mut gt = 0.05;
    while gt <= 1.0 + 1e-12 {
        let sys = DelaySystem::single_delay(1.0, 0.0, gt).unwrap();
        let set = poles_closed_form(&sys, -1..=0).unwrap();
        if gt < 0.27846 {
            assert_eq!(set.len(), 2, "gamma tau = {gt}");
            for p in set.poles() {
                assert_eq!(p.s.im, 0.0, "gamma tau = {gt}: pole {} not real", p.s);
            }
            assert!((set.poles()[0].s - set.poles()[1].s).norm() > 1e-6);
            checked_below += 1;
        } else if gt > 0.281 {
            assert_eq!(set.len(), 2, "gamma tau = {gt}");
            let (a, b) = (set.poles()[0].s, set.poles()[1].s);
            assert!(a.im > 0.0 && b.im < 0.0, "gamma tau = {gt}: {a}, {b}");
            assert_eq!(a.re, b.re);
            assert_eq!(a.im, -b.im);
            checked_above += 1;
        }
        gt += 0.005;
    }
    assert!(checked_below >= 40 && checked_above >= 140);

    // Exactly at the critical delay the two branches agree to 1e-5 and the
    // merged pole is flagged.
    let sys = DelaySystem::single_delay(1.0, 0.0, u).unwrap();
    let arg = -u * u.exp(); // -gamma tau e^{gamma tau} at the critical delay
    let s0 = -1.0 + lambert_w(0, c(arg, 0.0)).unwrap() / u;
    let sm1 = -1.0 + lambert_w(-1, c(arg, 0.0)).unwrap() / u;
    assert!((s0 - sm1).norm() <= 1e-5, "branch gap {:.3e}", (s0 - sm1).norm());
    let merged = poles_closed_form(&sys, -1..=0).unwrap();
    assert_eq!(merged.len(), 1);
    assert_eq!(merged.poles()[0].multiplicity, 2);

    // Off the superradiant phase the dominant branches never coalesce; at
    // phi = pi the bound-state pole sits exactly at s = 0 for every delay.
    for phi in [PI / 3.0, 2.0 * PI / 3.0, PI] {
        let mut min_gap = f64::INFINITY;
        let mut gt = 0.05;
        while gt <= 1.0 + 1e-12 {
            let sys = DelaySystem::single_delay(1.0, phi, gt).unwrap();
            let set = poles_closed_form(&sys, -1..=0).unwrap();
            assert_eq!(set.len(), 2, "phi = {phi}, gamma tau = {gt}");
            assert!(set.poles().iter().all(|p| p.multiplicity == 1));
            let gap = (set.poles()[0].s - set.poles()[1].s).norm();
            min_gap = min_gap.min(gap);
            if phi == PI {
                let bound = set
                    .poles()
                    .iter()
                    .map(|p| p.s.norm())
                    .fold(f64::INFINITY, f64::min);
                assert!(bound <= 1e-9, "gamma tau = {gt}: |s| = {bound:.2e}");
            }
            gt += 0.005;
        }
        assert!(min_gap > 1e-3, "phi = {phi}: min branch gap {min_gap:.3e}");
    }
    println!(
        "criterion 2 PASS: coalescence only at phi = 0 (gap {:.2e} at gamma tau = {u:.6})",
        (s0 - sm1).norm()
    );
}

#[test]
fn criterion_3_square_root_scaling() {
    let u = newton_lambert(INV_E, 0.3);
    let factors: Vec<f64> = (0..10)
        .map(|k| 1.001 * (1.05f64 / 1.001).powf(k as f64 / 9.0))
        .collect();
    let taus: Vec<f64> = factors.iter().map(|f| f * u).collect();
    let omegas: Vec<f64> = taus
        .iter()
        .map(|&tau| {
            let sys = DelaySystem::single_delay(1.0, 0.0, tau).unwrap();
            let set = poles_closed_form(&sys, -1..=0).unwrap();
            let im = set.poles()[0].s.im.abs();
            assert!(im > 0.0);
            im
        })
        .collect();
    let (exponent, r2) = nmep::spectral::scaling_fit(&taus, &omegas, u).unwrap();
    assert!(
        (exponent - 0.5).abs() <= 0.02,
        "exponent {exponent} outside 0.50 +/- 0.02"
    );
    assert!(r2 >= 0.999, "r^2 = {r2}");
    println!("criterion 3 PASS: exponent = {exponent:.4}, r^2 = {r2:.6}");
}

#[test]
fn criterion_4_method_equivalence() {
    let mut worst_series = 0.0f64;
    let mut worst_residue = 0.0f64;
    let mut worst_node = 0.0f64;

    for phi in [0.0, PI] {
        for gt in [0.2, 0.5, 1.0] {
            let tau = gt; // gamma = 1
            let sys = DelaySystem::single_delay(1.0, phi, tau).unwrap();
            let dt = tau / 64.0;

            // Time stepping against the exact series on [0, 10].
            let ts = integrate(&sys, c(1.0, 0.0), 10.0, dt).unwrap();
            for k in 0..ts.len() {
                let exact = series_amplitude(1.0, phi, tau, ts.time(k)).unwrap();
                worst_series = worst_series.max((ts.sample(k) - exact).norm());
            }

            // Residue reconstruction with 200 branch pairs on [tau/2, 10].
            let poles = poles_closed_form(&sys, -200..=199).unwrap();
            assert_eq!(poles.count_with_multiplicity(), 400);
            let mut t = tau / 2.0;
            while t <= 10.0 + 1e-12 {
                let rec = residue_sum(&sys, &poles, t).unwrap();
                let exact = series_amplitude(1.0, phi, tau, t).unwrap();
                let err = (rec - exact).norm();
                if (t - tau).abs() < dt / 2.0 {
                    // At the first delay node the truncated reconstruction
                    // has a known coherent-tail spike that decays only like
                    // one over the branch count; it is bounded and checked
                    // for its truncation origin below instead of against the
                    // smooth-window tolerance.
                    worst_node = worst_node.max(err);
                } else {
                    assert!(
                        err <= 1e-4,
                        "phi = {phi}, gamma tau = {gt}, t = {t}: residue error {err:.3e}"
                    );
                    worst_residue = worst_residue.max(err);
                }
                t += dt;
            }

            // The node spike must be pure truncation: bounded, and halved by
            // doubling the branch count.
            let rec_200 = residue_sum(&sys, &poles, tau).unwrap();
            let exact = series_amplitude(1.0, phi, tau, tau).unwrap();
            let err_200 = (rec_200 - exact).norm();
            assert!(err_200 <= 3.2e-4, "node spike {err_200:.3e}");
            let wider = poles_closed_form(&sys, -400..=399).unwrap();
            let err_400 = (residue_sum(&sys, &wider, tau).unwrap() - exact).norm();
            assert!(
                err_400 <= 0.62 * err_200,
                "node spike not truncation-limited: {err_200:.3e} -> {err_400:.3e}"
            );
        }
    }
    assert!(worst_series <= 1e-8, "integrate vs series: {worst_series:.3e}");
    println!(
        "criterion 4 PASS: |integrate - series| <= {worst_series:.3e}, \
         residue error <= {worst_residue:.3e} off the first delay node \
         (node spike {worst_node:.3e}, truncation-limited)"
    );
}

#[test]
fn criterion_5_microscopic_oracle() {
    // Two equal couplings with kappa_0 = 1, so gamma t = t.
    let tau = 0.5;
    let g = (1.0 / (2.0 * PI)).sqrt();
    let model = GiantAtomModel::new(vec![g, g], 1.0, tau, 0.0).unwrap();
    let sys = model.delay_system();
    let (omega0, k_max, modes) = field_oracle_defaults(&model);
    assert_eq!(modes, 4000);
    assert!((k_max - 3.0 * omega0).abs() < 1e-12);
    assert!((omega0 * tau).rem_euclid(2.0 * PI) < 1e-9);

    let dt = tau / 64.0;
    let run = field_oracle(&model, omega0, k_max, modes, 5.0, dt).unwrap();
    let dde = integrate(&sys, c(1.0, 0.0), 5.0, dt).unwrap();
    let mut max_dev = 0.0f64;
    for k in 0..dde.len().min(run.series.len()) {
        max_dev = max_dev.max((run.series.sample(k).norm() - dde.sample(k).norm()).abs());
    }
    assert!(max_dev <= 2e-2, "modulus deviation {max_dev:.3e}");
    assert!(run.norm_drift <= 1e-6, "norm drift {:.3e}", run.norm_drift);
    assert!(run.warning.is_none());
    println!(
        "criterion 5 PASS: max | |a|_oracle - |a|_dde | = {max_dev:.3e}, norm drift {:.3e}",
        run.norm_drift
    );
}

/// Least-squares fit of `(p + q t) e^{s t}` to a real sampled amplitude over
/// a time window, returning the l2-relative residual.
fn linear_exp_fit_residual(
    ts: &nmep::dynamics::TimeSeries,
    s: f64,
    t_lo: f64,
    t_hi: f64,
) -> f64 {
    let (mut suu, mut suv, mut svv, mut sua, mut sva) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let mut window = Vec::new();
    for k in 0..ts.len() {
        let t = ts.time(k);
        if t < t_lo || t > t_hi {
            continue;
        }
        let u = (s * t).exp();
        let v = t * u;
        let a = ts.sample(k).re;
        suu += u * u;
        suv += u * v;
        svv += v * v;
        sua += u * a;
        sva += v * a;
        window.push((t, a));
    }
    assert!(window.len() > 100, "window too sparse");
    let det = suu * svv - suv * suv;
    let p = (sua * svv - sva * suv) / det;
    let q = (suu * sva - suv * sua) / det;
    let mut num = 0.0;
    let mut den = 0.0;
    for (t, a) in window {
        let fit = (p + q * t) * (s * t).exp();
        num += (a - fit).powi(2);
        den += a * a;
    }
    (num / den).sqrt()
}

#[test]
fn criterion_6_third_order_point() {
    let report = match find_ep3_symmetric(1.0, 1.0, 0.0).unwrap() {
        EpOutcome::Found(r) => r,
        other => panic!("expected third-order point, got {other:?}"),
    };
    let g3 = report.parameter("g3").unwrap();
    let gamma = report.parameter("gamma").unwrap();
    let gamma_tau = report.parameter("gamma_tau_ep").unwrap();
    assert!((g3 - (-0.03846)).abs() <= 5e-4, "g3/g1 = {g3}");
    assert!((gamma_tau - 0.1665).abs() <= 5e-4, "gamma tau_EP = {gamma_tau}");
    assert!(report.parameter("cond_delay_residual").unwrap() <= 1e-10);
    assert!(report.parameter("cond_phase_residual").unwrap() <= 1e-10 * 10.0);

    let tau_ep = report.tau_ep;
    let s_ep = report.s_ep.re;
    let mut fit_residual = 0.0;
    for factor in [0.8, 1.0, 1.2] {
        let tau = factor * tau_ep;
        let model = GiantAtomModel::new(vec![1.0, 1.0, g3], 1.0, tau, 0.0).unwrap();
        let sys = model.delay_system();
        let ts = integrate(&sys, c(1.0, 0.0), 10.0 / gamma, tau / 64.0).unwrap();
        let metrics = oscillation_metrics(&ts);
        if factor < 1.0 {
            for k in 1..ts.len() {
                assert!(
                    ts.sample(k).norm() <= ts.sample(k - 1).norm() + 1e-14,
                    "below the point the decay must be monotone (t = {})",
                    ts.time(k)
                );
            }
            assert_eq!(metrics.zero_crossings, 0);
        } else if factor == 1.0 {
            fit_residual =
                linear_exp_fit_residual(&ts, s_ep, 1.0 / gamma, 4.0 / gamma);
            assert!(
                fit_residual <= 1e-2,
                "linear-times-exponential fit residual {fit_residual:.3e}"
            );
        } else {
            assert!(
                metrics.zero_crossings >= 1,
                "above the point the amplitude must cross zero"
            );
        }
    }
    println!(
        "criterion 6 PASS: g3/g1 = {g3:.6}, gamma tau_EP = {gamma_tau:.6}, \
         fit residual {fit_residual:.3e}, monotone below / oscillatory above"
    );
}

#[test]
fn criterion_7_design_pipeline() {
    // Closed-form weights at order 3.
    let report = match design_ep_n(3, -2.0, 1.0, 0.0).unwrap() {
        EpOutcome::Found(r) => r,
        other => panic!("expected design, got {other:?}"),
    };
    let expected = [0.5, 2.0 * (-2.0f64).exp(), -0.5 * (-4.0f64).exp()];
    for (m, want) in expected.iter().enumerate() {
        let got = report.parameter(&format!("kappa{m}")).unwrap();
        assert!(
            (got - want).abs() <= 1e-12,
            "kappa_{m} = {got} vs closed form {want}"
        );
    }

    // Physical couplings reproduce the weights and the point itself.
    let g: Vec<f64> = (1..=3)
        .map(|j| report.parameter(&format!("g{j}")).unwrap())
        .collect();
    let model = GiantAtomModel::new(g.clone(), 1.0, 1.0, 0.0).unwrap();
    let kappa_back = model.kappa_weights();
    for (m, want) in expected.iter().enumerate() {
        assert!((kappa_back[m] - want).abs() <= 1e-10, "round trip kappa_{m}");
    }
    let residuals = ep_residuals(&model.delay_system(), c(-2.0, 0.0), 3).unwrap();
    let scale = 1e-8 * (1.0 + 2.0);
    assert!(residuals.iter().all(|r| *r <= scale), "{residuals:?}");

    // Short delay is infeasible, citing the bound 3/(2 |s_EP|).
    match design_ep_n(3, -2.0, 0.7, 0.0) {
        Err(Error::Infeasible(msg)) => assert!(msg.contains("0.75"), "{msg}"),
        other => panic!("expected infeasible outcome, got {other:?}"),
    }

    // Orders 4 and 5 at tau |s_EP| = 5 run end to end.
    for n in [4usize, 5] {
        let report = match design_ep_n(n, -1.0, 5.0, 0.0).unwrap() {
            EpOutcome::Found(r) => r,
            other => panic!("order {n}: {other:?}"),
        };
        assert!(
            report.parameter("g1").is_some(),
            "order {n}: no physical couplings"
        );
        let g: Vec<f64> = (1..=n)
            .map(|j| report.parameter(&format!("g{j}")).unwrap())
            .collect();
        let model = GiantAtomModel::new(g, 1.0, 5.0, 0.0).unwrap();
        let residuals = ep_residuals(&model.delay_system(), c(-1.0, 0.0), n).unwrap();
        assert!(
            residuals.iter().all(|r| *r <= 1e-8 * 2.0),
            "order {n}: {residuals:?}"
        );
    }
    println!("criterion 7 PASS: order-3 closed forms exact, bound enforced, orders 4-5 verified");
}

#[test]
fn criterion_8_collective_emission() {
    let eta = collective_critical_distance(1.0).unwrap();
    assert!((eta - 0.556929).abs() <= 1e-6, "eta_c = {eta}");
    let u = ep2_report().tau_ep; // gamma tau_EP of the two-point atom
    assert!(
        (eta - 2.0 * u).abs() <= 1e-12,
        "eta_c = {eta} vs twice gamma tau_EP = {}",
        2.0 * u
    );

    for beta in [0.1, 0.5, 1.0] {
        let eta = collective_critical_distance(beta).unwrap();
        let residual = (0.5 * beta * eta * (eta / 2.0).exp() - INV_E).abs();
        assert!(residual <= 1e-12, "beta = {beta}: condition residual {residual:.3e}");
    }

    // Symmetric two-emitter run against the reduced single equation.
    let model = CollectiveModel::new(1.0, 1.0, 0.0, 0.5).unwrap();
    let amp = (0.5f64).sqrt();
    let dt = 0.5 / 64.0;
    let (c1, c2) = integrate_two_atom(&model, c(amp, 0.0), c(amp, 0.0), 8.0, dt).unwrap();
    let reduced = model.delay_system(true).unwrap();
    let a = integrate(&reduced, c(1.0, 0.0), 8.0, dt).unwrap();
    let mut worst = 0.0f64;
    for k in 0..c1.len() {
        worst = worst.max((c1.sample(k) - amp * a.sample(k)).norm());
        worst = worst.max((c2.sample(k) - amp * a.sample(k)).norm());
    }
    assert!(worst <= 1e-10, "symmetric-sector deviation {worst:.3e}");
    println!(
        "criterion 8 PASS: eta_c = {eta:.9}, defining condition < 1e-12, \
         pair vs reduced deviation {worst:.3e}"
    );
}

#[test]
fn criterion_9_property_suites() {
    // Lambert defining identity on 10^4 seeded random branch/argument pairs.
    let mut rng = StdRng::seed_from_u64(0x5eed_1234);
    let mut checked = 0;
    while checked < 10_000 {
        let n = rng.random_range(-5..=5i32);
        let z = c(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
        if n != 0 && z.norm() < 1e-9 {
            continue; // off-principal branches are singular at the origin
        }
        let w = lambert_w(n, z).unwrap_or_else(|e| panic!("n = {n}, z = {z}: {e}"));
        let residual = (w * w.exp() - z).norm() / (1.0 + z.norm());
        assert!(residual <= 1e-12, "n = {n}, z = {z}: residual {residual:.3e}");
        checked += 1;
    }

    // Contour count equals search count (with multiplicity) on 50 random
    // passive systems with up to four delay classes.
    let mut done = 0;
    let mut attempts = 0;
    while done < 50 {
        attempts += 1;
        assert!(attempts < 400, "too many rejected random systems");
        let n = rng.random_range(2..=4usize);
        let g: Vec<f64> = (0..n).map(|_| rng.random_range(-1.2..1.2)).collect();
        if g.iter().all(|x| x.abs() < 1e-3) {
            continue;
        }
        let tau = rng.random_range(0.3..1.2);
        let phi = rng.random_range(0.0..2.0 * PI);
        let model = GiantAtomModel::new(g.clone(), 1.0, tau, phi).unwrap();
        let sys = model.delay_system();
        let scale: f64 = sys.coeffs().iter().map(|c| c.norm()).sum();
        let mut rect = Rect::new(
            -(scale + 4.0 / tau),
            1e-3,
            -1.5 * 2.0 * PI / tau,
            1.5 * 2.0 * PI / tau,
        )
        .unwrap();

        // A zero can graze the contour for unlucky rectangles; jitter.
        let mut result = None;
        for jitter in 0..5 {
            match poles_search(&sys, rect, 256) {
                Ok(set) => {
                    result = Some(set);
                    break;
                }
                Err(Error::ContourNearZero { .. }) | Err(Error::IncompleteSpectrum { .. }) => {
                    let eps = 0.0371 * (jitter + 1) as f64;
                    rect = Rect::new(
                        rect.re_min - eps,
                        rect.re_max,
                        rect.im_min - eps,
                        rect.im_max + eps,
                    )
                    .unwrap();
                }
                Err(e) => panic!("search failed: {e}"),
            }
        }
        let Some(set) = result else { continue };
        let count = argument_principle_count(&sys, rect).unwrap();
        assert_eq!(
            set.count_with_multiplicity(),
            count,
            "system g = {g:?}, tau = {tau}, phi = {phi}"
        );

        // Conjugate pairing for real-coefficient systems: search the same
        // model at phi = 0 over a conjugation-symmetric rectangle.
        if done % 5 == 0 {
            let real_model = GiantAtomModel::new(g.clone(), 1.0, tau, 0.0).unwrap();
            let real_sys = real_model.delay_system();
            let mut real_rect = rect;
            for jitter in 0..5 {
                match poles_search(&real_sys, real_rect, 256) {
                    Ok(set) => {
                        for p in set.poles() {
                            let mate = set.poles().iter().any(|q| {
                                (q.s - p.s.conj()).norm() <= 1e-12 * (1.0 + p.s.norm())
                            });
                            assert!(mate, "no conjugate mate for {} in g = {g:?}", p.s);
                        }
                        break;
                    }
                    Err(Error::ContourNearZero { .. })
                    | Err(Error::IncompleteSpectrum { .. }) => {
                        let eps = 0.0413 * (jitter + 1) as f64;
                        real_rect = Rect::new(
                            real_rect.re_min - eps,
                            real_rect.re_max,
                            real_rect.im_min - eps,
                            real_rect.im_max + eps,
                        )
                        .unwrap();
                    }
                    Err(e) => panic!("conjugate-pairing search failed: {e}"),
                }
            }
        }

        // Delay-class weights are exactly reversal symmetric.
        let rev: Vec<f64> = g.iter().rev().cloned().collect();
        let wa = model.kappa_weights();
        let wb = GiantAtomModel::new(rev, 1.0, tau, phi).unwrap().kappa_weights();
        assert_eq!(wa, wb, "reversal symmetry broke for g = {g:?}");

        done += 1;
    }

    // Pole invariant on everything the closed form returns.
    let sys = DelaySystem::single_delay(1.0, 0.4, 0.7).unwrap();
    let set = poles_closed_form(&sys, -50..=49).unwrap();
    for p in set.poles() {
        let d = char_function(&sys, p.s, 0).norm();
        assert!(d <= 1e-10 * (1.0 + p.s.norm()));
        assert!(p.s.re <= 1e-9);
    }

    println!(
        "criterion 9 PASS: 10^4 Lambert identities, 50 certified random spectra, \
         conjugate pairing and reversal symmetry"
    );
}
