use std::f64::consts::PI;

use landau::kinetic::*;
use landau::lintheory::{damping_rate_fit, least_damped_root, volterra_solve, VolterraKernel};
use landau::profiles::{Interaction, Sign, VelocityProfile};
use landau::Error;
use num_complex::Complex64;

const LANDAU_VTH: f64 = 0.05627;

fn landau_config(nu: f64, eps: f64) -> KineticConfig {
    KineticConfig {
        profile: VelocityProfile::maxwellian(LANDAU_VTH).unwrap(),
        interaction: Interaction::power_law(2.0, 1.0, Sign::Repulsive),
        nu,
        grid: Grid::new(8, 512, 6.0 * LANDAU_VTH).unwrap(),
        dt: 0.05,
        t_end: 40.0,
        perturbation: Perturbation { mode: 1, amplitude: eps, shape: VShape::Equilibrium },
        cadence: 1,
        norms: vec![],
    }
}

fn echo_config(interaction: Interaction) -> KineticConfig {
    KineticConfig {
        profile: VelocityProfile::maxwellian(0.5).unwrap(),
        interaction,
        nu: 0.0,
        grid: Grid::new(8, 512, 3.0).unwrap(),
        dt: 0.05,
        t_end: 14.0,
        perturbation: Perturbation { mode: 1, amplitude: 1e-3, shape: VShape::Equilibrium },
        cadence: 1,
        norms: vec![],
    }
}

#[test]
fn free_transport_is_exact_before_recurrence() {
    let sigma = 0.4;
    let eps = 0.1;
    let cfg = KineticConfig {
        profile: VelocityProfile::maxwellian(1.0).unwrap(),
        interaction: Interaction::Zero,
        nu: 0.0,
        grid: Grid::new(4, 256, 10.0 * sigma).unwrap(),
        dt: 0.1,
        t_end: 0.0,
        perturbation: Perturbation { mode: 1, amplitude: eps, shape: VShape::Gaussian { thermal_speed: sigma, center: 0.0 } },
        cadence: 1,
        norms: vec![],
    };
    let mut state = cfg.initial_state().unwrap();
    let stepper = Stepper::new(cfg.grid, &cfg.profile, &cfg.interaction, 0.0).unwrap();
    let t_rec = cfg.grid.recurrence_time(1);
    let steps = (0.8 * t_rec / cfg.dt).floor() as usize;
    for _ in 0..steps {
        stepper.advance(&mut state, cfg.dt).unwrap();
    }
    let t = state.time();
    let mut worst = 0.0f64;
    for i in -40..=40 {
        let zeta = i as f64 * 0.05;
        let eta = zeta - t;
        let exact = 0.5 * eps * (-2.0 * PI * PI * sigma * sigma * (eta + t).powi(2)).exp();
        worst = worst.max((state.fhat(1, eta) - exact).norm());
    }
    assert!(worst < 1e-10, "max error {worst} at t = {t}");
}

#[test]
fn zero_step_is_identity() {
    let cfg = landau_config(0.01, 1e-2);
    let s = cfg.initial_state().unwrap();
    let next = step(&s, 0.0, &cfg.interaction, &cfg.profile, cfg.nu).unwrap();
    assert_eq!(next, s);
}

#[test]
fn collision_substep_identities() {
    let prof = VelocityProfile::maxwellian(1.0).unwrap();
    let grid = Grid::new(2, 64, 6.0).unwrap();
    let f0 = discrete_equilibrium(&prof, &grid);
    let dv = grid.dv();
    let row: Vec<Complex64> =
        (0..64).map(|j| Complex64::new((grid.v(j) * 0.7).sin() * f0[j], 0.3 * f0[j] * grid.v(j))).collect();
    let rho: Complex64 = row.iter().sum::<Complex64>() * dv;

    let mut same = row.clone();
    collision_substep(&mut same, rho, 1.0, 0.0, &f0);
    assert_eq!(same, row);

    let mut relaxed = row.clone();
    collision_substep(&mut relaxed, rho, 1e4, 1.0, &f0);
    for (z, g) in relaxed.iter().zip(&f0) {
        assert!((z - rho * g).norm() < 1e-14);
    }

    let mut exact = row.clone();
    collision_substep(&mut exact, rho, 0.7, 0.3, &f0);
    let after: Complex64 = exact.iter().sum::<Complex64>() * dv;
    assert!((after - rho).norm() < 1e-14);

    // RK4 on ∂_t f = ν(ρf⁰ − f) with ρ recomputed from f
    let mut y = row.clone();
    let n = 20000;
    let h = 0.7 / n as f64;
    let rhs = |f: &[Complex64]| -> Vec<Complex64> {
        let r: Complex64 = f.iter().sum::<Complex64>() * dv;
        f.iter().zip(&f0).map(|(z, g)| 0.3 * (r * g - z)).collect()
    };
    for _ in 0..n {
        let k1 = rhs(&y);
        let y2: Vec<_> = y.iter().zip(&k1).map(|(a, b)| a + 0.5 * h * b).collect();
        let k2 = rhs(&y2);
        let y3: Vec<_> = y.iter().zip(&k2).map(|(a, b)| a + 0.5 * h * b).collect();
        let k3 = rhs(&y3);
        let y4: Vec<_> = y.iter().zip(&k3).map(|(a, b)| a + h * b).collect();
        let k4 = rhs(&y4);
        for i in 0..y.len() {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    let err = y.iter().zip(&exact).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    assert!(err < 1e-12, "{err}");
}

#[test]
fn poisson_examples() {
    let w = Interaction::power_law(2.0, 1.0, Sign::Repulsive);
    let a = Complex64::new(0.3, -0.2);
    let e = poisson_field(&[1, -1, 0, 2], &[a, a.conj(), Complex64::new(5.0, 0.0), Complex64::new(0.0, 0.0)], &w)
        .unwrap();
    assert!((e[0] - Complex64::new(0.0, PI) * a).norm() < 1e-15);
    assert!((e[1] - Complex64::new(0.0, -PI) * a.conj()).norm() < 1e-15);
    assert_eq!(e[2], Complex64::new(0.0, 0.0));
    assert_eq!(e[3], Complex64::new(0.0, 0.0));
}

#[test]
fn equilibrium_is_stationary() {
    let cfg = KineticConfig { t_end: 2.0, ..landau_config(0.05, 0.0) };
    let out = run(&cfg).unwrap();
    let eq = PhaseState::equilibrium(cfg.grid, &cfg.profile).unwrap();
    assert!(out.state.max_abs_diff(&eq) < 1e-12 * 7.0);
    assert!(out.history.e.iter().flatten().all(|z| z.norm() < 1e-12));
}

#[test]
fn free_transport_reverses() {
    let cfg = KineticConfig { interaction: Interaction::Zero, nu: 0.0, ..landau_config(0.0, 0.05) };
    let stepper = Stepper::new(cfg.grid, &cfg.profile, &cfg.interaction, 0.0).unwrap();
    let start = cfg.initial_state().unwrap();
    let mut s = start.clone();
    for _ in 0..200 {
        stepper.advance(&mut s, 0.05).unwrap();
    }
    for _ in 0..200 {
        stepper.advance(&mut s, -0.05).unwrap();
    }
    assert!(s.max_abs_diff(&start) < 1e-9);
}

#[test]
fn nonlinear_run_conserves_mass_and_is_second_order() {
    let base = KineticConfig { t_end: 4.0, ..landau_config(0.02, 0.05) };
    let finals: Vec<PhaseState> = [0.1, 0.05, 0.025]
        .iter()
        .map(|&dt| {
            let out = run(&KineticConfig { dt, ..base.clone() }).unwrap();
            assert!(out.diagnostics.max_mass_drift() < 1e-10);
            assert!(out.history.poisson_residual(&base.interaction).unwrap() < 1e-12);
            out.state
        })
        .collect();
    let e1 = finals[0].max_abs_diff(&finals[1]);
    let e2 = finals[1].max_abs_diff(&finals[2]);
    let order = (e1 / e2).log2();
    assert!(order >= 1.9, "order {order}");
}

/// `sup |a − b|` relative to the local envelope of `|b|` (max over one
/// period on either side).
fn envelope_relative(a: &[Complex64], b: &[Complex64], halfwidth: usize) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..a.len() {
        let lo = i.saturating_sub(halfwidth);
        let hi = (i + halfwidth).min(b.len() - 1);
        let env = b[lo..=hi].iter().map(|z| z.norm()).fold(0.0, f64::max);
        worst = worst.max((a[i] - b[i]).norm() / env);
    }
    worst
}

#[test]
fn linear_regime_matches_volterra() {
    for nu in [0.0, 1e-2] {
        let cfg = landau_config(nu, 1e-5);
        let out = run(&cfg).unwrap();
        let mut kern = VolterraKernel::new(&cfg.profile, &cfg.interaction, 1, nu).unwrap();
        let prof = cfg.profile.clone();
        let hist = volterra_solve(1, |t| 0.5e-5 * prof.fourier_1d(t), &mut kern, 40.0, 0.01).unwrap();
        let root = least_damped_root(&kern, 0.45, 0.1).unwrap();
        // three e-folds of the linear rate
        let horizon = 3.0 / root.rate.abs();
        let n = out.history.times.iter().take_while(|&&t| t <= horizon).count();
        let nl: Vec<Complex64> = out.history.rho_mode(1)[..n].to_vec();
        let vol: Vec<Complex64> = (0..n).map(|i| hist.rho_hat[5 * i]).collect();
        let rel = envelope_relative(&nl, &vol, 40);
        assert!(rel < 0.05, "nu {nu}: relative deviation {rel}");

        let e1: Vec<f64> = out.history.e_mode(1).iter().map(|z| z.norm()).collect();
        let fit = damping_rate_fit(&out.history.times, &e1, (5.0, 40.0)).unwrap();
        assert!((fit.rate / root.rate - 1.0).abs() < 0.05, "nu {nu}: {} vs {}", fit.rate, root.rate);
    }
}

#[test]
fn echo_matches_ballistic_oracle() {
    // without self-consistent field the echo is
    // ρ̂(−1,t) = (ε₁ε₂/4)·2πi(t−s)·f̂⁰(2s−t) for t > s
    let cfg = echo_config(Interaction::Zero);
    let (e1, e2, s) = (1e-3, 1e-3, 5.0);
    let out = run_with_kick(
        &KineticConfig { perturbation: Perturbation { amplitude: e1, ..cfg.perturbation }, ..cfg.clone() },
        Some(Kick { time: s, mode: -2, amplitude: e2 }),
    )
    .unwrap();
    let rho = out.history.rho_mode(-1);
    for (i, &t) in out.history.times.iter().enumerate() {
        if t > s + 1.0 {
            let expected = 0.25 * e1 * e2 * 2.0 * PI * (t - s) * cfg.profile.fourier_1d(2.0 * s - t).re;
            assert!((rho[i].norm() - expected).abs() < 1e-3 * 7.85e-6 + 1e-3 * expected, "t {t}");
        }
    }
}

#[test]
fn echo_experiment_reports() {
    let cfg = echo_config(Interaction::power_law(2.0, 1.0, Sign::Repulsive));
    let a = echo_experiment(&cfg, 1, -2, 5.0, 1e-3, 1e-3).unwrap();
    assert_eq!(a.k, -1);
    assert_eq!(a.t_predicted, 10.0);
    assert!((a.t_measured / 10.0 - 1.0).abs() < 0.05, "{a:?}");
    let b = echo_experiment(&cfg, 1, -2, 5.0, 2e-3, 1e-3).unwrap();
    assert!((b.peak_amp / a.peak_amp / 2.0 - 1.0).abs() < 0.1);
    let z = echo_experiment(&cfg, 1, -2, 5.0, 1e-3, 0.0).unwrap();
    assert!(z.peak_amp <= z.baseline_amp);
    assert!(a.peak_amp > 1e3 * a.baseline_amp);

    assert!(matches!(echo_experiment(&cfg, 1, 0, 5.0, 1e-3, 1e-3), Err(Error::NoFutureEcho { .. })));
    let coarse = KineticConfig { grid: Grid::new(8, 32, 3.0).unwrap(), ..cfg };
    assert!(matches!(
        echo_experiment(&coarse, 1, -2, 5.0, 1e-3, 1e-3),
        Err(Error::EchoBeyondRecurrence { .. })
    ));
}

#[test]
fn resolution_guard_trips() {
    let cfg = KineticConfig {
        grid: Grid::new(4, 32, 6.0 * LANDAU_VTH).unwrap(),
        t_end: 40.0,
        ..landau_config(0.0, 1e-3)
    };
    assert!(matches!(run(&cfg), Err(Error::ResolutionExceeded { .. })));
}

#[test]
fn deflection_vanishes_without_field() {
    let cfg = KineticConfig { interaction: Interaction::Zero, t_end: 5.0, cadence: 10, ..landau_config(0.0, 1e-2) };
    let out = run(&cfg).unwrap();
    assert_eq!(characteristics_deflect(&out.history, 0.3, 0.1, 1.0, 4.0).unwrap(), (0.0, 0.0));
    assert!(matches!(
        characteristics_deflect(&out.history, 0.3, 0.1, 1.0, 6.0),
        Err(Error::OutOfHistory { .. })
    ));
}

#[test]
fn deflection_obeys_field_bounds() {
    let cfg = KineticConfig { t_end: 30.0, cadence: 2, ..landau_config(0.0, 5e-2) };
    let out = run(&cfg).unwrap();
    let h = &out.history;
    let sup: Vec<f64> = (0..h.len()).map(|i| h.e_sup(i)).collect();
    // trapezoid integrals of the sampled sup, padded for the linear-in-time interpolation
    let integral = |s: f64, t: f64, weight: &dyn Fn(f64) -> f64| -> f64 {
        let mut acc = 0.0;
        for i in 1..h.len() {
            let (a, b) = (h.times[i - 1], h.times[i]);
            if b <= s || a >= t {
                continue;
            }
            let m = sup[i - 1].max(sup[i]);
            let (lo, hi) = (a.max(s), b.min(t));
            acc += m * 0.5 * (weight(lo) + weight(hi)) * (hi - lo);
        }
        acc
    };
    for &(x, v, s, t) in &[(0.1, 0.0, 0.0, 10.0), (0.7, 0.1, 2.0, 25.0), (0.4, -0.05, 5.0, 30.0), (0.9, 0.2, 0.0, 3.0)]
    {
        let (dx, dv) = characteristics_deflect(h, x, v, s, t).unwrap();
        let bv = integral(s, t, &|_| 1.0);
        let bx = integral(s, t, &|tau| t - tau);
        assert!(dv.abs() <= bv * (1.0 + 1e-6), "dv {dv} > {bv}");
        assert!(dx.abs() <= bx * (1.0 + 1e-6) + 1e-15, "dx {dx} > {bx}");
        let smax = sup.iter().cloned().fold(0.0, f64::max);
        assert!(dx.abs() <= smax * (t - s).powi(2) / 2.0);
    }
    // large-time branch: exponential majorant of the sampled field
    let rate = 0.9 * 0.1084;
    let delta = h.times.iter().zip(&sup).map(|(t, e)| e * (rate * t).exp()).fold(0.0, f64::max);
    for &s in &[0.0, 5.0, 10.0] {
        let (_, dv) = characteristics_deflect(h, 0.25, 0.0, s, 30.0).unwrap();
        assert!(dv.abs() <= delta * (-rate * s).exp() / rate);
    }
}

#[test]
fn diagnostics_record_norms() {
    let cfg = KineticConfig { t_end: 2.0, cadence: 10, norms: vec![(0.0, 0.0), (0.01, 0.0)], ..landau_config(0.0, 1e-3) };
    let out = run(&cfg).unwrap();
    assert_eq!(out.diagnostics.labels.len(), 8);
    let first = &out.diagnostics.rows[0];
    // f − f₀ vanishes at t = 0
    assert_eq!(first.norms[1], 0.0);
    assert!(first.norms[0] > 0.0);
    assert!(out.diagnostics.rows.iter().all(|r| r.norms.len() == 8));
}
