//! Scenario dispatch: each scenario runs the owning modules, writes its
//! artifacts and returns the checks that decide the exit code.

use std::path::Path;
use std::time::Instant;

use landau::echo::{
    echo_kernel, echo_kernel_brute, forward_scan, backward_scan, kernel_table, loglog_slope,
    piecewise_integral_check, MomentRow,
};
use landau::hybridnorms::{f_norm, norm_property_battery, y_norm, z_norm, NormParams, SpectralDistribution};
use landau::kinetic::{echo_runs, run, KineticConfig, RunOutput, Stepper, VShape};
use landau::lintheory::{
    damping_rate_fit, least_damped_root, stability_scan, volterra_solve, DensityHistory, DispersionRoot, ScanSpec,
    VolterraKernel,
};
use landau::profiles::{Interaction, VelocityProfile};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::artifacts::{
    density_history_csv, diagnostics_csv, field_history_csv, input_hash, to_json, Artifacts, Cell, Criterion, Csv,
    RunReport,
};
use crate::config::{Scenario, SimConfig};

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("{scenario}: {source}")]
    Module { scenario: Scenario, source: landau::Error },
    #[error("writing artifacts: {0}")]
    Io(#[from] std::io::Error),
    #[error("serializing report: {0}")]
    Json(#[from] serde_json::Error),
}

type Out = Result<Vec<Criterion>, ScenarioError>;

fn ctx(scenario: Scenario) -> impl Fn(landau::Error) -> ScenarioError {
    move |source| ScenarioError::Module { scenario, source }
}

/// Runs the configured scenario, writes its artifacts and `report.json`
/// into `out`, and returns the report.
pub fn run_scenario(cfg: &SimConfig, config_text: &str, out: &Path) -> Result<RunReport, ScenarioError> {
    run_named(cfg.scenario, cfg, config_text, out)
}

/// Like [`run_scenario`] with the scenario chosen by the caller.
pub fn run_named(scenario: Scenario, cfg: &SimConfig, config_text: &str, out: &Path) -> Result<RunReport, ScenarioError> {
    let start = Instant::now();
    let mut art = Artifacts::new(out)?;
    let criteria = dispatch(scenario, cfg, &mut art)?;
    let passed = criteria.iter().all(|c| c.passed);
    let report = RunReport {
        scenario: scenario.name().to_string(),
        config: cfg.clone(),
        config_text: config_text.to_string(),
        input_hash: input_hash(config_text, cfg.seed),
        criteria,
        passed,
        wall_time_s: start.elapsed().as_secs_f64(),
        files: art.files().to_vec(),
    };
    std::fs::write(out.join("report.json"), to_json(&report)?)?;
    Ok(report)
}

pub fn dispatch(scenario: Scenario, cfg: &SimConfig, art: &mut Artifacts) -> Out {
    match scenario {
        Scenario::LinearLandau => linear_landau(cfg, art),
        Scenario::CollisionSweep => collision_sweep(cfg, art),
        Scenario::EchoExperiment => echo_experiment(cfg, art),
        Scenario::KernelBounds => kernel_bounds(cfg, art),
        Scenario::NormBattery => norm_battery(cfg, art),
        Scenario::FreeTransportCheck => free_transport_check(cfg, art),
        Scenario::StabilityScan => stability(cfg, art),
    }
}

/// `f̂₀(mode, η)` of the configured perturbation `ε cos(2π·mode·x) shape(v)`.
pub fn perturbation_transform(profile: &VelocityProfile, shape: VShape, amplitude: f64) -> impl Fn(f64) -> Complex64 {
    let g = match shape {
        VShape::Equilibrium => profile.clone(),
        VShape::Gaussian { thermal_speed, center } => {
            VelocityProfile::mixture(&[(1.0, center, thermal_speed)]).expect("validated shape")
        }
    };
    move |eta| 0.5 * amplitude * g.fourier_1d(eta)
}

/// Volterra solution for the perturbed mode of a kinetic configuration.
pub fn volterra_for(kcfg: &KineticConfig, nu: f64, t_end: f64, dt: f64) -> landau::Result<(DensityHistory, VolterraKernel)> {
    let p = kcfg.perturbation;
    let k = p.mode as i64;
    let mut kern = VolterraKernel::new(&kcfg.profile, &kcfg.interaction, k, nu)?;
    let src = perturbation_transform(&kcfg.profile, p.shape, p.amplitude);
    let kf = k as f64;
    let hist = volterra_solve(k, |t| src(kf * t), &mut kern, t_end, dt)?;
    Ok((hist, kern))
}

/// Least damped root on a search box scaled to the profile.
pub fn dispersion_root(kern: &VolterraKernel) -> landau::Result<DispersionRoot> {
    let v = kern.profile().velocity_scale();
    least_damped_root(kern, 8.0 * v, 4.0 * v)
}

fn abs(z: &[Complex64]) -> Vec<f64> {
    z.iter().map(|z| z.norm()).collect()
}

/// Fitted damping rate of `|Ê(t, mode)|` in a kinetic run.
pub fn kinetic_rate(out: &RunOutput, mode: i64, window: (f64, f64)) -> landau::Result<landau::lintheory::DampingFit> {
    damping_rate_fit(&out.history.times, &abs(&out.history.e_mode(mode)), window)
}

pub fn volterra_rate(hist: &DensityHistory, window: (f64, f64)) -> landau::Result<landau::lintheory::DampingFit> {
    damping_rate_fit(&hist.times(), &hist.abs(), window)
}

fn rate_check(name: &str, a: f64, b: f64, tol: f64) -> Criterion {
    Criterion::at_most(name, (a / b - 1.0).abs(), tol).with_detail(format!("{a:.7} vs {b:.7}"))
}

/// Conservation checks shared by every kinetic run.
pub fn conservation(label: &str, out: &RunOutput, w: &Interaction) -> Vec<Criterion> {
    let poisson = match out.history.poisson_residual(w) {
        Ok(r) => Criterion::below(format!("{label}: Poisson residual"), r, 1e-12),
        Err(e) => Criterion::failed(format!("{label}: Poisson residual"), e.to_string()),
    };
    vec![Criterion::below(format!("{label}: relative mass drift"), out.diagnostics.max_mass_drift(), 1e-10), poisson]
}

fn linear_landau(cfg: &SimConfig, art: &mut Artifacts) -> Out {
    let sc = Scenario::LinearLandau;
    let kcfg = cfg.kinetic_config();
    let out = run(&kcfg).map_err(ctx(sc))?;
    art.write("field_history.csv", &field_history_csv(&out.history))?;
    art.write("diagnostics.csv", &diagnostics_csv(&out.diagnostics))?;
    let lin = &cfg.lintheory;
    let (hist, kern) = volterra_for(&kcfg, cfg.nu, lin.t_end, lin.dt).map_err(ctx(sc))?;
    art.write("density_history.csv", &density_history_csv(&hist))?;
    let root = dispersion_root(&kern).map_err(ctx(sc))?;

    let mut crit = conservation("kinetic run", &out, &cfg.interaction);
    let mut rates = Csv::new(&["method", "rate"]);
    rates.row(&[Cell::S("dispersion_root"), Cell::F(root.rate)]);
    let vol = volterra_rate(&hist, lin.window);
    let kin = kinetic_rate(&out, kcfg.perturbation.mode as i64, lin.window);
    match &vol {
        Ok(f) => {
            rates.row(&[Cell::S("volterra_fit"), Cell::F(f.rate)]);
            crit.push(rate_check("Volterra fit vs dispersion root", f.rate, root.rate, 0.05));
        }
        Err(e) => crit.push(Criterion::failed("Volterra fit vs dispersion root", e.to_string())),
    }
    match &kin {
        Ok(f) => {
            rates.row(&[Cell::S("kinetic_fit"), Cell::F(f.rate)]);
            crit.push(rate_check("kinetic fit vs dispersion root", f.rate, root.rate, 0.05));
        }
        Err(e) => crit.push(Criterion::failed("kinetic fit vs dispersion root", e.to_string())),
    }
    if let (Ok(a), Ok(b)) = (&kin, &vol) {
        crit.push(rate_check("kinetic fit vs Volterra fit", a.rate, b.rate, 0.05));
    }
    art.write("rates.csv", &rates.finish())?;
    Ok(crit)
}

/// Largest pointwise difference of two histories on the coarser grid.
pub fn sup_difference(a: &DensityHistory, b: &DensityHistory) -> f64 {
    let n = a.len().min(b.len());
    (0..n).map(|j| (a.rho_hat[j] - b.rho_hat[j]).norm()).fold(0.0, f64::max)
}

/// Shrink factor of `d` per decade of `ν` between consecutive positive rates.
pub fn per_decade(pairs: &[(f64, f64)]) -> Vec<(f64, f64, f64)> {
    let mut v: Vec<(f64, f64)> = pairs.iter().copied().filter(|p| p.0 > 0.0).collect();
    v.sort_by(|a, b| b.0.total_cmp(&a.0));
    v.windows(2)
        .map(|w| {
            let decades = (w[0].0 / w[1].0).log10();
            (w[0].0, w[1].0, (w[0].1 / w[1].1).powf(1.0 / decades))
        })
        .collect()
}

fn collision_sweep(cfg: &SimConfig, art: &mut Artifacts) -> Out {
    let sc = Scenario::CollisionSweep;
    let kcfg = cfg.kinetic_config();
    let lin = &cfg.lintheory;
    let mut nus = lin.nus.clone();
    if !nus.contains(&0.0) {
        nus.insert(0, 0.0);
    }
    let solved: Vec<(DensityHistory, DispersionRoot)> = nus
        .par_iter()
        .map(|&nu| {
            let (h, kern) = volterra_for(&kcfg, nu, lin.t_end, lin.dt)?;
            Ok((h, dispersion_root(&kern)?))
        })
        .collect::<landau::Result<_>>()
        .map_err(ctx(sc))?;
    let i0 = nus.iter().position(|&n| n == 0.0).expect("inserted above");
    let reference = &solved[i0].0;
    let mut csv = Csv::new(&["nu", "root_rate", "root_re_eta", "root_im_eta", "fit_rate", "sup_diff_nu0"]);
    let mut crit = Vec::new();
    let mut diffs = Vec::new();
    for (i, (&nu, (h, root))) in nus.iter().zip(&solved).enumerate() {
        art.write(&format!("density_history_{i}.csv"), &density_history_csv(h))?;
        let fit = volterra_rate(h, lin.window);
        let d = sup_difference(h, reference);
        diffs.push((nu, d));
        let fit_rate = fit.as_ref().map_or(f64::NAN, |f| f.rate);
        csv.floats(&[nu, root.rate, root.eta.re, root.eta.im, fit_rate, d]);
        crit.push(match fit {
            Ok(f) => rate_check(&format!("nu = {nu}: Volterra fit vs root"), f.rate, root.rate, 0.05),
            Err(e) => Criterion::failed(format!("nu = {nu}: Volterra fit vs root"), e.to_string()),
        });
    }
    for (a, b, f) in per_decade(&diffs) {
        crit.push(Criterion::at_least(format!("sup difference shrink per decade, nu {a} -> {b}"), f, 8.0));
    }
    art.write("sweep.csv", &csv.finish())?;
    Ok(crit)
}

fn echo_experiment(cfg: &SimConfig, art: &mut Artifacts) -> Out {
    let sc = Scenario::EchoExperiment;
    let e = &cfg.echo;
    let runs = echo_runs(&cfg.kinetic_config(), e.l, e.k_minus_l, e.s_force, e.eps1, e.eps2).map_err(ctx(sc))?;
    art.write("echo_report.json", &to_json(&runs.report)?)?;
    art.write("baseline_history.csv", &field_history_csv(&runs.baseline.history))?;
    let mut crit = conservation("baseline run", &runs.baseline, &cfg.interaction);
    let r = &runs.report;
    if let Some(k) = &runs.kicked {
        art.write("field_history.csv", &field_history_csv(&k.history))?;
        art.write("diagnostics.csv", &diagnostics_csv(&k.diagnostics))?;
        crit.extend(conservation("kicked run", k, &cfg.interaction));
        crit.push(
            Criterion::at_most("echo time offset", (r.t_measured / r.t_predicted - 1.0).abs(), 0.05)
                .with_detail(format!("measured {:.4}, predicted {}", r.t_measured, r.t_predicted)),
        );
        crit.push(Criterion::above("echo peak over baseline", r.peak_amp / r.baseline_amp, 1.0));
    } else {
        crit.push(Criterion::at_most("no forcing: peak over baseline", r.peak_amp / r.baseline_amp, 1.0));
    }
    Ok(crit)
}

/// Seeded `(k, l, α, t)` cases with `k > 0`.
pub fn piecewise_cases(seed: u64, n: usize) -> Vec<(i64, i64, f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| (rng.gen_range(1..=8), rng.gen_range(-16..=16), rng.gen_range(0.05..1.0), rng.gen_range(0.5..100.0)))
        .collect()
}

fn moment_csv(rows: &[MomentRow]) -> String {
    let mut csv = Csv::new(&["nu", "time", "numeric", "shape", "ratio"]);
    for r in rows {
        csv.floats(&[r.nu, r.time, r.numeric, r.shape, r.ratio]);
    }
    csv.finish()
}

fn kernel_bounds(cfg: &SimConfig, art: &mut Artifacts) -> Out {
    let sc = Scenario::KernelBounds;
    let e = &cfg.echo;
    let mut crit = write_kernel_table(cfg, art)?;

    let cases = piecewise_cases(cfg.seed, 200);
    let checked: Vec<(f64, f64)> = cases
        .par_iter()
        .map(|&(k, l, a, t)| piecewise_integral_check(k, l, a, t))
        .collect::<landau::Result<_>>()
        .map_err(ctx(sc))?;
    let mut csv = Csv::new(&["k", "l", "alpha", "t", "numeric", "bound"]);
    let mut worst = 0.0f64;
    for (&(k, l, a, t), &(num, bound)) in cases.iter().zip(&checked) {
        csv.row(&[Cell::I(k), Cell::I(l), Cell::F(a), Cell::F(t), Cell::F(num), Cell::F(bound)]);
        worst = worst.max(num / bound);
    }
    art.write("piecewise.csv", &csv.finish())?;
    crit.push(Criterion::at_most("piecewise integral over case bound", worst, 1.0 + 1e-10));

    if !e.nus.is_empty() {
        let fwd = forward_scan(&e.kernel, &e.nus, &e.times).map_err(ctx(sc))?;
        art.write("forward_moments.csv", &moment_csv(&fwd))?;
        if e.times.len() >= 2 {
            let floor = e.kernel.gamma - 1.0 - 0.2;
            for &nu in &e.nus {
                let rows: Vec<&MomentRow> = fwd.iter().filter(|r| r.nu == nu).collect();
                let slope = loglog_slope(
                    &rows.iter().map(|r| r.time).collect::<Vec<_>>(),
                    &rows.iter().map(|r| r.numeric).collect::<Vec<_>>(),
                );
                crit.push(Criterion::at_least(format!("forward moment decay exponent, nu = {nu}"), -slope, floor));
            }
        }
        if !e.starts.is_empty() {
            let bwd = backward_scan(&e.kernel, &e.nus, &e.starts).map_err(ctx(sc))?;
            art.write("backward_moments.csv", &moment_csv(&bwd))?;
        }
    }
    Ok(crit)
}

/// `kernel_table.csv` plus a brute-force spot check of the fast supremum.
pub fn write_kernel_table(cfg: &SimConfig, art: &mut Artifacts) -> Out {
    let e = &cfg.echo;
    let table = kernel_table(&e.kernel, &e.times, e.n_s).map_err(ctx(Scenario::KernelBounds))?;
    let mut csv = Csv::new(&["t", "s", "value"]);
    for r in &table.rows {
        csv.floats(&[r.t, r.s, r.value]);
    }
    art.write("kernel_table.csv", &csv.finish())?;
    let spec = e.kernel.with_trunc(e.kernel.trunc.min(64));
    let mut worst = 0.0f64;
    for r in table.rows.iter().step_by(7) {
        let fast = echo_kernel(&spec, r.t, r.s);
        let brute = echo_kernel_brute(&spec, r.t, r.s);
        worst = worst.max((fast - brute).abs() / brute.abs().max(f64::MIN_POSITIVE));
    }
    Ok(vec![Criterion::at_most("fast kernel supremum vs brute force", worst, 1e-12)])
}

/// Seeded suite cycling through pure-x, pure-v and mixed fields.
pub fn norm_suite(seed: u64, n: usize) -> Vec<SpectralDistribution> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let amps: Vec<(f64, f64, f64)> = (0..5)
                .map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-0.5..0.5)))
                .collect();
            let width = rng.gen_range(1.0..3.0);
            let f = match i % 3 {
                0 => {
                    let c: Vec<Complex64> = amps.iter().map(|&(a, b, _)| Complex64::new(a, b)).collect();
                    SpectralDistribution::pure_x(&c, 64, 0.25)
                }
                1 => SpectralDistribution::from_fn(2, 64, 0.25, |k, eta| {
                    if k == 0 {
                        let (a, _, c) = amps[2];
                        Complex64::new(a.abs() + 0.1, 0.0) * (-width * (eta - c).powi(2)).exp()
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                }),
                _ => SpectralDistribution::from_fn(2, 64, 0.25, |k, eta| {
                    let (a, b, c) = amps[(k + 2) as usize];
                    Complex64::new(a, b) * (-width * (eta - c).powi(2)).exp()
                }),
            };
            f.expect("fixed grid is valid")
        })
        .collect()
}

/// Seeded `(λ, μ, τ)` parameter sets; the first is unweighted.
pub fn norm_params(seed: u64, n: usize) -> Vec<NormParams> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    (0..n)
        .map(|i| {
            if i == 0 {
                NormParams::new(0.0, 0.0, 0.0)
            } else {
                NormParams::new(rng.gen_range(0.0..0.1), rng.gen_range(0.0..0.3), rng.gen_range(-1.0..1.0))
            }
            .with_n_max(80)
        })
        .collect()
}

/// Worst relative homogeneity defect of the three norms for `c ∈ {0.5, 3}`.
pub fn homogeneity_defect(suite: &[SpectralDistribution], params: &[NormParams]) -> landau::Result<f64> {
    let mut worst = 0.0f64;
    for f in suite {
        for p in params {
            for c in [0.5, 3.0] {
                let g = f.scale(c);
                let pairs = [
                    (f_norm(&g, p)?, c * f_norm(f, p)?),
                    (z_norm(&g, p)?, c * z_norm(f, p)?),
                    (y_norm(&g, p), c * y_norm(f, p)),
                ];
                for (a, b) in pairs {
                    worst = worst.max((a - b).abs() / b.abs().max(f64::MIN_POSITIVE));
                }
            }
        }
    }
    Ok(worst)
}

fn norm_battery(cfg: &SimConfig, art: &mut Artifacts) -> Out {
    let sc = Scenario::NormBattery;
    let suite = norm_suite(cfg.seed, cfg.hybridnorms.fields);
    let params = norm_params(cfg.seed, cfg.hybridnorms.param_sets);
    let report = norm_property_battery(&suite, &params).map_err(ctx(sc))?;
    let mut csv = Csv::new(&["item", "checks", "worst_slack", "passed"]);
    let mut crit = Vec::new();
    for it in &report.items {
        csv.row(&[Cell::S(it.item), Cell::I(it.checks as i64), Cell::F(it.worst_slack), Cell::I(it.passed as i64)]);
        let c = Criterion::below(it.item, it.worst_slack, landau::hybridnorms::BATTERY_TOL)
            .with_detail(format!("{} checks", it.checks));
        crit.push(if it.checks == 0 { Criterion::failed(it.item, "no applicable fields") } else { c });
    }
    art.write("norm_battery.csv", &csv.finish())?;
    art.write("norm_observations.json", &to_json(&report.observations)?)?;
    let h = homogeneity_defect(&suite, &params).map_err(ctx(sc))?;
    crit.push(Criterion::at_most("homogeneity", h, 1e-12));
    Ok(crit)
}

/// Error of the free-transport solver against `f̂₀(k, η + kt)`.
pub struct FreeTransport {
    /// `(t, max error)` at the checkpoints.
    pub rows: Vec<(f64, f64)>,
    pub max_error: f64,
    pub mass_drift: f64,
    pub horizon: f64,
}

/// Runs free transport (`W = 0`, `ν = 0`) up to 80% of the recurrence time
/// of the perturbed mode, comparing against the exact shifted transform on
/// a window of 81 velocity frequencies at ten checkpoints.
pub fn free_transport(cfg: &SimConfig) -> landau::Result<FreeTransport> {
    let kcfg = KineticConfig { interaction: Interaction::Zero, nu: 0.0, ..cfg.kinetic_config() };
    kcfg.validate()?;
    let p = kcfg.perturbation;
    let k = p.mode as i64;
    let exact = perturbation_transform(&kcfg.profile, p.shape, p.amplitude);
    let stepper = Stepper::new(kcfg.grid, &kcfg.profile, &kcfg.interaction, 0.0)?;
    let mut state = kcfg.initial_state()?;
    let m0 = state.mass();
    let horizon = 0.8 * kcfg.grid.recurrence_time(k);
    let steps = (horizon / kcfg.dt).floor() as usize;
    let every = (steps / 10).max(1);
    let mut rows = Vec::new();
    let mut drift = 0.0f64;
    let kf = k as f64;
    for i in 1..=steps {
        stepper.advance(&mut state, kcfg.dt)?;
        state.set_time(i as f64 * kcfg.dt);
        drift = drift.max((state.mass() / m0 - 1.0).abs());
        if i % every == 0 || i == steps {
            let t = state.time();
            let err = (-40..=40)
                .map(|j| {
                    let zeta = j as f64 * 0.05;
                    let eta = zeta - kf * t;
                    (state.fhat(k, eta) - exact(eta + kf * t)).norm()
                })
                .fold(0.0, f64::max);
            rows.push((t, err));
        }
    }
    let max_error = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    Ok(FreeTransport { rows, max_error, mass_drift: drift, horizon })
}

fn free_transport_check(cfg: &SimConfig, art: &mut Artifacts) -> Out {
    let ft = free_transport(cfg).map_err(ctx(Scenario::FreeTransportCheck))?;
    let mut csv = Csv::new(&["t", "max_error"]);
    for &(t, e) in &ft.rows {
        csv.floats(&[t, e]);
    }
    art.write("free_transport.csv", &csv.finish())?;
    Ok(vec![
        Criterion::below("max spectral error up to 0.8 recurrence time", ft.max_error, 1e-10)
            .with_detail(format!("horizon {:.3}", ft.horizon)),
        Criterion::below("relative mass drift", ft.mass_drift, 1e-10),
    ])
}

fn stability(cfg: &SimConfig, art: &mut Artifacts) -> Out {
    let scan = ScanSpec::for_profile(&cfg.profile);
    match stability_scan(1..=cfg.lintheory.k_max, cfg.nu, &cfg.profile, &cfg.interaction, &scan) {
        Ok(rep) => {
            let mut csv = Csv::new(&["k", "margin", "re_eta", "im_eta", "analytic"]);
            for m in &rep.per_mode {
                let eta = m.eta.unwrap_or(Complex64::new(f64::NAN, f64::NAN));
                csv.row(&[Cell::I(m.k), Cell::F(m.margin), Cell::F(eta.re), Cell::F(eta.im), Cell::I(m.analytic as i64)]);
            }
            art.write("stability.csv", &csv.finish())?;
            art.write("stability.json", &to_json(&rep)?)?;
            Ok(vec![Criterion::above("stability margin kappa", rep.kappa, 0.0)
                .with_detail(format!("worst mode {}, v_Te ratio {:.3}", rep.worst_mode, rep.vte_ratio))])
        }
        Err(e @ landau::Error::MarginNonPositive { .. }) => {
            Ok(vec![Criterion::above("stability margin kappa", 0.0, 0.0).with_detail(e.to_string())])
        }
        Err(e) => Err(ctx(Scenario::StabilityScan)(e)),
    }
}
