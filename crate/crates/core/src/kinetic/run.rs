use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::state::{Grid, PhaseState};
use super::stepper::Stepper;
use crate::echo::echo_time;
use crate::error::{Error, Result};
use crate::hybridnorms::{f_norm, y_norm, NormParams};
use crate::profiles::{Interaction, VelocityProfile};

/// Velocity dependence of the initial perturbation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum VShape {
    /// `f⁰(v)` itself.
    Equilibrium,
    Gaussian { thermal_speed: f64, center: f64 },
}

/// `f₀ = f⁰(v) + ε cos(2π·mode·x) shape(v)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Perturbation {
    pub mode: usize,
    pub amplitude: f64,
    pub shape: VShape,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KineticConfig {
    pub profile: VelocityProfile,
    pub interaction: Interaction,
    pub nu: f64,
    pub grid: Grid,
    pub dt: f64,
    pub t_end: f64,
    pub perturbation: Perturbation,
    /// Record every `cadence` steps.
    pub cadence: usize,
    /// `(λ, μ)` pairs for the gliding norms in the diagnostics.
    pub norms: Vec<(f64, f64)>,
}

impl KineticConfig {
    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        self.interaction.validate()?;
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if !(self.nu >= 0.0) {
            return bad(format!("nu must be non-negative, got {}", self.nu));
        }
        if !(self.dt > 0.0) || !(self.t_end >= 0.0) {
            return bad(format!("need dt > 0 and t_end >= 0 (got {}, {})", self.dt, self.t_end));
        }
        if self.cadence == 0 {
            return bad("cadence must be at least 1".into());
        }
        if self.perturbation.mode == 0 || self.perturbation.mode > self.grid.k_max {
            return bad(format!("perturbation mode must lie in 1..={}", self.grid.k_max));
        }
        if self.norms.iter().any(|&(l, m)| !(l >= 0.0 && m >= 0.0)) {
            return bad("norm weights must be non-negative".into());
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }

    pub fn initial_state(&self) -> Result<PhaseState> {
        let mut s = PhaseState::equilibrium(self.grid, &self.profile)?;
        let p = self.perturbation;
        if p.amplitude != 0.0 {
            match p.shape {
                VShape::Equilibrium => {
                    let f0 = super::state::discrete_equilibrium(&self.profile, &self.grid);
                    let dv = self.grid.dv();
                    let v0 = self.grid.v(0);
                    s.perturb(p.mode, p.amplitude, |v| f0[((v - v0) / dv).round() as usize])?;
                }
                VShape::Gaussian { thermal_speed, center } => {
                    let g = VelocityProfile::mixture(&[(1.0, center, thermal_speed)])?;
                    s.perturb(p.mode, p.amplitude, |v| g.sample_1d(v))?;
                }
            }
        }
        Ok(s)
    }
}

/// Density and field modes `k = 0..=k_max` at the recorded times.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldHistory {
    pub k_max: usize,
    pub times: Vec<f64>,
    pub rho: Vec<Vec<Complex64>>,
    pub e: Vec<Vec<Complex64>>,
}

impl FieldHistory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    fn pick(v: &[Complex64], k: i64) -> Complex64 {
        let z = v[k.unsigned_abs() as usize];
        if k < 0 {
            z.conj()
        } else {
            z
        }
    }

    pub fn rho_mode(&self, k: i64) -> Vec<Complex64> {
        self.rho.iter().map(|r| Self::pick(r, k)).collect()
    }

    pub fn e_mode(&self, k: i64) -> Vec<Complex64> {
        self.e.iter().map(|r| Self::pick(r, k)).collect()
    }

    /// Real field at `x` from the record `i`.
    pub fn e_at(&self, i: usize, x: f64) -> f64 {
        let e = &self.e[i];
        let mut acc = e[0].re;
        for (k, c) in e.iter().enumerate().skip(1) {
            acc += 2.0 * (c * Complex64::from_polar(1.0, 2.0 * PI * k as f64 * x)).re;
        }
        acc
    }

    /// `sup_x |E|` of record `i`, sampled on `16(k_max+1)` points.
    pub fn e_sup(&self, i: usize) -> f64 {
        let n = 16 * (self.k_max + 1);
        (0..n).map(|m| self.e_at(i, m as f64 / n as f64).abs()).fold(0.0, f64::max)
    }

    /// Largest `|Ê − 2πikŴρ̂|` over all records.
    pub fn poisson_residual(&self, w: &Interaction) -> Result<f64> {
        let modes: Vec<i64> = (0..=self.k_max as i64).collect();
        let mut worst = 0.0f64;
        for (r, e) in self.rho.iter().zip(&self.e) {
            let expect = super::stepper::poisson_field(&modes, r, w)?;
            for (a, b) in expect.iter().zip(e) {
                worst = worst.max((a - b).norm());
            }
        }
        Ok(worst)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticsRow {
    pub t: f64,
    pub mass: f64,
    pub momentum: f64,
    pub l2: f64,
    /// One entry per label; `NaN` where the norm's tail is not resolved.
    pub norms: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostics {
    pub labels: Vec<String>,
    pub rows: Vec<DiagnosticsRow>,
}

impl Diagnostics {
    pub fn max_mass_drift(&self) -> f64 {
        let m0 = self.rows.first().map_or(1.0, |r| r.mass);
        self.rows.iter().map(|r| (r.mass / m0 - 1.0).abs()).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub history: FieldHistory,
    pub diagnostics: Diagnostics,
    pub state: PhaseState,
}

/// External velocity kick applied once at time `time`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kick {
    pub time: f64,
    pub mode: i64,
    pub amplitude: f64,
}

fn norm_labels(norms: &[(f64, f64)]) -> Vec<String> {
    let mut out = Vec::new();
    for &(l, m) in norms {
        out.push(format!("fnorm_eq_{l}_{m}"));
        out.push(format!("fnorm_init_{l}_{m}"));
        out.push(format!("ynorm_eq_{l}_{m}"));
        out.push(format!("ynorm_init_{l}_{m}"));
    }
    out
}

fn record(
    cfg: &KineticConfig,
    stepper: &Stepper,
    state: &PhaseState,
    eq: &PhaseState,
    init: &PhaseState,
    hist: &mut FieldHistory,
    diag: &mut Diagnostics,
) -> Result<()> {
    hist.times.push(state.time());
    hist.rho.push(state.density());
    hist.e.push(stepper.field(state));
    let mut norms = Vec::with_capacity(4 * cfg.norms.len());
    if !cfg.norms.is_empty() {
        let d_eq = state.sub(eq)?.spectral()?;
        let d_init = state.sub(init)?.spectral()?;
        for &(l, m) in &cfg.norms {
            let p = NormParams::new(l, m, state.time());
            norms.push(f_norm(&d_eq, &p).unwrap_or(f64::NAN));
            norms.push(f_norm(&d_init, &p).unwrap_or(f64::NAN));
            norms.push(y_norm(&d_eq, &p));
            norms.push(y_norm(&d_init, &p));
        }
    }
    diag.rows.push(DiagnosticsRow { t: state.time(), mass: state.mass(), momentum: state.momentum(), l2: state.l2(), norms });
    Ok(())
}

/// Advances the configured initial state to `t_end`, recording fields and
/// diagnostics every `cadence` steps.
pub fn run(cfg: &KineticConfig) -> Result<RunOutput> {
    run_with_kick(cfg, None)
}

pub fn run_with_kick(cfg: &KineticConfig, kick: Option<Kick>) -> Result<RunOutput> {
    cfg.validate()?;
    let stepper = Stepper::new(cfg.grid, &cfg.profile, &cfg.interaction, cfg.nu)?;
    let mut state = cfg.initial_state()?;
    let eq = PhaseState::equilibrium(cfg.grid, &cfg.profile)?;
    let init = state.clone();
    let mut hist = FieldHistory { k_max: cfg.grid.k_max, times: vec![], rho: vec![], e: vec![] };
    let mut diag = Diagnostics { labels: norm_labels(&cfg.norms), rows: vec![] };
    let kick_step = match kick {
        Some(k) => {
            let n = k.time / cfg.dt;
            if (n - n.round()).abs() > 1e-9 || n < 0.0 {
                return Err(Error::InvalidArgument(format!("kick time {} is not a multiple of dt", k.time)));
            }
            Some((n.round() as usize, k))
        }
        None => None,
    };
    record(cfg, &stepper, &state, &eq, &init, &mut hist, &mut diag)?;
    let steps = cfg.steps();
    for i in 0..steps {
        if let Some((n, k)) = kick_step {
            if n == i {
                stepper.kick(&mut state, k.mode, k.amplitude);
            }
        }
        stepper.advance(&mut state, cfg.dt)?;
        // keep the clock on the grid
        state.set_time((i + 1) as f64 * cfg.dt);
        if (i + 1) % cfg.cadence == 0 || i + 1 == steps {
            record(cfg, &stepper, &state, &eq, &init, &mut hist, &mut diag)?;
        }
    }
    Ok(RunOutput { history: hist, diagnostics: diag, state })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EchoReport {
    pub l: i64,
    pub k: i64,
    pub s_force: f64,
    pub t_predicted: f64,
    pub t_measured: f64,
    pub peak_amp: f64,
    pub baseline_amp: f64,
}

/// Largest `|ρ̂(t,k)|` strictly after `after`, refined by a parabola through
/// the neighbouring samples.
fn post_peak(hist: &FieldHistory, k: i64, after: f64) -> (f64, f64) {
    let a: Vec<f64> = hist.rho_mode(k).iter().map(|z| z.norm()).collect();
    let mut best = None::<usize>;
    for (i, &t) in hist.times.iter().enumerate() {
        if t > after && best.is_none_or(|b| a[i] > a[b]) {
            best = Some(i);
        }
    }
    let Some(i) = best else { return (f64::NAN, 0.0) };
    if i == 0 || i + 1 >= a.len() || hist.times[i - 1] <= after {
        return (hist.times[i], a[i]);
    }
    let (y0, y1, y2) = (a[i - 1], a[i], a[i + 1]);
    let h = hist.times[i + 1] - hist.times[i];
    let den = y0 - 2.0 * y1 + y2;
    if den >= 0.0 {
        return (hist.times[i], y1);
    }
    let off = 0.5 * (y0 - y2) / den;
    (hist.times[i] + off * h, y1 - 0.25 * (y0 - y2) * off)
}

/// Launches mode `l` with amplitude `eps1`, kicks mode `k − l` at `s_force`
/// with velocity amplitude `eps2`, and locates the echo in mode `k`. The
/// baseline is the same run without the kick.
pub fn echo_experiment(
    cfg: &KineticConfig,
    l: i64,
    k_minus_l: i64,
    s_force: f64,
    eps1: f64,
    eps2: f64,
) -> Result<EchoReport> {
    echo_runs(cfg, l, k_minus_l, s_force, eps1, eps2).map(|r| r.report)
}

#[derive(Debug, Clone)]
pub struct EchoRuns {
    pub report: EchoReport,
    pub kicked: Option<RunOutput>,
    pub baseline: RunOutput,
}

/// [`echo_experiment`] keeping both runs.
pub fn echo_runs(cfg: &KineticConfig, l: i64, k_minus_l: i64, s_force: f64, eps1: f64, eps2: f64) -> Result<EchoRuns> {
    let k = l + k_minus_l;
    let t_star = echo_time(l, k, s_force).ok_or(Error::NoFutureEcho { l, k, s: s_force })?;
    let t_rec = cfg.grid.recurrence_time(k);
    if t_star >= t_rec {
        return Err(Error::EchoBeyondRecurrence { t_echo: t_star, t_recurrence: t_rec });
    }
    if t_star >= cfg.t_end {
        return Err(Error::InvalidArgument(format!("echo time {t_star} beyond the run horizon {}", cfg.t_end)));
    }
    if l < 1 || l as usize > cfg.grid.k_max || k_minus_l.unsigned_abs() as usize > cfg.grid.k_max {
        return Err(Error::InvalidArgument("echo modes must lie on the grid with l >= 1".into()));
    }
    let cfg = KineticConfig {
        perturbation: Perturbation { mode: l as usize, amplitude: eps1, ..cfg.perturbation },
        ..cfg.clone()
    };
    let baseline = run(&cfg)?;
    let (_, baseline_amp) = post_peak(&baseline.history, k, s_force);
    let kicked = if eps2 == 0.0 {
        None
    } else {
        Some(run_with_kick(&cfg, Some(Kick { time: s_force, mode: k_minus_l, amplitude: eps2 }))?)
    };
    let (t_measured, peak_amp) = post_peak(&kicked.as_ref().unwrap_or(&baseline).history, k, s_force);
    Ok(EchoRuns {
        report: EchoReport { l, k, s_force, t_predicted: t_star, t_measured, peak_amp, baseline_amp },
        kicked,
        baseline,
    })
}

/// Deflection `(δX, δV)` of the characteristic `dX/dτ = V, dV/dτ = E(τ, X)`
/// started from `(x, v)` at time `s`, relative to free streaming, at time `t`.
/// The field is linear in time between records; RK4 with four substeps per
/// record interval.
pub fn characteristics_deflect(field: &FieldHistory, x: f64, v: f64, s: f64, t: f64) -> Result<(f64, f64)> {
    let (start, end) = match (field.times.first(), field.times.last()) {
        (Some(&a), Some(&b)) => (a, b),
        _ => return Err(Error::OutOfHistory { t: s, start: f64::NAN, end: f64::NAN }),
    };
    for &tt in &[s, t] {
        if tt < start - 1e-12 || tt > end + 1e-12 {
            return Err(Error::OutOfHistory { t: tt, start, end });
        }
    }
    if t < s {
        return Err(Error::InvalidArgument(format!("need s <= t (got {s}, {t})")));
    }
    if t == s {
        return Ok((0.0, 0.0));
    }
    let e = |tau: f64, xx: f64| -> f64 {
        let i = match field.times.binary_search_by(|p| p.total_cmp(&tau)) {
            Ok(i) => return field.e_at(i, xx),
            Err(i) => i.clamp(1, field.len() - 1),
        };
        let (t0, t1) = (field.times[i - 1], field.times[i]);
        let w = ((tau - t0) / (t1 - t0)).clamp(0.0, 1.0);
        (1.0 - w) * field.e_at(i - 1, xx) + w * field.e_at(i, xx)
    };
    let spacing = if field.len() > 1 { (end - start) / (field.len() - 1) as f64 } else { t - s };
    let n = (4.0 * (t - s) / spacing).ceil().max(1.0) as usize;
    let h = (t - s) / n as f64;
    // integrate the deviation from free streaming directly
    let (mut dx, mut dvv) = (0.0f64, 0.0f64);
    for i in 0..n {
        let tau = s + i as f64 * h;
        let free = |tt: f64| x + v * (tt - s);
        let rhs = |tt: f64, ddx: f64, ddv: f64| (ddv, e(tt, free(tt) + ddx));
        let (k1x, k1v) = rhs(tau, dx, dvv);
        let (k2x, k2v) = rhs(tau + 0.5 * h, dx + 0.5 * h * k1x, dvv + 0.5 * h * k1v);
        let (k3x, k3v) = rhs(tau + 0.5 * h, dx + 0.5 * h * k2x, dvv + 0.5 * h * k2v);
        let (k4x, k4v) = rhs(tau + h, dx + h * k3x, dvv + h * k3v);
        dx += h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
        dvv += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    }
    Ok((dx, dvv))
}
