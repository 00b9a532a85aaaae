//! Dispersion function `L_ν(η,k) = ∫₀^∞ e^{2πiη̄|k|t} e^{2πλ|k|t} K_ν(t,k) dt`
//! and the measured stability margin `κ = inf |1 − L_ν|` over `Im η ≤ 0`.
//!
//! With this sign a density mode `e^{pt}` corresponds to `p = −2πiη̄|k|`,
//! so `Im η ≤ 0` is exactly the closed half-plane `Re p ≥ 0` of
//! non-decaying modes, and the damping rate of a root is `−2π Im(η)|k|`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::faddeeva::faddeeva;
use super::kernel::VolterraKernel;
use crate::error::{Error, Result};
use crate::numerics::{nelder_mead_2d, Simpson};
use crate::profiles::{Interaction, VelocityProfile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DispersionMethod {
    /// Adaptive Simpson on the truncated Laplace integral.
    Quadrature,
    /// Per-component Faddeeva closed form.
    ClosedForm,
}

/// Exponent `e^{-rt-at²}` bounding the integrand magnitude.
fn envelope(eta: Complex64, kern: &VolterraKernel, lambda_weight: f64) -> (f64, f64) {
    let k = kern.k().unsigned_abs() as f64;
    let s = kern.profile().min_thermal_speed();
    let r = kern.nu() - 2.0 * PI * eta.im * k - 2.0 * PI * lambda_weight * k;
    (r, 2.0 * PI * PI * s * s * k * k)
}

fn check_convergence(eta: Complex64, kern: &VolterraKernel, lambda_weight: f64) -> Result<()> {
    let (r, a) = envelope(eta, kern, lambda_weight);
    if kern.k() == 0 || (r < 0.0 && r * r / (4.0 * a) > 600.0) {
        return Err(Error::IntegralDiverges { re: eta.re, im: eta.im });
    }
    Ok(())
}

pub fn dispersion_l(eta: Complex64, kern: &VolterraKernel, lambda_weight: f64) -> Result<Complex64> {
    dispersion_l_with(eta, kern, lambda_weight, DispersionMethod::Quadrature)
}

pub fn dispersion_l_with(
    eta: Complex64,
    kern: &VolterraKernel,
    lambda_weight: f64,
    method: DispersionMethod,
) -> Result<Complex64> {
    check_convergence(eta, kern, lambda_weight)?;
    if kern.w_hat() == 0.0 && kern.nu() == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    match method {
        DispersionMethod::Quadrature => quadrature(eta, kern, lambda_weight),
        DispersionMethod::ClosedForm => Ok(closed_form(eta, kern, lambda_weight)),
    }
}

fn quadrature(eta: Complex64, kern: &VolterraKernel, lambda_weight: f64) -> Result<Complex64> {
    let k = kern.k().unsigned_abs() as f64;
    let (r, a) = envelope(eta, kern, lambda_weight);
    let mag = |t: f64| (-r * t - a * t * t).exp() * (kern.nu() + kern.w_hat().abs() * k * k * t);
    // walk past the peak until the envelope falls below 1e-14 of it
    let h = 0.05 / a.sqrt();
    let (mut t, mut peak, mut t_end) = (0.0, 0.0f64, 0.0);
    loop {
        let m = mag(t);
        peak = peak.max(m);
        if t > 0.0 && m < 1e-14 * peak && t > -r / (2.0 * a) {
            t_end = t;
        }
        if t_end > 0.0 {
            break;
        }
        t += h;
    }
    let rot = Complex64::new(0.0, 2.0 * PI * k) * eta.conj() + 2.0 * PI * lambda_weight * k;
    let freq = k * (eta.re.abs() + kern.profile().velocity_scale()) + 1.0;
    let simpson = Simpson {
        abs_tol: 1e-15 * peak.max(1e-300) * t_end,
        rel_tol: 1e-11,
        initial_panels: ((t_end * freq * 16.0).ceil() as usize).max(64),
        max_depth: 40,
    };
    let value = simpson.integrate_complex(|t| (rot * t).exp() * kern.eval(t), 0.0, t_end);
    if !(value.re.is_finite() && value.im.is_finite()) {
        return Err(Error::IntegralDiverges { re: eta.re, im: eta.im });
    }
    Ok(value)
}

fn closed_form(eta: Complex64, kern: &VolterraKernel, lambda_weight: f64) -> Complex64 {
    let kk = kern.k() as f64;
    let k = kk.abs();
    let nu = kern.nu();
    let w = kern.w_hat();
    let mut total = Complex64::new(0.0, 0.0);
    for c in kern.profile().components() {
        let q = nu - Complex64::new(0.0, 2.0 * PI * k) * eta.conj() - 2.0 * PI * lambda_weight * k
            + Complex64::new(0.0, 2.0 * PI * c.center[0] * kk);
        let a = 2.0 * PI * PI * c.thermal_speed * c.thermal_speed * kk * kk;
        let sa = a.sqrt();
        let g0 = 0.5 * (PI / a).sqrt() * faddeeva(Complex64::i() * q / (2.0 * sa));
        let g1 = (1.0 - q * g0) / (2.0 * a);
        total += c.weight * (nu * g0 - w * kk * kk * g1);
    }
    total
}

/// A zero of `1 − L_ν(·,k)` and the mode it describes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DispersionRoot {
    pub eta: Complex64,
    /// `Re p = −2π Im(η)|k|`; negative for damped modes.
    pub rate: f64,
    /// Angular frequency `|Im p| = 2π|Re η||k|`.
    pub frequency: f64,
}

fn root_from_eta(eta: Complex64, k: i64) -> DispersionRoot {
    let k = k.unsigned_abs() as f64;
    DispersionRoot {
        eta,
        rate: -2.0 * PI * eta.im * k,
        frequency: 2.0 * PI * eta.re.abs() * k,
    }
}

/// Newton iteration on `1 − L_ν` (closed form, analytically continued).
/// `L_ν` is holomorphic in `η̄`, so the iteration runs on the conjugate.
pub fn refine_root(kern: &VolterraKernel, guess: Complex64) -> Result<DispersionRoot> {
    let f = |z: Complex64| 1.0 - closed_form(z.conj(), kern, 0.0);
    let mut z = guess.conj();
    for _ in 0..100 {
        let fz = f(z);
        let h = 1e-7 * (1.0 + z.norm());
        let d = (f(z + h) - f(z - h)) / (2.0 * h);
        let step = fz / d;
        z -= step;
        if !(z.re.is_finite() && z.im.is_finite()) {
            break;
        }
        if step.norm() < 1e-13 * (1.0 + z.norm()) {
            return Ok(root_from_eta(z.conj(), kern.k()));
        }
    }
    Err(Error::InvalidArgument(format!("root iteration from {guess} did not converge")))
}

/// The root with the smallest damping among those found from a coarse grid
/// on `0 ≤ Re η ≤ re_max`, `−im_max ≤ Im η ≤ im_max`.
pub fn least_damped_root(kern: &VolterraKernel, re_max: f64, im_max: f64) -> Result<DispersionRoot> {
    let (nr, ni) = (60usize, 60usize);
    let pt = |i: usize, j: usize| {
        Complex64::new(re_max * i as f64 / nr as f64, im_max * (2.0 * j as f64 / ni as f64 - 1.0))
    };
    let grid: Vec<Vec<f64>> = (0..=nr)
        .map(|i| (0..=ni).map(|j| (1.0 - closed_form(pt(i, j), kern, 0.0)).norm()).collect())
        .collect();
    let mut best: Option<DispersionRoot> = None;
    for i in 1..nr {
        for j in 1..ni {
            let v = grid[i][j];
            let is_min = (i - 1..=i + 1)
                .all(|a| (j - 1..=j + 1).all(|b| (a, b) == (i, j) || grid[a][b] >= v));
            if !is_min {
                continue;
            }
            if let Ok(r) = refine_root(kern, pt(i, j)) {
                let keep = best.is_none_or(|b| r.rate > b.rate + 1e-12);
                if r.eta.re >= -1e-12 && keep && (r.eta - pt(i, j)).norm() < 4.0 * (re_max + im_max) / nr as f64 {
                    best = Some(r);
                }
            }
        }
    }
    best.ok_or_else(|| Error::InvalidArgument("no dispersion root found on the search grid".into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanSpec {
    pub re_max: f64,
    pub im_max: f64,
    pub n_re: usize,
    pub n_im: usize,
    /// Local minima refined with Nelder–Mead per mode.
    pub refine: usize,
    pub lambda_weight: f64,
    /// Phase velocity / thermal speed ratio reported as the `v_Te` condition.
    pub vte_threshold: f64,
    pub method: DispersionMethod,
}

impl ScanSpec {
    /// Grid scaled to the profile's velocity spread.
    pub fn for_profile(profile: &VelocityProfile) -> Self {
        let v = profile.velocity_scale();
        Self {
            re_max: 8.0 * v,
            im_max: 4.0 * v,
            n_re: 81,
            n_im: 41,
            refine: 4,
            lambda_weight: 0.0,
            vte_threshold: 3.0,
            method: DispersionMethod::ClosedForm,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeMargin {
    pub k: i64,
    pub margin: f64,
    pub eta: Option<Complex64>,
    /// Margin taken from the large-|k| bound instead of a scan.
    pub analytic: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport {
    pub kappa: f64,
    pub worst_mode: i64,
    pub worst_frequency: Complex64,
    pub per_mode: Vec<ModeMargin>,
    pub scan: ScanSpec,
    pub vte_ratio: f64,
    pub vte_satisfied: bool,
}

/// `sup_{Im η ≤ 0} |L_ν(η,k)|` is at most
/// `ν/(2√(2π)σ|k|) + |Ŵ(k)|/(4π²σ²)` with `σ` the smallest thermal speed.
pub fn large_mode_bound(profile: &VelocityProfile, interaction: &Interaction, k: i64, nu: f64) -> Result<f64> {
    let s = profile.min_thermal_speed();
    let ka = k.unsigned_abs() as f64;
    Ok(nu / (2.0 * (2.0 * PI).sqrt() * s * ka) + interaction.hat_1d(k)?.abs() / (4.0 * PI * PI * s * s))
}

const ROOT_TOL: f64 = 1e-8;

pub fn stability_scan(
    k_range: std::ops::RangeInclusive<i64>,
    nu: f64,
    profile: &VelocityProfile,
    interaction: &Interaction,
    scan: &ScanSpec,
) -> Result<StabilityReport> {
    if !(scan.re_max > 0.0 && scan.im_max > 0.0) || scan.n_re < 2 || scan.n_im < 2 {
        return Err(Error::InvalidArgument("degenerate stability scan grid".into()));
    }
    let mut modes: Vec<i64> = k_range.filter(|&k| k != 0).collect();
    modes.sort_by_key(|k| (k.unsigned_abs(), *k));
    let mut kappa = 1.0f64;
    let mut worst = (0i64, Complex64::new(0.0, -f64::INFINITY));
    let mut per_mode = Vec::with_capacity(modes.len());
    for &k in &modes {
        let bound = large_mode_bound(profile, interaction, k, nu)?;
        if scan.lambda_weight == 0.0 && 1.0 - bound >= kappa {
            per_mode.push(ModeMargin { k, margin: 1.0 - bound, eta: None, analytic: true });
            continue;
        }
        let kern = VolterraKernel::new(profile, interaction, k, nu)?;
        let (margin, eta) = scan_mode(&kern, scan)?;
        if margin < ROOT_TOL {
            return Err(Error::MarginNonPositive { k, re: eta.re, im: eta.im });
        }
        if margin < kappa {
            kappa = margin;
            worst = (k, eta);
        }
        per_mode.push(ModeMargin { k, margin, eta: Some(eta), analytic: false });
    }
    let phase = worst.1 + Complex64::new(0.0, nu / (2.0 * PI * worst.0.unsigned_abs().max(1) as f64));
    let vte_ratio = if worst.1.im.is_finite() {
        phase.norm() / profile.min_thermal_speed()
    } else {
        f64::INFINITY
    };
    Ok(StabilityReport {
        kappa,
        worst_mode: worst.0,
        worst_frequency: worst.1,
        per_mode,
        scan: *scan,
        vte_ratio,
        vte_satisfied: vte_ratio >= scan.vte_threshold,
    })
}

fn scan_mode(kern: &VolterraKernel, scan: &ScanSpec) -> Result<(f64, Complex64)> {
    let pt = |i: usize, j: usize| {
        Complex64::new(
            -scan.re_max + 2.0 * scan.re_max * i as f64 / (scan.n_re - 1) as f64,
            -scan.im_max * j as f64 / (scan.n_im - 1) as f64,
        )
    };
    let eval = |z: Complex64| -> Result<f64> {
        Ok((1.0 - dispersion_l_with(z, kern, scan.lambda_weight, scan.method)?).norm())
    };
    let grid: Vec<Vec<f64>> = (0..scan.n_re)
        .into_par_iter()
        .map(|i| (0..scan.n_im).map(|j| eval(pt(i, j))).collect::<Result<Vec<f64>>>())
        .collect::<Result<_>>()?;
    let mut minima: Vec<(f64, usize, usize)> = Vec::new();
    for i in 0..scan.n_re {
        for j in 0..scan.n_im {
            let v = grid[i][j];
            let mut is_min = true;
            for a in i.saturating_sub(1)..=(i + 1).min(scan.n_re - 1) {
                for b in j.saturating_sub(1)..=(j + 1).min(scan.n_im - 1) {
                    if (a, b) != (i, j) && grid[a][b] < v {
                        is_min = false;
                    }
                }
            }
            if is_min {
                minima.push((v, i, j));
            }
        }
    }
    minima.sort_by(|a, b| a.0.total_cmp(&b.0).then((a.1, a.2).cmp(&(b.1, b.2))));
    let (v0, i0, j0) = minima[0];
    let mut best = (v0, pt(i0, j0));
    let step = [
        2.0 * scan.re_max / (scan.n_re - 1) as f64,
        scan.im_max / (scan.n_im - 1) as f64,
    ];
    for &(_, i, j) in minima.iter().take(scan.refine) {
        let z = pt(i, j);
        let objective = |x: [f64; 2]| {
            let z = Complex64::new(x[0], x[1].min(0.0));
            eval(z).unwrap_or(f64::INFINITY)
        };
        let m = nelder_mead_2d(objective, [z.re, z.im], step, 1e-15, 400);
        let z = Complex64::new(m.x[0], m.x[1].min(0.0));
        if m.value < best.0 {
            best = (m.value, z);
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::Sign;

    fn landau(nu: f64) -> VolterraKernel {
        let p = VelocityProfile::maxwellian(0.05627).unwrap();
        VolterraKernel::new(&p, &Interaction::power_law(2.0, 1.0, Sign::Repulsive), 1, nu).unwrap()
    }

    #[test]
    fn zero_interaction_gives_zero() {
        let p = VelocityProfile::maxwellian(1.0).unwrap();
        let kern = VolterraKernel::new(&p, &Interaction::Zero, 1, 0.0).unwrap();
        let l = dispersion_l(Complex64::new(0.3, -0.2), &kern, 0.0).unwrap();
        assert_eq!(l, Complex64::new(0.0, 0.0));
        let r = stability_scan(-4..=4, 0.0, &p, &Interaction::Zero, &ScanSpec::for_profile(&p)).unwrap();
        assert_eq!(r.kappa, 1.0);
    }

    #[test]
    fn static_limit_is_gaussian_moment() {
        let vth = 0.7;
        let p = VelocityProfile::maxwellian(vth).unwrap();
        let kern = VolterraKernel::new(&p, &Interaction::power_law(2.0, 1.0, Sign::Repulsive), 1, 0.0).unwrap();
        let s = Simpson { initial_panels: 512, ..Simpson::default() };
        let moment = s.integrate(|t| p.fourier_1d(t).re * t, 0.0, 10.0);
        let oracle = -0.5 * moment;
        assert!((oracle + 0.5 / (4.0 * PI * PI * vth * vth)).abs() < 1e-12);
        for method in [DispersionMethod::Quadrature, DispersionMethod::ClosedForm] {
            let l = dispersion_l_with(Complex64::new(0.0, 0.0), &kern, 0.0, method).unwrap();
            assert!((l.re - oracle).abs() < 1e-10 * oracle.abs() && l.im.abs() < 1e-12, "{method:?}: {l}");
        }
    }

    #[test]
    fn closed_form_agrees_with_quadrature() {
        let p = VelocityProfile::mixture(&[(0.6, -0.3, 0.4), (0.4, 0.5, 0.25)]).unwrap();
        let w = Interaction::power_law(2.0, 0.8, Sign::Attractive);
        for &k in &[1, -2, 3] {
            let kern = VolterraKernel::new(&p, &w, k, 0.05).unwrap();
            for &(a, b) in &[(0.0, 0.0), (0.4, -0.1), (-0.7, -0.5), (1.3, -0.02), (0.2, 0.05)] {
                let eta = Complex64::new(a, b);
                for lw in [0.0, 0.02] {
                    let q = dispersion_l_with(eta, &kern, lw, DispersionMethod::Quadrature).unwrap();
                    let c = dispersion_l_with(eta, &kern, lw, DispersionMethod::ClosedForm).unwrap();
                    assert!((q - c).norm() < 1e-9 * c.norm().max(1e-3), "k {k} eta {eta}: {q} vs {c}");
                }
            }
        }
    }

    #[test]
    fn decays_deep_in_lower_half_plane() {
        let kern = landau(0.0);
        let mut last = f64::INFINITY;
        for &b in &[0.5, 1.0, 2.0, 4.0, 8.0] {
            let l = dispersion_l(Complex64::new(0.1, -b), &kern, 0.0).unwrap().norm();
            assert!(l < last);
            last = l;
        }
        assert!(last < 1e-2);
    }

    #[test]
    fn landau_root_matches_mpmath() {
        // roots of 1 - L found independently with mpmath.findroot
        for (nu, rate) in [(0.0, -0.108443), (0.01, -0.115277)] {
            let kern = landau(nu);
            let r = least_damped_root(&kern, 0.45, 0.1).unwrap();
            assert!((r.rate - rate).abs() < 2e-6, "nu {nu}: {r:?}");
        }
    }

    #[test]
    fn penrose_stable_scan() {
        let p = VelocityProfile::maxwellian(0.05627).unwrap();
        let w = Interaction::power_law(2.0, 1.0, Sign::Repulsive);
        let r = stability_scan(-16..=16, 0.0, &p, &w, &ScanSpec::for_profile(&p)).unwrap();
        assert!(r.kappa > 0.0 && r.kappa <= 1.0);
        assert!(r.per_mode.iter().any(|m| m.analytic));
    }

    #[test]
    fn attractive_instability_detected() {
        let p = VelocityProfile::maxwellian(0.1).unwrap();
        let w = Interaction::power_law(2.0, 1.0, Sign::Attractive);
        let r = stability_scan(-3..=3, 0.0, &p, &w, &ScanSpec::for_profile(&p));
        match r {
            Err(Error::MarginNonPositive { k, im, .. }) => {
                assert_eq!(k.abs(), 1);
                assert!(im < 0.0);
            }
            other => panic!("expected instability, got {other:?}"),
        }
    }
}
