use serde::Serialize;

use num_complex::Complex64;

use super::kernel::{echo_kernel, EchoKernelSpec};
use crate::error::{Error, Result};
use crate::lintheory::{DensityHistory, VolterraKernel};

/// Constants of the growth-control estimate. `c_fit` and `c_crude` stand for the
/// unspecified numeric constants of the envelope and of the crude Grönwall
/// bound; both are fixed by calibration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthParams {
    /// Source bound `A`.
    pub a: f64,
    pub c0: f64,
    pub m: f64,
    /// Strength `c` of the echo kernel term.
    pub c: f64,
    pub kappa: f64,
    /// Exponent of the `e^{νt}` envelope.
    pub nu_env: f64,
    pub lambda0: f64,
    pub lambda: f64,
    /// Profile constant `C₀` with `|f̂⁰(η)| ≤ C₀e^{−2πλ₀|η|}`.
    pub profile_c0: f64,
    pub c_w: f64,
    pub c_fit: f64,
    pub c_crude: f64,
}

impl GrowthParams {
    fn validate(&self, alpha: f64) -> Result<()> {
        if !(self.kappa > 0.0) {
            return Err(Error::UnstableConfiguration { kappa: self.kappa });
        }
        let bad = |what: &str| Err(Error::InvalidArgument(what.to_string()));
        if !(self.a >= 0.0 && self.c0 >= 0.0 && self.c >= 0.0) {
            return bad("A, c0 and c must be non-negative");
        }
        if !(self.m > 1.0) {
            return bad("m must exceed 1");
        }
        if !(self.nu_env > 0.0 && self.nu_env < alpha) {
            return bad("nu_env must lie in (0, alpha)");
        }
        if !(self.c_fit > 0.0) {
            return bad("c_fit must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnvelopeReport {
    pub t_star: f64,
    pub c_fit: f64,
    pub gamma: f64,
    pub alpha: f64,
    pub params: GrowthParams,
    prefactor: f64,
}

impl EnvelopeReport {
    pub fn envelope(&self, t: f64) -> f64 {
        self.prefactor * (self.params.nu_env * t).exp()
    }
}

/// Switch time `T_ν` and the time-independent envelope prefactor.
pub fn envelope_report(params: &GrowthParams, gamma: f64, alpha: f64) -> Result<EnvelopeReport> {
    params.validate(alpha)?;
    if !(gamma > 1.0) {
        return Err(Error::InvalidArgument(format!("gamma must exceed 1 (got {gamma})")));
    }
    let p = params;
    let (nu, cf) = (p.nu_env, p.c_fit);
    let e = 1.0 / (gamma - 1.0);
    let t_star = cf
        * (p.c * p.c * nu.powf(2.0 + gamma) / alpha.powi(5))
            .powf(e)
            .max((p.c * nu.powf(0.5 + gamma) / (alpha * alpha)).powf(e))
            .max((p.c0 * p.c0 / nu).powf(1.0 / (2.0 * p.m - 1.0)));
    let prefactor = cf * p.a * (1.0 + p.c0 * p.c0) / nu.sqrt()
        * (cf * p.c0).exp()
        * (1.0 + p.c / (alpha * nu))
        * (cf * t_star).exp()
        * (cf * p.c * (1.0 + t_star * t_star)).exp();
    Ok(EnvelopeReport { t_star, c_fit: cf, gamma, alpha, params: *p, prefactor })
}

/// `C A (1+c₀²)/√ν e^{Cc₀} (1+c/(αν)) e^{CT} e^{Cc(1+T²)} e^{νt}` with `C = c_fit`.
pub fn growth_envelope(params: &GrowthParams, gamma: f64, alpha: f64, t: f64) -> Result<f64> {
    Ok(envelope_report(params, gamma, alpha)?.envelope(t))
}

/// Envelope for a kernel sum `Σ c_j K^{(α_j),1}`, with `c = Σc_j`,
/// `T = max{Σ c_j/α_j³ / ν², (c₀²/ν)^{1/(2m−1)}}` and `α = min α_j` in the
/// `c/(αν)` factor. `params.c` is ignored.
pub fn growth_envelope_sum(params: &GrowthParams, terms: &[(f64, f64)], t: f64) -> Result<f64> {
    if terms.is_empty() || terms.iter().any(|&(c, a)| !(c >= 0.0 && a > 0.0 && a < 1.0)) {
        return Err(Error::InvalidArgument("need at least one (c_j >= 0, alpha_j in (0,1)) pair".into()));
    }
    let alpha = terms.iter().map(|t| t.1).fold(f64::INFINITY, f64::min);
    let p = GrowthParams { c: terms.iter().map(|t| t.0).sum(), ..*params };
    p.validate(alpha)?;
    let nu = p.nu_env;
    let t_big = (terms.iter().map(|&(c, a)| c / a.powi(3)).sum::<f64>() / (nu * nu))
        .max((p.c0 * p.c0 / nu).powf(1.0 / (2.0 * p.m - 1.0)));
    let cf = p.c_fit;
    Ok(cf * p.a * (1.0 + p.c0 * p.c0) / nu.sqrt()
        * (cf * p.c0).exp()
        * (1.0 + p.c / (alpha * nu))
        * (cf * t_big).exp()
        * (cf * p.c * (1.0 + t_big * t_big)).exp()
        * (nu * t).exp())
}

/// Grönwall bound `2A exp(C(C₀C_W t/(λ₀−λ) + c(t+t²) + c₀/(m−1)))` with `C = c_crude`.
pub fn crude_bound(params: &GrowthParams, t: f64) -> Result<f64> {
    let p = params;
    if !(p.lambda0 > p.lambda) || !(p.m > 1.0) || !(p.c_crude > 0.0) {
        return Err(Error::InvalidArgument("crude bound needs lambda0 > lambda, m > 1, c_crude > 0".into()));
    }
    let expo = p.profile_c0 * p.c_w * t / (p.lambda0 - p.lambda) + p.c * (t + t * t) + p.c0 / (p.m - 1.0);
    Ok(2.0 * p.a * (p.c_crude * expo).exp())
}

/// Weighted series on the uniform grid `t_j = j·dt`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthData {
    pub dt: f64,
    /// Collision rate in the `e^{−ν(t−s)}` memory factor.
    pub nu: f64,
    /// `φ(t_j)`.
    pub phi: Vec<f64>,
    /// Left side of the hypothesis at `t_j`.
    pub residual: Vec<f64>,
    /// Convolution kernel `K₀(τ_j)`, without the `e^{−ντ}` factor.
    pub k0: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub hypothesis_holds: bool,
    /// Largest `lhs/rhs` of the hypothesis and where it occurs.
    pub hypothesis_ratio: f64,
    pub hypothesis_t: f64,
    pub crude_ratio: f64,
    pub crude_t: f64,
    pub envelope_ratio: f64,
    pub envelope_t: f64,
    /// `sup_t ∫₀ᵗ e^{−ν(t−s)}K₀(t−s) ds`; the crude bound assumes at most 1/2.
    pub k0_mass: f64,
    pub t_star: f64,
    pub passed: bool,
}

const HYPOTHESIS_TOL: f64 = 1e-9;

fn check_data(data: &GrowthData) -> Result<usize> {
    let n = data.phi.len();
    if n == 0 || data.residual.len() != n || data.k0.len() < n || !(data.dt > 0.0) {
        return Err(Error::InvalidArgument("phi, residual and k0 must share a non-empty uniform grid".into()));
    }
    Ok(n)
}

/// Pointwise check of the growth hypothesis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HypothesisReport {
    /// Largest `lhs/rhs` and where it occurs.
    pub ratio: f64,
    pub t: f64,
    /// `sup_t ∫₀ᵗ e^{−ν(t−s)}K₀(t−s) ds`; the crude bound assumes at most 1/2.
    pub k0_mass: f64,
}

/// Checks `lhs(t) ≤ A + ∫₀ᵗ e^{−ν(t−s)}(K₀ + c·K^{(α),γ} + c₀/(1+s)^m)φ(s) ds`
/// on the grid with trapezoidal weights. Only `a`, `c`, `c0` and `m` of
/// `params` enter.
pub fn growth_hypothesis(data: &GrowthData, echo: &EchoKernelSpec, params: &GrowthParams) -> Result<HypothesisReport> {
    let n = check_data(data)?;
    let dt = data.dt;
    let damp: Vec<f64> = (0..n).map(|j| (-data.nu * dt * j as f64).exp()).collect();
    let mut rep = HypothesisReport { ratio: 0.0, t: 0.0, k0_mass: 0.0 };
    for i in 0..n {
        let t = dt * i as f64;
        let mut conv = 0.0;
        let mut mass = 0.0;
        for j in 0..=i {
            let w = if j == 0 || j == i { 0.5 * dt } else { dt };
            let w = if i == 0 { 0.0 } else { w };
            let s = dt * j as f64;
            let k0 = damp[i - j] * data.k0[i - j];
            let k1 = if params.c > 0.0 && t > 0.0 { params.c * damp[i - j] * echo_kernel(echo, t, s) } else { 0.0 };
            let alg = damp[i - j] * params.c0 / (1.0 + s).powf(params.m);
            conv += w * (k0 + k1 + alg) * data.phi[j];
            mass += w * k0;
        }
        rep.k0_mass = rep.k0_mass.max(mass);
        let rhs = params.a + conv;
        let lhs = data.residual[i];
        let ratio = if rhs > 0.0 { lhs / rhs } else if lhs > 0.0 { f64::INFINITY } else { 0.0 };
        if ratio > rep.ratio {
            rep.ratio = ratio;
            rep.t = t;
        }
        if lhs > rhs * (1.0 + HYPOTHESIS_TOL) + 1e-300 {
            return Err(Error::InequalityViolated { t, lhs, rhs });
        }
    }
    Ok(rep)
}

/// Worst `φ/bound` for the envelope and the crude bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundsReport {
    pub envelope_ratio: f64,
    pub envelope_t: f64,
    pub crude_ratio: f64,
    pub crude_t: f64,
    pub t_star: f64,
}

/// Compares `φ` with the envelope and the crude Grönwall bound; raises
/// [`Error::EnvelopeExceeded`] at the first crossing.
pub fn growth_bounds(data: &GrowthData, echo: &EchoKernelSpec, params: &GrowthParams) -> Result<BoundsReport> {
    check_data(data)?;
    let env = envelope_report(params, echo.gamma, echo.alpha)?;
    let mut rep = BoundsReport { envelope_ratio: 0.0, envelope_t: 0.0, crude_ratio: 0.0, crude_t: 0.0, t_star: env.t_star };
    for (i, &phi) in data.phi.iter().enumerate() {
        let t = data.dt * i as f64;
        let e = env.envelope(t);
        if phi / e > rep.envelope_ratio {
            rep.envelope_ratio = phi / e;
            rep.envelope_t = t;
        }
        if phi > e {
            return Err(Error::EnvelopeExceeded { t, value: phi, envelope: e });
        }
        let cb = crude_bound(params, t)?;
        if phi / cb > rep.crude_ratio {
            rep.crude_ratio = phi / cb;
            rep.crude_t = t;
        }
        if phi > cb {
            return Err(Error::EnvelopeExceeded { t, value: phi, envelope: cb });
        }
    }
    Ok(rep)
}

/// [`growth_hypothesis`] followed by [`growth_bounds`]. `K₁ = c·K^{(α),γ}`
/// with `α, γ` from `echo`.
pub fn growth_verify(data: &GrowthData, echo: &EchoKernelSpec, params: &GrowthParams) -> Result<VerifyReport> {
    // constants are validated before the quadratic-cost hypothesis check
    envelope_report(params, echo.gamma, echo.alpha)?;
    let h = growth_hypothesis(data, echo, params)?;
    let b = growth_bounds(data, echo, params)?;
    Ok(VerifyReport {
        hypothesis_holds: true,
        hypothesis_ratio: h.ratio,
        hypothesis_t: h.t,
        crude_ratio: b.crude_ratio,
        crude_t: b.crude_t,
        envelope_ratio: b.envelope_ratio,
        envelope_t: b.envelope_t,
        k0_mass: h.k0_mass,
        t_star: b.t_star,
        passed: true,
    })
}

/// Assembles the weighted series of a family of Volterra solutions with a
/// common grid and collision rate. `source(k, t)` is `f̂₀(k, kt)`; the
/// residual subtracts the field part of the memory term with the solver's
/// own weights. Returns the data and the source bound `A`.
pub fn volterra_growth_data<F>(
    hists: &[DensityHistory],
    kerns: &[VolterraKernel],
    source: F,
    lambda: f64,
    mu: f64,
) -> Result<(GrowthData, f64)>
where
    F: Fn(i64, f64) -> Complex64,
{
    if hists.is_empty() || hists.len() != kerns.len() {
        return Err(Error::InvalidArgument("need one kernel per density history".into()));
    }
    let (dt, n, nu) = (hists[0].dt, hists[0].len(), kerns[0].nu());
    if hists.iter().any(|h| h.dt != dt || h.len() != n) || kerns.iter().any(|k| k.nu() != nu) {
        return Err(Error::InvalidArgument("histories must share grid and collision rate".into()));
    }
    let weight = |k: i64, t: f64| (2.0 * std::f64::consts::PI * (lambda * t + mu) * k.unsigned_abs() as f64).exp();
    let mut phi = vec![0.0; n];
    let mut residual = vec![0.0; n];
    let mut k0 = vec![0.0f64; n];
    let mut a: f64 = 0.0;
    let mut src = vec![0.0; n];
    for (h, kern) in hists.iter().zip(kerns) {
        if h.k != kern.k() {
            return Err(Error::InvalidArgument(format!("history k = {} vs kernel k = {}", h.k, kern.k())));
        }
        let k = h.k;
        let k1: Vec<Complex64> = (0..n).map(|j| kern.k1(dt * j as f64)).collect();
        for i in 0..n {
            let t = dt * i as f64;
            let w = weight(k, t);
            phi[i] += h.rho_hat[i].norm() * w;
            src[i] += (-nu * t).exp() * source(k, t).norm() * w;
            let mut acc = Complex64::new(0.0, 0.0);
            if i > 0 {
                acc += 0.5 * (k1[i] * h.rho_hat[0] + k1[0] * h.rho_hat[i]);
                for j in 1..i {
                    acc += k1[i - j] * h.rho_hat[j];
                }
            }
            residual[i] += (h.rho_hat[i] - dt * acc).norm() * w;
            // K₀(τ) = ν sup_k |f̂⁰(kτ)| e^{2πλ|k|τ}
            let kf = k as f64;
            let c = nu * kern.profile().fourier_1d(kf * t).norm() * weight(k, t) / weight(k, 0.0);
            k0[i] = k0[i].max(c);
        }
    }
    for v in &src {
        a = a.max(*v);
    }
    Ok((GrowthData { dt, nu, phi, residual, k0 }, a))
}

/// Smallest `C` in `[lo, hi]` with `ok(C)`, by bisection in `log C`;
/// `ok` must be monotone. `None` if even `hi` fails.
pub fn calibrate_constant<F: Fn(f64) -> bool>(ok: F, lo: f64, hi: f64) -> Option<f64> {
    if !ok(hi) {
        return None;
    }
    if ok(lo) {
        return Some(lo);
    }
    let (mut a, mut b) = (lo.ln(), hi.ln());
    while b - a > 1e-10 {
        let m = 0.5 * (a + b);
        if ok(m.exp()) {
            b = m;
        } else {
            a = m;
        }
    }
    Some(b.exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> GrowthParams {
        GrowthParams {
            a: 1.0,
            c0: 0.0,
            m: 2.0,
            c: 0.0,
            kappa: 0.5,
            nu_env: 0.05,
            lambda0: 0.5,
            lambda: 0.1,
            profile_c0: 0.0,
            c_w: 0.0,
            c_fit: 1.5,
            c_crude: 1.0,
        }
    }

    #[test]
    fn envelope_reduces_without_kernels() {
        let p = params();
        for &t in &[0.0, 3.0, 10.0] {
            let v = growth_envelope(&p, 2.0, 0.2, t).unwrap();
            let expected = 1.5 / 0.05f64.sqrt() * (0.05 * t).exp();
            assert!((v - expected).abs() < 1e-13 * expected);
        }
    }

    #[test]
    fn envelope_monotone() {
        let base = GrowthParams { c: 0.01, c0: 0.2, ..params() };
        let e0 = growth_envelope(&base, 2.0, 0.2, 5.0).unwrap();
        for p in [
            GrowthParams { a: 2.0, ..base },
            GrowthParams { c: 0.02, ..base },
            GrowthParams { c0: 0.3, ..base },
            GrowthParams { nu_env: 0.025, ..base },
        ] {
            assert!(growth_envelope(&p, 2.0, 0.2, 5.0).unwrap() > e0);
        }
        assert!(growth_envelope(&base, 2.0, 0.2, 0.0).unwrap() >= base.a);
    }

    #[test]
    fn unstable_rejected() {
        let p = GrowthParams { kappa: 0.0, ..params() };
        assert!(matches!(growth_envelope(&p, 2.0, 0.2, 1.0), Err(Error::UnstableConfiguration { .. })));
    }

    #[test]
    fn constant_phi_passes() {
        let p = params();
        let n = 50;
        let data = GrowthData { dt: 0.1, nu: 0.0, phi: vec![1.0; n], residual: vec![1.0; n], k0: vec![0.0; n] };
        let spec = EchoKernelSpec::new(0.2, 2.0).unwrap();
        let rep = growth_verify(&data, &spec, &p).unwrap();
        assert!((crude_bound(&p, 3.0).unwrap() - 2.0).abs() < 1e-15);
        assert!((rep.crude_ratio - 0.5).abs() < 1e-15);
    }

    #[test]
    fn negative_control() {
        let p = params();
        let spec = EchoKernelSpec::new(0.2, 2.0).unwrap();
        let env = envelope_report(&p, 2.0, 0.2).unwrap();
        let n = 40;
        let phi: Vec<f64> = (0..n).map(|i| 1.01 * env.envelope(0.1 * i as f64)).collect();
        let data = GrowthData { dt: 0.1, nu: 0.0, phi, residual: vec![0.0; n], k0: vec![0.0; n] };
        assert!(matches!(growth_verify(&data, &spec, &p), Err(Error::EnvelopeExceeded { .. })));
    }

    #[test]
    fn hypothesis_violation() {
        let p = params();
        let spec = EchoKernelSpec::new(0.2, 2.0).unwrap();
        let data = GrowthData { dt: 0.1, nu: 0.0, phi: vec![1.0; 3], residual: vec![1.0, 1.0, 1.5], k0: vec![0.0; 3] };
        assert!(matches!(growth_verify(&data, &spec, &p), Err(Error::InequalityViolated { .. })));
    }

    #[test]
    fn volterra_series_satisfy_hypothesis() {
        use crate::lintheory::volterra_solve;
        use crate::profiles::{Interaction, Sign, VelocityProfile};
        let prof = VelocityProfile::maxwellian(0.2).unwrap();
        let inter = Interaction::power_law(2.0, 1.0, Sign::Repulsive);
        let nu = 0.05;
        let mut hists = Vec::new();
        let mut kerns = Vec::new();
        for k in [-2i64, -1, 1, 2] {
            let mut kern = VolterraKernel::new(&prof, &inter, k, nu).unwrap();
            let src = |t: f64| 0.01 * prof.fourier_1d(k as f64 * t);
            hists.push(volterra_solve(k, src, &mut kern, 20.0, 0.02).unwrap());
            kerns.push(kern);
        }
        let (data, a) =
            volterra_growth_data(&hists, &kerns, |k, t| 0.01 * prof.fourier_1d(k as f64 * t), 0.01, 0.0).unwrap();
        assert!((data.residual[0] - data.phi[0]).abs() < 1e-15);
        let p = GrowthParams { a, nu_env: 0.1, c_fit: 50.0, c_crude: 50.0, ..params() };
        let spec = EchoKernelSpec::new(0.2, 2.0).unwrap();
        let rep = growth_verify(&data, &spec, &p).unwrap();
        assert!(rep.hypothesis_holds && rep.hypothesis_ratio <= 1.0 + 1e-9);
        assert!(rep.k0_mass < 0.5);
    }

    #[test]
    fn bisection_finds_threshold() {
        let c = calibrate_constant(|c| c * c >= 2.0, 1e-3, 1e3).unwrap();
        assert!((c - 2f64.sqrt()).abs() < 1e-8);
        assert!(calibrate_constant(|c| c > 1e4, 1e-3, 1e3).is_none());
    }
}
