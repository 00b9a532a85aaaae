use num_complex::Complex64;
use serde::Serialize;

use super::kernel::VolterraKernel;
use crate::error::{Error, Result};
use crate::profiles::VelocityProfile;

/// Largest admissible `dt·|k|·velocity_scale`.
pub const RESOLUTION_LIMIT: f64 = 0.25;

/// `ρ̂(t,k)` on the uniform grid `t_j = jΔt`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityHistory {
    pub k: i64,
    pub dt: f64,
    pub rho_hat: Vec<Complex64>,
    pub method: &'static str,
}

impl DensityHistory {
    pub fn len(&self) -> usize {
        self.rho_hat.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho_hat.is_empty()
    }

    pub fn time(&self, j: usize) -> f64 {
        j as f64 * self.dt
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|j| self.time(j)).collect()
    }

    pub fn t_end(&self) -> f64 {
        self.time(self.len().saturating_sub(1))
    }

    pub fn abs(&self) -> Vec<f64> {
        self.rho_hat.iter().map(|z| z.norm()).collect()
    }

    /// Grid index of `t`, if `t` lies on the grid.
    pub fn index_of(&self, t: f64) -> Result<usize> {
        let x = t / self.dt;
        let j = x.round();
        if j < 0.0 || j as usize >= self.len() {
            return Err(Error::OutOfHistory { t, start: 0.0, end: self.t_end() });
        }
        if (x - j).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!("t = {t} is not on the history grid")));
        }
        Ok(j as usize)
    }
}

/// Marches `ρ̂(t) = e^{-νt}f̂₀(k,kt) + ∫₀ᵗ K_ν(t−s,k)ρ̂(s) ds` with the
/// trapezoidal product rule; the diagonal term is solved implicitly.
pub fn volterra_solve<F>(
    k: i64,
    f0_trace: F,
    kern: &mut VolterraKernel,
    t_end: f64,
    dt: f64,
) -> Result<DensityHistory>
where
    F: Fn(f64) -> Complex64,
{
    if kern.k() != k {
        return Err(Error::InvalidArgument(format!(
            "kernel built for k = {}, solving k = {k}",
            kern.k()
        )));
    }
    if !(dt > 0.0) || !(t_end >= 0.0) {
        return Err(Error::InvalidArgument(format!("need dt > 0 and T >= 0, got {dt}, {t_end}")));
    }
    let res = kern.resolution(dt);
    if res >= RESOLUTION_LIMIT {
        return Err(Error::StepTooCoarse { value: res, limit: RESOLUTION_LIMIT });
    }
    let n = (t_end / dt).round() as usize;
    kern.sample(dt, n);
    let (_, kv) = kern.samples().expect("sampled above");
    let nu = kern.nu();
    let diag = 1.0 - 0.5 * dt * kv[0];
    let mut rho: Vec<Complex64> = Vec::with_capacity(n + 1);
    rho.push(f0_trace(0.0));
    for i in 1..=n {
        let t = i as f64 * dt;
        let mut acc = 0.5 * kv[i] * rho[0];
        for j in 1..i {
            acc += kv[i - j] * rho[j];
        }
        let source = (-nu * t).exp() * f0_trace(t);
        rho.push((source + dt * acc) / diag);
    }
    Ok(DensityHistory { k, dt, rho_hat: rho, method: "trapezoidal product integration" })
}

/// Duhamel reconstruction of `f̂(t,k,ξ)` from a density history using the
/// solver's own trapezoidal weights. `f0_hat(η)` is `f̂₀(k,η)`.
pub fn mode_reconstruct<F>(
    hist: &DensityHistory,
    xi: f64,
    t: f64,
    kern: &VolterraKernel,
    f0_hat: F,
) -> Result<Complex64>
where
    F: Fn(f64) -> Complex64,
{
    let n = hist.index_of(t)?;
    let k = kern.k() as f64;
    let nu = kern.nu();
    let w = kern.w_hat();
    let profile = kern.profile();
    let dt = hist.dt;
    let t = n as f64 * dt;
    let integrand = |j: usize| {
        let lag = t - j as f64 * dt;
        let eta = xi + k * lag;
        (-nu * lag).exp() * (nu - k * eta * w) * profile.fourier_1d(eta) * hist.rho_hat[j]
    };
    let mut acc = Complex64::new(0.0, 0.0);
    if n > 0 {
        acc += 0.5 * (integrand(0) + integrand(n));
        for j in 1..n {
            acc += integrand(j);
        }
    }
    Ok((-nu * t).exp() * f0_hat(xi + k * t) + dt * acc)
}

/// Exact `k = 0` solution: the density mode is conserved and the velocity
/// profile relaxes towards `ρ̂(0)f̂⁰`.
pub struct ZeroMode<'a, F> {
    pub rho0: Complex64,
    nu: f64,
    t: f64,
    f0_hat: F,
    profile: &'a VelocityProfile,
}

impl<F: Fn(f64) -> Complex64> ZeroMode<'_, F> {
    /// `f̂(t,0,ξ) = e^{-νt}f̂₀(0,ξ) + (1 − e^{-νt})ρ̂(0)f̂⁰(ξ)`.
    pub fn fhat(&self, xi: f64) -> Complex64 {
        let decay = (-self.nu * self.t).exp();
        decay * (self.f0_hat)(xi) + (-(-self.nu * self.t).exp_m1()) * self.rho0 * self.profile.fourier_1d(xi)
    }
}

pub fn zero_mode<F>(f0_hat_at_k0: F, profile: &VelocityProfile, nu: f64, t: f64) -> Result<ZeroMode<'_, F>>
where
    F: Fn(f64) -> Complex64,
{
    if !(t >= 0.0) || !(nu >= 0.0) {
        return Err(Error::InvalidArgument(format!("need t >= 0 and nu >= 0, got {t}, {nu}")));
    }
    Ok(ZeroMode { rho0: f0_hat_at_k0(0.0), nu, t, f0_hat: f0_hat_at_k0, profile })
}
