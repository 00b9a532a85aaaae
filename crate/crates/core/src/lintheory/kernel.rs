use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::profiles::{Interaction, VelocityProfile};

/// Memory kernel `K_ν(t,k) = e^{-νt}(ν − Ŵ(k)|k|²t) f̂⁰(kt)` of the
/// density equation for one spatial mode.
#[derive(Debug, Clone)]
pub struct VolterraKernel {
    nu: f64,
    k: i64,
    w_hat: f64,
    profile: VelocityProfile,
    sampling: Option<(f64, Vec<Complex64>)>,
}

impl VolterraKernel {
    pub fn new(profile: &VelocityProfile, interaction: &Interaction, k: i64, nu: f64) -> Result<Self> {
        if profile.dimension() != 1 {
            return Err(Error::InvalidArgument("kernel requires a one-dimensional profile".into()));
        }
        if !(nu >= 0.0 && nu.is_finite()) {
            return Err(Error::InvalidArgument(format!("nu must be non-negative, got {nu}")));
        }
        Ok(Self {
            nu,
            k,
            w_hat: interaction.hat_1d(k)?,
            profile: profile.clone(),
            sampling: None,
        })
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn k(&self) -> i64 {
        self.k
    }

    pub fn w_hat(&self) -> f64 {
        self.w_hat
    }

    pub fn profile(&self) -> &VelocityProfile {
        &self.profile
    }

    /// Collision part `K⁰_ν`.
    pub fn k0(&self, t: f64) -> Complex64 {
        let k = self.k as f64;
        (-self.nu * t).exp() * self.nu * self.profile.fourier_1d(k * t)
    }

    /// Field part `K¹_ν`.
    pub fn k1(&self, t: f64) -> Complex64 {
        let k = self.k as f64;
        -(-self.nu * t).exp() * self.w_hat * k * k * t * self.profile.fourier_1d(k * t)
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        let k = self.k as f64;
        (-self.nu * t).exp() * (self.nu - self.w_hat * k * k * t) * self.profile.fourier_1d(k * t)
    }

    /// Caches `K(jΔt)` for `j = 0..=n`.
    pub fn sample(&mut self, dt: f64, n: usize) {
        if let Some((d, v)) = &self.sampling {
            if *d == dt && v.len() > n {
                return;
            }
        }
        let v = (0..=n).map(|j| self.eval(j as f64 * dt)).collect();
        self.sampling = Some((dt, v));
    }

    pub fn samples(&self) -> Option<(f64, &[Complex64])> {
        self.sampling.as_ref().map(|(d, v)| (*d, v.as_slice()))
    }

    /// Largest `dt·|k|·(|c|+v_th)`; the kernel oscillates on this scale.
    pub fn resolution(&self, dt: f64) -> f64 {
        dt * self.k.unsigned_abs() as f64 * self.profile.velocity_scale()
    }
}

pub fn kernel_eval(kern: &VolterraKernel, t: f64) -> Complex64 {
    kern.eval(t)
}
