//! Forced free streaming of a single Fourier wave `E = Re E₁e^{i(kx−ωt)}`
//! with `E₁ = 1`, `q = m = 1`, evaluated at `x = 0`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::profiles::VelocityProfile;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FreeStreamingResponse {
    /// Collisionless response after time `s = t − t₀`.
    pub collisionless: Complex64,
    /// Response with the Krook damping factor `νe^{−νs}`.
    pub collisional: Complex64,
    /// Average of `collisional` over `s ∈ (0,∞)`: the `1/(ω − kv + iν)` form.
    pub averaged: Complex64,
}

/// `(1 − e^{iδs})/δ`, continuous through `δ = 0` where it equals `−is`.
pub fn resonance_factor(delta: f64, s: f64) -> Complex64 {
    let x = delta * s;
    if x.abs() < 1e-8 {
        return Complex64::new(0.5 * delta * s * s, -s);
    }
    let half = (0.5 * x).sin();
    Complex64::new(2.0 * half * half, -x.sin()) / delta
}

fn prefactor(omega: f64, v: f64, t: f64, profile: &VelocityProfile) -> Complex64 {
    -Complex64::i() * profile.derivative_1d(v) * Complex64::from_polar(1.0, -omega * t)
}

pub fn free_streaming_response(
    omega: f64,
    k: f64,
    v: f64,
    nu: f64,
    t0: f64,
    t: f64,
    profile: &VelocityProfile,
) -> Result<FreeStreamingResponse> {
    if k == 0.0 {
        return Err(Error::InvalidArgument("free streaming needs k != 0".into()));
    }
    let delta = omega - k * v;
    let s = t - t0;
    let pre = prefactor(omega, v, t, profile);
    let r = resonance_factor(delta, s);
    Ok(FreeStreamingResponse {
        collisionless: pre * r,
        collisional: pre * nu * (-nu * s).exp() * r,
        averaged: pre / Complex64::new(delta, nu),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Simpson;

    #[test]
    fn resonant_growth_is_linear() {
        let p = VelocityProfile::maxwellian(1.0).unwrap();
        let a = free_streaming_response(0.5, 1.0, 0.5, 0.0, 0.0, 10.0, &p).unwrap();
        let b = free_streaming_response(0.5, 1.0, 0.5, 0.0, 0.0, 20.0, &p).unwrap();
        assert!((b.collisionless.norm() / a.collisionless.norm() - 2.0).abs() < 1e-14);
        assert_eq!(a.collisional, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn resonance_factor_is_continuous() {
        for &s in &[0.5, 3.0, 40.0] {
            let at = resonance_factor(0.0, s);
            let near = resonance_factor(1e-10, s);
            assert!((at - near).norm() < 1e-8 * s);
            let naive = (1.0 - Complex64::from_polar(1.0, 0.3 * s)) / 0.3;
            assert!((resonance_factor(0.3, s) - naive).norm() < 1e-14);
        }
    }

    #[test]
    fn averaged_response_is_collisional_mean() {
        let p = VelocityProfile::maxwellian(1.0).unwrap();
        let (omega, k, v, nu) = (1.1, 0.8, 0.6, 0.2);
        let t = 3.0;
        let s_end = 40.0 / nu;
        let simpson = Simpson { initial_panels: 4096, rel_tol: 1e-12, ..Simpson::default() };
        let quad = simpson.integrate_complex(
            |s| free_streaming_response(omega, k, v, nu, t - s, t, &p).unwrap().collisional,
            0.0,
            s_end,
        );
        let closed = free_streaming_response(omega, k, v, nu, 0.0, t, &p).unwrap().averaged;
        assert!((quad - closed).norm() < 1e-9 * closed.norm());
    }

    #[test]
    fn resonance_modulus_scales_inverse_nu() {
        let p = VelocityProfile::maxwellian(1.0).unwrap();
        let base = free_streaming_response(0.7, 1.0, 0.7, 1.0, 0.0, 1.0, &p).unwrap().averaged.norm();
        for &nu in &[0.1, 0.01, 1e-4] {
            let r = free_streaming_response(0.7, 1.0, 0.7, nu, 0.0, 1.0, &p).unwrap().averaged.norm();
            assert!((r * nu - base).abs() < 1e-14 * base);
        }
    }
}
