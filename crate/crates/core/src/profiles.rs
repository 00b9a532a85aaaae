//! Analytic velocity equilibria and interaction potentials.
//!
//! Fourier convention throughout the crate: `f̂(k, η) = ∫∫ f e^{-2πi(k·x + η·v)} dx dv`
//! on `T^d × R^d` with `T = R/Z`. Under it a centered Maxwellian of thermal
//! speed `σ` has `f̂⁰(η) = e^{-2π²σ²|η|²}` and `f̂⁰(0) = 1`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::Simpson;

/// One Gaussian component of a velocity profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxwellianComponent {
    pub weight: f64,
    /// Drift velocity, one entry per dimension.
    pub center: Vec<f64>,
    pub thermal_speed: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ProfileKind {
    Maxwellian { thermal_speed: f64 },
    SumOfMaxwellians(Vec<MaxwellianComponent>),
}

/// Spatially homogeneous equilibrium `f⁰(v)` with unit mass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VelocityProfile {
    kind: ProfileKind,
    dimension: usize,
}

impl VelocityProfile {
    pub fn maxwellian(thermal_speed: f64) -> Result<Self> {
        Self::new(ProfileKind::Maxwellian { thermal_speed }, 1)
    }

    /// One-dimensional mixture from `(weight, center, thermal_speed)` triples.
    pub fn mixture(components: &[(f64, f64, f64)]) -> Result<Self> {
        let comps = components
            .iter()
            .map(|&(weight, c, thermal_speed)| MaxwellianComponent {
                weight,
                center: vec![c],
                thermal_speed,
            })
            .collect();
        Self::new(ProfileKind::SumOfMaxwellians(comps), 1)
    }

    pub fn new(kind: ProfileKind, dimension: usize) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        match &kind {
            ProfileKind::Maxwellian { thermal_speed } => {
                if !(*thermal_speed > 0.0 && thermal_speed.is_finite()) {
                    return Err(Error::InvalidArgument(format!(
                        "thermal speed must be positive, got {thermal_speed}"
                    )));
                }
            }
            ProfileKind::SumOfMaxwellians(comps) => {
                if comps.is_empty() {
                    return Err(Error::InvalidArgument("empty Maxwellian mixture".into()));
                }
                let mut total = 0.0;
                for c in comps {
                    if !(c.weight > 0.0) {
                        return Err(Error::InvalidArgument(format!(
                            "mixture weights must be positive, got {}",
                            c.weight
                        )));
                    }
                    if !(c.thermal_speed > 0.0 && c.thermal_speed.is_finite()) {
                        return Err(Error::InvalidArgument(format!(
                            "thermal speed must be positive, got {}",
                            c.thermal_speed
                        )));
                    }
                    if c.center.len() != dimension {
                        return Err(Error::InvalidArgument(format!(
                            "center has {} entries, dimension is {dimension}",
                            c.center.len()
                        )));
                    }
                    total += c.weight;
                }
                if (total - 1.0).abs() > 1e-12 {
                    return Err(Error::InvalidArgument(format!(
                        "mixture weights sum to {total}, expected 1"
                    )));
                }
            }
        }
        Ok(Self { kind, dimension })
    }

    pub fn kind(&self) -> &ProfileKind {
        &self.kind
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Components as a uniform list; a plain Maxwellian is a single centered one.
    pub fn components(&self) -> Vec<MaxwellianComponent> {
        match &self.kind {
            ProfileKind::Maxwellian { thermal_speed } => vec![MaxwellianComponent {
                weight: 1.0,
                center: vec![0.0; self.dimension],
                thermal_speed: *thermal_speed,
            }],
            ProfileKind::SumOfMaxwellians(c) => c.clone(),
        }
    }

    pub fn min_thermal_speed(&self) -> f64 {
        self.components()
            .iter()
            .map(|c| c.thermal_speed)
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest `|center| + thermal_speed` over components; sets the
    /// oscillation scale of `f̂⁰(kt)` in time.
    pub fn velocity_scale(&self) -> f64 {
        self.components()
            .iter()
            .map(|c| c.center.iter().map(|x| x * x).sum::<f64>().sqrt() + c.thermal_speed)
            .fold(0.0, f64::max)
    }

    /// `f̂⁰(η)` in closed form.
    pub fn fourier(&self, eta: &[f64]) -> Complex64 {
        debug_assert_eq!(eta.len(), self.dimension);
        let eta2: f64 = eta.iter().map(|x| x * x).sum();
        match &self.kind {
            ProfileKind::Maxwellian { thermal_speed } => {
                Complex64::new((-2.0 * PI * PI * thermal_speed * thermal_speed * eta2).exp(), 0.0)
            }
            ProfileKind::SumOfMaxwellians(comps) => {
                let mut acc = Complex64::new(0.0, 0.0);
                for c in comps {
                    let phase: f64 = c.center.iter().zip(eta).map(|(a, b)| a * b).sum();
                    let mag = (-2.0 * PI * PI * c.thermal_speed * c.thermal_speed * eta2).exp();
                    acc += Complex64::from_polar(c.weight * mag, -2.0 * PI * phase);
                }
                acc
            }
        }
    }

    pub fn fourier_1d(&self, eta: f64) -> Complex64 {
        self.fourier(&[eta])
    }

    /// Pointwise `f⁰(v) ≥ 0`.
    pub fn sample(&self, v: &[f64]) -> f64 {
        debug_assert_eq!(v.len(), self.dimension);
        let d = self.dimension as f64;
        self.components()
            .iter()
            .map(|c| {
                let s2 = c.thermal_speed * c.thermal_speed;
                let r2: f64 = v.iter().zip(&c.center).map(|(a, b)| (a - b) * (a - b)).sum();
                c.weight * (2.0 * PI * s2).powf(-0.5 * d) * (-0.5 * r2 / s2).exp()
            })
            .sum()
    }

    pub fn sample_1d(&self, v: f64) -> f64 {
        self.sample(&[v])
    }

    /// `d f⁰/dv` for one-dimensional profiles.
    pub fn derivative_1d(&self, v: f64) -> f64 {
        self.components()
            .iter()
            .map(|c| {
                let s2 = c.thermal_speed * c.thermal_speed;
                let u = v - c.center[0];
                -c.weight * u / s2 * (2.0 * PI * s2).powf(-0.5) * (-0.5 * u * u / s2).exp()
            })
            .sum()
    }

    /// Upper bound on `Σ_n λⁿ/n! ‖∂ⁿ_v f⁰‖_{L¹}` for one-dimensional profiles,
    /// by the triangle inequality over components and quadrature of
    /// `∫|He_n(x)| φ(x) dx` for each order.
    pub fn derivative_series(&self, lambda: f64) -> f64 {
        let simpson = Simpson {
            initial_panels: 256,
            ..Simpson::default()
        };
        let mut moments: Vec<f64> = Vec::new();
        let mut total = 0.0;
        for c in self.components() {
            let ratio = lambda / c.thermal_speed;
            let mut sum = 0.0;
            let mut log_fact = 0.0f64;
            for n in 0..400usize {
                if n > 0 {
                    log_fact += (n as f64).ln();
                }
                if moments.len() <= n {
                    moments.push(simpson.integrate(
                        |x| hermite_prob(n, x).abs() * (-0.5 * x * x).exp() / (2.0 * PI).sqrt(),
                        -40.0,
                        40.0,
                    ));
                }
                let term = if ratio == 0.0 {
                    if n == 0 { moments[0] } else { 0.0 }
                } else {
                    (n as f64 * ratio.ln() - log_fact).exp() * moments[n]
                };
                sum += term;
                if n > 4 && term < 1e-16 * sum {
                    break;
                }
            }
            total += c.weight * sum;
        }
        total
    }
}

fn hermite_prob(n: usize, x: f64) -> f64 {
    let (mut h0, mut h1) = (1.0, x);
    if n == 0 {
        return h0;
    }
    for j in 1..n {
        let h2 = x * h1 - j as f64 * h0;
        h0 = h1;
        h1 = h2;
    }
    h1
}

pub fn profile_fourier(profile: &VelocityProfile, eta: &[f64]) -> Complex64 {
    profile.fourier(eta)
}

pub fn profile_sample(profile: &VelocityProfile, v: &[f64]) -> f64 {
    profile.sample(v)
}

/// Attractive or repulsive coupling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    Repulsive,
    Attractive,
}

impl Sign {
    pub fn factor(self) -> f64 {
        match self {
            Sign::Repulsive => 1.0,
            Sign::Attractive => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Interaction {
    /// `Ŵ(k) = sign · amplitude / (1 + |k|^γ)` for `k ≠ 0`.
    PowerLaw { gamma: f64, amplitude: f64, sign: Sign },
    Zero,
}

impl Interaction {
    pub fn power_law(gamma: f64, amplitude: f64, sign: Sign) -> Self {
        Interaction::PowerLaw { gamma, amplitude, sign }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Interaction::Zero => true,
            Interaction::PowerLaw { amplitude, .. } => *amplitude == 0.0,
        }
    }

    pub fn gamma(&self) -> Option<f64> {
        match self {
            Interaction::PowerLaw { gamma, .. } => Some(*gamma),
            Interaction::Zero => None,
        }
    }

    /// `sup_k |Ŵ(k)|(1+|k|^γ)`; the constant `C_W` of the decay hypothesis.
    pub fn decay_constant(&self) -> f64 {
        match self {
            Interaction::PowerLaw { amplitude, .. } => amplitude.abs(),
            Interaction::Zero => 0.0,
        }
    }

    /// Checks `γ > 1` and the decay bound for every mode.
    pub fn validate(&self) -> Result<()> {
        match self {
            Interaction::Zero => Ok(()),
            Interaction::PowerLaw { gamma, amplitude, .. } => {
                if !(*gamma > 1.0) {
                    return Err(Error::InvalidArgument(format!("gamma must exceed 1, got {gamma}")));
                }
                if amplitude.abs() > 1.0 {
                    return Err(Error::ConstraintViolation {
                        k: 1.0,
                        value: amplitude.abs() / 2.0,
                        bound: 0.5,
                    });
                }
                Ok(())
            }
        }
    }

    /// `Ŵ(k)` for an integer mode vector; `Ŵ(0) = 0`.
    pub fn hat(&self, k: &[i64]) -> Result<f64> {
        let norm = k.iter().map(|&x| (x * x) as f64).sum::<f64>().sqrt();
        self.hat_norm(norm)
    }

    pub fn hat_1d(&self, k: i64) -> Result<f64> {
        self.hat_norm(k.unsigned_abs() as f64)
    }

    fn hat_norm(&self, norm: f64) -> Result<f64> {
        if norm == 0.0 {
            return Ok(0.0);
        }
        match self {
            Interaction::Zero => Ok(0.0),
            Interaction::PowerLaw { gamma, amplitude, sign } => {
                let bound = 1.0 / (1.0 + norm.powf(*gamma));
                let value = sign.factor() * amplitude * bound;
                if value.abs() > bound * (1.0 + 1e-15) {
                    return Err(Error::ConstraintViolation {
                        k: norm,
                        value: value.abs(),
                        bound,
                    });
                }
                Ok(value)
            }
        }
    }
}

pub fn interaction_hat(w: &Interaction, k: &[i64]) -> Result<f64> {
    w.hat(k)
}

/// Sampled evidence that `e^{2πλ₀|η|}|f̂⁰(η)| ≤ C₀`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticityCertificate {
    pub lambda0: f64,
    pub c0: f64,
    pub eta_max: f64,
    /// Bound on the derivative series `Σ λ₀ⁿ/n! ‖∂ⁿf⁰‖_{L¹}` (one-dimensional profiles).
    pub derivative_series: Option<f64>,
}

/// Samples the weighted transform along the first axis on `[-η_max, η_max]`
/// and returns its supremum as `C₀`.
pub fn verify_analyticity(
    profile: &VelocityProfile,
    lambda0: f64,
    eta_max: f64,
    n_samples: usize,
) -> Result<AnalyticityCertificate> {
    if !(lambda0 >= 0.0) || !(eta_max > 0.0) || n_samples < 3 {
        return Err(Error::InvalidArgument(format!(
            "need lambda0 >= 0, eta_max > 0, n_samples >= 3 (got {lambda0}, {eta_max}, {n_samples})"
        )));
    }
    let d = profile.dimension();
    let weighted = |eta: f64| {
        let mut e = vec![0.0; d];
        e[0] = eta;
        (2.0 * PI * lambda0 * eta.abs()).exp() * profile.fourier(&e).norm()
    };
    let h = 2.0 * eta_max / (n_samples - 1) as f64;
    let mut c0 = 0.0f64;
    for i in 0..n_samples {
        c0 = c0.max(weighted(-eta_max + h * i as f64));
    }
    for edge in [eta_max, -eta_max] {
        let inner = edge - edge.signum() * h;
        if weighted(edge) > weighted(inner) {
            return Err(Error::NotAnalyticAtWidth { lambda0, eta: edge });
        }
    }
    let derivative_series = (d == 1).then(|| profile.derivative_series(lambda0));
    Ok(AnalyticityCertificate {
        lambda0,
        c0,
        eta_max,
        derivative_series,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quad_transform(p: &VelocityProfile, eta: f64) -> Complex64 {
        let s = Simpson {
            initial_panels: 2048,
            rel_tol: 1e-12,
            abs_tol: 1e-15,
            ..Simpson::default()
        };
        let re = s.integrate(|v| p.sample_1d(v) * (2.0 * PI * eta * v).cos(), -14.0, 14.0);
        let im = s.integrate(|v| -p.sample_1d(v) * (2.0 * PI * eta * v).sin(), -14.0, 14.0);
        Complex64::new(re, im)
    }

    #[test]
    fn maxwellian_transform_values() {
        let p = VelocityProfile::maxwellian(1.0).unwrap();
        assert_eq!(p.fourier_1d(0.0), Complex64::new(1.0, 0.0));
        let expected = (-2.0 * PI * PI).exp();
        assert!((p.fourier_1d(1.0).re - expected).abs() < 1e-20);
        assert!((expected - 2.675e-9).abs() < 1e-12);
        let q = quad_transform(&p, 1.0);
        assert!((q.re - expected).abs() < 1e-12, "{q}");
    }

    #[test]
    fn mixture_transform_is_shifted_cosine() {
        let p = VelocityProfile::mixture(&[(0.5, -2.0, 1.0), (0.5, 2.0, 1.0)]).unwrap();
        for &eta in &[0.0, 0.1, 0.23, 0.5] {
            let closed = (4.0 * PI * eta).cos() * (-2.0 * PI * PI * eta * eta).exp();
            let f = p.fourier_1d(eta);
            assert!((f.re - closed).abs() < 1e-15 && f.im.abs() < 1e-15);
            let q = quad_transform(&p, eta);
            assert!((q - f).norm() < 1e-9, "eta {eta}: {q} vs {f}");
        }
    }

    #[test]
    fn samples_and_mass() {
        let p = VelocityProfile::maxwellian(1.0).unwrap();
        assert!((p.sample_1d(0.0) - 1.0 / (2.0 * PI).sqrt()).abs() < 1e-16);
        let m = VelocityProfile::mixture(&[(0.3, -1.0, 0.5), (0.7, 1.5, 0.8)]).unwrap();
        let s = Simpson { initial_panels: 512, ..Simpson::default() };
        for prof in [&p, &m] {
            let mass = s.integrate(|v| prof.sample_1d(v), -15.0, 15.0);
            assert!((mass - 1.0).abs() < 1e-10);
        }
        let sym = VelocityProfile::mixture(&[(0.5, -2.0, 1.0), (0.5, 2.0, 1.0)]).unwrap();
        assert_eq!(sym.sample_1d(1.3), sym.sample_1d(-1.3));
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let m = VelocityProfile::mixture(&[(0.3, -1.0, 0.5), (0.7, 1.5, 0.8)]).unwrap();
        for &v in &[-2.0, -0.3, 0.0, 0.9, 2.2] {
            let h = 1e-5;
            let fd = (m.sample_1d(v + h) - m.sample_1d(v - h)) / (2.0 * h);
            assert!((fd - m.derivative_1d(v)).abs() < 1e-8);
        }
    }

    #[test]
    fn invalid_profiles_rejected() {
        assert!(VelocityProfile::maxwellian(0.0).is_err());
        assert!(VelocityProfile::mixture(&[(0.5, 0.0, 1.0)]).is_err());
        assert!(VelocityProfile::mixture(&[(1.5, 0.0, 1.0), (-0.5, 1.0, 1.0)]).is_err());
    }

    #[test]
    fn interaction_values() {
        let w = Interaction::power_law(2.0, 1.0, Sign::Repulsive);
        assert_eq!(w.hat_1d(0).unwrap(), 0.0);
        assert_eq!(w.hat_1d(1).unwrap(), 0.5);
        assert!((w.hat_1d(3).unwrap() - 0.1).abs() < 1e-16);
        let too_big = Interaction::power_law(2.0, 1.5, Sign::Repulsive);
        assert!(matches!(too_big.hat_1d(2), Err(Error::ConstraintViolation { .. })));
        assert_eq!(Interaction::Zero.hat_1d(5).unwrap(), 0.0);
        assert!(Interaction::power_law(0.5, 1.0, Sign::Repulsive).validate().is_err());
    }

    #[test]
    fn three_dimensional_types() {
        let p = VelocityProfile::new(ProfileKind::Maxwellian { thermal_speed: 0.5 }, 3).unwrap();
        let f = p.fourier(&[0.3, 0.4, 0.0]);
        assert!((f.re - (-2.0 * PI * PI * 0.25 * 0.25).exp()).abs() < 1e-15);
        let w = Interaction::power_law(2.0, 1.0, Sign::Repulsive);
        assert!((w.hat(&[1, 2, 2]).unwrap() - 0.1).abs() < 1e-16);
    }

    #[test]
    fn analyticity_certificates() {
        let p = VelocityProfile::maxwellian(1.0).unwrap();
        let c = verify_analyticity(&p, 0.5, 3.0, 601).unwrap();
        let exact = (0.25f64 / 2.0).exp();
        assert!(c.c0 <= exact + 1e-12 && c.c0 > exact - 1e-3);
        let c = verify_analyticity(&p, 0.0, 3.0, 101).unwrap();
        assert_eq!(c.c0, 1.0);
        let wide = VelocityProfile::maxwellian(50.0).unwrap();
        let c = verify_analyticity(&wide, 0.5, 0.1, 2001).unwrap();
        assert!((c.c0 - 1.0).abs() < 1e-4);
        // grid too short for the weight to turn over
        assert!(matches!(
            verify_analyticity(&p, 5.0, 0.5, 101),
            Err(Error::NotAnalyticAtWidth { .. })
        ));
        let series = c.derivative_series.unwrap();
        assert!(series >= 1.0);
    }

    #[test]
    fn derivative_series_gaussian_lower_orders() {
        // n=0 term is the mass; n=1 term is λ·2φ(0)/σ
        let p = VelocityProfile::maxwellian(1.0).unwrap();
        let lam = 1e-3;
        let s = p.derivative_series(lam);
        let expected = 1.0 + lam * 2.0 / (2.0 * PI).sqrt();
        assert!((s - expected).abs() < 1e-6);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn transform_bounded_by_one(eta in -4.0f64..4.0, vth in 0.1f64..3.0, c in -3.0f64..3.0) {
                let p = VelocityProfile::mixture(&[(0.4, c, vth), (0.6, -c, vth * 1.5)]).unwrap();
                let f = p.fourier_1d(eta).norm();
                prop_assert!(f <= 1.0 + 1e-15);
                if eta.abs() > 1e-6 { prop_assert!(f < 1.0); }
            }

            #[test]
            fn interaction_symmetric_and_bounded(k in -64i64..=64, gamma in 1.01f64..4.0, amp in 0.0f64..1.0) {
                let w = Interaction::power_law(gamma, amp, Sign::Attractive);
                let a = w.hat_1d(k).unwrap();
                prop_assert_eq!(a, w.hat_1d(-k).unwrap());
                if k != 0 {
                    prop_assert!(a.abs() <= 1.0 / (1.0 + (k.abs() as f64).powf(gamma)));
                }
            }
        }
    }
}
