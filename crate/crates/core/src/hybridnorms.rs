//! Hybrid analytic norms `F`, `Z`, `Y` on truncated double-Fourier data, and
//! the checkable items of the standard norm properties.
//!
//! The η grid is centered, `η_j = (j − n/2)Δη`, and pairs with the velocity
//! grid `v_m = (m − n/2)Δv`, `Δv = 1/(nΔη)`. A function of `x` alone puts its
//! Fourier coefficient `c_k` at `η = 0` with weight `c_k/Δη`, so rectangle
//! sums over η reproduce `c_k` exactly.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{compensated_sum, CenteredDft};

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDistribution {
    k_max: i64,
    n_eta: usize,
    d_eta: f64,
    coeffs: Vec<Complex64>,
}

impl SpectralDistribution {
    pub fn zeros(k_max: i64, n_eta: usize, d_eta: f64) -> Result<Self> {
        if k_max < 0 || n_eta < 2 || n_eta % 2 != 0 || !(d_eta > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "need k_max >= 0, even n_eta >= 2, d_eta > 0 (got {k_max}, {n_eta}, {d_eta})"
            )));
        }
        let rows = (2 * k_max + 1) as usize;
        Ok(Self { k_max, n_eta, d_eta, coeffs: vec![Complex64::new(0.0, 0.0); rows * n_eta] })
    }

    /// Samples `f̂(k, η_j)` from a closure.
    pub fn from_fn<F: Fn(i64, f64) -> Complex64>(k_max: i64, n_eta: usize, d_eta: f64, f: F) -> Result<Self> {
        let mut out = Self::zeros(k_max, n_eta, d_eta)?;
        for k in -k_max..=k_max {
            for j in 0..n_eta {
                let eta = out.eta(j);
                *out.get_mut(k, j) = f(k, eta);
            }
        }
        Ok(out)
    }

    /// A function of `x` only with Fourier coefficients `c[k + k_max]`.
    pub fn pure_x(coeffs: &[Complex64], n_eta: usize, d_eta: f64) -> Result<Self> {
        if coeffs.len() % 2 == 0 {
            return Err(Error::InvalidArgument("pure_x needs 2*k_max+1 coefficients".into()));
        }
        let k_max = (coeffs.len() / 2) as i64;
        let mut out = Self::zeros(k_max, n_eta, d_eta)?;
        for (i, c) in coeffs.iter().enumerate() {
            *out.get_mut(i as i64 - k_max, n_eta / 2) = c / d_eta;
        }
        Ok(out)
    }

    /// Rows of velocity samples `f̂(k, v_m)` for `k = −k_max..k_max`,
    /// transformed in `v` onto the dual η grid.
    pub fn from_velocity_samples(rows: &[Vec<Complex64>], dv: f64) -> Result<Self> {
        if rows.len() % 2 == 0 || rows.is_empty() {
            return Err(Error::InvalidArgument("need 2*k_max+1 rows".into()));
        }
        let n = rows[0].len();
        let k_max = (rows.len() / 2) as i64;
        let mut out = Self::zeros(k_max, n, 1.0 / (n as f64 * dv))?;
        let dft = CenteredDft::new(n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidArgument("ragged velocity rows".into()));
            }
            let start = i * n;
            dft.forward(row, dv, &mut out.coeffs[start..start + n]);
        }
        Ok(out)
    }

    pub fn k_max(&self) -> i64 {
        self.k_max
    }

    pub fn n_eta(&self) -> usize {
        self.n_eta
    }

    pub fn d_eta(&self) -> f64 {
        self.d_eta
    }

    pub fn dv(&self) -> f64 {
        1.0 / (self.n_eta as f64 * self.d_eta)
    }

    pub fn eta(&self, j: usize) -> f64 {
        (j as f64 - (self.n_eta / 2) as f64) * self.d_eta
    }

    pub fn eta_max(&self) -> f64 {
        (self.n_eta / 2) as f64 * self.d_eta
    }

    fn offset(&self, k: i64) -> usize {
        assert!(k.abs() <= self.k_max, "mode {k} outside truncation {}", self.k_max);
        (k + self.k_max) as usize * self.n_eta
    }

    pub fn get(&self, k: i64, j: usize) -> Complex64 {
        self.coeffs[self.offset(k) + j]
    }

    pub fn get_mut(&mut self, k: i64, j: usize) -> &mut Complex64 {
        let o = self.offset(k);
        &mut self.coeffs[o + j]
    }

    pub fn row(&self, k: i64) -> &[Complex64] {
        let o = self.offset(k);
        &self.coeffs[o..o + self.n_eta]
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn scale(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|z| *z *= c);
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if (self.k_max, self.n_eta) != (other.k_max, other.n_eta) || self.d_eta != other.d_eta {
            return Err(Error::InvalidArgument("grids differ".into()));
        }
        let mut out = self.clone();
        out.coeffs.iter_mut().zip(&other.coeffs).for_each(|(a, b)| *a += b);
        Ok(out)
    }

    /// Largest violation of `f̂(−k,−η) = conj f̂(k,η)` over pairs on the grid.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for k in -self.k_max..=self.k_max {
            for j in 1..self.n_eta {
                worst = worst.max((self.get(k, j) - self.get(-k, self.n_eta - j).conj()).norm());
            }
        }
        worst
    }

    /// `f ∘ S_t`, i.e. `(x,v) ↦ f(x − vt, v)`, whose transform is
    /// `f̂(k, η − kt)`; linear interpolation between η nodes, zero outside.
    pub fn free_transport(&self, t: f64) -> Self {
        let mut out = self.clone();
        for k in -self.k_max..=self.k_max {
            let shift = k as f64 * t / self.d_eta;
            let row = self.row(k).to_vec();
            for j in 0..self.n_eta {
                let x = j as f64 - shift;
                let i0 = x.floor();
                let w = x - i0;
                let at = |i: f64| {
                    if i >= 0.0 && (i as usize) < self.n_eta {
                        row[i as usize]
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                };
                *out.get_mut(k, j) = if w == 0.0 { at(i0) } else { (1.0 - w) * at(i0) + w * at(i0 + 1.0) };
            }
        }
        out
    }

    /// Pure-x density `∫ f dv`, i.e. the coefficients `f̂(k, 0)`.
    pub fn density(&self) -> Vec<Complex64> {
        (-self.k_max..=self.k_max).map(|k| self.get(k, self.n_eta / 2)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormParams {
    pub lambda: f64,
    pub mu: f64,
    pub tau: f64,
    /// Exponent of the velocity `L^p` norm; `f64::INFINITY` for the max.
    pub p: f64,
    pub n_max: usize,
}

impl NormParams {
    pub fn new(lambda: f64, mu: f64, tau: f64) -> Self {
        Self { lambda, mu, tau, p: 1.0, n_max: 24 }
    }

    pub fn with_p(mut self, p: f64) -> Self {
        self.p = p;
        self
    }

    pub fn with_n_max(mut self, n_max: usize) -> Self {
        self.n_max = n_max;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0 && self.mu >= 0.0 && self.tau.is_finite() && self.p >= 1.0) {
            return Err(Error::InvalidArgument(format!("invalid norm parameters {self:?}")));
        }
        Ok(())
    }
}

const TAIL_TOL: f64 = 1e-8;

/// `Σ_k ∫ |f̂(k,η)| e^{2πλ|kτ+η|} e^{2πμ|k|} dη` by the rectangle rule.
pub fn f_norm(f: &SpectralDistribution, params: &NormParams) -> Result<f64> {
    params.validate()?;
    let n = f.n_eta;
    let rows: Vec<(f64, f64)> = (-f.k_max..=f.k_max)
        .into_par_iter()
        .map(|k| {
            let kw = (2.0 * PI * params.mu * k.abs() as f64).exp();
            let weight = |j: usize| {
                f.get(k, j).norm() * (2.0 * PI * params.lambda * (k as f64 * params.tau + f.eta(j)).abs()).exp() * kw
            };
            let total = compensated_sum((0..n).map(weight)) * f.d_eta;
            let edge = weight(0).max(weight(n - 1)) * f.d_eta;
            (total, edge)
        })
        .collect();
    let total = compensated_sum(rows.iter().map(|r| r.0));
    let edge = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    if edge > TAIL_TOL * total {
        return Err(Error::TailNotResolved { edge, total });
    }
    Ok(total)
}

/// `sup e^{2πμ|k|} e^{2πλ|η+kτ|} |f̂(k,η)|` over the grid.
pub fn y_norm(f: &SpectralDistribution, params: &NormParams) -> f64 {
    let mut best = 0.0f64;
    for k in -f.k_max..=f.k_max {
        let kw = (2.0 * PI * params.mu * k.abs() as f64).exp();
        for j in 0..f.n_eta {
            let w = (2.0 * PI * params.lambda * (f.eta(j) + k as f64 * params.tau).abs()).exp();
            best = best.max(kw * w * f.get(k, j).norm());
        }
    }
    best
}

fn lp_norm(values: &[Complex64], dv: f64, p: f64) -> f64 {
    if p.is_infinite() {
        values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    } else if p == 1.0 {
        compensated_sum(values.iter().map(|z| z.norm())) * dv
    } else {
        (compensated_sum(values.iter().map(|z| z.norm().powf(p))) * dv).powf(1.0 / p)
    }
}

/// `Σ_l Σ_n λⁿ/n! e^{2πμ|l|} ‖(∇_v + 2πiτl)ⁿ f̂(l,·)‖_{L^p}`; the operator
/// acts as the multiplier `2πi(η + τl)` on the η side.
pub fn z_norm(f: &SpectralDistribution, params: &NormParams) -> Result<f64> {
    params.validate()?;
    let dft = CenteredDft::new(f.n_eta);
    let dv = f.dv();
    let rows: Vec<Result<f64>> = (-f.k_max..=f.k_max)
        .into_par_iter()
        .map(|l| {
            let mult: Vec<Complex64> = (0..f.n_eta)
                .map(|j| Complex64::new(0.0, 2.0 * PI * (f.eta(j) + params.tau * l as f64)))
                .collect();
            let reach = 2.0 * PI * params.lambda * (f.eta_max() + (params.tau * l as f64).abs());
            let mut g = f.row(l).to_vec();
            let mut v = vec![Complex64::new(0.0, 0.0); f.n_eta];
            let mut sum = Vec::new();
            let mut coef = 1.0;
            let mut last = 0.0;
            for n in 0..=params.n_max {
                if n > 0 {
                    if params.lambda == 0.0 {
                        last = 0.0;
                        break;
                    }
                    coef *= params.lambda / n as f64;
                    g.iter_mut().zip(&mult).for_each(|(a, m)| *a *= m);
                }
                dft.inverse(&g, f.d_eta, &mut v);
                last = coef * lp_norm(&v, dv, params.p);
                sum.push(last);
                let total: f64 = sum.iter().sum();
                if n as f64 > std::f64::consts::E * reach && last <= 1e-17 * total {
                    last = 0.0;
                    break;
                }
            }
            let total = compensated_sum(sum.iter().copied());
            if last > TAIL_TOL * total {
                return Err(Error::SeriesNotConverged { last, total, n_max: params.n_max });
            }
            Ok((2.0 * PI * params.mu * l.abs() as f64).exp() * total)
        })
        .collect();
    let mut vals = Vec::with_capacity(rows.len());
    for r in rows {
        vals.push(r?);
    }
    Ok(compensated_sum(vals))
}

/// Pure-x norm `Σ_k |c_k| e^{2πw|k|}` with `c[k + k_max]`.
pub fn pure_x_norm(coeffs: &[Complex64], width: f64) -> f64 {
    let k_max = (coeffs.len() / 2) as i64;
    compensated_sum(
        coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c.norm() * (2.0 * PI * width * (i as i64 - k_max).abs() as f64).exp()),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ItemResult {
    pub item: &'static str,
    pub checks: usize,
    /// Largest relative violation (`lhs − rhs` over `rhs`, clipped below by the
    /// equality defect for identities). Zero or negative means comfortable.
    pub worst_slack: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Observation {
    pub item: &'static str,
    /// Worst measured `lhs / rhs`.
    pub ratio: f64,
    /// The constant the inequality states for that ratio.
    pub stated: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyReport {
    pub items: Vec<ItemResult>,
    pub observations: Vec<Observation>,
}

impl PropertyReport {
    pub fn all_passed(&self) -> bool {
        self.items.iter().all(|i| i.passed)
    }
}

pub const BATTERY_TOL: f64 = 1e-9;

#[derive(Default)]
struct Tally {
    checks: usize,
    worst: f64,
}

impl Tally {
    fn ineq(&mut self, lhs: f64, rhs: f64) {
        self.checks += 1;
        let slack = (lhs - rhs) / rhs.abs().max(f64::MIN_POSITIVE);
        self.worst = if self.checks == 1 { slack } else { self.worst.max(slack) };
    }

    fn eq(&mut self, a: f64, b: f64) {
        self.checks += 1;
        let slack = (a - b).abs() / b.abs().max(f64::MIN_POSITIVE);
        self.worst = if self.checks == 1 { slack } else { self.worst.max(slack) };
    }

    fn finish(self, item: &'static str) -> ItemResult {
        ItemResult { item, checks: self.checks, worst_slack: self.worst, passed: self.checks > 0 && self.worst < BATTERY_TOL }
    }
}

fn is_pure_x(f: &SpectralDistribution) -> bool {
    (-f.k_max..=f.k_max).all(|k| (0..f.n_eta).all(|j| j == f.n_eta / 2 || f.get(k, j) == Complex64::new(0.0, 0.0)))
}

fn is_pure_v(f: &SpectralDistribution) -> bool {
    (-f.k_max..=f.k_max).all(|k| k == 0 || f.row(k).iter().all(|z| *z == Complex64::new(0.0, 0.0)))
}

/// Checks the exact norm identities and inequalities over every field and
/// parameter set; the velocity-gradient estimate is recorded as an observed
/// ratio only.
pub fn norm_property_battery(suite: &[SpectralDistribution], params_grid: &[NormParams]) -> Result<PropertyReport> {
    let mut i1 = Tally::default();
    let mut i2 = Tally::default();
    let mut i8a = Tally::default();
    let mut i8b = Tally::default();
    let mut i9 = Tally::default();
    let mut i10 = Tally::default();
    let mut grad_ratio = 0.0f64;
    let mut grad_stated = 0.0f64;
    for f in suite {
        for p in params_grid {
            let p1 = p.with_p(1.0);
            if is_pure_x(f) {
                let z = z_norm(f, &p.with_p(f64::INFINITY))?;
                let fx = f_norm(f, p)?;
                let direct = pure_x_norm(&f.density(), p.lambda * p.tau.abs() + p.mu) * f.d_eta;
                i1.eq(fx, z);
                i1.eq(fx, direct);
            }
            if is_pure_v(f) {
                let base = NormParams { mu: 0.0, tau: 0.0, ..p1 };
                i2.eq(f_norm(f, p)?, f_norm(f, &NormParams { mu: 0.0, tau: 0.0, ..*p })?);
                i2.eq(z_norm(f, &p1)?, z_norm(f, &base)?);
            }
            let bar = NormParams { lambda: 1.5 * p.lambda + 0.01, mu: p.mu + 0.05, ..p1 };
            i8a.ineq(z_norm(f, &p1)?, z_norm(f, &bar)?);
            i8a.ineq(f_norm(f, &p1)?, f_norm(f, &bar)?);
            i8a.ineq(y_norm(f, &p1), y_norm(f, &bar));
            let tau_bar = p.tau + 0.3;
            let shifted = NormParams { mu: p.mu + p.lambda * (p.tau - tau_bar).abs(), tau: tau_bar, ..p1 };
            i8b.ineq(z_norm(f, &p1)?, z_norm(f, &shifted)?);
            let z1 = z_norm(f, &p1)?;
            i9.ineq(y_norm(f, &p1), z1);
            i10.ineq(pure_x_norm(&f.density(), p.lambda * p.tau.abs() + p.mu), z1);
            if p.lambda > 0.0 {
                // ‖∇_v f‖_{F^λ} against ‖f‖_{F^λ̄}
                let lb = bar.lambda;
                let grad = SpectralDistribution {
                    coeffs: f
                        .coeffs
                        .iter()
                        .enumerate()
                        .map(|(i, z)| z * 2.0 * PI * f.eta(i % f.n_eta).abs())
                        .collect(),
                    ..f.clone()
                };
                let flat = NormParams { tau: 0.0, mu: 0.0, ..p1 };
                let r = f_norm(&grad, &flat)? / f_norm(f, &NormParams { lambda: lb, ..flat })?;
                grad_ratio = grad_ratio.max(r);
                grad_stated = 1.0 / (2.0 * PI * std::f64::consts::E * (lb - p.lambda));
            }
        }
    }
    Ok(PropertyReport {
        items: vec![
            i1.finish("pure-x: F = Z(p=inf) = F^{lambda|tau|+mu}"),
            i2.finish("pure-v: independent of mu and tau"),
            i8a.finish("monotone in lambda and mu"),
            i8b.finish("time shift: Z_tau <= Z_taubar with mu + lambda|tau - taubar|"),
            i9.finish("Y <= Z(p=1)"),
            i10.finish("density: |int f dv|_F <= Z(p=1)"),
        ],
        observations: vec![Observation {
            item: "velocity gradient in F",
            ratio: grad_ratio,
            stated: grad_stated,
        }],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cos_field() -> SpectralDistribution {
        let c = [Complex64::new(0.5, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.5, 0.0)];
        SpectralDistribution::pure_x(&c, 64, 0.25).unwrap()
    }

    fn gaussian_mixed(seed: u64) -> SpectralDistribution {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let amps: Vec<(f64, f64, f64)> = (0..5).map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-0.5..0.5))).collect();
        SpectralDistribution::from_fn(2, 128, 0.125, |k, eta| {
            let (a, b, c) = amps[(k + 2) as usize];
            Complex64::new(a, b) * (-2.0 * (eta - c).powi(2)).exp()
        })
        .unwrap()
    }

    #[test]
    fn cosine_field_norm() {
        let f = cos_field();
        for &mu in &[0.0, 0.1, 0.5] {
            let v = f_norm(&f, &NormParams::new(0.0, mu, 0.0)).unwrap();
            assert!((v - (2.0 * PI * mu).exp()).abs() < 1e-14);
            let z = z_norm(&f, &NormParams::new(0.3, mu, 1.2).with_p(f64::INFINITY).with_n_max(80)).unwrap();
            let fx = f_norm(&f, &NormParams::new(0.3, mu, 1.2)).unwrap();
            let expected = (2.0 * PI * (0.3 * 1.2 + mu)).exp();
            assert!((fx - expected).abs() < 1e-12 * expected);
            assert!((z - expected).abs() < 1e-12 * expected);
        }
    }

    #[test]
    fn unweighted_f_norm_is_plain_sum() {
        let f = gaussian_mixed(3);
        let plain: f64 = f.coeffs().iter().map(|z| z.norm()).sum::<f64>() * f.d_eta();
        let v = f_norm(&f, &NormParams::new(0.0, 0.0, 0.0)).unwrap();
        assert!((v - plain).abs() < 1e-13 * plain);
    }

    #[test]
    fn z_norm_without_lambda_is_single_term() {
        let f = gaussian_mixed(5);
        let dft = CenteredDft::new(f.n_eta());
        let mut expected = 0.0;
        for l in -2..=2 {
            let mut v = vec![Complex64::new(0.0, 0.0); f.n_eta()];
            dft.inverse(f.row(l), f.d_eta(), &mut v);
            expected += (2.0 * PI * 0.2 * l.abs() as f64).exp() * lp_norm(&v, f.dv(), 2.0);
        }
        let z = z_norm(&f, &NormParams::new(0.0, 0.2, 0.7).with_p(2.0)).unwrap();
        assert!((z - expected).abs() < 1e-13 * expected);
    }

    #[test]
    fn y_norm_single_mode() {
        let mut f = SpectralDistribution::zeros(3, 32, 0.5).unwrap();
        *f.get_mut(2, 20) = Complex64::new(0.0, 0.7);
        let p = NormParams::new(0.2, 0.1, 0.5);
        let eta = f.eta(20);
        let expected = 0.7 * (2.0 * PI * 0.1 * 2.0).exp() * (2.0 * PI * 0.2 * (eta + 1.0)).exp();
        assert!((y_norm(&f, &p) - expected).abs() < 1e-14 * expected);
    }

    #[test]
    fn pure_velocity_ignores_mu_tau() {
        let f = SpectralDistribution::from_fn(2, 64, 0.25, |k, eta| {
            if k == 0 { Complex64::new((-eta * eta).exp(), 0.0) } else { Complex64::new(0.0, 0.0) }
        })
        .unwrap();
        let a = f_norm(&f, &NormParams::new(0.1, 0.0, 0.0)).unwrap();
        let b = f_norm(&f, &NormParams::new(0.1, 0.7, 3.0)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn tail_and_series_errors() {
        let f = SpectralDistribution::from_fn(1, 16, 0.5, |_, _| Complex64::new(1.0, 0.0)).unwrap();
        assert!(matches!(f_norm(&f, &NormParams::new(0.0, 0.0, 0.0)), Err(Error::TailNotResolved { .. })));
        let g = gaussian_mixed(1);
        assert!(matches!(
            z_norm(&g, &NormParams::new(2.0, 0.0, 0.0).with_n_max(3)),
            Err(Error::SeriesNotConverged { .. })
        ));
    }

    #[test]
    fn free_transport_shifts_tau() {
        let f = SpectralDistribution::from_fn(2, 256, 0.125, |k, eta| {
            Complex64::new(1.0 / (1.0 + k.abs() as f64), 0.0) * (-3.0 * eta * eta).exp()
        })
        .unwrap();
        let t = 0.5; // kt is a whole number of η cells for every k
        let g = f.free_transport(t);
        for &tau in &[0.0, 0.25, -1.0] {
            let p = NormParams::new(0.15, 0.05, tau);
            let lhs = f_norm(&g, &p).unwrap();
            let rhs = f_norm(&f, &NormParams { tau: tau + t, ..p }).unwrap();
            assert!((lhs - rhs).abs() < 1e-13 * rhs, "tau {tau}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn velocity_samples_roundtrip() {
        let f = gaussian_mixed(9);
        let dft = CenteredDft::new(f.n_eta());
        let rows: Vec<Vec<Complex64>> = (-2..=2)
            .map(|k| {
                let mut v = vec![Complex64::new(0.0, 0.0); f.n_eta()];
                dft.inverse(f.row(k), f.d_eta(), &mut v);
                v
            })
            .collect();
        let back = SpectralDistribution::from_velocity_samples(&rows, f.dv()).unwrap();
        for (a, b) in back.coeffs().iter().zip(f.coeffs()) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn battery_on_small_suite() {
        let suite = vec![cos_field(), gaussian_mixed(11), gaussian_mixed(12)];
        let params = [NormParams::new(0.05, 0.1, 0.5).with_n_max(80), NormParams::new(0.0, 0.0, 0.0).with_n_max(80)];
        let r = norm_property_battery(&suite, &params).unwrap();
        for item in &r.items {
            if item.checks > 0 {
                assert!(item.passed, "{item:?}");
            }
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn field() -> impl Strategy<Value = SpectralDistribution> {
            (proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0, -0.5f64..0.5), 5)).prop_map(|amps| {
                SpectralDistribution::from_fn(2, 64, 0.25, |k, eta| {
                    let (a, b, c) = amps[(k + 2) as usize];
                    Complex64::new(a, b) * (-2.0 * (eta - c).powi(2)).exp()
                })
                .unwrap()
            })
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(32))]

            #[test]
            fn homogeneous(f in field(), c in 0.0f64..10.0, lam in 0.0f64..0.1, mu in 0.0f64..0.3, tau in -1.0f64..1.0) {
                let p = NormParams::new(lam, mu, tau).with_n_max(60);
                let g = f.scale(c);
                let (a, b) = (f_norm(&g, &p).unwrap(), c * f_norm(&f, &p).unwrap());
                prop_assert!((a - b).abs() <= 1e-12 * b.max(1e-300));
                let (a, b) = (z_norm(&g, &p).unwrap(), c * z_norm(&f, &p).unwrap());
                prop_assert!((a - b).abs() <= 1e-12 * b.max(1e-300));
                let (a, b) = (y_norm(&g, &p), c * y_norm(&f, &p));
                prop_assert!((a - b).abs() <= 1e-12 * b.max(1e-300));
            }

            #[test]
            fn triangle(f in field(), g in field(), lam in 0.0f64..0.1, mu in 0.0f64..0.3, tau in -1.0f64..1.0) {
                let p = NormParams::new(lam, mu, tau).with_n_max(60);
                let h = f.add(&g).unwrap();
                prop_assert!(f_norm(&h, &p).unwrap() <= f_norm(&f, &p).unwrap() + f_norm(&g, &p).unwrap() + 1e-10);
                prop_assert!(z_norm(&h, &p).unwrap() <= z_norm(&f, &p).unwrap() + z_norm(&g, &p).unwrap() + 1e-10);
                prop_assert!(y_norm(&h, &p) <= y_norm(&f, &p) + y_norm(&g, &p) + 1e-10);
            }

            #[test]
            fn monotone(f in field(), lam in 0.0f64..0.1, dl in 0.0f64..0.1, mu in 0.0f64..0.3, dm in 0.0f64..0.3) {
                let p = NormParams::new(lam, mu, 0.4).with_n_max(60);
                let q = NormParams::new(lam + dl, mu + dm, 0.4).with_n_max(60);
                prop_assert!(f_norm(&f, &p).unwrap() <= f_norm(&f, &q).unwrap());
                prop_assert!(z_norm(&f, &p).unwrap() <= z_norm(&f, &q).unwrap() * (1.0 + 1e-14));
                prop_assert!(y_norm(&f, &p) <= y_norm(&f, &q));
            }

            #[test]
            fn reduction_order_independent(f in field(), lam in 0.0f64..0.1) {
                let p = NormParams::new(lam, 0.2, 0.3).with_n_max(60);
                let a = f_norm(&f, &p).unwrap();
                let b = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(|| f_norm(&f, &p).unwrap());
                prop_assert!((a - b).abs() <= 1e-13 * a.max(1e-300));
            }
        }
    }
}
