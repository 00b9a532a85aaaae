use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hybridnorms::SpectralDistribution;
use crate::numerics::compensated_sum;
use crate::profiles::VelocityProfile;

/// Mixed `(k, v)` grid: spatial modes `0..=k_max` and the velocity samples
/// `v_j = (j − n_v/2)Δv`, `Δv = 2v_max/n_v`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub k_max: usize,
    pub n_v: usize,
    pub v_max: f64,
}

impl Grid {
    pub fn new(k_max: usize, n_v: usize, v_max: f64) -> Result<Self> {
        let g = Self { k_max, n_v, v_max };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k_max < 1 || self.n_v < 8 || self.n_v % 2 != 0 || !(self.v_max > 0.0 && self.v_max.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "grid needs k_max >= 1, even n_v >= 8, v_max > 0 (got {}, {}, {})",
                self.k_max, self.n_v, self.v_max
            )));
        }
        Ok(())
    }

    pub fn dv(&self) -> f64 {
        2.0 * self.v_max / self.n_v as f64
    }

    pub fn v(&self, j: usize) -> f64 {
        (j as f64 - (self.n_v / 2) as f64) * self.dv()
    }

    /// `1/(|k|Δv)`: the sampled free-streaming density of mode `k` revives here.
    pub fn recurrence_time(&self, k: i64) -> f64 {
        1.0 / (k.unsigned_abs() as f64 * self.dv())
    }

    /// Size of the physical `x` grid used for products; large enough to keep
    /// quadratic interactions of the retained modes free of aliasing.
    pub fn nx(&self) -> usize {
        (3 * self.k_max + 1).next_power_of_two()
    }
}

/// Samples of `f⁰` rescaled so the discrete mass is exactly one.
pub fn discrete_equilibrium(profile: &VelocityProfile, grid: &Grid) -> Vec<f64> {
    let raw: Vec<f64> = (0..grid.n_v).map(|j| profile.sample_1d(grid.v(j))).collect();
    let mass = compensated_sum(raw.iter().copied()) * grid.dv();
    raw.into_iter().map(|x| x / mass).collect()
}

/// `f(t, k, v)` for `k = 0..=k_max`; negative modes are conjugates.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseState {
    pub(crate) grid: Grid,
    pub(crate) time: f64,
    pub(crate) f: Vec<Complex64>,
}

impl PhaseState {
    pub fn zeros(grid: Grid) -> Result<Self> {
        grid.validate()?;
        Ok(Self { grid, time: 0.0, f: vec![Complex64::new(0.0, 0.0); (grid.k_max + 1) * grid.n_v] })
    }

    /// Spatially uniform `f⁰(v)`.
    pub fn equilibrium(grid: Grid, profile: &VelocityProfile) -> Result<Self> {
        let mut s = Self::zeros(grid)?;
        for (z, x) in s.f.iter_mut().zip(discrete_equilibrium(profile, &grid)) {
            *z = Complex64::new(x, 0.0);
        }
        Ok(s)
    }

    /// Adds `amplitude·cos(2π·mode·x)·shape(v)`.
    pub fn perturb<F: Fn(f64) -> f64>(&mut self, mode: usize, amplitude: f64, shape: F) -> Result<()> {
        if mode == 0 || mode > self.grid.k_max {
            return Err(Error::InvalidArgument(format!("perturbation mode {mode} outside 1..={}", self.grid.k_max)));
        }
        let n = self.grid.n_v;
        for j in 0..n {
            self.f[mode * n + j] += 0.5 * amplitude * shape(self.grid.v(j));
        }
        Ok(())
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn set_time(&mut self, t: f64) {
        self.time = t;
    }

    /// Velocity samples of mode `k`, for either sign of `k`.
    pub fn row(&self, k: i64) -> Vec<Complex64> {
        let n = self.grid.n_v;
        let a = k.unsigned_abs() as usize;
        let r = &self.f[a * n..(a + 1) * n];
        if k >= 0 {
            r.to_vec()
        } else {
            r.iter().map(|z| z.conj()).collect()
        }
    }


    /// `ρ̂(k)` for `k = 0..=k_max`.
    pub fn density(&self) -> Vec<Complex64> {
        let n = self.grid.n_v;
        let dv = self.grid.dv();
        self.f.chunks(n).map(|r| r.iter().sum::<Complex64>() * dv).collect()
    }

    pub fn mass(&self) -> f64 {
        compensated_sum(self.f[..self.grid.n_v].iter().map(|z| z.re)) * self.grid.dv()
    }

    pub fn momentum(&self) -> f64 {
        compensated_sum(self.f[..self.grid.n_v].iter().enumerate().map(|(j, z)| z.re * self.grid.v(j))) * self.grid.dv()
    }

    /// `∫∫ f² dx dv`.
    pub fn l2(&self) -> f64 {
        let n = self.grid.n_v;
        let zero = compensated_sum(self.f[..n].iter().map(|z| z.norm_sqr()));
        let rest = compensated_sum(self.f[n..].iter().map(|z| z.norm_sqr()));
        (zero + 2.0 * rest) * self.grid.dv()
    }

    /// `Δv Σ_j f(k, v_j) e^{−2πiηv_j}` for any `η`.
    pub fn fhat(&self, k: i64, eta: f64) -> Complex64 {
        let row = self.row(k);
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, z) in row.iter().enumerate() {
            acc += z * Complex64::from_polar(1.0, -2.0 * PI * eta * self.grid.v(j));
        }
        acc * self.grid.dv()
    }

    /// Double-Fourier image on the dual η grid, modes `−k_max..=k_max`.
    pub fn spectral(&self) -> Result<SpectralDistribution> {
        let k = self.grid.k_max as i64;
        let rows: Vec<Vec<Complex64>> = (-k..=k).map(|m| self.row(m)).collect();
        SpectralDistribution::from_velocity_samples(&rows, self.grid.dv())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::InvalidArgument("states live on different grids".into()));
        }
        Ok(Self { grid: self.grid, time: self.time, f: self.f.iter().zip(&other.f).map(|(a, b)| a - b).collect() })
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.f.iter().zip(&other.f).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}
