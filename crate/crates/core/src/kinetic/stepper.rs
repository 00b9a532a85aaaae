use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use super::state::{discrete_equilibrium, Grid, PhaseState};
use crate::error::{Error, Result};
use crate::profiles::{Interaction, VelocityProfile};

/// Largest admissible share of non-equilibrium energy in the top eighth of
/// the velocity-Fourier band.
pub const TOP_BAND_LIMIT: f64 = 1e-3;

/// `Ê(k) = 2πikŴ(k)ρ̂(k)` for each listed mode.
pub fn poisson_field(modes: &[i64], rho_hat: &[Complex64], w: &Interaction) -> Result<Vec<Complex64>> {
    if modes.len() != rho_hat.len() {
        return Err(Error::InvalidArgument("one density value per mode".into()));
    }
    modes
        .iter()
        .zip(rho_hat)
        .map(|(&k, &r)| Ok(Complex64::new(0.0, 2.0 * PI * k as f64 * w.hat_1d(k)?) * r))
        .collect()
}

/// Exact solution of `∂_t f = ν(ρf⁰ − f)` at frozen `ρ` over `dt`.
pub fn collision_substep(f: &mut [Complex64], rho: Complex64, dt: f64, nu: f64, f0: &[f64]) {
    if nu == 0.0 {
        return;
    }
    let decay = (-nu * dt).exp();
    let gain = -(-nu * dt).exp_m1();
    for (z, &g) in f.iter_mut().zip(f0) {
        *z = *z * decay + rho * (gain * g);
    }
}

/// Split-step propagator with cached FFT plans.
///
/// One step is `T(dt/2) C(dt/2) V(dt) C(dt/2) T(dt/2)`: exact free transport,
/// exact collisions, and a velocity shift by `A(x)dt` with
/// `A = −E/(4π²)`, the acceleration consistent with the density kernel.
pub struct Stepper {
    grid: Grid,
    nx: usize,
    v_fwd: Arc<dyn Fft<f64>>,
    v_inv: Arc<dyn Fft<f64>>,
    x_fwd: Arc<dyn Fft<f64>>,
    x_inv: Arc<dyn Fft<f64>>,
    f0: Vec<f64>,
    interaction: Interaction,
    nu: f64,
}

impl std::fmt::Debug for Stepper {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Stepper").field("grid", &self.grid).field("nu", &self.nu).finish()
    }
}

impl Stepper {
    pub fn new(grid: Grid, profile: &VelocityProfile, interaction: &Interaction, nu: f64) -> Result<Self> {
        grid.validate()?;
        if profile.dimension() != 1 {
            return Err(Error::InvalidArgument("kinetic solver is one-dimensional".into()));
        }
        if !(nu >= 0.0 && nu.is_finite()) {
            return Err(Error::InvalidArgument(format!("nu must be non-negative, got {nu}")));
        }
        interaction.validate()?;
        let nx = grid.nx();
        let mut planner = FftPlanner::new();
        Ok(Self {
            grid,
            nx,
            v_fwd: planner.plan_fft_forward(grid.n_v),
            v_inv: planner.plan_fft_inverse(grid.n_v),
            x_fwd: planner.plan_fft_forward(nx),
            x_inv: planner.plan_fft_inverse(nx),
            f0: discrete_equilibrium(profile, &grid),
            interaction: *interaction,
            nu,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn equilibrium(&self) -> &[f64] {
        &self.f0
    }

    pub fn field_active(&self) -> bool {
        !self.interaction.is_zero()
    }

    /// Field modes `k = 0..=k_max` of a state.
    pub fn field(&self, state: &PhaseState) -> Vec<Complex64> {
        let rho = state.density();
        let modes: Vec<i64> = (0..=self.grid.k_max as i64).collect();
        poisson_field(&modes, &rho, &self.interaction).expect("interaction validated at construction")
    }

    pub fn transport(&self, state: &mut PhaseState, dt: f64) {
        let n = self.grid.n_v;
        let grid = self.grid;
        state.f.par_chunks_mut(n).enumerate().for_each(|(k, row)| {
            if k == 0 {
                return;
            }
            for (j, z) in row.iter_mut().enumerate() {
                *z *= Complex64::from_polar(1.0, -2.0 * PI * k as f64 * grid.v(j) * dt);
            }
        });
    }

    pub fn collide(&self, state: &mut PhaseState, dt: f64) {
        if self.nu == 0.0 {
            return;
        }
        let rho = state.density();
        let n = self.grid.n_v;
        state.f.par_chunks_mut(n).zip(rho.par_iter()).for_each(|(row, &r)| {
            collision_substep(row, r, dt, self.nu, &self.f0);
        });
    }

    /// Physical `x` nodes `m/nx`.
    pub fn x_nodes(&self) -> Vec<f64> {
        (0..self.nx).map(|m| m as f64 / self.nx as f64).collect()
    }

    /// Real field `Σ_k c_k e^{2πikx}` on the `x` nodes from `c_k`, `k = 0..=k_max`.
    pub fn synthesize(&self, coeffs: &[Complex64]) -> Vec<f64> {
        let mut buf = vec![Complex64::new(0.0, 0.0); self.nx];
        buf[0] = Complex64::new(coeffs[0].re, 0.0);
        for (k, c) in coeffs.iter().enumerate().skip(1) {
            buf[k] = *c;
            buf[self.nx - k] = c.conj();
        }
        self.x_inv.process(&mut buf);
        buf.into_iter().map(|z| z.re).collect()
    }

    /// `f(x, v) ← f(x, v − d(x))` with `d` given on the `x` nodes, by an exact
    /// phase shift of the velocity interpolant.
    pub fn velocity_shift(&self, state: &mut PhaseState, d: &[f64]) {
        let (n, nx, km) = (self.grid.n_v, self.nx, self.grid.k_max);
        // (k, v) -> (x, v): one x-synthesis per velocity node
        let cols: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|j| {
                let mut buf = vec![Complex64::new(0.0, 0.0); nx];
                buf[0] = Complex64::new(state.f[j].re, 0.0);
                for k in 1..=km {
                    let c = state.f[k * n + j];
                    buf[k] = c;
                    buf[nx - k] = c.conj();
                }
                self.x_inv.process(&mut buf);
                buf.into_iter().map(|z| z.re).collect()
            })
            .collect();
        let d_eta = 1.0 / (n as f64 * self.grid.dv());
        let rows: Vec<Vec<f64>> = (0..nx)
            .into_par_iter()
            .map(|m| {
                let mut buf: Vec<Complex64> = (0..n).map(|j| Complex64::new(cols[j][m], 0.0)).collect();
                self.v_fwd.process(&mut buf);
                for (i, z) in buf.iter_mut().enumerate() {
                    let eta = if i < n / 2 { i as f64 } else { i as f64 - n as f64 } * d_eta;
                    if i == n / 2 {
                        *z *= (2.0 * PI * eta * d[m]).cos();
                    } else {
                        *z *= Complex64::from_polar(1.0, -2.0 * PI * eta * d[m]);
                    }
                }
                self.v_inv.process(&mut buf);
                buf.into_iter().map(|z| z.re / n as f64).collect()
            })
            .collect();
        let back: Vec<Vec<Complex64>> = (0..n)
            .into_par_iter()
            .map(|j| {
                let mut buf: Vec<Complex64> = (0..nx).map(|m| Complex64::new(rows[m][j], 0.0)).collect();
                self.x_fwd.process(&mut buf);
                buf.truncate(km + 1);
                buf.iter_mut().for_each(|z| *z /= nx as f64);
                buf
            })
            .collect();
        for (j, col) in back.into_iter().enumerate() {
            for (k, z) in col.into_iter().enumerate() {
                state.f[k * n + j] = z;
            }
        }
    }

    /// Velocity kick `f(x,v) ← f(x, v − amplitude·cos(2π·mode·x))`.
    pub fn kick(&self, state: &mut PhaseState, mode: i64, amplitude: f64) {
        let d: Vec<f64> = self.x_nodes().iter().map(|x| amplitude * (2.0 * PI * mode as f64 * x).cos()).collect();
        self.velocity_shift(state, &d);
    }

    fn advect(&self, state: &mut PhaseState, dt: f64) {
        if !self.field_active() {
            return;
        }
        let e = self.field(state);
        let ex = self.synthesize(&e);
        let d: Vec<f64> = ex.iter().map(|e| -e / (4.0 * PI * PI) * dt).collect();
        self.velocity_shift(state, &d);
    }

    /// Share of the `k ≠ 0` energy in the top eighth of the velocity-Fourier band.
    pub fn top_band_fraction(&self, state: &PhaseState) -> f64 {
        let n = self.grid.n_v;
        let cut = n / 2 - n / 16;
        let (top, total) = state.f[n..]
            .par_chunks(n)
            .map(|row| {
                let mut buf = row.to_vec();
                self.v_fwd.process(&mut buf);
                let mut top = 0.0;
                let mut total = 0.0;
                for (i, z) in buf.iter().enumerate() {
                    let s = if i <= n / 2 { i } else { n - i };
                    let e = z.norm_sqr();
                    total += e;
                    if s >= cut {
                        top += e;
                    }
                }
                (top, total)
            })
            .reduce(|| (0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
        if total > 0.0 {
            top / total
        } else {
            0.0
        }
    }

    /// One split step. With an active field, fails once filamentation
    /// reaches the top of the velocity band.
    pub fn advance(&self, state: &mut PhaseState, dt: f64) -> Result<()> {
        if state.grid != self.grid {
            return Err(Error::InvalidArgument("state grid differs from stepper grid".into()));
        }
        if dt == 0.0 {
            return Ok(());
        }
        self.transport(state, 0.5 * dt);
        self.collide(state, 0.5 * dt);
        self.advect(state, dt);
        self.collide(state, 0.5 * dt);
        self.transport(state, 0.5 * dt);
        state.time += dt;
        if self.field_active() {
            let fraction = self.top_band_fraction(state);
            if fraction > TOP_BAND_LIMIT {
                return Err(Error::ResolutionExceeded { t: state.time, fraction });
            }
        }
        Ok(())
    }
}

/// One step from a fresh propagator; prefer [`Stepper`] in loops.
pub fn step(state: &PhaseState, dt: f64, w: &Interaction, profile: &VelocityProfile, nu: f64) -> Result<PhaseState> {
    let stepper = Stepper::new(state.grid, profile, w, nu)?;
    let mut next = state.clone();
    stepper.advance(&mut next, dt)?;
    Ok(next)
}
