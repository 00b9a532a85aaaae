use serde::Serialize;

use super::kernel::{echo_kernel, EchoKernelSpec};
use crate::error::{Error, Result};
use crate::numerics::Simpson;

/// Tail of the backward moment beyond `T_max` must stay below this fraction
/// of the computed integral.
pub const TAIL_FRACTION: f64 = 1e-10;

fn quad() -> Simpson {
    Simpson { abs_tol: 1e-13, rel_tol: 1e-9, initial_panels: 8, max_depth: 40 }
}

fn check(spec: &EchoKernelSpec, nu: f64) -> Result<()> {
    spec.validate()?;
    if !(nu > 0.0 && nu < spec.alpha) {
        return Err(Error::InvalidArgument(format!("need 0 < nu < alpha (nu = {nu}, alpha = {})", spec.alpha)));
    }
    Ok(())
}

/// Resonant `s` in `(0, t)` for `|l| ≤ 2` where the kernel has its sharpest kinks.
fn forward_breaks(spec: &EchoKernelSpec, nu: f64, t: f64) -> Vec<f64> {
    let jmax = spec.trunc.min(4 * (nu * t).ceil() as i64 + 64);
    let mut b = Vec::new();
    for l in 1..=2i64 {
        for j in 1..=jmax {
            b.push(j as f64 * t / (j + l) as f64);
        }
    }
    b
}

/// `e^{−νt} ∫₀ᵗ K(t,s) e^{νs} ds` and the shape `1/(α³ν^{1+γ}t^{γ−1})`.
pub fn echo_moment_forward(spec: &EchoKernelSpec, nu: f64, t: f64) -> Result<(f64, f64)> {
    echo_moment_forward_with(spec, nu, t, &quad())
}

pub fn echo_moment_forward_with(spec: &EchoKernelSpec, nu: f64, t: f64, q: &Simpson) -> Result<(f64, f64)> {
    check(spec, nu)?;
    if !(t > 0.0) {
        return Err(Error::InvalidArgument(format!("need t > 0 (got {t})")));
    }
    let breaks = forward_breaks(spec, nu, t);
    let numeric = q.integrate_with_breaks(|s| echo_kernel(spec, t, s) * (-nu * (t - s)).exp(), 0.0, t, &breaks);
    let shape = 1.0 / (spec.alpha.powi(3) * nu.powf(1.0 + spec.gamma) * t.powf(spec.gamma - 1.0));
    Ok((numeric, shape))
}

/// `e^{νs} ∫_s^{T_max} e^{−νt} K(t,s) dt` and the shape `1/(α²ν) + 1/(αν^γ)`.
///
/// Since `K(t,s) ≤ 1+s`, the dropped tail is at most `(1+s)e^{−ν(T_max−s)}/ν`;
/// [`Error::TailNotResolved`] is raised when that exceeds [`TAIL_FRACTION`]
/// of the result.
pub fn echo_moment_backward(spec: &EchoKernelSpec, nu: f64, s: f64, t_max: f64) -> Result<(f64, f64)> {
    echo_moment_backward_with(spec, nu, s, t_max, &quad())
}

pub fn echo_moment_backward_with(
    spec: &EchoKernelSpec,
    nu: f64,
    s: f64,
    t_max: f64,
    q: &Simpson,
) -> Result<(f64, f64)> {
    check(spec, nu)?;
    if !(s >= 0.0) || !(t_max > s) {
        return Err(Error::InvalidArgument(format!("need 0 <= s < T_max (got {s}, {t_max})")));
    }
    // resonant t = s(|k|+|l|)/|k| for small |k|
    let mut breaks = Vec::new();
    if s > 0.0 {
        for k in 1..=8i64 {
            for l in 1..=64i64 {
                breaks.push(s * (k + l) as f64 / k as f64);
            }
        }
    }
    let numeric = q.integrate_with_breaks(|t| echo_kernel(spec, t, s) * (-nu * (t - s)).exp(), s, t_max, &breaks);
    let tail = (1.0 + s) * (-nu * (t_max - s)).exp() / nu;
    if tail > TAIL_FRACTION * numeric {
        return Err(Error::TailNotResolved { edge: tail, total: numeric });
    }
    let shape = 1.0 / (spec.alpha * spec.alpha * nu) + 1.0 / (spec.alpha * nu.powf(spec.gamma));
    Ok((numeric, shape))
}

/// Smallest `T_max` for which the backward tail majorant meets
/// [`TAIL_FRACTION`] relative to `floor`, a lower bound on the integral.
pub fn backward_horizon(nu: f64, s: f64, floor: f64) -> f64 {
    s + ((1.0 + s) / (nu * TAIL_FRACTION * floor)).ln().max(0.0) / nu
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentRow {
    pub nu: f64,
    /// `t` for the forward moment, `s` for the backward one.
    pub time: f64,
    pub numeric: f64,
    pub shape: f64,
    pub ratio: f64,
}

pub fn forward_scan(spec: &EchoKernelSpec, nus: &[f64], times: &[f64]) -> Result<Vec<MomentRow>> {
    use rayon::prelude::*;
    let pairs: Vec<(f64, f64)> = nus.iter().flat_map(|&n| times.iter().map(move |&t| (n, t))).collect();
    pairs
        .par_iter()
        .map(|&(nu, t)| {
            let (numeric, shape) = echo_moment_forward(spec, nu, t)?;
            Ok(MomentRow { nu, time: t, numeric, shape, ratio: numeric / shape })
        })
        .collect()
}

/// Backward moments with `T_max` chosen from the lower bound
/// `∫_s^{s+1} e^{−ν(t−s)}K(t,s) dt ≥ e^{−ν} min K`.
pub fn backward_scan(spec: &EchoKernelSpec, nus: &[f64], starts: &[f64]) -> Result<Vec<MomentRow>> {
    use rayon::prelude::*;
    let pairs: Vec<(f64, f64)> = nus.iter().flat_map(|&n| starts.iter().map(move |&s| (n, s))).collect();
    pairs
        .par_iter()
        .map(|&(nu, s)| {
            let floor = (-nu).exp() * echo_kernel(spec, s + 1.0, s).min(echo_kernel(spec, s.max(1e-3), s));
            let t_max = backward_horizon(nu, s, floor);
            let (numeric, shape) = echo_moment_backward(spec, nu, s, t_max)?;
            Ok(MomentRow { nu, time: s, numeric, shape, ratio: numeric / shape })
        })
        .collect()
}

/// Calibrate-then-freeze: twice the largest observed ratio.
pub fn calibrate(rows: &[MomentRow]) -> f64 {
    2.0 * rows.iter().map(|r| r.ratio).fold(0.0, f64::max)
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}
