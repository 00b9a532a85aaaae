use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::Simpson;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EchoKernelSpec {
    pub alpha: f64,
    pub gamma: f64,
    /// The supremum runs over `k, l ∈ [−trunc, trunc] \ {0}`.
    pub trunc: i64,
}

impl EchoKernelSpec {
    pub fn new(alpha: f64, gamma: f64) -> Result<Self> {
        let spec = Self { alpha, gamma, trunc: 256 };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_trunc(mut self, trunc: i64) -> Self {
        self.trunc = trunc;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) || !(self.gamma > 1.0) || self.trunc < 1 {
            return Err(Error::InvalidArgument(format!(
                "need 0 < alpha < 1, gamma > 1, trunc >= 1 (got {}, {}, {})",
                self.alpha, self.gamma, self.trunc
            )));
        }
        Ok(())
    }

    fn log_term(&self, t: f64, s: f64, k: i64, l: i64) -> f64 {
        let (kf, lf) = (k as f64, l as f64);
        let d = (kf - lf).abs();
        // (t−s)/t → 1 as t → 0 with s = 0
        let frac = if t > 0.0 { (t - s) / t } else { 1.0 };
        -self.alpha * lf.abs() - self.alpha * frac * d - self.alpha * (kf * (t - s) + lf * s).abs()
            - d.powf(self.gamma).ln_1p()
    }
}

/// `(1+s) sup_{k,l} e^{−α|l|} e^{−α(t−s)|k−l|/t} e^{−α|k(t−s)+ls|} / (1+|k−l|^γ)`.
///
/// For fixed `l` the maximising `k` lies between `l` and the resonance
/// `k* = −ls/(t−s)`, where the exponent is linear in `|k−l|` and
/// `log(1+|k−l|^γ)` is concave beyond `|k−l| = (γ−1)^{1/γ} < 2`; the sup
/// over that range is attained at the small offsets or the far end, so only
/// a handful of candidates per `l` need evaluating. `l` stops once `e^{−α|l|}`
/// alone falls below the running maximum.
pub fn echo_kernel(spec: &EchoKernelSpec, t: f64, s: f64) -> f64 {
    debug_assert!(t >= 0.0 && (0.0..=t).contains(&s));
    let tr = spec.trunc;
    let mut best = f64::NEG_INFINITY;
    let mut cands: Vec<i64> = Vec::with_capacity(24);
    for la in 1..=tr {
        if -spec.alpha * la as f64 <= best {
            break;
        }
        for l in [la, -la] {
            cands.clear();
            for d in -3..=3 {
                cands.push(l + d);
            }
            let far = if t > s { -(l as f64) * s / (t - s) } else { -(l.signum() as f64) * f64::INFINITY };
            let far = far.clamp(-(tr as f64), tr as f64);
            for c in [far.floor(), far.ceil()] {
                let c = c as i64;
                cands.extend_from_slice(&[c - 1, c, c + 1]);
            }
            cands.extend_from_slice(&[-1, 1]);
            for &k in &cands {
                if k == 0 || k.abs() > tr {
                    continue;
                }
                best = best.max(spec.log_term(t, s, k, l));
            }
        }
    }
    (1.0 + s) * best.exp()
}

/// Brute force over the full truncation box; test oracle for [`echo_kernel`].
pub fn echo_kernel_brute(spec: &EchoKernelSpec, t: f64, s: f64) -> f64 {
    let tr = spec.trunc;
    let mut best = f64::NEG_INFINITY;
    for l in (-tr..=tr).filter(|&l| l != 0) {
        for k in (-tr..=tr).filter(|&k| k != 0) {
            best = best.max(spec.log_term(t, s, k, l));
        }
    }
    (1.0 + s) * best.exp()
}

/// Time `t* = s(k−l)/k` of the echo at mode `k` from a mode-`l` wave forced
/// at time `s`; `None` when it does not lie in the future.
pub fn echo_time(l: i64, k: i64, s: f64) -> Option<f64> {
    if k == 0 || !(s > 0.0) {
        return None;
    }
    let t = s * (k - l) as f64 / k as f64;
    (t > s).then_some(t)
}

/// Quadrature of `∫₀^{t/2} e^{−α|k(t−s)+ls|}(1+s) ds` next to the explicit
/// case bound for `k > 0`.
pub fn piecewise_integral_check(k: i64, l: i64, alpha: f64, t: f64) -> Result<(f64, f64)> {
    if k <= 0 || !(alpha > 0.0) || !(t > 0.0) {
        return Err(Error::InvalidArgument(format!("need k > 0, alpha > 0, t > 0 (got {k}, {alpha}, {t})")));
    }
    let (kf, lf) = (k as f64, l as f64);
    let mut breaks = Vec::new();
    if l != k {
        let s0 = kf * t / (kf - lf);
        if s0 > 0.0 && s0 < 0.5 * t {
            breaks.push(s0);
        }
    }
    let simpson = Simpson { initial_panels: 64, rel_tol: 1e-12, abs_tol: 1e-300, ..Simpson::default() };
    let numeric = simpson.integrate_with_breaks(
        |s| (-alpha * (kf * (t - s) + lf * s).abs()).exp() * (1.0 + s),
        0.0,
        0.5 * t,
        &breaks,
    );
    let d = (kf - lf).abs();
    let bound = if l > k {
        1.0 / (alpha * d) + 1.0 / (alpha * alpha * d * d)
    } else if l == k {
        (-alpha * kf * t).exp() * (0.5 * t + t * t / 8.0)
    } else if l >= -k {
        (-alpha * (kf + lf) * t / 2.0).exp() / (alpha * d) * (1.0 + 0.5 * t)
    } else {
        2.0 / (alpha * d) + 2.0 * kf * t / (alpha * d * d) + 1.0 / (alpha * alpha * d * d)
    };
    Ok((numeric, bound))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelRow {
    pub t: f64,
    pub s: f64,
    pub value: f64,
}

/// Sampled `K^{(α),γ}(t,s)` together with the data needed to regenerate it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelTable {
    pub spec: EchoKernelSpec,
    pub rows: Vec<KernelRow>,
}

/// `K(t_i, s_j)` for each `t_i` and `n_s + 1` equally spaced `s_j ∈ [0, t_i]`.
pub fn kernel_table(spec: &EchoKernelSpec, times: &[f64], n_s: usize) -> Result<KernelTable> {
    spec.validate()?;
    if times.iter().any(|&t| !(t > 0.0)) || n_s == 0 {
        return Err(Error::InvalidArgument("kernel table needs t > 0 and n_s >= 1".into()));
    }
    let rows = times
        .par_iter()
        .flat_map_iter(|&t| {
            (0..=n_s).map(move |j| {
                let s = t * j as f64 / n_s as f64;
                KernelRow { t, s, value: echo_kernel(spec, t, s) }
            })
        })
        .collect();
    Ok(KernelTable { spec: *spec, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn diagonal_value() {
        let spec = EchoKernelSpec::new(0.3, 2.0).unwrap().with_trunc(40);
        for &t in &[0.5, 2.0, 7.0] {
            let v = echo_kernel(&spec, t, t);
            let expected = (1.0 + t) * (-0.3 * (1.0 + t)).exp();
            assert!((v - expected).abs() < 1e-14 * expected);
            assert_eq!(v, echo_kernel_brute(&spec, t, t));
        }
    }

    #[test]
    fn matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..300 {
            let alpha = rng.gen_range(0.05..0.9);
            let gamma = rng.gen_range(1.05..4.0);
            let spec = EchoKernelSpec::new(alpha, gamma).unwrap().with_trunc(30);
            let t = rng.gen_range(0.1..60.0);
            let s = rng.gen_range(0.0..t);
            let a = echo_kernel(&spec, t, s);
            let b = echo_kernel_brute(&spec, t, s);
            assert!((a - b).abs() <= 1e-14 * b, "alpha {alpha} gamma {gamma} t {t} s {s}: {a} vs {b}");
        }
    }

    #[test]
    fn s_zero_decays_in_t() {
        let spec = EchoKernelSpec::new(0.2, 2.0).unwrap();
        let mut last = f64::INFINITY;
        for &t in &[1.0, 2.0, 5.0, 10.0, 20.0] {
            let v = echo_kernel(&spec, t, 0.0);
            assert!(v < last);
            last = v;
        }
    }

    #[test]
    fn origin_is_the_limit_from_above() {
        // k = l = 1 attains e^{−α} at t = s = 0
        let spec = EchoKernelSpec::new(0.3, 2.0).unwrap();
        let at0 = echo_kernel(&spec, 0.0, 0.0);
        assert!((at0 - (-0.3f64).exp()).abs() < 1e-15);
        assert!((echo_kernel(&spec, 1e-9, 0.0) - at0).abs() < 1e-9);
        assert_eq!(at0, echo_kernel_brute(&spec.with_trunc(16), 0.0, 0.0));
    }

    #[test]
    fn doubling_truncation_changes_nothing() {
        let spec = EchoKernelSpec::new(0.2, 2.0).unwrap();
        let wide = spec.with_trunc(512);
        for &(t, s) in &[(10.0, 3.0), (50.0, 49.0), (100.0, 20.0), (30.0, 0.0)] {
            assert_eq!(echo_kernel(&spec, t, s), echo_kernel(&wide, t, s));
        }
    }

    #[test]
    fn echo_times() {
        assert_eq!(echo_time(1, -1, 5.0), Some(10.0));
        assert_eq!(echo_time(2, -1, 3.0), Some(9.0));
        assert_eq!(echo_time(1, 1, 4.0), None);
    }

    #[test]
    fn resonance_maximises_factor() {
        for &(l, k, s) in &[(1i64, -1i64, 5.0), (2, -1, 3.0), (3, -2, 2.0)] {
            let t_star = echo_time(l, k, s).unwrap();
            let f = |t: f64| (-0.2 * (k as f64 * (t - s) + l as f64 * s).abs()).exp();
            let grid: Vec<f64> = (0..=40000).map(|i| s + i as f64 * 1e-3).collect();
            let arg = grid.iter().copied().max_by(|a, b| f(*a).total_cmp(&f(*b))).unwrap();
            assert!((arg - t_star).abs() < 1e-9, "{arg} vs {t_star}");
        }
    }

    #[test]
    fn reduced_majorant_for_early_forcing() {
        let spec = EchoKernelSpec::new(0.25, 2.0).unwrap().with_trunc(25);
        for &(t, s) in &[(10.0, 2.0), (8.0, 4.0), (30.0, 1.0)] {
            let mut best = 0.0f64;
            for l in (-25..=25i64).filter(|&l| l != 0) {
                for k in (-25..=25i64).filter(|&k| k != 0) {
                    let v = (-0.25 * (l.abs() as f64) - 0.25 * ((k - l).abs() as f64) / 2.0
                        - 0.25 * (k as f64 * (t - s) + l as f64 * s).abs())
                    .exp();
                    best = best.max(v);
                }
            }
            assert!(echo_kernel(&spec, t, s) <= (1.0 + s) * best);
        }
    }

    #[test]
    fn piecewise_cases() {
        let (n, b) = piecewise_integral_check(2, 2, 0.3, 4.0).unwrap();
        assert!(n <= b);
        let (n, b) = piecewise_integral_check(1, 3, 0.3, 4.0).unwrap();
        assert!(n <= b);
        let (n, b) = piecewise_integral_check(2, -5, 0.3, 6.0).unwrap();
        assert!(n <= b);
        assert!(piecewise_integral_check(0, 1, 0.3, 1.0).is_err());
    }

    #[test]
    fn table_rows() {
        let spec = EchoKernelSpec::new(0.2, 2.0).unwrap();
        let tab = kernel_table(&spec, &[1.0, 2.0], 4).unwrap();
        assert_eq!(tab.rows.len(), 10);
        assert_eq!(tab.rows[9].value, echo_kernel(&spec, 2.0, 2.0));
    }
}
