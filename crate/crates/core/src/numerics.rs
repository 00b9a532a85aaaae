//! Shared numerical plumbing: compensated sums, adaptive quadrature,
//! Gauss-Legendre panels, a small Nelder-Mead minimiser and the centered
//! DFT pair used by the η/v grids.

use num_complex::Complex64;
use rustfft::FftPlanner;

/// Neumaier-compensated accumulator. Results are independent of summation
/// order to a few ulps, which keeps parallel reductions reproducible.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = NeumaierSum::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<NeumaierSum>().value()
}

/// Adaptive Simpson settings. The defaults are an absolute floor of 1e-13
/// and a relative target of 1e-9.
#[derive(Debug, Clone, Copy)]
pub struct Simpson {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Uniform panels laid down before adaptation starts; narrow features
    /// smaller than a panel can otherwise be missed entirely.
    pub initial_panels: usize,
    pub max_depth: u32,
}

impl Default for Simpson {
    fn default() -> Self {
        Self {
            abs_tol: 1e-13,
            rel_tol: 1e-9,
            initial_panels: 16,
            max_depth: 40,
        }
    }
}

trait QuadValue: Copy + std::ops::Add<Output = Self> + std::ops::Sub<Output = Self> {
    fn scale(self, s: f64) -> Self;
    fn magnitude(self) -> f64;
    fn zero() -> Self;
}

impl QuadValue for f64 {
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn magnitude(self) -> f64 {
        self.abs()
    }
    fn zero() -> Self {
        0.0
    }
}

impl QuadValue for Complex64 {
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn magnitude(self) -> f64 {
        self.norm()
    }
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
}

impl Simpson {
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> f64 {
        self.run(&f, a, b)
    }

    pub fn integrate_complex<F: Fn(f64) -> Complex64>(&self, f: F, a: f64, b: f64) -> Complex64 {
        self.run(&f, a, b)
    }

    /// Integrates over `[a, b]` split at the given interior breakpoints.
    /// Use this when the integrand has kinks at known locations.
    pub fn integrate_with_breaks<F: Fn(f64) -> f64>(
        &self,
        f: F,
        a: f64,
        b: f64,
        breaks: &[f64],
    ) -> f64 {
        let mut pts: Vec<f64> = breaks.iter().copied().filter(|&x| x > a && x < b).collect();
        pts.push(a);
        pts.push(b);
        pts.sort_by(|x, y| x.total_cmp(y));
        pts.dedup_by(|x, y| (*x - *y).abs() <= 1e-14 * (1.0 + y.abs()));
        let per = Simpson {
            initial_panels: (self.initial_panels / pts.len().max(1)).max(2),
            ..*self
        };
        compensated_sum(pts.windows(2).map(|w| per.run(&f, w[0], w[1])))
    }

    fn run<V: QuadValue, F: Fn(f64) -> V>(&self, f: &F, a: f64, b: f64) -> V {
        if b == a {
            return V::zero();
        }
        let n = self.initial_panels.max(1);
        let h = (b - a) / n as f64;
        // coarse estimate fixes the absolute target for every panel
        let mut panels = Vec::with_capacity(n);
        let mut coarse = V::zero();
        for i in 0..n {
            let x0 = a + h * i as f64;
            let x1 = if i + 1 == n { b } else { x0 + h };
            let xm = 0.5 * (x0 + x1);
            let (f0, fm, f1) = (f(x0), f(xm), f(x1));
            let s = (f0 + fm.scale(4.0) + f1).scale((x1 - x0) / 6.0);
            coarse = coarse + s;
            panels.push((x0, x1, f0, fm, f1, s));
        }
        let mut abs_mag = 0.0;
        for p in &panels {
            abs_mag += p.5.magnitude();
        }
        let tol = self.abs_tol.max(self.rel_tol * coarse.magnitude().max(1e-3 * abs_mag));
        let panel_tol = tol / n as f64;
        let mut total = V::zero();
        for (x0, x1, f0, fm, f1, s) in panels {
            total = total + self.recurse(f, x0, x1, f0, fm, f1, s, panel_tol, self.max_depth);
        }
        total
    }

    #[allow(clippy::too_many_arguments)]
    fn recurse<V: QuadValue, F: Fn(f64) -> V>(
        &self,
        f: &F,
        a: f64,
        b: f64,
        fa: V,
        fm: V,
        fb: V,
        whole: V,
        tol: f64,
        depth: u32,
    ) -> V {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = (fa + flm.scale(4.0) + fm).scale((m - a) / 6.0);
        let right = (fm + frm.scale(4.0) + fb).scale((b - m) / 6.0);
        let delta = left + right - whole;
        if depth == 0 || delta.magnitude() <= 15.0 * tol {
            return left + right + delta.scale(1.0 / 15.0);
        }
        self.recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + self.recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for j in 2..=n {
                    let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                    p0 = p1;
                    p1 = p2;
                }
                let p = if n == 1 { x } else { p1 };
                let pm1 = if n == 1 { 1.0 } else { p0 };
                dp = n as f64 * (x * p - pm1) / (x * x - 1.0);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> f64 {
        let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
        h * compensated_sum(self.nodes.iter().zip(&self.weights).map(|(x, w)| w * f(c + h * x)))
    }

    pub fn integrate_complex<F: Fn(f64) -> Complex64>(&self, f: F, a: f64, b: f64) -> Complex64 {
        let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
        let mut s = Complex64::new(0.0, 0.0);
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            s += f(c + h * x) * *w;
        }
        s * h
    }
}

/// Result of a Nelder-Mead minimisation.
#[derive(Debug, Clone, Copy)]
pub struct Minimum {
    pub x: [f64; 2],
    pub value: f64,
    pub iterations: usize,
}

/// Two-dimensional Nelder-Mead with the standard coefficients.
pub fn nelder_mead_2d<F: Fn([f64; 2]) -> f64>(
    f: F,
    start: [f64; 2],
    step: [f64; 2],
    ftol: f64,
    max_iter: usize,
) -> Minimum {
    let mut simplex = [
        start,
        [start[0] + step[0], start[1]],
        [start[0], start[1] + step[1]],
    ];
    let mut vals = simplex.map(&f);
    let mut iter = 0;
    while iter < max_iter {
        iter += 1;
        let mut idx = [0usize, 1, 2];
        idx.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        simplex = idx.map(|i| simplex[i]);
        vals = idx.map(|i| vals[i]);
        let spread = (vals[2] - vals[0]).abs();
        let size = (simplex[2][0] - simplex[0][0]).abs() + (simplex[2][1] - simplex[0][1]).abs();
        if spread <= ftol * (vals[0].abs() + 1e-300) || size < 1e-15 {
            break;
        }
        let c = [
            0.5 * (simplex[0][0] + simplex[1][0]),
            0.5 * (simplex[0][1] + simplex[1][1]),
        ];
        let along = |t: f64| [c[0] + t * (simplex[2][0] - c[0]), c[1] + t * (simplex[2][1] - c[1])];
        let xr = along(-1.0);
        let fr = f(xr);
        if fr < vals[0] {
            let xe = along(-2.0);
            let fe = f(xe);
            if fe < fr {
                simplex[2] = xe;
                vals[2] = fe;
            } else {
                simplex[2] = xr;
                vals[2] = fr;
            }
        } else if fr < vals[1] {
            simplex[2] = xr;
            vals[2] = fr;
        } else {
            let (xc, fc) = if fr < vals[2] {
                let x = along(-0.5);
                (x, f(x))
            } else {
                let x = along(0.5);
                (x, f(x))
            };
            if fc < vals[2].min(fr) {
                simplex[2] = xc;
                vals[2] = fc;
            } else {
                for i in 1..3 {
                    simplex[i] = [
                        0.5 * (simplex[0][0] + simplex[i][0]),
                        0.5 * (simplex[0][1] + simplex[i][1]),
                    ];
                    vals[i] = f(simplex[i]);
                }
            }
        }
    }
    let best = (0..3).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap_or(0);
    Minimum {
        x: simplex[best],
        value: vals[best],
        iterations: iter,
    }
}

/// Centered DFT pair between an η grid `η_j = (j - n/2) Δη` and its dual
/// v grid `v_m = (m - n/2) Δv`, `Δv = 1/(n Δη)`.
///
/// `forward` computes `Δv Σ_m g(v_m) e^{-2πi η_j v_m}` and `inverse`
/// computes `Δη Σ_j F(η_j) e^{2πi η_j v_m}`; the two are exact inverses.
pub struct CenteredDft {
    n: usize,
    fwd: std::sync::Arc<dyn rustfft::Fft<f64>>,
    inv: std::sync::Arc<dyn rustfft::Fft<f64>>,
}

impl std::fmt::Debug for CenteredDft {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CenteredDft").field("n", &self.n).finish()
    }
}

impl CenteredDft {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    fn roll_in(&self, data: &[Complex64], buf: &mut [Complex64]) {
        let c = self.n / 2;
        for (j, x) in data.iter().enumerate() {
            buf[(j + self.n - c) % self.n] = *x;
        }
    }

    fn roll_out(&self, buf: &[Complex64], out: &mut [Complex64], scale: f64) {
        let c = self.n / 2;
        for (m, y) in out.iter_mut().enumerate() {
            *y = buf[(m + self.n - c) % self.n] * scale;
        }
    }

    /// v samples -> η samples, scaled by `dv`.
    pub fn forward(&self, samples: &[Complex64], dv: f64, out: &mut [Complex64]) {
        let mut buf = vec![Complex64::new(0.0, 0.0); self.n];
        self.roll_in(samples, &mut buf);
        self.fwd.process(&mut buf);
        self.roll_out(&buf, out, dv);
    }

    /// η samples -> v samples, scaled by `d_eta`.
    pub fn inverse(&self, coeffs: &[Complex64], d_eta: f64, out: &mut [Complex64]) {
        let mut buf = vec![Complex64::new(0.0, 0.0); self.n];
        self.roll_in(coeffs, &mut buf);
        self.inv.process(&mut buf);
        self.roll_out(&buf, out, d_eta);
    }
}
