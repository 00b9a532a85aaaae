use serde::Serialize;

use crate::error::{Error, Result};

pub const MIN_PEAKS: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DampingFit {
    /// Slope of `log|value|` through the peak envelope; negative when damped.
    pub rate: f64,
    pub intercept: f64,
    /// RMS of the log residuals.
    pub residual: f64,
    pub peaks: Vec<(f64, f64)>,
}

/// Least-squares line through the log of the local maxima of `|values|`
/// inside `window`, each refined by a parabola in the log domain.
pub fn damping_rate_fit(times: &[f64], values: &[f64], window: (f64, f64)) -> Result<DampingFit> {
    if times.len() != values.len() {
        return Err(Error::InvalidArgument("times and values differ in length".into()));
    }
    let mut peaks = Vec::new();
    for i in 1..values.len().saturating_sub(1) {
        let (a, b, c) = (values[i - 1].abs(), values[i].abs(), values[i + 1].abs());
        if !(b > a && b >= c) || times[i] < window.0 || times[i] > window.1 || a <= 0.0 || c <= 0.0 {
            continue;
        }
        let (la, lb, lc) = (a.ln(), b.ln(), c.ln());
        let curv = la - 2.0 * lb + lc;
        let off = if curv < 0.0 { 0.5 * (la - lc) / curv } else { 0.0 };
        let h = times[i + 1] - times[i];
        peaks.push((times[i] + off * h, lb - 0.25 * (la - lc) * off));
    }
    if peaks.len() < MIN_PEAKS {
        return Err(Error::TooFewPeaks { found: peaks.len(), needed: MIN_PEAKS });
    }
    let n = peaks.len() as f64;
    let mt = peaks.iter().map(|p| p.0).sum::<f64>() / n;
    let my = peaks.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = peaks.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    let sxx: f64 = peaks.iter().map(|p| (p.0 - mt).powi(2)).sum();
    let rate = sxy / sxx;
    let intercept = my - rate * mt;
    let residual = (peaks.iter().map(|p| (p.1 - intercept - rate * p.0).powi(2)).sum::<f64>() / n).sqrt();
    let peaks = peaks.into_iter().map(|(t, y)| (t, y.exp())).collect();
    Ok(DampingFit { rate, intercept, residual, peaks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::VelocityProfile;

    #[test]
    fn synthetic_exponential() {
        let (g, w) = (0.15, 2.3);
        let times: Vec<f64> = (0..4000).map(|i| i as f64 * 0.01).collect();
        let vals: Vec<f64> = times.iter().map(|t| 3.0 * (-g * t).exp() * (w * t).cos().abs()).collect();
        let fit = damping_rate_fit(&times, &vals, (1.0, 39.0)).unwrap();
        assert!((fit.rate + g).abs() < 1e-6, "{}", fit.rate);
        assert!(fit.residual < 1e-5);
    }

    #[test]
    fn too_few_peaks() {
        let times: Vec<f64> = (0..100).map(|i| i as f64 * 0.1).collect();
        let vals: Vec<f64> = times.iter().map(|t| (-t).exp() * t.cos().abs()).collect();
        assert!(matches!(
            damping_rate_fit(&times, &vals, (0.0, 10.0)),
            Err(Error::TooFewPeaks { .. })
        ));
    }

    #[test]
    fn gaussian_envelope_is_not_linear() {
        // two counter-streaming beams: the trace oscillates under a Gaussian envelope
        let p = VelocityProfile::mixture(&[(0.5, -1.0, 0.05), (0.5, 1.0, 0.05)]).unwrap();
        let times: Vec<f64> = (0..8000).map(|i| i as f64 * 0.001).collect();
        let vals: Vec<f64> = times.iter().map(|&t| p.fourier_1d(t).norm()).collect();
        let fit = damping_rate_fit(&times, &vals, (0.0, 8.0)).unwrap();
        let exp = damping_rate_fit(
            &times,
            &times.iter().map(|t| (-2.0 * t).exp() * (6.0 * std::f64::consts::PI * t).cos().abs()).collect::<Vec<_>>(),
            (0.0, 8.0),
        )
        .unwrap();
        assert!(fit.residual > 0.1 && fit.residual > 1e4 * exp.residual, "{}", fit.residual);
    }
}
