//! Decay-rate and linear least-squares fitting.

use crate::{Error, Result};

/// Result of an exponential-decay fit y ≈ A·exp(−rate·t).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpFit {
    /// Decay rate (1/s)
    pub rate: f64,
    /// Fitted initial value A
    pub amplitude: f64,
    /// Weighted RMS of the log-space residuals
    pub residual_rms: f64,
}

/// Fit y = A·exp(−rate·t) by weighted linear least squares on log y.
/// Weights ∝ y² undo the variance distortion of the log transform, so the
/// fit is equivalent to unweighted least squares on y for small relative
/// noise. Points with t < `discard_before` are ignored.
pub fn fit_exponential_decay(series: &[(f64, f64)], discard_before: f64) -> Result<ExpFit> {
    let pts: Vec<(f64, f64)> = series
        .iter()
        .copied()
        .filter(|&(t, _)| t >= discard_before)
        .collect();
    if pts.len() < 10 {
        return Err(Error::InsufficientData {
            needed: 10,
            got: pts.len(),
        });
    }
    if pts.iter().any(|&(_, y)| !(y > 0.0)) {
        return Err(Error::NonPositiveSample);
    }

    let (mut sw, mut swt, mut swtt, mut swy, mut swty) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(t, y) in &pts {
        let w = y * y;
        let ly = y.ln();
        sw += w;
        swt += w * t;
        swtt += w * t * t;
        swy += w * ly;
        swty += w * t * ly;
    }
    let denom = sw * swtt - swt * swt;
    if denom <= 0.0 {
        return Err(Error::DegenerateAbscissa);
    }
    let slope = (sw * swty - swt * swy) / denom;
    let intercept = (swy - slope * swt) / sw;

    let mut ssr = 0.0;
    for &(t, y) in &pts {
        let r = y.ln() - (intercept + slope * t);
        ssr += y * y * r * r;
    }
    Ok(ExpFit {
        rate: -slope,
        amplitude: intercept.exp(),
        residual_rms: (ssr / sw).sqrt(),
    })
}

/// Ordinary least-squares line fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    pub intercept_stderr: f64,
}

/// Fit y = slope·x + intercept; exact on affine data. Standard errors come
/// from the residual variance with n−2 degrees of freedom.
pub fn fit_linear(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    if x.len() != y.len() || x.len() < 3 {
        return Err(Error::InsufficientData {
            needed: 3,
            got: x.len().min(y.len()),
        });
    }
    let n = x.len() as f64;
    let mean_x = x.iter().sum::<f64>() / n;
    let mean_y = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mean_x).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(Error::DegenerateAbscissa);
    }
    let sxy: f64 = x
        .iter()
        .zip(y)
        .map(|(&xi, &yi)| (xi - mean_x) * (yi - mean_y))
        .sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ssr: f64 = x
        .iter()
        .zip(y)
        .map(|(&xi, &yi)| (yi - slope * xi - intercept).powi(2))
        .sum();
    let s2 = ssr / (n - 2.0);
    Ok(LinearFit {
        slope,
        intercept,
        slope_stderr: (s2 / sxx).sqrt(),
        intercept_stderr: (s2 * (1.0 / n + mean_x * mean_x / sxx)).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::assert_rel;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn exact_exponential_recovered() {
        let series: Vec<(f64, f64)> = (0..200)
            .map(|i| {
                let t = i as f64 * 0.01;
                (t, 3.0 * (-1.02 * t).exp())
            })
            .collect();
        let fit = fit_exponential_decay(&series, 0.0).unwrap();
        assert_rel(fit.rate, 1.02, 1e-10);
        assert_rel(fit.amplitude, 3.0, 1e-10);
        assert!(fit.residual_rms < 1e-12);
    }

    #[test]
    fn discard_window_applies() {
        // corrupt the early samples; the fit must ignore them
        let series: Vec<(f64, f64)> = (0..500)
            .map(|i| {
                let t = i as f64 * 0.005;
                let y = 2.0 * (-0.8 * t).exp();
                (t, if t < 0.2 { y * 1.5 } else { y })
            })
            .collect();
        let fit = fit_exponential_decay(&series, 0.2).unwrap();
        assert_rel(fit.rate, 0.8, 1e-10);
    }

    #[test]
    fn noisy_rate_within_one_percent() {
        // 1% multiplicative noise, 1000 points over three decay times
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let rate = 1.02;
        let series: Vec<(f64, f64)> = (0..1000)
            .map(|i| {
                let t = i as f64 * (3.0 / rate / 1000.0);
                // sum of three U(-1,1) draws: approximately N(0, 1)
                let noise: f64 = rng.gen_range(-1.0..1.0)
                    + rng.gen_range(-1.0..1.0)
                    + rng.gen_range(-1.0..1.0);
                (t, 3.0 * (-rate * t).exp() * (1.0 + 0.01 * noise))
            })
            .collect();
        let fit = fit_exponential_decay(&series, 0.0).unwrap();
        assert!(
            (fit.rate - rate).abs() / rate < 0.01,
            "rate {} vs {}",
            fit.rate,
            rate
        );
    }

    #[test]
    fn rejects_bad_input() {
        let short: Vec<(f64, f64)> = (0..5).map(|i| (i as f64, 1.0)).collect();
        assert!(matches!(
            fit_exponential_decay(&short, 0.0),
            Err(Error::InsufficientData { .. })
        ));
        let neg: Vec<(f64, f64)> = (0..20).map(|i| (i as f64, 1.0 - 0.1 * i as f64)).collect();
        assert!(matches!(
            fit_exponential_decay(&neg, 0.0),
            Err(Error::NonPositiveSample)
        ));
    }

    #[test]
    fn linear_exact() {
        let x = [0.0, 1.0, 2.0];
        let y = [1.0, 3.0, 5.0];
        let fit = fit_linear(&x, &y).unwrap();
        assert_rel(fit.slope, 2.0, 1e-12);
        assert_rel(fit.intercept, 1.0, 1e-12);
        assert!(fit.slope_stderr < 1e-12);
        assert!(fit.intercept_stderr < 1e-12);
    }

    #[test]
    fn linear_stderr_reasonable() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let x: Vec<f64> = (0..100).map(|i| i as f64 / 10.0).collect();
        let y: Vec<f64> = x
            .iter()
            .map(|&xi| 2.0 * xi + 1.0 + rng.gen_range(-0.1..0.1))
            .collect();
        let fit = fit_linear(&x, &y).unwrap();
        assert!((fit.slope - 2.0).abs() < 4.0 * fit.slope_stderr);
        assert!((fit.intercept - 1.0).abs() < 4.0 * fit.intercept_stderr);
        assert!(fit.slope_stderr > 0.0);
    }

    #[test]
    fn linear_degenerate_rejected() {
        let x = [2.0, 2.0, 2.0];
        let y = [1.0, 2.0, 3.0];
        assert!(matches!(fit_linear(&x, &y), Err(Error::DegenerateAbscissa)));
    }
}
