// SPDX-License-Identifier: MIT OR Apache-2.0

//! Intraday seasonality removal: `x_t = X̃_t / φ̂(τ_t)` with `φ̂` a smoothed
//! multiplicative time-of-day profile normalised to mean one.

use ebs_core::series::DurationSeries;
use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{CliError, CliResult};

/// Session and binning for the time-of-day profile, in seconds since
/// midnight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeasonalConfig {
    pub session_start: f64,
    pub session_end: f64,
    pub bin_width: f64,
}

impl Default for SeasonalConfig {
    fn default() -> Self {
        Self { session_start: 9.5 * 3600.0, session_end: 16.0 * 3600.0, bin_width: 600.0 }
    }
}

impl SeasonalConfig {
    pub fn bins(&self) -> usize {
        ((self.session_end - self.session_start) / self.bin_width).ceil().max(0.0) as usize
    }

    pub fn validate(&self) -> CliResult<()> {
        if !(self.bin_width > 0.0 && self.session_end > self.session_start) {
            return Err(CliError::Usage("session must end after it starts and bins must have positive width".into()));
        }
        Ok(())
    }

    fn centre(&self, bin: usize) -> f64 {
        self.session_start + (bin as f64 + 0.5) * self.bin_width
    }

    fn bin_of(&self, tod: f64) -> Option<usize> {
        if tod < self.session_start || tod >= self.session_end {
            return None;
        }
        Some((((tod - self.session_start) / self.bin_width) as usize).min(self.bins() - 1))
    }
}

/// Estimated multiplicative seasonal factor on the bin-centre grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeasonalProfile {
    /// Bin centres, seconds since midnight.
    pub knots: Vec<f64>,
    pub phi: Vec<f64>,
    /// Smoothing level selected by cross-validation.
    pub lambda: f64,
}

/// Natural cubic smoothing spline through weighted points.
#[derive(Debug, Clone)]
struct Spline {
    t: Vec<f64>,
    g: Vec<f64>,
    /// Second derivatives at the knots; zero at both ends.
    gamma: Vec<f64>,
}

impl Spline {
    /// Minimise `Σ w_i (y_i − g(t_i))² + λ ∫ g''²` by the Reinsch
    /// algorithm. `t` must be strictly increasing and `w` positive.
    fn fit(t: &[f64], y: &[f64], w: &[f64], lambda: f64) -> Spline {
        let n = t.len();
        if n < 3 {
            return Spline { t: t.to_vec(), g: y.to_vec(), gamma: vec![0.0; n] };
        }
        let h: Vec<f64> = t.windows(2).map(|p| p[1] - p[0]).collect();
        let m = n - 2;
        let mut q = DMatrix::<f64>::zeros(n, m);
        let mut r = DMatrix::<f64>::zeros(m, m);
        for j in 0..m {
            q[(j, j)] = 1.0 / h[j];
            q[(j + 1, j)] = -1.0 / h[j] - 1.0 / h[j + 1];
            q[(j + 2, j)] = 1.0 / h[j + 1];
            r[(j, j)] = (h[j] + h[j + 1]) / 3.0;
            if j + 1 < m {
                r[(j, j + 1)] = h[j + 1] / 6.0;
                r[(j + 1, j)] = h[j + 1] / 6.0;
            }
        }
        let winv = DMatrix::from_diagonal(&DVector::from_iterator(n, w.iter().map(|v| 1.0 / v)));
        let yv = DVector::from_column_slice(y);
        let lhs = &r + (q.transpose() * &winv * &q) * lambda;
        let rhs = q.transpose() * &yv;
        let gamma_inner = lhs.lu().solve(&rhs).unwrap_or_else(|| DVector::zeros(m));
        let g = &yv - (&winv * &q * &gamma_inner) * lambda;
        let mut gamma = vec![0.0; n];
        gamma[1..n - 1].copy_from_slice(gamma_inner.as_slice());
        Spline { t: t.to_vec(), g: g.as_slice().to_vec(), gamma }
    }

    /// Evaluate, holding the end values outside the knot range.
    fn eval(&self, x: f64) -> f64 {
        let n = self.t.len();
        if n == 1 {
            return self.g[0];
        }
        let x = x.clamp(self.t[0], self.t[n - 1]);
        let i = match self.t.partition_point(|&k| k <= x) {
            0 => 0,
            p => (p - 1).min(n - 2),
        };
        let (tl, tr) = (self.t[i], self.t[i + 1]);
        let h = tr - tl;
        let (a, b) = (x - tl, tr - x);
        (a * self.g[i + 1] + b * self.g[i]) / h
            - a * b / 6.0 * ((1.0 + a / h) * self.gamma[i + 1] + (1.0 + b / h) * self.gamma[i])
    }
}

/// Leave-one-bin-out cross-validation score.
fn cv_score(t: &[f64], y: &[f64], w: &[f64], lambda: f64) -> f64 {
    let n = t.len();
    let mut score = 0.0;
    for i in 0..n {
        let keep = |v: &[f64]| v.iter().enumerate().filter(|(k, _)| *k != i).map(|(_, x)| *x).collect::<Vec<_>>();
        let s = Spline::fit(&keep(t), &keep(y), &keep(w), lambda);
        score += w[i] * (y[i] - s.eval(t[i])).powi(2);
    }
    score
}

/// Estimate the seasonal profile from durations and the time of day of the
/// event closing each duration, and divide it out.
pub fn deseasonalize(
    d: &DurationSeries,
    time_of_day: &[f64],
    cfg: &SeasonalConfig,
) -> CliResult<(DurationSeries, SeasonalProfile)> {
    cfg.validate()?;
    if time_of_day.len() != d.len() {
        return Err(CliError::Data(format!(
            "{} times for {} durations",
            time_of_day.len(),
            d.len()
        )));
    }
    let bins = cfg.bins();
    let mut sum = vec![0.0; bins];
    let mut count = vec![0usize; bins];
    for (x, &tod) in d.values().iter().zip(time_of_day) {
        if let Some(b) = cfg.bin_of(tod) {
            sum[b] += x.ln();
            count[b] += 1;
        }
    }
    let used: Vec<usize> = (0..bins).filter(|&b| count[b] > 0).collect();
    if used.len() < 2 {
        return Err(CliError::Data(format!(
            "the data cover {} time-of-day bin(s); at least 2 are needed to estimate seasonality",
            used.len()
        )));
    }
    // bin-index units keep the penalty scale independent of the bin width
    let t: Vec<f64> = used.iter().map(|&b| b as f64 + 0.5).collect();
    let y: Vec<f64> = used.iter().map(|&b| sum[b] / count[b] as f64).collect();
    let w: Vec<f64> = used.iter().map(|&b| count[b] as f64).collect();
    let lambda = if t.len() < 4 {
        0.0
    } else {
        let grid: Vec<f64> = (0..=40).map(|k| 10f64.powf(-3.0 + 0.25 * k as f64)).collect();
        grid.iter()
            .map(|&l| (l, cv_score(&t, &y, &w, l)))
            .fold((f64::NAN, f64::INFINITY), |best, (l, s)| if s < best.1 { (l, s) } else { best })
            .0
    };
    let spline = Spline::fit(&t, &y, &w, lambda);
    let raw: Vec<f64> = (0..bins).map(|b| spline.eval(b as f64 + 0.5).exp()).collect();
    let mean = raw.iter().sum::<f64>() / bins as f64;
    let phi: Vec<f64> = raw.iter().map(|v| v / mean).collect();
    let knots: Vec<f64> = (0..bins).map(|b| cfg.centre(b)).collect();
    let profile_at = |tod: f64| {
        let u = ((tod - cfg.session_start) / cfg.bin_width).clamp(0.5, bins as f64 - 0.5);
        spline.eval(u).exp() / mean
    };
    let adjusted: Vec<f64> = d.values().iter().zip(time_of_day).map(|(x, &tod)| x / profile_at(tod)).collect();
    Ok((DurationSeries::new(adjusted)?, SeasonalProfile { knots, phi, lambda }))
}
