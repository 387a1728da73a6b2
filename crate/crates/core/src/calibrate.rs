// SPDX-License-Identifier: MIT OR Apache-2.0

//! Monte Carlo calibration of the CUSUM threshold constant `C_1(T)` and of
//! the ensemble operating point `(M, π_thr)`.

use std::fmt::Write as _;
use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;
use crate::params::{AcdParams, PiecewiseSpec};
use crate::seed::SimSeed;
use crate::segment::{draw_intervals, select, vote, CusumTable, EbsConfig, Interval};
use crate::simulate::simulate_tvacd;
use crate::transform::{fit_and_transform, TransformConfig};

const SHIPPED: &str = include_str!("../data/c1_default.txt");

/// `C_1(T) = c_0 + c_1 T + c_2/T + c_3 T²`, fitted to per-`T` percentiles of
/// the null statistic `max_b |CUSUM| / √(log T)`. Outside the sampled range
/// the curve is held at its value at the nearest grid end.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    pub coefficients: [f64; 4],
    /// Upper-tail level: the curve tracks the `1 − alpha` percentile.
    pub alpha: f64,
    pub reps: usize,
    pub seed: u64,
    /// `(T, percentile)` samples the curve was fitted to.
    pub grid: Vec<(f64, f64)>,
}

impl CalibrationResult {
    /// The calibration bundled with the crate.
    pub fn shipped() -> Self {
        static CELL: OnceLock<CalibrationResult> = OnceLock::new();
        CELL.get_or_init(|| Self::parse(SHIPPED).expect("bundled calibration file is valid")).clone()
    }

    pub fn range(&self) -> (f64, f64) {
        let lo = self.grid.iter().map(|g| g.0).fold(f64::INFINITY, f64::min);
        let hi = self.grid.iter().map(|g| g.0).fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }

    fn raw(&self, t: f64) -> f64 {
        let [c0, c1, c2, c3] = self.coefficients;
        c0 + c1 * t + c2 / t + c3 * t * t
    }

    /// Threshold constant for a sample of size `t`.
    pub fn c1(&self, t: f64) -> f64 {
        let (lo, hi) = self.range();
        self.raw(t.clamp(lo, hi))
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# CUSUM threshold calibration: C1(T) = c0 + c1*T + c2/T + c3*T^2");
        let _ = writeln!(s, "version 1");
        let _ = writeln!(s, "alpha {}", self.alpha);
        let _ = writeln!(s, "reps {}", self.reps);
        let _ = writeln!(s, "seed {}", self.seed);
        for (i, c) in self.coefficients.iter().enumerate() {
            let _ = writeln!(s, "c{i} {c:e}");
        }
        let _ = writeln!(s, "grid");
        for (t, v) in &self.grid {
            let _ = writeln!(s, "{t} {v}");
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let err = |line: usize, msg: &str| Error::Calibration(format!("line {line}: {msg}"));
        let mut coefficients = [None; 4];
        let (mut alpha, mut reps, mut seed) = (None, None, 0u64);
        let mut grid = Vec::new();
        let mut in_grid = false;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if line == "grid" {
                in_grid = true;
                continue;
            }
            let (key, value) = line
                .split_once(char::is_whitespace)
                .ok_or_else(|| err(line_no, "expected `<key> <value>`"))?;
            let value = value.trim();
            let num = |v: &str| v.parse::<f64>().map_err(|_| err(line_no, "not a number"));
            if in_grid {
                grid.push((num(key)?, num(value)?));
                continue;
            }
            match key {
                "version" if value == "1" => {}
                "version" => return Err(err(line_no, "unsupported version")),
                "alpha" => alpha = Some(num(value)?),
                "reps" => reps = Some(value.parse().map_err(|_| err(line_no, "bad reps"))?),
                "seed" => seed = value.parse().map_err(|_| err(line_no, "bad seed"))?,
                "c0" | "c1" | "c2" | "c3" => {
                    let k = (key.as_bytes()[1] - b'0') as usize;
                    coefficients[k] = Some(num(value)?);
                }
                _ => return Err(err(line_no, "unknown key")),
            }
        }
        let mut coef = [0.0; 4];
        for (k, c) in coefficients.iter().enumerate() {
            coef[k] = c.ok_or_else(|| Error::Calibration(format!("missing coefficient c{k}")))?;
        }
        if grid.is_empty() {
            return Err(Error::Calibration("no grid samples".into()));
        }
        Ok(Self {
            coefficients: coef,
            alpha: alpha.ok_or_else(|| Error::Calibration("missing alpha".into()))?,
            reps: reps.unwrap_or(0),
            seed,
            grid,
        })
    }
}

/// Null model and transform used for calibration.
#[derive(Debug, Clone, PartialEq)]
pub struct NullModel {
    pub params: AcdParams,
    pub transform: TransformConfig,
}

impl Default for NullModel {
    fn default() -> Self {
        Self {
            params: AcdParams::new(1.0, vec![0.1], vec![0.7]).expect("admissible"),
            transform: TransformConfig::default(),
        }
    }
}

impl NullModel {
    /// One transformed stationary path of length `n`.
    pub fn sample(&self, n: usize, seed: SimSeed) -> Result<CusumTable> {
        let spec = PiecewiseSpec::stationary(self.params.clone(), n)?;
        let d = simulate_tvacd(&spec, seed);
        let prepared = fit_and_transform(&d, &self.transform)?;
        Ok(CusumTable::new(prepared.series.values()))
    }
}

/// Type-7 sample quantile.
pub fn quantile(values: &[f64], prob: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let h = (v.len() - 1) as f64 * prob.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    v[lo] + (h - lo as f64) * (v[hi] - v[lo])
}

/// Null statistics `max_b |CUSUM| / √(log T)` for every `T` in the grid.
pub fn null_statistics(grid: &[usize], reps: usize, seed: SimSeed, null: &NullModel) -> Result<Vec<Vec<f64>>> {
    let jobs: Vec<(usize, usize)> =
        grid.iter().enumerate().flat_map(|(g, _)| (0..reps).map(move |r| (g, r))).collect();
    let stats: Vec<Result<f64>> = par::map_indexed(jobs.len(), |j| {
        let (g, r) = jobs[j];
        let n = grid[g];
        let table = null.sample(n, seed.derive(n as u64).derive(r as u64))?;
        let (_, v) = table.max_cusum(Interval::new(0, n)?)?;
        Ok(v / (n as f64).ln().sqrt())
    });
    let mut out = vec![Vec::with_capacity(reps); grid.len()];
    for ((g, _), s) in jobs.iter().zip(stats) {
        out[*g].push(s?);
    }
    Ok(out)
}

/// Least squares fit of `C_1(T)` on the basis `(1, T, 1/T, T²)`.
pub fn fit_curve(samples: &[(f64, f64)]) -> Result<[f64; 4]> {
    if samples.len() < 4 {
        return Err(Error::Calibration(format!(
            "the C1 regression has 4 coefficients and needs at least 4 grid points; got {}",
            samples.len()
        )));
    }
    let basis = |t: f64| [1.0, t, 1.0 / t, t * t];
    let rows = samples.len();
    let mut x = DMatrix::from_fn(rows, 4, |i, j| basis(samples[i].0)[j]);
    let y = DVector::from_iterator(rows, samples.iter().map(|s| s.1));
    // equilibrate columns; T² spans many orders of magnitude
    let scale: Vec<f64> = (0..4).map(|j| x.column(j).norm().max(f64::MIN_POSITIVE)).collect();
    for (j, s) in scale.iter().enumerate() {
        x.column_mut(j).unscale_mut(*s);
    }
    let svd = x.svd(true, true);
    let beta = svd
        .solve(&y, 1e-12)
        .map_err(|e| Error::Calibration(format!("regression failed: {e}")))?;
    Ok([beta[0] / scale[0], beta[1] / scale[1], beta[2] / scale[2], beta[3] / scale[3]])
}

/// Simulate, take the `1 − alpha` percentile of the null statistic at each
/// grid length and regress the percentiles on `(1, T, 1/T, T²)`.
pub fn calibrate_c1(grid: &[usize], reps: usize, alpha: f64, seed: SimSeed) -> Result<CalibrationResult> {
    calibrate_c1_with(grid, reps, alpha, seed, &NullModel::default())
}

pub fn calibrate_c1_with(
    grid: &[usize],
    reps: usize,
    alpha: f64,
    seed: SimSeed,
    null: &NullModel,
) -> Result<CalibrationResult> {
    if grid.len() < 4 {
        return Err(Error::Calibration(format!(
            "the C1 regression has 4 coefficients and needs at least 4 grid points; got {}",
            grid.len()
        )));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Calibration(format!("alpha must lie in (0, 1); got {alpha}")));
    }
    if reps < 2 {
        return Err(Error::Calibration("at least 2 replications are needed".into()));
    }
    let stats = null_statistics(grid, reps, seed, null)?;
    let samples: Vec<(f64, f64)> =
        grid.iter().zip(&stats).map(|(&n, s)| (n as f64, quantile(s, 1.0 - alpha))).collect();
    let coefficients = fit_curve(&samples)?;
    Ok(CalibrationResult { coefficients, alpha, reps, seed: seed.0, grid: samples })
}

/// `M ≥ 9 T log(T) / δ_T`, rounded up.
pub fn min_draws(t: usize, delta: f64) -> Result<u64> {
    let tf = t as f64;
    if !(delta > 0.0 && delta <= tf) {
        return Err(Error::invalid(format!("delta must lie in (0, T]; got {delta} with T = {t}")));
    }
    Ok((9.0 * tf * tf.ln() / delta).ceil() as u64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatingPoint {
    pub t: usize,
    pub draws: usize,
    pub pi_thr: f64,
    pub reps: usize,
    pub false_positive_rate: f64,
}

/// False-positive rate of EBS on stationary simulations for every
/// `(M, π_thr, T)` combination. Each replication is simulated once per `T`
/// and shared across the `(M, π_thr)` cells.
pub fn grid_search_operating_point(
    t_list: &[usize],
    m_list: &[usize],
    pi_list: &[f64],
    reps: usize,
    seed: SimSeed,
    base: &EbsConfig,
    null: &NullModel,
) -> Result<Vec<OperatingPoint>> {
    let mut out = Vec::new();
    for &n in t_list {
        // hits[m][p] counts replications with at least one detection
        let per_rep: Vec<Result<Vec<Vec<bool>>>> = par::map_indexed(reps, |r| {
            let rep_seed = seed.derive(n as u64).derive(r as u64);
            let table = null.sample(n, rep_seed)?;
            m_list
                .iter()
                .map(|&m| {
                    let draws = draw_intervals(n, m, base.min_interval_len, rep_seed.derive(1))?;
                    let candidates = vote(&table, &draws, &base.threshold, base.min_interval_len)?;
                    Ok(pi_list
                        .iter()
                        .map(|&pi| {
                            let cfg = EbsConfig { draws: m, pi_thr: pi, ..base.clone() };
                            !select(&candidates, &cfg, n).is_empty()
                        })
                        .collect())
                })
                .collect()
        });
        let per_rep: Vec<Vec<Vec<bool>>> = per_rep.into_iter().collect::<Result<_>>()?;
        for (mi, &m) in m_list.iter().enumerate() {
            for (pi_i, &pi) in pi_list.iter().enumerate() {
                let hits = per_rep.iter().filter(|r| r[mi][pi_i]).count();
                out.push(OperatingPoint {
                    t: n,
                    draws: m,
                    pi_thr: pi,
                    reps,
                    false_positive_rate: hits as f64 / reps.max(1) as f64,
                });
            }
        }
    }
    Ok(out)
}
