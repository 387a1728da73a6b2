// SPDX-License-Identifier: MIT OR Apache-2.0

//! Simulation studies: false-positive rates on stationary models and
//! accuracy metrics on models with known change-points.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::changepoints::{ChangePointSet, Method};
use crate::error::{Error, Result};
use crate::par;
use crate::seed::SimSeed;
use crate::segment::{detect, DetectorConfig};
use crate::simulate::{model_catalog, CatalogModel, Sample};
use crate::transform::{fit_and_transform, TransformConfig};

/// Share of true change-points recovered one-to-one within
/// `⌈d_frac·T⌉`, over `max(N, N̂)`. Pairs are matched greedily in
/// increasing distance; ties go to the smaller true, then estimated, index.
pub fn hit_ratio(true_cps: &[usize], est_cps: &[usize], t: usize, d_frac: f64) -> f64 {
    let denom = true_cps.len().max(est_cps.len());
    if denom == 0 {
        return 1.0;
    }
    let d_max = (d_frac * t as f64).ceil() as usize;
    let mut pairs: Vec<(usize, usize, usize)> = Vec::new();
    for (i, &a) in true_cps.iter().enumerate() {
        for (j, &b) in est_cps.iter().enumerate() {
            let d = a.abs_diff(b);
            if d <= d_max {
                pairs.push((d, i, j));
            }
        }
    }
    pairs.sort_unstable();
    let mut used_true = vec![false; true_cps.len()];
    let mut used_est = vec![false; est_cps.len()];
    let mut matches = 0;
    for (_, i, j) in pairs {
        if !used_true[i] && !used_est[j] {
            used_true[i] = true;
            used_est[j] = true;
            matches += 1;
        }
    }
    matches as f64 / denom as f64
}

/// One (model, method) cell of a study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyRow {
    pub model: String,
    pub method: Method,
    pub reps: usize,
    /// Fraction of replications with at least one detection.
    pub false_positive_rate: Option<f64>,
    /// Mean of `N̂ − N`.
    pub bias: Option<f64>,
    /// Mean of `|N̂ − N|`.
    pub mae: Option<f64>,
    /// Mean of `(N̂ − N)²`.
    pub mse: Option<f64>,
    pub hit_ratio: Option<f64>,
    pub mean_runtime_secs: f64,
    pub median_runtime_secs: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct StudyReport {
    pub rows: Vec<StudyRow>,
}

impl StudyReport {
    pub fn row(&self, model: &str, method: Method) -> Option<&StudyRow> {
        self.rows.iter().find(|r| r.model.eq_ignore_ascii_case(model) && r.method == method)
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.rows {
            w.serialize(r).map_err(|e| Error::invalid(format!("csv: {e}")))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::invalid(format!("csv: {e}")))?;
        String::from_utf8(bytes).map_err(|e| Error::invalid(format!("csv: {e}")))
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::invalid(format!("json: {e}")))
    }
}

/// Settings shared by all cells of a study.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StudyConfig {
    pub transform: TransformConfig,
    pub detector: DetectorConfig,
    /// Hit-ratio tolerance as a fraction of the sample size.
    pub d_frac: f64,
}

impl StudyConfig {
    pub fn new() -> Self {
        Self { d_frac: 0.01, ..Default::default() }
    }
}

/// Outcome of one replication for one method.
#[derive(Debug, Clone, PartialEq)]
pub struct RepOutcome {
    pub truth: Vec<usize>,
    pub estimate: ChangePointSet,
    pub n: usize,
    pub runtime_secs: f64,
}

/// Fit, transform and detect on one simulated sample. The runtime covers
/// detection only.
pub fn run_pipeline(sample: &Sample, method: Method, cfg: &StudyConfig, seed: SimSeed) -> Result<RepOutcome> {
    let prepared = fit_and_transform(&sample.durations, &cfg.transform)?;
    let mut det = cfg.detector.clone();
    det.method = method;
    det.ebs.seed = seed;
    let start = Instant::now();
    let estimate = detect(&prepared.series, &det)?;
    let runtime_secs = start.elapsed().as_secs_f64();
    Ok(RepOutcome { truth: sample.change_points.clone(), estimate, n: prepared.series.len(), runtime_secs })
}

fn run_cell(model: &CatalogModel, methods: &[Method], reps: usize, seed: SimSeed, cfg: &StudyConfig) -> Result<Vec<Vec<RepOutcome>>> {
    let model_seed = seed.derive(fnv(model.name));
    let per_rep: Vec<Result<Vec<RepOutcome>>> = par::map_indexed(reps, |r| {
        let rep_seed = model_seed.derive(r as u64);
        let sample = model.sample(rep_seed)?;
        methods.iter().map(|&m| run_pipeline(&sample, m, cfg, rep_seed.derive(1))).collect()
    });
    let per_rep: Vec<Vec<RepOutcome>> = per_rep.into_iter().collect::<Result<_>>()?;
    Ok((0..methods.len()).map(|k| per_rep.iter().map(|r| r[k].clone()).collect()).collect())
}

fn fnv(name: &str) -> u64 {
    name.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

fn runtimes(outcomes: &[RepOutcome]) -> (f64, f64) {
    let mut t: Vec<f64> = outcomes.iter().map(|o| o.runtime_secs).collect();
    if t.is_empty() {
        return (0.0, 0.0);
    }
    let mean = t.iter().sum::<f64>() / t.len() as f64;
    t.sort_by(f64::total_cmp);
    let mid = t.len() / 2;
    let median = if t.len().is_multiple_of(2) { 0.5 * (t[mid - 1] + t[mid]) } else { t[mid] };
    (mean, median)
}

/// Summarize replications into accuracy metrics.
pub fn accuracy_row(model: &str, method: Method, outcomes: &[RepOutcome], d_frac: f64) -> StudyRow {
    let k = outcomes.len().max(1) as f64;
    let diffs: Vec<f64> = outcomes.iter().map(|o| o.estimate.len() as f64 - o.truth.len() as f64).collect();
    let hr = outcomes
        .iter()
        .map(|o| hit_ratio(&o.truth, &o.estimate.locations(), o.n, d_frac))
        .sum::<f64>()
        / k;
    let (mean_rt, median_rt) = runtimes(outcomes);
    StudyRow {
        model: model.to_string(),
        method,
        reps: outcomes.len(),
        false_positive_rate: None,
        bias: Some(diffs.iter().sum::<f64>() / k),
        mae: Some(diffs.iter().map(|d| d.abs()).sum::<f64>() / k),
        mse: Some(diffs.iter().map(|d| d * d).sum::<f64>() / k),
        hit_ratio: Some(hr),
        mean_runtime_secs: mean_rt,
        median_runtime_secs: median_rt,
    }
}

fn false_positive_row(model: &str, method: Method, outcomes: &[RepOutcome]) -> StudyRow {
    let hits = outcomes.iter().filter(|o| !o.estimate.is_empty()).count();
    let (mean_rt, median_rt) = runtimes(outcomes);
    StudyRow {
        model: model.to_string(),
        method,
        reps: outcomes.len(),
        false_positive_rate: Some(hits as f64 / outcomes.len().max(1) as f64),
        bias: None,
        mae: None,
        mse: None,
        hit_ratio: None,
        mean_runtime_secs: mean_rt,
        median_runtime_secs: median_rt,
    }
}

/// False-positive rate per (model, method) on stationary models.
pub fn run_stationary_study(
    models: &[&str],
    methods: &[Method],
    reps: usize,
    seed: SimSeed,
    cfg: &StudyConfig,
) -> Result<StudyReport> {
    let mut rows = Vec::new();
    for name in models {
        let model = model_catalog(name)?;
        if !model.is_stationary() {
            return Err(Error::invalid(format!("{} has change-points; use the non-stationary study", model.name)));
        }
        let cells = run_cell(&model, methods, reps, seed, cfg)?;
        for (&m, outcomes) in methods.iter().zip(&cells) {
            rows.push(false_positive_row(model.name, m, outcomes));
        }
    }
    Ok(StudyReport { rows })
}

/// Bias, MAE, MSE of `N̂ − N` and mean hit ratio per (model, method).
pub fn run_nonstationary_study(
    models: &[&str],
    methods: &[Method],
    reps: usize,
    seed: SimSeed,
    cfg: &StudyConfig,
) -> Result<StudyReport> {
    let mut rows = Vec::new();
    for name in models {
        let model = model_catalog(name)?;
        let cells = run_cell(&model, methods, reps, seed, cfg)?;
        for (&m, outcomes) in methods.iter().zip(&cells) {
            rows.push(accuracy_row(model.name, m, outcomes, cfg.d_frac));
        }
    }
    Ok(StudyReport { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::segment::ThresholdRule;
    use crate::transform::TransformedSeries;

    #[test]
    fn hit_ratio_examples() {
        assert!((hit_ratio(&[500, 1500], &[505, 1490, 1900], 2000, 0.01) - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(hit_ratio(&[300, 900], &[300, 900], 2000, 0.01), 1.0);
        assert_eq!(hit_ratio(&[1000], &[1005, 1010], 2000, 0.01), 0.5);
        assert_eq!(hit_ratio(&[], &[], 2000, 0.01), 1.0);
        assert_eq!(hit_ratio(&[1000], &[], 2000, 0.01), 0.0);
        assert_eq!(hit_ratio(&[], &[10], 2000, 0.01), 0.0);
        // boundary: distance exactly d_max counts
        assert_eq!(hit_ratio(&[1000], &[1020], 2000, 0.01), 1.0);
        assert_eq!(hit_ratio(&[1000], &[1021], 2000, 0.01), 0.0);
    }

    #[test]
    fn greedy_matching_is_one_to_one() {
        // 1005 is closest to both truths; only one may claim it
        assert_eq!(hit_ratio(&[1000, 1008], &[1005], 2000, 0.01), 0.5);
        assert_eq!(hit_ratio(&[1000, 1008], &[1005, 1012], 2000, 0.01), 1.0);
    }

    fn noiseless(n: usize, cps: &[usize]) -> TransformedSeries {
        let mut level = 0.0;
        let v = (0..n)
            .map(|i| {
                if cps.contains(&i) {
                    level += 1.0;
                }
                level
            })
            .collect();
        TransformedSeries::from_values(v).unwrap()
    }

    #[test]
    fn noiseless_steps_give_unit_hit_ratio() {
        let n = 2000;
        let truth = [400, 1000, 1600];
        let y = noiseless(n, &truth);
        for m in Method::ALL {
            let mut cfg = DetectorConfig::with_method(m);
            cfg.ebs.threshold = ThresholdRule::Constant(1.0);
            let est = detect(&y, &cfg).unwrap();
            assert_eq!(hit_ratio(&truth, &est.locations(), n, 0.01), 1.0, "{m}: {:?}", est.locations());
        }
    }

    #[test]
    fn metrics_from_outcomes() {
        let mk = |truth: Vec<usize>, est: &[usize]| RepOutcome {
            truth,
            estimate: ChangePointSet::from_locations(est, Method::Bs),
            n: 1000,
            runtime_secs: 0.0,
        };
        let outs = vec![mk(vec![500], &[500, 800]), mk(vec![500], &[])];
        let row = accuracy_row("x", Method::Bs, &outs, 0.01);
        assert_eq!(row.bias, Some(0.0));
        assert_eq!(row.mae, Some(1.0));
        assert_eq!(row.mse, Some(1.0));
        assert_eq!(row.hit_ratio, Some(0.25));
        assert!(row.mae.unwrap() >= row.bias.unwrap().abs());
    }

    #[test]
    fn stationary_study_is_deterministic_and_bounded() {
        let cfg = StudyConfig::new();
        let a = run_stationary_study(&["S4"], &[Method::Bs, Method::Ebs], 4, SimSeed::new(3), &cfg).unwrap();
        let b = run_stationary_study(&["S4"], &[Method::Bs, Method::Ebs], 4, SimSeed::new(3), &cfg).unwrap();
        assert_eq!(a.rows.len(), 2);
        for (x, y) in a.rows.iter().zip(&b.rows) {
            assert_eq!(x.false_positive_rate, y.false_positive_rate);
            let r = x.false_positive_rate.unwrap();
            assert!((0.0..=1.0).contains(&r));
        }
        assert!(a.to_csv().unwrap().starts_with("model,method,reps,false_positive_rate"));
        assert!(a.to_json().unwrap().contains("\"S4\""));
        assert!(run_stationary_study(&["B1"], &[Method::Bs], 1, SimSeed::new(3), &cfg).is_err());
    }
}
