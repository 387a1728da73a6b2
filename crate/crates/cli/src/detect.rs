// SPDX-License-Identifier: MIT OR Apache-2.0

//! The `detect` workflow: ingest, optional deseasonalisation, ACD fit and
//! transform, change-point search, and rendering.

use std::fmt::Write as _;
use std::path::PathBuf;

use chrono::Timelike;
use ebs_core::segment::{detect, DetectorConfig, EbsConfig, Selection, ThresholdRule};
use ebs_core::transform::{fit_and_transform, TransformConfig};
use ebs_core::{CalibrationResult, Method, SimSeed};
use serde::Serialize;
use serde_json::json;

use crate::deseason::{deseasonalize, SeasonalConfig};
use crate::error::{CliError, CliResult};
use crate::ingest::Ingested;

#[derive(Debug, Clone)]
pub struct DetectOptions {
    pub method: Method,
    pub draws: usize,
    pub pi_thr: f64,
    pub selection: Selection,
    pub min_len: usize,
    pub delta: Option<usize>,
    pub wbs_draws: usize,
    pub transform: TransformConfig,
    pub deseasonalize: bool,
    pub seasonal: SeasonalConfig,
    pub seed: u64,
    pub calibration_file: Option<PathBuf>,
    pub histogram: bool,
}

impl Default for DetectOptions {
    fn default() -> Self {
        let ebs = EbsConfig::default();
        Self {
            method: Method::Ebs,
            draws: ebs.draws,
            pi_thr: ebs.pi_thr,
            selection: ebs.selection,
            min_len: ebs.min_interval_len,
            delta: None,
            wbs_draws: DetectorConfig::default().wbs_draws,
            transform: TransformConfig::default(),
            deseasonalize: false,
            seasonal: SeasonalConfig::default(),
            seed: ebs.seed.0,
            calibration_file: None,
            histogram: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitSummary {
    pub omega: f64,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub dampening: f64,
    pub converged: bool,
    pub loglik: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportedChangePoint {
    pub index: usize,
    pub timestamp: String,
    #[serde(rename = "V")]
    pub votes: Option<usize>,
    pub f: Option<f64>,
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HourCount {
    pub hour: i64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectReport {
    pub config: serde_json::Value,
    pub fit: FitSummary,
    pub observations: usize,
    pub dropped_zero_durations: usize,
    pub deseasonalized: bool,
    pub ensemble_size: usize,
    pub draws: usize,
    pub warnings: Vec<String>,
    /// Sorted by index.
    pub change_points: Vec<ReportedChangePoint>,
    pub histogram: Option<Vec<HourCount>>,
}

fn load_calibration(path: &Option<PathBuf>) -> CliResult<CalibrationResult> {
    match path {
        None => Ok(CalibrationResult::shipped()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::Data(format!("cannot read calibration file {}: {e}", p.display())))?;
            CalibrationResult::parse(&text).map_err(|e| CliError::Data(format!("{}: {e}", p.display())))
        }
    }
}

fn hour_of(data: &Ingested, event: usize) -> i64 {
    match &data.wall_clock {
        Some(w) => w[event].hour() as i64,
        None => (data.timestamps.timestamps()[event] / 3600.0).floor() as i64,
    }
}

pub fn run_detect(data: &Ingested, opts: &DetectOptions) -> CliResult<DetectReport> {
    let mut warnings = Vec::new();
    if data.dropped_zero > 0 {
        warnings.push(format!("dropped {} zero duration(s)", data.dropped_zero));
    }
    let calibration = load_calibration(&opts.calibration_file)?;

    let mut durations = data.durations.clone();
    let mut deseasonalized = false;
    if opts.deseasonalize {
        let tod = data.time_of_day().ok_or_else(|| {
            CliError::Data("--deseasonalize needs wall-clock (ISO-8601) timestamps".into())
        })?;
        match deseasonalize(&durations, &tod, &opts.seasonal) {
            Ok((adjusted, _)) => {
                durations = adjusted;
                deseasonalized = true;
            }
            Err(CliError::Data(msg)) => warnings.push(format!("deseasonalization skipped: {msg}")),
            Err(e) => return Err(e),
        }
    }

    let prepared = fit_and_transform(&durations, &opts.transform)?;
    if !prepared.fit.converged {
        warnings.push("ACD fit did not converge; using moment estimates".into());
    }
    let n = prepared.series.len();
    let ebs = EbsConfig {
        draws: opts.draws,
        pi_thr: opts.pi_thr,
        threshold: ThresholdRule::Calibrated(calibration),
        min_interval_len: opts.min_len,
        delta: opts.delta,
        selection: opts.selection,
        seed: SimSeed::new(opts.seed),
    };
    let delta = ebs.delta_for(n);
    let cfg = DetectorConfig { method: opts.method, ebs, wbs_draws: opts.wbs_draws };
    let found = detect(&prepared.series, &cfg)?;

    let ranked = found.ranked();
    let rank_of = |loc: usize| ranked.iter().position(|c| c.location == loc).map_or(0, |p| p + 1);
    let change_points: Vec<ReportedChangePoint> = found
        .entries()
        .iter()
        .map(|c| ReportedChangePoint {
            index: c.location,
            timestamp: data.boundary_time(c.location),
            votes: c.votes,
            f: c.frequency,
            rank: rank_of(c.location),
        })
        .collect();

    let histogram = opts.histogram.then(|| {
        let events = data.timestamps.len();
        let (lo, hi) = (hour_of(data, 0), hour_of(data, events - 1));
        let (lo, hi) = (lo.min(hi), lo.max(hi));
        (lo..=hi)
            .map(|h| HourCount {
                hour: h,
                count: change_points.iter().filter(|c| hour_of(data, c.index) == h).count(),
            })
            .collect()
    });

    let p = &prepared.fit.params;
    let config = json!({
        "method": opts.method.as_str(),
        "M": opts.draws,
        "pi_thr": opts.pi_thr,
        "select": match opts.selection { Selection::Threshold => "threshold", Selection::AboveMean => "above-mean" },
        "min_len": opts.min_len,
        "delta": delta,
        "wbs_draws": opts.wbs_draws,
        "order": opts.transform.order.to_string(),
        "epsilon": opts.transform.epsilon,
        "dampening": opts.transform.dampening.to_string(),
        "deseasonalize": opts.deseasonalize,
        "seed": opts.seed,
        "calibration": opts.calibration_file.as_ref().map_or("shipped".to_string(), |p| p.display().to_string()),
    });
    Ok(DetectReport {
        config,
        fit: FitSummary {
            omega: p.omega(),
            alpha: p.alpha().to_vec(),
            beta: p.beta().to_vec(),
            dampening: prepared.dampening,
            converged: prepared.fit.converged,
            loglik: prepared.fit.loglik,
        },
        observations: n,
        dropped_zero_durations: data.dropped_zero,
        deseasonalized,
        ensemble_size: found.ensemble_size,
        draws: found.total_draws,
        warnings,
        change_points,
        histogram,
    })
}

fn opt<T: std::fmt::Display>(v: &Option<T>) -> String {
    v.as_ref().map_or_else(|| "-".to_string(), |x| x.to_string())
}

fn list(v: &[f64]) -> String {
    let items: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    format!("[{}]", items.join(","))
}

/// Human-readable report.
pub fn render_text(r: &DetectReport) -> String {
    let mut s = String::new();
    let c = &r.config;
    let field = |k: &str| match &c[k] {
        serde_json::Value::String(v) => v.clone(),
        v => v.to_string(),
    };
    let _ = writeln!(s, "method: {}", field("method"));
    for key in ["M", "pi_thr", "select", "min_len", "delta", "wbs_draws", "order", "epsilon", "dampening", "deseasonalize", "seed", "calibration"] {
        let _ = writeln!(s, "{key}: {}", field(key));
    }
    let f = &r.fit;
    let _ = writeln!(
        s,
        "fit: omega={} alpha={} beta={} F={} converged={} loglik={}",
        f.omega,
        list(&f.alpha),
        list(&f.beta),
        f.dampening,
        f.converged,
        f.loglik
    );
    let _ = writeln!(s, "observations: {}", r.observations);
    let _ = writeln!(s, "dropped_zero_durations: {}", r.dropped_zero_durations);
    let _ = writeln!(s, "deseasonalized: {}", r.deseasonalized);
    let _ = writeln!(s, "ensemble_size: {}", r.ensemble_size);
    let _ = writeln!(s, "draws: {}", r.draws);
    let _ = writeln!(s, "change_points: {}", r.change_points.len());
    if !r.change_points.is_empty() {
        let _ = writeln!(s, "index\ttimestamp\tV\tf\trank");
        for cp in &r.change_points {
            let _ = writeln!(s, "{}\t{}\t{}\t{}\t{}", cp.index, cp.timestamp, opt(&cp.votes), opt(&cp.f), cp.rank);
        }
    }
    if let Some(h) = &r.histogram {
        let _ = writeln!(s, "hour\tcount");
        for hc in h {
            let _ = writeln!(s, "{}\t{}", hc.hour, hc.count);
        }
    }
    s
}

/// JSON Lines: one header record, one record per change-point, then one
/// record per histogram hour.
pub fn render_structured(r: &DetectReport) -> String {
    let mut lines = vec![json!({
        "record": "header",
        "config": r.config,
        "fit": r.fit,
        "observations": r.observations,
        "dropped_zero_durations": r.dropped_zero_durations,
        "deseasonalized": r.deseasonalized,
        "ensemble_size": r.ensemble_size,
        "M": r.draws,
        "warnings": r.warnings,
    })];
    for cp in &r.change_points {
        let mut v = serde_json::to_value(cp).expect("serialisable");
        v["record"] = json!("change_point");
        lines.push(v);
    }
    for hc in r.histogram.iter().flatten() {
        lines.push(json!({ "record": "histogram", "hour": hc.hour, "count": hc.count }));
    }
    let mut out = String::new();
    for l in lines {
        out.push_str(&l.to_string());
        out.push('\n');
    }
    out
}
