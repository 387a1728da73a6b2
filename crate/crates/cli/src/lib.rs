// SPDX-License-Identifier: MIT OR Apache-2.0

//! Command-line front end: file ingest, intraday deseasonalisation,
//! detection reports, simulation, studies and threshold calibration.

pub mod args;
pub mod deseason;
pub mod detect;
pub mod error;
pub mod ingest;

use std::io::Write;

use clap::Parser;
use ebs_core::bench::{run_nonstationary_study, run_stationary_study, StudyConfig};
use ebs_core::calibrate::{calibrate_c1, grid_search_operating_point, NullModel};
use ebs_core::segment::{EbsConfig, Selection, ThresholdRule};
use ebs_core::simulate::{model_catalog, CATALOG_NAMES};
use ebs_core::transform::TransformConfig;
use ebs_core::{par, CalibrationResult, Method, SimSeed};

use args::{BenchArgs, CalibrateArgs, Cli, Command, DetectArgs, GridArgs, MethodArg, OutArg, SelectArg, SimulateArgs, StudyArg};
use deseason::SeasonalConfig;
use detect::{render_structured, render_text, run_detect, DetectOptions};
use error::{CliError, CliResult};
use ingest::{ingest, InputFormat};

fn method(m: MethodArg) -> Method {
    match m {
        MethodArg::Bs => Method::Bs,
        MethodArg::Wbs => Method::Wbs,
        MethodArg::Ebs => Method::Ebs,
    }
}

fn parse_clock(s: &str) -> Option<f64> {
    let (h, m) = s.trim().split_once(':')?;
    let (h, m): (u32, u32) = (h.parse().ok()?, m.parse().ok()?);
    (h < 24 && m < 60).then(|| (h * 3600 + m * 60) as f64)
}

fn parse_session(s: &str, bin_minutes: f64) -> CliResult<SeasonalConfig> {
    let bad = || CliError::Usage(format!("--session must look like 09:30-16:00; got `{s}`"));
    let (a, b) = s.split_once('-').ok_or_else(bad)?;
    let cfg = SeasonalConfig {
        session_start: parse_clock(a).ok_or_else(bad)?,
        session_end: parse_clock(b).ok_or_else(bad)?,
        bin_width: bin_minutes * 60.0,
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Translate detect flags into options, rejecting conflicting combinations.
pub fn detect_options(a: &DetectArgs) -> CliResult<DetectOptions> {
    let m = method(a.method);
    if m != Method::Ebs {
        let given: Vec<&str> = [
            a.draws.map(|_| "--M"),
            a.pi_thr.map(|_| "--pi-thr"),
            a.select.map(|_| "--select"),
        ]
        .into_iter()
        .flatten()
        .collect();
        if !given.is_empty() {
            return Err(CliError::Usage(format!("{} cannot be used with --method {}", given.join(", "), m)));
        }
    }
    if a.select == Some(SelectArg::AboveMean) && a.pi_thr.is_some() {
        return Err(CliError::Usage("--pi-thr cannot be combined with --select above-mean".into()));
    }
    if a.deseasonalize && a.format == args::FormatArg::Durations {
        return Err(CliError::Usage("--deseasonalize needs --format timestamps".into()));
    }
    let transform = TransformConfig { epsilon: a.epsilon, dampening: a.dampening, order: a.order };
    transform.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let defaults = DetectOptions::default();
    let opts = DetectOptions {
        method: m,
        draws: a.draws.unwrap_or(defaults.draws),
        pi_thr: a.pi_thr.unwrap_or(defaults.pi_thr),
        selection: match a.select {
            Some(SelectArg::AboveMean) => Selection::AboveMean,
            _ => Selection::Threshold,
        },
        min_len: a.min_len,
        delta: a.delta,
        wbs_draws: a.wbs_draws,
        transform,
        deseasonalize: a.deseasonalize,
        seasonal: parse_session(&a.session, a.bin_minutes)?,
        seed: a.seed,
        calibration_file: a.calibration_file.clone(),
        histogram: a.histogram,
    };
    let check = EbsConfig {
        draws: opts.draws,
        pi_thr: opts.pi_thr,
        min_interval_len: opts.min_len,
        ..EbsConfig::default()
    };
    check.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    if opts.wbs_draws == 0 {
        return Err(CliError::Usage("--wbs-draws must be >= 1".into()));
    }
    Ok(opts)
}

fn cmd_detect(a: &DetectArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<()> {
    let opts = detect_options(a)?;
    let format = match a.format {
        args::FormatArg::Timestamps => InputFormat::Timestamps,
        args::FormatArg::Durations => InputFormat::Durations,
    };
    let data = ingest(&a.input, format)?;
    let report = run_detect(&data, &opts)?;
    for w in &report.warnings {
        writeln!(err, "warning: {w}")?;
    }
    let body = match a.out {
        OutArg::Text => render_text(&report),
        OutArg::Structured => render_structured(&report),
    };
    out.write_all(body.as_bytes())?;
    Ok(())
}

fn write_target(path: &Option<std::path::PathBuf>, body: &str, out: &mut dyn Write) -> CliResult<()> {
    match path {
        Some(p) => std::fs::write(p, body).map_err(|e| CliError::Data(format!("cannot write {}: {e}", p.display()))),
        None => Ok(out.write_all(body.as_bytes())?),
    }
}

fn cmd_simulate(a: &SimulateArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<()> {
    let model = model_catalog(&a.model).map_err(|e| CliError::Usage(e.to_string()))?;
    let sample = model.sample(SimSeed::new(a.seed))?;
    let mut body = String::new();
    if a.timestamps {
        let ts = match &sample.timestamps {
            Some(t) => t.clone(),
            None => ebs_core::series::timestamps_from_durations(&sample.durations, 0.0)?,
        };
        body.push_str("timestamp\n");
        for t in ts.timestamps() {
            body.push_str(&format!("{t}\n"));
        }
    } else {
        body.push_str("duration\n");
        for x in sample.durations.values() {
            body.push_str(&format!("{x}\n"));
        }
    }
    write_target(&a.output, &body, out)?;
    let cps: Vec<String> = sample.change_points.iter().map(|c| c.to_string()).collect();
    writeln!(err, "model {}: {} durations, change-points [{}]", model.name, sample.durations.len(), cps.join(","))?;
    Ok(())
}

fn cmd_bench(a: &BenchArgs, out: &mut dyn Write) -> CliResult<()> {
    let models: Vec<String> = if a.models.is_empty() {
        let stationary = a.study == StudyArg::Stationary;
        CATALOG_NAMES
            .iter()
            .filter(|n| model_catalog(n).map(|m| m.is_stationary() == stationary).unwrap_or(false))
            .map(|n| n.to_string())
            .collect()
    } else {
        a.models.clone()
    };
    for m in &models {
        model_catalog(m).map_err(|e| CliError::Usage(e.to_string()))?;
    }
    let methods: Vec<Method> =
        if a.methods.is_empty() { Method::ALL.to_vec() } else { a.methods.iter().map(|&m| method(m)).collect() };
    let names: Vec<&str> = models.iter().map(String::as_str).collect();
    let cfg = StudyConfig::new();
    let seed = SimSeed::new(a.seed);
    let report = match a.study {
        StudyArg::Stationary => run_stationary_study(&names, &methods, a.reps, seed, &cfg),
        StudyArg::Nonstationary => run_nonstationary_study(&names, &methods, a.reps, seed, &cfg),
    }
    .map_err(|e| CliError::Usage(e.to_string()))?;
    let csv = report.to_csv()?;
    write_target(&a.csv, &csv, out)?;
    if let Some(p) = &a.json {
        write_target(&Some(p.clone()), &report.to_json()?, out)?;
    }
    Ok(())
}

fn cmd_calibrate(a: &CalibrateArgs, out: &mut dyn Write) -> CliResult<()> {
    if a.grid.len() < 4 {
        return Err(CliError::Usage(format!("--grid needs at least 4 sample sizes; got {}", a.grid.len())));
    }
    let cal = calibrate_c1(&a.grid, a.reps, a.alpha, SimSeed::new(a.seed)).map_err(|e| CliError::Usage(e.to_string()))?;
    write_target(&a.output, &cal.to_text(), out)
}

fn cmd_grid(a: &GridArgs, out: &mut dyn Write) -> CliResult<()> {
    let calibration = match &a.calibration_file {
        Some(p) => CalibrationResult::parse(&std::fs::read_to_string(p)?)?,
        None => CalibrationResult::shipped(),
    };
    let base = EbsConfig { threshold: ThresholdRule::Calibrated(calibration), ..EbsConfig::default() };
    if a.pi_thr.iter().any(|p| !(0.0..=1.0).contains(p)) || a.draws.contains(&0) {
        return Err(CliError::Usage("--pi-thr values must lie in [0, 1] and --M values must be >= 1".into()));
    }
    let rows = grid_search_operating_point(
        &a.lengths,
        &a.draws,
        &a.pi_thr,
        a.reps,
        SimSeed::new(a.seed),
        &base,
        &NullModel::default(),
    )?;
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in &rows {
        w.serialize(r).map_err(|e| CliError::Data(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Data(e.to_string()))?;
    out.write_all(&bytes)?;
    Ok(())
}

/// Execute a parsed command line.
pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<()> {
    if cli.threads == Some(0) {
        return Err(CliError::Usage("--threads must be >= 1".into()));
    }
    let (mut o, mut e) = (Vec::new(), Vec::new());
    let result = par::with_threads(cli.threads, || {
        let (o, e): (&mut dyn Write, &mut dyn Write) = (&mut o, &mut e);
        match &cli.command {
            Command::Detect(a) => cmd_detect(a, o, e),
            Command::Simulate(a) => cmd_simulate(a, o, e),
            Command::Bench(a) => cmd_bench(a, o),
            Command::Calibrate(a) => cmd_calibrate(a, o),
            Command::Grid(a) => cmd_grid(a, o),
        }
    });
    err.write_all(&e)?;
    out.write_all(&o)?;
    result
}

/// Parse `args` and run; returns the process exit code.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match run(&cli, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
