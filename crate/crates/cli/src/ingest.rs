// SPDX-License-Identifier: MIT OR Apache-2.0

//! Reading one-column timestamp or duration files.

use std::path::Path;
use std::str::FromStr;

use chrono::{DateTime, NaiveDateTime};
use ebs_core::series::{timestamps_from_durations, DurationSeries, EventSeries};

use crate::error::{CliError, CliResult};

/// Fewest durations a file must yield for detection to be meaningful.
pub const MIN_OBSERVATIONS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    Timestamps,
    Durations,
}

impl FromStr for InputFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "timestamps" | "timestamp" => Ok(Self::Timestamps),
            "durations" | "duration" => Ok(Self::Durations),
            _ => Err(format!("unknown input format `{s}`; expected `timestamps` or `durations`")),
        }
    }
}

/// A parsed input file.
#[derive(Debug, Clone)]
pub struct Ingested {
    pub durations: DurationSeries,
    /// Event times in seconds; for duration input, cumulated from 0.
    pub timestamps: EventSeries,
    /// Wall-clock event times when the file held ISO-8601 timestamps.
    pub wall_clock: Option<Vec<NaiveDateTime>>,
    /// Zero durations removed (repeated timestamps or literal zeros).
    pub dropped_zero: usize,
}

impl Ingested {
    /// Time at which the segment starting at duration `location` begins.
    pub fn boundary_time(&self, location: usize) -> String {
        match &self.wall_clock {
            Some(w) => w[location].format("%Y-%m-%dT%H:%M:%S%.f").to_string(),
            None => self.timestamps.timestamps()[location].to_string(),
        }
    }

    /// Seconds since midnight of the event closing each duration, if the
    /// input carried wall-clock times.
    pub fn time_of_day(&self) -> Option<Vec<f64>> {
        use chrono::Timelike;
        self.wall_clock.as_ref().map(|w| {
            w[1..]
                .iter()
                .map(|t| t.num_seconds_from_midnight() as f64 + t.nanosecond() as f64 * 1e-9)
                .collect()
        })
    }
}

enum Value {
    Real(f64),
    Wall(NaiveDateTime),
}

fn parse_wall(s: &str) -> Option<NaiveDateTime> {
    if let Ok(t) = DateTime::parse_from_rfc3339(s) {
        return Some(t.naive_utc());
    }
    ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f"]
        .iter()
        .find_map(|f| NaiveDateTime::parse_from_str(s, f).ok())
}

fn parse_value(s: &str) -> Option<Value> {
    if let Ok(v) = s.parse::<f64>() {
        return v.is_finite().then_some(Value::Real(v));
    }
    parse_wall(s).map(Value::Wall)
}

/// Parse file contents without the minimum-size check.
pub fn parse_series(text: &str, format: InputFormat) -> CliResult<Ingested> {
    let mut values: Vec<(usize, Value)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let cell = raw.trim().trim_end_matches(',').trim();
        if cell.is_empty() {
            continue;
        }
        if values.is_empty() && matches!(cell.to_ascii_lowercase().as_str(), "timestamp" | "timestamps" | "duration" | "durations") {
            continue;
        }
        let v = parse_value(cell)
            .ok_or_else(|| CliError::Data(format!("line {line_no}: cannot parse `{cell}` as a number or ISO-8601 time")))?;
        values.push((line_no, v));
    }
    match format {
        InputFormat::Timestamps => from_timestamps(values),
        InputFormat::Durations => from_durations(values),
    }
}

fn from_timestamps(values: Vec<(usize, Value)>) -> CliResult<Ingested> {
    let wall = matches!(values.first(), Some((_, Value::Wall(_))));
    let mut secs = Vec::with_capacity(values.len());
    let mut clock = Vec::new();
    let mut origin = None;
    for (line, v) in &values {
        let t = match (v, wall) {
            (Value::Real(x), false) => *x,
            (Value::Wall(w), true) => {
                let o = *origin.get_or_insert(*w);
                clock.push(*w);
                (*w - o).num_nanoseconds().map(|n| n as f64 * 1e-9).unwrap_or_else(|| (*w - o).num_seconds() as f64)
            }
            _ => return Err(CliError::Data(format!("line {line}: mixes wall-clock and numeric timestamps"))),
        };
        secs.push((*line, t));
    }
    let mut kept: Vec<f64> = Vec::with_capacity(secs.len());
    let mut kept_clock = Vec::with_capacity(clock.len());
    let mut dropped = 0;
    for (k, (line, t)) in secs.iter().enumerate() {
        if let Some(&prev) = kept.last() {
            if *t == prev {
                dropped += 1;
                continue;
            }
            if *t < prev {
                return Err(CliError::Data(format!("line {line}: timestamp {t} is earlier than the previous one")));
            }
        }
        kept.push(*t);
        if wall {
            kept_clock.push(clock[k]);
        }
    }
    if kept.len() < 2 {
        return Err(CliError::Data("need at least two distinct timestamps".into()));
    }
    let timestamps = EventSeries::new(kept)?;
    Ok(Ingested {
        durations: timestamps.durations(),
        timestamps,
        wall_clock: wall.then_some(kept_clock),
        dropped_zero: dropped,
    })
}

fn from_durations(values: Vec<(usize, Value)>) -> CliResult<Ingested> {
    let mut kept = Vec::with_capacity(values.len());
    let mut dropped = 0;
    for (line, v) in values {
        let x = match v {
            Value::Real(x) => x,
            Value::Wall(_) => return Err(CliError::Data(format!("line {line}: expected a duration, found a timestamp"))),
        };
        if x < 0.0 {
            return Err(CliError::Data(format!("line {line}: negative duration {x}")));
        }
        if x == 0.0 {
            dropped += 1;
            continue;
        }
        kept.push(x);
    }
    if kept.is_empty() {
        return Err(CliError::Data("no positive durations found".into()));
    }
    let durations = DurationSeries::new(kept)?;
    let timestamps = timestamps_from_durations(&durations, 0.0)?;
    Ok(Ingested { durations, timestamps, wall_clock: None, dropped_zero: dropped })
}

/// Parse and require at least [`MIN_OBSERVATIONS`] durations.
pub fn ingest_str(text: &str, format: InputFormat) -> CliResult<Ingested> {
    let data = parse_series(text, format)?;
    if data.durations.len() < MIN_OBSERVATIONS {
        return Err(CliError::Data(format!(
            "only {} usable durations; at least {MIN_OBSERVATIONS} are needed for a stable ACD fit and threshold. \
             Supply a longer sample (for intraday data, a full trading day is typical)",
            data.durations.len()
        )));
    }
    Ok(data)
}

pub fn ingest(path: &Path, format: InputFormat) -> CliResult<Ingested> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
    ingest_str(&text, format)
}
