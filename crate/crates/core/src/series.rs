// SPDX-License-Identifier: MIT OR Apache-2.0

//! Event times and the durations between them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Strictly increasing event times `τ_0 < τ_1 < …`, at least two of them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventSeries {
    timestamps: Vec<f64>,
}

impl EventSeries {
    pub fn new(timestamps: Vec<f64>) -> Result<Self> {
        if timestamps.len() < 2 {
            return Err(Error::invalid(format!(
                "an event series needs at least 2 timestamps; got {}",
                timestamps.len()
            )));
        }
        if let Some(i) = timestamps.iter().position(|t| !t.is_finite()) {
            return Err(Error::NonFinite { index: i, what: "timestamp" });
        }
        for (i, w) in timestamps.windows(2).enumerate() {
            if w[1] <= w[0] {
                return Err(Error::NonMonotone { index: i + 1, prev: w[0], next: w[1] });
            }
        }
        Ok(Self { timestamps })
    }

    pub fn timestamps(&self) -> &[f64] {
        &self.timestamps
    }

    pub fn len(&self) -> usize {
        self.timestamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps.is_empty()
    }

    pub fn durations(&self) -> DurationSeries {
        let values = self.timestamps.windows(2).map(|w| w[1] - w[0]).collect();
        DurationSeries { values }
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.timestamps
    }
}

/// Positive gaps `x_t = τ_t − τ_{t−1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DurationSeries {
    values: Vec<f64>,
}

impl DurationSeries {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("a duration series cannot be empty"));
        }
        for (i, &v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite { index: i, what: "duration" });
            }
            if v <= 0.0 {
                return Err(Error::NonPositiveDuration { index: i, value: v });
            }
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.values
    }
}

/// Differences of a raw timestamp vector.
pub fn durations_from_timestamps(timestamps: &[f64]) -> Result<DurationSeries> {
    Ok(EventSeries::new(timestamps.to_vec())?.durations())
}

/// Cumulative sums of `durations` starting at `origin`.
pub fn timestamps_from_durations(durations: &DurationSeries, origin: f64) -> Result<EventSeries> {
    if !origin.is_finite() {
        return Err(Error::invalid("origin must be finite"));
    }
    let mut out = Vec::with_capacity(durations.len() + 1);
    let mut t = origin;
    out.push(t);
    for &d in durations.values() {
        t += d;
        out.push(t);
    }
    EventSeries::new(out)
}
