// SPDX-License-Identifier: MIT OR Apache-2.0

//! Change-point detection in the baseline intensity of financial durations
//! by ensemble binary segmentation.
//!
//! Durations are fitted with an ACD model, mapped to an approximately
//! piecewise-constant-mean series and searched with binary segmentation run
//! over many random intervals, keeping locations that enough intervals agree
//! on.

pub mod bench;
pub mod calibrate;
pub mod changepoints;
pub mod error;
pub mod optim;
pub mod par;
pub mod params;
pub mod segment;
pub mod seed;
pub mod series;
pub mod simulate;
pub mod transform;

pub use calibrate::{calibrate_c1, min_draws, CalibrationResult};
pub use changepoints::{ChangePoint, ChangePointSet, Method};
pub use error::{Error, Result};
pub use params::{AcdParams, Constraints, HawkesParams, PiecewiseSpec};
pub use seed::SimSeed;
pub use segment::{detect, ebs, DetectorConfig, EbsConfig, Selection, ThresholdRule};
pub use series::{DurationSeries, EventSeries};
pub use simulate::{model_catalog, simulate_tvacd, simulate_tvhawkes, Model, Sample};
pub use transform::{fit_acd, fit_and_transform, AcdFit, AcdOrder, Dampening, TransformConfig, TransformedSeries};
