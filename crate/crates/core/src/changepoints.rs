// SPDX-License-Identifier: MIT OR Apache-2.0

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Bs,
    Wbs,
    Ebs,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Bs, Method::Wbs, Method::Ebs];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Bs => "bs",
            Method::Wbs => "wbs",
            Method::Ebs => "ebs",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.as_str().to_uppercase())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bs" => Ok(Method::Bs),
            "wbs" => Ok(Method::Wbs),
            "ebs" => Ok(Method::Ebs),
            other => Err(Error::invalid(format!("unknown method `{other}` (bs, wbs, ebs)"))),
        }
    }
}

/// One estimated change-point.
///
/// `location` is the number of observations to its left, i.e. the 1-based
/// index of the last observation of the old regime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChangePoint {
    pub location: usize,
    /// Ensemble vote count `V`; `None` for single-run methods.
    pub votes: Option<usize>,
    /// `V / |E|`; `None` for single-run methods.
    pub frequency: Option<f64>,
}

impl ChangePoint {
    pub fn bare(location: usize) -> Self {
        Self { location, votes: None, frequency: None }
    }

    pub fn voted(location: usize, votes: usize, ensemble_size: usize) -> Self {
        let frequency = if ensemble_size == 0 { 0.0 } else { votes as f64 / ensemble_size as f64 };
        Self { location, votes: Some(votes), frequency: Some(frequency) }
    }
}

/// Estimated change-points sorted by location.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChangePointSet {
    entries: Vec<ChangePoint>,
    /// Number of ensemble draws `M` (1 for BS/WBS).
    pub total_draws: usize,
    /// `|E|`: total number of detections pooled over all draws.
    pub ensemble_size: usize,
    pub method: Method,
}

impl ChangePointSet {
    pub fn new(
        mut entries: Vec<ChangePoint>,
        total_draws: usize,
        ensemble_size: usize,
        method: Method,
    ) -> Result<Self> {
        entries.sort_by_key(|c| c.location);
        if let Some(w) = entries.windows(2).find(|w| w[0].location == w[1].location) {
            return Err(Error::invalid(format!("duplicate change-point location {}", w[0].location)));
        }
        Ok(Self { entries, total_draws, ensemble_size, method })
    }

    /// Unvoted set from bare locations (BS, WBS).
    pub fn from_locations(locations: &[usize], method: Method) -> Self {
        let mut locs = locations.to_vec();
        locs.sort_unstable();
        locs.dedup();
        let n = locs.len();
        Self {
            entries: locs.into_iter().map(ChangePoint::bare).collect(),
            total_draws: 1,
            ensemble_size: n,
            method,
        }
    }

    pub fn entries(&self) -> &[ChangePoint] {
        &self.entries
    }

    pub fn locations(&self) -> Vec<usize> {
        self.entries.iter().map(|c| c.location).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries in rank order: votes descending, then frequency descending,
    /// then location ascending.
    pub fn ranked(&self) -> Vec<ChangePoint> {
        let mut v = self.entries.clone();
        v.sort_by(|a, b| {
            b.votes
                .unwrap_or(0)
                .cmp(&a.votes.unwrap_or(0))
                .then_with(|| {
                    b.frequency.unwrap_or(0.0).total_cmp(&a.frequency.unwrap_or(0.0))
                })
                .then_with(|| a.location.cmp(&b.location))
        });
        v
    }

    pub(crate) fn with_entries(&self, entries: Vec<ChangePoint>) -> Self {
        let mut entries = entries;
        entries.sort_by_key(|c| c.location);
        Self { entries, ..self.clone() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sorted_and_unique() {
        let set = ChangePointSet::new(
            vec![ChangePoint::voted(30, 5, 20), ChangePoint::voted(10, 9, 20)],
            10,
            20,
            Method::Ebs,
        )
        .unwrap();
        assert_eq!(set.locations(), vec![10, 30]);
        assert_eq!(set.entries()[0].frequency, Some(0.45));
        let dup = ChangePointSet::new(
            vec![ChangePoint::bare(3), ChangePoint::bare(3)],
            1,
            2,
            Method::Bs,
        );
        assert!(dup.is_err());
    }

    #[test]
    fn ranking_breaks_ties_leftmost() {
        let set = ChangePointSet::new(
            vec![
                ChangePoint::voted(50, 4, 10),
                ChangePoint::voted(20, 4, 10),
                ChangePoint::voted(70, 6, 10),
            ],
            5,
            10,
            Method::Ebs,
        )
        .unwrap();
        let r: Vec<_> = set.ranked().iter().map(|c| c.location).collect();
        assert_eq!(r, vec![70, 20, 50]);
    }

    #[test]
    fn method_parse() {
        assert_eq!("EBS".parse::<Method>().unwrap(), Method::Ebs);
        assert!("pelt".parse::<Method>().is_err());
    }
}
