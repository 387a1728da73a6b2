// SPDX-License-Identifier: MIT OR Apache-2.0

//! CUSUM statistic and the binary-segmentation family: plain BS, Wild BS and
//! Ensemble BS with majority voting and rank-based pruning.
//!
//! Intervals are 0-based and half-open. A split at `b` separates `[s, b)`
//! from `[b, e)`, so `b` is also the 1-based index of the last observation
//! of the left part, which is how change-points are reported.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::calibrate::CalibrationResult;
use crate::changepoints::{ChangePoint, ChangePointSet, Method};
use crate::error::{Error, Result};
use crate::par;
use crate::seed::SimSeed;
use crate::transform::TransformedSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Interval {
    pub start: usize,
    pub end: usize,
}

impl Interval {
    pub fn new(start: usize, end: usize) -> Result<Self> {
        if start >= end {
            return Err(Error::invalid(format!("empty interval [{start}, {end})")));
        }
        Ok(Self { start, end })
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    pub fn contains(&self, other: &Interval) -> bool {
        self.start <= other.start && other.end <= self.end
    }
}

/// Prefix sums of a (centred) series; every CUSUM value is O(1) afterwards.
#[derive(Debug, Clone)]
pub struct CusumTable {
    prefix: Vec<f64>,
}

impl CusumTable {
    pub fn new(y: &[f64]) -> Self {
        let centre = if y.is_empty() { 0.0 } else { y.iter().sum::<f64>() / y.len() as f64 };
        let mut prefix = Vec::with_capacity(y.len() + 1);
        let mut acc = 0.0;
        prefix.push(0.0);
        for v in y {
            acc += v - centre;
            prefix.push(acc);
        }
        Self { prefix }
    }

    pub fn len(&self) -> usize {
        self.prefix.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn check(&self, iv: Interval) -> Result<()> {
        if iv.end > self.len() || iv.start >= iv.end {
            return Err(Error::invalid(format!(
                "interval [{}, {}) outside series of length {}",
                iv.start,
                iv.end,
                self.len()
            )));
        }
        Ok(())
    }

    #[inline]
    fn value(&self, start: usize, split: usize, end: usize) -> f64 {
        let nl = (split - start) as f64;
        let nr = (end - split) as f64;
        let left = self.prefix[split] - self.prefix[start];
        let right = self.prefix[end] - self.prefix[split];
        (nl * nr / (nl + nr)).sqrt() * (left / nl - right / nr)
    }

    /// Signed CUSUM `√(n_l n_r / n) (ȳ_left − ȳ_right)` for a split inside `iv`.
    pub fn cusum(&self, iv: Interval, split: usize) -> Result<f64> {
        self.check(iv)?;
        if split <= iv.start || split >= iv.end {
            return Err(Error::invalid(format!(
                "split {split} must lie strictly inside [{}, {})",
                iv.start, iv.end
            )));
        }
        Ok(self.value(iv.start, split, iv.end))
    }

    /// Split maximizing `|CUSUM|` and the maximum; ties go to the leftmost split.
    pub fn max_cusum(&self, iv: Interval) -> Result<(usize, f64)> {
        self.check(iv)?;
        if iv.len() < 2 {
            return Err(Error::invalid(format!(
                "interval [{}, {}) has no admissible split",
                iv.start, iv.end
            )));
        }
        Ok(self.max_unchecked(iv.start, iv.end))
    }

    fn max_unchecked(&self, start: usize, end: usize) -> (usize, f64) {
        let mut best = (start + 1, -1.0);
        for b in start + 1..end {
            let v = self.value(start, b, end).abs();
            if v > best.1 {
                best = (b, v);
            }
        }
        best
    }
}

/// `π_T = C_1 √(log T)`.
pub fn threshold(len: usize, c1: f64) -> f64 {
    c1 * (len as f64).ln().sqrt()
}

/// How the CUSUM threshold depends on the length of the searched interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ThresholdRule {
    /// Same `π` for every length.
    Fixed(f64),
    /// `π_T = C_1 √(log T)` with a constant `C_1`.
    Constant(f64),
    /// `π_T = C_1(T) √(log T)` with a calibrated curve.
    Calibrated(CalibrationResult),
}

impl ThresholdRule {
    pub fn for_length(&self, len: usize) -> f64 {
        match self {
            ThresholdRule::Fixed(pi) => *pi,
            ThresholdRule::Constant(c1) => threshold(len, *c1),
            ThresholdRule::Calibrated(cal) => threshold(len, cal.c1(len as f64)),
        }
    }
}

impl Default for ThresholdRule {
    fn default() -> Self {
        ThresholdRule::Calibrated(CalibrationResult::shipped())
    }
}

/// Binary segmentation on `iv`: split at the maximal |CUSUM| while it exceeds
/// `pi` and the interval has at least `min_len` points. Sorted output.
pub fn binseg(table: &CusumTable, iv: Interval, pi: f64, min_len: usize) -> Result<Vec<usize>> {
    table.check(iv)?;
    Ok(binseg_unchecked(table, iv, pi, min_len.max(2)))
}

fn binseg_unchecked(table: &CusumTable, iv: Interval, pi: f64, min_len: usize) -> Vec<usize> {
    let mut found = Vec::new();
    let mut stack = vec![(iv.start, iv.end)];
    while let Some((s, e)) = stack.pop() {
        if e - s < min_len {
            continue;
        }
        let (b, v) = table.max_unchecked(s, e);
        if v > pi {
            found.push(b);
            stack.push((b, e));
            stack.push((s, b));
        }
    }
    found.sort_unstable();
    found
}

/// `count` intervals drawn uniformly from `{[s, e) ⊆ [0, n) : e − s ≥ min_len}`.
/// Draw `m` uses the generator of `seed.derive(m)`.
pub fn draw_intervals(n: usize, count: usize, min_len: usize, seed: SimSeed) -> Result<Vec<Interval>> {
    if n < min_len || n < 2 {
        return Err(Error::invalid(format!(
            "series of length {n} is shorter than the minimum interval length {min_len}"
        )));
    }
    Ok((0..count)
        .map(|m| {
            let mut rng = seed.derive(m as u64).rng();
            loop {
                let a = rng.random_range(0..=n);
                let b = rng.random_range(0..=n);
                let (s, e) = if a < b { (a, b) } else { (b, a) };
                if e - s >= min_len.max(2) {
                    break Interval { start: s, end: e };
                }
            }
        })
        .collect())
}

/// Wild binary segmentation over pre-drawn intervals. The working interval
/// itself always competes with the drawn intervals it contains.
pub fn wbs(table: &CusumTable, iv: Interval, draws: &[Interval], pi: f64, min_len: usize) -> Result<Vec<usize>> {
    table.check(iv)?;
    for d in draws {
        table.check(*d)?;
    }
    let min_len = min_len.max(2);
    let maxima: Vec<(Interval, usize, f64)> = par::map_indexed(draws.len(), |i| {
        let d = draws[i];
        let (b, v) = table.max_unchecked(d.start, d.end);
        (d, b, v)
    });

    let mut found = Vec::new();
    let mut stack = vec![iv];
    while let Some(w) = stack.pop() {
        if w.len() < min_len {
            continue;
        }
        let mut best = table.max_unchecked(w.start, w.end);
        for &(d, b, v) in &maxima {
            if w.contains(&d) && (v > best.1 || (v == best.1 && b < best.0)) {
                best = (b, v);
            }
        }
        if best.1 > pi {
            let b = best.0;
            found.push(b);
            stack.push(Interval { start: b, end: w.end });
            stack.push(Interval { start: w.start, end: b });
        }
    }
    found.sort_unstable();
    Ok(found)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Selection {
    /// Keep `V > π_thr · M`.
    Threshold,
    /// Keep `V` strictly above the mean vote over all candidates.
    AboveMean,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EbsConfig {
    /// Number of random draws `M`.
    pub draws: usize,
    /// Relative vote threshold `π_thr`.
    pub pi_thr: f64,
    pub threshold: ThresholdRule,
    pub min_interval_len: usize,
    /// Minimum distance between reported change-points; `None` means
    /// `⌈0.005 T⌉`.
    pub delta: Option<usize>,
    pub selection: Selection,
    pub seed: SimSeed,
}

impl Default for EbsConfig {
    fn default() -> Self {
        Self {
            draws: 500,
            pi_thr: 0.05,
            threshold: ThresholdRule::default(),
            min_interval_len: 20,
            delta: None,
            selection: Selection::Threshold,
            seed: SimSeed::default(),
        }
    }
}

impl EbsConfig {
    pub fn validate(&self) -> Result<()> {
        if self.draws == 0 {
            return Err(Error::invalid("the number of draws M must be >= 1"));
        }
        if !(0.0..=1.0).contains(&self.pi_thr) {
            return Err(Error::invalid(format!("pi_thr must lie in [0, 1]; got {}", self.pi_thr)));
        }
        if self.min_interval_len < 3 {
            return Err(Error::invalid(format!(
                "min_interval_len must be >= 3; got {}",
                self.min_interval_len
            )));
        }
        Ok(())
    }

    pub fn delta_for(&self, n: usize) -> usize {
        self.delta.unwrap_or_else(|| default_delta(n))
    }
}

/// `Δ_T = ⌈0.005 T⌉`.
pub fn default_delta(n: usize) -> usize {
    (0.005 * n as f64).ceil() as usize
}

/// Ensemble binary segmentation with randomly drawn intervals.
pub fn ebs(y: &TransformedSeries, cfg: &EbsConfig) -> Result<ChangePointSet> {
    cfg.validate()?;
    let n = y.len();
    if n < 2 * cfg.min_interval_len {
        return Err(Error::invalid(format!(
            "EBS needs at least {} observations; got {n}",
            2 * cfg.min_interval_len
        )));
    }
    let table = CusumTable::new(y.values());
    let draws = draw_intervals(n, cfg.draws, cfg.min_interval_len, cfg.seed)?;
    ensemble(&table, &draws, cfg)
}

/// Binary segmentation on each interval (threshold at the interval's own
/// length), majority vote, selection, then pruning with `Δ_T`.
pub fn ensemble(table: &CusumTable, draws: &[Interval], cfg: &EbsConfig) -> Result<ChangePointSet> {
    cfg.validate()?;
    let candidates = vote(table, draws, &cfg.threshold, cfg.min_interval_len)?;
    Ok(select(&candidates, cfg, table.len()))
}

/// Every location detected by at least one draw, with its vote count `V`
/// and relative frequency `V/|E|`.
pub fn vote(
    table: &CusumTable,
    draws: &[Interval],
    rule: &ThresholdRule,
    min_len: usize,
) -> Result<ChangePointSet> {
    for d in draws {
        table.check(*d)?;
    }
    let min_len = min_len.max(2);
    let detections: Vec<Vec<usize>> = par::map_indexed(draws.len(), |m| {
        let d = draws[m];
        binseg_unchecked(table, d, rule.for_length(d.len()), min_len)
    });

    let mut votes: BTreeMap<usize, usize> = BTreeMap::new();
    for set in &detections {
        for &b in set {
            *votes.entry(b).or_default() += 1;
        }
    }
    let ensemble_size: usize = votes.values().sum();
    let all = votes.iter().map(|(&loc, &v)| ChangePoint::voted(loc, v, ensemble_size)).collect();
    ChangePointSet::new(all, draws.len(), ensemble_size, Method::Ebs)
}

/// Apply the configured selection rule to voted candidates, then prune.
pub fn select(candidates: &ChangePointSet, cfg: &EbsConfig, n: usize) -> ChangePointSet {
    let selected = match cfg.selection {
        Selection::Threshold => {
            let cut = cfg.pi_thr * candidates.total_draws as f64;
            let keep = candidates
                .entries()
                .iter()
                .filter(|c| c.votes.unwrap_or(0) as f64 > cut)
                .copied()
                .collect();
            candidates.with_entries(keep)
        }
        Selection::AboveMean => rank_selection(candidates),
    };
    post_process(&selected, cfg.delta_for(n))
}

/// Keep the highest-ranked points, dropping any point closer than `delta`
/// to an already accepted one. Output sorted by location.
pub fn post_process(cps: &ChangePointSet, delta: usize) -> ChangePointSet {
    let mut accepted: Vec<ChangePoint> = Vec::with_capacity(cps.len());
    for c in cps.ranked() {
        if accepted.iter().all(|a| a.location.abs_diff(c.location) >= delta) {
            accepted.push(c);
        }
    }
    cps.with_entries(accepted)
}

/// Keep points whose vote count is strictly above the mean count.
pub fn rank_selection(cps: &ChangePointSet) -> ChangePointSet {
    if cps.is_empty() {
        return cps.clone();
    }
    let votes = |c: &ChangePoint| c.votes.unwrap_or(1) as f64;
    let mean = cps.entries().iter().map(votes).sum::<f64>() / cps.len() as f64;
    let keep = cps.entries().iter().filter(|c| votes(c) > mean).copied().collect();
    cps.with_entries(keep)
}

/// Which detector to run and its settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorConfig {
    pub method: Method,
    pub ebs: EbsConfig,
    /// Random intervals for WBS.
    pub wbs_draws: usize,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self { method: Method::Ebs, ebs: EbsConfig::default(), wbs_draws: 5000 }
    }
}

impl DetectorConfig {
    pub fn with_method(method: Method) -> Self {
        Self { method, ..Default::default() }
    }
}

/// Run the configured detector on a transformed series. BS and WBS use the
/// threshold at the full length and report no votes.
pub fn detect(y: &TransformedSeries, cfg: &DetectorConfig) -> Result<ChangePointSet> {
    let n = y.len();
    let min_len = cfg.ebs.min_interval_len;
    match cfg.method {
        Method::Ebs => ebs(y, &cfg.ebs),
        Method::Bs => {
            cfg.ebs.validate()?;
            let table = CusumTable::new(y.values());
            let iv = Interval::new(0, n)?;
            let found = binseg(&table, iv, cfg.ebs.threshold.for_length(n), min_len)?;
            Ok(ChangePointSet::from_locations(&found, Method::Bs))
        }
        Method::Wbs => {
            cfg.ebs.validate()?;
            let table = CusumTable::new(y.values());
            let iv = Interval::new(0, n)?;
            let draws = draw_intervals(n, cfg.wbs_draws, min_len, cfg.ebs.seed)?;
            let found = wbs(&table, iv, &draws, cfg.ebs.threshold.for_length(n), min_len)?;
            Ok(ChangePointSet::from_locations(&found, Method::Wbs))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand_distr::{Distribution, StandardNormal};

    fn noise(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = SimSeed::new(seed).rng();
        (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
    }

    /// Direct two-loop evaluation.
    fn cusum_direct(y: &[f64], s: usize, b: usize, e: usize) -> f64 {
        let nl = (b - s) as f64;
        let nr = (e - b) as f64;
        let ml = y[s..b].iter().sum::<f64>() / nl;
        let mr = y[b..e].iter().sum::<f64>() / nr;
        (nl * nr / (nl + nr)).sqrt() * (ml - mr)
    }

    fn series(v: Vec<f64>) -> TransformedSeries {
        TransformedSeries::from_values(v).unwrap()
    }

    #[test]
    fn hand_evaluated_cusum() {
        let t = CusumTable::new(&[0.0, 0.0, 1.0, 1.0]);
        let v = t.cusum(Interval::new(0, 4).unwrap(), 2).unwrap();
        assert!((v + 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_series_has_zero_cusum() {
        let t = CusumTable::new(&[3.5; 50]);
        let iv = Interval::new(0, 50).unwrap();
        for b in 1..50 {
            assert!(t.cusum(iv, b).unwrap().abs() < 1e-12);
        }
        let (b, v) = t.max_cusum(iv).unwrap();
        assert_eq!(b, 1);
        assert!(v.abs() < 1e-12);
    }

    #[test]
    fn split_out_of_range_rejected() {
        let t = CusumTable::new(&[0.0, 1.0, 2.0]);
        let iv = Interval::new(0, 3).unwrap();
        assert!(t.cusum(iv, 0).is_err());
        assert!(t.cusum(iv, 3).is_err());
        assert!(t.max_cusum(Interval { start: 1, end: 2 }).is_err());
        assert!(t.max_cusum(Interval { start: 0, end: 9 }).is_err());
        assert!(Interval::new(4, 4).is_err());
    }

    #[test]
    fn step_is_located() {
        let mut y = vec![0.0; 40];
        y.extend(vec![2.0; 60]);
        let t = CusumTable::new(&y);
        let iv = Interval::new(0, 100).unwrap();
        assert_eq!(t.max_cusum(iv).unwrap().0, 40);
        assert_eq!(binseg(&t, iv, 1.0, 20).unwrap(), vec![40]);
        let draws = draw_intervals(100, 200, 20, SimSeed::new(1)).unwrap();
        assert_eq!(wbs(&t, iv, &draws, 1.0, 20).unwrap(), vec![40]);
    }

    #[test]
    fn constant_series_gives_nothing() {
        let t = CusumTable::new(&[1.0; 300]);
        let iv = Interval::new(0, 300).unwrap();
        assert!(binseg(&t, iv, 0.5, 20).unwrap().is_empty());
        let draws = draw_intervals(300, 100, 20, SimSeed::new(2)).unwrap();
        assert!(wbs(&t, iv, &draws, 0.5, 20).unwrap().is_empty());
        let cfg = EbsConfig { threshold: ThresholdRule::Fixed(0.5), ..Default::default() };
        assert!(ebs(&series(vec![1.0; 300]), &cfg).unwrap().is_empty());
    }

    #[test]
    fn threshold_values() {
        assert!((threshold_f(std::f64::consts::E, 1.0) - 1.0).abs() < 1e-12);
        let mut prev = 0.0;
        for n in [10, 100, 1000, 10_000] {
            let v = threshold(n, 1.3);
            assert!(v > prev);
            prev = v;
        }
    }

    fn threshold_f(t: f64, c1: f64) -> f64 {
        c1 * t.ln().sqrt()
    }

    #[test]
    fn drawn_intervals_are_admissible() {
        let d = draw_intervals(500, 2000, 20, SimSeed::new(3)).unwrap();
        assert!(d.iter().all(|iv| iv.len() >= 20 && iv.end <= 500));
        assert_eq!(d, draw_intervals(500, 2000, 20, SimSeed::new(3)).unwrap());
        assert!(draw_intervals(10, 1, 20, SimSeed::new(3)).is_err());
    }

    #[test]
    fn post_process_examples() {
        let set = |v: &[(usize, usize)]| {
            let total: usize = v.iter().map(|x| x.1).sum();
            ChangePointSet::new(
                v.iter().map(|&(l, c)| ChangePoint::voted(l, c, total)).collect(),
                500,
                total,
                Method::Ebs,
            )
            .unwrap()
        };
        let out = post_process(&set(&[(1000, 400), (1005, 250)]), 15);
        assert_eq!(out.locations(), vec![1000]);
        let out = post_process(&set(&[(1000, 400), (1300, 250)]), 15);
        assert_eq!(out.locations(), vec![1000, 1300]);
        let out = post_process(&set(&[(100, 5), (115, 9), (130, 7)]), 15);
        assert_eq!(out.locations(), vec![100, 115, 130]);
    }

    #[test]
    fn rank_selection_examples() {
        let set = |v: &[usize]| {
            let total: usize = v.iter().sum();
            ChangePointSet::new(
                v.iter().enumerate().map(|(i, &c)| ChangePoint::voted(100 * (i + 1), c, total)).collect(),
                100,
                total,
                Method::Ebs,
            )
            .unwrap()
        };
        assert!(rank_selection(&set(&[10, 10, 10])).is_empty());
        assert_eq!(rank_selection(&set(&[100, 10])).locations(), vec![100]);
        assert_eq!(rank_selection(&set(&[50, 40, 3])).locations(), vec![100, 200]);
    }

    #[test]
    fn pi_thr_one_selects_nothing() {
        let mut y = noise(400, 4);
        for v in &mut y[200..] {
            *v += 3.0;
        }
        let cfg = EbsConfig {
            pi_thr: 1.0,
            draws: 50,
            threshold: ThresholdRule::Constant(1.0),
            ..Default::default()
        };
        assert!(ebs(&series(y), &cfg).unwrap().is_empty());
    }

    #[test]
    fn ebs_finds_a_clear_step_with_votes() {
        let mut y = noise(600, 5);
        for v in &mut y[300..] {
            *v += 2.0;
        }
        let cfg = EbsConfig { threshold: ThresholdRule::Constant(1.5), ..Default::default() };
        let out = ebs(&series(y), &cfg).unwrap();
        assert_eq!(out.len(), 1);
        let c = out.entries()[0];
        assert!(c.location.abs_diff(300) <= 3);
        assert!(c.votes.unwrap() > 25);
        assert!(c.frequency.unwrap() > 0.0 && c.frequency.unwrap() <= 1.0);
        assert_eq!(out.total_draws, 500);
    }

    #[test]
    fn ebs_rejects_bad_config() {
        let y = series(noise(100, 6));
        assert!(ebs(&y, &EbsConfig { draws: 0, ..Default::default() }).is_err());
        assert!(ebs(&y, &EbsConfig { pi_thr: 1.5, ..Default::default() }).is_err());
        assert!(ebs(&y, &EbsConfig { min_interval_len: 2, ..Default::default() }).is_err());
        assert!(ebs(&series(noise(30, 6)), &EbsConfig::default()).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn cusum_matches_direct(y in prop::collection::vec(-5.0f64..5.0, 2..60)) {
            let t = CusumTable::new(&y);
            let n = y.len();
            for s in 0..n {
                for e in s + 2..=n {
                    let iv = Interval::new(s, e).unwrap();
                    for b in s + 1..e {
                        let fast = t.cusum(iv, b).unwrap();
                        prop_assert!((fast - cusum_direct(&y, s, b, e)).abs() < 1e-9);
                    }
                }
            }
        }

        #[test]
        fn binseg_output_inside_interval(seed in 0u64..1000, n in 40usize..300) {
            let y = noise(n, seed);
            let t = CusumTable::new(&y);
            let iv = Interval::new(0, n).unwrap();
            let found = binseg(&t, iv, 1.5, 10).unwrap();
            prop_assert!(found.windows(2).all(|w| w[0] < w[1]));
            prop_assert!(found.iter().all(|&b| b > 0 && b < n));
        }

        #[test]
        fn location_shift_invariance(seed in 0u64..1000, shift in -50.0f64..50.0) {
            let y = noise(200, seed);
            let shifted: Vec<f64> = y.iter().map(|v| v + shift).collect();
            let a = CusumTable::new(&y);
            let b = CusumTable::new(&shifted);
            let iv = Interval::new(0, 200).unwrap();
            for split in 1..200 {
                prop_assert!((a.cusum(iv, split).unwrap() - b.cusum(iv, split).unwrap()).abs() < 1e-9);
            }
            let cfg = EbsConfig { draws: 60, threshold: ThresholdRule::Constant(0.9), ..Default::default() };
            prop_assert_eq!(
                ebs(&series(y), &cfg).unwrap().locations(),
                ebs(&series(shifted), &cfg).unwrap().locations()
            );
        }

        #[test]
        fn raising_pi_thr_never_adds(seed in 0u64..500, lo in 0.0f64..0.5, gap in 0.0f64..0.5) {
            let mut y = noise(300, seed);
            for v in &mut y[150..] {
                *v += 1.0;
            }
            let y = series(y);
            let base = EbsConfig { draws: 80, threshold: ThresholdRule::Constant(0.8), ..Default::default() };
            let low = ebs(&y, &EbsConfig { pi_thr: lo, ..base.clone() }).unwrap().locations();
            let high = ebs(&y, &EbsConfig { pi_thr: lo + gap, ..base }).unwrap().locations();
            prop_assert!(high.iter().all(|h| low.contains(h)));
        }

        #[test]
        fn post_process_invariants(
            raw in prop::collection::btree_map(0usize..2000, 1usize..500, 0..60),
            delta in 0usize..60,
        ) {
            let total: usize = raw.values().sum();
            let set = ChangePointSet::new(
                raw.iter().map(|(&l, &v)| ChangePoint::voted(l, v, total)).collect(),
                500,
                total,
                Method::Ebs,
            ).unwrap();
            let out = post_process(&set, delta);
            let locs = out.locations();
            for w in locs.windows(2) {
                prop_assert!(w[1] - w[0] >= delta);
            }
            prop_assert!(out.entries().iter().all(|c| set.entries().contains(c)));
            if let Some(top) = set.ranked().first() {
                prop_assert!(locs.contains(&top.location));
            }
        }
    }
}
