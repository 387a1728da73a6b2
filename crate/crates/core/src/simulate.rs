// SPDX-License-Identifier: MIT OR Apache-2.0

//! Generators for piecewise-stationary ACD and Hawkes processes and the
//! catalog of named benchmark models.

use rand::Rng;
use rand_distr::{Distribution, Exp1};

use crate::error::{Error, Result};
use crate::params::{AcdParams, HawkesParams, PiecewiseSpec};
use crate::seed::SimSeed;
use crate::series::{DurationSeries, EventSeries};

/// Draws generated and discarded under the first regime before recording.
pub const ACD_BURN_IN: usize = 500;

/// Simulate a time-varying ACD process with `exp(1)` innovations.
///
/// The recursion starts from the first regime's unconditional mean and runs
/// [`ACD_BURN_IN`] steps before the first recorded duration.
pub fn simulate_tvacd(spec: &PiecewiseSpec<AcdParams>, seed: SimSeed) -> DurationSeries {
    let total = spec.total();
    let first = &spec.regimes()[0];
    let max_p = spec.regimes().iter().map(|r| r.alpha().len()).max().unwrap_or(0);
    let max_q = spec.regimes().iter().map(|r| r.beta().len()).max().unwrap_or(0);
    let lag = max_p.max(max_q);

    let n = ACD_BURN_IN + total;
    let mu0 = first.unconditional_mean();
    let mut x = vec![mu0; lag + n];
    let mut psi = vec![mu0; lag + n];
    let mut rng = seed.rng();

    for i in 0..n {
        let params = if i < ACD_BURN_IN { first } else { spec.regime_at(i - ACD_BURN_IN) };
        let t = lag + i;
        let mut m = params.omega();
        for (j, a) in params.alpha().iter().enumerate() {
            m += a * x[t - 1 - j];
        }
        for (k, b) in params.beta().iter().enumerate() {
            m += b * psi[t - 1 - k];
        }
        let e: f64 = Exp1.sample(&mut rng);
        psi[t] = m;
        // exp(1) can return exactly 0 in principle; keep durations positive
        x[t] = m * e.max(f64::MIN_POSITIVE);
    }

    DurationSeries::new(x.split_off(lag + ACD_BURN_IN))
        .expect("ACD recursion under valid parameters yields positive durations")
}

/// Simulate a time-varying Hawkes process on `[0, spec.total()]` by thinning.
///
/// The returned series starts with the origin `τ_0 = 0`, so its length is the
/// event count plus one. Parameters switch at the change-point times while
/// the event history is kept, and the intensity at time zero is `λ_0`.
pub fn simulate_tvhawkes(spec: &PiecewiseSpec<HawkesParams>, seed: SimSeed) -> Result<EventSeries> {
    let horizon = spec.total();
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(Error::invalid(format!("horizon must be positive and finite; got {horizon}")));
    }
    let mut rng = seed.rng();
    let mut events: Vec<f64> = vec![0.0];
    let mut regime = 0usize;
    let mut params = &spec.regimes()[0];
    // excitation sums S_j = Σ_{past} exp(−β_j (now − τ_t)), unit weights
    let mut excitation = vec![0.0; params.alpha().len()];
    let mut now = 0.0f64;

    let intensity = |p: &HawkesParams, s: &[f64]| -> f64 {
        p.lambda0() + p.alpha().iter().zip(s).map(|(a, v)| a * v).sum::<f64>()
    };

    loop {
        let boundary = spec.change_points().get(regime).copied().unwrap_or(horizon).min(horizon);
        let upper = intensity(params, &excitation);
        if !upper.is_finite() || upper <= 0.0 {
            return Err(Error::NonFinite { index: events.len(), what: "Hawkes intensity bound" });
        }
        let wait: f64 = Exp1.sample(&mut rng);
        let candidate = now + wait / upper;

        if candidate >= boundary {
            if boundary >= horizon {
                break;
            }
            now = boundary;
            regime += 1;
            params = &spec.regimes()[regime];
            excitation = params
                .beta()
                .iter()
                .map(|b| events[1..].iter().map(|t| (-b * (now - t)).exp()).sum())
                .collect();
            continue;
        }

        let dt = candidate - now;
        for (s, b) in excitation.iter_mut().zip(params.beta()) {
            *s *= (-b * dt).exp();
        }
        now = candidate;
        let lambda = intensity(params, &excitation);
        if !lambda.is_finite() {
            return Err(Error::NonFinite { index: events.len(), what: "Hawkes intensity" });
        }
        let u: f64 = rng.random();
        if u * upper <= lambda && now > *events.last().unwrap_or(&0.0) {
            events.push(now);
            for s in excitation.iter_mut() {
                *s += 1.0;
            }
        }
    }

    EventSeries::new(events)
}

/// A simulatable model: ACD over observation indices, or Hawkes over time.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Acd(PiecewiseSpec<AcdParams>),
    Hawkes(PiecewiseSpec<HawkesParams>),
}

/// One simulated path in duration form.
#[derive(Debug, Clone)]
pub struct Sample {
    pub durations: DurationSeries,
    /// Event times when the model is a point process.
    pub timestamps: Option<EventSeries>,
    /// True change-points as duration counts (see [`crate::ChangePoint`]).
    pub change_points: Vec<usize>,
}

impl Model {
    pub fn simulate(&self, seed: SimSeed) -> Result<Sample> {
        match self {
            Model::Acd(spec) => Ok(Sample {
                durations: simulate_tvacd(spec, seed),
                timestamps: None,
                change_points: spec.change_points().to_vec(),
            }),
            Model::Hawkes(spec) => {
                let ts = simulate_tvhawkes(spec, seed)?;
                // a duration belongs to the regime of the event that closes it
                let change_points = spec
                    .change_points()
                    .iter()
                    .map(|&c| ts.timestamps()[1..].iter().take_while(|&&t| t < c).count())
                    .collect();
                Ok(Sample { durations: ts.durations(), timestamps: Some(ts), change_points })
            }
        }
    }

    pub fn change_point_count(&self) -> usize {
        match self {
            Model::Acd(s) => s.change_points().len(),
            Model::Hawkes(s) => s.change_points().len(),
        }
    }
}

pub const CATALOG_NAMES: [&str; 10] =
    ["S1", "S2", "S3", "S4", "S5", "EQ10", "B1", "B2", "B3", "B4"];

/// Named benchmark model. `B4` draws its layout per replication.
#[derive(Debug, Clone, PartialEq)]
pub struct CatalogModel {
    pub name: &'static str,
    generator: Generator,
}

#[derive(Debug, Clone, PartialEq)]
enum Generator {
    Fixed(Model),
    RandomLayout { total: usize, min_spacing: usize, alpha: f64, beta: f64 },
}

impl CatalogModel {
    /// The fixed parameterization, if the model has one.
    pub fn model(&self) -> Option<&Model> {
        match &self.generator {
            Generator::Fixed(m) => Some(m),
            Generator::RandomLayout { .. } => None,
        }
    }

    pub fn is_stationary(&self) -> bool {
        matches!(&self.generator, Generator::Fixed(m) if m.change_point_count() == 0)
    }

    /// Concrete model for one replication.
    pub fn instantiate(&self, seed: SimSeed) -> Model {
        match &self.generator {
            Generator::Fixed(m) => m.clone(),
            &Generator::RandomLayout { total, min_spacing, alpha, beta } => {
                let mut rng = seed.rng();
                let n: usize = rng.random_range(2..=10);
                let slack = total - (n + 1) * min_spacing;
                let mut offsets: Vec<usize> = (0..n).map(|_| rng.random_range(0..=slack)).collect();
                offsets.sort_unstable();
                let cps: Vec<usize> =
                    offsets.iter().enumerate().map(|(i, o)| o + (i + 1) * min_spacing).collect();
                let regimes = (0..=n)
                    .map(|i| {
                        let omega = if i % 2 == 0 { 1.0 } else { 3.0 };
                        AcdParams::new(omega, vec![alpha], vec![beta]).expect("admissible")
                    })
                    .collect();
                let spec = PiecewiseSpec::new(regimes, cps, total)
                    .and_then(|s| s.with_min_spacing(min_spacing))
                    .expect("layout respects spacing");
                Model::Acd(spec)
            }
        }
    }

    pub fn sample(&self, seed: SimSeed) -> Result<Sample> {
        self.instantiate(seed.derive(0xB4)).simulate(seed)
    }
}

fn acd(omega: f64, alpha: f64, beta: f64) -> AcdParams {
    AcdParams::new(omega, vec![alpha], vec![beta]).expect("catalog parameters are admissible")
}

fn hawkes(lambda0: f64, alpha: &[f64], beta: &[f64], horizon: f64) -> Model {
    let p = HawkesParams::new(lambda0, alpha.to_vec(), beta.to_vec())
        .expect("catalog parameters are admissible");
    Model::Hawkes(PiecewiseSpec::stationary(p, horizon).expect("valid horizon"))
}

/// Alternating-`ω` ACD with fixed dynamics and the given change-points.
fn alternating(levels: [f64; 2], cps: Vec<usize>, total: usize, a: f64, b: f64, spacing: usize) -> Model {
    let regimes = (0..=cps.len()).map(|i| acd(levels[i % 2], a, b)).collect();
    let spec = PiecewiseSpec::new(regimes, cps, total)
        .and_then(|s| s.with_min_spacing(spacing))
        .expect("catalog layout is valid");
    Model::Acd(spec)
}

/// Teeth pattern: `ω` alternates 1/16, 1/4 with changes at 47.5, 48.5,
/// 49.5 and 50.5 percent of the sample.
fn teeth(total: usize) -> Model {
    let cps = [0.475, 0.485, 0.495, 0.505]
        .iter()
        .map(|f| (f * total as f64).round() as usize)
        .collect::<Vec<_>>();
    let spacing = cps.windows(2).map(|w| w[1] - w[0]).min().unwrap_or(total);
    alternating([1.0 / 16.0, 0.25], cps, total, 0.1, 0.7, spacing)
}

/// Look up a benchmark model by name (case-insensitive).
pub fn model_catalog(name: &str) -> Result<CatalogModel> {
    let upper = name.to_ascii_uppercase();
    let (name, generator) = match upper.as_str() {
        "S1" => ("S1", Generator::Fixed(hawkes(2.0, &[], &[], 1000.0))),
        "S2" => ("S2", Generator::Fixed(hawkes(0.5, &[0.1], &[0.7], 500.0))),
        "S3" => ("S3", Generator::Fixed(hawkes(5.0, &[0.4], &[0.7], 500.0))),
        "S4" => (
            "S4",
            Generator::Fixed(Model::Acd(PiecewiseSpec::stationary(acd(1.0, 0.1, 0.7), 2000).unwrap())),
        ),
        "S5" => (
            "S5",
            Generator::Fixed(Model::Acd(PiecewiseSpec::stationary(acd(3.0, 0.15, 0.5), 2000).unwrap())),
        ),
        "EQ10" => ("EQ10", Generator::Fixed(teeth(3000))),
        "B1" => ("B1", Generator::Fixed(alternating([1.0, 4.0], vec![1000], 2000, 0.1, 0.3, 1000))),
        "B2" => ("B2", Generator::Fixed(teeth(2000))),
        "B3" => {
            let cps = (1..=19).map(|k| k * 300).collect();
            ("B3", Generator::Fixed(alternating([1.0 / 16.0, 0.25], cps, 6000, 0.1, 0.5, 300)))
        }
        "B4" => (
            "B4",
            Generator::RandomLayout { total: 3000, min_spacing: 100, alpha: 0.1, beta: 0.5 },
        ),
        _ => {
            return Err(Error::UnknownModel {
                name: name.to_string(),
                valid: CATALOG_NAMES.join(", "),
            })
        }
    };
    Ok(CatalogModel { name, generator })
}
