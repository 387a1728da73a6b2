// SPDX-License-Identifier: MIT OR Apache-2.0

//! Model parameters and piecewise-constant parameter paths.

use std::fmt::Debug;
use std::ops::Sub;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Admissible region for ACD parameters: `omega_min ≤ ω ≤ omega_max` and
/// `Σα + Σβ ≤ 1 − persistence_margin`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Constraints {
    pub omega_min: f64,
    pub omega_max: f64,
    pub persistence_margin: f64,
}

impl Default for Constraints {
    fn default() -> Self {
        Self { omega_min: 1e-6, omega_max: 1e6, persistence_margin: 0.01 }
    }
}

impl Constraints {
    pub fn max_persistence(&self) -> f64 {
        1.0 - self.persistence_margin
    }
}

/// ACD(p, q) conditional-mean parameters:
/// `ψ_t = ω + Σ_j α_j x_{t−j} + Σ_k β_k ψ_{t−k}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcdParams {
    omega: f64,
    alpha: Vec<f64>,
    beta: Vec<f64>,
}

impl AcdParams {
    pub fn new(omega: f64, alpha: Vec<f64>, beta: Vec<f64>) -> Result<Self> {
        Self::with_constraints(omega, alpha, beta, &Constraints::default())
    }

    pub fn with_constraints(
        omega: f64,
        alpha: Vec<f64>,
        beta: Vec<f64>,
        c: &Constraints,
    ) -> Result<Self> {
        if !omega.is_finite() || omega < c.omega_min || omega > c.omega_max {
            return Err(Error::constraint(format!(
                "omega = {omega} outside [{}, {}]",
                c.omega_min, c.omega_max
            )));
        }
        if let Some(v) = alpha.iter().chain(&beta).find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::constraint(format!("alpha/beta must be finite and >= 0; got {v}")));
        }
        let s: f64 = alpha.iter().chain(&beta).sum();
        if s > c.max_persistence() {
            return Err(Error::constraint(format!(
                "persistence sum(alpha) + sum(beta) = {s} exceeds {}",
                c.max_persistence()
            )));
        }
        Ok(Self { omega, alpha, beta })
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    /// `(p, q)`: number of duration lags and of conditional-mean lags.
    pub fn order(&self) -> (usize, usize) {
        (self.alpha.len(), self.beta.len())
    }

    pub fn persistence(&self) -> f64 {
        self.alpha.iter().chain(&self.beta).sum()
    }

    pub fn unconditional_mean(&self) -> f64 {
        self.omega / (1.0 - self.persistence())
    }
}

/// Exponential-kernel Hawkes intensity
/// `λ(τ) = λ_0 + Σ_{τ_t < τ} Σ_j α_j exp(−β_j (τ − τ_t))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HawkesParams {
    lambda0: f64,
    alpha: Vec<f64>,
    beta: Vec<f64>,
}

impl HawkesParams {
    pub fn new(lambda0: f64, alpha: Vec<f64>, beta: Vec<f64>) -> Result<Self> {
        if !(lambda0.is_finite() && lambda0 > 0.0) {
            return Err(Error::constraint(format!("lambda0 must be > 0; got {lambda0}")));
        }
        if alpha.len() != beta.len() {
            return Err(Error::constraint(format!(
                "alpha and beta lengths differ ({} vs {})",
                alpha.len(),
                beta.len()
            )));
        }
        if let Some(v) = alpha.iter().chain(&beta).find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::constraint(format!("kernel parameters must be > 0; got {v}")));
        }
        let p = Self { lambda0, alpha, beta };
        let br = p.branching_ratio();
        if br >= 1.0 {
            return Err(Error::constraint(format!("branching ratio {br} must be < 1")));
        }
        Ok(p)
    }

    /// Homogeneous Poisson process with rate `lambda0`.
    pub fn poisson(lambda0: f64) -> Result<Self> {
        Self::new(lambda0, vec![], vec![])
    }

    pub fn lambda0(&self) -> f64 {
        self.lambda0
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn branching_ratio(&self) -> f64 {
        self.alpha.iter().zip(&self.beta).map(|(a, b)| a / b).sum()
    }

    /// Stationary mean intensity `λ_0 / (1 − Σ α_j/β_j)`.
    pub fn mean_intensity(&self) -> f64 {
        self.lambda0 / (1.0 - self.branching_ratio())
    }
}

/// A parameter family that can be switched at change-points.
pub trait Regime: Clone + PartialEq + Debug {
    /// Observation index for ACD models, time for Hawkes models.
    type Location: Copy + PartialOrd + Debug + Default + Sub<Output = Self::Location>;
}

impl Regime for AcdParams {
    type Location = usize;
}

impl Regime for HawkesParams {
    type Location = f64;
}

/// Piecewise-constant parameters with change-points `0 < η_1 < … < η_N < T`.
///
/// Location `η` marks the end of a regime: with 1-based observation indices,
/// observations `η_{i}+1 ..= η_{i+1}` share regime `i`. Equivalently, the
/// 0-based observation `η_i` is the first one of the new regime.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseSpec<P: Regime> {
    regimes: Vec<P>,
    change_points: Vec<P::Location>,
    total: P::Location,
    min_spacing: Option<P::Location>,
}

impl<P: Regime> PiecewiseSpec<P> {
    pub fn new(regimes: Vec<P>, change_points: Vec<P::Location>, total: P::Location) -> Result<Self> {
        if regimes.len() != change_points.len() + 1 {
            return Err(Error::invalid(format!(
                "{} regimes need {} change-points; got {}",
                regimes.len(),
                regimes.len().saturating_sub(1),
                change_points.len()
            )));
        }
        let zero = P::Location::default();
        let mut prev = zero;
        for (i, &cp) in change_points.iter().enumerate() {
            if cp.partial_cmp(&prev) != Some(std::cmp::Ordering::Greater) {
                return Err(Error::invalid(format!(
                    "change-point {i} ({cp:?}) must exceed the previous one ({prev:?})"
                )));
            }
            prev = cp;
        }
        if total.partial_cmp(&prev) != Some(std::cmp::Ordering::Greater) {
            return Err(Error::invalid(format!(
                "total length {total:?} must exceed the last change-point {prev:?}"
            )));
        }
        if let Some(i) = regimes.windows(2).position(|w| w[0] == w[1]) {
            return Err(Error::invalid(format!("regimes {i} and {} are identical", i + 1)));
        }
        Ok(Self { regimes, change_points, total, min_spacing: None })
    }

    pub fn stationary(params: P, total: P::Location) -> Result<Self> {
        Self::new(vec![params], vec![], total)
    }

    /// Require every segment (including the first and last) to be at least
    /// `delta` long.
    pub fn with_min_spacing(mut self, delta: P::Location) -> Result<Self> {
        let mut bounds = vec![P::Location::default()];
        bounds.extend(&self.change_points);
        bounds.push(self.total);
        if let Some(w) = bounds.windows(2).find(|w| w[1] - w[0] < delta) {
            return Err(Error::invalid(format!(
                "segment [{:?}, {:?}) is shorter than the minimum spacing {delta:?}",
                w[0], w[1]
            )));
        }
        self.min_spacing = Some(delta);
        Ok(self)
    }

    pub fn regimes(&self) -> &[P] {
        &self.regimes
    }

    pub fn change_points(&self) -> &[P::Location] {
        &self.change_points
    }

    pub fn total(&self) -> P::Location {
        self.total
    }

    pub fn min_spacing(&self) -> Option<P::Location> {
        self.min_spacing
    }

    /// Index of the regime in force at `loc`.
    pub fn regime_index(&self, loc: P::Location) -> usize {
        self.change_points.iter().take_while(|&&cp| cp <= loc).count()
    }

    pub fn regime_at(&self, loc: P::Location) -> &P {
        &self.regimes[self.regime_index(loc)]
    }
}
