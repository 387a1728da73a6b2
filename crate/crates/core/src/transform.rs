// SPDX-License-Identifier: MIT OR Apache-2.0

//! Stationary ACD fit and the bounded log-residual transform
//! `y_t = log(U_t + ε)`, `U_t = x_t / ψ̌_t`.
//!
//! `ψ̌_t` is the conditional mean of the fitted model with its dynamic
//! coefficients divided by a dampening factor `F ≥ 1`, plus `ε·x_t`, which
//! caps `U_t` at `1/ε`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optim::{nelder_mead, NelderMeadOptions};
use crate::params::{AcdParams, Constraints};
use crate::series::DurationSeries;

/// `(p, q)`: lags of the duration and of the conditional mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AcdOrder {
    pub p: usize,
    pub q: usize,
}

impl AcdOrder {
    pub const fn new(p: usize, q: usize) -> Self {
        Self { p, q }
    }

    pub fn n_params(&self) -> usize {
        1 + self.p + self.q
    }
}

impl Default for AcdOrder {
    fn default() -> Self {
        Self::new(0, 1)
    }
}

impl std::fmt::Display for AcdOrder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{},{}", self.p, self.q)
    }
}

impl std::str::FromStr for AcdOrder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::invalid(format!("order must look like `p,q`; got `{s}`"));
        let (p, q) = s.split_once(',').ok_or_else(bad)?;
        Ok(Self::new(p.trim().parse().map_err(|_| bad())?, q.trim().parse().map_err(|_| bad())?))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcdFit {
    pub params: AcdParams,
    /// Exponential quasi log-likelihood `−Σ (log ψ_t + x_t/ψ_t)`.
    pub loglik: f64,
    pub converged: bool,
    pub order: AcdOrder,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Dampening {
    Auto,
    Fixed(f64),
}

impl std::fmt::Display for Dampening {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Dampening::Auto => f.write_str("auto"),
            Dampening::Fixed(v) => write!(f, "{v}"),
        }
    }
}

impl std::str::FromStr for Dampening {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(Dampening::Auto);
        }
        let v: f64 = s
            .parse()
            .map_err(|_| Error::invalid(format!("dampening must be `auto` or a number >= 1; got `{s}`")))?;
        if !(v.is_finite() && v >= 1.0) {
            return Err(Error::invalid(format!("fixed dampening must be >= 1; got {v}")));
        }
        Ok(Dampening::Fixed(v))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransformConfig {
    pub epsilon: f64,
    pub dampening: Dampening,
    pub order: AcdOrder,
}

impl Default for TransformConfig {
    fn default() -> Self {
        Self { epsilon: 1e-3, dampening: Dampening::Auto, order: AcdOrder::default() }
    }
}

impl TransformConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(Error::invalid(format!("epsilon must be > 0; got {}", self.epsilon)));
        }
        if let Dampening::Fixed(f) = self.dampening {
            if !(f.is_finite() && f >= 1.0) {
                return Err(Error::invalid(format!("fixed dampening must be >= 1; got {f}")));
            }
        }
        Ok(())
    }
}

/// Detection input `y_t`, one value per duration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformedSeries {
    values: Vec<f64>,
}

impl TransformedSeries {
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index: i, what: "transformed value" });
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
}

/// Conditional means `ψ_t` for `params`, with pre-sample values set to `init`.
fn conditional_means(x: &[f64], omega: f64, alpha: &[f64], beta: &[f64], init: f64) -> Vec<f64> {
    let mut psi = Vec::with_capacity(x.len());
    for t in 0..x.len() {
        let mut m = omega;
        for (j, a) in alpha.iter().enumerate() {
            m += a * if t > j { x[t - 1 - j] } else { init };
        }
        for (k, b) in beta.iter().enumerate() {
            m += b * if t > k { psi[t - 1 - k] } else { init };
        }
        psi.push(m);
    }
    psi
}

fn quasi_loglik(x: &[f64], omega: f64, alpha: &[f64], beta: &[f64], init: f64) -> f64 {
    let psi = conditional_means(x, omega, alpha, beta, init);
    -x.iter().zip(&psi).map(|(x, p)| p.ln() + x / p).sum::<f64>()
}

/// Maps unconstrained coordinates onto the admissible region.
struct Reparam {
    mean: f64,
    order: AcdOrder,
    c: Constraints,
}

impl Reparam {
    /// `θ_0 = log(ω/x̄)`; the lag coefficients are a softmax share of the
    /// maximal persistence with an implicit zero slot.
    fn decode(&self, theta: &[f64]) -> (f64, Vec<f64>, Vec<f64>) {
        let omega = (self.mean * theta[0].clamp(-700.0, 700.0).exp())
            .clamp(self.c.omega_min, self.c.omega_max);
        let lags = &theta[1..];
        let top = lags.iter().copied().fold(0.0f64, f64::max);
        let w: Vec<f64> = lags.iter().map(|t| (t - top).exp()).collect();
        let denom = (-top).exp() + w.iter().sum::<f64>();
        let coef: Vec<f64> = w.iter().map(|v| self.c.max_persistence() * v / denom).collect();
        let (a, b) = coef.split_at(self.order.p);
        (omega, a.to_vec(), b.to_vec())
    }

    fn encode(&self, omega: f64, coef: &[f64]) -> Vec<f64> {
        let s: f64 = coef.iter().sum();
        let slack = (self.c.max_persistence() - s).max(1e-9);
        let mut theta = vec![(omega / self.mean).ln()];
        theta.extend(coef.iter().map(|c| (c.max(1e-9) / slack).ln()));
        theta
    }
}

fn autocorrelation(x: &[f64], lag: usize) -> f64 {
    let n = x.len();
    let m = x.iter().sum::<f64>() / n as f64;
    let var: f64 = x.iter().map(|v| (v - m).powi(2)).sum();
    if var <= 0.0 || lag >= n {
        return 0.0;
    }
    x.iter().zip(&x[lag..]).map(|(a, b)| (a - m) * (b - m)).sum::<f64>() / var
}

/// Moment-based starting values.
///
/// For an ACD(1,1), `ρ_k = ρ_1 (α+β)^{k−1}` and
/// `ρ_1 = α(1 − αβ − β²)/(1 − 2αβ − β²)`; solve these for `(α, β)` and spread
/// the totals evenly over the lags of the requested order.
fn moment_seed(x: &[f64], order: AcdOrder, c: &Constraints) -> (f64, Vec<f64>, Vec<f64>) {
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    let r1 = autocorrelation(x, 1).clamp(0.0, 0.3);
    let r2 = autocorrelation(x, 2).max(0.0);
    let mut s = if r1 > 1e-3 { (r2 / r1).clamp(0.0, 0.95) } else { 0.0 };
    s = s.min(c.max_persistence() - 0.01).max(0.0);
    let rho1 = |a: f64| {
        let b = s - a;
        a * (1.0 - a * b - b * b) / (1.0 - 2.0 * a * b - b * b)
    };
    // ρ_1 is increasing in α on [0, s]
    let (mut lo, mut hi) = (0.0, s);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if rho1(mid) < r1 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (mut a_tot, mut b_tot) = (0.5 * (lo + hi), s - 0.5 * (lo + hi));
    if order.p == 0 {
        a_tot = 0.0;
    }
    if order.q == 0 {
        a_tot = s.min(r1.max(0.05));
        b_tot = 0.0;
    }
    let a_tot = if order.p > 0 { a_tot.max(0.02) } else { 0.0 };
    let b_tot = if order.q > 0 { b_tot.max(0.05) } else { 0.0 };
    let alpha = vec![a_tot / order.p.max(1) as f64; order.p];
    let beta = vec![b_tot / order.q.max(1) as f64; order.q];
    let omega = (mean * (1.0 - a_tot - b_tot)).clamp(c.omega_min, c.omega_max);
    (omega, alpha, beta)
}

/// Exponential QMLE of an ACD(p, q) over the whole series.
pub fn fit_acd(d: &DurationSeries, order: AcdOrder) -> Result<AcdFit> {
    fit_acd_with_constraints(d, order, &Constraints::default())
}

pub fn fit_acd_with_constraints(d: &DurationSeries, order: AcdOrder, c: &Constraints) -> Result<AcdFit> {
    let x = d.values();
    let need = 50 * order.n_params();
    if x.len() < need {
        return Err(Error::invalid(format!(
            "ACD({order}) fit needs at least {need} durations; got {}",
            x.len()
        )));
    }
    let mean = d.mean();
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / x.len() as f64;
    if var <= 1e-12 * mean * mean {
        return Err(Error::invalid("durations have zero variance; no dynamics can be identified"));
    }

    if order.p == 0 {
        // Without duration lags the conditional mean is deterministic and, started
        // at x̄, stays at x̄ whenever ω = x̄(1 − Σβ): the likelihood is flat along
        // that ridge. Report its zero-persistence end.
        let omega = mean.clamp(c.omega_min, c.omega_max);
        let beta = vec![0.0; order.q];
        let params = AcdParams::with_constraints(omega, vec![], beta, c)?;
        let loglik = quasi_loglik(x, omega, &[], params.beta(), mean);
        return Ok(AcdFit { params, loglik, converged: true, order });
    }

    let re = Reparam { mean, order, c: *c };
    let (w0, a0, b0) = moment_seed(x, order, c);
    let objective = |theta: &[f64]| {
        let (w, a, b) = re.decode(theta);
        -quasi_loglik(x, w, &a, &b, mean) / x.len() as f64
    };

    let coef0: Vec<f64> = a0.iter().chain(&b0).copied().collect();
    let opts = NelderMeadOptions { max_iter: 4000, f_tol: 1e-13, x_tol: 1e-7 };
    let mut best = nelder_mead(objective, &re.encode(w0, &coef0), 0.5, opts);
    // restart from the optimum to escape a collapsed simplex
    for step in [0.2, 0.05] {
        let again = nelder_mead(objective, &best.x, step, opts);
        let improved = again.value < best.value - 1e-12;
        let converged = again.converged;
        best = if again.value <= best.value { again } else { best };
        if converged && !improved {
            break;
        }
    }

    if !best.converged || !best.value.is_finite() {
        let params = AcdParams::with_constraints(w0, a0, b0, c)?;
        let loglik = quasi_loglik(x, params.omega(), params.alpha(), params.beta(), mean);
        return Ok(AcdFit { params, loglik, converged: false, order });
    }
    let (w, a, b) = re.decode(&best.x);
    let params = AcdParams::with_constraints(w, a, b, c)?;
    Ok(AcdFit { params, loglik: -best.value * x.len() as f64, converged: true, order })
}

/// `F = max(1, min(0.99, S) / max(0.01, 1 − S))` for persistence `S`.
pub fn dampening_from_persistence(s: f64) -> f64 {
    (s.min(0.99) / (1.0 - s).max(0.01)).max(1.0)
}

pub fn dampening_factor(fit: &AcdFit) -> f64 {
    dampening_from_persistence(fit.params.persistence())
}

/// Apply the transform with coefficients `C_0 = ω̂`, `C_j = α̂_j/F`,
/// `C_{p+k} = β̂_k/F`. Pre-sample durations and conditional means are the
/// sample mean, so the output has one value per duration.
pub fn transform(d: &DurationSeries, fit: &AcdFit, cfg: &TransformConfig) -> Result<TransformedSeries> {
    cfg.validate()?;
    let f = match cfg.dampening {
        Dampening::Auto => dampening_factor(fit),
        Dampening::Fixed(v) => v,
    };
    transform_with_factor(d, &fit.params, f, cfg.epsilon)
}

pub fn transform_with_factor(
    d: &DurationSeries,
    params: &AcdParams,
    factor: f64,
    epsilon: f64,
) -> Result<TransformedSeries> {
    let x = d.values();
    let alpha: Vec<f64> = params.alpha().iter().map(|a| a / factor).collect();
    let beta: Vec<f64> = params.beta().iter().map(|b| b / factor).collect();
    let psi = conditional_means(x, params.omega(), &alpha, &beta, d.mean());
    let mut y = Vec::with_capacity(x.len());
    for (t, (xt, pt)) in x.iter().zip(&psi).enumerate() {
        let u = xt / (pt + epsilon * xt);
        let v = (u + epsilon).ln();
        if !v.is_finite() {
            return Err(Error::NonFinite { index: t, what: "transformed value" });
        }
        y.push(v);
    }
    Ok(TransformedSeries { values: y })
}

/// Fit, dampening and transformed series for one input.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub fit: AcdFit,
    pub dampening: f64,
    pub series: TransformedSeries,
}

pub fn fit_and_transform(d: &DurationSeries, cfg: &TransformConfig) -> Result<Prepared> {
    cfg.validate()?;
    let fit = fit_acd(d, cfg.order)?;
    let dampening = match cfg.dampening {
        Dampening::Auto => dampening_factor(&fit),
        Dampening::Fixed(v) => v,
    };
    let series = transform_with_factor(d, &fit.params, dampening, cfg.epsilon)?;
    Ok(Prepared { fit, dampening, series })
}
