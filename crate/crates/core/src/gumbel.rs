//! Gumbel perturb-and-MAP baseline bounds on ln Z.
//!
//! Perturbing every state with an IID Gumbel draw makes the maximum an
//! unbiased estimator of ln Z, but needs 2^n draws. The tractable variant
//! perturbs each variable with low-dimensional Gumbel unaries:
//!
//! - Θ_UB = E[max_x {ln w(x) + Σ_i γ_i(x_i)}] upper bounds ln Z,
//! - Θ_LB = E[max_x {ln w(x) + Σ_i γ_i(x_i)/n}] lower bounds ln Z,
//!
//! with γ mean-zero (scale-1 Gumbel shifted by the Euler–Mascheroni
//! constant). A slack term ε_g turns the k-sample estimates into bounds
//! holding with probability 1 − α: θ_UB = Θ̂_UB + ε_g and
//! θ_LB = Θ̂_LB − ε_g/n. Everything in this module is in natural-log
//! units; the oracle works in log₂, so unaries are divided by ln 2 on the
//! way in and results multiplied by ln 2 on the way out.

use std::f64::consts::LN_2;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng::{substream, STREAM_GUMBEL_LOWER, STREAM_GUMBEL_UPPER};
use crate::types::{RealUnaryPerturbation, WeightModel};

/// γ_EM, the mean of a scale-1 Gumbel.
pub const EULER_MASCHERONI: f64 = 0.577_215_664_901_532_9;

/// Sampling configuration for the Gumbel baseline.
#[derive(Debug, Clone, Serialize)]
pub struct GumbelConfig {
    /// Trials per expectation estimate (also used in the slack term).
    pub k: usize,
    /// Failure probability of the high-probability bounds.
    pub alpha: f64,
    pub seed: u64,
}

impl GumbelConfig {
    pub fn new(k: usize, alpha: f64, seed: u64) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter("k must be at least 1".into()));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha must lie in (0,1), got {alpha}"
            )));
        }
        Ok(Self { k, alpha, seed })
    }
}

/// Expectation estimates and their slack-adjusted high-probability bounds,
/// all in natural-log units.
#[derive(Debug, Clone, Serialize)]
pub struct GumbelReport {
    pub theta_ub_hat: f64,
    pub theta_lb_hat: f64,
    pub epsilon_g: f64,
    /// Θ̂_UB + ε_g.
    pub theta_ub: f64,
    /// Θ̂_LB − ε_g/n.
    pub theta_lb: f64,
}

fn shifted_gumbel_from_uniform(u: f64) -> f64 {
    -(-u.ln()).ln() - EULER_MASCHERONI
}

/// One mean-zero Gumbel draw: −ln(−ln U) − γ_EM with U uniform on (0,1).
pub fn sample_shifted_gumbel(rng: &mut impl Rng) -> f64 {
    // random::<f64>() covers [0,1); reject the measure-zero endpoint.
    let u = loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            break u;
        }
    };
    shifted_gumbel_from_uniform(u)
}

fn trial_values(
    model: &dyn WeightModel,
    cfg: &GumbelConfig,
    stream: u64,
    unary_scale: f64,
) -> Result<Vec<f64>> {
    let n = model.dimension();
    if n == 0 {
        return Err(Error::InvalidDimension);
    }
    let mut values = Vec::with_capacity(cfg.k);
    for t in 0..cfg.k {
        let mut rng = substream(cfg.seed, stream, t as u64);
        let per_variable: Vec<(f64, f64)> = (0..n)
            .map(|_| {
                let lo = sample_shifted_gumbel(&mut rng) * unary_scale / LN_2;
                let hi = sample_shifted_gumbel(&mut rng) * unary_scale / LN_2;
                (lo, hi)
            })
            .collect();
        let u = RealUnaryPerturbation::new(per_variable)?;
        values.push(model.perturbed_max(&u)?.value * LN_2);
    }
    Ok(values)
}

/// Per-trial values max_x {ln w(x) + Σ_i γ_i(x_i)}.
pub fn upper_trial_values(model: &dyn WeightModel, cfg: &GumbelConfig) -> Result<Vec<f64>> {
    trial_values(model, cfg, STREAM_GUMBEL_UPPER, 1.0)
}

/// Per-trial values max_x {ln w(x) + Σ_i γ_i(x_i)/n}.
pub fn lower_trial_values(model: &dyn WeightModel, cfg: &GumbelConfig) -> Result<Vec<f64>> {
    let n = model.dimension().max(1);
    trial_values(model, cfg, STREAM_GUMBEL_LOWER, 1.0 / n as f64)
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Θ̂_UB: k-sample mean of the full-strength perturbed maximum.
pub fn gumbel_upper_estimate(model: &dyn WeightModel, cfg: &GumbelConfig) -> Result<f64> {
    Ok(mean(&upper_trial_values(model, cfg)?))
}

/// Θ̂_LB: k-sample mean with unaries scaled by 1/n.
pub fn gumbel_lower_estimate(model: &dyn WeightModel, cfg: &GumbelConfig) -> Result<f64> {
    Ok(mean(&lower_trial_values(model, cfg)?))
}

/// High-probability slack
/// ε_g = min{ 2√n (1 + √(ln(2/α)/(2k)))², √n·max{ (4/k)ln(2/α), √((32/k)ln(2/α)) } }.
pub fn gumbel_slack(n: usize, k: usize, alpha: f64) -> f64 {
    let n = n as f64;
    let k = k as f64;
    let l = (2.0 / alpha).ln();
    let first = 2.0 * n.sqrt() * (1.0 + (l / (2.0 * k)).sqrt()).powi(2);
    let second = n.sqrt() * (4.0 / k * l).max((32.0 / k * l).sqrt());
    first.min(second)
}

/// Runs both estimates and assembles the slack-adjusted bounds.
pub fn gumbel_report(model: &dyn WeightModel, cfg: &GumbelConfig) -> Result<GumbelReport> {
    let n = model.dimension();
    let theta_ub_hat = gumbel_upper_estimate(model, cfg)?;
    let theta_lb_hat = gumbel_lower_estimate(model, cfg)?;
    let epsilon_g = gumbel_slack(n, cfg.k, cfg.alpha);
    Ok(GumbelReport {
        theta_ub_hat,
        theta_lb_hat,
        epsilon_g,
        theta_ub: theta_ub_hat + epsilon_g,
        theta_lb: theta_lb_hat - epsilon_g / n as f64,
    })
}
