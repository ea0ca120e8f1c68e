//! The estimator δ̄_k and the high-probability bounds ψ_LB, ψ_UB on log₂ Z.
//!
//! A draw c ∈ {−1,1}^n perturbs the objective; the oracle value
//! δ(c, w) = max_x {⟨c,x⟩ + log₂ w(x)} concentrates around its expectation
//! with McDiarmid deviation √(6n) at the 0.95 level, and averaging k draws
//! tightens the deviation to √(6n/k). Inverting closed-form brackets on the
//! expectation yields:
//!
//! - lower bound: with d = δ̄_k − √(6n/k) and λ = (d − log₂ w_min)/n,
//!   ψ_LB = (d − log₂ w_min)²/(2n) + log₂ w_min when 0 ≤ λ ≤ 1, else
//!   ψ_LB = d − n/2; finally ψ_LB is floored at log₂ w_max when known.
//! - upper bound: with t = δ̄_k + √(6n/k), candidate break points
//!   β_min = (t − log₂ w_min)/n and β_max = (t − log₂ w_max)/n select
//!   β_opt, and ψ_UB follows the matching closed form.
//!
//! Draws that land outside a form's validity region (λ < 0, or
//! t ≤ log₂ w*) signal [`Error::DegenerateDraw`]; [`bound`] replaces the
//! offending sample and retries up to the configured limit before falling
//! back to the branch that needs no w_min/w_max.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng::{substream, STREAM_RADEMACHER};
use crate::types::{sample_rademacher, to_unary, BoundConfig, BoundReport, WeightModel};

/// The k-sample estimate of log₂ Z together with its raw samples.
#[derive(Debug, Clone)]
pub struct EstimatorResult {
    pub n: usize,
    /// Arithmetic mean of `per_sample_deltas`.
    pub delta_bar: f64,
    pub per_sample_deltas: Vec<f64>,
    /// The state attaining each sample's maximum.
    pub witnesses: Vec<Vec<i8>>,
}

impl EstimatorResult {
    /// Assembles a result from raw samples, computing the mean.
    pub fn from_samples(n: usize, deltas: Vec<f64>, witnesses: Vec<Vec<i8>>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidDimension);
        }
        if deltas.is_empty() || deltas.len() != witnesses.len() {
            return Err(Error::InvalidParameter(
                "need one witness per sample and at least one sample".into(),
            ));
        }
        let delta_bar = deltas.iter().sum::<f64>() / deltas.len() as f64;
        Ok(Self {
            n,
            delta_bar,
            per_sample_deltas: deltas,
            witnesses,
        })
    }

    pub fn k(&self) -> usize {
        self.per_sample_deltas.len()
    }
}

/// Which closed form produced the lower bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LambdaRegime {
    /// 0 ≤ λ ≤ 1: quadratic form anchored at log₂ w_min.
    Quadratic,
    /// λ > 1: the form saturates at ψ_LB = δ̄_k − √(6n/k) − n/2.
    Linear,
    /// log₂ w_min unavailable; same saturated form.
    NoWmin,
}

/// Diagnostics from the lower bound.
#[derive(Debug, Clone, Serialize)]
pub struct LambdaDiagnostics {
    pub lambda: Option<f64>,
    pub regime: LambdaRegime,
    /// δ̄_k − √(6n/k) − log₂ w_min when w_min was supplied.
    pub a_value: Option<f64>,
}

/// Which extreme weight the upper bound's closed form anchors to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum WStarChoice {
    WMin,
    WMax,
    /// β_opt = 1/3: the form is anchor-free.
    Neither,
}

/// Diagnostics from the upper bound.
#[derive(Debug, Clone, Serialize)]
pub struct BetaDiagnostics {
    pub beta_min: Option<f64>,
    pub beta_max: Option<f64>,
    pub beta_opt: f64,
    pub w_star_choice: WStarChoice,
}

/// The high-probability deviation √(6n/k) between δ̄_k and its expectation.
pub fn slack(n: usize, k: usize) -> f64 {
    debug_assert!(n >= 1 && k >= 1);
    (6.0 * n as f64 / k as f64).sqrt()
}

/// One oracle draw: sample c from the replicate substream, perturb, solve.
pub(crate) fn draw_delta(
    model: &dyn WeightModel,
    seed: u64,
    index: u64,
) -> Result<(f64, Vec<i8>)> {
    let mut rng = substream(seed, STREAM_RADEMACHER, index);
    let c = sample_rademacher(model.dimension(), &mut rng)?;
    let max = model.perturbed_max(&to_unary(&c))?;
    Ok((max.value, max.state))
}

/// Runs the k-sample estimator δ̄_k(w) = (1/k) Σ_i δ(c_i, w).
pub fn estimate(model: &dyn WeightModel, cfg: &BoundConfig) -> Result<EstimatorResult> {
    let n = model.dimension();
    if n == 0 {
        return Err(Error::InvalidDimension);
    }
    let mut deltas = Vec::with_capacity(cfg.k);
    let mut witnesses = Vec::with_capacity(cfg.k);
    for i in 0..cfg.k {
        let (d, x) = draw_delta(model, cfg.seed, i as u64)?;
        deltas.push(d);
        witnesses.push(x);
    }
    EstimatorResult::from_samples(n, deltas, witnesses)
}

fn check_shapes(est: &EstimatorResult, cfg: &BoundConfig) -> Result<()> {
    if est.k() != cfg.k {
        return Err(Error::InvalidParameter(format!(
            "estimator carries {} samples but the configuration expects k = {}",
            est.k(),
            cfg.k
        )));
    }
    Ok(())
}

/// Lower bound ψ_LB on log₂ Z from an estimator result.
///
/// Returns [`Error::DegenerateDraw`] when w_min is supplied and λ < 0,
/// which can only happen when the slack bound itself was violated.
pub fn lower_bound(
    est: &EstimatorResult,
    cfg: &BoundConfig,
    log2_w_min: Option<f64>,
    log2_w_max: Option<f64>,
) -> Result<(f64, LambdaDiagnostics)> {
    check_shapes(est, cfg)?;
    let n = est.n as f64;
    let d = est.delta_bar - slack(est.n, cfg.k);

    let (mut psi, diag) = match log2_w_min {
        Some(m) => {
            let a = d - m;
            let lambda = a / n;
            if lambda < 0.0 {
                return Err(Error::DegenerateDraw {
                    context: "lambda < 0 in the lower bound",
                });
            }
            if lambda <= 1.0 {
                (
                    a * a / (2.0 * n) + m,
                    LambdaDiagnostics {
                        lambda: Some(lambda),
                        regime: LambdaRegime::Quadratic,
                        a_value: Some(a),
                    },
                )
            } else {
                (
                    d - n / 2.0,
                    LambdaDiagnostics {
                        lambda: Some(lambda),
                        regime: LambdaRegime::Linear,
                        a_value: Some(a),
                    },
                )
            }
        }
        None => (
            d - n / 2.0,
            LambdaDiagnostics {
                lambda: None,
                regime: LambdaRegime::NoWmin,
                a_value: None,
            },
        ),
    };

    if let Some(wmax) = log2_w_max {
        psi = psi.max(wmax);
    }
    Ok((psi, diag))
}

/// Upper bound ψ_UB on log₂ Z via the four-case β_opt selector.
///
/// Returns [`Error::DegenerateDraw`] when a supplied anchor makes
/// δ̄_k + √(6n/k) − log₂ w* non-positive.
pub fn upper_bound(
    est: &EstimatorResult,
    cfg: &BoundConfig,
    log2_w_min: Option<f64>,
    log2_w_max: Option<f64>,
) -> Result<(f64, BetaDiagnostics)> {
    check_shapes(est, cfg)?;
    let n = est.n as f64;
    let t = est.delta_bar + slack(est.n, cfg.k);

    if let Some(m) = log2_w_min {
        if t - m <= 0.0 {
            return Err(Error::DegenerateDraw {
                context: "delta_bar + slack <= log2 w_min in the upper bound",
            });
        }
    }
    if let Some(m) = log2_w_max {
        if t - m <= 0.0 {
            return Err(Error::DegenerateDraw {
                context: "delta_bar + slack <= log2 w_max in the upper bound",
            });
        }
    }

    let beta_min = log2_w_min.map(|m| (t - m) / n);
    let beta_max = log2_w_max.map(|m| (t - m) / n);

    // Case order matters; boundary values fall through to β_opt = 1/3.
    let (beta_opt, w_star_choice) = if beta_min.is_some_and(|b| 0.0 < b && b < 1.0 / 3.0) {
        (beta_min.unwrap(), WStarChoice::WMin)
    } else if beta_max.is_some_and(|b| 1.0 / 3.0 < b && b < 0.5) {
        (beta_max.unwrap(), WStarChoice::WMax)
    } else if beta_max.is_some_and(|b| 0.5 < b) {
        (0.5, WStarChoice::WMax)
    } else {
        (1.0 / 3.0, WStarChoice::Neither)
    };

    let psi = if beta_opt == 1.0 / 3.0 {
        t + n * 1.5f64.log2()
    } else if beta_opt == 0.5 {
        n + log2_w_max.expect("the 1/2 case requires w_max")
    } else {
        let w_star = match w_star_choice {
            WStarChoice::WMin => log2_w_min.expect("case selected w_min"),
            WStarChoice::WMax => log2_w_max.expect("case selected w_max"),
            WStarChoice::Neither => unreachable!("anchor-free case handled above"),
        };
        n * beta_opt * ((1.0 - beta_opt) / beta_opt).log2() - n * (1.0 - beta_opt).log2() + w_star
    };

    Ok((
        psi,
        BetaDiagnostics {
            beta_min,
            beta_max,
            beta_opt,
            w_star_choice,
        },
    ))
}

/// Runs the estimator and both bounds, handling degenerate draws by
/// replacing the smallest sample and retrying within the resample budget.
pub fn bound(model: &dyn WeightModel, cfg: &BoundConfig) -> Result<BoundReport> {
    let n = model.dimension();
    if n == 0 {
        return Err(Error::InvalidDimension);
    }
    let log2_w_min = model.log2_w_min();
    let log2_w_max = model.log2_w_max();

    let mut samples: Vec<(f64, Vec<i8>)> = (0..cfg.k)
        .map(|i| draw_delta(model, cfg.seed, i as u64))
        .collect::<Result<_>>()?;
    let mut next_index = cfg.k as u64;
    let mut resamples = 0usize;

    loop {
        let est = EstimatorResult::from_samples(
            n,
            samples.iter().map(|(d, _)| *d).collect(),
            samples.iter().map(|(_, x)| x.clone()).collect(),
        )?;

        let lower = lower_bound(&est, cfg, log2_w_min, log2_w_max);
        let upper = upper_bound(&est, cfg, log2_w_min, log2_w_max);

        let lower_degenerate = matches!(lower, Err(Error::DegenerateDraw { .. }));
        let upper_degenerate = matches!(upper, Err(Error::DegenerateDraw { .. }));

        if (lower_degenerate || upper_degenerate) && resamples < cfg.resample_limit {
            // Both degeneracies mean δ̄_k came out too small, so replace the
            // sample pulling the mean down hardest.
            let worst = samples
                .iter()
                .enumerate()
                .min_by(|(_, (a, _)), (_, (b, _))| a.total_cmp(b))
                .map(|(i, _)| i)
                .expect("k >= 1");
            samples[worst] = draw_delta(model, cfg.seed, next_index)?;
            next_index += 1;
            resamples += 1;
            continue;
        }

        let (psi_lb, lambda_diag, degenerate_lower) = match lower {
            Ok(v) => (v.0, v.1, false),
            Err(Error::DegenerateDraw { .. }) => {
                let (psi, diag) = lower_bound(&est, cfg, None, log2_w_max)?;
                (psi, diag, true)
            }
            Err(e) => return Err(e),
        };
        let (psi_ub, beta_diag, degenerate_upper) = match upper {
            Ok(v) => (v.0, v.1, false),
            Err(Error::DegenerateDraw { .. }) => {
                let (psi, diag) = upper_bound(&est, cfg, None, None)?;
                (psi, diag, true)
            }
            Err(e) => return Err(e),
        };

        return Ok(BoundReport {
            n,
            k: cfg.k,
            delta_bar: est.delta_bar,
            slack: slack(n, cfg.k),
            psi_lb,
            psi_ub,
            lambda_used: lambda_diag.lambda,
            beta_opt: Some(beta_diag.beta_opt),
            resamples_used: resamples,
            confidence: BoundConfig::CONFIDENCE,
            degenerate_lower,
            degenerate_upper,
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(n: usize, k: usize, delta_bar: f64) -> EstimatorResult {
        EstimatorResult::from_samples(n, vec![delta_bar; k], vec![vec![1i8; n]; k]).unwrap()
    }

    #[test]
    fn slack_hand_values() {
        assert_eq!(slack(6, 1), 6.0);
        assert_eq!(slack(4, 24), 1.0);
        assert!((slack(49, 5) - 7.668115805072326).abs() < 1e-9);
    }

    #[test]
    fn lower_bound_quadratic_branch() {
        // n=4, k=24 (slack 1), delta_bar=3, log2 w_min=0: lambda = 0.5,
        // psi = 2^2/8 = 0.5.
        let est = synthetic(4, 24, 3.0);
        let cfg = BoundConfig::new(24, 0).unwrap();
        let (psi, diag) = lower_bound(&est, &cfg, Some(0.0), None).unwrap();
        assert!((psi - 0.5).abs() < 1e-12);
        assert_eq!(diag.regime, LambdaRegime::Quadratic);
        assert!((diag.lambda.unwrap() - 0.5).abs() < 1e-12);
        assert!((diag.a_value.unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn lower_bound_without_wmin() {
        let est = synthetic(4, 24, 10.0);
        let cfg = BoundConfig::new(24, 0).unwrap();
        let (psi, diag) = lower_bound(&est, &cfg, None, None).unwrap();
        assert!((psi - 7.0).abs() < 1e-12);
        assert_eq!(diag.regime, LambdaRegime::NoWmin);
    }

    #[test]
    fn lower_bound_floors_at_wmax() {
        let est = synthetic(4, 24, 3.0);
        let cfg = BoundConfig::new(24, 0).unwrap();
        let (psi, _) = lower_bound(&est, &cfg, Some(0.0), Some(5.0)).unwrap();
        assert_eq!(psi, 5.0);
    }

    #[test]
    fn lower_bound_linear_branch_agrees_at_lambda_one() {
        // lambda = 1 exactly: quadratic form gives n/2 + w_min, the
        // saturated form gives the same number.
        let n = 6;
        let cfg = BoundConfig::new(1, 0).unwrap();
        let s = slack(n, 1);
        let est = synthetic(n, 1, s + n as f64 + 2.0); // d - w_min = n with w_min = 2
        let (psi, diag) = lower_bound(&est, &cfg, Some(2.0), None).unwrap();
        assert_eq!(diag.regime, LambdaRegime::Quadratic);
        assert!((psi - (n as f64 / 2.0 + 2.0)).abs() < 1e-9);
    }

    #[test]
    fn lower_bound_signals_on_negative_lambda() {
        let est = synthetic(4, 24, 0.5); // d = -0.5 < w_min = 0
        let cfg = BoundConfig::new(24, 0).unwrap();
        assert!(matches!(
            lower_bound(&est, &cfg, Some(0.0), None),
            Err(Error::DegenerateDraw { .. })
        ));
    }

    #[test]
    fn upper_bound_beta_min_branch() {
        // n=24, k=144 (slack 1), delta_bar=5, w_min=0: beta_min = 0.25,
        // psi = 24*0.25*log2(3) - 24*log2(0.75) = 19.4707...
        let est = synthetic(24, 144, 5.0);
        let cfg = BoundConfig::new(144, 0).unwrap();
        let (psi, diag) = upper_bound(&est, &cfg, Some(0.0), None).unwrap();
        assert!((psi - 19.470674987019186).abs() < 1e-9, "psi = {psi}");
        assert_eq!(diag.w_star_choice, WStarChoice::WMin);
        assert!((diag.beta_opt - 0.25).abs() < 1e-12);
    }

    #[test]
    fn upper_bound_anchor_free_branch() {
        let est = synthetic(24, 144, 5.0);
        let cfg = BoundConfig::new(144, 0).unwrap();
        let (psi, diag) = upper_bound(&est, &cfg, None, None).unwrap();
        assert!((psi - 20.03910001730775).abs() < 1e-9, "psi = {psi}");
        assert_eq!(diag.beta_opt, 1.0 / 3.0);
        assert_eq!(diag.w_star_choice, WStarChoice::Neither);
    }

    #[test]
    fn upper_bound_half_branch() {
        // beta_max > 1/2 with log2 w_max = 3, n = 10: psi = 13.
        let n = 10;
        let cfg = BoundConfig::new(1, 0).unwrap();
        let est = synthetic(n, 1, 3.0 + 0.51 * n as f64); // t - 3 > n/2
        let (psi, diag) = upper_bound(&est, &cfg, None, Some(3.0)).unwrap();
        assert_eq!(psi, 13.0);
        assert_eq!(diag.beta_opt, 0.5);
        assert_eq!(diag.w_star_choice, WStarChoice::WMax);
    }

    #[test]
    fn upper_bound_boundary_goes_to_third_case() {
        // beta_min exactly 1/3 falls through to the anchor-free branch.
        let n = 12;
        let cfg = BoundConfig::new(1, 0).unwrap();
        let s = slack(n, 1);
        let est = synthetic(n, 1, n as f64 / 3.0 - s); // t - 0 = n/3
        let (_, diag) = upper_bound(&est, &cfg, Some(0.0), None).unwrap();
        assert_eq!(diag.beta_opt, 1.0 / 3.0);
        assert_eq!(diag.w_star_choice, WStarChoice::Neither);
    }

    #[test]
    fn upper_bound_signals_on_non_positive_anchor_gap() {
        let est = synthetic(4, 24, -2.0); // t = -1 <= w_min = 0
        let cfg = BoundConfig::new(24, 0).unwrap();
        assert!(matches!(
            upper_bound(&est, &cfg, Some(0.0), None),
            Err(Error::DegenerateDraw { .. })
        ));
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let est = synthetic(4, 2, 1.0);
        let cfg = BoundConfig::new(3, 0).unwrap();
        assert!(lower_bound(&est, &cfg, None, None).is_err());
        assert!(upper_bound(&est, &cfg, None, None).is_err());
    }
}
