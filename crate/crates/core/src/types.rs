//! Shared domain types: perturbation vectors, the weight-model oracle
//! contract, and bound configuration/report containers.
//!
//! All bound arithmetic lives in log base 2; reports expose a natural-log
//! view (every log₂ quantity times ln 2) for comparison with Gumbel-style
//! baselines.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};

/// A sign vector c ∈ {−1,1}^n used to perturb the maximization objective.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PerturbationVector {
    entries: Vec<i8>,
}

impl PerturbationVector {
    /// Builds a sign vector, rejecting empty input and entries outside {−1,+1}.
    pub fn new(entries: Vec<i8>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidDimension);
        }
        if let Some(bad) = entries.iter().find(|&&e| e != 1 && e != -1) {
            return Err(Error::InvalidParameter(format!(
                "sign vector entry must be -1 or +1, got {bad}"
            )));
        }
        Ok(Self { entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[i8] {
        &self.entries
    }

    /// ⟨c, x⟩ for a state of matching length.
    pub fn dot(&self, state: &[i8]) -> f64 {
        debug_assert_eq!(state.len(), self.entries.len());
        self.entries
            .iter()
            .zip(state)
            .map(|(&c, &x)| f64::from(c) * f64::from(x))
            .sum()
    }
}

/// Per-variable real perturbation tables: entry i holds the additive term
/// for x_i = −1 and x_i = +1, in log₂-weight units.
#[derive(Debug, Clone, PartialEq)]
pub struct RealUnaryPerturbation {
    per_variable: Vec<(f64, f64)>,
}

impl RealUnaryPerturbation {
    /// Builds a unary table, rejecting empty input and non-finite values.
    pub fn new(per_variable: Vec<(f64, f64)>) -> Result<Self> {
        if per_variable.is_empty() {
            return Err(Error::InvalidDimension);
        }
        if per_variable
            .iter()
            .any(|&(a, b)| !a.is_finite() || !b.is_finite())
        {
            return Err(Error::InvalidParameter(
                "unary perturbation values must be finite".into(),
            ));
        }
        Ok(Self { per_variable })
    }

    /// All-zero unaries of dimension n (the unperturbed objective).
    pub fn zeros(n: usize) -> Result<Self> {
        Self::new(vec![(0.0, 0.0); n])
    }

    pub fn len(&self) -> usize {
        self.per_variable.len()
    }

    pub fn is_empty(&self) -> bool {
        self.per_variable.is_empty()
    }

    pub fn per_variable(&self) -> &[(f64, f64)] {
        &self.per_variable
    }

    /// The table entry for variable i at the given spin.
    pub fn value_for(&self, i: usize, spin: i8) -> f64 {
        let (lo, hi) = self.per_variable[i];
        if spin > 0 {
            hi
        } else {
            lo
        }
    }

    /// Σ_i u_i(x_i) for a state of matching length.
    pub fn total(&self, state: &[i8]) -> f64 {
        debug_assert_eq!(state.len(), self.per_variable.len());
        state
            .iter()
            .enumerate()
            .map(|(i, &x)| self.value_for(i, x))
            .sum()
    }
}

/// Expresses ⟨c, x⟩ as unary tables: variable i contributes −c_i at
/// x_i = −1 and +c_i at x_i = +1.
pub fn to_unary(c: &PerturbationVector) -> RealUnaryPerturbation {
    let per_variable = c
        .entries()
        .iter()
        .map(|&ci| (-f64::from(ci), f64::from(ci)))
        .collect();
    RealUnaryPerturbation { per_variable }
}

/// Draws a sign vector with independent uniform ±1 entries.
pub fn sample_rademacher(n: usize, rng: &mut impl Rng) -> Result<PerturbationVector> {
    if n == 0 {
        return Err(Error::InvalidDimension);
    }
    let entries = (0..n)
        .map(|_| if rng.random::<bool>() { 1i8 } else { -1i8 })
        .collect();
    Ok(PerturbationVector { entries })
}

/// Value and attaining state of a perturbed maximization.
#[derive(Debug, Clone, PartialEq)]
pub struct Maximizer {
    /// max_x { Σ_i u_i(x_i) + log₂ w(x) }, in log₂ units.
    pub value: f64,
    /// A state attaining the value.
    pub state: Vec<i8>,
}

/// A non-negative weight function w over {−1,1}^n together with the
/// optimization oracle that drives the estimator.
///
/// Contract for [`WeightModel::perturbed_max`]: the returned value equals
/// Σ_i u_i(x*_i) + log₂ w(x*) for the returned state x*, the oracle is
/// deterministic for a fixed perturbation, and a zero-weight state is never
/// returned unless w is identically zero (which is an error: Z = 0 has no
/// log bound).
pub trait WeightModel: Sync {
    /// Number of spin variables n.
    fn dimension(&self) -> usize;

    /// Exact solver for max_x { Σ_i u_i(x_i) + log₂ w(x) }.
    fn perturbed_max(&self, u: &RealUnaryPerturbation) -> Result<Maximizer>;

    /// log₂ of the smallest strictly positive weight, or a valid lower
    /// bound on it. Conservative (smaller) values keep both bounds valid.
    fn log2_w_min(&self) -> Option<f64> {
        None
    }

    /// log₂ of the largest weight. Supply the exact maximum where
    /// attainable: the lower bound's floor step relies on w_max ≤ Z.
    fn log2_w_max(&self) -> Option<f64> {
        None
    }
}

/// Sampling configuration for the estimator and its derived bounds.
#[derive(Debug, Clone, Serialize)]
pub struct BoundConfig {
    /// Number of oracle samples k.
    pub k: usize,
    /// Root seed; replicate i derives an independent substream.
    pub seed: u64,
    /// Maximum replacement draws when a degenerate sample invalidates a
    /// closed-form branch.
    pub resample_limit: usize,
}

impl BoundConfig {
    /// Per-side confidence baked into the √6 slack constant.
    pub const CONFIDENCE: f64 = 0.95;

    /// Configuration with the default resample limit of 10.
    pub fn new(k: usize, seed: u64) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter("k must be at least 1".into()));
        }
        Ok(Self {
            k,
            seed,
            resample_limit: 10,
        })
    }

    pub fn with_resample_limit(mut self, limit: usize) -> Self {
        self.resample_limit = limit;
        self
    }
}

/// Natural-log view of the headline report quantities.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LnView {
    pub delta_bar: f64,
    pub psi_lb: f64,
    pub psi_ub: f64,
}

/// Assembled output of a bound computation. All log quantities are base 2;
/// [`BoundReport::ln_view`] rescales by ln 2.
#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub n: usize,
    pub k: usize,
    /// Mean perturbed maximum δ̄_k, the estimator of log₂ Z.
    pub delta_bar: f64,
    /// High-probability deviation √(6n/k) between δ̄_k and its expectation.
    pub slack: f64,
    /// Lower bound on log₂ Z, valid with probability ≥ 0.95.
    pub psi_lb: f64,
    /// Upper bound on log₂ Z, valid with probability ≥ 0.95.
    pub psi_ub: f64,
    /// λ chosen by the lower bound when log₂ w_min was available.
    pub lambda_used: Option<f64>,
    /// β chosen by the upper bound's four-case selector.
    pub beta_opt: Option<f64>,
    /// Replacement draws consumed by degenerate samples.
    pub resamples_used: usize,
    pub confidence: f64,
    /// The lower bound fell back to its w_min-free branch after the
    /// resample budget was exhausted.
    pub degenerate_lower: bool,
    /// The upper bound fell back to its β = 1/3 branch after the resample
    /// budget was exhausted.
    pub degenerate_upper: bool,
}

impl BoundReport {
    /// The headline quantities multiplied by ln 2.
    pub fn ln_view(&self) -> LnView {
        LnView {
            delta_bar: self.delta_bar * std::f64::consts::LN_2,
            psi_lb: self.psi_lb * std::f64::consts::LN_2,
            psi_ub: self.psi_ub * std::f64::consts::LN_2,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{substream, STREAM_RADEMACHER};

    #[test]
    fn rademacher_entries_are_signs() {
        let mut rng = substream(11, STREAM_RADEMACHER, 0);
        let c = sample_rademacher(1, &mut rng).unwrap();
        assert_eq!(c.len(), 1);
        assert!(c.entries()[0] == 1 || c.entries()[0] == -1);
    }

    #[test]
    fn rademacher_rejects_zero_dimension() {
        let mut rng = substream(11, STREAM_RADEMACHER, 0);
        assert!(matches!(
            sample_rademacher(0, &mut rng),
            Err(Error::InvalidDimension)
        ));
    }

    #[test]
    fn rademacher_is_deterministic_per_stream() {
        let a = sample_rademacher(64, &mut substream(5, STREAM_RADEMACHER, 2)).unwrap();
        let b = sample_rademacher(64, &mut substream(5, STREAM_RADEMACHER, 2)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rademacher_mean_is_near_zero() {
        // Binomial tail: the empirical mean of 10^4 signs has sd 0.01, so
        // |mean| < 0.05 is a 5-sigma event to violate.
        let c = sample_rademacher(10_000, &mut substream(5, STREAM_RADEMACHER, 0)).unwrap();
        let mean: f64 = c.entries().iter().map(|&e| f64::from(e)).sum::<f64>() / 1e4;
        assert!(mean.abs() < 0.05, "mean = {mean}");
    }

    #[test]
    fn to_unary_single_entry() {
        let c = PerturbationVector::new(vec![1]).unwrap();
        assert_eq!(to_unary(&c).per_variable(), &[(-1.0, 1.0)]);
    }

    #[test]
    fn to_unary_total_is_dot_product() {
        let c = PerturbationVector::new(vec![-1, -1]).unwrap();
        let u = to_unary(&c);
        assert_eq!(u.total(&[1, 1]), -2.0);
        assert_eq!(u.total(&[1, 1]), c.dot(&[1, 1]));

        let c = sample_rademacher(16, &mut substream(9, STREAM_RADEMACHER, 4)).unwrap();
        let x = sample_rademacher(16, &mut substream(9, STREAM_RADEMACHER, 5)).unwrap();
        let u = to_unary(&c);
        assert!((u.total(x.entries()) - c.dot(x.entries())).abs() < 1e-12);
    }

    #[test]
    fn perturbation_vector_rejects_bad_entries() {
        assert!(PerturbationVector::new(vec![1, 0, -1]).is_err());
        assert!(PerturbationVector::new(vec![]).is_err());
    }

    #[test]
    fn unary_rejects_non_finite() {
        assert!(RealUnaryPerturbation::new(vec![(0.0, f64::NAN)]).is_err());
        assert!(RealUnaryPerturbation::new(vec![(f64::INFINITY, 0.0)]).is_err());
    }

    #[test]
    fn ln_view_is_exact_rescaling() {
        let report = BoundReport {
            n: 4,
            k: 1,
            delta_bar: 3.5,
            slack: 1.0,
            psi_lb: -2.0,
            psi_ub: 7.0,
            lambda_used: None,
            beta_opt: Some(1.0 / 3.0),
            resamples_used: 0,
            confidence: BoundConfig::CONFIDENCE,
            degenerate_lower: false,
            degenerate_upper: false,
        };
        let v = report.ln_view();
        assert_eq!(v.delta_bar, 3.5 * std::f64::consts::LN_2);
        assert_eq!(v.psi_lb, -2.0 * std::f64::consts::LN_2);
        assert_eq!(v.psi_ub, 7.0 * std::f64::consts::LN_2);
    }
}
