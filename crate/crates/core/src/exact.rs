//! Ground-truth machinery for desk-scale verification: brute-force Z and
//! δ, the exhaustive perturbed-max expectation, and an exact grid
//! partition function via column dynamic programming.

use crate::error::{Error, Result};
use crate::logsum::{ln_sum_exp, log2_sum_exp2};
use crate::spinglass::GridIsingModel;
use crate::types::{Maximizer, PerturbationVector, RealUnaryPerturbation, WeightModel};

/// A dense table of 2^n non-negative weights, indexed by state. Bit i of
/// the index is spin i (+1 when set). Implements the oracle by full
/// enumeration with lexicographic tie-breaking (−1 before +1).
#[derive(Debug, Clone)]
pub struct TabularWeightModel {
    n: usize,
    log2_weights: Vec<f64>,
}

/// Enumeration caps keeping every exact operation at interactive speed.
pub const MAX_TABULAR_DIM: usize = 24;
pub const MAX_EXHAUSTIVE_DIM: usize = 12;
pub const MAX_GRID_WIDTH: usize = 20;

impl TabularWeightModel {
    /// Builds from raw weights; the table length fixes n = log₂ len.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        if weights.is_empty() || !weights.len().is_power_of_two() {
            return Err(Error::InvalidParameter(
                "weight table length must be a power of two".into(),
            ));
        }
        if weights.iter().any(|&w| w < 0.0 || !w.is_finite()) {
            return Err(Error::InvalidParameter(
                "weights must be finite and non-negative".into(),
            ));
        }
        let log2_weights = weights.iter().map(|&w| w.log2()).collect();
        Self::from_log2_weights_unchecked_len(weights.len().trailing_zeros() as usize, log2_weights)
    }

    /// Builds from log₂ weights; NEG_INFINITY marks zero-weight states.
    pub fn from_log2_weights(log2_weights: Vec<f64>) -> Result<Self> {
        if log2_weights.is_empty() || !log2_weights.len().is_power_of_two() {
            return Err(Error::InvalidParameter(
                "weight table length must be a power of two".into(),
            ));
        }
        if log2_weights.iter().any(|l| l.is_nan() || *l == f64::INFINITY) {
            return Err(Error::InvalidParameter(
                "log weights must not be NaN or +inf".into(),
            ));
        }
        let n = log2_weights.len().trailing_zeros() as usize;
        Self::from_log2_weights_unchecked_len(n, log2_weights)
    }

    fn from_log2_weights_unchecked_len(n: usize, log2_weights: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidDimension);
        }
        if n > MAX_TABULAR_DIM {
            return Err(Error::DimensionTooLarge {
                n,
                cap: MAX_TABULAR_DIM,
            });
        }
        if log2_weights.iter().all(|l| *l == f64::NEG_INFINITY) {
            return Err(Error::ZeroWeight);
        }
        Ok(Self { n, log2_weights })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn log2_weights(&self) -> &[f64] {
        &self.log2_weights
    }

    /// The state encoded by an index: bit i set means x_i = +1.
    pub fn state_of_index(&self, idx: usize) -> Vec<i8> {
        (0..self.n)
            .map(|i| if idx >> i & 1 == 1 { 1 } else { -1 })
            .collect()
    }

    pub fn index_of_state(&self, x: &[i8]) -> usize {
        x.iter()
            .enumerate()
            .map(|(i, &s)| usize::from(s > 0) << i)
            .sum()
    }

    /// Lexicographic rank of the encoded state with −1 < +1: comparing
    /// states position by position equals comparing indices bit-reversed.
    fn lex_rank(&self, idx: usize) -> u32 {
        (idx as u32).reverse_bits() >> (32 - self.n)
    }

    pub fn true_log2_w_min(&self) -> f64 {
        self.log2_weights
            .iter()
            .copied()
            .filter(|l| *l > f64::NEG_INFINITY)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn true_log2_w_max(&self) -> f64 {
        self.log2_weights
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

impl WeightModel for TabularWeightModel {
    fn dimension(&self) -> usize {
        self.n
    }

    fn perturbed_max(&self, u: &RealUnaryPerturbation) -> Result<Maximizer> {
        if u.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: u.len(),
            });
        }
        let mut best = f64::NEG_INFINITY;
        let mut best_idx = 0usize;
        for (idx, &l) in self.log2_weights.iter().enumerate() {
            if l == f64::NEG_INFINITY {
                continue;
            }
            let mut v = l;
            for i in 0..self.n {
                v += u.value_for(i, if idx >> i & 1 == 1 { 1 } else { -1 });
            }
            if v > best || (v == best && self.lex_rank(idx) < self.lex_rank(best_idx)) {
                best = v;
                best_idx = idx;
            }
        }
        Ok(Maximizer {
            value: best,
            state: self.state_of_index(best_idx),
        })
    }

    fn log2_w_min(&self) -> Option<f64> {
        Some(self.true_log2_w_min())
    }

    fn log2_w_max(&self) -> Option<f64> {
        Some(self.true_log2_w_max())
    }
}

/// log₂ Σ_x w(x) by stable log-space summation over the full table.
pub fn brute_force_log2_z(model: &TabularWeightModel) -> f64 {
    log2_sum_exp2(model.log2_weights())
}

/// Exact δ(c, w) = max_x {⟨c,x⟩ + log₂ w(x)} with the lexicographically
/// smallest argmax.
pub fn brute_force_delta(
    model: &TabularWeightModel,
    c: &PerturbationVector,
) -> Result<(f64, Vec<i8>)> {
    if c.len() != model.n() {
        return Err(Error::DimensionMismatch {
            expected: model.n(),
            got: c.len(),
        });
    }
    let max = model.perturbed_max(&crate::types::to_unary(c))?;
    Ok((max.value, max.state))
}

/// The exact expectation E_c[δ(c, w)] by enumerating all 2^n sign vectors.
pub fn exact_weighted_rademacher(model: &TabularWeightModel) -> Result<f64> {
    let n = model.n();
    if n > MAX_EXHAUSTIVE_DIM {
        return Err(Error::DimensionTooLarge {
            n,
            cap: MAX_EXHAUSTIVE_DIM,
        });
    }
    let mut total = 0.0;
    for cm in 0usize..(1 << n) {
        let c: Vec<i8> = (0..n).map(|i| if cm >> i & 1 == 1 { 1 } else { -1 }).collect();
        let mut best = f64::NEG_INFINITY;
        for (idx, &l) in model.log2_weights().iter().enumerate() {
            if l == f64::NEG_INFINITY {
                continue;
            }
            let mut v = l;
            for (i, &ci) in c.iter().enumerate() {
                let x = if idx >> i & 1 == 1 { 1.0 } else { -1.0 };
                v += f64::from(ci) * x;
            }
            best = best.max(v);
        }
        total += best;
    }
    Ok(total / (1u64 << n) as f64)
}

/// Exact ln Z of a grid Ising model by eliminating one column at a time,
/// carrying a 2^rows message in log space. Cost grows as cols·4^rows, so
/// the column height is capped.
pub fn grid_exact_ln_z(model: &GridIsingModel) -> Result<f64> {
    let rows = model.rows();
    let cols = model.cols();
    if rows > MAX_GRID_WIDTH {
        return Err(Error::DimensionTooLarge {
            n: rows,
            cap: MAX_GRID_WIDTH,
        });
    }
    let states = 1usize << rows;
    let spin = |s: usize, r: usize| if s >> r & 1 == 1 { 1.0 } else { -1.0 };

    // Within-column potential: local fields plus vertical couplings.
    let column_potential = |c: usize, s: usize| -> f64 {
        let mut e = 0.0;
        for r in 0..rows {
            e += model.theta_local(r, c) * spin(s, r);
        }
        for r in 0..rows.saturating_sub(1) {
            e += model.coupling_v(r, c) * spin(s, r) * spin(s, r + 1);
        }
        e
    };
    // Horizontal couplings between column c and c+1.
    let pair_potential = |c: usize, s: usize, t: usize| -> f64 {
        (0..rows)
            .map(|r| model.coupling_h(r, c) * spin(s, r) * spin(t, r))
            .sum()
    };

    let mut msg: Vec<f64> = (0..states).map(|s| column_potential(0, s)).collect();
    let mut scratch = vec![0.0; states];
    for c in 1..cols {
        let next: Vec<f64> = (0..states)
            .map(|t| {
                for (s, slot) in scratch.iter_mut().enumerate() {
                    *slot = msg[s] + pair_potential(c - 1, s, t);
                }
                ln_sum_exp(&scratch) + column_potential(c, t)
            })
            .collect();
        msg = next;
    }
    Ok(ln_sum_exp(&msg))
}

/// ln Z of a field-only model: Σ_i ln(2 cosh θ_i). Exact when every
/// coupling is zero.
pub fn separable_ln_z(model: &GridIsingModel) -> f64 {
    (0..model.rows())
        .flat_map(|r| (0..model.cols()).map(move |c| (r, c)))
        .map(|(r, c)| {
            let t = model.theta_local(r, c);
            // ln(2 cosh t) computed stably for large |t|.
            t.abs() + (-2.0 * t.abs()).exp().ln_1p()
        })
        .sum()
}
