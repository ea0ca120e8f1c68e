//! Estimation and high-probability bounds for weighted sums
//! Z(w) = Σ_{x ∈ {−1,1}^n} w(x) via randomly perturbed maximization.
//!
//! The estimator draws uniform sign vectors c ∈ {−1,1}^n and queries an
//! optimization oracle for δ(c, w) = max_x {⟨c,x⟩ + log₂ w(x)}. The
//! k-sample mean δ̄_k concentrates around its expectation within
//! √(6n/k) at the 0.95 level; inverting closed-form brackets on that
//! expectation yields bounds ψ_LB ≤ log₂ Z(w) ≤ ψ_UB ([`bounds`]).
//!
//! The crate also ships a Gumbel perturb-and-MAP baseline for side-by-side
//! comparison ([`gumbel`]), exact oracles for desk-scale verification
//! ([`exact`]), a grid Ising model domain whose oracle is a graph cut
//! ([`spinglass`] on top of [`maxflow`]), and a CNF model-counting domain
//! whose oracle is a partial MaxSAT search ([`satcount`]).

pub mod bounds;
pub mod error;
pub mod exact;
pub mod gumbel;
pub mod logsum;
pub mod maxflow;
pub mod rng;
pub mod satcount;
pub mod spinglass;
pub mod types;

pub use bounds::{bound, estimate, lower_bound, slack, upper_bound, EstimatorResult};
pub use error::{Error, Result};
pub use types::{
    sample_rademacher, to_unary, BoundConfig, BoundReport, Maximizer, PerturbationVector,
    RealUnaryPerturbation, WeightModel,
};
