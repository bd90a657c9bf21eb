//! Look-ahead Hamiltonian Monte Carlo (LAHMC).
//!
//! LAHMC replaces the Metropolis-Hastings accept/reject step of standard
//! HMC with a transition rule on the discrete ladder of states reachable
//! by repeated leapfrog integration. When a proposed trajectory would be
//! rejected, the sampler instead looks further ahead (applies the leapfrog
//! operator up to `K` times), and only falls back to a momentum flip when
//! no forward move can be accepted. The resulting Markov transition leaves
//! the target distribution invariant without satisfying detailed balance,
//! which suppresses the random-walk backtracking caused by rejections.
//!
//! The crate ships:
//! - [`state`]: phase-space state, the [`TargetModel`] interface, joint
//!   energy, and evaluation accounting;
//! - [`integrator`]: momentum flip, leapfrog (Störmer-Verlet) integration,
//!   and partial momentum randomization;
//! - [`sampler`]: the HMC and LAHMC kernels, ladder transition
//!   probabilities, and chain running;
//! - [`targets`]: anisotropic Gaussian and "rough well" benchmark
//!   distributions;
//! - [`diagnostics`]: pooled autocorrelation, gradient-evaluations-to-
//!   threshold mixing metric, transition fractions, and hyperparameter
//!   grid search.
//!
//! ```
//! use lahmc::{run_chains, target_by_name, KernelKind, SamplerConfig};
//!
//! let target = target_by_name("gauss2d").unwrap();
//! let config = SamplerConfig { epsilon: 1.0, num_steps: 10, max_leaps: 4, beta: 1.0, seed: 7 };
//! let records = run_chains(&target, KernelKind::Lahmc, &config, 1000, 2, 0);
//! assert_eq!(records.len(), 2);
//! assert_eq!(records[0].samples.len(), 1000);
//! ```

pub mod diagnostics;
pub mod integrator;
pub mod sampler;
pub mod state;
pub mod targets;

pub use diagnostics::{
    AutocorrCurve, GridAxis, GridParams, MixingGrid, TransitionFractions, autocorrelation,
    evals_to_threshold, grid_search, log_spaced, transition_fractions,
};
pub use integrator::{LeapfrogParams, beta_from_alpha, flip, leapfrog, randomize_momentum};
pub use sampler::{
    ChainRecord, KernelKind, SamplerConfig, StepRecorder, TrajectoryLadder, TransitionKind,
    TransitionOutcome, chain_seed, default_burn_in, hmc_step, ladder_probabilities, lahmc_step,
    pi_bruteforce, pi_flip, run_chain, run_chain_record, run_chains,
};
pub use state::{EvalCounter, PhaseState, TargetModel, joint_energy, log_prob_ratio};
pub use targets::{AnisotropicGaussian, RoughWell, StandardTarget, standard_targets, target_by_name};

use thiserror::Error;

/// Errors surfaced by constructors and input validation.
///
/// Violations of documented call contracts (dimension mismatches between a
/// state and its target, out-of-range ladder indices) panic instead; they are
/// programming errors, not runtime conditions.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("unknown target `{0}` (available: {1})")]
    UnknownTarget(String, String),
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

#[cfg(test)]
pub(crate) mod testutil;
