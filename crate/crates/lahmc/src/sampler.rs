//! The standard HMC kernel and the look-ahead (LAHMC) kernel, together with
//! the ladder transition probabilities both are built on.
//!
//! One LAHMC step transitions from the current state `z` to `L^a z` for some
//! `a` in `1..=K`, or to `F z` when every forward move is declined. The
//! probability assigned to `L^a z` is made as large as possible subject to
//! (i) total outgoing probability at most one and (ii) the forward rate not
//! exceeding the reverse rate from `F L^a z`, which yields
//!
//! ```text
//! pi_a(z) = min[ 1 - sum_{b<a} pi_b(z),
//!                e^{H(z) - H(L^a z)} (1 - sum_{b<a} pi_b(F L^a z)) ]
//! ```
//!
//! Because `L^b F L^a z = F L^{a-b} z`, every probability above is a function
//! of the forward trajectory energies `H(z), H(L z), ..., H(L^a z)` alone:
//! the reverse-state sums reuse the same energy sequence with indices
//! reversed, and no extra integration is ever performed. The recursion is
//! evaluated over (source, target) index pairs with memoization.

use crate::integrator::{LeapfrogParams, flip, leapfrog, leapfrog_from_gradient, randomize_momentum};
use crate::state::{EvalCounter, PhaseState, TargetModel, joint_energy};
use crate::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use std::fmt;
use std::str::FromStr;

/// Hyperparameters shared by both kernels. `max_leaps` (`K`) is ignored by
/// the HMC kernel, which always behaves as `K = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplerConfig {
    pub epsilon: f64,
    pub num_steps: usize,
    pub max_leaps: usize,
    pub beta: f64,
    pub seed: u64,
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<(), Error> {
        if !(self.epsilon > 0.0) || !self.epsilon.is_finite() {
            return Err(Error::invalid(
                "epsilon",
                format!("must be positive and finite, got {}", self.epsilon),
            ));
        }
        if self.num_steps == 0 {
            return Err(Error::invalid("num_steps", "must be >= 1"));
        }
        if self.max_leaps == 0 {
            return Err(Error::invalid("max_leaps", "must be >= 1"));
        }
        if !(0.0..=1.0).contains(&self.beta) {
            return Err(Error::invalid(
                "beta",
                format!("must lie in [0, 1], got {}", self.beta),
            ));
        }
        Ok(())
    }

    pub fn leapfrog_params(&self) -> LeapfrogParams {
        LeapfrogParams {
            epsilon: self.epsilon,
            num_steps: self.num_steps,
        }
    }
}

/// What a single sampler step did.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransitionKind {
    /// Moved to `L^a` of the entry state, `a >= 1`.
    Leap(usize),
    /// Momentum flip of the entry state.
    Flip,
}

/// Outcome of one step plus its gradient cost in normalized units of
/// `num_steps` per computed trajectory (the accounting used on the
/// evaluations axis of all diagnostics).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TransitionOutcome {
    pub kind: TransitionKind,
    pub grad_cost: u64,
}

/// Cache of leapfrog iterates `L^0 z ... L^A z` with their joint energies,
/// grown lazily one rung at a time. Entries are never recomputed within a
/// step; each rung starts from the previous rung's cached end gradient.
#[derive(Debug, Clone)]
pub struct TrajectoryLadder {
    states: Vec<PhaseState>,
    energies: Vec<f64>,
    gradients: Vec<Vec<f64>>,
}

impl TrajectoryLadder {
    /// Costs one fused energy+gradient evaluation at the entry position.
    pub fn new<T: TargetModel + ?Sized>(
        entry: PhaseState,
        target: &T,
        counter: &mut EvalCounter,
    ) -> Self {
        assert_eq!(entry.dim(), target.dim(), "state dimension does not match target");
        counter.tick_fused();
        let (potential, gradient) = target.energy_gradient(&entry.x);
        let energy = potential + entry.kinetic_energy();
        TrajectoryLadder {
            states: vec![entry],
            energies: vec![energy],
            gradients: vec![gradient],
        }
    }

    /// Integrates one more trajectory from the top rung.
    pub fn extend<T: TargetModel + ?Sized>(
        &mut self,
        target: &T,
        params: &LeapfrogParams,
        counter: &mut EvalCounter,
    ) {
        let top = self.states.len() - 1;
        let end = leapfrog_from_gradient(
            &self.states[top],
            &self.gradients[top],
            target,
            params,
            counter,
        );
        self.states.push(end.state);
        self.energies.push(end.energy);
        self.gradients.push(end.gradient);
    }

    pub fn states(&self) -> &[PhaseState] {
        &self.states
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    /// Number of rungs above the entry state.
    pub fn top_index(&self) -> usize {
        self.states.len() - 1
    }
}

/// Probability ratio `p(target) / p(source) = exp(H_source - H_target)` with
/// non-finite energies treated as zero density: transitions into such states
/// get ratio 0, transitions out of them are unconstrained (capped later by
/// the total-probability term).
fn energy_ratio(h_source: f64, h_target: f64) -> f64 {
    let from = if h_source.is_finite() { h_source } else { f64::INFINITY };
    let to = if h_target.is_finite() { h_target } else { f64::INFINITY };
    if to == f64::INFINITY {
        0.0
    } else if from == f64::INFINITY {
        f64::INFINITY
    } else {
        (from - to).exp()
    }
}

/// Memoized evaluation of the greedy ladder probabilities over an energy
/// sequence. `pi(s, t)` is the probability of the `|t - s|`-fold leapfrog
/// transition out of the state whose ladder visits energies
/// `h[s], h[s +/- 1], ..., h[t]` in that order.
struct LadderProbs<'a> {
    energies: &'a [f64],
    memo: Vec<f64>,
}

impl<'a> LadderProbs<'a> {
    fn new(energies: &'a [f64]) -> Self {
        let n = energies.len();
        LadderProbs {
            energies,
            memo: vec![f64::NAN; n * n],
        }
    }

    fn pi(&mut self, source: usize, target: usize) -> f64 {
        let n = self.energies.len();
        debug_assert!(source != target && source < n && target < n);
        let slot = source * n + target;
        if !self.memo[slot].is_nan() {
            return self.memo[slot];
        }
        let step: isize = if target > source { 1 } else { -1 };

        // Probability already assigned to shorter transitions out of `source`.
        let mut forward_cum = 0.0;
        let mut k = source as isize + step;
        while k != target as isize {
            forward_cum += self.pi(source, k as usize);
            k += step;
        }
        // Same sum out of the flipped target state; its ladder walks the
        // identical energies in reverse order.
        let mut reverse_cum = 0.0;
        let mut k = target as isize - step;
        while k != source as isize {
            reverse_cum += self.pi(target, k as usize);
            k -= step;
        }

        let headroom = (1.0 - forward_cum).max(0.0);
        let reverse_headroom = (1.0 - reverse_cum).max(0.0);
        let ratio = energy_ratio(self.energies[source], self.energies[target]);
        // Guard inf * 0 when the ratio is unbounded but no reverse headroom is left.
        let rate_bound = if ratio == 0.0 || reverse_headroom == 0.0 {
            0.0
        } else {
            ratio * reverse_headroom
        };
        let p = headroom.min(rate_bound).clamp(0.0, 1.0);
        self.memo[slot] = p;
        p
    }
}

/// Probability of the `a`-fold leapfrog transition out of the state whose
/// forward trajectory has joint energies `energies[0..=a]` (index 0 is the
/// source state). Non-finite energies are legal and mean zero density.
///
/// # Panics
/// Panics if `a < 1` or `energies.len() < a + 1`.
pub fn ladder_probabilities(energies: &[f64], a: usize) -> f64 {
    assert!(a >= 1, "leap index must be >= 1");
    assert!(
        energies.len() > a,
        "need energies for every rung up to {a}, got {}",
        energies.len()
    );
    LadderProbs::new(energies).pi(0, a)
}

/// Probability left over for the momentum flip after all `max_leaps` forward
/// transitions: `1 - sum_a pi_a`, clamped into `[0, 1]`.
///
/// # Panics
/// Panics if `energies.len() < max_leaps + 1`.
pub fn pi_flip(energies: &[f64], max_leaps: usize) -> f64 {
    assert!(
        energies.len() > max_leaps,
        "need energies for every rung up to {max_leaps}, got {}",
        energies.len()
    );
    let mut probs = LadderProbs::new(energies);
    let total: f64 = (1..=max_leaps).map(|a| probs.pi(0, a)).sum();
    (1.0 - total).clamp(0.0, 1.0)
}

/// One look-ahead HMC step.
///
/// A single uniform draw is taken before any trajectory is computed; rungs
/// are then integrated greedily until the cumulative transition probability
/// exceeds it, so `L^a z` is only ever computed when every shorter move was
/// declined. If all `K` forward moves are declined the momentum is flipped.
/// The momentum is then partially randomized with `config.beta`.
///
/// The reported gradient cost is `num_steps` times the number of rungs
/// actually computed, whether or not the move taken was the furthest one.
pub fn lahmc_step<T: TargetModel + ?Sized, R: Rng + ?Sized>(
    state: &PhaseState,
    target: &T,
    config: &SamplerConfig,
    rng: &mut R,
    counter: &mut EvalCounter,
) -> (PhaseState, TransitionOutcome) {
    debug_assert!(state.is_finite(), "kernel entry state must be finite");
    let u: f64 = rng.random();
    let params = config.leapfrog_params();
    let mut ladder = TrajectoryLadder::new(state.clone(), target, counter);
    let mut cumulative = 0.0;
    let mut taken = None;
    for a in 1..=config.max_leaps {
        ladder.extend(target, &params, counter);
        cumulative += ladder_probabilities(&ladder.energies()[..=a], a);
        if u < cumulative {
            taken = Some(a);
            break;
        }
    }
    let grad_cost = (config.num_steps * ladder.top_index()) as u64;
    let (kind, next) = match taken {
        Some(a) => (TransitionKind::Leap(a), ladder.states()[a].clone()),
        None => (TransitionKind::Flip, flip(state)),
    };
    let next = randomize_momentum(&next, config.beta, rng);
    (next, TransitionOutcome { kind, grad_cost })
}

/// One standard HMC step: propose `F L z`, accept with the Metropolis
/// probability `min(1, e^{H(z) - H(L z)})` (the flip leaves the energy
/// unchanged and `F L` is self-inverse, so proposal densities cancel), flip
/// the momentum, then partially randomize it. The net move is `L z` on
/// acceptance and `F z` on rejection; a divergent trajectory is rejected
/// with certainty.
pub fn hmc_step<T: TargetModel + ?Sized, R: Rng + ?Sized>(
    state: &PhaseState,
    target: &T,
    config: &SamplerConfig,
    rng: &mut R,
    counter: &mut EvalCounter,
) -> (PhaseState, TransitionOutcome) {
    debug_assert!(state.is_finite(), "kernel entry state must be finite");
    let u: f64 = rng.random();
    let params = config.leapfrog_params();
    counter.tick_fused();
    let (potential, gradient) = target.energy_gradient(&state.x);
    let h0 = potential + state.kinetic_energy();
    let end = leapfrog_from_gradient(state, &gradient, target, &params, counter);
    let accept_prob = energy_ratio(h0, end.energy).min(1.0);
    let (kind, next) = if u < accept_prob {
        (TransitionKind::Leap(1), end.state)
    } else {
        (TransitionKind::Flip, flip(state))
    };
    let next = randomize_momentum(&next, config.beta, rng);
    (
        next,
        TransitionOutcome {
            kind,
            grad_cost: config.num_steps as u64,
        },
    )
}

/// Which transition kernel drives a chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    Hmc,
    Lahmc,
}

impl KernelKind {
    pub fn step<T: TargetModel + ?Sized, R: Rng + ?Sized>(
        self,
        state: &PhaseState,
        target: &T,
        config: &SamplerConfig,
        rng: &mut R,
        counter: &mut EvalCounter,
    ) -> (PhaseState, TransitionOutcome) {
        match self {
            KernelKind::Hmc => hmc_step(state, target, config, rng, counter),
            KernelKind::Lahmc => lahmc_step(state, target, config, rng, counter),
        }
    }
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            KernelKind::Hmc => "hmc",
            KernelKind::Lahmc => "lahmc",
        })
    }
}

impl FromStr for KernelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "hmc" => Ok(KernelKind::Hmc),
            "lahmc" => Ok(KernelKind::Lahmc),
            other => Err(Error::invalid(
                "sampler",
                format!("expected `hmc` or `lahmc`, got `{other}`"),
            )),
        }
    }
}

/// Reference evaluation of the ladder probability by explicit recursive
/// descent: the flipped end state is materialized with real integration and
/// its transition probabilities are evaluated from fresh leapfrog
/// trajectories, with no index-reversal shortcut. Exponential in `a`; meant
/// for validating [`ladder_probabilities`] at small `K`.
pub fn pi_bruteforce<T: TargetModel + ?Sized>(
    state: &PhaseState,
    target: &T,
    config: &SamplerConfig,
    a: usize,
) -> f64 {
    assert!(a >= 1 && a <= config.max_leaps, "leap index out of range");
    let params = config.leapfrog_params();
    let mut scratch = EvalCounter::default();

    let mut forward_cum = 0.0;
    for b in 1..a {
        forward_cum += pi_bruteforce(state, target, config, b);
    }

    let mut end = state.clone();
    for _ in 0..a {
        end = leapfrog(&end, target, &params, &mut scratch);
    }
    let reverse_state = flip(&end);
    let mut reverse_cum = 0.0;
    for b in 1..a {
        reverse_cum += pi_bruteforce(&reverse_state, target, config, b);
    }

    let h0 = joint_energy(state, target, &mut scratch);
    let ha = joint_energy(&reverse_state, target, &mut scratch);
    let ratio = (h0 - ha).exp();
    (1.0 - forward_cum)
        .min(ratio * (1.0 - reverse_cum))
        .clamp(0.0, 1.0)
}

/// Observer fed once per recorded step.
pub trait StepRecorder {
    fn record(&mut self, state: &PhaseState, outcome: &TransitionOutcome, evals: EvalCounter);
}

/// Per-chain trace: positions, per-step outcomes, and the cumulative
/// gradient cost (in normalized `num_steps`-per-trajectory units) aligned
/// per step.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ChainRecord {
    pub samples: Vec<Vec<f64>>,
    pub outcomes: Vec<TransitionOutcome>,
    pub cumulative_grad_evals: Vec<u64>,
}

impl ChainRecord {
    pub fn with_capacity(n_steps: usize) -> Self {
        ChainRecord {
            samples: Vec::with_capacity(n_steps),
            outcomes: Vec::with_capacity(n_steps),
            cumulative_grad_evals: Vec::with_capacity(n_steps),
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn total_grad_evals(&self) -> u64 {
        self.cumulative_grad_evals.last().copied().unwrap_or(0)
    }
}

impl StepRecorder for ChainRecord {
    fn record(&mut self, state: &PhaseState, outcome: &TransitionOutcome, _evals: EvalCounter) {
        self.samples.push(state.x.clone());
        let prev = self.cumulative_grad_evals.last().copied().unwrap_or(0);
        self.cumulative_grad_evals.push(prev + outcome.grad_cost);
        self.outcomes.push(*outcome);
    }
}

/// SplitMix64 finalizer, used to derive decorrelated seed streams.
pub(crate) fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for chain `chain_index` of a run with base seed `base`:
/// `base XOR splitmix64(chain_index)`.
pub fn chain_seed(base: u64, chain_index: u64) -> u64 {
    base ^ splitmix64(chain_index)
}

/// Burn-in used by the benchmark runners: none for targets initialized from
/// an exact sampler, 1000 steps otherwise.
pub fn default_burn_in<T: TargetModel + ?Sized>(target: &T) -> usize {
    if target.has_exact_sampler() { 0 } else { 1000 }
}

fn drive<T: TargetModel + ?Sized>(
    target: &T,
    kernel: KernelKind,
    config: &SamplerConfig,
    n_steps: usize,
    burn_in: usize,
    init: PhaseState,
    rng: &mut ChaCha8Rng,
    counter: &mut EvalCounter,
    recorder: &mut dyn StepRecorder,
) {
    config.validate().expect("invalid sampler configuration");
    assert!(n_steps >= 1, "n_steps must be >= 1");
    assert_eq!(init.dim(), target.dim(), "init dimension does not match target");
    let mut state = init;
    for step in 0..burn_in + n_steps {
        let (next, outcome) = kernel.step(&state, target, config, rng, counter);
        state = next;
        if step >= burn_in {
            recorder.record(&state, &outcome, *counter);
        }
    }
}

/// Iterates the kernel `n_steps` times from `init`, feeding each post-step
/// state, outcome, and cumulative evaluation counter to `recorder`.
/// Deterministic given `config.seed` and `init`.
pub fn run_chain<T: TargetModel + ?Sized>(
    target: &T,
    kernel: KernelKind,
    config: &SamplerConfig,
    n_steps: usize,
    init: PhaseState,
    recorder: &mut dyn StepRecorder,
) {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut counter = EvalCounter::default();
    drive(
        target, kernel, config, n_steps, 0, init, &mut rng, &mut counter, recorder,
    );
}

/// [`run_chain`] collecting into a [`ChainRecord`].
pub fn run_chain_record<T: TargetModel + ?Sized>(
    target: &T,
    kernel: KernelKind,
    config: &SamplerConfig,
    n_steps: usize,
    init: PhaseState,
) -> ChainRecord {
    let mut record = ChainRecord::with_capacity(n_steps);
    run_chain(target, kernel, config, n_steps, init, &mut record);
    record
}

/// Runs `n_chains` independent chains. Chain `i` is seeded with
/// [`chain_seed`]`(config.seed, i)`, starts from the target's initial
/// position with `v ~ N(0, I)`, and discards `burn_in` steps before
/// recording. Chains are independent and may execute in parallel; the
/// returned order is by chain index regardless of scheduling.
pub fn run_chains<T: TargetModel + ?Sized>(
    target: &T,
    kernel: KernelKind,
    config: &SamplerConfig,
    n_steps: usize,
    n_chains: usize,
    burn_in: usize,
) -> Vec<ChainRecord> {
    assert!(n_chains >= 1, "n_chains must be >= 1");
    (0..n_chains)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(chain_seed(config.seed, i as u64));
            let x = target.init_position(&mut rng);
            let v: Vec<f64> = (0..target.dim()).map(|_| rng.sample(StandardNormal)).collect();
            let init = PhaseState::new(x, v);
            let mut record = ChainRecord::with_capacity(n_steps);
            let mut counter = EvalCounter::default();
            drive(
                target,
                kernel,
                config,
                n_steps,
                burn_in,
                init,
                &mut rng,
                &mut counter,
                &mut record,
            );
            record
        })
        .collect()
}
