//! Phase-space state, the target-model interface, joint energy, and
//! evaluation accounting shared by all samplers.

use rand::RngCore;

/// A point in the extended state space: position `x` paired with momentum `v`.
///
/// Both vectors always have the same length. States handed to a sampler step
/// must be finite; intermediate states produced by a diverging trajectory may
/// carry non-finite components and are treated as zero-probability downstream.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseState {
    pub x: Vec<f64>,
    pub v: Vec<f64>,
}

impl PhaseState {
    /// # Panics
    /// Panics if `x` and `v` differ in length or are empty.
    pub fn new(x: Vec<f64>, v: Vec<f64>) -> Self {
        assert_eq!(x.len(), v.len(), "position/momentum length mismatch");
        assert!(!x.is_empty(), "phase state must have dimension >= 1");
        PhaseState { x, v }
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn is_finite(&self) -> bool {
        self.x.iter().chain(self.v.iter()).all(|c| c.is_finite())
    }

    /// Kinetic energy `v . v / 2` (unit mass).
    pub fn kinetic_energy(&self) -> f64 {
        0.5 * self.v.iter().map(|vi| vi * vi).sum::<f64>()
    }
}

/// An unnormalized target distribution `p(x) ~ exp(-E(x))`.
///
/// The normalizing constant is never computed anywhere in this crate; all
/// probability manipulations use energy differences, in which it cancels.
/// Implementations must be stateless: the same instance may be shared by
/// many concurrently running chains.
pub trait TargetModel: Send + Sync {
    fn dim(&self) -> usize;

    /// Potential energy `E(x)`. Non-finite values are legal and mean zero
    /// probability density.
    fn energy(&self, x: &[f64]) -> f64;

    /// Gradient of `E` at `x`; must have length `dim()`.
    fn gradient(&self, x: &[f64]) -> Vec<f64>;

    /// Fused evaluation of `E(x)` and its gradient. Callers that account for
    /// evaluations tick one energy and one gradient evaluation per fused call.
    fn energy_gradient(&self, x: &[f64]) -> (f64, Vec<f64>) {
        (self.energy(x), self.gradient(x))
    }

    /// Draws an exact sample, for targets with closed-form sampling.
    fn exact_sample(&self, rng: &mut dyn RngCore) -> Option<Vec<f64>> {
        let _ = rng;
        None
    }

    fn has_exact_sampler(&self) -> bool {
        false
    }

    /// Starting position for a fresh chain: an exact sample where available,
    /// otherwise the origin. Targets without exact samplers may override this
    /// with a dispersed initialization (see `RoughWell`).
    fn init_position(&self, rng: &mut dyn RngCore) -> Vec<f64> {
        self.exact_sample(rng)
            .unwrap_or_else(|| vec![0.0; self.dim()])
    }
}

/// Running count of target evaluations, owned by exactly one chain.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EvalCounter {
    pub energy_evals: u64,
    pub gradient_evals: u64,
}

impl EvalCounter {
    pub(crate) fn tick_energy(&mut self) {
        self.energy_evals += 1;
    }

    pub(crate) fn tick_gradient(&mut self) {
        self.gradient_evals += 1;
    }

    pub(crate) fn tick_fused(&mut self) {
        self.energy_evals += 1;
        self.gradient_evals += 1;
    }
}

/// Joint energy `H(s) = E(x) + v . v / 2` of the extended state.
///
/// Counts one energy evaluation. A non-finite result is propagated as-is;
/// callers treat it as probability zero.
///
/// # Panics
/// Panics if the state dimension does not match `target.dim()`.
pub fn joint_energy<T: TargetModel + ?Sized>(
    state: &PhaseState,
    target: &T,
    counter: &mut EvalCounter,
) -> f64 {
    assert_eq!(
        state.dim(),
        target.dim(),
        "state dimension does not match target"
    );
    counter.tick_energy();
    target.energy(&state.x) + state.kinetic_energy()
}

/// `H(s2) - H(s1) = log p(s1) - log p(s2)` for the joint distribution.
pub fn log_prob_ratio<T: TargetModel + ?Sized>(
    s1: &PhaseState,
    s2: &PhaseState,
    target: &T,
    counter: &mut EvalCounter,
) -> f64 {
    joint_energy(s2, target, counter) - joint_energy(s1, target, counter)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrator::flip;
    use crate::targets::{AnisotropicGaussian, RoughWell};

    fn unit_gaussian() -> AnisotropicGaussian {
        AnisotropicGaussian::new(vec![1.0]).unwrap()
    }

    #[test]
    fn joint_energy_zero_state() {
        let mut c = EvalCounter::default();
        let s = PhaseState::new(vec![0.0], vec![0.0]);
        assert_eq!(joint_energy(&s, &unit_gaussian(), &mut c), 0.0);
        assert_eq!(c.energy_evals, 1);
    }

    #[test]
    fn joint_energy_hand_value() {
        let mut c = EvalCounter::default();
        let s = PhaseState::new(vec![3.0], vec![4.0]);
        // E = 9/2, kinetic = 16/2
        assert_eq!(joint_energy(&s, &unit_gaussian(), &mut c), 12.5);
    }

    #[test]
    fn joint_energy_rough_well_origin() {
        let mut c = EvalCounter::default();
        let well = RoughWell::new(2, 100.0, 2.0).unwrap();
        let s = PhaseState::new(vec![0.0, 0.0], vec![0.0, 0.0]);
        assert_eq!(joint_energy(&s, &well, &mut c), 2.0);
    }

    #[test]
    fn joint_energy_flip_invariant_bitwise() {
        let mut c = EvalCounter::default();
        let s = PhaseState::new(vec![0.3, -1.7], vec![0.9, -2.4]);
        let g = AnisotropicGaussian::new(vec![1.0, 4.0]).unwrap();
        let h = joint_energy(&s, &g, &mut c);
        let hf = joint_energy(&flip(&s), &g, &mut c);
        assert_eq!(h.to_bits(), hf.to_bits());
    }

    #[test]
    fn log_prob_ratio_examples() {
        let mut c = EvalCounter::default();
        let g = unit_gaussian();
        let s = PhaseState::new(vec![0.7], vec![-0.2]);
        assert_eq!(log_prob_ratio(&s, &s, &g, &mut c), 0.0);
        assert_eq!(log_prob_ratio(&s, &flip(&s), &g, &mut c), 0.0);

        let s1 = PhaseState::new(vec![0.0], vec![0.0]);
        let s2 = PhaseState::new(vec![1.0], vec![1.0]);
        assert_eq!(log_prob_ratio(&s1, &s2, &g, &mut c), 1.0);
    }

    #[test]
    fn log_prob_ratio_antisymmetric() {
        let g = AnisotropicGaussian::new(vec![1.0, 1e6]).unwrap();
        let mut c = EvalCounter::default();
        let states = [
            PhaseState::new(vec![0.4, -310.0], vec![1.2, 0.5]),
            PhaseState::new(vec![-1.1, 905.0], vec![-0.3, 2.0]),
            PhaseState::new(vec![2.2, 14.0], vec![0.0, -1.4]),
        ];
        for a in &states {
            for b in &states {
                let fwd = log_prob_ratio(a, b, &g, &mut c);
                let rev = log_prob_ratio(b, a, &g, &mut c);
                assert!((fwd + rev).abs() <= 1e-12, "fwd={fwd} rev={rev}");
            }
        }
    }

    #[test]
    #[should_panic(expected = "does not match target")]
    fn joint_energy_dimension_mismatch_panics() {
        let mut c = EvalCounter::default();
        let s = PhaseState::new(vec![0.0, 0.0], vec![0.0, 0.0]);
        joint_energy(&s, &unit_gaussian(), &mut c);
    }

    #[test]
    fn counters_monotone() {
        let mut c = EvalCounter::default();
        let g = unit_gaussian();
        let s = PhaseState::new(vec![1.0], vec![1.0]);
        let mut last = c;
        for _ in 0..5 {
            joint_energy(&s, &g, &mut c);
            assert!(c.energy_evals >= last.energy_evals);
            assert!(c.gradient_evals >= last.gradient_evals);
            last = c;
        }
    }
}
