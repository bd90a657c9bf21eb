//! The three operators the samplers are built from: the momentum flip `F`,
//! the leapfrog integrator `L(epsilon, M)`, and the partial momentum
//! randomization `R(beta)`.
//!
//! `F` and `L` are deterministic, volume-preserving maps on phase space, and
//! `L` is reversible through `F`: `L^-1 = F L F`. The leapfrog update uses
//! the half-kick / drift / half-kick (velocity Verlet) splitting, so that a
//! trajectory retraced with flipped momentum reproduces the original states
//! up to floating-point roundoff.

use crate::state::{EvalCounter, PhaseState, TargetModel};
use crate::Error;
use rand::Rng;
use rand_distr::StandardNormal;

/// Step length and step count for one leapfrog trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeapfrogParams {
    pub epsilon: f64,
    pub num_steps: usize,
}

impl LeapfrogParams {
    pub fn new(epsilon: f64, num_steps: usize) -> Result<Self, Error> {
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(Error::invalid("epsilon", format!("must be positive and finite, got {epsilon}")));
        }
        if num_steps == 0 {
            return Err(Error::invalid("num_steps", "must be >= 1"));
        }
        Ok(LeapfrogParams { epsilon, num_steps })
    }
}

/// Momentum flip: `F {x, v} = {x, -v}`. Self-inverse and energy-preserving.
pub fn flip(state: &PhaseState) -> PhaseState {
    PhaseState {
        x: state.x.clone(),
        v: state.v.iter().map(|vi| -vi).collect(),
    }
}

/// One leapfrog step: half momentum kick, full position drift, half kick.
///
/// Costs two gradient evaluations when called in isolation; multi-step
/// trajectories share the gradient between adjacent half-kicks (see
/// [`leapfrog`]).
pub fn leapfrog_step<T: TargetModel + ?Sized>(
    state: &PhaseState,
    target: &T,
    epsilon: f64,
    counter: &mut EvalCounter,
) -> PhaseState {
    assert_eq!(state.dim(), target.dim(), "state dimension does not match target");
    counter.tick_gradient();
    let grad = target.gradient(&state.x);
    let (x, v, _, _) = integrate(
        state.x.clone(),
        state.v.clone(),
        grad,
        target,
        epsilon,
        1,
        counter,
        false,
    );
    PhaseState { x, v }
}

/// `M` leapfrog steps with shared step length.
///
/// The gradient computed at the end of each step is reused at the start of
/// the next, so a full trajectory costs `M + 1` gradient evaluations.
pub fn leapfrog<T: TargetModel + ?Sized>(
    state: &PhaseState,
    target: &T,
    params: &LeapfrogParams,
    counter: &mut EvalCounter,
) -> PhaseState {
    assert_eq!(state.dim(), target.dim(), "state dimension does not match target");
    counter.tick_gradient();
    let grad = target.gradient(&state.x);
    let (x, v, _, _) = integrate(
        state.x.clone(),
        state.v.clone(),
        grad,
        target,
        params.epsilon,
        params.num_steps,
        counter,
        false,
    );
    PhaseState { x, v }
}

/// End point of a trajectory together with its cached evaluations.
#[derive(Debug, Clone)]
pub(crate) struct TrajectoryEnd {
    pub state: PhaseState,
    /// Joint energy `H` at the end state.
    pub energy: f64,
    /// `grad E` at the end position, reusable by a follow-on trajectory.
    pub gradient: Vec<f64>,
}

/// Trajectory starting from a known gradient, as used when extending a
/// ladder rung by rung: costs `M` gradient evaluations plus one fused
/// energy+gradient evaluation at the end point.
pub(crate) fn leapfrog_from_gradient<T: TargetModel + ?Sized>(
    state: &PhaseState,
    start_gradient: &[f64],
    target: &T,
    params: &LeapfrogParams,
    counter: &mut EvalCounter,
) -> TrajectoryEnd {
    let (x, v, gradient, potential) = integrate(
        state.x.clone(),
        state.v.clone(),
        start_gradient.to_vec(),
        target,
        params.epsilon,
        params.num_steps,
        counter,
        true,
    );
    let state = PhaseState { x, v };
    let energy = potential + state.kinetic_energy();
    TrajectoryEnd { state, energy, gradient }
}

/// Core velocity-Verlet loop. `grad` must be the gradient at `x`. When
/// `fused_end` is set, the final gradient evaluation also returns the
/// potential energy (one fused call); otherwise the returned potential is NaN
/// and no energy evaluation is counted.
#[allow(clippy::too_many_arguments)]
fn integrate<T: TargetModel + ?Sized>(
    mut x: Vec<f64>,
    mut v: Vec<f64>,
    mut grad: Vec<f64>,
    target: &T,
    epsilon: f64,
    num_steps: usize,
    counter: &mut EvalCounter,
    fused_end: bool,
) -> (Vec<f64>, Vec<f64>, Vec<f64>, f64) {
    debug_assert!(num_steps >= 1);
    let half = 0.5 * epsilon;
    let mut potential = f64::NAN;
    for step in 0..num_steps {
        for i in 0..v.len() {
            v[i] -= half * grad[i];
        }
        for i in 0..x.len() {
            x[i] += epsilon * v[i];
        }
        if fused_end && step + 1 == num_steps {
            counter.tick_fused();
            let (e, g) = target.energy_gradient(&x);
            potential = e;
            grad = g;
        } else {
            counter.tick_gradient();
            grad = target.gradient(&x);
        }
        for i in 0..v.len() {
            v[i] -= half * grad[i];
        }
    }
    (x, v, grad, potential)
}

/// Partial momentum refresh: `v' = v sqrt(1 - beta) + n sqrt(beta)` with
/// `n ~ N(0, I)`. `beta = 0` returns the state unchanged (and draws nothing),
/// `beta = 1` replaces the momentum entirely.
///
/// # Panics
/// Panics if `beta` lies outside `[0, 1]`.
pub fn randomize_momentum<R: Rng + ?Sized>(
    state: &PhaseState,
    beta: f64,
    rng: &mut R,
) -> PhaseState {
    assert!((0.0..=1.0).contains(&beta), "beta must lie in [0, 1], got {beta}");
    if beta == 0.0 {
        return state.clone();
    }
    let keep = (1.0 - beta).sqrt();
    let mix = beta.sqrt();
    let v = state
        .v
        .iter()
        .map(|vi| {
            let n: f64 = rng.sample(StandardNormal);
            vi * keep + n * mix
        })
        .collect();
    PhaseState { x: state.x.clone(), v }
}

/// Converts a per-unit-simulation-time momentum retention fraction `alpha`
/// into the per-step mixing amount: `beta = alpha^(1 / (epsilon * M))`.
pub fn beta_from_alpha(alpha: f64, epsilon: f64, num_steps: usize) -> Result<f64, Error> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::invalid("alpha", format!("must lie in (0, 1], got {alpha}")));
    }
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::invalid("epsilon", format!("must be positive and finite, got {epsilon}")));
    }
    if num_steps == 0 {
        return Err(Error::invalid("num_steps", "must be >= 1"));
    }
    Ok(alpha.powf(1.0 / (epsilon * num_steps as f64)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::targets::AnisotropicGaussian;
    use crate::testutil::{FlatTarget, max_abs_diff, reference_leapfrog};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn unit_gaussian() -> AnisotropicGaussian {
        AnisotropicGaussian::new(vec![1.0]).unwrap()
    }

    #[test]
    fn flip_negates_momentum() {
        let s = PhaseState::new(vec![1.0, 2.0], vec![3.0, -4.0]);
        let f = flip(&s);
        assert_eq!(f.x, vec![1.0, 2.0]);
        assert_eq!(f.v, vec![-3.0, 4.0]);
    }

    #[test]
    fn flip_is_involution_bitwise() {
        let s = PhaseState::new(vec![0.1, -7.3, 2.0], vec![-0.0, 5.5, 1e-300]);
        assert_eq!(flip(&flip(&s)), s);
    }

    #[test]
    fn flip_fixes_zero_momentum() {
        let s = PhaseState::new(vec![2.0], vec![0.0]);
        let f = flip(&s);
        assert_eq!(f.x, s.x);
        assert_eq!(f.v[0], 0.0);
    }

    #[test]
    fn leapfrog_step_free_particle() {
        let mut c = EvalCounter::default();
        let flat = FlatTarget { dim: 2 };
        let s = PhaseState::new(vec![1.0, -2.0], vec![0.5, 0.25]);
        let out = leapfrog_step(&s, &flat, 1.0, &mut c);
        assert_eq!(out.x, vec![1.5, -1.75]);
        assert_eq!(out.v, s.v);
        assert_eq!(c.gradient_evals, 2);
    }

    #[test]
    fn leapfrog_step_hand_values() {
        // E(x) = x^2/2, start (x, v) = (1, 0), epsilon = 0.1:
        //   v_half = -0.05, x' = 0.995, v' = -0.09975
        let mut c = EvalCounter::default();
        let s = PhaseState::new(vec![1.0], vec![0.0]);
        let out = leapfrog_step(&s, &unit_gaussian(), 0.1, &mut c);
        assert!((out.x[0] - 0.995).abs() < 1e-15);
        assert!((out.v[0] - (-0.09975)).abs() < 1e-15);
    }

    #[test]
    fn leapfrog_two_steps_hand_values() {
        // Second step continues from (0.995, -0.09975):
        //   v_half = -0.14950, x' = 0.980050, v' = -0.1985025
        let mut c = EvalCounter::default();
        let s = PhaseState::new(vec![1.0], vec![0.0]);
        let params = LeapfrogParams::new(0.1, 2).unwrap();
        let out = leapfrog(&s, &unit_gaussian(), &params, &mut c);
        assert!((out.x[0] - 0.980050).abs() < 1e-12);
        assert!((out.v[0] - (-0.1985025)).abs() < 1e-12);
        assert_eq!(c.gradient_evals, 3); // M + 1
    }

    #[test]
    fn leapfrog_matches_reference_recursion() {
        let g = AnisotropicGaussian::new(vec![1.0, 9.0]).unwrap();
        let s = PhaseState::new(vec![0.8, -1.4], vec![0.3, 1.1]);
        let params = LeapfrogParams::new(0.23, 17).unwrap();
        let mut c = EvalCounter::default();
        let out = leapfrog(&s, &g, &params, &mut c);
        let (rx, rv) = reference_leapfrog(&s.x, &s.v, |x| g.gradient(x), 0.23, 17);
        assert!(max_abs_diff(&out.x, &rx) < 1e-13);
        assert!(max_abs_diff(&out.v, &rv) < 1e-13);
    }

    #[test]
    fn leapfrog_flat_target_moves_ballistically() {
        let mut c = EvalCounter::default();
        let flat = FlatTarget { dim: 2 };
        let s = PhaseState::new(vec![0.0, 1.0], vec![2.0, -1.0]);
        let params = LeapfrogParams::new(1.0, 10).unwrap();
        let out = leapfrog(&s, &flat, &params, &mut c);
        assert_eq!(out.x, vec![20.0, -9.0]);
        assert_eq!(out.v, s.v);
    }

    #[test]
    fn leapfrog_reversible_through_flip() {
        let g = AnisotropicGaussian::new(vec![1.0, 1e4]).unwrap();
        let s = PhaseState::new(vec![1.2, -30.0], vec![-0.7, 0.4]);
        let params = LeapfrogParams::new(0.9, 13).unwrap();
        let mut c = EvalCounter::default();
        let fwd = leapfrog(&s, &g, &params, &mut c);
        let back = flip(&leapfrog(&flip(&fwd), &g, &params, &mut c));
        let scale = 1.0 + s.x.iter().chain(s.v.iter()).fold(0.0f64, |m, c| m.max(c.abs()));
        assert!(max_abs_diff(&back.x, &s.x) <= 1e-8 * scale);
        assert!(max_abs_diff(&back.v, &s.v) <= 1e-8 * scale);
    }

    #[test]
    fn leapfrog_from_gradient_costs_and_energy() {
        let g = unit_gaussian();
        let s = PhaseState::new(vec![1.0], vec![0.5]);
        let params = LeapfrogParams::new(0.1, 4).unwrap();
        let mut c = EvalCounter::default();
        let grad0 = g.gradient(&s.x);
        let end = leapfrog_from_gradient(&s, &grad0, &g, &params, &mut c);
        assert_eq!(c.gradient_evals, 4);
        assert_eq!(c.energy_evals, 1);
        let mut c2 = EvalCounter::default();
        let expect = crate::state::joint_energy(&end.state, &g, &mut c2);
        assert!((end.energy - expect).abs() < 1e-15);
        assert!(max_abs_diff(&end.gradient, &g.gradient(&end.state.x)) == 0.0);
    }

    #[test]
    fn randomize_momentum_beta_zero_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = PhaseState::new(vec![1.0, 2.0], vec![-0.5, 0.25]);
        assert_eq!(randomize_momentum(&s, 0.0, &mut rng), s);
    }

    #[test]
    fn randomize_momentum_beta_one_is_full_refresh() {
        let s = PhaseState::new(vec![1.0], vec![1e9]);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let out = randomize_momentum(&s, 1.0, &mut rng);
        assert_eq!(out.x, s.x);
        // sqrt(1 - 1) = 0 kills the old momentum entirely
        assert!(out.v[0].abs() < 10.0);
    }

    #[test]
    #[should_panic(expected = "beta must lie in [0, 1]")]
    fn randomize_momentum_rejects_bad_beta() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = PhaseState::new(vec![0.0], vec![0.0]);
        randomize_momentum(&s, 1.5, &mut rng);
    }

    #[test]
    fn beta_from_alpha_examples() {
        assert_eq!(beta_from_alpha(1.0, 0.3, 7).unwrap(), 1.0);
        assert_eq!(beta_from_alpha(0.37, 0.5, 2).unwrap(), 0.37);
        let b = beta_from_alpha(0.25, 1.0, 10).unwrap();
        assert!((b - 0.25f64.powf(0.1)).abs() < 1e-15);
        assert!((b - 0.87055).abs() < 5e-6);
        assert!(beta_from_alpha(0.0, 1.0, 10).is_err());
        assert!(beta_from_alpha(-0.2, 1.0, 10).is_err());
    }

    #[test]
    fn divergent_gradient_flags_states_nonfinite() {
        let g = AnisotropicGaussian::new(vec![1.0]).unwrap();
        // epsilon far beyond the stability limit 2/omega = 2 blows up fast
        let s = PhaseState::new(vec![1.0], vec![1.0]);
        let params = LeapfrogParams::new(25.0, 300).unwrap();
        let mut c = EvalCounter::default();
        let end = leapfrog_from_gradient(&s, &g.gradient(&s.x), &g, &params, &mut c);
        assert!(!end.energy.is_finite());
    }
}
