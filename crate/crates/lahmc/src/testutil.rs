//! Shared helpers for unit tests: reference implementations kept independent
//! of the code paths they check.

use crate::state::TargetModel;

/// Target with identically zero energy; leapfrog trajectories on it are
/// straight lines.
pub struct FlatTarget {
    pub dim: usize,
}

impl TargetModel for FlatTarget {
    fn dim(&self) -> usize {
        self.dim
    }

    fn energy(&self, _x: &[f64]) -> f64 {
        0.0
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        vec![0.0; x.len()]
    }
}

/// Plain textbook leapfrog recursion (half kick, drift, half kick), written
/// without any gradient caching.
pub fn reference_leapfrog(
    x0: &[f64],
    v0: &[f64],
    grad: impl Fn(&[f64]) -> Vec<f64>,
    epsilon: f64,
    num_steps: usize,
) -> (Vec<f64>, Vec<f64>) {
    let mut x = x0.to_vec();
    let mut v = v0.to_vec();
    for _ in 0..num_steps {
        let g = grad(&x);
        for i in 0..v.len() {
            v[i] -= 0.5 * epsilon * g[i];
        }
        for i in 0..x.len() {
            x[i] += epsilon * v[i];
        }
        let g = grad(&x);
        for i in 0..v.len() {
            v[i] -= 0.5 * epsilon * g[i];
        }
    }
    (x, v)
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .fold(0.0f64, |m, (ai, bi)| m.max((ai - bi).abs()))
}

/// Central finite-difference gradient of `energy` at `x`.
pub fn finite_difference_gradient(
    energy: impl Fn(&[f64]) -> f64,
    x: &[f64],
    step: f64,
) -> Vec<f64> {
    let mut grad = Vec::with_capacity(x.len());
    let mut probe = x.to_vec();
    for i in 0..x.len() {
        probe[i] = x[i] + step;
        let hi = energy(&probe);
        probe[i] = x[i] - step;
        let lo = energy(&probe);
        probe[i] = x[i];
        grad.push((hi - lo) / (2.0 * step));
    }
    grad
}

/// Checks a hand-coded gradient against central differences at `n_points`
/// random probe points drawn from N(0, 4 I).
///
/// Components whose true magnitude sits below the cancellation noise of the
/// difference quotient (roundoff of the two energy evaluations divided by
/// `2 step`) cannot be resolved to a relative tolerance; an absolute floor
/// at that noise level covers them.
pub fn assert_gradient_consistent<T: TargetModel>(target: &T, n_points: usize, rel_tol: f64) {
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};
    let step = 1e-5;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x9d5f);
    for _ in 0..n_points {
        let x: Vec<f64> = (0..target.dim())
            .map(|_| 2.0 * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng))
            .collect();
        let analytic = target.gradient(&x);
        let numeric = finite_difference_gradient(|p| target.energy(p), &x, step);
        let cancellation = 8.0 * (1.0 + target.energy(&x).abs()) * f64::EPSILON / (2.0 * step);
        for (i, (a, n)) in analytic.iter().zip(&numeric).enumerate() {
            let scale = a.abs().max(n.abs());
            assert!(
                (a - n).abs() <= rel_tol * scale + cancellation,
                "gradient component {i} mismatch at {x:?}: analytic {a}, numeric {n}"
            );
        }
    }
}
