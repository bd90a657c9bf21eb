//! Benchmark target distributions: anisotropic Gaussians with a log-linear
//! variance spectrum and the "rough well" (an isotropic quadratic bowl with
//! a sinusoidal ripple in each coordinate).

use crate::state::TargetModel;
use crate::Error;
use rand::{Rng, RngCore};
use rand_distr::StandardNormal;
use std::f64::consts::PI;

/// Zero-mean Gaussian with diagonal covariance `diag(variances)`.
///
/// The covariance is kept diagonal rather than rotated: leapfrog dynamics
/// with unit mass are equivariant under orthogonal rotation, so sampler
/// statistics depend only on the eigenvalue spectrum, and the diagonal form
/// gives O(N) gradients and exact sampling.
#[derive(Debug, Clone)]
pub struct AnisotropicGaussian {
    variances: Vec<f64>,
    inv_variances: Vec<f64>,
    sigmas: Vec<f64>,
}

impl AnisotropicGaussian {
    pub fn new(variances: Vec<f64>) -> Result<Self, Error> {
        if variances.is_empty() {
            return Err(Error::invalid("variances", "must be non-empty"));
        }
        if let Some(bad) = variances.iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
            return Err(Error::invalid(
                "variances",
                format!("must be positive and finite, got {bad}"),
            ));
        }
        let inv_variances = variances.iter().map(|v| 1.0 / v).collect();
        let sigmas = variances.iter().map(|v| v.sqrt()).collect();
        Ok(AnisotropicGaussian {
            variances,
            inv_variances,
            sigmas,
        })
    }

    /// Variances log-linearly spaced from 1 to `max_variance`.
    pub fn log_linear(dim: usize, max_variance: f64) -> Result<Self, Error> {
        if dim < 2 {
            return Err(Error::invalid("dim", "log-linear spectrum needs dim >= 2"));
        }
        if !(max_variance > 0.0) || !max_variance.is_finite() {
            return Err(Error::invalid(
                "max_variance",
                format!("must be positive and finite, got {max_variance}"),
            ));
        }
        let variances = (0..dim)
            .map(|i| max_variance.powf(i as f64 / (dim - 1) as f64))
            .collect();
        Self::new(variances)
    }

    pub fn variances(&self) -> &[f64] {
        &self.variances
    }
}

impl TargetModel for AnisotropicGaussian {
    fn dim(&self) -> usize {
        self.variances.len()
    }

    fn energy(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.dim(), "position dimension mismatch");
        0.5 * x
            .iter()
            .zip(&self.inv_variances)
            .map(|(xi, wi)| xi * xi * wi)
            .sum::<f64>()
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.dim(), "position dimension mismatch");
        x.iter().zip(&self.inv_variances).map(|(xi, wi)| xi * wi).collect()
    }

    fn energy_gradient(&self, x: &[f64]) -> (f64, Vec<f64>) {
        assert_eq!(x.len(), self.dim(), "position dimension mismatch");
        let mut energy = 0.0;
        let mut grad = Vec::with_capacity(x.len());
        for (xi, wi) in x.iter().zip(&self.inv_variances) {
            let gi = xi * wi;
            energy += xi * gi;
            grad.push(gi);
        }
        (0.5 * energy, grad)
    }

    fn exact_sample(&self, rng: &mut dyn RngCore) -> Option<Vec<f64>> {
        Some(
            self.sigmas
                .iter()
                .map(|s| s * rng.sample::<f64, _>(StandardNormal))
                .collect(),
        )
    }

    fn has_exact_sampler(&self) -> bool {
        true
    }
}

/// Well-conditioned quadratic bowl with a sinusoidal ripple per coordinate:
/// `E(x) = sum_i [ x_i^2 / (2 sigma1^2) + cos(pi x_i / sigma2) ]`.
///
/// The ripple makes the energy surface rough, so traversing the bowl at a
/// tolerable discretization error takes many leapfrog steps even though the
/// distribution itself is isotropic.
#[derive(Debug, Clone)]
pub struct RoughWell {
    sigma1: f64,
    sigma2: f64,
    dim: usize,
}

impl RoughWell {
    pub fn new(dim: usize, sigma1: f64, sigma2: f64) -> Result<Self, Error> {
        if dim == 0 {
            return Err(Error::invalid("dim", "must be >= 1"));
        }
        if !(sigma1 > 0.0) || !sigma1.is_finite() {
            return Err(Error::invalid("sigma1", format!("must be positive, got {sigma1}")));
        }
        if !(sigma2 > 0.0) || !sigma2.is_finite() {
            return Err(Error::invalid("sigma2", format!("must be positive, got {sigma2}")));
        }
        Ok(RoughWell { sigma1, sigma2, dim })
    }

    pub fn sigma1(&self) -> f64 {
        self.sigma1
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }
}

impl TargetModel for RoughWell {
    fn dim(&self) -> usize {
        self.dim
    }

    fn energy(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.dim, "position dimension mismatch");
        let inv_2s1sq = 0.5 / (self.sigma1 * self.sigma1);
        x.iter()
            .map(|xi| xi * xi * inv_2s1sq + (PI * xi / self.sigma2).cos())
            .sum()
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.dim, "position dimension mismatch");
        let inv_s1sq = 1.0 / (self.sigma1 * self.sigma1);
        let k = PI / self.sigma2;
        x.iter().map(|xi| xi * inv_s1sq - k * (k * xi).sin()).collect()
    }

    /// Chains on the rough well start from `x ~ N(0, sigma1^2 I)`, roughly
    /// matching the bowl's width; benchmark runners discard a burn-in on top.
    fn init_position(&self, rng: &mut dyn RngCore) -> Vec<f64> {
        (0..self.dim)
            .map(|_| self.sigma1 * rng.sample::<f64, _>(StandardNormal))
            .collect()
    }
}

/// A target from the built-in catalog.
#[derive(Debug, Clone)]
pub enum StandardTarget {
    Gaussian(AnisotropicGaussian),
    RoughWell(RoughWell),
}

impl TargetModel for StandardTarget {
    fn dim(&self) -> usize {
        match self {
            StandardTarget::Gaussian(g) => g.dim(),
            StandardTarget::RoughWell(w) => w.dim(),
        }
    }

    fn energy(&self, x: &[f64]) -> f64 {
        match self {
            StandardTarget::Gaussian(g) => g.energy(x),
            StandardTarget::RoughWell(w) => w.energy(x),
        }
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        match self {
            StandardTarget::Gaussian(g) => g.gradient(x),
            StandardTarget::RoughWell(w) => w.gradient(x),
        }
    }

    fn energy_gradient(&self, x: &[f64]) -> (f64, Vec<f64>) {
        match self {
            StandardTarget::Gaussian(g) => g.energy_gradient(x),
            StandardTarget::RoughWell(w) => w.energy_gradient(x),
        }
    }

    fn exact_sample(&self, rng: &mut dyn RngCore) -> Option<Vec<f64>> {
        match self {
            StandardTarget::Gaussian(g) => g.exact_sample(rng),
            StandardTarget::RoughWell(w) => w.exact_sample(rng),
        }
    }

    fn has_exact_sampler(&self) -> bool {
        match self {
            StandardTarget::Gaussian(g) => g.has_exact_sampler(),
            StandardTarget::RoughWell(w) => w.has_exact_sampler(),
        }
    }

    fn init_position(&self, rng: &mut dyn RngCore) -> Vec<f64> {
        match self {
            StandardTarget::Gaussian(g) => g.init_position(rng),
            StandardTarget::RoughWell(w) => w.init_position(rng),
        }
    }
}

/// Catalog names accepted by [`target_by_name`] (and the CLI `--target` flag).
pub const TARGET_NAMES: [&str; 4] = ["gauss2d", "gauss100d", "gauss2d-grid", "rough-well"];

/// The built-in benchmark catalog:
/// - `gauss2d`: 2-d Gaussian, variances 1 and 1e6;
/// - `gauss100d`: 100-d Gaussian, variances log-linear from 1 to 1e6;
/// - `gauss2d-grid`: 2-d Gaussian, variances 1 and 1e5 (grid-search budget);
/// - `rough-well`: 2-d rough well with sigma1 = 100, sigma2 = 2.
pub fn standard_targets() -> Vec<(&'static str, StandardTarget)> {
    TARGET_NAMES
        .iter()
        .map(|name| (*name, target_by_name(name).expect("catalog name")))
        .collect()
}

pub fn target_by_name(name: &str) -> Result<StandardTarget, Error> {
    match name {
        "gauss2d" => Ok(StandardTarget::Gaussian(
            AnisotropicGaussian::log_linear(2, 1e6).unwrap(),
        )),
        "gauss100d" => Ok(StandardTarget::Gaussian(
            AnisotropicGaussian::log_linear(100, 1e6).unwrap(),
        )),
        "gauss2d-grid" => Ok(StandardTarget::Gaussian(
            AnisotropicGaussian::log_linear(2, 1e5).unwrap(),
        )),
        "rough-well" => Ok(StandardTarget::RoughWell(RoughWell::new(2, 100.0, 2.0).unwrap())),
        other => Err(Error::UnknownTarget(other.to_string(), TARGET_NAMES.join(", "))),
    }
}
