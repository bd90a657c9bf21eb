//! Resolution of command-line flags against an optional JSON config file
//! into a validated run specification.

use crate::CommonArgs;
use lahmc::{KernelKind, SamplerConfig, StandardTarget, TargetModel, beta_from_alpha, default_burn_in, target_by_name};
use serde::Deserialize;
use std::path::{Path, PathBuf};

#[derive(Debug)]
pub enum AppError {
    /// Bad input: unknown names, out-of-range values, malformed config.
    Validation(String),
    /// Environment failures: unreadable config, unwritable output.
    Runtime(String),
}

impl AppError {
    pub fn message(&self) -> &str {
        match self {
            AppError::Validation(m) | AppError::Runtime(m) => m,
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            AppError::Validation(_) => 2,
            AppError::Runtime(_) => 1,
        }
    }
}

pub fn validation(msg: impl Into<String>) -> AppError {
    AppError::Validation(msg.into())
}

/// JSON mirror of the command-line flags. Unknown keys are rejected so that
/// misspelled options fail loudly.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub target: Option<String>,
    pub sampler: Option<String>,
    pub epsilon: Option<f64>,
    #[serde(alias = "M")]
    pub m: Option<usize>,
    #[serde(alias = "K")]
    pub k: Option<usize>,
    pub beta: Option<f64>,
    pub alpha: Option<f64>,
    pub steps: Option<usize>,
    pub chains: Option<usize>,
    pub seed: Option<u64>,
    pub max_lag: Option<usize>,
    pub burn_in: Option<usize>,
    pub output: Option<PathBuf>,
    pub axes: Option<String>,
    pub eps_grid: Option<String>,
    pub axis_grid: Option<String>,
    pub threshold: Option<f64>,
}

impl ConfigFile {
    pub fn load(path: Option<&Path>) -> Result<Self, AppError> {
        let Some(path) = path else {
            return Ok(ConfigFile::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| AppError::Runtime(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| validation(format!("invalid config {}: {e}", path.display())))
    }
}

/// A fully resolved chain-running request.
#[derive(Debug, Clone)]
pub struct RunSpec {
    pub target_name: String,
    pub sampler: KernelKind,
    pub config: SamplerConfig,
    pub n_steps: usize,
    pub n_chains: usize,
    pub max_lag: usize,
    pub burn_in: Option<usize>,
    pub output: Option<PathBuf>,
}

impl RunSpec {
    pub fn target(&self) -> Result<StandardTarget, AppError> {
        target_by_name(&self.target_name).map_err(|e| validation(e.to_string()))
    }

    pub fn burn_in_for(&self, target: &StandardTarget) -> usize {
        self.burn_in.unwrap_or_else(|| default_burn_in(target))
    }
}

pub struct Defaults {
    pub steps: usize,
    pub chains: usize,
    pub target: Option<&'static str>,
}

/// Merges flags over config-file values over defaults and validates the
/// result. `beta` and `alpha` are mutually exclusive; omitting both means
/// `beta = 1`.
pub fn resolve(args: &CommonArgs, defaults: &Defaults) -> Result<RunSpec, AppError> {
    let file = ConfigFile::load(args.config.as_deref())?;

    let target_name = args
        .target
        .clone()
        .or(file.target)
        .or_else(|| defaults.target.map(str::to_string))
        .ok_or_else(|| validation("missing --target"))?;
    // fail fast on unknown names
    target_by_name(&target_name).map_err(|e| validation(e.to_string()))?;

    let sampler = args
        .sampler
        .clone()
        .or(file.sampler)
        .unwrap_or_else(|| "lahmc".to_string())
        .parse::<KernelKind>()
        .map_err(|e| validation(e.to_string()))?;

    let epsilon = args.epsilon.or(file.epsilon).unwrap_or(1.0);
    let num_steps = args.num_steps.or(file.m).unwrap_or(10);
    let max_leaps = args.max_leaps.or(file.k).unwrap_or(4);

    let beta_flag = args.beta.or(file.beta);
    let alpha_flag = args.alpha.or(file.alpha);
    let beta = match (beta_flag, alpha_flag) {
        (Some(_), Some(_)) => {
            return Err(validation("supply exactly one of --beta and --alpha"));
        }
        (Some(beta), None) => beta,
        (None, Some(alpha)) => beta_from_alpha(alpha, epsilon, num_steps)
            .map_err(|e| validation(e.to_string()))?,
        (None, None) => 1.0,
    };

    let n_steps = args.steps.or(file.steps).unwrap_or(defaults.steps);
    if n_steps == 0 {
        return Err(validation("--steps must be >= 1"));
    }
    let n_chains = args.chains.or(file.chains).unwrap_or(defaults.chains);
    if n_chains == 0 {
        return Err(validation("--chains must be >= 1"));
    }
    let max_lag = args.max_lag.or(file.max_lag).unwrap_or_else(|| (n_steps / 5).max(1));
    if max_lag >= n_steps {
        return Err(validation(format!("--max-lag must be < --steps ({n_steps})")));
    }

    let config = SamplerConfig {
        epsilon,
        num_steps,
        max_leaps,
        beta,
        seed: args.seed.or(file.seed).unwrap_or(0),
    };
    config.validate().map_err(|e| validation(e.to_string()))?;

    Ok(RunSpec {
        target_name,
        sampler,
        config,
        n_steps,
        n_chains,
        max_lag,
        burn_in: args.burn_in.or(file.burn_in),
        output: args.output.clone().or(file.output),
    })
}

/// Parses a grid axis given either as `lo:hi:count` (log-spaced) or as a
/// comma-separated list of values.
pub fn parse_grid(text: &str, flag: &str) -> Result<Vec<f64>, AppError> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() == 3 {
        let lo: f64 = parts[0]
            .parse()
            .map_err(|_| validation(format!("{flag}: bad number `{}`", parts[0])))?;
        let hi: f64 = parts[1]
            .parse()
            .map_err(|_| validation(format!("{flag}: bad number `{}`", parts[1])))?;
        let count: usize = parts[2]
            .parse()
            .map_err(|_| validation(format!("{flag}: bad count `{}`", parts[2])))?;
        if !(lo > 0.0) || hi < lo || count == 0 {
            return Err(validation(format!("{flag}: need 0 < lo <= hi and count >= 1")));
        }
        return Ok(lahmc::log_spaced(lo, hi, count));
    }
    if parts.len() == 1 {
        let values: Result<Vec<f64>, _> = text.split(',').map(|v| v.trim().parse::<f64>()).collect();
        let values = values.map_err(|_| validation(format!("{flag}: bad value list `{text}`")))?;
        if values.is_empty() {
            return Err(validation(format!("{flag}: empty grid")));
        }
        return Ok(values);
    }
    Err(validation(format!("{flag}: expected `lo:hi:count` or `v1,v2,...`, got `{text}`")))
}
