//! Post-processing over chain records: pooled autocorrelation against a
//! gradient-evaluations axis, the evaluations-to-threshold mixing metric,
//! transition-outcome fractions, and hyperparameter grid search.

use crate::sampler::{
    ChainRecord, KernelKind, SamplerConfig, TransitionKind, run_chains, splitmix64,
};
use crate::state::TargetModel;
use crate::Error;
use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

/// Normalized sample autocorrelation per step lag, with the matching mean
/// cumulative gradient-evaluation count at each lag.
///
/// `degenerate` is set when the pooled variance is zero (constant chains);
/// `values[1..]` are NaN in that case and the curve never crosses any
/// threshold.
#[derive(Debug, Clone)]
pub struct AutocorrCurve {
    pub lags: Vec<usize>,
    pub values: Vec<f64>,
    pub evals_axis: Vec<f64>,
    pub degenerate: bool,
}

/// Pooled autocovariance estimator over chains, dimensions, and time:
///
/// ```text
/// c(tau) = sum_chains sum_dims sum_t (x_d(t) - mu_d)(x_d(t + tau) - mu_d)
/// ```
///
/// normalized by the same expression at `tau = 0`, with `mu_d` the pooled
/// per-dimension mean across all chains and steps. Dimensions are weighted
/// equally, so for ill-conditioned targets the high-variance directions
/// dominate the sum. The biased (1/n) normalization cancels in the ratio.
/// The evaluations axis is `tau * (total gradient evals / total steps)`.
pub fn autocorrelation(records: &[ChainRecord], max_lag: usize) -> Result<AutocorrCurve, Error> {
    if records.is_empty() || records.iter().any(|r| r.is_empty()) {
        return Err(Error::EmptyInput("autocorrelation needs at least one non-empty record"));
    }
    let n_steps = records[0].len();
    if records.iter().any(|r| r.len() != n_steps) {
        return Err(Error::invalid("records", "all chains must have equal length"));
    }
    if max_lag >= n_steps {
        return Err(Error::invalid(
            "max_lag",
            format!("must be < chain length {n_steps}, got {max_lag}"),
        ));
    }
    let dim = records[0].samples[0].len();

    // Pooled per-dimension means.
    let mut means = vec![0.0f64; dim];
    for record in records {
        for x in &record.samples {
            for (m, xi) in means.iter_mut().zip(x) {
                *m += xi;
            }
        }
    }
    let total_steps = (records.len() * n_steps) as f64;
    for m in &mut means {
        *m /= total_steps;
    }

    // Lagged product sums accumulated over every chain and dimension. Linear
    // (non-circular) correlation via zero-padded FFT.
    let nfft = (n_steps + max_lag).next_power_of_two();
    let mut planner = FftPlanner::new();
    let forward = planner.plan_fft_forward(nfft);
    let inverse = planner.plan_fft_inverse(nfft);
    let mut buf = vec![Complex::new(0.0f64, 0.0f64); nfft];
    let mut sums = vec![0.0f64; max_lag + 1];
    for record in records {
        for d in 0..dim {
            for slot in buf.iter_mut() {
                *slot = Complex::new(0.0, 0.0);
            }
            for (t, x) in record.samples.iter().enumerate() {
                buf[t].re = x[d] - means[d];
            }
            forward.process(&mut buf);
            for slot in buf.iter_mut() {
                *slot = Complex::new(slot.norm_sqr(), 0.0);
            }
            inverse.process(&mut buf);
            let scale = 1.0 / nfft as f64;
            for (lag, sum) in sums.iter_mut().enumerate() {
                *sum += buf[lag].re * scale;
            }
        }
    }

    let degenerate = !(sums[0] > 0.0);
    let values: Vec<f64> = if degenerate {
        let mut v = vec![f64::NAN; max_lag + 1];
        v[0] = 1.0;
        v
    } else {
        sums.iter().map(|s| s / sums[0]).collect()
    };

    let total_evals: u64 = records.iter().map(|r| r.total_grad_evals()).sum();
    let rate = total_evals as f64 / total_steps;
    let evals_axis = (0..=max_lag).map(|lag| lag as f64 * rate).collect();

    Ok(AutocorrCurve {
        lags: (0..=max_lag).collect(),
        values,
        evals_axis,
        degenerate,
    })
}

/// Gradient evaluations at which the autocorrelation first drops to
/// `threshold`, linearly interpolated between the bracketing lags. Returns
/// `f64::INFINITY` when the curve never crosses within its lag range.
///
/// # Panics
/// Panics unless `threshold` lies in `(0, 1)`.
pub fn evals_to_threshold(curve: &AutocorrCurve, threshold: f64) -> f64 {
    assert!(
        threshold > 0.0 && threshold < 1.0,
        "threshold must lie in (0, 1), got {threshold}"
    );
    for i in 1..curve.values.len() {
        let lo = curve.values[i - 1];
        let hi = curve.values[i];
        if hi <= threshold {
            // first crossing: lo > threshold >= hi
            let span = lo - hi;
            let frac = if span > 0.0 { (lo - threshold) / span } else { 1.0 };
            return curve.evals_axis[i - 1] + frac * (curve.evals_axis[i] - curve.evals_axis[i - 1]);
        }
    }
    f64::INFINITY
}

/// Empirical fraction of steps ending in each transition: momentum flip or
/// `a`-fold leap for `a` in `1..=max_leap`. `leaps[a - 1]` holds the `L^a`
/// fraction; all fractions sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionFractions {
    pub flip: f64,
    pub leaps: Vec<f64>,
}

pub fn transition_fractions(records: &[ChainRecord], max_leap: usize) -> TransitionFractions {
    let mut flip_count = 0u64;
    let mut leap_counts = vec![0u64; max_leap];
    let mut total = 0u64;
    for record in records {
        for outcome in &record.outcomes {
            total += 1;
            match outcome.kind {
                TransitionKind::Flip => flip_count += 1,
                TransitionKind::Leap(a) => {
                    assert!(a >= 1 && a <= max_leap, "leap index {a} exceeds max_leap {max_leap}");
                    leap_counts[a - 1] += 1;
                }
            }
        }
    }
    assert!(total > 0, "transition fractions need at least one outcome");
    TransitionFractions {
        flip: flip_count as f64 / total as f64,
        leaps: leap_counts.iter().map(|c| *c as f64 / total as f64).collect(),
    }
}

/// Second axis of a hyperparameter grid: either the momentum mixing amount
/// or the leapfrog step count.
#[derive(Debug, Clone, PartialEq)]
pub enum GridAxis {
    Beta(Vec<f64>),
    NumSteps(Vec<usize>),
}

impl GridAxis {
    pub fn len(&self) -> usize {
        match self {
            GridAxis::Beta(v) => v.len(),
            GridAxis::NumSteps(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Column label used in serialized output.
    pub fn label(&self) -> &'static str {
        match self {
            GridAxis::Beta(_) => "beta",
            GridAxis::NumSteps(_) => "M",
        }
    }

    pub fn value_string(&self, index: usize) -> String {
        match self {
            GridAxis::Beta(v) => format!("{}", v[index]),
            GridAxis::NumSteps(v) => format!("{}", v[index]),
        }
    }
}

/// Chain budget and threshold for one grid-search run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridParams {
    pub n_steps: usize,
    pub n_chains: usize,
    pub burn_in: usize,
    pub max_lag: usize,
    pub threshold: f64,
}

/// Mixing cost per grid cell: `values[i][j]` is the gradient-evaluation
/// count to reach the autocorrelation threshold at `epsilons[i]` and axis
/// value `j`, with `f64::INFINITY` marking cells that never crossed
/// (including diverging ones).
#[derive(Debug, Clone)]
pub struct MixingGrid {
    pub epsilons: Vec<f64>,
    pub axis: GridAxis,
    pub values: Vec<Vec<f64>>,
}

/// Runs one kernel over the full `epsilons x axis` grid and measures
/// [`evals_to_threshold`] per cell. Cells execute independently (in
/// parallel where cores allow); cell `(i, j)` derives its seed from
/// `base.seed` and the cell index, so HMC and LAHMC sweeps with the same
/// base seed see common random numbers cell for cell.
pub fn grid_search<T: TargetModel + ?Sized>(
    target: &T,
    kernel: KernelKind,
    base: &SamplerConfig,
    epsilons: &[f64],
    axis: &GridAxis,
    params: &GridParams,
) -> Result<MixingGrid, Error> {
    if epsilons.is_empty() || axis.is_empty() {
        return Err(Error::EmptyInput("grid axes must be non-empty"));
    }
    let cols = axis.len();
    let cells: Vec<(usize, usize)> = (0..epsilons.len())
        .flat_map(|i| (0..cols).map(move |j| (i, j)))
        .collect();
    let flat: Vec<f64> = cells
        .par_iter()
        .map(|&(i, j)| {
            let mut config = *base;
            config.epsilon = epsilons[i];
            match axis {
                GridAxis::Beta(betas) => config.beta = betas[j],
                GridAxis::NumSteps(steps) => config.num_steps = steps[j],
            }
            config.seed = splitmix64(base.seed ^ splitmix64((i * cols + j) as u64 + 1));
            if config.validate().is_err() {
                return f64::INFINITY;
            }
            let records = run_chains(target, kernel, &config, params.n_steps, params.n_chains, params.burn_in);
            match autocorrelation(&records, params.max_lag) {
                Ok(curve) => evals_to_threshold(&curve, params.threshold),
                Err(_) => f64::INFINITY,
            }
        })
        .collect();
    let values = flat.chunks(cols).map(|row| row.to_vec()).collect();
    Ok(MixingGrid {
        epsilons: epsilons.to_vec(),
        axis: axis.clone(),
        values,
    })
}

/// `count` points log-uniformly spaced between `lo` and `hi` inclusive.
pub fn log_spaced(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi >= lo && count >= 1);
    if count == 1 {
        return vec![lo];
    }
    let (llo, lhi) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (llo + (lhi - llo) * i as f64 / (count - 1) as f64).exp())
        .collect()
}
