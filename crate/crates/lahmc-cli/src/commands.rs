//! The four subcommands. All output is CSV with a fixed column schema,
//! assembled after every chain has finished so row order never depends on
//! scheduling. Infinite mixing costs serialize as `inf`.

use crate::spec::{AppError, Defaults, parse_grid, resolve, validation};
use crate::{CommonArgs, GridArgs};
use lahmc::{
    GridAxis, GridParams, KernelKind, TransitionKind, autocorrelation, chain_seed, grid_search,
    run_chains, transition_fractions,
};
use std::io::{BufWriter, Write};
use std::path::Path;

fn writer(path: Option<&Path>) -> Result<BufWriter<Box<dyn Write>>, AppError> {
    let sink: Box<dyn Write> = match path {
        Some(path) => Box::new(std::fs::File::create(path).map_err(|e| {
            AppError::Runtime(format!("cannot write {}: {e}", path.display()))
        })?),
        None => Box::new(std::io::stdout()),
    };
    Ok(BufWriter::new(sink))
}

fn io_err(e: std::io::Error) -> AppError {
    AppError::Runtime(format!("write failed: {e}"))
}

fn outcome_label(kind: TransitionKind) -> String {
    match kind {
        TransitionKind::Flip => "F".to_string(),
        TransitionKind::Leap(a) => format!("L{a}"),
    }
}

/// `sample`: one row per step per chain with the cumulative gradient cost,
/// the transition taken, and the position.
pub fn sample(args: CommonArgs) -> Result<(), AppError> {
    let spec = resolve(&args, &Defaults { steps: 1000, chains: 1, target: None })?;
    let target = spec.target()?;
    let records = run_chains(
        &target,
        spec.sampler,
        &spec.config,
        spec.n_steps,
        spec.n_chains,
        spec.burn_in.unwrap_or(0),
    );

    let mut out = writer(spec.output.as_deref())?;
    let dim = records[0].samples[0].len();
    write!(out, "chain,step,grad_evals,outcome").map_err(io_err)?;
    for d in 0..dim {
        write!(out, ",x{d}").map_err(io_err)?;
    }
    writeln!(out).map_err(io_err)?;
    for (chain, record) in records.iter().enumerate() {
        for step in 0..record.len() {
            write!(
                out,
                "{chain},{step},{},{}",
                record.cumulative_grad_evals[step],
                outcome_label(record.outcomes[step].kind)
            )
            .map_err(io_err)?;
            for value in &record.samples[step] {
                write!(out, ",{value}").map_err(io_err)?;
            }
            writeln!(out).map_err(io_err)?;
        }
    }
    out.flush().map_err(io_err)
}

/// `table`: transition fractions for every benchmark configuration
/// (three targets, both samplers, beta in {1, 0.1}).
pub fn table(args: CommonArgs) -> Result<(), AppError> {
    let spec = resolve(&args, &Defaults { steps: 20_000, chains: 10, target: Some("gauss2d") })?;
    let mut out = writer(spec.output.as_deref())?;
    writeln!(out, "target,sampler,beta,F,L1,L2,L3,L4").map_err(io_err)?;
    let mut row_index = 0u64;
    for target_name in ["gauss2d", "gauss100d", "rough-well"] {
        let target = lahmc::target_by_name(target_name).map_err(|e| validation(e.to_string()))?;
        let burn_in = spec.burn_in_for(&target);
        for beta in [1.0, 0.1] {
            for kernel in [KernelKind::Hmc, KernelKind::Lahmc] {
                let mut config = spec.config;
                config.beta = beta;
                config.seed = chain_seed(spec.config.seed, row_index);
                row_index += 1;
                let records = run_chains(&target, kernel, &config, spec.n_steps, spec.n_chains, burn_in);
                let fr = transition_fractions(&records, config.max_leaps.max(4));
                write!(out, "{target_name},{kernel},{beta},{}", fr.flip).map_err(io_err)?;
                for a in 0..4 {
                    write!(out, ",{}", fr.leaps.get(a).copied().unwrap_or(0.0)).map_err(io_err)?;
                }
                writeln!(out).map_err(io_err)?;
            }
        }
    }
    out.flush().map_err(io_err)
}

/// `autocorr`: normalized autocorrelation against cumulative gradient
/// evaluations for HMC and LAHMC at beta in {1, 0.1}, sharing one base seed
/// so the four variants see common random numbers.
pub fn autocorr(args: CommonArgs) -> Result<(), AppError> {
    let spec = resolve(&args, &Defaults { steps: 50_000, chains: 4, target: None })?;
    let target = spec.target()?;
    let burn_in = spec.burn_in_for(&target);

    let mut out = writer(spec.output.as_deref())?;
    writeln!(out, "sampler,beta,lag,grad_evals,autocorr").map_err(io_err)?;
    for (kernel, beta) in [
        (KernelKind::Hmc, 1.0),
        (KernelKind::Lahmc, 1.0),
        (KernelKind::Hmc, 0.1),
        (KernelKind::Lahmc, 0.1),
    ] {
        let mut config = spec.config;
        config.beta = beta;
        let records = run_chains(&target, kernel, &config, spec.n_steps, spec.n_chains, burn_in);
        let curve = autocorrelation(&records, spec.max_lag)
            .map_err(|e| AppError::Runtime(e.to_string()))?;
        for lag in 0..curve.values.len() {
            writeln!(
                out,
                "{kernel},{beta},{lag},{},{}",
                curve.evals_axis[lag], curve.values[lag]
            )
            .map_err(io_err)?;
        }
    }
    out.flush().map_err(io_err)
}

/// `gridsearch`: gradient evaluations to reach the autocorrelation threshold
/// per grid cell, for both samplers unless one is pinned with --sampler.
pub fn gridsearch(args: GridArgs) -> Result<(), AppError> {
    let spec = resolve(
        &args.common,
        &Defaults { steps: 50_000, chains: 4, target: Some("gauss2d-grid") },
    )?;
    let target = spec.target()?;
    let burn_in = spec.burn_in_for(&target);
    let file = crate::spec::ConfigFile::load(args.common.config.as_deref())?;

    let axes = args.axes.or(file.axes).unwrap_or_else(|| "eps-beta".to_string());
    let eps_text = args.eps_grid.or(file.eps_grid).unwrap_or_else(|| "0.05:2:10".to_string());
    let epsilons = parse_grid(&eps_text, "--eps-grid")?;
    let axis = match axes.as_str() {
        "eps-beta" => {
            let text = args.axis_grid.or(file.axis_grid).unwrap_or_else(|| "0.02:1:10".to_string());
            GridAxis::Beta(parse_grid(&text, "--axis-grid")?)
        }
        "eps-m" => {
            let text = args
                .axis_grid
                .or(file.axis_grid)
                .unwrap_or_else(|| "1,2,5,10,20,50".to_string());
            let steps = parse_grid(&text, "--axis-grid")?
                .into_iter()
                .map(|v| {
                    if v >= 1.0 && v.fract() == 0.0 {
                        Ok(v as usize)
                    } else {
                        Err(validation(format!("--axis-grid: M values must be positive integers, got {v}")))
                    }
                })
                .collect::<Result<Vec<_>, _>>()?;
            GridAxis::NumSteps(steps)
        }
        other => return Err(validation(format!("--axes: expected eps-beta or eps-m, got `{other}`"))),
    };
    let threshold = args.threshold.or(file.threshold).unwrap_or(0.5);
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(validation(format!("--threshold must lie in (0, 1), got {threshold}")));
    }

    let kernels: Vec<KernelKind> = match args.common.sampler.as_deref() {
        None => vec![KernelKind::Hmc, KernelKind::Lahmc],
        Some(_) => vec![spec.sampler],
    };
    let params = GridParams {
        n_steps: spec.n_steps,
        n_chains: spec.n_chains,
        burn_in,
        max_lag: spec.max_lag,
        threshold,
    };

    let mut out = writer(spec.output.as_deref())?;
    writeln!(out, "sampler,epsilon,{},evals_to_threshold", axis.label()).map_err(io_err)?;
    for kernel in kernels {
        let grid = grid_search(&target, kernel, &spec.config, &epsilons, &axis, &params)
            .map_err(|e| AppError::Runtime(e.to_string()))?;
        for (i, eps) in grid.epsilons.iter().enumerate() {
            for j in 0..axis.len() {
                writeln!(
                    out,
                    "{kernel},{eps},{},{}",
                    axis.value_string(j),
                    grid.values[i][j]
                )
                .map_err(io_err)?;
            }
        }
    }
    out.flush().map_err(io_err)
}

