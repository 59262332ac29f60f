//! Command-line interface.
//!
//! Subcommands: `sample-stats` (frame-sampler checks), `estimator-stats`
//! (empirical bias/variance against the closed-form bounds), `optimize`
//! (run an experiment from a config file), `rates` (decay fits over a CSV
//! column), and `reproduce` (end-to-end benchmark pipelines). Exit code 0
//! on success, 1 on operational failure, 2 on usage errors.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::estimator::{
    bias_bound_smooth, empirical_bias_variance, variance_bound_smooth,
};
use crate::harness::{reproduce, run_experiment, ExperimentConfig, Figure, ReproduceOptions};
use crate::objectives::{make_random_psd, Objective, PowerQuadratic};
use crate::rates::{default_window, fit_geometric_clipped, fit_power_law_clipped};
use crate::rng::RngStream;
use crate::stiefel::{marginal_uniformity_check, sample_stiefel, second_moment_check};

#[derive(Parser)]
#[command(
    name = "szgd",
    version,
    about = "Stochastic zeroth-order gradient descent toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Statistical checks of the orthonormal-frame sampler
    SampleStats {
        /// Ambient dimension
        #[arg(long, default_value_t = 5)]
        n: usize,
        /// Frame size
        #[arg(long, default_value_t = 2)]
        k: usize,
        /// Monte Carlo sample count
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Empirical estimator bias/variance against the closed-form bounds
    EstimatorStats {
        /// Ambient dimension
        #[arg(long, default_value_t = 10)]
        n: usize,
        /// Directions per estimate
        #[arg(long, default_value_t = 3)]
        k: usize,
        /// Finite-difference granularity
        #[arg(long, default_value_t = 0.05)]
        delta: f64,
        /// Monte Carlo trials
        #[arg(long, default_value_t = 100_000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run a multi-run experiment described by a config file
    Optimize {
        /// Path to a `key = value` config file
        #[arg(long)]
        config: PathBuf,
        /// Override the config's base seed
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Fit geometric and power-law decay models to a series from a file
    Rates {
        /// CSV with a header (see --column) or one bare value per line
        #[arg(long)]
        input: PathBuf,
        /// Column to fit when the file has a header
        #[arg(long, default_value = "f_value")]
        column: String,
        /// Fit window start (default: after 20% burn-in)
        #[arg(long)]
        window_start: Option<usize>,
        /// Fit window end, exclusive (default: series length)
        #[arg(long)]
        window_end: Option<usize>,
    },
    /// Re-run a benchmark pipeline end to end, emitting CSVs and SVGs
    Reproduce {
        /// Which pipeline: f1, f2, or sample
        #[arg(long)]
        figure: String,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Output directory
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Independent runs per configuration
        #[arg(long, default_value_t = 10)]
        runs: usize,
        /// Iterations per run
        #[arg(long, default_value_t = 2000)]
        iters: usize,
    },
}

/// Entry point shared by the binary and tests. Never panics on bad input;
/// returns the process exit status.
pub fn cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(err) => {
            // Usage problems exit 2; --help/--version exit 0.
            let code = if err.use_stderr() { 2 } else { 0 };
            let _ = err.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            1
        }
    }
}

fn dispatch(command: Command) -> Result<i32> {
    match command {
        Command::SampleStats { n, k, samples, seed } => sample_stats(n, k, samples, seed),
        Command::EstimatorStats {
            n,
            k,
            delta,
            trials,
            seed,
        } => estimator_stats(n, k, delta, trials, seed),
        Command::Optimize { config, seed, out } => {
            let text = std::fs::read_to_string(&config)?;
            let mut cfg = ExperimentConfig::parse(&text)?;
            if let Some(seed) = seed {
                cfg.base_seed = seed;
            }
            let result = run_experiment(&cfg, &out)?;
            let completed = result
                .trajectories
                .iter()
                .filter(|t| t.status.is_completed())
                .count();
            println!("out_dir = {}", result.out_dir.display());
            println!("runs_completed = {completed} / {}", result.trajectories.len());
            println!(
                "final_mean_f = {}",
                crate::harness::fmt17(*result.stats.mean_f.last().expect("nonempty"))
            );
            Ok(0)
        }
        Command::Rates {
            input,
            column,
            window_start,
            window_end,
        } => rates_report(&input, &column, window_start, window_end),
        Command::Reproduce {
            figure,
            seed,
            out,
            runs,
            iters,
        } => {
            let fig = Figure::parse(&figure)?;
            let opts = ReproduceOptions {
                seed,
                runs,
                iters,
                out_dir: out,
            };
            let figures = reproduce(fig, &opts)?;
            for path in figures {
                println!("wrote {}", path.display());
            }
            Ok(0)
        }
    }
}

fn sample_stats(n: usize, k: usize, samples: usize, seed: u64) -> Result<i32> {
    let stream = RngStream::new(seed, 0);
    let mut ortho_dev: f64 = 0.0;
    for i in 0..100 {
        let frame = sample_stiefel(n, k, &stream.substream(1000 + i))?;
        ortho_dev = ortho_dev.max(frame.orthonormality_deviation());
    }
    let moment = second_moment_check(n, samples, &stream)?;
    let marginals = marginal_uniformity_check(n, k, samples, &stream)?;

    // Each moment entry has Monte Carlo standard error O(1/sqrt(samples)).
    let moment_tol = 6.0 / (samples as f64).sqrt();
    println!("n = {n}, k = {k}, samples = {samples}, seed = {seed}");
    let ortho_pass = ortho_dev <= crate::stiefel::ORTHONORMALITY_TOL;
    println!(
        "orthonormality_max_deviation = {ortho_dev:.3e} (tol 1e-10) {}",
        pass(ortho_pass)
    );
    let moment_pass = moment.max_deviation <= moment_tol;
    println!(
        "second_moment_max_deviation = {:.3e} (tol {moment_tol:.3e}) {}",
        moment.max_deviation,
        pass(moment_pass)
    );
    let mut marginal_pass = true;
    for (i, dev) in marginals.iter().enumerate() {
        let ok = *dev <= moment_tol;
        marginal_pass &= ok;
        println!("marginal_deviation_col_{i} = {dev:.3e} (tol {moment_tol:.3e}) {}", pass(ok));
    }
    Ok(if ortho_pass && moment_pass && marginal_pass { 0 } else { 1 })
}

fn estimator_stats(n: usize, k: usize, delta: f64, trials: usize, seed: u64) -> Result<i32> {
    let stream = RngStream::new(seed, 0);
    let q = make_random_psd(n, 5.0, &stream.substream(1))?;
    let smooth_l = 2.0 * q.max_eigenvalue();
    let f = PowerQuadratic::new(q, 1.0)?;

    let mut rng = stream.substream(2).rng();
    let g = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let x = g.normalize() * 2.0;
    let grad_norm = f.grad(&x)?.norm();

    let bv = empirical_bias_variance(&f, &x, delta, k, trials, &stream.substream(3))?;
    let bias_bound = bias_bound_smooth(smooth_l, n, delta);
    let var_bound = variance_bound_smooth(smooth_l, n, k, delta, grad_norm);

    println!("objective = {}", f.name());
    println!("n = {n}, k = {k}, delta = {delta}, trials = {trials}, seed = {seed}");
    println!("grad_norm = {grad_norm:.6}");
    println!("smooth_l = {smooth_l:.6}");
    // Quadratics have zero third derivative, so the refined bias bound
    // forces exactly zero bias; test against pure Monte Carlo noise.
    let bias_pass = bv.bias_norm() <= 3.0 * bv.bias_norm_se();
    println!(
        "empirical_bias_norm = {:.6e} (3 se = {:.6e}, smooth bound = {:.6e}) {}",
        bv.bias_norm(),
        3.0 * bv.bias_norm_se(),
        bias_bound,
        pass(bias_pass)
    );
    let var_pass = bv.variance <= var_bound + 3.0 * bv.variance_se;
    println!(
        "empirical_variance = {:.6e} (3 se = {:.6e}) vs bound {:.6e} {}",
        bv.variance,
        3.0 * bv.variance_se,
        var_bound,
        pass(var_pass)
    );
    Ok(if bias_pass && var_pass { 0 } else { 1 })
}

fn rates_report(
    input: &std::path::Path,
    column: &str,
    window_start: Option<usize>,
    window_end: Option<usize>,
) -> Result<i32> {
    let text = std::fs::read_to_string(input)?;
    let series = read_series(&text, column)?;
    if series.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "series too short to fit: {} points",
            series.len()
        )));
    }
    let window = window_start.unwrap_or_else(|| default_window(series.len()).start)
        ..window_end.unwrap_or(series.len());

    println!("series_len = {}", series.len());
    let geo = fit_geometric_clipped(&series, window.clone())?;
    print!("{}", geo.report());
    let power_window = window.start.max(1)..window.end;
    let pow = fit_power_law_clipped(&series, power_window)?;
    print!("{}", pow.report());
    Ok(0)
}

/// Accept either a headerless file with one value per line or a CSV whose
/// header names `column`.
fn read_series(text: &str, column: &str) -> Result<Vec<f64>> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let first = lines
        .next()
        .ok_or_else(|| Error::InvalidArgument("empty input file".into()))?;

    if let Ok(v) = first.trim().parse::<f64>() {
        let mut series = vec![v];
        for line in lines {
            series.push(line.trim().parse().map_err(|_| {
                Error::InvalidArgument(format!("bad value line: `{line}`"))
            })?);
        }
        return Ok(series);
    }

    let header: Vec<&str> = first.split(',').map(str::trim).collect();
    let idx = header
        .iter()
        .position(|h| *h == column)
        .ok_or_else(|| Error::InvalidArgument(format!("column `{column}` not in header")))?;
    lines
        .map(|line| {
            line.split(',')
                .nth(idx)
                .ok_or_else(|| Error::InvalidArgument(format!("short row: `{line}`")))?
                .trim()
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("bad value in row: `{line}`")))
        })
        .collect()
}

fn pass(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_headerless_series() {
        let series = read_series("1.0\n0.5\n0.25\n", "f_value").unwrap();
        assert_eq!(series, vec![1.0, 0.5, 0.25]);
    }

    #[test]
    fn reads_named_csv_column() {
        let text = "t,f_value,extra\n0,4.0,9\n1,2.0,9\n2,1.0,9\n";
        assert_eq!(read_series(text, "f_value").unwrap(), vec![4.0, 2.0, 1.0]);
        assert!(read_series(text, "missing").is_err());
    }
}
