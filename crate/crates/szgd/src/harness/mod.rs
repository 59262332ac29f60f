//! Experiment runner: multi-run execution, aggregation, persistence, and
//! figure emission.
//!
//! An experiment is described by a flat `key = value` config (see
//! [`ExperimentConfig::parse`]), runs `runs` independent trajectories with
//! run `r` on RNG stream `r` (stream 0 builds the objective), and persists
//! everything needed to re-execute it exactly: the config, the quadratic
//! form in spectral text form, per-run CSVs, and the aggregate series.
//!
//! File contracts, byte-stable across repeated invocations:
//!
//! - `run_<id>.csv` with header `t,f_value,dist_to_limit,delta,step_sq_norm`
//! - `agg.csv` with header `t,mean_f,std_f,mean_dist,std_dist,evals`
//! - `q_matrix.txt` with `n`, eigenvalues, and the row-major eigenvector
//!   matrix, all floats printed with 17 significant digits
//! - `config.txt` (re-executable copy) and `manifest.txt` (run record)

pub mod cli;
pub mod figure;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::estimator::EstimatorConfig;
use crate::exec;
use crate::objectives::{make_random_psd, Objective, PowerQuadratic, QuadraticForm};
use crate::optimizers::{run_gd, run_proximal, run_szgd, OptimConfig, ProxConfig, Trajectory};
use crate::rng::RngStream;

/// Print a float with 17 significant digits, enough to round-trip f64.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

/// Objective described by config keys.
#[derive(Debug, Clone, PartialEq)]
pub enum ObjectiveSpec {
    PowerQuadratic {
        n: usize,
        p: f64,
        /// Random spectrum: eigenvalues i.i.d. exponential with this mean.
        eigen_mean: Option<f64>,
        /// Fixed spherical form `Q = q_scale * I` instead.
        q_scale: Option<f64>,
    },
}

impl ObjectiveSpec {
    /// Build the objective; randomness (if any) comes from `setup`.
    pub fn build(&self, setup: &RngStream) -> Result<PowerQuadratic> {
        match self {
            ObjectiveSpec::PowerQuadratic {
                n,
                p,
                eigen_mean,
                q_scale,
            } => {
                let q = match (eigen_mean, q_scale) {
                    (Some(mean), None) => make_random_psd(*n, *mean, setup)?,
                    (None, Some(scale)) => QuadraticForm::scaled_identity(*n, *scale),
                    _ => {
                        return Err(Error::Config(
                            "exactly one of eigen_mean / q_scale must be set".into(),
                        ))
                    }
                };
                PowerQuadratic::new(q, *p)
            }
        }
    }
}

/// Optimizer described by config keys.
#[derive(Debug, Clone, PartialEq)]
pub enum OptimizerSpec {
    Szgd {
        k: usize,
        eta: f64,
        iters: usize,
        delta0: f64,
        delta_floor: f64,
    },
    Gd {
        eta: f64,
        iters: usize,
    },
    Proximal {
        eta: f64,
        iters: usize,
    },
}

impl OptimizerSpec {
    pub fn label(&self) -> String {
        match self {
            OptimizerSpec::Szgd { k, .. } => format!("k = {k}"),
            OptimizerSpec::Gd { .. } => "GD".into(),
            OptimizerSpec::Proximal { .. } => "proximal".into(),
        }
    }
}

/// Starting-point policy.
#[derive(Debug, Clone, PartialEq)]
pub enum X0Policy {
    Fixed(Vec<f64>),
    RandomSphere { radius: f64 },
}

impl X0Policy {
    fn build(&self, n: usize, stream: &RngStream) -> Result<DVector<f64>> {
        match self {
            X0Policy::Fixed(values) => {
                if values.len() != n {
                    return Err(Error::Config(format!(
                        "x0 has {} entries but the objective dimension is {n}",
                        values.len()
                    )));
                }
                Ok(DVector::from_vec(values.clone()))
            }
            X0Policy::RandomSphere { radius } => {
                let mut rng = stream.rng();
                let g = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
                Ok(g.normalize() * *radius)
            }
        }
    }
}

/// Declarative description of a multi-run experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub objective: ObjectiveSpec,
    pub optimizer: OptimizerSpec,
    pub runs: usize,
    pub base_seed: u64,
    pub x0: X0Policy,
    pub record_every: usize,
}

impl ExperimentConfig {
    /// Parse the flat `key = value` format. `#` starts a comment; keys are
    /// `objective, n, p, eigen_mean, q_scale, algo, k, eta, T, runs, seed,
    /// delta0, delta_floor, x0_radius, x0, record_every`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut kv = std::collections::BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            kv.insert(key.trim().to_string(), value.trim().to_string());
        }

        let get = |key: &str| {
            kv.get(key)
                .ok_or_else(|| Error::Config(format!("missing key `{key}`")))
        };
        let parse_f64 = |key: &str| -> Result<f64> {
            get(key)?
                .parse()
                .map_err(|_| Error::Config(format!("key `{key}` is not a number")))
        };
        let parse_usize = |key: &str| -> Result<usize> {
            get(key)?
                .parse()
                .map_err(|_| Error::Config(format!("key `{key}` is not an integer")))
        };
        let opt_f64 = |key: &str| -> Result<Option<f64>> {
            kv.get(key)
                .map(|v| {
                    v.parse()
                        .map_err(|_| Error::Config(format!("key `{key}` is not a number")))
                })
                .transpose()
        };

        let objective = match get("objective")?.as_str() {
            "power_quadratic" => ObjectiveSpec::PowerQuadratic {
                n: parse_usize("n")?,
                p: parse_f64("p")?,
                eigen_mean: opt_f64("eigen_mean")?,
                q_scale: opt_f64("q_scale")?,
            },
            other => return Err(Error::Config(format!("unknown objective `{other}`"))),
        };

        let eta = parse_f64("eta")?;
        let iters = parse_usize("T")?;
        let optimizer = match get("algo")?.as_str() {
            "szgd" => OptimizerSpec::Szgd {
                k: parse_usize("k")?,
                eta,
                iters,
                delta0: opt_f64("delta0")?.unwrap_or(0.1),
                delta_floor: opt_f64("delta_floor")?.unwrap_or(1e-5),
            },
            "gd" => OptimizerSpec::Gd { eta, iters },
            "proximal" => OptimizerSpec::Proximal { eta, iters },
            other => return Err(Error::Config(format!("unknown algo `{other}`"))),
        };

        let x0 = match (kv.get("x0"), kv.get("x0_radius")) {
            (Some(list), None) => {
                let values = list
                    .split(',')
                    .map(|v| {
                        v.trim()
                            .parse()
                            .map_err(|_| Error::Config("x0 entries must be numbers".into()))
                    })
                    .collect::<Result<Vec<f64>>>()?;
                X0Policy::Fixed(values)
            }
            (None, Some(_)) => X0Policy::RandomSphere {
                radius: parse_f64("x0_radius")?,
            },
            _ => {
                return Err(Error::Config(
                    "exactly one of x0 / x0_radius must be set".into(),
                ))
            }
        };

        let runs = parse_usize("runs")?;
        if runs == 0 {
            return Err(Error::Config("runs must be >= 1".into()));
        }
        let record_every = kv
            .get("record_every")
            .map(|v| {
                v.parse::<usize>()
                    .ok()
                    .filter(|r| *r >= 1)
                    .ok_or_else(|| Error::Config("record_every must be a positive integer".into()))
            })
            .transpose()?
            .unwrap_or(1);

        Ok(Self {
            objective,
            optimizer,
            runs,
            base_seed: get("seed")?
                .parse()
                .map_err(|_| Error::Config("key `seed` is not an integer".into()))?,
            x0,
            record_every,
        })
    }

    /// Canonical `key = value` serialization; parses back to an equal value.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        match &self.objective {
            ObjectiveSpec::PowerQuadratic {
                n,
                p,
                eigen_mean,
                q_scale,
            } => {
                let _ = writeln!(out, "objective = power_quadratic");
                let _ = writeln!(out, "n = {n}");
                let _ = writeln!(out, "p = {}", fmt17(*p));
                if let Some(m) = eigen_mean {
                    let _ = writeln!(out, "eigen_mean = {}", fmt17(*m));
                }
                if let Some(s) = q_scale {
                    let _ = writeln!(out, "q_scale = {}", fmt17(*s));
                }
            }
        }
        match &self.optimizer {
            OptimizerSpec::Szgd {
                k,
                eta,
                iters,
                delta0,
                delta_floor,
            } => {
                let _ = writeln!(out, "algo = szgd");
                let _ = writeln!(out, "k = {k}");
                let _ = writeln!(out, "eta = {}", fmt17(*eta));
                let _ = writeln!(out, "T = {iters}");
                let _ = writeln!(out, "delta0 = {}", fmt17(*delta0));
                let _ = writeln!(out, "delta_floor = {}", fmt17(*delta_floor));
            }
            OptimizerSpec::Gd { eta, iters } => {
                let _ = writeln!(out, "algo = gd");
                let _ = writeln!(out, "eta = {}", fmt17(*eta));
                let _ = writeln!(out, "T = {iters}");
            }
            OptimizerSpec::Proximal { eta, iters } => {
                let _ = writeln!(out, "algo = proximal");
                let _ = writeln!(out, "eta = {}", fmt17(*eta));
                let _ = writeln!(out, "T = {iters}");
            }
        }
        match &self.x0 {
            X0Policy::Fixed(values) => {
                let list: Vec<String> = values.iter().map(|v| fmt17(*v)).collect();
                let _ = writeln!(out, "x0 = {}", list.join(","));
            }
            X0Policy::RandomSphere { radius } => {
                let _ = writeln!(out, "x0_radius = {}", fmt17(*radius));
            }
        }
        let _ = writeln!(out, "runs = {}", self.runs);
        let _ = writeln!(out, "seed = {}", self.base_seed);
        let _ = writeln!(out, "record_every = {}", self.record_every);
        out
    }
}

/// Per-iteration mean and population standard deviation across runs.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateStats {
    pub mean_f: Vec<f64>,
    pub std_f: Vec<f64>,
    /// Empty when the runs carry no distance series.
    pub mean_dist: Vec<f64>,
    pub std_dist: Vec<f64>,
    /// Cumulative oracle cost per iteration (mean across runs, exact for
    /// SZGD where every run spends `2kt`).
    pub evals: Vec<u64>,
    pub runs_used: usize,
}

/// Pointwise mean and population standard deviation of equal-length runs.
pub fn aggregate(trajectories: &[&Trajectory]) -> Result<AggregateStats> {
    let first = trajectories
        .first()
        .ok_or_else(|| Error::InvalidArgument("aggregate needs at least one trajectory".into()))?;
    let len = first.f_values.len();
    for t in trajectories.iter() {
        if t.f_values.len() != len {
            return Err(Error::DimensionMismatch(format!(
                "trajectory lengths differ: {} vs {len}",
                t.f_values.len()
            )));
        }
    }
    let runs = trajectories.len() as f64;

    let mean_std = |series: Vec<&[f64]>| -> (Vec<f64>, Vec<f64>) {
        let mut mean = vec![0.0; len];
        let mut std = vec![0.0; len];
        for s in &series {
            for (m, v) in mean.iter_mut().zip(s.iter()) {
                *m += v;
            }
        }
        for m in mean.iter_mut() {
            *m /= runs;
        }
        for s in &series {
            for i in 0..len {
                let d = s[i] - mean[i];
                std[i] += d * d;
            }
        }
        for v in std.iter_mut() {
            *v = (*v / runs).sqrt();
        }
        (mean, std)
    };

    let (mean_f, std_f) = mean_std(trajectories.iter().map(|t| t.f_values.as_slice()).collect());

    let (mean_dist, std_dist) = if trajectories.iter().all(|t| t.dist_to_limit.is_some()) {
        mean_std(
            trajectories
                .iter()
                .map(|t| t.dist_to_limit.as_deref().expect("checked above"))
                .collect(),
        )
    } else {
        (Vec::new(), Vec::new())
    };

    let mut evals = vec![0.0f64; len];
    for t in trajectories.iter() {
        for (acc, e) in evals.iter_mut().zip(t.cumulative_evals()) {
            *acc += e as f64;
        }
    }
    let evals = evals.into_iter().map(|e| (e / runs).round() as u64).collect();

    Ok(AggregateStats {
        mean_f,
        std_f,
        mean_dist,
        std_dist,
        evals,
        runs_used: trajectories.len(),
    })
}

/// Everything produced by one experiment.
#[derive(Debug)]
pub struct ExperimentResult {
    pub trajectories: Vec<Trajectory>,
    /// Aggregate over completed runs.
    pub stats: AggregateStats,
    pub quadratic: QuadraticForm,
    pub out_dir: PathBuf,
}

/// Execute the experiment and persist all outputs under `out_dir`.
///
/// Run `r` (1-based) uses stream id `r`; stream 0 builds the objective, so
/// all sibling experiments with the same seed share the same `Q` and the
/// same per-run starting points. Diverged or aborted runs keep their CSVs
/// and manifest entries but are excluded from the aggregate.
pub fn run_experiment(cfg: &ExperimentConfig, out_dir: &Path) -> Result<ExperimentResult> {
    fs::create_dir_all(out_dir)?;
    let objective = cfg.objective.build(&RngStream::new(cfg.base_seed, 0))?;
    let n = objective.dim();

    let trajectories: Vec<Trajectory> = exec::map_indexed(cfg.runs, |i| -> Result<Trajectory> {
        let run_stream = RngStream::new(cfg.base_seed, (i + 1) as u64);
        let x0 = cfg.x0.build(n, &run_stream.substream(0))?;
        match cfg.optimizer {
            OptimizerSpec::Szgd {
                k,
                eta,
                iters,
                delta0,
                delta_floor,
            } => {
                let est = EstimatorConfig::with_schedule(k, delta0, delta_floor);
                let opt = OptimConfig::szgd(eta, iters, est, run_stream)
                    .with_record_every(cfg.record_every);
                run_szgd(&objective, &x0, &opt)
            }
            OptimizerSpec::Gd { eta, iters } => {
                let opt = OptimConfig::gd(eta, iters).with_record_every(cfg.record_every);
                run_gd(&objective, &x0, &opt)
            }
            OptimizerSpec::Proximal { eta, iters } => {
                run_proximal(&objective, &x0, iters, &ProxConfig::new(eta))
            }
        }
    })
    .into_iter()
    .collect::<Result<_>>()?;

    for (i, traj) in trajectories.iter().enumerate() {
        write_run_csv(&out_dir.join(format!("run_{}.csv", i + 1)), traj)?;
    }

    let completed: Vec<&Trajectory> = trajectories
        .iter()
        .filter(|t| t.status.is_completed())
        .collect();
    if completed.is_empty() {
        return Err(Error::InvalidArgument(
            "no run completed; nothing to aggregate".into(),
        ));
    }
    let stats = aggregate(&completed)?;
    write_agg_csv(&out_dir.join("agg.csv"), &stats)?;

    fs::write(out_dir.join("config.txt"), cfg.to_text())?;
    fs::write(
        out_dir.join("q_matrix.txt"),
        quadratic_form_to_text(objective.base()),
    )?;
    write_manifest(out_dir, cfg, &objective, &trajectories)?;

    Ok(ExperimentResult {
        trajectories,
        stats,
        quadratic: objective.base().clone(),
        out_dir: out_dir.to_path_buf(),
    })
}

fn write_manifest(
    out_dir: &Path,
    cfg: &ExperimentConfig,
    objective: &PowerQuadratic,
    trajectories: &[Trajectory],
) -> Result<()> {
    let mut m = String::new();
    let _ = writeln!(m, "format = szgd-experiment-v1");
    let _ = writeln!(m, "version = {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(m, "config = config.txt");
    let _ = writeln!(m, "q_matrix = q_matrix.txt");
    let _ = writeln!(m, "objective_name = {}", objective.name());
    let limit = if objective.minimizer().is_some() {
        "known_minimizer".to_string()
    } else {
        "proxy:final_iterate_longest_run".to_string()
    };
    let _ = writeln!(m, "x_limit = {limit}");
    if let OptimizerSpec::Szgd {
        k,
        eta,
        iters,
        delta0,
        delta_floor,
    } = cfg.optimizer
    {
        let est = EstimatorConfig::with_schedule(k, delta0, delta_floor);
        let probe = OptimConfig::szgd(eta, iters, est, RngStream::new(cfg.base_seed, 0));
        if let Some(warning) = probe.step_size_advisory(objective) {
            let _ = writeln!(m, "step_size_advisory = {warning}");
        }
    }
    let mut diverged = 0;
    for (i, t) in trajectories.iter().enumerate() {
        if !t.status.is_completed() {
            diverged += 1;
        }
        let _ = writeln!(m, "run_{} = {}", i + 1, t.status.label());
    }
    let _ = writeln!(m, "incomplete_runs = {diverged}");
    fs::write(out_dir.join("manifest.txt"), m)?;
    Ok(())
}

/// One row per iterate: `t,f_value,dist_to_limit,delta,step_sq_norm`.
/// `delta` is the schedule value for SZGD and 0 otherwise; `step_sq_norm`
/// at row `t` is the squared step landing at `x_t` (0 at `t = 0`);
/// `dist_to_limit` is NaN when no limit is known.
pub fn write_run_csv(path: &Path, traj: &Trajectory) -> Result<()> {
    let mut out = String::from("t,f_value,dist_to_limit,delta,step_sq_norm\n");
    for t in 0..=traj.steps() {
        let dist = traj
            .dist_to_limit
            .as_ref()
            .map_or(f64::NAN, |d| d[t]);
        let delta = traj
            .estimator
            .map_or(0.0, |e| crate::estimator::delta_schedule(t, &e));
        let step = if t == 0 { 0.0 } else { traj.step_sq_norms[t - 1] };
        let _ = writeln!(
            out,
            "{t},{},{},{},{}",
            fmt17(traj.f_values[t]),
            fmt17(dist),
            fmt17(delta),
            fmt17(step)
        );
    }
    fs::write(path, out)?;
    Ok(())
}

/// `t,mean_f,std_f,mean_dist,std_dist,evals`; distance columns are NaN when
/// the runs carry no distance series.
pub fn write_agg_csv(path: &Path, stats: &AggregateStats) -> Result<()> {
    let mut out = String::from("t,mean_f,std_f,mean_dist,std_dist,evals\n");
    for t in 0..stats.mean_f.len() {
        let (md, sd) = if stats.mean_dist.is_empty() {
            (f64::NAN, f64::NAN)
        } else {
            (stats.mean_dist[t], stats.std_dist[t])
        };
        let _ = writeln!(
            out,
            "{t},{},{},{},{},{}",
            fmt17(stats.mean_f[t]),
            fmt17(stats.std_f[t]),
            fmt17(md),
            fmt17(sd),
            stats.evals[t]
        );
    }
    fs::write(path, out)?;
    Ok(())
}

/// Spectral text form: dimension, eigenvalues, row-major eigenvectors.
pub fn quadratic_form_to_text(q: &QuadraticForm) -> String {
    let n = q.n();
    let mut out = String::new();
    let _ = writeln!(out, "n = {n}");
    let eigs: Vec<String> = q.eigenvalues().iter().map(|v| fmt17(*v)).collect();
    let _ = writeln!(out, "eigenvalues = {}", eigs.join(" "));
    let mut entries = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            entries.push(fmt17(q.eigenvectors()[(i, j)]));
        }
    }
    let _ = writeln!(out, "eigenvectors = {}", entries.join(" "));
    out
}

/// Inverse of [`quadratic_form_to_text`].
pub fn quadratic_form_from_text(text: &str) -> Result<QuadraticForm> {
    let mut n = None;
    let mut eigenvalues = None;
    let mut eigenvectors = None;
    for line in text.lines() {
        let Some((key, value)) = line.split_once('=') else {
            continue;
        };
        match key.trim() {
            "n" => {
                n = Some(value.trim().parse::<usize>().map_err(|_| {
                    Error::Config("q_matrix: `n` is not an integer".into())
                })?)
            }
            "eigenvalues" => eigenvalues = Some(parse_floats(value)?),
            "eigenvectors" => eigenvectors = Some(parse_floats(value)?),
            _ => {}
        }
    }
    let n = n.ok_or_else(|| Error::Config("q_matrix: missing `n`".into()))?;
    let eigenvalues =
        eigenvalues.ok_or_else(|| Error::Config("q_matrix: missing `eigenvalues`".into()))?;
    let eigenvectors =
        eigenvectors.ok_or_else(|| Error::Config("q_matrix: missing `eigenvectors`".into()))?;
    if eigenvalues.len() != n || eigenvectors.len() != n * n {
        return Err(Error::Config(format!(
            "q_matrix: expected {n} eigenvalues and {} eigenvector entries",
            n * n
        )));
    }
    QuadraticForm::from_spectrum(
        DVector::from_vec(eigenvalues),
        DMatrix::from_fn(n, n, |i, j| eigenvectors[i * n + j]),
    )
}

fn parse_floats(value: &str) -> Result<Vec<f64>> {
    value
        .split_whitespace()
        .map(|v| {
            v.parse()
                .map_err(|_| Error::Config(format!("q_matrix: bad float `{v}`")))
        })
        .collect()
}

/// The benchmark pipelines behind `reproduce --figure ...`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    /// `(x^T Q x)^{3/4}` over `R^30`: distance and f-value vs iterations.
    F1,
    /// `(x^T Q x)^{1/4}` over `R^30`: same layout, the nonsmooth stress case.
    F2,
    /// Both objectives re-indexed by function-evaluation count.
    Sample,
}

impl Figure {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "f1" => Ok(Figure::F1),
            "f2" => Ok(Figure::F2),
            "sample" => Ok(Figure::Sample),
            other => Err(Error::InvalidArgument(format!(
                "unknown figure `{other}` (expected f1, f2, or sample)"
            ))),
        }
    }
}

/// Settings for a reproduction pipeline. Iteration count and starting
/// radius are artifact defaults (T = 2000, |x0| = 10) recorded in each
/// experiment's manifest.
#[derive(Debug, Clone)]
pub struct ReproduceOptions {
    pub seed: u64,
    pub runs: usize,
    pub iters: usize,
    pub out_dir: PathBuf,
}

impl ReproduceOptions {
    pub fn new(out_dir: PathBuf) -> Self {
        Self {
            seed: 7,
            runs: 10,
            iters: 2000,
            out_dir,
        }
    }
}

const BENCH_DIRECTION_COUNTS: [usize; 4] = [1, 10, 20, 30];
const BENCH_DIM: usize = 30;
const BENCH_EIGEN_MEAN: f64 = 5.0;
const BENCH_ETA: f64 = 0.005;
const BENCH_X0_RADIUS: f64 = 10.0;

fn bench_config(p: f64, optimizer: OptimizerSpec, opts: &ReproduceOptions) -> ExperimentConfig {
    ExperimentConfig {
        objective: ObjectiveSpec::PowerQuadratic {
            n: BENCH_DIM,
            p,
            eigen_mean: Some(BENCH_EIGEN_MEAN),
            q_scale: None,
        },
        optimizer,
        runs: opts.runs,
        base_seed: opts.seed,
        x0: X0Policy::RandomSphere {
            radius: BENCH_X0_RADIUS,
        },
        record_every: 1,
    }
}

fn bench_suite(p: f64, opts: &ReproduceOptions) -> Vec<(String, ExperimentConfig)> {
    let mut suite = Vec::new();
    for k in BENCH_DIRECTION_COUNTS {
        let spec = OptimizerSpec::Szgd {
            k,
            eta: BENCH_ETA,
            iters: opts.iters,
            delta0: 0.1,
            delta_floor: 1e-5,
        };
        suite.push((format!("szgd_k{k}"), bench_config(p, spec, opts)));
    }
    suite.push((
        "gd".to_string(),
        bench_config(
            p,
            OptimizerSpec::Gd {
                eta: BENCH_ETA,
                iters: opts.iters,
            },
            opts,
        ),
    ));
    suite
}

/// Run a full reproduction pipeline; returns the paths of emitted SVGs.
pub fn reproduce(fig: Figure, opts: &ReproduceOptions) -> Result<Vec<PathBuf>> {
    use figure::{FigureKind, FigureSeries, XAxis};

    let render = |prefix: &str, p: f64, x_axis: XAxis| -> Result<Vec<PathBuf>> {
        let mut labeled = Vec::new();
        for (name, cfg) in bench_suite(p, opts) {
            let dir = opts.out_dir.join(format!("{prefix}_{name}"));
            let result = run_experiment(&cfg, &dir)?;
            labeled.push((cfg.optimizer.label(), result.stats));
        }
        let mut written = Vec::new();
        for (kind, suffix) in [(FigureKind::Distance, "distance"), (FigureKind::FValue, "fvalue")] {
            let series: Vec<FigureSeries> = labeled
                .iter()
                .map(|(label, stats)| FigureSeries::from_stats(label.clone(), stats, kind, x_axis))
                .collect::<Result<_>>()?;
            let axis_tag = match x_axis {
                XAxis::Iterations => "",
                XAxis::Evaluations => "_evals",
            };
            let svg = figure::emit_figure(&series)?;
            let path = opts.out_dir.join(format!("{prefix}_{suffix}{axis_tag}.svg"));
            fs::write(&path, svg)?;
            written.push(path);
        }
        Ok(written)
    };

    fs::create_dir_all(&opts.out_dir)?;
    match fig {
        Figure::F1 => render("f1", 0.75, figure::XAxis::Iterations),
        Figure::F2 => render("f2", 0.25, figure::XAxis::Iterations),
        Figure::Sample => {
            let mut paths = render("f1", 0.75, figure::XAxis::Evaluations)?;
            paths.extend(render("f2", 0.25, figure::XAxis::Evaluations)?);
            Ok(paths)
        }
    }
}
