//! The three iteration schemes: SZGD, gradient descent, and the proximal
//! algorithm.
//!
//! SZGD descends along the Stiefel-frame gradient estimate with a constant
//! step size and a halving granularity schedule:
//!
//! ```text
//! x_{t+1} = x_t - eta * grad_est_{delta_t}(x_t),    delta_{t+1} = delta_t / 2
//! ```
//!
//! Gradient descent replaces the estimate by the analytic gradient. The
//! proximal algorithm takes implicit steps
//! `x_{t+1} = argmin_z f(z) + |z - x_t|^2 / (2 eta)`, solved exactly for
//! Euclidean-radial objectives via a 1-d reduction.
//!
//! Every run records a [`Trajectory`]: the dense scalar series (function
//! values, step norms, granularities) that rate analysis needs, thinned
//! iterates, and cost accounting. Runs are strictly sequential internally;
//! independent runs parallelize at the harness level with distinct
//! [`RngStream`]s.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::estimator::{delta_schedule, estimate_gradient, EstimatorConfig};
use crate::objectives::{Objective, RadialProfile};
use crate::rng::RngStream;
use crate::stiefel::sample_stiefel_with;

/// Default radius guard on iterates; beyond it a run is labeled diverged.
pub const DEFAULT_DIVERGENCE_RADIUS: f64 = 1e6;

/// Configuration shared by [`run_szgd`] and [`run_gd`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimConfig {
    /// Constant step size.
    pub eta: f64,
    /// Number of iterations `T`.
    pub max_iters: usize,
    /// Thinning stride for stored iterates; scalar series stay dense.
    pub record_every: usize,
    /// Iterate-norm guard; boundedness is monitored, not assumed.
    pub divergence_radius: f64,
    /// Estimator parameters (SZGD only).
    pub estimator: Option<EstimatorConfig>,
    /// Randomness identity (SZGD only).
    pub rng: Option<RngStream>,
}

impl OptimConfig {
    /// # Panics
    /// Panics unless `eta > 0` and `max_iters >= 1`.
    pub fn gd(eta: f64, max_iters: usize) -> Self {
        assert!(eta > 0.0 && max_iters >= 1, "need eta > 0 and T >= 1");
        Self {
            eta,
            max_iters,
            record_every: 1,
            divergence_radius: DEFAULT_DIVERGENCE_RADIUS,
            estimator: None,
            rng: None,
        }
    }

    /// # Panics
    /// Panics unless `eta > 0` and `max_iters >= 1`.
    pub fn szgd(eta: f64, max_iters: usize, estimator: EstimatorConfig, rng: RngStream) -> Self {
        let mut cfg = Self::gd(eta, max_iters);
        cfg.estimator = Some(estimator);
        cfg.rng = Some(rng);
        cfg
    }

    /// # Panics
    /// Panics unless `record_every >= 1`.
    pub fn with_record_every(mut self, record_every: usize) -> Self {
        assert!(record_every >= 1, "record_every must be >= 1");
        self.record_every = record_every;
        self
    }

    pub fn with_divergence_radius(mut self, radius: f64) -> Self {
        self.divergence_radius = radius;
        self
    }

    /// Advisory step-size check against the stability ranges
    /// `eta in (0, 2k/(Ln))` for SZGD and `eta in (0, 2/L)` for gradient
    /// descent. Returns a warning message instead of failing: the ranges
    /// need a global smoothness constant the objective may not have.
    pub fn step_size_advisory(&self, f: &dyn Objective) -> Option<String> {
        let l = f.smooth_l()?;
        if l == 0.0 {
            return None;
        }
        let n = f.dim() as f64;
        match self.estimator {
            Some(est) => {
                let limit = 2.0 * est.k as f64 / (l * n);
                (self.eta >= limit).then(|| {
                    format!(
                        "step size {} outside (0, 2k/(Ln)) = (0, {limit:.6}) for {}",
                        self.eta,
                        f.name()
                    )
                })
            }
            None => {
                let limit = 2.0 / l;
                (self.eta >= limit).then(|| {
                    format!(
                        "step size {} outside (0, 2/L) = (0, {limit:.6}) for {}",
                        self.eta,
                        f.name()
                    )
                })
            }
        }
    }
}

/// How a run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Completed,
    /// Iterate norm exceeded the divergence guard after step `at`.
    Diverged { at: usize },
    /// A probe or iterate went non-finite attempting step `at`; the
    /// trajectory holds the last finite state.
    NonFinite { at: usize },
    /// The gradient oracle was undefined at the iterate of step `at`.
    GradientUndefined { at: usize },
}

impl RunStatus {
    pub fn is_completed(&self) -> bool {
        matches!(self, RunStatus::Completed)
    }

    pub fn label(&self) -> String {
        match self {
            RunStatus::Completed => "completed".into(),
            RunStatus::Diverged { at } => format!("diverged_at_{at}"),
            RunStatus::NonFinite { at } => format!("non_finite_at_{at}"),
            RunStatus::GradientUndefined { at } => format!("gradient_undefined_at_{at}"),
        }
    }
}

/// Full record of one optimizer run.
///
/// Scalar series are dense (one entry per executed step); iterates are
/// thinned by `record_every` but always include the first and last state.
#[derive(Debug, Clone)]
pub struct Trajectory {
    /// `f(x_t)` for `t = 0..=steps`.
    pub f_values: Vec<f64>,
    /// Granularity used at each step (SZGD only, empty otherwise).
    pub deltas: Vec<f64>,
    /// `|x_{t+1} - x_t|^2` per step.
    pub step_sq_norms: Vec<f64>,
    /// Implied subgradient norms per step (proximal only).
    pub subgrad_norms: Vec<f64>,
    /// Inner-solver evaluations per step (proximal only).
    pub inner_evals: Vec<u64>,
    /// `(t, x_t)` at recorded indices.
    pub iterates: Vec<(usize, DVector<f64>)>,
    /// Dense `|x_t - x*|` when the objective knows its minimizer.
    pub dist_to_limit: Option<Vec<f64>>,
    /// Zeroth-order objective evaluations consumed by the algorithm:
    /// `2kT` for SZGD, inner-solver total for proximal, 0 for GD.
    pub fn_evals: u64,
    /// Gradient-oracle calls (GD only).
    pub grad_evals: u64,
    pub status: RunStatus,
    pub eta: f64,
    pub record_every: usize,
    pub estimator: Option<EstimatorConfig>,
    pub rng: Option<RngStream>,
}

impl Trajectory {
    /// Number of executed steps; `f_values` has one more entry.
    pub fn steps(&self) -> usize {
        self.f_values.len() - 1
    }

    pub fn final_f(&self) -> f64 {
        *self.f_values.last().expect("trajectory is never empty")
    }

    pub fn final_x(&self) -> &DVector<f64> {
        &self.iterates.last().expect("trajectory is never empty").1
    }

    /// Cumulative oracle cost at each `t`, for evaluation-indexed plots:
    /// `2kt` for SZGD, running inner-solver totals for proximal, and the
    /// gradient-call count `t` for GD.
    pub fn cumulative_evals(&self) -> Vec<u64> {
        let steps = self.steps();
        if let Some(est) = self.estimator {
            return (0..=steps).map(|t| 2 * est.k as u64 * t as u64).collect();
        }
        if self.inner_evals.len() == steps && steps > 0 {
            let mut out = Vec::with_capacity(steps + 1);
            let mut acc = 0;
            out.push(acc);
            for e in &self.inner_evals {
                acc += e;
                out.push(acc);
            }
            return out;
        }
        (0..=steps).map(|t| t as u64).collect()
    }
}

/// Incremental trajectory recorder shared by the run loops.
struct Recorder {
    traj: Trajectory,
    x: DVector<f64>,
    dist_center: Option<DVector<f64>>,
}

impl Recorder {
    fn new(f: &dyn Objective, x0: DVector<f64>, cfg: &OptimConfig) -> Result<Self> {
        if x0.len() != f.dim() {
            return Err(Error::DimensionMismatch(format!(
                "objective dim {} but x0 dim {}",
                f.dim(),
                x0.len()
            )));
        }
        let f0 = f.eval(&x0);
        if !f0.is_finite() {
            return Err(Error::NonFiniteProbe {
                point: x0.iter().copied().collect(),
                value: f0,
            });
        }
        let dist_center = f.minimizer();
        let dist_to_limit = dist_center.as_ref().map(|c| vec![(&x0 - c).norm()]);
        let traj = Trajectory {
            f_values: vec![f0],
            deltas: Vec::new(),
            step_sq_norms: Vec::new(),
            subgrad_norms: Vec::new(),
            inner_evals: Vec::new(),
            iterates: vec![(0, x0.clone())],
            dist_to_limit,
            fn_evals: 0,
            grad_evals: 0,
            status: RunStatus::Completed,
            eta: cfg.eta,
            record_every: cfg.record_every,
            estimator: cfg.estimator,
            rng: cfg.rng,
        };
        Ok(Self {
            traj,
            x: x0,
            dist_center,
        })
    }

    fn x(&self) -> &DVector<f64> {
        &self.x
    }

    fn step(&mut self, t: usize, x_next: DVector<f64>, f_next: f64) {
        self.traj
            .step_sq_norms
            .push((&x_next - &self.x).norm_squared());
        self.traj.f_values.push(f_next);
        if let (Some(c), Some(d)) = (&self.dist_center, self.traj.dist_to_limit.as_mut()) {
            d.push((&x_next - c).norm());
        }
        self.x = x_next;
        if (t + 1).is_multiple_of(self.traj.record_every) {
            self.traj.iterates.push((t + 1, self.x.clone()));
        }
    }

    fn finish(mut self, status: RunStatus) -> Trajectory {
        let last_t = self.traj.steps();
        if self.traj.iterates.last().map(|(t, _)| *t) != Some(last_t) {
            self.traj.iterates.push((last_t, self.x.clone()));
        }
        self.traj.status = status;
        self.traj
    }
}

/// Run SZGD: a fresh Haar frame per iteration from the run's stream, the
/// halving-with-floor granularity schedule, and never a gradient call.
pub fn run_szgd(f: &dyn Objective, x0: &DVector<f64>, cfg: &OptimConfig) -> Result<Trajectory> {
    let est_cfg = cfg
        .estimator
        .ok_or_else(|| Error::InvalidArgument("run_szgd needs cfg.estimator".into()))?;
    let stream = cfg
        .rng
        .ok_or_else(|| Error::InvalidArgument("run_szgd needs cfg.rng".into()))?;
    let n = f.dim();
    if est_cfg.k > n {
        return Err(Error::InvalidArgument(format!(
            "estimator k = {} exceeds dimension {n}",
            est_cfg.k
        )));
    }

    let mut rec = Recorder::new(f, x0.clone(), cfg)?;
    let mut rng = stream.rng();
    let mut status = RunStatus::Completed;

    for t in 0..cfg.max_iters {
        let delta = delta_schedule(t, &est_cfg);
        let frame = sample_stiefel_with(n, est_cfg.k, &mut rng)?;
        let estimate = match estimate_gradient(f, rec.x(), delta, &frame) {
            Ok(e) => e,
            Err(Error::NonFiniteProbe { .. }) => {
                status = RunStatus::NonFinite { at: t };
                break;
            }
            Err(e) => return Err(e),
        };
        rec.traj.fn_evals += estimate.evals_used;

        let x_next = rec.x() - estimate.vector * cfg.eta;
        let f_next = f.eval(&x_next);
        if !x_next.iter().all(|v| v.is_finite()) || !f_next.is_finite() {
            status = RunStatus::NonFinite { at: t };
            break;
        }
        rec.traj.deltas.push(delta);
        rec.step(t, x_next, f_next);
        if rec.x().norm() > cfg.divergence_radius {
            status = RunStatus::Diverged { at: t };
            break;
        }
    }
    Ok(rec.finish(status))
}

/// Run gradient descent with a constant step size.
pub fn run_gd(f: &dyn Objective, x0: &DVector<f64>, cfg: &OptimConfig) -> Result<Trajectory> {
    let mut rec = Recorder::new(f, x0.clone(), cfg)?;
    let mut status = RunStatus::Completed;

    for t in 0..cfg.max_iters {
        let grad = match f.grad(rec.x()) {
            Ok(g) => g,
            Err(Error::GradientUndefined { .. }) => {
                status = RunStatus::GradientUndefined { at: t };
                break;
            }
            Err(e) => return Err(e),
        };
        rec.traj.grad_evals += 1;

        let x_next = rec.x() - grad * cfg.eta;
        let f_next = f.eval(&x_next);
        if !x_next.iter().all(|v| v.is_finite()) || !f_next.is_finite() {
            status = RunStatus::NonFinite { at: t };
            break;
        }
        rec.step(t, x_next, f_next);
        if rec.x().norm() > cfg.divergence_radius {
            status = RunStatus::Diverged { at: t };
            break;
        }
    }
    Ok(rec.finish(status))
}

/// Proximal step parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProxConfig {
    /// Proximal step size.
    pub eta: f64,
    /// Tolerance for the inner scalar solve and the decrease certificate.
    pub inner_tol: f64,
    /// Iteration cap for the inner solve.
    pub inner_max_iters: usize,
}

impl ProxConfig {
    /// # Panics
    /// Panics unless `eta > 0`.
    pub fn new(eta: f64) -> Self {
        assert!(eta > 0.0, "eta must be positive");
        Self {
            eta,
            inner_tol: 1e-12,
            inner_max_iters: 200,
        }
    }
}

/// Result of one proximal step.
#[derive(Debug, Clone)]
pub struct ProxStep {
    pub next: DVector<f64>,
    /// `(x - x_next) / eta`, a subgradient of `f` at `x_next` by the
    /// optimality condition of the inner problem.
    pub implied_subgrad: DVector<f64>,
    pub value: f64,
    pub inner_evals: u64,
}

/// Exact proximal step `argmin_z f(z) + |z - x|^2 / (2 eta)` for
/// Euclidean-radial objectives.
///
/// The minimizer lies on the segment from the origin to `x`, so the problem
/// reduces to minimizing `phi(r) = h(r) + (r - s)^2 / (2 eta)` over
/// `r in [0, s]` with `s = |x|`. Solved in closed form for the linear and
/// quadratic profiles and by bisection-safeguarded Newton otherwise.
/// Every accepted step satisfies the decrease certificate
/// `f(x+) + |x+ - x|^2/(2 eta) <= f(x) + inner_tol`.
pub fn prox_step(f: &dyn Objective, x: &DVector<f64>, cfg: &ProxConfig) -> Result<ProxStep> {
    let profile = f.radial_profile().ok_or_else(|| Error::Unsupported {
        objective: f.name().to_string(),
        reason: "prox step needs a Euclidean-radial profile".into(),
    })?;
    if x.len() != f.dim() {
        return Err(Error::DimensionMismatch(format!(
            "objective dim {} but x dim {}",
            f.dim(),
            x.len()
        )));
    }
    let s = x.norm();
    let (r, inner_evals) = prox_radial_profile(&profile, s, cfg)?;
    let next = if s > 0.0 { x * (r / s) } else { x.clone() };
    let value = f.eval(&next);

    let certificate = value + (&next - x).norm_squared() / (2.0 * cfg.eta);
    let reference = f.eval(x);
    if certificate > reference + cfg.inner_tol {
        return Err(Error::ProxSolver(format!(
            "decrease certificate violated: {certificate} > {reference} + {}",
            cfg.inner_tol
        )));
    }

    Ok(ProxStep {
        implied_subgrad: (x - &next) / cfg.eta,
        next,
        value,
        inner_evals,
    })
}

/// Minimize `phi(r) = c r^q + (r - s)^2 / (2 eta)` over `r in [0, s]`.
fn prox_radial_profile(profile: &RadialProfile, s: f64, cfg: &ProxConfig) -> Result<(f64, u64)> {
    let c = profile.coeff;
    let q = profile.exponent;
    let eta = cfg.eta;
    if s == 0.0 || c == 0.0 {
        return Ok((if c == 0.0 { s } else { 0.0 }, 0));
    }
    // Closed forms: soft threshold and quadratic shrinkage.
    if q == 1.0 {
        return Ok(((s - c * eta).max(0.0), 0));
    }
    if q == 2.0 {
        return Ok((s / (1.0 + 2.0 * c * eta), 0));
    }

    let phi = |r: f64| c * r.powf(q) + (r - s) * (r - s) / (2.0 * eta);
    let dphi = |r: f64| c * q * r.powf(q - 1.0) + (r - s) / eta;
    let d2phi = |r: f64| c * q * (q - 1.0) * r.powf(q - 2.0) + 1.0 / eta;

    if q > 1.0 {
        // phi is strictly convex: phi'(0) = -s/eta < 0 < phi'(s), one root.
        return newton_bisect(&dphi, &d2phi, 0.0, s, cfg);
    }

    // q < 1: phi' dips from +inf, reaching its minimum at r_hat. If the dip
    // never crosses zero the prox collapses to the origin; otherwise the
    // local minimum sits at the second root of phi' and competes with 0.
    let r_hat = (eta * c * q * (1.0 - q)).powf(1.0 / (2.0 - q));
    let mut evals = 2;
    if r_hat >= s || dphi(r_hat) >= 0.0 {
        return Ok((0.0, evals));
    }
    let (r_min, e) = newton_bisect(&dphi, &d2phi, r_hat, s, cfg)?;
    evals += e + 2;
    if phi(r_min) < phi(0.0) {
        Ok((r_min, evals))
    } else {
        Ok((0.0, evals))
    }
}

/// Root of `g` on `[lo, hi]` with a sign change, Newton iterations
/// safeguarded by bisection.
fn newton_bisect(
    g: &dyn Fn(f64) -> f64,
    dg: &dyn Fn(f64) -> f64,
    mut lo: f64,
    mut hi: f64,
    cfg: &ProxConfig,
) -> Result<(f64, u64)> {
    let mut g_lo = g(lo);
    let g_hi = g(hi);
    let mut evals = 2u64;
    if g_lo == 0.0 {
        return Ok((lo, evals));
    }
    if g_hi == 0.0 {
        return Ok((hi, evals));
    }
    if g_lo.signum() == g_hi.signum() {
        return Err(Error::ProxSolver(format!(
            "no sign change on bracket [{lo}, {hi}]: g = ({g_lo}, {g_hi})"
        )));
    }
    let scale = hi.abs().max(1.0);
    let mut r = 0.5 * (lo + hi);
    for _ in 0..cfg.inner_max_iters {
        let gr = g(r);
        evals += 1;
        if gr == 0.0 || hi - lo <= cfg.inner_tol * scale {
            return Ok((r, evals));
        }
        if gr.signum() == g_lo.signum() {
            lo = r;
            g_lo = gr;
        } else {
            hi = r;
        }
        // Newton candidate, falling back to the midpoint when it escapes.
        let slope = dg(r);
        evals += 1;
        let newton = r - gr / slope;
        r = if slope.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    Err(Error::ProxSolver(format!(
        "no convergence in {} iterations: bracket [{lo}, {hi}] width {}",
        cfg.inner_max_iters,
        hi - lo
    )))
}

/// Iterate [`prox_step`] `max_iters` times, recording f-values, step norms,
/// and implied subgradient norms.
pub fn run_proximal(
    f: &dyn Objective,
    x0: &DVector<f64>,
    max_iters: usize,
    cfg: &ProxConfig,
) -> Result<Trajectory> {
    if max_iters == 0 {
        return Err(Error::InvalidArgument("need max_iters >= 1".into()));
    }
    let shell = OptimConfig::gd(cfg.eta, max_iters);
    let mut rec = Recorder::new(f, x0.clone(), &shell)?;

    for t in 0..max_iters {
        let step = prox_step(f, rec.x(), cfg)?;
        rec.traj.fn_evals += step.inner_evals;
        rec.traj.inner_evals.push(step.inner_evals);
        rec.traj.subgrad_norms.push(step.implied_subgrad.norm());
        rec.step(t, step.next, step.value);
    }
    Ok(rec.finish(RunStatus::Completed))
}
