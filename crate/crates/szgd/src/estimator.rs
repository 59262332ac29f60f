//! The k-direction central-difference gradient estimator.
//!
//! Given a frame `V = [v1, ..., vk]` on `St(n, k)` and a granularity
//! `delta`, the estimate at `x` is
//!
//! ```text
//! n / (2 delta k) * sum_i ( f(x + delta v_i) - f(x - delta v_i) ) v_i
//! ```
//!
//! costing exactly `2k` function evaluations. All randomness lives in the
//! frame: with a pre-sampled frame the estimator is deterministic, which is
//! what the tests rely on; [`estimate_gradient_sampled`] is sugar that draws
//! the frame internally.
//!
//! Closed-form bounds on the estimator's bias and variance are provided as
//! plain functions ([`bias_bound_smooth`], [`bias_bound_fourth`],
//! [`variance_bound_smooth`], [`variance_bound_fine`]), and
//! [`empirical_bias_variance`] is the Monte Carlo validator that checks them
//! on concrete objectives.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::exec;
use crate::objectives::Objective;
use crate::rng::RngStream;
use crate::stiefel::{sample_stiefel, StiefelFrame};

/// Estimator parameters: direction count and granularity schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorConfig {
    /// Number of orthonormal directions per estimate.
    pub k: usize,
    /// Initial granularity `delta_0`.
    pub delta0: f64,
    /// Lower clamp on the granularity, guarding against catastrophic
    /// cancellation once `delta_0 / 2^t` underflows the noise floor.
    pub delta_floor: f64,
}

impl EstimatorConfig {
    /// Schedule starting at `delta_0 = 1` with the usual `1e-5` floor.
    ///
    /// # Panics
    /// Panics unless `k >= 1`.
    pub fn new(k: usize) -> Self {
        Self::with_schedule(k, 1.0, 1e-5)
    }

    /// Schedule starting at `delta_0 = 0.1`, as in the benchmark runs.
    pub fn benchmark(k: usize) -> Self {
        Self::with_schedule(k, 0.1, 1e-5)
    }

    /// # Panics
    /// Panics unless `k >= 1` and `0 < delta_floor <= delta0 <= 1`.
    pub fn with_schedule(k: usize, delta0: f64, delta_floor: f64) -> Self {
        assert!(k >= 1, "k must be >= 1");
        assert!(
            delta_floor > 0.0 && delta_floor <= delta0 && delta0 <= 1.0,
            "need 0 < delta_floor <= delta0 <= 1, got delta0 = {delta0}, floor = {delta_floor}"
        );
        Self {
            k,
            delta0,
            delta_floor,
        }
    }
}

/// Granularity at iteration `t`: `max(delta0 * 2^-t, delta_floor)`.
pub fn delta_schedule(t: usize, cfg: &EstimatorConfig) -> f64 {
    let halved = cfg.delta0 * 0.5f64.powi(t.min(i32::MAX as usize) as i32);
    halved.max(cfg.delta_floor)
}

/// One gradient estimate together with its cost accounting.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientEstimate {
    pub vector: DVector<f64>,
    pub delta_used: f64,
    pub k_used: usize,
    /// Objective evaluations spent; always `2 * k_used`.
    pub evals_used: u64,
}

/// Central-difference estimate along the columns of `frame`.
///
/// Exactly `2k` evaluations of `f`; deterministic given the frame. A
/// non-finite probe aborts with the offending point, since one bad probe
/// poisons the whole sum.
pub fn estimate_gradient(
    f: &dyn Objective,
    x: &DVector<f64>,
    delta: f64,
    frame: &StiefelFrame,
) -> Result<GradientEstimate> {
    if !delta.is_finite() || delta <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "granularity must be positive and finite, got {delta}"
        )));
    }
    let n = f.dim();
    if x.len() != n || frame.n() != n {
        return Err(Error::DimensionMismatch(format!(
            "objective dim {n}, point dim {}, frame dim {}",
            x.len(),
            frame.n()
        )));
    }
    let k = frame.k();
    let mut acc = DVector::zeros(n);
    for i in 0..k {
        let v = frame.column(i);
        let plus = x + &v * delta;
        let minus = x - &v * delta;
        let f_plus = probe(f, plus)?;
        let f_minus = probe(f, minus)?;
        acc += v * (f_plus - f_minus);
    }
    let scale = n as f64 / (2.0 * delta * k as f64);
    Ok(GradientEstimate {
        vector: acc * scale,
        delta_used: delta,
        k_used: k,
        evals_used: 2 * k as u64,
    })
}

/// Convenience overload sampling the frame internally from `stream`.
pub fn estimate_gradient_sampled(
    f: &dyn Objective,
    x: &DVector<f64>,
    delta: f64,
    k: usize,
    stream: &RngStream,
) -> Result<GradientEstimate> {
    let frame = sample_stiefel(f.dim(), k, stream)?;
    estimate_gradient(f, x, delta, &frame)
}

fn probe(f: &dyn Objective, point: DVector<f64>) -> Result<f64> {
    let value = f.eval(&point);
    if !value.is_finite() {
        return Err(Error::NonFiniteProbe {
            point: point.iter().copied().collect(),
            value,
        });
    }
    Ok(value)
}

/// Bias bound for L-smooth objectives: `L n delta / (n + 1)`.
pub fn bias_bound_smooth(l: f64, n: usize, delta: f64) -> f64 {
    l * n as f64 * delta / (n as f64 + 1.0)
}

/// Refined bias bound under fourth-order smoothness:
/// `delta^2 / (2n) * sqrt(sum_i (sum_j F_jji)^2) + delta^3 L4 n / 24`,
/// where `F` is the third derivative tensor and the caller supplies its
/// contracted norm.
pub fn bias_bound_fourth(third_tensor_trace_norm: f64, l4: f64, n: usize, delta: f64) -> f64 {
    delta * delta / (2.0 * n as f64) * third_tensor_trace_norm
        + delta.powi(3) * l4 * n as f64 / 24.0
}

/// Variance bound for L-smooth objectives:
/// `(n/k - 1) g^2 + (4 L delta / sqrt 3)(n^2/k - n) g + 4 L^2 n^2 delta^2 / (3k)`
/// with `g = |grad f(x)|`.
pub fn variance_bound_smooth(l: f64, n: usize, k: usize, delta: f64, grad_norm: f64) -> f64 {
    let n = n as f64;
    let k = k as f64;
    (n / k - 1.0) * grad_norm * grad_norm
        + 4.0 * l * delta / 3.0f64.sqrt() * (n * n / k - n) * grad_norm
        + 4.0 * l * l * n * n * delta * delta / (3.0 * k)
}

/// Variance bound under third-order smoothness:
/// `(n/k - 1) g^2 + (L3 delta^2 / 3)(n^2/k - n) g + L3^2 n^2 delta^4 / (36k)`.
pub fn variance_bound_fine(l3: f64, n: usize, k: usize, delta: f64, grad_norm: f64) -> f64 {
    let n = n as f64;
    let k = k as f64;
    (n / k - 1.0) * grad_norm * grad_norm
        + l3 * delta * delta / 3.0 * (n * n / k - n) * grad_norm
        + l3 * l3 * n * n * delta.powi(4) / (36.0 * k)
}

/// Monte Carlo estimate of the estimator's bias and variance at `x`.
#[derive(Debug, Clone)]
pub struct BiasVariance {
    /// Mean estimate minus the analytic gradient.
    pub bias: DVector<f64>,
    /// Per-coordinate standard error of the mean estimate.
    pub bias_se: DVector<f64>,
    /// `E |est - E est|^2`, with the `trials/(trials-1)` correction.
    pub variance: f64,
    /// Batch-based standard error of `variance`.
    pub variance_se: f64,
    pub trials: usize,
}

impl BiasVariance {
    pub fn bias_norm(&self) -> f64 {
        self.bias.norm()
    }

    /// Standard error of the bias norm: `sqrt(sum_i se_i^2)`, the RMS size
    /// of the noise vector in the mean.
    pub fn bias_norm_se(&self) -> f64 {
        self.bias_se.norm()
    }
}

/// Run `trials` independent estimates at `x` (one fresh frame each, one
/// substream per trial) and summarize bias and variance.
///
/// Trials execute in parallel; the reduction is sequential over the
/// index-ordered results, so the output is identical either way.
pub fn empirical_bias_variance(
    f: &dyn Objective,
    x: &DVector<f64>,
    delta: f64,
    k: usize,
    trials: usize,
    stream: &RngStream,
) -> Result<BiasVariance> {
    if trials < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 trials, got {trials}"
        )));
    }
    let analytic = f.grad(x)?;
    let n = f.dim();

    let estimates: Vec<DVector<f64>> = exec::map_indexed(trials, |trial| {
        estimate_gradient_sampled(f, x, delta, k, &stream.substream(trial as u64))
            .map(|e| e.vector)
    })
    .into_iter()
    .collect::<Result<_>>()?;

    let mut mean = DVector::zeros(n);
    for est in &estimates {
        mean += est;
    }
    mean /= trials as f64;

    let mut coord_sq = DVector::<f64>::zeros(n);
    let mut sq_devs = Vec::with_capacity(trials);
    for v in &estimates {
        let dev = v - &mean;
        sq_devs.push(dev.norm_squared());
        for i in 0..n {
            coord_sq[i] += dev[i] * dev[i];
        }
    }

    let t = trials as f64;
    let variance = sq_devs.iter().sum::<f64>() / (t - 1.0);
    let bias_se = coord_sq.map(|s| (s / (t - 1.0) / t).sqrt());

    // Batch the per-trial squared deviations to get a standard error for
    // the variance estimate.
    let batches = if trials >= 1000 { 100 } else { 10.min(trials) };
    let per_batch = trials / batches;
    let mut batch_means = Vec::with_capacity(batches);
    for b in 0..batches {
        let lo = b * per_batch;
        let hi = if b + 1 == batches { trials } else { lo + per_batch };
        let m = sq_devs[lo..hi].iter().sum::<f64>() / (hi - lo) as f64;
        batch_means.push(m);
    }
    let bm = batch_means.iter().sum::<f64>() / batches as f64;
    let bvar = batch_means.iter().map(|m| (m - bm) * (m - bm)).sum::<f64>()
        / (batches as f64 - 1.0).max(1.0);
    let variance_se = (bvar / batches as f64).sqrt();

    Ok(BiasVariance {
        bias: mean - analytic,
        bias_se,
        variance,
        variance_se,
        trials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objectives::{Constant, CountingObjective, Linear, PowerQuadratic, QuadraticForm};
    use approx::assert_relative_eq;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn stream(seed: u64) -> RngStream {
        RngStream::new(seed, 0)
    }

    fn random_vec(n: usize, seed: u64) -> DVector<f64> {
        let mut rng = stream(seed).rng();
        DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal))
    }

    #[test]
    fn schedule_examples() {
        let bench = EstimatorConfig::benchmark(10);
        assert_eq!(delta_schedule(0, &bench), 0.1);
        assert_eq!(delta_schedule(20, &bench), 1e-5);
        let paper = EstimatorConfig::new(10);
        assert_eq!(delta_schedule(3, &paper), 0.125);
    }

    #[test]
    #[should_panic(expected = "delta_floor")]
    fn schedule_rejects_inverted_bounds() {
        EstimatorConfig::with_schedule(1, 0.1, 0.2);
    }

    #[test]
    fn constant_objective_gives_exact_zero() {
        let f = Constant::new(6, 7.0);
        let frame = sample_stiefel(6, 3, &stream(5)).unwrap();
        let est = estimate_gradient(&f, &random_vec(6, 6), 0.3, &frame).unwrap();
        assert!(est.vector.iter().all(|v| *v == 0.0));
        assert_eq!(est.evals_used, 6);
    }

    #[test]
    fn linear_objective_full_frame_is_exact() {
        let g = random_vec(8, 9);
        let f = Linear::new(g.clone());
        let frame = sample_stiefel(8, 8, &stream(10)).unwrap();
        let est = estimate_gradient(&f, &random_vec(8, 11), 0.05, &frame).unwrap();
        assert!(
            (est.vector - &g).amax() <= 1e-10,
            "full-frame estimate should reproduce the gradient"
        );
    }

    #[test]
    fn quadratic_matches_closed_form() {
        // For f = |x|^2 the central difference is exactly linear in the
        // frame, so the estimate equals (2n/k) V V^T x.
        let n = 7;
        let k = 3;
        let f = PowerQuadratic::new(QuadraticForm::identity(n), 1.0).unwrap();
        let x = random_vec(n, 12);
        let frame = sample_stiefel(n, k, &stream(13)).unwrap();
        let est = estimate_gradient(&f, &x, 0.01, &frame).unwrap();
        let v = frame.columns();
        let closed = v * (v.transpose() * &x) * (2.0 * n as f64 / k as f64);
        assert!((est.vector - closed).amax() <= 1e-9);
    }

    #[test]
    fn estimator_is_linear_in_the_objective() {
        // With a shared frame, est(a f + b g) = a est(f) + b est(g).
        struct Combo {
            f: PowerQuadratic,
            g: Linear,
            a: f64,
            b: f64,
        }
        impl Objective for Combo {
            fn name(&self) -> &str {
                "combo"
            }
            fn dim(&self) -> usize {
                self.f.dim()
            }
            fn eval(&self, x: &DVector<f64>) -> f64 {
                self.a * self.f.eval(x) + self.b * self.g.eval(x)
            }
        }

        let n = 5;
        let f = PowerQuadratic::new(QuadraticForm::identity(n), 1.0).unwrap();
        let g = Linear::new(random_vec(n, 20));
        let combo = Combo {
            f: f.clone(),
            g: g.clone(),
            a: 2.5,
            b: -1.25,
        };
        let x = random_vec(n, 21);
        let frame = sample_stiefel(n, 2, &stream(22)).unwrap();
        let delta = 0.07;
        let ef = estimate_gradient(&f, &x, delta, &frame).unwrap().vector;
        let eg = estimate_gradient(&g, &x, delta, &frame).unwrap().vector;
        let ec = estimate_gradient(&combo, &x, delta, &frame).unwrap().vector;
        assert!((ec - (ef * 2.5 + eg * -1.25)).amax() <= 1e-10);
    }

    #[test]
    fn estimate_is_invariant_to_column_signs() {
        // Each summand is even in v_i.
        let n = 6;
        let f = PowerQuadratic::new(QuadraticForm::identity(n), 0.75).unwrap();
        let x = random_vec(n, 30) * 2.0;
        let frame = sample_stiefel(n, 4, &stream(31)).unwrap();
        let mut flipped = frame.columns().clone();
        for i in 0..n {
            flipped[(i, 1)] = -flipped[(i, 1)];
            flipped[(i, 3)] = -flipped[(i, 3)];
        }
        let flipped = StiefelFrame::new(flipped).unwrap();
        let a = estimate_gradient(&f, &x, 0.02, &frame).unwrap().vector;
        let b = estimate_gradient(&f, &x, 0.02, &flipped).unwrap().vector;
        assert!((a - b).amax() <= 1e-12);
    }

    #[test]
    fn evaluation_budget_is_2k() {
        let f = PowerQuadratic::new(QuadraticForm::identity(4), 1.0).unwrap();
        let counted = CountingObjective::new(&f);
        let frame = sample_stiefel(4, 3, &stream(40)).unwrap();
        estimate_gradient(&counted, &random_vec(4, 41), 0.1, &frame).unwrap();
        assert_eq!(counted.count(), 6);
    }

    #[test]
    fn non_finite_probe_is_an_error() {
        struct Blows;
        impl Objective for Blows {
            fn name(&self) -> &str {
                "blows"
            }
            fn dim(&self) -> usize {
                2
            }
            fn eval(&self, x: &DVector<f64>) -> f64 {
                1.0 / (x[0] - x[0]) * x[1].signum()
            }
        }
        let frame = sample_stiefel(2, 1, &stream(50)).unwrap();
        let err = estimate_gradient(&Blows, &DVector::zeros(2), 0.1, &frame).unwrap_err();
        assert!(matches!(err, Error::NonFiniteProbe { .. }), "{err}");
    }

    #[test]
    fn bias_bound_values() {
        assert_relative_eq!(bias_bound_smooth(2.0, 30, 0.1), 6.0 / 31.0, max_relative = 1e-15);
        assert_eq!(bias_bound_smooth(2.0, 30, 0.0), 0.0);
        assert_relative_eq!(bias_bound_smooth(1.0, 1, 1.0), 0.5, max_relative = 1e-15);

        assert_eq!(bias_bound_fourth(0.0, 0.0, 9, 0.3), 0.0);
        // trace norm 2n makes the first term collapse to delta^2.
        assert_relative_eq!(bias_bound_fourth(2.0 * 12.0, 0.0, 12, 0.1), 0.01, max_relative = 1e-15);
    }

    #[test]
    fn variance_bound_values() {
        let full_frame = variance_bound_smooth(2.0, 30, 30, 0.1, 5.0);
        assert_relative_eq!(full_frame, 4.0 * 4.0 * 30.0 * 0.01 / 3.0, max_relative = 1e-12);
        assert_relative_eq!(
            variance_bound_smooth(2.0, 30, 10, 0.01, 1.0),
            4.81928,
            max_relative = 1e-5
        );
        assert_relative_eq!(variance_bound_smooth(1.0, 3, 1, 0.0, 1.0), 2.0, max_relative = 1e-15);

        assert_relative_eq!(
            variance_bound_fine(0.0, 12, 4, 0.3, 1.5),
            (3.0 - 1.0) * 2.25,
            max_relative = 1e-15
        );
        assert_eq!(variance_bound_fine(0.0, 12, 12, 0.3, 1.5), 0.0);
        assert_relative_eq!(variance_bound_fine(6.0, 4, 2, 0.5, 2.0), 8.5, max_relative = 1e-12);
    }

    #[test]
    fn constant_objective_has_zero_bias_and_variance() {
        let f = Constant::new(4, 3.0);
        let bv = empirical_bias_variance(&f, &random_vec(4, 60), 0.1, 2, 100, &stream(61)).unwrap();
        assert_eq!(bv.bias_norm(), 0.0);
        assert_eq!(bv.variance, 0.0);
    }

    #[test]
    fn linear_full_frame_is_deterministic() {
        let g = random_vec(5, 62);
        let f = Linear::new(g);
        let bv = empirical_bias_variance(&f, &random_vec(5, 63), 0.1, 5, 200, &stream(64)).unwrap();
        assert!(bv.bias_norm() <= 1e-12, "bias {}", bv.bias_norm());
        assert!(bv.variance <= 1e-18, "variance {}", bv.variance);
    }

    #[test]
    fn quadratic_bias_and_variance_within_bounds() {
        // |x|^2 has zero third derivative, so the refined bias bound forces
        // zero bias; the variance must respect the L-smooth bound.
        let n = 5;
        let f = PowerQuadratic::new(QuadraticForm::identity(n), 1.0).unwrap();
        let mut x = DVector::zeros(n);
        x[0] = 1.0;
        let delta = 0.01;
        let k = 5;
        let bv = empirical_bias_variance(&f, &x, delta, k, 20_000, &stream(65)).unwrap();
        assert!(
            bv.bias_norm() <= 3.0 * bv.bias_norm_se(),
            "bias {} vs 3 SE {}",
            bv.bias_norm(),
            3.0 * bv.bias_norm_se()
        );
        let bound = variance_bound_smooth(2.0, n, k, delta, 2.0);
        assert!(
            bv.variance <= bound + 3.0 * bv.variance_se,
            "variance {} vs bound {}",
            bv.variance,
            bound
        );
    }

    #[test]
    fn bias_variance_requires_gradient_oracle() {
        struct NoGrad;
        impl Objective for NoGrad {
            fn name(&self) -> &str {
                "nograd"
            }
            fn dim(&self) -> usize {
                2
            }
            fn eval(&self, x: &DVector<f64>) -> f64 {
                x.norm()
            }
        }
        let err =
            empirical_bias_variance(&NoGrad, &DVector::zeros(2), 0.1, 1, 10, &stream(66)).unwrap_err();
        assert!(matches!(err, Error::Unsupported { .. }));
    }

    #[test]
    fn sampled_overload_matches_explicit_frame() {
        let n = 6;
        let f = PowerQuadratic::new(QuadraticForm::identity(n), 1.0).unwrap();
        let x = random_vec(n, 70);
        let s = stream(71);
        let a = estimate_gradient_sampled(&f, &x, 0.05, 3, &s).unwrap();
        let frame = sample_stiefel(n, 3, &s).unwrap();
        let b = estimate_gradient(&f, &x, 0.05, &frame).unwrap();
        assert_eq!(a.vector, b.vector);
    }

    #[test]
    fn frame_injection_rejects_mismatched_dims() {
        let f = PowerQuadratic::new(QuadraticForm::identity(4), 1.0).unwrap();
        let frame = sample_stiefel(5, 2, &stream(80)).unwrap();
        assert!(estimate_gradient(&f, &DVector::zeros(4), 0.1, &frame).is_err());
        let frame = sample_stiefel(4, 2, &stream(80)).unwrap();
        assert!(estimate_gradient(&f, &DVector::zeros(4), 0.0, &frame).is_err());
    }
}
