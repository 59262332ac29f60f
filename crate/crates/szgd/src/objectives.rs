//! Test objectives with analytic oracles and landscape metadata.
//!
//! The workhorse family is [`PowerQuadratic`]: `f(x) = (x^T Q x)^p` for a
//! positive semidefinite `Q`. It covers the benchmark functions
//! `F1 = (x^T Q x)^{3/4}` and `F2 = (x^T Q x)^{1/4}` over `R^30`, plain
//! quadratics (`p = 1`), the nonsmooth 1-d forms `|x|` (`p = 1/2`) and
//! `sqrt(|x|)` (`p = 1/4`), and the cubic-norm `p = 3/2` used in bias-bound
//! checks.
//!
//! For `p > 1/2` the family satisfies a Lojasiewicz inequality
//! `|f(x) - f(x*)|^theta <= kappa * |grad f(x)|` near the minimizer with
//! exponent `theta = 1 - 1/(2p)`; [`theta_of_power`] derives it and
//! [`estimate_loja_kappa`] certifies a finite empirical `kappa` by sampling.

use std::sync::atomic::{AtomicU64, Ordering};

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Exp, StandardNormal};

use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::stiefel::sample_stiefel_with;

/// Evaluation/derivative oracle bundle plus landscape metadata.
///
/// Objectives are immutable after construction and evaluation is pure, so a
/// shared reference is safe to use from concurrent runs.
pub trait Objective: Sync {
    fn name(&self) -> &str;

    /// Ambient dimension `n`.
    fn dim(&self) -> usize;

    fn eval(&self, x: &DVector<f64>) -> f64;

    /// Analytic gradient where `f` is differentiable.
    fn grad(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        let _ = x;
        Err(Error::Unsupported {
            objective: self.name().to_string(),
            reason: "no gradient oracle".into(),
        })
    }

    /// One element of the subdifferential at `x`. Defaults to the gradient.
    fn subgrad(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.grad(x)
    }

    /// Lipschitz constant of the gradient, when `f` is L-smooth.
    fn smooth_l(&self) -> Option<f64> {
        None
    }

    /// Lojasiewicz exponent, when known.
    fn loja_theta(&self) -> Option<f64> {
        None
    }

    /// Radius of the neighborhood used for Lojasiewicz certificates.
    fn loja_radius(&self) -> f64 {
        1.0
    }

    /// Empirical Lojasiewicz constant, when one has been certified.
    fn loja_kappa(&self) -> Option<f64> {
        None
    }

    fn minimizer(&self) -> Option<DVector<f64>> {
        None
    }

    fn min_value(&self) -> Option<f64> {
        None
    }

    /// Whether the gradient exists everywhere.
    fn is_nonsmooth(&self) -> bool {
        false
    }

    /// 1-d profile `h` with `f(x) = h(|x|)` for Euclidean-radial
    /// objectives; enables the closed 1-d reduction of the prox step.
    fn radial_profile(&self) -> Option<RadialProfile> {
        None
    }
}

/// `h(r) = coeff * r^exponent` on `r >= 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialProfile {
    pub coeff: f64,
    pub exponent: f64,
}

impl RadialProfile {
    pub fn value(&self, r: f64) -> f64 {
        self.coeff * r.powf(self.exponent)
    }

    pub fn derivative(&self, r: f64) -> f64 {
        self.coeff * self.exponent * r.powf(self.exponent - 1.0)
    }
}

/// A symmetric positive semidefinite quadratic form held in spectral form.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticForm {
    matrix: DMatrix<f64>,
    eigenvalues: DVector<f64>,
    eigenvectors: DMatrix<f64>,
}

impl QuadraticForm {
    /// Assemble `Q = E diag(lambda) E^T` from a spectrum.
    pub fn from_spectrum(eigenvalues: DVector<f64>, eigenvectors: DMatrix<f64>) -> Result<Self> {
        let n = eigenvalues.len();
        if eigenvectors.nrows() != n || eigenvectors.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "{n} eigenvalues but {}x{} eigenvector matrix",
                eigenvectors.nrows(),
                eigenvectors.ncols()
            )));
        }
        if let Some(bad) = eigenvalues.iter().find(|l| !l.is_finite() || **l < 0.0) {
            return Err(Error::InvalidArgument(format!(
                "eigenvalues must be finite and nonnegative, got {bad}"
            )));
        }
        let ortho_dev = (eigenvectors.transpose() * &eigenvectors - DMatrix::identity(n, n)).amax();
        if ortho_dev > 1e-10 {
            return Err(Error::InvalidArgument(format!(
                "eigenvector matrix is not orthogonal: deviation {ortho_dev:.3e}"
            )));
        }
        let raw = &eigenvectors * DMatrix::from_diagonal(&eigenvalues) * eigenvectors.transpose();
        // Exact symmetry; spectral assembly only symmetrizes up to rounding.
        let matrix = (&raw + raw.transpose()) / 2.0;
        Ok(Self {
            matrix,
            eigenvalues,
            eigenvectors,
        })
    }

    pub fn identity(n: usize) -> Self {
        Self::scaled_identity(n, 1.0)
    }

    /// `Q = scale * I`.
    pub fn scaled_identity(n: usize, scale: f64) -> Self {
        assert!(n >= 1 && scale >= 0.0, "need n >= 1 and scale >= 0");
        Self {
            matrix: DMatrix::identity(n, n) * scale,
            eigenvalues: DVector::from_element(n, scale),
            eigenvectors: DMatrix::identity(n, n),
        }
    }

    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.min()
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues.max()
    }

    pub fn is_positive_definite(&self) -> bool {
        self.min_eigenvalue() > 0.0
    }

    /// True when `Q` is a multiple of the identity.
    pub fn is_spherical(&self) -> bool {
        let max = self.max_eigenvalue();
        max - self.min_eigenvalue() <= 1e-12 * max.max(1.0)
    }

    /// `x^T Q x`, clamped at zero against rounding on PSD forms.
    pub fn quad(&self, x: &DVector<f64>) -> f64 {
        debug_assert_eq!(x.len(), self.n());
        (x.dot(&(&self.matrix * x))).max(0.0)
    }

    /// `Q x`.
    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.matrix * x
    }
}

/// Draw a random PSD form: eigenvalues i.i.d. exponential with the given
/// mean, eigenvectors a Haar-random orthogonal matrix.
pub fn make_random_psd(n: usize, mean: f64, stream: &RngStream) -> Result<QuadraticForm> {
    if n == 0 || !mean.is_finite() || mean <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "make_random_psd needs n >= 1 and mean > 0, got n = {n}, mean = {mean}"
        )));
    }
    let mut rng = stream.rng();
    let exp = Exp::new(1.0 / mean).expect("positive rate");
    let eigenvalues = DVector::from_fn(n, |_, _| rng.sample(exp));
    let frame = sample_stiefel_with(n, n, &mut rng)?;
    QuadraticForm::from_spectrum(eigenvalues, frame.columns().clone())
}

/// `f(x) = (x^T Q x)^p`.
#[derive(Debug, Clone)]
pub struct PowerQuadratic {
    base: QuadraticForm,
    power: f64,
    name: String,
    kappa: Option<f64>,
}

impl PowerQuadratic {
    pub fn new(base: QuadraticForm, power: f64) -> Result<Self> {
        if !power.is_finite() || power <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "power must be positive, got {power}"
            )));
        }
        let name = format!("power_quadratic(n={}, p={})", base.n(), power);
        Ok(Self {
            base,
            power,
            name,
            kappa: None,
        })
    }

    pub fn base(&self) -> &QuadraticForm {
        &self.base
    }

    pub fn power(&self) -> f64 {
        self.power
    }

    /// Certify and store an empirical Lojasiewicz constant (see
    /// [`estimate_loja_kappa`]). No-op for powers without an exponent.
    pub fn with_estimated_kappa(mut self, samples: usize, stream: &RngStream) -> Result<Self> {
        if let Some(theta) = self.loja_theta() {
            let cert = estimate_loja_kappa(&self, theta, self.loja_radius(), samples, stream)?;
            self.kappa = Some(cert.kappa);
        }
        Ok(self)
    }
}

impl Objective for PowerQuadratic {
    fn name(&self) -> &str {
        &self.name
    }

    fn dim(&self) -> usize {
        self.base.n()
    }

    fn eval(&self, x: &DVector<f64>) -> f64 {
        self.base.quad(x).powf(self.power)
    }

    /// `grad f(x) = 2 p (x^T Q x)^{p-1} Q x` where `x^T Q x > 0`. At a zero
    /// of the form the gradient exists only for `p >= 1` (where the formula
    /// extends continuously); for `p < 1` the query is a domain error and
    /// callers fall back to [`Objective::subgrad`].
    fn grad(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        let q = self.base.quad(x);
        if q == 0.0 && self.power < 1.0 {
            return Err(Error::GradientUndefined {
                objective: self.name.clone(),
            });
        }
        Ok(self.base.apply(x) * (2.0 * self.power * q.powf(self.power - 1.0)))
    }

    /// The gradient away from the zero set; the zero vector on it (a valid
    /// subgradient for these nonnegative radial forms).
    fn subgrad(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        if self.base.quad(x) == 0.0 {
            return Ok(DVector::zeros(self.dim()));
        }
        self.grad(x)
    }

    fn smooth_l(&self) -> Option<f64> {
        // Only the plain quadratic is globally L-smooth.
        if self.power == 1.0 {
            Some(2.0 * self.base.max_eigenvalue())
        } else {
            None
        }
    }

    fn loja_theta(&self) -> Option<f64> {
        theta_of_power(self.power).ok()
    }

    fn loja_kappa(&self) -> Option<f64> {
        self.kappa
    }

    fn minimizer(&self) -> Option<DVector<f64>> {
        Some(DVector::zeros(self.dim()))
    }

    fn min_value(&self) -> Option<f64> {
        Some(0.0)
    }

    fn is_nonsmooth(&self) -> bool {
        self.power <= 0.5
    }

    fn radial_profile(&self) -> Option<RadialProfile> {
        if !self.base.is_spherical() {
            return None;
        }
        let lambda = self.base.max_eigenvalue();
        Some(RadialProfile {
            coeff: lambda.powf(self.power),
            exponent: 2.0 * self.power,
        })
    }
}

/// Lojasiewicz exponent of `(x^T Q x)^p`: `theta = 1 - 1/(2p)`.
///
/// Requires `p > 1/2`; below that the form is not L-smooth at its minimizer
/// and the formula leaves `(0, 1)`.
pub fn theta_of_power(p: f64) -> Result<f64> {
    if !p.is_finite() || p <= 0.5 {
        return Err(Error::InvalidArgument(format!(
            "Lojasiewicz exponent undefined for p = {p} <= 1/2"
        )));
    }
    let theta = 1.0 - 1.0 / (2.0 * p);
    debug_assert!(theta > 0.0 && theta < 1.0);
    Ok(theta)
}

/// One subgradient of a registered radial form: the analytic gradient where
/// `f` is differentiable and the zero vector at the minimizer.
pub fn subgrad_radial(f: &dyn Objective, x: &DVector<f64>) -> Result<DVector<f64>> {
    f.subgrad(x)
}

/// Empirical Lojasiewicz certificate over a sampled neighborhood.
#[derive(Debug, Clone, Copy)]
pub struct LojaCertificate {
    pub theta: f64,
    /// `max |f(x) - f(x*)|^theta / |grad f(x)|` over the sample.
    pub kappa: f64,
    pub radius: f64,
    pub samples: usize,
}

/// Sample points within `radius` of the minimizer and bound the ratio
/// `|f(x) - f(x*)|^theta / |grad f(x)|`. The minimizer itself is excluded.
pub fn estimate_loja_kappa(
    f: &dyn Objective,
    theta: f64,
    radius: f64,
    samples: usize,
    stream: &RngStream,
) -> Result<LojaCertificate> {
    let theta_ok = theta.is_finite() && theta > 0.0 && theta < 1.0;
    let radius_ok = radius.is_finite() && radius > 0.0;
    if !theta_ok || !radius_ok || samples == 0 {
        return Err(Error::InvalidArgument(
            "need theta in (0,1), radius > 0, samples >= 1".into(),
        ));
    }
    let center = f.minimizer().ok_or_else(|| Error::Unsupported {
        objective: f.name().to_string(),
        reason: "Lojasiewicz certificate needs a known minimizer".into(),
    })?;
    let f_min = f.min_value().unwrap_or_else(|| f.eval(&center));
    let n = f.dim();
    let mut rng = stream.rng();
    let mut kappa: f64 = 0.0;
    for _ in 0..samples {
        let g = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let r = radius * rng.random::<f64>().powf(1.0 / n as f64);
        let x = &center + g.normalize() * r;
        let grad_norm = f.grad(&x)?.norm();
        if grad_norm == 0.0 {
            continue; // critical point inside the neighborhood
        }
        kappa = kappa.max((f.eval(&x) - f_min).abs().powf(theta) / grad_norm);
    }
    Ok(LojaCertificate {
        theta,
        kappa,
        radius,
        samples,
    })
}

/// `f(x) = g^T x`.
#[derive(Debug, Clone)]
pub struct Linear {
    gradient: DVector<f64>,
    name: String,
}

impl Linear {
    pub fn new(gradient: DVector<f64>) -> Self {
        let name = format!("linear(n={})", gradient.len());
        Self { gradient, name }
    }
}

impl Objective for Linear {
    fn name(&self) -> &str {
        &self.name
    }

    fn dim(&self) -> usize {
        self.gradient.len()
    }

    fn eval(&self, x: &DVector<f64>) -> f64 {
        self.gradient.dot(x)
    }

    fn grad(&self, _x: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(self.gradient.clone())
    }

    fn smooth_l(&self) -> Option<f64> {
        Some(0.0)
    }
}

/// `f(x) = c`.
#[derive(Debug, Clone)]
pub struct Constant {
    value: f64,
    dim: usize,
    name: String,
}

impl Constant {
    pub fn new(dim: usize, value: f64) -> Self {
        Self {
            value,
            dim,
            name: format!("constant(n={dim})"),
        }
    }
}

impl Objective for Constant {
    fn name(&self) -> &str {
        &self.name
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, _x: &DVector<f64>) -> f64 {
        self.value
    }

    fn grad(&self, _x: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(DVector::zeros(self.dim))
    }

    fn smooth_l(&self) -> Option<f64> {
        Some(0.0)
    }

    fn min_value(&self) -> Option<f64> {
        Some(self.value)
    }
}

/// Wrapper that counts `eval` calls; used to audit evaluation budgets.
pub struct CountingObjective<'a> {
    inner: &'a dyn Objective,
    evals: AtomicU64,
}

impl<'a> CountingObjective<'a> {
    pub fn new(inner: &'a dyn Objective) -> Self {
        Self {
            inner,
            evals: AtomicU64::new(0),
        }
    }

    pub fn count(&self) -> u64 {
        self.evals.load(Ordering::Relaxed)
    }

    pub fn reset(&self) {
        self.evals.store(0, Ordering::Relaxed);
    }
}

impl Objective for CountingObjective<'_> {
    fn name(&self) -> &str {
        self.inner.name()
    }

    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn eval(&self, x: &DVector<f64>) -> f64 {
        self.evals.fetch_add(1, Ordering::Relaxed);
        self.inner.eval(x)
    }

    fn grad(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.inner.grad(x)
    }

    fn subgrad(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.inner.subgrad(x)
    }

    fn smooth_l(&self) -> Option<f64> {
        self.inner.smooth_l()
    }

    fn loja_theta(&self) -> Option<f64> {
        self.inner.loja_theta()
    }

    fn loja_radius(&self) -> f64 {
        self.inner.loja_radius()
    }

    fn minimizer(&self) -> Option<DVector<f64>> {
        self.inner.minimizer()
    }

    fn min_value(&self) -> Option<f64> {
        self.inner.min_value()
    }

    fn is_nonsmooth(&self) -> bool {
        self.inner.is_nonsmooth()
    }

    fn radial_profile(&self) -> Option<RadialProfile> {
        self.inner.radial_profile()
    }
}
