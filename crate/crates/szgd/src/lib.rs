//! Zeroth-order optimization with Stiefel-frame gradient estimation.
//!
//! The centerpiece is SZGD, stochastic zeroth-order gradient descent. At
//! iterate `x` it estimates the gradient from `2k` function probes along a
//! random orthonormal frame `V = [v1, ..., vk]` drawn Haar-uniformly from
//! the Stiefel manifold `St(n, k)`:
//!
//! ```text
//! grad_est(x) = n / (2 delta k) * sum_i ( f(x + delta v_i) - f(x - delta v_i) ) v_i
//! ```
//!
//! and descends with a constant step size while the finite-difference
//! granularity `delta` halves each iteration down to a floor.
//!
//! The crate bundles everything needed to study the estimator and the
//! descent schemes end to end:
//!
//! - [`stiefel`]: Haar-uniform frame sampling plus statistical validators.
//! - [`objectives`]: power-quadratic test functions `(x^T Q x)^p` with
//!   analytic gradients, subgradients, and Lojasiewicz metadata.
//! - [`estimator`]: the gradient estimator, its granularity schedule, and
//!   closed-form bias/variance bounds with Monte Carlo validators.
//! - [`optimizers`]: SZGD, gradient descent, and a proximal iteration,
//!   each recording a full [`optimizers::Trajectory`].
//! - [`rates`]: geometric and power-law decay fits over trajectory series.
//! - [`harness`]: multi-run experiments, CSV/SVG output, and the CLI.
//!
//! Everything randomized flows through [`rng::RngStream`], so runs are
//! reproducible bit for bit. Monte Carlo loops and experiment runs execute
//! in parallel via rayon when the `parallel` feature (default) is enabled;
//! disabling it swaps in a sequential fallback with identical output.

pub mod error;
pub mod estimator;
pub mod exec;
pub mod harness;
pub mod objectives;
pub mod optimizers;
pub mod rates;
pub mod rng;
pub mod stiefel;

pub use error::{Error, Result};
pub use rng::RngStream;
