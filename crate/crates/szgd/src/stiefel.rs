//! Haar-uniform sampling of orthonormal k-frames in `R^n`.
//!
//! A frame `V = [v1, ..., vk]` lives on the Stiefel manifold
//! `St(n, k) = { V : V^T V = I_k }`. Sampling fills an `n x k` matrix with
//! independent standard normals, takes a Householder QR factorization, and
//! multiplies column `j` by the sign of `R[j, j]`. Without the sign fix the
//! QR orientation convention skews the distribution; with it the factor `Q`
//! is exactly Haar-uniform.
//!
//! The module also ships two statistical validators used by tests and the
//! `sample-stats` CLI subcommand: the empirical second moment of a frame
//! column must approach `I/n`, both for a single column and marginally for
//! every column of a wider frame.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::exec;
use crate::rng::RngStream;

/// Entry-wise tolerance on `V^T V = I` for a valid frame.
pub const ORTHONORMALITY_TOL: f64 = 1e-10;

/// An `n x k` matrix with orthonormal columns.
#[derive(Debug, Clone, PartialEq)]
pub struct StiefelFrame {
    columns: DMatrix<f64>,
}

impl StiefelFrame {
    /// Wrap a matrix, verifying `V^T V = I_k` within [`ORTHONORMALITY_TOL`].
    pub fn new(columns: DMatrix<f64>) -> Result<Self> {
        let frame = Self { columns };
        let dev = frame.orthonormality_deviation();
        if dev > ORTHONORMALITY_TOL {
            return Err(Error::InvalidArgument(format!(
                "columns are not orthonormal: max deviation {dev:.3e}"
            )));
        }
        Ok(frame)
    }

    /// Ambient dimension `n`.
    pub fn n(&self) -> usize {
        self.columns.nrows()
    }

    /// Number of directions `k`.
    pub fn k(&self) -> usize {
        self.columns.ncols()
    }

    pub fn columns(&self) -> &DMatrix<f64> {
        &self.columns
    }

    /// The `i`-th direction.
    pub fn column(&self, i: usize) -> DVector<f64> {
        self.columns.column(i).into_owned()
    }

    /// Max entry-wise deviation of `V^T V` from `I_k`.
    pub fn orthonormality_deviation(&self) -> f64 {
        let gram = self.columns.transpose() * &self.columns;
        let mut dev: f64 = 0.0;
        for i in 0..gram.nrows() {
            for j in 0..gram.ncols() {
                let target = if i == j { 1.0 } else { 0.0 };
                dev = dev.max((gram[(i, j)] - target).abs());
            }
        }
        dev
    }
}

/// Draw a Haar-uniform frame from `St(n, k)`.
///
/// Errors when `k = 0` or `k > n`. `k = n` is permitted and yields a random
/// orthogonal matrix.
pub fn sample_stiefel(n: usize, k: usize, stream: &RngStream) -> Result<StiefelFrame> {
    let mut rng = stream.rng();
    sample_stiefel_with(n, k, &mut rng)
}

/// As [`sample_stiefel`], drawing from an already-instantiated generator.
/// Sequential callers (e.g. an optimizer run) use this to consume one frame
/// per iteration from a single stream.
pub fn sample_stiefel_with<R: Rng>(n: usize, k: usize, rng: &mut R) -> Result<StiefelFrame> {
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!(
            "frame size k = {k} must satisfy 1 <= k <= n = {n}"
        )));
    }
    let gaussian = DMatrix::from_fn(n, k, |_, _| rng.sample::<f64, _>(StandardNormal));
    if k == 1 {
        // QR of a single column is just normalization; keep the cheap path.
        let norm = gaussian.column(0).norm();
        return Ok(StiefelFrame {
            columns: gaussian / norm,
        });
    }
    let qr = gaussian.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..k {
        if r[(j, j)] < 0.0 {
            for i in 0..n {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }
    Ok(StiefelFrame { columns: q })
}

/// Result of an empirical second-moment check against `I/n`.
#[derive(Debug, Clone)]
pub struct SecondMomentCheck {
    /// Empirical `E[v v^T]`.
    pub moment: DMatrix<f64>,
    /// Max entry-wise deviation from `I/n`.
    pub max_deviation: f64,
    pub samples: usize,
}

/// Empirical second moment of the first frame column over independent
/// frames, compared against its exact value `I/n`.
pub fn second_moment_check(n: usize, samples: usize, stream: &RngStream) -> Result<SecondMomentCheck> {
    if n == 0 || samples == 0 {
        return Err(Error::InvalidArgument(
            "second_moment_check needs n >= 1 and samples >= 1".into(),
        ));
    }
    let moment = column_second_moment(n, 1, 0, samples, stream)?;
    Ok(SecondMomentCheck {
        max_deviation: moment_deviation(&moment),
        moment,
        samples,
    })
}

/// Per-column deviations of the empirical `E[v_i v_i^T]` from `I/n`.
///
/// Under the Haar measure every column of a frame is marginally uniform on
/// the unit sphere, so each deviation should pass the same tolerance as the
/// `k = 1` case.
pub fn marginal_uniformity_check(
    n: usize,
    k: usize,
    samples: usize,
    stream: &RngStream,
) -> Result<Vec<f64>> {
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!(
            "frame size k = {k} must satisfy 1 <= k <= n = {n}"
        )));
    }
    if samples == 0 {
        return Err(Error::InvalidArgument("samples must be >= 1".into()));
    }
    (0..k)
        .map(|col| {
            let moment = column_second_moment(n, k, col, samples, stream)?;
            Ok(moment_deviation(&moment))
        })
        .collect()
}

fn moment_deviation(moment: &DMatrix<f64>) -> f64 {
    let n = moment.nrows();
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { 1.0 / n as f64 } else { 0.0 };
            dev = dev.max((moment[(i, j)] - target).abs());
        }
    }
    dev
}

/// Accumulate `E[v_col v_col^T]` over `samples` independent frames.
///
/// Work is split into a fixed number of batches, one substream per batch, so
/// the sum is identical whether batches run in parallel or sequentially.
fn column_second_moment(
    n: usize,
    k: usize,
    col: usize,
    samples: usize,
    stream: &RngStream,
) -> Result<DMatrix<f64>> {
    const BATCHES: usize = 128;
    let batches = BATCHES.min(samples);
    let per_batch = samples / batches;
    let remainder = samples % batches;

    let partials = exec::map_indexed(batches, |b| -> Result<DMatrix<f64>> {
        let mut rng = stream.substream(b as u64).rng();
        let count = per_batch + usize::from(b < remainder);
        let mut acc = DMatrix::<f64>::zeros(n, n);
        for _ in 0..count {
            let frame = sample_stiefel_with(n, k, &mut rng)?;
            let v = frame.columns().column(col);
            // acc += v v^T
            acc.ger(1.0, &v, &v, 1.0);
        }
        Ok(acc)
    });

    let mut total = DMatrix::<f64>::zeros(n, n);
    for partial in partials {
        total += partial?;
    }
    Ok(total / samples as f64)
}
