//! Decay-law fitting over trajectory series.
//!
//! Two models cover the observed regimes: geometric decay `y_t ~ A B^t`
//! (log-linear in `t`; the linear-convergence regime of exponents
//! `theta <= 1/2`) and power-law decay `y_t ~ A t^alpha` (log-log linear;
//! the `theta > 1/2` regime with predicted `alpha = 1/(1 - 2 theta)` for
//! function values and `(1 - theta)/(1 - 2 theta)` for distances). Both are
//! ordinary least squares in log domain.
//!
//! The strict entry points ([`fit_geometric`], [`fit_power_law`]) treat a
//! nonpositive value in the window as a domain error. The `_clipped`
//! variants clip values at `1e-300`, exclude the clipped points from the
//! regression, and report how many were dropped; exact convergence and
//! float underflow make such values reachable in practice.

use std::ops::Range;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::optimizers::Trajectory;

/// Floor used by the clipped fit variants before log transforms.
pub const CLIP_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateModel {
    /// `log y_t = intercept + parameter * t`.
    Geometric,
    /// `log y_t = intercept + parameter * log t`.
    PowerLaw,
}

/// A fitted decay model.
#[derive(Debug, Clone)]
pub struct RateFit {
    pub model: RateModel,
    /// Log-slope (geometric) or exponent (power law). A valid decay has
    /// `parameter < 0`; the geometric base is `exp(parameter)`.
    pub parameter: f64,
    pub intercept: f64,
    /// Coefficient of determination in log domain.
    pub r_squared: f64,
    pub window: Range<usize>,
    /// Points excluded by the clipped variants; 0 for the strict ones.
    pub clipped: usize,
}

impl RateFit {
    pub fn report(&self) -> String {
        let model = match self.model {
            RateModel::Geometric => "geometric",
            RateModel::PowerLaw => "power_law",
        };
        let parameter = match self.model {
            RateModel::Geometric => "slope",
            RateModel::PowerLaw => "exponent",
        };
        format!(
            "model = {model}\n{parameter} = {:.6}\nintercept = {:.6}\nr_squared = {:.6}\nwindow = [{}, {})\nclipped = {}\n",
            self.parameter, self.intercept, self.r_squared, self.window.start, self.window.end, self.clipped
        )
    }
}

/// Default fit window: drop the first 20% as burn-in (the predicted rates
/// hold for sufficiently large `t` only).
pub fn default_window(len: usize) -> Range<usize> {
    len / 5..len
}

/// Least-squares line through `(t, log y_t)` over the window.
pub fn fit_geometric(series: &[f64], window: Range<usize>) -> Result<RateFit> {
    let points = windowed(series, &window, false)?;
    fit_log_line(points, RateModel::Geometric, window, 0)
}

/// As [`fit_geometric`], excluding nonpositive values instead of failing.
pub fn fit_geometric_clipped(series: &[f64], window: Range<usize>) -> Result<RateFit> {
    let (points, clipped) = windowed_clipped(series, &window)?;
    fit_log_line(points, RateModel::Geometric, window, clipped)
}

/// Least-squares line through `(log t, log y_t)` over the window, which
/// must start at `t >= 1`.
pub fn fit_power_law(series: &[f64], window: Range<usize>) -> Result<RateFit> {
    let points = windowed(series, &window, true)?;
    fit_log_line(points, RateModel::PowerLaw, window, 0)
}

/// As [`fit_power_law`], excluding nonpositive values instead of failing.
pub fn fit_power_law_clipped(series: &[f64], window: Range<usize>) -> Result<RateFit> {
    if window.start < 1 {
        return Err(Error::InvalidArgument(
            "power-law window must start at t >= 1".into(),
        ));
    }
    let (points, clipped) = windowed_clipped(series, &window)?;
    fit_log_line(points, RateModel::PowerLaw, window, clipped)
}

fn windowed(series: &[f64], window: &Range<usize>, power_law: bool) -> Result<Vec<(usize, f64)>> {
    check_window(series, window)?;
    if power_law && window.start < 1 {
        return Err(Error::InvalidArgument(
            "power-law window must start at t >= 1".into(),
        ));
    }
    let mut points = Vec::with_capacity(window.len());
    for t in window.clone() {
        if series[t] <= 0.0 {
            return Err(Error::NonPositiveSeries {
                index: t,
                value: series[t],
            });
        }
        points.push((t, series[t]));
    }
    Ok(points)
}

fn windowed_clipped(series: &[f64], window: &Range<usize>) -> Result<(Vec<(usize, f64)>, usize)> {
    check_window(series, window)?;
    let mut points = Vec::with_capacity(window.len());
    let mut clipped = 0;
    for t in window.clone() {
        if series[t] <= CLIP_FLOOR {
            clipped += 1;
        } else {
            points.push((t, series[t]));
        }
    }
    Ok((points, clipped))
}

fn check_window(series: &[f64], window: &Range<usize>) -> Result<()> {
    if window.is_empty() || window.end > series.len() {
        return Err(Error::InvalidArgument(format!(
            "window [{}, {}) invalid for a series of length {}",
            window.start,
            window.end,
            series.len()
        )));
    }
    Ok(())
}

fn fit_log_line(
    points: Vec<(usize, f64)>,
    model: RateModel,
    window: Range<usize>,
    clipped: usize,
) -> Result<RateFit> {
    if points.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 usable points in the window, got {}",
            points.len()
        )));
    }
    let xy: Vec<(f64, f64)> = points
        .iter()
        .map(|(t, y)| {
            let x = match model {
                RateModel::Geometric => *t as f64,
                RateModel::PowerLaw => (*t as f64).ln(),
            };
            (x, y.ln())
        })
        .collect();

    let n = xy.len() as f64;
    let mean_x = xy.iter().map(|(x, _)| x).sum::<f64>() / n;
    let mean_y = xy.iter().map(|(_, y)| y).sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (x, y) in &xy {
        let dx = x - mean_x;
        let dy = y - mean_y;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(Error::InvalidArgument(
            "degenerate window: all abscissas coincide".into(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    // R^2 = 1 - SS_res / SS_tot. A constant series is perfectly fit by a
    // flat line; syy then sits at rounding level rather than exactly zero.
    let ss_res = (syy - slope * sxy).max(0.0);
    let noise_floor = n * (f64::EPSILON * (1.0 + mean_y.abs())).powi(2);
    let r_squared = if syy <= noise_floor {
        1.0
    } else {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    };

    Ok(RateFit {
        model,
        parameter: slope,
        intercept,
        r_squared,
        window,
        clipped,
    })
}

/// Tail sums `S_t = sum_{s >= t} |x_{s+1} - x_s|^2` by reverse accumulation.
///
/// The sum truncates at the end of the trajectory, so the output is a
/// truncation proxy for the infinite tail; it is nonnegative and
/// non-increasing by construction.
pub fn tail_square_sums(step_sq_norms: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; step_sq_norms.len()];
    let mut acc = 0.0;
    for (i, v) in step_sq_norms.iter().enumerate().rev() {
        acc += v;
        out[i] = acc;
    }
    out
}

/// Euclidean distances `|x_t - x_limit|` at the trajectory's recorded
/// iterate indices. Thinned-out indices are simply absent from the output.
pub fn distance_series(trajectory: &Trajectory, x_limit: &DVector<f64>) -> Vec<(usize, f64)> {
    trajectory
        .iterates
        .iter()
        .map(|(t, x)| (*t, (x - x_limit).norm()))
        .collect()
}
