//! Logarithmic divergence of the critical collar integral.

use serde::Serialize;

use crate::discretize::{refined_weighted_lp_norm, Expr, PlaneWeight, RefinementStep};
use crate::error::{Error, Result};
use crate::geometry::{CriticalityClass, SmoothnessParams};
use crate::spaces::{collar_bounds, NormSettings};

/// Largest relative residual of the `c |log h| + b` fit accepted as a
/// logarithmic signature.
pub const LOG_FIT_RESIDUAL: f64 = 0.10;
/// Successive increments of a logarithmic divergence agree within this
/// relative spread.
pub const INCREMENT_SPREAD: f64 = 0.15;
/// Per-halving shrink of the increments that marks convergence.
pub const CONVERGENT_FACTOR: f64 = 1.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProbeVerdict {
    LogDivergent,
    Convergent,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct ProbeRecord {
    pub function: String,
    pub params: String,
    /// `int_collar |f|^p d^{-(n-l)}` at each spacing.
    pub steps: Vec<RefinementStep>,
    pub increments: Vec<f64>,
    /// `increment[i] / increment[i+1]`.
    pub shrink: Vec<f64>,
    /// Least-squares fit `integral = slope * |log h| + intercept`.
    pub slope: f64,
    pub intercept: f64,
    /// RMS deviation from the fit over the range of the integrals.
    pub relative_residual: f64,
    /// `max / min - 1` over the increments.
    pub increment_spread: f64,
    pub verdict: ProbeVerdict,
}

/// Least squares `y = a x + b`.
fn line_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let m = x.len() as f64;
    let mx = x.iter().sum::<f64>() / m;
    let my = y.iter().sum::<f64>() / m;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let a = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (a, my - a * mx)
}

/// Fits the collar integral `int_collar |f|^p d^{-(n-l)}` over a
/// decreasing list of spacings against `c |log h| + b`.
pub fn reinforced_divergence_probe(
    expr: &dyn Expr,
    params: &SmoothnessParams,
    resolutions: &[f64],
) -> Result<ProbeRecord> {
    if params.classify() != CriticalityClass::Critical(0) {
        return Err(Error::param(format!(
            "the divergence probe needs s = (n-l)/p; {} is {}",
            params.label(),
            params.classify()
        )));
    }
    if resolutions.len() < 3 {
        return Err(Error::param(format!(
            "the divergence probe needs at least 3 resolutions, got {}",
            resolutions.len()
        )));
    }
    if !resolutions.windows(2).all(|w| w[1] < w[0]) || !(resolutions[0] > 0.0) {
        return Err(Error::param(
            "resolutions must be positive and strictly decreasing",
        ));
    }
    let split = params.split();
    let settings = NormSettings::for_expr(expr)?.with_schedule(resolutions.to_vec());
    let weight = PlaneWeight::collar(split, split.codim() as f64, params.eps());
    let report = refined_weighted_lp_norm(
        expr,
        &collar_bounds(expr, split, &settings),
        resolutions,
        params.p(),
        &weight,
    )?;
    let steps = report.refinement;
    let x: Vec<f64> = steps.iter().map(|s| s.h.ln().abs()).collect();
    let y: Vec<f64> = steps.iter().map(|s| s.integral).collect();
    let (slope, intercept) = line_fit(&x, &y);
    let range = y.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - y.iter().cloned().fold(f64::INFINITY, f64::min);
    let rms = (x
        .iter()
        .zip(&y)
        .map(|(a, b)| (b - slope * a - intercept).powi(2))
        .sum::<f64>()
        / x.len() as f64)
        .sqrt();
    let relative_residual = if range > 0.0 { rms / range } else { 0.0 };
    let increments: Vec<f64> = y.windows(2).map(|w| w[1] - w[0]).collect();
    let shrink: Vec<f64> = increments
        .windows(2)
        .map(|w| {
            if w[1] != 0.0 {
                w[0] / w[1]
            } else if w[0] == 0.0 {
                1.0
            } else {
                f64::INFINITY
            }
        })
        .collect();
    let lo = increments.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = increments.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let increment_spread = if lo > 0.0 { hi / lo - 1.0 } else { f64::INFINITY };
    let scale = y.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let negligible = increments.iter().all(|d| d.abs() <= 1e-12 * scale);
    let verdict = if slope > 0.0
        && relative_residual < LOG_FIT_RESIDUAL
        && increment_spread <= INCREMENT_SPREAD
    {
        ProbeVerdict::LogDivergent
    } else if negligible || shrink.iter().all(|&f| f >= CONVERGENT_FACTOR) {
        ProbeVerdict::Convergent
    } else {
        ProbeVerdict::Inconclusive
    };
    Ok(ProbeRecord {
        function: expr.describe(),
        params: params.label(),
        steps,
        increments,
        shrink,
        slope,
        intercept,
        relative_residual,
        increment_spread,
        verdict,
    })
}
