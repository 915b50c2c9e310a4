//! One-dimensional weighted Hardy quotient on `(0, T)`, evaluated in the
//! logarithmic variable `u = log t` so that power-type singularities at the
//! origin are resolved uniformly.

use crate::discretize::diff::{first_derivative, MIN_POINTS};
use crate::discretize::{pairwise_sum, Alignment, GridBox, GridFunction};
use crate::error::{Error, Result};

/// Denominators below this are rejected.
pub const DEGENERATE_TOL: f64 = 1e-14;

/// Cell-centered grid in `u` over `[log t_max - depth, log t_max]`.
pub fn log_window(t_max: f64, depth: f64, cells: usize) -> Result<GridBox> {
    if !(t_max > 0.0 && depth > 0.0) || cells < MIN_POINTS {
        return Err(Error::param(
            "log window needs t_max > 0, depth > 0 and at least 9 cells",
        ));
    }
    let hi = t_max.ln();
    GridBox::new(
        vec![hi - depth],
        vec![hi],
        vec![depth / cells as f64],
        Alignment::CellCentered,
    )
}

/// Samples `g(e^u)` on a log window.
pub fn sample_log(g: impl Fn(f64) -> f64, grid: &GridBox, name: &str) -> Result<GridFunction> {
    let samples: Vec<f64> = grid.axis_coords(0).iter().map(|&u| g(u.exp())).collect();
    if let Some(u) = grid
        .axis_coords(0)
        .iter()
        .zip(&samples)
        .find(|(_, v)| !v.is_finite())
        .map(|(u, _)| *u)
    {
        return Err(Error::Singular {
            node: vec![u.exp()],
        });
    }
    GridFunction::new(grid.clone(), samples, name)
}

/// Pure powers `t^beta` on the window.
pub fn power_family(beta: f64, grid: &GridBox) -> Result<GridFunction> {
    sample_log(|t| t.powf(beta), grid, &format!("t^{beta}"))
}

/// Sharp constant `(p / (p - alpha - 1))^p`.
pub fn sharp_constant(p: f64, alpha: f64) -> f64 {
    (p / (p - alpha - 1.0)).powf(p)
}

/// `int (|g|/t)^p t^alpha dt / int |g'|^p t^alpha dt` for `g` given on a log
/// window (samples of `g(e^u)`).
///
/// With `G(u) = g(e^u)` both integrals become `int |.|^p e^{u(alpha+1-p)} du`
/// of `G` and `G'` respectively; `G'` uses fourth-order differences.
pub fn hardy_quotient_1d(g: &GridFunction, p: f64, alpha: f64) -> Result<f64> {
    if g.grid().dim() != 1 {
        return Err(Error::param(
            "hardy_quotient_1d needs a one-dimensional grid",
        ));
    }
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::param(format!("p={p} must lie in [1, inf)")));
    }
    if !(p > alpha + 1.0) {
        return Err(Error::param(format!(
            "need p > alpha + 1, got p={p}, alpha={alpha}"
        )));
    }
    let grid = g.grid();
    if grid.shape()[0] < MIN_POINTS {
        return Err(Error::TooCoarse(format!(
            "need at least {MIN_POINTS} samples"
        )));
    }
    let h = grid.spacing()[0];
    let mut dg = Vec::new();
    first_derivative(g.samples(), h, &mut dg);
    let us = grid.axis_coords(0);
    let expo = alpha + 1.0 - p;
    let num: Vec<f64> = us
        .iter()
        .zip(g.samples())
        .map(|(u, v)| v.abs().powf(p) * (expo * u).exp())
        .collect();
    let den: Vec<f64> = us
        .iter()
        .zip(&dg)
        .map(|(u, v)| v.abs().powf(p) * (expo * u).exp())
        .collect();
    let (num, den) = (pairwise_sum(&num) * h, pairwise_sum(&den) * h);
    if den < DEGENERATE_TOL {
        return Err(Error::Degenerate(format!(
            "derivative integral {den:e} is numerically zero"
        )));
    }
    Ok(num / den)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_family_matches_inverse_square() {
        let grid = log_window(1.0, 60.0, 6000).unwrap();
        for beta in [0.55, 0.75, 1.0, 1.5, 2.0] {
            let g = power_family(beta, &grid).unwrap();
            let q = hardy_quotient_1d(&g, 2.0, 0.0).unwrap();
            assert!((q * beta * beta - 1.0).abs() < 1e-6, "beta={beta} q={q}");
            assert!(q < sharp_constant(2.0, 0.0));
        }
    }

    #[test]
    fn smooth_cutoff_stays_below_sharp_constant() {
        let grid = log_window(2.0, 60.0, 6000).unwrap();
        let g = sample_log(
            |t| t.powf(0.55) * crate::profile::smooth_step(2.0 - t),
            &grid,
            "cut",
        )
        .unwrap();
        let q = hardy_quotient_1d(&g, 2.0, 0.0).unwrap();
        assert!(q > 1.0 && q < 4.0, "{q}");
    }

    #[test]
    fn zero_is_degenerate() {
        let grid = log_window(1.0, 10.0, 100).unwrap();
        let g = sample_log(|_| 0.0, &grid, "0").unwrap();
        assert!(matches!(
            hardy_quotient_1d(&g, 2.0, 0.0),
            Err(Error::Degenerate(_))
        ));
        assert!(hardy_quotient_1d(&g, 2.0, 1.5).is_err());
    }
}
