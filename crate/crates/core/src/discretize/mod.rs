//! Grids, quadrature, finite differences and Littlewood-Paley norms.

pub mod diff;
pub mod expr;
pub mod fft;
pub mod filterbank;
pub mod grid;
pub mod io;
pub mod quadrature;
pub mod report;
pub mod trace;
pub mod triebel;

pub use diff::derivative;
pub use expr::{Aabb, Combination, Dilated, Expr, FnExpr};
pub use filterbank::{lp_filterbank, FilterBank};
pub use grid::{pairwise_sum, sample, Alignment, GridBox, GridFunction};
pub use quadrature::{
    halvings, refined_derivative_lp_norm, refined_weighted_lp_norm, weighted_integral,
    weighted_lp_norm, Kappa, PlaneWeight, Region,
};
pub use report::{
    sustained_growth, NormMethod, NormReport, RefinementStep, CONVERGENT_SHRINK, GROWTH_TOL,
};
pub use trace::{plane_grid, plane_trace};
pub use triebel::{
    level_energies, line_triebel_norm, lp_norm, norm_from_energies, sobolev_fourier_norm,
    triebel_norm, EnergyPlan,
};
