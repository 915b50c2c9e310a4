//! Hardy-type functionals near the plane and their extremal families.

pub mod lattice;
pub mod oned;
pub mod witness;

use serde::{Deserialize, Serialize};

use crate::discretize::trace::plane_trace;
use crate::discretize::{
    derivative, sample, triebel_norm, weighted_integral, Aabb, Alignment, Expr, GridBox,
    GridFunction, Kappa, PlaneWeight,
};
use crate::error::{Error, Result};
use crate::geometry::{CriticalityClass, MultiIndex, SmoothnessParams};

pub use lattice::{shell_lattice, ShellLattice};
pub use oned::{hardy_quotient_1d, log_window, power_family, sample_log, sharp_constant};
pub use witness::{
    build_fj, build_fj_with_spacing, build_subcritical_witness, fj_witness, subcritical_witness,
    Witness, WitnessKind,
};

/// Relative size (against `sup |D^beta f|`) below which a sampled trace
/// counts as vanishing.
pub const TRACE_TOL: f64 = 1e-4;
/// Denominators below this are rejected.
const ZERO_NORM: f64 = 1e-300;

/// `kappa(d)` and whether the integrand is divided by `log d`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightSpec {
    pub kappa: Kappa,
    pub log_divisor: bool,
}

impl WeightSpec {
    pub fn new(kappa: Kappa, log_divisor: bool) -> Self {
        Self { kappa, log_divisor }
    }

    /// Checks that `kappa` is positive and non-increasing on `(0, eps)`.
    pub fn validate(&self, eps: f64) -> Result<()> {
        if !self.kappa.check_monotone(eps, 1000) {
            return Err(Error::param(format!(
                "kappa {} is not positive and decreasing",
                self.kappa.label()
            )));
        }
        Ok(())
    }

    /// Collar weight `kappa^p [/ |log d|^p] d^{-exponent}`.
    pub fn plane_weight(&self, params: &SmoothnessParams, exponent: f64) -> PlaneWeight {
        PlaneWeight::collar(params.split(), exponent, params.eps())
            .with_kappa(self.kappa)
            .with_log_divisor(self.log_divisor)
    }
}

/// A ratio `numerator / denominator` at one resolution.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HardyQuotient {
    pub value: f64,
    pub numerator: f64,
    pub denominator: f64,
    pub h: f64,
}

fn ratio(numerator: f64, denominator: f64, h: f64) -> Result<HardyQuotient> {
    if !(denominator > ZERO_NORM) {
        return Err(Error::Degenerate("denominator norm is zero".into()));
    }
    Ok(HardyQuotient {
        value: numerator / denominator,
        numerator,
        denominator,
        h,
    })
}

/// `(int_collar |kappa(d) f|^p d^{-sp})^{1/p} / ||f | F^s_{p,q}||` for `0 < s < (n-l)/p`.
pub fn subcritical_quotient(
    f: &GridFunction,
    params: &SmoothnessParams,
    w: &WeightSpec,
) -> Result<HardyQuotient> {
    params.require_banach_q()?;
    w.validate(params.eps())?;
    let (s, p) = (params.s(), params.p());
    let codim = params.split().codim() as f64;
    if !(s > 0.0 && s < codim / p) {
        return Err(Error::param(format!(
            "subcritical quotient needs 0 < s < (n-l)/p = {}",
            codim / p
        )));
    }
    let num = weighted_integral(f, p, &w.plane_weight(params, s * p))?.powf(1.0 / p);
    let den = triebel_norm(f, s, p, params.q())?.value;
    ratio(num, den, f.grid().h_max())
}

/// `(int_collar |kappa(d) f / log d|^p d^{-(n-l)})^{1/p} / ||f | F^{(n-l)/p}_{p,q}||`.
pub fn critical_quotient(
    f: &GridFunction,
    params: &SmoothnessParams,
    w: &WeightSpec,
) -> Result<HardyQuotient> {
    params.require_banach_q()?;
    w.validate(params.eps())?;
    if params.classify() != CriticalityClass::Critical(0) {
        return Err(Error::param(format!(
            "critical quotient needs s = (n-l)/p; {} is {}",
            params.label(),
            params.classify()
        )));
    }
    let p = params.p();
    let codim = params.split().codim() as f64;
    let num = weighted_integral(f, p, &w.plane_weight(params, codim))?.powf(1.0 / p);
    let den = triebel_norm(f, params.s(), p, params.q())?.value;
    ratio(num, den, f.grid().h_max())
}

/// Checks that `D^beta f` vanishes on the plane for all perpendicular
/// `|beta| <= order`, relative to `sup |D^beta f|`.
pub fn audit_vanishing_traces(
    f: &GridFunction,
    params: &SmoothnessParams,
    order: u32,
) -> Result<()> {
    let split = params.split();
    for beta in MultiIndex::perpendicular_up_to(split, order) {
        let d = derivative(f, &beta)?;
        let scale = d.max_abs();
        let tr = plane_trace(&d, split)?.max_abs();
        if scale > 0.0 && tr > TRACE_TOL * scale {
            return Err(Error::Precondition(format!(
                "trace of D^{beta} f does not vanish (|tr| = {tr:e}, sup = {scale:e})"
            )));
        }
    }
    Ok(())
}

/// `||d^{-s} f|L_p(collar)|| / sum_{|alpha| = r, alpha perp} ||d^{r-s} D^alpha f|L_p(collar)||`
/// for `f` whose perpendicular traces of order `< r` vanish.
pub fn boundary_hardy_quotient(
    f: &GridFunction,
    params: &SmoothnessParams,
    r: u32,
) -> Result<HardyQuotient> {
    let (s, p) = (params.s(), params.p());
    let split = params.split();
    let codim = split.codim() as f64;
    if !(s > r as f64 - 1.0 + codim / p) {
        return Err(Error::param(format!(
            "boundary Hardy quotient needs s > r - 1 + (n-l)/p = {}",
            r as f64 - 1.0 + codim / p
        )));
    }
    if f.grid().alignment() != Alignment::CellCentered {
        return Err(Error::Alignment(
            "boundary Hardy quotient needs a cell-centered grid".into(),
        ));
    }
    if r >= 1 {
        audit_vanishing_traces(f, params, r - 1)?;
    }
    let spec = WeightSpec::new(Kappa::One, false);
    let num = weighted_integral(f, p, &spec.plane_weight(params, s * p))?.powf(1.0 / p);
    let mut den = 0.0;
    for alpha in MultiIndex::perpendicular_of_order(split, r) {
        let d = derivative(f, &alpha)?;
        den +=
            weighted_integral(&d, p, &spec.plane_weight(params, (s - r as f64) * p))?.powf(1.0 / p);
    }
    ratio(num, den, f.grid().h_max())
}

/// Boundary Hardy quotient of `expr` sampled on `bounds` at each spacing
/// of `schedule`.
pub fn boundary_hardy_refined(
    expr: &dyn Expr,
    bounds: &Aabb,
    schedule: &[f64],
    params: &SmoothnessParams,
    r: u32,
) -> Result<Vec<HardyQuotient>> {
    schedule
        .iter()
        .map(|&h| {
            let grid = GridBox::uniform(bounds, h, Alignment::CellCentered)?;
            boundary_hardy_quotient(&sample(expr, &grid)?, params, r)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::{halvings, refined_weighted_lp_norm, FnExpr};
    use crate::geometry::PlaneSplit;
    use num_rational::Rational64;

    fn params(s: &str, p: &str) -> SmoothnessParams {
        SmoothnessParams::parse(PlaneSplit::new(2, 1).unwrap(), s, p, 2.0).unwrap()
    }

    fn gaussian_at(z0: f64, a: f64) -> FnExpr {
        FnExpr::new(2, "g", move |x| {
            (-a * (x[0] * x[0] + (x[1] - z0) * (x[1] - z0))).exp()
        })
        .with_support(Aabb::new(vec![-3.0, z0 - 3.0], vec![3.0, z0 + 3.0]))
    }

    fn grid(h: f64) -> GridBox {
        GridBox::uniform(&Aabb::cube(2, 8.0), h, Alignment::CellCentered).unwrap()
    }

    #[test]
    fn subcritical_numerator_matches_one_dimensional_quadrature() {
        let pr = params("1/4", "2");
        let w = WeightSpec::new(Kappa::One, false);
        let at = |h: f64| {
            sample(
                &gaussian_at(0.25, 1.0),
                &GridBox::uniform(&Aabb::cube(2, 6.5), h, Alignment::CellCentered).unwrap(),
            )
            .unwrap()
        };
        // z = +-t^2 removes the |z|^{-1/2} singularity; x integrates to sqrt(pi/2)
        let m = 20000;
        let dt = 0.5f64.sqrt() / m as f64;
        let g = |z: f64| (-2.0 * (z - 0.25) * (z - 0.25)).exp();
        let zint: f64 = (0..m)
            .map(|k| (k as f64 + 0.5) * dt)
            .map(|t| 2.0 * (g(t * t) + g(-t * t)) * dt)
            .sum();
        let oracle = (std::f64::consts::PI / 2.0).sqrt() * zint;
        let wt = w.plane_weight(&pr, 0.5);
        let (coarse, fine) = (
            weighted_integral(&at(1.0 / 16.0), 2.0, &wt).unwrap(),
            weighted_integral(&at(1.0 / 32.0), 2.0, &wt).unwrap(),
        );
        // midpoint error against |z|^{-1/2} decays like h^{1/2}
        let rate = (coarse - oracle) / (fine - oracle);
        assert!((rate - 2f64.sqrt()).abs() < 0.1, "rate {rate}");
        let extrapolated = (2f64.sqrt() * fine - coarse) / (2f64.sqrt() - 1.0);
        assert!(
            (extrapolated / oracle - 1.0).abs() < 2e-3,
            "{extrapolated} vs {oracle}"
        );
        let q = subcritical_quotient(&at(1.0 / 32.0), &pr, &w).unwrap();
        assert!((q.numerator - fine.sqrt()).abs() < 1e-12);
        assert!(q.value > 0.5 && q.value < 2.0, "{q:?}");
    }

    #[test]
    fn zero_function_and_far_support() {
        let g = grid(1.0 / 8.0);
        let zero = sample(
            &FnExpr::new(2, "0", |_| 0.0).with_support(Aabb::cube(2, 1.0)),
            &g,
        )
        .unwrap();
        let w = WeightSpec::new(Kappa::One, false);
        assert!(matches!(
            subcritical_quotient(&zero, &params("1/4", "2"), &w),
            Err(Error::Degenerate(_))
        ));
        let far = FnExpr::new(2, "far", |x| {
            crate::profile::plateau(((x[1] - 2.0).powi(2) + x[0] * x[0]).sqrt())
        })
        .with_support(Aabb::new(vec![-1.0, 1.0], vec![1.0, 3.0]));
        let f = sample(&far, &g).unwrap();
        assert_eq!(
            subcritical_quotient(&f, &params("1/4", "2"), &w)
                .unwrap()
                .value,
            0.0
        );
        assert_eq!(
            critical_quotient(&f, &params("1/2", "2"), &WeightSpec::new(Kappa::One, true))
                .unwrap()
                .value,
            0.0
        );
    }

    #[test]
    fn critical_quotient_requires_critical_zero() {
        let f = sample(&gaussian_at(0.0, 1.0), &grid(1.0 / 8.0)).unwrap();
        let w = WeightSpec::new(Kappa::One, true);
        assert!(critical_quotient(&f, &params("3/4", "2"), &w).is_err());
        let q = critical_quotient(&f, &params("1/2", "2"), &w).unwrap();
        assert!(q.value.is_finite() && q.value > 0.0);
    }

    #[test]
    fn unlogged_critical_integral_diverges() {
        let p = params("1/2", "2");
        let w = WeightSpec::new(Kappa::One, false).plane_weight(&p, 1.0);
        let r = refined_weighted_lp_norm(
            &gaussian_at(0.0, 1.0),
            &Aabb::cube(2, 4.0),
            &halvings(1.0 / 16.0, 3),
            2.0,
            &w,
        )
        .unwrap();
        assert!(r.divergent);
        let w = WeightSpec::new(Kappa::One, true).plane_weight(&p, 1.0);
        let r = refined_weighted_lp_norm(
            &gaussian_at(0.0, 1.0),
            &Aabb::cube(2, 4.0),
            &halvings(1.0 / 16.0, 3),
            2.0,
            &w,
        )
        .unwrap();
        assert!(!r.divergent);
    }

    #[test]
    fn boundary_quotient_for_vanishing_trace() {
        let split = PlaneSplit::new(2, 1).unwrap();
        let bounds = Aabb::cube(2, 4.0);
        let zg = FnExpr::new(2, "zG", |x| x[1] * (-(x[0] * x[0] + x[1] * x[1])).exp());
        let p1 = SmoothnessParams::exact(split, Rational64::new(1, 1), Rational64::new(2, 1), 2.0)
            .unwrap();
        let q = boundary_hardy_refined(&zg, &bounds, &[1.0 / 16.0, 1.0 / 32.0], &p1, 1).unwrap();
        assert!((q[1].value / q[0].value - 1.0).abs() < 0.1, "{q:?}");
        let z2g = FnExpr::new(2, "z2G", |x| {
            x[1] * x[1] * (-(x[0] * x[0] + x[1] * x[1])).exp()
        });
        let p2 = SmoothnessParams::exact(split, Rational64::new(2, 1), Rational64::new(2, 1), 2.0)
            .unwrap();
        let q = boundary_hardy_refined(&z2g, &bounds, &[1.0 / 16.0, 1.0 / 32.0], &p2, 2).unwrap();
        assert!((q[1].value / q[0].value - 1.0).abs() < 0.1, "{q:?}");
    }

    #[test]
    fn boundary_quotient_audits_traces() {
        let split = PlaneSplit::new(2, 1).unwrap();
        let g = GridBox::uniform(&Aabb::cube(2, 4.0), 1.0 / 16.0, Alignment::CellCentered).unwrap();
        let f = sample(&gaussian_at(0.0, 1.0), &g).unwrap();
        let p = SmoothnessParams::new(split, 1.0, 2.0, 2.0).unwrap();
        assert!(matches!(
            boundary_hardy_quotient(&f, &p, 1),
            Err(Error::Precondition(_))
        ));
    }
}
