//! Weighted `L_p` quadrature with distance-to-plane weights.

use serde::{Deserialize, Serialize};

use super::diff::derivative;
use super::expr::{Aabb, Expr};
use super::grid::{pairwise_sum, sample, Alignment, GridBox, GridFunction};
use super::report::{growths, sustained_growth, NormMethod, NormReport, RefinementStep};
use crate::error::{Error, Result};
use crate::geometry::{MultiIndex, PlaneSplit};

/// Monotone factor `kappa(d)` multiplying the integrand near the plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "delta", rename_all = "kebab-case")]
pub enum Kappa {
    One,
    /// `|log t|^delta`
    LogPower(f64),
    /// `t^-delta`
    InversePower(f64),
}

impl Kappa {
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            Kappa::One => 1.0,
            Kappa::LogPower(d) => t.ln().abs().powf(d),
            Kappa::InversePower(d) => t.powf(-d),
        }
    }

    pub fn is_bounded(&self) -> bool {
        match *self {
            Kappa::One => true,
            Kappa::LogPower(d) | Kappa::InversePower(d) => d == 0.0,
        }
    }

    pub fn label(&self) -> String {
        match *self {
            Kappa::One => "1".into(),
            Kappa::LogPower(d) => format!("log^{d}"),
            Kappa::InversePower(d) => format!("t^-{d}"),
        }
    }

    /// Parses `1`, `log^d` or `pow^d` (meaning `t^-d`).
    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim();
        if t == "1" || t == "one" {
            return Ok(Kappa::One);
        }
        let (kind, d) = t
            .split_once('^')
            .ok_or_else(|| Error::param(format!("kappa `{text}`: expected 1, log^d or pow^d")))?;
        let d: f64 = d
            .parse()
            .map_err(|_| Error::param(format!("kappa `{text}`: bad exponent")))?;
        if !(d > 0.0 && d.is_finite()) {
            return Err(Error::param(format!(
                "kappa `{text}`: exponent must be positive"
            )));
        }
        match kind {
            "log" => Ok(Kappa::LogPower(d)),
            "pow" | "t" => Ok(Kappa::InversePower(d)),
            _ => Err(Error::param(format!(
                "kappa `{text}`: unknown kind `{kind}`"
            ))),
        }
    }

    /// Checks positivity and monotone decrease on `(0, eps)` at `samples` points.
    pub fn check_monotone(&self, eps: f64, samples: usize) -> bool {
        let mut prev = f64::INFINITY;
        for k in 1..=samples {
            let t = eps * k as f64 / (samples + 1) as f64;
            let v = self.eval(t);
            if !(v > 0.0) || v > prev {
                return false;
            }
            prev = v;
        }
        true
    }
}

/// Integration region inside `Omega`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "eps", rename_all = "kebab-case")]
pub enum Region {
    /// `{0 < d(x) < eps}`
    Collar(f64),
    /// `{d(x) > 0}`
    Whole,
    /// `{d(x) >= eps}`
    Exterior(f64),
}

/// Weight `kappa(d)^p / |log d|^p [if log_divisor] * w(d)^-exponent` with
/// `w = d`, or `w = min(d, 1)` when `truncated`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlaneWeight {
    pub split: PlaneSplit,
    pub exponent: f64,
    pub log_divisor: bool,
    pub kappa: Kappa,
    pub region: Region,
    pub truncated: bool,
}

impl PlaneWeight {
    /// `d^-exponent` on the collar of width `eps`.
    pub fn collar(split: PlaneSplit, exponent: f64, eps: f64) -> Self {
        Self {
            split,
            exponent,
            log_divisor: false,
            kappa: Kappa::One,
            region: Region::Collar(eps),
            truncated: false,
        }
    }

    /// `min(d,1)^-exponent` on all of `Omega`.
    pub fn truncated_whole(split: PlaneSplit, exponent: f64) -> Self {
        Self {
            split,
            exponent,
            log_divisor: false,
            kappa: Kappa::One,
            region: Region::Whole,
            truncated: true,
        }
    }

    pub fn with_kappa(mut self, kappa: Kappa) -> Self {
        self.kappa = kappa;
        self
    }

    pub fn with_log_divisor(mut self, on: bool) -> Self {
        self.log_divisor = on;
        self
    }

    pub fn with_region(mut self, region: Region) -> Self {
        self.region = region;
        self
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if let Region::Collar(eps) = self.region {
            if !(eps > 0.0 && eps < 1.0) {
                return Err(Error::param(format!(
                    "collar width {eps} must lie in (0, 1)"
                )));
            }
        } else if let Region::Exterior(eps) = self.region {
            if !(eps > 0.0) || self.log_divisor {
                return Err(Error::param(format!(
                    "exterior region needs eps > 0 and no log divisor, got {eps}"
                )));
            }
        } else if self.log_divisor {
            return Err(Error::param(
                "a log divisor needs a collar of width < 1 (log d vanishes at d = 1)",
            ));
        }
        Ok(())
    }

    fn singular(&self) -> bool {
        self.exponent > 0.0 || self.log_divisor || !self.kappa.is_bounded()
    }

    /// Weight at distance `d`; zero outside the region.
    #[inline]
    pub fn factor(&self, d: f64, p: f64) -> f64 {
        let inside = match self.region {
            Region::Collar(eps) => d > 0.0 && d < eps,
            Region::Whole => d > 0.0,
            Region::Exterior(eps) => d >= eps,
        };
        if !inside {
            return 0.0;
        }
        let w = if self.truncated { d.min(1.0) } else { d };
        let mut f = self.kappa.eval(d).powf(p);
        if self.log_divisor {
            f /= d.ln().abs().powf(p);
        }
        if self.exponent != 0.0 {
            f *= w.powf(-self.exponent);
        }
        f
    }

    /// The slab of `bounds` where the weight can be nonzero.
    pub(crate) fn clip(&self, bounds: &Aabb, h: f64) -> Aabb {
        let mut out = bounds.clone();
        if let Region::Collar(eps) = self.region {
            // keep the box commensurate with h
            let e = (eps / h).ceil() * h;
            for a in self.split.normal_axes() {
                if bounds.lower[a] <= -e && bounds.upper[a] >= e {
                    out.lower[a] = -e;
                    out.upper[a] = e;
                }
            }
        }
        out
    }
}

fn quadrature_weights(grid: &GridBox) -> Option<Vec<Vec<f64>>> {
    match grid.alignment() {
        Alignment::CellCentered => None,
        Alignment::NodeCentered => Some(
            grid.shape()
                .iter()
                .map(|&len| {
                    (0..len)
                        .map(|k| if k == 0 || k == len - 1 { 0.5 } else { 1.0 })
                        .collect()
                })
                .collect(),
        ),
    }
}

/// `int |g|^p * weight dx` by the midpoint rule (trapezoidal on node-centered grids).
pub fn weighted_integral(g: &GridFunction, p: f64, weight: &PlaneWeight) -> Result<f64> {
    weight.validate()?;
    let grid = g.grid();
    if grid.dim() != weight.split.n() {
        return Err(Error::param("weight and grid dimensions differ"));
    }
    let tw = quadrature_weights(grid);
    let shape = grid.shape();
    let split = weight.split;
    let mut terms = vec![0.0; grid.len()];
    let mut on_plane: Option<Vec<f64>> = None;
    let mut idx = vec![0usize; shape.len()];
    grid.for_each_point(|lin, x| {
        let d = split.distance(x);
        let v = g.samples()[lin];
        if d == 0.0 && weight.singular() && v != 0.0 && on_plane.is_none() {
            on_plane = Some(x.to_vec());
        }
        let mut t = if v == 0.0 {
            0.0
        } else {
            v.abs().powf(p) * weight.factor(d, p)
        };
        if let Some(tw) = &tw {
            for (a, &i) in idx.iter().enumerate() {
                t *= tw[a][i];
            }
            let mut a = shape.len();
            while a > 0 {
                a -= 1;
                idx[a] += 1;
                if idx[a] < shape[a] {
                    break;
                }
                idx[a] = 0;
            }
        }
        terms[lin] = t;
    });
    if let Some(node) = on_plane {
        return Err(Error::Alignment(format!(
            "sample at {node:?} lies on the plane where the weight is singular; use a cell-centered grid"
        )));
    }
    Ok(pairwise_sum(&terms) * grid.cell_volume())
}

/// `(int |g|^p * weight dx)^{1/p}` at the resolution of `g`.
pub fn weighted_lp_norm(g: &GridFunction, p: f64, weight: &PlaneWeight) -> Result<NormReport> {
    check_p(p)?;
    let integral = weighted_integral(g, p, weight)?;
    let h = g.grid().h_max();
    let mut r = NormReport::single(integral.powf(1.0 / p), NormMethod::WeightedLp, p, h);
    r.refinement.push(RefinementStep { h, integral });
    Ok(r)
}

fn check_p(p: f64) -> Result<()> {
    if !(p.is_finite() && p >= 1.0) {
        return Err(Error::param(format!("p={p} must lie in [1, inf)")));
    }
    Ok(())
}

/// Resolution schedule `h0, h0/2, ..., h0/2^(steps-1)`.
pub fn halvings(h0: f64, steps: usize) -> Vec<f64> {
    (0..steps).map(|k| h0 * 0.5f64.powi(k as i32)).collect()
}

/// Weighted norm of `expr` over `bounds` on cell-centered grids at each
/// spacing of `schedule` (decreasing). The report carries the refinement
/// history and the divergence verdict from [`sustained_growth`].
pub fn refined_weighted_lp_norm(
    expr: &dyn Expr,
    bounds: &Aabb,
    schedule: &[f64],
    p: f64,
    weight: &PlaneWeight,
) -> Result<NormReport> {
    refined_derivative_lp_norm(expr, None, bounds, schedule, p, weight)
}

/// As [`refined_weighted_lp_norm`] for `D^alpha expr`, differentiated on
/// each grid by finite differences.
pub fn refined_derivative_lp_norm(
    expr: &dyn Expr,
    alpha: Option<&MultiIndex>,
    bounds: &Aabb,
    schedule: &[f64],
    p: f64,
    weight: &PlaneWeight,
) -> Result<NormReport> {
    check_p(p)?;
    weight.validate()?;
    if schedule.is_empty() {
        return Err(Error::param("empty resolution schedule"));
    }
    let coarse = schedule[0];
    let region = weight.clip(bounds, coarse);
    let mut steps = Vec::with_capacity(schedule.len());
    for &h in schedule {
        let grid = GridBox::uniform(&region, h, Alignment::CellCentered)?;
        let mut g = sample(expr, &grid)?;
        if let Some(alpha) = alpha.filter(|a| a.order() > 0) {
            g = derivative(&g, alpha)?;
        }
        steps.push(RefinementStep {
            h,
            integral: weighted_integral(&g, p, weight)?,
        });
    }
    Ok(report_from_steps(steps, NormMethod::WeightedLp, p))
}

/// Assembles a report whose value is the root of the finest integral.
pub fn report_from_steps(steps: Vec<RefinementStep>, method: NormMethod, p: f64) -> NormReport {
    let last = *steps.last().expect("non-empty refinement");
    let mut r = NormReport::single(last.integral.powf(1.0 / p), method, p, last.h);
    r.divergent = sustained_growth(&steps);
    r.discretization_error = growths(&steps).last().map(|g| g.abs());
    r.refinement = steps;
    r
}
