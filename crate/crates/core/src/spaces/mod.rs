//! Composite norms on `R^n \ R^l`: trace jets, the reinforced norm, the
//! refined-localization norm and its weighted characterization, and the
//! homogeneity and Fubini ratio tests.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

use rayon::prelude::*;
use serde::Serialize;

use crate::discretize::diff::MIN_POINTS as MIN_DIFF_POINTS;
use crate::discretize::quadrature::report_from_steps;
use crate::discretize::{
    derivative, halvings, line_triebel_norm, lp_norm, norm_from_energies, plane_trace,
    refined_derivative_lp_norm, sample, triebel_norm, weighted_integral, Aabb, Alignment, Dilated,
    EnergyPlan, Expr, GridBox, GridFunction, NormMethod, NormReport, PlaneWeight, RefinementStep,
    Region,
};
use crate::error::{Error, Result};
use crate::geometry::{CriticalityClass, MultiIndex, PlaneSplit, SmoothnessParams};
use crate::whitney::PartitionOfUnity;

/// Relative size below which a trace counts as vanishing.
pub const TRACE_VANISH_TOL: f64 = 1e-6;

/// Grids used by the composite norms of a closed-form function.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormSettings {
    /// Computational box `[-L, L]^n`; the support lies in its inner half.
    pub bounds: Aabb,
    /// Spacing of the grid for `F^s_{p,q}` norms.
    pub norm_h: f64,
    /// Decreasing spacings for the collar integrals.
    pub schedule: Vec<f64>,
}

impl NormSettings {
    /// Box twice the (symmetrized) support `[-R, R]^n`, `norm_h` the dyadic
    /// spacing at most `R/80` (`R/40` from dimension three on) and collar
    /// schedule `norm_h/2, norm_h/4, norm_h/8`. Dilating the function by a
    /// power of two dilates every grid with it.
    pub fn for_expr(expr: &dyn Expr) -> Result<Self> {
        let sup = expr.support().ok_or_else(|| {
            Error::Support(format!("`{}` declares no support box", expr.describe()))
        })?;
        let reach = sup
            .lower
            .iter()
            .chain(&sup.upper)
            .fold(0.0f64, |m, v| m.max(v.abs()));
        if !(reach > 0.0 && reach.is_finite()) {
            return Err(Error::Support(format!(
                "`{}` declares an empty support box",
                expr.describe()
            )));
        }
        let n = expr.dim();
        let cells = if n >= 3 { 40.0 } else { 80.0 };
        let norm_h = 2f64.powi((reach / cells).log2().floor() as i32);
        let half = ((2.0 * reach) / norm_h).ceil() * norm_h;
        Ok(Self {
            bounds: Aabb::cube(n, half),
            norm_h,
            schedule: halvings(norm_h / 2.0, 3),
        })
    }

    pub fn with_schedule(mut self, schedule: Vec<f64>) -> Self {
        self.schedule = schedule;
        self
    }

    pub fn with_norm_h(mut self, h: f64) -> Self {
        self.norm_h = h;
        self
    }

    pub fn norm_grid(&self, alignment: Alignment) -> Result<GridBox> {
        GridBox::uniform(&self.bounds, self.norm_h, alignment)
    }
}

/// `||f | F^s_{p,q}||` of a closed-form function on the settings' grid.
pub fn expr_triebel_norm(
    expr: &dyn Expr,
    params: &SmoothnessParams,
    settings: &NormSettings,
) -> Result<NormReport> {
    let g = sample(expr, &settings.norm_grid(Alignment::CellCentered)?)?;
    triebel_norm(&g, params.s(), params.p(), params.q())
}

fn require_above_sigma(params: &SmoothnessParams) -> Result<()> {
    params.require_banach_q()?;
    let sigma = params.constants().sigma_pq;
    if !(params.s() > sigma) {
        return Err(Error::param(format!(
            "s={} must exceed sigma_pq={sigma}",
            params.s()
        )));
    }
    Ok(())
}

/// Box for collar integrals: the support's tangential extent, the full
/// normal extent (clipped to the collar by the weight).
pub fn collar_bounds(expr: &dyn Expr, split: PlaneSplit, settings: &NormSettings) -> Aabb {
    let mut b = settings.bounds.clone();
    let h0 = settings
        .schedule
        .first()
        .copied()
        .unwrap_or(settings.norm_h);
    if let Some(sup) = expr.support() {
        for a in 0..split.l() {
            b.lower[a] = ((sup.lower[a] / h0).floor() * h0).max(b.lower[a]);
            b.upper[a] = ((sup.upper[a] / h0).ceil() * h0).min(b.upper[a]);
            if !(b.upper[a] > b.lower[a]) {
                b.upper[a] = b.lower[a] + h0;
            }
        }
    }
    b
}

/// One perpendicular derivative restricted to the plane.
#[derive(Clone, Debug, Serialize)]
pub struct TraceComponent {
    pub alpha: MultiIndex,
    /// `s - (n-l)/p - |alpha|`.
    pub smoothness: f64,
    /// `sup |tr D^alpha f|`.
    pub sup: f64,
    /// `sup |tr D^alpha f| / sup |D^alpha f|` (zero for `f = 0`).
    pub relative_sup: f64,
    /// `||tr D^alpha f | F_{p,p}(R^l)||` (absolute value at the point when
    /// `l = 0`); absent when `f` is not inner-supported.
    pub norm: Option<f64>,
    #[serde(skip)]
    pub trace: GridFunction,
}

impl TraceComponent {
    pub fn vanishes(&self, tol: f64) -> bool {
        self.relative_sup <= tol
    }
}

/// `(tr D^alpha f)_{alpha perp, |alpha| <= r}`.
#[derive(Clone, Debug, Serialize)]
pub struct TraceJet {
    pub order: u32,
    pub components: Vec<TraceComponent>,
}

impl TraceJet {
    /// Whether every component of order at most `order` vanishes.
    pub fn vanishes_up_to(&self, order: u32, tol: f64) -> bool {
        self.components
            .iter()
            .filter(|c| c.alpha.order() <= order)
            .all(|c| c.vanishes(tol))
    }

    /// Highest order `k` such that all components of order `<= k` vanish.
    pub fn vanishing_order(&self, tol: f64) -> Option<u32> {
        (0..=self.order)
            .take_while(|&k| self.vanishes_up_to(k, tol))
            .last()
    }
}

/// Romberg-extrapolated `sup` over the nodes of the coarsest trace:
/// `(16 t_h - t_2h) / 15` with two traces, one more step
/// `(64 R_h - R_2h) / 63` with three. The even-power error of the
/// fourth-order differences cancels, so exactly vanishing traces come out
/// near round-off.
fn extrapolated_sup(traces: &[GridFunction]) -> f64 {
    let coarsest = traces.last().expect("at least one trace");
    let mut sup = 0.0f64;
    coarsest.grid().for_each_point(|_, x| {
        let mut t: Vec<f64> = traces.iter().map(|g| g.at(&g.nearest_index(x))).collect();
        let mut factor = 16.0;
        while t.len() > 1 {
            t = t.windows(2).map(|w| (factor * w[0] - w[1]) / (factor - 1.0)).collect();
            factor *= 4.0;
        }
        sup = sup.max(t[0].abs());
    });
    sup
}

/// Trace jet of order `r` of a node-centered `f`; needs `s > r + (n-l)/p`.
///
/// `sup` and `relative_sup` of derivative components are extrapolated from
/// spacings `h`, `2h` and `4h` when the grid allows it; the stored traces
/// are the plain samples at `h`.
pub fn trace_jet(f: &GridFunction, params: &SmoothnessParams, r: u32) -> Result<TraceJet> {
    let split = params.split();
    let codim_p = split.codim() as f64 / params.p();
    if !(params.s() - codim_p - r as f64 > 1e-12) {
        return Err(Error::param(format!(
            "traces of order {r} need s > r + (n-l)/p = {}, got s = {}",
            r as f64 + codim_p,
            params.s()
        )));
    }
    if f.grid().alignment() != Alignment::NodeCentered {
        return Err(Error::Alignment(
            "trace jets need a node-centered grid".into(),
        ));
    }
    let mut ladder = Vec::new();
    let mut next = f.coarsened();
    while let Some(c) = next.take() {
        if ladder.len() == 2 || c.grid().shape().iter().any(|&k| k < 2 * MIN_DIFF_POINTS) {
            break;
        }
        next = c.coarsened();
        ladder.push(c);
    }
    let mut components = Vec::new();
    for alpha in MultiIndex::perpendicular_up_to(split, r) {
        let d = derivative(f, &alpha)?;
        let mut trace = plane_trace(&d, split)?;
        let sup = if alpha.order() > 0 && !ladder.is_empty() {
            let mut traces = vec![trace.clone()];
            for c in &ladder {
                traces.push(plane_trace(&derivative(c, &alpha)?, split)?);
            }
            extrapolated_sup(&traces)
        } else {
            trace.max_abs()
        };
        let amb = d.max_abs();
        let smoothness = params.s() - codim_p - alpha.order() as f64;
        let norm = if !f.is_inner_supported() {
            None
        } else if split.l() == 0 {
            Some(sup)
        } else {
            trace.set_inner_supported();
            Some(triebel_norm(&trace, smoothness, params.p(), params.p())?.value)
        };
        components.push(TraceComponent {
            alpha,
            smoothness,
            sup,
            relative_sup: if amb > 0.0 { sup / amb } else { 0.0 },
            norm,
            trace,
        });
    }
    Ok(TraceJet {
        order: r,
        components,
    })
}

/// `int_collar |D^alpha f|^p d^{-(n-l)}` for one `alpha`.
#[derive(Clone, Debug, Serialize)]
pub struct CollarTerm {
    pub alpha: MultiIndex,
    pub report: NormReport,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReinforcedNormBreakdown {
    pub class: CriticalityClass,
    pub f_norm: f64,
    pub collar_terms: Vec<CollarTerm>,
    /// `f_norm + sum collar values`, infinite when a term is divergent.
    pub total: f64,
    pub divergent: bool,
}

/// Reinforced norm: `||f|F^s_{p,q}||` alone in the non-critical class, plus
/// `sum_{|alpha| = r, alpha perp} (int_collar |D^alpha f|^p d^{-(n-l)})^{1/p}`
/// at `s = r + (n-l)/p`.
pub fn reinforced_norm(
    expr: &dyn Expr,
    params: &SmoothnessParams,
    settings: &NormSettings,
) -> Result<ReinforcedNormBreakdown> {
    let f_norm = expr_triebel_norm(expr, params, settings)?.value;
    reinforced_norm_given(expr, params, settings, f_norm, &CollarCache::new())
}

/// Collar integrals of one function on one [`NormSettings`], keyed by
/// derivative, weight exponent, `p` and collar width. Shared between the
/// reinforced norm and the weighted characterization, whose collar terms
/// coincide at `s = (n-l)/p`.
#[derive(Debug, Default)]
pub struct CollarCache {
    map: Mutex<HashMap<(Vec<u32>, u64, u64, u64), NormReport>>,
}

impl CollarCache {
    pub fn new() -> Self {
        Self::default()
    }

    fn get(
        &self,
        expr: &dyn Expr,
        alpha: Option<&MultiIndex>,
        exponent: f64,
        params: &SmoothnessParams,
        settings: &NormSettings,
    ) -> Result<NormReport> {
        let key = (
            alpha.map(|a| a.entries().to_vec()).unwrap_or_default(),
            exponent.to_bits(),
            params.p().to_bits(),
            params.eps().to_bits(),
        );
        if let Some(r) = self.map.lock().expect("collar cache").get(&key) {
            return Ok(r.clone());
        }
        let split = params.split();
        let report = refined_derivative_lp_norm(
            expr,
            alpha,
            &collar_bounds(expr, split, settings),
            &settings.schedule,
            params.p(),
            &PlaneWeight::collar(split, exponent, params.eps()),
        )?;
        self.map
            .lock()
            .expect("collar cache")
            .insert(key, report.clone());
        Ok(report)
    }
}

/// [`reinforced_norm`] with `||f|F^s_{p,q}||` already known and collar
/// integrals taken from `cache`.
pub fn reinforced_norm_given(
    expr: &dyn Expr,
    params: &SmoothnessParams,
    settings: &NormSettings,
    f_norm: f64,
    cache: &CollarCache,
) -> Result<ReinforcedNormBreakdown> {
    let class = params.classify();
    let mut collar_terms = Vec::new();
    if let CriticalityClass::Critical(r) = class {
        let split = params.split();
        for alpha in MultiIndex::perpendicular_of_order(split, r as u32) {
            let report = cache.get(expr, Some(&alpha), split.codim() as f64, params, settings)?;
            collar_terms.push(CollarTerm { alpha, report });
        }
    }
    let divergent = collar_terms.iter().any(|t| t.report.divergent);
    let total = if divergent {
        f64::INFINITY
    } else {
        f_norm + collar_terms.iter().map(|t| t.report.value).sum::<f64>()
    };
    Ok(ReinforcedNormBreakdown {
        class,
        f_norm,
        collar_terms,
        total,
        divergent,
    })
}

/// `||f|F^s_{p,q}|| + ||min(d,1)^{-s} f | L_p||`.
///
/// The weighted term splits into the collar `{d < eps}`, refined over the
/// schedule, and its complement on the norm grid. The refinement history
/// records the full weighted integral.
pub fn rloc_equiv_norm(
    expr: &dyn Expr,
    params: &SmoothnessParams,
    settings: &NormSettings,
) -> Result<NormReport> {
    require_above_sigma(params)?;
    let cells = sample(expr, &settings.norm_grid(Alignment::CellCentered)?)?;
    let f_norm = triebel_norm(&cells, params.s(), params.p(), params.q())?.value;
    rloc_equiv_norm_given(expr, params, settings, f_norm, &cells, &CollarCache::new())
}

/// [`rloc_equiv_norm`] with `||f|F^s_{p,q}||` and the norm-grid samples
/// `cells` already known and the collar integral taken from `cache`.
pub fn rloc_equiv_norm_given(
    expr: &dyn Expr,
    params: &SmoothnessParams,
    settings: &NormSettings,
    f_norm: f64,
    cells: &GridFunction,
    cache: &CollarCache,
) -> Result<NormReport> {
    require_above_sigma(params)?;
    let (s, p) = (params.s(), params.p());
    let near = cache.get(expr, None, s * p, params, settings)?;
    let far_weight = PlaneWeight::truncated_whole(params.split(), s * p)
        .with_region(Region::Exterior(params.eps()));
    let far = weighted_integral(cells, p, &far_weight)?;
    let steps: Vec<RefinementStep> = near
        .refinement
        .iter()
        .map(|st| RefinementStep {
            h: st.h,
            integral: st.integral + far,
        })
        .collect();
    let mut report = report_from_steps(steps, NormMethod::RlocEquiv, p);
    report.value += f_norm;
    report.s = Some(s);
    report.q = Some(params.q());
    Ok(report)
}

/// Per-cube sampling for [`rloc_norm`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RlocSettings {
    /// Samples per axis of the local grid around each cube.
    pub points: usize,
}

impl RlocSettings {
    /// 32 points per axis for `n <= 2`, 16 beyond.
    pub fn for_dim(n: usize) -> Self {
        Self {
            points: if n <= 2 { 32 } else { 16 },
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RlocReport {
    /// Value, and cumulative level sums below the truncation level as
    /// refinement (`h = 2^-j`).
    pub report: NormReport,
    /// `sum_{Q at level j} ||rho_Q f|F||^p`.
    pub level_sums: BTreeMap<u32, f64>,
    pub cubes: usize,
    /// Cubes at the truncation level that failed acceptance.
    pub dropped: usize,
    /// Width of the uncovered slab around the plane.
    pub collar_width: f64,
}

fn local_grid(centre: &[f64], side: f64, points: usize) -> Result<GridBox> {
    GridBox::new(
        centre.iter().map(|v| v - 2.0 * side).collect(),
        centre.iter().map(|v| v + 2.0 * side).collect(),
        vec![4.0 * side / points as f64; centre.len()],
        Alignment::CellCentered,
    )
}

/// `rho_Q f` for every cube of `pou`, sampled on a local grid of side
/// `4 * side(Q)`, passed to `each` with the cube index.
fn localized<T: Send>(
    expr: &dyn Expr,
    pou: &PartitionOfUnity,
    settings: &RlocSettings,
    each: impl Fn(u32, &GridFunction) -> Result<T> + Sync,
    zero: impl Fn() -> T + Sync,
) -> Result<Vec<T>> {
    let dec = pou.decomposition();
    if dec.dim() != expr.dim() {
        return Err(Error::param("decomposition and function dimensions differ"));
    }
    if let Some(sup) = expr.support() {
        if !dec.bbox().contains_box(&sup) {
            return Err(Error::Support(format!(
                "support of `{}` is not inside the decomposition box",
                expr.describe()
            )));
        }
    }
    let points = settings.points.max(8);
    (0..dec.cubes().len())
        .into_par_iter()
        .map(|k| {
            let cube = dec.cubes()[k];
            let c = cube.centre();
            let side = cube.side();
            let grid = local_grid(&c, side, points)?;
            let mut samples = pou.values_on_grid(k, &pou.overlapping(k), &grid);
            let mut any = false;
            grid.for_each_point(|i, x| {
                if samples[i] != 0.0 {
                    samples[i] *= expr.eval(x);
                    any |= samples[i] != 0.0;
                }
            });
            if !any {
                return Ok(zero());
            }
            let mut g = GridFunction::new(grid, samples, format!("rho_{k} f"))?;
            g.declare_support(&cube.outer());
            each(cube.level(), &g)
        })
        .collect()
}

/// Littlewood-Paley energies of every `rho_Q f`, reusable across `s` for
/// `p = q = 2`.
#[derive(Clone, Debug)]
pub struct LocalizedEnergies {
    levels: Vec<u32>,
    energies: Vec<Vec<f64>>,
    j_max: u32,
    dropped: usize,
    collar_width: f64,
}

pub fn localized_energies(
    expr: &dyn Expr,
    pou: &PartitionOfUnity,
    settings: &RlocSettings,
) -> Result<LocalizedEnergies> {
    let dec = pou.decomposition();
    let points = settings.points.max(8);
    let mut plans = BTreeMap::new();
    for c in dec.cubes() {
        if !plans.contains_key(&c.level()) {
            plans.insert(
                c.level(),
                EnergyPlan::new(&local_grid(&c.centre(), c.side(), points)?),
            );
        }
    }
    let energies = localized(
        expr,
        pou,
        settings,
        |j, g| Ok(plans[&j].energies(g.samples())),
        Vec::new,
    )?;
    Ok(LocalizedEnergies {
        levels: dec.cubes().iter().map(|c| c.level()).collect(),
        energies,
        j_max: dec.j_max(),
        dropped: dec.dropped().len(),
        collar_width: dec.collar_width(),
    })
}

impl LocalizedEnergies {
    /// The `F^s_{2,2}` refined-localization norm from the cached energies.
    pub fn rloc_norm(&self, params: &SmoothnessParams) -> Result<RlocReport> {
        require_above_sigma(params)?;
        if params.p() != 2.0 || params.q() != 2.0 {
            return Err(Error::param("cached energies give p = q = 2 norms only"));
        }
        let terms = self
            .energies
            .iter()
            .map(|e| norm_from_energies(e, params.s()).powi(2))
            .collect();
        Ok(assemble(
            &self.levels,
            terms,
            self.j_max,
            params,
            self.dropped,
            self.collar_width,
        ))
    }
}

fn assemble(
    levels: &[u32],
    terms: Vec<f64>,
    j_max: u32,
    params: &SmoothnessParams,
    dropped: usize,
    collar_width: f64,
) -> RlocReport {
    let mut level_sums = BTreeMap::new();
    for (&j, t) in levels.iter().zip(&terms) {
        *level_sums.entry(j).or_insert(0.0) += *t;
    }
    let p = params.p();
    let total: f64 = level_sums.values().sum();
    // the truncation level carries the stretched bumps next to the uncovered slab
    let mut acc = 0.0;
    let steps: Vec<RefinementStep> = level_sums
        .iter()
        .filter(|(&j, _)| j < j_max)
        .map(|(&j, &v)| {
            acc += v;
            RefinementStep {
                h: 0.5f64.powi(j as i32),
                integral: acc,
            }
        })
        .collect();
    let mut report = if steps.is_empty() {
        NormReport::single(
            total.powf(1.0 / p),
            NormMethod::Rloc,
            p,
            0.5f64.powi(j_max as i32),
        )
    } else {
        report_from_steps(steps, NormMethod::Rloc, p)
    };
    report.value = total.powf(1.0 / p);
    report.s = Some(params.s());
    report.q = Some(params.q());
    RlocReport {
        report,
        level_sums,
        cubes: levels.len(),
        dropped,
        collar_width,
    }
}

/// `(sum_Q ||rho_Q f | F^s_{p,q}||^p)^{1/p}` over the Whitney cubes of
/// `pou`, each term on a local grid of side `4 * side(Q)`.
///
/// Divergence is judged from the cumulative sums over the levels below the
/// truncation level, the analogue of halving `h`.
pub fn rloc_norm(
    expr: &dyn Expr,
    pou: &PartitionOfUnity,
    params: &SmoothnessParams,
    settings: &RlocSettings,
) -> Result<RlocReport> {
    require_above_sigma(params)?;
    let (s, p, q) = (params.s(), params.p(), params.q());
    if p == 2.0 && q == 2.0 {
        return localized_energies(expr, pou, settings)?.rloc_norm(params);
    }
    let dec = pou.decomposition();
    let terms = localized(
        expr,
        pou,
        settings,
        |_, g| Ok(triebel_norm(g, s, p, q)?.value.powf(p)),
        || 0.0,
    )?;
    let levels: Vec<u32> = dec.cubes().iter().map(|c| c.level()).collect();
    Ok(assemble(
        &levels,
        terms,
        dec.j_max(),
        params,
        dec.dropped().len(),
        dec.collar_width(),
    ))
}

/// `||f(lambda .)|F|| / (lambda^{s-n/p} ||f|F||)` for `f = profile(./lambda)`,
/// both sampled with `points` cells per axis on twice their support.
pub fn homogeneity_ratio(
    profile: Arc<dyn Expr>,
    lambda: f64,
    params: &SmoothnessParams,
    points: usize,
) -> Result<f64> {
    require_above_sigma(params)?;
    let (s, p, q) = (params.s(), params.p(), params.q());
    scaled_pair(
        profile,
        lambda,
        points,
        |g| Ok(triebel_norm(g, s, p, q)?.value),
        s - params.split().n() as f64 / p,
    )
}

/// The `s = 0` surrogate of [`homogeneity_ratio`] with plain `L_p` norms.
pub fn lp_homogeneity_ratio(
    profile: Arc<dyn Expr>,
    lambda: f64,
    p: f64,
    points: usize,
) -> Result<f64> {
    let n = profile.dim() as f64;
    scaled_pair(profile, lambda, points, |g| Ok(lp_norm(g, p)), -n / p)
}

fn scaled_pair(
    profile: Arc<dyn Expr>,
    lambda: f64,
    points: usize,
    norm: impl Fn(&GridFunction) -> Result<f64>,
    exponent: f64,
) -> Result<f64> {
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(Error::param(format!(
            "dilation factor {lambda} must lie in (0, 1]"
        )));
    }
    let sup = profile.support().ok_or_else(|| {
        Error::Support(format!("`{}` declares no support box", profile.describe()))
    })?;
    if !sup
        .lower
        .iter()
        .chain(&sup.upper)
        .all(|v| v.abs() <= 1.0 + 1e-12)
    {
        return Err(Error::Support(
            "profile must be supported in the unit cube".into(),
        ));
    }
    let n = profile.dim();
    let unit = GridBox::uniform(
        &Aabb::cube(n, 2.0),
        4.0 / points as f64,
        Alignment::CellCentered,
    )?;
    let small = GridBox::uniform(
        &Aabb::cube(n, 2.0 * lambda),
        4.0 * lambda / points as f64,
        Alignment::CellCentered,
    )?;
    let f = Dilated::new(profile.clone(), 1.0 / lambda);
    let num = norm(&sample(profile.as_ref(), &unit)?)?;
    let den = norm(&sample(&f, &small)?)?;
    if !(den > 0.0) {
        return Err(Error::Degenerate("zero norm".into()));
    }
    Ok(num / (lambda.powf(exponent) * den))
}

/// `sum_axis || ||g along axis | F^s_{p,p}(R)|| | L_p || / ||g | F^s_{p,p}||`.
pub fn fubini_ratio(g: &GridFunction, params: &SmoothnessParams) -> Result<f64> {
    require_above_sigma(params)?;
    let n = g.grid().dim();
    if !(2..=3).contains(&n) {
        return Err(Error::param(format!(
            "Fubini ratio is computed for n = 2, 3, got {n}"
        )));
    }
    let (s, p) = (params.s(), params.p());
    let den = triebel_norm(g, s, p, p)?.value;
    if !(den > 0.0) {
        return Err(Error::Degenerate("zero norm".into()));
    }
    let mut num = 0.0;
    for axis in 0..n {
        num += line_triebel_norm(g, axis, s, p)?;
    }
    Ok(num / den)
}
