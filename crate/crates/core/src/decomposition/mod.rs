//! Corpus experiments for the decomposition of refined-localization spaces
//! into reinforced spaces with vanishing traces.

pub mod corpus;
pub mod experiment;
pub mod output;
pub mod probe;

use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::discretize::{
    level_energies, norm_from_energies, sample, triebel_norm, Aabb, Alignment, Expr, GridBox, GridFunction,
    NormReport,
};
use crate::error::{Error, Result};
use crate::geometry::{CriticalityClass, PlaneSplit, SmoothnessParams};
use crate::spaces::{
    localized_energies, reinforced_norm_given, CollarCache, rloc_equiv_norm_given, rloc_norm, trace_jet,
    NormSettings, ReinforcedNormBreakdown, RlocReport, RlocSettings, TRACE_VANISH_TOL,
};
use crate::whitney::{partition_of_unity_sampled, whitney_decompose, PartitionOfUnity};

pub use corpus::{corpus, corpus_entry, select_corpus, CorpusEntry, TraceProfile};
pub use experiment::{
    dilation_brackets, run_critical_experiment, run_noncritical_experiment, DilationBracket,
    ExperimentRecord, Measured, RecordStatus, DILATIONS,
};
pub use output::{
    membership_summary, write_experiment_csv, write_membership_csv, write_routes_csv,
    MembershipSummary,
};
pub use probe::{reinforced_divergence_probe, ProbeRecord, ProbeVerdict};

/// A named point of the parameter grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ParamSet {
    pub id: String,
    pub params: SmoothnessParams,
}

impl ParamSet {
    pub fn new(split: PlaneSplit, s: &str, p: &str, q: f64) -> Result<Self> {
        let params = SmoothnessParams::parse(split, s, p, q)?;
        Ok(Self {
            id: format!("n{}l{}-s{s}-p{p}", split.n(), split.l()),
            params,
        })
    }

    /// Parses `n=2,l=1,s=3/2,p=2[,q=2][,eps=0.5]`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut kv = BTreeMap::new();
        for part in text.split(',') {
            let (k, v) = part.split_once('=').ok_or_else(|| {
                Error::param(format!("expected key=value in parameter set `{text}`"))
            })?;
            kv.insert(k.trim().to_string(), v.trim().to_string());
        }
        let get = |k: &str| {
            kv.get(k)
                .cloned()
                .ok_or_else(|| Error::param(format!("parameter set `{text}` lacks `{k}`")))
        };
        let int = |k: &str| -> Result<usize> {
            get(k)?
                .parse()
                .map_err(|_| Error::param(format!("`{k}` must be a non-negative integer")))
        };
        let split = PlaneSplit::new(int("n")?, int("l")?)?;
        let q = match kv.get("q") {
            Some(v) => crate::geometry::parse_number(v)?,
            None => 2.0,
        };
        let mut set = Self::new(split, &get("s")?, &get("p")?, q)?;
        if let Some(e) = kv.get("eps") {
            set.params = set.params.with_eps(crate::geometry::parse_number(e)?)?;
        }
        for k in kv.keys() {
            if !["n", "l", "s", "p", "q", "eps"].contains(&k.as_str()) {
                return Err(Error::param(format!("unknown parameter `{k}`")));
            }
        }
        if q != 2.0 {
            set.id.push_str(&format!("-q{q}"));
        }
        Ok(set)
    }
}

/// The default grid: ten sets spanning `NonCritical r in {-1, 0, 1}` and
/// `Critical r in {0, 1, 2}`, with `p = 3/2`, a three-dimensional split and
/// a point boundary.
pub fn default_grid() -> Vec<ParamSet> {
    let s21 = PlaneSplit::new(2, 1).expect("valid split");
    let s31 = PlaneSplit::new(3, 1).expect("valid split");
    let s20 = PlaneSplit::new(2, 0).expect("valid split");
    let mut out = Vec::new();
    for s in ["1/4", "3/4", "7/4", "1/2", "3/2", "5/2"] {
        out.push(ParamSet::new(s21, s, "2", 2.0).expect("valid set"));
    }
    out.push(ParamSet::new(s21, "5/3", "3/2", 2.0).expect("valid set"));
    for s in ["1", "3/2"] {
        out.push(ParamSet::new(s31, s, "2", 2.0).expect("valid set"));
    }
    out.push(ParamSet::new(s20, "3/2", "2", 2.0).expect("valid set"));
    out
}

/// `default-grid`, or `;`-separated sets for [`ParamSet::parse`].
pub fn select_params(spec: &str) -> Result<Vec<ParamSet>> {
    let spec = spec.trim();
    if spec == "default-grid" || spec == "default" {
        return Ok(default_grid());
    }
    spec.split(';')
        .filter(|t| !t.trim().is_empty())
        .map(ParamSet::parse)
        .collect()
}

/// Membership predicted from the reinforced verdict and the trace condition.
///
/// NonCritical `r >= 0`: reinforced and traces of order `<= r` vanish.
/// NonCritical `r = -1`: reinforced. Critical `r >= 1`: reinforced and
/// traces of order `<= r - 1` vanish. Critical `r = 0`: reinforced.
pub fn predicted_in_rloc(class: CriticalityClass, in_reinforced: bool, traces_vanish: bool) -> bool {
    match class.trace_order() {
        Some(_) => in_reinforced && traces_vanish,
        None => in_reinforced,
    }
}

/// One perpendicular trace of the jet.
#[derive(Clone, Debug, Serialize)]
pub struct TraceEntry {
    pub alpha: String,
    pub sup: f64,
    pub relative_sup: f64,
    pub norm: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TraceSummary {
    /// Highest order whose trace must vanish; `None` without a trace condition.
    pub required_order: Option<u32>,
    pub tolerance: f64,
    /// The condition holds at `tolerance`.
    pub vanish: bool,
    /// The condition holds at `tolerance / 10`.
    pub vanish_strict: bool,
    /// Node spacing of the sampled jet.
    pub h: Option<f64>,
    pub components: Vec<TraceEntry>,
}

impl TraceSummary {
    pub fn max_relative(&self) -> f64 {
        self.components
            .iter()
            .map(|c| c.relative_sup)
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MembershipReport {
    pub entry: String,
    pub params_id: String,
    pub n: usize,
    pub l: usize,
    pub s: f64,
    pub p: f64,
    pub q: f64,
    pub class: CriticalityClass,
    pub in_f: bool,
    pub f_norm: f64,
    pub trace: TraceSummary,
    pub in_reinforced: bool,
    pub reinforced: ReinforcedNormBreakdown,
    pub in_rloc: bool,
    pub rloc_equiv: NormReport,
    pub predicted_in_rloc: bool,
    pub consistent_with_theorem: bool,
    /// Same verdict pattern with the trace tolerance divided by ten.
    pub tolerance_stable: bool,
    pub wall_time: f64,
}

/// A corpus function sampled once for all parameter sets of one dimension.
struct Prepared {
    expr: Arc<dyn Expr>,
    settings: NormSettings,
    cells: GridFunction,
    energies: Option<Vec<f64>>,
    nodes: Option<GridFunction>,
    collars: CollarCache,
}

impl Prepared {
    fn new(
        entry: &CorpusEntry,
        split: PlaneSplit,
        need_energies: bool,
        need_nodes: bool,
        schedule: Option<&[f64]>,
    ) -> Result<Self> {
        let expr = entry.expr(split.n())?;
        let mut settings = NormSettings::for_expr(expr.as_ref())?;
        if let Some(s) = schedule {
            settings = settings.with_schedule(s.to_vec());
        }
        let cells = sample(expr.as_ref(), &settings.norm_grid(Alignment::CellCentered)?)?;
        let energies = need_energies.then(|| level_energies(&cells));
        let nodes = if need_nodes {
            Some(trace_nodes(expr.as_ref(), &settings, split)?)
        } else {
            None
        };
        Ok(Self {
            expr,
            settings,
            cells,
            energies,
            nodes,
            collars: CollarCache::new(),
        })
    }

    fn f_norm(&self, params: &SmoothnessParams) -> Result<f64> {
        match &self.energies {
            Some(e) if params.p() == 2.0 && params.q() == 2.0 => {
                Ok(norm_from_energies(e, params.s()))
            }
            _ => Ok(triebel_norm(&self.cells, params.s(), params.p(), params.q())?.value),
        }
    }
}

/// Node grid for trace jets: the norm box at `norm_h / 2`; from dimension
/// three on only the slab within `48` nodes of the plane along normal axes.
pub(crate) fn trace_nodes(
    expr: &dyn Expr,
    settings: &NormSettings,
    split: PlaneSplit,
) -> Result<GridFunction> {
    let h = settings.norm_h / 2.0;
    let mut bounds = settings.bounds.clone();
    if expr.dim() >= 3 {
        for a in split.normal_axes() {
            bounds.lower[a] = bounds.lower[a].max(-48.0 * h);
            bounds.upper[a] = bounds.upper[a].min(48.0 * h);
        }
    }
    sample(expr, &GridBox::uniform(&bounds, h, Alignment::NodeCentered)?)
}

fn trace_summary(
    nodes: Option<&GridFunction>,
    params: &SmoothnessParams,
    tol: f64,
) -> Result<TraceSummary> {
    let required = params.classify().trace_order();
    let (Some(r), Some(nodes)) = (required, nodes) else {
        return Ok(TraceSummary {
            required_order: required,
            tolerance: tol,
            vanish: true,
            vanish_strict: true,
            h: None,
            components: Vec::new(),
        });
    };
    let jet = trace_jet(nodes, params, r)?;
    Ok(TraceSummary {
        required_order: Some(r),
        tolerance: tol,
        vanish: jet.vanishes_up_to(r, tol),
        vanish_strict: jet.vanishes_up_to(r, tol / 10.0),
        h: Some(nodes.grid().h_max()),
        components: jet
            .components
            .iter()
            .map(|c| TraceEntry {
                alpha: c.alpha.to_string(),
                sup: c.sup,
                relative_sup: c.relative_sup,
                norm: c.norm,
            })
            .collect(),
    })
}

fn report_for(entry: &CorpusEntry, set: &ParamSet, prep: &Prepared) -> Result<MembershipReport> {
    let start = std::time::Instant::now();
    let params = &set.params;
    let split = params.split();
    let class = params.classify();
    let f_norm = prep.f_norm(params)?;
    let trace = trace_summary(prep.nodes.as_ref(), params, TRACE_VANISH_TOL)?;
    let expr = prep.expr.as_ref();
    let reinforced = reinforced_norm_given(expr, params, &prep.settings, f_norm, &prep.collars)?;
    let rloc_equiv = rloc_equiv_norm_given(
        expr,
        params,
        &prep.settings,
        f_norm,
        &prep.cells,
        &prep.collars,
    )?;
    let in_f = f_norm.is_finite();
    let in_reinforced = in_f && !reinforced.divergent;
    let in_rloc = in_f && rloc_equiv.is_finite();
    let predicted = predicted_in_rloc(class, in_reinforced, trace.vanish);
    let predicted_strict = predicted_in_rloc(class, in_reinforced, trace.vanish_strict);
    Ok(MembershipReport {
        entry: entry.id().to_string(),
        params_id: set.id.clone(),
        n: split.n(),
        l: split.l(),
        s: params.s(),
        p: params.p(),
        q: params.q(),
        class,
        in_f,
        f_norm,
        trace,
        in_reinforced,
        reinforced,
        in_rloc,
        rloc_equiv,
        predicted_in_rloc: predicted,
        consistent_with_theorem: predicted == in_rloc,
        tolerance_stable: predicted == predicted_strict,
        wall_time: start.elapsed().as_secs_f64(),
    })
}

/// Membership verdicts of one corpus function for one parameter set.
pub fn membership_report(entry: &CorpusEntry, set: &ParamSet) -> Result<MembershipReport> {
    let params = &set.params;
    let prep = Prepared::new(
        entry,
        params.split(),
        params.p() == 2.0 && params.q() == 2.0,
        params.classify().trace_order().is_some(),
        None,
    )?;
    report_for(entry, set, &prep)
}

/// Reports for every `(entry, set)` pair in corpus-major order. Each
/// function is sampled once per plane split.
pub fn membership_reports(
    entries: &[CorpusEntry],
    sets: &[ParamSet],
) -> Result<Vec<MembershipReport>> {
    membership_reports_with(entries, sets, None)
}

/// [`membership_reports`] with the collar refinement schedule replaced by
/// `schedule` (decreasing spacings) for every function.
pub fn membership_reports_with(
    entries: &[CorpusEntry],
    sets: &[ParamSet],
    schedule: Option<&[f64]>,
) -> Result<Vec<MembershipReport>> {
    if let Some(s) = schedule {
        if s.len() < 2 || !s.windows(2).all(|w| w[1] < w[0]) || !(s[s.len() - 1] > 0.0) {
            return Err(Error::param(
                "a refinement schedule needs at least 2 positive, strictly decreasing spacings",
            ));
        }
    }
    let key = |s: &ParamSet| (s.params.split().n(), s.params.split().l());
    let rows: Vec<Result<Vec<MembershipReport>>> = entries
        .par_iter()
        .map(|entry| {
            let mut by_split = BTreeMap::new();
            for set in sets {
                if by_split.contains_key(&key(set)) {
                    continue;
                }
                let same = sets.iter().filter(|s| key(s) == key(set));
                let energies = same
                    .clone()
                    .any(|s| s.params.p() == 2.0 && s.params.q() == 2.0);
                let nodes = same
                    .clone()
                    .any(|s| s.params.classify().trace_order().is_some());
                by_split.insert(
                    key(set),
                    Prepared::new(entry, set.params.split(), energies, nodes, schedule)?,
                );
            }
            sets.iter()
                .map(|set| report_for(entry, set, &by_split[&key(set)]))
                .collect()
        })
        .collect();
    let mut out = Vec::new();
    for r in rows {
        out.extend(r?);
    }
    Ok(out)
}

/// Whitney truncation and per-cube sampling of the partition route.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RouteSettings {
    pub j_max: u32,
    pub rloc: RlocSettings,
}

impl RouteSettings {
    /// `j_max = 7` with 32 points per cube axis for `(2, 1)`, `j_max = 10`
    /// for a point in the plane, `j_max = 6` with 8 points from dimension
    /// three on.
    pub fn for_split(split: PlaneSplit) -> Self {
        match (split.n(), split.l()) {
            (n, _) if n >= 3 => Self {
                j_max: 6,
                rloc: RlocSettings { points: 8 },
            },
            (_, 0) => Self {
                j_max: 10,
                rloc: RlocSettings::for_dim(split.n()),
            },
            _ => Self {
                j_max: 7,
                rloc: RlocSettings::for_dim(split.n()),
            },
        }
    }
}

/// The two membership verdicts for one `(entry, set)` pair.
#[derive(Clone, Debug, Serialize)]
pub struct RouteComparison {
    pub entry: String,
    pub params_id: String,
    pub equiv_in_rloc: bool,
    pub partition_in_rloc: bool,
    pub agree: bool,
    pub partition_value: f64,
    pub level_sums: Vec<(u32, f64)>,
    pub j_max: u32,
    pub equiv_value: f64,
}

/// Decomposition box: the cube `[-R, R]^n`, `R` the integer ceiling of
/// the support's reach.
fn route_box(expr: &dyn Expr) -> Result<Aabb> {
    let sup = expr
        .support()
        .ok_or_else(|| Error::Support(format!("`{}` declares no support", expr.describe())))?;
    let reach = sup
        .lower
        .iter()
        .chain(&sup.upper)
        .fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(Aabb::cube(expr.dim(), reach.ceil().max(1.0)))
}

fn partition_for(split: PlaneSplit, bbox: &Aabb, j_max: u32) -> Result<PartitionOfUnity> {
    let dec = whitney_decompose(split, bbox, j_max)?;
    partition_of_unity_sampled(&dec, 1, 0)
}

/// Compares the partition-norm verdict with the weighted characterization
/// (`equiv` holds the matching reports) for every `(entry, set)` pair.
/// Energies are shared across the `p = q = 2` sets of one split.
pub fn compare_rloc_routes(
    entries: &[CorpusEntry],
    sets: &[ParamSet],
    equiv: &[MembershipReport],
) -> Result<Vec<RouteComparison>> {
    compare_routes_where(entries, sets, equiv, |_, _| true)
}

/// Which `(entry, set)` pairs get the partition route.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RouteCoverage {
    None,
    /// Every entry on two-dimensional `p = q = 2` sets, [`ROUTE_SAMPLE`]
    /// elsewhere.
    Sample,
    All,
}

impl std::str::FromStr for RouteCoverage {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "none" => Ok(Self::None),
            "sample" => Ok(Self::Sample),
            "all" => Ok(Self::All),
            other => Err(Error::param(format!(
                "route coverage `{other}`: expected none, sample or all"
            ))),
        }
    }
}

/// Entries routed through the partition norm on the expensive sets under
/// [`RouteCoverage::Sample`]: one per trace profile that matters there.
pub const ROUTE_SAMPLE: [&str; 4] = ["gaussian", "z_gaussian", "z2_gaussian", "bump_off_plane"];

/// Whether a set is cheap for the partition route.
pub fn route_is_cheap(set: &ParamSet) -> bool {
    let p = &set.params;
    p.split().n() == 2 && p.p() == 2.0 && p.q() == 2.0
}

/// [`compare_rloc_routes`] restricted by `coverage`, in corpus-major order.
pub fn compare_rloc_routes_covered(
    entries: &[CorpusEntry],
    sets: &[ParamSet],
    equiv: &[MembershipReport],
    coverage: RouteCoverage,
) -> Result<Vec<RouteComparison>> {
    match coverage {
        RouteCoverage::None => Ok(Vec::new()),
        RouteCoverage::All => compare_rloc_routes(entries, sets, equiv),
        RouteCoverage::Sample => compare_routes_where(entries, sets, equiv, |e, s| {
            route_is_cheap(s) || ROUTE_SAMPLE.contains(&e.id())
        }),
    }
}

fn compare_routes_where(
    entries: &[CorpusEntry],
    sets: &[ParamSet],
    equiv: &[MembershipReport],
    include: impl Fn(&CorpusEntry, &ParamSet) -> bool,
) -> Result<Vec<RouteComparison>> {
    let mut partitions: BTreeMap<(usize, usize, String), Arc<PartitionOfUnity>> = BTreeMap::new();
    let mut out = Vec::new();
    for entry in entries {
        let mut cached: BTreeMap<(usize, usize), crate::spaces::LocalizedEnergies> =
            BTreeMap::new();
        for set in sets.iter().filter(|s| include(entry, s)) {
            let params = &set.params;
            let split = params.split();
            let route = RouteSettings::for_split(split);
            let expr = entry.expr(split.n())?;
            let bbox = route_box(expr.as_ref())?;
            let key = (split.n(), split.l(), format!("{:?}", bbox.upper));
            let pou = match partitions.get(&key) {
                Some(p) => p.clone(),
                None => {
                    let p = Arc::new(partition_for(split, &bbox, route.j_max)?);
                    partitions.insert(key, p.clone());
                    p
                }
            };
            let report: RlocReport = if params.p() == 2.0 && params.q() == 2.0 {
                let k = (split.n(), split.l());
                if !cached.contains_key(&k) {
                    cached.insert(k, localized_energies(expr.as_ref(), &pou, &route.rloc)?);
                }
                cached[&k].rloc_norm(params)?
            } else {
                rloc_norm(expr.as_ref(), &pou, params, &route.rloc)?
            };
            let m = equiv
                .iter()
                .find(|r| r.entry == entry.id() && r.params_id == set.id)
                .ok_or_else(|| {
                    Error::param(format!(
                        "no membership report for {} at {}",
                        entry.id(),
                        set.id
                    ))
                })?;
            let partition_in_rloc = report.report.is_finite();
            out.push(RouteComparison {
                entry: entry.id().to_string(),
                params_id: set.id.clone(),
                equiv_in_rloc: m.in_rloc,
                partition_in_rloc,
                agree: partition_in_rloc == m.in_rloc,
                partition_value: report.report.value,
                level_sums: report.level_sums.into_iter().collect(),
                j_max: route.j_max,
                equiv_value: m.rloc_equiv.value,
            });
        }
    }
    Ok(out)
}
