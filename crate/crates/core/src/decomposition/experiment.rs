//! Dilation-family experiments for the weighted characterization.

use std::collections::BTreeMap;
use std::fmt;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use super::{CorpusEntry, ParamSet};
use crate::discretize::{
    refined_derivative_lp_norm, sample, triebel_norm, Alignment, Expr, GridBox, NormReport,
    PlaneWeight,
};
use crate::error::{Error, Result};
use crate::geometry::{CriticalityClass, MultiIndex, SmoothnessParams};
use crate::spaces::{collar_bounds, reinforced_norm, trace_jet, NormSettings, TRACE_VANISH_TOL};

/// Dilation exponents `k` of the family `f(2^k x)`.
pub const DILATIONS: std::ops::RangeInclusive<u32> = 0..=3;

/// A value with the spacing it was computed at and its relative change
/// against the next coarser spacing.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Measured {
    pub value: f64,
    pub h: f64,
    pub delta: f64,
}

impl Measured {
    fn from_report(r: &NormReport) -> Self {
        Self {
            value: if r.divergent { f64::INFINITY } else { r.value },
            h: r.h,
            delta: r.discretization_error.unwrap_or(0.0),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RecordStatus {
    /// Quotient finite and refinement-stable.
    Bounded,
    /// Trace condition fails; the weighted term is refinement-divergent.
    Divergent,
    /// Trace condition fails but the weighted term stays finite.
    NotFlagged,
    /// Traces vanish but the reinforced term diverges: the function lies
    /// in `F^s` and not in the reinforced space.
    Gap,
    /// Trace condition holds but a weighted term diverged anyway.
    Unexpected,
}

impl fmt::Display for RecordStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RecordStatus::Bounded => "bounded",
            RecordStatus::Divergent => "divergent",
            RecordStatus::NotFlagged => "not-flagged",
            RecordStatus::Gap => "gap",
            RecordStatus::Unexpected => "unexpected",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentRecord {
    pub experiment: &'static str,
    pub entry: String,
    pub params_id: String,
    pub class: CriticalityClass,
    pub dilation: u32,
    /// `||d^{-s} f | L_p(collar)||`.
    pub numerator: Measured,
    /// `||f | F^s_{p,q}||` (non-critical) or the Hardy-chain sum (critical).
    pub denominator: Option<Measured>,
    pub quotient: Option<f64>,
    pub status: RecordStatus,
    pub wall_time: f64,
}

/// `||f|F||` at `norm_h` with the relative change against `2 norm_h`.
fn measured_triebel(expr: &dyn Expr, params: &SmoothnessParams, st: &NormSettings) -> Result<Measured> {
    let at = |h: f64| -> Result<f64> {
        let g = sample(expr, &GridBox::uniform(&st.bounds, h, Alignment::CellCentered)?)?;
        Ok(triebel_norm(&g, params.s(), params.p(), params.q())?.value)
    };
    let fine = at(st.norm_h)?;
    let coarse = at(2.0 * st.norm_h)?;
    Ok(Measured {
        value: fine,
        h: st.norm_h,
        delta: if fine > 0.0 {
            (fine - coarse).abs() / fine
        } else {
            0.0
        },
    })
}

fn collar_norm(
    expr: &dyn Expr,
    alpha: Option<&MultiIndex>,
    exponent: f64,
    params: &SmoothnessParams,
    st: &NormSettings,
) -> Result<NormReport> {
    let weight = PlaneWeight::collar(params.split(), exponent, params.eps());
    refined_derivative_lp_norm(
        expr,
        alpha,
        &collar_bounds(expr, params.split(), st),
        &st.schedule,
        params.p(),
        &weight,
    )
}

fn traces_vanish(expr: &dyn Expr, params: &SmoothnessParams, order: Option<u32>) -> Result<bool> {
    let Some(r) = order else {
        return Ok(true);
    };
    let nodes = super::trace_nodes(expr, &NormSettings::for_expr(expr)?, params.split())?;
    Ok(trace_jet(&nodes, params, r)?.vanishes_up_to(r, TRACE_VANISH_TOL))
}

fn quotient(num: &Measured, den: &Measured) -> Option<f64> {
    (num.value.is_finite() && den.value > 0.0).then(|| num.value / den.value)
}

fn noncritical_entry(entry: &CorpusEntry, set: &ParamSet) -> Result<Vec<ExperimentRecord>> {
    let params = &set.params;
    let n = params.split().n();
    let class = params.classify();
    let sp = params.s() * params.p();
    let vanish = traces_vanish(entry.expr(n)?.as_ref(), params, class.trace_order())?;
    let ks: Vec<u32> = if vanish { DILATIONS.collect() } else { vec![0] };
    let mut out = Vec::new();
    for k in ks {
        let start = Instant::now();
        let f = entry.dilated(n, k)?;
        let st = NormSettings::for_expr(f.as_ref())?;
        let num_report = collar_norm(f.as_ref(), None, sp, params, &st)?;
        let numerator = Measured::from_report(&num_report);
        let (denominator, status) = if vanish {
            let den = measured_triebel(f.as_ref(), params, &st)?;
            let status = if num_report.divergent {
                RecordStatus::Unexpected
            } else {
                RecordStatus::Bounded
            };
            (Some(den), status)
        } else if num_report.divergent {
            (None, RecordStatus::Divergent)
        } else {
            (None, RecordStatus::NotFlagged)
        };
        out.push(ExperimentRecord {
            experiment: "noncritical",
            entry: entry.id().to_string(),
            params_id: set.id.clone(),
            class,
            dilation: k,
            numerator,
            quotient: denominator.as_ref().and_then(|d| quotient(&numerator, d)),
            denominator,
            status,
            wall_time: start.elapsed().as_secs_f64(),
        });
    }
    Ok(out)
}

/// For each entry whose traces of order `<= r` vanish: the quotient
/// `||d^{-s} f|L_p(collar)|| / ||f|F^s_{p,q}||` over the dilation family.
/// For the other entries: the weighted term at `k = 0`, expected to be
/// flagged divergent. Records follow corpus order.
pub fn run_noncritical_experiment(
    entries: &[CorpusEntry],
    set: &ParamSet,
) -> Result<Vec<ExperimentRecord>> {
    if set.params.classify().is_critical() {
        return Err(Error::param(format!(
            "{} is critical; use the critical experiment",
            set.id
        )));
    }
    collect(entries, |e| noncritical_entry(e, set))
}

fn critical_entry(entry: &CorpusEntry, set: &ParamSet) -> Result<Vec<ExperimentRecord>> {
    let params = &set.params;
    let split = params.split();
    let n = split.n();
    let class = params.classify();
    let r = class.r() as u32;
    let codim = split.codim() as f64;
    let sp = params.s() * params.p();
    let base = entry.expr(n)?;
    let vanish = traces_vanish(base.as_ref(), params, class.trace_order())?;
    let record = |k: u32,
                  numerator: Measured,
                  denominator: Option<Measured>,
                  status: RecordStatus,
                  start: Instant| ExperimentRecord {
        experiment: "critical",
        entry: entry.id().to_string(),
        params_id: set.id.clone(),
        class,
        dilation: k,
        numerator,
        quotient: denominator.as_ref().and_then(|d| quotient(&numerator, d)),
        denominator,
        status,
        wall_time: start.elapsed().as_secs_f64(),
    };
    let start = Instant::now();
    if !vanish {
        let st = NormSettings::for_expr(base.as_ref())?;
        let num = collar_norm(base.as_ref(), None, sp, params, &st)?;
        let status = if num.divergent {
            RecordStatus::Divergent
        } else {
            RecordStatus::NotFlagged
        };
        return Ok(vec![record(0, Measured::from_report(&num), None, status, start)]);
    }
    let st = NormSettings::for_expr(base.as_ref())?;
    let reinforced = reinforced_norm(base.as_ref(), params, &st)?;
    if reinforced.divergent {
        let num = collar_norm(base.as_ref(), None, sp, params, &st)?;
        let chain = reinforced
            .collar_terms
            .iter()
            .map(|t| Measured::from_report(&t.report))
            .fold(None, |acc: Option<Measured>, m| {
                Some(match acc {
                    None => m,
                    Some(a) => Measured {
                        value: a.value + m.value,
                        h: m.h,
                        delta: a.delta.max(m.delta),
                    },
                })
            });
        return Ok(vec![record(
            0,
            Measured::from_report(&num),
            chain,
            RecordStatus::Gap,
            start,
        )]);
    }
    let mut out = Vec::new();
    for k in DILATIONS {
        let start = Instant::now();
        let f = entry.dilated(n, k)?;
        let st = NormSettings::for_expr(f.as_ref())?;
        let num = collar_norm(f.as_ref(), None, sp, params, &st)?;
        let mut chain = Measured {
            value: 0.0,
            h: 0.0,
            delta: 0.0,
        };
        let mut diverged = num.divergent;
        for alpha in MultiIndex::perpendicular_of_order(split, r) {
            let t = collar_norm(f.as_ref(), Some(&alpha), codim, params, &st)?;
            diverged |= t.divergent;
            let m = Measured::from_report(&t);
            chain.value += m.value;
            chain.h = m.h;
            chain.delta = chain.delta.max(m.delta);
        }
        let status = if diverged {
            RecordStatus::Unexpected
        } else {
            RecordStatus::Bounded
        };
        out.push(record(k, Measured::from_report(&num), Some(chain), status, start));
    }
    Ok(out)
}

/// For each entry with `tr^{r-1} f = 0` and a finite reinforced norm: the
/// Hardy-chain quotient
/// `||d^{-s} f|L_p(collar)|| / sum_{|alpha| = r} ||d^{-(n-l)/p} D^alpha f|L_p(collar)||`
/// over the dilation family. Entries with vanishing traces and a divergent
/// reinforced term are reported as [`RecordStatus::Gap`]; entries with
/// nonvanishing traces get the weighted term at `k = 0`.
pub fn run_critical_experiment(
    entries: &[CorpusEntry],
    set: &ParamSet,
) -> Result<Vec<ExperimentRecord>> {
    if !set.params.classify().is_critical() {
        return Err(Error::param(format!(
            "{} is not critical; use the non-critical experiment",
            set.id
        )));
    }
    collect(entries, |e| critical_entry(e, set))
}

fn collect(
    entries: &[CorpusEntry],
    each: impl Fn(&CorpusEntry) -> Result<Vec<ExperimentRecord>> + Sync,
) -> Result<Vec<ExperimentRecord>> {
    let parts: Vec<Result<Vec<ExperimentRecord>>> = entries.par_iter().map(&each).collect();
    let mut out = Vec::new();
    for p in parts {
        out.extend(p?);
    }
    Ok(out)
}

/// `max / min` of the quotient over the dilation family of one entry.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DilationBracket {
    pub entry: String,
    pub params_id: String,
    pub min: f64,
    pub max: f64,
    pub width: f64,
    pub members: usize,
}

/// Brackets of the bounded records, grouped by `(entry, params)` in first
/// appearance order.
pub fn dilation_brackets(records: &[ExperimentRecord]) -> Vec<DilationBracket> {
    let mut order = Vec::new();
    let mut groups: BTreeMap<(String, String), Vec<f64>> = BTreeMap::new();
    for r in records {
        if r.status != RecordStatus::Bounded {
            continue;
        }
        let Some(q) = r.quotient else { continue };
        let key = (r.entry.clone(), r.params_id.clone());
        if !groups.contains_key(&key) {
            order.push(key.clone());
        }
        groups.entry(key).or_default().push(q);
    }
    order
        .into_iter()
        .map(|key| {
            let v = &groups[&key];
            let min = v.iter().cloned().fold(f64::INFINITY, f64::min);
            let max = v.iter().cloned().fold(0.0, f64::max);
            DilationBracket {
                entry: key.0,
                params_id: key.1,
                min,
                max,
                width: if min > 0.0 { max / min } else { f64::INFINITY },
                members: v.len(),
            }
        })
        .collect()
}
