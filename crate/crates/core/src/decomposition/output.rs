//! CSV rows and JSON summaries of corpus runs. Floats are written with
//! `{:e}` (shortest round-trip form), so identical runs give identical
//! bytes.

use std::io::Write;

use serde::Serialize;

use super::{ExperimentRecord, MembershipReport, RouteComparison};
use crate::error::Result;

fn num(x: f64) -> String {
    format!("{x:e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

#[derive(Serialize)]
struct MembershipRow<'a> {
    entry: &'a str,
    params: &'a str,
    n: usize,
    l: usize,
    s: String,
    p: String,
    q: String,
    class: String,
    in_f: bool,
    f_norm: String,
    trace_order: String,
    traces_vanish: bool,
    traces_vanish_strict: bool,
    max_relative_trace: String,
    trace_h: String,
    in_reinforced: bool,
    reinforced_total: String,
    in_rloc: bool,
    rloc_value: String,
    rloc_h: String,
    rloc_delta: String,
    predicted_in_rloc: bool,
    consistent_with_theorem: bool,
    tolerance_stable: bool,
}

pub fn write_membership_csv<W: Write>(reports: &[MembershipReport], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in reports {
        out.serialize(MembershipRow {
            entry: &r.entry,
            params: &r.params_id,
            n: r.n,
            l: r.l,
            s: num(r.s),
            p: num(r.p),
            q: num(r.q),
            class: r.class.to_string(),
            in_f: r.in_f,
            f_norm: num(r.f_norm),
            trace_order: r
                .trace
                .required_order
                .map(|k| k.to_string())
                .unwrap_or_default(),
            traces_vanish: r.trace.vanish,
            traces_vanish_strict: r.trace.vanish_strict,
            max_relative_trace: num(r.trace.max_relative()),
            trace_h: opt(r.trace.h),
            in_reinforced: r.in_reinforced,
            reinforced_total: num(r.reinforced.total),
            in_rloc: r.in_rloc,
            rloc_value: num(if r.rloc_equiv.divergent {
                f64::INFINITY
            } else {
                r.rloc_equiv.value
            }),
            rloc_h: num(r.rloc_equiv.h),
            rloc_delta: opt(r.rloc_equiv.discretization_error),
            predicted_in_rloc: r.predicted_in_rloc,
            consistent_with_theorem: r.consistent_with_theorem,
            tolerance_stable: r.tolerance_stable,
        })?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct ExperimentRow<'a> {
    experiment: &'a str,
    entry: &'a str,
    params: &'a str,
    class: String,
    dilation: u32,
    numerator: String,
    numerator_h: String,
    numerator_delta: String,
    denominator: String,
    denominator_h: String,
    denominator_delta: String,
    quotient: String,
    status: String,
}

pub fn write_experiment_csv<W: Write>(records: &[ExperimentRecord], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in records {
        let d = r.denominator.as_ref();
        out.serialize(ExperimentRow {
            experiment: r.experiment,
            entry: &r.entry,
            params: &r.params_id,
            class: r.class.to_string(),
            dilation: r.dilation,
            numerator: num(r.numerator.value),
            numerator_h: num(r.numerator.h),
            numerator_delta: num(r.numerator.delta),
            denominator: opt(d.map(|m| m.value)),
            denominator_h: opt(d.map(|m| m.h)),
            denominator_delta: opt(d.map(|m| m.delta)),
            quotient: opt(r.quotient),
            status: r.status.to_string(),
        })?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct RouteRow<'a> {
    entry: &'a str,
    params: &'a str,
    equiv_in_rloc: bool,
    partition_in_rloc: bool,
    agree: bool,
    equiv_value: String,
    partition_value: String,
    j_max: u32,
    last_level_sum: String,
}

pub fn write_routes_csv<W: Write>(rows: &[RouteComparison], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(RouteRow {
            entry: &r.entry,
            params: &r.params_id,
            equiv_in_rloc: r.equiv_in_rloc,
            partition_in_rloc: r.partition_in_rloc,
            agree: r.agree,
            equiv_value: num(r.equiv_value),
            partition_value: num(r.partition_value),
            j_max: r.j_max,
            last_level_sum: opt(r.level_sums.last().map(|l| l.1)),
        })?;
    }
    out.flush()?;
    Ok(())
}

/// Global verdict of a membership run.
#[derive(Clone, Debug, Serialize)]
pub struct MembershipSummary {
    pub reports: usize,
    pub consistent: bool,
    pub tolerance_stable: bool,
    /// `entry @ params` of every inconsistent report.
    pub inconsistent: Vec<String>,
    pub routes_compared: usize,
    pub routes_agree: Option<bool>,
    pub route_disagreements: Vec<String>,
    pub wall_time: f64,
}

pub fn membership_summary(
    reports: &[MembershipReport],
    routes: &[RouteComparison],
) -> MembershipSummary {
    let inconsistent: Vec<String> = reports
        .iter()
        .filter(|r| !r.consistent_with_theorem)
        .map(|r| format!("{} @ {}", r.entry, r.params_id))
        .collect();
    let route_disagreements: Vec<String> = routes
        .iter()
        .filter(|r| !r.agree)
        .map(|r| format!("{} @ {}", r.entry, r.params_id))
        .collect();
    MembershipSummary {
        reports: reports.len(),
        consistent: inconsistent.is_empty(),
        tolerance_stable: reports.iter().all(|r| r.tolerance_stable),
        inconsistent,
        routes_compared: routes.len(),
        routes_agree: (!routes.is_empty()).then_some(route_disagreements.is_empty()),
        route_disagreements,
        wall_time: reports.iter().map(|r| r.wall_time).sum(),
    }
}
