//! `decompose`: membership reports over corpus x parameter grid, with the
//! partition-route cross-check and optional dilation experiments.

use serde::Serialize;

use rlocspace::decomposition::{
    compare_rloc_routes_covered, dilation_brackets, membership_reports_with, membership_summary,
    run_critical_experiment, run_noncritical_experiment, select_corpus, write_experiment_csv,
    write_membership_csv, write_routes_csv, CorpusEntry, DilationBracket, ExperimentRecord,
    MembershipReport, MembershipSummary, ParamSet, RecordStatus, RouteComparison, RouteCoverage,
};
use rlocspace::CriticalityClass;

use super::{param_sets, verdict, write_summary, Outcome};
use crate::config::{format_schedule, parse_schedule, Settings};
use crate::error::CliResult;
use crate::output::{OutputDir, Table};

/// Largest admissible `max / min` of an experiment quotient over dilations.
const DILATION_BRACKET: f64 = 4.0;

/// The refinement schedule of `--resolution`, or `None` for the per-function
/// default, with its header description.
pub(super) fn schedule(settings: &Settings) -> CliResult<(Option<Vec<f64>>, String)> {
    match settings.get("resolution") {
        Some(text) => {
            let hs = parse_schedule(text)?;
            let label = format_schedule(&hs);
            Ok((Some(hs), label))
        }
        None => Ok((None, "auto(norm_h/2,3)".to_string())),
    }
}

/// Membership and route CSVs plus a rloc-value plot table.
pub(super) fn write_membership(
    out: &mut OutputDir,
    prefix: &str,
    resolution: &str,
    reports: &[MembershipReport],
    routes: &[RouteComparison],
) -> CliResult<()> {
    let mut buf = Vec::new();
    write_membership_csv(reports, &mut buf)?;
    out.csv(
        &format!("{prefix}-membership.csv"),
        "membership/1",
        resolution,
        &buf,
    )?;
    if !routes.is_empty() {
        let mut buf = Vec::new();
        write_routes_csv(routes, &mut buf)?;
        out.csv(&format!("{prefix}-routes.csv"), "routes/1", resolution, &buf)?;
    }
    let mut t = Table::new(&["s", "rloc_value", "max_relative_trace"]);
    let mut entries: Vec<&str> = Vec::new();
    for r in reports {
        if !entries.contains(&r.entry.as_str()) {
            entries.push(&r.entry);
        }
    }
    for e in entries {
        let rows = reports
            .iter()
            .filter(|r| r.entry == e)
            .map(|r| {
                let v = if r.rloc_equiv.divergent {
                    f64::INFINITY
                } else {
                    r.rloc_equiv.value
                };
                vec![r.s, v, r.trace.max_relative()]
            })
            .collect();
        t.block(e.to_string(), rows);
    }
    out.gnuplot(
        &format!("{prefix}-rloc.dat"),
        "membership.plot/1",
        resolution,
        &t,
    )?;
    Ok(())
}

#[derive(Serialize)]
struct ExperimentSummary {
    records: usize,
    flagged: Vec<String>,
    brackets: Vec<DilationBracket>,
    passed: bool,
}

fn experiments(entries: &[CorpusEntry], sets: &[ParamSet]) -> CliResult<Vec<ExperimentRecord>> {
    let mut out = Vec::new();
    for set in sets {
        match set.params.classify() {
            CriticalityClass::NonCritical(r) if r < 0 => {}
            CriticalityClass::NonCritical(_) => {
                out.extend(run_noncritical_experiment(entries, set)?)
            }
            CriticalityClass::Critical(_) => out.extend(run_critical_experiment(entries, set)?),
        }
    }
    Ok(out)
}

fn experiment_summary(records: &[ExperimentRecord]) -> ExperimentSummary {
    let flagged: Vec<String> = records
        .iter()
        .filter(|r| matches!(r.status, RecordStatus::NotFlagged | RecordStatus::Unexpected))
        .map(|r| format!("{} @ {} k={}: {}", r.entry, r.params_id, r.dilation, r.status))
        .collect();
    let brackets = dilation_brackets(records);
    let passed = flagged.is_empty() && brackets.iter().all(|b| b.width <= DILATION_BRACKET);
    ExperimentSummary {
        records: records.len(),
        flagged,
        brackets,
        passed,
    }
}

#[derive(Serialize)]
struct Details {
    corpus: Vec<&'static str>,
    params: Vec<String>,
    route_coverage: RouteCoverage,
    membership: MembershipSummary,
    experiments: Option<ExperimentSummary>,
}

pub fn run(settings: &Settings) -> CliResult<Outcome> {
    let entries = select_corpus(settings.str_or("corpus", "all"))?;
    let sets = param_sets(settings, "default-grid")?;
    let coverage: RouteCoverage = settings.str_or("routes", "sample").parse()?;
    let with_experiments = settings.bool_or("experiments", false)?;
    let (hs, resolution) = schedule(settings)?;

    let reports = membership_reports_with(&entries, &sets, hs.as_deref())?;
    let routes = compare_rloc_routes_covered(&entries, &sets, &reports, coverage)?;
    let records = if with_experiments {
        Some(experiments(&entries, &sets)?)
    } else {
        None
    };

    let mut out = OutputDir::create(settings)?;
    write_membership(&mut out, "decompose", &resolution, &reports, &routes)?;
    if let Some(recs) = &records {
        let mut buf = Vec::new();
        write_experiment_csv(recs, &mut buf)?;
        out.csv(
            "decompose-experiments.csv",
            "experiments/1",
            &resolution,
            &buf,
        )?;
    }
    let membership = membership_summary(&reports, &routes);
    let exp = records.as_deref().map(experiment_summary);
    let consistent = membership.consistent
        && membership.routes_agree != Some(false)
        && exp.as_ref().map_or(true, |e| e.passed);
    let message = format!(
        "decompose: {} reports, {} route checks, {}",
        reports.len(),
        routes.len(),
        verdict(consistent)
    );
    write_summary(
        &mut out,
        settings,
        consistent,
        Details {
            corpus: entries.iter().map(|e| e.id()).collect(),
            params: sets.iter().map(|s| s.id.clone()).collect(),
            route_coverage: coverage,
            membership,
            experiments: exp,
        },
    )?;
    Ok(Outcome {
        consistent,
        message,
    })
}
