//! `norms`: every norm of one corpus entry at one or more parameter sets.

use serde::Serialize;

use rlocspace::decomposition::{
    compare_rloc_routes, corpus_entry, membership_reports_with, membership_summary,
    MembershipReport, MembershipSummary, ParamSet, RouteComparison,
};

use super::decompose::{schedule, write_membership};
use super::{param_sets, verdict, write_summary, Outcome};
use crate::config::Settings;
use crate::error::{usage, CliResult};
use crate::output::OutputDir;

#[derive(Serialize)]
struct Details {
    entry: &'static str,
    formula: &'static str,
    summary: MembershipSummary,
    reports: Vec<MembershipReport>,
    routes: Vec<RouteComparison>,
}

/// `--params`, or a single set from `--n --l --s --p --q --eps`.
fn sets(settings: &Settings) -> CliResult<Vec<ParamSet>> {
    if settings.get("params").is_some() {
        return param_sets(settings, "");
    }
    let (Some(s), Some(p)) = (settings.get("s"), settings.get("p")) else {
        return Err(usage("norms needs --s and --p, or --params"));
    };
    let n: usize = settings.parse_or("n", 2)?;
    let l: usize = settings.parse_or("l", n.saturating_sub(1))?;
    let mut spec = format!("n={n},l={l},s={s},p={p}");
    for key in ["q", "eps"] {
        if let Some(v) = settings.get(key) {
            spec.push_str(&format!(",{key}={v}"));
        }
    }
    let set = ParamSet::parse(&spec)?;
    set.params.require_banach_q()?;
    Ok(vec![set])
}

pub fn run(settings: &Settings) -> CliResult<Outcome> {
    let id = settings
        .get("entry")
        .ok_or_else(|| usage("norms needs --entry"))?;
    let entry = corpus_entry(id)?;
    let sets = sets(settings)?;
    let with_routes = settings.bool_or("routes", true)?;
    let (hs, resolution) = schedule(settings)?;

    let entries = vec![entry.clone()];
    let reports = membership_reports_with(&entries, &sets, hs.as_deref())?;
    let routes = if with_routes {
        compare_rloc_routes(&entries, &sets, &reports)?
    } else {
        Vec::new()
    };
    let mut out = OutputDir::create(settings)?;
    write_membership(&mut out, "norms", &resolution, &reports, &routes)?;
    let summary = membership_summary(&reports, &routes);
    let consistent = summary.consistent && summary.routes_agree != Some(false);
    let mut message = format!("norms {}:", entry.id());
    for r in &reports {
        message.push_str(&format!(
            "\n  {} {}: |f|F| = {:.6e}, in_rloc = {}, predicted = {}",
            r.params_id, r.class, r.f_norm, r.in_rloc, r.predicted_in_rloc
        ));
    }
    message.push_str(&format!("\n  {}", verdict(consistent)));
    write_summary(
        &mut out,
        settings,
        consistent,
        Details {
            entry: entry.id(),
            formula: entry.formula(),
            summary,
            reports,
            routes,
        },
    )?;
    Ok(Outcome {
        consistent,
        message,
    })
}
