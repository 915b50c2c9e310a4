//! `probe-divergence`: fits the critical collar integral against `|log h|`.
//! A function whose trace is nonzero should read as log-divergent, one
//! whose trace vanishes as convergent.

use serde::Serialize;

use rlocspace::decomposition::{
    reinforced_divergence_probe, select_corpus, ParamSet, ProbeRecord, ProbeVerdict,
};
use rlocspace::discretize::halvings;
use rlocspace::{CriticalityClass, SmoothnessParams};

use super::{param_sets, split_from, verdict, write_summary, Outcome};
use crate::config::{format_schedule, parse_real, parse_schedule, Settings};
use crate::error::{usage, CliResult};
use crate::output::{OutputDir, Table};

#[derive(Serialize)]
struct Probe {
    params: String,
    entry: &'static str,
    expected: ProbeVerdict,
    record: ProbeRecord,
    consistent: bool,
}

/// `--params` (each set must sit at `s = (n-l)/p`), or the critical set
/// built from `--n --l --p --eps`.
fn sets(settings: &Settings) -> CliResult<Vec<ParamSet>> {
    let sets = if settings.get("params").is_some() {
        param_sets(settings, "")?
    } else {
        let split = split_from(settings, 2)?;
        let p = parse_real(settings.str_or("p", "2"))?;
        let mut params = SmoothnessParams::new(split, split.codim() as f64 / p, p, 2.0)?;
        if let Some(e) = settings.get("eps") {
            params = params.with_eps(parse_real(e)?)?;
        }
        let set = ParamSet {
            id: format!("n{}l{}-critical-p{p}", split.n(), split.l()),
            params,
        };
        vec![set]
    };
    for s in &sets {
        if s.params.classify() != CriticalityClass::Critical(0) {
            return Err(usage(format!(
                "{}: the divergence probe needs s = (n-l)/p, this set is {}",
                s.id,
                s.params.classify()
            )));
        }
    }
    Ok(sets)
}

pub fn run(settings: &Settings) -> CliResult<Outcome> {
    let entries = select_corpus(settings.str_or("corpus", "plateau,z_gaussian"))?;
    let sets = sets(settings)?;
    let explicit = match settings.get("resolution") {
        Some(text) => {
            let hs = parse_schedule(text)?;
            if hs.len() < 3 {
                return Err(usage("--resolution: the probe needs at least 3 spacings"));
            }
            Some(hs)
        }
        None => None,
    };
    let mut probes = Vec::new();
    let mut schedules = Vec::new();
    for set in &sets {
        let split = set.params.split();
        let hs = explicit.clone().unwrap_or_else(|| {
            if split.n() >= 3 {
                halvings(1.0 / 8.0, 3)
            } else {
                halvings(1.0 / 16.0, 4)
            }
        });
        schedules.push(format_schedule(&hs));
        for entry in &entries {
            let f = entry.expr(split.n())?;
            let record = reinforced_divergence_probe(f.as_ref(), &set.params, &hs)?;
            let expected = if entry.trace_profile(split).vanishes_up_to(0) {
                ProbeVerdict::Convergent
            } else {
                ProbeVerdict::LogDivergent
            };
            probes.push(Probe {
                params: set.id.clone(),
                entry: entry.id(),
                expected,
                consistent: record.verdict == expected,
                record,
            });
        }
    }
    schedules.dedup();
    let resolution = schedules.join(";");

    let mut out = OutputDir::create(settings)?;
    let mut csv = String::from("params,entry,expected,verdict,h,integral,increment\n");
    let mut t = Table::new(&["abs_log_h", "integral"]);
    let name = |v: ProbeVerdict| match v {
        ProbeVerdict::LogDivergent => "log-divergent",
        ProbeVerdict::Convergent => "convergent",
        ProbeVerdict::Inconclusive => "inconclusive",
    };
    for p in &probes {
        let steps = &p.record.steps;
        for (i, s) in steps.iter().enumerate() {
            let inc = if i == 0 {
                String::new()
            } else {
                format!("{:e}", s.integral - steps[i - 1].integral)
            };
            csv.push_str(&format!(
                "{},{},{},{},{:e},{:e},{inc}\n",
                p.params,
                p.entry,
                name(p.expected),
                name(p.record.verdict),
                s.h,
                s.integral
            ));
        }
        t.block(
            format!("{} {}", p.entry, p.params),
            steps
                .iter()
                .map(|s| vec![s.h.ln().abs(), s.integral])
                .collect(),
        );
    }
    out.csv("probe.csv", "probe-divergence/1", &resolution, csv.as_bytes())?;
    out.gnuplot("probe.dat", "probe-divergence/1", &resolution, &t)?;
    let consistent = probes.iter().all(|p| p.consistent);
    let mut message = String::from("probe-divergence:");
    for p in &probes {
        message.push_str(&format!(
            "\n  {} @ {}: {} (slope {:.4}, residual {:.3}), expected {}",
            p.entry,
            p.params,
            name(p.record.verdict),
            p.record.slope,
            p.record.relative_residual,
            name(p.expected)
        ));
    }
    message.push_str(&format!("\n  {}", verdict(consistent)));
    write_summary(&mut out, settings, consistent, probes)?;
    Ok(Outcome {
        consistent,
        message,
    })
}
