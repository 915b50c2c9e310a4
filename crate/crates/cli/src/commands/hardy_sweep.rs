//! `hardy-sweep`: the one-dimensional power family against `1/beta^p` and
//! the boundary Hardy quotient of `z^r`-envelopes over a dilation family.

use serde::Serialize;

use rlocspace::decomposition::{corpus_entry, ParamSet};
use rlocspace::hardy::{boundary_hardy_refined, hardy_quotient_1d, log_window, power_family, sharp_constant};

use super::{bracket, param_sets, verdict, write_summary, Outcome};
use crate::config::{format_schedule, parse_range, parse_real, parse_reals, parse_schedule, Settings};
use crate::error::{usage, CliResult};
use crate::output::{OutputDir, Table};

/// Largest admissible relative deviation of the power quotient from `beta^-p`.
const POWER_TOL: f64 = 0.05;
/// Largest admissible relative change of a boundary quotient under `h -> h/2`.
const REFINE_TOL: f64 = 0.10;
/// Largest admissible `max / min` of a boundary quotient over dilations.
const DILATION_BRACKET: f64 = 4.0;

#[derive(Serialize)]
struct PowerRow {
    beta: f64,
    quotient: f64,
    expected: f64,
    relative_error: f64,
    sharp_constant: f64,
    passed: bool,
}

#[derive(Serialize)]
struct BoundaryRow {
    params: String,
    r: u32,
    entry: String,
    dilation: u32,
    h: Vec<f64>,
    quotients: Vec<f64>,
    refinement_change: f64,
}

#[derive(Serialize)]
struct BoundaryVerdict {
    params: String,
    r: u32,
    bracket: f64,
    max_refinement_change: f64,
    finite: bool,
    passed: bool,
}

#[derive(Serialize)]
struct Details {
    power: Vec<PowerRow>,
    boundary: Vec<BoundaryRow>,
    boundary_verdicts: Vec<BoundaryVerdict>,
}

/// Largest `r >= 1` with `s > r - 1 + (n-l)/p`, and the envelope `z^r G`.
fn boundary_order(set: &ParamSet) -> CliResult<(u32, &'static str)> {
    let p = &set.params;
    let bound = p.s() + 1.0 - p.split().codim() as f64 / p.p();
    let r = bound.ceil() - 1.0;
    if r < 1.0 {
        return Err(usage(format!(
            "{}: the boundary Hardy quotient needs s > (n-l)/p",
            set.id
        )));
    }
    match r as u32 {
        1 => Ok((1, "z_gaussian")),
        2 => Ok((2, "z2_gaussian")),
        3 => Ok((3, "z3_gaussian")),
        r => Err(usage(format!(
            "{}: order r = {r} has no envelope in the corpus (r <= 3)",
            set.id
        ))),
    }
}

fn power_rows(settings: &Settings) -> CliResult<Vec<PowerRow>> {
    let betas = parse_reals(settings.str_or("beta", "0.55,0.75,1,1.5,2"))?;
    let p = parse_real(settings.str_or("p", "2"))?;
    let alpha = parse_real(settings.str_or("alpha", "0"))?;
    let cells: usize = settings.parse_or("cells", 6000)?;
    let depth = parse_real(settings.str_or("depth", "60"))?;
    if !(p >= 1.0 && p > alpha + 1.0) {
        return Err(usage(format!("need p >= 1 and p > alpha + 1, got p={p}, alpha={alpha}")));
    }
    let floor = 1.0 - (alpha + 1.0) / p;
    if let Some(b) = betas.iter().find(|b| !(**b > floor)) {
        return Err(usage(format!(
            "beta={b}: t^beta needs beta > 1 - (alpha+1)/p = {floor} to lie in the space"
        )));
    }
    let grid = log_window(1.0, depth, cells)?;
    let sharp = sharp_constant(p, alpha);
    betas
        .iter()
        .map(|&beta| {
            let q = hardy_quotient_1d(&power_family(beta, &grid)?, p, alpha)?;
            let expected = beta.powf(-p);
            let relative_error = (q / expected - 1.0).abs();
            Ok(PowerRow {
                beta,
                quotient: q,
                expected,
                relative_error,
                sharp_constant: sharp,
                passed: relative_error <= POWER_TOL && q < sharp,
            })
        })
        .collect()
}

pub fn run(settings: &Settings) -> CliResult<Outcome> {
    let family = settings.str_or("family", "all");
    let (do_power, do_boundary) = match family {
        "power" => (true, false),
        "boundary" => (false, true),
        "all" => (true, true),
        other => return Err(usage(format!("--family `{other}`: expected power, boundary or all"))),
    };
    let mut boundary_plan = Vec::new();
    let mut schedule = Vec::new();
    let mut dilations = 0..=0;
    if do_boundary {
        for set in param_sets(settings, "n=2,l=1,s=1,p=2;n=2,l=1,s=2,p=2")? {
            let (r, entry) = boundary_order(&set)?;
            boundary_plan.push((set, r, corpus_entry(entry)?));
        }
        schedule = parse_schedule(settings.str_or("resolution", "1/16,1/32"))?;
        dilations = parse_range(settings.str_or("dilations", "0..3"))?;
    }
    let power = if do_power { power_rows(settings)? } else { Vec::new() };

    let mut boundary = Vec::new();
    let mut verdicts = Vec::new();
    for (set, r, entry) in &boundary_plan {
        let n = set.params.split().n();
        let mut finest = Vec::new();
        let mut worst_change = 0.0f64;
        for k in dilations.clone() {
            let f = entry.dilated(n, k)?;
            let bounds = f
                .support()
                .ok_or_else(|| usage(format!("{} declares no support", entry.id())))?;
            let scale = 0.5f64.powi(k as i32);
            let hs: Vec<f64> = schedule.iter().map(|h| h * scale).collect();
            let q = boundary_hardy_refined(f.as_ref(), &bounds, &hs, &set.params, *r)?;
            let values: Vec<f64> = q.iter().map(|x| x.value).collect();
            let change = values
                .windows(2)
                .map(|w| (w[1] / w[0] - 1.0).abs())
                .fold(0.0, f64::max);
            worst_change = worst_change.max(change);
            finest.push(*values.last().expect("non-empty schedule"));
            boundary.push(BoundaryRow {
                params: set.id.clone(),
                r: *r,
                entry: entry.id().to_string(),
                dilation: k,
                h: hs,
                quotients: values,
                refinement_change: change,
            });
        }
        let finite = finest.iter().all(|v| v.is_finite());
        let width = bracket(&finest);
        verdicts.push(BoundaryVerdict {
            params: set.id.clone(),
            r: *r,
            bracket: width,
            max_refinement_change: worst_change,
            finite,
            passed: finite && worst_change < REFINE_TOL && width <= DILATION_BRACKET,
        });
    }

    let mut out = OutputDir::create(settings)?;
    if do_power {
        let mut csv = String::from("beta,quotient,expected,relative_error,sharp_constant,passed\n");
        let mut t = Table::new(&["beta", "quotient", "beta^-p"]);
        let mut rows = Vec::new();
        for r in &power {
            csv.push_str(&format!(
                "{:e},{:e},{:e},{:e},{:e},{}\n",
                r.beta, r.quotient, r.expected, r.relative_error, r.sharp_constant, r.passed
            ));
            rows.push(vec![r.beta, r.quotient, r.expected]);
        }
        t.block("power family", rows);
        let res = format!("log-window cells={}", settings.str_or("cells", "6000"));
        out.csv("hardy-power.csv", "hardy-sweep.power/1", &res, csv.as_bytes())?;
        out.gnuplot("hardy-power.dat", "hardy-sweep.power/1", &res, &t)?;
    }
    if do_boundary {
        let res = format_schedule(&schedule);
        let mut csv = String::from("params,r,entry,dilation,h,quotient\n");
        let mut t = Table::new(&["dilation", "quotient"]);
        for (set, _, _) in &boundary_plan {
            let mut rows = Vec::new();
            for b in boundary.iter().filter(|b| b.params == set.id) {
                for (h, q) in b.h.iter().zip(&b.quotients) {
                    csv.push_str(&format!(
                        "{},{},{},{},{h:e},{q:e}\n",
                        b.params, b.r, b.entry, b.dilation
                    ));
                }
                rows.push(vec![b.dilation as f64, *b.quotients.last().expect("non-empty")]);
            }
            t.block(set.id.clone(), rows);
        }
        out.csv("hardy-boundary.csv", "hardy-sweep.boundary/1", &res, csv.as_bytes())?;
        out.gnuplot("hardy-boundary.dat", "hardy-sweep.boundary/1", &res, &t)?;
    }
    let consistent = power.iter().all(|r| r.passed) && verdicts.iter().all(|v| v.passed);
    let message = format!(
        "hardy-sweep: {} power rows, {} boundary families, {}",
        power.len(),
        verdicts.len(),
        verdict(consistent)
    );
    write_summary(
        &mut out,
        settings,
        consistent,
        Details {
            power,
            boundary,
            boundary_verdicts: verdicts,
        },
    )?;
    Ok(Outcome {
        consistent,
        message,
    })
}
