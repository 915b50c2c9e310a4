//! `witness`: the multi-level family `f_J` at the critical smoothness and
//! the single-bump family `f_j` below it, with quotient-versus-level tables.

use serde::Serialize;

use rlocspace::discretize::Kappa;
use rlocspace::hardy::{
    critical_quotient, fj_witness, subcritical_quotient, subcritical_witness, WeightSpec, Witness,
};
use rlocspace::SmoothnessParams;

use super::{bracket, rng, split_from, verdict, write_summary, Outcome};
use crate::config::{format_schedule, parse_range, parse_real, parse_reals, Settings};
use crate::error::{usage, CliResult};
use crate::output::{OutputDir, Table};

/// Largest admissible `max / min` of a quotient with bounded weight.
const BOUNDED_BRACKET: f64 = 3.0;

#[derive(Serialize)]
struct Row {
    level: u32,
    h: f64,
    cells: usize,
    bumps: usize,
    quotient: f64,
    quotient_kappa_one: f64,
    numerator: f64,
    denominator: f64,
    tube_min: Option<f64>,
    tube_bound: Option<f64>,
}

#[derive(Serialize)]
struct Details {
    kind: String,
    params: String,
    kappa: String,
    rows: Vec<Row>,
    monotone: bool,
    bracket: f64,
    bracket_kappa_one: f64,
    tube_bound_holds: bool,
}

enum Kind {
    Multi,
    Sub,
}

pub fn run(settings: &Settings) -> CliResult<Outcome> {
    let kind = match settings.str_or("kind", "fJ") {
        "fJ" | "fj-multi" | "multi" => Kind::Multi,
        "sub" | "subcritical" | "fj" => Kind::Sub,
        other => return Err(usage(format!("--kind `{other}`: expected fJ or sub"))),
    };
    let split = split_from(settings, 2)?;
    let codim = split.codim() as f64;
    let p_text = settings.str_or("p", "2").to_string();
    let p = parse_real(&p_text)?;
    let q = parse_real(settings.str_or("q", "2"))?;
    let levels = parse_range(settings.str_or("J", "2..5"))?;
    let samples: usize = settings.parse_or("samples", 2000)?;
    // at level 1 the bump sits outside the measured collar
    if *levels.start() < 2 {
        return Err(usage("--J: levels start at 2"));
    }
    let (params, kappa_default) = match kind {
        Kind::Multi => {
            (SmoothnessParams::new(split, codim / p, p, q)?, "log^1".to_string())
        }
        Kind::Sub => {
            let s_text = settings.str_or("s", "1/4");
            let params = SmoothnessParams::parse(split, s_text, &p_text, q)?;
            if !(params.s() > 0.0 && params.s() < codim / p) {
                return Err(usage(format!(
                    "the subcritical family needs 0 < s < (n-l)/p = {}",
                    codim / p
                )));
            }
            let kappa = format!("pow^{}", params.s());
            (params, kappa)
        }
    };
    params.require_banach_q()?;
    let kappa = Kappa::parse(settings.str_or("kappa", &kappa_default))?;
    let log_divisor = matches!(kind, Kind::Multi);
    let weight = WeightSpec::new(kappa, log_divisor);
    let plain = WeightSpec::new(Kappa::One, log_divisor);
    weight.validate(params.eps())?;

    let levels: Vec<u32> = levels.collect();
    let witnesses: Vec<Witness> = levels
        .iter()
        .map(|&j| match kind {
            Kind::Multi => fj_witness(j, p, split),
            Kind::Sub => subcritical_witness(j, params.s(), p, split),
        })
        .collect::<Result<_, _>>()?;
    let spacing: Option<Vec<f64>> = match settings.get("resolution") {
        None => None,
        Some(text) => {
            let hs = parse_reals(text)?;
            Some(match hs.len() {
                1 => vec![hs[0]; levels.len()],
                k if k == levels.len() => hs,
                k => {
                    return Err(usage(format!(
                        "--resolution: give one spacing or one per level ({} levels, {k} spacings)",
                        levels.len()
                    )))
                }
            })
        }
    };
    let grids = witnesses
        .iter()
        .enumerate()
        .map(|(i, w)| match &spacing {
            Some(hs) => w.grid_with_spacing(hs[i]),
            None => w.default_grid(),
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut rng = rng(settings)?;
    let mut rows = Vec::new();
    for ((&j, w), grid) in levels.iter().zip(&witnesses).zip(&grids) {
        let f = w.sample_on(grid)?;
        let (a, b) = match kind {
            Kind::Multi => (
                critical_quotient(&f, &params, &weight)?,
                critical_quotient(&f, &params, &plain)?,
            ),
            Kind::Sub => (
                subcritical_quotient(&f, &params, &weight)?,
                subcritical_quotient(&f, &params, &plain)?,
            ),
        };
        let (tube_min, tube_bound) = match kind {
            Kind::Multi => (Some(w.min_on_tube(j, samples, &mut rng)), w.tube_lower_bound()),
            Kind::Sub => (None, None),
        };
        rows.push(Row {
            level: j,
            h: grid.h_max(),
            cells: grid.len(),
            bumps: w.bumps.len(),
            quotient: a.value,
            quotient_kappa_one: b.value,
            numerator: a.numerator,
            denominator: a.denominator,
            tube_min,
            tube_bound,
        });
    }

    let values: Vec<f64> = rows.iter().map(|r| r.quotient).collect();
    let plain_values: Vec<f64> = rows.iter().map(|r| r.quotient_kappa_one).collect();
    let monotone = values.windows(2).all(|w| w[1] > w[0]);
    let width = bracket(&values);
    let plain_width = bracket(&plain_values);
    let tube_ok = rows.iter().all(|r| match (r.tube_min, r.tube_bound) {
        (Some(m), Some(b)) => m >= b * (1.0 - 1e-12),
        _ => true,
    });
    let main_ok = if kappa.is_bounded() {
        width <= BOUNDED_BRACKET
    } else {
        monotone
    };
    let consistent = main_ok && plain_width <= BOUNDED_BRACKET && tube_ok;

    let kind_tag = match kind {
        Kind::Multi => "fJ",
        Kind::Sub => "sub",
    };
    let hs: Vec<f64> = rows.iter().map(|r| r.h).collect();
    let res = format_schedule(&hs);
    let mut out = OutputDir::create(settings)?;
    let mut csv = String::from(
        "level,h,cells,bumps,quotient,quotient_kappa_one,numerator,denominator,tube_min,tube_bound\n",
    );
    let opt = |x: Option<f64>| x.map(|v| format!("{v:e}")).unwrap_or_default();
    let mut t = Table::new(&["level", "quotient", "quotient_kappa_one"]);
    let mut trows = Vec::new();
    for r in &rows {
        csv.push_str(&format!(
            "{},{:e},{},{},{:e},{:e},{:e},{:e},{},{}\n",
            r.level,
            r.h,
            r.cells,
            r.bumps,
            r.quotient,
            r.quotient_kappa_one,
            r.numerator,
            r.denominator,
            opt(r.tube_min),
            opt(r.tube_bound)
        ));
        trows.push(vec![r.level as f64, r.quotient, r.quotient_kappa_one]);
    }
    t.block(format!("{kind_tag} kappa={}", kappa.label()), trows);
    let schema = format!("witness.{kind_tag}/1");
    out.csv(&format!("witness-{kind_tag}.csv"), &schema, &res, csv.as_bytes())?;
    out.gnuplot(&format!("witness-{kind_tag}.dat"), &schema, &res, &t)?;
    let message = format!(
        "witness {kind_tag}: levels {}..{}, kappa={} {}, {}",
        levels[0],
        levels[levels.len() - 1],
        kappa.label(),
        if kappa.is_bounded() {
            format!("bracket {width:.3}")
        } else if monotone {
            "monotone increasing".to_string()
        } else {
            "not monotone".to_string()
        },
        verdict(consistent)
    );
    write_summary(
        &mut out,
        settings,
        consistent,
        Details {
            kind: kind_tag.to_string(),
            params: params.label(),
            kappa: kappa.label(),
            rows,
            monotone,
            bracket: width,
            bracket_kappa_one: plain_width,
            tube_bound_holds: tube_ok,
        },
    )?;
    Ok(Outcome {
        consistent,
        message,
    })
}
