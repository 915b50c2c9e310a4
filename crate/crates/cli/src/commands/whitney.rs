//! `whitney`: cube lists, pictures and invariant diagnostics.

use rand::Rng;
use serde::Serialize;

use rlocspace::discretize::Aabb;
use rlocspace::whitney::{
    partition_of_unity, whitney_decompose, write_csv, write_json, write_svg, WhitneyDiagnostics,
};
use rlocspace::PlaneSplit;

use super::{param_sets, rng, split_from, verdict, write_summary, Outcome};
use crate::config::Settings;
use crate::error::{usage, CliResult};
use crate::output::{OutputDir, Table};

/// Largest admissible `|sum - 1|` away from the truncation collar.
const SUM_TOL: f64 = 1e-8;
/// Largest admissible `max / min` of the scaled derivative bounds over levels.
const BOUND_SPREAD: f64 = 1.01;

#[derive(Serialize)]
struct SplitRow {
    split: String,
    j_max: u32,
    cubes: usize,
    dropped: usize,
    diagnostics: WhitneyDiagnostics,
    pou_order: u32,
    pou_samples: usize,
    pou_max_error: f64,
    pou_bound_spread: f64,
    passed: bool,
}

fn splits(settings: &Settings) -> CliResult<Vec<PlaneSplit>> {
    if settings.get("params").is_some() {
        let mut out: Vec<PlaneSplit> = Vec::new();
        for s in param_sets(settings, "default-grid")? {
            let sp = s.params.split();
            if !out.contains(&sp) {
                out.push(sp);
            }
        }
        return Ok(out);
    }
    if settings.get("n").is_some() || settings.get("l").is_some() {
        return Ok(vec![split_from(settings, 2)?]);
    }
    Ok(vec![
        PlaneSplit::new(2, 1)?,
        PlaneSplit::new(2, 0)?,
        PlaneSplit::new(3, 1)?,
    ])
}

fn cube_outlines(dec: &rlocspace::whitney::WhitneyDecomposition) -> Table {
    let mut t = Table::new(&["x", "y"]);
    for c in dec.cubes() {
        let b = c.inner();
        let (x0, y0, x1, y1) = (b.lower[0], b.lower[1], b.upper[0], b.upper[1]);
        t.block(
            String::new(),
            vec![
                vec![x0, y0],
                vec![x1, y0],
                vec![x1, y1],
                vec![x0, y1],
                vec![x0, y0],
            ],
        );
    }
    t
}

pub fn run(settings: &Settings) -> CliResult<Outcome> {
    let splits = splits(settings)?;
    let j_max: u32 = settings.parse_or("j-max", 6)?;
    let half = crate::config::parse_real(settings.str_or("box", "1"))?;
    let order: u32 = settings.parse_or("order", 2)?;
    let samples: usize = settings.parse_or("samples", 200)?;
    if !(half > 0.0) {
        return Err(usage("--box must be positive"));
    }
    let mut rng = rng(settings)?;
    let mut out = OutputDir::create(settings)?;
    let mut rows = Vec::new();
    let mut summary_csv = String::from(
        "split,j_max,cubes,dropped,disjoint,max_level_gap,ratio_min,ratio_max,pou_order,pou_max_error,pou_bound_spread,passed\n",
    );
    for split in splits {
        let n = split.n();
        let tag = format!("n{}l{}", n, split.l());
        let bbox = Aabb::cube(n, half);
        let dec = whitney_decompose(split, &bbox, j_max)?;
        let diag = dec.verify();
        let pou = partition_of_unity(&dec, order)?;
        let width = dec.collar_width();
        let mut err = 0.0f64;
        let mut taken = 0;
        let mut tries = 0usize;
        while taken < samples && tries < 1000 * samples.max(1) {
            tries += 1;
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-half..half)).collect();
            if split.distance(&x) < width {
                continue;
            }
            taken += 1;
            err = err.max((pou.sum(&x) - 1.0).abs());
        }
        let levels = pou.interior_levels();
        let spread = pou
            .alphas()
            .iter()
            .map(|a| pou.bound_spread(a.entries(), levels.clone()))
            .fold(1.0f64, f64::max);
        let passed = diag.passed && err <= SUM_TOL && spread <= BOUND_SPREAD && taken == samples;

        let mut buf = Vec::new();
        write_csv(&dec, &mut buf)?;
        out.csv(&format!("whitney-{tag}.csv"), "whitney.cubes/1", "none", &buf)?;
        let mut buf = Vec::new();
        write_json(&dec, &mut buf)?;
        out.raw(&format!("whitney-{tag}.json"), &buf)?;
        let mut levels_table = Table::new(&["level", "cubes"]);
        levels_table.block(
            tag.clone(),
            dec.level_counts()
                .into_iter()
                .map(|(j, c)| vec![j as f64, c as f64])
                .collect(),
        );
        out.gnuplot(
            &format!("whitney-{tag}-levels.dat"),
            "whitney.levels/1",
            "none",
            &levels_table,
        )?;
        if n == 2 {
            let mut svg = Vec::new();
            write_svg(&dec, &mut svg)?;
            out.raw(&format!("whitney-{tag}.svg"), &svg)?;
            out.gnuplot(
                &format!("whitney-{tag}-cubes.dat"),
                "whitney.outlines/1",
                "none",
                &cube_outlines(&dec),
            )?;
        }
        let r = &diag.distance_ratio_range;
        summary_csv.push_str(&format!(
            "{tag},{j_max},{},{},{},{},{:e},{:e},{order},{:e},{:e},{passed}\n",
            dec.cubes().len(),
            dec.dropped().len(),
            diag.disjoint,
            diag.max_adjacent_level_gap,
            r[0],
            r[1],
            err,
            spread
        ));
        rows.push(SplitRow {
            split: tag,
            j_max,
            cubes: dec.cubes().len(),
            dropped: dec.dropped().len(),
            diagnostics: diag,
            pou_order: order,
            pou_samples: taken,
            pou_max_error: err,
            pou_bound_spread: spread,
            passed,
        });
    }
    out.csv("whitney.csv", "whitney.summary/1", "none", summary_csv.as_bytes())?;
    let consistent = rows.iter().all(|r| r.passed);
    let message = format!(
        "whitney: {} decompositions, {}",
        rows.len(),
        verdict(consistent)
    );
    write_summary(&mut out, settings, consistent, rows)?;
    Ok(Outcome {
        consistent,
        message,
    })
}
