//! One pass/fail line per acceptance criterion. Run with `--nocapture` to
//! see the lines; the test fails if any criterion is red.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rlocspace::decomposition::{
    compare_rloc_routes_covered, corpus, corpus_entry, default_grid, membership_reports,
    reinforced_divergence_probe, write_membership_csv, write_routes_csv, ProbeVerdict,
    RouteCoverage,
};
use rlocspace::discretize::{halvings, Aabb, Expr, FnExpr, Kappa};
use rlocspace::hardy::{
    boundary_hardy_refined, critical_quotient, fj_witness, hardy_quotient_1d, log_window,
    power_family, sharp_constant, subcritical_quotient, subcritical_witness, WeightSpec,
};
use rlocspace::profile::plateau;
use rlocspace::spaces::{homogeneity_ratio, lp_homogeneity_ratio};
use rlocspace::whitney::{partition_of_unity, whitney_decompose, write_csv};
use rlocspace::{CriticalityClass, PlaneSplit, SmoothnessParams};

type Check = Result<String, String>;

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn bracket(v: &[f64]) -> f64 {
    let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
    hi / lo
}

fn splits() -> Vec<PlaneSplit> {
    [(2, 1), (2, 0), (3, 1)]
        .iter()
        .map(|&(n, l)| PlaneSplit::new(n, l).unwrap())
        .collect()
}

fn whitney_invariants() -> Check {
    let mut notes = Vec::new();
    let mut ok = true;
    for split in splits() {
        let dec = whitney_decompose(split, &Aabb::cube(split.n(), 1.0), 6).map_err(|e| e.to_string())?;
        let d = dec.verify();
        let [lo, hi] = d.distance_ratio_range;
        ok &= d.disjoint && d.max_adjacent_level_gap <= 1 && hi / lo <= 8.0;
        notes.push(format!(
            "n{}l{}: disjoint={} gap={} ratio={:.2}",
            split.n(),
            split.l(),
            d.disjoint,
            d.max_adjacent_level_gap,
            hi / lo
        ));
    }
    ensure(ok, notes.join("; "))
}

fn partition_of_unity_checks() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut notes = Vec::new();
    let mut ok = true;
    for split in splits() {
        let n = split.n();
        let dec = whitney_decompose(split, &Aabb::cube(n, 1.0), 6).map_err(|e| e.to_string())?;
        let pou = partition_of_unity(&dec, 2).map_err(|e| e.to_string())?;
        let width = dec.collar_width();
        let mut err = 0.0f64;
        let mut taken = 0;
        while taken < 200 {
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
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
        ok &= err <= 1e-8 && spread <= 1.01;
        notes.push(format!("n{}l{}: |sum-1|={err:.1e} spread={spread:.4}", n, split.l()));
    }
    ensure(ok, notes.join("; "))
}

fn classical_hardy() -> Check {
    let grid = log_window(1.0, 60.0, 6000).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    let mut top = 0.0f64;
    for beta in [0.55, 0.75, 1.0, 1.5, 2.0] {
        let g = power_family(beta, &grid).map_err(|e| e.to_string())?;
        let q = hardy_quotient_1d(&g, 2.0, 0.0).map_err(|e| e.to_string())?;
        worst = worst.max((q * beta * beta - 1.0).abs());
        top = top.max(q);
    }
    let sharp = sharp_constant(2.0, 0.0);
    ensure(
        worst <= 0.05 && top < sharp,
        format!("max relative error {worst:.1e}, max quotient {top:.4} < {sharp}"),
    )
}

fn critical_sharpness() -> Check {
    let split = PlaneSplit::new(2, 1).unwrap();
    let params = SmoothnessParams::new(split, 0.5, 2.0, 2.0).map_err(|e| e.to_string())?;
    let log = WeightSpec::new(Kappa::LogPower(1.0), true);
    let one = WeightSpec::new(Kappa::One, true);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut a, mut b) = (Vec::new(), Vec::new());
    let mut tube = true;
    let mut widest = 0;
    for j in 2..=5 {
        let w = fj_witness(j, 2.0, split).map_err(|e| e.to_string())?;
        let grid = w.default_grid().map_err(|e| e.to_string())?;
        widest = widest.max(*grid.shape().iter().max().unwrap());
        let f = w.sample_on(&grid).map_err(|e| e.to_string())?;
        a.push(critical_quotient(&f, &params, &log).map_err(|e| e.to_string())?.value);
        b.push(critical_quotient(&f, &params, &one).map_err(|e| e.to_string())?.value);
        let bound = w.tube_lower_bound().unwrap();
        tube &= (bound - (j as f64).sqrt()).abs() < 1e-12
            && w.min_on_tube(j, 2000, &mut rng) >= bound * (1.0 - 1e-12);
    }
    let increasing = a.windows(2).all(|w| w[1] > w[0]);
    let width = bracket(&b);
    ensure(
        increasing && width <= 3.0 && tube,
        format!(
            "log quotients {a:.3?}, kappa=1 bracket {width:.3}, tube bound {tube}, largest grid axis {widest}"
        ),
    )
}

fn subcritical_sharpness() -> Check {
    let split = PlaneSplit::new(2, 1).unwrap();
    let params = SmoothnessParams::new(split, 0.25, 2.0, 2.0).map_err(|e| e.to_string())?;
    let pow = WeightSpec::new(Kappa::InversePower(0.25), false);
    let one = WeightSpec::new(Kappa::One, false);
    let (mut a, mut b) = (Vec::new(), Vec::new());
    for j in 2..=5 {
        let w = subcritical_witness(j, 0.25, 2.0, split).map_err(|e| e.to_string())?;
        let f = w
            .sample_on(&w.default_grid().map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
        a.push(subcritical_quotient(&f, &params, &pow).map_err(|e| e.to_string())?.value);
        b.push(subcritical_quotient(&f, &params, &one).map_err(|e| e.to_string())?.value);
    }
    let increasing = a.windows(2).all(|w| w[1] > w[0]);
    let width = bracket(&b);
    ensure(
        increasing && width <= 3.0,
        format!("t^-1/4 quotients {a:.3?}, kappa=1 bracket {width:.3}"),
    )
}

fn boundary_hardy() -> Check {
    let split = PlaneSplit::new(2, 1).unwrap();
    let mut notes = Vec::new();
    let mut ok = true;
    for (r, s, entry) in [(1u32, 1.0, "z_gaussian"), (2, 2.0, "z2_gaussian")] {
        let params = SmoothnessParams::new(split, s, 2.0, 2.0).map_err(|e| e.to_string())?;
        let e = corpus_entry(entry).map_err(|e| e.to_string())?;
        let mut finest = Vec::new();
        let mut change = 0.0f64;
        for k in 0..=3u32 {
            let f = e.dilated(2, k).map_err(|e| e.to_string())?;
            let bounds = f.support().unwrap();
            let scale = 0.5f64.powi(k as i32);
            let hs = [scale / 16.0, scale / 32.0];
            let q = boundary_hardy_refined(f.as_ref(), &bounds, &hs, &params, r)
                .map_err(|e| e.to_string())?;
            change = change.max((q[1].value / q[0].value - 1.0).abs());
            finest.push(q[1].value);
        }
        let width = bracket(&finest);
        let finite = finest.iter().all(|v| v.is_finite());
        ok &= finite && change < 0.10 && width <= 4.0;
        notes.push(format!("r={r}: refinement {change:.1e}, dilation bracket {width:.3}"));
    }
    ensure(ok, notes.join("; "))
}

fn homogeneity() -> Check {
    let bump: Arc<dyn Expr> = Arc::new(
        FnExpr::new(2, "plateau", |x| plateau((x[0] * x[0] + x[1] * x[1]).sqrt()))
            .with_support(Aabb::cube(2, 1.0)),
    );
    let split = PlaneSplit::new(2, 1).unwrap();
    let h1 = SmoothnessParams::new(split, 1.0, 2.0, 2.0).map_err(|e| e.to_string())?;
    let mut plain = 0.0f64;
    let mut ratios = Vec::new();
    for k in 1..=4 {
        let lambda = 0.5f64.powi(k);
        let r0 = lp_homogeneity_ratio(bump.clone(), lambda, 2.0, 128).map_err(|e| e.to_string())?;
        plain = plain.max((r0 - 1.0).abs());
        ratios.push(homogeneity_ratio(bump.clone(), lambda, &h1, 128).map_err(|e| e.to_string())?);
    }
    let width = bracket(&ratios);
    ensure(
        plain <= 1e-6 && width <= 3.0,
        format!("L2 deviation {plain:.1e}, H^1 bracket {width:.3}"),
    )
}

fn reinforced_gap() -> Check {
    let split = PlaneSplit::new(2, 1).unwrap();
    let params = SmoothnessParams::new(split, 0.5, 2.0, 2.0).map_err(|e| e.to_string())?;
    let hs = halvings(1.0 / 16.0, 4);
    let probe = |id: &str| {
        let f = corpus_entry(id).and_then(|e| e.expr(2))?;
        reinforced_divergence_probe(f.as_ref(), &params, &hs)
    };
    let div = probe("plateau").map_err(|e| e.to_string())?;
    let conv = probe("z_gaussian").map_err(|e| e.to_string())?;
    let shrink = conv.shrink.iter().cloned().fold(f64::INFINITY, f64::min);
    ensure(
        div.verdict == ProbeVerdict::LogDivergent
            && div.relative_residual < 0.10
            && conv.verdict == ProbeVerdict::Convergent
            && shrink >= 1.5,
        format!(
            "plateau slope {:.3} residual {:.4}; control min shrink {shrink:.2}",
            div.slope, div.relative_residual
        ),
    )
}

/// Membership and route CSV bytes of the full corpus over the default grid.
fn full_suite() -> Result<(Vec<u8>, Vec<u8>, String), String> {
    let entries = corpus();
    let sets = default_grid();
    let reports = membership_reports(&entries, &sets).map_err(|e| e.to_string())?;
    let routes = compare_rloc_routes_covered(&entries, &sets, &reports, RouteCoverage::Sample)
        .map_err(|e| e.to_string())?;
    let bad: Vec<String> = reports
        .iter()
        .filter(|r| !r.consistent_with_theorem)
        .map(|r| format!("{} @ {}", r.entry, r.params_id))
        .collect();
    let split: Vec<String> = routes
        .iter()
        .filter(|r| !r.agree)
        .map(|r| format!("{} @ {}", r.entry, r.params_id))
        .collect();
    let covered = entries
        .iter()
        .all(|e| routes.iter().any(|r| r.entry == e.id()));
    let critical = sets
        .iter()
        .filter(|s| matches!(s.params.classify(), CriticalityClass::Critical(_)))
        .count();
    let mut m = Vec::new();
    write_membership_csv(&reports, &mut m).map_err(|e| e.to_string())?;
    let mut r = Vec::new();
    write_routes_csv(&routes, &mut r).map_err(|e| e.to_string())?;
    let detail = format!(
        "{} reports ({critical} critical sets), {} route checks, inconsistent {bad:?}, routes disagree {split:?}",
        reports.len(),
        routes.len()
    );
    if reports.len() >= 72 && bad.is_empty() && split.is_empty() && covered {
        Ok((m, r, detail))
    } else {
        Err(detail)
    }
}

fn cheap_suite() -> Vec<u8> {
    let mut out = Vec::new();
    for split in splits() {
        let dec = whitney_decompose(split, &Aabb::cube(split.n(), 1.0), 6).unwrap();
        write_csv(&dec, &mut out).unwrap();
    }
    out
}

#[test]
fn acceptance() {
    let mut first_suite = None;
    let criteria: Vec<(&str, Box<dyn FnOnce() -> Check + '_>)> = vec![
        ("Whitney invariants", Box::new(whitney_invariants)),
        ("partition of unity", Box::new(partition_of_unity_checks)),
        ("classical 1-D Hardy", Box::new(classical_hardy)),
        ("critical sharpness", Box::new(critical_sharpness)),
        ("subcritical sharpness", Box::new(subcritical_sharpness)),
        ("boundary Hardy", Box::new(boundary_hardy)),
        ("homogeneity", Box::new(homogeneity)),
        ("reinforced gap", Box::new(reinforced_gap)),
        (
            "decomposition theorems",
            Box::new(|| {
                let (m, r, detail) = full_suite()?;
                first_suite = Some((m, r));
                Ok(detail)
            }),
        ),
    ];
    let mut failed = Vec::new();
    let mut report = |i: usize, name: &str, t: Instant, result: std::thread::Result<Check>| {
        let (tag, detail) = match result {
            Ok(Ok(d)) => ("PASS", d),
            Ok(Err(d)) => ("FAIL", d),
            Err(_) => ("FAIL", "panicked".to_string()),
        };
        if tag == "FAIL" {
            failed.push(i);
        }
        println!(
            "criterion {i:>2} [{tag}] {name} ({:.1} s): {detail}",
            t.elapsed().as_secs_f64()
        );
    };
    for (i, (name, check)) in criteria.into_iter().enumerate() {
        let t = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check));
        report(i + 1, name, t, result);
    }
    let t = Instant::now();
    let determinism = catch_unwind(AssertUnwindSafe(|| -> Check {
        let (m0, r0) = first_suite
            .clone()
            .ok_or("the full suite did not complete")?;
        let (m1, r1, _) = full_suite()?;
        let cheap = cheap_suite() == cheap_suite();
        ensure(
            m0 == m1 && r0 == r1 && cheap,
            format!(
                "membership {} bytes identical={}, routes {} bytes identical={}, Whitney CSV identical={cheap}",
                m0.len(),
                m0 == m1,
                r0.len(),
                r0 == r1
            ),
        )
    }));
    report(10, "determinism", t, determinism);
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
