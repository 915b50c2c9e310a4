use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rlocspace"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited")
}

/// Rows of a CSV written by the tool, comment line skipped.
fn rows(path: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn column(table: &[Vec<String>], name: &str) -> Vec<String> {
    let i = table[0].iter().position(|c| c == name).unwrap();
    table[1..].iter().map(|r| r[i].clone()).collect()
}

#[test]
fn fractional_q_below_one_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(
        &["norms", "--entry", "gaussian", "--s", "1.5", "--p", "2", "--q", "0.5"],
        tmp.path(),
    );
    assert_eq!(code(&o), 2);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("q >= 1"), "{err}");
    // fail-fast: nothing was written
    assert!(std::fs::read_dir(tmp.path()).unwrap().next().is_none());
}

#[test]
fn usage_errors_exit_two() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(&["norms", "--entry", "nope", "--s", "1", "--p", "2"], tmp.path())), 2);
    assert_eq!(code(&run(&["frobnicate"], tmp.path())), 2);
    assert_eq!(code(&run(&["whitney", "--bogus", "1"], tmp.path())), 2);
    assert_eq!(code(&run(&["witness", "--J", "5..2"], tmp.path())), 2);
    assert_eq!(code(&run(&["witness", "--kind", "sub", "--J", "1..3"], tmp.path())), 2);
    assert_eq!(
        code(&run(&["probe-divergence", "--params", "n=2,l=1,s=3/4,p=2"], tmp.path())),
        2
    );
    assert_eq!(
        code(&run(&["decompose", "--params", "n=2,l=1,s=1,p=2,q=0.5"], tmp.path())),
        2
    );
}

#[test]
fn critical_witness_quotient_increases() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(
        &["witness", "--kind", "fJ", "--p", "2", "--J", "2..5", "--kappa", "log^1"],
        tmp.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let t = rows(&tmp.path().join("witness-fJ.csv"));
    let q: Vec<f64> = column(&t, "quotient").iter().map(|v| v.parse().unwrap()).collect();
    assert_eq!(q.len(), 4);
    assert!(q.windows(2).all(|w| w[1] > w[0]), "{q:?}");
    assert!(tmp.path().join("witness-fJ.dat").exists());
}

#[test]
fn config_file_with_flag_override() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.cfg");
    std::fs::write(&cfg, "seed = 5\n[witness]\nkind = sub\nJ = 2..3\nkappa = 1\n").unwrap();
    let out = tmp.path().join("o");
    let o = run(
        &["witness", "--config", cfg.to_str().unwrap(), "--J", "2..4"],
        &out,
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let t = rows(&out.join("witness-sub.csv"));
    assert_eq!(t.len(), 1 + 3);
    let bad = tmp.path().join("bad.cfg");
    std::fs::write(&bad, "[witness]\nunknown = 1\n").unwrap();
    assert_eq!(code(&run(&["witness", "--config", bad.to_str().unwrap()], &out)), 2);
}

#[test]
fn identical_invocations_give_identical_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let args = ["hardy-sweep", "--dilations", "0..1"];
    assert_eq!(code(&run(&args, &a)), 0);
    assert_eq!(code(&run(&args, &b)), 0);
    for name in ["hardy-power.csv", "hardy-boundary.csv", "hardy-power.dat"] {
        let x = std::fs::read(a.join(name)).unwrap();
        let y = std::fs::read(b.join(name)).unwrap();
        assert_eq!(x, y, "{name}");
    }
    let head = std::fs::read_to_string(a.join("hardy-boundary.csv")).unwrap();
    let first = head.lines().next().unwrap();
    assert!(first.starts_with(&format!("# rlocspace {} ", env!("CARGO_PKG_VERSION"))));
    assert!(first.contains("config=") && first.contains("resolution=2^-4,2^-5"));
    // a different setting changes the hash
    let c = tmp.path().join("c");
    assert_eq!(code(&run(&["hardy-sweep", "--dilations", "0..2"], &c)), 0);
    let other = std::fs::read_to_string(c.join("hardy-boundary.csv")).unwrap();
    assert_ne!(other.lines().next(), Some(first));
}

#[test]
fn whitney_pictures_and_invariants() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["whitney", "--n", "2", "--l", "1", "--j-max", "5", "--seed", "3"], tmp.path());
    assert_eq!(code(&o), 0);
    let svg = std::fs::read_to_string(tmp.path().join("whitney-n2l1.svg")).unwrap();
    assert!(svg.starts_with("<svg") || svg.starts_with("<?xml"));
    let t = rows(&tmp.path().join("whitney.csv"));
    assert_eq!(column(&t, "passed"), ["true"]);
    let summary: serde_json::Value = serde_json::from_slice(
        &std::fs::read(tmp.path().join("whitney-summary.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(summary["consistent"], true);
}

#[test]
fn probe_separates_plateau_from_control() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["probe-divergence"], tmp.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let t = rows(&tmp.path().join("probe.csv"));
    let verdicts = column(&t, "verdict");
    assert!(verdicts[0] == "log-divergent" && verdicts.last().unwrap() == "convergent");
}

#[test]
fn norms_of_one_entry() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(
        &["norms", "--entry", "z2_gaussian", "--s", "3/2", "--p", "2"],
        tmp.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let t = rows(&tmp.path().join("norms-membership.csv"));
    assert_eq!(column(&t, "in_rloc"), ["true"]);
    let r = rows(&tmp.path().join("norms-routes.csv"));
    assert_eq!(column(&r, "agree"), ["true"]);
}

#[test]
fn full_corpus_decomposition_is_consistent() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(
        &["decompose", "--corpus", "all", "--params", "default-grid"],
        tmp.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let t = rows(&tmp.path().join("decompose-membership.csv"));
    let col = column(&t, "consistent_with_theorem");
    assert_eq!(col.len(), 140);
    assert!(col.iter().all(|v| v == "true"));
    let r = rows(&tmp.path().join("decompose-routes.csv"));
    assert!(column(&r, "agree").iter().all(|v| v == "true"));
}
