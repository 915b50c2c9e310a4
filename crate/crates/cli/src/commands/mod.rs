mod decompose;
mod hardy_sweep;
mod norms;
mod probe;
mod whitney;
mod witness;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::Value;

use rlocspace::decomposition::{select_params, ParamSet};
use rlocspace::PlaneSplit;

use crate::config::Settings;
use crate::error::{usage, CliResult};
use crate::output::{OutputDir, VERSION};

pub struct Outcome {
    pub consistent: bool,
    pub message: String,
}

pub fn run(settings: &Settings) -> CliResult<Outcome> {
    match settings.command.as_str() {
        "whitney" => whitney::run(settings),
        "hardy-sweep" => hardy_sweep::run(settings),
        "witness" => witness::run(settings),
        "norms" => norms::run(settings),
        "decompose" => decompose::run(settings),
        "probe-divergence" => probe::run(settings),
        other => Err(usage(format!("unknown subcommand `{other}`"))),
    }
}

/// Parameter sets of `--params` (or `default`), every one validated before
/// anything is computed.
fn param_sets(settings: &Settings, default: &str) -> CliResult<Vec<ParamSet>> {
    let sets = select_params(settings.str_or("params", default))?;
    if sets.is_empty() {
        return Err(usage("--params selects no parameter set"));
    }
    for s in &sets {
        s.params.require_banach_q()?;
    }
    Ok(sets)
}

/// `--n` / `--l` with `l` defaulting to `n - 1`.
fn split_from(settings: &Settings, default_n: usize) -> CliResult<PlaneSplit> {
    let n: usize = settings.parse_or("n", default_n)?;
    let l: usize = settings.parse_or("l", n.saturating_sub(1))?;
    Ok(PlaneSplit::new(n, l)?)
}

fn rng(settings: &Settings) -> CliResult<ChaCha8Rng> {
    Ok(ChaCha8Rng::seed_from_u64(settings.parse_or("seed", 0u64)?))
}

#[derive(Serialize)]
struct Summary<'a, T: Serialize> {
    command: &'a str,
    version: &'a str,
    config_hash: &'a str,
    consistent: bool,
    files: Vec<String>,
    details: T,
}

/// Writes `<command>-summary.json`, listing every file written before it.
fn write_summary<T: Serialize>(
    out: &mut OutputDir,
    settings: &Settings,
    consistent: bool,
    details: T,
) -> CliResult<()> {
    let name = format!("{}-summary.json", settings.command);
    let mut files = out.written().to_vec();
    files.push(name.clone());
    let summary = Summary {
        command: &settings.command,
        version: VERSION,
        config_hash: &out.config_hash().to_string(),
        consistent,
        files,
        details,
    };
    let value: Value = serde_json::to_value(&summary)?;
    out.json(&name, &value)
}

fn verdict(consistent: bool) -> &'static str {
    if consistent {
        "consistent"
    } else {
        "INCONSISTENT"
    }
}

/// `max / min` of positive values.
fn bracket(values: &[f64]) -> f64 {
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(0.0, f64::max);
    if lo > 0.0 {
        hi / lo
    } else {
        f64::INFINITY
    }
}
