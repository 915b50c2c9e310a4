//! `rlocspace`: parameter sweeps, corpus experiments, witness families and
//! table emission.
//!
//! Exit status: 0 when every requested verdict is consistent, 1 when some
//! verdict is not, 2 on a usage error or a failed computation.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::parser::ValueSource;
use clap::{Arg, ArgMatches, Command};

use commands::Outcome;
use config::{ConfigFile, Settings};
use error::{usage, CliResult};

fn opt(name: &'static str, help: &'static str) -> Arg {
    Arg::new(name).long(name).value_name("VALUE").help(help)
}

fn common() -> Vec<Arg> {
    vec![
        opt(
            "params",
            "parameter sets: `default-grid` or `n=2,l=1,s=3/2,p=2[,q=2][,eps=0.5]` joined by `;`",
        ),
        opt("config", "config file with `key = value` lines and `[command]` sections"),
        opt("out", "output directory [default: out]"),
        opt("jobs", "worker threads, 0 for all cores [default: 0]"),
        opt(
            "resolution",
            "spacing `h` (expanded to h, h/2, h/4) or a decreasing list `h1,h2,...`",
        ),
        opt("seed", "seed of the sampling audits [default: 0]"),
    ]
}

fn cli() -> Command {
    Command::new("rlocspace")
        .version(output::VERSION)
        .about("Refined localization spaces near flat planes: sweeps, experiments and tables")
        .subcommand_required(true)
        .arg_required_else_help(true)
        .subcommand(
            Command::new("whitney")
                .about("Whitney decompositions and partitions of unity with their invariants")
                .args(common())
                .args([
                    opt("n", "ambient dimension (with --l); default: (2,1), (2,0), (3,1)"),
                    opt("l", "plane dimension [default: n-1]"),
                    opt("j-max", "finest level [default: 6]"),
                    opt("box", "half-width of the bounding cube, dyadic [default: 1]"),
                    opt("order", "derivative order of the partition bounds [default: 2]"),
                    opt("samples", "random points for the sum-to-one audit [default: 200]"),
                ]),
        )
        .subcommand(
            Command::new("hardy-sweep")
                .about("Hardy quotient tables: one-dimensional power family and boundary Hardy")
                .args(common())
                .args([
                    opt("family", "power, boundary or all [default: all]"),
                    opt("beta", "power exponents [default: 0.55,0.75,1,1.5,2]"),
                    opt("p", "integrability of the power family [default: 2]"),
                    opt("alpha", "weight exponent of the power family [default: 0]"),
                    opt("cells", "cells of the logarithmic window [default: 6000]"),
                    opt("depth", "length of the logarithmic window [default: 60]"),
                    opt("dilations", "dilation range k of the boundary family [default: 0..3]"),
                ]),
        )
        .subcommand(
            Command::new("witness")
                .about("Extremal families f_J and f_j with quotient-versus-level tables")
                .args(common())
                .args([
                    opt("kind", "fJ (critical multi-level) or sub (single bump) [default: fJ]"),
                    opt("J", "level range [default: 2..5]"),
                    opt("kappa", "weight factor 1, log^d or pow^d [default: log^1 or pow^s]"),
                    opt("n", "ambient dimension [default: 2]"),
                    opt("l", "plane dimension [default: n-1]"),
                    opt("p", "integrability [default: 2]"),
                    opt("q", "fine index [default: 2]"),
                    opt("s", "smoothness of the sub family [default: 1/4]"),
                    opt("samples", "random points of the tube audit [default: 2000]"),
                ]),
        )
        .subcommand(
            Command::new("norms")
                .about("All norms and membership verdicts of one corpus entry")
                .args(common())
                .args([
                    opt("entry", "corpus entry id"),
                    opt("n", "ambient dimension [default: 2]"),
                    opt("l", "plane dimension [default: n-1]"),
                    opt("s", "smoothness"),
                    opt("p", "integrability"),
                    opt("q", "fine index [default: 2]"),
                    opt("eps", "collar width [default: 0.5]"),
                    opt("routes", "also run the partition route [default: true]"),
                ]),
        )
        .subcommand(
            Command::new("decompose")
                .about("Membership reports over corpus and parameter grid")
                .args(common())
                .args([
                    opt("corpus", "`all` or comma-separated entry ids [default: all]"),
                    opt("routes", "partition-route coverage: none, sample or all [default: sample]"),
                    opt("experiments", "run the dilation experiments too [default: false]"),
                ]),
        )
        .subcommand(
            Command::new("probe-divergence")
                .about("Logarithmic divergence probe of the critical collar integral")
                .args(common())
                .args([
                    opt("corpus", "entries to probe [default: plateau,z_gaussian]"),
                    opt("n", "ambient dimension [default: 2]"),
                    opt("l", "plane dimension [default: n-1]"),
                    opt("p", "integrability [default: 2]"),
                    opt("eps", "collar width [default: 0.5]"),
                ]),
        )
}

/// Flags given on the command line, by long name.
fn flags(matches: &ArgMatches) -> Vec<(String, String)> {
    let mut out = Vec::new();
    for id in matches.ids() {
        let id = id.as_str();
        if matches.value_source(id) != Some(ValueSource::CommandLine) {
            continue;
        }
        if let Some(raw) = matches.get_raw(id) {
            let v: Vec<String> = raw.map(|s| s.to_string_lossy().into_owned()).collect();
            out.push((id.to_string(), v.join(",")));
        }
    }
    out
}

fn dispatch(matches: &ArgMatches) -> CliResult<Outcome> {
    let (name, sub) = matches
        .subcommand()
        .ok_or_else(|| usage("missing subcommand"))?;
    let spec = cli();
    let known: Vec<String> = spec
        .find_subcommand(name)
        .expect("subcommand is registered")
        .get_arguments()
        .filter_map(|a| a.get_long().map(str::to_string))
        .collect();
    let file = match sub.get_one::<String>("config") {
        Some(path) => Some(ConfigFile::load(&PathBuf::from(path))?),
        None => None,
    };
    let settings = Settings::resolve(name, file.as_ref(), flags(sub), &known)?;
    let jobs: usize = settings.parse_or("jobs", 0)?;
    if jobs > 0 {
        // a second pool in the same process is refused; the first one stays
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global();
    }
    commands::run(&settings)
}

fn main() -> ExitCode {
    let matches = match cli().try_get_matches() {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = dispatch(&matches);
    match &result {
        Ok(outcome) => println!("{}", outcome.message),
        Err(e) => eprintln!("error: {e}"),
    }
    ExitCode::from(exit_code(&result))
}

/// 0 consistent, 1 inconsistent, 2 for anything that stopped the run.
fn exit_code(result: &CliResult<Outcome>) -> u8 {
    match result {
        Ok(o) if o.consistent => 0,
        Ok(_) => 1,
        Err(_) => 2,
    }
}
