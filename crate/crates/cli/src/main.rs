//! `klab`: command line driver for the kinterp checks.

mod config;
mod run;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use config::{build, load_config, ConfigError, Kind, Origin, RawScenario, Scenario};

const USAGE: &str = "\
usage:
  klab run <config> [--seed <u64>] [--grid tmin,tmax,ppd] [--summary <json>]
  klab <kind> --key value ... [--out <csv>] [--seed <u64>] [--grid tmin,tmax,ppd] [--summary <json>]

kinds: sv-check, norm, holmstedt, negative-demo, reiterate, lk-check, hardy-check, constants
Flags of a kind are the config keys of that kind (dashes and underscores are interchangeable).
Exit status: 0 all checks pass, 1 a check or hypothesis gate failed, 2 invalid configuration.";

struct Globals {
    seed: u64,
    grid: Option<String>,
    summary: Option<PathBuf>,
}

fn config_error(e: impl std::fmt::Display) -> ExitCode {
    eprintln!("config error: {e}");
    ExitCode::from(2)
}

/// Splits `--key value` pairs, pulling out the global flags.
fn parse_flags(args: &[String]) -> Result<(Vec<(String, String)>, Globals), ConfigError> {
    let mut g = Globals {
        seed: 0,
        grid: None,
        summary: None,
    };
    let mut pairs = Vec::new();
    let mut it = args.iter();
    while let Some(a) = it.next() {
        let Some(name) = a.strip_prefix("--") else {
            return Err(ConfigError {
                origin: Origin::Flag(a.clone()),
                msg: "expected a --flag".into(),
            });
        };
        let key = name.replace('-', "_");
        let Some(value) = it.next() else {
            return Err(ConfigError {
                origin: Origin::Flag(name.into()),
                msg: "missing value".into(),
            });
        };
        match key.as_str() {
            "seed" => {
                g.seed = value.parse().map_err(|_| ConfigError {
                    origin: Origin::Flag(name.into()),
                    msg: "seed must be a u64".into(),
                })?
            }
            "grid" => g.grid = Some(value.clone()),
            "summary" => g.summary = Some(PathBuf::from(value)),
            _ => pairs.push((key, value.clone())),
        }
    }
    Ok((pairs, g))
}

fn execute(scenarios: &[Scenario], summary_path: Option<&Path>) -> ExitCode {
    if scenarios.is_empty() {
        return ExitCode::SUCCESS;
    }
    let outcomes = run::run_all(scenarios);
    for o in &outcomes {
        eprintln!("{}", run::report_line(o));
    }
    if let Err(e) = run::write_outputs(&outcomes) {
        eprintln!("error writing output: {e}");
        return ExitCode::from(1);
    }
    let summary = run::summary(&outcomes);
    match summary_path {
        Some(p) => {
            if let Err(e) = run::write_atomic(p, &summary) {
                eprintln!("error writing summary: {e}");
                return ExitCode::from(1);
            }
        }
        None => print!("{summary}"),
    }
    ExitCode::from(run::exit_code(&outcomes) as u8)
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let Some(cmd) = args.first() else {
        eprintln!("{USAGE}");
        return ExitCode::from(2);
    };
    match cmd.as_str() {
        "help" | "--help" | "-h" => {
            println!("{USAGE}");
            ExitCode::SUCCESS
        }
        "run" => {
            let Some(path) = args.get(1) else {
                return config_error("run needs a config path");
            };
            let (rest, g) = match parse_flags(&args[2..]) {
                Ok(v) => v,
                Err(e) => return config_error(e),
            };
            if let Some((k, _)) = rest.first() {
                return config_error(format!("unknown flag --{k} for run"));
            }
            let mut scenarios = match load_config(Path::new(path), g.seed) {
                Ok(s) => s,
                Err(e) => return config_error(format!("{path}: {e}")),
            };
            if let Some(grid) = &g.grid {
                // The command line grid overrides every scenario.
                let raw = {
                    let mut r = RawScenario::new("grid", Origin::Flag("grid".into()));
                    r.insert("kind", "sv-check", Origin::Flag("grid".into())).expect("fresh");
                    r.insert("b", "one", Origin::Flag("grid".into())).expect("fresh");
                    r.insert("grid", grid, Origin::Flag("grid".into())).expect("fresh");
                    r
                };
                match build(&raw, Path::new("."), g.seed) {
                    Ok(s) => scenarios.iter_mut().for_each(|sc| sc.grid = s.grid),
                    Err(e) => return config_error(e),
                }
            }
            execute(&scenarios, g.summary.as_deref())
        }
        kind => {
            if Kind::parse(kind).is_none() {
                eprintln!("unknown command '{kind}'\n{USAGE}");
                return ExitCode::from(2);
            }
            let (pairs, g) = match parse_flags(&args[1..]) {
                Ok(v) => v,
                Err(e) => return config_error(e),
            };
            let mut raw = RawScenario::new(kind, Origin::Flag(kind.into()));
            let mut res = raw.insert("kind", kind, Origin::Flag(kind.into()));
            for (k, v) in &pairs {
                res = res.and_then(|_| raw.insert(k, v, Origin::Flag(k.replace('_', "-"))));
            }
            if let Some(grid) = &g.grid {
                raw.set_default("grid", grid, Origin::Flag("grid".into()));
            }
            let sc = match res.and_then(|_| build(&raw, Path::new("."), g.seed)) {
                Ok(s) => s,
                Err(e) => return config_error(e),
            };
            execute(&[sc], g.summary.as_deref())
        }
    }
}
