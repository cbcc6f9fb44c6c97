use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use mmfs_core::harness::{
    generate_named, max_ratio, run_experiment, search_extremal, standard_suite, suite_jsonl, to_jsonl,
    ExperimentSpec,
};
use mmfs_core::io::{read_signal, write_signal};
use mmfs_core::maximal::MaximalSpec;
use mmfs_core::operators::OperatorSpec;
use mmfs_core::young::{bp_condition_check, condition_1_10_check};
use mmfs_core::{Error, GridFunction, TorusGrid, YoungFunction};

/// Discrete lab for Fefferman–Stein inequalities of maximal and maximally
/// modulated operators.
#[derive(Parser)]
#[command(name = "mmfs", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write a corpus signal (weight or test function) to a file.
    Gen {
        /// lognormal, bump:ε, power:a, two-bump, gaussian, block or modes
        family: String,
        #[arg(long = "J", default_value_t = 8)]
        levels: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output path (`.bin` for binary); standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Apply a maximal operator (M, M^k:3, Ms:1.5, MA:logpow:2) or an
    /// operator (hilbert, carleson, walsh, lacunary:θ,b, bvmult:K,s,
    /// polycarleson:d,g) to a signal file.
    Apply {
        op: String,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one experiment from a key=value config; flags override the file.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        over: Overrides,
    },
    /// Extremal search for the ratio of an experiment config.
    Search {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 200)]
        budget: usize,
        #[command(flatten)]
        over: Overrides,
    },
    /// Run the standard suite of every experiment kind.
    Suite {
        #[arg(long)]
        out: PathBuf,
    },
    /// Tail-integral verdict for a Young function.
    BpCheck {
        young: String,
        #[arg(long)]
        p: f64,
        #[arg(long, value_enum, default_value_t = Condition::Fs)]
        condition: Condition,
        /// Lower integration limit.
        #[arg(long, default_value_t = 1.0)]
        from: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Condition {
    /// `∫^∞ (t/A(t))^{p'-1} dt/t`
    Fs,
    /// `∫^∞ B(t)/t^p dt/t`
    Bp,
}

#[derive(Args)]
struct Overrides {
    #[arg(long = "J")]
    levels: Option<u32>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    p: Option<String>,
    #[arg(long)]
    r: Option<String>,
    #[arg(long)]
    q: Option<String>,
    #[arg(long)]
    k: Option<String>,
    #[arg(long)]
    young: Option<String>,
    #[arg(long)]
    op: Option<String>,
}

impl Overrides {
    fn apply(&self, spec: &mut ExperimentSpec) -> Result<(), Error> {
        let text = [
            ("J", self.levels.map(|v| v.to_string())),
            ("seed", self.seed.map(|v| v.to_string())),
            ("trials", self.trials.map(|v| v.to_string())),
            ("p", self.p.clone()),
            ("r", self.r.clone()),
            ("q", self.q.clone()),
            ("k", self.k.clone()),
            ("A", self.young.clone()),
            ("op", self.op.clone()),
        ];
        for (key, value) in text {
            if let Some(v) = value {
                spec.set(key, &v).map_err(|e| Error::Validation(format!("--{key}: {e}")))?;
            }
        }
        Ok(())
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidArgument(_) | Error::Validation(_) | Error::Unsupported(_) => 2,
        Error::InvariantBreach(_) | Error::DegenerateTrial { .. } | Error::ConstructionFailure { .. } => 4,
        _ => 3,
    }
}

fn load_spec(config: &Path, over: &Overrides) -> Result<ExperimentSpec, Error> {
    let text = fs::read_to_string(config)?;
    let mut spec = ExperimentSpec::from_config(&text).map_err(|e| match e {
        Error::Parse { line, message } => {
            Error::Validation(format!("{}:{line}: {message}", config.display()))
        }
        other => other,
    })?;
    over.apply(&mut spec)?;
    spec.validate()?;
    Ok(spec)
}

fn write_out(path: Option<&Path>, f: &GridFunction) -> Result<(), Error> {
    match path {
        Some(p) => write_signal(p, f),
        None => {
            std::io::stdout().write_all(mmfs_core::io::to_csv(f).as_bytes())?;
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.cmd {
        Cmd::Gen { family, levels, seed, out } => {
            let grid = TorusGrid::new(levels).map_err(|e| Error::Validation(e.to_string()))?;
            let f = generate_named(&family, grid, seed)?;
            write_out(out.as_deref(), &f)
        }
        Cmd::Apply { op, input, out } => {
            let spec = match MaximalSpec::parse(&op) {
                Ok(m) => Ok(m),
                Err(_) => Err(OperatorSpec::parse(&op)?),
            };
            let f = read_signal(&input)?;
            let (kind, g) = match spec {
                Ok(m) => ("maximal", m.apply_abs(&f)?),
                Err(o) => ("operator", o.apply(&f)?),
            };
            let meta = json!({
                "op": op,
                "class": kind,
                "cells": f.len(),
                "input": input.display().to_string(),
                "output": out.as_ref().map(|p| p.display().to_string()),
            });
            eprintln!("{meta}");
            write_out(out.as_deref(), &g)
        }
        Cmd::Experiment { config, out, over } => {
            let spec = load_spec(&config, &over)?;
            let records = run_experiment(&spec)?;
            fs::write(&out, to_jsonl(&records)?)?;
            println!("{} trials={} max_ratio={}", spec.kind, records.len(), max_ratio(&records));
            Ok(())
        }
        Cmd::Search { config, out, budget, over } => {
            if budget == 0 {
                return Err(Error::Validation("--budget must be at least 1".into()));
            }
            let spec = load_spec(&config, &over)?;
            let mut result = search_extremal(&spec, budget)?;
            let stem = out.with_extension("");
            let f_path = PathBuf::from(format!("{}_f.csv", stem.display()));
            let w_path = PathBuf::from(format!("{}_w.csv", stem.display()));
            write_signal(&f_path, result.best_f())?;
            write_signal(&w_path, result.best_w().as_function())?;
            result.best.files.insert("f".into(), json!(f_path.display().to_string()));
            result.best.files.insert("w".into(), json!(w_path.display().to_string()));
            fs::write(&out, to_jsonl(std::slice::from_ref(&result.best))?)?;
            println!(
                "{} iterations={} best_ratio={} initial_ratio={}",
                spec.kind, result.iterations, result.best.ratio, result.trace[0]
            );
            Ok(())
        }
        Cmd::Suite { out } => {
            let text = suite_jsonl(&standard_suite())?;
            fs::write(&out, &text)?;
            println!("records={}", text.lines().count());
            Ok(())
        }
        Cmd::BpCheck { young, p, condition, from } => {
            let a = YoungFunction::parse(&young)?;
            let v = match condition {
                Condition::Fs => condition_1_10_check(&a, p, from)?,
                Condition::Bp => bp_condition_check(&a, p, from)?,
            };
            let verdict = serde_json::to_value(v.verdict)?;
            println!(
                "{} partial_integral={} tail_power={} tail_log_power={} local_slopes={}",
                verdict.as_str().unwrap_or_default(),
                v.partial_integral,
                v.tail_power.map_or("none".to_string(), |x| (x + 0.0).to_string()),
                v.tail_log_power.map_or("none".to_string(), |x| (x + 0.0).to_string()),
                serde_json::to_string(&v.local_slopes)?,
            );
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
