//! Command-line front end.
//!
//! Exit codes: 0 when every asserted check holds, 2 when a bound or check
//! fails, 1 for usage, config or I/O errors.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use super::bounds::rate_accounting;
use super::config::ExperimentConfig;
use super::trials::run_error_trials;
use super::{lemmas, HarnessError};
use crate::network::{random_network, FieldDesc, NetworkSpec};
use crate::qcheck;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_BOUND: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "sqnc", version, about = "Secure network code simulator and checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the Monte Carlo error trials of a config file.
    Simulate(SimulateArgs),
    /// Block lengths, overhead and rate at a scale index.
    Rate(RateArgs),
    /// Statistical checks of the probabilistic lemmas.
    Lemmas(LemmaArgs),
    /// Validate, generate or analyse network files.
    #[command(subcommand)]
    Network(NetworkCommand),
    /// Exact state-vector checks on tiny systems.
    Qcheck,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long)]
    config: PathBuf,
    /// Directory for summary.json and trials.csv (overrides the config).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    root_seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
}

#[derive(Args, Debug)]
struct RateArgs {
    /// Base field order, a prime power.
    #[arg(long, default_value_t = 2)]
    q: u64,
    #[arg(long)]
    m0: usize,
    #[arg(long)]
    m1: usize,
    /// One or more scale indices.
    #[arg(long, required = true, num_args = 1..)]
    ell: Vec<u128>,
}

#[derive(Args, Debug)]
struct LemmaArgs {
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Subcommand, Debug)]
enum NetworkCommand {
    /// Check a network file and list every violation.
    Validate { path: PathBuf },
    /// Write a seeded random network.
    Gen {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        m0: usize,
        #[arg(long)]
        c: usize,
        #[arg(long, default_value_t = 2)]
        q: u64,
        /// Attacked edge IDs.
        #[arg(long, value_delimiter = ',')]
        attacked: Vec<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Transfer and injection matrices of a network file.
    Transfer { path: PathBuf },
}

/// Splits a prime power into `(p, d)`.
pub fn prime_power(q: u64) -> Option<FieldDesc> {
    if q < 2 {
        return None;
    }
    let p = (2..=q).find(|d| q.is_multiple_of(*d))?;
    let mut rest = q;
    let mut d = 0;
    while rest.is_multiple_of(p) {
        rest /= p;
        d += 1;
    }
    (rest == 1).then_some(FieldDesc { p, d })
}

fn field_of(q: u64) -> Result<FieldDesc, HarnessError> {
    prime_power(q).ok_or_else(|| HarnessError::Precondition(format!("{q} is not a prime power")))
}

fn print_json(out: &mut dyn Write, value: &impl Serialize) -> Result<(), HarnessError> {
    let text = serde_json::to_string_pretty(value)?;
    writeln!(out, "{text}").map_err(|e| HarnessError::io("<stdout>", e))
}

fn read(path: &PathBuf) -> Result<String, HarnessError> {
    std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))
}

fn dispatch(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, HarnessError> {
    match cli.command {
        Command::Simulate(a) => {
            let mut cfg = ExperimentConfig::load(&a.config)?;
            if let Some(s) = a.root_seed {
                cfg.root_seed = s;
            }
            if let Some(t) = a.trials {
                cfg.trials = t;
            }
            let outcome = run_error_trials(&cfg)?;
            match a.out.or_else(|| cfg.output_dir()) {
                Some(dir) => outcome.write(&dir)?,
                None => {
                    let _ = writeln!(err, "no output directory configured; trials.csv not written");
                }
            }
            write!(out, "{}", outcome.summary_json()).map_err(|e| HarnessError::io("<stdout>", e))?;
            Ok(if outcome.summary.passed { EXIT_OK } else { EXIT_BOUND })
        }
        Command::Rate(a) => {
            let q = field_of(a.q)?;
            let reports = a
                .ell
                .iter()
                .map(|&ell| rate_accounting(q, a.m0, a.m1, ell))
                .collect::<Result<Vec<_>, _>>()?;
            if reports.len() == 1 {
                print_json(out, &reports[0])?;
            } else {
                print_json(out, &reports)?;
            }
            Ok(EXIT_OK)
        }
        Command::Lemmas(a) => {
            let suite = lemmas::run_suite(a.trials, a.seed)?;
            print_json(out, &suite)?;
            Ok(if suite.passed { EXIT_OK } else { EXIT_BOUND })
        }
        Command::Network(NetworkCommand::Validate { path }) => {
            let net = NetworkSpec::from_json(&read(&path)?)?;
            let violations = net.validate();
            print_json(out, &json!({ "valid": violations.is_empty(), "violations": violations }))?;
            Ok(if violations.is_empty() { EXIT_OK } else { EXIT_USAGE })
        }
        Command::Network(NetworkCommand::Gen { seed, m0, c, q, attacked, out: path }) => {
            let field = field_of(q)?.build()?;
            let net = random_network(seed, m0, c, &field).with_attacked(attacked);
            net.check()?;
            match path {
                Some(p) => std::fs::write(&p, net.to_json() + "\n").map_err(|e| HarnessError::io(&p, e))?,
                None => writeln!(out, "{}", net.to_json()).map_err(|e| HarnessError::io("<stdout>", e))?,
            }
            Ok(EXIT_OK)
        }
        Command::Network(NetworkCommand::Transfer { path }) => {
            let net = NetworkSpec::from_json(&read(&path)?)?;
            net.check()?;
            let bit = net.bit_side()?;
            let phase = net.phase_side()?;
            print_json(
                out,
                &json!({
                    "field": FieldDesc::of(&net.field),
                    "m0": net.m0,
                    "attacked": net.attacked,
                    "k": bit.k.to_rows(),
                    "k_rank": bit.k.rank(),
                    "k_invertible": bit.k.is_invertible(),
                    "w": bit.w.to_rows(),
                    "phase_k": phase.k.to_rows(),
                    "phase_w": phase.w.to_rows(),
                }),
            )?;
            Ok(EXIT_OK)
        }
        Command::Qcheck => {
            let report = qcheck::run_suite()?;
            print_json(out, &report)?;
            Ok(if report.passed { EXIT_OK } else { EXIT_BOUND })
        }
    }
}

/// Runs the CLI on `argv` (including the program name), writing to the
/// given streams.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(err, "{e}");
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(cli, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_USAGE
        }
    }
}

/// Entry point used by the binary.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(argv, &mut stdout.lock(), &mut stderr.lock())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_str(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("sqnc").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn prime_powers() {
        assert_eq!(prime_power(2), Some(FieldDesc { p: 2, d: 1 }));
        assert_eq!(prime_power(64), Some(FieldDesc { p: 2, d: 6 }));
        assert_eq!(prime_power(49), Some(FieldDesc { p: 7, d: 2 }));
        assert_eq!(prime_power(12), None);
        assert_eq!(prime_power(1), None);
    }

    #[test]
    fn rate_command() {
        let (code, out, _) = run_str(&["rate", "--q", "2", "--m0", "3", "--m1", "1", "--ell", "1048576"]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert!((v["rate"].as_f64().unwrap() - 0.858).abs() < 1e-3);
        assert_eq!(v["n2"], 172_800);
    }

    #[test]
    fn usage_errors() {
        let (code, _, err) = run_str(&["rate", "--m0", "3"]);
        assert_eq!(code, EXIT_USAGE);
        assert!(!err.is_empty());
        let (code, _, err) = run_str(&["rate", "--q", "6", "--m0", "3", "--m1", "1", "--ell", "1024"]);
        assert_eq!(code, EXIT_USAGE);
        assert!(err.contains("not a prime power"));
        assert_eq!(run_str(&["bogus"]).0, EXIT_USAGE);
        assert_eq!(run_str(&["--help"]).0, EXIT_OK);
    }
}
