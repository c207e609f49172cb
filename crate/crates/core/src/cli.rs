//! Command-line front end.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};

use crate::budget::NodeBudget;
use crate::contract::{check_satisfiable_bounded, Contract, Satisfiability, UnsatWitness};
use crate::engine::{dt_run, Failure, Verdict, load_script, random_strategy, scripted_strategy, RunConfig, Strategy};
use crate::error::{Error, Result};
use crate::model::{quiescence_closure, Lts};
use crate::monitor::{load_trace, monitor_verdict, TraceFormat, DEFAULT_SPEED_INPUTS};
use crate::oracle::{build_reference_bounded, ioco_check_bounded, robustly_clean_bounded, Cleanness, IocoVerdict};
use crate::sut::{ExternalProcess, LtsPlayer, NoisyMirror, SutConnection};

#[derive(Debug, Parser)]
#[command(name = "dopetest", version, about = "Contract-based black-box doping tests")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one bounded doping test against a system.
    Test {
        #[arg(long)]
        contract: PathBuf,
        /// builtin:noisy-mirror, lts:<file> or exec:<shell command>
        #[arg(long)]
        sut: String,
        /// random or script:<file>
        #[arg(long, default_value = "random")]
        strategy: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        bound: usize,
        #[arg(long, default_value_t = 500)]
        timeout_ms: u64,
        /// Also write the run log to this file.
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Judge a recorded trace offline.
    Monitor {
        #[arg(long)]
        contract: PathBuf,
        #[arg(long)]
        trace: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Canonical)]
        format: Format,
        /// Number of speed lines in speed-nox recordings.
        #[arg(long, default_value_t = DEFAULT_SPEED_INPUTS)]
        inputs: usize,
    },
    /// Build the bounded reference implementation.
    Ref {
        #[arg(long)]
        contract: PathBuf,
        #[arg(long)]
        depth: usize,
        /// Print every history with its enabled labels.
        #[arg(long)]
        dump: bool,
    },
    /// Check an explicit implementation for robust cleanness and/or ioco.
    Check {
        #[arg(long = "impl")]
        implementation: PathBuf,
        #[arg(long)]
        contract: PathBuf,
        #[arg(long)]
        depth: usize,
        #[arg(long, value_enum, default_value_t = Mode::Both)]
        mode: Mode,
    },
    /// Search for a history that no output can satisfy.
    Satisfiable {
        #[arg(long)]
        contract: PathBuf,
        #[arg(long)]
        depth: usize,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Canonical,
    SpeedNox,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Clean,
    Ioco,
    Both,
}

/// Exit status for passing verdicts.
pub const EXIT_PASS: i32 = 0;
/// Exit status for failing verdicts.
pub const EXIT_FAIL: i32 = 1;
/// Exit status for usage, input and resource errors.
pub const EXIT_ERROR: i32 = 2;

/// Parses `args` (including the program name), runs the command and
/// returns the exit status. Diagnostics go to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{e}");
                return EXIT_ERROR;
            }
            let _ = write!(out, "{e}");
            return EXIT_PASS;
        }
    };
    match execute(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_ERROR
        }
    }
}

fn open_sut(spec: &str, seed: u64) -> Result<Box<dyn SutConnection>> {
    match spec.split_once(':') {
        Some(("builtin", "noisy-mirror")) => Ok(Box::new(NoisyMirror::new(seed))),
        Some(("lts", path)) => {
            let lts = Lts::load(path.as_ref())?;
            let lts = if lts.has_quiescence() { lts } else { quiescence_closure(&lts).into_lts() };
            Ok(Box::new(LtsPlayer::new(lts, seed)))
        }
        Some(("exec", cmd)) => Ok(Box::new(ExternalProcess::new(cmd))),
        _ => Err(Error::Parse(format!(
            "unknown system `{spec}`; use builtin:noisy-mirror, lts:<file> or exec:<command>"
        ))),
    }
}

fn open_strategy(spec: &str, seed: u64) -> Result<Box<dyn Strategy>> {
    match spec.split_once(':') {
        None if spec == "random" => Ok(Box::new(random_strategy(seed))),
        Some(("script", path)) => Ok(Box::new(scripted_strategy(load_script(path.as_ref())?))),
        _ => Err(Error::Parse(format!("unknown strategy `{spec}`; use random or script:<file>"))),
    }
}

fn io(e: std::io::Error) -> Error {
    Error::io("<stdout>", e)
}

fn execute(command: Command, out: &mut dyn Write) -> Result<i32> {
    let budget = NodeBudget::from_env()?;
    match command {
        Command::Test {
            contract,
            sut,
            strategy,
            seed,
            bound,
            timeout_ms,
            log,
        } => {
            let contract = Contract::load(&contract)?;
            let mut sut = open_sut(&sut, seed)?;
            let mut strategy = open_strategy(&strategy, seed)?;
            let config = RunConfig::new(bound)
                .with_timeout(Duration::from_millis(timeout_ms))
                .with_budget(budget);
            let record = dt_run(&contract, sut.as_mut(), strategy.as_mut(), config)?;
            out.write_all(record.render_log().as_bytes()).map_err(io)?;
            if let Some(path) = log {
                record.write_log(&path)?;
            }
            Ok(if record.verdict.is_fail() { EXIT_FAIL } else { EXIT_PASS })
        }
        Command::Monitor {
            contract,
            trace,
            format,
            inputs,
        } => {
            let contract = Contract::load(&contract)?;
            let format = match format {
                Format::Canonical => TraceFormat::Canonical,
                Format::SpeedNox => TraceFormat::SpeedNox { inputs },
            };
            let recorded = load_trace(&trace, format)?;
            let record = monitor_verdict(&recorded.symbols, &contract)?;
            writeln!(out, "VERDICT {}", record.verdict).map_err(io)?;
            writeln!(out, "{}", record.summary_json()).map_err(io)?;
            if let Verdict::Fail(Failure { witness: Some(w), .. }) = &record.verdict {
                writeln!(out, "Test FAILED for standard trace [{w}]").map_err(io)?;
            }
            Ok(if record.verdict.is_fail() { EXIT_FAIL } else { EXIT_PASS })
        }
        Command::Ref { contract, depth, dump } => {
            let contract = Contract::load(&contract)?;
            let reference = build_reference_bounded(&contract, depth, budget)?;
            if dump {
                out.write_all(reference.dump().as_bytes()).map_err(io)?;
            } else {
                writeln!(out, "{} histories up to depth {depth}", reference.len()).map_err(io)?;
            }
            Ok(EXIT_PASS)
        }
        Command::Check {
            implementation,
            contract,
            depth,
            mode,
        } => {
            let contract = Contract::load(&contract)?;
            let lts = Lts::load(&implementation)?;
            let lts = if lts.has_quiescence() { lts } else { quiescence_closure(&lts).into_lts() };
            let mut code = EXIT_PASS;
            if mode != Mode::Ioco {
                match robustly_clean_bounded(&lts, &contract, depth, budget)? {
                    Cleanness::CleanUpTo { depth } => writeln!(out, "CLEAN up to depth {depth}"),
                    Cleanness::CounterExample(cex) => {
                        code = EXIT_FAIL;
                        writeln!(out, "NOT CLEAN {cex}")
                    }
                }
                .map_err(io)?;
            }
            if mode != Mode::Clean {
                let reference = build_reference_bounded(&contract, depth, budget)?;
                match ioco_check_bounded(&lts, &reference) {
                    IocoVerdict::ConformsUpTo { depth } => writeln!(out, "IOCO conforms up to depth {depth}"),
                    IocoVerdict::Violation { history, output } => {
                        code = EXIT_FAIL;
                        writeln!(out, "IOCO violation: output {output} after [{history}]")
                    }
                }
                .map_err(io)?;
            }
            Ok(code)
        }
        Command::Satisfiable { contract, depth } => {
            let contract = Contract::load(&contract)?;
            match check_satisfiable_bounded(&contract, depth, budget)? {
                Satisfiability::SatisfiableUpTo { depth } => {
                    writeln!(out, "SATISFIABLE up to depth {depth}").map_err(io)?;
                    Ok(EXIT_PASS)
                }
                Satisfiability::Unsatisfiable(UnsatWitness::NoAcceptableOutput { history, conflicting }) => {
                    writeln!(out, "UNSATISFIABLE: no output is acceptable after [{history}]").map_err(io)?;
                    for t in conflicting {
                        writeln!(out, "  conflicting standard trace: [{t}]").map_err(io)?;
                    }
                    Ok(EXIT_FAIL)
                }
                Satisfiability::Unsatisfiable(UnsatWitness::StandardNotClean(cex)) => {
                    writeln!(out, "UNSATISFIABLE: the standard is not clean: {cex}").map_err(io)?;
                    Ok(EXIT_FAIL)
                }
            }
        }
    }
}
