use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use dkd_core::engine::Outcome;
use dkd_core::harness::{exhaustive_search, parse_scenario, parse_sweep, run_batch, SearchConfig, Verdict};
use dkd_core::{replay, run, Protocol};

#[derive(Parser)]
#[command(name = "dkd", version, about = "Distance-k dispersion simulator on a dynamic ring")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario.
    Run {
        scenario: PathBuf,
        /// Write a JSON-lines trace to this file.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Override the round cap.
        #[arg(long)]
        max_rounds: Option<u64>,
    },
    /// Run a parameter sweep.
    Sweep {
        file: PathBuf,
        /// Worker threads (0 = all cores).
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        /// Write the TSV table here and the JSON summary next to it.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Exhaustive search over all adversary choices on a small instance.
    Check {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        l: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 200)]
        depth: u64,
        /// Every placement up to rotation instead of a representative set.
        #[arg(long)]
        all_placements: bool,
        #[arg(long, default_value_t = SearchConfig::DEFAULT_MAX_STATES)]
        max_states: usize,
    },
    /// Re-validate a recorded trace.
    Replay { trace: PathBuf },
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn cmd_run(path: &Path, trace: Option<&Path>, max_rounds: Option<u64>) -> Result<bool> {
    let mut sc = parse_scenario(&read(path)?).with_context(|| format!("parsing {}", path.display()))?;
    if max_rounds.is_some() {
        sc.max_rounds = max_rounds;
    }
    let report = match trace {
        Some(t) => {
            let mut w = BufWriter::new(File::create(t).with_context(|| format!("creating {}", t.display()))?);
            let r = run(&sc, Some(&mut w))?;
            w.flush()?;
            r
        }
        None => run(&sc, None)?,
    };
    match &report.outcome {
        Outcome::Terminated { rounds } => println!("terminated after {rounds} rounds"),
        Outcome::RoundCapExceeded { rounds } => println!("round cap exceeded after {rounds} rounds"),
        Outcome::InvariantViolation { round, detail } => println!("invariant violation at round {round}: {detail}"),
    }
    println!("{}", serde_json::to_string(&report.stats)?);
    println!("final configuration k-dispersed: {}", report.final_k_dispersed);
    Ok(report.passed())
}

fn cmd_sweep(path: &Path, jobs: usize, out: Option<&Path>) -> Result<bool> {
    let spec = parse_sweep(&read(path)?).with_context(|| format!("parsing {}", path.display()))?;
    let report = run_batch(&spec, jobs)?;
    let summary = serde_json::to_string_pretty(&report.summary)?;
    match out {
        Some(p) => {
            fs::write(p, report.to_tsv()).with_context(|| format!("writing {}", p.display()))?;
            let json = p.with_extension("json");
            fs::write(&json, &summary).with_context(|| format!("writing {}", json.display()))?;
        }
        None => print!("{}", report.to_tsv()),
    }
    println!("{summary}");
    Ok(report.passed())
}

fn cmd_check(cfg: &SearchConfig) -> Result<bool> {
    let report = exhaustive_search(cfg, &Protocol)?;
    match &report.verdict {
        Verdict::AllTerminate { max_depth } => println!("AllTerminate max_depth={max_depth}"),
        Verdict::DepthExhausted { frontier, max_depth } => {
            println!("DepthExhausted frontier={frontier} max_depth={max_depth}")
        }
        Verdict::Violation(cex) => {
            println!("Violation after {} rounds: {}", cex.edges.len(), cex.detail);
            println!("counterexample scenario:\n{}", cex.scenario.emit());
        }
    }
    println!("placements={} states={}", report.placements, report.states);
    Ok(report.passed())
}

fn cmd_replay(path: &Path) -> Result<bool> {
    let report = replay(&read(path)?, &Protocol)?;
    println!("replayed {} rounds", report.rounds);
    for v in &report.violations {
        println!("violation {}: {}", v.monitor, v.detail);
    }
    if report.recorded_violations > 0 {
        println!("trace records {} violation events", report.recorded_violations);
    }
    if let Some(line) = report.first_mismatch {
        println!("re-simulation diverges at line {line}");
    }
    println!("violations={}", report.violations.len());
    Ok(report.clean())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { scenario, trace, max_rounds } => cmd_run(&scenario, trace.as_deref(), max_rounds),
        Command::Sweep { file, jobs, report } => cmd_sweep(&file, jobs, report.as_deref()),
        Command::Check { n, l, k, depth, all_placements, max_states } => {
            cmd_check(&SearchConfig { n, l, k, depth, all_placements, max_states })
        }
        Command::Replay { trace } => cmd_replay(&trace),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
