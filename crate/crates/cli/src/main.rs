use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use efsolver::benchmarks::LYAPUNOV;
use efsolver::solver::{Infeasibility, Limit, Outcome, SolveOutcome};
use efsolver::{parse_problem, solve, HeuristicConfig, Problem, RunReport, SolveConfig, Strategy, VerifyResult};

const EXIT_SOLUTION: u8 = 0;
const EXIT_INFEASIBLE: u8 = 1;
const EXIT_BUDGET: u8 = 2;
const EXIT_INPUT: u8 = 3;

/// Round-robin runs in `bench` stop after this many box splits.
const BENCH_ROUND_ROBIN_SPLITS: usize = 5000;

#[derive(Parser)]
#[command(
    name = "efsolver",
    version,
    about = "Solve exists-forall constraints by interval evaluation and LP relaxation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one problem file.
    Solve(SolveArgs),
    /// Run the bundled Lyapunov benchmarks under every strategy.
    Bench(BenchArgs),
}

#[derive(Args)]
struct SolveArgs {
    file: PathBuf,
    #[arg(long, default_value_t = Strategy::SplitAll)]
    strategy: Strategy,
    #[arg(long, default_value_t = 0.001)]
    epsilon: f64,
    #[arg(long, default_value_t = 0.1)]
    kappa: f64,
    #[arg(long, default_value_t = 100_000)]
    max_splits: usize,
    /// Wall-clock budget in seconds.
    #[arg(long)]
    time_budget: Option<f64>,
    /// Check a returned solution with the independent verifier.
    #[arg(long)]
    verify: bool,
    /// Also print the run report as one JSON object.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct BenchArgs {
    /// Print one JSON run report per line instead of the table.
    #[arg(long)]
    json: bool,
    /// Per-run wall-clock budget in seconds.
    #[arg(long, default_value_t = 120.0)]
    time_budget: f64,
}

fn budget(secs: Option<f64>) -> Result<Option<Duration>, String> {
    match secs {
        None => Ok(None),
        Some(s) => Duration::try_from_secs_f64(s).map(Some).map_err(|_| format!("invalid time budget {s}")),
    }
}

fn exit_code(outcome: &Outcome) -> u8 {
    match outcome {
        Outcome::Solution { .. } => EXIT_SOLUTION,
        Outcome::Infeasible(_) => EXIT_INFEASIBLE,
        Outcome::BudgetExhausted(_) => EXIT_BUDGET,
    }
}

fn describe(p: &Problem, out: &SolveOutcome) -> Vec<String> {
    let mut lines = Vec::new();
    match &out.outcome {
        Outcome::Solution { x, certificate } => {
            lines.push("solution".to_string());
            for (name, v) in p.x_vars.iter().zip(x) {
                lines.push(format!("  {name} = {v}"));
            }
            if let Some(rho) = certificate.rho {
                lines.push(format!("  residual {rho}"));
            }
        }
        Outcome::Infeasible(Infeasibility::Branch { branch, bbox }) => {
            lines.push(format!("infeasible: branch {branch} is false on {bbox}"))
        }
        Outcome::Infeasible(Infeasibility::Equalities) => {
            lines.push("infeasible: the equalities are inconsistent".into())
        }
        Outcome::Infeasible(Infeasibility::ExactRows) => {
            lines.push("infeasible: the remaining rows are exact and have no common solution".into())
        }
        Outcome::BudgetExhausted(limit) => lines.push(format!(
            "budget exhausted: {}",
            match limit {
                Limit::Splits => "split limit reached",
                Limit::Time => "time budget reached",
                Limit::Resolution => "a box reached floating-point resolution",
            }
        )),
    }
    let s = &out.stats;
    lines.push(format!(
        "splits {} in {} rounds, {} LP solves, {:.3} s",
        s.splits,
        s.split_rounds,
        s.lp_solves,
        s.wall_time_ms / 1e3
    ));
    match &out.verification {
        None => {}
        Some(VerifyResult::Verified) => lines.push("verified".into()),
        Some(VerifyResult::Counterexample(c)) => lines.push(format!("verification FAILED: {c:?}")),
        Some(VerifyResult::Unknown { branch, depth }) => {
            lines.push(format!("verification inconclusive: branch {branch} undecided at depth {depth}"))
        }
    }
    lines
}

fn cmd_solve(args: &SolveArgs) -> Result<u8, String> {
    let text = std::fs::read_to_string(&args.file).map_err(|e| format!("{}: {e}", args.file.display()))?;
    let p = parse_problem(&text).map_err(|e| format!("{}: {e}", args.file.display()))?;
    let cfg = SolveConfig {
        heuristic: HeuristicConfig { epsilon: args.epsilon, aging_kappa: args.kappa, strategy: args.strategy },
        max_splits: args.max_splits,
        time_budget: budget(args.time_budget)?,
        verify: args.verify,
        trace: false,
    };
    let out = solve(&p, &cfg).map_err(|e| format!("{}: {e}", args.file.display()))?;
    for line in describe(&p, &out) {
        println!("{line}");
    }
    if args.json {
        let name = args.file.file_stem().map_or_else(String::new, |s| s.to_string_lossy().into_owned());
        let report = RunReport::from_outcome(&name, &cfg, &out);
        println!("{}", serde_json::to_string(&report).map_err(|e| e.to_string())?);
    }
    Ok(exit_code(&out.outcome))
}

fn cmd_bench(args: &BenchArgs) -> Result<u8, String> {
    let time_budget = budget(Some(args.time_budget))?;
    if !args.json {
        println!("{:<4}{:>24}{:>24}{:>24}", "", "round-robin", "split-worst", "split-all");
        println!("{:<4}{}", "", "          splits    time".repeat(3));
    }
    for b in &LYAPUNOV {
        let p = b.problem();
        let mut cells = Vec::new();
        for strategy in Strategy::ALL {
            let cfg = SolveConfig {
                heuristic: HeuristicConfig { strategy, ..Default::default() },
                max_splits: if strategy == Strategy::RoundRobin {
                    BENCH_ROUND_ROBIN_SPLITS
                } else {
                    SolveConfig::default().max_splits
                },
                time_budget,
                verify: false,
                trace: false,
            };
            let out = solve(&p, &cfg).map_err(|e| format!("{}: {e}", b.name))?;
            if args.json {
                println!(
                    "{}",
                    serde_json::to_string(&RunReport::from_outcome(b.name, &cfg, &out)).map_err(|e| e.to_string())?
                );
            } else if out.outcome.solution().is_some() {
                cells.push(format!("{:>16}{:>8.3}", out.stats.split_rounds, out.stats.wall_time_ms / 1e3));
            } else {
                cells.push(format!("{:>16}{:>8}", "-", "-"));
            }
        }
        if !args.json {
            println!("{:<4}{}", b.name, cells.concat());
        }
    }
    if !args.json {
        println!();
        println!("splits: rounds of splitting (one LP each); `-`: no solution within the budget");
        println!("round-robin stops after {BENCH_ROUND_ROBIN_SPLITS} box splits");
    }
    Ok(EXIT_SOLUTION)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::Bench(args) => cmd_bench(args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}
