//! `fogweave` — exact placement of structured applications onto
//! hybrid cloud/fog infrastructure.
//!
//! Subcommands: `solve` (one scenario file), `paper` (full experiment
//! harness), `mc` (Monte-Carlo validation of a solved scenario), and
//! `gen` (write the built-in reference scenario as a config file).
//!
//! Exit codes are a stable contract: 0 success, 2 invalid config or
//! usage, 3 infeasible scenario, 4 oracle mismatch, 1 anything else.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use fogweave_core::config::{self, LoadedScenario};
use fogweave_core::error::{ConfigError, SolveError};
use fogweave_core::experiments::{self, DEFAULT_ALPHA_GRID};
use fogweave_core::infra::{generate_scenario, Infrastructure, Tier};
use fogweave_core::milp;
use fogweave_core::montecarlo::{compare_to_analytic, BiasDirection};
use fogweave_core::solver::{solve_bruteforce, solve_exact, SolveResult, SolveStatus};

/// Enumeration ceiling for `--oracle` cross-checks.
const ORACLE_CAP: u128 = 1_000_000;

#[derive(Parser)]
#[command(
    name = "fogweave",
    version,
    about = "Exact placement of structured applications onto hybrid cloud/fog infrastructure"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one scenario file and write the result artifacts
    Solve(SolveArgs),
    /// Run the four-section experiment harness and write its CSV set
    Paper(PaperArgs),
    /// Solve a scenario, then validate the optimum by simulation
    Mc(McArgs),
    /// Write the built-in reference scenario as a scenario file
    Gen(GenArgs),
}

#[derive(clap::Args)]
struct SolveArgs {
    /// Scenario file (TOML)
    config: PathBuf,
    /// Override the objective weight from the config
    #[arg(long, value_parser = parse_alpha)]
    alpha: Option<f64>,
    /// Restrict placement to one tier
    #[arg(long, value_enum, default_value_t = TierArg::Hybrid)]
    tier: TierArg,
    /// Cross-check the optimum against exhaustive enumeration
    #[arg(long)]
    oracle: bool,
    /// Also export the linear model as an LP file
    #[arg(long, value_name = "PATH")]
    export_lp: Option<PathBuf>,
    /// Result report path; the placement CSV lands next to it
    #[arg(long, value_name = "PATH", default_value = "solve_result.txt")]
    out: PathBuf,
}

#[derive(clap::Args)]
struct PaperArgs {
    /// Scenario seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Comma-separated objective weights for the sweep section
    #[arg(
        long,
        value_delimiter = ',',
        value_parser = parse_alpha,
        default_values_t = DEFAULT_ALPHA_GRID
    )]
    alpha_grid: Vec<f64>,
    /// Random placements per application in the baseline section
    #[arg(long, default_value_t = 30, value_parser = clap::value_parser!(u64).range(1..))]
    trials: u64,
    /// Output directory for the CSV artifacts
    #[arg(long, default_value = "paper_out")]
    outdir: PathBuf,
}

#[derive(clap::Args)]
struct McArgs {
    /// Scenario file (TOML)
    config: PathBuf,
    /// Simulated executions per request
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    /// Simulation seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(clap::Args)]
struct GenArgs {
    /// Scenario seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Destination file
    #[arg(long, default_value = "scenario.toml")]
    out: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TierArg {
    Hybrid,
    Cloud,
    Fog,
}

impl TierArg {
    fn name(self) -> &'static str {
        match self {
            TierArg::Hybrid => "hybrid",
            TierArg::Cloud => "cloud",
            TierArg::Fog => "fog",
        }
    }
}

fn parse_alpha(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("objective weight must lie in [0, 1], got {v}"))
    }
}

// ------------------------------------------------------------------ errors

enum CliError {
    Config(String),
    Infeasible(String),
    OracleMismatch(String),
    Other(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Infeasible(_) => 3,
            CliError::OracleMismatch(_) => 4,
            CliError::Other(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m)
            | CliError::Infeasible(m)
            | CliError::OracleMismatch(m)
            | CliError::Other(m) => m,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<SolveError> for CliError {
    fn from(e: SolveError) -> Self {
        match e {
            SolveError::AlphaOutOfRange(_) => CliError::Config(e.to_string()),
            SolveError::SpaceTooLarge { .. } => CliError::Config(format!(
                "{e}; --oracle only applies to scenarios under {ORACLE_CAP} combinations"
            )),
            other => CliError::Other(other.to_string()),
        }
    }
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Other(format!("cannot write `{}`: {e}", path.display()))
}

// ------------------------------------------------------------------ helpers

/// Worker count for a solve: the config's value capped by the
/// `FOGWEAVE_THREADS` environment variable when it is set.
fn capped_workers(configured: usize) -> Result<usize, CliError> {
    match std::env::var("FOGWEAVE_THREADS") {
        Err(_) => Ok(configured),
        Ok(raw) => {
            let cap: usize = raw.parse().map_err(|_| {
                CliError::Other(format!("FOGWEAVE_THREADS must be a positive integer, got `{raw}`"))
            })?;
            if cap == 0 {
                return Err(CliError::Other(
                    "FOGWEAVE_THREADS must be a positive integer, got `0`".to_string(),
                ));
            }
            Ok(configured.min(cap))
        }
    }
}

fn effective_infra(loaded: &LoadedScenario, tier: TierArg) -> Infrastructure {
    match tier {
        TierArg::Hybrid => loaded.infra.clone(),
        TierArg::Cloud => loaded.infra.restricted_to(Tier::Cloud),
        TierArg::Fog => loaded.infra.restricted_to(Tier::Fog),
    }
}

fn status_name(status: SolveStatus) -> &'static str {
    match status {
        SolveStatus::Optimal => "optimal",
        SolveStatus::Feasible => "feasible",
        SolveStatus::Infeasible => "infeasible",
        SolveStatus::BudgetExhausted => "budget-exhausted",
    }
}

fn solve_report(
    args: &SolveArgs,
    alpha: f64,
    loaded: &LoadedScenario,
    result: &SolveResult,
) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "command: solve");
    let _ = writeln!(out, "config: {}", args.config.display());
    let _ = writeln!(out, "tier: {}", args.tier.name());
    let _ = writeln!(out, "alpha: {alpha}");
    let _ = writeln!(out, "status: {}", status_name(result.status));
    let _ = writeln!(out, "nodes_explored: {}", result.nodes_explored);
    if let Some(v) = &result.objective {
        let _ = writeln!(out, "objective: {}", v.objective);
        let _ = writeln!(out, "cost_total: {}", v.cost);
        let _ = writeln!(out, "makespan_total_ms: {}", v.makespan_sum);
        if let Some(p) = &result.placement {
            let _ = writeln!(out, "deployed_instances: {}", p.deployed.len());
        }
        for (id, c, m) in &v.per_request {
            let _ = writeln!(
                out,
                "request {id}: cost={} makespan_ms={} objective={}",
                c.total(),
                m.total_ms(),
                alpha * c.total() + (1.0 - alpha) * m.total_ms()
            );
        }
    }
    let _ = writeln!(out, "requests: {}", loaded.requests.len());
    out
}

fn write_placement_csv(result: &SolveResult, path: &Path) -> Result<(), CliError> {
    let placement = result.placement.as_ref().expect("checked feasible");
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::Other(e.to_string()))?;
    w.write_record(["request_id", "leaf_index", "vnf_type", "instance_index", "node_id"])
        .map_err(|e| CliError::Other(e.to_string()))?;
    for ((req, leaf), (inst, node)) in &placement.assignments {
        w.write_record([
            req.to_string(),
            leaf.0.to_string(),
            inst.type_id.to_string(),
            inst.instance_index.to_string(),
            node.to_string(),
        ])
        .map_err(|e| CliError::Other(e.to_string()))?;
    }
    w.flush().map_err(|e| io_err(path, e))?;
    Ok(())
}

// ------------------------------------------------------------------ commands

fn cmd_solve(args: &SolveArgs) -> Result<(), CliError> {
    let mut loaded = config::load_scenario(&args.config)?;
    let alpha = args.alpha.unwrap_or(loaded.alpha);
    loaded.solve.workers = capped_workers(loaded.solve.workers)?;
    let infra = effective_infra(&loaded, args.tier);

    let result = solve_exact(&infra, &loaded.requests, alpha, &loaded.solve)?;

    if let Some(lp_path) = &args.export_lp {
        let model = milp::build_model(&infra, &loaded.requests, alpha)
            .map_err(|e| CliError::Other(e.to_string()))?;
        milp::export_lp(&model, lp_path).map_err(|e| CliError::Other(e.to_string()))?;
    }

    if result.placement.is_none() {
        return Err(CliError::Infeasible(format!(
            "no feasible placement on the {} tier for `{}`",
            args.tier.name(),
            args.config.display()
        )));
    }

    if args.oracle {
        let oracle = solve_bruteforce(&infra, &loaded.requests, alpha, ORACLE_CAP)?;
        let a = result.objective_value().expect("feasible above");
        match oracle.objective_value() {
            Some(b) if (a - b).abs() <= 1e-9 => {}
            Some(b) => {
                return Err(CliError::OracleMismatch(format!(
                    "solver found {a} but exhaustive enumeration found {b}"
                )));
            }
            None => {
                return Err(CliError::OracleMismatch(format!(
                    "solver found {a} but exhaustive enumeration found nothing feasible"
                )));
            }
        }
    }

    let report = solve_report(args, alpha, &loaded, &result);
    std::fs::write(&args.out, &report).map_err(|e| io_err(&args.out, e))?;
    let csv_path = args.out.with_extension("placements.csv");
    write_placement_csv(&result, &csv_path)?;
    print!("{report}");
    println!("report: {}", args.out.display());
    println!("placements: {}", csv_path.display());
    Ok(())
}

fn cmd_paper(args: &PaperArgs) -> Result<(), CliError> {
    std::fs::create_dir_all(&args.outdir).map_err(|e| io_err(&args.outdir, e))?;
    let report = experiments::run_all(args.seed, 0.5, &args.alpha_grid, args.trials)?;
    let files = experiments::write_reports(&report, &args.outdir)
        .map_err(|e| CliError::Other(e.to_string()))?;
    let mut failures = 0usize;
    let mut total = 0usize;
    for a in report.assertions() {
        total += 1;
        if a.pass {
            println!("PASS  {}  {}", a.name, a.detail);
        } else {
            failures += 1;
            println!("FAIL  {}  {}", a.name, a.detail);
        }
    }
    for f in &files {
        println!("wrote: {}", f.display());
    }
    println!("assertions: {}/{} passed", total - failures, total);
    if failures > 0 {
        return Err(CliError::Other(format!(
            "{failures} experiment assertions failed; see the lines above"
        )));
    }
    Ok(())
}

fn cmd_mc(args: &McArgs) -> Result<(), CliError> {
    let loaded = config::load_scenario(&args.config)?;
    let result = solve_exact(&loaded.infra, &loaded.requests, loaded.alpha, &loaded.solve)?;
    let Some(placement) = result.placement.as_ref() else {
        return Err(CliError::Infeasible(format!(
            "no feasible placement for `{}`",
            args.config.display()
        )));
    };

    let mut report = String::new();
    let _ = writeln!(report, "command: mc");
    let _ = writeln!(report, "config: {}", args.config.display());
    let _ = writeln!(report, "samples: {}", args.samples);
    let _ = writeln!(report, "seed: {}", args.seed);
    let _ = writeln!(report, "alpha: {}", loaded.alpha);
    let mut inconclusive = false;
    let mut disagreements = 0usize;
    for r in &loaded.requests {
        let check = compare_to_analytic(placement, r, &loaded.infra, args.samples, args.seed)
            .map_err(|e| CliError::Other(e.to_string()))?;
        let _ = writeln!(report, "request {}:", r.request_id);
        let _ = writeln!(report, "  cost_analytic: {}", check.cost.analytic);
        let _ = writeln!(report, "  cost_simulated: {}", check.cost.simulated);
        let _ = writeln!(report, "  cost_std_error: {}", check.cost.std_error);
        let _ = writeln!(report, "  cost_agrees: {}", check.cost.agrees);
        let _ = writeln!(report, "  makespan_analytic: {}", check.makespan.analytic);
        let _ = writeln!(report, "  makespan_simulated: {}", check.makespan.simulated);
        let _ = writeln!(report, "  makespan_std_error: {}", check.makespan.std_error);
        let _ = writeln!(
            report,
            "  makespan_test: {}",
            match check.makespan.direction {
                BiasDirection::Unbiased => "two-sided",
                BiasDirection::AnalyticIsLowerBound => "one-sided-lower-bound",
            }
        );
        let _ = writeln!(report, "  makespan_agrees: {}", check.makespan.agrees);
        if !check.cost.conclusive {
            inconclusive = true;
        } else if !check.cost.agrees || !check.makespan.agrees {
            disagreements += 1;
        }
    }
    if inconclusive {
        let _ = writeln!(report, "note: insufficient samples for assertions");
    }
    let path = PathBuf::from("mc_report.txt");
    std::fs::write(&path, &report).map_err(|e| io_err(&path, e))?;
    print!("{report}");
    println!("report: {}", path.display());
    if disagreements > 0 {
        return Err(CliError::Other(format!(
            "{disagreements} requests disagree with the analytic model beyond 3 standard errors"
        )));
    }
    Ok(())
}

fn cmd_gen(args: &GenArgs) -> Result<(), CliError> {
    let scenario = generate_scenario(args.seed);
    let cfg = config::from_domain(&scenario.infra, &scenario.requests, 0.5);
    config::save_scenario(&cfg, &args.out)?;
    println!("wrote: {}", args.out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::Paper(args) => cmd_paper(args),
        Command::Mc(args) => cmd_mc(args),
        Command::Gen(args) => cmd_gen(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
