use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use synthbath::config::{OutputFormat, RunConfig, SolverMode};
use synthbath::sweep::{run_grid, run_single, write_output, GridResult, GridRow, RunError};
use synthbath::verify::{run_all, VerifyOptions};

/// Steady-state thermodynamics of qutrit synthetic baths.
#[derive(Parser)]
#[command(name = "synthbath", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one configuration and print its flux report.
    Run(RunArgs),
    /// Evaluate the configured sweep grid.
    Grid(RunArgs),
    /// Run the built-in reference checks.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
    #[arg(long, value_enum)]
    solver: Option<SolverMode>,
    /// Worker threads for grids (default: one per core).
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, value_enum, default_value = "null-space")]
    solver: SolverMode,
    #[arg(long)]
    jobs: Option<usize>,
}

const EXIT_CONFIG: u8 = 2;
const EXIT_PARTIAL: u8 = 5;

fn load(args: &RunArgs) -> Result<RunConfig, RunError> {
    let mut cfg = RunConfig::load(&args.config)?;
    if let Some(f) = args.format {
        cfg.format = f;
    }
    if let Some(s) = args.solver {
        cfg.solver = s;
    }
    if let Some(o) = &args.out {
        cfg.output = Some(o.clone());
    }
    if args.jobs == Some(0) {
        return Err(RunError::config("--jobs must be at least 1"));
    }
    Ok(cfg)
}

fn fail(err: &RunError) -> ExitCode {
    eprintln!("synthbath: {err}");
    ExitCode::from(err.code.exit_code() as u8)
}

fn emit(cfg: &RunConfig, text: &str) -> ExitCode {
    match write_output(cfg.output.as_deref(), text) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("synthbath: cannot write output: {e}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}

fn run(args: &RunArgs) -> ExitCode {
    let cfg = match load(args) {
        Ok(c) => c,
        Err(e) => return fail(&e),
    };
    let report = match run_single(&cfg) {
        Ok(r) => r,
        Err(e) => return fail(&e),
    };
    let text = match cfg.format {
        OutputFormat::Json => {
            serde_json::to_string_pretty(&report).expect("report serializes") + "\n"
        }
        OutputFormat::Csv => GridResult {
            rows: vec![GridRow::from_report(&report, None, None)],
        }
        .to_csv(),
    };
    emit(&cfg, &text)
}

fn grid(args: &RunArgs) -> ExitCode {
    let cfg = match load(args) {
        Ok(c) => c,
        Err(e) => return fail(&e),
    };
    let result = match run_grid(&cfg, args.jobs) {
        Ok(r) => r,
        Err(e) => return fail(&e),
    };
    let code = emit(&cfg, &result.render(cfg.format));
    if code != ExitCode::SUCCESS {
        return code;
    }
    let failed: Vec<&GridRow> = result.rows.iter().filter(|r| r.is_failure()).collect();
    if failed.is_empty() {
        return ExitCode::SUCCESS;
    }
    for r in &failed {
        eprintln!(
            "synthbath: point ({:?}, {:?}) {}: {}",
            r.axis1,
            r.axis2,
            r.flags.join(";"),
            r.error.as_deref().unwrap_or("balance check failed")
        );
    }
    eprintln!(
        "synthbath: {} of {} grid points failed",
        failed.len(),
        result.rows.len()
    );
    ExitCode::from(EXIT_PARTIAL)
}

fn verify(args: &VerifyArgs) -> ExitCode {
    let opts = VerifyOptions {
        solver: args.solver,
        jobs: args.jobs,
        ..Default::default()
    };
    let outcomes = run_all(&opts);
    for o in &outcomes {
        println!("{}", o.line());
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    println!(
        "{} of {} checks passed",
        outcomes.len() - failed,
        outcomes.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.command {
        Command::Run(a) => run(a),
        Command::Grid(a) => grid(a),
        Command::Verify(a) => verify(a),
    }
}
