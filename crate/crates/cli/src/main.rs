use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use grouphankel_cli::{
    run, run_suite, suite, tasks_for_verb, ExperimentSpec, Format, RunOptions, SchemaError, EXIT_SCHEMA,
    EXIT_TASK_FAILED,
};

#[derive(Parser)]
#[command(name = "grouphankel", version, about = "Hankel operators over ordered groups: batch experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Order axioms and the ideal structure of X₊∖Xⁱ
    CheckGroup(Common),
    /// Build truncations and check Hankel structure
    Build(Common),
    /// Singular values and compactness evidence
    Svd(Common),
    /// Finite rank of rational symbols
    Rank(Common),
    /// Best rank-n Hankel approximation
    Aak(Common),
    /// Lower bounds on the distance to H∞
    Nehari(Common),
    /// Schatten norms and the nuclear bound
    Schatten(Common),
    /// Dyadic Besov block estimates
    Besov(Common),
    /// Model spaces and the backward shift
    ModelSpace(Common),
    /// Γ and 𝒢_ν against H_φ
    Discrete(Common),
    /// Every task listed in the experiment
    Run(Common),
    /// The full acceptance battery
    Suite(SuiteArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Args)]
struct Common {
    /// Experiment file
    #[arg(long)]
    spec: PathBuf,
    /// Output directory (overrides the experiment file)
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    #[arg(long)]
    seed: Option<u64>,
    /// Upper limit applied to every truncation size, bound and level
    #[arg(long)]
    max_n: Option<usize>,
}

#[derive(Args)]
struct SuiteArgs {
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn verb(c: &Command) -> Option<&'static str> {
    Some(match c {
        Command::CheckGroup(_) => "check-group",
        Command::Build(_) => "build",
        Command::Svd(_) => "svd",
        Command::Rank(_) => "rank",
        Command::Aak(_) => "aak",
        Command::Nehari(_) => "nehari",
        Command::Schatten(_) => "schatten",
        Command::Besov(_) => "besov",
        Command::ModelSpace(_) => "model-space",
        Command::Discrete(_) => "discrete",
        Command::Run(_) | Command::Suite(_) => return None,
    })
}

fn run_common(name: Option<&str>, args: &Common) -> ExitCode {
    let spec = match ExperimentSpec::load(&args.spec.to_string_lossy()) {
        Ok(s) => s,
        Err(e) => return schema_failure(&e),
    };
    let tasks = match name {
        Some(v) => tasks_for_verb(&spec, v),
        None => spec.tasks.clone(),
    };
    let opts = RunOptions {
        out: args.out.clone(),
        format: args.format.map(|f| match f {
            FormatArg::Json => Format::Json,
            FormatArg::Csv => Format::Csv,
        }),
        seed: args.seed,
        max_n: args.max_n,
    };
    match run(&spec, &tasks, &opts) {
        Ok(summary) => {
            for s in summary.report["sections"].as_array().into_iter().flatten() {
                let status = if s["pass"] == true { "pass" } else { "FAIL" };
                eprintln!("{status:4}  {}", s["task"].as_str().unwrap_or("?"));
            }
            eprintln!("report: {}", summary.out_dir.join("report.json").display());
            ExitCode::from(summary.exit_code() as u8)
        }
        Err(e) => match e.downcast_ref::<SchemaError>() {
            Some(se) => schema_failure(se),
            None => {
                eprintln!("error: {e:#}");
                ExitCode::from(EXIT_TASK_FAILED as u8)
            }
        },
    }
}

fn schema_failure(e: &SchemaError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(EXIT_SCHEMA as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.command {
        Command::Suite(a) => match run_suite(a.seed, &a.out) {
            Ok(summary) => {
                for c in summary.report["criteria"].as_array().into_iter().flatten() {
                    let status = if c["pass"] == true { "pass" } else { "FAIL" };
                    eprintln!("{status:4}  {:>2}  {}", c["id"], c["name"].as_str().unwrap_or(""));
                }
                debug_assert_eq!(summary.report["criteria"].as_array().map(Vec::len), Some(suite::CRITERIA.len()));
                ExitCode::from(summary.exit_code() as u8)
            }
            Err(e) => {
                eprintln!("error: {e:#}");
                ExitCode::from(EXIT_TASK_FAILED as u8)
            }
        },
        Command::CheckGroup(a)
        | Command::Build(a)
        | Command::Svd(a)
        | Command::Rank(a)
        | Command::Aak(a)
        | Command::Nehari(a)
        | Command::Schatten(a)
        | Command::Besov(a)
        | Command::ModelSpace(a)
        | Command::Discrete(a)
        | Command::Run(a) => run_common(verb(&cli.command), a),
    }
}
