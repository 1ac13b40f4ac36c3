//! `eda-planner`: parse designs, generate synthetic data, train runtime
//! models, predict and plan cost-optimal deployments.

mod commands;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use eda_planner::mckp::Objective;
use eda_planner::synth::SizeClass;
use eda_planner::{Exec, Stage};

#[derive(Parser, Debug)]
#[command(name = "eda-planner", version, about = "EDA runtime prediction and cloud deployment planning")]
struct Cli {
    /// Run every batch sequentially instead of on the rayon pool.
    #[arg(long, global = true)]
    sequential: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse a design (.aag, .json, .v or .graph) and print its statistics.
    Parse(ParseArgs),
    /// Generate a labeled synthetic dataset for one application.
    Synth(SynthArgs),
    /// Train a runtime model on a JSON-lines dataset.
    Train(TrainArgs),
    /// Predict 1/2/4/8-vCPU runtimes of a design with a trained model.
    Predict(PredictArgs),
    /// Choose a machine size per stage from known runtimes and prices.
    Optimize(OptimizeArgs),
    /// Predict every stage for a design, then optimize the deployment.
    Plan(PlanArgs),
}

#[derive(Args, Debug)]
struct ParseArgs {
    design: PathBuf,
    /// Also write the canonical dump (`-` for stdout).
    #[arg(long)]
    dump: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = StatsFormat::Table)]
    format: StatsFormat,
}

#[derive(Args, Debug)]
struct SynthArgs {
    #[arg(long, value_parser = parse_stage)]
    application: Stage,
    /// Number of distinct designs.
    #[arg(long, default_value_t = 250)]
    count: usize,
    /// Size classes, cycled over the designs.
    #[arg(long, value_delimiter = ',', value_parser = parse_size, default_value = "small,medium")]
    sizes: Vec<SizeClass>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Relative label noise.
    #[arg(long)]
    noise: Option<f64>,
    /// Use a fixed serial fraction instead of the size-scaled default.
    #[arg(long)]
    serial_fraction: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct TrainArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long, value_parser = parse_stage)]
    application: Stage,
    #[arg(long, default_value_t = eda_planner::gcn::DEFAULT_EPOCHS)]
    epochs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Loss-history CSV; defaults to `<out>.loss.csv`.
    #[arg(long)]
    history: Option<PathBuf>,
    /// Held-out JSON-lines set to report MAPE on.
    #[arg(long)]
    test: Option<PathBuf>,
    /// GCN layer widths.
    #[arg(long, value_delimiter = ',', default_value = "256,128")]
    gcn_dims: Vec<usize>,
    #[arg(long, default_value_t = 128)]
    head_hidden: usize,
    /// Aggregate over successors as well as predecessors.
    #[arg(long)]
    undirected: bool,
}

#[derive(Args, Debug)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    design: PathBuf,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PlanOutput {
    #[arg(long, value_enum, default_value_t = ObjectiveArg::Paper)]
    objective: ObjectiveArg,
    #[arg(long, value_enum, default_value_t = ReportFormat::Table)]
    format: ReportFormat,
    /// Write the report here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Bar chart of plan vs over/under-provisioned cost per deadline.
    #[arg(long)]
    emit_svg: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct OptimizeArgs {
    /// Runtimes JSON (optionally with literal per-stage costs).
    #[arg(long, required_unless_present = "model", conflicts_with_all = ["model", "design"])]
    runtimes: Option<PathBuf>,
    /// Trained model, one per stage (with --design instead of --runtimes).
    #[arg(long, requires = "design")]
    model: Vec<PathBuf>,
    /// Designs the models predict for: an AIG for synthesis, a netlist for the rest.
    #[arg(long)]
    design: Vec<PathBuf>,
    /// Pricing CSV. Required unless the runtimes file carries costs.
    #[arg(long)]
    pricing: Option<PathBuf>,
    /// Deadline in seconds; repeat to sweep.
    #[arg(long, required = true)]
    deadline: Vec<u64>,
    #[command(flatten)]
    out: PlanOutput,
}

#[derive(Args, Debug)]
struct PlanArgs {
    #[arg(long, required = true)]
    design: Vec<PathBuf>,
    /// Directory holding `<stage>.gcn` files.
    #[arg(long)]
    model_dir: Option<PathBuf>,
    /// Individual model files; override the directory per stage.
    #[arg(long)]
    model: Vec<PathBuf>,
    #[arg(long)]
    pricing: PathBuf,
    #[arg(long, required = true)]
    deadline: Vec<u64>,
    #[command(flatten)]
    out: PlanOutput,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum StatsFormat {
    Table,
    Json,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum ReportFormat {
    Table,
    Json,
    Csv,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum ObjectiveArg {
    /// Maximize the sum of reciprocal stage costs.
    Paper,
    /// Minimize total cost.
    MinCost,
}

impl From<ObjectiveArg> for Objective {
    fn from(o: ObjectiveArg) -> Self {
        match o {
            ObjectiveArg::Paper => Objective::PaperReciprocalCost,
            ObjectiveArg::MinCost => Objective::MinTotalCost,
        }
    }
}

fn parse_stage(s: &str) -> Result<Stage, String> {
    s.parse().map_err(|e: eda_planner::Error| e.to_string())
}

fn parse_size(s: &str) -> Result<SizeClass, String> {
    s.parse().map_err(|e: eda_planner::Error| e.to_string())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<eda_planner::Error>() {
        Some(e) if e.is_contract_violation() => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("EDA_PLANNER_LOG", "warn")).init();
    let cli = Cli::parse();
    let exec = if cli.sequential { Exec::Sequential } else { Exec::Parallel };
    let result = match cli.command {
        Command::Parse(a) => commands::parse(a),
        Command::Synth(a) => commands::synth(a, exec),
        Command::Train(a) => commands::train(a, exec),
        Command::Predict(a) => commands::predict(a),
        Command::Optimize(a) => commands::optimize(a, exec),
        Command::Plan(a) => commands::plan(a, exec),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
