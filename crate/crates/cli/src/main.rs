//! `interf` — predict co-location interference, fit the model from
//! datasets, generate datasets, run the synthetic stressor, and plan
//! placements.
//!
//! Every command exits 0 on success. Failures print a single
//! machine-parsable line `error[<class>]: <message>` to stderr and exit
//! with the class's code (see [`exit_code`]).

mod commands;
mod output;

use clap::{Parser, Subcommand};

use interference_core::Error;

#[derive(Parser)]
#[command(
    name = "interf",
    version,
    about = "Cross-application interference toolkit for co-located workloads"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Predict the interference level of one co-location of profiles.
    Predict(commands::predict::PredictArgs),
    /// Normalize a raw profile into scores against a calibration.
    Normalize(commands::predict::NormalizeArgs),
    /// Fit the three-term model to an interference dataset.
    Fit(commands::fit::FitArgs),
    /// Run the synthetic stressor and report its software counters.
    Stress(commands::stress::StressArgs),
    /// Generate an interference dataset from a co-execution plan.
    Dataset(commands::dataset::DatasetArgs),
    /// Bin a dataset's interference levels into a histogram CSV.
    Histogram(commands::dataset::HistogramArgs),
    /// Group profiles onto hosts, minimizing predicted interference.
    Plan(commands::plan::PlanArgs),
}

/// Stable exit codes per error class.
fn exit_code(class: &str) -> i32 {
    match class {
        "io" => 10,
        "parse" => 11,
        "config" => 12,
        "calibration" => 13,
        "unit-mismatch" => 14,
        "malformed-profile" => 15,
        "domain" => 16,
        "insufficient-data" => 17,
        "collinearity" => 18,
        "undefined-correlation" => 19,
        "unknown-label" => 20,
        "communication" => 21,
        "co-execution" => 22,
        "dataset-format" => 23,
        _ => 1,
    }
}

fn main() {
    let cli = Cli::parse();
    let result: Result<(), Error> = match cli.command {
        Command::Predict(args) => commands::predict::run(args),
        Command::Normalize(args) => commands::predict::run_normalize(args),
        Command::Fit(args) => commands::fit::run(args),
        Command::Stress(args) => commands::stress::run(args),
        Command::Dataset(args) => commands::dataset::run(args),
        Command::Histogram(args) => commands::dataset::run_histogram(args),
        Command::Plan(args) => commands::plan::run(args),
    };
    if let Err(err) = result {
        let class = err.class();
        eprintln!("error[{class}]: {err}");
        std::process::exit(exit_code(class));
    }
}
