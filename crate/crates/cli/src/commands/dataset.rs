//! `interf dataset` and `interf histogram`.

use std::path::PathBuf;

use interference_core::dataset::{
    self, ContentionOracle, ExternalMeasurements, OracleRunner, Runner, StressorRunner,
    TransportKind,
};
use interference_core::io;
use interference_core::model::DEFAULT_COEFFICIENTS;
use interference_core::{Error, Result};

use crate::commands::stress::TransportArg;
use crate::output;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum RunnerArg {
    /// Deterministic contention oracle (simulation).
    Oracle,
    /// Real co-executions of the members' stressor parameters.
    Stressor,
    /// Replay externally measured concurrent runtimes.
    External,
}

#[derive(clap::Args)]
pub struct DatasetArgs {
    /// Co-execution plan (JSON).
    #[arg(long)]
    pub plan: PathBuf,

    #[arg(long, value_enum, default_value_t = RunnerArg::Oracle)]
    pub runner: RunnerArg,

    /// Write the dataset CSV here instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,

    /// Oracle noise seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Oracle noise standard deviation.
    #[arg(long, default_value_t = 0.0)]
    pub sigma: f64,

    /// Oracle coefficients `c1,c2,c3`; defaults to the built-in model's.
    #[arg(long)]
    pub oracle_coefficients: Option<String>,

    /// Measurements file for the external runner.
    #[arg(long)]
    pub measurements: Option<PathBuf>,

    /// Calibration for plans that reference raw-rate profiles.
    #[arg(long)]
    pub calibration: Option<PathBuf>,

    /// Score rounding for profile normalization: 1, 2 or none.
    #[arg(long, default_value = "none")]
    pub decimals: String,

    /// Workers per member for the stressor runner.
    #[arg(long, default_value_t = 1)]
    pub workers: usize,

    #[arg(long, value_enum, default_value_t = TransportArg::Inproc)]
    pub transport: TransportArg,
}

fn parse_coefficients(text: &str) -> Result<[f64; 3]> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(Error::Config(format!(
            "expected three comma-separated coefficients, got `{text}`"
        )));
    }
    let mut out = [0.0; 3];
    for (slot, part) in out.iter_mut().zip(&parts) {
        *slot = part
            .parse()
            .map_err(|e| Error::Config(format!("bad coefficient `{part}`: {e}")))?;
    }
    Ok(out)
}

pub fn run(args: DatasetArgs) -> Result<()> {
    let maxima = output::load_calibration(&args.calibration)?;
    let rounding = output::parse_rounding(&args.decimals)?;
    let mut plan = io::load_plan(&args.plan, maxima.as_ref(), rounding)?;

    let transport = match args.transport {
        TransportArg::Inproc => TransportKind::InProcess,
        TransportArg::Loopback => TransportKind::Loopback,
    };

    let runner: Box<dyn Runner> = match args.runner {
        RunnerArg::Oracle => {
            let coefficients = match &args.oracle_coefficients {
                Some(text) => parse_coefficients(text)?,
                None => DEFAULT_COEFFICIENTS,
            };
            Box::new(OracleRunner {
                oracle: ContentionOracle::new(coefficients, args.sigma, args.seed)?,
            })
        }
        RunnerArg::Stressor => {
            let runner = StressorRunner::new(args.workers, transport);
            // Members without a measured isolated runtime get one now, from
            // a dedicated solo run.
            for member in &mut plan.members {
                if member.isolated_runtime.is_none() {
                    let spec = member.spec.ok_or_else(|| Error::CoExecution {
                        label: member.label.clone(),
                        reason: "member has no stressor parameters".to_string(),
                    })?;
                    member.isolated_runtime =
                        Some(runner.measure_isolated(&spec)?.max(1e-9));
                }
            }
            Box::new(runner)
        }
        RunnerArg::External => {
            let path = args.measurements.as_ref().ok_or_else(|| {
                Error::Config("--measurements is required for the external runner".to_string())
            })?;
            Box::new(load_external(path)?)
        }
    };

    let dataset = dataset::build_dataset(&plan, runner.as_ref())?;
    let failed = dataset.failed_rows().count();
    let csv = io::dataset_to_csv(&dataset)?;
    output::emit(&args.output, &csv)?;
    eprintln!(
        "dataset: {} rows ({} failed){}",
        dataset.rows.len(),
        failed,
        match &args.output {
            Some(path) => format!(", written to {}", path.display()),
            None => String::new(),
        }
    );
    Ok(())
}

fn load_external(path: &PathBuf) -> Result<ExternalMeasurements> {
    io::load_measurements(path)
}

#[derive(clap::Args)]
pub struct HistogramArgs {
    /// Interference dataset (CSV).
    pub dataset: PathBuf,

    /// Width of each histogram bin.
    #[arg(long, default_value_t = 0.5)]
    pub bin_width: f64,

    /// Write the histogram CSV here instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

pub fn run_histogram(args: HistogramArgs) -> Result<()> {
    let dataset = io::load_dataset(&args.dataset)?;
    let bins = dataset::dataset_histogram(&dataset, args.bin_width)?;
    output::emit(&args.output, &io::histogram_to_csv(&bins)?)
}
