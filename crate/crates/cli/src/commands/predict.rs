//! `interf predict` and `interf normalize`.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use interference_core::io::{self, ProfileFile, RateTriple};
use interference_core::model::{self, DEFAULT_TRAINED_RANGE_MAX};
use interference_core::profile::ScoredProfile;
use interference_core::resource::{ResourceKind, Units};
use interference_core::{CoLocation, Error, Result};

use crate::output::{self, Format};

#[derive(clap::Args)]
pub struct PredictArgs {
    /// Profile files (JSON) forming one co-location; at least two.
    #[arg(required = true, num_args = 1..)]
    pub profiles: Vec<PathBuf>,

    /// Model file, or `default` for the built-in coefficients.
    #[arg(long, default_value = "default")]
    pub model: String,

    /// Calibration file for raw-rate profiles (falls back to
    /// $INTERF_CALIBRATION).
    #[arg(long)]
    pub calibration: Option<PathBuf>,

    /// Score rounding: 1, 2 or none.
    #[arg(long, default_value = "none")]
    pub decimals: String,

    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
}

/// Machine-readable prediction report. The member entries are valid profile
/// files (score units), so the report can be re-ingested as input and
/// reproduces identical numbers.
#[derive(Debug, Serialize, Deserialize)]
pub struct PredictionReport {
    pub members: Vec<ProfileFile>,
    pub accumulated: RateTriple,
    pub similarity: RateTriple,
    pub t1: f64,
    pub t2: f64,
    pub t3: f64,
    pub coefficients: [f64; 3],
    pub predicted_interference: f64,
    pub predicted_percent: String,
    /// True when the prediction leaves the range the model was fitted on.
    pub extrapolation: bool,
}

pub fn run(args: PredictArgs) -> Result<()> {
    if args.profiles.len() < 2 {
        return Err(Error::Config(format!(
            "a co-location needs at least 2 profiles, got {}",
            args.profiles.len()
        )));
    }
    let model = output::load_model(&args.model)?;
    let maxima = output::load_calibration(&args.calibration)?;
    let rounding = output::parse_rounding(&args.decimals)?;

    let mut members = Vec::with_capacity(args.profiles.len());
    for path in &args.profiles {
        let profile = io::load_profile(path)?;
        members.push(profile.to_scored(maxima.as_ref(), rounding)?);
    }
    let report = predict_colocation(&model, members)?;

    match args.format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&report)?),
        Format::Table => print_table(&report),
    }
    Ok(())
}

pub fn predict_colocation(
    model: &interference_core::InterferenceModel,
    members: Vec<ScoredProfile>,
) -> Result<PredictionReport> {
    let coloc = CoLocation::new(members)?;
    let row = model::features(&coloc);
    let predicted = model.predict(&row);
    Ok(PredictionReport {
        members: coloc
            .members()
            .iter()
            .map(|m| ProfileFile {
                label: m.label().to_string(),
                vm_count: 1,
                vm_accesses: vec![RateTriple {
                    sllc: m.scores().sllc(),
                    dram: m.scores().dram(),
                    net: m.scores().net(),
                }],
                isolated_runtime_s: m.isolated_runtime(),
                units: Units::Score,
            })
            .collect(),
        accumulated: RateTriple {
            sllc: coloc.accumulated_access(ResourceKind::Sllc),
            dram: coloc.accumulated_access(ResourceKind::Dram),
            net: coloc.accumulated_access(ResourceKind::Net),
        },
        similarity: RateTriple {
            sllc: coloc.global_similarity(ResourceKind::Sllc),
            dram: coloc.global_similarity(ResourceKind::Dram),
            net: coloc.global_similarity(ResourceKind::Net),
        },
        t1: row.t1,
        t2: row.t2,
        t3: row.t3,
        coefficients: model.coefficients(),
        predicted_interference: predicted,
        predicted_percent: output::percent(predicted),
        extrapolation: predicted < 0.0 || predicted > DEFAULT_TRAINED_RANGE_MAX,
    })
}

fn print_table(report: &PredictionReport) {
    let labels: Vec<&str> = report.members.iter().map(|m| m.label.as_str()).collect();
    println!("co-location: {}", labels.join(" x "));
    println!("{:<16} {:>8} {:>8} {:>8}", "member", "sllc", "dram", "net");
    for member in &report.members {
        let s = &member.vm_accesses[0];
        println!("{:<16} {:>8.4} {:>8.4} {:>8.4}", member.label, s.sllc, s.dram, s.net);
    }
    println!(
        "accumulated      {:>8.4} {:>8.4} {:>8.4}",
        report.accumulated.sllc, report.accumulated.dram, report.accumulated.net
    );
    println!(
        "similarity       {:>8.4} {:>8.4} {:>8.4}",
        report.similarity.sllc, report.similarity.dram, report.similarity.net
    );
    println!("features: t1={:.6} t2={:.6} t3={:.6}", report.t1, report.t2, report.t3);
    println!("predicted interference: {}", report.predicted_percent);
    if report.extrapolation {
        println!("warning: prediction lies outside the model's fitted range (extrapolation)");
    }
}

#[derive(clap::Args)]
pub struct NormalizeArgs {
    /// Profile file (JSON) to normalize.
    pub profile: PathBuf,

    /// Calibration file (falls back to $INTERF_CALIBRATION).
    #[arg(long)]
    pub calibration: Option<PathBuf>,

    /// Score rounding: 1, 2 or none.
    #[arg(long, default_value = "none")]
    pub decimals: String,

    /// Write the score-units profile here instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

pub fn run_normalize(args: NormalizeArgs) -> Result<()> {
    let maxima = output::load_calibration(&args.calibration)?;
    let rounding = output::parse_rounding(&args.decimals)?;
    let profile = io::load_profile(&args.profile)?;
    let scored = profile.to_scored(maxima.as_ref(), rounding)?;
    let file = ProfileFile {
        label: scored.label().to_string(),
        vm_count: 1,
        vm_accesses: vec![RateTriple {
            sllc: scored.scores().sllc(),
            dram: scored.scores().dram(),
            net: scored.scores().net(),
        }],
        isolated_runtime_s: scored.isolated_runtime(),
        units: Units::Score,
    };
    let json = serde_json::to_string_pretty(&file)?;
    output::emit(&args.output, &(json + "\n"))
}
