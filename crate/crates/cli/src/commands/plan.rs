//! `interf plan`: a greedy placement demonstrator, not an optimal solver.
//!
//! Strategy: rank every candidate grouping of the unassigned profiles, then
//! repeatedly place the most burdensome unassigned profile (highest
//! predicted self-co-location interference) into the group that minimizes
//! predicted interference. Anchoring on the heaviest profile keeps it from
//! being stranded with copies of itself after the light pairs are taken.

use std::path::PathBuf;

use serde::Serialize;

use interference_core::io;
use interference_core::model;
use interference_core::profile::ScoredProfile;
use interference_core::{CoLocation, Error, InterferenceModel, Result};

use crate::output::{self, Format};

/// Candidate groupings above this count abort instead of grinding.
const MAX_CANDIDATES: usize = 100_000;

#[derive(clap::Args)]
pub struct PlanArgs {
    /// Profile files (JSON); repeats allowed.
    #[arg(required = true, num_args = 1..)]
    pub profiles: Vec<PathBuf>,

    /// Applications per host.
    #[arg(long)]
    pub slots: usize,

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

#[derive(Debug, Clone, Serialize)]
pub struct RankedGroup {
    pub members: Vec<String>,
    pub predicted_interference: f64,
}

#[derive(Debug, Serialize)]
pub struct PlanRecommendation {
    pub strategy: &'static str,
    /// Every grouping evaluated while planning, ascending by prediction;
    /// ties break lexicographically by member labels.
    pub evaluated: Vec<RankedGroup>,
    pub assignment: Vec<RankedGroup>,
    pub total_predicted_interference: f64,
}

pub fn run(args: PlanArgs) -> Result<()> {
    if args.slots < 2 {
        return Err(Error::Config(format!(
            "slots per host must be at least 2, got {}",
            args.slots
        )));
    }
    if args.profiles.len() < args.slots {
        return Err(Error::Config(format!(
            "{} profiles cannot fill a host of {} slots",
            args.profiles.len(),
            args.slots
        )));
    }
    if args.profiles.len() % args.slots != 0 {
        return Err(Error::Config(format!(
            "{} profiles do not divide into hosts of {} slots",
            args.profiles.len(),
            args.slots
        )));
    }

    let model = output::load_model(&args.model)?;
    let maxima = output::load_calibration(&args.calibration)?;
    let rounding = output::parse_rounding(&args.decimals)?;
    let mut members = Vec::with_capacity(args.profiles.len());
    for path in &args.profiles {
        members.push(io::load_profile(path)?.to_scored(maxima.as_ref(), rounding)?);
    }

    let recommendation = recommend(&model, members, args.slots)?;
    match args.format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&recommendation)?),
        Format::Table => print_table(&recommendation),
    }
    Ok(())
}

pub fn recommend(
    model: &InterferenceModel,
    members: Vec<ScoredProfile>,
    slots: usize,
) -> Result<PlanRecommendation> {
    let predict_group = |indices: &[usize]| -> f64 {
        let group: Vec<ScoredProfile> =
            indices.iter().map(|&i| members[i].clone()).collect();
        let coloc = CoLocation::new(group).expect("groups have >= 2 members");
        model.predict(&model::features(&coloc))
    };

    // Burden proxy: predicted interference of a host filled with copies of
    // the profile.
    let burden: Vec<f64> = (0..members.len())
        .map(|i| predict_group(&vec![i; slots]))
        .collect();

    let labels = |indices: &[usize]| -> Vec<String> {
        let mut out: Vec<String> =
            indices.iter().map(|&i| members[i].label().to_string()).collect();
        out.sort();
        out
    };

    let mut unassigned: Vec<usize> = (0..members.len()).collect();
    let mut evaluated: Vec<RankedGroup> = Vec::new();
    let mut assignment: Vec<RankedGroup> = Vec::new();

    while !unassigned.is_empty() {
        let anchor = *unassigned
            .iter()
            .max_by(|&&a, &&b| {
                burden[a]
                    .partial_cmp(&burden[b])
                    .unwrap()
                    .then_with(|| members[b].label().cmp(members[a].label()))
                    .then_with(|| b.cmp(&a))
            })
            .expect("nonempty");

        let candidates = combinations(&unassigned, slots);
        if candidates.len() > MAX_CANDIDATES {
            return Err(Error::Config(format!(
                "{} candidate groupings exceed the planner's limit of {MAX_CANDIDATES}",
                candidates.len()
            )));
        }

        let mut chosen: Option<(Vec<usize>, f64)> = None;
        for candidate in candidates {
            let predicted = predict_group(&candidate);
            evaluated.push(RankedGroup {
                members: labels(&candidate),
                predicted_interference: predicted,
            });
            if candidate.contains(&anchor) {
                let better = match &chosen {
                    None => true,
                    Some((best, best_predicted)) => {
                        predicted < *best_predicted
                            || (predicted == *best_predicted && labels(&candidate) < labels(best))
                    }
                };
                if better {
                    chosen = Some((candidate, predicted));
                }
            }
        }

        let (group, predicted) = chosen.expect("anchor always belongs to some candidate");
        unassigned.retain(|i| !group.contains(i));
        assignment.push(RankedGroup {
            members: labels(&group),
            predicted_interference: predicted,
        });
    }

    evaluated.sort_by(|a, b| {
        a.predicted_interference
            .partial_cmp(&b.predicted_interference)
            .unwrap()
            .then_with(|| a.members.cmp(&b.members))
    });
    evaluated.dedup_by(|a, b| {
        a.members == b.members && a.predicted_interference == b.predicted_interference
    });

    let total = assignment.iter().map(|g| g.predicted_interference).sum();
    Ok(PlanRecommendation {
        strategy: "greedy-anchored",
        evaluated,
        assignment,
        total_predicted_interference: total,
    })
}

/// All `size`-element combinations of `pool`, preserving pool order.
fn combinations(pool: &[usize], size: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(size);
    fn recurse(
        pool: &[usize],
        size: usize,
        start: usize,
        current: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if current.len() == size {
            out.push(current.clone());
            return;
        }
        for i in start..pool.len() {
            current.push(pool[i]);
            recurse(pool, size, i + 1, current, out);
            current.pop();
        }
    }
    recurse(pool, size, 0, &mut current, &mut out);
    out
}

fn print_table(recommendation: &PlanRecommendation) {
    println!("strategy: {}", recommendation.strategy);
    println!("evaluated groupings (ascending):");
    for group in &recommendation.evaluated {
        println!(
            "  {:<40} {}",
            group.members.join(" x "),
            output::percent(group.predicted_interference)
        );
    }
    println!("assignment:");
    for (host, group) in recommendation.assignment.iter().enumerate() {
        println!(
            "  host {}: {:<32} {}",
            host + 1,
            group.members.join(" x "),
            output::percent(group.predicted_interference)
        );
    }
    println!(
        "total predicted interference: {}",
        output::percent(recommendation.total_predicted_interference)
    );
}
