//! `interf fit`.

use std::path::PathBuf;

use serde::Serialize;

use interference_core::io;
use interference_core::regression::{
    self, FitDiagnostics, ResidualReport, SignificanceReport,
};
use interference_core::Result;

use crate::output::Format;

#[derive(clap::Args)]
pub struct FitArgs {
    /// Interference dataset (CSV).
    pub dataset: PathBuf,

    /// Write the fitted model (JSON) here.
    #[arg(long)]
    pub output: Option<PathBuf>,

    /// Significance level for the F and t tests.
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,

    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
}

#[derive(Serialize)]
struct FitReport<'a> {
    coefficients: [f64; 3],
    r2: f64,
    #[serde(with = "maybe_nonfinite_local")]
    r2_adj: f64,
    significance: &'a SignificanceReport,
    residual_checks: Option<&'a ResidualReport>,
    rows_used: usize,
    rows_failed: usize,
    model_json: serde_json::Value,
}

// Local mirror of the core crate's non-finite float encoding for the one
// field that can be NaN in a report.
mod maybe_nonfinite_local {
    use serde::Serializer;

    pub fn serialize<S: Serializer>(value: &f64, serializer: S) -> Result<S::Ok, S::Error> {
        if value.is_finite() {
            serializer.serialize_f64(*value)
        } else if value.is_nan() {
            serializer.serialize_str("nan")
        } else if *value > 0.0 {
            serializer.serialize_str("inf")
        } else {
            serializer.serialize_str("-inf")
        }
    }
}

pub fn run(args: FitArgs) -> Result<()> {
    let dataset = io::load_dataset(&args.dataset)?;
    let rows_failed = dataset.failed_rows().count();
    let rows_used = dataset.clean_rows().count();

    let model = regression::fit(&dataset)?;
    let diag = model.diagnostics().expect("fit always attaches diagnostics");
    let significance = regression::significance(diag, args.alpha);
    let residual_checks = regression::residual_checks(diag).ok();

    if let Some(path) = &args.output {
        io::save_model(path, &model)?;
    }

    match args.format {
        Format::Json => {
            let report = FitReport {
                coefficients: model.coefficients(),
                r2: diag.r2,
                r2_adj: diag.r2_adj,
                significance: &significance,
                residual_checks: residual_checks.as_ref(),
                rows_used,
                rows_failed,
                model_json: serde_json::from_str(&io::model_to_json(&model)?)?,
            };
            println!("{}", serde_json::to_string_pretty(&report)?);
        }
        Format::Table => {
            print_table(diag, &significance, residual_checks.as_ref());
            if rows_failed > 0 {
                println!("note: {rows_failed} failed rows were excluded from the fit");
            }
            if args.output.is_none() {
                println!("\nmodel:\n{}", io::model_to_json(&model)?);
            }
        }
    }
    Ok(())
}

fn print_table(
    diag: &FitDiagnostics,
    significance: &SignificanceReport,
    residual_checks: Option<&ResidualReport>,
) {
    println!("fitted on {} rows (no intercept, uncentered R²)", diag.n);
    println!(
        "{:<6} {:>12} {:>12} {:>12} {:>12} {:>6}",
        "term", "coefficient", "std error", "t", "p", "sig"
    );
    for (c, s) in diag.coefficients.iter().zip(&significance.coefficients) {
        println!(
            "{:<6} {:>12.6} {:>12.6} {:>12.4} {:>12.3e} {:>6}",
            c.name,
            c.estimate,
            c.std_error,
            c.t_statistic,
            c.p_value,
            if s.significant { "yes" } else { "no" }
        );
    }
    println!("R² = {:.6}, adjusted R² = {:.6}", diag.r2, diag.r2_adj);
    println!(
        "F = {:.4} (p = {:.3e}) — regression {} at α = {}",
        diag.f_statistic,
        diag.f_pvalue,
        if significance.regression_significant { "significant" } else { "not significant" },
        significance.alpha
    );
    match residual_checks {
        Some(report) => {
            let line = |name: &str, check: &interference_core::regression::CheckResult| {
                println!(
                    "residual {:<18} statistic = {:>10.4}, p = {:>10.4} -> {}",
                    name,
                    check.statistic,
                    check.p_value,
                    if check.passed { "pass" } else { "FAIL" }
                );
            };
            line("linearity proxy", &report.linearity);
            line("homoscedasticity", &report.heteroscedasticity);
            line("normality", &report.normality);
        }
        None => println!("residual checks skipped: too few residuals"),
    }
}
