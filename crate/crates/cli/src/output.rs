//! Shared output helpers: format selection and common flag plumbing.

use std::path::PathBuf;
use std::str::FromStr;

use interference_core::io;
use interference_core::resource::{CalibrationMaxima, Rounding};
use interference_core::{Error, InterferenceModel, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Table,
    Json,
}

/// Environment variable holding a default calibration file path.
pub const CALIBRATION_ENV: &str = "INTERF_CALIBRATION";

/// Resolves `--calibration`, falling back to `INTERF_CALIBRATION`.
pub fn load_calibration(flag: &Option<PathBuf>) -> Result<Option<CalibrationMaxima>> {
    let path = match flag {
        Some(path) => Some(path.clone()),
        None => std::env::var_os(CALIBRATION_ENV).map(PathBuf::from),
    };
    path.map(|p| io::load_calibration(&p)).transpose()
}

pub fn parse_rounding(decimals: &str) -> Result<Rounding> {
    Rounding::from_str(decimals)
}

/// `--model` accepts a file path or the literal `default`.
pub fn load_model(spec: &str) -> Result<InterferenceModel> {
    if spec == "default" {
        Ok(InterferenceModel::default_model())
    } else {
        io::load_model(std::path::Path::new(spec))
    }
}

/// Writes to the path when given, otherwise to stdout.
pub fn emit(output: &Option<PathBuf>, content: &str) -> Result<()> {
    match output {
        Some(path) => {
            std::fs::write(path, content)?;
            Ok(())
        }
        None => {
            use std::io::Write;
            std::io::stdout()
                .write_all(content.as_bytes())
                .map_err(Error::Io)
        }
    }
}

pub fn percent(value: f64) -> String {
    format!("{:.2}%", value * 100.0)
}
