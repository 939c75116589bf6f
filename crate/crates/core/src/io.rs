//! File formats shared with the CLI.
//!
//! - Profile (JSON): `{ label, vm_count, vm_accesses: [{sllc, dram, net}],
//!   isolated_runtime_s?, units: "raw"|"score" }`
//! - Calibration (JSON): `{ max_sllc, max_dram, max_net }`
//! - Model (JSON): `{ c1, c2, c3, provenance, diagnostics? }`
//! - Dataset (CSV): header
//!   `t_sllc,t_dram,t_net,g_sllc,g_dram,g_net,t1,t2,t3,interference`, with
//!   a trailing `error` column when any row failed, and optional `# key:
//!   value` metadata comment lines before the header. Feature columns are
//!   recomputed and validated on load.
//! - Plan (JSON): `{ members: [...], scheme, colocations?, repetitions?,
//!   calibration_id? }`; members resolve scores from inline values, profile
//!   files, or preset labels.
//! - Measurements (JSON): externally measured concurrent runtimes per
//!   co-location.
//! - Histogram (CSV): `bin_low,bin_high,count`.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::{CoExecutionPlan, ExternalMeasurements, HistogramBin, PlanMember, PlanScheme};
use crate::error::{Error, Result};
use crate::model::{FeatureRow, InterferenceModel, Provenance};
use crate::profile::ApplicationProfile;
use crate::regression::{
    DatasetMetadata, DatasetRow, FitDiagnostics, InterferenceDataset, RowOutcome,
};
use crate::resource::{CalibrationMaxima, ResourceVector, Rounding, Units};
use crate::stressor::{presets, SyntheticAppSpec};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RateTriple {
    pub sllc: f64,
    pub dram: f64,
    pub net: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProfileFile {
    pub label: String,
    pub vm_count: usize,
    pub vm_accesses: Vec<RateTriple>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub isolated_runtime_s: Option<f64>,
    pub units: Units,
}

impl ProfileFile {
    pub fn into_profile(self) -> Result<ApplicationProfile> {
        if self.vm_count != self.vm_accesses.len() {
            return Err(Error::MalformedProfile {
                label: self.label,
                reason: format!(
                    "vm_count {} does not match {} vm_accesses entries",
                    self.vm_count,
                    self.vm_accesses.len()
                ),
            });
        }
        let vm_accesses = self
            .vm_accesses
            .iter()
            .map(|v| match self.units {
                Units::Raw => ResourceVector::raw(v.sllc, v.dram, v.net),
                Units::Score => ResourceVector::score(v.sllc, v.dram, v.net),
            })
            .collect::<Result<Vec<_>>>()?;
        ApplicationProfile::new(self.label, vm_accesses, self.isolated_runtime_s)
    }

    pub fn from_profile(profile: &ApplicationProfile) -> Self {
        Self {
            label: profile.label().to_string(),
            vm_count: profile.vm_count(),
            vm_accesses: profile
                .vm_accesses()
                .iter()
                .map(|v| RateTriple { sllc: v.sllc(), dram: v.dram(), net: v.net() })
                .collect(),
            isolated_runtime_s: profile.isolated_runtime(),
            units: profile.units(),
        }
    }
}

pub fn load_profile(path: &Path) -> Result<ApplicationProfile> {
    let file: ProfileFile = serde_json::from_str(&fs::read_to_string(path)?)?;
    file.into_profile()
}

pub fn save_profile(path: &Path, profile: &ApplicationProfile) -> Result<()> {
    let json = serde_json::to_string_pretty(&ProfileFile::from_profile(profile))?;
    fs::write(path, json + "\n")?;
    Ok(())
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
struct CalibrationFile {
    max_sllc: f64,
    max_dram: f64,
    max_net: f64,
}

pub fn load_calibration(path: &Path) -> Result<CalibrationMaxima> {
    let file: CalibrationFile = serde_json::from_str(&fs::read_to_string(path)?)?;
    CalibrationMaxima::new(file.max_sllc, file.max_dram, file.max_net)
}

pub fn save_calibration(path: &Path, maxima: &CalibrationMaxima) -> Result<()> {
    let file = CalibrationFile {
        max_sllc: maxima.get(crate::resource::ResourceKind::Sllc),
        max_dram: maxima.get(crate::resource::ResourceKind::Dram),
        max_net: maxima.get(crate::resource::ResourceKind::Net),
    };
    fs::write(path, serde_json::to_string_pretty(&file)? + "\n")?;
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ModelFile {
    c1: f64,
    c2: f64,
    c3: f64,
    provenance: Provenance,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    diagnostics: Option<FitDiagnostics>,
}

pub fn model_to_json(model: &InterferenceModel) -> Result<String> {
    let [c1, c2, c3] = model.coefficients();
    let file = ModelFile {
        c1,
        c2,
        c3,
        provenance: model.provenance(),
        diagnostics: model.diagnostics().cloned(),
    };
    Ok(serde_json::to_string_pretty(&file)?)
}

pub fn model_from_json(json: &str) -> Result<InterferenceModel> {
    let file: ModelFile = serde_json::from_str(json)?;
    InterferenceModel::new(file.c1, file.c2, file.c3, file.provenance, file.diagnostics)
}

pub fn load_model(path: &Path) -> Result<InterferenceModel> {
    model_from_json(&fs::read_to_string(path)?)
}

pub fn save_model(path: &Path, model: &InterferenceModel) -> Result<()> {
    fs::write(path, model_to_json(model)? + "\n")?;
    Ok(())
}

const DATASET_HEADER: [&str; 10] = [
    "t_sllc", "t_dram", "t_net", "g_sllc", "g_dram", "g_net", "t1", "t2", "t3", "interference",
];

/// Tolerance for revalidating the stored feature columns against the stored
/// accumulated-access and similarity columns on load.
pub const FEATURE_VALIDATION_TOLERANCE: f64 = 1e-6;

pub fn dataset_to_csv(dataset: &InterferenceDataset) -> Result<String> {
    let mut out = String::new();
    if let Some(id) = &dataset.metadata.calibration_id {
        out.push_str(&format!("# calibration: {id}\n"));
    }
    if let Some(generated) = &dataset.metadata.generated {
        out.push_str(&format!("# generated: {generated}\n"));
    }
    let with_errors = dataset.rows.iter().any(|r| matches!(r.outcome, RowOutcome::Failed(_)));

    let mut writer = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<&str> = DATASET_HEADER.to_vec();
    if with_errors {
        header.push("error");
    }
    writer.write_record(&header)?;
    for row in &dataset.rows {
        let mut record: Vec<String> = Vec::with_capacity(header.len());
        for value in row.accumulated.iter().chain(&row.similarity) {
            record.push(value.to_string());
        }
        record.push(row.features.t1.to_string());
        record.push(row.features.t2.to_string());
        record.push(row.features.t3.to_string());
        match &row.outcome {
            RowOutcome::Observed(value) => {
                record.push(value.to_string());
                if with_errors {
                    record.push(String::new());
                }
            }
            RowOutcome::Failed(reason) => {
                record.push(String::new());
                if with_errors {
                    record.push(reason.clone());
                }
            }
        }
        writer.write_record(&record)?;
    }
    let body = String::from_utf8(writer.into_inner().map_err(|e| Error::Parse(e.to_string()))?)
        .map_err(|e| Error::Parse(e.to_string()))?;
    out.push_str(&body);
    Ok(out)
}

pub fn save_dataset(path: &Path, dataset: &InterferenceDataset) -> Result<()> {
    fs::write(path, dataset_to_csv(dataset)?)?;
    Ok(())
}

pub fn dataset_from_csv(content: &str) -> Result<InterferenceDataset> {
    let mut metadata = DatasetMetadata::default();
    for line in content.lines().take_while(|l| l.starts_with('#')) {
        let body = line.trim_start_matches('#').trim();
        if let Some(value) = body.strip_prefix("calibration:") {
            metadata.calibration_id = Some(value.trim().to_string());
        } else if let Some(value) = body.strip_prefix("generated:") {
            metadata.generated = Some(value.trim().to_string());
        }
    }

    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(content.as_bytes());
    {
        let headers = reader.headers()?;
        let names: Vec<&str> = headers.iter().collect();
        let expected: Vec<&str> = DATASET_HEADER.to_vec();
        let mut with_error = expected.clone();
        with_error.push("error");
        if names != expected && names != with_error {
            return Err(Error::DatasetFormat(format!(
                "unexpected header {names:?}; expected {expected:?} with optional trailing `error`"
            )));
        }
    }

    let mut dataset = InterferenceDataset::new(metadata);
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        let number = |idx: usize| -> Result<f64> {
            record
                .get(idx)
                .ok_or_else(|| Error::DatasetFormat(format!("row {line}: missing column {idx}")))?
                .parse::<f64>()
                .map_err(|e| Error::DatasetFormat(format!("row {line}: {e}")))
        };
        let accumulated = [number(0)?, number(1)?, number(2)?];
        let similarity = [number(3)?, number(4)?, number(5)?];
        let features = [number(6)?, number(7)?, number(8)?];

        let derived = [
            accumulated[0] * similarity[0],
            accumulated[2] * similarity[2],
            accumulated[1] * accumulated[0] * similarity[0],
        ];
        for (i, (stored, expected)) in features.iter().zip(derived).enumerate() {
            if (stored - expected).abs() > FEATURE_VALIDATION_TOLERANCE {
                return Err(Error::DatasetFormat(format!(
                    "row {line}: stored t{} = {stored} does not re-derive from the score columns \
                     (expected {expected})",
                    i + 1
                )));
            }
        }

        let interference_field = record.get(9).unwrap_or("");
        let error_field = record.get(10).unwrap_or("");
        let outcome = if !error_field.is_empty() {
            RowOutcome::Failed(error_field.to_string())
        } else if interference_field.is_empty() {
            RowOutcome::Failed("missing interference value".to_string())
        } else {
            let value: f64 = interference_field
                .parse()
                .map_err(|e| Error::DatasetFormat(format!("row {line}: {e}")))?;
            if !value.is_finite() {
                return Err(Error::DatasetFormat(format!(
                    "row {line}: interference {value} is not finite"
                )));
            }
            RowOutcome::Observed(value)
        };

        dataset.rows.push(DatasetRow {
            accumulated,
            similarity,
            features: FeatureRow::new(features[0], features[1], features[2]),
            outcome,
        });
    }
    Ok(dataset)
}

pub fn load_dataset(path: &Path) -> Result<InterferenceDataset> {
    dataset_from_csv(&fs::read_to_string(path)?)
}

pub fn histogram_to_csv(bins: &[HistogramBin]) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(["bin_low", "bin_high", "count"])?;
    for bin in bins {
        writer.write_record(&[bin.low.to_string(), bin.high.to_string(), bin.count.to_string()])?;
    }
    String::from_utf8(writer.into_inner().map_err(|e| Error::Parse(e.to_string()))?)
        .map_err(|e| Error::Parse(e.to_string()))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlanMemberFile {
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scores: Option<RateTriple>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spec: Option<SyntheticAppSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub isolated_runtime_s: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlanFile {
    pub members: Vec<PlanMemberFile>,
    /// "pairwise-all" or "explicit-list".
    pub scheme: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub colocations: Vec<Vec<String>>,
    #[serde(default = "default_repetitions")]
    pub repetitions: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calibration_id: Option<String>,
}

fn default_repetitions() -> u32 {
    1
}

/// Resolves a plan file into a runnable plan. Member scores come from, in
/// order of precedence: inline `scores`, a referenced profile file (raw
/// profiles need `maxima`), or the preset's reference scores. Stressor
/// parameters come from inline `spec` or the preset table. Relative profile
/// paths resolve against the plan file's directory.
pub fn resolve_plan(
    file: PlanFile,
    base_dir: &Path,
    maxima: Option<&CalibrationMaxima>,
    rounding: Rounding,
) -> Result<CoExecutionPlan> {
    let scheme = match file.scheme.as_str() {
        "pairwise-all" => PlanScheme::PairwiseAll,
        "explicit-list" => PlanScheme::ExplicitList,
        other => {
            return Err(Error::Config(format!(
                "unknown scheme `{other}`; expected pairwise-all or explicit-list"
            )))
        }
    };

    let mut members = Vec::with_capacity(file.members.len());
    for entry in file.members {
        let mut isolated = entry.isolated_runtime_s;
        let scores = if let Some(triple) = entry.scores {
            ResourceVector::score(triple.sllc, triple.dram, triple.net)?
        } else if let Some(profile_path) = &entry.profile {
            let mut path = Path::new(profile_path).to_path_buf();
            if path.is_relative() {
                path = base_dir.join(path);
            }
            let profile = load_profile(&path)?;
            if isolated.is_none() {
                isolated = profile.isolated_runtime();
            }
            *profile.to_scored(maxima, rounding)?.scores()
        } else if let Some(preset_label) = &entry.preset {
            presets::reference_scores(preset_label)?
        } else {
            return Err(Error::Config(format!(
                "member `{}` provides neither scores, profile nor preset",
                entry.label
            )));
        };

        let spec = match (&entry.spec, &entry.preset) {
            (Some(spec), _) => Some(*spec),
            (None, Some(preset_label)) => Some(presets::preset(preset_label)?),
            (None, None) => None,
        };

        let mut member = PlanMember::new(entry.label, scores)?;
        member.spec = spec;
        member.isolated_runtime = isolated;
        members.push(member);
    }

    Ok(CoExecutionPlan {
        members,
        scheme,
        explicit: file.colocations,
        repetitions: file.repetitions,
        calibration_id: file.calibration_id,
    })
}

pub fn load_plan(
    path: &Path,
    maxima: Option<&CalibrationMaxima>,
    rounding: Rounding,
) -> Result<CoExecutionPlan> {
    let file: PlanFile = serde_json::from_str(&fs::read_to_string(path)?)?;
    let base_dir = path.parent().unwrap_or(Path::new("."));
    resolve_plan(file, base_dir, maxima, rounding)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct MeasurementEntry {
    members: Vec<String>,
    concurrent_runtime_s: std::collections::BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct MeasurementsFile {
    measurements: Vec<MeasurementEntry>,
}

pub fn load_measurements(path: &Path) -> Result<ExternalMeasurements> {
    let file: MeasurementsFile = serde_json::from_str(&fs::read_to_string(path)?)?;
    let mut runner = ExternalMeasurements::default();
    for entry in file.measurements {
        let labels: Vec<&str> = entry.members.iter().map(|s| s.as_str()).collect();
        let key = ExternalMeasurements::colocation_key(&labels);
        runner.concurrent_runtimes.insert(key, entry.concurrent_runtime_s);
    }
    Ok(runner)
}

/// Spec file: either a full parameter set or a preset reference.
#[derive(Debug, Clone, Deserialize)]
struct SpecFile {
    #[serde(default)]
    preset: Option<String>,
    #[serde(default)]
    omega: Option<u64>,
    #[serde(default)]
    alpha: Option<u64>,
    #[serde(default)]
    beta: Option<u64>,
    #[serde(default)]
    gamma: Option<u64>,
    #[serde(default)]
    delta: Option<u64>,
    #[serde(default)]
    theta: Option<u64>,
    #[serde(default)]
    lambda_bytes: Option<u64>,
}

pub fn load_spec(path: &Path) -> Result<SyntheticAppSpec> {
    let file: SpecFile = serde_json::from_str(&fs::read_to_string(path)?)?;
    let has_params = [
        file.omega,
        file.alpha,
        file.beta,
        file.gamma,
        file.delta,
        file.theta,
        file.lambda_bytes,
    ]
    .iter()
    .any(Option::is_some);

    let spec = match (&file.preset, has_params) {
        (Some(_), true) => {
            return Err(Error::Config(
                "spec file mixes a preset reference with explicit parameters".to_string(),
            ))
        }
        (Some(label), false) => presets::preset(label)?,
        (None, _) => {
            let require = |value: Option<u64>, name: &str| {
                value.ok_or_else(|| Error::Config(format!("spec file is missing `{name}`")))
            };
            SyntheticAppSpec {
                omega: require(file.omega, "omega")?,
                alpha: require(file.alpha, "alpha")?,
                beta: require(file.beta, "beta")?,
                gamma: require(file.gamma, "gamma")?,
                delta: require(file.delta, "delta")?,
                theta: require(file.theta, "theta")?,
                lambda_bytes: require(file.lambda_bytes, "lambda_bytes")?,
            }
        }
    };
    spec.validate()?;
    Ok(spec)
}

/// Writes any serializable value as pretty JSON.
pub fn write_json<T: Serialize>(writer: &mut impl Write, value: &T) -> Result<()> {
    let json = serde_json::to_string_pretty(value)?;
    writer.write_all(json.as_bytes())?;
    writer.write_all(b"\n")?;
    Ok(())
}
