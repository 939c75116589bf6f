//! The three-term interference prediction model.
//!
//! Interference of a co-location is predicted as
//!
//! ```text
//! I = c1·t1 + c2·t2 + c3·t3
//! t1 = T_sllc · G_sllc
//! t2 = T_net  · G_net
//! t3 = T_dram · T_sllc · G_sllc
//! ```
//!
//! where `T_s` is the accumulated access score and `G_s` the global
//! similarity factor for resource `s`. There is no intercept and no
//! quadratic term. DRAM pressure is weighed by the SLLC term because every
//! DRAM request is first handled by the last-level cache.

use serde::{Deserialize, Serialize};

use crate::colocation::CoLocation;
use crate::error::{Error, Result};
use crate::regression::FitDiagnostics;
use crate::resource::ResourceKind;

/// Default model coefficients for (t1, t2, t3), calibrated on a synthetic
/// two-by-two co-execution campaign.
pub const DEFAULT_COEFFICIENTS: [f64; 3] = [0.7498, 0.1598, 0.1456];

/// Highest interference level observed in the campaign the default
/// coefficients were fitted on. Predictions outside [0, this] extrapolate
/// beyond the training envelope and are flagged by the CLI.
pub const DEFAULT_TRAINED_RANGE_MAX: f64 = 1.89;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    /// The built-in default coefficients.
    Default,
    /// Refitted from an interference dataset.
    Fitted,
}

/// Coefficients of the three-term regression plus fit diagnostics when the
/// model was produced by [`crate::regression::fit`].
#[derive(Debug, Clone, PartialEq)]
pub struct InterferenceModel {
    c1: f64,
    c2: f64,
    c3: f64,
    provenance: Provenance,
    diagnostics: Option<FitDiagnostics>,
}

impl InterferenceModel {
    pub fn new(
        c1: f64,
        c2: f64,
        c3: f64,
        provenance: Provenance,
        diagnostics: Option<FitDiagnostics>,
    ) -> Result<Self> {
        if ![c1, c2, c3].iter().all(|c| c.is_finite()) {
            return Err(Error::Domain(format!(
                "model coefficients ({c1}, {c2}, {c3}) must all be finite"
            )));
        }
        Ok(Self { c1, c2, c3, provenance, diagnostics })
    }

    /// The bundled default model.
    pub fn default_model() -> Self {
        let [c1, c2, c3] = DEFAULT_COEFFICIENTS;
        Self { c1, c2, c3, provenance: Provenance::Default, diagnostics: None }
    }

    pub fn coefficients(&self) -> [f64; 3] {
        [self.c1, self.c2, self.c3]
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn diagnostics(&self) -> Option<&FitDiagnostics> {
        self.diagnostics.as_ref()
    }

    /// Predicted interference level for a feature row: c1·t1 + c2·t2 + c3·t3.
    /// The result is not clamped; values outside the trained range are the
    /// caller's to flag.
    pub fn predict(&self, row: &FeatureRow) -> f64 {
        self.c1 * row.t1 + self.c2 * row.t2 + self.c3 * row.t3
    }
}

impl Default for InterferenceModel {
    fn default() -> Self {
        Self::default_model()
    }
}

/// The model's regressors for one co-location, with the member labels they
/// were derived from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRow {
    pub t1: f64,
    pub t2: f64,
    pub t3: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub labels: Vec<String>,
}

impl FeatureRow {
    pub fn new(t1: f64, t2: f64, t3: f64) -> Self {
        Self { t1, t2, t3, labels: Vec::new() }
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Self {
        self.labels = labels;
        self
    }
}

/// Derives the model's regressors from a co-location's accumulated access
/// and global similarity factors.
pub fn features(coloc: &CoLocation) -> FeatureRow {
    let t_sllc = coloc.accumulated_access(ResourceKind::Sllc);
    let t_dram = coloc.accumulated_access(ResourceKind::Dram);
    let t_net = coloc.accumulated_access(ResourceKind::Net);
    let g_sllc = coloc.global_similarity(ResourceKind::Sllc);
    let g_net = coloc.global_similarity(ResourceKind::Net);
    FeatureRow {
        t1: t_sllc * g_sllc,
        t2: t_net * g_net,
        t3: t_dram * t_sllc * g_sllc,
        labels: coloc.labels(),
    }
}

/// Absolute gap between a predicted and an observed interference level.
pub fn prediction_error(predicted: f64, observed: f64) -> f64 {
    (predicted - observed).abs()
}
