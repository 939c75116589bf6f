//! Least-squares fitting of the three-term interference model and the
//! diagnostic battery used to judge a fit.
//!
//! The regression has no intercept, so the goodness-of-fit convention is the
//! through-origin one: R² = 1 − SSE/Σy² with the *uncentered* total sum of
//! squares. A centered R² would be misleading for a model forced through
//! the origin; every consumer of these numbers should know this convention.

pub mod pvalues;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{FeatureRow, InterferenceModel, Provenance};
use crate::serde_util::maybe_nonfinite;

/// Singular-value ratio beyond which the design matrix is treated as
/// rank-deficient instead of silently producing unstable coefficients.
pub const CONDITION_LIMIT: f64 = 1e10;

/// Residual diagnostics are unreliable below this sample size.
pub const MIN_RESIDUALS_FOR_CHECKS: usize = 8;

pub const FEATURE_NAMES: [&str; 3] = ["t1", "t2", "t3"];

/// Free-form provenance attached to a dataset file.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetMetadata {
    pub calibration_id: Option<String>,
    pub generated: Option<String>,
}

/// Result of one co-execution: an observed interference level, or the error
/// that prevented measuring it. Failed rows are kept in the dataset but
/// excluded from fitting.
#[derive(Debug, Clone, PartialEq)]
pub enum RowOutcome {
    Observed(f64),
    Failed(String),
}

/// One dataset row: the six intermediate quantities the features derive
/// from, the derived features, and the observed outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetRow {
    /// Accumulated access scores (T_sllc, T_dram, T_net).
    pub accumulated: [f64; 3],
    /// Global similarity factors (G_sllc, G_dram, G_net).
    pub similarity: [f64; 3],
    pub features: FeatureRow,
    pub outcome: RowOutcome,
}

/// Rows of (features, observed interference) for fitting.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct InterferenceDataset {
    pub rows: Vec<DatasetRow>,
    pub metadata: DatasetMetadata,
}

impl InterferenceDataset {
    pub fn new(metadata: DatasetMetadata) -> Self {
        Self { rows: Vec::new(), metadata }
    }

    /// Rows with a successfully observed interference level.
    pub fn clean_rows(&self) -> impl Iterator<Item = (&DatasetRow, f64)> {
        self.rows.iter().filter_map(|row| match row.outcome {
            RowOutcome::Observed(value) => Some((row, value)),
            RowOutcome::Failed(_) => None,
        })
    }

    pub fn failed_rows(&self) -> impl Iterator<Item = (&DatasetRow, &str)> {
        self.rows.iter().filter_map(|row| match &row.outcome {
            RowOutcome::Observed(_) => None,
            RowOutcome::Failed(reason) => Some((row, reason.as_str())),
        })
    }

    pub fn observed_interference(&self) -> Vec<f64> {
        self.clean_rows().map(|(_, value)| value).collect()
    }
}

/// Standard error, t statistic and p-value for one fitted coefficient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientStats {
    pub name: String,
    pub estimate: f64,
    pub std_error: f64,
    #[serde(with = "maybe_nonfinite")]
    pub t_statistic: f64,
    pub p_value: f64,
}

/// Everything measured about a fit: goodness of fit, significance inputs and
/// the residual material needed by [`residual_checks`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    pub n: usize,
    pub k: usize,
    /// Uncentered (through-origin) R².
    pub r2: f64,
    /// 1 − (1 − R²)(n − 1)/(n − k − 1); NaN when n = k + 1 leaves no
    /// degrees of freedom for the adjustment.
    #[serde(with = "maybe_nonfinite")]
    pub r2_adj: f64,
    #[serde(with = "maybe_nonfinite")]
    pub f_statistic: f64,
    pub f_pvalue: f64,
    pub coefficients: Vec<CoefficientStats>,
    pub residuals: Vec<f64>,
    pub fitted: Vec<f64>,
    /// The design matrix rows, kept so residual checks can re-run the
    /// heteroscedasticity auxiliary regression.
    pub regressors: Vec<[f64; 3]>,
}

/// Fits the no-intercept three-term model to the dataset's clean rows by
/// ordinary least squares.
pub fn fit(dataset: &InterferenceDataset) -> Result<InterferenceModel> {
    let mut features = Vec::new();
    let mut observed = Vec::new();
    for (row, value) in dataset.clean_rows() {
        features.push([row.features.t1, row.features.t2, row.features.t3]);
        observed.push(value);
    }
    fit_xy(&features, &observed)
}

/// Lower-level fitting entry point over bare feature rows.
///
/// The least-squares problem is solved through a singular value
/// decomposition; a singular-value ratio above [`CONDITION_LIMIT`] aborts
/// with a collinearity error naming the dependent columns.
pub fn fit_xy(features: &[[f64; 3]], observed: &[f64]) -> Result<InterferenceModel> {
    let n = features.len();
    let k = 3usize;
    if n != observed.len() {
        return Err(Error::Domain(format!(
            "feature rows ({n}) and observations ({}) differ in length",
            observed.len()
        )));
    }
    if n < k + 1 {
        return Err(Error::InsufficientData(format!(
            "fitting 3 coefficients needs at least 4 rows, got {n}"
        )));
    }
    if let Some(bad) = observed.iter().find(|v| !v.is_finite()) {
        return Err(Error::Domain(format!(
            "observed interference {bad} is not finite"
        )));
    }

    let x = DMatrix::from_fn(n, k, |i, j| features[i][j]);
    let y = DVector::from_column_slice(observed);

    let svd = x.clone().svd(true, true);
    let sigma_max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let sigma_min = svd.singular_values.iter().cloned().fold(f64::INFINITY, f64::min);
    if sigma_max == 0.0 || sigma_min <= 0.0 || sigma_max / sigma_min > CONDITION_LIMIT {
        return Err(Error::Collinearity {
            columns: dependent_columns(&svd, sigma_max),
        });
    }

    let eps = sigma_max * f64::EPSILON * n as f64;
    let solution = svd
        .solve(&y, eps)
        .map_err(|e| Error::Domain(format!("least-squares solve failed: {e}")))?;
    let coefficients = [solution[0], solution[1], solution[2]];

    let fitted_vec = &x * &solution;
    let residuals_vec = &y - &fitted_vec;
    let sse: f64 = residuals_vec.iter().map(|e| e * e).sum();
    let sst: f64 = y.iter().map(|v| v * v).sum();
    let ssr: f64 = fitted_vec.iter().map(|v| v * v).sum();

    // Residual sums at the level of floating-point noise are a perfect fit;
    // the SVD solve of an exactly consistent system leaves ~1e-30 behind.
    let perfect = sse <= sst * f64::EPSILON * f64::EPSILON * n as f64;
    let r2 = if sst > 0.0 {
        if perfect { 1.0 } else { 1.0 - sse / sst }
    } else {
        1.0
    };
    let r2_adj = r2_adjusted(r2, n, k).unwrap_or(f64::NAN);

    // F = (SSR/k)/(SSE/(n−k)) for the no-intercept model; a perfect fit has
    // zero residual variance and is reported as p = 0.
    let (f_statistic, f_pvalue) = if perfect {
        (f64::INFINITY, 0.0)
    } else {
        let f = (ssr / k as f64) / (sse / (n - k) as f64);
        (f, pvalues::f_upper(f, k, n - k))
    };

    // Coefficient standard errors from sigma² · diag((XᵀX)⁻¹), with the
    // inverse assembled from the SVD factors.
    let sigma2 = if perfect { 0.0 } else { sse / (n - k) as f64 };
    let v_t = svd.v_t.as_ref().expect("v_t requested");
    let mut stats = Vec::with_capacity(k);
    for j in 0..k {
        let xtx_inv_jj: f64 = (0..k)
            .map(|i| {
                let v = v_t[(i, j)];
                (v / svd.singular_values[i]).powi(2)
            })
            .sum();
        let std_error = (sigma2 * xtx_inv_jj).sqrt();
        let estimate = coefficients[j];
        let (t_statistic, p_value) = if std_error == 0.0 {
            if estimate == 0.0 {
                (0.0, 1.0)
            } else {
                (estimate.signum() * f64::INFINITY, 0.0)
            }
        } else {
            let t = estimate / std_error;
            (t, pvalues::t_two_sided(t, n - k))
        };
        stats.push(CoefficientStats {
            name: FEATURE_NAMES[j].to_string(),
            estimate,
            std_error,
            t_statistic,
            p_value,
        });
    }

    let diagnostics = FitDiagnostics {
        n,
        k,
        r2,
        r2_adj,
        f_statistic,
        f_pvalue,
        coefficients: stats,
        residuals: residuals_vec.iter().cloned().collect(),
        fitted: fitted_vec.iter().cloned().collect(),
        regressors: features.to_vec(),
    };

    InterferenceModel::new(
        coefficients[0],
        coefficients[1],
        coefficients[2],
        Provenance::Fitted,
        Some(diagnostics),
    )
}

/// Names the feature columns involved in near-null singular directions.
fn dependent_columns(
    svd: &nalgebra::SVD<f64, nalgebra::Dyn, nalgebra::Dyn>,
    sigma_max: f64,
) -> Vec<String> {
    let threshold = if sigma_max > 0.0 { sigma_max / CONDITION_LIMIT } else { f64::INFINITY };
    let mut involved = [false; 3];
    if let Some(v_t) = svd.v_t.as_ref() {
        for i in 0..svd.singular_values.len() {
            if svd.singular_values[i] <= threshold {
                for (j, flag) in involved.iter_mut().enumerate() {
                    if v_t[(i, j)].abs() > 1e-6 {
                        *flag = true;
                    }
                }
            }
        }
    }
    let named: Vec<String> = FEATURE_NAMES
        .iter()
        .zip(involved)
        .filter(|(_, hit)| *hit)
        .map(|(name, _)| name.to_string())
        .collect();
    if named.is_empty() {
        FEATURE_NAMES.iter().map(|s| s.to_string()).collect()
    } else {
        named
    }
}

/// Adjusted R²: 1 − (1 − R²)(n − 1)/(n − k − 1).
///
/// A perfect fit is 1.0 for any degrees of freedom; otherwise n must exceed
/// k + 1 so the adjustment denominator is positive.
pub fn r2_adjusted(r2: f64, n: usize, k: usize) -> Result<f64> {
    if k < 1 {
        return Err(Error::Domain("k must be at least 1".to_string()));
    }
    if r2 == 1.0 {
        return Ok(1.0);
    }
    if n <= k + 1 {
        return Err(Error::Domain(format!(
            "adjusted R² needs n > k + 1, got n = {n}, k = {k}"
        )));
    }
    Ok(1.0 - (1.0 - r2) * (n as f64 - 1.0) / (n as f64 - k as f64 - 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientSignificance {
    pub name: String,
    #[serde(with = "maybe_nonfinite")]
    pub t_statistic: f64,
    pub p_value: f64,
    pub significant: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignificanceReport {
    pub alpha: f64,
    #[serde(with = "maybe_nonfinite")]
    pub f_statistic: f64,
    pub f_pvalue: f64,
    pub regression_significant: bool,
    pub coefficients: Vec<CoefficientSignificance>,
}

/// Marks the regression and each coefficient significant iff its p-value is
/// below `alpha`.
pub fn significance(diag: &FitDiagnostics, alpha: f64) -> SignificanceReport {
    SignificanceReport {
        alpha,
        f_statistic: diag.f_statistic,
        f_pvalue: diag.f_pvalue,
        regression_significant: diag.f_pvalue < alpha,
        coefficients: diag
            .coefficients
            .iter()
            .map(|c| CoefficientSignificance {
                name: c.name.clone(),
                t_statistic: c.t_statistic,
                p_value: c.p_value,
                significant: c.p_value < alpha,
            })
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    #[serde(with = "maybe_nonfinite")]
    pub statistic: f64,
    pub p_value: f64,
    pub passed: bool,
}

/// Pass/fail report of the three residual assumptions at α = 0.05.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub alpha: f64,
    /// Pearson correlation of residuals against fitted values. This is a
    /// proxy for the linearity assumption, not a named test.
    pub linearity: CheckResult,
    /// Breusch–Pagan (studentized/Koenker) against the feature columns.
    pub heteroscedasticity: CheckResult,
    /// Jarque–Bera on the residuals.
    pub normality: CheckResult,
}

impl ResidualReport {
    pub fn all_passed(&self) -> bool {
        self.linearity.passed && self.heteroscedasticity.passed && self.normality.passed
    }
}

const RESIDUAL_ALPHA: f64 = 0.05;

/// Runs the three residual checks on a fit's diagnostics.
pub fn residual_checks(diag: &FitDiagnostics) -> Result<ResidualReport> {
    let n = diag.residuals.len();
    if n < MIN_RESIDUALS_FOR_CHECKS {
        return Err(Error::InsufficientData(format!(
            "residual checks need at least {MIN_RESIDUALS_FOR_CHECKS} residuals, got {n}"
        )));
    }

    // A numerically perfect fit leaves nothing to test: every assumption
    // holds vacuously.
    let scale = diag.fitted.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    if diag.residuals.iter().all(|e| e.abs() <= 1e-12 * scale) {
        let pass = CheckResult { statistic: 0.0, p_value: 1.0, passed: true };
        return Ok(ResidualReport {
            alpha: RESIDUAL_ALPHA,
            linearity: pass,
            heteroscedasticity: pass,
            normality: pass,
        });
    }

    let linearity = match pearson(&diag.residuals, &diag.fitted) {
        Ok(r) => {
            let p = if (r.abs() - 1.0).abs() < f64::EPSILON {
                0.0
            } else {
                let t = r * ((n - 2) as f64 / (1.0 - r * r)).sqrt();
                pvalues::t_two_sided(t, n - 2)
            };
            CheckResult { statistic: r, p_value: p, passed: p > RESIDUAL_ALPHA }
        }
        // Zero variance in the fitted values: no relationship is detectable.
        Err(_) => CheckResult { statistic: 0.0, p_value: 1.0, passed: true },
    };

    let columns: Vec<Vec<f64>> = (0..3)
        .map(|j| diag.regressors.iter().map(|row| row[j]).collect())
        .collect();
    let bp = breusch_pagan(&diag.residuals, &columns)?;
    let jb = jarque_bera(&diag.residuals)?;

    Ok(ResidualReport {
        alpha: RESIDUAL_ALPHA,
        linearity,
        heteroscedasticity: CheckResult {
            statistic: bp.statistic,
            p_value: bp.p_value,
            passed: bp.p_value > RESIDUAL_ALPHA,
        },
        normality: CheckResult {
            statistic: jb.statistic,
            p_value: jb.p_value,
            passed: jb.p_value > RESIDUAL_ALPHA,
        },
    })
}

/// A test statistic and its p-value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestOutcome {
    pub statistic: f64,
    pub p_value: f64,
}

/// Jarque–Bera normality statistic: n/6 · (S² + K²/4) with biased sample
/// skewness S and excess kurtosis K, referred to chi-squared with 2 degrees
/// of freedom (whose upper tail is exactly exp(−x/2)).
pub fn jarque_bera(values: &[f64]) -> Result<TestOutcome> {
    let n = values.len();
    if n < 3 {
        return Err(Error::InsufficientData(format!(
            "Jarque–Bera needs at least 3 values, got {n}"
        )));
    }
    let nf = n as f64;
    let mean = values.iter().sum::<f64>() / nf;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for v in values {
        let d = v - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= nf;
    m3 /= nf;
    m4 /= nf;
    if m2 <= 0.0 {
        return Err(Error::Domain(
            "Jarque–Bera is undefined for zero-variance data".to_string(),
        ));
    }
    let skewness = m3 / m2.powf(1.5);
    let excess_kurtosis = m4 / (m2 * m2) - 3.0;
    let statistic = nf / 6.0 * (skewness * skewness + excess_kurtosis * excess_kurtosis / 4.0);
    Ok(TestOutcome { statistic, p_value: (-statistic / 2.0).exp() })
}

/// Breusch–Pagan heteroscedasticity test, studentized (Koenker) variant:
/// regress squared residuals on the regressors plus an intercept and refer
/// LM = n·R² of that auxiliary regression to chi-squared with k degrees of
/// freedom.
pub fn breusch_pagan(residuals: &[f64], regressors: &[Vec<f64>]) -> Result<TestOutcome> {
    let n = residuals.len();
    let k = regressors.len();
    if k == 0 {
        return Err(Error::Domain("Breusch–Pagan needs at least one regressor".to_string()));
    }
    if regressors.iter().any(|col| col.len() != n) {
        return Err(Error::Domain(
            "regressor columns must match the residual count".to_string(),
        ));
    }
    if n < k + 2 {
        return Err(Error::InsufficientData(format!(
            "Breusch–Pagan needs at least {} observations, got {n}",
            k + 2
        )));
    }

    let u: Vec<f64> = residuals.iter().map(|e| e * e).collect();
    let u_mean = u.iter().sum::<f64>() / n as f64;
    let sst: f64 = u.iter().map(|v| (v - u_mean).powi(2)).sum();
    if sst <= 0.0 {
        // Constant squared residuals cannot show heteroscedasticity.
        return Ok(TestOutcome { statistic: 0.0, p_value: 1.0 });
    }

    let z = DMatrix::from_fn(n, k + 1, |i, j| if j == 0 { 1.0 } else { regressors[j - 1][i] });
    let rhs = DVector::from_column_slice(&u);
    let svd = z.clone().svd(true, true);
    let sigma_max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let beta = svd
        .solve(&rhs, sigma_max * f64::EPSILON * n as f64)
        .map_err(|e| Error::Domain(format!("auxiliary regression failed: {e}")))?;
    let fitted = z * beta;
    let ss_model: f64 = fitted.iter().map(|v| (v - u_mean).powi(2)).sum();
    let r2_aux = (ss_model / sst).clamp(0.0, 1.0);
    let statistic = n as f64 * r2_aux;
    Ok(TestOutcome { statistic, p_value: pvalues::chi_squared_upper(statistic, k) })
}

/// Sample Pearson correlation coefficient.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::Domain(format!(
            "correlation inputs differ in length: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::InsufficientData(
            "correlation needs at least 2 points".to_string(),
        ));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let dx = a - mx;
        let dy = b - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return Err(Error::UndefinedCorrelation(
            "one of the inputs has zero variance".to_string(),
        ));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Sample standard deviation (n − 1 denominator) divided by the mean.
/// A single value has zero deviation by convention.
pub fn coefficient_of_variation(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Domain(
            "coefficient of variation of an empty set".to_string(),
        ));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if mean == 0.0 {
        return Err(Error::Domain(
            "coefficient of variation is undefined for zero mean".to_string(),
        ));
    }
    if values.len() == 1 {
        return Ok(0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(var.sqrt() / mean)
}
