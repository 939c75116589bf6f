//! Application profiles: per-VM access rates and their aggregation.

use crate::error::{Error, Result};
use crate::resource::{normalize, CalibrationMaxima, ResourceVector, Rounding, Units};

/// An application's measured access profile: one rate vector per VM, all in
/// the same units, plus the runtime of an isolated (dedicated-machine) run
/// when known.
#[derive(Debug, Clone, PartialEq)]
pub struct ApplicationProfile {
    label: String,
    vm_accesses: Vec<ResourceVector>,
    isolated_runtime: Option<f64>,
}

impl ApplicationProfile {
    pub fn new(
        label: impl Into<String>,
        vm_accesses: Vec<ResourceVector>,
        isolated_runtime: Option<f64>,
    ) -> Result<Self> {
        let label = label.into();
        if vm_accesses.is_empty() {
            return Err(Error::MalformedProfile {
                label,
                reason: "profile has no VM access vectors".to_string(),
            });
        }
        let units = vm_accesses[0].units();
        if vm_accesses.iter().any(|v| v.units() != units) {
            return Err(Error::MalformedProfile {
                label,
                reason: "VM access vectors mix raw rates and scores".to_string(),
            });
        }
        if let Some(runtime) = isolated_runtime {
            if !runtime.is_finite() || runtime <= 0.0 {
                return Err(Error::MalformedProfile {
                    label,
                    reason: format!("isolated runtime {runtime} must be positive"),
                });
            }
        }
        Ok(Self { label, vm_accesses, isolated_runtime })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn vm_count(&self) -> usize {
        self.vm_accesses.len()
    }

    pub fn vm_accesses(&self) -> &[ResourceVector] {
        &self.vm_accesses
    }

    pub fn units(&self) -> Units {
        self.vm_accesses[0].units()
    }

    pub fn isolated_runtime(&self) -> Option<f64> {
        self.isolated_runtime
    }

    /// Normalizes the aggregated access of this profile against `maxima`,
    /// producing the application's score vector. Profiles already expressed
    /// as scores pass through unchanged (aggregated), so score-unit inputs
    /// do not need a calibration.
    pub fn to_scored(
        &self,
        maxima: Option<&CalibrationMaxima>,
        rounding: Rounding,
    ) -> Result<ScoredProfile> {
        let total = application_access(self)?;
        let scores = match total.units() {
            Units::Score => total,
            Units::Raw => {
                let maxima = maxima.ok_or_else(|| {
                    Error::Calibration(format!(
                        "profile `{}` carries raw rates but no calibration was supplied",
                        self.label
                    ))
                })?;
                normalize(&total, maxima, rounding)?
            }
        };
        Ok(ScoredProfile {
            label: self.label.clone(),
            scores,
            isolated_runtime: self.isolated_runtime,
        })
    }
}

/// Aggregated access of an application: the component-wise sum of its VMs'
/// access vectors, units preserved.
pub fn application_access(profile: &ApplicationProfile) -> Result<ResourceVector> {
    let mut total = ResourceVector::zero(profile.units());
    for vm in profile.vm_accesses() {
        total = total.checked_add(vm)?;
    }
    Ok(total)
}

/// An application reduced to its normalized whole-application score vector;
/// the unit of account for co-location math.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredProfile {
    label: String,
    scores: ResourceVector,
    isolated_runtime: Option<f64>,
}

impl ScoredProfile {
    pub fn new(
        label: impl Into<String>,
        scores: ResourceVector,
        isolated_runtime: Option<f64>,
    ) -> Result<Self> {
        if scores.units() != Units::Score {
            return Err(Error::UnitMismatch(
                "scored profile requires score units".to_string(),
            ));
        }
        Ok(Self { label: label.into(), scores, isolated_runtime })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn scores(&self) -> &ResourceVector {
        &self.scores
    }

    pub fn isolated_runtime(&self) -> Option<f64> {
        self.isolated_runtime
    }

    pub fn with_isolated_runtime(mut self, runtime: f64) -> Self {
        self.isolated_runtime = Some(runtime);
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vm(sllc: f64, dram: f64, net: f64) -> ResourceVector {
        ResourceVector::raw(sllc, dram, net).unwrap()
    }

    #[test]
    fn access_sums_vms_component_wise() {
        // Six identical VMs; totals hand-summed: 6*272.5 = 1635,
        // 6*0.67 = 4.02, 6*50 = 300.
        let profile = ApplicationProfile::new(
            "high-cache",
            vec![vm(272.5, 0.67, 50.0); 6],
            None,
        )
        .unwrap();
        let total = application_access(&profile).unwrap();
        assert!((total.sllc() - 1635.0).abs() < 1e-9);
        assert!((total.dram() - 4.02).abs() < 1e-9);
        assert!((total.net() - 300.0).abs() < 1e-9);
        // Rounded to whole rates the totals match the highest-SLLC preset row.
        assert_eq!(total.sllc().round(), 1635.0);
        assert_eq!(total.dram().round(), 4.0);
        assert_eq!(total.net().round(), 300.0);
    }

    #[test]
    fn access_of_single_zero_vm_is_zero() {
        let profile = ApplicationProfile::new("idle", vec![vm(0.0, 0.0, 0.0)], None).unwrap();
        let total = application_access(&profile).unwrap();
        assert_eq!((total.sllc(), total.dram(), total.net()), (0.0, 0.0, 0.0));
    }

    #[test]
    fn access_adds_two_vms() {
        let profile =
            ApplicationProfile::new("two", vec![vm(1.0, 2.0, 3.0), vm(4.0, 5.0, 6.0)], None)
                .unwrap();
        let total = application_access(&profile).unwrap();
        assert_eq!((total.sllc(), total.dram(), total.net()), (5.0, 7.0, 9.0));
    }

    #[test]
    fn empty_profile_is_malformed() {
        let err = ApplicationProfile::new("empty", vec![], None).unwrap_err();
        assert_eq!(err.class(), "malformed-profile");
    }

    #[test]
    fn access_is_linear_in_vm_partition() {
        // access(P ∪ Q) = access(P) + access(Q), component-wise.
        let p = vec![vm(1.5, 0.25, 10.0), vm(2.5, 0.5, 20.0)];
        let q = vec![vm(0.5, 1.0, 5.0)];
        let mut union = p.clone();
        union.extend(q.clone());

        let total_union =
            application_access(&ApplicationProfile::new("u", union, None).unwrap()).unwrap();
        let total_p = application_access(&ApplicationProfile::new("p", p, None).unwrap()).unwrap();
        let total_q = application_access(&ApplicationProfile::new("q", q, None).unwrap()).unwrap();
        let sum = total_p.checked_add(&total_q).unwrap();
        assert_eq!(total_union, sum);
    }

    #[test]
    fn scoring_requires_calibration_for_raw_profiles() {
        let profile = ApplicationProfile::new("raw", vec![vm(1.0, 1.0, 1.0)], None).unwrap();
        let err = profile.to_scored(None, Rounding::None).unwrap_err();
        assert_eq!(err.class(), "calibration");
    }

    #[test]
    fn score_profiles_pass_through_without_calibration() {
        let scores = ResourceVector::score(0.18, 0.21, 0.32).unwrap();
        let profile = ApplicationProfile::new("scored", vec![scores], Some(60.0)).unwrap();
        let scored = profile.to_scored(None, Rounding::None).unwrap();
        assert_eq!(scored.scores(), &scores);
        assert_eq!(scored.isolated_runtime(), Some(60.0));
    }

    #[test]
    fn nonpositive_isolated_runtime_is_rejected() {
        let err = ApplicationProfile::new("t", vec![vm(1.0, 1.0, 1.0)], Some(0.0)).unwrap_err();
        assert_eq!(err.class(), "malformed-profile");
    }
}
