//! Co-locations: sets of applications sharing one physical host, and the
//! derived quantities the prediction model feeds on — accumulated access,
//! pairwise similarity, slowdown and interference level.

use crate::error::{Error, Result};
use crate::profile::ScoredProfile;
use crate::resource::{ResourceKind, ResourceVector, Units};

/// Two or more scored applications on the same host.
///
/// Members are sorted internally by label (score bits break ties), so every
/// derived quantity — accumulated access, similarity, model features — is
/// bit-identical under permutation of the input.
#[derive(Debug, Clone, PartialEq)]
pub struct CoLocation {
    members: Vec<ScoredProfile>,
}

impl CoLocation {
    pub fn new(mut members: Vec<ScoredProfile>) -> Result<Self> {
        if members.len() < 2 {
            return Err(Error::Domain(format!(
                "a co-location requires at least 2 applications, got {}",
                members.len()
            )));
        }
        members.sort_by(|a, b| {
            let key = |p: &ScoredProfile| {
                (
                    p.label().to_string(),
                    p.scores().sllc().to_bits(),
                    p.scores().dram().to_bits(),
                    p.scores().net().to_bits(),
                )
            };
            key(a).cmp(&key(b))
        });
        Ok(Self { members })
    }

    pub fn members(&self) -> &[ScoredProfile] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction guarantees >= 2 members
    }

    pub fn labels(&self) -> Vec<String> {
        self.members.iter().map(|m| m.label().to_string()).collect()
    }

    /// Total pressure on one resource: the sum of member scores. May exceed
    /// 1.0 — each application contributes up to a full calibration unit.
    pub fn accumulated_access(&self, resource: ResourceKind) -> f64 {
        self.members.iter().map(|m| m.scores().get(resource)).sum()
    }

    /// Mean pairwise similarity factor over all unordered distinct member
    /// pairs, computed per resource.
    pub fn global_similarity(&self, resource: ResourceKind) -> f64 {
        let mut sum = 0.0;
        let mut pairs = 0u64;
        for i in 0..self.members.len() {
            for j in (i + 1)..self.members.len() {
                // Members are scored by construction, so this cannot fail.
                sum += similarity_factor(
                    self.members[i].scores(),
                    self.members[j].scores(),
                    resource,
                )
                .expect("scored members");
                pairs += 1;
            }
        }
        sum / pairs as f64
    }
}

/// Accumulated access over standalone score vectors; errs on mixed units.
pub fn accumulated_access(scores: &[ResourceVector], resource: ResourceKind) -> Result<f64> {
    if let Some(bad) = scores.iter().find(|v| v.units() != Units::Score) {
        return Err(Error::UnitMismatch(format!(
            "accumulated access needs score units, found raw rates {:?}",
            (bad.sllc(), bad.dram(), bad.net())
        )));
    }
    Ok(scores.iter().map(|v| v.get(resource)).sum())
}

/// Similarity of two applications' access burden on one resource:
/// 1 − |a − b| over their scores. 1.0 means identical burden, 0.0 means the
/// maximal possible gap.
pub fn similarity_factor(
    a: &ResourceVector,
    b: &ResourceVector,
    resource: ResourceKind,
) -> Result<f64> {
    if a.units() != Units::Score || b.units() != Units::Score {
        return Err(Error::UnitMismatch(
            "similarity factor is defined over scores, not raw rates".to_string(),
        ));
    }
    Ok(1.0 - (a.get(resource) - b.get(resource)).abs())
}

/// One application's isolated and concurrent runtimes.
#[derive(Debug, Clone, PartialEq)]
pub struct SlowdownObservation {
    label: String,
    isolated_runtime: f64,
    concurrent_runtime: f64,
}

impl SlowdownObservation {
    pub fn new(
        label: impl Into<String>,
        isolated_runtime: f64,
        concurrent_runtime: f64,
    ) -> Result<Self> {
        for (value, what) in [
            (isolated_runtime, "isolated runtime"),
            (concurrent_runtime, "concurrent runtime"),
        ] {
            if !value.is_finite() || value <= 0.0 {
                return Err(Error::Domain(format!(
                    "{what} {value} must be finite and strictly positive"
                )));
            }
        }
        Ok(Self {
            label: label.into(),
            isolated_runtime,
            concurrent_runtime,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn isolated_runtime(&self) -> f64 {
        self.isolated_runtime
    }

    pub fn concurrent_runtime(&self) -> f64 {
        self.concurrent_runtime
    }

    /// Fractional runtime increase under co-location: C/T − 1. Negative
    /// values (concurrent run faster than isolated) are kept as-is so that
    /// measurement noise stays visible in datasets.
    pub fn slowdown(&self) -> f64 {
        self.concurrent_runtime / self.isolated_runtime - 1.0
    }
}

/// Mean slowdown across all co-located applications.
pub fn interference_level(observations: &[SlowdownObservation]) -> Result<f64> {
    if observations.is_empty() {
        return Err(Error::Domain(
            "interference level of an empty observation set".to_string(),
        ));
    }
    Ok(observations.iter().map(|o| o.slowdown()).sum::<f64>() / observations.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scored(label: &str, sllc: f64, dram: f64, net: f64) -> ScoredProfile {
        ScoredProfile::new(label, ResourceVector::score(sllc, dram, net).unwrap(), None).unwrap()
    }

    #[test]
    fn accumulated_access_of_high_and_low_cache_pair() {
        // SLLC scores 1.0 + 0.1 accumulate to 1.1.
        let coloc = CoLocation::new(vec![
            scored("S1", 1.0, 0.0, 0.1),
            scored("S3", 0.1, 0.1, 0.1),
        ])
        .unwrap();
        assert!((coloc.accumulated_access(ResourceKind::Sllc) - 1.1).abs() < 1e-12);
    }

    #[test]
    fn accumulated_access_may_exceed_one() {
        // NET scores 0.5 + 1.0 accumulate to 1.5.
        let coloc = CoLocation::new(vec![
            scored("S15", 0.1, 0.1, 0.5),
            scored("S7", 1.0, 0.0, 1.0),
        ])
        .unwrap();
        assert!((coloc.accumulated_access(ResourceKind::Net) - 1.5).abs() < 1e-12);
    }

    #[test]
    fn accumulated_access_of_idle_pair_is_zero() {
        let coloc =
            CoLocation::new(vec![scored("a", 0.0, 0.0, 0.0), scored("b", 0.0, 0.0, 0.0)]).unwrap();
        for resource in ResourceKind::ALL {
            assert_eq!(coloc.accumulated_access(resource), 0.0);
        }
    }

    #[test]
    fn accumulated_access_rejects_raw_rates() {
        let raw = ResourceVector::raw(10.0, 10.0, 10.0).unwrap();
        let err = accumulated_access(&[raw], ResourceKind::Sllc).unwrap_err();
        assert_eq!(err.class(), "unit-mismatch");
    }

    #[test]
    fn similarity_of_dissimilar_cache_burdens() {
        // Scores 0.1 vs 1.0 differ by 0.9, so the similarity factor is 0.1.
        let a = ResourceVector::score(0.1, 0.1, 0.5).unwrap();
        let b = ResourceVector::score(1.0, 0.0, 1.0).unwrap();
        let f = similarity_factor(&a, &b, ResourceKind::Sllc).unwrap();
        assert!((f - 0.1).abs() < 1e-12);
    }

    #[test]
    fn similarity_of_identical_profiles_is_one() {
        let a = ResourceVector::score(0.37, 0.2, 0.9).unwrap();
        for resource in ResourceKind::ALL {
            assert_eq!(similarity_factor(&a, &a, resource).unwrap(), 1.0);
        }
    }

    #[test]
    fn similarity_of_extreme_gap_is_zero() {
        let a = ResourceVector::score(0.0, 0.0, 0.0).unwrap();
        let b = ResourceVector::score(1.0, 0.0, 0.0).unwrap();
        assert_eq!(similarity_factor(&a, &b, ResourceKind::Sllc).unwrap(), 0.0);
    }

    #[test]
    fn similarity_rejects_raw_rates() {
        let raw = ResourceVector::raw(100.0, 1.0, 1.0).unwrap();
        let score = ResourceVector::score(0.1, 0.1, 0.1).unwrap();
        let err = similarity_factor(&raw, &score, ResourceKind::Sllc).unwrap_err();
        assert_eq!(err.class(), "unit-mismatch");
    }

    #[test]
    fn global_similarity_of_two_members_equals_their_pairwise_factor() {
        let a = scored("a", 0.3, 0.4, 0.5);
        let b = scored("b", 0.8, 0.4, 0.1);
        let coloc = CoLocation::new(vec![a.clone(), b.clone()]).unwrap();
        for resource in ResourceKind::ALL {
            let expected = similarity_factor(a.scores(), b.scores(), resource).unwrap();
            assert_eq!(coloc.global_similarity(resource), expected);
        }
    }

    #[test]
    fn global_similarity_of_identical_triple_is_exactly_one() {
        let coloc = CoLocation::new(vec![scored("x", 0.2, 0.7, 0.4); 3]).unwrap();
        for resource in ResourceKind::ALL {
            assert_eq!(coloc.global_similarity(resource), 1.0);
        }
    }

    #[test]
    fn global_similarity_averages_all_pairs() {
        // Scores 0.1, 0.5, 0.9: pair factors 0.6, 0.2, 0.6, mean 0.4667.
        let coloc = CoLocation::new(vec![
            scored("a", 0.1, 0.0, 0.0),
            scored("b", 0.5, 0.0, 0.0),
            scored("c", 0.9, 0.0, 0.0),
        ])
        .unwrap();
        let g = coloc.global_similarity(ResourceKind::Sllc);
        assert!((g - (0.6 + 0.2 + 0.6) / 3.0).abs() < 1e-12);
        assert!((g - 0.4667).abs() < 1e-4);
    }

    #[test]
    fn colocation_requires_two_members() {
        assert_eq!(
            CoLocation::new(vec![scored("solo", 0.1, 0.1, 0.1)]).unwrap_err().class(),
            "domain"
        );
        assert_eq!(CoLocation::new(vec![]).unwrap_err().class(), "domain");
    }

    #[test]
    fn accumulated_access_is_permutation_invariant() {
        let members = vec![
            scored("a", 0.13, 0.27, 0.91),
            scored("b", 0.71, 0.03, 0.05),
            scored("c", 0.37, 0.55, 0.49),
        ];
        let mut reversed = members.clone();
        reversed.reverse();
        let c1 = CoLocation::new(members).unwrap();
        let c2 = CoLocation::new(reversed).unwrap();
        for resource in ResourceKind::ALL {
            // Bit-exact: members are sorted at construction.
            assert_eq!(c1.accumulated_access(resource), c2.accumulated_access(resource));
            assert_eq!(c1.global_similarity(resource), c2.global_similarity(resource));
        }
    }

    #[test]
    fn slowdown_of_worked_example() {
        // 60 s isolated stretching to 100 s concurrent is a 2/3 slowdown;
        // 80 s stretching to 100 s is 1/4.
        let a = SlowdownObservation::new("a", 60.0, 100.0).unwrap();
        let b = SlowdownObservation::new("b", 80.0, 100.0).unwrap();
        assert!((a.slowdown() - 2.0 / 3.0).abs() < 1e-12);
        assert!((b.slowdown() - 0.25).abs() < 1e-12);
        let level = interference_level(&[a, b]).unwrap();
        assert!((level - 11.0 / 24.0).abs() < 1e-12); // 0.458333…, displayed as 46%
    }

    #[test]
    fn slowdown_of_identical_runtimes_is_zero() {
        let obs = SlowdownObservation::new("same", 50.0, 50.0).unwrap();
        assert_eq!(obs.slowdown(), 0.0);
    }

    #[test]
    fn negative_slowdown_is_not_clamped() {
        let obs = SlowdownObservation::new("faster", 100.0, 90.0).unwrap();
        assert!(obs.slowdown() < 0.0);
    }

    #[test]
    fn nonpositive_runtime_is_a_domain_error() {
        assert_eq!(SlowdownObservation::new("x", 0.0, 1.0).unwrap_err().class(), "domain");
        assert_eq!(SlowdownObservation::new("x", 1.0, -1.0).unwrap_err().class(), "domain");
    }

    #[test]
    fn interference_of_single_observation_is_its_slowdown() {
        let obs = SlowdownObservation::new("only", 60.0, 100.0).unwrap();
        let expected = obs.slowdown();
        assert_eq!(interference_level(&[obs]).unwrap(), expected);
    }

    #[test]
    fn interference_of_unslowed_pair_is_zero() {
        let observations = vec![
            SlowdownObservation::new("a", 10.0, 10.0).unwrap(),
            SlowdownObservation::new("b", 20.0, 20.0).unwrap(),
        ];
        assert_eq!(interference_level(&observations).unwrap(), 0.0);
    }

    #[test]
    fn interference_of_empty_set_is_a_domain_error() {
        assert_eq!(interference_level(&[]).unwrap_err().class(), "domain");
    }
}
