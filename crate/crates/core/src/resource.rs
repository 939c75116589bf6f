//! Shared-resource access rates and their normalization to scores.
//!
//! Raw rates are expressed in MR/s (millions of memory references per
//! second) for SLLC and DRAM, and MB/s for the virtual network. A *score*
//! is a raw rate divided by the corresponding calibration maximum, clamped
//! to [0, 1], so that 1.0 represents the highest rate achievable on the
//! calibration machine and 0.0 represents no access.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The three shared, non-sliceable resources tracked by the toolkit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ResourceKind {
    /// Shared last-level cache.
    Sllc,
    /// Main memory.
    Dram,
    /// Hypervisor-emulated network between co-located VMs.
    Net,
}

impl ResourceKind {
    pub const ALL: [ResourceKind; 3] = [ResourceKind::Sllc, ResourceKind::Dram, ResourceKind::Net];

    pub fn name(self) -> &'static str {
        match self {
            ResourceKind::Sllc => "sllc",
            ResourceKind::Dram => "dram",
            ResourceKind::Net => "net",
        }
    }
}

/// Whether a vector holds raw rates or normalized scores.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Units {
    Raw,
    Score,
}

/// Per-resource access rates, either raw (MR/s, MR/s, MB/s) or normalized
/// scores in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResourceVector {
    sllc: f64,
    dram: f64,
    net: f64,
    units: Units,
}

impl ResourceVector {
    /// Builds a raw-rate vector. Components must be finite and nonnegative.
    pub fn raw(sllc: f64, dram: f64, net: f64) -> Result<Self> {
        Self::validated(sllc, dram, net, Units::Raw)
    }

    /// Builds a score vector. Components must lie in [0, 1]; this bound is
    /// per application — accumulated sums over a co-location may exceed it
    /// and are therefore plain numbers, not `ResourceVector`s.
    pub fn score(sllc: f64, dram: f64, net: f64) -> Result<Self> {
        for (value, resource) in [(sllc, "sllc"), (dram, "dram"), (net, "net")] {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::Domain(format!(
                    "score component {resource} = {value} outside [0, 1]"
                )));
            }
        }
        Self::validated(sllc, dram, net, Units::Score)
    }

    fn validated(sllc: f64, dram: f64, net: f64, units: Units) -> Result<Self> {
        for (value, resource) in [(sllc, "sllc"), (dram, "dram"), (net, "net")] {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::Domain(format!(
                    "access rate {resource} = {value} must be finite and nonnegative"
                )));
            }
        }
        Ok(Self { sllc, dram, net, units })
    }

    pub fn zero(units: Units) -> Self {
        Self { sllc: 0.0, dram: 0.0, net: 0.0, units }
    }

    pub fn units(&self) -> Units {
        self.units
    }

    pub fn sllc(&self) -> f64 {
        self.sllc
    }

    pub fn dram(&self) -> f64 {
        self.dram
    }

    pub fn net(&self) -> f64 {
        self.net
    }

    pub fn get(&self, resource: ResourceKind) -> f64 {
        match resource {
            ResourceKind::Sllc => self.sllc,
            ResourceKind::Dram => self.dram,
            ResourceKind::Net => self.net,
        }
    }

    /// Component-wise sum. Fails if the operands carry different units.
    pub fn checked_add(&self, other: &ResourceVector) -> Result<ResourceVector> {
        if self.units != other.units {
            return Err(Error::UnitMismatch(
                "cannot add raw rates to scores".to_string(),
            ));
        }
        Ok(ResourceVector {
            sllc: self.sllc + other.sllc,
            dram: self.dram + other.dram,
            net: self.net + other.net,
            units: self.units,
        })
    }
}

/// Highest access rates achievable on the calibration machine; the
/// denominators of score normalization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationMaxima {
    max_sllc: f64,
    max_dram: f64,
    max_net: f64,
}

impl CalibrationMaxima {
    /// All maxima must be strictly positive, otherwise normalization would
    /// divide by zero.
    pub fn new(max_sllc: f64, max_dram: f64, max_net: f64) -> Result<Self> {
        for (value, resource) in [(max_sllc, "max_sllc"), (max_dram, "max_dram"), (max_net, "max_net")] {
            if !value.is_finite() || value <= 0.0 {
                return Err(Error::Calibration(format!(
                    "{resource} = {value} must be finite and strictly positive"
                )));
            }
        }
        Ok(Self { max_sllc, max_dram, max_net })
    }

    pub fn get(&self, resource: ResourceKind) -> f64 {
        match resource {
            ResourceKind::Sllc => self.max_sllc,
            ResourceKind::Dram => self.max_dram,
            ResourceKind::Net => self.max_net,
        }
    }
}

/// Decimal places kept when normalizing; `None` keeps full precision and is
/// the right choice when the scores feed a regression fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Rounding {
    One,
    Two,
    #[default]
    None,
}

impl Rounding {
    fn apply(self, value: f64) -> f64 {
        // Half-up for nonnegative inputs; scores are always >= 0 here.
        match self {
            Rounding::One => (value * 10.0).round() / 10.0,
            Rounding::Two => (value * 100.0).round() / 100.0,
            Rounding::None => value,
        }
    }
}

impl std::str::FromStr for Rounding {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "1" => Ok(Rounding::One),
            "2" => Ok(Rounding::Two),
            "none" => Ok(Rounding::None),
            other => Err(Error::Config(format!(
                "invalid decimals `{other}`, expected 1, 2 or none"
            ))),
        }
    }
}

/// Divides each raw component by its calibration maximum, clamps to [0, 1]
/// and rounds half-up to the requested number of decimals.
pub fn normalize(
    raw: &ResourceVector,
    maxima: &CalibrationMaxima,
    rounding: Rounding,
) -> Result<ResourceVector> {
    if raw.units() != Units::Raw {
        return Err(Error::UnitMismatch(
            "normalize expects raw rates, got scores".to_string(),
        ));
    }
    let component = |resource: ResourceKind| -> f64 {
        let score = (raw.get(resource) / maxima.get(resource)).clamp(0.0, 1.0);
        rounding.apply(score)
    };
    ResourceVector::score(
        component(ResourceKind::Sllc),
        component(ResourceKind::Dram),
        component(ResourceKind::Net),
    )
}
