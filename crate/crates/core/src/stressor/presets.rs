//! The calibrated stressor presets S1–S18.
//!
//! Each preset pins the seven template parameters of one synthetic
//! application, together with the access rates and scores it achieved on
//! the calibration machine (dual Xeon X5675, 12 MB SLLC per socket, KVM).
//! The absolute rates are hardware-specific reference data — a different
//! machine will measure different rates for the same parameters — while
//! the scores define the preset's intended access level per resource
//! (1.0 high, 0.5 medium, 0.1 low).
//!
//! The communication iteration count for S13–S18 (β = 150000) is two
//! orders of magnitude above the β used elsewhere; the values are kept
//! verbatim from the calibration table.

use super::SyntheticAppSpec;
use crate::error::{Error, Result};
use crate::resource::ResourceVector;

struct PresetRow {
    label: &'static str,
    /// Calibration-machine rates: SLLC MR/s, DRAM MR/s, NET MB/s.
    rates: [f64; 3],
    /// Scores at one decimal: SLLC, DRAM, NET.
    scores: [f64; 3],
    /// omega, alpha, beta, gamma, delta, theta, lambda_bytes.
    params: [u64; 7],
}

#[rustfmt::skip]
const PRESETS: [PresetRow; 18] = [
    PresetRow { label: "S1",  rates: [1635.0,   4.0,  300.0], scores: [1.0, 0.0, 0.1], params: [25, 120000,   5200,  7000,  512,  0,  22600] },
    PresetRow { label: "S2",  rates: [ 851.0,  61.0,  324.0], scores: [0.5, 0.1, 0.1], params: [25,  90000,   5200,  9000, 1024,  6,  22600] },
    PresetRow { label: "S3",  rates: [ 239.0,  41.0,  312.0], scores: [0.1, 0.1, 0.1], params: [25,  40000,   5200, 11500, 2048, 22,  22600] },
    PresetRow { label: "S4",  rates: [ 444.0, 444.0,  318.0], scores: [0.3, 1.0, 0.1], params: [25,   7500,   5200, 30000,  512,  0,  22600] },
    PresetRow { label: "S5",  rates: [ 224.0, 224.0,  324.0], scores: [0.1, 0.5, 0.1], params: [25,   2700,   5200, 39000,  512, 21,  22600] },
    PresetRow { label: "S6",  rates: [ 797.0, 240.0,  318.0], scores: [0.5, 0.5, 0.1], params: [25,  20000,   5200, 11800,  256,  2,  22600] },
    PresetRow { label: "S7",  rates: [1597.0,  18.0, 2892.0], scores: [1.0, 0.0, 1.0], params: [25, 120000,   1500,  7000,  512,  0, 749568] },
    PresetRow { label: "S8",  rates: [ 890.0,  43.0, 2810.0], scores: [0.5, 0.1, 1.0], params: [25,  90000,   1500,  9000, 1024,  6, 749568] },
    PresetRow { label: "S9",  rates: [ 220.0,  49.0, 2910.0], scores: [0.1, 0.1, 1.0], params: [25,  40000,   1500, 11500, 2048, 22, 749568] },
    PresetRow { label: "S10", rates: [ 438.0, 438.0, 2832.0], scores: [0.3, 1.0, 1.0], params: [25,   7500,   1500, 30000,  512,  0, 749568] },
    PresetRow { label: "S11", rates: [ 214.0, 214.0, 2892.0], scores: [0.1, 0.5, 1.0], params: [25,   2700,   1500, 39000,  512, 21, 749568] },
    PresetRow { label: "S12", rates: [ 817.0, 241.0, 2838.0], scores: [0.5, 0.5, 1.0], params: [25,  20000,   1500, 11800,  256,  2, 749568] },
    PresetRow { label: "S13", rates: [1575.0,  22.0, 1392.0], scores: [1.0, 0.0, 0.5], params: [25, 120000, 150000,  7000,  512,  0, 150000] },
    PresetRow { label: "S14", rates: [ 890.0,  52.0, 1362.0], scores: [0.5, 0.1, 0.5], params: [25,  90000, 150000,  9000, 1024,  6, 150000] },
    PresetRow { label: "S15", rates: [ 228.0,  49.0, 1335.0], scores: [0.1, 0.1, 0.5], params: [25,  40000, 150000, 11500, 2048, 22, 150000] },
    PresetRow { label: "S16", rates: [ 438.0, 438.0, 1375.0], scores: [0.3, 1.0, 0.5], params: [25,   7500, 150000, 30000,  512,  0, 150000] },
    PresetRow { label: "S17", rates: [ 221.0, 221.0, 1404.0], scores: [0.1, 0.5, 0.5], params: [25,   2700, 150000, 39000,  512, 21, 150000] },
    PresetRow { label: "S18", rates: [ 824.0, 239.0, 1380.0], scores: [0.5, 0.5, 0.5], params: [25,  20000, 150000, 11800,  256,  2, 150000] },
];

fn find(label: &str) -> Result<&'static PresetRow> {
    PRESETS
        .iter()
        .find(|row| row.label == label)
        .ok_or_else(|| Error::UnknownPreset(label.to_string()))
}

/// The stressor parameters of one preset.
pub fn preset(label: &str) -> Result<SyntheticAppSpec> {
    let row = find(label)?;
    let [omega, alpha, beta, gamma, delta, theta, lambda_bytes] = row.params;
    Ok(SyntheticAppSpec { omega, alpha, beta, gamma, delta, theta, lambda_bytes })
}

pub fn preset_labels() -> Vec<&'static str> {
    PRESETS.iter().map(|row| row.label).collect()
}

/// The access scores the preset reached on the calibration machine.
pub fn reference_scores(label: &str) -> Result<ResourceVector> {
    let row = find(label)?;
    ResourceVector::score(row.scores[0], row.scores[1], row.scores[2])
}

/// The absolute rates (MR/s, MR/s, MB/s) the preset reached on the
/// calibration machine.
pub fn reference_rates(label: &str) -> Result<ResourceVector> {
    let row = find(label)?;
    ResourceVector::raw(row.rates[0], row.rates[1], row.rates[2])
}

/// The calibration maxima of the machine the presets were measured on: the
/// highest SLLC, DRAM and NET rates any preset achieved. Normalizing the
/// reference rates against these at one decimal reproduces the reference
/// scores exactly.
pub fn reference_calibration() -> crate::resource::CalibrationMaxima {
    crate::resource::CalibrationMaxima::new(1635.0, 444.0, 2910.0).expect("static maxima")
}
