//! Polarization quantum eraser on the HOM interferometer.
//!
//! A half-wave plate in arm A labels that photon's polarization. Polarizers in
//! front of the detectors can then project both photons onto a common
//! polarization and remove the label. Without a polarizer the detector is
//! polarization blind and its two orthogonal outcomes add incoherently.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::hom::{ArmConfig, CoincidenceEngine, Detectors, HomScan};
use crate::optics::{jones_element, JonesKind};
use crate::spectral::PhotonPairState;
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct EraserConfig {
    /// Fast axis of the half-wave plate in arm A, rad.
    pub hwp_angle: f64,
    /// Polarizer before detector 1, rad.
    pub pol1: Option<f64>,
    /// Polarizer before detector 2, rad.
    pub pol2: Option<f64>,
    pub pair: PhotonPairState,
}

impl EraserConfig {
    pub fn validate(&self) -> Result<()> {
        let in_range = |x: f64| (-FRAC_PI_2..=FRAC_PI_2).contains(&x);
        if !in_range(self.hwp_angle) {
            return Err(Error::invalid("hwp_angle", "must lie in [−π/2, π/2]"));
        }
        for (name, p) in [("pol1", self.pol1), ("pol2", self.pol2)] {
            if let Some(p) = p {
                if !in_range(p) {
                    return Err(Error::invalid(name, "must lie in [−π/2, π/2]"));
                }
            }
        }
        Ok(())
    }

    fn engine(&self) -> Result<CoincidenceEngine<'_>> {
        let arm_a = ArmConfig::empty().with_polarization(jones_element(JonesKind::Hwp, self.hwp_angle));
        CoincidenceEngine::new(
            &self.pair,
            &arm_a,
            &ArmConfig::empty(),
            Detectors {
                pol1: self.pol1,
                pol2: self.pol2,
            },
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EraserProfile {
    #[serde(flatten)]
    pub scan: HomScan,
    /// `1 − rate(τ=0)`: positive for a dip, negative for a peak.
    pub visibility: f64,
}

/// Rate at zero delay relative to the distinguishable baseline, subtracted
/// from one.
fn center_visibility(engine: &CoincidenceEngine<'_>) -> Result<f64> {
    let c = engine.coincidence(0.0)?;
    if !(c.baseline > 0.0) {
        return Err(Error::invalid("polarizers", "configuration admits no coincidences"));
    }
    Ok(1.0 - c.rate())
}

pub fn eraser_scan(config: &EraserConfig, delays: &[f64]) -> Result<EraserProfile> {
    config.validate()?;
    let engine = config.engine()?;
    Ok(EraserProfile {
        scan: engine.scan(delays)?,
        visibility: center_visibility(&engine)?,
    })
}

/// Visibility for each `pol2` with the half-wave plate and first polarizer
/// fixed. Settings that block every coincidence are an error.
pub fn eraser_visibility_curve(
    pair: &PhotonPairState,
    hwp_angle: f64,
    pol1: f64,
    pol2_values: &[f64],
) -> Result<Vec<f64>> {
    pol2_values
        .iter()
        .map(|p2| {
            let config = EraserConfig {
                hwp_angle,
                pol1: Some(pol1),
                pol2: Some(*p2),
                pair: pair.clone(),
            };
            config.validate()?;
            center_visibility(&config.engine()?)
        })
        .collect()
}

/// Absolute coincidence probability at `tau`, for the sum rules in tests.
pub fn coincidence_probability(config: &EraserConfig, tau: f64) -> Result<f64> {
    config.validate()?;
    Ok(config.engine()?.coincidence(tau)?.probability)
}
