//! Hong-Ou-Mandel coincidence engine.
//!
//! Photon A (at `ω0 + Ω`) and photon B (at `ω0 − Ω`) pass their arm elements
//! and meet at the 50/50 beam splitter. A coincidence between output ports `c`
//! (detector 1) and `d` (detector 2) happens either with both photons
//! transmitted (A→c, B→d, factor `t²`) or both reflected (A→d, B→c, factor
//! `r²`). For a given pair of detected frequencies these two histories are
//! summed coherently, then the probability is integrated over the grid.
//!
//! The scanned delay `τ` is applied to arm B, so a sample that delays arm A
//! moves the dip to positive `τ`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::materials::{material_dispersion, Material};
use crate::optics::{beamsplitter_amplitudes, linear_polarization, JonesMatrix, JonesVector, ScalarTransfer};
use crate::spectral::PhotonPairState;
use crate::{Complex64, Error, Result};

/// Elements in one interferometer arm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmConfig {
    pub elements: Vec<ScalarTransfer>,
    /// Fixed extra delay in seconds.
    pub extra_delay: f64,
    /// Achromatic polarization element; identity for a plain arm.
    #[serde(default = "JonesMatrix::identity")]
    pub polarization: JonesMatrix,
}

impl Default for ArmConfig {
    fn default() -> Self {
        Self::empty()
    }
}

impl ArmConfig {
    pub fn empty() -> Self {
        Self {
            elements: Vec::new(),
            extra_delay: 0.0,
            polarization: JonesMatrix::identity(),
        }
    }

    pub fn with_element(mut self, element: ScalarTransfer) -> Self {
        self.elements.push(element);
        self
    }

    pub fn with_polarization(mut self, m: JonesMatrix) -> Self {
        self.polarization = m;
        self
    }

    /// Unwrapped `arg H(ω)` of the whole arm.
    pub fn phase(&self, omega: f64) -> Result<f64> {
        let mut phase = omega * self.extra_delay;
        for e in &self.elements {
            phase += e.phase(omega)?;
        }
        Ok(phase)
    }

    /// `Π H_k(ω) · exp(iω·extra_delay)`.
    pub fn transfer(&self, omega: f64) -> Result<Complex64> {
        Ok(Complex64::from_polar(1.0, self.phase(omega)?))
    }
}

/// Optional linear polarizers in front of the two detectors (angles in rad).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Detectors {
    pub pol1: Option<f64>,
    pub pol2: Option<f64>,
}

/// Coincidence rate versus delay, normalized to the distinguishable baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomScan {
    pub delays: Vec<f64>,
    pub rates: Vec<f64>,
}

/// Absolute coincidence probability and its distinguishable-photon value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coincidence {
    pub probability: f64,
    pub baseline: f64,
}

impl Coincidence {
    pub fn rate(&self) -> f64 {
        self.probability / self.baseline
    }
}

/// Precomputed arm responses for one pair state and configuration.
pub struct CoincidenceEngine<'a> {
    pair: &'a PhotonPairState,
    /// Unwrapped `arg H_A(ω0 + Ω_j)` and `arg H_B(ω0 + Ω_j)` on the grid.
    arm_a: Vec<f64>,
    arm_b: Vec<f64>,
    /// Polarization factors `(⟨p|u⟩⟨q|v⟩, ⟨p|v⟩⟨q|u⟩)` per detector outcome.
    outcomes: Vec<(Complex64, Complex64)>,
}

fn detector_basis(angle: Option<f64>) -> Vec<JonesVector> {
    match angle {
        Some(theta) => vec![linear_polarization(theta)],
        None => vec![
            linear_polarization(0.0),
            linear_polarization(std::f64::consts::FRAC_PI_2),
        ],
    }
}

fn project(p: &JonesVector, x: &JonesVector) -> Complex64 {
    p[0].conj() * x[0] + p[1].conj() * x[1]
}

impl<'a> CoincidenceEngine<'a> {
    pub fn new(pair: &'a PhotonPairState, arm_a: &ArmConfig, arm_b: &ArmConfig, detectors: Detectors) -> Result<Self> {
        let grid = pair.grid();
        let w0 = grid.center_angular_frequency();
        let eval =
            |arm: &ArmConfig| -> Result<Vec<f64>> { grid.detunings().iter().map(|d| arm.phase(w0 + d)).collect() };
        let u = arm_a.polarization.apply(&linear_polarization(pair.pol_a));
        let v = arm_b.polarization.apply(&linear_polarization(pair.pol_b));
        let mut outcomes = Vec::new();
        for p in detector_basis(detectors.pol1) {
            for q in detector_basis(detectors.pol2) {
                outcomes.push((project(&p, &u) * project(&q, &v), project(&p, &v) * project(&q, &u)));
            }
        }
        Ok(Self {
            pair,
            arm_a: eval(arm_a)?,
            arm_b: eval(arm_b)?,
            outcomes,
        })
    }

    /// Coincidence probability with arm B delayed by `tau`.
    pub fn coincidence(&self, tau: f64) -> Result<Coincidence> {
        if self.pair.is_entangled() {
            self.entangled(tau)
        } else {
            self.separable(tau)
        }
    }

    fn entangled(&self, tau: f64) -> Result<Coincidence> {
        let (t, r) = beamsplitter_amplitudes();
        let (tt, rr) = (t * t, r * r);
        let grid = self.pair.grid();
        let det = grid.detunings();
        let f = self.pair.amplitude();
        let w0 = grid.center_angular_frequency();
        let n = grid.len();

        // X(Ω) = f(Ω) H_A(ω0+Ω) H_B(ω0−Ω) e^{i(ω0−Ω)τ}: photon A at c, photon B at d.
        let phase: Vec<f64> = (0..n)
            .map(|i| self.arm_a[i] + self.arm_b[grid.mirror(i)] + (w0 - det[i]) * tau)
            .collect();
        let x: Vec<Complex64> = (0..n).map(|i| f[i] * Complex64::from_polar(1.0, phase[i])).collect();
        check_resolution((0..n).map(|i| (x[i].norm() * x[grid.mirror(i)].norm(), phase[i] - phase[grid.mirror(i)])))?;

        let mut probability = 0.0;
        let mut baseline = 0.0;
        for (alpha, beta) in &self.outcomes {
            for i in 0..n {
                // Detector 1 sees ω0+Ω: either photon A from the TT history or
                // photon B (emitted with arm-A detuning −Ω) from the RR history.
                let direct = tt * alpha * x[i];
                let exchanged = rr * beta * x[grid.mirror(i)];
                let w = grid.weights()[i];
                probability += w * (direct + exchanged).norm_sqr();
                baseline += w * (direct.norm_sqr() + exchanged.norm_sqr());
            }
        }
        Ok(Coincidence { probability, baseline })
    }

    fn separable(&self, tau: f64) -> Result<Coincidence> {
        let (t, r) = beamsplitter_amplitudes();
        let (tt, rr) = (t * t, r * r);
        let grid = self.pair.grid();
        let det = grid.detunings();
        let f = self.pair.amplitude();
        let w0 = grid.center_angular_frequency();
        let n = grid.len();

        // Independent wavepackets g_A(ν) and g_B(ν) on the same grid.
        let phase_b: Vec<f64> = (0..n).map(|i| self.arm_b[i] + (w0 + det[i]) * tau).collect();
        let ga: Vec<Complex64> = (0..n)
            .map(|i| f[i] * Complex64::from_polar(1.0, self.arm_a[i]))
            .collect();
        let gb: Vec<Complex64> = (0..n).map(|i| f[i] * Complex64::from_polar(1.0, phase_b[i])).collect();
        check_resolution((0..n).map(|i| (ga[i].norm() * gb[i].norm(), phase_b[i] - self.arm_a[i])))?;
        let norm_a = grid.integrate(ga.iter().map(|g| g.norm_sqr()));
        let norm_b = grid.integrate(gb.iter().map(|g| g.norm_sqr()));
        let overlap: Complex64 = (0..n).map(|i| grid.weights()[i] * ga[i].conj() * gb[i]).sum();

        let mut probability = 0.0;
        let mut baseline = 0.0;
        for (alpha, beta) in &self.outcomes {
            let direct = (tt * alpha).norm_sqr() * norm_a * norm_b;
            let exchanged = (rr * beta).norm_sqr() * norm_a * norm_b;
            let cross = 2.0 * ((tt * alpha) * (rr * beta).conj()).re * overlap.norm_sqr();
            probability += direct + exchanged + cross;
            baseline += direct + exchanged;
        }
        Ok(Coincidence { probability, baseline })
    }

    /// Normalized rates for every delay, evaluated in parallel.
    pub fn scan(&self, delays: &[f64]) -> Result<HomScan> {
        let points: Vec<Coincidence> = delays
            .par_iter()
            .map(|tau| self.coincidence(*tau))
            .collect::<Result<_>>()?;
        let rates = points
            .iter()
            .map(|c| {
                if c.baseline > 0.0 {
                    Ok(c.rate())
                } else {
                    Err(Error::invalid("detectors", "configuration admits no coincidences"))
                }
            })
            .collect::<Result<_>>()?;
        Ok(HomScan {
            delays: delays.to_vec(),
            rates,
        })
    }
}

/// Rejects interference integrands, given as `(modulus, unwrapped phase)`,
/// whose phase advances by more than π/2 between adjacent grid samples where
/// they carry weight.
fn check_resolution<I: Iterator<Item = (f64, f64)>>(values: I) -> Result<()> {
    let values: Vec<(f64, f64)> = values.collect();
    let peak = values.iter().map(|v| v.0).fold(0.0, f64::max);
    let floor = 1e-6 * peak;
    let mut worst: f64 = 0.0;
    for pair in values.windows(2) {
        if pair[0].0 > floor && pair[1].0 > floor {
            worst = worst.max((pair[1].1 - pair[0].1).abs());
        }
    }
    if worst > std::f64::consts::FRAC_PI_2 {
        Err(Error::Undersampled { step: worst })
    } else {
        Ok(())
    }
}

/// HOM scan with plain detectors (no polarizers).
pub fn hom_coincidence_scan(
    pair: &PhotonPairState,
    arm_a: &ArmConfig,
    arm_b: &ArmConfig,
    delays: &[f64],
) -> Result<HomScan> {
    CoincidenceEngine::new(pair, arm_a, arm_b, Detectors::default())?.scan(delays)
}

/// `n` equally spaced delays covering `center ± half_width`.
pub fn delay_axis(center: f64, half_width: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2);
    (0..n)
        .map(|k| center - half_width + 2.0 * half_width * k as f64 / (n - 1) as f64)
        .collect()
}

/// Outcome of inserting a sample into arm A.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DelayMeasurement {
    /// Dip displacement, s; positive when the reference arm must be lengthened.
    pub delay_shift: f64,
    /// Fitted rms width with the sample over the width without it.
    pub width_ratio: f64,
    pub reference: crate::fit::DipFit,
    pub with_sample: crate::fit::DipFit,
}

/// Scans with and without `sample` in arm A and compares the fitted dips.
pub fn sample_delay_measurement(pair: &PhotonPairState, sample: &ScalarTransfer) -> Result<DelayMeasurement> {
    let width = crate::spectral::correlation_time(pair);
    let points = 241;
    let empty = ArmConfig::empty();
    let reference_scan = hom_coincidence_scan(pair, &empty, &empty, &delay_axis(0.0, 8.0 * width, points))?;
    let reference = crate::fit::fit_dip(&reference_scan)?;

    let estimate = sample.group_delay(pair.center_angular_frequency())?;
    let arm_a = ArmConfig::empty().with_element(sample.clone());
    let sample_scan = hom_coincidence_scan(pair, &arm_a, &empty, &delay_axis(estimate, 8.0 * width, points))?;
    let with_sample = crate::fit::fit_dip(&sample_scan)?;
    Ok(DelayMeasurement {
        delay_shift: with_sample.center - reference.center,
        width_ratio: with_sample.rms_width / reference.rms_width,
        reference,
        with_sample,
    })
}

/// Rms duration (s) of a transform-limited Gaussian pulse after `length` of
/// `material`: `σ_out = σ_in √(1 + (β₂L / 2σ_in²)²)`.
pub fn classical_pulse_width(
    material: &Material,
    length: f64,
    input_rms_width: f64,
    center_wavelength: f64,
) -> Result<f64> {
    if !(input_rms_width > 0.0) {
        return Err(Error::invalid("input_rms_width", "must be positive"));
    }
    if !(length >= 0.0) {
        return Err(Error::invalid("length", "must be ≥ 0"));
    }
    let beta2 = material_dispersion(material, center_wavelength)?.gvd;
    let chirp = beta2 * length / (2.0 * input_rms_width * input_rms_width);
    Ok(input_rms_width * (1.0 + chirp * chirp).sqrt())
}
