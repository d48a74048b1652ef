//! Energy-anticorrelated photon pairs on a discrete detuning grid.
//!
//! A pair is stored as an amplitude `f(Ω)` over detunings from the degenerate
//! frequency `ω0 = ω_pump / 2`: the arm-A photon sits at `ω0 + Ω` and its
//! twin in arm B at `ω0 − Ω`, so the two energies always add up to the pump
//! energy. The separable control model keeps the same marginal but treats the
//! two photons as independent wavepackets.

use serde::{Deserialize, Serialize};

use crate::{wavelength_to_angular, Complex64, Error, Result, SPEED_OF_LIGHT};

const FWHM_PER_RMS: f64 = 2.354_820_045_030_949_3; // sqrt(8 ln 2)

/// Which interferometer arm a photon travels in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Arm {
    A,
    B,
}

impl Arm {
    pub fn conjugate(self) -> Arm {
        match self {
            Arm::A => Arm::B,
            Arm::B => Arm::A,
        }
    }
}

/// Spectral width of a source or filter, in wavelength.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bandwidth {
    /// Full width at half maximum of the power spectrum, m.
    Fwhm(f64),
    /// Standard deviation of the power spectrum, m.
    Rms(f64),
}

impl Bandwidth {
    pub fn rms(self) -> f64 {
        match self {
            Bandwidth::Fwhm(w) => w / FWHM_PER_RMS,
            Bandwidth::Rms(w) => w,
        }
    }

    /// Rms width in angular frequency around `center_wavelength`.
    pub fn rms_angular(self, center_wavelength: f64) -> f64 {
        2.0 * std::f64::consts::PI * SPEED_OF_LIGHT * self.rms() / (center_wavelength * center_wavelength)
    }
}

/// Uniform, symmetric detuning grid with trapezoid weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    center: f64,
    detunings: Vec<f64>,
    weights: Vec<f64>,
}

impl FrequencyGrid {
    /// `points` samples over `[-half_span, half_span]` around `center` (rad/s).
    /// The count must be odd so that zero detuning is a sample.
    pub fn uniform(center: f64, half_span: f64, points: usize) -> Result<Self> {
        if points < 3 || points.is_multiple_of(2) {
            return Err(Error::invalid("grid_points", format!("{points} must be odd and ≥ 3")));
        }
        if !(half_span > 0.0 && half_span.is_finite()) {
            return Err(Error::invalid("half_span", format!("{half_span} must be positive")));
        }
        if !(center > half_span) {
            return Err(Error::invalid("center", "grid would reach non-positive frequencies"));
        }
        let half = (points / 2) as i64;
        let step = half_span / half as f64;
        // Built from integer offsets so that detuning[i] == -detuning[n-1-i] bit for bit.
        let detunings: Vec<f64> = (-half..=half).map(|k| k as f64 * step).collect();
        let mut weights = vec![step; points];
        weights[0] = 0.5 * step;
        weights[points - 1] = 0.5 * step;
        Ok(Self {
            center,
            detunings,
            weights,
        })
    }

    pub fn center_angular_frequency(&self) -> f64 {
        self.center
    }

    pub fn detunings(&self) -> &[f64] {
        &self.detunings
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.detunings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.detunings.is_empty()
    }

    pub fn step(&self) -> f64 {
        self.detunings[1] - self.detunings[0]
    }

    pub fn half_span(&self) -> f64 {
        self.detunings[self.len() - 1]
    }

    /// Index of the sample at `-Ω_i`.
    #[inline]
    pub fn mirror(&self, i: usize) -> usize {
        self.len() - 1 - i
    }

    /// Trapezoid quadrature of sampled values.
    pub fn integrate<I: IntoIterator<Item = f64>>(&self, values: I) -> f64 {
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }
}

/// Marginal power spectrum of one photon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub grid: FrequencyGrid,
    pub density: Vec<f64>,
}

impl Spectrum {
    fn normalized(grid: FrequencyGrid, mut density: Vec<f64>) -> Self {
        let total = grid.integrate(density.iter().copied());
        density.iter_mut().for_each(|d| *d /= total);
        Self { grid, density }
    }

    pub fn mean_detuning(&self) -> f64 {
        self.grid
            .integrate(self.grid.detunings().iter().zip(&self.density).map(|(w, d)| w * d))
    }

    /// Rms width in angular frequency, rad/s.
    pub fn rms_width(&self) -> f64 {
        let mean = self.mean_detuning();
        self.grid
            .integrate(
                self.grid
                    .detunings()
                    .iter()
                    .zip(&self.density)
                    .map(|(w, d)| (w - mean).powi(2) * d),
            )
            .sqrt()
    }

    /// `c / (2π σ_ν)`, which is `c / σ_Ω`.
    pub fn coherence_length(&self) -> f64 {
        SPEED_OF_LIGHT / self.rms_width()
    }

    /// Wavelength (m) of every grid sample.
    pub fn wavelengths(&self) -> Vec<f64> {
        let w0 = self.grid.center_angular_frequency();
        self.grid
            .detunings()
            .iter()
            .map(|d| crate::angular_to_wavelength(w0 + d))
            .collect()
    }
}

/// Discretized two-photon state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhotonPairState {
    grid: FrequencyGrid,
    amplitude: Vec<Complex64>,
    pump_angular_frequency: f64,
    /// Rms detuning of the analytic marginal, rad/s.
    spectral_rms: f64,
    /// Linear polarization angles (rad) of the photons in arms A and B.
    pub pol_a: f64,
    pub pol_b: f64,
    entangled: bool,
}

/// Builds the Gaussian pair state produced by degenerate down-conversion.
///
/// The bandwidth is the FWHM of the single-photon power spectrum in
/// wavelength. `span_factor` sets the grid half-span in units of the rms
/// angular bandwidth.
pub fn make_pair_state(
    pump_wavelength: f64,
    daughter_center_wavelength: f64,
    daughter_bandwidth_fwhm: f64,
    grid_points: usize,
    span_factor: f64,
    entangled: bool,
) -> Result<PhotonPairState> {
    PairSource {
        pump_wavelength,
        daughter_center_wavelength,
        bandwidth: Bandwidth::Fwhm(daughter_bandwidth_fwhm),
        grid_points,
        span_factor,
        entangled,
    }
    .build()
}

/// Source description; [`make_pair_state`] is the FWHM shorthand.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairSource {
    pub pump_wavelength: f64,
    pub daughter_center_wavelength: f64,
    pub bandwidth: Bandwidth,
    pub grid_points: usize,
    pub span_factor: f64,
    pub entangled: bool,
}

impl PairSource {
    pub fn build(&self) -> Result<PhotonPairState> {
        let pump = self.pump_wavelength;
        let daughter = self.daughter_center_wavelength;
        if !(pump > 0.0 && daughter > 0.0) {
            return Err(Error::invalid("wavelength", "wavelengths must be positive"));
        }
        if ((2.0 * pump - daughter) / daughter).abs() > 0.01 {
            return Err(Error::DegenerateMismatch {
                pump_nm: pump * 1e9,
                daughter_nm: daughter * 1e9,
            });
        }
        let bw = self.bandwidth.rms();
        if !(bw > 0.0 && bw.is_finite()) {
            return Err(Error::invalid("bandwidth", format!("{bw} m must be positive")));
        }
        if self.grid_points < 64 || self.grid_points.is_multiple_of(2) {
            return Err(Error::invalid(
                "grid_points",
                format!("{} must be odd and ≥ 64", self.grid_points),
            ));
        }
        if !(self.span_factor >= 3.0) {
            return Err(Error::invalid(
                "span_factor",
                format!("{} must be ≥ 3 (grid must cover ≥ 6 rms widths)", self.span_factor),
            ));
        }
        let pump_omega = wavelength_to_angular(pump);
        let center = 0.5 * pump_omega;
        let sigma = self.bandwidth.rms_angular(crate::angular_to_wavelength(center));
        let grid = FrequencyGrid::uniform(center, self.span_factor * sigma, self.grid_points)?;
        Ok(PhotonPairState::gaussian(grid, pump_omega, sigma, self.entangled))
    }
}

impl PhotonPairState {
    fn gaussian(grid: FrequencyGrid, pump_angular_frequency: f64, sigma: f64, entangled: bool) -> Self {
        let mut amplitude: Vec<Complex64> = grid
            .detunings()
            .iter()
            .map(|w| Complex64::new(gaussian_amplitude(*w, sigma), 0.0))
            .collect();
        let norm = grid.integrate(amplitude.iter().map(|a| a.norm_sqr())).sqrt();
        amplitude.iter_mut().for_each(|a| *a /= norm);
        Self {
            grid,
            amplitude,
            pump_angular_frequency,
            spectral_rms: sigma,
            pol_a: 0.0,
            pol_b: 0.0,
            entangled,
        }
    }

    /// Same source sampled on another grid centred on the same `ω0`.
    pub fn resampled(&self, half_span: f64, points: usize) -> Result<Self> {
        let grid = FrequencyGrid::uniform(self.center_angular_frequency(), half_span, points)?;
        let mut state = Self::gaussian(grid, self.pump_angular_frequency, self.spectral_rms, self.entangled);
        state.pol_a = self.pol_a;
        state.pol_b = self.pol_b;
        Ok(state)
    }

    pub fn with_polarizations(mut self, pol_a: f64, pol_b: f64) -> Self {
        self.pol_a = pol_a;
        self.pol_b = pol_b;
        self
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn amplitude(&self) -> &[Complex64] {
        &self.amplitude
    }

    pub fn pump_angular_frequency(&self) -> f64 {
        self.pump_angular_frequency
    }

    pub fn center_angular_frequency(&self) -> f64 {
        self.grid.center_angular_frequency()
    }

    pub fn center_wavelength(&self) -> f64 {
        crate::angular_to_wavelength(self.center_angular_frequency())
    }

    pub fn is_entangled(&self) -> bool {
        self.entangled
    }

    /// Rms angular bandwidth of the source model the grid was sampled from.
    pub fn nominal_rms_bandwidth(&self) -> f64 {
        self.spectral_rms
    }

    /// `Σ |f|² w`, which is 1 for any constructed state.
    pub fn norm_sqr(&self) -> f64 {
        self.grid.integrate(self.amplitude.iter().map(|a| a.norm_sqr()))
    }

    /// Angular frequencies of the arm-A and arm-B photons at sample `i`.
    #[inline]
    pub fn photon_frequencies(&self, i: usize) -> (f64, f64) {
        let w0 = self.center_angular_frequency();
        let d = self.grid.detunings()[i];
        (w0 + d, w0 - d)
    }

    /// Marginal spectrum of the photon in `arm`, on that photon's own detuning axis.
    pub fn marginal(&self, arm: Arm) -> Spectrum {
        let n = self.grid.len();
        let density = (0..n)
            .map(|i| match arm {
                Arm::A => self.amplitude[i].norm_sqr(),
                Arm::B => self.amplitude[self.grid.mirror(i)].norm_sqr(),
            })
            .collect();
        Spectrum::normalized(self.grid.clone(), density)
    }
}

#[inline]
fn gaussian_amplitude(detuning: f64, sigma: f64) -> f64 {
    (-detuning * detuning / (4.0 * sigma * sigma)).exp()
}

/// Gaussian bandpass (in angular frequency) placed in front of one detector.
#[derive(Debug, Clone, Copy, PartialEq)]
struct GaussianFilter {
    center: f64,
    sigma: f64,
}

impl GaussianFilter {
    fn power(&self, omega: f64) -> f64 {
        if self.sigma.is_infinite() {
            return 1.0;
        }
        let x = (omega - self.center) / self.sigma;
        (-0.5 * x * x).exp()
    }
}

/// Spectrum of the photon conjugate to `filtered_arm` after its twin passed a
/// Gaussian filter of the given centre wavelength and FWHM, together with the
/// conjugate coherence length `c / σ_Ω`.
///
/// An infinite FWHM is the identity filter. The grid is refined when the
/// filter is narrower than eight grid steps.
pub fn conditional_collapse(
    state: &PhotonPairState,
    filter_center: f64,
    filter_fwhm: f64,
    filtered_arm: Arm,
) -> Result<(Spectrum, f64)> {
    if !(filter_center > 0.0) {
        return Err(Error::invalid("filter_center", "must be positive"));
    }
    if !(filter_fwhm > 0.0) {
        return Err(Error::invalid("filter_fwhm", "must be positive"));
    }
    let filter = GaussianFilter {
        center: wavelength_to_angular(filter_center),
        sigma: Bandwidth::Fwhm(filter_fwhm).rms_angular(filter_center),
    };

    let work = if filter.sigma < 8.0 * state.grid.step() {
        let step = filter.sigma / 8.0;
        let half_points = (state.grid.half_span() / step).ceil() as usize;
        if half_points > 2_000_000 {
            return Err(Error::invalid("filter_fwhm", "filter too narrow to resolve"));
        }
        std::borrow::Cow::Owned(state.resampled(state.grid.half_span(), 2 * half_points + 1)?)
    } else {
        std::borrow::Cow::Borrowed(state)
    };
    let grid = work.grid();
    let n = grid.len();
    let w0 = grid.center_angular_frequency();
    let det = grid.detunings();

    // Passband weight seen by the filtered photon when the arm-A detuning is Ω.
    let filtered_sign = match filtered_arm {
        Arm::A => 1.0,
        Arm::B => -1.0,
    };
    let overlap =
        grid.integrate((0..n).map(|i| work.amplitude[i].norm_sqr() * filter.power(w0 + filtered_sign * det[i])));
    if !(overlap > 1e-6) {
        return Err(Error::EmptyPassband { overlap });
    }

    let conjugate = filtered_arm.conjugate();
    let density: Vec<f64> = if work.is_entangled() {
        // Conjugate photon at ω0 + s·Ω_c where Ω_c is its own detuning; the
        // filtered photon then sits at ω0 − s·Ω_c.
        (0..n)
            .map(|i| {
                let own = det[i];
                let arm_a_index = match conjugate {
                    Arm::A => i,
                    Arm::B => grid.mirror(i),
                };
                let filtered_omega = w0 - own;
                work.amplitude[arm_a_index].norm_sqr() * filter.power(filtered_omega)
            })
            .collect()
    } else {
        work.marginal(conjugate).density
    };
    let spectrum = Spectrum::normalized(grid.clone(), density);
    let length = spectrum.coherence_length();
    Ok((spectrum, length))
}

/// Rms width (s) of the two-photon correlation function: the Fourier
/// transform of `|f(Ω)|²` over the frequency-difference coordinate for the
/// entangled state, or the squared single-photon overlap for the separable
/// model. This is the rms width of the HOM dip for identical lossless arms.
pub fn correlation_time(state: &PhotonPairState) -> f64 {
    let grid = state.grid();
    let density: Vec<f64> = state.amplitude.iter().map(|a| a.norm_sqr()).collect();
    let sigma = state.nominal_rms_bandwidth();
    let tau_max = 10.0 / sigma;
    let steps = 2000usize;
    let dt = tau_max / steps as f64;
    let profile = |tau: f64| -> f64 {
        if state.is_entangled() {
            grid.integrate(
                grid.detunings()
                    .iter()
                    .zip(&density)
                    .map(|(w, d)| d * (2.0 * w * tau).cos()),
            )
        } else {
            let (re, im) = grid
                .detunings()
                .iter()
                .zip(grid.weights())
                .zip(&density)
                .fold((0.0, 0.0), |(re, im), ((w, q), d)| {
                    (re + q * d * (w * tau).cos(), im + q * d * (w * tau).sin())
                });
            re * re + im * im
        }
    };
    // Profile is even in τ; integrate over [0, τ_max] with the trapezoid rule.
    let (mut m0, mut m2) = (0.0, 0.0);
    for k in 0..=steps {
        let tau = k as f64 * dt;
        let g = profile(tau);
        let w = if k == 0 || k == steps { 0.5 } else { 1.0 };
        m0 += w * g;
        m2 += w * g * tau * tau;
    }
    (m2 / m0).sqrt()
}
