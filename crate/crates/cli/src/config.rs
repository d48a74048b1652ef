//! Run configuration as read from JSON.
//!
//! Interface units are nm, fs, mm and degrees; everything is converted to SI
//! before it reaches the engines.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use twophoton::barrier::{self, Layer, LayerStack, Polarization};
use twophoton::materials::MaterialCatalog;
use twophoton::optics::ScalarTransfer;
use twophoton::spectral::{Arm, Bandwidth, PairSource, PhotonPairState};
use twophoton::Complex64;

use crate::CliError;

pub const NM: f64 = 1e-9;
pub const FS: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Hom,
    Franson,
    Eraser,
    Barrier,
    Collapse,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Hom => "hom",
            Experiment::Franson => "franson",
            Experiment::Eraser => "eraser",
            Experiment::Barrier => "barrier",
            Experiment::Collapse => "collapse",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: Experiment,
    #[serde(default)]
    pub source: Option<SourceConfig>,
    #[serde(default)]
    pub hom: Option<HomConfig>,
    #[serde(default)]
    pub franson: Option<FransonBlock>,
    #[serde(default)]
    pub eraser: Option<EraserBlock>,
    #[serde(default)]
    pub barrier: Option<BarrierBlock>,
    #[serde(default)]
    pub collapse: Option<CollapseBlock>,
    pub output: OutputConfig,
    #[serde(default)]
    pub noise: Option<NoiseConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BandwidthKind {
    #[default]
    Fwhm,
    Rms,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceConfig {
    pub pump_nm: f64,
    pub center_nm: f64,
    pub bandwidth_nm: f64,
    #[serde(default)]
    pub bandwidth_kind: BandwidthKind,
    #[serde(default = "default_grid_points")]
    pub grid_points: usize,
    #[serde(default = "default_span_factor")]
    pub span_factor: f64,
    #[serde(default = "default_true")]
    pub entangled: bool,
}

fn default_grid_points() -> usize {
    257
}

fn default_span_factor() -> f64 {
    6.0
}

fn default_true() -> bool {
    true
}

impl SourceConfig {
    pub fn build(&self) -> Result<PhotonPairState, CliError> {
        let bw = self.bandwidth_nm * NM;
        PairSource {
            pump_wavelength: self.pump_nm * NM,
            daughter_center_wavelength: self.center_nm * NM,
            bandwidth: match self.bandwidth_kind {
                BandwidthKind::Fwhm => Bandwidth::Fwhm(bw),
                BandwidthKind::Rms => Bandwidth::Rms(bw),
            },
            grid_points: self.grid_points,
            span_factor: self.span_factor,
            entangled: self.entangled,
        }
        .build()
        .map_err(|e| CliError::config("source", e))
    }
}

/// Evenly spaced samples `start..=stop`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl Range {
    pub fn values(&self, key: &str) -> Result<Vec<f64>, CliError> {
        if self.points == 0 || !(self.start.is_finite() && self.stop.is_finite()) {
            return Err(CliError::Config(format!(
                "`{key}`: need finite bounds and at least one point"
            )));
        }
        if self.points == 1 {
            return Ok(vec![self.start]);
        }
        let n = self.points - 1;
        Ok((0..=n)
            .map(|k| self.start + (self.stop - self.start) * k as f64 / n as f64)
            .collect())
    }
}

/// One element of an interferometer arm.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ElementConfig {
    /// Glass inserted in place of the same length of air.
    Glass {
        material: String,
        length_mm: f64,
    },
    /// Glass slab including its vacuum transit time.
    Slab {
        material: String,
        length_mm: f64,
    },
    Delay {
        fs: f64,
    },
    /// `Σ c_k (ω − ω0)^k` with `c_k` in fs^k.
    SpectralPhase {
        coefficients_fs: Vec<f64>,
    },
}

impl ElementConfig {
    pub fn build(&self, catalog: &MaterialCatalog, center: f64) -> Result<ScalarTransfer, CliError> {
        let material = |name: &str| catalog.get(name).map_err(|e| CliError::config("material", e));
        match self {
            ElementConfig::Glass { material: m, length_mm } => {
                ScalarTransfer::displacement(material(m)?, length_mm * 1e-3)
                    .map_err(|e| CliError::config("length_mm", e))
            }
            ElementConfig::Slab { material: m, length_mm } => {
                twophoton::optics::slab_transfer(material(m)?, length_mm * 1e-3)
                    .map_err(|e| CliError::config("length_mm", e))
            }
            ElementConfig::Delay { fs } => Ok(ScalarTransfer::Delay(fs * FS)),
            ElementConfig::SpectralPhase { coefficients_fs } => Ok(ScalarTransfer::SpectralPhase {
                center,
                coefficients: coefficients_fs
                    .iter()
                    .enumerate()
                    .map(|(k, c)| c * FS.powi(k as i32))
                    .collect(),
            }),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassicalPulse {
    pub material: String,
    pub length_mm: f64,
    pub input_rms_fs: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HomConfig {
    #[serde(default)]
    pub arm_a: Vec<ElementConfig>,
    #[serde(default)]
    pub arm_b: Vec<ElementConfig>,
    /// Delay axis; centred on the expected dip when omitted.
    #[serde(default)]
    pub delays_fs: Option<Range>,
    /// Compare fitted dips with and without the arm-A elements.
    #[serde(default)]
    pub measure_sample: bool,
    #[serde(default)]
    pub classical_pulse: Option<ClassicalPulse>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChshSettings {
    pub a_deg: f64,
    pub a_prime_deg: f64,
    pub b_deg: f64,
    pub b_prime_deg: f64,
}

impl Default for ChshSettings {
    fn default() -> Self {
        Self {
            a_deg: 45.0,
            a_prime_deg: 135.0,
            b_deg: 0.0,
            b_prime_deg: -90.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FransonBlock {
    pub visibility: f64,
    #[serde(default = "default_imbalance")]
    pub path_imbalance_m: f64,
    #[serde(default = "default_window")]
    pub coincidence_window_ns: f64,
    #[serde(default = "default_coherence")]
    pub coherence_length_um: f64,
    #[serde(default = "default_true")]
    pub entangled: bool,
    pub phi1_deg: Range,
    pub phi2_deg: Range,
    #[serde(default)]
    pub chsh: Option<ChshSettings>,
}

fn default_imbalance() -> f64 {
    0.63
}

fn default_window() -> f64 {
    1.0
}

fn default_coherence() -> f64 {
    50.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EraserBlock {
    pub hwp_deg: f64,
    #[serde(default)]
    pub pol1_deg: Option<f64>,
    #[serde(default)]
    pub pol2_deg: Option<f64>,
    #[serde(default)]
    pub delays_fs: Option<Range>,
    /// Polarizer-2 angles for a visibility curve (needs `pol1_deg`).
    #[serde(default)]
    pub pol2_curve_deg: Option<Range>,
    /// Recorded only: the model is time-stationary, so choosing the
    /// polarizers after detection predicts the same counts.
    #[serde(default)]
    pub delayed_choice: bool,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(untagged)]
pub enum IndexValue {
    Real(f64),
    Complex([f64; 2]),
}

impl IndexValue {
    fn value(self) -> Complex64 {
        match self {
            IndexValue::Real(n) => Complex64::new(n, 0.0),
            IndexValue::Complex([re, im]) => Complex64::new(re, im),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerConfig {
    pub n: IndexValue,
    pub d_nm: f64,
}

/// Either an explicit layer list or the quarter-wave shorthand.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StackConfig {
    #[serde(default)]
    pub ambient_in: Option<f64>,
    #[serde(default)]
    pub ambient_out: Option<f64>,
    #[serde(default)]
    pub layers: Option<Vec<LayerConfig>>,
    #[serde(default)]
    pub design_nm: Option<f64>,
    #[serde(default)]
    pub n_high: Option<f64>,
    #[serde(default)]
    pub n_low: Option<f64>,
    #[serde(default)]
    pub periods: Option<usize>,
}

impl StackConfig {
    pub fn build(&self) -> Result<LayerStack, CliError> {
        let shorthand = [self.design_nm, self.n_high, self.n_low, self.periods.map(|p| p as f64)];
        let ambient_in = self.ambient_in.unwrap_or(1.0);
        let ambient_out = self.ambient_out.unwrap_or(1.0);
        let err = |e| CliError::config("barrier.stack", e);
        match (&self.layers, shorthand.iter().any(Option::is_some)) {
            (Some(layers), false) => {
                let layers = layers
                    .iter()
                    .map(|l| Layer {
                        index: l.n.value(),
                        thickness: l.d_nm * NM,
                    })
                    .collect();
                LayerStack::new(layers, ambient_in, ambient_out).map_err(err)
            }
            (None, true) => {
                let (Some(design), Some(nh), Some(nl), Some(periods)) =
                    (self.design_nm, self.n_high, self.n_low, self.periods)
                else {
                    return Err(CliError::Config(
                        "`barrier.stack`: shorthand needs design_nm, n_high, n_low and periods".into(),
                    ));
                };
                let stack = barrier::quarter_wave_stack(design * NM, nh, nl, periods).map_err(err)?;
                LayerStack::new(stack.layers().to_vec(), ambient_in, ambient_out).map_err(err)
            }
            (Some(_), true) => Err(CliError::Config(
                "`barrier.stack`: give either `layers` or the quarter-wave shorthand, not both".into(),
            )),
            (None, false) => Err(CliError::Config("`barrier.stack`: no layers given".into())),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatingPoint {
    pub wavelength_nm: f64,
    #[serde(default)]
    pub angle_deg: f64,
    #[serde(default = "default_pol")]
    pub pol: Polarization,
}

fn default_pol() -> Polarization {
    Polarization::P
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BarrierBlock {
    pub stack: StackConfig,
    pub wavelengths_nm: Range,
    #[serde(default = "default_angles")]
    pub angles_deg: Vec<f64>,
    #[serde(default = "default_pols")]
    pub pols: Vec<Polarization>,
    /// Point reported in the summary; the design wavelength at normal
    /// incidence when omitted.
    #[serde(default)]
    pub report: Option<OperatingPoint>,
}

fn default_angles() -> Vec<f64> {
    vec![0.0]
}

fn default_pols() -> Vec<Polarization> {
    vec![Polarization::P]
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CollapseBlock {
    pub filter_center_nm: f64,
    /// `null` for no filter.
    #[serde(default)]
    pub filter_fwhm_nm: Option<f64>,
    #[serde(default = "default_arm")]
    pub filtered_arm: Arm,
}

fn default_arm() -> Arm {
    Arm::A
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Output directory, relative to the working directory.
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    /// File stem for `<name>.csv` and `<name>.summary.json`.
    pub name: String,
}

fn default_dir() -> PathBuf {
    PathBuf::from(".")
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    /// s per scan point.
    pub integration_time: f64,
    /// Counts/s at rate 1.
    pub peak_rate: f64,
    pub seed: u64,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let config: RunConfig = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        config.check_blocks()?;
        Ok(config)
    }

    /// Exactly the block named by `experiment` must be present.
    fn check_blocks(&self) -> Result<(), CliError> {
        let present = [
            (Experiment::Hom, self.hom.is_some()),
            (Experiment::Franson, self.franson.is_some()),
            (Experiment::Eraser, self.eraser.is_some()),
            (Experiment::Barrier, self.barrier.is_some()),
            (Experiment::Collapse, self.collapse.is_some()),
        ];
        for (kind, has) in present {
            if kind == self.experiment && !has {
                return Err(CliError::Config(format!("missing `{}` block", kind.name())));
            }
            if kind != self.experiment && has {
                return Err(CliError::Config(format!(
                    "`{}` block given for a `{}` experiment",
                    kind.name(),
                    self.experiment.name()
                )));
            }
        }
        let needs_source = matches!(
            self.experiment,
            Experiment::Hom | Experiment::Eraser | Experiment::Collapse
        );
        if needs_source && self.source.is_none() {
            return Err(CliError::Config(format!(
                "missing `source` block for `{}`",
                self.experiment.name()
            )));
        }
        if self.output.name.is_empty() || self.output.name.contains(['/', '\\']) {
            return Err(CliError::Config("`output.name` must be a plain file stem".into()));
        }
        if let Some(n) = &self.noise {
            if !(n.integration_time > 0.0 && n.peak_rate >= 0.0) {
                return Err(CliError::Config(
                    "`noise`: integration_time must be positive and peak_rate non-negative".into(),
                ));
            }
            if !matches!(self.experiment, Experiment::Hom | Experiment::Eraser) {
                return Err(CliError::Config("`noise` applies to hom and eraser scans only".into()));
            }
        }
        Ok(())
    }
}
