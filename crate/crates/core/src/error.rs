use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("pump wavelength {pump_nm:.3} nm is not half of the daughter wavelength {daughter_nm:.3} nm")]
    DegenerateMismatch { pump_nm: f64, daughter_nm: f64 },

    #[error("filter passband does not overlap the photon spectrum (overlap {overlap:.3e})")]
    EmptyPassband { overlap: f64 },

    #[error("wavelength {wavelength_nm:.2} nm outside valid range of `{material}` [{min_nm:.1}, {max_nm:.1}] nm")]
    OutOfRange {
        material: String,
        wavelength_nm: f64,
        min_nm: f64,
        max_nm: f64,
    },

    #[error("unknown material `{0}`")]
    UnknownMaterial(String),

    #[error("materials data: {0}")]
    MaterialsData(String),

    #[error("total internal reflection at the input face (n_in sin θ = {invariant:.4} > n_out = {n_out:.4})")]
    EvanescentAmbient { invariant: f64, n_out: f64 },

    #[error("phase unwrap failed near ω = {omega:.6e} rad/s: adjacent step {step:.3} rad")]
    PhaseUnwrap { omega: f64, step: f64 },

    #[error(
        "integrand under-resolved on the frequency grid (phase step {step:.3} rad); refine the grid or narrow the scan"
    )]
    Undersampled { step: f64 },

    #[error("no dip: visibility {visibility:.2e} is indistinguishable from baseline")]
    NoDip { visibility: f64 },

    #[error("fit did not converge: {0}")]
    FitFailed(String),

    #[error("no sign-consistent CHSH combination for the given settings")]
    DegenerateChsh,
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
