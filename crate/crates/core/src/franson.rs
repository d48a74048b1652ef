//! Franson two-interferometer fringes and the CHSH parameter.
//!
//! Each photon of the pair enters its own unbalanced Mach-Zehnder: a beam
//! splitter, a short or a long arm (the long one carrying phase `φ_k`), and a
//! second beam splitter with output ports 0 and 1. The four path classes
//! (short-short, long-long, short-long, long-short) are enumerated explicitly.
//! Short-long and long-short events arrive `ΔL/c` apart and fall outside the
//! coincidence window. The surviving short-short and long-long events cannot be
//! told apart, so their amplitudes add.
//!
//! The output ports of interferometer 2 are labelled in mirror order relative
//! to interferometer 1. With that labelling, "like" coincidences go as
//! `¼[1 − V cos(φ1+φ2)]`.

use serde::{Deserialize, Serialize};

use crate::optics::beamsplitter_amplitudes;
use crate::{Complex64, Error, Result, SPEED_OF_LIGHT};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PortPattern {
    Like,
    Unlike,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FransonConfig {
    /// Long-minus-short arm length, m (same in both interferometers).
    pub path_imbalance: f64,
    pub phi1: f64,
    pub phi2: f64,
    pub visibility: f64,
    /// Coincidence window, s.
    pub coincidence_window: f64,
    /// Single-photon coherence length, m.
    pub coherence_length: f64,
    pub entangled: bool,
}

impl FransonConfig {
    /// 63 cm imbalance, 1 ns window, 50 µm photons.
    pub fn new(phi1: f64, phi2: f64, visibility: f64, entangled: bool) -> Self {
        Self {
            path_imbalance: 0.63,
            phi1,
            phi2,
            visibility,
            coincidence_window: 1e-9,
            coherence_length: 50e-6,
            entangled,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.visibility) {
            return Err(Error::invalid(
                "visibility",
                format!("{} not in [0, 1]", self.visibility),
            ));
        }
        if !(self.coherence_length > 0.0) {
            return Err(Error::invalid("coherence_length", "must be positive"));
        }
        if !(self.path_imbalance > 100.0 * self.coherence_length) {
            return Err(Error::invalid(
                "path_imbalance",
                format!(
                    "{} m must exceed 100 coherence lengths ({} m) to suppress single-photon fringes",
                    self.path_imbalance,
                    100.0 * self.coherence_length
                ),
            ));
        }
        if !(self.coincidence_window > 0.0 && self.coincidence_window < self.path_imbalance / SPEED_OF_LIGHT) {
            return Err(Error::invalid(
                "coincidence_window",
                format!(
                    "{} s must be positive and shorter than the imbalance delay {} s",
                    self.coincidence_window,
                    self.path_imbalance / SPEED_OF_LIGHT
                ),
            ));
        }
        if !(self.phi1.is_finite() && self.phi2.is_finite()) {
            return Err(Error::invalid("phi", "phases must be finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventClassRates {
    pub p_ss: f64,
    pub p_ll: f64,
    pub p_sl: f64,
    pub p_ls: f64,
    /// Post-selected like-port coincidence probability.
    pub p_postselected_coincidence: f64,
    /// Post-selected unlike-port coincidence probability.
    pub p_unlike: f64,
    pub port_pattern: PortPattern,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Path {
    Short,
    Long,
}

/// Amplitude for a photon taking `path` through an interferometer with phase
/// `phi` and leaving by `port`.
fn path_amplitude(path: Path, port: usize, phi: f64) -> Complex64 {
    let (t, r) = beamsplitter_amplitudes();
    let exit = |same: bool| if same { t } else { r };
    match path {
        Path::Short => t * exit(port == 0),
        Path::Long => r * Complex64::from_polar(1.0, phi) * exit(port == 1),
    }
}

/// Arrival-time offset (detector 1 minus detector 2) for a path class.
fn arrival_offset(p1: Path, p2: Path, imbalance: f64) -> f64 {
    let t = |p| {
        if p == Path::Long {
            imbalance / SPEED_OF_LIGHT
        } else {
            0.0
        }
    };
    t(p1) - t(p2)
}

/// Port of interferometer 2 paired with port `k` of interferometer 1 in a
/// "like" coincidence.
fn mirrored(k: usize) -> usize {
    1 - k
}

const PATHS: [Path; 2] = [Path::Short, Path::Long];

/// Path-class probabilities and post-selected coincidence rates.
pub fn franson_coincidence(config: &FransonConfig) -> Result<EventClassRates> {
    config.validate()?;
    let class_probability = |p1: Path, p2: Path| -> f64 {
        let mut p = 0.0;
        for k1 in 0..2 {
            for k2 in 0..2 {
                p += (path_amplitude(p1, k1, config.phi1) * path_amplitude(p2, k2, config.phi2)).norm_sqr();
            }
        }
        p
    };

    // Rate into one port pair from the classes that survive the window.
    let port_rate = |k1: usize, k2: usize| -> f64 {
        let mut coherent = Complex64::new(0.0, 0.0);
        let mut incoherent = 0.0;
        for p1 in PATHS {
            for p2 in PATHS {
                if arrival_offset(p1, p2, config.path_imbalance).abs() >= config.coincidence_window {
                    continue;
                }
                let a = path_amplitude(p1, k1, config.phi1) * path_amplitude(p2, k2, config.phi2);
                coherent += a;
                incoherent += a.norm_sqr();
            }
        }
        if config.entangled {
            config.visibility * coherent.norm_sqr() + (1.0 - config.visibility) * incoherent
        } else {
            // Independently emitted photons: the short-short and long-long
            // histories belong to different emission times and never interfere.
            incoherent
        }
    };

    let like: f64 = (0..2).map(|k| port_rate(k, mirrored(k))).sum();
    let unlike: f64 = (0..2).map(|k| port_rate(k, k)).sum();
    Ok(EventClassRates {
        p_ss: class_probability(Path::Short, Path::Short),
        p_ll: class_probability(Path::Long, Path::Long),
        p_sl: class_probability(Path::Short, Path::Long),
        p_ls: class_probability(Path::Long, Path::Short),
        p_postselected_coincidence: like,
        p_unlike: unlike,
        port_pattern: PortPattern::Like,
    })
}

/// `(like − unlike)/(like + unlike)` for one setting, with the unused ports
/// assumed to count like the used ones.
pub fn correlation(visibility: f64, phi1: f64, phi2: f64, entangled: bool) -> Result<f64> {
    let r = franson_coincidence(&FransonConfig::new(phi1, phi2, visibility, entangled))?;
    Ok((r.p_postselected_coincidence - r.p_unlike) / (r.p_postselected_coincidence + r.p_unlike))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChshResult {
    /// `(a,b), (a,b′), (a′,b), (a′,b′)`.
    pub settings: [(f64, f64); 4],
    pub correlations: [f64; 4],
    /// Index into `settings` of the term carrying the minus sign.
    pub subtracted: usize,
    #[serde(rename = "S")]
    pub s: f64,
    pub violated: bool,
}

/// Index of the setting whose phase-sum cosine has the sign opposite to the
/// other three.
fn odd_one_out(settings: &[(f64, f64); 4]) -> Result<usize> {
    const TOL: f64 = 1e-12;
    let signs: Vec<f64> = settings
        .iter()
        .map(|(x, y)| {
            let c = (x + y).cos();
            if c.abs() < TOL {
                0.0
            } else {
                c.signum()
            }
        })
        .collect();
    if signs.contains(&0.0) {
        return Err(Error::DegenerateChsh);
    }
    let positive = signs.iter().filter(|s| **s > 0.0).count();
    let minority = match positive {
        1 => 1.0,
        3 => -1.0,
        _ => return Err(Error::DegenerateChsh),
    };
    Ok(signs
        .iter()
        .position(|s| *s == minority)
        .expect("minority sign present"))
}

/// All four CHSH combinations `Σ E − 2E_k`, one per choice of the negated term.
pub fn chsh_combinations(correlations: &[f64; 4]) -> [f64; 4] {
    let total: f64 = correlations.iter().sum();
    std::array::from_fn(|k| total - 2.0 * correlations[k])
}

/// CHSH parameter for Franson settings `φ1 ∈ {a, a′}`, `φ2 ∈ {b, b′}`.
#[allow(non_snake_case)]
pub fn chsh_S(visibility: f64, a: f64, a_prime: f64, b: f64, b_prime: f64) -> Result<ChshResult> {
    let settings = [(a, b), (a, b_prime), (a_prime, b), (a_prime, b_prime)];
    let subtracted = odd_one_out(&settings)?;
    let mut correlations = [0.0; 4];
    for (e, (x, y)) in correlations.iter_mut().zip(&settings) {
        *e = correlation(visibility, *x, *y, true)?;
    }
    let s = chsh_combinations(&correlations)[subtracted];
    Ok(ChshResult {
        settings,
        correlations,
        subtracted,
        s,
        violated: s.abs() > 2.0,
    })
}

/// Correlation of a local model in which each pair carries a shared random
/// phase `λ` and each photon answers ±1 with probability
/// `½(1 ± cos(φ_k ± λ))` on its own. Averaged over `λ` by quadrature.
pub fn local_hidden_phase_correlation(phi1: f64, phi2: f64) -> f64 {
    let n = 720;
    (0..n)
        .map(|k| {
            let lambda = std::f64::consts::TAU * k as f64 / n as f64;
            (phi1 + lambda).cos() * (phi2 - lambda).cos()
        })
        .sum::<f64>()
        / n as f64
}
