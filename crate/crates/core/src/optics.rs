//! Scalar spectral transfer functions and Jones-matrix polarization elements.

use std::f64::consts::FRAC_1_SQRT_2;

use serde::{Deserialize, Serialize};

use crate::materials::Material;
use crate::{Complex64, Error, Result, SPEED_OF_LIGHT};

/// Transmission and reflection amplitudes of the lossless symmetric 50/50
/// beam splitter: `t = 1/√2`, `r = i/√2`.
///
/// Every interferometer in the crate takes its phases from here.
pub fn beamsplitter_amplitudes() -> (Complex64, Complex64) {
    (Complex64::new(FRAC_1_SQRT_2, 0.0), Complex64::new(0.0, FRAC_1_SQRT_2))
}

/// Frequency-domain transfer function `H(ω)` of an element in one arm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalarTransfer {
    Identity,
    /// Free-space delay in seconds: `exp(iωτ)`.
    Delay(f64),
    /// Glass slab: `exp(i n(ω) ω L / c)`.
    Slab {
        material: Material,
        length: f64,
    },
    /// Glass slab replacing the same thickness of vacuum: `exp(i (n(ω) − 1) ω L / c)`.
    Displacement {
        material: Material,
        length: f64,
    },
    /// `exp(i Σ_k c_k (ω − ω_c)^k)`.
    SpectralPhase {
        center: f64,
        coefficients: Vec<f64>,
    },
    Cascade(Vec<ScalarTransfer>),
}

/// `exp(i n(ω) ω L / c)` for a slab of `material`.
pub fn slab_transfer(material: &Material, length: f64) -> Result<ScalarTransfer> {
    if !(length >= 0.0 && length.is_finite()) {
        return Err(Error::invalid("length", format!("{length} m must be ≥ 0")));
    }
    Ok(ScalarTransfer::Slab {
        material: material.clone(),
        length,
    })
}

impl ScalarTransfer {
    /// Displacement of vacuum by `length` of `material`, i.e. the sample as seen
    /// relative to the path it replaces.
    pub fn displacement(material: &Material, length: f64) -> Result<Self> {
        if !(length >= 0.0 && length.is_finite()) {
            return Err(Error::invalid("length", format!("{length} m must be ≥ 0")));
        }
        Ok(ScalarTransfer::Displacement {
            material: material.clone(),
            length,
        })
    }

    pub fn then(self, next: ScalarTransfer) -> ScalarTransfer {
        match (self, next) {
            (ScalarTransfer::Identity, n) => n,
            (s, ScalarTransfer::Identity) => s,
            (ScalarTransfer::Cascade(mut v), n) => {
                v.push(n);
                ScalarTransfer::Cascade(v)
            }
            (s, n) => ScalarTransfer::Cascade(vec![s, n]),
        }
    }

    /// Unwrapped phase `arg H(ω)`, continuous in ω.
    pub fn phase(&self, omega: f64) -> Result<f64> {
        Ok(match self {
            ScalarTransfer::Identity => 0.0,
            ScalarTransfer::Delay(tau) => omega * tau,
            ScalarTransfer::Slab { material, length } => {
                if *length == 0.0 {
                    return Ok(0.0);
                }
                material.index_at_angular(omega)? * omega * length / SPEED_OF_LIGHT
            }
            ScalarTransfer::Displacement { material, length } => {
                if *length == 0.0 {
                    return Ok(0.0);
                }
                (material.index_at_angular(omega)? - 1.0) * omega * length / SPEED_OF_LIGHT
            }
            ScalarTransfer::SpectralPhase { center, coefficients } => {
                let x = omega - center;
                coefficients.iter().rev().fold(0.0, |acc, c| acc * x + c)
            }
            ScalarTransfer::Cascade(parts) => {
                let mut total = 0.0;
                for p in parts {
                    total += p.phase(omega)?;
                }
                total
            }
        })
    }

    pub fn response(&self, omega: f64) -> Result<Complex64> {
        // All elements are transparent; only the phase varies.
        Ok(Complex64::from_polar(1.0, self.phase(omega)?))
    }

    /// `dφ/dω` (s) by a Richardson-extrapolated centred difference of the
    /// phase ratio `H(ω+h)/H(ω−h)`, relative step 1e-6.
    pub fn group_delay(&self, omega: f64) -> Result<f64> {
        let d = |h: f64| -> Result<f64> {
            let ratio = self.response(omega + h)? / self.response(omega - h)?;
            let step = ratio.arg();
            if step.abs() > std::f64::consts::FRAC_PI_2 {
                return Err(Error::PhaseUnwrap { omega, step });
            }
            Ok(step / (2.0 * h))
        };
        let h = omega * 1e-6;
        Ok((4.0 * d(0.5 * h)? - d(h)?) / 3.0)
    }
}

/// 2×2 complex matrix acting on (horizontal, vertical) Jones vectors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JonesMatrix(pub [[Complex64; 2]; 2]);

pub type JonesVector = [Complex64; 2];

/// Linear polarization at `angle` from horizontal.
pub fn linear_polarization(angle: f64) -> JonesVector {
    [Complex64::new(angle.cos(), 0.0), Complex64::new(angle.sin(), 0.0)]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JonesKind {
    /// Half-wave plate.
    Hwp,
    /// Quarter-wave plate.
    Qwp,
    /// Ideal linear polarizer.
    Lp,
}

impl JonesMatrix {
    pub fn identity() -> Self {
        let (o, z) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
        JonesMatrix([[o, z], [z, o]])
    }

    fn rotation(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        JonesMatrix([
            [Complex64::new(c, 0.0), Complex64::new(-s, 0.0)],
            [Complex64::new(s, 0.0), Complex64::new(c, 0.0)],
        ])
    }

    fn diagonal(a: Complex64, b: Complex64) -> Self {
        let z = Complex64::new(0.0, 0.0);
        JonesMatrix([[a, z], [z, b]])
    }

    pub fn mul(&self, other: &JonesMatrix) -> JonesMatrix {
        let (a, b) = (&self.0, &other.0);
        let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        JonesMatrix(out)
    }

    pub fn apply(&self, v: &JonesVector) -> JonesVector {
        let m = &self.0;
        [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
    }

    pub fn adjoint(&self) -> JonesMatrix {
        let m = &self.0;
        JonesMatrix([[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]])
    }

    /// Largest entrywise modulus of `self − other`.
    pub fn distance(&self, other: &JonesMatrix) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                d = d.max((self.0[i][j] - other.0[i][j]).norm());
            }
        }
        d
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.adjoint().mul(self).distance(&JonesMatrix::identity()) <= tol
    }

    pub fn is_projector(&self, tol: f64) -> bool {
        self.mul(self).distance(self) <= tol && self.adjoint().distance(self) <= tol
    }
}

/// Retarder or polarizer with its axis at `axis_angle` (rad) from horizontal.
///
/// A half-wave plate at `α` turns horizontal light into linear light at `2α`.
pub fn jones_element(kind: JonesKind, axis_angle: f64) -> JonesMatrix {
    let (one, zero) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
    let core = match kind {
        JonesKind::Hwp => JonesMatrix::diagonal(one, -one),
        JonesKind::Qwp => JonesMatrix::diagonal(one, Complex64::new(0.0, 1.0)),
        JonesKind::Lp => JonesMatrix::diagonal(one, zero),
    };
    JonesMatrix::rotation(axis_angle)
        .mul(&core)
        .mul(&JonesMatrix::rotation(-axis_angle))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::materials::MaterialCatalog;
    use crate::wavelength_to_angular;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    #[test]
    fn beamsplitter_is_unitary_and_cancels_pairs() {
        let (t, r) = beamsplitter_amplitudes();
        assert!((t.norm_sqr() + r.norm_sqr() - 1.0).abs() < 1e-15);
        assert!((t * t + r * r).norm() < 1e-15);
        let m = JonesMatrix([[t, r], [r, t]]);
        assert!(m.is_unitary(1e-15));
    }

    #[test]
    fn hwp_at_45_turns_h_into_v() {
        let out = jones_element(JonesKind::Hwp, FRAC_PI_4).apply(&linear_polarization(0.0));
        assert!(out[0].norm() < 1e-15);
        assert!((out[1].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn hwp_rotates_by_twice_its_angle() {
        for k in 0..12 {
            let a = k as f64 * 0.13;
            let out = jones_element(JonesKind::Hwp, a).apply(&linear_polarization(0.0));
            let expect = linear_polarization(2.0 * a);
            assert!((out[0] - expect[0]).norm() < 1e-14 && (out[1] - expect[1]).norm() < 1e-14);
        }
    }

    #[test]
    fn waveplates_unitary_polarizers_projective() {
        for k in 0..16 {
            let a = -FRAC_PI_2 + k as f64 * 0.2;
            assert!(jones_element(JonesKind::Hwp, a).is_unitary(1e-12));
            assert!(jones_element(JonesKind::Qwp, a).is_unitary(1e-12));
            assert!(jones_element(JonesKind::Lp, a).is_projector(1e-12));
        }
    }

    #[test]
    fn qwp_eigenphases_differ_by_quarter_wave() {
        let m = jones_element(JonesKind::Qwp, 0.0).0;
        assert!(m[0][1].norm() == 0.0 && m[1][0].norm() == 0.0);
        let diff = (m[1][1] / m[0][0]).arg();
        assert!((diff - FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn zero_length_slab_is_identity() {
        let sf11 = MaterialCatalog::bundled().get("SF11").unwrap().clone();
        let h = slab_transfer(&sf11, 0.0).unwrap();
        assert_eq!(h.response(2.7e15).unwrap(), Complex64::new(1.0, 0.0));
        assert!(slab_transfer(&sf11, -1.0).is_err());
    }

    #[test]
    fn vacuum_slab_is_pure_delay() {
        let l = 0.01;
        let h = slab_transfer(&Material::vacuum(), l).unwrap();
        let w = wavelength_to_angular(702e-9);
        let gd = h.group_delay(w).unwrap();
        assert!((gd / (l / SPEED_OF_LIGHT) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn sf11_half_inch_excess_delay() {
        let sf11 = MaterialCatalog::bundled().get("SF11").unwrap().clone();
        let w = wavelength_to_angular(702e-9);
        let l = 12.7e-3;
        let glass = slab_transfer(&sf11, l).unwrap().group_delay(w).unwrap();
        let excess = glass - l / SPEED_OF_LIGHT;
        assert!((excess - 35.2e-12).abs() < 0.3e-12, "{excess}");
        let disp = ScalarTransfer::displacement(&sf11, l).unwrap().group_delay(w).unwrap();
        assert!((disp - excess).abs() < 1e-6 * excess);
    }

    #[test]
    fn group_delay_matches_sellmeier_group_index() {
        let sf11 = MaterialCatalog::bundled().get("SF11").unwrap().clone();
        let d = crate::materials::material_dispersion(&sf11, 702e-9).unwrap();
        let gd = slab_transfer(&sf11, 1e-3)
            .unwrap()
            .group_delay(wavelength_to_angular(702e-9))
            .unwrap();
        assert!((gd - d.n_group * 1e-3 / SPEED_OF_LIGHT).abs() < 1e-7 * gd);
    }

    #[test]
    fn group_delays_add_for_cascaded_slabs() {
        let cat = MaterialCatalog::bundled();
        let a = slab_transfer(cat.get("SF11").unwrap(), 3e-3).unwrap();
        let b = slab_transfer(cat.get("fused_silica").unwrap(), 5e-3).unwrap();
        let w = wavelength_to_angular(702e-9);
        let sum = a.group_delay(w).unwrap() + b.group_delay(w).unwrap();
        let both = a.then(b).group_delay(w).unwrap();
        assert!((both - sum).abs() < 1e-6 * sum);
    }

    #[test]
    fn slab_phase_is_continuous_on_pair_grid() {
        // 12.7 mm SF11 over a 257-point grid spanning ±6σ of a 6 nm rms pair.
        // Once the mean group delay is removed the phase moves by well under
        // π/2 per sample, so nothing aliases onto a 2π branch.
        let sf11 = MaterialCatalog::bundled().get("SF11").unwrap().clone();
        let h = slab_transfer(&sf11, 12.7e-3).unwrap();
        let w0 = wavelength_to_angular(702e-9);
        let tau = h.group_delay(w0).unwrap();
        let sigma = crate::spectral::Bandwidth::Rms(6e-9).rms_angular(702e-9);
        let step = 6.0 * sigma / 128.0;
        let residual = |k: i32| {
            let w = w0 + k as f64 * step;
            h.phase(w).unwrap() - tau * (w - w0)
        };
        for k in -128..128 {
            let jump = residual(k + 1) - residual(k);
            assert!(jump.abs() < std::f64::consts::FRAC_PI_2, "{k}: {jump}");
            let wrapped =
                (h.response(w0 + (k + 1) as f64 * step).unwrap() / h.response(w0 + k as f64 * step).unwrap()).arg();
            let expect = jump + tau * step;
            let turns = (expect - wrapped) / std::f64::consts::TAU;
            assert!((turns - turns.round()).abs() < 1e-6);
        }
    }

    #[test]
    fn out_of_range_frequency_errors_at_evaluation() {
        let sf11 = MaterialCatalog::bundled().get("SF11").unwrap().clone();
        let h = slab_transfer(&sf11, 1e-3).unwrap();
        assert!(matches!(
            h.response(wavelength_to_angular(300e-9)),
            Err(Error::OutOfRange { .. })
        ));
    }
}
