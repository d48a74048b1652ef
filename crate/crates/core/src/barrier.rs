//! Transfer-matrix optics of a dielectric multilayer and its tunneling times.
//!
//! Each layer contributes the characteristic matrix
//!
//! ```text
//! [ cos δ        −i sin δ / q ]
//! [ −i q sin δ    cos δ       ]
//! ```
//!
//! with phase thickness `δ = k0 n cosθ d` and tilted admittance `q = n cosθ`
//! (s) or `q = n / cosθ` (p). With this sign choice an index-matched layer
//! transmits `exp(+iδ)`, so phase delays are positive.
//!
//! Frequency derivatives are taken at fixed transverse wavevector, which is
//! what a tilted, spectrally broad beam actually holds constant.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::{wavelength_to_angular, Complex64, Error, Result, SPEED_OF_LIGHT};

/// Titanium oxide.
pub const DESIGN_N_HIGH: f64 = 2.22;
/// Fused silica.
pub const DESIGN_N_LOW: f64 = 1.41;
/// `(HL)^5 H`.
pub const DESIGN_PERIODS: usize = 5;
/// Design wavelength of the reference mirror, placing its transmission
/// minimum at 692 nm.
pub const DESIGN_WAVELENGTH: f64 = 692e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarization {
    S,
    P,
}

impl std::fmt::Display for Polarization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Polarization::S => "s",
            Polarization::P => "p",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub index: Complex64,
    /// m.
    pub thickness: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerStack {
    layers: Vec<Layer>,
    ambient_in: f64,
    ambient_out: f64,
}

impl LayerStack {
    pub fn new(layers: Vec<Layer>, ambient_in: f64, ambient_out: f64) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::invalid("layers", "stack has no layers"));
        }
        for (k, l) in layers.iter().enumerate() {
            if !(l.thickness > 0.0 && l.thickness.is_finite()) {
                return Err(Error::invalid(
                    "layers",
                    format!("layer {k}: thickness must be positive"),
                ));
            }
            if !(l.index.re > 0.0 && l.index.im >= 0.0 && l.index.is_finite()) {
                return Err(Error::invalid(
                    "layers",
                    format!("layer {k}: index {} needs Re n > 0 and Im n ≥ 0", l.index),
                ));
            }
        }
        for (name, n) in [("ambient_in", ambient_in), ("ambient_out", ambient_out)] {
            if !(n >= 1.0 && n.is_finite()) {
                return Err(Error::invalid(name, format!("{n} must be ≥ 1")));
            }
        }
        Ok(Self {
            layers,
            ambient_in,
            ambient_out,
        })
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn ambient_in(&self) -> f64 {
        self.ambient_in
    }

    pub fn ambient_out(&self) -> f64 {
        self.ambient_out
    }

    pub fn total_thickness(&self) -> f64 {
        self.layers.iter().map(|l| l.thickness).sum()
    }

    pub fn is_lossless(&self) -> bool {
        self.layers.iter().all(|l| l.index.im == 0.0)
    }

    /// Same layers in reverse order, ambients swapped.
    pub fn reversed(&self) -> Self {
        Self {
            layers: self.layers.iter().rev().copied().collect(),
            ambient_in: self.ambient_out,
            ambient_out: self.ambient_in,
        }
    }

    /// Replaces the exit medium, e.g. with a substrate.
    pub fn with_ambient_out(mut self, n: f64) -> Result<Self> {
        Self::new(std::mem::take(&mut self.layers), self.ambient_in, n)
    }

    /// Unit cell of an alternating two-material stack.
    pub fn bloch_cell(&self) -> Option<BlochCell> {
        let (a, b) = match self.layers.as_slice() {
            [a, b, ..] => (*a, *b),
            _ => return None,
        };
        let periodic = self
            .layers
            .iter()
            .enumerate()
            .all(|(k, l)| *l == if k % 2 == 0 { a } else { b });
        if !periodic || a.index.im != 0.0 || b.index.im != 0.0 {
            return None;
        }
        Some(BlochCell {
            n_h: a.index.re,
            d_h: a.thickness,
            n_l: b.index.re,
            d_l: b.thickness,
        })
    }
}

/// `(HL)^periods H` with every layer a quarter wave thick at `design_wavelength`.
pub fn quarter_wave_stack(design_wavelength: f64, n_high: f64, n_low: f64, periods: usize) -> Result<LayerStack> {
    if periods < 1 {
        return Err(Error::invalid("periods", "need at least one period"));
    }
    if !(n_high > 1.0 && n_low > 1.0) {
        return Err(Error::invalid("n_high/n_low", "indices must exceed 1"));
    }
    if !(design_wavelength > 0.0) {
        return Err(Error::invalid("design_wavelength", "must be positive"));
    }
    let layer = |n: f64| Layer {
        index: Complex64::new(n, 0.0),
        thickness: design_wavelength / (4.0 * n),
    };
    let layers = (0..2 * periods + 1)
        .map(|k| if k % 2 == 0 { layer(n_high) } else { layer(n_low) })
        .collect();
    LayerStack::new(layers, 1.0, 1.0)
}

/// Design wavelength giving a `(HL)^periods H` quarter-wave stack of total
/// thickness `total`.
pub fn design_wavelength_for_thickness(total: f64, n_high: f64, n_low: f64, periods: usize) -> f64 {
    let optical = (periods + 1) as f64 / (4.0 * n_high) + periods as f64 / (4.0 * n_low);
    total / optical
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StackResponse {
    pub t: Complex64,
    pub r: Complex64,
    #[serde(rename = "T")]
    pub transmittance: f64,
    #[serde(rename = "R")]
    pub reflectance: f64,
    pub wavelength: f64,
    pub angle: f64,
    pub pol: Polarization,
}

/// Transverse wavevector for incidence at `angle` from the input ambient.
fn transverse_wavevector(stack: &LayerStack, omega: f64, angle: f64) -> Result<f64> {
    if !(0.0..std::f64::consts::FRAC_PI_2).contains(&angle) {
        return Err(Error::invalid("angle", format!("{angle} rad outside [0, π/2)")));
    }
    let kx = stack.ambient_in * angle.sin() * omega / SPEED_OF_LIGHT;
    let invariant = stack.ambient_in * angle.sin();
    if invariant > stack.ambient_out {
        return Err(Error::EvanescentAmbient {
            invariant,
            n_out: stack.ambient_out,
        });
    }
    Ok(kx)
}

/// `cosθ` and tilted admittance inside a medium of permittivity `eps`.
fn admittance(eps: Complex64, s: f64, pol: Polarization) -> (Complex64, Complex64) {
    let cz = (eps - s * s).sqrt();
    let q = match pol {
        Polarization::S => cz,
        Polarization::P => eps / cz,
    };
    (cz, q)
}

struct Amplitudes {
    t: Complex64,
    r: Complex64,
    q_in: Complex64,
    q_out: Complex64,
}

/// Amplitudes at fixed `(ω, kx)`, with every layer's permittivity scaled by
/// `1 + eta`.
fn amplitudes(stack: &LayerStack, omega: f64, kx: f64, pol: Polarization, eta: f64) -> Amplitudes {
    let k0 = omega / SPEED_OF_LIGHT;
    let s = kx / k0;
    let one = Complex64::new(1.0, 0.0);
    let (_, q_in) = admittance(Complex64::new(stack.ambient_in.powi(2), 0.0), s, pol);
    let (_, q_out) = admittance(Complex64::new(stack.ambient_out.powi(2), 0.0), s, pol);
    let mut m = [[one, Complex64::new(0.0, 0.0)], [Complex64::new(0.0, 0.0), one]];
    let minus_i = Complex64::new(0.0, -1.0);
    for layer in &stack.layers {
        let eps = layer.index * layer.index * (1.0 + eta);
        let (cz, q) = admittance(eps, s, pol);
        let delta = k0 * cz * layer.thickness;
        let (sin, cos) = (delta.sin(), delta.cos());
        let l = [[cos, minus_i * sin / q], [minus_i * q * sin, cos]];
        m = [
            [
                m[0][0] * l[0][0] + m[0][1] * l[1][0],
                m[0][0] * l[0][1] + m[0][1] * l[1][1],
            ],
            [
                m[1][0] * l[0][0] + m[1][1] * l[1][0],
                m[1][0] * l[0][1] + m[1][1] * l[1][1],
            ],
        ];
    }
    let b = m[0][0] + m[0][1] * q_out;
    let c = m[1][0] + m[1][1] * q_out;
    let denom = q_in * b + c;
    Amplitudes {
        t: 2.0 * q_in / denom,
        r: (q_in * b - c) / denom,
        q_in,
        q_out,
    }
}

pub fn stack_response(stack: &LayerStack, wavelength: f64, angle: f64, pol: Polarization) -> Result<StackResponse> {
    if !(wavelength > 0.0) {
        return Err(Error::invalid("wavelength", "must be positive"));
    }
    let omega = wavelength_to_angular(wavelength);
    let kx = transverse_wavevector(stack, omega, angle)?;
    let a = amplitudes(stack, omega, kx, pol, 0.0);
    Ok(StackResponse {
        t: a.t,
        r: a.r,
        transmittance: a.q_out.re / a.q_in.re * a.t.norm_sqr(),
        reflectance: a.r.norm_sqr(),
        wavelength,
        angle,
        pol,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TunnelingTimes {
    pub group_delay: f64,
    /// `None` when the stack has no periodic unit cell.
    pub semiclassical: Option<f64>,
    pub larmor: f64,
    pub larmor_y: f64,
    pub larmor_z: f64,
    pub d_over_c: f64,
}

/// Relative frequency step for group delays and Bloch derivatives.
const OMEGA_STEP: f64 = 1e-5;
/// Relative permittivity step for the Larmor derivatives.
const ETA_STEP: f64 = 1e-5;

/// Centred difference of `arg f` with one Richardson halving. The phase is
/// unwrapped through the ratio `f(x+h)/f(x−h)`, which is refused once it
/// turns by more than π/2; the step then halves, up to a limit.
fn phase_derivative<F: Fn(f64) -> Complex64>(f: F, x: f64, h0: f64) -> Result<f64> {
    let mut h = h0;
    for _ in 0..20 {
        let turn = |h: f64| (f(x + h) / f(x - h)).arg();
        let (full, half) = (turn(h), turn(0.5 * h));
        if full.abs() < std::f64::consts::FRAC_PI_2 {
            return Ok((4.0 * half / h - full / (2.0 * h)) / 3.0);
        }
        h *= 0.5;
    }
    Err(Error::PhaseUnwrap {
        omega: x,
        step: (f(x + h) / f(x - h)).arg(),
    })
}

fn log_modulus_derivative<F: Fn(f64) -> Complex64>(f: F, x: f64, h: f64) -> f64 {
    let d = |h: f64| (f(x + h).norm().ln() - f(x - h).norm().ln()) / (2.0 * h);
    (4.0 * d(0.5 * h) - d(h)) / 3.0
}

/// Group delay, Larmor and semiclassical traversal times at one operating point.
pub fn tunneling_times(stack: &LayerStack, wavelength: f64, angle: f64, pol: Polarization) -> Result<TunnelingTimes> {
    tunneling_times_with_step(stack, wavelength, angle, pol, 1.0)
}

/// As [`tunneling_times`] with every finite-difference step multiplied by
/// `step_scale`.
pub fn tunneling_times_with_step(
    stack: &LayerStack,
    wavelength: f64,
    angle: f64,
    pol: Polarization,
    step_scale: f64,
) -> Result<TunnelingTimes> {
    if !(wavelength > 0.0) {
        return Err(Error::invalid("wavelength", "must be positive"));
    }
    let omega = wavelength_to_angular(wavelength);
    let kx = transverse_wavevector(stack, omega, angle)?;

    let group_delay = phase_derivative(
        |w| amplitudes(stack, w, kx, pol, 0.0).t,
        omega,
        omega * OMEGA_STEP * step_scale,
    )?;

    let t_of_eta = |eta: f64| amplitudes(stack, omega, kx, pol, eta).t;
    let h_eta = ETA_STEP * step_scale;
    let larmor_y = 2.0 / omega * phase_derivative(t_of_eta, 0.0, h_eta)?;
    let larmor_z = 2.0 / omega * log_modulus_derivative(t_of_eta, 0.0, h_eta);

    let semiclassical = stack
        .bloch_cell()
        .map(|cell| semiclassical_time(&cell, stack.total_thickness(), omega, kx, pol, step_scale));

    Ok(TunnelingTimes {
        group_delay,
        semiclassical,
        larmor: larmor_y.hypot(larmor_z),
        larmor_y,
        larmor_z,
        d_over_c: stack.total_thickness() / SPEED_OF_LIGHT,
    })
}

/// Times for many operating points, evaluated in parallel and returned in
/// input order.
pub fn tunneling_scan(
    stack: &LayerStack,
    points: &[(f64, f64, Polarization)],
) -> Result<Vec<(StackResponse, TunnelingTimes)>> {
    points
        .par_iter()
        .map(|&(lam, angle, pol)| {
            Ok((
                stack_response(stack, lam, angle, pol)?,
                tunneling_times(stack, lam, angle, pol)?,
            ))
        })
        .collect()
}

/// One period of a two-material periodic medium.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochCell {
    pub n_h: f64,
    pub d_h: f64,
    pub n_l: f64,
    pub d_l: f64,
}

impl BlochCell {
    pub fn quarter_wave(design_wavelength: f64, n_h: f64, n_l: f64) -> Self {
        Self {
            n_h,
            d_h: design_wavelength / (4.0 * n_h),
            n_l,
            d_l: design_wavelength / (4.0 * n_l),
        }
    }

    pub fn period(&self) -> f64 {
        self.d_h + self.d_l
    }

    /// `½ Tr M_cell` at fixed `(ω, kx)`; the angle enters through air.
    fn half_trace(&self, omega: f64, kx: f64, pol: Polarization) -> Complex64 {
        let k0 = omega / SPEED_OF_LIGHT;
        let s = kx / k0;
        let (cz_h, q_h) = admittance(Complex64::new(self.n_h * self.n_h, 0.0), s, pol);
        let (cz_l, q_l) = admittance(Complex64::new(self.n_l * self.n_l, 0.0), s, pol);
        let dh = k0 * cz_h * self.d_h;
        let dl = k0 * cz_l * self.d_l;
        dh.cos() * dl.cos() - 0.5 * (q_h / q_l + q_l / q_h) * dh.sin() * dl.sin()
    }

    /// Bloch wavevector with `Im K ≥ 0` and `Re K ∈ [0, π/Λ]`.
    fn wavevector_at(&self, omega: f64, kx: f64, pol: Polarization) -> Complex64 {
        let a = self.half_trace(omega, kx, pol);
        let lambda = self.period();
        if a.im == 0.0 {
            let a = a.re;
            let k = if a.abs() <= 1.0 {
                Complex64::new(a.acos(), 0.0)
            } else if a > 1.0 {
                Complex64::new(0.0, a.acosh())
            } else {
                Complex64::new(std::f64::consts::PI, (-a).acosh())
            };
            return k / lambda;
        }
        let mut k = a.acos();
        if k.im < 0.0 {
            k = -k;
        }
        if k.re < 0.0 {
            k.re += std::f64::consts::TAU;
        }
        k / lambda
    }
}

/// Bloch wavevector (rad/m) of the infinite periodic medium built from `cell`.
pub fn bloch_wavevector(cell: &BlochCell, wavelength: f64, angle: f64, pol: Polarization) -> Complex64 {
    let omega = wavelength_to_angular(wavelength);
    let kx = angle.sin() * omega / SPEED_OF_LIGHT;
    cell.wavevector_at(omega, kx, pol)
}

/// Whether `wavelength` lies in a stop band of `cell`.
pub fn in_stop_band(cell: &BlochCell, wavelength: f64, angle: f64, pol: Polarization) -> bool {
    let omega = wavelength_to_angular(wavelength);
    cell.half_trace(omega, angle.sin() * omega / SPEED_OF_LIGHT, pol)
        .re
        .abs()
        > 1.0
}

/// Band-edge wavelengths `(short, long)` of the stop band containing `inside`.
pub fn stop_band_edges(cell: &BlochCell, inside: f64, angle: f64, pol: Polarization) -> Result<(f64, f64)> {
    if !in_stop_band(cell, inside, angle, pol) {
        return Err(Error::invalid(
            "inside",
            format!("{} nm is not in a stop band", inside * 1e9),
        ));
    }
    let edge = |factor: f64| -> f64 {
        let (mut a, mut b) = (inside, inside);
        while in_stop_band(cell, b, angle, pol) {
            a = b;
            b *= factor;
        }
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if in_stop_band(cell, mid, angle, pol) {
                a = mid;
            } else {
                b = mid;
            }
        }
        0.5 * (a + b)
    };
    Ok((edge(0.995), edge(1.005)))
}

/// `d·|dκ/dω|` in a gap and `d·|dK/dω|` in a band, at fixed `kx`.
fn semiclassical_time(
    cell: &BlochCell,
    thickness: f64,
    omega: f64,
    kx: f64,
    pol: Polarization,
    step_scale: f64,
) -> f64 {
    let h = omega * OMEGA_STEP * step_scale;
    let gap = cell.half_trace(omega, kx, pol).re.abs() > 1.0;
    let part = |w: f64| {
        let k = cell.wavevector_at(w, kx, pol);
        if gap {
            k.im
        } else {
            k.re
        }
    };
    let d = |h: f64| (part(omega + h) - part(omega - h)) / (2.0 * h);
    let slope = (4.0 * d(0.5 * h) - d(h)) / 3.0;
    // Re K is folded into the first zone, so its slope flips sign in
    // alternate bands; the traversal speed is the magnitude either way.
    thickness * slope.abs()
}
