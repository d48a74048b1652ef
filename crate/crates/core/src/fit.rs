//! Gaussian-on-baseline fit of a coincidence dip or peak.

use nalgebra::{Matrix4, Vector4};
use serde::{Deserialize, Serialize};

use crate::hom::HomScan;
use crate::{Error, Result};

/// Fitted `b·(1 − V·exp(−(τ−c)²/2s²))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DipFit {
    /// Dip centre, s.
    pub center: f64,
    /// Rms width `s` of the Gaussian, s.
    pub rms_width: f64,
    /// Positive for a dip, negative for a peak.
    pub visibility: f64,
    /// Rms residual divided by the fitted baseline.
    pub fit_residual: f64,
    pub baseline: f64,
}

/// Visibilities below this are treated as "no dip".
pub const NO_DIP_THRESHOLD: f64 = 1e-3;

fn model(p: &Vector4<f64>, x: f64) -> (f64, Vector4<f64>) {
    // p = (baseline, visibility, centre, width) in scaled units.
    let (b, v, c, s) = (p[0], p[1], p[2], p[3]);
    let u = (x - c) / s;
    let g = (-0.5 * u * u).exp();
    let value = b * (1.0 - v * g);
    let grad = Vector4::new(1.0 - v * g, -b * g, -b * v * g * u / s, -b * v * g * u * u / s);
    (value, grad)
}

fn sum_sq(p: &Vector4<f64>, xs: &[f64], ys: &[f64]) -> f64 {
    xs.iter().zip(ys).map(|(x, y)| (y - model(p, *x).0).powi(2)).sum()
}

/// Least-squares Gaussian fit by Levenberg-Marquardt.
///
/// The start point is the extremum of the scan and the second moment of its
/// deviation from the edge baseline, so repeated fits of the same data agree
/// bit for bit.
pub fn fit_dip(scan: &HomScan) -> Result<DipFit> {
    let n = scan.delays.len();
    if n < 8 || scan.rates.len() != n {
        return Err(Error::invalid("scan", "need at least 8 matching delay/rate samples"));
    }
    if scan.delays.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::invalid("scan", "delays must be strictly increasing"));
    }
    let edge = (n / 10).max(2);
    let b0 = (scan.rates[..edge].iter().sum::<f64>() + scan.rates[n - edge..].iter().sum::<f64>()) / (2 * edge) as f64;
    if !(b0 > 0.0) {
        return Err(Error::FitFailed("baseline is not positive".into()));
    }
    let (k, dev) = scan
        .rates
        .iter()
        .map(|r| b0 - r)
        .enumerate()
        .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .expect("non-empty scan");
    let v0 = dev / b0;
    if v0.abs() < NO_DIP_THRESHOLD {
        return Err(Error::NoDip { visibility: v0 });
    }
    let c0 = scan.delays[k];
    let (mut m0, mut m2) = (0.0, 0.0);
    for w in 1..n {
        let h = scan.delays[w] - scan.delays[w - 1];
        for j in [w - 1, w] {
            let a = (b0 - scan.rates[j]).abs() * 0.5 * h;
            m0 += a;
            m2 += a * (scan.delays[j] - c0).powi(2);
        }
    }
    let s0 = if m0 > 0.0 && m2 > 0.0 {
        (m2 / m0).sqrt()
    } else {
        scan.delays[1] - scan.delays[0]
    };

    // Work in units of the starting width about the starting centre.
    let xs: Vec<f64> = scan.delays.iter().map(|t| (t - c0) / s0).collect();
    let ys = &scan.rates;
    let mut p = Vector4::new(b0, v0, 0.0, 1.0);
    let mut cost = sum_sq(&p, &xs, ys);
    let mut lambda = 1e-3;
    let mut converged = false;
    for _ in 0..500 {
        let mut jtj = Matrix4::zeros();
        let mut jtr = Vector4::zeros();
        for (x, y) in xs.iter().zip(ys) {
            let (f, g) = model(&p, *x);
            jtj += g * g.transpose();
            jtr += g * (y - f);
        }
        let mut improved = false;
        while lambda < 1e12 {
            let mut a = jtj;
            for i in 0..4 {
                a[(i, i)] *= 1.0 + lambda;
                a[(i, i)] += 1e-300;
            }
            let Some(step) = a.lu().solve(&jtr) else {
                lambda *= 10.0;
                continue;
            };
            let trial = p + step;
            let trial_cost = if trial[3] > 0.0 {
                sum_sq(&trial, &xs, ys)
            } else {
                f64::INFINITY
            };
            if trial_cost <= cost {
                let small = step
                    .iter()
                    .zip(trial.iter())
                    .all(|(d, v)| d.abs() <= 1e-13 * v.abs().max(1e-9));
                p = trial;
                let drop = cost - trial_cost;
                cost = trial_cost;
                lambda = (lambda * 0.1).max(1e-15);
                improved = true;
                if small || drop <= 1e-15 * cost.max(1e-300) {
                    converged = true;
                }
                break;
            }
            lambda *= 10.0;
        }
        if !improved || converged {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::FitFailed("iteration limit reached".into()));
    }
    let (baseline, visibility) = (p[0], p[1]);
    if !(baseline > 0.0) || !visibility.is_finite() {
        return Err(Error::FitFailed(format!("unphysical parameters {p:?}")));
    }
    if visibility.abs() < NO_DIP_THRESHOLD {
        return Err(Error::NoDip { visibility });
    }
    let center = c0 + p[2] * s0;
    let rms_width = p[3].abs() * s0;
    let (lo, hi) = (scan.delays[0], scan.delays[n - 1]);
    if center - 3.0 * rms_width < lo || center + 3.0 * rms_width > hi {
        return Err(Error::FitFailed(format!(
            "scan [{lo:.3e}, {hi:.3e}] s does not cover ±3 widths around {center:.3e} s"
        )));
    }
    Ok(DipFit {
        center,
        rms_width,
        visibility,
        fit_residual: (cost / n as f64).sqrt() / baseline,
        baseline,
    })
}
