//! Sellmeier glasses and their dispersion.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result, SPEED_OF_LIGHT};

/// Environment variable naming a materials file that replaces the bundled one.
pub const MATERIALS_ENV: &str = "TWOPHOTON_MATERIALS";

const BUNDLED: &str = include_str!("../data/materials.json");

/// Three-term Sellmeier material.
///
/// `n²(λ) = 1 + Σ B_i λ² / (λ² − C_i)`, with `C_i` in m².
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Material {
    pub name: String,
    #[serde(rename = "B")]
    pub b: [f64; 3],
    #[serde(rename = "C_m2")]
    pub c: [f64; 3],
    #[serde(rename = "range_nm")]
    range_nm: [f64; 2],
}

/// Index, group index and group-velocity dispersion at one wavelength.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dispersion {
    pub n: f64,
    pub n_group: f64,
    /// β₂ in s²/m.
    pub gvd: f64,
}

impl Material {
    pub fn new(name: impl Into<String>, b: [f64; 3], c: [f64; 3], valid_range: (f64, f64)) -> Result<Self> {
        let m = Self {
            name: name.into(),
            b,
            c,
            range_nm: [valid_range.0 * 1e9, valid_range.1 * 1e9],
        };
        m.validate()?;
        Ok(m)
    }

    pub fn vacuum() -> Self {
        Self {
            name: "vacuum".into(),
            b: [0.0; 3],
            c: [0.0; 3],
            range_nm: [1.0, 1.0e9],
        }
    }

    fn validate(&self) -> Result<()> {
        let [lo, hi] = self.range_nm;
        if !(lo > 0.0 && hi > lo) {
            return Err(Error::MaterialsData(format!(
                "`{}`: bad range_nm [{lo}, {hi}]",
                self.name
            )));
        }
        if self.b.iter().chain(&self.c).any(|x| !x.is_finite()) {
            return Err(Error::MaterialsData(format!("`{}`: non-finite coefficient", self.name)));
        }
        // A pole inside the range, or n < 1, makes the index meaningless there.
        for lam in [lo, 0.5 * (lo + hi), hi] {
            let n2 = self.n_squared(lam * 1e-9);
            if !(n2 >= 1.0) {
                return Err(Error::MaterialsData(format!(
                    "`{}`: n² = {n2} < 1 at {lam} nm",
                    self.name
                )));
            }
        }
        Ok(())
    }

    /// Valid wavelength range in metres.
    pub fn valid_range(&self) -> (f64, f64) {
        (self.range_nm[0] * 1e-9, self.range_nm[1] * 1e-9)
    }

    fn check_range(&self, wavelength: f64) -> Result<()> {
        let (lo, hi) = self.valid_range();
        if wavelength >= lo && wavelength <= hi {
            Ok(())
        } else {
            Err(Error::OutOfRange {
                material: self.name.clone(),
                wavelength_nm: wavelength * 1e9,
                min_nm: self.range_nm[0],
                max_nm: self.range_nm[1],
            })
        }
    }

    #[inline]
    fn n_squared(&self, wavelength: f64) -> f64 {
        let l2 = wavelength * wavelength;
        1.0 + self.b.iter().zip(&self.c).map(|(b, c)| b * l2 / (l2 - c)).sum::<f64>()
    }

    #[inline]
    fn index_unchecked(&self, wavelength: f64) -> f64 {
        self.n_squared(wavelength).sqrt()
    }

    pub fn refractive_index(&self, wavelength: f64) -> Result<f64> {
        self.check_range(wavelength)?;
        Ok(self.index_unchecked(wavelength))
    }

    /// Index at angular frequency `omega` (rad/s).
    pub fn index_at_angular(&self, omega: f64) -> Result<f64> {
        self.refractive_index(crate::angular_to_wavelength(omega))
    }

    /// Richardson-extrapolated centred first derivative, relative step 1e-4.
    pub fn dn_dlambda(&self, wavelength: f64) -> Result<f64> {
        self.check_range(wavelength)?;
        let d = |h: f64| (self.index_unchecked(wavelength + h) - self.index_unchecked(wavelength - h)) / (2.0 * h);
        let h = wavelength * 1e-4;
        Ok((4.0 * d(0.5 * h) - d(h)) / 3.0)
    }

    /// Richardson-extrapolated centred second derivative, relative step 1e-3.
    pub fn d2n_dlambda2(&self, wavelength: f64) -> Result<f64> {
        self.check_range(wavelength)?;
        let n0 = self.index_unchecked(wavelength);
        let d2 =
            |h: f64| (self.index_unchecked(wavelength + h) - 2.0 * n0 + self.index_unchecked(wavelength - h)) / (h * h);
        let h = wavelength * 1e-3;
        Ok((4.0 * d2(0.5 * h) - d2(h)) / 3.0)
    }
}

/// `(n, n − λ dn/dλ, λ³/(2πc²) d²n/dλ²)` at `wavelength`.
pub fn material_dispersion(material: &Material, wavelength: f64) -> Result<Dispersion> {
    let n = material.refractive_index(wavelength)?;
    let dn = material.dn_dlambda(wavelength)?;
    let d2n = material.d2n_dlambda2(wavelength)?;
    Ok(Dispersion {
        n,
        n_group: n - wavelength * dn,
        gvd: wavelength.powi(3) / (2.0 * std::f64::consts::PI * SPEED_OF_LIGHT * SPEED_OF_LIGHT) * d2n,
    })
}

/// Named collection of materials as loaded from a data file.
#[derive(Debug, Clone, PartialEq)]
pub struct MaterialCatalog {
    materials: Vec<Material>,
}

impl MaterialCatalog {
    /// The catalog compiled into the crate (SF11, fused silica, vacuum).
    pub fn bundled() -> Self {
        Self::from_json_str(BUNDLED).expect("bundled materials file is valid")
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let materials: Vec<Material> = serde_json::from_str(text).map_err(|e| Error::MaterialsData(e.to_string()))?;
        for m in &materials {
            m.validate()?;
        }
        Ok(Self { materials })
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::MaterialsData(format!("{}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }

    /// Loads the file named by [`MATERIALS_ENV`] if set, else the bundled catalog.
    pub fn from_env_or_bundled() -> Result<Self> {
        match std::env::var_os(MATERIALS_ENV) {
            Some(path) => Self::from_path(Path::new(&path)),
            None => Ok(Self::bundled()),
        }
    }

    pub fn get(&self, name: &str) -> Result<&Material> {
        self.materials
            .iter()
            .find(|m| m.name == name)
            .ok_or_else(|| Error::UnknownMaterial(name.to_string()))
    }

    pub fn iter(&self) -> impl Iterator<Item = &Material> {
        self.materials.iter()
    }
}
