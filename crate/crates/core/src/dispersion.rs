//! Refractive indices of negative uniaxial crystals.
//!
//! Dispersion follows the four-term Sellmeier form
//! `n²(λ) = A + B / (λ² − C) − D λ²` with `λ` in micrometers. Wavelengths at
//! the API boundary are nanometers; wavenumbers are returned in rad/µm.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Shipped crystal database (JSON).
pub const BUILTIN_DB: &str = include_str!("../data/crystals.json");

/// Number of grid points used to validate a record over its transparency range.
const VALIDATION_GRID: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sellmeier {
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "D")]
    pub d: f64,
}

impl Sellmeier {
    /// Squared index at `lambda_um` micrometers.
    pub fn n_squared(&self, lambda_um: f64) -> f64 {
        let l2 = lambda_um * lambda_um;
        self.a + self.b / (l2 - self.c) - self.d * l2
    }
}

/// A uniaxial crystal record from the dispersion database.
#[derive(Debug, Clone, PartialEq)]
pub struct CrystalDef {
    pub name: String,
    pub sellmeier_o: Sellmeier,
    pub sellmeier_e: Sellmeier,
    /// Angle between the optical axis and the face normal, radians.
    pub cut_angle: f64,
    /// `(λ_min, λ_max)` in nanometers.
    pub transparency: (f64, f64),
    pub source: String,
}

/// On-disk form of [`CrystalDef`]: angles in degrees.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CrystalRecord {
    name: String,
    sellmeier_o: Sellmeier,
    sellmeier_e: Sellmeier,
    cut_angle_deg: f64,
    transparency_nm: [f64; 2],
    source: String,
}

impl CrystalDef {
    pub fn contains(&self, lambda_nm: f64) -> bool {
        lambda_nm >= self.transparency.0 && lambda_nm <= self.transparency.1
    }

    fn check_range(&self, lambda_nm: f64) -> Result<()> {
        if self.contains(lambda_nm) {
            Ok(())
        } else {
            Err(Error::OutOfTransparency {
                crystal: self.name.clone(),
                wavelength_nm: lambda_nm,
                min_nm: self.transparency.0,
                max_nm: self.transparency.1,
            })
        }
    }

    /// Ordinary index `n_o(λ)`.
    pub fn n_ordinary(&self, lambda_nm: f64) -> Result<f64> {
        self.check_range(lambda_nm)?;
        Ok(self.sellmeier_o.n_squared(lambda_nm * 1e-3).sqrt())
    }

    /// Principal extraordinary index `n_e(λ)`.
    pub fn n_extraordinary(&self, lambda_nm: f64) -> Result<f64> {
        self.check_range(lambda_nm)?;
        Ok(self.sellmeier_e.n_squared(lambda_nm * 1e-3).sqrt())
    }

    /// Extraordinary-wave index for a wavevector at angle `phi` to the optical axis:
    /// `[cos²φ / n_o² + sin²φ / n_e²]^(−1/2)`.
    pub fn n_extraordinary_at_angle(&self, lambda_nm: f64, phi: f64) -> Result<f64> {
        self.check_range(lambda_nm)?;
        let l = lambda_nm * 1e-3;
        let (s, c) = phi.sin_cos();
        let no2 = self.sellmeier_o.n_squared(l);
        let ratio = no2 / self.sellmeier_e.n_squared(l);
        // n_o / sqrt(cos²φ + sin²φ n_o²/n_e²): exact at φ = 0
        Ok(no2.sqrt() / (c * c + s * s * ratio).sqrt())
    }

    /// Checks the record invariants: ordered range, real indices above one, and
    /// `n_o > n_e` on a grid spanning the transparency window.
    pub fn validate(&self) -> Result<()> {
        let fail = |reason: String| Error::InvalidCrystal { record: self.name.clone(), reason };
        let (lo, hi) = self.transparency;
        if !(lo.is_finite() && hi.is_finite() && lo > 0.0) {
            return Err(fail(format!("transparency bounds [{lo}, {hi}] must be finite and positive")));
        }
        if lo >= hi {
            return Err(fail(format!("transparency λ_min {lo} nm must be below λ_max {hi} nm")));
        }
        if !self.cut_angle.is_finite() {
            return Err(fail("cut angle is not finite".into()));
        }
        for i in 0..VALIDATION_GRID {
            let lambda = lo + (hi - lo) * i as f64 / (VALIDATION_GRID - 1) as f64;
            let l = lambda * 1e-3;
            let no2 = self.sellmeier_o.n_squared(l);
            let ne2 = self.sellmeier_e.n_squared(l);
            if !(no2.is_finite() && ne2.is_finite() && no2 > 1.0 && ne2 > 1.0) {
                return Err(fail(format!(
                    "indices not real and above 1 at {lambda:.1} nm (n_o² = {no2}, n_e² = {ne2})"
                )));
            }
            if ne2 >= no2 {
                return Err(fail(format!(
                    "not negative uniaxial at {lambda:.1} nm: n_e = {:.6} >= n_o = {:.6}",
                    ne2.sqrt(),
                    no2.sqrt()
                )));
            }
        }
        Ok(())
    }
}

impl From<CrystalRecord> for CrystalDef {
    fn from(r: CrystalRecord) -> Self {
        CrystalDef {
            name: r.name,
            sellmeier_o: r.sellmeier_o,
            sellmeier_e: r.sellmeier_e,
            cut_angle: r.cut_angle_deg.to_radians(),
            transparency: (r.transparency_nm[0], r.transparency_nm[1]),
            source: r.source,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarization {
    Ordinary,
    Extraordinary,
}

/// A ray direction in the crystal frame (`z` along pump 4, optical axis in
/// the `(y, z)` plane).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpticalRay {
    pub wavelength: f64,
    pub polarization: Polarization,
    /// In-plane angle to `z`, signed toward `+y`.
    pub theta: f64,
    /// Angle out of the `(y, z)` plane, signed toward `+x`.
    pub beta: f64,
}

impl OpticalRay {
    /// Unit wavevector `(sinβ, cosβ sinθ, cosβ cosθ)`.
    pub fn direction(&self) -> [f64; 3] {
        let (sb, cb) = self.beta.sin_cos();
        let (st, ct) = self.theta.sin_cos();
        [sb, cb * st, cb * ct]
    }

    /// Angle to an optical axis tilted by `alpha` from `z` toward `+y`.
    pub fn angle_to_axis(&self, alpha: f64) -> f64 {
        (self.beta.cos() * (self.theta - alpha).cos()).clamp(-1.0, 1.0).acos()
    }

    pub fn refractive_index(&self, crystal: &CrystalDef, alpha: f64) -> Result<f64> {
        match self.polarization {
            Polarization::Ordinary => crystal.n_ordinary(self.wavelength),
            Polarization::Extraordinary => crystal.n_extraordinary_at_angle(self.wavelength, self.angle_to_axis(alpha)),
        }
    }
}

pub fn n_ordinary(crystal: &CrystalDef, lambda_nm: f64) -> Result<f64> {
    crystal.n_ordinary(lambda_nm)
}

pub fn n_extraordinary_at_angle(crystal: &CrystalDef, lambda_nm: f64, phi: f64) -> Result<f64> {
    crystal.n_extraordinary_at_angle(lambda_nm, phi)
}

/// `2π n / λ` in rad/µm for `lambda_nm` in nanometers.
pub fn wavenumber(lambda_nm: f64, n: f64) -> Result<f64> {
    if !(lambda_nm > 0.0) || !lambda_nm.is_finite() {
        return Err(Error::Domain(format!("wavelength must be positive, got {lambda_nm} nm")));
    }
    if !(n >= 1.0) {
        return Err(Error::Domain(format!("refractive index must be >= 1, got {n}")));
    }
    Ok(2.0 * PI * n / (lambda_nm * 1e-3))
}

pub type CrystalDb = BTreeMap<String, CrystalDef>;

/// Parses a database document. Whitespace-only input yields an empty map.
pub fn parse_crystal_db(text: &str) -> Result<CrystalDb> {
    if text.trim().is_empty() {
        return Ok(CrystalDb::new());
    }
    let records: Vec<CrystalRecord> = serde_json::from_str(text)?;
    let mut db = CrystalDb::new();
    for record in records {
        let crystal = CrystalDef::from(record);
        crystal.validate()?;
        if db.contains_key(&crystal.name) {
            return Err(Error::InvalidCrystal { record: crystal.name, reason: "duplicate name".into() });
        }
        db.insert(crystal.name.clone(), crystal);
    }
    Ok(db)
}

pub fn load_crystal_db(path: impl AsRef<Path>) -> Result<CrystalDb> {
    let text = std::fs::read_to_string(path)?;
    parse_crystal_db(&text)
}

pub fn builtin_db() -> CrystalDb {
    parse_crystal_db(BUILTIN_DB).expect("shipped crystal database is valid")
}

/// The shipped BBO record.
pub fn bbo() -> CrystalDef {
    builtin_db().remove("BBO").expect("shipped database contains BBO")
}
