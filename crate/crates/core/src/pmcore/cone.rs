//! Single-process downconversion `4(e) → 1(o) + 3(o)`: for fixed `λ₁` the
//! signal wavevectors form a cone around pump 4.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{max_abs, Diagnostic, RESIDUAL_TOLERANCE};
use crate::dispersion::{wavenumber, CrystalDef};
use crate::error::{Error, Result};

/// A signal/idler pair on the cone, parametrized by azimuth `psi` measured
/// from `+x` toward `+y`. The in-plane seed on the `−y` side sits at
/// `psi = 3π/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConePoint {
    pub psi: f64,
    pub theta1: f64,
    pub beta1: f64,
    pub theta3: f64,
    pub beta3: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cone {
    /// Internal angle between `k₁` and `k₄`; `None` when infeasible.
    pub half_angle: Option<f64>,
    pub lambda3: f64,
    pub points: Vec<ConePoint>,
    pub diagnostic: Option<Diagnostic>,
}

struct Wavenumbers {
    k1: f64,
    k3: f64,
    k4: f64,
    lambda3: f64,
}

fn wavenumbers(crystal: &CrystalDef, lambda4: f64, alpha: f64, lambda1: f64) -> Result<Wavenumbers> {
    if !(lambda1 > lambda4 && lambda4 > 0.0) {
        return Err(Error::Domain(format!("λ1 = {lambda1} nm must be longer than λ4 = {lambda4} nm")));
    }
    let lambda3 = 1.0 / (1.0 / lambda4 - 1.0 / lambda1);
    Ok(Wavenumbers {
        k1: wavenumber(lambda1, crystal.n_ordinary(lambda1)?)?,
        k3: wavenumber(lambda3, crystal.n_ordinary(lambda3)?)?,
        k4: wavenumber(lambda4, crystal.n_extraordinary_at_angle(lambda4, alpha)?)?,
        lambda3,
    })
}

/// Samples the downconversion cone at `samples` equally spaced azimuths.
pub fn downconversion_cone(
    crystal: &CrystalDef,
    lambda4: f64,
    alpha: f64,
    lambda1: f64,
    samples: usize,
) -> Result<Cone> {
    let Wavenumbers { k1, k3, k4, lambda3 } = wavenumbers(crystal, lambda4, alpha, lambda1)?;
    let cos_half = (k4 * k4 + k1 * k1 - k3 * k3) / (2.0 * k1 * k4);
    if !(cos_half.abs() <= 1.0) {
        return Ok(Cone { half_angle: None, lambda3, points: Vec::new(), diagnostic: Some(Diagnostic::NoRealRoots) });
    }
    let half = cos_half.acos();
    let sin_half = half.sin();
    let mut points = Vec::with_capacity(samples);
    for i in 0..samples {
        let psi = 2.0 * PI * i as f64 / samples as f64;
        let (sp, cp) = psi.sin_cos();
        let (x1, y1, z1) = (sin_half * cp, sin_half * sp, cos_half);
        // k₃ = k₄ẑ − k₁
        let (x3, y3, z3) = (-k1 * x1, -k1 * y1, k4 - k1 * z1);
        let n3 = (x3 * x3 + y3 * y3 + z3 * z3).sqrt();
        let p = ConePoint {
            psi,
            theta1: y1.atan2(z1),
            beta1: x1.clamp(-1.0, 1.0).asin(),
            theta3: y3.atan2(z3),
            beta3: (x3 / n3).clamp(-1.0, 1.0).asin(),
        };
        let r = verify_downconversion(&p, k1, k3, k4);
        if max_abs(&r) < RESIDUAL_TOLERANCE {
            points.push(p);
        } else {
            log::debug!("cone point at psi={psi} rejected, residual {r:?}");
        }
    }
    Ok(Cone { half_angle: Some(half), lambda3, points, diagnostic: None })
}

/// Residuals of the three downconversion momentum equations, divided by `k₄`.
pub fn verify_downconversion(p: &ConePoint, k1: f64, k3: f64, k4: f64) -> [f64; 3] {
    let (sb1, cb1) = p.beta1.sin_cos();
    let (sb3, cb3) = p.beta3.sin_cos();
    [
        k1 * sb1 + k3 * sb3,
        k1 * cb1 * p.theta1.sin() + k3 * cb3 * p.theta3.sin(),
        k1 * cb1 * p.theta1.cos() + k3 * cb3 * p.theta3.cos() - k4,
    ]
    .map(|r| r / k4)
}

/// Tuning angle at which downconversion to `λ₁` is collinear, if any.
pub fn collinear_alpha(crystal: &CrystalDef, lambda4: f64, lambda1: f64) -> Result<Option<f64>> {
    let Wavenumbers { k1, k3, .. } = wavenumbers(crystal, lambda4, 0.0, lambda1)?;
    let n4 = (k1 + k3) * lambda4 * 1e-3 / (2.0 * PI);
    let no = crystal.n_ordinary(lambda4)?;
    let ne = crystal.n_extraordinary(lambda4)?;
    let sin2 = (1.0 / (n4 * n4) - 1.0 / (no * no)) / (1.0 / (ne * ne) - 1.0 / (no * no));
    Ok((0.0..=1.0).contains(&sin2).then(|| sin2.sqrt().asin()))
}
