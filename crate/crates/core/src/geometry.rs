//! Crystal frame ↔ laboratory frame.
//!
//! The solver works in a frame with pump 4 along `z`. In the laboratory the
//! crystal face normal may be rotated about `x` by `ρ` (the external angle of
//! pump 4 to the normal). A rotation about `x` only shifts in-plane angles
//! `ϑ`, so moving between the pump-4 frame, the face-normal frame and the lab
//! frame is a matter of adding the internal pump-4 angle and subtracting `ρ`.
//! Refraction at the faces conserves the tangential wavevector.

use serde::{Deserialize, Serialize};

use crate::dispersion::{CrystalDef, OpticalRay};
use crate::error::{Error, Result};
use crate::pmcore::{Branch, Field, PmSolution};

/// Iteration cap for [`refract_in_pump4`].
pub const PUMP4_MAX_ITERATIONS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum RotationMode {
    /// Pump 4 enters along the face normal.
    NormalIncidence,
    /// Crystal rotated by `rho` radians about `x` from normal incidence.
    Tilted { rho: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabConfig {
    /// Exit face to screen along the external pump-4 direction, millimeters.
    pub screen_distance: f64,
    pub rotation_mode: RotationMode,
}

impl Default for LabConfig {
    fn default() -> Self {
        LabConfig { screen_distance: 100.0, rotation_mode: RotationMode::NormalIncidence }
    }
}

/// A generated field's hit point on a screen normal to pump 4 (pump 4 at the
/// origin, `+y` toward positive `ϑ`, `+x` out of the pump plane).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScreenSpot {
    pub x: f64,
    pub y: f64,
    pub lambda: f64,
    pub field: Field,
    pub branch: Branch,
    /// External lab-frame angles, radians.
    pub theta_ext: f64,
    pub beta_ext: f64,
}

/// Exit-face refraction from a medium of index `n` into vacuum:
/// `sinβ_out = n sinβ`, `sinϑ_out = n cosβ sinϑ / (1 − n² sin²β)^(1/2)`.
pub fn refract_out(n: f64, beta: f64, theta: f64) -> Result<(f64, f64)> {
    let tir = |sine: f64| Error::TotalInternalReflection { field: "?".into(), sine };
    let sin_beta_out = n * beta.sin();
    if sin_beta_out.abs() >= 1.0 {
        return Err(tir(sin_beta_out));
    }
    let sin_theta_out = n * beta.cos() * theta.sin() / (1.0 - sin_beta_out * sin_beta_out).sqrt();
    if sin_theta_out.abs() > 1.0 {
        return Err(tir(sin_theta_out));
    }
    Ok((sin_beta_out.asin(), sin_theta_out.asin()))
}

/// Planar Snell refraction into the crystal for an ordinary ray.
pub fn refract_in_ordinary(n: f64, theta_ext: f64) -> f64 {
    (theta_ext.sin() / n).asin()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pump4Refraction {
    /// Internal angle of pump 4 to the face normal.
    pub theta_int: f64,
    pub alpha: f64,
    pub n4: f64,
    pub iterations: usize,
}

/// Self-consistent refraction of the extraordinary pump:
/// `sin(incidence) = n₄(λ₄, α) sinϑ_int` with `α = oa_to_normal − ϑ_int`.
pub fn refract_in_pump4(
    crystal: &CrystalDef,
    lambda4: f64,
    incidence: f64,
    oa_to_normal: f64,
) -> Result<Pump4Refraction> {
    let mut theta = 0.0;
    for i in 1..=PUMP4_MAX_ITERATIONS {
        let n4 = crystal.n_extraordinary_at_angle(lambda4, oa_to_normal - theta)?;
        let next = (incidence.sin() / n4).asin();
        let delta = (next - theta).abs();
        theta = next;
        if delta < 1e-12 {
            let alpha = oa_to_normal - theta;
            return Ok(Pump4Refraction {
                theta_int: theta,
                alpha,
                n4: crystal.n_extraordinary_at_angle(lambda4, alpha)?,
                iterations: i,
            });
        }
    }
    Err(Error::NoConvergence(PUMP4_MAX_ITERATIONS))
}

/// Screen hit point `(x, y)` in mm of an external direction `(β, ϑ)` for a
/// screen at `distance` normal to pump 4.
pub fn screen_point(beta_out: f64, theta_out: f64, distance: f64) -> (f64, f64) {
    (distance * beta_out.tan() / theta_out.cos(), distance * theta_out.tan())
}

pub fn project_to_screen(
    beta_out: f64,
    theta_out: f64,
    cfg: &LabConfig,
    lambda: f64,
    field: Field,
    branch: Branch,
) -> ScreenSpot {
    let (x, y) = screen_point(beta_out, theta_out, cfg.screen_distance);
    ScreenSpot { x, y, lambda, field, branch, theta_ext: theta_out, beta_ext: beta_out }
}

/// Orientation of both pumps relative to the crystal for one lab setup.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PumpFrame {
    /// External angle of pump 4 to the face normal (the crystal rotation `ρ`).
    pub incidence: f64,
    /// Internal angle of pump 4 to the face normal.
    pub pump4_internal: f64,
    /// Tuning angle (pump 4 to the optical axis).
    pub alpha: f64,
    /// Internal angle of pump 5 to pump 4.
    pub theta5: f64,
}

impl PumpFrame {
    /// Pump 4 along the normal with a free tuning angle.
    pub fn normal_incidence(crystal: &CrystalDef, lambda5: f64, theta5_ext: f64, alpha: f64) -> Result<Self> {
        Ok(PumpFrame {
            incidence: 0.0,
            pump4_internal: 0.0,
            alpha,
            theta5: refract_in_ordinary(crystal.n_ordinary(lambda5)?, theta5_ext),
        })
    }

    /// Crystal rotated by `rho`; `α` follows from the cut angle.
    pub fn tilted(crystal: &CrystalDef, lambda4: f64, lambda5: f64, theta5_ext: f64, rho: f64) -> Result<Self> {
        let p4 = refract_in_pump4(crystal, lambda4, rho, crystal.cut_angle)?;
        Self::from_pump4(crystal, lambda5, theta5_ext, rho, p4.theta_int, p4.alpha)
    }

    /// The crystal rotation that realizes tuning angle `alpha` with the
    /// external pump geometry held fixed.
    pub fn tilted_for_alpha(
        crystal: &CrystalDef,
        lambda4: f64,
        lambda5: f64,
        theta5_ext: f64,
        alpha: f64,
    ) -> Result<Self> {
        let theta_int = crystal.cut_angle - alpha;
        let n4 = crystal.n_extraordinary_at_angle(lambda4, alpha)?;
        let s = n4 * theta_int.sin();
        if s.abs() >= 1.0 {
            return Err(Error::Domain(format!(
                "α = {:.4}° is unreachable by rotating a crystal cut at {:.4}°",
                alpha.to_degrees(),
                crystal.cut_angle.to_degrees()
            )));
        }
        Self::from_pump4(crystal, lambda5, theta5_ext, s.asin(), theta_int, alpha)
    }

    /// Frame for `mode` at tuning angle `alpha`. In tilted mode the rotation is
    /// derived from `alpha`; the stored `rho` is ignored.
    pub fn for_alpha(
        crystal: &CrystalDef,
        lambda4: f64,
        lambda5: f64,
        theta5_ext: f64,
        alpha: f64,
        mode: RotationMode,
    ) -> Result<Self> {
        match mode {
            RotationMode::NormalIncidence => Self::normal_incidence(crystal, lambda5, theta5_ext, alpha),
            RotationMode::Tilted { .. } => Self::tilted_for_alpha(crystal, lambda4, lambda5, theta5_ext, alpha),
        }
    }

    fn from_pump4(
        crystal: &CrystalDef,
        lambda5: f64,
        theta5_ext: f64,
        rho: f64,
        theta4_int: f64,
        alpha: f64,
    ) -> Result<Self> {
        let n5 = crystal.n_ordinary(lambda5)?;
        let theta5_normal = refract_in_ordinary(n5, theta5_ext + rho);
        Ok(PumpFrame { incidence: rho, pump4_internal: theta4_int, alpha, theta5: theta5_normal - theta4_int })
    }

    /// External lab-frame `(β, ϑ)` of a ray given in the pump-4 frame.
    pub fn exit_direction(&self, crystal: &CrystalDef, ray: &OpticalRay, field: Field) -> Result<(f64, f64)> {
        let n = ray.refractive_index(crystal, self.alpha)?;
        let (beta, theta) = refract_out(n, ray.beta, ray.theta + self.pump4_internal).map_err(|e| match e {
            Error::TotalInternalReflection { sine, .. } => {
                Error::TotalInternalReflection { field: field.to_string(), sine }
            }
            other => other,
        })?;
        Ok((beta, theta - self.incidence))
    }
}

/// Screen spots of the requested fields of one solution.
pub fn solution_spots(
    crystal: &CrystalDef,
    frame: &PumpFrame,
    lab: &LabConfig,
    solution: &PmSolution,
    lambda4: f64,
    lambda5: f64,
    fields: &[Field],
) -> Result<Vec<ScreenSpot>> {
    fields
        .iter()
        .map(|&field| {
            let ray = solution.ray(field, lambda4, lambda5);
            let (beta, theta) = frame.exit_direction(crystal, &ray, field)?;
            Ok(project_to_screen(beta, theta, lab, ray.wavelength, field, solution.branch))
        })
        .collect()
}
