//! Sweeps of the signal wavelength and the tuning angle, and the artifacts
//! they produce (CSV/JSON tables, screen images).

mod emit;
mod render;

pub use emit::{fmt_sig, read_spots_csv, spots_csv, spots_json, CSV_HEADER};
pub use render::{render_map, render_svg, wavelength_to_rgb, Canvas, RenderedImage, DISC_RADIUS, LEGEND_HEIGHT};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dispersion::CrystalDef;
use crate::error::{Error, Result};
use crate::geometry::{solution_spots, LabConfig, PumpFrame, ScreenSpot};
use crate::pmcore::{solve_interlinked, Diagnostic, Field, PmQuery};

/// Fields drawn on the screen: the signal, the upconverted field and the idler.
pub const SCREEN_FIELDS: [Field; 3] = [Field::F1, Field::F2, Field::F3];

/// Inclusive arithmetic range; `floor((stop − start)/step) + 1` values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Range {
    pub fn single(v: f64) -> Self {
        Range { start: v, stop: v, step: 1.0 }
    }

    pub fn validate(&self, what: &str) -> Result<()> {
        if !(self.start.is_finite() && self.stop.is_finite() && self.step.is_finite()) {
            return Err(Error::InvalidSpec(format!("{what}: non-finite range")));
        }
        if self.step <= 0.0 {
            return Err(Error::InvalidSpec(format!("{what}: step must be positive, got {}", self.step)));
        }
        if self.stop < self.start {
            return Err(Error::InvalidSpec(format!("{what}: stop {} is below start {}", self.stop, self.start)));
        }
        Ok(())
    }

    pub fn count(&self) -> usize {
        // tolerate representation error in (stop − start)/step
        ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.count()).map(|i| self.start + i as f64 * self.step).collect()
    }
}

/// A fixed tuning angle or a range of them, degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AlphaSpec {
    Fixed(f64),
    Range(Range),
}

impl AlphaSpec {
    pub fn range(&self) -> Range {
        match *self {
            AlphaSpec::Fixed(a) => Range::single(a),
            AlphaSpec::Range(r) => r,
        }
    }
}

/// Everything a sweep needs besides the crystal. Wavelengths in nm, angles
/// in degrees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub lambda4_nm: f64,
    pub lambda5_nm: f64,
    pub theta5_ext_deg: f64,
    pub alpha_deg: AlphaSpec,
    pub lambda1_nm: Range,
    pub lab: LabConfig,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        self.alpha_deg.range().validate("alpha_deg")?;
        self.lambda1_nm.validate("lambda1_nm")?;
        if !(self.lab.screen_distance > 0.0) {
            return Err(Error::InvalidSpec(format!(
                "screen distance must be positive, got {} mm",
                self.lab.screen_distance
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Serial,
    Parallel,
}

/// Why sweep points produced no spots.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagnosticCounts {
    pub solved: usize,
    pub no_real_roots: usize,
    pub degenerate: usize,
    pub domain_rejected: usize,
    pub residual_rejected: usize,
    /// Query outside the transparency window or otherwise invalid.
    pub invalid_query: usize,
    /// Solutions dropped because a field cannot leave the crystal.
    pub exit_blocked: usize,
}

impl DiagnosticCounts {
    fn add(&mut self, o: &DiagnosticCounts) {
        self.solved += o.solved;
        self.no_real_roots += o.no_real_roots;
        self.degenerate += o.degenerate;
        self.domain_rejected += o.domain_rejected;
        self.residual_rejected += o.residual_rejected;
        self.invalid_query += o.invalid_query;
        self.exit_blocked += o.exit_blocked;
    }
}

/// One row of sweep output.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpotRow {
    pub alpha_deg: f64,
    pub lambda1_nm: f64,
    pub spot: ScreenSpot,
}

/// All spots at one tuning angle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub alpha_deg: f64,
    /// Crystal rotation realizing this frame, degrees.
    pub rho_deg: f64,
    pub rows: Vec<SpotRow>,
    pub diagnostics: DiagnosticCounts,
}

impl Frame {
    pub fn spots(&self) -> Vec<ScreenSpot> {
        self.rows.iter().map(|r| r.spot).collect()
    }
}

fn sweep_point(
    crystal: &CrystalDef,
    spec: &SweepSpec,
    frame: &PumpFrame,
    alpha_deg: f64,
    lambda1: f64,
) -> (Vec<SpotRow>, DiagnosticCounts) {
    let mut counts = DiagnosticCounts::default();
    let q = PmQuery {
        crystal,
        lambda4: spec.lambda4_nm,
        lambda5: spec.lambda5_nm,
        alpha: frame.alpha,
        theta5: frame.theta5,
        lambda1,
    };
    let outcome = match solve_interlinked(&q) {
        Ok(o) => o,
        Err(e) => {
            log::debug!("α={alpha_deg}° λ1={lambda1} nm: {e}");
            counts.invalid_query += 1;
            return (Vec::new(), counts);
        }
    };
    match outcome.diagnostic {
        Some(Diagnostic::NoRealRoots) => counts.no_real_roots += 1,
        Some(Diagnostic::DegenerateConfiguration) => counts.degenerate += 1,
        Some(Diagnostic::DomainRejected) => counts.domain_rejected += 1,
        Some(Diagnostic::ResidualRejected) => counts.residual_rejected += 1,
        None => counts.solved += 1,
    }
    if let Some(d) = outcome.diagnostic {
        log::debug!("α={alpha_deg}° λ1={lambda1} nm: {d}");
    }
    let mut rows = Vec::new();
    for s in &outcome.solutions {
        match solution_spots(crystal, frame, &spec.lab, s, spec.lambda4_nm, spec.lambda5_nm, &SCREEN_FIELDS) {
            Ok(spots) => rows.extend(spots.into_iter().map(|spot| SpotRow { alpha_deg, lambda1_nm: lambda1, spot })),
            Err(e) => {
                log::debug!("α={alpha_deg}° λ1={lambda1} nm {}: {e}", s.branch);
                counts.exit_blocked += 1;
            }
        }
    }
    (rows, counts)
}

/// Sweeps `λ₁` at a single tuning angle. Output order is `λ₁` ascending, then
/// branch, then field, independent of `exec`.
pub fn sweep_lambda1(crystal: &CrystalDef, spec: &SweepSpec, alpha_deg: f64, exec: Execution) -> Result<Frame> {
    spec.validate()?;
    let frame = PumpFrame::for_alpha(
        crystal,
        spec.lambda4_nm,
        spec.lambda5_nm,
        spec.theta5_ext_deg.to_radians(),
        alpha_deg.to_radians(),
        spec.lab.rotation_mode,
    )?;
    let lambdas = spec.lambda1_nm.values();
    let point = |&l: &f64| sweep_point(crystal, spec, &frame, alpha_deg, l);
    let parts: Vec<_> = match exec {
        Execution::Serial => lambdas.iter().map(point).collect(),
        Execution::Parallel => lambdas.par_iter().map(point).collect(),
    };
    let mut rows = Vec::new();
    let mut diagnostics = DiagnosticCounts::default();
    for (r, c) in parts {
        rows.extend(r);
        diagnostics.add(&c);
    }
    Ok(Frame { alpha_deg, rho_deg: frame.incidence.to_degrees(), rows, diagnostics })
}

/// One frame per tuning angle, ascending in `α`.
pub fn sweep_alpha(crystal: &CrystalDef, spec: &SweepSpec, exec: Execution) -> Result<Vec<Frame>> {
    spec.validate()?;
    let alphas = spec.alpha_deg.range().values();
    match exec {
        Execution::Serial => alphas.iter().map(|&a| sweep_lambda1(crystal, spec, a, exec)).collect(),
        Execution::Parallel => alphas.par_iter().map(|&a| sweep_lambda1(crystal, spec, a, exec)).collect(),
    }
}

/// File name of the `index`-th frame image.
pub fn frame_file_name(index: usize) -> String {
    format!("frame_{index:04}.ppm")
}
