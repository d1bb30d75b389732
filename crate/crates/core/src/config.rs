//! JSON run configuration for sweeps, and the artifacts a run writes.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dispersion::{builtin_db, load_crystal_db, CrystalDef};
use crate::error::{Error, Result};
use crate::geometry::{LabConfig, RotationMode};
use crate::sweep::{
    frame_file_name, render_map, render_svg, spots_csv, spots_json, sweep_alpha, AlphaSpec, Canvas, Execution, Frame,
    Range, SweepSpec,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rotation {
    /// Pump 4 along the face normal; `α` is a free parameter.
    #[default]
    NormalIncidence,
    /// `α` is reached by rotating a crystal cut at its nominal angle.
    Tilted,
}

impl From<Rotation> for RotationMode {
    fn from(r: Rotation) -> Self {
        match r {
            Rotation::NormalIncidence => RotationMode::NormalIncidence,
            Rotation::Tilted => RotationMode::Tilted { rho: 0.0 },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Outputs {
    pub csv: bool,
    pub json: bool,
    pub frames: bool,
    pub svg: bool,
}

impl Default for Outputs {
    fn default() -> Self {
        Outputs { csv: true, json: true, frames: true, svg: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Crystal database file; the built-in database when absent. Relative
    /// paths resolve against the config file's directory.
    pub crystal_db: Option<PathBuf>,
    pub crystal: String,
    pub lambda4_nm: f64,
    pub lambda5_nm: f64,
    pub theta5_ext_deg: f64,
    pub alpha_deg: AlphaSpec,
    pub lambda1_nm: Range,
    pub rotation: Rotation,
    pub screen_mm: f64,
    pub canvas: Canvas,
    pub outputs: Outputs,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            crystal_db: None,
            crystal: "BBO".into(),
            lambda4_nm: 349.0,
            lambda5_nm: 1047.0,
            theta5_ext_deg: -34.8,
            alpha_deg: AlphaSpec::Fixed(34.5),
            lambda1_nm: Range { start: 420.0, stop: 1400.0, step: 10.0 },
            rotation: Rotation::NormalIncidence,
            screen_mm: 100.0,
            canvas: Canvas { width: 320, height: 240, mm_per_px: 0.25 },
            outputs: Outputs::default(),
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidSpec(format!("run config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut cfg = Self::parse(&fs::read_to_string(path)?)?;
        if let (Some(db), Some(dir)) = (&cfg.crystal_db, path.parent()) {
            if db.is_relative() {
                cfg.crystal_db = Some(dir.join(db));
            }
        }
        Ok(cfg)
    }

    pub fn sweep_spec(&self) -> SweepSpec {
        SweepSpec {
            lambda4_nm: self.lambda4_nm,
            lambda5_nm: self.lambda5_nm,
            theta5_ext_deg: self.theta5_ext_deg,
            alpha_deg: self.alpha_deg,
            lambda1_nm: self.lambda1_nm,
            lab: LabConfig { screen_distance: self.screen_mm, rotation_mode: self.rotation.into() },
        }
    }

    pub fn resolve_crystal(&self) -> Result<CrystalDef> {
        let mut db = match &self.crystal_db {
            Some(p) => load_crystal_db(p)?,
            None => builtin_db(),
        };
        db.remove(&self.crystal).ok_or_else(|| Error::UnknownCrystal(self.crystal.clone()))
    }
}

/// Everything one sweep run produces, in memory.
#[derive(Debug, Clone)]
pub struct SweepArtifacts {
    pub frames: Vec<Frame>,
    pub csv: Option<String>,
    pub json: Option<String>,
    /// `(file name, PPM bytes)` per frame.
    pub images: Vec<(String, Vec<u8>)>,
    pub svgs: Vec<(String, String)>,
    /// Spots that fell outside the canvas, summed over frames.
    pub clipped: usize,
}

pub fn run_sweep(cfg: &RunConfig, exec: Execution) -> Result<SweepArtifacts> {
    let crystal = cfg.resolve_crystal()?;
    if cfg.outputs.frames || cfg.outputs.svg {
        cfg.canvas.validate()?;
    }
    let frames = sweep_alpha(&crystal, &cfg.sweep_spec(), exec)?;
    let mut images = Vec::new();
    let mut svgs = Vec::new();
    let mut clipped = 0;
    for (i, f) in frames.iter().enumerate() {
        let spots = f.spots();
        if cfg.outputs.frames {
            let img = render_map(&spots, &cfg.canvas)?;
            clipped += img.clipped;
            images.push((frame_file_name(i), img.to_ppm()));
        }
        if cfg.outputs.svg {
            svgs.push((format!("frame_{i:04}.svg"), render_svg(&spots, &cfg.canvas)?));
        }
    }
    if clipped > 0 {
        log::info!("{clipped} spots fell outside the canvas");
    }
    Ok(SweepArtifacts {
        csv: cfg.outputs.csv.then(|| spots_csv(&frames)),
        json: cfg.outputs.json.then(|| spots_json(&frames)),
        frames,
        images,
        svgs,
        clipped,
    })
}

impl SweepArtifacts {
    /// Writes `spots.csv`, `spots.json` and the frame images into `dir`;
    /// returns the paths written.
    pub fn write_to(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        let mut put = |name: &str, bytes: &[u8]| -> Result<()> {
            let p = dir.join(name);
            fs::write(&p, bytes)?;
            written.push(p);
            Ok(())
        };
        if let Some(csv) = &self.csv {
            put("spots.csv", csv.as_bytes())?;
        }
        if let Some(json) = &self.json {
            put("spots.json", json.as_bytes())?;
        }
        for (name, bytes) in &self.images {
            put(name, bytes)?;
        }
        for (name, svg) in &self.svgs {
            put(name, svg.as_bytes())?;
        }
        Ok(written)
    }
}
