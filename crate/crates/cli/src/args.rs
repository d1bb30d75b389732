use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use triplet_core::config::{Rotation, RunConfig};
use triplet_core::{AlphaSpec, Range};

use crate::{CliError, CliResult};

/// Interlinked down/upconversion phase matching in BBO: solve, sweep,
/// render and analyze photon-number triplets. Angles are in degrees,
/// wavelengths in nm, screen distances in mm.
#[derive(Debug, Parser)]
#[command(name = "triplets", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the interlinked phase matching for one signal wavelength.
    Solve(SolveArgs),
    /// Sample the single-process downconversion cone.
    Cone(ConeArgs),
    /// Sweep λ1 (and optionally α), writing CSV, JSON and frame images.
    Sweep(SweepArgs),
    /// Render a spots CSV onto a screen image (PPM, or SVG for a .svg path).
    Render(RenderArgs),
    /// Simulate shot-by-shot triplet photon counts.
    Simulate(SimulateArgs),
    /// Print the lagged correlation Γ(k) of a records CSV as `k,gamma`.
    Correlate(CorrelateArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum RotationArg {
    NormalIncidence,
    Tilted,
}

impl From<RotationArg> for Rotation {
    fn from(r: RotationArg) -> Self {
        match r {
            RotationArg::NormalIncidence => Rotation::NormalIncidence,
            RotationArg::Tilted => Rotation::Tilted,
        }
    }
}

/// Crystal and pump geometry shared by the optics commands.
#[derive(Debug, Clone, Args)]
pub struct PumpArgs {
    /// JSON run config; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Crystal database JSON (built-in BBO when absent).
    #[arg(long)]
    pub crystal_db: Option<PathBuf>,
    /// Crystal name in the database.
    #[arg(long)]
    pub crystal: Option<String>,
    /// Downconversion pump wavelength.
    #[arg(long)]
    pub lambda4_nm: Option<f64>,
    /// Upconversion pump wavelength.
    #[arg(long)]
    pub lambda5_nm: Option<f64>,
    /// External angle of pump 5 to pump 4.
    #[arg(long, allow_hyphen_values = true)]
    pub theta5_ext_deg: Option<f64>,
    /// How the tuning angle is realized.
    #[arg(long, value_enum)]
    pub rotation: Option<RotationArg>,
    /// Crystal-to-screen distance.
    #[arg(long)]
    pub screen_mm: Option<f64>,
}

impl PumpArgs {
    /// Config file (or defaults) with flag overrides applied.
    pub fn resolve(&self) -> CliResult<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(db) = &self.crystal_db {
            cfg.crystal_db = Some(db.clone());
        }
        if let Some(c) = &self.crystal {
            cfg.crystal = c.clone();
        }
        if let Some(v) = self.lambda4_nm {
            cfg.lambda4_nm = v;
        }
        if let Some(v) = self.lambda5_nm {
            cfg.lambda5_nm = v;
        }
        if let Some(v) = self.theta5_ext_deg {
            cfg.theta5_ext_deg = v;
        }
        if let Some(r) = self.rotation {
            cfg.rotation = r.into();
        }
        if let Some(v) = self.screen_mm {
            if !(v > 0.0) {
                return Err(CliError::Usage(format!("--screen-mm must be positive, got {v}")));
            }
            cfg.screen_mm = v;
        }
        Ok(cfg)
    }
}

/// Parses `VALUE` or `START:STOP:STEP`.
pub fn parse_range(s: &str) -> Result<Range, String> {
    let nums: Result<Vec<f64>, _> = s.split(':').map(|p| p.trim().parse::<f64>()).collect();
    let nums = nums.map_err(|e| format!("`{s}`: {e}"))?;
    let r = match nums[..] {
        [v] => Range::single(v),
        [start, stop, step] => Range { start, stop, step },
        _ => return Err(format!("`{s}`: expected VALUE or START:STOP:STEP")),
    };
    r.validate("range").map_err(|e| e.to_string())?;
    Ok(r)
}

fn parse_triple(s: &str) -> Result<[f64; 3], String> {
    let v: Result<Vec<f64>, _> = s.split(',').map(|p| p.trim().parse::<f64>()).collect();
    match v.map_err(|e| format!("`{s}`: {e}"))?[..] {
        [a, b, c] => Ok([a, b, c]),
        _ => Err(format!("`{s}`: expected three comma-separated values")),
    }
}

pub fn alpha_spec(r: Range) -> AlphaSpec {
    if r.count() == 1 {
        AlphaSpec::Fixed(r.start)
    } else {
        AlphaSpec::Range(r)
    }
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub pump: PumpArgs,
    /// Tuning angle (pump 4 to the optical axis).
    #[arg(long, allow_hyphen_values = true, conflicts_with = "fit_theta1_ext_deg")]
    pub alpha_deg: Option<f64>,
    /// Fit α within ±5° of the cut angle so that field 1 leaves at this
    /// external angle.
    #[arg(long, allow_hyphen_values = true)]
    pub fit_theta1_ext_deg: Option<f64>,
    /// Signal (field 1) wavelength.
    #[arg(long, default_value_t = 632.8)]
    pub lambda1_nm: f64,
    /// Print JSON instead of a table.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct ConeArgs {
    #[command(flatten)]
    pub pump: PumpArgs,
    /// Tuning angle (pump 4 to the optical axis).
    #[arg(long, allow_hyphen_values = true)]
    pub alpha_deg: Option<f64>,
    /// Signal (field 1) wavelength.
    #[arg(long, default_value_t = 632.8)]
    pub lambda1_nm: f64,
    /// Azimuthal samples around the cone.
    #[arg(long, default_value_t = 360)]
    pub samples: usize,
    /// Output CSV file (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Print JSON instead of CSV.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub pump: PumpArgs,
    /// Tuning angle, `VALUE` or `START:STOP:STEP`.
    #[arg(long, value_parser = parse_range, allow_hyphen_values = true)]
    pub alpha_deg: Option<Range>,
    /// Signal wavelengths, `VALUE` or `START:STOP:STEP`.
    #[arg(long, value_parser = parse_range)]
    pub lambda1_nm: Option<Range>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Also write spots.json.
    #[arg(long)]
    pub json: bool,
    /// Run on one thread (output is identical either way).
    #[arg(long)]
    pub serial: bool,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    /// Spots CSV as written by `sweep`.
    #[arg(long)]
    pub csv: PathBuf,
    /// Output image; `.svg` selects SVG, anything else PPM.
    #[arg(long)]
    pub out: PathBuf,
    /// JSON run config supplying the canvas.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Only rows at this tuning angle.
    #[arg(long, allow_hyphen_values = true)]
    pub alpha_deg: Option<f64>,
    /// Canvas width in pixels.
    #[arg(long)]
    pub width: Option<usize>,
    /// Canvas height in pixels.
    #[arg(long)]
    pub height: Option<usize>,
    /// Millimetres of screen per pixel.
    #[arg(long)]
    pub mm_per_px: Option<f64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum StatisticsArg {
    Poisson,
    Thermal,
    Multithermal,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Triplet model JSON; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Mean primary pairs per shot.
    #[arg(long)]
    pub mean_pairs: Option<f64>,
    /// Pair-number statistics per shot.
    #[arg(long, value_enum)]
    pub statistics: Option<StatisticsArg>,
    /// Mode count for multithermal statistics.
    #[arg(long)]
    pub modes: Option<f64>,
    /// Probability that a field-3 photon is upconverted.
    #[arg(long)]
    pub conversion_prob: Option<f64>,
    /// Detection efficiencies `η1,η2,η3`.
    #[arg(long, value_parser = parse_triple)]
    pub eta: Option<[f64; 3]>,
    /// Mean background counts `b1,b2,b3`.
    #[arg(long, value_parser = parse_triple)]
    pub background: Option<[f64; 3]>,
    /// Number of shots.
    #[arg(long, default_value_t = 10_000)]
    pub shots: usize,
    /// RNG seed; equal seeds give identical records.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output records CSV (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CorrelateArgs {
    /// Records CSV (`shot,m1,m2,m3`).
    #[arg(long)]
    pub records: PathBuf,
    /// Largest shot lag.
    #[arg(long, default_value_t = 5)]
    pub max_lag: usize,
    /// Output CSV file (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Print JSON instead of CSV.
    #[arg(long)]
    pub json: bool,
}
