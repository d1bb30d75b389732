//! Phase matching of interlinked down- and upconversion in negative uniaxial
//! crystals, projection of the generated fields onto a screen, and
//! photon-number correlation statistics of the resulting triplets.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod dispersion;
pub mod error;
pub mod fit;
pub mod geometry;
pub mod pmcore;
pub mod stats;
pub mod sweep;

pub use dispersion::{CrystalDef, OpticalRay, Polarization};
pub use error::{Error, Result};
pub use geometry::{LabConfig, PumpFrame, RotationMode, ScreenSpot};
pub use pmcore::{Branch, Diagnostic, Field, Mirror, PmQuery, PmSolution, Root, SolveOutcome};
pub use stats::{PairStatistics, TripletModel, TripletRecord};
pub use sweep::{AlphaSpec, Canvas, Execution, Frame, Range, SpotRow, SweepSpec};
