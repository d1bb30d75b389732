use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("wavelength {wavelength_nm} nm outside the transparency range [{min_nm}, {max_nm}] nm of {crystal}")]
    OutOfTransparency { crystal: String, wavelength_nm: f64, min_nm: f64, max_nm: f64 },

    #[error("invalid argument: {0}")]
    Domain(String),

    #[error("crystal database parse error: {0}")]
    DatabaseParse(#[from] serde_json::Error),

    #[error("crystal record `{record}` is invalid: {reason}")]
    InvalidCrystal { record: String, reason: String },

    #[error("unknown crystal `{0}`")]
    UnknownCrystal(String),

    #[error("total internal reflection at the exit face for field {field}: sine {sine:.6} exceeds 1")]
    TotalInternalReflection { field: String, sine: f64 },

    #[error("fixed-point refraction of pump 4 did not converge after {0} iterations")]
    NoConvergence(usize),

    #[error("correlation undefined: zero variance in {0}")]
    ZeroVariance(&'static str),

    #[error("invalid sweep specification: {0}")]
    InvalidSpec(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}
