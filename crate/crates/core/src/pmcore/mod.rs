//! Closed-form solution of two simultaneously phase-matched type-I processes,
//! downconversion `4(e) → 1(o) + 3(o)` and upconversion `3(o) + 5(o) → 2(e)`.
//!
//! The crystal frame has pump 4 along `z` (the face normal), the optical axis
//! in the `(y, z)` plane at the tuning angle `α` from `z`, and pump 5 in the
//! same plane at `ϑ₅`. With `λ₁`, `ϑ₅` and `α` fixed, eliminating the other
//! unknowns leaves a quadratic in `tanϑ₃`; every real root is back-substituted
//! for both signs of the out-of-plane angle `β₃` and kept only if the original
//! six momentum equations hold.

mod cone;
mod quadratic;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dispersion::{wavenumber, CrystalDef, OpticalRay, Polarization};
use crate::error::{Error, Result};

pub use cone::{collinear_alpha, downconversion_cone, verify_downconversion, Cone, ConePoint};
pub use quadratic::{solve_quadratic, QuadraticRoots, Root};

/// Accepted residual of the momentum equations, relative to `k₄`.
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;
/// Accepted relative error of energy matching.
pub const ENERGY_TOLERANCE: f64 = 1e-12;
/// Out-of-plane angles beyond this are flagged as grazing.
pub const GRAZING_BETA: f64 = 60.0 * std::f64::consts::PI / 180.0;

/// Solver input. Pump wavelengths, tuning angle and internal pump-5 angle are
/// fixed; `lambda1` is the free spectral parameter.
#[derive(Debug, Clone, Copy)]
pub struct PmQuery<'c> {
    pub crystal: &'c CrystalDef,
    pub lambda4: f64,
    pub lambda5: f64,
    /// Angle between pump 4 and the optical axis, radians.
    pub alpha: f64,
    /// Internal in-plane angle of pump 5 to pump 4, radians.
    pub theta5: f64,
    pub lambda1: f64,
}

/// Wavenumbers (rad/µm) and the auxiliary constants of the elimination.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Derived {
    pub k1: f64,
    pub k3: f64,
    pub k4: f64,
    pub k5: f64,
    /// `cosβ₃ cosϑ₃ = (k₄² + k₃² − k₁²) / (2 k₃ k₄)`.
    pub idler_projection: f64,
    /// `1/k²₂,o − 1/k²₂,e`.
    pub g2: f64,
    /// `1/k²₂,e`.
    pub l2: f64,
}

impl<'c> PmQuery<'c> {
    /// `1/λ₃ = 1/λ₄ − 1/λ₁`.
    pub fn lambda3(&self) -> f64 {
        1.0 / (1.0 / self.lambda4 - 1.0 / self.lambda1)
    }

    /// `1/λ₂ = 1/λ₃ + 1/λ₅`.
    pub fn lambda2(&self) -> f64 {
        1.0 / (1.0 / self.lambda4 - 1.0 / self.lambda1 + 1.0 / self.lambda5)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("λ1", self.lambda1), ("λ4", self.lambda4), ("λ5", self.lambda5)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Domain(format!("{name} must be positive, got {v} nm")));
            }
        }
        if !(1.0 / self.lambda4 > 1.0 / self.lambda1) {
            return Err(Error::Domain(format!(
                "λ1 = {} nm must be longer than λ4 = {} nm",
                self.lambda1, self.lambda4
            )));
        }
        if !(self.alpha.is_finite() && self.theta5.abs() < std::f64::consts::FRAC_PI_2) {
            return Err(Error::Domain("α must be finite and |ϑ5| < 90°".into()));
        }
        for lambda in [self.lambda1, self.lambda4, self.lambda5, self.lambda3(), self.lambda2()] {
            self.crystal.n_ordinary(lambda)?;
        }
        Ok(())
    }

    pub fn derived(&self) -> Result<Derived> {
        let c = self.crystal;
        let k1 = wavenumber(self.lambda1, c.n_ordinary(self.lambda1)?)?;
        let lambda3 = self.lambda3();
        let k3 = wavenumber(lambda3, c.n_ordinary(lambda3)?)?;
        let k4 = wavenumber(self.lambda4, c.n_extraordinary_at_angle(self.lambda4, self.alpha)?)?;
        let k5 = wavenumber(self.lambda5, c.n_ordinary(self.lambda5)?)?;
        let lambda2 = self.lambda2();
        let k2o = wavenumber(lambda2, c.n_ordinary(lambda2)?)?;
        let k2e = wavenumber(lambda2, c.n_extraordinary(lambda2)?)?;
        Ok(Derived {
            k1,
            k3,
            k4,
            k5,
            idler_projection: (k4 * k4 + k3 * k3 - k1 * k1) / (2.0 * k3 * k4),
            g2: 1.0 / (k2o * k2o) - 1.0 / (k2e * k2e),
            l2: 1.0 / (k2e * k2e),
        })
    }
}

/// Coefficients of `a tan²ϑ₃ + b tanϑ₃ + c = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

pub fn quadratic_coefficients(q: &PmQuery, d: &Derived) -> Coefficients {
    let Derived { k3, k5, g2, l2, .. } = *d;
    let a_ = d.idler_projection;
    let (sa, ca) = q.alpha.sin_cos();
    let (s5, c5) = q.theta5.sin_cos();
    let z = a_ * k3 + k5 * c5;

    let a = g2 * a_ * a_ * k3 * k3 * sa * sa;
    let b = 2.0 * g2 * a_ * k3 * z * sa * ca + 2.0 * g2 * a_ * k3 * k5 * s5 * sa * sa + 2.0 * l2 * a_ * k3 * k5 * s5;
    let c = g2 * z * z * (ca * ca - sa * sa)
        + 2.0 * g2 * k5 * s5 * z * sa * ca
        + g2 * (a_ * a_ * k3 * k3 + k5 * k5 + 2.0 * a_ * k3 * k5 * c5) * sa * sa
        + l2 * (k3 * k3 + k5 * k5 + 2.0 * a_ * k3 * k5 * c5)
        - 1.0;
    Coefficients { a, b, c }
}

/// Sign of the out-of-plane angles: `Up` has `β₃ ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mirror {
    Up,
    Down,
}

impl Mirror {
    fn sign(self) -> f64 {
        match self {
            Mirror::Up => 1.0,
            Mirror::Down => -1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Mirror::Up => Mirror::Down,
            Mirror::Down => Mirror::Up,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Branch {
    pub root: Root,
    pub mirror: Mirror,
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = match self.root {
            Root::Plus => "+",
            Root::Minus => "-",
        };
        let m = match self.mirror {
            Mirror::Up => "up",
            Mirror::Down => "down",
        };
        write!(f, "{r}/{m}")
    }
}

/// A phase-matched configuration of all five fields in the crystal frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PmSolution {
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
    pub theta1: f64,
    pub theta2: f64,
    pub theta3: f64,
    pub theta5: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub beta3: f64,
    pub alpha: f64,
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub k4: f64,
    pub k5: f64,
    /// Angle of `k₂` to the optical axis.
    pub phi: f64,
    pub branch: Branch,
    pub residual: [f64; 6],
    /// Some `|β|` exceeds [`GRAZING_BETA`].
    pub grazing: bool,
}

/// One of the five interacting fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Field {
    F1,
    F2,
    F3,
    F4,
    F5,
}

impl Field {
    pub fn number(self) -> u8 {
        match self {
            Field::F1 => 1,
            Field::F2 => 2,
            Field::F3 => 3,
            Field::F4 => 4,
            Field::F5 => 5,
        }
    }

    pub fn from_number(n: u8) -> Option<Self> {
        Some(match n {
            1 => Field::F1,
            2 => Field::F2,
            3 => Field::F3,
            4 => Field::F4,
            5 => Field::F5,
            _ => return None,
        })
    }

    pub fn polarization(self) -> Polarization {
        match self {
            Field::F2 | Field::F4 => Polarization::Extraordinary,
            _ => Polarization::Ordinary,
        }
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

impl PmSolution {
    /// Same solution with every `β` negated.
    pub fn mirrored(&self) -> Self {
        PmSolution {
            beta1: -self.beta1,
            beta2: -self.beta2,
            beta3: -self.beta3,
            branch: Branch { root: self.branch.root, mirror: self.branch.mirror.flipped() },
            ..self.clone()
        }
    }

    pub fn ray(&self, field: Field, lambda4: f64, lambda5: f64) -> OpticalRay {
        let (wavelength, theta, beta) = match field {
            Field::F1 => (self.lambda1, self.theta1, self.beta1),
            Field::F2 => (self.lambda2, self.theta2, self.beta2),
            Field::F3 => (self.lambda3, self.theta3, self.beta3),
            Field::F4 => (lambda4, 0.0, 0.0),
            Field::F5 => (lambda5, self.theta5, 0.0),
        };
        OpticalRay { wavelength, polarization: field.polarization(), theta, beta }
    }

    pub fn max_residual(&self) -> f64 {
        max_abs(&self.residual)
    }
}

/// Largest magnitude, with NaN treated as infinite.
pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().map(|x| if x.is_nan() { f64::INFINITY } else { x.abs() }).fold(0.0, f64::max)
}

/// Why a query produced no solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Diagnostic {
    NoRealRoots,
    DegenerateConfiguration,
    DomainRejected,
    ResidualRejected,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Diagnostic::NoRealRoots => "no real roots",
            Diagnostic::DegenerateConfiguration => "degenerate configuration (a = b = 0)",
            Diagnostic::DomainRejected => "roots rejected by domain checks",
            Diagnostic::ResidualRejected => "roots rejected by residual check",
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveOutcome {
    pub solutions: Vec<PmSolution>,
    pub rejected_domain: usize,
    pub rejected_residual: usize,
    /// Set exactly when `solutions` is empty.
    pub diagnostic: Option<Diagnostic>,
}

impl SolveOutcome {
    fn empty(diagnostic: Diagnostic) -> Self {
        SolveOutcome { diagnostic: Some(diagnostic), ..Default::default() }
    }
}

enum Candidate {
    Accepted(PmSolution),
    Domain,
    Residual,
}

/// All phase-matched solutions for `q`, ordered plus before minus and up
/// before down.
pub fn solve_interlinked(q: &PmQuery) -> Result<SolveOutcome> {
    q.validate()?;
    let d = q.derived()?;
    let Coefficients { a, b, c } = quadratic_coefficients(q, &d);
    let roots = match solve_quadratic(a, b, c) {
        QuadraticRoots::None => return Ok(SolveOutcome::empty(Diagnostic::NoRealRoots)),
        QuadraticRoots::Degenerate => return Ok(SolveOutcome::empty(Diagnostic::DegenerateConfiguration)),
        QuadraticRoots::Roots(r) => r,
    };

    let mut out = SolveOutcome::default();
    for (root, tan_theta3) in roots {
        for mirror in [Mirror::Up, Mirror::Down] {
            match back_substitute(q, &d, tan_theta3, Branch { root, mirror }) {
                Candidate::Accepted(s) => {
                    // β₃ = 0 is its own mirror image
                    let duplicate = mirror == Mirror::Down && s.beta3 == 0.0;
                    if !duplicate {
                        out.solutions.push(s);
                    }
                }
                Candidate::Domain => out.rejected_domain += 1,
                Candidate::Residual => out.rejected_residual += 1,
            }
        }
    }
    if out.solutions.is_empty() {
        out.diagnostic =
            Some(if out.rejected_residual > 0 { Diagnostic::ResidualRejected } else { Diagnostic::DomainRejected });
    }
    Ok(out)
}

fn back_substitute(q: &PmQuery, d: &Derived, tan_theta3: f64, branch: Branch) -> Candidate {
    let Derived { k1, k3, k4, k5, .. } = *d;
    let proj = d.idler_projection;
    if !tan_theta3.is_finite() {
        return Candidate::Domain;
    }
    let theta3 = tan_theta3.atan();
    // cosβ₃ = A / cosϑ₃
    let cos_beta3 = proj * tan_theta3.hypot(1.0);
    if !(cos_beta3 > 0.0) || cos_beta3 > 1.0 + 4.0 * f64::EPSILON {
        return Candidate::Domain;
    }
    let cos_beta3 = cos_beta3.min(1.0);
    let sin_beta3 = branch.mirror.sign() * ((1.0 - cos_beta3) * (1.0 + cos_beta3)).sqrt();
    let beta3 = sin_beta3.atan2(cos_beta3);

    // field 1 from k₁ = k₄ẑ − k₃
    let sin_beta1 = -k3 * sin_beta3 / k1;
    if sin_beta1.abs() > 1.0 {
        return Candidate::Domain;
    }
    let beta1 = sin_beta1.asin();
    let y1 = -k3 * proj * tan_theta3;
    let z1 = k4 - k3 * proj;
    if !(z1 > 0.0) || k1 * k1 - (k3 * sin_beta3).powi(2) <= 0.0 {
        return Candidate::Domain;
    }
    let theta1 = y1.atan2(z1);

    // field 2 from k₂ = k₃ + k₅
    let (s5, c5) = q.theta5.sin_cos();
    let x2 = k3 * sin_beta3;
    let y2 = k3 * proj * tan_theta3 + k5 * s5;
    let z2 = k3 * proj + k5 * c5;
    if !(z2 > 0.0) {
        return Candidate::Domain;
    }
    let k2_vec = (x2 * x2 + y2 * y2 + z2 * z2).sqrt();
    let theta2 = y2.atan2(z2);
    let beta2 = (x2 / k2_vec).asin();
    let cos2_beta2 = (y2 * y2 + z2 * z2) / (k2_vec * k2_vec);
    // cos²(ϑ₂ − α) implied by the index ellipse
    let cos2_rel = (1.0 - d.l2 * k2_vec * k2_vec) / (d.g2 * k2_vec * k2_vec * cos2_beta2);
    let slack = 1e-9;
    if !(-slack..=1.0 + slack).contains(&cos2_rel) {
        return Candidate::Domain;
    }

    let lambda2 = q.lambda2();
    let cos_phi = (beta2.cos() * (theta2 - q.alpha).cos()).clamp(-1.0, 1.0);
    let phi = cos_phi.acos();
    let k2 = match q.crystal.n_extraordinary_at_angle(lambda2, phi).and_then(|n| wavenumber(lambda2, n)) {
        Ok(k) => k,
        Err(_) => return Candidate::Domain,
    };

    let mut s = PmSolution {
        lambda1: q.lambda1,
        lambda2,
        lambda3: q.lambda3(),
        theta1,
        theta2,
        theta3,
        theta5: q.theta5,
        beta1,
        beta2,
        beta3,
        alpha: q.alpha,
        k1,
        k2,
        k3,
        k4,
        k5,
        phi,
        branch,
        residual: [0.0; 6],
        grazing: [beta1, beta2, beta3].iter().any(|b| b.abs() > GRAZING_BETA),
    };
    s.residual = verify_pm(&s, q);
    if s.max_residual() < RESIDUAL_TOLERANCE && k2_consistency(&s, q) < RESIDUAL_TOLERANCE {
        Candidate::Accepted(s)
    } else {
        Candidate::Residual
    }
}

/// Left-minus-right of the six momentum equations, each divided by `k₄`.
///
/// Wavenumbers are recomputed from the query and the solution's angles
/// (including `k₂` through its angle to the optical axis); the solution's
/// stored wavenumbers are not used.
pub fn verify_pm(s: &PmSolution, q: &PmQuery) -> [f64; 6] {
    let c = q.crystal;
    let k = |lambda: f64, n: Result<f64>| n.and_then(|n| wavenumber(lambda, n)).unwrap_or(f64::NAN);
    let lambda3 = q.lambda3();
    let lambda2 = q.lambda2();
    let k1 = k(q.lambda1, c.n_ordinary(q.lambda1));
    let k3 = k(lambda3, c.n_ordinary(lambda3));
    let k5 = k(q.lambda5, c.n_ordinary(q.lambda5));
    let k4 = k(q.lambda4, c.n_extraordinary_at_angle(q.lambda4, q.alpha));
    let cos_phi = (s.beta2.cos() * (s.theta2 - q.alpha).cos()).clamp(-1.0, 1.0);
    let k2 = k(lambda2, c.n_extraordinary_at_angle(lambda2, cos_phi.acos()));

    let (sb1, cb1) = s.beta1.sin_cos();
    let (sb2, cb2) = s.beta2.sin_cos();
    let (sb3, cb3) = s.beta3.sin_cos();
    let (st1, ct1) = s.theta1.sin_cos();
    let (st2, ct2) = s.theta2.sin_cos();
    let (st3, ct3) = s.theta3.sin_cos();
    let (st5, ct5) = q.theta5.sin_cos();
    [
        k1 * sb1 + k3 * sb3,
        k1 * cb1 * st1 + k3 * cb3 * st3,
        k1 * cb1 * ct1 + k3 * cb3 * ct3 - k4,
        k2 * sb2 - k3 * sb3,
        k2 * cb2 * st2 - k3 * cb3 * st3 - k5 * st5,
        k2 * cb2 * ct2 - k3 * cb3 * ct3 - k5 * ct5,
    ]
    .map(|r| r / k4)
}

/// `|k₂ − [G₂cos²(ϑ₂−α)cos²β₂ + L₂]^(−1/2)| / k₂` using the stored `k₂`.
pub fn k2_consistency(s: &PmSolution, q: &PmQuery) -> f64 {
    let Ok(d) = q.derived() else {
        return f64::INFINITY;
    };
    let c = (s.theta2 - q.alpha).cos() * s.beta2.cos();
    let expected = (d.g2 * c * c + d.l2).sqrt().recip();
    (s.k2 - expected).abs() / s.k2
}

/// Relative energy-matching errors `(ω₄ − ω₁ − ω₃)/ω₄` and `(ω₂ − ω₃ − ω₅)/ω₂`.
pub fn energy_mismatch(s: &PmSolution, q: &PmQuery) -> (f64, f64) {
    let w = |l: f64| 1.0 / l;
    (
        (w(q.lambda4) - w(s.lambda1) - w(s.lambda3)) / w(q.lambda4),
        (w(s.lambda2) - w(s.lambda3) - w(q.lambda5)) / w(s.lambda2),
    )
}
