//! Shared helpers for integration tests: a brute-force (ϑ₃, β₃) oracle and
//! random query generation.

#![allow(dead_code)]

use std::f64::consts::PI;

use rand::Rng;
use triplet_core::dispersion::wavenumber;
use triplet_core::{CrystalDef, PmQuery};

const GRID: usize = 200;
const NEWTON_STEPS: usize = 50;
const FD_STEP: f64 = 1e-7;

/// A root found by the oracle: field-3 and field-1/2 directions.
#[derive(Debug, Clone, Copy)]
pub struct OracleRoot {
    pub theta3: f64,
    pub beta3: f64,
    pub theta1: f64,
    pub beta1: f64,
    pub theta2: f64,
    pub beta2: f64,
}

struct Problem {
    k1: f64,
    k3: f64,
    k4: f64,
    k5: [f64; 3],
    lambda2: f64,
    no2: f64,
    ne2: f64,
    axis: [f64; 3],
}

fn dir(theta: f64, beta: f64) -> [f64; 3] {
    [beta.sin(), beta.cos() * theta.sin(), beta.cos() * theta.cos()]
}

fn norm(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

impl Problem {
    fn new(q: &PmQuery) -> Self {
        let c = q.crystal;
        let lambda3 = 1.0 / (1.0 / q.lambda4 - 1.0 / q.lambda1);
        let lambda2 = 1.0 / (1.0 / lambda3 + 1.0 / q.lambda5);
        let n4 = {
            let (no, ne) = (c.n_ordinary(q.lambda4).unwrap(), c.n_extraordinary(q.lambda4).unwrap());
            let (s, co) = q.alpha.sin_cos();
            1.0 / (co * co / (no * no) + s * s / (ne * ne)).sqrt()
        };
        let k5 = wavenumber(q.lambda5, c.n_ordinary(q.lambda5).unwrap()).unwrap();
        Problem {
            k1: wavenumber(q.lambda1, c.n_ordinary(q.lambda1).unwrap()).unwrap(),
            k3: wavenumber(lambda3, c.n_ordinary(lambda3).unwrap()).unwrap(),
            k4: wavenumber(q.lambda4, n4).unwrap(),
            k5: dir(q.theta5, 0.0).map(|x| k5 * x),
            lambda2,
            no2: c.n_ordinary(lambda2).unwrap(),
            ne2: c.n_extraordinary(lambda2).unwrap(),
            axis: [0.0, q.alpha.sin(), q.alpha.cos()],
        }
    }

    fn vectors(&self, theta3: f64, beta3: f64) -> ([f64; 3], [f64; 3], [f64; 3]) {
        let v3 = dir(theta3, beta3).map(|x| self.k3 * x);
        let v1 = [-v3[0], -v3[1], self.k4 - v3[2]];
        let v2 = [v3[0] + self.k5[0], v3[1] + self.k5[1], v3[2] + self.k5[2]];
        (v1, v2, v3)
    }

    /// Downconversion and upconversion magnitude mismatches, relative to k₄.
    fn residual(&self, theta3: f64, beta3: f64) -> [f64; 2] {
        let (v1, v2, _) = self.vectors(theta3, beta3);
        let m2 = norm(v2);
        let cos_phi = (v2[1] * self.axis[1] + v2[2] * self.axis[2]) / m2;
        let sin2 = 1.0 - cos_phi * cos_phi;
        let n2 = 1.0 / (cos_phi * cos_phi / (self.no2 * self.no2) + sin2 / (self.ne2 * self.ne2)).sqrt();
        let k2 = 2.0 * PI * n2 / (self.lambda2 * 1e-3);
        [(norm(v1) - self.k1) / self.k4, (m2 - k2) / self.k4]
    }

    fn newton(&self, mut x: [f64; 2]) -> Option<[f64; 2]> {
        for _ in 0..NEWTON_STEPS {
            let f = self.residual(x[0], x[1]);
            if f[0].abs().max(f[1].abs()) < 1e-15 {
                break;
            }
            let fa = self.residual(x[0] + FD_STEP, x[1]);
            let fb = self.residual(x[0], x[1] + FD_STEP);
            let j = [
                [(fa[0] - f[0]) / FD_STEP, (fb[0] - f[0]) / FD_STEP],
                [(fa[1] - f[1]) / FD_STEP, (fb[1] - f[1]) / FD_STEP],
            ];
            let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
            if det == 0.0 || !det.is_finite() {
                return None;
            }
            let dx = (f[0] * j[1][1] - f[1] * j[0][1]) / det;
            let dy = (j[0][0] * f[1] - j[1][0] * f[0]) / det;
            x = [x[0] - dx, x[1] - dy];
        }
        let f = self.residual(x[0], x[1]);
        (f[0].abs().max(f[1].abs()) < 1e-13).then_some(x)
    }
}

/// Scans a 200×200 (ϑ₃, β₃) grid around the downconversion cone, refines each
/// local minimum of the squared residual by Newton iteration on a
/// finite-difference Jacobian, and deduplicates.
pub fn oracle_solve(q: &PmQuery) -> Vec<OracleRoot> {
    let p = Problem::new(q);
    let cos_psi = (p.k4 * p.k4 + p.k3 * p.k3 - p.k1 * p.k1) / (2.0 * p.k3 * p.k4);
    if cos_psi.is_nan() || cos_psi.abs() > 1.0 {
        return Vec::new();
    }
    let half = 1.05 * cos_psi.acos() + 1e-6;
    let at = |i: usize| -half + 2.0 * half * i as f64 / (GRID - 1) as f64;
    let mut score = vec![0.0; GRID * GRID];
    for i in 0..GRID {
        for j in 0..GRID {
            let f = p.residual(at(i), at(j));
            score[i * GRID + j] = f[0] * f[0] + f[1] * f[1];
        }
    }
    let mut roots: Vec<[f64; 2]> = Vec::new();
    for i in 0..GRID {
        for j in 0..GRID {
            let s = score[i * GRID + j];
            let mut is_min = s.is_finite();
            for di in -1i64..=1 {
                for dj in -1i64..=1 {
                    let (a, b) = (i as i64 + di, j as i64 + dj);
                    if (di, dj) != (0, 0) && a >= 0 && b >= 0 && (a as usize) < GRID && (b as usize) < GRID {
                        is_min &= s <= score[a as usize * GRID + b as usize];
                    }
                }
            }
            if !is_min {
                continue;
            }
            if let Some(x) = p.newton([at(i), at(j)]) {
                if !roots.iter().any(|r| (r[0] - x[0]).abs() < 1e-8 && (r[1] - x[1]).abs() < 1e-8) {
                    roots.push(x);
                }
            }
        }
    }
    roots
        .into_iter()
        .filter(|r| {
            // physical directions only: every field forward along z
            let (v1, v2, _) = p.vectors(r[0], r[1]);
            v1[2] > 0.0 && v2[2] > 0.0 && r[1].abs() < PI / 2.0
        })
        .map(|r| {
            let (v1, v2, _) = p.vectors(r[0], r[1]);
            OracleRoot {
                theta3: r[0],
                beta3: r[1],
                theta1: v1[1].atan2(v1[2]),
                beta1: (v1[0] / norm(v1)).asin(),
                theta2: v2[1].atan2(v2[2]),
                beta2: (v2[0] / norm(v2)).asin(),
            }
        })
        .collect()
}

/// A random query spread around the demonstrated operating point, where
/// solutions are common; `wide` also varies all three wavelengths.
pub fn random_query<'c, R: Rng>(rng: &mut R, crystal: &'c CrystalDef, wide: bool) -> PmQuery<'c> {
    if wide {
        let lambda4 = rng.random_range(300.0..420.0);
        PmQuery {
            crystal,
            lambda4,
            lambda5: rng.random_range(700.0..1600.0),
            alpha: rng.random_range(20f64..55.0).to_radians(),
            theta5: rng.random_range(-35f64..35.0).to_radians(),
            lambda1: rng.random_range(lambda4 * 1.15..lambda4 * 4.0),
        }
    } else {
        PmQuery {
            crystal,
            lambda4: 349.0,
            lambda5: 1047.0,
            alpha: rng.random_range(33.5f64..37.0).to_radians(),
            theta5: rng.random_range(-26f64..-14.0).to_radians(),
            lambda1: rng.random_range(450.0..1300.0),
        }
    }
}
