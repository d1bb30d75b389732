//! One-dimensional fit of the tuning angle to an observed external signal
//! angle.

use serde::{Deserialize, Serialize};

use crate::dispersion::CrystalDef;
use crate::error::{Error, Result};
use crate::geometry::{PumpFrame, RotationMode};
use crate::pmcore::{solve_interlinked, Branch, Field, Mirror, PmQuery, PmSolution};

/// Grid points scanned over the bracket before refinement.
const SCAN_POINTS: usize = 2001;
const REFINE_ITERATIONS: usize = 100;

/// Fixed pump geometry and signal wavelength, lab-frame angles in radians.
#[derive(Debug, Clone, Copy)]
pub struct PumpSetup<'c> {
    pub crystal: &'c CrystalDef,
    pub lambda4: f64,
    pub lambda5: f64,
    pub theta5_ext: f64,
    pub lambda1: f64,
    pub rotation: RotationMode,
}

/// Interlinked solution on one branch with its external angles.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExternalSolution {
    pub frame: PumpFrame,
    pub solution: PmSolution,
    pub theta1_ext: f64,
    pub theta2_ext: f64,
    pub theta3_ext: f64,
    pub beta1_ext: f64,
    pub beta2_ext: f64,
    pub beta3_ext: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AlphaFit {
    pub alpha: f64,
    pub fitted: ExternalSolution,
    /// `ϑ₁,ext − target` at the optimum; zero (to bisection precision) when
    /// the target is reachable.
    pub miss: f64,
    pub exact: bool,
}

impl<'c> PumpSetup<'c> {
    pub fn frame(&self, alpha: f64) -> Result<PumpFrame> {
        PumpFrame::for_alpha(self.crystal, self.lambda4, self.lambda5, self.theta5_ext, alpha, self.rotation)
    }

    pub fn query(&self, frame: &PumpFrame) -> PmQuery<'c> {
        PmQuery {
            crystal: self.crystal,
            lambda4: self.lambda4,
            lambda5: self.lambda5,
            alpha: frame.alpha,
            theta5: frame.theta5,
            lambda1: self.lambda1,
        }
    }

    /// All solutions at tuning angle `alpha` with external angles attached.
    pub fn solve_external(&self, alpha: f64) -> Result<Vec<ExternalSolution>> {
        let frame = self.frame(alpha)?;
        let q = self.query(&frame);
        let mut out = Vec::new();
        for solution in solve_interlinked(&q)?.solutions {
            let dir = |f: Field| frame.exit_direction(self.crystal, &solution.ray(f, self.lambda4, self.lambda5), f);
            let (Ok((b1, t1)), Ok((b2, t2)), Ok((b3, t3))) = (dir(Field::F1), dir(Field::F2), dir(Field::F3)) else {
                continue;
            };
            out.push(ExternalSolution {
                frame,
                solution,
                theta1_ext: t1,
                theta2_ext: t2,
                theta3_ext: t3,
                beta1_ext: b1,
                beta2_ext: b2,
                beta3_ext: b3,
            });
        }
        Ok(out)
    }

    fn on_branch(&self, alpha: f64, branch: Branch) -> Option<ExternalSolution> {
        self.solve_external(alpha).ok()?.into_iter().find(|s| s.solution.branch == branch)
    }
}

/// Finds `α ∈ [lo, hi]` whose solution puts field 1 at external angle
/// `target`. Mirror branches share `ϑ₁`, so only `Up` branches are searched.
/// When no branch reaches the target, the closest feasible approach is
/// returned with `exact = false`.
pub fn fit_alpha(setup: &PumpSetup, target: f64, lo: f64, hi: f64) -> Result<AlphaFit> {
    if !(lo < hi) {
        return Err(Error::Domain(format!("empty α bracket [{lo}, {hi}]")));
    }
    let grid: Vec<f64> = (0..SCAN_POINTS).map(|i| lo + (hi - lo) * i as f64 / (SCAN_POINTS - 1) as f64).collect();
    let samples: Vec<Vec<ExternalSolution>> =
        grid.iter().map(|&a| setup.solve_external(a).unwrap_or_default()).collect();

    let mut branches: Vec<Branch> =
        samples.iter().flatten().map(|s| s.solution.branch).filter(|b| b.mirror == Mirror::Up).collect();
    branches.sort();
    branches.dedup();
    if branches.is_empty() {
        return Err(Error::Domain("no phase-matched solution anywhere in the α bracket".into()));
    }

    let value =
        |s: &Vec<ExternalSolution>, b: Branch| s.iter().find(|x| x.solution.branch == b).map(|x| x.theta1_ext - target);

    let mut best: Option<(f64, Branch, f64)> = None;
    let mut consider = |alpha: f64, branch: Branch, miss: f64| {
        if best.is_none_or(|(_, _, m)| miss.abs() < m.abs()) {
            best = Some((alpha, branch, miss));
        }
    };

    for &branch in &branches {
        let values: Vec<Option<f64>> = samples.iter().map(|s| value(s, branch)).collect();
        // sign changes between feasible neighbours
        for i in 0..grid.len() - 1 {
            if let (Some(f0), Some(f1)) = (values[i], values[i + 1]) {
                if f0 == 0.0 || f0.signum() != f1.signum() {
                    if let Some(alpha) = bisect_root(setup, branch, target, grid[i], grid[i + 1], f0) {
                        consider(alpha, branch, 0.0);
                    }
                }
            }
        }
        // closest feasible grid point, refined
        if let Some((i, f)) = values
            .iter()
            .enumerate()
            .filter_map(|(i, v)| v.map(|f| (i, f)))
            .min_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        {
            let l = grid[i.saturating_sub(1)];
            let r = grid[(i + 1).min(grid.len() - 1)];
            let (alpha, miss) = golden_min(setup, branch, target, l, r).unwrap_or((grid[i], f));
            consider(alpha, branch, miss);
        }
    }

    let (alpha, branch, _) = best.expect("at least one feasible branch");
    let fitted =
        setup.on_branch(alpha, branch).ok_or_else(|| Error::Domain("fitted branch vanished at the optimum".into()))?;
    let miss = fitted.theta1_ext - target;
    Ok(AlphaFit { alpha, exact: miss.abs() < 1e-9, miss, fitted })
}

fn bisect_root(setup: &PumpSetup, branch: Branch, target: f64, mut a: f64, mut b: f64, fa: f64) -> Option<f64> {
    if fa == 0.0 {
        return Some(a);
    }
    let mut sa = fa.signum();
    for _ in 0..REFINE_ITERATIONS {
        let m = 0.5 * (a + b);
        let fm = setup.on_branch(m, branch)?.theta1_ext - target;
        if fm == 0.0 {
            return Some(m);
        }
        if fm.signum() == sa {
            a = m;
            sa = fm.signum();
        } else {
            b = m;
        }
    }
    Some(0.5 * (a + b))
}

/// Golden-section minimum of `|ϑ₁,ext − target|`; infeasible points count as
/// infinitely bad, so an optimum on the feasibility edge is approached from
/// the feasible side.
fn golden_min(setup: &PumpSetup, branch: Branch, target: f64, mut a: f64, mut b: f64) -> Option<(f64, f64)> {
    let eval = |x: f64| setup.on_branch(x, branch).map(|s| s.theta1_ext - target);
    let score = |v: Option<f64>| v.map_or(f64::INFINITY, f64::abs);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = eval(c);
    let mut fd = eval(d);
    let mut best: Option<(f64, f64)> = None;
    let mut keep = |x: f64, v: Option<f64>| {
        if let Some(v) = v {
            if best.is_none_or(|(_, m)| v.abs() < m.abs()) {
                best = Some((x, v));
            }
        }
    };
    keep(c, fc);
    keep(d, fd);
    for _ in 0..REFINE_ITERATIONS {
        if score(fc) < score(fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = eval(c);
            keep(c, fc);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = eval(d);
            keep(d, fd);
        }
        if (b - a).abs() < 1e-13 {
            break;
        }
    }
    best
}
