use std::fmt::Write as _;
use std::io::Write;

use serde::{Deserialize, Serialize};
use triplet_core::config::RunConfig;
use triplet_core::dispersion::CrystalDef;
use triplet_core::fit::{fit_alpha, PumpSetup};
use triplet_core::geometry::screen_point;
use triplet_core::pmcore::downconversion_cone;
use triplet_core::pmcore::solve_interlinked;
use triplet_core::sweep::fmt_sig;
use triplet_core::{AlphaSpec, Branch, Diagnostic, Error, Field, OpticalRay, Polarization, PumpFrame};

use crate::args::{ConeArgs, SolveArgs};
use crate::{CliError, CliResult};

const FIT_HALF_WIDTH_DEG: f64 = 5.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldRow {
    pub field: u8,
    pub polarization: Polarization,
    pub lambda_nm: f64,
    pub theta_int_deg: f64,
    pub beta_int_deg: f64,
    /// Absent when the field is totally internally reflected.
    pub theta_ext_deg: Option<f64>,
    pub beta_ext_deg: Option<f64>,
    pub x_mm: Option<f64>,
    pub y_mm: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolvedBranch {
    pub branch: Branch,
    pub max_residual: f64,
    pub grazing: bool,
    pub fields: Vec<FieldRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub target_theta1_ext_deg: f64,
    pub miss_deg: f64,
    pub exact: bool,
    pub branch: Branch,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub crystal: String,
    pub lambda1_nm: f64,
    pub lambda2_nm: f64,
    pub lambda3_nm: f64,
    pub lambda4_nm: f64,
    pub lambda5_nm: f64,
    pub alpha_deg: f64,
    pub rho_deg: f64,
    pub theta5_ext_deg: f64,
    pub theta5_int_deg: f64,
    pub screen_mm: f64,
    pub fit: Option<FitReport>,
    pub diagnostic: Option<Diagnostic>,
    pub solutions: Vec<SolvedBranch>,
}

fn single_alpha(flag: Option<f64>, cfg: &RunConfig) -> CliResult<f64> {
    match (flag, cfg.alpha_deg) {
        (Some(a), _) | (None, AlphaSpec::Fixed(a)) => Ok(a),
        (None, AlphaSpec::Range(_)) => {
            Err(CliError::Usage("the config gives an α range; pass --alpha-deg for a single solve".into()))
        }
    }
}

fn setup<'c>(cfg: &RunConfig, crystal: &'c CrystalDef, lambda1: f64) -> PumpSetup<'c> {
    PumpSetup {
        crystal,
        lambda4: cfg.lambda4_nm,
        lambda5: cfg.lambda5_nm,
        theta5_ext: cfg.theta5_ext_deg.to_radians(),
        lambda1,
        rotation: cfg.rotation.into(),
    }
}

fn field_row(crystal: &CrystalDef, frame: &PumpFrame, ray: &OpticalRay, field: Field, screen_mm: f64) -> FieldRow {
    let ext = frame.exit_direction(crystal, ray, field).ok();
    let xy = ext.map(|(b, t)| screen_point(b, t, screen_mm));
    FieldRow {
        field: field.number(),
        polarization: ray.polarization,
        lambda_nm: ray.wavelength,
        theta_int_deg: ray.theta.to_degrees(),
        beta_int_deg: ray.beta.to_degrees(),
        theta_ext_deg: ext.map(|(_, t)| t.to_degrees()),
        beta_ext_deg: ext.map(|(b, _)| b.to_degrees()),
        x_mm: xy.map(|p| p.0),
        y_mm: xy.map(|p| p.1),
    }
}

pub fn solve_report(a: &SolveArgs) -> CliResult<SolveReport> {
    let cfg = a.pump.resolve()?;
    let crystal = cfg.resolve_crystal()?;
    let setup = setup(&cfg, &crystal, a.lambda1_nm);
    let (alpha, fit) = match a.fit_theta1_ext_deg {
        Some(target) => {
            let half = FIT_HALF_WIDTH_DEG.to_radians();
            let cut = crystal.cut_angle;
            let f = fit_alpha(&setup, target.to_radians(), cut - half, cut + half).map_err(|e| match e {
                Error::Domain(m) => CliError::NoSolution(m),
                other => other.into(),
            })?;
            let report = FitReport {
                target_theta1_ext_deg: target,
                miss_deg: f.miss.to_degrees(),
                exact: f.exact,
                branch: f.fitted.solution.branch,
            };
            (f.alpha, Some(report))
        }
        None => (single_alpha(a.alpha_deg, &cfg)?.to_radians(), None),
    };
    let frame = setup.frame(alpha)?;
    let q = setup.query(&frame);
    let outcome = solve_interlinked(&q)?;
    let solutions = outcome
        .solutions
        .iter()
        .map(|s| SolvedBranch {
            branch: s.branch,
            max_residual: s.max_residual(),
            grazing: s.grazing,
            fields: [Field::F1, Field::F2, Field::F3, Field::F4, Field::F5]
                .iter()
                .map(|&f| field_row(&crystal, &frame, &s.ray(f, q.lambda4, q.lambda5), f, cfg.screen_mm))
                .collect(),
        })
        .collect();
    Ok(SolveReport {
        crystal: crystal.name.clone(),
        lambda1_nm: q.lambda1,
        lambda2_nm: q.lambda2(),
        lambda3_nm: q.lambda3(),
        lambda4_nm: q.lambda4,
        lambda5_nm: q.lambda5,
        alpha_deg: alpha.to_degrees(),
        rho_deg: frame.incidence.to_degrees(),
        theta5_ext_deg: cfg.theta5_ext_deg,
        theta5_int_deg: frame.theta5.to_degrees(),
        screen_mm: cfg.screen_mm,
        fit,
        diagnostic: outcome.diagnostic,
        solutions,
    })
}

fn opt(v: Option<f64>, decimals: usize) -> String {
    v.map_or_else(|| "tir".into(), |x| format!("{x:.decimals$}"))
}

pub fn format_table(r: &SolveReport) -> String {
    let mut s = String::new();
    writeln!(
        s,
        "crystal {}  alpha {:.4} deg  rho {:.4} deg  theta5 ext {:.3} deg (int {:.4} deg)  screen {} mm",
        r.crystal, r.alpha_deg, r.rho_deg, r.theta5_ext_deg, r.theta5_int_deg, r.screen_mm
    )
    .unwrap();
    writeln!(
        s,
        "lambda1 {:.1} nm  lambda2 {:.1} nm  lambda3 {:.1} nm  lambda4 {:.1} nm  lambda5 {:.1} nm",
        r.lambda1_nm, r.lambda2_nm, r.lambda3_nm, r.lambda4_nm, r.lambda5_nm
    )
    .unwrap();
    if let Some(f) = &r.fit {
        writeln!(
            s,
            "fit: theta1 ext target {:.3} deg, miss {:.4} deg on branch {}{}",
            f.target_theta1_ext_deg,
            f.miss_deg,
            f.branch,
            if f.exact { "" } else { " (target unreachable; closest feasible alpha)" }
        )
        .unwrap();
    }
    writeln!(
        s,
        "{:<7} {:>5} {:>3} {:>10} {:>12} {:>12} {:>12} {:>12} {:>10} {:>10}",
        "branch", "field", "pol", "lambda_nm", "theta_int", "beta_int", "theta_ext", "beta_ext", "x_mm", "y_mm"
    )
    .unwrap();
    for b in &r.solutions {
        for f in &b.fields {
            writeln!(
                s,
                "{:<7} {:>5} {:>3} {:>10.3} {:>12.4} {:>12.4} {:>12} {:>12} {:>10} {:>10}",
                b.branch.to_string(),
                f.field,
                match f.polarization {
                    Polarization::Ordinary => "o",
                    Polarization::Extraordinary => "e",
                },
                f.lambda_nm,
                f.theta_int_deg,
                f.beta_int_deg,
                opt(f.theta_ext_deg, 4),
                opt(f.beta_ext_deg, 4),
                opt(f.x_mm, 3),
                opt(f.y_mm, 3),
            )
            .unwrap();
        }
    }
    for b in &r.solutions {
        writeln!(
            s,
            "branch {}: max residual {:.2e}{}",
            b.branch,
            b.max_residual,
            if b.grazing { " (grazing)" } else { "" }
        )
        .unwrap();
    }
    if let Some(d) = r.diagnostic {
        writeln!(s, "diagnostic: {d}").unwrap();
    }
    s
}

pub fn cmd_solve(a: &SolveArgs, out: &mut dyn Write) -> CliResult {
    let report = solve_report(a)?;
    if a.json {
        writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
    } else {
        out.write_all(format_table(&report).as_bytes())?;
    }
    match report.diagnostic {
        Some(d) if report.solutions.is_empty() => Err(CliError::NoSolution(d.to_string())),
        _ => Ok(()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ConeRow {
    psi_deg: f64,
    #[serde(flatten)]
    field: FieldRow,
}

pub fn cmd_cone(a: &ConeArgs, out: &mut dyn Write) -> CliResult {
    let cfg = a.pump.resolve()?;
    let crystal = cfg.resolve_crystal()?;
    if a.samples == 0 {
        return Err(CliError::Usage("--samples must be at least 1".into()));
    }
    let alpha = single_alpha(a.alpha_deg, &cfg)?.to_radians();
    let frame = setup(&cfg, &crystal, a.lambda1_nm).frame(alpha)?;
    let cone = downconversion_cone(&crystal, cfg.lambda4_nm, frame.alpha, a.lambda1_nm, a.samples)?;
    if cone.half_angle.is_none() {
        return Err(CliError::NoSolution(format!(
            "no downconversion cone for λ1 = {} nm at α = {:.4}°",
            a.lambda1_nm,
            alpha.to_degrees()
        )));
    }
    let mut rows = Vec::new();
    for p in &cone.points {
        for (field, lambda, theta, beta) in
            [(Field::F1, a.lambda1_nm, p.theta1, p.beta1), (Field::F3, cone.lambda3, p.theta3, p.beta3)]
        {
            let ray = OpticalRay { wavelength: lambda, polarization: Polarization::Ordinary, theta, beta };
            rows.push(ConeRow {
                psi_deg: p.psi.to_degrees(),
                field: field_row(&crystal, &frame, &ray, field, cfg.screen_mm),
            });
        }
    }
    let text = if a.json {
        serde_json::to_string_pretty(&rows)? + "\n"
    } else {
        let mut s =
            String::from("psi_deg,field,lambda_nm,theta_int_deg,beta_int_deg,theta_ext_deg,beta_ext_deg,x_mm,y_mm\n");
        let o = |v: Option<f64>| v.map_or_else(String::new, fmt_sig);
        for r in &rows {
            let f = &r.field;
            writeln!(
                s,
                "{},{},{},{},{},{},{},{},{}",
                fmt_sig(r.psi_deg),
                f.field,
                fmt_sig(f.lambda_nm),
                fmt_sig(f.theta_int_deg),
                fmt_sig(f.beta_int_deg),
                o(f.theta_ext_deg),
                o(f.beta_ext_deg),
                o(f.x_mm),
                o(f.y_mm)
            )
            .unwrap();
        }
        s
    };
    match &a.out {
        Some(p) => std::fs::write(p, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}
