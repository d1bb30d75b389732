use std::io::Write;

use triplet_core::config::{run_sweep, RunConfig};
use triplet_core::sweep::{read_spots_csv, render_map, render_svg, CSV_HEADER};
use triplet_core::Execution;

use crate::args::{alpha_spec, RenderArgs, SweepArgs};
use crate::{CliError, CliResult};

pub fn cmd_sweep(a: &SweepArgs, out: &mut dyn Write) -> CliResult {
    let mut cfg = a.pump.resolve()?;
    if let Some(r) = a.alpha_deg {
        cfg.alpha_deg = alpha_spec(r);
    }
    if let Some(r) = a.lambda1_nm {
        cfg.lambda1_nm = r;
    }
    if a.json {
        cfg.outputs.json = true;
    }
    let exec = if a.serial { Execution::Serial } else { Execution::Parallel };
    let art = run_sweep(&cfg, exec)?;
    let written = art.write_to(&a.out)?;
    for f in &art.frames {
        let d = &f.diagnostics;
        writeln!(
            out,
            "alpha {:.4} deg: {} spots, {} solved, {} without solution",
            f.alpha_deg,
            f.rows.len(),
            d.solved,
            d.no_real_roots + d.degenerate + d.domain_rejected + d.residual_rejected + d.invalid_query
        )?;
    }
    if art.clipped > 0 {
        writeln!(out, "{} spots fell outside the canvas", art.clipped)?;
    }
    writeln!(out, "wrote {} files to {}", written.len(), a.out.display())?;
    Ok(())
}

pub fn cmd_render(a: &RenderArgs, out: &mut dyn Write) -> CliResult {
    let mut canvas = match &a.config {
        Some(p) => RunConfig::load(p)?.canvas,
        None => RunConfig::default().canvas,
    };
    if let Some(w) = a.width {
        canvas.width = w;
    }
    if let Some(h) = a.height {
        canvas.height = h;
    }
    if let Some(s) = a.mm_per_px {
        canvas.mm_per_px = s;
    }
    let text = std::fs::read_to_string(&a.csv)?;
    // a completely empty file renders as a blank canvas, like a header-only one
    let rows = if text.trim().is_empty() {
        Vec::new()
    } else {
        read_spots_csv(&text).map_err(|e| CliError::Usage(format!("{}: {e}", a.csv.display())))?
    };
    let spots: Vec<_> = rows
        .iter()
        .filter(|r| a.alpha_deg.is_none_or(|alpha| (r.alpha_deg - alpha).abs() < 1e-9))
        .map(|r| r.spot)
        .collect();
    let svg = a.out.extension().is_some_and(|e| e.eq_ignore_ascii_case("svg"));
    if svg {
        std::fs::write(&a.out, render_svg(&spots, &canvas)?)?;
    } else {
        let img = render_map(&spots, &canvas)?;
        std::fs::write(&a.out, img.to_ppm())?;
        if img.clipped > 0 {
            writeln!(out, "{} spots fell outside the canvas", img.clipped)?;
        }
    }
    writeln!(out, "rendered {} spots ({} columns per row) to {}", spots.len(), CSV_HEADER.len(), a.out.display())?;
    Ok(())
}
