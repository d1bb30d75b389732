//! Rewrites the golden fixtures from the shipped example config.

use std::path::Path;

use triplet_core::config::{run_sweep, RunConfig};
use triplet_core::Execution;

fn main() -> triplet_core::Result<()> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR"));
    let cfg = RunConfig::load(&root.join("../../configs/example_sweep.json"))?;
    let art = run_sweep(&cfg, Execution::Serial)?;
    for p in art.write_to(&root.join("tests/golden"))? {
        println!("{}", p.display());
    }
    println!("clipped spots: {}", art.clipped);
    for f in &art.frames {
        println!("alpha {} rows {} {:?}", f.alpha_deg, f.rows.len(), f.diagnostics);
    }
    Ok(())
}
