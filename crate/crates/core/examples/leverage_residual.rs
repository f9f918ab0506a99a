//! Leverage vs normalised squared residual: classification and plot.
//!
//! Writes `lvr2.svg` to the directory given as the first argument
//! (default `out/leverage_residual`).

use std::path::PathBuf;

use panel_influence::{
    analyze, emit_leverage_residual_plot, generate, DgpConfig, InfluenceOptions, Preset, UnitClass,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out: PathBuf = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "out/leverage_residual".into())
        .into();
    let panel = generate(
        &DgpConfig::default()
            .with_seed(42)
            .with_contamination(Preset::Figure.spec()),
    )?;
    let report = analyze(&panel, InfluenceOptions::default())?.report;
    let c = &report.cutoffs;
    println!(
        "averages: L {:.4}, O {:.4}; cutoffs: L > {:.4}, O > {:.4}",
        c.mean_leverage, c.mean_residual, c.leverage_cut, c.residual_cut
    );
    for u in report.units.iter().filter(|u| u.class != UnitClass::Normal) {
        println!(
            "unit {:>3}: L = {:.4}, O = {:.4} -> {}",
            u.id,
            u.leverage,
            u.outlyingness,
            u.class.as_str()
        );
    }

    let plot = emit_leverage_residual_plot(&report);
    std::fs::create_dir_all(&out)?;
    let path = out.join(plot.kind.file_name());
    std::fs::write(&path, &plot.svg)?;
    println!("wrote {}", path.display());
    Ok(())
}
