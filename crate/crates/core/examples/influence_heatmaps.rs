//! Joint and conditional influence, masking and boosting, and the four
//! heat maps.

use std::path::PathBuf;

use panel_influence::{
    analyze, emit_influence_heat_plots, generate, DgpConfig, EffectLabel, InfluenceOptions, Label,
    Preset,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out: PathBuf = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "out/influence_heatmaps".into())
        .into();
    let panel = generate(
        &DgpConfig::default()
            .with_seed(42)
            .with_contamination(Preset::Figure.spec()),
    )?;
    let report = analyze(&panel, InfluenceOptions::default())?.report;
    let m = &report.matrices;
    let cut = report.cutoffs.influence_cut();
    println!("influence cutoff ({}) = {cut:.4}", report.cutoffs.active.as_str());

    for id in [10, 20, 30] {
        let i = report.position(&Label::Int(id)).unwrap();
        println!("C_ii unit {id}: {:.4}", m.joint.get(i, i).unwrap_or(f64::NAN));
    }
    let bl = report.position(&Label::Int(10)).unwrap();
    let gl = report.position(&Label::Int(20)).unwrap();
    println!("C_ij for 10 and 20: {:.4}", m.joint.get(bl, gl).unwrap_or(f64::NAN));

    let mut masked: Vec<(f64, &Label, &Label)> = Vec::new();
    for (i, row) in m.effect_labels.iter().enumerate() {
        for j in [bl, gl] {
            if row[j] == Some(EffectLabel::Mask) {
                masked.push((m.conditional_effect.get(i, j).unwrap(), &m.ids[i], &m.ids[j]));
            }
        }
    }
    masked.sort_by(|a, b| b.0.total_cmp(&a.0));
    for (ratio, i, j) in masked.iter().take(5) {
        println!("unit {j} masks unit {i}: M = {ratio:.2}");
    }

    std::fs::create_dir_all(&out)?;
    for plot in emit_influence_heat_plots(&report) {
        let path = out.join(plot.kind.file_name());
        std::fs::write(&path, &plot.svg)?;
        println!("wrote {} ({} cells)", path.display(), plot.data.len());
    }
    Ok(())
}
