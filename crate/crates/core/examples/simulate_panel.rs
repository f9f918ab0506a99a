//! Synthetic panel with planted anomalies.
//!
//! ```bash
//! cargo run -p panel-influence --example simulate_panel -- 7
//! ```

use panel_influence::{generate, AnomalyKind, DgpConfig, Preset};

fn main() -> panel_influence::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(7);
    let spec = Preset::Figure.spec();
    let clean = generate(&DgpConfig::default().with_seed(seed))?;
    let panel = generate(&DgpConfig::default().with_seed(seed).with_contamination(spec.clone()))?;

    println!(
        "{} units, {} observations, balanced: {}",
        panel.n_units(),
        panel.n_obs(),
        panel.is_balanced()
    );
    for kind in [AnomalyKind::VO, AnomalyKind::GL, AnomalyKind::BL] {
        for unit in spec.units_of(kind) {
            let i = (unit - 1) as usize;
            let (c, d) = (&clean.units()[i], &panel.units()[i]);
            println!(
                "unit {unit:>3} {kind:?}: mean x {:7.3} -> {:7.3}, mean y {:7.3} -> {:7.3}",
                c.x.mean(),
                d.x.mean(),
                c.y.mean(),
                d.y.mean()
            );
        }
    }

    // other units are identical with or without contamination
    let untouched = clean
        .units()
        .iter()
        .zip(panel.units())
        .filter(|(c, d)| c == d)
        .count();
    println!("{untouched} units unchanged by contamination");

    let mut csv = Vec::new();
    panel.write_csv(&mut csv)?;
    let text = String::from_utf8_lossy(&csv);
    for line in text.lines().take(4) {
        println!("{line}");
    }
    Ok(())
}
