//! Leave-one-out and leave-two-out estimates from block updates, checked
//! against full refits.

use std::collections::BTreeSet;
use std::time::Instant;

use panel_influence::{
    brute_force_refit, fit, generate, hat_blocks, within_group_transform, Deleter, DeletionSweep,
    DgpConfig, Label, Preset,
};

fn main() -> panel_influence::Result<()> {
    let panel = generate(
        &DgpConfig::default()
            .with_seed(11)
            .with_contamination(Preset::Figure.spec()),
    )?;
    let demeaned = within_group_transform(&panel);
    let f = fit(&demeaned)?;
    let hat = hat_blocks(&f, &demeaned);
    let deleter = Deleter::new(&f, &hat);

    let bl = panel.position(&Label::Int(10)).unwrap();
    let gl = panel.position(&Label::Int(20)).unwrap();
    let one = deleter.leave_one_out(bl)?.beta;
    let refit = brute_force_refit(&panel, &BTreeSet::from([bl]))?;
    println!("full sample      b = {:.6}", f.beta_hat()[0]);
    println!("without unit 10  b = {:.6} (refit {:.6})", one[0], refit[0]);

    let two = deleter.leave_two_out(bl, gl)?.beta;
    let refit = brute_force_refit(&panel, &BTreeSet::from([bl, gl]))?;
    println!("without 10 and 20 b = {:.6} (refit {:.6})", two[0], refit[0]);

    let start = Instant::now();
    let sweep = DeletionSweep::compute(&f, &hat);
    let n = panel.n_units();
    println!(
        "{} single and {} pair deletions in {:.2?}, {} failed",
        n,
        n * (n - 1) / 2,
        start.elapsed(),
        sweep.failures().len()
    );
    Ok(())
}
