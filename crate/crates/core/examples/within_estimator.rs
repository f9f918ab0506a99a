//! Within-group transformation and the fixed-effects fit.

use panel_influence::{fit, generate, hat_blocks, within_group_transform, DgpConfig};

fn main() -> panel_influence::Result<()> {
    let panel = generate(&DgpConfig::default().with_size(50, 10).with_seed(3))?;
    let demeaned = within_group_transform(&panel);

    let first = &demeaned.units()[0];
    println!("unit {} demeaned y sums to {:.2e}", first.id, first.y.sum());

    let f = fit(&demeaned)?;
    println!("beta_hat = {:.4} (true 0.5)", f.beta_hat()[0]);
    println!("s2 = RSS/(N-1) = {:.4}", f.s2());
    println!("F dof = ({}, {})", f.dof().nu1, f.dof().nu2);
    println!("X'X condition number = {:.3}", f.xtx_factor().condition());

    let hat = hat_blocks(&f, &demeaned);
    let total: f64 = (0..hat.n_units()).map(|i| hat.trace(i)).sum();
    println!("sum of unit leverages = {total:.12} (k = {})", f.k());
    Ok(())
}
