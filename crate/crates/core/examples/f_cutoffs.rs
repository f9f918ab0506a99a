//! F-median and rule-of-thumb cutoffs for a few panel sizes.

use panel_influence::fdist::f_cdf;
use panel_influence::{f_median_cutoff, CutoffMode, Cutoffs, DegreesOfFreedom};

fn main() {
    println!("{:>4} {:>2} {:>9} {:>7} {:>7} {:>7}", "N", "k", "F-median", "4/N", "2k/N", "2/N");
    for (n, k) in [(20, 1), (100, 1), (100, 3), (1000, 2)] {
        let dof = DegreesOfFreedom {
            nu1: k + 1,
            nu2: n - 1,
        };
        let c = Cutoffs::new(k, n, dof, CutoffMode::FMedian);
        println!(
            "{n:>4} {k:>2} {:>9.5} {:>7.4} {:>7.4} {:>7.4}",
            c.f_median, c.four_over_n, c.leverage_cut, c.residual_cut
        );
    }

    let m = 99.0_f64;
    let closed = m * (2f64.powf(2.0 / m) - 1.0) / 2.0;
    let f = f_median_cutoff(2, 99);
    println!("F(2,99) median {f:.6}, closed form {closed:.6}, CDF there {:.6}", f_cdf(f, 2.0, 99.0));
}
