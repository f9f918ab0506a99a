//! Quantiles of the F distribution by inverting the regularized incomplete
//! beta function.

use statrs::function::beta::beta_reg;

/// `P(F <= x)` for `F ~ F(nu1, nu2)`.
pub fn f_cdf(x: f64, nu1: f64, nu2: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let z = nu1 * x / (nu1 * x + nu2);
    beta_reg(nu1 / 2.0, nu2 / 2.0, z)
}

/// Quantile `p` of `F(nu1, nu2)`, found by bisection to a relative width of
/// 1e-13.
pub fn f_quantile(p: f64, nu1: f64, nu2: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "quantile level must be in (0, 1)");
    assert!(nu1 > 0.0 && nu2 > 0.0, "degrees of freedom must be positive");
    let mut lo = 0.0;
    let mut hi = 1.0;
    while f_cdf(hi, nu1, nu2) < p {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if f_cdf(mid, nu1, nu2) < p {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-13 * hi.max(1e-300) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Median of `F(nu1, nu2)`, the distributional cutoff for Cook-type
/// influence measures.
pub fn f_median_cutoff(nu1: usize, nu2: usize) -> f64 {
    assert!(nu1 >= 1 && nu2 >= 1, "degrees of freedom must be at least 1");
    f_quantile(0.5, nu1 as f64, nu2 as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f_one_one_median_is_one() {
        assert!((f_median_cutoff(1, 1) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn cdf_is_monotone() {
        let mut prev = 0.0;
        for i in 1..200 {
            let c = f_cdf(i as f64 * 0.05, 3.0, 17.0);
            assert!(c >= prev);
            prev = c;
        }
        assert!(prev > 0.99);
    }

    #[test]
    fn equal_dof_median_is_one() {
        // F(m, m) and 1/F(m, m) share a distribution.
        for m in [2, 5, 30] {
            assert!((f_median_cutoff(m, m) - 1.0).abs() < 1e-9);
        }
    }
}
