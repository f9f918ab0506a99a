#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use panel_influence::{Label, PanelDataset, UnitSeries};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Random panel with `n` units, `k` regressors and between `t_lo` and `t_hi`
/// periods per unit. Periods skip at random when the panel is unbalanced.
pub fn random_panel(seed: u64, n: usize, k: usize, t_lo: usize, t_hi: usize) -> PanelDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let beta: Vec<f64> = (0..k).map(|c| 0.5 + c as f64).collect();
    let units = (0..n)
        .map(|i| {
            let t = rng.random_range(t_lo..=t_hi);
            let mut times = Vec::with_capacity(t);
            let mut clock = 0i64;
            for _ in 0..t {
                clock += if t_lo == t_hi { 1 } else { rng.random_range(1..=2) };
                times.push(Label::Int(clock));
            }
            let x = DMatrix::from_fn(t, k, |_, _| StandardNormal.sample(&mut rng));
            let alpha: f64 = rng.random_range(0.0..20.0);
            let y = DVector::from_fn(t, |r, _| {
                let noise: f64 = StandardNormal.sample(&mut rng);
                alpha + (0..k).map(|c| beta[c] * x[(r, c)]).sum::<f64>() + noise
            });
            UnitSeries {
                id: Label::Int(i as i64 + 1),
                times: times.clone(),
                y,
                x,
            }
        })
        .collect();
    PanelDataset::new("y", (1..=k).map(|c| format!("x{c}")).collect(), units).unwrap()
}

/// Demeaned `(y, X)` per unit, computed with plain loops.
pub fn demean_naive(data: &PanelDataset) -> Vec<(Vec<f64>, Vec<Vec<f64>>)> {
    data.units()
        .iter()
        .map(|u| {
            let t = u.y.len();
            let ybar: f64 = u.y.iter().sum::<f64>() / t as f64;
            let y = u.y.iter().map(|v| v - ybar).collect();
            let x = (0..t)
                .map(|r| {
                    (0..u.x.ncols())
                        .map(|c| {
                            let mean: f64 = (0..t).map(|s| u.x[(s, c)]).sum::<f64>() / t as f64;
                            u.x[(r, c)] - mean
                        })
                        .collect()
                })
                .collect();
            (y, x)
        })
        .collect()
}

/// OLS on the demeaned data of the kept units, through the normal equations
/// and an LU solve.
pub fn ols_oracle(data: &PanelDataset, keep: impl Fn(usize) -> bool) -> DVector<f64> {
    let (a, b) = normal_equations(data, keep);
    a.lu().solve(&b).expect("non-singular oracle design")
}

/// `X'X` and `X'y` over the demeaned rows of the kept units.
pub fn normal_equations(
    data: &PanelDataset,
    keep: impl Fn(usize) -> bool,
) -> (DMatrix<f64>, DVector<f64>) {
    let k = data.k();
    let mut a = DMatrix::zeros(k, k);
    let mut b = DVector::zeros(k);
    for (i, (y, x)) in demean_naive(data).into_iter().enumerate() {
        if !keep(i) {
            continue;
        }
        for (r, row) in x.iter().enumerate() {
            for p in 0..k {
                b[p] += row[p] * y[r];
                for q in 0..k {
                    a[(p, q)] += row[p] * row[q];
                }
            }
        }
    }
    (a, b)
}

pub fn relative_error(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}
