//! Unit-wise leverage and outlyingness, Cook-type joint and conditional
//! influence, and the classification of anomalous units.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::deletion::DeletionSweep;
use crate::error::{Error, Result};
use crate::estimator::{DegreesOfFreedom, FixedEffectsFit, HatBlocks};
use crate::fdist::f_median_cutoff;
use crate::panel::{DemeanedPanel, Label};

/// Leverage `L_i = tr(H_i)` of each unit over its full history.
pub fn unit_leverage(hat: &HatBlocks) -> Vec<f64> {
    (0..hat.n_units()).map(|i| hat.trace(i)).collect()
}

/// How squared residuals are scaled before taking each unit's norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResidualNormalization {
    /// `u_it^2 / sum_{s,t} u_st^2`: shares of the total residual sum of
    /// squares. Sums to one over the whole panel.
    #[default]
    Global,
    /// `u_it^2 / sum_s u_st^2` over the units observed in period `t`. Sums to
    /// one within each period.
    PerPeriod,
}

/// Normalised squared residuals `u*_it`, one vector per unit.
pub fn normalized_residuals(
    fit: &FixedEffectsFit,
    demeaned: &DemeanedPanel,
    mode: ResidualNormalization,
) -> Result<Vec<DVector<f64>>> {
    let residuals = fit.residuals();
    let squared: Vec<DVector<f64>> = residuals.iter().map(|u| u.map(|v| v * v)).collect();
    match mode {
        ResidualNormalization::Global => {
            let total: f64 = squared.iter().map(|s| s.sum()).sum();
            if total <= 0.0 {
                return Err(Error::ExactFit);
            }
            Ok(squared.into_iter().map(|s| s / total).collect())
        }
        ResidualNormalization::PerPeriod => {
            let mut totals: std::collections::BTreeMap<&Label, f64> = Default::default();
            for (u, s) in demeaned.units().iter().zip(&squared) {
                for (t, v) in u.times.iter().zip(s.iter()) {
                    *totals.entry(t).or_insert(0.0) += v;
                }
            }
            if totals.values().all(|v| *v <= 0.0) {
                return Err(Error::ExactFit);
            }
            Ok(demeaned
                .units()
                .iter()
                .zip(&squared)
                .map(|(u, s)| {
                    DVector::from_iterator(
                        s.len(),
                        u.times.iter().zip(s.iter()).map(|(t, v)| {
                            let tot = totals[t];
                            // a period where every residual vanishes contributes nothing
                            if tot > 0.0 {
                                v / tot
                            } else {
                                0.0
                            }
                        }),
                    )
                })
                .collect())
        }
    }
}

/// Outlyingness `O_i`, the Euclidean norm of unit `i`'s normalised squared
/// residuals.
pub fn unit_outlyingness(
    fit: &FixedEffectsFit,
    demeaned: &DemeanedPanel,
    mode: ResidualNormalization,
) -> Result<Vec<f64>> {
    Ok(normalized_residuals(fit, demeaned, mode)?
        .iter()
        .map(|s| s.norm())
        .collect())
}

/// Square `N x N` matrix indexed by unit position. `None` marks a cell that
/// could not be computed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct UnitMatrix(pub Vec<Vec<Option<f64>>>);

impl UnitMatrix {
    pub fn filled(n: usize, value: Option<f64>) -> Self {
        UnitMatrix(vec![vec![value; n]; n])
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }

    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        self.0[i][j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Option<f64>) {
        self.0[i][j] = v;
    }

    pub fn diagonal(&self) -> Vec<Option<f64>> {
        (0..self.n()).map(|i| self.0[i][i]).collect()
    }

    pub fn rows(&self) -> &[Vec<Option<f64>>] {
        &self.0
    }

    /// Positions of not-available cells, row-major.
    pub fn unavailable(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (i, row) in self.0.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if v.is_none() {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.0.iter().flatten().filter_map(|v| *v)
    }
}

fn quadratic(d: &DVector<f64>, w: &DMatrix<f64>, scale: f64) -> f64 {
    (d.dot(&(w * d)) / scale).max(0.0)
}

fn influence_scale(fit: &FixedEffectsFit) -> Result<f64> {
    let s2 = fit.s2();
    if s2 <= 0.0 {
        return Err(Error::ExactFit);
    }
    Ok(s2 * fit.big_k() as f64)
}

/// Cook's distance `C_ii` of each unit.
pub fn cook_distances(fit: &FixedEffectsFit, sweep: &DeletionSweep) -> Result<Vec<Option<f64>>> {
    let scale = influence_scale(fit)?;
    Ok((0..sweep.n_units())
        .map(|i| {
            sweep
                .single(i)
                .map(|b| quadratic(&(fit.beta_hat() - b), fit.xtx(), scale))
        })
        .collect())
}

/// Joint influence `C_ij` for pair deletions, with Cook's distance `C_ii` on
/// the diagonal.
pub fn joint_influence(fit: &FixedEffectsFit, sweep: &DeletionSweep) -> Result<UnitMatrix> {
    let scale = influence_scale(fit)?;
    let n = sweep.n_units();
    let cook = cook_distances(fit, sweep)?;
    let mut m = UnitMatrix::filled(n, None);
    for i in 0..n {
        m.set(i, i, cook[i]);
        for j in (i + 1)..n {
            let v = sweep
                .pair(i, j)
                .map(|b| quadratic(&(fit.beta_hat() - b), fit.xtx(), scale));
            m.set(i, j, v);
            m.set(j, i, v);
        }
    }
    Ok(m)
}

/// Joint effect `K_{j|i} = C_ij / C_ii`; rows with `C_ii` zero or missing
/// are undefined. The diagonal is one.
pub fn joint_effect(joint: &UnitMatrix) -> UnitMatrix {
    let n = joint.n();
    let mut m = UnitMatrix::filled(n, None);
    for i in 0..n {
        let Some(cii) = joint.get(i, i).filter(|c| *c > 0.0) else {
            continue;
        };
        for j in 0..n {
            let v = if i == j {
                Some(1.0)
            } else {
                joint.get(i, j).map(|c| c / cii)
            };
            m.set(i, j, v);
        }
    }
    m
}

/// Conditional influence `C_i(j)`: the influence of `i` in the sample that
/// already excludes `j`, weighted by `X~'X~ - X~_j'X~_j`. Zero diagonal.
pub fn conditional_influence(
    fit: &FixedEffectsFit,
    sweep: &DeletionSweep,
    hat: &HatBlocks,
) -> Result<UnitMatrix> {
    let scale = influence_scale(fit)?;
    let n = sweep.n_units();
    let mut m = UnitMatrix::filled(n, None);
    for j in 0..n {
        m.set(j, j, Some(0.0));
        let Some(beta_j) = sweep.single(j) else {
            continue;
        };
        let xj = hat.x(j);
        let weight = fit.xtx() - xj.tr_mul(xj);
        for i in (0..n).filter(|&i| i != j) {
            let v = sweep
                .pair(i, j)
                .map(|b| quadratic(&(b - beta_j), &weight, scale));
            m.set(i, j, v);
        }
    }
    Ok(m)
}

/// Direction of unit `j`'s effect on unit `i`'s influence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EffectLabel {
    /// `M_i(j) >= 1`: removing `j` raises the influence of `i`.
    Mask,
    /// `M_i(j) < 1`: removing `j` lowers the influence of `i`.
    Boost,
}

/// Conditional effect `M_i(j) = C_i(j) / C_ii` and its mask/boost labels.
/// Diagonal cells carry the ratio (zero) but no label.
pub fn conditional_effect(
    conditional: &UnitMatrix,
    cook: &[Option<f64>],
) -> (UnitMatrix, Vec<Vec<Option<EffectLabel>>>) {
    let n = conditional.n();
    let mut m = UnitMatrix::filled(n, None);
    let mut labels = vec![vec![None; n]; n];
    for i in 0..n {
        let Some(cii) = cook[i].filter(|c| *c > 0.0) else {
            continue;
        };
        for j in 0..n {
            let Some(ratio) = conditional.get(i, j).map(|c| c / cii) else {
                continue;
            };
            m.set(i, j, Some(ratio));
            if i != j {
                labels[i][j] = Some(if ratio >= 1.0 {
                    EffectLabel::Mask
                } else {
                    EffectLabel::Boost
                });
            }
        }
    }
    (m, labels)
}

/// Which Cook-type cutoff is highlighted in plots and summaries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutoffMode {
    #[default]
    FMedian,
    Unity,
    FourOverN,
}

impl CutoffMode {
    pub fn as_str(self) -> &'static str {
        match self {
            CutoffMode::FMedian => "f_median",
            CutoffMode::Unity => "unity",
            CutoffMode::FourOverN => "four_over_n",
        }
    }
}

/// Reference values for leverage, outlyingness and influence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cutoffs {
    /// Average leverage `k/N`.
    pub mean_leverage: f64,
    /// Average normalised residual `1/N`.
    pub mean_residual: f64,
    /// `2k/N`.
    pub leverage_cut: f64,
    /// `2/N`.
    pub residual_cut: f64,
    /// Median of `F(nu1, nu2)`.
    pub f_median: f64,
    pub unity: f64,
    /// `4/N`.
    pub four_over_n: f64,
    pub active: CutoffMode,
}

impl Cutoffs {
    pub fn new(k: usize, n: usize, dof: DegreesOfFreedom, active: CutoffMode) -> Self {
        let n = n as f64;
        let k = k as f64;
        Cutoffs {
            mean_leverage: k / n,
            mean_residual: 1.0 / n,
            leverage_cut: 2.0 * k / n,
            residual_cut: 2.0 / n,
            f_median: f_median_cutoff(dof.nu1, dof.nu2),
            unity: 1.0,
            four_over_n: 4.0 / n,
            active,
        }
    }

    /// Value of the active influence cutoff.
    pub fn influence_cut(&self) -> f64 {
        match self.active {
            CutoffMode::FMedian => self.f_median,
            CutoffMode::Unity => self.unity,
            CutoffMode::FourOverN => self.four_over_n,
        }
    }
}

/// Anomaly type read off the leverage-vs-residual plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum UnitClass {
    Normal,
    /// Vertical outlier: high outlyingness, ordinary leverage.
    VO,
    /// Good leverage: high leverage, ordinary outlyingness.
    GL,
    /// Bad leverage: both high.
    BL,
}

impl UnitClass {
    pub fn as_str(self) -> &'static str {
        match self {
            UnitClass::Normal => "Normal",
            UnitClass::VO => "VO",
            UnitClass::GL => "GL",
            UnitClass::BL => "BL",
        }
    }
}

/// Strict comparisons: a unit exactly on a cutoff is not flagged.
pub fn classify_units(leverage: &[f64], outlyingness: &[f64], cutoffs: &Cutoffs) -> Vec<UnitClass> {
    leverage
        .iter()
        .zip(outlyingness)
        .map(|(&l, &o)| {
            match (l > cutoffs.leverage_cut, o > cutoffs.residual_cut) {
                (true, true) => UnitClass::BL,
                (true, false) => UnitClass::GL,
                (false, true) => UnitClass::VO,
                (false, false) => UnitClass::Normal,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boundary_point_is_normal() {
        let c = Cutoffs::new(1, 10, DegreesOfFreedom { nu1: 2, nu2: 9 }, CutoffMode::FMedian);
        let cls = classify_units(
            &[0.2, 0.2 + 1e-12, 0.0, 0.3],
            &[0.2, 0.0, 0.2 + 1e-12, 0.3],
            &c,
        );
        assert_eq!(cls, vec![UnitClass::Normal, UnitClass::GL, UnitClass::VO, UnitClass::BL]);
    }

    #[test]
    fn mask_boundary_is_inclusive() {
        let cond = UnitMatrix(vec![vec![Some(0.0), Some(2.0)], vec![Some(0.0), Some(0.0)]]);
        let (m, labels) = conditional_effect(&cond, &[Some(2.0), Some(3.0)]);
        assert_eq!(m.get(0, 1), Some(1.0));
        assert_eq!(labels[0][1], Some(EffectLabel::Mask));
        assert_eq!(m.get(1, 0), Some(0.0));
        assert_eq!(labels[1][0], Some(EffectLabel::Boost));
        assert_eq!(labels[0][0], None);
    }

    #[test]
    fn joint_effect_rows_and_diagonal() {
        let c = UnitMatrix(vec![
            vec![Some(2.0), Some(2.0), None],
            vec![Some(2.0), Some(0.0), Some(1.0)],
            vec![None, Some(1.0), Some(4.0)],
        ]);
        let k = joint_effect(&c);
        assert_eq!(k.get(0, 0), Some(1.0));
        assert_eq!(k.get(0, 1), Some(1.0));
        assert_eq!(k.get(0, 2), None);
        assert!(k.rows()[1].iter().all(Option::is_none));
        assert_eq!(k.get(2, 1), Some(0.25));
    }

    #[test]
    fn cutoff_values() {
        let c = Cutoffs::new(2, 50, DegreesOfFreedom { nu1: 3, nu2: 49 }, CutoffMode::Unity);
        assert_eq!(c.leverage_cut, 0.08);
        assert_eq!(c.residual_cut, 0.04);
        assert_eq!(c.four_over_n, 0.08);
        assert_eq!(c.influence_cut(), 1.0);
    }
}
