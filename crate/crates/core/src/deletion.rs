//! Leave-one-out and leave-two-out coefficient updates.
//!
//! Deleting the full history of unit `i` gives
//!
//! ```text
//! b(i) = b - (X~'X~)^-1 X~_i' M_i^-1 u_i,            M_i = I - H_i
//! ```
//!
//! and deleting the pair `(i, j)` applies the partitioned inverse of the
//! stacked annihilator block on top of `b(i)`:
//!
//! ```text
//! b(i,j) = b(i) - (X~'X~)^-1 (X~_i' M_i^-1 H_ij + X~_j') S^-1 (H_ij' M_i^-1 u_i + u_j)
//! S      = M_j - H_ij' M_i^-1 H_ij
//! ```
//!
//! Only `T_i x T_j` blocks are ever inverted. The blocks may differ in size,
//! so unbalanced panels need no special handling.

use std::collections::BTreeSet;
use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimator::{fit as fit_within, FixedEffectsFit, HatBlocks};
use crate::linalg::guarded_symmetric_inverse;
use crate::panel::{within_group_transform, PanelDataset};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Deletion {
    One(usize),
    Two(usize, usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeletionResult {
    pub kind: Deletion,
    pub beta: DVector<f64>,
    /// All required inverses existed within the condition guard.
    pub schur_ok: bool,
    /// An inverted block had condition number above
    /// [`NEAR_SINGULAR`](crate::linalg::NEAR_SINGULAR).
    pub near_singular: bool,
}

#[derive(Debug)]
struct UnitUpdate {
    m_inv: DMatrix<f64>,
    m_inv_u: DVector<f64>,
    beta: DVector<f64>,
    near_singular: bool,
}

/// Shares per-unit `M_i^-1` products across many deletions.
pub struct Deleter<'a> {
    fit: &'a FixedEffectsFit,
    hat: &'a HatBlocks,
    units: Vec<OnceLock<std::result::Result<UnitUpdate, f64>>>,
}

impl<'a> Deleter<'a> {
    pub fn new(fit: &'a FixedEffectsFit, hat: &'a HatBlocks) -> Self {
        Deleter {
            fit,
            hat,
            units: (0..hat.n_units()).map(|_| OnceLock::new()).collect(),
        }
    }

    pub fn n_units(&self) -> usize {
        self.units.len()
    }

    fn unit(&self, i: usize) -> Result<&UnitUpdate> {
        self.units[i]
            .get_or_init(|| {
                let h = self.hat.h(i);
                let m = DMatrix::identity(h.nrows(), h.ncols()) - h;
                let inv = guarded_symmetric_inverse(m)?;
                let m_inv_u = &inv.inverse * &self.fit.residuals()[i];
                let beta = self.fit.beta_hat() - self.hat.solved(i) * &m_inv_u;
                Ok(UnitUpdate {
                    near_singular: inv.near_singular(),
                    m_inv: inv.inverse,
                    m_inv_u,
                    beta,
                })
            })
            .as_ref()
            .map_err(|&condition| Error::SingularBlock {
                unit: self.fit.unit_ids()[i].clone(),
                condition,
            })
    }

    /// `b(i)`, the estimate without unit `i`.
    pub fn leave_one_out(&self, i: usize) -> Result<DeletionResult> {
        let u = self.unit(i)?;
        Ok(DeletionResult {
            kind: Deletion::One(i),
            beta: u.beta.clone(),
            schur_ok: true,
            near_singular: u.near_singular,
        })
    }

    /// `b(i,j)`, the estimate without units `i` and `j`.
    pub fn leave_two_out(&self, i: usize, j: usize) -> Result<DeletionResult> {
        if i == j {
            return Err(Error::InvalidConfig(format!(
                "leave-two-out needs distinct units, got {i} twice"
            )));
        }
        let ui = self.unit(i)?;
        let h_ij = self.hat.h_pair(i, j);
        let p = &ui.m_inv * &h_ij;
        let h_j = self.hat.h(j);
        let schur = DMatrix::identity(h_j.nrows(), h_j.ncols()) - h_j - h_ij.tr_mul(&p);
        let s = guarded_symmetric_inverse(schur).map_err(|condition| Error::SingularPair {
            first: self.fit.unit_ids()[i].clone(),
            second: self.fit.unit_ids()[j].clone(),
            condition,
        })?;
        let rhs = h_ij.tr_mul(&ui.m_inv_u) + &self.fit.residuals()[j];
        let w = &s.inverse * rhs;
        let correction = self.hat.solved(i) * (&p * &w) + self.hat.solved(j) * &w;
        Ok(DeletionResult {
            kind: Deletion::Two(i, j),
            beta: &ui.beta - correction,
            schur_ok: true,
            near_singular: ui.near_singular || s.near_singular(),
        })
    }
}

/// Leave-one-out estimate for a single unit.
pub fn leave_one_out(
    fit: &FixedEffectsFit,
    hat: &HatBlocks,
    i: usize,
) -> Result<DeletionResult> {
    Deleter::new(fit, hat).leave_one_out(i)
}

/// Leave-two-out estimate for a single pair.
pub fn leave_two_out(
    fit: &FixedEffectsFit,
    hat: &HatBlocks,
    i: usize,
    j: usize,
) -> Result<DeletionResult> {
    Deleter::new(fit, hat).leave_two_out(i, j)
}

/// Re-estimates the model with the given unit positions removed.
pub fn brute_force_refit(data: &PanelDataset, excluded: &BTreeSet<usize>) -> Result<DVector<f64>> {
    if excluded.is_empty() {
        return Ok(fit_within(&within_group_transform(data))?.beta_hat().clone());
    }
    let sub = data.without_units(excluded)?;
    Ok(fit_within(&within_group_transform(&sub))?.beta_hat().clone())
}

/// A deletion that could not be computed, kept for reporting.
#[derive(Debug, Clone, PartialEq)]
pub struct FailedDeletion {
    pub kind: Deletion,
    pub message: String,
}

/// All single and pair deletions of a fit.
#[derive(Debug, Clone)]
pub struct DeletionSweep {
    n: usize,
    single: Vec<Option<DVector<f64>>>,
    pairs: Vec<Option<DVector<f64>>>,
    failures: Vec<FailedDeletion>,
    near_singular: Vec<Deletion>,
}

fn pair_index(n: usize, i: usize, j: usize) -> usize {
    let (a, b) = if i < j { (i, j) } else { (j, i) };
    a * n - a * (a + 1) / 2 + (b - a - 1)
}

impl DeletionSweep {
    /// Runs every L1O and every unordered L2O. Pair rows are computed in
    /// parallel; output order is fixed by `(i, j)`.
    pub fn compute(fit: &FixedEffectsFit, hat: &HatBlocks) -> DeletionSweep {
        let deleter = Deleter::new(fit, hat);
        let n = deleter.n_units();
        let singles: Vec<Result<DeletionResult>> =
            (0..n).into_par_iter().map(|i| deleter.leave_one_out(i)).collect();
        let rows: Vec<Vec<Result<DeletionResult>>> = (0..n)
            .into_par_iter()
            .map(|i| ((i + 1)..n).map(|j| deleter.leave_two_out(i, j)).collect())
            .collect();

        let mut failures = Vec::new();
        let mut near_singular = Vec::new();
        let mut absorb = |kind: Deletion, r: Result<DeletionResult>| match r {
            Ok(d) => {
                if d.near_singular {
                    near_singular.push(kind);
                }
                Some(d.beta)
            }
            Err(e) => {
                failures.push(FailedDeletion {
                    kind,
                    message: e.to_string(),
                });
                None
            }
        };
        let single = singles
            .into_iter()
            .enumerate()
            .map(|(i, r)| absorb(Deletion::One(i), r))
            .collect();
        let mut pairs = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for (i, row) in rows.into_iter().enumerate() {
            for (off, r) in row.into_iter().enumerate() {
                pairs.push(absorb(Deletion::Two(i, i + 1 + off), r));
            }
        }
        DeletionSweep {
            n,
            single,
            pairs,
            failures,
            near_singular,
        }
    }

    pub fn n_units(&self) -> usize {
        self.n
    }

    pub fn single(&self, i: usize) -> Option<&DVector<f64>> {
        self.single[i].as_ref()
    }

    /// `b(i,j)`; symmetric in its arguments. `None` on the diagonal.
    pub fn pair(&self, i: usize, j: usize) -> Option<&DVector<f64>> {
        if i == j {
            return None;
        }
        self.pairs[pair_index(self.n, i, j)].as_ref()
    }

    pub fn failures(&self) -> &[FailedDeletion] {
        &self.failures
    }

    pub fn near_singular(&self) -> &[Deletion] {
        &self.near_singular
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimator::hat_blocks;
    use crate::panel::{Label, UnitSeries};

    #[test]
    fn pair_index_is_dense() {
        let n = 6;
        let mut seen = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                seen.push(pair_index(n, i, j));
                assert_eq!(pair_index(n, i, j), pair_index(n, j, i));
            }
        }
        assert_eq!(seen, (0..n * (n - 1) / 2).collect::<Vec<_>>());
    }

    fn panel_from(rows: &[(&[f64], &[f64])]) -> PanelDataset {
        let units = rows
            .iter()
            .enumerate()
            .map(|(i, (y, x))| {
                let t = y.len();
                UnitSeries {
                    id: Label::Int(i as i64 + 1),
                    times: (1..=t as i64).map(Label::Int).collect(),
                    y: DVector::from_column_slice(y),
                    x: DMatrix::from_column_slice(t, x.len() / t, x),
                }
            })
            .collect();
        PanelDataset::new("y", (0..rows[0].1.len() / rows[0].0.len()).map(|c| format!("x{c}")).collect(), units)
            .unwrap()
    }

    #[test]
    fn unit_on_fitted_plane_does_not_move_estimate() {
        // Unit 3 is exactly y = 2x, matching the slope of the other units'
        // combined fit only if they also fit 2x; build them symmetric around it.
        let p = panel_from(&[
            (&[2.1, 3.9, 6.0], &[1.0, 2.0, 3.0]),
            (&[1.9, 4.1, 6.0], &[1.0, 2.0, 3.0]),
            (&[0.0, 4.0, 8.0], &[0.0, 2.0, 4.0]),
        ]);
        let d = within_group_transform(&p);
        let f = fit_within(&d).unwrap();
        assert!((f.beta_hat()[0] - 2.0).abs() < 1e-12);
        assert!(f.residuals()[2].amax() < 1e-12);
        let h = hat_blocks(&f, &d);
        let r = leave_one_out(&f, &h, 2).unwrap();
        assert!((&r.beta - f.beta_hat()).amax() < 1e-12);
    }

    #[test]
    fn same_unit_twice_is_rejected() {
        let p = panel_from(&[
            (&[2.1, 3.9, 6.0], &[1.0, 2.0, 3.0]),
            (&[1.9, 4.1, 6.0], &[1.0, 2.5, 3.0]),
            (&[0.0, 4.0, 8.0], &[0.0, 2.0, 4.0]),
        ]);
        let d = within_group_transform(&p);
        let f = fit_within(&d).unwrap();
        let h = hat_blocks(&f, &d);
        assert!(leave_two_out(&f, &h, 1, 1).is_err());
    }

    #[test]
    fn regressor_living_in_one_unit_is_perfectly_leveraged() {
        // Second regressor varies only inside unit 1, so deleting unit 1
        // leaves a rank-deficient design and M_1 is singular.
        let p = panel_from(&[
            (&[1.0, 2.0, 4.0], &[1.0, 2.0, 3.0, 0.0, 1.0, 0.0]),
            (&[2.0, 1.0, 3.0], &[2.0, 1.0, 2.5, 5.0, 5.0, 5.0]),
            (&[0.5, 1.5, 1.0], &[0.0, 1.0, 0.5, 5.0, 5.0, 5.0]),
            (&[1.0, 3.0, 2.0], &[1.5, 2.5, 2.0, 5.0, 5.0, 5.0]),
        ]);
        let d = within_group_transform(&p);
        let f = fit_within(&d).unwrap();
        let h = hat_blocks(&f, &d);
        let err = leave_one_out(&f, &h, 0).unwrap_err();
        assert!(matches!(err, Error::SingularBlock { unit: Label::Int(1), .. }), "{err:?}");
        assert!(leave_two_out(&f, &h, 0, 2).is_err());
        assert!(leave_two_out(&f, &h, 2, 0).is_err());
        assert!(leave_one_out(&f, &h, 1).is_ok());

        let sweep = DeletionSweep::compute(&f, &h);
        assert!(sweep.single(0).is_none());
        assert!(sweep.pair(0, 3).is_none());
        assert!(sweep.pair(1, 2).is_some());
        // 1 single + 3 pairs containing unit 1
        assert_eq!(sweep.failures().len(), 4);
    }
}
