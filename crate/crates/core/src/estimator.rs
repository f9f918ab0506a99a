//! Within-group (fixed-effects) estimator and the per-unit blocks of its
//! hat matrix.

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{symmetrize, SpdFactor};
use crate::panel::{DemeanedPanel, Label};

/// Degrees of freedom of the F reference distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreesOfFreedom {
    /// Regressors including the constant, `K = k + 1`.
    pub nu1: usize,
    /// Units minus one, reflecting clustering by unit.
    pub nu2: usize,
}

/// OLS fit of the demeaned model.
#[derive(Debug, Clone)]
pub struct FixedEffectsFit {
    unit_ids: Vec<Label>,
    beta_hat: DVector<f64>,
    residuals: Vec<DVector<f64>>,
    xtx: DMatrix<f64>,
    xtx_factor: SpdFactor,
    s2: f64,
    dof: DegreesOfFreedom,
}

impl FixedEffectsFit {
    pub fn beta_hat(&self) -> &DVector<f64> {
        &self.beta_hat
    }

    /// Residuals `u_i = y~_i - X~_i b`, one vector per unit.
    pub fn residuals(&self) -> &[DVector<f64>] {
        &self.residuals
    }

    pub fn unit_ids(&self) -> &[Label] {
        &self.unit_ids
    }

    /// `X~'X~`.
    pub fn xtx(&self) -> &DMatrix<f64> {
        &self.xtx
    }

    pub fn xtx_factor(&self) -> &SpdFactor {
        &self.xtx_factor
    }

    /// Residual mean square `sum_i u_i'u_i / nu2`.
    pub fn s2(&self) -> f64 {
        self.s2
    }

    pub fn dof(&self) -> DegreesOfFreedom {
        self.dof
    }

    pub fn k(&self) -> usize {
        self.beta_hat.len()
    }

    /// `K = k + 1`, counting the constant absorbed by demeaning.
    pub fn big_k(&self) -> usize {
        self.dof.nu1
    }

    pub fn n_units(&self) -> usize {
        self.residuals.len()
    }

    pub fn rss(&self) -> f64 {
        self.residuals.iter().map(|u| u.norm_squared()).sum()
    }
}

/// Fits the within-group estimator on a demeaned panel.
pub fn fit(demeaned: &DemeanedPanel) -> Result<FixedEffectsFit> {
    let k = demeaned.k();
    let mut xtx = DMatrix::zeros(k, k);
    let mut xty = DVector::zeros(k);
    for u in demeaned.units() {
        xtx += u.x.tr_mul(&u.x);
        xty += u.x.tr_mul(&u.y);
    }
    symmetrize(&mut xtx);
    let xtx_factor =
        SpdFactor::new(&xtx).map_err(|condition| Error::SingularDesign { condition })?;
    let beta_hat = xtx_factor.solve_vec(&xty);
    let residuals: Vec<DVector<f64>> = demeaned
        .units()
        .iter()
        .map(|u| &u.y - &u.x * &beta_hat)
        .collect();
    let n = demeaned.n_units();
    let dof = DegreesOfFreedom {
        nu1: k + 1,
        nu2: n.saturating_sub(1).max(1),
    };
    let rss: f64 = residuals.iter().map(|u| u.norm_squared()).sum();
    Ok(FixedEffectsFit {
        unit_ids: demeaned.unit_ids(),
        beta_hat,
        residuals,
        xtx,
        xtx_factor,
        s2: rss / dof.nu2 as f64,
        dof,
    })
}

/// Per-unit blocks of the hat matrix `X~ (X~'X~)^-1 X~'`.
///
/// Only `(X~'X~)^-1 X~_i'` is stored eagerly; diagonal blocks `H_i` are
/// cached on first use and off-diagonal blocks `H_ij` are rebuilt on demand.
#[derive(Debug)]
pub struct HatBlocks {
    x: Vec<DMatrix<f64>>,
    solved: Vec<DMatrix<f64>>,
    diag: Vec<OnceLock<DMatrix<f64>>>,
}

impl HatBlocks {
    pub fn n_units(&self) -> usize {
        self.x.len()
    }

    /// Demeaned regressor block `X~_i`.
    pub fn x(&self, i: usize) -> &DMatrix<f64> {
        &self.x[i]
    }

    /// `(X~'X~)^-1 X~_i'`, a `k x T_i` matrix.
    pub fn solved(&self, i: usize) -> &DMatrix<f64> {
        &self.solved[i]
    }

    /// Leverage matrix `H_i` of unit `i`.
    pub fn h(&self, i: usize) -> &DMatrix<f64> {
        self.diag[i].get_or_init(|| {
            let mut h = &self.x[i] * &self.solved[i];
            symmetrize(&mut h);
            h
        })
    }

    /// Cross block `H_ij = X~_i (X~'X~)^-1 X~_j'` (`T_i x T_j`). Computed from
    /// the lower-index side so that `H_ji` is exactly `H_ij'`.
    pub fn h_pair(&self, i: usize, j: usize) -> DMatrix<f64> {
        match i.cmp(&j) {
            std::cmp::Ordering::Equal => self.h(i).clone(),
            std::cmp::Ordering::Less => &self.x[i] * &self.solved[j],
            std::cmp::Ordering::Greater => (&self.x[j] * &self.solved[i]).transpose(),
        }
    }

    /// `tr(H_i) = tr(X~_i'X~_i (X~'X~)^-1)`.
    pub fn trace(&self, i: usize) -> f64 {
        self.x[i].transpose().component_mul(&self.solved[i]).sum()
    }
}

/// Builds hat-matrix blocks from solves against the cached factorisation.
pub fn hat_blocks(fit: &FixedEffectsFit, demeaned: &DemeanedPanel) -> HatBlocks {
    let x: Vec<DMatrix<f64>> = demeaned.units().iter().map(|u| u.x.clone()).collect();
    let solved = x
        .iter()
        .map(|xi| fit.xtx_factor().solve(&xi.transpose()))
        .collect();
    let diag = (0..x.len()).map(|_| OnceLock::new()).collect();
    HatBlocks { x, solved, diag }
}
