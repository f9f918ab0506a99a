//! Synthetic panels with planted vertical outliers and leverage units.
//!
//! The base model is `y_it = b0 + b1 x_it + a_i + e_it` with
//! `x ~ N(0, 1)`, `a_i ~ U[0, 20)` and `e ~ N(0, 1)`. Units are numbered
//! `1..=N` and periods `1..=T`.
//!
//! Randomness comes from [`ChaCha8Rng`] seeded once and split into
//! independent streams, one per variable:
//!
//! | stream | variable                      | draw order        |
//! |--------|-------------------------------|-------------------|
//! | 0      | regressor `x`                 | unit-major, time  |
//! | 1      | fixed effect `a`              | unit              |
//! | 2      | error `e`                     | unit-major, time  |
//! | 3      | contamination draws           | entry, period     |
//!
//! Adding or removing contamination therefore never perturbs the base panel.

use std::collections::{BTreeSet, HashSet};
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::panel::{Label, PanelDataset, UnitSeries};

const STREAM_X: u64 = 0;
const STREAM_ALPHA: u64 = 1;
const STREAM_EPS: u64 = 2;
const STREAM_CONTAMINATION: u64 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AnomalyKind {
    VO,
    GL,
    BL,
}

/// Parameters of a normal draw.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalDraw {
    pub mean: f64,
    pub sd: f64,
}

impl NormalDraw {
    pub const fn new(mean: f64, sd: f64) -> Self {
        NormalDraw { mean, sd }
    }

    fn sampler(&self) -> Result<Normal<f64>> {
        Normal::new(self.mean, self.sd)
            .map_err(|e| Error::InvalidConfig(format!("normal({}, {}): {e}", self.mean, self.sd)))
    }
}

/// One contaminated unit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Contamination {
    pub unit: i64,
    pub kind: AnomalyKind,
    pub periods: BTreeSet<i64>,
    /// Added to the response in each affected period.
    pub y_shift: Option<NormalDraw>,
    /// Replaces the regressor in each affected period.
    pub x_replace: Option<NormalDraw>,
    /// Recompute the response from the replaced regressor, keeping the
    /// observation on the true regression plane.
    pub on_plane: bool,
}

impl Contamination {
    /// Response shifted by `N(50, 1)`.
    pub fn vertical_outlier(unit: i64, periods: impl IntoIterator<Item = i64>) -> Self {
        Contamination {
            unit,
            kind: AnomalyKind::VO,
            periods: periods.into_iter().collect(),
            y_shift: Some(NormalDraw::new(50.0, 1.0)),
            x_replace: None,
            on_plane: false,
        }
    }

    /// Regressor replaced by `N(15, 1)`, response left as drawn.
    pub fn good_leverage(unit: i64, periods: impl IntoIterator<Item = i64>) -> Self {
        Contamination {
            unit,
            kind: AnomalyKind::GL,
            periods: periods.into_iter().collect(),
            y_shift: None,
            x_replace: Some(NormalDraw::new(15.0, 1.0)),
            on_plane: false,
        }
    }

    /// Response shifted by `N(50, 1)` and regressor replaced by `N(10, 1)`.
    pub fn bad_leverage(unit: i64, periods: impl IntoIterator<Item = i64>) -> Self {
        Contamination {
            unit,
            kind: AnomalyKind::BL,
            periods: periods.into_iter().collect(),
            y_shift: Some(NormalDraw::new(50.0, 1.0)),
            x_replace: Some(NormalDraw::new(10.0, 1.0)),
            on_plane: false,
        }
    }
}

/// Planted anomalies, at most one entry per unit.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ContaminationSpec {
    pub entries: Vec<Contamination>,
}

impl ContaminationSpec {
    pub fn none() -> Self {
        ContaminationSpec::default()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn units_of(&self, kind: AnomalyKind) -> Vec<i64> {
        self.entries
            .iter()
            .filter(|e| e.kind == kind)
            .map(|e| e.unit)
            .collect()
    }

    /// Checks every entry against a `n x t` panel.
    pub fn validate(&self, n: usize, t: usize) -> Result<()> {
        let mut seen = HashSet::new();
        for e in &self.entries {
            if e.unit < 1 || e.unit > n as i64 {
                return Err(Error::InvalidConfig(format!(
                    "contamination references unit {}, panel has units 1..={n}",
                    e.unit
                )));
            }
            if !seen.insert(e.unit) {
                return Err(Error::InvalidConfig(format!(
                    "unit {} is contaminated more than once",
                    e.unit
                )));
            }
            if let Some(p) = e.periods.iter().find(|p| **p < 1 || **p > t as i64) {
                return Err(Error::InvalidConfig(format!(
                    "unit {}: contaminated period {p} outside 1..={t}",
                    e.unit
                )));
            }
        }
        Ok(())
    }
}

/// Named contamination designs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    /// Units 10 (BL), 20 (GL) and 30 (VO), contaminated for `t <= 10`.
    Figure,
    /// Two anomalies per type: 10, 40 VO; 20, 50 GL; 30, 60 BL. Units
    /// 10/20/30 are contaminated for `t <= 10`, units 40/50/60 for `t <= 5`.
    Appendix,
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "figure" => Ok(Preset::Figure),
            "appendix" => Ok(Preset::Appendix),
            other => Err(Error::InvalidConfig(format!(
                "unknown preset `{other}` (expected `figure` or `appendix`)"
            ))),
        }
    }
}

impl Preset {
    pub fn spec(self) -> ContaminationSpec {
        let early = || 1..=10;
        let entries = match self {
            Preset::Figure => vec![
                Contamination::bad_leverage(10, early()),
                Contamination::good_leverage(20, early()),
                Contamination::vertical_outlier(30, early()),
            ],
            Preset::Appendix => vec![
                Contamination::vertical_outlier(10, early()),
                Contamination::good_leverage(20, early()),
                Contamination::bad_leverage(30, early()),
                Contamination::vertical_outlier(40, 1..=5),
                Contamination::good_leverage(50, 1..=5),
                Contamination::bad_leverage(60, 1..=5),
            ],
        };
        ContaminationSpec { entries }
    }
}

/// Looks up a preset by name.
pub fn preset(name: &str) -> Result<ContaminationSpec> {
    Ok(name.parse::<Preset>()?.spec())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DgpConfig {
    pub n: usize,
    pub t: usize,
    pub beta0: f64,
    pub beta1: f64,
    pub seed: u64,
    /// Bounds of the uniform fixed-effect distribution, `[low, high)`.
    pub alpha_low: f64,
    pub alpha_high: f64,
    pub contamination: ContaminationSpec,
}

impl Default for DgpConfig {
    fn default() -> Self {
        DgpConfig {
            n: 100,
            t: 20,
            beta0: 1.0,
            beta1: 0.5,
            seed: 0,
            alpha_low: 0.0,
            alpha_high: 20.0,
            contamination: ContaminationSpec::none(),
        }
    }
}

impl DgpConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_size(mut self, n: usize, t: usize) -> Self {
        self.n = n;
        self.t = t;
        self
    }

    pub fn with_contamination(mut self, contamination: ContaminationSpec) -> Self {
        self.contamination = contamination;
        self
    }

    fn stream(&self, id: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(id);
        rng
    }
}

/// Generates the panel described by `config`.
pub fn generate(config: &DgpConfig) -> Result<PanelDataset> {
    let (n, t) = (config.n, config.t);
    if n < 2 || t < 2 {
        return Err(Error::InvalidConfig(format!(
            "need N >= 2 and T >= 2, got N={n}, T={t}"
        )));
    }
    if config.alpha_low.partial_cmp(&config.alpha_high) != Some(std::cmp::Ordering::Less) {
        return Err(Error::InvalidConfig("alpha_low must be below alpha_high".into()));
    }
    config.contamination.validate(n, t)?;

    let std_normal = Normal::new(0.0, 1.0).expect("unit normal");
    let alpha_dist = Uniform::new(config.alpha_low, config.alpha_high)
        .map_err(|e| Error::InvalidConfig(e.to_string()))?;

    let mut rng = config.stream(STREAM_X);
    let mut x: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..t).map(|_| std_normal.sample(&mut rng)).collect())
        .collect();
    let mut rng = config.stream(STREAM_ALPHA);
    let alpha: Vec<f64> = (0..n).map(|_| alpha_dist.sample(&mut rng)).collect();
    let mut rng = config.stream(STREAM_EPS);
    let eps: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..t).map(|_| std_normal.sample(&mut rng)).collect())
        .collect();

    let model = |i: usize, s: usize, xv: f64| config.beta0 + config.beta1 * xv + alpha[i] + eps[i][s];
    let mut y: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..t).map(|s| model(i, s, x[i][s])).collect())
        .collect();

    let mut rng = config.stream(STREAM_CONTAMINATION);
    for entry in &config.contamination.entries {
        let i = (entry.unit - 1) as usize;
        let shift = entry.y_shift.map(|d| d.sampler()).transpose()?;
        let replace = entry.x_replace.map(|d| d.sampler()).transpose()?;
        for &period in &entry.periods {
            let s = (period - 1) as usize;
            if let Some(d) = &replace {
                x[i][s] = d.sample(&mut rng);
                if entry.on_plane {
                    y[i][s] = model(i, s, x[i][s]);
                }
            }
            if let Some(d) = &shift {
                y[i][s] += d.sample(&mut rng);
            }
        }
    }

    let units = (0..n)
        .map(|i| UnitSeries {
            id: Label::Int(i as i64 + 1),
            times: (1..=t as i64).map(Label::Int).collect(),
            y: DVector::from_vec(y[i].clone()),
            x: DMatrix::from_vec(t, 1, x[i].clone()),
        })
        .collect();
    PanelDataset::new("y", vec!["x".to_string()], units)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_have_expected_shape() {
        let f = preset("figure").unwrap();
        assert_eq!(f.entries.len(), 3);
        assert_eq!(f.units_of(AnomalyKind::BL), vec![10]);
        assert_eq!(f.units_of(AnomalyKind::GL), vec![20]);
        assert_eq!(f.units_of(AnomalyKind::VO), vec![30]);
        let a = preset("appendix").unwrap();
        assert_eq!(a.entries.len(), 6);
        for kind in [AnomalyKind::VO, AnomalyKind::GL, AnomalyKind::BL] {
            assert_eq!(a.units_of(kind).len(), 2);
        }
        let late = a.entries.iter().find(|e| e.unit == 50).unwrap();
        assert_eq!(late.periods, (1..=5).collect());
        assert!(preset("bogus").is_err());
    }

    #[test]
    fn appendix_preset_needs_sixty_units() {
        let cfg = DgpConfig::default()
            .with_size(50, 20)
            .with_contamination(Preset::Appendix.spec());
        let err = generate(&cfg).unwrap_err();
        assert!(err.to_string().contains("unit 60"), "{err}");
        let cfg = DgpConfig::default()
            .with_size(25, 20)
            .with_contamination(Preset::Figure.spec());
        assert!(generate(&cfg).is_err());
    }

    #[test]
    fn default_panel_dimensions() {
        let p = generate(&DgpConfig::default().with_seed(3)).unwrap();
        assert_eq!(p.n_units(), 100);
        assert_eq!(p.n_obs(), 2000);
        assert_eq!(p.k(), 1);
    }

    #[test]
    fn duplicate_unit_and_bad_period_rejected() {
        let spec = ContaminationSpec {
            entries: vec![
                Contamination::vertical_outlier(3, [1]),
                Contamination::good_leverage(3, [2]),
            ],
        };
        assert!(spec.validate(10, 5).is_err());
        let spec = ContaminationSpec {
            entries: vec![Contamination::vertical_outlier(3, [6])],
        };
        assert!(spec.validate(10, 5).is_err());
    }

    #[test]
    fn good_leverage_keeps_response() {
        let base = DgpConfig::default().with_seed(11);
        let clean = generate(&base).unwrap();
        let dirty = generate(&base.clone().with_contamination(Preset::Figure.spec())).unwrap();
        let c = &clean.units()[19];
        let d = &dirty.units()[19];
        for s in 0..10 {
            assert_eq!(d.y[s], c.y[s]);
            assert!(d.x[(s, 0)] > 10.0);
        }
    }

    #[test]
    fn on_plane_moves_response_with_regressor() {
        let base = DgpConfig::default().with_seed(11);
        let mut spec = ContaminationSpec {
            entries: vec![Contamination::good_leverage(20, 1..=10)],
        };
        spec.entries[0].on_plane = true;
        let clean = generate(&base).unwrap();
        let dirty = generate(&base.clone().with_contamination(spec)).unwrap();
        let c = &clean.units()[19];
        let d = &dirty.units()[19];
        for s in 0..10 {
            let dy = d.y[s] - c.y[s];
            let dx = d.x[(s, 0)] - c.x[(s, 0)];
            assert!((dy - 0.5 * dx).abs() < 1e-12);
        }
    }
}
