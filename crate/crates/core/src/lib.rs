//! Influence diagnostics for linear fixed-effects panel regressions.
//!
//! The crate fits the within-group estimator and measures, unit by unit and
//! over each unit's full time series:
//!
//! - leverage `L_i` and outlyingness `O_i`, which place every unit on a
//!   leverage-vs-residual plane and classify it as normal, vertical outlier
//!   (VO), good leverage (GL) or bad leverage (BL);
//! - Cook's distance `C_ii`, joint influence `C_ij` and joint effect
//!   `K_j|i` from leave-one-out and leave-two-out estimates;
//! - conditional influence `C_i(j)` and conditional effect `M_i(j)`, which
//!   reveal units that mask or boost each other.
//!
//! Deletion estimates use closed-form block updates, so a full pair sweep
//! never refits the model.
//!
//! ## Examples
//!
//! Each major capability has a runnable example under `examples/`:
//!
//! - **`simulate_panel`** - synthetic panel with planted anomalies
//! - **`within_estimator`** - demeaning and the fixed-effects fit
//! - **`deletion_updates`** - leave-one/two-out updates against refits
//! - **`leverage_residual`** - leverage/outlyingness classification and plot
//! - **`influence_heatmaps`** - joint and conditional influence heat maps
//! - **`csv_workflow`** - load a CSV panel, analyse, write every artifact
//! - **`f_cutoffs`** - F-median and rule-of-thumb cutoffs
//!
//! ```bash
//! cargo run -p panel-influence --example leverage_residual
//! ```
//!
//! The `panel-influence` binary wraps [`report::run_analysis`] with the
//! `simulate`, `fit`, `influence`, `plot` and `all` subcommands.

pub mod deletion;
pub mod dgp;
pub mod error;
pub mod estimator;
pub mod fdist;
pub mod influence;
pub mod linalg;
pub mod panel;
pub mod plot;
pub mod report;

pub use deletion::{
    brute_force_refit, leave_one_out, leave_two_out, Deleter, Deletion, DeletionResult,
    DeletionSweep,
};
pub use dgp::{generate, preset, AnomalyKind, Contamination, ContaminationSpec, DgpConfig, Preset};
pub use error::{Error, ErrorKind, Result};
pub use estimator::{fit, hat_blocks, DegreesOfFreedom, FixedEffectsFit, HatBlocks};
pub use fdist::f_median_cutoff;
pub use influence::{
    classify_units, conditional_effect, conditional_influence, cook_distances, joint_effect,
    joint_influence, normalized_residuals, unit_leverage, unit_outlyingness, CutoffMode, Cutoffs,
    EffectLabel, ResidualNormalization, UnitClass, UnitMatrix,
};
pub use panel::{
    load_csv, read_csv, within_group_transform, ColumnSchema, DemeanedPanel, Label, PanelDataset,
    UnitSeries,
};
pub use plot::{emit_influence_heat_plots, emit_leverage_residual_plot, PlotArtifact, PlotKind};
pub use report::{
    analyze, run_analysis, AnalysisConfig, EmitFlags, InfluenceOptions, InfluenceReport,
    InputSource,
};
