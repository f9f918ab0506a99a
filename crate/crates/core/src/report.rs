//! End-to-end analysis: estimation, deletion sweep, measures, and the
//! machine-readable report with its CSV, JSON and SVG renderings.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::deletion::{Deletion, DeletionSweep};
use crate::dgp::{generate, DgpConfig};
use crate::error::{Error, Result};
use crate::estimator::{fit, hat_blocks, FixedEffectsFit, HatBlocks};
use crate::influence::{
    classify_units, conditional_effect, conditional_influence, joint_effect, joint_influence,
    unit_leverage, unit_outlyingness, CutoffMode, Cutoffs, EffectLabel, ResidualNormalization,
    UnitClass, UnitMatrix,
};
use crate::panel::{load_csv, within_group_transform, ColumnSchema, DemeanedPanel, Label, PanelDataset};
use crate::plot::{emit_influence_heat_plots, emit_leverage_residual_plot, PlotArtifact};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct InfluenceOptions {
    pub normalization: ResidualNormalization,
    pub cutoff: CutoffMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMeta {
    pub n: usize,
    pub t_min: usize,
    pub t_max: usize,
    pub k: usize,
    #[serde(rename = "K")]
    pub big_k: usize,
    pub nu1: usize,
    pub nu2: usize,
    pub s2: f64,
    pub beta_hat: Vec<f64>,
    pub response: String,
    pub regressors: Vec<String>,
    pub normalization: ResidualNormalization,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitRecord {
    pub id: Label,
    #[serde(rename = "L")]
    pub leverage: f64,
    #[serde(rename = "O")]
    pub outlyingness: f64,
    #[serde(rename = "C_ii")]
    pub cook: Option<f64>,
    pub class: UnitClass,
}

/// A deletion that failed, identified by unit ids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnavailableDeletion {
    pub units: Vec<Label>,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMatrices {
    /// Row and column index of every matrix.
    pub ids: Vec<Label>,
    #[serde(rename = "C_ij")]
    pub joint: UnitMatrix,
    #[serde(rename = "K")]
    pub joint_effect: UnitMatrix,
    #[serde(rename = "C_cond")]
    pub conditional: UnitMatrix,
    #[serde(rename = "M")]
    pub conditional_effect: UnitMatrix,
    #[serde(rename = "M_labels")]
    pub effect_labels: Vec<Vec<Option<EffectLabel>>>,
    pub unavailable: Vec<UnavailableDeletion>,
}

/// All unit-wise and pair-wise influence measures of one panel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfluenceReport {
    pub meta: ReportMeta,
    pub units: Vec<UnitRecord>,
    pub matrices: ReportMatrices,
    pub cutoffs: Cutoffs,
}

impl InfluenceReport {
    pub fn leverage(&self) -> Vec<f64> {
        self.units.iter().map(|u| u.leverage).collect()
    }

    pub fn outlyingness(&self) -> Vec<f64> {
        self.units.iter().map(|u| u.outlyingness).collect()
    }

    pub fn cook(&self) -> Vec<Option<f64>> {
        self.units.iter().map(|u| u.cook).collect()
    }

    pub fn classification(&self) -> Vec<UnitClass> {
        self.units.iter().map(|u| u.class).collect()
    }

    pub fn position(&self, id: &Label) -> Option<usize> {
        self.matrices.ids.iter().position(|x| x == id)
    }

    pub fn class_of(&self, id: &Label) -> Option<UnitClass> {
        self.position(id).map(|i| self.units[i].class)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Intermediate results of an analysis, kept for callers that want more
/// than the report.
pub struct Analysis {
    pub demeaned: DemeanedPanel,
    pub fit: FixedEffectsFit,
    pub hat: HatBlocks,
    pub sweep: DeletionSweep,
    pub report: InfluenceReport,
}

/// Runs the full two-step method on a panel.
pub fn analyze(data: &PanelDataset, options: InfluenceOptions) -> Result<Analysis> {
    let demeaned = within_group_transform(data);
    let fit = fit(&demeaned)?;
    let hat = hat_blocks(&fit, &demeaned);
    let sweep = DeletionSweep::compute(&fit, &hat);
    let report = build_report(data, &demeaned, &fit, &hat, &sweep, options)?;
    Ok(Analysis {
        demeaned,
        fit,
        hat,
        sweep,
        report,
    })
}

fn build_report(
    data: &PanelDataset,
    demeaned: &DemeanedPanel,
    fit: &FixedEffectsFit,
    hat: &HatBlocks,
    sweep: &DeletionSweep,
    options: InfluenceOptions,
) -> Result<InfluenceReport> {
    let n = data.n_units();
    let ids = data.unit_ids();
    let leverage = unit_leverage(hat);
    let outlyingness = unit_outlyingness(fit, demeaned, options.normalization)?;
    let cutoffs = Cutoffs::new(data.k(), n, fit.dof(), options.cutoff);
    let classes = classify_units(&leverage, &outlyingness, &cutoffs);
    let joint = joint_influence(fit, sweep)?;
    let cook = joint.diagonal();
    let conditional = conditional_influence(fit, sweep, hat)?;
    let (effect, labels) = conditional_effect(&conditional, &cook);
    let unavailable = sweep
        .failures()
        .iter()
        .map(|f| UnavailableDeletion {
            units: match f.kind {
                Deletion::One(i) => vec![ids[i].clone()],
                Deletion::Two(i, j) => vec![ids[i].clone(), ids[j].clone()],
            },
            reason: f.message.clone(),
        })
        .collect();
    let units = (0..n)
        .map(|i| UnitRecord {
            id: ids[i].clone(),
            leverage: leverage[i],
            outlyingness: outlyingness[i],
            cook: cook[i],
            class: classes[i],
        })
        .collect();
    Ok(InfluenceReport {
        meta: ReportMeta {
            n,
            t_min: data.t_min(),
            t_max: data.t_max(),
            k: data.k(),
            big_k: fit.big_k(),
            nu1: fit.dof().nu1,
            nu2: fit.dof().nu2,
            s2: fit.s2(),
            beta_hat: fit.beta_hat().iter().copied().collect(),
            response: data.response_name().to_string(),
            regressors: data.regressor_names().to_vec(),
            normalization: options.normalization,
        },
        units,
        matrices: ReportMatrices {
            ids,
            joint_effect: joint_effect(&joint),
            joint,
            conditional,
            conditional_effect: effect,
            effect_labels: labels,
            unavailable,
        },
        cutoffs,
    })
}

/// Writes an `N x N` matrix with a header row and column of unit ids.
/// Missing cells are written as `NA`.
pub fn write_matrix_csv<W: Write>(writer: W, ids: &[Label], m: &UnitMatrix) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["unit".to_string()];
    header.extend(ids.iter().map(Label::to_string));
    w.write_record(&header)?;
    for (id, row) in ids.iter().zip(m.rows()) {
        let mut rec = vec![id.to_string()];
        rec.extend(row.iter().map(|v| match v {
            Some(x) => x.to_string(),
            None => "NA".to_string(),
        }));
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io("<csv writer>", e))?;
    Ok(())
}

/// Inverse of [`write_matrix_csv`].
pub fn read_matrix_csv<R: Read>(reader: R) -> Result<(Vec<Label>, UnitMatrix)> {
    let mut rdr = csv::Reader::from_reader(reader);
    let ids: Vec<Label> = rdr.headers()?.iter().skip(1).map(Label::parse).collect();
    let mut rows = Vec::with_capacity(ids.len());
    for (r, record) in rdr.records().enumerate() {
        let record = record?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() != ids.len() + 1 || Label::parse(&record[0]) != ids[r] {
            return Err(Error::InvalidPanel(format!(
                "line {line}: matrix row does not match the header"
            )));
        }
        let row = record
            .iter()
            .skip(1)
            .map(|cell| match cell {
                "NA" => Ok(None),
                v => v.parse::<f64>().map(Some).map_err(|_| Error::NonNumeric {
                    line,
                    column: "matrix".into(),
                    value: v.to_string(),
                }),
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    if rows.len() != ids.len() {
        return Err(Error::InvalidPanel("matrix is not square".into()));
    }
    Ok((ids, UnitMatrix(rows)))
}

/// Per-unit summary table: id, L, O, C_ii, class.
pub fn write_units_csv<W: Write>(writer: W, report: &InfluenceReport) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["unit", "L", "O", "C_ii", "class"])?;
    for u in &report.units {
        w.write_record([
            u.id.to_string(),
            u.leverage.to_string(),
            u.outlyingness.to_string(),
            u.cook.map(|c| c.to_string()).unwrap_or_else(|| "NA".into()),
            u.class.as_str().to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<csv writer>", e))?;
    Ok(())
}

/// Where the panel comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum InputSource {
    Csv { path: PathBuf, schema: ColumnSchema },
    Simulate(DgpConfig),
}

/// Which artifact families to write.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EmitFlags {
    pub json: bool,
    pub csv: bool,
    pub svg: bool,
}

impl EmitFlags {
    pub const ALL: EmitFlags = EmitFlags {
        json: true,
        csv: true,
        svg: true,
    };
    pub const NONE: EmitFlags = EmitFlags {
        json: false,
        csv: false,
        svg: false,
    };

    /// Parses a comma-separated list such as `json,svg`.
    pub fn parse(list: &str) -> Result<Self> {
        let mut flags = EmitFlags::NONE;
        for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            match item {
                "json" => flags.json = true,
                "csv" => flags.csv = true,
                "svg" => flags.svg = true,
                other => {
                    return Err(Error::InvalidConfig(format!(
                        "unknown emit target `{other}` (expected json, csv, svg)"
                    )))
                }
            }
        }
        Ok(flags)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisConfig {
    pub input: InputSource,
    pub options: InfluenceOptions,
    pub out_dir: PathBuf,
    pub emit: EmitFlags,
}

/// Sidecar written next to a simulated panel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationManifest {
    pub generator: String,
    pub streams: Vec<String>,
    pub config: DgpConfig,
}

impl SimulationManifest {
    pub fn new(config: &DgpConfig) -> Self {
        SimulationManifest {
            generator: "ChaCha8Rng, seed_from_u64(seed), one stream per variable".into(),
            streams: vec![
                "0: x".into(),
                "1: alpha".into(),
                "2: epsilon".into(),
                "3: contamination".into(),
            ],
            config: config.clone(),
        }
    }
}

#[derive(Debug)]
pub struct AnalysisOutput {
    pub panel: PanelDataset,
    pub report: InfluenceReport,
    pub plots: Vec<PlotArtifact>,
    pub written: Vec<PathBuf>,
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Loads the panel named by an input source.
pub fn load_input(input: &InputSource) -> Result<PanelDataset> {
    match input {
        InputSource::Csv { path, schema } => load_csv(path, schema),
        InputSource::Simulate(cfg) => generate(cfg),
    }
}

/// Writes a simulated panel and its manifest into `dir`.
pub fn write_simulation(dir: &Path, config: &DgpConfig, panel: &PanelDataset) -> Result<Vec<PathBuf>> {
    ensure_dir(dir)?;
    let csv_path = dir.join("panel.csv");
    panel.save_csv(&csv_path)?;
    let manifest_path = dir.join("panel.manifest.json");
    let manifest = serde_json::to_string_pretty(&SimulationManifest::new(config))?;
    write_file(&manifest_path, manifest.as_bytes())?;
    Ok(vec![csv_path, manifest_path])
}

/// Load or simulate, analyse, and write the requested artifacts.
pub fn run_analysis(config: &AnalysisConfig) -> Result<AnalysisOutput> {
    let panel = load_input(&config.input)?;
    let analysis = analyze(&panel, config.options)?;
    let report = analysis.report;
    let mut written = Vec::new();
    let any = config.emit.json || config.emit.csv || config.emit.svg;
    if any {
        ensure_dir(&config.out_dir)?;
    }
    if let InputSource::Simulate(cfg) = &config.input {
        if any {
            written.extend(write_simulation(&config.out_dir, cfg, &panel)?);
        }
    }
    if config.emit.json {
        let path = config.out_dir.join("report.json");
        write_file(&path, report.to_json()?.as_bytes())?;
        written.push(path);
    }
    if config.emit.csv {
        let mut buf = Vec::new();
        write_units_csv(&mut buf, &report)?;
        let path = config.out_dir.join("units.csv");
        write_file(&path, &buf)?;
        written.push(path);
        let m = &report.matrices;
        for (name, matrix) in [
            ("joint.csv", &m.joint),
            ("joint_effect.csv", &m.joint_effect),
            ("cond.csv", &m.conditional),
            ("cond_effect.csv", &m.conditional_effect),
        ] {
            let mut buf = Vec::new();
            write_matrix_csv(&mut buf, &m.ids, matrix)?;
            let path = config.out_dir.join(name);
            write_file(&path, &buf)?;
            written.push(path);
        }
    }
    let mut plots = Vec::new();
    if config.emit.svg {
        plots.push(emit_leverage_residual_plot(&report));
        plots.extend(emit_influence_heat_plots(&report));
        for p in &plots {
            let path = config.out_dir.join(p.kind.file_name());
            write_file(&path, p.svg.as_bytes())?;
            written.push(path);
        }
    }
    Ok(AnalysisOutput {
        panel,
        report,
        plots,
        written,
    })
}
