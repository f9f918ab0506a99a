use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use panel_influence::dgp::ContaminationSpec;
use panel_influence::report::{load_input, write_simulation};
use panel_influence::{
    fit, within_group_transform, AnalysisConfig, ColumnSchema, CutoffMode, DgpConfig, EmitFlags,
    Error, InfluenceOptions, InputSource, Preset, ResidualNormalization,
};

#[derive(Parser)]
#[command(name = "panel-influence", version, about = "Influence diagnostics for fixed-effects panel regressions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic panel (panel.csv + panel.manifest.json).
    Simulate(CommonArgs),
    /// Fit the within-group estimator and write fit.json.
    Fit(CommonArgs),
    /// Compute all measures and write report.json and the CSV matrices.
    Influence(CommonArgs),
    /// Write the leverage-vs-residual and heat-map SVGs.
    Plot(CommonArgs),
    /// Everything: report, CSV matrices and plots.
    All(CommonArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum CutoffArg {
    FMedian,
    Unity,
    FourOverN,
}

#[derive(Clone, Copy, ValueEnum)]
enum PresetArg {
    None,
    Figure,
    Appendix,
}

#[derive(Clone, Copy, ValueEnum)]
enum NormalizationArg {
    Global,
    PerPeriod,
}

#[derive(Args)]
struct CommonArgs {
    /// Long-format CSV panel. Without it a panel is simulated.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, default_value = "unit")]
    unit_col: String,
    #[arg(long, default_value = "time")]
    time_col: String,
    #[arg(long, default_value = "y")]
    y_col: String,
    /// Comma-separated regressor columns.
    #[arg(long, value_delimiter = ',', default_value = "x")]
    x_cols: Vec<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum)]
    preset: Option<PresetArg>,
    /// Units in the simulated panel.
    #[arg(long, default_value_t = 100)]
    n: usize,
    /// Periods in the simulated panel.
    #[arg(long, default_value_t = 20)]
    t: usize,
    #[arg(long, value_enum, default_value = "f-median")]
    cutoff: CutoffArg,
    #[arg(long, value_enum, default_value = "global")]
    normalization: NormalizationArg,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Comma-separated subset of json,csv,svg. Defaults depend on the subcommand.
    #[arg(long)]
    emit: Option<String>,
}

impl CommonArgs {
    fn input(&self) -> Result<InputSource, Error> {
        if let Some(path) = &self.input {
            if self.preset.is_some() {
                return Err(Error::InvalidConfig(
                    "--input and --preset are mutually exclusive".into(),
                ));
            }
            return Ok(InputSource::Csv {
                path: path.clone(),
                schema: ColumnSchema::new(
                    &self.unit_col,
                    &self.time_col,
                    &self.y_col,
                    self.x_cols.iter().cloned(),
                ),
            });
        }
        let contamination = match self.preset.unwrap_or(PresetArg::None) {
            PresetArg::None => ContaminationSpec::none(),
            PresetArg::Figure => Preset::Figure.spec(),
            PresetArg::Appendix => Preset::Appendix.spec(),
        };
        Ok(InputSource::Simulate(
            DgpConfig::default()
                .with_size(self.n, self.t)
                .with_seed(self.seed)
                .with_contamination(contamination),
        ))
    }

    fn config(&self, default_emit: EmitFlags) -> Result<AnalysisConfig, Error> {
        let emit = match &self.emit {
            Some(list) => EmitFlags::parse(list)?,
            None => default_emit,
        };
        Ok(AnalysisConfig {
            input: self.input()?,
            options: InfluenceOptions {
                normalization: match self.normalization {
                    NormalizationArg::Global => ResidualNormalization::Global,
                    NormalizationArg::PerPeriod => ResidualNormalization::PerPeriod,
                },
                cutoff: match self.cutoff {
                    CutoffArg::FMedian => CutoffMode::FMedian,
                    CutoffArg::Unity => CutoffMode::Unity,
                    CutoffArg::FourOverN => CutoffMode::FourOverN,
                },
            },
            out_dir: self.out.clone(),
            emit,
        })
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Simulate(args) => {
            let InputSource::Simulate(cfg) = args.input()? else {
                return Err(Error::InvalidConfig("simulate does not take --input".into()));
            };
            let panel = panel_influence::generate(&cfg)?;
            for p in write_simulation(&args.out, &cfg, &panel)? {
                println!("{}", p.display());
            }
        }
        Command::Fit(args) => {
            let panel = load_input(&args.input()?)?;
            let f = fit(&within_group_transform(&panel))?;
            let doc = json!({
                "n": panel.n_units(),
                "n_obs": panel.n_obs(),
                "k": panel.k(),
                "regressors": panel.regressor_names(),
                "beta_hat": f.beta_hat().iter().collect::<Vec<_>>(),
                "s2": f.s2(),
                "rss": f.rss(),
                "nu1": f.dof().nu1,
                "nu2": f.dof().nu2,
                "xtx_condition": f.xtx_factor().condition(),
            });
            std::fs::create_dir_all(&args.out).map_err(|e| Error::Io {
                path: args.out.clone(),
                source: e,
            })?;
            let path = args.out.join("fit.json");
            std::fs::write(&path, serde_json::to_string_pretty(&doc)?).map_err(|e| Error::Io {
                path: path.clone(),
                source: e,
            })?;
            println!("{}", path.display());
        }
        Command::Influence(args) => report_paths(args.config(EmitFlags {
            json: true,
            csv: true,
            svg: false,
        })?)?,
        Command::Plot(args) => report_paths(args.config(EmitFlags {
            json: false,
            csv: false,
            svg: true,
        })?)?,
        Command::All(args) => report_paths(args.config(EmitFlags::ALL)?)?,
    }
    Ok(())
}

fn report_paths(config: AnalysisConfig) -> Result<(), Error> {
    let out = panel_influence::run_analysis(&config)?;
    for p in out.written {
        println!("{}", p.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let kind = e.kind();
            let doc = json!({
                "error": {
                    "kind": kind.as_str(),
                    "module": e.module(),
                    "message": e.to_string(),
                }
            });
            eprintln!("{doc}");
            ExitCode::from(kind.exit_code() as u8)
        }
    }
}
