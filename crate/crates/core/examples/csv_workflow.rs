//! Load a long-format CSV with custom column names, analyse it and write
//! every artifact.

use std::path::PathBuf;

use panel_influence::{
    run_analysis, AnalysisConfig, ColumnSchema, EmitFlags, InfluenceOptions, InputSource,
};

const DATA: &str = "\
country,year,growth,investment,openness
AT,2001,1.2,22.0,0.91
AT,2002,1.6,23.5,0.95
AT,2003,0.9,21.0,0.97
BE,2001,0.7,20.0,1.40
BE,2002,1.1,21.2,1.45
BE,2003,1.5,22.9,1.38
DE,2001,0.4,19.5,0.62
DE,2002,0.2,18.0,0.66
DE,2003,1.3,20.4,0.70
FR,2001,1.9,21.5,0.52
FR,2002,1.0,20.1,0.55
FR,2003,1.2,20.8,0.57
IT,2001,0.3,19.0,0.48
IT,2002,9.8,19.6,0.51
IT,2003,0.1,18.7,0.50
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out: PathBuf = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "out/csv_workflow".into())
        .into();
    std::fs::create_dir_all(&out)?;
    let input = out.join("growth.csv");
    std::fs::write(&input, DATA)?;

    let config = AnalysisConfig {
        input: InputSource::Csv {
            path: input,
            schema: ColumnSchema::new("country", "year", "growth", ["investment", "openness"]),
        },
        options: InfluenceOptions::default(),
        out_dir: out,
        emit: EmitFlags::ALL,
    };
    let result = run_analysis(&config)?;
    let r = &result.report;
    println!("beta_hat = {:?}", r.meta.beta_hat);
    for u in &r.units {
        println!(
            "{:>3}: L {:.3}  O {:.3}  C_ii {:>8}  {}",
            u.id,
            u.leverage,
            u.outlyingness,
            u.cook.map_or("NA".into(), |c| format!("{c:.3}")),
            u.class.as_str()
        );
    }
    for p in &result.written {
        println!("wrote {}", p.display());
    }
    Ok(())
}
