use std::fs;

use nalgebra::{DMatrix, DVector};
use panel_influence::plot::{PlotData, PlotKind};
use panel_influence::report::read_matrix_csv;
use panel_influence::{
    analyze, emit_influence_heat_plots, emit_leverage_residual_plot, generate, read_csv,
    run_analysis, AnalysisConfig, DgpConfig, EmitFlags, InfluenceOptions, InfluenceReport,
    InputSource, Label, PanelDataset, Preset, UnitSeries,
};

fn figure_report(seed: u64) -> (PanelDataset, InfluenceReport) {
    let p = generate(&DgpConfig::default().with_seed(seed).with_contamination(Preset::Figure.spec()))
        .unwrap();
    let r = analyze(&p, InfluenceOptions::default()).unwrap().report;
    (p, r)
}

/// Second regressor varies only inside unit 1, so every deletion involving
/// unit 1 leaves a rank-deficient design.
fn panel_with_singular_unit() -> PanelDataset {
    let units = (0..6)
        .map(|i| {
            let x1 = DVector::from_fn(4, |r, _| ((i * 7 + r * 3) % 5) as f64 - 2.0 + 0.1 * i as f64);
            let x2 = if i == 0 {
                DVector::from_column_slice(&[1.0, 0.0, 2.0, 0.5])
            } else {
                DVector::from_element(4, 3.0)
            };
            let y = DVector::from_fn(4, |r, _| 1.5 * x1[r] + x2[r] + ((r * 5 + i) % 3) as f64 * 0.3);
            UnitSeries {
                id: Label::Int(i as i64 + 1),
                times: (1..=4).map(Label::Int).collect(),
                y,
                x: DMatrix::from_columns(&[x1, x2]),
            }
        })
        .collect();
    PanelDataset::new("y", vec!["x1".into(), "x2".into()], units).unwrap()
}

#[test]
fn simulated_panel_survives_csv_round_trip() {
    let (p, _) = figure_report(2);
    let mut buf = Vec::new();
    p.write_csv(&mut buf).unwrap();
    let back = read_csv(buf.as_slice(), &p.default_schema()).unwrap();
    assert_eq!(back, p);
}

#[test]
fn report_survives_json_round_trip() {
    let (_, r) = figure_report(6);
    let text = r.to_json().unwrap();
    assert_eq!(InfluenceReport::from_json(&text).unwrap(), r);
}

#[test]
fn plots_are_deterministic() {
    let (_, a) = figure_report(8);
    let (_, b) = figure_report(8);
    assert_eq!(emit_leverage_residual_plot(&a).svg, emit_leverage_residual_plot(&b).svg);
    for (x, y) in emit_influence_heat_plots(&a).iter().zip(emit_influence_heat_plots(&b)) {
        assert_eq!(x.svg, y.svg);
    }
}

#[test]
fn scatter_has_one_point_per_unit_and_four_reference_lines() {
    let (_, r) = figure_report(1);
    let plot = emit_leverage_residual_plot(&r);
    assert_eq!(plot.kind, PlotKind::LeverageVsResidual);
    assert_eq!(plot.data.len(), 100);
    assert_eq!(plot.svg.matches(r#"class="point""#).count(), 100);
    assert_eq!(plot.svg.matches(r#"<line class="reference""#).count(), 4);
    for id in ["10", "20", "30"] {
        assert!(plot.svg.contains(&format!(">{id}</text>")), "label {id}");
    }
}

#[test]
fn planted_units_fall_in_their_quadrants() {
    let (_, r) = figure_report(4);
    let PlotData::Scatter(points) = emit_leverage_residual_plot(&r).data else {
        panic!("scatter expected");
    };
    let c = &r.cutoffs;
    let at = |id: i64| points.iter().find(|p| p.id == Label::Int(id)).unwrap();
    let bl = at(10);
    assert!(bl.leverage > c.leverage_cut && bl.outlyingness > c.residual_cut);
    let gl = at(20);
    assert!(gl.leverage > c.leverage_cut && gl.outlyingness <= c.residual_cut);
    let vo = at(30);
    assert!(vo.leverage <= c.leverage_cut && vo.outlyingness > c.residual_cut);
}

#[test]
fn joint_heat_diagonal_is_cook_distance() {
    let (_, r) = figure_report(0);
    let plots = emit_influence_heat_plots(&r);
    let kinds: Vec<PlotKind> = plots.iter().map(|p| p.kind).collect();
    assert_eq!(
        kinds,
        [
            PlotKind::JointInfluenceHeat,
            PlotKind::JointEffectHeat,
            PlotKind::ConditionalInfluenceHeat,
            PlotKind::ConditionalEffectHeat
        ]
    );
    let PlotData::Heat(cells) = &plots[0].data else {
        panic!("heat expected");
    };
    assert_eq!(cells.len(), 100 * 100);
    for cell in cells.iter().filter(|c| c.row == c.col) {
        let i = r.position(&cell.row).unwrap();
        assert_eq!(cell.value, r.units[i].cook);
    }
}

#[test]
fn unavailable_cells_are_hatched() {
    let p = panel_with_singular_unit();
    let r = analyze(&p, InfluenceOptions::default()).unwrap().report;
    assert_eq!(r.units[0].cook, None);
    // one single deletion plus five pairs
    assert_eq!(r.matrices.unavailable.len(), 6);
    let matrices = [
        &r.matrices.joint,
        &r.matrices.joint_effect,
        &r.matrices.conditional,
        &r.matrices.conditional_effect,
    ];
    for (plot, m) in emit_influence_heat_plots(&r).iter().zip(matrices) {
        let missing = m.unavailable().len();
        assert!(missing > 0);
        assert_eq!(plot.svg.matches(r#"class="cell na""#).count(), missing, "{:?}", plot.kind);
        assert!(plot.svg.contains("url(#na-hatch)"));
    }
    let json = r.to_json().unwrap();
    assert!(json.contains("null"));
}

#[test]
fn run_analysis_writes_readable_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let config = AnalysisConfig {
        input: InputSource::Simulate(
            DgpConfig::default()
                .with_size(40, 12)
                .with_seed(3)
                .with_contamination(Preset::Figure.spec()),
        ),
        options: InfluenceOptions::default(),
        out_dir: dir.path().to_path_buf(),
        emit: EmitFlags::ALL,
    };
    let out = run_analysis(&config).unwrap();
    for name in [
        "report.json",
        "units.csv",
        "joint.csv",
        "joint_effect.csv",
        "cond.csv",
        "cond_effect.csv",
        "lvr2.svg",
        "joint.svg",
        "joint_effect.svg",
        "cond.svg",
        "cond_effect.svg",
    ] {
        assert!(dir.path().join(name).is_file(), "{name}");
    }
    let report =
        InfluenceReport::from_json(&fs::read_to_string(dir.path().join("report.json")).unwrap())
            .unwrap();
    assert_eq!(report, out.report);
    let (ids, joint) = read_matrix_csv(fs::File::open(dir.path().join("joint.csv")).unwrap()).unwrap();
    assert_eq!(ids, report.matrices.ids);
    assert_eq!(joint, report.matrices.joint);
}

#[test]
fn uncontaminated_csv_panels_stay_normal() {
    let mut quiet = 0;
    for seed in 0..100 {
        let p = generate(&DgpConfig::default().with_size(20, 50).with_seed(seed)).unwrap();
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        let back = read_csv(buf.as_slice(), &p.default_schema()).unwrap();
        let r = analyze(&back, InfluenceOptions::default()).unwrap().report;
        let normal = r.units.iter().all(|u| u.class == panel_influence::UnitClass::Normal);
        let below_unity = r.matrices.joint.values().all(|v| v <= r.cutoffs.unity);
        if normal && below_unity {
            quiet += 1;
        }
    }
    assert!(quiet >= 95, "{quiet}/100");
}

#[test]
fn conditional_heat_diagonal_uses_zero_colour() {
    let (_, r) = figure_report(0);
    let plots = emit_influence_heat_plots(&r);
    let zero = panel_influence::plot::heat_colour(0.0);
    let cond = &plots[2];
    assert_eq!(cond.kind, PlotKind::ConditionalInfluenceHeat);
    for id in ["1", "50", "100"] {
        let cell = format!(r#"fill="{zero}"><title>i={id} j={id}: 0</title>"#);
        assert!(cond.svg.contains(&cell), "diagonal cell {id}");
    }
}
