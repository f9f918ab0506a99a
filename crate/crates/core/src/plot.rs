//! SVG rendering of the leverage-vs-residual scatter and the four influence
//! heat maps. Output is plain text with fixed element order and fixed
//! numeric precision, so identical reports render byte-identical files.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::influence::{UnitClass, UnitMatrix};
use crate::panel::Label;
use crate::report::InfluenceReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlotKind {
    LeverageVsResidual,
    JointInfluenceHeat,
    JointEffectHeat,
    ConditionalInfluenceHeat,
    ConditionalEffectHeat,
}

impl PlotKind {
    pub fn file_name(self) -> &'static str {
        match self {
            PlotKind::LeverageVsResidual => "lvr2.svg",
            PlotKind::JointInfluenceHeat => "joint.svg",
            PlotKind::JointEffectHeat => "joint_effect.svg",
            PlotKind::ConditionalInfluenceHeat => "cond.svg",
            PlotKind::ConditionalEffectHeat => "cond_effect.svg",
        }
    }

    fn title(self) -> &'static str {
        match self {
            PlotKind::LeverageVsResidual => "Leverage vs normalised residual squared",
            PlotKind::JointInfluenceHeat => "Joint influence C_ij (C_ii on diagonal)",
            PlotKind::JointEffectHeat => "Joint effect K_j|i",
            PlotKind::ConditionalInfluenceHeat => "Conditional influence C_i(j)",
            PlotKind::ConditionalEffectHeat => "Conditional effect M_i(j)",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatterPoint {
    pub id: Label,
    pub outlyingness: f64,
    pub leverage: f64,
    pub class: UnitClass,
}

/// One heat-map cell; row is unit `i`, column is unit `j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatCell {
    pub row: Label,
    pub col: Label,
    pub value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PlotData {
    Scatter(Vec<ScatterPoint>),
    Heat(Vec<HeatCell>),
}

impl PlotData {
    pub fn len(&self) -> usize {
        match self {
            PlotData::Scatter(p) => p.len(),
            PlotData::Heat(c) => c.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A rendered plot together with the table it was drawn from.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotArtifact {
    pub kind: PlotKind,
    pub data: PlotData,
    pub svg: String,
}

const NA_FILL: &str = "url(#na-hatch)";

fn fmt_num(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let a = v.abs();
    if !(1e-3..1e4).contains(&a) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn svg_open(out: &mut String, w: f64, h: f64) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.0} {h:.0}" font-family="sans-serif">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
}

/// Scatter of `(O_i, L_i)` with average lines (solid red) and twice-average
/// cutoff lines (dashed). Units outside the bottom-left quadrant are labelled.
pub fn emit_leverage_residual_plot(report: &InfluenceReport) -> PlotArtifact {
    let points: Vec<ScatterPoint> = report
        .units
        .iter()
        .map(|u| ScatterPoint {
            id: u.id.clone(),
            outlyingness: u.outlyingness,
            leverage: u.leverage,
            class: u.class,
        })
        .collect();
    let c = &report.cutoffs;

    let (w, h) = (640.0, 480.0);
    let (left, right, top, bottom) = (70.0, 20.0, 40.0, 50.0);
    let pw = w - left - right;
    let ph = h - top - bottom;
    let x_max = points
        .iter()
        .map(|p| p.outlyingness)
        .fold(c.residual_cut, f64::max)
        * 1.08;
    let y_max = points
        .iter()
        .map(|p| p.leverage)
        .fold(c.leverage_cut, f64::max)
        * 1.08;
    let sx = |v: f64| left + pw * v / x_max;
    let sy = |v: f64| top + ph * (1.0 - v / y_max);

    let mut s = String::new();
    svg_open(&mut s, w, h);
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        w / 2.0,
        PlotKind::LeverageVsResidual.title()
    );
    let _ = writeln!(
        s,
        r##"<rect x="{left:.1}" y="{top:.1}" width="{pw:.1}" height="{ph:.1}" fill="none" stroke="#333"/>"##
    );
    for tick in 0..=4 {
        let f = tick as f64 / 4.0;
        let (xv, yv) = (x_max * f, y_max * f);
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="10">{}</text>"#,
            sx(xv),
            top + ph + 14.0,
            fmt_num(xv)
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end" font-size="10">{}</text>"#,
            left - 5.0,
            sy(yv) + 3.0,
            fmt_num(yv)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="12">Normalised residual squared O_i</text>"#,
        left + pw / 2.0,
        h - 12.0
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.1}" text-anchor="middle" font-size="12" transform="rotate(-90 16 {:.1})">Leverage L_i</text>"#,
        top + ph / 2.0,
        top + ph / 2.0
    );

    let vline = |s: &mut String, v: f64, dash: &str, class: &str| {
        let _ = writeln!(
            s,
            r#"<line class="{class}" x1="{x:.2}" y1="{top:.1}" x2="{x:.2}" y2="{:.1}" stroke="red"{dash}/>"#,
            top + ph,
            x = sx(v)
        );
    };
    let hline = |s: &mut String, v: f64, dash: &str, class: &str| {
        let _ = writeln!(
            s,
            r#"<line class="{class}" x1="{left:.1}" y1="{y:.2}" x2="{:.1}" y2="{y:.2}" stroke="red"{dash}/>"#,
            left + pw,
            y = sy(v)
        );
    };
    vline(&mut s, c.mean_residual, "", "reference");
    hline(&mut s, c.mean_leverage, "", "reference");
    vline(&mut s, c.residual_cut, r#" stroke-dasharray="5,4""#, "reference");
    hline(&mut s, c.leverage_cut, r#" stroke-dasharray="5,4""#, "reference");

    for p in &points {
        let colour = match p.class {
            UnitClass::Normal => "#1f4e9c",
            UnitClass::VO => "#e08214",
            UnitClass::GL => "#1b9e77",
            UnitClass::BL => "#c51b1b",
        };
        let _ = writeln!(
            s,
            r#"<circle class="point" cx="{:.2}" cy="{:.2}" r="3.5" fill="{colour}"><title>{} ({})</title></circle>"#,
            sx(p.outlyingness),
            sy(p.leverage),
            escape(&p.id.to_string()),
            p.class.as_str()
        );
        if p.class != UnitClass::Normal {
            let _ = writeln!(
                s,
                r#"<text class="label" x="{:.2}" y="{:.2}" font-size="11">{}</text>"#,
                sx(p.outlyingness) + 5.0,
                sy(p.leverage) - 5.0,
                escape(&p.id.to_string())
            );
        }
    }
    s.push_str("</svg>\n");
    PlotArtifact {
        kind: PlotKind::LeverageVsResidual,
        data: PlotData::Scatter(points),
        svg: s,
    }
}

/// Upper end of the colour scale: the nearest-rank 99th percentile of the
/// available values, so a handful of extreme cells cannot flatten the rest.
pub fn heat_scale_max(values: impl Iterator<Item = f64>) -> f64 {
    let mut v: Vec<f64> = values.filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return 1.0;
    }
    v.sort_by(f64::total_cmp);
    let rank = ((0.99 * v.len() as f64).ceil() as usize).clamp(1, v.len());
    let top = v[rank - 1];
    if top > 0.0 {
        top
    } else {
        1.0
    }
}

const STOPS: [(f64, [f64; 3]); 4] = [
    (0.0, [8.0, 29.0, 88.0]),
    (0.35, [65.0, 105.0, 225.0]),
    (0.7, [244.0, 165.0, 185.0]),
    (1.0, [200.0, 16.0, 46.0]),
];

/// Dark blue at 0, red at 1; input is clamped.
pub fn heat_colour(t: f64) -> String {
    let t = if t.is_nan() { 0.0 } else { t.clamp(0.0, 1.0) };
    let mut k = 0;
    while k + 2 < STOPS.len() && t > STOPS[k + 1].0 {
        k += 1;
    }
    let (t0, c0) = STOPS[k];
    let (t1, c1) = STOPS[k + 1];
    let f = (t - t0) / (t1 - t0);
    let ch = |a: f64, b: f64| (a + (b - a) * f).round() as u8;
    format!(
        "#{:02x}{:02x}{:02x}",
        ch(c0[0], c1[0]),
        ch(c0[1], c1[1]),
        ch(c0[2], c1[2])
    )
}

struct HeatSpec<'a> {
    kind: PlotKind,
    matrix: &'a UnitMatrix,
    reference: (&'a str, f64),
}

fn render_heat(ids: &[Label], spec: HeatSpec<'_>) -> PlotArtifact {
    let n = ids.len();
    let cell = (600.0 / n.max(1) as f64).clamp(4.0, 28.0);
    let (left, top) = (60.0, 50.0);
    let grid = cell * n as f64;
    let legend_x = left + grid + 30.0;
    let w = legend_x + 130.0;
    let h = top + grid + 60.0;
    let vmax = heat_scale_max(spec.matrix.values());
    let label_step = n.div_ceil(25).max(1);

    let mut cells = Vec::with_capacity(n * n);
    let mut s = String::new();
    svg_open(&mut s, w, h);
    let _ = writeln!(
        s,
        r##"<defs><pattern id="na-hatch" width="6" height="6" patternUnits="userSpaceOnUse" patternTransform="rotate(45)"><rect width="6" height="6" fill="#e6e6e6"/><line x1="0" y1="0" x2="0" y2="6" stroke="#777" stroke-width="2"/></pattern><linearGradient id="scale" x1="0" y1="1" x2="0" y2="0">"##
    );
    for k in 0..=10 {
        let t = k as f64 / 10.0;
        let _ = writeln!(
            s,
            r#"<stop offset="{t:.1}" stop-color="{}"/>"#,
            heat_colour(t)
        );
    }
    s.push_str("</linearGradient></defs>\n");
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        w / 2.0,
        spec.kind.title()
    );

    for (i, row_id) in ids.iter().enumerate() {
        for (j, col_id) in ids.iter().enumerate() {
            let value = spec.matrix.get(i, j);
            let fill = match value {
                Some(v) => heat_colour(v / vmax),
                None => NA_FILL.to_string(),
            };
            let class = if value.is_some() { "cell" } else { "cell na" };
            let _ = writeln!(
                s,
                r#"<rect class="{class}" x="{:.2}" y="{:.2}" width="{cell:.2}" height="{cell:.2}" fill="{fill}"><title>i={} j={}: {}</title></rect>"#,
                left + j as f64 * cell,
                top + i as f64 * cell,
                escape(&row_id.to_string()),
                escape(&col_id.to_string()),
                value.map(fmt_num).unwrap_or_else(|| "NA".into())
            );
            cells.push(HeatCell {
                row: row_id.clone(),
                col: col_id.clone(),
                value,
            });
        }
    }
    for (k, id) in ids.iter().enumerate().step_by(label_step) {
        let centre = k as f64 * cell + cell / 2.0;
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end" font-size="9">{}</text>"#,
            left - 4.0,
            top + centre + 3.0,
            escape(&id.to_string())
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="9">{}</text>"#,
            left + centre,
            top + grid + 12.0,
            escape(&id.to_string())
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="11">unit j</text><text x="14" y="{:.1}" font-size="11">unit i</text>"#,
        left + grid / 2.0,
        top + grid + 28.0,
        top + grid / 2.0
    );

    // legend
    let bar_h = grid.clamp(120.0, 300.0);
    let _ = writeln!(
        s,
        r##"<rect x="{legend_x:.1}" y="{top:.1}" width="16" height="{bar_h:.1}" fill="url(#scale)" stroke="#333"/>"##
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" font-size="10">{}{}</text>"#,
        legend_x + 20.0,
        top + 8.0,
        if spec.matrix.values().any(|v| v > vmax) { "&gt;= " } else { "" },
        fmt_num(vmax)
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" font-size="10">0</text>"#,
        legend_x + 20.0,
        top + bar_h
    );
    let (ref_name, ref_value) = spec.reference;
    if ref_value <= vmax {
        let y = top + bar_h * (1.0 - ref_value / vmax);
        let _ = writeln!(
            s,
            r#"<line class="cutoff" x1="{:.1}" y1="{y:.2}" x2="{:.1}" y2="{y:.2}" stroke="black" stroke-width="2"/>"#,
            legend_x - 4.0,
            legend_x + 20.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text class="cutoff" x="{legend_x:.1}" y="{:.1}" font-size="10">{ref_name} = {}</text>"#,
        top + bar_h + 18.0,
        fmt_num(ref_value)
    );
    let _ = writeln!(
        s,
        r##"<rect x="{legend_x:.1}" y="{:.1}" width="12" height="12" fill="{NA_FILL}" stroke="#333"/><text x="{:.1}" y="{:.1}" font-size="10">not available</text>"##,
        top + bar_h + 28.0,
        legend_x + 16.0,
        top + bar_h + 38.0
    );
    s.push_str("</svg>\n");

    PlotArtifact {
        kind: spec.kind,
        data: PlotData::Heat(cells),
        svg: s,
    }
}

/// Heat maps of `C_ij`, `K_j|i`, `C_i(j)` and `M_i(j)`, in that order.
pub fn emit_influence_heat_plots(report: &InfluenceReport) -> Vec<PlotArtifact> {
    let ids = &report.matrices.ids;
    let cut_name = format!("cutoff ({})", report.cutoffs.active.as_str());
    let cut = report.cutoffs.influence_cut();
    vec![
        render_heat(
            ids,
            HeatSpec {
                kind: PlotKind::JointInfluenceHeat,
                matrix: &report.matrices.joint,
                reference: (&cut_name, cut),
            },
        ),
        render_heat(
            ids,
            HeatSpec {
                kind: PlotKind::JointEffectHeat,
                matrix: &report.matrices.joint_effect,
                reference: ("ratio", 1.0),
            },
        ),
        render_heat(
            ids,
            HeatSpec {
                kind: PlotKind::ConditionalInfluenceHeat,
                matrix: &report.matrices.conditional,
                reference: (&cut_name, cut),
            },
        ),
        render_heat(
            ids,
            HeatSpec {
                kind: PlotKind::ConditionalEffectHeat,
                matrix: &report.matrices.conditional_effect,
                reference: ("mask if >=", 1.0),
            },
        ),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn colour_scale_endpoints() {
        assert_eq!(heat_colour(0.0), "#081d58");
        assert_eq!(heat_colour(1.0), "#c8102e");
        assert_eq!(heat_colour(-3.0), heat_colour(0.0));
        assert_eq!(heat_colour(7.0), heat_colour(1.0));
    }

    #[test]
    fn percentile_clip_ignores_extremes() {
        let mut v: Vec<f64> = (1..=200).map(f64::from).collect();
        v.push(1e9);
        // nearest rank: ceil(0.99 * 201) = 199
        assert_eq!(heat_scale_max(v.into_iter()), 199.0);
        assert_eq!(heat_scale_max(std::iter::empty()), 1.0);
        assert_eq!(heat_scale_max([0.0, 0.0].into_iter()), 1.0);
    }
}
