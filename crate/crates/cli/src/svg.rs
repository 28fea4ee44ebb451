//! Minimal SVG 1.1 emission for sweep results: a loss panel and an
//! abstention-size panel versus the abstention cost, one polyline per
//! series, folds averaged.

use mlca_core::sweep::{Series, SweepRow};
use mlca_core::LossKind;

const WIDTH: f64 = 720.0;
const PANEL_HEIGHT: f64 = 210.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 24.0;
const PANEL_GAP: f64 = 58.0;
const MARGIN_TOP: f64 = 34.0;

const SERIES: [(Series, &str, &str, &str); 3] = [
    (Series::Partial, "partial", "#1f6fb4", "none"),
    (Series::Mlc, "mlc", "#d62728", "7 4"),
    (Series::Abs, "abs", "#666666", "2 4"),
];

/// Mean of a series column per cost, costs ascending.
fn series_points(rows: &[SweepRow], series: Series, value: impl Fn(&SweepRow) -> f64) -> Vec<(f64, f64)> {
    let mut costs: Vec<f64> = rows.iter().filter(|r| r.series == series).map(|r| r.cost).collect();
    costs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    costs.dedup();
    costs
        .into_iter()
        .map(|c| {
            let fold_values: Vec<f64> = rows
                .iter()
                .filter(|r| r.series == series && r.cost == c)
                .map(&value)
                .collect();
            (c, fold_values.iter().sum::<f64>() / fold_values.len() as f64)
        })
        .collect()
}

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if v.abs() >= 1e4 || v.abs() < 1e-3 {
        return format!("{v:.2e}");
    }
    let mut s = format!("{v:.3}");
    while s.contains('.') && (s.ends_with('0') || s.ends_with('.')) {
        s.pop();
    }
    s
}

struct Panel {
    top: f64,
    x_range: (f64, f64),
    y_range: (f64, f64),
}

impl Panel {
    fn x(&self, v: f64) -> f64 {
        let (lo, hi) = self.x_range;
        let span = if hi > lo { hi - lo } else { 1.0 };
        MARGIN_LEFT + (v - lo) / span * (WIDTH - MARGIN_LEFT - MARGIN_RIGHT)
    }

    fn y(&self, v: f64) -> f64 {
        let (lo, hi) = self.y_range;
        let span = if hi > lo { hi - lo } else { 1.0 };
        self.top + PANEL_HEIGHT - (v - lo) / span * PANEL_HEIGHT
    }

    fn frame_and_ticks(&self, out: &mut String, y_title: &str) {
        let bottom = self.top + PANEL_HEIGHT;
        out.push_str(&format!(
            r##"<rect x="{:.1}" y="{:.1}" width="{:.1}" height="{:.1}" fill="none" stroke="#333"/>"##,
            MARGIN_LEFT,
            self.top,
            WIDTH - MARGIN_LEFT - MARGIN_RIGHT,
            PANEL_HEIGHT
        ));
        out.push('\n');
        for i in 0..=4 {
            let t = i as f64 / 4.0;
            let xv = self.x_range.0 + t * (self.x_range.1 - self.x_range.0);
            let yv = self.y_range.0 + t * (self.y_range.1 - self.y_range.0);
            let x = self.x(xv);
            let y = self.y(yv);
            out.push_str(&format!(
                r##"<line x1="{x:.1}" y1="{bottom:.1}" x2="{x:.1}" y2="{:.1}" stroke="#333"/>"##,
                bottom + 4.0
            ));
            out.push_str(&format!(
                r#"<text x="{x:.1}" y="{:.1}" font-size="11" text-anchor="middle" font-family="sans-serif">{}</text>"#,
                bottom + 16.0,
                tick_label(xv)
            ));
            out.push_str(&format!(
                r##"<line x1="{:.1}" y1="{y:.1}" x2="{MARGIN_LEFT:.1}" y2="{y:.1}" stroke="#333"/>"##,
                MARGIN_LEFT - 4.0
            ));
            out.push_str(&format!(
                r#"<text x="{:.1}" y="{:.1}" font-size="11" text-anchor="end" font-family="sans-serif">{}</text>"#,
                MARGIN_LEFT - 7.0,
                y + 4.0,
                tick_label(yv)
            ));
            out.push('\n');
        }
        out.push_str(&format!(
            r#"<text x="14" y="{:.1}" font-size="12" font-family="sans-serif" transform="rotate(-90 14 {:.1})" text-anchor="middle">{y_title}</text>"#,
            self.top + PANEL_HEIGHT / 2.0,
            self.top + PANEL_HEIGHT / 2.0
        ));
        out.push('\n');
    }

    fn polyline(&self, out: &mut String, points: &[(f64, f64)], color: &str, dash: &str) {
        let coords: Vec<String> =
            points.iter().map(|&(x, y)| format!("{:.2},{:.2}", self.x(x), self.y(y))).collect();
        out.push_str(&format!(
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2" stroke-dasharray="{dash}"/>"#,
            coords.join(" ")
        ));
        out.push('\n');
    }
}

fn value_bounds(series: &[Vec<(f64, f64)>]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for points in series {
        for &(_, v) in points {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    let pad = ((hi - lo) * 0.06).max(1e-9);
    (lo - pad, hi + pad)
}

pub fn render_sweep(rows: &[SweepRow]) -> String {
    let loss = rows.first().map_or(LossKind::Hamming, |r| r.loss);
    let loss_title = match loss {
        LossKind::Hamming => "Hamming loss x100/m",
        LossKind::Rank => "rank loss /m",
        LossKind::FMeasure => "expected F",
    };
    let gen_series: Vec<Vec<(f64, f64)>> =
        SERIES.iter().map(|&(s, ..)| series_points(rows, s, |r| r.gen_loss)).collect();
    let abst_series: Vec<Vec<(f64, f64)>> =
        SERIES.iter().map(|&(s, ..)| series_points(rows, s, |r| r.abstention_pct)).collect();

    let x_lo = gen_series.iter().flatten().map(|&(c, _)| c).fold(f64::INFINITY, f64::min);
    let x_hi = gen_series.iter().flatten().map(|&(c, _)| c).fold(f64::NEG_INFINITY, f64::max);
    let x_range = if x_lo.is_finite() { (x_lo, x_hi) } else { (0.0, 1.0) };

    let height = MARGIN_TOP + 2.0 * PANEL_HEIGHT + PANEL_GAP + 44.0;
    let mut out = format!(
        r#"<svg version="1.1" xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}">"#
    );
    out.push('\n');
    out.push_str(&format!(
        r#"<text x="{:.1}" y="20" font-size="14" font-family="sans-serif" text-anchor="middle">generalized loss and abstention size vs abstention cost</text>"#,
        WIDTH / 2.0
    ));
    out.push('\n');

    let top_panel = Panel { top: MARGIN_TOP, x_range, y_range: value_bounds(&gen_series) };
    top_panel.frame_and_ticks(&mut out, loss_title);
    for (i, &(_, _, color, dash)) in SERIES.iter().enumerate() {
        if !gen_series[i].is_empty() {
            top_panel.polyline(&mut out, &gen_series[i], color, dash);
        }
    }
    // Legend.
    for (i, &(_, name, color, dash)) in SERIES.iter().enumerate() {
        let y = MARGIN_TOP + 16.0 + 16.0 * i as f64;
        out.push_str(&format!(
            r#"<line x1="{:.1}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="{color}" stroke-width="2" stroke-dasharray="{dash}"/>"#,
            WIDTH - 150.0,
            WIDTH - 120.0
        ));
        out.push_str(&format!(
            r#"<text x="{:.1}" y="{:.1}" font-size="12" font-family="sans-serif">{name}</text>"#,
            WIDTH - 114.0,
            y + 4.0
        ));
        out.push('\n');
    }

    let bottom_panel = Panel {
        top: MARGIN_TOP + PANEL_HEIGHT + PANEL_GAP,
        x_range,
        y_range: value_bounds(&abst_series),
    };
    bottom_panel.frame_and_ticks(&mut out, "abstention size %");
    for (i, &(_, _, color, dash)) in SERIES.iter().enumerate() {
        if !abst_series[i].is_empty() {
            bottom_panel.polyline(&mut out, &abst_series[i], color, dash);
        }
    }
    out.push_str(&format!(
        r#"<text x="{:.1}" y="{:.1}" font-size="12" font-family="sans-serif" text-anchor="middle">abstention cost c</text>"#,
        WIDTH / 2.0,
        height - 10.0
    ));
    out.push_str("\n</svg>\n");
    out
}
