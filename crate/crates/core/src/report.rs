//! Report rendering: grouped-bar SVG of per-class metrics and an SVG curve
//! of the weight sweep. Output carries no timestamps or other metadata so
//! identical inputs give byte-identical files.

use std::fmt::Write as _;

use crate::eval::MetricsReport;
use crate::fusion::SweepResult;

const BAR_COLORS: [(&str, &str); 3] = [("precision", "#4c72b0"), ("recall", "#dd8452"), ("F1", "#55a868")];

const HEIGHT: f64 = 320.0;
const MARGIN_LEFT: f64 = 56.0;
const MARGIN_RIGHT: f64 = 24.0;
const MARGIN_TOP: f64 = 48.0;
const MARGIN_BOTTOM: f64 = 56.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn header(out: &mut String, width: f64, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{HEIGHT:.0}" viewBox="0 0 {width:.0} {HEIGHT:.0}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        width / 2.0,
        escape(title)
    );
}

/// Horizontal grid lines and labels for a [0, 1] value axis.
fn value_axis(out: &mut String, width: f64) {
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    for i in 0..=5 {
        let v = i as f64 / 5.0;
        let y = MARGIN_TOP + plot_h * (1.0 - v);
        let _ = writeln!(
            out,
            r##"<line x1="{MARGIN_LEFT:.1}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="#dddddd"/>"##,
            width - MARGIN_RIGHT
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{v:.1}</text>"#,
            MARGIN_LEFT - 6.0,
            y + 4.0
        );
    }
}

fn y_of(v: f64) -> f64 {
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    MARGIN_TOP + plot_h * (1.0 - v.clamp(0.0, 1.0))
}

/// Per-class precision, recall and F1 as grouped bars.
pub fn metrics_svg(report: &MetricsReport, title: &str) -> String {
    let groups = report.per_class.len().max(1);
    let group_w = 132.0;
    let bar_w = 32.0;
    let width = MARGIN_LEFT + MARGIN_RIGHT + group_w * groups as f64 + 120.0;
    let mut out = String::new();
    header(&mut out, width, title);
    value_axis(&mut out, width - 120.0);

    for (g, class) in report.per_class.iter().enumerate() {
        let x0 = MARGIN_LEFT + group_w * g as f64 + (group_w - 3.0 * bar_w) / 2.0;
        for (k, (value, (_, color))) in [class.precision, class.recall, class.f1]
            .into_iter()
            .zip(BAR_COLORS)
            .enumerate()
        {
            let x = x0 + bar_w * k as f64;
            let y = y_of(value);
            let _ = writeln!(
                out,
                r#"<rect x="{x:.1}" y="{y:.1}" width="{:.1}" height="{:.1}" fill="{color}"/>"#,
                bar_w - 4.0,
                y_of(0.0) - y
            );
            let _ = writeln!(
                out,
                r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="10">{value:.2}</text>"#,
                x + (bar_w - 4.0) / 2.0,
                y - 4.0
            );
        }
        let label = if class.flagged {
            format!("{}*", class.label)
        } else {
            class.label.clone()
        };
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{} (n={})</text>"#,
            MARGIN_LEFT + group_w * (g as f64 + 0.5),
            HEIGHT - MARGIN_BOTTOM + 18.0,
            escape(&label),
            class.support
        );
    }

    let legend_x = width - MARGIN_RIGHT - 100.0;
    for (k, (name, color)) in BAR_COLORS.iter().enumerate() {
        let y = MARGIN_TOP + 18.0 * k as f64;
        let _ = writeln!(
            out,
            r#"<rect x="{legend_x:.1}" y="{y:.1}" width="12" height="12" fill="{color}"/>"#
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}">{name}</text>"#,
            legend_x + 18.0,
            y + 10.0
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{legend_x:.1}" y="{:.1}">macro F1 {:.3}</text>"#,
        MARGIN_TOP + 66.0,
        report.macro_avg.f1
    );
    out.push_str("</svg>\n");
    out
}

/// Score against audio weight, best weight marked.
pub fn sweep_svg(result: &SweepResult, title: &str) -> String {
    let width = 640.0;
    let plot_w = width - MARGIN_LEFT - MARGIN_RIGHT;
    let x_of = |w: f64| MARGIN_LEFT + plot_w * w;
    let mut out = String::new();
    header(&mut out, width, title);
    value_axis(&mut out, width);

    for i in 0..=10 {
        let w = i as f64 / 10.0;
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{w:.1}</text>"#,
            x_of(w),
            HEIGHT - MARGIN_BOTTOM + 18.0
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">audio weight</text>"#,
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 12.0
    );

    let points: Vec<String> = result
        .curve
        .iter()
        .map(|p| format!("{:.1},{:.1}", x_of(p.audio_weight), y_of(p.score)))
        .collect();
    let _ = writeln!(
        out,
        r##"<polyline points="{}" fill="none" stroke="#4c72b0" stroke-width="2"/>"##,
        points.join(" ")
    );
    for p in &result.curve {
        let _ = writeln!(
            out,
            r##"<circle cx="{:.1}" cy="{:.1}" r="3" fill="#4c72b0"/>"##,
            x_of(p.audio_weight),
            y_of(p.score)
        );
    }
    let (bx, by) = (x_of(result.best_weight), y_of(result.best_score));
    let _ = writeln!(
        out,
        r##"<circle cx="{bx:.1}" cy="{by:.1}" r="6" fill="none" stroke="#c44e52" stroke-width="2"/>"##
    );
    let _ = writeln!(
        out,
        r#"<text x="{bx:.1}" y="{:.1}" text-anchor="middle">best {:.2} ({:.3})</text>"#,
        by - 10.0,
        result.best_weight,
        result.best_score
    );
    out.push_str("</svg>\n");
    out
}
