//! Minimal static SVG 1.1 line plots for regret curves.
//!
//! Output is deterministic except for a generation-timestamp comment.

use std::fmt::Write;

const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

const WIDTH: f64 = 860.0;
const HEIGHT: f64 = 520.0;
const MARGIN_LEFT: f64 = 78.0;
const MARGIN_RIGHT: f64 = 24.0;
const MARGIN_TOP: f64 = 26.0;
const MARGIN_BOTTOM: f64 = 56.0;

/// One curve: y-values indexed from round 1.
pub struct Series {
    pub label: String,
    pub values: Vec<f64>,
}

/// Round an axis maximum up to a 1/2/5 × 10^k grid step times a tick count.
fn nice_ticks(max: f64, target: usize) -> Vec<f64> {
    if max <= 0.0 {
        return vec![0.0, 1.0];
    }
    let raw_step = max / target as f64;
    let mag = 10f64.powf(raw_step.log10().floor());
    let norm = raw_step / mag;
    let step = if norm <= 1.0 {
        1.0
    } else if norm <= 2.0 {
        2.0
    } else if norm <= 5.0 {
        5.0
    } else {
        10.0
    } * mag;
    let mut ticks = Vec::new();
    let mut v = 0.0;
    while v < max + step * 0.5 {
        ticks.push(v);
        v += step;
    }
    ticks
}

fn fmt_tick(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

/// Render the curves as a standalone SVG document.
pub fn line_plot(series: &[Series], x_label: &str, y_label: &str) -> String {
    let n_max = series.iter().map(|s| s.values.len()).max().unwrap_or(1).max(1);
    let y_max = series
        .iter()
        .flat_map(|s| s.values.iter().copied())
        .fold(0.0_f64, f64::max);

    let x_ticks = nice_ticks(n_max as f64, 6);
    let y_ticks = nice_ticks(if y_max > 0.0 { y_max } else { 1.0 }, 5);
    let x_dom = *x_ticks.last().expect("ticks nonempty");
    let y_dom = *y_ticks.last().expect("ticks nonempty");

    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let x_px = |x: f64| MARGIN_LEFT + x / x_dom * plot_w;
    let y_px = |y: f64| MARGIN_TOP + plot_h - y / y_dom * plot_h;

    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let timestamp = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let _ = writeln!(s, "<!-- generated at unix time {timestamp} -->");
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(
        s,
        r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );

    // Gridlines and ticks.
    for &ty in &y_ticks {
        let y = y_px(ty);
        let _ = writeln!(
            s,
            r##"<line x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#dddddd" stroke-width="1"/>"##,
            MARGIN_LEFT,
            MARGIN_LEFT + plot_w
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="12" text-anchor="end">{}</text>"#,
            MARGIN_LEFT - 8.0,
            y + 4.0,
            fmt_tick(ty)
        );
    }
    for &tx in &x_ticks {
        let x = x_px(tx);
        let _ = writeln!(
            s,
            r##"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="#dddddd" stroke-width="1"/>"##,
            MARGIN_TOP,
            MARGIN_TOP + plot_h
        );
        let _ = writeln!(
            s,
            r#"<text x="{x:.2}" y="{:.2}" font-family="sans-serif" font-size="12" text-anchor="middle">{}</text>"#,
            MARGIN_TOP + plot_h + 18.0,
            fmt_tick(tx)
        );
    }

    // Axes.
    let _ = writeln!(
        s,
        r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="black" stroke-width="1.5"/>"#,
        MARGIN_LEFT,
        MARGIN_TOP + plot_h,
        MARGIN_LEFT + plot_w,
        MARGIN_TOP + plot_h
    );
    let _ = writeln!(
        s,
        r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="black" stroke-width="1.5"/>"#,
        MARGIN_LEFT,
        MARGIN_TOP,
        MARGIN_LEFT,
        MARGIN_TOP + plot_h
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="14" text-anchor="middle">{x_label}</text>"#,
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 12.0
    );
    let _ = writeln!(
        s,
        r#"<text x="18" y="{:.2}" font-family="sans-serif" font-size="14" text-anchor="middle" transform="rotate(-90 18 {:.2})">{y_label}</text>"#,
        MARGIN_TOP + plot_h / 2.0,
        MARGIN_TOP + plot_h / 2.0
    );

    // Curves.
    for (i, ser) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut points = String::new();
        for (j, &v) in ser.values.iter().enumerate() {
            let _ = write!(points, "{:.2},{:.2} ", x_px((j + 1) as f64), y_px(v.max(0.0)));
        }
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.8" points="{}"/>"#,
            points.trim_end()
        );
    }

    // Legend.
    for (i, ser) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let y = MARGIN_TOP + 16.0 + 18.0 * i as f64;
        let x = MARGIN_LEFT + 14.0;
        let _ = writeln!(
            s,
            r#"<line x1="{x:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{color}" stroke-width="2.5"/>"#,
            x + 26.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="12">{}</text>"#,
            x + 32.0,
            y + 4.0,
            ser.label
        );
    }

    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plot_contains_labels_and_one_polyline_per_series() {
        let series = vec![
            Series {
                label: "a".into(),
                values: vec![0.1, 0.4, 0.9],
            },
            Series {
                label: "b".into(),
                values: vec![0.2, 0.3, 0.5],
            },
        ];
        let svg = line_plot(&series, "round", "per-task cumulative regret");
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains(">round<"));
        assert!(svg.contains("per-task cumulative regret"));
        assert!(svg.contains("<!-- generated at unix time"));
    }

    #[test]
    fn ticks_are_nice_numbers() {
        let t = nice_ticks(600.0, 6);
        assert_eq!(t.first(), Some(&0.0));
        assert!(t.windows(2).all(|w| w[1] > w[0]));
        assert!(*t.last().unwrap() >= 600.0);
    }

    #[test]
    fn zero_data_still_renders() {
        let svg = line_plot(
            &[Series {
                label: "flat".into(),
                values: vec![0.0; 5],
            }],
            "round",
            "y",
        );
        assert!(svg.contains("<polyline"));
    }
}
