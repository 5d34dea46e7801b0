//! Static SVG rendering of frequency curves. Stages are laid side by side.

use std::fmt::Write;

use mzisim_core::experiment::SweepRow;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 360.0;
const MARGIN: f64 = 40.0;

const SERIES: [(&str, &str); 3] = [
    ("f0_plus", "#1f77b4"),
    ("f0_minus", "#d62728"),
    ("f0_ungrouped", "#2ca02c"),
];

fn value(row: &SweepRow, series: usize) -> Option<f64> {
    match series {
        0 => row.point.f0_plus,
        1 => row.point.f0_minus,
        _ => row.point.f0_ungrouped,
    }
}

pub fn render(rows: &[SweepRow]) -> String {
    let panels = rows
        .iter()
        .filter_map(|r| r.stage)
        .max()
        .map_or(1, |s| s + 1);
    let (lo, hi) = rows
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
            (lo.min(r.point.phi0), hi.max(r.point.phi0))
        });
    let span = (hi - lo).max(f64::EPSILON);
    let panel_w = (WIDTH - 2.0 * MARGIN) / panels as f64;
    let sx = |r: &SweepRow| {
        MARGIN + panel_w * (r.stage.unwrap_or(0) as f64 + (r.point.phi0 - lo) / span)
    };
    let sy = |v: f64| HEIGHT - MARGIN - v * (HEIGHT - 2.0 * MARGIN);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(
        svg,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN
    );
    for (i, (name, color)) in SERIES.iter().enumerate() {
        for stage in 0..panels {
            let points: Vec<String> = rows
                .iter()
                .filter(|r| r.stage.unwrap_or(0) == stage)
                .filter_map(|r| value(r, i).map(|v| format!("{:.2},{:.2}", sx(r), sy(v))))
                .collect();
            if points.len() > 1 {
                let _ = writeln!(
                    svg,
                    r#"<polyline fill="none" stroke="{color}" points="{}"/>"#,
                    points.join(" ")
                );
            }
        }
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" font-size="12" fill="{color}">{name}</text>"#,
            MARGIN + 110.0 * i as f64,
            MARGIN - 10.0
        );
    }
    svg.push_str("</svg>\n");
    svg
}
