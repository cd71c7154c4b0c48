//! Static line chart of a convergence trace.

use std::fmt::Write as _;

use portfolio_core::TraceRow;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 360.0;
const MARGIN: f64 = 48.0;

/// Best value per generation as an SVG polyline.
pub fn trace_chart(trace: &[TraceRow]) -> String {
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let (x0, y0, x1, y1) = (MARGIN, HEIGHT - MARGIN, WIDTH - MARGIN, MARGIN);
    let _ = writeln!(
        svg,
        r#"<path d="M{x0} {y1} L{x0} {y0} L{x1} {y0}" fill="none" stroke="black"/>"#
    );

    if !trace.is_empty() {
        let lo = trace
            .iter()
            .map(|r| r.best_value)
            .fold(f64::INFINITY, f64::min);
        let hi = trace
            .iter()
            .map(|r| r.best_value)
            .fold(f64::NEG_INFINITY, f64::max);
        let span = if hi > lo { hi - lo } else { 1.0 };
        let last = (trace.len() - 1).max(1) as f64;
        let points: Vec<String> = trace
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let x = x0 + (x1 - x0) * i as f64 / last;
                let y = y0 - (y0 - y1) * (r.best_value - lo) / span;
                format!("{x:.2},{y:.2}")
            })
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline points="{}" fill="none" stroke="steelblue" stroke-width="2"/>"#,
            points.join(" ")
        );
        let _ = writeln!(
            svg,
            r#"<text x="{x0}" y="{}" font-size="12">{lo:.2}</text>"#,
            y0 + 16.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{x0}" y="{}" font-size="12">best {hi:.2}</text>"#,
            y1 - 8.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" font-size="12" text-anchor="end">generation {}</text>"#,
            x1,
            y0 + 16.0,
            trace.len() - 1
        );
    }
    svg.push_str("</svg>\n");
    svg
}
