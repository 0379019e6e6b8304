use std::fmt::Write;

use super::{ConvergenceFit, FitScale};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 60.0;

/// Line chart of `log σ_n` against `log n` (or `n` for semilog fits), with
/// the fitted line drawn over its range.
pub fn convergence_svg(sigma: &[f64], fit: Option<&ConvergenceFit>) -> String {
    let scale = fit.map_or(FitScale::Loglog, |f| f.scale);
    let xmap = |n: usize| match scale {
        FitScale::Loglog => (n as f64).ln(),
        FitScale::Semilog => n as f64,
    };
    let data: Vec<(f64, f64)> = sigma
        .iter()
        .enumerate()
        .filter(|(_, s)| **s > 0.0)
        .map(|(i, s)| (xmap(i + 1), s.ln()))
        .collect();

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    if data.len() < 2 {
        let _ = writeln!(svg, r#"<text x="{}" y="{}">not enough data</text>"#, WIDTH / 2.0, HEIGHT / 2.0);
        svg.push_str("</svg>\n");
        return svg;
    }

    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in &data {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if x1 == x0 {
        x1 = x0 + 1.0;
    }
    if y1 == y0 {
        y1 = y0 + 1.0;
    }
    let px = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let py = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

    let (l, r, t, b) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    let _ = writeln!(
        svg,
        r#"<path d="M{l} {t} L{l} {b} L{r} {b}" fill="none" stroke="black" stroke-width="1"/>"#
    );
    let xlabel = match scale {
        FitScale::Loglog => "log n",
        FitScale::Semilog => "n",
    };
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle" font-size="13">{xlabel}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 15.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="15" y="{}" text-anchor="middle" font-size="13" transform="rotate(-90 15 {})">log max MSPE</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0
    );
    for (v, x, y, anchor) in [
        (x0, l, b + 16.0, "start"),
        (x1, r, b + 16.0, "end"),
    ] {
        let _ = writeln!(svg, r#"<text x="{x}" y="{y}" text-anchor="{anchor}" font-size="11">{v:.3}</text>"#);
    }
    for (v, y) in [(y0, b), (y1, t)] {
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{y:.2}" text-anchor="end" font-size="11">{v:.3}</text>"#,
            l - 6.0
        );
    }

    let mut points = String::new();
    for &(x, y) in &data {
        let _ = write!(points, "{:.2},{:.2} ", px(x), py(y));
    }
    let _ = writeln!(
        svg,
        r#"<polyline points="{}" fill="none" stroke="steelblue" stroke-width="1.5"/>"#,
        points.trim_end()
    );

    if let Some(f) = fit {
        let (a, c) = (xmap(f.n_range[0]), xmap(f.n_range[1]));
        let line = |x: f64| f.intercept + f.slope * x;
        let _ = writeln!(
            svg,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="firebrick" stroke-width="1.5" stroke-dasharray="6 4"/>"#,
            px(a),
            py(line(a)),
            px(c),
            py(line(c))
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" text-anchor="end" font-size="12" fill="firebrick">slope {:.3}, R² {:.3}</text>"#,
            r,
            t - 10.0,
            f.slope,
            f.r_squared
        );
    }
    svg.push_str("</svg>\n");
    svg
}
