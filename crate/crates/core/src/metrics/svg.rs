//! Minimal SVG line plots of inter-arrival series.

use std::fmt::Write;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 300.0;
const MARGIN: f64 = 40.0;
const MAX_POINTS: usize = 2000;

/// Keeps the largest value of each bucket so spikes survive decimation.
fn decimate(values: &[f64]) -> Vec<(usize, f64)> {
    if values.len() <= MAX_POINTS {
        return values.iter().copied().enumerate().collect();
    }
    let bucket = values.len().div_ceil(MAX_POINTS);
    values
        .chunks(bucket)
        .enumerate()
        .map(|(i, c)| (i * bucket, c.iter().copied().fold(f64::NEG_INFINITY, f64::max)))
        .collect()
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Plot of `values` against sample index, with an optional horizontal
/// marker line (the stream period).
pub fn line_plot(title: &str, values: &[f64], marker: Option<f64>) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ =
        writeln!(out, r#"<text x="{MARGIN}" y="20" font-family="sans-serif" font-size="14">{}</text>"#, escape(title));
    let pts = decimate(values);
    let y_max = pts.iter().map(|p| p.1).chain(marker).fold(0.0, f64::max).max(1e-9);
    let x_max = values.len().saturating_sub(1).max(1) as f64;
    let sx = |i: usize| MARGIN + (WIDTH - 2.0 * MARGIN) * i as f64 / x_max;
    let sy = |v: f64| HEIGHT - MARGIN - (HEIGHT - 2.0 * MARGIN) * v / y_max;
    let _ = writeln!(
        out,
        r#"<polyline fill="none" stroke="black" points="{m},{t} {m},{b} {r},{b}"/>"#,
        m = MARGIN,
        t = MARGIN,
        b = HEIGHT - MARGIN,
        r = WIDTH - MARGIN
    );
    let _ = writeln!(out, r#"<text x="4" y="{}" font-family="sans-serif" font-size="10">{y_max:.2} ms</text>"#, MARGIN);
    let _ = writeln!(out, r#"<text x="4" y="{}" font-family="sans-serif" font-size="10">0</text>"#, HEIGHT - MARGIN);
    if let Some(m) = marker {
        let y = sy(m);
        let _ = writeln!(
            out,
            r#"<line x1="{MARGIN}" y1="{y:.1}" x2="{}" y2="{y:.1}" stroke="red" stroke-dasharray="4 3"/>"#,
            WIDTH - MARGIN
        );
    }
    if !pts.is_empty() {
        let path: Vec<String> = pts.iter().map(|(i, v)| format!("{:.1},{:.1}", sx(*i), sy(*v))).collect();
        let _ =
            writeln!(out, r#"<polyline fill="none" stroke="steelblue" stroke-width="1" points="{}"/>"#, path.join(" "));
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plot_is_well_formed() {
        let svg = line_plot("cam <ndn>", &[20.1, 20.4, 19.9], Some(20.0));
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert!(svg.contains("cam &lt;ndn&gt;"));
        assert_eq!(svg.matches("<polyline").count(), 2);
    }

    #[test]
    fn decimation_keeps_peaks() {
        let mut v = vec![1.0; 10_000];
        v[4321] = 50.0;
        let d = decimate(&v);
        assert!(d.len() <= MAX_POINTS);
        assert!(d.iter().any(|p| p.1 == 50.0));
    }
}
