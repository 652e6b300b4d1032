//! Minimal static SVG figures. Coordinates are printed with fixed precision
//! so the files are byte-stable.

use std::fmt::Write;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Scatter plot with one colour per label and a legend.
pub fn scatter(points: &[[f64; 2]], labels: &[u32], title: &str) -> String {
    let (w, h, m) = (640.0, 560.0, 48.0);
    let mut classes: Vec<u32> = labels.to_vec();
    classes.sort_unstable();
    classes.dedup();
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in points {
        for a in 0..2 {
            lo[a] = lo[a].min(p[a]);
            hi[a] = hi[a].max(p[a]);
        }
    }
    let span = |a: usize| if hi[a] > lo[a] { hi[a] - lo[a] } else { 1.0 };
    let plot_w = w - 2.0 * m - 80.0;
    let plot_h = h - 2.0 * m;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#, w / 2.0, escape(title));
    let _ = writeln!(
        s,
        r##"<rect x="{m}" y="{m}" width="{plot_w}" height="{plot_h}" fill="none" stroke="#999"/>"##
    );
    for (p, l) in points.iter().zip(labels) {
        let ci = classes.iter().position(|c| c == l).unwrap_or(0);
        let x = m + (p[0] - lo[0]) / span(0) * plot_w;
        let y = m + plot_h - (p[1] - lo[1]) / span(1) * plot_h;
        let _ = writeln!(
            s,
            r#"<circle cx="{x:.2}" cy="{y:.2}" r="3.5" fill="{}" fill-opacity="0.8"/>"#,
            PALETTE[ci % PALETTE.len()]
        );
    }
    for (i, c) in classes.iter().enumerate() {
        let y = m + 12.0 + 18.0 * i as f64;
        let x = w - m - 60.0;
        let _ = writeln!(
            s,
            r#"<circle cx="{x}" cy="{y}" r="5" fill="{}"/><text x="{}" y="{}">{c}</text>"#,
            PALETTE[i % PALETTE.len()],
            x + 10.0,
            y + 4.0
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Confusion matrix heat map, rows = true class, columns = predicted.
pub fn confusion(classes: &[u32], counts: &[Vec<usize>], title: &str) -> String {
    let k = classes.len();
    let cell = 48.0;
    let m = 64.0;
    let size = m + cell * k as f64 + 16.0;
    let max = counts.iter().flatten().copied().max().unwrap_or(0).max(1) as f64;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{}" viewBox="0 0 {size} {}" font-family="sans-serif" font-size="12">"#,
        size + 24.0,
        size + 24.0
    );
    let _ = writeln!(s, r#"<rect width="{size}" height="{}" fill="white"/>"#, size + 24.0);
    let _ = writeln!(s, r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#, size / 2.0, escape(title));
    for (i, row) in counts.iter().enumerate() {
        for (j, &n) in row.iter().enumerate() {
            let x = m + cell * j as f64;
            let y = m + cell * i as f64;
            let v = n as f64 / max;
            let shade = (255.0 * (1.0 - 0.85 * v)).round() as u8;
            let _ = writeln!(
                s,
                r##"<rect x="{x}" y="{y}" width="{cell}" height="{cell}" fill="rgb({shade},{shade},255)" stroke="#fff"/>"##
            );
            let ink = if v > 0.5 { "white" } else { "black" };
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}" text-anchor="middle" fill="{ink}">{n}</text>"#,
                x + cell / 2.0,
                y + cell / 2.0 + 4.0
            );
        }
    }
    for (i, c) in classes.iter().enumerate() {
        let p = m + cell * i as f64 + cell / 2.0;
        let _ = writeln!(s, r#"<text x="{p}" y="{}" text-anchor="middle">{c}</text>"#, m - 8.0);
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{c}</text>"#, m - 8.0, p + 4.0);
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">predicted</text>"#, m + cell * k as f64 / 2.0, m - 28.0);
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">true</text>"#,
        m + cell * k as f64 / 2.0,
        m + cell * k as f64 / 2.0
    );
    s.push_str("</svg>\n");
    s
}
