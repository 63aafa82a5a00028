//! Minimal log-log SVG line charts.

use std::collections::BTreeMap;
use std::fmt::Write;

use summability::report::CsvRow;

const W: f64 = 720.0;
const H: f64 = 440.0;
const PAD: f64 = 60.0;
const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"];

/// One series per quantity: `x = grid_param`, `y = |value|`, keeping only
/// points that are positive on both axes.
pub fn chart_from_rows(title: &str, rows: &[CsvRow]) -> Option<String> {
    let mut series: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    for r in rows {
        let (Some(x), Some(re), Some(im)) = (r.grid_param, r.value_re, r.value_im) else {
            continue;
        };
        let y = re.hypot(im);
        if x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite() {
            series.entry(format!("{}:{}", r.experiment_id, r.quantity)).or_default().push((x, y));
        }
    }
    let series: Vec<(String, Vec<(f64, f64)>)> = series.into_iter().filter(|(_, p)| !p.is_empty()).collect();
    line_chart(title, &series)
}

/// Renders the series on shared log-log axes.
pub fn line_chart(title: &str, series: &[(String, Vec<(f64, f64)>)]) -> Option<String> {
    let pts = series.iter().flat_map(|s| s.1.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in pts {
        x0 = x0.min(x.log10());
        x1 = x1.max(x.log10());
        y0 = y0.min(y.log10());
        y1 = y1.max(y.log10());
    }
    if !x0.is_finite() {
        return None;
    }
    if x1 - x0 < 1e-12 {
        x1 = x0 + 1.0;
    }
    if y1 - y0 < 1e-12 {
        y0 -= 0.5;
        y1 += 0.5;
    }
    let sx = |x: f64| PAD + (x.log10() - x0) / (x1 - x0) * (W - 2.0 * PAD);
    let sy = |y: f64| H - PAD - (y.log10() - y0) / (y1 - y0) * (H - 2.0 * PAD);

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="11">"#);
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, escape(title));
    let _ = writeln!(
        s,
        r#"<path d="M{PAD} {PAD} V{b} H{r}" fill="none" stroke="black"/>"#,
        b = H - PAD,
        r = W - PAD
    );
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">log10 grid parameter [{x0:.2}, {x1:.2}]</text>"#, W / 2.0, H - 20.0);
    let _ = writeln!(
        s,
        r#"<text x="15" y="{}" transform="rotate(-90 15 {})" text-anchor="middle">log10 |value| [{y0:.2}, {y1:.2}]</text>"#,
        H / 2.0,
        H / 2.0
    );
    for (i, (name, points)) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut d = String::new();
        for (j, &(x, y)) in points.iter().enumerate() {
            let _ = write!(d, "{}{:.2} {:.2} ", if j == 0 { "M" } else { "L" }, sx(x), sy(y));
        }
        let _ = writeln!(s, r#"<path d="{}" fill="none" stroke="{color}" stroke-width="1.5"><title>{}</title></path>"#, d.trim_end(), escape(name));
        if i < 12 {
            let ly = PAD + 14.0 * i as f64;
            let _ = writeln!(s, r#"<text x="{}" y="{ly}" fill="{color}">{}</text>"#, W - PAD + 4.0 - 150.0, escape(name));
        }
    }
    s.push_str("</svg>\n");
    Some(s)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
