//! Line charts rendered straight to SVG from the result files: one chart per
//! metric/scale over sample size, plus one band-MAPE chart. Purely a function
//! of the CSV bytes, so regenerated plots are byte-identical.

use georent_core::{Error, Result};
use std::collections::BTreeMap;
use std::path::Path;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 150.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 50.0;

const PALETTE: [&str; 11] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf", "#393b79",
];

struct Series {
    label: String,
    points: Vec<(f64, f64)>,
}

/// Renders all charts for the result files in `dir`. Returns the file names
/// written; empty results produce a warning and no files.
pub fn emit_plots(dir: &Path) -> Result<Vec<String>> {
    let results = std::fs::read_to_string(dir.join("results.csv"))?;
    let mut rows = Vec::new();
    for (ln, line) in results.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(Error::Parse {
                line: ln + 1,
                msg: format!("expected 6 result columns, got {}", fields.len()),
            });
        }
        let parse = |s: &str| -> Result<f64> {
            s.parse().map_err(|_| Error::Parse {
                line: ln + 1,
                msg: format!("bad number '{s}'"),
            })
        };
        rows.push((
            fields[0].to_string(),
            parse(fields[1])?,
            fields[2].to_string(),
            fields[3].to_string(),
            parse(fields[4])?,
        ));
    }
    if rows.is_empty() {
        eprintln!("warning: results.csv has no data rows; no plots written");
        return Ok(Vec::new());
    }

    let mut written = Vec::new();

    // one chart per (metric, scale)
    let mut groups: BTreeMap<(String, String), BTreeMap<String, Vec<(f64, f64)>>> =
        BTreeMap::new();
    for (model, n, metric, scale, value) in &rows {
        groups
            .entry((metric.clone(), scale.clone()))
            .or_default()
            .entry(model.clone())
            .or_default()
            .push((*n, *value));
    }
    for ((metric, scale), by_model) in groups {
        let series: Vec<Series> = by_model
            .into_iter()
            .map(|(label, mut points)| {
                points.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
                Series { label, points }
            })
            .collect();
        let title = format!("{metric} ({scale} scale) vs sample size");
        let svg = render(&title, "n", &format!("{metric} [{scale}]"), &series);
        let name = format!("metric_{metric}_{scale}.svg");
        std::fs::write(dir.join(&name), svg)?;
        written.push(name);
    }

    // band chart
    if let Ok(bands) = std::fs::read_to_string(dir.join("bands.csv")) {
        let mut by_key: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
        for line in bands.lines().skip(1) {
            if line.trim().is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 6 {
                continue;
            }
            if let (Ok(lo), Ok(hi), Ok(mape)) =
                (f[2].parse::<f64>(), f[3].parse::<f64>(), f[4].parse::<f64>())
            {
                by_key
                    .entry(format!("{} n={}", f[0], f[1]))
                    .or_default()
                    .push(((lo + hi) / 2.0, mape));
            }
        }
        if !by_key.is_empty() {
            let series: Vec<Series> = by_key
                .into_iter()
                .map(|(label, mut points)| {
                    points.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
                    Series { label, points }
                })
                .collect();
            let svg = render(
                "MAPE by log-rent band",
                "log rent (band midpoint)",
                "MAPE [%]",
                &series,
            );
            std::fs::write(dir.join("bands.svg"), svg)?;
            written.push("bands.svg".to_string());
        }
    }
    Ok(written)
}

fn bounds(series: &[Series]) -> (f64, f64, f64, f64) {
    let mut xs: Vec<f64> = Vec::new();
    let mut ys: Vec<f64> = Vec::new();
    for s in series {
        for &(x, y) in &s.points {
            xs.push(x);
            ys.push(y);
        }
    }
    let fold = |v: &[f64]| -> (f64, f64) {
        v.iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |a, &b| {
                (a.0.min(b), a.1.max(b))
            })
    };
    let (x0, x1) = fold(&xs);
    let (y0, y1) = fold(&ys);
    let pad = |lo: f64, hi: f64| -> (f64, f64) {
        if (hi - lo).abs() < 1e-12 {
            (lo - 1.0, hi + 1.0)
        } else {
            let p = 0.05 * (hi - lo);
            (lo - p, hi + p)
        }
    };
    let (x0, x1) = pad(x0, x1);
    let (y0, y1) = pad(y0, y1);
    (x0, x1, y0, y1)
}

fn render(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let (x0, x1, y0, y1) = bounds(series);
    let sx = |x: f64| MARGIN_L + (x - x0) / (x1 - x0) * (WIDTH - MARGIN_L - MARGIN_R);
    let sy = |y: f64| HEIGHT - MARGIN_B - (y - y0) / (y1 - y0) * (HEIGHT - MARGIN_T - MARGIN_B);

    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"monospace\" font-size=\"12\">\n"
    ));
    out.push_str(&format!(
        "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n"
    ));
    out.push_str(&format!(
        "<text x=\"{:.1}\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n",
        MARGIN_L + (WIDTH - MARGIN_L - MARGIN_R) / 2.0,
        escape(title)
    ));

    // axes
    out.push_str(&format!(
        "<line x1=\"{MARGIN_L}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"black\"/>\n",
        HEIGHT - MARGIN_B,
        WIDTH - MARGIN_R,
        HEIGHT - MARGIN_B
    ));
    out.push_str(&format!(
        "<line x1=\"{MARGIN_L}\" y1=\"{MARGIN_T}\" x2=\"{MARGIN_L}\" y2=\"{:.1}\" stroke=\"black\"/>\n",
        HEIGHT - MARGIN_B
    ));
    // axis extent labels
    out.push_str(&format!(
        "<text x=\"{MARGIN_L}\" y=\"{:.1}\" text-anchor=\"middle\">{:.4}</text>\n",
        HEIGHT - MARGIN_B + 18.0,
        x0
    ));
    out.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{:.4}</text>\n",
        WIDTH - MARGIN_R,
        HEIGHT - MARGIN_B + 18.0,
        x1
    ));
    out.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{:.4}</text>\n",
        MARGIN_L - 6.0,
        HEIGHT - MARGIN_B,
        y0
    ));
    out.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{:.4}</text>\n",
        MARGIN_L - 6.0,
        MARGIN_T + 6.0,
        y1
    ));
    out.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>\n",
        MARGIN_L + (WIDTH - MARGIN_L - MARGIN_R) / 2.0,
        HEIGHT - 12.0,
        escape(x_label)
    ));
    out.push_str(&format!(
        "<text x=\"16\" y=\"{:.1}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:.1})\">{}</text>\n",
        (HEIGHT - MARGIN_B + MARGIN_T) / 2.0,
        (HEIGHT - MARGIN_B + MARGIN_T) / 2.0,
        escape(y_label)
    ));

    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let path: Vec<String> = s
            .points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        out.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
            path.join(" ")
        ));
        for &(x, y) in &s.points {
            out.push_str(&format!(
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"{color}\"/>\n",
                sx(x),
                sy(y)
            ));
        }
        let ly = MARGIN_T + 14.0 * i as f64;
        out.push_str(&format!(
            "<rect x=\"{:.1}\" y=\"{:.1}\" width=\"10\" height=\"10\" fill=\"{color}\"/>\n",
            WIDTH - MARGIN_R + 10.0,
            ly
        ));
        out.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\">{}</text>\n",
            WIDTH - MARGIN_R + 24.0,
            ly + 9.0,
            escape(&s.label)
        ));
    }
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
