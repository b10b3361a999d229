use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use sstml::evaluation::gaussian_smooth_partial;

use crate::error::{io_err, CliError, Result};
use crate::results::{read_run_csv, Manifest};

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 60.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
const COLORS: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

#[derive(Debug, Clone, PartialEq)]
pub struct PlotSeries {
    pub name: String,
    /// `(chunk_index, value)`; chunks without a value are left out.
    pub points: Vec<(usize, f64)>,
}

pub fn xml_escape(s: &str) -> String {
    s.chars()
        .map(|c| match c {
            '&' => "&amp;".to_string(),
            '<' => "&lt;".to_string(),
            '>' => "&gt;".to_string(),
            '"' => "&quot;".to_string(),
            '\'' => "&apos;".to_string(),
            c => c.to_string(),
        })
        .collect()
}

/// Line chart of values in [0, 1] against chunk index. Polyline coordinates are
/// in data units (chunk index, value) under a transform into the plot area.
pub fn render_svg(title: &str, y_label: &str, series: &[PlotSeries]) -> String {
    let xs = series.iter().flat_map(|s| s.points.iter().map(|p| p.0));
    let (xmin, xmax) = xs.fold((usize::MAX, 0), |(lo, hi), x| (lo.min(x), hi.max(x)));
    let (xmin, xmax) = if xmin > xmax { (0, 1) } else { (xmin, xmax.max(xmin + 1)) };
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let sx = pw / (xmax - xmin) as f64;
    let px = |x: f64| LEFT + (x - xmin as f64) * sx;
    let py = |y: f64| TOP + ph * (1.0 - y);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>"#,
        LEFT + pw / 2.0,
        xml_escape(title)
    );
    let _ = writeln!(s, r##"<g stroke="#444" stroke-width="1">"##);
    let _ = writeln!(s, r#"<line x1="{LEFT}" y1="{}" x2="{}" y2="{}"/>"#, TOP + ph, LEFT + pw, TOP + ph);
    let _ = writeln!(s, r#"<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{}"/>"#, TOP + ph);
    let _ = writeln!(s, "</g>");
    for k in 0..=4 {
        let v = k as f64 / 4.0;
        let _ = writeln!(
            s,
            r##"<line x1="{LEFT}" y1="{y}" x2="{}" y2="{y}" stroke="#ddd"/><text x="{}" y="{}" text-anchor="end">{v}</text>"##,
            LEFT + pw,
            LEFT - 6.0,
            py(v) + 4.0,
            y = py(v),
        );
    }
    for k in 0..=4 {
        let x = xmin + ((xmax - xmin) as f64 * k as f64 / 4.0).round() as usize;
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">{x}</text>"#,
            px(x as f64),
            TOP + ph + 18.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">chunk index</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 10.0
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0,
        xml_escape(y_label)
    );
    let _ = writeln!(
        s,
        r#"<g transform="translate({LEFT} {}) scale({sx} {}) translate({} 0)">"#,
        TOP + ph,
        -ph,
        -(xmin as f64)
    );
    for (i, ser) in series.iter().enumerate() {
        let pts: Vec<String> = ser.points.iter().map(|(x, y)| format!("{x},{y}")).collect();
        let _ = writeln!(
            s,
            r#"<polyline data-method="{}" fill="none" stroke="{}" stroke-width="1.5" vector-effect="non-scaling-stroke" points="{}"/>"#,
            xml_escape(&ser.name),
            COLORS[i % COLORS.len()],
            pts.join(" ")
        );
    }
    let _ = writeln!(s, "</g>");
    for (i, ser) in series.iter().enumerate() {
        let y = TOP + 10.0 + 20.0 * i as f64;
        let x = LEFT + pw + 15.0;
        let _ = writeln!(
            s,
            r#"<line x1="{x}" y1="{y}" x2="{}" y2="{y}" stroke="{}" stroke-width="3"/><text x="{}" y="{}">{}</text>"#,
            x + 20.0,
            COLORS[i % COLORS.len()],
            x + 26.0,
            y + 4.0,
            xml_escape(&ser.name)
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Per-method BAC curves for one stream: mean over seeds per chunk, then
/// smoothed.
pub fn method_curves(dir: &Path, manifest: &Manifest, stream: &str, sigma: f64) -> Result<Vec<PlotSeries>> {
    let mut out = Vec::new();
    for method in &manifest.method_names {
        let files: Vec<&String> = manifest
            .runs
            .iter()
            .filter(|r| r.stream == stream && &r.method == method && r.ok)
            .filter_map(|r| r.file.as_ref())
            .collect();
        if files.is_empty() {
            continue;
        }
        let mut index: Option<(Vec<usize>, &String)> = None;
        let mut sums: Vec<(f64, usize)> = Vec::new();
        for f in &files {
            let rows = read_run_csv(&dir.join(f))?;
            let idx: Vec<usize> = rows.iter().map(|r| r.chunk_index).collect();
            match &index {
                None => {
                    sums = vec![(0.0, 0); rows.len()];
                    index = Some((idx, f));
                }
                Some((first, first_file)) if *first != idx => {
                    return Err(CliError::Core(sstml::Error::InvalidInput(format!(
                        "series length or chunk indices differ between {first_file} ({} rows) and {f} ({} rows)",
                        first.len(),
                        idx.len()
                    ))));
                }
                Some(_) => {}
            }
            for (acc, r) in sums.iter_mut().zip(&rows) {
                if let Some(v) = r.metrics[0] {
                    acc.0 += v;
                    acc.1 += 1;
                }
            }
        }
        let Some((idx, _)) = index else { continue };
        let means: Vec<Option<f64>> = sums.iter().map(|(s, n)| (*n > 0).then(|| s / *n as f64)).collect();
        if means.is_empty() {
            continue;
        }
        let smooth = gaussian_smooth_partial(&means, sigma)?;
        out.push(PlotSeries {
            name: method.clone(),
            points: idx
                .into_iter()
                .zip(smooth)
                .filter_map(|(x, y)| y.map(|y| (x, y)))
                .collect(),
        });
    }
    Ok(out)
}

/// Writes `bac_<stream>.svg` for each stream in the results directory.
pub fn emit_plot(dir: &Path, sigma: f64, out_dir: Option<&Path>, only: Option<&str>) -> Result<Vec<PathBuf>> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(CliError::Usage(format!("sigma must be finite and >= 0, got {sigma}")));
    }
    let manifest = Manifest::read(dir)?;
    let out_dir = out_dir.unwrap_or(dir);
    std::fs::create_dir_all(out_dir).map_err(|e| io_err(out_dir, e))?;
    let mut written = Vec::new();
    for stream in &manifest.stream_ids {
        if only.is_some_and(|o| o != stream) {
            continue;
        }
        let series = method_curves(dir, &manifest, stream, sigma)?;
        if series.is_empty() {
            continue;
        }
        let title = format!("{stream}: BAC (gaussian sigma = {sigma})");
        let path = out_dir.join(format!("bac_{stream}.svg"));
        std::fs::write(&path, render_svg(&title, "BAC", &series)).map_err(|e| io_err(&path, e))?;
        written.push(path);
    }
    if written.is_empty() {
        return Err(CliError::Core(sstml::Error::InvalidInput(format!(
            "no successful runs to plot in {}",
            dir.display()
        ))));
    }
    Ok(written)
}
