//! results.csv, per-figure plot files and the run manifest.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Result, SimError};
use crate::metrics::{AveragedMetrics, MeanEstimate};

use super::config::ExperimentConfig;
use super::sweep::{ResultRow, SweepResult};

pub const RESULTS_HEADER: &str = "distance,protocol,reliability,reliability_se,req_reliability,\
ack_reliability,delivery_reliability,cond_delay,cond_delay_se,cond_hops,cond_hops_se,ase,ase_se,\
topologies,trials_per_topology";

pub const MANIFEST_FILE: &str = "manifest.toml";

/// One figure analogue: a metric against distance, one series per protocol.
struct Figure {
    name: &'static str,
    y_label: &'static str,
    discovery_only: bool,
    value: fn(&AveragedMetrics) -> Option<MeanEstimate>,
}

const FIGURES: [Figure; 7] = [
    Figure {
        name: "reliability-request",
        y_label: "request reliability",
        discovery_only: true,
        value: |m| Some(m.request_reliability),
    },
    Figure {
        name: "reliability-ack",
        y_label: "acknowledgement reliability",
        discovery_only: true,
        value: |m| m.ack_reliability,
    },
    Figure {
        name: "reliability-delivery",
        y_label: "delivery reliability",
        discovery_only: false,
        value: |m| m.delivery_reliability,
    },
    Figure {
        name: "reliability-overall",
        y_label: "path reliability",
        discovery_only: false,
        value: |m| Some(m.reliability),
    },
    Figure {
        name: "cond-delay",
        y_label: "conditional delay",
        discovery_only: false,
        value: |m| m.cond_delay,
    },
    Figure {
        name: "cond-hops",
        y_label: "conditional hops",
        discovery_only: false,
        value: |m| m.cond_hops,
    },
    Figure {
        name: "ase",
        y_label: "normalized area spectral efficiency",
        discovery_only: false,
        value: |m| Some(m.ase),
    },
];

fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn result_line(row: &ResultRow) -> String {
    let m = &row.metrics;
    let mean = |e: Option<MeanEstimate>| cell(e.map(|e| e.mean));
    let se = |e: Option<MeanEstimate>| cell(e.map(|e| e.std_error));
    [
        row.distance.to_string(),
        row.label.clone(),
        m.reliability.mean.to_string(),
        m.reliability.std_error.to_string(),
        m.request_reliability.mean.to_string(),
        mean(m.ack_reliability),
        mean(m.delivery_reliability),
        mean(m.cond_delay),
        se(m.cond_delay),
        mean(m.cond_hops),
        se(m.cond_hops),
        m.ase.mean.to_string(),
        m.ase.std_error.to_string(),
        m.topologies.to_string(),
        m.trials_per_topology.to_string(),
    ]
    .join(",")
}

pub fn results_csv(sweep: &SweepResult) -> String {
    let mut out = String::from(RESULTS_HEADER);
    out.push('\n');
    for row in &sweep.rows {
        out.push_str(&result_line(row));
        out.push('\n');
    }
    out
}

pub fn manifest(config: &ExperimentConfig) -> String {
    format!(
        "# routesim {} run manifest\n# load with --config to reproduce results.csv\n{}",
        env!("CARGO_PKG_VERSION"),
        config.to_toml_string()
    )
}

fn write(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| SimError::io(path, e))
}

/// Writes `results.csv`, `plots/<figure>.svg` with a data-identical
/// `plots/<figure>.csv`, and the run manifest.
pub fn emit_outputs(sweep: &SweepResult, config: &ExperimentConfig) -> Result<()> {
    if config.protocols.is_empty() {
        return Err(SimError::config("protocol list is empty"));
    }
    let out = &config.output_directory;
    let plots = out.join("plots");
    std::fs::create_dir_all(&plots).map_err(|e| SimError::io(&plots, e))?;
    write(&out.join("results.csv"), &results_csv(sweep))?;
    write(&out.join(MANIFEST_FILE), &manifest(config))?;
    for figure in &FIGURES {
        let series = figure_series(sweep, figure);
        write(&plots.join(format!("{}.csv", figure.name)), &series_csv(&series))?;
        write(&plots.join(format!("{}.svg", figure.name)), &svg_plot(figure, &series))?;
    }
    Ok(())
}

struct Series {
    label: String,
    points: Vec<(f64, MeanEstimate)>,
}

fn figure_series(sweep: &SweepResult, figure: &Figure) -> Vec<Series> {
    let mut labels: Vec<&str> = Vec::new();
    for row in &sweep.rows {
        if (!figure.discovery_only || row.protocol.has_discovery()) && !labels.contains(&row.label.as_str()) {
            labels.push(&row.label);
        }
    }
    labels
        .into_iter()
        .map(|label| Series {
            label: label.to_string(),
            points: sweep
                .series(label)
                .into_iter()
                .filter_map(|r| (figure.value)(&r.metrics).map(|v| (r.distance, v)))
                .collect(),
        })
        .collect()
}

fn series_csv(series: &[Series]) -> String {
    let mut out = String::from("distance,protocol,value,std_error\n");
    for s in series {
        for (x, v) in &s.points {
            let _ = writeln!(out, "{x},{},{},{}", s.label, v.mean, v.std_error);
        }
    }
    out
}

const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

fn svg_plot(figure: &Figure, series: &[Series]) -> String {
    let (w, h) = (640.0, 420.0);
    let (left, right, top, bottom) = (70.0, 150.0, 30.0, 55.0);
    let (pw, ph) = (w - left - right, h - top - bottom);

    let xs = series.iter().flat_map(|s| s.points.iter().map(|p| p.0));
    let ys = series
        .iter()
        .flat_map(|s| s.points.iter().flat_map(|p| [p.1.mean - p.1.std_error, p.1.mean + p.1.std_error]));
    let (x0, x1) = bounds(xs);
    let (y0, y1) = bounds(ys);
    let pad = 0.05 * (y1 - y0);
    let (y0, y1) = (y0 - pad, y1 + pad);
    let sx = |x: f64| left + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| top + ph - (y - y0) / (y1 - y0) * ph;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for i in 0..=5 {
        let fx = x0 + (x1 - x0) * i as f64 / 5.0;
        let fy = y0 + (y1 - y0) * i as f64 / 5.0;
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{:.2}</text>"#,
            sx(fx),
            top + ph + 18.0,
            fx
        );
        let _ = writeln!(
            svg,
            r##"<line x1="{left}" x2="{:.1}" y1="{:.1}" y2="{:.1}" stroke="#ddd"/><text x="{:.1}" y="{:.1}" text-anchor="end">{:.3}</text>"##,
            left + pw,
            sy(fy),
            sy(fy),
            left - 6.0,
            sy(fy) + 4.0,
            fy
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">source-destination distance</text>"#,
        left + pw / 2.0,
        h - 15.0
    );
    let _ = writeln!(
        svg,
        r#"<text transform="translate(18 {:.1}) rotate(-90)" text-anchor="middle">{}</text>"#,
        top + ph / 2.0,
        figure.y_label
    );
    for (i, s) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let points: Vec<String> = s
            .points
            .iter()
            .map(|(x, v)| format!("{:.2},{:.2}", sx(*x), sy(v.mean)))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
            points.join(" ")
        );
        for (x, v) in &s.points {
            let _ = writeln!(
                svg,
                r#"<line x1="{0:.2}" x2="{0:.2}" y1="{1:.2}" y2="{2:.2}" stroke="{color}"/><circle cx="{0:.2}" cy="{3:.2}" r="3" fill="{color}"/>"#,
                sx(*x),
                sy(v.mean - v.std_error),
                sy(v.mean + v.std_error),
                sy(v.mean)
            );
        }
        let ly = top + 16.0 + 20.0 * i as f64;
        let _ = writeln!(
            svg,
            r#"<line x1="{0:.1}" x2="{1:.1}" y1="{ly:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="2"/><text x="{2:.1}" y="{3:.1}">{4}</text>"#,
            left + pw + 12.0,
            left + pw + 36.0,
            left + pw + 42.0,
            ly + 4.0,
            s.label
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi - lo < 1e-12 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}
