//! Run artifacts: CSV log, JSON metadata and a two-panel SVG plot.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scenario::ScenarioConfig;
use crate::sim::{CheckReport, Metrics, Summary, TrajectoryLog};

/// A numeric table with named columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }
}

/// `t`, per-agent `x`/`v`/`u` components, `xstar` components, then metrics.
/// Agents and components are numbered from 1: `x3_2` is agent 3, component 2.
pub fn log_table(log: &TrajectoryLog) -> Table {
    let n = log.agents();
    let m = log.dim;
    let mut header = vec!["t".to_string()];
    let mut blocks = vec!["x"];
    if log.is_double() {
        blocks.push("v");
    }
    blocks.push("u");
    for b in &blocks {
        for i in 1..=n {
            for k in 1..=m {
                header.push(format!("{b}{i}_{k}"));
            }
        }
    }
    header.extend((1..=m).map(|k| format!("xstar_{k}")));
    header.extend(Metrics::NAMES.iter().map(|s| s.to_string()));

    let rows = log
        .samples
        .iter()
        .map(|s| {
            let mut row = Vec::with_capacity(header.len());
            row.push(s.t);
            row.extend(s.x.iter().flat_map(|x| x.iter().copied()));
            if let Some(v) = &s.v {
                row.extend(v.iter().flat_map(|x| x.iter().copied()));
            }
            row.extend(s.u.iter().flat_map(|x| x.iter().copied()));
            row.extend(s.xstar.iter().copied());
            row.extend(s.metrics.values());
            row
        })
        .collect();
    Table { header, rows }
}

pub fn write_csv(table: &Table, path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(&table.header)?;
    for row in &table.rows {
        w.write_record(row.iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv(path: impl AsRef<Path>) -> Result<Table> {
    let mut r = csv::Reader::from_path(path)?;
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|f| f.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::validation(format!("row {}", line + 2), e))?;
        rows.push(row);
    }
    Ok(Table { header, rows })
}

#[derive(Serialize)]
struct Meta<'a> {
    config: &'a ScenarioConfig,
    report: &'a CheckReport,
    summary: &'a Summary,
}

pub fn write_meta(
    path: impl AsRef<Path>,
    config: &ScenarioConfig,
    report: &CheckReport,
    summary: &Summary,
) -> Result<()> {
    let text = serde_json::to_string_pretty(&Meta {
        config,
        report,
        summary,
    })?;
    fs::write(path, text + "\n")?;
    Ok(())
}

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22",
    "#17becf",
];
const PANEL_W: f64 = 460.0;
const PANEL_H: f64 = 400.0;
const MARGIN: f64 = 50.0;
const PLOTTED_METRICS: [&str; 4] = ["tracking", "consensus_x", "grad_sum", "est_error"];

struct Frame {
    x0: f64,
    y0: f64,
    lo: (f64, f64),
    hi: (f64, f64),
}

impl Frame {
    fn new(x0: f64, y0: f64, pts: impl Iterator<Item = (f64, f64)>) -> Self {
        let mut lo = (f64::INFINITY, f64::INFINITY);
        let mut hi = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        for (x, y) in pts.filter(|(x, y)| x.is_finite() && y.is_finite()) {
            lo = (lo.0.min(x), lo.1.min(y));
            hi = (hi.0.max(x), hi.1.max(y));
        }
        if !lo.0.is_finite() {
            lo = (0.0, 0.0);
            hi = (1.0, 1.0);
        }
        let pad = |a: f64, b: f64| if b - a < 1e-12 { 0.5 } else { 0.05 * (b - a) };
        let (px, py) = (pad(lo.0, hi.0), pad(lo.1, hi.1));
        Frame {
            x0,
            y0,
            lo: (lo.0 - px, lo.1 - py),
            hi: (hi.0 + px, hi.1 + py),
        }
    }

    fn map(&self, x: f64, y: f64) -> (f64, f64) {
        let w = PANEL_W - 2.0 * MARGIN;
        let h = PANEL_H - 2.0 * MARGIN;
        (
            self.x0 + MARGIN + (x - self.lo.0) / (self.hi.0 - self.lo.0) * w,
            self.y0 + PANEL_H - MARGIN - (y - self.lo.1) / (self.hi.1 - self.lo.1) * h,
        )
    }

    fn axes(&self, out: &mut String, title: &str, xlabel: &str, ylabel: &str) {
        let (l, t) = (self.x0 + MARGIN, self.y0 + MARGIN);
        let (w, h) = (PANEL_W - 2.0 * MARGIN, PANEL_H - 2.0 * MARGIN);
        let _ = writeln!(
            out,
            r##"<rect x="{l:.1}" y="{t:.1}" width="{w:.1}" height="{h:.1}" fill="none" stroke="#333"/>"##
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="14">{title}</text>"#,
            l + w / 2.0,
            t - 15.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="12">{xlabel}</text>"#,
            l + w / 2.0,
            t + h + 35.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="12" transform="rotate(-90 {:.1} {:.1})">{ylabel}</text>"#,
            l - 35.0,
            t + h / 2.0,
            l - 35.0,
            t + h / 2.0
        );
        for (v, anchor_x, anchor_y, horizontal) in [
            (self.lo.0, l, t + h + 15.0, true),
            (self.hi.0, l + w, t + h + 15.0, true),
            (self.lo.1, l - 5.0, t + h, false),
            (self.hi.1, l - 5.0, t + 10.0, false),
        ] {
            let anchor = if horizontal { "middle" } else { "end" };
            let _ = writeln!(
                out,
                r#"<text x="{anchor_x:.1}" y="{anchor_y:.1}" text-anchor="{anchor}" font-size="10">{}</text>"#,
                tick(v)
            );
        }
    }

    fn polyline(&self, out: &mut String, pts: &[(f64, f64)], color: &str, dashed: bool) {
        // Split at non-finite points so gaps stay gaps.
        for run in pts.split(|(x, y)| !(x.is_finite() && y.is_finite())) {
            if run.len() < 2 {
                continue;
            }
            let path: Vec<String> = run
                .iter()
                .map(|&(x, y)| {
                    let (px, py) = self.map(x, y);
                    format!("{px:.1},{py:.1}")
                })
                .collect();
            let dash = if dashed { r#" stroke-dasharray="6 4""# } else { "" };
            let _ = writeln!(
                out,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.2"{dash}/>"#,
                path.join(" ")
            );
        }
    }
}

fn tick(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-2) {
        format!("{v:.1e}")
    } else {
        format!("{v:.2}")
    }
}

fn legend(out: &mut String, x: f64, y: f64, entries: &[(String, &str, bool)]) {
    for (k, (label, color, dashed)) in entries.iter().enumerate() {
        let yy = y + 14.0 * k as f64;
        let dash = if *dashed { r#" stroke-dasharray="6 4""# } else { "" };
        let _ = writeln!(
            out,
            r#"<line x1="{x:.1}" y1="{yy:.1}" x2="{:.1}" y2="{yy:.1}" stroke="{color}" stroke-width="2"{dash}/><text x="{:.1}" y="{:.1}" font-size="10">{label}</text>"#,
            x + 18.0,
            x + 22.0,
            yy + 3.5
        );
    }
}

/// Left panel: agent trajectories in the plane with the optimum dashed (or
/// first component against time for scalar problems). Right panel: log10 of
/// the tracking, consensus, gradient-sum and estimator metrics.
pub fn render_svg(table: &Table, title: &str) -> String {
    let mut out = String::new();
    let width = 2.0 * PANEL_W;
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{PANEL_H}" viewBox="0 0 {width} {PANEL_H}" font-family="sans-serif">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(out, "<title>{}</title>", escape(title));
    let t = table.column("t").unwrap_or_default();

    let agents: Vec<usize> = (1..)
        .take_while(|i| table.column(&format!("x{i}_1")).is_some())
        .collect();
    let planar = table.column("xstar_2").is_some();
    let series = |i: usize| -> Vec<(f64, f64)> {
        let a = table.column(&format!("x{i}_1")).unwrap_or_default();
        if planar {
            a.into_iter().zip(table.column(&format!("x{i}_2")).unwrap_or_default()).collect()
        } else {
            t.iter().copied().zip(a).collect()
        }
    };
    let star: Vec<(f64, f64)> = {
        let a = table.column("xstar_1").unwrap_or_default();
        if planar {
            a.into_iter().zip(table.column("xstar_2").unwrap_or_default()).collect()
        } else {
            t.iter().copied().zip(a).collect()
        }
    };
    let trajectories: Vec<Vec<(f64, f64)>> = agents.iter().map(|&i| series(i)).collect();
    let frame = Frame::new(
        0.0,
        0.0,
        trajectories.iter().flatten().chain(star.iter()).copied(),
    );
    let (xl, yl) = if planar { ("x₁", "x₂") } else { ("t", "x") };
    frame.axes(&mut out, "trajectories", xl, yl);
    let mut entries = Vec::new();
    for (k, tr) in trajectories.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        frame.polyline(&mut out, tr, color, false);
        entries.push((format!("agent {}", agents[k]), color, false));
    }
    frame.polyline(&mut out, &star, "#000", true);
    entries.push(("x*".to_string(), "#000", true));
    legend(&mut out, PANEL_W - MARGIN - 70.0, MARGIN + 10.0, &entries);

    let logs: Vec<(&str, Vec<(f64, f64)>)> = PLOTTED_METRICS
        .iter()
        .filter_map(|name| {
            let col = table.column(name)?;
            if col.iter().all(|v| *v == 0.0) {
                return None;
            }
            let pts = t
                .iter()
                .zip(col)
                .map(|(&t, v)| (t, if v > 0.0 { v.log10() } else { f64::NAN }))
                .collect();
            Some((*name, pts))
        })
        .collect();
    let frame = Frame::new(PANEL_W, 0.0, logs.iter().flat_map(|(_, p)| p.iter().copied()));
    frame.axes(&mut out, "metrics", "t", "log₁₀");
    let mut entries = Vec::new();
    for (k, (name, pts)) in logs.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        frame.polyline(&mut out, pts, color, false);
        entries.push((name.to_string(), color, false));
    }
    legend(&mut out, 2.0 * PANEL_W - MARGIN - 90.0, MARGIN + 10.0, &entries);
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
