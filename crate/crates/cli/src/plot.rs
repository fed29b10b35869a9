//! SVG rendering of result CSVs.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use levylab::harness::{parse_results_csv, ResultRow};
use levylab::sup_abs_tail_analytic;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 72.0;
const RIGHT: f64 = 160.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 56.0;
/// Floor for the log axis so zero covariances stay drawable.
const LOG_FLOOR: f64 = 1e-4;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    CovDecay,
    TauScan,
    SupTail,
}

impl PlotKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            PlotKind::CovDecay => "cov-decay",
            PlotKind::TauScan => "tau-scan",
            PlotKind::SupTail => "sup-tail",
        }
    }
}

impl FromStr for PlotKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "cov-decay" => Ok(PlotKind::CovDecay),
            "tau-scan" => Ok(PlotKind::TauScan),
            "sup-tail" => Ok(PlotKind::SupTail),
            other => Err(format!(
                "unknown plot kind `{other}`, expected cov-decay, tau-scan or sup-tail"
            )),
        }
    }
}

/// Reads `csv`, renders the plot for `kind` (inferred from the rows when `None`) and writes `out`.
pub fn emit_plot(csv: &Path, kind: Option<PlotKind>, out: &Path) -> Result<()> {
    let text = fs::read_to_string(csv).with_context(|| format!("reading {}", csv.display()))?;
    let rows = parse_results_csv(&text).with_context(|| format!("parsing {}", csv.display()))?;
    let kind = match kind {
        Some(k) => k,
        None => infer_kind(&rows)?,
    };
    let svg = render_svg(&rows, kind);
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(out, svg).with_context(|| format!("writing {}", out.display()))?;
    Ok(())
}

fn infer_kind(rows: &[ResultRow]) -> Result<PlotKind> {
    let Some(first) = rows.first() else {
        return Ok(PlotKind::CovDecay);
    };
    match first.experiment.parse::<PlotKind>() {
        Ok(k) => Ok(k),
        Err(_) => bail!(
            "cannot infer plot kind from experiment `{}`; pass --kind",
            first.experiment
        ),
    }
}

struct Point {
    x: f64,
    y: f64,
    lo: f64,
    hi: f64,
}

struct Series {
    name: String,
    points: Vec<Point>,
    connect: bool,
}

struct Axis {
    min: f64,
    max: f64,
    log: bool,
    ticks: Vec<(f64, String)>,
    label: &'static str,
}

impl Axis {
    fn unit(&self, v: f64) -> f64 {
        let (v, lo, hi) = if self.log {
            (v.max(LOG_FLOOR).log10(), self.min.log10(), self.max.log10())
        } else {
            (v, self.min, self.max)
        };
        if hi > lo {
            ((v - lo) / (hi - lo)).clamp(0.0, 1.0)
        } else {
            0.5
        }
    }
}

/// Axes, point series and an optional analytic curve.
type Layout = (Frame, Vec<Series>, Option<Vec<(f64, f64)>>);

struct Frame {
    title: String,
    x: Axis,
    y: Axis,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        LEFT + self.x.unit(x) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - BOTTOM - self.y.unit(y) * (HEIGHT - TOP - BOTTOM)
    }
}

/// Renders the SVG document for `rows`.
pub fn render_svg(rows: &[ResultRow], kind: PlotKind) -> String {
    let (frame, series, curve) = match kind {
        PlotKind::CovDecay => cov_decay(rows),
        PlotKind::TauScan => tau_scan(rows),
        PlotKind::SupTail => sup_tail(rows),
    };
    draw(&frame, &series, curve.as_deref())
}

fn cov_decay(rows: &[ResultRow]) -> Layout {
    let mut groups: BTreeMap<String, Vec<Point>> = BTreeMap::new();
    for row in rows.iter().filter(|r| r.label == "sign_cov") {
        let (Some(n), v) = (row.n, row.value.abs()) else {
            continue;
        };
        let se = row.std_error.unwrap_or(0.0);
        groups
            .entry(format!("r={}", fmt_opt(row.r)))
            .or_default()
            .push(Point {
                x: n as f64,
                y: v,
                lo: (v - se).max(LOG_FLOOR),
                hi: v + se,
            });
    }
    let max_n = groups.values().flatten().map(|p| p.x).fold(1.0, f64::max);
    let min_y = groups
        .values()
        .flatten()
        .map(|p| p.lo.min(p.y).max(LOG_FLOOR))
        .fold(1.0, f64::min);
    let low_decade = min_y.log10().floor().min(-1.0) as i32;
    let y_ticks = (low_decade..=0)
        .map(|d| (10f64.powi(d), format!("1e{d}")))
        .collect();
    let frame = Frame {
        title: "|E[h^n_r h^n_1]| vs n".into(),
        x: Axis {
            min: 0.0,
            max: max_n,
            log: false,
            ticks: linear_ticks(0.0, max_n, 0),
            label: "n",
        },
        y: Axis {
            min: 10f64.powi(low_decade),
            max: 1.0,
            log: true,
            ticks: y_ticks,
            label: "|covariance|",
        },
    };
    let series = groups
        .into_iter()
        .map(|(name, points)| Series {
            name,
            points,
            connect: true,
        })
        .collect();
    (frame, series, None)
}

fn tau_scan(rows: &[ResultRow]) -> Layout {
    let mut groups: BTreeMap<String, Vec<Point>> = BTreeMap::new();
    let mut depths: Vec<usize> = Vec::new();
    for row in rows.iter().filter(|r| r.label == "p_tau_lt_1") {
        let Some(depth) = row.depth else { continue };
        let se = row.std_error.unwrap_or(0.0);
        depths.push(depth);
        groups
            .entry(format!("r={} C={}", fmt_opt(row.r), fmt_opt(row.c)))
            .or_default()
            .push(Point {
                x: (depth as f64).log2(),
                y: row.value,
                lo: (row.value - se).max(0.0),
                hi: (row.value + se).min(1.0),
            });
    }
    depths.sort_unstable();
    depths.dedup();
    let x_max = depths.last().map_or(1.0, |&d| (d as f64).log2().max(1.0));
    let frame = Frame {
        title: "P(tau_{r,C,N} < 1) vs N".into(),
        x: Axis {
            min: 0.0,
            max: x_max,
            log: false,
            ticks: depths
                .iter()
                .map(|&d| ((d as f64).log2(), d.to_string()))
                .collect(),
            label: "N (log2 scale)",
        },
        y: Axis {
            min: 0.0,
            max: 1.0,
            log: false,
            ticks: linear_ticks(0.0, 1.0, 1),
            label: "estimated probability",
        },
    };
    let series = groups
        .into_iter()
        .map(|(name, mut points)| {
            points.sort_by(|a, b| a.x.total_cmp(&b.x));
            Series {
                name,
                points,
                connect: true,
            }
        })
        .collect();
    (frame, series, None)
}

fn sup_tail(rows: &[ResultRow]) -> Layout {
    let mut points: Vec<Point> = rows
        .iter()
        .filter(|r| r.label == "sup_tail_mc")
        .filter_map(|r| {
            let se = r.std_error.unwrap_or(0.0);
            r.c.map(|c| Point {
                x: c,
                y: r.value,
                lo: (r.value - se).max(0.0),
                hi: (r.value + se).min(1.0),
            })
        })
        .collect();
    points.sort_by(|a, b| a.x.total_cmp(&b.x));
    let c_max = points.iter().map(|p| p.x).fold(0.0, f64::max).max(1.0) * 1.25;
    let curve = if points.is_empty() {
        None
    } else {
        Some(
            (1..=100)
                .map(|k| {
                    let c = c_max * k as f64 / 100.0;
                    (c, sup_abs_tail_analytic(c).unwrap_or(0.0))
                })
                .collect(),
        )
    };
    let frame = Frame {
        title: "P(sup |beta| > C): series and Monte Carlo".into(),
        x: Axis {
            min: 0.0,
            max: c_max,
            log: false,
            ticks: linear_ticks(0.0, c_max, 1),
            label: "C",
        },
        y: Axis {
            min: 0.0,
            max: 1.0,
            log: false,
            ticks: linear_ticks(0.0, 1.0, 1),
            label: "probability",
        },
    };
    let series = if points.is_empty() {
        Vec::new()
    } else {
        vec![Series {
            name: "Monte Carlo".into(),
            points,
            connect: false,
        }]
    };
    (frame, series, curve)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_else(|| "-".into())
}

fn linear_ticks(min: f64, max: f64, decimals: usize) -> Vec<(f64, String)> {
    (0..=5)
        .map(|k| {
            let v = min + (max - min) * k as f64 / 5.0;
            (v, format!("{v:.decimals$}"))
        })
        .collect()
}

fn draw(frame: &Frame, series: &[Series], curve: Option<&[(f64, f64)]>) -> String {
    let mut s = String::new();
    let x0 = LEFT;
    let x1 = WIDTH - RIGHT;
    let y0 = HEIGHT - BOTTOM;
    let y1 = TOP;
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        s,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        (x0 + x1) / 2.0,
        escape(&frame.title)
    );
    let _ = writeln!(
        s,
        r#"<g class="axes" stroke="black"><line x1="{x0:.2}" y1="{y0:.2}" x2="{x1:.2}" y2="{y0:.2}"/><line x1="{x0:.2}" y1="{y0:.2}" x2="{x0:.2}" y2="{y1:.2}"/></g>"#
    );
    for (v, label) in &frame.x.ticks {
        let x = frame.px(*v);
        let _ = writeln!(
            s,
            r#"<line x1="{x:.2}" y1="{y0:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            y0 + 5.0,
            y0 + 18.0,
            escape(label)
        );
    }
    for (v, label) in &frame.y.ticks {
        let y = frame.py(*v);
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{x0:.2}" y2="{y:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            x0 - 5.0,
            x0 - 8.0,
            y + 4.0,
            escape(label)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 14.0,
        escape(frame.x.label)
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(frame.y.label)
    );

    if series.is_empty() && curve.is_none() {
        let _ = writeln!(
            s,
            r#"<text class="no-data" x="{:.2}" y="{:.2}" text-anchor="middle" fill="gray">no data</text>"#,
            (x0 + x1) / 2.0,
            (y0 + y1) / 2.0
        );
    }

    if let Some(curve) = curve {
        let pts: Vec<String> = curve
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", frame.px(x), frame.py(y)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline class="analytic" fill="none" stroke="black" stroke-dasharray="4 3" points="{}"/>"#,
            pts.join(" ")
        );
        legend(&mut s, 0, "black", "series");
    }

    let offset = usize::from(curve.is_some());
    for (k, ser) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        if ser.connect && ser.points.len() > 1 {
            let pts: Vec<String> = ser
                .points
                .iter()
                .map(|p| format!("{:.2},{:.2}", frame.px(p.x), frame.py(p.y)))
                .collect();
            let _ = writeln!(
                s,
                r#"<polyline fill="none" stroke="{color}" points="{}"/>"#,
                pts.join(" ")
            );
        }
        for p in &ser.points {
            let x = frame.px(p.x);
            if p.hi > p.lo {
                let _ = writeln!(
                    s,
                    r#"<line class="error-bar" x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="{color}"/>"#,
                    frame.py(p.lo),
                    frame.py(p.hi)
                );
            }
            let _ = writeln!(
                s,
                r#"<circle class="marker" cx="{x:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
                frame.py(p.y)
            );
        }
        legend(&mut s, k + offset, color, &ser.name);
    }
    s.push_str("</svg>\n");
    s
}

fn legend(s: &mut String, slot: usize, color: &str, name: &str) {
    let x = WIDTH - RIGHT + 12.0;
    let y = TOP + 14.0 + 16.0 * slot as f64;
    let _ = writeln!(
        s,
        r#"<rect x="{x:.2}" y="{:.2}" width="10" height="10" fill="{color}"/><text x="{:.2}" y="{:.2}">{}</text>"#,
        y - 9.0,
        x + 16.0,
        y,
        escape(name)
    );
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
