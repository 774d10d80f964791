//! Hand-written SVG charts: mean game length per level with variance bands,
//! and manager selection frequency per cell tag. Every plotted value is also
//! emitted as a `<text class="datum">` annotation carrying the same string
//! written to the aggregates CSV.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::experiments::{selection_buckets, AggregateRecord, Condition};
use crate::io::{format_sig6, write_text, IoError, Provenance};

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 420.0;
const MARGIN_LEFT: f64 = 64.0;
const MARGIN_RIGHT: f64 = 170.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 52.0;
const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

struct Series {
    name: String,
    /// `(level, value, band half-width)`.
    points: Vec<(usize, f64, f64)>,
    dashed: bool,
}

struct Axes {
    levels: Vec<usize>,
    y_min: f64,
    y_max: f64,
}

impl Axes {
    fn x(&self, level: usize) -> f64 {
        let plot = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
        let i = self.levels.iter().position(|l| *l == level).unwrap_or(0);
        if self.levels.len() == 1 {
            MARGIN_LEFT + plot / 2.0
        } else {
            MARGIN_LEFT + plot * i as f64 / (self.levels.len() - 1) as f64
        }
    }

    fn y(&self, v: f64) -> f64 {
        let plot = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
        let span = (self.y_max - self.y_min).max(f64::EPSILON);
        HEIGHT - MARGIN_BOTTOM - plot * (v - self.y_min) / span
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn nice_max(v: f64) -> f64 {
    if v <= 0.0 {
        return 1.0;
    }
    let step = 10f64.powf(v.log10().floor());
    (v / step).ceil() * step
}

fn render(title: &str, y_label: &str, provenance: &Provenance, axes: &Axes, series: &[Series]) -> String {
    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(
        s,
        "<desc>ibl-delegate {} master_seed={} profile={}</desc>",
        escape(&provenance.artifact_version),
        provenance.master_seed,
        escape(&provenance.profile)
    )
    .unwrap();
    writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    writeln!(s, r#"<text x="{}" y="24" font-size="15" text-anchor="middle">{}</text>"#, WIDTH / 2.0, escape(title))
        .unwrap();

    let (x0, x1) = (MARGIN_LEFT, WIDTH - MARGIN_RIGHT);
    let (y0, y1) = (HEIGHT - MARGIN_BOTTOM, MARGIN_TOP);
    writeln!(s, r#"<g stroke="black"><line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}"/><line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}"/></g>"#)
        .unwrap();
    for i in 0..=5 {
        let v = axes.y_min + (axes.y_max - axes.y_min) * i as f64 / 5.0;
        let y = axes.y(v);
        writeln!(
            s,
            r##"<line x1="{x0}" y1="{y:.2}" x2="{x1}" y2="{y:.2}" stroke="#ddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"##,
            x0 - 6.0,
            y + 4.0,
            format_sig6(v)
        )
        .unwrap();
    }
    for &l in &axes.levels {
        writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{l}</text>"#, axes.x(l), y0 + 18.0).unwrap();
    }
    writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">error cells per tag (level)</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 10.0
    )
    .unwrap();
    writeln!(
        s,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(y_label)
    )
    .unwrap();

    for (i, ser) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let name = escape(&ser.name);
        writeln!(s, r#"<g class="series" data-series="{name}">"#).unwrap();
        if ser.points.iter().any(|p| p.2 > 0.0) && ser.points.len() > 1 {
            let upper = ser.points.iter().map(|p| format!("{:.2},{:.2}", axes.x(p.0), axes.y(p.1 + p.2)));
            let lower = ser.points.iter().rev().map(|p| format!("{:.2},{:.2}", axes.x(p.0), axes.y((p.1 - p.2).max(axes.y_min))));
            let poly: Vec<String> = upper.chain(lower).collect();
            writeln!(s, r#"<polygon class="band" points="{}" fill="{color}" fill-opacity="0.12" stroke="none"/>"#, poly.join(" "))
                .unwrap();
        }
        if ser.points.len() > 1 {
            let line: Vec<String> = ser.points.iter().map(|p| format!("{:.2},{:.2}", axes.x(p.0), axes.y(p.1))).collect();
            let dash = if ser.dashed { r#" stroke-dasharray="6 4""# } else { "" };
            writeln!(s, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"{dash}/>"#, line.join(" "))
                .unwrap();
        }
        for &(level, v, _) in &ser.points {
            let (x, y) = (axes.x(level), axes.y(v));
            writeln!(s, r#"<circle cx="{x:.2}" cy="{y:.2}" r="3.5" fill="{color}"/>"#).unwrap();
            writeln!(
                s,
                r#"<text class="datum" data-series="{name}" data-level="{level}" x="{x:.2}" y="{:.2}" font-size="9" text-anchor="middle" fill="{color}">{}</text>"#,
                y - 7.0,
                format_sig6(v)
            )
            .unwrap();
        }
        let ly = MARGIN_TOP + 10.0 + 20.0 * i as f64;
        let lx = WIDTH - MARGIN_RIGHT + 16.0;
        writeln!(
            s,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="3"/><text x="{}" y="{}">{name}</text>"#,
            lx + 22.0,
            lx + 28.0,
            ly + 4.0
        )
        .unwrap();
        writeln!(s, "</g>").unwrap();
    }
    s.push_str("</svg>\n");
    s
}

fn by_scenario(aggregates: &[AggregateRecord]) -> BTreeMap<&str, Vec<&AggregateRecord>> {
    let mut out: BTreeMap<&str, Vec<&AggregateRecord>> = BTreeMap::new();
    for a in aggregates {
        out.entry(a.scenario.as_str()).or_default().push(a);
    }
    out
}

fn levels_of(rows: &[&AggregateRecord]) -> Vec<usize> {
    let mut levels: Vec<usize> = rows.iter().map(|r| r.level).collect();
    levels.sort_unstable();
    levels.dedup();
    levels
}

/// Mean game length against level, one series per condition, with
/// one-standard-deviation bands across grids.
pub fn lengths_chart(scenario: &str, rows: &[&AggregateRecord], provenance: &Provenance) -> String {
    let mut grouped: BTreeMap<Condition, Vec<(usize, f64, f64)>> = BTreeMap::new();
    for r in rows {
        grouped.entry(r.condition).or_default().push((r.level, r.mean, r.variance.sqrt()));
    }
    let series: Vec<Series> = grouped
        .into_iter()
        .map(|(c, mut points)| {
            points.sort_by_key(|p| p.0);
            Series { name: c.label(), points, dashed: matches!(c, Condition::Solo(_)) }
        })
        .collect();
    let top = series.iter().flat_map(|s| s.points.iter().map(|p| p.1 + p.2)).fold(0.0, f64::max);
    let axes = Axes { levels: levels_of(rows), y_min: 0.0, y_max: nice_max(top) };
    render(&format!("Game length per level: {scenario}"), "mean game length", provenance, &axes, &series)
}

/// Manager selection frequency per `(cell tag, agent)` against level, taken
/// from the IBL-manager condition.
pub fn selection_chart(scenario: &str, rows: &[&AggregateRecord], team_size: usize, provenance: &Provenance) -> String {
    let mgr: Vec<&&AggregateRecord> = rows.iter().filter(|r| r.condition == Condition::IblManager).collect();
    let mut series = Vec::new();
    for bucket in selection_buckets(team_size) {
        for agent in 1..=team_size {
            let mut points: Vec<(usize, f64, f64)> = mgr
                .iter()
                .filter_map(|r| r.selection_freq.get(&(bucket.clone(), agent)).map(|f| (r.level, *f, 0.0)))
                .collect();
            points.sort_by_key(|p| p.0);
            if !points.is_empty() {
                series.push(Series { name: format!("{bucket} agent {agent}"), points, dashed: agent > 1 });
            }
        }
    }
    let axes = Axes { levels: levels_of(rows), y_min: 0.0, y_max: 1.0 };
    render(&format!("Manager preference per cell tag: {scenario}"), "selection frequency", provenance, &axes, &series)
}

/// Writes `lengths_<scenario>.svg` and `selection_<scenario>.svg` into `dir`.
pub fn emit_charts(
    dir: &Path,
    aggregates: &[AggregateRecord],
    team_size: usize,
    provenance: &Provenance,
) -> Result<Vec<PathBuf>, IoError> {
    let mut written = Vec::new();
    for (scenario, rows) in by_scenario(aggregates) {
        let path = dir.join(format!("lengths_{scenario}.svg"));
        write_text(&path, &lengths_chart(scenario, &rows, provenance))?;
        written.push(path);
        let path = dir.join(format!("selection_{scenario}.svg"));
        write_text(&path, &selection_chart(scenario, &rows, team_size, provenance))?;
        written.push(path);
    }
    Ok(written)
}

/// `(series, level, text)` of every data annotation in a chart.
pub fn chart_annotations(svg: &str) -> Vec<(String, usize, String)> {
    svg.lines()
        .filter(|l| l.contains(r#"class="datum""#))
        .filter_map(|l| {
            let attr = |name: &str| {
                let start = l.find(&format!(r#"{name}=""#))? + name.len() + 2;
                Some(l[start..start + l[start..].find('"')?].to_string())
            };
            let text = l[l.find('>')? + 1..l.rfind("</text>")?].to_string();
            Some((attr("data-series")?, attr("data-level")?.parse().ok()?, text))
        })
        .collect()
}
