//! Deterministic SVG rendering of experiment artifacts: per-year
//! persistence lines, graduated/departed comparisons, sensitivity boxplots
//! with ±10% error bars, and search-trajectory plots.
//!
//! The output is plain SVG 1.1 with a fixed palette, fixed float formatting,
//! and no timestamps: identical inputs produce identical bytes.

use crate::csvio::format_float;
use crate::error::Error;
use crate::experiments::{ExperimentRow, ExperimentTable, Metric};
use crate::search::EvalRecord;

/// Figure family to render.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    /// One line per year of the persisted-student counts across levels.
    PerYearLines,
    /// Graduate and quitter means across levels, one line per series.
    GraduatedDepartedLines,
    /// Five-number boxplots of departed counts at the ±10% levels.
    SensitivityBoxplot,
    /// Best-so-far fitness per evaluation, one line per search.
    SearchTrajectory,
}

impl PlotKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            PlotKind::PerYearLines => "per-year-lines",
            PlotKind::GraduatedDepartedLines => "graduated-departed",
            PlotKind::SensitivityBoxplot => "sensitivity-boxplot",
            PlotKind::SearchTrajectory => "search-trajectory",
        }
    }

    pub fn parse(s: &str) -> Result<PlotKind, Error> {
        match s {
            "per-year-lines" => Ok(PlotKind::PerYearLines),
            "graduated-departed" => Ok(PlotKind::GraduatedDepartedLines),
            "sensitivity-boxplot" => Ok(PlotKind::SensitivityBoxplot),
            "search-trajectory" => Ok(PlotKind::SearchTrajectory),
            other => Err(Error::invalid(format!(
                "unknown plot kind `{other}`; use per-year-lines, graduated-departed, \
                 sensitivity-boxplot, or search-trajectory"
            ))),
        }
    }
}

/// Rendering parameters; `series` empty means every available series.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotSpec {
    pub kind: PlotKind,
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<String>,
    pub width: u32,
    pub height: u32,
}

impl PlotSpec {
    pub fn new(kind: PlotKind) -> Self {
        let (title, x_label, y_label) = match kind {
            PlotKind::PerYearLines => {
                ("Students persisting by year", "factor level", "students")
            }
            PlotKind::GraduatedDepartedLines => {
                ("Graduated and departed students", "factor level", "students")
            }
            PlotKind::SensitivityBoxplot => (
                "Departed students at ±10% factor levels",
                "factor level",
                "departed students",
            ),
            PlotKind::SearchTrajectory => ("Search progress", "evaluation", "best fitness"),
        };
        PlotSpec {
            kind,
            title: title.to_string(),
            x_label: x_label.to_string(),
            y_label: y_label.to_string(),
            series: Vec::new(),
            width: 840,
            height: 520,
        }
    }
}

/// Input artifact for [`render`].
#[derive(Debug, Clone)]
pub enum PlotData {
    Table(ExperimentTable),
    Trajectories(Vec<EvalRecord>),
}

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 190.0;
const MARGIN_TOP: f64 = 48.0;
const MARGIN_BOTTOM: f64 = 64.0;

fn fmt2(v: f64) -> String {
    format!("{v:.2}")
}

fn escape_xml(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

struct Frame {
    width: f64,
    height: f64,
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
}

impl Frame {
    fn new(width: u32, height: u32, x: (f64, f64), y: (f64, f64)) -> Frame {
        let pad = |(lo, hi): (f64, f64)| {
            if hi > lo {
                (lo, hi)
            } else {
                (lo - 0.5, hi + 0.5)
            }
        };
        let (x_min, x_max) = pad(x);
        let (y_min, y_max) = pad(y);
        Frame {
            width: f64::from(width),
            height: f64::from(height),
            x_min,
            x_max,
            y_min,
            y_max,
        }
    }

    fn x(&self, v: f64) -> f64 {
        let span = self.width - MARGIN_LEFT - MARGIN_RIGHT;
        MARGIN_LEFT + (v - self.x_min) / (self.x_max - self.x_min) * span
    }

    fn y(&self, v: f64) -> f64 {
        let span = self.height - MARGIN_TOP - MARGIN_BOTTOM;
        self.height - MARGIN_BOTTOM - (v - self.y_min) / (self.y_max - self.y_min) * span
    }
}

/// Tick positions at a 1/2/5 × 10^k step covering `[min, max]`.
fn ticks(min: f64, max: f64) -> Vec<f64> {
    let span = max - min;
    if span <= 0.0 {
        return vec![min];
    }
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .expect("10*mag always covers raw");
    let mut t = (min / step).ceil() * step;
    let mut out = Vec::new();
    while t <= max + step * 1e-9 {
        // snap tiny float drift (e.g. -0.0) to a clean value
        if t.abs() < step * 1e-9 {
            t = 0.0;
        }
        out.push(t);
        t += step;
    }
    out
}

struct Series {
    name: String,
    color: &'static str,
    points: Vec<(f64, f64)>,
}

fn validate_selection(selection: &[String], available: &[String]) -> Result<Vec<String>, Error> {
    if selection.is_empty() {
        return Ok(available.to_vec());
    }
    for name in selection {
        if !available.contains(name) {
            return Err(Error::UnknownSeries {
                name: name.clone(),
                available: available.join(", "),
            });
        }
    }
    Ok(selection.to_vec())
}

fn line_series_from_table(
    table: &ExperimentTable,
    kind: PlotKind,
    selection: &[String],
) -> Result<Vec<Series>, Error> {
    let mut available: Vec<String> = Vec::new();
    let points_of = |rows: Vec<&ExperimentRow>| -> Vec<(f64, f64)> {
        rows.iter().map(|r| (r.level, r.summary.mean)).collect()
    };
    let mut series = Vec::new();
    match kind {
        PlotKind::PerYearLines => {
            let mut years: Vec<u8> = table
                .rows_for(Metric::Persisted)
                .filter_map(|r| r.year)
                .collect();
            years.sort_unstable();
            years.dedup();
            for year in years {
                available.push(format!("year{year}"));
            }
            let chosen = validate_selection(selection, &available)?;
            for (idx, name) in chosen.iter().enumerate() {
                let year: u8 = name[4..].parse().expect("validated against available");
                let rows: Vec<&ExperimentRow> = table
                    .rows_for(Metric::Persisted)
                    .filter(|r| r.year == Some(year))
                    .collect();
                series.push(Series {
                    name: name.clone(),
                    color: PALETTE[idx % PALETTE.len()],
                    points: points_of(rows),
                });
            }
        }
        PlotKind::GraduatedDepartedLines => {
            let mut keys: Vec<(String, Metric, String)> = Vec::new();
            for metric in [Metric::Graduates, Metric::Quitters] {
                for row in table.rows_for(metric) {
                    let key = format!("{}:{}", row.factor.as_str(), metric.as_str());
                    if !keys.iter().any(|(k, _, _)| k == &key) {
                        keys.push((key.clone(), metric, row.factor.as_str().to_string()));
                        available.push(key);
                    }
                }
            }
            let chosen = validate_selection(selection, &available)?;
            for (idx, name) in chosen.iter().enumerate() {
                let (_, metric, factor) = keys
                    .iter()
                    .find(|(k, _, _)| k == name)
                    .expect("validated against available");
                let rows: Vec<&ExperimentRow> = table
                    .rows_for(*metric)
                    .filter(|r| r.factor.as_str() == factor)
                    .collect();
                series.push(Series {
                    name: name.clone(),
                    color: PALETTE[idx % PALETTE.len()],
                    points: points_of(rows),
                });
            }
        }
        _ => unreachable!("line series only for line kinds"),
    }
    Ok(series)
}

fn trajectory_series(
    records: &[EvalRecord],
    selection: &[String],
) -> Result<Vec<Series>, Error> {
    let mut ids: Vec<u32> = records.iter().map(|r| r.search_id).collect();
    ids.sort_unstable();
    ids.dedup();
    let available: Vec<String> = ids.iter().map(|id| format!("search{id}")).collect();
    let chosen = validate_selection(selection, &available)?;
    let mut series = Vec::new();
    for (idx, name) in chosen.iter().enumerate() {
        let id: u32 = name[6..].parse().expect("validated against available");
        let points: Vec<(f64, f64)> = records
            .iter()
            .filter(|r| r.search_id == id)
            .map(|r| (f64::from(r.evaluation), r.best_so_far))
            .collect();
        series.push(Series {
            name: name.clone(),
            color: PALETTE[idx % PALETTE.len()],
            points,
        });
    }
    Ok(series)
}

fn push_axes(out: &mut String, frame: &Frame, spec: &PlotSpec) {
    let x0 = MARGIN_LEFT;
    let x1 = frame.width - MARGIN_RIGHT;
    let y0 = frame.height - MARGIN_BOTTOM;
    let y1 = MARGIN_TOP;
    out.push_str(&format!(
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#333333\" stroke-width=\"1\"/>\n",
        fmt2(x0), fmt2(y0), fmt2(x1), fmt2(y0)
    ));
    out.push_str(&format!(
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#333333\" stroke-width=\"1\"/>\n",
        fmt2(x0), fmt2(y0), fmt2(x0), fmt2(y1)
    ));
    for t in ticks(frame.x_min, frame.x_max) {
        let x = frame.x(t);
        out.push_str(&format!(
            "<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"#333333\" stroke-width=\"1\"/>\n",
            fmt2(x), fmt2(y0), fmt2(y0 + 6.0)
        ));
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" \
             text-anchor=\"middle\">{}</text>\n",
            fmt2(x),
            fmt2(y0 + 20.0),
            escape_xml(&format_float(t))
        ));
    }
    for t in ticks(frame.y_min, frame.y_max) {
        let y = frame.y(t);
        out.push_str(&format!(
            "<line x1=\"{1}\" y1=\"{0}\" x2=\"{2}\" y2=\"{0}\" stroke=\"#333333\" stroke-width=\"1\"/>\n",
            fmt2(y), fmt2(x0 - 6.0), fmt2(x0)
        ));
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" \
             text-anchor=\"end\">{}</text>\n",
            fmt2(x0 - 10.0),
            fmt2(y + 4.0),
            escape_xml(&format_float(t))
        ));
    }
    out.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"14\" \
         text-anchor=\"middle\">{}</text>\n",
        fmt2((x0 + x1) / 2.0),
        fmt2(frame.height - 16.0),
        escape_xml(&spec.x_label)
    ));
    out.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"14\" \
         text-anchor=\"middle\" transform=\"rotate(-90 {} {})\">{}</text>\n",
        fmt2(18.0),
        fmt2((y0 + y1) / 2.0),
        fmt2(18.0),
        fmt2((y0 + y1) / 2.0),
        escape_xml(&spec.y_label)
    ));
    out.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"16\" \
         text-anchor=\"middle\" font-weight=\"bold\">{}</text>\n",
        fmt2(frame.width / 2.0),
        fmt2(24.0),
        escape_xml(&spec.title)
    ));
}

fn push_legend(out: &mut String, frame: &Frame, series: &[Series]) {
    let x = frame.width - MARGIN_RIGHT + 18.0;
    for (i, s) in series.iter().enumerate() {
        let y = MARGIN_TOP + 10.0 + 18.0 * i as f64;
        out.push_str(&format!(
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{}\" stroke-width=\"2\"/>\n",
            fmt2(x),
            fmt2(y),
            fmt2(x + 22.0),
            fmt2(y),
            s.color
        ));
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\">{}</text>\n",
            fmt2(x + 28.0),
            fmt2(y + 4.0),
            escape_xml(&s.name)
        ));
    }
}

fn push_line_series(out: &mut String, frame: &Frame, series: &[Series]) {
    for s in series {
        if s.points.len() > 1 {
            let pts: Vec<String> = s
                .points
                .iter()
                .map(|(x, y)| format!("{},{}", fmt2(frame.x(*x)), fmt2(frame.y(*y))))
                .collect();
            out.push_str(&format!(
                "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"2\" points=\"{}\"/>\n",
                s.color,
                pts.join(" ")
            ));
        }
        for (x, y) in &s.points {
            out.push_str(&format!(
                "<circle cx=\"{}\" cy=\"{}\" r=\"3\" fill=\"{}\"/>\n",
                fmt2(frame.x(*x)),
                fmt2(frame.y(*y)),
                s.color
            ));
        }
    }
}

type Extent = ((f64, f64), (f64, f64));

fn data_extent(series: &[Series]) -> Result<Extent, Error> {
    let mut pts = series.iter().flat_map(|s| s.points.iter());
    let first = pts.next().ok_or(Error::EmptyInput("plot has no data points"))?;
    let mut x = (first.0, first.0);
    let mut y = (first.1, first.1);
    for (px, py) in pts {
        x = (x.0.min(*px), x.1.max(*px));
        y = (y.0.min(*py), y.1.max(*py));
    }
    Ok((x, y))
}

fn render_lines(series: Vec<Series>, spec: &PlotSpec) -> Result<String, Error> {
    let ((x_lo, x_hi), (y_lo, y_hi)) = data_extent(&series)?;
    let y_pad = 0.05 * (y_hi - y_lo).max(1.0);
    let y_floor = if y_lo >= 0.0 {
        (y_lo - y_pad).max(0.0)
    } else {
        y_lo - y_pad
    };
    let frame = Frame::new(spec.width, spec.height, (x_lo, x_hi), (y_floor, y_hi + y_pad));
    let mut out = svg_open(spec);
    push_axes(&mut out, &frame, spec);
    push_line_series(&mut out, &frame, &series);
    push_legend(&mut out, &frame, &series);
    out.push_str("</svg>\n");
    Ok(out)
}

fn render_boxplot(table: &ExperimentTable, spec: &PlotSpec) -> Result<String, Error> {
    let rows: Vec<&ExperimentRow> = table.rows_for(Metric::Quitters).collect();
    if rows.is_empty() {
        return Err(Error::EmptyInput("boxplot needs quitters rows"));
    }
    let available = vec!["quitters".to_string()];
    validate_selection(&spec.series, &available)?;
    let x_lo = rows.iter().map(|r| r.level).fold(f64::INFINITY, f64::min);
    let x_hi = rows
        .iter()
        .map(|r| r.level)
        .fold(f64::NEG_INFINITY, f64::max);
    let y_lo = rows.iter().map(|r| r.summary.min).fold(f64::INFINITY, f64::min);
    let y_hi = rows
        .iter()
        .map(|r| r.summary.max)
        .fold(f64::NEG_INFINITY, f64::max);
    let x_pad = 0.25 * (x_hi - x_lo).max(0.04);
    let y_pad = 0.1 * (y_hi - y_lo).max(1.0);
    let frame = Frame::new(
        spec.width,
        spec.height,
        (x_lo - x_pad, x_hi + x_pad),
        (y_lo - y_pad, y_hi + y_pad),
    );
    let mut out = svg_open(spec);
    push_axes(&mut out, &frame, spec);

    // ±10% range bar behind the boxes, at the middle row's median height
    let mid = &rows[rows.len() / 2];
    let bar_y = frame.y(mid.summary.median);
    let (bx0, bx1) = (frame.x(x_lo), frame.x(x_hi));
    out.push_str(&format!(
        "<line class=\"errorbar\" x1=\"{0}\" y1=\"{2}\" x2=\"{1}\" y2=\"{2}\" stroke=\"#999999\" stroke-width=\"1.5\"/>\n",
        fmt2(bx0),
        fmt2(bx1),
        fmt2(bar_y)
    ));
    for x in [bx0, bx1] {
        out.push_str(&format!(
            "<line class=\"errorbar\" x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"#999999\" stroke-width=\"1.5\"/>\n",
            fmt2(x),
            fmt2(bar_y - 8.0),
            fmt2(bar_y + 8.0)
        ));
    }

    let half = 14.0;
    for row in &rows {
        let s = &row.summary;
        let cx = frame.x(row.level);
        let (y_min, y_q1, y_med, y_q3, y_max) = (
            frame.y(s.min),
            frame.y(s.q1),
            frame.y(s.median),
            frame.y(s.q3),
            frame.y(s.max),
        );
        // whiskers with caps
        for (a, b) in [(y_min, y_q1), (y_q3, y_max)] {
            out.push_str(&format!(
                "<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"#1f77b4\" stroke-width=\"1\"/>\n",
                fmt2(cx), fmt2(a), fmt2(b)
            ));
        }
        for y in [y_min, y_max] {
            out.push_str(&format!(
                "<line x1=\"{0}\" y1=\"{2}\" x2=\"{1}\" y2=\"{2}\" stroke=\"#1f77b4\" stroke-width=\"1\"/>\n",
                fmt2(cx - half * 0.6),
                fmt2(cx + half * 0.6),
                fmt2(y)
            ));
        }
        out.push_str(&format!(
            "<rect class=\"box\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"#c6dbef\" stroke=\"#1f77b4\" stroke-width=\"1\"/>\n",
            fmt2(cx - half),
            fmt2(y_q3),
            fmt2(2.0 * half),
            fmt2((y_q1 - y_q3).max(0.0))
        ));
        out.push_str(&format!(
            "<line x1=\"{0}\" y1=\"{2}\" x2=\"{1}\" y2=\"{2}\" stroke=\"#08306b\" stroke-width=\"2\"/>\n",
            fmt2(cx - half),
            fmt2(cx + half),
            fmt2(y_med)
        ));
    }
    out.push_str("</svg>\n");
    Ok(out)
}

fn svg_open(spec: &PlotSpec) -> String {
    let mut out = String::with_capacity(16 * 1024);
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" \
         viewBox=\"0 0 {0} {1}\">\n",
        spec.width, spec.height
    ));
    out.push_str(&format!(
        "<rect x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" fill=\"#ffffff\"/>\n",
        spec.width, spec.height
    ));
    out
}

/// Render the artifact into a standalone SVG document.
pub fn render(data: &PlotData, spec: &PlotSpec) -> Result<String, Error> {
    match (spec.kind, data) {
        (PlotKind::PerYearLines | PlotKind::GraduatedDepartedLines, PlotData::Table(table)) => {
            if table.rows.is_empty() {
                return Err(Error::EmptyInput("experiment table has no rows"));
            }
            let series = line_series_from_table(table, spec.kind, &spec.series)?;
            render_lines(series, spec)
        }
        (PlotKind::SensitivityBoxplot, PlotData::Table(table)) => render_boxplot(table, spec),
        (PlotKind::SearchTrajectory, PlotData::Trajectories(records)) => {
            if records.is_empty() {
                return Err(Error::EmptyInput("trajectory has no evaluations"));
            }
            let series = trajectory_series(records, &spec.series)?;
            render_lines(series, spec)
        }
        (kind, _) => Err(Error::invalid(format!(
            "plot kind {} does not match the supplied data",
            kind.as_str()
        ))),
    }
}
