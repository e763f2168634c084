//! Chart and report emission: paired radar charts of AUC vectors, annotated
//! line plots of the prepared series, and tabular comparison reports.
//!
//! All output is self-contained — SVG 1.1 documents with inline styling and
//! no external references — and byte-deterministic for identical inputs, so
//! artifact trees can be diffed and checksummed.

use chrono::{Datelike, Days, NaiveDate};

use crate::aggregate::{AucVector, ComparisonReport, DominanceRelation, WHOLE_PERIOD};
use crate::error::{Error, Result};
use crate::ingest::{PlaceCategory, StudyConfig, StudyLocality};
use crate::prepare::PreparedSeries;

/// Default edge length of the square radar canvas, in pixels.
pub const RADAR_SIZE: u32 = 600;
/// Default series-plot canvas width in pixels.
pub const SERIES_WIDTH: u32 = 1200;
/// Default series-plot canvas height in pixels.
pub const SERIES_HEIGHT: u32 = 400;

/// Wave-1 stroke/fill color (red) and wave-2 color (blue).
///
/// The two waves keep these colors across every chart; the legend restates
/// the assignment so no reader has to rely on convention.
pub const WAVE1_COLOR: &str = "#d62728";
pub const WAVE2_COLOR: &str = "#1f77b4";

/// Line colors for the per-category series plot, indexed like
/// [`PlaceCategory::ALL`].
const CATEGORY_COLORS: [&str; 6] = [
    "#d62728", // retail & recreation
    "#2ca02c", // grocery & pharmacy
    "#ff7f0e", // parks
    "#9467bd", // transit stations
    "#1f77b4", // workplaces
    "#8c564b", // residential
];

fn category_color(category: PlaceCategory) -> &'static str {
    let index = PlaceCategory::ALL
        .iter()
        .position(|c| *c == category)
        .expect("category listed in ALL");
    CATEGORY_COLORS[index]
}

/// One labeled radar polygon: a value per axis, in axis order.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledPolygon {
    pub label: String,
    pub color: &'static str,
    pub values: Vec<f64>,
}

/// Everything needed to draw one paired radar chart.
///
/// Axes are the five analysis categories at equal 72° spacing, labeled by
/// their abbreviations; the axis maximum equals the slice length in days,
/// so a full polygon touches every axis endpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartSpec {
    pub axis_labels: Vec<&'static str>,
    pub axis_max: f64,
    pub wave1: LabeledPolygon,
    pub wave2: LabeledPolygon,
    pub title: String,
    /// Edge length of the square canvas in pixels.
    pub size: u32,
}

impl ChartSpec {
    /// Builds the chart description for a comparable pair of AUC vectors.
    ///
    /// The vectors must share locality, window and category coverage, carry
    /// all five analysis categories, and every component must lie in
    /// `[0, length_days]`.
    pub fn for_pair(wave1: &AucVector, wave2: &AucVector) -> Result<ChartSpec> {
        wave1.ensure_comparable(wave2)?;
        let axis_max = wave1.length_days as f64;
        for vector in [wave1, wave2] {
            for category in PlaceCategory::ANALYSIS {
                let value = *vector.components.get(&category).ok_or_else(|| {
                    Error::InvalidParams(format!(
                        "radar chart needs all five analysis categories; \
                         `{}` lacks {category}",
                        vector.locality_id
                    ))
                })?;
                if !(0.0..=axis_max).contains(&value) {
                    return Err(Error::ChartRange(format!(
                        "{category} AUC {value} for `{}` {} is outside [0, {axis_max}]",
                        vector.locality_id,
                        vector.wave,
                    )));
                }
            }
        }

        let title = match wave1.window_index {
            WHOLE_PERIOD => format!(
                "{} — whole period ({} days)",
                wave1.locality_id, wave1.length_days
            ),
            k => {
                let first_day = (k - 1) * wave1.length_days;
                format!(
                    "{} — window {k} (days {first_day}–{})",
                    wave1.locality_id,
                    first_day + wave1.length_days - 1
                )
            }
        };

        let polygon = |vector: &AucVector, color| LabeledPolygon {
            label: format!("wave {} (from {})", vector.wave.number(), vector.start_date),
            color,
            values: vector.component_array(),
        };

        Ok(ChartSpec {
            axis_labels: PlaceCategory::ANALYSIS.iter().map(|c| c.abbrev()).collect(),
            axis_max,
            wave1: polygon(wave1, WAVE1_COLOR),
            wave2: polygon(wave2, WAVE2_COLOR),
            title,
            size: RADAR_SIZE,
        })
    }

    /// Renders the chart as a standalone SVG document.
    pub fn to_svg(&self) -> String {
        let size = f64::from(self.size);
        let cx = size / 2.0;
        let cy = size / 2.0;
        let radius = size * 0.38;
        let axes = self.axis_labels.len();

        let vertex = |axis: usize, r: f64| polar(cx, cy, r, axis, axes);
        let ring_points = |r: f64| -> String {
            (0..axes)
                .map(|i| {
                    let (x, y) = vertex(i, r);
                    format!("{x},{y}")
                })
                .collect::<Vec<_>>()
                .join(" ")
        };

        let mut svg = svg_open(self.size, self.size);
        svg.push_str(&format!(
            "  <text x=\"{cx}\" y=\"28\" text-anchor=\"middle\" font-size=\"16\">{}</text>\n",
            xml_escape(&self.title)
        ));

        // concentric grid rings at quarter fractions, spokes, axis labels
        for fraction in [0.25, 0.5, 0.75, 1.0] {
            svg.push_str(&format!(
                "  <polygon class=\"grid\" points=\"{}\" fill=\"none\" \
                 stroke=\"#cccccc\" stroke-width=\"1\"/>\n",
                ring_points(fraction * radius)
            ));
        }
        for (i, label) in self.axis_labels.iter().enumerate() {
            let (x, y) = vertex(i, radius);
            svg.push_str(&format!(
                "  <line x1=\"{cx}\" y1=\"{cy}\" x2=\"{x}\" y2=\"{y}\" \
                 stroke=\"#cccccc\" stroke-width=\"1\"/>\n"
            ));
            let (lx, ly) = vertex(i, radius + 26.0);
            svg.push_str(&format!(
                "  <text x=\"{lx}\" y=\"{ly}\" text-anchor=\"middle\" \
                 dominant-baseline=\"middle\" font-size=\"14\">{}</text>\n",
                xml_escape(label)
            ));
        }
        // radial ticks: 0 at the center, the maximum at the first axis tip
        svg.push_str(&format!(
            "  <text x=\"{}\" y=\"{}\" font-size=\"10\" fill=\"#666666\">0</text>\n",
            cx + 5.0,
            cy + 12.0
        ));
        let (tx, ty) = vertex(0, radius);
        svg.push_str(&format!(
            "  <text x=\"{}\" y=\"{}\" font-size=\"10\" fill=\"#666666\">{}</text>\n",
            tx + 6.0,
            ty - 4.0,
            self.axis_max
        ));

        // wave 2 first so the wave-1 polygon sits on top
        for (class, polygon) in [("wave2", &self.wave2), ("wave1", &self.wave1)] {
            let points = polygon
                .values
                .iter()
                .enumerate()
                .map(|(i, value)| {
                    let (x, y) = vertex(i, value / self.axis_max * radius);
                    format!("{x},{y}")
                })
                .collect::<Vec<_>>()
                .join(" ");
            svg.push_str(&format!(
                "  <polygon class=\"{class}\" points=\"{points}\" fill=\"{0}\" \
                 fill-opacity=\"0.25\" stroke=\"{0}\" stroke-width=\"2\"/>\n",
                polygon.color
            ));
        }

        // legend
        for (row, polygon) in [&self.wave1, &self.wave2].into_iter().enumerate() {
            let y = size - 46.0 + 20.0 * row as f64;
            svg.push_str(&format!(
                "  <rect x=\"20\" y=\"{}\" width=\"13\" height=\"13\" fill=\"{}\" \
                 fill-opacity=\"0.6\"/>\n",
                y - 11.0,
                polygon.color
            ));
            svg.push_str(&format!(
                "  <text x=\"39\" y=\"{y}\" font-size=\"13\">{}</text>\n",
                xml_escape(&polygon.label)
            ));
        }

        svg.push_str("</svg>\n");
        svg
    }
}

/// Draws the paired radar chart for one window comparison.
///
/// Pass the wave-1 vector first; it is drawn in red on top of the blue
/// wave-2 polygon, and a polygon strictly inside the other means its wave
/// dominates.
pub fn radar_chart(pair: (&AucVector, &AucVector)) -> Result<String> {
    Ok(ChartSpec::for_pair(pair.0, pair.1)?.to_svg())
}

/// Draws the scaled per-category trends for one locality with both
/// restriction dates marked (dashed rules) and both study periods shaded.
pub fn series_plot(
    prepared: &[PreparedSeries],
    locality: &StudyLocality,
    config: &StudyConfig,
) -> Result<String> {
    let first_series = prepared.first().ok_or_else(|| {
        Error::InvalidParams("series plot needs at least one prepared series".into())
    })?;
    let dates = &first_series.dates;
    for series in prepared {
        if series.locality_id != first_series.locality_id || series.dates != *dates {
            return Err(Error::Incompatible(format!(
                "series plot inputs must share one locality and date range; \
                 `{}` {} differs",
                series.locality_id, series.category
            )));
        }
    }
    let first = *dates.first().expect("prepared series are non-empty");
    let last = *dates.last().expect("prepared series are non-empty");
    let period_end = locality.wave2 + Days::new(config.period_length_days as u64 - 1);
    if first > locality.wave1 || last < period_end {
        return Err(Error::ChartRange(format!(
            "`{}` covers {first}..{last} but the plot needs {}..{period_end}",
            locality.id, locality.wave1
        )));
    }

    let width = f64::from(SERIES_WIDTH);
    let height = f64::from(SERIES_HEIGHT);
    let (left, right, top, bottom) = (50.0, 120.0, 44.0, 36.0);
    let plot_w = width - left - right;
    let plot_h = height - top - bottom;
    let total_days = (last - first).num_days() as f64;
    let x = |date: NaiveDate| left + (date - first).num_days() as f64 / total_days * plot_w;
    let y = |value: f64| top + (1.0 - value) * plot_h;

    let mut svg = svg_open(SERIES_WIDTH, SERIES_HEIGHT);
    svg.push_str(&format!(
        "  <text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n",
        width / 2.0,
        xml_escape(&format!("{} — scaled mobility trends", locality.id))
    ));

    // shaded study periods and dashed restriction-date rules
    for (start, color) in [(locality.wave1, WAVE1_COLOR), (locality.wave2, WAVE2_COLOR)] {
        let end = start + Days::new(config.period_length_days as u64 - 1);
        svg.push_str(&format!(
            "  <rect class=\"band\" x=\"{0}\" y=\"{top}\" width=\"{1}\" height=\"{plot_h}\" \
             fill=\"{color}\" fill-opacity=\"0.08\"/>\n",
            x(start),
            x(end) - x(start)
        ));
        svg.push_str(&format!(
            "  <line class=\"restriction\" x1=\"{0}\" y1=\"{top}\" x2=\"{0}\" y2=\"{1}\" \
             stroke=\"{color}\" stroke-width=\"1.5\" stroke-dasharray=\"6 4\"/>\n",
            x(start),
            top + plot_h
        ));
    }

    // axes and gridlines
    for tick in [0.0, 0.5, 1.0] {
        let ty = y(tick);
        svg.push_str(&format!(
            "  <line x1=\"{left}\" y1=\"{ty}\" x2=\"{0}\" y2=\"{ty}\" \
             stroke=\"#dddddd\" stroke-width=\"1\"/>\n",
            left + plot_w
        ));
        svg.push_str(&format!(
            "  <text x=\"{}\" y=\"{}\" text-anchor=\"end\" font-size=\"11\">{tick}</text>\n",
            left - 8.0,
            ty + 4.0
        ));
    }
    for month in month_firsts(first, last) {
        let tx = x(month);
        svg.push_str(&format!(
            "  <line x1=\"{tx}\" y1=\"{0}\" x2=\"{tx}\" y2=\"{1}\" \
             stroke=\"#999999\" stroke-width=\"1\"/>\n",
            top + plot_h,
            top + plot_h + 5.0
        ));
        svg.push_str(&format!(
            "  <text x=\"{tx}\" y=\"{}\" text-anchor=\"middle\" font-size=\"11\">{}</text>\n",
            top + plot_h + 18.0,
            month.format("%Y-%m")
        ));
    }
    svg.push_str(&format!(
        "  <line x1=\"{left}\" y1=\"{0}\" x2=\"{1}\" y2=\"{0}\" \
         stroke=\"#333333\" stroke-width=\"1\"/>\n",
        top + plot_h,
        left + plot_w
    ));

    // one polyline per category, in the canonical axis order
    let mut legend_row = 0usize;
    for category in PlaceCategory::ANALYSIS {
        let Some(series) = prepared.iter().find(|s| s.category == category) else {
            continue;
        };
        let color = category_color(category);
        let points = series
            .dates
            .iter()
            .zip(&series.values)
            .map(|(date, value)| format!("{},{}", x(*date), y(*value)))
            .collect::<Vec<_>>()
            .join(" ");
        svg.push_str(&format!(
            "  <polyline class=\"{}\" points=\"{points}\" fill=\"none\" \
             stroke=\"{color}\" stroke-width=\"1.5\"/>\n",
            category.key()
        ));

        let ly = top + 14.0 + 20.0 * legend_row as f64;
        let lx = left + plot_w + 16.0;
        svg.push_str(&format!(
            "  <line x1=\"{lx}\" y1=\"{0}\" x2=\"{1}\" y2=\"{0}\" \
             stroke=\"{color}\" stroke-width=\"3\"/>\n",
            ly - 4.0,
            lx + 18.0
        ));
        svg.push_str(&format!(
            "  <text x=\"{}\" y=\"{ly}\" font-size=\"12\">{}</text>\n",
            lx + 24.0,
            xml_escape(category.abbrev())
        ));
        legend_row += 1;
    }

    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Renders a comparison report as an aligned plain-text table: one row per
/// comparison with both waves' per-category AUCs and the resulting
/// relation, labeled from wave 1's perspective.
pub fn report_table(report: &ComparisonReport) -> String {
    let mut header = vec!["window".to_string(), "days".to_string()];
    for wave in [1u8, 2] {
        for category in PlaceCategory::ANALYSIS {
            header.push(format!("{}(w{wave})", category.abbrev()));
        }
    }
    header.push("relation".to_string());

    let mut rows = vec![header];
    for cmp in report.comparisons() {
        let mut row = vec![cmp.window_label(), cmp.wave1.length_days.to_string()];
        for vector in [&cmp.wave1, &cmp.wave2] {
            for value in vector.component_array() {
                row.push(format!("{value:.2}"));
            }
        }
        row.push(relation_label(cmp.relation).to_string());
        rows.push(row);
    }

    let columns = rows[0].len();
    let widths: Vec<usize> = (0..columns)
        .map(|c| rows.iter().map(|r| r[c].len()).max().unwrap_or(0))
        .collect();

    let mut out = format!(
        "{} — wave 1 from {}, wave 2 from {}\n",
        report.locality_id, report.wave1_start, report.wave2_start
    );
    for row in &rows {
        let line: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(c, cell)| {
                if c == 0 || c == columns - 1 {
                    format!("{cell:<width$}", width = widths[c])
                } else {
                    format!("{cell:>width$}", width = widths[c])
                }
            })
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    out
}

/// The relation column text, naming the winning wave explicitly.
fn relation_label(relation: DominanceRelation) -> &'static str {
    match relation {
        DominanceRelation::Dominates => "Dominates(w1)",
        DominanceRelation::DominatedBy => "Dominates(w2)",
        DominanceRelation::Incomparable => "Incomparable",
        DominanceRelation::Equal => "Equal",
    }
}

fn svg_open(width: u32, height: u32) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" \
         viewBox=\"0 0 {width} {height}\" font-family=\"sans-serif\">\n  \
         <rect width=\"{width}\" height=\"{height}\" fill=\"#ffffff\"/>\n"
    )
}

/// Screen coordinates of the point at `radius` on axis `axis` of `axes`
/// equally spaced spokes, the first pointing straight up.
fn polar(cx: f64, cy: f64, radius: f64, axis: usize, axes: usize) -> (f64, f64) {
    let angle =
        -std::f64::consts::FRAC_PI_2 + axis as f64 * std::f64::consts::TAU / axes as f64;
    (cx + radius * angle.cos(), cy + radius * angle.sin())
}

/// First days of every month inside `[first, last]`.
fn month_firsts(first: NaiveDate, last: NaiveDate) -> Vec<NaiveDate> {
    let (mut year, mut month) = (first.year(), first.month());
    if first.day() > 1 {
        month += 1;
        if month == 13 {
            month = 1;
            year += 1;
        }
    }
    let mut out = Vec::new();
    while let Some(date) = NaiveDate::from_ymd_opt(year, month, 1) {
        if date > last {
            break;
        }
        out.push(date);
        month += 1;
        if month == 13 {
            month = 1;
            year += 1;
        }
    }
    out
}

fn xml_escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            other => out.push(other),
        }
    }
    out
}
