//! Tabular results and their CSV, JSON and SVG renderings.
//!
//! Rendering never consults the clock or the environment, so a report built
//! from the same inputs always produces the same bytes.

use std::collections::BTreeMap;
use std::fmt::Write;

use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioReport {
    command: String,
    version: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    config_hash: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    metadata: BTreeMap<String, String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    label_column: Option<String>,
    columns: Vec<String>,
    rows: Vec<ReportRow>,
}

/// How numbers are written in CSV.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NumberFormat {
    /// 17 significant digits, enough to round-trip any `f64`.
    #[default]
    RoundTrip,
    /// Fixed notation with this many decimals.
    Decimals(usize),
}

impl NumberFormat {
    pub fn format(&self, v: f64) -> String {
        if !v.is_finite() {
            return if v.is_nan() {
                "NaN".into()
            } else if v > 0.0 {
                "inf".into()
            } else {
                "-inf".into()
            };
        }
        match self {
            NumberFormat::RoundTrip => format!("{v:.16e}"),
            NumberFormat::Decimals(d) => format!("{v:.d$}", d = *d),
        }
    }
}

impl ScenarioReport {
    pub fn new<I, S>(command: &str, columns: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config_hash: None,
            seed: None,
            metadata: BTreeMap::new(),
            label_column: None,
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn with_label_column(mut self, name: &str) -> Self {
        self.label_column = Some(name.to_string());
        self
    }

    pub fn set_config_hash(&mut self, hash: String) {
        self.config_hash = Some(hash);
    }

    pub fn set_seed(&mut self, seed: u64) {
        self.seed = Some(seed);
    }

    pub fn set_meta(&mut self, key: &str, value: impl ToString) {
        self.metadata.insert(key.to_string(), value.to_string());
    }

    pub fn push_row(&mut self, values: Vec<f64>) {
        assert_eq!(values.len(), self.columns.len(), "row width mismatch");
        self.rows.push(ReportRow { label: None, values });
    }

    pub fn push_labeled_row(&mut self, label: impl Into<String>, values: Vec<f64>) {
        assert_eq!(values.len(), self.columns.len(), "row width mismatch");
        self.rows.push(ReportRow {
            label: Some(label.into()),
            values,
        });
    }

    pub fn command(&self) -> &str {
        &self.command
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[ReportRow] {
        &self.rows
    }

    pub fn metadata(&self) -> &BTreeMap<String, String> {
        &self.metadata
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r.values[i]).collect())
    }

    /// CSV with `# key: value` metadata lines ahead of the header.
    pub fn to_csv(&self, numbers: NumberFormat) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# command: {}", self.command);
        let _ = writeln!(out, "# version: {}", self.version);
        if let Some(hash) = &self.config_hash {
            let _ = writeln!(out, "# config_hash: {hash}");
        }
        if let Some(seed) = self.seed {
            let _ = writeln!(out, "# seed: {seed}");
        }
        for (k, v) in &self.metadata {
            let _ = writeln!(out, "# {k}: {v}");
        }
        let header: Vec<&str> = self
            .label_column
            .iter()
            .map(String::as_str)
            .chain(self.columns.iter().map(String::as_str))
            .collect();
        let _ = writeln!(out, "{}", header.join(","));
        for row in &self.rows {
            let mut cells: Vec<String> = Vec::with_capacity(row.values.len() + 1);
            if self.label_column.is_some() {
                cells.push(row.label.clone().unwrap_or_default());
            }
            cells.extend(row.values.iter().map(|&v| numbers.format(v)));
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Static line chart: the first column is the x axis, every other column a series.
    pub fn to_svg(&self, title: &str) -> String {
        svg_line_chart(self, title)
    }
}

const SVG_WIDTH: f64 = 640.0;
const SVG_HEIGHT: f64 = 400.0;
const SVG_MARGIN: f64 = 50.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

fn svg_line_chart(report: &ScenarioReport, title: &str) -> String {
    let finite = |v: &f64| v.is_finite();
    let xs: Vec<f64> = report.rows.iter().map(|r| r.values[0]).collect();
    let ys: Vec<f64> = report
        .rows
        .iter()
        .flat_map(|r| r.values[1..].iter().copied())
        .filter(finite)
        .collect();
    let bounds = |vals: &[f64]| {
        let lo = vals.iter().copied().filter(finite).fold(f64::INFINITY, f64::min);
        let hi = vals.iter().copied().filter(finite).fold(f64::NEG_INFINITY, f64::max);
        if !lo.is_finite() || !hi.is_finite() {
            (0.0, 1.0)
        } else if hi > lo {
            (lo, hi)
        } else {
            (lo - 0.5, hi + 0.5)
        }
    };
    let (x_lo, x_hi) = bounds(&xs);
    let (y_lo, y_hi) = bounds(&ys);
    let plot_w = SVG_WIDTH - 2.0 * SVG_MARGIN;
    let plot_h = SVG_HEIGHT - 2.0 * SVG_MARGIN;
    let px = |x: f64| SVG_MARGIN + (x - x_lo) / (x_hi - x_lo) * plot_w;
    let py = |y: f64| SVG_HEIGHT - SVG_MARGIN - (y - y_lo) / (y_hi - y_lo) * plot_h;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_WIDTH}" height="{SVG_HEIGHT}" viewBox="0 0 {SVG_WIDTH} {SVG_HEIGHT}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="25" text-anchor="middle" font-family="sans-serif" font-size="14">{}</text>"#,
        SVG_WIDTH / 2.0,
        escape(title)
    );
    let _ = writeln!(
        out,
        r#"<path d="M{m:.1},{top:.1} V{bottom:.1} H{right:.1}" stroke="black" fill="none"/>"#,
        m = SVG_MARGIN,
        top = SVG_MARGIN,
        bottom = SVG_HEIGHT - SVG_MARGIN,
        right = SVG_WIDTH - SVG_MARGIN
    );
    for (label, x, y, anchor) in [
        (
            format!("{x_lo:.3}"),
            SVG_MARGIN,
            SVG_HEIGHT - SVG_MARGIN + 15.0,
            "start",
        ),
        (
            format!("{x_hi:.3}"),
            SVG_WIDTH - SVG_MARGIN,
            SVG_HEIGHT - SVG_MARGIN + 15.0,
            "end",
        ),
        (format!("{y_lo:.3}"), SVG_MARGIN - 5.0, SVG_HEIGHT - SVG_MARGIN, "end"),
        (format!("{y_hi:.3}"), SVG_MARGIN - 5.0, SVG_MARGIN + 4.0, "end"),
    ] {
        let _ = writeln!(
            out,
            r#"<text x="{x:.1}" y="{y:.1}" text-anchor="{anchor}" font-family="sans-serif" font-size="10">{label}</text>"#
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-family="sans-serif" font-size="11">{}</text>"#,
        SVG_WIDTH / 2.0,
        SVG_HEIGHT - 12.0,
        escape(&report.columns[0])
    );
    for (series, name) in report.columns.iter().enumerate().skip(1) {
        let color = PALETTE[(series - 1) % PALETTE.len()];
        let points: Vec<String> = report
            .rows
            .iter()
            .filter(|r| r.values[0].is_finite() && r.values[series].is_finite())
            .map(|r| format!("{:.2},{:.2}", px(r.values[0]), py(r.values[series])))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
            points.join(" ")
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="10" fill="{color}">{}</text>"#,
            SVG_WIDTH - SVG_MARGIN + 4.0 - 120.0,
            SVG_MARGIN + 12.0 * series as f64,
            escape(name)
        );
    }
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ScenarioReport {
        let mut r = ScenarioReport::new("risk curve", ["K", "ratio"]);
        r.set_seed(7);
        r.set_meta("alpha", 2);
        r.push_row(vec![1.0, 1.0]);
        r.push_row(vec![2.0, 2f64.powf(-2.0 / 3.0)]);
        r
    }

    #[test]
    fn csv_uses_round_trip_precision() {
        let csv = sample().to_csv(NumberFormat::RoundTrip);
        let body: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(body[0], "K,ratio");
        let ratio: f64 = body[2].split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(ratio, 2f64.powf(-2.0 / 3.0));
        assert!(csv.contains("# seed: 7\n"));
        assert!(csv.contains("# alpha: 2\n"));
    }

    #[test]
    fn csv_fixed_decimals() {
        let csv = sample().to_csv(NumberFormat::Decimals(6));
        assert!(csv.ends_with("2.000000,0.629961\n"), "{csv}");
    }

    #[test]
    fn labeled_rows_and_json() {
        let mut r = ScenarioReport::new("compare", ["x"]).with_label_column("design");
        r.push_labeled_row("a", vec![0.5]);
        let csv = r.to_csv(NumberFormat::Decimals(1));
        assert!(csv.ends_with("design,x\na,0.5\n"));
        let json: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(json["rows"][0]["label"], "a");
        assert_eq!(json["columns"][0], "x");
    }

    #[test]
    fn svg_is_well_formed_enough() {
        let svg = sample().to_svg("degradation");
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<polyline").count(), 1);
    }

    #[test]
    fn non_finite_numbers() {
        assert_eq!(NumberFormat::RoundTrip.format(f64::INFINITY), "inf");
        assert_eq!(NumberFormat::Decimals(2).format(f64::NAN), "NaN");
    }
}
