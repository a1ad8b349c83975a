//! Power tables and analysis results as CSV or aligned text.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::inference::TestResult;
use crate::power::{MethodSpec, PowerRow, PowerTable};
use crate::scalar::Real;

pub const REPORT_COLUMNS: [&str; 11] = [
    "method",
    "day",
    "estimate",
    "ci_low",
    "ci_high",
    "statistic",
    "p_value",
    "rejection_rate",
    "mc_se",
    "n_sims",
    "n_degenerate",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReportFormat {
    #[default]
    Csv,
    Text,
}

/// One line of a report. Power rows leave the per-test fields empty and
/// analysis rows leave the Monte Carlo fields empty.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ReportRow {
    /// Method name with `:k` where it has one; the day has its own column.
    pub method: String,
    pub day: Option<u32>,
    pub estimate: Option<f64>,
    pub ci: Option<(f64, f64)>,
    pub statistic: Option<f64>,
    pub p_value: Option<f64>,
    pub rejection_rate: Option<f64>,
    pub mc_se: Option<f64>,
    pub n_sims: Option<u64>,
    pub n_degenerate: Option<u64>,
}

fn method_column(spec: &MethodSpec) -> String {
    MethodSpec { day: None, ..*spec }.label()
}

impl From<&PowerRow> for ReportRow {
    fn from(r: &PowerRow) -> Self {
        ReportRow {
            method: method_column(&r.spec),
            day: r.spec.day,
            rejection_rate: Some(r.rejection_rate),
            mc_se: Some(r.mc_se),
            n_sims: Some(r.n_sims),
            n_degenerate: Some(r.n_degenerate),
            ..Default::default()
        }
    }
}

impl ReportRow {
    pub fn from_power(table: &PowerTable) -> Vec<ReportRow> {
        table.rows.iter().map(ReportRow::from).collect()
    }

    /// Row for one analysis; a failed test keeps only its name and day.
    pub fn from_test<T: Real>(spec: &MethodSpec, result: &Result<TestResult<T>>) -> Self {
        let base = ReportRow {
            method: method_column(spec),
            day: spec.day,
            ..Default::default()
        };
        match result {
            Ok(r) => ReportRow {
                estimate: Some(r.estimate.as_f64()),
                ci: r.ci.map(|(lo, hi)| (lo.as_f64(), hi.as_f64())),
                statistic: Some(r.statistic.as_f64()),
                p_value: Some(r.p_value.as_f64()),
                ..base
            },
            Err(_) => base,
        }
    }

    fn cells(&self) -> [String; 11] {
        let num = |x: Option<f64>| x.map(sig6).unwrap_or_default();
        let int = |x: Option<u64>| x.map(|v| v.to_string()).unwrap_or_default();
        [
            self.method.clone(),
            int(self.day.map(u64::from)),
            num(self.estimate),
            num(self.ci.map(|c| c.0)),
            num(self.ci.map(|c| c.1)),
            num(self.statistic),
            num(self.p_value),
            num(self.rejection_rate),
            num(self.mc_se),
            int(self.n_sims),
            int(self.n_degenerate),
        ]
    }
}

/// `x` with six significant digits, `%g` style.
pub fn sig6(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..6).contains(&exp) {
        let decimals = (5 - exp) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

pub fn render_report(rows: &[ReportRow], format: ReportFormat) -> String {
    match format {
        ReportFormat::Csv => render_csv(rows),
        ReportFormat::Text => render_text(rows),
    }
}

fn render_csv(rows: &[ReportRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(REPORT_COLUMNS).expect("in-memory write");
    for r in rows {
        w.write_record(r.cells()).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 cells")
}

fn render_text(rows: &[ReportRow]) -> String {
    let cells: Vec<[String; 11]> = rows.iter().map(ReportRow::cells).collect();
    let mut widths = REPORT_COLUMNS.map(str::len);
    for row in &cells {
        for (w, c) in widths.iter_mut().zip(row) {
            *w = (*w).max(c.len());
        }
    }
    let mut out = String::new();
    let mut line = |row: &[&str]| {
        let parts: Vec<String> = row
            .iter()
            .zip(widths)
            .enumerate()
            .map(|(i, (c, w))| if i == 0 { format!("{c:<w$}") } else { format!("{c:>w$}") })
            .collect();
        let _ = writeln!(out, "{}", parts.join("  ").trim_end());
    };
    line(&REPORT_COLUMNS);
    for row in &cells {
        line(&row.iter().map(String::as_str).collect::<Vec<_>>());
    }
    out
}

pub fn write_report(rows: &[ReportRow], path: &Path, format: ReportFormat) -> Result<()> {
    std::fs::write(path, render_report(rows, format)).map_err(|e| Error::io(path, e))
}
