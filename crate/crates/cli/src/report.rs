use std::fmt::Write as _;
use std::time::Duration;

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Text,
    Csv,
}

/// One executed check. `pass` is decided by the runner against the check's
/// own tolerance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRow {
    pub check: String,
    pub value: f64,
    pub oracle: f64,
    pub deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl CheckRow {
    /// `value` must match `oracle` within `tolerance`.
    pub fn compare(check: impl Into<String>, value: f64, oracle: f64, tolerance: f64) -> Self {
        let deviation = (value - oracle).abs();
        CheckRow {
            check: check.into(),
            value,
            oracle,
            deviation,
            tolerance,
            pass: deviation <= tolerance,
        }
    }

    /// A residual that should vanish.
    pub fn residual(check: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        Self::compare(check, residual, 0.0, tolerance)
    }

    /// A yes/no check, reported as 1 or 0 against the expected flag.
    pub fn flag(check: impl Into<String>, observed: bool, expected: bool) -> Self {
        Self::compare(check, f64::from(u8::from(observed)), f64::from(u8::from(expected)), 0.0)
    }

    /// `value ≥ bound`; the deviation is the shortfall.
    pub fn at_least(check: impl Into<String>, value: f64, bound: f64) -> Self {
        let deviation = (bound - value).max(0.0);
        CheckRow {
            check: check.into(),
            value,
            oracle: bound,
            deviation,
            tolerance: 0.0,
            pass: deviation == 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub scenario: String,
    pub kind: String,
    pub seed: u64,
    pub checks: Vec<CheckRow>,
    /// Not emitted, so reports stay byte-identical across reruns.
    #[serde(skip)]
    pub elapsed: Duration,
}

impl RunReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> usize {
        self.checks.iter().filter(|c| !c.pass).count()
    }
}

fn num(x: f64) -> String {
    format!("{x:.11e}")
}

pub fn emit_report(report: &RunReport, format: Format) -> String {
    emit_suite(std::slice::from_ref(report), format)
}

/// Reports in the given order. CSV rows are prefixed with the scenario
/// name when more than one scenario is present.
pub fn emit_suite(reports: &[RunReport], format: Format) -> String {
    match format {
        Format::Csv => emit_csv(reports),
        Format::Text => emit_text(reports),
    }
}

fn emit_csv(reports: &[RunReport]) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record(["check", "value", "oracle", "deviation", "pass"])
        .expect("in-memory write");
    let prefix = reports.len() > 1;
    for report in reports {
        for row in &report.checks {
            let name = if prefix {
                format!("{}: {}", report.scenario, row.check)
            } else {
                row.check.clone()
            };
            writer
                .write_record([
                    name,
                    num(row.value),
                    num(row.oracle),
                    num(row.deviation),
                    row.pass.to_string(),
                ])
                .expect("in-memory write");
        }
    }
    String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

fn emit_text(reports: &[RunReport]) -> String {
    let mut out = String::new();
    for (k, report) in reports.iter().enumerate() {
        if k > 0 {
            out.push('\n');
        }
        let verdict = if report.passed() { "PASS" } else { "FAIL" };
        let _ = writeln!(
            out,
            "{} [{}] seed={} {} ({}/{} checks passed)",
            report.scenario,
            report.kind,
            report.seed,
            verdict,
            report.checks.len() - report.failures(),
            report.checks.len()
        );
        let header = ["check", "value", "oracle", "deviation", "pass"];
        let rows: Vec<[String; 5]> = report
            .checks
            .iter()
            .map(|r| {
                [
                    r.check.clone(),
                    num(r.value),
                    num(r.oracle),
                    num(r.deviation),
                    if r.pass { "pass" } else { "FAIL" }.to_string(),
                ]
            })
            .collect();
        let mut widths = header.map(str::len);
        for row in &rows {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.chars().count());
            }
        }
        let line = |cells: [&str; 5]| {
            let mut s = format!("  {:<w$}", cells[0], w = widths[0]);
            for (cell, w) in cells.iter().zip(widths).skip(1) {
                let _ = write!(s, "  {cell:>w$}");
            }
            s.trim_end().to_string()
        };
        let _ = writeln!(out, "{}", line(header));
        for row in &rows {
            let _ = writeln!(out, "{}", line([&row[0], &row[1], &row[2], &row[3], &row[4]]));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(checks: Vec<CheckRow>) -> RunReport {
        RunReport {
            scenario: "demo".into(),
            kind: "game-value".into(),
            seed: 0,
            checks,
            elapsed: Duration::ZERO,
        }
    }

    #[test]
    fn empty_report_is_header_only() {
        assert_eq!(emit_report(&report(vec![]), Format::Csv), "check,value,oracle,deviation,pass\n");
    }

    #[test]
    fn single_passing_row() {
        let csv = emit_report(&report(vec![CheckRow::compare("value", 0.5, 0.5, 1e-9)]), Format::Csv);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 2);
        assert!(lines[1].ends_with(",true"), "{csv}");
    }

    #[test]
    fn deviations_reparse() {
        let row = CheckRow::compare("x", 2.0 / 3.0, 0.5, 1.0);
        let csv = emit_report(&report(vec![row.clone()]), Format::Csv);
        let mut reader = csv::Reader::from_reader(csv.as_bytes());
        let rec = reader.records().next().unwrap().unwrap();
        let dev: f64 = rec[3].parse().unwrap();
        assert!((dev - row.deviation).abs() <= 1e-11 * row.deviation);
    }

    #[test]
    fn names_with_commas_are_quoted() {
        let csv = emit_report(&report(vec![CheckRow::residual("a, b", 0.0, 1.0)]), Format::Csv);
        assert!(csv.contains("\"a, b\""));
    }

    #[test]
    fn text_columns_align() {
        let text = emit_report(
            &report(vec![
                CheckRow::compare("short", 1.0, 1.0, 0.0),
                CheckRow::compare("a much longer name", -1.0, 1.0, 0.0),
            ]),
            Format::Text,
        );
        let lines: Vec<&str> = text.lines().skip(1).collect();
        let ends: Vec<usize> = lines.iter().map(|l| l.len()).collect();
        assert!(ends.windows(2).all(|w| w[0] == w[1]), "{text}");
        assert!(text.contains("FAIL"));
    }
}
