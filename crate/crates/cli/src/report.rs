//! The report every subcommand produces, and its text and JSON renderings.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use revembed::linalg::SpectrumSummary;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Text,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputEcho {
    pub path: String,
    pub format: String,
    pub d: usize,
    pub rows: Vec<Vec<f64>>,
    pub kind: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumEcho {
    pub distinct_values: Vec<f64>,
    pub multiplicities: Vec<usize>,
    pub widths: Vec<f64>,
    pub m: usize,
}

impl From<&SpectrumSummary> for SpectrumEcho {
    fn from(s: &SpectrumSummary) -> Self {
        SpectrumEcho {
            distinct_values: s.distinct_values.clone(),
            multiplicities: s.multiplicities.clone(),
            widths: s.widths.clone(),
            m: s.m,
        }
    }
}

/// Every key is always present; absent values serialize as `null` or `[]`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct Report {
    pub command: String,
    pub input: Option<InputEcho>,
    pub tolerances: BTreeMap<String, f64>,
    /// Reversibility verdict of the input, when it was computed.
    pub verdict: Option<String>,
    pub measures: Vec<Vec<f64>>,
    /// Witness cycle for a `NotReversible` verdict; the last state links to the first.
    pub witness: Option<Vec<usize>>,
    pub classification: Option<String>,
    pub determinant: Option<f64>,
    pub generators: Vec<Vec<Vec<f64>>>,
    pub spectrum: Option<SpectrumEcho>,
    pub residuals: BTreeMap<String, f64>,
    pub alpha: Option<Vec<f64>>,
    /// Matrix produced by `log`, `exp`, `sqrt` or `catalog`.
    pub matrix: Option<Vec<Vec<f64>>>,
    /// Grid times reported by `probe`.
    pub hits: Option<Vec<f64>>,
    pub notes: Vec<String>,
    pub timing_ms: Option<f64>,
}

/// `%g`-style formatting with six significant digits.
pub fn sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.5e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..6).contains(&exp) {
        let decimals = (5 - exp) as usize;
        trim_zeros(format!("{:.*}", decimals, x))
    } else {
        format!("{}e{}", trim_zeros(mantissa.to_string()), exp)
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn vector(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|&x| sig6(x)).collect();
    format!("({})", parts.join(", "))
}

fn matrix(out: &mut String, rows: &[Vec<f64>]) {
    let cells: Vec<Vec<String>> = rows.iter().map(|r| r.iter().map(|&x| sig6(x)).collect()).collect();
    let width = cells.iter().flatten().map(String::len).max().unwrap_or(0);
    for row in cells {
        let padded: Vec<String> = row.iter().map(|c| format!("{c:>width$}")).collect();
        let _ = writeln!(out, "    [{}]", padded.join("  "));
    }
}

pub fn render(report: &Report, format: OutputFormat) -> String {
    match format {
        OutputFormat::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("report serializes");
            s.push('\n');
            s
        }
        OutputFormat::Text => render_text(report),
    }
}

fn render_text(r: &Report) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "command: {}", r.command);
    if let Some(input) = &r.input {
        let kind = input.kind.as_deref().unwrap_or("unspecified");
        let _ = writeln!(out, "input: {} ({}, d = {}, kind {})", input.path, input.format, input.d, kind);
    }
    if let Some(v) = &r.verdict {
        let _ = writeln!(out, "verdict: {v}");
    }
    for p in &r.measures {
        let _ = writeln!(out, "p = {}", vector(p));
    }
    if let Some(cycle) = &r.witness {
        let mut states: Vec<String> = cycle.iter().map(usize::to_string).collect();
        if let Some(first) = cycle.first() {
            states.push(first.to_string());
        }
        let _ = writeln!(out, "witness cycle: {}", states.join(" -> "));
    }
    if let Some(c) = &r.classification {
        let _ = writeln!(out, "classification: {c}");
    }
    if let Some(det) = r.determinant {
        let _ = writeln!(out, "det = {}", sig6(det));
    }
    if let Some(s) = &r.spectrum {
        let clusters: Vec<String> = s
            .distinct_values
            .iter()
            .zip(&s.multiplicities)
            .map(|(v, m)| if *m == 1 { sig6(*v) } else { format!("{} (x{m})", sig6(*v)) })
            .collect();
        let _ = writeln!(out, "spectrum: {}", clusters.join(", "));
    }
    if let Some(alpha) = &r.alpha {
        let _ = writeln!(out, "alpha = {}", vector(alpha));
    }
    for (k, g) in r.generators.iter().enumerate() {
        let _ = writeln!(out, "generator {k}:");
        matrix(&mut out, g);
    }
    if let Some(m) = &r.matrix {
        let _ = writeln!(out, "matrix:");
        matrix(&mut out, m);
    }
    if let Some(hits) = &r.hits {
        let _ = writeln!(out, "hits: {}", vector(hits));
    }
    for (name, value) in &r.residuals {
        let _ = writeln!(out, "residual {name}: {value:e}");
    }
    for note in &r.notes {
        let _ = writeln!(out, "note: {note}");
    }
    if let Some(ms) = r.timing_ms {
        let _ = writeln!(out, "time: {} ms", sig6(ms));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits() {
        assert_eq!(sig6(2.0 / 3.0), "0.666667");
        assert_eq!(sig6(1.0 / 3.0), "0.333333");
        assert_eq!(sig6(0.5), "0.5");
        assert_eq!(sig6(1.0), "1");
        assert_eq!(sig6(-3.6275987), "-3.6276");
        assert_eq!(sig6(4.333420e-3), "0.00433342");
        assert_eq!(sig6(1.87785e-5), "1.87785e-5");
        assert_eq!(sig6(9999999.0), "1e7");
        assert_eq!(sig6(123456.4), "123456");
    }

    #[test]
    fn text_lists_measure_and_witness() {
        let r = Report {
            command: "classify".into(),
            verdict: Some("NotReversible".into()),
            measures: vec![vec![2.0 / 3.0, 1.0 / 3.0]],
            witness: Some(vec![0, 1, 2]),
            ..Report::default()
        };
        let text = render(&r, OutputFormat::Text);
        assert!(text.contains("p = (0.666667, 0.333333)"));
        assert!(text.contains("witness cycle: 0 -> 1 -> 2 -> 0"));
    }

    #[test]
    fn json_parses_back() {
        let mut r = Report { command: "log".into(), alpha: Some(vec![1.3862943611198906]), ..Report::default() };
        r.residuals.insert("exp".into(), 1e-17);
        let back: Report = serde_json::from_str(&render(&r, OutputFormat::Json)).unwrap();
        assert_eq!(back, r);
    }
}
