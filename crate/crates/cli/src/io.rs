//! Matrix files: `{"d": 2, "rows": [[...], [...]], "kind": "markov"}` or plain CSV.

use std::fmt;
use std::path::Path;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Markov,
    Generator,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kind::Markov => "markov",
            Kind::Generator => "generator",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum FileFormat {
    Json,
    Csv,
}

impl fmt::Display for FileFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FileFormat::Json => "json",
            FileFormat::Csv => "csv",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixFile {
    pub d: usize,
    pub rows: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<Kind>,
}

impl MatrixFile {
    pub fn new(rows: Vec<Vec<f64>>, kind: Option<Kind>) -> Self {
        MatrixFile { d: rows.len(), rows, kind }
    }

    fn check_shape(&self) -> Result<(), CliError> {
        if self.d == 0 {
            return Err(CliError::DimensionMismatch("matrix has no rows".into()));
        }
        if self.rows.len() != self.d {
            return Err(CliError::DimensionMismatch(format!(
                "d = {} but {} rows given",
                self.d,
                self.rows.len()
            )));
        }
        for (i, row) in self.rows.iter().enumerate() {
            if row.len() != self.d {
                return Err(CliError::DimensionMismatch(format!(
                    "row {} has {} entries, expected {}",
                    i + 1,
                    row.len(),
                    self.d
                )));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string(self).expect("matrix file serializes");
        s.push('\n');
        s
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }

    pub fn write(&self, path: &Path, format: FileFormat) -> Result<(), CliError> {
        let body = match format {
            FileFormat::Json => self.to_json(),
            FileFormat::Csv => self.to_csv(),
        };
        std::fs::write(path, body).map_err(|source| CliError::Io { path: path.display().to_string(), source })
    }
}

/// Guesses the format from the extension, then from the first character.
pub fn detect_format(path: &Path, text: &str) -> FileFormat {
    match path.extension().and_then(|e| e.to_str()) {
        Some(e) if e.eq_ignore_ascii_case("csv") => FileFormat::Csv,
        Some(e) if e.eq_ignore_ascii_case("json") => FileFormat::Json,
        _ if text.trim_start().starts_with('{') => FileFormat::Json,
        _ => FileFormat::Csv,
    }
}

pub fn parse_json(text: &str) -> Result<MatrixFile, CliError> {
    let file: MatrixFile = serde_json::from_str(text).map_err(|e| CliError::Parse {
        line: e.line(),
        col: e.column(),
        message: e.to_string(),
    })?;
    file.check_shape()?;
    Ok(file)
}

/// `d` lines of `d` comma-separated numbers; blank lines are skipped.
pub fn parse_csv(text: &str) -> Result<MatrixFile, CliError> {
    let mut rows = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut row = Vec::new();
        let mut col = 1;
        for cell in line.split(',') {
            let token = cell.trim();
            let value: f64 = token.parse().map_err(|_| CliError::NonNumeric {
                line: ln + 1,
                col,
                token: token.to_string(),
            })?;
            if !value.is_finite() {
                return Err(CliError::NonNumeric { line: ln + 1, col, token: token.to_string() });
            }
            row.push(value);
            col += cell.len() + 1;
        }
        rows.push(row);
    }
    let file = MatrixFile::new(rows, None);
    file.check_shape()?;
    Ok(file)
}

pub fn parse_matrix_text(text: &str, format: FileFormat) -> Result<MatrixFile, CliError> {
    match format {
        FileFormat::Json => parse_json(text),
        FileFormat::Csv => parse_csv(text),
    }
}

pub fn parse_matrix_file(path: &Path, hint: Option<FileFormat>) -> Result<(MatrixFile, FileFormat), CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
    let format = hint.unwrap_or_else(|| detect_format(path, &text));
    Ok((parse_matrix_text(&text, format)?, format))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_two_by_two() {
        let f = parse_json(r#"{"d":2,"rows":[[0.75,0.25],[0.25,0.75]]}"#).unwrap();
        assert_eq!(f.rows, vec![vec![0.75, 0.25], vec![0.25, 0.75]]);
        assert_eq!(f.kind, None);
    }

    #[test]
    fn csv_identity() {
        let f = parse_csv("1,0\n0,1").unwrap();
        assert_eq!(f.d, 2);
        assert_eq!(f.rows, vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
    }

    #[test]
    fn ragged_csv_is_dimension_mismatch() {
        assert!(matches!(parse_csv("1,0\n0"), Err(CliError::DimensionMismatch(_))));
    }

    #[test]
    fn csv_reports_position_of_bad_token() {
        match parse_csv("1,0\n0, x") {
            Err(CliError::NonNumeric { line, col, token }) => {
                assert_eq!((line, col, token.as_str()), (2, 3, "x"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn json_errors_carry_line_and_column() {
        match parse_json("{\"d\":2,\n\"rows\":[[1,0],[0,]]}") {
            Err(CliError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse_json(r#"{"d":3,"rows":[[1,0],[0,1]]}"#),
            Err(CliError::DimensionMismatch(_))
        ));
    }

    #[test]
    fn json_round_trip_is_bit_identical() {
        let rows = vec![
            vec![1.0 / 3.0, 2.0 / 3.0, 0.0],
            vec![0.1 + 0.2, 1e-300, std::f64::consts::PI],
            vec![-0.0, 5e-324, 0.7 - 1e-17],
        ];
        let f = MatrixFile::new(rows, Some(Kind::Generator));
        let back = parse_json(&f.to_json()).unwrap();
        for (a, b) in f.rows.iter().flatten().zip(back.rows.iter().flatten()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        assert_eq!(back.kind, Some(Kind::Generator));
        assert_eq!(back.to_json(), f.to_json());
    }

    #[test]
    fn format_detection() {
        assert_eq!(detect_format(Path::new("m.csv"), "{"), FileFormat::Csv);
        assert_eq!(detect_format(Path::new("m"), " {\"d\":1}"), FileFormat::Json);
        assert_eq!(detect_format(Path::new("m.txt"), "1"), FileFormat::Csv);
    }
}
