//! Command-line frontend for `revembed`: reads matrix files, dispatches to the
//! library and renders a [`Report`] as text or JSON.

pub mod catalog;
pub mod error;
pub mod io;
pub mod report;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use revembed::embedding::{
    is_markov_generator, log_coefficients_vdm, markov_sqrt_positive, principal_log_integral,
    principal_log_reversible, principal_log_series, theta_set_probe, LogCandidate,
};
use revembed::linalg::expm;
use revembed::{
    classify_embeddability, find_reversing_measure, Classification, Matrix, ProbabilityVector, RateMatrix,
    ReversibilityCertificate, StochasticMatrix, Tolerances,
};

pub use error::CliError;
pub use io::{FileFormat, Kind, MatrixFile};
pub use report::{render, OutputFormat, Report};

/// Environment variable naming a TOML file of tolerance overrides.
pub const TOL_CONFIG_ENV: &str = "REVEMBED_TOL_CONFIG";

#[derive(Debug, Parser)]
#[command(name = "revembed", version, about = "Reversibility and embeddability of Markov matrices")]
pub struct Cli {
    /// Matrix file (JSON or CSV).
    #[arg(long, global = true, value_name = "PATH")]
    pub input: Option<PathBuf>,

    /// Input file format; guessed from the extension or content when omitted.
    #[arg(long, global = true, value_enum)]
    pub input_format: Option<FileFormat>,

    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Text)]
    pub format: OutputFormat,

    /// Tolerance override, e.g. `--tol db_tol=1e-8`. Repeatable.
    #[arg(long = "tol", global = true, value_name = "NAME=VALUE", value_parser = parse_key_value)]
    pub tol: Vec<(String, String)>,

    /// Omit wall-clock timing so output is byte-reproducible.
    #[arg(long, global = true)]
    pub no_timing: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Eigen,
    Series,
    Vdm,
    Integral,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check that the input is a Markov matrix or a generator.
    Validate {
        /// Overrides the file's kind hint; defaults to markov.
        #[arg(long, value_enum)]
        kind: Option<Kind>,
    },
    /// Reversibility certificate and embeddability classification.
    Classify,
    /// A real logarithm of a Markov matrix.
    Log {
        #[arg(long, value_enum, default_value_t = Method::Eigen)]
        method: Method,
    },
    /// `expm(t Q)` for a generator `Q`.
    Exp {
        #[arg(long, default_value_t = 1.0)]
        t: f64,
    },
    /// Reversible square root with positive spectrum.
    Sqrt,
    /// Materialize a named matrix family.
    Catalog {
        #[arg(long, value_enum)]
        family: catalog::Family,
        /// Family parameter, e.g. `--param delta=0.1`. Repeatable.
        #[arg(long = "param", value_name = "K=V", value_parser = parse_key_value)]
        params: Vec<(String, String)>,
        /// Write the matrix file here in addition to the report.
        #[arg(long, value_name = "PATH")]
        output: Option<PathBuf>,
    },
    /// Grid times where `expm(tQ)` and `expm(tR)` coincide; `--input` is `Q`.
    Probe {
        /// Matrix file for `R`.
        #[arg(long, value_name = "PATH")]
        other: PathBuf,
        /// `start:stop:step` or a comma-separated list of times.
        #[arg(long, default_value = "0:3:0.25")]
        grid: String,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Validate { .. } => "validate",
            Command::Classify => "classify",
            Command::Log { .. } => "log",
            Command::Exp { .. } => "exp",
            Command::Sqrt => "sqrt",
            Command::Catalog { .. } => "catalog",
            Command::Probe { .. } => "probe",
        }
    }
}

pub fn parse_key_value(s: &str) -> Result<(String, String), String> {
    match s.split_once('=') {
        Some((k, v)) if !k.trim().is_empty() => Ok((k.trim().to_string(), v.trim().to_string())),
        _ => Err(format!("expected KEY=VALUE, got `{s}`")),
    }
}

/// Defaults, then the file named by `config_path`, then `overrides` in order.
pub fn load_tolerances(config_path: Option<&Path>, overrides: &[(String, String)]) -> Result<Tolerances, CliError> {
    let mut tol = match config_path {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
            toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
        }
        None => Tolerances::default(),
    };
    for (name, value) in overrides {
        let v: f64 = value
            .parse()
            .map_err(|_| CliError::Config(format!("tolerance {name}: `{value}` is not a number")))?;
        tol.set(name, v).map_err(|e| CliError::Config(e.to_string()))?;
    }
    Ok(tol)
}

fn tolerance_map(tol: &Tolerances) -> BTreeMap<String, f64> {
    Tolerances::NAMES
        .iter()
        .map(|&n| (n.to_string(), tol.get(n).expect("listed name")))
        .collect()
}

fn rows(m: &Matrix) -> Vec<Vec<f64>> {
    m.rows()
}

struct Input {
    file: MatrixFile,
    matrix: Matrix,
}

fn read_input(cli: &Cli, path: Option<&Path>, report: &mut Report) -> Result<Input, CliError> {
    let path = path
        .or(cli.input.as_deref())
        .ok_or_else(|| CliError::Usage(format!("`{}` requires --input PATH", cli.command.name())))?;
    let (file, format) = io::parse_matrix_file(path, cli.input_format)?;
    let matrix = Matrix::from_rows(&file.rows)?;
    if report.input.is_none() {
        report.input = Some(report::InputEcho {
            path: path.display().to_string(),
            format: format.to_string(),
            d: file.d,
            rows: file.rows.clone(),
            kind: file.kind.map(|k| k.to_string()),
        });
    }
    Ok(Input { file, matrix })
}

fn record_certificate(cert: &ReversibilityCertificate, report: &mut Report) {
    report.verdict = Some(cert.verdict.as_str().to_string());
    report.measures = cert.measures.iter().map(|p| p.as_slice().to_vec()).collect();
    report.witness = cert.witness.as_ref().map(|w| w.cycle().to_vec());
    report.residuals.insert("detailed_balance".into(), cert.max_residual);
}

fn reversing_measure(cert: &ReversibilityCertificate, tol: &Tolerances) -> Result<ProbabilityVector, CliError> {
    cert.strictly_positive_measure(tol).ok_or_else(|| {
        CliError::Numeric(revembed::Error::NumericalFailure(format!(
            "method needs a strictly positive reversing measure; verdict is {}",
            cert.verdict.as_str()
        )))
    })
}

/// Runs one subcommand. Mathematical verdicts are successes; only I/O, parse
/// and numerical failures are errors.
pub fn run(cli: &Cli) -> Result<Report, CliError> {
    let config = std::env::var_os(TOL_CONFIG_ENV).map(PathBuf::from);
    let tol = load_tolerances(config.as_deref(), &cli.tol)?;
    let start = Instant::now();
    let mut report = Report {
        command: cli.command.name().to_string(),
        tolerances: tolerance_map(&tol),
        ..Report::default()
    };
    match &cli.command {
        Command::Validate { kind } => validate(cli, *kind, &tol, &mut report)?,
        Command::Classify => classify(cli, &tol, &mut report)?,
        Command::Log { method } => log(cli, *method, &tol, &mut report)?,
        Command::Exp { t } => exp(cli, *t, &tol, &mut report)?,
        Command::Sqrt => sqrt(cli, &tol, &mut report)?,
        Command::Catalog { family, params, output } => {
            let (file, notes) = catalog::materialize(*family, params)?;
            validate_file(&file, file.kind.unwrap_or(Kind::Markov), &tol)?;
            if let Some(path) = output {
                file.write(path, output_file_format(path))?;
                report.notes.push(format!("wrote {}", path.display()));
            }
            report.notes.extend(notes);
            report.classification = file.kind.map(|k| k.to_string());
            report.matrix = Some(file.rows);
        }
        Command::Probe { other, grid } => probe(cli, other, grid, &tol, &mut report)?,
    }
    if !cli.no_timing {
        report.timing_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    }
    Ok(report)
}

fn output_file_format(path: &Path) -> FileFormat {
    match path.extension().and_then(|e| e.to_str()) {
        Some(e) if e.eq_ignore_ascii_case("csv") => FileFormat::Csv,
        _ => FileFormat::Json,
    }
}

fn validate_file(file: &MatrixFile, kind: Kind, tol: &Tolerances) -> Result<Matrix, CliError> {
    let m = Matrix::from_rows(&file.rows)?;
    Ok(match kind {
        Kind::Markov => StochasticMatrix::new(m, tol)?.into_matrix(),
        Kind::Generator => RateMatrix::new(m, tol)?.into_matrix(),
    })
}

fn validate(cli: &Cli, kind: Option<Kind>, tol: &Tolerances, report: &mut Report) -> Result<(), CliError> {
    let input = read_input(cli, None, report)?;
    let kind = kind.or(input.file.kind).unwrap_or(Kind::Markov);
    let m = validate_file(&input.file, kind, tol)?;
    let target = if kind == Kind::Markov { 1.0 } else { 0.0 };
    let row_error = m.row_sums().iter().fold(0.0_f64, |a, s| a.max((s - target).abs()));
    report.residuals.insert("row_sum".into(), row_error);
    report.classification = Some(kind.to_string());
    report.notes.push(format!("valid {kind} matrix"));
    Ok(())
}

fn stochastic_input(cli: &Cli, tol: &Tolerances, report: &mut Report) -> Result<StochasticMatrix, CliError> {
    let input = read_input(cli, None, report)?;
    Ok(StochasticMatrix::new(input.matrix, tol)?)
}

fn classify(cli: &Cli, tol: &Tolerances, report: &mut Report) -> Result<(), CliError> {
    let m = stochastic_input(cli, tol, report)?;
    let analysis = classify_embeddability(&m, tol);
    record_certificate(&analysis.reversibility, report);
    report.classification = Some(analysis.classification.name().to_string());
    report.generators = analysis.generators().into_iter().map(rows).collect();
    report.spectrum = analysis.spectrum.as_ref().map(Into::into);
    report.alpha = analysis.alpha.clone();
    report.determinant = Some(analysis.determinant);
    for r in &analysis.log_residuals {
        report.residuals.insert(format!("log_{}", r.method.as_str()), r.residual);
        if r.gap_to_eigen != 0.0 {
            report.residuals.insert(format!("log_{}_gap_to_eigen", r.method.as_str()), r.gap_to_eigen);
        }
    }
    match &analysis.classification {
        Classification::EmbeddableNotReversibly { pairs, commuting } => {
            for (k, pair) in pairs.iter().enumerate() {
                report.residuals.insert(format!("pair_{k}"), pair.residual);
            }
            report.notes.push(format!(
                "{} generator pair(s) (Q, Q~), {}commuting",
                pairs.len(),
                if *commuting { "" } else { "not " }
            ));
        }
        Classification::NotEmbeddableNegativeSimpleEigenvalue { eigenvalue, multiplicity } => {
            report.notes.push(format!("negative eigenvalue {eigenvalue:e} with multiplicity {multiplicity}"));
        }
        Classification::PrincipalLogNotGenerator { log, violations } => {
            report.matrix = Some(rows(log));
            for v in violations {
                report.notes.push(format!("principal log violation: {v:?}"));
            }
        }
        Classification::NotEmbeddable { reason } | Classification::Undecided { reason } => {
            report.notes.push(reason.clone());
        }
        Classification::ReversiblyEmbeddable { .. } => {}
    }
    for (k, pair) in analysis.additional_embeddings.iter().enumerate() {
        report.residuals.insert(format!("additional_pair_{k}"), pair.residual);
    }
    report.notes.extend(analysis.notes.iter().cloned());
    Ok(())
}

fn log(cli: &Cli, method: Method, tol: &Tolerances, report: &mut Report) -> Result<(), CliError> {
    let m = stochastic_input(cli, tol, report)?;
    let cert = find_reversing_measure(&m, tol);
    record_certificate(&cert, report);
    let candidate: LogCandidate = match method {
        Method::Eigen => principal_log_reversible(&m, &reversing_measure(&cert, tol)?, tol)?,
        Method::Series => principal_log_series(&m, tol)?,
        Method::Integral => principal_log_integral(&m)?,
        Method::Vdm => {
            let (solution, candidate) = log_coefficients_vdm(&m, &reversing_measure(&cert, tol)?, tol)?;
            report.alpha = Some(solution.alpha);
            report.residuals.insert("vandermonde".into(), solution.residual);
            candidate
        }
    };
    report.residuals.insert("exp_round_trip".into(), candidate.residual);
    report.residuals.insert("row_sum".into(), candidate.row_sum_error);
    let (is_generator, violations) = is_markov_generator(&candidate.log, tol);
    report.classification = Some(if is_generator { "Generator" } else { "NotGenerator" }.into());
    if is_generator {
        report.generators.push(rows(&candidate.log));
    }
    for v in violations {
        report.notes.push(format!("violation: {v:?}"));
    }
    report.notes.push(format!("method {}", candidate.method.as_str()));
    report.matrix = Some(rows(&candidate.log));
    Ok(())
}

fn exp(cli: &Cli, t: f64, tol: &Tolerances, report: &mut Report) -> Result<(), CliError> {
    if !t.is_finite() || t < 0.0 {
        return Err(CliError::Usage(format!("--t must be finite and nonnegative, got {t}")));
    }
    let input = read_input(cli, None, report)?;
    let q = RateMatrix::new(input.matrix, tol)?;
    let m = expm(&q.scale(t))?;
    let row_error = m.row_sums().iter().fold(0.0_f64, |a, s| a.max((s - 1.0).abs()));
    report.residuals.insert("row_sum".into(), row_error);
    report.generators.push(rows(&q));
    report.matrix = Some(rows(&m));
    Ok(())
}

fn sqrt(cli: &Cli, tol: &Tolerances, report: &mut Report) -> Result<(), CliError> {
    let m = stochastic_input(cli, tol, report)?;
    let cert = find_reversing_measure(&m, tol);
    record_certificate(&cert, report);
    let root = markov_sqrt_positive(&m, &reversing_measure(&cert, tol)?, tol)?;
    report.residuals.insert("square".into(), root.matmul(&root).max_abs_diff(&m));
    report.matrix = Some(rows(&root));
    Ok(())
}

pub fn parse_grid(text: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::Usage(format!("invalid grid `{text}`; use start:stop:step or a comma list"));
    let number = |s: &str| s.trim().parse::<f64>().ok().filter(|v| v.is_finite());
    let parts: Vec<&str> = text.split(':').collect();
    match parts.as_slice() {
        [start, stop, step] => {
            let (start, stop, step) = (number(start).ok_or_else(bad)?, number(stop).ok_or_else(bad)?, number(step).ok_or_else(bad)?);
            if step <= 0.0 || stop < start {
                return Err(bad());
            }
            let n = ((stop - start) / step + 1e-9).floor() as usize;
            Ok((0..=n).map(|i| start + i as f64 * step).collect())
        }
        [list] => list.split(',').map(|s| number(s).ok_or_else(bad)).collect(),
        _ => Err(bad()),
    }
}

fn probe(cli: &Cli, other: &Path, grid: &str, tol: &Tolerances, report: &mut Report) -> Result<(), CliError> {
    let grid = parse_grid(grid)?;
    let q = read_input(cli, None, report)?.matrix;
    let r = read_input(cli, Some(other), report)?.matrix;
    let hits = theta_set_probe(&q, &r, &grid, tol.probe_tol)?;
    let adjacent = grid.windows(2).any(|w| hits.contains(&w[0]) && hits.contains(&w[1]));
    if adjacent {
        report.notes.push("hits at adjacent grid points; the generators may coincide".into());
    }
    report.residuals.insert("generator_gap".into(), q.max_abs_diff(&r));
    report.generators = vec![rows(&q), rows(&r)];
    report.hits = Some(hits);
    Ok(())
}
