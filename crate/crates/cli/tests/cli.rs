use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use revembed_cli::{MatrixFile, Report};
use tempfile::TempDir;

fn revembed(args: &[&str]) -> Output {
    revembed_env(args, None)
}

fn revembed_env(args: &[&str], config: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_revembed"));
    cmd.args(args).env_remove("REVEMBED_TOL_CONFIG");
    if let Some(path) = config {
        cmd.env("REVEMBED_TOL_CONFIG", path);
    }
    cmd.output().expect("binary runs")
}

fn json_report(args: &[&str]) -> Report {
    let mut full = args.to_vec();
    full.extend(["--format", "json", "--no-timing"]);
    let out = revembed(&full);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("report json")
}

fn write(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn max_diff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter().flatten().zip(b.iter().flatten()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn catalog_file(dir: &TempDir, name: &str, family: &str, params: &[&str]) -> PathBuf {
    let path = dir.path().join(name);
    let mut args = vec!["catalog", "--family", family, "--output", s(&path)];
    for p in params {
        args.extend(["--param", p]);
    }
    let out = revembed(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    path
}

#[test]
fn strange_matrix_has_one_cyclic_pair() {
    let dir = TempDir::new().unwrap();
    let m = catalog_file(&dir, "m_eps.json", "m-delta", &[]);
    let r = json_report(&["classify", "--input", s(&m)]);
    assert_eq!(r.verdict.as_deref(), Some("Reversible"));
    assert_eq!(r.classification.as_deref(), Some("EmbeddableNotReversibly"));
    assert_eq!(r.generators.len(), 2);
    let lambda = 2.0 * PI / 3f64.sqrt();
    let plus: Vec<Vec<f64>> = (0..3)
        .map(|i| {
            (0..3)
                .map(|j| match (j + 3 - i) % 3 {
                    0 => -lambda,
                    1 => lambda,
                    _ => 0.0,
                })
                .collect()
        })
        .collect();
    let minus: Vec<Vec<f64>> = (0..3).map(|i| (0..3).map(|j| plus[j][i]).collect()).collect();
    assert!(max_diff(&r.generators[0], &plus) < 1e-9);
    assert!(max_diff(&r.generators[1], &minus) < 1e-9);
    assert!(r.residuals["pair_0"] <= 1e-9);
}

#[test]
fn polynomial_log_of_two_state_matrix() {
    let dir = TempDir::new().unwrap();
    let m = write(&dir, "k2x2.json", r#"{"d":2,"rows":[[0.7,0.3],[0.2,0.8]]}"#);
    let r = json_report(&["log", "--input", s(&m), "--method", "vdm"]);
    // Two-state oracle: L = -ln(1 - a - b)/(a + b) (M - 1).
    let rate = -(0.5f64).ln() / 0.5;
    let alpha = r.alpha.expect("alpha");
    assert_eq!(alpha.len(), 1);
    assert!((alpha[0] - rate).abs() <= 1e-12);
    assert!(r.residuals["exp_round_trip"] <= 1e-12);
    let expected = vec![vec![-0.3 * rate, 0.3 * rate], vec![0.2 * rate, -0.2 * rate]];
    assert!(max_diff(r.matrix.as_ref().unwrap(), &expected) <= 1e-12);
    assert_eq!(r.classification.as_deref(), Some("Generator"));
}

#[test]
fn log_methods_agree_on_the_cli() {
    let dir = TempDir::new().unwrap();
    let m = write(&dir, "m.csv", "0.75,0.25\n0.25,0.75\n");
    let logs: Vec<Vec<Vec<f64>>> = ["eigen", "series", "vdm", "integral"]
        .iter()
        .map(|method| json_report(&["log", "--input", s(&m), "--method", method]).matrix.unwrap())
        .collect();
    for l in &logs[1..] {
        assert!(max_diff(l, &logs[0]) < 1e-12);
    }
}

#[test]
fn dihedral_generator_file() {
    let dir = TempDir::new().unwrap();
    let path = catalog_file(&dir, "q.json", "dihedral", &["which=generator"]);
    let file: MatrixFile = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let literal = [[-9.0, 6.0, 3.0, 0.0], [2.0, -9.0, 4.0, 3.0], [3.0, 0.0, -9.0, 6.0], [4.0, 3.0, 2.0, -9.0]];
    let c = PI / (2.0 * 3f64.sqrt());
    let expected: Vec<Vec<f64>> = literal.iter().map(|r| r.iter().map(|v| v * c).collect()).collect();
    assert_eq!(file.d, 4);
    assert!(max_diff(&file.rows, &expected) < 1e-15);
    assert_eq!(file.kind, Some(revembed_cli::Kind::Generator));
}

#[test]
fn json_output_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let m = catalog_file(&dir, "d.json", "dihedral", &[]);
    let args = ["classify", "--input", s(&m), "--format", "json", "--no-timing"];
    let a = revembed(&args);
    let b = revembed(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let report: Report = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(report.classification.as_deref(), Some("Undecided"));
    assert!(report.timing_ms.is_none());
}

#[test]
fn every_catalog_family_revalidates() {
    let dir = TempDir::new().unwrap();
    let cases: &[(&str, &[&str])] = &[
        ("two-state", &["a=0.3", "b=0.6"]),
        ("equal-input", &["x=0.2,0.3,0.1"]),
        ("equal-input", &["x=0.2,0.3,0.1", "which=generator"]),
        ("constant-input", &["c=0.7", "d=4"]),
        ("m-delta", &[]),
        ("m-delta", &["k=2"]),
        ("m-delta", &["delta=-0.3"]),
        ("cyclic", &[]),
        ("cyclic", &["lambda=1.5", "which=minus"]),
        ("dihedral", &[]),
        ("dihedral", &["which=generator"]),
        ("dihedral", &["which=group"]),
    ];
    for (k, (family, params)) in cases.iter().enumerate() {
        for ext in ["json", "csv"] {
            let path = catalog_file(&dir, &format!("f{k}.{ext}"), family, params);
            let kind = if params.iter().any(|p| p.contains("generator") || p.contains("group"))
                || matches!(*family, "constant-input" | "cyclic")
            {
                "generator"
            } else {
                "markov"
            };
            let out = revembed(&["validate", "--input", s(&path), "--kind", kind]);
            assert!(out.status.success(), "{family} {params:?} {ext}: {}", String::from_utf8_lossy(&out.stderr));
        }
    }
}

#[test]
fn matrix_file_round_trip_is_bit_identical() {
    let dir = TempDir::new().unwrap();
    let path = catalog_file(&dir, "d.json", "dihedral", &[]);
    let text = std::fs::read_to_string(&path).unwrap();
    let file = revembed_cli::io::parse_json(&text).unwrap();
    assert_eq!(file.to_json(), text);
    let again = revembed_cli::io::parse_json(&file.to_json()).unwrap();
    for (a, b) in file.rows.iter().flatten().zip(again.rows.iter().flatten()) {
        assert_eq!(a.to_bits(), b.to_bits());
    }
}

#[test]
fn report_json_parses_back_equivalently() {
    let dir = TempDir::new().unwrap();
    let m = catalog_file(&dir, "m.json", "m-delta", &[]);
    let out = revembed(&["classify", "--input", s(&m), "--format", "json"]);
    let report: Report = serde_json::from_slice(&out.stdout).unwrap();
    let rendered = revembed_cli::render(&report, revembed_cli::OutputFormat::Json);
    assert_eq!(rendered.as_bytes(), out.stdout.as_slice());
    let value: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    for key in ["verdict", "measures", "generators", "spectrum", "residuals", "tolerances"] {
        assert!(value.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn not_reversible_exits_zero_with_witness() {
    let dir = TempDir::new().unwrap();
    let m = write(&dir, "cycle.csv", "0.9,0.1,0\n0,0.9,0.1\n0.1,0,0.9\n");
    let out = revembed(&["classify", "--input", s(&m)]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("verdict: NotReversible"));
    assert!(text.contains("witness cycle: 0 -> 1 -> 2 -> 0"));
}

#[test]
fn reversible_two_state_text() {
    let dir = TempDir::new().unwrap();
    let m = write(&dir, "m.csv", "0.7,0.3\n0.6,0.4\n");
    let out = revembed(&["classify", "--input", s(&m)]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("verdict: Reversible"));
    assert!(text.contains("p = (0.666667, 0.333333)"));
    assert!(text.contains("classification: ReversiblyEmbeddable"));
}

#[test]
fn probe_hits_integer_times_for_cyclic_pair() {
    let dir = TempDir::new().unwrap();
    let q = catalog_file(&dir, "qp.json", "cyclic", &[]);
    let r = catalog_file(&dir, "qm.json", "cyclic", &["which=minus"]);
    let report = json_report(&["probe", "--input", s(&q), "--other", s(&r), "--grid", "0:3:0.25"]);
    assert_eq!(report.hits, Some(vec![0.0, 1.0, 2.0, 3.0]));
}

#[test]
fn exp_of_cyclic_generator_is_m_epsilon() {
    let dir = TempDir::new().unwrap();
    let q = catalog_file(&dir, "qp.json", "cyclic", &[]);
    let m = catalog_file(&dir, "m.json", "m-delta", &[]);
    let m: MatrixFile = serde_json::from_str(&std::fs::read_to_string(&m).unwrap()).unwrap();
    let report = json_report(&["exp", "--input", s(&q)]);
    assert!(max_diff(report.matrix.as_ref().unwrap(), &m.rows) < 1e-13);
}

#[test]
fn sqrt_squares_back() {
    let dir = TempDir::new().unwrap();
    let m = write(&dir, "m.csv", "0.7,0.3\n0.6,0.4\n");
    let report = json_report(&["sqrt", "--input", s(&m)]);
    let root = report.matrix.unwrap();
    let square: Vec<Vec<f64>> =
        (0..2).map(|i| (0..2).map(|j| (0..2).map(|k| root[i][k] * root[k][j]).sum()).collect()).collect();
    assert!(max_diff(&square, &[vec![0.7, 0.3], vec![0.6, 0.4]]) < 1e-12);
}

#[test]
fn tolerance_overrides_and_config_file() {
    let dir = TempDir::new().unwrap();
    let m = write(&dir, "m.csv", "1,0\n0,1\n");
    let config = write(&dir, "tol.toml", "db_tol = 1e-7\ncluster_tol = 1e-6\n");
    let out = revembed_env(
        &["validate", "--input", s(&m), "--tol", "cluster_tol=1e-5", "--format", "json"],
        Some(&config),
    );
    assert!(out.status.success());
    let r: Report = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r.tolerances["db_tol"], 1e-7);
    assert_eq!(r.tolerances["cluster_tol"], 1e-5);
    assert_eq!(r.tolerances["row_tol"], 1e-10);

    let bad = write(&dir, "bad.toml", "not_a_tol = 1\n");
    assert_eq!(revembed_env(&["validate", "--input", s(&m)], Some(&bad)).status.code(), Some(2));
    assert_eq!(revembed(&["validate", "--input", s(&m), "--tol", "nope=1"]).status.code(), Some(2));
}

#[test]
fn failures_map_to_nonzero_exit_codes() {
    let dir = TempDir::new().unwrap();
    let ragged = write(&dir, "ragged.csv", "1,0\n0\n");
    let text = write(&dir, "text.csv", "1,a\n0,1\n");
    let swap = write(&dir, "swap.csv", "0,1\n1,0\n");
    let rows = write(&dir, "rows.csv", "0.5,0.6\n0.5,0.5\n");
    let code = |args: &[&str]| revembed(args).status.code();
    assert_eq!(code(&["classify", "--input", "/nonexistent/m.json"]), Some(3));
    assert_eq!(code(&["classify", "--input", s(&ragged)]), Some(4));
    assert_eq!(code(&["classify", "--input", s(&text)]), Some(4));
    assert_eq!(code(&["log", "--input", s(&swap), "--method", "series"]), Some(5));
    assert_eq!(code(&["validate", "--input", s(&rows)]), Some(5));
    assert_eq!(code(&["classify"]), Some(2));
    assert_eq!(code(&["frobnicate"]), Some(2));
    assert_eq!(code(&["classify", "--bogus"]), Some(2));
    // A definite negative verdict is still a success.
    assert_eq!(code(&["classify", "--input", s(&swap)]), Some(0));
}
