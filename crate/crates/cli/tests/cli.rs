//! End-to-end runs of the `sgfem` binary.

use std::path::Path;
use std::process::{Command, Output};

fn sgfem(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sgfem")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = sgfem(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(str::to_owned).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(str::to_owned).collect()).collect();
    (header, rows)
}

fn column(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"))
}

#[test]
fn printed_config_round_trips_through_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let text = ok(&["convergence", "--case", "2", "--nu", "0.3", "--levels", "4,8", "--seed", "5", "--print-config"]);
    let path = dir.path().join("run.toml");
    std::fs::write(&path, &text).unwrap();
    let again = ok(&["convergence", "--config", path.to_str().unwrap(), "--print-config"]);
    assert_eq!(again, text);
    let value: toml::Value = toml::from_str(&text).unwrap();
    assert_eq!(value["mesh"]["levels"].as_array().unwrap().len(), 2);
}

#[test]
fn command_line_overrides_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    std::fs::write(&path, "[mesh]\nseed = 3\nperturb = 0.1\n").unwrap();
    let text = ok(&["solve", "--config", path.to_str().unwrap(), "--seed", "7", "--print-config"]);
    let value: toml::Value = toml::from_str(&text).unwrap();
    assert_eq!(value["mesh"]["seed"].as_integer(), Some(7));
    assert_eq!(value["mesh"]["perturb"].as_float(), Some(0.1));
}

#[test]
fn bad_input_is_rejected_with_position() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "[mesh]\nlevels = [4, 8\n").unwrap();
    let out = sgfem(&["convergence", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
    assert_eq!(sgfem(&["solve", "--case", "7"]).status.code(), Some(2));
    assert_eq!(sgfem(&["solve", "--iota", "2"]).status.code(), Some(2));
}

#[test]
fn convergence_rates_follow_from_the_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("conv");
    ok(&["convergence", "--case", "1", "--nu", "0.3", "--iota", "1", "--iota", "1e-6", "--levels", "4,8,16", "--out", out.to_str().unwrap()]);
    let (header, rows) = read_csv(&out.join("convergence_case1.csv"));
    assert_eq!(rows.len(), 6);
    let (e, r) = (column(&header, "rel_error"), column(&header, "rate"));
    for pair in rows.chunks(3) {
        assert!(pair[0][r].is_empty());
        for k in 1..3 {
            let prev: f64 = pair[k - 1][e].parse().unwrap();
            let cur: f64 = pair[k][e].parse().unwrap();
            let rate: f64 = pair[k][r].parse().unwrap();
            assert_eq!(rate, (prev / cur).log2());
        }
    }
    let residual = column(&header, "residual");
    assert!(rows.iter().all(|row| row[residual].parse::<f64>().unwrap() <= 1e-10));
    let text = std::fs::read_to_string(out.join("convergence_case1.txt")).unwrap();
    assert!(text.starts_with("# convergence_case1\n"));
    assert!(out.join("config.toml").exists());
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        ok(&["convergence", "--case", "2", "--nu", "0.4999", "--iota", "1e-6", "--levels", "4,6", "--perturb", "0.2", "--seed", "11", "--out", out.to_str().unwrap()]);
        std::fs::read(out.join("convergence_case2.csv")).unwrap()
    };
    assert_eq!(run("a"), run("b"));
}

#[test]
fn solve_writes_vtk_and_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("solve");
    ok(&["solve", "--case", "1", "--nu", "0.3", "--iota", "1", "--levels", "8", "--dump-matrix", "--out", out.to_str().unwrap()]);
    let vtk = std::fs::read_to_string(out.join("solve_case1_n8_nu0.3_iota1.vtk")).unwrap();
    let mut lines = vtk.lines();
    assert_eq!(lines.next(), Some("# vtk DataFile Version 3.0"));
    assert!(vtk.contains("DATASET UNSTRUCTURED_GRID"));
    assert!(vtk.contains("POINTS 81 double"));
    assert!(vtk.contains("CELLS 128 512"));
    assert!(vtk.contains("VECTORS u_h double"));
    assert!(vtk.contains("SCALARS p_h double 1"));
    let mtx = std::fs::read_to_string(out.join("solve_case1_n8_nu0.3_iota1.mtx")).unwrap();
    assert!(mtx.starts_with("%%MatrixMarket matrix coordinate real general"));
}

#[test]
fn hardy_and_infsup_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("h");
    ok(&["hardy", "--levels", "4,8", "--out", out.to_str().unwrap(), "--format", "csv"]);
    let (_, fit) = read_csv(&out.join("hardy_fit.csv"));
    let names: Vec<&str> = fit.iter().map(|r| r[0].as_str()).collect();
    assert_eq!(names, ["p_weighted", "p_gradient", "ratio_loglog_slope"]);
    let (header, rows) = read_csv(&out.join("hardy_seminorm.csv"));
    let ratio = column(&header, "ratio");
    assert!(rows[1][ratio].parse::<f64>().unwrap() > rows[0][ratio].parse::<f64>().unwrap());
    assert!(!out.join("hardy_fit.txt").exists());

    let stdout = ok(&["infsup", "--levels", "4", "--iota", "1"]);
    let row = stdout.lines().nth(2).unwrap();
    let beta: f64 = row.split_whitespace().nth(2).unwrap().parse().unwrap();
    assert!(beta > 1e-4);
}
