use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn msboot(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_msboot"))
        .args(args)
        .output()
        .unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = msboot(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

/// `method -> alpha` from a p-value CSV.
fn alphas(csv: &str) -> Vec<(String, f64)> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = header.iter().position(|h| *h == "alpha").unwrap();
    lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].to_string(), f[col].parse().unwrap())
        })
        .collect()
}

fn alpha(csv: &str, method: &str) -> f64 {
    alphas(csv)
        .into_iter()
        .find(|(m, _)| m == method)
        .unwrap()
        .1
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

#[test]
fn oracle_analysis_of_the_exponential_example() {
    let out = ok(&[
        "analyze",
        "--model",
        "exponential",
        "--n",
        "10",
        "--target",
        "0.05",
        "--mode",
        "oracle",
    ]);
    assert!((alpha(&out, "p0") - 0.1115).abs() < 5e-4);
    assert!((alpha(&out, "p1") - 0.0753).abs() < 1e-3);
    assert!((alpha(&out, "p2") - 0.0528).abs() < 1e-3);
    assert!((alpha(&out, "p3") - 0.0509).abs() < 1e-3);
    assert!((alpha(&out, "exact") - 0.05).abs() < 1e-9);
}

#[test]
fn monte_carlo_runs_repeat_byte_for_byte() {
    let dir = TempDir::new().unwrap();
    let run = |sub: &str| {
        let d = path(dir.path(), sub);
        ok(&[
            "analyze",
            "--model",
            "spherical",
            "--n",
            "10",
            "--xbar-norm2",
            "2.680",
            "--b",
            "2000",
            "--seed",
            "9",
            "--methods",
            "p0,p1,p2",
            "--out-dir",
            &d,
        ]);
        d
    };
    let (a, b) = (run("a"), run("b"));
    for f in ["table.csv", "fit.csv", "fit.json", "pvalues.csv"] {
        let x = fs::read(Path::new(&a).join(f)).unwrap();
        let y = fs::read(Path::new(&b).join(f)).unwrap();
        assert!(!x.is_empty());
        assert_eq!(x, y, "{f}");
    }
}

#[test]
fn missing_seed_is_reported() {
    let out = msboot(&[
        "analyze",
        "--model",
        "spherical",
        "--n",
        "10",
        "--xbar-norm2",
        "2.68",
        "--b",
        "200",
        "--methods",
        "p0",
    ]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("seed="));
}

#[test]
fn flags_override_the_config_file() {
    let dir = TempDir::new().unwrap();
    let cfg = path(dir.path(), "run.cfg");
    fs::write(
        &cfg,
        "# example\nmodel = exponential\nn = 10\ntarget = 0.05\nmode = oracle\nmethods = p0\n",
    )
    .unwrap();
    let from_file = ok(&["analyze", "--config", &cfg]);
    assert!((alpha(&from_file, "p0") - 0.1115).abs() < 5e-4);
    let overridden = ok(&["analyze", "--config", &cfg, "--model", "spherical"]);
    assert!((alpha(&overridden, "p0") - 0.0085).abs() < 5e-4);

    fs::write(&cfg, "colour = blue\n").unwrap();
    assert_eq!(
        msboot(&["analyze", "--config", &cfg]).status.code(),
        Some(2)
    );
}

#[test]
fn count_tables_round_trip() {
    let dir = TempDir::new().unwrap();
    let first = path(dir.path(), "first");
    ok(&[
        "analyze",
        "--model",
        "exponential",
        "--n",
        "10",
        "--target",
        "0.05",
        "--b",
        "4000",
        "--seed",
        "5",
        "--out-dir",
        &first,
    ]);
    let table = path(Path::new(&first), "table.csv");
    let again = ok(&[
        "analyze",
        "--model",
        "exponential",
        "--n",
        "10",
        "--counts",
        &table,
    ]);
    let before = fs::read_to_string(Path::new(&first).join("pvalues.csv")).unwrap();
    assert_eq!(alphas(&before), alphas(&again));
}

#[test]
fn bad_inputs_exit_with_config_code() {
    let code = |args: &[&str]| msboot(args).status.code();
    assert_eq!(
        code(&["analyze", "--model", "cubic", "--n", "10", "--target", "0.05"]),
        Some(2)
    );
    assert_eq!(
        code(&["analyze", "--model", "exponential", "--target", "0.05"]),
        Some(2)
    );
    assert_eq!(
        code(&[
            "analyze",
            "--model",
            "exponential",
            "--n",
            "10",
            "--target",
            "0.05",
            "--methods",
            "p9"
        ]),
        Some(2)
    );

    let dir = TempDir::new().unwrap();
    let scales = path(dir.path(), "scales.csv");
    fs::write(&scales, "tau1\n0.8\n1.2\n").unwrap();
    let args = [
        "analyze",
        "--model",
        "exponential",
        "--n",
        "10",
        "--target",
        "0.05",
        "--mode",
        "oracle",
        "--methods",
        "p0,p1",
        "--scales-file",
        &scales,
    ];
    assert_eq!(code(&args), Some(2));
}

#[test]
fn degenerate_designs_exit_with_numerical_code() {
    let dir = TempDir::new().unwrap();
    let scales = path(dir.path(), "scales.csv");
    fs::write(&scales, "tau1\n1.0\n").unwrap();
    let out = msboot(&[
        "analyze",
        "--model",
        "exponential",
        "--n",
        "10",
        "--target",
        "0.05",
        "--mode",
        "oracle",
        "--methods",
        "p1",
        "--scales-file",
        &scales,
    ]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("degenerate"));
}

#[test]
fn table2_rows() {
    let out = ok(&[
        "table2",
        "--model",
        "exponential",
        "--targets",
        "0.05",
        "--sizes",
        "10",
    ]);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 2);
    let header: Vec<&str> = lines[0].split(',').collect();
    let row: Vec<&str> = lines[1].split(',').collect();
    let get = |name: &str| -> f64 {
        row[header.iter().position(|h| *h == name).unwrap()]
            .parse()
            .unwrap()
    };
    assert!((get("p0") - 11.15).abs() < 0.05);
    assert!((get("p2") - 5.28).abs() < 0.05);
    assert!((get("exact") - 5.0).abs() < 1e-6);
}

#[test]
fn curve_lists_cells_and_grid() {
    let out = ok(&[
        "curve",
        "--model",
        "spherical",
        "--n",
        "10",
        "--target",
        "0.05",
        "--mode",
        "oracle",
        "--grid",
        "11",
    ]);
    let cells = out.lines().filter(|l| l.starts_with("cell,")).count();
    let grid = out.lines().filter(|l| l.starts_with("grid,")).count();
    assert_eq!(cells, 5);
    assert_eq!(grid, 11);
}

#[test]
fn coverage_reports_one_row() {
    let out = ok(&[
        "coverage",
        "--model",
        "exponential",
        "--n",
        "10",
        "--method",
        "exact",
        "--trials",
        "400",
        "--seed",
        "3",
    ]);
    assert_eq!(out.lines().count(), 2);
    assert!(out.lines().next().unwrap().contains("rate"));
}
