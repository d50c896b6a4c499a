use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn shishkin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shishkin"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();

    let ok = shishkin(&[
        "solve",
        "--eps",
        "2^-6",
        "--N",
        "16",
        "--M",
        "8",
        "--out-dir",
        out,
    ]);
    assert_eq!(
        ok.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&ok.stderr)
    );

    let bad = shishkin(&["solve", "--N", "30", "--M", "8", "--out-dir", out]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("divisible by 4"));

    let missing = shishkin(&[
        "check",
        "--problem",
        dir.path().join("none.json").to_str().unwrap(),
    ]);
    assert_eq!(missing.status.code(), Some(1));

    // A deep negative well in b breaks the M-matrix structure of the level systems.
    let well = dir.path().join("well.json");
    fs::write(
        &well,
        r#"{"eps": 1, "beta": 0.5, "b": "1 - 1e9*exp(-(1e4*(x-0.005))^2)",
            "f": "0", "gL": "0", "gR": "0", "phi": "1"}"#,
    )
    .unwrap();
    let breakdown = shishkin(&[
        "solve",
        "--problem",
        well.to_str().unwrap(),
        "--N",
        "200",
        "--M",
        "4",
        "--out-dir",
        out,
    ]);
    assert_eq!(breakdown.status.code(), Some(2));
    assert!(!breakdown.stderr.is_empty());
}

#[test]
fn solve_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let run = shishkin(&[
        "solve",
        "--problem",
        "example23",
        "--eps",
        "2^-12",
        "--N",
        "64",
        "--M",
        "64",
        "--out-dir",
        out,
        "--dump-mesh",
        "--plot-data",
    ]);
    assert_eq!(
        run.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&run.stderr)
    );

    let meta: serde_json::Value = serde_json::from_str(&read(dir.path(), "metadata.json")).unwrap();
    assert_eq!(meta["N"], 64);
    assert_eq!(meta["A0"], -1.0);
    assert_eq!(meta["target"], "Y");
    assert_eq!(meta["eps"], 2f64.powi(-12));
    assert!(meta.get("wall_time_s").is_none());

    let solution = read(dir.path(), "solution.csv");
    assert_eq!(solution.lines().count(), 66);
    assert_eq!(solution.lines().next().unwrap().split(',').count(), 66);

    assert_eq!(read(dir.path(), "mesh.csv").lines().count(), 1 + 65 + 65);

    let sigma = meta["sigma"].as_f64().unwrap();
    let zoom = read(dir.path(), "u_surface_zoom.csv");
    let header: Vec<f64> = zoom
        .lines()
        .next()
        .unwrap()
        .split(',')
        .skip(1)
        .map(|v| v.parse().unwrap())
        .collect();
    assert!(header.iter().all(|&x| x <= 4.0 * sigma));
    assert!(header.len() > 16 && header.len() < 65);

    // Corner of U is g_L(0) = 0, the two-mesh differences are nonnegative.
    let u = read(dir.path(), "u_surface.csv");
    assert!(u.lines().nth(1).unwrap().starts_with("0e0,0e0,"));
    let diff = read(dir.path(), "y_two_mesh_diff.csv");
    for line in diff.lines().skip(1) {
        for v in line.split(',').skip(1) {
            assert!(v.parse::<f64>().unwrap() >= 0.0);
        }
    }
    assert!(dir.path().join("y_two_mesh_diff_zoom.csv").exists());
}

#[test]
fn identical_runs_give_identical_files() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let run = shishkin(&[
            "solve",
            "--eps",
            "2^-8",
            "--N",
            "32",
            "--M",
            "16",
            "--reconstructed",
            "--dump-mesh",
            "--plot-data",
            "--out-dir",
            dir.path().to_str().unwrap(),
        ]);
        assert_eq!(run.status.code(), Some(0));
    }
    for name in [
        "solution.csv",
        "metadata.json",
        "mesh.csv",
        "u_surface.csv",
        "u_surface_zoom.csv",
        "y_two_mesh_diff.csv",
        "y_two_mesh_diff_zoom.csv",
    ] {
        assert_eq!(read(a.path(), name), read(b.path(), name), "{name}");
    }
    let t1 = shishkin(&["table", "--kmax", "6", "--N", "16,32", "--threads", "1"]);
    let t2 = shishkin(&["table", "--kmax", "6", "--N", "16,32", "--threads", "3"]);
    assert_eq!(t1.status.code(), Some(0));
    assert_eq!(t1.stdout, t2.stdout);
}

#[test]
fn single_column_table() {
    let run = shishkin(&["table", "--problem", "example23", "--N", "64"]);
    assert_eq!(run.status.code(), Some(0));
    let text = String::from_utf8(run.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "eps,D_64,Q_64");
    assert_eq!(lines.len(), 1 + 31 + 1);
    assert!(lines[1].starts_with("2^0,3.287E-03,"));
    assert_eq!(lines[32], "uniform,7.360E-02,");
}

#[test]
fn table_to_file_and_pretty() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t/table.csv");
    let run = shishkin(&[
        "table",
        "--eps",
        "2^0,2^-3",
        "--N",
        "64,128",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(run.status.code(), Some(0));
    assert!(run.stdout.is_empty());
    let csv = fs::read_to_string(&path).unwrap();
    assert_eq!(
        csv.lines().nth(1).unwrap(),
        "2^0,3.287E-03,0.851,1.822E-03,"
    );
    assert_eq!(
        csv.lines().nth(2).unwrap(),
        "2^-3,1.266E-02,0.500,8.951E-03,"
    );

    let pretty = shishkin(&[
        "table", "--eps", "2^0", "--N", "64,128", "--format", "pretty",
    ]);
    assert_eq!(pretty.status.code(), Some(0));
    assert!(String::from_utf8(pretty.stdout)
        .unwrap()
        .contains("3.287E-03"));
}

#[test]
fn check_reports_corner_findings() {
    let run = shishkin(&["check", "--problem", "example23"]);
    assert_eq!(run.status.code(), Some(0));
    let text = String::from_utf8(run.stdout).unwrap();
    assert!(text.contains("level0_left   violated   lhs = 1  rhs = 0  residual = 1"));
    assert!(text.contains("level0_right  satisfied"));
    assert!(text.contains("first_right   violated"));
    assert!(text.contains("second_right  violated"));
    assert!(text.contains("A1 = -4096"));

    let dir = tempfile::tempdir().unwrap();
    let bare = dir.path().join("bare.json");
    fs::write(
        &bare,
        r#"{"eps": "2^-2", "b": "1", "f": "0", "gL": "1", "gR": "0", "phi": "1 - x"}"#,
    )
    .unwrap();
    let run = shishkin(&["check", "--problem", bare.to_str().unwrap()]);
    assert_eq!(run.status.code(), Some(0));
    let text = String::from_utf8(run.stdout).unwrap();
    assert!(text.contains("level0_left   satisfied"));
    assert!(text.contains("A0 = 0\n"));
    assert!(text.contains("missing"));
}

#[test]
fn eval_points() {
    let run = shishkin(&[
        "eval",
        "--eps",
        "2^-4",
        "--N",
        "16",
        "--M",
        "8",
        "--reconstructed",
        "--at",
        "0,0.5",
        "--at",
        "1,0",
        "--at",
        "0.3,0.7",
    ]);
    assert_eq!(run.status.code(), Some(0));
    let text = String::from_utf8(run.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "x,t,U");
    assert_eq!(lines[1], "0e0,5e-1,0e0");
    assert_eq!(lines[2], "1e0,0e0,0e0");
    assert_eq!(lines.len(), 4);

    let outside = shishkin(&["eval", "--N", "16", "--M", "8", "--at", "0.5,1.5"]);
    assert_eq!(outside.status.code(), Some(1));
}
