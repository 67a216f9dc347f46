use std::path::{Path, PathBuf};
use std::process::Command;

use dicke_battery::cli::{main_with_args, read_csv};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dicke-battery"))
}

fn run(args: &[&str]) -> i32 {
    let mut full = vec!["dicke-battery"];
    full.extend_from_slice(args);
    main_with_args(full)
}

fn out(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}

fn column(header: &[String], name: &str) -> usize {
    header
        .iter()
        .position(|h| h == name)
        .unwrap_or_else(|| panic!("no column {name}"))
}

#[test]
fn trace_schema_and_static_column() {
    let dir = tempfile::tempdir().unwrap();
    let path = out(dir.path(), "trace.csv");
    assert_eq!(
        run(&[
            "trace",
            "--n",
            "1",
            "--amp",
            "1.0",
            "--out",
            path.to_str().unwrap()
        ]),
        0
    );
    let (header, rows) = read_csv(&path).unwrap();
    assert_eq!(header, ["T", "E_numeric", "E_analytic", "E_static"]);
    assert_eq!(rows.len(), 400);
    let s = column(&header, "E_static");
    // the grid does not hit T = π/√2 exactly; the sampled maximum sits just below
    let max = rows.iter().map(|r| r[s]).fold(f64::NEG_INFINITY, f64::max);
    assert!((0.5 - 1e-4..=0.5).contains(&max), "{max}");
    let meta = std::fs::read_to_string(dir.path().join("trace.meta")).unwrap();
    let exact: f64 = meta
        .lines()
        .find_map(|l| l.strip_prefix("static_max = "))
        .unwrap()
        .parse()
        .unwrap();
    assert!((exact - 0.5).abs() <= 1e-6);
    for key in [
        "version = ",
        "wall_time_s = ",
        "units = ",
        "t_range = 0.5:30:400",
        "amp = 1",
    ] {
        assert!(meta.contains(key), "meta lacks {key}");
    }
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(!text.contains('\r'));
    assert!(text.ends_with('\n'));
}

#[test]
fn trace_without_drive_is_flat() {
    let dir = tempfile::tempdir().unwrap();
    let path = out(dir.path(), "zero.csv");
    let p = path.to_str().unwrap();
    assert_eq!(
        run(&[
            "trace",
            "--n",
            "1",
            "--amp",
            "0",
            "--t-range",
            "0.5:10:40",
            "--out",
            p
        ]),
        0
    );
    let (_, rows) = read_csv(&path).unwrap();
    assert!(rows.iter().all(|r| r[1] == 0.0 && r[2] == 0.0 && r[3] == 0.0));
}

#[test]
fn trace_per_atom_matches_single_atom() {
    let dir = tempfile::tempdir().unwrap();
    let one = out(dir.path(), "one.csv");
    let eight = out(dir.path(), "eight.csv");
    let grid = "0.5:20:80";
    assert_eq!(
        run(&[
            "trace",
            "--n",
            "1",
            "--t-range",
            grid,
            "--out",
            one.to_str().unwrap()
        ]),
        0
    );
    assert_eq!(
        run(&[
            "trace",
            "--n",
            "8",
            "--lambda",
            "0",
            "--t-range",
            grid,
            "--out",
            eight.to_str().unwrap()
        ]),
        0
    );
    let (_, a) = read_csv(&one).unwrap();
    let (_, b) = read_csv(&eight).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert!((x[1] - y[1]).abs() <= 1e-6);
        assert!(y[2].is_nan() && y[3].is_nan());
    }
}

#[test]
fn ground_table() {
    let dir = tempfile::tempdir().unwrap();
    let path = out(dir.path(), "ground.csv");
    let p = path.to_str().unwrap();
    assert_eq!(
        run(&["ground", "--n", "200", "--lambda-range", "-2:0:81", "--out", p]),
        0
    );
    let (header, rows) = read_csv(&path).unwrap();
    assert_eq!(
        header,
        [
            "lambda",
            "sz_per_spin_N",
            "sz_per_spin_inf",
            "e0_per_halfN",
            "e1_per_halfN",
            "gap"
        ]
    );
    assert_eq!(rows.len(), 81);
    for r in rows {
        let (lambda, sz) = (r[0], r[1]);
        if lambda > -1.0 {
            assert_eq!(sz, -1.0, "λ={lambda}");
        } else if lambda < -1.0 {
            assert!(
                (sz - 1.0 / lambda).abs() <= 1.0 / 200.0 * (1.0 + lambda.abs()),
                "λ={lambda}"
            );
        }
    }
}

#[test]
fn surface_writes_ridge_and_marks_missing_cells() {
    let dir = tempfile::tempdir().unwrap();
    let path = out(dir.path(), "surface.csv");
    let p = path.to_str().unwrap();
    assert_eq!(
        run(&[
            "surface",
            "--mode",
            "analytic",
            "--a-range",
            "5:8:4",
            "--omega-range",
            "0.5:1.5:5",
            "--out",
            p
        ]),
        0
    );
    let (header, rows) = read_csv(&path).unwrap();
    assert_eq!(header, ["A", "omega", "E_max"]);
    assert_eq!(rows.len(), 20);
    assert!(rows.iter().any(|r| r[2].is_nan()));
    let (rh, rr) = read_csv(&dir.path().join("surface_ridge.csv")).unwrap();
    assert_eq!(rh, ["A", "omega_ridge"]);
    assert_eq!(rr.len(), 4);
    let meta = std::fs::read_to_string(dir.path().join("surface.meta")).unwrap();
    let warnings: usize = meta
        .lines()
        .find_map(|l| l.strip_prefix("warnings = "))
        .unwrap()
        .parse()
        .unwrap();
    assert!(warnings > 0);
}

#[test]
fn sweep_lambda_is_independent_of_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for workers in ["1", "8"] {
        let path = out(dir.path(), &format!("lam{workers}.csv"));
        let code = run(&[
            "sweep-lambda",
            "--n",
            "12",
            "--lambda-range",
            "-1.5:1.5:7",
            "--t-range",
            "1:12:45",
            "--workers",
            workers,
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
        outputs.push(std::fs::read(&path).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    let text = String::from_utf8(outputs.remove(0)).unwrap();
    assert!(text.starts_with("lambda,E_max_per_atom,T_max\n"));
}

#[test]
fn sweep_n_schema_and_slope_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let path = out(dir.path(), "sn.csv");
    let code = run(&[
        "sweep-n",
        "--n-list",
        "4,8,12,16,20",
        "--lambda",
        "0.5",
        "--t-range",
        "3:10:50",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let (header, rows) = read_csv(&path).unwrap();
    assert_eq!(header, ["N", "E_max_per_atom", "T_max", "omega_max"]);
    assert_eq!(rows.len(), 5);
    for r in &rows {
        assert!((r[2] * r[3] - std::f64::consts::TAU).abs() <= 1e-12);
    }
    let meta = std::fs::read_to_string(dir.path().join("sn.meta")).unwrap();
    assert!(meta.contains("loglog_slope = "));
}

#[test]
fn config_file_and_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    let path = out(dir.path(), "cfg.csv");
    std::fs::write(
        &cfg,
        format!("n = 1\namp = 0.5\nt_range = 0.5:5:10\nout = {}\n", path.display()),
    )
    .unwrap();
    assert_eq!(
        run(&["trace", "--config", cfg.to_str().unwrap(), "--amp", "0"]),
        0
    );
    let (_, rows) = read_csv(&path).unwrap();
    assert_eq!(rows.len(), 10);
    assert!(rows.iter().all(|r| r[1] == 0.0));
}

#[test]
fn bad_config_fails_with_line_and_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "n = 1\n\nampp = 0.5\n").unwrap();
    let output = bin()
        .args(["trace", "--config", cfg.to_str().unwrap()])
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert!(!output.status.success());
    let err = String::from_utf8_lossy(&output.stderr);
    assert!(err.contains("line 3") && err.contains("ampp"), "{err}");
}

#[test]
fn selfcheck_exit_codes() {
    let start = std::time::Instant::now();
    let ok = bin().args(["selfcheck", "--quick"]).output().unwrap();
    assert!(start.elapsed().as_secs_f64() < 10.0);
    assert!(ok.status.success());
    let text = String::from_utf8_lossy(&ok.stdout);
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 5);

    let bad = bin()
        .args(["selfcheck", "--quick", "--perturb-bessel", "1e-6"])
        .output()
        .unwrap();
    assert!(!bad.status.success());
    let text = String::from_utf8_lossy(&bad.stdout);
    assert!(text
        .lines()
        .any(|l| l.starts_with("FAIL") && l.contains("bessel-oracle")));
}

#[test]
fn unknown_flag_is_rejected() {
    assert_ne!(run(&["trace", "--ampl", "1"]), 0);
    assert_ne!(run(&["trace", "-n", "1"]), 0);
}
