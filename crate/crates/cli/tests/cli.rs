//! End-to-end checks of the `resist` binary: flag surface, exit codes, file
//! formats, and byte-level reproducibility.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn resist(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_resist"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn tmpdir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("resist-cli-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn stdout_json(out: &Output) -> serde_json::Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn solve_short_body_matches_the_zero_height_limit() {
    let out = resist(&["solve", "--case", "nonconvex", "--height", "0.001"]);
    let v = stdout_json(&out);
    let r = v["resistance"].as_f64().unwrap();
    assert!((0.49..=0.51).contains(&r), "resistance {r}");
    assert!(v["x0"].as_f64().unwrap() > 0.98);
}

#[test]
fn solve_newton_profile_has_the_slope_jump() {
    let dir = tmpdir("newton");
    let base = dir.join("sol");
    let out = resist(&[
        "solve",
        "--case",
        "newton",
        "--height",
        "2",
        "--out",
        base.to_str().unwrap(),
    ]);
    let v = stdout_json(&out);
    let x0 = v["x0"].as_f64().unwrap();
    let csv = std::fs::read_to_string(dir.join("sol.csv")).unwrap();
    let mut before = f64::NAN;
    let mut after = f64::NAN;
    for line in csv.lines().skip(1) {
        let cols: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        if cols[0] < x0 {
            before = cols[2];
        } else if after.is_nan() && cols[0] > x0 {
            after = cols[2];
        }
    }
    assert_eq!(before, 0.0, "slope is zero on the disk");
    assert!(
        (after - 1.0).abs() < 0.05,
        "slope just past the disk: {after}"
    );
}

#[test]
fn solve_tall_body_matches_the_tail_constant() {
    let out = resist(&["solve", "--case", "nonconvex", "--height", "100"]);
    let v = stdout_json(&out);
    let scaled = v["resistance"].as_f64().unwrap() * 100.0 * 100.0;
    assert!(
        (scaled / (27.0 / 128.0) - 1.0).abs() < 0.02,
        "R h^2 = {scaled}"
    );
}

#[test]
fn single_impact_below_threshold_exits_3_naming_the_chain() {
    let out = resist(&["solve", "--case", "single-impact", "--height", "0.3"]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(
        err.contains("chain"),
        "stderr should point at the chain: {err}"
    );
}

#[test]
fn bad_kernel_file_exits_2() {
    let out = resist(&[
        "solve",
        "--case",
        "custom:/nonexistent/kernel.json",
        "--height",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn zigzag_rejecting_delta_exits_3() {
    let out = resist(&[
        "zigzag",
        "--height",
        "2",
        "--segments",
        "8",
        "--delta",
        "0.5",
    ]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(
        err.contains("slope gap") || err.contains("descent"),
        "{err}"
    );
}

#[test]
fn flat_top_body_resists_exactly_one() {
    let dir = tmpdir("flat");
    let body = dir.join("flat_top.json");
    std::fs::write(
        &body,
        r#"{"height": 1.0, "symmetric": false, "elements": [
            {"type": "segment", "from": [-1.0, 1.0], "to": [1.0, 1.0]}
        ]}"#,
    )
    .unwrap();
    let out = resist(&["resist", "--body", body.to_str().unwrap()]);
    let v = stdout_json(&out);
    assert!((v["resistance"].as_f64().unwrap() - 1.0).abs() < 1e-10);
    assert!((v["three_dimensional"].as_f64().unwrap() - 2.0 * std::f64::consts::PI).abs() < 1e-9);
}

#[test]
fn chain_body_round_trips_and_matches_its_interval_identity() {
    let dir = tmpdir("chain");
    let body_path = dir.join("chain.json");
    let out = resist(&[
        "chain",
        "--height",
        "0.2",
        "--out",
        body_path.to_str().unwrap(),
    ]);
    let v = stdout_json(&out);
    let first = v["first_node"].as_f64().unwrap();
    let last = v["last_node"].as_f64().unwrap();
    let closed = v["interval_integral_closed_form"].as_f64().unwrap();
    assert_eq!(first, 4.0 * 0.2 / 3.0);
    // the emitted body re-loads through the validating constructor
    let body = minres::billiard::Body2D::from_json_file(&body_path).unwrap();
    assert!(body.is_symmetric());
    // and its interval integral reproduces the closed form
    let out = resist(&[
        "resist",
        "--body",
        body_path.to_str().unwrap(),
        "--from",
        &format!("{first}"),
        "--to",
        &format!("{last}"),
        "--panels",
        "512",
    ]);
    let v = stdout_json(&out);
    let r = v["resistance"].as_f64().unwrap();
    assert!((r - closed).abs() < 1e-6, "interval {r} vs closed {closed}");
}

#[test]
fn zigzag_body_round_trips_with_cell_audit() {
    let dir = tmpdir("zig");
    let body_path = dir.join("zig.json");
    let cells_path = dir.join("cells.json");
    let out = resist(&[
        "zigzag",
        "--height",
        "2",
        "--segments",
        "8",
        "--delta",
        "0.05",
        "--out",
        body_path.to_str().unwrap(),
        "--cells",
        cells_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(minres::billiard::Body2D::from_json_file(&body_path).is_ok());
    let cells: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&cells_path).unwrap()).unwrap();
    let arr = cells.as_array().unwrap();
    assert_eq!(arr.len(), 8);
    for c in arr {
        assert!(c["p_delta"].is_array());
        assert!(c["crossover_x"].is_number());
    }
}

#[test]
fn compare_table_has_ordering_and_blank_single_impact_below_threshold() {
    let out = resist(&["compare", "--heights", "0.3,1,1000"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout).to_string();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "h,R_nc,R_si,R_N,x0_nc,x0_si,x0_N,ratio_R_nc_N,ratio_x0_si_N"
    );
    let rows: Vec<Vec<String>> = lines
        .map(|l| l.split(',').map(|c| c.to_string()).collect())
        .collect();
    // below the threshold the single-impact columns are blank
    assert!(rows[0][2].is_empty() && rows[0][5].is_empty() && rows[0][8].is_empty());
    for row in &rows {
        let r_nc: f64 = row[1].parse().unwrap();
        let r_n: f64 = row[3].parse().unwrap();
        assert!(r_nc <= r_n);
        if !row[2].is_empty() {
            let r_si: f64 = row[2].parse().unwrap();
            assert!(r_nc <= r_si && r_si <= r_n);
        }
    }
    // tall-body ratios
    let tall = &rows[2];
    let ratio_r: f64 = tall[7].parse().unwrap();
    assert!((0.24..=0.26).contains(&ratio_r));
    let ratio_x: f64 = tall[8].parse().unwrap();
    assert!((2.45..=2.60).contains(&ratio_x));
}

#[test]
fn identical_invocations_are_byte_identical() {
    let dir = tmpdir("idem");
    let a = dir.join("a");
    let b = dir.join("b");
    for base in [&a, &b] {
        let out = resist(&[
            "solve",
            "--case",
            "nonconvex",
            "--height",
            "2",
            "--out",
            base.to_str().unwrap(),
        ]);
        assert!(out.status.success());
    }
    let read = |p: &Path, ext: &str| std::fs::read(p.with_extension(ext)).unwrap();
    assert_eq!(read(&a, "csv"), read(&b, "csv"));
    assert_eq!(read(&a, "json"), read(&b, "json"));
}

#[test]
fn worker_count_does_not_change_bytes() {
    let dir = tmpdir("threads");
    let body_path = dir.join("zig.json");
    let out = resist(&[
        "zigzag",
        "--height",
        "2",
        "--segments",
        "8",
        "--delta",
        "0.05",
        "--out",
        body_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let run = |threads: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_resist"))
            .args(["resist", "--body", body_path.to_str().unwrap()])
            .env("RESIST_THREADS", threads)
            .output()
            .unwrap();
        assert!(out.status.success());
        out.stdout
    };
    assert_eq!(run("1"), run("4"));
}

#[test]
fn trace_csv_shape_and_custom_kernel_path() {
    let dir = tmpdir("trace");
    let body_path = dir.join("tri.json");
    std::fs::write(
        &body_path,
        r#"{"height": 1.0, "symmetric": true, "elements": [
            {"type": "segment", "from": [0.0, 1.0], "to": [1.0, 0.0]}
        ]}"#,
    )
    .unwrap();
    let out = resist(&[
        "trace",
        "--body",
        body_path.to_str().unwrap(),
        "--samples",
        "16",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout).to_string();
    assert!(text.starts_with("x,vx,vz,bounces,status\n"));
    assert_eq!(text.lines().count(), 17);

    // custom kernel file drives the generic solver
    let kernel_path = dir.join("kernel.json");
    std::fs::write(
        &kernel_path,
        r#"{"samples": [[0.0, 2.0], [0.5, 1.6], [1.0, 1.0], [2.0, 0.4], [4.0, 0.1176], [8.0, 0.0307], [16.0, 0.0078], [32.0, 0.00195], [64.0, 0.000488]], "tail_c": 2.0, "tail_alpha": 2.0}"#,
    )
    .unwrap();
    let case = format!("custom:{}", kernel_path.display());
    let out = resist(&["solve", "--case", &case, "--height", "1"]);
    let v = stdout_json(&out);
    assert_eq!(v["kernel"], "custom");
    assert!(v["resistance"].as_f64().unwrap() > 0.0);
    let out = resist(&["kernel", "--case", &case]);
    let v = stdout_json(&out);
    assert!(v["xi0"].as_f64().unwrap() > 0.0);
}
