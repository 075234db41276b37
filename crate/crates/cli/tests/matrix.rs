use std::path::Path;
use std::process::Command;

use adacons_cli::report::{COMPARISON_HEADER, SUMMARY_HEADER, TRACE_HEADER};
use adacons_cli::{parse_config, run_matrix};

fn args(out: &Path, extra: &[&str]) -> Vec<String> {
    let mut v: Vec<String> = extra.iter().map(|s| s.to_string()).collect();
    for (flag, default) in [
        ("--dim", "24"),
        ("--iters", "15"),
        ("--workers", "4"),
        ("--effective-batch", "32"),
    ] {
        if !extra.contains(&flag) {
            v.push(flag.into());
            v.push(default.into());
        }
    }
    v.push("--out-dir".into());
    v.push(out.display().to_string());
    v
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

#[test]
fn writes_traces_summary_and_comparison() {
    let dir = tempfile::tempdir().unwrap();
    let matrix = parse_config(args(dir.path(), &["--seeds", "1..2"]), None).unwrap();
    let outcome = run_matrix(&matrix).unwrap();
    assert_eq!(outcome.exit_code(), 0);
    // sum and adacons for two seeds, plus summary and comparison
    assert_eq!(outcome.written.len(), 6);

    let (header, rows) = read_csv(&dir.path().join("adacons_N4_EBS32_seed2.csv"));
    assert_eq!(header, TRACE_HEADER);
    assert_eq!(rows.len(), 15);
    assert_eq!(rows[0][0], "1");
    // AdaCons moves 2d all-reduce and N all-gather elements per iteration
    assert!(rows.iter().all(|r| r[10] == "48" && r[11] == "4"));
    // stats are off by default
    assert!(rows.iter().all(|r| r[2].is_empty()));
    assert!(rows.iter().all(|r| !r[8].is_empty()));

    let (header, rows) = read_csv(&dir.path().join("sum_N4_EBS32_seed1.csv"));
    assert_eq!(header, TRACE_HEADER);
    assert!(rows
        .iter()
        .all(|r| r[10] == "24" && r[11] == "0" && r[8].is_empty()));

    let (header, rows) = read_csv(&dir.path().join("summary.csv"));
    assert_eq!(header, SUMMARY_HEADER);
    assert_eq!(rows.len(), 4);

    let (header, rows) = read_csv(&dir.path().join("comparison.csv"));
    assert_eq!(header, COMPARISON_HEADER);
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0][0], "sum");
    assert_eq!(rows[0][6], "1");
    assert!(rows[1][6].parse::<f64>().unwrap() > 0.0);
}

#[test]
fn coefficient_stats_are_opt_in() {
    let dir = tempfile::tempdir().unwrap();
    let matrix = parse_config(
        args(dir.path(), &["--aggregator", "adacons", "--coeff-stats"]),
        None,
    )
    .unwrap();
    run_matrix(&matrix).unwrap();
    let (_, rows) = read_csv(&dir.path().join("adacons_N4_EBS32_seed0.csv"));
    for r in &rows {
        let mean_norm: f64 = r[6].parse().unwrap();
        if r[9] == "0" {
            assert!((mean_norm - 0.25).abs() < 1e-9);
        }
        assert!(r[2].parse::<f64>().is_ok() && r[4].parse::<f64>().is_ok());
    }
}

#[test]
fn untimed_reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let m = parse_config(args(dir.path(), &["--no-timing", "--ablation"]), None).unwrap();
        run_matrix(&m).unwrap();
    }
    let mut names: Vec<_> = std::fs::read_dir(a.path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    assert_eq!(names.len(), 7);
    for name in names {
        let x = std::fs::read(a.path().join(&name)).unwrap();
        let y = std::fs::read(b.path().join(&name)).unwrap();
        assert_eq!(x, y, "{name:?}");
    }
}

#[test]
fn parallel_jobs_match_sequential() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let m = parse_config(args(a.path(), &["--no-timing", "--seeds", "0..3"]), None).unwrap();
    run_matrix(&m).unwrap();
    let m = parse_config(
        args(b.path(), &["--no-timing", "--seeds", "0..3", "--jobs", "3"]),
        None,
    )
    .unwrap();
    run_matrix(&m).unwrap();
    for name in ["summary.csv", "adacons_N4_EBS32_seed3.csv"] {
        assert_eq!(
            std::fs::read(a.path().join(name)).unwrap(),
            std::fs::read(b.path().join(name)).unwrap()
        );
    }
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_adacons");
    let dir = tempfile::tempdir().unwrap();

    let ok = Command::new(bin)
        .args(args(dir.path(), &["--iters", "3"]))
        .output()
        .unwrap();
    assert_eq!(
        ok.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&ok.stderr)
    );
    assert!(String::from_utf8_lossy(&ok.stdout).contains("median_final"));

    let usage = Command::new(bin)
        .args(args(dir.path(), &["--effective-batch", "30"]))
        .output()
        .unwrap();
    assert_eq!(usage.status.code(), Some(1));

    let diverged = Command::new(bin)
        .args(args(
            dir.path(),
            &[
                "--step",
                "fixed:100",
                "--aggregator",
                "sum",
                "--iters",
                "400",
            ],
        ))
        .output()
        .unwrap();
    assert_eq!(diverged.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&diverged.stderr).contains("aborted"));
}

#[test]
fn environment_sets_output_directory() {
    let bin = env!("CARGO_BIN_EXE_adacons");
    let dir = tempfile::tempdir().unwrap();
    let status = Command::new(bin)
        .args([
            "--dim",
            "8",
            "--iters",
            "2",
            "--workers",
            "2",
            "--effective-batch",
            "4",
        ])
        .env("ADACONS_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(0));
    assert!(dir.path().join("summary.csv").exists());
}
