use std::path::Path;
use std::process::{Command, Output};

fn halfint(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_halfint"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn coeffs_table() {
    let o = halfint(&["coeffs", "eta(8z)^3", "30"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "n,re,im,normalized_re,normalized_im");
    assert!(lines[1].starts_with("1,1.0,0.0,"));
    assert!(lines[2].starts_with("9,-3.0,0.0,"));
    assert!(lines[3].starts_with("25,5.0,0.0,"));
    assert_eq!(lines.len(), 4);
}

#[test]
fn usage_errors_exit_one() {
    for args in [
        vec!["coeffs", "eta(8z", "30"],
        vec!["coeffs", "eta(8z)^3"],
        vec!["frobnicate"],
        vec!["verify", "nonsense"],
        vec!["lvalue", "8^3", "--s", "1+"],
        vec!["scan", "--q-min", "11", "--q-max", "50", "--budget", "10"],
    ] {
        let o = halfint(&args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
    }
}

#[test]
fn help_exits_zero() {
    assert_eq!(halfint(&["--help"]).status.code(), Some(0));
}

#[test]
fn lvalue_matches_direct_series() {
    let o = halfint(&["lvalue", "eta(8z)^3", "--s", "3", "--q", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    let diff: f64 = row[12].parse().unwrap();
    assert!(diff < 1e-8, "{diff}");
}

#[test]
fn scan_is_deterministic_and_records_the_seed() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, threads: &str| {
        let path = dir.path().join(name);
        let o = halfint(&[
            "scan",
            "--q-min",
            "11",
            "--q-max",
            "41",
            "--sample",
            "4",
            "--seed",
            "9",
            "--threads",
            threads,
            "--out",
            path.to_str().unwrap(),
            "--summary",
            dir.path().join(format!("{name}.json")).to_str().unwrap(),
        ]);
        assert_eq!(
            o.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&o.stderr)
        );
        std::fs::read(path).unwrap()
    };
    let a = run("a.csv", "1");
    let b = run("b.csv", "3");
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert!(text.lines().skip(1).all(|l| l.ends_with(",ok,9")));
    let summary: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("a.csv.json")).unwrap()).unwrap();
    assert_eq!(summary["seed"], 9);
    assert!(summary["fitted_exponent"].is_f64());
}

#[test]
fn scan_empty_range_and_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.json");
    std::fs::write(&cfg, r#"{"q_min": 50, "q_max": 40}"#).unwrap();
    let o = halfint(&["scan", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        stdout(&o),
        "Q,chi_index,re,im,abs,truncation_error,status,seed\n"
    );
    // flags override the file
    let o = halfint(&["scan", "--config", cfg.to_str().unwrap(), "--q-min", "37"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 1 + 35);
    std::fs::write(&cfg, r#"{"q_min": "x"}"#).unwrap();
    assert_eq!(
        halfint(&["scan", "--config", cfg.to_str().unwrap()])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn scan_precision_failures_exit_two() {
    let o = halfint(&["scan", "--q-min", "29", "--q-max", "31", "--budget", "600"]);
    assert_eq!(o.status.code(), Some(2));
    let text = stdout(&o);
    assert!(text.lines().skip(1).any(|l| !l.contains(",ok,")));
}

#[test]
fn cache_directory_is_populated_and_reused() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    let args = [
        "--cache-dir",
        cache.to_str().unwrap(),
        "coeffs",
        "8^3",
        "400",
    ];
    let first = halfint(&args);
    let second = halfint(&args);
    assert_eq!(first.stdout, second.stdout);
    let names: Vec<String> = std::fs::read_dir(&cache)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    assert!(names.iter().any(|n| n.ends_with(".csv")));
    assert!(names.iter().any(|n| n.ends_with(".sha256")));
    assert!(!names
        .iter()
        .any(|n| n.ends_with(".tmp") || n.ends_with(".part")));
}

#[test]
fn verify_identities_passes() {
    let o = halfint(&["verify", "identities"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let text = stdout(&o);
    assert!(text.starts_with("suite,check,residual,tolerance,status,detail\n"));
    assert!(text.lines().skip(1).all(|l| l.contains(",pass,")));
}

#[test]
fn pass_through_commands_run() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.csv");
    for args in [
        vec!["mfun", "--s", "2+2i", "--t", "1", "--delta", "0.01"],
        vec![
            "geom-check",
            "--k",
            "0.5,1.5",
            "--h",
            "-2,3",
            "--rho",
            "0.4",
        ],
        vec![
            "amplify",
            "eta(8z)^3",
            "--q",
            "11",
            "--chi",
            "1",
            "--x",
            "200",
            "--l",
            "3",
        ],
        vec![
            "shifted", "8^3", "--s", "2.5", "--w", "2.2", "--q", "11", "--m2-max", "300",
            "--h-max", "100",
        ],
        vec!["selberg", "--t", "3", "--points", "5"],
    ] {
        let mut a = args.clone();
        a.extend(["--out", out.to_str().unwrap()]);
        let o = halfint(&a);
        assert_eq!(
            o.status.code(),
            Some(0),
            "{args:?}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
        assert!(Path::new(&out).exists());
        let text = std::fs::read_to_string(&out).unwrap();
        assert!(text.lines().count() >= 2, "{args:?}");
    }
}
