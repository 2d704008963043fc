use std::process::Command;

use clap::Parser;
use mgredist::cli::{run, Cli, Outcome, EXIT_CONFIG, EXIT_OK};
use serde_json::Value;

fn go(args: &[&str]) -> Outcome {
    let cli = Cli::try_parse_from(std::iter::once("mgredist").chain(args.iter().copied())).unwrap();
    run(&cli)
}

fn json(o: &Outcome) -> Value {
    serde_json::from_str(&o.output).unwrap()
}

const FIXTURE_PATHS: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/weak64x32.paths");

#[test]
fn plan_output_is_deterministic() {
    for fmt in ["json", "csv"] {
        let args = [
            "plan", "--proc", "64x32", "--local", "568x71", "--format", fmt,
        ];
        let (a, b) = (go(&args), go(&args));
        assert_eq!(a.code, EXIT_OK);
        assert_eq!(a.output, b.output);
    }
}

#[test]
fn plan_lists_the_wide_enumeration() {
    let o = go(&[
        "plan",
        "--proc",
        "16x8",
        "--grid",
        "9088x568",
        "--enumerate-depth",
        "3",
        "--format",
        "json",
    ]);
    let v = json(&o);
    assert_eq!(v["enumeration"]["grid"], serde_json::json!([1136, 71]));
    let rows: Vec<String> = v["enumeration"]["candidates"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| {
            format!(
                "{}x{} {}x{}",
                c["procs"][0], c["procs"][1], c["local"][0], c["local"][1]
            )
        })
        .collect();
    assert_eq!(
        rows,
        [
            "1x1 1136x71",
            "2x1 568x71",
            "4x1 284x71",
            "8x1 142x71",
            "16x1 71x71",
            "16x2 71x36",
            "16x4 71x18"
        ]
    );
}

#[test]
fn plan_feeds_paths() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("plan.json");
    let o = go(&[
        "plan", "--proc", "64x32", "--local", "568x71", "--format", "json",
    ]);
    std::fs::write(&file, &o.output).unwrap();
    let total = json(&o)["path"]["total"].as_f64().unwrap();
    let p = go(&[
        "paths",
        "--proc",
        "64x32",
        "--local",
        "568x71",
        "--format",
        "json",
        file.to_str().unwrap(),
    ]);
    assert_eq!(p.code, EXIT_OK, "{:?}", p.diagnostics);
    let rows = json(&p);
    let row = &rows["paths"][0];
    assert_eq!(row["total"].as_f64().unwrap(), total);
}

#[test]
fn paths_ranks_and_flags_fixture() {
    let o = go(&[
        "paths",
        "--proc",
        "64x32",
        "--local",
        "568x71",
        "--format",
        "json",
        FIXTURE_PATHS,
    ]);
    assert_eq!(o.code, EXIT_CONFIG);
    let v = json(&o);
    let rows = v["paths"].as_array().unwrap();
    assert_eq!(rows.len(), 9);
    let label = |r: &Value| r["label"].as_str().unwrap().to_string();
    let by_rank = |k: u64| {
        rows.iter()
            .find(|r| r["rank"].as_u64() == Some(k))
            .map(label)
    };
    assert_eq!(by_rank(1).as_deref(), Some("1"));
    assert_eq!(by_rank(9).as_deref(), Some("0"));
    let invalid: Vec<String> = rows
        .iter()
        .filter(|r| r["valid"] == false)
        .map(label)
        .collect();
    assert_eq!(invalid, ["3"]);
}

#[test]
fn solve_matches_and_reconciles() {
    let o = go(&[
        "solve", "--grid", "65x65", "--proc", "4x4", "--cycles", "4", "--format", "json",
    ]);
    assert_eq!(o.code, EXIT_OK, "{:?}", o.diagnostics);
    let v = json(&o);
    assert_eq!(v["max_rel_diff"].as_f64().unwrap(), 0.0);
    assert_eq!(v["reconciled"], true);
    assert!(v["factors"]
        .as_array()
        .unwrap()
        .iter()
        .all(|f| f.as_f64().unwrap() < 0.2));
}

#[test]
fn zero_rhs_solves_to_zero() {
    let o = go(&[
        "solve",
        "--grid",
        "33x33",
        "--proc",
        "2x2",
        "--cycles",
        "2",
        "--zero-rhs",
        "--format",
        "json",
    ]);
    assert_eq!(o.code, EXIT_OK);
    let v = json(&o);
    assert!(v["residuals"]
        .as_array()
        .unwrap()
        .iter()
        .all(|r| r.as_f64() == Some(0.0)));
}

#[test]
fn bad_configurations_exit_one() {
    for args in [
        vec!["plan", "--proc", "4x4"],
        vec![
            "plan", "--proc", "4x4", "--grid", "64x64", "--local", "16x16",
        ],
        vec![
            "plan", "--proc", "4x4", "--grid", "64x64", "--nu1", "0", "--nu2", "0",
        ],
        vec!["search-bench", "--grid", "64x64"],
        vec![
            "paths",
            "--proc",
            "4x4",
            "--grid",
            "64x64",
            "/nonexistent/paths",
        ],
    ] {
        assert_eq!(go(&args).code, EXIT_CONFIG, "{args:?}");
    }
}

#[test]
fn config_file_overrides_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"proc": "16x8", "grid": [9088, 568]}"#).unwrap();
    let a = go(&[
        "plan",
        "--proc",
        "2x2",
        "--grid",
        "64x64",
        "--config",
        cfg.to_str().unwrap(),
        "--format",
        "json",
    ]);
    let b = go(&[
        "plan", "--proc", "16x8", "--grid", "9088x568", "--format", "json",
    ]);
    assert_eq!(a.code, EXIT_OK, "{:?}", a.diagnostics);
    assert_eq!(json(&a)["path"], json(&b)["path"]);
    std::fs::write(&cfg, r#"{"prcs": "16x8"}"#).unwrap();
    assert_eq!(
        go(&["plan", "--grid", "64x64", "--config", cfg.to_str().unwrap()]).code,
        EXIT_CONFIG
    );
}

#[test]
fn search_bench_counts() {
    let o = go(&["search-bench", "--max-exp", "6", "--format", "json"]);
    assert_eq!(o.code, EXIT_OK);
    let v = json(&o);
    let rows = v["rows"].as_array().unwrap();
    for r in rows {
        assert_eq!(
            r["brute_nodes"].as_u64().unwrap(),
            r["ranks"].as_u64().unwrap()
        );
        assert_eq!(r["astar_cost"], r["brute_cost"]);
    }
}

#[test]
fn binary_writes_output_and_exit_codes() {
    let exe = env!("CARGO_BIN_EXE_mgredist");
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("plan.csv");
    let st = Command::new(exe)
        .args([
            "plan",
            "--proc",
            "8x8",
            "--grid",
            "1024x1024",
            "--format",
            "csv",
            "--out",
        ])
        .arg(&out)
        .status()
        .unwrap();
    assert!(st.success());
    assert!(std::fs::read_to_string(&out).unwrap().lines().count() > 1);
    let st = Command::new(exe)
        .args([
            "paths",
            "--proc",
            "64x32",
            "--local",
            "568x71",
            FIXTURE_PATHS,
        ])
        .output()
        .unwrap();
    assert_eq!(st.status.code(), Some(EXIT_CONFIG));
    assert!(String::from_utf8_lossy(&st.stdout).contains("64×16"));
}
