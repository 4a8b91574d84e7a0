//! End-to-end tests of the `gridplan` binary: exit codes, file round trips
//! and output determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
}

fn gridplan(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gridplan"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn validate_accepts_the_star_instance() {
    let out = gridplan(&[
        "validate",
        "--network",
        data("star.json").to_str().unwrap(),
        "--request",
        data("request.json").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{out:?}");
    assert!(stdout(&out).starts_with("ok: 3 demands"));
}

#[test]
fn validate_rejects_malformed_json_with_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"sites\": [{\"id\": \"a\", \"bogus\": 1}]}").unwrap();
    let out = gridplan(&[
        "validate",
        "--network",
        bad.to_str().unwrap(),
        "--request",
        data("request.json").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 1);
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("bogus"), "message names the field: {err}");
}

#[test]
fn plan_schedule_round_trips_through_gantt_and_replay() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("schedule.csv");
    let out = gridplan(&[
        "plan",
        "--network",
        data("star.json").to_str().unwrap(),
        "--request",
        data("request.json").to_str().unwrap(),
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{out:?}");
    let report = String::from_utf8(out.stderr).unwrap();
    assert!(report.contains("\"proven_optimal\": true"), "{report}");

    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("demand,link,from,to,start,end\n"), "{text}");

    let chart = gridplan(&[
        "gantt",
        "--network",
        data("star.json").to_str().unwrap(),
        "--schedule",
        csv.to_str().unwrap(),
        "--request",
        data("request.json").to_str().unwrap(),
        "--ascii",
    ]);
    assert_eq!(code(&chart), 0, "{chart:?}");
    assert!(stdout(&chart).contains("link l1"));

    // SVG output is byte-identical across runs
    let net = data("star.json");
    let svg_args = [
        "gantt",
        "--network",
        net.to_str().unwrap(),
        "--schedule",
        csv.to_str().unwrap(),
    ];
    assert_eq!(gridplan(&svg_args).stdout, gridplan(&svg_args).stdout);
}

#[test]
fn gantt_refuses_a_corrupt_schedule() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("broken.csv");
    // two transfers overlap on l1
    std::fs::write(
        &csv,
        "demand,link,from,to,start,end\nalpha,l1,s1,dest,0,1\nbeta,l1,s1,dest,0,2\n",
    )
    .unwrap();
    let out = gridplan(&[
        "gantt",
        "--network",
        data("star.json").to_str().unwrap(),
        "--schedule",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8(out.stderr).unwrap().contains("replay"));
}

#[test]
fn p2p_with_transit_is_rejected() {
    let out = gridplan(&[
        "plan",
        "--network",
        data("star.json").to_str().unwrap(),
        "--request",
        data("request.json").to_str().unwrap(),
        "--method",
        "p2p",
        "--transit",
    ]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8(out.stderr)
        .unwrap()
        .contains("direct connections"));
}

#[test]
fn infeasible_direct_instance_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let req = dir.path().join("req.json");
    // s3 has a link, but funnel demands need transit in direct mode
    std::fs::write(
        &req,
        r#"{"destination": "s4", "demands": [{"name": "f", "size": 1, "origins": ["s1"]}]}"#,
    )
    .unwrap();
    let out = gridplan(&[
        "plan",
        "--network",
        data("funnel.json").to_str().unwrap(),
        "--request",
        req.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2, "{out:?}");
}

#[test]
fn exhausted_budget_without_incumbent_exits_3() {
    let out = gridplan(&[
        "plan",
        "--network",
        data("star.json").to_str().unwrap(),
        "--request",
        data("request.json").to_str().unwrap(),
        "--budget-ms",
        "0",
    ]);
    assert_eq!(code(&out), 3, "{out:?}");
}

#[test]
fn funnel_with_storage_plans_through_the_bottleneck() {
    let out = gridplan(&[
        "plan",
        "--network",
        data("funnel.json").to_str().unwrap(),
        "--request",
        data("funnel_request.json").to_str().unwrap(),
        "--transit",
        "--storage",
    ]);
    assert_eq!(code(&out), 0, "{out:?}");
    let report = String::from_utf8(out.stderr.clone()).unwrap();
    assert!(report.contains("\"makespan\": 4"), "{report}");
}

#[test]
fn simulate_is_deterministic_per_seed() {
    let args = |seed: &str| {
        vec![
            "simulate".to_string(),
            "--network".into(),
            data("star.json").to_str().unwrap().into(),
            "--request".into(),
            data("request.json").to_str().unwrap().into(),
            "--seed".into(),
            seed.into(),
        ]
    };
    let run = |seed: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_gridplan"))
            .args(args(seed))
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0));
        out.stdout
    };
    assert_eq!(run("7"), run("7"));
    let trace = String::from_utf8(run("7")).unwrap();
    assert!(trace.lines().any(|l| l.contains("pick=")), "{trace}");
}

#[test]
fn bench_emits_the_comparison_csv() {
    let out = gridplan(&[
        "bench",
        "--case",
        "shared",
        "--ns",
        "2,3",
        "--reps",
        "2",
        "--methods",
        "optimal,chunked:1,p2p",
    ]);
    assert_eq!(code(&out), 0, "{out:?}");
    let csv = stdout(&out);
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "method,case,n_files,seed_reps,median_wall_ms,median_makespan,loss_pct"
    );
    assert_eq!(lines.count(), 6); // 3 methods x 2 ns
    assert!(csv.contains("optimal,shared,2,0x2,"));
}
