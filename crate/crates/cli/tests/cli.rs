use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const HAMMING: &str = "7 3\n3 4\n1 1 2 1 2 2 3\n4 4 4\n1 0 0\n2 0 0\n1 2 0\n3 0 0\n1 3 0\n2 3 0\n1 2 3\n1 3 5 7\n2 3 6 7\n4 5 6 7\n";

fn liftcode(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_liftcode"))
        .args(args)
        .env_remove("LIFTCODE_WORKERS")
        .output()
        .expect("binary runs")
}

fn write(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, body).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout_json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

fn error_json(out: &Output) -> Value {
    let text = String::from_utf8_lossy(&out.stderr);
    let line = text.lines().last().unwrap();
    serde_json::from_str(line).unwrap()
}

#[test]
fn analyze_small_cycle() {
    let dir = TempDir::new().unwrap();
    let k22 = write(&dir, "k22.json", "[[1,1],[1,1]]");
    let doc = stdout_json(&liftcode(&[
        "analyze",
        "--code",
        s(&k22),
        "--max-weight",
        "2",
    ]));
    assert_eq!(doc["girth"], serde_json::json!({"finite": 4}));
    assert_eq!(
        doc["stopping"]["counts"],
        serde_json::json!([[0, 1], [1, 0], [2, 1]])
    );
    assert_eq!(doc["stopping"]["exhaustive"], true);
    assert_eq!(doc["stopping_distance"], serde_json::json!({"exactly": 2}));
    assert!(doc["provenance"]["config_sha256"].as_str().unwrap().len() == 64);
}

#[test]
fn construct_without_stages_returns_the_protograph() {
    let dir = TempDir::new().unwrap();
    let proto = write(&dir, "p.json", "[[1,1],[1,1]]");
    let art = dir.path().join("a.json");
    let out = liftcode(&[
        "construct",
        "--proto",
        s(&proto),
        "--stages",
        "0",
        "--seed",
        "9",
        "--out",
        s(&art),
    ]);
    assert!(out.status.success());
    let doc: Value = serde_json::from_str(&fs::read_to_string(&art).unwrap()).unwrap();
    assert_eq!(
        doc["final_graph"]["edges"],
        serde_json::json!([[0, 0], [1, 0], [0, 1], [1, 1]])
    );
    assert_eq!(doc["provenance"]["seed"], 9);
    assert_eq!(doc["seed"], 9);
    assert!(dir.path().join("a.json.run.json").exists());

    // the artifact is itself a valid code input
    let again = stdout_json(&liftcode(&[
        "analyze",
        "--code",
        s(&art),
        "--max-weight",
        "2",
    ]));
    assert_eq!(again["description"]["two_lift_bits"], 0);
}

#[test]
fn construct_is_reproducible_across_worker_counts() {
    let dir = TempDir::new().unwrap();
    let proto = write(&dir, "p.json", "[[3,3]]");
    let run = |workers: &str| {
        let out = liftcode(&[
            "construct",
            "--proto",
            s(&proto),
            "--stages",
            "3",
            "--trials",
            "8",
            "--seed",
            "4",
            "--workers",
            workers,
        ]);
        assert!(out.status.success());
        out.stdout
    };
    let one = run("1");
    assert_eq!(one, run("3"));
    let doc: Value = serde_json::from_slice(&one).unwrap();
    assert_eq!(doc["final_graph"]["num_vars"], 16);
    assert_eq!(doc["spec"]["stages"].as_array().unwrap().len(), 3);
}

#[test]
fn simulate_at_zero_erasure() {
    let dir = TempDir::new().unwrap();
    let k22 = write(&dir, "k22.json", "[[1,1],[1,1]]");
    let out = liftcode(&[
        "simulate",
        "--code",
        s(&k22),
        "--eps",
        "0",
        "--frames",
        "500",
        "--seed",
        "1",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("# liftcode simulate seed=1 config_sha256="));
    assert_eq!(
        lines[1],
        "epsilon,frames,frame_errors,fer,stderr_fer,bit_errors,ber"
    );
    assert_eq!(lines[2], "0,500,0,0,0,0,0");
}

#[test]
fn simulate_json_embeds_seed() {
    let dir = TempDir::new().unwrap();
    let k22 = write(&dir, "k22.json", "[[1,1],[1,1]]");
    let doc = stdout_json(&liftcode(&[
        "simulate",
        "--code",
        s(&k22),
        "--eps",
        "0.5",
        "--frames",
        "2000",
        "--seed",
        "8",
        "--format",
        "json",
    ]));
    assert_eq!(doc["provenance"]["seed"], 8);
    let fer = doc["points"][0]["fer"].as_f64().unwrap();
    assert!((fer - 0.25).abs() < 0.05);
}

#[test]
fn alist_round_trip_is_byte_identical() {
    let dir = TempDir::new().unwrap();
    let alist = write(&dir, "h.alist", HAMMING);
    let json = dir.path().join("h.json");
    assert!(liftcode(&[
        "export",
        "--in",
        s(&alist),
        "--format",
        "json",
        "--out",
        s(&json)
    ])
    .status
    .success());
    let back = liftcode(&["export", "--in", s(&json), "--format", "alist"]);
    assert!(back.status.success());
    assert_eq!(String::from_utf8(back.stdout).unwrap(), HAMMING);
}

#[test]
fn compare_two_codes() {
    let dir = TempDir::new().unwrap();
    let a = write(&dir, "a.json", "[[1,1],[1,1]]");
    let b = write(&dir, "b.json", "[[1,1,0],[0,1,1]]");
    let doc = stdout_json(&liftcode(&[
        "compare",
        "--a",
        s(&a),
        "--b",
        s(&b),
        "--eps",
        "0.3",
        "--frames",
        "1000",
        "--max-weight",
        "3",
    ]));
    assert_eq!(doc["a"]["num_vars"], 2);
    assert_eq!(doc["b"]["num_vars"], 3);
    assert_eq!(doc["curves"].as_array().unwrap().len(), 1);

    let csv = liftcode(&[
        "compare",
        "--a",
        s(&a),
        "--b",
        s(&b),
        "--eps",
        "0.3",
        "--frames",
        "100",
        "--format",
        "csv",
    ]);
    let text = String::from_utf8(csv.stdout).unwrap();
    assert_eq!(
        text.lines().nth(1),
        Some("epsilon,fer_a,stderr_fer_a,fer_b,stderr_fer_b")
    );
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = TempDir::new().unwrap();
    let proto = write(&dir, "p.json", "[[1,1],[1,1]]");
    let cfg = write(
        &dir,
        "run.toml",
        "seed = 5\nstages = 1\ntrials = \"all\"\n\n[criteria]\npriority = [\"girth\"]\n",
    );
    let from_file = stdout_json(&liftcode(&[
        "construct",
        "--proto",
        s(&proto),
        "--config",
        s(&cfg),
    ]));
    assert_eq!(from_file["seed"], 5);
    assert_eq!(from_file["trials"], "all");
    assert_eq!(
        from_file["criteria"]["priority"],
        serde_json::json!(["girth"])
    );
    assert_eq!(
        from_file["metrics"][1]["girth"],
        serde_json::json!({"finite": 8})
    );

    let flagged = stdout_json(&liftcode(&[
        "construct",
        "--proto",
        s(&proto),
        "--config",
        s(&cfg),
        "--seed",
        "7",
    ]));
    assert_eq!(flagged["seed"], 7);
    assert_eq!(flagged["provenance"]["config"]["seed"], 7);
    assert_ne!(
        flagged["provenance"]["config_sha256"],
        from_file["provenance"]["config_sha256"]
    );

    let bad = write(&dir, "bad.toml", "sead = 1\n");
    let out = liftcode(&[
        "construct",
        "--proto",
        s(&proto),
        "--config",
        s(&bad),
        "--json-errors",
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(error_json(&out)["error"]["kind"], "parse");
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let k22 = write(&dir, "k22.json", "[[1,1],[1,1]]");
    let garbage = write(
        &dir,
        "bad.json",
        "{\"format\": \"tanner-graph\", \"num_vars\": ",
    );
    let parallel = write(&dir, "par.json", "[[2,1]]");

    let out = liftcode(&["analyze", "--code", s(&garbage), "--json-errors"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(error_json(&out)["error"]["exit_code"], 3);

    let out = liftcode(&[
        "construct",
        "--proto",
        s(&k22),
        "--require-proto",
        "--json-errors",
    ]);
    assert_eq!(out.status.code(), Some(4));
    let err = error_json(&out);
    assert_eq!(err["error"]["kind"], "criteria_rejected");
    assert_eq!(err["error"]["verdict"]["girth"]["status"], "fail");

    let big = write(
        &dir,
        "big.json",
        &serde_json::to_string(&vec![vec![1; 12]; 6]).unwrap(),
    );
    let out = liftcode(&[
        "analyze",
        "--code",
        s(&big),
        "--max-weight",
        "8",
        "--budget",
        "5",
    ]);
    assert_eq!(out.status.code(), Some(5));
    let partial: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(partial["stopping"]["exhaustive"], false);

    let out = liftcode(&["analyze", "--code", s(&dir.path().join("missing.json"))]);
    assert_eq!(out.status.code(), Some(6));

    let out = liftcode(&[
        "export",
        "--in",
        s(&parallel),
        "--format",
        "alist",
        "--json-errors",
    ]);
    assert_eq!(out.status.code(), Some(7));
    assert_eq!(error_json(&out)["error"]["kind"], "invalid");

    let out = liftcode(&["simulate", "--code", s(&k22), "--eps", "1.5"]);
    assert_eq!(out.status.code(), Some(7));

    let out = liftcode(&["frobnicate", "--json-errors"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_json(&out)["error"]["kind"], "usage");
}

#[test]
fn workers_from_environment() {
    let dir = TempDir::new().unwrap();
    let k22 = write(&dir, "k22.json", "[[1,1],[1,1]]");
    let run = |workers: &str| {
        Command::new(env!("CARGO_BIN_EXE_liftcode"))
            .args([
                "simulate",
                "--code",
                s(&k22),
                "--eps",
                "0.4",
                "--frames",
                "3000",
                "--seed",
                "2",
            ])
            .env("LIFTCODE_WORKERS", workers)
            .output()
            .unwrap()
    };
    let (a, b) = (run("1"), run("4"));
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(run("0").status.code(), Some(7));
}
