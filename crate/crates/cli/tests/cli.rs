use std::path::PathBuf;
use std::process::{Command, Output};

fn oversight(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_oversight")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/golden")
}

#[test]
fn simulate_is_deterministic() {
    let a = oversight(&["simulate", "--videos", "100", "--seed", "1"]);
    let b = oversight(&["simulate", "--videos", "100", "--seed", "1"]);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    assert!(text.contains("all\t500/500"), "{text}");
    let c = oversight(&["simulate", "--videos", "100", "--seed", "2"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn scale_reports_bon_caption_cost() {
    let o = oversight(&["scale", "--mode", "bon_caption", "--n", "8"]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("mode=bon_caption N=8 generation=8 reward=8\n"));
}

#[test]
fn scale_json_matches_formula_for_every_mode() {
    for mode in ["bon_caption", "bon_revision", "bon_crit_then_rev", "bon_crit_based_rev", "bon_critique", "iter_revision", "iter_crit_then_rev", "iter_crit_based_rev"] {
        let o = oversight(&["scale", "--mode", mode, "--n", "3", "--json"]);
        assert!(o.status.success(), "{mode}: {}", String::from_utf8_lossy(&o.stderr));
        let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        assert_eq!(v["transcript"].as_array().unwrap().len() as u64, v["cost"]["breakdown"].as_array().unwrap().iter().map(|p| p[1].as_u64().unwrap()).sum::<u64>());
    }
}

#[test]
fn unknown_flag_prints_usage_and_fails() {
    let o = oversight(&["simulate", "--no-such-flag"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage:"));
    let o = oversight(&["frobnicate"]);
    assert!(!o.status.success());
}

#[test]
fn render_prompt_matches_golden_bytes() {
    let dir = golden_dir();
    for id in ["G-CAMR-01", "G-SUBJ-01", "G-SCEN-01"] {
        let ctx: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.join(format!("{id}.context.json"))).unwrap()).unwrap();
        let labels = dir.join(format!("{id}.labels.jsonl"));
        let o = oversight(&["render-prompt", "--aspect", ctx["aspect"].as_str().unwrap(), "--labels", labels.to_str().unwrap()]);
        assert!(o.status.success(), "{id}: {}", String::from_utf8_lossy(&o.stderr));
        assert_eq!(o.stdout, std::fs::read(dir.join(format!("{id}.prompt.txt"))).unwrap(), "{id}");
    }
}

#[test]
fn eval_reward_prints_accuracy_table() {
    let o = oversight(&["eval", "--task", "reward", "--videos", "10", "--seed", "3"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let row = text.lines().find(|l| l.starts_with("reward\t")).expect("reward row");
    let avg: f64 = row.rsplit('\t').next().unwrap().parse().unwrap();
    assert!((0.0..=1.0).contains(&avg));
}

#[test]
fn ingest_loop_stats_and_export_through_a_store() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("store");
    let data = data.to_str().unwrap();
    let labels = golden_dir().join("G-CAMR-01.labels.jsonl");
    let o = oversight(&["ingest", "--data-dir", data, "--labels", labels.to_str().unwrap()]);
    assert!(o.status.success());
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["ingested"], 1);
    // same file again is a duplicate
    let o = oversight(&["ingest", "--data-dir", data, "--labels", labels.to_str().unwrap()]);
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["duplicates"], 1);

    let line = std::fs::read_to_string(&labels).unwrap();
    let video = serde_json::from_str::<serde_json::Value>(line.lines().next().unwrap()).unwrap()["video_id"].as_str().unwrap().to_string();
    let item = format!("{video}/camera");
    let o = oversight(&["loop", "--data-dir", data, "--item", &item, "--critique", oversight_core::NO_EDIT_CRITIQUE, "--score", "5", "--submit"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).starts_with("state\tSubmitted\n"));

    let o = oversight(&["stats", "--data-dir", data, "--json"]);
    let stats: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(stats["items"], 5);

    let out = tmp.path().join("export");
    let o = oversight(&["export", "--data-dir", data, "--out-dir", out.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(out.join("sft.jsonl").exists() && out.join("preferences.jsonl").exists());

    let o = oversight(&["compact", "--data-dir", data]);
    assert!(o.status.success());
    let o = oversight(&["stats", "--data-dir", data, "--json"]);
    let again: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(stats, again);
}

#[test]
fn simulate_then_degrade_then_export() {
    let tmp = tempfile::tempdir().unwrap();
    let t = tmp.path().join("t.jsonl");
    let d = tmp.path().join("d.jsonl");
    assert!(oversight(&["simulate", "--videos", "10", "--seed", "4", "--triplets", t.to_str().unwrap()]).status.success());
    let o = oversight(&["degrade", "--input", t.to_str().unwrap(), "--kind", "replacement", "--out", d.to_str().unwrap()]);
    assert!(o.status.success());
    let rows = std::fs::read_to_string(&d).unwrap();
    assert!(rows.lines().all(|l| l.contains("\"kind\":\"replacement\"")));
    let out = tmp.path().join("x");
    let o = oversight(&["export", "--input", t.to_str().unwrap(), "--degraded", d.to_str().unwrap(), "--out-dir", out.to_str().unwrap()]);
    let summary: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(summary["triplets"], 50);
    assert!(summary["preference_pairs"].as_u64().unwrap() > 0);
}
