//! End-to-end command pipeline on miniature settings: synth -> train ->
//! generate -> render -> evaluate, plus idempotence and exit-code checks.

use layout_cli::cli_main;
use std::path::Path;

fn run(args: &[&str]) -> i32 {
    let mut argv = vec!["layoutgen"];
    argv.extend(args);
    cli_main(argv)
}

fn write(path: &Path, text: &str) {
    std::fs::write(path, text).unwrap();
}

#[test]
fn full_pipeline_runs_and_is_idempotent() {
    let dir = tempfile::tempdir().unwrap();
    let wd = dir.path().to_str().unwrap();
    write(
        &dir.path().join("tiny.conf"),
        "d_model = 16\nd_ff = 32\nheads = 2\nd_z = 4\ngen_layers = 1\nenc_layers = 1\n\
         epochs = 1\nbatch_size = 8\ngrammar_max_nodes = 8\n",
    );

    assert_eq!(
        run(&["--workdir", wd, "--config", "tiny.conf", "--seed", "3", "synth", "--n", "24", "--out", "corpus"]),
        0
    );
    assert!(dir.path().join("corpus/train.txt").exists());
    assert!(dir.path().join("corpus/s00000.layout.json").exists());

    assert_eq!(
        run(&["--workdir", wd, "--config", "tiny.conf", "--seed", "3", "train", "--corpus", "corpus", "--out", "run"]),
        0
    );
    assert!(dir.path().join("run/model.ckpt.json").exists());
    assert!(dir.path().join("run/metrics.ndjson").exists());

    // generation from a request file with explicit conditions
    write(
        &dir.path().join("request.json"),
        r#"{
            "task": "gent",
            "seed": 5,
            "decode": {"mode": "greedy"},
            "conditions": {"attributes": [
                {"type": "Text", "box": [null, null, null, null]},
                {"type": "Image", "box": [null, null, null, null]}
            ], "organizations": [[0, 1]]}
        }"#,
    );
    assert_eq!(
        run(&["--workdir", wd, "--config", "tiny.conf", "generate", "--model", "run/model.ckpt.json", "--request", "request.json", "--out", "gen"]),
        0
    );
    assert!(dir.path().join("gen/generated.layout.json").exists());
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("gen/report.json")).unwrap())
            .unwrap();
    assert_eq!(report["conditions"].as_array().unwrap().len(), 2);

    // deterministic: running the same generation again writes the same bytes
    let first = std::fs::read_to_string(dir.path().join("gen/generated.layout.json")).unwrap();
    assert_eq!(
        run(&["--workdir", wd, "--config", "tiny.conf", "generate", "--model", "run/model.ckpt.json", "--request", "request.json", "--out", "gen2"]),
        0
    );
    let second = std::fs::read_to_string(dir.path().join("gen2/generated.layout.json")).unwrap();
    assert_eq!(first, second);

    // render all three views deterministically
    for mode in ["visible", "levels", "overlay"] {
        let out = format!("view-{mode}.svg");
        assert_eq!(
            run(&["--workdir", wd, "--config", "tiny.conf", "render", "--input", "corpus/s00000.layout.json", "--out", &out, "--mode", mode]),
            0
        );
        let svg = std::fs::read_to_string(dir.path().join(&out)).unwrap();
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("viewBox"));
    }

    // evaluating a corpus against itself zeroes the distribution distances
    assert_eq!(
        run(&["--workdir", wd, "--config", "tiny.conf", "evaluate", "--pred", "corpus", "--ref", "corpus", "--out", "eval.json"]),
        0
    );
    let eval: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("eval.json")).unwrap())
            .unwrap();
    assert_eq!(eval["metrics"]["w_label"], 0.0);
    assert_eq!(eval["metrics"]["w_box"], 0.0);
    assert_eq!(eval["metrics"]["w_s_label"], 0.0);
    assert_eq!(eval["metrics"]["w_s_box"], 0.0);
    assert_eq!(eval["metrics"]["s_inclusion"], 1.0);

    // structure extraction and transfer round the pipeline off
    assert_eq!(
        run(&["--workdir", wd, "--config", "tiny.conf", "extract", "--model", "run/model.ckpt.json", "--input", "corpus/s00001.layout.json", "--out", "extr"]),
        0
    );
    assert_eq!(
        run(&["--workdir", wd, "--config", "tiny.conf", "transfer", "--model", "run/model.ckpt.json", "--reference", "corpus/s00002.layout.json", "--elements", "corpus/s00003.layout.json", "--out", "tran"]),
        0
    );
}

#[test]
fn roundtrip_check_reports_exact_recovery() {
    assert_eq!(run(&["roundtrip-check", "--n", "200", "--seed", "7"]), 0);
}

#[test]
fn exit_codes_follow_the_contract() {
    // usage: missing required argument
    assert_eq!(run(&["generate", "--task", "gent"]), 1);
    // usage: unknown task
    let dir = tempfile::tempdir().unwrap();
    let wd = dir.path().to_str().unwrap();
    // data: missing corpus directory
    assert_eq!(run(&["--workdir", wd, "evaluate", "--pred", "nope", "--ref", "nope"]), 2);
    // model: missing checkpoint
    assert_eq!(
        run(&["--workdir", wd, "generate", "--model", "nope.ckpt", "--task", "ugen", "--out", "g"]),
        3
    );
}

#[test]
fn ingest_reports_kept_and_dropped() {
    let dir = tempfile::tempdir().unwrap();
    let wd = dir.path().to_str().unwrap();
    std::fs::create_dir_all(dir.path().join("raw")).unwrap();
    write(
        &dir.path().join("raw/a.layout.json"),
        r#"{"canvas": [64, 64], "root": {"type": "LinearV", "box": [0, 0, 64, 64], "children": [
            {"type": "Text", "box": [2, 2, 20, 10]}
        ]}}"#,
    );
    write(
        &dir.path().join("raw/b.layout.json"),
        r#"{"canvas": [64, 64], "root": {"type": "Martian", "box": [0, 0, 64, 64]}}"#,
    );
    assert_eq!(run(&["--workdir", wd, "--json", "ingest", "--input", "raw", "--out", "corpus"]), 0);
    assert!(dir.path().join("corpus/t00000.layout.json").exists());
    assert!(dir.path().join("corpus/train.txt").exists());
}
