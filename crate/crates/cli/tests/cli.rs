use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tokenprune_core::tensor_io;
use tokenprune_core::TokenMatrix;

fn tokenprune(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tokenprune"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = tokenprune(dir, args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn json(text: &str) -> Value {
    serde_json::from_str(text).unwrap()
}

fn scene(dir: &Path) {
    ok(dir, &["synth", "--seed", "3", "--out-dir", "s"]);
}

fn error_of(out: &Output) -> Value {
    json(&String::from_utf8_lossy(&out.stderr))
}

#[test]
fn prune_with_queries_writes_result() {
    let dir = tempfile::tempdir().unwrap();
    scene(dir.path());
    let doc = json(&ok(
        dir.path(),
        &[
            "prune",
            "--tokens",
            "s/tokens.npy",
            "--queries",
            "s/queries.npy",
            "--n-target",
            "20",
        ],
    ));
    assert_eq!(doc["schema"], 1);
    assert_eq!(doc["n"], 160);
    assert_eq!(doc["retained"].as_array().unwrap().len(), 20);
    assert_eq!(doc["focal"].as_array().unwrap().len(), 8);
    assert_eq!(doc["query_absent"], false);
}

#[test]
fn no_query_is_flagged() {
    let dir = tempfile::tempdir().unwrap();
    scene(dir.path());
    let doc = json(&ok(
        dir.path(),
        &[
            "prune",
            "--tokens",
            "s/tokens.npy",
            "--no-query",
            "--n-target",
            "10",
        ],
    ));
    assert_eq!(doc["query_absent"], true);
    assert_eq!(doc["q"], 0);
}

#[test]
fn keep_ratio_rounds() {
    let dir = tempfile::tempdir().unwrap();
    scene(dir.path());
    let doc = json(&ok(
        dir.path(),
        &[
            "prune",
            "--tokens",
            "s/tokens.npy",
            "--no-query",
            "--keep-ratio",
            "0.333",
        ],
    ));
    // round(0.333 * 160) = round(53.28)
    assert_eq!(doc["n_target"], 53);
    assert_eq!(doc["retained"].as_array().unwrap().len(), 53);
}

#[test]
fn out_file_matches_stdout_shape() {
    let dir = tempfile::tempdir().unwrap();
    scene(dir.path());
    let stdout = ok(
        dir.path(),
        &[
            "prune",
            "--tokens",
            "s/tokens.npy",
            "--no-query",
            "--n-target",
            "12",
            "--out",
            "r.json",
        ],
    );
    assert!(stdout.is_empty());
    let doc = json(&fs::read_to_string(dir.path().join("r.json")).unwrap());
    assert_eq!(doc["retained"].as_array().unwrap().len(), 12);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    scene(dir.path());
    let p = dir.path();

    let out = tokenprune(
        p,
        &[
            "prune",
            "--tokens",
            "s/tokens.npy",
            "--no-query",
            "--n-target",
            "0",
        ],
    );
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_of(&out)["exit"], 2);

    let out = tokenprune(
        p,
        &[
            "prune",
            "--tokens",
            "s/tokens.npy",
            "--no-query",
            "--n-target",
            "161",
        ],
    );
    assert_eq!(out.status.code(), Some(2));

    let out = tokenprune(
        p,
        &[
            "prune",
            "--tokens",
            "missing.npy",
            "--no-query",
            "--n-target",
            "4",
        ],
    );
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(error_of(&out)["error"], "IoFailure");

    fs::write(p.join("junk.npy"), b"not an array").unwrap();
    let out = tokenprune(
        p,
        &[
            "prune",
            "--tokens",
            "junk.npy",
            "--no-query",
            "--n-target",
            "4",
        ],
    );
    assert_eq!(out.status.code(), Some(2));

    let out = tokenprune(
        p,
        &[
            "prune",
            "--tokens",
            "s/tokens.npy",
            "--no-query",
            "--n-target",
            "4",
            "--keep-ratio",
            "0.5",
        ],
    );
    assert_eq!(out.status.code(), Some(2));

    let out = tokenprune(p, &["prune", "--tokens", "s/tokens.npy", "--n-target", "4"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn query_dimension_mismatch_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    scene(dir.path());
    let q = TokenMatrix::new(1, 3, vec![1.0, 0.0, 0.0]).unwrap();
    tensor_io::write_matrix(&q, dir.path().join("q3.npy")).unwrap();
    let out = tokenprune(
        dir.path(),
        &[
            "prune",
            "--tokens",
            "s/tokens.npy",
            "--queries",
            "q3.npy",
            "--n-target",
            "4",
        ],
    );
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_of(&out)["error"], "DimensionMismatch");
}

#[test]
fn diagnose_identity_has_zero_radius() {
    let dir = tempfile::tempdir().unwrap();
    scene(dir.path());
    let p = dir.path();
    ok(
        p,
        &[
            "prune",
            "--tokens",
            "s/tokens.npy",
            "--no-query",
            "--keep-ratio",
            "1",
            "--out",
            "r.json",
        ],
    );
    let report = json(&ok(
        p,
        &["diagnose", "--tokens", "s/tokens.npy", "--result", "r.json"],
    ));
    assert_eq!(report["radius"], 0.0);
    assert_eq!(report["worst_discarded"], Value::Null);
    assert_eq!(report["retained"], 160);
}

#[test]
fn diagnose_rejects_mismatched_tokens() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    scene(p);
    ok(
        p,
        &[
            "synth",
            "--seed",
            "3",
            "--n-background",
            "10",
            "--out-dir",
            "t",
        ],
    );
    ok(
        p,
        &[
            "prune",
            "--tokens",
            "s/tokens.npy",
            "--no-query",
            "--n-target",
            "8",
            "--out",
            "r.json",
        ],
    );
    let out = tokenprune(
        p,
        &["diagnose", "--tokens", "t/tokens.npy", "--result", "r.json"],
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn diagnose_flops_and_baselines() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    scene(p);
    ok(
        p,
        &[
            "prune",
            "--tokens",
            "s/tokens.npy",
            "--queries",
            "s/queries.npy",
            "--n-target",
            "54",
            "--out",
            "r.json",
        ],
    );
    let args = [
        "diagnose",
        "--tokens",
        "s/tokens.npy",
        "--result",
        "r.json",
        "--queries",
        "s/queries.npy",
        "--labels",
        "s/labels.json",
        "--flops",
        "llava-1.5-7b",
        "--baselines",
        "all",
        "--seed",
        "9",
    ];
    let first = ok(p, &args);
    assert_eq!(first, ok(p, &args));
    let report = json(&first);

    // 160 -> 54 is roughly a third of the visual tokens after layer 2
    let ratio = report["flops"]["ratio"].as_f64().unwrap();
    assert!((0.33..0.40).contains(&ratio), "ratio {ratio}");

    let methods = report["methods"].as_object().unwrap();
    for name in [
        "focus_context",
        "random",
        "uniform_stride",
        "saliency_topk",
        "relevance_topk",
        "maxmin_diversity",
    ] {
        assert!(methods[name]["radius"].as_f64().unwrap() >= 0.0, "{name}");
        let recall = methods[name]["recall"].as_f64().unwrap();
        assert!((0.0..=1.0).contains(&recall), "{name}");
    }
    assert_eq!(methods["focus_context"]["radius"], report["radius"]);
}

#[test]
fn diagnose_oracle_agrees() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    scene(p);
    ok(
        p,
        &[
            "prune",
            "--tokens",
            "s/tokens.npy",
            "--queries",
            "s/queries.npy",
            "--keep-ratio",
            "0.3",
            "--scan-order",
            "positional",
            "--invert-delta",
            "--out",
            "r.json",
        ],
    );
    let report = json(&ok(
        p,
        &[
            "diagnose",
            "--tokens",
            "s/tokens.npy",
            "--result",
            "r.json",
            "--queries",
            "s/queries.npy",
            "--with-oracle",
        ],
    ));
    assert_eq!(report["oracle"]["retained_match"], true);
}

#[test]
fn synth_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    ok(p, &["synth", "--seed", "5", "--dim", "8", "--out-dir", "a"]);
    ok(p, &["synth", "--seed", "5", "--dim", "8", "--out-dir", "b"]);
    for f in ["tokens.npy", "queries.npy", "labels.json", "params.json"] {
        assert_eq!(
            fs::read(p.join("a").join(f)).unwrap(),
            fs::read(p.join("b").join(f)).unwrap(),
            "{f}"
        );
    }
    ok(p, &["synth", "--seed", "6", "--dim", "8", "--out-dir", "c"]);
    assert_ne!(
        fs::read(p.join("a/tokens.npy")).unwrap(),
        fs::read(p.join("c/tokens.npy")).unwrap()
    );
    let tokens = tensor_io::read_matrix(p.join("a/tokens.npy")).unwrap();
    assert_eq!((tokens.rows(), tokens.cols()), (160, 8));
}

#[test]
fn synth_rejects_bad_scale() {
    let dir = tempfile::tempdir().unwrap();
    let out = tokenprune(
        dir.path(),
        &["synth", "--cluster-scale", "1", "--out-dir", "x"],
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bench_csv_columns() {
    let dir = tempfile::tempdir().unwrap();
    for reps in ["1", "9"] {
        let csv = ok(
            dir.path(),
            &[
                "bench",
                "--sizes",
                "64x16,32x8",
                "--queries",
                "2",
                "--n-target",
                "8",
                "--reps",
                reps,
            ],
        );
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "n,d,q,n_target,reps,fim_us,cassm_us,total_us");
        assert_eq!(lines.len(), 3);
        let cols: Vec<&str> = lines[1].split(',').collect();
        assert_eq!(&cols[..5], &["64", "16", "2", "8", reps]);
        for c in &cols[5..] {
            c.parse::<u64>().unwrap();
        }
    }
    let out = tokenprune(dir.path(), &["bench", "--reps", "0"]);
    assert_eq!(out.status.code(), Some(2));
}
