use std::fs;

use tokenprune_core::pruner::prune_file;
use tokenprune_core::synth::{self, SceneParams};
use tokenprune_core::{prune, tensor_io, ReductionConfig, ResultDocument};

#[test]
fn scene_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let scene = synth::generate(&SceneParams {
        seed: 8,
        ..SceneParams::default()
    })
    .unwrap();
    synth::write_scene(&scene, dir.path()).unwrap();
    assert_eq!(
        tensor_io::read_matrix(dir.path().join("tokens.npy")).unwrap(),
        scene.tokens
    );
    assert_eq!(
        tensor_io::read_matrix(dir.path().join("queries.npy")).unwrap(),
        scene.queries
    );
    assert_eq!(
        synth::read_labels(dir.path().join("labels.json")).unwrap(),
        scene.labels
    );
}

#[test]
fn prune_file_matches_in_memory() {
    let dir = tempfile::tempdir().unwrap();
    let scene = synth::generate(&SceneParams {
        seed: 9,
        ..SceneParams::default()
    })
    .unwrap();
    synth::write_scene(&scene, dir.path()).unwrap();
    let cfg = ReductionConfig::with_keep_ratio(0.25);
    let out = dir.path().join("result.json");
    let queries = dir.path().join("queries.npy");
    let doc = prune_file(dir.path().join("tokens.npy"), Some(&queries), &cfg, &out).unwrap();

    let reread = ResultDocument::from_json(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(reread.retained, doc.retained);
    assert!(!reread.query_absent);
    let direct = prune(&scene.tokens, &scene.queries, &cfg).unwrap();
    assert_eq!(reread.retained_set().unwrap(), direct.retained);
}

#[test]
fn prune_file_without_queries() {
    let dir = tempfile::tempdir().unwrap();
    let scene = synth::generate(&SceneParams {
        seed: 10,
        ..SceneParams::default()
    })
    .unwrap();
    synth::write_scene(&scene, dir.path()).unwrap();
    let out = dir.path().join("r.json");
    let doc = prune_file(
        dir.path().join("tokens.npy"),
        None,
        &ReductionConfig::with_n_target(7),
        &out,
    )
    .unwrap();
    assert!(doc.query_absent);
    assert_eq!(doc.q, 0);
    assert_eq!(doc.retained.len(), 7);
    assert!(prune_file(
        dir.path().join("absent.npy"),
        None,
        &ReductionConfig::with_n_target(7),
        &out
    )
    .unwrap_err()
    .is_io());
}
