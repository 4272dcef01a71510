use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use scriptsim::pipeline::{Pipeline, PipelineError, Stage};

fn fixture_config() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/mini/mini.toml")
}

fn load(out: &Path) -> Pipeline {
    Pipeline::load(&fixture_config(), Some(out), None).unwrap()
}

/// Relative path → file contents for every file under `dir`.
fn snapshot(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut files = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(dir).unwrap().to_path_buf();
                files.insert(rel, fs::read(&path).unwrap());
            }
        }
    }
    files
}

#[test]
fn fixture_run_produces_every_artifact() {
    let out = tempfile::tempdir().unwrap();
    load(out.path()).run().unwrap();
    let files = snapshot(out.path());
    for rel in [
        "corpus/manifest.jsonl",
        "corpus/chapters.jsonl",
        "dtm/matrix.mtx",
        "dtm/vocab.txt",
        "dtm/rows.csv",
        "dtm/stats.json",
        "dist/meta.json",
        "dist/within/euclidean/Proverb.csv",
        "dist/within/jaccard/Wisdom.jsonl",
        "dist/between/euclidean_median.csv",
        "dist/between/cosine_min.jsonl",
        "cluster/k2/partition.json",
        "cluster/k3/graph.dot",
        "cluster/k3/tree.nwk",
        "cluster/dendrogram.nwk",
        "cluster/sweep.json",
        "classify/report.json",
        "classify/knn_confusion.csv",
        "classify/svm-linear_confusion.csv",
        "classify/random-forest_confusion.csv",
        "summary.json",
    ] {
        assert!(files.contains_key(Path::new(rel)), "missing {rel}");
    }

    let summary: serde_json::Value =
        serde_json::from_slice(&files[Path::new("summary.json")]).unwrap();
    assert_eq!(summary["schema_version"], 1);
    assert_eq!(summary["chapters"], 28);
    assert_eq!(summary["chapter_counts"]["TaoTeChing"], 10);
    assert_eq!(summary["chapter_counts"]["Proverb"], 10);
    assert_eq!(summary["chapter_counts"]["Wisdom"], 8);
    assert_eq!(summary["classifiers"].as_array().unwrap().len(), 3);
    // Upanishad is not in the fixture, so the book-level checks stay open.
    assert!(summary["checks"]["closest_books"]["pass"].is_null());

    let manifest = String::from_utf8(files[Path::new("corpus/manifest.jsonl")].clone()).unwrap();
    assert_eq!(manifest.lines().count(), 28);
    let first: serde_json::Value = serde_json::from_str(manifest.lines().next().unwrap()).unwrap();
    assert_eq!(first["book"], "TaoTeChing");
    assert_eq!(first["index"], 0);

    let dot = String::from_utf8(files[Path::new("cluster/k2/graph.dot")].clone()).unwrap();
    assert!(dot.starts_with("graph"));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    load(a.path()).run().unwrap();
    load(b.path()).run().unwrap();
    assert_eq!(snapshot(a.path()), snapshot(b.path()));
}

#[test]
fn separate_stages_match_a_full_run() {
    let full = tempfile::tempdir().unwrap();
    let staged = tempfile::tempdir().unwrap();
    load(full.path()).run().unwrap();
    let p = load(staged.path());
    for stage in Stage::ALL {
        p.run_stage(stage).unwrap();
    }
    assert_eq!(snapshot(full.path()), snapshot(staged.path()));
}

#[test]
fn dist_after_dtm_writes_only_distance_files() {
    let out = tempfile::tempdir().unwrap();
    let p = load(out.path());
    p.run_stage(Stage::Ingest).unwrap();
    p.run_stage(Stage::Dtm).unwrap();
    let before = snapshot(out.path());
    p.run_stage(Stage::Dist).unwrap();
    let after = snapshot(out.path());
    for (rel, bytes) in &after {
        match before.get(rel) {
            Some(old) => assert_eq!(old, bytes),
            None => assert!(rel.starts_with("dist"), "unexpected {}", rel.display()),
        }
    }
}

#[test]
fn downstream_stage_without_upstream_artifacts_fails() {
    let out = tempfile::tempdir().unwrap();
    let p = load(out.path());
    for stage in [
        Stage::Dtm,
        Stage::Dist,
        Stage::Cluster,
        Stage::Classify,
        Stage::Report,
    ] {
        match p.run_stage(stage) {
            Err(PipelineError::MissingUpstreamArtifact { stage: s, .. }) => assert_eq!(s, stage),
            other => panic!("{stage}: expected a missing-artifact error, got {other:?}"),
        }
    }
}

#[test]
fn seed_override_changes_seeds_but_not_schema() {
    let out = tempfile::tempdir().unwrap();
    let p = Pipeline::load(&fixture_config(), Some(out.path()), Some(99)).unwrap();
    assert_eq!(p.seeds.config, 99);
    p.run().unwrap();
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.path().join("summary.json")).unwrap())
            .unwrap();
    assert_eq!(summary["seeds"]["config"], 99);
}

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_scriptsim"))
}

#[test]
fn cli_reports_missing_book_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(
        &cfg,
        "[[books]]\nlabel = \"Wisdom\"\npath = \"no_such_book.txt\"\nrule = \"verse-prefix\"\n",
    )
    .unwrap();
    let out = binary()
        .args(["run", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("out"))
        .env("RUST_LOG", "off")
        .output()
        .unwrap();
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("no_such_book.txt"), "{stderr}");
}

#[test]
fn cli_cluster_without_dtm_fails() {
    let dir = tempfile::tempdir().unwrap();
    let out = binary()
        .args(["cluster", "--config"])
        .arg(fixture_config())
        .arg("--out")
        .arg(dir.path())
        .env("RUST_LOG", "off")
        .output()
        .unwrap();
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("missing upstream artifact"), "{stderr}");
}

#[test]
fn cli_subcommands_match_run() {
    let run = tempfile::tempdir().unwrap();
    let staged = tempfile::tempdir().unwrap();
    let status = binary()
        .args(["run", "--config"])
        .arg(fixture_config())
        .arg("--out")
        .arg(run.path())
        .env("RUST_LOG", "off")
        .status()
        .unwrap();
    assert!(status.success());
    for sub in ["ingest", "dtm", "dist", "cluster", "classify", "report"] {
        let status = binary()
            .args([sub, "--config"])
            .arg(fixture_config())
            .arg("--out")
            .arg(staged.path())
            .env("RUST_LOG", "off")
            .status()
            .unwrap();
        assert!(status.success(), "{sub}");
    }
    assert_eq!(snapshot(run.path()), snapshot(staged.path()));
}
