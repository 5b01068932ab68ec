use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_nftmarket");

const SMALL: &str = r#"
seed = 3

[synth]
n_collections = 25
n_traders = 1500
embedding_dim = 16
embedded_per_collection = 4
span_days = 200

[visual]
expected_dim = 16
pca_k = 3

[network]
null_realizations = 5
"#;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(BIN)
        .arg("--config")
        .arg(dir.join("run.toml"))
        .arg("--out")
        .arg(dir.join("out"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn setup() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.toml"), SMALL).unwrap();
    dir
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn missing_trades_file_is_a_validation_error() {
    let dir = setup();
    let missing = dir.path().join("nope.csv");
    let o = run(dir.path(), &["--trades", missing.to_str().unwrap(), "ingest"]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(stderr(&o).contains("nope.csv"), "{}", stderr(&o));
}

#[test]
fn unknown_subcommand_exits_64() {
    let o = Command::new(BIN).arg("frobnicate").output().unwrap();
    assert_eq!(o.status.code(), Some(64));
    let o = Command::new(BIN).output().unwrap();
    assert_eq!(o.status.code(), Some(64));
}

#[test]
fn bad_config_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.toml"), "seed = 1\nbogus = 2\n").unwrap();
    let o = run(dir.path(), &["stats"]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
}

#[test]
fn invalid_thread_count_is_rejected() {
    let dir = setup();
    let o = Command::new(BIN)
        .arg("--config")
        .arg(dir.path().join("run.toml"))
        .arg("synth")
        .env("NFTMARKET_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("NFTMARKET_THREADS"));
}

#[test]
fn report_without_outputs_fails_validation() {
    let dir = setup();
    let o = run(dir.path(), &["report"]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
}

#[test]
fn wrong_embedding_dimension_is_rejected() {
    let dir = setup();
    assert!(run(dir.path(), &["synth"]).status.success());
    let toml = SMALL.replace("expected_dim = 16", "expected_dim = 32");
    std::fs::write(dir.path().join("run.toml"), toml).unwrap();
    let o = run(dir.path(), &["visual"]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
}

#[test]
fn small_pipeline_writes_reports_and_is_reproducible() {
    let dir = setup();
    for stage in ["synth", "ingest", "stats", "network", "visual", "predict"] {
        let o = run(dir.path(), &[stage]);
        assert!(o.status.success(), "{stage}: {}", stderr(&o));
    }
    let out = dir.path().join("out");
    for f in [
        "ingest/trades.csv",
        "ingest/ingest_stats.json",
        "stats/daily_series.csv",
        "stats/resale_curve.csv",
        "stats/stats_summary.json",
        "network/trader_edges.csv",
        "network/network_summary.json",
        "visual/distance_category.csv",
        "visual/visual_summary.json",
        "predict/features.csv",
        "predict/regression.csv",
        "predict/coefficients.csv",
        "predict/classification.csv",
    ] {
        assert!(out.join(f).is_file(), "missing {f}");
    }
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("network/network_summary.json")).unwrap()).unwrap();
    assert_eq!(summary["seed"], 3);
    assert!(summary["config_sha256"].as_str().is_some_and(|s| s.len() == 64));

    let first = run(dir.path(), &["report"]);
    assert!(first.status.success(), "{}", stderr(&first));
    let manifest = std::fs::read(out.join("report/manifest.json")).unwrap();
    let second = run(dir.path(), &["report"]);
    assert_eq!(first.stdout, second.stdout);
    assert_eq!(manifest, std::fs::read(out.join("report/manifest.json")).unwrap());

    let m: serde_json::Value = serde_json::from_slice(&manifest).unwrap();
    let mut listed: Vec<String> =
        m["artifacts"].as_array().unwrap().iter().map(|a| a["path"].as_str().unwrap().to_string()).collect();
    let mut on_disk = Vec::new();
    for stage in std::fs::read_dir(out.join("report")).unwrap() {
        let stage = stage.unwrap().path();
        if stage.is_dir() {
            for f in std::fs::read_dir(&stage).unwrap() {
                let f = f.unwrap().path();
                on_disk.push(format!(
                    "{}/{}",
                    stage.file_name().unwrap().to_string_lossy(),
                    f.file_name().unwrap().to_string_lossy()
                ));
            }
        }
    }
    listed.sort();
    on_disk.sort();
    assert_eq!(listed, on_disk);

    let before = std::fs::read(out.join("stats/stats_summary.json")).unwrap();
    let series = std::fs::read(out.join("stats/daily_series.csv")).unwrap();
    assert!(run(dir.path(), &["stats"]).status.success());
    assert_eq!(before, std::fs::read(out.join("stats/stats_summary.json")).unwrap());
    assert_eq!(series, std::fs::read(out.join("stats/daily_series.csv")).unwrap());
    assert_eq!(m["seed"], 3);
    assert!(m["artifacts"].as_array().unwrap().iter().any(|a| a["path"] == "predict/coefficients.csv"));
    assert!(m["inputs"].as_array().unwrap().iter().any(|a| a["path"] == "synth/trades.csv"));
}

#[test]
fn explicit_exports_are_ingested() {
    let dir = setup();
    assert!(run(dir.path(), &["synth"]).status.success());
    let synth = dir.path().join("out/synth");
    let other = dir.path().join("other");
    let o = Command::new(BIN)
        .arg("--out")
        .arg(&other)
        .arg("--trades")
        .arg(synth.join("trades.csv"))
        .arg("--rates")
        .arg(synth.join("rates.csv"))
        .arg("--ingest-config")
        .arg(synth.join("ingest.toml"))
        .arg("ingest")
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    let a = std::fs::read(other.join("ingest/trades.csv")).unwrap();
    assert!(run(dir.path(), &["ingest"]).status.success());
    let b = std::fs::read(dir.path().join("out/ingest/trades.csv")).unwrap();
    assert_eq!(a, b);
}
