use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn histdiv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_histdiv"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = histdiv(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// A small synthetic archive written through the CLI itself.
fn archive() -> TempDir {
    let dir = TempDir::new().unwrap();
    ok(&["synth", "--out", p(dir.path()), "--docs", "800", "--topics", "2"]);
    dir
}

#[test]
fn ingest_reports_statistics() {
    let dir = archive();
    let corpus = dir.path().join("corpus.jsonl");
    let normalized = dir.path().join("normalized.jsonl");
    let out = ok(&["ingest", "--corpus", p(&corpus), "--out", p(&normalized), "--granularity", "year"]);
    assert!(out.contains("documents\t800"));
    assert!(out.contains("intervals\t20 (year 1987-01-01..2006-12-31)"));
    assert_eq!(fs::read_to_string(&normalized).unwrap().lines().count(), 800);
}

#[test]
fn score_then_diversify_from_precomputed_scores() {
    let dir = archive();
    let corpus = dir.path().join("corpus.jsonl");
    let topics = dir.path().join("topics.json");
    let scores = dir.path().join("lm.tsv");
    ok(&["score", "--corpus", p(&corpus), "--query-file", p(&topics), "--top", "200", "--out", p(&scores)]);
    let rows = fs::read_to_string(&scores).unwrap();
    assert!(rows.lines().all(|l| l.split('\t').count() == 3));
    assert!(rows.lines().any(|l| l.starts_with("T01\t")));

    let direct = dir.path().join("direct.run");
    let cached = dir.path().join("cached.run");
    let common = [
        "diversify", "--corpus", p(&corpus), "--query-file", p(&topics), "--algo", "histdiv-burst", "--k", "20",
        "--top", "200",
    ];
    ok(&[&common[..], &["--out", p(&direct)]].concat());
    ok(&[&common[..], &["--scores", p(&scores), "--out", p(&cached)]].concat());
    let run = fs::read_to_string(&direct).unwrap();
    assert_eq!(run.lines().count(), 40);
    assert!(run.lines().all(|l| l.split(' ').count() == 6 && l.ends_with(" histdiv-burst")));
    // LM ordering survives the TSV round-trip up to score rounding
    let docs = |s: &str| s.lines().map(|l| l.split(' ').nth(2).unwrap().to_owned()).collect::<Vec<_>>();
    assert_eq!(docs(&run), docs(&fs::read_to_string(&cached).unwrap()));
}

#[test]
fn priors_dump_is_json() {
    let dir = archive();
    let dump = dir.path().join("priors/T01.json");
    ok(&[
        "priors", "--corpus", p(&dir.path().join("corpus.jsonl")), "--query-file",
        p(&dir.path().join("topics.json")), "--query-id", "T01", "--theta", "0.5", "--burst-window", "24",
        "--dump", p(&dump),
    ]);
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&dump).unwrap()).unwrap();
    assert_eq!(v["intervals"].as_array().unwrap().len(), 240);
    let total: f64 = v["temporal"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-9);
    assert_eq!(v["bursts"]["window"], 24);
}

#[test]
fn evaluate_writes_report() {
    let dir = archive();
    let corpus = dir.path().join("corpus.jsonl");
    let topics = dir.path().join("topics.json");
    for algo in ["lm", "histdiv"] {
        let run = dir.path().join(format!("{algo}.run"));
        ok(&["diversify", "--corpus", p(&corpus), "--query-file", p(&topics), "--algo", algo, "--k", "20", "--out", p(&run)]);
    }
    let report = dir.path().join("eval");
    ok(&[
        "evaluate", "--corpus", p(&corpus), "--topics", p(&topics), "--qrels", p(&dir.path().join("qrels.tsv")),
        "--run", p(&dir.path().join("lm.run")), p(&dir.path().join("histdiv.run")), "--baseline", "lm",
        "--out", p(&report),
    ]);
    let tsv = fs::read_to_string(report.join("report.tsv")).unwrap();
    assert!(tsv.starts_with("run\tmetric\tspace\tk\ttopic\tvalue\n"));
    assert!(tsv.contains("histdiv\tSBR\tAT\t10\tall\t"));
    let summary = fs::read_to_string(report.join("summary.txt")).unwrap();
    assert!(summary.contains("histdiv") && summary.contains("k=20"));
}

#[test]
fn experiment_writes_runs_and_report() {
    let dir = archive();
    let config = dir.path().join("exp.toml");
    fs::write(
        &config,
        "corpus = \"corpus.jsonl\"\ntopics = \"topics.json\"\nqrels = \"qrels.tsv\"\noutput = \"out\"\n\
         algorithms = [\"lm\", \"histdiv\"]\ngranularities = [\"month\"]\niterations = 1000\nfolds = 2\n",
    )
    .unwrap();
    let summary = ok(&["experiment", "--config", p(&config), "--workers", "2"]);
    assert!(summary.contains("granularity: month"));
    let out = dir.path().join("out");
    let runs: Vec<_> = ["T01", "T02"]
        .iter()
        .flat_map(|t| fs::read_dir(out.join("runs/month").join(t)).unwrap())
        .collect();
    assert_eq!(runs.len(), 4);
    assert!(out.join("report.tsv").is_file());

    ok(&["sweep", "--config", p(&config), "--out", p(&dir.path().join("sweep"))]);
    let sweep = fs::read_to_string(dir.path().join("sweep/sweep.tsv")).unwrap();
    assert!(sweep.starts_with("granularity\talgorithm\tfold\tparams\ttrain\ttest\n"));
}

#[test]
fn annotate_uses_dictionary_and_years() {
    let dir = TempDir::new().unwrap();
    let raw = dir.path().join("raw.jsonl");
    fs::write(
        &raw,
        "{\"id\":\"a\",\"published\":\"1994-02-01\",\"aspects\":[],\"temporal_refs\":[],\"text\":\"Giuliani ran in 1993\"}\n",
    )
    .unwrap();
    let dict = dir.path().join("dict.tsv");
    fs::write(&dict, "giuliani\tE1\n").unwrap();
    let out = dir.path().join("annotated.jsonl");
    ok(&["annotate", "--input", p(&raw), "--dict", p(&dict), "--out", p(&out)]);
    let v: serde_json::Value = serde_json::from_str(fs::read_to_string(&out).unwrap().trim()).unwrap();
    assert_eq!(v["aspects"], serde_json::json!(["E1"]));
    assert_eq!(v["temporal_refs"][0]["begin"], "1993-01-01");
    assert_eq!(v["temporal_refs"][0]["end"], "1993-12-31");
}

#[test]
fn exit_codes_separate_validation_from_runtime_errors() {
    let dir = archive();
    let corpus = dir.path().join("corpus.jsonl");
    let topics = dir.path().join("topics.json");
    let code = |args: &[&str]| histdiv(args).status.code();

    let unknown = ["diversify", "--corpus", p(&corpus), "--query-file", p(&topics), "--algo", "nope"];
    assert_eq!(code(&unknown), Some(1));
    let bad_alpha = ["diversify", "--corpus", p(&corpus), "--query", "topic01", "--alpha", "2"];
    assert_eq!(code(&bad_alpha), Some(1));
    assert_eq!(code(&["diversify"]), Some(1));

    let config = dir.path().join("bad.toml");
    fs::write(&config, "algorithms = [\"nope\"]\n").unwrap();
    assert_eq!(code(&["experiment", "--config", p(&config)]), Some(1));

    let missing = dir.path().join("missing.jsonl");
    assert_eq!(code(&["ingest", "--corpus", p(&missing)]), Some(2));
    assert_eq!(code(&["--help"]), Some(0));
}
