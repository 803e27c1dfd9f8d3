//! The `confusion` binary: exit codes, output files and rerun stability.

use std::path::Path;
use std::process::{Command, Output};

fn confusion(cwd: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_confusion"))
        .args(args)
        .current_dir(cwd)
        .env_remove("CONFUSION_LEXICONS")
        .output()
        .unwrap()
}

fn ok(cwd: &Path, args: &[&str]) -> String {
    let out = confusion(cwd, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn synth(cwd: &Path) {
    ok(cwd, &["synth", "--n", "400", "--seed", "2", "--out", "posts.csv"]);
}

#[test]
fn ingest_reports_class_counts_and_neutral_drops() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("posts.tsv"),
        "Text\tConfusion(1-7)\nI am lost\t6\nnice lecture\t2\nhmm\t4\n\t5\nokay then\t9\n",
    )
    .unwrap();
    std::fs::write(dir.path().join("m.cfg"), "text_col=Text\nscore_col=Confusion(1-7)\ndomain=Education\ndelimiter=tab\n").unwrap();

    let inc: serde_json::Value = serde_json::from_str(&ok(dir.path(), &["ingest", "--data", "posts.tsv", "--manifest", "m.cfg"])).unwrap();
    assert_eq!(inc["class_counts"]["confused"], 2);
    assert_eq!(inc["class_counts"]["non_confused"], 1);
    assert_eq!(inc["summary"]["skipped"]["empty_text"], 1);
    assert_eq!(inc["summary"]["skipped"]["bad_score"], 1);

    let exc: serde_json::Value =
        serde_json::from_str(&ok(dir.path(), &["ingest", "--data", "posts.tsv", "--manifest", "m.cfg", "--neutral", "exclude"])).unwrap();
    assert_eq!(exc["class_counts"]["confused"], 1);
    assert_eq!(exc["class_counts"]["excluded"], 1);
    assert!(dir.path().join("confusion-out/corpus.json").exists());
    assert!(dir.path().join("confusion-out/run_config.json").exists());
}

#[test]
fn input_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path());
    let cases: &[&[&str]] = &[
        &["ingest", "--data", "posts.csv", "--manifest", "missing.cfg"],
        &["ingest", "--data", "missing.csv"],
        &["select", "--features", "missing.csv"],
        &["predict", "--model", "missing.json", "--text", "hello"],
        &["evaluate", "--features", "missing.csv"],
        &["featurize", "--data", "posts.csv", "--lexicons", "no-such-dir"],
        &["no-such-command"],
    ];
    for args in cases {
        let out = confusion(dir.path(), args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn corrupted_model_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("model.json"), "{\"format_version\": 1, \"kind\": 3}").unwrap();
    let out = confusion(dir.path(), &["predict", "--model", "model.json", "--text", "hi"]);
    assert_ne!(out.status.code(), Some(0));
}

#[test]
fn staged_pipeline_and_predict() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    synth(d);
    ok(d, &["featurize", "--data", "posts.csv", "--out", "f"]);
    ok(d, &["select", "--features", "f/features.csv", "--out", "s"]);
    let selection: serde_json::Value = serde_json::from_slice(&std::fs::read(d.join("s/selection.json")).unwrap()).unwrap();
    let csv = std::fs::read_to_string(d.join("s/selection.csv")).unwrap();
    assert!(csv.starts_with("feature,F,p,eta2,"));
    assert!(!selection["retained"].as_array().unwrap().is_empty());

    ok(d, &["train", "--features", "f/features.csv", "--selection", "s/selection.json", "--trees", "30", "--out", "t"]);
    let out = ok(d, &["predict", "--model", "t/model.json", "--text", "Can someone explain the quiz?"]);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 1);
    let line: serde_json::Value = serde_json::from_str(lines[0]).unwrap();
    assert!(matches!(line["label"].as_str(), Some("confused" | "non_confused")));
    let p = line["p_confused"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&p));
    assert!(line["top_hits"].as_array().unwrap().len() <= 3);

    let many = ok(d, &["predict", "--model", "t/model.json", "--data", "posts.csv"]);
    assert_eq!(many.lines().count(), 400);

    ok(d, &["evaluate", "--features", "f/features.csv", "--k", "5", "--trees", "30", "--out", "e"]);
    let report = std::fs::read_to_string(d.join("e/cv_report.csv")).unwrap();
    let mut rows = report.lines();
    assert_eq!(rows.next(), Some("run_id,fold,class,precision,recall,f1,accuracy,tp,fp,fn,tn"));
    assert_eq!(rows.clone().count(), 6);
    assert!(rows.last().unwrap().split(',').nth(1) == Some("pooled"));
}

#[test]
fn evaluate_twice_gives_identical_data_files() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    synth(d);
    ok(d, &["featurize", "--data", "posts.csv", "--out", "f"]);
    for out in ["e1", "e2"] {
        ok(d, &["evaluate", "--features", "f/features.csv", "--k", "10", "--seed", "7", "--trees", "20", "--out", out]);
    }
    let read = |p: &str| std::fs::read(d.join(p)).unwrap();
    assert_eq!(read("e1/cv_report.csv"), read("e2/cv_report.csv"));
    let strip = |p: &str| {
        let mut v: serde_json::Value = serde_json::from_slice(&read(p)).unwrap();
        v["wall_time_seconds"] = 0.into();
        v["pooled"]["wall_time_seconds"] = 0.into();
        for f in v["folds"].as_array_mut().unwrap() {
            f["metrics"]["wall_time_seconds"] = 0.into();
        }
        v
    };
    assert_eq!(strip("e1/cv_report.json"), strip("e2/cv_report.json"));
}

#[test]
fn crossdomain_drop_flag_changes_feature_set() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["synth", "--n", "300", "--seed", "1", "--out", "a.csv"]);
    ok(d, &["synth", "--n", "300", "--seed", "2", "--variant", "b", "--out", "b.csv"]);
    ok(d, &["featurize", "--data", "a.csv", "--out", "fa"]);
    ok(d, &["featurize", "--data", "b.csv", "--out", "fb"]);
    let mut counts = Vec::new();
    for flag in ["true", "false"] {
        let out = format!("x-{flag}");
        ok(d, &["crossdomain", "--train-features", "fa/features.csv", "--test-features", "fb/features.csv", "--trees", "20", "--drop-incompatible", flag, "--out", &out]);
        let r: serde_json::Value = serde_json::from_slice(&std::fs::read(d.join(&out).join("crossdomain_report.json")).unwrap()).unwrap();
        counts.push(r["config"]["features"].as_array().unwrap().len());
    }
    assert_eq!(counts, vec![24, 28]);
}

#[test]
fn predict_throughput() {
    use confusion_detect::cli::predict_texts;
    use confusion_detect::features::{featurize_corpus, FeatureSchema};
    use confusion_detect::lexicon::LexiconRegistry;
    use confusion_detect::models::{train, ModelParams};
    use confusion_detect::synth::{generate_corpus, generate_posts, GeneratorConfig};

    let reg = LexiconRegistry::seed();
    let corpus = generate_corpus(&GeneratorConfig { n_posts: 1000, ..Default::default() }).unwrap();
    let m = featurize_corpus(&corpus, &reg, &FeatureSchema::for_registry(&reg)).unwrap();
    let model = train(&m, &ModelParams::default()).unwrap();
    let posts: Vec<(String, String)> = generate_posts(&GeneratorConfig { n_posts: 5000, seed: 1, ..Default::default() })
        .unwrap()
        .into_iter()
        .map(|p| (p.id, p.text))
        .collect();
    let t = std::time::Instant::now();
    let lines = predict_texts(&model, &reg, &posts).unwrap();
    let rate = lines.len() as f64 / t.elapsed().as_secs_f64();
    assert_eq!(lines.len(), 5000);
    assert!(rate >= 1000.0, "{rate:.0} posts/s");
}
