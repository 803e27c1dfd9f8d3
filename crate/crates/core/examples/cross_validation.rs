//! Stratified 10-fold CV with per-fold SMOTE on the planted-signal corpus.
//! Optional argument: number of posts (default 2000).

use confusion_detect::eval::{cross_validate, emit_report, ReportFormat};
use confusion_detect::features::{featurize_corpus, FeatureSchema};
use confusion_detect::lexicon::LexiconRegistry;
use confusion_detect::models::{ModelKind, ModelParams};
use confusion_detect::resample::SmoteConfig;
use confusion_detect::synth::{generate_corpus, GeneratorConfig};

fn fmt(x: Option<f64>) -> String {
    x.map_or("n/a".into(), |v| format!("{v:.3}"))
}

fn main() -> confusion_detect::Result<()> {
    let n_posts = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(2000);
    let registry = LexiconRegistry::seed();
    let corpus = generate_corpus(&GeneratorConfig { n_posts, seed: 7, ..Default::default() })?;
    let matrix = featurize_corpus(&corpus, &registry, &FeatureSchema::for_registry(&registry))?;

    for kind in [ModelKind::RandomForest, ModelKind::GaussianNb, ModelKind::LogisticRegression] {
        let params = ModelParams { seed: 7, ..ModelParams::with_kind(kind) };
        let smote = SmoteConfig { seed: 7, ..Default::default() };
        let report = cross_validate(&matrix, &params, &smote, 10, 7)?;
        let p = &report.pooled;
        println!(
            "{kind:?} [{}]: confused P={} R={} F1={}  macro F1={}  acc={:.3}  ({:.1}s)",
            report.run_id,
            fmt(p.confused.precision),
            fmt(p.confused.recall),
            fmt(p.confused.f1),
            fmt(p.macro_f1),
            p.accuracy,
            report.wall_time_seconds
        );
        if kind == ModelKind::RandomForest {
            for f in &report.folds {
                println!(
                    "  fold {}: train {} real + {} synthetic, F1 {}",
                    f.fold,
                    f.n_train_real,
                    f.n_train_synthetic,
                    fmt(f.metrics.f1())
                );
            }
            let mut csv = Vec::new();
            report.write_csv(&mut csv)?;
            println!("{}", String::from_utf8_lossy(&csv).lines().last().unwrap_or_default());
            let dir = tempfile::tempdir().expect("temp dir");
            emit_report(&report, ReportFormat::Json, dir.path().join("cv.json"))?;
        }
    }
    Ok(())
}
