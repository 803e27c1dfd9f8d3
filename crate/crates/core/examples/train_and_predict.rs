//! Train each model family on a balanced synthetic corpus, save the random
//! forest, reload it and score new posts with lexicon explanations.

use confusion_detect::cli::predict_texts;
use confusion_detect::features::{featurize_corpus, FeatureSchema};
use confusion_detect::lexicon::LexiconRegistry;
use confusion_detect::models::{load_model, save_model, train, ModelKind, ModelParams};
use confusion_detect::resample::{balance_training_set, SmoteConfig};
use confusion_detect::synth::{generate_corpus, GeneratorConfig};

fn main() -> confusion_detect::Result<()> {
    let registry = LexiconRegistry::seed();
    let schema = FeatureSchema::for_registry(&registry);
    let train_c = generate_corpus(&GeneratorConfig { seed: 1, ..Default::default() })?;
    let test_c = generate_corpus(&GeneratorConfig { n_posts: 500, seed: 2, ..Default::default() })?;
    let train_m = balance_training_set(&featurize_corpus(&train_c, &registry, &schema)?, &SmoteConfig::default())?;
    let test_m = featurize_corpus(&test_c, &registry, &schema)?;

    let dir = tempfile::tempdir().expect("temp dir");
    let path = dir.path().join("model.json");
    for kind in [ModelKind::RandomForest, ModelKind::GaussianNb, ModelKind::LogisticRegression] {
        let model = train(&train_m, &ModelParams::with_kind(kind))?;
        let preds = model.predict_matrix(&test_m)?;
        let correct = preds.iter().zip(test_m.rows()).filter(|(p, r)| Some(p.label) == r.label).count();
        println!(
            "{kind:?}: held-out accuracy {:.3}, trained in {:.2}s",
            correct as f64 / preds.len() as f64,
            model.metadata.wall_time_seconds
        );
        if kind == ModelKind::RandomForest {
            save_model(&model, &path)?;
        }
    }

    let model = load_model(&path)?;
    let posts = [
        ("a", "Can anyone explain the quiz? I'm stuck and never got the second part."),
        ("b", "Great lecture, thanks for the notes on chapter two."),
    ];
    let posts: Vec<(String, String)> = posts.iter().map(|(i, t)| (i.to_string(), t.to_string())).collect();
    for line in predict_texts(&model, &registry, &posts)? {
        println!("{}", serde_json::to_string(&line)?);
    }
    Ok(())
}
