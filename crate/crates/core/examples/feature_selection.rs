//! ANOVA screening, Benjamini–Hochberg and the collinearity filter on a
//! planted-signal corpus. The planted categories should top the η² ranking.

use confusion_detect::features::{featurize_corpus, FeatureSchema};
use confusion_detect::lexicon::LexiconRegistry;
use confusion_detect::stats::{anova_two_group, benjamini_hochberg, select_features, SelectionConfig};
use confusion_detect::synth::{generate_corpus, GeneratorConfig, PLANTED_CATEGORIES};

fn main() -> confusion_detect::Result<()> {
    let a = anova_two_group(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0])?;
    println!("ANOVA [1,2,3] vs [4,5,6]: F={} p={:.4} eta2={:.4}", a.f, a.p, a.eta_squared);
    let ps: Vec<(String, f64)> = [0.01, 0.02, 0.03, 0.04, 0.2].iter().enumerate().map(|(i, p)| (format!("h{i}"), *p)).collect();
    println!("BH at q=0.05 rejects {:?}\n", benjamini_hochberg(&ps, 0.05));

    let registry = LexiconRegistry::seed();
    let corpus = generate_corpus(&GeneratorConfig { seed: 11, ..Default::default() })?;
    let matrix = featurize_corpus(&corpus, &registry, &FeatureSchema::for_registry(&registry))?;
    let report = select_features(&matrix, &SelectionConfig::default())?;

    println!("{:<33} {:>10} {:>10} {:>7}  status", "feature", "F", "p", "eta2");
    for r in report.results.iter().take(12) {
        let planted = PLANTED_CATEGORIES.iter().any(|c| r.feature == format!("{c}_rate"));
        let status = match (&r.drop_reason, r.retained) {
            (_, true) => "retained".to_string(),
            (Some(why), _) => why.clone(),
            (None, false) => "dropped".to_string(),
        };
        println!(
            "{:<33} {:>10.2} {:>10.2e} {:>7.4}  {status}{}",
            r.feature,
            r.f,
            r.p,
            r.eta_squared,
            if planted { "  [planted]" } else { "" }
        );
    }
    for d in &report.degenerate {
        println!("degenerate: {} ({})", d.feature, d.reason);
    }
    println!("\nretained {} of {} features", report.retained.len(), matrix.schema().len());
    Ok(())
}
