//! Train on one generator variant, test on the other, with and without the
//! domain-incompatible features.

use confusion_detect::eval::{cross_domain_evaluate, is_domain_incompatible};
use confusion_detect::features::{featurize_corpus, FeatureSchema};
use confusion_detect::lexicon::LexiconRegistry;
use confusion_detect::models::ModelParams;
use confusion_detect::resample::SmoteConfig;
use confusion_detect::synth::{generate_corpus, GeneratorConfig, Variant};

fn main() -> confusion_detect::Result<()> {
    let registry = LexiconRegistry::seed();
    let schema = FeatureSchema::for_registry(&registry);
    let dropped: Vec<&String> = schema.names().iter().filter(|n| is_domain_incompatible(n)).collect();
    println!("domain-incompatible features: {dropped:?}");

    let a = generate_corpus(&GeneratorConfig { variant: Variant::A, seed: 21, ..Default::default() })?;
    let b = generate_corpus(&GeneratorConfig { variant: Variant::B, seed: 22, ..Default::default() })?;
    let ma = featurize_corpus(&a, &registry, &schema)?;
    let mb = featurize_corpus(&b, &registry, &schema)?;

    for (name, train, test) in [("A -> B", &ma, &mb), ("B -> A", &mb, &ma)] {
        for drop in [true, false] {
            let r = cross_domain_evaluate(train, test, &ModelParams::default(), &SmoteConfig::default(), None, drop)?;
            println!(
                "{name} drop_incompatible={drop:<5}: {} features, confused F1 {:.3}, recall {:.3}",
                r.config.features.len(),
                r.pooled.confused.f1.unwrap_or(f64::NAN),
                r.pooled.confused.recall.unwrap_or(f64::NAN)
            );
        }
    }
    Ok(())
}
