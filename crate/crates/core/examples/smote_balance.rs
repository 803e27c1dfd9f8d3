//! SMOTE on a toy minority class, showing where synthetic points come from,
//! and balancing of Education-sized class counts.

use confusion_detect::corpus::BinaryLabel;
use confusion_detect::features::{FeatureMatrix, FeatureSchema, FeatureVector};
use confusion_detect::resample::{balance_training_set, smote_traced, synthetic_needed, SmoteConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn row(id: String, values: Vec<f64>, label: BinaryLabel) -> FeatureVector {
    FeatureVector { post_id: id, values, label: Some(label), is_synthetic: false, degenerate: false }
}

fn main() -> confusion_detect::Result<()> {
    let minority: Vec<FeatureVector> = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [5.0, 5.0]]
        .iter()
        .enumerate()
        .map(|(i, v)| row(format!("m{i}"), v.to_vec(), BinaryLabel::Confused))
        .collect();
    let cfg = SmoteConfig { k_neighbors: 2, seed: 3, ..Default::default() };
    for s in smote_traced(&minority, &cfg, 6)? {
        println!(
            "{} = m{} + {:.3} * (m{} - m{}) -> {:?}",
            s.vector.post_id, s.base, s.lambda, s.neighbor, s.base, s.vector.values
        );
    }

    println!("\nEducation counts 3153 vs 6690 need {} synthetic rows", synthetic_needed(3153, 6690, 1.0));
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let rows: Vec<FeatureVector> = (0..3153 + 6690)
        .map(|i| {
            let label = if i < 3153 { BinaryLabel::Confused } else { BinaryLabel::NonConfused };
            row(format!("p{i}"), vec![rng.random(), rng.random(), rng.random()], label)
        })
        .collect();
    let schema = FeatureSchema::from_names(vec!["x".into(), "y".into(), "z".into()])?;
    let train = FeatureMatrix::new(schema, rows)?;
    let balanced = balance_training_set(&train, &SmoteConfig::default())?;
    let (c, n) = balanced.class_counts();
    let synthetic = balanced.rows().iter().filter(|r| r.is_synthetic).count();
    println!("balanced: {c} confused vs {n} non-confused ({synthetic} synthetic)");
    Ok(())
}
