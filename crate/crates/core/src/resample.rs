//! SMOTE oversampling of the minority class. Only ever applied to training
//! rows; evaluation code keeps test rows untouched.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::BinaryLabel;
use crate::error::{Error, Result};
use crate::features::{FeatureMatrix, FeatureVector};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoteConfig {
    pub k_neighbors: usize,
    /// Minority/majority ratio to reach, in (0, 1].
    pub target_ratio: f64,
    pub seed: u64,
    /// Z-score features for the neighbor search only; interpolation always
    /// happens on raw values.
    #[serde(default)]
    pub standardize: bool,
}

impl Default for SmoteConfig {
    fn default() -> Self {
        SmoteConfig {
            k_neighbors: 5,
            target_ratio: 1.0,
            seed: 0,
            standardize: false,
        }
    }
}

impl SmoteConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k_neighbors == 0 {
            return Err(Error::InvalidParameter("k_neighbors must be at least 1".into()));
        }
        if !(self.target_ratio > 0.0 && self.target_ratio <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "target_ratio must be in (0, 1], got {}",
                self.target_ratio
            )));
        }
        Ok(())
    }
}

/// One synthetic point with the indices (into the minority list) and the
/// weight it was interpolated from.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSample {
    pub vector: FeatureVector,
    pub base: usize,
    pub neighbor: usize,
    pub lambda: f64,
}

/// Indices of the `k` nearest other points for each of the first `n_bases`
/// points, by squared Euclidean distance; ties go to the lower index.
pub fn nearest_neighbors(points: &[&[f64]], n_bases: usize, k: usize) -> Vec<Vec<usize>> {
    (0..n_bases)
        .into_par_iter()
        .map(|i| {
            let mut d: Vec<(f64, usize)> = points
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(j, p)| {
                    let dist: f64 = p.iter().zip(points[i]).map(|(a, b)| (a - b) * (a - b)).sum();
                    (dist, j)
                })
                .collect();
            let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
            if k < d.len() {
                d.select_nth_unstable_by(k - 1, cmp);
                d.truncate(k);
            }
            d.sort_by(cmp);
            d.into_iter().map(|(_, j)| j).collect()
        })
        .collect()
}

fn standardized(minority: &[FeatureVector]) -> Vec<Vec<f64>> {
    let d = minority[0].values.len();
    let n = minority.len() as f64;
    let mut mean = vec![0.0; d];
    for v in minority {
        for (m, x) in mean.iter_mut().zip(&v.values) {
            *m += x / n;
        }
    }
    let mut sd = vec![0.0; d];
    for v in minority {
        for ((s, x), m) in sd.iter_mut().zip(&v.values).zip(&mean) {
            *s += (x - m) * (x - m) / n;
        }
    }
    let sd: Vec<f64> = sd.into_iter().map(|s| if s > 0.0 { s.sqrt() } else { 1.0 }).collect();
    minority
        .iter()
        .map(|v| v.values.iter().zip(&mean).zip(&sd).map(|((x, m), s)| (x - m) / s).collect())
        .collect()
}

fn generate(
    minority: &[FeatureVector],
    config: &SmoteConfig,
    n_synthetic: usize,
    mut lambda: impl FnMut(&mut ChaCha8Rng) -> f64,
) -> Result<Vec<SyntheticSample>> {
    config.validate()?;
    if minority.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "SMOTE needs at least 2 minority rows, got {}",
            minority.len()
        )));
    }
    let label = minority[0].label;
    if label.is_none() || minority.iter().any(|v| v.label != label) {
        return Err(Error::InvalidParameter("SMOTE input must share one class label".into()));
    }
    if n_synthetic == 0 {
        return Ok(Vec::new());
    }
    let mut k = config.k_neighbors;
    if k > minority.len() - 1 {
        log::warn!("k_neighbors {k} clamped to {} (minority size {})", minority.len() - 1, minority.len());
        k = minority.len() - 1;
    }
    let scaled;
    let points: Vec<&[f64]> = if config.standardize {
        scaled = standardized(minority);
        scaled.iter().map(Vec::as_slice).collect()
    } else {
        minority.iter().map(|v| v.values.as_slice()).collect()
    };
    let n_bases = n_synthetic.min(minority.len());
    let neighbors = nearest_neighbors(&points, n_bases, k);

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut out = Vec::with_capacity(n_synthetic);
    for s in 0..n_synthetic {
        let base = s % minority.len();
        let neighbor = neighbors[base][rng.random_range(0..k)];
        let lam = lambda(&mut rng);
        let (b, nb) = (&minority[base].values, &minority[neighbor].values);
        let values = b.iter().zip(nb).map(|(x, y)| x + lam * (y - x)).collect();
        out.push(SyntheticSample {
            vector: FeatureVector {
                post_id: format!("synthetic-{s}"),
                values,
                label,
                is_synthetic: true,
                degenerate: false,
            },
            base,
            neighbor,
            lambda: lam,
        });
    }
    Ok(out)
}

/// SMOTE with provenance for every emitted point.
pub fn smote_traced(
    minority: &[FeatureVector],
    config: &SmoteConfig,
    n_synthetic: usize,
) -> Result<Vec<SyntheticSample>> {
    generate(minority, config, n_synthetic, |rng| rng.random::<f64>())
}

/// `n_synthetic` new minority vectors. Bases cycle round-robin over the
/// input; each neighbor is uniform among the base's k nearest; λ ~ U[0, 1).
pub fn smote(minority: &[FeatureVector], config: &SmoteConfig, n_synthetic: usize) -> Result<Vec<FeatureVector>> {
    Ok(smote_traced(minority, config, n_synthetic)?
        .into_iter()
        .map(|s| s.vector)
        .collect())
}

/// Number of synthetic rows needed to lift `minority` to
/// round(target_ratio × majority).
pub fn synthetic_needed(minority: usize, majority: usize, target_ratio: f64) -> usize {
    ((target_ratio * majority as f64).round() as usize).saturating_sub(minority)
}

/// Appends synthetic minority rows after the untouched originals. Unlabelled
/// rows are carried through unchanged.
pub fn balance_training_set(train: &FeatureMatrix, config: &SmoteConfig) -> Result<FeatureMatrix> {
    config.validate()?;
    let (n_conf, n_non) = train.class_counts();
    if n_conf == 0 || n_non == 0 {
        return Err(Error::SingleClass);
    }
    let (minority_label, n_min, n_maj) = if n_conf <= n_non {
        (BinaryLabel::Confused, n_conf, n_non)
    } else {
        (BinaryLabel::NonConfused, n_non, n_conf)
    };
    let needed = synthetic_needed(n_min, n_maj, config.target_ratio);
    let mut out = train.clone();
    if needed == 0 {
        return Ok(out);
    }
    let minority: Vec<FeatureVector> = train
        .rows()
        .iter()
        .filter(|r| r.label == Some(minority_label))
        .cloned()
        .collect();
    out.extend(smote(&minority, config, needed)?)?;
    Ok(out)
}
