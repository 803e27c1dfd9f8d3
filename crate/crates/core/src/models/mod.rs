//! Binary classifiers: random forest (the principal model), Gaussian naive
//! Bayes and L2-regularized logistic regression.

pub mod forest;
pub mod logistic;
pub mod naive_bayes;
mod persist;

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::corpus::BinaryLabel;
use crate::error::{Error, Result};
use crate::features::{FeatureMatrix, FeatureSchema, FeatureVector};

pub use forest::{DecisionTree, RandomForest};
pub use logistic::LogisticModel;
pub use naive_bayes::GaussianNb;
pub use persist::{load_model, save_model, FORMAT_VERSION};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    RandomForest,
    GaussianNb,
    LogisticRegression,
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rf" | "random_forest" => Ok(ModelKind::RandomForest),
            "gnb" | "gaussian_nb" => Ok(ModelKind::GaussianNb),
            "lr" | "logistic_regression" => Ok(ModelKind::LogisticRegression),
            other => Err(Error::InvalidParameter(format!("unknown model kind {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub kind: ModelKind,
    pub n_trees: usize,
    /// Features tried per split; `None` means ⌊log₂ d⌋ + 1.
    pub max_features_per_split: Option<usize>,
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
    pub l2_penalty: f64,
    pub max_iters: usize,
    pub seed: u64,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            kind: ModelKind::RandomForest,
            n_trees: 100,
            max_features_per_split: None,
            max_depth: None,
            min_leaf: 1,
            l2_penalty: 1e-4,
            max_iters: 200,
            seed: 0,
        }
    }
}

impl ModelParams {
    pub fn with_kind(kind: ModelKind) -> Self {
        ModelParams { kind, ..Default::default() }
    }

    /// Resolved per-split feature count for `d` features.
    pub fn features_per_split(&self, d: usize) -> usize {
        self.max_features_per_split
            .unwrap_or_else(|| (d.max(1) as f64).log2().floor() as usize + 1)
            .min(d.max(1))
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        if self.n_trees == 0 {
            return Err(Error::InvalidParameter("n_trees must be at least 1".into()));
        }
        if let Some(m) = self.max_features_per_split {
            if m == 0 || m > d {
                return Err(Error::InvalidParameter(format!(
                    "max_features_per_split must be in 1..={d}, got {m}"
                )));
            }
        }
        if self.min_leaf == 0 {
            return Err(Error::InvalidParameter("min_leaf must be at least 1".into()));
        }
        if !(self.l2_penalty >= 0.0 && self.l2_penalty.is_finite()) {
            return Err(Error::InvalidParameter(format!("l2_penalty must be >= 0, got {}", self.l2_penalty)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ModelState {
    RandomForest(RandomForest),
    GaussianNb(GaussianNb),
    LogisticRegression(LogisticModel),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingMetadata {
    pub n_train: usize,
    pub n_confused: usize,
    pub n_nonconfused: usize,
    pub n_synthetic: usize,
    /// Non-finite inputs replaced by 0.
    pub imputed_values: usize,
    pub wall_time_seconds: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub label: BinaryLabel,
    pub p_confused: f64,
}

impl Prediction {
    pub fn from_probability(p_confused: f64) -> Self {
        Prediction {
            label: BinaryLabel::from_probability(p_confused),
            p_confused,
        }
    }
}

/// An immutable fitted classifier bound to one feature schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub kind: ModelKind,
    pub params: ModelParams,
    pub schema_hash: String,
    pub feature_names: Vec<String>,
    pub state: ModelState,
    pub metadata: TrainingMetadata,
}

/// Labelled rows as dense (x, y) with y = true for Confused. Non-finite
/// values become 0.
pub(crate) fn training_data(matrix: &FeatureMatrix) -> Result<(Vec<Vec<f64>>, Vec<bool>, usize)> {
    let mut xs = Vec::with_capacity(matrix.len());
    let mut ys = Vec::with_capacity(matrix.len());
    let mut imputed = 0;
    for row in matrix.rows() {
        let Some(label) = row.label else { continue };
        let mut v = row.values.clone();
        for x in v.iter_mut().filter(|x| !x.is_finite()) {
            *x = 0.0;
            imputed += 1;
        }
        xs.push(v);
        ys.push(label == BinaryLabel::Confused);
    }
    if xs.is_empty() {
        return Err(Error::InsufficientData("no labelled rows to train on".into()));
    }
    if ys.iter().all(|&y| y) || ys.iter().all(|&y| !y) {
        return Err(Error::SingleClass);
    }
    if imputed > 0 {
        log::warn!("imputed {imputed} non-finite feature values to 0");
    }
    Ok((xs, ys, imputed))
}

pub fn train(matrix: &FeatureMatrix, params: &ModelParams) -> Result<TrainedModel> {
    let start = Instant::now();
    let d = matrix.schema().len();
    if d == 0 {
        return Err(Error::InsufficientData("feature schema is empty".into()));
    }
    params.validate(d)?;
    let (xs, ys, imputed) = training_data(matrix)?;
    let state = match params.kind {
        ModelKind::RandomForest => ModelState::RandomForest(RandomForest::fit(&xs, &ys, params)),
        ModelKind::GaussianNb => ModelState::GaussianNb(GaussianNb::fit(&xs, &ys)),
        ModelKind::LogisticRegression => ModelState::LogisticRegression(LogisticModel::fit(&xs, &ys, params)),
    };
    let n_confused = ys.iter().filter(|&&y| y).count();
    Ok(TrainedModel {
        kind: params.kind,
        params: params.clone(),
        schema_hash: matrix.schema().hash().to_string(),
        feature_names: matrix.schema().names().to_vec(),
        state,
        metadata: TrainingMetadata {
            n_train: ys.len(),
            n_confused,
            n_nonconfused: ys.len() - n_confused,
            n_synthetic: matrix.rows().iter().filter(|r| r.is_synthetic && r.label.is_some()).count(),
            imputed_values: imputed,
            wall_time_seconds: start.elapsed().as_secs_f64(),
        },
    })
}

impl TrainedModel {
    pub fn check_schema(&self, schema: &FeatureSchema) -> Result<()> {
        if schema.hash() != self.schema_hash {
            return Err(Error::SchemaMismatch {
                expected: self.schema_hash.clone(),
                found: schema.hash().to_string(),
            });
        }
        Ok(())
    }

    /// P(Confused) for raw values in schema order. Callers must have checked
    /// the schema; non-finite values are treated as 0.
    pub fn p_confused(&self, values: &[f64]) -> f64 {
        let cleaned;
        let x = if values.iter().all(|v| v.is_finite()) {
            values
        } else {
            cleaned = values.iter().map(|v| if v.is_finite() { *v } else { 0.0 }).collect::<Vec<_>>();
            &cleaned
        };
        match &self.state {
            ModelState::RandomForest(m) => m.p_confused(x),
            ModelState::GaussianNb(m) => m.p_confused(x),
            ModelState::LogisticRegression(m) => m.p_confused(x),
        }
    }

    pub fn predict(&self, schema: &FeatureSchema, x: &FeatureVector) -> Result<Prediction> {
        self.check_schema(schema)?;
        if x.values.len() != self.feature_names.len() {
            return Err(Error::Matrix(format!(
                "row {} has {} values, model expects {}",
                x.post_id,
                x.values.len(),
                self.feature_names.len()
            )));
        }
        Ok(Prediction::from_probability(self.p_confused(&x.values)))
    }

    pub fn predict_matrix(&self, matrix: &FeatureMatrix) -> Result<Vec<Prediction>> {
        self.check_schema(matrix.schema())?;
        use rayon::prelude::*;
        Ok(matrix
            .rows()
            .par_iter()
            .map(|r| Prediction::from_probability(self.p_confused(&r.values)))
            .collect())
    }
}

#[cfg(test)]
pub(crate) mod toy {
    use super::*;

    /// 20 points separable by x0 + x1 > 1 with a clear margin.
    pub fn separable() -> FeatureMatrix {
        let schema = FeatureSchema::from_names(vec!["x0".into(), "x1".into()]).unwrap();
        let rows = (0..20)
            .map(|i| {
                let t = i as f64 / 19.0;
                let confused = i % 2 == 0;
                let shift = if confused { 0.9 } else { -0.9 };
                let x0 = 0.5 + shift * 0.5 + 0.3 * (t - 0.5);
                let x1 = 0.5 + shift * 0.5 - 0.3 * ((7.0 * t).sin());
                FeatureVector {
                    post_id: format!("p{i}"),
                    values: vec![x0, x1],
                    label: Some(if confused { BinaryLabel::Confused } else { BinaryLabel::NonConfused }),
                    is_synthetic: false,
                    degenerate: false,
                }
            })
            .collect();
        FeatureMatrix::new(schema, rows).unwrap()
    }
}
