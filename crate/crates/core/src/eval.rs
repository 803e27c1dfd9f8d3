//! Stratified k-fold cross-validation with SMOTE confined to training
//! folds, cross-domain evaluation, metrics and report emission.

use std::collections::HashSet;
use std::io;
use std::path::Path;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::{BinaryLabel, NeutralPolicy};
use crate::error::{Error, Result};
use crate::features::FeatureMatrix;
use crate::lexicon::DOMAIN_INCOMPATIBLE;
use crate::models::{train, ModelParams};
use crate::resample::{balance_training_set, SmoteConfig};

/// Test-fold index for every row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    pub seed: u64,
    pub assignments: Vec<usize>,
}

impl FoldPlan {
    /// Row indices of test fold `fold`, ascending.
    pub fn test_rows(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len()).filter(|&i| self.assignments[i] == fold).collect()
    }

    pub fn train_rows(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len()).filter(|&i| self.assignments[i] != fold).collect()
    }
}

/// Rows of each class are shuffled with `seed` and dealt round-robin into
/// `k` folds, Confused first; the deal position carries over between
/// classes so fold sizes also stay within one row of each other.
pub fn stratified_folds(labels: &[BinaryLabel], k: usize, seed: u64) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!("k must be at least 2, got {k}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignments = vec![0; labels.len()];
    let mut next = 0;
    for class in [BinaryLabel::Confused, BinaryLabel::NonConfused] {
        let mut rows: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if rows.len() < k {
            return Err(Error::InsufficientData(format!(
                "{} {class} rows cannot fill {k} folds",
                rows.len()
            )));
        }
        rows.shuffle(&mut rng);
        for r in rows {
            assignments[r] = next % k;
            next += 1;
        }
    }
    Ok(FoldPlan { k, seed, assignments })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
}

impl ConfusionCounts {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }

    fn add(&mut self, other: &ConfusionCounts) {
        self.tp += other.tp;
        self.fp += other.fp;
        self.fn_ += other.fn_;
        self.tn += other.tn;
    }
}

/// Precision, recall and F1 for one class; `None` where the ratio has a
/// zero denominator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
    pub support: usize,
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

impl ClassMetrics {
    fn new(tp: usize, fp: usize, fn_: usize) -> Self {
        ClassMetrics {
            precision: ratio(tp, tp + fp),
            recall: ratio(tp, tp + fn_),
            // Equals the harmonic mean whenever both ratios exist.
            f1: ratio(2 * tp, 2 * tp + fp + fn_),
            support: tp + fn_,
        }
    }
}

/// Confused is the positive class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub counts: ConfusionCounts,
    pub confused: ClassMetrics,
    pub non_confused: ClassMetrics,
    pub macro_f1: Option<f64>,
    /// Micro-averaged F1 over both classes (equal to accuracy).
    pub micro_f1: f64,
    pub accuracy: f64,
    pub wall_time_seconds: f64,
}

impl Metrics {
    pub fn from_counts(counts: ConfusionCounts) -> Self {
        let c = counts;
        let confused = ClassMetrics::new(c.tp, c.fp, c.fn_);
        let non_confused = ClassMetrics::new(c.tn, c.fn_, c.fp);
        let macro_f1 = confused.f1.zip(non_confused.f1).map(|(a, b)| (a + b) / 2.0);
        let accuracy = ratio(c.tp + c.tn, c.total()).unwrap_or(0.0);
        Metrics {
            counts,
            confused,
            non_confused,
            macro_f1,
            micro_f1: accuracy,
            accuracy,
            wall_time_seconds: 0.0,
        }
    }

    /// Headline score: Confused-class F1.
    pub fn f1(&self) -> Option<f64> {
        self.confused.f1
    }
}

pub fn compute_metrics(predictions: &[BinaryLabel], truth: &[BinaryLabel]) -> Result<Metrics> {
    if predictions.len() != truth.len() || truth.is_empty() {
        return Err(Error::InvalidParameter(format!(
            "need equal non-empty prediction and truth lists, got {} and {}",
            predictions.len(),
            truth.len()
        )));
    }
    let mut c = ConfusionCounts::default();
    for (p, t) in predictions.iter().zip(truth) {
        match (p, t) {
            (BinaryLabel::Confused, BinaryLabel::Confused) => c.tp += 1,
            (BinaryLabel::Confused, BinaryLabel::NonConfused) => c.fp += 1,
            (BinaryLabel::NonConfused, BinaryLabel::Confused) => c.fn_ += 1,
            (BinaryLabel::NonConfused, BinaryLabel::NonConfused) => c.tn += 1,
        }
    }
    Ok(Metrics::from_counts(c))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowPrediction {
    pub id: String,
    pub truth: BinaryLabel,
    pub label: BinaryLabel,
    pub p_confused: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub metrics: Metrics,
    pub n_train_real: usize,
    pub n_train_synthetic: usize,
    /// Always zero; recorded so the leakage guarantee is auditable.
    pub n_test_synthetic: usize,
    pub predictions: Vec<RowPrediction>,
}

impl FoldResult {
    pub fn test_ids(&self) -> impl Iterator<Item = &str> {
        self.predictions.iter().map(|p| p.id.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvaluationKind {
    CrossValidation,
    CrossDomain,
}

/// Everything needed to rerun an evaluation exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigSnapshot {
    pub model: ModelParams,
    pub smote: SmoteConfig,
    pub k: Option<usize>,
    pub seed: u64,
    pub features: Vec<String>,
    pub neutral_policy: Option<NeutralPolicy>,
    pub drop_incompatible: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    /// Digest of the configuration and dataset fingerprints.
    pub run_id: String,
    pub kind: EvaluationKind,
    pub config: ConfigSnapshot,
    pub dataset_fingerprints: Vec<String>,
    pub folds: Vec<FoldResult>,
    /// Micro-aggregated over all folds.
    pub pooled: Metrics,
    pub wall_time_seconds: f64,
}

impl EvaluationReport {
    fn assemble(
        kind: EvaluationKind,
        config: ConfigSnapshot,
        dataset_fingerprints: Vec<String>,
        folds: Vec<FoldResult>,
        started: Instant,
    ) -> Result<Self> {
        let mut counts = ConfusionCounts::default();
        for f in &folds {
            counts.add(&f.metrics.counts);
        }
        let mut pooled = Metrics::from_counts(counts);
        let wall = started.elapsed().as_secs_f64();
        pooled.wall_time_seconds = wall;
        let mut h = Sha256::new();
        h.update(serde_json::to_vec(&(kind, &config, &dataset_fingerprints))?);
        let run_id = hex::encode(&h.finalize()[..8]);
        Ok(EvaluationReport {
            run_id,
            kind,
            config,
            dataset_fingerprints,
            folds,
            pooled,
            wall_time_seconds: wall,
        })
    }

    /// The report with every timing field zeroed, for byte comparisons.
    pub fn without_timings(&self) -> Self {
        let mut r = self.clone();
        r.wall_time_seconds = 0.0;
        r.pooled.wall_time_seconds = 0.0;
        for f in &mut r.folds {
            f.metrics.wall_time_seconds = 0.0;
        }
        r
    }

    /// Flat Confused-class table: one row per fold, then a pooled row.
    pub fn write_csv<W: io::Write>(&self, writer: W) -> Result<()> {
        let err = |source| Error::Csv {
            path: "<report>".into(),
            source,
        };
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["run_id", "fold", "class", "precision", "recall", "f1", "accuracy", "tp", "fp", "fn", "tn"])
            .map_err(err)?;
        let fmt = |v: Option<f64>| v.map(|x| format!("{x:?}")).unwrap_or_default();
        let rows = self
            .folds
            .iter()
            .map(|f| (f.fold.to_string(), &f.metrics))
            .chain(std::iter::once(("pooled".to_string(), &self.pooled)));
        for (fold, m) in rows {
            let c = m.counts;
            w.write_record([
                self.run_id.clone(),
                fold,
                BinaryLabel::Confused.as_str().to_string(),
                fmt(m.confused.precision),
                fmt(m.confused.recall),
                fmt(m.confused.f1),
                format!("{:?}", m.accuracy),
                c.tp.to_string(),
                c.fp.to_string(),
                c.fn_.to_string(),
                c.tn.to_string(),
            ])
            .map_err(err)?;
        }
        w.flush().map_err(|e| Error::io("<report>", e))?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

pub fn emit_report(report: &EvaluationReport, format: ReportFormat, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = io::BufWriter::new(file);
    match format {
        ReportFormat::Json => {
            serde_json::to_writer_pretty(&mut w, report)?;
            io::Write::write_all(&mut w, b"\n").map_err(|e| Error::io(path, e))?;
        }
        ReportFormat::Csv => report.write_csv(&mut w)?,
    }
    io::Write::flush(&mut w).map_err(|e| Error::io(path, e))
}

/// Real, labelled rows only.
fn evaluable(matrix: &FeatureMatrix) -> FeatureMatrix {
    let keep: Vec<usize> = (0..matrix.len())
        .filter(|&i| {
            let r = &matrix.rows()[i];
            r.label.is_some() && !r.is_synthetic
        })
        .collect();
    if keep.len() != matrix.len() {
        log::info!("evaluating {} of {} rows (unlabelled and synthetic rows set aside)", keep.len(), matrix.len());
    }
    matrix.select_rows(&keep)
}

/// Balance `train` with SMOTE, fit, and predict every row of `test`.
fn fit_and_score(
    fold: usize,
    train_m: &FeatureMatrix,
    test_m: &FeatureMatrix,
    params: &ModelParams,
    smote: &SmoteConfig,
) -> Result<FoldResult> {
    let started = Instant::now();
    let balanced = balance_training_set(train_m, smote)?;
    let model = train(&balanced, params)?;
    let preds = model.predict_matrix(test_m)?;
    let predictions: Vec<RowPrediction> = test_m
        .rows()
        .iter()
        .zip(preds)
        .map(|(r, p)| RowPrediction {
            id: r.post_id.clone(),
            truth: r.label.expect("evaluable rows are labelled"),
            label: p.label,
            p_confused: p.p_confused,
        })
        .collect();
    let labels: Vec<BinaryLabel> = predictions.iter().map(|p| p.label).collect();
    let truth: Vec<BinaryLabel> = predictions.iter().map(|p| p.truth).collect();
    let mut metrics = compute_metrics(&labels, &truth)?;
    metrics.wall_time_seconds = started.elapsed().as_secs_f64();
    let n_syn = balanced.len() - train_m.len();
    Ok(FoldResult {
        fold,
        metrics,
        n_train_real: train_m.len(),
        n_train_synthetic: n_syn,
        n_test_synthetic: test_m.rows().iter().filter(|r| r.is_synthetic).count(),
        predictions,
    })
}

/// k-fold CV. Each fold balances only its training rows (SMOTE seed and
/// model seed derived from the configured seeds and the fold index) and is
/// scored on its untouched real test rows.
pub fn cross_validate(
    matrix: &FeatureMatrix,
    params: &ModelParams,
    smote: &SmoteConfig,
    k: usize,
    seed: u64,
) -> Result<EvaluationReport> {
    let started = Instant::now();
    let data = evaluable(matrix);
    let labels: Vec<BinaryLabel> = data.rows().iter().map(|r| r.label.unwrap()).collect();
    let plan = stratified_folds(&labels, k, seed)?;
    let folds = (0..k)
        .into_par_iter()
        .map(|f| {
            let train_m = data.select_rows(&plan.train_rows(f));
            let test_m = data.select_rows(&plan.test_rows(f));
            let fold_params = ModelParams {
                seed: crate::derive_seed(params.seed, f as u64),
                ..params.clone()
            };
            let fold_smote = SmoteConfig {
                seed: crate::derive_seed(smote.seed, f as u64),
                ..smote.clone()
            };
            fit_and_score(f, &train_m, &test_m, &fold_params, &fold_smote).map_err(|e| Error::Fold {
                fold: f,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let config = ConfigSnapshot {
        model: params.clone(),
        smote: smote.clone(),
        k: Some(k),
        seed,
        features: data.schema().names().to_vec(),
        neutral_policy: None,
        drop_incompatible: None,
    };
    EvaluationReport::assemble(EvaluationKind::CrossValidation, config, vec![data.fingerprint()], folds, started)
}

/// Whether a feature derives from a category that does not transfer
/// across subject domains.
pub fn is_domain_incompatible(feature: &str) -> bool {
    DOMAIN_INCOMPATIBLE
        .iter()
        .any(|c| feature == *c || feature.strip_suffix("_rate") == Some(c))
}

/// Features present in both schemas, in `train` order, optionally without
/// the domain-incompatible ones.
pub fn shared_features(train_m: &FeatureMatrix, test_m: &FeatureMatrix, drop_incompatible: bool) -> Vec<String> {
    let test_names: HashSet<&str> = test_m.schema().names().iter().map(String::as_str).collect();
    train_m
        .schema()
        .names()
        .iter()
        .filter(|n| test_names.contains(n.as_str()))
        .filter(|n| !(drop_incompatible && is_domain_incompatible(n)))
        .cloned()
        .collect()
}

/// Train on all of one domain (SMOTE-balanced), score every labelled row of
/// the other. `features` defaults to [`shared_features`].
pub fn cross_domain_evaluate(
    train_m: &FeatureMatrix,
    test_m: &FeatureMatrix,
    params: &ModelParams,
    smote: &SmoteConfig,
    features: Option<&[String]>,
    drop_incompatible: bool,
) -> Result<EvaluationReport> {
    let started = Instant::now();
    let names: Vec<String> = match features {
        Some(f) => f
            .iter()
            .filter(|n| !(drop_incompatible && is_domain_incompatible(n)))
            .cloned()
            .collect(),
        None => shared_features(train_m, test_m, drop_incompatible),
    };
    if names.is_empty() {
        return Err(Error::SchemaMismatch {
            expected: format!("a feature shared with {}", train_m.schema()),
            found: format!("{}", test_m.schema()),
        });
    }
    let train_p = evaluable(&train_m.project(&names)?);
    let test_p = evaluable(&test_m.project(&names)?);
    if test_p.is_empty() {
        return Err(Error::InsufficientData("test domain has no labelled rows".into()));
    }
    let fold = fit_and_score(0, &train_p, &test_p, params, smote)?;
    let config = ConfigSnapshot {
        model: params.clone(),
        smote: smote.clone(),
        k: None,
        seed: params.seed,
        features: names,
        neutral_policy: None,
        drop_incompatible: Some(drop_incompatible),
    };
    EvaluationReport::assemble(
        EvaluationKind::CrossDomain,
        config,
        vec![train_p.fingerprint(), test_p.fingerprint()],
        vec![fold],
        started,
    )
}
