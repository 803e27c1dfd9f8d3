//! Feature selection: per-feature screening and ANOVA, Benjamini–Hochberg
//! false-discovery control, then a greedy multicollinearity filter.

use std::collections::{BTreeMap, HashSet};
use std::io;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::inference::{anova_two_group, levene, pearson_r, shapiro_wilk};
use crate::corpus::BinaryLabel;
use crate::error::{Error, Result};
use crate::features::FeatureMatrix;

/// What failing a normality or variance-homogeneity check does.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScreeningMode {
    /// Checks are skipped.
    Off,
    /// Checks run and failures are reported, but nothing is dropped.
    #[default]
    Advisory,
    /// Failing features are dropped before multiple-testing control.
    Strict,
}

impl std::str::FromStr for ScreeningMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "off" => Ok(ScreeningMode::Off),
            "advisory" => Ok(ScreeningMode::Advisory),
            "strict" => Ok(ScreeningMode::Strict),
            other => Err(Error::InvalidParameter(format!("unknown screening mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionConfig {
    /// False discovery rate for Benjamini–Hochberg.
    pub q: f64,
    /// Pairs with |r| above this are collinear.
    pub r_threshold: f64,
    pub screening: ScreeningMode,
    /// Significance level of the screening checks.
    pub screening_alpha: f64,
    /// Seed for subsampling large groups in the normality check.
    pub seed: u64,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        SelectionConfig {
            q: 0.05,
            r_threshold: 0.9,
            screening: ScreeningMode::Advisory,
            screening_alpha: 0.05,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureTestResult {
    pub feature: String,
    #[serde(rename = "F")]
    pub f: f64,
    pub p: f64,
    #[serde(rename = "eta2")]
    pub eta_squared: f64,
    pub mean_confused: f64,
    pub sd_confused: f64,
    pub mean_nonconfused: f64,
    pub sd_nonconfused: f64,
    pub n_confused: usize,
    pub n_nonconfused: usize,
    pub normality_p: Option<[f64; 2]>,
    pub levene_p: Option<f64>,
    pub retained: bool,
    pub drop_reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollinearDrop {
    pub dropped: String,
    pub kept: String,
    pub r: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollinearityOutcome {
    /// Surviving features, in input (name) order.
    pub retained: Vec<String>,
    pub drops: Vec<CollinearDrop>,
}

/// Greedy multicollinearity filter. Pairs are visited in descending |r|;
/// whenever both members of a pair with |r| > `threshold` are still
/// retained, the one with the smaller F is dropped (equal F: the
/// lexicographically later name). Only features present in `f_by_feature`
/// are considered; constant columns never correlate.
pub fn collinearity_filter(
    matrix: &FeatureMatrix,
    f_by_feature: &BTreeMap<String, f64>,
    threshold: f64,
) -> Result<CollinearityOutcome> {
    let names: Vec<&String> = f_by_feature.keys().collect();
    let columns = names
        .iter()
        .map(|n| {
            matrix
                .schema()
                .index_of(n)
                .map(|i| matrix.column(i))
                .ok_or_else(|| Error::UnknownFeature(n.to_string()))
        })
        .collect::<Result<Vec<_>>>()?;
    let pairs: Vec<(usize, usize)> = (0..names.len())
        .flat_map(|i| (i + 1..names.len()).map(move |j| (i, j)))
        .collect();
    let mut correlated: Vec<(usize, usize, f64)> = pairs
        .par_iter()
        .filter_map(|&(i, j)| {
            let r = pearson_r(&columns[i], &columns[j]).ok()?;
            (r.abs() > threshold).then_some((i, j, r))
        })
        .collect();
    correlated.sort_by(|a, b| {
        b.2.abs()
            .total_cmp(&a.2.abs())
            .then_with(|| (a.0, a.1).cmp(&(b.0, b.1)))
    });

    let mut alive = vec![true; names.len()];
    let mut drops = Vec::new();
    for (i, j, r) in correlated {
        if !(alive[i] && alive[j]) {
            continue;
        }
        let (fi, fj) = (f_by_feature[names[i]], f_by_feature[names[j]]);
        // names are sorted, so j is the lexicographically later one.
        let (drop, keep) = if fi > fj { (j, i) } else if fj > fi { (i, j) } else { (j, i) };
        alive[drop] = false;
        drops.push(CollinearDrop {
            dropped: names[drop].clone(),
            kept: names[keep].clone(),
            r,
        });
    }
    let retained = names
        .iter()
        .zip(&alive)
        .filter(|(_, a)| **a)
        .map(|(n, _)| n.to_string())
        .collect();
    Ok(CollinearityOutcome { retained, drops })
}

/// Benjamini–Hochberg step-up procedure. Returns the names of the rejected
/// (significant) hypotheses in ascending p order: the largest k with
/// p_(k) <= k q / m, and every hypothesis ranked at or before it.
pub fn benjamini_hochberg(pvalues: &[(String, f64)], q: f64) -> Vec<String> {
    let m = pvalues.len();
    let mut sorted: Vec<&(String, f64)> = pvalues.iter().collect();
    sorted.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
    let k = sorted
        .iter()
        .enumerate()
        .rev()
        .find(|(i, (_, p))| *p <= (i + 1) as f64 * q / m as f64)
        .map_or(0, |(i, _)| i + 1);
    sorted[..k].iter().map(|(n, _)| n.clone()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegenerateFeature {
    pub feature: String,
    pub reason: String,
}

/// Machine-readable effect-size table for one matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionReport {
    /// Every tested feature, by η² descending (ties by name).
    pub results: Vec<FeatureTestResult>,
    /// Features that could not be tested (e.g. zero variance).
    pub degenerate: Vec<DegenerateFeature>,
    pub rejected_by_normality: Vec<String>,
    pub rejected_by_homogeneity: Vec<String>,
    pub rejected_by_collinearity: Vec<CollinearDrop>,
    /// Significant under Benjamini–Hochberg, before the collinearity filter.
    pub retained_after_bh: Vec<String>,
    /// Final selection, in ranking order.
    pub retained: Vec<String>,
    pub q: f64,
    pub r_threshold: f64,
    pub screening: ScreeningMode,
}

impl SelectionReport {
    pub fn ranked_names(&self) -> Vec<&str> {
        self.results.iter().map(|r| r.feature.as_str()).collect()
    }

    pub fn get(&self, feature: &str) -> Option<&FeatureTestResult> {
        self.results.iter().find(|r| r.feature == feature)
    }

    pub fn write_csv<W: io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let err = |source| Error::Csv {
            path: "<selection report>".into(),
            source,
        };
        w.write_record([
            "feature",
            "F",
            "p",
            "eta2",
            "mean_confused",
            "sd_confused",
            "mean_nonconfused",
            "sd_nonconfused",
            "retained",
            "drop_reason",
        ])
        .map_err(err)?;
        for r in &self.results {
            w.write_record([
                r.feature.clone(),
                format!("{:?}", r.f),
                format!("{:?}", r.p),
                format!("{:?}", r.eta_squared),
                format!("{:?}", r.mean_confused),
                format!("{:?}", r.sd_confused),
                format!("{:?}", r.mean_nonconfused),
                format!("{:?}", r.sd_nonconfused),
                r.retained.to_string(),
                r.drop_reason.clone().unwrap_or_default(),
            ])
            .map_err(err)?;
        }
        for d in &self.degenerate {
            let mut rec = vec![d.feature.clone()];
            rec.extend(std::iter::repeat_n(String::new(), 7));
            rec.push("false".into());
            rec.push(d.reason.clone());
            w.write_record(&rec).map_err(err)?;
        }
        w.flush().map_err(|e| Error::io("<selection report>", e))?;
        Ok(())
    }
}

enum Tested {
    Ok(Box<FeatureTestResult>, bool, bool),
    Degenerate(DegenerateFeature),
}

fn test_feature(
    name: &str,
    confused: &[f64],
    nonconfused: &[f64],
    config: &SelectionConfig,
    seed: u64,
) -> Tested {
    let anova = match anova_two_group(confused, nonconfused) {
        Ok(a) => a,
        Err(e) => {
            return Tested::Degenerate(DegenerateFeature {
                feature: name.to_string(),
                reason: e.to_string(),
            })
        }
    };
    let (mut normality_p, mut levene_p) = (None, None);
    let (mut normal_ok, mut homog_ok) = (true, true);
    if config.screening != ScreeningMode::Off {
        let sw = |g: &[f64], s| shapiro_wilk(g, s).map(|r| r.p).unwrap_or(0.0);
        let pc = sw(confused, seed);
        let pn = sw(nonconfused, seed ^ 1);
        normality_p = Some([pc, pn]);
        normal_ok = pc >= config.screening_alpha && pn >= config.screening_alpha;
        let lp = levene(&[confused, nonconfused]).map(|r| r.p).unwrap_or(0.0);
        levene_p = Some(lp);
        homog_ok = lp >= config.screening_alpha;
    }
    Tested::Ok(
        Box::new(FeatureTestResult {
            feature: name.to_string(),
            f: anova.f,
            p: anova.p,
            eta_squared: anova.eta_squared,
            mean_confused: anova.mean_a,
            sd_confused: anova.sd_a,
            mean_nonconfused: anova.mean_b,
            sd_nonconfused: anova.sd_b,
            n_confused: anova.n_a,
            n_nonconfused: anova.n_b,
            normality_p,
            levene_p,
            retained: false,
            drop_reason: None,
        }),
        normal_ok,
        homog_ok,
    )
}

/// Screening, per-feature ANOVA, BH at `config.q` over the surviving
/// p-values, then the collinearity filter over the BH-significant set.
pub fn select_features(matrix: &FeatureMatrix, config: &SelectionConfig) -> Result<SelectionReport> {
    if !(config.q > 0.0 && config.q < 1.0) {
        return Err(Error::InvalidParameter(format!("q must be in (0, 1), got {}", config.q)));
    }
    let (n_conf, n_non) = matrix.class_counts();
    if n_conf == 0 || n_non == 0 {
        return Err(Error::SingleClass);
    }
    if n_conf < 2 || n_non < 2 {
        return Err(Error::InsufficientData(format!(
            "each class needs at least 2 rows ({n_conf} confused, {n_non} non-confused)"
        )));
    }
    let names = matrix.schema().names();
    let tested: Vec<Tested> = (0..names.len())
        .into_par_iter()
        .map(|j| {
            let mut conf = Vec::with_capacity(n_conf);
            let mut non = Vec::with_capacity(n_non);
            for row in matrix.rows() {
                match row.label {
                    Some(BinaryLabel::Confused) => conf.push(row.values[j]),
                    Some(BinaryLabel::NonConfused) => non.push(row.values[j]),
                    None => {}
                }
            }
            test_feature(&names[j], &conf, &non, config, crate::derive_seed(config.seed, j as u64))
        })
        .collect();

    let mut results = Vec::new();
    let mut degenerate = Vec::new();
    let mut rejected_by_normality = Vec::new();
    let mut rejected_by_homogeneity = Vec::new();
    for t in tested {
        match t {
            Tested::Degenerate(d) => {
                log::info!("feature {} not testable: {}", d.feature, d.reason);
                degenerate.push(d);
            }
            Tested::Ok(mut r, normal_ok, homog_ok) => {
                if !normal_ok {
                    rejected_by_normality.push(r.feature.clone());
                }
                if !homog_ok {
                    rejected_by_homogeneity.push(r.feature.clone());
                }
                if config.screening == ScreeningMode::Strict {
                    if !normal_ok {
                        r.drop_reason = Some("normality".into());
                    } else if !homog_ok {
                        r.drop_reason = Some("homogeneity".into());
                    }
                }
                results.push(*r);
            }
        }
    }
    if config.screening == ScreeningMode::Advisory
        && !(rejected_by_normality.is_empty() && rejected_by_homogeneity.is_empty())
    {
        log::info!(
            "screening (advisory): {} features fail normality, {} fail homogeneity",
            rejected_by_normality.len(),
            rejected_by_homogeneity.len()
        );
    }

    let candidates: Vec<(String, f64)> = results
        .iter()
        .filter(|r| r.drop_reason.is_none())
        .map(|r| (r.feature.clone(), r.p))
        .collect();
    let retained_after_bh = benjamini_hochberg(&candidates, config.q);
    let significant: HashSet<&str> = retained_after_bh.iter().map(String::as_str).collect();
    for r in results.iter_mut() {
        if r.drop_reason.is_none() && !significant.contains(r.feature.as_str()) {
            r.drop_reason = Some("not_significant".into());
        }
    }

    let f_map: BTreeMap<String, f64> = results
        .iter()
        .filter(|r| significant.contains(r.feature.as_str()))
        .map(|r| (r.feature.clone(), r.f))
        .collect();
    let collinear = collinearity_filter(matrix, &f_map, config.r_threshold)?;
    for d in &collinear.drops {
        if let Some(r) = results.iter_mut().find(|r| r.feature == d.dropped) {
            r.drop_reason = Some(format!("collinear_with:{}", d.kept));
        }
    }
    let kept: HashSet<&str> = collinear.retained.iter().map(String::as_str).collect();
    for r in results.iter_mut() {
        r.retained = kept.contains(r.feature.as_str());
    }

    results.sort_by(|a, b| {
        b.eta_squared
            .total_cmp(&a.eta_squared)
            .then_with(|| a.feature.cmp(&b.feature))
    });
    let retained = results
        .iter()
        .filter(|r| r.retained)
        .map(|r| r.feature.clone())
        .collect();
    Ok(SelectionReport {
        results,
        degenerate,
        rejected_by_normality,
        rejected_by_homogeneity,
        rejected_by_collinearity: collinear.drops,
        retained_after_bh,
        retained,
        q: config.q,
        r_threshold: config.r_threshold,
        screening: config.screening,
    })
}
