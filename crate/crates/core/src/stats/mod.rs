//! Statistical screening and selection of features.

pub mod inference;
pub mod selection;
pub mod special;

pub use inference::{
    anova_two_group, f_survival, levene, pearson_r, shapiro_wilk, t_two_sided, AnovaResult,
    LeveneResult, ShapiroWilk,
};
pub use selection::{
    benjamini_hochberg, collinearity_filter, select_features, CollinearDrop, CollinearityOutcome,
    FeatureTestResult, ScreeningMode, SelectionConfig, SelectionReport,
};

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.iter().sum::<f64>() / values.len() as f64
}

/// Mean and sample (n − 1) standard deviation; the SD of fewer than two
/// values is 0.
pub fn mean_and_sd(values: &[f64]) -> (f64, f64) {
    let m = mean(values);
    if values.len() < 2 {
        return (m, 0.0);
    }
    let ss: f64 = values.iter().map(|x| (x - m).powi(2)).sum();
    (m, (ss / (values.len() - 1) as f64).sqrt())
}
