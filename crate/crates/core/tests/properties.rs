//! Pipeline invariants as property tests.

use std::collections::HashSet;

use confusion_detect::corpus::{binarize, BinaryLabel, Corpus, Domain, NeutralPolicy, Post};
use confusion_detect::eval::{compute_metrics, stratified_folds, ConfusionCounts, Metrics};
use confusion_detect::features::{FeatureMatrix, FeatureSchema, FeatureVector};
use confusion_detect::models::{train, ModelKind, ModelParams, Prediction};
use confusion_detect::resample::{balance_training_set, smote_traced, SmoteConfig};
use proptest::prelude::*;

fn row(id: String, values: Vec<f64>, label: BinaryLabel) -> FeatureVector {
    FeatureVector { post_id: id, values, label: Some(label), is_synthetic: false, degenerate: false }
}

fn label(confused: bool) -> BinaryLabel {
    if confused {
        BinaryLabel::Confused
    } else {
        BinaryLabel::NonConfused
    }
}

fn matrix(points: &[(Vec<f64>, bool)]) -> FeatureMatrix {
    let d = points[0].0.len();
    let schema = FeatureSchema::from_names((0..d).map(|j| format!("f{j}")).collect()).unwrap();
    let rows = points.iter().enumerate().map(|(i, (v, c))| row(format!("r{i}"), v.clone(), label(*c))).collect();
    FeatureMatrix::new(schema, rows).unwrap()
}

fn labelled_points(d: usize) -> impl Strategy<Value = Vec<(Vec<f64>, bool)>> {
    prop::collection::vec((prop::collection::vec(-5.0f64..5.0, d), any::<bool>()), 8..40)
        .prop_filter("both classes", |v| v.iter().filter(|p| p.1).count() >= 2 && v.iter().filter(|p| !p.1).count() >= 2)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn neutral_policy_partitions_posts(scores in prop::collection::vec(prop::sample::select(vec![1.0, 2.0, 3.0, 4.0, 4.0, 5.0, 6.0, 7.0]), 1..200)) {
        let posts: Vec<Post> = scores.iter().enumerate().map(|(i, s)| Post {
            id: format!("p{i}"),
            text: "some text".into(),
            confusion_score: *s,
            domain: Domain::Education,
        }).collect();
        let inc = Corpus::from_posts(posts.clone(), NeutralPolicy::IncludeAsConfused).unwrap().class_counts();
        let exc = Corpus::from_posts(posts, NeutralPolicy::Exclude).unwrap().class_counts();
        let n = scores.len();
        let neutral = scores.iter().filter(|s| **s == 4.0).count();
        prop_assert_eq!(inc.confused + inc.non_confused, n);
        prop_assert_eq!(inc.excluded, 0);
        prop_assert_eq!(exc.confused + exc.non_confused + exc.excluded, n);
        prop_assert_eq!(exc.excluded, neutral);
        prop_assert_eq!(inc.confused, exc.confused + neutral);
        prop_assert_eq!(inc.non_confused, exc.non_confused);
    }

    #[test]
    fn binarize_is_monotone(a in 1.0f64..=7.0, b in 1.0f64..=7.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        for policy in [NeutralPolicy::IncludeAsConfused, NeutralPolicy::Exclude] {
            let l = binarize(lo, policy).unwrap();
            let h = binarize(hi, policy).unwrap();
            if l == Some(BinaryLabel::Confused) {
                prop_assert_eq!(h, Some(BinaryLabel::Confused));
            }
        }
    }

    #[test]
    fn stratified_folds_partition_and_balance(n_conf in 3usize..60, n_non in 3usize..120, k in 2usize..4, seed in any::<u64>()) {
        let mut labels = vec![BinaryLabel::Confused; n_conf];
        labels.extend(vec![BinaryLabel::NonConfused; n_non]);
        let plan = stratified_folds(&labels, k, seed).unwrap();
        let mut seen = vec![0usize; labels.len()];
        for f in 0..k {
            let test = plan.test_rows(f);
            let train: HashSet<usize> = plan.train_rows(f).into_iter().collect();
            prop_assert_eq!(test.len() + train.len(), labels.len());
            let conf = test.iter().filter(|&&i| labels[i] == BinaryLabel::Confused).count() as f64;
            prop_assert!((conf - n_conf as f64 / k as f64).abs() <= 1.0);
            prop_assert!(((test.len() as f64 - conf) - n_non as f64 / k as f64).abs() <= 1.0);
            for i in test {
                prop_assert!(!train.contains(&i));
                seen[i] += 1;
            }
        }
        prop_assert!(seen.iter().all(|&c| c == 1));
        prop_assert_eq!(stratified_folds(&labels, k, seed).unwrap(), plan);
    }

    #[test]
    fn pooled_counts_match_concatenated_stream(folds in prop::collection::vec(prop::collection::vec((any::<bool>(), any::<bool>()), 1..40), 1..10)) {
        let mut summed = ConfusionCounts::default();
        let (mut all_pred, mut all_truth) = (Vec::new(), Vec::new());
        for f in &folds {
            let pred: Vec<BinaryLabel> = f.iter().map(|p| label(p.0)).collect();
            let truth: Vec<BinaryLabel> = f.iter().map(|p| label(p.1)).collect();
            let m = compute_metrics(&pred, &truth).unwrap();
            prop_assert_eq!(m.counts.total(), f.len());
            summed.tp += m.counts.tp;
            summed.fp += m.counts.fp;
            summed.fn_ += m.counts.fn_;
            summed.tn += m.counts.tn;
            all_pred.extend(pred);
            all_truth.extend(truth);
        }
        let pooled = Metrics::from_counts(summed);
        let stream = compute_metrics(&all_pred, &all_truth).unwrap();
        prop_assert_eq!(pooled.counts, stream.counts);
        match (pooled.f1(), stream.f1()) {
            (Some(a), Some(b)) => prop_assert!((a - b).abs() <= 1e-12),
            (a, b) => prop_assert_eq!(a, b),
        }
        if let (Some(p), Some(r), Some(f)) = (stream.confused.precision, stream.confused.recall, stream.confused.f1) {
            if p + r > 0.0 {
                prop_assert!((f - 2.0 * p * r / (p + r)).abs() <= 1e-12);
            }
        }
        prop_assert!((stream.micro_f1 - stream.accuracy).abs() <= 1e-12);
    }

    #[test]
    fn ties_resolve_towards_confused(truth in prop::collection::vec(any::<bool>(), 1..50)) {
        prop_assume!(truth.iter().any(|t| *t));
        let pred: Vec<BinaryLabel> = truth.iter().map(|_| Prediction::from_probability(0.5).label).collect();
        let truth: Vec<BinaryLabel> = truth.iter().map(|t| label(*t)).collect();
        prop_assert_eq!(compute_metrics(&pred, &truth).unwrap().confused.recall, Some(1.0));
    }

    #[test]
    fn smote_points_lie_on_segments(points in prop::collection::vec(prop::collection::vec(-10.0f64..10.0, 3), 2..25), k in 1usize..6, seed in any::<u64>(), n in 1usize..50) {
        let minority: Vec<FeatureVector> = points.iter().enumerate().map(|(i, v)| row(format!("m{i}"), v.clone(), BinaryLabel::Confused)).collect();
        let cfg = SmoteConfig { k_neighbors: k, seed, ..Default::default() };
        let out = smote_traced(&minority, &cfg, n).unwrap();
        prop_assert_eq!(out.len(), n);
        for s in &out {
            let b = &points[s.base];
            let q = &points[s.neighbor];
            prop_assert!(s.base != s.neighbor);
            prop_assert!((0.0..=1.0).contains(&s.lambda));
            for j in 0..3 {
                prop_assert!((s.vector.values[j] - (b[j] + s.lambda * (q[j] - b[j]))).abs() <= 1e-9);
            }
        }
        prop_assert_eq!(&smote_traced(&minority, &cfg, n).unwrap(), &out);
    }

    #[test]
    fn balancing_keeps_originals_and_reaches_ratio(points in labelled_points(2), seed in any::<u64>()) {
        let m = matrix(&points);
        let b = balance_training_set(&m, &SmoteConfig { seed, ..Default::default() }).unwrap();
        prop_assert_eq!(&b.rows()[..m.len()], m.rows());
        let (c, n) = b.class_counts();
        prop_assert_eq!(c, n);
        prop_assert!(b.rows()[m.len()..].iter().all(|r| r.is_synthetic));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn training_is_seed_deterministic(points in labelled_points(3), seed in any::<u64>()) {
        let m = matrix(&points);
        for kind in [ModelKind::RandomForest, ModelKind::GaussianNb, ModelKind::LogisticRegression] {
            let params = ModelParams { n_trees: 15, seed, ..ModelParams::with_kind(kind) };
            let mut a = train(&m, &params).unwrap();
            let mut b = train(&m, &params).unwrap();
            a.metadata.wall_time_seconds = 0.0;
            b.metadata.wall_time_seconds = 0.0;
            prop_assert_eq!(&a, &b);
            for r in m.rows() {
                let p = a.p_confused(&r.values);
                prop_assert!((0.0..=1.0).contains(&p));
            }
        }
    }

    #[test]
    fn feature_csv_round_trips_exactly(points in labelled_points(4)) {
        let m = matrix(&points);
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        let back = FeatureMatrix::read_csv(&buf[..]).unwrap();
        prop_assert_eq!(back.schema().hash(), m.schema().hash());
        for (a, b) in back.rows().iter().zip(m.rows()) {
            prop_assert_eq!(&a.post_id, &b.post_id);
            prop_assert_eq!(a.label, b.label);
            prop_assert!(a.values.iter().zip(&b.values).all(|(x, y)| x.to_bits() == y.to_bits()));
        }
    }
}
