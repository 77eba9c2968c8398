use proptest::prelude::*;

use super::*;
use crate::model::{CodewordPath, ModelConfig};
use crate::numerics::RngStream;
use crate::semantics::{fixtures, SemanticEncoder, SemanticSource, Taxonomy};

fn sign_codes(q: usize, c: usize, rng: &mut RngStream) -> Matrix<f64> {
    loop {
        let m = Matrix::from_fn(q, c, |_, _| f64::from(rng.sign()));
        let distinct = (0..c).all(|a| (0..a).all(|b| m.column(a) != m.column(b) && m.column(a) != m.column(b).iter().map(|v| -v).collect::<Vec<_>>()));
        if distinct {
            return m;
        }
    }
}

#[test]
fn code_as_feature_is_recovered() {
    let phi = Matrix::from_rows(&[[1.0, -1.0, 1.0], [1.0, 1.0, -1.0], [-1.0, 1.0, 1.0]]).unwrap();
    for c in 0..3 {
        assert_eq!(zs_classify(&phi.column(c), &phi).unwrap(), c);
    }
}

#[test]
fn orthogonal_feature_ties_to_first_class() {
    let phi = Matrix::from_rows(&[[1.0, -1.0], [0.0, 0.0]]).unwrap();
    assert_eq!(zs_classify(&[0.0, 3.0], &phi).unwrap(), 0);
}

#[test]
fn random_scores_match_loop() {
    let mut rng = RngStream::new(1);
    let phi = Matrix::<f64>::from_fn(7, 5, |_, _| rng.normal());
    for _ in 0..50 {
        let f: Vec<f64> = (0..7).map(|_| rng.normal()).collect();
        let mut best = 0;
        let mut best_score = f64::NEG_INFINITY;
        for c in 0..5 {
            let s: f64 = (0..7).map(|k| phi[(k, c)] * f[k]).sum();
            if s > best_score {
                best = c;
                best_score = s;
            }
        }
        assert_eq!(zs_classify(&f, &phi).unwrap(), best);
    }
    assert!(zs_classify(&[1.0], &phi).is_err());
}

#[test]
fn ris_two_attribute_example() {
    let phi = Matrix::from_rows(&[[1.0, -1.0], [-1.0, 1.0]]).unwrap();
    for rule in [RisRule::LogLikelihood, RisRule::Linear] {
        assert_eq!(ris_zs_classify(&[0.9, 0.1], &phi, rule).unwrap(), 0);
        assert_eq!(ris_zs_classify(&[0.2, 0.7], &phi, rule).unwrap(), 1);
    }
}

#[test]
fn ris_uniform_probabilities_tie() {
    let mut rng = RngStream::new(2);
    let phi = sign_codes(5, 4, &mut rng);
    let scores = ris_scores(&[0.5; 5], &phi, RisRule::LogLikelihood).unwrap();
    for s in &scores {
        assert!((s + 5.0 * 2f64.ln()).abs() < 1e-12);
    }
    assert_eq!(ris_zs_classify(&[0.5; 5], &phi, RisRule::LogLikelihood).unwrap(), 0);
    assert_eq!(ris_zs_classify(&[0.5; 5], &phi, RisRule::Linear).unwrap(), 0);
}

#[test]
fn ris_rules_match_enumeration() {
    let mut rng = RngStream::new(3);
    let phi = sign_codes(6, 4, &mut rng);
    for _ in 0..100 {
        let a: Vec<f64> = (0..6).map(|_| rng.uniform(0.01, 0.99)).collect();
        // likelihood of each class under independent Bernoulli attributes
        let lik: Vec<f64> = (0..4)
            .map(|c| (0..6).map(|k| if phi[(k, c)] > 0.0 { a[k] } else { 1.0 - a[k] }).product())
            .collect();
        let lin: Vec<f64> = (0..4)
            .map(|c| (0..6).map(|k| phi[(k, c)] * (2.0 * a[k] - 1.0)).sum())
            .collect();
        let pick = |v: &[f64]| (0..4).fold(0, |b, c| if v[c] > v[b] { c } else { b });
        assert_eq!(ris_zs_classify(&a, &phi, RisRule::LogLikelihood).unwrap(), pick(&lik));
        assert_eq!(ris_zs_classify(&a, &phi, RisRule::Linear).unwrap(), pick(&lin));
    }
}

#[test]
fn ris_rejects_non_binary_codes() {
    let phi = Matrix::from_rows(&[[0.5, -1.0]]).unwrap();
    assert!(ris_zs_classify(&[0.3], &phi, RisRule::Linear).is_err());
}

#[test]
fn rule_names_round_trip() {
    for r in [RisRule::LogLikelihood, RisRule::Linear] {
        assert_eq!(r.as_str().parse::<RisRule>().unwrap(), r);
    }
    assert!("map".parse::<RisRule>().is_err());
}

fn names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("z{i}")).collect()
}

#[test]
fn perfect_and_constant_predictors() {
    let labels: Vec<usize> = (0..40).map(|i| i % 4).collect();
    let perfect = EvalReport::from_predictions(names(4), &labels, &labels).unwrap();
    assert_eq!(perfect.zs_mca, 1.0);
    let constant = EvalReport::from_predictions(names(4), &[0; 40], &labels).unwrap();
    assert_eq!(constant.zs_mca, 0.25);
    assert_eq!(constant.per_class_accuracy, vec![Some(1.0), Some(0.0), Some(0.0), Some(0.0)]);
}

#[test]
fn confusion_matches_hand_count() {
    let mut rng = RngStream::new(4);
    let preds: Vec<usize> = (0..300).map(|_| rng.below(5)).collect();
    let labels: Vec<usize> = (0..300).map(|_| rng.below(5)).collect();
    let r = EvalReport::from_predictions(names(5), &preds, &labels).unwrap();
    for y in 0..5 {
        for p in 0..5 {
            let n = preds.iter().zip(&labels).filter(|(a, b)| **a == p && **b == y).count() as u64;
            assert_eq!(r.confusion[y][p], n);
        }
        let total = labels.iter().filter(|&&l| l == y).count() as u64;
        assert_eq!(r.confusion[y].iter().sum::<u64>(), total);
    }
    let mean = r.per_class_accuracy.iter().flatten().sum::<f64>() / 5.0;
    assert_eq!(r.zs_mca, mean);
    assert_eq!(r.n_samples, 300);
}

#[test]
fn empty_class_is_excluded_and_reported() {
    let r = EvalReport::from_predictions(names(3), &[0, 1, 1], &[0, 1, 0]).unwrap();
    assert_eq!(r.per_class_accuracy[2], None);
    assert_eq!(r.excluded_classes(), vec!["z2"]);
    assert_eq!(r.zs_mca, 0.75);
    assert!(r.to_kv().contains("excluded=z2\n"));
    assert!(EvalReport::from_predictions(names(3), &[0], &[3]).is_err());
}

#[test]
fn confusion_csv_round_trip() {
    let mut rng = RngStream::new(5);
    let preds: Vec<usize> = (0..100).map(|_| rng.below(4)).collect();
    let labels: Vec<usize> = (0..100).map(|_| rng.below(4)).collect();
    let r = EvalReport::from_predictions(names(4), &preds, &labels).unwrap();
    let back = EvalReport::parse_confusion_csv(&r.confusion_csv()).unwrap();
    assert_eq!(back, r);
}

#[test]
fn mean_class_accuracy_skips_empty_classes() {
    assert_eq!(mean_class_accuracy(&[0, 1], &[0, 0], 3), 0.5);
    assert!(mean_class_accuracy(&[], &[], 2).is_nan());
}

#[test]
fn per_state_zero_shot_codes_use_learned_state_codewords() {
    let tree = Taxonomy::from_raw(fixtures::animals()).unwrap();
    let train: Vec<String> = ["dolphin", "bear", "eagle", "horse"].iter().map(|s| s.to_string()).collect();
    let zs: Vec<String> = ["whale", "bat"].iter().map(|s| s.to_string()).collect();
    let enc = SemanticEncoder::<f64>::new(vec![SemanticSource::Taxonomy(tree)], &train).unwrap();
    let codes = enc.encode(&train).unwrap();
    let zs_codes = enc.encode(&zs).unwrap();
    let model = ScoreModel::new(
        enc.spec().clone(),
        codes,
        ModelConfig::new(Mode::Score).with_path(CodewordPath::PerState),
    )
    .unwrap();
    let mut rng = RngStream::new(6);
    let mut params = model.init_params(3, &[], &mut rng);
    assert_eq!(effective_zs_codes(&model, &params, &zs_codes).unwrap(), zs_codes.phi);
    for w in &mut params.codewords {
        *w = w.map(|v| 2.0 * v + 0.5);
    }
    let eff = effective_zs_codes(&model, &params, &zs_codes).unwrap();
    assert_eq!(eff, zs_codes.phi.map(|v| 2.0 * v + 0.5));
}

proptest! {
    #[test]
    fn classify_invariant_to_scaling_and_permutation(seed in 0u64..5000, scale in 0.01f64..100.0) {
        let mut rng = RngStream::new(seed);
        let phi = Matrix::<f64>::from_fn(6, 5, |_, _| rng.normal());
        let f: Vec<f64> = (0..6).map(|_| rng.normal()).collect();
        let base = zs_classify(&f, &phi).unwrap();
        let scaled: Vec<f64> = f.iter().map(|v| v * scale).collect();
        prop_assert_eq!(zs_classify(&scaled, &phi).unwrap(), base);
        let perm = rng.permutation(5);
        let permuted = phi.select_columns(&perm);
        prop_assert_eq!(perm[zs_classify(&f, &permuted).unwrap()], base);
    }

    #[test]
    fn loglik_invariant_to_attribute_order(seed in 0u64..5000) {
        let mut rng = RngStream::new(seed);
        let phi = sign_codes(6, 4, &mut rng);
        let a: Vec<f64> = (0..6).map(|_| rng.uniform(0.01, 0.99)).collect();
        let perm = rng.permutation(6);
        let pa: Vec<f64> = perm.iter().map(|&k| a[k]).collect();
        let pphi = phi.select_rows(&perm);
        prop_assert_eq!(
            ris_zs_classify(&a, &phi, RisRule::LogLikelihood).unwrap(),
            ris_zs_classify(&pa, &pphi, RisRule::LogLikelihood).unwrap()
        );
    }

    #[test]
    fn mca_invariant_to_sample_order(seed in 0u64..5000) {
        let mut rng = RngStream::new(seed);
        let preds: Vec<usize> = (0..60).map(|_| rng.below(4)).collect();
        let labels: Vec<usize> = (0..60).map(|_| rng.below(4)).collect();
        let perm = rng.permutation(60);
        let pp: Vec<usize> = perm.iter().map(|&i| preds[i]).collect();
        let pl: Vec<usize> = perm.iter().map(|&i| labels[i]).collect();
        let a = EvalReport::from_predictions(names(4), &preds, &labels).unwrap();
        let b = EvalReport::from_predictions(names(4), &pp, &pl).unwrap();
        prop_assert_eq!(a.zs_mca, b.zs_mca);
    }

    #[test]
    fn exact_codes_as_features_give_perfect_accuracy(seed in 0u64..5000) {
        let mut rng = RngStream::new(seed);
        let phi = sign_codes(8, 5, &mut rng);
        let preds: Vec<usize> = (0..5).map(|c| zs_classify(&phi.column(c), &phi).unwrap()).collect();
        let labels: Vec<usize> = (0..5).collect();
        prop_assert_eq!(mean_class_accuracy(&preds, &labels, 5), 1.0);
    }
}
