use super::*;
use crate::model::CodewordPath;
use crate::numerics::{spectral_norm, Matrix};
use crate::semantics::{CodeMatrix, SemanticDef, SemanticSpec};

fn scalar_params(p: f64) -> ModelParams<f64> {
    ModelParams {
        backbone: vec![],
        projection: Matrix::from_vec(1, 1, vec![p]).unwrap(),
        codewords: vec![],
    }
}

fn plain_step(lr: f64, momentum: f64) -> StepConfig {
    StepConfig {
        learning_rate: lr,
        momentum,
        weight_decay: 0.0,
        freeze_codewords: false,
        decay_codewords: false,
    }
}

#[test]
fn zero_gradient_leaves_params() {
    let mut p = scalar_params(1.7);
    let mut state = OptimizerState::new(&p);
    sgd_step(&mut p, &scalar_params(0.0), &mut state, &plain_step(0.5, 0.9)).unwrap();
    assert_eq!(p, scalar_params(1.7));
}

#[test]
fn quadratic_geometric_decay() {
    let mut p = scalar_params(1.0);
    let mut state = OptimizerState::new(&p);
    let step = plain_step(0.1, 0.0);
    for expected in [0.9, 0.81] {
        let g = p.clone();
        sgd_step(&mut p, &g, &mut state, &step).unwrap();
        assert!((p.projection[(0, 0)] - expected).abs() < 1e-15);
    }
}

#[test]
fn momentum_matches_scalar_recurrence() {
    let mut p = scalar_params(1.0);
    let mut state = OptimizerState::new(&p);
    let step = plain_step(0.1, 0.9);
    let (mut x, mut v) = (1.0f64, 0.0f64);
    for _ in 0..20 {
        let g = p.clone();
        sgd_step(&mut p, &g, &mut state, &step).unwrap();
        v = 0.9 * v - 0.1 * x;
        x += v;
        assert!((p.projection[(0, 0)] - x).abs() < 1e-15);
    }
}

#[test]
fn weight_decay_and_freezing_routes() {
    let mut p = ModelParams::<f64> {
        backbone: vec![],
        projection: Matrix::from_vec(1, 1, vec![2.0]).unwrap(),
        codewords: vec![Matrix::from_vec(1, 1, vec![3.0]).unwrap()],
    };
    let zero = p.zeros_like();
    let mut state = OptimizerState::new(&p);
    let mut step = plain_step(0.1, 0.0);
    step.weight_decay = 0.5;
    sgd_step(&mut p, &zero, &mut state, &step).unwrap();
    assert!((p.projection[(0, 0)] - 1.9).abs() < 1e-15);
    assert_eq!(p.codewords[0][(0, 0)], 3.0);

    step.decay_codewords = true;
    sgd_step(&mut p, &zero, &mut state, &step).unwrap();
    assert!((p.codewords[0][(0, 0)] - 2.85).abs() < 1e-15);

    step.freeze_codewords = true;
    let mut g = zero.clone();
    g.codewords[0][(0, 0)] = 100.0;
    sgd_step(&mut p, &g, &mut state, &step).unwrap();
    assert!((p.codewords[0][(0, 0)] - 2.85).abs() < 1e-15);
    assert!(sgd_step(&mut p, &scalar_params(0.0), &mut state, &step).is_err());
}

#[test]
fn exact_form_never_decays_codewords() {
    for mode in Mode::ALL {
        let step = StepConfig::new(&TrainConfig::default(), &ModelConfig::new(mode), 0);
        assert!(!step.decay_codewords);
        let inner = ModelConfig::new(mode).with_omega(OmegaForm::InnerProduct);
        let step = StepConfig::new(&TrainConfig::default(), &inner, 0);
        assert_eq!(step.decay_codewords, inner.codewords_trainable());
        assert_eq!(step.freeze_codewords, !inner.codewords_trainable());
    }
}

/// Two well-separated Gaussian blobs, one per class, with a single binary
/// attribute as the semantic code.
fn blobs(n: usize, seed: u64) -> (SemanticSpec<f64>, CodeMatrix<f64>, Dataset<f64>) {
    let spec = SemanticSpec::new(vec![SemanticDef::binary("a"), SemanticDef::binary("b")]).unwrap();
    let codes = CodeMatrix {
        phi: Matrix::from_rows(&[[1.0, -1.0], [1.0, 1.0]]).unwrap(),
        state_table: vec![vec![Some(0), Some(1)], vec![Some(0), Some(0)]],
        class_names: vec!["left".into(), "right".into()],
    };
    let mut rng = RngStream::new(seed);
    let labels: Vec<usize> = (0..n).map(|i| i % 2).collect();
    let x = Matrix::from_fn(n, 3, |i, j| {
        let centre = if j == 0 { if labels[i] == 0 { 3.0 } else { -3.0 } } else { 0.0 };
        centre + 0.5 * rng.normal::<f64>()
    });
    (spec, codes, Dataset::new(x, labels).unwrap())
}

#[test]
fn zero_epochs_returns_initialization() {
    let (spec, codes, data) = blobs(10, 1);
    let model = ScoreModel::new(spec, codes, ModelConfig::new(Mode::Rule)).unwrap();
    let config = TrainConfig {
        epochs: 0,
        hidden: vec![4],
        ..Default::default()
    };
    let out = train(&model, &data, &config).unwrap();
    assert_eq!(out.params, initialize(&model, 3, &config));
    assert!(out.history.is_empty());
}

#[test]
fn separable_task_reaches_perfect_training_accuracy() {
    let (spec, codes, data) = blobs(60, 2);
    let model = ScoreModel::new(spec, codes, ModelConfig::new(Mode::Unrestricted)).unwrap();
    let config = TrainConfig {
        epochs: 50,
        batch_size: 8,
        seed: 3,
        ..Default::default()
    };
    let out = train(&model, &data, &config).unwrap();
    assert_eq!(out.history.len(), 50);
    assert_eq!(out.history.last().unwrap().train_mca, 1.0);
}

#[test]
fn same_seed_gives_identical_history() {
    let (spec, codes, data) = blobs(30, 4);
    let model = ScoreModel::new(spec, codes, ModelConfig::new(Mode::Score).with_lambda(0.5).with_beta(0.1)).unwrap();
    let config = TrainConfig {
        epochs: 5,
        batch_size: 7,
        seed: 11,
        hidden: vec![3],
        ..Default::default()
    };
    let a = train(&model, &data, &config).unwrap();
    let b = train(&model, &data, &config).unwrap();
    assert_eq!(a.history, b.history);
    assert_eq!(a.params, b.params);
    let c = train(&model, &data, &TrainConfig { seed: 12, ..config }).unwrap();
    assert_ne!(a.params, c.params);
}

#[test]
fn score_without_multipliers_matches_unrestricted() {
    let (spec, codes, data) = blobs(30, 5);
    let config = TrainConfig {
        epochs: 4,
        batch_size: 5,
        seed: 2,
        ..Default::default()
    };
    let score = ScoreModel::new(spec.clone(), codes.clone(), ModelConfig::new(Mode::Score)).unwrap();
    let free = ScoreModel::new(spec, codes, ModelConfig::new(Mode::Unrestricted)).unwrap();
    let a = train(&score, &data, &config).unwrap();
    let b = train(&free, &data, &config).unwrap();
    assert_eq!(a.history, b.history);
}

#[test]
fn resumed_run_matches_uninterrupted_run() {
    let (spec, codes, data) = blobs(24, 6);
    let model = ScoreModel::new(spec, codes, ModelConfig::new(Mode::Score).with_beta(0.3)).unwrap();
    let full = TrainConfig {
        epochs: 6,
        batch_size: 5,
        seed: 9,
        ..Default::default()
    };
    let whole = train(&model, &data, &full).unwrap();
    let first = train(&model, &data, &TrainConfig { epochs: 3, ..full.clone() }).unwrap();
    let rest = train_from(&model, &data, &full, first.params, first.state, 3).unwrap();
    assert_eq!(rest.params, whole.params);
    assert_eq!(rest.history, whole.history[3..].to_vec());
}

#[test]
fn convex_instance_history_is_non_increasing() {
    let (spec, codes, data) = blobs(40, 7);
    let model = ScoreModel::new(spec, codes.clone(), ModelConfig::new(Mode::Rule).with_path(CodewordPath::Dense)).unwrap();
    // softmax cross-entropy has logit Hessian <= 1/2 I, logits are linear in T
    let phi_norm = spectral_norm(&codes.phi, 200, 1);
    let x_norm = spectral_norm(&data.features, 200, 2);
    let lipschitz = 0.5 * phi_norm * phi_norm * x_norm * x_norm / data.len() as f64;
    let config = TrainConfig {
        learning_rate: 0.9 / lipschitz,
        momentum: 0.0,
        weight_decay: 0.0,
        lr_decay: 1.0,
        epochs: 40,
        batch_size: data.len(),
        seed: 5,
        ..Default::default()
    };
    let out = train(&model, &data, &config).unwrap();
    for w in out.history.windows(2) {
        assert!(w[1].objective <= w[0].objective, "{} > {}", w[1].objective, w[0].objective);
    }
    assert!(out.history.last().unwrap().objective < out.history[0].objective);
}

#[test]
fn full_batch_is_invariant_to_row_order() {
    let (spec, codes, data) = blobs(20, 8);
    let model = ScoreModel::new(spec, codes, ModelConfig::new(Mode::Score).with_lambda(0.2).with_beta(0.5)).unwrap();
    let config = TrainConfig {
        epochs: 5,
        batch_size: 20,
        seed: 4,
        hidden: vec![3],
        ..Default::default()
    };
    let perm = RngStream::new(99).permutation(20);
    let shuffled = data.subset(&perm);
    let a = train(&model, &data, &config).unwrap().params.to_flat();
    let b = train(&model, &shuffled, &config).unwrap().params.to_flat();
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0));
    }
}

#[test]
fn nan_objective_aborts_with_position() {
    let (spec, codes, data) = blobs(20, 9);
    let model = ScoreModel::new(spec, codes, ModelConfig::new(Mode::Unrestricted)).unwrap();
    let config = TrainConfig {
        learning_rate: 1e300,
        momentum: 0.0,
        epochs: 3,
        batch_size: 4,
        ..Default::default()
    };
    match train(&model, &data, &config) {
        Err(Error::Diverged { epoch, .. }) => assert_eq!(epoch, 0),
        other => panic!("expected divergence, got {other:?}"),
    }
}

#[test]
fn empty_dataset_and_bad_config_rejected() {
    let (spec, codes, data) = blobs(4, 10);
    let model = ScoreModel::new(spec, codes, ModelConfig::new(Mode::Rule)).unwrap();
    let empty = Dataset::new(Matrix::zeros(0, 3), vec![]).unwrap();
    assert!(train(&model, &empty, &TrainConfig::default()).is_err());
    let bad = TrainConfig {
        momentum: 1.0,
        ..Default::default()
    };
    assert!(train(&model, &data, &bad).is_err());
}

#[test]
fn large_beta_keeps_codewords_at_targets() {
    let (spec, codes, data) = blobs(40, 11);
    let model = ScoreModel::new(spec, codes.clone(), ModelConfig::new(Mode::Score).with_beta(1e6)).unwrap();
    let config = TrainConfig {
        epochs: 10,
        batch_size: 8,
        ..Default::default()
    };
    let out = train(&model, &data, &config).unwrap();
    let dist = out.params.codewords[0].sub(&codes.phi).unwrap().frobenius();
    assert!(dist < 1e-2, "{dist}");
    assert!(out.history.iter().all(|r| r.objective.is_finite()));
}

#[test]
fn proximal_map_is_exact_minimizer() {
    let target = vec![Matrix::from_vec(1, 2, vec![1.0, -1.0]).unwrap()];
    let mut p = ModelParams {
        backbone: vec![],
        projection: Matrix::zeros(1, 1),
        codewords: vec![Matrix::from_vec(1, 2, vec![3.0, 0.0]).unwrap()],
    };
    omega_prox(&mut p, &target, 0.5, 2.0);
    // argmin_w 1/2 (w - w0)^2 + 1/2 (w - phi)^2 is the midpoint
    assert_eq!(p.codewords[0].as_slice(), &[2.0, -0.5]);
}
