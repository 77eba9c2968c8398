//! Momentum SGD and the training loop.

use log::{debug, info};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Dataset, Mode, ModelConfig, ModelParams, OmegaForm, ParamGroup, ScoreModel};
use crate::numerics::{Real, RngStream};
use crate::zeroshot::mean_class_accuracy;

/// How the codeword penalty enters the update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OmegaUpdate {
    /// Closed-form proximal step on the exact penalty after each SGD step:
    /// `W <- (W + lr beta Phi) / (1 + lr beta)`. Stable for any `beta`.
    Proximal,
    /// Penalty gradient folded into the SGD gradient.
    Gradient,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub momentum: f64,
    pub weight_decay: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub lr_decay: f64,
    pub seed: u64,
    /// Hidden layer widths of the backbone; empty for the identity backbone.
    pub hidden: Vec<usize>,
    pub omega_update: OmegaUpdate,
    /// Evaluate training-set accuracy after every epoch.
    pub track_train_mca: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.01,
            momentum: 0.9,
            weight_decay: 5e-4,
            epochs: 30,
            batch_size: 64,
            lr_decay: 0.98,
            seed: 0,
            hidden: Vec::new(),
            omega_update: OmegaUpdate::Proximal,
            track_train_mca: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let lr = self.learning_rate;
        if !(lr.is_finite() && lr > 0.0) {
            return Err(Error::contract(format!("learning rate must be > 0, got {lr}")));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::contract(format!("momentum must be in [0, 1), got {}", self.momentum)));
        }
        if !(self.weight_decay.is_finite() && self.weight_decay >= 0.0) {
            return Err(Error::contract(format!("weight decay must be >= 0, got {}", self.weight_decay)));
        }
        if !(self.lr_decay > 0.0 && self.lr_decay <= 1.0) {
            return Err(Error::contract(format!("lr decay must be in (0, 1], got {}", self.lr_decay)));
        }
        if self.batch_size == 0 {
            return Err(Error::contract("batch size must be positive"));
        }
        if self.hidden.contains(&0) {
            return Err(Error::contract("hidden layer widths must be positive"));
        }
        Ok(())
    }

    /// Learning rate in effect during `epoch` (0-based).
    pub fn lr_at(&self, epoch: usize) -> f64 {
        self.learning_rate * self.lr_decay.powi(epoch as i32)
    }
}

/// Velocity buffers, one per parameter tensor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerState<T> {
    pub velocity: ModelParams<T>,
}

impl<T: Real> OptimizerState<T> {
    pub fn new(params: &ModelParams<T>) -> Self {
        OptimizerState {
            velocity: params.zeros_like(),
        }
    }
}

/// Step hyperparameters and per-group routing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepConfig {
    pub learning_rate: f64,
    pub momentum: f64,
    pub weight_decay: f64,
    pub freeze_codewords: bool,
    pub decay_codewords: bool,
}

impl StepConfig {
    pub fn new(train: &TrainConfig, model: &ModelConfig, epoch: usize) -> Self {
        StepConfig {
            learning_rate: train.lr_at(epoch),
            momentum: train.momentum,
            weight_decay: train.weight_decay,
            freeze_codewords: !model.codewords_trainable(),
            decay_codewords: model.codewords_trainable() && model.omega_form == OmegaForm::InnerProduct,
        }
    }
}

/// `v <- momentum v - lr (g + wd p)`, `p <- p + v`, tensor by tensor.
pub fn sgd_step<T: Real>(
    params: &mut ModelParams<T>,
    grads: &ModelParams<T>,
    state: &mut OptimizerState<T>,
    step: &StepConfig,
) -> Result<()> {
    if !params.same_shape(grads) || !params.same_shape(&state.velocity) {
        return Err(Error::contract("sgd_step: parameter, gradient and velocity shapes differ"));
    }
    let lr = T::lit(step.learning_rate);
    let mu = T::lit(step.momentum);
    let tensors = params.tensors_mut();
    let velocities = state.velocity.tensors_mut();
    for (((group, p), (_, g)), (_, v)) in tensors.into_iter().zip(grads.tensors()).zip(velocities) {
        if group == ParamGroup::Codewords && step.freeze_codewords {
            continue;
        }
        let wd = if group == ParamGroup::Codewords && !step.decay_codewords {
            T::zero()
        } else {
            T::lit(step.weight_decay)
        };
        for ((pi, &gi), vi) in p.iter_mut().zip(g).zip(v.iter_mut()) {
            *vi = mu * *vi - lr * (gi + wd * *pi);
            *pi += *vi;
        }
    }
    Ok(())
}

/// Proximal map of `lr * beta * Omega_exact` applied to every codeword block.
pub fn omega_prox<T: Real>(params: &mut ModelParams<T>, targets: &[crate::numerics::Matrix<T>], lr: f64, beta: f64) {
    let t = T::lit(lr * beta);
    let denom = T::one() + t;
    for (w, phi) in params.codewords.iter_mut().zip(targets) {
        for (wi, &pi) in w.as_mut_slice().iter_mut().zip(phi.as_slice()) {
            *wi = (*wi + t * pi) / denom;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub learning_rate: f64,
    /// Mean over the epoch's batches of each objective term.
    pub objective: f64,
    pub classification: f64,
    pub auxiliary: f64,
    pub omega: f64,
    /// Mean per-class accuracy on the training set after the epoch (NaN when
    /// not tracked).
    pub train_mca: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome<T> {
    pub params: ModelParams<T>,
    pub state: OptimizerState<T>,
    pub history: Vec<EpochRecord>,
}

const INIT_STREAM: u64 = 0x1417;
const SHUFFLE_STREAM: u64 = 0x5a17_0000;

/// Parameters initialized from the training seed.
pub fn initialize<T: Real>(model: &ScoreModel<T>, input_dim: usize, config: &TrainConfig) -> ModelParams<T> {
    let mut rng = RngStream::derived(config.seed, INIT_STREAM);
    model.init_params(input_dim, &config.hidden, &mut rng)
}

/// Initializes from `config.seed` and trains.
pub fn train<T: Real>(model: &ScoreModel<T>, data: &Dataset<T>, config: &TrainConfig) -> Result<TrainOutcome<T>> {
    let params = initialize(model, data.input_dim(), config);
    let state = OptimizerState::new(&params);
    train_from(model, data, config, params, state, 0)
}

/// Runs epochs `start_epoch..config.epochs` from the given parameters and
/// optimizer state. Batches of epoch `e` come from a shuffle keyed by the seed
/// and `e`, so a resumed run reproduces an uninterrupted one.
pub fn train_from<T: Real>(
    model: &ScoreModel<T>,
    data: &Dataset<T>,
    config: &TrainConfig,
    mut params: ModelParams<T>,
    mut state: OptimizerState<T>,
    start_epoch: usize,
) -> Result<TrainOutcome<T>> {
    config.validate()?;
    if data.is_empty() {
        return Err(Error::data("training set is empty"));
    }
    if let Some(&bad) = data.labels.iter().find(|&&y| y >= model.num_classes()) {
        return Err(Error::data(format!(
            "training label {bad} out of range for {} classes",
            model.num_classes()
        )));
    }
    model.check_params(&params)?;
    let mc = model.config();
    let prox = config.omega_update == OmegaUpdate::Proximal
        && mc.mode == Mode::Score
        && mc.omega_form == OmegaForm::Exact
        && mc.beta > 0.0;
    let weights = if prox { mc.weights().without_omega() } else { mc.weights() };
    let full = mc.weights::<T>();

    let n = data.len();
    let mut history = Vec::with_capacity(config.epochs.saturating_sub(start_epoch));
    for epoch in start_epoch..config.epochs {
        let step = StepConfig::new(config, mc, epoch);
        let order = RngStream::derived(config.seed, SHUFFLE_STREAM + epoch as u64).permutation(n);
        let mut sums = [0.0f64; 4];
        let mut batches = 0usize;
        for (b, batch) in order.chunks(config.batch_size).enumerate() {
            let (mut value, grads) = model.gradients_with(&params, data, batch, weights)?;
            if prox {
                value.total += full.omega * value.omega;
            }
            let total = value.total.as_f64();
            if !total.is_finite() {
                return Err(Error::Diverged {
                    epoch,
                    batch: b,
                    value: total,
                });
            }
            sgd_step(&mut params, &grads, &mut state, &step)?;
            if prox {
                omega_prox(&mut params, model.targets(), step.learning_rate, mc.beta);
            }
            if !params.is_finite() {
                return Err(Error::Diverged {
                    epoch,
                    batch: b,
                    value: f64::NAN,
                });
            }
            for (s, v) in sums.iter_mut().zip([value.total, value.classification, value.auxiliary, value.omega]) {
                *s += v.as_f64();
            }
            batches += 1;
        }
        let m = batches as f64;
        let train_mca = if config.track_train_mca {
            training_accuracy(model, &params, data)?
        } else {
            f64::NAN
        };
        let record = EpochRecord {
            epoch,
            learning_rate: step.learning_rate,
            objective: sums[0] / m,
            classification: sums[1] / m,
            auxiliary: sums[2] / m,
            omega: sums[3] / m,
            train_mca,
        };
        debug!("epoch {epoch}: objective {:.6} train mca {:.4}", record.objective, record.train_mca);
        history.push(record);
    }
    if let Some(last) = history.last() {
        info!(
            "trained {} epochs in {} mode: objective {:.6}",
            history.len(),
            mc.mode,
            last.objective
        );
    }
    Ok(TrainOutcome { params, state, history })
}

/// Mean per-class accuracy of the model's training-class predictions.
pub fn training_accuracy<T: Real>(model: &ScoreModel<T>, params: &ModelParams<T>, data: &Dataset<T>) -> Result<f64> {
    let predictions = (0..data.len())
        .map(|i| model.classify(params, data.features.row(i)))
        .collect::<Result<Vec<_>>>()?;
    Ok(mean_class_accuracy(&predictions, &data.labels, model.num_classes()))
}

#[cfg(test)]
mod tests;
