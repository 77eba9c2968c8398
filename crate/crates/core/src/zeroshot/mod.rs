//! Zero-shot inference and accuracy metrics.

mod report;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use report::EvalReport;

use crate::error::{Error, Result};
use crate::model::{argmax, BlockKind, Dataset, Mode, ModelParams, ScoreModel};
use crate::numerics::{clip_prob, sigmoid, Matrix, Real};
use crate::semantics::CodeMatrix;

/// Decision rule for independent-semantics predictions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RisRule {
    /// Independence log-likelihood with a uniform class prior.
    LogLikelihood,
    /// `sum_k phi_k(c) (2 a_k - 1)`.
    Linear,
}

impl RisRule {
    pub fn as_str(self) -> &'static str {
        match self {
            RisRule::LogLikelihood => "loglik",
            RisRule::Linear => "linear",
        }
    }
}

impl fmt::Display for RisRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RisRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "loglik" => Ok(RisRule::LogLikelihood),
            "linear" => Ok(RisRule::Linear),
            _ => Err(Error::contract(format!("unknown RIS rule '{s}' (expected loglik or linear)"))),
        }
    }
}

/// `argmax_c phi_zs(c)^T f`, ties to the lowest index.
pub fn zs_classify<T: Real>(f: &[T], phi_zs: &Matrix<T>) -> Result<usize> {
    if phi_zs.cols() == 0 {
        return Err(Error::contract("no zero-shot classes"));
    }
    let scores = phi_zs.tr_matvec(f)?;
    Ok(argmax(&scores).expect("non-empty"))
}

/// Class scores of attribute probabilities under the given rule.
pub fn ris_scores<T: Real>(probs: &[T], phi_zs: &Matrix<T>, rule: RisRule) -> Result<Vec<T>> {
    if probs.len() != phi_zs.rows() {
        return Err(Error::Shape {
            op: "ris_zs_classify",
            left: (probs.len(), 1),
            right: phi_zs.shape(),
        });
    }
    if let Some(v) = phi_zs.as_slice().iter().find(|v| v.abs() != T::one()) {
        return Err(Error::contract(format!(
            "independent-semantics inference needs binary codes, found entry {v}"
        )));
    }
    let two = T::lit(2.0);
    let mut scores = vec![T::zero(); phi_zs.cols()];
    for (k, &a) in probs.iter().enumerate() {
        let a = clip_prob(a);
        let (present, absent) = (a.ln(), (T::one() - a).ln());
        for (c, s) in scores.iter_mut().enumerate() {
            let phi = phi_zs[(k, c)];
            *s += match rule {
                RisRule::LogLikelihood if phi > T::zero() => present,
                RisRule::LogLikelihood => absent,
                RisRule::Linear => phi * (two * a - T::one()),
            };
        }
    }
    Ok(scores)
}

pub fn ris_zs_classify<T: Real>(probs: &[T], phi_zs: &Matrix<T>, rule: RisRule) -> Result<usize> {
    if phi_zs.cols() == 0 {
        return Err(Error::contract("no zero-shot classes"));
    }
    Ok(argmax(&ris_scores(probs, phi_zs, rule)?).expect("non-empty"))
}

/// Code matrix used to score zero-shot classes. On the dense path this is
/// `Phi_zs`. On the per-state path, every discrete semantic contributes the
/// learned codeword of the state the zero-shot class selects; semantics where
/// the class has no state (unseen embedding classes) and continuous
/// attributes contribute the class's own semantic code.
pub fn effective_zs_codes<T: Real>(
    model: &ScoreModel<T>,
    params: &ModelParams<T>,
    zs_codes: &CodeMatrix<T>,
) -> Result<Matrix<T>> {
    if zs_codes.dim() != model.spec().total_dim || zs_codes.state_table.len() != model.spec().len() {
        return Err(Error::Shape {
            op: "zero-shot codes",
            left: zs_codes.phi.shape(),
            right: (model.spec().total_dim, zs_codes.num_classes()),
        });
    }
    let mut out = zs_codes.phi.clone();
    for (block, w) in model.blocks().iter().zip(&params.codewords) {
        if let BlockKind::PerState { semantic } = block.kind {
            for (c, state) in zs_codes.state_table[semantic].iter().enumerate() {
                if let Some(s) = *state {
                    if s >= w.cols() {
                        return Err(Error::contract(format!("state {s} outside codeword block")));
                    }
                    for i in 0..block.dim {
                        out[(block.offset + i, c)] = w[(i, s)];
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Zero-shot predictions for every sample of `data`, with labels indexing
/// the columns of `zs_codes`.
pub fn predict_zero_shot<T: Real>(
    model: &ScoreModel<T>,
    params: &ModelParams<T>,
    data: &Dataset<T>,
    zs_codes: &CodeMatrix<T>,
    rule: RisRule,
) -> Result<Vec<usize>> {
    if model.config().mode == Mode::Ris {
        if !model.spec().all_binary() {
            return Err(Error::contract(
                "independent-semantics inference supports binary attribute vocabularies only",
            ));
        }
        (0..data.len())
            .map(|i| {
                let f = model.predict(params, data.features.row(i))?.f;
                let probs: Vec<T> = f.into_iter().map(sigmoid).collect();
                ris_zs_classify(&probs, &zs_codes.phi, rule)
            })
            .collect()
    } else {
        let codes = effective_zs_codes(model, params, zs_codes)?;
        (0..data.len())
            .map(|i| zs_classify(&model.predict(params, data.features.row(i))?.f, &codes))
            .collect()
    }
}

/// Runs the mode's zero-shot classifier over `data` and aggregates accuracy.
pub fn evaluate<T: Real>(
    model: &ScoreModel<T>,
    params: &ModelParams<T>,
    data: &Dataset<T>,
    zs_codes: &CodeMatrix<T>,
    rule: RisRule,
) -> Result<EvalReport> {
    let predictions = predict_zero_shot(model, params, data, zs_codes, rule)?;
    EvalReport::from_predictions(zs_codes.class_names.clone(), &predictions, &data.labels)
}

/// Unweighted mean of per-class accuracies over classes that have samples;
/// NaN when no class has any.
pub fn mean_class_accuracy(predictions: &[usize], labels: &[usize], classes: usize) -> f64 {
    let mut hits = vec![0usize; classes];
    let mut counts = vec![0usize; classes];
    for (&p, &y) in predictions.iter().zip(labels) {
        if y < classes {
            counts[y] += 1;
            hits[y] += usize::from(p == y);
        }
    }
    let accs: Vec<f64> = hits
        .iter()
        .zip(&counts)
        .filter(|(_, &n)| n > 0)
        .map(|(&h, &n)| h as f64 / n as f64)
        .collect();
    if accs.is_empty() {
        f64::NAN
    } else {
        accs.iter().sum::<f64>() / accs.len() as f64
    }
}

#[cfg(test)]
mod tests;
