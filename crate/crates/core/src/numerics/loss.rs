//! Nonlinearities and the two losses used by the objective.

use super::Real;
use crate::error::{Error, Result};

/// Logistic function, evaluated on the branch that never exponentiates a
/// large positive number.
pub fn sigmoid<T: Real>(x: T) -> T {
    if x >= T::zero() {
        T::one() / (T::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (T::one() + e)
    }
}

/// Softmax with max-subtraction. Empty input yields an empty vector.
pub fn softmax<T: Real>(logits: &[T]) -> Vec<T> {
    let max = logits.iter().copied().fold(T::neg_infinity(), T::max);
    let mut out: Vec<T> = logits.iter().map(|&v| (v - max).exp()).collect();
    let z: T = out.iter().copied().sum();
    out.iter_mut().for_each(|v| *v /= z);
    out
}

/// Cross-entropy of a softmax over `logits` against `label`.
#[derive(Debug, Clone)]
pub struct SoftmaxXent<T> {
    pub loss: T,
    pub probs: Vec<T>,
}

impl<T: Real> SoftmaxXent<T> {
    /// Gradient of the loss with respect to the logits: `probs - onehot(label)`.
    pub fn grad(&self, label: usize) -> Vec<T> {
        let mut g = self.probs.clone();
        g[label] -= T::one();
        g
    }
}

pub fn softmax_xent<T: Real>(logits: &[T], label: usize) -> Result<SoftmaxXent<T>> {
    if logits.is_empty() {
        return Err(Error::contract("softmax_xent on empty logits"));
    }
    if label >= logits.len() {
        return Err(Error::contract(format!(
            "label {label} out of range for {} logits",
            logits.len()
        )));
    }
    let max = logits.iter().copied().fold(T::neg_infinity(), T::max);
    let shifted: Vec<T> = logits.iter().map(|&v| v - max).collect();
    let exps: Vec<T> = shifted.iter().map(|v| v.exp()).collect();
    let z: T = exps.iter().copied().sum();
    let loss = z.ln() - shifted[label];
    let probs = exps.into_iter().map(|e| e / z).collect();
    Ok(SoftmaxXent { loss, probs })
}

/// Clamps a probability into `[eps, 1 - eps]`.
#[inline]
pub fn clip_prob<T: Real>(a: T) -> T {
    let eps = T::log_clip();
    a.max(eps).min(T::one() - eps)
}

/// Binary cross-entropy `-s ln a - (1 - s) ln(1 - a)` with fractional
/// targets allowed.
pub fn binary_xent<T: Real>(a: T, s: T) -> T {
    let a = clip_prob(a);
    let mut loss = T::zero();
    if s != T::zero() {
        loss -= s * a.ln();
    }
    if s != T::one() {
        loss -= (T::one() - s) * (T::one() - a).ln();
    }
    loss
}

/// `binary_xent(sigmoid(z), s)` and its derivative with respect to `z`.
///
/// The derivative is that of the clipped loss: zero once the probability sits
/// on a clip boundary.
pub fn logistic_xent<T: Real>(z: T, s: T) -> (T, T) {
    let a = sigmoid(z);
    let loss = binary_xent(a, s);
    let eps = T::log_clip();
    let grad = if a <= eps || a >= T::one() - eps {
        T::zero()
    } else {
        a - s
    };
    (loss, grad)
}
