//! Stateless forward operations shared by the model and by inference.

use super::{DenseLayer, OmegaForm};
use crate::error::{Error, Result};
use crate::numerics::{Matrix, Real};
use crate::semantics::SemanticSpec;

/// Runs the backbone and returns every activation, input first.
pub fn backbone_trace<T: Real>(x: &[T], layers: &[DenseLayer<T>]) -> Result<Vec<Vec<T>>> {
    let mut acts = Vec::with_capacity(layers.len() + 1);
    acts.push(x.to_vec());
    for layer in layers {
        let prev = acts.last().expect("non-empty");
        let mut z = layer.weight.matvec(prev)?;
        z.iter_mut().zip(&layer.bias).for_each(|(v, &b)| *v = (*v + b).tanh());
        acts.push(z);
    }
    Ok(acts)
}

/// Feature extractor output; the identity when `layers` is empty.
pub fn backbone_forward<T: Real>(x: &[T], layers: &[DenseLayer<T>]) -> Result<Vec<T>> {
    Ok(backbone_trace(x, layers)?.pop().expect("non-empty"))
}

/// `f = T^T theta`.
pub fn semantic_predictor<T: Real>(theta: &[T], projection: &Matrix<T>) -> Result<Vec<T>> {
    projection.tr_matvec(theta)
}

/// Per-semantic state scores and the winning state of each semantic.
#[derive(Debug, Clone, PartialEq)]
pub struct SemanticScores<T> {
    /// `u[k][i] = <w_i^(k), f_k>`; empty for continuous semantics.
    pub u: Vec<Vec<T>>,
    /// Argmax state per semantic, ties to the lowest index.
    pub states: Vec<Option<usize>>,
}

/// Index of the largest entry; ties go to the lowest index.
pub fn argmax<T: Real>(v: &[T]) -> Option<usize> {
    let mut best: Option<(usize, T)> = None;
    for (i, &x) in v.iter().enumerate() {
        match best {
            Some((_, b)) if x <= b => {}
            _ => best = Some((i, x)),
        }
    }
    best.map(|(i, _)| i)
}

/// State scores for every semantic given one `d_k x S_k` codeword matrix per
/// semantic (a `d_k x 0` matrix for continuous semantics).
pub fn semantic_scores<T: Real>(
    f: &[T],
    spec: &SemanticSpec<T>,
    codewords: &[Matrix<T>],
) -> Result<SemanticScores<T>> {
    if f.len() != spec.total_dim || codewords.len() != spec.len() {
        return Err(Error::contract("semantic_scores: predictor or codewords do not match the vocabulary"));
    }
    let mut u = Vec::with_capacity(spec.len());
    let mut states = Vec::with_capacity(spec.len());
    for ((sem, off), w) in spec.semantics.iter().zip(spec.offsets()).zip(codewords) {
        let scores = w.tr_matvec(&f[off..off + sem.state_dim])?;
        states.push(argmax(&scores));
        u.push(scores);
    }
    Ok(SemanticScores { u, states })
}

/// Dense class scores `W^T f`.
pub fn dense_class_scores<T: Real>(f: &[T], w: &Matrix<T>) -> Result<Vec<T>> {
    w.tr_matvec(f)
}

/// Class scores from state scores through the fixed selection layer:
/// `h_c = sum_k u[k][s_k^c]`. Semantics with no state entry are skipped.
pub fn selected_class_scores<T: Real>(u: &[Vec<T>], state_table: &[Vec<Option<usize>>]) -> Result<Vec<T>> {
    let classes = state_table.first().map_or(0, |r| r.len());
    let mut h = vec![T::zero(); classes];
    for (uk, row) in u.iter().zip(state_table) {
        for (c, s) in row.iter().enumerate() {
            if let Some(s) = s {
                h[c] += *uk
                    .get(*s)
                    .ok_or_else(|| Error::contract(format!("state {s} outside score vector")))?;
            }
        }
    }
    Ok(h)
}

/// Codeword penalty between learned codewords and their semantic targets.
pub fn codeword_regularizer<T: Real>(codewords: &[Matrix<T>], targets: &[Matrix<T>], form: OmegaForm) -> Result<T> {
    if codewords.len() != targets.len() {
        return Err(Error::contract("codeword_regularizer: block counts differ"));
    }
    let mut total = T::zero();
    for (w, t) in codewords.iter().zip(targets) {
        total += match form {
            OmegaForm::Exact => T::lit(0.5) * w.sub(t)?.frobenius_sq(),
            OmegaForm::InnerProduct => -w.inner(t)?,
        };
    }
    Ok(total)
}
