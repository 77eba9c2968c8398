use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{Matrix, Real, RngStream};

/// Affine layer followed by `tanh`. `weight` is `out x in`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseLayer<T> {
    pub weight: Matrix<T>,
    pub bias: Vec<T>,
}

impl<T: Real> DenseLayer<T> {
    pub fn zeros(input: usize, output: usize) -> Self {
        DenseLayer {
            weight: Matrix::zeros(output, input),
            bias: vec![T::zero(); output],
        }
    }

    /// Uniform in `+-sqrt(6 / (in + out))`, zero bias.
    pub fn glorot(input: usize, output: usize, rng: &mut RngStream) -> Self {
        DenseLayer {
            weight: glorot(output, input, rng),
            bias: vec![T::zero(); output],
        }
    }

    pub fn input_dim(&self) -> usize {
        self.weight.cols()
    }

    pub fn output_dim(&self) -> usize {
        self.weight.rows()
    }
}

pub(crate) fn glorot<T: Real>(rows: usize, cols: usize, rng: &mut RngStream) -> Matrix<T> {
    let bound = T::lit((6.0 / (rows + cols) as f64).sqrt());
    Matrix::from_fn(rows, cols, |_, _| rng.uniform(-bound, bound))
}

/// Parameter groups, used to route weight decay and freezing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamGroup {
    Backbone,
    Projection,
    Codewords,
}

/// Trainable tensors: backbone, projection `T` (`d x Q'`) and the codeword
/// blocks laid out by the model's codeword layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams<T> {
    pub backbone: Vec<DenseLayer<T>>,
    pub projection: Matrix<T>,
    pub codewords: Vec<Matrix<T>>,
}

impl<T: Real> ModelParams<T> {
    /// Same shapes, all zeros.
    pub fn zeros_like(&self) -> Self {
        ModelParams {
            backbone: self
                .backbone
                .iter()
                .map(|l| DenseLayer::zeros(l.input_dim(), l.output_dim()))
                .collect(),
            projection: Matrix::zeros(self.projection.rows(), self.projection.cols()),
            codewords: self.codewords.iter().map(|w| Matrix::zeros(w.rows(), w.cols())).collect(),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.backbone
            .first()
            .map_or(self.projection.rows(), |l| l.input_dim())
    }

    pub fn feature_dim(&self) -> usize {
        self.projection.rows()
    }

    /// Every tensor with its group, in a fixed order.
    pub fn tensors(&self) -> Vec<(ParamGroup, &[T])> {
        let mut out: Vec<(ParamGroup, &[T])> = Vec::new();
        for l in &self.backbone {
            out.push((ParamGroup::Backbone, l.weight.as_slice()));
            out.push((ParamGroup::Backbone, &l.bias));
        }
        out.push((ParamGroup::Projection, self.projection.as_slice()));
        for w in &self.codewords {
            out.push((ParamGroup::Codewords, w.as_slice()));
        }
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<(ParamGroup, &mut [T])> {
        let mut out: Vec<(ParamGroup, &mut [T])> = Vec::new();
        for l in &mut self.backbone {
            out.push((ParamGroup::Backbone, l.weight.as_mut_slice()));
            out.push((ParamGroup::Backbone, &mut l.bias));
        }
        out.push((ParamGroup::Projection, self.projection.as_mut_slice()));
        for w in &mut self.codewords {
            out.push((ParamGroup::Codewords, w.as_mut_slice()));
        }
        out
    }

    pub fn num_values(&self) -> usize {
        self.tensors().iter().map(|(_, t)| t.len()).sum()
    }

    pub fn to_flat(&self) -> Vec<T> {
        self.tensors().into_iter().flat_map(|(_, t)| t.iter().copied()).collect()
    }

    /// Group of every flat coordinate.
    pub fn flat_groups(&self) -> Vec<ParamGroup> {
        self.tensors()
            .into_iter()
            .flat_map(|(g, t)| std::iter::repeat_n(g, t.len()))
            .collect()
    }

    pub fn assign_flat(&mut self, flat: &[T]) -> Result<()> {
        if flat.len() != self.num_values() {
            return Err(Error::contract(format!(
                "flat parameter vector has {} entries, model has {}",
                flat.len(),
                self.num_values()
            )));
        }
        let mut at = 0;
        for (_, t) in self.tensors_mut() {
            t.copy_from_slice(&flat[at..at + t.len()]);
            at += t.len();
        }
        Ok(())
    }

    pub fn same_shape(&self, other: &ModelParams<T>) -> bool {
        let a = self.tensors();
        let b = other.tensors();
        a.len() == b.len() && a.iter().zip(&b).all(|(x, y)| x.0 == y.0 && x.1.len() == y.1.len())
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().iter().all(|(_, t)| t.iter().all(|v| v.is_finite()))
    }
}
