use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{Matrix, Real};

/// Labeled training examples. `labels` index the columns of the training
/// code matrix; `attributes`, when present, holds one `[0, 1]` label per
/// sample for every scalar semantic (binary or continuous attribute), in
/// vocabulary order, and overrides the class-level attribute targets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset<T> {
    pub features: Matrix<T>,
    pub labels: Vec<usize>,
    pub attributes: Option<Matrix<T>>,
}

impl<T: Real> Dataset<T> {
    pub fn new(features: Matrix<T>, labels: Vec<usize>) -> Result<Self> {
        Self::with_attributes(features, labels, None)
    }

    pub fn with_attributes(features: Matrix<T>, labels: Vec<usize>, attributes: Option<Matrix<T>>) -> Result<Self> {
        if features.rows() != labels.len() {
            return Err(Error::data(format!(
                "{} feature rows but {} labels",
                features.rows(),
                labels.len()
            )));
        }
        if let Some(a) = &attributes {
            if a.rows() != labels.len() {
                return Err(Error::data(format!(
                    "{} attribute rows but {} samples",
                    a.rows(),
                    labels.len()
                )));
            }
            if let Some(v) = a.as_slice().iter().find(|v| !(**v >= T::zero() && **v <= T::one())) {
                return Err(Error::data(format!("per-sample attribute label {v} outside [0, 1]")));
            }
        }
        Ok(Dataset {
            features,
            labels,
            attributes,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn input_dim(&self) -> usize {
        self.features.cols()
    }

    pub fn subset(&self, idx: &[usize]) -> Dataset<T> {
        Dataset {
            features: self.features.select_rows(idx),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            attributes: self.attributes.as_ref().map(|a| a.select_rows(idx)),
        }
    }
}
