use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{norm, orthonormal_basis, Matrix, Real};
use crate::semantics::CodeMatrix;

/// Rank tolerance of the orthogonal factorization.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// How far each zero-shot code lies from the span of the training codes.
///
/// Every code is scaled to unit length first, so distances lie in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignmentReport {
    pub class_names: Vec<String>,
    pub distances: Vec<f64>,
    pub mean_distance: f64,
    pub train_rank: usize,
}

impl AlignmentReport {
    pub fn to_kv(&self) -> String {
        let mut out = format!(
            "mean_distance={}\ntrain_rank={}\nn_classes={}\n",
            self.mean_distance,
            self.train_rank,
            self.class_names.len()
        );
        for (n, d) in self.class_names.iter().zip(&self.distances) {
            out.push_str(&format!("distance.{n}={d}\n"));
        }
        out
    }
}

fn unit_columns<T: Real>(m: &Matrix<T>, what: &str) -> Result<Matrix<T>> {
    let mut out = m.clone();
    for j in 0..m.cols() {
        let n = norm(&m.column(j));
        if n == T::zero() || !n.is_finite() {
            return Err(Error::data(format!("{what} code column {j} is zero or not finite")));
        }
        for i in 0..m.rows() {
            out[(i, j)] /= n;
        }
    }
    Ok(out)
}

/// Orthogonal distance of every unit-normalized column of `phi_zs` from the
/// span of `phi_train`'s columns.
pub fn alignment_distance_matrix<T: Real>(phi_train: &Matrix<T>, phi_zs: &Matrix<T>) -> Result<(Vec<T>, usize)> {
    if phi_train.rows() != phi_zs.rows() {
        return Err(Error::Shape {
            op: "alignment_distance",
            left: phi_train.shape(),
            right: phi_zs.shape(),
        });
    }
    let train = unit_columns(phi_train, "training")?;
    let zs = unit_columns(phi_zs, "zero-shot")?;
    let basis = orthonormal_basis(&train, T::lit(RANK_TOLERANCE));
    let mut distances = Vec::with_capacity(zs.cols());
    for j in 0..zs.cols() {
        let v = zs.column(j);
        let coeffs = basis.tr_matvec(&v)?;
        let proj = basis.matvec(&coeffs)?;
        let resid: Vec<T> = v.iter().zip(&proj).map(|(a, b)| *a - *b).collect();
        distances.push(norm(&resid).min(T::one()));
    }
    Ok((distances, basis.cols()))
}

pub fn alignment_distance<T: Real>(train: &CodeMatrix<T>, zs: &CodeMatrix<T>) -> Result<AlignmentReport> {
    let (d, train_rank) = alignment_distance_matrix(&train.phi, &zs.phi)?;
    let distances: Vec<f64> = d.into_iter().map(|v| v.as_f64()).collect();
    let mean_distance = if distances.is_empty() {
        f64::NAN
    } else {
        distances.iter().sum::<f64>() / distances.len() as f64
    };
    Ok(AlignmentReport {
        class_names: zs.class_names.clone(),
        distances,
        mean_distance,
        train_rank,
    })
}
