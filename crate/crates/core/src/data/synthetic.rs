use log::debug;
use serde::{Deserialize, Serialize};

use super::{FeatureSet, SplitSpec};
use crate::diagnostics::alignment_distance_matrix;
use crate::error::{Error, Result};
use crate::numerics::{orthonormal_basis, Matrix, RngStream};
use crate::semantics::{attribute_codes, AttributeTable, CodeMatrix, SemanticSpec};

/// Largest number of draws spent looking for one class code.
pub const MAX_RESAMPLES: usize = 10_000;

/// Zero-shot codes drawn under misalignment sit at least this far from the
/// span of the training codes.
pub const MISALIGNED_DISTANCE: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticConfig {
    pub q: usize,
    pub c_train: usize,
    pub c_zs: usize,
    pub d: usize,
    pub n_per_class: usize,
    pub noise_sigma: f64,
    pub misalignment: f64,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            q: 16,
            c_train: 12,
            c_zs: 4,
            d: 64,
            n_per_class: 150,
            noise_sigma: 0.25,
            misalignment: 0.0,
            seed: 0,
        }
    }
}

impl SyntheticConfig {
    pub fn validate(&self) -> Result<()> {
        if self.q == 0 || self.d == 0 || self.n_per_class == 0 || self.c_train == 0 || self.c_zs == 0 {
            return Err(Error::contract("q, d, n_per_class, c_train and c_zs must all be positive"));
        }
        let total = (self.c_train + self.c_zs) as u128;
        if self.q < 128 && (1u128 << self.q) < total {
            return Err(Error::contract(format!(
                "{total} distinct codes do not fit in {{-1, +1}}^{}",
                self.q
            )));
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return Err(Error::contract(format!("noise sigma must be >= 0, got {}", self.noise_sigma)));
        }
        if !(0.0..=1.0).contains(&self.misalignment) {
            return Err(Error::contract(format!("misalignment must be in [0, 1], got {}", self.misalignment)));
        }
        Ok(())
    }
}

/// A generated zero-shot task. `attributes` has one `+-1` row per class,
/// training classes first.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticTask {
    pub config: SyntheticConfig,
    pub train: FeatureSet,
    pub zs: FeatureSet,
    pub attributes: AttributeTable<f64>,
    pub split: SplitSpec,
    /// `d x Q` mixing matrix.
    pub mixing: Matrix<f64>,
}

impl SyntheticTask {
    /// Binary attribute vocabulary with the codes of the training and
    /// zero-shot classes.
    pub fn codes(&self) -> Result<(SemanticSpec<f64>, CodeMatrix<f64>, CodeMatrix<f64>)> {
        let (spec, all) = attribute_codes(&self.attributes, true)?;
        Ok((spec, all.select(&self.split.train_classes)?, all.select(&self.split.zs_classes)?))
    }
}

fn random_code(q: usize, rng: &mut RngStream) -> Vec<f64> {
    (0..q).map(|_| f64::from(rng.sign())).collect()
}

fn draw_codes(config: &SyntheticConfig, rng: &mut RngStream) -> Result<Vec<Vec<f64>>> {
    let q = config.q;
    let mut codes: Vec<Vec<f64>> = Vec::with_capacity(config.c_train + config.c_zs);
    let exhausted = |c: usize| {
        Error::data(format!(
            "no acceptable code for class {c} after {MAX_RESAMPLES} draws"
        ))
    };
    for c in 0..config.c_train {
        let code = (0..MAX_RESAMPLES)
            .map(|_| random_code(q, rng))
            .find(|v| !codes.contains(v))
            .ok_or_else(|| exhausted(c))?;
        codes.push(code);
    }
    let train = Matrix::from_columns(&codes)?;
    let train_rank = orthonormal_basis(&train, 1e-10).cols();
    let mut skipped = false;
    for c in config.c_train..config.c_train + config.c_zs {
        let misaligned = rng.bernoulli(config.misalignment);
        if misaligned && train_rank == q {
            skipped = true;
        }
        let need_far = misaligned && train_rank < q;
        let mut found = None;
        for _ in 0..MAX_RESAMPLES {
            let v = random_code(q, rng);
            if codes.contains(&v) {
                continue;
            }
            if need_far {
                let (d, _) = alignment_distance_matrix(&train, &Matrix::from_columns(&[&v])?)?;
                if d[0] < MISALIGNED_DISTANCE {
                    continue;
                }
            }
            found = Some(v);
            break;
        }
        codes.push(found.ok_or_else(|| exhausted(c))?);
    }
    if skipped {
        debug!("training codes span the whole code space; misalignment has no effect");
    }
    Ok(codes)
}

fn samples(
    codes: &[Vec<f64>],
    classes: std::ops::Range<usize>,
    names: &[String],
    mixing: &Matrix<f64>,
    config: &SyntheticConfig,
    first_id: usize,
    rng: &mut RngStream,
) -> Result<FeatureSet> {
    let (d, q) = (config.d, config.q);
    let n = config.n_per_class * classes.len();
    let mut x = Vec::with_capacity(n * d);
    let mut attrs = Vec::with_capacity(n * q);
    let mut labels = Vec::with_capacity(n);
    for (label, c) in classes.clone().enumerate() {
        let mean = mixing.matvec(&codes[c])?;
        for _ in 0..config.n_per_class {
            x.extend(mean.iter().map(|m| m + config.noise_sigma * rng.normal::<f64>()));
            attrs.extend(codes[c].iter().map(|v| (v + 1.0) / 2.0));
            labels.push(label);
        }
    }
    FeatureSet::new(
        (first_id..first_id + n).map(|i| format!("s{i}")).collect(),
        Matrix::from_vec(n, d, x)?,
        labels,
        names[classes].to_vec(),
        Some(Matrix::from_vec(n, q, attrs)?),
    )
}

/// Draws distinct `+-1` class codes, a random linear map from codes to
/// features, and noisy samples `x = A phi(y) + sigma * noise` for every
/// class. With probability `misalignment`, each zero-shot code is redrawn
/// until it lies at least 0.5 away from the span of the training codes
/// (impossible, and skipped, when the training codes span the whole space).
pub fn generate_synthetic(config: &SyntheticConfig) -> Result<SyntheticTask> {
    config.validate()?;
    let (q, d) = (config.q, config.d);
    let total = config.c_train + config.c_zs;
    let codes = draw_codes(config, &mut RngStream::derived(config.seed, 1))?;

    let mut rng = RngStream::derived(config.seed, 2);
    let scale = 1.0 / (q as f64).sqrt();
    let mixing = Matrix::from_fn(d, q, |_, _| rng.normal::<f64>() * scale);

    let width = total.saturating_sub(1).to_string().len().max(2);
    let class_names: Vec<String> = (0..total).map(|c| format!("class{c:0width$}")).collect();
    let qwidth = q.saturating_sub(1).to_string().len().max(2);
    let attribute_names: Vec<String> = (0..q).map(|k| format!("a{k:0qwidth$}")).collect();

    let mut noise = RngStream::derived(config.seed, 3);
    let train = samples(&codes, 0..config.c_train, &class_names, &mixing, config, 0, &mut noise)?;
    let zs = samples(&codes, config.c_train..total, &class_names, &mixing, config, train.len(), &mut noise)?;

    let values = Matrix::from_fn(total, q, |c, k| codes[c][k]);
    let attributes = AttributeTable::new(class_names.clone(), attribute_names, values)?;
    Ok(SyntheticTask {
        config: config.clone(),
        train,
        zs,
        attributes,
        split: SplitSpec {
            train_classes: class_names[..config.c_train].to_vec(),
            zs_classes: class_names[config.c_train..].to_vec(),
            validation_classes: Vec::new(),
        },
        mixing,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::alignment_distance;
    use crate::zeroshot::zs_classify;

    fn small(seed: u64) -> SyntheticConfig {
        SyntheticConfig {
            q: 8,
            c_train: 6,
            c_zs: 3,
            d: 12,
            n_per_class: 5,
            noise_sigma: 0.3,
            misalignment: 0.0,
            seed,
        }
    }

    /// Solves `A^T A f = A^T x` by Gaussian elimination with partial pivoting.
    fn least_squares(a: &Matrix<f64>, x: &[f64]) -> Vec<f64> {
        let q = a.cols();
        let ata = a.transpose().matmul(a).unwrap();
        let atx = a.tr_matvec(x).unwrap();
        let mut m: Vec<Vec<f64>> = (0..q)
            .map(|i| {
                let mut r = ata.row(i).to_vec();
                r.push(atx[i]);
                r
            })
            .collect();
        for col in 0..q {
            let p = (col..q).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs())).unwrap();
            m.swap(col, p);
            for r in 0..q {
                if r != col {
                    let f = m[r][col] / m[col][col];
                    for k in col..=q {
                        m[r][k] -= f * m[col][k];
                    }
                }
            }
        }
        (0..q).map(|i| m[i][q] / m[i][i]).collect()
    }

    #[test]
    fn attribute_labels_match_class_rows() {
        let task = generate_synthetic(&small(3)).unwrap();
        for set in [&task.train, &task.zs] {
            let a = set.attributes.as_ref().unwrap();
            for i in 0..set.len() {
                let row = task.attributes.row_of(&set.class_names[set.labels[i]]).unwrap();
                let expected: Vec<f64> = task.attributes.values.row(row).iter().map(|v| (v + 1.0) / 2.0).collect();
                assert_eq!(a.row(i), expected.as_slice());
            }
        }
        let (spec, train, zs) = task.codes().unwrap();
        assert_eq!(spec.len(), 8);
        assert_eq!(train.num_classes(), 6);
        assert_eq!(zs.num_classes(), 3);
    }

    #[test]
    fn codes_are_distinct() {
        let task = generate_synthetic(&SyntheticConfig {
            q: 3,
            c_train: 5,
            c_zs: 3,
            ..small(1)
        })
        .unwrap();
        let v = &task.attributes.values;
        for i in 0..8 {
            for j in 0..i {
                assert_ne!(v.row(i), v.row(j));
            }
        }
        assert!(generate_synthetic(&SyntheticConfig { q: 3, c_train: 6, c_zs: 3, ..small(1) }).is_err());
    }

    #[test]
    fn same_seed_same_task() {
        assert_eq!(generate_synthetic(&small(9)).unwrap(), generate_synthetic(&small(9)).unwrap());
        assert_ne!(generate_synthetic(&small(9)).unwrap(), generate_synthetic(&small(10)).unwrap());
    }

    #[test]
    fn noiseless_samples_decode_exactly() {
        let task = generate_synthetic(&SyntheticConfig {
            noise_sigma: 0.0,
            ..small(5)
        })
        .unwrap();
        let (_, _, zs_codes) = task.codes().unwrap();
        for i in 0..task.zs.len() {
            let y = task.zs.labels[i];
            let mean = task.mixing.matvec(&zs_codes.column(y)).unwrap();
            assert_eq!(task.zs.features.row(i), mean.as_slice());
            let f = least_squares(&task.mixing, task.zs.features.row(i));
            assert_eq!(zs_classify(&f, &zs_codes.phi).unwrap(), y);
        }
    }

    #[test]
    fn aligned_when_training_codes_span_the_space() {
        let task = generate_synthetic(&SyntheticConfig {
            q: 6,
            c_train: 10,
            c_zs: 4,
            ..small(2)
        })
        .unwrap();
        let (_, train, zs) = task.codes().unwrap();
        let r = alignment_distance(&train, &zs).unwrap();
        assert_eq!(r.train_rank, 6);
        assert!(r.mean_distance < 1e-9, "{}", r.mean_distance);
    }

    #[test]
    fn full_misalignment_pushes_codes_away() {
        let task = generate_synthetic(&SyntheticConfig {
            q: 16,
            c_train: 12,
            c_zs: 4,
            misalignment: 1.0,
            ..small(4)
        })
        .unwrap();
        let (_, train, zs) = task.codes().unwrap();
        let r = alignment_distance(&train, &zs).unwrap();
        assert!(r.distances.iter().all(|&d| d >= MISALIGNED_DISTANCE), "{:?}", r.distances);
    }
}
