use std::path::{Path, PathBuf};

use super::{csv_line, csv_records, parse_f64, read_text, with_suffix, write_text};
use crate::error::{Error, Result};
use crate::model::Dataset;
use crate::numerics::Matrix;

/// Labeled feature vectors. `labels` index `class_names`; `attributes`, when
/// present, holds per-sample attribute labels in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSet {
    pub sample_ids: Vec<String>,
    pub features: Matrix<f64>,
    pub labels: Vec<usize>,
    pub class_names: Vec<String>,
    pub attributes: Option<Matrix<f64>>,
}

impl FeatureSet {
    pub fn new(
        sample_ids: Vec<String>,
        features: Matrix<f64>,
        labels: Vec<usize>,
        class_names: Vec<String>,
        attributes: Option<Matrix<f64>>,
    ) -> Result<Self> {
        let n = labels.len();
        if sample_ids.len() != n || features.rows() != n {
            return Err(Error::data(format!(
                "{} ids, {} feature rows and {n} labels",
                sample_ids.len(),
                features.rows()
            )));
        }
        if let Some(&y) = labels.iter().find(|&&y| y >= class_names.len()) {
            return Err(Error::data(format!("label {y} out of range for {} classes", class_names.len())));
        }
        if let Some(a) = &attributes {
            if a.rows() != n {
                return Err(Error::data(format!("{} attribute rows for {n} samples", a.rows())));
            }
        }
        Ok(FeatureSet {
            sample_ids,
            features,
            labels,
            class_names,
            attributes,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.cols()
    }

    pub fn dataset(&self) -> Result<Dataset<f64>> {
        Dataset::with_attributes(self.features.clone(), self.labels.clone(), self.attributes.clone())
    }

    /// Same samples with labels re-expressed against `classes`.
    pub fn reindex(&self, classes: &[String]) -> Result<FeatureSet> {
        let map = self
            .class_names
            .iter()
            .map(|c| classes.iter().position(|k| k == c))
            .collect::<Vec<_>>();
        let labels = self
            .labels
            .iter()
            .zip(&self.sample_ids)
            .map(|(&y, id)| {
                map[y].ok_or_else(|| {
                    Error::data(format!("sample '{id}' has class '{}' outside the class list", self.class_names[y]))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        FeatureSet::new(
            self.sample_ids.clone(),
            self.features.clone(),
            labels,
            classes.to_vec(),
            self.attributes.clone(),
        )
    }

    pub fn subset(&self, idx: &[usize]) -> FeatureSet {
        FeatureSet {
            sample_ids: idx.iter().map(|&i| self.sample_ids[i].clone()).collect(),
            features: self.features.select_rows(idx),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            class_names: self.class_names.clone(),
            attributes: self.attributes.as_ref().map(|a| a.select_rows(idx)),
        }
    }

    /// Splits off, per class, the samples after the first `keep` (in file
    /// order) into a second set.
    pub fn holdout(&self, keep: usize) -> (FeatureSet, FeatureSet) {
        let mut seen = vec![0usize; self.class_names.len()];
        let (mut a, mut b) = (Vec::new(), Vec::new());
        for (i, &y) in self.labels.iter().enumerate() {
            if seen[y] < keep {
                a.push(i);
            } else {
                b.push(i);
            }
            seen[y] += 1;
        }
        (self.subset(&a), self.subset(&b))
    }
}

/// Sidecar holding the class list of a feature file.
pub fn class_list_path(features: &Path) -> PathBuf {
    with_suffix(features, ".classes")
}

/// One class name per line; blank lines and `#` comments are skipped.
pub fn load_class_list(path: &Path) -> Result<Vec<String>> {
    let text = read_text(path)?;
    let mut out: Vec<String> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let name = line.trim();
        if name.is_empty() || name.starts_with('#') {
            continue;
        }
        if out.iter().any(|c| c == name) {
            return Err(Error::parse(path, i + 1, format!("duplicate class '{name}'")));
        }
        out.push(name.to_string());
    }
    Ok(out)
}

pub fn save_class_list(path: &Path, classes: &[String]) -> Result<()> {
    let mut text = String::new();
    for c in classes {
        text.push_str(c);
        text.push('\n');
    }
    write_text(path, &text)
}

/// Reads `id,label,f0..f{d-1}[,a0..a{Q-1}]`. Labels are class names resolved
/// against `classes`, else against the sidecar class list, else numbered in
/// order of first appearance.
pub fn load_features(path: &Path, classes: Option<&[String]>) -> Result<FeatureSet> {
    let sidecar = class_list_path(path);
    let class_names: Option<Vec<String>> = match classes {
        Some(c) => Some(c.to_vec()),
        None if sidecar.exists() => Some(load_class_list(&sidecar)?),
        None => None,
    };
    let fixed = class_names.is_some();
    let mut class_names = class_names.unwrap_or_default();

    let text = read_text(path)?;
    let records = csv_records(&text, path)?;
    let (header_line, header) = records
        .first()
        .ok_or_else(|| Error::parse(path, 1, "empty feature file"))?;
    let cols: Vec<&str> = header.iter().collect();
    if cols.len() < 2 || cols[0] != "id" || cols[1] != "label" {
        return Err(Error::parse(path, *header_line, "header must start with 'id,label'"));
    }
    let mut d = 0;
    while cols.get(2 + d) == Some(&format!("f{d}").as_str()) {
        d += 1;
    }
    let mut q = 0;
    while cols.get(2 + d + q) == Some(&format!("a{q}").as_str()) {
        q += 1;
    }
    if 2 + d + q != cols.len() {
        return Err(Error::parse(
            path,
            *header_line,
            format!("unexpected column '{}'", cols[2 + d + q]),
        ));
    }

    let n = records.len() - 1;
    let mut ids = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    let mut x = Vec::with_capacity(n * d);
    let mut attrs = Vec::with_capacity(n * q);
    for (line, rec) in &records[1..] {
        if rec.len() != cols.len() {
            return Err(Error::parse(
                path,
                *line,
                format!("row has {} fields, header has {}", rec.len(), cols.len()),
            ));
        }
        let id = &rec[0];
        if id.is_empty() {
            return Err(Error::parse(path, *line, "empty sample id"));
        }
        ids.push(id.to_string());
        let label = &rec[1];
        let y = match class_names.iter().position(|c| c == label) {
            Some(y) => y,
            None if !fixed && !label.is_empty() => {
                class_names.push(label.to_string());
                class_names.len() - 1
            }
            None => return Err(Error::parse(path, *line, format!("unknown class '{label}'"))),
        };
        labels.push(y);
        for j in 0..d {
            x.push(parse_f64(&rec[2 + j], path, *line, &format!("column f{j}"))?);
        }
        for j in 0..q {
            let v = parse_f64(&rec[2 + d + j], path, *line, &format!("column a{j}"))?;
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::parse(path, *line, format!("attribute label a{j} = {v} outside [0, 1]")));
            }
            attrs.push(v);
        }
    }
    let attributes = (q > 0).then(|| Matrix::from_vec(n, q, attrs)).transpose()?;
    FeatureSet::new(ids, Matrix::from_vec(n, d, x)?, labels, class_names, attributes)
}

/// Writes the feature CSV and its class-list sidecar. Values use the
/// shortest representation that parses back to the same `f64`.
pub fn save_features(path: &Path, set: &FeatureSet) -> Result<()> {
    let d = set.dim();
    let q = set.attributes.as_ref().map_or(0, |a| a.cols());
    let mut text = csv_line(
        ["id".to_string(), "label".to_string()]
            .into_iter()
            .chain((0..d).map(|j| format!("f{j}")))
            .chain((0..q).map(|j| format!("a{j}"))),
    );
    for i in 0..set.len() {
        let attrs = set.attributes.as_ref().map_or(&[][..], |a| a.row(i));
        text.push_str(&csv_line(
            [set.sample_ids[i].clone(), set.class_names[set.labels[i]].clone()]
                .into_iter()
                .chain(set.features.row(i).iter().map(|v| v.to_string()))
                .chain(attrs.iter().map(|v| v.to_string())),
        ));
    }
    write_text(path, &text)?;
    save_class_list(&class_list_path(path), &set.class_names)
}
