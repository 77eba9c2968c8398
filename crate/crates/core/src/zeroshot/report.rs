use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Zero-shot accuracy summary. Classes without test samples have no accuracy
/// and are left out of the mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub class_names: Vec<String>,
    pub zs_mca: f64,
    pub per_class_accuracy: Vec<Option<f64>>,
    /// `confusion[true][predicted]`.
    pub confusion: Vec<Vec<u64>>,
    pub n_samples: u64,
}

impl EvalReport {
    pub fn from_predictions(class_names: Vec<String>, predictions: &[usize], labels: &[usize]) -> Result<Self> {
        if predictions.len() != labels.len() {
            return Err(Error::contract(format!(
                "{} predictions for {} labels",
                predictions.len(),
                labels.len()
            )));
        }
        let c = class_names.len();
        let mut confusion = vec![vec![0u64; c]; c];
        for (i, (&p, &y)) in predictions.iter().zip(labels).enumerate() {
            if y >= c || p >= c {
                return Err(Error::data(format!(
                    "sample {i}: label {y} or prediction {p} outside {c} zero-shot classes"
                )));
            }
            confusion[y][p] += 1;
        }
        Self::from_confusion(class_names, confusion)
    }

    /// Recomputes every statistic from a confusion matrix.
    pub fn from_confusion(class_names: Vec<String>, confusion: Vec<Vec<u64>>) -> Result<Self> {
        let c = class_names.len();
        if confusion.len() != c || confusion.iter().any(|r| r.len() != c) {
            return Err(Error::data(format!("confusion matrix is not {c}x{c}")));
        }
        let per_class_accuracy: Vec<Option<f64>> = confusion
            .iter()
            .enumerate()
            .map(|(y, row)| {
                let n: u64 = row.iter().sum();
                (n > 0).then(|| row[y] as f64 / n as f64)
            })
            .collect();
        let present: Vec<f64> = per_class_accuracy.iter().flatten().copied().collect();
        let zs_mca = if present.is_empty() {
            f64::NAN
        } else {
            present.iter().sum::<f64>() / present.len() as f64
        };
        let n_samples = confusion.iter().flatten().sum();
        Ok(EvalReport {
            class_names,
            zs_mca,
            per_class_accuracy,
            confusion,
            n_samples,
        })
    }

    pub fn excluded_classes(&self) -> Vec<&str> {
        self.class_names
            .iter()
            .zip(&self.per_class_accuracy)
            .filter(|(_, a)| a.is_none())
            .map(|(n, _)| n.as_str())
            .collect()
    }

    /// Flat `key=value` text, one entry per line.
    pub fn to_kv(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("zs_mca={}\n", self.zs_mca));
        out.push_str(&format!("n_samples={}\n", self.n_samples));
        out.push_str(&format!("n_classes={}\n", self.class_names.len()));
        out.push_str(&format!("excluded={}\n", self.excluded_classes().join(";")));
        for (name, acc) in self.class_names.iter().zip(&self.per_class_accuracy) {
            match acc {
                Some(a) => out.push_str(&format!("accuracy.{name}={a}\n")),
                None => out.push_str(&format!("accuracy.{name}=none\n")),
            }
        }
        out
    }

    /// Confusion counts with true classes as rows.
    pub fn confusion_csv(&self) -> String {
        let mut out = String::from("true\\predicted");
        for n in &self.class_names {
            out.push(',');
            out.push_str(n);
        }
        out.push('\n');
        for (name, row) in self.class_names.iter().zip(&self.confusion) {
            out.push_str(name);
            for v in row {
                out.push_str(&format!(",{v}"));
            }
            out.push('\n');
        }
        out
    }

    /// Parses [`EvalReport::confusion_csv`] output and recomputes the report.
    pub fn parse_confusion_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or_else(|| Error::data("empty confusion file"))?;
        let class_names: Vec<String> = header.split(',').skip(1).map(str::to_string).collect();
        let mut confusion = Vec::with_capacity(class_names.len());
        for (i, (ln, line)) in lines.enumerate() {
            let mut fields = line.split(',');
            let name = fields.next().unwrap_or_default();
            if class_names.get(i).map(String::as_str) != Some(name) {
                return Err(Error::data(format!("confusion line {}: unexpected row '{name}'", ln + 1)));
            }
            let row = fields
                .map(|f| {
                    f.trim()
                        .parse::<u64>()
                        .map_err(|_| Error::data(format!("confusion line {}: bad count '{f}'", ln + 1)))
                })
                .collect::<Result<Vec<_>>>()?;
            confusion.push(row);
        }
        Self::from_confusion(class_names, confusion)
    }
}
