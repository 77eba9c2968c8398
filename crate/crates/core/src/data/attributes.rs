use std::path::Path;

use log::warn;
use serde::{Deserialize, Serialize};

use super::{csv_line, csv_records, parse_f64, read_text, write_text};
use crate::error::{Error, Result};
use crate::numerics::Matrix;
use crate::semantics::AttributeTable;

/// How raw attribute values were mapped onto the code range `[-1, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Rescaling {
    /// `1` stays `1`; `0` and `-1` become `-1`.
    Binary,
    /// Per attribute, `v -> 2 (v - min) / (max - min) - 1`. Columns already
    /// spanning exactly `[-1, 1]` are left untouched; constant columns become
    /// all zeros and are listed in `constant`.
    MinMax {
        min: Vec<f64>,
        max: Vec<f64>,
        constant: Vec<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeMatrix {
    pub table: AttributeTable<f64>,
    pub rescaling: Rescaling,
}

/// Reads a `class,attr1,..,attrQ` grid with one row per class.
pub fn load_attribute_matrix(path: &Path, binary: bool) -> Result<AttributeMatrix> {
    let text = read_text(path)?;
    let records = csv_records(&text, path)?;
    let (header_line, header) = records
        .first()
        .ok_or_else(|| Error::parse(path, 1, "empty attribute file"))?;
    if header.len() < 2 {
        return Err(Error::parse(path, *header_line, "header needs a class column and at least one attribute"));
    }
    let attribute_names: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    for (j, a) in attribute_names.iter().enumerate() {
        if a.is_empty() || attribute_names[..j].contains(a) {
            return Err(Error::parse(path, *header_line, format!("attribute name '{a}' empty or repeated")));
        }
    }
    let q = attribute_names.len();
    let mut class_names: Vec<String> = Vec::new();
    let mut raw = Vec::with_capacity((records.len() - 1) * q);
    for (line, rec) in &records[1..] {
        if rec.len() != q + 1 {
            return Err(Error::parse(
                path,
                *line,
                format!("row has {} fields, header has {}", rec.len(), q + 1),
            ));
        }
        let class = &rec[0];
        if class.is_empty() || class_names.iter().any(|c| c == class) {
            return Err(Error::parse(path, *line, format!("class name '{class}' empty or repeated")));
        }
        class_names.push(class.to_string());
        for j in 0..q {
            let v = parse_f64(&rec[j + 1], path, *line, &format!("attribute '{}'", attribute_names[j]))?;
            if binary {
                raw.push(match v {
                    1.0 => 1.0,
                    0.0 | -1.0 => -1.0,
                    _ => {
                        return Err(Error::parse(
                            path,
                            *line,
                            format!("binary attribute '{}' has value {v}", attribute_names[j]),
                        ))
                    }
                });
            } else {
                raw.push(v);
            }
        }
    }
    if class_names.is_empty() {
        return Err(Error::parse(path, *header_line, "attribute file has no class rows"));
    }
    let mut values = Matrix::from_vec(class_names.len(), q, raw)?;
    let rescaling = if binary {
        Rescaling::Binary
    } else {
        min_max(&mut values, &attribute_names, path)
    };
    Ok(AttributeMatrix {
        table: AttributeTable::new(class_names, attribute_names, values)?,
        rescaling,
    })
}

fn min_max(values: &mut Matrix<f64>, names: &[String], path: &Path) -> Rescaling {
    let (rows, q) = values.shape();
    let mut min = Vec::with_capacity(q);
    let mut max = Vec::with_capacity(q);
    let mut constant = Vec::new();
    for j in 0..q {
        let col = values.column(j);
        let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        min.push(lo);
        max.push(hi);
        if lo == -1.0 && hi == 1.0 {
            continue;
        }
        if lo == hi {
            warn!(
                "{}: attribute '{}' is constant ({lo}); its codes are set to 0",
                path.display(),
                names[j]
            );
            constant.push(names[j].clone());
        }
        for i in 0..rows {
            values[(i, j)] = if lo == hi {
                0.0
            } else {
                (2.0 * (values[(i, j)] - lo) / (hi - lo) - 1.0).clamp(-1.0, 1.0)
            };
        }
    }
    Rescaling::MinMax { min, max, constant }
}

pub fn save_attribute_matrix(path: &Path, table: &AttributeTable<f64>) -> Result<()> {
    let mut text = csv_line(std::iter::once("class".to_string()).chain(table.attribute_names.iter().cloned()));
    for (i, c) in table.class_names.iter().enumerate() {
        text.push_str(&csv_line(
            std::iter::once(c.clone()).chain(table.values.row(i).iter().map(|v| v.to_string())),
        ));
    }
    write_text(path, &text)
}
