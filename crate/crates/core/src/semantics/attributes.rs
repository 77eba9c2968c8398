use serde::{Deserialize, Serialize};

use super::{CodeMatrix, SemanticDef, SemanticSpec};
use crate::error::{Error, Result};
use crate::numerics::{Matrix, Real};

/// Class-by-attribute value grid with its row and column names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeTable<T> {
    pub class_names: Vec<String>,
    pub attribute_names: Vec<String>,
    /// `C x Q`, one row per class.
    pub values: Matrix<T>,
}

impl<T: Real> AttributeTable<T> {
    pub fn new(class_names: Vec<String>, attribute_names: Vec<String>, values: Matrix<T>) -> Result<Self> {
        if values.shape() != (class_names.len(), attribute_names.len()) {
            return Err(Error::contract(format!(
                "attribute grid is {:?}, names describe {}x{}",
                values.shape(),
                class_names.len(),
                attribute_names.len()
            )));
        }
        Ok(AttributeTable {
            class_names,
            attribute_names,
            values,
        })
    }

    pub fn row_of(&self, class: &str) -> Option<usize> {
        self.class_names.iter().position(|c| c == class)
    }

    /// Table restricted to `classes`, in that order.
    pub fn select(&self, classes: &[String]) -> Result<AttributeTable<T>> {
        let idx = classes
            .iter()
            .map(|c| {
                self.row_of(c)
                    .ok_or_else(|| Error::data(format!("class '{c}' missing from attribute table")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(AttributeTable {
            class_names: classes.to_vec(),
            attribute_names: self.attribute_names.clone(),
            values: self.values.select_rows(&idx),
        })
    }
}

fn binary_value<T: Real>(v: T) -> Option<T> {
    if v == T::one() {
        Some(T::one())
    } else if v == T::zero() || v == -T::one() {
        Some(-T::one())
    } else {
        None
    }
}

pub(crate) fn attribute_spec<T: Real>(table: &AttributeTable<T>, binary: bool) -> Result<SemanticSpec<T>> {
    let defs = table
        .attribute_names
        .iter()
        .map(|a| {
            let name = format!("attr:{a}");
            if binary {
                SemanticDef::binary(name)
            } else {
                SemanticDef::continuous(name)
            }
        })
        .collect();
    SemanticSpec::new(defs)
}

/// Codes for every row of `table` under an attribute vocabulary.
pub(crate) fn encode_attributes<T: Real>(
    table: &AttributeTable<T>,
    binary: bool,
    classes: &[String],
) -> Result<CodeMatrix<T>> {
    let q = table.attribute_names.len();
    let mut phi = Matrix::zeros(q, classes.len());
    let mut state_table = vec![vec![None; classes.len()]; q];
    for (c, class) in classes.iter().enumerate() {
        let r = table
            .row_of(class)
            .ok_or_else(|| Error::data(format!("class '{class}' missing from attribute table")))?;
        for k in 0..q {
            let v = table.values[(r, k)];
            let bad = || {
                Error::data(format!(
                    "class '{class}', attribute '{}': value {v} out of range",
                    table.attribute_names[k]
                ))
            };
            if binary {
                let code = binary_value(v).ok_or_else(bad)?;
                phi[(k, c)] = code;
                state_table[k][c] = Some(if code > T::zero() { 0 } else { 1 });
            } else {
                if !v.is_finite() || v.abs() > T::one() {
                    return Err(bad());
                }
                phi[(k, c)] = v;
            }
        }
    }
    Ok(CodeMatrix {
        phi,
        state_table,
        class_names: classes.to_vec(),
    })
}

/// Attribute vocabulary and codes for all classes of the table, in row order.
///
/// Binary mode accepts `{-1, +1}` or `{0, 1}` entries (0 is read as absent);
/// present maps to state 0, absent to state 1. Continuous mode requires
/// entries in `[-1, 1]` and yields no state table entries.
pub fn attribute_codes<T: Real>(
    table: &AttributeTable<T>,
    binary: bool,
) -> Result<(SemanticSpec<T>, CodeMatrix<T>)> {
    let spec = attribute_spec(table, binary)?;
    let codes = encode_attributes(table, binary, &table.class_names)?;
    Ok((spec, codes))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn binary_transcription() {
        let t = AttributeTable::new(
            names(&["a", "b"]),
            names(&["x", "y", "z"]),
            Matrix::from_rows(&[[1.0, 1.0, -1.0], [-1.0, 1.0, 1.0]]).unwrap(),
        )
        .unwrap();
        let (spec, codes) = attribute_codes(&t, true).unwrap();
        assert_eq!(spec.total_dim, 3);
        assert_eq!(codes.column(0), vec![1.0, 1.0, -1.0]);
        assert_eq!(codes.column(1), vec![-1.0, 1.0, 1.0]);
        assert_eq!(codes.state_table[0], vec![Some(0), Some(1)]);
        codes.validate(&spec).unwrap();
    }

    #[test]
    fn zero_one_remapped() {
        let t = AttributeTable::new(
            names(&["a", "b"]),
            names(&["x", "y"]),
            Matrix::from_rows(&[[1.0, 0.0], [0.0, 1.0]]).unwrap(),
        )
        .unwrap();
        let (_, codes) = attribute_codes(&t, true).unwrap();
        assert_eq!(codes.phi.as_slice(), &[1.0, -1.0, -1.0, 1.0]);
    }

    #[test]
    fn continuous_out_of_range_names_location() {
        let t = AttributeTable::new(
            names(&["a", "b"]),
            names(&["x"]),
            Matrix::from_rows(&[[0.5], [1.2]]).unwrap(),
        )
        .unwrap();
        let err = attribute_codes(&t, false).unwrap_err().to_string();
        assert!(err.contains("'b'") && err.contains("'x'") && err.contains("1.2"), "{err}");
    }

    #[test]
    fn awa_shape() {
        let c = 40;
        let q = 85;
        let values = Matrix::from_fn(c, q, |i, j| if (i * 7 + j * 3 + i * j) % 5 < 2 { 1.0 } else { -1.0 });
        let t = AttributeTable::new(
            (0..c).map(|i| format!("class{i}")).collect(),
            (0..q).map(|i| format!("attr{i}")).collect(),
            values,
        )
        .unwrap();
        let (spec, codes) = attribute_codes(&t, true).unwrap();
        assert_eq!(spec.total_dim, 85);
        assert_eq!(codes.phi.shape(), (85, 40));
    }
}
