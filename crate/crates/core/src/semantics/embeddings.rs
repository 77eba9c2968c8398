use serde::{Deserialize, Serialize};

use super::{CodeMatrix, SemanticDef, SemanticKind, SemanticSpec};
use crate::error::{Error, Result};
use crate::numerics::{norm, Matrix, Real};

/// Per-class vectors taken from one pre-trained embedding model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingTable<T> {
    pub name: String,
    pub dim: usize,
    pub entries: Vec<(String, Vec<T>)>,
    /// Classes whose vector was obtained by averaging word tokens.
    pub fallbacks: Vec<String>,
}

impl<T: Real> EmbeddingTable<T> {
    pub fn new(name: impl Into<String>, entries: Vec<(String, Vec<T>)>) -> Result<Self> {
        let name = name.into();
        let dim = entries.first().map_or(0, |e| e.1.len());
        if let Some((c, v)) = entries.iter().find(|e| e.1.len() != dim) {
            return Err(Error::data(format!(
                "embedding '{name}': vector for '{c}' has {} entries, expected {dim}",
                v.len()
            )));
        }
        Ok(EmbeddingTable {
            name,
            dim,
            entries,
            fallbacks: Vec::new(),
        })
    }

    pub fn get(&self, class: &str) -> Option<&[T]> {
        self.entries.iter().find(|e| e.0 == class).map(|e| e.1.as_slice())
    }

    fn unit(&self, class: &str) -> Result<Vec<T>> {
        let v = self.get(class).ok_or_else(|| {
            Error::data(format!("embedding '{}' has no vector for class '{class}'", self.name))
        })?;
        let n = norm(v);
        if n == T::zero() || !n.is_finite() {
            return Err(Error::data(format!(
                "embedding '{}' vector for class '{class}' cannot be normalized",
                self.name
            )));
        }
        Ok(v.iter().map(|&x| x / n).collect())
    }
}

/// One semantic per table; its states are `classes`, with the normalized
/// class vectors as state codewords.
pub(crate) fn embedding_spec<T: Real>(tables: &[EmbeddingTable<T>], classes: &[String]) -> Result<SemanticSpec<T>> {
    let mut defs = Vec::with_capacity(tables.len());
    for (k, t) in tables.iter().enumerate() {
        let codewords = classes.iter().map(|c| t.unit(c)).collect::<Result<Vec<_>>>()?;
        let name = if tables.iter().filter(|o| o.name == t.name).count() > 1 {
            format!("emb:{}#{k}", t.name)
        } else {
            format!("emb:{}", t.name)
        };
        defs.push(SemanticDef {
            name,
            kind: SemanticKind::Embedding,
            state_count: classes.len(),
            state_dim: t.dim,
            state_codewords: codewords,
            state_names: classes.to_vec(),
        });
    }
    SemanticSpec::new(defs)
}

pub(crate) fn encode_embeddings<T: Real>(
    tables: &[EmbeddingTable<T>],
    spec: &SemanticSpec<T>,
    classes: &[String],
) -> Result<CodeMatrix<T>> {
    if tables.len() != spec.len() {
        return Err(Error::contract("embedding vocabulary does not match the tables"));
    }
    let offsets = spec.offsets();
    let mut phi = Matrix::zeros(spec.total_dim, classes.len());
    let mut state_table = vec![vec![None; classes.len()]; spec.len()];
    for (k, (t, sem)) in tables.iter().zip(&spec.semantics).enumerate() {
        if t.dim != sem.state_dim {
            return Err(Error::data(format!(
                "embedding '{}' has dimension {}, vocabulary expects {}",
                t.name, t.dim, sem.state_dim
            )));
        }
        for (c, class) in classes.iter().enumerate() {
            let state = sem.state_index(class);
            let v = match state {
                Some(s) => sem.state_codewords[s].clone(),
                None => t.unit(class)?,
            };
            for (i, x) in v.into_iter().enumerate() {
                phi[(offsets[k] + i, c)] = x;
            }
            state_table[k][c] = state;
        }
    }
    Ok(CodeMatrix {
        phi,
        state_table,
        class_names: classes.to_vec(),
    })
}

/// Vocabulary and codes from embedding tables: each class is encoded by the
/// concatenation of its unit-normalized vectors.
pub fn embedding_codes<T: Real>(
    tables: &[EmbeddingTable<T>],
    classes: &[String],
) -> Result<(SemanticSpec<T>, CodeMatrix<T>)> {
    let spec = embedding_spec(tables, classes)?;
    let codes = encode_embeddings(tables, &spec, classes)?;
    Ok((spec, codes))
}
