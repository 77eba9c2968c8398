use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{Matrix, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SemanticKind {
    BinaryAttribute,
    ContinuousAttribute,
    TaxonomyNode,
    Embedding,
}

impl SemanticKind {
    /// Semantics with a finite set of states and a state codeword per state.
    pub fn is_discrete(self) -> bool {
        !matches!(self, SemanticKind::ContinuousAttribute)
    }

    /// Semantics supervised through a sigmoid of their single coordinate.
    pub fn is_scalar(self) -> bool {
        matches!(self, SemanticKind::BinaryAttribute | SemanticKind::ContinuousAttribute)
    }
}

/// One semantic of the vocabulary and its state codeword set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemanticDef<T> {
    pub name: String,
    pub kind: SemanticKind,
    pub state_count: usize,
    pub state_dim: usize,
    pub state_codewords: Vec<Vec<T>>,
    pub state_names: Vec<String>,
}

impl<T: Real> SemanticDef<T> {
    pub fn binary(name: impl Into<String>) -> Self {
        SemanticDef {
            name: name.into(),
            kind: SemanticKind::BinaryAttribute,
            state_count: 2,
            state_dim: 1,
            state_codewords: vec![vec![T::one()], vec![-T::one()]],
            state_names: vec!["present".into(), "absent".into()],
        }
    }

    pub fn continuous(name: impl Into<String>) -> Self {
        SemanticDef {
            name: name.into(),
            kind: SemanticKind::ContinuousAttribute,
            state_count: 0,
            state_dim: 1,
            state_codewords: Vec::new(),
            state_names: Vec::new(),
        }
    }

    /// State codewords as the columns of a `state_dim x state_count` matrix.
    pub fn codeword_matrix(&self) -> Matrix<T> {
        Matrix::from_fn(self.state_dim, self.state_count, |i, j| self.state_codewords[j][i])
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.state_names.iter().position(|s| s == name)
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::contract(format!("semantic '{}': {msg}", self.name)));
        match self.kind {
            SemanticKind::BinaryAttribute => {
                let ok = self.state_count == 2
                    && self.state_dim == 1
                    && self.state_codewords == vec![vec![T::one()], vec![-T::one()]];
                if !ok {
                    return bad("binary attributes have codewords {+1, -1}");
                }
            }
            SemanticKind::ContinuousAttribute => {
                if self.state_dim != 1 {
                    return bad("continuous attributes are one-dimensional");
                }
            }
            SemanticKind::TaxonomyNode => {
                if self.state_count < 3 || self.state_dim + 1 != self.state_count {
                    return bad("taxonomy nodes have children + reject states in children dimensions");
                }
            }
            SemanticKind::Embedding => {
                if self.state_dim == 0 {
                    return bad("embedding dimension is zero");
                }
            }
        }
        if self.kind.is_discrete() {
            if self.state_codewords.len() != self.state_count || self.state_names.len() != self.state_count {
                return bad("state codeword/name count differs from state_count");
            }
            if self.state_codewords.iter().any(|w| w.len() != self.state_dim) {
                return bad("state codeword length differs from state_dim");
            }
        }
        Ok(())
    }
}

/// Ordered vocabulary of semantics; the semantic space is the product of the
/// members' codeword spaces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemanticSpec<T> {
    pub semantics: Vec<SemanticDef<T>>,
    pub total_dim: usize,
}

impl<T: Real> SemanticSpec<T> {
    pub fn new(semantics: Vec<SemanticDef<T>>) -> Result<Self> {
        let mut seen = HashSet::new();
        for s in &semantics {
            s.validate()?;
            if !seen.insert(s.name.as_str()) {
                return Err(Error::contract(format!("duplicate semantic name '{}'", s.name)));
            }
        }
        let total_dim = semantics.iter().map(|s| s.state_dim).sum();
        Ok(SemanticSpec { semantics, total_dim })
    }

    /// Concatenates vocabularies in order.
    pub fn concat(parts: Vec<SemanticSpec<T>>) -> Result<Self> {
        Self::new(parts.into_iter().flat_map(|p| p.semantics).collect())
    }

    pub fn len(&self) -> usize {
        self.semantics.len()
    }

    pub fn is_empty(&self) -> bool {
        self.semantics.is_empty()
    }

    /// Start row of every semantic's block inside a code column.
    pub fn offsets(&self) -> Vec<usize> {
        let mut acc = 0;
        self.semantics
            .iter()
            .map(|s| {
                let o = acc;
                acc += s.state_dim;
                o
            })
            .collect()
    }

    /// True when every semantic is a binary attribute.
    pub fn all_binary(&self) -> bool {
        self.semantics.iter().all(|s| s.kind == SemanticKind::BinaryAttribute)
    }

    /// Checks that `other` describes the same layout (names, kinds, dims).
    pub fn check_compatible(&self, other: &SemanticSpec<T>) -> Result<()> {
        if self.semantics.len() != other.semantics.len() || self.total_dim != other.total_dim {
            return Err(Error::data(format!(
                "semantic layouts differ: {} semantics / dim {} vs {} / {}",
                self.semantics.len(),
                self.total_dim,
                other.semantics.len(),
                other.total_dim
            )));
        }
        for (a, b) in self.semantics.iter().zip(&other.semantics) {
            if a.name != b.name || a.kind != b.kind || a.state_dim != b.state_dim {
                return Err(Error::data(format!(
                    "semantic '{}' does not match '{}'",
                    a.name, b.name
                )));
            }
        }
        Ok(())
    }
}

/// The class code matrix: column `c` is the semantic code of class `c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodeMatrix<T> {
    pub phi: Matrix<T>,
    /// `state_table[k][c]`: state of semantic `k` under class `c`. `None` for
    /// continuous semantics, and for embedding semantics when class `c` is not
    /// one of the semantic's known states.
    pub state_table: Vec<Vec<Option<usize>>>,
    pub class_names: Vec<String>,
}

impl<T: Real> CodeMatrix<T> {
    pub fn num_classes(&self) -> usize {
        self.phi.cols()
    }

    pub fn dim(&self) -> usize {
        self.phi.rows()
    }

    pub fn column(&self, c: usize) -> Vec<T> {
        self.phi.column(c)
    }

    pub fn class_index(&self, name: &str) -> Option<usize> {
        self.class_names.iter().position(|c| c == name)
    }

    /// Structural check against a vocabulary: shapes, the per-state slice
    /// identity, continuous range and column distinctness.
    pub fn validate(&self, spec: &SemanticSpec<T>) -> Result<()> {
        let c = self.num_classes();
        if self.phi.rows() != spec.total_dim {
            return Err(Error::contract(format!(
                "code matrix has {} rows, vocabulary dimension is {}",
                self.phi.rows(),
                spec.total_dim
            )));
        }
        if self.class_names.len() != c || self.state_table.len() != spec.len() {
            return Err(Error::contract("code matrix tables disagree with its shape"));
        }
        let offsets = spec.offsets();
        for (k, sem) in spec.semantics.iter().enumerate() {
            let row = &self.state_table[k];
            if row.len() != c {
                return Err(Error::contract(format!("state table row '{}' has wrong length", sem.name)));
            }
            for (cls, state) in row.iter().enumerate() {
                let slice: Vec<T> = (0..sem.state_dim).map(|i| self.phi[(offsets[k] + i, cls)]).collect();
                match (sem.kind, state) {
                    (SemanticKind::ContinuousAttribute, None) => {
                        if slice[0].abs() > T::one() {
                            return Err(Error::contract(format!(
                                "continuous code {} of '{}' for class '{}' outside [-1, 1]",
                                slice[0], sem.name, self.class_names[cls]
                            )));
                        }
                    }
                    (SemanticKind::Embedding, None) => {}
                    (_, Some(s)) if *s < sem.state_count => {
                        if slice != sem.state_codewords[*s] {
                            return Err(Error::contract(format!(
                                "code of class '{}' under '{}' differs from its state codeword",
                                self.class_names[cls], sem.name
                            )));
                        }
                    }
                    _ => {
                        return Err(Error::contract(format!(
                            "invalid state entry for class '{}' under '{}'",
                            self.class_names[cls], sem.name
                        )))
                    }
                }
            }
        }
        for a in 0..c {
            for b in 0..a {
                if (0..self.dim()).all(|i| self.phi[(i, a)] == self.phi[(i, b)]) {
                    return Err(Error::data(format!(
                        "classes '{}' and '{}' have identical semantic codes",
                        self.class_names[b], self.class_names[a]
                    )));
                }
            }
        }
        Ok(())
    }

    /// Reassembles the discrete part of every column from the vocabulary and
    /// the state table. Entries without a state (continuous semantics, unseen
    /// embedding classes) are copied from `phi`.
    pub fn rebuild(&self, spec: &SemanticSpec<T>) -> Matrix<T> {
        let offsets = spec.offsets();
        let mut out = self.phi.clone();
        for (k, sem) in spec.semantics.iter().enumerate() {
            for (cls, state) in self.state_table[k].iter().enumerate() {
                if let Some(s) = state {
                    for (i, &v) in sem.state_codewords[*s].iter().enumerate() {
                        out[(offsets[k] + i, cls)] = v;
                    }
                }
            }
        }
        out
    }

    /// Subset of classes, in the requested order.
    pub fn select(&self, classes: &[String]) -> Result<CodeMatrix<T>> {
        let idx = classes
            .iter()
            .map(|n| {
                self.class_index(n)
                    .ok_or_else(|| Error::data(format!("class '{n}' has no semantic code")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(CodeMatrix {
            phi: self.phi.select_columns(&idx),
            state_table: self
                .state_table
                .iter()
                .map(|row| idx.iter().map(|&i| row[i]).collect())
                .collect(),
            class_names: classes.to_vec(),
        })
    }

    /// Stacks code matrices over the same classes (concatenation of codes).
    pub fn stack(parts: Vec<CodeMatrix<T>>) -> Result<CodeMatrix<T>> {
        let Some(first) = parts.first() else {
            return Err(Error::contract("no code matrices to stack"));
        };
        let class_names = first.class_names.clone();
        let c = class_names.len();
        let rows: usize = parts.iter().map(|p| p.dim()).sum();
        let mut phi = Matrix::zeros(rows, c);
        let mut state_table = Vec::new();
        let mut r0 = 0;
        for p in parts {
            if p.class_names != class_names {
                return Err(Error::contract("stacked code matrices cover different classes"));
            }
            for i in 0..p.dim() {
                phi.row_mut(r0 + i).copy_from_slice(p.phi.row(i));
            }
            r0 += p.dim();
            state_table.extend(p.state_table);
        }
        Ok(CodeMatrix {
            phi,
            state_table,
            class_names,
        })
    }

    /// Columns scaled to unit norm.
    pub fn normalized_phi(&self) -> Result<Matrix<T>> {
        let mut out = self.phi.clone();
        for j in 0..out.cols() {
            let n = crate::numerics::norm(&out.column(j));
            if n == T::zero() {
                return Err(Error::data(format!(
                    "class '{}' has an all-zero semantic code",
                    self.class_names[j]
                )));
            }
            for i in 0..out.rows() {
                out[(i, j)] /= n;
            }
        }
        Ok(out)
    }
}
