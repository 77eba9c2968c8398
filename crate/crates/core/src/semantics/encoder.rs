use super::attributes::{attribute_spec, encode_attributes};
use super::embeddings::{embedding_spec, encode_embeddings};
use super::taxonomy::{encode_taxonomy, taxonomy_spec};
use super::{AttributeTable, CodeMatrix, EmbeddingTable, SemanticSpec, Taxonomy};
use crate::error::{Error, Result};
use crate::numerics::Real;

/// Where a block of the semantic code comes from.
#[derive(Debug, Clone)]
pub enum SemanticSource<T> {
    Attributes { table: AttributeTable<T>, binary: bool },
    Taxonomy(Taxonomy),
    Embeddings(Vec<EmbeddingTable<T>>),
}

impl<T: Real> SemanticSource<T> {
    fn semantic_count(&self) -> usize {
        match self {
            SemanticSource::Attributes { table, .. } => table.attribute_names.len(),
            SemanticSource::Taxonomy(tree) => tree.internal_nodes().len(),
            SemanticSource::Embeddings(tables) => tables.len(),
        }
    }

    fn spec(&self, classes: &[String]) -> Result<SemanticSpec<T>> {
        match self {
            SemanticSource::Attributes { table, binary } => attribute_spec(table, *binary),
            SemanticSource::Taxonomy(tree) => taxonomy_spec(tree),
            SemanticSource::Embeddings(tables) => embedding_spec(tables, classes),
        }
    }

    fn encode(&self, spec: &SemanticSpec<T>, classes: &[String]) -> Result<CodeMatrix<T>> {
        match self {
            SemanticSource::Attributes { table, binary } => encode_attributes(table, *binary, classes),
            SemanticSource::Taxonomy(tree) => encode_taxonomy(tree, spec, classes),
            SemanticSource::Embeddings(tables) => encode_embeddings(tables, spec, classes),
        }
    }
}

/// Vocabulary built from one or more sources, concatenated in order, and
/// reusable to encode any class set covered by the sources.
#[derive(Debug, Clone)]
pub struct SemanticEncoder<T> {
    sources: Vec<SemanticSource<T>>,
    spec: SemanticSpec<T>,
}

impl<T: Real> SemanticEncoder<T> {
    /// `classes` fixes the state set of embedding semantics (the known
    /// classes); attribute and taxonomy vocabularies do not depend on it.
    pub fn new(sources: Vec<SemanticSource<T>>, classes: &[String]) -> Result<Self> {
        if sources.is_empty() {
            return Err(Error::contract("at least one semantic source is required"));
        }
        let parts = sources.iter().map(|s| s.spec(classes)).collect::<Result<Vec<_>>>()?;
        let spec = SemanticSpec::concat(parts)?;
        Ok(SemanticEncoder { sources, spec })
    }

    pub fn spec(&self) -> &SemanticSpec<T> {
        &self.spec
    }

    pub fn encode(&self, classes: &[String]) -> Result<CodeMatrix<T>> {
        codes_for_classes(&self.spec, &self.sources, classes)
    }
}

/// Encodes `classes` under an existing vocabulary, with exactly the
/// construction used for the vocabulary's own classes.
pub fn codes_for_classes<T: Real>(
    spec: &SemanticSpec<T>,
    sources: &[SemanticSource<T>],
    classes: &[String],
) -> Result<CodeMatrix<T>> {
    let total: usize = sources.iter().map(|s| s.semantic_count()).sum();
    if total != spec.len() {
        return Err(Error::contract(format!(
            "sources provide {total} semantics, vocabulary has {}",
            spec.len()
        )));
    }
    let mut parts = Vec::with_capacity(sources.len());
    let mut start = 0;
    for src in sources {
        let n = src.semantic_count();
        let sub = SemanticSpec::new(spec.semantics[start..start + n].to_vec())?;
        parts.push(src.encode(&sub, classes)?);
        start += n;
    }
    let codes = CodeMatrix::stack(parts)?;
    codes.validate(spec)?;
    Ok(codes)
}
