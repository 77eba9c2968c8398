//! Semantic vocabularies and class code matrices built from attributes,
//! taxonomies and word embeddings.

mod attributes;
mod embeddings;
mod encoder;
mod simplex;
mod taxonomy;
mod types;

pub use attributes::{attribute_codes, AttributeTable};
pub use embeddings::{embedding_codes, EmbeddingTable};
pub use encoder::{codes_for_classes, SemanticEncoder, SemanticSource};
pub use simplex::max_separated_codewords;
pub use taxonomy::{taxonomy_codes, RawNode, Taxonomy, TaxonomyNode, REJECT_STATE};
pub use types::{CodeMatrix, SemanticDef, SemanticKind, SemanticSpec};

#[cfg(test)]
pub(crate) use taxonomy::fixtures;
