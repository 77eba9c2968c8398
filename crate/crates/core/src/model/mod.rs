//! Scoring function, objective and analytic gradients.

mod config;
mod dataset;
pub mod layers;
mod params;
mod score;

pub use config::{CodewordPath, Mode, ModelConfig, ObjectiveWeights, OmegaForm};
pub use dataset::Dataset;
pub use layers::{
    argmax, backbone_forward, codeword_regularizer, dense_class_scores, selected_class_scores, semantic_predictor,
    semantic_scores, SemanticScores,
};
pub use params::{DenseLayer, ModelParams, ParamGroup};
pub use score::{BlockKind, CodewordBlock, ObjectiveValue, Prediction, ScoreModel, SemanticTarget};
