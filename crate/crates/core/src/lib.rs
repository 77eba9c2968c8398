pub mod data;
pub mod diagnostics;
pub mod error;
pub mod model;
pub mod numerics;
pub mod optim;
pub mod semantics;
pub mod zeroshot;

pub use error::{Error, Result};

pub type Matrix64 = numerics::Matrix<f64>;
pub type Matrix32 = numerics::Matrix<f32>;
pub type SemanticSpec64 = semantics::SemanticSpec<f64>;
pub type SemanticSpec32 = semantics::SemanticSpec<f32>;
pub type CodeMatrix64 = semantics::CodeMatrix<f64>;
pub type CodeMatrix32 = semantics::CodeMatrix<f32>;
pub type ScoreModel64 = model::ScoreModel<f64>;
pub type ScoreModel32 = model::ScoreModel<f32>;
pub type ModelParams64 = model::ModelParams<f64>;
pub type ModelParams32 = model::ModelParams<f32>;
pub type Dataset64 = model::Dataset<f64>;
pub type Dataset32 = model::Dataset<f32>;
