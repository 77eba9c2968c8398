//! Binary checkpoint layout, all integers and reals little-endian:
//!
//! ```text
//! b"SCORECKP"            magic, 8 bytes
//! u32                    format version
//! u64                    header length in bytes
//! header                 UTF-8 JSON: configs, vocabulary, class names,
//!                        state table, epochs completed, tensor shapes
//! tensor*                u64 rows, u64 cols, rows*cols f64 values
//! ```
//!
//! Tensors appear in the order: semantic codes `phi`, then every parameter
//! tensor (per backbone layer: weight, bias as a column; projection; codeword
//! blocks), then the velocity of each parameter tensor in the same order.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::write_bytes;
use crate::error::{Error, Result};
use crate::model::{DenseLayer, ModelConfig, ModelParams, ScoreModel};
use crate::numerics::Matrix;
use crate::optim::{OptimizerState, TrainConfig};
use crate::semantics::{CodeMatrix, SemanticSpec};

pub const CHECKPOINT_MAGIC: &[u8; 8] = b"SCORECKP";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub model_config: ModelConfig,
    pub train_config: TrainConfig,
    pub spec: SemanticSpec<f64>,
    pub codes: CodeMatrix<f64>,
    pub params: ModelParams<f64>,
    pub state: OptimizerState<f64>,
    pub epochs_completed: usize,
}

impl Checkpoint {
    /// Rebuilds the model and checks the stored parameters fit it.
    pub fn model(&self) -> Result<ScoreModel<f64>> {
        let model = ScoreModel::new(self.spec.clone(), self.codes.clone(), self.model_config)?;
        model.check_params(&self.params)?;
        Ok(model)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct Layout {
    /// `(out, in)` per backbone layer.
    backbone: Vec<(usize, usize)>,
    projection: (usize, usize),
    codewords: Vec<(usize, usize)>,
}

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    model_config: ModelConfig,
    train_config: TrainConfig,
    spec: SemanticSpec<f64>,
    class_names: Vec<String>,
    state_table: Vec<Vec<Option<usize>>>,
    epochs_completed: usize,
    layout: Layout,
}

fn layout(p: &ModelParams<f64>) -> Layout {
    Layout {
        backbone: p.backbone.iter().map(|l| l.weight.shape()).collect(),
        projection: p.projection.shape(),
        codewords: p.codewords.iter().map(|w| w.shape()).collect(),
    }
}

fn shapes(l: &Layout) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for &(o, i) in &l.backbone {
        out.push((o, i));
        out.push((o, 1));
    }
    out.push(l.projection);
    out.extend(&l.codewords);
    out
}

fn push_tensor(out: &mut Vec<u8>, rows: usize, cols: usize, data: &[f64]) {
    out.extend_from_slice(&(rows as u64).to_le_bytes());
    out.extend_from_slice(&(cols as u64).to_le_bytes());
    for v in data {
        out.extend_from_slice(&v.to_le_bytes());
    }
}

pub fn save_checkpoint(path: &Path, ckp: &Checkpoint) -> Result<()> {
    if !ckp.params.same_shape(&ckp.state.velocity) {
        return Err(Error::contract("checkpoint velocity shapes differ from the parameters"));
    }
    let header = Header {
        model_config: ckp.model_config,
        train_config: ckp.train_config.clone(),
        spec: ckp.spec.clone(),
        class_names: ckp.codes.class_names.clone(),
        state_table: ckp.codes.state_table.clone(),
        epochs_completed: ckp.epochs_completed,
        layout: layout(&ckp.params),
    };
    let json = serde_json::to_vec(&header).expect("header serializes");
    let mut out = Vec::new();
    out.extend_from_slice(CHECKPOINT_MAGIC);
    out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    out.extend_from_slice(&(json.len() as u64).to_le_bytes());
    out.extend_from_slice(&json);
    let phi = &ckp.codes.phi;
    push_tensor(&mut out, phi.rows(), phi.cols(), phi.as_slice());
    let shapes = shapes(&header.layout);
    for p in [&ckp.params, &ckp.state.velocity] {
        for ((r, c), (_, t)) in shapes.iter().zip(p.tensors()) {
            push_tensor(&mut out, *r, *c, t);
        }
    }
    write_bytes(path, &out)
}

struct Reader<'a> {
    bytes: &'a [u8],
    at: usize,
    path: &'a Path,
}

impl<'a> Reader<'a> {
    fn err(&self, msg: impl Into<String>) -> Error {
        Error::parse(self.path, 0, format!("byte {}: {}", self.at, msg.into()))
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.bytes.len() - self.at < n {
            return Err(self.err(format!("truncated, needed {n} more bytes")));
        }
        let s = &self.bytes[self.at..self.at + n];
        self.at += n;
        Ok(s)
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn tensor(&mut self, rows: usize, cols: usize, what: &str) -> Result<Vec<f64>> {
        let (r, c) = (self.u64()?, self.u64()?);
        if (r, c) != (rows as u64, cols as u64) {
            return Err(self.err(format!("{what} is {r}x{c}, header says {rows}x{cols}")));
        }
        let data = self.take(rows * cols * 8)?;
        Ok(data
            .chunks_exact(8)
            .map(|b| f64::from_le_bytes(b.try_into().expect("8 bytes")))
            .collect())
    }

    fn params(&mut self, layout: &Layout, what: &str) -> Result<ModelParams<f64>> {
        let mut backbone = Vec::new();
        for (k, &(o, i)) in layout.backbone.iter().enumerate() {
            let weight = Matrix::from_vec(o, i, self.tensor(o, i, &format!("{what} layer {k} weight"))?)?;
            let bias = self.tensor(o, 1, &format!("{what} layer {k} bias"))?;
            backbone.push(DenseLayer { weight, bias });
        }
        let (r, c) = layout.projection;
        let projection = Matrix::from_vec(r, c, self.tensor(r, c, &format!("{what} projection"))?)?;
        let codewords = layout
            .codewords
            .iter()
            .enumerate()
            .map(|(b, &(r, c))| Matrix::from_vec(r, c, self.tensor(r, c, &format!("{what} codeword block {b}"))?))
            .collect::<Result<Vec<_>>>()?;
        Ok(ModelParams {
            backbone,
            projection,
            codewords,
        })
    }
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let mut r = Reader { bytes: &bytes, at: 0, path };
    if r.take(8)? != CHECKPOINT_MAGIC {
        return Err(Error::parse(path, 0, "not a checkpoint file (bad magic)"));
    }
    let version = u32::from_le_bytes(r.take(4)?.try_into().expect("4 bytes"));
    if version != CHECKPOINT_VERSION {
        return Err(r.err(format!("unsupported checkpoint version {version}")));
    }
    let len = r.u64()? as usize;
    let header: Header =
        serde_json::from_slice(r.take(len)?).map_err(|e| Error::parse(path, 0, format!("checkpoint header: {e}")))?;
    let spec = SemanticSpec::new(header.spec.semantics)?;
    let c = header.class_names.len();
    let phi = Matrix::from_vec(spec.total_dim, c, r.tensor(spec.total_dim, c, "phi")?)?;
    let params = r.params(&header.layout, "parameter")?;
    let velocity = r.params(&header.layout, "velocity")?;
    if r.at != bytes.len() {
        return Err(r.err(format!("{} trailing bytes", bytes.len() - r.at)));
    }
    let codes = CodeMatrix {
        phi,
        state_table: header.state_table,
        class_names: header.class_names,
    };
    codes.validate(&spec)?;
    Ok(Checkpoint {
        model_config: header.model_config,
        train_config: header.train_config,
        spec,
        codes,
        params,
        state: OptimizerState { velocity },
        epochs_completed: header.epochs_completed,
    })
}
