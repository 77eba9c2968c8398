use serde::{Deserialize, Serialize};

use super::layers::{argmax, backbone_trace, codeword_regularizer};
use super::{CodewordPath, Dataset, DenseLayer, ModelConfig, ModelParams, ObjectiveWeights, OmegaForm};
use crate::error::{Error, Result};
use crate::numerics::{logistic_xent, softmax_xent, Matrix, Real, RngStream};
use crate::semantics::{CodeMatrix, SemanticKind, SemanticSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockKind {
    /// `dim x C` codewords, one column per training class.
    PerClass,
    /// `d_k x S_k` codewords of one semantic, one column per state.
    PerState { semantic: usize },
}

/// A block of learned codewords acting on rows `offset..offset + dim` of `f`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodewordBlock {
    pub kind: BlockKind,
    pub offset: usize,
    pub dim: usize,
}

/// Supervision for one semantic of one sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SemanticTarget<T> {
    /// Target probability for a scalar semantic.
    Probability(T),
    /// Target state of a multi-state semantic.
    State(usize),
    Missing,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction<T> {
    /// Class scores over the training classes.
    pub h: Vec<T>,
    /// State scores per semantic; `[f_k]` for continuous semantics.
    pub u: Vec<Vec<T>>,
    pub f: Vec<T>,
}

/// Unweighted objective terms and their weighted sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveValue<T> {
    pub total: T,
    pub classification: T,
    pub auxiliary: T,
    pub omega: T,
}

struct Trace<T> {
    acts: Vec<Vec<T>>,
    f: Vec<T>,
    block_scores: Vec<Vec<T>>,
    h: Vec<T>,
}

/// A configured scoring model over a fixed vocabulary and training class set.
/// Parameters live outside, in [`ModelParams`].
#[derive(Debug, Clone)]
pub struct ScoreModel<T> {
    config: ModelConfig,
    spec: SemanticSpec<T>,
    codes: CodeMatrix<T>,
    offsets: Vec<usize>,
    blocks: Vec<CodewordBlock>,
    targets: Vec<Matrix<T>>,
    /// Fixed state codewords per semantic (`d_k x S_k`, empty for continuous).
    psi: Vec<Matrix<T>>,
    /// Per-state block of each semantic, if any.
    state_block: Vec<Option<usize>>,
    /// For per-state blocks, the state selected by every training class.
    selection: Vec<Vec<usize>>,
}

impl<T: Real> ScoreModel<T> {
    pub fn new(spec: SemanticSpec<T>, codes: CodeMatrix<T>, config: ModelConfig) -> Result<Self> {
        config.validate()?;
        codes.validate(&spec)?;
        if codes.num_classes() == 0 {
            return Err(Error::data("no training classes"));
        }
        let offsets = spec.offsets();
        let psi: Vec<Matrix<T>> = spec.semantics.iter().map(|s| s.codeword_matrix()).collect();
        let mut blocks = Vec::new();
        let mut targets = Vec::new();
        let mut selection = Vec::new();
        let mut state_block = vec![None; spec.len()];
        match config.codeword_path {
            CodewordPath::Dense => {
                blocks.push(CodewordBlock {
                    kind: BlockKind::PerClass,
                    offset: 0,
                    dim: spec.total_dim,
                });
                targets.push(codes.phi.clone());
                selection.push(Vec::new());
            }
            CodewordPath::PerState => {
                for (k, sem) in spec.semantics.iter().enumerate() {
                    let offset = offsets[k];
                    if sem.kind.is_discrete() {
                        let states = codes.state_table[k]
                            .iter()
                            .enumerate()
                            .map(|(c, s)| {
                                s.ok_or_else(|| {
                                    Error::data(format!(
                                        "training class '{}' has no state for semantic '{}'",
                                        codes.class_names[c], sem.name
                                    ))
                                })
                            })
                            .collect::<Result<Vec<_>>>()?;
                        state_block[k] = Some(blocks.len());
                        blocks.push(CodewordBlock {
                            kind: BlockKind::PerState { semantic: k },
                            offset,
                            dim: sem.state_dim,
                        });
                        targets.push(psi[k].clone());
                        selection.push(states);
                    } else {
                        blocks.push(CodewordBlock {
                            kind: BlockKind::PerClass,
                            offset,
                            dim: sem.state_dim,
                        });
                        targets.push(codes.phi.row_block(offset, sem.state_dim));
                        selection.push(Vec::new());
                    }
                }
            }
        }
        Ok(ScoreModel {
            config,
            spec,
            codes,
            offsets,
            blocks,
            targets,
            psi,
            state_block,
            selection,
        })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn spec(&self) -> &SemanticSpec<T> {
        &self.spec
    }

    pub fn codes(&self) -> &CodeMatrix<T> {
        &self.codes
    }

    pub fn blocks(&self) -> &[CodewordBlock] {
        &self.blocks
    }

    /// Semantic targets of the codeword blocks (`Phi` slices or `Psi^(k)`).
    pub fn targets(&self) -> &[Matrix<T>] {
        &self.targets
    }

    pub fn num_classes(&self) -> usize {
        self.codes.num_classes()
    }

    /// Backbone layers are glorot-initialized with the given widths, `T` is
    /// uniform in `+-sqrt(6 / (d + Q'))` and codewords start at their targets.
    pub fn init_params(&self, input_dim: usize, hidden: &[usize], rng: &mut RngStream) -> ModelParams<T> {
        let mut backbone = Vec::with_capacity(hidden.len());
        let mut width = input_dim;
        for &h in hidden {
            backbone.push(DenseLayer::glorot(width, h, rng));
            width = h;
        }
        ModelParams {
            backbone,
            projection: super::params::glorot(width, self.spec.total_dim, rng),
            codewords: self.targets.clone(),
        }
    }

    pub fn check_params(&self, params: &ModelParams<T>) -> Result<()> {
        let shape_err = |what: &str| Err(Error::contract(format!("parameters do not fit the model: {what}")));
        let mut width = params.input_dim();
        for l in &params.backbone {
            if l.input_dim() != width || l.bias.len() != l.output_dim() {
                return shape_err("backbone chain");
            }
            width = l.output_dim();
        }
        if params.projection.shape() != (width, self.spec.total_dim) {
            return shape_err("projection");
        }
        if params.codewords.len() != self.targets.len()
            || params
                .codewords
                .iter()
                .zip(&self.targets)
                .any(|(w, t)| w.shape() != t.shape())
        {
            return shape_err("codewords");
        }
        Ok(())
    }

    fn trace(&self, params: &ModelParams<T>, x: &[T]) -> Result<Trace<T>> {
        if x.len() != params.input_dim() {
            return Err(Error::Shape {
                op: "backbone_forward",
                left: (1, x.len()),
                right: (params.input_dim(), 1),
            });
        }
        let acts = backbone_trace(x, &params.backbone)?;
        let f = params.projection.tr_matvec(acts.last().expect("non-empty"))?;
        let mut h = vec![T::zero(); self.num_classes()];
        let mut block_scores = Vec::with_capacity(self.blocks.len());
        for (b, block) in self.blocks.iter().enumerate() {
            let scores = params.codewords[b].tr_matvec(&f[block.offset..block.offset + block.dim])?;
            match block.kind {
                BlockKind::PerClass => h.iter_mut().zip(&scores).for_each(|(hc, &s)| *hc += s),
                BlockKind::PerState { .. } => {
                    for (hc, &s) in h.iter_mut().zip(&self.selection[b]) {
                        *hc += scores[s];
                    }
                }
            }
            block_scores.push(scores);
        }
        Ok(Trace {
            acts,
            f,
            block_scores,
            h,
        })
    }

    fn state_scores(&self, trace: &Trace<T>, k: usize) -> Result<Vec<T>> {
        let sem = &self.spec.semantics[k];
        let fk = &trace.f[self.offsets[k]..self.offsets[k] + sem.state_dim];
        if sem.kind == SemanticKind::ContinuousAttribute {
            return Ok(fk.to_vec());
        }
        match self.state_block[k] {
            Some(b) => Ok(trace.block_scores[b].clone()),
            None => self.psi[k].tr_matvec(fk),
        }
    }

    pub fn predict(&self, params: &ModelParams<T>, x: &[T]) -> Result<Prediction<T>> {
        let trace = self.trace(params, x)?;
        let u = (0..self.spec.len())
            .map(|k| self.state_scores(&trace, k))
            .collect::<Result<Vec<_>>>()?;
        Ok(Prediction {
            h: trace.h,
            u,
            f: trace.f,
        })
    }

    /// Predicted training class (ties to the lowest index).
    pub fn classify(&self, params: &ModelParams<T>, x: &[T]) -> Result<usize> {
        let trace = self.trace(params, x)?;
        Ok(argmax(&trace.h).expect("at least one class"))
    }

    /// Supervision of every semantic for a sample of class `label`.
    pub fn semantic_targets(&self, label: usize, attributes: Option<&[T]>) -> Result<Vec<SemanticTarget<T>>> {
        if label >= self.num_classes() {
            return Err(Error::data(format!(
                "label {label} out of range for {} classes",
                self.num_classes()
            )));
        }
        let scalar_count = self.spec.semantics.iter().filter(|s| s.kind.is_scalar()).count();
        if let Some(a) = attributes {
            if a.len() != scalar_count {
                return Err(Error::data(format!(
                    "{} per-sample attribute labels for {scalar_count} attribute semantics",
                    a.len()
                )));
            }
        }
        let half = T::lit(0.5);
        let mut scalar = 0;
        let mut out = Vec::with_capacity(self.spec.len());
        for (k, sem) in self.spec.semantics.iter().enumerate() {
            let target = match sem.kind {
                SemanticKind::BinaryAttribute | SemanticKind::ContinuousAttribute => {
                    let p = match attributes {
                        Some(a) => Some(a[scalar]),
                        None if sem.kind == SemanticKind::BinaryAttribute => {
                            self.codes.state_table[k][label].map(|s| if s == 0 { T::one() } else { T::zero() })
                        }
                        None => Some((self.codes.phi[(self.offsets[k], label)] + T::one()) * half),
                    };
                    scalar += 1;
                    p.map_or(SemanticTarget::Missing, SemanticTarget::Probability)
                }
                _ => match self.codes.state_table[k][label] {
                    Some(s) => SemanticTarget::State(s),
                    None => SemanticTarget::Missing,
                },
            };
            out.push(target);
        }
        Ok(out)
    }

    /// Auxiliary risk of one prediction: logistic loss on scalar semantics and
    /// softmax cross-entropy over the state scores of multi-state semantics.
    pub fn auxiliary_risk(&self, prediction: &Prediction<T>, labels: &[SemanticTarget<T>]) -> Result<T> {
        if labels.len() != self.spec.len() {
            return Err(Error::contract("one label per semantic is required"));
        }
        let mut total = T::zero();
        for (k, (sem, label)) in self.spec.semantics.iter().zip(labels).enumerate() {
            total += match (*label, sem.kind.is_scalar()) {
                (SemanticTarget::Probability(p), true) => logistic_xent(prediction.f[self.offsets[k]], p).0,
                (SemanticTarget::State(s), false) => softmax_xent(&prediction.u[k], s)?.loss,
                _ => return Err(missing_label(&sem.name)),
            };
        }
        Ok(total)
    }

    /// Codeword penalty of `params` under the configured form.
    pub fn omega(&self, params: &ModelParams<T>) -> Result<T> {
        codeword_regularizer(&params.codewords, &self.targets, self.config.omega_form)
    }

    pub fn score_objective(&self, params: &ModelParams<T>, data: &Dataset<T>, batch: &[usize]) -> Result<ObjectiveValue<T>> {
        self.objective_with(params, data, batch, self.config.weights())
    }

    pub fn objective_with(
        &self,
        params: &ModelParams<T>,
        data: &Dataset<T>,
        batch: &[usize],
        weights: ObjectiveWeights<T>,
    ) -> Result<ObjectiveValue<T>> {
        self.evaluate(params, data, batch, weights, None)
    }

    /// Objective and its gradient with respect to every parameter. Frozen
    /// codewords get a zero gradient.
    pub fn gradients(
        &self,
        params: &ModelParams<T>,
        data: &Dataset<T>,
        batch: &[usize],
    ) -> Result<(ObjectiveValue<T>, ModelParams<T>)> {
        self.gradients_with(params, data, batch, self.config.weights())
    }

    pub fn gradients_with(
        &self,
        params: &ModelParams<T>,
        data: &Dataset<T>,
        batch: &[usize],
        weights: ObjectiveWeights<T>,
    ) -> Result<(ObjectiveValue<T>, ModelParams<T>)> {
        let mut grads = params.zeros_like();
        let value = self.evaluate(params, data, batch, weights, Some(&mut grads))?;
        Ok((value, grads))
    }

    fn evaluate(
        &self,
        params: &ModelParams<T>,
        data: &Dataset<T>,
        batch: &[usize],
        weights: ObjectiveWeights<T>,
        mut grads: Option<&mut ModelParams<T>>,
    ) -> Result<ObjectiveValue<T>> {
        if batch.is_empty() {
            return Err(Error::contract("empty batch"));
        }
        self.check_params(params)?;
        let n = T::from_usize(batch.len()).expect("batch size");
        let cls_scale = weights.classification / n;
        let aux_scale = weights.auxiliary / n;
        let train_codewords = self.config.codewords_trainable();
        let mut cls_sum = T::zero();
        let mut aux_sum = T::zero();
        for &i in batch {
            if i >= data.len() {
                return Err(Error::contract(format!("sample index {i} out of range")));
            }
            let label = data.labels[i];
            let targets = self.semantic_targets(label, data.attributes.as_ref().map(|a| a.row(i)))?;
            let trace = self.trace(params, data.features.row(i))?;
            let cls = softmax_xent(&trace.h, label)?;
            cls_sum += cls.loss;

            let mut dh = cls.grad(label);
            dh.iter_mut().for_each(|g| *g *= cls_scale);
            let mut df = vec![T::zero(); self.spec.total_dim];
            let mut dstate: Vec<Vec<T>> = self.blocks.iter().map(|_| Vec::new()).collect();
            for (k, (sem, target)) in self.spec.semantics.iter().zip(&targets).enumerate() {
                let off = self.offsets[k];
                match (*target, sem.kind.is_scalar()) {
                    (SemanticTarget::Probability(p), true) => {
                        let (loss, g) = logistic_xent(trace.f[off], p);
                        aux_sum += loss;
                        df[off] += aux_scale * g;
                    }
                    (SemanticTarget::State(s), false) => {
                        let u = self.state_scores(&trace, k)?;
                        let sx = softmax_xent(&u, s)?;
                        aux_sum += sx.loss;
                        let mut du = sx.grad(s);
                        du.iter_mut().for_each(|g| *g *= aux_scale);
                        match self.state_block[k] {
                            Some(b) => dstate[b] = du,
                            None => {
                                let dfk = self.psi[k].matvec(&du)?;
                                for (d, v) in df[off..off + sem.state_dim].iter_mut().zip(dfk) {
                                    *d += v;
                                }
                            }
                        }
                    }
                    _ => return Err(missing_label(&sem.name)),
                }
            }

            let Some(g) = grads.as_deref_mut() else { continue };
            for (b, block) in self.blocks.iter().enumerate() {
                let du = match block.kind {
                    BlockKind::PerClass => dh.clone(),
                    BlockKind::PerState { semantic } => {
                        let mut du = std::mem::take(&mut dstate[b]);
                        if du.is_empty() {
                            du = vec![T::zero(); self.spec.semantics[semantic].state_count];
                        }
                        for (&s, &d) in self.selection[b].iter().zip(&dh) {
                            du[s] += d;
                        }
                        du
                    }
                };
                let range = block.offset..block.offset + block.dim;
                let dfb = params.codewords[b].matvec(&du)?;
                for (d, v) in df[range.clone()].iter_mut().zip(dfb) {
                    *d += v;
                }
                if train_codewords {
                    g.codewords[b].add_outer(T::one(), &trace.f[range], &du);
                }
            }

            let theta = trace.acts.last().expect("non-empty");
            g.projection.add_outer(T::one(), theta, &df);
            let mut da = params.projection.matvec(&df)?;
            for (l, layer) in params.backbone.iter().enumerate().rev() {
                let out = &trace.acts[l + 1];
                let dz: Vec<T> = da.iter().zip(out).map(|(&d, &a)| d * (T::one() - a * a)).collect();
                g.backbone[l].weight.add_outer(T::one(), &dz, &trace.acts[l]);
                g.backbone[l].bias.iter_mut().zip(&dz).for_each(|(b, &d)| *b += d);
                if l > 0 {
                    da = layer.weight.tr_matvec(&dz)?;
                }
            }
        }

        let omega = self.omega(params)?;
        if let Some(g) = grads {
            if train_codewords && weights.omega != T::zero() {
                for ((gw, w), t) in g.codewords.iter_mut().zip(&params.codewords).zip(&self.targets) {
                    match self.config.omega_form {
                        OmegaForm::Exact => {
                            gw.axpy_assign(weights.omega, w)?;
                            gw.axpy_assign(-weights.omega, t)?;
                        }
                        OmegaForm::InnerProduct => gw.axpy_assign(-weights.omega, t)?,
                    }
                }
            }
        }
        let classification = cls_sum / n;
        let auxiliary = aux_sum / n;
        let total = weights.classification * classification + weights.auxiliary * auxiliary + weights.omega * omega;
        Ok(ObjectiveValue {
            total,
            classification,
            auxiliary,
            omega,
        })
    }
}

fn missing_label(name: &str) -> Error {
    Error::data(format!("no supervision available for semantic '{name}'"))
}
