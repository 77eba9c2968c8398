use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use score_core::model::{CodewordPath, Mode, OmegaForm};
use score_core::optim::OmegaUpdate;
use score_core::zeroshot::RisRule;

#[derive(Debug, Parser)]
#[command(name = "score", version, about = "Zero-shot recognition with semantic codes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Build class code matrices from attributes, a taxonomy and/or embeddings.
    Encode(EncodeArgs),
    /// Train a model and write a checkpoint.
    Train(TrainArgs),
    /// Zero-shot evaluation of a checkpoint.
    Eval(EvalArgs),
    /// Alignment distance of zero-shot codes from the training code span.
    Diagnose(DiagnoseArgs),
    /// Sweep lambda or beta against a RULE baseline.
    Sweep(SweepArgs),
    /// Generate a synthetic zero-shot task.
    Synth(SynthArgs),
    /// Re-run the command recorded in a manifest and compare its outputs.
    Replay(ReplayArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Encode(_) => "encode",
            Command::Train(_) => "train",
            Command::Eval(_) => "eval",
            Command::Diagnose(_) => "diagnose",
            Command::Sweep(_) => "sweep",
            Command::Synth(_) => "synth",
            Command::Replay(_) => "replay",
        }
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct EncodeArgs {
    /// Class-by-attribute CSV.
    #[arg(long)]
    pub attributes: Option<PathBuf>,
    /// Rescale attributes to [-1, 1] instead of reading them as 0/1.
    #[arg(long, requires = "attributes")]
    pub continuous: bool,
    /// Tab-indented taxonomy file.
    #[arg(long)]
    pub taxonomy: Option<PathBuf>,
    /// Word-vector text file; repeat for several embeddings.
    #[arg(long)]
    pub embeddings: Vec<PathBuf>,
    /// Known (training) classes, one per line.
    #[arg(long)]
    pub classes: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Zero-shot classes to encode under the same vocabulary.
    #[arg(long, requires = "out_zs")]
    pub zs_classes: Option<PathBuf>,
    #[arg(long, requires = "zs_classes")]
    pub out_zs: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeArg {
    Ris,
    Rule,
    Unrestricted,
    Score,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Ris => Mode::Ris,
            ModeArg::Rule => Mode::Rule,
            ModeArg::Unrestricted => Mode::Unrestricted,
            ModeArg::Score => Mode::Score,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathArg {
    Dense,
    PerState,
}

impl From<PathArg> for CodewordPath {
    fn from(p: PathArg) -> CodewordPath {
        match p {
            PathArg::Dense => CodewordPath::Dense,
            PathArg::PerState => CodewordPath::PerState,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OmegaArg {
    Exact,
    InnerProduct,
}

impl From<OmegaArg> for OmegaForm {
    fn from(o: OmegaArg) -> OmegaForm {
        match o {
            OmegaArg::Exact => OmegaForm::Exact,
            OmegaArg::InnerProduct => OmegaForm::InnerProduct,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OmegaUpdateArg {
    Proximal,
    Gradient,
}

impl From<OmegaUpdateArg> for OmegaUpdate {
    fn from(o: OmegaUpdateArg) -> OmegaUpdate {
        match o {
            OmegaUpdateArg::Proximal => OmegaUpdate::Proximal,
            OmegaUpdateArg::Gradient => OmegaUpdate::Gradient,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleArg {
    Loglik,
    Linear,
}

impl From<RuleArg> for RisRule {
    fn from(r: RuleArg) -> RisRule {
        match r {
            RuleArg::Loglik => RisRule::LogLikelihood,
            RuleArg::Linear => RisRule::Linear,
        }
    }
}

/// Optimizer and architecture flags shared by `train` and `sweep`.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct OptimArgs {
    #[arg(long, default_value_t = 0.01)]
    pub lr: f64,
    #[arg(long, default_value_t = 0.9)]
    pub momentum: f64,
    #[arg(long, default_value_t = 5e-4)]
    pub weight_decay: f64,
    #[arg(long, default_value_t = 30)]
    pub epochs: usize,
    #[arg(long, default_value_t = 64)]
    pub batch: usize,
    /// Per-epoch multiplicative learning-rate decay.
    #[arg(long, default_value_t = 0.98)]
    pub lr_decay: f64,
    /// Hidden layer widths, comma separated; empty for a linear model.
    #[arg(long, value_delimiter = ',')]
    pub hidden: Vec<usize>,
    #[arg(long, value_enum, default_value_t = PathArg::Dense)]
    pub codeword_path: PathArg,
    #[arg(long, value_enum, default_value_t = OmegaArg::Exact)]
    pub omega: OmegaArg,
    #[arg(long, value_enum, default_value_t = OmegaUpdateArg::Proximal)]
    pub omega_update: OmegaUpdateArg,
    /// Supervise semantics with the per-sample attribute columns of the
    /// feature file instead of the class codes.
    #[arg(long)]
    pub sample_attributes: bool,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct TrainArgs {
    #[arg(long)]
    pub features: PathBuf,
    #[arg(long)]
    pub codes: PathBuf,
    #[arg(long, value_enum, default_value_t = ModeArg::Score)]
    pub mode: ModeArg,
    #[arg(long, default_value_t = 0.0)]
    pub lambda: f64,
    #[arg(long, default_value_t = 0.0)]
    pub beta: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub optim: OptimArgs,
    #[arg(long)]
    pub out_checkpoint: PathBuf,
    /// Per-epoch history CSV; defaults to `<checkpoint>.history.csv`.
    #[arg(long)]
    pub history: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct EvalArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long)]
    pub features_zs: PathBuf,
    #[arg(long)]
    pub codes_zs: PathBuf,
    /// Scoring rule for RIS checkpoints; both rules are reported when omitted.
    #[arg(long, value_enum)]
    pub ris_rule: Option<RuleArg>,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct DiagnoseArgs {
    #[arg(long)]
    pub codes_train: PathBuf,
    #[arg(long)]
    pub codes_zs: PathBuf,
    /// Key-value report file.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisArg {
    Lambda,
    Beta,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SweepArgs {
    #[arg(long)]
    pub features: PathBuf,
    #[arg(long)]
    pub codes: PathBuf,
    #[arg(long)]
    pub features_zs: PathBuf,
    #[arg(long)]
    pub codes_zs: PathBuf,
    #[arg(long, value_enum)]
    pub axis: AxisArg,
    /// Increasing multiplier values, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub grid: Vec<f64>,
    /// Training seeds, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub seeds: Vec<u64>,
    #[command(flatten)]
    pub optim: OptimArgs,
    /// Worker threads (further capped by SCORE_THREADS).
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 16)]
    pub q: usize,
    #[arg(long, default_value_t = 12)]
    pub c_train: usize,
    #[arg(long, default_value_t = 4)]
    pub c_zs: usize,
    #[arg(long, default_value_t = 64)]
    pub d: usize,
    /// Samples per class.
    #[arg(long, default_value_t = 150)]
    pub n: usize,
    #[arg(long, default_value_t = 0.25)]
    pub sigma: f64,
    #[arg(long, default_value_t = 0.0)]
    pub misalignment: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ReplayArgs {
    #[arg(long)]
    pub manifest: PathBuf,
}
