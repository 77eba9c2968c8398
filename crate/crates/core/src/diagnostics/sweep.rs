use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use log::info;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Dataset, Mode, ModelConfig, ScoreModel};
use crate::numerics::Real;
use crate::optim::{train, TrainConfig};
use crate::semantics::{CodeMatrix, SemanticSpec};
use crate::zeroshot::{evaluate, RisRule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    Lambda,
    Beta,
}

impl SweepAxis {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepAxis::Lambda => "lambda",
            SweepAxis::Beta => "beta",
        }
    }

    /// SCORE configuration at `value` on this axis, the other multiplier 0.
    pub fn config(self, base: &ModelConfig, value: f64) -> ModelConfig {
        let (lambda, beta) = match self {
            SweepAxis::Lambda => (value, 0.0),
            SweepAxis::Beta => (0.0, value),
        };
        ModelConfig {
            mode: Mode::Score,
            lambda,
            beta,
            ..*base
        }
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lambda" => Ok(SweepAxis::Lambda),
            "beta" => Ok(SweepAxis::Beta),
            _ => Err(Error::contract(format!("unknown sweep axis '{s}' (expected lambda or beta)"))),
        }
    }
}

/// Everything a sweep cell needs besides its multiplier and seed.
#[derive(Debug, Clone)]
pub struct SweepTask<'a, T> {
    pub spec: &'a SemanticSpec<T>,
    pub train_codes: &'a CodeMatrix<T>,
    pub train: &'a Dataset<T>,
    pub zs_codes: &'a CodeMatrix<T>,
    pub zs: &'a Dataset<T>,
    /// Codeword path and penalty form; mode and multipliers are set per cell.
    pub model: ModelConfig,
    /// Optimizer settings; the seed is set per cell.
    pub training: TrainConfig,
    pub rule: RisRule,
}

impl<T: Real> SweepTask<'_, T> {
    /// Trains one model and returns its zero-shot accuracy.
    pub fn run_cell(&self, config: ModelConfig, seed: u64) -> Result<f64> {
        let model = ScoreModel::new(self.spec.clone(), self.train_codes.clone(), config)?;
        let training = TrainConfig {
            seed,
            ..self.training.clone()
        };
        let out = train(&model, self.train, &training)?;
        Ok(evaluate(&model, &out.params, self.zs, self.zs_codes, self.rule)?.zs_mca)
    }

    pub fn rule_config(&self) -> ModelConfig {
        ModelConfig {
            mode: Mode::Rule,
            lambda: 0.0,
            beta: 0.0,
            ..self.model
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub value: f64,
    pub seed: u64,
    pub zs_mca: f64,
    pub delta_vs_rule: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub axis: SweepAxis,
    pub grid: Vec<f64>,
    pub seeds: Vec<u64>,
    /// RULE accuracy per seed.
    pub rule_mca: Vec<f64>,
    /// Median of `rule_mca`.
    pub baseline_rule_mca: f64,
    /// Grid-major: all seeds of `grid[0]`, then `grid[1]`, ...
    pub cells: Vec<SweepCell>,
}

pub fn median(values: &[f64]) -> f64 {
    let mut v: Vec<f64> = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    match n {
        0 => f64::NAN,
        _ if n % 2 == 1 => v[n / 2],
        _ => 0.5 * (v[n / 2 - 1] + v[n / 2]),
    }
}

/// Mean and sample standard deviation (0 for a single value).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

impl SweepResult {
    pub fn accuracies_at(&self, index: usize) -> Vec<f64> {
        let s = self.seeds.len();
        self.cells[index * s..(index + 1) * s].iter().map(|c| c.zs_mca).collect()
    }

    pub fn median_at(&self, index: usize) -> f64 {
        median(&self.accuracies_at(index))
    }

    pub fn mean_std_at(&self, index: usize) -> (f64, f64) {
        mean_std(&self.accuracies_at(index))
    }

    /// `axis,value,seed,zs_mca,delta_vs_rule`; RULE baseline rows carry the
    /// axis name `rule` and an empty value.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("axis,value,seed,zs_mca,delta_vs_rule\n");
        for (seed, mca) in self.seeds.iter().zip(&self.rule_mca) {
            out.push_str(&format!("rule,,{seed},{mca},0\n"));
        }
        for c in &self.cells {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                self.axis, c.value, c.seed, c.zs_mca, c.delta_vs_rule
            ));
        }
        out
    }
}

/// Runs `jobs` on up to `threads` workers and returns results in job order.
pub fn run_ordered<R: Send>(jobs: usize, threads: usize, work: impl Fn(usize) -> R + Sync) -> Vec<R> {
    let threads = threads.clamp(1, jobs.max(1));
    if threads == 1 {
        return (0..jobs).map(&work).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<R>>> = Mutex::new((0..jobs).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..threads {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= jobs {
                    break;
                }
                let r = work(i);
                slots.lock().expect("worker panicked")[i] = Some(r);
            });
        }
    });
    slots
        .into_inner()
        .expect("worker panicked")
        .into_iter()
        .map(|r| r.expect("every job ran"))
        .collect()
}

/// Trains a RULE baseline per seed and one SCORE model per (grid value, seed),
/// each cell reporting zero-shot accuracy and its gain over RULE at the same
/// seed.
pub fn regularizer_sweep<T: Real>(
    task: &SweepTask<'_, T>,
    axis: SweepAxis,
    grid: &[f64],
    seeds: &[u64],
    threads: usize,
) -> Result<SweepResult> {
    if grid.is_empty() || seeds.is_empty() {
        return Err(Error::contract("sweep needs at least one grid value and one seed"));
    }
    if grid.iter().any(|v| !v.is_finite() || *v < 0.0) || grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::contract("sweep grid must be finite, non-negative and strictly increasing"));
    }
    let s = seeds.len();
    let jobs = s * (grid.len() + 1);
    let results = run_ordered(jobs, threads, |j| {
        let seed = seeds[j % s];
        if j < s {
            task.run_cell(task.rule_config(), seed).map_err(|e| Error::Cell {
                axis: "rule".into(),
                value: 0.0,
                seed,
                source: Box::new(e),
            })
        } else {
            let value = grid[j / s - 1];
            task.run_cell(axis.config(&task.model, value), seed).map_err(|e| Error::Cell {
                axis: axis.as_str().into(),
                value,
                seed,
                source: Box::new(e),
            })
        }
    });
    let results = results.into_iter().collect::<Result<Vec<f64>>>()?;
    let rule_mca = results[..s].to_vec();
    let cells = results[s..]
        .iter()
        .enumerate()
        .map(|(j, &mca)| SweepCell {
            value: grid[j / s],
            seed: seeds[j % s],
            zs_mca: mca,
            delta_vs_rule: mca - rule_mca[j % s],
        })
        .collect();
    let result = SweepResult {
        axis,
        grid: grid.to_vec(),
        seeds: seeds.to_vec(),
        baseline_rule_mca: median(&rule_mca),
        rule_mca,
        cells,
    };
    info!(
        "{} sweep over {} values x {} seeds: rule median {:.4}",
        axis,
        grid.len(),
        s,
        result.baseline_rule_mca
    );
    Ok(result)
}
