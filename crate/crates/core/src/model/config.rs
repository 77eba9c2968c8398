use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::Real;

/// Which member of the objective family is trained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Independent semantic predictors: auxiliary risk only, codewords fixed.
    Ris,
    /// Classification with codewords frozen at the semantic codes.
    Rule,
    /// Plain classifier with free codewords initialized at the semantic codes.
    Unrestricted,
    /// Classification plus `lambda` x auxiliary risk plus `beta` x codeword penalty.
    Score,
}

impl Mode {
    pub const ALL: [Mode; 4] = [Mode::Ris, Mode::Rule, Mode::Unrestricted, Mode::Score];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Ris => "ris",
            Mode::Rule => "rule",
            Mode::Unrestricted => "unrestricted",
            Mode::Score => "score",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Mode::ALL
            .into_iter()
            .find(|m| m.as_str() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::contract(format!("unknown mode '{s}'")))
    }
}

/// Layout of the learned classification codewords.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CodewordPath {
    /// One codeword per class over the whole code (`W` is `Q' x C`).
    Dense,
    /// One codeword per state of every discrete semantic, combined into class
    /// scores by a fixed selection layer. Continuous semantics keep per-class
    /// codewords.
    PerState,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OmegaForm {
    /// `1/2 sum ||w - phi||^2`.
    Exact,
    /// `-sum w^T phi`; the quadratic half is left to weight decay.
    InnerProduct,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub mode: Mode,
    pub lambda: f64,
    pub beta: f64,
    pub codeword_path: CodewordPath,
    pub omega_form: OmegaForm,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            mode: Mode::Score,
            lambda: 0.0,
            beta: 0.0,
            codeword_path: CodewordPath::Dense,
            omega_form: OmegaForm::Exact,
        }
    }
}

impl ModelConfig {
    pub fn new(mode: Mode) -> Self {
        ModelConfig {
            mode,
            ..Default::default()
        }
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = beta;
        self
    }

    pub fn with_path(mut self, path: CodewordPath) -> Self {
        self.codeword_path = path;
        self
    }

    pub fn with_omega(mut self, form: OmegaForm) -> Self {
        self.omega_form = form;
        self
    }

    /// Rejects negative multipliers and multipliers that the mode would
    /// silently ignore.
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("lambda", self.lambda), ("beta", self.beta)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::contract(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        if self.mode != Mode::Score && (self.lambda != 0.0 || self.beta != 0.0) {
            return Err(Error::contract(format!(
                "mode '{}' fixes lambda = beta = 0; got lambda = {}, beta = {}",
                self.mode, self.lambda, self.beta
            )));
        }
        Ok(())
    }

    pub fn codewords_trainable(&self) -> bool {
        matches!(self.mode, Mode::Unrestricted | Mode::Score)
    }

    pub fn weights<T: Real>(&self) -> ObjectiveWeights<T> {
        match self.mode {
            Mode::Ris => ObjectiveWeights::new(0.0, 1.0, 0.0),
            Mode::Rule | Mode::Unrestricted => ObjectiveWeights::new(1.0, 0.0, 0.0),
            Mode::Score => ObjectiveWeights::new(1.0, self.lambda, self.beta),
        }
    }
}

/// Multipliers of the three objective terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveWeights<T> {
    pub classification: T,
    pub auxiliary: T,
    pub omega: T,
}

impl<T: Real> ObjectiveWeights<T> {
    pub fn new(classification: f64, auxiliary: f64, omega: f64) -> Self {
        ObjectiveWeights {
            classification: T::lit(classification),
            auxiliary: T::lit(auxiliary),
            omega: T::lit(omega),
        }
    }

    pub fn without_omega(self) -> Self {
        ObjectiveWeights {
            omega: T::zero(),
            ..self
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn non_score_modes_reject_multipliers() {
        assert!(ModelConfig::new(Mode::Rule).with_lambda(0.1).validate().is_err());
        assert!(ModelConfig::new(Mode::Ris).with_beta(1.0).validate().is_err());
        assert!(ModelConfig::new(Mode::Score).with_lambda(-1.0).validate().is_err());
        assert!(ModelConfig::new(Mode::Score).with_lambda(2.0).with_beta(3.0).validate().is_ok());
    }

    #[test]
    fn mode_parsing() {
        assert_eq!("RULE".parse::<Mode>().unwrap(), Mode::Rule);
        assert!("foo".parse::<Mode>().is_err());
    }
}
