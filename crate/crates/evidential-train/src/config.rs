use std::path::Path;
use std::str::FromStr;

use fusion_ops::FusionMethod;

use crate::error::TrainError;

/// Training hyperparameters.
///
/// Read from a plain-text key/value file where each non-empty line is
/// `key = value`; `#` starts a comment. Keys match the field names below;
/// unknown keys are rejected. Missing keys keep their defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub weight_decay: f64,
    /// Annealing step T: the KL weight is min(1, epoch/T).
    pub annealing_epochs: usize,
    /// Weight of the consistency loss.
    pub gamma: f64,
    /// Weight of the per-view accuracy losses.
    pub beta: f64,
    /// Discounting strength for DBF fusion.
    pub lambda: f64,
    pub epochs: usize,
    pub batch_size: usize,
    /// Hidden width of each per-view network.
    pub hidden: usize,
    pub seed: u64,
    pub fusion: FusionMethod,
    /// When true, the fused accuracy loss treats per-view evidences as
    /// constants: gradients reach the networks only through the per-view
    /// and consistency terms.
    pub detach_fusion: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.003,
            weight_decay: 1e-4,
            annealing_epochs: 10,
            gamma: 0.5,
            beta: 1.0,
            lambda: 1.0,
            epochs: 100,
            batch_size: 64,
            hidden: 64,
            seed: 0,
            fusion: FusionMethod::Dbf,
            detach_fusion: false,
        }
    }
}

impl TrainConfig {
    /// Parse the key/value format described on the type.
    pub fn from_key_values(text: &str) -> Result<TrainConfig, TrainError> {
        let mut config = TrainConfig::default();
        for (line_no, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(TrainError::Config(format!(
                    "line {}: expected `key = value`, got `{raw}`",
                    line_no + 1
                )));
            };
            config.set(key.trim(), value.trim(), line_no + 1)?;
        }
        config.validate()?;
        Ok(config)
    }

    pub fn from_file(path: &Path) -> Result<TrainConfig, TrainError> {
        let text = std::fs::read_to_string(path)?;
        TrainConfig::from_key_values(&text)
    }

    fn set(&mut self, key: &str, value: &str, line: usize) -> Result<(), TrainError> {
        fn parse<T: FromStr>(key: &str, value: &str, line: usize) -> Result<T, TrainError>
        where
            T::Err: std::fmt::Display,
        {
            value.parse().map_err(|e| {
                TrainError::Config(format!("line {line}: bad value for {key}: {e}"))
            })
        }
        match key {
            "learning_rate" => self.learning_rate = parse(key, value, line)?,
            "weight_decay" => self.weight_decay = parse(key, value, line)?,
            "annealing_epochs" => self.annealing_epochs = parse(key, value, line)?,
            "gamma" => self.gamma = parse(key, value, line)?,
            "beta" => self.beta = parse(key, value, line)?,
            "lambda" => self.lambda = parse(key, value, line)?,
            "epochs" => self.epochs = parse(key, value, line)?,
            "batch_size" => self.batch_size = parse(key, value, line)?,
            "hidden" => self.hidden = parse(key, value, line)?,
            "seed" => self.seed = parse(key, value, line)?,
            "fusion" => self.fusion = parse(key, value, line)?,
            "detach_fusion" => self.detach_fusion = parse(key, value, line)?,
            other => {
                return Err(TrainError::Config(format!(
                    "line {line}: unknown key `{other}` (known keys: learning_rate, \
                     weight_decay, annealing_epochs, gamma, beta, lambda, epochs, \
                     batch_size, hidden, seed, fusion, detach_fusion)"
                )))
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), TrainError> {
        let err = |msg: String| Err(TrainError::Config(msg));
        if self.learning_rate <= 0.0 || !self.learning_rate.is_finite() {
            return err(format!("learning_rate must be positive, got {}", self.learning_rate));
        }
        if self.weight_decay < 0.0 || !self.weight_decay.is_finite() {
            return err(format!("weight_decay must be non-negative, got {}", self.weight_decay));
        }
        if self.annealing_epochs < 1 {
            return err("annealing_epochs must be at least 1".into());
        }
        if self.gamma < 0.0 || !self.gamma.is_finite() {
            return err(format!("gamma must be non-negative, got {}", self.gamma));
        }
        if self.beta < 0.0 || !self.beta.is_finite() {
            return err(format!("beta must be non-negative, got {}", self.beta));
        }
        if self.lambda <= 0.0 || !self.lambda.is_finite() {
            return err(format!("lambda must be positive, got {}", self.lambda));
        }
        if self.batch_size < 1 {
            return err("batch_size must be at least 1".into());
        }
        if self.hidden < 1 {
            return err("hidden must be at least 1".into());
        }
        Ok(())
    }
}
