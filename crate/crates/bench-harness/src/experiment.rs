//! Experiment orchestration: one synthetic dataset, several fusion methods
//! trained across several seeds, evaluated clean and under conflict.

use crate::data::{generate_synthetic, inject_conflict, SyntheticSpec};
use crate::error::HarnessError;
use crate::metrics::{evaluate, EvaluationFragment};
use crate::report::{summarize_method, ExperimentReport, MethodSummary};
use crate::svg::uncertainty_histogram_svg;
use evidential_train::{train, LossBreakdown, TrainConfig};
use fusion_ops::FusionMethod;
use rayon::prelude::*;
use serde::Serialize;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

/// Everything a `bench run` needs, parsed from one `key = value` file.
/// Data keys mirror [`SyntheticSpec`]; training keys mirror
/// [`TrainConfig`] minus `seed` and `fusion`, which the experiment sweeps.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentConfig {
    // data
    pub classes: usize,
    pub views: usize,
    pub dims: Vec<usize>,
    pub separation: f64,
    pub noise: f64,
    pub samples: usize,
    pub data_seed: u64,
    pub conflict_rate: f64,
    // sweep
    #[serde(serialize_with = "method_names")]
    pub methods: Vec<FusionMethod>,
    pub seeds: Vec<u64>,
    // training
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub annealing_epochs: usize,
    pub gamma: f64,
    pub beta: f64,
    pub lambda: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub hidden: usize,
    pub detach_fusion: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let t = TrainConfig::default();
        ExperimentConfig {
            classes: 4,
            views: 3,
            dims: vec![8, 8, 8],
            separation: 6.0,
            noise: 1.0,
            samples: 2000,
            data_seed: 0,
            conflict_rate: 1.0,
            methods: vec![FusionMethod::Gbaf, FusionMethod::Dbf],
            seeds: vec![0, 1, 2, 3, 4],
            learning_rate: t.learning_rate,
            weight_decay: t.weight_decay,
            annealing_epochs: t.annealing_epochs,
            gamma: t.gamma,
            beta: t.beta,
            lambda: t.lambda,
            epochs: t.epochs,
            batch_size: t.batch_size,
            hidden: t.hidden,
            detach_fusion: t.detach_fusion,
        }
    }
}

fn method_names<S: serde::Serializer>(
    methods: &[FusionMethod],
    ser: S,
) -> Result<S::Ok, S::Error> {
    ser.collect_seq(methods.iter().map(|m| m.to_string()))
}

fn parse_list<T: FromStr>(value: &str, what: &str) -> Result<Vec<T>, HarnessError>
where
    T::Err: std::fmt::Display,
{
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse().map_err(|e| {
                HarnessError::Config(format!("bad {what} entry `{s}`: {e}"))
            })
        })
        .collect()
}

impl ExperimentConfig {
    pub fn from_key_values(text: &str) -> Result<ExperimentConfig, HarnessError> {
        let mut cfg = ExperimentConfig::default();
        let mut dims_explicit = false;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let stripped = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            };
            if stripped.trim().is_empty() {
                continue;
            }
            let (key, value) = stripped.split_once('=').ok_or_else(|| {
                HarnessError::Config(format!("line {line}: expected `key = value`, got `{raw}`"))
            })?;
            let key = key.trim();
            let value = value.trim();
            let bad = |e: String| HarnessError::Config(format!("line {line}: {e}"));
            macro_rules! set {
                ($field:ident) => {
                    cfg.$field = value.parse().map_err(|e| {
                        bad(format!("bad value for {}: {e}", stringify!($field)))
                    })?
                };
            }
            match key {
                "classes" => set!(classes),
                "views" => set!(views),
                "dims" => {
                    cfg.dims = parse_list(value, "dims")?;
                    dims_explicit = true;
                }
                "separation" => set!(separation),
                "noise" => set!(noise),
                "samples" => set!(samples),
                "data_seed" => set!(data_seed),
                "conflict_rate" => set!(conflict_rate),
                "methods" => cfg.methods = parse_list(value, "methods")?,
                "seeds" => cfg.seeds = parse_list(value, "seeds")?,
                "learning_rate" => set!(learning_rate),
                "weight_decay" => set!(weight_decay),
                "annealing_epochs" => set!(annealing_epochs),
                "gamma" => set!(gamma),
                "beta" => set!(beta),
                "lambda" => set!(lambda),
                "epochs" => set!(epochs),
                "batch_size" => set!(batch_size),
                "hidden" => set!(hidden),
                "detach_fusion" => set!(detach_fusion),
                other => {
                    return Err(bad(format!(
                        "unknown key `{other}` (known keys: classes, views, dims, separation, \
                         noise, samples, data_seed, conflict_rate, methods, seeds, learning_rate, \
                         weight_decay, annealing_epochs, gamma, beta, lambda, epochs, batch_size, \
                         hidden, detach_fusion)"
                    )))
                }
            }
        }
        // A single dims entry is replicated across all views.
        if cfg.dims.len() == 1 && cfg.views > 1 {
            cfg.dims = vec![cfg.dims[0]; cfg.views];
        } else if !dims_explicit && cfg.dims.len() != cfg.views {
            cfg.dims = vec![8; cfg.views];
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<ExperimentConfig, HarnessError> {
        Self::from_key_values(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        self.synthetic_spec().validate()?;
        if self.methods.is_empty() {
            return Err(HarnessError::Config("methods must not be empty".into()));
        }
        if self.seeds.is_empty() {
            return Err(HarnessError::Config("seeds must not be empty".into()));
        }
        if !(0.0..=1.0).contains(&self.conflict_rate) {
            return Err(HarnessError::RateOutOfRange(self.conflict_rate));
        }
        self.train_config(self.methods[0], 0).validate()?;
        Ok(())
    }

    pub fn synthetic_spec(&self) -> SyntheticSpec {
        SyntheticSpec {
            classes: self.classes,
            views: self.views,
            dims: self.dims.clone(),
            separation: self.separation,
            noise: self.noise,
            samples: self.samples,
            seed: self.data_seed,
        }
    }

    pub fn train_config(&self, fusion: FusionMethod, seed: u64) -> TrainConfig {
        TrainConfig {
            learning_rate: self.learning_rate,
            weight_decay: self.weight_decay,
            annealing_epochs: self.annealing_epochs,
            gamma: self.gamma,
            beta: self.beta,
            lambda: self.lambda,
            epochs: self.epochs,
            batch_size: self.batch_size,
            hidden: self.hidden,
            seed,
            fusion,
            detach_fusion: self.detach_fusion,
        }
    }
}

/// One (method, seed) training/evaluation result.
pub struct RunResult {
    pub method: FusionMethod,
    pub seed: u64,
    pub fragment: EvaluationFragment,
    pub history: Vec<LossBreakdown>,
}

/// Train and evaluate every (method, seed) pair on one shared dataset.
/// All methods see identical data and identical seeds; pairs run in
/// parallel. The conflict set is the clean test set with `conflict_rate`
/// of its samples corrupted, derived deterministically from `data_seed`.
pub fn run_jobs(config: &ExperimentConfig) -> Result<Vec<RunResult>, HarnessError> {
    config.validate()?;
    let data = generate_synthetic(&config.synthetic_spec())?;
    let standardizer = crate::csv_io::Standardizer::fit(&data.train);
    let train_set = standardizer.apply(&data.train);
    let test_set = standardizer.apply(&data.test);
    let conflict_set = inject_conflict(&test_set, config.conflict_rate, config.data_seed + 1)?;

    let jobs: Vec<(FusionMethod, u64)> = config
        .methods
        .iter()
        .flat_map(|&m| config.seeds.iter().map(move |&s| (m, s)))
        .collect();

    jobs.into_par_iter()
        .map(|(method, seed)| {
            let run = || -> Result<RunResult, HarnessError> {
                let outcome = train(&train_set, &config.train_config(method, seed))?;
                let fragment = evaluate(
                    &outcome.network,
                    &test_set,
                    &conflict_set,
                    method,
                    config.lambda,
                )?;
                Ok(RunResult {
                    method,
                    seed,
                    fragment,
                    history: outcome.history,
                })
            };
            run().map_err(|e| HarnessError::RunFailed {
                method: method.to_string(),
                seed,
                source: Box::new(e),
            })
        })
        .collect()
}

/// Aggregate per-(method, seed) results in the order methods were requested.
pub fn summarize(config: &ExperimentConfig, results: &[RunResult]) -> Vec<MethodSummary> {
    config
        .methods
        .iter()
        .map(|&method| {
            let fragments: Vec<EvaluationFragment> = config
                .seeds
                .iter()
                .map(|&seed| {
                    results
                        .iter()
                        .find(|r| r.method == method && r.seed == seed)
                        .expect("every job produced a result")
                        .fragment
                        .clone()
                })
                .collect();
            summarize_method(&method.to_string(), &config.seeds, &fragments)
        })
        .collect()
}

/// Full experiment: run all jobs, write artifacts into `out_dir`, return the
/// report. Artifacts: `report.json`, `report.csv`, one
/// `uncertainty_<method>.svg` per method (uncertainties pooled over seeds),
/// and per-method `loss_history_<seed>.csv` files.
pub fn run_experiment(
    config: &ExperimentConfig,
    out_dir: &Path,
) -> Result<ExperimentReport<ExperimentConfig>, HarnessError> {
    let started = Instant::now();
    let results = run_jobs(config)?;
    let methods = summarize(config, &results);

    std::fs::create_dir_all(out_dir)?;
    for &method in &config.methods {
        let method_dir = out_dir.join(method.to_string());
        std::fs::create_dir_all(&method_dir)?;
        let mut clean_pool = Vec::new();
        let mut conflict_pool = Vec::new();
        for r in results.iter().filter(|r| r.method == method) {
            clean_pool.extend_from_slice(&r.fragment.clean_uncertainties);
            conflict_pool.extend_from_slice(&r.fragment.conflict_uncertainties);
            evidential_train::write_loss_history(
                &method_dir.join(format!("loss_history_{}.csv", r.seed)),
                &r.history,
            )?;
        }
        let svg = uncertainty_histogram_svg(&method.to_string(), &clean_pool, &conflict_pool);
        std::fs::write(out_dir.join(format!("uncertainty_{method}.svg")), svg)?;
    }

    let report = ExperimentReport {
        config: config.clone(),
        methods,
        wall_time_seconds: started.elapsed().as_secs_f64(),
    };
    std::fs::write(out_dir.join("report.json"), report.to_json()?)?;
    std::fs::write(out_dir.join("report.csv"), report.to_csv())?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_full_config() {
        let text = "\
            # tiny smoke experiment\n\
            classes = 3\n\
            views = 2\n\
            dims = 4, 6\n\
            separation = 5\n\
            noise = 0.5\n\
            samples = 80\n\
            data_seed = 1\n\
            conflict_rate = 0.5\n\
            methods = gbaf, dbf\n\
            seeds = 0, 7\n\
            epochs = 3\n\
            hidden = 8\n\
            lambda = 2.0 # sharpness\n";
        let cfg = ExperimentConfig::from_key_values(text).unwrap();
        assert_eq!(cfg.dims, vec![4, 6]);
        assert_eq!(cfg.methods, vec![FusionMethod::Gbaf, FusionMethod::Dbf]);
        assert_eq!(cfg.seeds, vec![0, 7]);
        assert_eq!(cfg.epochs, 3);
        assert_eq!(cfg.lambda, 2.0);
    }

    #[test]
    fn single_dim_entry_replicates_across_views() {
        let cfg = ExperimentConfig::from_key_values("views = 4\ndims = 5\nsamples = 200\n").unwrap();
        assert_eq!(cfg.dims, vec![5, 5, 5, 5]);
    }

    #[test]
    fn view_count_change_without_dims_gets_defaults() {
        let cfg = ExperimentConfig::from_key_values("views = 2\n").unwrap();
        assert_eq!(cfg.dims, vec![8, 8]);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(matches!(
            ExperimentConfig::from_key_values("mystery = 1\n"),
            Err(HarnessError::Config(_))
        ));
        assert!(ExperimentConfig::from_key_values("methods = dempster\n").is_err());
        assert!(ExperimentConfig::from_key_values("conflict_rate = 2.0\n").is_err());
        assert!(ExperimentConfig::from_key_values("methods = \n").is_err());
        assert!(ExperimentConfig::from_key_values("classes = 1\n").is_err());
    }
}
