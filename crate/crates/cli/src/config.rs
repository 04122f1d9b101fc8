//! Run configuration: a single TOML file, optionally overridden by flags.
//! Every run writes a resolved snapshot next to its outputs so any report
//! can be traced back to the exact parameters that produced it.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use loadseg::ensemble::EnsembleStrategy;
use loadseg::ingest::SyntheticSpec;
use loadseg::model::{BinsegConfig, IfConfig, ReferencePoint, SpcConfig, ThresholdStrategy};
use loadseg::preprocess::PreprocessConfig;

use crate::util::{CliError, CliResult};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Seed for every stochastic step (splitting, forests, bootstrap).
    pub seed: u64,
    pub bootstrap_iterations: u64,
    pub paths: Paths,
    pub preprocess: PreprocessConfig,
    pub grid: Grid,
    /// Synthetic-data blueprint; only required by `generate`.
    pub generate: Option<GenerateConfig>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 42,
            bootstrap_iterations: 10_000,
            paths: Paths::default(),
            preprocess: PreprocessConfig::default(),
            grid: Grid::default(),
            generate: None,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<RunConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let config: RunConfig = toml::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> CliResult<()> {
        self.preprocess
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))?;
        self.grid.validate()?;
        if self.bootstrap_iterations == 0 {
            return Err(CliError::Config("bootstrap_iterations must be positive".into()));
        }
        Ok(())
    }

    /// Serialized snapshot written to the output directory by every command.
    pub fn snapshot(&self) -> CliResult<String> {
        toml::to_string_pretty(self).map_err(|e| CliError::Config(e.to_string()))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    /// Directory of raw station CSVs (`<station_id>.csv`).
    pub data_dir: PathBuf,
    /// Directory receiving all artifacts.
    pub output_dir: PathBuf,
    /// Split assignment CSV; defaults to `<output_dir>/split.csv`.
    pub split_file: Option<PathBuf>,
    /// Model JSON; defaults to `<output_dir>/model.json`.
    pub model_file: Option<PathBuf>,
}

impl Default for Paths {
    fn default() -> Self {
        Paths {
            data_dir: PathBuf::from("data"),
            output_dir: PathBuf::from("out"),
            split_file: None,
            model_file: None,
        }
    }
}

impl Paths {
    pub fn split_file(&self) -> PathBuf {
        self.split_file
            .clone()
            .unwrap_or_else(|| self.output_dir.join("split.csv"))
    }

    pub fn model_file(&self) -> PathBuf {
        self.model_file
            .clone()
            .unwrap_or_else(|| self.output_dir.join("model.json"))
    }
}

/// The hyperparameter search space scanned by `optimize`. The defaults are
/// the published search space; shrink the lists for faster runs.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Grid {
    pub spc_quantiles: Vec<(f64, f64)>,
    pub spc_strategies: Vec<ThresholdStrategy>,
    pub if_n_estimators: Vec<usize>,
    /// Fit one forest per station (raw delta) in addition to the pooled one.
    pub if_per_station: bool,
    pub if_pooled_quantiles: Vec<(f64, f64)>,
    pub bs_beta: Vec<f64>,
    pub bs_min_size: Vec<usize>,
    pub bs_jump: Vec<usize>,
    pub bs_quantiles: Vec<(f64, f64)>,
    pub bs_reference: Vec<ReferencePoint>,
    pub bs_strategies: Vec<ThresholdStrategy>,
    /// Ensembles built from the selected best binseg and short detector.
    pub ensembles: Vec<EnsembleStrategy>,
}

impl Default for Grid {
    fn default() -> Self {
        Grid {
            spc_quantiles: vec![(10.0, 90.0), (15.0, 85.0), (20.0, 80.0)],
            spc_strategies: vec![
                ThresholdStrategy::Symmetrical,
                ThresholdStrategy::Asymmetrical,
            ],
            if_n_estimators: vec![1000],
            if_per_station: true,
            if_pooled_quantiles: vec![(10.0, 90.0), (15.0, 85.0), (20.0, 80.0)],
            bs_beta: vec![0.005, 0.008, 0.015, 0.05, 0.08, 0.12],
            bs_min_size: vec![150, 200, 288],
            bs_jump: vec![5, 10],
            bs_quantiles: vec![(10.0, 90.0), (15.0, 85.0), (20.0, 80.0)],
            bs_reference: vec![
                ReferencePoint::Mean,
                ReferencePoint::Median,
                ReferencePoint::LongestMean,
                ReferencePoint::LongestMedian,
            ],
            bs_strategies: vec![
                ThresholdStrategy::Symmetrical,
                ThresholdStrategy::Asymmetrical,
            ],
            ensembles: vec![
                EnsembleStrategy::Naive,
                EnsembleStrategy::Doc,
                EnsembleStrategy::Sequential,
            ],
        }
    }
}

impl Grid {
    pub fn validate(&self) -> CliResult<()> {
        let nonempty = [
            ("spc_quantiles", self.spc_quantiles.is_empty()),
            ("spc_strategies", self.spc_strategies.is_empty()),
            ("if_n_estimators", self.if_n_estimators.is_empty()),
            ("if_pooled_quantiles", self.if_pooled_quantiles.is_empty()),
            ("bs_beta", self.bs_beta.is_empty()),
            ("bs_min_size", self.bs_min_size.is_empty()),
            ("bs_jump", self.bs_jump.is_empty()),
            ("bs_quantiles", self.bs_quantiles.is_empty()),
            ("bs_reference", self.bs_reference.is_empty()),
            ("bs_strategies", self.bs_strategies.is_empty()),
        ];
        for (name, empty) in nonempty {
            if empty {
                return Err(CliError::Config(format!("grid.{name} must be nonempty")));
            }
        }
        Ok(())
    }

    pub fn spc_configs(&self) -> Vec<SpcConfig> {
        let mut out = Vec::new();
        for &(q_lower, q_upper) in &self.spc_quantiles {
            for &threshold_strategy in &self.spc_strategies {
                out.push(SpcConfig {
                    q_lower,
                    q_upper,
                    threshold_strategy,
                });
            }
        }
        out
    }

    pub fn if_per_station_configs(&self) -> Vec<IfConfig> {
        if !self.if_per_station {
            return Vec::new();
        }
        self.if_n_estimators
            .iter()
            .map(|&n_estimators| IfConfig {
                n_estimators,
                pooled: false,
                ..IfConfig::default()
            })
            .collect()
    }

    pub fn if_pooled_configs(&self) -> Vec<IfConfig> {
        let mut out = Vec::new();
        for &n_estimators in &self.if_n_estimators {
            for &(q_lower, q_upper) in &self.if_pooled_quantiles {
                out.push(IfConfig {
                    n_estimators,
                    pooled: true,
                    q_lower,
                    q_upper,
                    ..IfConfig::default()
                });
            }
        }
        out
    }

    pub fn bs_configs(&self) -> Vec<BinsegConfig> {
        let mut out = Vec::new();
        for &beta in &self.bs_beta {
            for &min_size in &self.bs_min_size {
                for &jump in &self.bs_jump {
                    for &(q_lower, q_upper) in &self.bs_quantiles {
                        for &reference_point in &self.bs_reference {
                            for &threshold_strategy in &self.bs_strategies {
                                out.push(BinsegConfig {
                                    beta,
                                    min_size,
                                    jump,
                                    q_lower,
                                    q_upper,
                                    reference_point,
                                    threshold_strategy,
                                    ..BinsegConfig::default()
                                });
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerateConfig {
    /// Number of stations; ids are st0000, st0001, ...
    pub count: usize,
    /// Station i is generated with seed `base_seed + i`.
    pub base_seed: u64,
    pub spec: SyntheticSpec,
}
