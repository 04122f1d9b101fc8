//! Fitting and applying single detectors: score, optimize thresholds on
//! labeled data, and reapply the stored thresholds elsewhere.
//!
//! Detectors carry no fitted state beyond their thresholds — the isolation
//! forest is refit (with the stored seed) on whatever data is being scored,
//! and SPC/binary segmentation are deterministic — so a "model" is just the
//! configuration plus a threshold set.

use serde::{Deserialize, Serialize};

use crate::detect;
use crate::error::Result;
use crate::model::{
    DetectorConfig, DifferenceSeries, LengthCategory, PredictionSeries, ScoreSeries, ThresholdSet,
};
use crate::threshold::{self, ThresholdOptimizationResult};

/// Scores every station with one detector. Pooled isolation forests fit a
/// single forest across stations; everything else is per-station.
pub fn score_detector(
    config: &DetectorConfig,
    series: &[DifferenceSeries],
    seed: u64,
) -> Result<Vec<ScoreSeries>> {
    config.validate()?;
    match config {
        DetectorConfig::Spc(cfg) => Ok(series.iter().map(|s| detect::spc_score(s, cfg)).collect()),
        DetectorConfig::Binseg(cfg) => {
            Ok(series.iter().map(|s| detect::binseg_score(s, cfg)).collect())
        }
        DetectorConfig::IsolationForest(cfg) => {
            if cfg.pooled {
                detect::if_score_pooled(series, cfg, seed)
            } else {
                series
                    .iter()
                    .map(|s| detect::if_score_per_station(s, cfg, seed))
                    .collect()
            }
        }
    }
}

/// A fitted single detector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingleModel {
    pub detector: DetectorConfig,
    pub thresholds: ThresholdSet,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub optimization: Option<ThresholdOptimizationResult>,
}

fn threshold_strategy(config: &DetectorConfig) -> crate::model::ThresholdStrategy {
    match config {
        DetectorConfig::Spc(c) => c.threshold_strategy,
        DetectorConfig::IsolationForest(c) => c.threshold_strategy,
        DetectorConfig::Binseg(c) => c.threshold_strategy,
    }
}

/// Scores the training stations and optimizes thresholds for the mean F1.5
/// over `objective` categories.
pub fn fit_single(
    config: &DetectorConfig,
    train: &[DifferenceSeries],
    seed: u64,
    objective: &[LengthCategory],
) -> Result<SingleModel> {
    let scores = score_detector(config, train, seed)?;
    let labels: Vec<_> = train.iter().map(|s| s.carried_labels.clone()).collect();
    let optimization =
        threshold::optimize_thresholds(&scores, &labels, threshold_strategy(config), objective)?;
    Ok(SingleModel {
        detector: *config,
        thresholds: optimization.threshold_set,
        optimization: Some(optimization),
    })
}

/// Applies a fitted detector to stations.
pub fn apply_single(
    model: &SingleModel,
    series: &[DifferenceSeries],
    seed: u64,
) -> Result<Vec<PredictionSeries>> {
    let scores = score_detector(&model.detector, series, seed)?;
    scores
        .iter()
        .map(|s| threshold::threshold_scores(s, &model.thresholds))
        .collect()
}
