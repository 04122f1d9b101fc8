//! Combining a long-event detector (binary segmentation) with a short-event
//! detector (SPC or isolation forest).
//!
//! Three strategies:
//! - naive: both detectors optimized on all categories, predictions ORed;
//! - DOC (different optimization criteria): the long detector optimized on
//!   the long categories only, the short on the short categories, ORed;
//! - sequential: the long detector runs first; the short detector is
//!   re-scored on the residual (the points of segments not flagged long),
//!   with its robust scaling recomputed there, and the positive sets are
//!   unioned.

use serde::{Deserialize, Serialize};

use crate::detect;
use crate::error::{Error, Result};
use crate::model::{
    BinsegConfig, DifferenceSeries, IfConfig, LengthCategory, PredictionSeries, ScoreSeries,
    SpcConfig, ThresholdSet, ThresholdStrategy,
};
use crate::threshold::{self, ThresholdOptimizationResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnsembleStrategy {
    Naive,
    Doc,
    Sequential,
}

/// The short-event component of an ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShortDetectorConfig {
    Spc(SpcConfig),
    IsolationForest(IfConfig),
}

impl ShortDetectorConfig {
    fn threshold_strategy(&self) -> ThresholdStrategy {
        match self {
            ShortDetectorConfig::Spc(cfg) => cfg.threshold_strategy,
            ShortDetectorConfig::IsolationForest(cfg) => cfg.threshold_strategy,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub strategy: EnsembleStrategy,
    pub long_detector: BinsegConfig,
    pub short_detector: ShortDetectorConfig,
    /// Categories the long detector's thresholds are optimized on
    /// (DOC/sequential; naive uses all categories for both detectors).
    pub long_categories: Vec<LengthCategory>,
    pub short_categories: Vec<LengthCategory>,
}

impl EnsembleConfig {
    pub fn new(strategy: EnsembleStrategy, long: BinsegConfig, short: ShortDetectorConfig) -> Self {
        EnsembleConfig {
            strategy,
            long_detector: long,
            short_detector: short,
            long_categories: vec![LengthCategory::C3, LengthCategory::C4],
            short_categories: vec![LengthCategory::C1, LengthCategory::C2],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.strategy != EnsembleStrategy::Naive {
            let mut covered = [false; 4];
            for c in self.long_categories.iter().chain(&self.short_categories) {
                if covered[c.index()] {
                    return Err(Error::Config(format!(
                        "category {c:?} assigned to both detectors"
                    )));
                }
                covered[c.index()] = true;
            }
            if covered != [true; 4] {
                return Err(Error::Config(
                    "long and short categories must cover all four categories".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Elementwise OR of two aligned prediction series.
pub fn ensemble_naive(a: &PredictionSeries, b: &PredictionSeries) -> Result<PredictionSeries> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    Ok(PredictionSeries {
        station_id: a.station_id.clone(),
        predictions: a
            .predictions
            .iter()
            .zip(&b.predictions)
            .map(|(&x, &y)| x | y)
            .collect(),
    })
}

/// Fitted state of an ensemble: only the thresholds, since the detectors
/// themselves are refit on the data being scored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleModel {
    pub config: EnsembleConfig,
    pub long_thresholds: ThresholdSet,
    /// Absent when the sequential fit saw an empty residual everywhere.
    pub short_thresholds: Option<ThresholdSet>,
    pub long_optimization: ThresholdOptimizationResult,
    pub short_optimization: Option<ThresholdOptimizationResult>,
}

/// Scores the short detector over a set of (possibly residual) series.
fn score_short(
    cfg: &ShortDetectorConfig,
    series: &[DifferenceSeries],
    seed: u64,
) -> Result<Vec<ScoreSeries>> {
    match cfg {
        ShortDetectorConfig::Spc(spc) => {
            Ok(series.iter().map(|s| detect::spc_score(s, spc)).collect())
        }
        ShortDetectorConfig::IsolationForest(iforest) => {
            if iforest.pooled {
                detect::if_score_pooled(series, iforest, seed)
            } else {
                series
                    .iter()
                    .map(|s| detect::if_score_per_station(s, iforest, seed))
                    .collect()
            }
        }
    }
}

fn optimize_on(
    scores: &[ScoreSeries],
    series: &[DifferenceSeries],
    strategy: ThresholdStrategy,
    objective: &[LengthCategory],
) -> Result<ThresholdOptimizationResult> {
    let labels: Vec<_> = series.iter().map(|s| s.carried_labels.clone()).collect();
    threshold::optimize_thresholds(scores, &labels, strategy, objective)
}

/// Residual indices of one station: points whose long prediction is 0.
fn residual_indices(long: &PredictionSeries) -> Vec<usize> {
    long.predictions
        .iter()
        .enumerate()
        .filter_map(|(i, &p)| (!p).then_some(i))
        .collect()
}

/// Optimizes the ensemble's thresholds on the given (training) stations.
pub fn fit_ensemble(
    config: &EnsembleConfig,
    train: &[DifferenceSeries],
    seed: u64,
) -> Result<EnsembleModel> {
    config.validate()?;
    if train.is_empty() {
        return Err(Error::Config("ensemble fit needs at least one station".into()));
    }
    let all = LengthCategory::ALL.to_vec();
    let (long_objective, short_objective) = match config.strategy {
        EnsembleStrategy::Naive => (all.clone(), all),
        _ => (config.long_categories.clone(), config.short_categories.clone()),
    };

    let long_scores: Vec<ScoreSeries> = train
        .iter()
        .map(|s| detect::binseg_score(s, &config.long_detector))
        .collect();
    let long_optimization = optimize_on(
        &long_scores,
        train,
        config.long_detector.threshold_strategy,
        &long_objective,
    )?;
    let long_thresholds = long_optimization.threshold_set;

    let short_strategy = config.short_detector.threshold_strategy();
    let (short_optimization, short_thresholds) = match config.strategy {
        EnsembleStrategy::Naive | EnsembleStrategy::Doc => {
            let short_scores = score_short(&config.short_detector, train, seed)?;
            let opt = optimize_on(&short_scores, train, short_strategy, &short_objective)?;
            (Some(opt), None)
        }
        EnsembleStrategy::Sequential => {
            // Residuals under the long stage's own optimized rule. Point
            // categories come from the full post-removal label runs and are
            // then restricted to the residual indices, so a partially
            // flagged long event keeps its true category.
            let mut residuals = Vec::new();
            let mut residual_classes = Vec::new();
            for (series, scores) in train.iter().zip(&long_scores) {
                let long_pred = threshold::threshold_scores(scores, &long_thresholds)?;
                let indices = residual_indices(&long_pred);
                if !indices.is_empty() {
                    let classes = crate::model::point_classes(&series.carried_labels);
                    residual_classes.push(
                        indices.iter().map(|&i| classes[i]).collect::<Vec<_>>(),
                    );
                    residuals.push(series.subset(&indices));
                }
            }
            if residuals.is_empty() {
                (None, None)
            } else {
                let short_scores = score_short(&config.short_detector, &residuals, seed)?;
                let polarity = short_scores[0].polarity;
                let mut points = Vec::new();
                for (scores, classes) in short_scores.iter().zip(&residual_classes) {
                    points.extend(scores.scores.iter().copied().zip(classes.iter().copied()));
                }
                match threshold::optimize_from_points(
                    &points,
                    polarity,
                    short_strategy,
                    &short_objective,
                ) {
                    Ok(opt) => (Some(opt), None),
                    // No short-category events survive the long stage: the
                    // short stage has nothing to learn from and is skipped.
                    Err(Error::UndefinedRecall) => (None, None),
                    Err(e) => return Err(e),
                }
            }
        }
    };
    let short_thresholds =
        short_thresholds.or_else(|| short_optimization.as_ref().map(|o| o.threshold_set));

    Ok(EnsembleModel {
        config: config.clone(),
        long_thresholds,
        short_thresholds,
        long_optimization,
        short_optimization,
    })
}

/// Applies a fitted ensemble to stations (typically a held-out split).
pub fn apply_ensemble(
    model: &EnsembleModel,
    series: &[DifferenceSeries],
    seed: u64,
) -> Result<Vec<PredictionSeries>> {
    let long_preds: Vec<PredictionSeries> = series
        .iter()
        .map(|s| {
            let scores = detect::binseg_score(s, &model.config.long_detector);
            threshold::threshold_scores(&scores, &model.long_thresholds)
        })
        .collect::<Result<_>>()?;

    let short_thresholds = match &model.short_thresholds {
        Some(t) => t,
        None => return Ok(long_preds),
    };

    match model.config.strategy {
        EnsembleStrategy::Naive | EnsembleStrategy::Doc => {
            let short_scores = score_short(&model.config.short_detector, series, seed)?;
            long_preds
                .iter()
                .zip(&short_scores)
                .map(|(long, scores)| {
                    let short = threshold::threshold_scores(scores, short_thresholds)?;
                    ensemble_naive(long, &short)
                })
                .collect()
        }
        EnsembleStrategy::Sequential => {
            // Short stage sees only the residual points; its positives are
            // mapped back to original indices and unioned with the long
            // stage's.
            let mut residuals = Vec::new();
            let mut residual_index_sets = Vec::new();
            let mut owners = Vec::new();
            for (station, long) in series.iter().zip(&long_preds) {
                let indices = residual_indices(long);
                if !indices.is_empty() {
                    residuals.push(station.subset(&indices));
                    residual_index_sets.push(indices);
                    owners.push(station.station_id.clone());
                }
            }
            let mut combined = long_preds;
            if !residuals.is_empty() {
                let short_scores = score_short(&model.config.short_detector, &residuals, seed)?;
                for ((scores, indices), owner) in
                    short_scores.iter().zip(&residual_index_sets).zip(&owners)
                {
                    let short = threshold::threshold_scores(scores, short_thresholds)?;
                    let target = combined
                        .iter_mut()
                        .find(|p| p.station_id == *owner)
                        .expect("owner present");
                    for (&original_index, &flag) in indices.iter().zip(&short.predictions) {
                        if flag {
                            target.predictions[original_index] = true;
                        }
                    }
                }
            }
            Ok(combined)
        }
    }
}

/// Fits on `series` and applies to the same stations (the transductive
/// convenience used by desk-scale fixtures).
pub fn ensemble_transductive(
    config: &EnsembleConfig,
    series: &[DifferenceSeries],
    seed: u64,
) -> Result<(EnsembleModel, Vec<PredictionSeries>)> {
    let model = fit_ensemble(config, series, seed)?;
    let preds = apply_ensemble(&model, series, seed)?;
    Ok((model, preds))
}
