//! `optimize`: scan the hyperparameter grid, fitting thresholds on the train
//! split and scoring each candidate on the validation split; the best
//! candidate per method family is written to the model file.
//!
//! Ensembles are composed from the selected best binseg configuration and
//! the best short detector (SPC or isolation forest); scanning the full
//! cross product of component grids is combinatorially infeasible.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use loadseg::ensemble::{
    fit_ensemble, apply_ensemble, EnsembleConfig, EnsembleStrategy, ShortDetectorConfig,
};
use loadseg::evaluate::dataset_metrics;
use loadseg::model::{DetectorConfig, DifferenceSeries, Label, LengthCategory};
use loadseg::modelfile::{MethodModel, ModelFile};
use loadseg::pipeline::{apply_single, fit_single};

use crate::config::RunConfig;
use crate::util::{
    atomic_write, load_stations, partition_by_split, preprocess_all, CliError, CliResult,
};

pub fn strategy_name(strategy: EnsembleStrategy) -> &'static str {
    match strategy {
        EnsembleStrategy::Naive => "naive",
        EnsembleStrategy::Doc => "doc",
        EnsembleStrategy::Sequential => "sequential",
    }
}

#[derive(Serialize)]
struct Selection {
    validation_average_f: f64,
    candidates_tried: usize,
    candidates_skipped: usize,
}

/// True for failures that disqualify one candidate without aborting the
/// scan: no positive labels in the candidate's objective.
fn skippable(e: &loadseg::Error) -> bool {
    matches!(
        e,
        loadseg::Error::UndefinedRecall | loadseg::Error::NoPositives
    )
}

fn validation_score(
    predictions: &[loadseg::PredictionSeries],
    validation: &[DifferenceSeries],
) -> Result<f64, loadseg::Error> {
    let pairs: Vec<(&[Label], &[bool])> = validation
        .iter()
        .zip(predictions)
        .map(|(s, p)| (s.carried_labels.as_slice(), p.predictions.as_slice()))
        .collect();
    Ok(dataset_metrics(&pairs)?.average_f)
}

/// Scans one family's candidates; returns the winner (grid order breaks
/// ties) with its validation score, or `None` when every candidate was
/// skipped.
fn scan_family(
    candidates: &[DetectorConfig],
    train: &[DifferenceSeries],
    validation: &[DifferenceSeries],
    seed: u64,
) -> CliResult<Option<(loadseg::pipeline::SingleModel, Selection)>> {
    let scored: Vec<Option<(loadseg::pipeline::SingleModel, f64)>> = candidates
        .par_iter()
        .map(|config| {
            let attempt = || -> Result<_, loadseg::Error> {
                let model = fit_single(config, train, seed, &LengthCategory::ALL)?;
                let preds = apply_single(&model, validation, seed)?;
                let score = validation_score(&preds, validation)?;
                Ok((model, score))
            };
            match attempt() {
                Ok(hit) => Ok(Some(hit)),
                Err(e) if skippable(&e) => Ok(None),
                Err(e) => Err(CliError::from(e)),
            }
        })
        .collect::<CliResult<_>>()?;

    let tried = scored.len();
    let skipped = scored.iter().filter(|s| s.is_none()).count();
    let best = scored
        .into_iter()
        .flatten()
        .reduce(|best, next| if next.1 > best.1 { next } else { best });
    Ok(best.map(|(model, score)| {
        (
            model,
            Selection {
                validation_average_f: score,
                candidates_tried: tried,
                candidates_skipped: skipped,
            },
        )
    }))
}

pub fn run(config: &RunConfig) -> CliResult<()> {
    let stations = load_stations(&config.paths.data_dir)?;
    let outcomes = preprocess_all(&stations, &config.preprocess)?;
    let series: Vec<DifferenceSeries> = outcomes.into_iter().map(|o| o.series).collect();
    let [train, validation, _test] = partition_by_split(series, &config.paths.split_file())?;
    if train.is_empty() || validation.is_empty() {
        return Err(CliError::Data(
            "train and validation splits must both be nonempty".into(),
        ));
    }

    let grid = &config.grid;
    let families: Vec<(&str, Vec<DetectorConfig>)> = vec![
        (
            "spc",
            grid.spc_configs().into_iter().map(DetectorConfig::Spc).collect(),
        ),
        (
            "if_per_station",
            grid.if_per_station_configs()
                .into_iter()
                .map(DetectorConfig::IsolationForest)
                .collect(),
        ),
        (
            "if_pooled",
            grid.if_pooled_configs()
                .into_iter()
                .map(DetectorConfig::IsolationForest)
                .collect(),
        ),
        (
            "bs",
            grid.bs_configs().into_iter().map(DetectorConfig::Binseg).collect(),
        ),
    ];

    let mut model_file = ModelFile::new(config.seed);
    let mut selections: BTreeMap<String, Selection> = BTreeMap::new();
    for (family, candidates) in families {
        if candidates.is_empty() {
            continue;
        }
        match scan_family(&candidates, &train, &validation, config.seed)? {
            Some((model, selection)) => {
                println!(
                    "{family}: validation F = {:.4} ({} candidates, {} skipped)",
                    selection.validation_average_f,
                    selection.candidates_tried,
                    selection.candidates_skipped
                );
                selections.insert(family.to_string(), selection);
                model_file
                    .methods
                    .insert(family.to_string(), MethodModel::Single(model));
            }
            None => eprintln!("warning: every {family} candidate was skipped"),
        }
    }

    // Compose ensembles from the selected binseg and the better of the
    // selected short detectors.
    let best_bs = model_file.methods.get("bs").cloned();
    let best_short = ["spc", "if_per_station", "if_pooled"]
        .iter()
        .filter_map(|f| {
            let score = selections.get(*f)?.validation_average_f;
            Some((*f, score))
        })
        .reduce(|best, next| if next.1 > best.1 { next } else { best });
    if let (Some(MethodModel::Single(bs)), Some((short_family, _))) = (best_bs, best_short) {
        let DetectorConfig::Binseg(long) = bs.detector else {
            unreachable!("bs family holds binseg configs");
        };
        let short = match model_file.methods.get(short_family) {
            Some(MethodModel::Single(m)) => match m.detector {
                DetectorConfig::Spc(c) => ShortDetectorConfig::Spc(c),
                DetectorConfig::IsolationForest(c) => ShortDetectorConfig::IsolationForest(c),
                DetectorConfig::Binseg(_) => unreachable!("short families are SPC/IF"),
            },
            _ => unreachable!("selected family is present"),
        };
        for &strategy in &grid.ensembles {
            let ensemble_config = EnsembleConfig::new(strategy, long, short);
            let name = format!("ensemble_{}", strategy_name(strategy));
            let attempt = || -> Result<_, loadseg::Error> {
                let model = fit_ensemble(&ensemble_config, &train, config.seed)?;
                let preds = apply_ensemble(&model, &validation, config.seed)?;
                let score = validation_score(&preds, &validation)?;
                Ok((model, score))
            };
            match attempt() {
                Ok((model, score)) => {
                    println!("{name}: validation F = {score:.4}");
                    selections.insert(
                        name.clone(),
                        Selection {
                            validation_average_f: score,
                            candidates_tried: 1,
                            candidates_skipped: 0,
                        },
                    );
                    model_file.methods.insert(name, MethodModel::Ensemble(model));
                }
                Err(e) if skippable(&e) => {
                    eprintln!("warning: {name} skipped: {e}");
                }
                Err(e) => return Err(CliError::from(e)),
            }
        }
    }

    if model_file.methods.is_empty() {
        return Err(CliError::Optimization(
            "no method produced a model on the train split".into(),
        ));
    }

    let model_path = config.paths.model_file();
    model_file.write(&model_path).map_err(CliError::from)?;
    let selection_json = serde_json::to_string_pretty(&selections)
        .map_err(|e| CliError::Data(e.to_string()))?;
    atomic_write(
        &config.paths.output_dir.join("selection.json"),
        selection_json.as_bytes(),
    )?;
    println!("model written to {}", model_path.display());
    Ok(())
}
