//! `annotate`: apply one stored method to stations, emitting per-station
//! `timestamp,delta,prediction` CSVs plus the resulting load estimates. No
//! labels are consulted, so this is the production (unlabeled) path.

use rayon::prelude::*;

use loadseg::ensemble::apply_ensemble;
use loadseg::loadest::{load_estimate, FilterMask, LoadEstimate};
use loadseg::model::DifferenceSeries;
use loadseg::modelfile::{MethodModel, ModelFile};
use loadseg::pipeline::apply_single;
use loadseg::PredictionSeries;

use crate::commands::TIMESTAMP_FMT;
use crate::config::RunConfig;
use crate::util::{atomic_write, load_stations, preprocess_all, CliError, CliResult};

/// Picks the requested method, defaulting to the sequential ensemble when
/// present and otherwise the alphabetically first method.
pub fn resolve_method<'a>(
    file: &'a ModelFile,
    requested: Option<&str>,
) -> CliResult<(&'a str, &'a MethodModel)> {
    match requested {
        Some(name) => file
            .methods
            .get_key_value(name)
            .map(|(k, v)| (k.as_str(), v))
            .ok_or_else(|| {
                CliError::Config(format!(
                    "method {name:?} not in the model file (available: {})",
                    file.methods.keys().cloned().collect::<Vec<_>>().join(", ")
                ))
            }),
        None => file
            .methods
            .get_key_value("ensemble_sequential")
            .or_else(|| file.methods.iter().next())
            .map(|(k, v)| (k.as_str(), v))
            .ok_or_else(|| CliError::Data("model file holds no methods".into())),
    }
}

pub fn apply_method(
    method: &MethodModel,
    series: &[DifferenceSeries],
    seed: u64,
) -> CliResult<Vec<PredictionSeries>> {
    match method {
        MethodModel::Single(m) => apply_single(m, series, seed).map_err(CliError::from),
        MethodModel::Ensemble(m) => apply_ensemble(m, series, seed).map_err(CliError::from),
    }
}

pub fn estimate_csv_row(estimate: &LoadEstimate) -> String {
    let source = match estimate.source {
        loadseg::loadest::EstimateSource::GroundTruthFiltered => "ground_truth_filtered",
        loadseg::loadest::EstimateSource::PredictionFiltered => "prediction_filtered",
        loadseg::loadest::EstimateSource::Unfiltered => "unfiltered",
    };
    let min = estimate
        .min_load
        .map(|m| m.to_string())
        .unwrap_or_default();
    format!(
        "{},{},{},{}\n",
        estimate.station_id, source, estimate.max_load, min
    )
}

pub fn run(config: &RunConfig, requested_method: Option<&str>) -> CliResult<()> {
    let stations = load_stations(&config.paths.data_dir)?;
    let outcomes = preprocess_all(&stations, &config.preprocess)?;
    let series: Vec<DifferenceSeries> = outcomes.into_iter().map(|o| o.series).collect();

    let model_path = config.paths.model_file();
    let model_file = ModelFile::read(&model_path)
        .map_err(|e| CliError::Data(format!("{}: {e}", model_path.display())))?;
    let (name, method) = resolve_method(&model_file, requested_method)?;
    let predictions = apply_method(method, &series, model_file.seed)?;

    let annotated_dir = config.paths.output_dir.join("annotated");
    series
        .par_iter()
        .zip(&predictions)
        .map(|(s, pred)| {
            let mut csv = String::from("timestamp,delta,prediction\n");
            for i in 0..s.len() {
                csv.push_str(&format!(
                    "{},{},{}\n",
                    s.timestamps[i].format(TIMESTAMP_FMT),
                    s.delta[i],
                    u8::from(pred.predictions[i])
                ));
            }
            atomic_write(
                &annotated_dir.join(format!("{}.csv", s.station_id)),
                csv.as_bytes(),
            )
        })
        .collect::<CliResult<Vec<()>>>()?;

    let mut estimates = String::from("station_id,source,max_load,min_load\n");
    for (s, pred) in series.iter().zip(&predictions) {
        match load_estimate(s, &FilterMask::Predictions(pred)) {
            Ok(estimate) => estimates.push_str(&estimate_csv_row(&estimate)),
            Err(loadseg::Error::FullyFiltered { station_id }) => {
                eprintln!("warning: {station_id}: every point flagged, no estimate")
            }
            Err(e) => return Err(CliError::from(e)),
        }
        estimates.push_str(&estimate_csv_row(
            &load_estimate(s, &FilterMask::None).map_err(CliError::from)?,
        ));
    }
    atomic_write(&annotated_dir.join("estimates.csv"), estimates.as_bytes())?;

    println!(
        "annotated {} stations with method {name} into {}",
        series.len(),
        annotated_dir.display()
    );
    Ok(())
}
