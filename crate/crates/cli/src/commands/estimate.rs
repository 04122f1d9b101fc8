//! `estimate-loads`: per-station min/max load estimates under every filter
//! (ground truth, model predictions, none), written as one CSV, with
//! error-fraction summaries printed when ground truth is available.

use loadseg::loadest::{estimate_errors, load_estimate, FilterMask, LoadEstimate};
use loadseg::model::DifferenceSeries;
use loadseg::modelfile::ModelFile;

use crate::commands::annotate::{apply_method, estimate_csv_row, resolve_method};
use crate::config::RunConfig;
use crate::util::{atomic_write, load_stations, preprocess_all, CliError, CliResult};

pub fn run(config: &RunConfig, requested_method: Option<&str>) -> CliResult<()> {
    let stations = load_stations(&config.paths.data_dir)?;
    let outcomes = preprocess_all(&stations, &config.preprocess)?;
    let series: Vec<DifferenceSeries> = outcomes.into_iter().map(|o| o.series).collect();

    let model_path = config.paths.model_file();
    let model_file = ModelFile::read(&model_path)
        .map_err(|e| CliError::Data(format!("{}: {e}", model_path.display())))?;
    let (name, method) = resolve_method(&model_file, requested_method)?;
    let predictions = apply_method(method, &series, model_file.seed)?;

    let mut csv = String::from("station_id,source,max_load,min_load\n");
    let mut truth: Vec<LoadEstimate> = Vec::new();
    let mut filtered: Vec<LoadEstimate> = Vec::new();
    let mut unfiltered: Vec<LoadEstimate> = Vec::new();
    for (s, pred) in series.iter().zip(&predictions) {
        let mut complete = true;
        let mut push = |estimate: Result<LoadEstimate, loadseg::Error>,
                        sink: &mut Vec<LoadEstimate>,
                        csv: &mut String|
         -> CliResult<()> {
            match estimate {
                Ok(e) => {
                    csv.push_str(&estimate_csv_row(&e));
                    sink.push(e);
                }
                Err(loadseg::Error::FullyFiltered { .. }) => complete = false,
                Err(e) => return Err(CliError::from(e)),
            }
            Ok(())
        };
        let mut t = Vec::new();
        let mut f = Vec::new();
        let mut u = Vec::new();
        push(load_estimate(s, &FilterMask::GroundTruth), &mut t, &mut csv)?;
        push(load_estimate(s, &FilterMask::Predictions(pred)), &mut f, &mut csv)?;
        push(load_estimate(s, &FilterMask::None), &mut u, &mut csv)?;
        // The error summary needs all three estimates of a station; partial
        // stations still appear in the CSV.
        if complete {
            truth.extend(t);
            filtered.extend(f);
            unfiltered.extend(u);
        }
    }
    let out_path = config.paths.output_dir.join("estimates.csv");
    atomic_write(&out_path, csv.as_bytes())?;
    println!(
        "estimates for {} stations (method {name}) written to {}",
        series.len(),
        out_path.display()
    );

    if !truth.is_empty() {
        let filtered_errors = estimate_errors(&truth, &filtered).map_err(CliError::from)?;
        let unfiltered_errors = estimate_errors(&truth, &unfiltered).map_err(CliError::from)?;
        for (label, table) in [("filtered", filtered_errors), ("unfiltered", unfiltered_errors)] {
            if let Some(s) = table.max_summary {
                println!(
                    "{label} max: {:.1}% within 10% ({:.1}% exact, {} stations)",
                    100.0 * s.fraction_within_10pct,
                    100.0 * s.fraction_exact,
                    s.stations
                );
            }
            if let Some(s) = table.min_summary {
                println!(
                    "{label} min: {:.1}% within 10% ({:.1}% exact, {} stations)",
                    100.0 * s.fraction_within_10pct,
                    100.0 * s.fraction_exact,
                    s.stations
                );
            }
        }
    }
    Ok(())
}
