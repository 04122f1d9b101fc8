//! `preprocess`: emit per-station difference CSVs
//! (`timestamp,delta,s_signed,label`) with a JSON sidecar holding the fit.

use rayon::prelude::*;
use serde_json::json;

use crate::commands::TIMESTAMP_FMT;
use crate::config::RunConfig;
use crate::util::{atomic_write, load_stations, preprocess_all, CliResult};

pub fn run(config: &RunConfig) -> CliResult<()> {
    let stations = load_stations(&config.paths.data_dir)?;
    let outcomes = preprocess_all(&stations, &config.preprocess)?;
    let delta_dir = config.paths.output_dir.join("delta");

    outcomes
        .par_iter()
        .map(|outcome| {
            let series = &outcome.series;
            let mut csv = String::from("timestamp,delta,s_signed,label\n");
            for i in 0..series.len() {
                csv.push_str(&format!(
                    "{},{},{},{}\n",
                    series.timestamps[i].format(TIMESTAMP_FMT),
                    series.delta[i],
                    series.carried_s[i],
                    series.carried_labels[i].code()
                ));
            }
            atomic_write(
                &delta_dir.join(format!("{}.csv", series.station_id)),
                csv.as_bytes(),
            )?;
            let sidecar = json!({
                "m": outcome.fit.m,
                "c": outcome.fit.c,
                "sign_corrected": outcome.sign_corrected,
                "removed_count": outcome.removed_count,
            });
            atomic_write(
                &delta_dir.join(format!("{}.json", series.station_id)),
                serde_json::to_string_pretty(&sidecar).unwrap().as_bytes(),
            )
        })
        .collect::<CliResult<Vec<()>>>()?;

    println!(
        "preprocessed {} stations into {}",
        outcomes.len(),
        delta_dir.display()
    );
    Ok(())
}
