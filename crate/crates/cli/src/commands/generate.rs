//! `generate`: write synthetic station CSVs plus a manifest recording the
//! seed and the injected-event inventory of every station.

use rayon::prelude::*;
use serde::Serialize;

use loadseg::ingest::{generate_synthetic, write_station};
use loadseg::model::{event_runs, Label, LengthCategory};

use crate::config::RunConfig;
use crate::util::{atomic_write, CliError, CliResult};

#[derive(Serialize)]
struct ManifestEvent {
    start: usize,
    len: usize,
    category: LengthCategory,
}

#[derive(Serialize)]
struct ManifestStation {
    station_id: String,
    seed: u64,
    n_points: usize,
    event_counts: [usize; 4],
    events: Vec<ManifestEvent>,
}

#[derive(Serialize)]
struct Manifest {
    base_seed: u64,
    stations: Vec<ManifestStation>,
}

pub fn run(config: &RunConfig) -> CliResult<()> {
    let gen = config.generate.as_ref().ok_or_else(|| {
        CliError::Config("generate requires a [generate] section in the config".into())
    })?;
    if gen.count == 0 {
        return Err(CliError::Config("generate.count must be positive".into()));
    }
    std::fs::create_dir_all(&config.paths.data_dir)
        .map_err(|e| CliError::Data(format!("{}: {e}", config.paths.data_dir.display())))?;

    let stations: Vec<ManifestStation> = (0..gen.count)
        .into_par_iter()
        .map(|i| {
            let station_id = format!("st{i:04}");
            let seed = gen.base_seed + i as u64;
            let station = generate_synthetic(&gen.spec, &station_id, seed)?;
            // Atomic: write to a temp name, then rename into place.
            let path = config.paths.data_dir.join(format!("{station_id}.csv"));
            let tmp = config.paths.data_dir.join(format!("{station_id}.csv.tmp"));
            write_station(&tmp, &station)?;
            std::fs::rename(&tmp, &path)?;
            let mut event_counts = [0usize; 4];
            let events: Vec<ManifestEvent> = event_runs(&station.labels, Label::Event)
                .into_iter()
                .map(|run| {
                    event_counts[run.category.index()] += 1;
                    ManifestEvent {
                        start: run.start,
                        len: run.len,
                        category: run.category,
                    }
                })
                .collect();
            Ok(ManifestStation {
                station_id,
                seed,
                n_points: station.len(),
                event_counts,
                events,
            })
        })
        .collect::<Result<_, loadseg::Error>>()
        .map_err(CliError::from)?;

    let manifest = Manifest {
        base_seed: gen.base_seed,
        stations,
    };
    let json = serde_json::to_string_pretty(&manifest)
        .map_err(|e| CliError::Data(e.to_string()))?;
    atomic_write(&config.paths.output_dir.join("manifest.json"), json.as_bytes())?;
    println!(
        "generated {} stations into {}",
        gen.count,
        config.paths.data_dir.display()
    );
    Ok(())
}
