//! `split`: stratified train/validation/test assignment plus a per-split
//! tally of events and label-1 counts by length category.

use loadseg::ingest::{split_tally, stratified_split, Split};

use crate::config::RunConfig;
use crate::util::{atomic_write, load_stations, CliResult};

pub fn run(config: &RunConfig) -> CliResult<()> {
    let stations = load_stations(&config.paths.data_dir)?;
    let assignment = stratified_split(&stations, config.seed);

    let mut csv = String::from("station_id,split\n");
    for (id, split) in &assignment.map {
        csv.push_str(&format!("{},{}\n", id, split.as_str()));
    }
    let split_file = config.paths.split_file();
    atomic_write(&split_file, csv.as_bytes())?;

    let tally = split_tally(&stations, &assignment);
    println!("split written to {}", split_file.display());
    println!(
        "{:<12} {:>8}  {:>6} {:>6} {:>6} {:>6}  {:>8} {:>8} {:>8} {:>8}",
        "split", "stations", "C1 ev", "C2 ev", "C3 ev", "C4 ev", "C1 lbl1", "C2 lbl1", "C3 lbl1",
        "C4 lbl1"
    );
    for (i, split) in Split::ALL.iter().enumerate() {
        let ev = tally.event_counts[i];
        let l1 = tally.label1_counts[i];
        println!(
            "{:<12} {:>8}  {:>6} {:>6} {:>6} {:>6}  {:>8} {:>8} {:>8} {:>8}",
            split.as_str(),
            tally.split_sizes[i],
            ev[0],
            ev[1],
            ev[2],
            ev[3],
            l1[0],
            l1[1],
            l1[2],
            l1[3]
        );
    }
    Ok(())
}
