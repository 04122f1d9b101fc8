//! Error-to-exit-code mapping, atomic file writes, and shared data loading.

use std::fmt;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use loadseg::ingest::{load_station, Split, SplitAssignment};
use loadseg::model::{DifferenceSeries, StationSeries};
use loadseg::preprocess::{preprocess, PreprocessConfig, PreprocessOutcome};

/// CLI failure classes; the numeric value is the process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad configuration or flags (exit 2).
    Config(String),
    /// Missing or malformed input data (exit 3).
    Data(String),
    /// Threshold optimization could not produce a model (exit 4).
    Optimization(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Optimization(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Data(m) => write!(f, "data error: {m}"),
            CliError::Optimization(m) => write!(f, "optimization error: {m}"),
        }
    }
}

impl From<loadseg::Error> for CliError {
    fn from(e: loadseg::Error) -> CliError {
        match e {
            loadseg::Error::Config(_) => CliError::Config(e.to_string()),
            loadseg::Error::UndefinedRecall | loadseg::Error::NoPositives => {
                CliError::Optimization(e.to_string())
            }
            other => CliError::Data(other.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Writes `bytes` via a temp file in the same directory plus rename, so a
/// concurrent reader never observes a partial file.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> CliResult<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)
            .map_err(|e| CliError::Data(format!("{}: {e}", parent.display())))?;
    }
    let file_name = path
        .file_name()
        .ok_or_else(|| CliError::Config(format!("{}: not a file path", path.display())))?;
    let tmp = path.with_file_name(format!("{}.tmp", file_name.to_string_lossy()));
    let write = |p: &Path| -> std::io::Result<()> {
        let mut f = fs::File::create(p)?;
        f.write_all(bytes)?;
        f.flush()
    };
    write(&tmp).map_err(|e| CliError::Data(format!("{}: {e}", tmp.display())))?;
    fs::rename(&tmp, path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    Ok(())
}

/// Loads every `*.csv` in the data directory, sorted by file name for
/// deterministic ordering.
pub fn load_stations(data_dir: &Path) -> CliResult<Vec<StationSeries>> {
    let entries = fs::read_dir(data_dir)
        .map_err(|e| CliError::Data(format!("{}: {e}", data_dir.display())))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|ext| ext == "csv"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(CliError::Data(format!(
            "no station CSVs in {}",
            data_dir.display()
        )));
    }
    paths
        .par_iter()
        .map(|p| load_station(p).map_err(CliError::from))
        .collect()
}

/// Preprocesses every station in parallel, preserving order.
pub fn preprocess_all(
    stations: &[StationSeries],
    cfg: &PreprocessConfig,
) -> CliResult<Vec<PreprocessOutcome>> {
    stations
        .par_iter()
        .map(|s| preprocess(s, cfg).map_err(CliError::from))
        .collect()
}

/// Reads the split file and partitions preprocessed series accordingly.
/// Every station must be assigned.
pub fn partition_by_split(
    series: Vec<DifferenceSeries>,
    split_file: &Path,
) -> CliResult<[Vec<DifferenceSeries>; 3]> {
    let assignment = SplitAssignment::read_csv(split_file)
        .map_err(|e| CliError::Data(format!("{}: {e}", split_file.display())))?;
    let mut parts: [Vec<DifferenceSeries>; 3] = Default::default();
    for s in series {
        let split = assignment.map.get(&s.station_id).ok_or_else(|| {
            CliError::Data(format!(
                "station {} is missing from {}",
                s.station_id,
                split_file.display()
            ))
        })?;
        let index = Split::ALL.iter().position(|x| x == split).unwrap();
        parts[index].push(s);
    }
    Ok(parts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_replaces_content() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.json");
        atomic_write(&path, b"one").unwrap();
        atomic_write(&path, b"two").unwrap();
        assert_eq!(fs::read(&path).unwrap(), b"two");
        assert!(!path.with_file_name("x.json.tmp").exists());
    }

    #[test]
    fn exit_codes_by_class() {
        assert_eq!(CliError::Config("x".into()).exit_code(), 2);
        assert_eq!(CliError::Data("x".into()).exit_code(), 3);
        assert_eq!(CliError::Optimization("x".into()).exit_code(), 4);
        assert_eq!(CliError::from(loadseg::Error::UndefinedRecall).exit_code(), 4);
        assert_eq!(
            CliError::from(loadseg::Error::Config("bad".into())).exit_code(),
            2
        );
    }
}
