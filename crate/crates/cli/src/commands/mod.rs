pub mod annotate;
pub mod estimate;
pub mod evaluate;
pub mod generate;
pub mod optimize;
pub mod preprocess;
pub mod split;

/// ISO-8601 without zone, matching the station CSV schema.
pub const TIMESTAMP_FMT: &str = "%Y-%m-%dT%H:%M:%S";
