//! Segmentation and filtering of power-grid load measurements.
//!
//! Year-long primary-substation load series are contaminated by measurement
//! anomalies and switch events (temporary rerouting between substations).
//! This crate detects those regions on the difference between the measured
//! apparent power and a rescaled bottom-up load estimate, then derives
//! filtered minimum/maximum load estimates from the remaining points.
//!
//! The pipeline is:
//!
//! 1. [`ingest`]: read station CSVs (or generate synthetic stations) and
//!    produce a stratified train/validation/test split.
//! 2. [`preprocess`]: drop missing/repeated measurements, fit the bottom-up
//!    load onto the measurement, correct signs, and emit the difference
//!    series delta.
//! 3. [`detect`]: score each point with statistical process control, an
//!    isolation forest (per-station or pooled), or binary segmentation.
//! 4. [`threshold`] / [`ensemble`]: turn scores into binary predictions via
//!    one- or two-sided thresholds optimized for the category-averaged F1.5,
//!    optionally combining a long-event and a short-event detector.
//! 5. [`evaluate`]: length-stratified precision/recall/F1.5, AUC, and
//!    station bootstrap.
//! 6. [`loadest`]: filtered min/max load estimates and their error table.

pub mod detect;
pub mod ensemble;
pub mod error;
pub mod evaluate;
pub mod ingest;
pub mod loadest;
pub mod model;
pub mod modelfile;
pub mod pipeline;
pub mod preprocess;
pub mod stats;
pub mod threshold;

pub use error::{Error, Result};
pub use model::{
    BinsegConfig, DetectorConfig, DifferenceSeries, IfConfig, Label, LengthCategory, Polarity,
    PredictionSeries, ScoreSeries, SpcConfig, StationSeries, ThresholdSet, ThresholdStrategy,
};
