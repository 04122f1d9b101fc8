//! Filtered minimum/maximum load estimates and their error statistics.
//!
//! The estimate of a station is the extreme of the signed measurement over
//! the points a filter left in: ground-truth filtering keeps label-0 points,
//! prediction filtering keeps prediction-0 points, and the unfiltered
//! baseline keeps everything. The minimum is only reported for stations
//! whose signed measurements ever go negative.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DifferenceSeries, Label, PredictionSeries};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateSource {
    GroundTruthFiltered,
    PredictionFiltered,
    Unfiltered,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoadEstimate {
    pub station_id: String,
    pub max_load: f64,
    /// Absent when the station has no negative signed measurement.
    pub min_load: Option<f64>,
    pub source: EstimateSource,
}

/// What to exclude before taking the extremes.
#[derive(Debug, Clone)]
pub enum FilterMask<'a> {
    /// Keep every point.
    None,
    /// Keep label-0 points (labels 1 and 5 excluded).
    GroundTruth,
    /// Keep prediction-0 points.
    Predictions(&'a PredictionSeries),
}

/// Min/max of the signed measurement over the unmasked points.
pub fn load_estimate(series: &DifferenceSeries, mask: &FilterMask) -> Result<LoadEstimate> {
    let keep: Box<dyn Fn(usize) -> bool> = match mask {
        FilterMask::None => Box::new(|_| true),
        FilterMask::GroundTruth => {
            Box::new(|i| series.carried_labels[i] == Label::Normal)
        }
        FilterMask::Predictions(preds) => {
            if preds.len() != series.len() {
                return Err(Error::LengthMismatch {
                    expected: series.len(),
                    got: preds.len(),
                });
            }
            let predictions = &preds.predictions;
            Box::new(move |i| !predictions[i])
        }
    };
    let mut max_load = f64::NEG_INFINITY;
    let mut min_load = f64::INFINITY;
    let mut any = false;
    for (i, &s) in series.carried_s.iter().enumerate() {
        if keep(i) {
            any = true;
            max_load = max_load.max(s);
            min_load = min_load.min(s);
        }
    }
    if !any {
        return Err(Error::FullyFiltered {
            station_id: series.station_id.clone(),
        });
    }
    let sign_seen = series.carried_s.iter().any(|&s| s < 0.0);
    Ok(LoadEstimate {
        station_id: series.station_id.clone(),
        max_load,
        min_load: sign_seen.then_some(min_load),
        source: match mask {
            FilterMask::None => EstimateSource::Unfiltered,
            FilterMask::GroundTruth => EstimateSource::GroundTruthFiltered,
            FilterMask::Predictions(_) => EstimateSource::PredictionFiltered,
        },
    })
}

/// Per-station relative error of one bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateErrorRow {
    pub station_id: String,
    pub truth: f64,
    pub predicted: f64,
    /// (predicted - truth) / |truth|; `None` when truth is 0.
    pub relative_error: Option<f64>,
}

/// Aggregate over the stations where the relative error is defined.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorSummary {
    pub stations: usize,
    /// Stations excluded because the truth value is exactly 0.
    pub undefined: usize,
    /// |relative error| <= 1e-9.
    pub fraction_exact: f64,
    /// |relative error| <= 0.10.
    pub fraction_within_10pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateErrorTable {
    pub max_rows: Vec<EstimateErrorRow>,
    pub min_rows: Vec<EstimateErrorRow>,
    pub max_summary: Option<ErrorSummary>,
    pub min_summary: Option<ErrorSummary>,
}

const EXACT_TOLERANCE: f64 = 1e-9;

fn summarize(rows: &[EstimateErrorRow]) -> Option<ErrorSummary> {
    if rows.is_empty() {
        return None;
    }
    let defined: Vec<f64> = rows.iter().filter_map(|r| r.relative_error).collect();
    let undefined = rows.len() - defined.len();
    if defined.is_empty() {
        return Some(ErrorSummary {
            stations: rows.len(),
            undefined,
            fraction_exact: 0.0,
            fraction_within_10pct: 0.0,
        });
    }
    let n = defined.len() as f64;
    let exact = defined.iter().filter(|e| e.abs() <= EXACT_TOLERANCE).count() as f64;
    let within = defined.iter().filter(|e| e.abs() <= 0.10).count() as f64;
    Some(ErrorSummary {
        stations: rows.len(),
        undefined,
        fraction_exact: exact / n,
        fraction_within_10pct: within / n,
    })
}

fn error_row(station_id: &str, truth: f64, predicted: f64) -> EstimateErrorRow {
    EstimateErrorRow {
        station_id: station_id.into(),
        truth,
        predicted,
        relative_error: (truth != 0.0).then(|| (predicted - truth) / truth.abs()),
    }
}

/// Compares predicted estimates against ground-truth estimates, station by
/// station. Both lists must cover the same stations (any order).
pub fn estimate_errors(
    truth: &[LoadEstimate],
    predicted: &[LoadEstimate],
) -> Result<EstimateErrorTable> {
    if truth.len() != predicted.len() {
        return Err(Error::LengthMismatch {
            expected: truth.len(),
            got: predicted.len(),
        });
    }
    let mut max_rows = Vec::new();
    let mut min_rows = Vec::new();
    for t in truth {
        let p = predicted
            .iter()
            .find(|p| p.station_id == t.station_id)
            .ok_or_else(|| Error::Schema {
                path: t.station_id.clone(),
                message: "station missing from predicted estimates".into(),
            })?;
        max_rows.push(error_row(&t.station_id, t.max_load, p.max_load));
        if let (Some(tm), Some(pm)) = (t.min_load, p.min_load) {
            min_rows.push(error_row(&t.station_id, tm, pm));
        }
    }
    let max_summary = summarize(&max_rows);
    let min_summary = summarize(&min_rows);
    Ok(EstimateErrorTable {
        max_rows,
        min_rows,
        max_summary,
        min_summary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;

    fn series(id: &str, s: Vec<f64>, label_codes: &[i64]) -> DifferenceSeries {
        let n = s.len();
        let start = NaiveDate::from_ymd_opt(2021, 1, 1)
            .unwrap()
            .and_hms_opt(0, 0, 0)
            .unwrap();
        DifferenceSeries {
            station_id: id.into(),
            timestamps: (0..n)
                .map(|i| start + chrono::Duration::minutes(15 * i as i64))
                .collect(),
            delta: vec![0.0; n],
            carried_labels: label_codes
                .iter()
                .map(|&c| Label::from_code(c).unwrap())
                .collect(),
            carried_s: s,
        }
    }

    #[test]
    fn unmasked_extremes() {
        let s = series("a", vec![-5.0, 2.0, 10.0, 0.0], &[0, 0, 0, 0]);
        let e = load_estimate(&s, &FilterMask::None).unwrap();
        assert_eq!(e.max_load, 10.0);
        assert_eq!(e.min_load, Some(-5.0));
        assert_eq!(e.source, EstimateSource::Unfiltered);
    }

    #[test]
    fn ground_truth_filter_excludes_events_and_uncertain() {
        let s = series("a", vec![1.0, 100.0, 5.0, 200.0], &[0, 1, 0, 5]);
        let e = load_estimate(&s, &FilterMask::GroundTruth).unwrap();
        assert_eq!(e.max_load, 5.0);
    }

    #[test]
    fn all_positive_station_has_no_min() {
        let s = series("a", vec![1.0, 2.0, 3.0], &[0, 0, 0]);
        let e = load_estimate(&s, &FilterMask::None).unwrap();
        assert_eq!(e.min_load, None);
    }

    #[test]
    fn prediction_filter_and_full_filtering() {
        let s = series("a", vec![1.0, 50.0], &[0, 0]);
        let preds = PredictionSeries {
            station_id: "a".into(),
            predictions: vec![false, true],
        };
        let e = load_estimate(&s, &FilterMask::Predictions(&preds)).unwrap();
        assert_eq!(e.max_load, 1.0);
        let all = PredictionSeries {
            station_id: "a".into(),
            predictions: vec![true, true],
        };
        assert!(matches!(
            load_estimate(&s, &FilterMask::Predictions(&all)),
            Err(Error::FullyFiltered { .. })
        ));
    }

    #[test]
    fn filtering_only_narrows_the_range() {
        let s = series("a", vec![-10.0, 4.0, 25.0, -2.0], &[0, 0, 1, 1]);
        let unfiltered = load_estimate(&s, &FilterMask::None).unwrap();
        let filtered = load_estimate(&s, &FilterMask::GroundTruth).unwrap();
        assert!(unfiltered.max_load >= filtered.max_load);
        assert!(unfiltered.min_load.unwrap() <= filtered.min_load.unwrap());
    }

    #[test]
    fn error_table_fractions() {
        let make = |id: &str, max: f64, min: Option<f64>, source| LoadEstimate {
            station_id: id.into(),
            max_load: max,
            min_load: min,
            source,
        };
        let truth = vec![
            make("a", 10.0, Some(-5.0), EstimateSource::GroundTruthFiltered),
            make("b", 20.0, None, EstimateSource::GroundTruthFiltered),
            make("c", 0.0, None, EstimateSource::GroundTruthFiltered),
        ];
        let predicted = vec![
            make("a", 10.0, Some(-5.25), EstimateSource::PredictionFiltered),
            make("b", 21.0, None, EstimateSource::PredictionFiltered),
            make("c", 1.0, None, EstimateSource::PredictionFiltered),
        ];
        let table = estimate_errors(&truth, &predicted).unwrap();
        let max = table.max_summary.unwrap();
        assert_eq!(max.stations, 3);
        assert_eq!(max.undefined, 1); // truth 0 excluded
        assert!((max.fraction_exact - 0.5).abs() < 1e-12); // a exact, b off by 5%
        assert!((max.fraction_within_10pct - 1.0).abs() < 1e-12);
        let min = table.min_summary.unwrap();
        assert_eq!(min.stations, 1);
        assert_eq!(min.fraction_exact, 0.0);
        assert!((min.fraction_within_10pct - 1.0).abs() < 1e-12); // -5.25 vs -5: 5%
    }

    #[test]
    fn exact_is_subset_of_within_10pct() {
        let rows: Vec<EstimateErrorRow> = [
            (10.0, 10.0),
            (10.0, 10.5),
            (10.0, 13.0),
        ]
        .iter()
        .map(|&(t, p)| error_row("s", t, p))
        .collect();
        let s = summarize(&rows).unwrap();
        assert!(s.fraction_exact <= s.fraction_within_10pct);
    }
}
