//! Per-station preprocessing: removal of missing and repeated measurements,
//! quantile-clipped linear rescaling of the bottom-up load onto the
//! measurement, sign correction, and the difference vector delta.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DifferenceSeries, StationSeries};
use crate::stats;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PreprocessConfig {
    /// Maximum number of repeated measurements tolerated around a point.
    pub r: usize,
    /// Quantile band (percent) used to clip the linear fit.
    pub q_lower: f64,
    pub q_upper: f64,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        PreprocessConfig {
            r: 5,
            q_lower: 10.0,
            q_upper: 90.0,
        }
    }
}

impl PreprocessConfig {
    pub fn validate(&self) -> Result<()> {
        if self.r < 1 {
            return Err(Error::Config("r must be at least 1".into()));
        }
        if !(0.0 <= self.q_lower && self.q_lower < self.q_upper && self.q_upper <= 100.0) {
            return Err(Error::Config(format!(
                "quantiles require 0 <= q_lower < q_upper <= 100, got ({}, {})",
                self.q_lower, self.q_upper
            )));
        }
        Ok(())
    }
}

/// Fitted linear map `s ~ m * b + c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub m: f64,
    pub c: f64,
}

#[derive(Debug, Clone)]
pub struct PreprocessOutcome {
    pub series: DifferenceSeries,
    pub fit: FitResult,
    pub sign_corrected: bool,
    pub removed_count: usize,
    /// True when every in-band bottom-up value was identical and the fit
    /// fell back to m = 0, c = mean(s).
    pub degenerate_fit: bool,
}

/// True iff `b` is the missing-value marker.
pub fn bottom_up_missing(b: f64) -> bool {
    b.is_nan()
}

/// True iff the contiguous run of values equal to `s[i]` touching position
/// `i` (0-based), clipped to the window `[i-r, i+r]`, has length >= r.
pub fn repeated_measurements(s: &[f64], i: usize, r: usize) -> bool {
    let n = s.len();
    debug_assert!(i < n);
    let lo = i.saturating_sub(r);
    let hi = (i + r).min(n - 1);
    let v = s[i];
    let mut run = 1usize;
    let mut j = i;
    while j > lo && s[j - 1] == v {
        run += 1;
        j -= 1;
    }
    let mut j = i;
    while j < hi && s[j + 1] == v {
        run += 1;
        j += 1;
    }
    run >= r
}

fn least_squares(b: &[f64], s: &[f64]) -> (FitResult, bool) {
    debug_assert_eq!(b.len(), s.len());
    let n = b.len() as f64;
    let mean_b = b.iter().sum::<f64>() / n;
    let mean_s = s.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&bi, &si) in b.iter().zip(s) {
        sxx += (bi - mean_b) * (bi - mean_b);
        sxy += (bi - mean_b) * (si - mean_s);
    }
    if sxx == 0.0 {
        // All in-band bottom-up values identical: slope is unidentifiable.
        return (FitResult { m: 0.0, c: mean_s }, true);
    }
    let m = sxy / sxx;
    (
        FitResult {
            m,
            c: mean_s - m * mean_b,
        },
        false,
    )
}

/// Full preprocessing of one station: removal, quantile-clipped linear fit,
/// sign correction, and delta computation.
pub fn preprocess(station: &StationSeries, cfg: &PreprocessConfig) -> Result<PreprocessOutcome> {
    station.validate()?;
    cfg.validate()?;

    let n = station.len();
    let mut keep = Vec::with_capacity(n);
    for i in 0..n {
        if !(bottom_up_missing(station.b[i]) || repeated_measurements(&station.s, i, cfg.r)) {
            keep.push(i);
        }
    }
    let removed_count = n - keep.len();
    if keep.is_empty() {
        return Err(Error::EmptySeries {
            station_id: station.station_id.clone(),
        });
    }

    let s: Vec<f64> = keep.iter().map(|&i| station.s[i]).collect();
    let b: Vec<f64> = keep.iter().map(|&i| station.b[i]).collect();

    let q_min = stats::quantile(&s, cfg.q_lower);
    let q_max = stats::quantile(&s, cfg.q_upper);
    let mut s_band = Vec::new();
    let mut b_band = Vec::new();
    for (&si, &bi) in s.iter().zip(&b) {
        if si > q_min && si < q_max {
            s_band.push(si);
            b_band.push(bi);
        }
    }
    if s_band.len() < 2 {
        return Err(Error::FitUnderdetermined { count: s_band.len() });
    }
    let (fit, degenerate_fit) = least_squares(&b_band, &s_band);

    let b_scaled: Vec<f64> = b.iter().map(|&bi| fit.m * bi + fit.c).collect();

    let min_s = s.iter().copied().fold(f64::INFINITY, f64::min);
    let min_b_scaled = b_scaled.iter().copied().fold(f64::INFINITY, f64::min);
    let sign_corrected = min_s >= 0.0 && min_b_scaled < 0.0;
    let s_signed: Vec<f64> = if sign_corrected {
        s.iter()
            .zip(&b_scaled)
            .map(|(&si, &bsi)| if bsi < 0.0 { -si } else { si })
            .collect()
    } else {
        s.clone()
    };

    let delta: Vec<f64> = s_signed
        .iter()
        .zip(&b_scaled)
        .map(|(&ss, &bs)| ss - bs)
        .collect();

    Ok(PreprocessOutcome {
        series: DifferenceSeries {
            station_id: station.station_id.clone(),
            timestamps: keep.iter().map(|&i| station.timestamps[i]).collect(),
            delta,
            carried_labels: keep.iter().map(|&i| station.labels[i]).collect(),
            carried_s: s_signed,
        },
        fit,
        sign_corrected,
        removed_count,
        degenerate_fit,
    })
}
