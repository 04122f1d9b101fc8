//! Robust scaling: distance to the median in units of the interquantile
//! distance.

use serde::{Deserialize, Serialize};

use crate::stats;

/// Parameters of one robust scaling: the median and the interquantile
/// distance actually used as the divisor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobustScaleParams {
    /// Median m.
    pub median: f64,
    /// quantile(q_upper) - quantile(q_lower); falls back to the standard
    /// deviation when that distance is zero, and to 0 (all-zero scores)
    /// when the series is constant.
    pub distance: f64,
}

/// Scales `delta` to `z_i = (delta_i - median) / d`.
///
/// A degenerate interquantile distance (d = 0) falls back to the standard
/// deviation; a fully constant series yields all-zero scores.
pub fn robust_scale(delta: &[f64], q_lower: f64, q_upper: f64) -> (Vec<f64>, RobustScaleParams) {
    assert!(!delta.is_empty(), "robust_scale of empty series");
    let mut sorted = delta.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let median = stats::quantile_sorted(&sorted, 50.0);
    let mut distance = stats::quantile_sorted(&sorted, q_upper) - stats::quantile_sorted(&sorted, q_lower);
    if distance == 0.0 {
        distance = stats::std_dev(delta);
    }
    if distance == 0.0 {
        return (
            vec![0.0; delta.len()],
            RobustScaleParams { median, distance },
        );
    }
    let z = delta.iter().map(|&d| (d - median) / distance).collect();
    (z, RobustScaleParams { median, distance })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_computed_example() {
        let (z, params) = robust_scale(&[0.0, 0.0, 0.0, 10.0], 0.0, 100.0);
        assert_eq!(params.median, 0.0);
        assert_eq!(params.distance, 10.0);
        assert_eq!(z, vec![0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn constant_series_degenerates_to_zero_scores() {
        let (z, params) = robust_scale(&[3.0, 3.0, 3.0], 10.0, 90.0);
        assert_eq!(params.distance, 0.0);
        assert!(z.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn zero_interquantile_falls_back_to_std() {
        // Middle 60% identical but tails differ: d from quantiles is 0,
        // std is not.
        let delta = vec![0.0, 5.0, 5.0, 5.0, 5.0, 5.0, 5.0, 5.0, 5.0, 10.0];
        let (z, params) = robust_scale(&delta, 20.0, 80.0);
        assert!(params.distance > 0.0);
        assert!(z.iter().any(|&v| v != 0.0));
    }

    #[test]
    fn positive_affine_invariance() {
        let delta: Vec<f64> = (0..50).map(|i| ((i * 37) % 13) as f64 - 6.0).collect();
        let (z, _) = robust_scale(&delta, 15.0, 85.0);
        let affine: Vec<f64> = delta.iter().map(|&d| 3.5 * d + 11.0).collect();
        let (z2, _) = robust_scale(&affine, 15.0, 85.0);
        for (a, b) in z.iter().zip(&z2) {
            assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0), "{a} vs {b}");
        }
    }
}
