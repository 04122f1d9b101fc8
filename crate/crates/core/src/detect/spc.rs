//! Statistical process control: the score of a point is its robust-scaled
//! distance to the series median.

use crate::model::{DifferenceSeries, Polarity, ScoreSeries, SpcConfig};

pub fn spc_score(series: &DifferenceSeries, cfg: &SpcConfig) -> ScoreSeries {
    let (scores, _) = super::robust_scale(&series.delta, cfg.q_lower, cfg.q_upper);
    ScoreSeries {
        station_id: series.station_id.clone(),
        scores,
        polarity: Polarity::ZeroCentered,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats;
    use chrono::NaiveDate;

    fn series(delta: Vec<f64>) -> DifferenceSeries {
        let n = delta.len();
        let start = NaiveDate::from_ymd_opt(2021, 1, 1)
            .unwrap()
            .and_hms_opt(0, 0, 0)
            .unwrap();
        DifferenceSeries {
            station_id: "t".into(),
            timestamps: (0..n)
                .map(|i| start + chrono::Duration::minutes(15 * i as i64))
                .collect(),
            delta: delta.clone(),
            carried_labels: vec![crate::model::Label::Normal; n],
            carried_s: delta,
        }
    }

    #[test]
    fn symmetric_data_scores_have_median_zero() {
        let delta: Vec<f64> = (-20..=20).map(|i| i as f64).collect();
        let scores = spc_score(&series(delta), &SpcConfig::default());
        assert_eq!(scores.polarity, Polarity::ZeroCentered);
        assert!(stats::median(&scores.scores).abs() < 1e-12);
    }

    #[test]
    fn spike_scores_its_distance_in_d_units() {
        let mut delta: Vec<f64> = (0..200).map(|i| ((i % 7) as f64) - 3.0).collect();
        let (_, params) = super::super::robust_scale(&delta, 15.0, 85.0);
        let spike = params.median + 100.0 * params.distance;
        delta[100] = spike;
        // Adding one point barely moves median/quantiles of 200 points.
        let scores = spc_score(&series(delta), &SpcConfig::default());
        assert!((scores.scores[100] - 100.0).abs() < 2.0);
    }
}
