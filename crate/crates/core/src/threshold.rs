//! Turning scores into predictions and choosing the thresholds that
//! maximize the category-averaged F1.5.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluate::{self, Confusion, OBJECTIVE_BETA};
use crate::model::{
    point_classes, Label, LengthCategory, PointClass, Polarity, PredictionSeries, ScoreSeries,
    ThresholdSet, ThresholdStrategy,
};

/// Cap on per-side candidates in the two-sided pair scan; beyond this many
/// unique values, candidates are quantile-spaced over the sorted uniques.
pub const ASYMMETRIC_CANDIDATE_CAP: usize = 1000;

/// One-sided rule: flag where the effective score (|z| for zero-centered
/// polarities, z otherwise) is at least theta.
pub fn threshold_one_sided(scores: &ScoreSeries, theta: f64) -> PredictionSeries {
    PredictionSeries {
        station_id: scores.station_id.clone(),
        predictions: scores.effective().iter().map(|&e| e >= theta).collect(),
    }
}

/// Two-sided rule: flag where z >= theta_upper or z < theta_lower. Only
/// valid for zero-centered scores.
pub fn threshold_two_sided(
    scores: &ScoreSeries,
    theta_lower: f64,
    theta_upper: f64,
) -> Result<PredictionSeries> {
    if scores.polarity != Polarity::ZeroCentered {
        return Err(Error::Config(
            "two-sided thresholds apply only to zero-centered scores".into(),
        ));
    }
    if !(theta_lower < theta_upper) {
        return Err(Error::Config(format!(
            "two-sided thresholds require lower < upper, got ({theta_lower}, {theta_upper})"
        )));
    }
    Ok(PredictionSeries {
        station_id: scores.station_id.clone(),
        predictions: scores
            .scores
            .iter()
            .map(|&z| z >= theta_upper || z < theta_lower)
            .collect(),
    })
}

/// Applies either rule from a [`ThresholdSet`].
pub fn threshold_scores(scores: &ScoreSeries, set: &ThresholdSet) -> Result<PredictionSeries> {
    match *set {
        ThresholdSet::Symmetrical { theta } => Ok(threshold_one_sided(scores, theta)),
        ThresholdSet::Asymmetrical {
            theta_lower,
            theta_upper,
        } => threshold_two_sided(scores, theta_lower, theta_upper),
    }
}

/// Outcome of one threshold optimization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdOptimizationResult {
    pub threshold_set: ThresholdSet,
    /// Mean F1.5 over the populated objective categories, recomputed by
    /// direct evaluation at the returned thresholds.
    pub achieved_f15_average: f64,
    /// F1.5 at the returned thresholds per category, over all four
    /// categories (not just the objective); `None` where a category has no
    /// positives in the pooled data.
    pub per_category_f15: [Option<f64>; 4],
    /// Number of candidates (one-sided) or candidate pairs (two-sided)
    /// evaluated.
    pub candidate_count: usize,
}

/// Raw score plus the point's evaluation role; the unit the optimizer
/// pools over stations.
pub type ScoredPoint = (f64, PointClass);

/// Pairs one station's raw scores with point classes derived from its
/// labels.
pub fn scored_points(scores: &ScoreSeries, labels: &[Label]) -> Result<Vec<ScoredPoint>> {
    if scores.len() != labels.len() {
        return Err(Error::LengthMismatch {
            expected: scores.len(),
            got: labels.len(),
        });
    }
    Ok(scores
        .scores
        .iter()
        .copied()
        .zip(point_classes(labels))
        .collect())
}

/// Maximizes the mean F1.5 over `objective` categories on score/label pairs
/// pooled over stations. Scores of every station must share `polarity`.
pub fn optimize_thresholds(
    scores_by_station: &[ScoreSeries],
    labels_by_station: &[Vec<Label>],
    strategy: ThresholdStrategy,
    objective: &[LengthCategory],
) -> Result<ThresholdOptimizationResult> {
    if scores_by_station.len() != labels_by_station.len() {
        return Err(Error::LengthMismatch {
            expected: scores_by_station.len(),
            got: labels_by_station.len(),
        });
    }
    let polarity = scores_by_station
        .first()
        .map(|s| s.polarity)
        .ok_or_else(|| Error::Config("threshold optimization needs at least one station".into()))?;
    let mut points = Vec::new();
    for (scores, labels) in scores_by_station.iter().zip(labels_by_station) {
        if scores.polarity != polarity {
            return Err(Error::Config("mixed score polarities in one optimization".into()));
        }
        points.extend(scored_points(scores, labels)?);
    }
    optimize_from_points(&points, polarity, strategy, objective)
}

/// Lower-level entry point on pooled points.
pub fn optimize_from_points(
    points: &[ScoredPoint],
    polarity: Polarity,
    strategy: ThresholdStrategy,
    objective: &[LengthCategory],
) -> Result<ThresholdOptimizationResult> {
    if objective.is_empty() {
        return Err(Error::Config("objective categories must be nonempty".into()));
    }
    let mut objective_mask = [false; 4];
    for c in objective {
        objective_mask[c.index()] = true;
    }
    let mut total_pos = [0u64; 4];
    for (_, class) in points {
        if let PointClass::Positive(c) = class {
            total_pos[c.index()] += 1;
        }
    }
    if !LengthCategory::ALL
        .iter()
        .any(|c| objective_mask[c.index()] && total_pos[c.index()] > 0)
    {
        return Err(Error::UndefinedRecall);
    }

    let (threshold_set, candidate_count) = match strategy {
        ThresholdStrategy::Symmetrical => {
            optimize_symmetric(points, polarity, &objective_mask, &total_pos)
        }
        ThresholdStrategy::Asymmetrical => {
            if polarity != Polarity::ZeroCentered {
                return Err(Error::Config(
                    "two-sided thresholds apply only to zero-centered scores".into(),
                ));
            }
            optimize_asymmetric(points, &objective_mask, &total_pos)
        }
    };

    // Recompute the achieved value by direct evaluation at the winner.
    let achieved = evaluate_at(points, polarity, &threshold_set, &objective_mask)?;
    let all_mask = [true; 4];
    let by_category = confusions_at(points, polarity, &threshold_set);
    let mut per_category_f15 = [None; 4];
    for (i, c) in by_category.iter().enumerate() {
        if c.has_positives() {
            per_category_f15[i] = Some(c.f_beta(OBJECTIVE_BETA));
        }
    }
    debug_assert!(evaluate_at(points, polarity, &threshold_set, &all_mask).is_ok());
    Ok(ThresholdOptimizationResult {
        threshold_set,
        achieved_f15_average: achieved,
        per_category_f15,
        candidate_count,
    })
}

/// Confusion counts at a fixed threshold set.
fn confusions_at(
    points: &[ScoredPoint],
    polarity: Polarity,
    set: &ThresholdSet,
) -> [Confusion; 4] {
    let predicted = |z: f64| match *set {
        ThresholdSet::Symmetrical { theta } => match polarity {
            Polarity::ZeroCentered => z.abs() >= theta,
            Polarity::NonNegative => z >= theta,
        },
        ThresholdSet::Asymmetrical {
            theta_lower,
            theta_upper,
        } => z >= theta_upper || z < theta_lower,
    };
    evaluate::confusion_from_points(points.iter().map(|&(z, class)| (class, predicted(z))))
        .expect("infallible over an iterator")
}

/// Mean F1.5 over populated objective categories at a fixed threshold set.
pub fn evaluate_at(
    points: &[ScoredPoint],
    polarity: Polarity,
    set: &ThresholdSet,
    objective_mask: &[bool; 4],
) -> Result<f64> {
    let by_category = confusions_at(points, polarity, set);
    objective_mean(&by_category, objective_mask).ok_or(Error::UndefinedRecall)
}

fn objective_mean(by_category: &[Confusion; 4], objective_mask: &[bool; 4]) -> Option<f64> {
    let mut sum = 0.0;
    let mut populated = 0usize;
    for (i, confusion) in by_category.iter().enumerate() {
        if objective_mask[i] && confusion.has_positives() {
            sum += confusion.f_beta(OBJECTIVE_BETA);
            populated += 1;
        }
    }
    (populated > 0).then(|| sum / populated as f64)
}

fn mean_from_counts(
    tp: &[u64; 4],
    fp: u64,
    total_pos: &[u64; 4],
    objective_mask: &[bool; 4],
) -> f64 {
    let mut sum = 0.0;
    let mut populated = 0usize;
    for i in 0..4 {
        if objective_mask[i] && total_pos[i] > 0 {
            let c = Confusion {
                tp: tp[i],
                fp,
                fn_: total_pos[i] - tp[i],
            };
            sum += c.f_beta(OBJECTIVE_BETA);
            populated += 1;
        }
    }
    sum / populated as f64
}

/// Descending sweep over the unique effective values plus +inf; ties go to
/// the largest theta (fewest predicted positives).
fn optimize_symmetric(
    points: &[ScoredPoint],
    polarity: Polarity,
    objective_mask: &[bool; 4],
    total_pos: &[u64; 4],
) -> (ThresholdSet, usize) {
    let mut by_effective: Vec<(f64, PointClass)> = points
        .iter()
        .map(|&(z, class)| {
            let e = match polarity {
                Polarity::ZeroCentered => z.abs(),
                Polarity::NonNegative => z,
            };
            (e, class)
        })
        .collect();
    by_effective.sort_by(|a, b| b.0.total_cmp(&a.0));

    let mut tp = [0u64; 4];
    let mut fp = 0u64;
    let mut idx = 0usize;
    let mut candidate_count = 1; // the +inf candidate
    let mut best_theta = f64::INFINITY;
    let mut best_value = mean_from_counts(&tp, fp, total_pos, objective_mask);

    while idx < by_effective.len() {
        let theta = by_effective[idx].0;
        // Include every point with effective score >= theta.
        while idx < by_effective.len() && by_effective[idx].0 >= theta {
            match by_effective[idx].1 {
                PointClass::Negative => fp += 1,
                PointClass::Positive(c) => tp[c.index()] += 1,
                PointClass::Excluded => {}
            }
            idx += 1;
        }
        candidate_count += 1;
        let value = mean_from_counts(&tp, fp, total_pos, objective_mask);
        // Strict improvement only: on ties the earlier (larger) theta wins.
        if value > best_value {
            best_value = value;
            best_theta = theta;
        }
    }
    (ThresholdSet::Symmetrical { theta: best_theta }, candidate_count)
}

/// Per-candidate cumulative counts of one side of the two-sided scan.
#[derive(Debug, Clone, Copy, Default)]
struct SideCounts {
    tp: [u64; 4],
    fp: u64,
    positives: u64,
}

impl SideCounts {
    fn absorb(&mut self, class: PointClass) {
        match class {
            PointClass::Negative => self.fp += 1,
            PointClass::Positive(c) => self.tp[c.index()] += 1,
            PointClass::Excluded => {}
        }
        self.positives += 1;
    }
}

/// Quantile-spaced subset of at most `cap` entries from sorted uniques.
fn capped(sorted_unique: &[f64], cap: usize) -> Vec<f64> {
    if sorted_unique.len() <= cap {
        return sorted_unique.to_vec();
    }
    (0..cap)
        .map(|i| sorted_unique[i * (sorted_unique.len() - 1) / (cap - 1)])
        .collect()
}

/// Smallest representable value above a finite `v`.
fn just_above(v: f64) -> f64 {
    if v == f64::INFINITY {
        return v;
    }
    let bits = v.to_bits();
    f64::from_bits(if v >= 0.0 { bits + 1 } else { bits - 1 })
}

/// Lower-side candidates: values of theta_lower realizing every prefix
/// {z < theta_lower} of the sorted uniques, placed strictly inside the gaps
/// between uniques (or just above the maximum) so that any prefix can be
/// paired with any disjoint suffix while keeping theta_lower < theta_upper.
fn lower_candidates(sorted_unique: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(sorted_unique.len() + 1);
    out.push(sorted_unique[0]); // flags nothing
    for pair in sorted_unique.windows(2) {
        let mid = pair[0] / 2.0 + pair[1] / 2.0;
        // Guard against rounding onto the left endpoint for adjacent floats.
        out.push(if mid > pair[0] { mid } else { pair[1] });
    }
    out.push(just_above(*sorted_unique.last().unwrap())); // flags everything
    out
}

/// Pair scan over lower candidates (flag z < theta_lower) and upper
/// candidates (flag z >= theta_upper). The two predicates are disjoint
/// whenever lower < upper, so counts add. Ties go to the pair with fewest
/// predicted positives, then the larger theta_upper.
fn optimize_asymmetric(
    points: &[ScoredPoint],
    objective_mask: &[bool; 4],
    total_pos: &[u64; 4],
) -> (ThresholdSet, usize) {
    let mut unique: Vec<f64> = points.iter().map(|&(z, _)| z).collect();
    unique.sort_by(|a, b| a.total_cmp(b));
    unique.dedup();

    // Lower candidates flag {z < v} and sit in the gaps between uniques;
    // upper candidates are the uniques themselves, flagging {z >= v}, plus
    // +inf (flags nothing).
    let lower_candidates = capped(&lower_candidates(&unique), ASYMMETRIC_CANDIDATE_CAP);
    let mut upper_candidates = capped(&unique, ASYMMETRIC_CANDIDATE_CAP);
    upper_candidates.push(f64::INFINITY);

    let mut sorted_points: Vec<&ScoredPoint> = points.iter().collect();
    sorted_points.sort_by(|a, b| a.0.total_cmp(&b.0));

    // Cumulative counts per lower candidate (ascending sweep).
    let mut lower_counts = vec![SideCounts::default(); lower_candidates.len()];
    {
        let mut acc = SideCounts::default();
        let mut idx = 0;
        for (ci, &threshold) in lower_candidates.iter().enumerate() {
            while idx < sorted_points.len() && sorted_points[idx].0 < threshold {
                acc.absorb(sorted_points[idx].1);
                idx += 1;
            }
            lower_counts[ci] = acc;
        }
    }
    // Cumulative counts per upper candidate (descending sweep).
    let mut upper_counts = vec![SideCounts::default(); upper_candidates.len()];
    {
        let mut acc = SideCounts::default();
        let mut idx = sorted_points.len();
        for (ci, &threshold) in upper_candidates.iter().enumerate().rev() {
            while idx > 0 && sorted_points[idx - 1].0 >= threshold {
                acc.absorb(sorted_points[idx - 1].1);
                idx -= 1;
            }
            upper_counts[ci] = acc;
        }
    }

    let mut best: Option<(f64, u64, f64, f64)> = None; // (value, positives, lower, upper)
    let mut candidate_count = 0usize;
    for (li, &lower) in lower_candidates.iter().enumerate() {
        for (ui, &upper) in upper_candidates.iter().enumerate() {
            if !(lower < upper) {
                continue;
            }
            candidate_count += 1;
            let mut tp = [0u64; 4];
            for i in 0..4 {
                tp[i] = lower_counts[li].tp[i] + upper_counts[ui].tp[i];
            }
            let fp = lower_counts[li].fp + upper_counts[ui].fp;
            let positives = lower_counts[li].positives + upper_counts[ui].positives;
            let value = mean_from_counts(&tp, fp, total_pos, objective_mask);
            let better = match best {
                None => true,
                Some((bv, bp, _, bu)) => {
                    value > bv
                        || (value == bv && positives < bp)
                        || (value == bv && positives == bp && upper > bu)
                }
            };
            if better {
                best = Some((value, positives, lower, upper));
            }
        }
    }
    let (_, _, theta_lower, theta_upper) = best.expect("at least one admissible pair");
    (
        ThresholdSet::Asymmetrical {
            theta_lower,
            theta_upper,
        },
        candidate_count,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn scores(values: Vec<f64>, polarity: Polarity) -> ScoreSeries {
        ScoreSeries {
            station_id: "t".into(),
            scores: values,
            polarity,
        }
    }

    fn labels(codes: &[i64]) -> Vec<Label> {
        codes.iter().map(|&c| Label::from_code(c).unwrap()).collect()
    }

    #[test]
    fn one_sided_extremes() {
        let s = scores(vec![-2.0, 0.0, 3.0], Polarity::ZeroCentered);
        assert_eq!(threshold_one_sided(&s, 0.0).predictions, vec![true; 3]);
        assert_eq!(
            threshold_one_sided(&s, f64::INFINITY).predictions,
            vec![false; 3]
        );
        // |z| rule for zero-centered scores.
        assert_eq!(
            threshold_one_sided(&s, 1.5).predictions,
            vec![true, false, true]
        );
    }

    #[test]
    fn two_sided_rule_and_errors() {
        let s = scores(vec![-1.0, 0.0, 1.0], Polarity::ZeroCentered);
        let p = threshold_two_sided(&s, -0.5, 0.5).unwrap();
        assert_eq!(p.predictions, vec![true, false, true]);
        assert_eq!(
            threshold_two_sided(&s, f64::NEG_INFINITY, f64::INFINITY)
                .unwrap()
                .predictions,
            vec![false; 3]
        );
        let nn = scores(vec![0.5], Polarity::NonNegative);
        assert!(threshold_two_sided(&nn, -1.0, 1.0).is_err());
        assert!(threshold_two_sided(&s, 1.0, 1.0).is_err());
    }

    #[test]
    fn one_sided_monotonicity() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let s = scores(
            (0..300).map(|_| rng.gen_range(-5.0..5.0)).collect(),
            Polarity::ZeroCentered,
        );
        let loose = threshold_one_sided(&s, 1.0);
        let tight = threshold_one_sided(&s, 2.0);
        for (l, t) in loose.predictions.iter().zip(&tight.predictions) {
            assert!(!t | l, "tightening the threshold added a positive");
        }
    }

    #[test]
    fn separable_scores_achieve_one() {
        let codes = vec![0, 0, 0, 1, 1, 0, 0, 0, 0, 0];
        let z = vec![0.1, -0.3, 0.2, 15.0, 12.0, 0.4, -0.2, 0.0, 0.3, -0.1];
        let result = optimize_thresholds(
            &[scores(z, Polarity::ZeroCentered)],
            &[labels(&codes)],
            ThresholdStrategy::Symmetrical,
            &LengthCategory::ALL,
        )
        .unwrap();
        assert_eq!(result.achieved_f15_average, 1.0);
        assert_eq!(result.per_category_f15[0], Some(1.0));
    }

    #[test]
    fn no_positives_is_undefined_recall() {
        let result = optimize_thresholds(
            &[scores(vec![1.0, 2.0], Polarity::NonNegative)],
            &[labels(&[0, 0])],
            ThresholdStrategy::Symmetrical,
            &LengthCategory::ALL,
        );
        assert!(matches!(result, Err(Error::UndefinedRecall)));
    }

    /// Dense scan oracle over a fixed theta grid; scores live on a coarse
    /// lattice so the grid provably hits every decision boundary.
    fn dense_scan_best(
        points: &[ScoredPoint],
        polarity: Polarity,
        objective_mask: &[bool; 4],
        lo: f64,
        hi: f64,
        steps: usize,
    ) -> f64 {
        let mut best = f64::NEG_INFINITY;
        for i in 0..=steps {
            let theta = lo + (hi - lo) * i as f64 / steps as f64;
            let set = ThresholdSet::Symmetrical { theta };
            if let Ok(v) = evaluate_at(points, polarity, &set, objective_mask) {
                best = best.max(v);
            }
        }
        best
    }

    #[test]
    fn symmetric_matches_dense_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..20 {
            let n = rng.gen_range(40..200);
            let codes: Vec<i64> = (0..n)
                .map(|_| if rng.gen_bool(0.2) { 1 } else { 0 })
                .collect();
            // Lattice scores: multiples of 0.01 in [0, 1].
            let z: Vec<f64> = (0..n).map(|_| rng.gen_range(0..=100) as f64 / 100.0).collect();
            let l = labels(&codes);
            let result = optimize_thresholds(
                &[scores(z.clone(), Polarity::NonNegative)],
                &[l.clone()],
                ThresholdStrategy::Symmetrical,
                &LengthCategory::ALL,
            );
            let result = match result {
                Ok(r) => r,
                Err(Error::UndefinedRecall) => continue,
                Err(e) => panic!("{e}"),
            };
            let points = scored_points(&scores(z, Polarity::NonNegative), &l).unwrap();
            let oracle = dense_scan_best(&points, Polarity::NonNegative, &[true; 4], 0.0, 1.0001, 10_000);
            assert!(
                (result.achieved_f15_average - oracle).abs() < 1e-12,
                "{} vs {oracle}",
                result.achieved_f15_average
            );
            // Achieved equals re-evaluation at the winner exactly.
            let re = evaluate_at(&points, Polarity::NonNegative, &result.threshold_set, &[true; 4])
                .unwrap();
            assert_eq!(result.achieved_f15_average, re);
        }
    }

    #[test]
    fn asymmetric_beats_or_matches_symmetric_on_skewed_scores() {
        // Negative-side anomalies sit at -1.2 while normal data spans
        // [-1, 1]; a one-sided |z| rule cannot separate them without also
        // flagging +1 region points.
        let mut z = Vec::new();
        let mut codes = Vec::new();
        for i in 0..200 {
            z.push(-1.0 + 2.0 * (i as f64 / 199.0));
            codes.push(0);
        }
        for _ in 0..10 {
            z.push(-1.2);
            codes.push(1);
        }
        let l = labels(&codes);
        let sym = optimize_thresholds(
            &[scores(z.clone(), Polarity::ZeroCentered)],
            &[l.clone()],
            ThresholdStrategy::Symmetrical,
            &LengthCategory::ALL,
        )
        .unwrap();
        let asym = optimize_thresholds(
            &[scores(z, Polarity::ZeroCentered)],
            &[l],
            ThresholdStrategy::Asymmetrical,
            &LengthCategory::ALL,
        )
        .unwrap();
        assert_eq!(asym.achieved_f15_average, 1.0);
        assert!(asym.achieved_f15_average >= sym.achieved_f15_average);
        match asym.threshold_set {
            ThresholdSet::Asymmetrical { theta_lower, theta_upper } => {
                assert!(theta_lower <= -1.0 && theta_lower > -1.2);
                assert!(theta_upper > 1.0);
            }
            _ => panic!("expected asymmetrical"),
        }
    }

    #[test]
    fn asymmetric_ties_pick_fewest_positives() {
        // Only one positive at z = 5; many thresholds achieve F = 1, the
        // winner must not flag any extra point.
        let z = vec![0.0, 0.1, -0.1, 0.2, 5.0];
        let codes = vec![0, 0, 0, 0, 1];
        let result = optimize_thresholds(
            &[scores(z.clone(), Polarity::ZeroCentered)],
            &[labels(&codes)],
            ThresholdStrategy::Asymmetrical,
            &LengthCategory::ALL,
        )
        .unwrap();
        assert_eq!(result.achieved_f15_average, 1.0);
        if let ThresholdSet::Asymmetrical { theta_lower, theta_upper } = result.threshold_set {
            let flagged = z
                .iter()
                .filter(|&&v| v >= theta_upper || v < theta_lower)
                .count();
            assert_eq!(flagged, 1);
            // Fewest-positives ties resolve toward the larger upper bound.
            assert_eq!(theta_upper, 5.0);
        } else {
            panic!("expected asymmetrical");
        }
    }

    #[test]
    fn adding_false_positive_never_raises_value_at_old_theta() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let n = 150;
        let codes: Vec<i64> = (0..n).map(|i| if i % 10 == 0 { 1 } else { 0 }).collect();
        let mut z: Vec<f64> = (0..n)
            .map(|i| if codes[i] == 1 { rng.gen_range(3.0..5.0) } else { rng.gen_range(0.0..1.0) })
            .collect();
        let l = labels(&codes);
        let result = optimize_thresholds(
            &[scores(z.clone(), Polarity::NonNegative)],
            &[l.clone()],
            ThresholdStrategy::Symmetrical,
            &LengthCategory::ALL,
        )
        .unwrap();
        let theta = match result.threshold_set {
            ThresholdSet::Symmetrical { theta } => theta,
            _ => unreachable!(),
        };
        let before = evaluate_at(
            &scored_points(&scores(z.clone(), Polarity::NonNegative), &l).unwrap(),
            Polarity::NonNegative,
            &ThresholdSet::Symmetrical { theta },
            &[true; 4],
        )
        .unwrap();
        // Turn one normal point into a pure false positive at the old theta.
        z[3] = 100.0;
        let after = evaluate_at(
            &scored_points(&scores(z, Polarity::NonNegative), &l).unwrap(),
            Polarity::NonNegative,
            &ThresholdSet::Symmetrical { theta },
            &[true; 4],
        )
        .unwrap();
        assert!(after <= before, "{after} > {before}");
    }

    #[test]
    fn objective_categories_restrict_the_mean() {
        // One C1 event detectable, one C2 event invisible in the scores.
        let mut codes = vec![0i64; 120];
        codes[4] = 1; // C1
        for c in codes.iter_mut().take(100).skip(50) {
            *c = 1; // C2 run of 50
        }
        let z: Vec<f64> = (0..120).map(|i| if i == 4 { 10.0 } else { 0.1 }).collect();
        let l = labels(&codes);
        let c1_only = optimize_thresholds(
            &[scores(z.clone(), Polarity::NonNegative)],
            &[l.clone()],
            ThresholdStrategy::Symmetrical,
            &[LengthCategory::C1],
        )
        .unwrap();
        assert_eq!(c1_only.achieved_f15_average, 1.0);
        let all = optimize_thresholds(
            &[scores(z, Polarity::NonNegative)],
            &[l],
            ThresholdStrategy::Symmetrical,
            &LengthCategory::ALL,
        )
        .unwrap();
        assert!(all.achieved_f15_average < 1.0);
    }

    #[test]
    fn candidate_cap_is_quantile_spaced() {
        let sorted: Vec<f64> = (0..5000).map(|i| i as f64).collect();
        let c = capped(&sorted, 1000);
        assert_eq!(c.len(), 1000);
        assert_eq!(c[0], 0.0);
        assert_eq!(*c.last().unwrap(), 4999.0);
        assert!(c.windows(2).all(|w| w[0] < w[1]));
    }
}
