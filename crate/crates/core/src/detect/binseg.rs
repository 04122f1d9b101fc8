//! Binary segmentation: greedy recursive bisection of the robust-scaled
//! series at the max-gain candidate split, with an L1 segment cost. Each
//! point's score is the difference between its segment mean and a reference
//! value.

use serde::{Deserialize, Serialize};

use crate::model::{
    BinsegConfig, CostFn, DifferenceSeries, PenaltyScaling, Polarity, ReferencePoint, ScoreSeries,
};
use crate::stats;

/// Ordered segment end indices (1-based, the final entry is the series
/// length). Consecutive gaps are at least the minimum segment size, and
/// every breakpoint except the final one is a multiple of the jump.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Breakpoints(pub Vec<usize>);

impl Breakpoints {
    /// Half-open `(start, end)` index ranges of the segmentation.
    pub fn segments(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.0.len());
        let mut start = 0;
        for &end in &self.0 {
            out.push((start, end));
            start = end;
        }
        out
    }
}

/// Fenwick tree over value ranks, tracking counts and value sums; supports
/// order statistics and prefix sums for O(log n) L1 segment costs.
struct Fenwick {
    counts: Vec<u64>,
    sums: Vec<f64>,
    total_count: u64,
    total_sum: f64,
}

impl Fenwick {
    fn new(m: usize) -> Fenwick {
        Fenwick {
            counts: vec![0; m + 1],
            sums: vec![0.0; m + 1],
            total_count: 0,
            total_sum: 0.0,
        }
    }

    fn add(&mut self, rank: usize, value: f64) {
        let mut i = rank + 1;
        while i < self.counts.len() {
            self.counts[i] += 1;
            self.sums[i] += value;
            i += i & i.wrapping_neg();
        }
        self.total_count += 1;
        self.total_sum += value;
    }

    /// (count, sum) over ranks `0..=rank`.
    fn prefix(&self, rank: usize) -> (u64, f64) {
        let mut i = rank + 1;
        let mut count = 0;
        let mut sum = 0.0;
        while i > 0 {
            count += self.counts[i];
            sum += self.sums[i];
            i -= i & i.wrapping_neg();
        }
        (count, sum)
    }

    /// Rank holding the k-th smallest inserted value (k is 1-based).
    fn kth(&self, k: u64) -> usize {
        let mut pos = 0usize;
        let mut remaining = k;
        let mut step = self.counts.len().next_power_of_two() >> 1;
        while step > 0 {
            let next = pos + step;
            if next < self.counts.len() && self.counts[next] < remaining {
                remaining -= self.counts[next];
                pos = next;
            }
            step >>= 1;
        }
        pos // 0-based rank
    }

    /// Sum of |x - median| over the inserted points (lower median).
    fn l1_cost(&self, rank_values: &[f64]) -> f64 {
        if self.total_count == 0 {
            return 0.0;
        }
        let k = (self.total_count + 1) / 2;
        let med_rank = self.kth(k);
        let med = rank_values[med_rank];
        let (c_le, s_le) = self.prefix(med_rank);
        let c_gt = self.total_count - c_le;
        let s_gt = self.total_sum - s_le;
        med * c_le as f64 - s_le + s_gt - med * c_gt as f64
    }
}

fn compress(z: &[f64]) -> (Vec<usize>, Vec<f64>) {
    let mut sorted = z.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    sorted.dedup();
    let ranks = z
        .iter()
        .map(|v| sorted.partition_point(|x| x < v))
        .collect();
    (ranks, sorted)
}

/// Best admissible split of `[start, end)`: candidates are absolute indices
/// that are multiples of `jump` leaving at least `min_size` samples on both
/// sides. Returns the split index and its gain, ties to the earliest
/// candidate.
fn best_split(
    z: &[f64],
    ranks: &[usize],
    rank_values: &[f64],
    start: usize,
    end: usize,
    min_size: usize,
    jump: usize,
) -> Option<(usize, f64)> {
    if end - start < 2 * min_size {
        return None;
    }
    let lo = start + min_size;
    let hi = end - min_size;
    let first = lo.div_ceil(jump) * jump;
    let candidates: Vec<usize> = (first..=hi).step_by(jump).collect();
    if candidates.is_empty() {
        return None;
    }

    let m = rank_values.len();
    // Right-segment costs, reverse sweep.
    let mut right_costs = vec![0.0; candidates.len()];
    {
        let mut fen = Fenwick::new(m);
        let mut ci = candidates.len();
        for i in (candidates[0]..end).rev() {
            fen.add(ranks[i], z[i]);
            while ci > 0 && candidates[ci - 1] == i {
                ci -= 1;
                right_costs[ci] = fen.l1_cost(rank_values);
            }
        }
        debug_assert_eq!(ci, 0);
    }
    // Left-segment costs and the total cost, forward sweep.
    let mut best: Option<(usize, f64)> = None;
    {
        let mut fen = Fenwick::new(m);
        let mut ci = 0;
        let mut left_costs = vec![0.0; candidates.len()];
        for i in start..end {
            fen.add(ranks[i], z[i]);
            while ci < candidates.len() && candidates[ci] == i + 1 {
                left_costs[ci] = fen.l1_cost(rank_values);
                ci += 1;
            }
        }
        let c_total = fen.l1_cost(rank_values);
        for (idx, &k) in candidates.iter().enumerate() {
            let gain = c_total - left_costs[idx] - right_costs[idx];
            if best.map_or(true, |(_, g)| gain > g) {
                best = Some((k, gain));
            }
        }
    }
    best
}

/// Best single bisection of the whole series under the L1 segment cost:
/// the admissible split index (a multiple of `jump`, leaving `min_size`
/// samples on both sides) maximizing the gain
/// `cost(series) - cost(left) - cost(right)`, with its gain. `None` when no
/// admissible candidate exists. This is exactly the first split the
/// recursive segmentation considers.
pub fn best_single_split(z: &[f64], min_size: usize, jump: usize) -> Option<(usize, f64)> {
    let (ranks, rank_values) = compress(z);
    best_split(z, &ranks, &rank_values, 0, z.len(), min_size, jump)
}

/// Greedy recursive bisection. Splitting continues while the best gain
/// exceeds the penalty derived from beta: `beta * T` (linear scaling) or
/// `beta * T * MAD` (L1 scaling), with T the series length.
pub fn binseg_breakpoints(
    z_scaled: &[f64],
    beta: f64,
    _cost: CostFn,
    min_size: usize,
    jump: usize,
    penalty_scaling: PenaltyScaling,
) -> Breakpoints {
    let n = z_scaled.len();
    if n == 0 {
        return Breakpoints(vec![0]);
    }
    let penalty = match penalty_scaling {
        PenaltyScaling::Linear => beta * n as f64,
        PenaltyScaling::L1 => beta * n as f64 * stats::mad(z_scaled),
    };
    let (ranks, rank_values) = compress(z_scaled);

    let mut breakpoints = Vec::new();
    let mut stack = vec![(0usize, n)];
    while let Some((start, end)) = stack.pop() {
        if let Some((k, gain)) = best_split(z_scaled, &ranks, &rank_values, start, end, min_size, jump)
        {
            if gain > penalty {
                breakpoints.push(k);
                stack.push((start, k));
                stack.push((k, end));
            }
        }
    }
    breakpoints.sort_unstable();
    breakpoints.push(n);
    Breakpoints(breakpoints)
}

/// Baseline value the segment means are compared against: the mean or
/// median of the whole series, or of the longest segment (the first longest
/// wins ties).
pub fn find_reference_value(
    z_scaled: &[f64],
    breakpoints: &Breakpoints,
    strategy: ReferencePoint,
) -> f64 {
    match strategy {
        ReferencePoint::Mean => stats::mean(z_scaled),
        ReferencePoint::Median => stats::median(z_scaled),
        ReferencePoint::LongestMean | ReferencePoint::LongestMedian => {
            let mut longest = 0usize;
            let mut reference = 0.0;
            for (start, end) in breakpoints.segments() {
                let len = end - start;
                if len > longest {
                    longest = len;
                    let segment = &z_scaled[start..end];
                    reference = match strategy {
                        ReferencePoint::LongestMean => stats::mean(segment),
                        _ => stats::median(segment),
                    };
                }
            }
            reference
        }
    }
}

/// Scores a difference series: robust scale, segment, then assign every
/// point of a segment the constant `mean(segment) - reference`.
pub fn binseg_score(series: &DifferenceSeries, cfg: &BinsegConfig) -> ScoreSeries {
    let (z, _) = super::robust_scale(&series.delta, cfg.q_lower, cfg.q_upper);
    let breakpoints = binseg_breakpoints(
        &z,
        cfg.beta,
        cfg.cost,
        cfg.min_size,
        cfg.jump,
        cfg.penalty_scaling,
    );
    let reference = find_reference_value(&z, &breakpoints, cfg.reference_point);
    let mut scores = vec![0.0; z.len()];
    for (start, end) in breakpoints.segments() {
        if start == end {
            continue;
        }
        let value = stats::mean(&z[start..end]) - reference;
        for s in scores.iter_mut().take(end).skip(start) {
            *s = value;
        }
    }
    ScoreSeries {
        station_id: series.station_id.clone(),
        scores,
        polarity: Polarity::ZeroCentered,
    }
}

#[cfg(test)]
pub(crate) mod oracle {
    //! Brute-force references used by unit and acceptance tests; kept
    //! independent of the Fenwick implementation above.

    /// Sum of absolute deviations from the (lower) median, by sorting.
    pub fn l1_cost_direct(segment: &[f64]) -> f64 {
        if segment.is_empty() {
            return 0.0;
        }
        let mut sorted = segment.to_vec();
        sorted.sort_by(|a, b| a.total_cmp(b));
        let median = sorted[(sorted.len() - 1) / 2];
        segment.iter().map(|x| (x - median).abs()).sum()
    }

    /// Exhaustive max-gain scan over all admissible candidates in
    /// `[start, end)`; ties to the earliest candidate.
    pub fn best_split_direct(
        z: &[f64],
        start: usize,
        end: usize,
        min_size: usize,
        jump: usize,
    ) -> Option<(usize, f64)> {
        let c_total = l1_cost_direct(&z[start..end]);
        let mut best: Option<(usize, f64)> = None;
        let mut k = start + min_size;
        while k <= end.saturating_sub(min_size) {
            if k % jump == 0 {
                let gain = c_total - l1_cost_direct(&z[start..k]) - l1_cost_direct(&z[k..end]);
                if best.map_or(true, |(_, g)| gain > g) {
                    best = Some((k, gain));
                }
            }
            k += 1;
        }
        best
    }
}
