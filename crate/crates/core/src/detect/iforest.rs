//! Isolation forest on one-dimensional difference values.
//!
//! Canonical construction: each tree is grown on a random subsample of
//! psi = min(256, n) values with uniform split values between the subsample
//! min and max, height-limited to ceil(log2 psi). The anomaly score of a
//! point is `2^(-E[h(x)] / c(psi))`, in (0, 1], higher meaning more
//! anomalous.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{DifferenceSeries, IfConfig, Polarity, ScoreSeries};

const EULER_MASCHERONI: f64 = 0.577_215_664_901_532_9;

/// Average unsuccessful-search path length in a binary search tree of
/// `n` points; the per-leaf and score normalizer.
fn average_path_length(n: usize) -> f64 {
    match n {
        0 | 1 => 0.0,
        2 => 1.0,
        _ => {
            let n = n as f64;
            let harmonic = (n - 1.0).ln() + EULER_MASCHERONI;
            2.0 * harmonic - 2.0 * (n - 1.0) / n
        }
    }
}

#[derive(Debug, Clone)]
enum Node {
    Split { value: f64, left: u32, right: u32 },
    Leaf { size: u32 },
}

#[derive(Debug, Clone)]
struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    fn grow(values: &mut [f64], height_limit: usize, rng: &mut ChaCha8Rng) -> Tree {
        let mut tree = Tree { nodes: Vec::new() };
        tree.grow_node(values, 0, height_limit, rng);
        tree
    }

    fn grow_node(
        &mut self,
        values: &mut [f64],
        depth: usize,
        height_limit: usize,
        rng: &mut ChaCha8Rng,
    ) -> u32 {
        let id = self.nodes.len() as u32;
        self.nodes.push(Node::Leaf {
            size: values.len() as u32,
        });
        if depth >= height_limit || values.len() <= 1 {
            return id;
        }
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if min == max {
            return id;
        }
        let split = rng.gen_range(min..max);
        let mid = partition(values, split);
        if mid == 0 || mid == values.len() {
            return id;
        }
        let (left_vals, right_vals) = values.split_at_mut(mid);
        let left = self.grow_node(left_vals, depth + 1, height_limit, rng);
        let right = self.grow_node(right_vals, depth + 1, height_limit, rng);
        self.nodes[id as usize] = Node::Split {
            value: split,
            left,
            right,
        };
        id
    }

    fn path_length(&self, x: f64) -> f64 {
        let mut node = 0u32;
        let mut depth = 0.0;
        loop {
            match self.nodes[node as usize] {
                Node::Leaf { size } => return depth + average_path_length(size as usize),
                Node::Split { value, left, right } => {
                    node = if x < value { left } else { right };
                    depth += 1.0;
                }
            }
        }
    }
}

/// Moves values `< split` to the front; returns the boundary index.
fn partition(values: &mut [f64], split: f64) -> usize {
    let mut mid = 0;
    for i in 0..values.len() {
        if values[i] < split {
            values.swap(i, mid);
            mid += 1;
        }
    }
    mid
}

/// A fitted ensemble of isolation trees.
#[derive(Debug, Clone)]
pub struct IsolationForestModel {
    trees: Vec<Tree>,
    normalizer: f64,
}

impl IsolationForestModel {
    /// Fits `n_estimators` trees on `values`; deterministic in the seed.
    pub fn fit(values: &[f64], n_estimators: usize, seed: u64) -> Result<IsolationForestModel> {
        if n_estimators < 1 {
            return Err(Error::Config("n_estimators must be at least 1".into()));
        }
        if values.is_empty() {
            return Err(Error::Config("cannot fit a forest on an empty series".into()));
        }
        let subsample = values.len().min(256);
        let height_limit = (subsample as f64).log2().ceil() as usize;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut trees = Vec::with_capacity(n_estimators);
        let mut indices: Vec<usize> = (0..values.len()).collect();
        for _ in 0..n_estimators {
            // Partial Fisher-Yates: the first `subsample` entries become the
            // without-replacement sample for this tree.
            for i in 0..subsample {
                let j = rng.gen_range(i..indices.len());
                indices.swap(i, j);
            }
            let mut sample: Vec<f64> = indices[..subsample].iter().map(|&i| values[i]).collect();
            trees.push(Tree::grow(&mut sample, height_limit, &mut rng));
        }
        Ok(IsolationForestModel {
            trees,
            normalizer: average_path_length(subsample),
        })
    }

    /// Anomaly score in (0, 1]; higher means more anomalous.
    pub fn score(&self, x: f64) -> f64 {
        let total: f64 = self.trees.iter().map(|t| t.path_length(x)).sum();
        let mean_path = total / self.trees.len() as f64;
        if self.normalizer == 0.0 {
            return 1.0;
        }
        2f64.powf(-mean_path / self.normalizer)
    }

    pub fn score_all(&self, values: &[f64]) -> Vec<f64> {
        values.iter().map(|&v| self.score(v)).collect()
    }
}

/// Fits a forest on one station's raw difference values and scores the same
/// values. Scores are oriented so that higher means more anomalous.
pub fn if_score_per_station(
    series: &DifferenceSeries,
    cfg: &IfConfig,
    seed: u64,
) -> Result<ScoreSeries> {
    let model = IsolationForestModel::fit(&series.delta, cfg.n_estimators, seed)?;
    Ok(ScoreSeries {
        station_id: series.station_id.clone(),
        scores: model.score_all(&series.delta),
        polarity: Polarity::NonNegative,
    })
}

/// Robust-scales every station, fits a single forest on the concatenation
/// (stations taken in ascending station-id order), and scores each station
/// with the shared forest.
pub fn if_score_pooled(
    all_series: &[DifferenceSeries],
    cfg: &IfConfig,
    seed: u64,
) -> Result<Vec<ScoreSeries>> {
    if all_series.is_empty() {
        return Err(Error::Config("pooled forest needs at least one station".into()));
    }
    let scaled: Vec<Vec<f64>> = all_series
        .iter()
        .map(|s| super::robust_scale(&s.delta, cfg.q_lower, cfg.q_upper).0)
        .collect();

    let mut order: Vec<usize> = (0..all_series.len()).collect();
    order.sort_by(|&a, &b| all_series[a].station_id.cmp(&all_series[b].station_id));
    let mut pooled = Vec::new();
    for &i in &order {
        pooled.extend_from_slice(&scaled[i]);
    }

    let model = IsolationForestModel::fit(&pooled, cfg.n_estimators, seed)?;
    Ok(all_series
        .iter()
        .zip(&scaled)
        .map(|(series, z)| ScoreSeries {
            station_id: series.station_id.clone(),
            scores: model.score_all(z),
            polarity: Polarity::NonNegative,
        })
        .collect())
}
