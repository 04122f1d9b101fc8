//! Length-stratified evaluation: per-category precision/recall/F1.5,
//! category-averaged objective, rank-based AUC, and a station bootstrap.
//!
//! The evaluation index set of a category contains every label-0 point and
//! the label-1 points whose run falls in that category; label-5 points and
//! label-1 points of other categories are excluded. False positives are
//! therefore identical across the four categories of one evaluation.

use serde::{Deserialize, Serialize};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{point_classes, Label, LengthCategory, PointClass};

/// Beta of the objective F-score; weights recall above precision.
pub const OBJECTIVE_BETA: f64 = 1.5;

/// F_beta = (1 + beta^2) P R / (beta^2 P + R), 0 when P + R = 0.
pub fn f_beta(precision: f64, recall: f64, beta: f64) -> f64 {
    let denom = beta * beta * precision + recall;
    if denom == 0.0 {
        return 0.0;
    }
    (1.0 + beta * beta) * precision * recall / denom
}

/// Pooled confusion counts of one category.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl Confusion {
    pub fn add(&mut self, other: &Confusion) {
        self.tp += other.tp;
        self.fp += other.fp;
        self.fn_ += other.fn_;
    }

    /// True iff the category has any positive-labeled point.
    pub fn has_positives(&self) -> bool {
        self.tp + self.fn_ > 0
    }

    /// tp / (tp + fp); 0 when nothing was predicted positive.
    pub fn precision(&self) -> f64 {
        if self.tp + self.fp == 0 {
            return 0.0;
        }
        self.tp as f64 / (self.tp + self.fp) as f64
    }

    /// tp / (tp + fn); 0 when the category is empty.
    pub fn recall(&self) -> f64 {
        if self.tp + self.fn_ == 0 {
            return 0.0;
        }
        self.tp as f64 / (self.tp + self.fn_) as f64
    }

    pub fn f_beta(&self, beta: f64) -> f64 {
        f_beta(self.precision(), self.recall(), beta)
    }
}

/// Confusion counts of all four categories over one aligned
/// (labels, predictions) pair. `fp` is shared.
pub fn confusion_by_category(labels: &[Label], predictions: &[bool]) -> Result<[Confusion; 4]> {
    if labels.len() != predictions.len() {
        return Err(Error::LengthMismatch {
            expected: labels.len(),
            got: predictions.len(),
        });
    }
    confusion_from_points(
        point_classes(labels)
            .into_iter()
            .zip(predictions.iter().copied()),
    )
}

/// Confusion counts from pre-classified points.
pub fn confusion_from_points<I>(points: I) -> Result<[Confusion; 4]>
where
    I: IntoIterator<Item = (PointClass, bool)>,
{
    let mut by_category = [Confusion::default(); 4];
    let mut fp = 0u64;
    for (class, predicted) in points {
        match (class, predicted) {
            (PointClass::Negative, true) => fp += 1,
            (PointClass::Negative, false) | (PointClass::Excluded, _) => {}
            (PointClass::Positive(c), true) => by_category[c.index()].tp += 1,
            (PointClass::Positive(c), false) => by_category[c.index()].fn_ += 1,
        }
    }
    for confusion in &mut by_category {
        confusion.fp = fp;
    }
    Ok(by_category)
}

/// Confusion counts of one category only.
pub fn category_confusion(
    labels: &[Label],
    predictions: &[bool],
    category: LengthCategory,
) -> Result<Confusion> {
    Ok(confusion_by_category(labels, predictions)?[category.index()])
}

/// Derived metrics of one category.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CategoryMetrics {
    pub category: LengthCategory,
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub precision: f64,
    pub recall: f64,
    pub f_beta: f64,
    pub beta: f64,
}

impl CategoryMetrics {
    pub fn from_confusion(category: LengthCategory, c: &Confusion, beta: f64) -> CategoryMetrics {
        CategoryMetrics {
            category,
            tp: c.tp,
            fp: c.fp,
            fn_: c.fn_,
            precision: c.precision(),
            recall: c.recall(),
            f_beta: c.f_beta(beta),
            beta,
        }
    }
}

/// Metrics of one evaluation, pooled over stations.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetMetrics {
    /// One entry per category; `None` where the pooled data has no
    /// positive-labeled point (such categories are excluded from the
    /// average rather than scored 0).
    pub per_category: [Option<CategoryMetrics>; 4],
    /// Unweighted mean F over the populated categories.
    pub average_f: f64,
    pub beta: f64,
}

/// Pools confusion counts over stations and averages F over the populated
/// categories. Errors when no category has any positive point.
pub fn dataset_metrics(stations: &[(&[Label], &[bool])]) -> Result<DatasetMetrics> {
    let mut pooled = [Confusion::default(); 4];
    for (labels, predictions) in stations {
        let per_station = confusion_by_category(labels, predictions)?;
        for (acc, c) in pooled.iter_mut().zip(&per_station) {
            acc.add(c);
        }
    }
    metrics_from_confusions(&pooled, OBJECTIVE_BETA)
}

/// Metrics from already-pooled confusion counts.
pub fn metrics_from_confusions(pooled: &[Confusion; 4], beta: f64) -> Result<DatasetMetrics> {
    let mut per_category = [None; 4];
    let mut sum = 0.0;
    let mut populated = 0usize;
    for (category, confusion) in LengthCategory::ALL.iter().zip(pooled) {
        if confusion.has_positives() {
            let metrics = CategoryMetrics::from_confusion(*category, confusion, beta);
            sum += metrics.f_beta;
            populated += 1;
            per_category[category.index()] = Some(metrics);
        }
    }
    if populated == 0 {
        return Err(Error::NoPositives);
    }
    Ok(DatasetMetrics {
        per_category,
        average_f: sum / populated as f64,
        beta,
    })
}

/// Rank-based (Mann-Whitney) AUC per category from pooled
/// (effective score, point class) pairs; `None` where a category has no
/// positives or no negatives. Ties receive averaged ranks.
pub fn category_auc_points(points: &[(f64, PointClass)]) -> [Option<f64>; 4] {
    // Negatives are shared by every category; sort once.
    let mut order: Vec<usize> = (0..points.len())
        .filter(|&i| points[i].1 != PointClass::Excluded)
        .collect();
    order.sort_by(|&a, &b| points[a].0.total_cmp(&points[b].0));

    let mut result = [None; 4];
    for category in LengthCategory::ALL {
        // Evaluation set of this category: negatives plus its positives.
        let eligible: Vec<usize> = order
            .iter()
            .copied()
            .filter(|&i| match points[i].1 {
                PointClass::Negative => true,
                PointClass::Positive(c) => c == category,
                PointClass::Excluded => false,
            })
            .collect();
        let n_pos = eligible
            .iter()
            .filter(|&&i| matches!(points[i].1, PointClass::Positive(_)))
            .count();
        let n_neg = eligible.len() - n_pos;
        if n_pos == 0 || n_neg == 0 {
            continue;
        }
        // Average ranks over tie groups, then sum the positive ranks.
        let mut rank_sum_pos = 0.0;
        let mut start = 0;
        while start < eligible.len() {
            let mut end = start + 1;
            while end < eligible.len() && points[eligible[end]].0 == points[eligible[start]].0 {
                end += 1;
            }
            // 1-based ranks start+1 ..= end share the average rank.
            let avg_rank = (start + 1 + end) as f64 / 2.0;
            for &i in &eligible[start..end] {
                if matches!(points[i].1, PointClass::Positive(_)) {
                    rank_sum_pos += avg_rank;
                }
            }
            start = end;
        }
        let n_pos_f = n_pos as f64;
        let auc = (rank_sum_pos - n_pos_f * (n_pos_f + 1.0) / 2.0) / (n_pos_f * n_neg as f64);
        result[category.index()] = Some(auc);
    }
    result
}

/// AUC per category for one aligned (labels, effective scores) pair.
pub fn category_auc(labels: &[Label], effective_scores: &[f64]) -> Result<[Option<f64>; 4]> {
    if labels.len() != effective_scores.len() {
        return Err(Error::LengthMismatch {
            expected: labels.len(),
            got: effective_scores.len(),
        });
    }
    let points: Vec<(f64, PointClass)> = effective_scores
        .iter()
        .copied()
        .zip(point_classes(labels))
        .collect();
    Ok(category_auc_points(&points))
}

/// Mean and population standard deviation over bootstrap iterations,
/// accumulated with Welford's algorithm so constant inputs give std = 0
/// exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone, Copy, Default)]
struct Welford {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Welford {
    fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn finish(&self) -> Option<MeanStd> {
        if self.count == 0 {
            return None;
        }
        Some(MeanStd {
            mean: self.mean,
            std: (self.m2 / self.count as f64).sqrt(),
        })
    }
}

/// Bootstrap distribution of one category's metrics. A category is only
/// accumulated in iterations whose resample contains positives of it;
/// `defined_iterations` counts those.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BootstrapCategory {
    pub category: LengthCategory,
    pub precision: MeanStd,
    pub recall: MeanStd,
    pub f_beta: MeanStd,
    pub defined_iterations: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BootstrapReport {
    pub iterations: u64,
    pub seed: u64,
    pub beta: f64,
    pub per_category: [Option<BootstrapCategory>; 4],
    pub average_f: MeanStd,
}

/// Resamples stations with replacement `iterations` times and reports the
/// mean and population std of every metric. Each iteration draws from its
/// own RNG stream, so results do not depend on evaluation order.
pub fn bootstrap(
    station_confusions: &[[Confusion; 4]],
    iterations: u64,
    seed: u64,
) -> Result<BootstrapReport> {
    if station_confusions.is_empty() {
        return Err(Error::Config("bootstrap needs at least one station".into()));
    }
    let n = station_confusions.len();
    let beta = OBJECTIVE_BETA;
    let mut precision_acc = [Welford::default(); 4];
    let mut recall_acc = [Welford::default(); 4];
    let mut f_acc = [Welford::default(); 4];
    let mut average_acc = Welford::default();

    for iteration in 0..iterations {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(iteration);
        let mut pooled = [Confusion::default(); 4];
        for _ in 0..n {
            let pick = rng.gen_range(0..n);
            for (acc, c) in pooled.iter_mut().zip(&station_confusions[pick]) {
                acc.add(c);
            }
        }
        let mut sum = 0.0;
        let mut populated = 0usize;
        for (i, confusion) in pooled.iter().enumerate() {
            if confusion.has_positives() {
                let f = confusion.f_beta(beta);
                precision_acc[i].push(confusion.precision());
                recall_acc[i].push(confusion.recall());
                f_acc[i].push(f);
                sum += f;
                populated += 1;
            }
        }
        if populated > 0 {
            average_acc.push(sum / populated as f64);
        }
    }

    let mut per_category = [None, None, None, None];
    for category in LengthCategory::ALL {
        let i = category.index();
        if let (Some(precision), Some(recall), Some(f)) = (
            precision_acc[i].finish(),
            recall_acc[i].finish(),
            f_acc[i].finish(),
        ) {
            per_category[i] = Some(BootstrapCategory {
                category,
                precision,
                recall,
                f_beta: f,
                defined_iterations: f_acc[i].count,
            });
        }
    }
    let average_f = average_acc.finish().ok_or(Error::NoPositives)?;
    Ok(BootstrapReport {
        iterations,
        seed,
        beta,
        per_category,
        average_f,
    })
}
