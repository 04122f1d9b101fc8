//! Shared domain types: station series, scores, predictions, labels, the
//! event-length taxonomy, and detector/threshold configuration.

use chrono::NaiveDateTime;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ground-truth mark for a single 15-minute measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    /// No anomaly or switch event (code 0).
    Normal,
    /// Anomaly or switch event (code 1).
    Event,
    /// The labeler was uncertain (code 5); excluded from all metrics.
    Uncertain,
}

impl Label {
    pub fn from_code(code: i64) -> Option<Self> {
        match code {
            0 => Some(Label::Normal),
            1 => Some(Label::Event),
            5 => Some(Label::Uncertain),
            _ => None,
        }
    }

    pub fn code(self) -> u8 {
        match self {
            Label::Normal => 0,
            Label::Event => 1,
            Label::Uncertain => 5,
        }
    }
}

/// Event-duration bins, by run length in 15-minute samples.
///
/// C1: 1..=24 (15 min to 6 h), C2: 25..=288 (6 h to 3 d),
/// C3: 289..=4032 (3 to 42 d), C4: 4033.. (42 d and longer).
///
/// Run lengths are counted on the post-removal sample sequence, so an event
/// interrupted by removed timestamps counts as separate runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LengthCategory {
    C1,
    C2,
    C3,
    C4,
}

impl LengthCategory {
    pub const ALL: [LengthCategory; 4] = [
        LengthCategory::C1,
        LengthCategory::C2,
        LengthCategory::C3,
        LengthCategory::C4,
    ];

    /// Category of a run of `len` samples. `len` must be >= 1.
    pub fn from_run_length(len: usize) -> Self {
        assert!(len >= 1, "run length must be at least 1");
        match len {
            1..=24 => LengthCategory::C1,
            25..=288 => LengthCategory::C2,
            289..=4032 => LengthCategory::C3,
            _ => LengthCategory::C4,
        }
    }

    pub fn index(self) -> usize {
        match self {
            LengthCategory::C1 => 0,
            LengthCategory::C2 => 1,
            LengthCategory::C3 => 2,
            LengthCategory::C4 => 3,
        }
    }

    /// Human-readable duration label, assuming 15-minute samples.
    pub fn duration_label(self) -> &'static str {
        match self {
            LengthCategory::C1 => "15m-6h",
            LengthCategory::C2 => "6h-3d",
            LengthCategory::C3 => "3d-42d",
            LengthCategory::C4 => "42d+",
        }
    }
}

/// A maximal contiguous run of one label value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EventRun {
    pub start: usize,
    /// Inclusive end index.
    pub end: usize,
    pub len: usize,
    pub category: LengthCategory,
}

/// Maximal contiguous runs of `target` in `labels`, annotated with their
/// length category. Runs are disjoint and ordered; empty input gives an
/// empty list.
pub fn event_runs(labels: &[Label], target: Label) -> Vec<EventRun> {
    let mut runs = Vec::new();
    let mut start = None;
    for (i, &label) in labels.iter().enumerate() {
        match (label == target, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                let len = i - s;
                runs.push(EventRun {
                    start: s,
                    end: i - 1,
                    len,
                    category: LengthCategory::from_run_length(len),
                });
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        let len = labels.len() - s;
        runs.push(EventRun {
            start: s,
            end: labels.len() - 1,
            len,
            category: LengthCategory::from_run_length(len),
        });
    }
    runs
}

/// Role of a point in the stratified metrics of one evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointClass {
    /// Label 0: a negative for every category.
    Negative,
    /// Label 1: a positive for exactly the category of its run.
    Positive(LengthCategory),
    /// Label 5: excluded everywhere.
    Excluded,
}

/// Per-point classification derived from the label runs.
pub fn point_classes(labels: &[Label]) -> Vec<PointClass> {
    let mut classes: Vec<PointClass> = labels
        .iter()
        .map(|l| match l {
            Label::Normal => PointClass::Negative,
            Label::Uncertain => PointClass::Excluded,
            Label::Event => PointClass::Excluded, // category filled below
        })
        .collect();
    for run in event_runs(labels, Label::Event) {
        for class in classes.iter_mut().take(run.end + 1).skip(run.start) {
            *class = PointClass::Positive(run.category);
        }
    }
    classes
}

/// Raw measurements for one primary substation.
#[derive(Debug, Clone)]
pub struct StationSeries {
    pub station_id: String,
    /// Strictly increasing, nominally 15 minutes apart (gaps allowed).
    pub timestamps: Vec<NaiveDateTime>,
    /// Apparent power in kW, signed by active power where metering allows.
    pub s: Vec<f64>,
    /// Bottom-up load in kW; NaN marks a missing value.
    pub b: Vec<f64>,
    pub labels: Vec<Label>,
    /// Whether the station's metering can report negative apparent power.
    pub sign_capable: bool,
}

impl StationSeries {
    pub fn len(&self) -> usize {
        self.timestamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.timestamps.len();
        for (name, len) in [
            ("s", self.s.len()),
            ("b", self.b.len()),
            ("labels", self.labels.len()),
        ] {
            if len != n {
                return Err(Error::Schema {
                    path: self.station_id.clone(),
                    message: format!("{name} has length {len}, expected {n}"),
                });
            }
        }
        for w in self.timestamps.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::Schema {
                    path: self.station_id.clone(),
                    message: format!("timestamps not strictly increasing at {}", w[1]),
                });
            }
        }
        Ok(())
    }
}

/// Preprocessed residual between the signed measurement and the rescaled
/// bottom-up load, aligned to the surviving timestamps.
#[derive(Debug, Clone)]
pub struct DifferenceSeries {
    pub station_id: String,
    pub timestamps: Vec<NaiveDateTime>,
    pub delta: Vec<f64>,
    pub carried_labels: Vec<Label>,
    /// Signed measurement values, retained for load estimation.
    pub carried_s: Vec<f64>,
}

impl DifferenceSeries {
    pub fn len(&self) -> usize {
        self.delta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.delta.is_empty()
    }

    /// Sub-series at the given (sorted) indices.
    pub fn subset(&self, indices: &[usize]) -> DifferenceSeries {
        DifferenceSeries {
            station_id: self.station_id.clone(),
            timestamps: indices.iter().map(|&i| self.timestamps[i]).collect(),
            delta: indices.iter().map(|&i| self.delta[i]).collect(),
            carried_labels: indices.iter().map(|&i| self.carried_labels[i]).collect(),
            carried_s: indices.iter().map(|&i| self.carried_s[i]).collect(),
        }
    }
}

/// Whether a detector's scores are all nonnegative (isolation forest) or
/// centered around zero (SPC, binary segmentation).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Polarity {
    NonNegative,
    ZeroCentered,
}

/// Real-valued per-point anomaly scores from one detector.
#[derive(Debug, Clone)]
pub struct ScoreSeries {
    pub station_id: String,
    pub scores: Vec<f64>,
    pub polarity: Polarity,
}

impl ScoreSeries {
    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    /// Score used for one-sided thresholding and ranking: |z| for
    /// zero-centered scores, z itself otherwise.
    pub fn effective(&self) -> Vec<f64> {
        match self.polarity {
            Polarity::NonNegative => self.scores.clone(),
            Polarity::ZeroCentered => self.scores.iter().map(|z| z.abs()).collect(),
        }
    }
}

/// Binary per-point predictions aligned to a difference series.
#[derive(Debug, Clone)]
pub struct PredictionSeries {
    pub station_id: String,
    pub predictions: Vec<bool>,
}

impl PredictionSeries {
    pub fn len(&self) -> usize {
        self.predictions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.predictions.is_empty()
    }
}

/// JSON-safe representation of a threshold that may be infinite (an
/// asymmetric optimum can disable one side entirely). Numbers pass through;
/// infinities become the strings "inf" / "-inf".
mod extended_f64 {
    use serde::{Deserialize, Deserializer, Serializer};

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Str(String),
    }

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_infinite() {
            s.serialize_str(if *x > 0.0 { "inf" } else { "-inf" })
        } else {
            s.serialize_f64(*x)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(x) => Ok(x),
            Repr::Str(s) => match s.as_str() {
                "inf" | "+inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                other => Err(serde::de::Error::custom(format!(
                    "expected a number, \"inf\", or \"-inf\", got {other:?}"
                ))),
            },
        }
    }
}

/// One- or two-sided decision rule on scores.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ThresholdSet {
    /// Flag where the effective score is >= theta.
    Symmetrical { theta: f64 },
    /// Flag where z >= theta_upper or z < theta_lower (zero-centered only).
    Asymmetrical {
        #[serde(with = "extended_f64")]
        theta_lower: f64,
        #[serde(with = "extended_f64")]
        theta_upper: f64,
    },
}

impl ThresholdSet {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ThresholdSet::Symmetrical { theta } => {
                if theta < 0.0 {
                    return Err(Error::Config(format!(
                        "symmetrical threshold must be nonnegative, got {theta}"
                    )));
                }
            }
            ThresholdSet::Asymmetrical {
                theta_lower,
                theta_upper,
            } => {
                if !(theta_lower < theta_upper) {
                    return Err(Error::Config(format!(
                        "asymmetrical thresholds require lower < upper, got ({theta_lower}, {theta_upper})"
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ThresholdStrategy {
    Symmetrical,
    Asymmetrical,
}

/// Statistical process control: robust-scaled distance to the median.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpcConfig {
    pub q_lower: f64,
    pub q_upper: f64,
    pub threshold_strategy: ThresholdStrategy,
}

impl Default for SpcConfig {
    fn default() -> Self {
        SpcConfig {
            q_lower: 15.0,
            q_upper: 85.0,
            threshold_strategy: ThresholdStrategy::Symmetrical,
        }
    }
}

/// Isolation forest, either one forest per station or a single pooled
/// forest over robust-scaled difference vectors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IfConfig {
    pub n_estimators: usize,
    pub pooled: bool,
    /// Scaling quantiles; used only when pooled.
    pub q_lower: f64,
    pub q_upper: f64,
    /// Isolation-forest scores are nonnegative, so only symmetrical applies.
    pub threshold_strategy: ThresholdStrategy,
}

impl Default for IfConfig {
    fn default() -> Self {
        IfConfig {
            n_estimators: 1000,
            pooled: false,
            q_lower: 15.0,
            q_upper: 85.0,
            threshold_strategy: ThresholdStrategy::Symmetrical,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReferencePoint {
    Mean,
    Median,
    LongestMean,
    LongestMedian,
}

/// Segment cost function used in the binary-segmentation gain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CostFn {
    /// Sum of absolute deviations from the segment median.
    L1,
}

/// How the stopping penalty is derived from beta and the series: either
/// `beta * T` or `beta * T * MAD(series)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PenaltyScaling {
    Linear,
    L1,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinsegConfig {
    pub beta: f64,
    /// Minimum segment size l, in samples.
    pub min_size: usize,
    /// Candidate splits are restricted to multiples of the jump j.
    pub jump: usize,
    pub cost: CostFn,
    pub q_lower: f64,
    pub q_upper: f64,
    pub reference_point: ReferencePoint,
    pub penalty_scaling: PenaltyScaling,
    pub threshold_strategy: ThresholdStrategy,
}

impl Default for BinsegConfig {
    fn default() -> Self {
        BinsegConfig {
            beta: 0.008,
            min_size: 200,
            jump: 10,
            cost: CostFn::L1,
            q_lower: 10.0,
            q_upper: 90.0,
            reference_point: ReferencePoint::Mean,
            penalty_scaling: PenaltyScaling::Linear,
            threshold_strategy: ThresholdStrategy::Asymmetrical,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum DetectorConfig {
    Spc(SpcConfig),
    IsolationForest(IfConfig),
    Binseg(BinsegConfig),
}

fn validate_quantiles(q_lower: f64, q_upper: f64) -> Result<()> {
    if !(0.0 <= q_lower && q_lower < q_upper && q_upper <= 100.0) {
        return Err(Error::Config(format!(
            "quantiles require 0 <= q_lower < q_upper <= 100, got ({q_lower}, {q_upper})"
        )));
    }
    Ok(())
}

impl DetectorConfig {
    pub fn validate(&self) -> Result<()> {
        match self {
            DetectorConfig::Spc(cfg) => validate_quantiles(cfg.q_lower, cfg.q_upper),
            DetectorConfig::IsolationForest(cfg) => {
                if cfg.n_estimators < 1 {
                    return Err(Error::Config("n_estimators must be at least 1".into()));
                }
                if cfg.threshold_strategy != ThresholdStrategy::Symmetrical {
                    return Err(Error::Config(
                        "isolation forest scores are nonnegative; only symmetrical thresholds apply"
                            .into(),
                    ));
                }
                if cfg.pooled {
                    validate_quantiles(cfg.q_lower, cfg.q_upper)?;
                }
                Ok(())
            }
            DetectorConfig::Binseg(cfg) => {
                validate_quantiles(cfg.q_lower, cfg.q_upper)?;
                if cfg.min_size < 2 {
                    return Err(Error::Config("min_size must be at least 2".into()));
                }
                if cfg.jump < 1 {
                    return Err(Error::Config("jump must be at least 1".into()));
                }
                if !(cfg.beta > 0.0) {
                    return Err(Error::Config("beta must be positive".into()));
                }
                Ok(())
            }
        }
    }

    pub fn polarity(&self) -> Polarity {
        match self {
            DetectorConfig::IsolationForest(_) => Polarity::NonNegative,
            _ => Polarity::ZeroCentered,
        }
    }
}
