//! Station CSV ingestion, apparent-power computation, synthetic station
//! generation, and the stratified train/validation/test split.
//!
//! Station CSV schema: header `timestamp,P,Q,V,I,S,B,label`, one file per
//! station named `<station_id>.csv`. Empty cells are missing values;
//! timestamps are ISO-8601. A first line `# signed` declares that the
//! station's metering reports signs even if no negative value occurs.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use chrono::NaiveDateTime;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{event_runs, Label, StationSeries};

/// Apparent power from active and reactive power: `sign(P) * sqrt(P^2+Q^2)`,
/// with `sign(0) = +1`.
pub fn apparent_power(p: f64, q: f64) -> Result<f64> {
    if !p.is_finite() || !q.is_finite() {
        return Err(Error::Config(format!("non-finite P/Q pair ({p}, {q})")));
    }
    let sign = if p < 0.0 { -1.0 } else { 1.0 };
    Ok(sign * (p * p + q * q).sqrt())
}

/// Apparent power in kW from phase voltage (V) and current (A):
/// `sqrt(3) * V * I / 1000`. Always nonnegative; sign correction happens
/// downstream.
pub fn apparent_power_vi(v: f64, i: f64) -> Result<f64> {
    if !v.is_finite() || !i.is_finite() {
        return Err(Error::Config(format!("non-finite V/I pair ({v}, {i})")));
    }
    if i < 0.0 {
        return Err(Error::Config(format!("negative current {i}")));
    }
    Ok(3.0_f64.sqrt() * v * i / 1000.0)
}

const TIMESTAMP_FMT: &str = "%Y-%m-%dT%H:%M:%S";

fn parse_opt_f64(field: &str, row: usize, name: &str) -> Result<Option<f64>> {
    let trimmed = field.trim();
    if trimmed.is_empty() {
        return Ok(None);
    }
    trimmed
        .parse::<f64>()
        .map(Some)
        .map_err(|_| Error::RejectedRow {
            row,
            message: format!("unparseable {name} value {trimmed:?}"),
        })
}

/// Reads one station CSV. The S column is taken verbatim when present,
/// otherwise computed from (P, Q), otherwise from (V, I).
pub fn load_station(path: &Path) -> Result<StationSeries> {
    let station_id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let file = std::fs::File::open(path)?;
    let mut reader = BufReader::new(file);

    let mut first_line = String::new();
    reader.read_line(&mut first_line)?;
    let declared_signed = first_line.trim_start().starts_with("# signed");
    let header_line = if declared_signed {
        let mut line = String::new();
        reader.read_line(&mut line)?;
        line
    } else {
        first_line
    };
    let expected = "timestamp,P,Q,V,I,S,B,label";
    if header_line.trim() != expected {
        return Err(Error::Schema {
            path: path.display().to_string(),
            message: format!("expected header {expected:?}, got {:?}", header_line.trim()),
        });
    }

    let mut csv_reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(reader);

    let mut timestamps = Vec::new();
    let mut s_values = Vec::new();
    let mut b_values = Vec::new();
    let mut labels = Vec::new();
    for (idx, record) in csv_reader.records().enumerate() {
        let row = idx + 1;
        let record = record?;
        if record.len() != 8 {
            return Err(Error::Schema {
                path: path.display().to_string(),
                message: format!("row {row} has {} fields, expected 8", record.len()),
            });
        }
        let ts = NaiveDateTime::parse_from_str(record[0].trim(), TIMESTAMP_FMT).map_err(|e| {
            Error::RejectedRow {
                row,
                message: format!("bad timestamp {:?}: {e}", &record[0]),
            }
        })?;
        let p = parse_opt_f64(&record[1], row, "P")?;
        let q = parse_opt_f64(&record[2], row, "Q")?;
        let v = parse_opt_f64(&record[3], row, "V")?;
        let i = parse_opt_f64(&record[4], row, "I")?;
        let s = parse_opt_f64(&record[5], row, "S")?;
        let b = parse_opt_f64(&record[6], row, "B")?;

        let s = match (s, p, q, v, i) {
            (Some(s), ..) => s,
            (None, Some(p), Some(q), _, _) => apparent_power(p, q).map_err(|_| {
                Error::RejectedRow {
                    row,
                    message: format!("non-finite P/Q pair ({p}, {q})"),
                }
            })?,
            (None, _, _, Some(v), Some(i)) => {
                apparent_power_vi(v, i).map_err(|e| Error::RejectedRow {
                    row,
                    message: e.to_string(),
                })?
            }
            _ => {
                return Err(Error::RejectedRow {
                    row,
                    message: "row provides none of S, (P,Q), or (V,I)".into(),
                })
            }
        };
        if !s.is_finite() {
            return Err(Error::RejectedRow {
                row,
                message: format!("non-finite S value {s}"),
            });
        }

        let label_field = record[7].trim();
        let label = label_field
            .parse::<i64>()
            .ok()
            .and_then(Label::from_code)
            .ok_or_else(|| Error::InvalidLabel {
                value: label_field.to_string(),
                row,
            })?;

        timestamps.push(ts);
        s_values.push(s);
        b_values.push(b.unwrap_or(f64::NAN));
        labels.push(label);
    }

    let sign_capable = declared_signed || s_values.iter().any(|&s| s < 0.0);
    let station = StationSeries {
        station_id,
        timestamps,
        s: s_values,
        b: b_values,
        labels,
        sign_capable,
    };
    station.validate()?;
    Ok(station)
}

/// Writes a station back out in the canonical CSV schema (S, B, label only).
pub fn write_station(path: &Path, station: &StationSeries) -> Result<()> {
    let mut file = std::fs::File::create(path)?;
    if station.sign_capable && !station.s.iter().any(|&s| s < 0.0) {
        writeln!(file, "# signed")?;
    }
    writeln!(file, "timestamp,P,Q,V,I,S,B,label")?;
    for i in 0..station.len() {
        let b = if station.b[i].is_nan() {
            String::new()
        } else {
            format!("{}", station.b[i])
        };
        writeln!(
            file,
            "{},,,,,{},{},{}",
            station.timestamps[i].format(TIMESTAMP_FMT),
            station.s[i],
            b,
            station.labels[i].code()
        )?;
    }
    Ok(())
}

/// Blueprint for one synthetic station: a seasonal base load with Gaussian
/// noise, an affinely distorted bottom-up load, and injected events per
/// length category. Short events dominate the mix in practice, long switch
/// events are rare.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticSpec {
    pub n_points: usize,
    /// First timestamp, ISO-8601; samples advance in 15-minute steps.
    #[serde(default = "default_start")]
    pub start: NaiveDateTime,
    pub base_level: f64,
    pub annual_amplitude: f64,
    pub daily_amplitude: f64,
    pub noise_sigma: f64,
    /// The measurement relates to the bottom-up load as s ~ slope * b + offset.
    pub bottom_up_slope: f64,
    pub bottom_up_offset: f64,
    pub bottom_up_noise_sigma: f64,
    /// Point anomalies (runs of 1..=24 samples).
    pub n_spikes: usize,
    pub spike_amplitude: f64,
    /// Short events (25..=288 samples).
    pub n_short_events: usize,
    pub short_event_amplitude: f64,
    /// Switch events: level shifts of 289..=4032 samples (C3) and
    /// 4033+ samples (C4).
    pub n_long_events: usize,
    pub n_very_long_events: usize,
    pub switch_amplitude: f64,
    /// Communication-error artifacts: constant repeated measurements and
    /// missing bottom-up gaps. Neither is labeled as an event.
    pub n_repeated_bursts: usize,
    pub repeated_burst_len: usize,
    pub n_missing_gaps: usize,
    pub missing_gap_len: usize,
    /// Runs labeled uncertain (5), with no injected disturbance.
    pub n_uncertain_runs: usize,
    /// Unsigned metering: the station reports |S| and relies on downstream
    /// sign correction.
    pub hide_sign: bool,
}

fn default_start() -> NaiveDateTime {
    chrono::NaiveDate::from_ymd_opt(2021, 1, 1)
        .unwrap()
        .and_hms_opt(0, 0, 0)
        .unwrap()
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            n_points: 12_000,
            start: default_start(),
            base_level: 1000.0,
            annual_amplitude: 200.0,
            daily_amplitude: 100.0,
            noise_sigma: 15.0,
            bottom_up_slope: 1.2,
            bottom_up_offset: 50.0,
            bottom_up_noise_sigma: 5.0,
            n_spikes: 6,
            spike_amplitude: 600.0,
            n_short_events: 2,
            short_event_amplitude: 400.0,
            n_long_events: 0,
            n_very_long_events: 0,
            switch_amplitude: 300.0,
            n_repeated_bursts: 1,
            repeated_burst_len: 8,
            n_missing_gaps: 1,
            missing_gap_len: 6,
            n_uncertain_runs: 0,
            hide_sign: false,
        }
    }
}

struct Placer {
    occupied: Vec<(usize, usize)>, // half-open, margin included
    n: usize,
}

impl Placer {
    fn new(n: usize) -> Self {
        Placer {
            occupied: Vec::new(),
            n,
        }
    }

    /// Reserve a free stretch of `len` samples, keeping `margin` clear
    /// samples around it. Returns the start index.
    fn place(&mut self, rng: &mut ChaCha8Rng, len: usize, margin: usize) -> Result<usize> {
        if len + 2 * margin >= self.n {
            return Err(Error::Generation(format!(
                "event of {len} samples does not fit in {} samples",
                self.n
            )));
        }
        for _ in 0..100_000 {
            let start = rng.gen_range(margin..self.n - len - margin);
            let lo = start - margin;
            let hi = start + len + margin;
            if self
                .occupied
                .iter()
                .all(|&(olo, ohi)| hi <= olo || lo >= ohi)
            {
                self.occupied.push((lo, hi));
                return Ok(start);
            }
        }
        Err(Error::Generation(
            "could not place all events without overlap".into(),
        ))
    }
}

/// Generates one synthetic station. Deterministic in (spec, seed); labels
/// mark exactly the injected event samples and injected events never overlap.
pub fn generate_synthetic(
    spec: &SyntheticSpec,
    station_id: &str,
    seed: u64,
) -> Result<StationSeries> {
    if spec.n_points == 0 {
        return Err(Error::Generation("n_points must be positive".into()));
    }
    if spec.bottom_up_slope == 0.0 {
        return Err(Error::Generation("bottom_up_slope must be nonzero".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = spec.n_points;
    let noise = Normal::new(0.0, spec.noise_sigma.max(f64::MIN_POSITIVE)).unwrap();
    let b_noise = Normal::new(0.0, spec.bottom_up_noise_sigma.max(f64::MIN_POSITIVE)).unwrap();

    // Clean seasonal load: annual plus daily sinusoid (96 samples per day).
    let annual_period = 35_040.0;
    let mut s_true: Vec<f64> = (0..n)
        .map(|i| {
            let t = i as f64;
            spec.base_level
                + spec.annual_amplitude * (2.0 * std::f64::consts::PI * t / annual_period).sin()
                + spec.daily_amplitude * (2.0 * std::f64::consts::PI * t / 96.0).sin()
                + noise.sample(&mut rng)
        })
        .collect();

    // Bottom-up tracks the clean load through the inverse affine map.
    let mut b: Vec<f64> = s_true
        .iter()
        .map(|&s| (s - spec.bottom_up_offset) / spec.bottom_up_slope + b_noise.sample(&mut rng))
        .collect();

    let mut labels = vec![Label::Normal; n];
    let mut placer = Placer::new(n);
    // Margin of 30 keeps runs separated even after nearby removals.
    let margin = 30;

    let inject = |rng: &mut ChaCha8Rng,
                      placer: &mut Placer,
                      s_true: &mut Vec<f64>,
                      labels: &mut Vec<Label>,
                      len_lo: usize,
                      len_hi: usize,
                      amplitude: f64|
     -> Result<()> {
        let len = rng.gen_range(len_lo..=len_hi);
        let start = placer.place(rng, len, margin)?;
        let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let amp = sign * amplitude * rng.gen_range(0.8..1.2);
        for i in start..start + len {
            s_true[i] += amp;
            labels[i] = Label::Event;
        }
        Ok(())
    };

    // Longest first so the rare long placements are not squeezed out.
    for _ in 0..spec.n_very_long_events {
        let hi = (n.saturating_sub(2 * margin + 1)).min(5000).max(4033);
        inject(&mut rng, &mut placer, &mut s_true, &mut labels, 4033, hi, spec.switch_amplitude)?;
    }
    for _ in 0..spec.n_long_events {
        inject(&mut rng, &mut placer, &mut s_true, &mut labels, 289, 1200, spec.switch_amplitude)?;
    }
    for _ in 0..spec.n_short_events {
        inject(&mut rng, &mut placer, &mut s_true, &mut labels, 25, 288, spec.short_event_amplitude)?;
    }
    for _ in 0..spec.n_spikes {
        inject(&mut rng, &mut placer, &mut s_true, &mut labels, 1, 24, spec.spike_amplitude)?;
    }
    for _ in 0..spec.n_uncertain_runs {
        let len = rng.gen_range(1..=24);
        let start = placer.place(&mut rng, len, margin)?;
        for label in labels.iter_mut().take(start + len).skip(start) {
            *label = Label::Uncertain;
        }
    }
    for _ in 0..spec.n_repeated_bursts {
        let len = spec.repeated_burst_len.max(1);
        let start = placer.place(&mut rng, len, margin)?;
        let value = s_true[start];
        for v in s_true.iter_mut().take(start + len).skip(start) {
            *v = value;
        }
    }
    for _ in 0..spec.n_missing_gaps {
        let len = spec.missing_gap_len.max(1);
        let start = placer.place(&mut rng, len, margin)?;
        for v in b.iter_mut().take(start + len).skip(start) {
            *v = f64::NAN;
        }
    }

    let s: Vec<f64> = if spec.hide_sign {
        s_true.iter().map(|v| v.abs()).collect()
    } else {
        s_true
    };

    let station = StationSeries {
        station_id: station_id.to_string(),
        timestamps: (0..n)
            .map(|i| spec.start + chrono::Duration::minutes(15 * i as i64))
            .collect(),
        s,
        b,
        labels,
        sign_capable: !spec.hide_sign,
    };
    station.validate()?;
    Ok(station)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Validation,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Validation, Split::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Validation => "validation",
            Split::Test => "test",
        }
    }

    pub fn from_str(s: &str) -> Option<Self> {
        match s {
            "train" => Some(Split::Train),
            "validation" => Some(Split::Validation),
            "test" => Some(Split::Test),
            _ => None,
        }
    }

    fn index(self) -> usize {
        match self {
            Split::Train => 0,
            Split::Validation => 1,
            Split::Test => 2,
        }
    }
}

/// Assignment of every station to exactly one split.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitAssignment {
    pub map: BTreeMap<String, Split>,
}

impl SplitAssignment {
    pub fn stations_in(&self, split: Split) -> Vec<&str> {
        self.map
            .iter()
            .filter(|(_, &s)| s == split)
            .map(|(id, _)| id.as_str())
            .collect()
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut file = std::fs::File::create(path)?;
        writeln!(file, "station_id,split")?;
        for (id, split) in &self.map {
            writeln!(file, "{},{}", id, split.as_str())?;
        }
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut reader = csv::Reader::from_path(path)?;
        let mut map = BTreeMap::new();
        for (idx, record) in reader.records().enumerate() {
            let record = record?;
            let split = Split::from_str(record[1].trim()).ok_or_else(|| Error::RejectedRow {
                row: idx + 1,
                message: format!("unknown split {:?}", &record[1]),
            })?;
            map.insert(record[0].trim().to_string(), split);
        }
        Ok(SplitAssignment { map })
    }
}

fn station_event_counts(station: &StationSeries) -> [usize; 4] {
    let mut counts = [0usize; 4];
    for run in event_runs(&station.labels, Label::Event) {
        counts[run.category.index()] += 1;
    }
    counts
}

/// Greedy stratified three-way split. Categories are processed from longest
/// (C4) to shortest (C1); each unassigned station holding events of the
/// current category goes to the split with the fewest events of that
/// category so far (ties: smaller split, then split index). Event-free
/// stations are distributed last to equalize split sizes.
pub fn stratified_split(stations: &[StationSeries], seed: u64) -> SplitAssignment {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..stations.len()).collect();
    order.shuffle(&mut rng);

    let counts: Vec<[usize; 4]> = stations.iter().map(station_event_counts).collect();
    let mut assigned: Vec<Option<Split>> = vec![None; stations.len()];
    let mut split_event_counts = [[0usize; 4]; 3];
    let mut split_sizes = [0usize; 3];

    let assign = |idx: usize,
                      split: Split,
                      assigned: &mut Vec<Option<Split>>,
                      split_event_counts: &mut [[usize; 4]; 3],
                      split_sizes: &mut [usize; 3]| {
        assigned[idx] = Some(split);
        split_sizes[split.index()] += 1;
        for cat in 0..4 {
            split_event_counts[split.index()][cat] += counts[idx][cat];
        }
    };

    for cat in (0..4).rev() {
        for &idx in &order {
            if assigned[idx].is_some() || counts[idx][cat] == 0 {
                continue;
            }
            let best = Split::ALL
                .iter()
                .copied()
                .min_by_key(|s| {
                    (
                        split_event_counts[s.index()][cat],
                        split_sizes[s.index()],
                        s.index(),
                    )
                })
                .unwrap();
            assign(idx, best, &mut assigned, &mut split_event_counts, &mut split_sizes);
        }
    }
    for &idx in &order {
        if assigned[idx].is_some() {
            continue;
        }
        let best = Split::ALL
            .iter()
            .copied()
            .min_by_key(|s| (split_sizes[s.index()], s.index()))
            .unwrap();
        assign(idx, best, &mut assigned, &mut split_event_counts, &mut split_sizes);
    }

    let mut map = BTreeMap::new();
    for (idx, split) in assigned.into_iter().enumerate() {
        map.insert(stations[idx].station_id.clone(), split.unwrap());
    }
    SplitAssignment { map }
}

/// Per-split event and label-1 tallies by length category.
#[derive(Debug, Clone, Default, Serialize)]
pub struct SplitTally {
    pub event_counts: [[usize; 4]; 3],
    pub label1_counts: [[usize; 4]; 3],
    pub split_sizes: [usize; 3],
}

pub fn split_tally(stations: &[StationSeries], assignment: &SplitAssignment) -> SplitTally {
    let mut tally = SplitTally::default();
    for station in stations {
        let Some(&split) = assignment.map.get(&station.station_id) else {
            continue;
        };
        tally.split_sizes[split.index()] += 1;
        for run in event_runs(&station.labels, Label::Event) {
            tally.event_counts[split.index()][run.category.index()] += 1;
            tally.label1_counts[split.index()][run.category.index()] += run.len;
        }
    }
    tally
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::LengthCategory;

    #[test]
    fn apparent_power_triangle() {
        assert_eq!(apparent_power(3.0, 4.0).unwrap(), 5.0);
        assert_eq!(apparent_power(-3.0, 4.0).unwrap(), -5.0);
        assert_eq!(apparent_power(0.0, 0.0).unwrap(), 0.0);
        assert!(apparent_power(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn apparent_power_sign_of_zero_is_positive() {
        assert!(apparent_power(0.0, 4.0).unwrap() > 0.0);
    }

    #[test]
    fn apparent_power_magnitude_identity() {
        // S^2 == P^2 + Q^2 up to relative 1e-9.
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let p = rng.gen_range(-1e4..1e4);
            let q = rng.gen_range(-1e4..1e4);
            let s = apparent_power(p, q).unwrap();
            let lhs = s * s;
            let rhs = p * p + q * q;
            assert!((lhs - rhs).abs() <= 1e-9 * rhs.max(1.0));
        }
    }

    #[test]
    fn apparent_power_vi_values() {
        assert_eq!(apparent_power_vi(0.0, 5.0).unwrap(), 0.0);
        assert!((apparent_power_vi(400.0, 10.0).unwrap() - 6.9282032302755105).abs() < 1e-9);
        assert!((apparent_power_vi(10_000.0, 100.0).unwrap() - 1732.0508075688772).abs() < 1e-6);
        assert!(apparent_power_vi(400.0, -1.0).is_err());
    }

    #[test]
    fn synthetic_is_deterministic() {
        let spec = SyntheticSpec::default();
        let a = generate_synthetic(&spec, "st001", 42).unwrap();
        let b = generate_synthetic(&spec, "st001", 42).unwrap();
        assert_eq!(a.s, b.s);
        assert_eq!(a.b.len(), b.b.len());
        assert_eq!(a.labels, b.labels);
        let c = generate_synthetic(&spec, "st001", 43).unwrap();
        assert_ne!(a.s, c.s);
    }

    #[test]
    fn synthetic_zero_events_all_normal() {
        let spec = SyntheticSpec {
            n_spikes: 0,
            n_short_events: 0,
            n_long_events: 0,
            n_very_long_events: 0,
            n_uncertain_runs: 0,
            ..SyntheticSpec::default()
        };
        let st = generate_synthetic(&spec, "st001", 1).unwrap();
        assert!(st.labels.iter().all(|&l| l == Label::Normal));
    }

    #[test]
    fn synthetic_event_lengths_match_injection() {
        let spec = SyntheticSpec {
            n_points: 8000,
            n_spikes: 3,
            n_short_events: 2,
            n_long_events: 1,
            n_very_long_events: 0,
            n_repeated_bursts: 0,
            n_missing_gaps: 0,
            ..SyntheticSpec::default()
        };
        let st = generate_synthetic(&spec, "st001", 5).unwrap();
        let runs = event_runs(&st.labels, Label::Event);
        let mut by_cat = [0usize; 4];
        for run in &runs {
            by_cat[run.category.index()] += 1;
        }
        assert_eq!(by_cat, [3, 2, 1, 0]);
        // Label-1 sample count equals the sum of injected event lengths.
        let total: usize = runs.iter().map(|r| r.len).sum();
        let label1 = st.labels.iter().filter(|&&l| l == Label::Event).count();
        assert_eq!(total, label1);
    }

    #[test]
    fn synthetic_infeasible_spec_errors() {
        let spec = SyntheticSpec {
            n_points: 100,
            n_very_long_events: 1,
            ..SyntheticSpec::default()
        };
        assert!(matches!(
            generate_synthetic(&spec, "st001", 1),
            Err(Error::Generation(_))
        ));
    }

    #[test]
    fn station_csv_round_trip() {
        let spec = SyntheticSpec {
            n_points: 500,
            n_spikes: 2,
            n_short_events: 0,
            n_missing_gaps: 1,
            missing_gap_len: 4,
            ..SyntheticSpec::default()
        };
        let st = generate_synthetic(&spec, "st007", 9).unwrap();
        let dir = std::env::temp_dir().join(format!("loadseg-test-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("st007.csv");
        write_station(&path, &st).unwrap();
        let loaded = load_station(&path).unwrap();
        assert_eq!(loaded.station_id, "st007");
        assert_eq!(loaded.len(), st.len());
        assert_eq!(loaded.labels, st.labels);
        assert_eq!(loaded.sign_capable, st.sign_capable);
        for i in 0..st.len() {
            assert!((loaded.s[i] - st.s[i]).abs() < 1e-12);
            assert_eq!(loaded.b[i].is_nan(), st.b[i].is_nan());
        }
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn load_station_computes_s_from_pq_and_rejects_bad_labels() {
        let dir = std::env::temp_dir().join(format!("loadseg-test-pq-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("stpq.csv");
        std::fs::write(
            &path,
            "timestamp,P,Q,V,I,S,B,label\n\
             2021-01-01T00:00:00,3,4,,,,2.5,0\n\
             2021-01-01T00:15:00,-3,4,,,,2.5,1\n",
        )
        .unwrap();
        let st = load_station(&path).unwrap();
        assert_eq!(st.s, vec![5.0, -5.0]);
        assert!(st.sign_capable);

        std::fs::write(
            &path,
            "timestamp,P,Q,V,I,S,B,label\n2021-01-01T00:00:00,,,,,1.0,1.0,2\n",
        )
        .unwrap();
        let err = load_station(&path).unwrap_err();
        assert!(matches!(err, Error::InvalidLabel { row: 1, .. }));
        std::fs::remove_dir_all(&dir).ok();
    }

    fn event_station(id: &str, cat: LengthCategory, n: usize) -> StationSeries {
        let len = match cat {
            LengthCategory::C1 => 10,
            LengthCategory::C2 => 100,
            LengthCategory::C3 => 400,
            LengthCategory::C4 => 4100,
        };
        let mut labels = vec![Label::Normal; n];
        for label in labels.iter_mut().take(100 + len).skip(100) {
            *label = Label::Event;
        }
        let start = default_start();
        StationSeries {
            station_id: id.to_string(),
            timestamps: (0..n)
                .map(|i| start + chrono::Duration::minutes(15 * i as i64))
                .collect(),
            s: vec![1.0; n],
            b: vec![1.0; n],
            labels,
            sign_capable: true,
        }
    }

    #[test]
    fn stratified_split_balances_c4_events() {
        let stations: Vec<StationSeries> = (0..3)
            .map(|i| event_station(&format!("st{i:03}"), LengthCategory::C4, 10_000))
            .collect();
        let assignment = stratified_split(&stations, 42);
        let mut splits: Vec<Split> = assignment.map.values().copied().collect();
        splits.sort();
        splits.dedup();
        assert_eq!(splits.len(), 3, "one station per split");
    }

    #[test]
    fn stratified_split_equalizes_event_free_stations() {
        let stations: Vec<StationSeries> = (0..6)
            .map(|i| {
                let mut st = event_station(&format!("st{i:03}"), LengthCategory::C1, 500);
                st.labels = vec![Label::Normal; 500];
                st
            })
            .collect();
        let assignment = stratified_split(&stations, 1);
        for split in Split::ALL {
            assert_eq!(assignment.stations_in(split).len(), 2);
        }
    }

    #[test]
    fn stratified_split_is_a_partition() {
        let mut stations = Vec::new();
        for i in 0..12 {
            let cat = LengthCategory::ALL[i % 4];
            stations.push(event_station(&format!("st{i:03}"), cat, 10_000));
        }
        let assignment = stratified_split(&stations, 9);
        assert_eq!(assignment.map.len(), stations.len());
        let sizes: Vec<usize> = Split::ALL
            .iter()
            .map(|&s| assignment.stations_in(s).len())
            .collect();
        let max = sizes.iter().max().unwrap();
        let min = sizes.iter().min().unwrap();
        assert!(max - min <= 1, "sizes {sizes:?}");
        // Reproducible under the same seed.
        assert_eq!(assignment, stratified_split(&stations, 9));
    }

    #[test]
    fn tally_sums_match_whole_dataset() {
        let mut stations = Vec::new();
        for i in 0..9 {
            let cat = LengthCategory::ALL[i % 4];
            stations.push(event_station(&format!("st{i:03}"), cat, 10_000));
        }
        let assignment = stratified_split(&stations, 3);
        let tally = split_tally(&stations, &assignment);
        for cat in 0..4 {
            let total_events: usize = (0..3).map(|s| tally.event_counts[s][cat]).sum();
            let recount: usize = stations
                .iter()
                .map(|st| {
                    event_runs(&st.labels, Label::Event)
                        .iter()
                        .filter(|r| r.category.index() == cat)
                        .count()
                })
                .sum();
            assert_eq!(total_events, recount);
            let total_label1: usize = (0..3).map(|s| tally.label1_counts[s][cat]).sum();
            let recount_label1: usize = stations
                .iter()
                .map(|st| {
                    event_runs(&st.labels, Label::Event)
                        .iter()
                        .filter(|r| r.category.index() == cat)
                        .map(|r| r.len)
                        .sum::<usize>()
                })
                .sum();
            assert_eq!(total_label1, recount_label1);
        }
    }

    #[test]
    fn split_csv_round_trip() {
        let mut map = BTreeMap::new();
        map.insert("a".to_string(), Split::Train);
        map.insert("b".to_string(), Split::Test);
        let assignment = SplitAssignment { map };
        let dir = std::env::temp_dir().join(format!("loadseg-split-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("split.csv");
        assignment.write_csv(&path).unwrap();
        assert_eq!(SplitAssignment::read_csv(&path).unwrap(), assignment);
        std::fs::remove_dir_all(&dir).ok();
    }
}
