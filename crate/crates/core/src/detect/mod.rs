//! The three base detectors. Each maps a [`crate::model::DifferenceSeries`]
//! to a [`crate::model::ScoreSeries`].

mod binseg;
mod iforest;
mod scale;
mod spc;

pub use binseg::{
    best_single_split, binseg_breakpoints, binseg_score, find_reference_value, Breakpoints,
};
pub use iforest::{if_score_per_station, if_score_pooled, IsolationForestModel};
pub use scale::{robust_scale, RobustScaleParams};
pub use spc::spc_score;
