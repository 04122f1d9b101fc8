//! JSON model files: the persisted outcome of threshold optimization.
//!
//! A model file holds one or more named methods, each either a single
//! detector or an ensemble, with the detector configuration, the selected
//! thresholds, and optimization metadata. The schema is stable and plain
//! enough to write by hand, e.g. to pin externally published operating
//! points.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::ensemble::EnsembleModel;
use crate::error::Result;
use crate::pipeline::SingleModel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MethodModel {
    Single(SingleModel),
    Ensemble(EnsembleModel),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    /// Seed reused wherever applying a method needs randomness (isolation
    /// forest refits).
    pub seed: u64,
    pub methods: BTreeMap<String, MethodModel>,
}

impl ModelFile {
    pub fn new(seed: u64) -> ModelFile {
        ModelFile {
            seed,
            methods: BTreeMap::new(),
        }
    }

    pub fn read(path: &Path) -> Result<ModelFile> {
        let text = fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Writes atomically: temp file in the same directory, then rename.
    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        let tmp = path.with_extension("json.tmp");
        {
            let mut file = fs::File::create(&tmp)?;
            file.write_all(text.as_bytes())?;
            file.write_all(b"\n")?;
        }
        fs::rename(&tmp, path)?;
        Ok(())
    }
}
