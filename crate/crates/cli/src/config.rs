use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use xmodal_core::{Modality, SchemaOverrides};

use crate::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
pub enum Detector {
    #[serde(rename = "confident-learning", alias = "cl")]
    #[value(name = "cl", alias = "confident-learning")]
    ConfidentLearning,
    #[serde(rename = "knn-shapley", alias = "shapley")]
    #[value(name = "shapley", alias = "knn-shapley")]
    KnnShapley,
}

impl Detector {
    pub fn as_str(self) -> &'static str {
        match self {
            Detector::ConfidentLearning => "confident-learning",
            Detector::KnnShapley => "knn-shapley",
        }
    }
}

/// Everything a run needs. Loaded from `--config` and then overridden by
/// individual flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub table: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub clean_table: Option<PathBuf>,
    pub clean_embeddings: Option<PathBuf>,
    pub schema: SchemaOverrides,
    pub modality: Modality,
    pub detector: Detector,
    pub k: usize,
    pub folds: usize,
    pub seed: u64,
    /// Columns to inject into or run detection on. Empty means every
    /// categorical column.
    pub columns: Vec<String>,
    pub row_fraction: f64,
    pub enforce_observed_pairs: bool,
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            table: None,
            embeddings: None,
            clean_table: None,
            clean_embeddings: None,
            schema: SchemaOverrides::default(),
            modality: Modality::TableAndImage,
            detector: Detector::ConfidentLearning,
            k: 5,
            folds: 5,
            seed: 0,
            columns: Vec::new(),
            row_fraction: 0.5,
            enforce_observed_pairs: true,
            out: None,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<(), Failure> {
        if self.k == 0 {
            return Err(Failure::Config("k must be at least 1".into()));
        }
        if self.folds < 2 {
            return Err(Failure::Config("folds must be at least 2".into()));
        }
        if !(0.0..=1.0).contains(&self.row_fraction) {
            return Err(Failure::Config(format!(
                "row fraction {} is outside [0, 1]",
                self.row_fraction
            )));
        }
        Ok(())
    }

    pub fn table(&self) -> Result<&Path, Failure> {
        required(&self.table, "--table")
    }

    pub fn embeddings(&self) -> Result<&Path, Failure> {
        required(&self.embeddings, "--embeddings")
    }

    pub fn out(&self) -> Result<&Path, Failure> {
        required(&self.out, "--out")
    }
}

fn required<'a>(value: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path, Failure> {
    value
        .as_deref()
        .ok_or_else(|| Failure::Config(format!("missing {flag}")))
}
