//! Self-describing JSON model file: genes, scaler, SVM and provenance.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::ga::{Chromosome, GeneRecord, ModelBundle, PipelineConfig};
use crate::market_data::PriceSeries;
use crate::scaling::ScalerState;
use crate::svm::SvmModel;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ModelFileError {
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0} already exists (use --force to overwrite)")]
    Exists(PathBuf),
    #[error("malformed model file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported model format version {0}")]
    UnsupportedVersion(u32),
    #[error("inconsistent model file: {0}")]
    Invalid(String),
}

/// Identifies the data a model was trained or scored on.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DataFingerprint {
    pub symbol: String,
    /// Path the series was loaded from, when it came from a file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    pub bars: usize,
    /// SHA-256 of the series rendered in the default CSV layout.
    pub sha256: String,
}

impl DataFingerprint {
    pub fn of(series: &PriceSeries, path: Option<&Path>) -> Self {
        let mut buf = Vec::new();
        series.write_csv(&mut buf).expect("writing to memory cannot fail");
        let digest = Sha256::digest(&buf);
        Self {
            symbol: series.symbol.clone(),
            path: path.map(|p| p.display().to_string()),
            bars: series.len(),
            sha256: digest.iter().map(|b| format!("{b:02x}")).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: Option<u64>,
    pub fitness: f64,
    pub generation_found: usize,
    pub pipeline: PipelineConfig,
    pub train_data: Vec<DataFingerprint>,
    pub eval_data: Vec<DataFingerprint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format_version: u32,
    pub genes: Vec<GeneRecord>,
    pub scaler: ScalerState,
    pub svm: SvmModel,
    pub provenance: Provenance,
}

impl ModelFile {
    pub fn new(bundle: &ModelBundle, provenance: Provenance) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            genes: bundle.chromosome.records(),
            scaler: bundle.scaler.clone(),
            svm: bundle.svm.clone(),
            provenance,
        }
    }

    pub fn bundle(&self) -> Result<ModelBundle, ModelFileError> {
        let chromosome = Chromosome::from_records(&self.genes).map_err(ModelFileError::Invalid)?;
        Ok(ModelBundle {
            chromosome,
            scaler: self.scaler.clone(),
            svm: self.svm.clone(),
            fitness: self.provenance.fitness,
            generation_found: self.provenance.generation_found,
        })
    }

    fn validate(&self) -> Result<(), ModelFileError> {
        if self.format_version != FORMAT_VERSION {
            return Err(ModelFileError::UnsupportedVersion(self.format_version));
        }
        let chromosome = Chromosome::from_records(&self.genes).map_err(ModelFileError::Invalid)?;
        let n = chromosome.n_selected();
        if n == 0 {
            return Err(ModelFileError::Invalid("no selected indicators".into()));
        }
        if self.scaler.n_features() != n {
            return Err(ModelFileError::Invalid(format!(
                "scaler has {} features for {n} selected indicators",
                self.scaler.n_features()
            )));
        }
        if self.svm.support_vectors.iter().any(|sv| sv.len() != n) {
            return Err(ModelFileError::Invalid(format!(
                "support vectors do not have {n} features"
            )));
        }
        if self.svm.support_vectors.len() != self.svm.dual_coefs.len() {
            return Err(ModelFileError::Invalid(
                "support vector / coefficient count mismatch".into(),
            ));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String, ModelFileError> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self, ModelFileError> {
        let file: ModelFile = serde_json::from_str(text)?;
        file.validate()?;
        Ok(file)
    }

    /// Writes the file, refusing to replace an existing one unless `force`.
    pub fn save(&self, path: &Path, force: bool) -> Result<(), ModelFileError> {
        if path.exists() && !force {
            return Err(ModelFileError::Exists(path.to_path_buf()));
        }
        std::fs::write(path, self.to_json()?).map_err(|source| ModelFileError::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self, ModelFileError> {
        let text = std::fs::read_to_string(path).map_err(|source| ModelFileError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }
}
