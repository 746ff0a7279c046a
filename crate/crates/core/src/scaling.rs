//! Per-feature normalization fitted on training data and replayed on new data.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ScalingError {
    #[error("cannot fit a scaler on an empty table")]
    EmptyTable,
    #[error("expected {expected} columns, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalingMethod {
    #[default]
    Zscore,
    Minmax,
}

impl std::str::FromStr for ScalingMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "zscore" | "z-score" => Ok(ScalingMethod::Zscore),
            "minmax" | "min-max" => Ok(ScalingMethod::Minmax),
            other => Err(format!("unknown scaling method '{other}'")),
        }
    }
}

/// Fitted parameters for one column: `(mean, std)` for z-score,
/// `(min, max)` for min-max.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FeatureParams {
    Zscore { mean: f64, std: f64 },
    Minmax { min: f64, max: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalerState {
    pub method: ScalingMethod,
    pub params: Vec<FeatureParams>,
}

impl ScalerState {
    pub fn n_features(&self) -> usize {
        self.params.len()
    }

    /// Fits per-column parameters. The z-score variant uses the population
    /// standard deviation.
    pub fn fit(rows: &[Vec<f64>], method: ScalingMethod) -> Result<Self, ScalingError> {
        let first = rows.first().ok_or(ScalingError::EmptyTable)?;
        let n_cols = first.len();
        if n_cols == 0 {
            return Err(ScalingError::EmptyTable);
        }
        if let Some(bad) = rows.iter().find(|r| r.len() != n_cols) {
            return Err(ScalingError::DimensionMismatch {
                expected: n_cols,
                got: bad.len(),
            });
        }
        let n = rows.len() as f64;
        let params = (0..n_cols)
            .map(|j| match method {
                ScalingMethod::Zscore => {
                    let mean = rows.iter().map(|r| r[j]).sum::<f64>() / n;
                    let var = rows.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / n;
                    FeatureParams::Zscore { mean, std: var.sqrt() }
                }
                ScalingMethod::Minmax => {
                    let (min, max) = rows.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
                        (lo.min(r[j]), hi.max(r[j]))
                    });
                    FeatureParams::Minmax { min, max }
                }
            })
            .collect();
        Ok(Self { method, params })
    }

    /// Scales a single row. A zero-spread column maps every value to 0.
    pub fn transform_row(&self, row: &[f64]) -> Result<Vec<f64>, ScalingError> {
        if row.len() != self.params.len() {
            return Err(ScalingError::DimensionMismatch {
                expected: self.params.len(),
                got: row.len(),
            });
        }
        Ok(row
            .iter()
            .zip(&self.params)
            .map(|(&x, p)| match *p {
                FeatureParams::Zscore { mean, std } => {
                    if std == 0.0 {
                        0.0
                    } else {
                        (x - mean) / std
                    }
                }
                FeatureParams::Minmax { min, max } => {
                    if max == min {
                        0.0
                    } else {
                        (x - min) / (max - min)
                    }
                }
            })
            .collect())
    }

    pub fn transform(&self, rows: &[Vec<f64>]) -> Result<Vec<Vec<f64>>, ScalingError> {
        rows.iter().map(|r| self.transform_row(r)).collect()
    }
}
