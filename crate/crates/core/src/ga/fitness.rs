//! The evaluation pipeline behind a chromosome's fitness: features, scaling,
//! SVM training, and trading simulations on the evaluation sets.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::indicators::{build_features, FeatureTable, IndicatorError};
use crate::market_data::{Bar, Label, LabeledSeries};
use crate::scaling::{ScalerState, ScalingError, ScalingMethod};
use crate::svm::{self, SvmConfig, SvmError, SvmModel};
use crate::trading::{self, SimulationResult, TradingConfig, TradingError};

use super::genes::Chromosome;

#[derive(Debug, Error, PartialEq)]
pub enum PipelineError {
    #[error("chromosome selects no indicators")]
    NoSelectedIndicators,
    #[error("no {0} sets supplied")]
    NoDatasets(&'static str),
    #[error("no labeled rows remain after the indicator warm-up")]
    NoTrainingRows,
    #[error("model expects {expected} features, scaler/svm disagree ({got})")]
    DimensionMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Indicator(#[from] IndicatorError),
    #[error(transparent)]
    Scaling(#[from] ScalingError),
    #[error(transparent)]
    Svm(#[from] SvmError),
    #[error(transparent)]
    Trading(#[from] TradingError),
}

/// Settings shared by every fitness evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct PipelineConfig {
    pub svm: SvmConfig,
    pub trading: TradingConfig,
    pub scaling: ScalingMethod,
}

/// Everything needed to turn raw bars into trading signals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelBundle {
    pub chromosome: Chromosome,
    pub scaler: ScalerState,
    pub svm: SvmModel,
    /// Mean rate of return over the evaluation sets, in percent.
    pub fitness: f64,
    pub generation_found: usize,
}

/// Per-bar classifier output for the bars past the indicator warm-up.
#[derive(Debug, Clone, PartialEq)]
pub struct Signals {
    pub first_bar: usize,
    pub signals: Vec<Label>,
}

impl ModelBundle {
    pub fn n_features(&self) -> usize {
        self.scaler.n_features()
    }

    fn check_dimensions(&self) -> Result<(), PipelineError> {
        let expected = self.chromosome.n_selected();
        for got in [self.scaler.n_features(), self.svm.n_features()] {
            if got != expected && !(got == 0 && self.svm.support_vectors.is_empty()) {
                return Err(PipelineError::DimensionMismatch { expected, got });
            }
        }
        Ok(())
    }

    pub fn features(&self, bars: &[Bar]) -> Result<FeatureTable, PipelineError> {
        let specs = self.chromosome.selected_specs();
        if specs.is_empty() {
            return Err(PipelineError::NoSelectedIndicators);
        }
        Ok(build_features(bars, &specs, self.chromosome.k_window())?)
    }

    /// Classifies every bar that has a full feature row.
    pub fn signals(&self, bars: &[Bar]) -> Result<Signals, PipelineError> {
        self.check_dimensions()?;
        let table = self.features(bars)?;
        let scaled = self.scaler.transform(&table.rows)?;
        Ok(Signals {
            first_bar: table.first_bar,
            signals: self.svm.predict_all(&scaled)?,
        })
    }

    /// Trades the bars after the warm-up on this model's signals.
    pub fn simulate(&self, bars: &[Bar], trading: &TradingConfig) -> Result<SimulationResult, PipelineError> {
        let s = self.signals(bars)?;
        Ok(trading::simulate(&bars[s.first_bar..], &s.signals, trading)?)
    }

    /// Mean rate of return over `sets`.
    pub fn score(&self, sets: &[LabeledSeries], trading: &TradingConfig) -> Result<f64, PipelineError> {
        if sets.is_empty() {
            return Err(PipelineError::NoDatasets("evaluation"));
        }
        let returns = sets
            .iter()
            .map(|s| Ok(self.simulate(s.bars(), trading)?.rate_of_return))
            .collect::<Result<Vec<f64>, PipelineError>>()?;
        Ok(mean(&returns))
    }
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Labeled, unscaled training rows pooled across all training sets.
pub fn training_rows(
    chromosome: &Chromosome,
    sets: &[LabeledSeries],
) -> Result<(Vec<Vec<f64>>, Vec<Label>), PipelineError> {
    let specs = chromosome.selected_specs();
    if specs.is_empty() {
        return Err(PipelineError::NoSelectedIndicators);
    }
    if sets.is_empty() {
        return Err(PipelineError::NoDatasets("training"));
    }
    let mut x = Vec::new();
    let mut y = Vec::new();
    for set in sets {
        let table = build_features(set.bars(), &specs, chromosome.k_window())?;
        for (row, t) in table.rows.into_iter().zip(table.first_bar..) {
            // the final bar has no next-day label
            if let Some(&l) = set.labels.get(t) {
                x.push(row);
                y.push(l);
            }
        }
    }
    if x.is_empty() {
        return Err(PipelineError::NoTrainingRows);
    }
    Ok((x, y))
}

/// Fits the scaler and SVM for `chromosome` on the training sets. The
/// returned bundle has not been scored yet (`fitness` is NaN).
pub fn train_model(
    chromosome: &Chromosome,
    train_sets: &[LabeledSeries],
    config: &PipelineConfig,
) -> Result<ModelBundle, PipelineError> {
    let (x, y) = training_rows(chromosome, train_sets)?;
    let scaler = ScalerState::fit(&x, config.scaling)?;
    let scaled = scaler.transform(&x)?;
    let model = svm::train(&scaled, &y, &config.svm)?;
    Ok(ModelBundle {
        chromosome: *chromosome,
        scaler,
        svm: model,
        fitness: f64::NAN,
        generation_found: 0,
    })
}

/// Trains on `train_sets` and scores the resulting model by its mean rate of
/// return over `eval_sets`.
pub fn fitness(
    chromosome: &Chromosome,
    train_sets: &[LabeledSeries],
    eval_sets: &[LabeledSeries],
    config: &PipelineConfig,
) -> Result<(f64, ModelBundle), PipelineError> {
    if eval_sets.is_empty() {
        return Err(PipelineError::NoDatasets("evaluation"));
    }
    let mut bundle = train_model(chromosome, train_sets, config)?;
    let score = bundle.score(eval_sets, &config.trading)?;
    bundle.fitness = score;
    Ok((score, bundle))
}
