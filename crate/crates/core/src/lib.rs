//! Genetic optimization of technical-indicator time windows and feature
//! selection for an SVM next-day direction classifier, scored by a long-only
//! trading simulation.
//!
//! The pipeline for one candidate is: [`indicators`] → [`scaling`] →
//! [`svm`] → [`trading`]. [`ga`] searches over candidates and
//! [`model_file`] persists the winner.

pub mod ga;
pub mod indicators;
pub mod market_data;
pub mod model_file;
pub mod scaling;
pub mod svm;
pub mod synthetic;
pub mod trading;

pub use ga::{evolve, Chromosome, Datasets, GaConfig, GeneSpecs, ModelBundle, PipelineConfig};
pub use market_data::{label, load_csv, Bar, ColumnSchema, LabeledSeries, PriceSeries};
pub use svm::{Kernel, SvmConfig, SvmModel};
pub use trading::{SimulationResult, TradingConfig};
