//! Run configuration: built-in defaults, then a `key=value` file, then flags.

use std::path::Path;

use clap::Args;
use gatwo_core::ga::{GaConfig, GeneSpecs, PipelineConfig};
use gatwo_core::market_data::ColumnSchema;
use gatwo_core::scaling::ScalingMethod;
use gatwo_core::svm::{Kernel, SvmConfig};
use serde::Serialize;

use crate::CliError;

pub const DEFAULT_C_GRID: [f64; 11] = [0.125, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 100.0];
pub const DEFAULT_GAMMA_GRID: [f64; 7] = [0.1, 0.25, 0.5, 1.0, 2.0, 5.0, 10.0];

/// Parameter overrides. Every field is optional so that an unset flag does
/// not mask a value from the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// GA seed
    #[arg(long)]
    pub seed: Option<u64>,
    /// SVM box constraint
    #[arg(long = "c")]
    pub c: Option<f64>,
    /// RBF kernel width
    #[arg(long)]
    pub gamma: Option<f64>,
    /// SMO stopping tolerance
    #[arg(long)]
    pub tol: Option<f64>,
    /// Fee per transaction
    #[arg(long)]
    pub cost: Option<f64>,
    /// Initial cash
    #[arg(long)]
    pub cash: Option<f64>,
    /// zscore or minmax
    #[arg(long)]
    pub scaling: Option<ScalingMethod>,
    #[arg(long)]
    pub population: Option<usize>,
    /// Fraction of the population kept by elitist selection
    #[arg(long)]
    pub elite: Option<f64>,
    /// Fraction of the population paired for crossover
    #[arg(long)]
    pub crossover: Option<f64>,
    /// Per-gene mutation probability
    #[arg(long)]
    pub mutation: Option<f64>,
    /// Generations without improvement before stopping
    #[arg(long)]
    pub stall: Option<usize>,
    /// Hard cap on generations
    #[arg(long)]
    pub max_generations: Option<usize>,
    /// Column names, e.g. `date=Date,close=Adj Close`
    #[arg(long)]
    pub csv_schema: Option<String>,
    /// Comma-separated c values for grid search
    #[arg(long, value_delimiter = ',')]
    pub c_grid: Option<Vec<f64>>,
    /// Comma-separated γ values for grid search
    #[arg(long, value_delimiter = ',')]
    pub gamma_grid: Option<Vec<f64>>,
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("invalid value '{value}' for '{key}'")))
}

fn parse_list(key: &str, value: &str) -> Result<Vec<f64>, CliError> {
    value.split(',').map(|v| parse(key, v)).collect()
}

impl Overrides {
    /// Parses `key=value` lines. Blank lines and `#` comments are skipped;
    /// keys are the flag names with or without dashes replaced by underscores.
    pub fn from_config_text(text: &str) -> Result<Self, CliError> {
        let mut o = Overrides::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("config line {}: expected key=value", i + 1)))?;
            let key = key.trim().trim_start_matches("--").replace('_', "-");
            let value = value.trim();
            match key.as_str() {
                "seed" => o.seed = Some(parse(&key, value)?),
                "c" => o.c = Some(parse(&key, value)?),
                "gamma" => o.gamma = Some(parse(&key, value)?),
                "tol" => o.tol = Some(parse(&key, value)?),
                "cost" => o.cost = Some(parse(&key, value)?),
                "cash" => o.cash = Some(parse(&key, value)?),
                "scaling" => o.scaling = Some(parse(&key, value)?),
                "population" => o.population = Some(parse(&key, value)?),
                "elite" => o.elite = Some(parse(&key, value)?),
                "crossover" => o.crossover = Some(parse(&key, value)?),
                "mutation" => o.mutation = Some(parse(&key, value)?),
                "stall" => o.stall = Some(parse(&key, value)?),
                "max-generations" => o.max_generations = Some(parse(&key, value)?),
                "csv-schema" => o.csv_schema = Some(value.to_string()),
                "c-grid" => o.c_grid = Some(parse_list(&key, value)?),
                "gamma-grid" => o.gamma_grid = Some(parse_list(&key, value)?),
                other => {
                    return Err(CliError::Usage(format!("config line {}: unknown key '{other}'", i + 1)));
                }
            }
        }
        Ok(o)
    }

    pub fn from_config_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_config_text(&text)
    }
}

/// Every tunable parameter of a run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub ga: GaConfig,
    pub pipeline: PipelineConfig,
    pub genes: GeneSpecs,
    pub csv_schema: ColumnSchema,
    pub c_grid: Vec<f64>,
    pub gamma_grid: Vec<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            ga: GaConfig::default(),
            pipeline: PipelineConfig {
                svm: SvmConfig::rbf(1.0, 0.25),
                ..PipelineConfig::default()
            },
            genes: GeneSpecs::default(),
            csv_schema: ColumnSchema::default(),
            c_grid: DEFAULT_C_GRID.to_vec(),
            gamma_grid: DEFAULT_GAMMA_GRID.to_vec(),
        }
    }
}

impl RunConfig {
    /// Defaults, overlaid with the config file (if any) and then the flags.
    pub fn resolve(config_file: Option<&Path>, flags: &Overrides) -> Result<Self, CliError> {
        let mut cfg = RunConfig::default();
        if let Some(path) = config_file {
            cfg.apply(&Overrides::from_config_file(path)?)?;
        }
        cfg.apply(flags)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply(&mut self, o: &Overrides) -> Result<(), CliError> {
        if let Some(v) = o.seed {
            self.ga.seed = v;
        }
        if o.c.is_some() || o.gamma.is_some() {
            let gamma = match self.pipeline.svm.kernel {
                Kernel::Rbf { gamma } => gamma,
                _ => 0.25,
            };
            self.pipeline.svm.kernel = Kernel::Rbf {
                gamma: o.gamma.unwrap_or(gamma),
            };
        }
        if let Some(v) = o.c {
            self.pipeline.svm.cost = v;
        }
        if let Some(v) = o.tol {
            self.pipeline.svm.tol = v;
        }
        if let Some(v) = o.cost {
            self.pipeline.trading.cost_per_transaction = v;
        }
        if let Some(v) = o.cash {
            self.pipeline.trading.initial_cash = v;
        }
        if let Some(v) = o.scaling {
            self.pipeline.scaling = v;
        }
        if let Some(v) = o.population {
            self.ga.population_size = v;
        }
        if let Some(v) = o.elite {
            self.ga.elite_fraction = v;
        }
        if let Some(v) = o.crossover {
            self.ga.crossover_fraction = v;
        }
        if let Some(v) = o.mutation {
            self.ga.mutation_rate = v;
        }
        if let Some(v) = o.stall {
            self.ga.stall_generations = v;
        }
        if let Some(v) = o.max_generations {
            self.ga.max_generations = Some(v);
        }
        if let Some(s) = &o.csv_schema {
            self.csv_schema = s.parse().map_err(|e| CliError::Usage(format!("{e}")))?;
        }
        if let Some(v) = &o.c_grid {
            self.c_grid = v.clone();
        }
        if let Some(v) = &o.gamma_grid {
            self.gamma_grid = v.clone();
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.ga.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        self.pipeline
            .trading
            .validate()
            .map_err(|e| CliError::Usage(e.to_string()))?;
        let svm = &self.pipeline.svm;
        if !(svm.cost > 0.0 && svm.cost.is_finite()) {
            return Err(CliError::Usage(format!("c must be > 0, got {}", svm.cost)));
        }
        if svm.tol.is_nan() || svm.tol <= 0.0 {
            return Err(CliError::Usage(format!("tol must be > 0, got {}", svm.tol)));
        }
        svm.kernel.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        if self.c_grid.is_empty() || self.gamma_grid.is_empty() {
            return Err(CliError::Usage("grids must not be empty".into()));
        }
        if self
            .c_grid
            .iter()
            .chain(&self.gamma_grid)
            .any(|v| !(*v > 0.0 && v.is_finite()))
        {
            return Err(CliError::Usage("grid values must be finite and > 0".into()));
        }
        Ok(())
    }

    /// Pretty JSON of the effective configuration.
    pub fn snapshot(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }
}
