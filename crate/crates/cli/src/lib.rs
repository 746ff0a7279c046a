//! Command-line front end for the GATWO pipeline.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 pipeline error.

pub mod commands;
pub mod config;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use gatwo_core::ga::{GaError, PipelineError};
use gatwo_core::market_data::DataError;
use gatwo_core::model_file::{ModelFile, ModelFileError};
use thiserror::Error;

use commands::DataSet;
use config::{Overrides, RunConfig};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Pipeline(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Pipeline(_) => 3,
        }
    }
}

impl From<DataError> for CliError {
    fn from(e: DataError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<ModelFileError> for CliError {
    fn from(e: ModelFileError) -> Self {
        match e {
            ModelFileError::Exists(_) => CliError::Usage(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        if commands::is_data_error(&e) {
            CliError::Data(e.to_string())
        } else {
            CliError::Pipeline(e.to_string())
        }
    }
}

impl From<GaError> for CliError {
    fn from(e: GaError) -> Self {
        match e {
            GaError::InvalidConfig(_) => CliError::Usage(e.to_string()),
            GaError::Pipeline(p) => p.into(),
            GaError::NoViableChromosome(_) => CliError::Pipeline(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "gatwo", version, about = "Evolve indicator windows for an SVM trading model")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Training CSV files
    #[arg(long, num_args = 1.., value_name = "CSV")]
    pub train: Vec<PathBuf>,
    /// Evaluation CSV files used for fitness (default: the training files)
    #[arg(long, num_args = 1.., value_name = "CSV")]
    pub eval: Vec<PathBuf>,
    /// Out-of-sample CSV files
    #[arg(long, num_args = 1.., value_name = "CSV")]
    pub test: Vec<PathBuf>,
    /// Output directory
    #[arg(long, value_name = "DIR", default_value = ".")]
    pub out: PathBuf,
    /// File of key=value overrides; keys mirror the flag names
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Overwrite an existing model file
    #[arg(long)]
    pub force: bool,
    /// Suppress progress output
    #[arg(long, short)]
    pub quiet: bool,
    #[command(flatten)]
    pub overrides: Overrides,
}

impl Common {
    fn run_config(&self) -> Result<RunConfig, CliError> {
        RunConfig::resolve(self.config.as_deref(), &self.overrides)
    }

    fn out_dir(&self) -> Result<&Path, CliError> {
        std::fs::create_dir_all(&self.out)
            .map_err(|e| CliError::Data(format!("cannot create {}: {e}", self.out.display())))?;
        Ok(&self.out)
    }

    fn progress(&self, line: &str) {
        if !self.quiet {
            eprintln!("{line}");
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Score a grid of (c, γ) values and write a ranked CSV
    GridSearch {
        #[command(flatten)]
        common: Common,
        /// Score the default chromosome instead of running the GA per cell
        #[arg(long)]
        fast: bool,
    },
    /// Evolve a model and write it as JSON
    Train {
        #[command(flatten)]
        common: Common,
        /// Model path (default: OUT/model.json)
        #[arg(long, value_name = "FILE")]
        model: Option<PathBuf>,
    },
    /// Trade a saved model on test data
    Evaluate {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "FILE")]
        model: PathBuf,
    },
    /// Compare a saved model with the default-window baseline
    CompareDefault {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "FILE")]
        model: PathBuf,
    },
    /// Print the effective configuration as JSON
    ShowConfig {
        #[command(flatten)]
        common: Common,
    },
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::GridSearch { common, fast } => grid_search(&common, fast),
        Command::Train { common, model } => train(&common, model),
        Command::Evaluate { common, model } => evaluate(&common, &model),
        Command::CompareDefault { common, model } => compare_default(&common, &model),
        Command::ShowConfig { common } => {
            print!("{}", common.run_config()?.snapshot());
            Ok(())
        }
    }
}

fn grid_search(common: &Common, fast: bool) -> Result<(), CliError> {
    let cfg = common.run_config()?;
    let train = commands::load_sets(&common.train, &cfg.csv_schema)?;
    let eval = commands::load_sets(&common.eval, &cfg.csv_schema)?;
    let data = commands::datasets(&train, &eval)?;
    let rows = commands::grid_search(&data, &cfg, fast, |r| {
        common.progress(&format!("c {} gamma {} score {:.4}", r.c, r.gamma, r.score));
    })?;
    let path = common.out_dir()?.join("grid_search.csv");
    let mut buf = Vec::new();
    commands::write_grid_csv(&rows, &mut buf)?;
    commands::write_file(&path, &buf)?;
    if let Some(best) = rows.first() {
        println!("best c {} gamma {} score {:.4}", best.c, best.gamma, best.score);
    }
    println!("wrote {}", path.display());
    Ok(())
}

fn train(common: &Common, model_path: Option<PathBuf>) -> Result<(), CliError> {
    let cfg = common.run_config()?;
    let model_path = match model_path {
        Some(p) => p,
        None => common.out_dir()?.join("model.json"),
    };
    if model_path.exists() && !common.force {
        return Err(ModelFileError::Exists(model_path).into());
    }
    let train = commands::load_sets(&common.train, &cfg.csv_schema)?;
    let eval = commands::load_sets(&common.eval, &cfg.csv_schema)?;
    let trained = commands::train(&train, &eval, &cfg, |r| {
        let s = r.stats;
        common.progress(&format!(
            "gen {:>4} best {:.4} mean {:.4} stall {} evals {}",
            s.generation, s.best, s.mean, s.stall, s.evaluations
        ));
    })?;
    trained.model.save(&model_path, common.force)?;
    let out = common.out_dir()?;
    let mut buf = Vec::new();
    commands::write_history_csv(&trained.evolution, &mut buf)?;
    commands::write_file(&out.join("history.csv"), &buf)?;
    let best = &trained.evolution.best;
    println!("fitness {:.4} (generation {})", best.fitness, best.generation_found);
    print!("{}", commands::selection_table(&best.chromosome));
    println!("wrote {}", model_path.display());
    Ok(())
}

fn load_model(path: &Path) -> Result<(ModelFile, gatwo_core::ga::ModelBundle), CliError> {
    let file = ModelFile::load(path)?;
    let bundle = file.bundle()?;
    Ok((file, bundle))
}

/// Trading settings from the model, with cost/cash overridable.
fn trading_for(common: &Common, file: &ModelFile) -> Result<gatwo_core::trading::TradingConfig, CliError> {
    let mut trading = file.provenance.pipeline.trading;
    let from_file = match &common.config {
        Some(p) => Overrides::from_config_file(p)?,
        None => Overrides::default(),
    };
    for o in [&from_file, &common.overrides] {
        if let Some(v) = o.cost {
            trading.cost_per_transaction = v;
        }
        if let Some(v) = o.cash {
            trading.initial_cash = v;
        }
    }
    trading.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(trading)
}

fn test_sets(common: &Common, cfg: &RunConfig) -> Result<Vec<DataSet>, CliError> {
    if common.test.is_empty() {
        return Err(CliError::Usage("at least one --test CSV is required".into()));
    }
    let sets = commands::load_sets(&common.test, &cfg.csv_schema)?;
    commands::check_unique_symbols(&sets)?;
    Ok(sets)
}

fn evaluate(common: &Common, model_path: &Path) -> Result<(), CliError> {
    let cfg = common.run_config()?;
    let (file, bundle) = load_model(model_path)?;
    let trading = trading_for(common, &file)?;
    let tests = test_sets(common, &cfg)?;
    let results = commands::evaluate(&bundle, &tests, &trading)?;
    let out = common.out_dir()?;
    for (report, sim) in &results {
        let mut buf = Vec::new();
        sim.write_equity_csv(&mut buf)?;
        commands::write_file(
            &out.join(format!("equity_{}.csv", commands::file_stem(&report.symbol))),
            &buf,
        )?;
    }
    let sets: Vec<_> = results.into_iter().map(|(r, _)| r).collect();
    let report = commands::EvaluationReport {
        model: model_path.display().to_string(),
        trading,
        mean_rr: gatwo_core::ga::mean(&sets.iter().map(|s| s.rr).collect::<Vec<_>>()),
        sets,
    };
    commands::write_file(&out.join("evaluation.json"), &commands::json_bytes(&report))?;
    print!("{}", commands::format_report_table(&report.sets));
    println!("mean RR {:.4}", report.mean_rr);
    Ok(())
}

fn compare_default(common: &Common, model_path: &Path) -> Result<(), CliError> {
    let cfg = common.run_config()?;
    let (file, bundle) = load_model(model_path)?;
    let trading = trading_for(common, &file)?;
    let tests = test_sets(common, &cfg)?;
    let train = if common.train.is_empty() {
        commands::provenance_train_sets(&file, &cfg.csv_schema)?
    } else {
        commands::load_sets(&common.train, &cfg.csv_schema)?
    };
    let baseline = commands::default_baseline(&train, &file.provenance.pipeline)?;
    let rows = commands::compare(&[("gatwo", &bundle), ("default", &baseline)], &tests, &trading)?;
    let out = common.out_dir()?;
    let mut buf = Vec::new();
    commands::write_comparison_csv(&rows, &mut buf)?;
    commands::write_file(&out.join("comparison.csv"), &buf)?;
    commands::write_file(&out.join("comparison.json"), &commands::json_bytes(&rows))?;
    print!("{}", commands::format_comparison_table(&rows));
    Ok(())
}
