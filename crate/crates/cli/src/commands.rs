//! The four commands, written against in-memory data so they can be driven
//! both from the binary and from tests.

use std::io::Write;
use std::path::{Path, PathBuf};

use gatwo_core::ga::{
    self, Chromosome, Datasets, Evolution, GaError, GeneSpecs, GenerationReport, ModelBundle, PipelineConfig,
};
use gatwo_core::market_data::{label, load_csv, ColumnSchema, LabeledSeries, PriceSeries};
use gatwo_core::model_file::{DataFingerprint, ModelFile, Provenance};
use gatwo_core::svm::Kernel;
use gatwo_core::trading::{buy_and_hold, SimulationResult, TradingConfig};
use serde::Serialize;

use crate::config::RunConfig;
use crate::CliError;

/// A price series together with the file it came from.
#[derive(Debug, Clone)]
pub struct DataSet {
    pub path: Option<PathBuf>,
    pub series: PriceSeries,
}

impl DataSet {
    pub fn fingerprint(&self) -> DataFingerprint {
        DataFingerprint::of(&self.series, self.path.as_deref())
    }
}

pub fn load_sets(paths: &[PathBuf], schema: &ColumnSchema) -> Result<Vec<DataSet>, CliError> {
    paths
        .iter()
        .map(|p| {
            let series = load_csv(p, schema).map_err(|e| CliError::Data(format!("{}: {e}", p.display())))?;
            Ok(DataSet {
                path: Some(p.clone()),
                series,
            })
        })
        .collect()
}

pub fn labeled(sets: &[DataSet]) -> Result<Vec<LabeledSeries>, CliError> {
    sets.iter().map(|s| Ok(label(s.series.clone())?)).collect()
}

/// Training sets double as evaluation sets when none are given.
pub fn datasets(train: &[DataSet], eval: &[DataSet]) -> Result<Datasets, CliError> {
    if train.is_empty() {
        return Err(CliError::Usage("at least one --train CSV is required".into()));
    }
    let train = labeled(train)?;
    let eval = if eval.is_empty() { train.clone() } else { labeled(eval)? };
    Ok(Datasets { train, eval })
}

fn with_rbf(pipeline: &PipelineConfig, c: f64, gamma: f64) -> PipelineConfig {
    let mut p = *pipeline;
    p.svm.cost = c;
    p.svm.kernel = Kernel::Rbf { gamma };
    p
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridRow {
    pub rank: usize,
    pub c: f64,
    pub gamma: f64,
    /// Mean evaluation rate of return; −∞ when no model could be built.
    pub score: f64,
    pub selected: String,
}

/// Scores every (c, γ) pair, best first. Each cell runs the full GA, or in
/// `fast` mode trains the default chromosome only.
pub fn grid_search(
    data: &Datasets,
    cfg: &RunConfig,
    fast: bool,
    mut progress: impl FnMut(&GridRow),
) -> Result<Vec<GridRow>, CliError> {
    let default = Chromosome::default_for(&cfg.genes);
    let mut rows = Vec::with_capacity(cfg.c_grid.len() * cfg.gamma_grid.len());
    for &c in &cfg.c_grid {
        for &gamma in &cfg.gamma_grid {
            let pipeline = with_rbf(&cfg.pipeline, c, gamma);
            let (score, chromosome) = if fast {
                match ga::fitness(&default, &data.train, &data.eval, &pipeline) {
                    Ok((score, _)) => (score, default),
                    Err(e) if is_data_error(&e) => return Err(e.into()),
                    Err(_) => (f64::NEG_INFINITY, default),
                }
            } else {
                match ga::evolve(data, &cfg.genes, &cfg.ga, &pipeline, |_| {}) {
                    Ok(run) => (run.best.fitness, run.best.chromosome),
                    Err(GaError::NoViableChromosome(_)) => (f64::NEG_INFINITY, default),
                    Err(e) => return Err(e.into()),
                }
            };
            let row = GridRow {
                rank: 0,
                c,
                gamma,
                score,
                selected: chromosome.to_string(),
            };
            progress(&row);
            rows.push(row);
        }
    }
    rows.sort_by(|a, b| b.score.total_cmp(&a.score));
    for (i, r) in rows.iter_mut().enumerate() {
        r.rank = i + 1;
    }
    Ok(rows)
}

pub fn write_grid_csv<W: Write>(rows: &[GridRow], writer: W) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["rank", "c", "gamma", "score", "selected"])?;
    for r in rows {
        w.write_record([
            r.rank.to_string(),
            r.c.to_string(),
            r.gamma.to_string(),
            r.score.to_string(),
            r.selected.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub(crate) fn is_data_error(e: &ga::PipelineError) -> bool {
    use gatwo_core::indicators::IndicatorError;
    matches!(
        e,
        ga::PipelineError::NoTrainingRows
            | ga::PipelineError::Indicator(
                IndicatorError::WindowTooLargeForSeries { .. } | IndicatorError::TooShort(_)
            )
    )
}

pub struct Trained {
    pub model: ModelFile,
    pub evolution: Evolution,
}

/// Evolves a model and packages it with its provenance.
pub fn train(
    train: &[DataSet],
    eval: &[DataSet],
    cfg: &RunConfig,
    observer: impl FnMut(&GenerationReport<'_>),
) -> Result<Trained, CliError> {
    let data = datasets(train, eval)?;
    let evolution = ga::evolve(&data, &cfg.genes, &cfg.ga, &cfg.pipeline, observer)?;
    let eval_sets = if eval.is_empty() { train } else { eval };
    let provenance = Provenance {
        seed: Some(cfg.ga.seed),
        fitness: evolution.best.fitness,
        generation_found: evolution.best.generation_found,
        pipeline: cfg.pipeline,
        train_data: train.iter().map(DataSet::fingerprint).collect(),
        eval_data: eval_sets.iter().map(DataSet::fingerprint).collect(),
    };
    Ok(Trained {
        model: ModelFile::new(&evolution.best, provenance),
        evolution,
    })
}

/// Selected genes as `indicator  tw` lines.
pub fn selection_table(chromosome: &Chromosome) -> String {
    let mut out = String::from("indicator  tw\n");
    for spec in chromosome.selected_specs() {
        out.push_str(&format!("{:<9}  {}\n", spec.id.code(), spec.window));
    }
    out
}

pub fn write_history_csv<W: Write>(evolution: &Evolution, writer: W) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["generation", "best", "mean", "stall", "evaluations"])?;
    for h in &evolution.history {
        w.write_record([
            h.generation.to_string(),
            h.best.to_string(),
            h.mean.to_string(),
            h.stall.to_string(),
            h.evaluations.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Out-of-sample numbers for one series, with buy-and-hold over the same bars.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SetReport {
    pub symbol: String,
    pub first_date: String,
    pub last_date: String,
    pub bars: usize,
    pub tp: f64,
    pub rr: f64,
    pub mdd: f64,
    pub n_trades: usize,
    /// Trades per simulated bar.
    pub trade_fraction: f64,
    pub rr_bh: f64,
    pub mdd_bh: f64,
}

/// Runs `bundle` over each series. The buy-and-hold baseline covers the bars
/// the model trades, i.e. those after its indicator warm-up.
pub fn evaluate(
    bundle: &ModelBundle,
    tests: &[DataSet],
    trading: &TradingConfig,
) -> Result<Vec<(SetReport, SimulationResult)>, CliError> {
    tests
        .iter()
        .map(|t| {
            let bars = t.series.bars();
            let signals = bundle.signals(bars).map_err(|e| tag(e, &t.series.symbol))?;
            let traded = &bars[signals.first_bar..];
            let sim = gatwo_core::trading::simulate(traded, &signals.signals, trading)
                .map_err(|e| CliError::Data(format!("{}: {e}", t.series.symbol)))?;
            let bh = buy_and_hold(traded, trading).map_err(|e| CliError::Data(format!("{}: {e}", t.series.symbol)))?;
            let report = SetReport {
                symbol: t.series.symbol.clone(),
                first_date: traded[0].date.to_string(),
                last_date: traded[traded.len() - 1].date.to_string(),
                bars: traded.len(),
                tp: sim.total_profit,
                rr: sim.rate_of_return,
                mdd: sim.max_drawdown,
                n_trades: sim.trades.len(),
                trade_fraction: sim.trade_fraction(),
                rr_bh: bh.rate_of_return,
                mdd_bh: bh.max_drawdown,
            };
            Ok((report, sim))
        })
        .collect()
}

fn tag(e: ga::PipelineError, symbol: &str) -> CliError {
    let data = is_data_error(&e);
    let msg = format!("{symbol}: {e}");
    if data {
        CliError::Data(msg)
    } else {
        CliError::Pipeline(msg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluationReport {
    pub model: String,
    pub trading: TradingConfig,
    pub sets: Vec<SetReport>,
    pub mean_rr: f64,
}

/// File-name-safe version of a symbol.
pub fn file_stem(symbol: &str) -> String {
    symbol
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' || c == '.' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

pub fn check_unique_symbols(sets: &[DataSet]) -> Result<(), CliError> {
    let mut seen = std::collections::BTreeSet::new();
    for s in sets {
        if !seen.insert(file_stem(&s.series.symbol)) {
            return Err(CliError::Usage(format!("duplicate test symbol '{}'", s.series.symbol)));
        }
    }
    Ok(())
}

pub fn format_report_table(sets: &[SetReport]) -> String {
    let mut out = format!(
        "{:<10} {:>10} {:>10} {:>10} {:>10} {:>8}\n",
        "symbol", "RR%", "MDD%", "RR B&H%", "MDD B&H%", "trade%"
    );
    for s in sets {
        out.push_str(&format!(
            "{:<10} {:>10.2} {:>10.2} {:>10.2} {:>10.2} {:>8.1}\n",
            s.symbol,
            s.rr,
            s.mdd,
            s.rr_bh,
            s.mdd_bh,
            100.0 * s.trade_fraction
        ));
    }
    out
}

/// One model's row in the side-by-side comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub model: String,
    pub chromosome: String,
    pub sets: Vec<SetReport>,
}

/// Fits the default-window chromosome on `train` with the same pipeline.
pub fn default_baseline(train: &[DataSet], pipeline: &PipelineConfig) -> Result<ModelBundle, CliError> {
    let sets = labeled(train)?;
    let chromosome = Chromosome::default_for(&GeneSpecs::default());
    ga::train_model(&chromosome, &sets, pipeline).map_err(|e| tag(e, "default baseline"))
}

pub fn compare(
    models: &[(&str, &ModelBundle)],
    tests: &[DataSet],
    trading: &TradingConfig,
) -> Result<Vec<ComparisonRow>, CliError> {
    models
        .iter()
        .map(|(name, bundle)| {
            Ok(ComparisonRow {
                model: name.to_string(),
                chromosome: bundle.chromosome.to_string(),
                sets: evaluate(bundle, tests, trading)?.into_iter().map(|(r, _)| r).collect(),
            })
        })
        .collect()
}

/// One row per model; four metric columns (RR, MDD, RR B&H, MDD B&H) per stock.
pub fn write_comparison_csv<W: Write>(rows: &[ComparisonRow], writer: W) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["model".to_string()];
    if let Some(first) = rows.first() {
        for s in &first.sets {
            for m in ["rr", "mdd", "rr_bh", "mdd_bh"] {
                header.push(format!("{}_{m}", s.symbol));
            }
        }
    }
    w.write_record(&header)?;
    for r in rows {
        let mut rec = vec![r.model.clone()];
        for s in &r.sets {
            rec.extend([s.rr, s.mdd, s.rr_bh, s.mdd_bh].iter().map(f64::to_string));
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn format_comparison_table(rows: &[ComparisonRow]) -> String {
    let mut out = String::new();
    let Some(first) = rows.first() else {
        return out;
    };
    out.push_str(&format!("{:<10}", "model"));
    for s in &first.sets {
        out.push_str(&format!(" | {:^43}", s.symbol));
    }
    out.push('\n');
    out.push_str(&format!("{:<10}", ""));
    for _ in &first.sets {
        out.push_str(&format!(
            " | {:>10} {:>10} {:>10} {:>10}",
            "RR", "MDD", "RR B&H", "MDD B&H"
        ));
    }
    out.push('\n');
    for r in rows {
        out.push_str(&format!("{:<10}", r.model));
        for s in &r.sets {
            out.push_str(&format!(
                " | {:>10.2} {:>10.2} {:>10.2} {:>10.2}",
                s.rr, s.mdd, s.rr_bh, s.mdd_bh
            ));
        }
        out.push('\n');
    }
    out
}

/// Training data named in a model's provenance, re-checked against the
/// recorded hashes.
pub fn provenance_train_sets(model: &ModelFile, schema: &ColumnSchema) -> Result<Vec<DataSet>, CliError> {
    let fps = &model.provenance.train_data;
    if fps.is_empty() {
        return Err(CliError::Usage("model records no training data; pass --train".into()));
    }
    fps.iter()
        .map(|fp| {
            let path = fp.path.as_ref().ok_or_else(|| {
                CliError::Usage(format!(
                    "training set '{}' has no recorded path; pass --train",
                    fp.symbol
                ))
            })?;
            let set = load_sets(&[PathBuf::from(path)], schema)?.remove(0);
            if set.fingerprint().sha256 != fp.sha256 {
                return Err(CliError::Data(format!("{path} changed since the model was trained")));
            }
            Ok(set)
        })
        .collect()
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))
}

pub fn json_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s.into_bytes()
}
