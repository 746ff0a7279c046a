//! Elitist genetic search over indicator time windows and feature selection.
//!
//! Each chromosome carries a (window, selected) gene pair per indicator. A
//! chromosome is scored by training an SVM on its selected features and
//! averaging the rate of return of trading simulations driven by that model.

mod fitness;
mod genes;
pub mod operators;

use std::collections::HashMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::market_data::LabeledSeries;

pub use fitness::{fitness, mean, train_model, training_rows, ModelBundle, PipelineConfig, PipelineError, Signals};
pub use genes::{Chromosome, Gene, GeneRecord, GeneSpec, GeneSpecs};

#[derive(Debug, Error, PartialEq)]
pub enum GaError {
    #[error("invalid GA configuration: {0}")]
    InvalidConfig(String),
    #[error("every chromosome of the initial population failed to evaluate (first error: {0})")]
    NoViableChromosome(String),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaConfig {
    pub population_size: usize,
    /// Share of the population kept by elitist selection.
    pub elite_fraction: f64,
    /// Share of the population paired for crossover.
    pub crossover_fraction: f64,
    /// Per-gene mutation probability.
    pub mutation_rate: f64,
    /// Stop after this many consecutive generations without a strict improvement.
    pub stall_generations: usize,
    /// Optional hard cap on the number of generations after the first.
    pub max_generations: Option<usize>,
    pub seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population_size: 30,
            elite_fraction: 0.70,
            crossover_fraction: 0.40,
            mutation_rate: 0.10,
            stall_generations: 100,
            max_generations: None,
            seed: 0,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<(), GaError> {
        if self.population_size < 2 {
            return Err(GaError::InvalidConfig("population size must be at least 2".into()));
        }
        for (name, v) in [
            ("elite fraction", self.elite_fraction),
            ("crossover fraction", self.crossover_fraction),
            ("mutation rate", self.mutation_rate),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(GaError::InvalidConfig(format!("{name} must lie in [0, 1], got {v}")));
            }
        }
        Ok(())
    }
}

/// Training and evaluation data for one run.
#[derive(Debug, Clone)]
pub struct Datasets {
    pub train: Vec<LabeledSeries>,
    pub eval: Vec<LabeledSeries>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats {
    pub generation: usize,
    /// Best-ever fitness so far.
    pub best: f64,
    /// Mean fitness over individuals that evaluated successfully.
    pub mean: f64,
    pub stall: usize,
    /// Pipelines actually run this generation (cache misses).
    pub evaluations: usize,
}

/// Snapshot handed to the progress observer after each generation.
pub struct GenerationReport<'a> {
    pub stats: GenerationStats,
    pub population: &'a [Chromosome],
    pub scores: &'a [f64],
}

#[derive(Debug, Clone)]
pub struct Evolution {
    pub best: ModelBundle,
    pub history: Vec<GenerationStats>,
}

/// Fitness evaluation with a per-run score cache. Failed pipelines score −∞.
struct Evaluator<'a> {
    data: &'a Datasets,
    config: &'a PipelineConfig,
    cache: HashMap<Chromosome, f64>,
    first_error: Option<String>,
}

impl Evaluator<'_> {
    /// Scores the population, returning the bundle of the best individual that
    /// beats `threshold`, if any.
    fn score_population(
        &mut self,
        population: &[Chromosome],
        threshold: f64,
        generation: usize,
    ) -> (Vec<f64>, Option<ModelBundle>, usize) {
        let mut scores = Vec::with_capacity(population.len());
        let mut best: Option<ModelBundle> = None;
        let mut bar = threshold;
        let mut evaluations = 0;
        for c in population {
            if let Some(&s) = self.cache.get(c) {
                scores.push(s);
                continue;
            }
            evaluations += 1;
            let score = match fitness(c, &self.data.train, &self.data.eval, self.config) {
                Ok((score, mut bundle)) if score.is_finite() => {
                    if score > bar {
                        bar = score;
                        bundle.generation_found = generation;
                        best = Some(bundle);
                    }
                    score
                }
                Ok(_) => f64::NEG_INFINITY,
                Err(e) => {
                    self.first_error.get_or_insert_with(|| e.to_string());
                    f64::NEG_INFINITY
                }
            };
            self.cache.insert(*c, score);
            scores.push(score);
        }
        (scores, best, evaluations)
    }
}

fn generation_rng(seed: u64, generation: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(generation as u64);
    rng
}

fn finite_mean(scores: &[f64]) -> f64 {
    let finite: Vec<f64> = scores.iter().copied().filter(|s| s.is_finite()).collect();
    if finite.is_empty() {
        f64::NEG_INFINITY
    } else {
        mean(&finite)
    }
}

/// Runs the genetic search and returns the best model found.
///
/// Each generation applies selection, crossover and mutation, then scores the
/// new population. The best-ever individual sits in slot 0 after selection
/// and is exempt from crossover and mutation, so best-ever fitness never
/// decreases. The run stops once `stall_generations` consecutive generations
/// fail to strictly improve it, or at `max_generations`.
pub fn evolve(
    data: &Datasets,
    specs: &GeneSpecs,
    ga: &GaConfig,
    pipeline: &PipelineConfig,
    mut observer: impl FnMut(&GenerationReport<'_>),
) -> Result<Evolution, GaError> {
    ga.validate()?;
    specs.validate().map_err(GaError::InvalidConfig)?;
    if data.train.is_empty() {
        return Err(PipelineError::NoDatasets("training").into());
    }
    if data.eval.is_empty() {
        return Err(PipelineError::NoDatasets("evaluation").into());
    }
    let mut evaluator = Evaluator {
        data,
        config: pipeline,
        cache: HashMap::new(),
        first_error: None,
    };

    let mut generation = 0;
    let mut population = operators::init_population(specs, ga, &mut generation_rng(ga.seed, 0));
    let (mut scores, found, evaluations) = evaluator.score_population(&population, f64::NEG_INFINITY, 0);
    let mut best = found.ok_or_else(|| {
        GaError::NoViableChromosome(
            evaluator
                .first_error
                .clone()
                .unwrap_or_else(|| "no finite score".into()),
        )
    })?;
    let mut stall = 0;
    let mut history = Vec::new();
    let mut report = |generation, stall, evaluations, population: &[Chromosome], scores: &[f64], best: f64| {
        let stats = GenerationStats {
            generation,
            best,
            mean: finite_mean(scores),
            stall,
            evaluations,
        };
        history.push(stats);
        observer(&GenerationReport {
            stats,
            population,
            scores,
        });
    };
    report(0, 0, evaluations, &population, &scores, best.fitness);

    while stall < ga.stall_generations && ga.max_generations.is_none_or(|cap| generation < cap) {
        generation += 1;
        let mut rng = generation_rng(ga.seed, generation);
        population = operators::select_elite(&population, &scores, ga, &mut rng);
        operators::crossover(&mut population, Some(0), ga, &mut rng);
        operators::mutate(&mut population, Some(0), specs, ga, &mut rng);

        let (new_scores, found, evaluations) = evaluator.score_population(&population, best.fitness, generation);
        scores = new_scores;
        match found {
            Some(bundle) => {
                best = bundle;
                stall = 0;
            }
            None => stall += 1,
        }
        report(generation, stall, evaluations, &population, &scores, best.fitness);
    }
    Ok(Evolution { best, history })
}
