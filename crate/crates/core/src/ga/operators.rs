//! Population initialization, elitist selection, crossover and mutation.

use rand::seq::SliceRandom;
use rand::Rng;

use super::genes::{Chromosome, Gene, GeneSpecs};
use super::GaConfig;

/// Sets one uniformly chosen selection bit when none is set.
pub fn repair_selection<R: Rng + ?Sized>(chromosome: &mut Chromosome, rng: &mut R) {
    if chromosome.n_selected() == 0 {
        let k = rng.gen_range(0..chromosome.0.len());
        chromosome.0[k].selected = true;
    }
}

pub fn random_chromosome<R: Rng + ?Sized>(specs: &GeneSpecs, rng: &mut R) -> Chromosome {
    loop {
        let genes = specs.0.map(|s| Gene {
            tw: rng.gen_range(s.tw_min..=s.tw_max),
            selected: rng.gen_bool(0.5),
        });
        let c = Chromosome(genes);
        if c.n_selected() > 0 {
            return c;
        }
    }
}

pub fn init_population<R: Rng + ?Sized>(specs: &GeneSpecs, config: &GaConfig, rng: &mut R) -> Vec<Chromosome> {
    (0..config.population_size)
        .map(|_| random_chromosome(specs, rng))
        .collect()
}

/// Number of individuals kept by elitist selection.
pub fn n_survivors(config: &GaConfig) -> usize {
    let raw = config.elite_fraction * config.population_size as f64;
    // absorb representation error such as 0.7 * 30 = 21.000000000000004
    let n = (raw - 1e-9).ceil() as usize;
    n.clamp(1, config.population_size)
}

/// Population indices ordered best-first; equal scores keep population order.
pub fn rank(scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    order
}

/// Keeps the top individuals best-first and refills the remaining slots with
/// clones of uniformly drawn survivors. Slot 0 holds the best individual.
pub fn select_elite<R: Rng + ?Sized>(
    population: &[Chromosome],
    scores: &[f64],
    config: &GaConfig,
    rng: &mut R,
) -> Vec<Chromosome> {
    assert_eq!(population.len(), scores.len(), "scores must align with population");
    let keep = n_survivors(config).min(population.len());
    let mut next: Vec<Chromosome> = rank(scores)[..keep].iter().map(|&i| population[i]).collect();
    while next.len() < population.len() {
        let k = rng.gen_range(0..keep);
        next.push(next[k]);
    }
    next
}

/// Pairs chosen for crossover, in population indices.
pub type Pairing = Vec<(usize, usize)>;

/// Applies uniform gene-pair crossover to a random subset of the population,
/// replacing parents in place. `exempt` is never touched.
pub fn crossover<R: Rng + ?Sized>(
    population: &mut [Chromosome],
    exempt: Option<usize>,
    config: &GaConfig,
    rng: &mut R,
) -> Pairing {
    let mut candidates: Vec<usize> = (0..population.len()).filter(|&i| Some(i) != exempt).collect();
    let wanted = (config.crossover_fraction * population.len() as f64 + 1e-9).floor() as usize;
    let count = wanted.min(candidates.len()) / 2 * 2;
    candidates.shuffle(rng);
    let pairs: Pairing = candidates[..count].chunks(2).map(|p| (p[0], p[1])).collect();
    for &(a, b) in &pairs {
        for k in 0..population[a].0.len() {
            if rng.gen_bool(0.5) {
                let tmp = population[a].0[k];
                population[a].0[k] = population[b].0[k];
                population[b].0[k] = tmp;
            }
        }
    }
    pairs
}

/// Mutates every gene independently with probability `mutation_rate`: a
/// window gene is redrawn within its bounds, a selection gene flips.
/// Returns the number of mutation events.
pub fn mutate<R: Rng + ?Sized>(
    population: &mut [Chromosome],
    exempt: Option<usize>,
    specs: &GeneSpecs,
    config: &GaConfig,
    rng: &mut R,
) -> usize {
    let rate = config.mutation_rate;
    let mut events = 0;
    for (i, chromosome) in population.iter_mut().enumerate() {
        if Some(i) == exempt {
            continue;
        }
        for (gene, spec) in chromosome.0.iter_mut().zip(specs.iter()) {
            if rng.gen_bool(rate) {
                gene.tw = rng.gen_range(spec.tw_min..=spec.tw_max);
                events += 1;
            }
            if rng.gen_bool(rate) {
                gene.selected = !gene.selected;
                events += 1;
            }
        }
        repair_selection(chromosome, rng);
    }
    events
}
