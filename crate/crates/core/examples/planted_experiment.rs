//! Evolves windows on a series whose direction is planted in RSI(12) and
//! compares the result with the default-window baseline on held-out bars.
//!
//! Usage: `cargo run -p gatwo-core --example planted_experiment -- [seeds]`

use std::time::Instant;

use gatwo_core::ga::{self, Chromosome, Datasets, GaConfig, GeneSpecs, PipelineConfig};
use gatwo_core::indicators::IndicatorId;
use gatwo_core::market_data::label;
use gatwo_core::synthetic::{planted_series, PlantedSignal};

fn main() {
    let seeds: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(5);
    let specs = GeneSpecs::default();
    let pipeline = PipelineConfig::default();
    for seed in 0..seeds {
        let start = Instant::now();
        let signal = PlantedSignal {
            seed,
            ..PlantedSignal::default()
        };
        let series = planted_series("PLANT", &signal);
        let part = |a, b| label(series.slice(a, b)).unwrap();
        let data = Datasets {
            train: vec![part(0, 600)],
            eval: vec![part(600, 1_050)],
        };
        let test = vec![part(1_050, 1_500)];
        let ga_cfg = GaConfig {
            stall_generations: 20,
            seed,
            ..GaConfig::default()
        };
        let evolved = ga::evolve(&data, &specs, &ga_cfg, &pipeline, |_| {}).unwrap();
        let baseline = ga::train_model(&Chromosome::default_for(&specs), &data.train, &pipeline).unwrap();
        let evolved_rr = evolved.best.score(&test, &pipeline.trading).unwrap();
        let baseline_rr = baseline.score(&test, &pipeline.trading).unwrap();
        let rsi = evolved.best.chromosome.gene(IndicatorId::Rsi);
        println!(
            "seed {seed}: gens {:>3} fitness {:>8.2}  test RR evolved {:>8.2} default {:>8.2}  RSI sel={} tw={}  [{}]  {:.1}s",
            evolved.history.len() - 1,
            evolved.best.fitness,
            evolved_rr,
            baseline_rr,
            rsi.selected,
            rsi.tw,
            evolved.best.chromosome,
            start.elapsed().as_secs_f64()
        );
    }
}
