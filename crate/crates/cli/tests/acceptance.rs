//! Acceptance suite: one PASS/FAIL line per criterion.

#[path = "../../core/tests/support/mod.rs"]
mod support;

use std::panic::{self, AssertUnwindSafe};
use std::time::{Duration, Instant};

use chrono::NaiveDate;
use gatwo_cli::config::RunConfig;
use gatwo_core::ga::{self, Chromosome, Datasets, GaConfig, GeneSpecs, PipelineConfig};
use gatwo_core::indicators::{compute, IndicatorId, IndicatorSpec};
use gatwo_core::market_data::{label, Bar, Label};
use gatwo_core::model_file::{DataFingerprint, ModelFile, Provenance};
use gatwo_core::scaling::ScalingMethod;
use gatwo_core::svm::{self, Kernel, SvmConfig};
use gatwo_core::synthetic::{planted_series, random_walk, PlantedSignal};
use gatwo_core::trading::{max_drawdown, simulate, TradingConfig};
use support::fixtures::{blobs, random_bars, random_svm_problem, signed};
use support::{oracle, qp_oracle};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn indicator_oracle() -> Outcome {
    let start = Instant::now();
    let bars = random_bars(1_000, 2024);
    let mut columns = 0;
    let mut worst: f64 = 0.0;
    for gene in GeneSpecs::default().iter() {
        for n in gene.tw_min..=gene.tw_max {
            let ks: Vec<usize> = if gene.indicator == IndicatorId::Std {
                (8..=14).collect()
            } else {
                vec![9]
            };
            for k in ks {
                let got = compute(&bars, IndicatorSpec::new(gene.indicator, n), k).map_err(|e| e.to_string())?;
                let want = oracle::indicator(gene.indicator, &bars, n, k);
                let diff = oracle::max_abs_diff(&got.values, &want)
                    .ok_or_else(|| format!("{}({n}) warm-up differs", gene.indicator))?;
                check(diff <= 1e-9, || {
                    format!("{}({n}, k={k}) differs by {diff:e}", gene.indicator)
                })?;
                worst = worst.max(diff);
                columns += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    check(elapsed < Duration::from_secs(10), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "{columns} columns, max |diff| {worst:e}, {:.2}s",
        elapsed.as_secs_f64()
    ))
}

fn gram(x: &[Vec<f64>], k: Kernel) -> Vec<Vec<f64>> {
    x.iter()
        .map(|a| x.iter().map(|b| k.eval(a, b).unwrap()).collect())
        .collect()
}

fn accuracy(model: &svm::SvmModel, x: &[Vec<f64>], y: &[Label]) -> f64 {
    let pred = model.predict_all(x).unwrap();
    pred.iter().zip(y).filter(|(p, t)| p == t).count() as f64 / y.len() as f64
}

fn svm_correctness() -> Outcome {
    let cfg = SvmConfig::rbf(1.0, 0.5);
    let mut worst_gap: f64 = 0.0;
    for seed in 0..50 {
        let (x, y) = random_svm_problem(20, seed);
        let sol = svm::solve(&x, &y, &cfg, false).map_err(|e| e.to_string())?;
        let ys = signed(&y);
        check(sol.alphas.iter().all(|a| (0.0..=cfg.cost).contains(a)), || {
            format!("problem {seed}: box violated")
        })?;
        let balance: f64 = sol.alphas.iter().zip(&ys).map(|(a, y)| a * y).sum();
        check(balance.abs() <= 1e-9, || {
            format!("problem {seed}: sum alpha*y = {balance:e}")
        })?;
        let (reference, _) = qp_oracle::svm_dual(&gram(&x, cfg.kernel), &ys, cfg.cost);
        let gap = (sol.objective - reference).abs();
        check(gap <= 1e-4, || format!("problem {seed}: objective gap {gap:e}"))?;
        worst_gap = worst_gap.max(gap);
    }

    let xor_x = vec![vec![0.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0], vec![1.0, 1.0]];
    let xor_y: Vec<Label> = vec![0, 1, 1, 0];
    let model = svm::train(&xor_x, &xor_y, &SvmConfig::rbf(10.0, 1.0)).map_err(|e| e.to_string())?;
    let xor_acc = accuracy(&model, &xor_x, &xor_y);
    check(xor_acc == 1.0, || format!("XOR accuracy {xor_acc}"))?;

    let (xtr, ytr) = blobs(100, 1);
    let (xte, yte) = blobs(100, 2);
    let model = svm::train(&xtr, &ytr, &SvmConfig::default()).map_err(|e| e.to_string())?;
    let blob_acc = accuracy(&model, &xte, &yte);
    check(blob_acc >= 0.95, || format!("blob held-out accuracy {blob_acc}"))?;
    Ok(format!(
        "50 problems, worst objective gap {worst_gap:.2e}; XOR 4/4; blobs {:.1}%",
        100.0 * blob_acc
    ))
}

fn bars_from_closes(closes: &[f64]) -> Vec<Bar> {
    let d0 = NaiveDate::from_ymd_opt(2020, 1, 1).unwrap();
    closes
        .iter()
        .enumerate()
        .map(|(i, &c)| Bar {
            date: d0 + chrono::Days::new(i as u64),
            open: c,
            high: c,
            low: c,
            close: c,
            volume: 1.0,
        })
        .collect()
}

fn trading_ledger() -> Outcome {
    let cfg = TradingConfig::default();
    let r = simulate(&bars_from_closes(&[100.0, 110.0]), &[1, 0], &cfg).map_err(|e| e.to_string())?;
    check(r.total_profit == 9_980.0, || format!("TP {}", r.total_profit))?;
    check(r.rate_of_return == 9.98, || format!("RR {}", r.rate_of_return))?;
    let mdd = max_drawdown(&[100.0, 80.0, 120.0, 90.0]).map_err(|e| e.to_string())?;
    check(mdd == -25.0, || format!("MDD {mdd}"))?;
    let hold =
        simulate(&bars_from_closes(&[100.0, 90.0, 120.0, 80.0]), &[0, 0, 0, 0], &cfg).map_err(|e| e.to_string())?;
    check(hold.total_profit == 0.0 && hold.max_drawdown == 0.0, || {
        format!("all-hold TP {} MDD {}", hold.total_profit, hold.max_drawdown)
    })?;
    Ok("TP 9980, RR 9.98%, MDD -25%, all-hold TP 0 / MDD 0".into())
}

fn ga_invariants() -> Outcome {
    let specs = GeneSpecs::default();
    let pipeline = PipelineConfig::default();
    let walk = random_walk("W", 420, 99);
    let data = Datasets {
        train: vec![label(walk.slice(0, 220)).unwrap()],
        eval: vec![label(walk.slice(220, 420)).unwrap()],
    };
    let mut generations = 0;
    for seed in 0..10 {
        let cfg = GaConfig {
            stall_generations: usize::MAX,
            max_generations: Some(50),
            seed,
            ..GaConfig::default()
        };
        let mut problems = Vec::new();
        let run = |problems: &mut Vec<String>| {
            ga::evolve(&data, &specs, &cfg, &pipeline, |r| {
                if r.population.len() != cfg.population_size {
                    problems.push(format!(
                        "generation {}: population {}",
                        r.stats.generation,
                        r.population.len()
                    ));
                }
                if let Some(c) = r
                    .population
                    .iter()
                    .find(|c| !c.within_bounds(&specs) || c.n_selected() == 0)
                {
                    problems.push(format!("generation {}: invalid chromosome {c}", r.stats.generation));
                }
            })
            .map_err(|e| e.to_string())
        };
        let first = run(&mut problems)?;
        let second = run(&mut problems)?;
        check(problems.is_empty(), || format!("seed {seed}: {}", problems[0]))?;
        check(first.history.len() == 51, || {
            format!("seed {seed}: {} generations", first.history.len())
        })?;
        check(first.history.windows(2).all(|w| w[1].best >= w[0].best), || {
            format!("seed {seed}: best-ever fitness decreased")
        })?;
        let a = serde_json::to_string(&first.best).unwrap();
        let b = serde_json::to_string(&second.best).unwrap();
        check(a == b, || format!("seed {seed}: bundles differ between identical runs"))?;
        generations += first.history.len() - 1;
    }
    Ok(format!(
        "10 seeds x 50 generations ({generations} total), all invariants held, reruns byte-identical"
    ))
}

fn planted_experiment() -> Outcome {
    let start = Instant::now();
    let specs = GeneSpecs::default();
    let pipeline = PipelineConfig::default();
    let planted = PlantedSignal::default();
    let w_star = planted.spec.window;
    let (mut wins, mut found) = (0, 0);
    let mut details = Vec::new();
    for seed in 0..5 {
        let series = planted_series("PLANT", &PlantedSignal { seed, ..planted });
        let part = |a, b| label(series.slice(a, b)).unwrap();
        let data = Datasets {
            train: vec![part(0, 600)],
            eval: vec![part(600, 1_050)],
        };
        let test = vec![part(1_050, 1_500)];
        let cfg = GaConfig {
            stall_generations: 20,
            seed,
            ..GaConfig::default()
        };
        let evolved = ga::evolve(&data, &specs, &cfg, &pipeline, |_| {}).map_err(|e| e.to_string())?;
        let baseline =
            ga::train_model(&Chromosome::default_for(&specs), &data.train, &pipeline).map_err(|e| e.to_string())?;
        let rr_evolved = evolved
            .best
            .score(&test, &pipeline.trading)
            .map_err(|e| e.to_string())?;
        let rr_default = baseline.score(&test, &pipeline.trading).map_err(|e| e.to_string())?;
        let gene = evolved.best.chromosome.gene(planted.spec.id);
        wins += usize::from(rr_evolved > rr_default);
        found += usize::from(gene.selected && gene.tw.abs_diff(w_star) <= 2);
        details.push(format!("{rr_evolved:.0}/{rr_default:.0}"));
    }
    let elapsed = start.elapsed();
    check(wins >= 4, || {
        format!("evolved beat default in {wins}/5 seeds ({})", details.join(" "))
    })?;
    check(found >= 3, || {
        format!("planted RSI({w_star}) recovered in {found}/5 seeds")
    })?;
    check(elapsed < Duration::from_secs(600), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "evolved > default in {wins}/5 (test RR {}), RSI({w_star}±2) found in {found}/5, {:.0}s",
        details.join(" "),
        elapsed.as_secs_f64()
    ))
}

fn published_constants() -> Outcome {
    let cfg = RunConfig::default();
    check(cfg.pipeline.svm.kernel == Kernel::Rbf { gamma: 0.25 }, || {
        format!("kernel {:?}", cfg.pipeline.svm.kernel)
    })?;
    check(cfg.pipeline.svm.cost == 1.0, || format!("c {}", cfg.pipeline.svm.cost))?;
    check(cfg.pipeline.trading.cost_per_transaction == 5.0, || "tcost".into())?;
    check(cfg.pipeline.trading.initial_cash == 100_000.0, || "initial cash".into())?;
    check(cfg.pipeline.scaling == ScalingMethod::Zscore, || "scaling".into())?;
    let ga = cfg.ga;
    check(
        ga.population_size == 30
            && ga.elite_fraction == 0.7
            && ga.crossover_fraction == 0.4
            && ga.mutation_rate == 0.1
            && ga.stall_generations == 100
            && ga.max_generations.is_none(),
        || format!("GA {ga:?}"),
    )?;
    let table = [
        (IndicatorId::Stk, 8, 14, 9),
        (IndicatorId::Std, 3, 6, 3),
        (IndicatorId::Rsi, 5, 14, 6),
        (IndicatorId::Psy, 10, 15, 12),
        (IndicatorId::WmaBias, 6, 15, 10),
        (IndicatorId::Cci, 6, 15, 14),
        (IndicatorId::PlusDi, 6, 15, 10),
        (IndicatorId::MinusDi, 6, 15, 10),
        (IndicatorId::Adx, 6, 15, 10),
        (IndicatorId::AroonUp, 19, 28, 25),
    ];
    for (gene, (id, lo, hi, def)) in cfg.genes.iter().zip(table) {
        check(
            gene.indicator == id && gene.tw_min == lo && gene.tw_max == hi && gene.default_tw == def,
            || format!("gene {gene:?}"),
        )?;
    }
    check(
        cfg.c_grid.first() == Some(&0.125) && cfg.c_grid.last() == Some(&100.0),
        || "c grid".into(),
    )?;
    check(
        cfg.gamma_grid.first() == Some(&0.1) && cfg.gamma_grid.last() == Some(&10.0),
        || "gamma grid".into(),
    )?;

    let out = std::process::Command::new(env!("CARGO_BIN_EXE_gatwo"))
        .arg("show-config")
        .output()
        .map_err(|e| e.to_string())?;
    let shown = String::from_utf8_lossy(&out.stdout);
    check(shown == cfg.snapshot(), || {
        "binary show-config differs from defaults".into()
    })?;
    Ok("c=1, gamma=0.25, tcost=5, cash=100000, GA 30/0.7/0.4/0.1/100, gene ranges and defaults".into())
}

fn persistence() -> Outcome {
    let pipeline = PipelineConfig::default();
    let series = planted_series(
        "P",
        &PlantedSignal {
            n_bars: 700,
            seed: 7,
            ..PlantedSignal::default()
        },
    );
    let (train, eval) = (series.slice(0, 400), series.slice(400, 700));
    let data = Datasets {
        train: vec![label(train.clone()).unwrap()],
        eval: vec![label(eval.clone()).unwrap()],
    };
    let cfg = GaConfig {
        stall_generations: 5,
        max_generations: Some(10),
        seed: 3,
        ..GaConfig::default()
    };
    let run = ga::evolve(&data, &GeneSpecs::default(), &cfg, &pipeline, |_| {}).map_err(|e| e.to_string())?;
    let file = ModelFile::new(
        &run.best,
        Provenance {
            seed: Some(cfg.seed),
            fitness: run.best.fitness,
            generation_found: run.best.generation_found,
            pipeline,
            train_data: vec![DataFingerprint::of(&train, None)],
            eval_data: vec![DataFingerprint::of(&eval, None)],
        },
    );
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("model.json");
    file.save(&path, false).map_err(|e| e.to_string())?;
    let loaded = ModelFile::load(&path).map_err(|e| e.to_string())?;
    let bundle = loaded.bundle().map_err(|e| e.to_string())?;
    check(bundle == run.best, || "loaded bundle differs".into())?;
    let rescored = bundle.score(&data.eval, &pipeline.trading).map_err(|e| e.to_string())?;
    let diff = (rescored - run.best.fitness).abs();
    check(diff <= 1e-9, || {
        format!("fitness {} vs re-evaluated {rescored}", run.best.fitness)
    })?;
    let again = dir.path().join("again.json");
    loaded.save(&again, false).map_err(|e| e.to_string())?;
    let same = std::fs::read(&path).unwrap() == std::fs::read(&again).unwrap();
    check(same, || "re-saved file differs".into())?;
    Ok(format!(
        "fitness {:.6} reproduced (|diff| {diff:e}), file round-trips byte-identically",
        run.best.fitness
    ))
}

fn main() {
    let criteria: [Criterion; 7] = [
        ("indicator oracle", indicator_oracle),
        ("SVM correctness", svm_correctness),
        ("trading ledger", trading_ledger),
        ("GA invariants", ga_invariants),
        ("planted-signal experiment", planted_experiment),
        ("published constants", published_constants),
        ("persistence", persistence),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = panic::catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(msg)
        });
        match outcome {
            Ok(detail) => println!("criterion {}: PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
