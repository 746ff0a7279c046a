#![allow(dead_code)]

use chrono::NaiveDate;
use gatwo_core::market_data::{Bar, Label};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random OHLCV bars on a coarse price grid so that ties in highs, lows and
/// closes occur regularly.
pub fn random_bars(n: usize, seed: u64) -> Vec<Bar> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d0 = NaiveDate::from_ymd_opt(2010, 1, 4).unwrap();
    let mut close: f64 = 50.0;
    (0..n)
        .map(|i| {
            let open = close;
            if !rng.gen_bool(0.1) {
                close = (close + rng.gen_range(-1.5..1.5f64)).max(5.0);
                close = (close * 4.0).round() / 4.0;
            }
            let high = open.max(close) + (rng.gen_range(0..4) as f64) * 0.25;
            let low = (open.min(close) - (rng.gen_range(0..4) as f64) * 0.25).max(1.0);
            Bar {
                date: d0 + chrono::Days::new(i as u64),
                open,
                high,
                low,
                close,
                volume: rng.gen_range(0..10_000) as f64,
            }
        })
        .collect()
}

/// Two-dimensional points labelled by a noisy circular boundary.
pub fn random_svm_problem(n: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<Label>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    while x.len() < n {
        let p = vec![rng.gen_range(-2.0..2.0f64), rng.gen_range(-2.0..2.0f64)];
        let inside = p[0] * p[0] + p[1] * p[1] < 1.5;
        let flip = rng.gen_bool(0.15);
        x.push(p);
        y.push(Label::from(inside != flip));
    }
    // keep both classes present
    y[0] = 0;
    y[1] = 1;
    (x, y)
}

/// Two Gaussian clusters, `n_per_class` points each, centred at ±(1.5, 1.5).
pub fn blobs(n_per_class: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<Label>) {
    use rand_distr::{Distribution, Normal};
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 1.0).unwrap();
    let mut x = Vec::new();
    let mut y = Vec::new();
    for i in 0..2 * n_per_class {
        let label = (i % 2) as Label;
        let centre = if label == 1 { 1.5 } else { -1.5 };
        x.push(vec![centre + noise.sample(&mut rng), centre + noise.sample(&mut rng)]);
        y.push(label);
    }
    (x, y)
}

pub fn signed(y: &[Label]) -> Vec<f64> {
    y.iter().map(|&l| if l == 0 { -1.0 } else { 1.0 }).collect()
}
