//! Seeded synthetic OHLCV series, including series whose next-day direction
//! is planted as a function of one indicator at a known window.

use chrono::NaiveDate;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::indicators::{compute, IndicatorId, IndicatorSpec};
use crate::market_data::{Bar, PriceSeries};

/// Next-day direction is up when the planted indicator is on the configured
/// side of `threshold`, then flipped with probability `noise`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantedSignal {
    pub spec: IndicatorSpec,
    pub threshold: f64,
    /// Up when the indicator is at or below the threshold (mean reversion).
    pub up_when_below: bool,
    pub noise: f64,
    pub n_bars: usize,
    pub seed: u64,
}

impl Default for PlantedSignal {
    fn default() -> Self {
        Self {
            spec: IndicatorSpec::new(IndicatorId::Rsi, 12),
            threshold: 50.0,
            up_when_below: true,
            noise: 0.15,
            n_bars: 1_500,
            seed: 0,
        }
    }
}

fn start_date() -> NaiveDate {
    NaiveDate::from_ymd_opt(2000, 1, 3).unwrap()
}

/// Builds a bar around `close` given the previous close.
fn make_bar<R: Rng>(date: NaiveDate, prev_close: f64, close: f64, rng: &mut R) -> Bar {
    let wick = Normal::new(0.0f64, 0.004).unwrap();
    let open = prev_close;
    let high = open.max(close) * (1.0 + wick.sample(rng).abs());
    let low = open.min(close) * (1.0 - wick.sample(rng).abs());
    Bar {
        date,
        open,
        high,
        low,
        close,
        volume: rng.gen_range(1e5..1e6f64).round(),
    }
}

/// Random walk with normally distributed daily returns.
pub fn random_walk(symbol: &str, n_bars: usize, seed: u64) -> PriceSeries {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ret = Normal::new(0.0003f64, 0.015).unwrap();
    let mut bars = Vec::with_capacity(n_bars);
    let mut close: f64 = 100.0;
    for i in 0..n_bars {
        let prev = close;
        close = (close * (1.0 + ret.sample(&mut rng))).max(1.0);
        bars.push(make_bar(
            start_date() + chrono::Days::new(i as u64),
            prev,
            close,
            &mut rng,
        ));
    }
    PriceSeries::new(symbol, bars).expect("generated bars are valid")
}

/// Generates a series whose direction follows the planted rule.
pub fn planted_series(symbol: &str, signal: &PlantedSignal) -> PriceSeries {
    let mut rng = ChaCha8Rng::seed_from_u64(signal.seed);
    let size = Normal::new(0.0f64, 0.012).unwrap();
    let warmup = signal.spec.id.warmup(signal.spec.window, signal.spec.window);
    let lookback = warmup + 1;
    let mut bars: Vec<Bar> = Vec::with_capacity(signal.n_bars);
    let mut close: f64 = 100.0;
    for i in 0..signal.n_bars {
        let rule_up = if bars.len() > warmup {
            let recent = &bars[bars.len() - lookback..];
            let value = compute(recent, signal.spec, signal.spec.window)
                .expect("lookback covers the warm-up")
                .values[lookback - 1]
                .unwrap();
            (value <= signal.threshold) == signal.up_when_below
        } else {
            rng.gen_bool(0.5)
        };
        let up = rule_up != rng.gen_bool(signal.noise);
        let magnitude = 0.001 + size.sample(&mut rng).abs();
        let prev = close;
        close *= if up { 1.0 + magnitude } else { 1.0 - magnitude.min(0.5) };
        bars.push(make_bar(
            start_date() + chrono::Days::new(i as u64),
            prev,
            close,
            &mut rng,
        ));
    }
    PriceSeries::new(symbol, bars).expect("generated bars are valid")
}
