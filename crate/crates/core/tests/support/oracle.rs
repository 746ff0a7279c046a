//! Naive reference implementations used to check the library.
//!
//! Each indicator is re-derived from its textbook definition with explicit
//! index loops and no shared helpers from the library.

#![allow(dead_code, clippy::needless_range_loop)]

use gatwo_core::indicators::IndicatorId;
use gatwo_core::market_data::Bar;

fn high(b: &[Bar], i: usize) -> f64 {
    b[i].high
}
fn low(b: &[Bar], i: usize) -> f64 {
    b[i].low
}
fn close(b: &[Bar], i: usize) -> f64 {
    b[i].close
}

pub fn stk(b: &[Bar], n: usize) -> Vec<Option<f64>> {
    let mut out = vec![None; b.len()];
    for t in 0..b.len() {
        if t + 1 < n {
            continue;
        }
        let mut highs: Vec<f64> = Vec::new();
        let mut lows: Vec<f64> = Vec::new();
        for lag in 0..n {
            highs.push(high(b, t - lag));
            lows.push(low(b, t - lag));
        }
        highs.sort_by(|a, c| a.partial_cmp(c).unwrap());
        lows.sort_by(|a, c| a.partial_cmp(c).unwrap());
        let hh = highs[n - 1];
        let ll = lows[0];
        out[t] = Some(if hh == ll {
            0.0
        } else {
            100.0 * (close(b, t) - ll) / (hh - ll)
        });
    }
    out
}

pub fn std_line(b: &[Bar], n: usize, k: usize) -> Vec<Option<f64>> {
    let kline = stk(b, k);
    let mut out = vec![None; b.len()];
    for t in 0..b.len() {
        let mut acc = 0.0;
        let mut ok = t + 1 >= n;
        if ok {
            for lag in 0..n {
                match kline[t - lag] {
                    Some(v) => acc += v,
                    None => ok = false,
                }
            }
        }
        if ok {
            out[t] = Some(acc / n as f64);
        }
    }
    out
}

pub fn rsi(b: &[Bar], n: usize) -> Vec<Option<f64>> {
    let mut out = vec![None; b.len()];
    for t in n..b.len() {
        let mut ups = Vec::new();
        let mut downs = Vec::new();
        for i in (t + 1 - n)..=t {
            let d = close(b, i) - close(b, i - 1);
            ups.push(if d > 0.0 { d } else { 0.0 });
            downs.push(if d < 0.0 { -d } else { 0.0 });
        }
        let avg_up = ups.iter().sum::<f64>() / n as f64;
        let avg_down = downs.iter().sum::<f64>() / n as f64;
        out[t] = Some(if avg_down == 0.0 && avg_up == 0.0 {
            50.0
        } else if avg_down == 0.0 {
            100.0
        } else {
            100.0 - 100.0 / (1.0 + avg_up / avg_down)
        });
    }
    out
}

pub fn psy(b: &[Bar], n: usize) -> Vec<Option<f64>> {
    let mut out = vec![None; b.len()];
    for t in n..b.len() {
        let mut rises = 0;
        for i in (t + 1 - n)..=t {
            if close(b, i) > close(b, i - 1) {
                rises += 1;
            }
        }
        out[t] = Some(100.0 * rises as f64 / n as f64);
    }
    out
}

pub fn wma_bias(b: &[Bar], n: usize) -> Vec<Option<f64>> {
    let mut out = vec![None; b.len()];
    for t in (n - 1)..b.len() {
        // oldest bar in the window gets weight 1, the newest weight n
        let mut num = 0.0;
        let mut den = 0.0;
        for (w, i) in ((t + 1 - n)..=t).enumerate() {
            let weight = (w + 1) as f64;
            num += weight * close(b, i);
            den += weight;
        }
        out[t] = Some(close(b, t) - num / den);
    }
    out
}

pub fn cci(b: &[Bar], n: usize) -> Vec<Option<f64>> {
    let m: Vec<f64> = (0..b.len())
        .map(|i| (high(b, i) + low(b, i) + close(b, i)) / 3.0)
        .collect();
    let mut out = vec![None; b.len()];
    for t in (n - 1)..b.len() {
        let mut sm = 0.0;
        for lag in 0..n {
            sm += m[t - lag];
        }
        sm /= n as f64;
        let mut d = 0.0;
        for lag in 0..n {
            d += (m[t - lag] - sm).abs();
        }
        d /= n as f64;
        out[t] = Some(if d == 0.0 { 0.0 } else { (m[t] - sm) / (0.015 * d) });
    }
    out
}

fn dm_tr(b: &[Bar], i: usize) -> (f64, f64, f64) {
    let up = high(b, i) - high(b, i - 1);
    let down = low(b, i - 1) - low(b, i);
    let plus = if up > 0.0 { up } else { 0.0 };
    let minus = if down > 0.0 { down } else { 0.0 };
    let a = high(b, i) - low(b, i);
    let c = (high(b, i) - close(b, i - 1)).abs();
    let d = (low(b, i) - close(b, i - 1)).abs();
    let tr = [a, c, d].iter().cloned().fold(f64::MIN, f64::max);
    (plus, minus, tr)
}

fn di_at(b: &[Bar], n: usize, t: usize, plus: bool) -> f64 {
    let mut dm = 0.0;
    let mut tr = 0.0;
    for i in (t + 1 - n)..=t {
        let (p, m, r) = dm_tr(b, i);
        dm += if plus { p } else { m };
        tr += r;
    }
    if tr == 0.0 {
        0.0
    } else {
        100.0 * dm / tr
    }
}

pub fn di(b: &[Bar], n: usize, plus: bool) -> Vec<Option<f64>> {
    let mut out = vec![None; b.len()];
    for t in n..b.len() {
        out[t] = Some(di_at(b, n, t, plus));
    }
    out
}

pub fn adx(b: &[Bar], n: usize) -> Vec<Option<f64>> {
    let mut out = vec![None; b.len()];
    for t in (2 * n - 1)..b.len() {
        let mut acc = 0.0;
        for s in (t + 1 - n)..=t {
            let p = di_at(b, n, s, true);
            let m = di_at(b, n, s, false);
            acc += if p + m == 0.0 {
                0.0
            } else {
                100.0 * (p - m).abs() / (p + m)
            };
        }
        out[t] = Some(acc / n as f64);
    }
    out
}

pub fn aroon_up(b: &[Bar], n: usize) -> Vec<Option<f64>> {
    let mut out = vec![None; b.len()];
    for t in n..b.len() {
        // walk backwards from today; the first strict new maximum seen going
        // back is what counts, so the most recent tie wins
        let mut best_lag = 0;
        let mut best = high(b, t);
        for lag in 1..=n {
            if high(b, t - lag) > best {
                best = high(b, t - lag);
                best_lag = lag;
            }
        }
        out[t] = Some(100.0 * (n - best_lag) as f64 / n as f64);
    }
    out
}

/// Dispatches to the reference for `id`; `k` is the %K lookback for STD.
pub fn indicator(id: IndicatorId, b: &[Bar], n: usize, k: usize) -> Vec<Option<f64>> {
    match id {
        IndicatorId::Stk => stk(b, n),
        IndicatorId::Std => std_line(b, n, k),
        IndicatorId::Rsi => rsi(b, n),
        IndicatorId::Psy => psy(b, n),
        IndicatorId::WmaBias => wma_bias(b, n),
        IndicatorId::Cci => cci(b, n),
        IndicatorId::PlusDi => di(b, n, true),
        IndicatorId::MinusDi => di(b, n, false),
        IndicatorId::Adx => adx(b, n),
        IndicatorId::AroonUp => aroon_up(b, n),
    }
}

/// Largest absolute difference between two columns; `None` if their
/// defined/undefined patterns differ.
pub fn max_abs_diff(a: &[Option<f64>], b: &[Option<f64>]) -> Option<f64> {
    if a.len() != b.len() {
        return None;
    }
    let mut worst: f64 = 0.0;
    for (x, y) in a.iter().zip(b) {
        match (x, y) {
            (Some(x), Some(y)) => worst = worst.max((x - y).abs()),
            (None, None) => {}
            _ => return None,
        }
    }
    Some(worst)
}
