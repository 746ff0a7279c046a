//! The ten technical indicators used as classifier features.
//!
//! Every indicator is evaluated over the `n`-bar window ending at and
//! including bar `t`. Values whose window would reach before bar 0 are
//! `None`, so the warm-up prefix of each column is explicit. A zero
//! denominator (flat window, zero mean deviation, zero true range) yields 0,
//! except for RSI, which is 100 when there are no down moves and 50 when the
//! window is completely flat.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::market_data::Bar;

/// Scaling constant of the commodity channel index.
const CCI_SCALE: f64 = 0.015;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum IndicatorError {
    #[error("window must be at least 1")]
    ZeroWindow,
    #[error("{id} with window {window} needs more than {len} bars")]
    WindowTooLargeForSeries { id: IndicatorId, window: usize, len: usize },
    #[error("no indicators requested")]
    EmptySpec,
    #[error("indicator {0} requested twice")]
    DuplicateIndicator(IndicatorId),
    #[error("series has {0} bars, at least 2 are required")]
    TooShort(usize),
    #[error("unknown indicator '{0}'")]
    UnknownIndicator(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum IndicatorId {
    #[serde(rename = "STK")]
    Stk,
    #[serde(rename = "STD")]
    Std,
    #[serde(rename = "RSI")]
    Rsi,
    #[serde(rename = "PSY")]
    Psy,
    #[serde(rename = "WMA_BIAS")]
    WmaBias,
    #[serde(rename = "CCI")]
    Cci,
    #[serde(rename = "PLUS_DI")]
    PlusDi,
    #[serde(rename = "MINUS_DI")]
    MinusDi,
    #[serde(rename = "ADX")]
    Adx,
    #[serde(rename = "AROON_UP")]
    AroonUp,
}

impl IndicatorId {
    /// Canonical gene order.
    pub const ALL: [IndicatorId; 10] = [
        IndicatorId::Stk,
        IndicatorId::Std,
        IndicatorId::Rsi,
        IndicatorId::Psy,
        IndicatorId::WmaBias,
        IndicatorId::Cci,
        IndicatorId::PlusDi,
        IndicatorId::MinusDi,
        IndicatorId::Adx,
        IndicatorId::AroonUp,
    ];

    pub fn code(self) -> &'static str {
        match self {
            IndicatorId::Stk => "STK",
            IndicatorId::Std => "STD",
            IndicatorId::Rsi => "RSI",
            IndicatorId::Psy => "PSY",
            IndicatorId::WmaBias => "WMA_BIAS",
            IndicatorId::Cci => "CCI",
            IndicatorId::PlusDi => "PLUS_DI",
            IndicatorId::MinusDi => "MINUS_DI",
            IndicatorId::Adx => "ADX",
            IndicatorId::AroonUp => "AROON_UP",
        }
    }

    /// Position of this indicator in [`IndicatorId::ALL`].
    pub fn index(self) -> usize {
        Self::ALL.iter().position(|&id| id == self).unwrap()
    }

    /// Index of the first defined value for window `n`. `k_window` is the
    /// %K lookback used by STD and ignored by everything else.
    pub fn warmup(self, n: usize, k_window: usize) -> usize {
        match self {
            IndicatorId::Stk | IndicatorId::WmaBias | IndicatorId::Cci => n - 1,
            IndicatorId::Std => (k_window - 1) + (n - 1),
            IndicatorId::Rsi | IndicatorId::Psy | IndicatorId::PlusDi | IndicatorId::MinusDi | IndicatorId::AroonUp => {
                n
            }
            IndicatorId::Adx => 2 * n - 1,
        }
    }
}

impl fmt::Display for IndicatorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for IndicatorId {
    type Err = IndicatorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().to_ascii_uppercase().replace(['-', ' '], "_");
        let id = match norm.as_str() {
            "STK" => IndicatorId::Stk,
            "STD" => IndicatorId::Std,
            "RSI" => IndicatorId::Rsi,
            "PSY" => IndicatorId::Psy,
            "WMA_BIAS" | "WMA" => IndicatorId::WmaBias,
            "CCI" => IndicatorId::Cci,
            "PLUS_DI" | "+DI" => IndicatorId::PlusDi,
            "MINUS_DI" | "_DI" => IndicatorId::MinusDi,
            "ADX" => IndicatorId::Adx,
            "AROON_UP" | "AROON" => IndicatorId::AroonUp,
            _ => return Err(IndicatorError::UnknownIndicator(s.to_string())),
        };
        Ok(id)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IndicatorSpec {
    pub id: IndicatorId,
    pub window: usize,
}

impl IndicatorSpec {
    pub fn new(id: IndicatorId, window: usize) -> Self {
        Self { id, window }
    }
}

/// Indicator values aligned 1:1 with the source bars.
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorColumn {
    pub spec: IndicatorSpec,
    pub values: Vec<Option<f64>>,
}

impl IndicatorColumn {
    /// Index of the first defined value, if any.
    pub fn first_defined(&self) -> Option<usize> {
        self.values.iter().position(Option::is_some)
    }
}

/// Which direction of movement a directional indicator tracks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Plus,
    Minus,
}

/// Per-bar directional movement and true range; index 0 is undefined.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionalMovement {
    pub plus_dm: Vec<Option<f64>>,
    pub minus_dm: Vec<Option<f64>>,
    pub true_range: Vec<Option<f64>>,
}

fn check(id: IndicatorId, bars: &[Bar], n: usize, k_window: usize) -> Result<usize, IndicatorError> {
    if n == 0 || k_window == 0 {
        return Err(IndicatorError::ZeroWindow);
    }
    let warmup = id.warmup(n, k_window);
    if warmup >= bars.len() {
        return Err(IndicatorError::WindowTooLargeForSeries {
            id,
            window: n,
            len: bars.len(),
        });
    }
    Ok(warmup)
}

/// Evaluates `f(t)` for every defined index `t >= warmup`.
fn column(spec: IndicatorSpec, len: usize, warmup: usize, f: impl Fn(usize) -> f64) -> IndicatorColumn {
    let values = (0..len).map(|t| (t >= warmup).then(|| f(t))).collect();
    IndicatorColumn { spec, values }
}

fn ratio_or_zero(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

pub fn stochastic_k(bars: &[Bar], n: usize) -> Result<IndicatorColumn, IndicatorError> {
    let warmup = check(IndicatorId::Stk, bars, n, 1)?;
    Ok(column(
        IndicatorSpec::new(IndicatorId::Stk, n),
        bars.len(),
        warmup,
        |t| {
            let window = &bars[t + 1 - n..=t];
            let hh = window.iter().map(|b| b.high).fold(f64::NEG_INFINITY, f64::max);
            let ll = window.iter().map(|b| b.low).fold(f64::INFINITY, f64::min);
            ratio_or_zero(bars[t].close - ll, hh - ll) * 100.0
        },
    ))
}

/// Simple moving average of an existing %K column over `n` values.
pub fn stochastic_d(stk: &IndicatorColumn, n: usize) -> Result<IndicatorColumn, IndicatorError> {
    if n == 0 {
        return Err(IndicatorError::ZeroWindow);
    }
    let len = stk.values.len();
    let warmup = stk.first_defined().map(|k0| k0 + n - 1).filter(|&w| w < len).ok_or(
        IndicatorError::WindowTooLargeForSeries {
            id: IndicatorId::Std,
            window: n,
            len,
        },
    )?;
    Ok(column(IndicatorSpec::new(IndicatorId::Std, n), len, warmup, |t| {
        stk.values[t + 1 - n..=t].iter().map(|v| v.unwrap()).sum::<f64>() / n as f64
    }))
}

pub fn rsi(bars: &[Bar], n: usize) -> Result<IndicatorColumn, IndicatorError> {
    let warmup = check(IndicatorId::Rsi, bars, n, 1)?;
    Ok(column(
        IndicatorSpec::new(IndicatorId::Rsi, n),
        bars.len(),
        warmup,
        |t| {
            let (up, down) = (t + 1 - n..=t).fold((0.0, 0.0), |(up, down), i| {
                let change = bars[i].close - bars[i - 1].close;
                if change > 0.0 {
                    (up + change, down)
                } else {
                    (up, down - change)
                }
            });
            if down == 0.0 {
                if up == 0.0 {
                    50.0
                } else {
                    100.0
                }
            } else {
                100.0 - 100.0 / (1.0 + up / down)
            }
        },
    ))
}

pub fn psy(bars: &[Bar], n: usize) -> Result<IndicatorColumn, IndicatorError> {
    let warmup = check(IndicatorId::Psy, bars, n, 1)?;
    Ok(column(
        IndicatorSpec::new(IndicatorId::Psy, n),
        bars.len(),
        warmup,
        |t| {
            let rising = (t + 1 - n..=t).filter(|&i| bars[i].close > bars[i - 1].close).count();
            rising as f64 / n as f64 * 100.0
        },
    ))
}

/// Close minus the linearly weighted moving average of closes, with the
/// most recent close weighted `n` and the oldest weighted 1.
pub fn wma_bias(bars: &[Bar], n: usize) -> Result<IndicatorColumn, IndicatorError> {
    let warmup = check(IndicatorId::WmaBias, bars, n, 1)?;
    let weight_sum = (n * (n + 1) / 2) as f64;
    Ok(column(
        IndicatorSpec::new(IndicatorId::WmaBias, n),
        bars.len(),
        warmup,
        |t| {
            let weighted: f64 = (0..n).map(|lag| (n - lag) as f64 * bars[t - lag].close).sum();
            bars[t].close - weighted / weight_sum
        },
    ))
}

pub fn cci(bars: &[Bar], n: usize) -> Result<IndicatorColumn, IndicatorError> {
    let warmup = check(IndicatorId::Cci, bars, n, 1)?;
    let typical: Vec<f64> = bars.iter().map(|b| (b.high + b.low + b.close) / 3.0).collect();
    Ok(column(
        IndicatorSpec::new(IndicatorId::Cci, n),
        bars.len(),
        warmup,
        |t| {
            let window = &typical[t + 1 - n..=t];
            let mean = window.iter().sum::<f64>() / n as f64;
            let mean_dev = window.iter().map(|m| (m - mean).abs()).sum::<f64>() / n as f64;
            ratio_or_zero(typical[t] - mean, CCI_SCALE * mean_dev)
        },
    ))
}

pub fn directional_movement(bars: &[Bar]) -> Result<DirectionalMovement, IndicatorError> {
    if bars.len() < 2 {
        return Err(IndicatorError::TooShort(bars.len()));
    }
    let mut dm = DirectionalMovement {
        plus_dm: vec![None; bars.len()],
        minus_dm: vec![None; bars.len()],
        true_range: vec![None; bars.len()],
    };
    for t in 1..bars.len() {
        let (prev, cur) = (&bars[t - 1], &bars[t]);
        dm.plus_dm[t] = Some((cur.high - prev.high).max(0.0));
        dm.minus_dm[t] = Some((prev.low - cur.low).max(0.0));
        dm.true_range[t] = Some(
            (cur.high - cur.low)
                .max((cur.high - prev.close).abs())
                .max((cur.low - prev.close).abs()),
        );
    }
    Ok(dm)
}

fn di_from(dm: &DirectionalMovement, direction: Direction, t: usize, n: usize) -> f64 {
    let moves = match direction {
        Direction::Plus => &dm.plus_dm,
        Direction::Minus => &dm.minus_dm,
    };
    let range = t + 1 - n..=t;
    let moved: f64 = moves[range.clone()].iter().map(|v| v.unwrap()).sum();
    let tr: f64 = dm.true_range[range].iter().map(|v| v.unwrap()).sum();
    ratio_or_zero(moved, tr) * 100.0
}

pub fn di(bars: &[Bar], n: usize, direction: Direction) -> Result<IndicatorColumn, IndicatorError> {
    let id = match direction {
        Direction::Plus => IndicatorId::PlusDi,
        Direction::Minus => IndicatorId::MinusDi,
    };
    let warmup = check(id, bars, n, 1)?;
    let dm = directional_movement(bars)?;
    Ok(column(IndicatorSpec::new(id, n), bars.len(), warmup, |t| {
        di_from(&dm, direction, t, n)
    }))
}

/// Simple `n`-bar average of the directional index
/// `|+DI - (-DI)| / (+DI + (-DI)) * 100`.
pub fn adx(bars: &[Bar], n: usize) -> Result<IndicatorColumn, IndicatorError> {
    let warmup = check(IndicatorId::Adx, bars, n, 1)?;
    let dm = directional_movement(bars)?;
    let dx: Vec<f64> = (0..bars.len())
        .map(|t| {
            if t < n {
                return 0.0;
            }
            let plus = di_from(&dm, Direction::Plus, t, n);
            let minus = di_from(&dm, Direction::Minus, t, n);
            ratio_or_zero((plus - minus).abs(), plus + minus) * 100.0
        })
        .collect();
    Ok(column(
        IndicatorSpec::new(IndicatorId::Adx, n),
        bars.len(),
        warmup,
        |t| dx[t + 1 - n..=t].iter().sum::<f64>() / n as f64,
    ))
}

/// Aroon Up over the `n + 1` bars `t - n ..= t`, so the bars-since-high count
/// ranges over `0..=n`. Ties resolve to the most recent high.
pub fn aroon_up(bars: &[Bar], n: usize) -> Result<IndicatorColumn, IndicatorError> {
    let warmup = check(IndicatorId::AroonUp, bars, n, 1)?;
    Ok(column(
        IndicatorSpec::new(IndicatorId::AroonUp, n),
        bars.len(),
        warmup,
        |t| {
            let mut best = t - n;
            for i in t - n..=t {
                if bars[i].high >= bars[best].high {
                    best = i;
                }
            }
            let since_high = t - best;
            (n - since_high) as f64 / n as f64 * 100.0
        },
    ))
}

/// Computes one indicator. `k_window` is the %K lookback used when `spec`
/// is STD; other indicators ignore it.
pub fn compute(bars: &[Bar], spec: IndicatorSpec, k_window: usize) -> Result<IndicatorColumn, IndicatorError> {
    let n = spec.window;
    match spec.id {
        IndicatorId::Stk => stochastic_k(bars, n),
        IndicatorId::Std => {
            check(IndicatorId::Std, bars, n, k_window)?;
            stochastic_d(&stochastic_k(bars, k_window)?, n)
        }
        IndicatorId::Rsi => rsi(bars, n),
        IndicatorId::Psy => psy(bars, n),
        IndicatorId::WmaBias => wma_bias(bars, n),
        IndicatorId::Cci => cci(bars, n),
        IndicatorId::PlusDi => di(bars, n, Direction::Plus),
        IndicatorId::MinusDi => di(bars, n, Direction::Minus),
        IndicatorId::Adx => adx(bars, n),
        IndicatorId::AroonUp => aroon_up(bars, n),
    }
}

/// Raw indicator values for the bars where every requested column is defined.
///
/// Row `r` holds the values of bar `first_bar + r`, columns in `specs` order.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    pub specs: Vec<IndicatorSpec>,
    pub first_bar: usize,
    pub rows: Vec<Vec<f64>>,
}

impl FeatureTable {
    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.specs.len()
    }

    /// Source bar index of each row.
    pub fn bar_indices(&self) -> std::ops::Range<usize> {
        self.first_bar..self.first_bar + self.rows.len()
    }
}

/// Builds a feature table for the given indicators, dropping the warm-up
/// prefix so that every row is fully defined. STD smooths a %K computed with
/// `k_window`.
pub fn build_features(bars: &[Bar], specs: &[IndicatorSpec], k_window: usize) -> Result<FeatureTable, IndicatorError> {
    if specs.is_empty() {
        return Err(IndicatorError::EmptySpec);
    }
    for (i, s) in specs.iter().enumerate() {
        if specs[..i].iter().any(|o| o.id == s.id) {
            return Err(IndicatorError::DuplicateIndicator(s.id));
        }
    }
    let columns = specs
        .iter()
        .map(|&s| compute(bars, s, k_window))
        .collect::<Result<Vec<_>, _>>()?;
    let first_bar = specs.iter().map(|s| s.id.warmup(s.window, k_window)).max().unwrap();
    let rows = (first_bar..bars.len())
        .map(|t| {
            columns
                .iter()
                .map(|c| c.values[t].expect("defined past warm-up"))
                .collect()
        })
        .collect();
    Ok(FeatureTable {
        specs: specs.to_vec(),
        first_bar,
        rows,
    })
}
