//! Long-only, all-in/all-out trading simulation and its performance metrics.

use std::io::Write;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::market_data::{Bar, Label};

#[derive(Debug, Error, PartialEq)]
pub enum TradingError {
    #[error("no bars to simulate")]
    EmptySeries,
    #[error("{signals} signals for {bars} bars")]
    SignalLengthMismatch { bars: usize, signals: usize },
    #[error("malformed ledger at trade {0}")]
    MalformedLedger(usize),
    #[error("equity curve is empty")]
    EmptyCurve,
    #[error("series has {0} bars, at least 2 are required")]
    TooShort(usize),
    #[error("invalid trading config: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TradingConfig {
    pub initial_cash: f64,
    pub cost_per_transaction: f64,
}

impl Default for TradingConfig {
    fn default() -> Self {
        Self {
            initial_cash: 100_000.0,
            cost_per_transaction: 5.0,
        }
    }
}

impl TradingConfig {
    pub fn validate(&self) -> Result<(), TradingError> {
        if !(self.initial_cash > 0.0 && self.initial_cash.is_finite()) {
            return Err(TradingError::InvalidConfig(format!(
                "initial cash must be > 0, got {}",
                self.initial_cash
            )));
        }
        if !(self.cost_per_transaction >= 0.0 && self.cost_per_transaction.is_finite()) {
            return Err(TradingError::InvalidConfig(format!(
                "transaction cost must be >= 0, got {}",
                self.cost_per_transaction
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Action {
    Buy,
    Sell,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TradeEvent {
    pub bar: usize,
    pub action: Action,
    pub shares: u64,
    pub price: f64,
}

/// Cash and whole shares held.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Position {
    pub shares: u64,
    pub cash: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationResult {
    pub trades: Vec<TradeEvent>,
    pub dates: Vec<NaiveDate>,
    /// Account value `cash + shares · close` after each bar.
    pub equity_curve: Vec<f64>,
    pub total_profit: f64,
    /// Percent of the initial cash.
    pub rate_of_return: f64,
    /// Percent, never positive.
    pub max_drawdown: f64,
    /// Shares still held after the last bar, marked to the final close.
    pub unrealized_shares: u64,
}

/// Headline numbers exported alongside the equity curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationSummary {
    pub tp: f64,
    pub rr: f64,
    pub mdd: f64,
    pub n_trades: usize,
}

impl SimulationResult {
    pub fn summary(&self) -> SimulationSummary {
        SimulationSummary {
            tp: self.total_profit,
            rr: self.rate_of_return,
            mdd: self.max_drawdown,
            n_trades: self.trades.len(),
        }
    }

    /// Fraction of simulated bars on which a trade was executed.
    pub fn trade_fraction(&self) -> f64 {
        if self.equity_curve.is_empty() {
            0.0
        } else {
            self.trades.len() as f64 / self.equity_curve.len() as f64
        }
    }

    /// Writes `date,equity` rows.
    pub fn write_equity_csv<W: Write>(&self, writer: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["date", "equity"])?;
        for (d, v) in self.dates.iter().zip(&self.equity_curve) {
            w.write_record([d.format("%Y-%m-%d").to_string(), v.to_string()])?;
        }
        w.flush()
    }
}

/// Runs the all-in/all-out state machine: buy as many whole shares as cash
/// allows when flat and the signal is 1, sell everything when long and the
/// signal is 0. Orders fill at the signal bar's close.
pub fn simulate(bars: &[Bar], signals: &[Label], config: &TradingConfig) -> Result<SimulationResult, TradingError> {
    config.validate()?;
    if bars.is_empty() {
        return Err(TradingError::EmptySeries);
    }
    if bars.len() != signals.len() {
        return Err(TradingError::SignalLengthMismatch {
            bars: bars.len(),
            signals: signals.len(),
        });
    }
    let tcost = config.cost_per_transaction;
    let mut pos = Position {
        shares: 0,
        cash: config.initial_cash,
    };
    let mut trades = Vec::new();
    let mut equity_curve = Vec::with_capacity(bars.len());
    for (t, (bar, &signal)) in bars.iter().zip(signals).enumerate() {
        let price = bar.close;
        if pos.shares == 0 && signal == 1 {
            if let Some(ev) = try_buy(&mut pos, t, price, tcost) {
                trades.push(ev);
            }
        } else if pos.shares > 0 && signal == 0 {
            if let Some(ev) = try_sell(&mut pos, t, price, tcost) {
                trades.push(ev);
            }
        }
        equity_curve.push(pos.cash + pos.shares as f64 * price);
    }
    finish(bars, trades, equity_curve, pos, config)
}

/// Buys on the first bar and sells on the last.
pub fn buy_and_hold(bars: &[Bar], config: &TradingConfig) -> Result<SimulationResult, TradingError> {
    if bars.len() < 2 {
        return Err(TradingError::TooShort(bars.len()));
    }
    let mut signals = vec![1; bars.len()];
    *signals.last_mut().unwrap() = 0;
    simulate(bars, &signals, config)
}

fn try_buy(pos: &mut Position, bar: usize, price: f64, tcost: f64) -> Option<TradeEvent> {
    let shares = ((pos.cash - tcost) / price).floor();
    if shares < 1.0 {
        return None;
    }
    let shares = shares as u64;
    pos.cash -= shares as f64 * price + tcost;
    pos.shares = shares;
    Some(TradeEvent {
        bar,
        action: Action::Buy,
        shares,
        price,
    })
}

fn try_sell(pos: &mut Position, bar: usize, price: f64, tcost: f64) -> Option<TradeEvent> {
    let proceeds = pos.shares as f64 * price;
    // The broker fee must be payable; otherwise keep holding.
    if pos.cash + proceeds < tcost {
        return None;
    }
    let shares = pos.shares;
    pos.cash += proceeds - tcost;
    pos.shares = 0;
    Some(TradeEvent {
        bar,
        action: Action::Sell,
        shares,
        price,
    })
}

fn finish(
    bars: &[Bar],
    trades: Vec<TradeEvent>,
    equity_curve: Vec<f64>,
    pos: Position,
    config: &TradingConfig,
) -> Result<SimulationResult, TradingError> {
    let final_close = bars.last().map(|b| b.close);
    let total_profit = total_profit(&trades, config, final_close)?;
    let max_drawdown = max_drawdown(&equity_curve)?;
    Ok(SimulationResult {
        rate_of_return: rate_of_return(total_profit, config.initial_cash),
        dates: bars.iter().map(|b| b.date).collect(),
        trades,
        equity_curve,
        total_profit,
        max_drawdown,
        unrealized_shares: pos.shares,
    })
}

/// Sale proceeds minus purchase costs over round trips, minus one
/// transaction cost per executed BUY or SELL. A trailing open BUY is marked
/// at `mark_price` when given, and contributes only its cost otherwise.
pub fn total_profit(
    trades: &[TradeEvent],
    config: &TradingConfig,
    mark_price: Option<f64>,
) -> Result<f64, TradingError> {
    let mut gross = 0.0;
    let mut open: Option<&TradeEvent> = None;
    for (k, ev) in trades.iter().enumerate() {
        match (ev.action, open) {
            (Action::Buy, None) => open = Some(ev),
            (Action::Sell, Some(buy)) if buy.shares == ev.shares => {
                gross += ev.shares as f64 * ev.price - buy.shares as f64 * buy.price;
                open = None;
            }
            _ => return Err(TradingError::MalformedLedger(k)),
        }
    }
    if let (Some(buy), Some(mark)) = (open, mark_price) {
        gross += buy.shares as f64 * mark - buy.shares as f64 * buy.price;
    }
    Ok(gross - trades.len() as f64 * config.cost_per_transaction)
}

/// Percent return on the initial investment.
pub fn rate_of_return(total_profit: f64, initial_cash: f64) -> f64 {
    total_profit * 100.0 / initial_cash
}

/// Worst decline from the running peak, in percent (≤ 0).
pub fn max_drawdown(curve: &[f64]) -> Result<f64, TradingError> {
    if curve.is_empty() {
        return Err(TradingError::EmptyCurve);
    }
    let mut peak = f64::NEG_INFINITY;
    let mut worst: f64 = 0.0;
    for &v in curve {
        peak = peak.max(v);
        worst = worst.min(v / peak - 1.0);
    }
    Ok(worst * 100.0)
}
