//! OHLCV bar ingestion, validation and next-day movement labels.

use std::fmt;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

const DATE_FORMAT: &str = "%Y-%m-%d";

#[derive(Debug, Error)]
pub enum DataError {
    #[error("file not found: {0}")]
    FileNotFound(PathBuf),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("missing column '{0}' in header")]
    MissingColumn(String),
    #[error("line {line}, column '{column}': {message}")]
    ParseError { line: u64, column: String, message: String },
    #[error("line {line}: {reason}")]
    InvariantViolation { line: u64, reason: String },
    #[error("duplicate date {0}")]
    DuplicateDate(NaiveDate),
    #[error("series has {0} bars, at least 2 are required")]
    TooShort(usize),
    #[error("invalid column schema: {0}")]
    InvalidSchema(String),
}

/// One daily OHLCV bar.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bar {
    pub date: NaiveDate,
    pub open: f64,
    pub high: f64,
    pub low: f64,
    pub close: f64,
    pub volume: f64,
}

impl Bar {
    /// Checks the price ordering and sign constraints, returning a reason on failure.
    pub fn validate(&self) -> Result<(), String> {
        let prices = [
            ("open", self.open),
            ("high", self.high),
            ("low", self.low),
            ("close", self.close),
        ];
        for (name, v) in prices {
            if !v.is_finite() || v <= 0.0 {
                return Err(format!("{name} must be a positive finite price, got {v}"));
            }
        }
        if self.low > self.high {
            return Err(format!("low {} exceeds high {}", self.low, self.high));
        }
        if self.open < self.low || self.open > self.high {
            return Err(format!(
                "open {} outside [low {}, high {}]",
                self.open, self.low, self.high
            ));
        }
        if self.close < self.low || self.close > self.high {
            return Err(format!(
                "close {} outside [low {}, high {}]",
                self.close, self.low, self.high
            ));
        }
        if !self.volume.is_finite() || self.volume < 0.0 {
            return Err(format!("volume must be non-negative, got {}", self.volume));
        }
        Ok(())
    }
}

/// Date-ordered bars for a single instrument.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceSeries {
    pub symbol: String,
    bars: Vec<Bar>,
}

impl PriceSeries {
    /// Builds a series from bars in any order. Bars are validated, sorted
    /// ascending by date and checked for duplicate dates.
    pub fn new(symbol: impl Into<String>, mut bars: Vec<Bar>) -> Result<Self, DataError> {
        for (i, bar) in bars.iter().enumerate() {
            bar.validate().map_err(|reason| DataError::InvariantViolation {
                line: i as u64 + 1,
                reason,
            })?;
        }
        bars.sort_by_key(|b| b.date);
        if let Some(w) = bars.windows(2).find(|w| w[0].date == w[1].date) {
            return Err(DataError::DuplicateDate(w[0].date));
        }
        Ok(Self {
            symbol: symbol.into(),
            bars,
        })
    }

    pub fn bars(&self) -> &[Bar] {
        &self.bars
    }

    pub fn len(&self) -> usize {
        self.bars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bars.is_empty()
    }

    pub fn closes(&self) -> Vec<f64> {
        self.bars.iter().map(|b| b.close).collect()
    }

    pub fn highs(&self) -> Vec<f64> {
        self.bars.iter().map(|b| b.high).collect()
    }

    pub fn lows(&self) -> Vec<f64> {
        self.bars.iter().map(|b| b.low).collect()
    }

    /// Contiguous sub-series `[start, end)`, keeping the symbol.
    pub fn slice(&self, start: usize, end: usize) -> Self {
        Self {
            symbol: self.symbol.clone(),
            bars: self.bars[start..end].to_vec(),
        }
    }

    /// Writes the series in the default CSV layout.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), DataError> {
        let mut w = csv::Writer::from_writer(writer);
        let header = ColumnSchema::default();
        w.write_record(header.names()).map_err(|e| DataError::Io(e.into()))?;
        for b in &self.bars {
            w.write_record([
                b.date.format(DATE_FORMAT).to_string(),
                b.open.to_string(),
                b.high.to_string(),
                b.low.to_string(),
                b.close.to_string(),
                b.volume.to_string(),
            ])
            .map_err(|e| DataError::Io(e.into()))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Header names for each OHLCV field. Matching is case-insensitive and
/// ignores surrounding whitespace.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnSchema {
    pub date: String,
    pub open: String,
    pub high: String,
    pub low: String,
    pub close: String,
    pub volume: String,
}

impl Default for ColumnSchema {
    fn default() -> Self {
        Self {
            date: "date".into(),
            open: "open".into(),
            high: "high".into(),
            low: "low".into(),
            close: "close".into(),
            volume: "volume".into(),
        }
    }
}

impl ColumnSchema {
    fn names(&self) -> [&str; 6] {
        [&self.date, &self.open, &self.high, &self.low, &self.close, &self.volume]
    }
}

impl FromStr for ColumnSchema {
    type Err = DataError;

    /// Parses overrides of the form `date=Date,close=Adj Close`. Unnamed
    /// fields keep their defaults.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut schema = ColumnSchema::default();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| DataError::InvalidSchema(format!("expected key=value, got '{part}'")))?;
            let value = value.trim().to_string();
            if value.is_empty() {
                return Err(DataError::InvalidSchema(format!("empty column name for '{key}'")));
            }
            match key.trim().to_ascii_lowercase().as_str() {
                "date" => schema.date = value,
                "open" => schema.open = value,
                "high" => schema.high = value,
                "low" => schema.low = value,
                "close" => schema.close = value,
                "volume" => schema.volume = value,
                other => return Err(DataError::InvalidSchema(format!("unknown field '{other}'"))),
            }
        }
        Ok(schema)
    }
}

impl fmt::Display for ColumnSchema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "date={},open={},high={},low={},close={},volume={}",
            self.date, self.open, self.high, self.low, self.close, self.volume
        )
    }
}

/// Loads and validates a CSV file. The symbol defaults to the file stem.
pub fn load_csv(path: impl AsRef<Path>, schema: &ColumnSchema) -> Result<PriceSeries, DataError> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => DataError::FileNotFound(path.to_path_buf()),
        _ => DataError::Io(e),
    })?;
    let symbol = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    read_csv(file, &symbol, schema)
}

pub fn read_csv<R: Read>(reader: R, symbol: &str, schema: &ColumnSchema) -> Result<PriceSeries, DataError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers().map_err(csv_err)?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim().eq_ignore_ascii_case(name.trim()))
            .ok_or_else(|| DataError::MissingColumn(name.to_string()))
    };
    let idx = [
        find(&schema.date)?,
        find(&schema.open)?,
        find(&schema.high)?,
        find(&schema.low)?,
        find(&schema.close)?,
        find(&schema.volume)?,
    ];
    let names = schema.names();

    let mut rows: Vec<(u64, Bar)> = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(csv_err)?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let field = |k: usize| -> Result<&str, DataError> {
            record.get(idx[k]).ok_or_else(|| DataError::ParseError {
                line,
                column: names[k].to_string(),
                message: "missing field".into(),
            })
        };
        let date = NaiveDate::parse_from_str(field(0)?, DATE_FORMAT).map_err(|e| DataError::ParseError {
            line,
            column: names[0].to_string(),
            message: e.to_string(),
        })?;
        let mut nums = [0.0; 5];
        for (k, slot) in nums.iter_mut().enumerate() {
            let raw = field(k + 1)?;
            *slot = raw.parse::<f64>().map_err(|e| DataError::ParseError {
                line,
                column: names[k + 1].to_string(),
                message: format!("'{raw}': {e}"),
            })?;
        }
        let bar = Bar {
            date,
            open: nums[0],
            high: nums[1],
            low: nums[2],
            close: nums[3],
            volume: nums[4],
        };
        bar.validate()
            .map_err(|reason| DataError::InvariantViolation { line, reason })?;
        rows.push((line, bar));
    }
    rows.sort_by_key(|(_, b)| b.date);
    if let Some(w) = rows.windows(2).find(|w| w[0].1.date == w[1].1.date) {
        return Err(DataError::DuplicateDate(w[0].1.date));
    }
    Ok(PriceSeries {
        symbol: symbol.to_string(),
        bars: rows.into_iter().map(|(_, b)| b).collect(),
    })
}

fn csv_err(e: csv::Error) -> DataError {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => DataError::Io(io),
        other => DataError::ParseError {
            line,
            column: String::new(),
            message: format!("{other:?}"),
        },
    }
}

/// Binary next-day direction label: 1 when the next close is equal or higher.
pub type Label = u8;

/// A price series with one label per bar except the last.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSeries {
    pub series: PriceSeries,
    pub labels: Vec<Label>,
}

impl LabeledSeries {
    pub fn bars(&self) -> &[Bar] {
        self.series.bars()
    }
}

pub fn label(series: PriceSeries) -> Result<LabeledSeries, DataError> {
    if series.len() < 2 {
        return Err(DataError::TooShort(series.len()));
    }
    let labels = series
        .bars()
        .windows(2)
        .map(|w| Label::from(w[1].close >= w[0].close))
        .collect();
    Ok(LabeledSeries { series, labels })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bar(day: u32, close: f64) -> Bar {
        Bar {
            date: NaiveDate::from_ymd_opt(2020, 1, day).unwrap(),
            open: close,
            high: close,
            low: close,
            close,
            volume: 100.0,
        }
    }

    fn closes_series(closes: &[f64]) -> PriceSeries {
        let bars = closes.iter().enumerate().map(|(i, &c)| bar(i as u32 + 1, c)).collect();
        PriceSeries::new("T", bars).unwrap()
    }

    #[test]
    fn reads_valid_rows() {
        let csv = "date,open,high,low,close,volume\n\
                   2020-01-01,10,11,9,10.5,100\n\
                   2020-01-02,10.5,12,10,11,200\n\
                   2020-01-03,11,11.5,10.5,11.2,150\n";
        let s = read_csv(csv.as_bytes(), "X", &ColumnSchema::default()).unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s.bars()[1].high, 12.0);
    }

    #[test]
    fn rejects_low_above_high() {
        let csv = "date,open,high,low,close,volume\n\
                   2020-01-01,10,11,9,10.5,100\n\
                   2020-01-02,10.5,10,12,11,200\n";
        let err = read_csv(csv.as_bytes(), "X", &ColumnSchema::default()).unwrap_err();
        assert!(matches!(err, DataError::InvariantViolation { line: 3, .. }), "{err}");
    }

    #[test]
    fn sorts_out_of_order_rows() {
        let csv = "date,open,high,low,close,volume\n\
                   2020-01-03,1,1,1,1,0\n\
                   2020-01-01,2,2,2,2,0\n\
                   2020-01-02,3,3,3,3,0\n";
        let s = read_csv(csv.as_bytes(), "X", &ColumnSchema::default()).unwrap();
        let mut expected: Vec<NaiveDate> = s.bars().iter().map(|b| b.date).collect();
        expected.sort();
        let got: Vec<NaiveDate> = s.bars().iter().map(|b| b.date).collect();
        assert_eq!(got, expected);
        assert_eq!(s.bars()[0].close, 2.0);
    }

    #[test]
    fn duplicate_dates_rejected() {
        let csv = "date,open,high,low,close,volume\n\
                   2020-01-01,1,1,1,1,0\n\
                   2020-01-01,2,2,2,2,0\n";
        let err = read_csv(csv.as_bytes(), "X", &ColumnSchema::default()).unwrap_err();
        assert!(matches!(err, DataError::DuplicateDate(_)));
    }

    #[test]
    fn parse_error_names_line_and_column() {
        let csv = "date,open,high,low,close,volume\n2020-01-01,1,x,1,1,0\n";
        match read_csv(csv.as_bytes(), "X", &ColumnSchema::default()).unwrap_err() {
            DataError::ParseError { line, column, .. } => {
                assert_eq!(line, 2);
                assert_eq!(column, "high");
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn schema_override_maps_columns() {
        let schema: ColumnSchema = "date=Date,close=Adj Close".parse().unwrap();
        let csv = "Adj Close,Date,open,high,low,volume,close\n\
                   10,2020-01-01,10,11,9,5,99\n";
        let s = read_csv(csv.as_bytes(), "X", &schema).unwrap();
        assert_eq!(s.bars()[0].close, 10.0);
        assert!("bogus=1".parse::<ColumnSchema>().is_err());
    }

    #[test]
    fn missing_file() {
        let err = load_csv("/definitely/not/here.csv", &ColumnSchema::default()).unwrap_err();
        assert!(matches!(err, DataError::FileNotFound(_)));
    }

    #[test]
    fn labels_follow_next_close() {
        assert_eq!(label(closes_series(&[10.0, 10.0])).unwrap().labels, vec![1]);
        assert_eq!(label(closes_series(&[10.0, 9.0])).unwrap().labels, vec![0]);
        assert_eq!(
            label(closes_series(&[5.0, 6.0, 6.0, 4.0])).unwrap().labels,
            vec![1, 1, 0]
        );
        assert!(matches!(label(closes_series(&[5.0])), Err(DataError::TooShort(1))));
    }
}
