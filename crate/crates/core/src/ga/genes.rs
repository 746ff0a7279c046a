use std::fmt;

use serde::{Deserialize, Serialize};

use crate::indicators::{IndicatorId, IndicatorSpec};

/// Allowed time-window range for one indicator, plus its conventional default.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneSpec {
    pub indicator: IndicatorId,
    pub tw_min: usize,
    pub tw_max: usize,
    pub default_tw: usize,
}

impl GeneSpec {
    pub fn contains(&self, tw: usize) -> bool {
        (self.tw_min..=self.tw_max).contains(&tw)
    }
}

/// Time-window bounds for every indicator, in [`IndicatorId::ALL`] order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneSpecs(pub [GeneSpec; 10]);

impl Default for GeneSpecs {
    fn default() -> Self {
        use IndicatorId::*;
        let g = |indicator, tw_min, tw_max, default_tw| GeneSpec {
            indicator,
            tw_min,
            tw_max,
            default_tw,
        };
        GeneSpecs([
            g(Stk, 8, 14, 9),
            g(Std, 3, 6, 3),
            g(Rsi, 5, 14, 6),
            g(Psy, 10, 15, 12),
            g(WmaBias, 6, 15, 10),
            g(Cci, 6, 15, 14),
            g(PlusDi, 6, 15, 10),
            g(MinusDi, 6, 15, 10),
            g(Adx, 6, 15, 10),
            g(AroonUp, 19, 28, 25),
        ])
    }
}

impl GeneSpecs {
    pub fn get(&self, id: IndicatorId) -> &GeneSpec {
        &self.0[id.index()]
    }

    pub fn iter(&self) -> impl Iterator<Item = &GeneSpec> {
        self.0.iter()
    }

    /// Checks ordering and bound sanity.
    pub fn validate(&self) -> Result<(), String> {
        for (spec, id) in self.0.iter().zip(IndicatorId::ALL) {
            if spec.indicator != id {
                return Err(format!("gene spec for {} found in slot of {id}", spec.indicator));
            }
            if spec.tw_min == 0 || spec.tw_min > spec.tw_max {
                return Err(format!(
                    "invalid window range {}..={} for {id}",
                    spec.tw_min, spec.tw_max
                ));
            }
        }
        Ok(())
    }
}

/// One (time window, selection bit) gene pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Gene {
    pub tw: usize,
    pub selected: bool,
}

/// A GA individual: one gene pair per indicator in [`IndicatorId::ALL`] order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Chromosome(pub [Gene; 10]);

impl Chromosome {
    /// The baseline with every indicator selected at its default window.
    pub fn default_for(specs: &GeneSpecs) -> Self {
        Chromosome(specs.0.map(|s| Gene {
            tw: s.default_tw,
            selected: true,
        }))
    }

    pub fn gene(&self, id: IndicatorId) -> Gene {
        self.0[id.index()]
    }

    pub fn n_selected(&self) -> usize {
        self.0.iter().filter(|g| g.selected).count()
    }

    /// Selected indicators with their windows, in canonical order.
    pub fn selected_specs(&self) -> Vec<IndicatorSpec> {
        IndicatorId::ALL
            .iter()
            .zip(&self.0)
            .filter(|(_, g)| g.selected)
            .map(|(&id, g)| IndicatorSpec::new(id, g.tw))
            .collect()
    }

    /// Lookback of the %K line that STD smooths: the STK gene's window,
    /// whether or not STK itself is selected.
    pub fn k_window(&self) -> usize {
        self.gene(IndicatorId::Stk).tw
    }

    pub fn within_bounds(&self, specs: &GeneSpecs) -> bool {
        self.0.iter().zip(specs.iter()).all(|(g, s)| s.contains(g.tw))
    }

    pub fn records(&self) -> Vec<GeneRecord> {
        IndicatorId::ALL
            .iter()
            .zip(&self.0)
            .map(|(&indicator, g)| GeneRecord {
                indicator,
                tw: g.tw,
                selected: g.selected,
            })
            .collect()
    }

    pub fn from_records(records: &[GeneRecord]) -> Result<Self, String> {
        if records.len() != IndicatorId::ALL.len() {
            return Err(format!("expected 10 genes, got {}", records.len()));
        }
        let mut genes = [Gene { tw: 1, selected: false }; 10];
        let mut seen = [false; 10];
        for r in records {
            let k = r.indicator.index();
            if seen[k] {
                return Err(format!("gene for {} listed twice", r.indicator));
            }
            seen[k] = true;
            genes[k] = Gene {
                tw: r.tw,
                selected: r.selected,
            };
        }
        Ok(Chromosome(genes))
    }
}

impl fmt::Display for Chromosome {
    /// Lists the selected indicators as `ID(tw)`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .selected_specs()
            .iter()
            .map(|s| format!("{}({})", s.id, s.window))
            .collect();
        f.write_str(&parts.join(" "))
    }
}

/// Serialized form of one gene pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneRecord {
    pub indicator: IndicatorId,
    pub tw: usize,
    pub selected: bool,
}

impl Serialize for Chromosome {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.records().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Chromosome {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let records = Vec::<GeneRecord>::deserialize(deserializer)?;
        Chromosome::from_records(&records).map_err(serde::de::Error::custom)
    }
}
