//! JSON descriptions of measures and g-functions.
//!
//! ```json
//! {"type": "markov", "alphabet": ["0", "1"], "order": 1,
//!  "block_dist": [0.5, 0.5], "kernel": [[0.9, 0.1], [0.1, 0.9]]}
//! {"type": "separability", "alpha": 3.0, "x": {"prefix": [1], "period": [0]}}
//! {"type": "induced", "base": {"alpha": 3.0, "x": {"period": [0]}},
//!  "alphabet": ["a", "b", "c", "d"], "projection": {"a": 0, "b": 0, "c": 1, "d": 1}}
//! {"type": "table", "range": 1, "values": [0.4, 0.6]}
//! {"type": "long_range", "beta": 0.2, "range": "inf"}
//! ```
//!
//! A Markov spec without `block_dist` denotes the stationary measure of its
//! kernel.

use std::collections::BTreeMap;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::gfun::{GFunction, HulseG, LocallyConstantG, LongRangeIsingG};
use crate::measures::{CylinderOracle, InducedMeasure, MarkovMeasure, SeparabilityMeasure, SequenceRule};
use crate::symbolic::Alphabet;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceSpec {
    #[serde(default)]
    pub prefix: Vec<u8>,
    pub period: Vec<u8>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeparabilitySpec {
    pub alpha: f64,
    pub x: SequenceSpec,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ProjectionSpec {
    ByLabel(BTreeMap<String, u8>),
    InOrder(Vec<u8>),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeasureSpec {
    Markov {
        alphabet: Option<Alphabet>,
        order: usize,
        block_dist: Option<Vec<f64>>,
        kernel: Vec<Vec<f64>>,
    },
    Separability {
        alpha: f64,
        x: SequenceSpec,
    },
    Induced {
        base: SeparabilitySpec,
        alphabet: Alphabet,
        projection: ProjectionSpec,
    },
}

/// A measure built from a [`MeasureSpec`].
#[derive(Debug, Clone, PartialEq)]
pub enum Measure {
    Markov(MarkovMeasure),
    Separability(SeparabilityMeasure),
    Induced(InducedMeasure),
}

impl Measure {
    pub fn oracle(&self) -> &dyn CylinderOracle {
        match self {
            Measure::Markov(m) => m,
            Measure::Separability(m) => m,
            Measure::Induced(m) => m,
        }
    }

    pub fn as_markov(&self) -> Option<&MarkovMeasure> {
        match self {
            Measure::Markov(m) => Some(m),
            _ => None,
        }
    }
}

fn separability(alpha: f64, x: SequenceSpec) -> Result<SeparabilityMeasure> {
    SeparabilityMeasure::new(SequenceRule::new(x.prefix, x.period)?, alpha)
}

impl MeasureSpec {
    pub fn build(self) -> Result<Measure> {
        Ok(match self {
            MeasureSpec::Markov {
                alphabet,
                order,
                block_dist,
                kernel,
            } => {
                let alphabet = match alphabet {
                    Some(a) => a,
                    None => Alphabet::numeric(kernel.first().map_or(0, Vec::len))?,
                };
                Measure::Markov(match block_dist {
                    Some(b) => MarkovMeasure::new(alphabet, order, &b, &kernel)?,
                    None => MarkovMeasure::stationary_from_kernel(alphabet, order, &kernel)?,
                })
            }
            MeasureSpec::Separability { alpha, x } => Measure::Separability(separability(alpha, x)?),
            MeasureSpec::Induced {
                base,
                alphabet,
                projection,
            } => {
                let classes = match projection {
                    ProjectionSpec::InOrder(v) => v,
                    ProjectionSpec::ByLabel(map) => {
                        if let Some(extra) = map.keys().find(|l| alphabet.index_of(l).is_none()) {
                            return Err(Error::Parse(format!("projection names unknown symbol {extra:?}")));
                        }
                        alphabet
                            .symbols()
                            .iter()
                            .map(|s| {
                                map.get(s)
                                    .copied()
                                    .ok_or_else(|| Error::Parse(format!("projection misses symbol {s:?}")))
                            })
                            .collect::<Result<_>>()?
                    }
                };
                Measure::Induced(InducedMeasure::new(separability(base.alpha, base.x)?, alphabet, classes)?)
            }
        })
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum RangeSpec {
    Finite(usize),
    Named(String),
}

impl RangeSpec {
    fn resolve(&self) -> Result<Option<usize>> {
        match self {
            RangeSpec::Finite(r) => Ok(Some(*r)),
            RangeSpec::Named(s) if s == "inf" => Ok(None),
            RangeSpec::Named(s) => Err(Error::Parse(format!("range must be a number or \"inf\", got {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum GSpec {
    Table {
        alphabet: Option<Alphabet>,
        range: usize,
        values: Vec<f64>,
    },
    LongRange {
        beta: f64,
        range: RangeSpec,
    },
    Hulse(HulseG),
}

#[derive(Debug, Clone, PartialEq)]
pub enum GFunctionValue {
    Table(LocallyConstantG),
    LongRange(LongRangeIsingG),
}

impl GFunctionValue {
    pub fn as_gfunction(&self) -> &dyn GFunction {
        match self {
            GFunctionValue::Table(g) => g,
            GFunctionValue::LongRange(g) => g,
        }
    }

    /// Table form, available for every finite-range function.
    pub fn to_table(&self) -> Result<LocallyConstantG> {
        match self {
            GFunctionValue::Table(g) => Ok(g.clone()),
            GFunctionValue::LongRange(g) => g.to_table(),
        }
    }
}

impl GSpec {
    pub fn build(self) -> Result<GFunctionValue> {
        Ok(match self {
            GSpec::Table {
                alphabet,
                range,
                values,
            } => {
                let alphabet = match alphabet {
                    Some(a) => a,
                    None => {
                        let k = (1..=values.len())
                            .find(|&k| k >= 2 && crate::capacity::power(k, range) == values.len() as u128)
                            .ok_or_else(|| Error::Parse("cannot infer the alphabet size from the table length".into()))?;
                        Alphabet::numeric(k)?
                    }
                };
                GFunctionValue::Table(LocallyConstantG::new(alphabet, range, &values)?)
            }
            GSpec::LongRange { beta, range } => GFunctionValue::LongRange(LongRangeIsingG::new(beta, range.resolve()?)?),
            GSpec::Hulse(params) => GFunctionValue::Table(params.to_table()?),
        })
    }
}

fn parse_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

pub fn parse_measure(text: &str) -> Result<Measure> {
    parse_json::<MeasureSpec>(text)?.build()
}

pub fn parse_g(text: &str) -> Result<GFunctionValue> {
    parse_json::<GSpec>(text)?.build()
}
