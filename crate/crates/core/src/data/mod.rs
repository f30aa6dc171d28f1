//! Pair datasets: standardization, synthetic generators, and loaders for
//! plain pair files and cause-effect-pairs style directories.

mod fetch;
mod generate;
mod pairfile;
mod standardize;
mod tuebingen;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use fetch::{fetch_tuebingen, fetch_with, FetchOptions, FetchSummary, HttpTransport, Transport, TUEBINGEN_URL};
pub use generate::{generate_benchmark, generate_pair, generate_pair_with_truth, Family, GENERATOR_VERSION, GeneratedTruth, GeneratorSpec};
pub use pairfile::{load_pair_file, parse_columns, write_pair_file, LoadOptions};
pub use standardize::{standardize, Standardized};
pub use tuebingen::{
    load_pair_directory, load_tuebingen, parse_meta, write_labels_csv, write_meta, MetaEntry,
};

/// Ground-truth causal direction of a pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    XCausesY,
    YCausesX,
}

impl Direction {
    pub fn reversed(self) -> Self {
        match self {
            Direction::XCausesY => Direction::YCausesX,
            Direction::YCausesX => Direction::XCausesY,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Direction::XCausesY => "x_causes_y",
            Direction::YCausesX => "y_causes_x",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "x_causes_y" => Ok(Direction::XCausesY),
            "y_causes_x" => Ok(Direction::YCausesX),
            other => Err(Error::argument(format!("unknown direction {other:?}"))),
        }
    }
}

/// `N` paired scalar observations with an optional ground truth.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairDataset {
    pub id: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub weight: f64,
    pub label: Option<Direction>,
}

impl PairDataset {
    /// Unlabelled pair with unit weight.
    pub fn new(id: impl Into<String>, x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let pair = Self {
            id: id.into(),
            x,
            y,
            weight: 1.0,
            label: None,
        };
        pair.validate()?;
        Ok(pair)
    }

    pub fn with_label(mut self, label: Direction) -> Self {
        self.label = Some(label);
        self
    }

    pub fn with_weight(mut self, weight: f64) -> Result<Self> {
        self.weight = weight;
        self.validate()?;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        if self.x.len() != self.y.len() {
            return Err(Error::argument(format!(
                "pair {}: x has {} values, y has {}",
                self.id,
                self.x.len(),
                self.y.len()
            )));
        }
        if self.x.len() < 2 {
            return Err(Error::argument(format!("pair {}: need at least 2 samples", self.id)));
        }
        if !(self.weight > 0.0 && self.weight.is_finite()) {
            return Err(Error::argument(format!("pair {}: weight {} must be positive", self.id, self.weight)));
        }
        if self.x.iter().chain(&self.y).any(|v| !v.is_finite()) {
            return Err(Error::argument(format!("pair {}: non-finite observation", self.id)));
        }
        Ok(())
    }

    /// Same pair with the columns exchanged and the label mirrored.
    pub fn swapped(&self) -> Self {
        Self {
            id: self.id.clone(),
            x: self.y.clone(),
            y: self.x.clone(),
            weight: self.weight,
            label: self.label.map(Direction::reversed),
        }
    }
}
