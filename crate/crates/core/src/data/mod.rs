//! Datasets: synthetic generation, CSV files, splits and scaling.

mod csv;
mod scaler;
mod synthetic;

use rand::seq::SliceRandom;

pub use self::csv::{load_csv, save_csv, write_csv};
pub use scaler::Scaler;
pub use synthetic::{generate_synthetic, SyntheticMap, GENERATOR_VERSION};

use crate::error::{Error, Result};
use crate::rng::{self, Stream};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Metadata {
    pub seed: Option<u64>,
    pub generator: Option<String>,
    /// Set once the dataset has been passed through a scaler.
    pub scaler: Option<Scaler>,
}

/// `N` paired input/target rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    inputs: Vec<Vec<f64>>,
    targets: Vec<Vec<f64>>,
    pub metadata: Metadata,
}

impl Dataset {
    pub fn new(inputs: Vec<Vec<f64>>, targets: Vec<Vec<f64>>) -> Result<Self> {
        if inputs.len() != targets.len() {
            return Err(Error::DimensionMismatch {
                what: "target row count",
                expected: inputs.len(),
                found: targets.len(),
            });
        }
        let d = inputs.first().map_or(0, Vec::len);
        let m = targets.first().map_or(0, Vec::len);
        if !inputs.is_empty() && (d == 0 || m == 0) {
            return Err(Error::InvalidInput("input and target widths must be at least 1".into()));
        }
        for (i, (x, y)) in inputs.iter().zip(&targets).enumerate() {
            if x.len() != d || y.len() != m {
                return Err(Error::InvalidInput(format!("row {i} has inconsistent width")));
            }
            if x.iter().chain(y).any(|v| !v.is_finite()) {
                return Err(Error::InvalidInput(format!("row {i} contains a non-finite value")));
            }
        }
        Ok(Self {
            inputs,
            targets,
            metadata: Metadata::default(),
        })
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn input_dim(&self) -> usize {
        self.inputs.first().map_or(0, Vec::len)
    }

    pub fn output_dim(&self) -> usize {
        self.targets.first().map_or(0, Vec::len)
    }

    pub fn inputs(&self) -> &[Vec<f64>] {
        &self.inputs
    }

    pub fn targets(&self) -> &[Vec<f64>] {
        &self.targets
    }

    /// Rows at the given indices, in that order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            inputs: indices.iter().map(|&i| self.inputs[i].clone()).collect(),
            targets: indices.iter().map(|&i| self.targets[i].clone()).collect(),
            metadata: Metadata {
                scaler: self.metadata.scaler.clone(),
                ..self.metadata.clone()
            },
        }
    }
}

/// Seeded permutation split into `(train, test)` row indices.
pub fn split_indices(n: usize, train_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "train fraction must lie strictly between 0 and 1, got {train_fraction}"
        )));
    }
    if n < 2 {
        return Err(Error::InvalidInput(format!(
            "cannot split {n} samples into two non-empty parts"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng::stream(seed, Stream::Split));
    let n_train = ((train_fraction * n as f64).round() as usize).clamp(1, n - 1);
    let test = order.split_off(n_train);
    Ok((order, test))
}

pub fn split(dataset: &Dataset, train_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    let (train, test) = split_indices(dataset.len(), train_fraction, seed)?;
    Ok((dataset.subset(&train), dataset.subset(&test)))
}
