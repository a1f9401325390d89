//! Synthetic stand-in for a finite-element response dataset.
//!
//! Each response is a fixed smooth nonlinear function of the inputs,
//!
//! ```text
//! y_j(x) = Σ_i A_ji sin(ω_ji x_i + φ_ji) + Σ_{i<l} B_jil x_i x_l
//! ```
//!
//! with coefficients drawn once from the seed and inputs uniform on
//! `[0, 1]^d`.

use std::f64::consts::{FRAC_PI_2, TAU};

use rand::Rng;

use super::{Dataset, Metadata};
use crate::error::{Error, Result};
use crate::rng::{self, Stream};

pub const GENERATOR_VERSION: &str = "sinusoid-interaction-v1";

/// Coefficients of the synthetic response map.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticMap {
    pub input_dim: usize,
    pub output_dim: usize,
    /// `A`, `ω` and `φ`, each `output_dim × input_dim` row-major.
    pub amplitude: Vec<f64>,
    pub frequency: Vec<f64>,
    pub phase: Vec<f64>,
    /// `B`, `output_dim × d(d−1)/2`, pairs `(i, l)` with `i < l` in
    /// lexicographic order.
    pub interaction: Vec<f64>,
}

impl SyntheticMap {
    /// `A, B ~ U[−1, 1]`, `ω ~ U[π/2, 2π]`, `φ ~ U[0, 2π)`.
    pub fn random(input_dim: usize, output_dim: usize, seed: u64) -> Self {
        let mut rng = rng::stream(seed, Stream::SyntheticCoefficients);
        let dm = input_dim * output_dim;
        let pairs = input_dim * input_dim.saturating_sub(1) / 2;
        let amplitude = (0..dm).map(|_| rng.random_range(-1.0..=1.0)).collect();
        let frequency = (0..dm).map(|_| rng.random_range(FRAC_PI_2..=TAU)).collect();
        let phase = (0..dm).map(|_| rng.random_range(0.0..TAU)).collect();
        let interaction = (0..output_dim * pairs).map(|_| rng.random_range(-1.0..=1.0)).collect();
        Self {
            input_dim,
            output_dim,
            amplitude,
            frequency,
            phase,
            interaction,
        }
    }

    /// Every amplitude and interaction coefficient zero.
    pub fn zeroed(input_dim: usize, output_dim: usize) -> Self {
        let mut map = Self::random(input_dim, output_dim, 0);
        map.amplitude.iter_mut().for_each(|a| *a = 0.0);
        map.interaction.iter_mut().for_each(|b| *b = 0.0);
        map
    }

    fn pairs(&self) -> usize {
        self.input_dim * self.input_dim.saturating_sub(1) / 2
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        let d = self.input_dim;
        let p = self.pairs();
        (0..self.output_dim)
            .map(|j| {
                let mut y = 0.0;
                for (i, xi) in x.iter().enumerate().take(d) {
                    let k = j * d + i;
                    y += self.amplitude[k] * (self.frequency[k] * xi + self.phase[k]).sin();
                }
                let mut k = j * p;
                for i in 0..d {
                    for l in (i + 1)..d {
                        y += self.interaction[k] * x[i] * x[l];
                        k += 1;
                    }
                }
                y
            })
            .collect()
    }

    /// Upper bound on `|∂y_j/∂x_i|` over `[0, 1]^d`.
    pub fn gradient_bound(&self, j: usize) -> f64 {
        let d = self.input_dim;
        let p = self.pairs();
        let sines: f64 = (0..d)
            .map(|i| (self.amplitude[j * d + i] * self.frequency[j * d + i]).abs())
            .sum();
        let products: f64 = self.interaction[j * p..(j + 1) * p].iter().map(|b| b.abs()).sum();
        sines + products
    }

    /// Draws `n` uniform inputs and evaluates the map on them.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Dataset> {
        if n == 0 || self.input_dim == 0 || self.output_dim == 0 {
            return Err(Error::InvalidParameter(format!(
                "synthetic sizes must be positive (n = {n}, d = {}, M = {})",
                self.input_dim, self.output_dim
            )));
        }
        let mut rng = rng::stream(seed, Stream::SyntheticInputs);
        let inputs: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..self.input_dim).map(|_| rng.random::<f64>()).collect())
            .collect();
        let targets = inputs.iter().map(|x| self.eval(x)).collect();
        let mut ds = Dataset::new(inputs, targets)?;
        ds.metadata = Metadata {
            seed: Some(seed),
            generator: Some(GENERATOR_VERSION.to_string()),
            scaler: None,
        };
        Ok(ds)
    }
}

pub fn generate_synthetic(seed: u64, n: usize, input_dim: usize, output_dim: usize) -> Result<Dataset> {
    if input_dim == 0 || output_dim == 0 {
        return Err(Error::InvalidParameter("synthetic widths must be positive".into()));
    }
    SyntheticMap::random(input_dim, output_dim, seed).sample(n, seed)
}
