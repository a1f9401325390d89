//! Deterministic inputs for the kernel benchmarks.

use qmlp_core::features::{build_spd, expand};
use qmlp_core::model::{Architecture, HybridModel, ModelConfig};
use qmlp_core::qsim::CircuitSpec;
use qmlp_core::Matrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A random `n`-qubit circuit and input angles.
pub fn circuit(n: usize, seed: u64) -> (CircuitSpec, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spec = CircuitSpec::random(n, &mut rng).expect("valid width");
    let x = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
    (spec, x)
}

/// The 35×35 regularised outer product of one expanded 7-dim sample.
pub fn spd_matrix(seed: u64) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x: Vec<f64> = (0..7).map(|_| rng.random_range(0.0..1.0)).collect();
    build_spd(&expand(&x).expect("finite"), 1e-6)
        .expect("finite")
        .matrix()
        .clone()
}

/// A model with the full default widths (7 inputs, `output_dim` outputs),
/// one input and one target.
pub fn model(arch: Architecture, output_dim: usize, seed: u64) -> (HybridModel, Vec<f64>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fit: Vec<Vec<f64>> = (0..64)
        .map(|_| (0..7).map(|_| rng.random_range(0.0..1.0)).collect())
        .collect();
    let config = ModelConfig {
        output_dim,
        ..ModelConfig::new(arch)
    };
    let model = HybridModel::init(config, seed, &fit).expect("valid config");
    let x = (0..7).map(|_| rng.random_range(0.0..1.0)).collect();
    let t = (0..output_dim).map(|_| rng.random_range(-1.0..1.0)).collect();
    (model, x, t)
}
