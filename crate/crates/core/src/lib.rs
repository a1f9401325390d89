//! Hybrid quantum-classical regression for finite-element surrogate
//! modelling.
//!
//! The crate is organised bottom-up:
//!
//! - [`features`]: polynomial expansion, SPD construction, Jacobi
//!   eigendecomposition, top-k projection and state normalisation.
//! - [`qsim`]: statevector simulator for the embedding + three-layer
//!   strongly-entangling circuit, parameter-shift and adjoint gradients and
//!   a dense-matrix reference.
//! - [`model`]: dense layers, the quantum layer and the three hybrid
//!   architectures, with exact backpropagation and regression metrics.
//! - [`data`]: synthetic dataset generation, CSV I/O, splits and scaling.
//! - [`train`]: Adam training loop, evaluation, checkpoints and the
//!   architecture comparison.

pub mod data;
pub mod error;
pub mod features;
pub mod linalg;
pub mod model;
pub mod qsim;
pub mod rng;
pub mod train;

pub use error::{Error, Result};
pub use features::{
    EigenBasis, ExpandedFeatures, FeatureVector, ProjectedState, ProjectionMode, SpdMatrix, SpdPipeline,
};
pub use linalg::Matrix;
pub use model::{Architecture, HybridModel, ModelConfig};
pub use qsim::{CircuitSpec, GradientMethod, StateVector};
pub use train::{TrainConfig, TrainReport};
