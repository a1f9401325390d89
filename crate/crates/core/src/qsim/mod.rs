//! Exact statevector simulation of the angle-embedding plus three
//! strongly-entangling-layer circuit, with Pauli-Z readout and gradients.

mod circuit;
mod gradient;
mod oracle;
mod state;

pub use circuit::{
    angle_embed, angle_embed_axis, apply_entangling_block, circuit_state, run_circuit, CircuitSpec, EmbeddingAxis,
    EntanglingBlockWeights, GateAngle, NUM_BLOCKS,
};
pub use gradient::{
    adjoint_jacobian, adjoint_vjp, circuit_jacobian, finite_difference_jacobian, jacobian_with, vjp_with,
    CircuitJacobian, CircuitVjp, GradientMethod,
};
pub use oracle::{dense_matrix_oracle, dense_matrix_state, MAX_ORACLE_QUBITS};
pub use state::{apply_cnot, apply_rx, apply_ry, apply_rz, StateVector, NORM_TOLERANCE};
