use rand::Rng;
use serde::{Deserialize, Serialize};

use super::state::StateVector;
use crate::error::{Error, Result};

pub const NUM_BLOCKS: usize = 3;

/// Rotation axis used by the angle embedding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum EmbeddingAxis {
    #[default]
    X,
    Y,
    Z,
}

/// A single gate angle in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateAngle(f64);

impl GateAngle {
    pub fn new(theta: f64) -> Result<Self> {
        if !theta.is_finite() {
            return Err(Error::InvalidParameter(format!("gate angle {theta} is not finite")));
        }
        Ok(Self(theta))
    }

    pub fn radians(self) -> f64 {
        self.0
    }
}

/// Per-qubit `(φ, θ, ω)` Euler angles of one strongly-entangling layer.
#[derive(Debug, Clone, PartialEq)]
pub struct EntanglingBlockWeights {
    rotations: Vec<[f64; 3]>,
}

impl EntanglingBlockWeights {
    pub fn new(rotations: Vec<[f64; 3]>) -> Result<Self> {
        if rotations.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("block weights must be finite".into()));
        }
        Ok(Self { rotations })
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            rotations: vec![[0.0; 3]; n],
        }
    }

    pub fn rows(&self) -> &[[f64; 3]] {
        &self.rotations
    }

    pub fn num_qubits(&self) -> usize {
        self.rotations.len()
    }
}

/// Angle embedding followed by three strongly-entangling layers.
///
/// Layer `b` applies `Rot(φ, θ, ω) = Rz(ω)·Ry(θ)·Rz(φ)` to every qubit,
/// then `CNOT(q, (q + r_b) mod n)` for `q = 0..n`.
#[derive(Debug, Clone, PartialEq)]
pub struct CircuitSpec {
    n: usize,
    blocks: Vec<EntanglingBlockWeights>,
    ranges: [usize; NUM_BLOCKS],
    axis: EmbeddingAxis,
}

impl CircuitSpec {
    pub fn new(n: usize, blocks: Vec<EntanglingBlockWeights>) -> Result<Self> {
        Self::with_options(n, blocks, [1; NUM_BLOCKS], EmbeddingAxis::X)
    }

    pub fn with_options(
        n: usize,
        blocks: Vec<EntanglingBlockWeights>,
        ranges: [usize; NUM_BLOCKS],
        axis: EmbeddingAxis,
    ) -> Result<Self> {
        if n == 0 || n > StateVector::MAX_QUBITS {
            return Err(Error::InvalidParameter(format!(
                "qubit count {n} outside 1..={}",
                StateVector::MAX_QUBITS
            )));
        }
        if blocks.len() != NUM_BLOCKS {
            return Err(Error::InvalidParameter(format!(
                "circuit needs exactly {NUM_BLOCKS} blocks, got {}",
                blocks.len()
            )));
        }
        for b in &blocks {
            if b.num_qubits() != n {
                return Err(Error::DimensionMismatch {
                    what: "block weight rows",
                    expected: n,
                    found: b.num_qubits(),
                });
            }
        }
        if n >= 2 {
            if let Some(&r) = ranges.iter().find(|&&r| r == 0 || r >= n) {
                return Err(Error::InvalidParameter(format!(
                    "entangler range {r} must lie in 1..={}",
                    n - 1
                )));
            }
        }
        Ok(Self {
            n,
            blocks,
            ranges,
            axis,
        })
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::new(n, vec![EntanglingBlockWeights::zeros(n); NUM_BLOCKS])
    }

    /// Weights drawn uniformly from `[0, 2π)`.
    pub fn random(n: usize, rng: &mut impl Rng) -> Result<Self> {
        let blocks = (0..NUM_BLOCKS)
            .map(|_| {
                EntanglingBlockWeights::new(
                    (0..n)
                        .map(|_| std::array::from_fn(|_| rng.random_range(0.0..std::f64::consts::TAU)))
                        .collect(),
                )
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(n, blocks)
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn blocks(&self) -> &[EntanglingBlockWeights] {
        &self.blocks
    }

    pub fn ranges(&self) -> [usize; NUM_BLOCKS] {
        self.ranges
    }

    pub fn axis(&self) -> EmbeddingAxis {
        self.axis
    }

    pub fn num_weights(&self) -> usize {
        NUM_BLOCKS * 3 * self.n
    }

    /// Weights flattened as `[block][qubit][φ, θ, ω]`.
    pub fn weights_flat(&self) -> Vec<f64> {
        self.blocks
            .iter()
            .flat_map(|b| b.rows().iter().flatten().copied())
            .collect()
    }

    pub fn set_weights_flat(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.num_weights() {
            return Err(Error::DimensionMismatch {
                what: "circuit weight count",
                expected: self.num_weights(),
                found: flat.len(),
            });
        }
        if flat.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("circuit weights must be finite".into()));
        }
        for (b, chunk) in self.blocks.iter_mut().zip(flat.chunks(3 * self.n)) {
            for (row, w) in b.rotations.iter_mut().zip(chunk.chunks(3)) {
                row.copy_from_slice(w);
            }
        }
        Ok(())
    }
}

/// Where a parametrised gate reads its angle from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Param {
    Input(usize),
    Weight(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Pauli {
    X,
    Y,
    Z,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Gate {
    Rotation { axis: Pauli, qubit: usize, param: Param },
    Cnot { control: usize, target: usize },
}

/// Flattens a spec into its gate sequence. Every input angle and every
/// weight appears in exactly one gate.
pub(crate) fn gate_program(spec: &CircuitSpec) -> Vec<Gate> {
    let n = spec.n;
    let mut gates = Vec::with_capacity(n * (1 + NUM_BLOCKS * 4));
    let axis = match spec.axis {
        EmbeddingAxis::X => Pauli::X,
        EmbeddingAxis::Y => Pauli::Y,
        EmbeddingAxis::Z => Pauli::Z,
    };
    for q in 0..n {
        gates.push(Gate::Rotation {
            axis,
            qubit: q,
            param: Param::Input(q),
        });
    }
    for (b, &r) in spec.ranges.iter().enumerate() {
        for q in 0..n {
            let base = (b * n + q) * 3;
            for (j, axis) in [Pauli::Z, Pauli::Y, Pauli::Z].into_iter().enumerate() {
                gates.push(Gate::Rotation {
                    axis,
                    qubit: q,
                    param: Param::Weight(base + j),
                });
            }
        }
        if n > 1 {
            for q in 0..n {
                gates.push(Gate::Cnot {
                    control: q,
                    target: (q + r) % n,
                });
            }
        }
    }
    gates
}

#[inline]
pub(crate) fn angle(param: Param, inputs: &[f64], weights: &[f64]) -> f64 {
    match param {
        Param::Input(i) => inputs[i],
        Param::Weight(i) => weights[i],
    }
}

#[inline]
pub(crate) fn apply_gate(state: &mut StateVector, gate: Gate, theta: f64) {
    match gate {
        Gate::Rotation { axis, qubit, .. } => match axis {
            Pauli::X => state.rx_unchecked(qubit, theta),
            Pauli::Y => state.ry_unchecked(qubit, theta),
            Pauli::Z => state.rz_unchecked(qubit, theta),
        },
        Gate::Cnot { control, target } => state.cnot_unchecked(control, target),
    }
}

pub(crate) fn simulate(n: usize, gates: &[Gate], inputs: &[f64], weights: &[f64]) -> StateVector {
    let mut state = StateVector::zero(n).expect("qubit count validated by CircuitSpec");
    for &g in gates {
        let theta = match g {
            Gate::Rotation { param, .. } => angle(param, inputs, weights),
            Gate::Cnot { .. } => 0.0,
        };
        apply_gate(&mut state, g, theta);
    }
    state
}

pub(crate) fn check_inputs(spec: &CircuitSpec, inputs: &[f64]) -> Result<()> {
    if inputs.len() != spec.n {
        return Err(Error::DimensionMismatch {
            what: "circuit input count",
            expected: spec.n,
            found: inputs.len(),
        });
    }
    if inputs.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("circuit inputs must be finite".into()));
    }
    Ok(())
}

/// Prepares `⊗_q R_axis(angles[q]) |0⟩` with the X axis.
pub fn angle_embed(n: usize, angles: &[f64]) -> Result<StateVector> {
    angle_embed_axis(n, angles, EmbeddingAxis::X)
}

pub fn angle_embed_axis(n: usize, angles: &[f64], axis: EmbeddingAxis) -> Result<StateVector> {
    if angles.len() != n {
        return Err(Error::DimensionMismatch {
            what: "embedding angle count",
            expected: n,
            found: angles.len(),
        });
    }
    let mut state = StateVector::zero(n)?;
    for (q, &a) in angles.iter().enumerate() {
        match axis {
            EmbeddingAxis::X => state.apply_rx(q, a)?,
            EmbeddingAxis::Y => state.apply_ry(q, a)?,
            EmbeddingAxis::Z => state.apply_rz(q, a)?,
        }
    }
    Ok(state)
}

/// One strongly-entangling layer with entangler range `r`.
pub fn apply_entangling_block(
    mut state: StateVector,
    weights: &EntanglingBlockWeights,
    r: usize,
) -> Result<StateVector> {
    let n = state.num_qubits();
    if weights.num_qubits() != n {
        return Err(Error::DimensionMismatch {
            what: "block weight rows",
            expected: n,
            found: weights.num_qubits(),
        });
    }
    for (q, &[phi, theta, omega]) in weights.rows().iter().enumerate() {
        state.apply_rot(q, phi, theta, omega)?;
    }
    if n > 1 {
        if r == 0 || r >= n {
            return Err(Error::InvalidParameter(format!(
                "entangler range {r} must lie in 1..={}",
                n - 1
            )));
        }
        for q in 0..n {
            state.apply_cnot(q, (q + r) % n)?;
        }
    }
    Ok(state)
}

/// Final state of the full circuit.
pub fn circuit_state(spec: &CircuitSpec, inputs: &[f64]) -> Result<StateVector> {
    check_inputs(spec, inputs)?;
    Ok(simulate(spec.n, &gate_program(spec), inputs, &spec.weights_flat()))
}

/// Embeds `inputs`, runs the three layers and returns `⟨Z_q⟩` per qubit.
pub fn run_circuit(spec: &CircuitSpec, inputs: &[f64]) -> Result<Vec<f64>> {
    Ok(circuit_state(spec, inputs)?.expectations_z())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    #[test]
    fn zero_embedding_is_ground_state() {
        let s = angle_embed(3, &[0.0; 3]).unwrap();
        assert_eq!(s, StateVector::zero(3).unwrap());
        assert_eq!(s.expectations_z(), vec![1.0; 3]);
    }

    #[test]
    fn single_qubit_embedding() {
        for theta in [-2.0, 0.3, 1.7] {
            let s = angle_embed(1, &[theta]).unwrap();
            assert!((s.expectation_z(0).unwrap() - f64::cos(theta)).abs() < 1e-15);
        }
    }

    #[test]
    fn product_state_embedding() {
        let z = angle_embed(2, &[PI, 0.0]).unwrap().expectations_z();
        assert!((z[0] + 1.0).abs() < 1e-15);
        assert!((z[1] - 1.0).abs() < 1e-15);
        assert!(angle_embed(2, &[0.0]).is_err());
    }

    #[test]
    fn zero_block_on_ground_state() {
        let s = apply_entangling_block(StateVector::zero(2).unwrap(), &EntanglingBlockWeights::zeros(2), 1).unwrap();
        assert_eq!(s, StateVector::zero(2).unwrap());
    }

    #[test]
    fn single_qubit_block_flips() {
        let w = EntanglingBlockWeights::new(vec![[0.0, PI, 0.0]]).unwrap();
        let s = apply_entangling_block(StateVector::zero(1).unwrap(), &w, 1).unwrap();
        assert!((s.expectation_z(0).unwrap() + 1.0).abs() < 1e-15);
    }

    #[test]
    fn block_row_mismatch() {
        let err = apply_entangling_block(StateVector::zero(3).unwrap(), &EntanglingBlockWeights::zeros(2), 1);
        assert!(matches!(err, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn zero_block_has_order_three_for_two_qubits() {
        // With zero rotations the block is CNOT(1,0)·CNOT(0,1), a 3-cycle on
        // |01⟩, |10⟩, |11⟩.
        let mut s = angle_embed(2, &[0.4, 1.3]).unwrap();
        s.apply_ry(0, 0.8).unwrap();
        let start = s.clone();
        let w = EntanglingBlockWeights::zeros(2);
        let once = apply_entangling_block(s, &w, 1).unwrap();
        assert!(once
            .amplitudes()
            .iter()
            .zip(start.amplitudes())
            .any(|(a, b)| (a - b).norm() > 1e-3));
        let s = apply_entangling_block(once, &w, 1).unwrap();
        let s = apply_entangling_block(s, &w, 1).unwrap();
        for (a, b) in s.amplitudes().iter().zip(start.amplitudes()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn run_circuit_trivial_cases() {
        assert_eq!(
            run_circuit(&CircuitSpec::zeros(4).unwrap(), &[0.0; 4]).unwrap(),
            vec![1.0; 4]
        );
        let out = run_circuit(&CircuitSpec::zeros(1).unwrap(), &[0.9]).unwrap();
        assert!((out[0] - f64::cos(0.9)).abs() < 1e-15);
    }

    #[test]
    fn spec_validation() {
        assert!(CircuitSpec::new(2, vec![EntanglingBlockWeights::zeros(2); 2]).is_err());
        assert!(CircuitSpec::new(2, vec![EntanglingBlockWeights::zeros(3); 3]).is_err());
        let blocks = vec![EntanglingBlockWeights::zeros(3); 3];
        assert!(CircuitSpec::with_options(3, blocks.clone(), [1, 3, 1], EmbeddingAxis::X).is_err());
        assert!(CircuitSpec::with_options(3, blocks, [1, 2, 1], EmbeddingAxis::X).is_ok());
        // Range is irrelevant for one qubit.
        assert!(CircuitSpec::with_options(
            1,
            vec![EntanglingBlockWeights::zeros(1); 3],
            [5, 5, 5],
            EmbeddingAxis::X
        )
        .is_ok());
        assert!(EntanglingBlockWeights::new(vec![[f64::NAN, 0.0, 0.0]]).is_err());
        assert!(GateAngle::new(f64::INFINITY).is_err());
    }

    #[test]
    fn flat_weights_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let spec = CircuitSpec::random(3, &mut rng).unwrap();
        let flat = spec.weights_flat();
        assert_eq!(flat.len(), 27);
        assert_eq!(flat[3 * 3 + 2 * 3 + 1], spec.blocks()[1].rows()[2][1]);
        let mut other = CircuitSpec::zeros(3).unwrap();
        other.set_weights_flat(&flat).unwrap();
        assert_eq!(other, spec);
        assert!(other.set_weights_flat(&flat[1..]).is_err());
    }

    #[test]
    fn program_matches_layer_by_layer_application() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let blocks = (0..3)
            .map(|_| CircuitSpec::random(4, &mut rng).unwrap().blocks()[0].clone())
            .collect();
        let spec = CircuitSpec::with_options(4, blocks, [1, 2, 3], EmbeddingAxis::X).unwrap();
        let inputs = [0.1, -0.7, 2.2, 0.5];
        let mut s = angle_embed(4, &inputs).unwrap();
        for (b, &r) in spec.blocks().iter().zip(&spec.ranges()) {
            s = apply_entangling_block(s, b, r).unwrap();
        }
        let direct = circuit_state(&spec, &inputs).unwrap();
        for (a, b) in s.amplitudes().iter().zip(direct.amplitudes()) {
            assert!((a - b).norm() < 1e-14);
        }
    }
}
