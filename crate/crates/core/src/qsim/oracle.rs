//! Dense-matrix reference simulator.
//!
//! Builds every gate of the circuit as an explicit `2ⁿ × 2ⁿ` unitary from
//! Kronecker products, multiplies the unitaries in order and reads the
//! expectations off `Z_q = I ⊗ … ⊗ Z ⊗ … ⊗ I`. It shares only
//! [`CircuitSpec`] with the statevector path.

use num_complex::Complex64;

use super::circuit::{CircuitSpec, EmbeddingAxis};
use crate::error::{Error, Result};

pub const MAX_ORACLE_QUBITS: usize = 10;

#[derive(Debug, Clone, PartialEq)]
struct CMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    fn identity(dim: usize) -> Self {
        let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            data[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        Self { dim, data }
    }

    fn from_2x2(m: [[Complex64; 2]; 2]) -> Self {
        Self {
            dim: 2,
            data: vec![m[0][0], m[0][1], m[1][0], m[1][1]],
        }
    }

    fn kron(&self, other: &CMatrix) -> CMatrix {
        let dim = self.dim * other.dim;
        let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
        for i in 0..self.dim {
            for j in 0..self.dim {
                let a = self.data[i * self.dim + j];
                for k in 0..other.dim {
                    for l in 0..other.dim {
                        data[(i * other.dim + k) * dim + (j * other.dim + l)] = a * other.data[k * other.dim + l];
                    }
                }
            }
        }
        CMatrix { dim, data }
    }

    fn matmul(&self, other: &CMatrix) -> CMatrix {
        let n = self.dim;
        let mut data = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                for j in 0..n {
                    data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        CMatrix { dim: n, data }
    }

    fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.data[i * self.dim + j] * v[j]).sum())
            .collect()
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn rx(t: f64) -> [[Complex64; 2]; 2] {
    let (co, si) = ((t / 2.0).cos(), (t / 2.0).sin());
    [[c(co, 0.0), c(0.0, -si)], [c(0.0, -si), c(co, 0.0)]]
}

fn ry(t: f64) -> [[Complex64; 2]; 2] {
    let (co, si) = ((t / 2.0).cos(), (t / 2.0).sin());
    [[c(co, 0.0), c(-si, 0.0)], [c(si, 0.0), c(co, 0.0)]]
}

fn rz(t: f64) -> [[Complex64; 2]; 2] {
    [
        [Complex64::from_polar(1.0, -t / 2.0), c(0.0, 0.0)],
        [c(0.0, 0.0), Complex64::from_polar(1.0, t / 2.0)],
    ]
}

/// `I ⊗ … ⊗ U ⊗ … ⊗ I` with `U` in slot `q` (qubit 0 leftmost).
fn embed_single(n: usize, q: usize, u: [[Complex64; 2]; 2]) -> CMatrix {
    let mut out = CMatrix::identity(1);
    for slot in 0..n {
        let factor = if slot == q {
            CMatrix::from_2x2(u)
        } else {
            CMatrix::identity(2)
        };
        out = out.kron(&factor);
    }
    out
}

/// CNOT as `|0⟩⟨0|_c ⊗ I + |1⟩⟨1|_c ⊗ X_t`.
fn cnot(n: usize, control: usize, target: usize) -> CMatrix {
    let zero = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    let p0 = [[one, zero], [zero, zero]];
    let p1 = [[zero, zero], [zero, one]];
    let x = [[zero, one], [one, zero]];
    let mut a = CMatrix::identity(1);
    let mut b = CMatrix::identity(1);
    for slot in 0..n {
        let (fa, fb) = if slot == control {
            (CMatrix::from_2x2(p0), CMatrix::from_2x2(p1))
        } else if slot == target {
            (CMatrix::identity(2), CMatrix::from_2x2(x))
        } else {
            (CMatrix::identity(2), CMatrix::identity(2))
        };
        a = a.kron(&fa);
        b = b.kron(&fb);
    }
    CMatrix {
        dim: a.dim,
        data: a.data.iter().zip(&b.data).map(|(x, y)| x + y).collect(),
    }
}

/// Total circuit unitary, for `n ≤ MAX_ORACLE_QUBITS`.
fn circuit_unitary(spec: &CircuitSpec, inputs: &[f64]) -> CMatrix {
    let n = spec.num_qubits();
    let mut total = CMatrix::identity(1 << n);
    let mut push = |g: CMatrix| total = g.matmul(&total);

    for (q, &a) in inputs.iter().enumerate() {
        let u = match spec.axis() {
            EmbeddingAxis::X => rx(a),
            EmbeddingAxis::Y => ry(a),
            EmbeddingAxis::Z => rz(a),
        };
        push(embed_single(n, q, u));
    }
    for (block, r) in spec.blocks().iter().zip(spec.ranges()) {
        for (q, &[phi, theta, omega]) in block.rows().iter().enumerate() {
            push(embed_single(n, q, rz(phi)));
            push(embed_single(n, q, ry(theta)));
            push(embed_single(n, q, rz(omega)));
        }
        if n > 1 {
            for q in 0..n {
                push(cnot(n, q, (q + r) % n));
            }
        }
    }
    total
}

fn check_size(spec: &CircuitSpec, inputs: &[f64]) -> Result<()> {
    let n = spec.num_qubits();
    if n > MAX_ORACLE_QUBITS {
        return Err(Error::Resource(format!(
            "dense oracle limited to {MAX_ORACLE_QUBITS} qubits, got {n}"
        )));
    }
    if inputs.len() != n {
        return Err(Error::DimensionMismatch {
            what: "circuit input count",
            expected: n,
            found: inputs.len(),
        });
    }
    Ok(())
}

/// Final amplitudes `U|0…0⟩` from the dense unitary.
pub fn dense_matrix_state(spec: &CircuitSpec, inputs: &[f64]) -> Result<Vec<Complex64>> {
    check_size(spec, inputs)?;
    let dim = 1usize << spec.num_qubits();
    let mut ground = vec![c(0.0, 0.0); dim];
    ground[0] = c(1.0, 0.0);
    Ok(circuit_unitary(spec, inputs).apply(&ground))
}

/// `⟨Z_q⟩` for each qubit, via dense matrices.
pub fn dense_matrix_oracle(spec: &CircuitSpec, inputs: &[f64]) -> Result<Vec<f64>> {
    let n = spec.num_qubits();
    let psi = dense_matrix_state(spec, inputs)?;
    let z = [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(-1.0, 0.0)]];
    Ok((0..n)
        .map(|q| {
            let zpsi = embed_single(n, q, z).apply(&psi);
            psi.iter().zip(&zpsi).map(|(a, b)| (a.conj() * b).re).sum()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ground_state_with_zero_parameters() {
        let spec = CircuitSpec::zeros(2).unwrap();
        assert_eq!(dense_matrix_oracle(&spec, &[0.0, 0.0]).unwrap(), vec![1.0, 1.0]);
    }

    #[test]
    fn cnot_truth_table() {
        // |10⟩ → |11⟩, so both qubits read 1.
        let psi = cnot(2, 0, 1).apply(&[c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        assert_eq!(psi[3], c(1.0, 0.0));
        let zq: Vec<f64> = (0..2)
            .map(|q| {
                let z = [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(-1.0, 0.0)]];
                let zpsi = embed_single(2, q, z).apply(&psi);
                psi.iter().zip(&zpsi).map(|(a, b)| (a.conj() * b).re).sum()
            })
            .collect();
        assert_eq!(zq, vec![-1.0, -1.0]);
    }

    #[test]
    fn rejects_large_registers() {
        let spec = CircuitSpec::zeros(11).unwrap();
        assert!(matches!(
            dense_matrix_oracle(&spec, &[0.0; 11]),
            Err(Error::Resource(_))
        ));
    }
}
