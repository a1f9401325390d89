//! Derivatives of the Pauli-Z expectations.
//!
//! Every parametrised gate is `exp(-iθP/2)` for a Pauli `P`, so the exact
//! derivative of any expectation is
//!
//! ```text
//! ∂f/∂θ = [f(θ + π/2) − f(θ − π/2)] / 2
//! ```
//!
//! [`circuit_jacobian`] applies this shift rule to every weight and every
//! embedding angle. [`adjoint_vjp`] computes the same derivatives contracted
//! with an upstream gradient in a single reverse sweep, which is what the
//! training loop needs.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::circuit::{self, angle, apply_gate, check_inputs, gate_program, simulate, CircuitSpec, Gate, Param, Pauli};
use super::state::StateVector;
use crate::error::Result;
use crate::linalg::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GradientMethod {
    ParameterShift,
    #[default]
    Adjoint,
}

impl std::fmt::Display for GradientMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::ParameterShift => "parameter-shift",
            Self::Adjoint => "adjoint",
        })
    }
}

impl std::str::FromStr for GradientMethod {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "parameter-shift" => Ok(Self::ParameterShift),
            "adjoint" => Ok(Self::Adjoint),
            other => Err(crate::Error::InvalidParameter(format!(
                "unknown gradient method '{other}' (expected parameter-shift or adjoint)"
            ))),
        }
    }
}

/// `∂⟨Z_q⟩/∂·` for every output qubit `q` (rows).
#[derive(Debug, Clone, PartialEq)]
pub struct CircuitJacobian {
    pub expectations: Vec<f64>,
    /// `n × 9n`, columns in [`CircuitSpec::weights_flat`] order.
    pub wrt_weights: Matrix,
    /// `n × n`, column `j` is the embedding angle on qubit `j`.
    pub wrt_inputs: Matrix,
}

pub fn circuit_jacobian(spec: &CircuitSpec, inputs: &[f64]) -> Result<CircuitJacobian> {
    check_inputs(spec, inputs)?;
    let n = spec.num_qubits();
    let gates = gate_program(spec);
    let weights = spec.weights_flat();
    let expectations = simulate(n, &gates, inputs, &weights).expectations_z();

    let eval_at = |param: Param, value: f64| -> Vec<f64> {
        let mut inp = inputs.to_vec();
        let mut w = weights.clone();
        match param {
            Param::Input(i) => inp[i] = value,
            Param::Weight(i) => w[i] = value,
        }
        simulate(n, &gates, &inp, &w).expectations_z()
    };
    let shifted = |param: Param| -> Vec<f64> {
        let base = angle(param, inputs, &weights);
        let plus = eval_at(param, base + FRAC_PI_2);
        let minus = eval_at(param, base - FRAC_PI_2);
        plus.iter().zip(&minus).map(|(p, m)| 0.5 * (p - m)).collect()
    };

    let mut wrt_inputs = Matrix::zeros(n, n);
    for j in 0..n {
        for (q, d) in shifted(Param::Input(j)).into_iter().enumerate() {
            wrt_inputs[(q, j)] = d;
        }
    }
    let mut wrt_weights = Matrix::zeros(n, weights.len());
    for j in 0..weights.len() {
        for (q, d) in shifted(Param::Weight(j)).into_iter().enumerate() {
            wrt_weights[(q, j)] = d;
        }
    }
    Ok(CircuitJacobian {
        expectations,
        wrt_weights,
        wrt_inputs,
    })
}

/// Output of a vector-Jacobian product through the circuit.
#[derive(Debug, Clone, PartialEq)]
pub struct CircuitVjp {
    pub expectations: Vec<f64>,
    pub grad_inputs: Vec<f64>,
    pub grad_weights: Vec<f64>,
}

/// `Im⟨λ|P_q|ψ⟩`.
fn pauli_overlap_imag(lambda: &StateVector, psi: &StateVector, axis: Pauli, q: usize) -> f64 {
    let l = lambda.amplitudes();
    let p = psi.amplitudes();
    let mut acc = Complex64::new(0.0, 0.0);
    match axis {
        Pauli::Z => {
            let stride = psi.stride(q);
            for (i, (a, b)) in l.iter().zip(p).enumerate() {
                let v = a.conj() * b;
                if i & stride == 0 {
                    acc += v;
                } else {
                    acc -= v;
                }
            }
        }
        Pauli::X => psi.for_pairs(q, |i0, i1| {
            acc += l[i0].conj() * p[i1] + l[i1].conj() * p[i0];
        }),
        Pauli::Y => psi.for_pairs(q, |i0, i1| {
            // Y|0⟩ = i|1⟩, Y|1⟩ = −i|0⟩
            let i = Complex64::new(0.0, 1.0);
            acc += l[i0].conj() * (-i * p[i1]) + l[i1].conj() * (i * p[i0]);
        }),
    }
    acc.im
}

/// Gradient of `L = Σ_q upstream[q]·⟨Z_q⟩` with respect to inputs and
/// weights, by reverse-mode state propagation.
pub fn adjoint_vjp(spec: &CircuitSpec, inputs: &[f64], upstream: &[f64]) -> Result<CircuitVjp> {
    check_inputs(spec, inputs)?;
    let n = spec.num_qubits();
    if upstream.len() != n {
        return Err(crate::Error::DimensionMismatch {
            what: "upstream gradient length",
            expected: n,
            found: upstream.len(),
        });
    }
    let gates = gate_program(spec);
    let weights = spec.weights_flat();
    let mut psi = simulate(n, &gates, inputs, &weights);
    let expectations = psi.expectations_z();

    // λ = O ψ with O = Σ_q upstream[q] Z_q, which is diagonal.
    let observable: Vec<f64> = (0..1usize << n)
        .map(|i| {
            upstream
                .iter()
                .enumerate()
                .map(|(q, g)| if i & psi.stride(q) == 0 { *g } else { -*g })
                .sum()
        })
        .collect();
    let mut lambda = StateVector::from_raw(
        n,
        psi.amplitudes().iter().zip(&observable).map(|(a, o)| a * o).collect(),
    );

    let mut grad_inputs = vec![0.0; n];
    let mut grad_weights = vec![0.0; weights.len()];
    for &g in gates.iter().rev() {
        match g {
            Gate::Rotation { axis, qubit, param } => {
                let d = pauli_overlap_imag(&lambda, &psi, axis, qubit);
                match param {
                    Param::Input(i) => grad_inputs[i] += d,
                    Param::Weight(i) => grad_weights[i] += d,
                }
                let theta = angle(param, inputs, &weights);
                apply_gate(&mut psi, g, -theta);
                apply_gate(&mut lambda, g, -theta);
            }
            Gate::Cnot { .. } => {
                apply_gate(&mut psi, g, 0.0);
                apply_gate(&mut lambda, g, 0.0);
            }
        }
    }
    Ok(CircuitVjp {
        expectations,
        grad_inputs,
        grad_weights,
    })
}

/// Full Jacobian assembled from one adjoint sweep per output qubit.
pub fn adjoint_jacobian(spec: &CircuitSpec, inputs: &[f64]) -> Result<CircuitJacobian> {
    let n = spec.num_qubits();
    let mut wrt_inputs = Matrix::zeros(n, n);
    let mut wrt_weights = Matrix::zeros(n, spec.num_weights());
    let mut expectations = Vec::new();
    for q in 0..n {
        let mut e = vec![0.0; n];
        e[q] = 1.0;
        let vjp = adjoint_vjp(spec, inputs, &e)?;
        for (j, v) in vjp.grad_inputs.iter().enumerate() {
            wrt_inputs[(q, j)] = *v;
        }
        for (j, v) in vjp.grad_weights.iter().enumerate() {
            wrt_weights[(q, j)] = *v;
        }
        expectations = vjp.expectations;
    }
    Ok(CircuitJacobian {
        expectations,
        wrt_weights,
        wrt_inputs,
    })
}

/// Jacobian by the requested method.
pub fn jacobian_with(method: GradientMethod, spec: &CircuitSpec, inputs: &[f64]) -> Result<CircuitJacobian> {
    match method {
        GradientMethod::ParameterShift => circuit_jacobian(spec, inputs),
        GradientMethod::Adjoint => adjoint_jacobian(spec, inputs),
    }
}

/// Vector-Jacobian product by the requested method.
pub fn vjp_with(method: GradientMethod, spec: &CircuitSpec, inputs: &[f64], upstream: &[f64]) -> Result<CircuitVjp> {
    match method {
        GradientMethod::Adjoint => adjoint_vjp(spec, inputs, upstream),
        GradientMethod::ParameterShift => {
            let jac = circuit_jacobian(spec, inputs)?;
            let contract = |m: &Matrix| -> Vec<f64> {
                (0..m.cols())
                    .map(|j| (0..m.rows()).map(|q| upstream[q] * m[(q, j)]).sum())
                    .collect()
            };
            Ok(CircuitVjp {
                grad_inputs: contract(&jac.wrt_inputs),
                grad_weights: contract(&jac.wrt_weights),
                expectations: jac.expectations,
            })
        }
    }
}

/// Central finite-difference Jacobian with step `h`, for checking the
/// analytic routes.
pub fn finite_difference_jacobian(spec: &CircuitSpec, inputs: &[f64], h: f64) -> Result<CircuitJacobian> {
    let n = spec.num_qubits();
    let expectations = circuit::run_circuit(spec, inputs)?;
    let mut wrt_inputs = Matrix::zeros(n, n);
    for j in 0..n {
        let mut plus = inputs.to_vec();
        let mut minus = inputs.to_vec();
        plus[j] += h;
        minus[j] -= h;
        let (fp, fm) = (circuit::run_circuit(spec, &plus)?, circuit::run_circuit(spec, &minus)?);
        for q in 0..n {
            wrt_inputs[(q, j)] = (fp[q] - fm[q]) / (2.0 * h);
        }
    }
    let weights = spec.weights_flat();
    let mut wrt_weights = Matrix::zeros(n, weights.len());
    let mut shifted = spec.clone();
    for j in 0..weights.len() {
        let mut w = weights.clone();
        w[j] += h;
        shifted.set_weights_flat(&w)?;
        let fp = circuit::run_circuit(&shifted, inputs)?;
        w[j] -= 2.0 * h;
        shifted.set_weights_flat(&w)?;
        let fm = circuit::run_circuit(&shifted, inputs)?;
        for q in 0..n {
            wrt_weights[(q, j)] = (fp[q] - fm[q]) / (2.0 * h);
        }
    }
    Ok(CircuitJacobian {
        expectations,
        wrt_weights,
        wrt_inputs,
    })
}
