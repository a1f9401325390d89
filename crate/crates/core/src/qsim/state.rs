use num_complex::Complex64;

use crate::error::{Error, Result};

/// Tolerance on `Σ|a|² = 1` accepted when constructing a state from raw
/// amplitudes.
pub const NORM_TOLERANCE: f64 = 1e-12;

/// Pure state of an `n`-qubit register.
///
/// Qubit 0 is the most significant bit of the basis-state index, so basis
/// state `|b₀ b₁ … b_{n-1}⟩` lives at index `Σ b_q 2^{n-1-q}`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// Largest supported register.
    pub const MAX_QUBITS: usize = 24;

    /// `|0…0⟩`.
    pub fn zero(n: usize) -> Result<Self> {
        Self::basis(n, 0)
    }

    pub fn basis(n: usize, index: usize) -> Result<Self> {
        if n == 0 || n > Self::MAX_QUBITS {
            return Err(Error::InvalidParameter(format!(
                "qubit count {n} outside 1..={}",
                Self::MAX_QUBITS
            )));
        }
        let dim = 1usize << n;
        if index >= dim {
            return Err(Error::InvalidParameter(format!(
                "basis index {index} out of range for {n} qubits"
            )));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(Self { n, amplitudes })
    }

    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let dim = amplitudes.len();
        if dim < 2 || !dim.is_power_of_two() {
            return Err(Error::InvalidInput(format!(
                "amplitude vector length {dim} is not a power of two ≥ 2"
            )));
        }
        let state = Self {
            n: dim.trailing_zeros() as usize,
            amplitudes,
        };
        let norm = state.norm_sqr();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::InvalidInput(format!("state is not normalised: Σ|a|² = {norm}")));
        }
        Ok(state)
    }

    /// Wraps amplitudes without checking the norm; used for adjoint
    /// vectors, which are not states.
    pub(crate) fn from_raw(n: usize, amplitudes: Vec<Complex64>) -> Self {
        debug_assert_eq!(amplitudes.len(), 1 << n);
        Self { n, amplitudes }
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(Complex64::norm_sqr).sum()
    }

    /// Multiplies every amplitude by `e^{iα}`.
    pub fn with_global_phase(mut self, alpha: f64) -> Self {
        let phase = Complex64::from_polar(1.0, alpha);
        self.amplitudes.iter_mut().for_each(|a| *a *= phase);
        self
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.n {
            return Err(Error::QubitIndex { index: q, n: self.n });
        }
        Ok(())
    }

    #[inline]
    pub(crate) fn stride(&self, q: usize) -> usize {
        1 << (self.n - 1 - q)
    }

    /// Calls `f(i0, i1)` for every amplitude pair that differs only in
    /// qubit `q` (bit clear at `i0`).
    #[inline]
    pub(crate) fn for_pairs(&self, q: usize, mut f: impl FnMut(usize, usize)) {
        let stride = self.stride(q);
        let len = self.amplitudes.len();
        let mut base = 0;
        while base < len {
            for i0 in base..base + stride {
                f(i0, i0 + stride);
            }
            base += 2 * stride;
        }
    }

    /// Applies the 2×2 unitary `[[a, b], [c, d]]` to qubit `q`.
    pub(crate) fn apply_single_unchecked(&mut self, q: usize, u: [[Complex64; 2]; 2]) {
        let stride = self.stride(q);
        let len = self.amplitudes.len();
        let amps = &mut self.amplitudes;
        let mut base = 0;
        while base < len {
            for i0 in base..base + stride {
                let i1 = i0 + stride;
                let (x0, x1) = (amps[i0], amps[i1]);
                amps[i0] = u[0][0] * x0 + u[0][1] * x1;
                amps[i1] = u[1][0] * x0 + u[1][1] * x1;
            }
            base += 2 * stride;
        }
    }

    pub(crate) fn rx_unchecked(&mut self, q: usize, theta: f64) {
        let (s, c) = (theta / 2.0).sin_cos();
        let mis = Complex64::new(0.0, -s);
        let c = Complex64::new(c, 0.0);
        self.apply_single_unchecked(q, [[c, mis], [mis, c]]);
    }

    pub(crate) fn ry_unchecked(&mut self, q: usize, theta: f64) {
        let (s, c) = (theta / 2.0).sin_cos();
        let (s, c) = (Complex64::new(s, 0.0), Complex64::new(c, 0.0));
        self.apply_single_unchecked(q, [[c, -s], [s, c]]);
    }

    pub(crate) fn rz_unchecked(&mut self, q: usize, theta: f64) {
        let e0 = Complex64::from_polar(1.0, -theta / 2.0);
        let e1 = Complex64::from_polar(1.0, theta / 2.0);
        let stride = self.stride(q);
        for (i, a) in self.amplitudes.iter_mut().enumerate() {
            *a *= if i & stride == 0 { e0 } else { e1 };
        }
    }

    pub(crate) fn cnot_unchecked(&mut self, control: usize, target: usize) {
        let cs = self.stride(control);
        let ts = self.stride(target);
        for i in 0..self.amplitudes.len() {
            if i & cs != 0 && i & ts == 0 {
                self.amplitudes.swap(i, i | ts);
            }
        }
    }

    pub fn apply_rx(&mut self, q: usize, theta: f64) -> Result<()> {
        self.check_qubit(q)?;
        self.rx_unchecked(q, theta);
        Ok(())
    }

    pub fn apply_ry(&mut self, q: usize, theta: f64) -> Result<()> {
        self.check_qubit(q)?;
        self.ry_unchecked(q, theta);
        Ok(())
    }

    pub fn apply_rz(&mut self, q: usize, theta: f64) -> Result<()> {
        self.check_qubit(q)?;
        self.rz_unchecked(q, theta);
        Ok(())
    }

    /// `Rot(φ, θ, ω) = Rz(ω) · Ry(θ) · Rz(φ)`.
    pub fn apply_rot(&mut self, q: usize, phi: f64, theta: f64, omega: f64) -> Result<()> {
        self.check_qubit(q)?;
        self.rz_unchecked(q, phi);
        self.ry_unchecked(q, theta);
        self.rz_unchecked(q, omega);
        Ok(())
    }

    pub fn apply_cnot(&mut self, control: usize, target: usize) -> Result<()> {
        self.check_qubit(control)?;
        self.check_qubit(target)?;
        if control == target {
            return Err(Error::InvalidParameter(format!(
                "CNOT control and target are both qubit {control}"
            )));
        }
        self.cnot_unchecked(control, target);
        Ok(())
    }

    /// `⟨Z_q⟩ = P(q reads 0) − P(q reads 1)`.
    pub fn expectation_z(&self, q: usize) -> Result<f64> {
        self.check_qubit(q)?;
        let stride = self.stride(q);
        Ok(self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(i, a)| if i & stride == 0 { a.norm_sqr() } else { -a.norm_sqr() })
            .sum())
    }

    /// `⟨Z_q⟩` for every qubit.
    pub fn expectations_z(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (i, a) in self.amplitudes.iter().enumerate() {
            let p = a.norm_sqr();
            for (q, o) in out.iter_mut().enumerate() {
                if i & self.stride(q) == 0 {
                    *o += p;
                } else {
                    *o -= p;
                }
            }
        }
        out
    }
}

/// Value-semantics wrapper around [`StateVector::apply_rx`].
pub fn apply_rx(mut state: StateVector, q: usize, theta: f64) -> Result<StateVector> {
    state.apply_rx(q, theta)?;
    Ok(state)
}

pub fn apply_ry(mut state: StateVector, q: usize, theta: f64) -> Result<StateVector> {
    state.apply_ry(q, theta)?;
    Ok(state)
}

pub fn apply_rz(mut state: StateVector, q: usize, theta: f64) -> Result<StateVector> {
    state.apply_rz(q, theta)?;
    Ok(state)
}

pub fn apply_cnot(mut state: StateVector, control: usize, target: usize) -> Result<StateVector> {
    state.apply_cnot(control, target)?;
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn assert_amps(state: &StateVector, expected: &[Complex64], tol: f64) {
        for (a, b) in state.amplitudes().iter().zip(expected) {
            assert!((a - b).norm() <= tol, "{a} != {b}");
        }
    }

    #[test]
    fn rx_pi_flips_with_phase() {
        let s = apply_rx(StateVector::zero(1).unwrap(), 0, PI).unwrap();
        assert_amps(&s, &[c(0.0, 0.0), c(0.0, -1.0)], 1e-15);
        assert!((s.expectation_z(0).unwrap() + 1.0).abs() < 1e-15);
    }

    #[test]
    fn rx_half_pi() {
        let s = apply_rx(StateVector::zero(1).unwrap(), 0, FRAC_PI_2).unwrap();
        assert_amps(&s, &[c(FRAC_1_SQRT_2, 0.0), c(0.0, -FRAC_1_SQRT_2)], 1e-15);
    }

    #[test]
    fn ry_half_pi() {
        let s = apply_ry(StateVector::zero(1).unwrap(), 0, FRAC_PI_2).unwrap();
        assert_amps(&s, &[c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0)], 1e-15);
    }

    #[test]
    fn zero_angle_rotations_are_identity() {
        let start = apply_ry(StateVector::zero(2).unwrap(), 1, 0.7).unwrap();
        let s = apply_rx(start.clone(), 0, 0.0).unwrap();
        let s = apply_ry(s, 1, 0.0).unwrap();
        let s = apply_rz(s, 0, 0.0).unwrap();
        assert_eq!(s, start);
    }

    #[test]
    fn rz_on_zero_is_phase_only() {
        let s = apply_rz(StateVector::zero(3).unwrap(), 1, 1.234).unwrap();
        assert_eq!(s.expectations_z(), vec![1.0, 1.0, 1.0]);
        assert!((s.amplitudes()[0].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn cnot_truth_table() {
        // |10⟩ is index 2 with qubit 0 as MSB.
        let s = apply_cnot(StateVector::basis(2, 2).unwrap(), 0, 1).unwrap();
        assert_eq!(s, StateVector::basis(2, 3).unwrap());
        let s = apply_cnot(StateVector::zero(2).unwrap(), 0, 1).unwrap();
        assert_eq!(s, StateVector::zero(2).unwrap());
        let s = apply_cnot(StateVector::basis(2, 1).unwrap(), 0, 1).unwrap();
        assert_eq!(s, StateVector::basis(2, 1).unwrap());
    }

    #[test]
    fn cnot_is_an_involution() {
        let mut s = StateVector::zero(3).unwrap();
        s.apply_ry(0, 0.3).unwrap();
        s.apply_rx(1, 1.1).unwrap();
        s.apply_ry(2, -0.4).unwrap();
        let start = s.clone();
        s.apply_cnot(2, 0).unwrap();
        s.apply_cnot(2, 0).unwrap();
        assert_amps(&s, start.amplitudes(), 1e-15);
    }

    #[test]
    fn index_errors() {
        let mut s = StateVector::zero(2).unwrap();
        assert!(matches!(s.apply_rx(2, 0.1), Err(Error::QubitIndex { index: 2, n: 2 })));
        assert!(matches!(s.apply_cnot(1, 1), Err(Error::InvalidParameter(_))));
        assert!(matches!(s.apply_cnot(0, 5), Err(Error::QubitIndex { .. })));
        assert!(StateVector::zero(0).is_err());
    }

    #[test]
    fn from_amplitudes_validates() {
        assert!(StateVector::from_amplitudes(vec![c(1.0, 0.0); 3]).is_err());
        assert!(StateVector::from_amplitudes(vec![c(1.0, 0.0), c(1.0, 0.0)]).is_err());
        let s = StateVector::from_amplitudes(vec![c(0.6, 0.0), c(0.0, 0.8)]).unwrap();
        assert_eq!(s.num_qubits(), 1);
    }

    #[test]
    fn global_phase_leaves_expectations() {
        let mut s = StateVector::zero(3).unwrap();
        s.apply_rx(0, 0.9).unwrap();
        s.apply_cnot(0, 2).unwrap();
        s.apply_ry(1, 2.1).unwrap();
        let before = s.expectations_z();
        let after = s.with_global_phase(0.77).expectations_z();
        for (a, b) in before.iter().zip(&after) {
            assert!((a - b).abs() < 1e-15);
        }
    }
}
