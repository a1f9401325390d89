use std::f64::consts::TAU;

use num_complex::Complex64;
use proptest::prelude::*;
use qmlp_core::features::{build_spd, eigendecompose, expand, expanded_dim, normalize_state};
use qmlp_core::linalg::Matrix;
use qmlp_core::qsim::{run_circuit, CircuitSpec, EntanglingBlockWeights, StateVector};

fn spec_strategy(n: usize) -> impl Strategy<Value = CircuitSpec> {
    prop::collection::vec(prop::array::uniform3(0.0..TAU), 3 * n).prop_map(move |rows| {
        let blocks = rows
            .chunks(n)
            .map(|c| EntanglingBlockWeights::new(c.to_vec()).unwrap())
            .collect();
        CircuitSpec::new(n, blocks).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn expansion_matches_brute_force(x in prop::collection::vec(-10.0f64..10.0, 1..10)) {
        let d = x.len();
        let z = expand(&x).unwrap();
        prop_assert_eq!(z.len(), expanded_dim(d));
        prop_assert_eq!(z.len(), 2 * d + d * (d - 1) / 2);
        let mut k = 2 * d;
        for i in 0..d {
            prop_assert_eq!(z.as_slice()[i], x[i]);
            prop_assert_eq!(z.as_slice()[d + i], x[i] * x[i]);
            for j in i + 1..d {
                prop_assert_eq!(z.as_slice()[k], x[i] * x[j]);
                k += 1;
            }
        }
    }

    #[test]
    fn spd_eigenvalues_bounded_below(x in prop::collection::vec(-2.0f64..2.0, 1..8), eps in 1e-8f64..1e-2) {
        let z = expand(&x).unwrap();
        let basis = eigendecompose(build_spd(&z, eps).unwrap().matrix()).unwrap();
        for &l in &basis.eigenvalues {
            prop_assert!(l >= eps - 1e-12, "eigenvalue {} below ε = {}", l, eps);
        }
        for w in basis.eigenvalues.windows(2) {
            prop_assert!(w[0] >= w[1]);
        }
    }

    #[test]
    fn eigendecomposition_reconstructs_random_symmetric(
        m in 1usize..=64,
        seed in any::<u64>(),
    ) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut a = Matrix::zeros(m, m);
        for i in 0..m {
            for j in i..m {
                let v: f64 = rng.random_range(-1.0..1.0);
                a[(i, j)] = v;
                a[(j, i)] = v;
            }
        }
        let basis = eigendecompose(&a).unwrap();
        let err = basis.reconstruct().sub(&a).as_slice().iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        prop_assert!(err < 1e-10 * m as f64, "reconstruction error {}", err);
        let v = &basis.eigenvectors;
        for j in 0..m {
            let col = v.column(j);
            let (idx, _) = col.iter().enumerate().fold((0, 0.0f64), |best, (i, x)| {
                if x.abs() > best.1 + 1e-14 { (i, x.abs()) } else { best }
            });
            prop_assert!(col[idx] >= 0.0);
        }
    }

    #[test]
    fn normalization_is_scale_invariant(
        x in prop::collection::vec(-5.0f64..5.0, 1..12),
        c in 1e-3f64..1e3,
    ) {
        prop_assume!(x.iter().map(|v| v * v).sum::<f64>().sqrt() > 1e-6);
        let a = normalize_state(&x).unwrap();
        let scaled: Vec<f64> = x.iter().map(|v| v * c).collect();
        let b = normalize_state(&scaled).unwrap();
        for (p, q) in a.iter().zip(&b) {
            prop_assert!((p - q).abs() < 1e-12);
        }
        let norm = a.iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assert!((norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gates_preserve_norm(
        n in 1usize..=5,
        ops in prop::collection::vec((0u8..4, 0usize..5, 0usize..5, -10.0f64..10.0), 1..40),
    ) {
        let mut s = StateVector::zero(n).unwrap();
        for (kind, a, b, theta) in ops {
            let (a, b) = (a % n, b % n);
            match kind {
                0 => s.apply_rx(a, theta).unwrap(),
                1 => s.apply_ry(a, theta).unwrap(),
                2 => s.apply_rz(a, theta).unwrap(),
                _ if a != b => s.apply_cnot(a, b).unwrap(),
                _ => {}
            }
        }
        prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn global_phase_does_not_change_expectations(
        spec in spec_strategy(3),
        phase in 0.0f64..TAU,
        angles in prop::array::uniform3(-3.0f64..3.0),
    ) {
        let s = qmlp_core::qsim::circuit_state(&spec, &angles).unwrap();
        let rotated = s.clone().with_global_phase(phase);
        let a = s.expectations_z();
        let b = rotated.expectations_z();
        for (p, q) in a.iter().zip(&b) {
            prop_assert!((p - q).abs() < 1e-12);
        }
        prop_assert!((rotated.amplitudes()[0] - s.amplitudes()[0] * Complex64::from_polar(1.0, phase)).norm() < 1e-12);
    }

    #[test]
    fn expectations_are_bounded(spec in spec_strategy(4), angles in prop::array::uniform4(-10.0f64..10.0)) {
        for e in run_circuit(&spec, &angles).unwrap() {
            prop_assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&e));
        }
    }
}
