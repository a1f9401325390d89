use std::f64::consts::{PI, TAU};

use clap::Args;
use qmlp_core::qsim::{circuit_jacobian, dense_matrix_oracle, run_circuit, CircuitSpec, EntanglingBlockWeights};
use qmlp_core::rng::{self, Stream};
use rand::Rng;

use crate::{fail, Failure};

const FD_STEP: f64 = 1e-5;
const GRAD_REL_TOL: f64 = 1e-6;
/// Below this magnitude gradients are compared absolutely.
const GRAD_SMALL: f64 = 1e-6;
const GRAD_ABS_TOL: f64 = 1e-8;
const ORACLE_TOL: f64 = 1e-12;

#[derive(Args)]
pub struct GradcheckArgs {
    /// Circuit width, at most 4.
    #[arg(long, default_value_t = 4)]
    qubits: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of random circuits.
    #[arg(long, default_value_t = 20)]
    trials: usize,
    /// Test hook: negate the parameter-shift gradient of this weight index.
    #[arg(long, hide = true)]
    inject_sign_flip: Option<usize>,
}

fn central_difference(spec: &CircuitSpec, x: &[f64], p: usize) -> Vec<f64> {
    let w0 = spec.weights_flat();
    let mut s = spec.clone();
    let mut eval = |delta: f64| {
        let mut w = w0.clone();
        w[p] += delta;
        s.set_weights_flat(&w).expect("same length");
        run_circuit(&s, x).expect("valid circuit")
    };
    let plus = eval(FD_STEP);
    let minus = eval(-FD_STEP);
    plus.iter()
        .zip(&minus)
        .map(|(a, b)| (a - b) / (2.0 * FD_STEP))
        .collect()
}

fn input_difference(spec: &CircuitSpec, x: &[f64], j: usize) -> Vec<f64> {
    let mut xp = x.to_vec();
    xp[j] = x[j] + FD_STEP;
    let plus = run_circuit(spec, &xp).expect("valid circuit");
    xp[j] = x[j] - FD_STEP;
    let minus = run_circuit(spec, &xp).expect("valid circuit");
    plus.iter()
        .zip(&minus)
        .map(|(a, b)| (a - b) / (2.0 * FD_STEP))
        .collect()
}

/// Whether `analytic` agrees with `numeric`, plus the error measure used.
fn within(analytic: f64, numeric: f64) -> (bool, f64) {
    let err = (analytic - numeric).abs();
    let mag = analytic.abs().max(numeric.abs());
    if mag < GRAD_SMALL {
        (err <= GRAD_ABS_TOL, err)
    } else {
        (err <= GRAD_REL_TOL * mag, err / mag)
    }
}

pub fn run(args: GradcheckArgs) -> Result<(), Failure> {
    let n = args.qubits;
    if n == 0 || n > 4 {
        return Err(fail(2, anyhow::anyhow!("--qubits must be between 1 and 4, got {n}")));
    }
    if args.trials == 0 {
        return Err(fail(2, anyhow::anyhow!("--trials must be at least 1")));
    }
    let num_weights = 9 * n;
    if let Some(p) = args.inject_sign_flip {
        if p >= num_weights {
            return Err(fail(
                2,
                anyhow::anyhow!("--inject-sign-flip index {p} out of range 0..{num_weights}"),
            ));
        }
    }

    let mut rng = rng::stream(args.seed, Stream::Gradcheck);
    let mut max_rel = 0.0f64;
    let mut max_abs = 0.0f64;
    let mut max_oracle = 0.0f64;
    let mut breach: Option<String> = None;

    for trial in 0..args.trials {
        let blocks = (0..3)
            .map(|_| {
                EntanglingBlockWeights::new(
                    (0..n)
                        .map(|_| {
                            [
                                rng.random_range(0.0..TAU),
                                rng.random_range(0.0..TAU),
                                rng.random_range(0.0..TAU),
                            ]
                        })
                        .collect(),
                )
            })
            .collect::<qmlp_core::Result<Vec<_>>>()?;
        let spec = CircuitSpec::new(n, blocks)?;
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-PI..PI)).collect();

        let fast = run_circuit(&spec, &x)?;
        let dense = dense_matrix_oracle(&spec, &x)?;
        for (q, (a, b)) in fast.iter().zip(&dense).enumerate() {
            let err = (a - b).abs();
            max_oracle = max_oracle.max(err);
            if err > ORACLE_TOL && breach.is_none() {
                breach = Some(format!(
                    "trial {trial}: simulator and dense oracle differ by {err:e} on qubit {q}"
                ));
            }
        }

        let jac = circuit_jacobian(&spec, &x)?;
        let mut record = |analytic: f64, numeric: f64, what: String| {
            let (ok, err) = within(analytic, numeric);
            if analytic.abs().max(numeric.abs()) < GRAD_SMALL {
                max_abs = max_abs.max(err);
            } else {
                max_rel = max_rel.max(err);
            }
            if !ok && breach.is_none() {
                breach = Some(format!(
                    "trial {trial}: {what}: parameter-shift {analytic:e}, finite difference {numeric:e}"
                ));
            }
        };
        for p in 0..num_weights {
            let fd = central_difference(&spec, &x, p);
            for (q, &numeric) in fd.iter().enumerate() {
                let mut analytic = jac.wrt_weights[(q, p)];
                if args.inject_sign_flip == Some(p) {
                    analytic = -analytic;
                }
                record(analytic, numeric, format!("weight parameter {p} (qubit output {q})"));
            }
        }
        for j in 0..n {
            let fd = input_difference(&spec, &x, j);
            for (q, &numeric) in fd.iter().enumerate() {
                record(
                    jac.wrt_inputs[(q, j)],
                    numeric,
                    format!("input angle {j} (qubit output {q})"),
                );
            }
        }
    }

    println!("gradcheck: {} circuits, {n} qubits, seed {}", args.trials, args.seed);
    println!("  parameter shift vs finite difference (h = {FD_STEP:e}):");
    println!("    max relative error  {max_rel:.3e}  (tolerance {GRAD_REL_TOL:e})");
    println!("    max absolute error  {max_abs:.3e}  (tolerance {GRAD_ABS_TOL:e}, gradients below {GRAD_SMALL:e})");
    println!("  simulator vs dense oracle:");
    println!("    max absolute error  {max_oracle:.3e}  (tolerance {ORACLE_TOL:e})");
    match breach {
        None => {
            println!("PASS");
            Ok(())
        }
        Some(msg) => {
            println!("FAIL: {msg}");
            Err(fail(1, anyhow::anyhow!("tolerance breach: {msg}")))
        }
    }
}
