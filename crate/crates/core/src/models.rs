//! Built-in model registry used by the CLI, the studies and the tests.

use crate::error::StudyError;
use crate::markov::{ChainStep, FiniteChainSpec, Mat, StepSeq};

/// A runnable model: either an exact finite chain or a simulation-only
/// dynamical model.
#[derive(Clone, Debug)]
pub enum BuiltinModel {
    Chain(FiniteChainSpec),
    /// Doubling map with the centered observable `cos(2 pi x)`.
    DoublingCos,
    /// Products of two diagonal matrices with distinct dominant entries.
    RandomMatrixDiag,
}

/// Instantiate a built-in model by name.
///
/// * `iid-pm1` — fair `+/-1` steps (lattice; oracle tests).
/// * `iid-3pt-nonlattice` — iid steps with values `{0, 1, sqrt 2}`, centered.
/// * `two-state-markov(q)` — symmetric switch-`q` chain with a
///   non-arithmetic pair observable, centered and stationary.
/// * `inhomogeneous-periodic(q1, q2)` — alternating switch kernels, `+/-1`
///   observable by target state.
/// * `doubling-cos`, `random-matrix-diag` — simulation-only models.
pub fn builtin(name: &str, params: &[f64]) -> Result<BuiltinModel, StudyError> {
    let chain = match name {
        "iid-pm1" => iid_pm1(),
        "iid-3pt-nonlattice" => iid_3pt_nonlattice(),
        "two-state-markov" => {
            let q = params.first().copied().unwrap_or(0.3);
            two_state_markov(q)
        }
        "inhomogeneous-periodic" => {
            let q1 = params.first().copied().unwrap_or(0.2);
            let q2 = params.get(1).copied().unwrap_or(0.45);
            inhomogeneous_periodic(q1, q2)
        }
        "doubling-cos" => return Ok(BuiltinModel::DoublingCos),
        "random-matrix-diag" => return Ok(BuiltinModel::RandomMatrixDiag),
        other => return Err(StudyError::UnknownModel(other.to_string())),
    };
    Ok(BuiltinModel::Chain(chain))
}

/// Names accepted by [`builtin`].
pub const BUILTIN_NAMES: [&str; 6] = [
    "iid-pm1",
    "iid-3pt-nonlattice",
    "two-state-markov",
    "inhomogeneous-periodic",
    "doubling-cos",
    "random-matrix-diag",
];

pub fn iid_pm1() -> FiniteChainSpec {
    let kernel = Mat::from_rows(&[&[0.5, 0.5], &[0.5, 0.5]]);
    let obs = Mat::from_rows(&[&[1.0, -1.0], &[1.0, -1.0]]);
    FiniteChainSpec::homogeneous(vec![0.5, 0.5], kernel, obs, true).expect("valid builtin")
}

pub fn iid_3pt_nonlattice() -> FiniteChainSpec {
    let third = 1.0 / 3.0;
    let kernel = Mat::from_rows(&[&[third; 3], &[third; 3], &[third; 3]]);
    let vals = [0.0, 1.0, std::f64::consts::SQRT_2];
    let mean = vals.iter().sum::<f64>() / 3.0;
    let row: Vec<f64> = vals.iter().map(|v| v - mean).collect();
    let obs = Mat::from_rows(&[&row, &row, &row]);
    FiniteChainSpec::homogeneous(vec![third; 3], kernel, obs, true).expect("valid builtin")
}

pub fn two_state_markov(q: f64) -> FiniteChainSpec {
    let kernel = Mat::from_rows(&[&[1.0 - q, q], &[q, 1.0 - q]]);
    // pairwise values {0, 1, sqrt 2, sqrt 3}: incommensurable differences,
    // asymmetric enough for a nonzero third cumulant
    let obs = Mat::from_rows(&[
        &[0.0, 1.0],
        &[std::f64::consts::SQRT_2, 3.0f64.sqrt()],
    ]);
    FiniteChainSpec::homogeneous(vec![0.5, 0.5], kernel, obs, false)
        .expect("valid builtin")
        .into_centered_stationary()
        .expect("centering of a builtin cannot fail")
}

pub fn inhomogeneous_periodic(q1: f64, q2: f64) -> FiniteChainSpec {
    let k1 = Mat::from_rows(&[&[1.0 - q1, q1], &[q1, 1.0 - q1]]);
    let k2 = Mat::from_rows(&[&[1.0 - q2, q2], &[q2, 1.0 - q2]]);
    let obs = Mat::from_rows(&[&[1.0, -1.0], &[1.0, -1.0]]);
    let steps = vec![
        ChainStep { kernel: k1, observable: obs.clone() },
        ChainStep { kernel: k2, observable: obs },
    ];
    FiniteChainSpec::new(vec![0.5, 0.5], StepSeq::Periodic(steps), true).expect("valid builtin")
}
