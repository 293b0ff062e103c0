//! Plain-text serialization of chain specs.
//!
//! Line-oriented key-value format:
//!
//! ```text
//! states 2
//! rule periodic 2
//! centered true
//! initial 0.5 0.5
//! kernel 0 0.8 0.2 0.2 0.8
//! observable 0 1 -1 1 -1
//! kernel 1 0.55 0.45 0.45 0.55
//! observable 1 1 -1 1 -1
//! ```
//!
//! `rule` is `homogeneous`, `periodic <p>` or `explicit <k>`; matrices are
//! row-major. Floats print in the shortest round-trip form, so
//! `parse(serialize(spec))` reproduces every value bit-exactly and
//! `serialize(parse(text))` reproduces canonical files byte-for-byte.

use crate::error::ChainError;
use crate::markov::{ChainStep, FiniteChainSpec, Mat, StepSeq};

pub fn to_text(spec: &FiniteChainSpec) -> String {
    let mut out = String::new();
    let states = spec.initial().len();
    out.push_str(&format!("states {}\n", states));
    let (rule, count) = if spec.is_periodic() {
        if spec.is_homogeneous() {
            ("homogeneous".to_string(), 1)
        } else {
            (format!("periodic {}", spec.period().unwrap()), spec.period().unwrap())
        }
    } else {
        (format!("explicit {}", spec.distinct_steps()), spec.distinct_steps())
    };
    out.push_str(&format!("rule {}\n", rule));
    out.push_str(&format!("centered {}\n", spec.is_centered()));
    out.push_str("initial");
    for v in spec.initial() {
        out.push_str(&format!(" {}", v));
    }
    out.push('\n');
    for idx in 0..count {
        let step = spec.step(idx + 1);
        out.push_str(&format!("kernel {}", idx));
        for i in 0..step.kernel.rows() {
            for j in 0..step.kernel.cols() {
                out.push_str(&format!(" {}", step.kernel.get(i, j)));
            }
        }
        out.push('\n');
        out.push_str(&format!("observable {}", idx));
        for i in 0..step.observable.rows() {
            for j in 0..step.observable.cols() {
                out.push_str(&format!(" {}", step.observable.get(i, j)));
            }
        }
        out.push('\n');
    }
    out
}

pub fn from_text(text: &str) -> Result<FiniteChainSpec, ChainError> {
    let mut states = 0usize;
    let mut periodic = true;
    let mut step_count = 1usize;
    let mut centered = false;
    let mut initial: Vec<f64> = Vec::new();
    let mut kernels: Vec<Option<Mat>> = Vec::new();
    let mut observables: Vec<Option<Mat>> = Vec::new();
    let err = |line: usize, message: &str| ChainError::ParseError { line, message: message.into() };

    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let key = parts.next().unwrap();
        match key {
            "states" => {
                states = parts
                    .next()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| err(lineno + 1, "states expects a count"))?;
            }
            "rule" => match parts.next() {
                Some("homogeneous") => {
                    periodic = true;
                    step_count = 1;
                }
                Some("periodic") => {
                    periodic = true;
                    step_count = parts
                        .next()
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| err(lineno + 1, "periodic expects a period"))?;
                }
                Some("explicit") => {
                    periodic = false;
                    step_count = parts
                        .next()
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| err(lineno + 1, "explicit expects a count"))?;
                }
                _ => return Err(err(lineno + 1, "unknown rule")),
            },
            "centered" => centered = parts.next() == Some("true"),
            "initial" => {
                initial = parts
                    .map(|s| s.parse().map_err(|_| err(lineno + 1, "bad number in initial")))
                    .collect::<Result<_, _>>()?;
            }
            "kernel" | "observable" => {
                let idx: usize = parts
                    .next()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| err(lineno + 1, "matrix line expects an index"))?;
                let vals: Vec<f64> = parts
                    .map(|s| s.parse().map_err(|_| err(lineno + 1, "bad number in matrix")))
                    .collect::<Result<_, _>>()?;
                if states == 0 || vals.len() != states * states {
                    return Err(err(lineno + 1, "matrix size does not match states"));
                }
                let mat = Mat::new(states, states, vals);
                let store = if key == "kernel" { &mut kernels } else { &mut observables };
                if store.len() <= idx {
                    store.resize(idx + 1, None);
                }
                store[idx] = Some(mat);
            }
            _ => return Err(err(lineno + 1, "unknown key")),
        }
    }
    if kernels.len() != step_count || observables.len() != step_count {
        return Err(err(0, "kernel/observable blocks do not match the rule"));
    }
    let mut steps = Vec::with_capacity(step_count);
    for (i, (k, o)) in kernels.into_iter().zip(observables).enumerate() {
        match (k, o) {
            (Some(kernel), Some(observable)) => steps.push(ChainStep { kernel, observable }),
            _ => return Err(err(0, &format!("missing kernel or observable {i}"))),
        }
    }
    let seq = if periodic { StepSeq::Periodic(steps) } else { StepSeq::Explicit(steps) };
    FiniteChainSpec::new(initial, seq, centered)
}
