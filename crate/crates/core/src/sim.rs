//! Monte Carlo generators: chain trajectories, doubling-map sums, log-norms
//! of random matrix products, and the compact-spectrum smoothing noise.
//!
//! Reproducibility: every batch draws from ChaCha8 streams split by
//! `(seed, trajectory index)` — the generator is seeded with the batch seed
//! and trajectory `i` uses stream `i`, so identical `(model, n, seed, count)`
//! calls produce bitwise identical values and trajectories can be generated
//! independently in any order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dist::CdfCurve;
use crate::error::SimError;
use crate::markov::FiniteChainSpec;
use crate::quad::integrate_gl;

/// A batch of independent `S_n` realizations.
#[derive(Clone, Debug)]
pub struct SampleBatch {
    pub values: Vec<f64>,
    pub n: usize,
    pub seed: u64,
    pub model: String,
}

impl SampleBatch {
    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (self.values.len() - 1) as f64
    }

    /// One value per line.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.values.len() * 20);
        for v in &self.values {
            out.push_str(&format!("{}\n", v));
        }
        out
    }
}

fn stream(seed: u64, trajectory: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trajectory);
    rng
}

fn sample_index(rng: &mut ChaCha8Rng, weights: &[f64]) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, &w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return i;
        }
    }
    weights.len() - 1
}

/// Simulate `count` independent trajectories of the chain's additive
/// functional.
pub fn sample_chain(spec: &FiniteChainSpec, n: usize, count: usize, seed: u64) -> SampleBatch {
    let mut values = Vec::with_capacity(count);
    let mu1 = spec.initial().to_vec();
    for traj in 0..count {
        let mut rng = stream(seed, traj as u64);
        let mut state = sample_index(&mut rng, &mu1);
        let mut sum = 0.0;
        for j in 1..=n {
            let step = spec.step(j);
            let row: Vec<f64> = (0..step.kernel.cols()).map(|y| step.kernel.get(state, y)).collect();
            let next = sample_index(&mut rng, &row);
            sum += step.observable.get(state, next);
            state = next;
        }
        values.push(sum);
    }
    SampleBatch { values, n, seed, model: "chain".into() }
}

/// Horizon cap for the doubling-map generator.
pub const DOUBLING_CAPACITY: usize = 10_000_000;

/// Partial sums `S_n = sum_{j<n} g(T^j x0)` for the doubling map
/// `T x = 2x mod 1` with Lebesgue-distributed `x0`.
///
/// Short horizons run forward in 128-bit fixed point. Longer ones use the
/// backward inverse-branch construction: draw the endpoint uniformly and
/// prepend random branch bits, which reproduces the forward law exactly for
/// the stationary (Lebesgue) initial distribution while spending one fresh
/// bit per step.
pub fn doubling_map_sum(
    observable: impl Fn(f64) -> f64,
    n: usize,
    count: usize,
    seed: u64,
) -> Result<SampleBatch, SimError> {
    if n > DOUBLING_CAPACITY {
        return Err(SimError::Capacity(n, DOUBLING_CAPACITY));
    }
    let mut values = Vec::with_capacity(count);
    for traj in 0..count {
        let mut rng = stream(seed, traj as u64);
        let mut sum = 0.0;
        if n <= 50 {
            let mut x: u128 = ((rng.random::<u64>() as u128) << 64) | rng.random::<u64>() as u128;
            for _ in 0..n {
                sum += observable((x >> 75) as f64 / (1u64 << 53) as f64);
                x <<= 1;
            }
        } else {
            // z_j = (z_{j+1} + b_{j+1}) / 2 walking backwards from z_n
            let mut z: f64 = rng.random();
            let mut orbit = Vec::with_capacity(n);
            for _ in 0..n {
                let bit = if rng.random::<bool>() { 1.0 } else { 0.0 };
                z = 0.5 * (z + bit);
                orbit.push(z);
            }
            // orbit was built from index n-1 down to 0
            for &point in orbit.iter().rev() {
                sum += observable(point);
            }
        }
        values.push(sum);
    }
    Ok(SampleBatch { values, n, seed, model: "doubling".into() })
}

/// 2x2 real matrix in row-major order.
pub type Mat2 = [f64; 4];

/// Log-norm of random matrix products: `S_n = log ||g_n ... g_1 x||` for a
/// unit vector `x` and iid draws from `matrices` with mixing `probs`.
/// The vector is renormalized every step so no horizon overflows.
pub fn random_matrix_lognorm(
    matrices: &[Mat2],
    probs: &[f64],
    x: [f64; 2],
    n: usize,
    count: usize,
    seed: u64,
) -> Result<SampleBatch, SimError> {
    let psum: f64 = probs.iter().sum();
    if (psum - 1.0).abs() > 1e-12 || probs.len() != matrices.len() {
        return Err(SimError::BadProbabilities(psum));
    }
    for (i, m) in matrices.iter().enumerate() {
        let det = m[0] * m[3] - m[1] * m[2];
        if det.abs() < 1e-12 {
            return Err(SimError::SingularMatrix(i));
        }
    }
    let norm0 = (x[0] * x[0] + x[1] * x[1]).sqrt();
    let mut values = Vec::with_capacity(count);
    for traj in 0..count {
        let mut rng = stream(seed, traj as u64);
        let mut v = [x[0] / norm0, x[1] / norm0];
        let mut sum = 0.0;
        for _ in 0..n {
            let m = &matrices[sample_index(&mut rng, probs)];
            let w = [m[0] * v[0] + m[1] * v[1], m[2] * v[0] + m[3] * v[1]];
            let r = (w[0] * w[0] + w[1] * w[1]).sqrt();
            sum += r.ln();
            v = [w[0] / r, w[1] / r];
        }
        values.push(sum);
    }
    Ok(SampleBatch { values, n, seed, model: "matrix-product".into() })
}

/// Smoothing noise with density proportional to `(sin x / x)^{2m}`,
/// rescaled to unit variance. Its characteristic function vanishes outside
/// `[-bound, bound]` with `bound = 2m * sd_raw`.
#[derive(Clone, Debug)]
pub struct SmoothingNoise {
    pub m: usize,
    /// Normalizing constant of the raw density.
    pub lambda: f64,
    /// Raw second moment (the squared rescale factor).
    pub raw_variance: f64,
    /// Support bound of the characteristic function after rescaling.
    pub cf_support_bound: f64,
    /// Rejection bound `sup w / envelope`.
    envelope_ratio: f64,
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

impl SmoothingNoise {
    pub fn new(m: usize) -> Result<Self, SimError> {
        if m < 2 {
            return Err(SimError::SmoothingOrderTooSmall(m));
        }
        let mf = m as f64;
        let pow = 2 * m as i32;
        let w_raw = move |x: f64| sinc(x).powi(pow);
        // adaptive-by-construction: oscillation period pi, panels of ~1/4 period
        let cut = 2000.0f64;
        let panels = (cut / 0.7).ceil() as usize;
        let lambda_main = 2.0 * integrate_gl(w_raw, 0.0, cut, panels, 6);
        let second_main = 2.0 * integrate_gl(|x| x * x * w_raw(x), 0.0, cut, panels, 6);
        // tail: sin^{2m} averages to binom(2m, m)/4^m over a period
        let avg = {
            let mut b = 1.0f64;
            for i in 0..m {
                b = b * (2 * m - i) as f64 / (i + 1) as f64;
            }
            b / 4f64.powi(m as i32)
        };
        let lambda = lambda_main + 2.0 * avg * cut.powi(1 - pow) / (pow as f64 - 1.0);
        let second = second_main + 2.0 * avg * cut.powi(3 - pow) / (pow as f64 - 3.0);
        let raw_variance = second / lambda;
        // envelope: scaled Student t with nu = 2m-1, matching (1+x^2/2m)^{-m}
        let envelope = move |x: f64| (1.0 + x * x / (2.0 * mf)).powi(-(m as i32));
        let mut ratio: f64 = 0.0;
        let mut x = 0.0;
        while x <= 60.0 {
            ratio = ratio.max(w_raw(x) / envelope(x));
            x += 0.01;
        }
        let envelope_ratio = ratio * 1.05;
        Ok(SmoothingNoise {
            m,
            lambda,
            raw_variance,
            cf_support_bound: 2.0 * mf * raw_variance.sqrt(),
            envelope_ratio,
        })
    }

    /// Unnormalized target density of the raw variable.
    pub fn raw_density(&self, x: f64) -> f64 {
        sinc(x).powi(2 * self.m as i32)
    }

    /// Density of the unit-variance version.
    pub fn density(&self, x: f64) -> f64 {
        let s = self.raw_variance.sqrt();
        self.raw_density(x * s) * s / self.lambda
    }

    /// Rejection sampler against the scaled Student-t envelope.
    pub fn sample(&self, count: usize, seed: u64) -> Result<SampleBatch, SimError> {
        let nu = 2.0 * self.m as f64 - 1.0;
        let scale = (2.0 * self.m as f64 / nu).sqrt();
        let student = rand_distr::StudentT::new(nu).expect("nu > 0");
        let s = self.raw_variance.sqrt();
        let mut values = Vec::with_capacity(count);
        let mut proposals: u64 = 0;
        for traj in 0..count {
            let mut rng = stream(seed, traj as u64);
            loop {
                proposals += 1;
                let t: f64 = rng.sample(student);
                let x = t * scale;
                let env = (1.0 + x * x / (2.0 * self.m as f64)).powi(-(self.m as i32));
                let accept = self.raw_density(x) / (self.envelope_ratio * env);
                if rng.random::<f64>() < accept {
                    values.push(x / s);
                    break;
                }
                if proposals > 200 * (count as u64 + 50) {
                    return Err(SimError::EnvelopeMisfit(count as f64 / proposals as f64));
                }
            }
        }
        let efficiency = count as f64 / proposals as f64;
        if efficiency < 0.01 {
            return Err(SimError::EnvelopeMisfit(efficiency));
        }
        Ok(SampleBatch { values, n: 1, seed, model: format!("smoothing-w{}", self.m) })
    }
}

/// Draw `count` unit-variance smoothing-noise samples of order `m`.
pub fn sample_smoothing_noise(m: usize, count: usize, seed: u64) -> Result<SampleBatch, SimError> {
    SmoothingNoise::new(m)?.sample(count, seed)
}

/// Right-continuous empirical step CDF over the sorted batch values.
pub fn empirical_cdf(batch: &SampleBatch) -> Result<CdfCurve, SimError> {
    if batch.values.is_empty() {
        return Err(SimError::EmptyBatch);
    }
    let mut values = batch.values.clone();
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(CdfCurve::Empirical { values })
}

/// Dvoretzky-Kiefer-Wolfowitz band at confidence `1 - alpha`.
pub fn dkw_band(count: usize, alpha: f64) -> f64 {
    ((2.0 / alpha).ln() / (2.0 * count as f64)).sqrt()
}
