//! Finite-state (in)homogeneous Markov chains with additive functionals:
//! exact characteristic functions through tilted transition matrices, exact
//! cumulants by contour differentiation of the log moment generating
//! function, Perron-eigenvalue pressure, ellipticity checks, variance block
//! partitions, operator-decay diagnostics and exact lattice laws.

use num_complex::Complex64 as C64;

use crate::error::ChainError;
use crate::expansion::{CumulantVector, StationaryCoefficients, Subject};

/// Row-major real matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols);
        Mat { rows, cols, data }
    }

    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c);
            data.extend_from_slice(row);
        }
        Mat { rows: r, cols: c, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn matmul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows);
        let mut out = Mat::new(self.rows, other.cols, vec![0.0; self.rows * other.cols]);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.get(k, j);
                }
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, &v| m.max(v.abs()))
    }
}

/// Row-major complex matrix for tilted kernels.
#[derive(Clone, Debug)]
pub struct CMat {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMat {
    pub fn identity(n: usize) -> Self {
        let mut data = vec![C64::new(0.0, 0.0); n * n];
        for i in 0..n {
            data[i * n + i] = C64::new(1.0, 0.0);
        }
        CMat { rows: n, cols: n, data }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.cols + j]
    }

    pub fn matmul(&self, other: &CMat) -> CMat {
        assert_eq!(self.cols, other.rows);
        let mut data = vec![C64::new(0.0, 0.0); self.rows * other.cols];
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    data[i * other.cols + j] += a * other.get(k, j);
                }
            }
        }
        CMat { rows: self.rows, cols: other.cols, data }
    }

    pub fn pow(&self, mut e: usize) -> CMat {
        assert_eq!(self.rows, self.cols);
        let mut base = self.clone();
        let mut acc = CMat::identity(self.rows);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.matmul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.matmul(&base);
            }
        }
        acc
    }

    /// Induced sup-norm: maximal row sum of absolute values.
    pub fn sup_norm(&self) -> f64 {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j).norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

/// One chain step: a row-stochastic kernel and an observable on state pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainStep {
    pub kernel: Mat,
    pub observable: Mat,
}

/// Kernel/observable sequence. `Periodic` with period 1 is the homogeneous
/// case; the periodic rule supports horizons up to 10^6 without storing
/// per-step matrices.
#[derive(Clone, Debug, PartialEq)]
pub enum StepSeq {
    Periodic(Vec<ChainStep>),
    Explicit(Vec<ChainStep>),
}

/// Hard cap on explicit horizons used by marginal sweeps.
pub const MAX_HORIZON: usize = 1_000_000;

/// Finite-state Markov chain model for partial sums
/// `S_n = sum_{j=1..n} f_j(X_j, X_{j+1})`.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteChainSpec {
    mu1: Vec<f64>,
    steps: StepSeq,
    centered: bool,
}

impl FiniteChainSpec {
    pub fn new(mu1: Vec<f64>, steps: StepSeq, centered: bool) -> Result<Self, ChainError> {
        let spec = FiniteChainSpec { mu1, steps, centered };
        spec.validate()?;
        Ok(spec)
    }

    /// Homogeneous chain from one kernel and one observable.
    pub fn homogeneous(mu1: Vec<f64>, kernel: Mat, observable: Mat, centered: bool) -> Result<Self, ChainError> {
        FiniteChainSpec::new(mu1, StepSeq::Periodic(vec![ChainStep { kernel, observable }]), centered)
    }

    fn validate(&self) -> Result<(), ChainError> {
        let mass: f64 = self.mu1.iter().sum();
        if (mass - 1.0).abs() > 1e-12 || self.mu1.iter().any(|&m| m < -1e-15) {
            return Err(ChainError::BadInitialDistribution(mass));
        }
        let steps = self.step_slice();
        if steps.is_empty() {
            return Err(ChainError::DimensionMismatch(0));
        }
        let mut prev_cols = self.mu1.len();
        for (idx, step) in steps.iter().enumerate() {
            let k = &step.kernel;
            if k.rows() != prev_cols && !self.is_periodic() {
                return Err(ChainError::DimensionMismatch(idx + 1));
            }
            if self.is_periodic() && (k.rows() != self.mu1.len() || k.cols() != self.mu1.len()) {
                return Err(ChainError::DimensionMismatch(idx + 1));
            }
            if step.observable.rows() != k.rows() || step.observable.cols() != k.cols() {
                return Err(ChainError::DimensionMismatch(idx + 1));
            }
            for r in 0..k.rows() {
                let s: f64 = (0..k.cols()).map(|c| k.get(r, c)).sum();
                if (s - 1.0).abs() > 1e-12 {
                    return Err(ChainError::RowNotStochastic { step: idx + 1, row: r, sum: s });
                }
            }
            prev_cols = k.cols();
        }
        if self.centered {
            let horizon = match &self.steps {
                StepSeq::Periodic(p) => 4 * p.len(),
                StepSeq::Explicit(e) => e.len(),
            };
            for (j, mean) in self.exact_means_unchecked(horizon).into_iter().enumerate() {
                if mean.abs() > 1e-10 {
                    return Err(ChainError::NotCentered { step: j + 1, mean });
                }
            }
        }
        Ok(())
    }

    pub fn initial(&self) -> &[f64] {
        &self.mu1
    }

    pub fn is_centered(&self) -> bool {
        self.centered
    }

    pub fn is_periodic(&self) -> bool {
        matches!(self.steps, StepSeq::Periodic(_))
    }

    pub fn is_homogeneous(&self) -> bool {
        matches!(&self.steps, StepSeq::Periodic(p) if p.len() == 1)
    }

    pub fn period(&self) -> Option<usize> {
        match &self.steps {
            StepSeq::Periodic(p) => Some(p.len()),
            StepSeq::Explicit(_) => None,
        }
    }

    fn step_slice(&self) -> &[ChainStep] {
        match &self.steps {
            StepSeq::Periodic(p) | StepSeq::Explicit(p) => p,
        }
    }

    /// The step used at (1-based) time `j`.
    pub fn step(&self, j: usize) -> &ChainStep {
        match &self.steps {
            StepSeq::Periodic(p) => &p[(j - 1) % p.len()],
            StepSeq::Explicit(e) => &e[j - 1],
        }
    }

    /// Number of distinct steps stored (period length or explicit horizon).
    pub fn distinct_steps(&self) -> usize {
        self.step_slice().len()
    }

    pub fn max_horizon(&self) -> usize {
        match &self.steps {
            StepSeq::Periodic(_) => MAX_HORIZON,
            StepSeq::Explicit(e) => e.len(),
        }
    }

    /// Largest absolute observable value, the scale for tilt radii.
    pub fn max_abs_observable(&self) -> f64 {
        self.step_slice()
            .iter()
            .map(|s| s.observable.max_abs())
            .fold(0.0, f64::max)
    }

    fn check_horizon(&self, n: usize) -> Result<(), ChainError> {
        if n > self.max_horizon() {
            return Err(ChainError::HorizonTooLarge { n, max: self.max_horizon() });
        }
        Ok(())
    }

    /// Marginal distribution of `X_j` (`j = 1` is the initial law).
    pub fn marginal(&self, j: usize) -> Vec<f64> {
        let mut v = self.mu1.clone();
        for step in 1..j {
            v = propagate(&v, &self.step(step).kernel);
        }
        v
    }

    fn exact_means_unchecked(&self, n: usize) -> Vec<f64> {
        let mut v = self.mu1.clone();
        let mut out = Vec::with_capacity(n);
        for j in 1..=n {
            let step = self.step(j);
            let mut mean = 0.0;
            for x in 0..step.kernel.rows() {
                for y in 0..step.kernel.cols() {
                    mean += v[x] * step.kernel.get(x, y) * step.observable.get(x, y);
                }
            }
            out.push(mean);
            v = propagate(&v, &step.kernel);
        }
        out
    }

    /// Center every observable against the exact per-step means and replace
    /// the initial law by the periodic fixed point, so that the centering
    /// holds for all horizons. Homogeneous chains get their stationary law.
    pub fn into_centered_stationary(self) -> Result<Self, ChainError> {
        match self.steps {
            StepSeq::Explicit(steps) => {
                // center against the actual marginals
                let tmp = FiniteChainSpec {
                    mu1: self.mu1.clone(),
                    steps: StepSeq::Explicit(steps.clone()),
                    centered: false,
                };
                let means = tmp.exact_means_unchecked(steps.len());
                let centered = steps
                    .into_iter()
                    .zip(means)
                    .map(|(mut s, m)| {
                        for i in 0..s.observable.rows() {
                            for j in 0..s.observable.cols() {
                                s.observable.set(i, j, s.observable.get(i, j) - m);
                            }
                        }
                        s
                    })
                    .collect();
                FiniteChainSpec::new(self.mu1, StepSeq::Explicit(centered), true)
            }
            StepSeq::Periodic(steps) => {
                // fixed point of the period composite, by long multiplication
                let mut pi = self.mu1.clone();
                for _ in 0..200_000 {
                    let mut next = pi.clone();
                    for s in &steps {
                        next = propagate(&next, &s.kernel);
                    }
                    let diff: f64 = next.iter().zip(&pi).map(|(a, b)| (a - b).abs()).sum();
                    pi = next;
                    if diff < 1e-15 {
                        break;
                    }
                }
                let mut marg = pi.clone();
                let centered: Vec<ChainStep> = steps
                    .into_iter()
                    .map(|mut s| {
                        let mut mean = 0.0;
                        for x in 0..s.kernel.rows() {
                            for y in 0..s.kernel.cols() {
                                mean += marg[x] * s.kernel.get(x, y) * s.observable.get(x, y);
                            }
                        }
                        for i in 0..s.observable.rows() {
                            for j in 0..s.observable.cols() {
                                s.observable.set(i, j, s.observable.get(i, j) - mean);
                            }
                        }
                        marg = propagate(&marg, &s.kernel);
                        s
                    })
                    .collect();
                FiniteChainSpec::new(pi, StepSeq::Periodic(centered), true)
            }
        }
    }
}

fn propagate(v: &[f64], kernel: &Mat) -> Vec<f64> {
    let mut out = vec![0.0; kernel.cols()];
    for x in 0..kernel.rows() {
        let vx = v[x];
        if vx == 0.0 {
            continue;
        }
        for y in 0..kernel.cols() {
            out[y] += vx * kernel.get(x, y);
        }
    }
    out
}

/// Exact per-step means `E[f_j(X_j, X_{j+1})]`.
pub fn exact_means(spec: &FiniteChainSpec, n: usize) -> Result<Vec<f64>, ChainError> {
    spec.check_horizon(n)?;
    Ok(spec.exact_means_unchecked(n))
}

/// Uniform-ellipticity diagnostic report.
#[derive(Clone, Debug)]
pub struct EllipticityReport {
    pub upper_ok: bool,
    pub two_step_ok: bool,
    /// Largest one-step density `S * p_j(x,y)`.
    pub worst_upper: f64,
    /// Smallest two-step composed density.
    pub worst_two_step: f64,
}

/// Check the two-sided density conditions with respect to the uniform
/// reference measure on states (density of a kernel entry is `S * p`).
pub fn check_ellipticity(spec: &FiniteChainSpec, eps0: f64) -> EllipticityReport {
    let steps = spec.step_slice();
    let mut worst_upper: f64 = 0.0;
    let mut worst_two_step = f64::INFINITY;
    let m = steps.len();
    for (idx, step) in steps.iter().enumerate() {
        let s_target = step.kernel.cols() as f64;
        for x in 0..step.kernel.rows() {
            for y in 0..step.kernel.cols() {
                worst_upper = worst_upper.max(s_target * step.kernel.get(x, y));
            }
        }
        // two-step composition; periodic sequences wrap around
        let next = if spec.is_periodic() {
            Some(&steps[(idx + 1) % m])
        } else if idx + 1 < m {
            Some(&steps[idx + 1])
        } else {
            None
        };
        if let Some(next) = next {
            if step.kernel.cols() == next.kernel.rows() {
                let composed = step.kernel.matmul(&next.kernel);
                let s2 = composed.cols() as f64;
                for x in 0..composed.rows() {
                    for z in 0..composed.cols() {
                        worst_two_step = worst_two_step.min(s2 * composed.get(x, z));
                    }
                }
            }
        }
    }
    EllipticityReport {
        upper_ok: worst_upper <= 1.0 / eps0 + 1e-12,
        two_step_ok: worst_two_step >= eps0 - 1e-12,
        worst_upper,
        worst_two_step,
    }
}

fn tilted(step: &ChainStep, z: C64) -> CMat {
    let k = &step.kernel;
    let f = &step.observable;
    let mut data = Vec::with_capacity(k.rows() * k.cols());
    for x in 0..k.rows() {
        for y in 0..k.cols() {
            data.push(C64::from(k.get(x, y)) * (z * f.get(x, y)).exp());
        }
    }
    CMat { rows: k.rows(), cols: k.cols(), data }
}

/// Characteristic function `psi_n(t) = E[exp(i t S_n)]`, exact to roundoff.
///
/// Periodic sequences go through binary exponentiation of the period
/// composite; explicit sequences propagate step by step. Both realize the
/// same initial-vector contraction through the tilted matrices.
pub fn char_fn(spec: &FiniteChainSpec, n: usize, t: f64) -> Result<C64, ChainError> {
    spec.check_horizon(n)?;
    if n == 0 {
        return Ok(C64::new(1.0, 0.0));
    }
    let z = C64::new(0.0, t);
    let mut v: Vec<C64> = spec.mu1.iter().map(|&p| C64::from(p)).collect();
    match &spec.steps {
        StepSeq::Periodic(steps) => {
            let p = steps.len();
            let tilted_steps: Vec<CMat> = steps.iter().map(|s| tilted(s, z)).collect();
            if n >= p && p >= 1 {
                let mut composite = tilted_steps[0].clone();
                for m in &tilted_steps[1..] {
                    composite = composite.matmul(m);
                }
                let full = composite.pow(n / p);
                v = cvec_mul(&v, &full);
            }
            for step in &tilted_steps[..n % p] {
                v = cvec_mul(&v, step);
            }
        }
        StepSeq::Explicit(_) => {
            for j in 1..=n {
                v = cvec_mul(&v, &tilted(spec.step(j), z));
            }
        }
    }
    Ok(v.iter().sum())
}

fn cvec_mul(v: &[C64], m: &CMat) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); m.cols];
    for x in 0..m.rows {
        let vx = v[x];
        if vx.norm_sqr() == 0.0 {
            continue;
        }
        for y in 0..m.cols {
            out[y] += vx * m.get(x, y);
        }
    }
    out
}

/// Log moment generating function `Gamma_n(z) = ln E[exp(z S_n)]` on the
/// analytic branch with `Gamma_n(0) = 0`, by per-step renormalized
/// propagation: each step contributes the principal log of a factor close to
/// 1, so the branch never wraps for moderate `|z| * max|f|`.
fn log_mgf(spec: &FiniteChainSpec, n: usize, z: C64) -> Result<C64, ChainError> {
    let mut v: Vec<C64> = spec.mu1.iter().map(|&p| C64::from(p)).collect();
    let mut gamma = C64::new(0.0, 0.0);
    for j in 1..=n {
        let m = tilted(spec.step(j), z);
        let w = cvec_mul(&v, &m);
        let s: C64 = w.iter().sum();
        let abs = s.norm();
        if abs < 1e-280 || s.arg().abs() > 1.5 {
            return Err(ChainError::IllConditionedContour { min_abs: abs });
        }
        gamma += s.ln();
        v = w.iter().map(|&c| c / s).collect();
    }
    Ok(gamma)
}

/// Options for the contour differentiation behind [`exact_cumulants`].
#[derive(Clone, Copy, Debug)]
pub struct ContourOptions {
    /// Tilt radius in units of `1 / max|f|`.
    pub rho_scale: f64,
    /// Trapezoid nodes on the circle.
    pub nodes: usize,
}

impl Default for ContourOptions {
    fn default() -> Self {
        ContourOptions { rho_scale: 0.1, nodes: 64 }
    }
}

/// Exact cumulants `gamma_j(S_n)`, `j = 1..j_max`, by Cauchy contour
/// differentiation of the log moment generating function:
/// `gamma_j = (j! / 2 pi) int_0^{2pi} Gamma_n(rho e^{i theta}) rho^{-j} e^{-i j theta} d theta`,
/// evaluated with the spectrally accurate N-node trapezoid rule.
pub fn exact_cumulants(spec: &FiniteChainSpec, n: usize, j_max: usize) -> Result<CumulantVector, ChainError> {
    exact_cumulants_with(spec, n, j_max, ContourOptions::default())
}

pub fn exact_cumulants_with(
    spec: &FiniteChainSpec,
    n: usize,
    j_max: usize,
    opts: ContourOptions,
) -> Result<CumulantVector, ChainError> {
    spec.check_horizon(n)?;
    if j_max > 8 {
        return Err(ChainError::CumulantOrderTooLarge(j_max));
    }
    let scale = spec.max_abs_observable().max(1e-12);
    let rho = opts.rho_scale / scale;
    let nn = opts.nodes;
    let mut gammas: Vec<C64> = Vec::with_capacity(nn);
    for l in 0..nn {
        let theta = 2.0 * std::f64::consts::PI * l as f64 / nn as f64;
        let z = C64::from_polar(rho, theta);
        gammas.push(log_mgf(spec, n, z)?);
    }
    let mut out = Vec::with_capacity(j_max);
    let mut factorial = 1.0f64;
    for j in 1..=j_max {
        factorial *= j as f64;
        let mut acc = C64::new(0.0, 0.0);
        for (l, g) in gammas.iter().enumerate() {
            let theta = 2.0 * std::f64::consts::PI * l as f64 / nn as f64;
            acc += g * C64::from_polar(rho.powi(-(j as i32)), -(j as f64) * theta);
        }
        out.push((acc / nn as f64).re * factorial);
    }
    let sigma = if j_max >= 2 { out[1].max(0.0).sqrt() } else { f64::NAN };
    Ok(CumulantVector::new(out, Subject::SumSn, sigma))
}

/// Leading eigenvalue of a complex square matrix by power iteration with the
/// component-sum normalization; ties (periodic or reducible chains) surface
/// as non-convergence.
fn leading_eigenvalue(m: &CMat) -> Result<C64, ChainError> {
    let nstates = m.rows;
    let mut v = vec![C64::from(1.0 / nstates as f64); nstates];
    let mut lambda = C64::new(1.0, 0.0);
    let mut stable = 0usize;
    const MAX_ITERS: usize = 100_000;
    for _ in 0..MAX_ITERS {
        let w = cvec_mul(&v, m);
        let s: C64 = w.iter().sum();
        if s.norm() < 1e-300 {
            return Err(ChainError::SpectralGapFailure { iters: MAX_ITERS });
        }
        let delta = (s - lambda).norm();
        lambda = s;
        v = w.iter().map(|&c| c / s).collect();
        if delta <= 1e-13 * lambda.norm().max(1.0) {
            stable += 1;
            if stable >= 2 {
                return Ok(lambda);
            }
        } else {
            stable = 0;
        }
    }
    Err(ChainError::SpectralGapFailure { iters: MAX_ITERS })
}

/// Pressure `Pi(z) = ln lambda(z)` of the tilted kernel of a homogeneous
/// chain at a real tilt `z`; `Pi(0) = 0` because the kernel is stochastic.
pub fn perron_pressure(spec: &FiniteChainSpec, z: f64) -> Result<f64, ChainError> {
    if !spec.is_homogeneous() {
        return Err(ChainError::NotHomogeneous);
    }
    let m = tilted(spec.step(1), C64::from(z));
    let lambda = leading_eigenvalue(&m)?;
    Ok(lambda.norm().ln())
}

/// Asymptotic cumulant coefficients of a homogeneous chain:
/// `p_k = Pi^(k)(0)` by Cauchy contour differentiation of the pressure, and
/// `q_k` as the intercept `gamma_k(S_n*) - n* p_k` at a reference length,
/// cross-checked at a second length. Also fits the geometric residual rate.
pub fn asymptotic_pq(spec: &FiniteChainSpec, k_max: usize) -> Result<StationaryCoefficients, ChainError> {
    asymptotic_pq_with(spec, k_max, 1024)
}

pub fn asymptotic_pq_with(
    spec: &FiniteChainSpec,
    k_max: usize,
    n_star: usize,
) -> Result<StationaryCoefficients, ChainError> {
    if !spec.is_homogeneous() {
        return Err(ChainError::NotHomogeneous);
    }
    let scale = spec.max_abs_observable().max(1e-12);
    let rho = 0.1 / scale;
    let nn = 64usize;
    let mut pressures: Vec<C64> = Vec::with_capacity(nn);
    for l in 0..nn {
        let theta = 2.0 * std::f64::consts::PI * l as f64 / nn as f64;
        let z = C64::from_polar(rho, theta);
        let lambda = leading_eigenvalue(&tilted(spec.step(1), z))?;
        pressures.push(lambda.ln());
    }
    let mut p = Vec::with_capacity(k_max.saturating_sub(1));
    let mut factorial = 1.0f64;
    let mut p_all = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        factorial *= k as f64;
        let mut acc = C64::new(0.0, 0.0);
        for (l, g) in pressures.iter().enumerate() {
            let theta = 2.0 * std::f64::consts::PI * l as f64 / nn as f64;
            acc += g * C64::from_polar(rho.powi(-(k as i32)), -(k as f64) * theta);
        }
        p_all.push((acc / nn as f64).re * factorial);
        if k >= 2 {
            p.push(p_all[k - 1]);
        }
    }

    let n2 = n_star / 2;
    let cum_star = exact_cumulants(spec, n_star, k_max)?;
    let cum_half = exact_cumulants(spec, n2, k_max)?;
    let mut q = Vec::with_capacity(k_max.saturating_sub(1));
    for k in 2..=k_max {
        let qk = cum_star.gamma(k) - n_star as f64 * p_all[k - 1];
        let qk2 = cum_half.gamma(k) - n2 as f64 * p_all[k - 1];
        let diff = (qk - qk2).abs();
        if diff > 1e-5 * qk.abs().max(1.0) {
            return Err(ChainError::NoGeometricRegime { k, diff });
        }
        q.push(qk);
    }
    let c = cum_star.gamma(1) - n_star as f64 * p_all[0];

    // geometric decay rate of |gamma_k(S_n) - (n p_k + q_k)| from small n
    let probe: Vec<usize> = vec![4, 8, 12, 16, 24, 32];
    let mut points: Vec<(f64, f64)> = Vec::new();
    for &n in &probe {
        let cum = exact_cumulants(spec, n, k_max)?;
        for k in 2..=k_max {
            let resid = (cum.gamma(k) - (n as f64 * p_all[k - 1] + q[k - 2])).abs();
            if resid > 1e-10 * cum.gamma(k).abs().max(1.0) {
                points.push((n as f64, resid.ln()));
            }
        }
    }
    let delta = if points.len() >= 4 {
        let slope = linear_slope(&points);
        slope.exp().clamp(1e-6, 0.999_999)
    } else {
        // residuals at the floor everywhere: effectively exact linearity
        1e-3
    };
    Ok(StationaryCoefficients::new(p, q, c, delta))
}

fn linear_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|p| p.0).sum();
    let sy: f64 = points.iter().map(|p| p.1).sum();
    let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

/// Exact first two moments of prefix sums: returns `(E[S_k], Var(S_k))` for
/// `k = 0..n` in one forward pass.
pub fn prefix_moments(spec: &FiniteChainSpec, n: usize) -> Result<Vec<(f64, f64)>, ChainError> {
    spec.check_horizon(n)?;
    let mut out = Vec::with_capacity(n + 1);
    out.push((0.0, 0.0));
    let states = spec.mu1.len();
    let mut m0 = spec.mu1.clone();
    let mut m1 = vec![0.0; states];
    let mut m2 = vec![0.0; states];
    for j in 1..=n {
        let step = spec.step(j);
        let cols = step.kernel.cols();
        let mut n0 = vec![0.0; cols];
        let mut n1 = vec![0.0; cols];
        let mut n2 = vec![0.0; cols];
        for x in 0..step.kernel.rows() {
            if m0[x] == 0.0 && m1[x] == 0.0 && m2[x] == 0.0 {
                continue;
            }
            for y in 0..cols {
                let p = step.kernel.get(x, y);
                if p == 0.0 {
                    continue;
                }
                let f = step.observable.get(x, y);
                n0[y] += p * m0[x];
                n1[y] += p * (m1[x] + m0[x] * f);
                n2[y] += p * (m2[x] + 2.0 * m1[x] * f + m0[x] * f * f);
            }
        }
        m0 = n0;
        m1 = n1;
        m2 = n2;
        let mean: f64 = m1.iter().sum();
        let second: f64 = m2.iter().sum();
        out.push((mean, second - mean * mean));
    }
    Ok(out)
}

/// Variance block partition of `{1..n}` and the block-boundary variance
/// sequence `a_m`.
#[derive(Clone, Debug)]
pub struct BlockPartition {
    /// Inclusive 1-based intervals, each with `Var(S_I) >= A`.
    pub intervals: Vec<(usize, usize)>,
    /// `a_m = Var(S_{b_k})` for the last complete block end `b_k <= m`;
    /// `None` before the first block completes.
    pub a: Vec<Option<f64>>,
    /// Exact prefix variances `Var(S_m)`, `m = 0..n`.
    pub prefix_variance: Vec<f64>,
}

/// Greedy left-to-right partition into intervals with variance in `[A, 2A]`
/// (the single-step variance bound keeps the overshoot below `2A` once
/// `A` is at least twice the largest per-step variance).
pub fn block_partition(spec: &FiniteChainSpec, n: usize, a_scale: f64) -> Result<BlockPartition, ChainError> {
    spec.check_horizon(n)?;
    let means = spec.exact_means_unchecked(n);
    let mut max_step_var: f64 = 0.0;
    {
        let mut v = spec.mu1.clone();
        for j in 1..=n {
            let step = spec.step(j);
            let mut m1 = 0.0;
            let mut m2 = 0.0;
            for x in 0..step.kernel.rows() {
                for y in 0..step.kernel.cols() {
                    let w = v[x] * step.kernel.get(x, y);
                    let f = step.observable.get(x, y);
                    m1 += w * f;
                    m2 += w * f * f;
                }
            }
            max_step_var = max_step_var.max(m2 - m1 * m1);
            v = propagate(&v, &step.kernel);
        }
    }
    if a_scale < 2.0 * max_step_var {
        return Err(ChainError::InvalidBlockScale { a: a_scale, max_step_var });
    }
    let _ = means;

    // interval variance by restarting the moment recursion at the block start
    let mut intervals = Vec::new();
    let mut start = 1usize;
    while start <= n {
        let marg = spec.marginal(start);
        let states_max = marg.len();
        let mut m0 = marg;
        let mut m1 = vec![0.0; states_max];
        let mut m2 = vec![0.0; states_max];
        let mut end = None;
        let mut j = start;
        while j <= n {
            let step = spec.step(j);
            let cols = step.kernel.cols();
            let mut n0 = vec![0.0; cols];
            let mut n1 = vec![0.0; cols];
            let mut n2 = vec![0.0; cols];
            for x in 0..step.kernel.rows() {
                for y in 0..cols {
                    let p = step.kernel.get(x, y);
                    if p == 0.0 {
                        continue;
                    }
                    let f = step.observable.get(x, y);
                    n0[y] += p * m0[x];
                    n1[y] += p * (m1[x] + m0[x] * f);
                    n2[y] += p * (m2[x] + 2.0 * m1[x] * f + m0[x] * f * f);
                }
            }
            m0 = n0;
            m1 = n1;
            m2 = n2;
            let mean: f64 = m1.iter().sum();
            let var: f64 = m2.iter().sum::<f64>() - mean * mean;
            if var >= a_scale {
                end = Some(j);
                break;
            }
            j += 1;
        }
        match end {
            Some(b) => {
                intervals.push((start, b));
                start = b + 1;
            }
            None => break, // not enough variance left for one more block
        }
    }

    let prefix = prefix_moments(spec, n)?;
    let prefix_variance: Vec<f64> = prefix.iter().map(|&(_, v)| v).collect();
    let mut a = vec![None; n + 1];
    let mut block_idx = 0usize;
    let mut last_end: Option<usize> = None;
    for (m, slot) in a.iter_mut().enumerate() {
        while block_idx < intervals.len() && intervals[block_idx].1 <= m {
            last_end = Some(intervals[block_idx].1);
            block_idx += 1;
        }
        *slot = last_end.map(|b| prefix_variance[b]);
    }
    Ok(BlockPartition { intervals, a, prefix_variance })
}

/// Induced sup-norm of the n-fold tilted kernel product `M_{it}^n` of a
/// homogeneous chain; decays geometrically in `n` for non-arithmetic
/// observables, stays at 1 at resonant `t` for lattice ones.
pub fn operator_norm_decay(spec: &FiniteChainSpec, t: f64, n: usize) -> Result<f64, ChainError> {
    if !spec.is_homogeneous() {
        return Err(ChainError::NotHomogeneous);
    }
    let m = tilted(spec.step(1), C64::new(0.0, t));
    Ok(m.pow(n).sup_norm())
}

/// Exact law of `S_n` for observables on a common lattice `h Z + offset`.
///
/// Dynamic programming over (state, accumulated lattice index); returns the
/// sorted atoms. Budget-guarded; non-lattice observables are refused.
pub fn lattice_distribution(spec: &FiniteChainSpec, n: usize) -> Result<Vec<(f64, f64)>, ChainError> {
    spec.check_horizon(n)?;
    // per-step minimum and lattice spacing across every step in horizon
    let distinct = match &spec.steps {
        StepSeq::Periodic(p) => p.len().min(n),
        StepSeq::Explicit(_) => n,
    };
    let scale = spec.max_abs_observable().max(1.0);
    let mut h = 0.0f64;
    let mut mins = Vec::with_capacity(distinct);
    for idx in 0..distinct {
        let step = spec.step(idx + 1);
        let f = &step.observable;
        let mut lo = f64::INFINITY;
        for x in 0..f.rows() {
            for y in 0..f.cols() {
                lo = lo.min(f.get(x, y));
            }
        }
        mins.push(lo);
        for x in 0..f.rows() {
            for y in 0..f.cols() {
                let d = f.get(x, y) - lo;
                if d > 1e-12 * scale {
                    h = real_gcd(h, d, 1e-12 * scale);
                }
            }
        }
    }
    // verify integrality of every increment
    let mut max_k = vec![0usize; distinct];
    for idx in 0..distinct {
        let step = spec.step(idx + 1);
        let f = &step.observable;
        for x in 0..f.rows() {
            for y in 0..f.cols() {
                let d = f.get(x, y) - mins[idx];
                if h == 0.0 {
                    if d.abs() > 1e-12 * scale {
                        return Err(ChainError::NotLattice);
                    }
                } else {
                    let k = (d / h).round();
                    if (d - k * h).abs() > 1e-9 * h.max(1e-12) {
                        return Err(ChainError::NotLattice);
                    }
                    max_k[idx] = max_k[idx].max(k as usize);
                }
            }
        }
    }
    let step_index = |j: usize| -> usize {
        match &spec.steps {
            StepSeq::Periodic(p) => (j - 1) % p.len(),
            StepSeq::Explicit(_) => j - 1,
        }
    };
    let total_k: usize = (1..=n).map(|j| max_k[step_index(j)]).sum();
    let states = spec.mu1.len();
    let budget = 50_000_000usize;
    if states.saturating_mul(total_k + 1) > budget {
        return Err(ChainError::LatticeBudget { needed: states * (total_k + 1), budget });
    }

    let mut dist = vec![vec![0.0f64; 1]; states];
    for (x, slot) in dist.iter_mut().enumerate() {
        slot[0] = spec.mu1[x];
    }
    let mut base = 0.0f64;
    let mut width = 1usize;
    for j in 1..=n {
        let si = step_index(j);
        let step = spec.step(j);
        base += mins[si];
        let new_width = width + max_k[si];
        let cols = step.kernel.cols();
        let mut next = vec![vec![0.0f64; new_width]; cols];
        for x in 0..step.kernel.rows() {
            for y in 0..cols {
                let p = step.kernel.get(x, y);
                if p == 0.0 {
                    continue;
                }
                let k = if h == 0.0 {
                    0
                } else {
                    ((step.observable.get(x, y) - mins[si]) / h).round() as usize
                };
                for (kk, &mass) in dist[x].iter().enumerate() {
                    if mass != 0.0 {
                        next[y][kk + k] += p * mass;
                    }
                }
            }
        }
        dist = next;
        width = new_width;
    }
    let mut atoms = Vec::new();
    for kk in 0..width {
        let prob: f64 = dist.iter().map(|row| row[kk]).sum();
        if prob > 0.0 {
            atoms.push((base + h * kk as f64, prob));
        }
    }
    Ok(atoms)
}

fn real_gcd(a: f64, b: f64, tol: f64) -> f64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    if a < b {
        std::mem::swap(&mut a, &mut b);
    }
    while b > tol {
        let r = a % b;
        a = b;
        b = if r > b - tol { 0.0 } else { r };
    }
    a
}

/// Raw absolute moment `E|S_n|^p` from exact atoms.
pub fn abs_moment(atoms: &[(f64, f64)], p: f64) -> f64 {
    atoms.iter().map(|&(v, prob)| v.abs().powf(p) * prob).sum()
}

/// Cumulants from the raw moments of an exact law, via the standard
/// recursion `kappa_j = m_j - sum_{i<j} binom(j-1, i-1) kappa_i m_{j-i}`.
/// Serves as the independent oracle against contour differentiation.
pub fn cumulants_from_atoms(atoms: &[(f64, f64)], j_max: usize) -> Vec<f64> {
    let mut raw = vec![0.0f64; j_max + 1];
    raw[0] = 1.0;
    for j in 1..=j_max {
        raw[j] = atoms.iter().map(|&(v, p)| v.powi(j as i32) * p).sum();
    }
    let mut kappa = vec![0.0f64; j_max + 1];
    for j in 1..=j_max {
        let mut acc = raw[j];
        for i in 1..j {
            acc -= binomial(j - 1, i - 1) * kappa[i] * raw[j - i];
        }
        kappa[j] = acc;
    }
    kappa[1..].to_vec()
}

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    pub fn iid_pm1() -> FiniteChainSpec {
        let kernel = Mat::from_rows(&[&[0.5, 0.5], &[0.5, 0.5]]);
        let obs = Mat::from_rows(&[&[1.0, -1.0], &[1.0, -1.0]]);
        FiniteChainSpec::homogeneous(vec![0.5, 0.5], kernel, obs, true).unwrap()
    }

    fn three_state_example() -> FiniteChainSpec {
        let kernel = Mat::from_rows(&[
            &[0.5, 0.3, 0.2],
            &[0.1, 0.6, 0.3],
            &[0.4, 0.2, 0.4],
        ]);
        let obs = Mat::from_rows(&[
            &[1.0, 0.0, 2.0],
            &[0.0, -1.0, 1.0],
            &[2.0, 1.0, 0.0],
        ]);
        FiniteChainSpec::homogeneous(vec![0.2, 0.5, 0.3], kernel, obs, false).unwrap()
    }

    #[test]
    fn validation_catches_bad_rows() {
        let kernel = Mat::from_rows(&[&[0.6, 0.5], &[0.5, 0.5]]);
        let obs = Mat::from_rows(&[&[0.0, 0.0], &[0.0, 0.0]]);
        assert!(matches!(
            FiniteChainSpec::homogeneous(vec![0.5, 0.5], kernel, obs, false),
            Err(ChainError::RowNotStochastic { .. })
        ));
    }

    #[test]
    fn ellipticity_uniform_kernel_passes() {
        let spec = iid_pm1();
        let report = check_ellipticity(&spec, 0.5);
        assert!(report.upper_ok && report.two_step_ok);
        assert_abs_diff_eq!(report.worst_upper, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(report.worst_two_step, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn ellipticity_permutation_fails_two_step() {
        let kernel = Mat::from_rows(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let obs = Mat::from_rows(&[&[0.0, 0.0], &[0.0, 0.0]]);
        let spec = FiniteChainSpec::homogeneous(vec![0.5, 0.5], kernel, obs, false).unwrap();
        let report = check_ellipticity(&spec, 0.1);
        assert!(!report.two_step_ok);
    }

    #[test]
    fn ellipticity_zero_entry_positive_square() {
        let kernel = Mat::from_rows(&[&[0.0, 1.0], &[0.5, 0.5]]);
        let obs = Mat::from_rows(&[&[0.0, 0.0], &[0.0, 0.0]]);
        let spec = FiniteChainSpec::homogeneous(vec![0.5, 0.5], kernel, obs, false).unwrap();
        let sq = kernel_square_min(&spec);
        assert!(sq > 0.0);
        let report = check_ellipticity(&spec, 0.4);
        assert!(report.upper_ok && report.two_step_ok, "{report:?}");
    }

    fn kernel_square_min(spec: &FiniteChainSpec) -> f64 {
        let k = &spec.step(1).kernel;
        let sq = k.matmul(k);
        let mut lo = f64::INFINITY;
        for i in 0..sq.rows() {
            for j in 0..sq.cols() {
                lo = lo.min(sq.get(i, j));
            }
        }
        lo
    }

    #[test]
    fn exact_means_iid_constant_observable() {
        let kernel = Mat::from_rows(&[&[0.3, 0.7], &[0.3, 0.7]]);
        let obs = Mat::from_rows(&[&[2.5, 2.5], &[2.5, 2.5]]);
        let spec = FiniteChainSpec::homogeneous(vec![0.5, 0.5], kernel, obs, false).unwrap();
        for mean in exact_means(&spec, 10).unwrap() {
            assert_abs_diff_eq!(mean, 2.5, epsilon = 1e-14);
        }
    }

    #[test]
    fn exact_means_indicator_uniform() {
        // f = indicator of the pair (0, 0) on a uniform 2-state iid chain
        let kernel = Mat::from_rows(&[&[0.5, 0.5], &[0.5, 0.5]]);
        let obs = Mat::from_rows(&[&[1.0, 0.0], &[0.0, 0.0]]);
        let spec = FiniteChainSpec::homogeneous(vec![0.5, 0.5], kernel, obs, false).unwrap();
        for mean in exact_means(&spec, 6).unwrap() {
            assert_abs_diff_eq!(mean, 0.25, epsilon = 1e-14);
        }
    }

    #[test]
    fn exact_means_two_state_recursion() {
        // f(x,y) = 1{y = 0}: mean at step j is the mass the marginal puts on
        // state 0 after one more kernel application
        let (a, b) = (0.35, 0.6);
        let kernel = Mat::from_rows(&[&[1.0 - a, a], &[b, 1.0 - b]]);
        let obs = Mat::from_rows(&[&[1.0, 0.0], &[1.0, 0.0]]);
        let spec = FiniteChainSpec::homogeneous(vec![1.0, 0.0], kernel, obs, false).unwrap();
        let means = exact_means(&spec, 20).unwrap();
        let mut p0 = 1.0f64;
        for mean in means {
            let next = p0 * (1.0 - a) + (1.0 - p0) * b;
            assert_abs_diff_eq!(mean, next, epsilon = 1e-13);
            p0 = next;
        }
    }

    #[test]
    fn char_fn_at_zero_is_one() {
        let spec = three_state_example();
        let val = char_fn(&spec, 12, 0.0).unwrap();
        assert_abs_diff_eq!(val.re, 1.0, epsilon = 1e-13);
        assert_abs_diff_eq!(val.im, 0.0, epsilon = 1e-13);
    }

    #[test]
    fn char_fn_iid_pm1_cos_power() {
        let spec = iid_pm1();
        for &n in &[1usize, 2, 7, 64, 1000] {
            for &t in &[0.2, 1.3, 2.9] {
                let val = char_fn(&spec, n, t).unwrap();
                let expect = t.cos().powi(n as i32);
                assert_abs_diff_eq!(val.re, expect, epsilon = 1e-12);
                assert_abs_diff_eq!(val.im, 0.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn char_fn_matches_path_enumeration() {
        let spec = three_state_example();
        let n = 2;
        let t = 0.77;
        let mut acc = C64::new(0.0, 0.0);
        for x1 in 0..3 {
            for x2 in 0..3 {
                for x3 in 0..3 {
                    let p = spec.initial()[x1]
                        * spec.step(1).kernel.get(x1, x2)
                        * spec.step(2).kernel.get(x2, x3);
                    let s = spec.step(1).observable.get(x1, x2) + spec.step(2).observable.get(x2, x3);
                    acc += p * C64::new(0.0, t * s).exp();
                }
            }
        }
        let val = char_fn(&spec, n, t).unwrap();
        assert!((val - acc).norm() < 1e-14);
    }

    #[test]
    fn char_fn_modulus_bounded_and_hermitian() {
        let spec = three_state_example();
        for &t in &[0.1, 0.9, 3.7, 11.0] {
            let v = char_fn(&spec, 9, t).unwrap();
            assert!(v.norm() <= 1.0 + 1e-12);
            let w = char_fn(&spec, 9, -t).unwrap();
            assert!((v.conj() - w).norm() < 1e-13);
        }
    }

    #[test]
    fn cumulants_iid_pm1() {
        // ln cosh z = z^2/2 - z^4/12 + O(z^6): kappa_2 = 1, kappa_4 = -2 per step
        let spec = iid_pm1();
        for &n in &[16usize, 100] {
            let cum = exact_cumulants(&spec, n, 6).unwrap();
            assert_abs_diff_eq!(cum.gamma(1), 0.0, epsilon = 1e-9);
            assert_abs_diff_eq!(cum.gamma(2), n as f64, epsilon = 1e-8 * n as f64);
            assert_abs_diff_eq!(cum.gamma(3), 0.0, epsilon = 1e-8 * n as f64);
            assert_abs_diff_eq!(cum.gamma(4), -2.0 * n as f64, epsilon = 1e-7 * n as f64);
        }
    }

    #[test]
    fn cumulants_match_lattice_oracle() {
        let spec = iid_pm1();
        let n = 10;
        let atoms = lattice_distribution(&spec, n).unwrap();
        let oracle = cumulants_from_atoms(&atoms, 6);
        let cum = exact_cumulants(&spec, n, 6).unwrap();
        for j in 1..=6 {
            assert_abs_diff_eq!(cum.gamma(j), oracle[j - 1], epsilon = 1e-8 * oracle[j - 1].abs().max(1.0));
        }
    }

    #[test]
    fn pressure_stochastic_zero() {
        let spec = three_state_example();
        assert_abs_diff_eq!(perron_pressure(&spec, 0.0).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn pressure_iid_log_cosh() {
        let spec = iid_pm1();
        for &z in &[0.1, 0.5, 1.0] {
            assert_abs_diff_eq!(perron_pressure(&spec, z).unwrap(), z.cosh().ln(), epsilon = 1e-10);
        }
    }

    #[test]
    fn pressure_two_state_quadratic_root() {
        // symmetric switch-q chain, f = +/-1 by target state: lambda solves
        // lambda^2 - (1-q)(e^z + e^-z) lambda + (1 - 2q) = 0
        let q = 0.3;
        let kernel = Mat::from_rows(&[&[1.0 - q, q], &[q, 1.0 - q]]);
        let obs = Mat::from_rows(&[&[1.0, -1.0], &[1.0, -1.0]]);
        let spec = FiniteChainSpec::homogeneous(vec![0.5, 0.5], kernel, obs, true).unwrap();
        for &z in &[0.2f64, 0.8] {
            let tr = (1.0 - q) * (z.exp() + (-z).exp());
            let det = 1.0 - 2.0 * q;
            let lambda = 0.5 * (tr + (tr * tr - 4.0 * det).sqrt());
            assert_abs_diff_eq!(perron_pressure(&spec, z).unwrap(), lambda.ln(), epsilon = 1e-10);
        }
    }

    #[test]
    fn pressure_periodic_kernel_fails() {
        let kernel = Mat::from_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let obs = Mat::from_rows(&[&[1.0, -1.0], &[1.0, -1.0]]);
        let spec = FiniteChainSpec::homogeneous(vec![0.5, 0.5], kernel, obs, false).unwrap();
        // M_z at a complex tilt has two eigenvalues of equal modulus
        let m = tilted(spec.step(1), C64::new(0.0, 1.0));
        assert!(leading_eigenvalue(&m).is_err());
    }

    #[test]
    fn asymptotic_pq_iid_q_vanishes() {
        let spec = iid_pm1();
        let coeffs = asymptotic_pq_with(&spec, 4, 256).unwrap();
        assert_abs_diff_eq!(coeffs.p(2), 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(coeffs.p(4), -2.0, epsilon = 1e-7);
        for k in 2..=4 {
            assert!(coeffs.q(k).abs() < 1e-6, "q_{k} = {}", coeffs.q(k));
        }
    }

    #[test]
    fn asymptotic_p2_matches_variance_slope() {
        let q = 0.3;
        let kernel = Mat::from_rows(&[&[1.0 - q, q], &[q, 1.0 - q]]);
        let obs = Mat::from_rows(&[&[0.3, 1.0], &[-0.7, 0.2]]);
        let spec = FiniteChainSpec::homogeneous(vec![0.5, 0.5], kernel, obs, false)
            .unwrap()
            .into_centered_stationary()
            .unwrap();
        let coeffs = asymptotic_pq_with(&spec, 4, 512).unwrap();
        let c9 = exact_cumulants(&spec, 512, 2).unwrap();
        let c10 = exact_cumulants(&spec, 1024, 2).unwrap();
        let slope = (c10.gamma(2) - c9.gamma(2)) / 512.0;
        assert_abs_diff_eq!(coeffs.p(2), slope, epsilon = 1e-8 * slope.abs().max(1.0));
    }

    #[test]
    fn coboundary_degenerate_variance_detected() {
        // f(x,y) = r(y) - r(x) telescopes; p_2 = 0
        let q = 0.25;
        let kernel = Mat::from_rows(&[&[1.0 - q, q], &[q, 1.0 - q]]);
        let r = [0.7, -0.4];
        let obs = Mat::from_rows(&[
            &[r[0] - r[0], r[1] - r[0]],
            &[r[0] - r[1], r[1] - r[1]],
        ]);
        let spec = FiniteChainSpec::homogeneous(vec![0.5, 0.5], kernel, obs, false).unwrap();
        let coeffs = asymptotic_pq_with(&spec, 2, 256).unwrap();
        assert!(coeffs.p(2).abs() < 1e-9, "p2 = {}", coeffs.p(2));
    }

    #[test]
    fn block_partition_iid_unit_variance() {
        let spec = iid_pm1();
        let blocks = block_partition(&spec, 64, 4.0).unwrap();
        assert_eq!(blocks.intervals[0], (1, 4));
        for &(a, b) in &blocks.intervals {
            let len = b - a + 1;
            assert!((4..=8).contains(&len));
        }
        // a_n matches prefix variance at block ends and is monotone
        let mut last = 0.0;
        for m in 1..=64 {
            if let Some(a) = blocks.a[m] {
                assert!(a >= last);
                last = a;
            }
        }
    }

    #[test]
    fn block_partition_too_short_horizon() {
        let spec = iid_pm1();
        let blocks = block_partition(&spec, 3, 4.0).unwrap();
        assert!(blocks.intervals.is_empty());
        assert!(blocks.a[3].is_none());
    }

    #[test]
    fn block_partition_small_scale_rejected() {
        let spec = iid_pm1();
        assert!(matches!(
            block_partition(&spec, 16, 1.0),
            Err(ChainError::InvalidBlockScale { .. })
        ));
    }

    #[test]
    fn operator_norm_t_zero_is_one() {
        let spec = three_state_example();
        for &n in &[1usize, 8, 64] {
            assert_abs_diff_eq!(operator_norm_decay(&spec, 0.0, n).unwrap(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn operator_norm_arithmetic_resonance() {
        let spec = iid_pm1();
        let t = 2.0 * std::f64::consts::PI;
        for &n in &[1usize, 8, 64] {
            assert_abs_diff_eq!(operator_norm_decay(&spec, t, n).unwrap(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn operator_norm_nonarithmetic_decay() {
        let kernel = Mat::from_rows(&[&[0.4, 0.3, 0.3], &[0.3, 0.4, 0.3], &[0.3, 0.3, 0.4]]);
        let vals = [0.0, 1.0, std::f64::consts::SQRT_2];
        let obs = Mat::from_rows(&[
            &[vals[0], vals[1], vals[2]],
            &[vals[0], vals[1], vals[2]],
            &[vals[0], vals[1], vals[2]],
        ]);
        let spec = FiniteChainSpec::homogeneous(vec![1.0 / 3.0; 3], kernel, obs, false).unwrap();
        let at8 = operator_norm_decay(&spec, 1.0, 8).unwrap();
        let at64 = operator_norm_decay(&spec, 1.0, 64).unwrap();
        assert!(at64 < 0.5 * at8, "no decay: {at8} -> {at64}");
    }

    #[test]
    fn lattice_fair_coin_binomial() {
        let spec = iid_pm1();
        let atoms = lattice_distribution(&spec, 2).unwrap();
        assert_eq!(atoms.len(), 3);
        assert_abs_diff_eq!(atoms[0].0, -2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(atoms[0].1, 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(atoms[1].0, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(atoms[1].1, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(atoms[2].0, 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(atoms[2].1, 0.25, epsilon = 1e-15);
    }

    #[test]
    fn lattice_probabilities_sum_to_one() {
        let spec = iid_pm1();
        let atoms = lattice_distribution(&spec, 20).unwrap();
        let mass: f64 = atoms.iter().map(|a| a.1).sum();
        assert_abs_diff_eq!(mass, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn lattice_matches_enumeration_three_state() {
        let spec = three_state_example();
        let n = 6;
        let atoms = lattice_distribution(&spec, n).unwrap();
        // brute force over 3^(n+1) paths
        let states = 3usize;
        let mut paths: Vec<(f64, f64)> = Vec::new();
        let total = states.pow(n as u32 + 1);
        for code in 0..total {
            let mut c = code;
            let mut seq = Vec::with_capacity(n + 1);
            for _ in 0..=n {
                seq.push(c % states);
                c /= states;
            }
            let mut p = spec.initial()[seq[0]];
            let mut s = 0.0;
            for j in 0..n {
                p *= spec.step(j + 1).kernel.get(seq[j], seq[j + 1]);
                s += spec.step(j + 1).observable.get(seq[j], seq[j + 1]);
            }
            if p > 0.0 {
                paths.push((s, p));
            }
        }
        paths.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut merged: Vec<(f64, f64)> = Vec::new();
        for (v, p) in paths {
            match merged.last_mut() {
                Some(last) if (last.0 - v).abs() < 1e-9 => last.1 += p,
                _ => merged.push((v, p)),
            }
        }
        assert_eq!(atoms.len(), merged.len());
        for (a, b) in atoms.iter().zip(merged.iter()) {
            assert_abs_diff_eq!(a.0, b.0, epsilon = 1e-12);
            assert_abs_diff_eq!(a.1, b.1, epsilon = 1e-14);
        }
    }

    #[test]
    fn lattice_rejects_incommensurable() {
        let kernel = Mat::from_rows(&[&[0.5, 0.5], &[0.5, 0.5]]);
        let obs = Mat::from_rows(&[&[0.0, 1.0], &[std::f64::consts::SQRT_2, 0.0]]);
        let spec = FiniteChainSpec::homogeneous(vec![0.5, 0.5], kernel, obs, false).unwrap();
        assert!(matches!(lattice_distribution(&spec, 4), Err(ChainError::NotLattice)));
    }

    #[test]
    fn cumulant_growth_residual_geometric() {
        // |gamma_j(S_n) - (n p_j + q_j)| decays geometrically, delta < 0.95
        let q = 0.3;
        let kernel = Mat::from_rows(&[&[1.0 - q, q], &[q, 1.0 - q]]);
        let obs = Mat::from_rows(&[&[0.1, 0.9], &[-0.5, 0.4]]);
        let spec = FiniteChainSpec::homogeneous(vec![0.5, 0.5], kernel, obs, false)
            .unwrap()
            .into_centered_stationary()
            .unwrap();
        let coeffs = asymptotic_pq_with(&spec, 6, 512).unwrap();
        assert!(coeffs.delta < 0.95, "delta = {}", coeffs.delta);
    }

    #[test]
    fn selfnorm_cumulant_scaling_bounded() {
        // |gamma_j(W_n)| sigma^{j-2} bounded over the sweep
        let spec = iid_pm1();
        // per-step kappa_6 = 16 for the fair coin, so the bound sits at 16
        let mut worst: f64 = 0.0;
        for &n in &[64usize, 256, 1024] {
            let cum = exact_cumulants(&spec, n, 6).unwrap().to_selfnormalized();
            for j in 3..=6 {
                worst = worst.max(cum.gamma(j).abs() * cum.sigma_n().powi(j as i32 - 2));
            }
        }
        assert!(worst < 16.5, "unbounded scaling: {worst}");
    }
}
