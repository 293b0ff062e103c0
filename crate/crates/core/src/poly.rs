//! Dense univariate polynomials over f64 and the probabilists' Hermite family.
//!
//! The canonical form keeps no trailing zero coefficient; the zero polynomial
//! is the empty coefficient list, so structural equality is meaningful.

use std::fmt;
use std::sync::Mutex;

use crate::error::PolyError;

/// Largest Hermite index we hand out. Coefficients of H_k grow like k!!, and
/// past this point double precision loses the low-order coefficients entirely;
/// nothing in this crate needs degrees anywhere near it.
pub const MAX_HERMITE: usize = 64;

/// Dense real-coefficient polynomial, `coeffs[i]` multiplying `x^i`.
#[derive(Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn zero() -> Self {
        Polynomial { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Polynomial::constant(1.0)
    }

    pub fn x() -> Self {
        Polynomial { coeffs: vec![0.0, 1.0] }
    }

    pub fn constant(c: f64) -> Self {
        Polynomial::from_coeffs(vec![c])
    }

    pub fn from_coeffs(coeffs: Vec<f64>) -> Self {
        let mut p = Polynomial { coeffs };
        p.normalize();
        p
    }

    fn normalize(&mut self) {
        while matches!(self.coeffs.last(), Some(&c) if c == 0.0) {
            self.coeffs.pop();
        }
        // canonical zero, not negative zero
        for c in &mut self.coeffs {
            if *c == 0.0 {
                *c = 0.0;
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Coefficient of `x^i` (zero beyond the stored length).
    pub fn coeff(&self, i: usize) -> f64 {
        self.coeffs.get(i).copied().unwrap_or(0.0)
    }

    /// Horner evaluation.
    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = vec![0.0; n];
        for (i, slot) in out.iter_mut().enumerate() {
            *slot = self.coeff(i) + other.coeff(i);
        }
        Polynomial::from_coeffs(out)
    }

    pub fn sub(&self, other: &Polynomial) -> Polynomial {
        self.add(&other.scale(-1.0))
    }

    pub fn neg(&self) -> Polynomial {
        self.scale(-1.0)
    }

    pub fn scale(&self, s: f64) -> Polynomial {
        Polynomial::from_coeffs(self.coeffs.iter().map(|&c| c * s).collect())
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        if self.is_zero() || other.is_zero() {
            return Polynomial::zero();
        }
        let mut out = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::from_coeffs(out)
    }

    pub fn derivative(&self) -> Polynomial {
        if self.coeffs.len() <= 1 {
            return Polynomial::zero();
        }
        Polynomial::from_coeffs(
            self.coeffs[1..]
                .iter()
                .enumerate()
                .map(|(i, &c)| c * (i as f64 + 1.0))
                .collect(),
        )
    }

    /// Sum of absolute coefficient values; a crude but useful envelope bound
    /// `|p(x)| <= max_abs_coeff_sum * max(1, |x|)^deg`.
    pub fn abs_coeff_sum(&self) -> f64 {
        self.coeffs.iter().map(|c| c.abs()).sum()
    }

    /// Maximum absolute coefficient difference against `other`.
    pub fn max_coeff_distance(&self, other: &Polynomial) -> f64 {
        let n = self.coeffs.len().max(other.coeffs.len());
        (0..n)
            .map(|i| (self.coeff(i) - other.coeff(i)).abs())
            .fold(0.0, f64::max)
    }
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, &c) in self.coeffs.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match i {
                0 => write!(f, "{c}")?,
                1 => write!(f, "{c}*x")?,
                _ => write!(f, "{c}*x^{i}")?,
            }
        }
        Ok(())
    }
}

/// Probabilists' Hermite polynomial `H_k`, defined by
/// `(-1)^k H_k(x) phi(x) = phi^(k)(x)` and built here through the recurrence
/// `H_{k+1}(x) = x H_k(x) - k H_{k-1}(x)`.
///
/// Results are memoized; indices above [`MAX_HERMITE`] are rejected because
/// the coefficient range exceeds what f64 arithmetic can hold faithfully.
pub fn hermite(k: usize) -> Result<Polynomial, PolyError> {
    if k > MAX_HERMITE {
        return Err(PolyError::HermiteDegreeOverflow { requested: k, max: MAX_HERMITE });
    }
    static CACHE: Mutex<Vec<Polynomial>> = Mutex::new(Vec::new());
    let mut cache = CACHE.lock().unwrap();
    if cache.is_empty() {
        cache.push(Polynomial::one());
        cache.push(Polynomial::x());
    }
    while cache.len() <= k {
        let j = cache.len() - 1;
        let next = Polynomial::x()
            .mul(&cache[j])
            .sub(&cache[j - 1].scale(j as f64));
        cache.push(next);
    }
    Ok(cache[k].clone())
}
