//! Formal power series in a small parameter, truncated at a fixed order,
//! with polynomial coefficients.
//!
//! These carry the re-expansions of `sigma_n^{-r}` in powers of `n^{-1/2}`
//! and the Taylor shifts of `Phi`, `phi` and the correction polynomials under
//! affine renormalizations. The expansion variable is tracked as a label so
//! that series built against different normalizations cannot be mixed.

use crate::error::SeriesError;
use crate::poly::{hermite, Polynomial};

/// What the expansion parameter epsilon stands for.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EpsilonRole {
    /// `1/B_n`
    InvBn,
    /// `n^{-1/2}`
    InvSqrtN,
    /// `1/sigma_n`
    InvSigmaN,
}

/// `sum_k terms[k] * eps^k`, truncated beyond `order`.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedSeries {
    terms: Vec<Polynomial>,
    order: usize,
    role: EpsilonRole,
}

impl TruncatedSeries {
    pub fn new(terms: Vec<Polynomial>, order: usize, role: EpsilonRole) -> Self {
        let mut terms = terms;
        terms.truncate(order + 1);
        while matches!(terms.last(), Some(p) if p.is_zero()) {
            terms.pop();
        }
        TruncatedSeries { terms, order, role }
    }

    pub fn zero(order: usize, role: EpsilonRole) -> Self {
        TruncatedSeries { terms: Vec::new(), order, role }
    }

    pub fn one(order: usize, role: EpsilonRole) -> Self {
        TruncatedSeries::new(vec![Polynomial::one()], order, role)
    }

    /// Series with a single monomial `poly * eps^k`.
    pub fn monomial(poly: Polynomial, k: usize, order: usize, role: EpsilonRole) -> Self {
        let mut terms = vec![Polynomial::zero(); k + 1];
        terms[k] = poly;
        TruncatedSeries::new(terms, order, role)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn role(&self) -> EpsilonRole {
        self.role
    }

    /// Coefficient polynomial of `eps^k` (zero beyond stored terms).
    pub fn term(&self, k: usize) -> Polynomial {
        self.terms.get(k).cloned().unwrap_or_else(Polynomial::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn check_compatible(&self, other: &TruncatedSeries) -> Result<(), SeriesError> {
        if self.order != other.order {
            return Err(SeriesError::OrderMismatch { left: self.order, right: other.order });
        }
        if self.role != other.role {
            return Err(SeriesError::RoleMismatch { left: self.role, right: other.role });
        }
        Ok(())
    }

    pub fn add(&self, other: &TruncatedSeries) -> Result<TruncatedSeries, SeriesError> {
        self.check_compatible(other)?;
        let n = self.terms.len().max(other.terms.len());
        let terms = (0..n).map(|k| self.term(k).add(&other.term(k))).collect();
        Ok(TruncatedSeries::new(terms, self.order, self.role))
    }

    pub fn sub(&self, other: &TruncatedSeries) -> Result<TruncatedSeries, SeriesError> {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> TruncatedSeries {
        TruncatedSeries::new(self.terms.iter().map(|p| p.scale(s)).collect(), self.order, self.role)
    }

    pub fn scale_poly(&self, p: &Polynomial) -> TruncatedSeries {
        TruncatedSeries::new(self.terms.iter().map(|t| t.mul(p)).collect(), self.order, self.role)
    }

    /// Drop to a lower truncation order.
    pub fn truncated(&self, order: usize) -> TruncatedSeries {
        TruncatedSeries::new(self.terms.clone(), order.min(self.order), self.role)
    }

    pub fn pow(&self, k: usize) -> Result<TruncatedSeries, SeriesError> {
        let mut acc = TruncatedSeries::one(self.order, self.role);
        for _ in 0..k {
            acc = series_mul(&acc, self)?;
        }
        Ok(acc)
    }
}

/// Cauchy product truncated at the common order.
pub fn series_mul(a: &TruncatedSeries, b: &TruncatedSeries) -> Result<TruncatedSeries, SeriesError> {
    a.check_compatible(b)?;
    let order = a.order();
    let mut terms = vec![Polynomial::zero(); order + 1];
    for (i, pa) in a.terms.iter().enumerate() {
        if pa.is_zero() {
            continue;
        }
        for (j, pb) in b.terms.iter().enumerate() {
            if i + j > order {
                break;
            }
            if pb.is_zero() {
                continue;
            }
            terms[i + j] = terms[i + j].add(&pa.mul(pb));
        }
    }
    Ok(TruncatedSeries::new(terms, order, a.role()))
}

/// Taylor-expand `Phi(x + eta)` and `phi(x + eta)` around `x` for a shift
/// `eta` that is itself a truncated series with zero constant term.
///
/// Returns `(phi_series, big_phi_series)` where, writing `Q_k`, `P_k` for the
/// coefficient polynomials,
///
/// * `phi(x + eta) = phi(x) * sum_k P_k(x) eps^k` with `P_0 = 1`,
/// * `Phi(x + eta) = Phi(x) + phi(x) * sum_{k>=1} Q_k(x) eps^k`, and the
///   stored order-0 term of the Phi series is the constant 1 carrying the
///   unshifted `Phi(x)`.
///
/// Both follow from `phi^(k)(x) = (-1)^k H_k(x) phi(x)`; `s_max` caps the
/// number of Taylor terms (any `s_max >= order` is exact to truncation since
/// `eta = O(eps)`).
pub fn series_compose_gaussian_shift(
    eta: &TruncatedSeries,
    s_max: usize,
) -> Result<(TruncatedSeries, TruncatedSeries), SeriesError> {
    if s_max < 1 {
        return Err(SeriesError::Contract("s_max must be at least 1".into()));
    }
    if !eta.term(0).is_zero() {
        return Err(SeriesError::NonzeroConstantTerm {
            constant: format!("{:?}", eta.term(0)),
        });
    }
    let order = eta.order();
    let role = eta.role();
    let mut phi_series = TruncatedSeries::one(order, role);
    let mut big_phi = TruncatedSeries::one(order, role);
    let mut eta_pow = TruncatedSeries::one(order, role);
    let mut factorial = 1.0f64;
    for k in 1..=s_max.min(order) {
        eta_pow = series_mul(&eta_pow, eta)?;
        factorial *= k as f64;
        if eta_pow.is_zero() {
            break;
        }
        let hk = hermite(k).map_err(|e| SeriesError::Contract(e.to_string()))?;
        let hk_minus_1 = hermite(k - 1).map_err(|e| SeriesError::Contract(e.to_string()))?;
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        // phi(x+eta): term (-1)^k H_k(x) / k! * eta^k
        phi_series = phi_series.add(&eta_pow.scale_poly(&hk.scale(sign / factorial)))?;
        // Phi(x+eta): term (-1)^{k-1} H_{k-1}(x) / k! * eta^k
        big_phi = big_phi.add(&eta_pow.scale_poly(&hk_minus_1.scale(-sign / factorial)))?;
    }
    Ok((phi_series, big_phi))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(v: f64) -> Polynomial {
        Polynomial::constant(v)
    }

    #[test]
    fn difference_of_squares() {
        // (1 + x eps)(1 - x eps) at order 2 = 1 - x^2 eps^2
        let a = TruncatedSeries::new(vec![c(1.0), Polynomial::x()], 2, EpsilonRole::InvBn);
        let b = TruncatedSeries::new(vec![c(1.0), Polynomial::x().scale(-1.0)], 2, EpsilonRole::InvBn);
        let prod = series_mul(&a, &b).unwrap();
        assert_eq!(prod.term(0), c(1.0));
        assert!(prod.term(1).is_zero());
        assert_eq!(prod.term(2), Polynomial::x().mul(&Polynomial::x()).scale(-1.0));
    }

    #[test]
    fn multiplicative_identity() {
        let a = TruncatedSeries::new(vec![c(2.0), Polynomial::x(), c(-0.5)], 5, EpsilonRole::InvSqrtN);
        let one = TruncatedSeries::one(5, EpsilonRole::InvSqrtN);
        assert_eq!(series_mul(&a, &one).unwrap(), a);
    }

    #[test]
    fn binomial_cube_truncated() {
        // (1+eps)^3 at order 2 = 1 + 3 eps + 3 eps^2
        let base = TruncatedSeries::new(vec![c(1.0), c(1.0)], 2, EpsilonRole::InvBn);
        let cube = base.pow(3).unwrap();
        assert_eq!(cube.term(0), c(1.0));
        assert_eq!(cube.term(1), c(3.0));
        assert_eq!(cube.term(2), c(3.0));
    }

    #[test]
    fn mismatched_contract_rejected() {
        let a = TruncatedSeries::one(2, EpsilonRole::InvBn);
        let b = TruncatedSeries::one(3, EpsilonRole::InvBn);
        assert!(matches!(series_mul(&a, &b), Err(SeriesError::OrderMismatch { .. })));
        let d = TruncatedSeries::one(2, EpsilonRole::InvSqrtN);
        assert!(matches!(series_mul(&a, &d), Err(SeriesError::RoleMismatch { .. })));
    }

    #[test]
    fn gaussian_shift_identity() {
        let eta = TruncatedSeries::zero(3, EpsilonRole::InvBn);
        let (phi_s, big_s) = series_compose_gaussian_shift(&eta, 4).unwrap();
        assert_eq!(phi_s, TruncatedSeries::one(3, EpsilonRole::InvBn));
        // only the order-0 carry-through term survives
        assert_eq!(big_s.term(0), c(1.0));
        for k in 1..=3 {
            assert!(big_s.term(k).is_zero());
        }
    }

    #[test]
    fn gaussian_shift_first_and_second_order() {
        // eta = c eps: Phi-series order 1 is the constant c, order 2 is -(c^2/2) x
        let shift = 0.7;
        let eta = TruncatedSeries::monomial(c(shift), 1, 3, EpsilonRole::InvBn);
        let (phi_s, big_s) = series_compose_gaussian_shift(&eta, 4).unwrap();
        assert_eq!(big_s.term(1), c(shift));
        assert_eq!(big_s.term(2), Polynomial::x().scale(-shift * shift / 2.0));
        // phi factor: 1 - x c eps + ...
        assert_eq!(phi_s.term(1), Polynomial::x().scale(-shift));
    }

    #[test]
    fn nonzero_constant_term_rejected() {
        let eta = TruncatedSeries::new(vec![c(0.1)], 2, EpsilonRole::InvBn);
        assert!(matches!(
            series_compose_gaussian_shift(&eta, 2),
            Err(SeriesError::NonzeroConstantTerm { .. })
        ));
    }
}
