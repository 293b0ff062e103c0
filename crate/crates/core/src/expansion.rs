//! Edgeworth correction polynomials in three normalizations and evaluation
//! of the resulting generalized distribution functions.
//!
//! The generalized distribution function of order `r` is
//!
//! ```text
//! Psi_r(x) = Phi(x) + phi(x) * sum_{j=1..r} B_n^{-j} H_j(x)
//! ```
//!
//! All constructors fold signs so that evaluation always uses the `+` above;
//! the conventional expansion literature subtracts the corrections, and
//! [`ExpansionPolynomials::edgeworth_term`] returns that subtracted-form
//! polynomial for comparison against hand calculations.

use crate::error::ExpansionError;
use crate::normal;
use crate::poly::{hermite, Polynomial};
use crate::series::{series_compose_gaussian_shift, series_mul, EpsilonRole, TruncatedSeries};

/// Which random variable a cumulant vector describes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subject {
    /// The raw partial sum `S_n`.
    SumSn,
    /// The self-normalized `W_n = S_n / sigma_n`.
    SelfNormWn,
}

/// Cumulants `gamma_1..gamma_jmax` together with the L2 norm of the sum.
#[derive(Clone, Debug)]
pub struct CumulantVector {
    gamma: Vec<f64>,
    subject: Subject,
    sigma_n: f64,
}

impl CumulantVector {
    pub fn new(gamma: Vec<f64>, subject: Subject, sigma_n: f64) -> Self {
        CumulantVector { gamma, subject, sigma_n }
    }

    pub fn subject(&self) -> Subject {
        self.subject
    }

    pub fn sigma_n(&self) -> f64 {
        self.sigma_n
    }

    pub fn j_max(&self) -> usize {
        self.gamma.len()
    }

    /// `gamma_j`, 1-based.
    pub fn gamma(&self, j: usize) -> f64 {
        assert!(j >= 1 && j <= self.gamma.len(), "cumulant index out of range");
        self.gamma[j - 1]
    }

    /// Rescale to the cumulants of `W_n = S_n / sigma_n`
    /// (`gamma_j(W_n) = gamma_j(S_n) sigma_n^{-j}`).
    pub fn to_selfnormalized(&self) -> CumulantVector {
        match self.subject {
            Subject::SelfNormWn => self.clone(),
            Subject::SumSn => CumulantVector {
                gamma: self
                    .gamma
                    .iter()
                    .enumerate()
                    .map(|(i, &g)| g * self.sigma_n.powi(-(i as i32 + 1)))
                    .collect(),
                subject: Subject::SelfNormWn,
                sigma_n: self.sigma_n,
            },
        }
    }

    /// Reduced cumulants `c_j = gamma_{j+2}(S_n) / sigma_n^2`, the natural
    /// inputs of [`selfnorm_polynomials`].
    pub fn reduced(&self) -> Vec<f64> {
        let jm = self.j_max();
        let mut out = Vec::new();
        for j in 1..=jm.saturating_sub(2) {
            let c = match self.subject {
                Subject::SumSn => self.gamma(j + 2) / (self.sigma_n * self.sigma_n),
                // gamma_{j+2}(S) / sigma^2 = gamma_{j+2}(W) * sigma^j
                Subject::SelfNormWn => self.gamma(j + 2) * self.sigma_n.powi(j as i32),
            };
            out.push(c);
        }
        out
    }
}

/// Centering `A_n` and scaling `B_n` of `W_n = (S_n - A_n)/B_n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormalizationPair {
    pub a_n: f64,
    pub b_n: f64,
    pub sigma_n: f64,
}

impl NormalizationPair {
    pub fn self_normalized(sigma_n: f64) -> Self {
        NormalizationPair { a_n: 0.0, b_n: sigma_n, sigma_n }
    }

    /// `a_n = B_n / sigma_n` reduction factor.
    pub fn scale_ratio(&self) -> f64 {
        self.b_n / self.sigma_n
    }

    /// `v_n = A_n / sigma_n` reduced shift.
    pub fn reduced_shift(&self) -> f64 {
        self.a_n / self.sigma_n
    }
}

/// Asymptotic cumulant coefficients of a weakly stationary family:
/// `gamma_k(S_n) = n p_k + q_k + O(delta^n)`, plus the limit `c` of the
/// centering sequence. `delta` is diagnostic metadata only.
#[derive(Clone, Debug)]
pub struct StationaryCoefficients {
    /// `p_2, p_3, ...`
    p: Vec<f64>,
    /// `q_2, q_3, ...`
    q: Vec<f64>,
    pub c: f64,
    pub delta: f64,
}

impl StationaryCoefficients {
    pub fn new(p: Vec<f64>, q: Vec<f64>, c: f64, delta: f64) -> Self {
        assert_eq!(p.len(), q.len(), "p and q must cover the same orders");
        StationaryCoefficients { p, q, c, delta }
    }

    pub fn k_max(&self) -> usize {
        self.p.len() + 1
    }

    /// `p_k`, defined for `2 <= k`; zero beyond the stored range.
    pub fn p(&self, k: usize) -> f64 {
        assert!(k >= 2);
        self.p.get(k - 2).copied().unwrap_or(0.0)
    }

    pub fn q(&self, k: usize) -> f64 {
        assert!(k >= 2);
        self.q.get(k - 2).copied().unwrap_or(0.0)
    }

    /// `alpha_j = q_{j+2} - q_2 p_{j+2} / p_2`.
    pub fn alpha(&self, j: usize) -> f64 {
        self.q(j + 2) - self.q(2) * self.p(j + 2) / self.p(2)
    }

    /// `beta_j = p_{j+2} / p_2`.
    pub fn beta(&self, j: usize) -> f64 {
        self.p(j + 2) / self.p(2)
    }
}

/// Ordered correction polynomials `H_1..H_r`, stored in the additive
/// convention (see module docs), plus the normalization they evaluate under.
#[derive(Clone, Debug)]
pub struct ExpansionPolynomials {
    polys: Vec<Polynomial>,
    normalization: NormalizationPair,
}

impl ExpansionPolynomials {
    pub fn from_corrections(polys: Vec<Polynomial>, normalization: NormalizationPair) -> Self {
        ExpansionPolynomials { polys, normalization }
    }

    pub fn order(&self) -> usize {
        self.polys.len()
    }

    pub fn normalization(&self) -> NormalizationPair {
        self.normalization
    }

    pub fn with_normalization(mut self, normalization: NormalizationPair) -> Self {
        self.normalization = normalization;
        self
    }

    /// The stored polynomial multiplying `phi(x) B_n^{-j}` with a plus sign.
    pub fn correction(&self, j: usize) -> &Polynomial {
        assert!(j >= 1 && j <= self.polys.len(), "correction index out of range");
        &self.polys[j - 1]
    }

    /// The subtracted-convention polynomial (`Psi = Phi - phi sum B^{-j} * this`),
    /// matching the classical tables.
    pub fn edgeworth_term(&self, j: usize) -> Polynomial {
        self.correction(j).neg()
    }

    /// Truncate to a lower order.
    pub fn truncated(&self, r: usize) -> ExpansionPolynomials {
        ExpansionPolynomials {
            polys: self.polys.iter().take(r).cloned().collect(),
            normalization: self.normalization,
        }
    }

    /// Largest polynomial degree among the corrections.
    pub fn max_degree(&self) -> usize {
        self.polys.iter().filter_map(|p| p.degree()).max().unwrap_or(0)
    }

    /// Envelope constant: `|Psi_r(x) - 1_{x>0}| <= amp * (1+|x|)^deg * phi(x)`
    /// for `|x| >= 1`, used by tail models downstream.
    pub fn envelope(&self, r: usize) -> (f64, usize) {
        let mut amp = 1.0; // |Phi(x) - 1_{x>0}| <= phi(x)/|x| <= phi(x) for |x| >= 1
        let mut deg = 0usize;
        for j in 1..=r.min(self.order()) {
            amp += self.normalization.b_n.powi(-(j as i32)).abs() * self.correction(j).abs_coeff_sum();
            deg = deg.max(self.correction(j).degree().unwrap_or(0));
        }
        (amp, deg)
    }
}

/// All tuples `(k_1..k_s)` of nonnegative integers with `sum_l l*k_l = j` and
/// `k_s != 0`, in lexicographic order of the full `j`-length vector.
fn tuples_with_weight(j: usize) -> Vec<Vec<usize>> {
    fn descend(remaining: usize, l: usize, max_l: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if remaining == 0 {
            let mut tuple = current.clone();
            while matches!(tuple.last(), Some(0)) {
                tuple.pop();
            }
            if !tuple.is_empty() {
                out.push(tuple);
            }
            return;
        }
        if l > max_l {
            return;
        }
        for k in 0..=remaining / l {
            current.push(k);
            descend(remaining - l * k, l + 1, max_l, current, out);
            current.pop();
        }
    }
    let mut out = Vec::new();
    descend(j, 1, j.max(1), &mut Vec::new(), &mut out);
    out
}

/// `C_kbar = prod_l 1 / (k_l! ((l+2)!)^{k_l})` and `k = sum_l (l+2) k_l`.
fn tuple_constant_and_index(tuple: &[usize]) -> (f64, usize) {
    let mut c = 1.0f64;
    let mut k = 0usize;
    for (i, &kl) in tuple.iter().enumerate() {
        let l = i + 1;
        let mut fact_kl = 1.0f64;
        for t in 2..=kl {
            fact_kl *= t as f64;
        }
        let mut fact_l2 = 1.0f64;
        for t in 2..=(l + 2) {
            fact_l2 *= t as f64;
        }
        c /= fact_kl * fact_l2.powi(kl as i32);
        k += (l + 2) * kl;
    }
    (c, k)
}

/// Self-normalized expansion polynomials from the reduced cumulants
/// `c_j = gamma_{j+2}(S_n) / sigma_n^2`.
///
/// For each order `j` the subtracted-convention polynomial is
/// `sum over tuples with weight j of C_kbar * prod c_l^{k_l} * H_{k-1}`;
/// the returned structure stores the sign-folded corrections. The default
/// normalization is `A_n = 0`, `B_n = sigma_n = 1`; attach the actual scaling
/// with [`ExpansionPolynomials::with_normalization`].
pub fn selfnorm_polynomials(reduced: &[f64], r: usize) -> Result<ExpansionPolynomials, ExpansionError> {
    if r < 1 {
        return Err(ExpansionError::OrderTooSmall(r));
    }
    if reduced.len() < r {
        return Err(ExpansionError::MissingCumulants { need: r, got: reduced.len() });
    }
    let mut polys = Vec::with_capacity(r);
    for j in 1..=r {
        let mut bold = Polynomial::zero();
        for tuple in tuples_with_weight(j) {
            let (c_const, k) = tuple_constant_and_index(&tuple);
            let mut weight = c_const;
            for (i, &kl) in tuple.iter().enumerate() {
                weight *= reduced[i].powi(kl as i32);
            }
            if weight != 0.0 {
                bold = bold.add(&hermite(k - 1)?.scale(weight));
            }
        }
        polys.push(bold.neg());
    }
    Ok(ExpansionPolynomials::from_corrections(
        polys,
        NormalizationPair::self_normalized(1.0),
    ))
}

/// Scalar truncated series helper: `(beta + alpha eps^2)^k` up to `order`.
fn bracket_power(alpha: f64, beta: f64, k: usize, order: usize) -> Vec<f64> {
    let mut acc = vec![0.0; order + 1];
    acc[0] = 1.0;
    for _ in 0..k {
        let mut next = vec![0.0; order + 1];
        for (i, &a) in acc.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            if i <= order {
                next[i] += a * beta;
            }
            if i + 2 <= order {
                next[i + 2] += a * alpha;
            }
        }
        acc = next;
    }
    acc
}

/// Stationary (n-independent) expansion polynomials from asymptotic cumulant
/// coefficients, for the self-normalized scaling `B_n = sigma_n`.
///
/// Writes `gamma_{j+2}(S_n)/sigma_n^2 = alpha_j sigma_n^{-2} + beta_j`,
/// expands every bracket product as a truncated series in `1/sigma_n`,
/// collects powers and discards anything beyond `m - 2`.
pub fn stationary_polynomials(
    coeffs: &StationaryCoefficients,
    r: usize,
    m: usize,
) -> Result<ExpansionPolynomials, ExpansionError> {
    if coeffs.p(2) <= 0.0 {
        return Err(ExpansionError::DegenerateVariance(coeffs.p(2)));
    }
    if r < 1 {
        return Err(ExpansionError::OrderTooSmall(r));
    }
    if m < 2 || r > m - 2 {
        return Err(ExpansionError::OrderBeyondTarget { r, max: m.saturating_sub(2) });
    }
    let order = m - 2;
    let mut bold = vec![Polynomial::zero(); order + 1];
    for j in 1..=order {
        for tuple in tuples_with_weight(j) {
            let (c_const, k) = tuple_constant_and_index(&tuple);
            // prod_l (beta_l + alpha_l eps^2)^{k_l}, truncated at eps^{order-j}
            let mut series = vec![0.0; order - j + 1];
            series[0] = c_const;
            for (i, &kl) in tuple.iter().enumerate() {
                if kl == 0 {
                    continue;
                }
                let factor = bracket_power(coeffs.alpha(i + 1), coeffs.beta(i + 1), kl, order - j);
                let mut next = vec![0.0; order - j + 1];
                for (a, &sa) in series.iter().enumerate() {
                    if sa == 0.0 {
                        continue;
                    }
                    for (b, &fb) in factor.iter().enumerate() {
                        if a + b <= order - j {
                            next[a + b] += sa * fb;
                        }
                    }
                }
                series = next;
            }
            let hk = hermite(k - 1)?;
            for (u, &coef) in series.iter().enumerate() {
                if coef != 0.0 && j + u <= order {
                    bold[j + u] = bold[j + u].add(&hk.scale(coef));
                }
            }
        }
    }
    let polys: Vec<Polynomial> = bold.into_iter().skip(1).take(r).map(|p| p.neg()).collect();
    Ok(ExpansionPolynomials::from_corrections(
        polys,
        NormalizationPair::self_normalized(1.0),
    ))
}

/// Generalized binomial coefficient `binom(a, i)` for real `a`.
fn binom_real(a: f64, i: usize) -> f64 {
    let mut num = 1.0;
    for t in 0..i {
        num *= a - t as f64;
    }
    let mut den = 1.0;
    for t in 2..=i {
        den *= t as f64;
    }
    num / den
}

/// Series of `sigma_n^{-k}` in `eps = n^{-1/2}`, from `sigma_n^2 = p_2 n + q_2`:
/// coefficient of `eps^{k+2i}` is `p_2^{-k/2} binom(-k/2, i) (q_2/p_2)^i`.
fn sigma_inverse_power_series(coeffs: &StationaryCoefficients, k: usize, order: usize) -> Vec<f64> {
    let p2 = coeffs.p(2);
    let ratio = coeffs.q(2) / p2;
    let lead = p2.powf(-(k as f64) / 2.0);
    let mut out = vec![0.0; order + 1];
    let mut i = 0;
    while k + 2 * i <= order {
        out[k + 2 * i] = lead * binom_real(-(k as f64) / 2.0, i) * ratio.powi(i as i32);
        i += 1;
    }
    out
}

/// Expansion polynomials for the `sqrt(n)` normalization
/// `W_n = (S_n - A_n) / sqrt(p_2 n)` with `A_n -> c`.
///
/// Built by (i) re-expanding each `sigma_n^{-j}` of the stationary expansion
/// in powers of `n^{-1/2}`, then (ii) recomposing under the affine argument
/// change through [`affine_recompose`], with the shift
/// `eta_1 = x (rho_n - 1) + c / sigma_n`, `rho_n = sqrt(p_2 n) / sigma_n`.
pub fn sqrtn_polynomials(
    coeffs: &StationaryCoefficients,
    r: usize,
    m: usize,
) -> Result<ExpansionPolynomials, ExpansionError> {
    if coeffs.p(2) <= 0.0 {
        return Err(ExpansionError::DegenerateVariance(coeffs.p(2)));
    }
    if r < 1 {
        return Err(ExpansionError::OrderTooSmall(r));
    }
    if m < 2 || r > m - 2 {
        return Err(ExpansionError::OrderBeyondTarget { r, max: m.saturating_sub(2) });
    }
    let order = m - 2;
    let stat = stationary_polynomials(coeffs, order, m)?;

    // Lemma-L step: corrections of Phi-check in powers of n^{-1/2}
    let mut tilde = vec![Polynomial::zero(); order + 1];
    for j in 1..=order {
        let sub = sigma_inverse_power_series(coeffs, j, order);
        for (t, &coef) in sub.iter().enumerate() {
            if coef != 0.0 {
                tilde[t] = tilde[t].add(&stat.correction(j).scale(coef));
            }
        }
    }
    let tilde_polys = ExpansionPolynomials::from_corrections(
        tilde.into_iter().skip(1).collect(),
        NormalizationPair::self_normalized(1.0),
    );

    // rho_n - 1 = (1 + (q_2/p_2) eps^2)^{-1/2} - 1, even powers only
    let ratio = coeffs.q(2) / coeffs.p(2);
    let mut u_terms = vec![Polynomial::zero(); order + 1];
    let mut i = 1usize;
    while 2 * i <= order {
        u_terms[2 * i] = Polynomial::constant(binom_real(-0.5, i) * ratio.powi(i as i32));
        i += 1;
    }
    let u_series = TruncatedSeries::new(u_terms, order, EpsilonRole::InvSqrtN);

    // c / sigma_n in powers of eps
    let shift = sigma_inverse_power_series(coeffs, 1, order);
    let v_terms = shift
        .iter()
        .map(|&s| {
            if s == 0.0 {
                Polynomial::zero()
            } else {
                Polynomial::constant(coeffs.c * s)
            }
        })
        .collect();
    let v_series = TruncatedSeries::new(v_terms, order, EpsilonRole::InvSqrtN);

    let out = affine_recompose(&tilde_polys, &u_series, &v_series, m)?;
    Ok(out.truncated(r))
}

/// Taylor shift of a polynomial by a series with zero constant term:
/// `p(x + eta) = sum_d p^(d)(x)/d! * eta^d` as a truncated series.
fn taylor_shift_series(p: &Polynomial, eta: &TruncatedSeries) -> Result<TruncatedSeries, ExpansionError> {
    let order = eta.order();
    let role = eta.role();
    let mut result = TruncatedSeries::monomial(p.clone(), 0, order, role);
    let mut deriv = p.clone();
    let mut eta_pow = TruncatedSeries::one(order, role);
    let mut factorial = 1.0f64;
    let mut d = 1usize;
    loop {
        deriv = deriv.derivative();
        if deriv.is_zero() || d > order {
            break;
        }
        eta_pow = series_mul(&eta_pow, eta)?;
        if eta_pow.is_zero() {
            break;
        }
        factorial *= d as f64;
        result = result.add(&eta_pow.scale_poly(&deriv.scale(1.0 / factorial)))?;
        d += 1;
    }
    Ok(result)
}

/// Re-expansion of `Psi(a_n x + v_n)` as an expansion in the original
/// variable, for reduction sequences `u_n = a_n - 1` and `v_n` that are both
/// `O(eps)` (zero constant term as series).
///
/// Degrees grow by at most `m` relative to the inputs.
pub fn affine_recompose(
    polys: &ExpansionPolynomials,
    u_series: &TruncatedSeries,
    v_series: &TruncatedSeries,
    m: usize,
) -> Result<ExpansionPolynomials, ExpansionError> {
    if !u_series.term(0).is_zero() || !v_series.term(0).is_zero() {
        return Err(ExpansionError::Series(crate::error::SeriesError::NonzeroConstantTerm {
            constant: "u or v".into(),
        }));
    }
    let order = m.saturating_sub(2);
    let role = u_series.role();
    if v_series.role() != role {
        return Err(ExpansionError::Series(crate::error::SeriesError::RoleMismatch {
            left: role,
            right: v_series.role(),
        }));
    }
    let u = u_series.truncated(order);
    let v = v_series.truncated(order);
    let eta = u.scale_poly(&Polynomial::x()).add(&v)?;
    let (phi_factor, big_phi) = series_compose_gaussian_shift(&eta, order.max(1))?;

    // sum_j eps^j * H_j(x + eta)
    let mut shifted_sum = TruncatedSeries::zero(order, role);
    for j in 1..=polys.order().min(order) {
        let shifted = taylor_shift_series(polys.correction(j), &eta)?;
        let lifted = series_mul(
            &shifted,
            &TruncatedSeries::monomial(Polynomial::one(), j, order, role),
        )?;
        shifted_sum = shifted_sum.add(&lifted)?;
    }

    // Psi(x+eta) = Phi(x) + phi(x) [ Q_{>=1} + P * sum ]
    let mut q_tail = big_phi.clone();
    let q0 = q_tail.term(0);
    q_tail = q_tail.sub(&TruncatedSeries::monomial(q0, 0, order, role))?;
    let total = q_tail.add(&series_mul(&phi_factor, &shifted_sum)?)?;

    let max_deg_in = polys.max_degree();
    let out: Vec<Polynomial> = (1..=order).map(|t| total.term(t)).collect();
    for p in &out {
        debug_assert!(p.degree().unwrap_or(0) <= max_deg_in + m + 1, "degree bookkeeping violated");
    }
    Ok(ExpansionPolynomials::from_corrections(out, polys.normalization()))
}

/// Evaluate `Psi_{r,n}(x) = Phi(x) + phi(x) sum_{j<=r} B_n^{-j} H_j(x)`.
pub fn evaluate_expansion(polys: &ExpansionPolynomials, r: usize, x: f64) -> f64 {
    assert!(r <= polys.order(), "evaluation order exceeds available polynomials");
    let b_n = polys.normalization().b_n;
    let mut corr = 0.0;
    for j in 1..=r {
        corr += b_n.powi(-(j as i32)) * polys.correction(j).eval(x);
    }
    normal::cdf(x) + normal::pdf(x) * corr
}

/// Density (derivative) of the generalized distribution function:
/// `psi_r'(x) = phi(x) (1 + sum_j B_n^{-j} (H_j'(x) - x H_j(x)))`.
pub fn evaluate_expansion_density(polys: &ExpansionPolynomials, r: usize, x: f64) -> f64 {
    assert!(r <= polys.order(), "evaluation order exceeds available polynomials");
    let b_n = polys.normalization().b_n;
    let mut corr = 0.0;
    for j in 1..=r {
        let h = polys.correction(j);
        corr += b_n.powi(-(j as i32)) * (h.derivative().eval(x) - x * h.eval(x));
    }
    normal::pdf(x) * (1.0 + corr)
}
