//! Edgeworth expansions for sums of weakly dependent random variables.
//!
//! The crate builds the correction polynomials of higher-order central limit
//! expansions in three normalizations (self-normalized, stationary, and
//! `sqrt(n)`-normalized), computes the required cumulant inputs exactly for
//! finite-state Markov chain models through tilted transfer matrices, and
//! provides the distribution-function distances (Kolmogorov, weighted sup,
//! `L^p`, transport) that the corresponding error bounds are stated in,
//! plus Monte Carlo generators for model classes where exact computation is
//! unavailable.

pub mod chainfile;
pub mod dist;
pub mod error;
pub mod markov;
pub mod models;
pub mod expansion;
pub mod invert;
pub mod normal;
pub mod poly;
pub mod quad;
pub mod series;
pub mod sim;
pub mod study;

pub use expansion::{
    affine_recompose, evaluate_expansion, selfnorm_polynomials, sqrtn_polynomials,
    stationary_polynomials, CumulantVector, ExpansionPolynomials, NormalizationPair,
    StationaryCoefficients, Subject,
};
pub use poly::{hermite, Polynomial};
pub use series::{series_compose_gaussian_shift, series_mul, EpsilonRole, TruncatedSeries};
