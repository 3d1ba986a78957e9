//! Arbitrary-precision complex numbers, exact rational matrices and sparse
//! polynomial containers.

pub mod complex;
pub mod poly;
pub mod rational;
pub mod univariate;

pub use complex::{pi, pow2, PrecisionComplex, DEFAULT_PREC, MIN_PREC};
pub use poly::{
    GaussianBivariatePoly, GaussianQuadruplePoly, IntegerBivariatePoly, RealJet, RealQuadruplePoly,
    RealRing, Ring, SparsePoly,
};
pub use univariate::{determinant, from_roots, horner, horner_with_derivative, newton_interpolate, roots, sylvester_resultant};
pub use rational::{
    float_to_rational, mobius_apply, parse_rational, rational_to_string, GaussianRational,
    RationalMatrix2,
};

/// Evaluates an integer bivariate polynomial at complex arguments.
pub fn poly_eval_complex(
    p: &IntegerBivariatePoly,
    t1: &PrecisionComplex,
    t2: &PrecisionComplex,
) -> PrecisionComplex {
    p.eval_horner(t1, t2)
}
