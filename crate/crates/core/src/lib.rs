//! Modular polynomials, the j-invariant at arbitrary precision, special
//! geodesics, the real modular curves `Z_N`, Weil restriction, and a
//! detector for strongly special plane curves based on curves with special
//! geodesic projections.

pub mod atypical;
pub mod error;
pub mod geodesics;
pub mod modpoly;
pub mod modular_forms;
pub mod numeric;
pub mod real_curves;
pub mod restriction;
pub mod tracer;

pub use error::{Error, Result};
