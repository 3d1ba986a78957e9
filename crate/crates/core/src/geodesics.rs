//! Special geodesics `{z ∈ H : Az = z̄}` for rational trace-zero matrices of
//! negative determinant.

use std::fmt;

use rug::{Float, Integer, Rational};

use crate::error::{Error, Result};
use crate::modular_forms::UpperHalfPoint;
use crate::numeric::{mobius_apply, pi, PrecisionComplex, RationalMatrix2};

/// A rational matrix `(a b; c −a)` with `det < 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeodesicMatrix(RationalMatrix2);

impl GeodesicMatrix {
    pub fn new(a: RationalMatrix2) -> Result<Self> {
        if a.trace() != 0 {
            return Err(Error::InvalidGeodesic(format!("trace of {a} is not zero")));
        }
        if a.det() >= 0 {
            return Err(Error::InvalidGeodesic(format!("determinant of {a} is not negative")));
        }
        Ok(Self(a))
    }

    pub fn from_entries(a: impl Into<Rational>, b: impl Into<Rational>, c: impl Into<Rational>) -> Result<Self> {
        let a = a.into();
        let neg_a = Rational::from(-&a);
        Self::new(RationalMatrix2::new(a, b, c, neg_a))
    }

    pub fn matrix(&self) -> &RationalMatrix2 {
        &self.0
    }

    pub fn det(&self) -> Rational {
        self.0.det()
    }

    pub fn locus(&self) -> GeodesicLocus {
        locus(self)
    }
}

impl fmt::Display for GeodesicMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// One endpoint on `P¹(ℝ)`: `p + s√D` with `s = ±1`, or `∞`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Endpoint {
    Finite { p: Rational, d: Rational, sign: i8 },
    Infinity,
}

impl Endpoint {
    pub fn to_f64(&self) -> f64 {
        match self {
            Endpoint::Infinity => f64::INFINITY,
            Endpoint::Finite { p, d, sign } => {
                let r = Float::with_val(128, d).sqrt();
                (Float::with_val(128, p) + r * *sign as i32).to_f64()
            }
        }
    }

    /// True for an irrational (real quadratic) endpoint.
    pub fn is_quadratic(&self) -> bool {
        matches!(self, Endpoint::Finite { d, .. } if !is_rational_square(d))
    }
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Endpoint::Infinity => write!(f, "inf"),
            Endpoint::Finite { p, d, sign } => {
                if let Some(r) = rational_sqrt(d) {
                    write!(f, "{}", Rational::from(p + r * *sign as i32))
                } else {
                    let s = if *sign < 0 { "-" } else { "+" };
                    write!(f, "{p} {s} sqrt({d})")
                }
            }
        }
    }
}

/// `S_A` as a subset of `H`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GeodesicLocus {
    Semicircle { center: Rational, radius_sq: Rational },
    VerticalLine { x0: Rational },
}

impl GeodesicLocus {
    pub fn endpoints(&self) -> (Endpoint, Endpoint) {
        match self {
            GeodesicLocus::VerticalLine { x0 } => (
                Endpoint::Finite { p: x0.clone(), d: Rational::new(), sign: 1 },
                Endpoint::Infinity,
            ),
            GeodesicLocus::Semicircle { center, radius_sq } => (
                Endpoint::Finite { p: center.clone(), d: radius_sq.clone(), sign: -1 },
                Endpoint::Finite { p: center.clone(), d: radius_sq.clone(), sign: 1 },
            ),
        }
    }

    /// Interior point at parameter `t ∈ (0, 1)`: angle `πt` on a semicircle,
    /// height `tan(πt/2)` on a vertical line.
    pub fn point_at(&self, t: f64, prec: u32) -> PrecisionComplex {
        let t = Float::with_val(prec, t);
        match self {
            GeodesicLocus::Semicircle { center, radius_sq } => {
                let r = Float::with_val(prec, radius_sq).sqrt();
                let theta = Float::with_val(prec, pi(prec) * &t);
                let (s, c) = theta.sin_cos(Float::new(prec));
                PrecisionComplex::new(Float::with_val(prec, center) + &r * c, r * s)
            }
            GeodesicLocus::VerticalLine { x0 } => {
                let h = Float::with_val(prec, pi(prec) * &t / 2u32).tan();
                PrecisionComplex::new(Float::with_val(prec, x0), h)
            }
        }
    }

    /// `n` evenly spread interior points.
    pub fn sample(&self, n: usize, prec: u32) -> Vec<PrecisionComplex> {
        (0..n).map(|k| self.point_at((k as f64 + 0.5) / n as f64, prec)).collect()
    }

    /// Hyperbolically meaningful distance in the plane from `(x, y)` to the locus.
    pub fn euclidean_distance(&self, x: f64, y: f64) -> f64 {
        match self {
            GeodesicLocus::VerticalLine { x0 } => (x - x0.to_f64()).abs(),
            GeodesicLocus::Semicircle { center, radius_sq } => {
                let dx = x - center.to_f64();
                ((dx * dx + y * y).sqrt() - radius_sq.to_f64().sqrt()).abs()
            }
        }
    }
}

/// Solution set of `c(x²+y²) − 2ax − b = 0` in `H`.
pub fn locus(a: &GeodesicMatrix) -> GeodesicLocus {
    let m = a.matrix();
    let [ea, eb, ec, _] = m.entries();
    if *ec == 0 {
        let x0 = Rational::from(-eb) / Rational::from(ea * 2u32);
        GeodesicLocus::VerticalLine { x0 }
    } else {
        let center = Rational::from(ea / ec);
        let radius_sq = Rational::from(-m.det()) / Rational::from(ec.square_ref());
        GeodesicLocus::Semicircle { center, radius_sq }
    }
}

/// `|Az − z̄| ≤ tol`.
pub fn contains(a: &GeodesicMatrix, z: &UpperHalfPoint, tol: f64) -> Result<bool> {
    Ok(residual(a, z.z())? <= tol)
}

/// `|Az − z̄|`.
pub fn residual(a: &GeodesicMatrix, z: &PrecisionComplex) -> Result<f64> {
    let az = mobius_apply(a.matrix(), z)?;
    Ok(az.dist(&z.conj()).to_f64())
}

/// `BAB⁻¹`, whose locus is the image of `S_A` under `B` when `det B > 0`.
pub fn conjugate_geodesic(b: &RationalMatrix2, a: &GeodesicMatrix) -> Result<GeodesicMatrix> {
    let det = b.det();
    if det == 0 {
        return Err(Error::SingularMatrix);
    }
    if det < 0 {
        return Err(Error::Precondition(format!("det {b} must be positive")));
    }
    let inv = b.inverse()?;
    GeodesicMatrix::new(b.mul(a.matrix()).mul(&inv))
}

/// The geodesic with endpoints `p ± √D`, as `(p, D − p²; 1, −p)`.
pub fn geodesic_from_quadratic(p: &Rational, d: &Rational) -> Result<GeodesicMatrix> {
    if *d <= 0 || is_rational_square(d) {
        return Err(Error::InvalidDiscriminant(format!(
            "{d} must be a positive non-square rational"
        )));
    }
    let b = Rational::from(d - Rational::from(p.square_ref()));
    GeodesicMatrix::from_entries(p.clone(), b, 1)
}

/// Integer representative: denominators cleared, content removed, first
/// nonzero entry positive.
pub fn canonicalize(a: &GeodesicMatrix) -> GeodesicMatrix {
    let e = a.matrix().entries();
    let mut lcm = Integer::from(1);
    for x in e {
        lcm.lcm_mut(x.denom());
    }
    let mut ints: Vec<Integer> = e
        .iter()
        .map(|x| Integer::from(x.numer() * Integer::from(&lcm / x.denom())))
        .collect();
    let mut g = Integer::new();
    for x in &ints {
        g.gcd_mut(x);
    }
    for x in ints.iter_mut() {
        *x /= &g;
    }
    if ints.iter().find(|x| **x != 0).is_some_and(|x| *x < 0) {
        for x in ints.iter_mut() {
            *x = Integer::from(-&*x);
        }
    }
    let [a, b, c, d]: [Integer; 4] = ints.try_into().expect("four entries");
    GeodesicMatrix(RationalMatrix2::new(a, b, c, d))
}

pub fn rational_sqrt(r: &Rational) -> Option<Rational> {
    if *r < 0 {
        return None;
    }
    let (n, d) = (r.numer(), r.denom());
    if n.is_perfect_square() && d.is_perfect_square() {
        Some(Rational::from((n.clone().sqrt(), d.clone().sqrt())))
    } else {
        None
    }
}

pub fn is_rational_square(r: &Rational) -> bool {
    rational_sqrt(r).is_some()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(a: i64, b: i64, c: i64, d: i64) -> RationalMatrix2 {
        RationalMatrix2::new(a, b, c, d)
    }

    #[test]
    fn validation() {
        assert!(GeodesicMatrix::new(m(1, 0, 0, 1)).is_err());
        assert!(GeodesicMatrix::new(m(0, -1, 1, 0)).is_err());
        assert!(GeodesicMatrix::new(m(1, 0, 0, -1)).is_ok());
    }

    #[test]
    fn loci() {
        let a = GeodesicMatrix::new(m(1, 0, 0, -1)).unwrap();
        assert_eq!(locus(&a), GeodesicLocus::VerticalLine { x0: Rational::new() });
        let a = GeodesicMatrix::new(m(0, 1, 1, 0)).unwrap();
        assert_eq!(
            locus(&a),
            GeodesicLocus::Semicircle { center: Rational::new(), radius_sq: Rational::from(1) }
        );
        let a = GeodesicMatrix::new(m(0, 2, 1, 0)).unwrap();
        let l = locus(&a);
        assert_eq!(l, GeodesicLocus::Semicircle { center: Rational::new(), radius_sq: Rational::from(2) });
        let (lo, hi) = l.endpoints();
        assert!((lo.to_f64() + 2f64.sqrt()).abs() < 1e-15 && (hi.to_f64() - 2f64.sqrt()).abs() < 1e-15);
        assert!(lo.is_quadratic());
    }

    #[test]
    fn membership() {
        let p = 192;
        let axis = GeodesicMatrix::new(m(1, 0, 0, -1)).unwrap();
        assert!(contains(&axis, &UpperHalfPoint::from_f64(0.0, 3.0, p).unwrap(), 1e-30).unwrap());
        let a = GeodesicMatrix::new(m(0, 2, 1, 0)).unwrap();
        let z = UpperHalfPoint::new(PrecisionComplex::new(Float::new(p), Float::with_val(p, 2).sqrt())).unwrap();
        let r = residual(&a, z.z()).unwrap();
        assert!(r <= 1e-50, "{r}");
        // |1 + i|² = 2, so 1 + i lies on this semicircle
        let on = UpperHalfPoint::from_f64(1.0, 1.0, p).unwrap();
        assert!(contains(&a, &on, 1e-50).unwrap());
        let off = UpperHalfPoint::from_f64(1.0, 2.0, p).unwrap();
        assert!(!contains(&a, &off, 0.1).unwrap());
    }

    #[test]
    fn conjugation_example() {
        let a = GeodesicMatrix::new(m(1, 0, 0, -1)).unwrap();
        let c = conjugate_geodesic(&RationalMatrix2::translation(1), &a).unwrap();
        assert_eq!(*c.matrix(), m(1, -2, 0, -1));
        assert_eq!(conjugate_geodesic(&RationalMatrix2::identity(), &a).unwrap(), a);
        assert!(matches!(conjugate_geodesic(&m(1, 2, 2, 4), &a), Err(Error::SingularMatrix)));
    }

    #[test]
    fn from_quadratic() {
        let a = geodesic_from_quadratic(&Rational::new(), &Rational::from(2)).unwrap();
        assert_eq!(*a.matrix(), m(0, 2, 1, 0));
        let a = geodesic_from_quadratic(&Rational::from(1), &Rational::from(2)).unwrap();
        assert_eq!(a.det(), -2);
        assert_eq!(
            locus(&a),
            GeodesicLocus::Semicircle { center: Rational::from(1), radius_sq: Rational::from(2) }
        );
        assert!(geodesic_from_quadratic(&Rational::new(), &Rational::from(4)).is_err());
        assert!(geodesic_from_quadratic(&Rational::new(), &Rational::from(-3)).is_err());
        assert!(geodesic_from_quadratic(&Rational::new(), &Rational::from((9, 4))).is_err());
    }

    #[test]
    fn canonical_form() {
        let a = GeodesicMatrix::from_entries(Rational::from((-1, 2)), Rational::from((3, 4)), 0).unwrap();
        let c = canonicalize(&a);
        assert_eq!(*c.matrix(), m(2, -3, 0, -2));
        assert_eq!(locus(&a), locus(&c));
    }
}
