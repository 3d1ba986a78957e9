use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use rug::{Float, Integer, Rational};

use super::complex::{pow2, PrecisionComplex};
use crate::error::{Error, Result};

/// Parse an exact rational from `"p"`, `"p/q"` or a decimal such as `"-3.1415e2"`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let t = s.trim();
    if t.is_empty() {
        return Err(Error::Parse("empty number".into()));
    }
    if t.contains('/') {
        return t
            .parse::<Rational>()
            .map_err(|e| Error::Parse(format!("{t}: {e}")));
    }
    let (mantissa, exp) = match t.find(['e', 'E']) {
        Some(k) => {
            let e: i64 = t[k + 1..]
                .parse()
                .map_err(|e| Error::Parse(format!("{t}: {e}")))?;
            (&t[..k], e)
        }
        None => (t, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = match digits.find('.') {
        Some(k) => (&digits[..k], &digits[k + 1..]),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(Error::Parse(format!("{t}: no digits")));
    }
    let all: String = format!("{int_part}{frac_part}");
    if !all.chars().all(|c| c.is_ascii_digit()) {
        return Err(Error::Parse(format!("{t}: not a number")));
    }
    let num: Integer = all.parse().map_err(|e| Error::Parse(format!("{t}: {e}")))?;
    let scale = exp - frac_part.len() as i64;
    let mut r = Rational::from(num);
    if scale >= 0 {
        r *= Integer::from(Integer::u_pow_u(10, scale as u32));
    } else {
        r /= Integer::from(Integer::u_pow_u(10, (-scale) as u32));
    }
    if neg {
        r = -r;
    }
    Ok(r)
}

/// Render a rational as an integer decimal string, or `p/q` when not integral.
pub fn rational_to_string(r: &Rational) -> String {
    if *r.denom() == 1 {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Exact rational approximation of an MPFR float (floats are dyadic rationals).
pub fn float_to_rational(x: &Float) -> Rational {
    x.to_rational().unwrap_or_default()
}

/// Exact element `re + i·im` of ℚ(i).
#[derive(Clone, PartialEq, Eq, Default, Hash)]
pub struct GaussianRational {
    pub re: Rational,
    pub im: Rational,
}

impl GaussianRational {
    pub fn new(re: impl Into<Rational>, im: impl Into<Rational>) -> Self {
        Self { re: re.into(), im: im.into() }
    }

    pub fn real(re: impl Into<Rational>) -> Self {
        Self { re: re.into(), im: Rational::new() }
    }

    pub fn i() -> Self {
        Self::new(0, 1)
    }

    pub fn is_zero(&self) -> bool {
        self.re == 0 && self.im == 0
    }

    pub fn is_real(&self) -> bool {
        self.im == 0
    }

    pub fn conj(&self) -> Self {
        Self { re: self.re.clone(), im: Rational::from(-&self.im) }
    }

    pub fn norm(&self) -> Rational {
        Rational::from(self.re.square_ref()) + Rational::from(self.im.square_ref())
    }

    pub fn inverse(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let n = self.norm();
        Some(Self {
            re: Rational::from(&self.re / &n),
            im: Rational::from(-&self.im) / &n,
        })
    }

    pub fn to_complex(&self, prec: u32) -> PrecisionComplex {
        PrecisionComplex::from_rationals(&self.re, &self.im, prec)
    }
}

impl Add<&GaussianRational> for &GaussianRational {
    type Output = GaussianRational;
    fn add(self, rhs: &GaussianRational) -> GaussianRational {
        GaussianRational {
            re: Rational::from(&self.re + &rhs.re),
            im: Rational::from(&self.im + &rhs.im),
        }
    }
}

impl Sub<&GaussianRational> for &GaussianRational {
    type Output = GaussianRational;
    fn sub(self, rhs: &GaussianRational) -> GaussianRational {
        GaussianRational {
            re: Rational::from(&self.re - &rhs.re),
            im: Rational::from(&self.im - &rhs.im),
        }
    }
}

impl Mul<&GaussianRational> for &GaussianRational {
    type Output = GaussianRational;
    fn mul(self, rhs: &GaussianRational) -> GaussianRational {
        GaussianRational {
            re: Rational::from(&self.re * &rhs.re) - Rational::from(&self.im * &rhs.im),
            im: Rational::from(&self.re * &rhs.im) + Rational::from(&self.im * &rhs.re),
        }
    }
}

impl Neg for &GaussianRational {
    type Output = GaussianRational;
    fn neg(self) -> GaussianRational {
        GaussianRational { re: Rational::from(-&self.re), im: Rational::from(-&self.im) }
    }
}

impl fmt::Debug for GaussianRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for GaussianRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im == 0 {
            write!(f, "{}", self.re)
        } else {
            write!(f, "({} + {}i)", self.re, self.im)
        }
    }
}

/// Exact 2×2 rational matrix `(a b; c d)` acting on ℂ by Mobius transformations.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RationalMatrix2 {
    pub a: Rational,
    pub b: Rational,
    pub c: Rational,
    pub d: Rational,
}

impl RationalMatrix2 {
    pub fn new(
        a: impl Into<Rational>,
        b: impl Into<Rational>,
        c: impl Into<Rational>,
        d: impl Into<Rational>,
    ) -> Self {
        Self { a: a.into(), b: b.into(), c: c.into(), d: d.into() }
    }

    pub fn identity() -> Self {
        Self::new(1, 0, 0, 1)
    }

    /// `T^n = (1 n; 0 1)`.
    pub fn translation(n: impl Into<Rational>) -> Self {
        Self::new(1, n, 0, 1)
    }

    /// `S = (0 -1; 1 0)`.
    pub fn inversion() -> Self {
        Self::new(0, -1, 1, 0)
    }

    pub fn det(&self) -> Rational {
        Rational::from(&self.a * &self.d) - Rational::from(&self.b * &self.c)
    }

    pub fn trace(&self) -> Rational {
        Rational::from(&self.a + &self.d)
    }

    pub fn mul(&self, o: &Self) -> Self {
        let e = |x: &Rational, y: &Rational, z: &Rational, w: &Rational| {
            Rational::from(x * y) + Rational::from(z * w)
        };
        Self {
            a: e(&self.a, &o.a, &self.b, &o.c),
            b: e(&self.a, &o.b, &self.b, &o.d),
            c: e(&self.c, &o.a, &self.d, &o.c),
            d: e(&self.c, &o.b, &self.d, &o.d),
        }
    }

    /// Adjugate `(d -b; -c a)`; equals `det · M⁻¹`.
    pub fn adjugate(&self) -> Self {
        Self {
            a: self.d.clone(),
            b: Rational::from(-&self.b),
            c: Rational::from(-&self.c),
            d: self.a.clone(),
        }
    }

    pub fn inverse(&self) -> Result<Self> {
        let det = self.det();
        if det == 0 {
            return Err(Error::SingularMatrix);
        }
        let adj = self.adjugate();
        Ok(adj.scale(&Rational::from(det.recip_ref())))
    }

    pub fn scale(&self, s: &Rational) -> Self {
        Self {
            a: Rational::from(&self.a * s),
            b: Rational::from(&self.b * s),
            c: Rational::from(&self.c * s),
            d: Rational::from(&self.d * s),
        }
    }

    pub fn entries(&self) -> [&Rational; 4] {
        [&self.a, &self.b, &self.c, &self.d]
    }

    pub fn is_integral(&self) -> bool {
        self.entries().iter().all(|x| *x.denom() == 1)
    }

    /// Integer entries, if integral.
    pub fn to_integers(&self) -> Option<[Integer; 4]> {
        if !self.is_integral() {
            return None;
        }
        Some([
            self.a.numer().clone(),
            self.b.numer().clone(),
            self.c.numer().clone(),
            self.d.numer().clone(),
        ])
    }

    /// Largest absolute entry, as f64.
    pub fn max_abs_f64(&self) -> f64 {
        self.entries()
            .iter()
            .map(|x| x.to_f64().abs())
            .fold(0.0, f64::max)
    }
}

impl fmt::Debug for RationalMatrix2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} {}; {} {})", self.a, self.b, self.c, self.d)
    }
}

impl fmt::Display for RationalMatrix2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Mobius action `(az + b) / (cz + d)` at the precision of `z`.
pub fn mobius_apply(m: &RationalMatrix2, z: &PrecisionComplex) -> Result<PrecisionComplex> {
    let p = z.prec();
    let work = p + 16;
    let zz = z.with_prec(work);
    let lift = |r: &Rational| PrecisionComplex::from_rationals(r, &Rational::new(), work);
    let num = &(&lift(&m.a) * &zz) + &lift(&m.b);
    let den = &(&lift(&m.c) * &zz) + &lift(&m.d);
    let threshold = pow2(-(p as i32) / 2, work);
    if den.abs() <= threshold {
        return Err(Error::Pole);
    }
    Ok((&num / &den).with_prec(p))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &PrecisionComplex, re: f64, im: f64, bits: i32) -> bool {
        a.dist(&PrecisionComplex::from_f64(re, im, a.prec())) < pow2(-bits, a.prec())
    }

    #[test]
    fn mobius_identity() {
        let z = PrecisionComplex::from_f64(0.0, 2.0, 192);
        let w = mobius_apply(&RationalMatrix2::identity(), &z).unwrap();
        assert!(close(&w, 0.0, 2.0, 180));
    }

    #[test]
    fn mobius_inversion_fixes_i() {
        let z = PrecisionComplex::i(192);
        let w = mobius_apply(&RationalMatrix2::inversion(), &z).unwrap();
        assert!(close(&w, 0.0, 1.0, 180));
    }

    #[test]
    fn mobius_translation() {
        let z = PrecisionComplex::from_f64(0.5, 1.0, 192);
        let w = mobius_apply(&RationalMatrix2::translation(1), &z).unwrap();
        assert!(close(&w, 1.5, 1.0, 180));
    }

    #[test]
    fn mobius_pole() {
        let z = PrecisionComplex::zero(192);
        assert!(matches!(mobius_apply(&RationalMatrix2::inversion(), &z), Err(Error::Pole)));
    }

    #[test]
    fn lowest_terms_and_det() {
        let m = RationalMatrix2::new(Rational::from((2, 4)), 3, Rational::from((6, 8)), 1);
        assert_eq!(m.a, Rational::from((1, 2)));
        assert_eq!(m.c, Rational::from((3, 4)));
        assert_eq!(m.det(), Rational::from((1, 2)) - Rational::from((9, 4)));
    }

    #[test]
    fn inverse_of_singular_fails() {
        let m = RationalMatrix2::new(1, 2, 2, 4);
        assert!(matches!(m.inverse(), Err(Error::SingularMatrix)));
        let n = RationalMatrix2::new(2, 1, 1, 1);
        assert_eq!(n.mul(&n.inverse().unwrap()), RationalMatrix2::identity());
    }

    #[test]
    fn parse_numbers() {
        assert_eq!(parse_rational("42").unwrap(), Rational::from(42));
        assert_eq!(parse_rational("-3/6").unwrap(), Rational::from((-1, 2)));
        assert_eq!(parse_rational("3.25").unwrap(), Rational::from((13, 4)));
        assert_eq!(parse_rational("-1.5e3").unwrap(), Rational::from(-1500));
        assert_eq!(parse_rational("25e-2").unwrap(), Rational::from((1, 4)));
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("").is_err());
    }

    #[test]
    fn gaussian_field_ops() {
        let a = GaussianRational::new(1, 2);
        let b = GaussianRational::new(3, -1);
        assert_eq!(&a * &b, GaussianRational::new(5, 5));
        let inv = a.inverse().unwrap();
        assert_eq!(&a * &inv, GaussianRational::real(1));
        assert!(GaussianRational::default().inverse().is_none());
    }
}
