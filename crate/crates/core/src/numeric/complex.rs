use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use rug::float::Constant;
use rug::ops::Pow;
use rug::{Float, Integer, Rational};

/// Smallest working precision accepted anywhere in the crate.
pub const MIN_PREC: u32 = 64;

/// Default working precision in bits.
pub const DEFAULT_PREC: u32 = 192;

/// Arbitrary-precision complex number with an explicit working precision.
///
/// Both parts always carry the same precision. Binary operations produce a
/// result at the smaller of the two operand precisions.
#[derive(Clone, PartialEq)]
pub struct PrecisionComplex {
    re: Float,
    im: Float,
}

impl PrecisionComplex {
    pub fn new(re: Float, im: Float) -> Self {
        let prec = re.prec().min(im.prec()).max(MIN_PREC);
        Self {
            re: Float::with_val(prec, re),
            im: Float::with_val(prec, im),
        }
    }

    pub fn zero(prec: u32) -> Self {
        Self::from_f64(0.0, 0.0, prec)
    }

    pub fn one(prec: u32) -> Self {
        Self::from_f64(1.0, 0.0, prec)
    }

    pub fn i(prec: u32) -> Self {
        Self::from_f64(0.0, 1.0, prec)
    }

    pub fn from_f64(re: f64, im: f64, prec: u32) -> Self {
        let prec = prec.max(MIN_PREC);
        Self {
            re: Float::with_val(prec, re),
            im: Float::with_val(prec, im),
        }
    }

    pub fn from_real(re: Float) -> Self {
        let prec = re.prec().max(MIN_PREC);
        Self {
            re: Float::with_val(prec, re),
            im: Float::new(prec),
        }
    }

    pub fn from_integer(v: &Integer, prec: u32) -> Self {
        let prec = prec.max(MIN_PREC);
        Self {
            re: Float::with_val(prec, v),
            im: Float::new(prec),
        }
    }

    pub fn from_rationals(re: &Rational, im: &Rational, prec: u32) -> Self {
        let prec = prec.max(MIN_PREC);
        Self {
            re: Float::with_val(prec, re),
            im: Float::with_val(prec, im),
        }
    }

    pub fn prec(&self) -> u32 {
        self.re.prec()
    }

    pub fn re(&self) -> &Float {
        &self.re
    }

    pub fn im(&self) -> &Float {
        &self.im
    }

    pub fn into_parts(self) -> (Float, Float) {
        (self.re, self.im)
    }

    /// Same value rounded (or extended) to `prec` bits.
    pub fn with_prec(&self, prec: u32) -> Self {
        let prec = prec.max(MIN_PREC);
        Self {
            re: Float::with_val(prec, &self.re),
            im: Float::with_val(prec, &self.im),
        }
    }

    pub fn conj(&self) -> Self {
        Self {
            re: self.re.clone(),
            im: Float::with_val(self.prec(), -&self.im),
        }
    }

    pub fn norm_sq(&self) -> Float {
        Float::with_val(self.prec(), &self.re * &self.re + &self.im * &self.im)
    }

    pub fn abs(&self) -> Float {
        Float::with_val(self.prec(), self.re.hypot_ref(&self.im))
    }

    pub fn abs_f64(&self) -> f64 {
        self.abs().to_f64()
    }

    pub fn to_f64_pair(&self) -> (f64, f64) {
        (self.re.to_f64(), self.im.to_f64())
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }

    pub fn scale(&self, s: &Float) -> Self {
        let p = self.prec().min(s.prec());
        Self {
            re: Float::with_val(p, &self.re * s),
            im: Float::with_val(p, &self.im * s),
        }
    }

    pub fn scale_integer(&self, s: &Integer) -> Self {
        let p = self.prec();
        Self {
            re: Float::with_val(p, &self.re * s),
            im: Float::with_val(p, &self.im * s),
        }
    }

    pub fn square(&self) -> Self {
        self * self
    }

    /// Integer power by repeated squaring.
    pub fn pow_u32(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one(self.prec());
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = base.square();
            }
        }
        acc
    }

    pub fn recip(&self) -> Self {
        &Self::one(self.prec()) / self
    }

    pub fn exp(&self) -> Self {
        let p = self.prec();
        let m = Float::with_val(p, self.re.exp_ref());
        let (s, c) = self.im.clone().sin_cos(Float::new(p));
        Self {
            re: Float::with_val(p, &m * &c),
            im: Float::with_val(p, &m * &s),
        }
    }

    /// Principal branch of the logarithm.
    pub fn ln(&self) -> Self {
        let p = self.prec();
        let r = self.abs();
        Self {
            re: Float::with_val(p, r.ln_ref()),
            im: Float::with_val(p, self.im.atan2_ref(&self.re)),
        }
    }

    pub fn sqrt(&self) -> Self {
        let p = self.prec();
        if self.is_zero() {
            return Self::zero(p);
        }
        let r = self.abs();
        let mut re = Float::with_val(p, &r + &self.re);
        re /= 2;
        re.sqrt_mut();
        let mut im = Float::with_val(p, &r - &self.re);
        im /= 2;
        im.sqrt_mut();
        if self.im.is_sign_negative() {
            im = -im;
        }
        Self { re, im }
    }

    /// Distance `|self - other|`.
    pub fn dist(&self, other: &Self) -> Float {
        (self - other).abs()
    }
}

pub fn pi(prec: u32) -> Float {
    Float::with_val(prec, Constant::Pi)
}

/// `2^e` at the given precision.
pub fn pow2(e: i32, prec: u32) -> Float {
    Float::with_val(prec, Float::with_val(prec, 2).pow(e))
}

macro_rules! forward_owned {
    ($tr:ident, $method:ident) => {
        impl $tr<PrecisionComplex> for PrecisionComplex {
            type Output = PrecisionComplex;
            fn $method(self, rhs: PrecisionComplex) -> PrecisionComplex {
                (&self).$method(&rhs)
            }
        }
        impl $tr<&PrecisionComplex> for PrecisionComplex {
            type Output = PrecisionComplex;
            fn $method(self, rhs: &PrecisionComplex) -> PrecisionComplex {
                (&self).$method(rhs)
            }
        }
    };
}

impl Add<&PrecisionComplex> for &PrecisionComplex {
    type Output = PrecisionComplex;
    fn add(self, rhs: &PrecisionComplex) -> PrecisionComplex {
        let p = self.prec().min(rhs.prec());
        PrecisionComplex {
            re: Float::with_val(p, &self.re + &rhs.re),
            im: Float::with_val(p, &self.im + &rhs.im),
        }
    }
}

impl Sub<&PrecisionComplex> for &PrecisionComplex {
    type Output = PrecisionComplex;
    fn sub(self, rhs: &PrecisionComplex) -> PrecisionComplex {
        let p = self.prec().min(rhs.prec());
        PrecisionComplex {
            re: Float::with_val(p, &self.re - &rhs.re),
            im: Float::with_val(p, &self.im - &rhs.im),
        }
    }
}

impl Mul<&PrecisionComplex> for &PrecisionComplex {
    type Output = PrecisionComplex;
    fn mul(self, rhs: &PrecisionComplex) -> PrecisionComplex {
        let p = self.prec().min(rhs.prec());
        PrecisionComplex {
            re: Float::with_val(p, &self.re * &rhs.re - &self.im * &rhs.im),
            im: Float::with_val(p, &self.re * &rhs.im + &self.im * &rhs.re),
        }
    }
}

impl Div<&PrecisionComplex> for &PrecisionComplex {
    type Output = PrecisionComplex;
    fn div(self, rhs: &PrecisionComplex) -> PrecisionComplex {
        let p = self.prec().min(rhs.prec());
        let d = Float::with_val(p + 8, &rhs.re * &rhs.re + &rhs.im * &rhs.im);
        let re = Float::with_val(p + 8, &self.re * &rhs.re + &self.im * &rhs.im);
        let im = Float::with_val(p + 8, &self.im * &rhs.re - &self.re * &rhs.im);
        PrecisionComplex {
            re: Float::with_val(p, re / &d),
            im: Float::with_val(p, im / &d),
        }
    }
}

impl Neg for &PrecisionComplex {
    type Output = PrecisionComplex;
    fn neg(self) -> PrecisionComplex {
        PrecisionComplex {
            re: Float::with_val(self.prec(), -&self.re),
            im: Float::with_val(self.prec(), -&self.im),
        }
    }
}

impl Neg for PrecisionComplex {
    type Output = PrecisionComplex;
    fn neg(self) -> PrecisionComplex {
        -&self
    }
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl fmt::Debug for PrecisionComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} + {}i)[{}]", self.re.to_f64(), self.im.to_f64(), self.prec())
    }
}

impl fmt::Display for PrecisionComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = (self.prec() as f64 * std::f64::consts::LOG10_2) as usize;
        let im = &self.im;
        if im.is_sign_negative() {
            let m = Float::with_val(self.prec(), -im);
            write!(f, "{} - {}i", self.re.to_string_radix(10, Some(digits)), m.to_string_radix(10, Some(digits)))
        } else {
            write!(f, "{} + {}i", self.re.to_string_radix(10, Some(digits)), im.to_string_radix(10, Some(digits)))
        }
    }
}
