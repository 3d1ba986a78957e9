//! Restriction of scalars of complex plane curves, the coordinate maps
//! `(x, y) ↦ (x+iy, x−iy)` on one or both planes, and the equations of the
//! resulting surfaces in `𝔸⁴`.

use rand::Rng;
use rug::{Float, Rational};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::modpoly::ModularCache;
use crate::numeric::{
    float_to_rational, roots, GaussianBivariatePoly, GaussianQuadruplePoly, GaussianRational, IntegerBivariatePoly,
    PrecisionComplex, RealQuadruplePoly,
};

/// A plane curve `P(T1, T2) = 0` with exact Gaussian-rational coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexPlaneCurve {
    poly: GaussianBivariatePoly,
    /// `P` does not involve `T1`.
    pub is_horizontal: bool,
    /// `P` does not involve `T2`.
    pub is_vertical: bool,
}

impl ComplexPlaneCurve {
    pub fn new(poly: GaussianBivariatePoly) -> Result<Self> {
        if poly.is_zero() {
            return Err(Error::Precondition("the zero polynomial does not define a curve".into()));
        }
        let is_horizontal = poly.is_free_of(0);
        let is_vertical = poly.is_free_of(1);
        Ok(Self { poly, is_horizontal, is_vertical })
    }

    pub fn from_integer(p: &IntegerBivariatePoly) -> Result<Self> {
        Self::new(p.into())
    }

    /// Builds a curve from floating coefficients; each is replaced by the
    /// dyadic rational it represents exactly.
    pub fn from_float_terms(terms: &[([u32; 2], Float, Float)]) -> Result<Self> {
        let mut p = GaussianBivariatePoly::new();
        for (e, re, im) in terms {
            p.add_term(*e, GaussianRational { re: float_to_rational(re), im: float_to_rational(im) });
        }
        Self::new(p)
    }

    pub fn from_json_value(v: &Value) -> Result<Self> {
        Self::new(GaussianBivariatePoly::from_json_value(v)?)
    }

    pub fn to_json_value(&self) -> Value {
        self.poly.to_json_value()
    }

    pub fn poly(&self) -> &GaussianBivariatePoly {
        &self.poly
    }

    pub fn has_real_coefficients(&self) -> bool {
        self.poly.terms().all(|(_, c)| c.is_real())
    }

    /// Coefficient-wise complex conjugate `P̄`.
    pub fn conjugate(&self) -> GaussianBivariatePoly {
        self.poly.map_coeffs(|c| c.conj())
    }

    /// `P` with integer coefficients, if it has them.
    pub fn to_integer(&self) -> Option<IntegerBivariatePoly> {
        let mut p = IntegerBivariatePoly::new();
        for (e, c) in self.poly.terms() {
            if !c.is_real() || *c.re.denom() != 1 {
                return None;
            }
            p.add_term(*e, c.re.numer().clone());
        }
        Some(p)
    }

    pub fn eval(&self, t1: &PrecisionComplex, t2: &PrecisionComplex) -> PrecisionComplex {
        self.poly.eval_complex(&[t1.clone(), t2.clone()])
    }

    /// Coefficients in `T2`, lowest degree first, of `P(t1, T2)`.
    pub fn fiber_coefficients(&self, t1: &PrecisionComplex) -> Vec<PrecisionComplex> {
        let prec = t1.prec();
        let deg = self.poly.degree_in(1) as usize;
        let mut out = vec![PrecisionComplex::zero(prec); deg + 1];
        for (e, c) in self.poly.terms() {
            let term = &c.to_complex(prec) * &t1.pow_u32(e[0]);
            out[e[1] as usize] = &out[e[1] as usize] + &term;
        }
        out
    }

    /// Roots `T2` of `P(t1, T2) = 0`.
    pub fn fiber_roots(&self, t1: &PrecisionComplex) -> Vec<PrecisionComplex> {
        roots(&self.fiber_coefficients(t1)).unwrap_or_default()
    }
}

/// `P(X1+iY1, X2+iY2) = re + i·im`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeilRestriction {
    pub re_part: RealQuadruplePoly,
    pub im_part: RealQuadruplePoly,
}

impl WeilRestriction {
    /// Exact `(re, im)` at a rational point `(x1, y1, x2, y2)`.
    pub fn eval_exact(&self, pt: &[Rational; 4]) -> (Rational, Rational) {
        (self.re_part.eval_exact(pt), self.im_part.eval_exact(pt))
    }

    pub fn to_json_value(&self) -> Value {
        json!({ "re": self.re_part.to_json_value(), "im": self.im_part.to_json_value() })
    }
}

/// `(X + iY)^k` for `k = 0..=deg` as `(re, im)` pairs in variables `x`, `y`.
fn gaussian_powers(x: usize, y: usize, deg: u32) -> Vec<(RealQuadruplePoly, RealQuadruplePoly)> {
    let vx = RealQuadruplePoly::variable(x);
    let vy = RealQuadruplePoly::variable(y);
    let mut out = vec![(RealQuadruplePoly::constant(Rational::from(1)), RealQuadruplePoly::new())];
    for k in 1..=deg as usize {
        let (r, i) = &out[k - 1];
        let re = r.mul(&vx).sub(&i.mul(&vy));
        let im = r.mul(&vy).add(&i.mul(&vx));
        out.push((re, im));
    }
    out
}

pub fn weil_restrict(c: &ComplexPlaneCurve) -> WeilRestriction {
    let p1 = gaussian_powers(0, 1, c.poly.degree_in(0));
    let p2 = gaussian_powers(2, 3, c.poly.degree_in(1));
    let mut re = RealQuadruplePoly::new();
    let mut im = RealQuadruplePoly::new();
    for (e, coeff) in c.poly.terms() {
        let (ar, ai) = &p1[e[0] as usize];
        let (br, bi) = &p2[e[1] as usize];
        let mr = ar.mul(br).sub(&ai.mul(bi));
        let mi = ar.mul(bi).add(&ai.mul(br));
        // (cr + i ci)(mr + i mi)
        let cr = RealQuadruplePoly::constant(coeff.re.clone());
        let ci = RealQuadruplePoly::constant(coeff.im.clone());
        re = re.add(&cr.mul(&mr).sub(&ci.mul(&mi)));
        im = im.add(&cr.mul(&mi).add(&ci.mul(&mr)));
    }
    WeilRestriction { re_part: re, im_part: im }
}

/// `(x1+iy1, x1−iy1, x2+iy2, x2−iy2)`.
pub fn f2_map(x1: &Float, y1: &Float, x2: &Float, y2: &Float) -> [PrecisionComplex; 4] {
    let a = PrecisionComplex::new(x1.clone(), y1.clone());
    let b = PrecisionComplex::new(x2.clone(), y2.clone());
    [a.clone(), a.conj(), b.clone(), b.conj()]
}

/// Equations of `V` in `(T1, T2, T3, T4)`: `Q1 = P(T1, T3)`, `Q2 = P̄(T2, T4)`.
pub fn surface_equations(c: &ComplexPlaneCurve) -> (GaussianQuadruplePoly, GaussianQuadruplePoly) {
    let q1 = c.poly.embed::<4>([0, 2]);
    let q2 = c.conjugate().embed::<4>([1, 3]);
    (q1, q2)
}

/// `S_{N1,N2} : Φ_{N1}(T1, T2) = Φ_{N2}(T3, T4) = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SpecialSurface {
    pub n1: u32,
    pub n2: u32,
}

impl SpecialSurface {
    pub fn new(n1: u32, n2: u32) -> Result<Self> {
        if n1 == 0 || n2 == 0 {
            return Err(Error::Precondition("levels must be positive".into()));
        }
        Ok(Self { n1, n2 })
    }
}

/// `(|Φ_{N1}(T1, T2)|, |Φ_{N2}(T3, T4)|)`.
pub fn special_surface_residual(
    s: &SpecialSurface,
    pt: &[PrecisionComplex; 4],
    cache: &ModularCache,
) -> Result<(Float, Float)> {
    let p1 = cache.modpoly(s.n1)?;
    let p2 = cache.modpoly(s.n2)?;
    let r1 = p1.poly.eval_horner(&pt[0], &pt[1]).abs();
    let r2 = p2.poly.eval_horner(&pt[2], &pt[3]).abs();
    Ok((r1, r2))
}

/// Random search for a point of `V` off `S`: picks random `T1`, `T2`,
/// solves the fibres of `Q1`, `Q2` for `T3`, `T4` and returns the first
/// point where one of the `S` residuals exceeds `margin`.
pub fn point_of_v_off_s(
    c: &ComplexPlaneCurve,
    s: &SpecialSurface,
    rng: &mut impl Rng,
    tries: usize,
    margin: f64,
    prec: u32,
    cache: &ModularCache,
) -> Result<Option<[PrecisionComplex; 4]>> {
    if c.is_vertical {
        return Err(Error::HorizontalVertical);
    }
    let conj = ComplexPlaneCurve::new(c.conjugate())?;
    for _ in 0..tries {
        let t1 = PrecisionComplex::from_f64(rng.random_range(-4.0..4.0), rng.random_range(-4.0..4.0), prec);
        let t2 = PrecisionComplex::from_f64(rng.random_range(-4.0..4.0), rng.random_range(-4.0..4.0), prec);
        let (Some(t3), Some(t4)) = (c.fiber_roots(&t1).into_iter().next(), conj.fiber_roots(&t2).into_iter().next())
        else {
            continue;
        };
        let pt = [t1, t2, t3, t4];
        let (r1, r2) = special_surface_residual(s, &pt, cache)?;
        if r1.to_f64() > margin || r2.to_f64() > margin {
            return Ok(Some(pt));
        }
    }
    Ok(None)
}
