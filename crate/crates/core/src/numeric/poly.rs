use std::collections::BTreeMap;
use std::fmt;

use rug::{Float, Integer, Rational};
use serde::{Deserialize, Serialize};

use super::complex::PrecisionComplex;
use super::rational::{parse_rational, rational_to_string, GaussianRational};
use crate::error::{Error, Result};

/// Coefficient ring for [`SparsePoly`].
pub trait Ring: Clone + PartialEq + fmt::Debug + Send + Sync {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add_ref(&self, o: &Self) -> Self;
    fn mul_ref(&self, o: &Self) -> Self;
    fn neg_ref(&self) -> Self;
    fn from_i64(v: i64) -> Self;
    fn to_complex(&self, prec: u32) -> PrecisionComplex;
}

/// Rings embedded in ℝ.
pub trait RealRing: Ring {
    fn to_float(&self, prec: u32) -> Float;
}

impl Ring for Integer {
    fn zero() -> Self {
        Integer::new()
    }
    fn one() -> Self {
        Integer::from(1)
    }
    fn is_zero(&self) -> bool {
        *self == 0
    }
    fn add_ref(&self, o: &Self) -> Self {
        Integer::from(self + o)
    }
    fn mul_ref(&self, o: &Self) -> Self {
        Integer::from(self * o)
    }
    fn neg_ref(&self) -> Self {
        Integer::from(-self)
    }
    fn from_i64(v: i64) -> Self {
        Integer::from(v)
    }
    fn to_complex(&self, prec: u32) -> PrecisionComplex {
        PrecisionComplex::from_integer(self, prec)
    }
}

impl RealRing for Integer {
    fn to_float(&self, prec: u32) -> Float {
        Float::with_val(prec, self)
    }
}

impl Ring for Rational {
    fn zero() -> Self {
        Rational::new()
    }
    fn one() -> Self {
        Rational::from(1)
    }
    fn is_zero(&self) -> bool {
        *self == 0
    }
    fn add_ref(&self, o: &Self) -> Self {
        Rational::from(self + o)
    }
    fn mul_ref(&self, o: &Self) -> Self {
        Rational::from(self * o)
    }
    fn neg_ref(&self) -> Self {
        Rational::from(-self)
    }
    fn from_i64(v: i64) -> Self {
        Rational::from(v)
    }
    fn to_complex(&self, prec: u32) -> PrecisionComplex {
        PrecisionComplex::from_rationals(self, &Rational::new(), prec)
    }
}

impl RealRing for Rational {
    fn to_float(&self, prec: u32) -> Float {
        Float::with_val(prec, self)
    }
}

impl Ring for GaussianRational {
    fn zero() -> Self {
        GaussianRational::default()
    }
    fn one() -> Self {
        GaussianRational::real(1)
    }
    fn is_zero(&self) -> bool {
        GaussianRational::is_zero(self)
    }
    fn add_ref(&self, o: &Self) -> Self {
        self + o
    }
    fn mul_ref(&self, o: &Self) -> Self {
        self * o
    }
    fn neg_ref(&self) -> Self {
        -self
    }
    fn from_i64(v: i64) -> Self {
        GaussianRational::real(v)
    }
    fn to_complex(&self, prec: u32) -> PrecisionComplex {
        GaussianRational::to_complex(self, prec)
    }
}

/// Sparse polynomial in `V` variables. Zero coefficients are never stored.
#[derive(Clone, PartialEq)]
pub struct SparsePoly<const V: usize, C> {
    terms: BTreeMap<[u32; V], C>,
}

pub type IntegerBivariatePoly = SparsePoly<2, Integer>;
pub type RealQuadruplePoly = SparsePoly<4, Rational>;
pub type GaussianBivariatePoly = SparsePoly<2, GaussianRational>;
pub type GaussianQuadruplePoly = SparsePoly<4, GaussianRational>;

impl<const V: usize, C: Ring> Default for SparsePoly<V, C> {
    fn default() -> Self {
        Self::new()
    }
}

/// Real value, gradient and absolute scale `Σ |c·m(p)|` of a polynomial at a point.
#[derive(Clone, Debug)]
pub struct RealJet<const V: usize> {
    pub value: Float,
    pub grad: [Float; V],
    pub scale: Float,
}

impl<const V: usize, C: Ring> SparsePoly<V, C> {
    pub fn new() -> Self {
        Self { terms: BTreeMap::new() }
    }

    pub fn constant(c: C) -> Self {
        let mut p = Self::new();
        p.add_term([0; V], c);
        p
    }

    /// The coordinate function of variable `v`.
    pub fn variable(v: usize) -> Self {
        let mut e = [0; V];
        e[v] = 1;
        let mut p = Self::new();
        p.add_term(e, C::one());
        p
    }

    pub fn from_terms(terms: impl IntoIterator<Item = ([u32; V], C)>) -> Self {
        let mut p = Self::new();
        for (e, c) in terms {
            p.add_term(e, c);
        }
        p
    }

    /// Adds `c·x^e`, dropping the entry if it cancels.
    pub fn add_term(&mut self, e: [u32; V], c: C) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&e) {
            Some(old) => {
                let s = old.add_ref(&c);
                if s.is_zero() {
                    self.terms.remove(&e);
                } else {
                    *old = s;
                }
            }
            None => {
                self.terms.insert(e, c);
            }
        }
    }

    pub fn coeff(&self, e: &[u32; V]) -> Option<&C> {
        self.terms.get(e)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32; V], &C)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    pub fn degree_in(&self, v: usize) -> u32 {
        self.terms.keys().map(|e| e[v]).max().unwrap_or(0)
    }

    /// True if no term involves variable `v`.
    pub fn is_free_of(&self, v: usize) -> bool {
        self.terms.keys().all(|e| e[v] == 0)
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut r = self.clone();
        for (e, c) in &o.terms {
            r.add_term(*e, c.clone());
        }
        r
    }

    pub fn sub(&self, o: &Self) -> Self {
        let mut r = self.clone();
        for (e, c) in &o.terms {
            r.add_term(*e, c.neg_ref());
        }
        r
    }

    pub fn neg(&self) -> Self {
        self.map_coeffs(|c| c.neg_ref())
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut r = Self::new();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                let mut e = [0; V];
                for v in 0..V {
                    e[v] = e1[v] + e2[v];
                }
                r.add_term(e, c1.mul_ref(c2));
            }
        }
        r
    }

    pub fn scale(&self, s: &C) -> Self {
        Self::from_terms(self.terms.iter().map(|(e, c)| (*e, c.mul_ref(s))))
    }

    pub fn pow(&self, mut k: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::constant(C::one());
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    pub fn map_coeffs<D: Ring>(&self, f: impl Fn(&C) -> D) -> SparsePoly<V, D> {
        SparsePoly::from_terms(self.terms.iter().map(|(e, c)| (*e, f(c))))
    }

    /// Re-index variables: variable `v` of `self` becomes variable `map[v]` of the result.
    pub fn embed<const W: usize>(&self, map: [usize; V]) -> SparsePoly<W, C> {
        SparsePoly::from_terms(self.terms.iter().map(|(e, c)| {
            let mut f = [0; W];
            for v in 0..V {
                f[map[v]] += e[v];
            }
            (f, c.clone())
        }))
    }

    pub fn derivative(&self, v: usize) -> Self {
        Self::from_terms(self.terms.iter().filter(|(e, _)| e[v] > 0).map(|(e, c)| {
            let mut f = *e;
            f[v] -= 1;
            (f, c.mul_ref(&C::from_i64(e[v] as i64)))
        }))
    }

    /// Exact evaluation in the coefficient ring.
    pub fn eval_exact(&self, pt: &[C; V]) -> C {
        let tables = power_tables(self, pt, C::one(), |a, b| a.mul_ref(b));
        let mut acc = C::zero();
        for (e, c) in &self.terms {
            let mut m = c.clone();
            for v in 0..V {
                m = m.mul_ref(&tables[v][e[v] as usize]);
            }
            acc = acc.add_ref(&m);
        }
        acc
    }

    /// Evaluation at complex arguments (precision = min of argument precisions).
    pub fn eval_complex(&self, pt: &[PrecisionComplex; V]) -> PrecisionComplex {
        let prec = pt.iter().map(|z| z.prec()).min().unwrap_or(64);
        let work = prec + 16;
        let pt: Vec<PrecisionComplex> = pt.iter().map(|z| z.with_prec(work)).collect();
        let tables = power_tables_slice(self, &pt, PrecisionComplex::one(work), |a, b| a * b);
        let mut acc = PrecisionComplex::zero(work);
        for (e, c) in &self.terms {
            let mut m = c.to_complex(work);
            for v in 0..V {
                if e[v] > 0 {
                    m = &m * &tables[v][e[v] as usize];
                }
            }
            acc = &acc + &m;
        }
        acc.with_prec(prec)
    }
}

impl<const V: usize, C: RealRing> SparsePoly<V, C> {
    /// Value, gradient and absolute scale at a real point.
    pub fn eval_real_jet(&self, pt: &[Float; V], prec: u32) -> RealJet<V> {
        let pt: Vec<Float> = pt.iter().map(|x| Float::with_val(prec, x)).collect();
        let tables = power_tables_slice(self, &pt, Float::with_val(prec, 1), |a, b| {
            Float::with_val(prec, a * b)
        });
        let mut value = Float::new(prec);
        let mut scale = Float::new(prec);
        let mut grad: [Float; V] = std::array::from_fn(|_| Float::new(prec));
        for (e, c) in &self.terms {
            let cf = c.to_float(prec);
            let mut m = cf.clone();
            for v in 0..V {
                m *= &tables[v][e[v] as usize];
            }
            scale += Float::with_val(prec, m.abs_ref());
            value += &m;
            for v in 0..V {
                if e[v] == 0 {
                    continue;
                }
                let mut g = Float::with_val(prec, &cf * e[v]);
                for u in 0..V {
                    let k = if u == v { e[u] - 1 } else { e[u] };
                    g *= &tables[u][k as usize];
                }
                grad[v] += g;
            }
        }
        RealJet { value, grad, scale }
    }

    pub fn eval_real(&self, pt: &[Float; V], prec: u32) -> Float {
        let pt: Vec<Float> = pt.iter().map(|x| Float::with_val(prec, x)).collect();
        let tables = power_tables_slice(self, &pt, Float::with_val(prec, 1), |a, b| {
            Float::with_val(prec, a * b)
        });
        let mut value = Float::new(prec);
        for (e, c) in &self.terms {
            let mut m = c.to_float(prec);
            for v in 0..V {
                m *= &tables[v][e[v] as usize];
            }
            value += m;
        }
        value
    }
}

fn power_tables<const V: usize, C, T: Clone>(
    p: &SparsePoly<V, C>,
    pt: &[T; V],
    one: T,
    mul: impl Fn(&T, &T) -> T,
) -> Vec<Vec<T>> {
    power_tables_slice(p, pt.as_slice(), one, mul)
}

fn power_tables_slice<const V: usize, C, T: Clone>(
    p: &SparsePoly<V, C>,
    pt: &[T],
    one: T,
    mul: impl Fn(&T, &T) -> T,
) -> Vec<Vec<T>> {
    (0..V)
        .map(|v| {
            let deg = p.terms.keys().map(|e| e[v]).max().unwrap_or(0) as usize;
            let mut t = Vec::with_capacity(deg + 1);
            t.push(one.clone());
            for k in 1..=deg {
                let next = mul(&t[k - 1], &pt[v]);
                t.push(next);
            }
            t
        })
        .collect()
}

impl<const V: usize, C: fmt::Debug> fmt::Debug for SparsePoly<V, C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in self.terms.iter().rev() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{c:?}")?;
            for (v, k) in e.iter().enumerate() {
                if *k > 0 {
                    write!(f, "*x{}^{}", v + 1, k)?;
                }
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Integer bivariate polynomials in (T1, T2)

#[derive(Serialize, Deserialize)]
struct BivariateTermJson {
    i: u32,
    j: u32,
    c: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ci: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct BivariateJson {
    /// Largest degree in a single variable.
    #[serde(default)]
    degree: u32,
    terms: Vec<BivariateTermJson>,
}

impl IntegerBivariatePoly {
    /// Horner evaluation in `t2` for each power of `t1`, then Horner in `t1`.
    pub fn eval_horner(&self, t1: &PrecisionComplex, t2: &PrecisionComplex) -> PrecisionComplex {
        let prec = t1.prec().min(t2.prec());
        let work = prec + 16;
        let (t1, t2) = (t1.with_prec(work), t2.with_prec(work));
        let deg1 = self.degree_in(0);
        let deg2 = self.degree_in(1);
        let mut rows: Vec<Vec<Option<&Integer>>> = vec![vec![None; deg2 as usize + 1]; deg1 as usize + 1];
        for (e, c) in self.terms() {
            rows[e[0] as usize][e[1] as usize] = Some(c);
        }
        let mut outer = PrecisionComplex::zero(work);
        for row in rows.iter().rev() {
            let mut inner = PrecisionComplex::zero(work);
            for c in row.iter().rev() {
                inner = &inner * &t2;
                if let Some(c) = c {
                    inner = &inner + &PrecisionComplex::from_integer(c, work);
                }
            }
            outer = &(&outer * &t1) + &inner;
        }
        outer.with_prec(prec)
    }

    pub fn eval_integer(&self, t1: &Integer, t2: &Integer) -> Integer {
        self.eval_exact(&[t1.clone(), t2.clone()])
    }

    /// `P(T2, T1)`.
    pub fn swap_vars(&self) -> Self {
        Self::from_terms(self.terms().map(|(e, c)| ([e[1], e[0]], c.clone())))
    }

    pub fn is_symmetric(&self) -> bool {
        self.terms().all(|(e, c)| self.coeff(&[e[1], e[0]]) == Some(c))
    }

    /// Coefficients reduced into `[0, m)`, zeros dropped.
    pub fn reduce_mod(&self, m: u32) -> Self {
        let m = Integer::from(m);
        Self::from_terms(self.terms().map(|(e, c)| (*e, Integer::from(c.modulo_ref(&m)))))
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let body = BivariateJson {
            degree: self.degree_in(0).max(self.degree_in(1)),
            terms: self
                .terms()
                .map(|(e, c)| BivariateTermJson { i: e[0], j: e[1], c: c.to_string(), ci: None })
                .collect(),
        };
        serde_json::to_value(body).expect("serializable")
    }

    pub fn from_json_value(v: &serde_json::Value) -> Result<Self> {
        let body: BivariateJson = serde_json::from_value(v.clone())?;
        let mut p = Self::new();
        for t in body.terms {
            if t.ci.as_deref().is_some_and(|s| parse_rational(s).map(|r| r != 0).unwrap_or(true)) {
                return Err(Error::Parse("imaginary coefficient in an integer polynomial".into()));
            }
            let c: Integer = t
                .c
                .trim()
                .parse()
                .map_err(|e| Error::Parse(format!("coefficient {:?}: {e}", t.c)))?;
            p.add_term([t.i, t.j], c);
        }
        Ok(p)
    }
}

impl GaussianBivariatePoly {
    /// Reads the bivariate JSON layout; `c` may be an integer, `p/q` or a
    /// decimal, and the optional `ci` carries the imaginary part.
    pub fn from_json_value(v: &serde_json::Value) -> Result<Self> {
        let body: BivariateJson = serde_json::from_value(v.clone())?;
        let mut p = Self::new();
        for t in body.terms {
            let re = parse_rational(&t.c)?;
            let im = match &t.ci {
                Some(s) => parse_rational(s)?,
                None => Rational::new(),
            };
            p.add_term([t.i, t.j], GaussianRational { re, im });
        }
        Ok(p)
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let body = BivariateJson {
            degree: self.degree_in(0).max(self.degree_in(1)),
            terms: self
                .terms()
                .map(|(e, c)| BivariateTermJson {
                    i: e[0],
                    j: e[1],
                    c: rational_to_string(&c.re),
                    ci: if c.im == 0 { None } else { Some(rational_to_string(&c.im)) },
                })
                .collect(),
        };
        serde_json::to_value(body).expect("serializable")
    }
}

impl From<&IntegerBivariatePoly> for GaussianBivariatePoly {
    fn from(p: &IntegerBivariatePoly) -> Self {
        p.map_coeffs(|c| GaussianRational::real(c.clone()))
    }
}

#[derive(Serialize, Deserialize)]
struct QuadTermJson {
    e: [u32; 4],
    c: String,
}

#[derive(Serialize, Deserialize)]
struct QuadJson {
    vars: Vec<String>,
    terms: Vec<QuadTermJson>,
}

impl RealQuadruplePoly {
    pub const VARS: [&'static str; 4] = ["X1", "Y1", "X2", "Y2"];

    pub fn to_json_value(&self) -> serde_json::Value {
        let body = QuadJson {
            vars: Self::VARS.iter().map(|s| s.to_string()).collect(),
            terms: self
                .terms()
                .map(|(e, c)| QuadTermJson { e: *e, c: rational_to_string(c) })
                .collect(),
        };
        serde_json::to_value(body).expect("serializable")
    }

    pub fn from_json_value(v: &serde_json::Value) -> Result<Self> {
        let body: QuadJson = serde_json::from_value(v.clone())?;
        if body.vars != Self::VARS {
            return Err(Error::Parse(format!("unexpected variable list {:?}", body.vars)));
        }
        let mut p = Self::new();
        for t in body.terms {
            p.add_term(t.e, parse_rational(&t.c)?);
        }
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::complex::pow2;

    fn t1_minus_t2() -> IntegerBivariatePoly {
        IntegerBivariatePoly::from_terms([([1, 0], Integer::from(1)), ([0, 1], Integer::from(-1))])
    }

    #[test]
    fn zero_coefficients_are_not_stored() {
        let mut p = t1_minus_t2();
        p.add_term([1, 0], Integer::from(-1));
        assert_eq!(p.len(), 1);
        p.add_term([7, 7], Integer::new());
        assert_eq!(p.len(), 1);
    }

    #[test]
    fn diagonal_vanishes() {
        let p = t1_minus_t2();
        let five = PrecisionComplex::from_f64(5.0, 0.0, 128);
        assert!(p.eval_horner(&five, &five).is_zero());
        assert_eq!(p.eval_integer(&Integer::from(5), &Integer::from(5)), 0);
    }

    #[test]
    fn conjugate_product() {
        let p = IntegerBivariatePoly::from_terms([([1, 1], Integer::from(1))]);
        let a = PrecisionComplex::from_f64(1.0, 1.0, 128);
        let v = p.eval_horner(&a, &a.conj());
        assert!(v.dist(&PrecisionComplex::from_f64(2.0, 0.0, 128)) < pow2(-120, 128));
    }

    #[test]
    fn horner_matches_generic_evaluation() {
        let p = IntegerBivariatePoly::from_terms([
            ([3, 0], Integer::from(1)),
            ([2, 2], Integer::from(-1)),
            ([2, 1], Integer::from(1488)),
            ([0, 0], Integer::from(-157464000000000i64)),
            ([1, 1], Integer::from(40773375)),
        ]);
        let a = PrecisionComplex::from_f64(1.25, -3.5, 192);
        let b = PrecisionComplex::from_f64(-0.75, 2.0, 192);
        let h = p.eval_horner(&a, &b);
        let g = p.eval_complex(&[a, b]);
        assert!(h.dist(&g) < pow2(-100, 192));
    }

    #[test]
    fn json_layout() {
        let p = t1_minus_t2();
        let v = p.to_json_value();
        assert_eq!(v["degree"], 1);
        assert_eq!(v["terms"].as_array().unwrap().len(), 2);
        let back = IntegerBivariatePoly::from_json_value(&v).unwrap();
        assert_eq!(back, p);
        let big = IntegerBivariatePoly::from_terms([([0, 0], Integer::from(Integer::u_pow_u(10, 60)))]);
        let v = big.to_json_value();
        assert_eq!(v["terms"][0]["c"].as_str().unwrap().len(), 61);
    }

    #[test]
    fn derivative_and_jet() {
        // x^2 y - 3y
        let p = SparsePoly::<2, Integer>::from_terms([([2, 1], Integer::from(1)), ([0, 1], Integer::from(-3))]);
        let jet = p.eval_real_jet(&[Float::with_val(64, 2), Float::with_val(64, 5)], 128);
        assert_eq!(jet.value, 5);
        assert_eq!(jet.grad[0], 20);
        assert_eq!(jet.grad[1], 1);
        assert_eq!(jet.scale, 35);
        assert_eq!(p.derivative(0), SparsePoly::from_terms([([1, 1], Integer::from(2))]));
    }

    #[test]
    fn reduce_mod_and_symmetry() {
        let p = IntegerBivariatePoly::from_terms([([1, 0], Integer::from(3)), ([0, 1], Integer::from(-3)), ([1, 1], Integer::from(5))]);
        let r = p.reduce_mod(3);
        assert_eq!(r.len(), 1);
        assert!(!p.is_symmetric());
        assert!(r.is_symmetric());
    }
}
