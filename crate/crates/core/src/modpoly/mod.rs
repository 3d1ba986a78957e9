//! Classical modular polynomials `Φ_N` by evaluation and interpolation over
//! the j-line.

mod cache;

use rayon::prelude::*;
use rug::{Float, Integer};

use crate::error::{Error, Result};
use crate::modular_forms::{j_eval, UpperHalfPoint};
use crate::numeric::{
    from_roots, mobius_apply, newton_interpolate, pi, pow2, GaussianBivariatePoly, GaussianRational,
    IntegerBivariatePoly, PrecisionComplex, RationalMatrix2,
};

pub use cache::{default_cache_dir, ModularCache, CACHE_VERSION, DEFAULT_MAX_LEVEL};

/// Starting precision for the interpolation; doubled on rounding failure.
pub const START_PREC: u32 = 300;

/// Precision ceiling for the escalation loop.
pub const DEFAULT_MAX_PREC: u32 = 9600;

/// `Φ_N` together with its level.
#[derive(Clone, Debug, PartialEq)]
pub struct ModularPolynomial {
    pub level: u32,
    pub poly: IntegerBivariatePoly,
    /// Largest rounding residual seen in the final interpolation (0 if loaded).
    pub max_residual: f64,
    /// Precision at which rounding succeeded.
    pub prec: u32,
}

impl ModularPolynomial {
    pub fn psi(&self) -> u32 {
        psi(self.level)
    }
}

/// Upper-triangular representatives `(a, b, d)` of the cyclic sublattices of index `N`.
pub fn cyclic_isogeny_matrices(n: u32) -> Vec<(u32, u32, u32)> {
    assert!(n >= 1, "level must be positive");
    let mut out = Vec::new();
    for a in 1..=n {
        if n % a != 0 {
            continue;
        }
        let d = n / a;
        for b in 0..d {
            if gcd(gcd(a, b), d) == 1 {
                out.push((a, b, d));
            }
        }
    }
    out
}

fn gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Dedekind psi: `N ∏_{p | N} (1 + 1/p)`.
pub fn psi(n: u32) -> u32 {
    let mut m = n;
    let mut r = n;
    let mut p = 2;
    while p * p <= m {
        if m % p == 0 {
            r = r / p * (p + 1);
            while m % p == 0 {
                m /= p;
            }
        }
        p += 1;
    }
    if m > 1 {
        r = r / m * (m + 1);
    }
    r
}

/// Sample points on `re z = 1/π` with `|q|` spread geometrically over `[1e-8, 1e-2]`.
fn sample_points(count: usize, prec: u32) -> Vec<PrecisionComplex> {
    let two_pi = Float::with_val(prec, pi(prec) * 2u32);
    let x = Float::with_val(prec, pi(prec).recip_ref());
    let lo = Float::with_val(prec, Float::with_val(prec, 100u32).ln() / &two_pi);
    let hi = Float::with_val(prec, Float::with_val(prec, 100_000_000u32).ln() / &two_pi);
    (0..count)
        .map(|k| {
            let t = Float::with_val(prec, k) / Float::with_val(prec, count.max(2) - 1);
            let y = Float::with_val(prec, &lo + Float::with_val(prec, &hi - &lo) * t);
            PrecisionComplex::new(x.clone(), y)
        })
        .collect()
}

/// `(j(z), coefficients of ∏(Y − j((az+b)/d)))` at one sample.
fn sample_row(z: &PrecisionComplex, mats: &[RationalMatrix2], prec: u32) -> Result<(PrecisionComplex, Vec<PrecisionComplex>)> {
    let x = j_eval(&UpperHalfPoint::new(z.clone())?);
    let mut roots = Vec::with_capacity(mats.len());
    for m in mats {
        let w = mobius_apply(m, z)?;
        roots.push(j_eval(&UpperHalfPoint::new(w)?));
    }
    Ok((x, from_roots(&roots, prec)))
}

fn isogeny_mobius(n: u32) -> Vec<RationalMatrix2> {
    cyclic_isogeny_matrices(n)
        .into_iter()
        .map(|(a, b, d)| RationalMatrix2::new(a, b, 0, d))
        .collect()
}

/// Nearest integer to `x` and the distance to it.
fn round_with_residual(x: &Float) -> (Integer, f64) {
    let r = Float::with_val(x.prec(), x.round_ref());
    let resid = Float::with_val(x.prec(), x - &r).abs().to_f64();
    (r.to_integer().unwrap_or_default(), resid)
}

/// One interpolation attempt at a fixed precision.
///
/// Returns the rounded polynomial and the worst residual, or `None` when a
/// residual reaches 1/4 or the validation sample disagrees.
pub(crate) fn interpolate_at(n: u32, prec: u32) -> Result<Option<(IntegerBivariatePoly, f64)>> {
    let mats = isogeny_mobius(n);
    let deg = mats.len();
    let work = prec + 32;
    let zs = sample_points(deg + 2, work);
    let rows: Vec<(PrecisionComplex, Vec<PrecisionComplex>)> = zs
        .par_iter()
        .map(|z| sample_row(z, &mats, work))
        .collect::<Result<_>>()?;
    let (validation, fit) = rows.split_last().expect("at least two samples");
    let xs: Vec<PrecisionComplex> = fit.iter().map(|(x, _)| x.clone()).collect();

    let mut poly = IntegerBivariatePoly::new();
    let mut worst = 0.0f64;
    for m in 0..=deg {
        let ys: Vec<PrecisionComplex> = fit.iter().map(|(_, c)| c[m].clone()).collect();
        let coeffs = newton_interpolate(&xs, &ys);
        for (k, c) in coeffs.iter().enumerate() {
            let (re, r1) = round_with_residual(c.re());
            let r2 = c.im().to_f64().abs();
            let r = r1.max(r2);
            if !(r < 0.25) {
                return Ok(None);
            }
            worst = worst.max(r);
            poly.add_term([k as u32, m as u32], re);
        }
    }
    // independent check at the held-out sample
    let (vx, vc) = validation;
    let vx_abs = vx.abs();
    for (m, want) in vc.iter().enumerate() {
        let mut got = PrecisionComplex::zero(work);
        let mut scale = Float::with_val(64, 0);
        for k in (0..=deg as u32).rev() {
            got = &got * vx;
            scale *= &vx_abs;
            if let Some(c) = poly.coeff(&[k, m as u32]) {
                got = &got + &PrecisionComplex::from_integer(c, work);
                scale += Float::with_val(64, c).abs();
            }
        }
        let tol = Float::with_val(64, &scale * pow2(-(prec as i32) / 4, 64)) + 1u32;
        if got.dist(want) > tol {
            return Ok(None);
        }
    }
    if n == 1 {
        poly = poly.neg();
    }
    Ok(Some((poly, worst)))
}

/// Computes `Φ_N` without any cache, doubling the precision from
/// [`START_PREC`] until every coefficient rounds cleanly.
pub fn compute_modpoly(n: u32, max_prec: u32) -> Result<ModularPolynomial> {
    if n == 0 {
        return Err(Error::Precondition("level must be positive".into()));
    }
    let mut prec = START_PREC;
    loop {
        if let Some((poly, worst)) = interpolate_at(n, prec)? {
            return Ok(ModularPolynomial { level: n, poly, max_residual: worst, prec });
        }
        if prec >= max_prec {
            return Err(Error::PrecisionExhausted { level: n, prec });
        }
        prec = (prec * 2).min(max_prec);
    }
}

/// `Φ_N` from the process-wide cache.
pub fn modpoly(n: u32) -> Result<std::sync::Arc<ModularPolynomial>> {
    ModularCache::global().modpoly(n)
}

/// True when `p = λ·q` for some nonzero Gaussian rational `λ`.
pub fn is_proportional(p: &GaussianBivariatePoly, q: &IntegerBivariatePoly) -> bool {
    if p.len() != q.len() || q.is_zero() {
        return false;
    }
    let (e0, c0) = q.terms().next().expect("nonzero");
    let Some(p0) = p.coeff(e0) else { return false };
    let inv = GaussianRational::real(rug::Rational::from(c0.clone()))
        .inverse()
        .expect("nonzero coefficient");
    let lambda = p0 * &inv;
    q.terms().all(|(e, c)| {
        p.coeff(e)
            .is_some_and(|pc| *pc == &lambda * &GaussianRational::real(rug::Rational::from(c.clone())))
    })
}

/// `Some(N)` for the least `N ≤ nmax` with `P` a nonzero scalar multiple of `Φ_N`.
///
/// Only levels whose `ψ(N)` matches the degrees of `P` are computed.
pub fn is_strongly_special_equation(
    p: &IntegerBivariatePoly,
    nmax: u32,
    cache: &ModularCache,
) -> Result<Option<u32>> {
    is_strongly_special_gaussian(&GaussianBivariatePoly::from(p), nmax, cache)
}

/// As [`is_strongly_special_equation`] for Gaussian-rational coefficients.
pub fn is_strongly_special_gaussian(
    p: &GaussianBivariatePoly,
    nmax: u32,
    cache: &ModularCache,
) -> Result<Option<u32>> {
    if p.is_zero() {
        return Err(Error::Precondition("polynomial is zero".into()));
    }
    let (d1, d2) = (p.degree_in(0), p.degree_in(1));
    if d1 != d2 {
        return Ok(None);
    }
    for n in 1..=nmax {
        if psi(n) != d1 {
            continue;
        }
        let phi = cache.modpoly(n)?;
        if is_proportional(p, &phi.poly) {
            return Ok(Some(n));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn isogeny_triples() {
        assert_eq!(cyclic_isogeny_matrices(1), vec![(1, 0, 1)]);
        let mut t2 = cyclic_isogeny_matrices(2);
        t2.sort();
        assert_eq!(t2, vec![(1, 0, 2), (1, 1, 2), (2, 0, 1)]);
        let t4 = cyclic_isogeny_matrices(4);
        assert_eq!(t4.len(), 6);
        assert!(!t4.contains(&(2, 0, 2)));
        for n in 1..=30 {
            assert_eq!(cyclic_isogeny_matrices(n).len() as u32, psi(n), "N = {n}");
        }
    }

    #[test]
    fn psi_values() {
        let want = [1, 3, 4, 6, 6, 12, 8, 12, 12, 18, 12, 24];
        for (k, w) in want.iter().enumerate() {
            assert_eq!(psi(k as u32 + 1), *w);
        }
    }

    #[test]
    fn level_one_convention() {
        let p = compute_modpoly(1, 600).unwrap();
        let want = IntegerBivariatePoly::from_terms([([1, 0], Integer::from(1)), ([0, 1], Integer::from(-1))]);
        assert_eq!(p.poly, want);
    }

    #[test]
    fn level_two_matches_known_coefficients() {
        let p = compute_modpoly(2, DEFAULT_MAX_PREC).unwrap();
        let c = |i: u32, j: u32| p.poly.coeff(&[i, j]).cloned().unwrap_or_default();
        assert_eq!(c(3, 0), 1);
        assert_eq!(c(2, 2), -1);
        assert_eq!(c(2, 1), 1488);
        assert_eq!(c(1, 1), 40773375);
        assert_eq!(c(1, 0), 8748000000u64);
        assert_eq!(c(2, 0), -162000);
        assert_eq!(c(0, 0), Integer::from(-157464000000000i64));
        assert_eq!(p.poly.len(), 11);
        assert!(p.max_residual < 0.25);
    }

    #[test]
    fn vanishes_on_isogenous_pair() {
        let p = compute_modpoly(2, DEFAULT_MAX_PREC).unwrap();
        let prec = 192;
        let v = p.poly.eval_horner(
            &PrecisionComplex::from_f64(1728.0, 0.0, prec),
            &PrecisionComplex::from_f64(287496.0, 0.0, prec),
        );
        assert!(v.abs() <= pow2(-(prec as i32) + 40, prec));
        // j(i√2) = 8000 is a root of Φ₂(w, w)
        assert!(p.poly.eval_integer(&Integer::from(8000), &Integer::from(8000)) == 0);
    }

    #[test]
    fn proportionality() {
        let cache = ModularCache::in_memory();
        let phi1 = IntegerBivariatePoly::from_terms([([1, 0], Integer::from(7)), ([0, 1], Integer::from(-7))]);
        assert_eq!(is_strongly_special_equation(&phi1, 5, &cache).unwrap(), Some(1));
        let line = IntegerBivariatePoly::from_terms([
            ([1, 0], Integer::from(1)),
            ([0, 1], Integer::from(1)),
            ([0, 0], Integer::from(-1)),
        ]);
        assert_eq!(is_strongly_special_equation(&line, 10, &cache).unwrap(), None);
        let phi2 = cache.modpoly(2).unwrap();
        assert_eq!(is_strongly_special_equation(&phi2.poly, 5, &cache).unwrap(), Some(2));
        let scaled = GaussianBivariatePoly::from(&phi2.poly)
            .scale(&GaussianRational::new(rug::Rational::from((2, 3)), 5));
        assert_eq!(is_strongly_special_gaussian(&scaled, 5, &cache).unwrap(), Some(2));
    }
}
