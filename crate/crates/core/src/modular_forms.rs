//! The j-invariant on the upper half-plane.
//!
//! `j = E4³ / Δ` with `Δ = q ∏(1 − qⁿ)²⁴`, evaluated after reduction to the
//! standard fundamental domain so that `|q| ≤ e^{−π√3}`.

use std::sync::OnceLock;

use rug::{Float, Integer};
#[cfg(test)]
use rug::ops::Pow;

use crate::error::{Error, Result};
use crate::numeric::{pi, pow2, PrecisionComplex, RationalMatrix2};

/// A point `z` of the upper half-plane (`im z > 0`).
#[derive(Clone, Debug, PartialEq)]
pub struct UpperHalfPoint(PrecisionComplex);

impl UpperHalfPoint {
    pub fn new(z: PrecisionComplex) -> Result<Self> {
        if z.im().is_sign_positive() && !z.im().is_zero() && z.is_finite() {
            Ok(Self(z))
        } else {
            Err(Error::NotInUpperHalfPlane)
        }
    }

    pub fn from_f64(re: f64, im: f64, prec: u32) -> Result<Self> {
        Self::new(PrecisionComplex::from_f64(re, im, prec))
    }

    pub fn z(&self) -> &PrecisionComplex {
        &self.0
    }

    pub fn into_inner(self) -> PrecisionComplex {
        self.0
    }

    pub fn prec(&self) -> u32 {
        self.0.prec()
    }

    /// `−z̄`, the reflection in the imaginary axis.
    pub fn reflect(&self) -> Self {
        Self(-self.0.conj())
    }
}

const TABLE_LEN: usize = 1 << 14;

struct DivisorSums {
    sigma3: Vec<u64>,
    sigma5: Vec<u128>,
    /// Coefficients of the Euler product ∏(1 − qⁿ) (pentagonal numbers).
    euler: Vec<i8>,
}

fn tables() -> &'static DivisorSums {
    static T: OnceLock<DivisorSums> = OnceLock::new();
    T.get_or_init(|| {
        let mut sigma3 = vec![0u64; TABLE_LEN];
        let mut sigma5 = vec![0u128; TABLE_LEN];
        for d in 1..TABLE_LEN {
            let d3 = (d as u64).pow(3);
            let d5 = (d as u128).pow(5);
            let mut m = d;
            while m < TABLE_LEN {
                sigma3[m] += d3;
                sigma5[m] += d5;
                m += d;
            }
        }
        let mut euler = vec![0i8; TABLE_LEN];
        euler[0] = 1;
        let mut k: i64 = 1;
        loop {
            let sign = if k % 2 == 0 { 1 } else { -1 };
            let a = (k * (3 * k - 1) / 2) as usize;
            let b = (k * (3 * k + 1) / 2) as usize;
            if a >= TABLE_LEN {
                break;
            }
            euler[a] = sign;
            if b < TABLE_LEN {
                euler[b] = sign;
            }
            k += 1;
        }
        DivisorSums { sigma3, sigma5, euler }
    })
}

/// Number of q-series terms so the tail `Σ_{n>K} n⁶|q|ⁿ` is below `2^−bits`.
fn terms_needed(log2_q: f64, bits: u32) -> usize {
    let target = -(bits as f64) - 2.0;
    let mut k = 1usize;
    loop {
        let n = (k + 1) as f64;
        if 6.0 * n.log2() + n * log2_q + 1.0 < target {
            return k;
        }
        k += 1;
        assert!(k < TABLE_LEN, "q-series needs more than {TABLE_LEN} terms");
    }
}

/// `E4`, `E6` and `Δ` at `q`.
struct SeriesValues {
    e4: PrecisionComplex,
    e6: PrecisionComplex,
    delta: PrecisionComplex,
}

fn series_at(q: &PrecisionComplex, log2_q: f64, work: u32) -> SeriesValues {
    let t = tables();
    let k = terms_needed(log2_q, work);
    let mut s3 = PrecisionComplex::zero(work);
    let mut s5 = PrecisionComplex::zero(work);
    let mut eta = PrecisionComplex::zero(work);
    for n in (1..=k).rev() {
        let a3 = PrecisionComplex::from_integer(&Integer::from(t.sigma3[n]), work);
        let a5 = PrecisionComplex::from_integer(&Integer::from(t.sigma5[n]), work);
        s3 = &(&s3 + &a3) * q;
        s5 = &(&s5 + &a5) * q;
        let e = t.euler[n];
        if e != 0 {
            eta = &eta + &PrecisionComplex::from_f64(e as f64, 0.0, work);
        }
        eta = &eta * q;
    }
    eta = &eta + &PrecisionComplex::one(work);
    let one = PrecisionComplex::one(work);
    let e4 = &one + &s3.scale_integer(&Integer::from(240));
    let e6 = &one - &s5.scale_integer(&Integer::from(504));
    let eta2 = eta.square();
    let eta4 = eta2.square();
    let eta8 = eta4.square();
    let eta16 = eta8.square();
    let delta = &(&eta16 * &eta8) * q;
    SeriesValues { e4, e6, delta }
}

/// `exp(2πi z)` together with `log2 |q|`.
fn nome(z: &PrecisionComplex, work: u32) -> (PrecisionComplex, f64) {
    let two_pi = Float::with_val(work, pi(work) * 2u32);
    let arg = PrecisionComplex::new(
        -Float::with_val(work, &two_pi * z.im()),
        Float::with_val(work, &two_pi * z.re()),
    );
    let log2_q = -(two_pi.to_f64() * z.im().to_f64()) * std::f64::consts::LOG2_E;
    (arg.exp(), log2_q)
}

/// Reduces `z` into the standard fundamental domain `|re z| ≤ 1/2, |z| ≥ 1`.
///
/// Returns `(z', γ)` with `γ ∈ SL₂(ℤ)` and `γz = z'`. Boundary points are
/// resolved towards `re z' ≤ 0`.
pub fn reduce_to_fundamental_domain(z: &UpperHalfPoint) -> Result<(UpperHalfPoint, RationalMatrix2)> {
    let p = z.prec();
    let work = p + 16;
    let (w, g) = reduce_raw(z.z(), work, 10 * p as usize)?;
    Ok((UpperHalfPoint(w.with_prec(p)), g))
}

fn reduce_raw(
    z: &PrecisionComplex,
    work: u32,
    max_steps: usize,
) -> Result<(PrecisionComplex, RationalMatrix2)> {
    let tol = pow2(-(work as i32) + 24, work);
    let mut re = Float::with_val(work, z.re());
    let mut im = Float::with_val(work, z.im());
    // γ tracked as integer entries (a b; c d)
    let mut g = [Integer::from(1), Integer::new(), Integer::new(), Integer::from(1)];
    let mut steps = 0usize;
    loop {
        let shifted = Float::with_val(work, &re + 0.5f64);
        let n = shifted.floor().to_integer().unwrap_or_default();
        if n != 0 {
            re -= &n;
            // T^{-n} γ: a -= n c, b -= n d
            g[0] -= Integer::from(&n * &g[2]);
            g[1] -= Integer::from(&n * &g[3]);
        }
        let r2 = Float::with_val(work, &re * &re + &im * &im);
        if r2 < Float::with_val(work, 1 - &tol) {
            // S: z -> -1/z
            re = -Float::with_val(work, &re / &r2);
            im = Float::with_val(work, &im / &r2);
            // S γ = (-c -d; a b)
            let [a, b, c, d] = g;
            g = [-c, -d, a, b];
        } else {
            break;
        }
        steps += 1;
        if steps > max_steps {
            return Err(Error::NonConvergence(format!(
                "fundamental-domain reduction exceeded {max_steps} steps"
            )));
        }
    }
    // Boundary tie-breaks: prefer re z <= 0.
    let half = Float::with_val(work, 0.5f64);
    if Float::with_val(work, &re - &half).abs() <= tol {
        re -= 1u32;
        let (c, d) = (g[2].clone(), g[3].clone());
        g[0] -= c;
        g[1] -= d;
    }
    let r2 = Float::with_val(work, &re * &re + &im * &im);
    if Float::with_val(work, &r2 - 1u32).abs() <= tol && re > tol {
        re = -Float::with_val(work, &re / &r2);
        im = Float::with_val(work, &im / &r2);
        let [a, b, c, d] = g;
        g = [-c, -d, a, b];
    }
    let [a, b, c, d] = g;
    Ok((PrecisionComplex::new(re, im), RationalMatrix2::new(a, b, c, d)))
}

/// `j(z)`, `j'(z)` at a point already inside the fundamental domain.
fn j_and_derivative_reduced(z: &PrecisionComplex, work: u32) -> (PrecisionComplex, PrecisionComplex) {
    let (q, log2_q) = nome(z, work);
    if log2_q < -(work as f64) - 24.0 || q.is_zero() {
        // cusp: j ≈ 1/q + 744, dj/dz ≈ −2πi/q
        let inv_q = cusp_inverse_nome(z, work);
        let j = &inv_q + &PrecisionComplex::from_f64(744.0, 0.0, work);
        let two_pi = Float::with_val(work, pi(work) * 2u32);
        let minus_two_pi_i = PrecisionComplex::new(Float::new(work), -two_pi);
        return (j, &minus_two_pi_i * &inv_q);
    }
    let s = series_at(&q, log2_q, work);
    let e4_2 = s.e4.square();
    let j = &(&e4_2 * &s.e4) / &s.delta;
    let two_pi = Float::with_val(work, pi(work) * 2u32);
    let minus_two_pi_i = PrecisionComplex::new(Float::new(work), -two_pi);
    let dj = &(&minus_two_pi_i * &(&e4_2 * &s.e6)) / &s.delta;
    (j, dj)
}

/// `exp(−2πi z)` computed directly (no underflow through `q`).
fn cusp_inverse_nome(z: &PrecisionComplex, work: u32) -> PrecisionComplex {
    let two_pi = Float::with_val(work, pi(work) * 2u32);
    PrecisionComplex::new(
        Float::with_val(work, &two_pi * z.im()),
        -Float::with_val(work, &two_pi * z.re()),
    )
    .exp()
}

/// The j-invariant at `z`.
pub fn j_eval(z: &UpperHalfPoint) -> PrecisionComplex {
    let p = z.prec();
    let work = p + 24;
    let (w, _) = reduce_raw(z.z(), work, 10 * work as usize)
        .expect("reduction of a finite point of H terminates");
    j_and_derivative_reduced(&w, work).0.with_prec(p)
}

/// `(j(z'), j'(z'), z')` where `z'` is the fundamental-domain representative of `z`.
pub fn j_eval_with_derivative(z: &UpperHalfPoint) -> (PrecisionComplex, PrecisionComplex, UpperHalfPoint) {
    let p = z.prec();
    let work = p + 24;
    let (w, _) = reduce_raw(z.z(), work, 10 * work as usize)
        .expect("reduction of a finite point of H terminates");
    let (j, dj) = j_and_derivative_reduced(&w, work);
    (j.with_prec(p), dj.with_prec(p), UpperHalfPoint(w.with_prec(p)))
}

/// `E4(z)` and `E6(z)` (no reduction; requires `|q|` small enough to converge).
pub fn eisenstein_e4_e6(z: &UpperHalfPoint) -> (PrecisionComplex, PrecisionComplex) {
    let p = z.prec();
    let work = p + 24;
    let (q, log2_q) = nome(z.z(), work);
    let s = series_at(&q, log2_q, work);
    (s.e4.with_prec(p), s.e6.with_prec(p))
}

/// Solves `j(z) = c` for `z` in the standard fundamental domain.
pub fn j_inverse(c: &PrecisionComplex) -> Result<UpperHalfPoint> {
    let p = c.prec();
    // the ramified values, where Newton only recovers a third or half of the bits
    if c.im().is_zero() && c.re().is_zero() {
        let half = Float::with_val(p, 0.5);
        let im = Float::with_val(p, 3u32).sqrt() / 2u32;
        return UpperHalfPoint::new(PrecisionComplex::new(-half, im));
    }
    if c.im().is_zero() && *c.re() == 1728 {
        return UpperHalfPoint::new(PrecisionComplex::i(p));
    }
    let work = p + 32;
    let c_work = c.with_prec(work);
    let scale = c.abs_f64().max(1.0);

    let mut seeds: Vec<PrecisionComplex> = Vec::new();
    if c.abs_f64() > 2000.0 {
        // q ≈ 1/(c − 744)
        let q0 = (&c_work - &PrecisionComplex::from_f64(744.0, 0.0, work)).recip();
        let two_pi = Float::with_val(work, pi(work) * 2u32);
        let ln_q = q0.ln();
        // z = ln q / (2πi) = −i ln q / 2π
        let z0 = PrecisionComplex::new(
            Float::with_val(work, ln_q.im() / &two_pi),
            -Float::with_val(work, ln_q.re() / &two_pi),
        );
        if z0.im().is_sign_positive() && !z0.im().is_zero() {
            seeds.push(z0);
        }
    }
    for &n in &[16usize, 64] {
        let mut candidates = seeds.clone();
        candidates.extend(grid_seeds(c, n));
        for z0 in candidates.iter().take(if n == 16 { 8 } else { 16 }) {
            if let Some(z) = newton_j(&c_work, z0, work) {
                let (w, _) = reduce_raw(&z, work, 10 * work as usize)?;
                let w = UpperHalfPoint(w.with_prec(p));
                let resid = j_eval(&UpperHalfPoint(w.z().with_prec(work))).dist(&c_work);
                if resid <= Float::with_val(work, pow2(-(p as i32) / 2, work) * scale) {
                    return Ok(w);
                }
            }
        }
        seeds.clear();
    }
    Err(Error::NonConvergence(format!("j_inverse: all seeds failed for c = {c:?}")))
}

/// Grid over the truncated fundamental domain, sorted by `|j(z) − c|`.
fn grid_seeds(c: &PrecisionComplex, n: usize) -> Vec<PrecisionComplex> {
    let lo = 3f64.sqrt() / 2.0;
    let hi = ((c.abs_f64().max(1.0)).ln() / (2.0 * std::f64::consts::PI) + 1.0).max(2.0);
    let c64 = c.with_prec(64);
    let mut scored: Vec<(f64, PrecisionComplex)> = Vec::with_capacity(n * n);
    for a in 0..n {
        for b in 0..n {
            let x = -0.5 + (a as f64 + 0.5) / n as f64;
            let y = lo + (hi - lo) * (b as f64 + 0.5) / n as f64;
            if x * x + y * y < 1.0 {
                continue;
            }
            let z = PrecisionComplex::from_f64(x, y, 64);
            let jz = j_eval(&UpperHalfPoint(z.clone()));
            let d = jz.dist(&c64).to_f64();
            scored.push((if d.is_finite() { d } else { f64::MAX }, z));
        }
    }
    scored.sort_by(|a, b| a.0.total_cmp(&b.0));
    scored.into_iter().map(|(_, z)| z).collect()
}

fn newton_j(c: &PrecisionComplex, z0: &PrecisionComplex, work: u32) -> Option<PrecisionComplex> {
    let scale = c.abs_f64().max(1.0);
    let target = pow2(-(work as i32) + 24, 64).to_f64() * scale;
    let mut z = z0.with_prec(work);
    let (w, _) = reduce_raw(&z, work, 10 * work as usize).ok()?;
    z = w;
    let (mut jz, mut dj) = j_and_derivative_reduced(&z, work);
    let mut resid = jz.dist(c).to_f64();
    for _ in 0..(8 * work as usize) {
        if resid <= target {
            return Some(z);
        }
        if dj.is_zero() || !dj.is_finite() {
            return None;
        }
        let step = &(&jz - c) / &dj;
        let mut t = 1.0f64;
        let mut accepted = false;
        for _ in 0..40 {
            let trial = &z - &step.scale(&Float::with_val(work, t));
            if trial.im().is_sign_positive() && !trial.im().is_zero() && trial.is_finite() {
                if let Ok((w, _)) = reduce_raw(&trial, work, 10 * work as usize) {
                    let (jw, djw) = j_and_derivative_reduced(&w, work);
                    let r = jw.dist(c).to_f64();
                    if r < resid || r <= target {
                        z = w;
                        jz = jw;
                        dj = djw;
                        resid = r;
                        accepted = true;
                        break;
                    }
                }
            }
            t *= 0.5;
        }
        if !accepted {
            // stalled at the rounding floor
            let floor = pow2(-(work as i32) / 2, 64).to_f64() * scale;
            return (resid <= floor).then_some(z);
        }
    }
    None
}

/// Standard CM point of discriminant `D`: `(δ + √D)/2` with `δ ≡ D (mod 2)`.
pub fn cm_point(d: i64, prec: u32) -> Result<UpperHalfPoint> {
    if d >= 0 || !(d.rem_euclid(4) == 0 || d.rem_euclid(4) == 1) {
        return Err(Error::InvalidDiscriminant(format!(
            "{d}: need D < 0 and D ≡ 0, 1 (mod 4)"
        )));
    }
    let work = prec + 8;
    let delta = if d.rem_euclid(2) == 0 { 0.0 } else { 0.5 };
    let im = Float::with_val(work, Float::with_val(work, -d).sqrt() / 2u32);
    UpperHalfPoint::new(PrecisionComplex::new(Float::with_val(work, delta), im).with_prec(prec))
}

/// j-value of the CM point of discriminant `D`.
pub fn heegner_j(d: i64, prec: u32) -> Result<PrecisionComplex> {
    Ok(j_eval(&cm_point(d, prec)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(re: f64, im: f64) -> UpperHalfPoint {
        UpperHalfPoint::from_f64(re, im, 192).unwrap()
    }

    fn assert_close(a: &PrecisionComplex, re: f64, im: f64, bits: i32) {
        let d = a.dist(&PrecisionComplex::from_f64(re, im, a.prec()));
        assert!(d <= pow2(bits, a.prec()), "{a:?} vs {re}+{im}i: {}", d.to_f64());
    }

    #[test]
    fn reduction_already_reduced() {
        let (w, g) = reduce_to_fundamental_domain(&pt(0.0, 2.0)).unwrap();
        assert_eq!(g, RationalMatrix2::identity());
        assert_close(w.z(), 0.0, 2.0, -180);
    }

    #[test]
    fn reduction_translation() {
        let (w, g) = reduce_to_fundamental_domain(&pt(5.0, 1.0)).unwrap();
        assert_eq!(g, RationalMatrix2::translation(-5));
        assert_close(w.z(), 0.0, 1.0, -180);
    }

    #[test]
    fn reduction_general_point() {
        let z = pt(0.3, 0.1);
        let (w, g) = reduce_to_fundamental_domain(&z).unwrap();
        assert_eq!(g.det(), 1);
        let re = w.z().re().to_f64();
        assert!(re.abs() <= 0.5 + 1e-40);
        assert!(w.z().abs().to_f64() >= 1.0 - 1e-40);
        let image = crate::numeric::mobius_apply(&g, z.z()).unwrap();
        assert!(image.dist(w.z()) <= pow2(-184, 192));
    }

    #[test]
    fn boundary_tie_breaks() {
        // re = +1/2 moves to -1/2
        let z = UpperHalfPoint::new(PrecisionComplex::new(
            Float::with_val(192, 0.5),
            Float::with_val(192, 3u32).sqrt() / 2u32,
        ))
        .unwrap();
        let (w, _) = reduce_to_fundamental_domain(&z).unwrap();
        assert!(w.z().re().to_f64() < 0.0);
        // a point on the unit arc with re > 0 goes to re < 0
        let arc = UpperHalfPoint::new(PrecisionComplex::new(
            Float::with_val(192, 0.3),
            Float::with_val(192, 1 - Float::with_val(192, 0.3).square()).sqrt(),
        ))
        .unwrap();
        let (w, _) = reduce_to_fundamental_domain(&arc).unwrap();
        assert!((w.z().re().to_f64() + 0.3).abs() < 1e-15, "{w:?}");
    }

    #[test]
    fn e6_vanishes_at_i_and_e4_at_rho() {
        let i = pt(0.0, 1.0);
        let (_, e6) = eisenstein_e4_e6(&i);
        assert!(e6.abs() <= pow2(-180, 192));
        let rho = cm_point(-3, 192).unwrap();
        let (e4, _) = eisenstein_e4_e6(&rho);
        assert!(e4.abs() <= pow2(-180, 192));
    }

    #[test]
    fn special_values() {
        assert_close(&j_eval(&pt(0.0, 1.0)), 1728.0, 0.0, -192 + 16);
        assert_close(&j_eval(&cm_point(-3, 192).unwrap()), 0.0, 0.0, -192 + 16);
        assert_close(&j_eval(&cm_point(-8, 192).unwrap()), 8000.0, 0.0, -192 + 16);
        assert_close(&j_eval(&pt(0.0, 2.0)), 287496.0, 0.0, -192 + 24);
    }

    #[test]
    fn cusp_branch_matches_leading_terms() {
        let z = pt(0.1, 40.0);
        let j = j_eval(&z);
        let inv_q = cusp_inverse_nome(z.z(), 192);
        let approx = &inv_q + &PrecisionComplex::from_f64(744.0, 0.0, 192);
        let rel = Float::with_val(192, j.dist(&approx) / inv_q.abs()).to_f64();
        assert!(rel < 1e-50, "{rel}");
        // deep in the cusp the leading-term branch is taken
        let far = pt(0.25, 1.0e4);
        let jf = j_eval(&far);
        assert!(jf.is_finite());
        let rel = Float::with_val(192, jf.dist(&cusp_inverse_nome(far.z(), 192)) / jf.abs()).to_f64();
        assert!(rel < 1e-50, "{rel}");
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let z = pt(0.21, 1.3);
        let (_, dj, _) = j_eval_with_derivative(&z);
        let h = pow2(-100, 192);
        let hc = PrecisionComplex::from_real(h.clone());
        let zp = UpperHalfPoint::new(z.z() + &hc).unwrap();
        let zm = UpperHalfPoint::new(z.z() - &hc).unwrap();
        let fd = (&j_eval(&zp) - &j_eval(&zm)).scale(&Float::with_val(192, 0.5 / &h));
        let rel = Float::with_val(192, fd.dist(&dj) / dj.abs()).to_f64();
        assert!(rel < 1e-25, "{rel}");
    }

    #[test]
    fn inverse_special_values() {
        let p = 192;
        let z = j_inverse(&PrecisionComplex::from_f64(1728.0, 0.0, p)).unwrap();
        assert_close(z.z(), 0.0, 1.0, -(p as i32) / 4);
        let z = j_inverse(&PrecisionComplex::zero(p)).unwrap();
        let rho_left = PrecisionComplex::from_f64(-0.5, 3f64.sqrt() / 2.0, 64);
        let rho_right = PrecisionComplex::from_f64(0.5, 3f64.sqrt() / 2.0, 64);
        let zz = z.z().with_prec(64);
        assert!(zz.dist(&rho_left).to_f64().min(zz.dist(&rho_right).to_f64()) < 1e-12);
        let c = PrecisionComplex::from_f64(8000.0, 0.0, p);
        let z = j_inverse(&c).unwrap();
        assert!(j_eval(&z).dist(&c) <= pow2(-(p as i32) / 2, p));
        let want = PrecisionComplex::new(Float::new(p), Float::with_val(p, 2).sqrt());
        assert!(z.z().dist(&want) <= pow2(-60, p));
    }

    #[test]
    fn inverse_of_large_and_negative_values() {
        for (re, im) in [(-5.0e7, 3.0e6), (1.0e12, 0.0), (-3000.0, 0.0), (100.0, -40.0)] {
            let c = PrecisionComplex::from_f64(re, im, 192);
            let z = j_inverse(&c).unwrap();
            let scale = c.abs_f64().max(1.0);
            assert!(j_eval(&z).dist(&c).to_f64() <= 2f64.powi(-96) * scale);
        }
    }

    #[test]
    fn heegner_values() {
        assert_close(&heegner_j(-4, 192).unwrap(), 1728.0, 0.0, -170);
        assert_close(&heegner_j(-3, 192).unwrap(), 0.0, 0.0, -170);
        assert_close(&heegner_j(-8, 192).unwrap(), 8000.0, 0.0, -170);
        // class number one: j((1+√−163)/2) = −640320³
        let j163 = heegner_j(-163, 256).unwrap();
        let want = Integer::from(640320u32).pow(3u32);
        let d = Float::with_val(256, j163.re() + &want).abs().to_f64();
        assert!(d < 1e-30, "{d}");
        assert!(matches!(heegner_j(-5, 192), Err(Error::InvalidDiscriminant(_))));
        assert!(matches!(heegner_j(4, 192), Err(Error::InvalidDiscriminant(_))));
    }
}
