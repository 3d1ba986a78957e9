//! Dense univariate helpers over [`PrecisionComplex`]: root finding,
//! Sylvester resultants, products of linear factors and interpolation.
//! Coefficient vectors are in ascending degree order.

use rug::Float;

use super::complex::{pow2, PrecisionComplex};

pub fn horner(coeffs: &[PrecisionComplex], x: &PrecisionComplex) -> PrecisionComplex {
    let mut acc = PrecisionComplex::zero(x.prec());
    for c in coeffs.iter().rev() {
        acc = &(&acc * x) + c;
    }
    acc
}

/// Value and first derivative.
pub fn horner_with_derivative(
    coeffs: &[PrecisionComplex],
    x: &PrecisionComplex,
) -> (PrecisionComplex, PrecisionComplex) {
    let mut p = PrecisionComplex::zero(x.prec());
    let mut dp = PrecisionComplex::zero(x.prec());
    for c in coeffs.iter().rev() {
        dp = &(&dp * x) + &p;
        p = &(&p * x) + c;
    }
    (p, dp)
}

fn trim(coeffs: &[PrecisionComplex]) -> &[PrecisionComplex] {
    let mut n = coeffs.len();
    while n > 0 && coeffs[n - 1].is_zero() {
        n -= 1;
    }
    &coeffs[..n]
}

/// All complex roots (with multiplicity) by Aberth–Ehrlich iteration.
///
/// Returns `None` when the iteration does not settle; leading zero
/// coefficients are ignored.
pub fn roots(coeffs: &[PrecisionComplex]) -> Option<Vec<PrecisionComplex>> {
    let coeffs = trim(coeffs);
    if coeffs.len() <= 1 {
        return Some(Vec::new());
    }
    let prec = coeffs.iter().map(|c| c.prec()).min().unwrap();
    let n = coeffs.len() - 1;
    let lead = coeffs[n].abs();
    // Cauchy bound.
    let mut bound = 0f64;
    for c in &coeffs[..n] {
        let r = Float::with_val(prec, c.abs() / &lead).to_f64();
        bound = bound.max(r);
    }
    let radius = 1.0 + bound;
    let mut z: Vec<PrecisionComplex> = (0..n)
        .map(|k| {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / n as f64 + 0.4;
            let r = radius * (0.5 + 0.5 * (k as f64 + 1.0) / n as f64);
            PrecisionComplex::from_f64(r * theta.cos(), r * theta.sin(), prec)
        })
        .collect();
    let eps = pow2(-(prec as i32) + 12, 64).to_f64();
    let mut done = vec![false; n];
    for _ in 0..(40 + 4 * prec as usize) {
        let mut max_rel = 0f64;
        for k in 0..n {
            if done[k] {
                continue;
            }
            let (p, dp) = horner_with_derivative(coeffs, &z[k]);
            if p.is_zero() {
                done[k] = true;
                continue;
            }
            let ratio = &p / &dp;
            let mut sum = PrecisionComplex::zero(prec);
            for j in 0..n {
                if j != k {
                    let diff = &z[k] - &z[j];
                    if !diff.is_zero() {
                        sum = &sum + &diff.recip();
                    }
                }
            }
            let denom = &PrecisionComplex::one(prec) - &(&ratio * &sum);
            let w = if denom.is_zero() || !dp.is_finite() || dp.is_zero() {
                PrecisionComplex::from_f64(1e-3 * (1.0 + k as f64), 1e-3, prec)
            } else {
                &ratio / &denom
            };
            let step = w.abs_f64();
            let scale = 1.0 + z[k].abs_f64();
            z[k] = &z[k] - &w;
            let rel = step / scale;
            if rel < eps {
                done[k] = true;
            }
            if rel.is_finite() {
                max_rel = max_rel.max(rel);
            } else {
                max_rel = f64::INFINITY;
            }
        }
        if done.iter().all(|d| *d) || max_rel < eps {
            return Some(z);
        }
    }
    // Multiple roots converge linearly; accept if residuals are small anyway.
    let scale: f64 = coeffs.iter().map(|c| c.abs_f64()).fold(0.0, f64::max);
    let ok = z.iter().all(|r| {
        let m = 1.0 + r.abs_f64();
        horner(coeffs, r).abs_f64() <= scale * m.powi(n as i32) * pow2(-(prec as i32) / 2, 64).to_f64()
    });
    ok.then_some(z)
}

/// Coefficients of `∏ (Y − r)` in ascending order (monic).
pub fn from_roots(roots: &[PrecisionComplex], prec: u32) -> Vec<PrecisionComplex> {
    let mut c = vec![PrecisionComplex::one(prec)];
    for r in roots {
        let mut next = vec![PrecisionComplex::zero(prec); c.len() + 1];
        for (k, ck) in c.iter().enumerate() {
            next[k + 1] = &next[k + 1] + ck;
            next[k] = &next[k] - &(ck * r);
        }
        c = next;
    }
    c
}

/// Interpolating polynomial through `(xs[k], ys[k])` via Newton divided
/// differences, returned in monomial form.
pub fn newton_interpolate(xs: &[PrecisionComplex], ys: &[PrecisionComplex]) -> Vec<PrecisionComplex> {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len();
    if n == 0 {
        return Vec::new();
    }
    let prec = xs[0].prec();
    let mut d = ys.to_vec();
    for j in 1..n {
        for i in (j..n).rev() {
            d[i] = &(&d[i] - &d[i - 1]) / &(&xs[i] - &xs[i - j]);
        }
    }
    let mut poly = vec![d[n - 1].clone()];
    for k in (0..n - 1).rev() {
        // poly <- poly * (x - xs[k]) + d[k]
        let mut next = vec![PrecisionComplex::zero(prec); poly.len() + 1];
        for (i, c) in poly.iter().enumerate() {
            next[i + 1] = &next[i + 1] + c;
            next[i] = &next[i] - &(c * &xs[k]);
        }
        next[0] = &next[0] + &d[k];
        poly = next;
    }
    poly
}

/// Determinant by Gaussian elimination with partial pivoting.
pub fn determinant(mut m: Vec<Vec<PrecisionComplex>>, prec: u32) -> PrecisionComplex {
    let n = m.len();
    let mut det = PrecisionComplex::one(prec);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&a, &b| m[a][col].abs().partial_cmp(&m[b][col].abs()).unwrap())
            .unwrap();
        if m[pivot][col].is_zero() {
            return PrecisionComplex::zero(prec);
        }
        if pivot != col {
            m.swap(pivot, col);
            det = -det;
        }
        det = &det * &m[col][col];
        for r in col + 1..n {
            let f = &m[r][col] / &m[col][col];
            for c in col..n {
                let t = &f * &m[col][c];
                m[r][c] = &m[r][c] - &t;
            }
        }
    }
    det
}

/// Resultant of two univariate polynomials via the Sylvester matrix.
pub fn sylvester_resultant(f: &[PrecisionComplex], g: &[PrecisionComplex]) -> PrecisionComplex {
    let f = trim(f);
    let g = trim(g);
    let prec = f.iter().chain(g).map(|c| c.prec()).min().unwrap_or(64);
    if f.is_empty() || g.is_empty() {
        return PrecisionComplex::zero(prec);
    }
    let m = f.len() - 1;
    let n = g.len() - 1;
    let size = m + n;
    if size == 0 {
        return PrecisionComplex::one(prec);
    }
    let mut rows = vec![vec![PrecisionComplex::zero(prec); size]; size];
    for r in 0..n {
        for (k, c) in f.iter().rev().enumerate() {
            rows[r][r + k] = c.clone();
        }
    }
    for r in 0..m {
        for (k, c) in g.iter().rev().enumerate() {
            rows[n + r][r + k] = c.clone();
        }
    }
    determinant(rows, prec)
}
