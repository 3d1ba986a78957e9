//! The real plane curves `Z_N : Φ_N(x+iy, x−iy) = 0`, their traced real
//! points, and certificates that a point of `Z_N(ℝ)` lies on a special
//! geodesic.

use std::sync::Arc;

use rug::{Float, Integer, Rational};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::geodesics::{locus, GeodesicLocus, GeodesicMatrix};
use crate::modpoly::{cyclic_isogeny_matrices, ModularCache};
use crate::modular_forms::{j_inverse, reduce_to_fundamental_domain, UpperHalfPoint};
use crate::numeric::{mobius_apply, pow2, IntegerBivariatePoly, PrecisionComplex, RationalMatrix2};
use crate::tracer::{grid_sign_changes, poly_jet, trace_from_seeds, BoundingBox, PolySystem, TraceOptions, TracedBranch};

/// `Z_N` with its integer defining polynomial in `(x, y)`.
#[derive(Clone, Debug)]
pub struct RealCurveZN {
    pub level: u32,
    pub poly: Arc<IntegerBivariatePoly>,
}

/// `(re, im)` of `P(x+iy, x−iy)` as integer polynomials in `(x, y)`.
pub fn expand_conjugate_pair(p: &IntegerBivariatePoly) -> (IntegerBivariatePoly, IntegerBivariatePoly) {
    let x = IntegerBivariatePoly::variable(0);
    let y = IntegerBivariatePoly::variable(1);
    let deg = p.degree_in(0).max(p.degree_in(1)) as usize;
    // (x + iy)^k as (re, im)
    let mut powers = vec![(IntegerBivariatePoly::constant(Integer::from(1)), IntegerBivariatePoly::new())];
    for k in 1..=deg {
        let (r, i) = &powers[k - 1];
        let re = r.mul(&x).sub(&i.mul(&y));
        let im = r.mul(&y).add(&i.mul(&x));
        powers.push((re, im));
    }
    let mut re = IntegerBivariatePoly::new();
    let mut im = IntegerBivariatePoly::new();
    for (e, c) in p.terms() {
        let (ra, ia) = &powers[e[0] as usize];
        let (rb, ib) = &powers[e[1] as usize];
        // (ra + i ia)(rb − i ib)
        let c = IntegerBivariatePoly::constant(c.clone());
        re = re.add(&ra.mul(rb).add(&ia.mul(ib)).mul(&c));
        im = im.add(&ia.mul(rb).sub(&ra.mul(ib)).mul(&c));
    }
    (re, im)
}

/// Expands `Φ_N(x+iy, x−iy)`; for `N = 1` the convention `F = y` is used.
pub fn build_zn(n: u32, cache: &ModularCache) -> Result<RealCurveZN> {
    let poly = cache.real_curve_poly(n, |phi| {
        if n == 1 {
            return Ok(IntegerBivariatePoly::variable(1));
        }
        let (re, im) = expand_conjugate_pair(&phi.poly);
        if !im.is_zero() {
            return Err(Error::NonRealExpansion(n));
        }
        Ok(re)
    })?;
    Ok(RealCurveZN { level: n, poly })
}

/// Options for [`trace_zn`].
#[derive(Clone, Debug)]
pub struct ZnTraceOptions {
    pub trace: TraceOptions,
    /// Grid resolution per side for seeding.
    pub grid: usize,
    pub prec: u32,
}

impl ZnTraceOptions {
    pub fn new(bbox: BoundingBox, step: f64, tol: f64) -> Result<Self> {
        Ok(Self { trace: TraceOptions::new(bbox, step, tol)?, grid: 256, prec: 192 })
    }
}

impl RealCurveZN {
    pub fn system(&self, prec: u32) -> PolySystem<2, Integer> {
        PolySystem::new(vec![(*self.poly).clone()], prec)
    }

    /// Exact value at a rational point.
    pub fn eval_exact(&self, x: &Rational, y: &Rational) -> Rational {
        let p = self.poly.map_coeffs(|c| Rational::from(c.clone()));
        p.eval_exact(&[x.clone(), y.clone()])
    }

    /// Normalized residual `|F| / ‖∇F‖` at a double-precision point.
    pub fn residual(&self, x: f64, y: f64, prec: u32) -> f64 {
        poly_jet(&*self.poly, &[x, y], prec).0.abs()
    }

    /// True when `F` only contains even powers of `y`.
    pub fn is_even_in_y(&self) -> bool {
        self.poly.terms().all(|(e, _)| e[1] % 2 == 0)
    }
}

/// Traces `Z_N(ℝ)` inside a planar box, seeding from sign changes of `F`
/// on a grid.
pub fn trace_zn(z: &RealCurveZN, opts: &ZnTraceOptions) -> Result<Vec<TracedBranch>> {
    if opts.trace.bbox.dim() != 2 {
        return Err(Error::Dimension("Z_N lives in the plane".into()));
    }
    let sys = z.system(opts.prec);
    let prec = opts.prec;
    let poly = &*z.poly;
    let sign = move |x: f64, y: f64| {
        let v = poly.eval_real(&[Float::with_val(prec, x), Float::with_val(prec, y)], prec);
        if v.is_zero() {
            0.0
        } else if v.is_sign_negative() {
            -1.0
        } else {
            1.0
        }
    };
    let seeds = grid_sign_changes(&sign, &opts.trace.bbox, opts.grid);
    if seeds.is_empty() {
        return Err(Error::NoSeeds(format!("no sign change of F_{} on the grid", z.level)));
    }
    Ok(trace_from_seeds(&sys, &seeds, &opts.trace))
}

/// JSON dump of traced branches.
pub fn branches_to_json(level: u32, branches: &[TracedBranch]) -> Value {
    json!({
        "N": level,
        "branches": branches.iter().map(|b| json!({
            "points": b.points,
            "max_residual": b.max_residual(),
            "step": b.step,
            "ends": b.ends,
        })).collect::<Vec<_>>(),
    })
}

/// Evidence that `x + iy = j(z)` with `Az = z̄` for an integer matrix `A`
/// of determinant `−N`.
#[derive(Clone, Debug)]
pub struct GeodesicCertificate {
    pub level: u32,
    pub matrix: RationalMatrix2,
    /// Isogeny triple `(a, b, d)` that produced the match.
    pub isogeny: (u32, u32, u32),
    pub z: UpperHalfPoint,
    /// The input point after projection onto `Z_N` at working precision.
    pub point: (Float, Float),
    /// `|Az − z̄|`.
    pub residual: f64,
    /// `tol · conditioning`; the certificate holds when `residual ≤ bound`.
    pub bound: f64,
    pub conditioning: f64,
    pub trace_zero: bool,
    /// `A` itself when it has trace zero, with its locus.
    pub geodesic: Option<(GeodesicMatrix, GeodesicLocus)>,
}

impl GeodesicCertificate {
    pub fn to_json(&self) -> Value {
        let e = self.matrix.entries();
        json!({
            "N": self.level,
            "A": [[e[0].to_string(), e[1].to_string()], [e[2].to_string(), e[3].to_string()]],
            "det": self.matrix.det().to_string(),
            "isogeny": [self.isogeny.0, self.isogeny.1, self.isogeny.2],
            "z": [self.z.z().re().to_f64(), self.z.z().im().to_f64()],
            "point": [self.point.0.to_f64(), self.point.1.to_f64()],
            "residual": self.residual,
            "bound": self.bound,
            "conditioning": self.conditioning,
            "trace_zero": self.trace_zero,
            "geodesic": self.geodesic.as_ref().map(|(_, l)| match l {
                GeodesicLocus::Semicircle { center, radius_sq } =>
                    json!({"kind": "semicircle", "center": center.to_string(), "radius_sq": radius_sq.to_string()}),
                GeodesicLocus::VerticalLine { x0 } => json!({"kind": "vertical", "x0": x0.to_string()}),
            }),
        })
    }
}

/// Newton projection of `(x, y)` onto `F = 0` along the gradient at `prec` bits.
fn polish(poly: &IntegerBivariatePoly, x: f64, y: f64, prec: u32) -> (Float, Float) {
    let mut px = Float::with_val(prec, x);
    let mut py = Float::with_val(prec, y);
    let target = pow2(-(prec as i32) + 16, 64).to_f64();
    let mut last = f64::INFINITY;
    for _ in 0..200 {
        let jet = poly.eval_real_jet(&[px.clone(), py.clone()], prec);
        let g2 = Float::with_val(prec, jet.grad[0].square_ref()) + Float::with_val(prec, jet.grad[1].square_ref());
        if g2.is_zero() {
            break;
        }
        let t = Float::with_val(prec, &jet.value / &g2);
        let r = (Float::with_val(prec, &jet.value / g2.clone().sqrt())).abs().to_f64();
        if r <= target * (1.0 + x.abs().max(y.abs())) || r >= last {
            break;
        }
        last = r;
        px -= Float::with_val(prec, &t * &jet.grad[0]);
        py -= Float::with_val(prec, &t * &jet.grad[1]);
    }
    (px, py)
}

fn sl2_candidates() -> Vec<RationalMatrix2> {
    let t = RationalMatrix2::translation(1);
    let ti = RationalMatrix2::translation(-1);
    let s = RationalMatrix2::inversion();
    vec![
        RationalMatrix2::identity(),
        t.clone(),
        ti.clone(),
        s.clone(),
        t.mul(&s),
        ti.mul(&s),
        s.mul(&t),
        s.mul(&ti),
    ]
}

/// Certifies that `(x, y) ∈ Z_N(ℝ)` lies on a special geodesic: finds
/// `A ∈ M₂(ℤ)` with `det A = −N` and `Az = z̄` where `j(z) = x + iy`.
pub fn certify_special_geodesic_point(
    n: u32,
    x: f64,
    y: f64,
    tol: f64,
    prec: u32,
    cache: &ModularCache,
) -> Result<GeodesicCertificate> {
    let zn = build_zn(n, cache)?;
    let r0 = zn.residual(x, y, prec.max(128));
    if !(r0 <= tol) {
        return Err(Error::Precondition(format!(
            "({x}, {y}) is not on Z_{n}: normalized residual {r0:e} > {tol:e}"
        )));
    }
    let work = prec + 64;
    let (px, py) = polish(&zn.poly, x, y, work);
    let c = PrecisionComplex::new(px.clone(), py.clone());
    let z = j_inverse(&c)?;
    let zw = z.z().clone();
    let target = UpperHalfPoint::new(-zw.conj())?;
    let (u_red, g_u) = reduce_to_fundamental_domain(&target)?;
    let reflect = RationalMatrix2::new(-1, 0, 0, 1);
    let sigmas = sl2_candidates();
    let match_tol = pow2(-(prec as i32) / 8, 64).to_f64();

    let mut best: Option<GeodesicCertificate> = None;
    for (a, b, d) in cyclic_isogeny_matrices(n) {
        let m = RationalMatrix2::new(a, b, 0, d);
        let w = UpperHalfPoint::new(mobius_apply(&m, &zw)?)?;
        let (w_red, g_w) = reduce_to_fundamental_domain(&w)?;
        for sigma in &sigmas {
            let Ok(su) = mobius_apply(sigma, u_red.z()) else { continue };
            if w_red.z().dist(&su).to_f64() > match_tol * (1.0 + su.abs_f64()) {
                continue;
            }
            // g_w·m·z = σ·g_u·(−z̄)  ⇒  A = R·(σ g_u)⁻¹·g_w·m
            let lhs = sigma.mul(&g_u).inverse()?;
            let amat = reflect.mul(&lhs).mul(&g_w).mul(&m);
            debug_assert!(amat.is_integral() && amat.det() == -(n as i64));
            let az = mobius_apply(&amat, &zw)?;
            let residual = az.dist(&zw.conj()).to_f64();
            let size = amat.max_abs_f64().max(1.0);
            let conditioning = (size * (1.0 + zw.abs_f64())).powi(2);
            let trace_zero = amat.trace() == 0;
            let geodesic = if trace_zero {
                GeodesicMatrix::new(amat.clone()).ok().map(|g| {
                    let l = locus(&g);
                    (g, l)
                })
            } else {
                None
            };
            let cert = GeodesicCertificate {
                level: n,
                matrix: amat,
                isogeny: (a, b, d),
                z: z.clone(),
                point: (px.clone(), py.clone()),
                residual,
                bound: tol * conditioning,
                conditioning,
                trace_zero,
                geodesic,
            };
            if best.as_ref().is_none_or(|b| cert.residual < b.residual) {
                best = Some(cert);
            }
        }
    }
    match best {
        Some(c) if c.residual <= c.bound => Ok(c),
        Some(c) => Err(Error::CertificationFailed {
            level: n,
            x,
            y,
            reason: format!("best residual {:e} exceeds bound {:e}", c.residual, c.bound),
        }),
        None => Err(Error::CertificationFailed {
            level: n,
            x,
            y,
            reason: "no isogeny image reduces to the reflected point".into(),
        }),
    }
}
