//! Intersections `C̃ ∩ (Z_M × ℝ²)`, certificates that a traced real curve
//! has projections inside unions of special geodesics, atypicality
//! arithmetic, and a detector for strongly special plane curves.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rug::{Float, Integer, Rational};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::modpoly::{is_proportional, is_strongly_special_gaussian, ModularCache};
use crate::numeric::{GaussianBivariatePoly, PrecisionComplex, RealQuadruplePoly};
use crate::real_curves::{build_zn, trace_zn, ZnTraceOptions};
use crate::restriction::{weil_restrict, ComplexPlaneCurve};
use crate::tracer::{tangent, trace_from_seeds, BoundingBox, ImplicitSystem, PolySystem, TraceOptions, TracedBranch};

/// Dimension count of an intersection component `A ⊂ V ∩ S` in `n`-space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct AtypicalityReport {
    pub dim_a: u32,
    pub dim_v: u32,
    pub dim_s: u32,
    pub ambient_n: u32,
    /// `dim A − (dim V + dim S − n)`.
    pub excess: i64,
    pub atypical: bool,
    /// Set by the caller once no coordinate is constant on `A`.
    pub strongly_flag: bool,
}

impl AtypicalityReport {
    /// `codim A < codim V + codim S`.
    pub fn atypical_by_codimension(&self) -> bool {
        let n = self.ambient_n as i64;
        n - (self.dim_a as i64) < (n - self.dim_v as i64) + (n - self.dim_s as i64)
    }

    /// Records the outcome of the no-constant-coordinate check.
    pub fn with_strong_check(mut self, no_constant_coordinate: bool) -> Self {
        self.strongly_flag = self.atypical && no_constant_coordinate;
        self
    }
}

pub fn atypicality_excess(dim_a: u32, dim_v: u32, dim_s: u32, n: u32) -> Result<AtypicalityReport> {
    if dim_a > n || dim_v > n || dim_s > n {
        return Err(Error::Dimension(format!("dimensions ({dim_a}, {dim_v}, {dim_s}) exceed the ambient {n}")));
    }
    let excess = dim_a as i64 - (dim_v as i64 + dim_s as i64 - n as i64);
    Ok(AtypicalityReport { dim_a, dim_v, dim_s, ambient_n: n, excess, atypical: excess > 0, strongly_flag: false })
}

/// Parameters for [`trace_intersection`].
#[derive(Clone, Debug)]
pub struct IntersectionOptions {
    /// Continuation in `(x1, y1, x2, y2)`.
    pub trace: TraceOptions,
    pub prec: u32,
    /// Grid resolution used to seed the `Z_M` trace.
    pub grid: usize,
}

impl IntersectionOptions {
    pub fn new(bbox: BoundingBox, step: f64, tol: f64) -> Result<Self> {
        if bbox.dim() != 4 {
            return Err(Error::Dimension("the intersection lives in ℝ⁴".into()));
        }
        Ok(Self { trace: TraceOptions::new(bbox, step, tol)?, prec: 192, grid: 256 })
    }
}

/// The three real equations `re P = im P = F_M(x1, y1) = 0` in `ℝ⁴`.
pub fn intersection_system(
    c: &ComplexPlaneCurve,
    m: u32,
    prec: u32,
    cache: &ModularCache,
) -> Result<PolySystem<4, Rational>> {
    let w = weil_restrict(c);
    let zm = build_zn(m, cache)?;
    let fm: RealQuadruplePoly = zm.poly.map_coeffs(|v| Rational::from(v.clone())).embed::<4>([0, 1]);
    Ok(PolySystem::new(vec![w.re_part, w.im_part, fm], prec))
}

fn check_hypothesis(c: &ComplexPlaneCurve) -> Result<()> {
    if c.is_horizontal || c.is_vertical {
        return Err(Error::HorizontalVertical);
    }
    Ok(())
}

/// Traces the real curve `C̃ ∩ (Z_M × ℝ²)`. Seeds come from the traced
/// points of `Z_M` in the `(x1, y1)` window whose fibres `P(x1+iy1, ·) = 0`
/// land inside the box.
pub fn trace_intersection(
    c: &ComplexPlaneCurve,
    m: u32,
    opts: &IntersectionOptions,
    cache: &ModularCache,
) -> Result<Vec<TracedBranch>> {
    check_hypothesis(c)?;
    let bbox = &opts.trace.bbox;
    if bbox.dim() != 4 {
        return Err(Error::Dimension("the intersection lives in ℝ⁴".into()));
    }
    let zm = build_zn(m, cache)?;
    let plane = BoundingBox::plane(bbox.lo[0], bbox.hi[0], bbox.lo[1], bbox.hi[1])?;
    let mut zopts = ZnTraceOptions::new(plane, opts.trace.step, opts.trace.tol)?;
    zopts.grid = opts.grid;
    zopts.prec = opts.prec;
    let base = match trace_zn(&zm, &zopts) {
        Ok(b) => b,
        Err(Error::NoSeeds(_)) => Vec::new(),
        Err(e) => return Err(e),
    };
    let prec = opts.prec;
    let base_points: Vec<&Vec<f64>> = base.iter().flat_map(|b| b.points.iter()).collect();
    let seeds: Vec<Vec<f64>> = base_points
        .par_iter()
        .flat_map_iter(|p| {
            let w1 = PrecisionComplex::from_f64(p[0], p[1], prec);
            c.fiber_roots(&w1)
                .into_iter()
                .map(|w2| {
                    let (x2, y2) = w2.to_f64_pair();
                    vec![p[0], p[1], x2, y2]
                })
                .filter(|s| bbox.contains(s))
                .collect::<Vec<_>>()
        })
        .collect();
    if seeds.is_empty() {
        return Err(Error::NoSeeds(format!("no fibre point over Z_{m} inside the box")));
    }
    let sys = intersection_system(c, m, prec, cache)?;
    let branches: Vec<TracedBranch> = trace_from_seeds(&sys, &seeds, &opts.trace)
        .into_iter()
        .filter(|b| b.max_residual() <= opts.trace.tol)
        .collect();
    if branches.is_empty() {
        return Err(Error::NoSeeds(format!("no fibre point over Z_{m} could be continued")));
    }
    Ok(branches)
}

/// Dimension of a traced component: 1 when the branch has at least 20
/// continuation steps and the null space of the Jacobian is one-dimensional
/// and well separated at every point.
pub fn component_dimension(sys: &dyn ImplicitSystem, branch: &TracedBranch) -> Option<u32> {
    if branch.len() < 21 {
        return None;
    }
    let dim = sys.dim();
    let ok = branch.points.par_iter().all(|p| {
        let jet = sys.jet(p);
        jet.normals.len() + 1 == dim && tangent(&jet.normals, dim).1 > 1e-6
    });
    ok.then_some(1)
}

/// Level certificate for the two planar projections of a traced branch.
#[derive(Clone, Debug, Serialize)]
pub struct ProjectionCertificate {
    pub branch: TracedBranch,
    /// Least level found for each projection, if any up to the budget.
    pub levels: (Option<u32>, Option<u32>),
    pub p1_singleton: bool,
    pub p2_singleton: bool,
    /// Largest normalized `|F_N|` at the reported level, or the smallest such
    /// maximum over the levels tried when none was found.
    pub max_zn_residuals: (f64, f64),
    pub tol: f64,
    /// Largest level actually tried.
    pub searched_to: u32,
}

impl ProjectionCertificate {
    pub fn is_valid(&self) -> bool {
        !self.p1_singleton
            && !self.p2_singleton
            && self.levels.0.is_some()
            && self.levels.1.is_some()
            && self.max_zn_residuals.0 <= self.tol
            && self.max_zn_residuals.1 <= self.tol
    }

    pub fn level_pair(&self) -> Option<(u32, u32)> {
        match self.levels {
            (Some(a), Some(b)) if self.is_valid() => Some((a, b)),
            _ => None,
        }
    }
}

/// Largest normalized residual of `F_N` over the projection of the branch,
/// stopping as soon as it exceeds `stop`.
fn projection_residual(
    branch: &TracedBranch,
    xy: (usize, usize),
    n: u32,
    stop: f64,
    prec: u32,
    cache: &ModularCache,
) -> Result<f64> {
    let z = build_zn(n, cache)?;
    let mut worst = 0.0f64;
    for p in &branch.points {
        worst = worst.max(z.residual(p[xy.0], p[xy.1], prec));
        if worst > stop {
            break;
        }
    }
    Ok(worst)
}

fn least_level(
    branch: &TracedBranch,
    xy: (usize, usize),
    nmax: u32,
    tol: f64,
    prec: u32,
    cache: &ModularCache,
) -> Result<(Option<u32>, f64)> {
    let mut best = f64::INFINITY;
    for n in 1..=nmax {
        let r = projection_residual(branch, xy, n, tol, prec, cache)?;
        if r <= tol {
            return Ok((Some(n), r));
        }
        best = best.min(r);
    }
    Ok((None, best))
}

/// Finds the least levels `N1, N2 ≤ nmax` with `p_i(branch) ⊂ Z_{N_i}` and
/// checks that neither projection is a single point.
pub fn certify_projections(
    branch: &TracedBranch,
    nmax: u32,
    tol: f64,
    prec: u32,
    cache: &ModularCache,
) -> Result<ProjectionCertificate> {
    if branch.len() < 10 {
        return Err(Error::Precondition(format!("branch has {} points, at least 10 needed", branch.len())));
    }
    if branch.points[0].len() != 4 {
        return Err(Error::Dimension("projection certificates need points of ℝ⁴".into()));
    }
    let nmax = nmax.min(cache.max_level());
    let p1_singleton = branch.diameter(&[0, 1]) <= 10.0 * tol;
    let p2_singleton = branch.diameter(&[2, 3]) <= 10.0 * tol;
    let (l1, r1) = least_level(branch, (0, 1), nmax, tol, prec, cache)?;
    let (l2, r2) = least_level(branch, (2, 3), nmax, tol, prec, cache)?;
    Ok(ProjectionCertificate {
        branch: branch.clone(),
        levels: (l1, l2),
        p1_singleton,
        p2_singleton,
        max_zn_residuals: (r1, r2),
        tol,
        searched_to: nmax,
    })
}

/// Max over branch points of `min_N |F_N|` on one projection, for a union
/// `⋃ Z_N`.
pub fn pointwise_union_residual(
    branch: &TracedBranch,
    second: bool,
    levels: &[u32],
    prec: u32,
    cache: &ModularCache,
) -> Result<f64> {
    let (i, j) = if second { (2, 3) } else { (0, 1) };
    let curves = levels.iter().map(|&n| build_zn(n, cache)).collect::<Result<Vec<_>>>()?;
    Ok(branch
        .points
        .par_iter()
        .map(|p| curves.iter().map(|z| z.residual(p[i], p[j], prec)).fold(f64::INFINITY, f64::min))
        .reduce(|| 0.0, f64::max))
}

/// `T_k = f²(point)_k` never constant: each complex coordinate of the image
/// moves by more than `10·tol` along the branch.
pub fn no_constant_coordinate(branch: &TracedBranch, tol: f64) -> bool {
    // T1, T2 = x1 ± iy1 share the diameter of (x1, y1); likewise T3, T4
    branch.diameter(&[0, 1]) > 10.0 * tol && branch.diameter(&[2, 3]) > 10.0 * tol
}

/// Budgets and numerical parameters of the detector.
#[derive(Clone, Debug, Serialize)]
pub struct DetectorBudget {
    pub nmax_exact: u32,
    pub nmax_search: u32,
    pub m_list: Vec<u32>,
    pub tol: f64,
    /// Distinct certified level pairs needed for an evidence verdict.
    pub k_required: usize,
    pub bbox: BoundingBox,
    pub step: f64,
    pub prec: u32,
}

impl Default for DetectorBudget {
    fn default() -> Self {
        Self {
            nmax_exact: 10,
            nmax_search: 12,
            m_list: vec![1, 2, 3],
            tol: 1e-8,
            k_required: 3,
            bbox: BoundingBox::new(vec![-2000.0, -5000.0, -2000.0, -5000.0], vec![10000.0, 5000.0, 10000.0, 5000.0])
                .expect("valid box"),
            step: 50.0,
            prec: 192,
        }
    }
}

/// A certified branch.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Evidence {
    pub m: u32,
    pub levels: (u32, u32),
    pub branch_points: usize,
    pub max_residual: f64,
}

/// A solid branch whose projections fail every level up to the budget.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub m: u32,
    pub branch_points: usize,
    pub max_residual: f64,
    pub levels: (Option<u32>, Option<u32>),
    pub best_zn_residuals: (f64, f64),
    pub searched_to: u32,
    pub sample_point: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Verdict {
    StronglySpecial(u32),
    EvidenceSpecial(Vec<Evidence>),
    NotSpecial(Witness),
    Inconclusive,
}

impl Verdict {
    pub fn tag(&self) -> &'static str {
        match self {
            Verdict::StronglySpecial(_) => "strongly_special",
            Verdict::EvidenceSpecial(_) => "evidence_special",
            Verdict::NotSpecial(_) => "not_special",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Clone, Debug)]
pub struct DetectionReport {
    pub verdict: Verdict,
    pub evidence: Vec<Evidence>,
    pub witnesses: Vec<Witness>,
    /// Number of traced branches per `M` (`None` when nothing was found).
    pub branches_per_m: Vec<(u32, Option<usize>)>,
    pub budget: DetectorBudget,
}

fn fixed(x: f64) -> String {
    format!("{x:.6e}")
}

impl DetectionReport {
    pub fn distinct_level_pairs(&self) -> usize {
        self.evidence.iter().map(|e| e.levels).collect::<BTreeSet<_>>().len()
    }

    pub fn to_json(&self) -> Value {
        let n = match self.verdict {
            Verdict::StronglySpecial(n) => Some(n),
            _ => None,
        };
        let evidence: Vec<Value> = self
            .evidence
            .iter()
            .map(|e| {
                json!({
                    "M": e.m,
                    "levels": [e.levels.0, e.levels.1],
                    "branch_points": e.branch_points,
                    "max_residual": fixed(e.max_residual),
                })
            })
            .collect();
        let witness = match &self.verdict {
            Verdict::NotSpecial(w) => json!({
                "M": w.m,
                "branch_points": w.branch_points,
                "max_residual": fixed(w.max_residual),
                "levels": [w.levels.0, w.levels.1],
                "best_zn_residuals": [fixed(w.best_zn_residuals.0), fixed(w.best_zn_residuals.1)],
                "searched_to": w.searched_to,
                "sample_point": w.sample_point.iter().map(|x| fixed(*x)).collect::<Vec<_>>(),
            }),
            _ => Value::Null,
        };
        let b = &self.budget;
        json!({
            "verdict": self.verdict.tag(),
            "N": n,
            "distinct_level_pairs": self.distinct_level_pairs(),
            "evidence": evidence,
            "witness": witness,
            "branches": self.branches_per_m.iter().map(|(m, k)| json!({"M": m, "count": k})).collect::<Vec<_>>(),
            "budgets": {
                "nmax_exact": b.nmax_exact,
                "nmax_search": b.nmax_search,
                "M_list": b.m_list,
                "tol": fixed(b.tol),
                "k_required": b.k_required,
                "bbox": {"lo": b.bbox.lo.iter().map(|x| fixed(*x)).collect::<Vec<_>>(),
                         "hi": b.bbox.hi.iter().map(|x| fixed(*x)).collect::<Vec<_>>()},
                "step": fixed(b.step),
                "prec": b.prec,
            },
        })
    }
}

struct PerM {
    m: u32,
    branches: Option<usize>,
    evidence: Vec<Evidence>,
    witnesses: Vec<Witness>,
}

fn examine_m(c: &ComplexPlaneCurve, m: u32, budget: &DetectorBudget, cache: &ModularCache) -> Result<PerM> {
    let mut out = PerM { m, branches: None, evidence: Vec::new(), witnesses: Vec::new() };
    let mut opts = IntersectionOptions::new(budget.bbox.clone(), budget.step, budget.tol)?;
    opts.prec = budget.prec;
    let branches = match trace_intersection(c, m, &opts, cache) {
        Ok(b) => b,
        Err(Error::NoSeeds(_)) | Err(Error::LevelTooLarge { .. }) => return Ok(out),
        Err(e) => return Err(e),
    };
    out.branches = Some(branches.len());
    let sys = intersection_system(c, m, budget.prec, cache)?;
    for b in &branches {
        if b.len() < 10 {
            continue;
        }
        let cert = certify_projections(b, budget.nmax_search, budget.tol, budget.prec, cache)?;
        if let Some(levels) = cert.level_pair() {
            out.evidence.push(Evidence { m, levels, branch_points: b.len(), max_residual: b.max_residual() });
            continue;
        }
        let solid = !cert.p1_singleton
            && !cert.p2_singleton
            && b.max_residual() <= budget.tol
            && component_dimension(&sys, b) == Some(1);
        if solid {
            out.witnesses.push(Witness {
                m,
                branch_points: b.len(),
                max_residual: b.max_residual(),
                levels: cert.levels,
                best_zn_residuals: cert.max_zn_residuals,
                searched_to: cert.searched_to,
                sample_point: b.points[b.len() / 2].clone(),
            });
        }
    }
    Ok(out)
}

/// Decides whether `C` is strongly special. An exact identity `P ∝ Φ_N` is
/// the only conclusive positive; traced curves with special geodesic
/// projections give evidence, and a solid branch failing certification is a
/// witness against.
pub fn detect_strongly_special(
    c: &ComplexPlaneCurve,
    budget: &DetectorBudget,
    cache: &ModularCache,
) -> Result<DetectionReport> {
    check_hypothesis(c)?;
    let nmax_exact = budget.nmax_exact.min(cache.max_level());
    if let Some(n) = is_strongly_special_gaussian(c.poly(), nmax_exact, cache)? {
        return Ok(DetectionReport {
            verdict: Verdict::StronglySpecial(n),
            evidence: Vec::new(),
            witnesses: Vec::new(),
            branches_per_m: Vec::new(),
            budget: budget.clone(),
        });
    }
    let per_m = budget
        .m_list
        .par_iter()
        .map(|&m| examine_m(c, m, budget, cache))
        .collect::<Result<Vec<_>>>()?;
    let mut evidence = Vec::new();
    let mut witnesses = Vec::new();
    let mut branches_per_m = Vec::new();
    for r in per_m {
        branches_per_m.push((r.m, r.branches));
        evidence.extend(r.evidence);
        witnesses.extend(r.witnesses);
    }
    let distinct = evidence.iter().map(|e| e.levels).collect::<BTreeSet<_>>().len();
    let verdict = if let Some(w) = witnesses.first() {
        Verdict::NotSpecial(w.clone())
    } else if distinct >= budget.k_required {
        Verdict::EvidenceSpecial(evidence.clone())
    } else {
        Verdict::Inconclusive
    };
    Ok(DetectionReport { verdict, evidence, witnesses, branches_per_m, budget: budget.clone() })
}

/// Consequence of an equation `Φ_N(T_j, T_k) = 0` holding on `V`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Implication {
    /// `(1,2)` or `(3,4)`: the projection of `C` to a factor is dominant.
    ImpossibleByDominance,
    /// `(1,3)` or `(2,4)`: `C` equals the curve `Φ_N = 0`.
    ForcesEqualsPhiN,
    /// `(1,4)` or `(2,3)`: `C` equals `Φ_N = 0` through the conjugate equation.
    ForcesEqualsPhiNConjugate,
}

#[derive(Clone, Debug, Serialize)]
pub struct ImplicationReport {
    pub pair: (u32, u32),
    pub level: u32,
    pub implication: Implication,
    /// Real points of `C̃` sampled for the check.
    pub samples: usize,
    /// Sampled points with normalized `|F_N| > tol` on the relevant plane.
    pub violating_samples: usize,
    /// Outcome of the exact comparison with `Φ_N`, for the cases that force
    /// equality.
    pub identity_holds: Option<bool>,
}

/// Real points `(x1, y1, x2, y2)` of `C̃` from random first coordinates and
/// the roots of the fibre.
pub fn sample_real_points(c: &ComplexPlaneCurve, count: usize, radius: f64, seed: u64, prec: u32) -> Vec<[f64; 4]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0;
    while out.len() < count && attempts < 10 * count + 10 {
        attempts += 1;
        let w1 = PrecisionComplex::from_f64(rng.random_range(-radius..radius), rng.random_range(-radius..radius), prec);
        let (x1, y1) = w1.to_f64_pair();
        for w2 in c.fiber_roots(&w1) {
            let (x2, y2) = w2.to_f64_pair();
            out.push([x1, y1, x2, y2]);
            if out.len() == count {
                break;
            }
        }
    }
    out
}

pub fn containment_implications(
    pair: (u32, u32),
    n: u32,
    c: &ComplexPlaneCurve,
    tol: f64,
    prec: u32,
    cache: &ModularCache,
) -> Result<ImplicationReport> {
    let (j, k) = pair;
    if !(1..=4).contains(&j) || !(1..=4).contains(&k) || j >= k {
        return Err(Error::Precondition(format!("coordinate pair ({j}, {k}) must satisfy 1 ≤ j < k ≤ 4")));
    }
    let implication = match pair {
        (1, 2) | (3, 4) => Implication::ImpossibleByDominance,
        (1, 3) | (2, 4) => Implication::ForcesEqualsPhiN,
        _ => Implication::ForcesEqualsPhiNConjugate,
    };
    let mut report = ImplicationReport {
        pair,
        level: n,
        implication,
        samples: 0,
        violating_samples: 0,
        identity_holds: None,
    };
    match implication {
        Implication::ImpossibleByDominance => {
            let z = build_zn(n, cache)?;
            let pts = sample_real_points(c, 32, 3000.0, 17 + n as u64, prec);
            let (a, b) = if j == 1 { (0, 1) } else { (2, 3) };
            report.samples = pts.len();
            report.violating_samples = pts.iter().filter(|p| z.residual(p[a], p[b], prec) > tol).count();
        }
        Implication::ForcesEqualsPhiN => {
            let phi = cache.modpoly(n)?;
            report.identity_holds = Some(is_proportional(c.poly(), &phi.poly));
        }
        Implication::ForcesEqualsPhiNConjugate => {
            // Φ_N(x1 − iy1, x2 + iy2) = 0 on C̃ means P̄ ∝ Φ_N; Φ_N is real so
            // this is again P ∝ Φ_N
            let phi = cache.modpoly(n)?;
            let conj: GaussianBivariatePoly = c.conjugate();
            report.identity_holds = Some(is_proportional(&conj, &phi.poly));
        }
    }
    Ok(report)
}

/// The curve `T2 − λ·T1` with `λ` given as a float (converted exactly).
pub fn lambda_line(lambda: &Float) -> Result<ComplexPlaneCurve> {
    let prec = lambda.prec();
    ComplexPlaneCurve::from_float_terms(&[
        ([0, 1], Float::with_val(prec, 1), Float::new(prec)),
        ([1, 0], Float::with_val(prec, -lambda), Float::new(prec)),
    ])
}

/// `Σ c_e T^e` from small integer coefficients.
pub fn integer_curve(terms: &[([u32; 2], i64)]) -> Result<ComplexPlaneCurve> {
    let mut p = crate::numeric::IntegerBivariatePoly::new();
    for (e, v) in terms {
        p.add_term(*e, Integer::from(*v));
    }
    ComplexPlaneCurve::from_integer(&p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn excess_examples() {
        let r = atypicality_excess(1, 2, 2, 4).unwrap();
        assert_eq!(r.excess, 1);
        assert!(r.atypical);
        let r = atypicality_excess(0, 2, 2, 4).unwrap();
        assert_eq!(r.excess, 0);
        assert!(!r.atypical);
        let r = atypicality_excess(2, 2, 2, 4).unwrap();
        assert_eq!(r.excess, 2);
        assert!(r.atypical);
        assert!(matches!(atypicality_excess(5, 2, 2, 4), Err(Error::Dimension(_))));
    }

    #[test]
    fn strong_flag_requires_atypical() {
        let r = atypicality_excess(0, 2, 2, 4).unwrap().with_strong_check(true);
        assert!(!r.strongly_flag);
        let r = atypicality_excess(1, 2, 2, 4).unwrap().with_strong_check(true);
        assert!(r.strongly_flag);
        let r = atypicality_excess(1, 2, 2, 4).unwrap().with_strong_check(false);
        assert!(!r.strongly_flag);
    }

    #[test]
    fn hypothesis_guard() {
        let cache = ModularCache::in_memory();
        let h = integer_curve(&[([0, 1], 1), ([0, 0], -5)]).unwrap();
        let err = detect_strongly_special(&h, &DetectorBudget::default(), &cache).unwrap_err();
        assert!(matches!(err, Error::HorizontalVertical));
    }

    #[test]
    fn exact_path() {
        let cache = ModularCache::in_memory();
        let budget = DetectorBudget::default();
        for n in 1..=3 {
            let c = ComplexPlaneCurve::from_integer(&cache.modpoly(n).unwrap().poly).unwrap();
            let r = detect_strongly_special(&c, &budget, &cache).unwrap();
            assert_eq!(r.verdict, Verdict::StronglySpecial(n));
        }
    }

    #[test]
    fn implication_tags() {
        let cache = ModularCache::in_memory();
        let phi3 = ComplexPlaneCurve::from_integer(&cache.modpoly(3).unwrap().poly).unwrap();
        let r = containment_implications((1, 2), 2, &phi3, 1e-8, 128, &cache).unwrap();
        assert_eq!(r.implication, Implication::ImpossibleByDominance);
        assert!(r.violating_samples >= 1);
        let r = containment_implications((1, 3), 3, &phi3, 1e-8, 128, &cache).unwrap();
        assert_eq!(r.implication, Implication::ForcesEqualsPhiN);
        assert_eq!(r.identity_holds, Some(true));
        let r = containment_implications((2, 3), 3, &phi3, 1e-8, 128, &cache).unwrap();
        assert_eq!(r.implication, Implication::ForcesEqualsPhiNConjugate);
        assert_eq!(r.identity_holds, Some(true));
        assert!(containment_implications((3, 1), 3, &phi3, 1e-8, 128, &cache).is_err());
    }
}
