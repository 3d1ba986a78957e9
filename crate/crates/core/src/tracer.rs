//! Predictor–corrector continuation of one-dimensional real solution sets
//! `G_1 = … = G_{n−1} = 0` in `ℝⁿ`.
//!
//! Points are stored as `f64`; equations are evaluated at arbitrary
//! precision. Residuals are normalized, `|G| / ‖∇G‖`, i.e. a first-order
//! estimate of the distance to the hypersurface `G = 0`.

use std::collections::HashSet;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;
use rug::Float;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::{RealRing, SparsePoly};

/// Normalized residuals and unit normals of a system at a point.
#[derive(Clone, Debug)]
pub struct Jet {
    /// Signed normalized residuals `G / ‖∇G‖`.
    pub residuals: Vec<f64>,
    pub normals: Vec<Vec<f64>>,
    /// Smallest `‖∇G‖·(1 + |p|) / Σ|terms|` over the equations; near zero at
    /// singular points.
    pub gradient_ratio: f64,
}

impl Jet {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().fold(0.0, |a, r| a.max(r.abs()))
    }
}

/// A system of `dim − 1` real equations in `dim` unknowns.
pub trait ImplicitSystem: Sync {
    fn dim(&self) -> usize;
    fn jet(&self, p: &[f64]) -> Jet;
}

/// Polynomial equations with real-embedded coefficients.
#[derive(Clone, Debug)]
pub struct PolySystem<const V: usize, C> {
    pub equations: Vec<SparsePoly<V, C>>,
    pub prec: u32,
}

impl<const V: usize, C: RealRing> PolySystem<V, C> {
    pub fn new(equations: Vec<SparsePoly<V, C>>, prec: u32) -> Self {
        Self { equations, prec }
    }
}

/// Signed normalized residual, unit normal and gradient ratio of one polynomial.
pub fn poly_jet<const V: usize, C: RealRing>(eq: &SparsePoly<V, C>, p: &[f64], prec: u32) -> (f64, Vec<f64>, f64) {
    let pt: [Float; V] = std::array::from_fn(|k| Float::with_val(prec, p[k]));
    let jet = eq.eval_real_jet(&pt, prec);
    let mut g2 = Float::new(prec);
    for g in &jet.grad {
        g2 += Float::with_val(prec, g.square_ref());
    }
    let gnorm = g2.sqrt();
    if gnorm.is_zero() {
        let r = if jet.value.is_zero() { 0.0 } else { f64::INFINITY };
        return (r, vec![0.0; V], 0.0);
    }
    let resid = Float::with_val(prec, &jet.value / &gnorm).to_f64();
    let normal = jet.grad.iter().map(|g| Float::with_val(prec, g / &gnorm).to_f64()).collect();
    let size = 1.0 + p.iter().map(|x| x * x).sum::<f64>().sqrt();
    let ratio = if jet.scale.is_zero() {
        1.0
    } else {
        (Float::with_val(prec, &gnorm * size) / &jet.scale).to_f64()
    };
    (resid, normal, ratio)
}

impl<const V: usize, C: RealRing> ImplicitSystem for PolySystem<V, C> {
    fn dim(&self) -> usize {
        V
    }

    fn jet(&self, p: &[f64]) -> Jet {
        let mut residuals = Vec::with_capacity(self.equations.len());
        let mut normals = Vec::with_capacity(self.equations.len());
        let mut ratio = f64::INFINITY;
        for eq in &self.equations {
            let (r, n, q) = poly_jet(eq, p, self.prec);
            residuals.push(r);
            normals.push(n);
            ratio = ratio.min(q);
        }
        Jet { residuals, normals, gradient_ratio: ratio }
    }
}

/// Axis-aligned box.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundingBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoundingBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(Error::Dimension("bounding box corners differ in dimension".into()));
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a < b) || !a.is_finite() || !b.is_finite()) {
            return Err(Error::Precondition("bounding box is degenerate".into()));
        }
        Ok(Self { lo, hi })
    }

    pub fn plane(x0: f64, x1: f64, y0: f64, y1: f64) -> Result<Self> {
        Self::new(vec![x0, y0], vec![x1, y1])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.iter().zip(self.lo.iter().zip(&self.hi)).all(|(x, (a, b))| *a <= *x && *x <= *b)
    }
}

/// Why a branch stopped in one direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EndReason {
    BoundingBox,
    Closed,
    Singular,
    Stalled,
    Budget,
    Joined,
}

/// Polyline approximating a piece of the solution set.
#[derive(Clone, Debug, Serialize)]
pub struct TracedBranch {
    pub points: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
    pub step: f64,
    /// Reasons at the start and at the end of the polyline.
    pub ends: [EndReason; 2],
    pub min_gradient_ratio: f64,
}

impl TracedBranch {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().fold(0.0, |a, r| a.max(*r))
    }

    pub fn is_closed(&self) -> bool {
        self.ends.contains(&EndReason::Closed)
    }

    /// Largest distance between two points of the projection onto `coords`.
    pub fn diameter(&self, coords: &[usize]) -> f64 {
        let lo: Vec<f64> = coords
            .iter()
            .map(|&c| self.points.iter().map(|p| p[c]).fold(f64::INFINITY, f64::min))
            .collect();
        let hi: Vec<f64> = coords
            .iter()
            .map(|&c| self.points.iter().map(|p| p[c]).fold(f64::NEG_INFINITY, f64::max))
            .collect();
        // the bounding-box diagonal bounds the diameter within a factor √d;
        // compute the exact value for modest sizes
        if self.points.len() <= 2000 {
            let mut best = 0.0f64;
            for (i, p) in self.points.iter().enumerate() {
                for q in &self.points[i + 1..] {
                    let d = coords.iter().map(|&c| (p[c] - q[c]).powi(2)).sum::<f64>();
                    best = best.max(d);
                }
            }
            best.sqrt()
        } else {
            lo.iter().zip(&hi).map(|(a, b)| (b - a).powi(2)).sum::<f64>().sqrt()
        }
    }

    pub fn arclength(&self) -> f64 {
        self.points.windows(2).map(|w| dist(&w[0], &w[1])).sum()
    }
}

/// Continuation parameters.
#[derive(Clone, Debug)]
pub struct TraceOptions {
    pub bbox: BoundingBox,
    /// Maximum (and initial) arclength step.
    pub step: f64,
    /// Corrector tolerance on the normalized residual.
    pub tol: f64,
    pub max_points: usize,
    pub max_branches: usize,
    /// Smallest allowed step as a fraction of `step`.
    pub min_step_ratio: f64,
    pub corrector_iters: usize,
    /// Minimum cosine between consecutive tangents.
    pub min_cos: f64,
}

impl TraceOptions {
    pub fn new(bbox: BoundingBox, step: f64, tol: f64) -> Result<Self> {
        if !(step > 0.0) || !(tol > 0.0) {
            return Err(Error::Precondition("step and tol must be positive".into()));
        }
        Ok(Self {
            bbox,
            step,
            tol,
            max_points: 20_000,
            max_branches: 256,
            min_step_ratio: 1.0 / 4096.0,
            corrector_iters: 12,
            min_cos: 0.95,
        })
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Unit tangent (null vector of the normals) and the smallest singular value
/// of the normal matrix.
pub fn tangent(normals: &[Vec<f64>], dim: usize) -> (Vec<f64>, f64) {
    if dim == 2 && normals.len() == 1 {
        let n = &normals[0];
        let len = (n[0] * n[0] + n[1] * n[1]).sqrt();
        if len == 0.0 {
            return (vec![1.0, 0.0], 0.0);
        }
        return (vec![-n[1] / len, n[0] / len], len);
    }
    let j = DMatrix::from_fn(normals.len(), dim, |r, c| normals[r][c]);
    let gram = j.transpose() * &j;
    let eig = SymmetricEigen::new(gram);
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let t: Vec<f64> = eig.eigenvectors.column(order[0]).iter().copied().collect();
    let sigma = if dim > 1 { eig.eigenvalues[order[1]].max(0.0).sqrt() } else { 0.0 };
    let len = t.iter().map(|x| x * x).sum::<f64>().sqrt();
    (t.iter().map(|x| x / len).collect(), sigma)
}

/// Newton projection onto the solution set. With `plane = Some((t, p0))` the
/// step is constrained to the hyperplane `tᵀ(p − p0) = 0`; otherwise the
/// minimum-norm Newton step is used.
pub fn correct(
    sys: &dyn ImplicitSystem,
    start: &[f64],
    plane: Option<(&[f64], &[f64])>,
    tol: f64,
    iters: usize,
    max_move: f64,
) -> Option<(Vec<f64>, Jet)> {
    let n = sys.dim();
    let mut p = start.to_vec();
    let mut jet = sys.jet(&p);
    for _ in 0..iters {
        let m = jet.normals.len();
        let delta = match plane {
            Some((t, p0)) => {
                let a = DMatrix::from_fn(m + 1, n, |r, c| if r < m { jet.normals[r][c] } else { t[c] });
                let mut rhs = DVector::from_fn(m + 1, |r, _| if r < m { -jet.residuals[r] } else { 0.0 });
                rhs[m] = -dot(t, &p.iter().zip(p0).map(|(x, y)| x - y).collect::<Vec<_>>());
                a.lu().solve(&rhs)?
            }
            None => {
                let a = DMatrix::from_fn(m, n, |r, c| jet.normals[r][c]);
                let rhs = DVector::from_fn(m, |r, _| -jet.residuals[r]);
                let aat = &a * a.transpose();
                let y = aat.lu().solve(&rhs)?;
                a.transpose() * y
            }
        };
        let step: f64 = delta.norm();
        if !step.is_finite() {
            return None;
        }
        for (x, d) in p.iter_mut().zip(delta.iter()) {
            *x += d;
        }
        if dist(&p, start) > max_move {
            return None;
        }
        jet = sys.jet(&p);
        let scale = 1.0 + p.iter().map(|x| x.abs()).fold(0.0, f64::max);
        if jet.max_residual() <= tol && step <= tol.max(4.0 * f64::EPSILON * scale) {
            return Some((p, jet));
        }
    }
    (jet.max_residual() <= tol).then_some((p, jet))
}

type Cell = Vec<i64>;

fn cell_of(p: &[f64], size: f64) -> Cell {
    p.iter().map(|x| (x / size).floor() as i64).collect()
}

fn near_visited(p: &[f64], size: f64, visited: &HashSet<Cell>) -> bool {
    let c = cell_of(p, size);
    let n = c.len();
    let total = 3usize.pow(n as u32);
    (0..total).any(|mut k| {
        let probe: Cell = (0..n)
            .map(|d| {
                let off = (k % 3) as i64 - 1;
                k /= 3;
                c[d] + off
            })
            .collect();
        visited.contains(&probe)
    })
}

struct HalfTrace {
    points: Vec<Vec<f64>>,
    residuals: Vec<f64>,
    end: EndReason,
    min_ratio: f64,
}

fn trace_direction(
    sys: &dyn ImplicitSystem,
    start: &[f64],
    start_jet: &Jet,
    sign: f64,
    opts: &TraceOptions,
    visited: &HashSet<Cell>,
) -> HalfTrace {
    let dim = sys.dim();
    let cell = 2.0 * opts.step;
    let (t0, _) = tangent(&start_jet.normals, dim);
    let mut t: Vec<f64> = t0.iter().map(|x| x * sign).collect();
    let mut p = start.to_vec();
    let mut jet = start_jet.clone();
    let mut h = opts.step;
    let mut out = HalfTrace { points: Vec::new(), residuals: Vec::new(), end: EndReason::Stalled, min_ratio: jet.gradient_ratio };
    let mut ratios: Vec<f64> = vec![jet.gradient_ratio];
    let mut travelled = 0.0;
    let mut joined_run = 0usize;
    loop {
        if out.points.len() >= opts.max_points {
            out.end = EndReason::Budget;
            return out;
        }
        let pred: Vec<f64> = p.iter().zip(&t).map(|(x, d)| x + h * d).collect();
        let accepted = correct(sys, &pred, Some((&t, &pred)), opts.tol, opts.corrector_iters, 2.0 * h)
            .and_then(|(q, qjet)| {
                let d = dist(&p, &q);
                if d > 2.0 * opts.step || d < 0.05 * h {
                    return None;
                }
                let (mut tn, _) = tangent(&qjet.normals, dim);
                let c = dot(&tn, &t);
                if c.abs() < opts.min_cos {
                    return None;
                }
                if c < 0.0 {
                    tn.iter_mut().for_each(|x| *x = -*x);
                }
                Some((q, qjet, tn, d))
            });
        match accepted {
            Some((q, qjet, tn, d)) => {
                if !opts.bbox.contains(&q) {
                    out.end = EndReason::BoundingBox;
                    return out;
                }
                travelled += d;
                p = q;
                jet = qjet;
                t = tn;
                out.points.push(p.clone());
                out.residuals.push(jet.max_residual());
                out.min_ratio = out.min_ratio.min(jet.gradient_ratio);
                ratios.push(jet.gradient_ratio);
                h = (h * 1.5).min(opts.step);
                if travelled > 4.0 * opts.step && dist(&p, start) < opts.step.min(h * 1.5) {
                    out.end = EndReason::Closed;
                    return out;
                }
                if near_visited(&p, cell, visited) {
                    joined_run += 1;
                    if joined_run >= 5 {
                        out.end = EndReason::Joined;
                        return out;
                    }
                } else {
                    joined_run = 0;
                }
            }
            None => {
                h *= 0.5;
                if h < opts.step * opts.min_step_ratio {
                    let mut sorted = ratios.clone();
                    sorted.sort_by(f64::total_cmp);
                    let median = sorted[sorted.len() / 2];
                    let (_, sigma) = tangent(&jet.normals, dim);
                    out.end = if jet.gradient_ratio < 1e-3 * median || sigma < 1e-6 {
                        EndReason::Singular
                    } else {
                        EndReason::Stalled
                    };
                    return out;
                }
            }
        }
    }
}

/// Traces the branch through `seed` in both directions.
pub fn trace_branch(
    sys: &dyn ImplicitSystem,
    seed: &[f64],
    opts: &TraceOptions,
    visited: &HashSet<Vec<i64>>,
) -> Option<TracedBranch> {
    let (p0, jet0) = correct(sys, seed, None, opts.tol, 2 * opts.corrector_iters, 4.0 * opts.step)?;
    if !opts.bbox.contains(&p0) {
        return None;
    }
    let fwd = trace_direction(sys, &p0, &jet0, 1.0, opts, visited);
    let bwd = if fwd.end == EndReason::Closed {
        HalfTrace { points: Vec::new(), residuals: Vec::new(), end: EndReason::Closed, min_ratio: f64::INFINITY }
    } else {
        trace_direction(sys, &p0, &jet0, -1.0, opts, visited)
    };
    let mut points: Vec<Vec<f64>> = bwd.points.into_iter().rev().collect();
    let mut residuals: Vec<f64> = bwd.residuals.into_iter().rev().collect();
    points.push(p0.clone());
    residuals.push(jet0.max_residual());
    points.extend(fwd.points);
    residuals.extend(fwd.residuals);
    if fwd.end == EndReason::Closed {
        points.push(p0);
        residuals.push(jet0.max_residual());
    }
    Some(TracedBranch {
        points,
        residuals,
        step: opts.step,
        ends: [bwd.end, fwd.end],
        min_gradient_ratio: jet0.gradient_ratio.min(fwd.min_ratio).min(bwd.min_ratio),
    })
}

/// Traces branches from a list of seeds, skipping seeds that fall on
/// already traced branches. Seeds are processed in parallel batches.
pub fn trace_from_seeds(sys: &dyn ImplicitSystem, seeds: &[Vec<f64>], opts: &TraceOptions) -> Vec<TracedBranch> {
    let cell = 2.0 * opts.step;
    let mut visited: HashSet<Cell> = HashSet::new();
    let mut branches: Vec<TracedBranch> = Vec::new();
    let batch = rayon::current_num_threads().max(1) * 2;
    let mut pending = seeds.iter().filter(|s| opts.bbox.contains(s));
    loop {
        if branches.len() >= opts.max_branches {
            break;
        }
        let mut chunk: Vec<&Vec<f64>> = Vec::with_capacity(batch);
        let mut chunk_cells: HashSet<Cell> = HashSet::new();
        for s in pending.by_ref() {
            if near_visited(s, cell, &visited) || !chunk_cells.insert(cell_of(s, cell)) {
                continue;
            }
            chunk.push(s);
            if chunk.len() == batch {
                break;
            }
        }
        if chunk.is_empty() {
            break;
        }
        let traced: Vec<TracedBranch> = chunk
            .par_iter()
            .filter_map(|s| trace_branch(sys, s, opts, &visited))
            .collect();
        for b in traced {
            let overlap = b.points.iter().filter(|p| near_visited(p, cell, &visited)).count();
            if (overlap as f64) > 0.8 * b.points.len() as f64 {
                continue;
            }
            for p in &b.points {
                visited.insert(cell_of(p, cell));
            }
            branches.push(b);
            if branches.len() >= opts.max_branches {
                break;
            }
        }
    }
    branches
}

/// Points where a sign change of `f` is detected along the edges of an
/// `n × n` grid over a planar box, refined by bisection.
pub fn grid_sign_changes(f: &(dyn Fn(f64, f64) -> f64 + Sync), bbox: &BoundingBox, n: usize) -> Vec<Vec<f64>> {
    let (x0, y0, x1, y1) = (bbox.lo[0], bbox.lo[1], bbox.hi[0], bbox.hi[1]);
    let xs: Vec<f64> = (0..=n).map(|k| x0 + (x1 - x0) * k as f64 / n as f64).collect();
    let ys: Vec<f64> = (0..=n).map(|k| y0 + (y1 - y0) * k as f64 / n as f64).collect();
    let signs: Vec<Vec<f64>> = xs
        .par_iter()
        .map(|&x| ys.iter().map(|&y| f(x, y).signum()).collect())
        .collect();
    let bisect = |a: [f64; 2], b: [f64; 2], sa: f64| -> Vec<f64> {
        let (mut a, mut b) = (a, b);
        for _ in 0..48 {
            let m = [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0];
            if f(m[0], m[1]).signum() == sa {
                a = m;
            } else {
                b = m;
            }
        }
        vec![(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0]
    };
    let mut edges = Vec::new();
    for i in 0..=n {
        for j in 0..=n {
            if i < n && signs[i][j] != signs[i + 1][j] {
                edges.push(([xs[i], ys[j]], [xs[i + 1], ys[j]], signs[i][j]));
            }
            if j < n && signs[i][j] != signs[i][j + 1] {
                edges.push(([xs[i], ys[j]], [xs[i], ys[j + 1]], signs[i][j]));
            }
        }
    }
    edges.par_iter().map(|(a, b, s)| bisect(*a, *b, *s)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rug::Integer;

    type P2 = SparsePoly<2, Integer>;

    fn circle(r2: i64) -> P2 {
        P2::from_terms([([2, 0], Integer::from(1)), ([0, 2], Integer::from(1)), ([0, 0], Integer::from(-r2))])
    }

    #[test]
    fn traces_a_closed_circle() {
        let sys = PolySystem::new(vec![circle(4)], 128);
        let bbox = BoundingBox::plane(-5.0, 5.0, -5.0, 5.0).unwrap();
        let opts = TraceOptions::new(bbox, 0.05, 1e-10).unwrap();
        let b = trace_branch(&sys, &[2.1, 0.1], &opts, &HashSet::new()).unwrap();
        assert!(b.is_closed());
        assert!((b.arclength() - 4.0 * std::f64::consts::PI).abs() < 0.05);
        assert!(b.max_residual() <= 1e-10);
        for w in b.points.windows(2) {
            assert!(dist(&w[0], &w[1]) <= 2.0 * b.step);
        }
    }

    #[test]
    fn line_leaves_the_box() {
        // y = 0 in [-10, 10]²
        let line = P2::from_terms([([0, 1], Integer::from(1))]);
        let sys = PolySystem::new(vec![line], 128);
        let bbox = BoundingBox::plane(-10.0, 10.0, -10.0, 10.0).unwrap();
        let opts = TraceOptions::new(bbox.clone(), 0.1, 1e-12).unwrap();
        let f = |x: f64, y: f64| sys.jet(&[x, y]).residuals[0];
        let seeds = grid_sign_changes(&f, &bbox, 32);
        let branches = trace_from_seeds(&sys, &seeds, &opts);
        assert_eq!(branches.len(), 1);
        assert_eq!(branches[0].ends, [EndReason::BoundingBox; 2]);
        assert!(branches[0].diameter(&[0, 1]) > 19.0);
    }

    #[test]
    fn space_curve_in_three_dimensions() {
        type P3 = SparsePoly<3, Integer>;
        // x² + y² = 1, z = x
        let cyl = P3::from_terms([([2, 0, 0], Integer::from(1)), ([0, 2, 0], Integer::from(1)), ([0, 0, 0], Integer::from(-1))]);
        let plane = P3::from_terms([([0, 0, 1], Integer::from(1)), ([1, 0, 0], Integer::from(-1))]);
        let sys = PolySystem::new(vec![cyl, plane], 128);
        let bbox = BoundingBox::new(vec![-2.0; 3], vec![2.0; 3]).unwrap();
        let opts = TraceOptions::new(bbox, 0.05, 1e-10).unwrap();
        let b = trace_branch(&sys, &[1.0, 0.05, 0.95], &opts, &HashSet::new()).unwrap();
        assert!(b.is_closed());
        // ellipse with semi-axes √2 and 1
        assert!((b.arclength() - 7.6404).abs() < 0.05, "{}", b.arclength());
    }

    #[test]
    fn crossing_lines_are_traced() {
        // xy = 0 has a node at the origin
        let cross = P2::from_terms([([1, 1], Integer::from(1))]);
        let sys = PolySystem::new(vec![cross], 128);
        let bbox = BoundingBox::plane(-1.0, 1.0, -1.0, 1.0).unwrap();
        let opts = TraceOptions::new(bbox, 0.05, 1e-10).unwrap();
        let b = trace_branch(&sys, &[0.5, 0.01], &opts, &HashSet::new()).unwrap();
        assert!(b.max_residual() <= 1e-10);
        assert!(b.points.iter().all(|p| p[0].abs() < 1e-8 || p[1].abs() < 1e-8));
    }
}
