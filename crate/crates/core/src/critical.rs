//! Enumeration, refinement, classification and certification of critical
//! points of KR on punctured domains.

use std::f64::consts::PI;

use nalgebra::{Matrix3, Matrix4, Vector4};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{constants, necessary_condition_points};
use crate::error::{Error, Result};
use crate::geometry::{Domain, DomainSpec, Hole, Point2};
use crate::greens::{mfs_fit, GreenModel, MfsConfig, OuterRepresentation};
use crate::kr::{assemble, KrDerivs, KrEvaluator, Mat4, VortexConfig};
use crate::linalg::sym_eigen4;

/// Classification of a critical point relative to the hole center.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PointType {
    #[serde(rename = "I")]
    TypeI,
    #[serde(rename = "II")]
    TypeII,
    #[serde(rename = "III")]
    TypeIII,
    #[serde(rename = "unclassified")]
    Unclassified,
}

/// A certified critical point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub x: Point2,
    pub y: Point2,
    /// Sup-norm of ∇KR.
    pub grad_norm: f64,
    /// Eigenvalues of the 4×4 Hessian in ascending order.
    pub hess_eigs: [f64; 4],
    pub morse_index: u8,
    pub nondegenerate: bool,
    pub local_index: i8,
    #[serde(rename = "type")]
    pub kind: PointType,
    /// Rotation angle removed by gauge fixing on a centered annulus.
    pub gauge: Option<f64>,
    /// Index of the swap partner (y, x) when Λ₁ = Λ₂.
    pub paired_with: Option<usize>,
    pub seed: [f64; 4],
    pub iterations: usize,
}

impl CriticalPoint {
    pub fn to_array(&self) -> [f64; 4] {
        [self.x.x1, self.x.x2, self.y.x1, self.y.x2]
    }

    /// Sup-norm distance in (x, y).
    pub fn distance(&self, x: Point2, y: Point2) -> f64 {
        (self.x - x).norm().max((self.y - y).norm())
    }
}

/// Classification thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassBands {
    pub delta0: f64,
    pub c_lo: f64,
    pub c_hi: f64,
}

impl Default for ClassBands {
    fn default() -> Self {
        ClassBands { delta0: 0.1, c_lo: 0.2, c_hi: 5.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchConfig {
    /// Coarse grid points per coordinate.
    pub grid: usize,
    /// Number of coarse pairs kept after gradient preselection.
    pub grid_keep: usize,
    /// Angular seeds per ring near the hole.
    pub seed_density: usize,
    /// Newton tolerance on the nondimensional gradient sup-norm.
    pub tol: f64,
    pub max_iter: usize,
    /// Dedup radius; `None` uses max(1e-6, 0.05 ε^β).
    pub dedup_radius: Option<f64>,
    pub deflation: bool,
    pub bands: ClassBands,
    /// Relative eigenvalue threshold for degeneracy.
    pub degeneracy: f64,
    /// Grid size of the necessary-condition solve seeding type II points.
    pub necessary_grid: usize,
    pub threads: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            grid: 16,
            grid_keep: 96,
            seed_density: 24,
            tol: 1e-10,
            max_iter: 60,
            dedup_radius: None,
            deflation: true,
            bands: ClassBands::default(),
            degeneracy: 1e-6,
            necessary_grid: 32,
            threads: 1,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid < 2 || self.seed_density < 4 || self.max_iter == 0 || !(self.tol > 0.0) {
            return Err(Error::Config("grid ≥ 2, seed_density ≥ 4, max_iter ≥ 1 and tol > 0 required".into()));
        }
        if let Some(r) = self.dedup_radius {
            if !(r > 10.0 * self.tol) {
                return Err(Error::Config(format!("dedup radius {r} must exceed 10·tol")));
            }
        }
        let b = self.bands;
        if !(b.delta0 > 0.0 && b.c_lo > 0.0 && b.c_hi > b.c_lo) {
            return Err(Error::Config("classification bands must satisfy delta0 > 0 and 0 < c_lo < c_hi".into()));
        }
        Ok(())
    }
}

/// A punctured domain Ω_ε = Ω \ B(P, ε) with the Green models of Ω and Ω_ε.
#[derive(Debug, Clone)]
pub struct Problem {
    pub ev: KrEvaluator,
    pub outer: GreenModel,
    pub p: Point2,
    pub eps: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    diameter: f64,
    bbox: (Point2, Point2),
}

impl Problem {
    /// Builds Ω_ε by removing B(P, ε) from the domain of `outer`.
    pub fn new(outer: GreenModel, p: Point2, eps: f64, lambda1: f64, lambda2: f64, mfs: &MfsConfig) -> Result<Self> {
        let (spec, mut holes) = match outer.domain() {
            Domain::Plain(s) => (s.clone(), Vec::new()),
            Domain::Punctured(pd) => (pd.outer.clone(), pd.holes.clone()),
            Domain::ExteriorDisk(_) => return Err(Error::Precondition("enumeration needs a bounded domain".into())),
        };
        holes.push(Hole { center: p, radius: eps });
        let pd = crate::geometry::PuncturedDomain::with_holes(spec, holes)?;
        let inner = mfs_fit(&Domain::Punctured(pd), mfs)?;
        Self::from_models(outer, inner, p, eps, lambda1, lambda2)
    }

    pub fn from_models(outer: GreenModel, inner: GreenModel, p: Point2, eps: f64, lambda1: f64, lambda2: f64) -> Result<Self> {
        VortexConfig::new(Point2::ZERO, Point2::new(1.0, 0.0), lambda1, lambda2)?;
        let spec =
            inner.domain().outer().ok_or_else(|| Error::Precondition("enumeration needs a bounded domain".into()))?.clone();
        let diameter = spec.diameter();
        let bp = spec.boundary_points(256)?;
        let mut lo = Point2::new(f64::INFINITY, f64::INFINITY);
        let mut hi = -lo;
        for b in &bp {
            lo = Point2::new(lo.x1.min(b.p.x1), lo.x2.min(b.p.x2));
            hi = Point2::new(hi.x1.max(b.p.x1), hi.x2.max(b.p.x2));
        }
        Ok(Problem { ev: KrEvaluator::new(inner), outer, p, eps, lambda1, lambda2, diameter, bbox: (lo, hi) })
    }

    pub fn tau(&self) -> f64 {
        self.lambda1 / self.lambda2
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    /// Λ₂²/(π · diameter), the unit of the gradient tolerance.
    pub fn grad_scale(&self) -> f64 {
        self.lambda2 * self.lambda2 / (PI * self.diameter)
    }

    pub fn config(&self, x: Point2, y: Point2) -> VortexConfig {
        VortexConfig { x, y, lambda1: self.lambda1, lambda2: self.lambda2 }
    }

    /// β and C_τ ε^β for the hole at P.
    pub fn type3_radius(&self) -> Result<(f64, f64)> {
        let k = constants(self.tau(), self.outer.robin(self.p)?.r)?;
        Ok((k.beta, k.c_tau * self.eps.powf(k.beta)))
    }

    pub fn dedup_radius(&self, cfg: &SearchConfig) -> f64 {
        cfg.dedup_radius.unwrap_or_else(|| {
            let beta = crate::kr::beta(self.tau());
            (0.05 * self.eps.powf(beta)).max(1e-6)
        })
    }

    /// True for a disk with a single concentric hole.
    pub fn is_centered_annulus(&self) -> bool {
        match self.ev.green().domain() {
            Domain::Punctured(pd) => match (&pd.outer, pd.holes.as_slice()) {
                (DomainSpec::Disk { center, radius }, [h]) => (*center - h.center).norm() <= 1e-12 * radius,
                _ => false,
            },
            _ => false,
        }
    }

    fn holes(&self) -> &[Hole] {
        self.ev.green().domain().holes()
    }

    /// Distance from `q` to the nearest hole circle.
    fn hole_gap(&self, q: Point2) -> f64 {
        self.holes().iter().map(|h| q.dist(h.center) - h.radius).fold(f64::INFINITY, f64::min)
    }

    fn admissible(&self, x: Point2, y: Point2) -> bool {
        let dom = self.ev.green().domain();
        dom.contains(x) && dom.contains(y) && x.dist(y) > 1e-12 * self.diameter
    }

    pub fn derivs(&self, x: Point2, y: Point2) -> Result<KrDerivs> {
        self.ev.derivs(&self.config(x, y))
    }
}

/// Rotates a configuration about the annulus center so that x lies on the positive x₁ axis.
pub fn gauge_fix_annulus(prob: &Problem, cp: &CriticalPoint, cfg: &SearchConfig) -> Result<CriticalPoint> {
    if !prob.is_centered_annulus() {
        return Err(Error::Precondition("gauge fixing needs a centered annulus".into()));
    }
    let c = prob.p;
    let rx = cp.x - c;
    if rx.norm() == 0.0 {
        return Err(Error::Precondition("gauge fixing needs x ≠ P".into()));
    }
    let theta = rx.angle();
    let x = c + rx.rotate(-theta);
    let y = c + (cp.y - c).rotate(-theta);
    let mut out = certify(prob, x, y, cfg, cp.seed, cp.iterations)?;
    out.gauge = Some(theta + cp.gauge.unwrap_or(0.0));
    Ok(out)
}

/// Evaluates gradient and Hessian at (x, y) and fills the certification fields.
pub fn certify(
    prob: &Problem,
    x: Point2,
    y: Point2,
    cfg: &SearchConfig,
    seed: [f64; 4],
    iterations: usize,
) -> Result<CriticalPoint> {
    let d = prob.derivs(x, y)?;
    let grad_norm = d.grad.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let (eigs, _) = sym_eigen4(&d.hess);
    let hnorm = d.hess.iter().map(|r| r.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
    let thresh = cfg.degeneracy * hnorm;
    let relevant: Vec<f64> =
        if prob.is_centered_annulus() { reduced_eigs(&d.hess, x - prob.p, y - prob.p).to_vec() } else { eigs.to_vec() };
    let nondegenerate = relevant.iter().all(|e| e.abs() > thresh);
    let negatives = relevant.iter().filter(|e| **e < 0.0).count() as u8;
    let local_index = if nondegenerate {
        if negatives.is_multiple_of(2) {
            1
        } else {
            -1
        }
    } else {
        0
    };
    Ok(CriticalPoint {
        x,
        y,
        grad_norm,
        hess_eigs: eigs,
        morse_index: negatives,
        nondegenerate,
        local_index,
        kind: PointType::Unclassified,
        gauge: None,
        paired_with: None,
        seed,
        iterations,
    })
}

/// Eigenvalues of the Hessian on the complement of the rotation generator.
pub fn reduced_eigs(h: &Mat4, rx: Point2, ry: Point2) -> [f64; 3] {
    let t = Vector4::new(-rx.x2, rx.x1, -ry.x2, ry.x1).normalize();
    let mut basis: Vec<Vector4<f64>> = Vec::new();
    for k in 0..4 {
        let mut v = Vector4::zeros();
        v[k] = 1.0;
        v -= t * t.dot(&v);
        for b in &basis {
            v -= *b * b.dot(&v);
        }
        if v.norm() > 1e-6 && basis.len() < 3 {
            basis.push(v.normalize());
        }
    }
    let hm = Matrix4::from_fn(|i, j| h[i][j]);
    let r = Matrix3::from_fn(|i, j| basis[i].dot(&(hm * basis[j])));
    let mut e: Vec<f64> = r.symmetric_eigen().eigenvalues.iter().copied().collect();
    e.sort_by(f64::total_cmp);
    [e[0], e[1], e[2]]
}

/// Newton step −H⁺g with near-zero modes dropped.
fn newton_step(h: &Mat4, g: &[f64; 4]) -> [f64; 4] {
    let (vals, vecs) = sym_eigen4(h);
    let vmax = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut s = [0.0; 4];
    for k in 0..4 {
        if vals[k].abs() <= 1e-12 * vmax {
            continue;
        }
        let proj: f64 = (0..4).map(|r| vecs[r][k] * g[r]).sum();
        for r in 0..4 {
            s[r] -= proj / vals[k] * vecs[r][k];
        }
    }
    s
}

fn norm4(v: &[f64; 4]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn sup4(v: &[f64; 4]) -> f64 {
    v.iter().fold(0.0f64, |m, a| m.max(a.abs()))
}

/// Scalar deflation operator over known roots with its gradient.
fn deflation(z: &[f64; 4], known: &[[f64; 4]], shift: f64) -> (f64, [f64; 4]) {
    let mut m = 1.0;
    let mut grad_log = [0.0; 4];
    for k in known {
        let d: [f64; 4] = std::array::from_fn(|i| z[i] - k[i]);
        let r2 = d.iter().map(|a| a * a).sum::<f64>();
        let f = 1.0 / r2 + shift;
        m *= f;
        for i in 0..4 {
            grad_log[i] += (-2.0 * d[i] / (r2 * r2)) / f;
        }
    }
    (m, grad_log.map(|g| g * m))
}

/// Damped Newton on ∇KR from `seed`, optionally deflating known roots.
pub fn newton_refine(prob: &Problem, seed: (Point2, Point2), cfg: &SearchConfig) -> Result<CriticalPoint> {
    newton_impl(prob, seed, cfg, &[])
}

fn newton_impl(prob: &Problem, seed: (Point2, Point2), cfg: &SearchConfig, known: &[[f64; 4]]) -> Result<CriticalPoint> {
    let (x0, y0) = seed;
    if x0 == y0 {
        return Err(Error::DiagonalSingularity);
    }
    if !prob.admissible(x0, y0) {
        return Err(Error::Precondition("seed must lie in Ω_ε × Ω_ε".into()));
    }
    let seed_arr = [x0.x1, x0.x2, y0.x1, y0.x2];
    let tol = cfg.tol * prob.grad_scale();
    let mut z = seed_arr;
    let pt = |z: &[f64; 4]| (Point2::new(z[0], z[1]), Point2::new(z[2], z[3]));
    let mut d = prob.derivs(x0, y0)?;
    for it in 0..=cfg.max_iter {
        if sup4(&d.grad) < tol {
            let (x, y) = pt(&z);
            return certify(prob, x, y, cfg, seed_arr, it);
        }
        if it == cfg.max_iter {
            break;
        }
        let (x, y) = pt(&z);
        let mut step = newton_step(&d.hess, &d.grad);
        if !known.is_empty() {
            let (m, gm) = deflation(&z, known, 1.0);
            let denom = 1.0 - (0..4).map(|i| gm[i] * step[i]).sum::<f64>() / m;
            if denom.abs() > 1e-12 {
                step = step.map(|s| s / denom);
            }
        }
        // Limit each block to half of its distance to holes and to the partner.
        let lx = prob.hole_gap(x).min(x.dist(y));
        let ly = prob.hole_gap(y).min(x.dist(y));
        let sx = step[0].hypot(step[1]);
        let sy = step[2].hypot(step[3]);
        let cap = (0.5 * lx / sx).min(0.5 * ly / sy).min(1.0);
        if cap < 1.0 {
            step = step.map(|s| s * cap);
        }
        let g0 = norm4(&d.grad);
        let descent: [f64; 4] = {
            let hg: [f64; 4] = std::array::from_fn(|i| -(0..4).map(|j| d.hess[i][j] * d.grad[j]).sum::<f64>());
            let s = 0.25 * lx.min(ly) / norm4(&hg).max(f64::MIN_POSITIVE);
            hg.map(|v| v * s)
        };
        let mut accepted = None;
        let mut any_admissible = false;
        'dirs: for dir in [step, descent] {
            let mut t = 1.0;
            for _ in 0..40 {
                let cand: [f64; 4] = std::array::from_fn(|i| z[i] + t * dir[i]);
                let (cx, cy) = pt(&cand);
                if prob.admissible(cx, cy) {
                    any_admissible = true;
                    if let Ok(dc) = prob.derivs(cx, cy) {
                        let ok = if known.is_empty() { norm4(&dc.grad) < g0 } else { norm4(&dc.grad) < g0 || t < 1e-3 };
                        if ok {
                            accepted = Some((cand, dc));
                            break 'dirs;
                        }
                    }
                }
                t *= 0.5;
            }
        }
        match accepted {
            Some((c, dc)) => {
                z = c;
                d = dc;
            }
            None if !any_admissible => return Err(Error::Solver("escaped".into())),
            None => return Err(Error::Solver("stalled".into())),
        }
    }
    Err(Error::Solver(format!("no convergence in {} iterations", cfg.max_iter)))
}

/// Definition-based type from the distances to P at a single ε.
pub fn classify_type(cp: &CriticalPoint, p: Point2, eps: f64, beta: f64, c_tau: f64, tau: f64, bands: &ClassBands) -> PointType {
    let a = cp.x.dist(p);
    let b = cp.y.dist(p);
    let tau_adj = tau.max(1.0 / tau);
    let base = eps.powf(beta) * c_tau;
    let lo = bands.c_lo * base / tau_adj;
    let hi = bands.c_hi * base * tau_adj;
    let band = |r: f64| r >= lo && r <= hi;
    if band(a) && band(b) {
        PointType::TypeIII
    } else if (a < bands.delta0) != (b < bands.delta0) {
        PointType::TypeII
    } else if a >= bands.delta0 && b >= bands.delta0 {
        PointType::TypeI
    } else {
        PointType::Unclassified
    }
}

/// Seeds with a flag marking the coarse-grid ones.
fn seeds(prob: &Problem, cfg: &SearchConfig) -> Result<Vec<(Point2, Point2, bool)>> {
    let mut out = Vec::new();
    let p = prob.p;
    let tau = prob.tau();
    let (_, r3) = prob.type3_radius()?;
    let n = cfg.seed_density;
    for f in [0.5, 1.0, 2.0] {
        let r = f * r3;
        for i in 0..n {
            let th = 2.0 * PI * i as f64 / n as f64;
            for k in [-1.0, 0.0, 1.0] {
                let ph = th + PI + k * 2.0 * PI / n as f64;
                out.push((p + Point2::polar(r, th), p + Point2::polar(r / tau, ph)));
            }
        }
    }
    out.extend(type2_seeds(prob, cfg)?);
    let local = out.len();
    out.extend(grid_seeds(prob, cfg));
    Ok(out.into_iter().enumerate().filter(|(_, (x, y))| prob.admissible(*x, *y)).map(|(k, (x, y))| (x, y, k >= local)).collect())
}

/// Rings around P paired with the solutions of the necessary condition on Ω.
fn type2_seeds(prob: &Problem, cfg: &SearchConfig) -> Result<Vec<(Point2, Point2)>> {
    let mut out = Vec::new();
    let p = prob.p;
    let n = (cfg.seed_density / 2).max(4);
    for near_y in [false, true] {
        let far_pts = necessary_condition_points(&prob.outer, p, prob.lambda1, prob.lambda2, near_y, cfg.necessary_grid)?;
        let l_near = if near_y { prob.lambda2 } else { prob.lambda1 };
        let oev = KrEvaluator::new(prob.outer.clone());
        for q in far_pts {
            let c = if near_y { prob.config(q, p) } else { prob.config(p, q) };
            let Ok(d) = oev.derivs(&c) else { continue };
            let g = if near_y { d.gx() } else { d.gy() }.norm().max(if near_y { d.gy() } else { d.gx() }.norm());
            let gn = if near_y { d.gy() } else { d.gx() };
            let s0 = heps_root_free(gn.norm().max(1e-12 * g), l_near, prob.eps);
            let dir = if gn.norm() > 0.0 { -gn.unit() } else { Point2::new(1.0, 0.0) };
            let limit = 0.5 * q.dist(p);
            for f in [0.25, 0.5, 1.0, 2.0] {
                let r = (f * s0).min(limit).max(3.0 * prob.eps);
                for i in 0..n {
                    let near = p + Point2::polar(r, dir.angle() + 2.0 * PI * i as f64 / n as f64);
                    out.push(if near_y { (q, near) } else { (near, q) });
                }
            }
        }
    }
    Ok(out)
}

/// Root of ln r/r = (π/Λ²)|g| ln ε on (0,1).
fn heps_root_free(g: f64, l: f64, eps: f64) -> f64 {
    let c = PI / (l * l) * g * eps.ln();
    let (mut a, mut b) = (-690.0f64, 0.0f64);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m * (-m).exp() < c {
            a = m;
        } else {
            b = m;
        }
    }
    (0.5 * (a + b)).exp()
}

const RING_RADII: usize = 4;
const RING_ANGLES: usize = 8;

/// Coarse grid plus rings around P, pairs ranked by a distance-weighted gradient norm.
fn grid_seeds(prob: &Problem, cfg: &SearchConfig) -> Vec<(Point2, Point2)> {
    let (lo, hi) = prob.bbox;
    let n = cfg.grid;
    let g = prob.ev.green();
    let mut pts = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let q = Point2::new(
                lo.x1 + (hi.x1 - lo.x1) * (i as f64 + 0.5) / n as f64,
                lo.x2 + (hi.x2 - lo.x2) * (j as f64 + 0.5) / n as f64,
            );
            if g.domain().contains(q) && prob.hole_gap(q) > 0.02 * prob.diameter {
                pts.push(q);
            }
        }
    }
    for k in 0..RING_RADII {
        let r = 0.1 * prob.diameter * 0.4f64.powi(k as i32);
        if r <= 3.0 * prob.eps {
            break;
        }
        for a in 0..RING_ANGLES {
            let q = prob.p + Point2::polar(r, 2.0 * PI * a as f64 / RING_ANGLES as f64);
            if g.domain().contains(q) && prob.hole_gap(q) > prob.eps {
                pts.push(q);
            }
        }
    }
    let states: Vec<_> = pts.iter().map(|&q| g.y_state(q)).collect();
    let diag: Vec<_> = pts.iter().zip(&states).map(|(&q, s)| g.h_with(s, q)).collect();
    let mut scored: Vec<(f64, usize, usize)> = (0..pts.len())
        .into_par_iter()
        .flat_map_iter(|i| {
            let (pts, states, diag) = (&pts, &states, &diag);
            (0..pts.len()).filter(move |&j| j != i).map(move |j| {
                let c = prob.config(pts[i], pts[j]);
                let dxy = g.h_with(&states[j], pts[i]);
                let d = assemble(&c, &diag[i], &diag[j], &dxy);
                let sep = pts[i].dist(pts[j]);
                let wx = prob.hole_gap(pts[i]).min(sep);
                let wy = prob.hole_gap(pts[j]).min(sep);
                let score = (d.grad[0] * wx).hypot(d.grad[1] * wx).hypot((d.grad[2] * wy).hypot(d.grad[3] * wy));
                (score, i, j)
            })
        })
        .collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    scored.into_iter().take(cfg.grid_keep).map(|(_, i, j)| (pts[i], pts[j])).collect()
}

fn run_pool<T: Send, F: FnOnce() -> T + Send>(threads: usize, f: F) -> T {
    match rayon::ThreadPoolBuilder::new().num_threads(threads.max(1)).build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}

/// Iteration cap of the deflated second pass.
const DEFLATED_ITER: usize = 25;

/// Multistart enumeration of critical points of KR on Ω_ε.
pub fn enumerate_critical_points(prob: &Problem, cfg: &SearchConfig) -> Result<Vec<CriticalPoint>> {
    enumerate_with_seeds(prob, cfg, &[])
}

/// Enumeration with additional warm-start seeds tried first.
pub fn enumerate_with_seeds(prob: &Problem, cfg: &SearchConfig, extra: &[(Point2, Point2)]) -> Result<Vec<CriticalPoint>> {
    cfg.validate()?;
    run_pool(cfg.threads, || enumerate_inner(prob, cfg, extra))
}

fn enumerate_inner(prob: &Problem, cfg: &SearchConfig, extra: &[(Point2, Point2)]) -> Result<Vec<CriticalPoint>> {
    let mut seeds: Vec<(Point2, Point2, bool)> =
        extra.iter().filter(|(x, y)| x != y && prob.admissible(*x, *y)).map(|&(x, y)| (x, y, false)).collect();
    seeds.extend(self::seeds(prob, cfg)?);
    let annulus = prob.is_centered_annulus();
    let refine = |s: (Point2, Point2), known: &[[f64; 4]]| -> Option<CriticalPoint> {
        let cp = newton_impl(prob, s, cfg, known).ok()?;
        if annulus {
            gauge_fix_annulus(prob, &cp, cfg).ok()
        } else {
            Some(cp)
        }
    };
    let results: Vec<Option<CriticalPoint>> = seeds.par_iter().map(|&(x, y, _)| refine((x, y), &[])).collect();
    let radius = prob.dedup_radius(cfg);
    let mut found: Vec<CriticalPoint> = Vec::new();
    let mut redundant = Vec::new();
    for (k, r) in results.into_iter().enumerate() {
        if let Some(cp) = r {
            let (x, y, coarse) = seeds[k];
            if !merge(&mut found, cp, radius) && coarse {
                redundant.push((x, y));
            }
        }
    }
    if cfg.deflation && !found.is_empty() {
        let known: Vec<[f64; 4]> = found.iter().map(|c| c.to_array()).collect();
        let short = SearchConfig { max_iter: cfg.max_iter.min(DEFLATED_ITER), ..cfg.clone() };
        let extra: Vec<Option<CriticalPoint>> = redundant
            .par_iter()
            .map(|&s| {
                newton_impl(prob, s, &short, &known).ok().and_then(|cp| {
                    if annulus {
                        gauge_fix_annulus(prob, &cp, cfg).ok()
                    } else {
                        Some(cp)
                    }
                })
            })
            .collect();
        for cp in extra.into_iter().flatten() {
            merge(&mut found, cp, radius);
        }
    }
    if prob.lambda1 == prob.lambda2 {
        let mut add = Vec::new();
        for cp in &found {
            if !found.iter().any(|o| o.distance(cp.y, cp.x) < radius)
                && !add.iter().any(|o: &CriticalPoint| o.distance(cp.y, cp.x) < radius)
            {
                if let Some(s) = refine((cp.y, cp.x), &[]) {
                    add.push(s);
                }
            }
        }
        for cp in add {
            merge(&mut found, cp, radius);
        }
    }
    let (beta, r3) = prob.type3_radius()?;
    let c_tau = r3 / prob.eps.powf(beta);
    for cp in &mut found {
        cp.kind = classify_type(cp, prob.p, prob.eps, beta, c_tau, prob.tau(), &cfg.bands);
    }
    found.sort_by(|a, b| {
        a.kind
            .cmp(&b.kind)
            .then(a.x.x1.total_cmp(&b.x.x1))
            .then(a.x.x2.total_cmp(&b.x.x2))
            .then(a.y.x1.total_cmp(&b.y.x1))
            .then(a.y.x2.total_cmp(&b.y.x2))
    });
    if prob.lambda1 == prob.lambda2 {
        for i in 0..found.len() {
            let (x, y) = (found[i].x, found[i].y);
            found[i].paired_with = (0..found.len()).find(|&j| j != i && found[j].distance(y, x) < radius);
        }
    }
    Ok(found)
}

/// Adds `cp` unless a point within `radius` exists; keeps the smaller gradient.
fn merge(found: &mut Vec<CriticalPoint>, cp: CriticalPoint, radius: f64) -> bool {
    if let Some(o) = found.iter_mut().find(|o| o.distance(cp.x, cp.y) < radius) {
        if cp.grad_norm < o.grad_norm {
            *o = cp;
        }
        false
    } else {
        found.push(cp);
        true
    }
}

/// Number of swap pairs counted once.
pub fn nontrivially_different(points: &[CriticalPoint]) -> usize {
    points.iter().enumerate().filter(|(i, c)| c.paired_with.is_none_or(|j| j > *i)).count()
}

/// A region of configuration space for degree computations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum DegreeRegion {
    /// Product of the rectangles [x_lo, x_hi] and [y_lo, y_hi].
    Box { x_lo: Point2, x_hi: Point2, y_lo: Point2, y_hi: Point2 },
    /// Configurations with |x−c| ∈ [rx.0, rx.1], |y−c| ∈ [ry.0, ry.1] and
    /// arg(y−c) − arg(x−c) within `half_angle` of π.
    Tube { center: Point2, rx: (f64, f64), ry: (f64, f64), half_angle: f64 },
}

/// Outcome of a degree computation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeResult {
    pub degree: i32,
    /// False when some zero inside is degenerate.
    pub verified: bool,
    pub zeros: Vec<CriticalPoint>,
    /// Smallest ‖∇KR + shift‖ sampled on the boundary over the gradient unit.
    pub boundary_margin: f64,
}

impl DegreeRegion {
    /// Maps unit-cube coordinates u ∈ [0,1]⁴ into the region.
    fn map(&self, u: [f64; 4]) -> (Point2, Point2) {
        match *self {
            DegreeRegion::Box { x_lo, x_hi, y_lo, y_hi } => (
                Point2::new(x_lo.x1 + u[0] * (x_hi.x1 - x_lo.x1), x_lo.x2 + u[1] * (x_hi.x2 - x_lo.x2)),
                Point2::new(y_lo.x1 + u[2] * (y_hi.x1 - y_lo.x1), y_lo.x2 + u[3] * (y_hi.x2 - y_lo.x2)),
            ),
            DegreeRegion::Tube { center, rx, ry, half_angle } => {
                let th = 2.0 * PI * u[0];
                let r1 = rx.0 + u[1] * (rx.1 - rx.0);
                let r2 = ry.0 + u[2] * (ry.1 - ry.0);
                let ph = th + PI + (2.0 * u[3] - 1.0) * half_angle;
                (center + Point2::polar(r1, th), center + Point2::polar(r2, ph))
            }
        }
    }

    pub fn contains(&self, x: Point2, y: Point2) -> bool {
        match *self {
            DegreeRegion::Box { x_lo, x_hi, y_lo, y_hi } => {
                let inside = |q: Point2, a: Point2, b: Point2| q.x1 >= a.x1 && q.x1 <= b.x1 && q.x2 >= a.x2 && q.x2 <= b.x2;
                inside(x, x_lo, x_hi) && inside(y, y_lo, y_hi)
            }
            DegreeRegion::Tube { center, rx, ry, half_angle } => {
                let a = (x - center).norm();
                let b = (y - center).norm();
                let mut d = (y - center).angle() - (x - center).angle() - PI;
                d = (d + PI).rem_euclid(2.0 * PI) - PI;
                a >= rx.0 && a <= rx.1 && b >= ry.0 && b <= ry.1 && d.abs() <= half_angle
            }
        }
    }

    /// Boundary faces: coordinates with one entry pinned at 0 or 1 (the angle of a tube is periodic).
    fn boundary_samples(&self, n: usize) -> Vec<[f64; 4]> {
        let periodic0 = matches!(self, DegreeRegion::Tube { .. });
        let mut out = Vec::new();
        let grid = |k: usize| k as f64 / (n - 1) as f64;
        for axis in 0..4 {
            if periodic0 && axis == 0 {
                continue;
            }
            for side in [0.0, 1.0] {
                for a in 0..n {
                    for b in 0..n {
                        for c in 0..n {
                            let free = [grid(a), grid(b), grid(c)];
                            let mut u = [0.0; 4];
                            let mut k = 0;
                            for (i, slot) in u.iter_mut().enumerate() {
                                if i == axis {
                                    *slot = side;
                                } else {
                                    *slot = free[k];
                                    k += 1;
                                }
                            }
                            out.push(u);
                        }
                    }
                }
            }
        }
        out
    }
}

/// Brouwer degree of ∇KR + `shift` on a region, as the sum of the indices of the zeros inside.
pub fn local_degree_box(
    prob: &Problem,
    region: &DegreeRegion,
    n_boundary: usize,
    shift: Option<[f64; 4]>,
    cfg: &SearchConfig,
) -> Result<DegreeResult> {
    let n = n_boundary.max(3);
    let sh = shift.unwrap_or([0.0; 4]);
    let unit = prob.grad_scale();
    let samples = region.boundary_samples(n);
    let margins: Vec<f64> = samples
        .par_iter()
        .map(|&u| {
            let (x, y) = region.map(u);
            match prob.derivs(x, y) {
                Ok(d) => norm4(&std::array::from_fn(|i| d.grad[i] + sh[i])) / unit,
                Err(_) => f64::INFINITY,
            }
        })
        .collect();
    let margin = margins.iter().copied().fold(f64::INFINITY, f64::min);
    // The sampled minimum must clear the variation between neighbouring samples.
    if !(margin > 1e-6) {
        return Err(Error::ZeroOnBoundary);
    }
    let m = n;
    let mut seeds = Vec::new();
    for a in 0..m {
        for b in 0..m {
            for c in 0..m {
                for d in 0..m {
                    let f = |k: usize| (k as f64 + 0.5) / m as f64;
                    seeds.push(region.map([f(a), f(b), f(c), f(d)]));
                }
            }
        }
    }
    let shifted = ShiftedProblem { prob, shift: sh };
    let results: Vec<Option<CriticalPoint>> = seeds.par_iter().map(|&s| shifted.newton(s, cfg).ok()).collect();
    let radius = prob.dedup_radius(cfg).min(1e-6 * prob.diameter).max(1e-9);
    let mut zeros: Vec<CriticalPoint> = Vec::new();
    for cp in results.into_iter().flatten() {
        if region.contains(cp.x, cp.y) {
            merge(&mut zeros, cp, radius);
        }
    }
    zeros.sort_by(|a, b| a.x.x1.total_cmp(&b.x.x1).then(a.x.x2.total_cmp(&b.x.x2)).then(a.y.x1.total_cmp(&b.y.x1)));
    let verified = zeros.iter().all(|z| z.nondegenerate);
    let degree = zeros.iter().map(|z| z.local_index as i32).sum();
    Ok(DegreeResult { degree, verified, zeros, boundary_margin: margin })
}

struct ShiftedProblem<'a> {
    prob: &'a Problem,
    shift: [f64; 4],
}

impl ShiftedProblem<'_> {
    /// Newton on ∇KR + shift; certification ignores the annulus gauge since the shift breaks the symmetry.
    fn newton(&self, seed: (Point2, Point2), cfg: &SearchConfig) -> Result<CriticalPoint> {
        let prob = self.prob;
        let tol = cfg.tol * prob.grad_scale();
        let mut z = [seed.0.x1, seed.0.x2, seed.1.x1, seed.1.x2];
        let pt = |z: &[f64; 4]| (Point2::new(z[0], z[1]), Point2::new(z[2], z[3]));
        let eval = |z: &[f64; 4]| -> Result<([f64; 4], Mat4)> {
            let (x, y) = pt(z);
            if !prob.admissible(x, y) {
                return Err(Error::Solver("escaped".into()));
            }
            let d = prob.derivs(x, y)?;
            Ok((std::array::from_fn(|i| d.grad[i] + self.shift[i]), d.hess))
        };
        let (mut g, mut h) = eval(&z)?;
        for it in 0..=cfg.max_iter {
            if sup4(&g) < tol {
                let (x, y) = pt(&z);
                let d = prob.derivs(x, y)?;
                let (eigs, _) = sym_eigen4(&d.hess);
                let hnorm = d.hess.iter().map(|r| r.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
                let nondegenerate = eigs.iter().all(|e| e.abs() > cfg.degeneracy * hnorm);
                let neg = eigs.iter().filter(|e| **e < 0.0).count() as u8;
                return Ok(CriticalPoint {
                    x,
                    y,
                    grad_norm: sup4(&g),
                    hess_eigs: eigs,
                    morse_index: neg,
                    nondegenerate,
                    local_index: if nondegenerate {
                        if neg.is_multiple_of(2) {
                            1
                        } else {
                            -1
                        }
                    } else {
                        0
                    },
                    kind: PointType::Unclassified,
                    gauge: None,
                    paired_with: None,
                    seed: [seed.0.x1, seed.0.x2, seed.1.x1, seed.1.x2],
                    iterations: it,
                });
            }
            let step = newton_step(&h, &g);
            let g0 = norm4(&g);
            let mut t = 1.0;
            let mut moved = false;
            for _ in 0..40 {
                let cand: [f64; 4] = std::array::from_fn(|i| z[i] + t * step[i]);
                if let Ok((gc, hc)) = eval(&cand) {
                    if norm4(&gc) < g0 {
                        z = cand;
                        g = gc;
                        h = hc;
                        moved = true;
                        break;
                    }
                }
                t *= 0.5;
            }
            if !moved {
                return Err(Error::Solver("stalled".into()));
            }
        }
        Err(Error::Solver("no convergence".into()))
    }
}

/// Builds a problem on Ω = `spec` with the hole B(P, ε), using the closed form for disks.
pub fn problem_for(spec: DomainSpec, p: Point2, eps: f64, lambda1: f64, lambda2: f64, mfs: &MfsConfig) -> Result<Problem> {
    Problem::new(outer_model(spec, Vec::new(), mfs)?, p, eps, lambda1, lambda2, mfs)
}

/// Green model of Ω: closed form for a plain disk, fitted otherwise.
pub fn outer_model(spec: DomainSpec, holes: Vec<Hole>, mfs: &MfsConfig) -> Result<GreenModel> {
    if !holes.is_empty() {
        return mfs_fit(&Domain::Punctured(crate::geometry::PuncturedDomain::with_holes(spec, holes)?), mfs);
    }
    match &spec {
        DomainSpec::Disk { center, radius } if mfs.outer == OuterRepresentation::Auto => {
            GreenModel::closed_form_disk(*center, *radius)
        }
        _ => mfs_fit(&Domain::Plain(spec), mfs),
    }
}

#[cfg(test)]
mod tests;
