//! Closed-form asymptotic objects: scaling constants, the disk type II
//! analysis, the matrices governing type II and type III points, the limit
//! system, and theorem-side predictions.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{DomainSpec, Point2};
use crate::greens::{GreenModel, RobinData};
use crate::kr::{KrEvaluator, Mat4, VortexConfig};
use crate::linalg::{add2, apply2, det2, inv2, mul2, scale2, sub2, sym_eigen2, Mat2};

/// Scaling constants of type III points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    pub tau: f64,
    pub beta: f64,
    pub c_tau: f64,
    pub d_tau: f64,
    pub r_p: f64,
}

pub fn constants(tau: f64, r_p: f64) -> Result<Constants> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::Precondition(format!("tau = {tau} must be positive")));
    }
    let t1 = 1.0 + tau;
    Ok(Constants {
        tau,
        beta: tau / (t1 * t1),
        c_tau: tau.powf(1.0 / t1) * (-2.0 * PI * r_p * (tau * tau + tau + 1.0) / (t1 * t1)).exp(),
        d_tau: (tau.powi(3) - 1.0) / (t1 * tau),
        r_p,
    })
}

/// k(r,τ) = (1+τ)(ln r + 2(1−β)πR_P) − ln τ.
pub fn k_of_r(r: f64, tau: f64, r_p: f64) -> f64 {
    let beta = tau / ((1.0 + tau) * (1.0 + tau));
    (1.0 + tau) * (r.ln() + 2.0 * (1.0 - beta) * PI * r_p) - tau.ln()
}

/// h(s,t) = Λ₂t/(1−t²) + Λ₁(t−s)/|t−s|² + Λ₁s/(1−st).
pub fn type2_disk_h(s: f64, t: f64, lambda1: f64, lambda2: f64) -> Result<f64> {
    if t == s {
        return Err(Error::Pole);
    }
    Ok(h_raw(s, t, lambda1, lambda2))
}

fn h_raw(s: f64, t: f64, l1: f64, l2: f64) -> f64 {
    l2 * t / (1.0 - t * t) + l1 / (t - s) + l1 * s / (1.0 - s * t)
}

fn h_dt(s: f64, t: f64, l1: f64, l2: f64) -> f64 {
    l2 * (1.0 + t * t) / ((1.0 - t * t) * (1.0 - t * t)) - l1 / ((t - s) * (t - s)) + l1 * s * s / ((1.0 - s * t) * (1.0 - s * t))
}

/// A zero of h(s,·) with the sign of ∂h/∂t there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Type2Zero {
    pub t: f64,
    pub slope_sign: i8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Type2DiskSolution {
    pub s: f64,
    /// Zeros in increasing order of t.
    pub zeros: Vec<Type2Zero>,
    /// Location of a double zero when two zeros coalesce.
    pub fold: Option<f64>,
}

/// Grid step of the zero scan in t.
pub const T_GRID: f64 = 1e-4;

fn bisect<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let mut fa = f(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if (b - a).abs() <= tol {
            return m;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fm > 0.0) == (fa > 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Golden-section maximization on [a,b].
fn golden_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// All zeros of h(s,·) on (0,s).
pub fn type2_disk_solve(s: f64, lambda1: f64, lambda2: f64) -> Result<Type2DiskSolution> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::Precondition(format!("s = {s} must lie in (0,1)")));
    }
    let f = |t: f64| h_raw(s, t, lambda1, lambda2);
    let n = ((s / T_GRID).ceil() as usize).max(16);
    let step = s / n as f64;
    let grid: Vec<f64> = (1..n).map(|k| k as f64 * step).collect();
    let vals: Vec<f64> = grid.iter().map(|&t| f(t)).collect();
    let mut zeros = Vec::new();
    let slope = |t: f64| if h_dt(s, t, lambda1, lambda2) > 0.0 { 1 } else { -1 };
    for k in 0..grid.len().saturating_sub(1) {
        if (vals[k] > 0.0) != (vals[k + 1] > 0.0) {
            let t = bisect(f, grid[k], grid[k + 1], 1e-15);
            zeros.push(Type2Zero { t, slope_sign: slope(t) });
        }
    }
    let mut fold = None;
    if zeros.is_empty() {
        // Two zeros closer than the grid step hide between samples; look at the local maximum.
        let (kmax, _) = vals.iter().enumerate().fold((0, f64::NEG_INFINITY), |m, (k, &v)| if v > m.1 { (k, v) } else { m });
        let lo = grid[kmax.saturating_sub(1)];
        let hi = grid[(kmax + 1).min(grid.len() - 1)];
        let tm = golden_max(f, lo, hi, 1e-14);
        let fm = f(tm);
        if fm > 0.0 {
            let t1 = bisect(f, lo, tm, 1e-15);
            let t2 = bisect(f, tm, hi, 1e-15);
            zeros.push(Type2Zero { t: t1, slope_sign: slope(t1) });
            zeros.push(Type2Zero { t: t2, slope_sign: slope(t2) });
            fold = Some(tm);
        } else if fm > -1e-10 {
            fold = Some(tm);
        }
    } else if zeros.len() == 2 && zeros[1].t - zeros[0].t < 10.0 * T_GRID {
        fold = Some(0.5 * (zeros[0].t + zeros[1].t));
    }
    Ok(Type2DiskSolution { s, zeros, fold })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub s_bar: f64,
    pub d1: f64,
    pub d2: f64,
    /// Fold location with the strengths exchanged.
    pub s_bar_swapped: f64,
}

/// Fold location s̄ of h(s,·) by bisection on the zero count.
pub fn s_bar(lambda1: f64, lambda2: f64) -> Result<f64> {
    for l in [lambda1, lambda2] {
        if !(l > 0.0 && l.is_finite()) {
            return Err(Error::Precondition(format!("strength {l} must be positive")));
        }
    }
    let count = |s: f64| type2_disk_solve(s, lambda1, lambda2).map(|r| r.zeros.len());
    let (mut lo, mut hi) = (1e-3, 1.0 - 1e-9);
    if count(lo)? != 0 || count(hi)? == 0 {
        return Err(Error::NoBracket("zero count of h(s,·) does not change on (0,1)".into()));
    }
    while hi - lo > 1e-8 {
        let m = 0.5 * (lo + hi);
        if count(m)? == 0 {
            lo = m;
        } else {
            hi = m;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// d₁ = 1 − s̄(Λ₁,Λ₂), d₂ = 1 − s̄(Λ₂,Λ₁).
pub fn type2_disk_thresholds(lambda1: f64, lambda2: f64) -> Result<Thresholds> {
    let a = s_bar(lambda1, lambda2)?;
    let b = if lambda1 == lambda2 { a } else { s_bar(lambda2, lambda1)? };
    Ok(Thresholds { s_bar: a, d1: 1.0 - a, d2: 1.0 - b, s_bar_swapped: b })
}

/// Root in (0,1) of h_ε(r) = ln r/r − (π/Λ₁²)|∇ₓKR_Ω(P,y₀)| ln ε.
pub fn type2_heps_root(grad_norm: f64, lambda1: f64, eps: f64) -> Result<f64> {
    if !(grad_norm > 0.0 && eps > 0.0 && eps < 1.0) {
        return Err(Error::Precondition("need |∇| > 0 and ε ∈ (0,1)".into()));
    }
    let le = eps.ln();
    // ln r/r increases from −∞ to 0 on (0,1) and the offset is positive.
    let f = |r: f64| r.ln() / r - PI / (lambda1 * lambda1) * grad_norm * le;
    Ok(bisect(f, 1e-300, 1.0, 1e-16))
}

/// Positive root of ln r/(r² ln ε) = λπ/Λ₁².
pub fn type2_r_eps(lambda_i: f64, lambda1: f64, eps: f64) -> Result<f64> {
    if !(lambda_i > 0.0 && eps > 0.0 && eps < 1.0) {
        return Err(Error::Precondition("need λ > 0 and ε ∈ (0,1)".into()));
    }
    let le = eps.ln();
    let target = lambda_i * PI / (lambda1 * lambda1);
    // ln r/(r² ln ε) decreases from +∞ to 0 on (0,1).
    let f = |r: f64| r.ln() / (r * r * le) - target;
    let (a, b) = (1e-300f64.sqrt(), 1.0 - 1e-15);
    if !(f(a) > 0.0 && f(b) < 0.0) {
        return Err(Error::NoBracket("ln r/(r² ln ε) − λπ/Λ₁² has no sign change".into()));
    }
    Ok(bisect(f, a, b, 1e-16))
}

/// Splits a 4×4 Hessian into its xx, xy, yx and yy blocks.
pub fn blocks(h: &Mat4) -> [Mat2; 4] {
    let b = |r: usize, c: usize| [[h[r][c], h[r][c + 1]], [h[r + 1][c], h[r + 1][c + 1]]];
    [b(0, 0), b(0, 2), b(2, 0), b(2, 2)]
}

/// Relative threshold below which a 2×2 block counts as singular.
pub const DEGENERACY: f64 = 1e-6;

/// M₀ = A_xx − A_xy A_yy⁻¹ A_yx.
pub fn matrix_m0(hess: &Mat4) -> Result<Mat2> {
    let [axx, axy, ayx, ayy] = blocks(hess);
    let e = sym_eigen2(&ayy);
    let scale = hess.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    if e.values[0].abs().min(e.values[1].abs()) <= DEGENERACY * scale {
        return Err(Error::HypothesisViolated("the yy block of the Hessian is singular".into()));
    }
    let inv = inv2(&ayy).ok_or_else(|| Error::HypothesisViolated("the yy block of the Hessian is singular".into()))?;
    Ok(sub2(&axx, &mul2(&axy, &mul2(&inv, &ayx))))
}

/// M̃ᵢⱼ = ∂²H(P,P)/∂xᵢ∂xⱼ − 3π ∂ᵢR ∂ⱼR.
pub fn matrix_mtilde(robin: &RobinData) -> Mat2 {
    let g = robin.grad_r.to_array();
    let mut m = robin.hess_h_xx;
    for i in 0..2 {
        for j in 0..2 {
            m[i][j] -= 3.0 * PI * g[i] * g[j];
        }
    }
    m
}

/// M̄ = (τ⁴+τ²+1)H_xx + (τ²−1)²H_yx and M₁ = (τ²+τ+1)H_xx + (τ+1)²H_yx at the diagonal.
pub fn matrix_mbar_m1(robin: &RobinData, tau: f64) -> (Mat2, Mat2) {
    let t2 = tau * tau;
    let mbar = add2(&scale2(&robin.hess_h_xx, t2 * t2 + t2 + 1.0), &scale2(&robin.hess_h_yx, (t2 - 1.0) * (t2 - 1.0)));
    let m1 = add2(&scale2(&robin.hess_h_xx, t2 + tau + 1.0), &scale2(&robin.hess_h_yx, (tau + 1.0) * (tau + 1.0)));
    (mbar, m1)
}

/// Theorems whose predictions are implemented.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TheoremId {
    T1_15,
    T1_16,
    T1_17,
    T1_19,
    T1_6,
    T1_9,
}

impl std::str::FromStr for TheoremId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_uppercase().replace('.', "_").as_str() {
            "T1_15" => TheoremId::T1_15,
            "T1_16" => TheoremId::T1_16,
            "T1_17" => TheoremId::T1_17,
            "T1_19" => TheoremId::T1_19,
            "T1_6" => TheoremId::T1_6,
            "T1_9" => TheoremId::T1_9,
            other => return Err(Error::Config(format!("unknown theorem id {other}"))),
        })
    }
}

/// One predicted critical point to leading order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictedPoint {
    pub x: Point2,
    pub y: Point2,
    /// Size of the neglected correction at the given ε.
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionSet {
    pub theorem_id: TheoremId,
    pub count: usize,
    pub points: Vec<PredictedPoint>,
    /// Unit directions of x − P (one per distinct direction).
    pub directions: Vec<Point2>,
    pub exponent: f64,
    pub constant: f64,
    /// Predicted local indices, aligned with `points` when given.
    pub indices: Vec<i32>,
    pub nontrivially_different: usize,
    /// Eigenvalues of the governing matrix, when there is one.
    pub eigenvalues: Vec<f64>,
}

/// Inputs shared by all predictions.
#[derive(Debug, Clone, Copy)]
pub struct PredictInput<'a> {
    /// Green model of the unpunctured domain Ω.
    pub outer: &'a GreenModel,
    pub p: Point2,
    pub lambda1: f64,
    pub lambda2: f64,
    pub eps: f64,
    /// Partner point y₀ with ∇KR_Ω(P, y₀) = 0 ("t1.9" only).
    pub y0: Option<Point2>,
}

/// Threshold on |∇R(P)|·diameter below which the gradient counts as zero.
pub const GRAD_R_ZERO: f64 = 1e-8;

fn diameter(m: &GreenModel) -> f64 {
    m.domain().outer().map(|o| o.diameter()).unwrap_or(1.0)
}

fn distinct(values: [f64; 2]) -> bool {
    let scale = values[0].abs().max(values[1].abs());
    scale > 0.0 && (values[1] - values[0]).abs() > DEGENERACY * scale
}

pub fn predict(id: TheoremId, inp: &PredictInput) -> Result<PredictionSet> {
    let p = inp.p;
    if !inp.outer.domain().contains(p) {
        return Err(Error::ExteriorPoint(p.x1, p.x2));
    }
    let (l1, l2) = (inp.lambda1, inp.lambda2);
    VortexConfig::new(Point2::ZERO, Point2::new(1.0, 0.0), l1, l2)?;
    let tau = l1 / l2;
    let robin = inp.outer.robin(p)?;
    let k = constants(tau, robin.r)?;
    let scale = inp.eps.powf(k.beta);
    let gnorm = robin.grad_r.norm();
    let grad_zero = gnorm * diameter(inp.outer) < GRAD_R_ZERO;
    let equal = l1 == l2;
    let mut set = PredictionSet {
        theorem_id: id,
        count: 0,
        points: Vec::new(),
        directions: Vec::new(),
        exponent: k.beta,
        constant: k.c_tau,
        indices: Vec::new(),
        nontrivially_different: 0,
        eigenvalues: Vec::new(),
    };
    match id {
        TheoremId::T1_15 => {
            if equal {
                return Err(Error::HypothesisViolated("T1_15 requires Λ₁ ≠ Λ₂".into()));
            }
            if grad_zero {
                return Err(Error::HypothesisViolated("T1_15 requires ∇R(P) ≠ 0".into()));
            }
            let u = robin.grad_r / gnorm;
            let r = k.c_tau * scale;
            let err = scale * scale;
            for sgn in [1.0, -1.0] {
                set.points.push(PredictedPoint { x: p + u * (sgn * r), y: p - u * (sgn * r / tau), error: err });
            }
            set.directions = vec![u, -u];
            set.nontrivially_different = 2;
        }
        TheoremId::T1_16 => {
            if !equal {
                return Err(Error::HypothesisViolated("T1_16 requires Λ₁ = Λ₂".into()));
            }
            if grad_zero {
                return Err(Error::HypothesisViolated("T1_16 requires ∇R(P) ≠ 0".into()));
            }
            let e = sym_eigen2(&matrix_mtilde(&robin));
            if !distinct(e.values) {
                return Err(Error::HypothesisViolated("T1_16 requires distinct eigenvalues of M̃".into()));
            }
            let r = (-1.5 * PI * robin.r).exp() * inp.eps.powf(0.25);
            set.constant = (-1.5 * PI * robin.r).exp();
            set.exponent = 0.25;
            for v in e.vectors {
                set.points.push(PredictedPoint { x: p + v * r, y: p - v * r, error: inp.eps.sqrt() });
                set.points.push(PredictedPoint { x: p - v * r, y: p + v * r, error: inp.eps.sqrt() });
            }
            set.directions = e.vectors.to_vec();
            set.eigenvalues = e.values.to_vec();
            set.nontrivially_different = 2;
        }
        TheoremId::T1_17 => {
            if !grad_zero {
                return Err(Error::HypothesisViolated(format!("T1_17 requires ∇R(P) = 0, found |∇R| = {gnorm:.3e}")));
            }
            let (mbar, _) = matrix_mbar_m1(&robin, tau);
            let e = sym_eigen2(&mbar);
            if !distinct(e.values) {
                return Err(Error::HypothesisViolated("T1_17 requires distinct eigenvalues of M̄".into()));
            }
            let r = k.c_tau * scale;
            for v in e.vectors {
                for sgn in [1.0, -1.0] {
                    set.points.push(PredictedPoint { x: p + v * (sgn * r), y: p - v * (sgn * r / tau), error: scale * scale });
                }
            }
            set.directions = e.vectors.to_vec();
            set.eigenvalues = e.values.to_vec();
            set.nontrivially_different = if equal { 2 } else { 4 };
        }
        TheoremId::T1_19 => {
            match inp.outer.domain().outer() {
                Some(DomainSpec::Disk { center, .. }) if (*center - p).norm() < 1e-12 => {}
                _ => return Err(Error::HypothesisViolated("T1_19 requires a disk centered at the hole".into())),
            }
            let r = k.c_tau * scale;
            let u = Point2::new(1.0, 0.0);
            set.points.push(PredictedPoint { x: p + u * r, y: p - u * (r / tau), error: scale * scale });
            set.directions = vec![u];
            set.nontrivially_different = 1;
        }
        TheoremId::T1_6 => {
            let (center, radius) = match inp.outer.domain().outer() {
                Some(DomainSpec::Disk { center, radius }) => (*center, *radius),
                _ => return Err(Error::HypothesisViolated("T1_6 requires a disk".into())),
            };
            let rel = (p - center) / radius;
            let s = rel.norm();
            let u = if s > 0.0 { rel / s } else { Point2::new(1.0, 0.0) };
            let ev = KrEvaluator::new(inp.outer.clone());
            let mut dirs = Vec::new();
            for (near_x, a, b) in [(true, l1, l2), (false, l2, l1)] {
                if s == 0.0 {
                    continue;
                }
                for z in type2_disk_solve(s, a, b)?.zeros {
                    let far = center + u * (z.t * radius);
                    let c = if near_x { VortexConfig::new(p, far, l1, l2)? } else { VortexConfig::new(far, p, l1, l2)? };
                    let d = ev.derivs(&c)?;
                    let g = if near_x { d.gx() } else { d.gy() };
                    let l_near = if near_x { l1 } else { l2 };
                    let r = type2_heps_root(g.norm(), l_near, inp.eps)?;
                    let dir = g / g.norm();
                    let near = p + dir * r;
                    let err = 1.0 / inp.eps.ln().abs();
                    let pt = if near_x {
                        PredictedPoint { x: near, y: far, error: err }
                    } else {
                        PredictedPoint { x: far, y: near, error: err }
                    };
                    set.points.push(pt);
                    dirs.push(dir);
                }
            }
            set.directions = dirs;
            set.exponent = 0.0;
            set.constant = s;
            set.nontrivially_different = if equal { set.points.len() / 2 } else { set.points.len() };
        }
        TheoremId::T1_9 => {
            let y0 = inp.y0.ok_or_else(|| Error::Precondition("T1_9 needs the partner point y0".into()))?;
            let ev = KrEvaluator::new(inp.outer.clone());
            let d = ev.derivs(&VortexConfig::new(p, y0, l1, l2)?)?;
            let gscale = l2 * l2 / (PI * diameter(inp.outer));
            if d.grad.iter().fold(0.0f64, |m, v| m.max(v.abs())) > 1e-6 * gscale {
                return Err(Error::HypothesisViolated("T1_9 requires ∇KR_Ω(P, y0) = 0".into()));
            }
            let m0 = matrix_m0(&d.hess)?;
            let [_, _, ayx, ayy] = blocks(&d.hess);
            let e = sym_eigen2(&m0);
            set.eigenvalues = e.values.to_vec();
            let inv = inv2(&ayy).ok_or_else(|| Error::HypothesisViolated("singular yy block".into()))?;
            let shift = mul2(&inv, &ayx);
            for i in 0..2 {
                let li = e.values[i];
                let other = e.values[1 - i];
                if li <= 0.0 || !distinct(e.values) {
                    continue;
                }
                let r = type2_r_eps(li, l1, inp.eps)?;
                let idx = (det2(&ayy) * (other - li)).signum() as i32;
                for sgn in [1.0, -1.0] {
                    let dx = e.vectors[i] * (sgn * r);
                    let dy = -apply2(&shift, dx);
                    set.points.push(PredictedPoint { x: p + dx, y: y0 + dy, error: r / inp.eps.ln().abs().sqrt() });
                    set.indices.push(idx);
                }
                set.directions.push(e.vectors[i]);
            }
            if set.points.is_empty() {
                return Err(Error::HypothesisViolated("T1_9 requires a simple positive eigenvalue of M0".into()));
            }
            set.exponent = 0.0;
            set.constant = 0.0;
            set.nontrivially_different = set.points.len();
        }
    }
    set.count = set.points.len();
    Ok(set)
}

/// Sup-norm residual of the type III limit system at (w, z).
pub fn limit_system_check(w: Point2, z: Point2, tau: f64, r_p: f64, eps: f64) -> Result<f64> {
    if w.norm() == 0.0 || z.norm() == 0.0 || w == z {
        return Err(Error::Precondition("limit system needs w, z ≠ 0 and w ≠ z".into()));
    }
    let b = limit_bracket(w.norm(), z.norm(), tau, r_p, eps);
    let d = w - z;
    let e1 = w * (b / w.norm2()) + d / d.norm2();
    let e2 = z * (b / z.norm2()) - d * (tau / d.norm2());
    Ok(e1.x1.abs().max(e1.x2.abs()).max(e2.x1.abs()).max(e2.x2.abs()))
}

fn limit_bracket(wn: f64, zn: f64, tau: f64, r_p: f64, eps: f64) -> f64 {
    let k = 2.0 * PI * (tau * tau + tau + 1.0) * r_p / (tau + 1.0);
    -tau / (tau + 1.0) - (tau * wn.ln() + zn.ln() + k) / (eps.ln() + 2.0 * PI * r_p)
}

/// Reduced energy F_ε(w, z) whose critical points solve the limit system.
pub fn f_eps(w: Point2, z: Point2, tau: f64, r_p: f64, eps: f64) -> f64 {
    let k = 2.0 * PI * (tau * tau + tau + 1.0) * r_p / (tau + 1.0);
    let a = tau * w.norm().ln() + z.norm().ln();
    -tau / (tau + 1.0) * a + tau * (w - z).norm().ln() - (a + k).powi(2) / (2.0 * (eps.ln() + 2.0 * PI * r_p))
}

/// F̃_ε(w̃, z̃) = F_ε((w̃,0),(z̃,0)) with its gradient and Hessian, for w̃ > 0 > z̃.
pub fn f_tilde(wt: f64, zt: f64, tau: f64, r_p: f64, eps: f64) -> Result<(f64, [f64; 2], Mat2)> {
    if !(wt > 0.0 && zt < 0.0) {
        return Err(Error::Precondition("F̃ needs w̃ > 0 > z̃".into()));
    }
    let k = 2.0 * PI * (tau * tau + tau + 1.0) * r_p / (tau + 1.0);
    let l = eps.ln() + 2.0 * PI * r_p;
    let a = tau * wt.ln() + (-zt).ln() + k;
    let d = wt - zt;
    let v = f_eps(Point2::new(wt, 0.0), Point2::new(zt, 0.0), tau, r_p, eps);
    let g = [-tau * tau / ((tau + 1.0) * wt) + tau / d - a * (tau / wt) / l, -tau / ((tau + 1.0) * zt) - tau / d - a / (zt * l)];
    let ww = tau * tau / ((tau + 1.0) * wt * wt) - tau / (d * d) - (tau * tau / (wt * wt) - a * tau / (wt * wt)) / l;
    let wz = tau / (d * d) - tau / (wt * zt * l);
    let zz = tau / ((tau + 1.0) * zt * zt) - tau / (d * d) - (1.0 - a) / (zt * zt * l);
    Ok((v, g, [[ww, wz], [wz, zz]]))
}

/// Solutions y₀ of ∇_y KR_Ω(P, y₀) = 0 (or x₀ of ∇ₓ KR_Ω(x₀, P) = 0 when `near_y` is set).
///
/// Newton runs start from the grid points where the gradient norm is a local minimum.
pub fn necessary_condition_points(
    outer: &GreenModel,
    p: Point2,
    lambda1: f64,
    lambda2: f64,
    near_y: bool,
    grid: usize,
) -> Result<Vec<Point2>> {
    let spec =
        outer.domain().outer().ok_or_else(|| Error::Precondition("necessary condition needs a bounded domain".into()))?.clone();
    let ev = KrEvaluator::new(outer.clone());
    let bp = spec.boundary_points(128)?;
    let (mut lo, mut hi) = (Point2::new(f64::INFINITY, f64::INFINITY), Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY));
    for b in &bp {
        lo = Point2::new(lo.x1.min(b.p.x1), lo.x2.min(b.p.x2));
        hi = Point2::new(hi.x1.max(b.p.x1), hi.x2.max(b.p.x2));
    }
    let diam = (hi - lo).norm();
    let make =
        |q: Point2| if near_y { VortexConfig::new(q, p, lambda1, lambda2) } else { VortexConfig::new(p, q, lambda1, lambda2) };
    let field = |q: Point2| -> Option<(Point2, Mat2)> {
        let d = ev.derivs(&make(q).ok()?).ok()?;
        Some(if near_y {
            (d.gx(), [[d.hess[0][0], d.hess[0][1]], [d.hess[1][0], d.hess[1][1]]])
        } else {
            (d.gy(), [[d.hess[2][2], d.hess[2][3]], [d.hess[3][2], d.hess[3][3]]])
        })
    };
    let gscale = lambda1.max(lambda2).powi(2) / (PI * diam);
    let n = grid.max(3);
    let node = |i: usize, j: usize| {
        Point2::new(lo.x1 + (hi.x1 - lo.x1) * (i as f64 + 0.5) / n as f64, lo.x2 + (hi.x2 - lo.x2) * (j as f64 + 0.5) / n as f64)
    };
    let mut norms = vec![f64::INFINITY; n * n];
    let mut grads = vec![None; n * n];
    for i in 0..n {
        for j in 0..n {
            let q = node(i, j);
            if outer.domain().contains(q) && (q - p).norm() > 1e-3 * diam {
                if let Some((g, _)) = field(q) {
                    // Weighting by |q − P| removes the pole of the interaction term.
                    norms[i * n + j] = g.norm() * (q - p).norm();
                    grads[i * n + j] = Some(g);
                }
            }
        }
    }
    let mut starts = Vec::new();
    // Cells where both components change sign.
    for i in 0..n - 1 {
        for j in 0..n - 1 {
            let corners = [grads[i * n + j], grads[(i + 1) * n + j], grads[i * n + j + 1], grads[(i + 1) * n + j + 1]];
            if corners.iter().all(|c| c.is_some()) {
                let c: Vec<Point2> = corners.iter().flatten().copied().collect();
                let flips = |f: fn(&Point2) -> f64| c.iter().any(|g| f(g) > 0.0) && c.iter().any(|g| f(g) < 0.0);
                if flips(|g| g.x1) && flips(|g| g.x2) {
                    starts.push((node(i, j) + node(i + 1, j + 1)) * 0.5);
                }
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            let v = norms[i * n + j];
            if !v.is_finite() {
                continue;
            }
            let mut is_min = true;
            for di in -1i64..=1 {
                for dj in -1i64..=1 {
                    let (a, b) = (i as i64 + di, j as i64 + dj);
                    if (di, dj) != (0, 0)
                        && a >= 0
                        && b >= 0
                        && (a as usize) < n
                        && (b as usize) < n
                        && norms[a as usize * n + b as usize] < v
                    {
                        is_min = false;
                    }
                }
            }
            if is_min {
                starts.push(node(i, j));
            }
        }
    }
    let mut found: Vec<Point2> = Vec::new();
    for mut q in starts {
        let mut ok = false;
        for _ in 0..60 {
            let Some((g, h)) = field(q) else { break };
            if g.x1.abs().max(g.x2.abs()) < 1e-11 * gscale {
                ok = true;
                break;
            }
            let Some(hi) = inv2(&h) else { break };
            let step = apply2(&hi, g);
            let g0 = g.norm();
            let mut t = 1.0;
            let mut moved = false;
            while t > 1e-6 {
                let cand = q - step * t;
                if outer.domain().contains(cand) && (cand - p).norm() > 1e-6 * diam {
                    if let Some((gn, _)) = field(cand) {
                        if gn.norm() < g0 {
                            q = cand;
                            moved = true;
                            break;
                        }
                    }
                }
                t *= 0.5;
            }
            if !moved {
                break;
            }
        }
        if ok && !found.iter().any(|f| (*f - q).norm() < 1e-6 * diam) {
            found.push(q);
        }
    }
    found.sort_by(|a, b| a.x1.total_cmp(&b.x1).then(a.x2.total_cmp(&b.x2)));
    Ok(found)
}

#[cfg(test)]
mod tests;
