//! The two-vortex Kirchhoff–Routh function, its derivatives, the exterior-disk
//! closed form and the small-hole expansions.
//!
//! KR(x,y) = Λ₁²R(x) + Λ₂²R(y) − 2Λ₁Λ₂G(x,y).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::greens::{fundamental_jet, robin_from_diagonal, GreenModel, HDerivs, INV_2PI};

/// Symmetric 4×4 matrix in the variables (x₁, x₂, y₁, y₂).
pub type Mat4 = [[f64; 4]; 4];

/// Vortex pair with positive strengths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VortexConfig {
    pub x: Point2,
    pub y: Point2,
    pub lambda1: f64,
    pub lambda2: f64,
}

impl VortexConfig {
    pub fn new(x: Point2, y: Point2, lambda1: f64, lambda2: f64) -> Result<Self> {
        let c = VortexConfig { x, y, lambda1, lambda2 };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        for l in [self.lambda1, self.lambda2] {
            if !(l > 0.0 && l.is_finite()) {
                return Err(Error::Precondition(format!("vortex strength {l} must be positive and finite")));
            }
        }
        if !(self.x.is_finite() && self.y.is_finite()) {
            return Err(Error::Precondition("non-finite vortex position".into()));
        }
        if self.x == self.y {
            return Err(Error::DiagonalSingularity);
        }
        Ok(())
    }

    pub fn tau(&self) -> f64 {
        self.lambda1 / self.lambda2
    }

    pub fn with_points(&self, x: Point2, y: Point2) -> Self {
        VortexConfig { x, y, ..*self }
    }

    /// The configuration with vortices (and strengths) exchanged.
    pub fn swapped(&self) -> Self {
        VortexConfig { x: self.y, y: self.x, lambda1: self.lambda2, lambda2: self.lambda1 }
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.x.x1, self.x.x2, self.y.x1, self.y.x2]
    }

    pub fn from_array(&self, z: [f64; 4]) -> Self {
        self.with_points(Point2::new(z[0], z[1]), Point2::new(z[2], z[3]))
    }
}

/// How a Hessian block was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockSource {
    Analytic,
    FiniteDifference,
}

/// Value, gradient and Hessian of KR at one configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KrDerivs {
    pub value: f64,
    pub grad: [f64; 4],
    pub hess: Mat4,
    /// Sources of the xx, xy and yy blocks.
    pub sources: [BlockSource; 3],
}

impl KrDerivs {
    pub fn gx(&self) -> Point2 {
        Point2::new(self.grad[0], self.grad[1])
    }

    pub fn gy(&self) -> Point2 {
        Point2::new(self.grad[2], self.grad[3])
    }
}

/// Evaluates KR on the domain of a Green model.
#[derive(Debug, Clone)]
pub struct KrEvaluator {
    green: GreenModel,
    /// Relative step for finite-difference checks and fallbacks.
    pub fd_step: f64,
}

impl KrEvaluator {
    pub fn new(green: GreenModel) -> Self {
        KrEvaluator { green, fd_step: 1e-5 }
    }

    pub fn green(&self) -> &GreenModel {
        &self.green
    }

    fn scale(&self) -> f64 {
        match self.green.domain().outer() {
            Some(o) => o.diameter(),
            None => 1.0,
        }
    }

    pub fn check(&self, c: &VortexConfig) -> Result<()> {
        c.validate()?;
        for p in [c.x, c.y] {
            if !self.green.domain().contains(p) {
                return Err(Error::ExteriorPoint(p.x1, p.x2));
            }
        }
        Ok(())
    }

    fn parts(&self, c: &VortexConfig) -> (HDerivs, HDerivs, HDerivs) {
        let sx = self.green.y_state(c.x);
        let sy = self.green.y_state(c.y);
        let dxx = self.green.h_with(&sx, c.x);
        let dyy = self.green.h_with(&sy, c.y);
        let dxy = self.green.h_with(&sy, c.x);
        (dxx, dyy, dxy)
    }

    pub fn value(&self, c: &VortexConfig) -> Result<f64> {
        self.check(c)?;
        let rx = self.green.h(c.x, c.x).h;
        let ry = self.green.h(c.y, c.y).h;
        let g = fundamental_jet(c.x, c.y).v - self.green.h(c.x, c.y).h;
        Ok(c.lambda1 * c.lambda1 * rx + c.lambda2 * c.lambda2 * ry - 2.0 * c.lambda1 * c.lambda2 * g)
    }

    /// Σ Λᵢ²R(xᵢ) − Σ_{i≠j} ΛᵢΛⱼG(xᵢ,xⱼ).
    pub fn value_general_k(&self, points: &[Point2], strengths: &[f64]) -> Result<f64> {
        if points.len() != strengths.len() || points.is_empty() {
            return Err(Error::Precondition("points and strengths must be nonempty and of equal length".into()));
        }
        for (i, p) in points.iter().enumerate() {
            if !self.green.domain().contains(*p) {
                return Err(Error::ExteriorPoint(p.x1, p.x2));
            }
            if points[..i].contains(p) {
                return Err(Error::DiagonalSingularity);
            }
        }
        let mut total = 0.0;
        for (i, &p) in points.iter().enumerate() {
            total += strengths[i] * strengths[i] * self.green.h(p, p).h;
            for (j, &q) in points.iter().enumerate() {
                if i != j {
                    let g = fundamental_jet(p, q).v - self.green.h(p, q).h;
                    total -= strengths[i] * strengths[j] * g;
                }
            }
        }
        Ok(total)
    }

    pub fn derivs(&self, c: &VortexConfig) -> Result<KrDerivs> {
        self.check(c)?;
        let (dxx, dyy, dxy) = self.parts(c);
        Ok(assemble(c, &dxx, &dyy, &dxy))
    }

    pub fn grad(&self, c: &VortexConfig) -> Result<(Point2, Point2)> {
        let d = self.derivs(c)?;
        Ok((d.gx(), d.gy()))
    }

    pub fn hess(&self, c: &VortexConfig) -> Result<Mat4> {
        Ok(self.derivs(c)?.hess)
    }

    /// Hessian from central differences of the analytic gradient.
    pub fn hess_fd(&self, c: &VortexConfig) -> Result<Mat4> {
        self.check(c)?;
        let h = self.fd_step * self.scale();
        let z = c.to_array();
        let mut out = [[0.0; 4]; 4];
        for j in 0..4 {
            let mut zp = z;
            let mut zm = z;
            zp[j] += h;
            zm[j] -= h;
            let gp = self.derivs(&c.from_array(zp))?.grad;
            let gm = self.derivs(&c.from_array(zm))?.grad;
            for i in 0..4 {
                out[i][j] = (gp[i] - gm[i]) / (2.0 * h);
            }
        }
        symmetrize(&mut out);
        Ok(out)
    }

    /// Gradient from central differences of the value.
    pub fn grad_fd(&self, c: &VortexConfig) -> Result<[f64; 4]> {
        self.check(c)?;
        let h = self.fd_step * self.scale();
        let z = c.to_array();
        let mut out = [0.0; 4];
        for (j, o) in out.iter_mut().enumerate() {
            let mut zp = z;
            let mut zm = z;
            zp[j] += h;
            zm[j] -= h;
            *o = (self.value(&c.from_array(zp))? - self.value(&c.from_array(zm))?) / (2.0 * h);
        }
        Ok(out)
    }
}

pub(crate) fn symmetrize(m: &mut Mat4) {
    for i in 0..4 {
        for j in 0..i {
            let a = 0.5 * (m[i][j] + m[j][i]);
            m[i][j] = a;
            m[j][i] = a;
        }
    }
}

/// Builds KR derivatives from H(x,x), H(y,y) and H(x,y) with their derivatives.
pub(crate) fn assemble(c: &VortexConfig, dxx: &HDerivs, dyy: &HDerivs, dxy: &HDerivs) -> KrDerivs {
    let (l1, l2) = (c.lambda1, c.lambda2);
    let rx = robin_from_diagonal(dxx, false);
    let ry = robin_from_diagonal(dyy, false);
    let s = fundamental_jet(c.x, c.y);
    let k = 2.0 * l1 * l2;
    let value = l1 * l1 * rx.r + l2 * l2 * ry.r - k * (s.v - dxy.h);
    let grad = [
        l1 * l1 * rx.grad_r.x1 - k * (s.g[0] - dxy.hx[0]),
        l1 * l1 * rx.grad_r.x2 - k * (s.g[1] - dxy.hx[1]),
        l2 * l2 * ry.grad_r.x1 - k * (-s.g[0] - dxy.hy[0]),
        l2 * l2 * ry.grad_r.x2 - k * (-s.g[1] - dxy.hy[1]),
    ];
    let mut hess = [[0.0; 4]; 4];
    for i in 0..2 {
        for j in 0..2 {
            hess[i][j] = l1 * l1 * rx.hess_r[i][j] - k * (s.h[i][j] - dxy.hxx[i][j]);
            hess[2 + i][2 + j] = l2 * l2 * ry.hess_r[i][j] - k * (s.h[i][j] - dxy.hyy[i][j]);
            let xy = -k * (-s.h[i][j] - dxy.hxy[i][j]);
            hess[i][2 + j] = xy;
            hess[2 + j][i] = xy;
        }
    }
    KrDerivs { value, grad, hess, sources: [BlockSource::Analytic; 3] }
}

fn check_outside_hole(p: Point2, eps: f64, c: &VortexConfig) -> Result<()> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::Precondition(format!("hole radius {eps} must be positive")));
    }
    c.validate()?;
    for q in [c.x, c.y] {
        if (q - p).norm() <= eps {
            return Err(Error::ExteriorPoint(q.x1, q.x2));
        }
    }
    Ok(())
}

/// Closed-form KR of the exterior of B(P, ε).
pub fn exterior_disk_kr(p: Point2, eps: f64, c: &VortexConfig) -> Result<f64> {
    check_outside_hole(p, eps, c)?;
    let (l1, l2) = (c.lambda1, c.lambda2);
    let a = c.x - p;
    let b = c.y - p;
    let e2 = eps * eps;
    let d = a.norm2() * b.norm2() - 2.0 * e2 * a.dot(b) + e2 * e2;
    Ok(INV_2PI * (l1 * l1 * (eps / (a.norm2() - e2)).ln() + l2 * l2 * (eps / (b.norm2() - e2)).ln())
        + l1 * l2 / PI * ((c.x - c.y).norm().ln() - (d.sqrt() / eps).ln()))
}

/// Closed-form gradient of the exterior-disk KR.
pub fn exterior_disk_grad(p: Point2, eps: f64, c: &VortexConfig) -> Result<(Point2, Point2)> {
    check_outside_hole(p, eps, c)?;
    let (l1, l2) = (c.lambda1, c.lambda2);
    let a = c.x - p;
    let b = c.y - p;
    let e2 = eps * eps;
    let d = a.norm2() * b.norm2() - 2.0 * e2 * a.dot(b) + e2 * e2;
    let n = a * b.norm2() - b * e2;
    let m = b * a.norm2() - a * e2;
    let xy = c.x - c.y;
    let r2 = xy.norm2();
    let gx = (a * (l1 / (a.norm2() - e2)) + n * (l2 / d) - xy * (l2 / r2)) * (-l1 / PI);
    let gy = (b * (l2 / (b.norm2() - e2)) + m * (l1 / d) + xy * (l1 / r2)) * (-l2 / PI);
    Ok((gx, gy))
}

/// Closed-form Hessian of the exterior-disk KR.
pub fn exterior_disk_hess(p: Point2, eps: f64, c: &VortexConfig) -> Result<Mat4> {
    check_outside_hole(p, eps, c)?;
    let (l1, l2) = (c.lambda1, c.lambda2);
    let a = (c.x - p).to_array();
    let b = (c.y - p).to_array();
    let aa = a[0] * a[0] + a[1] * a[1];
    let bb = b[0] * b[0] + b[1] * b[1];
    let ab = a[0] * b[0] + a[1] * b[1];
    let e2 = eps * eps;
    let d = aa * bb - 2.0 * e2 * ab + e2 * e2;
    let n = [bb * a[0] - e2 * b[0], bb * a[1] - e2 * b[1]];
    let m = [aa * b[0] - e2 * a[0], aa * b[1] - e2 * a[1]];
    let xy = (c.x - c.y).to_array();
    let r2 = xy[0] * xy[0] + xy[1] * xy[1];
    let (ax, bx) = (aa - e2, bb - e2);
    let mut h = [[0.0; 4]; 4];
    for j in 0..2 {
        for k in 0..2 {
            let dl = if j == k { 1.0 } else { 0.0 };
            let sd = dl / r2 - 2.0 * xy[j] * xy[k] / (r2 * r2);
            h[j][k] = -l1 / PI
                * (l1 * (dl / ax - 2.0 * a[j] * a[k] / (ax * ax)) + l2 * (bb * dl / d - 2.0 * n[j] * n[k] / (d * d)) - l2 * sd);
            h[j][2 + k] = -l1 / PI * (l2 * ((2.0 * a[j] * b[k] - e2 * dl) / d - 2.0 * n[j] * m[k] / (d * d)) + l2 * sd);
            h[2 + j][2 + k] = -l2 / PI
                * (l2 * (dl / bx - 2.0 * b[j] * b[k] / (bx * bx)) + l1 * (aa * dl / d - 2.0 * m[j] * m[k] / (d * d)) - l1 * sd);
        }
    }
    for j in 0..2 {
        for k in 0..2 {
            h[2 + k][j] = h[j][2 + k];
        }
    }
    Ok(h)
}

/// One explicitly printed term of an expansion with its numerical value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionTerm {
    pub name: String,
    pub value: Vec<f64>,
}

/// Truncated expansion: the sum of the included terms and the size of the dropped remainder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Expansion<T> {
    pub value: T,
    pub claimed_error: f64,
    pub terms: Vec<ExpansionTerm>,
}

/// Asymptotic regime of a configuration relative to the hole.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    TypeI,
    TypeII,
    TypeIII,
}

/// Distance thresholds that define the regimes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeBands {
    /// Distance to P above which a vortex counts as far from the hole.
    pub delta0: f64,
    /// Type III band is [c_lo, c_hi]·ε^β.
    pub c_lo: f64,
    pub c_hi: f64,
}

impl Default for RegimeBands {
    fn default() -> Self {
        RegimeBands { delta0: 0.1, c_lo: 0.2, c_hi: 5.0 }
    }
}

/// β = τ/(1+τ)².
pub fn beta(tau: f64) -> f64 {
    tau / ((1.0 + tau) * (1.0 + tau))
}

fn term(name: &str, v: &[f64]) -> ExpansionTerm {
    ExpansionTerm { name: name.to_string(), value: v.to_vec() }
}

fn outer_checks(outer: &GreenModel, p: Point2, eps: f64, c: &VortexConfig) -> Result<()> {
    check_outside_hole(p, eps, c)?;
    for q in [c.x, c.y, p] {
        if !outer.domain().contains(q) {
            return Err(Error::ExteriorPoint(q.x1, q.x2));
        }
    }
    Ok(())
}

/// Small-hole expansion of KR on Ω \ B(P, ε) built from the Green data of Ω.
pub fn expansion_kr(outer: &GreenModel, p: Point2, eps: f64, c: &VortexConfig) -> Result<Expansion<f64>> {
    outer_checks(outer, p, eps, c)?;
    let (l1, l2) = (c.lambda1, c.lambda2);
    let le = eps.ln();
    let rp = outer.h(p, p).h;
    let da = (c.x - p).norm();
    let db = (c.y - p).norm();
    let ext = exterior_disk_kr(p, eps, c)?;
    let kro = KrEvaluator::new(outer.clone()).value(c)?;
    let cross = -l1 * l2 / PI * (c.x - c.y).norm().ln();
    let num = l1 * (da / eps).ln() + l2 * (db / eps).ln();
    let quad = -num * num / (2.0 * PI * (le + 2.0 * PI * rp));
    let hx = outer.h(c.x, p).h;
    let hy = outer.h(p, c.y).h;
    let mixed = -2.0 * (l1 * da.ln() + l2 * db.ln()) / le * (l1 * hx + l2 * hy - (l1 + l2) * rp);
    let robin = -(l1 + l2) * (l1 + l2) * rp;
    let value = ext + kro + cross + quad + mixed + robin;
    Ok(Expansion {
        value,
        claimed_error: 1.0 / le.abs(),
        terms: vec![
            term("kr_exterior_disk", &[ext]),
            term("kr_outer", &[kro]),
            term("log_interaction", &[cross]),
            term("capacity_quadratic", &[quad]),
            term("regular_part_coupling", &[mixed]),
            term("robin_constant", &[robin]),
        ],
    })
}

/// Decides which regime a configuration belongs to, if any.
pub fn regime_of(p: Point2, eps: f64, c: &VortexConfig, bands: &RegimeBands) -> Option<Regime> {
    let da = (c.x - p).norm();
    let db = (c.y - p).norm();
    let scale = eps.powf(beta(c.tau()));
    let in_band = |d: f64| d >= bands.c_lo * scale && d <= bands.c_hi * scale;
    if in_band(da) && in_band(db) {
        Some(Regime::TypeIII)
    } else if da >= bands.delta0 && db >= bands.delta0 {
        Some(Regime::TypeI)
    } else if da.max(db) >= bands.delta0 {
        Some(Regime::TypeII)
    } else {
        None
    }
}

fn quad4(gx: Point2, gy: Point2) -> [f64; 4] {
    [gx.x1, gx.x2, gy.x1, gy.x2]
}

/// Truncated small-hole expansion of ∇KR in the requested regime.
pub fn expansion_grad(
    outer: &GreenModel,
    p: Point2,
    eps: f64,
    c: &VortexConfig,
    regime: Regime,
    bands: &RegimeBands,
) -> Result<Expansion<(Point2, Point2)>> {
    outer_checks(outer, p, eps, c)?;
    let found = regime_of(p, eps, c, bands);
    if found != Some(regime) {
        return Err(Error::RegimeMismatch(format!("requested {regime:?}, configuration is {found:?}")));
    }
    let (l1, l2) = (c.lambda1, c.lambda2);
    let le = eps.ln();
    let a = c.x - p;
    let b = c.y - p;
    let kro = KrEvaluator::new(outer.clone()).derivs(c)?;
    let (gox, goy) = (kro.gx(), kro.gy());
    match regime {
        Regime::TypeI => {
            let rp = outer.h(p, p).h;
            let (ex, ey) = exterior_disk_grad(p, eps, c)?;
            let s = fundamental_jet(c.x, c.y);
            let sx = Point2::new(s.g[0], s.g[1]) * (2.0 * l1 * l2);
            let sy = -sx;
            let ratio = (l1 * (a.norm() / eps).ln() + l2 * (b.norm() / eps).ln()) / (le + 2.0 * PI * rp);
            let cx = a * (-l1 / (PI * a.norm2()) * ratio);
            let cy = b * (-l2 / (PI * b.norm2()) * ratio);
            let err = (1.0 / (a.norm() * le.abs()) + (b.norm().ln() / le).abs() + eps * eps / a.norm2())
                .max(1.0 / (b.norm() * le.abs()) + (a.norm().ln() / le).abs() + eps * eps / b.norm2());
            Ok(Expansion {
                value: (gox + ex + sx + cx, goy + ey + sy + cy),
                claimed_error: err,
                terms: vec![
                    term("grad_kr_outer", &quad4(gox, goy)),
                    term("grad_kr_exterior_disk", &quad4(ex, ey)),
                    term("grad_singular_part", &quad4(sx, sy)),
                    term("capacity_correction", &quad4(cx, cy)),
                ],
            })
        }
        Regime::TypeII => {
            let x_near = a.norm() <= b.norm();
            let (near, l_near) = if x_near { (a, l1) } else { (b, l2) };
            let extra = near * (l_near * l_near * near.norm().ln() / (PI * le * near.norm2()));
            let (ex, ey) = if x_near { (extra, Point2::ZERO) } else { (Point2::ZERO, extra) };
            Ok(Expansion {
                value: (gox + ex, goy + ey),
                claimed_error: 1.0 / (near.norm() * le.abs()),
                terms: vec![term("grad_kr_outer", &quad4(gox, goy)), term("hole_attraction", &quad4(ex, ey))],
            })
        }
        Regime::TypeIII => {
            let rp = outer.h(p, p).h;
            let (ex, ey) = exterior_disk_grad(p, eps, c)?;
            let g = |u: Point2, v: Point2| fundamental_jet(u, v).v - outer.h(u, v).h;
            let ratio = (l1 * g(c.x, p) + l2 * g(p, c.y)) / (le + 2.0 * PI * rp);
            let hxp = outer.h(c.x, p);
            let hpy = outer.h(p, c.y);
            let hxy = outer.h(c.x, c.y);
            let rx = outer.robin_unchecked(c.x, false).grad_r;
            let ry = outer.robin_unchecked(c.y, false).grad_r;
            let lsum = l1 + l2;
            let psi = |j: usize| {
                let (aj, bj) = (a.component(j), b.component(j));
                let ux = aj / a.norm2() + 2.0 * PI * hxp.hx[j];
                let uy = bj / b.norm2() + 2.0 * PI * hpy.hy[j];
                let psi = l1 * (2.0 * ux * ratio + l1 * rx.component(j) + 2.0 * l2 * hxy.hx[j] + lsum * aj / (PI * a.norm2()));
                let phi = l2 * (2.0 * uy * ratio + 2.0 * l1 * hxy.hy[j] + l2 * ry.component(j) + lsum * bj / (PI * b.norm2()));
                (psi, phi)
            };
            let (p0, f0) = psi(0);
            let (p1, f1) = psi(1);
            let ps = Point2::new(p0, p1);
            let ph = Point2::new(f0, f1);
            let beta = beta(c.tau());
            Ok(Expansion {
                value: (ex + ps, ey + ph),
                claimed_error: eps.powf(1.0 - beta) / le.abs(),
                terms: vec![term("grad_kr_exterior_disk", &quad4(ex, ey)), term("psi", &[p0, p1]), term("phi", &[f0, f1])],
            })
        }
    }
}
