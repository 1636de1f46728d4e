//! Fundamental solution, closed-form disk Green functions and fitted Green
//! functions for general and punctured domains.
//!
//! Conventions: G(x,y) = S(x,y) − H(x,y) with S(x,y) = −(1/2π) ln|x−y|, and the
//! Robin function is R(x) = H(x,x).

mod holes;
mod kelvin;
mod mfs;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Domain, DomainSpec, Hole, Point2, PuncturedDomain};
use crate::linalg::{add2, scale2, transpose2, Mat2, ZERO2};

pub use holes::HoleModel;
pub use kelvin::kelvin_h;
pub use mfs::MfsOuter;

pub(crate) const INV_2PI: f64 = 0.5 / PI;

/// Value, gradient and Hessian of a scalar function of one planar point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Jet {
    pub v: f64,
    pub g: [f64; 2],
    pub h: Mat2,
}

impl Jet {
    pub const CONSTANT_ONE: Jet = Jet { v: 1.0, g: [0.0; 2], h: ZERO2 };

    /// Jet of ln|x − z|.
    pub fn log_dist(x: Point2, z: Point2) -> Jet {
        let d = x - z;
        let r2 = d.norm2();
        let inv = 1.0 / r2;
        let inv2 = inv * inv;
        Jet {
            v: 0.5 * r2.ln(),
            g: [d.x1 * inv, d.x2 * inv],
            h: [
                [(d.x2 * d.x2 - d.x1 * d.x1) * inv2, -2.0 * d.x1 * d.x2 * inv2],
                [-2.0 * d.x1 * d.x2 * inv2, (d.x1 * d.x1 - d.x2 * d.x2) * inv2],
            ],
        }
    }
}

/// Regular part H(x,y) with first and second derivatives in both arguments.
/// `hxy[i][j]` is ∂²H/∂x_i∂y_j.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct HDerivs {
    pub h: f64,
    pub hx: [f64; 2],
    pub hy: [f64; 2],
    pub hxx: Mat2,
    pub hxy: Mat2,
    pub hyy: Mat2,
}

impl HDerivs {
    /// Swaps the roles of the two arguments.
    pub fn swapped(&self) -> HDerivs {
        HDerivs { h: self.h, hx: self.hy, hy: self.hx, hxx: self.hyy, hxy: transpose2(&self.hxy), hyy: self.hxx }
    }
}

/// S(x,y) = −(1/2π) ln|x−y| as a jet in x (y fixed).
pub fn fundamental_jet(x: Point2, y: Point2) -> Jet {
    let j = Jet::log_dist(x, y);
    Jet { v: -INV_2PI * j.v, g: [-INV_2PI * j.g[0], -INV_2PI * j.g[1]], h: scale2(&j.h, -INV_2PI) }
}

/// The fundamental solution S(x,y) = −(1/2π) ln|x−y|.
pub fn fundamental_solution(x: Point2, y: Point2) -> Result<f64> {
    if x == y {
        return Err(Error::DiagonalSingularity);
    }
    Ok(-INV_2PI * x.dist(y).ln())
}

/// Closed-form Green function of B(q, r): returns (G, H).
pub fn disk_green(q: Point2, r: f64, x: Point2, y: Point2) -> Result<(f64, f64)> {
    let d = DomainSpec::Disk { center: q, radius: r };
    d.validate()?;
    for p in [x, y] {
        if (p - q).norm() > r {
            return Err(Error::ExteriorPoint(p.x1, p.x2));
        }
    }
    let h = kelvin_h(q, r, x, y).h;
    Ok((fundamental_solution(x, y)? - h, h))
}

/// Evaluation of G and H with derivatives at a pair (x,y).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GreenEval {
    /// G(x,y); NaN on the diagonal.
    pub g: f64,
    pub gx: [f64; 2],
    pub gy: [f64; 2],
    pub h: HDerivs,
}

/// Robin function data at a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobinData {
    pub r: f64,
    pub grad_r: Point2,
    /// ∂²H/∂x_i∂x_j at x = y.
    pub hess_h_xx: Mat2,
    /// ∂²H/∂y_i∂x_j at x = y.
    pub hess_h_yx: Mat2,
    /// Full Hessian of R.
    pub hess_r: Mat2,
    /// Set when the point is too close to the boundary for the model's nominal accuracy.
    pub near_boundary: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GreenKind {
    ClosedFormDisk,
    ClosedFormExteriorDisk,
    MfsNumeric,
}

/// How the outer boundary is represented inside a punctured-domain model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OuterRepresentation {
    /// Closed form for disks, fundamental-solution sources otherwise.
    Auto,
    /// Always fundamental-solution sources.
    Sources,
}

/// Fitting parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MfsConfig {
    pub n_sources_outer: usize,
    /// Multipole order per hole (each hole carries 2·order + 1 basis functions).
    pub n_sources_hole: usize,
    pub offset_fraction: f64,
    pub n_collocation: usize,
    pub svd_cutoff: f64,
    pub outer: OuterRepresentation,
}

impl Default for MfsConfig {
    fn default() -> Self {
        MfsConfig {
            n_sources_outer: 256,
            n_sources_hole: 32,
            offset_fraction: 0.15,
            n_collocation: 512,
            svd_cutoff: 1e-13,
            outer: OuterRepresentation::Auto,
        }
    }
}

#[derive(Debug, Clone)]
enum Repr {
    Kelvin { center: Point2, radius: f64 },
    Mfs(MfsOuter),
    Holes(Box<HoleModel>),
}

/// Per-singularity state: everything that depends on y only.
#[derive(Debug, Clone)]
pub enum YState {
    Kelvin(Point2),
    Mfs(mfs::MfsYState),
    Holes(holes::HoleYState),
}

impl YState {
    pub fn point(&self) -> Point2 {
        match self {
            YState::Kelvin(y) => *y,
            YState::Mfs(s) => s.y,
            YState::Holes(s) => s.y,
        }
    }
}

/// Evaluator for G, H and the Robin function on a fixed domain.
#[derive(Debug, Clone)]
pub struct GreenModel {
    domain: Domain,
    kind: GreenKind,
    repr: Repr,
    fit_residual: f64,
    /// Distance from the boundary below which accuracy degrades.
    accuracy_margin: f64,
}

impl GreenModel {
    /// Closed-form Green function of the disk B(center, radius).
    pub fn closed_form_disk(center: Point2, radius: f64) -> Result<Self> {
        let spec = DomainSpec::Disk { center, radius };
        spec.validate()?;
        Ok(GreenModel {
            domain: Domain::Plain(spec),
            kind: GreenKind::ClosedFormDisk,
            repr: Repr::Kelvin { center, radius },
            fit_residual: 0.0,
            accuracy_margin: 0.0,
        })
    }

    /// Closed-form Green function of the exterior of B(p, eps).
    pub fn exterior_disk(p: Point2, eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::InvalidDomain(format!("hole radius {eps} must be positive")));
        }
        Ok(GreenModel {
            domain: Domain::ExteriorDisk(Hole { center: p, radius: eps }),
            kind: GreenKind::ClosedFormExteriorDisk,
            repr: Repr::Kelvin { center: p, radius: eps },
            fit_residual: 0.0,
            accuracy_margin: 0.0,
        })
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn kind(&self) -> GreenKind {
        self.kind
    }

    /// Sup-norm boundary residual at held-out points (0 for closed forms).
    pub fn fit_residual(&self) -> f64 {
        self.fit_residual
    }

    /// Source points of the fitted representation (empty for closed forms).
    pub fn source_points(&self) -> Vec<Point2> {
        match &self.repr {
            Repr::Kelvin { .. } => Vec::new(),
            Repr::Mfs(m) => m.sources().to_vec(),
            Repr::Holes(h) => h.source_points(),
        }
    }

    /// The distinguished hole (P, ε) of a punctured model.
    pub fn hole(&self) -> Option<Hole> {
        match &self.domain {
            Domain::Punctured(p) => Some(p.holes[0]),
            _ => None,
        }
    }

    pub fn y_state(&self, y: Point2) -> YState {
        match &self.repr {
            Repr::Kelvin { .. } => YState::Kelvin(y),
            Repr::Mfs(m) => YState::Mfs(m.y_state(y)),
            Repr::Holes(h) => YState::Holes(h.y_state(y)),
        }
    }

    /// H(x,y) and derivatives for a prepared y.
    pub fn h_with(&self, st: &YState, x: Point2) -> HDerivs {
        match (&self.repr, st) {
            (Repr::Kelvin { center, radius }, YState::Kelvin(y)) => kelvin_h(*center, *radius, x, *y),
            (Repr::Mfs(m), YState::Mfs(s)) => m.h_with(s, x),
            (Repr::Holes(h), YState::Holes(s)) => h.h_with(s, x),
            _ => panic!("y-state built for a different model"),
        }
    }

    /// H(x,y) and derivatives.
    pub fn h(&self, x: Point2, y: Point2) -> HDerivs {
        self.h_with(&self.y_state(y), x)
    }

    /// Values of G and H with derivatives; `order` only controls validation of the diagonal.
    pub fn eval(&self, x: Point2, y: Point2, order: u8) -> Result<GreenEval> {
        for p in [x, y] {
            if !self.domain.contains(p) {
                return Err(Error::ExteriorPoint(p.x1, p.x2));
            }
        }
        if order > 2 {
            return Err(Error::Precondition(format!("derivative order {order} > 2")));
        }
        let h = self.h(x, y);
        if x == y {
            if order == 0 {
                return Err(Error::DiagonalSingularity);
            }
            return Ok(GreenEval { g: f64::NAN, gx: [f64::NAN; 2], gy: [f64::NAN; 2], h });
        }
        let s = fundamental_jet(x, y);
        Ok(GreenEval { g: s.v - h.h, gx: [s.g[0] - h.hx[0], s.g[1] - h.hx[1]], gy: [-s.g[0] - h.hy[0], -s.g[1] - h.hy[1]], h })
    }

    /// Robin function data R(x) = H(x,x).
    pub fn robin(&self, x: Point2) -> Result<RobinData> {
        let (d, _) = self.domain.dist_to_boundary(x)?;
        Ok(self.robin_unchecked(x, d < self.accuracy_margin))
    }

    pub(crate) fn robin_unchecked(&self, x: Point2, near_boundary: bool) -> RobinData {
        let hd = self.h(x, x);
        robin_from_diagonal(&hd, near_boundary)
    }

    /// JSON dump of the fitted representation.
    pub fn dump(&self) -> serde_json::Value {
        let kind = self.kind;
        let mut v = serde_json::json!({
            "kind": kind,
            "fit_residual": self.fit_residual,
            "source_points": self.source_points().iter().map(|p| [p.x1, p.x2]).collect::<Vec<_>>(),
        });
        match &self.repr {
            Repr::Mfs(m) => {
                v["outer"] = m.dump();
            }
            Repr::Holes(h) => {
                v["holes"] = h.dump();
            }
            Repr::Kelvin { center, radius } => {
                v["center"] = serde_json::json!([center.x1, center.x2]);
                v["radius"] = serde_json::json!(radius);
            }
        }
        v
    }
}

pub(crate) fn robin_from_diagonal(hd: &HDerivs, near_boundary: bool) -> RobinData {
    let cross = add2(&hd.hxy, &transpose2(&hd.hxy));
    RobinData {
        r: hd.h,
        grad_r: Point2::new(hd.hx[0] + hd.hy[0], hd.hx[1] + hd.hy[1]),
        hess_h_xx: hd.hxx,
        hess_h_yx: transpose2(&hd.hxy),
        hess_r: add2(&add2(&hd.hxx, &hd.hyy), &cross),
        near_boundary,
    }
}

/// Fits a Green model on a plain or punctured domain.
pub fn mfs_fit(domain: &Domain, cfg: &MfsConfig) -> Result<GreenModel> {
    match domain {
        Domain::Plain(spec) => {
            spec.validate()?;
            let m = MfsOuter::fit(spec, cfg)?;
            let margin = m.offset();
            let res = m.residual(spec);
            Ok(GreenModel {
                domain: domain.clone(),
                kind: GreenKind::MfsNumeric,
                repr: Repr::Mfs(m),
                fit_residual: res,
                accuracy_margin: margin,
            })
        }
        Domain::Punctured(pd) => {
            let hm = HoleModel::fit(pd, cfg)?;
            let res = hm.residual(pd);
            let margin = hm.accuracy_margin();
            Ok(GreenModel {
                domain: domain.clone(),
                kind: GreenKind::MfsNumeric,
                repr: Repr::Holes(Box::new(hm)),
                fit_residual: res,
                accuracy_margin: margin,
            })
        }
        Domain::ExteriorDisk(h) => GreenModel::exterior_disk(h.center, h.radius),
    }
}

/// Convenience: punctured-domain model with default settings.
pub fn punctured_model(outer: DomainSpec, p: Point2, eps: f64) -> Result<GreenModel> {
    let pd = PuncturedDomain::new(outer, p, eps)?;
    mfs_fit(&Domain::Punctured(pd), &MfsConfig::default())
}

/// Probe singularity locations used to measure boundary residuals: points on
/// rays from `c` toward the boundary at fixed fractions of the way.
pub(crate) fn probe_points(spec: &DomainSpec, fractions: &[f64], rays: usize) -> Vec<Point2> {
    let c = spec.centroid();
    let mut out = Vec::new();
    for k in 0..rays {
        let dir = Point2::polar(1.0, 2.0 * PI * (k as f64 + 0.25) / rays as f64);
        // distance to boundary along the ray by bisection
        let (mut lo, mut hi) = (0.0, spec.diameter());
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if spec.contains(c + dir * mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        for &f in fractions {
            out.push(c + dir * (lo * f));
        }
    }
    out
}

/// Adds Σ_k sign·coef[k,·]·jets[k] into `out`, where the six coefficient columns
/// are the coefficient and its y-derivatives (∂₁, ∂₂, ∂₁₁, ∂₁₂, ∂₂₂).
pub(crate) fn accumulate(coef: &nalgebra::DMatrix<f64>, jets: &[Jet], sign: f64, out: &mut HDerivs) {
    debug_assert_eq!(coef.nrows(), jets.len());
    for (k, j) in jets.iter().enumerate() {
        let c = [
            sign * coef[(k, 0)],
            sign * coef[(k, 1)],
            sign * coef[(k, 2)],
            sign * coef[(k, 3)],
            sign * coef[(k, 4)],
            sign * coef[(k, 5)],
        ];
        out.h += c[0] * j.v;
        out.hy[0] += c[1] * j.v;
        out.hy[1] += c[2] * j.v;
        out.hyy[0][0] += c[3] * j.v;
        out.hyy[0][1] += c[4] * j.v;
        out.hyy[1][0] += c[4] * j.v;
        out.hyy[1][1] += c[5] * j.v;
        for i in 0..2 {
            out.hx[i] += c[0] * j.g[i];
            out.hxy[i][0] += c[1] * j.g[i];
            out.hxy[i][1] += c[2] * j.g[i];
            for l in 0..2 {
                out.hxx[i][l] += c[0] * j.h[i][l];
            }
        }
    }
}

/// |H(x,y) − H(y,x)|.
pub fn symmetric_defect(model: &GreenModel, x: Point2, y: Point2) -> f64 {
    (model.h(x, y).h - model.h(y, x).h).abs()
}
