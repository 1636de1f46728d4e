//! Planar domains, their boundaries and punctured variants.

use std::f64::consts::PI;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point (or vector) in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x1: f64,
    pub x2: f64,
}

impl Point2 {
    pub const ZERO: Point2 = Point2 { x1: 0.0, x2: 0.0 };

    pub const fn new(x1: f64, x2: f64) -> Self {
        Point2 { x1, x2 }
    }

    pub fn polar(r: f64, theta: f64) -> Self {
        Point2::new(r * theta.cos(), r * theta.sin())
    }

    pub fn dot(self, o: Point2) -> f64 {
        self.x1 * o.x1 + self.x2 * o.x2
    }

    /// z-component of the planar cross product.
    pub fn cross(self, o: Point2) -> f64 {
        self.x1 * o.x2 - self.x2 * o.x1
    }

    pub fn norm2(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.x1.hypot(self.x2)
    }

    pub fn dist(self, o: Point2) -> f64 {
        (self - o).norm()
    }

    pub fn unit(self) -> Point2 {
        self / self.norm()
    }

    /// Counterclockwise quarter turn.
    pub fn perp(self) -> Point2 {
        Point2::new(-self.x2, self.x1)
    }

    pub fn rotate(self, theta: f64) -> Point2 {
        let (s, c) = theta.sin_cos();
        Point2::new(c * self.x1 - s * self.x2, s * self.x1 + c * self.x2)
    }

    pub fn angle(self) -> f64 {
        self.x2.atan2(self.x1)
    }

    pub fn is_finite(self) -> bool {
        self.x1.is_finite() && self.x2.is_finite()
    }

    pub fn to_array(self) -> [f64; 2] {
        [self.x1, self.x2]
    }

    pub fn from_array(a: [f64; 2]) -> Self {
        Point2::new(a[0], a[1])
    }

    pub fn component(self, i: usize) -> f64 {
        if i == 0 {
            self.x1
        } else {
            self.x2
        }
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, o: Point2) -> Point2 {
        Point2::new(self.x1 + o.x1, self.x2 + o.x2)
    }
}

impl AddAssign for Point2 {
    fn add_assign(&mut self, o: Point2) {
        self.x1 += o.x1;
        self.x2 += o.x2;
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, o: Point2) -> Point2 {
        Point2::new(self.x1 - o.x1, self.x2 - o.x2)
    }
}

impl SubAssign for Point2 {
    fn sub_assign(&mut self, o: Point2) {
        self.x1 -= o.x1;
        self.x2 -= o.x2;
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, s: f64) -> Point2 {
        Point2::new(self.x1 * s, self.x2 * s)
    }
}

impl Mul<Point2> for f64 {
    type Output = Point2;
    fn mul(self, p: Point2) -> Point2 {
        p * self
    }
}

impl Div<f64> for Point2 {
    type Output = Point2;
    fn div(self, s: f64) -> Point2 {
        Point2::new(self.x1 / s, self.x2 / s)
    }
}

impl Neg for Point2 {
    type Output = Point2;
    fn neg(self) -> Point2 {
        Point2::new(-self.x1, -self.x2)
    }
}

/// A boundary sample: position, outward unit normal and parametric speed |dγ/dt|.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPoint {
    pub p: Point2,
    pub normal: Point2,
    pub speed: f64,
}

/// Trigonometric interpolant of a closed curve sampled at equispaced parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveTable {
    samples: Vec<Point2>,
    /// Cosine and sine coefficients per harmonic for each coordinate.
    cos1: Vec<f64>,
    sin1: Vec<f64>,
    cos2: Vec<f64>,
    sin2: Vec<f64>,
}

impl CurveTable {
    /// Builds the interpolant; samples are reordered counterclockwise if needed.
    pub fn from_samples(mut samples: Vec<Point2>) -> Result<Self> {
        let n = samples.len();
        if n < 8 {
            return Err(Error::InvalidDomain(format!("curve needs at least 8 samples, got {n}")));
        }
        if samples.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidDomain("non-finite curve sample".into()));
        }
        if signed_area(&samples) < 0.0 {
            samples.reverse();
        }
        if has_self_intersection(&samples) {
            return Err(Error::InvalidDomain("curve samples self-intersect".into()));
        }
        let m = n / 2;
        let mut cos1 = vec![0.0; m + 1];
        let mut sin1 = vec![0.0; m + 1];
        let mut cos2 = vec![0.0; m + 1];
        let mut sin2 = vec![0.0; m + 1];
        let nf = n as f64;
        for k in 0..=m {
            let (mut a1, mut b1, mut a2, mut b2) = (0.0, 0.0, 0.0, 0.0);
            for (j, p) in samples.iter().enumerate() {
                let t = 2.0 * PI * (k * j % n) as f64 / nf;
                let (s, c) = t.sin_cos();
                a1 += p.x1 * c;
                b1 += p.x1 * s;
                a2 += p.x2 * c;
                b2 += p.x2 * s;
            }
            let w = if k == 0 || (n.is_multiple_of(2) && k == m) { 1.0 / nf } else { 2.0 / nf };
            cos1[k] = a1 * w;
            sin1[k] = b1 * w;
            cos2[k] = a2 * w;
            sin2[k] = b2 * w;
        }
        if n.is_multiple_of(2) {
            sin1[m] = 0.0;
            sin2[m] = 0.0;
        }
        Ok(CurveTable { samples, cos1, sin1, cos2, sin2 })
    }

    pub fn samples(&self) -> &[Point2] {
        &self.samples
    }

    /// Position and first two parametric derivatives at parameter t ∈ [0, 2π).
    pub fn eval(&self, t: f64) -> [Point2; 3] {
        let mut out = [Point2::ZERO; 3];
        for k in 0..self.cos1.len() {
            let kf = k as f64;
            let (s, c) = (kf * t).sin_cos();
            let p = Point2::new(self.cos1[k] * c + self.sin1[k] * s, self.cos2[k] * c + self.sin2[k] * s);
            let dp = Point2::new(-self.cos1[k] * s + self.sin1[k] * c, -self.cos2[k] * s + self.sin2[k] * c) * kf;
            out[0] += p;
            out[1] += dp;
            out[2] -= p * (kf * kf);
        }
        out
    }
}

fn signed_area(pts: &[Point2]) -> f64 {
    let n = pts.len();
    (0..n).map(|i| pts[i].cross(pts[(i + 1) % n])).sum::<f64>() / 2.0
}

fn segments_cross(a: Point2, b: Point2, c: Point2, d: Point2) -> bool {
    let d1 = (b - a).cross(c - a);
    let d2 = (b - a).cross(d - a);
    let d3 = (d - c).cross(a - c);
    let d4 = (d - c).cross(b - c);
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

fn has_self_intersection(pts: &[Point2]) -> bool {
    let n = pts.len();
    for i in 0..n {
        let (a, b) = (pts[i], pts[(i + 1) % n]);
        for j in (i + 2)..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            if segments_cross(a, b, pts[j], pts[(j + 1) % n]) {
                return true;
            }
        }
    }
    false
}

/// Geometric description of a simply connected outer domain Ω.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum DomainSpec {
    Disk {
        center: Point2,
        radius: f64,
    },
    /// { x : x₁²(1+α₁δ)² + x₂²(1+α₂δ)² < 1 }.
    Ellipse {
        delta: f64,
        alpha1: f64,
        alpha2: f64,
    },
    Curve(CurveTable),
}

/// Number of multistart samples for nearest-point searches.
const NEAREST_STARTS: usize = 64;

impl DomainSpec {
    pub fn unit_disk() -> Self {
        DomainSpec::Disk { center: Point2::ZERO, radius: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            DomainSpec::Disk { center, radius } => {
                if !(radius.is_finite() && *radius > 0.0) || !center.is_finite() {
                    return Err(Error::InvalidDomain(format!("disk radius {radius} must be positive")));
                }
            }
            DomainSpec::Ellipse { delta, alpha1, alpha2 } => {
                if !(*delta >= 0.0 && *alpha1 >= 0.0 && *alpha2 >= 0.0) {
                    return Err(Error::InvalidDomain("ellipse parameters must be nonnegative".into()));
                }
            }
            DomainSpec::Curve(_) => {}
        }
        Ok(())
    }

    /// Semi-axes of the ellipse variant.
    fn semi_axes(delta: f64, alpha1: f64, alpha2: f64) -> (f64, f64) {
        (1.0 / (1.0 + alpha1 * delta), 1.0 / (1.0 + alpha2 * delta))
    }

    /// Boundary position and its first two derivatives at parameter t (counterclockwise).
    pub fn param(&self, t: f64) -> [Point2; 3] {
        let (s, c) = t.sin_cos();
        match self {
            DomainSpec::Disk { center, radius } => {
                [*center + Point2::new(c, s) * *radius, Point2::new(-s, c) * *radius, Point2::new(-c, -s) * *radius]
            }
            DomainSpec::Ellipse { delta, alpha1, alpha2 } => {
                let (a, b) = Self::semi_axes(*delta, *alpha1, *alpha2);
                [Point2::new(a * c, b * s), Point2::new(-a * s, b * c), Point2::new(-a * c, -b * s)]
            }
            DomainSpec::Curve(table) => table.eval(t),
        }
    }

    fn boundary_point_at(&self, t: f64) -> BoundaryPoint {
        let [p, dp, _] = self.param(t);
        let speed = dp.norm();
        let normal = Point2::new(dp.x2, -dp.x1) / speed;
        BoundaryPoint { p, normal, speed }
    }

    /// `n` boundary points equispaced in parameter, with outward unit normals.
    pub fn boundary_points(&self, n: usize) -> Result<Vec<BoundaryPoint>> {
        if n < 16 && !matches!(self, DomainSpec::Disk { .. } | DomainSpec::Ellipse { .. }) {
            return Err(Error::Precondition(format!("boundary_points needs n ≥ 16, got {n}")));
        }
        Ok(self.boundary_points_unchecked(n))
    }

    pub(crate) fn boundary_points_unchecked(&self, n: usize) -> Vec<BoundaryPoint> {
        (0..n).map(|k| self.boundary_point_at(2.0 * PI * k as f64 / n as f64)).collect()
    }

    /// Nearest boundary parameter to `p` by multistart damped Newton.
    fn nearest_param(&self, p: Point2) -> f64 {
        let f = |t: f64| (self.param(t)[0] - p).norm2();
        let mut best_t = 0.0;
        let mut best = f64::INFINITY;
        for k in 0..NEAREST_STARTS {
            let t = 2.0 * PI * k as f64 / NEAREST_STARTS as f64;
            let v = f(t);
            if v < best {
                best = v;
                best_t = t;
            }
        }
        let mut t = best_t;
        let mut ft = best;
        for _ in 0..60 {
            let [b, db, ddb] = self.param(t);
            let r = b - p;
            let g = 2.0 * r.dot(db);
            let h = 2.0 * (db.norm2() + r.dot(ddb));
            let mut step = if h > 0.0 { -g / h } else { -g.signum() * 1e-2 };
            let mut accepted = false;
            for _ in 0..30 {
                let fn_ = f(t + step);
                if fn_ <= ft {
                    t += step;
                    ft = fn_;
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            if !accepted || step.abs() < 1e-15 {
                break;
            }
        }
        t.rem_euclid(2.0 * PI)
    }

    /// Distance from an interior point to ∂Ω and the nearest boundary point.
    pub fn dist_to_boundary(&self, p: Point2) -> Result<(f64, Point2)> {
        if !self.contains(p) {
            return Err(Error::ExteriorPoint(p.x1, p.x2));
        }
        Ok(self.nearest(p))
    }

    pub(crate) fn nearest(&self, p: Point2) -> (f64, Point2) {
        match self {
            DomainSpec::Disk { center, radius } => {
                let v = p - *center;
                let r = v.norm();
                let dir = if r > 0.0 { v / r } else { Point2::new(1.0, 0.0) };
                ((radius - r).abs(), *center + dir * *radius)
            }
            _ => {
                let t = self.nearest_param(p);
                let q = self.param(t)[0];
                (p.dist(q), q)
            }
        }
    }

    pub fn contains(&self, p: Point2) -> bool {
        if !p.is_finite() {
            return false;
        }
        match self {
            DomainSpec::Disk { center, radius } => (p - *center).norm() < *radius,
            DomainSpec::Ellipse { delta, alpha1, alpha2 } => {
                let q = p.x1 * p.x1 * (1.0 + alpha1 * delta).powi(2) + p.x2 * p.x2 * (1.0 + alpha2 * delta).powi(2);
                q < 1.0
            }
            DomainSpec::Curve(_) => {
                let t = self.nearest_param(p);
                let bp = self.boundary_point_at(t);
                (p - bp.p).dot(bp.normal) < 0.0
            }
        }
    }

    /// Diameter estimate from dense boundary samples.
    pub fn diameter(&self) -> f64 {
        match self {
            DomainSpec::Disk { radius, .. } => 2.0 * radius,
            _ => {
                let pts = self.boundary_points_unchecked(256);
                let mut d: f64 = 0.0;
                for a in &pts {
                    for b in &pts {
                        d = d.max(a.p.dist(b.p));
                    }
                }
                d
            }
        }
    }

    /// A point strictly inside (center of mass of boundary samples).
    pub fn centroid(&self) -> Point2 {
        match self {
            DomainSpec::Disk { center, .. } => *center,
            DomainSpec::Ellipse { .. } => Point2::ZERO,
            DomainSpec::Curve(table) => {
                let s = table.samples();
                s.iter().fold(Point2::ZERO, |a, &b| a + b) / s.len() as f64
            }
        }
    }
}

/// A circular hole B(center, radius).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hole {
    pub center: Point2,
    pub radius: f64,
}

/// Default safety fraction: ε < 0.5·dist(P, ∂Ω).
pub const EPS_MAX_FRACTION: f64 = 0.5;

/// Ω with circular holes removed. The first hole is the distinguished hole B(P, ε).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PuncturedDomain {
    pub outer: DomainSpec,
    pub holes: Vec<Hole>,
}

impl PuncturedDomain {
    /// Ω \ B(P, ε) with the default safety fraction.
    pub fn new(outer: DomainSpec, p: Point2, eps: f64) -> Result<Self> {
        Self::with_holes(outer, vec![Hole { center: p, radius: eps }])
    }

    /// Ω with several disjoint holes; the first is treated as B(P, ε).
    pub fn with_holes(outer: DomainSpec, holes: Vec<Hole>) -> Result<Self> {
        outer.validate()?;
        if holes.is_empty() {
            return Err(Error::InvalidDomain("at least one hole required".into()));
        }
        for (i, h) in holes.iter().enumerate() {
            if !(h.radius > 0.0 && h.radius.is_finite()) {
                return Err(Error::InvalidDomain(format!("hole radius {} must be positive", h.radius)));
            }
            let (d, _) = outer
                .dist_to_boundary(h.center)
                .map_err(|_| Error::InvalidDomain("hole center outside the outer domain".into()))?;
            let emax = eps_max(d);
            if h.radius >= emax {
                return Err(Error::InvalidDomain(format!(
                    "hole radius {} exceeds eps_max {emax} = {EPS_MAX_FRACTION}·dist(P, ∂Ω)",
                    h.radius
                )));
            }
            for o in &holes[..i] {
                if h.center.dist(o.center) <= 2.0 * (h.radius + o.radius) {
                    return Err(Error::InvalidDomain("holes overlap or touch".into()));
                }
            }
        }
        Ok(PuncturedDomain { outer, holes })
    }

    pub fn p(&self) -> Point2 {
        self.holes[0].center
    }

    pub fn eps(&self) -> f64 {
        self.holes[0].radius
    }

    pub fn contains(&self, x: Point2) -> bool {
        self.outer.contains(x) && self.holes.iter().all(|h| x.dist(h.center) > h.radius)
    }

    /// Distance to the nearest boundary component (outer curve or hole circle).
    pub fn dist_to_boundary(&self, x: Point2) -> Result<(f64, Point2)> {
        if !self.contains(x) {
            return Err(Error::ExteriorPoint(x.x1, x.x2));
        }
        let mut best = self.outer.nearest(x);
        for h in &self.holes {
            let v = x - h.center;
            let d = v.norm() - h.radius;
            if d < best.0 {
                best = (d, h.center + v.unit() * h.radius);
            }
        }
        Ok(best)
    }
}

/// Largest admissible hole radius for a center at distance `d` from ∂Ω.
pub fn eps_max(d: f64) -> f64 {
    EPS_MAX_FRACTION * d
}

/// A plain domain, a punctured one, or the exterior of a disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Domain {
    Plain(DomainSpec),
    Punctured(PuncturedDomain),
    ExteriorDisk(Hole),
}

impl Domain {
    pub fn contains(&self, p: Point2) -> bool {
        match self {
            Domain::Plain(d) => d.contains(p),
            Domain::Punctured(d) => d.contains(p),
            Domain::ExteriorDisk(h) => p.is_finite() && p.dist(h.center) > h.radius,
        }
    }

    pub fn dist_to_boundary(&self, p: Point2) -> Result<(f64, Point2)> {
        match self {
            Domain::Plain(d) => d.dist_to_boundary(p),
            Domain::Punctured(d) => d.dist_to_boundary(p),
            Domain::ExteriorDisk(h) => {
                if !self.contains(p) {
                    return Err(Error::ExteriorPoint(p.x1, p.x2));
                }
                let v = p - h.center;
                Ok((v.norm() - h.radius, h.center + v.unit() * h.radius))
            }
        }
    }

    /// The bounded outer domain, if any.
    pub fn outer(&self) -> Option<&DomainSpec> {
        match self {
            Domain::Plain(d) => Some(d),
            Domain::Punctured(d) => Some(&d.outer),
            Domain::ExteriorDisk(_) => None,
        }
    }

    pub fn holes(&self) -> &[Hole] {
        match self {
            Domain::Plain(_) => &[],
            Domain::Punctured(d) => &d.holes,
            Domain::ExteriorDisk(h) => std::slice::from_ref(h),
        }
    }
}

impl From<DomainSpec> for Domain {
    fn from(d: DomainSpec) -> Self {
        Domain::Plain(d)
    }
}

impl From<PuncturedDomain> for Domain {
    fn from(d: PuncturedDomain) -> Self {
        Domain::Punctured(d)
    }
}
