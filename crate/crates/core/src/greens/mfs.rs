//! Method of fundamental solutions for the regular part on a simply connected domain.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use super::{accumulate, fundamental_jet, probe_points, HDerivs, Jet, MfsConfig, INV_2PI};
use crate::error::{Error, Result};
use crate::geometry::{DomainSpec, Point2};
use crate::linalg::{pinv, Pinv};

/// H(·,y) ≈ Σ_k a_k(y) ln|· − z_k| + a_c(y), with a(y) = K·b(y) and
/// b_m(y) = S(c_m, y) at collocation points c_m.
#[derive(Debug, Clone)]
pub struct MfsOuter {
    sources: Vec<Point2>,
    colloc: Vec<Point2>,
    held_out: Vec<Point2>,
    kmat: Pinv,
    offset: f64,
}

#[derive(Debug, Clone)]
pub struct MfsYState {
    pub y: Point2,
    /// Columns: a, ∂a/∂y₁, ∂a/∂y₂, ∂²a/∂y₁², ∂²a/∂y₁∂y₂, ∂²a/∂y₂².
    pub(crate) a: DMatrix<f64>,
}

fn feature_size(spec: &DomainSpec) -> f64 {
    match spec {
        DomainSpec::Disk { radius, .. } => *radius,
        DomainSpec::Ellipse { delta, alpha1, alpha2 } => 1.0 / (1.0 + alpha1.max(*alpha2) * delta),
        DomainSpec::Curve(_) => 0.5 * spec.diameter(),
    }
}

impl MfsOuter {
    pub fn fit(spec: &DomainSpec, cfg: &MfsConfig) -> Result<Self> {
        let n = cfg.n_sources_outer;
        let m = cfg.n_collocation;
        if n < 8 {
            return Err(Error::Precondition(format!("n_sources_outer = {n} is too small")));
        }
        if m < 2 * n {
            return Err(Error::Precondition(format!("n_collocation = {m} must be at least 2·sources = {}", 2 * n)));
        }
        let base = cfg.offset_fraction * feature_size(spec);
        let mut sources = Vec::with_capacity(n);
        for k in 0..n {
            let t = 2.0 * PI * k as f64 / n as f64;
            let [p, dp, ddp] = spec.param(t);
            let speed = dp.norm();
            let normal = Point2::new(dp.x2, -dp.x1) / speed;
            let kappa = dp.cross(ddp) / speed.powi(3);
            let o = if kappa < 0.0 { base.min(0.5 / kappa.abs()) } else { base };
            sources.push(p + normal * o);
        }
        let colloc: Vec<Point2> = (0..m).map(|k| spec.param(2.0 * PI * k as f64 / m as f64)[0]).collect();
        let held_out: Vec<Point2> = (0..m).map(|k| spec.param(2.0 * PI * (k as f64 + 0.5) / m as f64)[0]).collect();
        let a = DMatrix::from_fn(m, n + 1, |i, k| if k < n { colloc[i].dist(sources[k]).ln() } else { 1.0 });
        let p = pinv(&a, cfg.svd_cutoff);
        if p.rank < (n + 1) / 4 {
            return Err(Error::MfsConditioning(p.condition));
        }
        Ok(MfsOuter { sources, colloc, held_out, kmat: p, offset: base })
    }

    pub fn sources(&self) -> &[Point2] {
        &self.sources
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn collocation(&self) -> &[Point2] {
        &self.colloc
    }

    /// Coefficients of the harmonic function matching `values` at the collocation points.
    pub fn coefficients_for(&self, values: &[f64]) -> Vec<f64> {
        let v = DMatrix::from_column_slice(values.len(), 1, values);
        self.kmat.apply(&v).iter().cloned().collect()
    }

    /// Basis jets at x: ln|x − z_k| for every source, then the constant.
    pub fn basis_jets(&self, x: Point2) -> Vec<Jet> {
        let mut out: Vec<Jet> = self.sources.iter().map(|&z| Jet::log_dist(x, z)).collect();
        out.push(Jet::CONSTANT_ONE);
        out
    }

    /// Basis values only.
    pub fn basis_values(&self, x: Point2) -> Vec<f64> {
        let mut out: Vec<f64> = self.sources.iter().map(|&z| x.dist(z).ln()).collect();
        out.push(1.0);
        out
    }

    pub fn y_state(&self, y: Point2) -> MfsYState {
        let m = self.colloc.len();
        let b = DMatrix::from_fn(m, 6, |i, c| {
            let j = Jet::log_dist(y, self.colloc[i]);
            -INV_2PI
                * match c {
                    0 => j.v,
                    1 => j.g[0],
                    2 => j.g[1],
                    3 => j.h[0][0],
                    4 => j.h[0][1],
                    _ => j.h[1][1],
                }
        });
        MfsYState { y, a: self.kmat.apply(&b) }
    }

    pub fn h_with(&self, st: &MfsYState, x: Point2) -> HDerivs {
        let jets = self.basis_jets(x);
        let mut out = HDerivs::default();
        accumulate(&st.a, &jets, 1.0, &mut out);
        out
    }

    /// Sup-norm of H(x,y) − S(x,y) at held-out boundary points over probe singularities.
    pub fn residual(&self, spec: &DomainSpec) -> f64 {
        let probes = probe_points(spec, &[0.0, 0.5, 0.8], 8);
        let mut worst: f64 = 0.0;
        for y in probes {
            let st = self.y_state(y);
            for &x in &self.held_out {
                let e = self.h_with(&st, x).h - fundamental_jet(x, y).v;
                worst = worst.max(e.abs());
            }
        }
        worst
    }

    pub fn dump(&self) -> serde_json::Value {
        serde_json::json!({
            "n_sources": self.sources.len(),
            "n_collocation": self.colloc.len(),
            "offset": self.offset,
            "rank": self.kmat.rank,
            "condition": self.kmat.condition,
        })
    }
}
