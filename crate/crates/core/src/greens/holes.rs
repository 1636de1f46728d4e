//! Regular part on a domain with small circular holes.
//!
//! H_{Ω\holes}(x,y) = H_Ω(x,y) + Σ_k c_k(y) φ_k(x), where each φ_k is a multipole
//! centred in a hole (ln|z−P| and Re/Im (ε/(z−P))ⁿ) corrected so that it vanishes
//! on the outer boundary. The coefficients are fitted by collocation on the hole
//! circles.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{accumulate, fundamental_jet, kelvin_h, probe_points, HDerivs, Jet, MfsConfig, MfsOuter, OuterRepresentation};
use crate::error::{Error, Result};
use crate::geometry::{DomainSpec, Hole, Point2, PuncturedDomain};
use crate::linalg::{pinv, Pinv};

#[derive(Debug, Clone)]
enum Outer {
    Disk { center: Point2, radius: f64 },
    Mfs(MfsOuter),
}

#[derive(Debug, Clone)]
enum OuterState {
    Disk,
    Mfs(super::mfs::MfsYState),
}

#[derive(Debug, Clone)]
pub struct HoleModel {
    outer: Outer,
    holes: Vec<Hole>,
    order: usize,
    held_out: Vec<Point2>,
    /// Pseudo-inverse of the hole collocation matrix.
    kh: Option<Pinv>,
    /// Hole collocation points.
    colloc: Vec<Point2>,
    /// Outer-source coefficients cancelling each multipole on ∂Ω (source outer only).
    corr: Option<DMatrix<f64>>,
    /// Outer basis values at the hole collocation points (source outer only).
    outer_at_colloc: Option<DMatrix<f64>>,
    rank: usize,
    condition: f64,
}

#[derive(Debug, Clone)]
pub struct HoleYState {
    pub y: Point2,
    outer: OuterState,
    /// Multipole coefficients and their y-derivatives.
    c: DMatrix<f64>,
    /// Outer-source coefficients of the corrections (source outer only).
    d: Option<DMatrix<f64>>,
}

fn z(p: Point2) -> Complex64 {
    Complex64::new(p.x1, p.x2)
}

/// Jet of Re F from F, F′, F″.
fn re_jet(f: Complex64, f1: Complex64, f2: Complex64) -> Jet {
    Jet { v: f.re, g: [f1.re, -f1.im], h: [[f2.re, -f2.im], [-f2.im, -f2.re]] }
}

/// Jet of Im F from F, F′, F″.
fn im_jet(f: Complex64, f1: Complex64, f2: Complex64) -> Jet {
    Jet { v: f.im, g: [f1.im, f1.re], h: [[f2.im, f2.re], [f2.re, -f2.im]] }
}

fn jet_sub(a: Jet, b: Jet) -> Jet {
    let mut h = a.h;
    for i in 0..2 {
        for j in 0..2 {
            h[i][j] -= b.h[i][j];
        }
    }
    Jet { v: a.v - b.v, g: [a.g[0] - b.g[0], a.g[1] - b.g[1]], h }
}

fn jet_add(a: Jet, b: Jet) -> Jet {
    let mut h = a.h;
    for i in 0..2 {
        for j in 0..2 {
            h[i][j] += b.h[i][j];
        }
    }
    Jet { v: a.v + b.v, g: [a.g[0] + b.g[0], a.g[1] + b.g[1]], h }
}

/// Multipole jets of one hole at x, in the order ln, Re t¹, Im t¹, …, Re tᴺ, Im tᴺ.
/// With `disk = Some((Q, ρ))` each function is corrected to vanish on ∂B(Q, ρ).
fn hole_jets(hole: &Hole, order: usize, disk: Option<(Point2, f64)>, x: Point2, out: &mut Vec<Jet>) {
    let zp = z(x) - z(hole.center);
    let inv = zp.inv();
    let t = inv * hole.radius;
    let log_f = Complex64::new(zp.norm().ln(), 0.0);
    let log_j = re_jet(log_f, inv, -inv * inv);
    let kel = disk.map(|(q, rho)| {
        let w = (z(x) - z(q)) / rho;
        let pb = ((z(hole.center) - z(q)) / rho).conj();
        let e = hole.radius / rho;
        let qq = Complex64::new(1.0, 0.0) - pb * w;
        (w, pb, e, qq, rho)
    });
    match kel {
        Some((_, pb, _, qq, rho)) => {
            let corr =
                re_jet(Complex64::new(rho.ln() + qq.norm().ln(), 0.0), -pb / qq / rho, -(pb * pb) / (qq * qq) / (rho * rho));
            out.push(jet_sub(log_j, corr));
        }
        None => out.push(log_j),
    }
    let mut tn = Complex64::new(1.0, 0.0);
    // powers of c = e·w/q, with c^{n−1} and c^{n−2} kept for the derivatives
    let mut cw_prev2 = Complex64::new(0.0, 0.0);
    let mut cw_prev = Complex64::new(1.0, 0.0);
    for n in 1..=order {
        let nf = n as f64;
        tn *= t;
        let f1 = -tn * inv * nf;
        let f2 = tn * inv * inv * (nf * (nf + 1.0));
        match kel {
            Some((w, pb, e, qq, rho)) => {
                let cw = e * w / qq;
                let cn = cw_prev * cw;
                let q3 = qq * qq * qq;
                let c1 = cw_prev * (nf * e) / (qq * qq) / rho;
                let mut c2 = pb * cw_prev * (nf * (nf + 1.0) * e) / q3;
                if n >= 2 {
                    c2 += cw_prev2 * (nf * (nf - 1.0) * e * e) / q3;
                }
                c2 /= rho * rho;
                out.push(jet_sub(re_jet(tn, f1, f2), re_jet(cn, c1, c2)));
                out.push(jet_add(im_jet(tn, f1, f2), im_jet(cn, c1, c2)));
                cw_prev2 = cw_prev;
                cw_prev = cn;
            }
            None => {
                out.push(re_jet(tn, f1, f2));
                out.push(im_jet(tn, f1, f2));
            }
        }
    }
}

impl HoleModel {
    pub fn fit(pd: &PuncturedDomain, cfg: &MfsConfig) -> Result<Self> {
        let order = cfg.n_sources_hole;
        if order == 0 {
            return Err(Error::Precondition("hole multipole order must be positive".into()));
        }
        let outer = match (&pd.outer, cfg.outer) {
            (DomainSpec::Disk { center, radius }, OuterRepresentation::Auto) => Outer::Disk { center: *center, radius: *radius },
            (spec, _) => Outer::Mfs(MfsOuter::fit(spec, cfg)?),
        };
        let per_hole = 2 * order + 1;
        let m_per = 2 * per_hole;
        let mut colloc = Vec::new();
        let mut held_out = Vec::new();
        for h in &pd.holes {
            for k in 0..m_per {
                let a = 2.0 * PI * k as f64 / m_per as f64;
                colloc.push(h.center + Point2::polar(h.radius, a));
                held_out.push(h.center + Point2::polar(h.radius, a + PI / m_per as f64));
            }
        }
        let mut model = HoleModel {
            outer,
            holes: pd.holes.clone(),
            order,
            held_out,
            kh: None,
            colloc,
            corr: None,
            outer_at_colloc: None,
            rank: 0,
            condition: 0.0,
        };
        if let Outer::Mfs(m) = &model.outer {
            let bc = m.collocation().to_vec();
            let vals: Vec<Vec<f64>> = bc.iter().map(|&x| model.multipole_jets(x).iter().map(|j| j.v).collect()).collect();
            let nk = model.n_basis();
            let no = m.sources().len() + 1;
            let mut corr = DMatrix::zeros(nk, no);
            for k in 0..nk {
                let col: Vec<f64> = vals.iter().map(|v| v[k]).collect();
                for (l, c) in m.coefficients_for(&col).into_iter().enumerate() {
                    corr[(k, l)] = c;
                }
            }
            model.corr = Some(corr);
            let rows: Vec<Vec<f64>> = model.colloc.iter().map(|&x| m.basis_values(x)).collect();
            model.outer_at_colloc = Some(DMatrix::from_fn(rows.len(), no, |i, k| rows[i][k]));
        }
        let nk = model.n_basis();
        let mut a = DMatrix::zeros(model.colloc.len(), nk);
        for (i, &x) in model.colloc.iter().enumerate() {
            for (k, v) in model.basis_values(x).into_iter().enumerate() {
                a[(i, k)] = v;
            }
        }
        let p = pinv(&a, cfg.svd_cutoff);
        if p.rank < nk / 2 {
            return Err(Error::MfsConditioning(p.condition));
        }
        model.rank = p.rank;
        model.condition = p.condition;
        model.kh = Some(p);
        Ok(model)
    }

    fn n_basis(&self) -> usize {
        self.holes.len() * (2 * self.order + 1)
    }

    fn disk(&self) -> Option<(Point2, f64)> {
        match &self.outer {
            Outer::Disk { center, radius } => Some((*center, *radius)),
            Outer::Mfs(_) => None,
        }
    }

    /// Multipole jets at x (corrected on a disk outer boundary).
    fn multipole_jets(&self, x: Point2) -> Vec<Jet> {
        let mut out = Vec::with_capacity(self.n_basis());
        let disk = self.disk();
        for h in &self.holes {
            hole_jets(h, self.order, disk, x, &mut out);
        }
        out
    }

    /// Values of the corrected basis functions φ_k at x.
    fn basis_values(&self, x: Point2) -> Vec<f64> {
        let mut v: Vec<f64> = self.multipole_jets(x).iter().map(|j| j.v).collect();
        if let (Outer::Mfs(m), Some(corr)) = (&self.outer, &self.corr) {
            let psi = m.basis_values(x);
            for (k, vk) in v.iter_mut().enumerate() {
                *vk -= (0..psi.len()).map(|l| corr[(k, l)] * psi[l]).sum::<f64>();
            }
        }
        v
    }

    pub fn y_state(&self, y: Point2) -> HoleYState {
        let outer = match &self.outer {
            Outer::Disk { .. } => OuterState::Disk,
            Outer::Mfs(m) => OuterState::Mfs(m.y_state(y)),
        };
        let mc = self.colloc.len();
        let mut g = DMatrix::zeros(mc, 6);
        let outer_vals = match (&self.outer_at_colloc, &outer) {
            (Some(b), OuterState::Mfs(st)) => Some(b * &st.a),
            _ => None,
        };
        for (i, &x) in self.colloc.iter().enumerate() {
            let s = fundamental_jet(y, x);
            let row = [s.v, s.g[0], s.g[1], s.h[0][0], s.h[0][1], s.h[1][1]];
            let hrow = match (&self.outer, &outer_vals) {
                (Outer::Disk { center, radius }, _) => {
                    let ho = kelvin_h(*center, *radius, x, y);
                    [ho.h, ho.hy[0], ho.hy[1], ho.hyy[0][0], ho.hyy[0][1], ho.hyy[1][1]]
                }
                (Outer::Mfs(_), Some(v)) => std::array::from_fn(|c| v[(i, c)]),
                _ => unreachable!(),
            };
            for c in 0..6 {
                g[(i, c)] = row[c] - hrow[c];
            }
        }
        let c = self.kh.as_ref().expect("fitted model").apply(&g);
        let d = self.corr.as_ref().map(|corr| corr.transpose() * &c);
        HoleYState { y, outer, c, d }
    }

    pub fn h_with(&self, st: &HoleYState, x: Point2) -> HDerivs {
        let mut out = match (&self.outer, &st.outer) {
            (Outer::Disk { center, radius }, _) => kelvin_h(*center, *radius, x, st.y),
            (Outer::Mfs(m), OuterState::Mfs(s)) => m.h_with(s, x),
            _ => panic!("y-state built for a different model"),
        };
        accumulate(&st.c, &self.multipole_jets(x), 1.0, &mut out);
        if let (Outer::Mfs(m), Some(d)) = (&self.outer, &st.d) {
            accumulate(d, &m.basis_jets(x), -1.0, &mut out);
        }
        out
    }

    /// Sup-norm of H − S at held-out boundary points over probe singularities
    /// near and away from every hole.
    pub fn residual(&self, pd: &PuncturedDomain) -> f64 {
        let mut probes: Vec<Point2> =
            probe_points(&pd.outer, &[0.0, 0.5, 0.8], 8).into_iter().filter(|&p| pd.contains(p)).collect();
        for h in &self.holes {
            let (dh, _) = pd.outer.nearest(h.center);
            for &r in &[2.0 * h.radius, 10.0 * h.radius, 0.3 * dh] {
                for k in 0..4 {
                    let p = h.center + Point2::polar(r, 2.0 * PI * (k as f64 + 0.125) / 4.0);
                    if pd.contains(p) {
                        probes.push(p);
                    }
                }
            }
        }
        let mut checks: Vec<Point2> = self.held_out.clone();
        if let Outer::Mfs(m) = &self.outer {
            let n = m.collocation().len();
            checks.extend((0..n).map(|k| pd.outer.param(2.0 * PI * (k as f64 + 0.5) / n as f64)[0]));
        } else {
            checks.extend((0..256).map(|k| pd.outer.param(2.0 * PI * (k as f64 + 0.5) / 256.0)[0]));
        }
        let mut worst: f64 = 0.0;
        for y in probes {
            let st = self.y_state(y);
            for &x in &checks {
                let e = self.h_with(&st, x).h - fundamental_jet(x, y).v;
                worst = worst.max(e.abs());
            }
        }
        worst
    }

    /// Distance from the boundary below which accuracy degrades.
    pub fn accuracy_margin(&self) -> f64 {
        match &self.outer {
            Outer::Disk { .. } => 0.0,
            Outer::Mfs(m) => m.offset(),
        }
    }

    /// Multipole centres followed by outer sources.
    pub fn source_points(&self) -> Vec<Point2> {
        let mut out: Vec<Point2> = self.holes.iter().map(|h| h.center).collect();
        if let Outer::Mfs(m) = &self.outer {
            out.extend_from_slice(m.sources());
        }
        out
    }

    pub fn dump(&self) -> serde_json::Value {
        serde_json::json!({
            "holes": self.holes.iter().map(|h| serde_json::json!({
                "center": [h.center.x1, h.center.x2],
                "radius": h.radius,
            })).collect::<Vec<_>>(),
            "multipole_order": self.order,
            "n_collocation": self.colloc.len(),
            "rank": self.rank,
            "condition": self.condition,
            "outer": match &self.outer {
                Outer::Disk { center, radius } => serde_json::json!({
                    "kind": "closed_form_disk",
                    "center": [center.x1, center.x2],
                    "radius": radius,
                }),
                Outer::Mfs(m) => m.dump(),
            },
        })
    }
}
