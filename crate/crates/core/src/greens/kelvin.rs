//! Closed-form regular parts built from the Kelvin image.
//!
//! For the disk B(c, ρ) and for the exterior of B(c, ρ) the regular part is the
//! same expression: with u = (x−c)/ρ, v = (y−c)/ρ and
//! f = |u|²|v|² − 2u·v + 1, H(x,y) = −(1/4π) ln f − (1/2π) ln ρ.

use super::{HDerivs, INV_2PI};
use crate::geometry::Point2;

pub fn kelvin_h(center: Point2, radius: f64, x: Point2, y: Point2) -> HDerivs {
    let u = (x - center) / radius;
    let v = (y - center) / radius;
    let uu = u.norm2();
    let vv = v.norm2();
    let f = uu * vv - 2.0 * u.dot(v) + 1.0;
    let fu = [2.0 * vv * u.x1 - 2.0 * v.x1, 2.0 * vv * u.x2 - 2.0 * v.x2];
    let fv = [2.0 * uu * v.x1 - 2.0 * u.x1, 2.0 * uu * v.x2 - 2.0 * u.x2];
    let ua = u.to_array();
    let va = v.to_array();
    let c = -0.5 * INV_2PI;
    let s1 = c / radius;
    let s2 = c / (radius * radius);
    let mut out = HDerivs { h: c * f.ln() - INV_2PI * radius.ln(), ..Default::default() };
    for i in 0..2 {
        out.hx[i] = s1 * fu[i] / f;
        out.hy[i] = s1 * fv[i] / f;
        for j in 0..2 {
            let d = if i == j { 1.0 } else { 0.0 };
            let fuu = 2.0 * vv * d;
            let fvv = 2.0 * uu * d;
            let fuv = 4.0 * ua[i] * va[j] - 2.0 * d;
            out.hxx[i][j] = s2 * (fuu / f - fu[i] * fu[j] / (f * f));
            out.hyy[i][j] = s2 * (fvv / f - fv[i] * fv[j] / (f * f));
            out.hxy[i][j] = s2 * (fuv / f - fu[i] * fv[j] / (f * f));
        }
    }
    out
}
