//! Standalone SVG plots.

use std::fmt::Write;

use krcrit::validate::SweepResult;
use krcrit::{DomainSpec, Point2};

const W: f64 = 480.0;
const H: f64 = 480.0;
const PAD: f64 = 56.0;

struct Frame {
    lo: Point2,
    hi: Point2,
}

impl Frame {
    fn map(&self, p: Point2) -> (f64, f64) {
        let sx = (p.x1 - self.lo.x1) / (self.hi.x1 - self.lo.x1);
        let sy = (p.x2 - self.lo.x2) / (self.hi.x2 - self.lo.x2);
        (PAD + sx * (W - 2.0 * PAD), H - PAD - sy * (H - 2.0 * PAD))
    }
}

fn header(title: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" font-family="sans-serif" font-size="14" text-anchor="middle">{title}</text>"#,
        W / 2.0
    );
    s
}

fn axes(s: &mut String, xlabel: &str, ylabel: &str) {
    let _ = writeln!(
        s,
        r#"<rect x="{PAD}" y="{PAD}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - 2.0 * PAD,
        H - 2.0 * PAD
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle">{xlabel}</text>"#,
        W / 2.0,
        H - 16.0
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle" transform="rotate(-90 16 {})">{ylabel}</text>"#,
        H / 2.0,
        H / 2.0
    );
}

fn tick_labels(s: &mut String, f: &Frame) {
    let (x0, y0) = f.map(f.lo);
    let (x1, y1) = f.map(f.hi);
    for (x, y, t, anchor) in [
        (x0, y0 + 16.0, format!("{:.3}", f.lo.x1), "start"),
        (x1, y0 + 16.0, format!("{:.3}", f.hi.x1), "end"),
        (x0 - 4.0, y0, format!("{:.3}", f.lo.x2), "end"),
        (x0 - 4.0, y1 + 10.0, format!("{:.3}", f.hi.x2), "end"),
    ] {
        let _ = writeln!(
            s,
            r#"<text x="{x:.1}" y="{y:.1}" font-family="sans-serif" font-size="10" text-anchor="{anchor}">{t}</text>"#
        );
    }
}

/// Log-log plot of |x_ε − P| against ε with the fitted line.
pub fn scaling(res: &SweepResult) -> String {
    let pts: Vec<Point2> = res.records.iter().filter_map(|r| r.radius_x.map(|v| Point2::new(r.eps.log10(), v.log10()))).collect();
    let mut s = header(&format!("{}: scaling of |x - P|", res.scenario.id));
    axes(&mut s, "log10 eps", "log10 |x - P|");
    if pts.is_empty() {
        s.push_str("</svg>\n");
        return s;
    }
    let (mut lo, mut hi) = (pts[0], pts[0]);
    for p in &pts {
        lo = Point2::new(lo.x1.min(p.x1), lo.x2.min(p.x2));
        hi = Point2::new(hi.x1.max(p.x1), hi.x2.max(p.x2));
    }
    let pad = Point2::new(0.1 * (hi.x1 - lo.x1).max(0.5), 0.1 * (hi.x2 - lo.x2).max(0.5));
    let f = Frame { lo: lo - pad, hi: hi + pad };
    tick_labels(&mut s, &f);
    if let Some(fit) = &res.fit {
        let line = |x: f64| Point2::new(x, fit.constant.log10() + fit.exponent * x);
        let (ax, ay) = f.map(line(f.lo.x1));
        let (bx, by) = f.map(line(f.hi.x1));
        let _ =
            writeln!(s, r#"<line x1="{ax:.2}" y1="{ay:.2}" x2="{bx:.2}" y2="{by:.2}" stroke="steelblue" stroke-width="1.5"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{}" y="44" font-family="sans-serif" font-size="12" text-anchor="middle">exponent {:.4}, constant {:.4}</text>"#,
            W / 2.0,
            fit.exponent,
            fit.constant
        );
    }
    for p in &pts {
        let (x, y) = f.map(*p);
        let _ = writeln!(s, r#"<circle cx="{x:.2}" cy="{y:.2}" r="4" fill="crimson"/>"#);
    }
    s.push_str("</svg>\n");
    s
}

/// Scatter of vortex pairs with the domain boundary and the hole center.
pub fn locations(domain: &DomainSpec, p: Point2, pairs: &[(Point2, Point2)]) -> krcrit::Result<String> {
    let bnd: Vec<Point2> = domain.boundary_points(256)?.iter().map(|b| b.p).collect();
    let (mut lo, mut hi) = (bnd[0], bnd[0]);
    for q in &bnd {
        lo = Point2::new(lo.x1.min(q.x1), lo.x2.min(q.x2));
        hi = Point2::new(hi.x1.max(q.x1), hi.x2.max(q.x2));
    }
    let side = (hi.x1 - lo.x1).max(hi.x2 - lo.x2) * 0.55;
    let c = (lo + hi) * 0.5;
    let f = Frame { lo: c - Point2::new(side, side), hi: c + Point2::new(side, side) };
    let mut s = header("critical point locations");
    axes(&mut s, "x1", "x2");
    tick_labels(&mut s, &f);
    let path: Vec<String> = bnd.iter().map(|q| f.map(*q)).map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
    let _ = writeln!(s, r#"<polygon points="{}" fill="none" stroke="black"/>"#, path.join(" "));
    let (px, py) = f.map(p);
    let _ = writeln!(s, r#"<circle cx="{px:.2}" cy="{py:.2}" r="2" fill="black"/>"#);
    for (x, y) in pairs {
        let (ax, ay) = f.map(*x);
        let (bx, by) = f.map(*y);
        let _ = writeln!(s, r#"<line x1="{ax:.2}" y1="{ay:.2}" x2="{bx:.2}" y2="{by:.2}" stroke="gray" stroke-width="0.5"/>"#);
        let _ = writeln!(s, r#"<circle cx="{ax:.2}" cy="{ay:.2}" r="3" fill="crimson"/>"#);
        let _ = writeln!(s, r#"<circle cx="{bx:.2}" cy="{by:.2}" r="3" fill="steelblue"/>"#);
    }
    s.push_str("</svg>\n");
    Ok(s)
}
