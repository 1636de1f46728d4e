//! ε-sweeps with scaling-law fits, prediction matching, the boundary
//! identity check for Green functions, and count audits.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{predict, PredictInput, PredictionSet, TheoremId};
use crate::critical::{
    enumerate_with_seeds, newton_refine, nontrivially_different, outer_model, CriticalPoint, PointType, Problem, SearchConfig,
};
use crate::error::{Error, Result};
use crate::geometry::{Domain, DomainSpec, Hole, Point2};
use crate::greens::{fundamental_jet, GreenModel, MfsConfig};

/// Residuals below this level count as converged in the refinement study.
pub const IDENTITY_FLOOR: f64 = 1e-12;

/// Quadrature residual of the boundary identity
/// ∫(x−a₀)·ν ∂_νG(x,a) ∂_νG(x,b) ds = (a₀−a)·∇ₓG(a,b) + (a₀−b)·∇ₓG(b,a)
/// with the trapezoid rule on `n` equispaced boundary nodes.
pub fn identity_residual(model: &GreenModel, a0: Point2, a: Point2, b: Point2, n: usize) -> Result<f64> {
    if a == b {
        return Err(Error::DiagonalSingularity);
    }
    let spec = match model.domain() {
        Domain::Plain(s) => s,
        _ => return Err(Error::Precondition("identity check needs a simply connected domain".into())),
    };
    let ga = model.eval(a, b, 1)?;
    let gb = model.eval(b, a, 1)?;
    let rhs = (a0 - a).dot(Point2::from_array(ga.gx)) + (a0 - b).dot(Point2::from_array(gb.gx));
    let dn = |x: Point2, z: Point2, nu: Point2| {
        let s = fundamental_jet(x, z);
        let h = model.h(x, z);
        nu.dot(Point2::new(s.g[0] - h.hx[0], s.g[1] - h.hx[1]))
    };
    let w = 2.0 * std::f64::consts::PI / n as f64;
    let lhs: f64 = spec
        .boundary_points(n)?
        .iter()
        .map(|bp| (bp.p - a0).dot(bp.normal) * dn(bp.p, a, bp.normal) * dn(bp.p, b, bp.normal) * bp.speed * w)
        .sum();
    Ok((lhs - rhs).abs())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityTrial {
    pub a0: Point2,
    pub a: Point2,
    pub b: Point2,
    /// Residual per entry of the report's node list.
    pub residuals: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    /// Node counts of the refinement study, doubling up to the requested count.
    pub nodes: Vec<usize>,
    pub trials: Vec<IdentityTrial>,
    /// Largest residual at the finest node count.
    pub max_residual: f64,
    /// Every doubling at least halves the residual or lands below the floor.
    pub refinement_ok: bool,
}

/// Identity residuals at random triples with a node-doubling study ending at `nodes`.
pub fn identity_check_report(model: &GreenModel, trials: usize, seed: u64, nodes: usize) -> Result<IdentityReport> {
    let spec = match model.domain() {
        Domain::Plain(s) => s.clone(),
        _ => return Err(Error::Precondition("identity check needs a simply connected domain".into())),
    };
    if nodes < 128 {
        return Err(Error::Precondition(format!("identity check needs at least 128 nodes, got {nodes}")));
    }
    let levels: Vec<usize> = (0..4).rev().map(|k| nodes >> k).collect();
    let (lo, hi) = bounding_box(&spec)?;
    let inner = interior_samples(model.domain(), 2 * trials, seed, 0.05)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut far = || Point2::new(rng.random_range(lo.x1..hi.x1), rng.random_range(lo.x2..hi.x2));
    let mut out = Vec::with_capacity(trials);
    for k in 0..trials {
        let (a0, a, b) = (far(), inner[2 * k], inner[2 * k + 1]);
        let residuals = levels.iter().map(|&n| identity_residual(model, a0, a, b, n)).collect::<Result<Vec<_>>>()?;
        out.push(IdentityTrial { a0, a, b, residuals });
    }
    let max_residual = out.iter().map(|t| *t.residuals.last().unwrap_or(&0.0)).fold(0.0, f64::max);
    let refinement_ok = out.iter().all(|t| t.residuals.windows(2).all(|w| w[1] <= 0.5 * w[0] || w[1] < IDENTITY_FLOOR));
    Ok(IdentityReport { nodes: levels, trials: out, max_residual, refinement_ok })
}

/// Seeded uniform samples in the domain at distance above `margin`·diameter from the boundary.
pub fn interior_samples(domain: &Domain, n: usize, seed: u64, margin: f64) -> Result<Vec<Point2>> {
    let spec = domain.outer().ok_or_else(|| Error::Precondition("sampling needs a bounded domain".into()))?;
    let (lo, hi) = bounding_box(spec)?;
    let gap = margin * spec.diameter();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    let mut tries = 0usize;
    while out.len() < n {
        tries += 1;
        if tries > 1000 * (n + 1) {
            return Err(Error::Precondition(format!("no interior points at margin {margin}")));
        }
        let q = Point2::new(rng.random_range(lo.x1..hi.x1), rng.random_range(lo.x2..hi.x2));
        if domain.contains(q) && domain.dist_to_boundary(q)?.0 > gap {
            out.push(q);
        }
    }
    Ok(out)
}

fn bounding_box(spec: &DomainSpec) -> Result<(Point2, Point2)> {
    let mut lo = Point2::new(f64::INFINITY, f64::INFINITY);
    let mut hi = -lo;
    for b in spec.boundary_points(256)? {
        lo = Point2::new(lo.x1.min(b.p.x1), lo.x2.min(b.p.x2));
        hi = Point2::new(hi.x1.max(b.p.x1), hi.x2.max(b.p.x2));
    }
    Ok((lo, hi))
}

/// A theorem scenario: Ω (optionally with fixed extra holes), the hole
/// center P and the vortex strengths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub id: String,
    pub domain: DomainSpec,
    #[serde(default)]
    pub holes: Vec<Hole>,
    pub p: Point2,
    pub lambda1: f64,
    pub lambda2: f64,
    pub theorem: TheoremId,
    /// Partner point of the type II pair scenario.
    #[serde(default)]
    pub y0: Option<Point2>,
}

impl Scenario {
    pub fn outer(&self, mfs: &MfsConfig) -> Result<GreenModel> {
        outer_model(self.domain.clone(), self.holes.clone(), mfs)
    }

    /// Point type the theorem is about.
    pub fn target(&self) -> PointType {
        match self.theorem {
            TheoremId::T1_6 | TheoremId::T1_9 => PointType::TypeII,
            _ => PointType::TypeIII,
        }
    }
}

/// One found point matched to one predicted point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Match {
    /// Index into the record's `points`.
    pub found: usize,
    /// Index into the prediction's `points`.
    pub predicted: usize,
    /// Sup-norm configuration distance.
    pub distance: f64,
    /// Angle between the lines through P spanned by the near vortices.
    pub direction_error: f64,
    pub found_index: i8,
    pub predicted_index: Option<i32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsRecord {
    pub eps: f64,
    pub points: Vec<CriticalPoint>,
    pub prediction: Option<PredictionSet>,
    pub prediction_error: Option<String>,
    /// Indices of points of the scenario's target type.
    pub target: Vec<usize>,
    pub matches: Vec<Match>,
    pub total_distance: f64,
    /// Geometric mean of |x−P| over target points.
    pub radius_x: Option<f64>,
    /// Geometric mean of |y−P| over target points.
    pub radius_y: Option<f64>,
    /// Mean of |y−P|/|x−P| over target points.
    pub ratio: Option<f64>,
    /// Mean angle between x−P and P−y over target points.
    pub alignment: Option<f64>,
    pub count_mismatch: bool,
}

/// Least-squares fit of ln r = ln C + a ln ε.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fit {
    pub exponent: f64,
    /// Half-width of the 95% confidence interval of the exponent.
    pub exponent_half_width: f64,
    pub constant: f64,
    pub r2: f64,
    pub rms: f64,
    pub eps_used: Vec<f64>,
    pub residuals: Vec<f64>,
    pub excluded_largest: bool,
    pub low_r2: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountRow {
    pub eps: f64,
    pub predicted: usize,
    pub found_target: usize,
    pub found_total: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub scenario: Scenario,
    pub eps: Vec<f64>,
    pub records: Vec<EpsRecord>,
    pub fit: Option<Fit>,
    pub counts: Vec<CountRow>,
    /// Total matching distance decreases over the three smallest ε.
    pub distance_trend_ok: bool,
    pub flags: Vec<String>,
}

/// Two-sided 97.5% Student t quantiles for 1..=10 degrees of freedom.
const T975: [f64; 10] = [12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228];

/// Log residual below which a point never counts as an outlier.
const OUTLIER_FLOOR: f64 = 1e-9;

/// Least-squares fit of ln r against ln ε. The largest ε is dropped when at
/// least three points remain and its residual against the fit of the others
/// exceeds three times that fit's RMS.
pub fn fit_scaling(eps: &[f64], r: &[f64]) -> Result<Fit> {
    if eps.len() != r.len() || eps.len() < 3 {
        return Err(Error::Precondition("scaling fit needs at least three (ε, r) pairs".into()));
    }
    if eps.iter().chain(r).any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::Precondition("scaling fit needs positive finite data".into()));
    }
    let largest = (0..eps.len()).max_by(|&i, &j| eps[i].total_cmp(&eps[j])).unwrap_or(0);
    if eps.len() > 3 {
        let keep: Vec<usize> = (0..eps.len()).filter(|&i| i != largest).collect();
        let e: Vec<f64> = keep.iter().map(|&i| eps[i]).collect();
        let q: Vec<f64> = keep.iter().map(|&i| r[i]).collect();
        let mut f = linear_fit(&e, &q);
        let out = (r[largest].ln() - (f.constant.ln() + f.exponent * eps[largest].ln())).abs();
        if out > 3.0 * f.rms && out > OUTLIER_FLOOR {
            f.excluded_largest = true;
            return Ok(f);
        }
    }
    Ok(linear_fit(eps, r))
}

fn linear_fit(eps: &[f64], r: &[f64]) -> Fit {
    let n = eps.len() as f64;
    let x: Vec<f64> = eps.iter().map(|e| e.ln()).collect();
    let y: Vec<f64> = r.iter().map(|v| v.ln()).collect();
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let residuals: Vec<f64> = x.iter().zip(&y).map(|(a, b)| b - (icpt + slope * a)).collect();
    let sse: f64 = residuals.iter().map(|v| v * v).sum();
    let rms = (sse / n).sqrt();
    let r2 = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    let dof = eps.len().saturating_sub(2);
    let half = if dof == 0 {
        f64::INFINITY
    } else {
        let t = if dof <= T975.len() { T975[dof - 1] } else { 1.96 };
        t * (sse / dof as f64 / sxx).sqrt()
    };
    Fit {
        exponent: slope,
        exponent_half_width: half,
        constant: icpt.exp(),
        r2,
        rms,
        eps_used: eps.to_vec(),
        residuals,
        excluded_largest: false,
        low_r2: r2 < 0.99,
    }
}

/// Angle between the lines spanned by two nonzero vectors.
pub fn line_angle(u: Point2, v: Point2) -> f64 {
    (u.unit().dot(v.unit()).abs()).min(1.0).acos()
}

fn near_offset(x: Point2, y: Point2, p: Point2) -> Point2 {
    if x.dist(p) <= y.dist(p) {
        x - p
    } else {
        y - p
    }
}

/// Greedy nearest-distance assignment between found target points and predictions.
pub fn match_points(points: &[CriticalPoint], target: &[usize], pred: &PredictionSet, p: Point2) -> Vec<Match> {
    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for &i in target {
        for (j, q) in pred.points.iter().enumerate() {
            pairs.push((points[i].distance(q.x, q.y), i, j));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut used_f = vec![false; points.len()];
    let mut used_p = vec![false; pred.points.len()];
    let mut out = Vec::new();
    for (d, i, j) in pairs {
        if used_f[i] || used_p[j] {
            continue;
        }
        used_f[i] = true;
        used_p[j] = true;
        let q = &pred.points[j];
        out.push(Match {
            found: i,
            predicted: j,
            distance: d,
            direction_error: line_angle(near_offset(points[i].x, points[i].y, p), near_offset(q.x, q.y, p)),
            found_index: points[i].local_index,
            predicted_index: pred.indices.get(j).copied(),
        });
    }
    out.sort_by_key(|m| m.found);
    out
}

fn geometric_mean(v: impl Iterator<Item = f64>) -> Option<f64> {
    let (s, n) = v.fold((0.0, 0usize), |(s, n), x| (s + x.ln(), n + 1));
    (n > 0).then(|| (s / n as f64).exp())
}

fn mean(v: impl Iterator<Item = f64>) -> Option<f64> {
    let (s, n) = v.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    (n > 0).then(|| s / n as f64)
}

/// Runs the scenario over a strictly decreasing ε list.
pub fn sweep(scenario: &Scenario, eps_list: &[f64], search: &SearchConfig, mfs: &MfsConfig) -> Result<SweepResult> {
    if eps_list.is_empty() || eps_list.windows(2).any(|w| !(w[1] < w[0])) || eps_list.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::Precondition("ε list must be positive and strictly decreasing".into()));
    }
    search.validate()?;
    let outer = scenario.outer(mfs)?;
    let p = scenario.p;
    let kind = scenario.target();
    let mut records: Vec<EpsRecord> = Vec::new();
    for &eps in eps_list {
        let prob = Problem::new(outer.clone(), p, eps, scenario.lambda1, scenario.lambda2, mfs)?;
        let input = PredictInput { outer: &outer, p, lambda1: scenario.lambda1, lambda2: scenario.lambda2, eps, y0: scenario.y0 };
        let (prediction, prediction_error) = match predict(scenario.theorem, &input) {
            Ok(s) => (Some(s), None),
            Err(e) => (None, Some(e.to_string())),
        };
        let mut extra: Vec<(Point2, Point2)> = prediction.iter().flat_map(|s| s.points.iter().map(|q| (q.x, q.y))).collect();
        if let Some(prev) = records.last() {
            let beta = crate::kr::beta(prob.tau());
            let f = (eps / prev.eps).powf(beta);
            for &i in &prev.target {
                let c = &prev.points[i];
                extra.push(if kind == PointType::TypeIII { (p + (c.x - p) * f, p + (c.y - p) * f) } else { (c.x, c.y) });
            }
        }
        let points = enumerate_with_seeds(&prob, search, &extra)?;
        let target: Vec<usize> = (0..points.len()).filter(|&i| points[i].kind == kind).collect();
        let matches = prediction.as_ref().map(|s| match_points(&points, &target, s, p)).unwrap_or_default();
        let predicted = prediction.as_ref().map_or(0, |s| s.count);
        let tp = || target.iter().map(|&i| &points[i]);
        records.push(EpsRecord {
            eps,
            radius_x: geometric_mean(tp().map(|c| c.x.dist(p))),
            radius_y: geometric_mean(tp().map(|c| c.y.dist(p))),
            ratio: mean(tp().map(|c| c.y.dist(p) / c.x.dist(p))),
            alignment: mean(tp().map(|c| (c.x - p).unit().dot((p - c.y).unit()).clamp(-1.0, 1.0).acos())),
            total_distance: matches.iter().map(|m| m.distance).sum(),
            count_mismatch: target.len() < predicted,
            points,
            prediction,
            prediction_error,
            target,
            matches,
        });
    }
    let counts = records
        .iter()
        .map(|r| CountRow {
            eps: r.eps,
            predicted: r.prediction.as_ref().map_or(0, |s| s.count),
            found_target: r.target.len(),
            found_total: r.points.len(),
        })
        .collect();
    let with_r: Vec<&EpsRecord> = records.iter().filter(|r| r.radius_x.is_some()).collect();
    let fit = if with_r.len() >= 3 {
        let e: Vec<f64> = with_r.iter().map(|r| r.eps).collect();
        let q: Vec<f64> = with_r.iter().filter_map(|r| r.radius_x).collect();
        Some(fit_scaling(&e, &q)?)
    } else {
        None
    };
    let tail: Vec<f64> = records.iter().rev().take(3).map(|r| r.total_distance).collect();
    let distance_trend_ok = tail.windows(2).all(|w| w[0] <= w[1]);
    let mut flags = Vec::new();
    if let Some(last) = records.last() {
        if last.count_mismatch {
            flags.push(format!(
                "count mismatch at eps={:e}: found {} of {}",
                last.eps,
                last.target.len(),
                last.prediction.as_ref().map_or(0, |s| s.count)
            ));
        }
    }
    match &fit {
        Some(f) if f.low_r2 => flags.push(format!("low R² {:.4}", f.r2)),
        None => flags.push("no scaling fit: fewer than three ε values with target points".into()),
        _ => {}
    }
    if !distance_trend_ok {
        flags.push("matching distance not decreasing over the smallest ε".into());
    }
    Ok(SweepResult { scenario: scenario.clone(), eps: eps_list.to_vec(), records, fit, counts, distance_trend_ok, flags })
}

/// One row of a count audit suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditScenario {
    pub id: String,
    pub domain: DomainSpec,
    #[serde(default)]
    pub holes: Vec<Hole>,
    pub p: Point2,
    pub lambda1: f64,
    pub lambda2: f64,
    pub eps: f64,
    pub predicted: usize,
    /// Restricts the count to one point type.
    #[serde(default)]
    pub kind: Option<PointType>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditRow {
    pub id: String,
    pub predicted: usize,
    pub found: usize,
    pub all_nondegenerate: bool,
    pub nontrivially_different: usize,
}

/// Enumerates each scenario and tabulates predicted against found counts.
pub fn count_audit(suite: &[AuditScenario], search: &SearchConfig, mfs: &MfsConfig) -> Result<Vec<AuditRow>> {
    suite
        .iter()
        .map(|s| {
            let outer = outer_model(s.domain.clone(), s.holes.clone(), mfs)?;
            let prob = Problem::new(outer, s.p, s.eps, s.lambda1, s.lambda2, mfs)?;
            let pts = crate::critical::enumerate_critical_points(&prob, search)?;
            let sel: Vec<CriticalPoint> = pts.into_iter().filter(|c| s.kind.is_none_or(|k| c.kind == k)).collect();
            Ok(AuditRow {
                id: s.id.clone(),
                predicted: s.predicted,
                found: sel.len(),
                all_nondegenerate: sel.iter().all(|c| c.nondegenerate),
                nontrivially_different: count_nontrivial(&sel),
            })
        })
        .collect()
}

/// Swap-pair count recomputed on a filtered list.
fn count_nontrivial(points: &[CriticalPoint]) -> usize {
    let mut v = points.to_vec();
    for i in 0..v.len() {
        let (x, y) = (v[i].x, v[i].y);
        v[i].paired_with = (0..points.len()).find(|&j| j != i && points[j].distance(y, x) < 1e-6);
    }
    nontrivially_different(&v)
}

/// Scenario of a disk with a fixed small hole B(y₀, δ), y₀ = (s, 0), and a type II
/// critical point (x_δ, y_δ) of KR on it; the second hole is placed at P = x_δ.
pub fn partner_hole_scenario(
    s: f64,
    delta: f64,
    lambda1: f64,
    lambda2: f64,
    mfs: &MfsConfig,
    search: &SearchConfig,
) -> Result<Scenario> {
    let hole_center = Point2::new(s, 0.0);
    let disk = DomainSpec::unit_disk();
    let base = crate::critical::problem_for(disk.clone(), hole_center, delta, lambda1, lambda2, mfs)?;
    let pred =
        predict(TheoremId::T1_6, &PredictInput { outer: &base.outer, p: hole_center, lambda1, lambda2, eps: delta, y0: None })?;
    for q in pred.points.iter().filter(|q| q.y.dist(hole_center) < q.x.dist(hole_center)) {
        let Ok(cp) = newton_refine(&base, (q.x, q.y), search) else { continue };
        if !cp.nondegenerate || cp.y.dist(hole_center) >= cp.x.dist(hole_center) {
            continue;
        }
        let sc = Scenario {
            id: format!("partner-hole-s{s}-delta{delta:e}"),
            domain: disk.clone(),
            holes: vec![Hole { center: hole_center, radius: delta }],
            p: cp.x,
            lambda1,
            lambda2,
            theorem: TheoremId::T1_9,
            y0: Some(cp.y),
        };
        let outer = base.ev.green();
        if predict(TheoremId::T1_9, &PredictInput { outer, p: cp.x, lambda1, lambda2, eps: delta, y0: Some(cp.y) }).is_ok() {
            return Ok(sc);
        }
    }
    Err(Error::Solver("no type II point with a simple positive M0 eigenvalue found".into()))
}


/// Type II counts for a disk hole at distance d from the boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DScanRow {
    pub d: f64,
    pub predicted: usize,
    pub found_type2: usize,
    pub found_total: usize,
    pub points: Vec<CriticalPoint>,
}

/// Scans the hole distance d = r − |P − c| on a disk along the first axis
/// and counts type II points at fixed ε.
pub fn type2_d_scan(
    disk: &DomainSpec,
    d_list: &[f64],
    lambda1: f64,
    lambda2: f64,
    eps: f64,
    search: &SearchConfig,
    mfs: &MfsConfig,
) -> Result<Vec<DScanRow>> {
    let (center, radius) = match disk {
        DomainSpec::Disk { center, radius } => (*center, *radius),
        _ => return Err(Error::HypothesisViolated("the type II scan requires a disk".into())),
    };
    let outer = outer_model(disk.clone(), Vec::new(), mfs)?;
    d_list
        .iter()
        .map(|&d| {
            if !(d > 0.0 && d < radius) {
                return Err(Error::Precondition(format!("hole distance {d} outside (0, {radius})")));
            }
            let p = center + Point2::new(radius - d, 0.0);
            let prob = Problem::new(outer.clone(), p, eps, lambda1, lambda2, mfs)?;
            let pred = predict(TheoremId::T1_6, &PredictInput { outer: &outer, p, lambda1, lambda2, eps, y0: None })?;
            let extra: Vec<(Point2, Point2)> = pred.points.iter().map(|q| (q.x, q.y)).collect();
            let points = enumerate_with_seeds(&prob, search, &extra)?;
            Ok(DScanRow {
                d,
                predicted: pred.count,
                found_type2: points.iter().filter(|c| c.kind == PointType::TypeII).count(),
                found_total: points.len(),
                points,
            })
        })
        .collect()
}

/// Green function diagnostics of a model, optionally against a reference model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreenReport {
    pub kind: crate::greens::GreenKind,
    pub pairs: usize,
    pub boundary_residual: f64,
    /// max |H(x,y) − H(y,x)|.
    pub symmetry: f64,
    /// max |Δₓ H(x,y)|.
    pub harmonicity: f64,
    /// max |G − G_ref| against the reference model.
    pub reference_error: Option<f64>,
    pub identity: Option<IdentityReport>,
    pub tolerance: f64,
    pub pass: bool,
}

/// Settings of a Green diagnostics run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreenCheck {
    pub pairs: usize,
    pub trials: usize,
    pub nodes: usize,
    pub seed: u64,
    pub tolerance: f64,
}

pub fn green_report(model: &GreenModel, reference: Option<&GreenModel>, chk: &GreenCheck) -> Result<GreenReport> {
    let pts = interior_samples(model.domain(), 2 * chk.pairs, chk.seed, 0.02)?;
    let (mut symmetry, mut harmonicity, mut reference_error) = (0.0f64, 0.0f64, 0.0f64);
    for k in 0..chk.pairs {
        let (x, y) = (pts[2 * k], pts[2 * k + 1]);
        let h = model.h(x, y);
        symmetry = symmetry.max((h.h - model.h(y, x).h).abs());
        harmonicity = harmonicity.max((h.hxx[0][0] + h.hxx[1][1]).abs());
        if let Some(r) = reference {
            reference_error = reference_error.max((h.h - r.h(x, y).h).abs());
        }
    }
    let identity = match model.domain() {
        Domain::Plain(_) if chk.trials > 0 => Some(identity_check_report(model, chk.trials, chk.seed, chk.nodes)?),
        _ => None,
    };
    let tol = chk.tolerance;
    let reference_error = reference.map(|_| reference_error);
    let pass = model.fit_residual() < tol
        && symmetry < tol
        && harmonicity < tol
        && reference_error.is_none_or(|e| e < tol)
        && identity.as_ref().is_none_or(|i| i.max_residual < tol && i.refinement_ok);
    Ok(GreenReport {
        kind: model.kind(),
        pairs: chk.pairs,
        boundary_residual: model.fit_residual(),
        symmetry,
        harmonicity,
        reference_error,
        identity,
        tolerance: tol,
        pass,
    })
}
