//! Small dense linear algebra helpers.

use nalgebra::{DMatrix, DVector, Matrix4};

use crate::geometry::Point2;

/// Row-major 2×2 matrix.
pub type Mat2 = [[f64; 2]; 2];

pub const ZERO2: Mat2 = [[0.0; 2]; 2];
pub const IDENTITY2: Mat2 = [[1.0, 0.0], [0.0, 1.0]];

pub fn add2(a: &Mat2, b: &Mat2) -> Mat2 {
    [[a[0][0] + b[0][0], a[0][1] + b[0][1]], [a[1][0] + b[1][0], a[1][1] + b[1][1]]]
}

pub fn sub2(a: &Mat2, b: &Mat2) -> Mat2 {
    [[a[0][0] - b[0][0], a[0][1] - b[0][1]], [a[1][0] - b[1][0], a[1][1] - b[1][1]]]
}

pub fn scale2(a: &Mat2, s: f64) -> Mat2 {
    [[a[0][0] * s, a[0][1] * s], [a[1][0] * s, a[1][1] * s]]
}

pub fn mul2(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut c = ZERO2;
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}

pub fn transpose2(a: &Mat2) -> Mat2 {
    [[a[0][0], a[1][0]], [a[0][1], a[1][1]]]
}

pub fn det2(a: &Mat2) -> f64 {
    a[0][0] * a[1][1] - a[0][1] * a[1][0]
}

pub fn inv2(a: &Mat2) -> Option<Mat2> {
    let d = det2(a);
    if d == 0.0 || !d.is_finite() {
        return None;
    }
    Some([[a[1][1] / d, -a[0][1] / d], [-a[1][0] / d, a[0][0] / d]])
}

pub fn apply2(a: &Mat2, v: Point2) -> Point2 {
    Point2::new(a[0][0] * v.x1 + a[0][1] * v.x2, a[1][0] * v.x1 + a[1][1] * v.x2)
}

pub fn outer2(u: Point2, v: Point2) -> Mat2 {
    [[u.x1 * v.x1, u.x1 * v.x2], [u.x2 * v.x1, u.x2 * v.x2]]
}

pub fn sup_norm2(a: &Mat2) -> f64 {
    a.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Eigen data of a symmetric 2×2 matrix: ascending eigenvalues and unit eigenvectors.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Eigen2 {
    pub values: [f64; 2],
    pub vectors: [Point2; 2],
}

/// Fixes the sign so that the first nonzero component is positive.
pub fn canonical_sign(v: Point2) -> Point2 {
    let first = if v.x1.abs() > 1e-14 * v.norm() { v.x1 } else { v.x2 };
    if first < 0.0 {
        -v
    } else {
        v
    }
}

/// Closed-form eigen decomposition of the symmetric part of `a`.
pub fn sym_eigen2(a: &Mat2) -> Eigen2 {
    let p = a[0][0];
    let q = a[1][1];
    let b = 0.5 * (a[0][1] + a[1][0]);
    let mean = 0.5 * (p + q);
    let half = 0.5 * (p - q);
    let r = half.hypot(b);
    let values = [mean - r, mean + r];
    if r == 0.0 {
        return Eigen2 { values, vectors: [Point2::new(1.0, 0.0), Point2::new(0.0, 1.0)] };
    }
    let vec_for = |lam: f64| {
        let v1 = Point2::new(b, lam - p);
        let v2 = Point2::new(lam - q, b);
        let v = if v1.norm2() >= v2.norm2() { v1 } else { v2 };
        canonical_sign(v.unit())
    };
    Eigen2 { values, vectors: [vec_for(values[0]), vec_for(values[1])] }
}

/// Eigenvalues (ascending) and eigenvectors (columns) of a symmetric 4×4 matrix.
pub fn sym_eigen4(h: &[[f64; 4]; 4]) -> ([f64; 4], [[f64; 4]; 4]) {
    let m = Matrix4::from_fn(|i, j| 0.5 * (h[i][j] + h[j][i]));
    let se = m.symmetric_eigen();
    let mut idx = [0usize, 1, 2, 3];
    idx.sort_by(|&a, &b| se.eigenvalues[a].total_cmp(&se.eigenvalues[b]));
    let mut vals = [0.0; 4];
    let mut vecs = [[0.0; 4]; 4];
    for (k, &i) in idx.iter().enumerate() {
        vals[k] = se.eigenvalues[i];
        for r in 0..4 {
            vecs[r][k] = se.eigenvectors[(r, i)];
        }
    }
    (vals, vecs)
}

pub fn det4(h: &[[f64; 4]; 4]) -> f64 {
    Matrix4::from_fn(|i, j| h[i][j]).determinant()
}

/// Solves the 4×4 system h·x = b, returning None when singular.
pub fn solve4(h: &[[f64; 4]; 4], b: &[f64; 4]) -> Option<[f64; 4]> {
    let m = Matrix4::from_fn(|i, j| h[i][j]);
    let lu = m.lu();
    let x = lu.solve(&nalgebra::Vector4::from_column_slice(b))?;
    if x.iter().all(|v| v.is_finite()) {
        Some([x[0], x[1], x[2], x[3]])
    } else {
        None
    }
}

/// Truncated-SVD pseudo-inverse kept in factored form V·Σ⁺·Uᵀ.
#[derive(Debug, Clone)]
pub struct Pinv {
    ut: DMatrix<f64>,
    s_inv: DVector<f64>,
    v: DMatrix<f64>,
    pub rank: usize,
    pub condition: f64,
    pub sigma_max: f64,
}

impl Pinv {
    /// Applies the pseudo-inverse to the columns of `b`.
    pub fn apply(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        let mut c = &self.ut * b;
        for (i, mut row) in c.row_iter_mut().enumerate() {
            row *= self.s_inv[i];
        }
        &self.v * c
    }

    /// The explicit pseudo-inverse matrix.
    pub fn matrix(&self) -> DMatrix<f64> {
        let mut vs = self.v.clone();
        for (j, mut col) in vs.column_iter_mut().enumerate() {
            col *= self.s_inv[j];
        }
        vs * &self.ut
    }
}

pub fn pinv(a: &DMatrix<f64>, rel_cutoff: f64) -> Pinv {
    let svd = a.clone().svd(true, true);
    let s = &svd.singular_values;
    let smax = s.iter().cloned().fold(0.0f64, f64::max);
    let smin = s.iter().cloned().fold(f64::INFINITY, f64::min);
    let cut = rel_cutoff * smax;
    let u = svd.u.as_ref().expect("u requested");
    let vt = svd.v_t.as_ref().expect("v_t requested");
    let keep: Vec<usize> = (0..s.len()).filter(|&k| s[k] > cut).collect();
    let r = keep.len();
    let uk = DMatrix::from_fn(a.nrows(), r, |i, j| u[(i, keep[j])]);
    let vk = DMatrix::from_fn(a.ncols(), r, |i, j| vt[(keep[j], i)]);
    let s_inv = DVector::from_fn(r, |j, _| 1.0 / s[keep[j]]);
    Pinv { ut: uk.transpose(), s_inv, v: vk, rank: r, condition: smax / smin, sigma_max: smax }
}
