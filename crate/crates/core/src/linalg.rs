//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, SymmetricEigen};

/// Q factor of a thin QR of `a` (n × k, n ≥ k), with columns flipped so that
/// the R factor has a positive diagonal. `None` when `a` is numerically rank
/// deficient.
pub fn qr_q_positive(a: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let (n, k) = a.shape();
    if k > n {
        return None;
    }
    let scale = a.norm().max(1.0);
    let qr = a.clone().qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..k {
        let d = r[(j, j)];
        if !d.is_finite() || d.abs() <= 1e-12 * scale {
            return None;
        }
        if d < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    Some(q)
}

/// Eigenpairs of a symmetric matrix sorted by decreasing eigenvalue.
/// Ties keep the solver's column order, so the result is deterministic.
pub fn sorted_symmetric_eigen(a: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(a.clone());
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]).then(i.cmp(&j)));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Flips each column so that its largest-magnitude entry is positive
/// (the first such entry on exact ties).
pub fn normalize_column_signs(m: &mut DMatrix<f64>) {
    for mut col in m.column_iter_mut() {
        let mut best = 0.0f64;
        let mut sign = 1.0;
        for v in col.iter() {
            if v.abs() > best {
                best = v.abs();
                sign = v.signum();
            }
        }
        if sign < 0.0 {
            col.neg_mut();
        }
    }
}

/// Orthonormal basis of the orthogonal complement of the column span of an
/// orthonormal `p`.
pub fn orthogonal_complement(p: &DMatrix<f64>) -> DMatrix<f64> {
    let (n, k) = p.shape();
    let proj = DMatrix::<f64>::identity(n, n) - p * p.transpose();
    let (_, vecs) = sorted_symmetric_eigen(&proj);
    vecs.columns(0, n - k).into_owned()
}

/// Thin singular value decomposition `a = U diag(σ) Vᵀ`.
#[derive(Debug, Clone)]
pub struct ThinSvd {
    /// `n × k`; the column of a zero singular value is zero.
    pub u: DMatrix<f64>,
    /// Decreasing.
    pub sigma: Vec<f64>,
    /// `k × k`, orthogonal.
    pub v: DMatrix<f64>,
}

/// One-sided Jacobi SVD of an `n × k` matrix.
///
/// nalgebra's bidiagonal SVD occasionally returns inaccurate factors for thin
/// matrices with a near-zero singular value. Plane rotations applied to
/// column pairs until they are mutually orthogonal do not have that problem,
/// keep small singular values to high relative accuracy, and are cheap at
/// the sizes used here.
pub fn thin_svd(a: &DMatrix<f64>) -> ThinSvd {
    let k = a.ncols();
    let mut w = a.clone();
    let mut v = DMatrix::<f64>::identity(k, k);
    for _sweep in 0..64 {
        let mut rotated = false;
        for p in 0..k {
            for q in p + 1..k {
                let alpha = w.column(p).norm_squared();
                let beta = w.column(q).norm_squared();
                let gamma = w.column(p).dot(&w.column(q));
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + zeta.hypot(1.0));
                let c = 1.0 / t.hypot(1.0);
                let s = c * t;
                for m in [&mut w, &mut v] {
                    for i in 0..m.nrows() {
                        let (x, y) = (m[(i, p)], m[(i, q)]);
                        m[(i, p)] = c * x - s * y;
                        m[(i, q)] = s * x + c * y;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let norms: Vec<f64> = (0..k).map(|j| w.column(j).norm()).collect();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));
    let mut u = DMatrix::zeros(a.nrows(), k);
    let mut vs = DMatrix::zeros(k, k);
    for (dst, &src) in order.iter().enumerate() {
        if norms[src] > 0.0 {
            u.set_column(dst, &(w.column(src) / norms[src]));
        }
        vs.set_column(dst, &v.column(src));
    }
    ThinSvd { u, sigma: order.iter().map(|&j| norms[j]).collect(), v: vs }
}

/// Singular values of `a`, sorted in decreasing order.
pub fn singular_values_desc(a: &DMatrix<f64>) -> Vec<f64> {
    thin_svd(a).sigma
}

/// Principal angles between the column spans of two orthonormal `n × k`
/// matrices, ascending.
///
/// Small angles come from the sines (singular values of `(I − XXᵀ)Y`) and
/// large ones from the cosines (singular values of `XᵀY`), which keeps both
/// ends accurate.
pub fn principal_angles(x: &DMatrix<f64>, y: &DMatrix<f64>) -> Vec<f64> {
    let k = x.ncols();
    let cosines = singular_values_desc(&(x.transpose() * y));
    let residual = y - x * (x.transpose() * y);
    let mut sines = singular_values_desc(&residual);
    sines.reverse();
    (0..k)
        .map(|i| {
            let c = cosines[i].clamp(-1.0, 1.0);
            if c >= std::f64::consts::FRAC_1_SQRT_2 {
                sines[i].clamp(0.0, 1.0).asin()
            } else {
                c.acos()
            }
        })
        .collect()
}
