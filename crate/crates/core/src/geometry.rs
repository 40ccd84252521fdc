//! Point clouds, Euclidean distance matrices and Stiefel projection frames.

use nalgebra::DMatrix;

use crate::error::{Result, SpredError};

/// Frobenius tolerance for `PᵀP = I`.
pub const ORTHONORMAL_TOL: f64 = 1e-10;

/// An ordered set of `m` points in `Rⁿ`, one per row.
///
/// Row `i` keeps its index through every projection, so point `i` of `XP`
/// is the image of point `i` of `X`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    points: DMatrix<f64>,
}

impl PointCloud {
    pub fn from_matrix(points: DMatrix<f64>) -> Result<Self> {
        if points.nrows() == 0 {
            return Err(SpredError::InvalidInput("point cloud has no points".into()));
        }
        if points.ncols() == 0 {
            return Err(SpredError::InvalidInput("points must have dimension >= 1".into()));
        }
        if points.iter().any(|v| !v.is_finite()) {
            return Err(SpredError::InvalidInput("point coordinates must be finite".into()));
        }
        Ok(Self { points })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let first = rows
            .first()
            .ok_or_else(|| SpredError::InvalidInput("point cloud has no points".into()))?;
        let dim = first.len();
        for row in rows {
            if row.len() != dim {
                return Err(SpredError::DimensionMismatch { expected: dim, found: row.len() });
            }
        }
        Self::from_matrix(DMatrix::from_fn(rows.len(), dim, |i, j| rows[i][j]))
    }

    /// Number of points `m`.
    pub fn len(&self) -> usize {
        self.points.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.points.nrows() == 0
    }

    /// Ambient dimension `n`.
    pub fn dim(&self) -> usize {
        self.points.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.points
    }

    pub fn point(&self, i: usize) -> Vec<f64> {
        self.points.row(i).iter().copied().collect()
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|i| self.point(i)).collect()
    }

    /// The sub-cloud made of the given point indices, in the given order.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.len()) {
            return Err(SpredError::InvalidInput(format!("point index {bad} out of range")));
        }
        Self::from_matrix(self.points.select_rows(indices))
    }

    /// Empirical covariance of the mean-centered points (divisor `m - 1`).
    pub fn covariance(&self) -> DMatrix<f64> {
        let m = self.len();
        let mean = self.points.row_mean();
        let mut centered = self.points.clone();
        for mut row in centered.row_iter_mut() {
            row -= &mean;
        }
        let denom = if m > 1 { (m - 1) as f64 } else { 1.0 };
        centered.transpose() * centered / denom
    }
}

/// Symmetric `m × m` matrix of Euclidean distances with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    size: usize,
    entries: Vec<f64>,
}

impl DistanceMatrix {
    /// Builds a distance matrix from a full square array, checking symmetry,
    /// non-negativity and a zero diagonal.
    pub fn from_square(rows: &[Vec<f64>]) -> Result<Self> {
        let size = rows.len();
        let mut entries = Vec::with_capacity(size * size);
        for row in rows {
            if row.len() != size {
                return Err(SpredError::DimensionMismatch { expected: size, found: row.len() });
            }
            entries.extend_from_slice(row);
        }
        let dm = Self { size, entries };
        for i in 0..size {
            if dm.get(i, i) != 0.0 {
                return Err(SpredError::InvalidInput("distance matrix diagonal must be zero".into()));
            }
            for j in 0..size {
                let d = dm.get(i, j);
                if !(d >= 0.0) || !d.is_finite() {
                    return Err(SpredError::InvalidInput(format!("invalid distance at ({i},{j})")));
                }
                if d != dm.get(j, i) {
                    return Err(SpredError::InvalidInput("distance matrix must be symmetric".into()));
                }
            }
        }
        Ok(dm)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.size + j]
    }

    /// Largest entry; zero for a single point.
    pub fn max(&self) -> f64 {
        self.entries.iter().copied().fold(0.0, f64::max)
    }
}

/// An `n × k` matrix with orthonormal columns, i.e. a point of `St(n, k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionMatrix {
    entries: DMatrix<f64>,
}

impl ProjectionMatrix {
    /// Validates `PᵀP = I_k` within [`ORTHONORMAL_TOL`].
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        let (n, k) = entries.shape();
        if k == 0 || k > n {
            return Err(SpredError::InvalidInput(format!(
                "projection shape {n}x{k} must satisfy 1 <= k <= n"
            )));
        }
        let residual = orthonormality_residual(&entries);
        if !(residual <= ORTHONORMAL_TOL) {
            return Err(SpredError::NotOrthonormal { residual });
        }
        Ok(Self { entries })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let k = rows.first().map_or(0, Vec::len);
        for row in rows {
            if row.len() != k {
                return Err(SpredError::DimensionMismatch { expected: k, found: row.len() });
            }
        }
        Self::new(DMatrix::from_fn(n, k, |i, j| rows[i][j]))
    }

    /// Frame spanned by the first `k` standard basis vectors of `Rⁿ`.
    pub fn coordinate_frame(n: usize, k: usize) -> Result<Self> {
        Self::new(DMatrix::from_fn(n, k, |i, j| if i == j { 1.0 } else { 0.0 }))
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::coordinate_frame(n, n)
    }

    /// Orthonormalizes the columns of `a` by a thin QR with positive `R` diagonal.
    pub fn orthonormalize(a: &DMatrix<f64>) -> Result<Self> {
        let q = crate::linalg::qr_q_positive(a).ok_or(SpredError::DegenerateQr { retries: 0 })?;
        Self::new(q)
    }

    pub fn ambient_dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn target_dim(&self) -> usize {
        self.entries.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.entries
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.entries.row_iter().map(|r| r.iter().copied().collect()).collect()
    }
}

pub(crate) fn orthonormality_residual(p: &DMatrix<f64>) -> f64 {
    let k = p.ncols();
    (p.transpose() * p - DMatrix::<f64>::identity(k, k)).norm()
}

pub fn pairwise_distances(x: &PointCloud) -> DistanceMatrix {
    let m = x.len();
    let pts = x.matrix();
    let mut entries = vec![0.0; m * m];
    for i in 0..m {
        for j in (i + 1)..m {
            let mut acc = 0.0;
            for c in 0..pts.ncols() {
                let d = pts[(i, c)] - pts[(j, c)];
                acc += d * d;
            }
            let d = acc.sqrt();
            entries[i * m + j] = d;
            entries[j * m + i] = d;
        }
    }
    DistanceMatrix { size: m, entries }
}

/// Largest pairwise distance, zero for a single point.
pub fn diameter(x: &PointCloud) -> f64 {
    pairwise_distances(x).max()
}

/// `Y = XP`: point `i` of the result is the image of point `i` of `x`.
pub fn project(x: &PointCloud, p: &ProjectionMatrix) -> Result<PointCloud> {
    if x.dim() != p.ambient_dim() {
        return Err(SpredError::DimensionMismatch { expected: p.ambient_dim(), found: x.dim() });
    }
    PointCloud::from_matrix(x.matrix() * p.matrix())
}

/// Distortion bounds of a projection over distinct point pairs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EtaBounds {
    pub eta_min: f64,
    pub eta_max: f64,
}

/// Min and max of `‖a − b‖ − ‖La − Lb‖` over pairs of distinct indices.
///
/// Rounding can make the raw difference a hair negative for pairs the
/// projection preserves exactly; those are clamped to zero.
pub fn eta_bounds(x: &PointCloud, p: &ProjectionMatrix) -> Result<EtaBounds> {
    if x.len() < 2 {
        return Err(SpredError::InvalidInput("eta bounds need at least two points".into()));
    }
    let y = project(x, p)?;
    Ok(eta_bounds_from_distances(&pairwise_distances(x), &pairwise_distances(&y)))
}

pub(crate) fn eta_bounds_from_distances(dx: &DistanceMatrix, dy: &DistanceMatrix) -> EtaBounds {
    let m = dx.size();
    let mut eta_min = f64::INFINITY;
    let mut eta_max = f64::NEG_INFINITY;
    for i in 0..m {
        for j in (i + 1)..m {
            let eta = (dx.get(i, j) - dy.get(i, j)).max(0.0);
            eta_min = eta_min.min(eta);
            eta_max = eta_max.max(eta);
        }
    }
    EtaBounds { eta_min, eta_max }
}
