//! Subspaces as points of the Grassmannian, the geodesic machinery needed
//! for a Weiszfeld median, and the split-anneal-median reduction built on it.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Result, SpredError};
use crate::geometry::{orthonormality_residual, PointCloud, ProjectionMatrix, ORTHONORMAL_TOL};
use crate::linalg::{normalize_column_signs, principal_angles, qr_q_positive, sorted_symmetric_eigen, thin_svd};
use crate::optimizer::{anneal, derive_seed, AnnealingConfig};

/// Spans whose principal angles are all below this are considered equal.
pub const SPAN_TOL: f64 = 1e-8;
/// Log norms below this mark an anchor in the Weiszfeld iteration.
pub const ANCHOR_TOL: f64 = 1e-12;

/// The column span of an orthonormal `n × k` representative.
#[derive(Debug, Clone)]
pub struct GrassmannPoint {
    rep: DMatrix<f64>,
}

impl GrassmannPoint {
    pub fn new(rep: DMatrix<f64>) -> Result<Self> {
        let residual = orthonormality_residual(&rep);
        if rep.ncols() == 0 || rep.ncols() > rep.nrows() || !(residual <= ORTHONORMAL_TOL) {
            return Err(SpredError::NotOrthonormal { residual });
        }
        Ok(Self { rep })
    }

    pub fn representative(&self) -> &DMatrix<f64> {
        &self.rep
    }

    pub fn ambient_dim(&self) -> usize {
        self.rep.nrows()
    }

    pub fn dim(&self) -> usize {
        self.rep.ncols()
    }

    pub fn to_projection(&self) -> ProjectionMatrix {
        ProjectionMatrix::new(self.rep.clone()).expect("representative is orthonormal")
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if self.rep.shape() != other.rep.shape() {
            return Err(SpredError::InvalidInput(format!(
                "subspaces of shape {:?} and {:?} are not comparable",
                self.rep.shape(),
                other.rep.shape()
            )));
        }
        Ok(())
    }
}

impl From<&ProjectionMatrix> for GrassmannPoint {
    fn from(p: &ProjectionMatrix) -> Self {
        Self { rep: p.matrix().clone() }
    }
}

impl PartialEq for GrassmannPoint {
    fn eq(&self, other: &Self) -> bool {
        self.rep.shape() == other.rep.shape() && principal_angles(&self.rep, &other.rep).iter().all(|&a| a <= SPAN_TOL)
    }
}

/// A horizontal tangent vector `Δ` at a base point, `XᵀΔ = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    delta: DMatrix<f64>,
}

impl TangentVector {
    pub fn new(base: &GrassmannPoint, delta: DMatrix<f64>) -> Result<Self> {
        if delta.shape() != base.rep.shape() {
            return Err(SpredError::DimensionMismatch { expected: base.rep.nrows(), found: delta.nrows() });
        }
        let off = (base.rep.transpose() * &delta).norm();
        if !(off <= 1e-10 * (1.0 + delta.norm())) {
            return Err(SpredError::InvalidInput(format!("tangent vector is not horizontal (|XᵀΔ| = {off:e})")));
        }
        Ok(Self { delta })
    }

    pub fn zero(base: &GrassmannPoint) -> Self {
        Self { delta: DMatrix::zeros(base.rep.nrows(), base.rep.ncols()) }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.delta
    }

    /// Frobenius norm, which equals the length of the geodesic it generates.
    pub fn norm(&self) -> f64 {
        self.delta.norm()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { delta: &self.delta * s }
    }
}

fn diag_map(values: &[f64], f: fn(f64) -> f64) -> DMatrix<f64> {
    DMatrix::from_fn(values.len(), values.len(), |i, j| if i == j { f(values[i]) } else { 0.0 })
}

/// Endpoint of the unit-time geodesic from `x` with initial velocity `d`.
pub fn exp_map(x: &GrassmannPoint, d: &TangentVector) -> GrassmannPoint {
    if d.delta.norm() == 0.0 {
        return x.clone();
    }
    let svd = thin_svd(&d.delta);
    let vt = svd.v.transpose();
    let y = &x.rep * &svd.v * diag_map(&svd.sigma, f64::cos) * &vt + &svd.u * diag_map(&svd.sigma, f64::sin) * &vt;
    let rep = qr_q_positive(&y).expect("geodesic endpoint has full rank");
    GrassmannPoint { rep }
}

/// Inverse of [`exp_map`]: the shortest horizontal `Δ` at `x` reaching `y`.
pub fn log_map(x: &GrassmannPoint, y: &GrassmannPoint) -> Result<TangentVector> {
    x.same_shape(y)?;
    let xty = x.rep.transpose() * &y.rep;
    let smin = thin_svd(&xty).sigma.last().copied().unwrap_or(0.0);
    if !(smin >= 1e-12) {
        return Err(SpredError::CutLocus);
    }
    let inv = xty.clone().try_inverse().ok_or(SpredError::CutLocus)?;
    let m = (&y.rep - &x.rep * &xty) * inv;
    let svd = thin_svd(&m);
    let mut delta = &svd.u * diag_map(&svd.sigma, f64::atan) * svd.v.transpose();
    // strip the rounding-level vertical component
    delta -= &x.rep * (x.rep.transpose() * &delta);
    Ok(TangentVector { delta })
}

/// Geodesic distance: the 2-norm of the principal angles.
pub fn distance(x: &GrassmannPoint, y: &GrassmannPoint) -> f64 {
    principal_angles(&x.rep, &y.rep).iter().map(|a| a * a).sum::<f64>().sqrt()
}

#[derive(Debug, Clone)]
pub struct ExtrinsicMean {
    pub point: GrassmannPoint,
    /// The `k`-th and `(k+1)`-th eigenvalues of the averaged projector tie,
    /// so the mean is not unique; the solver's eigenvector order decided.
    pub ambiguous: bool,
}

/// Top-`k` eigenvectors of the average of the projectors `PᵢPᵢᵀ`.
pub fn extrinsic_mean(points: &[GrassmannPoint]) -> Result<ExtrinsicMean> {
    let first = points.first().ok_or_else(|| SpredError::InvalidInput("mean of an empty set".into()))?;
    for p in points {
        first.same_shape(p)?;
    }
    let (n, k) = first.rep.shape();
    let mut avg = DMatrix::<f64>::zeros(n, n);
    for p in points {
        avg += &p.rep * p.rep.transpose();
    }
    avg /= points.len() as f64;
    let (values, vectors) = sorted_symmetric_eigen(&avg);
    let mut rep = vectors.columns(0, k).into_owned();
    normalize_column_signs(&mut rep);
    let ambiguous = k < n && (values[k - 1] - values[k]).abs() <= 1e-12;
    Ok(ExtrinsicMean { point: GrassmannPoint::new(rep)?, ambiguous })
}

/// `Σᵢ d(x, pᵢ)`.
pub fn sum_of_distances(x: &GrassmannPoint, points: &[GrassmannPoint]) -> f64 {
    points.iter().map(|p| distance(x, p)).sum()
}

#[derive(Debug, Clone)]
pub struct MedianResult {
    pub point: GrassmannPoint,
    pub iterations: usize,
    /// Sum of distances at the start and after every iteration.
    pub objective: Vec<f64>,
    pub converged: bool,
}

/// Weiszfeld iteration for the geometric median, started at the extrinsic mean.
///
/// Inputs that coincide with the current iterate (anchors) are left out of
/// the weighted average. Their total weight is then compared with the pull of
/// the others: if it is at least as strong the iterate is optimal, otherwise
/// the step is shortened accordingly, which keeps the iterate from being
/// dragged off a point that is itself the median.
pub fn weiszfeld_median(points: &[GrassmannPoint], tol: f64, max_iter: usize) -> Result<MedianResult> {
    let mut x = extrinsic_mean(points)?.point;
    let mut objective = vec![sum_of_distances(&x, points)];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < max_iter {
        let mut anchors = 0.0;
        let mut pull = DMatrix::<f64>::zeros(x.rep.nrows(), x.rep.ncols());
        let mut inv_sum = 0.0;
        for p in points {
            let l = log_map(&x, p)?;
            let r = l.norm();
            if r < ANCHOR_TOL {
                anchors += 1.0;
            } else {
                pull += l.delta / r;
                inv_sum += 1.0 / r;
            }
        }
        let strength = pull.norm();
        if inv_sum == 0.0 || anchors >= strength {
            converged = true;
            break;
        }
        let mut step = pull / inv_sum;
        if anchors > 0.0 {
            step *= 1.0 - anchors / strength;
        }
        let next = exp_map(&x, &TangentVector { delta: step });
        let value = sum_of_distances(&next, points);
        // near the optimum rounding can make a step go uphill by an ulp
        if value > *objective.last().expect("nonempty") {
            converged = true;
            break;
        }
        let moved = distance(&x, &next);
        x = next;
        iterations += 1;
        objective.push(value);
        if moved < tol {
            converged = true;
            break;
        }
    }
    Ok(MedianResult { point: x, iterations, objective, converged })
}

/// Random split of the point indices into `m_parts` sets whose sizes differ by
/// at most one. A single part keeps the original order.
pub fn partition_indices(len: usize, m_parts: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Vec<usize>>> {
    if m_parts == 0 || m_parts > len {
        return Err(SpredError::InvalidInput(format!("cannot split {len} points into {m_parts} parts")));
    }
    let mut idx: Vec<usize> = (0..len).collect();
    if m_parts == 1 {
        return Ok(vec![idx]);
    }
    idx.shuffle(rng);
    let (base, extra) = (len / m_parts, len % m_parts);
    let mut parts = Vec::with_capacity(m_parts);
    let mut start = 0;
    for i in 0..m_parts {
        let size = base + usize::from(i < extra);
        let mut part = idx[start..start + size].to_vec();
        part.sort_unstable();
        parts.push(part);
        start += size;
    }
    Ok(parts)
}

pub fn partition(x: &PointCloud, m_parts: usize, rng: &mut ChaCha8Rng) -> Result<Vec<PointCloud>> {
    partition_indices(x.len(), m_parts, rng)?.iter().map(|part| x.select(part)).collect()
}

#[derive(Debug, Clone)]
pub struct DistributedResult {
    pub projection: ProjectionMatrix,
    pub subset_projections: Vec<ProjectionMatrix>,
    pub subset_costs: Vec<f64>,
    pub median: Option<MedianResult>,
}

/// Anneals each part separately (in parallel) and returns the geometric
/// median of the resulting subspaces.
pub fn distributed_reduce(x: &PointCloud, m_parts: usize, cfg: &AnnealingConfig) -> Result<DistributedResult> {
    let cfg = cfg.clone().validated()?;
    if m_parts == 1 {
        let (p, trace) = anneal(x, &cfg)?;
        return Ok(DistributedResult { projection: p.clone(), subset_projections: vec![p], subset_costs: vec![trace.best_cost], median: None });
    }
    if m_parts == 0 || 2 * m_parts > x.len() {
        return Err(SpredError::InvalidInput(format!(
            "{} points cannot be split into {m_parts} parts of at least two points",
            x.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let parts = partition(x, m_parts, &mut rng)?;
    let runs: Vec<Result<(ProjectionMatrix, f64)>> = parts
        .par_iter()
        .enumerate()
        .map(|(i, part)| {
            let sub = AnnealingConfig { seed: derive_seed(cfg.seed, i as u64 + 1), ..cfg.clone() };
            let (p, trace) = anneal(part, &sub)?;
            Ok((p, trace.best_cost))
        })
        .collect();
    let mut subset_projections = Vec::with_capacity(m_parts);
    let mut subset_costs = Vec::with_capacity(m_parts);
    for r in runs {
        let (p, c) = r?;
        subset_projections.push(p);
        subset_costs.push(c);
    }
    let points: Vec<GrassmannPoint> = subset_projections.iter().map(GrassmannPoint::from).collect();
    let median = weiszfeld_median(&points, 1e-8, 1000)?;
    Ok(DistributedResult { projection: median.point.to_projection(), subset_projections, subset_costs, median: Some(median) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn line(theta: f64) -> GrassmannPoint {
        GrassmannPoint::new(DMatrix::from_row_slice(2, 1, &[theta.cos(), theta.sin()])).unwrap()
    }

    fn random_point(n: usize, k: usize, rng: &mut ChaCha8Rng) -> GrassmannPoint {
        let g = DMatrix::from_fn(n, k, |_, _| rng.random_range(-1.0..1.0));
        GrassmannPoint::new(qr_q_positive(&g).unwrap()).unwrap()
    }

    #[test]
    fn exp_of_quarter_turn() {
        let x = line(0.0);
        let d = TangentVector::new(&x, DMatrix::from_row_slice(2, 1, &[0.0, FRAC_PI_2])).unwrap();
        assert_eq!(exp_map(&x, &d), line(FRAC_PI_2));
        assert_eq!(exp_map(&x, &TangentVector::zero(&x)), x);
    }

    #[test]
    fn log_of_diagonal_line() {
        let l = log_map(&line(0.0), &line(FRAC_PI_4)).unwrap();
        assert!((l.norm() - FRAC_PI_4).abs() < 1e-15);
        assert_eq!(log_map(&line(0.3), &line(0.3)).unwrap().norm(), 0.0);
        assert!(matches!(log_map(&line(0.0), &line(FRAC_PI_2)), Err(SpredError::CutLocus)));
    }

    #[test]
    fn distances() {
        assert_eq!(distance(&line(0.0), &line(0.0)), 0.0);
        assert!((distance(&line(0.0), &line(FRAC_PI_2)) - FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn non_horizontal_tangent_rejected() {
        assert!(TangentVector::new(&line(0.0), DMatrix::from_row_slice(2, 1, &[1.0, 0.0])).is_err());
    }

    #[test]
    fn round_trip_and_right_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..30 {
            let x = random_point(6, 2, &mut rng);
            let y = random_point(6, 2, &mut rng);
            let l = log_map(&x, &y).unwrap();
            assert!((l.norm() - distance(&x, &y)).abs() < 1e-9);
            let back = exp_map(&x, &l);
            assert!(principal_angles(back.representative(), y.representative()).iter().all(|&a| a <= 1e-8));
            let q1 = random_point(2, 2, &mut rng);
            let q2 = random_point(2, 2, &mut rng);
            let xq = GrassmannPoint::new(x.representative() * q1.representative()).unwrap();
            let yq = GrassmannPoint::new(y.representative() * q2.representative()).unwrap();
            assert!((distance(&xq, &yq) - distance(&x, &y)).abs() < 1e-10);
        }
    }

    #[test]
    fn extrinsic_mean_cases() {
        let m = extrinsic_mean(&[line(0.4), line(-0.4)]).unwrap();
        assert_eq!(m.point, line(0.0));
        assert!(!m.ambiguous);
        assert_eq!(extrinsic_mean(&[line(1.0)]).unwrap().point, line(1.0));
        assert!(extrinsic_mean(&[line(0.0), line(FRAC_PI_2)]).unwrap().ambiguous);
        assert!(extrinsic_mean(&[]).is_err());
    }

    #[test]
    fn median_of_a_doubled_point() {
        let (p, q) = (line(0.1), line(0.9));
        let r = weiszfeld_median(&[p.clone(), p.clone(), q], 1e-8, 500).unwrap();
        assert!(distance(&r.point, &p) < 1e-6);
        assert!(r.objective.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    }

    #[test]
    fn median_of_identical_points() {
        let p = line(0.7);
        let r = weiszfeld_median(&[p.clone(), p.clone()], 1e-8, 10).unwrap();
        assert_eq!(r.iterations, 0);
        assert_eq!(r.point, p);
    }

    #[test]
    fn partition_sizes() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let parts = partition_indices(10, 3, &mut rng).unwrap();
        let mut sizes: Vec<usize> = parts.iter().map(Vec::len).collect();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![3, 3, 4]);
        let mut all: Vec<usize> = parts.concat();
        all.sort_unstable();
        assert_eq!(all, (0..10).collect::<Vec<_>>());
        assert_eq!(partition_indices(4, 1, &mut rng).unwrap(), vec![vec![0, 1, 2, 3]]);
        assert!(partition_indices(2, 3, &mut rng).is_err());
    }
}
