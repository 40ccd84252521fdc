//! The canonical embedding: vertex `i` of the original complex at `t + η`
//! goes to vertex `i` of the projected complex at `t`.

use crate::error::{Result, SpredError};
use crate::filtration::{rips_filtration, FilteredComplex, Simplex, SimplicialComplex, VertexMap};
use crate::geometry::{eta_bounds_from_distances, pairwise_distances, project, DistanceMatrix, PointCloud, ProjectionMatrix};
use crate::persistence::{compute_persistence, PersistenceDiagram};

use super::quasi_iso::clip_grid;

/// Relative slack for the well-definedness check, so that pairs the
/// projection preserves exactly are not rejected over a rounding error.
const SLACK: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct CanonicalEmbedding {
    pub eta: f64,
    /// Highest homology degree compared.
    pub l: usize,
    /// `a_0 = 0 < … < a_n = diam(X)/2`.
    pub grid: Vec<f64>,
    pub(crate) dx: DistanceMatrix,
    pub(crate) dy: DistanceMatrix,
    fx: FilteredComplex,
    fy: FilteredComplex,
    pub diagrams_x: Vec<PersistenceDiagram>,
    pub diagrams_y: Vec<PersistenceDiagram>,
}

impl CanonicalEmbedding {
    pub fn vertex_count(&self) -> usize {
        self.dx.size()
    }

    /// `diam(X) / 2`, the right end of the grid.
    pub fn end(&self) -> f64 {
        self.dx.max() / 2.0
    }

    pub fn interval_count(&self) -> usize {
        self.grid.len().saturating_sub(1)
    }

    pub fn interval(&self, i: usize) -> (f64, f64) {
        (self.grid[i], self.grid[i + 1])
    }

    /// The identity vertex map every interval uses.
    pub fn vertex_map(&self) -> VertexMap {
        (0..self.vertex_count()).map(|v| (v, v)).collect()
    }

    /// `(K_i, Q_i)`: the original complex at `a_i + η` and the projected one
    /// at `a_i`, as stored in the filtrations (skeleton `max(l + 1, 2)`).
    pub fn interval_complexes(&self, i: usize) -> (SimplicialComplex, SimplicialComplex) {
        let a = self.grid[i];
        let pick = |f: &FilteredComplex, shift: f64| {
            SimplicialComplex::from_simplices(
                f.simplices()
                    .into_iter()
                    .filter(|s| s.value - shift <= a)
                    .map(|s| Simplex::new(s.vertices).expect("filtration simplices are valid")),
            )
        };
        (pick(&self.fx, self.eta), pick(&self.fy, 0.0))
    }

    /// Radius at which edge `(u, v)` enters each side.
    pub(crate) fn edge_values(&self, u: usize, v: usize) -> (f64, f64) {
        (self.dx.get(u, v) / 2.0, self.dy.get(u, v) / 2.0)
    }
}

/// Builds the canonical embedding of `X → XP` for homology degrees up to `l`.
/// `eta` defaults to half the smallest pairwise contraction.
pub fn canonical_embedding(x: &PointCloud, p: &ProjectionMatrix, eta: Option<f64>, l: usize) -> Result<CanonicalEmbedding> {
    let y = project(x, p)?;
    let dx = pairwise_distances(x);
    let dy = pairwise_distances(&y);
    let eta = match eta {
        Some(e) if !(e >= 0.0 && e.is_finite()) => {
            return Err(SpredError::InvalidInput(format!("eta = {e} must be a nonnegative number")));
        }
        Some(e) => e,
        None if x.len() < 2 => 0.0,
        None => eta_bounds_from_distances(&dx, &dy).eta_min / 2.0,
    };
    let top = (l + 1).max(2);
    let fx = rips_filtration(&dx, top);
    let fy = rips_filtration(&dy, top);
    let diagrams_x = compute_persistence(&fx, l)?;
    let diagrams_y = compute_persistence(&fy, l)?;
    let m = x.len();
    let end = dx.max() / 2.0;
    // flag complexes change only when an edge enters
    let mut candidates = Vec::with_capacity(m * m);
    for u in 0..m {
        for v in u + 1..m {
            candidates.push(dx.get(u, v) / 2.0 - eta);
            candidates.push(dy.get(u, v) / 2.0);
        }
    }
    candidates.push(-eta);
    let grid = clip_grid(candidates, end);
    let emb = CanonicalEmbedding { eta, l, grid, dx, dy, fx, fy, diagrams_x, diagrams_y };
    check_well_defined(&emb)?;
    Ok(emb)
}

/// Every edge of `K_i` must be an edge of `Q_i`; for flag complexes that
/// covers all simplices. It suffices to check the first interval containing
/// the edge, since `Q` only grows afterwards.
fn check_well_defined(emb: &CanonicalEmbedding) -> Result<()> {
    let n = emb.interval_count();
    let slack = SLACK * emb.end().max(1.0);
    for u in 0..emb.vertex_count() {
        for v in u + 1..emb.vertex_count() {
            let (vx, vy) = emb.edge_values(u, v);
            let first = emb.grid[..n].partition_point(|&a| a < vx - emb.eta);
            if first < n && vy > emb.grid[first] + slack {
                return Err(SpredError::IllDefinedEmbedding { interval: first, simplex: vec![u, v] });
            }
        }
    }
    Ok(())
}
