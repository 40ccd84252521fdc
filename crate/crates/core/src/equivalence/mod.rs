//! How much of the parameter range the canonical embedding preserves
//! homology (quasi-isomorphism) or homotopy type (trivial quotient `π1`).

mod embedding;
mod group;
mod pi1;
mod quasi_iso;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

pub use embedding::{canonical_embedding, CanonicalEmbedding};
pub use group::{
    abelianization, cyclic_reduce, free_reduce, invert, is_trivial, simplify_short_relators, Abelianization,
    GroupPresentation, Triviality, Word,
};
pub use pi1::{combine, edge_path_presentation, pi1_quotient_verdicts, ComponentQuotient};
pub use quasi_iso::{mu_quasi_iso, mu_quasi_iso_barcode, QuasiIsoReport};

use crate::error::Result;
use crate::geometry::{PointCloud, ProjectionMatrix};
use pi1::{flag_quotient_verdict, BitGraph};
use quasi_iso::{counts_at, run_measure};

/// Default number of Tietze rewrite steps per presentation.
pub const DEFAULT_BUDGET: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum IntervalClass {
    /// Betti numbers differ in some degree `≤ l`.
    T0,
    /// Homology agrees but the quotient has nontrivial `π1`.
    T1,
    /// Homology agrees and every quotient component is simply connected.
    T2,
    /// Homology agrees; the word problem was not settled within budget.
    #[serde(rename = "T1-or-T2-unknown")]
    Unknown,
}

impl IntervalClass {
    pub fn label(self) -> &'static str {
        match self {
            IntervalClass::T0 => "T0",
            IntervalClass::T1 => "T1",
            IntervalClass::T2 => "T2",
            IntervalClass::Unknown => "T1-or-T2-unknown",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntervalReport {
    pub start: f64,
    pub end: f64,
    pub class: IntervalClass,
    pub betti_x: Vec<usize>,
    pub betti_y: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimilarityReport {
    pub eta: f64,
    pub l: usize,
    pub grid: Vec<f64>,
    pub intervals: Vec<IntervalReport>,
    pub mu_quasi_iso: f64,
    pub mu_equiv_lower: f64,
    pub mu_equiv_upper: f64,
}

impl SimilarityReport {
    /// Total length of the intervals in `class`.
    pub fn length_of(&self, class: IntervalClass) -> f64 {
        self.intervals.iter().filter(|r| r.class == class).map(|r| r.end - r.start).sum()
    }

    pub fn to_json_value(&self) -> Value {
        json!({
            "eta": self.eta,
            "l": self.l,
            "grid": self.grid,
            "intervals": self.intervals.iter().map(|r| json!({
                "start": r.start,
                "end": r.end,
                "class": r.class.label(),
                "betti_x": r.betti_x,
                "betti_y": r.betti_y,
            })).collect::<Vec<_>>(),
            "mu_quasi_iso": self.mu_quasi_iso,
            "mu_equiv": [self.mu_equiv_lower, self.mu_equiv_upper],
        })
    }
}

/// Classifies every grid interval of the embedding. Intervals are
/// independent and are processed in parallel.
pub fn classify_intervals(emb: &CanonicalEmbedding, budget: usize) -> SimilarityReport {
    let m = emb.vertex_count();
    let intervals: Vec<IntervalReport> = (0..emb.interval_count())
        .into_par_iter()
        .map(|i| {
            let (start, end) = emb.interval(i);
            let (betti_x, betti_y) = counts_at(&emb.diagrams_x, &emb.diagrams_y, emb.eta, start);
            let class = if betti_x != betti_y {
                IntervalClass::T0
            } else {
                let mut q = BitGraph::new(m);
                let mut extra = Vec::new();
                for u in 0..m {
                    for v in u + 1..m {
                        let (vx, vy) = emb.edge_values(u, v);
                        let in_k = vx - emb.eta <= start;
                        if in_k || vy <= start {
                            q.add(u, v);
                            if !in_k {
                                extra.push((u, v));
                            }
                        }
                    }
                }
                match flag_quotient_verdict(m, &q, &extra, budget) {
                    Triviality::Trivial => IntervalClass::T2,
                    Triviality::Nontrivial => IntervalClass::T1,
                    Triviality::Unknown => IntervalClass::Unknown,
                }
            };
            IntervalReport { start, end, class, betti_x, betti_y }
        })
        .collect();
    let grid = &emb.grid;
    let is = |pred: fn(IntervalClass) -> bool| run_measure(grid, |i| pred(intervals[i].class));
    let mu_quasi_iso = is(|c| c != IntervalClass::T0);
    let mu_equiv_upper = is(|c| matches!(c, IntervalClass::T2 | IntervalClass::Unknown)).min(mu_quasi_iso);
    let mu_equiv_lower = is(|c| c == IntervalClass::T2).min(mu_equiv_upper);
    SimilarityReport { eta: emb.eta, l: emb.l, grid: grid.clone(), intervals, mu_quasi_iso, mu_equiv_lower, mu_equiv_upper }
}

/// Embedding plus classification in one call.
pub fn similarity(x: &PointCloud, p: &ProjectionMatrix, eta: Option<f64>, l: usize, budget: usize) -> Result<SimilarityReport> {
    Ok(classify_intervals(&canonical_embedding(x, p, eta, l)?, budget))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::diameter;

    fn cloud(rows: &[Vec<f64>]) -> PointCloud {
        PointCloud::from_rows(rows).unwrap()
    }

    /// Eight points around a hollow square of side 2, climbing in height, so
    /// the closing edge is long in space but short after dropping the height.
    pub(crate) fn square_helix() -> PointCloud {
        let xy = [(0.0, 0.0), (1.0, 0.0), (2.0, 0.0), (2.0, 1.0), (2.0, 2.0), (1.0, 2.0), (0.0, 2.0), (0.0, 1.0)];
        cloud(&xy.iter().enumerate().map(|(i, &(a, b))| vec![a, b, 0.3 * i as f64]).collect::<Vec<_>>())
    }

    #[test]
    fn identity_projection_is_fully_equivalent() {
        let x = cloud(&[vec![0.0, 0.0, 0.0], vec![1.0, 0.1, 0.0], vec![0.2, 1.0, 0.3], vec![1.1, 1.2, -0.2]]);
        let r = similarity(&x, &ProjectionMatrix::identity(3).unwrap(), None, 1, DEFAULT_BUDGET).unwrap();
        assert!(r.intervals.iter().all(|i| i.class == IntervalClass::T2));
        assert_eq!((r.mu_quasi_iso, r.mu_equiv_lower, r.mu_equiv_upper), (1.0, 1.0, 1.0));
    }

    #[test]
    fn three_point_example() {
        let x = cloud(&[vec![0.0, 0.0], vec![4.0, 0.0], vec![0.0, 3.0]]);
        let p = ProjectionMatrix::coordinate_frame(2, 1).unwrap();
        let r = similarity(&x, &p, None, 0, DEFAULT_BUDGET).unwrap();
        let classes: Vec<IntervalClass> = r.intervals.iter().map(|i| i.class).collect();
        assert_eq!(classes, vec![IntervalClass::T0, IntervalClass::T2, IntervalClass::T2]);
        assert_eq!(r.mu_quasi_iso, 0.4);
        assert_eq!(r.mu_equiv_lower, 0.4);
        assert_eq!(r.mu_equiv_upper, 0.4);
        let emb = canonical_embedding(&x, &p, None, 0).unwrap();
        let q = mu_quasi_iso(&emb.diagrams_x, &emb.diagrams_y, emb.eta, diameter(&x)).unwrap();
        assert_eq!(q.mu, r.mu_quasi_iso);
    }

    #[test]
    fn square_helix_has_a_circle_quotient() {
        let x = square_helix();
        let p = ProjectionMatrix::coordinate_frame(3, 2).unwrap();
        let r = similarity(&x, &p, None, 0, DEFAULT_BUDGET).unwrap();
        let t1 = r.intervals.iter().find(|i| i.class == IntervalClass::T1).expect("a T1 interval");
        assert!(t1.start >= 0.5 - 1e-12 && t1.end <= 0.5f64.sqrt() + 1e-12);
        assert!(r.mu_equiv_upper < r.mu_quasi_iso);
        let total: f64 = [IntervalClass::T0, IntervalClass::T1, IntervalClass::T2, IntervalClass::Unknown]
            .iter()
            .map(|&c| r.length_of(c))
            .sum();
        assert!((total - diameter(&x) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn report_json_shape() {
        let x = cloud(&[vec![0.0, 0.0], vec![4.0, 0.0], vec![0.0, 3.0]]);
        let p = ProjectionMatrix::coordinate_frame(2, 1).unwrap();
        let v = similarity(&x, &p, None, 0, DEFAULT_BUDGET).unwrap().to_json_value();
        assert_eq!(v["intervals"][0]["class"], "T0");
        assert_eq!(v["mu_equiv"][0], 0.4);
        assert_eq!(v["grid"].as_array().unwrap().len(), 4);
    }
}
