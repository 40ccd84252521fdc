//! Exact Wasserstein and bottleneck distances between persistence diagrams.
//!
//! Unequal diagrams are compared after augmenting each side with diagonal
//! slots for the other side's points. A point matched to a diagonal slot pays
//! its `q`-norm distance to the diagonal, and two diagonal slots match for free.
//! Points with infinite death are matched among themselves by sorted birth.

use crate::error::{Result, SpredError};
use crate::persistence::{PersistenceDiagram, PersistencePair};

fn check_q(q: f64) -> Result<()> {
    if q.is_nan() || q < 1.0 {
        return Err(SpredError::InvalidInput(format!("ground norm q = {q} must be >= 1")));
    }
    Ok(())
}

fn check_degrees(d1: &PersistenceDiagram, d2: &PersistenceDiagram) -> Result<()> {
    if d1.degree != d2.degree {
        return Err(SpredError::InvalidInput(format!(
            "cannot compare diagrams of degree {} and {}",
            d1.degree, d2.degree
        )));
    }
    Ok(())
}

/// `‖(a, b)‖_q` for `q ∈ [1, ∞]`.
fn qnorm(a: f64, b: f64, q: f64) -> f64 {
    let (a, b) = (a.abs(), b.abs());
    if q == f64::INFINITY {
        a.max(b)
    } else if q == 1.0 {
        a + b
    } else if q == 2.0 {
        a.hypot(b)
    } else {
        let m = a.max(b);
        if m == 0.0 {
            0.0
        } else {
            m * ((a / m).powf(q) + (b / m).powf(q)).powf(1.0 / q)
        }
    }
}

/// Distance from a point to its orthogonal projection on the diagonal, which
/// is the nearest diagonal point for every `q`.
fn to_diagonal(x: &PersistencePair, q: f64) -> f64 {
    let half = (x.death - x.birth) / 2.0;
    qnorm(half, half, q)
}

/// Base (un-powered) costs of the augmented assignment problem.
struct Augmented {
    size: usize,
    costs: Vec<f64>,
    essential: Option<Vec<f64>>,
}

impl Augmented {
    fn new(d1: &PersistenceDiagram, d2: &PersistenceDiagram, q: f64) -> Self {
        let a: Vec<&PersistencePair> = d1.finite().collect();
        let b: Vec<&PersistencePair> = d2.finite().collect();
        let (n1, n2) = (a.len(), b.len());
        let size = n1 + n2;
        let mut costs = vec![0.0; size * size];
        for i in 0..size {
            for j in 0..size {
                costs[i * size + j] = match (i < n1, j < n2) {
                    (true, true) => qnorm(a[i].birth - b[j].birth, a[i].death - b[j].death, q),
                    (true, false) => to_diagonal(a[i], q),
                    (false, true) => to_diagonal(b[j], q),
                    (false, false) => 0.0,
                };
            }
        }
        let mut e1: Vec<f64> = d1.essential().map(|p| p.birth).collect();
        let mut e2: Vec<f64> = d2.essential().map(|p| p.birth).collect();
        let essential = (e1.len() == e2.len()).then(|| {
            e1.sort_by(f64::total_cmp);
            e2.sort_by(f64::total_cmp);
            e1.iter().zip(&e2).map(|(x, y)| (x - y).abs()).collect()
        });
        Self { size, costs, essential }
    }
}

/// `p`-Wasserstein distance over the `q`-norm ground metric, `p, q ∈ [1, ∞)` /
/// `q = ∞` allowed. Returns `+∞` when the diagrams differ in their number of
/// infinite-death points.
pub fn wasserstein(d1: &PersistenceDiagram, d2: &PersistenceDiagram, p: f64, q: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(SpredError::InvalidInput(format!("order p = {p} must be >= 1")));
    }
    check_q(q)?;
    check_degrees(d1, d2)?;
    if p == f64::INFINITY {
        return bottleneck(d1, d2, q);
    }
    let aug = Augmented::new(d1, d2, q);
    let Some(essential) = &aug.essential else {
        return Ok(f64::INFINITY);
    };
    // Costs live in the p-th power domain. For p > 2 they are divided by the
    // bottleneck value first: every matching has an entry at least that large,
    // so the optimum stays >= 1 and neither overflow nor underflow can move it.
    let scale = if p <= 2.0 {
        1.0
    } else {
        let b = bottleneck_of(&aug);
        if b == 0.0 {
            return Ok(0.0);
        }
        b
    };
    let n = aug.size;
    let clamp = 1e300 / (n.max(1) as f64 + essential.len() as f64);
    let power = |c: f64| {
        let r = if p == 1.0 { c / scale } else { (c / scale).powf(p) };
        r.min(clamp)
    };
    let powered: Vec<f64> = aug.costs.iter().map(|&c| power(c)).collect();
    let assignment = hungarian(&powered, n);
    let mut total: f64 = assignment.iter().enumerate().map(|(i, &j)| powered[i * n + j]).sum();
    total += essential.iter().map(|&c| power(c)).sum::<f64>();
    Ok(if p == 1.0 { scale * total } else { scale * total.powf(1.0 / p) })
}

/// Bottleneck distance over the `q`-norm ground metric.
pub fn bottleneck(d1: &PersistenceDiagram, d2: &PersistenceDiagram, q: f64) -> Result<f64> {
    check_q(q)?;
    check_degrees(d1, d2)?;
    let aug = Augmented::new(d1, d2, q);
    if aug.essential.is_none() {
        return Ok(f64::INFINITY);
    }
    Ok(bottleneck_of(&aug))
}

fn bottleneck_of(aug: &Augmented) -> f64 {
    let essential = aug.essential.as_ref().map_or(0.0, |e| e.iter().copied().fold(0.0, f64::max));
    let n = aug.size;
    if n == 0 {
        return essential;
    }
    let mut candidates: Vec<f64> = aug.costs.clone();
    candidates.push(0.0);
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();
    // smallest candidate admitting a perfect matching
    let (mut lo, mut hi) = (0usize, candidates.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if has_perfect_matching(&aug.costs, n, candidates[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    candidates[lo].max(essential)
}

/// Kuhn's augmenting-path test on the threshold graph `cost <= t`.
fn has_perfect_matching(costs: &[f64], n: usize, t: f64) -> bool {
    let adj: Vec<Vec<usize>> = (0..n).map(|i| (0..n).filter(|&j| costs[i * n + j] <= t).collect()).collect();
    let mut match_col = vec![usize::MAX; n];
    let mut seen = vec![0usize; n];
    for row in 0..n {
        if !augment(row, row + 1, &adj, &mut match_col, &mut seen) {
            return false;
        }
    }
    true
}

fn augment(row: usize, stamp: usize, adj: &[Vec<usize>], match_col: &mut [usize], seen: &mut [usize]) -> bool {
    for &col in &adj[row] {
        if seen[col] == stamp {
            continue;
        }
        seen[col] = stamp;
        if match_col[col] == usize::MAX || augment(match_col[col], stamp, adj, match_col, seen) {
            match_col[col] = row;
            return true;
        }
    }
    false
}

/// Minimum-cost perfect assignment on a square row-major matrix (shortest
/// augmenting paths with potentials, O(n³)). Returns the column of each row.
pub(crate) fn hungarian(costs: &[f64], n: usize) -> Vec<usize> {
    if n == 0 {
        return Vec::new();
    }
    let inf = f64::INFINITY;
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut row_of = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        row_of[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = row_of[j0];
            let mut delta = inf;
            let mut j1 = 0usize;
            for j in 1..=n {
                if !used[j] {
                    let cur = costs[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[row_of[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if row_of[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut col_of = vec![0usize; n];
    for j in 1..=n {
        col_of[row_of[j] - 1] = j - 1;
    }
    col_of
}
