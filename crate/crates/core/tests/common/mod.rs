//! Independent reference implementations used by the integration tests.
//! Nothing here calls into the library's filtration, reduction or matching
//! code: complexes are enumerated from scratch, homology comes from ranks of
//! boundary matrices over Z/2, and diagram distances from enumerating every
//! partial matching.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spred::geometry::PointCloud;
use spred::persistence::{PersistenceDiagram, PersistencePair};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn cloud(rows: &[&[f64]]) -> PointCloud {
    PointCloud::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
}

/// Uniform points in `[-1, 1]^dim`.
pub fn random_cloud(rng: &mut ChaCha8Rng, m: usize, dim: usize) -> PointCloud {
    let rows: Vec<Vec<f64>> = (0..m).map(|_| (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    PointCloud::from_rows(&rows).unwrap()
}

pub fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

pub fn distance_rows(x: &PointCloud) -> Vec<Vec<f64>> {
    let pts = x.rows();
    pts.iter().map(|a| pts.iter().map(|b| euclid(a, b)).collect()).collect()
}

/// Vertex subsets of size `1..=max_dim+1` whose pairwise distances are all
/// `<= 2t`.
pub fn rips_simplices(d: &[Vec<f64>], t: f64, max_dim: usize) -> Vec<Vec<usize>> {
    flag_simplices(d.len(), max_dim, |u, v| d[u][v] / 2.0 <= t)
}

/// Cliques of size `1..=max_dim+1` in the graph on `m` vertices given by `edge`.
pub fn flag_simplices(m: usize, max_dim: usize, edge: impl Fn(usize, usize) -> bool) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut stack: Vec<Vec<usize>> = (0..m).map(|v| vec![v]).collect();
    while let Some(s) = stack.pop() {
        let last = *s.last().unwrap();
        for v in last + 1..m {
            if s.len() <= max_dim && s.iter().all(|&u| edge(u, v)) {
                let mut next = s.clone();
                next.push(v);
                stack.push(next);
            }
        }
        out.push(s);
    }
    out.sort();
    out
}

/// Eight points around a hollow square of side 2, climbing in height: the
/// closing edge is long in space but short once the height is dropped.
pub fn square_helix() -> PointCloud {
    let xy = [(0.0, 0.0), (1.0, 0.0), (2.0, 0.0), (2.0, 1.0), (2.0, 2.0), (1.0, 2.0), (0.0, 2.0), (0.0, 1.0)];
    PointCloud::from_rows(&xy.iter().enumerate().map(|(i, &(a, b))| vec![a, b, 0.3 * i as f64]).collect::<Vec<_>>()).unwrap()
}

/// Rank over Z/2 of a matrix whose columns are given as sets of row indices.
pub fn rank_z2(columns: Vec<BTreeSet<usize>>) -> usize {
    let mut pivots: HashMap<usize, BTreeSet<usize>> = HashMap::new();
    let mut rank = 0;
    for mut col in columns {
        while let Some(&low) = col.iter().next_back() {
            match pivots.get(&low) {
                Some(p) => {
                    col = col.symmetric_difference(p).copied().collect();
                }
                None => {
                    pivots.insert(low, col);
                    rank += 1;
                    break;
                }
            }
        }
    }
    rank
}

fn faces(s: &[usize]) -> impl Iterator<Item = Vec<usize>> + '_ {
    (0..s.len()).map(move |i| s.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &v)| v).collect())
}

/// Betti numbers of the relative chain complex `C(q) / C(k)` in degrees
/// `0..=top`. With `k` empty these are the ordinary Betti numbers of `q`.
/// `q` must be closed under faces and contain `k`.
pub fn relative_betti(q: &[Vec<usize>], k: &[Vec<usize>], top: usize) -> Vec<usize> {
    let sub: BTreeSet<&Vec<usize>> = k.iter().collect();
    let mut by_dim: Vec<Vec<&Vec<usize>>> = vec![Vec::new(); top + 2];
    for s in q {
        let d = s.len() - 1;
        if d <= top + 1 && !sub.contains(s) {
            by_dim[d].push(s);
        }
    }
    let index: Vec<HashMap<&Vec<usize>, usize>> =
        by_dim.iter().map(|l| l.iter().enumerate().map(|(i, s)| (*s, i)).collect()).collect();
    // rank of the boundary from degree d to d - 1
    let boundary_rank = |d: usize| -> usize {
        if d == 0 || d > top + 1 {
            return 0;
        }
        let cols = by_dim[d]
            .iter()
            .map(|s| faces(s).filter_map(|f| index[d - 1].get(&f).copied()).collect::<BTreeSet<usize>>())
            .collect();
        rank_z2(cols)
    };
    (0..=top).map(|d| by_dim[d].len() - boundary_rank(d) - boundary_rank(d + 1)).collect()
}

pub fn betti(q: &[Vec<usize>], top: usize) -> Vec<usize> {
    relative_betti(q, &[], top)
}

/// Betti numbers of the Rips complex at `t`, computed from scratch.
pub fn rips_betti(d: &[Vec<f64>], t: f64, top: usize) -> Vec<usize> {
    betti(&rips_simplices(d, t, top + 1), top)
}

fn qnorm(a: f64, b: f64, q: f64) -> f64 {
    if q.is_infinite() {
        a.abs().max(b.abs())
    } else {
        (a.abs().powf(q) + b.abs().powf(q)).powf(1.0 / q)
    }
}

/// Cost of matching two diagram points (`None` is the diagonal).
pub fn pair_cost(a: Option<&PersistencePair>, b: Option<&PersistencePair>, q: f64) -> f64 {
    match (a, b) {
        (None, None) => 0.0,
        (Some(x), None) | (None, Some(x)) => {
            if x.death.is_infinite() {
                f64::INFINITY
            } else {
                qnorm((x.death - x.birth) / 2.0, (x.death - x.birth) / 2.0, q)
            }
        }
        (Some(x), Some(y)) => match (x.death.is_infinite(), y.death.is_infinite()) {
            (true, true) => (x.birth - y.birth).abs(),
            (false, false) => qnorm(x.birth - y.birth, x.death - y.death, q),
            _ => f64::INFINITY,
        },
    }
}

/// Visits every partial injection from `a` to `b`; unmatched points on
/// either side go to the diagonal. Calls `f` with the list of costs.
fn for_each_matching(a: &[PersistencePair], b: &[PersistencePair], q: f64, f: &mut dyn FnMut(&[f64])) {
    fn rec(
        i: usize,
        a: &[PersistencePair],
        b: &[PersistencePair],
        used: &mut Vec<bool>,
        costs: &mut Vec<f64>,
        q: f64,
        f: &mut dyn FnMut(&[f64]),
    ) {
        if i == a.len() {
            let n = costs.len();
            for (j, y) in b.iter().enumerate() {
                if !used[j] {
                    costs.push(pair_cost(None, Some(y), q));
                }
            }
            f(costs);
            costs.truncate(n);
            return;
        }
        costs.push(pair_cost(Some(&a[i]), None, q));
        rec(i + 1, a, b, used, costs, q, f);
        costs.pop();
        for j in 0..b.len() {
            if !used[j] {
                used[j] = true;
                costs.push(pair_cost(Some(&a[i]), Some(&b[j]), q));
                rec(i + 1, a, b, used, costs, q, f);
                costs.pop();
                used[j] = false;
            }
        }
    }
    rec(0, a, b, &mut vec![false; b.len()], &mut Vec::new(), q, f);
}

/// Exhaustive Wasserstein distance; `p = ∞` gives the bottleneck distance.
pub fn brute_wasserstein(d1: &PersistenceDiagram, d2: &PersistenceDiagram, p: f64, q: f64) -> f64 {
    let mut best = f64::INFINITY;
    for_each_matching(d1.pairs(), d2.pairs(), q, &mut |costs| {
        let v = if p.is_infinite() {
            costs.iter().copied().fold(0.0, f64::max)
        } else {
            costs.iter().map(|c| c.powf(p)).sum::<f64>().powf(1.0 / p)
        };
        best = best.min(v);
    });
    best
}

/// A random diagram with up to `max_points` points on a coarse grid (so that
/// ties occur), of which up to `essential` have infinite death.
pub fn random_diagram(rng: &mut ChaCha8Rng, degree: usize, max_points: usize, essential: usize) -> PersistenceDiagram {
    let n = rng.random_range(0..=max_points);
    let mut pairs = Vec::with_capacity(n + essential);
    for _ in 0..n {
        let b = rng.random_range(0..8) as f64 * 0.25;
        let len = rng.random_range(1..8) as f64 * 0.25 + rng.random_range(0.0..0.01);
        pairs.push(PersistencePair::new(b, b + len));
    }
    for _ in 0..essential {
        pairs.push(PersistencePair::essential(rng.random_range(0..8) as f64 * 0.25));
    }
    PersistenceDiagram::new(degree, pairs).unwrap()
}

/// Fraction of `[0, grid.last())` on which `counts_agree(a)` holds, where
/// `a` is the left end of each grid interval.
pub fn measure_where(grid: &[f64], mut counts_agree: impl FnMut(f64) -> bool) -> f64 {
    let end = *grid.last().unwrap();
    let total: f64 = grid.windows(2).filter(|w| counts_agree(w[0])).map(|w| w[1] - w[0]).sum();
    if end > 0.0 { total / end } else { 1.0 }
}
