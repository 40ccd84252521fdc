//! Fraction of the parameter range on which the original and the projected
//! filtrations have equal Betti numbers in every degree up to `l`.
//!
//! The original diagrams are shifted left by `η` (the original complex is
//! read at `t + η`), and every comparison uses the shifted endpoint itself,
//! so grid points and counts never disagree through rounding.

use serde::Serialize;

use crate::error::{Result, SpredError};
use crate::persistence::{Barcode, PersistenceDiagram};

fn check(eta: f64, diam_x: f64) -> Result<()> {
    if !(eta >= 0.0 && eta.is_finite()) {
        return Err(SpredError::InvalidInput(format!("eta = {eta} must be a nonnegative number")));
    }
    if !(diam_x >= 0.0 && diam_x.is_finite()) {
        return Err(SpredError::InvalidInput(format!("diameter = {diam_x} must be a nonnegative number")));
    }
    Ok(())
}

/// Sorted distinct values of `candidates` inside `[0, end)`, with `0` first
/// and `end` appended.
pub(crate) fn clip_grid(candidates: impl IntoIterator<Item = f64>, end: f64) -> Vec<f64> {
    let mut g: Vec<f64> = candidates.into_iter().filter(|&v| v > 0.0 && v < end).collect();
    g.push(0.0);
    g.sort_by(f64::total_cmp);
    g.dedup();
    if end > 0.0 {
        g.push(end);
    }
    g
}

/// `Σ (run end − run start) / end` over maximal runs of selected intervals.
/// Summing runs rather than single intervals makes a full selection exactly 1.
pub(crate) fn run_measure(grid: &[f64], selected: impl Fn(usize) -> bool) -> f64 {
    let n = grid.len().saturating_sub(1);
    let end = grid.last().copied().unwrap_or(0.0);
    if n == 0 || end == 0.0 {
        return 1.0;
    }
    let mut total = 0.0;
    let mut i = 0;
    while i < n {
        if selected(i) {
            let start = i;
            while i < n && selected(i) {
                i += 1;
            }
            total += grid[i] - grid[start];
        } else {
            i += 1;
        }
    }
    total / end
}

fn finite_endpoints(d: &PersistenceDiagram, shift: f64) -> impl Iterator<Item = f64> + '_ {
    d.pairs()
        .iter()
        .flat_map(move |p| [p.birth - shift, p.death - shift])
        .filter(|v| v.is_finite())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuasiIsoReport {
    pub mu: f64,
    /// `a_0 = 0 < … < a_n = diam(X)/2`.
    pub grid: Vec<f64>,
    /// Whether each `[a_i, a_{i+1})` has matching Betti numbers.
    pub counted: Vec<bool>,
}

/// Betti numbers of both sides on `[a, next grid point)`.
pub(crate) fn counts_at(dx: &[PersistenceDiagram], dy: &[PersistenceDiagram], eta: f64, a: f64) -> (Vec<usize>, Vec<usize>) {
    let cx = dx.iter().map(|d| d.pairs().iter().filter(|p| p.birth - eta <= a && a < p.death - eta).count()).collect();
    let cy = dy.iter().map(|d| d.pairs().iter().filter(|p| p.birth <= a && a < p.death).count()).collect();
    (cx, cy)
}

fn check_degrees(nx: usize, ny: usize) -> Result<()> {
    if nx != ny || nx == 0 {
        return Err(SpredError::InvalidInput(format!("need the same nonzero number of degrees, got {nx} and {ny}")));
    }
    Ok(())
}

/// Counting-set version: per interval and degree, compare the number of
/// pairs alive at the interval's left end.
pub fn mu_quasi_iso(dx: &[PersistenceDiagram], dy: &[PersistenceDiagram], eta: f64, diam_x: f64) -> Result<QuasiIsoReport> {
    check(eta, diam_x)?;
    check_degrees(dx.len(), dy.len())?;
    let end = diam_x / 2.0;
    let grid = clip_grid(
        dx.iter().flat_map(|d| finite_endpoints(d, eta)).chain(dy.iter().flat_map(|d| finite_endpoints(d, 0.0))),
        end,
    );
    let counted: Vec<bool> = grid
        .windows(2)
        .map(|w| {
            let (cx, cy) = counts_at(dx, dy, eta, w[0]);
            cx == cy
        })
        .collect();
    let mu = run_measure(&grid, |i| counted[i]);
    Ok(QuasiIsoReport { mu, grid, counted })
}

/// Height-function version: sweeps the bar endpoints once per degree and
/// compares `ht_{t+η}` of the original barcode with `ht_t` of the projected one.
pub fn mu_quasi_iso_barcode(bx: &[Barcode], by: &[Barcode], eta: f64, diam_x: f64) -> Result<f64> {
    check(eta, diam_x)?;
    check_degrees(bx.len(), by.len())?;
    let end = diam_x / 2.0;
    let shifted = |b: &Barcode, s: f64| -> Vec<(f64, i64)> {
        let mut ev: Vec<(f64, i64)> = Vec::with_capacity(2 * b.bars.len());
        for &(lo, hi) in &b.bars {
            ev.push((lo - s, 1));
            if hi.is_finite() {
                ev.push((hi - s, -1));
            }
        }
        ev.sort_by(|a, b| a.0.total_cmp(&b.0));
        ev
    };
    let events: Vec<(Vec<(f64, i64)>, Vec<(f64, i64)>)> =
        bx.iter().zip(by).map(|(x, y)| (shifted(x, eta), shifted(y, 0.0))).collect();
    let grid = clip_grid(events.iter().flat_map(|(x, y)| x.iter().chain(y).map(|e| e.0)), end);
    let n = grid.len().saturating_sub(1);
    let mut same = vec![true; n];
    for (ex, ey) in &events {
        let (mut ix, mut iy, mut hx, mut hy) = (0, 0, 0i64, 0i64);
        for (i, &a) in grid.iter().take(n).enumerate() {
            while ix < ex.len() && ex[ix].0 <= a {
                hx += ex[ix].1;
                ix += 1;
            }
            while iy < ey.len() && ey[iy].0 <= a {
                hy += ey[iy].1;
                iy += 1;
            }
            same[i] &= hx == hy;
        }
    }
    Ok(run_measure(&grid, |i| same[i]))
}
