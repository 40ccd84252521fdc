//! Persistent homology over Z/2 by boundary-matrix column reduction.
//!
//! Each dimension is reduced separately: columns are the `d`-simplices in
//! filtration order, rows the `(d-1)`-simplices. Rows belonging to simplices
//! that were already paired as deaths one dimension lower can never be
//! pivots, so they are dropped from the columns up front (compression). On a
//! complete Rips filtration the final complex is a full skeleton, whose
//! homology is known, so the reduction stops as soon as every class that must
//! die has died.

use serde_json::{json, Value};

use crate::error::{Result, SpredError};
use crate::filtration::{Binomial, FaceIndex, FilteredComplex};
use crate::geometry::DistanceMatrix;

/// One `(birth, death)` point; `death` is `f64::INFINITY` for classes that never die.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PersistencePair {
    pub birth: f64,
    pub death: f64,
}

impl PersistencePair {
    pub fn new(birth: f64, death: f64) -> Self {
        Self { birth, death }
    }

    pub fn essential(birth: f64) -> Self {
        Self { birth, death: f64::INFINITY }
    }

    pub fn is_essential(&self) -> bool {
        self.death == f64::INFINITY
    }

    pub fn persistence(&self) -> f64 {
        self.death - self.birth
    }
}

/// The degree-`degree` persistence diagram, in the radius scale.
#[derive(Debug, Clone, PartialEq)]
pub struct PersistenceDiagram {
    pub degree: usize,
    pairs: Vec<PersistencePair>,
}

impl PersistenceDiagram {
    /// Drops zero-persistence pairs, rejects `birth > death`, and sorts the
    /// pairs by `(birth, death)`.
    pub fn new(degree: usize, pairs: Vec<PersistencePair>) -> Result<Self> {
        for p in &pairs {
            if !p.birth.is_finite() || p.death.is_nan() || p.birth > p.death || p.death == f64::NEG_INFINITY {
                return Err(SpredError::InvalidInput(format!("invalid pair ({}, {})", p.birth, p.death)));
            }
        }
        let mut pairs: Vec<_> = pairs.into_iter().filter(|p| p.birth < p.death).collect();
        pairs.sort_by(|a, b| a.birth.total_cmp(&b.birth).then(a.death.total_cmp(&b.death)));
        Ok(Self { degree, pairs })
    }

    pub fn empty(degree: usize) -> Self {
        Self { degree, pairs: Vec::new() }
    }

    pub fn pairs(&self) -> &[PersistencePair] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn finite(&self) -> impl Iterator<Item = &PersistencePair> {
        self.pairs.iter().filter(|p| !p.is_essential())
    }

    pub fn essential(&self) -> impl Iterator<Item = &PersistencePair> {
        self.pairs.iter().filter(|p| p.is_essential())
    }

    /// Largest finite persistence, zero when there is none.
    pub fn max_finite_persistence(&self) -> f64 {
        self.finite().map(PersistencePair::persistence).fold(0.0, f64::max)
    }

    /// `{"scale":"radius","degree":j,"pairs":[[b,d],...]}` with `"inf"` for infinite deaths.
    pub fn to_json_value(&self) -> Value {
        let pairs: Vec<Value> = self
            .pairs
            .iter()
            .map(|p| if p.is_essential() { json!([p.birth, "inf"]) } else { json!([p.birth, p.death]) })
            .collect();
        json!({ "scale": "radius", "degree": self.degree, "pairs": pairs })
    }

    pub fn to_json(&self) -> String {
        self.to_json_value().to_string()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(text)?;
        Self::from_json_value(&v)
    }

    pub fn from_json_value(v: &Value) -> Result<Self> {
        let bad = |m: &str| SpredError::InvalidInput(format!("diagram json: {m}"));
        match v.get("scale").and_then(Value::as_str) {
            Some("radius") => {}
            _ => return Err(bad("\"scale\" must be \"radius\"")),
        }
        let degree = v.get("degree").and_then(Value::as_u64).ok_or_else(|| bad("missing \"degree\""))? as usize;
        let raw = v.get("pairs").and_then(Value::as_array).ok_or_else(|| bad("missing \"pairs\""))?;
        let mut pairs = Vec::with_capacity(raw.len());
        for entry in raw {
            let pair = entry.as_array().filter(|a| a.len() == 2).ok_or_else(|| bad("pair must be [b, d]"))?;
            let birth = pair[0].as_f64().ok_or_else(|| bad("birth must be a number"))?;
            let death = match &pair[1] {
                Value::String(s) if s == "inf" => f64::INFINITY,
                d => d.as_f64().ok_or_else(|| bad("death must be a number or \"inf\""))?,
            };
            pairs.push(PersistencePair::new(birth, death));
        }
        Self::new(degree, pairs)
    }
}

/// A diagram read as half-open intervals `[birth, death)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Barcode {
    pub degree: usize,
    pub bars: Vec<(f64, f64)>,
}

impl From<&PersistenceDiagram> for Barcode {
    fn from(d: &PersistenceDiagram) -> Self {
        Self { degree: d.degree, bars: d.pairs.iter().map(|p| (p.birth, p.death)).collect() }
    }
}

impl Barcode {
    /// Number of bars containing `t`.
    pub fn height(&self, t: f64) -> usize {
        self.bars.iter().filter(|&&(b, d)| b <= t && t < d).count()
    }
}

/// Number of pairs with `birth <= t < death`.
pub fn betti_at(diag: &PersistenceDiagram, t: f64) -> usize {
    diag.pairs.iter().filter(|p| p.birth <= t && t < p.death).count()
}

/// Raw pairing by simplex position inside each dimension layer, zero-length
/// pairs included.
#[derive(Debug, Clone, Default)]
pub(crate) struct RawPairing {
    /// `(degree, birth index in layer degree, death index in layer degree+1)`
    pub finite: Vec<(usize, usize, usize)>,
    /// `(degree, birth index)`
    pub essential: Vec<(usize, usize)>,
    /// Simplices of the top reduced dimension that did not kill anything.
    pub top_positive: usize,
}

pub(crate) fn reduce(f: &FilteredComplex, max_degree: usize) -> Result<RawPairing> {
    if max_degree + 1 > f.max_dim() {
        return Err(SpredError::InvalidInput(format!(
            "degree {max_degree} needs simplices up to dimension {}, filtration stops at {}",
            max_degree + 1,
            f.max_dim()
        )));
    }
    let layers = f.layers();
    let binom = Binomial::new(f.vertex_count(), max_degree + 2);
    let mut out = RawPairing::default();
    // negative[i]: simplex i of the current row layer killed a lower class
    let mut negative = vec![false; layers[0].len()];

    for d in 1..=max_degree + 1 {
        let rows = &layers[d - 1];
        let cols = &layers[d];
        let faces = FaceIndex::build(rows, f.vertex_count(), &binom);
        let positives = negative.iter().filter(|&&n| !n).count();
        let must_die = if f.is_complete() { Some(positives - usize::from(d == 1)) } else { None };

        let mut pivot_owner: Vec<u32> = vec![u32::MAX; rows.len()];
        let mut reduced: Vec<Vec<u32>> = Vec::new();
        let mut next_negative = vec![false; cols.len()];
        let mut found = 0usize;
        let mut column: Vec<u32> = Vec::with_capacity(d + 1);
        let mut scratch: Vec<u32> = Vec::new();

        for j in 0..cols.len() {
            if must_die == Some(found) {
                break;
            }
            let simplex = cols.simplex(j);
            column.clear();
            for skip in 0..simplex.len() {
                let key = binom.index(simplex.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, &v)| v));
                let row = faces.get(key).ok_or_else(|| {
                    SpredError::InvalidInput(format!("face of simplex {simplex:?} missing from filtration"))
                })?;
                if !negative[row] {
                    column.push(row as u32);
                }
            }
            column.sort_unstable();
            while let Some(&pivot) = column.last() {
                let owner = pivot_owner[pivot as usize];
                if owner == u32::MAX {
                    break;
                }
                symmetric_difference(&column, &reduced[owner as usize], &mut scratch);
                std::mem::swap(&mut column, &mut scratch);
            }
            if let Some(&pivot) = column.last() {
                pivot_owner[pivot as usize] = reduced.len() as u32;
                reduced.push(column.clone());
                next_negative[j] = true;
                out.finite.push((d - 1, pivot as usize, j));
                found += 1;
            }
        }
        for (i, (&neg, &owner)) in negative.iter().zip(&pivot_owner).enumerate() {
            if !neg && owner == u32::MAX {
                out.essential.push((d - 1, i));
            }
        }
        if d == max_degree + 1 {
            out.top_positive = cols.len() - found;
        }
        negative = next_negative;
    }
    Ok(out)
}

fn symmetric_difference(a: &[u32], b: &[u32], out: &mut Vec<u32>) {
    out.clear();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
}

/// Diagrams of degrees `0..=max_degree`. The filtration must contain
/// simplices up to dimension `max_degree + 1`.
pub fn compute_persistence(f: &FilteredComplex, max_degree: usize) -> Result<Vec<PersistenceDiagram>> {
    let raw = reduce(f, max_degree)?;
    let layers = f.layers();
    let mut pairs: Vec<Vec<PersistencePair>> = vec![Vec::new(); max_degree + 1];
    for &(deg, b, d) in &raw.finite {
        pairs[deg].push(PersistencePair::new(layers[deg].values[b], layers[deg + 1].values[d]));
    }
    for &(deg, b) in &raw.essential {
        pairs[deg].push(PersistencePair::essential(layers[deg].values[b]));
    }
    pairs.into_iter().enumerate().map(|(deg, p)| PersistenceDiagram::new(deg, p)).collect()
}

/// Rips diagrams of degrees `0..=max_degree` straight from a distance matrix.
pub fn rips_diagrams(d: &DistanceMatrix, max_degree: usize) -> Vec<PersistenceDiagram> {
    let f = crate::filtration::rips_filtration(d, max_degree + 1);
    compute_persistence(&f, max_degree).expect("rips filtration has the required dimension")
}
