//! Vietoris–Rips filtrations in the radius scale and plain simplicial complexes.
//!
//! A simplex enters the Rips filtration at half of its largest vertex-pair
//! distance, so `R(t)` holds every vertex set of diameter at most `2t`.
//! Simplices are ordered by `(value, dim, lexicographic vertices)`.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Result, SpredError};
use crate::geometry::DistanceMatrix;

/// A face given by a strictly increasing list of vertex indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Simplex(Vec<usize>);

impl Simplex {
    /// Sorts and deduplicates the vertices.
    pub fn new(mut vertices: Vec<usize>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(SpredError::InvalidInput("a simplex needs at least one vertex".into()));
        }
        vertices.sort_unstable();
        vertices.dedup();
        Ok(Simplex(vertices))
    }

    pub fn vertex(v: usize) -> Self {
        Simplex(vec![v])
    }

    pub fn vertices(&self) -> &[usize] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len() - 1
    }

    /// Codimension-one faces, empty for a vertex.
    pub fn boundary_faces(&self) -> impl Iterator<Item = Simplex> + '_ {
        let n = if self.0.len() > 1 { self.0.len() } else { 0 };
        (0..n).map(move |skip| {
            Simplex(self.0.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, &v)| v).collect())
        })
    }

    /// Every nonempty face, the simplex itself included.
    pub fn all_faces(&self) -> Vec<Simplex> {
        let n = self.0.len();
        (1u64..(1u64 << n))
            .map(|mask| Simplex((0..n).filter(|i| mask >> i & 1 == 1).map(|i| self.0[i]).collect()))
            .collect()
    }
}

/// A simplex together with the parameter at which it enters a filtration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilteredSimplex {
    pub vertices: Vec<usize>,
    pub value: f64,
}

/// All simplices of one dimension, sorted by `(value, lexicographic vertices)`.
#[derive(Debug, Clone)]
pub(crate) struct Layer {
    pub stride: usize,
    pub verts: Vec<u32>,
    pub values: Vec<f64>,
}

impl Layer {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn simplex(&self, i: usize) -> &[u32] {
        &self.verts[i * self.stride..(i + 1) * self.stride]
    }
}

/// A finite filtration: simplices up to `max_dim` with entry values.
#[derive(Debug, Clone)]
pub struct FilteredComplex {
    layers: Vec<Layer>,
    vertex_count: usize,
    /// Every vertex subset of size `<= max_dim + 1` is present.
    complete: bool,
}

pub(crate) struct Binomial {
    table: Vec<Vec<u64>>,
}

impl Binomial {
    pub fn new(n: usize, k: usize) -> Self {
        let mut table = vec![vec![0u64; k + 2]; n + 2];
        for i in 0..=n + 1 {
            table[i][0] = 1;
            for j in 1..=(k + 1).min(i) {
                table[i][j] = table[i - 1][j - 1].saturating_add(table[i - 1][j]);
            }
        }
        Self { table }
    }

    #[inline]
    pub fn get(&self, n: usize, k: usize) -> u64 {
        if k > n {
            0
        } else {
            self.table[n][k]
        }
    }

    /// Combinatorial-number-system index of a strictly increasing vertex list.
    #[inline]
    pub fn index(&self, verts: impl Iterator<Item = u32>) -> u64 {
        verts.enumerate().map(|(i, v)| self.get(v as usize, i + 1)).sum()
    }
}

/// Position lookup for the simplices of one layer.
pub(crate) enum FaceIndex {
    Dense(Vec<u32>),
    Sparse(HashMap<u64, u32>),
}

impl FaceIndex {
    pub fn build(layer: &Layer, vertex_count: usize, binom: &Binomial) -> Self {
        let total = binom.get(vertex_count, layer.stride);
        if total <= (1 << 26) {
            let mut dense = vec![u32::MAX; total as usize];
            for i in 0..layer.len() {
                dense[binom.index(layer.simplex(i).iter().copied()) as usize] = i as u32;
            }
            FaceIndex::Dense(dense)
        } else {
            FaceIndex::Sparse(
                (0..layer.len())
                    .map(|i| (binom.index(layer.simplex(i).iter().copied()), i as u32))
                    .collect(),
            )
        }
    }

    #[inline]
    pub fn get(&self, key: u64) -> Option<usize> {
        match self {
            FaceIndex::Dense(v) => v.get(key as usize).copied().filter(|&p| p != u32::MAX).map(|p| p as usize),
            FaceIndex::Sparse(m) => m.get(&key).map(|&p| p as usize),
        }
    }
}

impl FilteredComplex {
    /// Builds a filtration from explicit simplices, checking face closure and
    /// that faces never enter after their cofaces.
    pub fn from_simplices(simplices: &[FilteredSimplex]) -> Result<Self> {
        let mut by_simplex: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
        for s in simplices {
            let simplex = Simplex::new(s.vertices.clone())?;
            if simplex.vertices().len() != s.vertices.len() {
                return Err(SpredError::InvalidInput(format!("repeated vertex in {:?}", s.vertices)));
            }
            if !(s.value >= 0.0) || !s.value.is_finite() {
                return Err(SpredError::InvalidInput(format!("bad filtration value {}", s.value)));
            }
            by_simplex.insert(simplex.0, s.value);
        }
        let mut vertex_count = 0;
        let mut max_dim = 0;
        for (verts, &value) in &by_simplex {
            vertex_count = vertex_count.max(verts.last().unwrap() + 1);
            max_dim = max_dim.max(verts.len() - 1);
            for face in Simplex(verts.clone()).boundary_faces() {
                match by_simplex.get(&face.0) {
                    Some(&fv) if fv <= value => {}
                    Some(_) => {
                        return Err(SpredError::InvalidInput(format!(
                            "face {:?} enters after simplex {verts:?}",
                            face.0
                        )))
                    }
                    None => {
                        return Err(SpredError::InvalidInput(format!(
                            "face {:?} of {verts:?} is missing",
                            face.0
                        )))
                    }
                }
            }
        }
        let mut layers: Vec<Layer> = (0..=max_dim)
            .map(|d| Layer { stride: d + 1, verts: Vec::new(), values: Vec::new() })
            .collect();
        let mut entries: Vec<(&Vec<usize>, f64)> = by_simplex.iter().map(|(k, &v)| (k, v)).collect();
        entries.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(b.0)));
        for (verts, value) in entries {
            let layer = &mut layers[verts.len() - 1];
            layer.verts.extend(verts.iter().map(|&v| v as u32));
            layer.values.push(value);
        }
        let binom = Binomial::new(vertex_count, max_dim + 1);
        let complete = layers.iter().all(|l| l.len() as u64 == binom.get(vertex_count, l.stride));
        Ok(Self { layers, vertex_count, complete })
    }

    pub(crate) fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub(crate) fn is_complete(&self) -> bool {
        self.complete
    }

    pub fn max_dim(&self) -> usize {
        self.layers.len().saturating_sub(1)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn len(&self) -> usize {
        self.layers.iter().map(Layer::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Number of simplices of dimension `d`.
    pub fn count_of_dim(&self, d: usize) -> usize {
        self.layers.get(d).map_or(0, Layer::len)
    }

    /// All simplices in filtration order `(value, dim, lexicographic)`.
    pub fn simplices(&self) -> Vec<FilteredSimplex> {
        let mut out: Vec<(usize, usize)> = self
            .layers
            .iter()
            .enumerate()
            .flat_map(|(d, l)| (0..l.len()).map(move |i| (d, i)))
            .collect();
        out.sort_by(|&(da, ia), &(db, ib)| {
            self.layers[da].values[ia].total_cmp(&self.layers[db].values[ib]).then(da.cmp(&db)).then(ia.cmp(&ib))
        });
        out.into_iter()
            .map(|(d, i)| FilteredSimplex {
                vertices: self.layers[d].simplex(i).iter().map(|&v| v as usize).collect(),
                value: self.layers[d].values[i],
            })
            .collect()
    }

    /// Serializes the filtration as a JSON list of `{vertices, value}`.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.simplices())?)
    }
}

/// The Vietoris–Rips filtration of `d` with every simplex of dimension
/// `<= max_dim`, each entering at half its diameter.
///
/// Homology in degree `l` needs `max_dim >= l + 1`.
pub fn rips_filtration(d: &DistanceMatrix, max_dim: usize) -> FilteredComplex {
    let m = d.size();
    let mut layers = Vec::with_capacity(max_dim + 1);
    layers.push(Layer { stride: 1, verts: (0..m as u32).collect(), values: vec![0.0; m] });
    for dim in 1..=max_dim {
        layers.push(rips_layer(d, dim));
    }
    FilteredComplex { layers, vertex_count: m, complete: true }
}

fn rips_layer(d: &DistanceMatrix, dim: usize) -> Layer {
    let m = d.size();
    let k = dim + 1;
    if k > m {
        return Layer { stride: k, verts: Vec::new(), values: Vec::new() };
    }
    let mut verts: Vec<u32> = Vec::new();
    let mut values: Vec<f64> = Vec::new();
    // odometer over increasing k-subsets, lexicographic
    let mut combo: Vec<usize> = (0..k).collect();
    // running maxima: prefix_max[i] = diameter of combo[..=i]
    let mut prefix_max = vec![0.0f64; k];
    let mut first_dirty = 1;
    loop {
        for i in first_dirty..k {
            let v = combo[i];
            let mut best = prefix_max[i - 1];
            for &u in &combo[..i] {
                best = best.max(d.get(u, v));
            }
            prefix_max[i] = best;
        }
        verts.extend(combo.iter().map(|&v| v as u32));
        values.push(prefix_max[k - 1] / 2.0);

        let mut i = k;
        loop {
            if i == 0 {
                let order = sort_permutation(&values);
                return permute_layer(k, &verts, &values, &order);
            }
            i -= 1;
            if combo[i] < m - k + i {
                break;
            }
        }
        combo[i] += 1;
        for j in (i + 1)..k {
            combo[j] = combo[j - 1] + 1;
        }
        first_dirty = i.max(1);
    }
}

fn sort_permutation(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    // stable: ties keep the lexicographic enumeration order
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    order
}

fn permute_layer(stride: usize, verts: &[u32], values: &[f64], order: &[usize]) -> Layer {
    let mut out_verts = Vec::with_capacity(verts.len());
    let mut out_values = Vec::with_capacity(values.len());
    for &i in order {
        out_verts.extend_from_slice(&verts[i * stride..(i + 1) * stride]);
        out_values.push(values[i]);
    }
    Layer { stride, verts: out_verts, values: out_values }
}

/// A finite simplicial complex closed under taking faces.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SimplicialComplex {
    simplices: BTreeSet<Simplex>,
}

impl SimplicialComplex {
    /// The smallest complex containing the given simplices.
    pub fn from_simplices<I: IntoIterator<Item = Simplex>>(generators: I) -> Self {
        let mut simplices = BTreeSet::new();
        for s in generators {
            if simplices.contains(&s) {
                continue;
            }
            simplices.extend(s.all_faces());
        }
        Self { simplices }
    }

    /// Convenience constructor from raw vertex lists.
    pub fn from_vertex_lists(lists: &[&[usize]]) -> Result<Self> {
        let simplices = lists.iter().map(|l| Simplex::new(l.to_vec())).collect::<Result<Vec<_>>>()?;
        Ok(Self::from_simplices(simplices))
    }

    pub fn contains(&self, s: &Simplex) -> bool {
        self.simplices.contains(s)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Simplex> {
        self.simplices.iter()
    }

    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    /// Largest simplex dimension, `None` for the empty complex.
    pub fn dim(&self) -> Option<usize> {
        self.simplices.iter().map(Simplex::dim).max()
    }

    pub fn vertices(&self) -> BTreeSet<usize> {
        self.of_dim(0).map(|s| s.0[0]).collect()
    }

    pub fn of_dim(&self, d: usize) -> impl Iterator<Item = &Simplex> {
        self.simplices.iter().filter(move |s| s.dim() == d)
    }

    pub fn is_subcomplex_of(&self, other: &SimplicialComplex) -> bool {
        self.simplices.is_subset(&other.simplices)
    }
}

/// Simplices of `f` entering at or before `t`.
pub fn complex_at(f: &FilteredComplex, t: f64) -> SimplicialComplex {
    let mut simplices = BTreeSet::new();
    for layer in &f.layers {
        for i in 0..layer.len() {
            if layer.values[i] <= t {
                simplices.insert(Simplex(layer.simplex(i).iter().map(|&v| v as usize).collect()));
            }
        }
    }
    SimplicialComplex { simplices }
}

/// Simplices of dimension at most `l`.
pub fn skeleton(k: &SimplicialComplex, l: usize) -> SimplicialComplex {
    SimplicialComplex { simplices: k.simplices.iter().filter(|s| s.dim() <= l).cloned().collect() }
}

/// Distinct filtration values in increasing order.
pub fn critical_values(f: &FilteredComplex) -> Vec<f64> {
    let mut values: Vec<f64> = f.layers.iter().flat_map(|l| l.values.iter().copied()).collect();
    values.sort_by(f64::total_cmp);
    values.dedup();
    values
}

/// Vertex map used by simplicial maps: source vertex → target vertex.
pub type VertexMap = BTreeMap<usize, usize>;

/// Identity map on the vertices of `k`.
pub fn identity_map(k: &SimplicialComplex) -> VertexMap {
    k.vertices().into_iter().map(|v| (v, v)).collect()
}

/// Image of `k` under a vertex map, with collapsed vertices deduplicated.
pub fn simplicial_image(k: &SimplicialComplex, vmap: &VertexMap) -> Result<SimplicialComplex> {
    let mut images = Vec::with_capacity(k.len());
    for s in k.iter() {
        let mut img = Vec::with_capacity(s.0.len());
        for v in &s.0 {
            img.push(*vmap.get(v).ok_or(SpredError::UnmappedVertex(*v))?);
        }
        images.push(Simplex::new(img)?);
    }
    Ok(SimplicialComplex::from_simplices(images))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{pairwise_distances, PointCloud};
    use proptest::prelude::*;

    fn dm(rows: &[&[f64]]) -> DistanceMatrix {
        pairwise_distances(&PointCloud::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap())
    }

    fn equilateral() -> DistanceMatrix {
        DistanceMatrix::from_square(&[vec![0.0, 1.0, 1.0], vec![1.0, 0.0, 1.0], vec![1.0, 1.0, 0.0]]).unwrap()
    }

    fn unit_square() -> DistanceMatrix {
        dm(&[&[0.0, 0.0], &[1.0, 0.0], &[1.0, 1.0], &[0.0, 1.0]])
    }

    fn cx(lists: &[&[usize]]) -> SimplicialComplex {
        SimplicialComplex::from_vertex_lists(lists).unwrap()
    }

    #[test]
    fn rips_of_equilateral_triangle() {
        let f = rips_filtration(&equilateral(), 2);
        let s = f.simplices();
        assert_eq!(s.len(), 7);
        assert!(s[..3].iter().all(|x| x.vertices.len() == 1 && x.value == 0.0));
        assert!(s[3..6].iter().all(|x| x.vertices.len() == 2 && x.value == 0.5));
        assert_eq!(s[6], FilteredSimplex { vertices: vec![0, 1, 2], value: 0.5 });
    }

    #[test]
    fn rips_of_single_point() {
        let f = rips_filtration(&dm(&[&[1.0, 2.0]]), 2);
        assert_eq!(f.simplices(), vec![FilteredSimplex { vertices: vec![0], value: 0.0 }]);
        assert_eq!(critical_values(&f), vec![0.0]);
    }

    #[test]
    fn rips_of_unit_square() {
        let f = rips_filtration(&unit_square(), 1);
        let edges: Vec<_> = f.simplices().into_iter().filter(|s| s.vertices.len() == 2).collect();
        assert_eq!(edges.len(), 6);
        assert_eq!(edges.iter().filter(|e| e.value == 0.5).count(), 4);
        let diag: Vec<_> = edges.iter().filter(|e| e.value != 0.5).collect();
        assert_eq!(diag.len(), 2);
        assert!(diag.iter().all(|e| e.value == 2f64.sqrt() / 2.0));
        assert_eq!(critical_values(&f), vec![0.0, 0.5, 2f64.sqrt() / 2.0]);
    }

    #[test]
    fn critical_values_of_triangle() {
        assert_eq!(critical_values(&rips_filtration(&equilateral(), 2)), vec![0.0, 0.5]);
    }

    #[test]
    fn complex_at_thresholds() {
        let f = rips_filtration(&equilateral(), 2);
        assert_eq!(complex_at(&f, 0.0), cx(&[&[0], &[1], &[2]]));
        assert_eq!(complex_at(&f, 0.49), cx(&[&[0], &[1], &[2]]));
        assert_eq!(complex_at(&f, 0.5), cx(&[&[0, 1, 2]]));
        let sq = rips_filtration(&unit_square(), 2);
        let full = complex_at(&sq, 2f64.sqrt() / 2.0);
        assert_eq!(full.len(), 4 + 6 + 4);
        assert_eq!(full, skeleton(&cx(&[&[0, 1, 2, 3]]), 2));
    }

    #[test]
    fn skeletons() {
        let tri = cx(&[&[0, 1, 2]]);
        assert_eq!(skeleton(&tri, 5), tri);
        assert_eq!(skeleton(&tri, 1), cx(&[&[0, 1], &[1, 2], &[0, 2]]));
        let tet = skeleton(&cx(&[&[0, 1, 2, 3]]), 2);
        assert_eq!(tet.of_dim(2).count(), 4);
        assert_eq!(tet.of_dim(1).count(), 6);
        assert_eq!(tet.of_dim(3).count(), 0);
        assert_eq!(tet.len(), 14);
    }

    #[test]
    fn images_under_vertex_maps() {
        let tri = cx(&[&[0, 1, 2]]);
        assert_eq!(simplicial_image(&tri, &identity_map(&tri)).unwrap(), tri);

        let edge = cx(&[&[0, 1]]);
        let collapse: VertexMap = [(0, 0), (1, 0)].into_iter().collect();
        assert_eq!(simplicial_image(&edge, &collapse).unwrap(), cx(&[&[0]]));

        let squash: VertexMap = [(0, 0), (1, 1), (2, 1)].into_iter().collect();
        assert_eq!(simplicial_image(&tri, &squash).unwrap(), cx(&[&[0, 1]]));

        let partial: VertexMap = [(0, 0)].into_iter().collect();
        assert!(matches!(simplicial_image(&edge, &partial), Err(SpredError::UnmappedVertex(1))));
    }

    #[test]
    fn explicit_filtrations_are_validated() {
        let ok = FilteredComplex::from_simplices(&[
            FilteredSimplex { vertices: vec![0], value: 0.0 },
            FilteredSimplex { vertices: vec![1], value: 0.0 },
            FilteredSimplex { vertices: vec![0, 1], value: 1.0 },
        ])
        .unwrap();
        assert_eq!(ok.len(), 3);
        assert!(FilteredComplex::from_simplices(&[FilteredSimplex { vertices: vec![0, 1], value: 1.0 }]).is_err());
        assert!(FilteredComplex::from_simplices(&[
            FilteredSimplex { vertices: vec![0], value: 2.0 },
            FilteredSimplex { vertices: vec![1], value: 0.0 },
            FilteredSimplex { vertices: vec![0, 1], value: 1.0 },
        ])
        .is_err());
    }

    #[test]
    fn json_dump_lists_vertices_and_values() {
        let json = rips_filtration(&equilateral(), 1).to_json().unwrap();
        let parsed: Vec<FilteredSimplex> = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed.len(), 6);
        assert_eq!(parsed[3], FilteredSimplex { vertices: vec![0, 1], value: 0.5 });
    }

    proptest! {
        #[test]
        fn rips_is_face_closed_and_exact(pts in prop::collection::vec(prop::collection::vec(-3.0f64..3.0, 3), 1..8)) {
            let d = pairwise_distances(&PointCloud::from_rows(&pts).unwrap());
            let f = rips_filtration(&d, 3);
            let all = f.simplices();
            let lookup: BTreeMap<Vec<usize>, f64> = all.iter().map(|s| (s.vertices.clone(), s.value)).collect();
            for s in &all {
                let mut diam = 0.0f64;
                for &a in &s.vertices {
                    for &b in &s.vertices {
                        diam = diam.max(d.get(a, b));
                    }
                }
                prop_assert_eq!(s.value, diam / 2.0);
                for face in Simplex::new(s.vertices.clone()).unwrap().boundary_faces() {
                    let fv = lookup.get(face.vertices());
                    prop_assert!(fv.is_some());
                    prop_assert!(*fv.unwrap() <= s.value);
                }
            }
            for w in all.windows(2) {
                let key = |x: &FilteredSimplex| (x.value, x.vertices.len());
                prop_assert!(key(&w[0]).partial_cmp(&key(&w[1])) != Some(std::cmp::Ordering::Greater));
            }
        }

        #[test]
        fn complexes_grow_monotonically(
            pts in prop::collection::vec(prop::collection::vec(-3.0f64..3.0, 2), 2..7),
            s in 0.0f64..3.0, dt in 0.0f64..3.0,
        ) {
            let f = rips_filtration(&pairwise_distances(&PointCloud::from_rows(&pts).unwrap()), 2);
            prop_assert!(complex_at(&f, s).is_subcomplex_of(&complex_at(&f, s + dt)));
        }

        #[test]
        fn image_of_skeleton_lies_in_skeleton_of_image(
            pts in prop::collection::vec(prop::collection::vec(-3.0f64..3.0, 2), 3..7),
            targets in prop::collection::vec(0usize..4, 7),
            l in 0usize..3, t in 0.0f64..3.0,
        ) {
            let f = rips_filtration(&pairwise_distances(&PointCloud::from_rows(&pts).unwrap()), 3);
            let k = complex_at(&f, t);
            let vmap: VertexMap = k.vertices().into_iter().map(|v| (v, targets[v])).collect();
            let lhs = simplicial_image(&skeleton(&k, l), &vmap).unwrap();
            let rhs = skeleton(&simplicial_image(&k, &vmap).unwrap(), l);
            prop_assert!(lhs.is_subcomplex_of(&rhs));
            prop_assert_eq!(simplicial_image(&skeleton(&k, l), &identity_map(&k)).unwrap(), skeleton(&k, l));
        }
    }
}
