//! Fundamental groups of simplicial complexes and of quotients `Q / im`.
//!
//! Coning off the image turns `Q / im` into `Q ∪ C(im)`, whose edge-path group
//! is easy to write down: the cone edges together with a forest grown out of
//! the image form a spanning tree, image edges bound cone triangles and are
//! therefore trivial, and the triangles of `Q` give the remaining relators.
//! Edges joining different image components survive as free generators,
//! which is the wedge of circles such a collapse creates.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::Serialize;

use super::group::{is_trivial, CheapReducer, GroupPresentation, Triviality, Word};
use crate::error::{Result, SpredError};
use crate::filtration::{simplicial_image, skeleton, Simplex, SimplicialComplex, VertexMap};

type Edge = (usize, usize);

fn edges_of(k: &SimplicialComplex) -> Vec<Edge> {
    k.of_dim(1).map(|s| (s.vertices()[0], s.vertices()[1])).collect()
}

fn adjacency(edges: &[Edge]) -> BTreeMap<usize, Vec<usize>> {
    let mut adj: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &(u, v) in edges {
        adj.entry(u).or_default().push(v);
        adj.entry(v).or_default().push(u);
    }
    adj
}

/// Path components of the 1-skeleton, each sorted, ordered by least vertex.
fn components(k: &SimplicialComplex) -> Vec<BTreeSet<usize>> {
    let adj = adjacency(&edges_of(k));
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for v in k.vertices() {
        if seen.contains(&v) {
            continue;
        }
        let mut comp = BTreeSet::new();
        let mut queue = VecDeque::from([v]);
        seen.insert(v);
        while let Some(u) = queue.pop_front() {
            comp.insert(u);
            for &w in adj.get(&u).into_iter().flatten() {
                if seen.insert(w) {
                    queue.push_back(w);
                }
            }
        }
        out.push(comp);
    }
    out
}

/// Breadth-first forest grown from `roots` inside `comp`; roots are already
/// connected to each other (through the basepoint or the cone point).
fn grow_tree(comp: &BTreeSet<usize>, roots: &BTreeSet<usize>, adj: &BTreeMap<usize, Vec<usize>>) -> BTreeSet<Edge> {
    let mut seen: BTreeSet<usize> = roots.clone();
    let mut queue: VecDeque<usize> = roots.iter().copied().collect();
    let mut tree = BTreeSet::new();
    while let Some(u) = queue.pop_front() {
        for &w in adj.get(&u).into_iter().flatten() {
            if comp.contains(&w) && seen.insert(w) {
                tree.insert((u.min(w), u.max(w)));
                queue.push_back(w);
            }
        }
    }
    tree
}

/// Generators are the listed edges; each triangle of `k` inside `comp`
/// contributes its boundary word `(a,b)(b,c)(a,c)⁻¹` with other edges erased.
fn presentation_from(k: &SimplicialComplex, comp: &BTreeSet<usize>, generators: &[Edge]) -> GroupPresentation {
    let index: BTreeMap<Edge, usize> = generators.iter().enumerate().map(|(i, &e)| (e, i)).collect();
    let letter = |e: Edge, sign: i32| index.get(&e).map(|&g| (g as i32 + 1) * sign);
    let relators: Vec<Word> = k
        .of_dim(2)
        .filter(|t| comp.contains(&t.vertices()[0]))
        .map(|t| {
            let [a, b, c] = [t.vertices()[0], t.vertices()[1], t.vertices()[2]];
            [letter((a, b), 1), letter((b, c), 1), letter((a, c), -1)].into_iter().flatten().collect()
        })
        .collect();
    GroupPresentation::new(generators.len(), relators)
}

/// Edge-path presentation of `π1(K, basepoint)` from a breadth-first
/// spanning tree of the basepoint's component. Only the 2-skeleton matters.
pub fn edge_path_presentation(k: &SimplicialComplex, basepoint: usize) -> Result<GroupPresentation> {
    if !k.contains(&Simplex::vertex(basepoint)) {
        return Err(SpredError::InvalidInput(format!("basepoint {basepoint} is not a vertex of the complex")));
    }
    let comp = components(k).into_iter().find(|c| c.contains(&basepoint)).expect("basepoint has a component");
    let edges = edges_of(k);
    let tree = grow_tree(&comp, &BTreeSet::from([basepoint]), &adjacency(&edges));
    let generators: Vec<Edge> = edges.into_iter().filter(|e| comp.contains(&e.0) && !tree.contains(e)).collect();
    Ok(presentation_from(k, &comp, &generators))
}

/// `π1` of one component of `Q / im`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComponentQuotient {
    /// Least vertex of the component.
    pub basepoint: usize,
    /// Number of path components of the image inside this component. Zero
    /// means the component is untouched and keeps its own group.
    pub image_components: usize,
    pub presentation: GroupPresentation,
}

/// Presentations of `π1` of `Q / f(K)` for every component of `Q`, where `f`
/// is the simplicial map given by `map`.
pub fn pi1_quotient_verdicts(k: &SimplicialComplex, q: &SimplicialComplex, map: &VertexMap) -> Result<Vec<ComponentQuotient>> {
    let q = skeleton(q, 2);
    let image = simplicial_image(&skeleton(k, 2), map)?;
    if let Some(s) = image.iter().find(|s| !q.contains(s)) {
        return Err(SpredError::InvalidInput(format!("image simplex {:?} is not in the target complex", s.vertices())));
    }
    let q_edges = edges_of(&q);
    let adj = adjacency(&q_edges);
    let image_vertices = image.vertices();
    let image_comps = components(&image);
    let mut out = Vec::new();
    for comp in components(&q) {
        let basepoint = *comp.first().expect("components are nonempty");
        let roots: BTreeSet<usize> = comp.intersection(&image_vertices).copied().collect();
        if roots.is_empty() {
            out.push(ComponentQuotient { basepoint, image_components: 0, presentation: edge_path_presentation(&q, basepoint)? });
            continue;
        }
        let tree = grow_tree(&comp, &roots, &adj);
        let generators: Vec<Edge> = q_edges
            .iter()
            .copied()
            .filter(|e| comp.contains(&e.0) && !tree.contains(e) && !image.contains(&Simplex::new(vec![e.0, e.1]).expect("edge")))
            .collect();
        let image_components = image_comps.iter().filter(|c| c.iter().any(|v| comp.contains(v))).count();
        out.push(ComponentQuotient { basepoint, image_components, presentation: presentation_from(&q, &comp, &generators) });
    }
    Ok(out)
}

/// Worst verdict over components: any nontrivial group wins, then unknown.
pub fn combine(verdicts: impl IntoIterator<Item = Triviality>) -> Triviality {
    let mut out = Triviality::Trivial;
    for v in verdicts {
        match v {
            Triviality::Nontrivial => return Triviality::Nontrivial,
            Triviality::Unknown => out = Triviality::Unknown,
            Triviality::Trivial => {}
        }
    }
    out
}

/// Symmetric adjacency bit matrix on `m` vertices.
#[derive(Clone)]
pub(crate) struct BitGraph {
    words: usize,
    bits: Vec<u64>,
}

impl BitGraph {
    pub fn new(m: usize) -> Self {
        let words = m.div_ceil(64).max(1);
        Self { words, bits: vec![0; words * m] }
    }

    pub fn add(&mut self, u: usize, v: usize) {
        self.bits[u * self.words + v / 64] |= 1 << (v % 64);
        self.bits[v * self.words + u / 64] |= 1 << (u % 64);
    }

    pub fn has(&self, u: usize, v: usize) -> bool {
        self.bits[u * self.words + v / 64] >> (v % 64) & 1 == 1
    }

    fn row(&self, u: usize) -> &[u64] {
        &self.bits[u * self.words..(u + 1) * self.words]
    }
}

/// Verdict for `Q / K` when both are flag complexes on the vertex set
/// `0..m`, `K ⊆ Q` and the map is the identity. `extra` lists the edges of
/// `Q` that are not in `K`; `q` holds all edges of `Q`.
pub(crate) fn flag_quotient_verdict(m: usize, q: &BitGraph, extra: &[Edge], budget: usize) -> Triviality {
    if extra.is_empty() {
        return Triviality::Trivial;
    }
    let mut index = vec![u32::MAX; m * m];
    for (g, &(u, v)) in extra.iter().enumerate() {
        index[u * m + v] = g as u32;
    }
    let gen_of = |a: usize, b: usize| {
        let g = index[a * m + b];
        (g != u32::MAX).then_some(g as usize)
    };
    let mut reducer = CheapReducer::new(extra.len());
    let mut word = Vec::with_capacity(3);
    for (g, &(u, v)) in extra.iter().enumerate() {
        for (wi, (&x, &y)) in q.row(u).iter().zip(q.row(v)).enumerate() {
            let mut common = x & y;
            while common != 0 {
                let w = wi * 64 + common.trailing_zeros() as usize;
                common &= common - 1;
                let mut t = [u, v, w];
                t.sort_unstable();
                let [a, b, c] = t;
                let sides = [gen_of(a, b), gen_of(b, c), gen_of(a, c)];
                // each triangle is emitted once, from its first extra edge
                if sides.iter().flatten().min() != Some(&g) {
                    continue;
                }
                word.clear();
                word.extend(sides[0].map(|s| s as i32 + 1));
                word.extend(sides[1].map(|s| s as i32 + 1));
                word.extend(sides[2].map(|s| -(s as i32 + 1)));
                reducer.push(&word);
            }
        }
    }
    let (presentation, originals) = reducer.finish();
    if presentation.generators() == 0 {
        return Triviality::Trivial;
    }
    // split the survivors by the component of Q their edge lies in
    let mut parent: Vec<usize> = (0..m).collect();
    fn root(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for u in 0..m {
        for v in u + 1..m {
            if q.has(u, v) {
                let (a, b) = (root(&mut parent, u), root(&mut parent, v));
                parent[a] = b;
            }
        }
    }
    let comp_of_gen: Vec<usize> = originals.iter().map(|&g| root(&mut parent, extra[g].0)).collect();
    let mut by_comp: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (g, &c) in comp_of_gen.iter().enumerate() {
        by_comp.entry(c).or_default().push(g);
    }
    let mut rels_by_comp: BTreeMap<usize, Vec<Word>> = BTreeMap::new();
    for r in presentation.relators() {
        let c = comp_of_gen[r[0].unsigned_abs() as usize - 1];
        rels_by_comp.entry(c).or_default().push(r.clone());
    }
    combine(by_comp.into_iter().map(|(c, gens)| {
        let local: BTreeMap<usize, usize> = gens.iter().enumerate().map(|(i, &g)| (g, i)).collect();
        let rels = rels_by_comp
            .remove(&c)
            .unwrap_or_default()
            .into_iter()
            .map(|w| w.into_iter().map(|l| (local[&(l.unsigned_abs() as usize - 1)] as i32 + 1) * l.signum()).collect())
            .collect();
        is_trivial(&GroupPresentation::new(gens.len(), rels), budget)
    }))
}
