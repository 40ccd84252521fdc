mod common;

use std::collections::BTreeSet;

use common::{distance_rows, random_cloud, rips_simplices, rng};
use proptest::prelude::*;
use spred::filtration::{
    complex_at, critical_values, identity_map, rips_filtration, simplicial_image, skeleton, FilteredComplex,
    FilteredSimplex, Simplex, SimplicialComplex, VertexMap,
};
use spred::geometry::{pairwise_distances, DistanceMatrix};

fn equilateral() -> DistanceMatrix {
    DistanceMatrix::from_square(&[vec![0.0, 1.0, 1.0], vec![1.0, 0.0, 1.0], vec![1.0, 1.0, 0.0]]).unwrap()
}

fn unit_square() -> DistanceMatrix {
    pairwise_distances(&common::cloud(&[&[0.0, 0.0], &[1.0, 0.0], &[1.0, 1.0], &[0.0, 1.0]]))
}

fn by_dim(f: &FilteredComplex, d: usize) -> Vec<FilteredSimplex> {
    f.simplices().into_iter().filter(|s| s.vertices.len() == d + 1).collect()
}

fn lists(k: &SimplicialComplex) -> Vec<Vec<usize>> {
    k.iter().map(|s| s.vertices().to_vec()).collect()
}

#[test]
fn equilateral_triangle_values() {
    let f = rips_filtration(&equilateral(), 2);
    assert!(by_dim(&f, 0).iter().all(|s| s.value == 0.0));
    assert_eq!(by_dim(&f, 1).len(), 3);
    assert!(by_dim(&f, 1).iter().all(|s| s.value == 0.5));
    assert_eq!(by_dim(&f, 2), vec![FilteredSimplex { vertices: vec![0, 1, 2], value: 0.5 }]);
    assert_eq!(critical_values(&f), vec![0.0, 0.5]);
}

#[test]
fn single_point_filtration() {
    let f = rips_filtration(&DistanceMatrix::from_square(&[vec![0.0]]).unwrap(), 2);
    assert_eq!(f.simplices(), vec![FilteredSimplex { vertices: vec![0], value: 0.0 }]);
    assert_eq!(critical_values(&f), vec![0.0]);
}

#[test]
fn unit_square_edges() {
    let f = rips_filtration(&unit_square(), 1);
    let edges = by_dim(&f, 1);
    assert_eq!(edges.iter().filter(|s| s.value == 0.5).count(), 4);
    assert_eq!(edges.iter().filter(|s| s.value == 2f64.sqrt() / 2.0).count(), 2);
    assert_eq!(critical_values(&f), vec![0.0, 0.5, 2f64.sqrt() / 2.0]);
}

#[test]
fn complexes_at_thresholds() {
    let f = rips_filtration(&equilateral(), 2);
    assert_eq!(complex_at(&f, 0.0).len(), 3);
    assert_eq!(complex_at(&f, 0.49).len(), 3);
    assert_eq!(complex_at(&f, 0.5).len(), 7);
    let sq = rips_filtration(&unit_square(), 2);
    assert_eq!(complex_at(&sq, 10.0).len(), 4 + 6 + 4);
}

#[test]
fn skeleton_examples() {
    let filled = SimplicialComplex::from_vertex_lists(&[&[0, 1, 2]]).unwrap();
    assert_eq!(skeleton(&filled, 2), filled);
    assert_eq!(skeleton(&filled, 1), SimplicialComplex::from_vertex_lists(&[&[0, 1], &[1, 2], &[0, 2]]).unwrap());
    let tet = SimplicialComplex::from_vertex_lists(&[&[0, 1, 2, 3]]).unwrap();
    let s = skeleton(&tet, 2);
    assert_eq!((s.of_dim(0).count(), s.of_dim(1).count(), s.of_dim(2).count(), s.of_dim(3).count()), (4, 6, 4, 0));
}

#[test]
fn image_examples() {
    let k = SimplicialComplex::from_vertex_lists(&[&[0, 1, 2]]).unwrap();
    assert_eq!(simplicial_image(&k, &identity_map(&k)).unwrap(), k);
    let edge = SimplicialComplex::from_vertex_lists(&[&[0, 1]]).unwrap();
    let collapse: VertexMap = [(0, 0), (1, 0)].into_iter().collect();
    assert_eq!(simplicial_image(&edge, &collapse).unwrap(), SimplicialComplex::from_simplices([Simplex::vertex(0)]));
    let fold: VertexMap = [(0, 0), (1, 1), (2, 1)].into_iter().collect();
    assert_eq!(simplicial_image(&k, &fold).unwrap(), SimplicialComplex::from_vertex_lists(&[&[0, 1]]).unwrap());
    let partial: VertexMap = [(0, 0)].into_iter().collect();
    assert!(simplicial_image(&k, &partial).is_err());
}

#[test]
fn from_simplices_checks_faces() {
    let ok = [
        FilteredSimplex { vertices: vec![0], value: 0.0 },
        FilteredSimplex { vertices: vec![1], value: 0.0 },
        FilteredSimplex { vertices: vec![0, 1], value: 1.0 },
    ];
    assert_eq!(FilteredComplex::from_simplices(&ok).unwrap().len(), 3);
    assert!(FilteredComplex::from_simplices(&ok[2..]).is_err());
    let late_face = [ok[0].clone(), FilteredSimplex { vertices: vec![1], value: 2.0 }, ok[2].clone()];
    assert!(FilteredComplex::from_simplices(&late_face).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn matches_brute_force_enumeration(seed in any::<u64>(), m in 1usize..8, max_dim in 0usize..4) {
        let x = random_cloud(&mut rng(seed), m, 3);
        let d = distance_rows(&x);
        let f = rips_filtration(&pairwise_distances(&x), max_dim);
        for t in critical_values(&f) {
            prop_assert_eq!(lists(&complex_at(&f, t)), rips_simplices(&d, t, max_dim));
        }
        // value = half the largest vertex-pair distance, exactly
        let dm = pairwise_distances(&x);
        for s in f.simplices() {
            let v = s.vertices.iter().flat_map(|&a| s.vertices.iter().map(move |&b| (a, b)))
                .map(|(a, b)| dm.get(a, b)).fold(0.0, f64::max) / 2.0;
            prop_assert_eq!(s.value, v);
        }
    }

    #[test]
    fn faces_enter_first_and_complexes_grow(seed in any::<u64>(), m in 1usize..8) {
        let x = random_cloud(&mut rng(seed), m, 2);
        let f = rips_filtration(&pairwise_distances(&x), 2);
        let all = f.simplices();
        let value: std::collections::HashMap<Vec<usize>, f64> = all.iter().map(|s| (s.vertices.clone(), s.value)).collect();
        for s in &all {
            for face in Simplex::new(s.vertices.clone()).unwrap().boundary_faces() {
                prop_assert!(value[face.vertices()] <= s.value);
            }
        }
        let cv = critical_values(&f);
        for w in cv.windows(2) {
            prop_assert!(complex_at(&f, w[0]).is_subcomplex_of(&complex_at(&f, w[1])));
        }
    }

    #[test]
    fn image_of_skeleton_lies_in_skeleton_of_image(seed in any::<u64>(), m in 2usize..7, l in 0usize..3) {
        use rand::Rng;
        let mut r = rng(seed);
        let x = random_cloud(&mut r, m, 2);
        let k = complex_at(&rips_filtration(&pairwise_distances(&x), 3), 0.8);
        let vmap: VertexMap = (0..m).map(|v| (v, r.random_range(0..m))).collect();
        let a = simplicial_image(&skeleton(&k, l), &vmap).unwrap();
        let b = skeleton(&simplicial_image(&k, &vmap).unwrap(), l);
        prop_assert!(a.is_subcomplex_of(&b));
        let id = identity_map(&k);
        prop_assert_eq!(simplicial_image(&skeleton(&k, l), &id).unwrap(), skeleton(&simplicial_image(&k, &id).unwrap(), l));
        let verts: BTreeSet<usize> = a.vertices();
        prop_assert!(verts.iter().all(|v| *v < m));
    }
}
