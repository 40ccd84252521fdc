mod common;

use common::*;
use proptest::prelude::*;
use spred::equivalence::{
    canonical_embedding, classify_intervals, combine, edge_path_presentation, is_trivial, mu_quasi_iso,
    mu_quasi_iso_barcode, pi1_quotient_verdicts, similarity, GroupPresentation, IntervalClass, Triviality,
    DEFAULT_BUDGET,
};
use spred::filtration::{identity_map, SimplicialComplex, Simplex, VertexMap};
use spred::geometry::{diameter, project, ProjectionMatrix};
use spred::persistence::Barcode;
use spred::SpredError;

fn complex(lists: &[&[usize]]) -> SimplicialComplex {
    SimplicialComplex::from_vertex_lists(lists).unwrap()
}

fn to_complex(simplices: Vec<Vec<usize>>) -> SimplicialComplex {
    SimplicialComplex::from_simplices(simplices.into_iter().map(|s| Simplex::new(s).unwrap()))
}

fn quotient(k: &SimplicialComplex, q: &SimplicialComplex, map: &VertexMap) -> Triviality {
    combine(pi1_quotient_verdicts(k, q, map).unwrap().iter().map(|c| is_trivial(&c.presentation, DEFAULT_BUDGET)))
}

fn group(generators: usize, relators: &[&[i32]]) -> GroupPresentation {
    GroupPresentation::new(generators, relators.iter().map(|r| r.to_vec()).collect())
}

#[test]
fn identity_projection_preserves_everything() {
    let mut r = rng(3);
    let x = random_cloud(&mut r, 6, 3);
    let rep = similarity(&x, &ProjectionMatrix::identity(3).unwrap(), None, 1, DEFAULT_BUDGET).unwrap();
    assert_eq!(rep.eta, 0.0);
    assert_eq!((rep.mu_quasi_iso, rep.mu_equiv_lower, rep.mu_equiv_upper), (1.0, 1.0, 1.0));
}

#[test]
fn three_points_on_a_line() {
    let x = cloud(&[&[0.0, 0.0], &[4.0, 0.0], &[0.0, 3.0]]);
    let p = ProjectionMatrix::coordinate_frame(2, 1).unwrap();
    let rep = similarity(&x, &p, None, 0, DEFAULT_BUDGET).unwrap();
    assert_eq!(rep.grid, vec![0.0, 1.5, 2.0, 2.5]);
    assert_eq!(rep.mu_quasi_iso, 0.4);
    assert_eq!((rep.mu_equiv_lower, rep.mu_equiv_upper), (0.4, 0.4));
    let dx = distance_rows(&x);
    let dy = distance_rows(&project(&x, &p).unwrap());
    for iv in &rep.intervals {
        let mid = (iv.start + iv.end) / 2.0;
        assert_eq!(iv.betti_x, rips_betti(&dx, mid, 0));
        assert_eq!(iv.betti_y, rips_betti(&dy, mid, 0));
    }
}

#[test]
fn square_helix_projection_has_a_nontrivial_quotient() {
    let x = square_helix();
    let p = ProjectionMatrix::coordinate_frame(3, 2).unwrap();
    let rep = similarity(&x, &p, None, 0, DEFAULT_BUDGET).unwrap();
    // the loop closes in the plane at 0.5 but not in space until much later
    let first = rep.intervals.iter().find(|i| i.class == IntervalClass::T1).expect("a T1 interval");
    assert!(first.start >= 0.5 - 1e-12 && first.end <= 0.5f64.sqrt() + 1e-12, "{first:?}");
    assert!(rep.intervals.iter().all(|i| i.class != IntervalClass::T1 || i.start >= 0.5 - 1e-12));
    assert!(rep.mu_equiv_lower <= rep.mu_equiv_upper);
    assert!(rep.mu_equiv_upper < rep.mu_quasi_iso);
}

#[test]
fn ill_defined_eta_is_reported() {
    let x = cloud(&[&[0.0, 0.0], &[4.0, 0.0], &[0.0, 3.0]]);
    let p = ProjectionMatrix::coordinate_frame(2, 1).unwrap();
    assert!(matches!(canonical_embedding(&x, &p, Some(1.0), 0), Err(SpredError::IllDefinedEmbedding { .. })));
    assert!(canonical_embedding(&x, &p, Some(f64::NAN), 0).is_err());
    assert!(canonical_embedding(&x, &p, Some(0.0), 0).is_ok());
}

#[test]
fn embedding_grid_covers_half_the_diameter() {
    let x = square_helix();
    let p = ProjectionMatrix::coordinate_frame(3, 2).unwrap();
    let e = canonical_embedding(&x, &p, None, 1).unwrap();
    assert_eq!(e.grid[0], 0.0);
    assert_eq!(*e.grid.last().unwrap(), diameter(&x) / 2.0);
    assert!(e.grid.windows(2).all(|w| w[0] < w[1]));
    assert!(e.eta > 0.0);
}

#[test]
fn hollow_and_filled_triangles() {
    let hollow = complex(&[&[0, 1], &[1, 2], &[0, 2]]);
    let filled = complex(&[&[0, 1, 2]]);
    assert_eq!(is_trivial(&edge_path_presentation(&hollow, 0).unwrap(), DEFAULT_BUDGET), Triviality::Nontrivial);
    assert_eq!(is_trivial(&edge_path_presentation(&filled, 0).unwrap(), DEFAULT_BUDGET), Triviality::Trivial);
    assert!(edge_path_presentation(&hollow, 7).is_err());
}

#[test]
fn quotients_of_small_complexes() {
    let square = complex(&[&[0, 1], &[1, 2], &[2, 3], &[0, 3]]);
    let path = complex(&[&[0, 1], &[1, 2]]);
    let filled = complex(&[&[0, 1, 2]]);
    let hollow = complex(&[&[0, 1], &[1, 2], &[0, 2]]);
    let points = |vs: &[usize]| to_complex(vs.iter().map(|&v| vec![v]).collect());

    // collapsing an arc of a circle leaves a circle
    let arc = complex(&[&[0, 1], &[1, 2]]);
    assert_eq!(quotient(&arc, &square, &identity_map(&arc)), Triviality::Nontrivial);
    // gluing the ends of a path closes a loop
    let ends = points(&[0, 2]);
    let v = pi1_quotient_verdicts(&ends, &path, &identity_map(&ends)).unwrap();
    assert_eq!(v.len(), 1);
    assert_eq!(v[0].image_components, 2);
    assert_eq!(quotient(&ends, &path, &identity_map(&ends)), Triviality::Nontrivial);
    // a disk with its three corners identified is a wedge of two circles
    let corners = points(&[0, 1, 2]);
    assert_eq!(quotient(&corners, &filled, &identity_map(&corners)), Triviality::Nontrivial);
    // a disk modulo its boundary is a sphere
    assert_eq!(quotient(&hollow, &filled, &identity_map(&hollow)), Triviality::Trivial);
    // a circle modulo itself is a point
    assert_eq!(quotient(&square, &square, &identity_map(&square)), Triviality::Trivial);
    // a component the image misses keeps its own loop
    let two = complex(&[&[0, 1], &[1, 2], &[0, 2], &[3, 4], &[4, 5], &[3, 5]]);
    let first = complex(&[&[0, 1], &[1, 2], &[0, 2]]);
    let v = pi1_quotient_verdicts(&first, &two, &identity_map(&first)).unwrap();
    assert_eq!(v.iter().map(|c| c.image_components).collect::<Vec<_>>(), vec![1, 0]);
    assert_eq!(quotient(&first, &two, &identity_map(&first)), Triviality::Nontrivial);
    // images must land in the target
    let outside: VertexMap = [(0, 0), (1, 2)].into_iter().collect();
    assert!(pi1_quotient_verdicts(&complex(&[&[0, 1]]), &square, &outside).is_err());
}

#[test]
fn word_problem_examples() {
    assert_eq!(is_trivial(&group(2, &[&[1, 2, -1, -2]]), DEFAULT_BUDGET), Triviality::Nontrivial);
    assert_eq!(is_trivial(&group(1, &[&[1, 1]]), DEFAULT_BUDGET), Triviality::Nontrivial);
    assert_eq!(is_trivial(&group(2, &[&[1], &[2]]), DEFAULT_BUDGET), Triviality::Trivial);
    assert_eq!(is_trivial(&group(2, &[&[1, 2], &[1, 2, 2]]), DEFAULT_BUDGET), Triviality::Trivial);
    assert_eq!(is_trivial(&group(0, &[]), DEFAULT_BUDGET), Triviality::Trivial);
    assert_eq!(is_trivial(&group(3, &[]), DEFAULT_BUDGET), Triviality::Nontrivial);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// Classification against complexes and homology built from scratch at
    /// the midpoint of each interval.
    #[test]
    fn classification_matches_brute_force(seed in 0u64..1_000_000, m in 3usize..7, l in 0usize..2) {
        let mut r = rng(seed);
        let x = random_cloud(&mut r, m, 3);
        let p = ProjectionMatrix::coordinate_frame(3, 2).unwrap();
        let emb = canonical_embedding(&x, &p, None, l).unwrap();
        let rep = classify_intervals(&emb, DEFAULT_BUDGET);
        let dx = distance_rows(&x);
        let dy = distance_rows(&project(&x, &p).unwrap());
        let eta = rep.eta;
        let end = diameter(&x) / 2.0;

        prop_assert_eq!(rep.intervals.len(), rep.grid.len() - 1);
        let total: f64 = rep.intervals.iter().map(|i| i.end - i.start).sum();
        prop_assert!((total - end).abs() <= 1e-12 * end.max(1.0));

        for iv in &rep.intervals {
            let mid = (iv.start + iv.end) / 2.0;
            let in_k = |u: usize, v: usize| dx[u][v] / 2.0 - eta <= mid;
            let in_q = |u: usize, v: usize| in_k(u, v) || dy[u][v] / 2.0 <= mid;
            let bx = betti(&flag_simplices(m, l + 1, in_k), l);
            let by = rips_betti(&dy, mid, l);
            prop_assert_eq!(&iv.betti_x, &bx);
            prop_assert_eq!(&iv.betti_y, &by);
            prop_assert_eq!(iv.class == IntervalClass::T0, bx != by);

            let k = flag_simplices(m, l + 2, in_k);
            let q = flag_simplices(m, l + 2, in_q);
            if relative_betti(&q, &k, l + 1).iter().all(|&b| b == 0) {
                prop_assert!(iv.class != IntervalClass::T0);
            }
            if iv.class != IntervalClass::T0 {
                let k2 = to_complex(flag_simplices(m, 2, in_k));
                let q2 = to_complex(flag_simplices(m, 2, in_q));
                let expected = match quotient(&k2, &q2, &identity_map(&k2)) {
                    Triviality::Trivial => IntervalClass::T2,
                    Triviality::Nontrivial => IntervalClass::T1,
                    Triviality::Unknown => IntervalClass::Unknown,
                };
                prop_assert_eq!(iv.class, expected);
            }
        }

        let brute = measure_where(&rep.grid, |a| {
            let i = rep.grid.partition_point(|&g| g <= a) - 1;
            let mid = (rep.grid[i] + rep.grid[i + 1]) / 2.0;
            let in_k = |u: usize, v: usize| dx[u][v] / 2.0 - eta <= mid;
            betti(&flag_simplices(m, l + 1, in_k), l) == rips_betti(&dy, mid, l)
        });
        prop_assert!((rep.mu_quasi_iso - brute).abs() <= 1e-12);
        prop_assert!(0.0 <= rep.mu_equiv_lower && rep.mu_equiv_lower <= rep.mu_equiv_upper);
        prop_assert!(rep.mu_equiv_upper <= rep.mu_quasi_iso && rep.mu_quasi_iso <= 1.0);

        let diam = diameter(&x);
        let from_diagrams = mu_quasi_iso(&emb.diagrams_x, &emb.diagrams_y, eta, diam).unwrap().mu;
        let bx: Vec<Barcode> = emb.diagrams_x.iter().map(Barcode::from).collect();
        let by: Vec<Barcode> = emb.diagrams_y.iter().map(Barcode::from).collect();
        let from_barcodes = mu_quasi_iso_barcode(&bx, &by, eta, diam).unwrap();
        prop_assert_eq!(from_diagrams, from_barcodes);
        prop_assert!((from_diagrams - rep.mu_quasi_iso).abs() <= 1e-12);
    }
}
