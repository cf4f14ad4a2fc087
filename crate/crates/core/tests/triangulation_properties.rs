use hyperideal::triangulation::{
    edge_between, search_gluings, FacePairing, GluingSpec, Perm, Triangulation, TriangulationError,
};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A random closed orientable gluing: shuffled face matching, odd
/// permutations.
fn random_gluing(tet_count: usize, seed: u64) -> GluingSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut faces: Vec<usize> = (0..4 * tet_count).collect();
    faces.shuffle(&mut rng);
    let odd: Vec<Perm> = Perm::all().into_iter().filter(|p| !p.is_even()).collect();
    let mut pairings = Vec::new();
    for pair in faces.chunks(2) {
        let (a, b) = (pair[0], pair[1]);
        let choices: Vec<&Perm> = odd.iter().filter(|p| p.apply(a % 4) == b % 4).collect();
        let perm = *choices[rng.random_range(0..choices.len())];
        pairings.push(FacePairing { tet: a / 4, face: a % 4, target_tet: b / 4, target_face: b % 4, perm });
        pairings.push(FacePairing {
            tet: b / 4,
            face: b % 4,
            target_tet: a / 4,
            target_face: a % 4,
            perm: perm.inverse(),
        });
    }
    GluingSpec::new(tet_count, pairings).expect("construction is valid")
}

fn find(parent: &mut Vec<usize>, i: usize) -> usize {
    let mut r = i;
    while parent[r] != r {
        r = parent[r];
    }
    parent[i] = r;
    r
}

/// Sorted valences of edge classes, by a separate union-find over corners.
fn independent_valences(spec: &GluingSpec) -> Vec<usize> {
    let n = 6 * spec.tet_count();
    let mut parent: Vec<usize> = (0..n).collect();
    for p in spec.pairings() {
        let verts: Vec<usize> = (0..4).filter(|&v| v != p.face).collect();
        for i in 0..3 {
            for j in i + 1..3 {
                let (u, v) = (verts[i], verts[j]);
                let a = 6 * p.tet + edge_between(u, v);
                let b = 6 * p.target_tet + edge_between(p.perm.apply(u), p.perm.apply(v));
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                parent[ra] = rb;
            }
        }
    }
    let mut counts = std::collections::BTreeMap::new();
    for i in 0..n {
        *counts.entry(find(&mut parent, i)).or_insert(0usize) += 1;
    }
    let mut v: Vec<usize> = counts.into_values().collect();
    v.sort();
    v
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, ..ProptestConfig::default() })]

    #[test]
    fn edge_classes_match_independent_orbits(tet_count in 1usize..=4, seed in any::<u64>()) {
        let spec = random_gluing(tet_count, seed);
        match Triangulation::analyze(spec.clone()) {
            Ok(tri) => {
                let mut ours: Vec<usize> = tri.edge_classes().iter().map(|c| c.valence()).collect();
                ours.sort();
                prop_assert_eq!(ours, independent_valences(&spec));
            }
            Err(TriangulationError::ReversedEdge { .. }) => {}
            Err(e) => prop_assert!(false, "unexpected error {e}"),
        }
    }

    #[test]
    fn link_euler_characteristics_sum_to_twice_manifold(tet_count in 1usize..=4, seed in any::<u64>()) {
        let spec = random_gluing(tet_count, seed);
        let Ok(tri) = Triangulation::analyze(spec) else { return Ok(()) };
        // Off the boundary the cells are T tetrahedra, 2T faces and E edges, so
        // chi(M) = chi(dM) + T - E; with chi(dM) = 2 chi(M) this gives chi(dM) = 2(E - T).
        let expected = 2 * (tri.edge_count() as i64 - tet_count as i64);
        prop_assert_eq!(tri.boundary_euler_characteristics().iter().sum::<i64>(), expected);
        let valence_total: usize = tri.edge_classes().iter().map(|c| c.valence()).sum();
        prop_assert_eq!(valence_total, 6 * tet_count);
    }

    #[test]
    fn rebuild_and_file_round_trip(tet_count in 1usize..=4, seed in any::<u64>()) {
        let spec = random_gluing(tet_count, seed);
        let Ok(tri) = Triangulation::analyze(spec.clone()) else { return Ok(()) };
        let again = Triangulation::analyze(tri.spec().clone()).unwrap();
        prop_assert_eq!(&again, &tri);
        let file = spec.to_file();
        let json = serde_json::to_string(&file).unwrap();
        let parsed: hyperideal::triangulation::GluingFile = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(GluingSpec::from_file(&parsed).unwrap(), spec);
    }
}

#[test]
fn hyperbolic_two_tet_gluings_have_one_edge() {
    // With T = 2, sum of link chi = 2(E - 2) < 0 forces E = 1.
    for spec in search_gluings(2, |t| t.boundary_euler_characteristics().iter().all(|&c| c < 0)) {
        let tri = Triangulation::build(spec).unwrap();
        assert_eq!(tri.edge_count(), 1);
        assert_eq!(tri.edge_classes()[0].valence(), 12);
    }
}

#[test]
fn build_rejects_non_hyperbolic_boundary() {
    let specs = search_gluings(2, |t| t.boundary_euler_characteristics().iter().any(|&c| c >= 0));
    assert!(!specs.is_empty());
    for spec in specs {
        let err = Triangulation::build(spec).unwrap_err();
        assert!(err.is_boundary_hypothesis(), "{err}");
    }
}
