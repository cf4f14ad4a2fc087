use std::f64::consts::PI;

use hyperideal::tetgeom::minkowski::minkowski_oracle;
use hyperideal::tetgeom::{
    admissibility_margin, angles_from_lengths, arcs_from_lengths, jacobian_a_wrt_x, jacobian_x_wrt_a,
    lengths_from_angles, schlafli_potential_of_angles, schlafli_segment, Six, VERTEX_EDGES,
};
use hyperideal::triangulation::EDGE_VERTICES;
use nalgebra::Matrix6;
use proptest::prelude::*;

fn log_lengths() -> impl Strategy<Value = Six> {
    prop::array::uniform6((-4.0f64..1.5).prop_map(f64::exp))
}

/// Angles strictly inside the hyperideal polytope with slack at least 0.05.
fn interior_angles() -> impl Strategy<Value = Six> {
    prop::array::uniform6(0.05f64..2.0).prop_filter("vertex sums below π - 0.05", |a| {
        VERTEX_EDGES.iter().all(|edges| edges.iter().map(|&e| a[e]).sum::<f64>() < PI - 0.05)
    })
}

fn other_two(a: usize, b: usize) -> (usize, usize) {
    let v: Vec<usize> = (0..4).filter(|&i| i != a && i != b).collect();
    (v[0], v[1])
}

/// Dihedral angle of edge `vw` read off the truncation triangle at `v`.
fn angle_at_endpoint(x: &Six, v: usize, w: usize) -> f64 {
    let arcs = arcs_from_lengths(x).unwrap();
    let (f1, f2) = other_two(v, w);
    let (c1, c2) = (arcs.cosh_arc(v, f1), arcs.cosh_arc(v, f2));
    let q = (c1 * c2 - arcs.cosh_arc(v, w)) / ((c1 * c1 - 1.0).sqrt() * (c2 * c2 - 1.0).sqrt());
    q.acos()
}

fn fd_jacobian(x: &Six) -> Matrix6<f64> {
    let h = 1e-5;
    Matrix6::from_fn(|i, j| {
        let mut plus = *x;
        let mut minus = *x;
        plus[j] += h;
        minus[j] -= h;
        (angles_from_lengths(&plus).unwrap()[i] - angles_from_lengths(&minus).unwrap()[i]) / (2.0 * h)
    })
}

fn min_eigenvalue(m: &Matrix6<f64>) -> f64 {
    let sym = (m + m.transpose()) * 0.5;
    sym.symmetric_eigenvalues().min()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 256, ..ProptestConfig::default() })]

    #[test]
    fn pipeline_agrees_with_minkowski_oracle(x in log_lengths()) {
        match (angles_from_lengths(&x), minkowski_oracle(&x)) {
            (Ok(a), Ok(b)) => {
                for i in 0..6 {
                    prop_assert!((a[i] - b[i]).abs() < 1e-9, "edge {i}: {} vs {}", a[i], b[i]);
                }
            }
            (Err(_), Err(_)) => {}
            (a, b) => prop_assert!(false, "classification differs: {a:?} vs {b:?}"),
        }
    }

    #[test]
    fn admissible_shapes_are_consistent(x in log_lengths()) {
        prop_assume!(angles_from_lengths(&x).is_ok());
        let a = angles_from_lengths(&x).unwrap();
        for (e, [v, w]) in EDGE_VERTICES.iter().enumerate() {
            prop_assert!(a[e] > 0.0 && a[e] < PI);
            let gap = (angle_at_endpoint(&x, *v, *w) - angle_at_endpoint(&x, *w, *v)).abs();
            prop_assert!(gap < 1e-10, "edge {e} endpoint gap {gap:e}");
        }
        for edges in VERTEX_EDGES {
            prop_assert!(edges.iter().map(|&e| a[e]).sum::<f64>() < PI);
        }
    }

    #[test]
    fn jacobian_is_symmetric_positive_definite(a in interior_angles()) {
        let x = lengths_from_angles(&a).unwrap();
        let j = jacobian_a_wrt_x(&x).unwrap();
        prop_assert!((j - j.transpose()).amax() < 1e-8);
        prop_assert!(min_eigenvalue(&j) > 0.0);
        let inv = jacobian_x_wrt_a(&x).unwrap();
        prop_assert!((inv - inv.transpose()).amax() < 1e-8 * inv.amax().max(1.0));
        prop_assert!(min_eigenvalue(&inv) > 0.0);
        prop_assert!((j * inv - Matrix6::identity()).amax() < 1e-9);
    }

    #[test]
    fn jacobian_matches_finite_differences(a in interior_angles()) {
        let x = lengths_from_angles(&a).unwrap();
        prop_assume!(admissibility_margin(&x).unwrap().min() > 1e-3);
        let err = (jacobian_a_wrt_x(&x).unwrap() - fd_jacobian(&x)).amax();
        prop_assert!(err < 1e-6, "FD error {err:e}");
    }

    #[test]
    fn inverse_round_trips(a in interior_angles()) {
        let x = lengths_from_angles(&a).unwrap();
        let back = angles_from_lengths(&x).unwrap();
        for i in 0..6 {
            prop_assert!((back[i] - a[i]).abs() < 1e-11);
        }
        let again = lengths_from_angles(&back).unwrap();
        for i in 0..6 {
            prop_assert!((again[i] - x[i]).abs() < 1e-9 * x[i].max(1.0));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 32, ..ProptestConfig::default() })]

    #[test]
    fn schlafli_gradient_is_minus_half_length(a in interior_angles()) {
        let x = lengths_from_angles(&a).unwrap();
        let h = 1e-4;
        for i in 0..6 {
            let mut plus = a;
            let mut minus = a;
            plus[i] += h;
            minus[i] -= h;
            let fd = schlafli_segment(&minus, &plus).unwrap() / (2.0 * h);
            prop_assert!((fd + 0.5 * x[i]).abs() < 1e-6, "edge {i}: {fd} vs {}", -0.5 * x[i]);
        }
    }

    #[test]
    fn schlafli_integral_is_path_independent(a in interior_angles(), b in interior_angles(), c in interior_angles()) {
        let direct = schlafli_segment(&a, &b).unwrap();
        let detour = schlafli_segment(&a, &c).unwrap() + schlafli_segment(&c, &b).unwrap();
        prop_assert!((direct - detour).abs() < 2e-9, "{direct} vs {detour}");
        let potential = schlafli_potential_of_angles(&b).unwrap() - schlafli_potential_of_angles(&a).unwrap();
        prop_assert!((direct - potential).abs() < 2e-9);
    }
}
