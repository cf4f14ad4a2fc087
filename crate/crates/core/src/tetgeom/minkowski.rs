//! Independent recomputation of dihedral angles in the hyperboloid model.
//!
//! Each hyperideal vertex `v` is represented by the unit space-like vector
//! polar to its truncation plane; two such vectors have Minkowski product
//! `-cosh(length of the edge joining them)`. The four vectors exist iff the
//! Gram matrix has signature `(3, 1)`. Face normals are then the vectors
//! orthogonal to three vertex vectors, and dihedral angles come from products
//! of normals. No hyperbolic trigonometry is involved.

use nalgebra::{Matrix4, SymmetricEigen, Vector4};
use thiserror::Error;

use super::Six;
use crate::triangulation::{edge_between, EDGE_VERTICES, OPPOSITE_EDGE};

/// Eigenvalues below this fraction of the largest are treated as zero.
const ZERO_EIGENVALUE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MinkowskiError {
    #[error("edge {edge} has non-positive or non-finite length {value}")]
    NonPositiveLength { edge: usize, value: f64 },
    #[error("Gram matrix has signature ({positive}, {negative}) with {zero} null directions")]
    Signature { positive: usize, negative: usize, zero: usize },
    #[error("face normals do not meet along edge {edge} (cosine {cosine})")]
    FacesDoNotMeet { edge: usize, cosine: f64 },
}

/// `G_vv = 1`, `G_vw = -cosh x_vw`.
pub fn gram_matrix(x: &Six) -> Matrix4<f64> {
    Matrix4::from_fn(|v, w| if v == w { 1.0 } else { -x[edge_between(v, w)].cosh() })
}

/// Counts of positive, negative and (numerically) zero eigenvalues.
pub fn signature(g: &Matrix4<f64>) -> (usize, usize, usize) {
    let eig = SymmetricEigen::new(*g);
    let scale = eig.eigenvalues.amax();
    let mut counts = (0, 0, 0);
    for &l in eig.eigenvalues.iter() {
        if l > ZERO_EIGENVALUE * scale {
            counts.0 += 1;
        } else if l < -ZERO_EIGENVALUE * scale {
            counts.1 += 1;
        } else {
            counts.2 += 1;
        }
    }
    counts
}

fn minkowski_dot(u: &Vector4<f64>, v: &Vector4<f64>, eta: &Vector4<f64>) -> f64 {
    u.component_mul(v).dot(eta)
}

/// Euclidean vector orthogonal to three vectors of `R^4` (cofactor expansion).
fn cross3(a: &Vector4<f64>, b: &Vector4<f64>, c: &Vector4<f64>) -> Vector4<f64> {
    let m = |skip: usize| {
        let cols: Vec<usize> = (0..4).filter(|&k| k != skip).collect();
        let r = |v: &Vector4<f64>| [v[cols[0]], v[cols[1]], v[cols[2]]];
        let (p, q, s) = (r(a), r(b), r(c));
        p[0] * (q[1] * s[2] - q[2] * s[1]) - p[1] * (q[0] * s[2] - q[2] * s[0]) + p[2] * (q[0] * s[1] - q[1] * s[0])
    };
    Vector4::new(-m(0), m(1), -m(2), m(3))
}

/// Dihedral angles via the Gram-matrix embedding.
pub fn minkowski_oracle(x: &Six) -> Result<Six, MinkowskiError> {
    for (edge, &value) in x.iter().enumerate() {
        if !(value > 0.0 && value.is_finite()) {
            return Err(MinkowskiError::NonPositiveLength { edge, value });
        }
    }
    let g = gram_matrix(x);
    let (positive, negative, zero) = signature(&g);
    if (positive, negative, zero) != (3, 1, 0) {
        return Err(MinkowskiError::Signature { positive, negative, zero });
    }
    let eig = SymmetricEigen::new(g);

    // Rows of Q·|Λ|^{1/2} realize G in the metric diag(sign λ).
    let eta = eig.eigenvalues.map(f64::signum);
    let vertex: Vec<Vector4<f64>> = (0..4)
        .map(|v| Vector4::from_fn(|k, _| eig.eigenvectors[(v, k)] * eig.eigenvalues[k].abs().sqrt()))
        .collect();

    let normals: Vec<Vector4<f64>> = (0..4)
        .map(|l| {
            let others: Vec<usize> = (0..4).filter(|&v| v != l).collect();
            let c = cross3(&vertex[others[0]], &vertex[others[1]], &vertex[others[2]]);
            let mut n = c.component_mul(&eta);
            // Orient so that the normal pairs positively with the opposite vertex.
            if minkowski_dot(&n, &vertex[l], &eta) < 0.0 {
                n = -n;
            }
            n
        })
        .collect();

    let mut angles = [0.0; 6];
    for (e, angle) in angles.iter_mut().enumerate() {
        // Edge e lies on the two faces opposite the endpoints of the opposite edge.
        let [k, l] = EDGE_VERTICES[OPPOSITE_EDGE[e]];
        let (nk, nl) = (&normals[k], &normals[l]);
        let cosine = -minkowski_dot(nk, nl, &eta)
            / (minkowski_dot(nk, nk, &eta) * minkowski_dot(nl, nl, &eta)).sqrt();
        if !(cosine.abs() < 1.0) {
            return Err(MinkowskiError::FacesDoNotMeet { edge: e, cosine });
        }
        *angle = cosine.acos();
    }
    Ok(angles)
}
