//! Geometry of a single hyperideal tetrahedron.
//!
//! A hyperideal tetrahedron is described either by the lengths of its six
//! edges or by its six dihedral angles. The forward map goes
//! lengths → truncation arcs (right-angled hexagon law) → dihedral angles
//! (hyperbolic law of cosines in each truncation triangle). The inverse map
//! is a damped Newton solve, the volume enters only through the Schläfli
//! potential, and [`minkowski`] recomputes the angles from a Gram matrix as
//! an independent check.

mod convexity;
mod inverse;
pub mod minkowski;
mod schlafli;
mod shape;

pub use convexity::{probe_length_space_convexity, ConvexityReport, ConvexityWitness};
pub use inverse::{lengths_from_angles, lengths_from_angles_near};
pub use schlafli::{
    reference_angles, schlafli_potential, schlafli_potential_of_angles, schlafli_segment,
    schlafli_segment_from,
};
pub use shape::{
    admissibility_margin, angles_from_lengths, arcs_from_lengths, jacobian_a_wrt_x,
    jacobian_x_wrt_a, regular_angle, regular_length_for_angle, Arcs, Margin, TetShape,
};

use thiserror::Error;

/// Six values indexed by local edge.
pub type Six = [f64; 6];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ShapeError {
    #[error("edge {edge} has non-positive or non-finite length {value}")]
    NonPositiveLength { edge: usize, value: f64 },
    #[error("cosine quotient {quotient} at vertex {vertex}, edge {edge} is outside (-1, 1)")]
    QuotientOutOfRange { vertex: usize, edge: usize, quotient: f64 },
    #[error("dihedral angle of edge {edge} disagrees between endpoints by {gap:e}")]
    EndpointDisagreement { edge: usize, gap: f64 },
    #[error("angle sum {sum} at vertex {vertex} is not below pi")]
    VertexSum { vertex: usize, sum: f64 },
    #[error("angle {value} at edge {edge} is outside (0, pi)")]
    AngleOutOfRange { edge: usize, value: f64 },
    #[error("Newton inversion did not converge in {iterations} iterations (residual {residual:e})")]
    NewtonFailed { iterations: usize, residual: f64 },
}

/// Whether a 6-tuple of angles lies in the open polytope of hyperideal
/// dihedral angles: each in `(0, π)` and each vertex triple summing below `π`.
pub fn check_angles(a: &Six) -> Result<(), ShapeError> {
    for (edge, &value) in a.iter().enumerate() {
        if !(value > 0.0 && value < std::f64::consts::PI) {
            return Err(ShapeError::AngleOutOfRange { edge, value });
        }
    }
    for vertex in 0..4 {
        let sum: f64 = VERTEX_EDGES[vertex].iter().map(|&e| a[e]).sum();
        if !(sum < std::f64::consts::PI) {
            return Err(ShapeError::VertexSum { vertex, sum });
        }
    }
    Ok(())
}

/// Local edges incident to each vertex.
pub const VERTEX_EDGES: [[usize; 3]; 4] = [[0, 1, 2], [0, 3, 4], [1, 3, 5], [2, 4, 5]];
