//! Hyperideal tetrahedra, cone metrics on ideally triangulated 3-manifolds,
//! and the combinatorial curvature flow `dx/dt = K(x)` that drives a cone
//! metric towards the complete hyperbolic metric with totally geodesic
//! boundary.

pub mod quadrature;
pub mod tetgeom;
pub mod tolerances;
pub mod triangulation;
pub mod metric;
pub mod dynamics;
pub mod angles;
