use std::f64::consts::PI;

use nalgebra::Matrix6;

use super::{ShapeError, Six, VERTEX_EDGES};
use crate::tolerances::{DEGENERATE_QUOTIENT, ENDPOINT_AGREEMENT};
use crate::triangulation::edge_between;

/// Truncation arcs, `arc(v, f)` being the side of vertex `v`'s truncation
/// triangle that lies in face `f` (so `f != v`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arcs {
    cosh: [[f64; 4]; 4],
}

impl Arcs {
    pub fn arc(&self, vertex: usize, face: usize) -> f64 {
        assert_ne!(vertex, face, "face {face} does not contain vertex {vertex}");
        self.cosh[vertex][face].acosh()
    }

    pub fn cosh_arc(&self, vertex: usize, face: usize) -> f64 {
        assert_ne!(vertex, face);
        self.cosh[vertex][face]
    }

    /// The twelve arcs ordered by vertex, then face.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(12);
        for v in 0..4 {
            for f in 0..4 {
                if f != v {
                    out.push(self.arc(v, f));
                }
            }
        }
        out
    }
}

fn other_two(exclude_a: usize, exclude_b: usize) -> (usize, usize) {
    let mut it = (0..4).filter(|&i| i != exclude_a && i != exclude_b);
    (it.next().unwrap(), it.next().unwrap())
}

fn check_lengths(x: &Six) -> Result<(), ShapeError> {
    for (edge, &value) in x.iter().enumerate() {
        if !(value > 0.0 && value.is_finite()) {
            return Err(ShapeError::NonPositiveLength { edge, value });
        }
    }
    Ok(())
}

/// Right-angled hexagon law: the arc at `v` in the face spanned by `v, j, k`
/// sits opposite edge `jk`.
pub fn arcs_from_lengths(x: &Six) -> Result<Arcs, ShapeError> {
    check_lengths(x)?;
    let ch = x.map(f64::cosh);
    let sh = x.map(f64::sinh);
    let mut cosh = [[1.0; 4]; 4];
    for v in 0..4 {
        for f in 0..4 {
            if f == v {
                continue;
            }
            let (j, k) = other_two(v, f);
            let (vj, vk, jk) = (edge_between(v, j), edge_between(v, k), edge_between(j, k));
            cosh[v][f] = (ch[jk] + ch[vj] * ch[vk]) / (sh[vj] * sh[vk]);
        }
    }
    Ok(Arcs { cosh })
}

/// Corner data of the truncation triangle at `v` for edge `vw`.
struct Corner {
    quotient: f64,
    /// ∂(cos a)/∂x for this corner's computation.
    d_quotient: Six,
}

fn corner(x_cosh: &Six, x_sinh: &Six, arcs: &Arcs, v: usize, w: usize, with_derivative: bool) -> Corner {
    let (p, q) = other_two(v, w);
    let (cp, cq, cw) = (arcs.cosh[v][p], arcs.cosh[v][q], arcs.cosh[v][w]);
    let (sp, sq) = ((cp * cp - 1.0).sqrt(), (cq * cq - 1.0).sqrt());
    let quotient = (cp * cq - cw) / (sp * sq);
    let mut d_quotient = [0.0; 6];
    if with_derivative {
        // Derivatives of cos a with respect to cosh of each side.
        let dq_dcw = -1.0 / (sp * sq);
        let dq_dcp = (cw * cp - cq) / (sp * sp * sp * sq);
        let dq_dcq = (cw * cq - cp) / (sq * sq * sq * sp);
        for (face, weight) in [(w, dq_dcw), (p, dq_dcp), (q, dq_dcq)] {
            let d_arc = d_cosh_arc(x_cosh, x_sinh, v, face);
            for e in 0..6 {
                d_quotient[e] += weight * d_arc[e];
            }
        }
    }
    Corner { quotient, d_quotient }
}

/// Gradient of `cosh(arc(v, f))` with respect to the six lengths.
fn d_cosh_arc(ch: &Six, sh: &Six, v: usize, f: usize) -> Six {
    let (j, k) = other_two(v, f);
    let (vj, vk, jk) = (edge_between(v, j), edge_between(v, k), edge_between(j, k));
    let mut g = [0.0; 6];
    g[jk] = sh[jk] / (sh[vj] * sh[vk]);
    g[vj] = -(ch[vk] + ch[jk] * ch[vj]) / (sh[vj] * sh[vj] * sh[vk]);
    g[vk] = -(ch[vj] + ch[jk] * ch[vk]) / (sh[vk] * sh[vk] * sh[vj]);
    g
}

/// Full forward evaluation; `jac` is filled when requested.
pub(crate) struct Forward {
    pub arcs: Arcs,
    pub angles: Six,
    pub jac: Option<Matrix6<f64>>,
    pub margin: Margin,
}

/// Distance of an admissible shape from the boundary of admissibility.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Margin {
    /// `min over corners of 1 - |cos quotient|`.
    pub quotient: f64,
    /// Corner attaining `quotient`, as `(vertex, local edge)`.
    pub quotient_corner: (usize, usize),
    /// `min over vertices of π - (angle sum)`.
    pub vertex_slack: f64,
    pub slack_vertex: usize,
}

impl Margin {
    pub fn min(&self) -> f64 {
        self.quotient.min(self.vertex_slack)
    }
}

pub(crate) fn forward(x: &Six, with_jacobian: bool) -> Result<Forward, ShapeError> {
    let arcs = arcs_from_lengths(x)?;
    let ch = x.map(f64::cosh);
    let sh = x.map(f64::sinh);

    // per_vertex[v][e]: angle of edge e seen from endpoint v.
    let mut per_vertex = [[f64::NAN; 6]; 4];
    let mut rows = [[[0.0; 6]; 6]; 2];
    let mut margin = Margin { quotient: f64::INFINITY, quotient_corner: (0, 0), vertex_slack: f64::INFINITY, slack_vertex: 0 };
    for (e, &[a, b]) in crate::triangulation::EDGE_VERTICES.iter().enumerate() {
        for (slot, (v, w)) in [(a, b), (b, a)].into_iter().enumerate() {
            let c = corner(&ch, &sh, &arcs, v, w, with_jacobian);
            if !(c.quotient.abs() < 1.0 - DEGENERATE_QUOTIENT) {
                return Err(ShapeError::QuotientOutOfRange { vertex: v, edge: e, quotient: c.quotient });
            }
            let slack = 1.0 - c.quotient.abs();
            if slack < margin.quotient {
                margin.quotient = slack;
                margin.quotient_corner = (v, e);
            }
            per_vertex[v][e] = c.quotient.acos();
            if with_jacobian {
                let sin = (1.0 - c.quotient * c.quotient).sqrt();
                rows[slot][e] = c.d_quotient.map(|d| -d / sin);
            }
        }
    }

    let mut angles = [0.0; 6];
    for (e, &[a, b]) in crate::triangulation::EDGE_VERTICES.iter().enumerate() {
        let gap = (per_vertex[a][e] - per_vertex[b][e]).abs();
        if !(gap <= ENDPOINT_AGREEMENT) {
            return Err(ShapeError::EndpointDisagreement { edge: e, gap });
        }
        angles[e] = 0.5 * (per_vertex[a][e] + per_vertex[b][e]);
    }
    for (v, edges) in VERTEX_EDGES.iter().enumerate() {
        let sum: f64 = edges.iter().map(|&e| per_vertex[v][e]).sum();
        if !(sum < PI) {
            return Err(ShapeError::VertexSum { vertex: v, sum });
        }
        if PI - sum < margin.vertex_slack {
            margin.vertex_slack = PI - sum;
            margin.slack_vertex = v;
        }
    }

    let jac = with_jacobian.then(|| Matrix6::from_fn(|i, j| 0.5 * (rows[0][i][j] + rows[1][i][j])));
    Ok(Forward { arcs, angles, jac, margin })
}

/// Dihedral angles of the hyperideal tetrahedron with edge lengths `x`,
/// or the reason `x` is not realizable.
pub fn angles_from_lengths(x: &Six) -> Result<Six, ShapeError> {
    forward(x, false).map(|f| f.angles)
}

/// Analytic Jacobian `[∂a_i/∂x_j]`.
pub fn jacobian_a_wrt_x(x: &Six) -> Result<Matrix6<f64>, ShapeError> {
    forward(x, true).map(|f| f.jac.expect("requested"))
}

/// `[∂x_i/∂a_j]`, the inverse of [`jacobian_a_wrt_x`].
pub fn jacobian_x_wrt_a(x: &Six) -> Result<Matrix6<f64>, ShapeError> {
    let j = jacobian_a_wrt_x(x)?;
    Ok(invert_spd(&j))
}

fn invert_spd(m: &Matrix6<f64>) -> Matrix6<f64> {
    match m.cholesky() {
        Some(ch) => ch.inverse(),
        None => m.try_inverse().unwrap_or_else(|| Matrix6::from_element(f64::NAN)),
    }
}

pub fn admissibility_margin(x: &Six) -> Result<Margin, ShapeError> {
    forward(x, false).map(|f| f.margin)
}

/// Dihedral angle of the regular tetrahedron with all lengths `x`:
/// `cos a = cosh x / (2 cosh x - 1)`.
pub fn regular_angle(x: f64) -> f64 {
    let c = x.cosh();
    (c / (2.0 * c - 1.0)).acos()
}

/// Inverse of [`regular_angle`], defined for `a` in `(0, π/3)`.
pub fn regular_length_for_angle(a: f64) -> f64 {
    let c = a.cos();
    (c / (2.0 * c - 1.0)).acosh()
}

/// Everything known about one hyperideal tetrahedron.
#[derive(Debug, Clone, PartialEq)]
pub struct TetShape {
    pub lengths: Six,
    pub arcs: Arcs,
    pub angles: Six,
    pub jac_ax: Matrix6<f64>,
    pub jac_xa: Matrix6<f64>,
}

impl TetShape {
    pub fn from_lengths(x: &Six) -> Result<Self, ShapeError> {
        let f = forward(x, true)?;
        let jac_ax = f.jac.expect("requested");
        Ok(TetShape { lengths: *x, arcs: f.arcs, angles: f.angles, jac_ax, jac_xa: invert_spd(&jac_ax) })
    }

    pub fn from_angles(a: &Six) -> Result<Self, ShapeError> {
        Self::from_lengths(&super::lengths_from_angles(a)?)
    }
}
