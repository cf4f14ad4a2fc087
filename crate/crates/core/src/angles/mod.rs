//! Angle structures on a triangulation: positive corner angles summing to
//! `2π` around every edge with every vertex triple below `π`. Includes the
//! LP feasibility check, per-tetrahedron realization, and volume
//! maximization over the space of such structures.

pub mod simplex;
mod volume;

pub use volume::{maximize_volume, probe_volume_concavity, random_structure, ConcavityReport, VolumeReport, CONCAVITY_TOL};

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tetgeom::{self, ShapeError, Six, VERTEX_EDGES};
use crate::triangulation::Triangulation;
use simplex::{Constraint, LinearProgram, LpOutcome, Relation};

/// Edge-sum equalities hold to this absolute tolerance.
pub const EDGE_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnglesError {
    #[error("assignment has {got} tetrahedra but the triangulation has {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("corner (tet {tet}, edge {edge}) has non-positive angle {value}")]
    NonPositive { tet: usize, edge: usize, value: f64 },
    #[error("angles around edge class {class} sum to {sum}, not 2π")]
    EdgeSum { class: usize, sum: f64 },
    #[error("angles at vertex {vertex} of tetrahedron {tet} sum to {sum}, not below π")]
    VertexSum { tet: usize, vertex: usize, sum: f64 },
    #[error("tetrahedron {tet} cannot be realized: {source}")]
    Realization { tet: usize, source: ShapeError },
    #[error("line search failed at iteration {iteration}")]
    LineSearch { iteration: usize },
    #[error("no convergence after {iterations} iterations (projected gradient {gradient:e})")]
    NoConvergence { iterations: usize, gradient: f64 },
    #[error("invalid tolerance {0}")]
    Tolerance(f64),
}

/// On-disk angle assignment, corners in `(tet, local edge)` order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngleFile {
    pub angles: Vec<Six>,
}

/// A point of the open polytope of angle structures.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleAssignment<'a> {
    tri: &'a Triangulation,
    angles: Vec<Six>,
}

impl<'a> AngleAssignment<'a> {
    pub fn new(tri: &'a Triangulation, angles: Vec<Six>) -> Result<Self, AnglesError> {
        if angles.len() != tri.tet_count() {
            return Err(AnglesError::DimensionMismatch { expected: tri.tet_count(), got: angles.len() });
        }
        let assign = AngleAssignment { tri, angles };
        for (tet, a) in assign.angles.iter().enumerate() {
            for (edge, &value) in a.iter().enumerate() {
                if !(value > 0.0) {
                    return Err(AnglesError::NonPositive { tet, edge, value });
                }
            }
            for (vertex, edges) in VERTEX_EDGES.iter().enumerate() {
                let sum: f64 = edges.iter().map(|&e| a[e]).sum();
                if !(sum < PI) {
                    return Err(AnglesError::VertexSum { tet, vertex, sum });
                }
            }
        }
        for (class, sum) in assign.edge_sums().into_iter().enumerate() {
            if !((sum - 2.0 * PI).abs() <= EDGE_SUM_TOL) {
                return Err(AnglesError::EdgeSum { class, sum });
            }
        }
        Ok(assign)
    }

    /// Every corner angle equal to `value`; valid only when all edge classes
    /// have valence `2π / value`.
    pub fn uniform(tri: &'a Triangulation, value: f64) -> Result<Self, AnglesError> {
        Self::new(tri, vec![[value; 6]; tri.tet_count()])
    }

    pub fn from_file(tri: &'a Triangulation, file: &AngleFile) -> Result<Self, AnglesError> {
        Self::new(tri, file.angles.clone())
    }

    pub fn to_file(&self) -> AngleFile {
        AngleFile { angles: self.angles.clone() }
    }

    pub fn triangulation(&self) -> &'a Triangulation {
        self.tri
    }

    pub fn angles(&self) -> &[Six] {
        &self.angles
    }

    pub fn edge_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.tri.edge_count()];
        for (tet, a) in self.angles.iter().enumerate() {
            for (e, &class) in self.tri.edge_map(tet).iter().enumerate() {
                sums[class] += a[e];
            }
        }
        sums
    }

    /// Smallest of all corner angles and all gaps `π - vertex sum`.
    pub fn slack(&self) -> f64 {
        self.angles
            .iter()
            .flat_map(|a| {
                let corners = a.iter().copied();
                let vertices = VERTEX_EDGES.iter().map(move |edges| PI - edges.iter().map(|&e| a[e]).sum::<f64>());
                corners.chain(vertices)
            })
            .fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LPResult<'a> {
    pub feasible: bool,
    /// Optimal common slack: every corner angle and every `π - vertex sum`
    /// is at least this.
    pub epsilon: f64,
    pub witness: Option<AngleAssignment<'a>>,
    pub pivots: usize,
}

/// Serializable form of [`LPResult`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpReport {
    pub feasible: bool,
    pub epsilon: f64,
    pub witness: Option<AngleFile>,
}

impl LPResult<'_> {
    pub fn report(&self) -> LpReport {
        LpReport { feasible: self.feasible, epsilon: self.epsilon, witness: self.witness.as_ref().map(|w| w.to_file()) }
    }
}

/// The slack LP in units of `π`: variables `y_c >= 0` per corner and
/// `p, q >= 0`, with corner angle `y_c + ε` and `ε = p - q`.
pub fn slack_program(tri: &Triangulation) -> LinearProgram {
    let corners = 6 * tri.tet_count();
    let (p, q) = (corners, corners + 1);
    let width = corners + 2;
    let mut constraints = Vec::new();
    for class in tri.edge_classes() {
        let mut row = vec![0.0; width];
        for &(tet, e) in &class.corners {
            row[6 * tet + e] += 1.0;
        }
        let valence = class.valence() as f64;
        row[p] = valence;
        row[q] = -valence;
        constraints.push(Constraint { coefficients: row, relation: Relation::Eq, rhs: 2.0 });
    }
    for tet in 0..tri.tet_count() {
        for edges in VERTEX_EDGES {
            let mut row = vec![0.0; width];
            for e in edges {
                row[6 * tet + e] = 1.0;
            }
            row[p] = 4.0;
            row[q] = -4.0;
            constraints.push(Constraint { coefficients: row, relation: Relation::Le, rhs: 1.0 });
        }
    }
    let mut objective = vec![0.0; width];
    objective[p] = 1.0;
    objective[q] = -1.0;
    LinearProgram { objective, constraints }
}

/// Maximizes the common slack `ε` of an angle structure: corner angles
/// `>= ε`, vertex sums `<= π - ε`, edge sums `= 2π`. A strictly positive
/// optimum means the triangulation carries an angle structure.
pub fn lp_feasibility(tri: &Triangulation) -> LPResult<'_> {
    let corners = 6 * tri.tet_count();
    let (x, pivots) = match simplex::solve(&slack_program(tri)) {
        LpOutcome::Optimal { x, pivots, .. } => (x, pivots),
        // Any ε small enough is feasible and ε <= π/4, so neither can occur.
        other => unreachable!("slack LP is always feasible and bounded, got {other:?}"),
    };
    let eps = x[corners] - x[corners + 1];
    let epsilon = eps * PI;
    let witness = if eps > 0.0 {
        let angles = (0..tri.tet_count()).map(|t| std::array::from_fn(|e| (x[6 * t + e] + eps) * PI)).collect();
        AngleAssignment::new(tri, angles).ok()
    } else {
        None
    };
    LPResult { feasible: witness.is_some(), epsilon, witness, pivots }
}

/// Per-tetrahedron lengths realizing an angle structure, which need not
/// agree across glued edges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Realization {
    pub lengths: Vec<Six>,
    /// `max - min` of corner lengths per edge class.
    pub spread: Vec<f64>,
    /// Mean corner length per edge class.
    pub class_lengths: Vec<f64>,
}

impl Realization {
    pub fn max_spread(&self) -> f64 {
        self.spread.iter().fold(0.0, |m, v| m.max(*v))
    }
}

pub fn realize_structure(assign: &AngleAssignment) -> Result<Realization, AnglesError> {
    let lengths: Vec<Six> = assign
        .angles()
        .iter()
        .enumerate()
        .map(|(tet, a)| tetgeom::lengths_from_angles(a).map_err(|source| AnglesError::Realization { tet, source }))
        .collect::<Result<_, _>>()?;
    Ok(summarize(assign.triangulation(), lengths))
}

fn summarize(tri: &Triangulation, lengths: Vec<Six>) -> Realization {
    let (spread, class_lengths) = tri
        .edge_classes()
        .iter()
        .map(|class| {
            let values: Vec<f64> = class.corners.iter().map(|&(t, e)| lengths[t][e]).collect();
            let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let min = values.iter().copied().fold(f64::INFINITY, f64::min);
            (max - min, values.iter().sum::<f64>() / values.len() as f64)
        })
        .unzip();
    Realization { lengths, spread, class_lengths }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::triangulation::census_one_edge;

    #[test]
    fn census_lp_is_feasible() {
        let tri = census_one_edge();
        let r = lp_feasibility(&tri);
        assert!(r.feasible && r.epsilon > 0.0);
        let w = r.witness.unwrap();
        assert!(w.slack() >= r.epsilon - 1e-12);
    }

    #[test]
    fn symmetric_structure_realizes_regular_tetrahedra() {
        let tri = census_one_edge();
        let assign = AngleAssignment::uniform(&tri, PI / 6.0).unwrap();
        let r = realize_structure(&assign).unwrap();
        let x_star = (3f64.sqrt() / (2.0 * 3f64.sqrt() - 2.0)).acosh();
        assert!(r.max_spread() < 1e-12);
        assert!((r.class_lengths[0] - x_star).abs() < 1e-10);
    }

    #[test]
    fn rejects_bad_assignments() {
        let tri = census_one_edge();
        assert!(matches!(AngleAssignment::uniform(&tri, 0.5), Err(AnglesError::EdgeSum { .. })));
        let mut a = vec![[PI / 6.0; 6]; 2];
        a[0][0] = 0.0;
        a[1][0] = PI / 3.0;
        assert!(matches!(AngleAssignment::new(&tri, a), Err(AnglesError::NonPositive { .. })));
        let mut a = vec![[PI / 6.0; 6]; 2];
        a[0][0] = PI / 2.0;
        a[0][1] = PI / 2.0;
        assert!(matches!(AngleAssignment::new(&tri, a), Err(AnglesError::VertexSum { tet: 0, vertex: 0, .. })));
    }
}
