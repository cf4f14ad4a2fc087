//! Cone metrics on a triangulation: PL curvature, its Jacobian, and the
//! convex energy whose negative gradient is the curvature.
//!
//! Sign convention: `K_i = 2π - S_i` where `S_i` is the total dihedral angle
//! around edge class `i`. With this choice `∂H/∂x_i = -K_i` for
//! `H = 2·vol - Σ K_i x_i`, and `∂K/∂x` is negative definite.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::tetgeom::{self, Margin, ShapeError, Six, TetShape};
use crate::triangulation::Triangulation;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricError {
    #[error("metric has {got} lengths but the triangulation has {expected} edge classes")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("tetrahedron {tet} is not hyperideal: {source}")]
    Inadmissible { tet: usize, source: ShapeError },
}

/// Positive lengths indexed by edge class, such that every tetrahedron is
/// a hyperideal tetrahedron.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeMetric<'a> {
    tri: &'a Triangulation,
    lengths: Vec<f64>,
}

impl<'a> ConeMetric<'a> {
    pub fn new(tri: &'a Triangulation, lengths: Vec<f64>) -> Result<Self, MetricError> {
        if lengths.len() != tri.edge_count() {
            return Err(MetricError::DimensionMismatch { expected: tri.edge_count(), got: lengths.len() });
        }
        for tet in 0..tri.tet_count() {
            tetgeom::angles_from_lengths(&tri.tet_lengths(tet, &lengths))
                .map_err(|source| MetricError::Inadmissible { tet, source })?;
        }
        Ok(ConeMetric { tri, lengths })
    }

    pub fn uniform(tri: &'a Triangulation, length: f64) -> Result<Self, MetricError> {
        Self::new(tri, vec![length; tri.edge_count()])
    }

    pub fn triangulation(&self) -> &'a Triangulation {
        self.tri
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn dim(&self) -> usize {
        self.lengths.len()
    }

    pub fn tet_lengths(&self, tet: usize) -> Six {
        self.tri.tet_lengths(tet, &self.lengths)
    }

    pub fn shapes(&self) -> Vec<TetShape> {
        (0..self.tri.tet_count())
            .map(|t| TetShape::from_lengths(&self.tet_lengths(t)).expect("validated on construction"))
            .collect()
    }

    fn angles(&self, tet: usize) -> Six {
        tetgeom::angles_from_lengths(&self.tet_lengths(tet)).expect("validated on construction")
    }

    /// Smallest admissibility margin over all tetrahedra, with the tetrahedron attaining it.
    pub fn margin(&self) -> (usize, Margin) {
        (0..self.tri.tet_count())
            .map(|t| (t, tetgeom::admissibility_margin(&self.tet_lengths(t)).expect("validated on construction")))
            .min_by(|a, b| a.1.min().total_cmp(&b.1.min()))
            .expect("triangulations are non-empty")
    }
}

/// Angle sums and curvature per edge class.
#[derive(Debug, Clone, PartialEq)]
pub struct Curvature {
    pub angle_sums: Vec<f64>,
    pub k: Vec<f64>,
}

impl Curvature {
    pub fn max_abs(&self) -> f64 {
        self.k.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn total(&self) -> f64 {
        self.k.iter().map(|v| v * v).sum()
    }
}

pub fn curvature(m: &ConeMetric) -> Curvature {
    let tri = m.triangulation();
    let mut angle_sums = vec![0.0; m.dim()];
    for tet in 0..tri.tet_count() {
        let a = m.angles(tet);
        for (e, &class) in tri.edge_map(tet).iter().enumerate() {
            angle_sums[class] += a[e];
        }
    }
    let k = angle_sums.iter().map(|s| 2.0 * PI - s).collect();
    Curvature { angle_sums, k }
}

/// Per-tetrahedron contributions to `∂S/∂x`, each an `n × n` positive
/// semidefinite matrix; `∂K/∂x` is minus their sum.
pub fn jacobian_blocks(m: &ConeMetric) -> Vec<DMatrix<f64>> {
    let tri = m.triangulation();
    let n = m.dim();
    (0..tri.tet_count())
        .map(|tet| {
            let local = tetgeom::jacobian_a_wrt_x(&m.tet_lengths(tet)).expect("validated on construction");
            let map = tri.edge_map(tet);
            let mut block = DMatrix::zeros(n, n);
            for i in 0..6 {
                for j in 0..6 {
                    block[(map[i], map[j])] += local[(i, j)];
                }
            }
            block
        })
        .collect()
}

/// `∂K/∂x`, symmetric negative definite.
pub fn curvature_jacobian(m: &ConeMetric) -> DMatrix<f64> {
    let n = m.dim();
    jacobian_blocks(m).into_iter().fold(DMatrix::zeros(n, n), |acc, b| acc - b)
}

/// Relative value of `H = 2·vol - Σ K_i x_i` and its gradient `-K`.
#[derive(Debug, Clone, PartialEq)]
pub struct Energy {
    pub value: f64,
    pub gradient: Vec<f64>,
}

/// Total relative volume `Σ_tet V_rel`.
pub fn relative_volume(m: &ConeMetric) -> Result<f64, ShapeError> {
    (0..m.triangulation().tet_count())
        .map(|t| tetgeom::schlafli_potential(&m.tet_lengths(t)))
        .sum()
}

pub fn energy(m: &ConeMetric) -> Result<Energy, ShapeError> {
    let c = curvature(m);
    let volume = relative_volume(m)?;
    let value = 2.0 * volume - c.k.iter().zip(m.lengths()).map(|(k, x)| k * x).sum::<f64>();
    Ok(Energy { value, gradient: c.k.iter().map(|k| -k).collect() })
}

/// Curvature, Jacobian and energy at one metric.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureState {
    pub curvature: Curvature,
    pub jacobian: DMatrix<f64>,
    pub energy: Energy,
}

impl CurvatureState {
    pub fn at(m: &ConeMetric) -> Result<Self, ShapeError> {
        Ok(CurvatureState { curvature: curvature(m), jacobian: curvature_jacobian(m), energy: energy(m)? })
    }

    /// Eigenvalues of the symmetrized Jacobian, ascending.
    pub fn jacobian_eigenvalues(&self) -> Vec<f64> {
        sorted_eigenvalues(&self.jacobian)
    }
}

/// Eigenvalues of `(A + Aᵀ)/2`, ascending.
pub fn sorted_eigenvalues(a: &DMatrix<f64>) -> Vec<f64> {
    let sym = (a + a.transpose()) * 0.5;
    let mut eig: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    eig.sort_by(f64::total_cmp);
    eig
}

pub(crate) fn to_dvector(v: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(v)
}
