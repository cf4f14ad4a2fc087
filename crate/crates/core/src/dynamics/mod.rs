//! The combinatorial curvature flow `dx/dt = K(x)`, Newton minimization of
//! the energy `H`, and experiments around equilibria.

mod experiments;
mod flow;
mod newton;

pub use experiments::{attractor_experiment, rigidity_probe, AttractorReport, RigidityReport};
pub use flow::{flow, rkf45_step, FlowConfig, FlowSample, FlowTrace, Method, TerminalStatus};
pub use newton::{minimize_energy, NewtonReport};

use thiserror::Error;

use crate::metric::MetricError;
use crate::tetgeom::ShapeError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error("initial metric is not admissible: {0}")]
    Inadmissible(#[from] MetricError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("step size underflow at t = {t}; last valid lengths {lengths:?}")]
    StepUnderflow { t: f64, lengths: Vec<f64> },
    #[error("energy evaluation failed: {0}")]
    Energy(#[from] ShapeError),
    #[error("-dK/dx is not positive definite at iteration {iteration} (Cholesky failed)")]
    NotPositiveDefinite { iteration: usize },
    #[error("line search failed at iteration {iteration}: no admissible decrease along the Newton direction")]
    LineSearch { iteration: usize },
    #[error("no convergence after {iterations} iterations (max |K| = {max_curvature:e})")]
    NoConvergence { iterations: usize, max_curvature: f64 },
    #[error("metric is not an equilibrium: max |K| = {max_curvature:e}")]
    NotEquilibrium { max_curvature: f64 },
}
