use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{flow, DynamicsError, FlowConfig, TerminalStatus};
use crate::metric::{curvature, curvature_jacobian, sorted_eigenvalues, ConeMetric};
use crate::tolerances::RIGIDITY_RATIO;

/// Distance below which a perturbed trajectory counts as having returned.
const RECOVERY_DISTANCE: f64 = 1e-6;
/// Equilibria must have `max |K|` below this.
const EQUILIBRIUM_TOL: f64 = 1e-10;
const MAX_REDRAWS: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttractorReport {
    pub radius: f64,
    pub trials: usize,
    pub seed: u64,
    pub recovered: usize,
    pub recovery_fraction: f64,
    /// Largest final ∞-distance to the equilibrium over all trials.
    pub worst_distance: f64,
    pub distances: Vec<f64>,
}

/// Perturbs an equilibrium by uniform noise of ∞-norm at most `radius` and
/// flows each perturbed metric, counting how many return.
pub fn attractor_experiment(
    m_eq: &ConeMetric,
    radius: f64,
    trials: usize,
    seed: u64,
    cfg: &FlowConfig,
) -> Result<AttractorReport, DynamicsError> {
    let max_curvature = curvature(m_eq).max_abs();
    if !(max_curvature < EQUILIBRIUM_TOL) {
        return Err(DynamicsError::NotEquilibrium { max_curvature });
    }
    let tri = m_eq.triangulation();
    let x_eq = m_eq.lengths();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut distances = Vec::with_capacity(trials);
    let mut recovered = 0;
    for _ in 0..trials {
        let mut start = None;
        for _ in 0..MAX_REDRAWS {
            let x: Vec<f64> = x_eq
                .iter()
                .map(|v| if radius > 0.0 { v + rng.random_range(-radius..=radius) } else { *v })
                .collect();
            if let Ok(m) = ConeMetric::new(tri, x) {
                start = Some(m);
                break;
            }
        }
        let start = start.ok_or_else(|| DynamicsError::Config(format!("radius {radius} leaves the metric space")))?;
        let distance = match flow(&start, cfg) {
            Ok(trace) if trace.status == TerminalStatus::Converged => {
                trace.last().x.iter().zip(x_eq).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
            }
            _ => f64::INFINITY,
        };
        if distance < RECOVERY_DISTANCE {
            recovered += 1;
        }
        distances.push(distance);
    }
    Ok(AttractorReport {
        radius,
        trials,
        seed,
        recovered,
        recovery_fraction: if trials == 0 { 1.0 } else { recovered as f64 / trials as f64 },
        worst_distance: distances.iter().copied().fold(0.0, f64::max),
        distances,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RigidityReport {
    /// Singular values of `∂K/∂x`, descending.
    pub singular_values: Vec<f64>,
    /// Eigenvalues of `∂K/∂x`, ascending.
    pub eigenvalues: Vec<f64>,
    pub condition_number: f64,
    /// Smallest singular value exceeds `1e-12` times the largest.
    pub locally_rigid: bool,
}

/// Conditioning of the curvature map at `m`; nonsingularity means `m` is
/// locally determined by its cone angles.
pub fn rigidity_probe(m: &ConeMetric) -> RigidityReport {
    let j = curvature_jacobian(m);
    let mut singular_values: Vec<f64> = j.singular_values().iter().copied().collect();
    singular_values.sort_by(|a, b| b.total_cmp(a));
    let largest = singular_values[0];
    let smallest = *singular_values.last().expect("non-empty");
    RigidityReport {
        eigenvalues: sorted_eigenvalues(&j),
        condition_number: largest / smallest,
        locally_rigid: smallest > RIGIDITY_RATIO * largest,
        singular_values,
    }
}
