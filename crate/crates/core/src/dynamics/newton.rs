use serde::{Deserialize, Serialize};

use super::DynamicsError;
use crate::metric::{curvature, curvature_jacobian, energy, to_dvector, ConeMetric};

const MAX_ITERATIONS: usize = 100;
const ARMIJO: f64 = 1e-4;
const MAX_HALVINGS: usize = 60;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NewtonReport {
    pub iterations: usize,
    pub max_curvature: f64,
    /// Energy at each iterate, starting with the initial metric.
    pub energy: Vec<f64>,
    /// Accepted step fraction per iteration.
    pub step_fractions: Vec<f64>,
}

/// Newton's method on the convex energy `H`: solve `(-∂K/∂x) d = K`, then
/// backtrack along `d` until the step stays admissible and decreases `H`.
///
/// Close to the minimum, `H` differences drop below roundoff; a step that
/// strictly reduces `max |K|` is then accepted instead.
pub fn minimize_energy<'a>(m0: &ConeMetric<'a>, tol: f64) -> Result<(ConeMetric<'a>, NewtonReport), DynamicsError> {
    let tri = m0.triangulation();
    let mut current = m0.clone();
    let mut h = energy(&current)?.value;
    let mut report = NewtonReport { iterations: 0, max_curvature: 0.0, energy: vec![h], step_fractions: Vec::new() };

    for iteration in 0..MAX_ITERATIONS {
        let k = curvature(&current);
        report.max_curvature = k.max_abs();
        if report.max_curvature < tol {
            return Ok((current, report));
        }
        let hessian = -curvature_jacobian(&current);
        let chol = hessian.cholesky().ok_or(DynamicsError::NotPositiveDefinite { iteration })?;
        let kv = to_dvector(&k.k);
        let direction = chol.solve(&kv);
        // ∇H · d = -K · d
        let slope = -kv.dot(&direction);

        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let trial: Vec<f64> = current.lengths().iter().zip(direction.iter()).map(|(x, d)| x + alpha * d).collect();
            if let Ok(next) = ConeMetric::new(tri, trial) {
                let h_next = energy(&next)?.value;
                let sufficient = h_next <= h + ARMIJO * alpha * slope;
                let k_next = curvature(&next).max_abs();
                if sufficient || k_next < report.max_curvature * (1.0 - ARMIJO * alpha) {
                    accepted = Some((next, h_next));
                    break;
                }
            }
            alpha *= 0.5;
        }
        let (next, h_next) = accepted.ok_or(DynamicsError::LineSearch { iteration })?;
        current = next;
        h = h_next;
        report.iterations = iteration + 1;
        report.energy.push(h);
        report.step_fractions.push(alpha);
    }
    let max_curvature = curvature(&current).max_abs();
    if max_curvature < tol {
        report.max_curvature = max_curvature;
        return Ok((current, report));
    }
    Err(DynamicsError::NoConvergence { iterations: MAX_ITERATIONS, max_curvature })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::triangulation::census_one_edge;

    #[test]
    fn reaches_the_regular_equilibrium() {
        let tri = census_one_edge();
        let m0 = ConeMetric::uniform(&tri, 1.0).unwrap();
        let (m, report) = minimize_energy(&m0, 1e-12).unwrap();
        let x_star = (3f64.sqrt() / (2.0 * 3f64.sqrt() - 2.0)).acosh();
        assert!((m.lengths()[0] - x_star).abs() < 1e-10);
        assert!(report.iterations <= 20);
        for w in report.energy.windows(2) {
            assert!(w[1] <= w[0] + 1e-12);
        }
    }
}
