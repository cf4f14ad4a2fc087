use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{summarize, AngleAssignment, AnglesError, Realization};
use crate::tetgeom::{self, Six, VERTEX_EDGES};
use crate::triangulation::Triangulation;

const MAX_ITERATIONS: usize = 10_000;
const MAX_HALVINGS: usize = 60;
/// Steps stop this fraction of the way to the polytope boundary.
const BOUNDARY_FRACTION: f64 = 0.9;
/// Second differences above this count as concavity violations.
pub const CONCAVITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolumeReport {
    pub iterations: usize,
    /// Total relative volume at each accepted iterate, starting point first.
    pub objective: Vec<f64>,
    /// `∞`-norm of the projected gradient at the returned point.
    pub projected_gradient: f64,
    pub realization: Realization,
}

fn realize_near(tri: &Triangulation, angles: &[Six], guess: &[Six]) -> Result<Realization, AnglesError> {
    let lengths = angles
        .iter()
        .zip(guess)
        .enumerate()
        .map(|(tet, (a, g))| {
            tetgeom::lengths_from_angles_near(a, g).map_err(|source| AnglesError::Realization { tet, source })
        })
        .collect::<Result<_, _>>()?;
    Ok(summarize(tri, lengths))
}

/// Schläfli gradient `-x/2` projected onto the edge-sum-preserving subspace.
fn projected_gradient(tri: &Triangulation, lengths: &[Six]) -> Vec<Six> {
    let mut g: Vec<Six> = lengths.iter().map(|x| x.map(|v| -0.5 * v)).collect();
    project(tri, &mut g);
    g
}

fn project(tri: &Triangulation, v: &mut [Six]) {
    for class in tri.edge_classes() {
        let mean = class.corners.iter().map(|&(t, e)| v[t][e]).sum::<f64>() / class.valence() as f64;
        for &(t, e) in &class.corners {
            v[t][e] -= mean;
        }
    }
}

fn dot(a: &[Six], b: &[Six]) -> f64 {
    a.iter().zip(b).flat_map(|(u, v)| u.iter().zip(v).map(|(x, y)| x * y)).sum()
}

fn amax(a: &[Six]) -> f64 {
    a.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
}

fn axpy(x: &[Six], alpha: f64, d: &[Six]) -> Vec<Six> {
    x.iter().zip(d).map(|(a, b)| std::array::from_fn(|i| a[i] + alpha * b[i])).collect()
}

/// Largest `α` keeping `θ + α d` inside the closed angle polytope.
fn max_step(theta: &[Six], d: &[Six]) -> f64 {
    let mut alpha = f64::INFINITY;
    for (a, da) in theta.iter().zip(d) {
        for i in 0..6 {
            if da[i] < 0.0 {
                alpha = alpha.min(a[i] / -da[i]);
            }
        }
        for edges in VERTEX_EDGES {
            let rate: f64 = edges.iter().map(|&e| da[e]).sum();
            if rate > 0.0 {
                alpha = alpha.min((PI - edges.iter().map(|&e| a[e]).sum::<f64>()) / rate);
            }
        }
    }
    alpha
}

fn total_volume(angles: &[Six]) -> Result<f64, AnglesError> {
    angles
        .iter()
        .enumerate()
        .map(|(tet, a)| {
            tetgeom::schlafli_potential_of_angles(a).map_err(|source| AnglesError::Realization { tet, source })
        })
        .sum()
}

/// Projected gradient ascent of the total relative volume over the angle
/// structures of `start`'s triangulation.
///
/// A step is accepted once the directional derivative at the trial point is
/// still non-negative; by concavity the objective then did not decrease,
/// and the test does not depend on quadrature noise in the volume itself.
/// Step lengths come from Barzilai–Borwein and stay a fixed fraction inside
/// the polytope.
pub fn maximize_volume<'a>(
    start: &AngleAssignment<'a>,
    tol: f64,
) -> Result<(AngleAssignment<'a>, VolumeReport), AnglesError> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(AnglesError::Tolerance(tol));
    }
    let tri = start.triangulation();
    let mut theta = start.angles().to_vec();
    let mut real = realize_near(tri, &theta, &vec![[1.0; 6]; theta.len()])?;
    let mut d = projected_gradient(tri, &real.lengths);
    let mut objective = vec![total_volume(&theta)?];
    let mut alpha_guess = 1.0;
    let mut previous: Option<(Vec<Six>, Vec<Six>)> = None;

    for iteration in 0..MAX_ITERATIONS {
        let gradient = amax(&d);
        if gradient < tol {
            let assign = AngleAssignment::new(tri, theta)?;
            let report = VolumeReport { iterations: iteration, objective, projected_gradient: gradient, realization: real };
            return Ok((assign, report));
        }
        if let Some((theta_prev, d_prev)) = &previous {
            let s: Vec<Six> = theta.iter().zip(theta_prev).map(|(a, b)| std::array::from_fn(|i| a[i] - b[i])).collect();
            let y: Vec<Six> = d.iter().zip(d_prev).map(|(a, b)| std::array::from_fn(|i| a[i] - b[i])).collect();
            let curvature = -dot(&s, &y);
            if curvature > 0.0 {
                alpha_guess = dot(&s, &s) / curvature;
            }
        }
        let mut alpha = alpha_guess.min(BOUNDARY_FRACTION * max_step(&theta, &d));
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let trial = axpy(&theta, alpha, &d);
            if let Ok(trial_real) = realize_near(tri, &trial, &real.lengths) {
                let trial_d = projected_gradient(tri, &trial_real.lengths);
                if dot(&d, &trial_d) >= 0.0 {
                    accepted = Some((trial, trial_real, trial_d));
                    break;
                }
            }
            alpha *= 0.5;
        }
        let (trial, trial_real, trial_d) = accepted.ok_or(AnglesError::LineSearch { iteration })?;
        previous = Some((std::mem::replace(&mut theta, trial), std::mem::replace(&mut d, trial_d)));
        real = trial_real;
        objective.push(total_volume(&theta)?);
    }
    Err(AnglesError::NoConvergence { iterations: MAX_ITERATIONS, gradient: amax(&d) })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcavityReport {
    pub seed: u64,
    pub probes: usize,
    /// Largest `V(A) + V(B) - 2 V((A+B)/2)` seen; concavity makes it `<= 0`.
    pub max_second_difference: f64,
    pub violations: usize,
}

fn random_direction(tri: &Triangulation, rng: &mut ChaCha8Rng) -> Vec<Six> {
    let mut d: Vec<Six> =
        (0..tri.tet_count()).map(|_| std::array::from_fn(|_| rng.sample::<f64, _>(StandardNormal))).collect();
    project(tri, &mut d);
    d
}

fn random_chord_end(tri: &Triangulation, theta: &[Six], rng: &mut ChaCha8Rng) -> Vec<Six> {
    let d = random_direction(tri, rng);
    let reach = max_step(theta, &d).min(1.0);
    axpy(theta, rng.random_range(0.0..BOUNDARY_FRACTION) * reach, &d)
}

/// A seeded random angle structure on a chord through `base`, at most
/// `BOUNDARY_FRACTION` of the way to the polytope boundary.
pub fn random_structure<'a>(base: &AngleAssignment<'a>, seed: u64) -> Result<AngleAssignment<'a>, AnglesError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tri = base.triangulation();
    AngleAssignment::new(tri, random_chord_end(tri, base.angles(), &mut rng))
}

/// Checks midpoint concavity of the total relative volume on random chords
/// of the angle-structure polytope through `base`.
pub fn probe_volume_concavity(base: &AngleAssignment, probes: usize, seed: u64) -> Result<ConcavityReport, AnglesError> {
    let tri = base.triangulation();
    let theta = base.angles();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_second_difference = f64::NEG_INFINITY;
    let mut violations = 0;
    for _ in 0..probes {
        let a = random_chord_end(tri, theta, &mut rng);
        let b = random_chord_end(tri, theta, &mut rng);
        let mid: Vec<Six> = a.iter().zip(&b).map(|(u, v)| std::array::from_fn(|i| 0.5 * (u[i] + v[i]))).collect();
        let second = total_volume(&a)? + total_volume(&b)? - 2.0 * total_volume(&mid)?;
        if second > CONCAVITY_TOL {
            violations += 1;
        }
        max_second_difference = max_second_difference.max(second);
    }
    Ok(ConcavityReport { seed, probes, max_second_difference, violations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angles::lp_feasibility;
    use crate::triangulation::census_one_edge;

    #[test]
    fn symmetric_start_is_critical() {
        let tri = census_one_edge();
        let start = AngleAssignment::uniform(&tri, PI / 6.0).unwrap();
        let (_, report) = maximize_volume(&start, 1e-10).unwrap();
        assert_eq!(report.iterations, 0);
    }

    #[test]
    fn lp_witness_ascends_to_regular_structure() {
        let tri = census_one_edge();
        let start = lp_feasibility(&tri).witness.unwrap();
        let (end, report) = maximize_volume(&start, 1e-10).unwrap();
        assert!(report.realization.max_spread() < 1e-8);
        for a in end.angles().iter().flatten() {
            assert!((a - PI / 6.0).abs() < 1e-8);
        }
        for w in report.objective.windows(2) {
            assert!(w[1] >= w[0] - 1e-9);
        }
    }

    #[test]
    fn random_start_ascends_to_regular_structure() {
        let tri = census_one_edge();
        let base = AngleAssignment::uniform(&tri, PI / 6.0).unwrap();
        for seed in 0..5 {
            let start = random_structure(&base, seed).unwrap();
            let (end, report) = maximize_volume(&start, 1e-10).unwrap();
            assert!(report.iterations > 0);
            assert!(report.realization.max_spread() < 1e-8);
            for a in end.angles().iter().flatten() {
                assert!((a - PI / 6.0).abs() < 1e-8);
            }
            for w in report.objective.windows(2) {
                assert!(w[1] >= w[0] - 1e-9);
            }
        }
    }

    #[test]
    fn concavity_holds_on_census() {
        let tri = census_one_edge();
        let base = AngleAssignment::uniform(&tri, PI / 6.0).unwrap();
        let r = probe_volume_concavity(&base, 20, 3).unwrap();
        assert_eq!(r.violations, 0);
        assert!(r.max_second_difference <= CONCAVITY_TOL);
    }
}
