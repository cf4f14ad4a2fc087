use nalgebra::Vector6;

use super::shape::forward;
use super::{check_angles, ShapeError, Six};
use crate::tolerances::{NEWTON_MAX_ITER, NEWTON_RESIDUAL};

/// When no backtracked step reduces the residual, it is accepted below
/// `(STALL_FACTOR · NEWTON_RESIDUAL + ROUNDOFF_ULPS · ε · cosh²(max x))`
/// times the acos error amplification at the worst corner.
const STALL_FACTOR: f64 = 100.0;
const ROUNDOFF_ULPS: f64 = 64.0;

/// Edge lengths of the hyperideal tetrahedron with dihedral angles `a`.
///
/// Damped Newton iteration on `a(x) - a` from the all-ones shape.
pub fn lengths_from_angles(a: &Six) -> Result<Six, ShapeError> {
    lengths_from_angles_near(a, &[1.0; 6])
}

/// As [`lengths_from_angles`], starting from `guess`. Falls back to the
/// all-ones start if `guess` is not an admissible length vector.
pub fn lengths_from_angles_near(a: &Six, guess: &Six) -> Result<Six, ShapeError> {
    check_angles(a)?;
    let target = Vector6::from_column_slice(a);
    let start = if forward(guess, false).is_ok() { *guess } else { [1.0; 6] };

    let mut x = Vector6::from_column_slice(&start);
    let mut current = forward(&start, true)?;
    let mut residual = Vector6::from_column_slice(&current.angles) - target;

    for iteration in 0..NEWTON_MAX_ITER {
        if residual.amax() < NEWTON_RESIDUAL {
            return Ok(polish(x, residual, &target));
        }
        let jac = current.jac.expect("jacobian requested");
        let step = match jac.cholesky() {
            Some(ch) => ch.solve(&(-residual)),
            None => jac.lu().solve(&(-residual)).ok_or(ShapeError::NewtonFailed {
                iterations: 0,
                residual: residual.amax(),
            })?,
        };
        let norm = residual.norm();
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let trial = x + step * lambda;
            let trial_arr: Six = trial.into();
            if let Ok(eval) = forward(&trial_arr, true) {
                let r = Vector6::from_column_slice(&eval.angles) - target;
                if r.norm() < norm {
                    x = trial;
                    current = eval;
                    residual = r;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            // Stalled on rounding noise: the forward map cancels terms of size
            // cosh² of the longest edge, and acos amplifies the quotient's
            // error by 1/sqrt(1 - q²) ≈ 1/sqrt(2 · margin).
            let cosh_max = x.amax().cosh();
            let amplification = 1.0 / (2.0 * current.margin.quotient.max(f64::EPSILON)).sqrt();
            let floor = (STALL_FACTOR * NEWTON_RESIDUAL + ROUNDOFF_ULPS * f64::EPSILON * cosh_max * cosh_max)
                * amplification.max(1.0);
            if residual.amax() < floor {
                return Ok(x.into());
            }
            return Err(ShapeError::NewtonFailed { iterations: iteration, residual: residual.amax() });
        }
    }
    if residual.amax() < NEWTON_RESIDUAL {
        return Ok(polish(x, residual, &target));
    }
    Err(ShapeError::NewtonFailed { iterations: NEWTON_MAX_ITER, residual: residual.amax() })
}

/// A couple of extra full Newton steps, kept only while they reduce the residual.
fn polish(mut x: Vector6<f64>, mut residual: Vector6<f64>, target: &Vector6<f64>) -> Six {
    for _ in 0..2 {
        let xa: Six = x.into();
        let Ok(eval) = forward(&xa, true) else { break };
        let jac = eval.jac.expect("requested");
        let Some(ch) = jac.cholesky() else { break };
        let trial = x + ch.solve(&(-residual));
        let Ok(next) = forward(&trial.into(), false) else { break };
        let r = Vector6::from_column_slice(&next.angles) - target;
        if r.norm() >= residual.norm() {
            break;
        }
        x = trial;
        residual = r;
    }
    x.into()
}
