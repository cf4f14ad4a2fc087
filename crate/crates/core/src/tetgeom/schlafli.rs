//! Relative volume through the Schläfli formula `dV = -1/2 Σ x_i da_i`.
//!
//! The 1-form is closed on the (convex) polytope of dihedral angles, so its
//! integral from a fixed reference shape defines the volume up to one
//! additive constant. Every derivative of that potential is exact.

use super::inverse::lengths_from_angles_near;
use super::shape::{angles_from_lengths, regular_angle};
use super::{check_angles, ShapeError, Six};
use crate::quadrature;
use crate::tolerances::QUADRATURE;

/// Angles of the regular tetrahedron with all lengths 1; the potential's zero.
pub fn reference_angles() -> Six {
    [regular_angle(1.0); 6]
}

/// `-1/2 ∫ Σ x_i(a) da_i` along the straight segment from `from` to `to`.
pub fn schlafli_segment(from: &Six, to: &Six) -> Result<f64, ShapeError> {
    schlafli_segment_from(from, to, &[1.0; 6])
}

/// As [`schlafli_segment`], with `x_from` (the lengths at `from`, or any
/// nearby admissible lengths) seeding the inversions along the segment.
/// Near degeneration a seed from the all-ones shape may not converge.
pub fn schlafli_segment_from(from: &Six, to: &Six, x_from: &Six) -> Result<f64, ShapeError> {
    check_angles(from)?;
    check_angles(to)?;
    let delta: Six = std::array::from_fn(|i| to[i] - from[i]);
    if delta.iter().all(|&d| d == 0.0) {
        return Ok(0.0);
    }
    let mut guess = *x_from;
    quadrature::integrate(
        |s| {
            let a: Six = std::array::from_fn(|i| from[i] + s * delta[i]);
            let x = lengths_from_angles_near(&a, &guess)?;
            guess = x;
            Ok(-0.5 * x.iter().zip(&delta).map(|(xi, di)| xi * di).sum::<f64>())
        },
        0.0,
        1.0,
        QUADRATURE,
    )
}

/// Relative volume as a function of dihedral angles.
pub fn schlafli_potential_of_angles(a: &Six) -> Result<f64, ShapeError> {
    schlafli_segment(&reference_angles(), a)
}

/// Relative volume of the tetrahedron with edge lengths `x`; zero at the
/// all-ones shape.
pub fn schlafli_potential(x: &Six) -> Result<f64, ShapeError> {
    let a = angles_from_lengths(x)?;
    schlafli_potential_of_angles(&a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn reference_shape_has_zero_potential() {
        assert_eq!(schlafli_potential(&[1.0; 6]).unwrap(), 0.0);
    }

    #[test]
    fn regular_family_matches_one_dimensional_integral() {
        // Along the regular family V(a) = -3 ∫ x(a) da with x(a) in closed form.
        let a1 = PI / 6.0;
        let a0 = regular_angle(1.0);
        let oracle = {
            let n = 2000;
            let h = (a1 - a0) / n as f64;
            let g = |a: f64| -3.0 * super::super::regular_length_for_angle(a);
            let mut s = g(a0) + g(a1);
            for k in 1..n {
                s += g(a0 + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
            }
            s * h / 3.0
        };
        let v = schlafli_potential_of_angles(&[a1; 6]).unwrap();
        assert!((v - oracle).abs() < 1e-10, "{v} vs {oracle}");
        // Shrinking the angles grows the volume.
        assert!(v > 0.0);
    }
}
