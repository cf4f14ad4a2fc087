//! Adaptive Gauss–Legendre quadrature.

use std::sync::OnceLock;

const ORDER: usize = 20;
const MAX_DEPTH: u32 = 25;
/// Differences below this many ulps of the estimate are roundoff, not truncation error.
const ROUNDOFF_ULPS: f64 = 64.0;

/// Nodes and weights of the `ORDER`-point Gauss–Legendre rule on `[-1, 1]`.
fn rule() -> &'static ([f64; ORDER], [f64; ORDER]) {
    static RULE: OnceLock<([f64; ORDER], [f64; ORDER])> = OnceLock::new();
    RULE.get_or_init(|| {
        let mut nodes = [0.0; ORDER];
        let mut weights = [0.0; ORDER];
        let n = ORDER as f64;
        for i in 0..ORDER {
            // Chebyshev-like initial guess for the i-th root, then Newton.
            let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, z);
                for k in 2..=ORDER {
                    let k = k as f64;
                    let p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n * (z * p1 - p0) / (z * z - 1.0);
                let dz = p1 / dp;
                z -= dz;
                if dz.abs() < 1e-16 {
                    break;
                }
            }
            nodes[i] = z;
            weights[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        }
        (nodes, weights)
    })
}

fn fixed<F, E>(f: &mut F, a: f64, b: f64) -> Result<f64, E>
where
    F: FnMut(f64) -> Result<f64, E>,
{
    let (nodes, weights) = rule();
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    let mut sum = 0.0;
    // Ascending node order keeps evaluation order monotone along the interval.
    for i in (0..ORDER).rev() {
        sum += weights[i] * f(mid + half * nodes[i])?;
    }
    Ok(half * sum)
}

/// Integrates `f` over `[a, b]` to absolute tolerance `tol` by recursive
/// bisection. `f` may fail; the first error aborts the integration.
pub fn integrate<F, E>(mut f: F, a: f64, b: f64, tol: f64) -> Result<f64, E>
where
    F: FnMut(f64) -> Result<f64, E>,
{
    let whole = fixed(&mut f, a, b)?;
    refine(&mut f, a, b, whole, tol, 0)
}

fn refine<F, E>(f: &mut F, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> Result<f64, E>
where
    F: FnMut(f64) -> Result<f64, E>,
{
    let mid = 0.5 * (a + b);
    let left = fixed(f, a, mid)?;
    let right = fixed(f, mid, b)?;
    let diff = (left + right - whole).abs();
    if diff <= tol || diff <= ROUNDOFF_ULPS * f64::EPSILON * (left + right).abs() || depth >= MAX_DEPTH {
        return Ok(left + right);
    }
    Ok(refine(f, a, mid, left, 0.5 * tol, depth + 1)? + refine(f, mid, b, right, 0.5 * tol, depth + 1)?)
}
