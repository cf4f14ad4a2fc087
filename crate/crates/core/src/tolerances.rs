//! Fixed numerical tolerances shared by the library and its test suites.

/// Cosine quotients closer than this to ±1 count as degenerate.
pub const DEGENERATE_QUOTIENT: f64 = 1e-9;

/// Maximum disagreement between the two endpoint computations of one dihedral angle.
pub const ENDPOINT_AGREEMENT: f64 = 1e-8;

/// Asymmetry allowed in Jacobians that are symmetric in exact arithmetic.
pub const SYMMETRY: f64 = 1e-8;

/// Angle agreement between the trigonometric pipeline and the Minkowski oracle.
pub const ORACLE_AGREEMENT: f64 = 1e-9;

/// Absolute tolerance of the adaptive Gauss–Legendre quadrature.
pub const QUADRATURE: f64 = 1e-10;

/// Angle residual (∞-norm) at which the lengths-from-angles Newton solve stops.
pub const NEWTON_RESIDUAL: f64 = 1e-12;

/// Iteration cap of the lengths-from-angles Newton solve.
pub const NEWTON_MAX_ITER: usize = 200;

/// Step used by central finite-difference checks.
pub const FD_STEP: f64 = 1e-5;

/// Entrywise tolerance of finite-difference Jacobian checks.
pub const FD_JACOBIAN: f64 = 1e-6;

/// Relative singular-value floor certifying local rigidity.
pub const RIGIDITY_RATIO: f64 = 1e-12;
