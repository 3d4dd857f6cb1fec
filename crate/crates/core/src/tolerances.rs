//! Numerical thresholds shared across modules.

/// Relative threshold below which lengths and areas count as degenerate.
pub const DEGENERATE_REL: f64 = 1e-14;

/// Relative tolerance for the area partition invariant of a mesh.
pub const AREA_PARTITION_REL: f64 = 1e-12;

/// Relative tolerance (in units of |σ|) for orthogonality conditions.
pub const ORTHOGONALITY_REL: f64 = 1e-10;

/// Residual factor required from every linear solve.
pub const SOLVE_RESIDUAL_REL: f64 = 1e-10;

/// Relative pivot threshold for the Cholesky-based definiteness test.
pub const SPD_PIVOT_REL: f64 = 1e-14;

/// Relative pivot threshold for small dense local systems.
pub const LOCAL_PIVOT_REL: f64 = 1e-12;

/// Default Picard increment tolerance.
pub const PICARD_TOL: f64 = 1e-8;

/// Relative residual of the self-frozen system required on top of the increment test.
pub const PICARD_RESIDUAL_REL: f64 = 1e-12;

/// Default Picard iteration cap.
pub const PICARD_MAXIT: usize = 200;

/// Off-diagonal entries above `M_MATRIX_OFFDIAG_REL * max|a_ij|` break the sign pattern.
pub const M_MATRIX_OFFDIAG_REL: f64 = 1e-13;

/// Threshold for conservativity and balance residuals.
pub const FLUX_LAW_TOL: f64 = 1e-9;

/// Tolerance for discrete minimum/maximum principle checks.
pub const MINMAX_TOL: f64 = 1e-10;

/// Relative convergence tolerance of the smallest eigenvalue estimate.
pub const EIG_TOL: f64 = 1e-8;

/// Residual threshold for the PDE self-check of manufactured cases.
pub const PDE_RESIDUAL_TOL: f64 = 1e-8;

/// Strict positivity margin for nonlinear correction coefficients.
pub const CORRECTION_EPS_REL: f64 = 1e-12;
