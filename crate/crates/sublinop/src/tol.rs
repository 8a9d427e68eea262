//! Centralized numerical tolerances.
//!
//! Every tolerance that appears in a contract (constructor invariant,
//! classification threshold, convergence criterion) lives here so that the
//! value asserted by tests is the value the code runs with.

/// Relative off-diagonal Frobenius threshold for Jacobi convergence.
pub const EIGH_OFFDIAG_REL: f64 = 1e-12;

/// Sweep cap for the cyclic Jacobi eigensolver.
pub const EIGH_MAX_SWEEPS: usize = 100;

/// Relative tolerance for majorization partial-sum and total-sum checks,
/// scaled by (1 + |sum of the majorizing vector|).
pub const MAJORIZE_REL: f64 = 1e-10;

/// Eigenvalue threshold separating NotElliptic / DegenerateElliptic
/// / UniformlyElliptic and the non-degeneracy trace test.
pub const ELLIPTIC_EIG: f64 = 1e-10;

/// Cone membership: inside iff residual <= CONE_TOL * (1 + ||X||).
pub const CONE_TOL: f64 = 1e-8;

/// NNLS termination: projected gradient norm <= NNLS_PG * (1 + ||X||).
pub const NNLS_PG: f64 = 1e-12;

/// Deduplication tolerance for orbit generator vectors and matrix
/// representatives (componentwise).
pub const DEDUP: f64 = 1e-10;

/// alpha <= 1 + P_INFINITE_ALPHA maps to p = infinity.
pub const P_INFINITE_ALPHA: f64 = 1e-12;

/// Step-size floor terminating the Ball-body projected gradient descent.
pub const BALL_STEP_MIN: f64 = 1e-12;

/// |p - n| threshold selecting the logarithmic fundamental solution branch.
pub const FUNDSOL_LOG_BRANCH: f64 = 1e-9;

/// Positive-definiteness floor for ellipsoid rule shape matrices.
pub const RULE_PD_MIN: f64 = 1e-12;

/// Minimum node count for an ellipsoid quadrature rule.
pub const RULE_MIN_NODES: usize = 200;
