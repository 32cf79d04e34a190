//! Centralized tolerance constants. Every threshold used by the library and
//! its validation suite lives here; nothing is tuned ad hoc at call sites.

/// Orthonormality / algebraic-identity tolerance for exact f64 operations.
pub const ORTHO_TOL: f64 = 1e-12;

/// Tolerance for oracle comparisons that accumulate a few extra roundings
/// (matrix-exponential series, Cramer vs. projected-wrench routes, ...).
pub const ORACLE_TOL: f64 = 1e-10;

/// Joint angles whose sine falls below this are treated as singular.
pub const SINGULARITY_TOL: f64 = 1e-9;

/// Closure residual accepted for a solved loop configuration.
pub const CLOSURE_TOL: f64 = 1e-10;

/// Articulated inertia felt by an actuator must exceed this to be invertible.
pub const DEGENERATE_ALPHA: f64 = 1e-12;

/// |det A| below this is reported as a singular constraint system.
pub const DET_TOL: f64 = 1e-12;

/// Unit-screw deviation accepted when building joints.
pub const SCREW_TOL: f64 = 1e-9;

/// Mean round-trip acceleration error accepted for a single-loop mechanism
/// [m/s^2].
pub const ROUND_TRIP_MEAN_1DOF: f64 = 1e-10;

/// Max round-trip acceleration error accepted for a single-loop mechanism.
pub const ROUND_TRIP_MAX_1DOF: f64 = 1e-8;

/// Mean summed round-trip error accepted for a multi-module chain.
pub const ROUND_TRIP_MEAN_CHAIN: f64 = 1e-9;

/// Equivalence of the two scalar forward-dynamics forms.
pub const FD_FORM_TOL: f64 = 1e-12;

/// Assembled base wrench vs. direct four-wrench summation.
pub const WRENCH_EQUIV_TOL: f64 = 1e-10;

/// Dense mass-matrix solve vs. recursive forward dynamics.
pub const MASS_MATRIX_FD_TOL: f64 = 1e-9;

/// Generalized mass-matrix symmetry.
pub const MASS_MATRIX_SYM_TOL: f64 = 1e-8;

/// Relative energy drift allowed for an unforced RK4 run at step 1e-4 s.
pub const ENERGY_DRIFT_TOL: f64 = 1e-5;
