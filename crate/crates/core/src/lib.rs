//! Recursive forward and inverse dynamics for parallel-serial manipulators:
//! serial chains of 1-DoF modules where each module is either a linearly
//! actuated four-joint closed loop or a plain prismatic/revolute joint.
//!
//! The closed loop's dynamics collapse analytically to one scalar per module
//! (no numeric constraint solve), so chain forward dynamics runs in three
//! O(n) recursive sweeps. An independent analytic inverse dynamics (Cramer
//! solve of the loop's internal force balance) provides the validation
//! oracle: `FD(x, xdot, ID(x, xdot, xddot)) = xddot` to near machine
//! precision.
//!
//! Everything numeric is generic over the scalar type via [`real::Real`];
//! `f64` aliases for the common types live at the crate root.

pub mod assembly;
pub mod closed_loop;
pub mod error;
pub mod model_io;
pub mod opcount;
pub mod real;
pub mod simulate;
pub mod solver;
pub mod spatial;
pub mod tol;
pub mod trajectory;
pub mod validation;

pub use error::DynamicsError;
pub use real::{real, Real};

/// Concrete `f64` aliases for the working types.
pub type MotionVector64 = spatial::SpatialMotionVector<f64>;
pub type ForceVector64 = spatial::SpatialForceVector<f64>;
pub type Transform64 = spatial::SpatialTransform<f64>;
pub type Inertia64 = spatial::SpatialInertia<f64>;
pub type ParallelParams64 = closed_loop::ParallelModuleParams<f64>;
pub type SerialParams64 = assembly::SerialModuleParams<f64>;
pub type Model64 = solver::ManipulatorModel<f64>;
pub type State64 = solver::ActuatorState<f64>;
