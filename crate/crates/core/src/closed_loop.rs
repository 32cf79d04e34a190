//! The linearly actuated four-joint closed loop: closure geometry, constraint
//! coefficients, loop kinematics, the projected K-matrices and the analytic
//! (Cramer) inverse dynamics.
//!
//! The loop is planar in each module's local x-y plane. Three passive
//! revolute joints (`q` at the boom pivot B1, `q1` at the cylinder-foot pivot
//! B3, `q2` at the tip pin T2) close around one prismatic actuator (extension
//! `x` at B4, axis along local x). Frame layout, with `x0 = lc + lc0`:
//!
//! ```text
//! pose of B1 in Bc:  Rz(pi + q)                      (boom pivot at the base origin)
//! pose of T1 in B1:  translate(l1, 0, 0)             (tip pin at the boom end)
//! pose of B3 in Bc:  translate(l, 0, 0) . Rz(pi + q1)
//! pose of B4 in B3:  translate(lc0 + x, 0, 0)        (prismatic joint)
//! pose of P  in B4:  translate(lc, 0, 0)             (rod head = tip pin location)
//! pose of T2 in P:   Rz(q2)
//! ```
//!
//! All three passive angles are negative in the assembled branch and satisfy
//! `q = q1 + q2`; the upper (Bc-B1-T1) and lower (Bc-B3-B4-T2) chains meet at
//! the shared tip frame exactly. Five bodies attach to Bc, B1, B3, B4 and E.

use nalgebra::{Matrix3, Matrix6, SMatrix, Vector3};

use crate::error::DynamicsError;
use crate::real::{real, Real};
use crate::spatial::{
    wrench_bias, SpatialForceVector, SpatialInertia, SpatialMotionVector, SpatialTransform,
};
use crate::tol;

/// Geometric and inertial description of one parallel (closed-loop) module.
///
/// Lengths map to the model-file keys `l`, `l1`, `lc`, `lc0`.
#[derive(Clone, Debug)]
pub struct ParallelModuleParams<T: Real> {
    /// Distance between the boom pivot and the cylinder-foot pivot (`l`).
    pub base_span: T,
    /// Boom pivot to tip pin (`l1`).
    pub boom_length: T,
    /// Actuator frame to tip pin along the actuator axis (`lc`).
    pub rod_length: T,
    /// Cylinder-foot pivot to actuator frame at zero extension (`lc0`).
    pub cylinder_offset: T,
    /// Pose of the payload frame E in the tip frame T1.
    pub tip_offset: SpatialTransform<T>,
    /// Body attached to the base frame Bc.
    pub body_base: SpatialInertia<T>,
    /// Body attached to the boom frame B1.
    pub body_boom: SpatialInertia<T>,
    /// Body attached to the cylinder frame B3.
    pub body_cylinder: SpatialInertia<T>,
    /// Body attached to the actuator frame B4.
    pub body_rod: SpatialInertia<T>,
    /// Body attached to the payload frame E.
    pub body_tip: SpatialInertia<T>,
}

impl<T: Real> ParallelModuleParams<T> {
    /// Closure offset `x0 = lc + lc0`: actuator length at zero extension.
    pub fn retracted_length(&self) -> T {
        self.rod_length + self.cylinder_offset
    }

    /// Open interval of extensions `x` with a valid, non-degenerate closure
    /// triangle (intersected with `x >= 0`).
    pub fn actuator_range(&self) -> (T, T) {
        let x0 = self.retracted_length();
        let lo = ((self.base_span - self.boom_length).abs() - x0).max(T::zero());
        let hi = self.base_span + self.boom_length - x0;
        (lo, hi)
    }
}

/// Solved loop configuration: actuator extension, passive angles, rate and
/// the six constraint coefficients.
#[derive(Clone, Copy, Debug)]
pub struct ClosureState<T: Real> {
    /// Actuator extension [m], `x >= 0`.
    pub x: T,
    /// Boom pivot angle [rad], in (-pi, 0).
    pub q: T,
    /// Cylinder-foot pivot angle [rad], in (-pi, 0).
    pub q1: T,
    /// Tip pin angle [rad], in (-pi, 0).
    pub q2: T,
    /// Actuator rate [m/s].
    pub xdot: T,
    /// `k1..k3` map the actuator rate to passive rates, `k4..k6` are the
    /// rate-dependent acceleration terms `k4 = dk1/dt * xdot`, etc.
    pub k: [T; 6],
    /// Law-of-cosines closure residual of the accepted state.
    pub residual: T,
}

impl<T: Real> ClosureState<T> {
    pub fn qdot(&self) -> T {
        self.k[0] * self.xdot
    }
    pub fn q1dot(&self) -> T {
        self.k[1] * self.xdot
    }
    pub fn q2dot(&self) -> T {
        self.k[2] * self.xdot
    }
}

fn guard_sines<T: Real>(q: T, q1: T, q2: T) -> Result<(), DynamicsError> {
    let tol = real(tol::SINGULARITY_TOL);
    for (name, angle) in [("q", q), ("q1", q1), ("q2", q2)] {
        if angle.sin().abs() < tol {
            return Err(DynamicsError::singular(format!(
                "passive joint {name} at a kinematic singularity (sin {name} ~ 0)"
            )));
        }
    }
    Ok(())
}

/// Solve the closure constraints from the boom angle `q` (negative branch).
pub fn solve_closure<T: Real>(
    params: &ParallelModuleParams<T>,
    q: T,
    xdot: T,
) -> Result<ClosureState<T>, DynamicsError> {
    if q >= T::zero() || q <= -T::pi() {
        return Err(DynamicsError::unreachable(
            "boom angle q must lie in (-pi, 0) for the assembled branch",
        ));
    }
    let (l, l1) = (params.base_span, params.boom_length);
    let x0 = params.retracted_length();
    let two: T = real(2.0);
    let len_sq = l * l + l1 * l1 + two * l * l1 * q.cos();
    if len_sq <= T::zero() {
        return Err(DynamicsError::unreachable(
            "degenerate closure triangle (zero actuator length)",
        ));
    }
    let x = len_sq.sqrt() - x0;
    finish_closure(params, x, q, xdot)
}

/// Solve the closure constraints from the actuator extension `x`.
pub fn solve_closure_from_x<T: Real>(
    params: &ParallelModuleParams<T>,
    x: T,
    xdot: T,
) -> Result<ClosureState<T>, DynamicsError> {
    if x < T::zero() {
        return Err(DynamicsError::unreachable(
            "actuator extension x must be non-negative",
        ));
    }
    let (l, l1) = (params.base_span, params.boom_length);
    let x0 = params.retracted_length();
    let two: T = real(2.0);
    let xs = x + x0;
    let cos_q = (xs * xs - l * l - l1 * l1) / (two * l * l1);
    if cos_q.abs() > T::one() {
        return Err(DynamicsError::unreachable(format!(
            "extension outside the closure range (|cos q| = {:.6} > 1)",
            to_f64(cos_q.abs())
        )));
    }
    let q = -cos_q.acos();
    finish_closure(params, x, q, xdot)
}

fn to_f64<T: Real>(v: T) -> f64 {
    num_traits::ToPrimitive::to_f64(&v).unwrap_or(f64::NAN)
}

fn finish_closure<T: Real>(
    params: &ParallelModuleParams<T>,
    x: T,
    q: T,
    xdot: T,
) -> Result<ClosureState<T>, DynamicsError> {
    let (l, l1) = (params.base_span, params.boom_length);
    let x0 = params.retracted_length();
    let two: T = real(2.0);
    let xs = x + x0;
    if x < T::zero() {
        return Err(DynamicsError::unreachable(
            "closure solution has negative actuator extension",
        ));
    }
    let arg1 = (l1 * l1 - xs * xs - l * l) / (-two * xs * l);
    let arg2 = (l * l - xs * xs - l1 * l1) / (-two * xs * l1);
    if arg1.abs() > T::one() || arg2.abs() > T::one() {
        return Err(DynamicsError::unreachable(
            "closure triangle violates the arccos domain",
        ));
    }
    let q1 = -arg1.acos();
    let q2 = -arg2.acos();
    guard_sines(q, q1, q2)?;

    // law-of-cosines residual, independent of the q2 expression used above
    let residual = (l * l - (xs * xs + l1 * l1 - two * xs * l1 * q2.cos())).abs();
    if residual > real(tol::CLOSURE_TOL) {
        return Err(DynamicsError::unreachable(
            "closure residual exceeds tolerance",
        ));
    }

    let k = constraint_coefficients(params, x, q, q1, q2, xdot);
    Ok(ClosureState {
        x,
        q,
        q1,
        q2,
        xdot,
        k,
        residual,
    })
}

/// First-order constraint coefficients `k1..k3` and their rate terms
/// `k4..k6 = dk_i/dt * xdot`. The time derivatives are taken analytically
/// along the constraint manifold (`dq/dx = k1`, `dq1/dx = k2`, `dq2/dx = k3`).
pub fn constraint_coefficients<T: Real>(
    params: &ParallelModuleParams<T>,
    x: T,
    q: T,
    q1: T,
    q2: T,
    xdot: T,
) -> [T; 6] {
    let (l, l1) = (params.base_span, params.boom_length);
    let xs = x + params.retracted_length();

    let k1 = -xs / (l * l1 * q.sin());
    let k2 = -(xs - l * q1.cos()) / (xs * l * q1.sin());
    let k3 = -(xs - l1 * q2.cos()) / (xs * l1 * q2.sin());

    // dk1/dx = d/dx + d/dq * k1
    let dk1 = -T::one() / (l * l1 * q.sin()) + xs * q.cos() / (l * l1 * q.sin() * q.sin()) * k1;

    // k2 = n2 / d2 with n2 = -(xs - l cos q1), d2 = xs l sin q1
    let n2 = -(xs - l * q1.cos());
    let d2 = xs * l * q1.sin();
    let dk2_dx = (-d2 - n2 * l * q1.sin()) / (d2 * d2);
    let dk2_dq1 = (-l * q1.sin() * d2 - n2 * xs * l * q1.cos()) / (d2 * d2);
    let dk2 = dk2_dx + dk2_dq1 * k2;

    let n3 = -(xs - l1 * q2.cos());
    let d3 = xs * l1 * q2.sin();
    let dk3_dx = (-d3 - n3 * l1 * q2.sin()) / (d3 * d3);
    let dk3_dq2 = (-l1 * q2.sin() * d3 - n3 * xs * l1 * q2.cos()) / (d3 * d3);
    let dk3 = dk3_dx + dk3_dq2 * k3;

    let xd2 = xdot * xdot;
    [k1, k2, k3, dk1 * xd2, dk2 * xd2, dk3 * xd2]
}

// ---------------------------------------------------------------------------
// frames
// ---------------------------------------------------------------------------

/// Coordinate maps between the loop frames at one configuration, plus the
/// poses needed for world-space kinematics.
#[derive(Clone, Debug)]
pub struct LoopFrames<T: Real> {
    /// Map from base coordinates to boom coordinates (`G_B1^B0`).
    pub b1_from_bc: SpatialTransform<T>,
    /// Map from boom coordinates to payload coordinates (`G_E^B1`).
    pub e_from_b1: SpatialTransform<T>,
    /// Map from boom coordinates to tip-pin coordinates (`G_T1^B1`).
    pub t1_from_b1: SpatialTransform<T>,
    /// Map from base coordinates to cylinder coordinates (`G_B3^B2`).
    pub b3_from_bc: SpatialTransform<T>,
    /// Map from cylinder coordinates to actuator coordinates (`G_B4^B3`).
    pub b4_from_b3: SpatialTransform<T>,
    /// Map from base coordinates to actuator coordinates (`G_B4^B2`).
    pub b4_from_bc: SpatialTransform<T>,
    /// Map from actuator coordinates to tip-pin coordinates (`G_T2^B4`).
    pub t2_from_b4: SpatialTransform<T>,
    /// Poses (frame-in-base) for forward kinematics.
    pub pose_b1_in_bc: SpatialTransform<T>,
    pub pose_b3_in_bc: SpatialTransform<T>,
    pub pose_b4_in_bc: SpatialTransform<T>,
    pub pose_e_in_bc: SpatialTransform<T>,
}

/// Build all loop frames for a solved configuration.
pub fn loop_frames<T: Real>(
    params: &ParallelModuleParams<T>,
    state: &ClosureState<T>,
) -> LoopFrames<T> {
    let pose_b1_in_bc = SpatialTransform::rotation_z(T::pi() + state.q);
    let pose_t1_in_b1 =
        SpatialTransform::from_translation(Vector3::new(params.boom_length, T::zero(), T::zero()));
    let pose_e_in_b1 = pose_t1_in_b1.compose(&params.tip_offset);
    let pose_b3_in_bc =
        SpatialTransform::from_translation(Vector3::new(params.base_span, T::zero(), T::zero()))
            .compose(&SpatialTransform::rotation_z(T::pi() + state.q1));
    let pose_b4_in_b3 = SpatialTransform::from_translation(Vector3::new(
        params.cylinder_offset + state.x,
        T::zero(),
        T::zero(),
    ));
    let pose_t2_in_b4 =
        SpatialTransform::from_translation(Vector3::new(params.rod_length, T::zero(), T::zero()))
            .compose(&SpatialTransform::rotation_z(state.q2));
    let pose_b4_in_bc = pose_b3_in_bc.compose(&pose_b4_in_b3);

    LoopFrames {
        b1_from_bc: pose_b1_in_bc.inverse(),
        e_from_b1: pose_e_in_b1.inverse(),
        t1_from_b1: pose_t1_in_b1.inverse(),
        b3_from_bc: pose_b3_in_bc.inverse(),
        b4_from_b3: pose_b4_in_b3.inverse(),
        b4_from_bc: pose_b4_in_bc.inverse(),
        t2_from_b4: pose_t2_in_b4.inverse(),
        pose_e_in_bc: pose_b1_in_bc.compose(&pose_e_in_b1),
        pose_b1_in_bc,
        pose_b3_in_bc,
        pose_b4_in_bc,
    }
}

// ---------------------------------------------------------------------------
// loop kinematics
// ---------------------------------------------------------------------------

/// Spatial accelerations of the loop frames for a known base acceleration
/// and actuator acceleration.
#[derive(Clone, Copy, Debug)]
pub struct LoopAccelerations<T: Real> {
    pub xddot: T,
    pub dnu_b1: SpatialMotionVector<T>,
    pub dnu_e: SpatialMotionVector<T>,
    pub dnu_b3: SpatialMotionVector<T>,
    pub dnu_b4: SpatialMotionVector<T>,
    pub dnu_t1: SpatialMotionVector<T>,
    pub dnu_t2: SpatialMotionVector<T>,
}

/// Twists, acceleration biases and wrench biases of the loop, with the
/// acceleration level filled in when the inputs are known.
#[derive(Clone, Debug)]
pub struct LoopKinematics<T: Real> {
    pub frames: LoopFrames<T>,
    pub nu_b1: SpatialMotionVector<T>,
    pub nu_e: SpatialMotionVector<T>,
    pub nu_b3: SpatialMotionVector<T>,
    pub nu_b4: SpatialMotionVector<T>,
    pub nu_t1: SpatialMotionVector<T>,
    pub nu_t2: SpatialMotionVector<T>,
    /// Acceleration biases `c_i = ad_{nu_i} s_i qdot_i`.
    pub c_b1: SpatialMotionVector<T>,
    pub c_b3: SpatialMotionVector<T>,
    pub c_b4: SpatialMotionVector<T>,
    pub c_t2: SpatialMotionVector<T>,
    /// Wrench biases `p_i = -ad*_{nu_i} M_i nu_i`.
    pub p_b0: SpatialForceVector<T>,
    pub p_b1: SpatialForceVector<T>,
    pub p_b3: SpatialForceVector<T>,
    pub p_b4: SpatialForceVector<T>,
    pub p_e: SpatialForceVector<T>,
    pub accel: Option<LoopAccelerations<T>>,
}

/// Twist/bias recursion over both chains of the loop; accelerations are
/// filled in when `(dnu_bc, xddot)` is provided.
pub fn loop_kinematics<T: Real>(
    params: &ParallelModuleParams<T>,
    state: &ClosureState<T>,
    nu_bc: &SpatialMotionVector<T>,
    accel_input: Option<(&SpatialMotionVector<T>, T)>,
) -> LoopKinematics<T> {
    let frames = loop_frames(params, state);
    let s_z = SpatialMotionVector::revolute_z();
    let s_x = SpatialMotionVector::prismatic_x();

    let (qd, q1d, q2d) = (state.qdot(), state.q1dot(), state.q2dot());
    let nu_b1 = frames.b1_from_bc.act_motion(nu_bc) + s_z * qd;
    let nu_e = frames.e_from_b1.act_motion(&nu_b1);
    let nu_t1 = frames.t1_from_b1.act_motion(&nu_b1);
    let nu_b3 = frames.b3_from_bc.act_motion(nu_bc) + s_z * q1d;
    let nu_b4 = frames.b4_from_b3.act_motion(&nu_b3) + s_x * state.xdot;
    let nu_t2 = frames.t2_from_b4.act_motion(&nu_b4) + s_z * q2d;

    let c_b1 = nu_b1.bracket(&s_z) * qd;
    let c_b3 = nu_b3.bracket(&s_z) * q1d;
    let c_b4 = nu_b4.bracket(&s_x) * state.xdot;
    let c_t2 = nu_t2.bracket(&s_z) * q2d;

    let p_b0 = wrench_bias(&params.body_base, nu_bc);
    let p_b1 = wrench_bias(&params.body_boom, &nu_b1);
    let p_b3 = wrench_bias(&params.body_cylinder, &nu_b3);
    let p_b4 = wrench_bias(&params.body_rod, &nu_b4);
    let p_e = wrench_bias(&params.body_tip, &nu_e);

    let accel = accel_input.map(|(dnu_bc, xddot)| {
        let qdd = state.k[3] + state.k[0] * xddot;
        let q1dd = state.k[4] + state.k[1] * xddot;
        let q2dd = state.k[5] + state.k[2] * xddot;
        let dnu_b1 = frames.b1_from_bc.act_motion(dnu_bc) + s_z * qdd + c_b1;
        let dnu_e = frames.e_from_b1.act_motion(&dnu_b1);
        let dnu_t1 = frames.t1_from_b1.act_motion(&dnu_b1);
        let dnu_b3 = frames.b3_from_bc.act_motion(dnu_bc) + s_z * q1dd + c_b3;
        let dnu_b4 = frames.b4_from_b3.act_motion(&dnu_b3) + s_x * xddot + c_b4;
        let dnu_t2 = frames.t2_from_b4.act_motion(&dnu_b4) + s_z * q2dd + c_t2;
        LoopAccelerations {
            xddot,
            dnu_b1,
            dnu_e,
            dnu_b3,
            dnu_b4,
            dnu_t1,
            dnu_t2,
        }
    });

    LoopKinematics {
        frames,
        nu_b1,
        nu_e,
        nu_b3,
        nu_b4,
        nu_t1,
        nu_t2,
        c_b1,
        c_b3,
        c_b4,
        c_t2,
        p_b0,
        p_b1,
        p_b3,
        p_b4,
        p_e,
        accel,
    }
}

// ---------------------------------------------------------------------------
// K matrices
// ---------------------------------------------------------------------------

/// Closed-form scalars of the projected constraint solution.
#[derive(Clone, Copy, Debug)]
pub struct KScalars<T: Real> {
    pub ka: T,
    pub kb: T,
    pub kc: T,
    pub kd: T,
    pub ke: T,
    pub kf: T,
    pub kg: T,
}

/// 6x6 maps expressing the total actuator wrench from the three local
/// wrenches. Nonzero only in rows/columns {1, 2, 6} (x-force, y-force,
/// z-moment): the planar projection and its embedding.
#[derive(Clone, Copy, Debug)]
pub struct KMatrices<T: Real> {
    pub k1: Matrix6<T>,
    pub k3: Matrix6<T>,
    pub k4: Matrix6<T>,
    pub scalars: KScalars<T>,
}

/// Embed a 3x3 planar block into rows/cols {0, 1, 5} of a 6x6 matrix.
fn embed_planar<T: Real>(block: &Matrix3<T>) -> Matrix6<T> {
    const IDX: [usize; 3] = [0, 1, 5];
    let mut m = Matrix6::zeros();
    for (bi, &i) in IDX.iter().enumerate() {
        for (bj, &j) in IDX.iter().enumerate() {
            m[(i, j)] = block[(bi, bj)];
        }
    }
    m
}

/// Closed-form K-matrices of the loop at a configuration.
pub fn k_matrices<T: Real>(
    params: &ParallelModuleParams<T>,
    state: &ClosureState<T>,
) -> Result<KMatrices<T>, DynamicsError> {
    let ka = state.x + params.cylinder_offset;
    let kb = -params.boom_length * state.q2.sin();
    let kc = params.boom_length * state.q2.cos();
    let ke = ka + params.rod_length;
    let kd = kb * ke;
    if kb.abs() < real(tol::SINGULARITY_TOL) || ke.abs() < real(tol::SINGULARITY_TOL) {
        return Err(DynamicsError::singular(
            "projected constraint solution is singular (sin q2 ~ 0 or zero actuator length)",
        ));
    }
    let kf = kc / kd;
    let kg = params.rod_length / ke;
    let z = T::zero();

    let k1_bar = Matrix3::new(z, z, T::one() / kb, z, z, z, z, z, z);
    let k3_bar = Matrix3::new(z, z, kf, z, z, -T::one() / ke, z, z, -kg);
    let k4_bar = Matrix3::new(
        T::one(),
        ka * kf,
        kf,
        z,
        kg,
        -T::one() / ke,
        z,
        -ka * kg,
        ka / ke,
    );

    Ok(KMatrices {
        k1: embed_planar(&k1_bar),
        k3: embed_planar(&k3_bar),
        k4: embed_planar(&k4_bar),
        scalars: KScalars {
            ka,
            kb,
            kc,
            kd,
            ke,
            kf,
            kg,
        },
    })
}

/// Total actuator wrench from the three local wrenches.
pub fn actuator_wrench<T: Real>(
    kmat: &KMatrices<T>,
    f_tilde_b1: &SpatialForceVector<T>,
    f_hat_b3: &SpatialForceVector<T>,
    f_hat_b4: &SpatialForceVector<T>,
) -> SpatialForceVector<T> {
    SpatialForceVector::from_vector(
        &(kmat.k1 * f_tilde_b1.to_vector()
            + kmat.k3 * f_hat_b3.to_vector()
            + kmat.k4 * f_hat_b4.to_vector()),
    )
}

// ---------------------------------------------------------------------------
// analytic inverse dynamics (7x7 Cramer system)
// ---------------------------------------------------------------------------

/// The 7x7 constraint matrix of the loop's internal force balance. Unknowns:
/// `[f_P^x, f_P^y, f_B4^x, f_B4^y, m_B4^z, f_B3^x, f_B3^y]`.
pub fn constraint_matrix<T: Real>(
    params: &ParallelModuleParams<T>,
    state: &ClosureState<T>,
) -> SMatrix<T, 7, 7> {
    let z = T::zero();
    let o = T::one();
    let l1 = params.boom_length;
    let lc = params.rod_length;
    let xlc0 = state.x + params.cylinder_offset;
    SMatrix::<T, 7, 7>::from_row_slice(&[
        -l1 * state.q2.sin(),
        l1 * state.q2.cos(),
        z,
        z,
        z,
        z,
        z,
        o,
        z,
        -o,
        z,
        z,
        z,
        z,
        z,
        o,
        z,
        -o,
        z,
        z,
        z,
        z,
        lc,
        z,
        z,
        -o,
        z,
        z,
        z,
        z,
        z,
        xlc0,
        o,
        z,
        z,
        z,
        z,
        o,
        z,
        z,
        -o,
        z,
        z,
        z,
        z,
        o,
        z,
        z,
        -o,
    ])
}

/// Closed-form determinant of the constraint matrix.
pub fn constraint_determinant<T: Real>(
    params: &ParallelModuleParams<T>,
    state: &ClosureState<T>,
) -> T {
    -params.boom_length * state.q2.sin() * (state.x + params.retracted_length())
}

/// Local wrenches entering both inverse-dynamics routes: the boom wrench with
/// the payload folded in, and the raw cylinder / rod wrenches.
#[derive(Clone, Copy, Debug)]
pub struct LocalWrenches<T: Real> {
    pub f_tilde_b1: SpatialForceVector<T>,
    pub f_hat_b3: SpatialForceVector<T>,
    pub f_hat_b4: SpatialForceVector<T>,
}

/// Assemble the local wrenches for a kinematic state with known
/// accelerations. `f_ext` is an external wrench applied at the payload
/// frame E (in E coordinates).
pub fn local_wrenches<T: Real>(
    params: &ParallelModuleParams<T>,
    kin: &LoopKinematics<T>,
    f_ext: &SpatialForceVector<T>,
) -> LocalWrenches<T> {
    let acc = kin
        .accel
        .as_ref()
        .expect("local_wrenches requires kinematics with the acceleration level solved");
    let f_e = params.body_tip.apply(&acc.dnu_e) + kin.p_e + *f_ext;
    let f_hat_b1 = params.body_boom.apply(&acc.dnu_b1) + kin.p_b1;
    let f_tilde_b1 = f_hat_b1 + kin.frames.e_from_b1.act_force(&f_e);
    let f_hat_b3 = params.body_cylinder.apply(&acc.dnu_b3) + kin.p_b3;
    let f_hat_b4 = params.body_rod.apply(&acc.dnu_b4) + kin.p_b4;
    LocalWrenches {
        f_tilde_b1,
        f_hat_b3,
        f_hat_b4,
    }
}

/// Right-hand side of the constraint system built from the local wrenches.
pub fn constraint_rhs<T: Real>(w: &LocalWrenches<T>) -> SMatrix<T, 7, 1> {
    SMatrix::<T, 7, 1>::from_column_slice(&[
        w.f_tilde_b1.moment.z,
        -w.f_hat_b4.force.x,
        -w.f_hat_b4.force.y,
        -w.f_hat_b4.moment.z,
        -w.f_hat_b3.moment.z,
        w.f_hat_b3.force.x,
        w.f_hat_b3.force.y,
    ])
}

/// Analytic actuator force by the Cramer rule on the 7x7 constraint system.
///
/// `nu_bc`/`dnu_bc` are the base twist and acceleration, `xddot` the actuator
/// acceleration and `f_ext` an external wrench at the payload frame.
pub fn inverse_dynamics_cramer<T: Real>(
    params: &ParallelModuleParams<T>,
    state: &ClosureState<T>,
    nu_bc: &SpatialMotionVector<T>,
    dnu_bc: &SpatialMotionVector<T>,
    xddot: T,
    f_ext: &SpatialForceVector<T>,
) -> Result<T, DynamicsError> {
    let kin = loop_kinematics(params, state, nu_bc, Some((dnu_bc, xddot)));
    inverse_dynamics_cramer_from_kinematics(params, state, &kin, f_ext)
}

/// Cramer inverse dynamics reusing already-computed kinematics.
pub fn inverse_dynamics_cramer_from_kinematics<T: Real>(
    params: &ParallelModuleParams<T>,
    state: &ClosureState<T>,
    kin: &LoopKinematics<T>,
    f_ext: &SpatialForceVector<T>,
) -> Result<T, DynamicsError> {
    let a = constraint_matrix(params, state);
    let det_a = a.determinant();
    if det_a.abs() < real(tol::DET_TOL) {
        return Err(DynamicsError::singular(
            "constraint system determinant vanishes",
        ));
    }
    let rhs = constraint_rhs(&local_wrenches(params, kin, f_ext));
    let mut a_psi = a;
    a_psi.set_column(2, &rhs);
    Ok(a_psi.determinant() / det_a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spatial::SpatialInertia;
    use nalgebra::Matrix3;

    fn params() -> ParallelModuleParams<f64> {
        let body = |m: f64, cx: f64, i: f64| {
            SpatialInertia::from_mass_properties(
                m,
                &Vector3::new(cx, 0.0, 0.0),
                &Matrix3::from_diagonal_element(i),
            )
        };
        ParallelModuleParams {
            base_span: 0.8,
            boom_length: 2.4,
            rod_length: 0.25,
            cylinder_offset: 0.35,
            tip_offset: SpatialTransform::identity(),
            body_base: body(60.0, 0.4, 2.0),
            body_boom: body(180.0, 1.2, 320.0),
            body_cylinder: body(80.0, 0.3, 12.0),
            body_rod: body(45.0, -0.3, 8.0),
            body_tip: body(50.0, 0.1, 2.0),
        }
    }

    #[test]
    fn closure_at_right_angle() {
        let p = params();
        let st = solve_closure(&p, -std::f64::consts::FRAC_PI_2, 0.0).unwrap();
        let expect = (p.base_span.powi(2) + p.boom_length.powi(2)).sqrt() - p.retracted_length();
        assert!((st.x - expect).abs() < 1e-14);
        // loop angle identity of the assembled branch
        assert!((st.q - st.q1 - st.q2).abs() < 1e-12);
    }

    #[test]
    fn positive_branch_rejected() {
        let p = params();
        assert!(matches!(
            solve_closure(&p, 0.5, 0.0),
            Err(DynamicsError::UnreachableConfiguration { .. })
        ));
    }

    #[test]
    fn out_of_range_extension_rejected() {
        let p = params();
        assert!(solve_closure_from_x(&p, 100.0, 0.0).is_err());
        assert!(solve_closure_from_x(&p, -0.1, 0.0).is_err());
    }

    #[test]
    fn k1_matches_formula_at_right_angle() {
        let p = params();
        let st = solve_closure(&p, -std::f64::consts::FRAC_PI_2, 0.0).unwrap();
        // sin q = -1 on the assembled branch
        let expect = (st.x + p.retracted_length()) / (p.base_span * p.boom_length);
        assert!((st.k[0] - expect).abs() < 1e-14);
    }

    #[test]
    fn rate_terms_vanish_at_rest() {
        let p = params();
        let st = solve_closure(&p, -1.2, 0.0).unwrap();
        assert_eq!(st.k[3], 0.0);
        assert_eq!(st.k[4], 0.0);
        assert_eq!(st.k[5], 0.0);
    }

    #[test]
    fn k_matrices_have_planar_sparsity() {
        let p = params();
        let st = solve_closure(&p, -1.2, 0.3).unwrap();
        let km = k_matrices(&p, &st).unwrap();
        for m in [&km.k1, &km.k3, &km.k4] {
            for i in 0..6 {
                for j in 0..6 {
                    let planar = [0usize, 1, 5];
                    if !(planar.contains(&i) && planar.contains(&j)) {
                        assert_eq!(m[(i, j)], 0.0, "entry ({i},{j}) must be zero");
                    }
                }
            }
        }
        assert!((km.k1[(0, 5)] - 1.0 / km.scalars.kb).abs() < 1e-15);
        assert!((km.k4[(0, 0)] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn stationary_loop_has_zero_biases() {
        let p = params();
        let st = solve_closure(&p, -1.2, 0.0).unwrap();
        let kin = loop_kinematics(&p, &st, &SpatialMotionVector::zero(), None);
        for nu in [kin.nu_b1, kin.nu_b3, kin.nu_b4, kin.nu_e, kin.nu_t2] {
            assert!(nu.norm() < 1e-15);
        }
        for c in [kin.c_b1, kin.c_b3, kin.c_b4, kin.c_t2] {
            assert!(c.norm() < 1e-15);
        }
        for pb in [kin.p_b0, kin.p_b1, kin.p_b3, kin.p_b4, kin.p_e] {
            assert!(pb.norm() < 1e-15);
        }
    }

    #[test]
    fn static_unloaded_actuator_force_is_zero() {
        let p = params();
        let st = solve_closure(&p, -1.2, 0.0).unwrap();
        let f = inverse_dynamics_cramer(
            &p,
            &st,
            &SpatialMotionVector::zero(),
            &SpatialMotionVector::zero(),
            0.0,
            &SpatialForceVector::zero(),
        )
        .unwrap();
        assert!(f.abs() < 1e-12);
    }
}
