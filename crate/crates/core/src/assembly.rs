//! Articulated-body inertia assembly: the scalar actuator dynamics of the
//! closed loop, its assembled base-frame inertia and wrench bias, and the
//! matching quantities for a 1-DoF serial module.
//!
//! For the loop, the three moving-frame accelerations are affine in the
//! actuator acceleration, `dnu_i = xi_a(i) xddot + xi_b(i)`, which collapses
//! the actuator dynamics to one scalar: `f = alpha xddot + beta` with
//! `beta = psi dnu_bc + delta`. Folding the solved `xddot` back into the base
//! wrench yields the assembled pair `(M^A_bc, p^A_bc)` that a proximal module
//! sees as its external tip load.

use nalgebra::{Matrix6, Vector6};

use crate::closed_loop::{
    loop_kinematics, ClosureState, KMatrices, LoopAccelerations, LoopKinematics,
    ParallelModuleParams,
};
use crate::error::DynamicsError;
use crate::real::{real, Real};
use crate::spatial::{
    mul66, wrench_bias, SpatialForceVector, SpatialInertia, SpatialMotionVector, SpatialTransform,
};
use crate::tol;

/// Fold a downstream assembled load at frame E into a local body: congruence
/// transform of the inertia plus transport of the bias.
///
/// `e_from_local` maps local coordinates to E coordinates.
pub fn assemble_tip_inertia<T: Real>(
    m_local: &SpatialInertia<T>,
    p_local: &SpatialForceVector<T>,
    m_a_e: &SpatialInertia<T>,
    p_a_e: &SpatialForceVector<T>,
    e_from_local: &SpatialTransform<T>,
) -> (SpatialInertia<T>, SpatialForceVector<T>) {
    (
        *m_local + m_a_e.transform(e_from_local),
        *p_local + e_from_local.act_force(p_a_e),
    )
}

// ---------------------------------------------------------------------------
// parallel module
// ---------------------------------------------------------------------------

/// First-recursion output for a parallel module: loop kinematics plus the
/// acceleration-decomposition elements that do not need the base
/// acceleration. `xi1/xi4/xi7` multiply `xddot`; `xi2/xi5/xi8` are the
/// rate-bias parts of `dnu_b1/dnu_b3/dnu_b4`.
#[derive(Clone, Debug)]
pub struct ParallelAssembly<T: Real> {
    pub kin: LoopKinematics<T>,
    pub xi1: SpatialMotionVector<T>,
    pub xi2: SpatialMotionVector<T>,
    pub xi4: SpatialMotionVector<T>,
    pub xi5: SpatialMotionVector<T>,
    pub xi7: SpatialMotionVector<T>,
    pub xi8: SpatialMotionVector<T>,
}

/// First forward recursion over one parallel module.
pub fn parallel_forward_pass<T: Real>(
    params: &ParallelModuleParams<T>,
    state: &ClosureState<T>,
    nu_bc: &SpatialMotionVector<T>,
) -> ParallelAssembly<T> {
    let kin = loop_kinematics(params, state, nu_bc, None);
    let s_z = SpatialMotionVector::revolute_z();
    let s_x = SpatialMotionVector::prismatic_x();

    let xi1 = s_z * state.k[0];
    let xi2 = s_z * state.k[3] + kin.c_b1;
    let xi4 = s_z * state.k[1];
    let xi5 = s_z * state.k[4] + kin.c_b3;
    let xi7 = kin.frames.b4_from_b3.act_motion(&xi4) + s_x;
    let xi8 = kin.frames.b4_from_b3.act_motion(&xi5) + kin.c_b4;

    ParallelAssembly {
        kin,
        xi1,
        xi2,
        xi4,
        xi5,
        xi7,
        xi8,
    }
}

/// Backward-recursion output for a parallel module: the scalar articulated
/// quantities, the base-acceleration maps of the moving frames and the
/// assembled base inertia/bias.
#[derive(Clone, Debug)]
pub struct ParallelBackward<T: Real> {
    /// Boom inertia/bias with the payload-side load folded in.
    pub m_tilde_b1: SpatialInertia<T>,
    pub p_tilde_b1: SpatialForceVector<T>,
    /// Actuator-direction articulated force element and its screw projection
    /// `alpha > 0` (scalar inertia felt by the actuator).
    pub xi_alpha: SpatialForceVector<T>,
    pub alpha: T,
    pub xi_gamma: SpatialForceVector<T>,
    /// `Psi` maps the base acceleration to the actuator-frame wrench;
    /// `psi = s_x^T Psi` is its scalar row (stored as a column).
    pub cap_psi: Matrix6<T>,
    pub xi_delta: SpatialForceVector<T>,
    pub psi: Vector6<T>,
    pub delta: T,
    /// Base-acceleration maps of the moving frames (`dnu_i = Psi_i dnu_bc + xi_i`).
    pub psi_b1: Matrix6<T>,
    pub psi_b3: Matrix6<T>,
    pub psi_b4: Matrix6<T>,
    pub xi_b1: SpatialMotionVector<T>,
    pub xi_b3: SpatialMotionVector<T>,
    pub xi_b4: SpatialMotionVector<T>,
    /// Assembled base-frame inertia and wrench bias.
    pub m_a_bc: SpatialInertia<T>,
    pub p_a_bc: SpatialForceVector<T>,
}

/// Backward recursion over one parallel module.
///
/// `(m_a_e, p_a_e)` is the assembled external load at the payload frame E
/// (distal modules and/or a tip wrench); the module's own tip body is added
/// here. `f_x` is the actuator input force.
pub fn parallel_backward_pass<T: Real>(
    params: &ParallelModuleParams<T>,
    asm: &ParallelAssembly<T>,
    kmat: &KMatrices<T>,
    m_a_e: &SpatialInertia<T>,
    p_a_e: &SpatialForceVector<T>,
    f_x: T,
) -> Result<ParallelBackward<T>, DynamicsError> {
    let kin = &asm.kin;
    let m_e = params.body_tip + *m_a_e;
    let p_e = kin.p_e + *p_a_e;
    let (m_tilde_b1, p_tilde_b1) = assemble_tip_inertia(
        &params.body_boom,
        &kin.p_b1,
        &m_e,
        &p_e,
        &kin.frames.e_from_b1,
    );

    let m1 = m_tilde_b1.matrix();
    let m3 = params.body_cylinder.matrix();
    let m4 = params.body_rod.matrix();

    let k1m1 = mul66(&kmat.k1, m1);
    let k3m3 = mul66(&kmat.k3, m3);
    let k4m4 = mul66(&kmat.k4, m4);

    let xi_alpha = SpatialForceVector::from_vector(
        &(k1m1 * asm.xi1.to_vector() + k3m3 * asm.xi4.to_vector() + k4m4 * asm.xi7.to_vector()),
    );
    let alpha = xi_alpha.force.x;

    let xi_gamma = SpatialForceVector::from_vector(
        &(kmat.k1 * p_tilde_b1.to_vector()
            + kmat.k3 * kin.p_b3.to_vector()
            + kmat.k4 * kin.p_b4.to_vector()),
    );

    let ad_b1 = kin.frames.b1_from_bc.adjoint();
    let ad_b3 = kin.frames.b3_from_bc.adjoint();
    let ad_b4 = kin.frames.b4_from_bc.adjoint();

    let cap_psi = mul66(&k1m1, &ad_b1) + mul66(&k3m3, &ad_b3) + mul66(&k4m4, &ad_b4);
    let xi_delta = SpatialForceVector::from_vector(
        &(k1m1 * asm.xi2.to_vector() + k3m3 * asm.xi5.to_vector() + k4m4 * asm.xi8.to_vector()),
    ) + xi_gamma;
    let psi = cap_psi.row(0).transpose();
    let delta = xi_delta.force.x;

    // A fully massless loop transmits nothing: the assembled base quantities
    // collapse to the base body alone and the actuator dynamics are
    // undefined (alpha = 0).
    let loop_is_massless = m_tilde_b1.is_zero()
        && params.body_cylinder.is_zero()
        && params.body_rod.is_zero()
        && p_tilde_b1.norm() == T::zero()
        && kin.p_b3.norm() == T::zero()
        && kin.p_b4.norm() == T::zero();
    if loop_is_massless {
        return Ok(ParallelBackward {
            m_tilde_b1,
            p_tilde_b1,
            xi_alpha,
            alpha,
            xi_gamma,
            cap_psi,
            xi_delta,
            psi,
            delta,
            psi_b1: ad_b1,
            psi_b3: ad_b3,
            psi_b4: ad_b4,
            xi_b1: asm.xi2,
            xi_b3: asm.xi5,
            xi_b4: asm.xi8,
            m_a_bc: params.body_base,
            p_a_bc: kin.p_b0,
        });
    }
    if alpha <= real(tol::DEGENERATE_ALPHA) {
        return Err(DynamicsError::degenerate(
            "articulated actuator inertia alpha is not positive",
        ));
    }

    let inv_alpha = T::one() / alpha;
    let psi_b1 = ad_b1 - asm.xi1.to_vector() * (psi.transpose() * inv_alpha);
    let psi_b3 = ad_b3 - asm.xi4.to_vector() * (psi.transpose() * inv_alpha);
    let psi_b4 = ad_b4 - asm.xi7.to_vector() * (psi.transpose() * inv_alpha);
    let gain = (f_x - delta) * inv_alpha;
    let xi_b1 = asm.xi1 * gain + asm.xi2;
    let xi_b3 = asm.xi4 * gain + asm.xi5;
    let xi_b4 = asm.xi7 * gain + asm.xi8;

    let m_a_bc = SpatialInertia::from_matrix(
        *params.body_base.matrix()
            + mul66(&ad_b1.transpose(), &mul66(m1, &psi_b1))
            + mul66(&ad_b3.transpose(), &mul66(m3, &psi_b3))
            + mul66(&ad_b4.transpose(), &mul66(m4, &psi_b4)),
    );
    let p_a_bc = kin.p_b0
        + kin.frames.b1_from_bc.act_force(
            &(SpatialForceVector::from_vector(&(m1 * xi_b1.to_vector())) + p_tilde_b1),
        )
        + kin.frames.b3_from_bc.act_force(
            &(SpatialForceVector::from_vector(&(m3 * xi_b3.to_vector())) + kin.p_b3),
        )
        + kin.frames.b4_from_bc.act_force(
            &(SpatialForceVector::from_vector(&(m4 * xi_b4.to_vector())) + kin.p_b4),
        );

    Ok(ParallelBackward {
        m_tilde_b1,
        p_tilde_b1,
        xi_alpha,
        alpha,
        xi_gamma,
        cap_psi,
        xi_delta,
        psi,
        delta,
        psi_b1,
        psi_b3,
        psi_b4,
        xi_b1,
        xi_b3,
        xi_b4,
        m_a_bc,
        p_a_bc,
    })
}

/// Scalar forward dynamics of the loop: `xddot = (f - psi dnu_bc - delta) / alpha`.
pub fn parallel_fd<T: Real>(
    bwd: &ParallelBackward<T>,
    f_x: T,
    dnu_bc: &SpatialMotionVector<T>,
) -> Result<T, DynamicsError> {
    if bwd.alpha <= real(tol::DEGENERATE_ALPHA) {
        return Err(DynamicsError::degenerate(
            "articulated actuator inertia alpha is not positive",
        ));
    }
    Ok((f_x - bwd.psi.dot(&dnu_bc.to_vector()) - bwd.delta) / bwd.alpha)
}

/// The force bias `beta` computed by the direct route: resolve the bias
/// accelerations `xi3/xi6/xi9` with the known base acceleration, build the
/// full dual element and project. Equals `psi dnu_bc + delta` identically;
/// kept as an independent code path for the scalar-form equivalence check.
pub fn parallel_beta_direct<T: Real>(
    params: &ParallelModuleParams<T>,
    asm: &ParallelAssembly<T>,
    kmat: &KMatrices<T>,
    bwd: &ParallelBackward<T>,
    dnu_bc: &SpatialMotionVector<T>,
) -> T {
    let kin = &asm.kin;
    let xi3 = kin.frames.b1_from_bc.act_motion(dnu_bc) + asm.xi2;
    let xi6 = kin.frames.b3_from_bc.act_motion(dnu_bc) + asm.xi5;
    let xi9 = kin.frames.b4_from_bc.act_motion(dnu_bc) + asm.xi8;
    let xi_beta = SpatialForceVector::from_vector(
        &(kmat.k1 * (bwd.m_tilde_b1.matrix() * xi3.to_vector())
            + kmat.k3 * (params.body_cylinder.matrix() * xi6.to_vector())
            + kmat.k4 * (params.body_rod.matrix() * xi9.to_vector())),
    ) + bwd.xi_gamma;
    xi_beta.force.x
}

/// Second forward recursion: loop accelerations for a solved `xddot`.
pub fn parallel_accelerations<T: Real>(
    params: &ParallelModuleParams<T>,
    state: &ClosureState<T>,
    nu_bc: &SpatialMotionVector<T>,
    dnu_bc: &SpatialMotionVector<T>,
    xddot: T,
) -> LoopAccelerations<T> {
    let kin = loop_kinematics(params, state, nu_bc, Some((dnu_bc, xddot)));
    kin.accel.expect("acceleration level requested")
}

// ---------------------------------------------------------------------------
// serial module
// ---------------------------------------------------------------------------

/// Geometric and inertial description of a 1-DoF serial module (prismatic or
/// revolute, or any unit screw).
#[derive(Clone, Debug)]
pub struct SerialModuleParams<T: Real> {
    /// Unit joint screw in link coordinates.
    pub screw: SpatialMotionVector<T>,
    /// Pose of the link frame in the base frame at zero joint position.
    pub joint_origin: SpatialTransform<T>,
    /// Pose of the tip frame E in the link frame.
    pub tip_offset: SpatialTransform<T>,
    /// Body attached to the base frame.
    pub body_base: SpatialInertia<T>,
    /// Body attached to the link frame.
    pub body_link: SpatialInertia<T>,
}

/// Kinematics of a serial module at one state.
#[derive(Clone, Debug)]
pub struct SerialKinematics<T: Real> {
    pub link_from_bc: SpatialTransform<T>,
    pub e_from_link: SpatialTransform<T>,
    pub pose_link_in_bc: SpatialTransform<T>,
    pub pose_e_in_bc: SpatialTransform<T>,
    pub nu_link: SpatialMotionVector<T>,
    pub nu_e: SpatialMotionVector<T>,
    pub c_link: SpatialMotionVector<T>,
    pub p_base: SpatialForceVector<T>,
    pub p_link: SpatialForceVector<T>,
}

pub fn serial_kinematics<T: Real>(
    params: &SerialModuleParams<T>,
    x: T,
    xdot: T,
    nu_bc: &SpatialMotionVector<T>,
) -> SerialKinematics<T> {
    let pose_link_in_bc = params
        .joint_origin
        .compose(&SpatialTransform::exp_screw_unchecked(&params.screw, x));
    let link_from_bc = pose_link_in_bc.inverse();
    let e_from_link = params.tip_offset.inverse();
    let pose_e_in_bc = pose_link_in_bc.compose(&params.tip_offset);

    let nu_link = link_from_bc.act_motion(nu_bc) + params.screw * xdot;
    let nu_e = e_from_link.act_motion(&nu_link);
    let c_link = nu_link.bracket(&params.screw) * xdot;
    let p_base = wrench_bias(&params.body_base, nu_bc);
    let p_link = wrench_bias(&params.body_link, &nu_link);

    SerialKinematics {
        link_from_bc,
        e_from_link,
        pose_link_in_bc,
        pose_e_in_bc,
        nu_link,
        nu_e,
        c_link,
        p_base,
        p_link,
    }
}

/// Backward-recursion output for a serial module.
#[derive(Clone, Debug)]
pub struct SerialBackward<T: Real> {
    /// Articulated link inertia/bias with the downstream load folded in.
    pub m_a_link: SpatialInertia<T>,
    pub p_a_link: SpatialForceVector<T>,
    /// `psi = s^T M^A` (stored as a column), `alpha = psi s`, `u = f - s^T p^A`.
    pub psi: Vector6<T>,
    pub alpha: T,
    pub u: T,
    /// Joint-projected articulated inertia/bias.
    pub m_art: SpatialInertia<T>,
    pub p_art: SpatialForceVector<T>,
    /// Assembled base-frame inertia and wrench bias.
    pub m_a_bc: SpatialInertia<T>,
    pub p_a_bc: SpatialForceVector<T>,
}

/// Backward recursion over one serial module. `(m_a_e, p_a_e)` is the
/// assembled downstream load at the tip frame; `f` the actuator input.
pub fn serial_backward<T: Real>(
    params: &SerialModuleParams<T>,
    kin: &SerialKinematics<T>,
    m_a_e: &SpatialInertia<T>,
    p_a_e: &SpatialForceVector<T>,
    f: T,
) -> Result<SerialBackward<T>, DynamicsError> {
    let (m_a_link, p_a_link) = assemble_tip_inertia(
        &params.body_link,
        &kin.p_link,
        m_a_e,
        p_a_e,
        &kin.e_from_link,
    );

    let s = params.screw.to_vector();
    let psi = m_a_link.matrix() * s; // = (s^T M^A)^T since M^A is symmetric
    let alpha = psi.dot(&s);
    let u = f - p_a_link.to_vector().dot(&s);
    if alpha <= real(tol::DEGENERATE_ALPHA) {
        return Err(DynamicsError::degenerate(
            "articulated joint inertia alpha is not positive",
        ));
    }
    let inv_alpha = T::one() / alpha;

    let m_art =
        SpatialInertia::from_matrix(m_a_link.matrix() - psi * (psi.transpose() * inv_alpha));
    let p_art = p_a_link
        + SpatialForceVector::from_vector(&(m_art.matrix() * kin.c_link.to_vector()))
        + SpatialForceVector::from_vector(&(psi * (u * inv_alpha)));

    let m_a_bc = params.body_base + m_art.transform(&kin.link_from_bc);
    let p_a_bc = kin.p_base + kin.link_from_bc.act_force(&p_art);

    Ok(SerialBackward {
        m_a_link,
        p_a_link,
        psi,
        alpha,
        u,
        m_art,
        p_art,
        m_a_bc,
        p_a_bc,
    })
}

/// Scalar forward dynamics of a serial module: apparent link acceleration,
/// joint acceleration and the resulting link acceleration.
pub fn serial_fd<T: Real>(
    params: &SerialModuleParams<T>,
    kin: &SerialKinematics<T>,
    bwd: &SerialBackward<T>,
    dnu_bc: &SpatialMotionVector<T>,
) -> Result<(T, SpatialMotionVector<T>), DynamicsError> {
    if bwd.alpha <= real(tol::DEGENERATE_ALPHA) {
        return Err(DynamicsError::degenerate(
            "articulated joint inertia alpha is not positive",
        ));
    }
    let dnu_apparent = kin.link_from_bc.act_motion(dnu_bc) + kin.c_link;
    let xddot = (bwd.u - bwd.psi.dot(&dnu_apparent.to_vector())) / bwd.alpha;
    let dnu_link = dnu_apparent + params.screw * xddot;
    Ok((xddot, dnu_link))
}

/// Actuator force of a serial module with known accelerations (the screw
/// projection of the total link wrench).
pub fn serial_inverse_dynamics<T: Real>(
    params: &SerialModuleParams<T>,
    kin: &SerialKinematics<T>,
    dnu_bc: &SpatialMotionVector<T>,
    xddot: T,
    f_e: &SpatialForceVector<T>,
) -> (T, SpatialMotionVector<T>, SpatialForceVector<T>) {
    let dnu_link = kin.link_from_bc.act_motion(dnu_bc) + kin.c_link + params.screw * xddot;
    let f_link = params.body_link.apply(&dnu_link) + kin.p_link + kin.e_from_link.act_force(f_e);
    let f = f_link.pairing(&params.screw);
    (f, dnu_link, f_link)
}
