//! Chain-level solver: a manipulator is an ordered serial chain of 1-DoF
//! modules (parallel loops or serial joints). Forward dynamics runs the three
//! recursions (kinematics out, inertia assembly in, accelerations out);
//! inverse dynamics runs kinematics with known accelerations out and wrench
//! accumulation in. A dense mass-matrix oracle built purely from inverse
//! dynamics cross-checks the recursive path.

use nalgebra::{DMatrix, DVector, Vector3};

use crate::assembly::{
    parallel_backward_pass, parallel_fd, parallel_forward_pass, serial_backward, serial_fd,
    serial_inverse_dynamics, serial_kinematics, ParallelAssembly, ParallelBackward,
    SerialKinematics, SerialModuleParams,
};
use crate::closed_loop::{
    inverse_dynamics_cramer_from_kinematics, k_matrices, loop_kinematics, local_wrenches,
    solve_closure_from_x, ClosureState, LoopKinematics, ParallelModuleParams,
};
use crate::error::DynamicsError;
use crate::real::Real;
use crate::spatial::{SpatialForceVector, SpatialInertia, SpatialMotionVector, SpatialTransform};

/// One mechanical module of the chain.
#[derive(Clone, Debug)]
pub enum ModuleKind<T: Real> {
    Parallel(ParallelModuleParams<T>),
    Serial(SerialModuleParams<T>),
}

#[derive(Clone, Debug)]
pub struct Module<T: Real> {
    pub name: String,
    /// Pose of this module's base frame in the parent module's tip frame
    /// (world frame for the first module).
    pub mount: SpatialTransform<T>,
    pub kind: ModuleKind<T>,
}

/// A serial chain of 1-DoF modules under uniform gravity.
#[derive(Clone, Debug)]
pub struct ManipulatorModel<T: Real> {
    /// Gravity acceleration vector in world coordinates [m/s^2].
    pub gravity: Vector3<T>,
    pub modules: Vec<Module<T>>,
}

impl<T: Real> ManipulatorModel<T> {
    pub fn dof(&self) -> usize {
        self.modules.len()
    }

    /// Gravity as a spatial acceleration in world coordinates.
    pub fn gravity_twist(&self) -> SpatialMotionVector<T> {
        SpatialMotionVector::new(self.gravity, Vector3::zeros())
    }
}

/// Actuator-space state: positions, rates and input forces.
#[derive(Clone, Debug)]
pub struct ActuatorState<T: Real> {
    pub x: Vec<T>,
    pub xdot: Vec<T>,
    pub f: Vec<T>,
}

impl<T: Real> ActuatorState<T> {
    pub fn new(x: Vec<T>, xdot: Vec<T>, f: Vec<T>) -> Self {
        Self { x, xdot, f }
    }

    pub fn at_rest(x: Vec<T>) -> Self {
        let n = x.len();
        Self {
            x,
            xdot: vec![T::zero(); n],
            f: vec![T::zero(); n],
        }
    }
}

/// Per-module solver introspection.
#[derive(Clone, Debug)]
pub struct ModuleDiagnostics<T: Real> {
    /// Scalar articulated inertia felt by the actuator.
    pub alpha: T,
    /// Loop closure residual (parallel modules only).
    pub closure_residual: Option<T>,
    /// Module tip twist in tip coordinates.
    pub tip_twist: SpatialMotionVector<T>,
}

#[derive(Clone, Debug)]
pub struct DynamicsResult<T: Real> {
    pub xddot: Vec<T>,
    pub diagnostics: Vec<ModuleDiagnostics<T>>,
}

/// Assembled external load applied at the tip frame of the last module.
#[derive(Clone, Debug)]
pub struct TipLoad<T: Real> {
    pub inertia: SpatialInertia<T>,
    pub bias: SpatialForceVector<T>,
}

impl<T: Real> TipLoad<T> {
    pub fn wrench(w: SpatialForceVector<T>) -> Self {
        Self {
            inertia: SpatialInertia::zero(),
            bias: w,
        }
    }
}

fn check_dims<T: Real>(model: &ManipulatorModel<T>, lens: &[usize]) -> Result<(), DynamicsError> {
    let n = model.dof();
    if lens.iter().any(|&l| l != n) {
        return Err(DynamicsError::DimensionMismatch {
            detail: format!("model has {n} modules but state vectors have lengths {lens:?}"),
        });
    }
    Ok(())
}

enum ModuleForward<T: Real> {
    Parallel {
        state: ClosureState<T>,
        asm: ParallelAssembly<T>,
        nu_bc: SpatialMotionVector<T>,
    },
    Serial {
        kin: SerialKinematics<T>,
    },
}

enum ModuleBackward<T: Real> {
    Parallel(ParallelBackward<T>),
    Serial(crate::assembly::SerialBackward<T>),
}

/// Forward dynamics of the whole chain (three recursive sweeps).
pub fn forward_dynamics<T: Real>(
    model: &ManipulatorModel<T>,
    state: &ActuatorState<T>,
) -> Result<DynamicsResult<T>, DynamicsError> {
    forward_dynamics_with_tip(model, state, None)
}

/// Forward dynamics with an optional assembled load at the last module's tip.
pub fn forward_dynamics_with_tip<T: Real>(
    model: &ManipulatorModel<T>,
    state: &ActuatorState<T>,
    tip: Option<&TipLoad<T>>,
) -> Result<DynamicsResult<T>, DynamicsError> {
    check_dims(model, &[state.x.len(), state.xdot.len(), state.f.len()])?;
    let n = model.dof();

    // first forward recursion: twists and rate biases
    let mut forward: Vec<ModuleForward<T>> = Vec::with_capacity(n);
    let mut nu_tip = SpatialMotionVector::zero();
    for (idx, module) in model.modules.iter().enumerate() {
        let base_from_parent_tip = module.mount.inverse();
        let nu_bc = base_from_parent_tip.act_motion(&nu_tip);
        match &module.kind {
            ModuleKind::Parallel(params) => {
                let closure = solve_closure_from_x(params, state.x[idx], state.xdot[idx])
                    .map_err(|e| e.with_module(idx))?;
                let asm = parallel_forward_pass(params, &closure, &nu_bc);
                nu_tip = asm.kin.nu_e;
                forward.push(ModuleForward::Parallel {
                    state: closure,
                    asm,
                    nu_bc,
                });
            }
            ModuleKind::Serial(params) => {
                let kin = serial_kinematics(params, state.x[idx], state.xdot[idx], &nu_bc);
                nu_tip = kin.nu_e;
                forward.push(ModuleForward::Serial { kin });
            }
        }
    }

    // backward recursion: assemble inertias toward the base
    let mut backward: Vec<Option<ModuleBackward<T>>> = (0..n).map(|_| None).collect();
    let mut m_ext = tip.map_or_else(SpatialInertia::zero, |t| t.inertia);
    let mut p_ext = tip.map_or_else(SpatialForceVector::zero, |t| t.bias);
    for idx in (0..n).rev() {
        let module = &model.modules[idx];
        let bwd = match (&module.kind, &forward[idx]) {
            (ModuleKind::Parallel(params), ModuleForward::Parallel { state: closure, asm, .. }) => {
                let kmat = k_matrices(params, closure).map_err(|e| e.with_module(idx))?;
                let bwd = parallel_backward_pass(params, asm, &kmat, &m_ext, &p_ext, state.f[idx])
                    .map_err(|e| e.with_module(idx))?;
                ModuleBackward::Parallel(bwd)
            }
            (ModuleKind::Serial(params), ModuleForward::Serial { kin }) => {
                let bwd = serial_backward(params, kin, &m_ext, &p_ext, state.f[idx])
                    .map_err(|e| e.with_module(idx))?;
                ModuleBackward::Serial(bwd)
            }
            _ => unreachable!("forward pass kind matches module kind"),
        };
        if idx > 0 {
            let g = model.modules[idx].mount.inverse();
            let (m_a, p_a) = match &bwd {
                ModuleBackward::Parallel(b) => (b.m_a_bc, b.p_a_bc),
                ModuleBackward::Serial(b) => (b.m_a_bc, b.p_a_bc),
            };
            m_ext = m_a.transform(&g);
            p_ext = g.act_force(&p_a);
        }
        backward[idx] = Some(bwd);
    }

    // second forward recursion: accelerations
    let mut xddot = vec![T::zero(); n];
    let mut diagnostics = Vec::with_capacity(n);
    let mut dnu_tip = -model.gravity_twist();
    for idx in 0..n {
        let module = &model.modules[idx];
        let base_from_parent_tip = module.mount.inverse();
        let dnu_bc = base_from_parent_tip.act_motion(&dnu_tip);
        match (&forward[idx], backward[idx].as_ref().unwrap()) {
            (
                ModuleForward::Parallel {
                    state: closure,
                    asm,
                    nu_bc,
                },
                ModuleBackward::Parallel(bwd),
            ) => {
                let params = match &module.kind {
                    ModuleKind::Parallel(p) => p,
                    ModuleKind::Serial(_) => unreachable!(),
                };
                let xdd =
                    parallel_fd(bwd, state.f[idx], &dnu_bc).map_err(|e| e.with_module(idx))?;
                xddot[idx] = xdd;
                let kin = loop_kinematics(params, closure, nu_bc, Some((&dnu_bc, xdd)));
                let acc = kin.accel.as_ref().unwrap();
                dnu_tip = acc.dnu_e;
                diagnostics.push(ModuleDiagnostics {
                    alpha: bwd.alpha,
                    closure_residual: Some(closure.residual),
                    tip_twist: asm.kin.nu_t1,
                });
            }
            (ModuleForward::Serial { kin }, ModuleBackward::Serial(bwd)) => {
                let params = match &module.kind {
                    ModuleKind::Serial(p) => p,
                    ModuleKind::Parallel(_) => unreachable!(),
                };
                let (xdd, dnu_link) =
                    serial_fd(params, kin, bwd, &dnu_bc).map_err(|e| e.with_module(idx))?;
                xddot[idx] = xdd;
                dnu_tip = kin.e_from_link.act_motion(&dnu_link);
                diagnostics.push(ModuleDiagnostics {
                    alpha: bwd.alpha,
                    closure_residual: None,
                    tip_twist: kin.nu_e,
                });
            }
            _ => unreachable!(),
        }
    }

    Ok(DynamicsResult {
        xddot,
        diagnostics,
    })
}

/// Inverse dynamics of the whole chain: actuator forces realizing the given
/// accelerations. Serves as the oracle half of the round-trip identity.
pub fn inverse_dynamics<T: Real>(
    model: &ManipulatorModel<T>,
    x: &[T],
    xdot: &[T],
    xddot: &[T],
) -> Result<Vec<T>, DynamicsError> {
    inverse_dynamics_with_tip(model, x, xdot, xddot, &SpatialForceVector::zero())
}

/// Inverse dynamics with an external wrench at the last module's tip frame.
pub fn inverse_dynamics_with_tip<T: Real>(
    model: &ManipulatorModel<T>,
    x: &[T],
    xdot: &[T],
    xddot: &[T],
    tip_wrench: &SpatialForceVector<T>,
) -> Result<Vec<T>, DynamicsError> {
    check_dims(model, &[x.len(), xdot.len(), xddot.len()])?;
    let n = model.dof();

    // outward sweep with known accelerations
    enum IdForward<T: Real> {
        Parallel {
            state: ClosureState<T>,
            kin: LoopKinematics<T>,
            dnu_bc: SpatialMotionVector<T>,
        },
        Serial {
            kin: SerialKinematics<T>,
            dnu_bc: SpatialMotionVector<T>,
        },
    }

    let mut forward: Vec<IdForward<T>> = Vec::with_capacity(n);
    let mut nu_tip = SpatialMotionVector::zero();
    let mut dnu_tip = -model.gravity_twist();
    for (idx, module) in model.modules.iter().enumerate() {
        let base_from_parent_tip = module.mount.inverse();
        let nu_bc = base_from_parent_tip.act_motion(&nu_tip);
        let dnu_bc = base_from_parent_tip.act_motion(&dnu_tip);
        match &module.kind {
            ModuleKind::Parallel(params) => {
                let closure = solve_closure_from_x(params, x[idx], xdot[idx])
                    .map_err(|e| e.with_module(idx))?;
                let kin = loop_kinematics(params, &closure, &nu_bc, Some((&dnu_bc, xddot[idx])));
                let acc = kin.accel.as_ref().unwrap();
                nu_tip = kin.nu_e;
                dnu_tip = acc.dnu_e;
                forward.push(IdForward::Parallel {
                    state: closure,
                    kin,
                    dnu_bc,
                });
            }
            ModuleKind::Serial(params) => {
                let kin = serial_kinematics(params, x[idx], xdot[idx], &nu_bc);
                let dnu_link =
                    kin.link_from_bc.act_motion(&dnu_bc) + kin.c_link + params.screw * xddot[idx];
                nu_tip = kin.nu_e;
                dnu_tip = kin.e_from_link.act_motion(&dnu_link);
                forward.push(IdForward::Serial { kin, dnu_bc });
            }
        }
    }

    // inward sweep: wrench accumulation and screw projections
    let mut forces = vec![T::zero(); n];
    let mut f_ext = *tip_wrench; // at the current module's tip frame
    for idx in (0..n).rev() {
        let module = &model.modules[idx];
        match (&module.kind, &forward[idx]) {
            (
                ModuleKind::Parallel(params),
                IdForward::Parallel {
                    state,
                    kin,
                    dnu_bc,
                },
            ) => {
                forces[idx] = inverse_dynamics_cramer_from_kinematics(params, state, kin, &f_ext)
                    .map_err(|e| e.with_module(idx))?;
                // total base wrench: direct four-wrench summation
                let w = local_wrenches(params, kin, &f_ext);
                let f_b0 = params.body_base.apply(dnu_bc) + kin.p_b0;
                let f_bc = f_b0
                    + kin.frames.b1_from_bc.act_force(&w.f_tilde_b1)
                    + kin.frames.b3_from_bc.act_force(&w.f_hat_b3)
                    + kin.frames.b4_from_bc.act_force(&w.f_hat_b4);
                f_ext = module.mount.inverse().act_force(&f_bc);
            }
            (ModuleKind::Serial(params), IdForward::Serial { kin, dnu_bc }) => {
                let (f, _dnu_link, f_link) =
                    serial_inverse_dynamics(params, kin, dnu_bc, xddot[idx], &f_ext);
                forces[idx] = f;
                let f_base = params.body_base.apply(dnu_bc) + kin.p_base;
                let f_bc = f_base + kin.link_from_bc.act_force(&f_link);
                f_ext = module.mount.inverse().act_force(&f_bc);
            }
            _ => unreachable!(),
        }
    }
    Ok(forces)
}

/// Generalized mass matrix and bias force by inverse-dynamics probing:
/// column k is `ID(x, xdot, e_k) - ID(x, xdot, 0)` and the bias is
/// `ID(x, xdot, 0)`. Independent of the recursive forward path.
pub fn mass_matrix<T: Real>(
    model: &ManipulatorModel<T>,
    x: &[T],
    xdot: &[T],
) -> Result<(DMatrix<T>, DVector<T>), DynamicsError> {
    let n = model.dof();
    let zero = vec![T::zero(); n];
    let bias = inverse_dynamics(model, x, xdot, &zero)?;
    let mut m = DMatrix::zeros(n, n);
    for k in 0..n {
        let mut probe = vec![T::zero(); n];
        probe[k] = T::one();
        let col = inverse_dynamics(model, x, xdot, &probe)?;
        for i in 0..n {
            m[(i, k)] = col[i] - bias[i];
        }
    }
    Ok((m, DVector::from_vec(bias)))
}

/// Forward dynamics by dense solve of the mass-matrix system (oracle route).
pub fn forward_dynamics_dense<T: Real>(
    model: &ManipulatorModel<T>,
    state: &ActuatorState<T>,
) -> Result<Vec<T>, DynamicsError> {
    let (m, bias) = mass_matrix(model, &state.x, &state.xdot)?;
    let rhs = DVector::from_iterator(
        model.dof(),
        state.f.iter().zip(bias.iter()).map(|(&f, &b)| f - b),
    );
    let sol = m
        .lu()
        .solve(&rhs)
        .ok_or_else(|| DynamicsError::degenerate("generalized mass matrix is singular"))?;
    Ok(sol.iter().copied().collect())
}

/// Total mechanical energy of the chain at a state.
#[derive(Clone, Copy, Debug)]
pub struct EnergyBreakdown<T: Real> {
    pub kinetic: T,
    pub potential: T,
}

impl<T: Real> EnergyBreakdown<T> {
    pub fn total(&self) -> T {
        self.kinetic + self.potential
    }
}

/// Kinetic energy from the body twists plus gravitational potential from
/// forward kinematics (potential zero at the world origin).
pub fn mechanism_energy<T: Real>(
    model: &ManipulatorModel<T>,
    x: &[T],
    xdot: &[T],
) -> Result<EnergyBreakdown<T>, DynamicsError> {
    check_dims(model, &[x.len(), xdot.len()])?;
    let mut kinetic = T::zero();
    let mut potential = T::zero();
    let mut nu_tip = SpatialMotionVector::zero();
    let mut pose_tip = SpatialTransform::identity(); // world pose of the running tip frame

    let add_body = |inertia: &SpatialInertia<T>,
                        nu: &SpatialMotionVector<T>,
                        pose_world: &SpatialTransform<T>,
                        kinetic: &mut T,
                        potential: &mut T| {
        *kinetic += inertia.kinetic_energy(nu);
        let com_world =
            pose_world.rotation * inertia.mass_center() + pose_world.translation;
        *potential -= inertia.mass() * model.gravity.dot(&com_world);
    };

    for (idx, module) in model.modules.iter().enumerate() {
        let pose_bc = pose_tip.compose(&module.mount);
        let nu_bc = module.mount.inverse().act_motion(&nu_tip);
        match &module.kind {
            ModuleKind::Parallel(params) => {
                let closure = solve_closure_from_x(params, x[idx], xdot[idx])
                    .map_err(|e| e.with_module(idx))?;
                let kin = loop_kinematics(params, &closure, &nu_bc, None);
                let f = &kin.frames;
                add_body(&params.body_base, &nu_bc, &pose_bc, &mut kinetic, &mut potential);
                add_body(
                    &params.body_boom,
                    &kin.nu_b1,
                    &pose_bc.compose(&f.pose_b1_in_bc),
                    &mut kinetic,
                    &mut potential,
                );
                add_body(
                    &params.body_cylinder,
                    &kin.nu_b3,
                    &pose_bc.compose(&f.pose_b3_in_bc),
                    &mut kinetic,
                    &mut potential,
                );
                add_body(
                    &params.body_rod,
                    &kin.nu_b4,
                    &pose_bc.compose(&f.pose_b4_in_bc),
                    &mut kinetic,
                    &mut potential,
                );
                add_body(
                    &params.body_tip,
                    &kin.nu_e,
                    &pose_bc.compose(&f.pose_e_in_bc),
                    &mut kinetic,
                    &mut potential,
                );
                nu_tip = kin.nu_e;
                pose_tip = pose_bc.compose(&f.pose_e_in_bc);
            }
            ModuleKind::Serial(params) => {
                let kin = serial_kinematics(params, x[idx], xdot[idx], &nu_bc);
                add_body(&params.body_base, &nu_bc, &pose_bc, &mut kinetic, &mut potential);
                add_body(
                    &params.body_link,
                    &kin.nu_link,
                    &pose_bc.compose(&kin.pose_link_in_bc),
                    &mut kinetic,
                    &mut potential,
                );
                nu_tip = kin.nu_e;
                pose_tip = pose_bc.compose(&kin.pose_e_in_bc);
            }
        }
    }

    Ok(EnergyBreakdown { kinetic, potential })
}
