//! Model validation suite: the round-trip identity, the dense mass-matrix
//! oracle, the two analytic actuator-force routes, the two scalar
//! forward-dynamics forms and the assembled-vs-direct base wrench. Each check
//! produces a [`CheckResult`] with error statistics against its pinned
//! threshold; randomized states come from a caller-seeded generator.

use nalgebra::Vector3;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::assembly::{
    parallel_backward_pass, parallel_beta_direct, parallel_fd, parallel_forward_pass,
};
use crate::closed_loop::{
    actuator_wrench, inverse_dynamics_cramer_from_kinematics, k_matrices, local_wrenches,
    loop_kinematics, solve_closure_from_x, ClosureState, ParallelModuleParams,
};
use crate::error::DynamicsError;
use crate::solver::{
    forward_dynamics, forward_dynamics_dense, inverse_dynamics, mass_matrix, ActuatorState,
    ManipulatorModel, ModuleKind,
};
use crate::spatial::{SpatialForceVector, SpatialInertia, SpatialMotionVector};
use crate::tol;
use crate::trajectory::{generate_sinusoid, SinusoidSpec, TrajectoryDocument};

/// Outcome of one validation check.
#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: String,
    pub max_abs: f64,
    pub mean_abs: f64,
    /// Mean error relative to the local result scale, in percent.
    pub rel_pct: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl CheckResult {
    fn from_errors(name: &str, errors: &[f64], scales: &[f64], threshold: f64) -> Self {
        let max_abs = errors.iter().copied().fold(0.0, f64::max);
        let mean_abs = errors.iter().sum::<f64>() / errors.len().max(1) as f64;
        let rel_pct = errors
            .iter()
            .zip(scales)
            .map(|(e, s)| e / s.max(1e-12))
            .sum::<f64>()
            / errors.len().max(1) as f64
            * 100.0;
        Self {
            name: name.into(),
            max_abs,
            mean_abs,
            rel_pct,
            threshold,
            pass: mean_abs <= threshold,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Uniform sample in `[lo, hi]`.
fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.random_range(lo..hi)
}

fn random_motion(rng: &mut ChaCha8Rng, scale: f64) -> SpatialMotionVector<f64> {
    let mut v = [0.0; 6];
    for s in &mut v {
        *s = uniform(rng, -scale, scale);
    }
    SpatialMotionVector::new(
        Vector3::new(v[0], v[1], v[2]),
        Vector3::new(v[3], v[4], v[5]),
    )
}

fn random_wrench(rng: &mut ChaCha8Rng, scale: f64) -> SpatialForceVector<f64> {
    let m = random_motion(rng, scale);
    SpatialForceVector::new(m.linear, m.angular)
}

/// Random non-singular loop configuration, 5% inside the usable range.
pub fn random_loop_state(
    params: &ParallelModuleParams<f64>,
    rng: &mut ChaCha8Rng,
) -> ClosureState<f64> {
    let (lo, hi) = crate::trajectory::usable_range(params);
    let margin = 0.05 * (hi - lo);
    let x = uniform(rng, lo + margin, hi - margin);
    let xdot = uniform(rng, -1.0, 1.0);
    solve_closure_from_x(params, x, xdot).expect("interior state is reachable")
}

/// Per-sample round-trip errors `|FD(x, xdot, ID(x, xdot, xddot)) - xddot|`
/// summed over actuators, with the acceleration scale per sample.
pub fn round_trip_errors(
    model: &ManipulatorModel<f64>,
    traj: &TrajectoryDocument,
) -> Result<(Vec<f64>, Vec<f64>), DynamicsError> {
    let mut errors = Vec::with_capacity(traj.samples());
    let mut scales = Vec::with_capacity(traj.samples());
    for s in 0..traj.samples() {
        let (x, xdot, xddot_in) = traj.at(s);
        let f = inverse_dynamics(model, &x, &xdot, &xddot_in)?;
        let out = forward_dynamics(model, &ActuatorState::new(x, xdot, f))?;
        let err: f64 = out
            .xddot
            .iter()
            .zip(&xddot_in)
            .map(|(o, i)| (o - i).abs())
            .sum();
        let scale: f64 = xddot_in.iter().map(|v| v.abs()).sum::<f64>();
        errors.push(err);
        scales.push(scale);
    }
    Ok((errors, scales))
}

/// The full validation suite on one model.
pub fn validate_model(
    model: &ManipulatorModel<f64>,
    seed: u64,
) -> Result<ValidationReport, DynamicsError> {
    let mut report = ValidationReport::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // (a) round trip over the default 10 s / 1 kHz sinusoid
    let traj = generate_sinusoid(model, &SinusoidSpec::new(10.0, 1000.0))
        .map_err(|e| DynamicsError::unreachable(e.to_string()))?;
    let (errors, scales) = round_trip_errors(model, &traj)?;
    let threshold = if model.dof() == 1 {
        tol::ROUND_TRIP_MEAN_1DOF
    } else {
        tol::ROUND_TRIP_MEAN_CHAIN
    };
    report.checks.push(CheckResult::from_errors(
        "fd_id_round_trip",
        &errors,
        &scales,
        threshold,
    ));

    // (b) dense mass-matrix oracle on random states
    {
        let mut sym_errors = Vec::new();
        let mut fd_errors = Vec::new();
        let mut scales = Vec::new();
        let mut pd_ok = true;
        for _ in 0..20 {
            let state = random_chain_state(model, &mut rng);
            let (m, _) = mass_matrix(model, &state.x, &state.xdot)?;
            sym_errors.push((&m - m.transpose()).abs().max());
            pd_ok &= m
                .clone()
                .symmetric_eigenvalues()
                .iter()
                .all(|&e| e > 0.0);
            let dense = forward_dynamics_dense(model, &state)?;
            let recursive = forward_dynamics(model, &state)?.xddot;
            let err: f64 = dense
                .iter()
                .zip(&recursive)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            fd_errors.push(err);
            scales.push(recursive.iter().map(|v| v.abs()).fold(1.0, f64::max));
        }
        let mut sym = CheckResult::from_errors(
            "mass_matrix_symmetry",
            &sym_errors,
            &vec![1.0; sym_errors.len()],
            tol::MASS_MATRIX_SYM_TOL,
        );
        sym.pass &= pd_ok;
        report.checks.push(sym);
        report.checks.push(CheckResult::from_errors(
            "mass_matrix_fd_equivalence",
            &fd_errors,
            &scales,
            tol::MASS_MATRIX_FD_TOL,
        ));
    }

    // (c)-(e): per parallel module, on random module-level states
    for (idx, module) in model.modules.iter().enumerate() {
        let ModuleKind::Parallel(params) = &module.kind else {
            continue;
        };
        let mut cramer_err = Vec::new();
        let mut cramer_scale = Vec::new();
        let mut form_err = Vec::new();
        let mut wrench_err = Vec::new();
        let mut wrench_scale = Vec::new();
        for _ in 0..1000 {
            let state = random_loop_state(params, &mut rng);
            let nu_bc = random_motion(&mut rng, 1.0);
            let dnu_bc = random_motion(&mut rng, 2.0);
            let xddot = uniform(&mut rng, -5.0, 5.0);
            let f_ext = random_wrench(&mut rng, 100.0);

            // two analytic routes to the actuator force
            let kin = loop_kinematics(params, &state, &nu_bc, Some((&dnu_bc, xddot)));
            let f_cramer = inverse_dynamics_cramer_from_kinematics(params, &state, &kin, &f_ext)?;
            let kmat = k_matrices(params, &state)?;
            let w = local_wrenches(params, &kin, &f_ext);
            let f_b4 = actuator_wrench(&kmat, &w.f_tilde_b1, &w.f_hat_b3, &w.f_hat_b4);
            cramer_err.push((f_cramer - f_b4.force.x).abs());
            cramer_scale.push(f_cramer.abs().max(1.0));

            // two scalar FD forms: (f - beta)/alpha vs (f - psi dnu - delta)/alpha
            let asm = parallel_forward_pass(params, &state, &nu_bc);
            let bwd =
                parallel_backward_pass(params, &asm, &kmat, &SpatialInertia::zero(), &f_ext, f_cramer)?;
            let xdd_33 = parallel_fd(&bwd, f_cramer, &dnu_bc)?;
            let beta = parallel_beta_direct(params, &asm, &kmat, &bwd, &dnu_bc);
            let xdd_12 = (f_cramer - beta) / bwd.alpha;
            form_err.push((xdd_33 - xdd_12).abs());

            // assembled base wrench vs direct four-wrench summation
            let f_bc_assembled =
                bwd.m_a_bc.apply(&dnu_bc) + bwd.p_a_bc;
            let f_b0 = params.body_base.apply(&dnu_bc) + kin.p_b0;
            let f_bc_direct = f_b0
                + kin.frames.b1_from_bc.act_force(&w.f_tilde_b1)
                + kin.frames.b3_from_bc.act_force(&w.f_hat_b3)
                + kin.frames.b4_from_bc.act_force(&w.f_hat_b4);
            let diff = f_bc_assembled - f_bc_direct;
            wrench_err.push(diff.norm());
            wrench_scale.push(f_bc_direct.norm().max(1.0));
        }
        let tag = |s: &str| format!("{s}[{}:{}]", idx, module.name);
        report.checks.push(CheckResult::from_errors(
            &tag("cramer_vs_k_projection"),
            &cramer_err,
            &cramer_scale,
            tol::ORACLE_TOL,
        ));
        report.checks.push(CheckResult::from_errors(
            &tag("fd_form_equivalence"),
            &form_err,
            &vec![1.0; form_err.len()],
            tol::FD_FORM_TOL,
        ));
        report.checks.push(CheckResult::from_errors(
            &tag("assembled_vs_direct_wrench"),
            &wrench_err,
            &wrench_scale,
            tol::WRENCH_EQUIV_TOL,
        ));
    }

    Ok(report)
}

/// Random chain state inside every module's usable range.
pub fn random_chain_state(
    model: &ManipulatorModel<f64>,
    rng: &mut ChaCha8Rng,
) -> ActuatorState<f64> {
    let mut x = Vec::with_capacity(model.dof());
    let mut xdot = Vec::with_capacity(model.dof());
    let mut f = Vec::with_capacity(model.dof());
    for module in &model.modules {
        match &module.kind {
            ModuleKind::Parallel(p) => {
                let (lo, hi) = crate::trajectory::usable_range(p);
                let margin = 0.05 * (hi - lo);
                x.push(uniform(rng, lo + margin, hi - margin));
            }
            ModuleKind::Serial(_) => x.push(uniform(rng, -0.8, 0.8)),
        }
        xdot.push(uniform(rng, -0.5, 0.5));
        f.push(uniform(rng, -200.0, 200.0));
    }
    ActuatorState::new(x, xdot, f)
}
