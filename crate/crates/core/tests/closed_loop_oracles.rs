//! Oracle tests of the closed loop: triangle-geometry residuals, constraint
//! round trips, finite-difference checks of the rate coefficients, loop
//! consistency at the shared tip, the numeric constraint-system oracle for
//! the closed-form K blocks and the two analytic actuator-force routes.

use nalgebra::{Matrix3, SMatrix, Vector3};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use psm_core::closed_loop::{
    actuator_wrench, constraint_determinant, constraint_matrix, inverse_dynamics_cramer,
    inverse_dynamics_cramer_from_kinematics, k_matrices, local_wrenches, loop_kinematics,
    solve_closure, solve_closure_from_x, ClosureState, ParallelModuleParams,
};
use psm_core::spatial::{SpatialForceVector, SpatialInertia, SpatialMotionVector};
use psm_core::DynamicsError;

fn body(m: f64, com: [f64; 3], diag: [f64; 3]) -> SpatialInertia<f64> {
    SpatialInertia::from_mass_properties(
        m,
        &Vector3::new(com[0], com[1], com[2]),
        &Matrix3::from_diagonal(&Vector3::new(diag[0], diag[1], diag[2])),
    )
}

fn params() -> ParallelModuleParams<f64> {
    ParallelModuleParams {
        base_span: 0.8,
        boom_length: 2.4,
        rod_length: 0.25,
        cylinder_offset: 0.35,
        tip_offset: psm_core::Transform64::rotation_z(0.15).compose(
            &psm_core::Transform64::from_translation(Vector3::new(0.3, -0.1, 0.0)),
        ),
        body_base: body(60.0, [0.4, 0.0, 0.0], [1.5, 14.0, 14.0]),
        body_boom: body(180.0, [1.2, 0.05, 0.0], [4.0, 346.0, 346.0]),
        body_cylinder: body(80.0, [0.3, 0.0, 0.0], [0.8, 12.0, 12.0]),
        body_rod: body(45.0, [-0.3, 0.0, 0.0], [0.35, 8.0, 8.0]),
        body_tip: body(50.0, [0.1, 0.0, 0.0], [1.5, 2.0, 2.5]),
    }
}

fn rng() -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0x5eed)
}

fn random_state(p: &ParallelModuleParams<f64>, rng: &mut ChaCha8Rng) -> ClosureState<f64> {
    let q = -rng.random_range(0.45..2.6);
    let xdot = rng.random_range(-1.0..1.0);
    solve_closure(p, q, xdot).unwrap()
}

fn random_motion(rng: &mut ChaCha8Rng, s: f64) -> SpatialMotionVector<f64> {
    SpatialMotionVector::new(
        Vector3::new(
            rng.random_range(-s..s),
            rng.random_range(-s..s),
            rng.random_range(-s..s),
        ),
        Vector3::new(
            rng.random_range(-s..s),
            rng.random_range(-s..s),
            rng.random_range(-s..s),
        ),
    )
}

fn random_wrench(rng: &mut ChaCha8Rng, s: f64) -> SpatialForceVector<f64> {
    let m = random_motion(rng, s);
    SpatialForceVector::new(m.linear, m.angular)
}

#[test]
fn closure_round_trip_q_to_x_to_q() {
    let p = params();
    let mut rng = rng();
    for _ in 0..100 {
        let q = -rng.random_range(0.45..2.6);
        let st = solve_closure(&p, q, 0.0).unwrap();
        let back = solve_closure_from_x(&p, st.x, 0.0).unwrap();
        assert!((back.q - q).abs() < 1e-10, "q={q} back={}", back.q);
    }
}

// law-of-cosines residual: independent triangle-geometry oracle for the
// accepted closure solutions
#[test]
fn law_of_cosines_residual() {
    let p = params();
    let mut rng = rng();
    for _ in 0..100 {
        let st = random_state(&p, &mut rng);
        let xs = st.x + p.retracted_length();
        let residual =
            p.base_span.powi(2) - (xs * xs + p.boom_length.powi(2) - 2.0 * xs * p.boom_length * st.q2.cos());
        assert!(residual.abs() < 1e-10);
        assert!(st.residual < 1e-10);
    }
}

// velocity-level consistency: finite differences of (x, q1, q2) along an
// analytic trajectory match the k-coefficient predictions
#[test]
fn velocity_constraints_match_finite_differences() {
    let p = params();
    let (q0, qdot) = (-1.3, 0.37);
    let h = 1e-6;
    let at = |t: f64| solve_closure(&p, q0 + qdot * t, 0.0).unwrap();
    let (prev, mid, next) = (at(-h), at(0.0), at(h));

    let xdot_fd = (next.x - prev.x) / (2.0 * h);
    let q1dot_fd = (next.q1 - prev.q1) / (2.0 * h);
    let q2dot_fd = (next.q2 - prev.q2) / (2.0 * h);

    // qdot = k1 xdot  =>  xdot = qdot / k1
    let xdot = qdot / mid.k[0];
    assert!((xdot_fd - xdot).abs() < 2e-6);
    assert!((q1dot_fd - mid.k[1] * xdot).abs() < 2e-6);
    assert!((q2dot_fd - mid.k[2] * xdot).abs() < 2e-6);
}

// the rate terms k4..k6 are xdot^2-scaled analytic derivatives of k1..k3;
// check dk_i/dx against central finite differences
#[test]
fn rate_coefficients_match_finite_differences() {
    let p = params();
    let mut rng = rng();
    for _ in 0..20 {
        let st = random_state(&p, &mut rng);
        let h = 1e-6;
        let plus = solve_closure_from_x(&p, st.x + h, 0.0).unwrap();
        let minus = solve_closure_from_x(&p, st.x - h, 0.0).unwrap();
        for i in 0..3 {
            let dk_fd = (plus.k[i] - minus.k[i]) / (2.0 * h);
            let xd2 = st.xdot * st.xdot;
            if xd2 > 1e-6 {
                let dk_analytic = st.k[3 + i] / xd2;
                assert!(
                    (dk_fd - dk_analytic).abs() < 1e-6 * (1.0 + dk_analytic.abs()),
                    "k{} rate mismatch: fd={dk_fd} analytic={dk_analytic}",
                    i + 1
                );
            }
        }
    }
}

// both chains of the loop must agree on the tip twist and tip acceleration
#[test]
fn tip_consistency_twist_and_acceleration() {
    let p = params();
    let mut rng = rng();
    for _ in 0..100 {
        let st = random_state(&p, &mut rng);
        let nu_bc = random_motion(&mut rng, 1.0);
        let dnu_bc = random_motion(&mut rng, 2.0);
        let xddot = rng.random_range(-5.0..5.0);
        let kin = loop_kinematics(&p, &st, &nu_bc, Some((&dnu_bc, xddot)));
        let dv = kin.nu_t1 - kin.nu_t2;
        assert!(dv.norm() < 1e-10, "tip twist mismatch: {}", dv.norm());
        let acc = kin.accel.unwrap();
        let da = acc.dnu_t1 - acc.dnu_t2;
        assert!(da.norm() < 1e-10, "tip accel mismatch: {}", da.norm());
    }
}

// direct recursion step reproduced entry for entry
#[test]
fn actuator_twist_recursion_step() {
    let p = params();
    let mut rng = rng();
    let st = random_state(&p, &mut rng);
    let nu_bc = random_motion(&mut rng, 1.0);
    let kin = loop_kinematics(&p, &st, &nu_bc, None);
    let expect = kin.frames.b4_from_b3.act_motion(&kin.nu_b3)
        + SpatialMotionVector::prismatic_x() * st.xdot;
    assert_eq!(kin.nu_b4.to_vector(), expect.to_vector());
}

// numeric linear-algebra oracle: the closed-form K blocks equal the
// constraint-matrix inverse applied to the row-rearrangement map
#[test]
fn k_blocks_match_numeric_constraint_inverse() {
    let p = params();
    let mut rng = rng();
    // rhs = C stack, stack = (planar f~_B1, planar f^_B3, planar f^_B4)
    let mut c = SMatrix::<f64, 7, 9>::zeros();
    c[(0, 2)] = 1.0;
    c[(1, 6)] = -1.0;
    c[(2, 7)] = -1.0;
    c[(3, 8)] = -1.0;
    c[(4, 5)] = -1.0;
    c[(5, 3)] = 1.0;
    c[(6, 4)] = 1.0;

    for _ in 0..50 {
        let st = random_state(&p, &mut rng);
        let a = constraint_matrix(&p, &st);
        let a_inv = a.try_inverse().unwrap();
        let block = a_inv.fixed_rows::<3>(2) * c;

        let km = k_matrices(&p, &st).unwrap();
        let planar = [0usize, 1, 5];
        for (bj, kmat) in [(0, &km.k1), (1, &km.k3), (2, &km.k4)] {
            for (i, &pi) in planar.iter().enumerate() {
                for (j, &pj) in planar.iter().enumerate() {
                    let numeric = block[(i, 3 * bj + j)];
                    let closed = kmat[(pi, pj)];
                    assert!(
                        (numeric - closed).abs() < 1e-10 * (1.0 + closed.abs()),
                        "K block {bj} entry ({i},{j}): numeric {numeric} vs closed {closed}"
                    );
                }
            }
        }
    }
}

#[test]
fn determinant_matches_closed_form() {
    let p = params();
    let mut rng = rng();
    for _ in 0..100 {
        let st = random_state(&p, &mut rng);
        let det = constraint_matrix(&p, &st).determinant();
        let closed = constraint_determinant(&p, &st);
        assert!((det - closed).abs() < 1e-10 * closed.abs().max(1.0));
    }
}

// two independent analytic routes to the scalar actuator force
#[test]
fn cramer_equals_projected_actuator_wrench() {
    let p = params();
    let mut rng = rng();
    for _ in 0..100 {
        let st = random_state(&p, &mut rng);
        let nu_bc = random_motion(&mut rng, 1.0);
        let dnu_bc = random_motion(&mut rng, 2.0);
        let xddot = rng.random_range(-5.0..5.0);
        let f_ext = random_wrench(&mut rng, 200.0);

        let kin = loop_kinematics(&p, &st, &nu_bc, Some((&dnu_bc, xddot)));
        let f_cramer =
            inverse_dynamics_cramer_from_kinematics(&p, &st, &kin, &f_ext).unwrap();

        let km = k_matrices(&p, &st).unwrap();
        let w = local_wrenches(&p, &kin, &f_ext);
        let f_b4 = actuator_wrench(&km, &w.f_tilde_b1, &w.f_hat_b3, &w.f_hat_b4);
        assert!((f_cramer - f_b4.force.x).abs() < 1e-10 * f_cramer.abs().max(1.0));

        // projector sparsity of the published wrench structure
        assert_eq!(f_b4.force.z, 0.0);
        assert_eq!(f_b4.moment.x, 0.0);
        assert_eq!(f_b4.moment.y, 0.0);
    }
}

#[test]
fn actuator_wrench_of_zero_inputs_is_zero() {
    let p = params();
    let st = solve_closure(&p, -1.2, 0.0).unwrap();
    let km = k_matrices(&p, &st).unwrap();
    let z = SpatialForceVector::zero();
    assert_eq!(actuator_wrench(&km, &z, &z, &z).to_vector(), z.to_vector());
}

// the analytic force is affine in the actuator acceleration
#[test]
fn cramer_force_is_affine_in_acceleration() {
    let p = params();
    let mut rng = rng();
    for _ in 0..20 {
        let st = random_state(&p, &mut rng);
        let nu_bc = random_motion(&mut rng, 1.0);
        let dnu_bc = random_motion(&mut rng, 2.0);
        let f_ext = SpatialForceVector::zero();
        let f0 = inverse_dynamics_cramer(&p, &st, &nu_bc, &dnu_bc, 0.0, &f_ext).unwrap();
        let f1 = inverse_dynamics_cramer(&p, &st, &nu_bc, &dnu_bc, 1.0, &f_ext).unwrap();
        let alpha = f1 - f0;
        for xdd in [-3.0, -0.5, 2.0, 7.5] {
            let f = inverse_dynamics_cramer(&p, &st, &nu_bc, &dnu_bc, xdd, &f_ext).unwrap();
            assert!((f - (f0 + alpha * xdd)).abs() < 1e-10 * f.abs().max(1.0));
        }
    }
}

#[test]
fn singular_configurations_are_rejected() {
    let p = params();
    // q -> 0 folds the loop flat
    assert!(matches!(
        solve_closure(&p, -1e-12, 0.0),
        Err(
            DynamicsError::SingularConfiguration { .. }
                | DynamicsError::UnreachableConfiguration { .. }
        )
    ));
}
