//! Property tests of the spatial algebra layer: group axioms, adjoint
//! homomorphism, exponential-map consistency against a series oracle, the
//! duality pairings, bracket axioms and inertia congruence.

use nalgebra::{Matrix3, Matrix6, Vector3};
use proptest::prelude::*;
use psm_core::spatial::{
    lie_bracket, lie_bracket_dual, SpatialForceVector, SpatialInertia, SpatialMotionVector,
    SpatialTransform,
};
use psm_core::tol::{ORACLE_TOL, ORTHO_TOL};

type T64 = SpatialTransform<f64>;

fn max_abs(m: &Matrix6<f64>) -> f64 {
    m.iter().fold(0.0f64, |a, v| a.max(v.abs()))
}

/// Matrix exponential by scaling-and-squaring on a Taylor series; the
/// independent oracle for the adjoint of a screw exponential.
fn expm6(a: &Matrix6<f64>) -> Matrix6<f64> {
    let norm = a.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let scalings = norm.log2().ceil().max(0.0) as i32 + 4;
    let scaled = a / 2f64.powi(scalings);
    let mut term = Matrix6::identity();
    let mut sum = Matrix6::identity();
    for k in 1..30 {
        term = term * scaled / k as f64;
        sum += term;
    }
    let mut result = sum;
    for _ in 0..scalings {
        result = result * result;
    }
    result
}

prop_compose! {
    fn arb_unit_vector()(x in -1.0f64..1.0, y in -1.0f64..1.0, z in -1.0f64..1.0) -> Vector3<f64> {
        let v = Vector3::new(x, y, z);
        if v.norm() < 1e-3 { Vector3::z() } else { v.normalize() }
    }
}

prop_compose! {
    fn arb_transform()(axis in arb_unit_vector(),
                       angle in -3.0f64..3.0,
                       tx in -2.0f64..2.0, ty in -2.0f64..2.0, tz in -2.0f64..2.0) -> T64 {
        let mut t = T64::from_axis_angle(&axis, angle);
        t.translation = Vector3::new(tx, ty, tz);
        t
    }
}

prop_compose! {
    fn arb_motion()(a in -2.0f64..2.0, b in -2.0f64..2.0, c in -2.0f64..2.0,
                    d in -2.0f64..2.0, e in -2.0f64..2.0, f in -2.0f64..2.0) -> SpatialMotionVector<f64> {
        SpatialMotionVector::new(Vector3::new(a, b, c), Vector3::new(d, e, f))
    }
}

prop_compose! {
    fn arb_force()(a in -2.0f64..2.0, b in -2.0f64..2.0, c in -2.0f64..2.0,
                   d in -2.0f64..2.0, e in -2.0f64..2.0, f in -2.0f64..2.0) -> SpatialForceVector<f64> {
        SpatialForceVector::new(Vector3::new(a, b, c), Vector3::new(d, e, f))
    }
}

prop_compose! {
    fn arb_inertia()(mass in 0.1f64..100.0,
                     cx in -0.5f64..0.5, cy in -0.5f64..0.5, cz in -0.5f64..0.5,
                     d1 in 0.1f64..10.0, d2 in 0.1f64..10.0, d3 in 0.1f64..10.0) -> SpatialInertia<f64> {
        let com = Vector3::new(cx, cy, cz);
        // point-mass part plus a positive diagonal keeps it physically valid
        let cxm = psm_core::spatial::skew(&com);
        let point = (cxm * cxm.transpose()) * mass;
        let rot = point + Matrix3::from_diagonal(&Vector3::new(d1, d2, d3));
        SpatialInertia::from_mass_properties(mass, &com, &rot)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn group_axioms(a in arb_transform(), b in arb_transform(), c in arb_transform()) {
        let assoc_l = a.compose(&b).compose(&c);
        let assoc_r = a.compose(&b.compose(&c));
        prop_assert!((assoc_l.rotation - assoc_r.rotation).norm() < ORTHO_TOL);
        prop_assert!((assoc_l.translation - assoc_r.translation).norm() < ORTHO_TOL);

        let id = a.compose(&a.inverse());
        prop_assert!((id.rotation - Matrix3::identity()).norm() < ORTHO_TOL);
        prop_assert!(id.translation.norm() < ORTHO_TOL);
        prop_assert!(a.rotation_error() < ORTHO_TOL);
    }

    #[test]
    fn adjoint_homomorphism(a in arb_transform(), b in arb_transform()) {
        let lhs = a.compose(&b).adjoint();
        let rhs = a.adjoint() * b.adjoint();
        prop_assert!(max_abs(&(lhs - rhs)) < ORTHO_TOL);
    }

    #[test]
    fn adjoint_inverse_cancels(a in arb_transform()) {
        let prod = a.adjoint() * a.inverse().adjoint();
        prop_assert!(max_abs(&(prod - Matrix6::identity())) < ORTHO_TOL);
    }

    #[test]
    fn adjoint_of_identity_is_identity(_x in 0..1i32) {
        prop_assert_eq!(T64::identity().adjoint(), Matrix6::identity());
        prop_assert_eq!(T64::identity().adjoint_dual(), Matrix6::identity());
    }

    // Ad of a screw exponential equals the matrix exponential of the scaled
    // bracket operator (series oracle).
    #[test]
    fn exp_screw_adjoint_matches_series(axis in arb_unit_vector(), q in -2.5f64..2.5, prismatic in any::<bool>()) {
        let s = if prismatic {
            SpatialMotionVector::new(axis, Vector3::zeros())
        } else {
            SpatialMotionVector::new(Vector3::zeros(), axis)
        };
        let g = T64::exp_screw(&s, q).unwrap();
        let oracle = expm6(&(lie_bracket(&s) * q));
        prop_assert!(max_abs(&(g.adjoint() - oracle)) < ORACLE_TOL);
    }

    // general screws (rotation + pitch) also satisfy the series identity
    #[test]
    fn exp_general_screw_matches_series(axis in arb_unit_vector(), q in -2.0f64..2.0,
                                        vx in -1.0f64..1.0, vy in -1.0f64..1.0, vz in -1.0f64..1.0) {
        let s = SpatialMotionVector::new(Vector3::new(vx, vy, vz), axis);
        let g = T64::exp_screw(&s, q).unwrap();
        let oracle = expm6(&(lie_bracket(&s) * q));
        prop_assert!(max_abs(&(g.adjoint() - oracle)) < ORACLE_TOL);
    }

    // <Ad* F, nu> = <F, Ad nu>: the defining property of the dual action
    #[test]
    fn dual_adjoint_power_pairing(t in arb_transform(), f in arb_force(), nu in arb_motion()) {
        let lhs = t.act_force(&f).pairing(&nu);
        let rhs = f.pairing(&t.act_motion(&nu));
        prop_assert!((lhs - rhs).abs() < ORTHO_TOL * (1.0 + lhs.abs()));
    }

    // the dual adjoint is exactly the transpose of the adjoint
    #[test]
    fn dual_adjoint_is_transpose(t in arb_transform()) {
        prop_assert!(max_abs(&(t.adjoint_dual() - t.adjoint().transpose())) < 1e-15);
        // consequence: Ad*(T) Ad*(T^-1) = I
        let prod = t.adjoint_dual() * t.inverse().adjoint_dual();
        prop_assert!(max_abs(&(prod - Matrix6::identity())) < ORTHO_TOL);
    }

    #[test]
    fn bracket_annihilates_itself(nu in arb_motion()) {
        prop_assert!(nu.bracket(&nu).norm() < ORTHO_TOL);
    }

    #[test]
    fn bracket_of_zero_is_zero(_x in 0..1i32) {
        prop_assert_eq!(lie_bracket(&SpatialMotionVector::<f64>::zero()), Matrix6::zeros());
        prop_assert_eq!(lie_bracket_dual(&SpatialMotionVector::<f64>::zero()), Matrix6::zeros());
    }

    #[test]
    fn jacobi_identity(a in arb_motion(), b in arb_motion(), c in arb_motion()) {
        let residual = a.bracket(&b.bracket(&c))
            + b.bracket(&c.bracket(&a))
            + c.bracket(&a.bracket(&b));
        prop_assert!(residual.norm() < ORTHO_TOL * 100.0); // cubic products; scaled tolerance
    }

    // <ad*_w F, nu> = <F, ad_w nu> and the sign pin ad*_w = +(ad_w)^T
    #[test]
    fn dual_bracket_pairing(w in arb_motion(), f in arb_force(), nu in arb_motion()) {
        let lhs = w.bracket_dual(&f).pairing(&nu);
        let rhs = f.pairing(&w.bracket(&nu));
        prop_assert!((lhs - rhs).abs() < ORTHO_TOL * (1.0 + lhs.abs()));
        prop_assert!(max_abs(&(lie_bracket_dual(&w) - lie_bracket(&w).transpose())) < 1e-15);
    }

    // congruence transform preserves symmetry, positive-definiteness and
    // kinetic energy
    #[test]
    fn inertia_congruence(m in arb_inertia(), t in arb_transform(), nu in arb_motion()) {
        let m2 = m.transform(&t);
        prop_assert!(m2.symmetry_error() < ORTHO_TOL * (1.0 + max_abs(m2.matrix())));
        prop_assert!(m2.min_eigenvalue() > -ORTHO_TOL);

        // energy invariance: nu lives in the source frame of t, m in the target
        let e_src = m2.kinetic_energy(&nu);
        let e_tgt = m.kinetic_energy(&t.act_motion(&nu));
        prop_assert!((e_src - e_tgt).abs() < ORTHO_TOL * (1.0 + e_src.abs()));
    }

    #[test]
    fn inertia_transform_by_identity_is_noop(m in arb_inertia()) {
        let m2 = m.transform(&T64::identity());
        prop_assert!(max_abs(&(m2.matrix() - m.matrix())) < 1e-15);
    }
}

#[test]
fn exp_screw_zero_exponent_is_identity() {
    let g = T64::exp_screw(&SpatialMotionVector::revolute_z(), 0.0).unwrap();
    assert_eq!(g.rotation, Matrix3::identity());
    assert_eq!(g.translation, Vector3::zeros());
}

#[test]
fn exp_screw_quarter_turn_about_z() {
    let g = T64::exp_screw(&SpatialMotionVector::revolute_z(), std::f64::consts::FRAC_PI_2)
        .unwrap();
    let expect = Matrix3::new(0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0);
    assert!((g.rotation - expect).norm() < 1e-15);
    assert!(g.translation.norm() < 1e-15);
}

// the algebra is generic over the scalar; exercise the f32 instantiation
#[test]
fn f32_instantiation_works() {
    let t = SpatialTransform::<f32>::rotation_z(0.5f32)
        .compose(&SpatialTransform::from_translation(Vector3::new(
            1.0f32, 0.0, 0.0,
        )));
    let nu = SpatialMotionVector::new(Vector3::new(0.1f32, 0.2, 0.3), Vector3::new(0.0, 0.0, 1.0));
    let f = SpatialForceVector::new(Vector3::new(1.0f32, 2.0, 3.0), Vector3::new(0.5, 0.5, 0.5));
    let lhs = t.act_force(&f).pairing(&nu);
    let rhs = f.pairing(&t.act_motion(&nu));
    assert!((lhs - rhs).abs() < 1e-5);
}
