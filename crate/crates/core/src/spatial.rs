//! Fixed-size 6D spatial vector algebra: rigid transforms with their adjoint
//! actions on twists and wrenches, Lie bracket operators, and spatial inertia.
//!
//! Ordering convention, fixed repo-wide: motion vectors store the linear part
//! first, `[v; w]`, and force vectors store force first, `[f; m]`, so the
//! power pairing `<F, nu> = f.v + m.w` is the plain dot product. The unit
//! joint screws are then `s_x = [1 0 0 0 0 0]` (prismatic along x) and
//! `s_z = [0 0 0 0 0 1]` (revolute about z).
//!
//! A [`SpatialTransform`] is a coordinate map: for `g` mapping frame `a` to
//! frame `b`, `x_b = R x_a + p`. Its adjoint moves twists from `a` to `b`
//! while the dual adjoint moves wrenches the opposite way, from `b` to `a`,
//! so that `<Ad*_g F, nu> = <F, Ad_g nu>` always holds.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{Matrix3, Matrix6, Vector3, Vector6};

use crate::opcount;
use crate::real::{real, Real};

/// Skew-symmetric cross-product matrix `[v]x`.
#[inline]
pub fn skew<T: Real>(v: &Vector3<T>) -> Matrix3<T> {
    Matrix3::new(
        T::zero(),
        -v.z,
        v.y,
        v.z,
        T::zero(),
        -v.x,
        -v.y,
        v.x,
        T::zero(),
    )
}

/// Counted 6x6 matrix product; see [`crate::opcount`].
#[inline]
pub fn mul66<T: Real>(a: &Matrix6<T>, b: &Matrix6<T>) -> Matrix6<T> {
    opcount::tick();
    a * b
}

// ---------------------------------------------------------------------------
// motion and force vectors
// ---------------------------------------------------------------------------

/// Element of the motion algebra: twist, spatial acceleration or screw.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpatialMotionVector<T: Real> {
    pub linear: Vector3<T>,
    pub angular: Vector3<T>,
}

/// Element of the dual (force) algebra: wrench or momentum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpatialForceVector<T: Real> {
    pub force: Vector3<T>,
    pub moment: Vector3<T>,
}

impl<T: Real> SpatialMotionVector<T> {
    pub fn new(linear: Vector3<T>, angular: Vector3<T>) -> Self {
        Self { linear, angular }
    }

    pub fn zero() -> Self {
        Self::new(Vector3::zeros(), Vector3::zeros())
    }

    /// Unit prismatic screw along the local x axis.
    pub fn prismatic_x() -> Self {
        Self::new(Vector3::x(), Vector3::zeros())
    }

    /// Unit revolute screw about the local z axis.
    pub fn revolute_z() -> Self {
        Self::new(Vector3::zeros(), Vector3::z())
    }

    pub fn from_vector(v: &Vector6<T>) -> Self {
        Self::new(
            v.fixed_rows::<3>(0).into_owned(),
            v.fixed_rows::<3>(3).into_owned(),
        )
    }

    pub fn to_vector(&self) -> Vector6<T> {
        let mut v = Vector6::zeros();
        v.fixed_rows_mut::<3>(0).copy_from(&self.linear);
        v.fixed_rows_mut::<3>(3).copy_from(&self.angular);
        v
    }

    /// Lie bracket `ad_self other`.
    pub fn bracket(&self, other: &Self) -> Self {
        Self::new(
            self.angular.cross(&other.linear) + self.linear.cross(&other.angular),
            self.angular.cross(&other.angular),
        )
    }

    /// Dual bracket action `ad*_self f`.
    pub fn bracket_dual(&self, f: &SpatialForceVector<T>) -> SpatialForceVector<T> {
        // ad*_v = (ad_v)^T acting on [f; m].
        SpatialForceVector::new(
            -self.angular.cross(&f.force),
            -self.linear.cross(&f.force) - self.angular.cross(&f.moment),
        )
    }

    pub fn norm(&self) -> T {
        self.to_vector().norm()
    }

    /// Deviation from a unit joint screw: either a unit rotation axis or a
    /// pure translation with unit direction.
    pub fn unit_screw_error(&self) -> T {
        let wn = self.angular.norm();
        if wn > real(0.5) {
            (wn - T::one()).abs()
        } else {
            wn.max((self.linear.norm() - T::one()).abs())
        }
    }
}

impl<T: Real> SpatialForceVector<T> {
    pub fn new(force: Vector3<T>, moment: Vector3<T>) -> Self {
        Self { force, moment }
    }

    pub fn zero() -> Self {
        Self::new(Vector3::zeros(), Vector3::zeros())
    }

    pub fn from_vector(v: &Vector6<T>) -> Self {
        Self::new(
            v.fixed_rows::<3>(0).into_owned(),
            v.fixed_rows::<3>(3).into_owned(),
        )
    }

    pub fn to_vector(&self) -> Vector6<T> {
        let mut v = Vector6::zeros();
        v.fixed_rows_mut::<3>(0).copy_from(&self.force);
        v.fixed_rows_mut::<3>(3).copy_from(&self.moment);
        v
    }

    /// Power pairing `<F, nu>` [W].
    pub fn pairing(&self, nu: &SpatialMotionVector<T>) -> T {
        self.force.dot(&nu.linear) + self.moment.dot(&nu.angular)
    }

    pub fn norm(&self) -> T {
        self.to_vector().norm()
    }
}

macro_rules! impl_vector_ops {
    ($ty:ident, $a:ident, $b:ident) => {
        impl<T: Real> Add for $ty<T> {
            type Output = Self;
            fn add(self, rhs: Self) -> Self {
                Self::new(self.$a + rhs.$a, self.$b + rhs.$b)
            }
        }
        impl<T: Real> Sub for $ty<T> {
            type Output = Self;
            fn sub(self, rhs: Self) -> Self {
                Self::new(self.$a - rhs.$a, self.$b - rhs.$b)
            }
        }
        impl<T: Real> Neg for $ty<T> {
            type Output = Self;
            fn neg(self) -> Self {
                Self::new(-self.$a, -self.$b)
            }
        }
        impl<T: Real> Mul<T> for $ty<T> {
            type Output = Self;
            fn mul(self, s: T) -> Self {
                Self::new(self.$a * s, self.$b * s)
            }
        }
    };
}

impl_vector_ops!(SpatialMotionVector, linear, angular);
impl_vector_ops!(SpatialForceVector, force, moment);

/// 6x6 Lie bracket operator `ad_nu` (acts on motion vectors).
pub fn lie_bracket<T: Real>(nu: &SpatialMotionVector<T>) -> Matrix6<T> {
    let wx = skew(&nu.angular);
    let vx = skew(&nu.linear);
    let mut m = Matrix6::zeros();
    m.fixed_view_mut::<3, 3>(0, 0).copy_from(&wx);
    m.fixed_view_mut::<3, 3>(0, 3).copy_from(&vx);
    m.fixed_view_mut::<3, 3>(3, 3).copy_from(&wx);
    m
}

/// 6x6 dual bracket operator `ad*_nu = (ad_nu)^T` (acts on force vectors).
pub fn lie_bracket_dual<T: Real>(nu: &SpatialMotionVector<T>) -> Matrix6<T> {
    lie_bracket(nu).transpose()
}

// ---------------------------------------------------------------------------
// rigid transforms
// ---------------------------------------------------------------------------

/// Rigid coordinate map `x_target = R x_source + p`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpatialTransform<T: Real> {
    pub rotation: Matrix3<T>,
    pub translation: Vector3<T>,
}

impl<T: Real> SpatialTransform<T> {
    pub fn new(rotation: Matrix3<T>, translation: Vector3<T>) -> Self {
        Self {
            rotation,
            translation,
        }
    }

    pub fn identity() -> Self {
        Self::new(Matrix3::identity(), Vector3::zeros())
    }

    pub fn from_translation(translation: Vector3<T>) -> Self {
        Self::new(Matrix3::identity(), translation)
    }

    pub fn from_rotation(rotation: Matrix3<T>) -> Self {
        Self::new(rotation, Vector3::zeros())
    }

    pub fn rotation_z(angle: T) -> Self {
        let (s, c) = angle.sin_cos();
        Self::from_rotation(Matrix3::new(
            c,
            -s,
            T::zero(),
            s,
            c,
            T::zero(),
            T::zero(),
            T::zero(),
            T::one(),
        ))
    }

    pub fn from_axis_angle(axis: &Vector3<T>, angle: T) -> Self {
        let n = axis.norm();
        if n <= T::zero() {
            return Self::identity();
        }
        Self::from_rotation(rodrigues(&(axis / n), angle))
    }

    /// Roll-pitch-yaw (X, then Y, then Z) rotation.
    pub fn from_rpy(roll: T, pitch: T, yaw: T) -> Self {
        let (sr, cr) = roll.sin_cos();
        let (sp, cp) = pitch.sin_cos();
        let (sy, cy) = yaw.sin_cos();
        let rx = Matrix3::new(
            T::one(),
            T::zero(),
            T::zero(),
            T::zero(),
            cr,
            -sr,
            T::zero(),
            sr,
            cr,
        );
        let ry = Matrix3::new(
            cp,
            T::zero(),
            sp,
            T::zero(),
            T::one(),
            T::zero(),
            -sp,
            T::zero(),
            cp,
        );
        let rz = Matrix3::new(
            cy,
            -sy,
            T::zero(),
            sy,
            cy,
            T::zero(),
            T::zero(),
            T::zero(),
            T::one(),
        );
        Self::from_rotation(rz * ry * rx)
    }

    /// Composition `self . other`: apply `other` first.
    pub fn compose(&self, other: &Self) -> Self {
        Self::new(
            self.rotation * other.rotation,
            self.rotation * other.translation + self.translation,
        )
    }

    pub fn inverse(&self) -> Self {
        let rt = self.rotation.transpose();
        Self::new(rt, -(rt * self.translation))
    }

    /// Exponential of a unit screw: the displacement after moving a distance
    /// (or angle) `q` along `s`.
    pub fn exp_screw(s: &SpatialMotionVector<T>, q: T) -> Result<Self, crate::DynamicsError> {
        if s.unit_screw_error() > real(crate::tol::SCREW_TOL) {
            return Err(crate::DynamicsError::unreachable(
                "joint screw is not a unit rotation axis or unit translation direction",
            ));
        }
        Ok(Self::exp_screw_unchecked(s, q))
    }

    pub(crate) fn exp_screw_unchecked(s: &SpatialMotionVector<T>, q: T) -> Self {
        let w = s.angular;
        if w.norm() < real(0.5) {
            return Self::from_translation(s.linear * q);
        }
        let rotation = rodrigues(&w, q);
        let wx = skew(&w);
        let wx2 = wx * wx;
        // translation = (I q + (1 - cos q) [w] + (q - sin q) [w]^2) v
        let v_mat = Matrix3::identity() * q + wx * (T::one() - q.cos()) + wx2 * (q - q.sin());
        Self::new(rotation, v_mat * s.linear)
    }

    /// 6x6 adjoint: maps twists from the source frame to the target frame.
    pub fn adjoint(&self) -> Matrix6<T> {
        let mut m = Matrix6::zeros();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&self.rotation);
        m.fixed_view_mut::<3, 3>(0, 3)
            .copy_from(&(skew(&self.translation) * self.rotation));
        m.fixed_view_mut::<3, 3>(3, 3).copy_from(&self.rotation);
        m
    }

    /// 6x6 dual adjoint `Ad* = Ad^T`: maps wrenches from the target frame
    /// back to the source frame.
    pub fn adjoint_dual(&self) -> Matrix6<T> {
        self.adjoint().transpose()
    }

    /// `Ad_self nu` without forming the 6x6 operator.
    pub fn act_motion(&self, nu: &SpatialMotionVector<T>) -> SpatialMotionVector<T> {
        let w = self.rotation * nu.angular;
        SpatialMotionVector::new(
            self.rotation * nu.linear + self.translation.cross(&w),
            w,
        )
    }

    /// `Ad*_self f` without forming the 6x6 operator.
    pub fn act_force(&self, f: &SpatialForceVector<T>) -> SpatialForceVector<T> {
        let rt = self.rotation.transpose();
        SpatialForceVector::new(
            rt * f.force,
            rt * (f.moment - self.translation.cross(&f.force)),
        )
    }

    /// Worst deviation from SO(3): max of `|R^T R - I|` entries and `|det R - 1|`.
    pub fn rotation_error(&self) -> T {
        let gram = self.rotation.transpose() * self.rotation - Matrix3::identity();
        let mut worst = (self.rotation.determinant() - T::one()).abs();
        for v in gram.iter() {
            worst = worst.max(v.abs());
        }
        worst
    }

    /// Nearest-rotation cleanup used once at model load.
    pub fn orthonormalized(&self) -> Self {
        let x = self.rotation.column(0).normalize();
        let mut y = self.rotation.column(1).into_owned();
        y -= x * x.dot(&y);
        let y = y.normalize();
        let z = x.cross(&y);
        Self::new(Matrix3::from_columns(&[x, y, z]), self.translation)
    }
}

fn rodrigues<T: Real>(axis: &Vector3<T>, angle: T) -> Matrix3<T> {
    let wx = skew(axis);
    Matrix3::identity() + wx * angle.sin() + (wx * wx) * (T::one() - angle.cos())
}

// ---------------------------------------------------------------------------
// spatial inertia
// ---------------------------------------------------------------------------

/// Symmetric 6x6 spatial inertia / articulated inertia.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpatialInertia<T: Real> {
    mat: Matrix6<T>,
}

impl<T: Real> SpatialInertia<T> {
    pub fn zero() -> Self {
        Self {
            mat: Matrix6::zeros(),
        }
    }

    pub fn from_matrix(mat: Matrix6<T>) -> Self {
        Self { mat }
    }

    /// Rigid-body inertia from mass, center of mass and the rotational
    /// inertia about the frame origin.
    pub fn from_mass_properties(mass: T, com: &Vector3<T>, inertia_origin: &Matrix3<T>) -> Self {
        let cx = skew(com);
        let mut mat = Matrix6::zeros();
        mat.fixed_view_mut::<3, 3>(0, 0)
            .copy_from(&(Matrix3::identity() * mass));
        mat.fixed_view_mut::<3, 3>(0, 3).copy_from(&(-cx * mass));
        mat.fixed_view_mut::<3, 3>(3, 0).copy_from(&(cx * mass));
        mat.fixed_view_mut::<3, 3>(3, 3).copy_from(inertia_origin);
        Self { mat }
    }

    pub fn matrix(&self) -> &Matrix6<T> {
        &self.mat
    }

    pub fn mass(&self) -> T {
        self.mat[(0, 0)]
    }

    /// Center of mass of a rigid-body inertia (meaningless for general
    /// articulated inertias).
    pub fn mass_center(&self) -> Vector3<T> {
        let m = self.mass();
        if m == T::zero() {
            return Vector3::zeros();
        }
        Vector3::new(
            self.mat[(1, 5)] / m,
            self.mat[(2, 3)] / m,
            self.mat[(0, 4)] / m,
        )
    }

    /// Momentum / inertial wrench `M nu`.
    pub fn apply(&self, nu: &SpatialMotionVector<T>) -> SpatialForceVector<T> {
        SpatialForceVector::from_vector(&(self.mat * nu.to_vector()))
    }

    pub fn kinetic_energy(&self, nu: &SpatialMotionVector<T>) -> T {
        self.apply(nu).pairing(nu) * real(0.5)
    }

    /// Congruence `Ad*_g M Ad_g`: re-expresses an inertia given in the
    /// target frame of `g` in the source frame of `g`.
    pub fn transform(&self, g: &SpatialTransform<T>) -> Self {
        let ad = g.adjoint();
        Self {
            mat: mul66(&ad.transpose(), &mul66(&self.mat, &ad)),
        }
    }

    pub fn symmetry_error(&self) -> T {
        let d = self.mat - self.mat.transpose();
        let mut worst = T::zero();
        for v in d.iter() {
            worst = worst.max(v.abs());
        }
        worst
    }

    pub fn min_eigenvalue(&self) -> T {
        let half: T = real(0.5);
        let sym: Matrix6<T> = (self.mat + self.mat.transpose()) * half;
        sym.symmetric_eigenvalues()
            .iter()
            .fold(T::max_value().unwrap(), |acc, &e| acc.min(e))
    }

    pub fn is_zero(&self) -> bool {
        self.mat.iter().all(|v| *v == T::zero())
    }
}

impl<T: Real> Add for SpatialInertia<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self {
            mat: self.mat + rhs.mat,
        }
    }
}

/// Velocity-product wrench bias `p = -ad*_nu (M nu)` of a body moving with
/// twist `nu`.
pub fn wrench_bias<T: Real>(
    inertia: &SpatialInertia<T>,
    nu: &SpatialMotionVector<T>,
) -> SpatialForceVector<T> {
    let momentum = inertia.apply(nu);
    -nu.bracket_dual(&momentum)
}
