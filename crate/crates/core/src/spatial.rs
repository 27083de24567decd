//! Fixed-size rigid-body kinematics: skew matrices, rotations, poses, twists
//! and Z-Y-X Euler angles.
//!
//! Pose vectors used by the controller are ordered
//! `(x, y, z, roll, pitch, yaw)` where `R = Rz(yaw) * Ry(pitch) * Rx(roll)`.

use nalgebra::{Matrix3, Matrix6, Vector3, Vector6};

use crate::error::{GraspError, Result};
use crate::scalar::{lit, to_f64, Real};

/// Cross-product matrix: `skew(v) * w == v.cross(&w)`.
pub fn skew<T: Real>(v: &Vector3<T>) -> Matrix3<T> {
    let z = T::zero();
    Matrix3::new(z, -v.z, v.y, v.z, z, -v.x, -v.y, v.x, z)
}

/// Rotation about an arbitrary unit axis (Rodrigues).
pub fn axis_angle<T: Real>(axis: &Vector3<T>, angle: T) -> Matrix3<T> {
    let k = skew(axis);
    Matrix3::identity() + k * angle.sin() + k * k * (T::one() - angle.cos())
}

/// An element of SO(3) stored as a 3x3 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rot3<T: Real>(Matrix3<T>);

impl<T: Real> Rot3<T> {
    pub fn identity() -> Self {
        Rot3(Matrix3::identity())
    }

    /// Wraps a matrix without checking orthonormality.
    pub fn from_matrix_unchecked(m: Matrix3<T>) -> Self {
        Rot3(m)
    }

    /// Builds a rotation from three orthonormal columns.
    pub fn from_columns(x: &Vector3<T>, y: &Vector3<T>, z: &Vector3<T>) -> Self {
        Rot3(Matrix3::from_columns(&[*x, *y, *z]))
    }

    pub fn about_axis(axis: &Vector3<T>, angle: T) -> Self {
        Rot3(axis_angle(&axis.normalize(), angle))
    }

    pub fn rot_x(angle: T) -> Self {
        Self::about_axis(&Vector3::x(), angle)
    }

    pub fn rot_y(angle: T) -> Self {
        Self::about_axis(&Vector3::y(), angle)
    }

    pub fn rot_z(angle: T) -> Self {
        Self::about_axis(&Vector3::z(), angle)
    }

    pub fn matrix(&self) -> &Matrix3<T> {
        &self.0
    }

    pub fn transpose(&self) -> Self {
        Rot3(self.0.transpose())
    }

    pub fn compose(&self, other: &Rot3<T>) -> Self {
        Rot3(self.0 * other.0)
    }

    pub fn apply(&self, v: &Vector3<T>) -> Vector3<T> {
        self.0 * v
    }

    pub fn column(&self, i: usize) -> Vector3<T> {
        self.0.column(i).into_owned()
    }

    /// Largest entry of `R Rᵀ - I` and the deviation of `det R` from one.
    pub fn orthonormality_error(&self) -> (T, T) {
        let e = self.0 * self.0.transpose() - Matrix3::identity();
        (e.amax(), (self.0.determinant() - T::one()).abs())
    }

    pub fn is_valid(&self, tol: T) -> bool {
        let (o, d) = self.orthonormality_error();
        o <= tol && d <= tol
    }

    /// Projects onto SO(3) by polar decomposition (nearest rotation in the
    /// Frobenius norm).
    pub fn orthonormalized(&self) -> Self {
        let svd = self.0.svd(true, true);
        let (u, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
        let mut r = u * vt;
        if r.determinant() < T::zero() {
            let mut u2 = u;
            u2.column_mut(2).neg_mut();
            r = u2 * vt;
        }
        Rot3(r)
    }
}

/// Position [m] and orientation of a frame relative to the palm frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose<T: Real> {
    pub position: Vector3<T>,
    pub orientation: Rot3<T>,
}

impl<T: Real> Pose<T> {
    pub fn identity() -> Self {
        Pose { position: Vector3::zeros(), orientation: Rot3::identity() }
    }

    pub fn new(position: Vector3<T>, orientation: Rot3<T>) -> Self {
        Pose { position, orientation }
    }

    pub fn transform_point(&self, p: &Vector3<T>) -> Vector3<T> {
        self.position + self.orientation.apply(p)
    }

    pub fn compose(&self, other: &Pose<T>) -> Self {
        Pose {
            position: self.transform_point(&other.position),
            orientation: self.orientation.compose(&other.orientation),
        }
    }
}

/// Linear [m/s] and angular [rad/s] velocity, both in the palm frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Twist<T: Real> {
    pub linear: Vector3<T>,
    pub angular: Vector3<T>,
}

impl<T: Real> Twist<T> {
    pub fn zero() -> Self {
        Twist { linear: Vector3::zeros(), angular: Vector3::zeros() }
    }

    pub fn from_vector(v: &Vector6<T>) -> Self {
        Twist {
            linear: v.fixed_rows::<3>(0).into_owned(),
            angular: v.fixed_rows::<3>(3).into_owned(),
        }
    }

    pub fn to_vector(&self) -> Vector6<T> {
        Vector6::new(
            self.linear.x,
            self.linear.y,
            self.linear.z,
            self.angular.x,
            self.angular.y,
            self.angular.z,
        )
    }
}

/// Z-Y-X Euler angles [rad]: `R = Rz(yaw) * Ry(pitch) * Rx(roll)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerZyx<T: Real> {
    pub yaw: T,
    pub pitch: T,
    pub roll: T,
}

impl<T: Real> EulerZyx<T> {
    /// From `(yaw, pitch, roll)`.
    pub fn from_zyx(v: &Vector3<T>) -> Self {
        EulerZyx { yaw: v.x, pitch: v.y, roll: v.z }
    }

    /// From the pose-vector ordering `(roll, pitch, yaw)`.
    pub fn from_xyz(v: &Vector3<T>) -> Self {
        EulerZyx { yaw: v.z, pitch: v.y, roll: v.x }
    }

    pub fn zyx(&self) -> Vector3<T> {
        Vector3::new(self.yaw, self.pitch, self.roll)
    }

    pub fn xyz(&self) -> Vector3<T> {
        Vector3::new(self.roll, self.pitch, self.yaw)
    }
}

/// Rotation from `(yaw, pitch, roll)` angles.
pub fn euler_zyx_to_rot<T: Real>(angles: &Vector3<T>) -> Rot3<T> {
    let e = EulerZyx::from_zyx(angles);
    Rot3::rot_z(e.yaw).compose(&Rot3::rot_y(e.pitch)).compose(&Rot3::rot_x(e.roll))
}

/// Inverse of [`euler_zyx_to_rot`], returning `(yaw, pitch, roll)`.
pub fn rot_to_euler_zyx<T: Real>(r: &Rot3<T>) -> Result<Vector3<T>> {
    let m = r.matrix();
    let cos_pitch = (m[(0, 0)] * m[(0, 0)] + m[(1, 0)] * m[(1, 0)]).sqrt();
    let pitch = (-m[(2, 0)]).atan2(cos_pitch);
    if cos_pitch < lit(1e-6) {
        return Err(GraspError::GimbalLock { pitch: to_f64(pitch) });
    }
    let yaw = m[(1, 0)].atan2(m[(0, 0)]);
    let roll = m[(2, 1)].atan2(m[(2, 2)]);
    Ok(Vector3::new(yaw, pitch, roll))
}

/// Maps Z-Y-X Euler rates ordered `(roll_rate, pitch_rate, yaw_rate)` to the
/// palm-frame angular velocity.
pub fn euler_rates_to_omega<T: Real>(angles: &EulerZyx<T>) -> Result<Matrix3<T>> {
    let (sy, cy) = angles.yaw.sin_cos();
    let (sp, cp) = angles.pitch.sin_cos();
    if cp.abs() < lit(1e-6) {
        return Err(GraspError::NearSingular { cos_pitch: to_f64(cp) });
    }
    let z = T::zero();
    Ok(Matrix3::new(cy * cp, -sy, z, sy * cp, cy, z, -sp, z, T::one()))
}

/// Block map `P` with `P * (p_dot, roll_rate, pitch_rate, yaw_rate) = (v, omega)`.
pub fn euler_rate_map<T: Real>(angles: &EulerZyx<T>) -> Result<Matrix6<T>> {
    let e = euler_rates_to_omega(angles)?;
    let mut p = Matrix6::identity();
    p.fixed_view_mut::<3, 3>(3, 3).copy_from(&e);
    Ok(p)
}

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_angle<T: Real>(a: T) -> T {
    let two_pi = T::two_pi();
    let mut w = a % two_pi;
    if w > T::pi() {
        w -= two_pi;
    } else if w <= -T::pi() {
        w += two_pi;
    }
    w
}
