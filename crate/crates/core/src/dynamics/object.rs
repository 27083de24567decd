use nalgebra::{Matrix3, Matrix6, Vector3, Vector6};

use crate::geometry::PlaneChart;
use crate::scalar::{lit, Real};
use crate::spatial::{skew, Rot3};

/// Rigid grasped object with planar contact faces.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectModel<T: Real> {
    pub mass: T,
    /// Inertia about the center of mass, body axes.
    pub inertia: Matrix3<T>,
    pub faces: Vec<PlaneChart<T>>,
}

impl<T: Real> ObjectModel<T> {
    /// Solid cube of edge `edge`; faces ordered `+x, -x, +y, -y, +z, -z`.
    pub fn cube(mass: T, edge: T) -> Self {
        let h = edge * lit(0.5);
        let (x, y, z) = (Vector3::x(), Vector3::y(), Vector3::z());
        let faces = vec![
            PlaneChart::square(x * h, y, z, h),
            PlaneChart::square(-x * h, z, y, h),
            PlaneChart::square(y * h, z, x, h),
            PlaneChart::square(-y * h, x, z, h),
            PlaneChart::square(z * h, x, y, h),
            PlaneChart::square(-z * h, y, x, h),
        ];
        ObjectModel { mass, inertia: Matrix3::identity() * (mass * edge * edge / lit(6.0)), faces }
    }

    /// Palm-frame inertia `M_o = blockdiag(m I, R I_b Rᵀ)`.
    pub fn mass_matrix(&self, r_po: &Rot3<T>) -> Matrix6<T> {
        let r = r_po.matrix();
        let mut m = Matrix6::zeros();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&(Matrix3::identity() * self.mass));
        m.fixed_view_mut::<3, 3>(3, 3).copy_from(&(r * self.inertia * r.transpose()));
        m
    }

    /// `C_o` with `C_o ẋ_o = (0, ω × I ω)`.
    pub fn coriolis_matrix(&self, r_po: &Rot3<T>, omega: &Vector3<T>) -> Matrix6<T> {
        let r = r_po.matrix();
        let mut c = Matrix6::zeros();
        c.fixed_view_mut::<3, 3>(3, 3).copy_from(&(skew(omega) * r * self.inertia * r.transpose()));
        c
    }

    /// Gravity wrench about the center of mass.
    pub fn gravity_wrench(&self, g: &Vector3<T>) -> Vector6<T> {
        let f = g * self.mass;
        Vector6::new(f.x, f.y, f.z, T::zero(), T::zero(), T::zero())
    }
}
