//! Serial revolute chains: forward kinematics, Jacobians, composite rigid
//! body mass matrix and Christoffel Coriolis matrix.
//!
//! Spatial vectors are `(angular, linear)` with the linear part taken at the
//! palm-frame origin.

use nalgebra::{DMatrix, DVector, Matrix3, Matrix6, Matrix6xX, Vector3, Vector6};

use crate::scalar::{lit, Real};
use crate::spatial::{skew, Pose, Rot3};

/// A revolute joint: fixed offset from the previous joint frame (or the
/// chain base) followed by a rotation about `axis` (unit, joint frame).
#[derive(Debug, Clone, PartialEq)]
pub struct JointSpec<T: Real> {
    pub offset: Pose<T>,
    pub axis: Vector3<T>,
}

/// A rigid link rigidly attached to the frame of joint `joint`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkBody<T: Real> {
    pub joint: usize,
    pub mass: T,
    /// Center of mass in the joint frame.
    pub com: Vector3<T>,
    /// Rotational inertia about the center of mass, joint-frame axes.
    pub inertia: Matrix3<T>,
}

impl<T: Real> LinkBody<T> {
    /// Solid cuboid with its long edge `length` along the joint-frame x-axis,
    /// starting at the joint origin.
    pub fn cuboid_along_x(joint: usize, mass: T, length: T, width: T, height: T) -> Self {
        let twelfth = mass / lit(12.0);
        LinkBody {
            joint,
            mass,
            com: Vector3::new(length * lit(0.5), T::zero(), T::zero()),
            inertia: Matrix3::from_diagonal(&Vector3::new(
                twelfth * (width * width + height * height),
                twelfth * (length * length + height * height),
                twelfth * (length * length + width * width),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SerialChain<T: Real> {
    pub base: Pose<T>,
    pub joints: Vec<JointSpec<T>>,
    pub bodies: Vec<LinkBody<T>>,
    /// Tool frame relative to the last joint frame.
    pub tip: Pose<T>,
}

/// Configuration-dependent quantities of a chain, all in the palm frame.
#[derive(Debug, Clone)]
pub struct ChainKinematics<T: Real> {
    pub frames: Vec<Pose<T>>,
    pub axes: Vec<Vector3<T>>,
    pub origins: Vec<Vector3<T>>,
    pub tip: Pose<T>,
    /// Spatial motion axes (angular, linear-at-origin) of each joint.
    pub motion_axes: Vec<Vector6<T>>,
}

fn crm<T: Real>(v: &Vector6<T>) -> Matrix6<T> {
    let w = skew(&v.fixed_rows::<3>(0).into_owned());
    let v0 = skew(&v.fixed_rows::<3>(3).into_owned());
    let mut m = Matrix6::zeros();
    m.fixed_view_mut::<3, 3>(0, 0).copy_from(&w);
    m.fixed_view_mut::<3, 3>(3, 0).copy_from(&v0);
    m.fixed_view_mut::<3, 3>(3, 3).copy_from(&w);
    m
}

fn crf<T: Real>(v: &Vector6<T>) -> Matrix6<T> {
    -crm(v).transpose()
}

fn spatial_inertia<T: Real>(mass: T, com: &Vector3<T>, inertia_com: &Matrix3<T>) -> Matrix6<T> {
    let c = skew(com);
    let mut m = Matrix6::zeros();
    m.fixed_view_mut::<3, 3>(0, 0).copy_from(&(inertia_com + c * c.transpose() * mass));
    m.fixed_view_mut::<3, 3>(0, 3).copy_from(&(c * mass));
    m.fixed_view_mut::<3, 3>(3, 0).copy_from(&(c.transpose() * mass));
    m.fixed_view_mut::<3, 3>(3, 3).copy_from(&(Matrix3::identity() * mass));
    m
}

impl<T: Real> SerialChain<T> {
    pub fn dof(&self) -> usize {
        self.joints.len()
    }

    pub fn kinematics(&self, q: &[T]) -> ChainKinematics<T> {
        let mut frames = Vec::with_capacity(self.dof());
        let mut axes = Vec::with_capacity(self.dof());
        let mut origins = Vec::with_capacity(self.dof());
        let mut motion_axes = Vec::with_capacity(self.dof());
        let mut current = self.base;
        for (joint, &qj) in self.joints.iter().zip(q) {
            let pre = current.compose(&joint.offset);
            let axis = pre.orientation.apply(&joint.axis);
            current = pre.compose(&Pose::new(Vector3::zeros(), Rot3::about_axis(&joint.axis, qj)));
            let mut s = Vector6::zeros();
            s.fixed_rows_mut::<3>(0).copy_from(&axis);
            s.fixed_rows_mut::<3>(3).copy_from(&pre.position.cross(&axis));
            frames.push(current);
            axes.push(axis);
            origins.push(pre.position);
            motion_axes.push(s);
        }
        let tip = current.compose(&self.tip);
        ChainKinematics { frames, axes, origins, tip, motion_axes }
    }

    /// Palm-frame center of mass and rotational inertia of each body.
    fn body_world(&self, k: &ChainKinematics<T>) -> Vec<(Vector3<T>, Matrix3<T>)> {
        self.bodies
            .iter()
            .map(|b| {
                let f = &k.frames[b.joint];
                let r = f.orientation.matrix();
                (f.transform_point(&b.com), r * b.inertia * r.transpose())
            })
            .collect()
    }

    /// Composite spatial inertias `I_c[l]` of all bodies carried by joint `l`.
    fn composite_inertias(&self, k: &ChainKinematics<T>) -> Vec<Matrix6<T>> {
        let n = self.dof();
        let mut ic = vec![Matrix6::zeros(); n];
        for (b, (c, i)) in self.bodies.iter().zip(self.body_world(k)) {
            ic[b.joint] += spatial_inertia(b.mass, &c, &i);
        }
        for l in (0..n.saturating_sub(1)).rev() {
            let next = ic[l + 1];
            ic[l] += next;
        }
        ic
    }

    /// Joint-space inertia matrix by composite rigid body assembly.
    pub fn mass_matrix(&self, k: &ChainKinematics<T>) -> DMatrix<T> {
        let n = self.dof();
        let ic = self.composite_inertias(k);
        DMatrix::from_fn(n, n, |i, j| {
            let l = i.max(j);
            (k.motion_axes[i].transpose() * ic[l] * k.motion_axes[j])[0]
        })
    }

    /// `∂M/∂q_k` for every joint `k`.
    pub fn mass_matrix_partials(&self, k: &ChainKinematics<T>) -> Vec<DMatrix<T>> {
        let n = self.dof();
        let ic = self.composite_inertias(k);
        let s = &k.motion_axes;
        (0..n)
            .map(|kk| {
                let sk = &s[kk];
                let ds = |j: usize| if kk < j { crm(sk) * s[j] } else { Vector6::zeros() };
                DMatrix::from_fn(n, n, |i, j| {
                    let l = i.max(j);
                    let m = l.max(kk);
                    let dic = crf(sk) * ic[m] - ic[m] * crm(sk);
                    (ds(i).transpose() * ic[l] * s[j] + s[i].transpose() * dic * s[j] + s[i].transpose() * ic[l] * ds(j))[0]
                })
            })
            .collect()
    }

    /// Coriolis/centrifugal matrix from the Christoffel symbols of `M`.
    pub fn coriolis_matrix(&self, k: &ChainKinematics<T>, qd: &[T]) -> DMatrix<T> {
        let n = self.dof();
        let dm = self.mass_matrix_partials(k);
        let half = lit::<T>(0.5);
        DMatrix::from_fn(n, n, |i, j| {
            let mut c = T::zero();
            for kk in 0..n {
                c += half * (dm[kk][(i, j)] + dm[j][(i, kk)] - dm[i][(j, kk)]) * qd[kk];
            }
            c
        })
    }

    /// Linear-velocity Jacobian of a palm-frame point rigidly attached to the
    /// frame of joint `joint`.
    pub fn point_jacobian(&self, k: &ChainKinematics<T>, joint: usize, p: &Vector3<T>) -> DMatrix<T> {
        let mut j = DMatrix::zeros(3, self.dof());
        for i in 0..=joint {
            j.fixed_view_mut::<3, 1>(0, i).copy_from(&k.axes[i].cross(&(p - k.origins[i])));
        }
        j
    }

    /// Generalized gravity force for gravitational acceleration `g` (palm frame).
    pub fn gravity_torque(&self, k: &ChainKinematics<T>, g: &Vector3<T>) -> DVector<T> {
        let mut tau = DVector::zeros(self.dof());
        for (b, (c, _)) in self.bodies.iter().zip(self.body_world(k)) {
            tau += self.point_jacobian(k, b.joint, &c).transpose() * (g * b.mass);
        }
        tau
    }

    /// Tool-frame Jacobian `(v_tip; ω_tip)` with the linear velocity taken at
    /// the tool-frame origin.
    pub fn tip_jacobian(&self, k: &ChainKinematics<T>) -> Matrix6xX<T> {
        let mut j = Matrix6xX::zeros(self.dof());
        for i in 0..self.dof() {
            j.fixed_view_mut::<3, 1>(0, i).copy_from(&k.axes[i].cross(&(k.tip.position - k.origins[i])));
            j.fixed_view_mut::<3, 1>(3, i).copy_from(&k.axes[i]);
        }
        j
    }

    /// Time derivative of [`tip_jacobian`](Self::tip_jacobian) along `qd`.
    pub fn tip_jacobian_derivative(&self, k: &ChainKinematics<T>, qd: &[T]) -> Matrix6xX<T> {
        let n = self.dof();
        let j = self.tip_jacobian(k);
        let qd_v = DVector::from_column_slice(qd);
        let tip_vel: Vector3<T> = (j.rows(0, 3) * &qd_v).fixed_rows::<3>(0).into_owned();
        let mut jd = Matrix6xX::zeros(n);
        let mut omega = Vector3::zeros();
        for i in 0..n {
            // ω of the body carrying axis i, and velocity of its origin
            let axis_dot = omega.cross(&k.axes[i]);
            let mut origin_vel = Vector3::zeros();
            for (l, &rate) in qd.iter().enumerate().take(i) {
                origin_vel += k.axes[l].cross(&(k.origins[i] - k.origins[l])) * rate;
            }
            let col = axis_dot.cross(&(k.tip.position - k.origins[i])) + k.axes[i].cross(&(tip_vel - origin_vel));
            jd.fixed_view_mut::<3, 1>(0, i).copy_from(&col);
            jd.fixed_view_mut::<3, 1>(3, i).copy_from(&axis_dot);
            omega += k.axes[i] * qd[i];
        }
        jd
    }

    /// Kinetic energy `½ q̇ᵀ M q̇`.
    pub fn kinetic_energy(&self, k: &ChainKinematics<T>, qd: &[T]) -> T {
        let v = DVector::from_column_slice(qd);
        (v.transpose() * self.mass_matrix(k) * &v)[0] * lit(0.5)
    }
}
