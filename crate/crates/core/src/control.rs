//! Nominal manipulation controller and the safety filter around it.

use nalgebra::{DMatrix, DVector, Matrix6, Vector3, Vector6};

use crate::constraints::{assemble, ConstraintRows, ConstraintSettings, StepContext};
use crate::dynamics::{numeric_rank, pseudo_inverse};
use crate::error::{GraspError, Result};
use crate::qp::{solve, QpProblem, QpSettings, QpSolution};
use crate::scalar::Real;
use crate::spatial::{euler_rate_map, rot_to_euler_zyx, wrap_angle, EulerZyx};

/// `r(t) = base + amplitude · cos(ω t)` over the pose vector
/// `(x, y, z, roll, pitch, yaw)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reference<T: Real> {
    pub base: Vector6<T>,
    pub amplitude: Vector6<T>,
    pub frequency: T,
}

impl<T: Real> Reference<T> {
    /// `(r, ṙ, r̈)`.
    pub fn sample(&self, t: T) -> (Vector6<T>, Vector6<T>, Vector6<T>) {
        let w = self.frequency;
        let (s, c) = (w * t).sin_cos();
        (self.base + self.amplitude * c, self.amplitude * (-w * s), self.amplitude * (-w * w * c))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NominalGains<T: Real> {
    pub kp: Matrix6<T>,
    pub kd: Matrix6<T>,
    pub kf: T,
}

impl<T: Real> NominalGains<T> {
    /// Rejects non-symmetric or indefinite `kp`, `kd` and `kf ≤ 0`.
    pub fn new(kp: Matrix6<T>, kd: Matrix6<T>, kf: T) -> Result<Self> {
        for (name, k) in [("kp", &kp), ("kd", &kd)] {
            if (k - k.transpose()).amax() > T::default_epsilon() || k.cholesky().is_none() {
                return Err(GraspError::ConfigInvalid(format!("{name} must be symmetric positive definite")));
            }
        }
        if kf <= T::zero() {
            return Err(GraspError::ConfigInvalid("kf must be positive".into()));
        }
        Ok(NominalGains { kp, kd, kf })
    }
}

/// Object pose as `(x, y, z, roll, pitch, yaw)`.
pub fn pose_vector<T: Real>(pose: &crate::spatial::Pose<T>) -> Result<Vector6<T>> {
    let ypr = rot_to_euler_zyx(&pose.orientation)?;
    let p = pose.position;
    Ok(Vector6::new(p.x, p.y, p.z, ypr.z, ypr.y, ypr.x))
}

/// Pieces of the nominal controller, kept for logging.
#[derive(Debug, Clone)]
pub struct NominalOutput<T: Real> {
    pub u: DVector<T>,
    /// Pose error `r - x` with angles wrapped.
    pub error: Vector6<T>,
    pub object_wrench: Vector6<T>,
    pub internal_force: DVector<T>,
}

/// `u_nom = J_hᵀ(G† u_m + u_f) - τ_e` with the computed-torque object
/// wrench `u_m = M_ho P (r̈ + K_p e + K_d ė) + C_ho ẋ_o - w_e` and the
/// squeeze `u_f,i = k_f (p̄ - p_i)`.
pub fn nominal_control<T: Real>(ctx: &StepContext<'_, T>, reference: &Reference<T>, gains: &NominalGains<T>) -> Result<NominalOutput<T>> {
    let kin = &ctx.kin;
    let t = &ctx.terms;
    let n3 = kin.j_h.nrows();
    let rank = numeric_rank(&kin.j_h);
    if kin.j_h.ncols() != n3 || rank < n3 {
        return Err(GraspError::SingularJh { rank, required: n3 });
    }
    let j_inv = kin.j_h.clone().lu().try_inverse().ok_or(GraspError::SingularJh { rank, required: n3 })?;
    let gt = kin.g.transpose();
    let j_inv_gt = &j_inv * &gt;
    let j_inv_gt_dot = -&j_inv * &kin.j_h_dot * &j_inv_gt + &j_inv * kin.g_dot.transpose();
    let to6 = |m: &Matrix6<T>| DMatrix::from_column_slice(6, 6, m.as_slice());
    let m_ho = to6(&t.m_o) + j_inv_gt.transpose() * &t.m_h * &j_inv_gt;
    let c_ho = to6(&t.c_o) + j_inv_gt.transpose() * (&t.c_h * &j_inv_gt + &t.m_h * &j_inv_gt_dot);

    let (r, r_dot, r_ddot) = reference.sample(ctx.state.time);
    let x = pose_vector(&ctx.state.object)?;
    let e_ang = EulerZyx { roll: x[3], pitch: x[4], yaw: x[5] };
    let p = euler_rate_map(&e_ang)?;
    let twist = ctx.state.twist.to_vector();
    let x_dot = p.try_inverse().ok_or(GraspError::NearSingular { cos_pitch: 0.0 })? * twist;
    let mut e = r - x;
    for i in 3..6 {
        e[i] = wrap_angle(e[i]);
    }
    let e_dot = r_dot - x_dot;
    let acc = p * (r_ddot + gains.kp * e + gains.kd * e_dot);
    let acc_d = DVector::from_column_slice(acc.as_slice());
    let twist_d = DVector::from_column_slice(twist.as_slice());
    let u_m = &m_ho * acc_d + &c_ho * twist_d - DVector::from_column_slice(t.w_e.as_slice());

    let pts: Vec<Vector3<T>> = kin.fingers.iter().map(|f| f.contact_point).collect();
    let centroid = pts.iter().fold(Vector3::zeros(), |a, p| a + p) / T::from_usize(pts.len()).unwrap();
    let u_f = DVector::from_iterator(n3, pts.iter().flat_map(|p| ((centroid - p) * gains.kf).iter().copied().collect::<Vec<_>>()));

    let f_des = pseudo_inverse(&kin.g) * &u_m + &u_f;
    let u = kin.j_h.transpose() * f_des - &t.tau_e;
    Ok(NominalOutput { u, error: e, object_wrench: Vector6::from_column_slice(u_m.as_slice()), internal_force: u_f })
}

#[derive(Debug, Clone)]
pub struct FilterOutput<T: Real> {
    pub u: DVector<T>,
    pub rows: ConstraintRows<T>,
    pub solution: QpSolution<T>,
}

/// Assembles the constraint rows at `ctx` and returns the admissible torque
/// closest to `u_nom`.
pub fn filter_step<T: Real>(
    ctx: &StepContext<'_, T>,
    settings: &ConstraintSettings<T>,
    u_nom: &DVector<T>,
    warm: Option<&[usize]>,
    qp: &QpSettings<T>,
) -> Result<FilterOutput<T>> {
    let rows = assemble(ctx, settings)?;
    let (a, b) = rows.matrices(u_nom.len());
    let solution = solve(&QpProblem { u_nom: u_nom.clone(), a, b }, warm, qp)?;
    Ok(FilterOutput { u: solution.u.clone(), rows, solution })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::FRAC_PI_2;

    fn paper_reference() -> Reference<f64> {
        Reference { base: Vector6::zeros(), amplitude: Vector6::new(0.0, 0.0, 0.25, 0.0, 0.0, 2.0), frequency: 1.0 }
    }

    #[test]
    fn reference_values() {
        let r = paper_reference();
        let (r0, _, _) = r.sample(0.0);
        assert_eq!(r0, Vector6::new(0.0, 0.0, 0.25, 0.0, 0.0, 2.0));
        let (r1, v1, a1) = r.sample(FRAC_PI_2);
        assert!(r1.amax() < 1e-15);
        assert_relative_eq!(v1, Vector6::new(0.0, 0.0, -0.25, 0.0, 0.0, -2.0), epsilon = 1e-15);
        for t in [0.3, 1.7, 4.0] {
            let (r, _, a) = r.sample(t);
            assert_relative_eq!(a, -r, epsilon = 1e-15);
        }
        assert!(a1.amax() < 1e-15);
    }

    #[test]
    fn gains_must_be_positive_definite() {
        let i = Matrix6::<f64>::identity();
        assert!(NominalGains::new(i, i * 2.5, 10.0).is_ok());
        assert!(NominalGains::new(-i, i, 10.0).is_err());
        let mut asym = i;
        asym[(0, 1)] = 0.5;
        assert!(NominalGains::new(asym, i, 10.0).is_err());
        assert!(NominalGains::new(i, i, 0.0).is_err());
    }

    #[test]
    fn pseudo_inverse_property() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand::rngs::StdRng::seed_from_u64(2);
        for _ in 0..50 {
            let g = DMatrix::from_fn(6, 9, |_, _| rng.gen_range(-1.0..1.0));
            let gp = pseudo_inverse(&g);
            assert!((&g * &gp * &g - &g).amax() < 1e-10);
        }
    }
}
