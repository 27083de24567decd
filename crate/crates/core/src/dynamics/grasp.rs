//! The coupled hand/object system under rolling, non-slipping contacts.

use nalgebra::{DMatrix, DVector, Matrix3, Matrix3xX, Matrix6, Matrix6xX, Vector2, Vector3, Vector6};

use super::chain::{ChainKinematics, JointSpec, LinkBody, SerialChain};
use super::object::ObjectModel;
use crate::error::{GraspError, Result};
use crate::geometry::{HemisphereChart, SurfaceChart};
use crate::integrator::bs3_step;
use crate::rolling::{contact_frame, contact_rates, psi_from_frames, ContactPair, ContactRates, ContactState};
use crate::scalar::{lit, to_f64, Real};
use crate::spatial::{skew, Pose, Rot3, Twist};

/// Condition number above which `B_ho` is treated as singular.
pub const MAX_COUPLING_COND: f64 = 1e10;

/// One finger: a serial chain ending in a hemispherical fingertip whose
/// frame is the chain tool frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FingerModel<T: Real> {
    pub chain: SerialChain<T>,
    pub tip_chart: HemisphereChart<T>,
}

impl<T: Real> FingerModel<T> {
    /// Two base joints (flexion about `-y`, then abduction about the rotated
    /// `z`), a link, an inter-link flexion joint about `-y`, a second link and
    /// the fingertip. The base frame has `x` pointing away from the object and
    /// `z` up; `q1 = 0` lays the first link along `+x`.
    pub fn three_joint(base: Pose<T>, link_length: T, link_width: T, link_mass: T, tip_radius: T) -> Self {
        let x = Vector3::x();
        let joints = vec![
            JointSpec { offset: Pose::identity(), axis: -Vector3::y() },
            JointSpec { offset: Pose::identity(), axis: Vector3::z() },
            JointSpec { offset: Pose::new(x * link_length, Rot3::identity()), axis: -Vector3::y() },
        ];
        let bodies = vec![
            LinkBody::cuboid_along_x(1, link_mass, link_length, link_width, link_width),
            LinkBody::cuboid_along_x(2, link_mass, link_length, link_width, link_width),
        ];
        FingerModel {
            chain: SerialChain {
                base,
                joints,
                bodies,
                tip: Pose::new(x * link_length, Rot3::rot_y(T::frac_pi_2())),
            },
            tip_chart: HemisphereChart::new(tip_radius),
        }
    }
}

/// Hand, object and the face each finger touches (`contact_faces[i]` is the
/// object face index touched by finger `i`).
#[derive(Debug, Clone, PartialEq)]
pub struct HandObjectModel<T: Real> {
    pub fingers: Vec<FingerModel<T>>,
    pub object: ObjectModel<T>,
    pub contact_faces: Vec<usize>,
    pub gravity: Vector3<T>,
}

/// Full simulator state.
#[derive(Debug, Clone, PartialEq)]
pub struct GraspState<T: Real> {
    pub q: DVector<T>,
    pub qd: DVector<T>,
    pub object: Pose<T>,
    pub twist: Twist<T>,
    pub contacts: Vec<ContactState<T>>,
    pub time: T,
}

/// Per-finger kinematic quantities at a state.
#[derive(Debug, Clone)]
pub struct FingerContact<T: Real> {
    pub chain: ChainKinematics<T>,
    /// Tool-frame Jacobian, linear part at the fingertip frame origin.
    pub j_s: Matrix6xX<T>,
    pub j_s_dot: Matrix6xX<T>,
    pub omega_f: Vector3<T>,
    /// Contact point as seen from the fingertip surface.
    pub contact_point: Vector3<T>,
    /// Contact point as seen from the object surface.
    pub object_contact_point: Vector3<T>,
    /// Fingertip origin to contact, palm frame.
    pub p_fc: Vector3<T>,
    /// Object center of mass to contact, palm frame.
    pub p_oc: Vector3<T>,
    pub p_fc_dot: Vector3<T>,
    pub p_oc_dot: Vector3<T>,
    pub r_cp: Rot3<T>,
    pub rates: ContactRates<T>,
}

/// Grasp-level kinematics: hand Jacobian, grasp map and their derivatives.
#[derive(Debug, Clone)]
pub struct GraspKinematics<T: Real> {
    pub fingers: Vec<FingerContact<T>>,
    /// `3n x m`, block diagonal.
    pub j_h: DMatrix<T>,
    /// `6 x 3n`.
    pub g: DMatrix<T>,
    pub j_h_dot: DMatrix<T>,
    pub g_dot: DMatrix<T>,
    /// Block-diagonal palm-to-contact rotations, `3n x 3n`.
    pub r_cp: DMatrix<T>,
}

/// Inertia, Coriolis and disturbance terms of both equations of motion.
#[derive(Debug, Clone)]
pub struct DynamicsTerms<T: Real> {
    pub m_h: DMatrix<T>,
    pub c_h: DMatrix<T>,
    pub tau_e: DVector<T>,
    pub m_o: Matrix6<T>,
    pub c_o: Matrix6<T>,
    pub w_e: Vector6<T>,
}

/// Contact forces and accelerations as affine functions of the joint torque:
/// `f_c = f0 + F u`, `q̈ = q̈0 + Q u`, `ẍ_o = a0 + X u`.
#[derive(Debug, Clone)]
pub struct AffineResponse<T: Real> {
    pub force_offset: DVector<T>,
    pub force_map: DMatrix<T>,
    pub qdd_offset: DVector<T>,
    pub qdd_map: DMatrix<T>,
    pub object_acc_offset: DVector<T>,
    pub object_acc_map: DMatrix<T>,
    pub coupling_cond: T,
}

impl<T: Real> AffineResponse<T> {
    pub fn contact_force(&self, u: &DVector<T>) -> DVector<T> {
        &self.force_offset + &self.force_map * u
    }

    pub fn joint_acceleration(&self, u: &DVector<T>) -> DVector<T> {
        &self.qdd_offset + &self.qdd_map * u
    }

    pub fn object_acceleration(&self, u: &DVector<T>) -> DVector<T> {
        &self.object_acc_offset + &self.object_acc_map * u
    }
}

/// Post-step correction magnitudes, logged as health metrics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepHealth<T: Real> {
    pub residual_before: T,
    pub position_correction: T,
    pub velocity_correction: T,
}

/// Stacks `[I₃; skew(p_oc_i)]` blocks into the grasp map.
pub fn grasp_map_unchecked<T: Real>(p_oc: &[Vector3<T>]) -> DMatrix<T> {
    let mut g = DMatrix::zeros(6, 3 * p_oc.len());
    for (i, p) in p_oc.iter().enumerate() {
        g.fixed_view_mut::<3, 3>(0, 3 * i).copy_from(&Matrix3::identity());
        g.fixed_view_mut::<3, 3>(3, 3 * i).copy_from(&skew(p));
    }
    g
}

/// Grasp map for contact points `contact_points` (palm frame) on an object
/// whose center of mass is at `object.position`. Requires rank 6.
pub fn grasp_map<T: Real>(object: &Pose<T>, contact_points: &[Vector3<T>]) -> Result<DMatrix<T>> {
    let p_oc: Vec<_> = contact_points.iter().map(|p| p - object.position).collect();
    let g = grasp_map_unchecked(&p_oc);
    let rank = numeric_rank(&g);
    if rank < 6 {
        return Err(GraspError::RankDeficient { rank });
    }
    Ok(g)
}

pub(crate) fn numeric_rank<T: Real>(m: &DMatrix<T>) -> usize {
    let sv = m.clone().singular_values();
    let tol = sv.max() * lit(1e-10);
    sv.iter().filter(|&&s| s > tol).count()
}

/// Moore-Penrose pseudoinverse.
pub fn pseudo_inverse<T: Real>(m: &DMatrix<T>) -> DMatrix<T> {
    let svd = m.clone().svd(true, true);
    let tol = svd.singular_values.max() * lit(1e-12);
    svd.pseudo_inverse(tol).expect("SVD computed with both factors")
}

fn sym_cond<T: Real>(m: &DMatrix<T>) -> T {
    let ev = m.clone().symmetric_eigenvalues();
    let (lo, hi) = (ev.min(), ev.max());
    if lo <= T::zero() {
        T::max_value().unwrap_or(hi / T::default_epsilon())
    } else {
        hi / lo
    }
}

impl<T: Real> HandObjectModel<T> {
    pub fn contact_count(&self) -> usize {
        self.fingers.len()
    }

    pub fn dof(&self) -> usize {
        self.fingers.iter().map(|f| f.chain.dof()).sum()
    }

    /// First joint index of each finger.
    pub fn joint_offsets(&self) -> Vec<usize> {
        let mut acc = 0;
        self.fingers
            .iter()
            .map(|f| {
                let o = acc;
                acc += f.chain.dof();
                o
            })
            .collect()
    }

    fn finger_q<'a>(&self, i: usize, v: &'a DVector<T>) -> &'a [T] {
        let o = self.joint_offsets()[i];
        &v.as_slice()[o..o + self.fingers[i].chain.dof()]
    }

    pub fn contact_pair<'a>(
        &'a self,
        i: usize,
        r_pf: &'a Rot3<T>,
        r_po: &'a Rot3<T>,
    ) -> ContactPair<'a, T, HemisphereChart<T>, crate::geometry::PlaneChart<T>> {
        ContactPair {
            finger: &self.fingers[i].tip_chart,
            object: &self.object.faces[self.contact_faces[i]],
            r_pf,
            r_po,
        }
    }

    /// Per-finger tool Jacobians and the block-diagonal hand Jacobian
    /// `J_h,i = [I, -skew(p_fc,i)] J_s,i`, with its numeric rank.
    pub fn finger_jacobians(&self, state: &GraspState<T>) -> (Vec<Matrix6xX<T>>, DMatrix<T>, usize) {
        let m = self.dof();
        let mut j_h = DMatrix::zeros(3 * self.contact_count(), m);
        let mut js = Vec::with_capacity(self.contact_count());
        for (i, (finger, off)) in self.fingers.iter().zip(self.joint_offsets()).enumerate() {
            let k = finger.chain.kinematics(self.finger_q(i, &state.q));
            let j = finger.chain.tip_jacobian(&k);
            let p_fc = k.tip.orientation.apply(&finger.tip_chart.point(&state.contacts[i].xi_f));
            let block = j.rows(0, 3) - skew(&p_fc) * j.rows(3, 3);
            j_h.view_mut((3 * i, off), (3, finger.chain.dof())).copy_from(&block);
            js.push(j);
        }
        let rank = numeric_rank(&j_h);
        (js, j_h, rank)
    }

    /// Kinematic quantities needed by the dynamics and the constraints.
    pub fn kinematics(&self, state: &GraspState<T>) -> Result<GraspKinematics<T>> {
        let n = self.contact_count();
        let m = self.dof();
        let r_po = state.object.orientation;
        let omega_o = state.twist.angular;
        let mut fingers = Vec::with_capacity(n);
        let mut j_h = DMatrix::zeros(3 * n, m);
        let mut j_h_dot = DMatrix::zeros(3 * n, m);
        let mut g_dot = DMatrix::zeros(6, 3 * n);
        let mut r_cp_block = DMatrix::zeros(3 * n, 3 * n);
        let mut p_ocs = Vec::with_capacity(n);

        for (i, (finger, off)) in self.fingers.iter().zip(self.joint_offsets()).enumerate() {
            let cs = &state.contacts[i];
            if !finger.tip_chart.bounds.contains(&cs.xi_f) {
                return Err(GraspError::GraspFailure { contact: i, a: to_f64(cs.xi_f.x), b: to_f64(cs.xi_f.y) });
            }
            let dof = finger.chain.dof();
            let qi = self.finger_q(i, &state.q);
            let qdi = self.finger_q(i, &state.qd);
            let k = finger.chain.kinematics(qi);
            let j_s = finger.chain.tip_jacobian(&k);
            let j_s_dot = finger.chain.tip_jacobian_derivative(&k, qdi);
            let twist_f = &j_s * DVector::from_column_slice(qdi);
            let omega_f: Vector3<T> = twist_f.fixed_rows::<3>(3).into_owned();

            let r_pf = k.tip.orientation;
            let pair = self.contact_pair(i, &r_pf, &r_po);
            let rates = contact_rates(cs, &omega_f, &omega_o, &pair)?;
            let r_cp = contact_frame(pair.finger, &cs.xi_f, &r_pf)?;

            let p_fc = r_pf.apply(&pair.finger.point(&cs.xi_f));
            let p_oc = r_po.apply(&pair.object.point(&cs.xi_o));
            let (fa, fb) = pair.finger.partials(&cs.xi_f);
            let (oa, ob) = pair.object.partials(&cs.xi_o);
            let p_fc_dot = omega_f.cross(&p_fc) + r_pf.apply(&(fa * rates.xi_f.x + fb * rates.xi_f.y));
            let p_oc_dot = omega_o.cross(&p_oc) + r_po.apply(&(oa * rates.xi_o.x + ob * rates.xi_o.y));

            let block = j_s.rows(0, 3) - skew(&p_fc) * j_s.rows(3, 3);
            j_h.view_mut((3 * i, off), (3, dof)).copy_from(&block);
            let block_dot = j_s_dot.rows(0, 3) - skew(&p_fc) * j_s_dot.rows(3, 3) - skew(&p_fc_dot) * j_s.rows(3, 3);
            j_h_dot.view_mut((3 * i, off), (3, dof)).copy_from(&block_dot);
            g_dot.fixed_view_mut::<3, 3>(3, 3 * i).copy_from(&skew(&p_oc_dot));
            r_cp_block.fixed_view_mut::<3, 3>(3 * i, 3 * i).copy_from(r_cp.matrix());

            fingers.push(FingerContact {
                contact_point: k.tip.position + p_fc,
                object_contact_point: state.object.position + p_oc,
                chain: k,
                j_s,
                j_s_dot,
                omega_f,
                p_fc,
                p_oc,
                p_fc_dot,
                p_oc_dot,
                r_cp,
                rates,
            });
            p_ocs.push(p_oc);
        }
        Ok(GraspKinematics { fingers, j_h, g: grasp_map_unchecked(&p_ocs), j_h_dot, g_dot, r_cp: r_cp_block })
    }

    pub fn terms(&self, state: &GraspState<T>, kin: &GraspKinematics<T>) -> DynamicsTerms<T> {
        let m = self.dof();
        let mut m_h = DMatrix::zeros(m, m);
        let mut c_h = DMatrix::zeros(m, m);
        let mut tau_e = DVector::zeros(m);
        for (i, (finger, off)) in self.fingers.iter().zip(self.joint_offsets()).enumerate() {
            let k = &kin.fingers[i].chain;
            let dof = finger.chain.dof();
            m_h.view_mut((off, off), (dof, dof)).copy_from(&finger.chain.mass_matrix(k));
            c_h.view_mut((off, off), (dof, dof)).copy_from(&finger.chain.coriolis_matrix(k, self.finger_q(i, &state.qd)));
            tau_e.rows_mut(off, dof).copy_from(&finger.chain.gravity_torque(k, &self.gravity));
        }
        let r_po = &state.object.orientation;
        DynamicsTerms {
            m_h,
            c_h,
            tau_e,
            m_o: self.object.mass_matrix(r_po),
            c_o: self.object.coriolis_matrix(r_po, &state.twist.angular),
            w_e: self.object.gravity_wrench(&self.gravity),
        }
    }

    /// Solves the grasp-constraint acceleration condition for the contact
    /// forces and returns every acceleration as an affine map of `u`.
    pub fn response(&self, state: &GraspState<T>, kin: &GraspKinematics<T>, terms: &DynamicsTerms<T>) -> Result<AffineResponse<T>> {
        let m = self.dof();
        let m_h_inv = terms
            .m_h
            .clone()
            .cholesky()
            .ok_or(GraspError::IllConditioned { what: "hand inertia", cond: f64::INFINITY })?
            .inverse();
        let m_o_inv = DMatrix::from_column_slice(6, 6, terms.m_o.try_inverse().ok_or(GraspError::IllConditioned { what: "object inertia", cond: f64::INFINITY })?.as_slice());
        let xd = DVector::from_column_slice(state.twist.to_vector().as_slice());
        let c_o = DMatrix::from_column_slice(6, 6, terms.c_o.as_slice());
        let w_e = DVector::from_column_slice(terms.w_e.as_slice());

        let jm = &kin.j_h * &m_h_inv;
        let b_ho = &jm * kin.j_h.transpose() + kin.g.transpose() * &m_o_inv * &kin.g;
        let cond = sym_cond(&b_ho);
        if cond > lit(MAX_COUPLING_COND) {
            return Err(GraspError::IllConditioned { what: "B_ho", cond: to_f64(cond) });
        }
        let b_inv = b_ho
            .cholesky()
            .ok_or(GraspError::IllConditioned { what: "B_ho", cond: to_f64(cond) })?
            .inverse();

        let drift = &jm * (-&terms.c_h * &state.qd + &terms.tau_e) + &kin.j_h_dot * &state.qd - kin.g_dot.transpose() * &xd
            + kin.g.transpose() * &m_o_inv * (&c_o * &xd - &w_e);
        let force_offset = &b_inv * drift;
        let force_map = &b_inv * &jm;

        let qdd_offset = &m_h_inv * (-&terms.c_h * &state.qd - kin.j_h.transpose() * &force_offset + &terms.tau_e);
        let qdd_map = &m_h_inv * (DMatrix::identity(m, m) - kin.j_h.transpose() * &force_map);
        let object_acc_offset = &m_o_inv * (&kin.g * &force_offset + &w_e - &c_o * &xd);
        let object_acc_map = &m_o_inv * &kin.g * &force_map;
        Ok(AffineResponse { force_offset, force_map, qdd_offset, qdd_map, object_acc_offset, object_acc_map, coupling_cond: cond })
    }

    /// Contact forces produced by torque `u` at `state`.
    pub fn contact_force(&self, state: &GraspState<T>, u: &DVector<T>) -> Result<DVector<T>> {
        let kin = self.kinematics(state)?;
        let terms = self.terms(state, &kin);
        Ok(self.response(state, &kin, &terms)?.contact_force(u))
    }

    /// `‖J_h q̇ - Gᵀ ẋ_o‖₂`.
    pub fn grasp_residual(&self, state: &GraspState<T>) -> T {
        let (_, j_h, _) = self.finger_jacobians(state);
        let p_oc: Vec<_> = (0..self.contact_count())
            .map(|i| state.object.orientation.apply(&self.object.faces[self.contact_faces[i]].point(&state.contacts[i].xi_o)))
            .collect();
        let g = grasp_map_unchecked(&p_oc);
        let xd = DVector::from_column_slice(state.twist.to_vector().as_slice());
        (j_h * &state.qd - g.transpose() * xd).norm()
    }

    pub fn state_len(&self) -> usize {
        2 * self.dof() + 18 + 5 * self.contact_count()
    }

    pub fn pack(&self, s: &GraspState<T>) -> DVector<T> {
        let m = self.dof();
        let mut y = DVector::zeros(self.state_len());
        y.rows_mut(0, m).copy_from(&s.q);
        y.rows_mut(m, m).copy_from(&s.qd);
        let o = 2 * m;
        y.fixed_rows_mut::<3>(o).copy_from(&s.object.position);
        y.rows_mut(o + 3, 9).copy_from_slice(s.object.orientation.matrix().as_slice());
        y.fixed_rows_mut::<3>(o + 12).copy_from(&s.twist.linear);
        y.fixed_rows_mut::<3>(o + 15).copy_from(&s.twist.angular);
        for (i, c) in s.contacts.iter().enumerate() {
            let b = o + 18 + 5 * i;
            y[b] = c.xi_f.x;
            y[b + 1] = c.xi_f.y;
            y[b + 2] = c.xi_o.x;
            y[b + 3] = c.xi_o.y;
            y[b + 4] = c.psi;
        }
        y
    }

    pub fn unpack(&self, y: &DVector<T>, time: T) -> GraspState<T> {
        let m = self.dof();
        let o = 2 * m;
        GraspState {
            q: y.rows(0, m).into_owned(),
            qd: y.rows(m, m).into_owned(),
            object: Pose::new(
                y.fixed_rows::<3>(o).into_owned(),
                Rot3::from_matrix_unchecked(Matrix3::from_column_slice(&y.as_slice()[o + 3..o + 12])),
            ),
            twist: Twist { linear: y.fixed_rows::<3>(o + 12).into_owned(), angular: y.fixed_rows::<3>(o + 15).into_owned() },
            contacts: (0..self.contact_count())
                .map(|i| {
                    let b = o + 18 + 5 * i;
                    ContactState { xi_f: Vector2::new(y[b], y[b + 1]), xi_o: Vector2::new(y[b + 2], y[b + 3]), psi: y[b + 4] }
                })
                .collect(),
            time,
        }
    }

    /// Time derivative of the packed state under torque `u`.
    pub fn derivative(&self, state: &GraspState<T>, u: &DVector<T>) -> Result<DVector<T>> {
        let kin = self.kinematics(state)?;
        let terms = self.terms(state, &kin);
        let resp = self.response(state, &kin, &terms)?;
        let m = self.dof();
        let o = 2 * m;
        let mut d = DVector::zeros(self.state_len());
        d.rows_mut(0, m).copy_from(&state.qd);
        d.rows_mut(m, m).copy_from(&resp.joint_acceleration(u));
        d.fixed_rows_mut::<3>(o).copy_from(&state.twist.linear);
        let r_dot = skew(&state.twist.angular) * state.object.orientation.matrix();
        d.rows_mut(o + 3, 9).copy_from_slice(r_dot.as_slice());
        d.rows_mut(o + 12, 6).copy_from(&resp.object_acceleration(u));
        for (i, f) in kin.fingers.iter().enumerate() {
            let b = o + 18 + 5 * i;
            d[b] = f.rates.xi_f.x;
            d[b + 1] = f.rates.xi_f.y;
            d[b + 2] = f.rates.xi_o.x;
            d[b + 3] = f.rates.xi_o.y;
            d[b + 4] = f.rates.psi;
        }
        Ok(d)
    }

    /// One Bogacki-Shampine step with `u` held constant, followed by rotation
    /// re-orthonormalization and projection of the contact positions and the
    /// joint velocities back onto the grasp constraint.
    pub fn step(&self, state: &GraspState<T>, u: &DVector<T>, dt: T) -> Result<(GraspState<T>, StepHealth<T>)> {
        let y0 = self.pack(state);
        let t0 = state.time;
        let y1 = bs3_step(|t, y: &DVector<T>| self.derivative(&self.unpack(y, t), u), t0, &y0, dt)?;
        let mut next = self.unpack(&y1, t0 + dt);
        next.object.orientation = next.object.orientation.orthonormalized();
        for (i, (c, f)) in next.contacts.iter().zip(&self.fingers).enumerate() {
            if !f.tip_chart.bounds.contains(&c.xi_f) {
                return Err(GraspError::GraspFailure { contact: i, a: to_f64(c.xi_f.x), b: to_f64(c.xi_f.y) });
            }
        }
        let residual_before = self.grasp_residual(&next);

        // contact coincidence: move the fingertip material point onto the
        // object contact point
        let gap = self.contact_gap(&next);
        let (_, j_h, _) = self.finger_jacobians(&next);
        let dq = pseudo_inverse(&j_h) * &gap;
        next.q += &dq;

        let (_, j_h, _) = self.finger_jacobians(&next);
        let p_oc: Vec<_> = (0..self.contact_count())
            .map(|i| next.object.orientation.apply(&self.object.faces[self.contact_faces[i]].point(&next.contacts[i].xi_o)))
            .collect();
        let g = grasp_map_unchecked(&p_oc);
        let xd = DVector::from_column_slice(next.twist.to_vector().as_slice());
        let r = &j_h * &next.qd - g.transpose() * xd;
        let dqd = pseudo_inverse(&j_h) * r;
        next.qd -= &dqd;
        Ok((next, StepHealth { residual_before, position_correction: dq.norm(), velocity_correction: dqd.norm() }))
    }

    /// Stacked `p_object_contact - p_finger_contact` over all contacts.
    pub fn contact_gap(&self, state: &GraspState<T>) -> DVector<T> {
        let n = self.contact_count();
        let mut gap = DVector::zeros(3 * n);
        for (i, finger) in self.fingers.iter().enumerate() {
            let k = finger.chain.kinematics(self.finger_q(i, &state.q));
            let pf = k.tip.transform_point(&finger.tip_chart.point(&state.contacts[i].xi_f));
            let po = state.object.transform_point(&self.object.faces[self.contact_faces[i]].point(&state.contacts[i].xi_o));
            gap.fixed_rows_mut::<3>(3 * i).copy_from(&(po - pf));
        }
        gap
    }

    /// Builds a static grasp: for each finger, solves for joint angles and
    /// fingertip coordinates that put the fingertip on the object point
    /// `xi_o[i]` with opposing normals, starting from `q_guess`.
    pub fn static_grasp(&self, object: Pose<T>, xi_o: &[Vector2<T>], q_guess: &DVector<T>) -> Result<GraspState<T>> {
        let n = self.contact_count();
        let mut q = q_guess.clone();
        let mut xi_f = vec![Vector2::new(T::zero(), -T::frac_pi_2()); n];
        for (i, finger) in self.fingers.iter().enumerate() {
            let off = self.joint_offsets()[i];
            let dof = finger.chain.dof();
            let face = &self.object.faces[self.contact_faces[i]];
            let target = object.transform_point(&face.point(&xi_o[i]));
            let frame_o = object.orientation.compose(&crate::geometry::gauss_frame(face, &xi_o[i])?);
            let (t1, t2, n_o) = (frame_o.column(0), frame_o.column(1), frame_o.column(2));
            let residual = |x: &DVector<T>| -> Result<DVector<T>> {
                let k = finger.chain.kinematics(&x.as_slice()[..dof]);
                let xi = Vector2::new(x[dof], x[dof + 1]);
                let p = k.tip.transform_point(&finger.tip_chart.point(&xi));
                let nf = k.tip.orientation.apply(&crate::geometry::gauss_frame(&finger.tip_chart, &xi)?.column(2));
                let mut r = DVector::zeros(dof + 2);
                r.fixed_rows_mut::<3>(0).copy_from(&(p - target));
                r[3] = (nf + n_o).dot(&t1);
                r[4] = (nf + n_o).dot(&t2);
                Ok(r)
            };
            let mut x = DVector::zeros(dof + 2);
            x.rows_mut(0, dof).copy_from(&q.rows(off, dof));
            x[dof] = xi_f[i].x;
            x[dof + 1] = xi_f[i].y;
            let h = lit::<T>(1e-7);
            for _ in 0..50 {
                let r = residual(&x)?;
                if r.norm() < lit(1e-13) {
                    break;
                }
                let mut jac = DMatrix::zeros(dof + 2, dof + 2);
                for c in 0..dof + 2 {
                    let mut xp = x.clone();
                    xp[c] += h;
                    jac.set_column(c, &((residual(&xp)? - &r) / h));
                }
                let dx = jac.lu().solve(&r).ok_or(GraspError::SingularJh { rank: 0, required: dof + 2 })?;
                x -= dx;
            }
            if residual(&x)?.norm() > lit(1e-9) {
                return Err(GraspError::ConfigInvalid(format!("finger {i}: no static contact solution near the initial guess")));
            }
            q.rows_mut(off, dof).copy_from(&x.rows(0, dof));
            xi_f[i] = Vector2::new(x[dof], x[dof + 1]);
        }
        let m = self.dof();
        let mut state = GraspState {
            q,
            qd: DVector::zeros(m),
            object,
            twist: Twist::zero(),
            contacts: Vec::with_capacity(n),
            time: T::zero(),
        };
        for i in 0..n {
            let k = self.fingers[i].chain.kinematics(self.finger_q(i, &state.q));
            let pair = self.contact_pair(i, &k.tip.orientation, &object.orientation);
            let psi = psi_from_frames(&pair, &xi_f[i], &xi_o[i])?;
            state.contacts.push(ContactState { xi_f: xi_f[i], xi_o: xi_o[i], psi });
        }
        Ok(state)
    }
}

/// Palm-frame wrench on the object from contact forces, summed contact by
/// contact (used to cross-check the grasp map).
pub fn net_wrench<T: Real>(object: &Pose<T>, contact_points: &[Vector3<T>], forces: &[Vector3<T>]) -> Vector6<T> {
    let mut w = Vector6::zeros();
    for (p, f) in contact_points.iter().zip(forces) {
        let r = p - object.position;
        let tau = r.cross(f);
        w += Vector6::new(f.x, f.y, f.z, tau.x, tau.y, tau.z);
    }
    w
}

/// Rows of the hand Jacobian for one finger as a `3 x dof` matrix.
pub fn finger_block<T: Real>(j_s: &Matrix6xX<T>, p_fc: &Vector3<T>) -> Matrix3xX<T> {
    j_s.fixed_rows::<3>(0) - skew(p_fc) * j_s.fixed_rows::<3>(3)
}
