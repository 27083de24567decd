//! The grasp constraint families as linear inequalities on the joint torque.

use nalgebra::{DMatrix, DVector, Vector3};

use crate::dynamics::{AffineResponse, DynamicsTerms, GraspKinematics, GraspState, HandObjectModel};
use crate::error::{GraspError, Result};
use crate::rolling::contact_accel_terms;
use crate::scalar::{lit, to_f64, Real};
use crate::zcbf::{second_order_row, BarrierFamily, BarrierRow, BarrierSpec};

/// Inscribed `l_s`-sided friction pyramid; each row is
/// `(-cos θ_k, -sin θ_k, μ cos(π/l_s))` in the contact frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FrictionPyramid<T: Real> {
    pub mu: T,
    pub faces: usize,
    /// `faces x 3`.
    pub rows: DMatrix<T>,
}

impl<T: Real> FrictionPyramid<T> {
    pub fn new(mu: T, faces: usize) -> Self {
        let c = mu * (T::pi() / lit(faces as f64)).cos();
        let rows = DMatrix::from_fn(faces, 3, |k, j| {
            let th = T::two_pi() * lit(k as f64) / lit(faces as f64);
            match j {
                0 => -th.cos(),
                1 => -th.sin(),
                _ => c,
            }
        });
        FrictionPyramid { mu, faces, rows }
    }

    /// `Λ` for `n` contacts: block diagonal, `faces·n x 3n`.
    pub fn block(&self, n: usize) -> DMatrix<T> {
        let mut l = DMatrix::zeros(self.faces * n, 3 * n);
        for i in 0..n {
            l.view_mut((self.faces * i, 3 * i), (self.faces, 3)).copy_from(&self.rows);
        }
        l
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JointLimits<T: Real> {
    pub q_min: DVector<T>,
    pub q_max: DVector<T>,
}

/// Fingertip workspace `a_min < a < a_max`, `b_min < b < b_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorkspaceBox<T: Real> {
    pub a_min: T,
    pub a_max: T,
    pub b_min: T,
    pub b_max: T,
}

impl<T: Real> WorkspaceBox<T> {
    /// `(a_max - a, a - a_min, b_max - b, b - b_min)`.
    pub fn barriers(&self, xi: &nalgebra::Vector2<T>) -> [T; 4] {
        [self.a_max - xi.x, xi.x - self.a_min, self.b_max - xi.y, xi.y - self.b_min]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActuatorBox<T: Real> {
    pub u_min: DVector<T>,
    pub u_max: DVector<T>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FamilySwitches {
    pub slip: bool,
    pub joint_limits: bool,
    pub rolling: bool,
    pub actuator: bool,
}

impl FamilySwitches {
    pub fn all() -> Self {
        FamilySwitches { slip: true, joint_limits: true, rolling: true, actuator: true }
    }

    pub fn none() -> Self {
        FamilySwitches { slip: false, joint_limits: false, rolling: false, actuator: false }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSettings<T: Real> {
    pub pyramid: FrictionPyramid<T>,
    /// Floor replacing the strict no-slip inequality.
    pub slip_margin: T,
    pub limits: JointLimits<T>,
    pub workspace: WorkspaceBox<T>,
    pub barrier: BarrierSpec<T>,
    pub actuator: ActuatorBox<T>,
    pub enabled: FamilySwitches,
}

/// Stacked rows with per-row strictness (slip rows stand for `> 0`).
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintRows<T: Real> {
    pub rows: Vec<BarrierRow<T>>,
    pub strict: Vec<bool>,
}

impl<T: Real> Default for ConstraintRows<T> {
    fn default() -> Self {
        ConstraintRows { rows: Vec::new(), strict: Vec::new() }
    }
}

impl<T: Real> ConstraintRows<T> {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn extend(&mut self, other: ConstraintRows<T>) {
        self.rows.extend(other.rows);
        self.strict.extend(other.strict);
    }

    pub fn count(&self, family: BarrierFamily) -> usize {
        self.rows.iter().filter(|r| r.family == family).count()
    }

    /// `(A, b)` with one row per constraint.
    pub fn matrices(&self, m: usize) -> (DMatrix<T>, DVector<T>) {
        let a = DMatrix::from_fn(self.len(), m, |i, j| self.rows[i].row[j]);
        let b = DVector::from_iterator(self.len(), self.rows.iter().map(|r| r.rhs));
        (a, b)
    }

    pub fn margins(&self, u: &DVector<T>) -> DVector<T> {
        DVector::from_iterator(self.len(), self.rows.iter().map(|r| r.margin(u)))
    }
}

/// Everything the constraint families need at one state.
pub struct StepContext<'a, T: Real> {
    pub model: &'a HandObjectModel<T>,
    pub state: &'a GraspState<T>,
    pub kin: GraspKinematics<T>,
    pub terms: DynamicsTerms<T>,
    pub response: AffineResponse<T>,
}

impl<'a, T: Real> StepContext<'a, T> {
    pub fn new(model: &'a HandObjectModel<T>, state: &'a GraspState<T>) -> Result<Self> {
        let kin = model.kinematics(state)?;
        let terms = model.terms(state, &kin);
        let response = model.response(state, &kin, &terms)?;
        Ok(StepContext { model, state, kin, terms, response })
    }
}

/// `Λ R_cp f_c(u) ≥ ε` per contact.
pub fn no_slip_rows<T: Real>(ctx: &StepContext<'_, T>, pyramid: &FrictionPyramid<T>, margin: T) -> ConstraintRows<T> {
    let n = ctx.model.contact_count();
    let lr = pyramid.block(n) * &ctx.kin.r_cp;
    let a = &lr * &ctx.response.force_map;
    let off = &lr * &ctx.response.force_offset;
    let rows = (0..a.nrows())
        .map(|k| BarrierRow {
            row: a.row(k).transpose(),
            rhs: margin - off[k],
            family: BarrierFamily::Slip,
            h: T::zero(),
            h_dot: T::zero(),
            b: T::zero(),
        })
        .collect::<Vec<_>>();
    let strict = vec![true; rows.len()];
    ConstraintRows { rows, strict }
}

/// Upper-limit rows for every joint, then lower-limit rows.
pub fn joint_limit_rows<T: Real>(ctx: &StepContext<'_, T>, limits: &JointLimits<T>, spec: &BarrierSpec<T>) -> ConstraintRows<T> {
    let m = ctx.model.dof();
    let r = &ctx.response;
    let mut rows = Vec::with_capacity(2 * m);
    for j in 0..m {
        let q = ctx.state.q[j];
        let qd = ctx.state.qd[j];
        rows.push(second_order_row(
            spec,
            limits.q_max[j] - q,
            -qd,
            -r.qdd_offset[j],
            -r.qdd_map.row(j).transpose(),
            BarrierFamily::JointLimit,
        ));
    }
    for j in 0..m {
        let q = ctx.state.q[j];
        let qd = ctx.state.qd[j];
        rows.push(second_order_row(
            spec,
            q - limits.q_min[j],
            qd,
            r.qdd_offset[j],
            r.qdd_map.row(j).transpose(),
            BarrierFamily::JointLimit,
        ));
    }
    ConstraintRows { strict: vec![false; rows.len()], rows }
}

/// Four workspace rows per contact, in the order of
/// [`WorkspaceBox::barriers`].
pub fn rolling_rows<T: Real>(ctx: &StepContext<'_, T>, workspace: &WorkspaceBox<T>, spec: &BarrierSpec<T>) -> Result<ConstraintRows<T>> {
    let model = ctx.model;
    let r = &ctx.response;
    let omega_o = ctx.state.twist.angular;
    let alpha_o0: Vector3<T> = r.object_acc_offset.fixed_rows::<3>(3).into_owned();
    let alpha_o_map = r.object_acc_map.rows(3, 3).into_owned();
    let mut rows = Vec::with_capacity(4 * model.contact_count());
    for (i, off) in model.joint_offsets().into_iter().enumerate() {
        let fc = &ctx.kin.fingers[i];
        let dof = model.fingers[i].chain.dof();
        let cs = &ctx.state.contacts[i];
        let r_pf = fc.chain.tip.orientation;
        let pair = model.contact_pair(i, &r_pf, &ctx.state.object.orientation);
        let acc = contact_accel_terms(cs, &fc.omega_f, &omega_o, &pair)?;

        let j_ang = fc.j_s.fixed_rows::<3>(3);
        let jd_ang = fc.j_s_dot.fixed_rows::<3>(3);
        let qd_i = ctx.state.qd.rows(off, dof);
        let alpha_f0: Vector3<T> = j_ang * r.qdd_offset.rows(off, dof) + jd_ang * qd_i;
        let alpha_f_map = j_ang * r.qdd_map.rows(off, dof);
        let xi_dd0 = acc.velocity_drift + acc.accel_map * (alpha_f0 - alpha_o0);
        let xi_dd_map = acc.accel_map * (alpha_f_map - &alpha_o_map);

        let h = workspace.barriers(&cs.xi_f);
        let xd = fc.rates.xi_f;
        let signs = [(0, -T::one()), (0, T::one()), (1, -T::one()), (1, T::one())];
        for (k, (c, s)) in signs.into_iter().enumerate() {
            rows.push(second_order_row(
                spec,
                h[k],
                xd[c] * s,
                xi_dd0[c] * s,
                xi_dd_map.row(c).transpose() * s,
                BarrierFamily::Rolling,
            ));
        }
    }
    Ok(ConstraintRows { strict: vec![false; rows.len()], rows })
}

/// `-u ≥ -u_max` for every joint, then `u ≥ u_min`.
pub fn actuator_rows<T: Real>(bounds: &ActuatorBox<T>) -> ConstraintRows<T> {
    let m = bounds.u_max.len();
    let mut rows = Vec::with_capacity(2 * m);
    for (sign, limit) in [(-T::one(), &bounds.u_max), (T::one(), &bounds.u_min)] {
        for j in 0..m {
            let mut row = DVector::zeros(m);
            row[j] = sign;
            rows.push(BarrierRow {
                row,
                rhs: sign * limit[j],
                family: BarrierFamily::Actuator,
                h: T::zero(),
                h_dot: T::zero(),
                b: T::zero(),
            });
        }
    }
    ConstraintRows { strict: vec![false; rows.len()], rows }
}

/// Enabled families in the fixed order slip, joint, rolling, actuator.
pub fn assemble<T: Real>(ctx: &StepContext<'_, T>, settings: &ConstraintSettings<T>) -> Result<ConstraintRows<T>> {
    let mut all = ConstraintRows::default();
    let e = settings.enabled;
    if e.slip {
        all.extend(no_slip_rows(ctx, &settings.pyramid, settings.slip_margin));
    }
    if e.joint_limits {
        all.extend(joint_limit_rows(ctx, &settings.limits, &settings.barrier));
    }
    if e.rolling {
        all.extend(rolling_rows(ctx, &settings.workspace, &settings.barrier)?);
    }
    if e.actuator {
        all.extend(actuator_rows(&settings.actuator));
    }
    if let Some(i) = all.rows.iter().position(|r| !r.rhs.is_finite() || r.row.iter().any(|v| !v.is_finite())) {
        return Err(GraspError::IllConditioned { what: "constraint row", cond: i as f64 });
    }
    Ok(all)
}

/// Contact forces in contact coordinates (`z` along the inward normal).
pub fn contact_frame_forces<T: Real>(f_c: &DVector<T>, r_cp: &DMatrix<T>) -> Vec<Vector3<T>> {
    let local = r_cp * f_c;
    (0..local.len() / 3).map(|i| local.fixed_rows::<3>(3 * i).into_owned()).collect()
}

/// `β_i = ‖tangential‖ / normal` per contact.
pub fn required_friction<T: Real>(f_c: &DVector<T>, r_cp: &DMatrix<T>) -> Result<Vec<T>> {
    contact_frame_forces(f_c, r_cp)
        .into_iter()
        .enumerate()
        .map(|(i, f)| {
            if f.z <= T::zero() {
                Err(GraspError::NonPositiveNormal { contact: i, normal: to_f64(f.z) })
            } else {
                Ok(f.xy().norm() / f.z)
            }
        })
        .collect()
}

/// Like [`required_friction`] but reports a lost contact as `+∞`.
pub fn required_friction_or_inf<T: Real>(f_c: &DVector<T>, r_cp: &DMatrix<T>) -> Vec<T> {
    contact_frame_forces(f_c, r_cp)
        .into_iter()
        .map(|f| if f.z <= T::zero() { T::max_value().unwrap_or(T::one() / T::default_epsilon()) } else { f.xy().norm() / f.z })
        .collect()
}
