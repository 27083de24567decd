#![allow(dead_code)]

pub mod qp_oracle;
pub mod rolling;

use grasp_core::dynamics::{GraspState, HandObjectModel};
use grasp_core::scenario::ScenarioConfig;
use grasp_core::spatial::{Rot3, Twist};
use nalgebra::{DMatrix, DVector, Vector2, Vector3};
use rand::Rng;

pub fn paper() -> (ScenarioConfig, HandObjectModel<f64>, GraspState<f64>) {
    let cfg = ScenarioConfig::paper();
    let model = cfg.build_model();
    let state = cfg.initial_state(&model).unwrap();
    (cfg, model, state)
}

/// A grasp near the canonical one: object pose and contact points
/// perturbed, random object twist, joint rates from the grasp constraint.
pub fn random_admissible_state(rng: &mut impl Rng, model: &HandObjectModel<f64>, cfg: &ScenarioConfig) -> GraspState<f64> {
    let mut pose = cfg.object_pose();
    pose.position += Vector3::from_fn(|_, _| rng.gen_range(-0.02..0.02));
    let tilt = Vector3::from_fn(|_, _| rng.gen_range(-1.0..1.0)).normalize();
    pose.orientation = Rot3::about_axis(&tilt, rng.gen_range(-0.1..0.1)).compose(&pose.orientation);
    let xi_o: Vec<_> = (0..model.contact_count()).map(|_| Vector2::from_fn(|_, _| rng.gen_range(-0.04..0.04))).collect();
    let guess = DVector::from_iterator(9, cfg.hand.fingers.iter().flat_map(|f| f.q_guess));
    let mut s = model.static_grasp(pose, &xi_o, &guess).unwrap();
    s.twist = Twist {
        linear: Vector3::from_fn(|_, _| rng.gen_range(-0.3..0.3)),
        angular: Vector3::from_fn(|_, _| rng.gen_range(-1.0..1.0)),
    };
    let kin = model.kinematics(&s).unwrap();
    let xd = DVector::from_column_slice(s.twist.to_vector().as_slice());
    s.qd = kin.j_h.clone().lu().solve(&(kin.g.transpose() * xd)).unwrap();
    s
}

/// Contact force from one dense solve of both equations of motion plus the
/// differentiated grasp constraint, unknowns `(q̈, ẍ_o, f_c)`.
pub fn kkt_contact_force(model: &HandObjectModel<f64>, s: &GraspState<f64>, u: &DVector<f64>) -> DVector<f64> {
    let kin = model.kinematics(s).unwrap();
    let t = model.terms(s, &kin);
    let m = model.dof();
    let k = 3 * model.contact_count();
    let n = m + 6 + k;
    let mut a = DMatrix::zeros(n, n);
    let mut b = DVector::zeros(n);
    let xd = DVector::from_column_slice(s.twist.to_vector().as_slice());
    let m_o = DMatrix::from_column_slice(6, 6, t.m_o.as_slice());
    let c_o = DMatrix::from_column_slice(6, 6, t.c_o.as_slice());
    let w_e = DVector::from_column_slice(t.w_e.as_slice());

    a.view_mut((0, 0), (m, m)).copy_from(&t.m_h);
    a.view_mut((0, m + 6), (m, k)).copy_from(&kin.j_h.transpose());
    b.rows_mut(0, m).copy_from(&(&t.tau_e + u - &t.c_h * &s.qd));

    a.view_mut((m, m), (6, 6)).copy_from(&m_o);
    a.view_mut((m, m + 6), (6, k)).copy_from(&(-&kin.g));
    b.rows_mut(m, 6).copy_from(&(w_e - c_o * &xd));

    a.view_mut((m + 6, 0), (k, m)).copy_from(&kin.j_h);
    a.view_mut((m + 6, m), (k, 6)).copy_from(&(-kin.g.transpose()));
    b.rows_mut(m + 6, k).copy_from(&(-&kin.j_h_dot * &s.qd + kin.g_dot.transpose() * &xd));

    let x = a.lu().solve(&b).unwrap();
    x.rows(m + 6, k).into_owned()
}

pub fn max_abs(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0, |a, x| a.max(x.abs()))
}

/// Largest kinetic-energy deviation of a gravity-free, unforced finger over
/// `t_end` seconds.
pub fn finger_energy_drift(t_end: f64, dt: f64) -> f64 {
    use grasp_core::integrator::bs3_step;
    let (_, model, _) = paper();
    let chain = model.fingers[0].chain.clone();
    let f = |_t: f64, y: &DVector<f64>| -> Result<DVector<f64>, ()> {
        let (q, qd) = (y.rows(0, 3), y.rows(3, 3));
        let k = chain.kinematics(q.as_slice());
        let m = chain.mass_matrix(&k);
        let c = chain.coriolis_matrix(&k, qd.as_slice());
        let qdd = m.cholesky().unwrap().solve(&(-c * qd));
        let mut d = DVector::zeros(6);
        d.rows_mut(0, 3).copy_from(&qd);
        d.rows_mut(3, 3).copy_from(&qdd);
        Ok(d)
    };
    let energy = |y: &DVector<f64>| chain.kinetic_energy(&chain.kinematics(&y.as_slice()[..3]), &y.as_slice()[3..]);
    let mut y = DVector::from_column_slice(&[1.0, 0.3, 0.8, 1.5, -2.0, 2.5]);
    let e0 = energy(&y);
    let mut worst: f64 = 0.0;
    let mut t = 0.0;
    for _ in 0..(t_end / dt).round() as usize {
        y = bs3_step(f, t, &y, dt).unwrap();
        t += dt;
        worst = worst.max((energy(&y) - e0).abs());
    }
    worst
}

/// Largest palm-frame angular-momentum deviation of a torque-free body
/// spinning about `axis` (body frame).
pub fn spin_momentum_drift(inertia: nalgebra::Matrix3<f64>, omega0: Vector3<f64>, t_end: f64, dt: f64) -> f64 {
    use grasp_core::dynamics::ObjectModel;
    use grasp_core::integrator::bs3_step;
    use nalgebra::Matrix3;
    let body = ObjectModel { mass: 1.0, inertia, faces: vec![] };
    let f = |_t: f64, y: &DVector<f64>| -> Result<DVector<f64>, ()> {
        let r = Rot3::from_matrix_unchecked(Matrix3::from_column_slice(&y.as_slice()[..9]));
        let w = Vector3::new(y[9], y[10], y[11]);
        let m = body.mass_matrix(&r);
        let c = body.coriolis_matrix(&r, &w);
        let i_w = m.fixed_view::<3, 3>(3, 3).into_owned();
        let c_w = c.fixed_view::<3, 3>(3, 3).into_owned();
        let w_dot = i_w.try_inverse().unwrap() * (-c_w * w);
        let r_dot = grasp_core::spatial::skew(&w) * r.matrix();
        let mut d = DVector::zeros(12);
        d.rows_mut(0, 9).copy_from_slice(r_dot.as_slice());
        d.rows_mut(9, 3).copy_from(&w_dot);
        Ok(d)
    };
    let momentum = |y: &DVector<f64>| {
        let r = Matrix3::from_column_slice(&y.as_slice()[..9]);
        r * inertia * r.transpose() * Vector3::new(y[9], y[10], y[11])
    };
    let mut y = DVector::zeros(12);
    y.rows_mut(0, 9).copy_from_slice(Matrix3::<f64>::identity().as_slice());
    y.rows_mut(9, 3).copy_from(&omega0);
    let l0 = momentum(&y);
    let mut worst: f64 = 0.0;
    let mut t = 0.0;
    for _ in 0..(t_end / dt).round() as usize {
        y = bs3_step(f, t, &y, dt).unwrap();
        let r = Rot3::from_matrix_unchecked(Matrix3::from_column_slice(&y.as_slice()[..9])).orthonormalized();
        y.rows_mut(0, 9).copy_from_slice(r.matrix().as_slice());
        t += dt;
        worst = worst.max((momentum(&y) - l0).norm());
    }
    worst
}

/// Double integrator `ẍ = u` kept below `x = 1` by the filter, `h = 1 - x`.
/// Returns `(min h, steps with an active row)`.
pub fn double_integrator_run(
    x0: f64,
    v0: f64,
    nominal: impl Fn(f64) -> f64,
    spec: &grasp_core::zcbf::BarrierSpec<f64>,
    dt: f64,
    steps: usize,
) -> (f64, usize) {
    use grasp_core::qp::{solve, QpProblem, QpSettings};
    use grasp_core::zcbf::{second_order_row, BarrierFamily};
    let settings = QpSettings::default();
    let (mut x, mut v) = (x0, v0);
    let mut min_h = 1.0 - x;
    let mut active = 0;
    let mut warm: Vec<usize> = Vec::new();
    let map = DVector::from_element(1, -1.0);
    let mut p = QpProblem { u_nom: DVector::zeros(1), a: DMatrix::zeros(1, 1), b: DVector::zeros(1) };
    for k in 0..steps {
        let row = second_order_row(spec, 1.0 - x, -v, 0.0, map.clone(), BarrierFamily::JointLimit);
        p.u_nom[0] = nominal(k as f64 * dt);
        p.a[(0, 0)] = row.row[0];
        p.b[0] = row.rhs;
        let s = solve(&p, Some(&warm), &settings).unwrap();
        if !s.active.is_empty() {
            active += 1;
        }
        warm = s.active;
        let u = s.u[0];
        x += v * dt + 0.5 * u * dt * dt;
        v += u * dt;
        min_h = min_h.min(1.0 - x);
    }
    (min_h, active)
}

/// First-order move of every state component along its derivative under
/// torque `u`.
pub fn advance(model: &HandObjectModel<f64>, s: &GraspState<f64>, u: &DVector<f64>, h: f64) -> GraspState<f64> {
    let d = model.derivative(s, u).unwrap();
    let y = model.pack(s) + d * h;
    let mut t = model.unpack(&y, s.time + h);
    t.object.orientation = t.object.orientation.orthonormalized();
    t
}

/// Torque that holds the object still with a squeeze of `squeeze` N/m
/// towards the contact centroid.
pub fn static_hold(model: &HandObjectModel<f64>, s: &GraspState<f64>, squeeze: f64) -> DVector<f64> {
    use grasp_core::dynamics::pseudo_inverse;
    let kin = model.kinematics(s).unwrap();
    let t = model.terms(s, &kin);
    let w_e = DVector::from_column_slice(t.w_e.as_slice());
    let n = model.contact_count();
    let centroid = kin.fingers.iter().map(|f| f.object_contact_point).sum::<Vector3<f64>>() / n as f64;
    let mut f_int = DVector::zeros(3 * n);
    for (i, f) in kin.fingers.iter().enumerate() {
        f_int.fixed_rows_mut::<3>(3 * i).copy_from(&((centroid - f.object_contact_point) * squeeze));
    }
    let g_pinv = pseudo_inverse(&kin.g);
    let f_int = &f_int - &g_pinv * (&kin.g * &f_int);
    let f = -&g_pinv * w_e + f_int;
    kin.j_h.transpose() * &f - &t.tau_e
}
