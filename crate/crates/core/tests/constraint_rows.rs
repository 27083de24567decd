mod common;

use common::{advance, paper, random_admissible_state, static_hold};
use grasp_core::constraints::{assemble, joint_limit_rows, no_slip_rows, rolling_rows, FamilySwitches, StepContext};
use grasp_core::zcbf::{barrier_value, BarrierFamily};
use nalgebra::DVector;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

#[test]
fn paper_scenario_has_seventy_two_rows() {
    let (cfg, model, s) = paper();
    let ctx = StepContext::new(&model, &s).unwrap();
    let rows = assemble(&ctx, &cfg.constraint_settings()).unwrap();
    assert_eq!(rows.len(), 72);
    assert_eq!(rows.count(BarrierFamily::Slip), 24);
    assert_eq!(rows.count(BarrierFamily::JointLimit), 18);
    assert_eq!(rows.count(BarrierFamily::Rolling), 12);
    assert_eq!(rows.count(BarrierFamily::Actuator), 18);
    assert!(rows.strict.iter().take(24).all(|&s| s));
    assert!(rows.strict.iter().skip(24).all(|&s| !s));
}

#[test]
fn disabling_a_family_removes_only_its_rows() {
    let (cfg, model, s) = paper();
    let ctx = StepContext::new(&model, &s).unwrap();
    let full = assemble(&ctx, &cfg.constraint_settings()).unwrap();
    for fam in BarrierFamily::ALL {
        let mut settings = cfg.constraint_settings();
        match fam {
            BarrierFamily::Slip => settings.enabled.slip = false,
            BarrierFamily::JointLimit => settings.enabled.joint_limits = false,
            BarrierFamily::Rolling => settings.enabled.rolling = false,
            BarrierFamily::Actuator => settings.enabled.actuator = false,
        }
        let rows = assemble(&ctx, &settings).unwrap();
        assert_eq!(rows.count(fam), 0);
        let kept: Vec<_> = full.rows.iter().filter(|r| r.family != fam).cloned().collect();
        assert_eq!(rows.rows, kept);
    }
    let mut settings = cfg.constraint_settings();
    settings.enabled = FamilySwitches::none();
    assert!(assemble(&ctx, &settings).unwrap().is_empty());
}

#[test]
fn slip_rows_reproduce_pyramid_values() {
    let (cfg, model, _) = paper();
    let settings = cfg.constraint_settings();
    let mut rng = StdRng::seed_from_u64(31);
    for _ in 0..10 {
        let s = random_admissible_state(&mut rng, &model, &cfg);
        let ctx = StepContext::new(&model, &s).unwrap();
        let rows = no_slip_rows(&ctx, &settings.pyramid, settings.slip_margin);
        let u = DVector::from_fn(9, |_, _| rng.gen_range(-3.0..3.0));
        let f = model.contact_force(&s, &u).unwrap();
        let direct = settings.pyramid.block(3) * &ctx.kin.r_cp * f;
        let via_rows = rows.margins(&u).add_scalar(settings.slip_margin);
        assert!((direct - via_rows).amax() < 1e-9);
    }
}

#[test]
fn static_squeeze_satisfies_every_row() {
    let (cfg, model, s) = paper();
    let u = static_hold(&model, &s, 10.0);
    let ctx = StepContext::new(&model, &s).unwrap();
    let rows = assemble(&ctx, &cfg.constraint_settings()).unwrap();
    let margins = rows.margins(&u);
    assert!(margins.iter().all(|&m| m > 0.0), "{margins}");
}

/// `Ḃ + α₂(B)` for joint `j`'s upper limit evaluated from the simulated
/// joint acceleration.
fn joint_condition(model: &grasp_core::dynamics::HandObjectModel<f64>, s: &grasp_core::dynamics::GraspState<f64>, q_max: f64, j: usize, u: &DVector<f64>) -> f64 {
    let spec = grasp_core::zcbf::BarrierSpec::<f64>::cubic();
    let d = model.derivative(s, u).unwrap();
    let qdd = d[9 + j];
    let (h, h_dot) = (q_max - s.q[j], -s.qd[j]);
    let b = barrier_value(&spec, h, h_dot);
    -qdd + spec.alpha1.derivative(h) * h_dot + spec.alpha2.eval(b)
}

#[test]
fn joint_rows_match_differentiated_barrier() {
    let (cfg, model, _) = paper();
    let settings = cfg.constraint_settings();
    let mut rng = StdRng::seed_from_u64(32);
    let s = random_admissible_state(&mut rng, &model, &cfg);
    let ctx = StepContext::new(&model, &s).unwrap();
    let rows = joint_limit_rows(&ctx, &settings.limits, &settings.barrier);
    let u = DVector::from_fn(9, |_, _| rng.gen_range(-3.0..3.0));
    for j in 0..9 {
        let q_max = settings.limits.q_max[j];
        let direct = joint_condition(&model, &s, q_max, j, &u);
        assert!((rows.rows[j].margin(&u) - direct).abs() < 1e-8);
        for k in 0..9 {
            let mut up = u.clone();
            let mut dn = u.clone();
            up[k] += 1e-4;
            dn[k] -= 1e-4;
            let fd = (joint_condition(&model, &s, q_max, j, &up) - joint_condition(&model, &s, q_max, j, &dn)) / 2e-4;
            assert!((fd - rows.rows[j].row[k]).abs() < 1e-6);
        }
    }
}

#[test]
fn rolling_rows_match_time_differences() {
    let (cfg, model, _) = paper();
    let settings = cfg.constraint_settings();
    let spec = settings.barrier;
    let mut rng = StdRng::seed_from_u64(33);
    for _ in 0..5 {
        let s = random_admissible_state(&mut rng, &model, &cfg);
        let ctx = StepContext::new(&model, &s).unwrap();
        let rows = rolling_rows(&ctx, &settings.workspace, &spec).unwrap();
        assert_eq!(rows.len(), 12);
        let u = static_hold(&model, &s, 10.0) + DVector::from_fn(9, |_, _| rng.gen_range(-0.5..0.5));
        let dt = 1e-6;
        let rates = |st: &grasp_core::dynamics::GraspState<f64>| model.kinematics(st).unwrap().fingers.iter().map(|f| f.rates.xi_f).collect::<Vec<_>>();
        let (rp, rm) = (rates(&advance(&model, &s, &u, dt)), rates(&advance(&model, &s, &u, -dt)));
        for i in 0..3 {
            let xi_dd = (rp[i] - rm[i]) / (2.0 * dt);
            let xd = ctx.kin.fingers[i].rates.xi_f;
            let h = settings.workspace.barriers(&s.contacts[i].xi_f);
            let comps = [(0, -1.0), (0, 1.0), (1, -1.0), (1, 1.0)];
            for (k, (c, sign)) in comps.into_iter().enumerate() {
                let h_dot = sign * xd[c];
                let b = barrier_value(&spec, h[k], h_dot);
                let cond = sign * xi_dd[c] + spec.alpha1.derivative(h[k]) * h_dot + spec.alpha2.eval(b);
                let row = &rows.rows[4 * i + k];
                assert!((row.margin(&u) - cond).abs() < 1e-5, "contact {i} side {k}: {} vs {cond}", row.margin(&u));
                assert!((row.h - h[k]).abs() < 1e-15);
            }
        }
    }
}

#[test]
fn rolling_barrier_values_at_the_pole() {
    let (cfg, model, s) = paper();
    let ctx = StepContext::new(&model, &s).unwrap();
    let settings = cfg.constraint_settings();
    let rows = rolling_rows(&ctx, &settings.workspace, &settings.barrier).unwrap();
    for r in &rows.rows {
        assert!((r.h - std::f64::consts::FRAC_PI_2).abs() < 1e-3);
        assert_eq!(r.h_dot, 0.0);
    }
}
