mod common;

use common::rolling::{omega, omega_dot, sphere_on_plane, R};
use grasp_core::geometry::HemisphereChart;
use grasp_core::rolling::{contact_accel_terms, contact_rates, ContactPair, ContactState};
use grasp_core::spatial::Rot3;
use nalgebra::{Vector2, Vector3};

#[test]
fn sphere_on_plane_stays_coincident_without_spin() {
    let (err, psi_err) = sphere_on_plane(0.0, 1e-3, 1.0);
    assert!(err < 1e-4, "coincidence error {err}");
    assert!(psi_err < 1e-6, "psi error {psi_err}");
}

#[test]
fn sphere_on_plane_stays_coincident_with_spin() {
    let (err, psi_err) = sphere_on_plane(0.6, 1e-3, 1.0);
    assert!(err < 1e-4, "coincidence error {err}");
    assert!(psi_err < 1e-6, "psi error {psi_err}");
}

#[test]
fn contact_acceleration_matches_time_differences() {
    // sphere rolling on a larger sphere (curved object) with spin
    let finger = HemisphereChart::new(R);
    let object = HemisphereChart::new(0.2);
    let spin = 0.4;
    let r_po = Rot3::identity();
    let h = 1e-4;
    let mut state = ContactState { xi_f: Vector2::new(0.2, -1.3), xi_o: Vector2::new(-0.1, -1.7), psi: 0.3 };
    let mut rot = Rot3::about_axis(&Vector3::new(0.3, 1.0, 0.2), 0.7);
    let rates_at = |t: f64, s: &ContactState<f64>, r: &Rot3<f64>| {
        let pair = ContactPair { finger: &finger, object: &object, r_pf: r, r_po: &r_po };
        contact_rates(s, &omega(t, spin), &Vector3::zeros(), &pair).unwrap()
    };
    // advance along the trajectory with small explicit-midpoint steps
    let advance = |t: f64, s: &ContactState<f64>, r: &Rot3<f64>, dt: f64| {
        let k1 = rates_at(t, s, r);
        let mid = ContactState { xi_f: s.xi_f + k1.xi_f * dt / 2.0, xi_o: s.xi_o + k1.xi_o * dt / 2.0, psi: s.psi + k1.psi * dt / 2.0 };
        let rmid = Rot3::about_axis(&omega(t, spin), omega(t, spin).norm() * dt / 2.0).compose(r);
        let k2 = rates_at(t + dt / 2.0, &mid, &rmid);
        let w = omega(t + dt / 2.0, spin);
        (
            ContactState { xi_f: s.xi_f + k2.xi_f * dt, xi_o: s.xi_o + k2.xi_o * dt, psi: s.psi + k2.psi * dt },
            Rot3::about_axis(&w, w.norm() * dt).compose(r),
        )
    };
    let mut t = 0.0;
    for _ in 0..20 {
        let sub = 20;
        let (mut sp, mut rp) = (state, rot);
        for i in 0..sub {
            (sp, rp) = advance(t + i as f64 * h / sub as f64, &sp, &rp, h / sub as f64);
        }
        let (mut sm, mut rm) = (state, rot);
        for i in 0..sub {
            (sm, rm) = advance(t - i as f64 * h / sub as f64, &sm, &rm, -h / sub as f64);
        }
        let fd = (rates_at(t + h, &sp, &rp).xi_f - rates_at(t - h, &sm, &rm).xi_f) / (2.0 * h);
        let pair = ContactPair { finger: &finger, object: &object, r_pf: &rot, r_po: &r_po };
        let terms = contact_accel_terms(&state, &omega(t, spin), &Vector3::zeros(), &pair).unwrap();
        let analytic = terms.velocity_drift + terms.accel_map * omega_dot(t, spin);
        assert!((fd - analytic).amax() < 1e-3, "t={t}: fd {fd:?} vs {analytic:?}");
        for i in 0..50 {
            (state, rot) = advance(t + i as f64 * 1e-3, &state, &rot, 1e-3);
        }
        t += 0.05;
    }
}
