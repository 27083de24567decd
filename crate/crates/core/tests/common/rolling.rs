//! Integrates the rolling-contact rates alongside the rigid-body pose of a
//! sphere rolling on a fixed plane and checks that the contact point seen
//! from either body stays the same point in space.

use grasp_core::geometry::{HemisphereChart, PlaneChart, SurfaceChart};
use grasp_core::integrator::bs3_step;
use grasp_core::rolling::{contact_rates, psi_from_frames, ContactPair, ContactState};
use grasp_core::spatial::{skew, Rot3};
use nalgebra::{DVector, Matrix3, Vector2, Vector3};
use std::f64::consts::{FRAC_PI_2, PI};

pub const R: f64 = 0.06;

pub fn omega(t: f64, spin: f64) -> Vector3<f64> {
    Vector3::new(0.8 * t.cos(), 0.5, spin * (2.0 * t).sin())
}

pub fn omega_dot(t: f64, spin: f64) -> Vector3<f64> {
    Vector3::new(-0.8 * t.sin(), 0.0, 2.0 * spin * (2.0 * t).cos())
}

struct Unpacked {
    center: Vector3<f64>,
    rot: Rot3<f64>,
    contact: ContactState<f64>,
}

fn unpack(y: &DVector<f64>) -> Unpacked {
    Unpacked {
        center: Vector3::new(y[0], y[1], y[2]),
        rot: Rot3::from_matrix_unchecked(Matrix3::from_column_slice(&y.as_slice()[3..12])),
        contact: ContactState { xi_f: Vector2::new(y[12], y[13]), xi_o: Vector2::new(y[14], y[15]), psi: y[16] },
    }
}

fn plane() -> PlaneChart<f64> {
    PlaneChart::square(Vector3::zeros(), Vector3::x(), Vector3::y(), 0.5)
}

/// Returns (max coincidence error, max psi error) over the run.
pub fn sphere_on_plane(spin: f64, dt: f64, duration: f64) -> (f64, f64) {
    let finger = HemisphereChart::new(R);
    let object = plane();
    let r_po = Rot3::identity();
    let r0 = Rot3::rot_x(PI);
    let xi_f0 = Vector2::new(0.0, -FRAC_PI_2);
    let pair = ContactPair { finger: &finger, object: &object, r_pf: &r0, r_po: &r_po };
    let psi0 = psi_from_frames(&pair, &xi_f0, &Vector2::zeros()).unwrap();

    let mut y = DVector::zeros(17);
    y[2] = R;
    y.as_mut_slice()[3..12].copy_from_slice(r0.matrix().as_slice());
    y[12] = xi_f0.x;
    y[13] = xi_f0.y;
    y[16] = psi0;

    let deriv = |t: f64, y: &DVector<f64>| -> grasp_core::Result<DVector<f64>> {
        let s = unpack(y);
        let w = omega(t, spin);
        let pair = ContactPair { finger: &finger, object: &object, r_pf: &s.rot, r_po: &r_po };
        let rates = contact_rates(&s.contact, &w, &Vector3::zeros(), &pair)?;
        let v = w.cross(&(Vector3::z() * R));
        let rdot = skew(&w) * s.rot.matrix();
        let mut d = DVector::zeros(17);
        d.as_mut_slice()[0..3].copy_from_slice(v.as_slice());
        d.as_mut_slice()[3..12].copy_from_slice(rdot.as_slice());
        d[12] = rates.xi_f.x;
        d[13] = rates.xi_f.y;
        d[14] = rates.xi_o.x;
        d[15] = rates.xi_o.y;
        d[16] = rates.psi;
        Ok(d)
    };

    let steps = (duration / dt).round() as usize;
    let (mut worst, mut worst_psi) = (0.0f64, 0.0f64);
    for k in 0..steps {
        y = bs3_step(&deriv, k as f64 * dt, &y, dt).unwrap();
        let s = unpack(&y);
        let rot = s.rot.orthonormalized();
        y.as_mut_slice()[3..12].copy_from_slice(rot.matrix().as_slice());
        let p_finger = s.center + rot.apply(&finger.point(&s.contact.xi_f));
        let p_object = object.point(&s.contact.xi_o);
        worst = worst.max((p_finger - p_object).norm());
        let pair = ContactPair { finger: &finger, object: &object, r_pf: &rot, r_po: &r_po };
        let psi_geo = psi_from_frames(&pair, &s.contact.xi_f, &s.contact.xi_o).unwrap();
        worst_psi = worst_psi.max(grasp_core::spatial::wrap_angle(psi_geo - s.contact.psi).abs());
    }
    (worst, worst_psi)
}
