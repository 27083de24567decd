//! Rolling-contact kinematics between a fingertip surface and an object
//! surface: evolution of both contact coordinates and the contact angle.
//!
//! The contact frame is the fingertip Gauss frame at the contact point; its
//! z-axis is the fingertip outward normal and therefore points into the
//! object. The object's tangent axes are related to the fingertip's through
//! `x_o = cos(psi) x_f - sin(psi) y_f`.

use nalgebra::{Matrix2, Matrix2x3, Matrix3, Vector2, Vector3};

use crate::error::{GraspError, Result};
use crate::geometry::{gauss_frame, gauss_frame_rate, tensors, GeometricTensors, SurfaceChart};
use crate::scalar::{lit, to_f64, Real};
use crate::spatial::{skew, Rot3};

/// Contact coordinates on both surfaces and the relative contact angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContactState<T: Real> {
    pub xi_f: Vector2<T>,
    pub xi_o: Vector2<T>,
    pub psi: T,
}

/// Time derivatives of a [`ContactState`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContactRates<T: Real> {
    pub xi_f: Vector2<T>,
    pub xi_o: Vector2<T>,
    pub psi: T,
}

/// `ξ̈_f = velocity_drift + accel_map · (α_f - α_o)` with palm-frame angular
/// accelerations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContactAccelTerms<T: Real> {
    pub velocity_drift: Vector2<T>,
    pub accel_map: Matrix2x3<T>,
}

/// The fingertip and object surfaces in contact, with the body orientations
/// that place them in the palm frame.
pub struct ContactPair<'a, T: Real, F: SurfaceChart<T> + ?Sized, O: SurfaceChart<T> + ?Sized> {
    pub finger: &'a F,
    pub object: &'a O,
    pub r_pf: &'a Rot3<T>,
    pub r_po: &'a Rot3<T>,
}

/// `R_ψ = [cos ψ, -sin ψ; -sin ψ, -cos ψ]` (a reflection).
pub fn rotation_psi<T: Real>(psi: T) -> Matrix2<T> {
    let (s, c) = psi.sin_cos();
    Matrix2::new(c, -s, -s, -c)
}

fn rotation_psi_derivative<T: Real>(psi: T) -> Matrix2<T> {
    let (s, c) = psi.sin_cos();
    Matrix2::new(-s, -c, -c, s)
}

fn rolling_selector<T: Real>() -> Matrix2x3<T> {
    let (z, o) = (T::zero(), T::one());
    Matrix2x3::new(z, -o, z, o, z, z)
}

const MAX_RELATIVE_CURVATURE_COND: f64 = 1e10;

fn relative_curvature_inverse<T: Real>(a: &Matrix2<T>) -> Result<Matrix2<T>> {
    let sv = a.singular_values();
    let (hi, lo) = (sv.max(), sv.min());
    if lo <= T::zero() || hi / lo > lit(MAX_RELATIVE_CURVATURE_COND) {
        let cond = if lo > T::zero() { to_f64(hi / lo) } else { f64::INFINITY };
        return Err(GraspError::FlatOnFlat { cond });
    }
    a.try_inverse().ok_or(GraspError::FlatOnFlat { cond: f64::INFINITY })
}

/// Contact Jacobians `(H_f, H_o)` mapping the relative angular velocity in
/// contact-frame coordinates to the contact coordinate rates.
pub fn h_matrices<T: Real>(
    finger: &GeometricTensors<T>,
    object: &GeometricTensors<T>,
    psi: T,
) -> Result<(Matrix2x3<T>, Matrix2x3<T>)> {
    let rp = rotation_psi(psi);
    let a_inv = relative_curvature_inverse(&(finger.curvature + rp * object.curvature * rp))?;
    let e = rolling_selector();
    let mf_inv = finger.metric.try_inverse().ok_or(GraspError::DegenerateChart { norm: 0.0 })?;
    let mo_inv = object.metric.try_inverse().ok_or(GraspError::DegenerateChart { norm: 0.0 })?;
    Ok((mf_inv * a_inv * e, mo_inv * rp * a_inv * e))
}

/// Palm-to-contact rotation `R_cp = (R_pf R_fc)ᵀ`.
pub fn contact_frame<T: Real, C: SurfaceChart<T> + ?Sized>(
    chart: &C,
    xi_f: &Vector2<T>,
    r_pf: &Rot3<T>,
) -> Result<Rot3<T>> {
    let r_fc = gauss_frame(chart, xi_f)?;
    Ok(r_pf.compose(&r_fc).transpose())
}

/// Contact angle consistent with the current surface frames.
pub fn psi_from_frames<T: Real, F, O>(pair: &ContactPair<'_, T, F, O>, xi_f: &Vector2<T>, xi_o: &Vector2<T>) -> Result<T>
where
    F: SurfaceChart<T> + ?Sized,
    O: SurfaceChart<T> + ?Sized,
{
    let ff = pair.r_pf.compose(&gauss_frame(pair.finger, xi_f)?);
    let fo = pair.r_po.compose(&gauss_frame(pair.object, xi_o)?);
    let xo = fo.column(0);
    Ok((-xo.dot(&ff.column(1))).atan2(xo.dot(&ff.column(0))))
}

/// Contact coordinate rates for fingertip and object angular velocities
/// `omega_f`, `omega_o` (palm frame).
pub fn contact_rates<T: Real, F, O>(
    state: &ContactState<T>,
    omega_f: &Vector3<T>,
    omega_o: &Vector3<T>,
    pair: &ContactPair<'_, T, F, O>,
) -> Result<ContactRates<T>>
where
    F: SurfaceChart<T> + ?Sized,
    O: SurfaceChart<T> + ?Sized,
{
    let tf = tensors(pair.finger, &state.xi_f)?;
    let to = tensors(pair.object, &state.xi_o)?;
    let r_cp = contact_frame(pair.finger, &state.xi_f, pair.r_pf)?;
    Ok(rates_from_parts(&tf, &to, &r_cp, state.psi, omega_f, omega_o)?.0)
}

fn rates_from_parts<T: Real>(
    tf: &GeometricTensors<T>,
    to: &GeometricTensors<T>,
    r_cp: &Rot3<T>,
    psi: T,
    omega_f: &Vector3<T>,
    omega_o: &Vector3<T>,
) -> Result<(ContactRates<T>, Matrix2x3<T>, Vector3<T>)> {
    let (hf, ho) = h_matrices(tf, to, psi)?;
    let w = r_cp.apply(&(omega_f - omega_o));
    let xi_f = hf * w;
    let xi_o = ho * w;
    // relative spin about the contact normal plus the frame-field rotation
    // of each surface
    let psi_dot = w.z + (tf.torsion * tf.metric * xi_f)[0] + (to.torsion * to.metric * xi_o)[0];
    Ok((ContactRates { xi_f, xi_o, psi: psi_dot }, hf, w))
}

fn tensor_rate<T: Real>(d: &[GeometricTensors<T>; 2], xi_dot: &Vector2<T>) -> (Matrix2<T>, Matrix2<T>) {
    (
        d[0].metric * xi_dot.x + d[1].metric * xi_dot.y,
        d[0].curvature * xi_dot.x + d[1].curvature * xi_dot.y,
    )
}

/// Second derivative of the fingertip contact coordinates, split into the
/// velocity-dependent part and the map applied to the relative angular
/// acceleration `α_f - α_o`.
pub fn contact_accel_terms<T: Real, F, O>(
    state: &ContactState<T>,
    omega_f: &Vector3<T>,
    omega_o: &Vector3<T>,
    pair: &ContactPair<'_, T, F, O>,
) -> Result<ContactAccelTerms<T>>
where
    F: SurfaceChart<T> + ?Sized,
    O: SurfaceChart<T> + ?Sized,
{
    let tf = tensors(pair.finger, &state.xi_f)?;
    let to = tensors(pair.object, &state.xi_o)?;
    let r_cp = contact_frame(pair.finger, &state.xi_f, pair.r_pf)?;
    let (rates, hf, _) = rates_from_parts(&tf, &to, &r_cp, state.psi, omega_f, omega_o)?;

    let rp = rotation_psi(state.psi);
    let rp_dot = rotation_psi_derivative(state.psi) * rates.psi;
    let (mf_dot, kf_dot) = tensor_rate(&pair.finger.tensor_partials(&state.xi_f), &rates.xi_f);
    let (_, ko_dot) = tensor_rate(&pair.object.tensor_partials(&state.xi_o), &rates.xi_o);
    let a = tf.curvature + rp * to.curvature * rp;
    let a_dot = kf_dot + rp_dot * to.curvature * rp + rp * ko_dot * rp + rp * to.curvature * rp_dot;
    let a_inv = relative_curvature_inverse(&a)?;
    let mf_inv = tf.metric.try_inverse().ok_or(GraspError::DegenerateChart { norm: 0.0 })?;
    let hf_dot = -mf_inv * mf_dot * hf - mf_inv * a_inv * a_dot * a_inv * rolling_selector();

    // R_cp' = -[w_c]x R_cp - R_cp [ω_f]x
    let w_c = gauss_frame_rate(&tf, &rates.xi_f);
    let r_cp_dot: Matrix3<T> = -skew(&w_c) * r_cp.matrix() - r_cp.matrix() * skew(omega_f);

    let omega_rel = omega_f - omega_o;
    let velocity_drift = (hf_dot * r_cp.matrix() + hf * r_cp_dot) * omega_rel;
    Ok(ContactAccelTerms { velocity_drift, accel_map: hf * r_cp.matrix() })
}
