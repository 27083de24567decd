//! Fixed-step third-order Runge-Kutta (Bogacki-Shampine tableau, the scheme
//! behind MATLAB's `ode3`).

use nalgebra::DVector;

use crate::scalar::{lit, Real};

/// Advances `y` by one step of size `dt`. The derivative callback receives
/// `(t, y)` and may fail, in which case the step is aborted.
pub fn bs3_step<T, E, F>(mut f: F, t: T, y: &DVector<T>, dt: T) -> Result<DVector<T>, E>
where
    T: Real,
    F: FnMut(T, &DVector<T>) -> Result<DVector<T>, E>,
{
    let k1 = f(t, y)?;
    let k2 = f(t + dt * lit(0.5), &(y + &k1 * (dt * lit(0.5))))?;
    let k3 = f(t + dt * lit(0.75), &(y + &k2 * (dt * lit(0.75))))?;
    Ok(y + (k1 * lit::<T>(2.0 / 9.0) + k2 * lit::<T>(1.0 / 3.0) + k3 * lit::<T>(4.0 / 9.0)) * dt)
}
