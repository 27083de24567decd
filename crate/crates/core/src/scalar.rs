//! Scalar abstraction shared by every numeric module.
//!
//! All kinematics, dynamics and optimization code is written against [`Real`]
//! so it runs on `f32` or `f64`. The scenario runner and file formats are
//! fixed to `f64`.

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};
use std::fmt::Debug;

/// Floating point scalar usable by the library: `f32` or `f64`.
pub trait Real: RealField + Copy + FromPrimitive + ToPrimitive + Debug {}

impl<T> Real for T where T: RealField + Copy + FromPrimitive + ToPrimitive + Debug {}

/// Converts an `f64` literal into the working scalar.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("scalar type cannot represent f64 literal")
}

/// Lossy conversion back to `f64`, used for diagnostics and error payloads.
#[inline]
pub fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Odd integer power, keeping the sign of `x`.
#[inline]
pub fn powi<T: Real>(x: T, p: u32) -> T {
    let mut acc = T::one();
    for _ in 0..p {
        acc *= x;
    }
    acc
}
