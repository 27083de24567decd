//! Grasp-constraint-aware in-hand manipulation.
//!
//! A nominal manipulation torque is passed through a quadratic program that
//! keeps contact forces inside linearized friction cones, joints inside their
//! limits and rolling contacts inside the fingertip workspace. The crate also
//! contains the multi-fingered hand/object simulator used to exercise the
//! filter.

pub mod constraints;
pub mod control;
pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod integrator;
pub mod rolling;
pub mod qp;
pub mod scalar;
pub mod scenario;
pub mod spatial;
pub mod zcbf;

pub use error::{GraspError, Result};
pub use scalar::Real;

pub type Rot3d = spatial::Rot3<f64>;
pub type Posed = spatial::Pose<f64>;
pub type Twistd = spatial::Twist<f64>;
pub type Chartd = geometry::Chart<f64>;
