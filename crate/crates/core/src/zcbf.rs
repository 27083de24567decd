//! Zeroing control barrier functions for relative-degree-two constraints.

use nalgebra::DVector;

use crate::scalar::{lit, powi, Real};

/// `α(h) = c·h^p` with `c > 0` and odd `p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassKappa<T: Real> {
    pub coefficient: T,
    pub power: u32,
}

impl<T: Real> ClassKappa<T> {
    /// `None` unless `coefficient > 0` and `power` is odd.
    pub fn new(coefficient: T, power: u32) -> Option<Self> {
        (coefficient > T::zero() && power % 2 == 1).then_some(ClassKappa { coefficient, power })
    }

    pub fn cubic() -> Self {
        ClassKappa { coefficient: T::one(), power: 3 }
    }

    pub fn eval(&self, h: T) -> T {
        self.coefficient * powi(h, self.power)
    }

    pub fn derivative(&self, h: T) -> T {
        self.coefficient * lit::<T>(self.power as f64) * powi(h, self.power - 1)
    }
}

/// The two class-K functions of a barrier `B = ḣ + α₁(h)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierSpec<T: Real> {
    pub alpha1: ClassKappa<T>,
    pub alpha2: ClassKappa<T>,
}

impl<T: Real> BarrierSpec<T> {
    pub fn cubic() -> Self {
        BarrierSpec { alpha1: ClassKappa::cubic(), alpha2: ClassKappa::cubic() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BarrierFamily {
    Slip,
    JointLimit,
    Rolling,
    Actuator,
}

impl BarrierFamily {
    pub const ALL: [BarrierFamily; 4] = [BarrierFamily::Slip, BarrierFamily::JointLimit, BarrierFamily::Rolling, BarrierFamily::Actuator];

    pub fn name(self) -> &'static str {
        match self {
            BarrierFamily::Slip => "slip",
            BarrierFamily::JointLimit => "joint",
            BarrierFamily::Rolling => "rolling",
            BarrierFamily::Actuator => "actuator",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Membership {
    Inside,
    Outside,
}

/// One linear condition `row · u ≥ rhs`.
///
/// For barrier rows `h`, `h_dot` and `b` hold the constraint value, its rate
/// and `B`; for the slip and actuator families `h` is the margin of the
/// plain inequality at the applied input and `h_dot`, `b` are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct BarrierRow<T: Real> {
    pub row: DVector<T>,
    pub rhs: T,
    pub family: BarrierFamily,
    pub h: T,
    pub h_dot: T,
    pub b: T,
}

impl<T: Real> BarrierRow<T> {
    pub fn margin(&self, u: &DVector<T>) -> T {
        self.row.dot(u) - self.rhs
    }
}

/// `B = ḣ + α₁(h)`.
pub fn barrier_value<T: Real>(spec: &BarrierSpec<T>, h: T, h_dot: T) -> T {
    h_dot + spec.alpha1.eval(h)
}

/// Membership in `{h ≥ 0} ∩ {B ≥ 0}`.
pub fn membership<T: Real>(spec: &BarrierSpec<T>, h: T, h_dot: T) -> Membership {
    if h >= T::zero() && barrier_value(spec, h, h_dot) >= T::zero() {
        Membership::Inside
    } else {
        Membership::Outside
    }
}

/// `L_gB · u ≥ -L_fB - α₂(B)`.
pub fn constraint_row<T: Real>(
    spec: &BarrierSpec<T>,
    h: T,
    h_dot: T,
    lf_b: T,
    lg_b: DVector<T>,
    family: BarrierFamily,
) -> BarrierRow<T> {
    let b = barrier_value(spec, h, h_dot);
    BarrierRow { row: lg_b, rhs: -lf_b - spec.alpha2.eval(b), family, h, h_dot, b }
}

/// Row for a constraint whose second derivative is affine in the input,
/// `ḧ = h_dd_offset + h_dd_map · u`.
pub fn second_order_row<T: Real>(
    spec: &BarrierSpec<T>,
    h: T,
    h_dot: T,
    h_dd_offset: T,
    h_dd_map: DVector<T>,
    family: BarrierFamily,
) -> BarrierRow<T> {
    let lf_b = h_dd_offset + spec.alpha1.derivative(h) * h_dot;
    constraint_row(spec, h, h_dot, lf_b, h_dd_map, family)
}
