//! Parameterized contact surfaces, their Gauss frames and the metric,
//! curvature and torsion tensors used by the rolling-contact kinematics.
//!
//! Charts must be orthogonal (`c_a · c_b = 0`) and are authored so the unit
//! normal `c_a × c_b / |c_a × c_b|` points out of the body.

use nalgebra::{Matrix2, Matrix3, RowVector2, Vector2, Vector3};

use crate::error::{GraspError, Result};
use crate::scalar::{lit, to_f64, Real};
use crate::spatial::Rot3;

/// Closed coordinate box of a chart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChartBounds<T: Real> {
    pub a_min: T,
    pub a_max: T,
    pub b_min: T,
    pub b_max: T,
}

impl<T: Real> ChartBounds<T> {
    pub fn contains(&self, xi: &Vector2<T>) -> bool {
        xi.x >= self.a_min && xi.x <= self.a_max && xi.y >= self.b_min && xi.y <= self.b_max
    }

    pub fn center(&self) -> Vector2<T> {
        let half = lit::<T>(0.5);
        Vector2::new((self.a_min + self.a_max) * half, (self.b_min + self.b_max) * half)
    }
}

/// First fundamental form and connection quantities at a chart point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometricTensors<T: Real> {
    /// `diag(|c_a|, |c_b|)`.
    pub metric: Matrix2<T>,
    pub curvature: Matrix2<T>,
    pub torsion: RowVector2<T>,
}

impl<T: Real> GeometricTensors<T> {
    pub fn zero() -> Self {
        GeometricTensors {
            metric: Matrix2::zeros(),
            curvature: Matrix2::zeros(),
            torsion: RowVector2::zeros(),
        }
    }
}

/// A smooth orthogonal parameterization `c(a, b)` of a body surface,
/// expressed in the body frame.
pub trait SurfaceChart<T: Real> {
    fn point(&self, xi: &Vector2<T>) -> Vector3<T>;

    /// `(c_a, c_b)`.
    fn partials(&self, xi: &Vector2<T>) -> (Vector3<T>, Vector3<T>);

    /// `(c_aa, c_ab, c_bb)`.
    fn second_partials(&self, xi: &Vector2<T>) -> (Vector3<T>, Vector3<T>, Vector3<T>);

    /// Analytic partial derivatives `(∂/∂a, ∂/∂b)` of the tensor fields.
    fn tensor_partials(&self, xi: &Vector2<T>) -> [GeometricTensors<T>; 2];

    fn bounds(&self) -> ChartBounds<T>;
}

/// Fingertip hemisphere `c = [-R cos a cos b, R sin a, -R cos a sin b]`.
///
/// The pole `(0, 0, R)` sits at `(a, b) = (0, -pi/2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HemisphereChart<T: Real> {
    pub radius: T,
    pub bounds: ChartBounds<T>,
}

impl<T: Real> HemisphereChart<T> {
    /// Hemisphere over the full open box `(-pi/2, pi/2) x (-pi, 0)`.
    pub fn new(radius: T) -> Self {
        HemisphereChart {
            radius,
            bounds: ChartBounds {
                a_min: -T::frac_pi_2(),
                a_max: T::frac_pi_2(),
                b_min: -T::pi(),
                b_max: T::zero(),
            },
        }
    }
}

impl<T: Real> SurfaceChart<T> for HemisphereChart<T> {
    fn point(&self, xi: &Vector2<T>) -> Vector3<T> {
        let r = self.radius;
        let (sa, ca) = xi.x.sin_cos();
        let (sb, cb) = xi.y.sin_cos();
        Vector3::new(-r * ca * cb, r * sa, -r * ca * sb)
    }

    fn partials(&self, xi: &Vector2<T>) -> (Vector3<T>, Vector3<T>) {
        let r = self.radius;
        let (sa, ca) = xi.x.sin_cos();
        let (sb, cb) = xi.y.sin_cos();
        (
            Vector3::new(r * sa * cb, r * ca, r * sa * sb),
            Vector3::new(r * ca * sb, T::zero(), -r * ca * cb),
        )
    }

    fn second_partials(&self, xi: &Vector2<T>) -> (Vector3<T>, Vector3<T>, Vector3<T>) {
        let r = self.radius;
        let (sa, ca) = xi.x.sin_cos();
        let (sb, cb) = xi.y.sin_cos();
        (
            Vector3::new(r * ca * cb, -r * sa, r * ca * sb),
            Vector3::new(-r * sa * sb, T::zero(), r * sa * cb),
            Vector3::new(r * ca * cb, T::zero(), r * ca * sb),
        )
    }

    fn tensor_partials(&self, xi: &Vector2<T>) -> [GeometricTensors<T>; 2] {
        // M = diag(R, R cos a), K = I / R, T = [0, -tan a / R]
        let r = self.radius;
        let (sa, ca) = xi.x.sin_cos();
        let mut d_a = GeometricTensors::zero();
        d_a.metric[(1, 1)] = -r * sa;
        d_a.torsion[1] = -T::one() / (r * ca * ca);
        [d_a, GeometricTensors::zero()]
    }

    fn bounds(&self) -> ChartBounds<T> {
        self.bounds
    }
}

/// Flat face `c = origin + a t1 + b t2` with unit orthogonal tangents.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneChart<T: Real> {
    pub origin: Vector3<T>,
    pub t1: Vector3<T>,
    pub t2: Vector3<T>,
    pub bounds: ChartBounds<T>,
}

impl<T: Real> PlaneChart<T> {
    /// Square face of half-width `half` centered at `origin`, outward normal `t1 × t2`.
    pub fn square(origin: Vector3<T>, t1: Vector3<T>, t2: Vector3<T>, half: T) -> Self {
        PlaneChart {
            origin,
            t1: t1.normalize(),
            t2: t2.normalize(),
            bounds: ChartBounds { a_min: -half, a_max: half, b_min: -half, b_max: half },
        }
    }

    pub fn normal(&self) -> Vector3<T> {
        self.t1.cross(&self.t2)
    }
}

impl<T: Real> SurfaceChart<T> for PlaneChart<T> {
    fn point(&self, xi: &Vector2<T>) -> Vector3<T> {
        self.origin + self.t1 * xi.x + self.t2 * xi.y
    }

    fn partials(&self, _xi: &Vector2<T>) -> (Vector3<T>, Vector3<T>) {
        (self.t1, self.t2)
    }

    fn second_partials(&self, _xi: &Vector2<T>) -> (Vector3<T>, Vector3<T>, Vector3<T>) {
        (Vector3::zeros(), Vector3::zeros(), Vector3::zeros())
    }

    fn tensor_partials(&self, _xi: &Vector2<T>) -> [GeometricTensors<T>; 2] {
        [GeometricTensors::zero(), GeometricTensors::zero()]
    }

    fn bounds(&self) -> ChartBounds<T> {
        self.bounds
    }
}

/// The chart kinds a scenario can instantiate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Chart<T: Real> {
    Hemisphere(HemisphereChart<T>),
    Plane(PlaneChart<T>),
}

macro_rules! dispatch {
    ($self:ident, $c:ident => $e:expr) => {
        match $self {
            Chart::Hemisphere($c) => $e,
            Chart::Plane($c) => $e,
        }
    };
}

impl<T: Real> SurfaceChart<T> for Chart<T> {
    fn point(&self, xi: &Vector2<T>) -> Vector3<T> {
        dispatch!(self, c => c.point(xi))
    }
    fn partials(&self, xi: &Vector2<T>) -> (Vector3<T>, Vector3<T>) {
        dispatch!(self, c => c.partials(xi))
    }
    fn second_partials(&self, xi: &Vector2<T>) -> (Vector3<T>, Vector3<T>, Vector3<T>) {
        dispatch!(self, c => c.second_partials(xi))
    }
    fn tensor_partials(&self, xi: &Vector2<T>) -> [GeometricTensors<T>; 2] {
        dispatch!(self, c => c.tensor_partials(xi))
    }
    fn bounds(&self) -> ChartBounds<T> {
        dispatch!(self, c => c.bounds())
    }
}

const MIN_TANGENT_NORM: f64 = 1e-12;

fn checked_partials<T: Real, C: SurfaceChart<T> + ?Sized>(
    chart: &C,
    xi: &Vector2<T>,
) -> Result<(Vector3<T>, Vector3<T>)> {
    if !chart.bounds().contains(xi) {
        return Err(GraspError::OutOfChart { a: to_f64(xi.x), b: to_f64(xi.y) });
    }
    let (ca, cb) = chart.partials(xi);
    let norm = ca.norm().min(cb.norm());
    if norm < lit(MIN_TANGENT_NORM) {
        return Err(GraspError::DegenerateChart { norm: to_f64(norm) });
    }
    Ok((ca, cb))
}

/// Gauss frame `[c_a/|c_a|, c_b/|c_b|, n]` mapping contact-frame vectors into
/// the body frame.
pub fn gauss_frame<T: Real, C: SurfaceChart<T> + ?Sized>(chart: &C, xi: &Vector2<T>) -> Result<Rot3<T>> {
    let (ca, cb) = checked_partials(chart, xi)?;
    let n = ca.cross(&cb).normalize();
    Ok(Rot3::from_columns(&ca.normalize(), &cb.normalize(), &n))
}

/// Metric, curvature and torsion tensors at `xi`.
pub fn tensors<T: Real, C: SurfaceChart<T> + ?Sized>(chart: &C, xi: &Vector2<T>) -> Result<GeometricTensors<T>> {
    let (ca, cb) = checked_partials(chart, xi)?;
    let (caa, cab, cbb) = chart.second_partials(xi);
    let (la, lb) = (ca.norm(), cb.norm());
    let rho1 = ca / la;
    let rho2 = cb / lb;
    let w = ca.cross(&cb);
    let wn = w.norm();
    let n = w / wn;
    let tangent = |v: Vector3<T>| -> Vector3<T> { (Matrix3::identity() - n * n.transpose()) * v / wn };
    let dn_a = tangent(caa.cross(&cb) + ca.cross(&cab));
    let dn_b = tangent(cab.cross(&cb) + ca.cross(&cbb));
    let p1 = Matrix3::identity() - rho1 * rho1.transpose();
    let drho1_a = p1 * caa / la;
    let drho1_b = p1 * cab / la;

    let metric = Matrix2::new(la, T::zero(), T::zero(), lb);
    let curvature = Matrix2::new(
        rho1.dot(&dn_a) / la,
        rho1.dot(&dn_b) / lb,
        rho2.dot(&dn_a) / la,
        rho2.dot(&dn_b) / lb,
    );
    let torsion = RowVector2::new(rho2.dot(&drho1_a) / la, rho2.dot(&drho1_b) / lb);
    Ok(GeometricTensors { metric, curvature, torsion })
}

/// Angular velocity of the Gauss frame, in Gauss-frame coordinates, when the
/// chart point moves at `xi_dot` on a fixed body.
pub fn gauss_frame_rate<T: Real>(t: &GeometricTensors<T>, xi_dot: &Vector2<T>) -> Vector3<T> {
    let s = t.metric * xi_dot;
    let k = &t.curvature;
    Vector3::new(
        -(k[(1, 0)] * s.x + k[(1, 1)] * s.y),
        k[(0, 0)] * s.x + k[(0, 1)] * s.y,
        t.torsion[0] * s.x + t.torsion[1] * s.y,
    )
}

/// Result of sampling a chart for the orthogonality assumption.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartReport {
    pub max_orthogonality_violation: f64,
    pub min_tangent_norm: f64,
    pub passed: bool,
}

/// Samples a `grid_n x grid_n` interior grid checking `c_a · c_b = 0` and
/// nonvanishing tangents.
pub fn validate_chart<T: Real, C: SurfaceChart<T> + ?Sized>(chart: &C, grid_n: usize) -> ChartReport {
    let grid_n = grid_n.max(2);
    let b = chart.bounds();
    let mut worst = 0.0f64;
    let mut min_norm = f64::INFINITY;
    let denom = lit::<T>((grid_n + 1) as f64);
    for i in 0..grid_n {
        for j in 0..grid_n {
            let fa = lit::<T>((i + 1) as f64) / denom;
            let fb = lit::<T>((j + 1) as f64) / denom;
            let xi = Vector2::new(b.a_min + (b.a_max - b.a_min) * fa, b.b_min + (b.b_max - b.b_min) * fb);
            let (ca, cb) = chart.partials(&xi);
            let (la, lb) = (to_f64(ca.norm()), to_f64(cb.norm()));
            min_norm = min_norm.min(la).min(lb);
            let cos = if la > 0.0 && lb > 0.0 { to_f64(ca.dot(&cb)).abs() / (la * lb) } else { 0.0 };
            worst = worst.max(cos);
        }
    }
    ChartReport {
        max_orthogonality_violation: worst,
        min_tangent_norm: min_norm,
        passed: worst <= 1e-9 && min_norm > MIN_TANGENT_NORM,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use std::f64::consts::{FRAC_PI_2, PI};

    struct Skewed;

    impl SurfaceChart<f64> for Skewed {
        fn point(&self, xi: &Vector2<f64>) -> Vector3<f64> {
            Vector3::new(xi.x, xi.x + xi.y, 0.0)
        }
        fn partials(&self, _xi: &Vector2<f64>) -> (Vector3<f64>, Vector3<f64>) {
            (Vector3::new(1.0, 1.0, 0.0), Vector3::new(0.0, 1.0, 0.0))
        }
        fn second_partials(&self, _xi: &Vector2<f64>) -> (Vector3<f64>, Vector3<f64>, Vector3<f64>) {
            (Vector3::zeros(), Vector3::zeros(), Vector3::zeros())
        }
        fn tensor_partials(&self, _xi: &Vector2<f64>) -> [GeometricTensors<f64>; 2] {
            [GeometricTensors::zero(); 2]
        }
        fn bounds(&self) -> ChartBounds<f64> {
            ChartBounds { a_min: -1.0, a_max: 1.0, b_min: -1.0, b_max: 1.0 }
        }
    }

    fn unit_face() -> PlaneChart<f64> {
        PlaneChart::square(Vector3::new(0.1302, 0.0, 0.0), Vector3::y(), Vector3::z(), 0.1302)
    }

    #[test]
    fn hemisphere_frame_at_pole() {
        let h = HemisphereChart::new(0.06);
        let f = gauss_frame(&h, &Vector2::new(0.0, -FRAC_PI_2)).unwrap();
        assert_relative_eq!(f.column(0), Vector3::new(0.0, 1.0, 0.0), epsilon = 1e-15);
        assert_relative_eq!(f.column(2), Vector3::new(0.0, 0.0, 1.0), epsilon = 1e-15);
        let t = tensors(&h, &Vector2::new(0.0, -FRAC_PI_2)).unwrap();
        assert_relative_eq!(t.metric, Matrix2::new(0.06, 0.0, 0.0, 0.06), epsilon = 1e-15);
    }

    #[test]
    fn hemisphere_normal_is_outward() {
        let h = HemisphereChart::new(0.06);
        let mut rng = rand::rngs::StdRng::seed_from_u64(3);
        for _ in 0..100 {
            let xi = Vector2::new(rng.gen_range(-1.4..1.4), rng.gen_range(-3.0..-0.1));
            let f = gauss_frame(&h, &xi).unwrap();
            assert!(f.is_valid(1e-10));
            assert_relative_eq!(f.column(2), h.point(&xi) / 0.06, epsilon = 1e-12);
        }
    }

    #[test]
    fn plane_frame_and_tensors() {
        let p = unit_face();
        for xi in [Vector2::new(0.0, 0.0), Vector2::new(0.1, -0.05)] {
            let f = gauss_frame(&p, &xi).unwrap();
            assert_eq!(f.column(2), Vector3::x());
            let t = tensors(&p, &xi).unwrap();
            assert_eq!(t.metric, Matrix2::identity());
            assert_eq!(t.curvature, Matrix2::zeros());
            assert_eq!(t.torsion, RowVector2::zeros());
        }
    }

    #[test]
    fn out_of_chart_and_degenerate() {
        let h = HemisphereChart::new(0.06);
        assert!(matches!(gauss_frame(&h, &Vector2::new(0.0, 0.5)), Err(GraspError::OutOfChart { .. })));
        assert!(matches!(
            gauss_frame(&h, &Vector2::new(FRAC_PI_2, -1.0)),
            Err(GraspError::DegenerateChart { .. })
        ));
    }

    #[test]
    fn validation_reports() {
        assert!(validate_chart(&HemisphereChart::new(0.06), 25).passed);
        assert!(validate_chart(&unit_face(), 10).passed);
        let r = validate_chart(&Skewed, 5);
        assert!(!r.passed);
        assert!(r.max_orthogonality_violation > 0.5);
    }

    #[test]
    fn tensor_partials_match_finite_differences() {
        let h = HemisphereChart::new(0.06);
        let step = 1e-6;
        let mut rng = rand::rngs::StdRng::seed_from_u64(5);
        for _ in 0..100 {
            let xi = Vector2::new(rng.gen_range(-1.3..1.3), rng.gen_range(-3.0..-0.1));
            let d = h.tensor_partials(&xi);
            for (k, dk) in d.iter().enumerate() {
                let mut e = Vector2::zeros();
                e[k] = step;
                let tp = tensors(&h, &(xi + e)).unwrap();
                let tm = tensors(&h, &(xi - e)).unwrap();
                let fd_m = (tp.metric - tm.metric) / (2.0 * step);
                let fd_k = (tp.curvature - tm.curvature) / (2.0 * step);
                let fd_t = (tp.torsion - tm.torsion) / (2.0 * step);
                assert!((fd_m - dk.metric).amax() < 1e-6);
                assert!((fd_k - dk.curvature).amax() < 1e-4);
                assert!((fd_t - dk.torsion).amax() < 1e-3 * (1.0 + dk.torsion.amax()));
            }
        }
    }

    #[test]
    fn frame_rate_matches_finite_difference() {
        let h = HemisphereChart::new(0.06);
        let mut rng = rand::rngs::StdRng::seed_from_u64(9);
        for _ in 0..50 {
            let xi = Vector2::new(rng.gen_range(-1.2..1.2), rng.gen_range(-2.8..-0.3));
            let xi_dot = Vector2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let dt = 1e-6;
            let rp = gauss_frame(&h, &(xi + xi_dot * dt)).unwrap();
            let rm = gauss_frame(&h, &(xi - xi_dot * dt)).unwrap();
            let r = gauss_frame(&h, &xi).unwrap();
            let w = r.matrix().transpose() * (rp.matrix() - rm.matrix()) / (2.0 * dt);
            let fd = Vector3::new(w[(2, 1)], w[(0, 2)], w[(1, 0)]);
            let t = tensors(&h, &xi).unwrap();
            assert!((gauss_frame_rate(&t, &xi_dot) - fd).amax() < 1e-6);
        }
        let _ = PI;
    }
}
