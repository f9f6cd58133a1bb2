//! Scalar abstraction shared by every numeric module.

use num_traits::{Float, FloatConst, FromPrimitive};
use std::fmt::{Debug, Display};

/// Floating point scalar the planner is generic over (`f32` or `f64`).
pub trait Real: Float + FloatConst + FromPrimitive + Debug + Display + Default + Send + Sync + 'static {}

impl Real for f32 {}
impl Real for f64 {}

/// Converts an `f64` literal into the working scalar.
#[inline]
pub fn lit<T: Real>(v: f64) -> T {
    T::from_f64(v).expect("f64 literal representable in scalar type")
}

/// Standard normal cumulative distribution function.
#[inline]
pub fn normal_cdf<T: Real>(z: T) -> T {
    let z = z.to_f64().unwrap_or(f64::NAN);
    lit(0.5 * libm::erfc(-z * std::f64::consts::FRAC_1_SQRT_2))
}

/// Logistic sigmoid `1 / (1 + e^{-z})`, evaluated without overflow.
#[inline]
pub fn logistic<T: Real>(z: T) -> T {
    if z >= T::zero() {
        T::one() / (T::one() + (-z).exp())
    } else {
        let e = z.exp();
        e / (T::one() + e)
    }
}

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_angle<T: Real>(a: T) -> T {
    let pi = T::PI();
    let two_pi = pi + pi;
    let mut w = a - two_pi * ((a + pi) / two_pi).floor();
    // floor maps exactly -pi onto itself; the half-open interval wants +pi
    if w <= -pi {
        w = w + two_pi;
    }
    if w > pi {
        w = w - two_pi;
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn wrap_angle_half_open() {
        assert_eq!(wrap_angle(PI), PI);
        assert_eq!(wrap_angle(-PI), PI);
        assert!((wrap_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-12);
        assert!((wrap_angle(-7.0 * PI / 4.0) - PI / 4.0).abs() < 1e-12);
        assert_eq!(wrap_angle(0.3_f64), 0.3);
    }

    #[test]
    fn logistic_is_stable_in_tails() {
        assert_eq!(logistic(1e4_f64), 1.0);
        assert_eq!(logistic(-1e4_f64), 0.0);
        assert_eq!(logistic(0.0_f64), 0.5);
        assert!((logistic(2.0_f64) + logistic(-2.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn normal_cdf_reference_points() {
        assert_eq!(normal_cdf(0.0_f64), 0.5);
        assert!((normal_cdf(1.959963984540054_f64) - 0.975).abs() < 1e-12);
        assert!((normal_cdf(-3.0_f32) - 0.001_349_898).abs() < 1e-6);
    }
}
