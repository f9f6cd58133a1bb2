//! Forward-looking sonar detection rate.
//!
//! The instantaneous detection rate of a target at `omega` seen from a
//! vehicle state is
//!
//! ```text
//! gamma = lambda * p * F_alpha * F_eps
//! p     = Phi((FOM - TL(range)) / sigma)
//! ```
//!
//! with `F_alpha` a soft horizontal field-of-view gate on the body-frame
//! bearing and `F_eps` a soft vertical gate on the depression angle
//! `atan(-h / range)` towards the seabed target.

use crate::dynamics::VehicleState;
use crate::error::{Error, Result};
use crate::scalar::{lit, logistic, normal_cdf, Real};
use serde::{Deserialize, Serialize};

/// Smallest range used in transmission loss and elevation, m.
pub const RANGE_FLOOR: f64 = 0.1;

/// Candidate mine position.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Target<T> {
    pub x: T,
    pub y: T,
}

impl<T: Real> Target<T> {
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }
}

/// How the vehicle-to-target distance is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum RangeMetric {
    #[default]
    Euclidean,
    /// `|dx| + |dy|`, the distance as literally printed in the source model.
    L1,
}

/// Transmission loss formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum LossForm {
    /// Spherical spreading plus absorption: `20 log10(r) + a r / 1000`.
    #[default]
    Standard,
    /// `20 log10(r + a r)` as literally printed in the source model.
    Literal,
}

/// Vehicle pose with cached heading trigonometry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose<T> {
    pub x: T,
    pub y: T,
    pub psi: T,
    pub cos_psi: T,
    pub sin_psi: T,
}

impl<T: Real> Pose<T> {
    pub fn from_state(state: &VehicleState<T>) -> Self {
        let (sin_psi, cos_psi) = state.psi.sin_cos();
        Self {
            x: state.x,
            y: state.y,
            psi: state.psi,
            cos_psi,
            sin_psi,
        }
    }
}

/// Anything that yields a nonnegative instantaneous detection rate.
///
/// [`SensorParams`] is the physical model; tests and calibration studies
/// plug in synthetic rates through the same interface.
pub trait DetectionModel<T: Real>: Sync {
    /// Detection rate, 1/s, for a vehicle at `pose` and a target.
    fn rate(&self, pose: &Pose<T>, target: &Target<T>) -> T;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensorParams<T> {
    /// Poisson scan rate lambda, 1/s.
    pub scan_rate: T,
    /// Figure of merit, dB.
    pub fom: T,
    /// Detection spread sigma, dB.
    pub sigma: T,
    /// Attenuation coefficient, dB/km.
    pub attenuation: T,
    /// Horizontal field of view, rad.
    pub alpha_fov: T,
    /// Horizontal gate slope, 1/rad.
    pub p_alpha: T,
    /// Vertical field of view, rad.
    pub eps_fov: T,
    /// Downward elevation of the vertical beam centre, rad.
    pub eps_de: T,
    /// Vertical gate slope, 1/rad.
    pub p_eps: T,
    /// Sensor altitude above the seabed, m.
    pub height: T,
    pub range_metric: RangeMetric,
    pub loss_form: LossForm,
}

impl<T: Real> SensorParams<T> {
    /// Reference sonar: lambda=20/s, FOM=72 dB, sigma=9, a=5.2 dB/km,
    /// 120 deg horizontal FOV with slope 25, 5 deg vertical FOV centred at
    /// -6 deg with slope 400, altitude 20 m.
    pub fn reference() -> Self {
        Self {
            scan_rate: lit(20.0),
            fom: lit(72.0),
            sigma: lit(9.0),
            attenuation: lit(5.2),
            alpha_fov: lit(120.0_f64.to_radians()),
            p_alpha: lit(25.0),
            eps_fov: lit(5.0_f64.to_radians()),
            eps_de: lit((-6.0_f64).to_radians()),
            p_eps: lit(400.0),
            height: lit(20.0),
            range_metric: RangeMetric::Euclidean,
            loss_form: LossForm::Standard,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("scan_rate", self.scan_rate),
            ("sigma", self.sigma),
            ("alpha_fov", self.alpha_fov),
            ("eps_fov", self.eps_fov),
            ("height", self.height),
            ("p_alpha", self.p_alpha),
            ("p_eps", self.p_eps),
        ];
        for (name, v) in positive {
            if !(v > T::zero() && v.is_finite()) {
                return Err(Error::invalid(name, format!("must be positive, got {v}")));
            }
        }
        if !(self.attenuation >= T::zero() && self.attenuation.is_finite()) {
            return Err(Error::invalid("attenuation", "must be nonnegative"));
        }
        if !self.fom.is_finite() || !self.eps_de.is_finite() {
            return Err(Error::invalid("fom/eps_de", "must be finite"));
        }
        Ok(())
    }

    /// Vehicle-to-target distance under the configured metric, before
    /// flooring.
    pub fn range(&self, x: T, y: T, target: &Target<T>) -> T {
        let dx = target.x - x;
        let dy = target.y - y;
        match self.range_metric {
            RangeMetric::Euclidean => dx.hypot(dy),
            RangeMetric::L1 => dx.abs() + dy.abs(),
        }
    }

    /// Transmission loss in dB at `range` metres.
    pub fn transmission_loss(&self, range: T) -> Result<T> {
        if !(range > T::zero()) {
            return Err(Error::Domain(format!(
                "transmission loss needs a positive range, got {range}"
            )));
        }
        Ok(self.loss_unchecked(range))
    }

    #[inline]
    fn loss_unchecked(&self, range: T) -> T {
        let twenty = lit::<T>(20.0);
        match self.loss_form {
            LossForm::Standard => twenty * range.log10() + self.attenuation * range / lit(1000.0),
            LossForm::Literal => twenty * (range * (T::one() + self.attenuation)).log10(),
        }
    }

    /// Single-look detection probability at (floored) `range`.
    #[inline]
    pub fn detection_probability(&self, range: T) -> T {
        let range = range.max(lit(RANGE_FLOOR));
        normal_cdf((self.fom - self.loss_unchecked(range)) / self.sigma)
    }

    pub fn detect_prob(&self, state: &VehicleState<T>, target: &Target<T>) -> T {
        self.detection_probability(self.range(state.x, state.y, target))
    }

    /// Horizontal gate as a function of body-frame bearing.
    #[inline]
    pub fn horizontal_gate(&self, bearing: T) -> T {
        let half = self.alpha_fov / lit(2.0);
        soft_band(bearing, -half, half, self.p_alpha)
    }

    pub fn f_alpha(&self, state: &VehicleState<T>, target: &Target<T>) -> T {
        self.horizontal_gate(bearing(state, target))
    }

    /// Depression angle `atan(-h / range)` at (floored) `range`.
    #[inline]
    pub fn depression(&self, range: T) -> T {
        (-self.height / range.max(lit(RANGE_FLOOR))).atan()
    }

    pub fn elevation(&self, state: &VehicleState<T>, target: &Target<T>) -> T {
        self.depression(self.range(state.x, state.y, target))
    }

    /// Vertical gate as a function of depression angle.
    #[inline]
    pub fn vertical_gate(&self, elevation: T) -> T {
        let half = self.eps_fov / lit(2.0);
        soft_band(elevation, self.eps_de - half, self.eps_de + half, self.p_eps)
    }

    pub fn f_eps(&self, state: &VehicleState<T>, target: &Target<T>) -> T {
        self.vertical_gate(self.elevation(state, target))
    }

    pub fn gamma_rate(&self, state: &VehicleState<T>, target: &Target<T>) -> T {
        self.rate(&Pose::from_state(state), target)
    }

    /// Ground ranges (m) where the vertical gate is at least one half,
    /// i.e. where the beam meets the seabed.
    pub fn seabed_band(&self) -> (T, T) {
        let half = self.eps_fov / lit(2.0);
        let steep = -(self.eps_de - half);
        let shallow = -(self.eps_de + half);
        (self.height / steep.tan(), self.height / shallow.tan())
    }
}

impl<T: Real> DetectionModel<T> for SensorParams<T> {
    #[inline]
    fn rate(&self, pose: &Pose<T>, target: &Target<T>) -> T {
        let dx = target.x - pose.x;
        let dy = target.y - pose.y;
        let range = match self.range_metric {
            RangeMetric::Euclidean => (dx * dx + dy * dy).sqrt(),
            RangeMetric::L1 => dx.abs() + dy.abs(),
        };
        let range = range.max(lit(RANGE_FLOOR));

        let fe = self.vertical_gate(self.depression(range));
        let forward = dx * pose.cos_psi + dy * pose.sin_psi;
        let left = -dx * pose.sin_psi + dy * pose.cos_psi;
        let fa = self.horizontal_gate(body_bearing(forward, left));
        let p = self.detection_probability(range);
        (self.scan_rate * p * fa * fe).max(T::zero())
    }
}

/// Two-sided soft band `logistic(p(v - lo)) + logistic(p(hi - v)) - 1`.
#[inline]
fn soft_band<T: Real>(v: T, lo: T, hi: T, slope: T) -> T {
    logistic(slope * (v - lo)) + logistic(slope * (hi - v)) - T::one()
}

#[inline]
fn body_bearing<T: Real>(forward: T, left: T) -> T {
    if forward == T::zero() && left == T::zero() {
        T::zero()
    } else {
        left.atan2(forward)
    }
}

/// Bearing of the target in the vehicle body frame, rad in `(-pi, pi]`.
///
/// Zero is dead ahead, positive angles are to port (counter-clockwise of
/// the heading). A target coincident with the vehicle has bearing zero.
pub fn bearing<T: Real>(state: &VehicleState<T>, target: &Target<T>) -> T {
    let pose = Pose::from_state(state);
    let dx = target.x - pose.x;
    let dy = target.y - pose.y;
    let forward = dx * pose.cos_psi + dy * pose.sin_psi;
    let left = -dx * pose.sin_psi + dy * pose.cos_psi;
    body_bearing(forward, left)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn sensor() -> SensorParams<f64> {
        SensorParams::reference()
    }

    fn origin(psi: f64) -> VehicleState<f64> {
        VehicleState::at(0.0, 0.0, psi)
    }

    #[test]
    fn transmission_loss_values() {
        let s = sensor();
        assert!((s.transmission_loss(1000.0).unwrap() - 65.2).abs() < 1e-12);
        assert!((s.transmission_loss(100.0).unwrap() - 40.52).abs() < 1e-12);
        let quiet = SensorParams { attenuation: 0.0, ..s };
        assert_eq!(quiet.transmission_loss(1.0).unwrap(), 0.0);
        assert!(matches!(s.transmission_loss(0.0), Err(Error::Domain(_))));
        assert!(s.transmission_loss(-3.0).is_err());
    }

    #[test]
    fn literal_loss_form() {
        let s = SensorParams {
            loss_form: LossForm::Literal,
            ..sensor()
        };
        let expect = 20.0 * (100.0_f64 * 6.2).log10();
        assert!((s.transmission_loss(100.0).unwrap() - expect).abs() < 1e-12);
    }

    #[test]
    fn detection_probability_values() {
        let s = sensor();
        let p = s.detect_prob(&origin(0.0), &Target::new(1000.0, 0.0));
        assert!((p - 0.775_042_144_227_150_5).abs() < 1e-12);
        assert!((s.detection_probability(0.0) - 1.0).abs() < 1e-6);
        // FOM equal to the loss
        let tl = s.transmission_loss(250.0).unwrap();
        let s2 = SensorParams { fom: tl, ..s };
        assert!((s2.detection_probability(250.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn bearing_convention() {
        assert_eq!(bearing(&origin(0.0), &Target::new(1.0, 0.0)), 0.0);
        assert!((bearing(&origin(0.0), &Target::new(0.0, 1.0)) - FRAC_PI_2).abs() < 1e-15);
        assert!((bearing(&origin(0.0), &Target::new(0.0, -1.0)) + FRAC_PI_2).abs() < 1e-15);
        assert!(bearing(&origin(FRAC_PI_2), &Target::new(0.0, 1.0)).abs() < 1e-15);
        assert_eq!(bearing(&origin(0.0), &Target::new(-1.0, 0.0)), PI);
        assert_eq!(bearing(&origin(0.3), &Target::new(0.0, 0.0)), 0.0);
    }

    #[test]
    fn horizontal_gate_values() {
        let s = sensor();
        assert!((s.horizontal_gate(0.0) - 1.0).abs() < 1e-9);
        assert!((s.horizontal_gate(s.alpha_fov / 2.0) - 0.5).abs() < 1e-12);
        assert!(s.horizontal_gate(PI).abs() < 1e-9);
        assert!((s.horizontal_gate(0.4) - s.horizontal_gate(-0.4)).abs() < 1e-15);
    }

    #[test]
    fn elevation_values() {
        let s = sensor();
        let v = s.elevation(&origin(0.0), &Target::new(20.0, 0.0));
        assert!((v + FRAC_PI_4).abs() < 1e-15);
        let v = s.elevation(&origin(0.0), &Target::new(133.84, 0.0));
        assert!((v + 0.148_334_554_506_708_3).abs() < 1e-12);
        let far = s.elevation(&origin(0.0), &Target::new(1e9, 0.0));
        assert!(far < 0.0 && far > -1e-7);
    }

    #[test]
    fn vertical_gate_values() {
        let s = sensor();
        assert!((s.vertical_gate(s.eps_de) - 1.0).abs() < 1e-6);
        assert!((s.vertical_gate(s.eps_de + s.eps_fov / 2.0) - 0.5).abs() < 1e-6);
        assert!((s.vertical_gate(s.eps_de - s.eps_fov / 2.0) - 0.5).abs() < 1e-6);
        let fe = s.f_eps(&origin(0.0), &Target::new(200.0, 0.0));
        assert!((fe - 0.999_999_798_085_698_9).abs() < 1e-12);
        assert!(fe >= 0.9);
        let (near, far) = s.seabed_band();
        assert!((near - 133.823_124_766_348_2).abs() < 1e-9);
        assert!((far - 326.997_109_521_993_4).abs() < 1e-9);
    }

    #[test]
    fn gamma_values() {
        let s = sensor();
        let g = s.gamma_rate(&origin(0.0), &Target::new(200.0, 0.0));
        assert!((g - 19.944_119_175_099_44).abs() < 1e-9);
        assert!(s.gamma_rate(&origin(0.0), &Target::new(-200.0, 0.0)) < 1e-20);
        assert_eq!(s.gamma_rate(&origin(0.0), &Target::new(0.1, 0.0)), 0.0);
        let g = s.gamma_rate(&VehicleState::at(3.0, -4.0, 0.7), &Target::new(150.0, 90.0));
        assert!((g - 19.964_692_645_084_38).abs() < 1e-9);
    }

    #[test]
    fn single_precision_tracks_double() {
        let s64 = sensor();
        let s32 = SensorParams::<f32>::reference();
        for &(x, y) in &[(200.0, 10.0), (150.0, -60.0), (300.0, 40.0)] {
            let g64 = s64.gamma_rate(&origin(0.1), &Target::new(x, y));
            let g32 = s32.gamma_rate(&VehicleState::at(0.0, 0.0, 0.1), &Target::new(x as f32, y as f32));
            assert!((g64 - g32 as f64).abs() < 1e-3, "{g64} vs {g32}");
        }
    }

    #[test]
    fn validation_rejects_bad_params() {
        assert!(sensor().validate().is_ok());
        assert!(SensorParams { sigma: 0.0, ..sensor() }.validate().is_err());
        assert!(SensorParams {
            attenuation: -1.0,
            ..sensor()
        }
        .validate()
        .is_err());
        assert!(SensorParams {
            height: f64::NAN,
            ..sensor()
        }
        .validate()
        .is_err());
    }

    #[test]
    fn l1_metric_is_taxicab() {
        let s = SensorParams {
            range_metric: RangeMetric::L1,
            ..sensor()
        };
        assert_eq!(s.range(0.0, 0.0, &Target::new(3.0, -4.0)), 7.0);
    }
}
