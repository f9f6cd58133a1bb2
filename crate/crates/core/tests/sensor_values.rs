//! Reference values from tests/oracle/sensor_oracle.py (mpmath, 40 digits).

use approx::assert_relative_eq;
use mcm_plan::dynamics::{rollout, ControlSchedule, VehicleParams, VehicleState};
use mcm_plan::seabed::{Domain, RippleField};
use mcm_plan::sensor::{SensorParams, Target};
use std::f64::consts::{FRAC_PI_4, PI};

fn sonar() -> SensorParams<f64> {
    SensorParams::reference()
}

#[test]
fn transmission_loss() {
    assert_relative_eq!(sonar().transmission_loss(1000.0).unwrap(), 65.2, max_relative = 1e-14);
    assert_relative_eq!(sonar().transmission_loss(100.0).unwrap(), 40.52, max_relative = 1e-14);
    assert!(sonar().transmission_loss(0.0).is_err());
}

#[test]
fn detection_probability() {
    let s = sonar();
    assert_relative_eq!(
        s.detection_probability(1000.0),
        0.775_042_144_227_150_5,
        max_relative = 1e-13
    );
    assert_relative_eq!(s.detection_probability(0.0), 1.0, max_relative = 1e-15);
}

#[test]
fn seabed_band_edges() {
    let (inner, outer) = sonar().seabed_band();
    assert_relative_eq!(inner, 133.823_124_766_348_2, max_relative = 1e-13);
    assert_relative_eq!(outer, 326.997_109_521_993_4, max_relative = 1e-13);
    assert_relative_eq!(
        sonar().depression(133.84),
        -0.148_334_554_506_708_3,
        max_relative = 1e-13
    );
}

#[test]
fn gates() {
    let s = sonar();
    let half = s.alpha_fov / 2.0;
    assert_relative_eq!(s.horizontal_gate(0.0), 0.999_999_999_991_464_5, max_relative = 1e-14);
    assert_relative_eq!(s.horizontal_gate(half), 0.5, max_relative = 1e-14);
    assert_relative_eq!(s.horizontal_gate(PI), 1.821352904453394e-23, max_relative = 1e-6);
    assert_relative_eq!(
        s.vertical_gate(s.depression(200.0)),
        0.999_999_798_085_698_9,
        max_relative = 1e-13
    );
}

#[test]
fn gamma_rates() {
    let s = sonar();
    let origin = VehicleState::at(0.0, 0.0, 0.0);
    assert_relative_eq!(
        s.gamma_rate(&origin, &Target::new(200.0, 0.0)),
        19.944_119_175_099_438,
        max_relative = 1e-12
    );
    assert_eq!(s.gamma_rate(&origin, &Target::new(0.1, 0.0)), 0.0);
    assert_relative_eq!(
        s.gamma_rate(&origin, &Target::new(-200.0, 0.0)),
        3.632527938664204e-22,
        max_relative = 1e-6
    );
    let generic = VehicleState::at(3.0, -4.0, 0.7);
    assert_relative_eq!(
        s.gamma_rate(&generic, &Target::new(150.0, 90.0)),
        19.964_692_645_084_376,
        max_relative = 1e-12
    );
}

#[test]
fn nomoto_turn_rate() {
    let p = VehicleParams::reference();
    let s = ControlSchedule::constant(2.5, 0.1).unwrap();
    let t = rollout(&VehicleState::at(14.5, 15.0, 0.0), &s, 0.01, &p).unwrap();
    assert_relative_eq!(
        t.states.last().unwrap().r,
        0.496_631_026_500_457_26,
        max_relative = 1e-9
    );
}

#[test]
fn ripple_field_values() {
    let f = RippleField::reference(Domain::reference());
    assert_relative_eq!(f.ripple_gain(3.0 * FRAC_PI_4), 5.2734626104211e-54, max_relative = 1e-6);
    assert_relative_eq!(
        f.ripple_gain(FRAC_PI_4 + 0.0087),
        0.996_222_652_194_786_6,
        max_relative = 1e-13
    );
    assert_relative_eq!(f.soft_rect(15.0, 20.0), 1.0, max_relative = 1e-15);
    assert_eq!(f.soft_rect(0.0, 0.0), 0.0);
    assert_relative_eq!(f.soft_rect(5.0, 15.0), 0.5, max_relative = 1e-15);
}
