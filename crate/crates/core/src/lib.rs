//! Minimum-time mine-countermeasure search planning.
//!
//! Vehicles follow a Nomoto steering model and carry a forward-looking
//! sonar. The planner chooses rudder schedules that minimise the mission
//! time while the Monte Carlo estimate of the residual risk (probability
//! that a uniformly placed mine is never detected) stays below a threshold.
//! An optional sand-ripple field makes part of the area detectable only
//! when the vehicle crosses the ripples at right angles.
//!
//! Numeric code is generic over [`Real`]; the aliases at the crate root fix
//! the scalar to `f64`, and [`single`] offers the `f32` versions.

// `!(x > 0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod dynamics;
pub mod error;
pub mod optimizer;
pub mod output;
pub mod qn;
pub mod risk;
pub mod scalar;
pub mod scenario;
pub mod seabed;
pub mod sensor;

pub use error::{Error, Result};
pub use scalar::Real;

pub type VehicleState = dynamics::VehicleState<f64>;
pub type VehicleParams = dynamics::VehicleParams<f64>;
pub type ControlSchedule = dynamics::ControlSchedule<f64>;
pub type Trajectory = dynamics::Trajectory<f64>;
pub type SensorParams = sensor::SensorParams<f64>;
pub type Target = sensor::Target<f64>;
pub type Domain = seabed::Domain<f64>;
pub type RippleField = seabed::RippleField<f64>;
pub type TargetSample = risk::TargetSample<f64>;
pub type RiskReport = risk::RiskReport<f64>;
pub type CoverageGrid = risk::CoverageGrid<f64>;

/// Single-precision aliases.
pub mod single {
    pub type VehicleState = crate::dynamics::VehicleState<f32>;
    pub type VehicleParams = crate::dynamics::VehicleParams<f32>;
    pub type ControlSchedule = crate::dynamics::ControlSchedule<f32>;
    pub type Trajectory = crate::dynamics::Trajectory<f32>;
    pub type SensorParams = crate::sensor::SensorParams<f32>;
    pub type Target = crate::sensor::Target<f32>;
    pub type Domain = crate::seabed::Domain<f32>;
    pub type RippleField = crate::seabed::RippleField<f32>;
}
