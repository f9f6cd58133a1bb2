//! Constant-speed Nomoto steering model.
//!
//! The vehicle state is `(x, y, psi, r)`: planar position, heading measured
//! from the +x axis and turn rate. Motion follows
//!
//! ```text
//! x' = V cos(psi)
//! y' = V sin(psi)
//! psi' = r
//! r' = (K p(t) - r) / T
//! ```
//!
//! where `p(t)` is the rudder deflection given by a [`ControlSchedule`].

use crate::error::{Error, Result};
use crate::scalar::{lit, wrap_angle, Real};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct VehicleState<T> {
    pub x: T,
    pub y: T,
    /// Heading, rad.
    pub psi: T,
    /// Turn rate, rad/s.
    pub r: T,
}

impl<T: Real> VehicleState<T> {
    pub fn new(x: T, y: T, psi: T, r: T) -> Self {
        Self { x, y, psi, r }
    }

    /// Pose at rest (zero turn rate).
    pub fn at(x: T, y: T, psi: T) -> Self {
        Self::new(x, y, psi, T::zero())
    }

    fn axpy(&self, h: T, d: &StateRate<T>) -> Self {
        Self {
            x: self.x + h * d.x,
            y: self.y + h * d.y,
            psi: self.psi + h * d.psi,
            r: self.r + h * d.r,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.psi.is_finite() && self.r.is_finite()
    }
}

/// Time derivative of a [`VehicleState`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateRate<T> {
    pub x: T,
    pub y: T,
    pub psi: T,
    pub r: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VehicleParams<T> {
    /// Forward speed, m/s.
    pub speed: T,
    /// Nomoto gain K, 1/s.
    pub nomoto_k: T,
    /// Nomoto time constant T, s.
    pub nomoto_t: T,
    /// Maximum absolute rudder deflection, rad.
    pub rudder_limit: T,
}

impl<T: Real> VehicleParams<T> {
    /// Table values used throughout the reference experiments: V=2.5 m/s,
    /// K=5 1/s, T=0.5 s, rudder limited to 30 degrees.
    pub fn reference() -> Self {
        Self {
            speed: lit(2.5),
            nomoto_k: lit(5.0),
            nomoto_t: lit(0.5),
            rudder_limit: lit(30.0_f64.to_radians()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.speed > T::zero() && self.speed.is_finite()) {
            return Err(Error::invalid("speed", "must be positive"));
        }
        if !(self.nomoto_t > T::zero() && self.nomoto_t.is_finite()) {
            return Err(Error::invalid("nomoto_t", "must be positive"));
        }
        if !self.nomoto_k.is_finite() {
            return Err(Error::invalid("nomoto_k", "must be finite"));
        }
        if !(self.rudder_limit > T::zero() && self.rudder_limit.is_finite()) {
            return Err(Error::invalid("rudder_limit", "must be positive"));
        }
        Ok(())
    }
}

/// Piecewise-linear rudder schedule over `[0, T_f]`.
///
/// Outside the knot span the schedule holds its end values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlSchedule<T> {
    knot_times: Vec<T>,
    rudder_values: Vec<T>,
}

impl<T: Real> ControlSchedule<T> {
    pub fn new(knot_times: Vec<T>, rudder_values: Vec<T>) -> Result<Self> {
        if knot_times.is_empty() {
            return Err(Error::EmptySchedule);
        }
        if knot_times.len() != rudder_values.len() {
            return Err(Error::invalid(
                "rudder_values",
                format!("{} values for {} knots", rudder_values.len(), knot_times.len()),
            ));
        }
        if knot_times[0] != T::zero() {
            return Err(Error::invalid("knot_times", "first knot must be at t=0"));
        }
        if knot_times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("knot_times", "must be strictly increasing"));
        }
        if knot_times.iter().chain(&rudder_values).any(|v| !v.is_finite()) {
            return Err(Error::invalid("rudder_values", "must be finite"));
        }
        Ok(Self {
            knot_times,
            rudder_values,
        })
    }

    /// `n` uniformly spaced knots spanning `[0, t_final]`.
    pub fn uniform_knots(t_final: T, n: usize) -> Vec<T> {
        if n == 1 {
            return vec![T::zero()];
        }
        let last = T::from_usize(n - 1).unwrap();
        (0..n)
            .map(|i| {
                if i == n - 1 {
                    t_final
                } else {
                    t_final * T::from_usize(i).unwrap() / last
                }
            })
            .collect()
    }

    pub fn uniform(t_final: T, rudder_values: Vec<T>) -> Result<Self> {
        if rudder_values.is_empty() {
            return Err(Error::EmptySchedule);
        }
        if rudder_values.len() > 1 && !(t_final > T::zero()) {
            return Err(Error::invalid("t_final", "must be positive for multi-knot schedules"));
        }
        Self::new(Self::uniform_knots(t_final, rudder_values.len()), rudder_values)
    }

    /// Constant rudder over `[0, t_final]`.
    pub fn constant(t_final: T, rudder: T) -> Result<Self> {
        if t_final > T::zero() {
            Self::new(vec![T::zero(), t_final], vec![rudder, rudder])
        } else {
            Self::new(vec![T::zero()], vec![rudder])
        }
    }

    pub fn knot_times(&self) -> &[T] {
        &self.knot_times
    }

    pub fn rudder_values(&self) -> &[T] {
        &self.rudder_values
    }

    pub fn final_time(&self) -> T {
        *self.knot_times.last().unwrap()
    }

    pub fn len(&self) -> usize {
        self.knot_times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.knot_times.is_empty()
    }

    /// Largest absolute rudder value.
    pub fn max_abs(&self) -> T {
        self.rudder_values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// Rudder deflection at time `t` by linear interpolation.
    pub fn sample(&self, t: T) -> T {
        let ts = &self.knot_times;
        let vs = &self.rudder_values;
        if t <= ts[0] {
            return vs[0];
        }
        let last = ts.len() - 1;
        if t >= ts[last] {
            return vs[last];
        }
        // first knot strictly greater than t
        let hi = ts.partition_point(|&k| k <= t);
        let lo = hi - 1;
        let w = (t - ts[lo]) / (ts[hi] - ts[lo]);
        vs[lo] + w * (vs[hi] - vs[lo])
    }

    /// Same knot values on knot times scaled to span `[0, t_final]`.
    pub fn rescaled(&self, t_final: T) -> Result<Self> {
        let old = self.final_time();
        if self.len() == 1 {
            return Ok(self.clone());
        }
        let times = self
            .knot_times
            .iter()
            .enumerate()
            .map(|(i, &k)| {
                if i == self.len() - 1 {
                    t_final
                } else {
                    k / old * t_final
                }
            })
            .collect();
        Self::new(times, self.rudder_values.clone())
    }

    /// Samples this schedule on `n` uniform knots over `[0, t_final]`;
    /// beyond the current final time the rudder is zero.
    pub fn resampled(&self, t_final: T, n: usize) -> Result<Self> {
        let end = self.final_time();
        let values = Self::uniform_knots(t_final, n)
            .into_iter()
            .map(|t| if t > end { T::zero() } else { self.sample(t) })
            .collect();
        Self::uniform(t_final, values)
    }

    /// Keeps the schedule unchanged on `[0, T_f]` and appends a ramp to
    /// zero rudder at `t_final`. The rolled-out prefix is bit-identical.
    pub fn extended_with_zero(&self, t_final: T) -> Result<Self> {
        if !(t_final > self.final_time()) {
            return Ok(self.clone());
        }
        let mut times = self.knot_times.clone();
        let mut values = self.rudder_values.clone();
        times.push(t_final);
        values.push(T::zero());
        Self::new(times, values)
    }

    /// Copy with every value clamped to `[-limit, limit]`.
    pub fn clamped(&self, limit: T) -> Self {
        Self {
            knot_times: self.knot_times.clone(),
            rudder_values: self.rudder_values.iter().map(|v| v.max(-limit).min(limit)).collect(),
        }
    }

    pub fn with_values(&self, values: Vec<T>) -> Result<Self> {
        Self::new(self.knot_times.clone(), values)
    }
}

/// Discretized vehicle path sampled on a fixed time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    /// Nominal step; the final step may be shorter.
    pub dt: T,
    pub times: Vec<T>,
    pub states: Vec<VehicleState<T>>,
    /// Rudder deflection at each sample, rad.
    pub controls: Vec<T>,
}

impl<T: Real> Trajectory<T> {
    pub fn mission_time(&self) -> T {
        *self.times.last().unwrap_or(&T::zero())
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

pub fn state_derivative<T: Real>(state: &VehicleState<T>, rudder: T, params: &VehicleParams<T>) -> StateRate<T> {
    let (s, c) = state.psi.sin_cos();
    StateRate {
        x: params.speed * c,
        y: params.speed * s,
        psi: state.r,
        r: (params.nomoto_k * rudder - state.r) / params.nomoto_t,
    }
}

/// One classical fourth-order Runge-Kutta step from `t` to `t + dt`.
///
/// Heading is left unwrapped; [`rollout`] normalizes it on output.
pub fn rk4_step<T: Real>(
    state: &VehicleState<T>,
    schedule: &ControlSchedule<T>,
    t: T,
    dt: T,
    params: &VehicleParams<T>,
) -> VehicleState<T> {
    let half = dt / lit(2.0);
    let u0 = schedule.sample(t);
    let um = schedule.sample(t + half);
    let u1 = schedule.sample(t + dt);

    let k1 = state_derivative(state, u0, params);
    let k2 = state_derivative(&state.axpy(half, &k1), um, params);
    let k3 = state_derivative(&state.axpy(half, &k2), um, params);
    let k4 = state_derivative(&state.axpy(dt, &k3), u1, params);

    let sixth = dt / lit(6.0);
    let two = lit::<T>(2.0);
    VehicleState {
        x: state.x + sixth * (k1.x + two * k2.x + two * k3.x + k4.x),
        y: state.y + sixth * (k1.y + two * k2.y + two * k3.y + k4.y),
        psi: state.psi + sixth * (k1.psi + two * k2.psi + two * k3.psi + k4.psi),
        r: state.r + sixth * (k1.r + two * k2.r + two * k3.r + k4.r),
    }
}

/// Integrates the schedule over `[0, T_f]` with fixed step `dt`.
///
/// Samples sit at `0, dt, 2dt, ...`; the last step is shortened so the
/// trajectory ends exactly at `T_f`. A zero-length schedule yields the
/// single initial sample.
pub fn rollout<T: Real>(
    initial: &VehicleState<T>,
    schedule: &ControlSchedule<T>,
    dt: T,
    params: &VehicleParams<T>,
) -> Result<Trajectory<T>> {
    if schedule.is_empty() {
        return Err(Error::EmptySchedule);
    }
    if !(dt > T::zero() && dt.is_finite()) {
        return Err(Error::invalid("dt", "must be positive"));
    }
    let t_final = schedule.final_time();
    let ratio = t_final / dt;
    // tolerate dt that divides T_f up to rounding
    let mut steps = ratio.round();
    if (ratio - steps).abs() > lit::<T>(1e-9) * ratio.max(T::one()) {
        steps = ratio.ceil();
    }
    let steps = steps.to_usize().unwrap_or(0);

    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    let mut controls = Vec::with_capacity(steps + 1);

    let mut state = VehicleState {
        psi: wrap_angle(initial.psi),
        ..*initial
    };
    let mut t = T::zero();
    times.push(t);
    states.push(state);
    controls.push(schedule.sample(t));
    for k in 1..=steps {
        let t_next = if k == steps {
            t_final
        } else {
            dt * T::from_usize(k).unwrap()
        };
        let mut next = rk4_step(&state, schedule, t, t_next - t, params);
        next.psi = wrap_angle(next.psi);
        state = next;
        t = t_next;
        times.push(t);
        states.push(state);
        controls.push(schedule.sample(t));
    }
    Ok(Trajectory {
        dt,
        times,
        states,
        controls,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn params() -> VehicleParams<f64> {
        VehicleParams::reference()
    }

    #[test]
    fn derivative_straight_ahead() {
        let d = state_derivative(&VehicleState::at(0.0, 0.0, 0.0), 0.0, &params());
        assert_eq!((d.x, d.y, d.psi, d.r), (2.5, 0.0, 0.0, 0.0));
    }

    #[test]
    fn derivative_substitution() {
        let d = state_derivative(&VehicleState::new(0.0, 0.0, FRAC_PI_2, 0.1), 0.0, &params());
        assert!(d.x.abs() < 1e-15);
        assert_eq!(d.y, 2.5);
        assert_eq!(d.psi, 0.1);
        assert!((d.r + 0.2).abs() < 1e-15);
    }

    #[test]
    fn derivative_turn_rate_equilibrium() {
        let p = params();
        let d = state_derivative(&VehicleState::new(1.0, 2.0, 0.3, 5.0 * 0.07), 0.07, &p);
        assert!(d.r.abs() < 1e-15);
    }

    #[test]
    fn straight_rollout_is_exact() {
        let sched = ControlSchedule::constant(8.0, 0.0).unwrap();
        let traj = rollout(&VehicleState::at(14.5, 15.0, 0.0), &sched, 0.1, &params()).unwrap();
        assert_eq!(traj.len(), 81);
        let last = traj.states.last().unwrap();
        assert!((last.x - 34.5).abs() < 1e-12);
        assert_eq!(last.y, 15.0);
        for (k, s) in traj.states.iter().enumerate() {
            assert!((s.x - 14.5 - 0.25 * k as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_rudder_matches_closed_form() {
        let p = params();
        let sched = ControlSchedule::constant(2.5, 0.1).unwrap();
        let traj = rollout(&VehicleState::at(0.0, 0.0, 0.0), &sched, 0.01, &p).unwrap();
        // mpmath: K p (1 - e^{-t/T}) at t = 2.5
        let r_end = traj.states.last().unwrap().r;
        assert!((r_end - 0.496_631_026_500_457_3).abs() < 1e-6);
        for (t, s) in traj.times.iter().zip(&traj.states) {
            let exact = 0.5 * (1.0 - (-t / 0.5).exp());
            assert!((s.r - exact).abs() < 1e-6);
        }
    }

    #[test]
    fn negated_schedule_mirrors_path() {
        let p = params();
        let a = ControlSchedule::new(vec![0.0, 5.0, 10.0], vec![0.1, -0.05, 0.2]).unwrap();
        let b = a.with_values(vec![-0.1, 0.05, -0.2]).unwrap();
        let start = VehicleState::at(3.0, -1.0, 0.0);
        let ta = rollout(&start, &a, 0.05, &p).unwrap();
        let tb = rollout(&start, &b, 0.05, &p).unwrap();
        for (sa, sb) in ta.states.iter().zip(&tb.states) {
            assert!((sa.x - sb.x).abs() < 1e-9);
            assert!(((sa.y + 1.0) + (sb.y + 1.0)).abs() < 1e-9);
            assert!((wrap_angle(sa.psi + sb.psi)).abs() < 1e-9);
            assert!((sa.r + sb.r).abs() < 1e-12);
        }
    }

    #[test]
    fn partial_last_step_ends_on_final_time() {
        let sched = ControlSchedule::constant(1.05, 0.0).unwrap();
        let traj = rollout(&VehicleState::at(0.0, 0.0, 0.0), &sched, 0.1, &params()).unwrap();
        assert_eq!(*traj.times.last().unwrap(), 1.05);
        assert_eq!(traj.len(), 12);
        assert!((traj.states.last().unwrap().x - 2.625).abs() < 1e-12);
    }

    #[test]
    fn zero_length_rollout_has_single_sample() {
        let sched = ControlSchedule::constant(0.0, 0.0).unwrap();
        let traj = rollout(&VehicleState::at(1.0, 2.0, 0.5), &sched, 0.1, &params()).unwrap();
        assert_eq!(traj.len(), 1);
        assert_eq!(traj.mission_time(), 0.0);
    }

    #[test]
    fn schedule_validation() {
        assert!(matches!(
            ControlSchedule::<f64>::new(vec![], vec![]),
            Err(Error::EmptySchedule)
        ));
        assert!(ControlSchedule::new(vec![0.0, 1.0, 1.0], vec![0.0; 3]).is_err());
        assert!(ControlSchedule::new(vec![0.5, 1.0], vec![0.0; 2]).is_err());
        assert!(ControlSchedule::new(vec![0.0, 1.0], vec![0.0]).is_err());
        assert!(rollout(
            &VehicleState::at(0.0, 0.0, 0.0),
            &ControlSchedule::constant(1.0, 0.0).unwrap(),
            0.0,
            &params()
        )
        .is_err());
    }

    #[test]
    fn schedule_interpolation_and_warm_starts() {
        let s = ControlSchedule::uniform(10.0_f64, vec![0.0, 0.2, -0.2]).unwrap();
        assert_eq!(s.knot_times(), &[0.0, 5.0, 10.0]);
        assert!((s.sample(2.5) - 0.1).abs() < 1e-15);
        assert_eq!(s.sample(-1.0), 0.0);
        assert_eq!(s.sample(11.0), -0.2);
        let r = s.rescaled(20.0).unwrap();
        assert_eq!(r.knot_times(), &[0.0, 10.0, 20.0]);
        assert_eq!(r.rudder_values(), s.rudder_values());
        let e = s.resampled(20.0, 5).unwrap();
        assert_eq!(e.rudder_values(), &[0.0, 0.2, -0.2, 0.0, 0.0]);
        let z = s.extended_with_zero(12.0).unwrap();
        assert_eq!(z.len(), 4);
        assert_eq!(z.sample(12.0), 0.0);
        assert_eq!(z.sample(7.5), s.sample(7.5));
    }

    #[test]
    fn heading_is_wrapped() {
        let p = params();
        let sched = ControlSchedule::constant(20.0, p.rudder_limit).unwrap();
        let traj = rollout(&VehicleState::at(0.0, 0.0, 0.0), &sched, 0.05, &p).unwrap();
        assert!(traj.states.iter().all(|s| s.psi > -PI && s.psi <= PI));
    }
}
