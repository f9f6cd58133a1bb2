//! Minimum mission time subject to a residual-risk ceiling.
//!
//! The problem `min T  s.t.  risk(T, controls) <= rho` is split in two:
//!
//! * [`inner_minimize_risk`] fixes `T` and lowers the risk estimate over
//!   the stacked rudder knot values of every vehicle, on a fixed target
//!   sample so the objective is a deterministic function of the controls.
//! * [`outer_min_time`] bisects on `T`, relying on the fact that more time
//!   can never hurt: the best reachable risk is nonincreasing in `T`.

use crate::dynamics::{rollout, ControlSchedule, Trajectory, VehicleParams, VehicleState};
use crate::error::{Error, Result};
use crate::qn::{self, QnOptions, QnStatus};
use crate::risk::{pairwise_sum, report_from_exposures, ExposureKernel, RiskReport, TargetSample};
use crate::scalar::{lit, Real};
use crate::seabed::{Domain, RippleField};
use crate::sensor::DetectionModel;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::time::Instant;

/// How the dynamics time step follows the mission time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum TimeStep<T> {
    /// Same step whatever the mission time; the last step is shortened.
    Fixed(T),
    /// `T_f / n`.
    Divisions(usize),
}

impl<T: Real> TimeStep<T> {
    pub fn dt(&self, t_final: T) -> T {
        match *self {
            TimeStep::Fixed(dt) => dt,
            TimeStep::Divisions(n) => {
                if t_final > T::zero() {
                    t_final / T::from_usize(n.max(1)).unwrap()
                } else {
                    T::one()
                }
            }
        }
    }
}

impl<T: Real> Default for TimeStep<T> {
    fn default() -> Self {
        TimeStep::Divisions(1000)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Vehicle<T> {
    pub start: VehicleState<T>,
    pub params: VehicleParams<T>,
}

/// Everything the optimizer needs to turn rudder schedules into a risk.
#[derive(Debug, Clone)]
pub struct Mission<T, S> {
    pub domain: Domain<T>,
    pub vehicles: Vec<Vehicle<T>>,
    /// One detection model per vehicle.
    pub sensors: Vec<S>,
    pub field: Option<RippleField<T>>,
    pub time_step: TimeStep<T>,
    /// Weight of the soft penalty on the mean squared distance outside the
    /// domain, per vehicle. `None` leaves vehicles unconstrained.
    pub confinement: Option<T>,
}

impl<T: Real, S: DetectionModel<T>> Mission<T, S> {
    pub fn validate(&self) -> Result<()> {
        self.domain.validate()?;
        if self.vehicles.is_empty() {
            return Err(Error::invalid("vehicles", "at least one vehicle required"));
        }
        if self.sensors.len() != self.vehicles.len() {
            return Err(Error::invalid("sensors", "one sensor per vehicle required"));
        }
        for v in &self.vehicles {
            v.params.validate()?;
        }
        if let Some(f) = &self.field {
            f.validate()?;
        }
        if let TimeStep::Fixed(dt) = self.time_step {
            if !(dt > T::zero()) {
                return Err(Error::invalid("dt", "must be positive"));
            }
        }
        Ok(())
    }

    pub fn rollouts(&self, schedules: &[ControlSchedule<T>]) -> Result<Vec<Trajectory<T>>> {
        if schedules.len() != self.vehicles.len() {
            return Err(Error::invalid(
                "schedules",
                format!("{} schedules for {} vehicles", schedules.len(), self.vehicles.len()),
            ));
        }
        let t_final = schedules[0].final_time();
        if schedules.iter().any(|s| s.final_time() != t_final) {
            return Err(Error::GridMismatch("schedules end at different times".into()));
        }
        let dt = self.time_step.dt(t_final);
        self.vehicles
            .iter()
            .zip(schedules)
            .map(|(v, s)| rollout(&v.start, s, dt, &v.params))
            .collect()
    }

    pub fn evaluate(&self, schedules: &[ControlSchedule<T>], sample: &TargetSample<T>) -> Result<RiskReport<T>> {
        let trajectories = self.rollouts(schedules)?;
        let kernel = ExposureKernel::new(&trajectories, &self.sensors, self.field.as_ref())?;
        let exposures = kernel.exposures(&sample.targets);
        Ok(report_from_exposures(&exposures, kernel.mission_time()))
    }

    /// Risk estimate plus the optional confinement penalty.
    pub fn objective(&self, schedules: &[ControlSchedule<T>], sample: &TargetSample<T>) -> Result<T> {
        let trajectories = self.rollouts(schedules)?;
        let kernel = ExposureKernel::new(&trajectories, &self.sensors, self.field.as_ref())?;
        Ok(mean_survival(&kernel.exposures(&sample.targets)) + self.penalty(&trajectories))
    }

    fn penalty(&self, trajectories: &[Trajectory<T>]) -> T {
        let Some(weight) = self.confinement else {
            return T::zero();
        };
        let per_vehicle: Vec<T> = trajectories
            .iter()
            .map(|tr| {
                let d2: Vec<T> = tr
                    .states
                    .iter()
                    .map(|s| {
                        let d = self.domain.outside_distance(s.x, s.y);
                        d * d
                    })
                    .collect();
                pairwise_sum(&d2) / T::from_usize(d2.len()).unwrap()
            })
            .collect();
        weight * pairwise_sum(&per_vehicle)
    }

    /// Forward-difference gradient of [`Self::objective`] over the stacked
    /// knot values `x` (shaped like `templates`), with `fx` the objective
    /// at `x`.
    ///
    /// Bit-identical to [`qn::fd_gradient`] on the objective, but a probe of
    /// knot `j` only re-integrates exposure from knot `j - 1` on, resuming
    /// from cached running sums; earlier samples cannot change.
    pub fn objective_gradient(
        &self,
        templates: &[ControlSchedule<T>],
        sample: &TargetSample<T>,
        x: &[T],
        fx: T,
        step: T,
        (lower, upper): (&[T], &[T]),
    ) -> Result<Vec<T>> {
        let base = unstack(templates, x)?;
        let trajectories = self.rollouts(&base)?;
        let kernel = ExposureKernel::new(&trajectories, &self.sensors, self.field.as_ref())?;
        let vehicles = trajectories.len();
        let n = kernel.samples();
        let running: Vec<Vec<Vec<T>>> = sample
            .targets
            .par_iter()
            .map(|t| {
                let tw = kernel.target_weights(t);
                (0..vehicles).map(|v| kernel.running_exposure(v, t, tw)).collect()
            })
            .collect();
        let owner: Vec<(usize, usize)> = templates
            .iter()
            .enumerate()
            .flat_map(|(v, s)| (0..s.len()).map(move |j| (v, j)))
            .collect();
        let times = &trajectories[0].times;
        let dt = self.time_step.dt(base[0].final_time());

        (0..x.len())
            .into_par_iter()
            .map(|i| {
                let (v, j) = owner[i];
                let h = if x[i] + step <= upper[i] || x[i] - step < lower[i] {
                    step
                } else {
                    -step
                };
                let mut values = base[v].rudder_values().to_vec();
                values[j] = x[i] + h;
                let schedule = base[v].with_values(values)?;
                let mut probe = trajectories.clone();
                probe[v] = rollout(&self.vehicles[v].start, &schedule, dt, &self.vehicles[v].params)?;
                let pk = ExposureKernel::new(&probe, &self.sensors, self.field.as_ref())?;
                // states up to the previous knot are untouched; keep one
                // sample of slack for rounding in the stage times
                let t_prev = if j == 0 { T::zero() } else { base[v].knot_times()[j - 1] };
                let k0 = times.partition_point(|&t| t <= t_prev).saturating_sub(1);
                let exposures: Vec<T> = sample
                    .targets
                    .par_iter()
                    .zip(&running)
                    .map(|(t, run)| {
                        let tw = pk.target_weights(t);
                        (0..vehicles).fold(T::zero(), |total, w| {
                            total
                                + if w == v {
                                    pk.accumulate(v, t, tw, (k0, n), run[v][k0])
                                } else {
                                    run[w][n]
                                }
                        })
                    })
                    .collect();
                let fp = mean_survival(&exposures) + self.penalty(&probe);
                Ok((fp - fx) / h)
            })
            .collect()
    }

    fn bounds(&self, knots: &[usize]) -> (Vec<T>, Vec<T>) {
        let upper: Vec<T> = self
            .vehicles
            .iter()
            .zip(knots)
            .flat_map(|(v, &n)| std::iter::repeat_n(v.params.rudder_limit, n))
            .collect();
        let lower = upper.iter().map(|&u| -u).collect();
        (lower, upper)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizationConfig<T> {
    pub risk_threshold: T,
    /// Rudder knots per vehicle.
    pub knots: usize,
    pub max_inner_iters: usize,
    /// Finite-difference step on rudder values, rad.
    pub gradient_step: T,
    /// Projected-gradient norm at which the inner solver stops.
    pub gradient_tolerance: T,
    pub time_bracket: (T, T),
    pub time_tolerance: T,
    /// Random perturbations of the initial guess tried at `T_hi`.
    pub restarts: usize,
    pub seed: u64,
}

impl<T: Real> Default for OptimizationConfig<T> {
    fn default() -> Self {
        Self {
            risk_threshold: lit(0.1),
            knots: 48,
            max_inner_iters: 200,
            gradient_step: lit(1e-4),
            gradient_tolerance: lit(1e-6),
            time_bracket: (lit(100.0), lit(4000.0)),
            time_tolerance: lit(5.0),
            restarts: 0,
            seed: 0,
        }
    }
}

impl<T: Real> OptimizationConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.risk_threshold > T::zero() && self.risk_threshold < T::one()) {
            return Err(Error::invalid("risk_threshold", "must lie in (0, 1)"));
        }
        if self.knots < 2 {
            return Err(Error::invalid("knots", "at least 2 knots per vehicle"));
        }
        let (lo, hi) = self.time_bracket;
        if !(lo > T::zero() && lo < hi && hi.is_finite()) {
            return Err(Error::invalid("time_bracket", "need 0 < T_lo < T_hi"));
        }
        if !(self.time_tolerance > T::zero()) {
            return Err(Error::invalid("time_tolerance", "must be positive"));
        }
        if !(self.gradient_step > T::zero()) {
            return Err(Error::invalid("gradient_step", "must be positive"));
        }
        Ok(())
    }

    fn qn_options(&self, stop_below: Option<T>, rudder_limit: T) -> QnOptions<T> {
        QnOptions {
            max_iters: self.max_inner_iters,
            grad_tol: self.gradient_tolerance,
            fd_step: self.gradient_step,
            initial_move: rudder_limit * lit(0.25),
            stop_below,
            ..QnOptions::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InnerResult<T> {
    pub schedules: Vec<ControlSchedule<T>>,
    /// Objective at the returned schedules (risk plus any penalty).
    pub risk: T,
    pub initial_risk: T,
    pub iterations: usize,
    pub evaluations: usize,
    pub status: QnStatus,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanResult<T> {
    pub mission_time: T,
    pub schedules: Vec<ControlSchedule<T>>,
    /// Risk estimate on the optimization sample.
    pub achieved_risk: T,
    pub inner_iterations: usize,
    pub evaluations: usize,
    /// Seconds spent in [`outer_min_time`].
    pub wall_clock: f64,
    /// `(T, risk)` of every inner solve, in order.
    pub history: Vec<(T, T)>,
}

/// Monte Carlo residual risk from per-target exposures.
fn mean_survival<T: Real>(exposures: &[T]) -> T {
    let survive: Vec<T> = exposures.iter().map(|&e| (-e).exp()).collect();
    pairwise_sum(&survive) / T::from_usize(survive.len()).unwrap()
}

fn stack<T: Real>(schedules: &[ControlSchedule<T>]) -> Vec<T> {
    schedules
        .iter()
        .flat_map(|s| s.rudder_values().iter().copied())
        .collect()
}

fn unstack<T: Real>(templates: &[ControlSchedule<T>], x: &[T]) -> Result<Vec<ControlSchedule<T>>> {
    let mut offset = 0;
    templates
        .iter()
        .map(|s| {
            let n = s.len();
            let out = s.with_values(x[offset..offset + n].to_vec());
            offset += n;
            out
        })
        .collect()
}

/// Lowers the risk estimate at fixed mission time `t_fixed`, starting from
/// `init` (one schedule per vehicle spanning `[0, t_fixed]`).
///
/// Runs projected L-BFGS on the knot values with forward-difference
/// gradients. The result is never worse than `init`. `stop_below` ends the
/// search as soon as the objective reaches that level.
pub fn inner_minimize_risk<T: Real, S: DetectionModel<T>>(
    mission: &Mission<T, S>,
    sample: &TargetSample<T>,
    t_fixed: T,
    init: &[ControlSchedule<T>],
    config: &OptimizationConfig<T>,
    stop_below: Option<T>,
) -> Result<InnerResult<T>> {
    if !(t_fixed > T::zero()) {
        return Err(Error::invalid("t_fixed", "must be positive"));
    }
    if init.len() != mission.vehicles.len() {
        return Err(Error::invalid("init", "one schedule per vehicle required"));
    }
    if init.iter().any(|s| s.final_time() != t_fixed) {
        return Err(Error::invalid("init", "schedules must span [0, t_fixed]"));
    }
    let knots: Vec<usize> = init.iter().map(|s| s.len()).collect();
    let (lower, upper) = mission.bounds(&knots);
    let objective = |x: &[T]| -> Result<T> {
        let schedules = unstack(init, x)?;
        mission.objective(&schedules, sample)
    };
    let limit = mission
        .vehicles
        .iter()
        .fold(T::zero(), |m, v| m.max(v.params.rudder_limit));
    let x0 = stack(init);
    let mut start = x0.clone();
    for ((v, &lo), &hi) in start.iter_mut().zip(&lower).zip(&upper) {
        *v = v.max(lo).min(hi);
    }
    let initial_risk = objective(&start)?;
    let gradient =
        |x: &[T], fx: T| mission.objective_gradient(init, sample, x, fx, config.gradient_step, (&lower, &upper));
    let out = qn::minimize_with(
        objective,
        gradient,
        &start,
        &lower,
        &upper,
        &config.qn_options(stop_below, limit),
    )?;
    Ok(InnerResult {
        schedules: unstack(init, &out.x)?,
        risk: out.value,
        initial_risk,
        iterations: out.iterations,
        evaluations: out.evaluations + 1,
        status: out.status,
    })
}

/// Lawnmower-like starting guess: straight legs broken by alternating
/// rudder pulses sized for a half turn each.
pub fn seed_schedule<T: Real>(params: &VehicleParams<T>, t_final: T, knots: usize) -> Result<ControlSchedule<T>> {
    let knots = knots.max(2);
    let spacing = t_final / T::from_usize(knots - 1).unwrap();
    let amplitude = (T::PI() / (params.nomoto_k.abs() * spacing))
        .min(params.rudder_limit)
        .max(T::zero());
    let amplitude = if amplitude.is_finite() {
        amplitude
    } else {
        params.rudder_limit
    };
    let mut sign = T::one();
    let values = (0..knots)
        .map(|i| {
            if i % 4 == 3 {
                let v = sign * amplitude;
                sign = -sign;
                v
            } else {
                T::zero()
            }
        })
        .collect();
    ControlSchedule::uniform(t_final, values)
}

fn perturbed<T: Real>(
    base: &[ControlSchedule<T>],
    limits: &[T],
    rng: &mut ChaCha8Rng,
) -> Result<Vec<ControlSchedule<T>>> {
    base.iter()
        .zip(limits)
        .map(|(s, &limit)| {
            let values = s
                .rudder_values()
                .iter()
                .map(|&v| {
                    let u: f64 = rng.gen_range(-0.5..0.5);
                    (v + limit * lit(u)).max(-limit).min(limit)
                })
                .collect();
            s.with_values(values)
        })
        .collect()
}

/// The lawnmower seed followed by `config.restarts` random perturbations
/// of it, drawn from `config.seed`.
pub fn initial_candidates<T: Real, S: DetectionModel<T>>(
    mission: &Mission<T, S>,
    t: T,
    config: &OptimizationConfig<T>,
) -> Result<Vec<Vec<ControlSchedule<T>>>> {
    let base = mission
        .vehicles
        .iter()
        .map(|v| seed_schedule(&v.params, t, config.knots))
        .collect::<Result<Vec<_>>>()?;
    let limits: Vec<T> = mission.vehicles.iter().map(|v| v.params.rudder_limit).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut out = vec![base.clone()];
    for _ in 0..config.restarts {
        out.push(perturbed(&base, &limits, &mut rng)?);
    }
    Ok(out)
}

struct Solved<T> {
    t: T,
    schedules: Vec<ControlSchedule<T>>,
    risk: T,
}

/// Shortest mission time whose optimized risk meets the threshold.
///
/// Bisects `[T_lo, T_hi]`. Each inner solve starts from the best of the
/// known solutions carried to the new time (rescaled, truncated or
/// extended) and the lawnmower seed, and stops as soon as the threshold is
/// met. Fails with [`Error::InfeasibleBracket`] when even `T_hi` cannot
/// reach the threshold.
pub fn outer_min_time<T: Real, S: DetectionModel<T>>(
    mission: &Mission<T, S>,
    sample: &TargetSample<T>,
    config: &OptimizationConfig<T>,
) -> Result<PlanResult<T>> {
    let clock = Instant::now();
    mission.validate()?;
    config.validate()?;
    let rho = config.risk_threshold;
    let n = config.knots;
    let mut iterations = 0;
    let mut evaluations = 0;
    let mut history = Vec::new();

    let seeds = |t: T| -> Result<Vec<ControlSchedule<T>>> {
        mission
            .vehicles
            .iter()
            .map(|v| seed_schedule(&v.params, t, n))
            .collect()
    };

    let mut solve = |t: T, candidates: Vec<Vec<ControlSchedule<T>>>, runs: usize| -> Result<Solved<T>> {
        let mut scored = Vec::with_capacity(candidates.len());
        for c in candidates {
            let risk = mission.objective(&c, sample)?;
            evaluations += 1;
            scored.push((risk, c));
        }
        // stable: earlier candidates win ties
        scored.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
        let mut best: Option<Solved<T>> = None;
        for (_, init) in scored.into_iter().take(runs.max(1)) {
            let r = inner_minimize_risk(mission, sample, t, &init, config, Some(rho))?;
            iterations += r.iterations;
            evaluations += r.evaluations;
            if best.as_ref().is_none_or(|b| r.risk < b.risk) {
                best = Some(Solved {
                    t,
                    schedules: r.schedules,
                    risk: r.risk,
                });
            }
            if best.as_ref().is_some_and(|b| b.risk <= rho) {
                break;
            }
        }
        let best = best.expect("at least one candidate");
        history.push((t, best.risk));
        Ok(best)
    };

    let (t_lo, t_hi) = config.time_bracket;
    let mut upper = solve(t_hi, initial_candidates(mission, t_hi, config)?, 1 + config.restarts)?;
    if upper.risk > rho {
        return Err(Error::InfeasibleBracket {
            t_hi: t_hi.to_f64().unwrap_or(f64::NAN),
            risk: upper.risk.to_f64().unwrap_or(f64::NAN),
            threshold: rho.to_f64().unwrap_or(f64::NAN),
        });
    }

    let carry = |from: &Solved<T>, t: T| -> Result<Vec<Vec<ControlSchedule<T>>>> {
        let rescaled = from
            .schedules
            .iter()
            .map(|s| s.rescaled(t))
            .collect::<Result<Vec<_>>>()?;
        let resampled = from
            .schedules
            .iter()
            .map(|s| s.resampled(t, n))
            .collect::<Result<Vec<_>>>()?;
        Ok(vec![rescaled, resampled])
    };

    let mut lower: Option<Solved<T>> = None;
    let mut candidates = carry(&upper, t_lo)?;
    candidates.push(seeds(t_lo)?);
    let at_lo = solve(t_lo, candidates, 1)?;
    if at_lo.risk <= rho {
        upper = at_lo;
    } else {
        lower = Some(at_lo);
        let mut lo = t_lo;
        while upper.t - lo > config.time_tolerance {
            let mid = (lo + upper.t) / lit(2.0);
            let mut candidates = carry(&upper, mid)?;
            if let Some(l) = &lower {
                candidates.extend(carry(l, mid)?);
            }
            candidates.push(seeds(mid)?);
            let sol = solve(mid, candidates, 1)?;
            if sol.risk <= rho {
                upper = sol;
            } else {
                lo = mid;
                lower = Some(sol);
            }
        }
    }
    drop(lower);
    let achieved = mission.evaluate(&upper.schedules, sample)?.residual_risk;
    Ok(PlanResult {
        mission_time: upper.t,
        schedules: upper.schedules,
        achieved_risk: achieved,
        inner_iterations: iterations,
        evaluations,
        wall_clock: clock.elapsed().as_secs_f64(),
        history,
    })
}

/// Inner solve only, at a given mission time: the best of the seed and its
/// perturbations after descent. The threshold is reported, not enforced.
pub fn plan_fixed_time<T: Real, S: DetectionModel<T>>(
    mission: &Mission<T, S>,
    sample: &TargetSample<T>,
    t: T,
    config: &OptimizationConfig<T>,
) -> Result<PlanResult<T>> {
    let clock = Instant::now();
    mission.validate()?;
    config.validate()?;
    let mut best: Option<InnerResult<T>> = None;
    let mut iterations = 0;
    let mut evaluations = 0;
    for init in initial_candidates(mission, t, config)? {
        let r = inner_minimize_risk(mission, sample, t, &init, config, None)?;
        iterations += r.iterations;
        evaluations += r.evaluations;
        if best.as_ref().is_none_or(|b| r.risk < b.risk) {
            best = Some(r);
        }
    }
    let best = best.expect("seed candidate always present");
    let achieved = mission.evaluate(&best.schedules, sample)?.residual_risk;
    Ok(PlanResult {
        mission_time: t,
        schedules: best.schedules,
        achieved_risk: achieved,
        inner_iterations: iterations,
        evaluations,
        wall_clock: clock.elapsed().as_secs_f64(),
        history: vec![(t, best.risk)],
    })
}

/// Risk of stored schedules under the mission's current ripple setting,
/// without any optimization.
pub fn evaluate_fixed_plan<T: Real, S: DetectionModel<T>>(
    mission: &Mission<T, S>,
    sample: &TargetSample<T>,
    schedules: &[ControlSchedule<T>],
    t: T,
) -> Result<RiskReport<T>> {
    if schedules.iter().any(|s| s.final_time() != t) {
        return Err(Error::invalid("schedules", "do not span [0, t]"));
    }
    mission.evaluate(schedules, sample)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::risk::sample_targets;
    use crate::sensor::{Pose, Target};

    struct Constant(f64);
    impl DetectionModel<f64> for Constant {
        fn rate(&self, _: &Pose<f64>, _: &Target<f64>) -> f64 {
            self.0
        }
    }

    fn mission(rate: f64, vehicles: usize) -> Mission<f64, Constant> {
        Mission {
            domain: Domain::reference(),
            vehicles: (0..vehicles)
                .map(|i| Vehicle {
                    start: VehicleState::at(10.0 + i as f64, 15.0, 0.0),
                    params: VehicleParams::reference(),
                })
                .collect(),
            sensors: (0..vehicles).map(|_| Constant(rate)).collect(),
            field: None,
            time_step: TimeStep::Divisions(50),
            confinement: None,
        }
    }

    #[test]
    fn time_step_policies() {
        assert_eq!(TimeStep::Fixed(0.5).dt(100.0), 0.5);
        assert_eq!(TimeStep::Divisions(1000).dt(2000.0), 2.0);
    }

    #[test]
    fn seed_schedule_alternates_pulses() {
        let s = seed_schedule(&VehicleParams::<f64>::reference(), 100.0, 12).unwrap();
        let v = s.rudder_values();
        assert_eq!(v[0], 0.0);
        assert!(v[3] > 0.0 && v[7] < 0.0 && v[11] > 0.0);
        assert!(s.max_abs() <= VehicleParams::<f64>::reference().rudder_limit);
    }

    #[test]
    fn inner_with_no_detection_keeps_unit_risk() {
        let m = mission(0.0, 1);
        let sample = sample_targets(&m.domain, 16, 1).unwrap();
        let init = vec![seed_schedule(&m.vehicles[0].params, 50.0, 6).unwrap()];
        let cfg = OptimizationConfig::default();
        let r = inner_minimize_risk(&m, &sample, 50.0, &init, &cfg, None).unwrap();
        assert_eq!(r.risk, 1.0);
        assert_eq!(r.schedules, init);
        assert!(r.iterations <= cfg.max_inner_iters);
    }

    #[test]
    fn outer_inverts_constant_rate() {
        let c = 1e-3;
        let m = mission(c, 1);
        let sample = sample_targets(&m.domain, 8, 1).unwrap();
        let cfg = OptimizationConfig {
            knots: 4,
            time_bracket: (100.0, 5000.0),
            time_tolerance: 1.0,
            ..Default::default()
        };
        let plan = outer_min_time(&m, &sample, &cfg).unwrap();
        let expect = (1.0_f64 / 0.1).ln() / c;
        assert!((plan.mission_time - expect).abs() <= 1.0, "{}", plan.mission_time);
        assert!(plan.achieved_risk <= 0.1);
        // two vehicles double the rate and halve the time
        let m2 = mission(c, 2);
        let plan2 = outer_min_time(&m2, &sample, &cfg).unwrap();
        assert!(plan2.mission_time < plan.mission_time);
        assert!((plan2.mission_time - expect / 2.0).abs() <= 1.0);
    }

    #[test]
    fn nearly_vacuous_threshold_returns_lower_bracket() {
        let m = mission(1e-3, 1);
        let sample = sample_targets(&m.domain, 8, 1).unwrap();
        let cfg = OptimizationConfig {
            risk_threshold: 0.999,
            knots: 4,
            time_bracket: (100.0, 5000.0),
            ..Default::default()
        };
        let plan = outer_min_time(&m, &sample, &cfg).unwrap();
        assert_eq!(plan.mission_time, 100.0);
    }

    #[test]
    fn infeasible_bracket_is_reported() {
        let m = mission(1e-6, 1);
        let sample = sample_targets(&m.domain, 8, 1).unwrap();
        let cfg = OptimizationConfig {
            knots: 4,
            time_bracket: (10.0, 100.0),
            ..Default::default()
        };
        assert!(matches!(
            outer_min_time(&m, &sample, &cfg),
            Err(Error::InfeasibleBracket { .. })
        ));
    }

    #[test]
    fn config_validation() {
        let ok = OptimizationConfig::<f64>::default();
        assert!(ok.validate().is_ok());
        assert!(OptimizationConfig {
            risk_threshold: 1.5,
            ..ok
        }
        .validate()
        .is_err());
        assert!(OptimizationConfig { knots: 1, ..ok }.validate().is_err());
        assert!(OptimizationConfig {
            time_bracket: (10.0, 5.0),
            ..ok
        }
        .validate()
        .is_err());
    }

    #[test]
    fn fixed_plan_must_span_time() {
        let m = mission(1e-3, 1);
        let sample = sample_targets(&m.domain, 8, 1).unwrap();
        let s = vec![ControlSchedule::constant(10.0, 0.0).unwrap()];
        assert!(evaluate_fixed_plan(&m, &sample, &s, 12.0).is_err());
        let r = evaluate_fixed_plan(&m, &sample, &s, 10.0).unwrap();
        assert!((r.residual_risk - (-1e-2_f64).exp()).abs() < 1e-12);
    }

    fn sonar_mission(vehicles: usize, ripples: bool) -> Mission<f64, crate::sensor::SensorParams<f64>> {
        let domain = Domain::new([150.0, 150.0], [750.0, 750.0]).unwrap();
        let mut params = VehicleParams::reference();
        params.rudder_limit = 2f64.to_radians();
        let mut field = RippleField::reference(domain);
        field.edge_sharpness = 1.0;
        Mission {
            domain,
            vehicles: (0..vehicles)
                .map(|i| Vehicle {
                    start: VehicleState::at(300.0 + 300.0 * i as f64, 450.0, 0.4 * i as f64),
                    params,
                })
                .collect(),
            sensors: vec![crate::sensor::SensorParams::reference(); vehicles],
            field: ripples.then_some(field),
            time_step: TimeStep::Fixed(0.7),
            confinement: Some(1e-6),
        }
    }

    #[test]
    fn cached_gradient_matches_plain_forward_differences_bitwise() {
        let m = sonar_mission(2, true);
        let sample = sample_targets(&m.domain, 64, 3).unwrap();
        let t = 60.0;
        let templates: Vec<_> = m
            .vehicles
            .iter()
            .map(|v| seed_schedule(&v.params, t, 7).unwrap())
            .collect();
        let (lower, upper) = m.bounds(&[7, 7]);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut x: Vec<f64> = upper.iter().map(|&u| rng.gen_range(-u..u)).collect();
        x[3] = upper[3]; // exercises the backward probe
        let f = |x: &[f64]| m.objective(&unstack(&templates, x)?, &sample);
        let fx = f(&x).unwrap();
        let plain = qn::fd_gradient(&f, &x, fx, 1e-4, &lower, &upper).unwrap();
        let cached = m
            .objective_gradient(&templates, &sample, &x, fx, 1e-4, (&lower, &upper))
            .unwrap();
        assert!(plain.iter().any(|&g| g != 0.0));
        assert_eq!(plain, cached);
    }
}
