//! Monte Carlo estimate of the residual risk
//!
//! ```text
//! E[q(T)] = integral over Omega of exp(-integral_0^T gamma(x(t), w) dt) phi(w) dw
//! ```
//!
//! with `phi` the uniform density on the survey rectangle. Detection
//! processes of several vehicles are independent Poisson processes, so their
//! rates add inside the exponent. The time integral uses the trapezoid rule
//! on the shared dynamics grid.

use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::scalar::{lit, Real};
use crate::seabed::{Domain, RippleField, TargetWeights};
use crate::sensor::{DetectionModel, Pose, Target};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Fixed set of uniformly drawn candidate targets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetSample<T> {
    pub targets: Vec<Target<T>>,
    pub seed: u64,
    pub domain: Domain<T>,
}

impl<T: Real> TargetSample<T> {
    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }
}

/// Draws `count` i.i.d. uniform targets on `domain` from a ChaCha8 stream
/// seeded with `seed`.
pub fn sample_targets<T: Real>(domain: &Domain<T>, count: usize, seed: u64) -> Result<TargetSample<T>> {
    domain.validate()?;
    if !(domain.area() > T::zero()) {
        return Err(Error::invalid("domain", "zero area"));
    }
    if count == 0 {
        return Err(Error::invalid("count_m", "must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (x0, y0) = (domain.lo[0].to_f64().unwrap(), domain.lo[1].to_f64().unwrap());
    let (w, h) = (domain.width().to_f64().unwrap(), domain.height().to_f64().unwrap());
    let targets = (0..count)
        .map(|_| {
            let u: f64 = rng.gen();
            let v: f64 = rng.gen();
            let x = lit::<T>(x0 + u * w).min(domain.hi[0]);
            let y = lit::<T>(y0 + v * h).min(domain.hi[1]);
            Target::new(x, y)
        })
        .collect();
    Ok(TargetSample {
        targets,
        seed,
        domain: *domain,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskReport<T> {
    /// Estimated probability that a mine survives the mission undetected.
    pub residual_risk: T,
    /// Standard error of the estimate.
    pub std_error: T,
    pub mission_time: T,
    /// `1 - exp(-exposure)` for every sampled target.
    pub per_target_detection: Vec<T>,
}

/// Detection probability on the centres of an `nx` by `ny` lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageGrid<T> {
    pub domain: Domain<T>,
    pub nx: usize,
    pub ny: usize,
    /// Row-major, `values[j * nx + i]` at cell `(i, j)`; row 0 is the
    /// bottom (smallest y) row.
    pub values: Vec<T>,
}

impl<T: Real> CoverageGrid<T> {
    pub fn cell_center(&self, i: usize, j: usize) -> (T, T) {
        cell_center(&self.domain, self.nx, self.ny, i, j)
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.values[j * self.nx + i]
    }

    pub fn mean(&self) -> T {
        pairwise_sum(&self.values) / T::from_usize(self.values.len()).unwrap()
    }
}

fn cell_center<T: Real>(domain: &Domain<T>, nx: usize, ny: usize, i: usize, j: usize) -> (T, T) {
    let half = lit::<T>(0.5);
    let x = domain.lo[0] + domain.width() * (T::from_usize(i).unwrap() + half) / T::from_usize(nx).unwrap();
    let y = domain.lo[1] + domain.height() * (T::from_usize(j).unwrap() + half) / T::from_usize(ny).unwrap();
    (x, y)
}

/// Order-fixed summation, independent of how callers were scheduled.
pub(crate) fn pairwise_sum<T: Real>(v: &[T]) -> T {
    if v.len() <= 32 {
        return v.iter().fold(T::zero(), |a, &b| a + b);
    }
    let mid = v.len() / 2;
    pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
}

/// Per-vehicle precomputation shared by every target of one evaluation.
struct VehicleTrack<T> {
    poses: Vec<Pose<T>>,
    /// Ripple gain of each pose's heading, when a field is present.
    gains: Vec<T>,
}

/// Exposure integrator over a fixed set of trajectories.
///
/// Building it checks the trajectories share a time grid and caches pose
/// trigonometry, trapezoid weights and heading gains.
pub struct ExposureKernel<'a, T, S> {
    tracks: Vec<VehicleTrack<T>>,
    weights: Vec<T>,
    sensors: &'a [S],
    field: Option<&'a RippleField<T>>,
    mission_time: T,
}

impl<'a, T: Real, S: DetectionModel<T>> ExposureKernel<'a, T, S> {
    pub fn new(trajectories: &[Trajectory<T>], sensors: &'a [S], field: Option<&'a RippleField<T>>) -> Result<Self> {
        let first = trajectories
            .first()
            .ok_or_else(|| Error::GridMismatch("no trajectories".into()))?;
        if sensors.len() != trajectories.len() {
            return Err(Error::GridMismatch(format!(
                "{} sensors for {} trajectories",
                sensors.len(),
                trajectories.len()
            )));
        }
        for (i, tr) in trajectories.iter().enumerate() {
            if tr.times != first.times || tr.states.len() != tr.times.len() {
                return Err(Error::GridMismatch(format!(
                    "trajectory {i} does not share the time grid of trajectory 0"
                )));
            }
        }
        let times = &first.times;
        let n = times.len();
        let half = lit::<T>(0.5);
        let mut weights = vec![T::zero(); n];
        for k in 1..n {
            let h = (times[k] - times[k - 1]) * half;
            weights[k - 1] = weights[k - 1] + h;
            weights[k] = weights[k] + h;
        }
        let tracks = trajectories
            .iter()
            .map(|tr| VehicleTrack {
                poses: tr.states.iter().map(Pose::from_state).collect(),
                gains: match field {
                    Some(f) => tr.states.iter().map(|s| f.heading_gain(s.psi)).collect(),
                    None => Vec::new(),
                },
            })
            .collect();
        Ok(Self {
            tracks,
            weights,
            sensors,
            field,
            mission_time: first.mission_time(),
        })
    }

    pub fn mission_time(&self) -> T {
        self.mission_time
    }

    pub(crate) fn target_weights(&self, target: &Target<T>) -> Option<TargetWeights<T>> {
        self.field.map(|f| f.target_weights(target.x, target.y))
    }

    pub(crate) fn samples(&self) -> usize {
        self.weights.len()
    }

    /// Exposure of vehicle `v` accumulated before each sample, followed by
    /// the total: `samples() + 1` entries. Resuming [`Self::accumulate`] from
    /// entry `k` reproduces the total bit for bit.
    pub(crate) fn running_exposure(&self, v: usize, target: &Target<T>, tw: Option<TargetWeights<T>>) -> Vec<T> {
        let n = self.samples();
        let mut out = Vec::with_capacity(n + 1);
        let mut acc = T::zero();
        for k in 0..n {
            out.push(acc);
            acc = self.accumulate(v, target, tw, (k, k + 1), acc);
        }
        out.push(acc);
        out
    }

    /// Exposure of vehicle `v` over samples `from..to`, added onto `acc`
    /// one sample at a time.
    pub(crate) fn accumulate(
        &self,
        v: usize,
        target: &Target<T>,
        tw: Option<TargetWeights<T>>,
        (from, to): (usize, usize),
        mut acc: T,
    ) -> T {
        let track = &self.tracks[v];
        let sensor = &self.sensors[v];
        for k in from..to {
            let w = self.weights[k];
            if w > T::zero() {
                let rate = sensor.rate(&track.poses[k], target);
                let rate = match tw {
                    None => rate,
                    Some(tw) => (rate * (tw.base + tw.ripple * track.gains[k])).max(T::zero()),
                };
                acc = acc + w * rate;
            }
        }
        acc
    }

    /// Time-integrated detection rate of one target, summed over vehicles.
    pub fn exposure(&self, target: &Target<T>) -> T {
        let tw = self.target_weights(target);
        (0..self.tracks.len()).fold(T::zero(), |total, v| {
            total + self.accumulate(v, target, tw, (0, self.samples()), T::zero())
        })
    }

    /// Exposures of every target, evaluated in parallel, in target order.
    pub fn exposures(&self, targets: &[Target<T>]) -> Vec<T> {
        targets.par_iter().map(|t| self.exposure(t)).collect()
    }
}

/// Time-integrated, vehicle-summed detection rate for one target.
pub fn exposure<T: Real, S: DetectionModel<T>>(
    trajectories: &[Trajectory<T>],
    target: &Target<T>,
    sensors: &[S],
    field: Option<&RippleField<T>>,
) -> Result<T> {
    Ok(ExposureKernel::new(trajectories, sensors, field)?.exposure(target))
}

/// Detection-rate after ripple gating for a single vehicle pose.
pub fn effective_gamma<T: Real, S: DetectionModel<T>>(
    state: &crate::dynamics::VehicleState<T>,
    target: &Target<T>,
    sensor: &S,
    field: Option<&RippleField<T>>,
) -> T {
    let rate = sensor.rate(&Pose::from_state(state), target);
    match field {
        None => rate,
        Some(f) => (rate * f.dom_weight(target.x, target.y, state.psi)).max(T::zero()),
    }
}

/// Residual-risk estimate from per-target exposures.
pub fn report_from_exposures<T: Real>(exposures: &[T], mission_time: T) -> RiskReport<T> {
    let m = T::from_usize(exposures.len()).unwrap();
    let survive: Vec<T> = exposures.iter().map(|&e| (-e).exp()).collect();
    let mean = pairwise_sum(&survive) / m;
    let std_error = if exposures.len() > 1 {
        let dev: Vec<T> = survive.iter().map(|&q| (q - mean) * (q - mean)).collect();
        let var = pairwise_sum(&dev) / (m - T::one());
        (var / m).sqrt()
    } else {
        T::zero()
    };
    RiskReport {
        residual_risk: mean.max(T::zero()).min(T::one()),
        std_error,
        mission_time,
        per_target_detection: survive.iter().map(|&q| T::one() - q).collect(),
    }
}

pub fn residual_risk<T: Real, S: DetectionModel<T>>(
    trajectories: &[Trajectory<T>],
    sample: &TargetSample<T>,
    sensors: &[S],
    field: Option<&RippleField<T>>,
) -> Result<RiskReport<T>> {
    if sample.is_empty() {
        return Err(Error::invalid("sample", "no targets"));
    }
    let kernel = ExposureKernel::new(trajectories, sensors, field)?;
    let exposures = kernel.exposures(&sample.targets);
    Ok(report_from_exposures(&exposures, kernel.mission_time()))
}

/// Deterministic detection probability on cell centres.
pub fn coverage_grid<T: Real, S: DetectionModel<T>>(
    trajectories: &[Trajectory<T>],
    domain: &Domain<T>,
    resolution: (usize, usize),
    sensors: &[S],
    field: Option<&RippleField<T>>,
) -> Result<CoverageGrid<T>> {
    let (nx, ny) = resolution;
    if nx < 2 || ny < 2 {
        return Err(Error::invalid("resolution", "must be at least 2 x 2"));
    }
    domain.validate()?;
    let kernel = ExposureKernel::new(trajectories, sensors, field)?;
    let centers: Vec<Target<T>> = (0..ny)
        .flat_map(|j| (0..nx).map(move |i| (i, j)))
        .map(|(i, j)| {
            let (x, y) = cell_center(domain, nx, ny, i, j);
            Target::new(x, y)
        })
        .collect();
    let values = kernel
        .exposures(&centers)
        .into_iter()
        .map(|e| T::one() - (-e).exp())
        .collect();
    Ok(CoverageGrid {
        domain: *domain,
        nx,
        ny,
        values,
    })
}
