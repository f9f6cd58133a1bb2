use mcm_plan::dynamics::{ControlSchedule, VehicleParams, VehicleState};
use mcm_plan::optimizer::{
    inner_minimize_risk, outer_min_time, seed_schedule, Mission, OptimizationConfig, TimeStep, Vehicle,
};
use mcm_plan::qn::{central_gradient, fd_gradient};
use mcm_plan::risk::{sample_targets, TargetSample};
use mcm_plan::seabed::Domain;
use mcm_plan::sensor::{DetectionModel, Pose, SensorParams, Target};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Detection only near a spot 60 m to port of the start, independent of
/// the target.
struct Spot {
    centre: (f64, f64),
    spread: f64,
}

impl DetectionModel<f64> for Spot {
    fn rate(&self, pose: &Pose<f64>, _: &Target<f64>) -> f64 {
        let d2 = (pose.x - self.centre.0).powi(2) + (pose.y - self.centre.1).powi(2);
        0.05 * (-d2 / (2.0 * self.spread * self.spread)).exp()
    }
}

fn params() -> VehicleParams<f64> {
    VehicleParams {
        rudder_limit: 3f64.to_radians(),
        ..VehicleParams::reference()
    }
}

fn spot_mission() -> Mission<f64, Spot> {
    Mission {
        domain: Domain::new([-100.0, -100.0], [100.0, 100.0]).unwrap(),
        vehicles: vec![Vehicle {
            start: VehicleState::at(0.0, 0.0, 0.0),
            params: params(),
        }],
        sensors: vec![Spot {
            centre: (0.0, 60.0),
            spread: 25.0,
        }],
        field: None,
        time_step: TimeStep::Fixed(0.5),
        confinement: None,
    }
}

/// Desk-sized sonar scenario, small enough for unit-test budgets.
fn sonar_mission(starts: &[(f64, f64)]) -> Mission<f64, SensorParams<f64>> {
    let domain = Domain::new([150.0, 150.0], [750.0, 750.0]).unwrap();
    Mission {
        domain,
        vehicles: starts
            .iter()
            .map(|&(x, y)| Vehicle {
                start: VehicleState::at(x, y, 0.0),
                params: VehicleParams {
                    rudder_limit: 2f64.to_radians(),
                    ..VehicleParams::reference()
                },
            })
            .collect(),
        sensors: vec![SensorParams::reference(); starts.len()],
        field: None,
        time_step: TimeStep::Fixed(1.0),
        confinement: None,
    }
}

fn sample(m: &Mission<f64, SensorParams<f64>>, n: usize) -> TargetSample<f64> {
    sample_targets(&m.domain, n, 21).unwrap()
}

#[test]
fn optimizer_turns_toward_detection() {
    let m = spot_mission();
    let s = sample_targets(&m.domain, 4, 1).unwrap();
    let t = 60.0;
    let straight = vec![ControlSchedule::uniform(t, vec![0.0; 8]).unwrap()];
    let cfg = OptimizationConfig {
        knots: 8,
        max_inner_iters: 40,
        ..Default::default()
    };
    let r = inner_minimize_risk(&m, &s, t, &straight, &cfg, None).unwrap();
    assert!(r.risk < r.initial_risk, "{} vs {}", r.risk, r.initial_risk);
    let traj = &m.rollouts(&r.schedules).unwrap()[0];
    let end = traj.states.last().unwrap();
    let bearing = std::f64::consts::FRAC_PI_2;
    let off = mcm_plan::scalar::wrap_angle(end.psi - bearing);
    assert!(off.abs() < std::f64::consts::FRAC_PI_2, "final heading {}", end.psi);
    assert!(r.schedules[0].rudder_values().iter().take(4).any(|&p| p > 0.0));
}

#[test]
fn inner_never_returns_worse_than_its_start() {
    let m = sonar_mission(&[(435.0, 450.0)]);
    let s = sample(&m, 48);
    let cfg = OptimizationConfig {
        knots: 6,
        max_inner_iters: 4,
        ..Default::default()
    };
    let limit = m.vehicles[0].params.rudder_limit;
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..20 {
        let values: Vec<f64> = (0..6).map(|_| rng.gen_range(-limit..=limit)).collect();
        let init = vec![ControlSchedule::uniform(60.0, values).unwrap()];
        let r = inner_minimize_risk(&m, &s, 60.0, &init, &cfg, None).unwrap();
        assert!(r.risk <= r.initial_risk);
        assert!(r.schedules[0].max_abs() <= limit);
    }
}

#[test]
fn forward_differences_agree_with_central_reference() {
    let m = sonar_mission(&[(435.0, 450.0)]);
    let s = sample(&m, 128);
    let t = 80.0;
    let limit = m.vehicles[0].params.rudder_limit;
    let template = ControlSchedule::uniform(t, vec![0.0; 4]).unwrap();
    let f = |x: &[f64]| m.objective(&[template.with_values(x.to_vec())?], &s);
    let x = [0.2 * limit, -0.4 * limit, 0.1 * limit, 0.3 * limit];
    let reference = central_gradient(&f, &x, 1e-5).unwrap();
    let scale = reference.iter().fold(0.0f64, |a, g| a.max(g.abs()));
    assert!(scale > 0.0);
    let (lower, upper) = ([-limit; 4], [limit; 4]);
    for step in [1e-4, 1e-5, 1e-6] {
        let fx = f(&x).unwrap();
        let g = fd_gradient(&f, &x, fx, step, &lower, &upper).unwrap();
        for (a, b) in g.iter().zip(&reference) {
            assert!(
                (a - b).abs() <= 0.05 * b.abs().max(0.01 * scale),
                "step {step}: {a} vs {b}"
            );
        }
    }
}

#[test]
fn zero_extension_never_raises_risk() {
    let m = sonar_mission(&[(435.0, 450.0)]);
    let s = sample(&m, 64);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let limit = m.vehicles[0].params.rudder_limit;
    for _ in 0..10 {
        let t1 = rng.gen_range(5..60) as f64;
        let t2 = t1 + rng.gen_range(1..40) as f64;
        let values: Vec<f64> = (0..5).map(|_| rng.gen_range(-limit..=limit)).collect();
        let short = ControlSchedule::uniform(t1, values).unwrap();
        let long = short.extended_with_zero(t2).unwrap();
        let r1 = m.evaluate(&[short], &s).unwrap().residual_risk;
        let r2 = m.evaluate(&[long], &s).unwrap().residual_risk;
        assert!(r2 <= r1, "{t1}->{t2}: {r1} -> {r2}");
    }
}

#[test]
fn second_vehicle_never_lengthens_the_mission() {
    let cfg = OptimizationConfig {
        risk_threshold: 0.3,
        knots: 6,
        max_inner_iters: 8,
        time_bracket: (10.0, 160.0),
        time_tolerance: 10.0,
        ..Default::default()
    };
    let one = sonar_mission(&[(300.0, 450.0)]);
    let two = sonar_mission(&[(300.0, 450.0), (600.0, 450.0)]);
    let s = sample(&one, 64);
    let a = outer_min_time(&one, &s, &cfg).unwrap();
    let b = outer_min_time(&two, &s, &cfg).unwrap();
    assert!(
        b.mission_time <= a.mission_time,
        "{} vs {}",
        b.mission_time,
        a.mission_time
    );
    assert!(a.achieved_risk <= 0.3 && b.achieved_risk <= 0.3);
}

#[test]
fn plans_are_bitwise_reproducible() {
    let m = sonar_mission(&[(435.0, 450.0)]);
    let s = sample(&m, 64);
    let cfg = OptimizationConfig {
        risk_threshold: 0.3,
        knots: 5,
        max_inner_iters: 5,
        time_bracket: (10.0, 160.0),
        time_tolerance: 20.0,
        restarts: 1,
        seed: 8,
        ..Default::default()
    };
    let a = outer_min_time(&m, &s, &cfg).unwrap();
    let b = outer_min_time(&m, &s, &cfg).unwrap();
    assert_eq!(a.mission_time.to_bits(), b.mission_time.to_bits());
    assert_eq!(a.schedules, b.schedules);
    assert_eq!(a.achieved_risk.to_bits(), b.achieved_risk.to_bits());
    assert_eq!(a.history, b.history);
    for s in &a.schedules {
        assert!(s.max_abs() <= m.vehicles[0].params.rudder_limit);
    }
    let seeded = seed_schedule(&m.vehicles[0].params, 100.0, 5).unwrap();
    assert_eq!(seeded.len(), 5);
}
