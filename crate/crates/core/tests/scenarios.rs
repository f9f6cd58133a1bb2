use approx::assert_relative_eq;
use mcm_plan::dynamics::VehicleParams;
use mcm_plan::scenario::Scenario;
use mcm_plan::sensor::SensorParams;
use std::path::{Path, PathBuf};

fn bundled(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

#[test]
fn reference_scenario_carries_the_standard_constants() {
    let s = Scenario::load(bundled("reference_1vehicle.scn")).unwrap();
    assert_eq!(s.vehicles.len(), 1);
    let v = &s.vehicles[0];
    assert_eq!((v.start.x, v.start.y), (14.5, 15.0));
    assert_eq!(v.params, VehicleParams::reference());

    let sonar = v.sensor;
    let expected = SensorParams::<f64>::reference();
    assert_eq!(sonar.scan_rate, 20.0);
    assert_eq!(sonar.fom, 72.0);
    assert_eq!(sonar.sigma, 9.0);
    assert_eq!(sonar.attenuation, 5.2);
    assert_eq!(sonar.height, 20.0);
    assert_eq!(sonar.p_alpha, 25.0);
    assert_eq!(sonar.p_eps, 400.0);
    assert_relative_eq!(sonar.alpha_fov.to_degrees(), 120.0, epsilon = 1e-12);
    assert_relative_eq!(sonar.eps_fov.to_degrees(), 5.0, epsilon = 1e-12);
    assert_relative_eq!(sonar.eps_de.to_degrees(), -6.0, epsilon = 1e-12);
    assert_eq!(sonar, expected);

    assert_eq!(s.domain.lo, [5.0, 5.0]);
    assert_eq!(s.domain.hi, [25.0, 25.0]);
    assert_eq!(s.risk_threshold(), 0.1);
    assert!(!s.ripples);
}

#[test]
fn every_bundled_scenario_loads() {
    let mut names: Vec<_> = std::fs::read_dir(bundled(""))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "scn"))
        .collect();
    names.sort();
    assert_eq!(names.len(), 4);
    for p in names {
        let s = Scenario::load(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
        let back: Scenario = s.to_text().parse().unwrap();
        assert_eq!(back, s, "{}", p.display());
    }
}

#[test]
fn desk_pair_differs_only_in_vehicles() {
    let one = Scenario::load(bundled("desk_1vehicle.scn")).unwrap();
    let two = Scenario::load(bundled("desk_2vehicle.scn")).unwrap();
    assert_eq!(two.vehicles.len(), 2);
    assert_eq!(one.optimization, two.optimization);
    assert_eq!(one.scaled_domain(), two.scaled_domain());
    assert_eq!(one.optimization.knots, 16);
    assert!(one.optimization.time_bracket.1 <= 300.0);
}
