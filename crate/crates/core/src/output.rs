//! Result files: trajectories, coverage grids, run summaries and the plan
//! file read back by `evaluate`.

use crate::dynamics::{ControlSchedule, Trajectory, VehicleState};
use crate::error::{Error, Result};
use crate::risk::{CoverageGrid, RiskReport};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

/// Header row of `trajectory_<i>.csv`.
pub const TRAJECTORY_HEADER: &str = "t,x,y,psi_deg,r_degps,p_deg";

pub fn trajectory_csv(traj: &Trajectory<f64>) -> String {
    let mut out = String::with_capacity(64 * traj.len());
    out.push_str(TRAJECTORY_HEADER);
    out.push('\n');
    for ((t, s), p) in traj.times.iter().zip(&traj.states).zip(&traj.controls) {
        let _ = writeln!(
            out,
            "{t},{},{},{},{},{}",
            s.x,
            s.y,
            s.psi.to_degrees(),
            s.r.to_degrees(),
            p.to_degrees()
        );
    }
    out
}

/// Parses a file written by [`trajectory_csv`]. Angles come back through a
/// degree conversion, so they can differ from the originals in the last bit.
pub fn parse_trajectory_csv(text: &str) -> Result<Trajectory<f64>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == TRAJECTORY_HEADER => {}
        _ => {
            return Err(Error::Parse {
                line: 1,
                key: "header".into(),
                reason: format!("expected `{TRAJECTORY_HEADER}`"),
            })
        }
    }
    let mut times = Vec::new();
    let mut states = Vec::new();
    let mut controls = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let cols: std::result::Result<Vec<f64>, _> = line.split(',').map(|c| c.trim().parse::<f64>()).collect();
        let cols = match cols {
            Ok(c) if c.len() == 6 => c,
            _ => {
                return Err(Error::Parse {
                    line: i + 1,
                    key: "row".into(),
                    reason: "expected six numbers".into(),
                })
            }
        };
        times.push(cols[0]);
        states.push(VehicleState::new(
            cols[1],
            cols[2],
            cols[3].to_radians(),
            cols[4].to_radians(),
        ));
        controls.push(cols[5].to_radians());
    }
    if times.is_empty() {
        return Err(Error::Parse {
            line: 2,
            key: "row".into(),
            reason: "no samples".into(),
        });
    }
    let dt = if times.len() > 1 { times[1] - times[0] } else { 0.0 };
    Ok(Trajectory {
        dt,
        times,
        states,
        controls,
    })
}

pub fn read_trajectory_csv(path: impl AsRef<Path>) -> Result<Trajectory<f64>> {
    let path = path.as_ref();
    parse_trajectory_csv(&fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
}

/// Cell centres and detection probabilities, bottom row first, preceded by
/// `#` lines giving the bounds and resolution.
pub fn coverage_csv(grid: &CoverageGrid<f64>) -> String {
    let d = &grid.domain;
    let mut out = String::new();
    let _ = writeln!(out, "# nx={} ny={}", grid.nx, grid.ny);
    let _ = writeln!(
        out,
        "# x_lo={} x_hi={} y_lo={} y_hi={}",
        d.lo[0], d.hi[0], d.lo[1], d.hi[1]
    );
    out.push_str("x,y,p\n");
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let (x, y) = grid.cell_center(i, j);
            let _ = writeln!(out, "{x},{y},{}", grid.get(i, j));
        }
    }
    out
}

/// Binary greymap of the grid, top row (largest y) first, 255 = detected.
pub fn coverage_pgm(grid: &CoverageGrid<f64>) -> Vec<u8> {
    let mut out = format!("P5 {} {} 255\n", grid.nx, grid.ny).into_bytes();
    out.reserve(grid.nx * grid.ny);
    for j in (0..grid.ny).rev() {
        for i in 0..grid.nx {
            out.push((grid.get(i, j).clamp(0.0, 1.0) * 255.0).round() as u8);
        }
    }
    out
}

/// `risk=10.00% mission=2088.00s compute=20.67s`; `compute=/` when the
/// timing is withheld.
pub fn summary_line(risk: f64, mission_time: f64, compute: Option<f64>) -> String {
    let compute = match compute {
        Some(c) => format!("{c:.2}s"),
        None => "/".into(),
    };
    format!("risk={:.2}% mission={mission_time:.2}s compute={compute}", 100.0 * risk)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleRecord {
    pub knot_times: Vec<f64>,
    pub rudder_values: Vec<f64>,
}

/// Everything needed to re-evaluate a plan: the scenario text it was made
/// for, the ripple setting and seed used, and the schedules.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanFile {
    pub scenario: String,
    pub ripples: bool,
    pub seed: u64,
    pub mission_time: f64,
    pub achieved_risk: f64,
    pub schedules: Vec<ScheduleRecord>,
}

impl PlanFile {
    pub fn new(
        scenario: String,
        ripples: bool,
        seed: u64,
        mission_time: f64,
        achieved_risk: f64,
        schedules: &[ControlSchedule<f64>],
    ) -> Self {
        Self {
            scenario,
            ripples,
            seed,
            mission_time,
            achieved_risk,
            schedules: schedules
                .iter()
                .map(|s| ScheduleRecord {
                    knot_times: s.knot_times().to_vec(),
                    rudder_values: s.rudder_values().to_vec(),
                })
                .collect(),
        }
    }

    pub fn control_schedules(&self) -> Result<Vec<ControlSchedule<f64>>> {
        self.schedules
            .iter()
            .map(|r| ControlSchedule::new(r.knot_times.clone(), r.rudder_values.clone()))
            .collect::<Result<Vec<_>>>()
            .map_err(|e| Error::PlanFormat(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("plan serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::PlanFormat(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::from_json(&fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }
}

/// A finished run, ready to be written out.
pub struct RunOutputs<'a> {
    pub label: &'a str,
    pub plan: Option<&'a PlanFile>,
    pub trajectories: &'a [Trajectory<f64>],
    pub report: &'a RiskReport<f64>,
    pub grid: &'a CoverageGrid<f64>,
    /// Wall-clock seconds, or `None` to keep the summary reproducible.
    pub compute: Option<f64>,
}

fn write(path: PathBuf, bytes: &[u8], written: &mut Vec<PathBuf>) -> Result<()> {
    fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
    written.push(path);
    Ok(())
}

/// Writes `trajectory_<i>.csv` (from 1), `coverage.csv`, `coverage.pgm`,
/// `summary.txt` and, when present, `plan.json` into `dir`, creating it if
/// needed. Returns the paths written.
pub fn write_outputs(dir: impl AsRef<Path>, run: &RunOutputs) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    for (i, t) in run.trajectories.iter().enumerate() {
        write(
            dir.join(format!("trajectory_{}.csv", i + 1)),
            trajectory_csv(t).as_bytes(),
            &mut written,
        )?;
    }
    write(
        dir.join("coverage.csv"),
        coverage_csv(run.grid).as_bytes(),
        &mut written,
    )?;
    write(dir.join("coverage.pgm"), &coverage_pgm(run.grid), &mut written)?;
    let summary = format!(
        "{}\n{}\nstd_error={:.4}% samples={}\n",
        run.label,
        summary_line(run.report.residual_risk, run.report.mission_time, run.compute),
        100.0 * run.report.std_error,
        run.report.per_target_detection.len()
    );
    write(dir.join("summary.txt"), summary.as_bytes(), &mut written)?;
    if let Some(plan) = run.plan {
        write(dir.join("plan.json"), plan.to_json().as_bytes(), &mut written)?;
    }
    Ok(written)
}
