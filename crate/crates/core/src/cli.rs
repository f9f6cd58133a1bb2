//! `mcm-plan` command line.
//!
//! Exit status: 0 on success, 1 on bad input or I/O failure, 2 when the
//! optimizer cannot meet the risk threshold inside the time bracket.

use crate::error::{Error, Result};
use crate::optimizer::{evaluate_fixed_plan, outer_min_time, plan_fixed_time, PlanResult};
use crate::output::{summary_line, write_outputs, PlanFile, RunOutputs};
use crate::risk::coverage_grid;
use crate::scenario::Scenario;
use crate::seabed::Domain;
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Debug, Parser)]
#[command(
    name = "mcm-plan",
    version,
    about = "Minimum-time search trajectories under a residual-risk ceiling"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Find the shortest mission meeting the risk threshold and write the plan.
    Plan(PlanArgs),
    /// Re-evaluate a stored plan, possibly under a different ripple setting.
    Evaluate(EvaluateArgs),
    /// Write only the coverage grid of a stored plan.
    Coverage(CoverageArgs),
    /// Sample the domain weighting functions for plotting.
    RecGrid(RecGridArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Switch {
    On,
    Off,
}

impl Switch {
    fn on(self) -> bool {
        self == Switch::On
    }
}

#[derive(Debug, Args)]
struct Common {
    /// Output directory, created if missing.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Override the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of targets for the reported risk.
    #[arg(long)]
    samples: Option<usize>,
    /// Sand ripples; defaults to the scenario (or plan) setting.
    #[arg(long, value_enum)]
    ripples: Option<Switch>,
    /// Write `compute=/` instead of the wall-clock time.
    #[arg(long)]
    omit_timing: bool,
}

#[derive(Debug, Args)]
struct PlanArgs {
    #[arg(long)]
    scenario: PathBuf,
    /// Skip the time search and only minimise risk at this mission time, s.
    #[arg(long)]
    fixed_time: Option<f64>,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    /// Plan file written by `plan`.
    #[arg(long)]
    plan: PathBuf,
    /// Use this scenario instead of the one stored in the plan.
    #[arg(long)]
    scenario: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct CoverageArgs {
    #[arg(long)]
    plan: PathBuf,
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Grid size as `NX,NY`; defaults to the scenario's.
    #[arg(long, value_parser = parse_resolution)]
    resolution: Option<(usize, usize)>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long, value_enum)]
    ripples: Option<Switch>,
}

#[derive(Debug, Args)]
struct RecGridArgs {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long, value_parser = parse_resolution)]
    resolution: Option<(usize, usize)>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

fn parse_resolution(s: &str) -> std::result::Result<(usize, usize), String> {
    let (a, b) = s.split_once(',').ok_or("expected NX,NY")?;
    let nx: usize = a.trim().parse().map_err(|_| format!("bad NX `{a}`"))?;
    let ny: usize = b.trim().parse().map_err(|_| format!("bad NY `{b}`"))?;
    if nx < 2 || ny < 2 {
        return Err("resolution must be at least 2,2".into());
    }
    Ok((nx, ny))
}

/// Runs the command line and returns the process exit status.
pub fn cli_main<I, A>(args: I) -> i32
where
    I: IntoIterator<Item = A>,
    A: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Plan(a) => plan(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Coverage(a) => coverage(a),
        Command::RecGrid(a) => rec_grid(a),
    };
    match result {
        Ok(()) => 0,
        Err(e @ Error::InfeasibleBracket { .. }) => {
            eprintln!("error: {e}");
            2
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn vehicles_label(n: usize) -> String {
    if n == 1 {
        "1 vehicle".into()
    } else {
        format!("{n} vehicles")
    }
}

fn ripples_label(on: bool) -> &'static str {
    if on {
        "ripples on"
    } else {
        "ripples off"
    }
}

fn plan(a: PlanArgs) -> Result<()> {
    let clock = Instant::now();
    let mut scenario = Scenario::load(&a.scenario)?;
    if let Some(seed) = a.common.seed {
        scenario.optimization.seed = seed;
    }
    let ripples = a.common.ripples.map_or(scenario.ripples, Switch::on);
    let mission = scenario.mission(ripples);
    let sample = scenario.optimization_sample()?;
    let result: PlanResult<f64> = match a.fixed_time {
        Some(t) if !(t > 0.0 && t.is_finite()) => return Err(Error::invalid("--fixed-time", "must be positive")),
        Some(t) => plan_fixed_time(&mission, &sample, t, &scenario.optimization)?,
        None => outer_min_time(&mission, &sample, &scenario.optimization)?,
    };
    let trajectories = mission.rollouts(&result.schedules)?;
    let report = mission.evaluate(&result.schedules, &scenario.report_sample(a.common.samples)?)?;
    let grid = coverage_grid(
        &trajectories,
        &mission.domain,
        scenario.grid_resolution,
        &mission.sensors,
        mission.field.as_ref(),
    )?;
    let plan_file = PlanFile::new(
        scenario.to_text(),
        ripples,
        scenario.seed(),
        result.mission_time,
        result.achieved_risk,
        &result.schedules,
    );
    let mode = if a.fixed_time.is_some() { "fixed time" } else { "plan" };
    let label = format!(
        "{}: {mode}, {}, {}",
        scenario.name,
        vehicles_label(scenario.vehicles.len()),
        ripples_label(ripples)
    );
    let compute = (!a.common.omit_timing).then(|| clock.elapsed().as_secs_f64());
    write_outputs(
        &a.common.out,
        &RunOutputs {
            label: &label,
            plan: Some(&plan_file),
            trajectories: &trajectories,
            report: &report,
            grid: &grid,
            compute,
        },
    )?;
    println!("{label}");
    println!("{}", summary_line(report.residual_risk, report.mission_time, compute));
    Ok(())
}

/// Scenario for a stored plan: an explicit file wins over the embedded text.
fn plan_scenario(plan: &PlanFile, path: Option<&Path>) -> Result<Scenario> {
    match path {
        Some(p) => Scenario::load(p),
        None => plan.scenario.parse(),
    }
}

fn evaluate(a: EvaluateArgs) -> Result<()> {
    let clock = Instant::now();
    let plan = PlanFile::load(&a.plan)?;
    let mut scenario = plan_scenario(&plan, a.scenario.as_deref())?;
    scenario.optimization.seed = a.common.seed.unwrap_or(plan.seed);
    let ripples = a.common.ripples.map_or(plan.ripples, Switch::on);
    let schedules = plan.control_schedules()?;
    let mission = scenario.mission(ripples);
    let report = evaluate_fixed_plan(
        &mission,
        &scenario.report_sample(a.common.samples)?,
        &schedules,
        plan.mission_time,
    )?;
    let trajectories = mission.rollouts(&schedules)?;
    let grid = coverage_grid(
        &trajectories,
        &mission.domain,
        scenario.grid_resolution,
        &mission.sensors,
        mission.field.as_ref(),
    )?;
    let label = format!(
        "{}: evaluate, {}, {}",
        scenario.name,
        vehicles_label(scenario.vehicles.len()),
        ripples_label(ripples)
    );
    let compute = (!a.common.omit_timing).then(|| clock.elapsed().as_secs_f64());
    write_outputs(
        &a.common.out,
        &RunOutputs {
            label: &label,
            plan: None,
            trajectories: &trajectories,
            report: &report,
            grid: &grid,
            compute,
        },
    )?;
    println!("{label}");
    println!("{}", summary_line(report.residual_risk, report.mission_time, compute));
    Ok(())
}

fn coverage(a: CoverageArgs) -> Result<()> {
    let plan = PlanFile::load(&a.plan)?;
    let scenario = plan_scenario(&plan, a.scenario.as_deref())?;
    let ripples = a.ripples.map_or(plan.ripples, Switch::on);
    let mission = scenario.mission(ripples);
    let trajectories = mission.rollouts(&plan.control_schedules()?)?;
    let grid = coverage_grid(
        &trajectories,
        &mission.domain,
        a.resolution.unwrap_or(scenario.grid_resolution),
        &mission.sensors,
        mission.field.as_ref(),
    )?;
    fs::create_dir_all(&a.out).map_err(|e| Error::io(&a.out, e))?;
    let csv = a.out.join("coverage.csv");
    fs::write(&csv, crate::output::coverage_csv(&grid)).map_err(|e| Error::io(&csv, e))?;
    let pgm = a.out.join("coverage.pgm");
    fs::write(&pgm, crate::output::coverage_pgm(&grid)).map_err(|e| Error::io(&pgm, e))?;
    println!("mean detection {:.4} on {}x{} cells", grid.mean(), grid.nx, grid.ny);
    Ok(())
}

fn rec_grid(a: RecGridArgs) -> Result<()> {
    let scenario = Scenario::load(&a.scenario)?;
    let field = scenario.ripple_field();
    let (nx, ny) = a.resolution.unwrap_or(scenario.grid_resolution);
    // a margin around the domain shows the soft edges
    let d = field.domain;
    let (mx, my) = (d.width() * 0.1, d.height() * 0.1);
    let view = Domain::new([d.lo[0] - mx, d.lo[1] - my], [d.hi[0] + mx, d.hi[1] + my])?;
    let across = field.ripple_angle - std::f64::consts::FRAC_PI_2;
    let along = field.ripple_angle;
    let mut grid = String::from("x,y,soft_rect,triangle_blend,dom_across,dom_along\n");
    for j in 0..ny {
        let y = view.lo[1] + view.height() * j as f64 / (ny - 1) as f64;
        for i in 0..nx {
            let x = view.lo[0] + view.width() * i as f64 / (nx - 1) as f64;
            let _ = writeln!(
                grid,
                "{x},{y},{},{},{},{}",
                field.soft_rect(x, y),
                field.triangle_blend(x, y),
                field.dom_weight(x, y, across),
                field.dom_weight(x, y, along)
            );
        }
    }
    let mut gain = String::from("heading_deg,gain\n");
    for k in 0..=720 {
        let heading = -180.0 + 0.5 * k as f64;
        let _ = writeln!(gain, "{heading},{}", field.heading_gain(heading.to_radians()));
    }
    fs::create_dir_all(&a.out).map_err(|e| Error::io(&a.out, e))?;
    for (name, text) in [("rec_grid.csv", grid), ("ripple_gain.csv", gain)] {
        let path = a.out.join(name);
        fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    }
    println!(
        "wrote rec_grid.csv ({nx}x{ny}) and ripple_gain.csv to {}",
        a.out.display()
    );
    Ok(())
}
