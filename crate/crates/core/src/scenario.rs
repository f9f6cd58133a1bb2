//! Scenario files.
//!
//! A scenario is a flat `key = value` text file; `#` starts a comment.
//! Lengths are written in domain units and multiplied by `length_scale`
//! (sensor constants stay in metres). Angles are written in degrees with a
//! `_deg` suffix, or in radians with `_rad`; turn rates likewise use
//! `_degps` / `_radps`.
//!
//! ```text
//! name = single vehicle
//! domain.lo = 5, 5
//! domain.hi = 25, 25
//! risk_threshold = 0.1
//! seed = 1
//! sensor.fom = 72                 # defaults for every vehicle
//! vehicle.1.start = 14.5, 15.0
//! vehicle.1.heading_deg = 0
//! vehicle.1.sensor.height = 25    # per-vehicle override
//! ```
//!
//! Required keys: `domain.lo`, `domain.hi`, `risk_threshold`, `seed` and
//! `vehicle.N.start` for each vehicle `N = 1, 2, ...`. Everything else has a
//! default; unknown keys are rejected.

use crate::dynamics::{VehicleParams, VehicleState};
use crate::error::{Error, Result};
use crate::optimizer::{Mission, OptimizationConfig, TimeStep, Vehicle};
use crate::risk::{sample_targets, TargetSample};
use crate::seabed::{DomForm, Domain, RippleField, RippleSide};
use crate::sensor::{LossForm, RangeMetric, SensorParams};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

#[derive(Debug, Clone, PartialEq)]
pub struct VehicleSpec {
    /// Start state in domain units (position is scaled by `length_scale`).
    pub start: VehicleState<f64>,
    pub params: VehicleParams<f64>,
    pub sensor: SensorParams<f64>,
}

/// Ripple settings; the field's rectangle is always the scenario domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RippleSettings {
    pub angle: f64,
    /// Edge slope per domain unit.
    pub edge_sharpness: f64,
    pub lobe_width: f64,
    pub side: RippleSide,
    pub form: DomForm,
}

impl Default for RippleSettings {
    fn default() -> Self {
        let f = RippleField::reference(Domain::<f64>::reference());
        Self {
            angle: f.ripple_angle,
            edge_sharpness: f.edge_sharpness,
            lobe_width: f.lobe_width,
            side: f.side,
            form: f.form,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    /// Search area in domain units.
    pub domain: Domain<f64>,
    pub length_scale: f64,
    pub mc_samples_opt: usize,
    pub mc_samples_report: usize,
    /// Fixed integration step, s. `None` uses `T_f / 1000`.
    pub dt: Option<f64>,
    /// Weight of the keep-inside penalty, per m^2. `None` disables it.
    pub confinement: Option<f64>,
    pub ripples: bool,
    pub ripple: RippleSettings,
    /// Also carries `risk_threshold` and `seed`.
    pub optimization: OptimizationConfig<f64>,
    pub grid_resolution: (usize, usize),
    pub vehicles: Vec<VehicleSpec>,
}

impl Scenario {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        text.parse()
    }

    pub fn seed(&self) -> u64 {
        self.optimization.seed
    }

    pub fn risk_threshold(&self) -> f64 {
        self.optimization.risk_threshold
    }

    /// Search area in metres.
    pub fn scaled_domain(&self) -> Domain<f64> {
        self.domain.scaled(self.length_scale)
    }

    pub fn ripple_field(&self) -> RippleField<f64> {
        RippleField {
            domain: self.scaled_domain(),
            ripple_angle: self.ripple.angle,
            edge_sharpness: self.ripple.edge_sharpness / self.length_scale,
            lobe_width: self.ripple.lobe_width,
            side: self.ripple.side,
            form: self.ripple.form,
        }
    }

    /// Optimization problem with the ripple field switched on or off.
    pub fn mission(&self, ripples: bool) -> Mission<f64, SensorParams<f64>> {
        let s = self.length_scale;
        Mission {
            domain: self.scaled_domain(),
            vehicles: self
                .vehicles
                .iter()
                .map(|v| Vehicle {
                    start: VehicleState {
                        x: v.start.x * s,
                        y: v.start.y * s,
                        ..v.start
                    },
                    params: v.params,
                })
                .collect(),
            sensors: self.vehicles.iter().map(|v| v.sensor).collect(),
            field: ripples.then(|| self.ripple_field()),
            time_step: match self.dt {
                Some(dt) => TimeStep::Fixed(dt),
                None => TimeStep::default(),
            },
            confinement: self.confinement,
        }
    }

    /// Targets the optimizer sees.
    pub fn optimization_sample(&self) -> Result<TargetSample<f64>> {
        sample_targets(&self.scaled_domain(), self.mc_samples_opt, self.seed())
    }

    /// Independent targets for reported risks; `count` overrides
    /// `mc_samples_report`.
    pub fn report_sample(&self, count: Option<usize>) -> Result<TargetSample<f64>> {
        let seed = self.seed().wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(1);
        sample_targets(&self.scaled_domain(), count.unwrap_or(self.mc_samples_report), seed)
    }

    pub fn validate(&self) -> Result<()> {
        self.domain.validate()?;
        if !(self.length_scale > 0.0 && self.length_scale.is_finite()) {
            return Err(Error::invalid("length_scale", "must be positive"));
        }
        if self.vehicles.is_empty() {
            return Err(Error::MissingKey("vehicle.1.start".into()));
        }
        if self.mc_samples_opt == 0 || self.mc_samples_report == 0 {
            return Err(Error::invalid("mc_samples", "must be positive"));
        }
        if self.grid_resolution.0 < 2 || self.grid_resolution.1 < 2 {
            return Err(Error::invalid("grid.resolution", "must be at least 2 x 2"));
        }
        self.optimization.validate()?;
        for (i, v) in self.vehicles.iter().enumerate() {
            v.params.validate()?;
            v.sensor.validate()?;
            if !self.domain.contains(v.start.x, v.start.y) {
                return Err(Error::invalid(
                    format!("vehicle.{}.start", i + 1),
                    "start lies outside the domain",
                ));
            }
        }
        self.mission(self.ripples).validate()
    }

    /// Text form; parsing it gives back an equal scenario.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        let o = &self.optimization;
        kv("name", self.name.clone());
        kv("domain.lo", pair(self.domain.lo));
        kv("domain.hi", pair(self.domain.hi));
        kv("length_scale", num(self.length_scale));
        kv("risk_threshold", num(o.risk_threshold));
        kv("seed", o.seed.to_string());
        kv("mc_samples_opt", self.mc_samples_opt.to_string());
        kv("mc_samples_report", self.mc_samples_report.to_string());
        if let Some(dt) = self.dt {
            kv("dt", num(dt));
        }
        if let Some(w) = self.confinement {
            kv("confinement", num(w));
        }
        kv(
            "grid.resolution",
            format!("{}, {}", self.grid_resolution.0, self.grid_resolution.1),
        );
        kv("ripples", if self.ripples { "on" } else { "off" }.into());
        let r = &self.ripple;
        let (k, v) = angle_entry("ripples.angle", r.angle, Unit::Degrees);
        kv(&k, v);
        kv("ripples.edge_sharpness", num(r.edge_sharpness));
        let (k, v) = angle_entry("ripples.width", r.lobe_width, Unit::Radians);
        kv(&k, v);
        kv("ripples.side", side_name(r.side).into());
        kv("ripples.dom_form", form_name(r.form).into());
        kv("opt.knots", o.knots.to_string());
        kv("opt.max_inner_iters", o.max_inner_iters.to_string());
        kv("opt.gradient_step", num(o.gradient_step));
        kv("opt.grad_tol", num(o.gradient_tolerance));
        kv("opt.time_lo", num(o.time_bracket.0));
        kv("opt.time_hi", num(o.time_bracket.1));
        kv("opt.time_tolerance", num(o.time_tolerance));
        kv("opt.restarts", o.restarts.to_string());
        for (i, v) in self.vehicles.iter().enumerate() {
            let p = format!("vehicle.{}.", i + 1);
            kv(&format!("{p}start"), pair([v.start.x, v.start.y]));
            let (k, val) = angle_entry(&format!("{p}heading"), v.start.psi, Unit::Degrees);
            kv(&k, val);
            let (k, val) = rate_entry(&format!("{p}turn_rate"), v.start.r);
            kv(&k, val);
            kv(&format!("{p}speed"), num(v.params.speed));
            kv(&format!("{p}nomoto_k"), num(v.params.nomoto_k));
            kv(&format!("{p}nomoto_t"), num(v.params.nomoto_t));
            let (k, val) = angle_entry(&format!("{p}rudder_limit"), v.params.rudder_limit, Unit::Degrees);
            kv(&k, val);
            let s = &v.sensor;
            let q = format!("{p}sensor.");
            kv(&format!("{q}scan_rate"), num(s.scan_rate));
            kv(&format!("{q}fom"), num(s.fom));
            kv(&format!("{q}sigma"), num(s.sigma));
            kv(&format!("{q}atten_a"), num(s.attenuation));
            let (k, val) = angle_entry(&format!("{q}alpha_fov"), s.alpha_fov, Unit::Degrees);
            kv(&k, val);
            kv(&format!("{q}p_alpha"), num(s.p_alpha));
            let (k, val) = angle_entry(&format!("{q}eps_fov"), s.eps_fov, Unit::Degrees);
            kv(&k, val);
            let (k, val) = angle_entry(&format!("{q}eps_de"), s.eps_de, Unit::Degrees);
            kv(&k, val);
            kv(&format!("{q}p_eps"), num(s.p_eps));
            kv(&format!("{q}height"), num(s.height));
            kv(&format!("{q}range_metric"), metric_name(s.range_metric).into());
            kv(&format!("{q}tl_form"), loss_name(s.loss_form).into());
        }
        out
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut e = Entries::read(text)?;
        let lo: [f64; 2] = e.required("domain.lo", parse_pair)?;
        let hi: [f64; 2] = e.required("domain.hi", parse_pair)?;
        let risk_threshold: f64 = e.required("risk_threshold", parse_num)?;
        e.check(
            "risk_threshold",
            risk_threshold > 0.0 && risk_threshold < 1.0,
            "must lie in (0, 1)",
        )?;
        let seed: u64 = e.required("seed", parse_int)?;

        let name = e
            .optional("name", |s| Ok(s.to_string()))?
            .unwrap_or_else(|| "scenario".into());
        let domain = Domain::new(lo, hi).map_err(|_| e.error("domain.hi", "must exceed domain.lo componentwise"))?;
        let length_scale = e.optional("length_scale", parse_num)?.unwrap_or(1.0);
        e.check(
            "length_scale",
            length_scale > 0.0 && length_scale.is_finite(),
            "must be positive",
        )?;
        let mc_samples_opt = e.optional("mc_samples_opt", parse_int)?.unwrap_or(4096);
        e.check("mc_samples_opt", mc_samples_opt > 0, "must be positive")?;
        let mc_samples_report = e.optional("mc_samples_report", parse_int)?.unwrap_or(65536);
        e.check("mc_samples_report", mc_samples_report > 0, "must be positive")?;
        let dt = e.optional("dt", parse_num)?;
        e.check("dt", dt.is_none_or(|d| d > 0.0 && d.is_finite()), "must be positive")?;
        let confinement = e.optional("confinement", parse_num)?;
        e.check(
            "confinement",
            confinement.is_none_or(|w| w >= 0.0 && w.is_finite()),
            "must be nonnegative",
        )?;
        let grid_resolution = e
            .optional("grid.resolution", |s| {
                let [nx, ny] = parse_list::<usize>(s)?;
                Ok((nx, ny))
            })?
            .unwrap_or((101, 101));
        e.check(
            "grid.resolution",
            grid_resolution.0 >= 2 && grid_resolution.1 >= 2,
            "must be at least 2, 2",
        )?;

        let ripples = e.optional("ripples", parse_switch)?.unwrap_or(false);
        let dr = RippleSettings::default();
        let ripple = RippleSettings {
            angle: e.angle("ripples.angle")?.unwrap_or(dr.angle),
            edge_sharpness: e
                .optional("ripples.edge_sharpness", parse_num)?
                .unwrap_or(dr.edge_sharpness),
            lobe_width: e.angle("ripples.width")?.unwrap_or(dr.lobe_width),
            side: e.optional("ripples.side", parse_side)?.unwrap_or(dr.side),
            form: e.optional("ripples.dom_form", parse_form)?.unwrap_or(dr.form),
        };
        e.check(
            "ripples.edge_sharpness",
            ripple.edge_sharpness > 0.0,
            "must be positive",
        )?;
        e.check("ripples.width", ripple.lobe_width > 0.0, "must be positive")?;

        let d = OptimizationConfig::<f64>::default();
        let time_lo = e.optional("opt.time_lo", parse_num)?.unwrap_or(d.time_bracket.0);
        let time_hi = e.optional("opt.time_hi", parse_num)?.unwrap_or(d.time_bracket.1);
        e.check(
            "opt.time_hi",
            time_lo > 0.0 && time_lo < time_hi,
            "need 0 < opt.time_lo < opt.time_hi",
        )?;
        let optimization = OptimizationConfig {
            risk_threshold,
            knots: e.optional("opt.knots", parse_int)?.unwrap_or(d.knots),
            max_inner_iters: e
                .optional("opt.max_inner_iters", parse_int)?
                .unwrap_or(d.max_inner_iters),
            gradient_step: e.optional("opt.gradient_step", parse_num)?.unwrap_or(d.gradient_step),
            gradient_tolerance: e.optional("opt.grad_tol", parse_num)?.unwrap_or(d.gradient_tolerance),
            time_bracket: (time_lo, time_hi),
            time_tolerance: e.optional("opt.time_tolerance", parse_num)?.unwrap_or(d.time_tolerance),
            restarts: e.optional("opt.restarts", parse_int)?.unwrap_or(d.restarts),
            seed,
        };
        e.check("opt.knots", optimization.knots >= 2, "at least 2")?;
        e.check(
            "opt.gradient_step",
            optimization.gradient_step > 0.0,
            "must be positive",
        )?;
        e.check(
            "opt.time_tolerance",
            optimization.time_tolerance > 0.0,
            "must be positive",
        )?;

        let shared = e.sensor("sensor.", SensorParams::reference())?;
        let count = e.vehicle_count();
        if count == 0 {
            return Err(Error::MissingKey("vehicle.1.start".into()));
        }
        let mut vehicles = Vec::with_capacity(count);
        for n in 1..=count {
            let p = format!("vehicle.{n}.");
            let [x, y] = e.required(&format!("{p}start"), parse_pair)?;
            if !domain.contains(x, y) {
                return Err(e.error(&format!("{p}start"), "start lies outside the domain"));
            }
            let psi = e.angle(&format!("{p}heading"))?.unwrap_or(0.0);
            let r = e.rate(&format!("{p}turn_rate"))?.unwrap_or(0.0);
            let dp = VehicleParams::<f64>::reference();
            let params = VehicleParams {
                speed: e.optional(&format!("{p}speed"), parse_num)?.unwrap_or(dp.speed),
                nomoto_k: e.optional(&format!("{p}nomoto_k"), parse_num)?.unwrap_or(dp.nomoto_k),
                nomoto_t: e.optional(&format!("{p}nomoto_t"), parse_num)?.unwrap_or(dp.nomoto_t),
                rudder_limit: e.angle(&format!("{p}rudder_limit"))?.unwrap_or(dp.rudder_limit),
            };
            e.check(&format!("{p}speed"), params.speed > 0.0, "must be positive")?;
            e.check(&format!("{p}nomoto_t"), params.nomoto_t > 0.0, "must be positive")?;
            e.check(
                &format!("{p}rudder_limit"),
                params.rudder_limit > 0.0,
                "must be positive",
            )?;
            let sensor = e.sensor(&format!("{p}sensor."), shared)?;
            vehicles.push(VehicleSpec {
                start: VehicleState::new(x, y, psi, r),
                params,
                sensor,
            });
        }
        e.finish()?;

        let scenario = Scenario {
            name,
            domain,
            length_scale,
            mc_samples_opt,
            mc_samples_report,
            dt,
            confinement,
            ripples,
            ripple,
            optimization,
            grid_resolution,
            vehicles,
        };
        scenario.validate()?;
        Ok(scenario)
    }
}

#[derive(Clone, Copy)]
enum Unit {
    Degrees,
    Radians,
}

struct Entry {
    line: usize,
    value: String,
}

/// Parsed lines not yet consumed, plus the line of every key seen so
/// errors can point back into the file.
struct Entries {
    pending: BTreeMap<String, Entry>,
    lines: BTreeMap<String, usize>,
}

impl Entries {
    fn read(text: &str) -> Result<Self> {
        let mut pending = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| Error::Parse {
                line,
                key: content.to_string(),
                reason: "expected `key = value`".into(),
            })?;
            let key = key.trim().to_string();
            if key.is_empty() {
                return Err(Error::Parse {
                    line,
                    key,
                    reason: "empty key".into(),
                });
            }
            if let Some(prev) = pending.get(&key) {
                let prev: &Entry = prev;
                return Err(Error::Parse {
                    line,
                    key,
                    reason: format!("duplicate of line {}", prev.line),
                });
            }
            pending.insert(
                key,
                Entry {
                    line,
                    value: value.trim().to_string(),
                },
            );
        }
        let lines = pending.iter().map(|(k, v)| (k.clone(), v.line)).collect();
        Ok(Self { pending, lines })
    }

    fn error(&self, key: &str, reason: impl Into<String>) -> Error {
        Error::Parse {
            line: self.lines.get(key).copied().unwrap_or(0),
            key: key.to_string(),
            reason: reason.into(),
        }
    }

    fn check(&self, key: &str, ok: bool, reason: &str) -> Result<()> {
        if ok {
            Ok(())
        } else {
            Err(self.error(key, reason))
        }
    }

    fn optional<T>(&mut self, key: &str, parse: impl Fn(&str) -> std::result::Result<T, String>) -> Result<Option<T>> {
        match self.pending.remove(key) {
            None => Ok(None),
            Some(entry) => parse(&entry.value).map(Some).map_err(|reason| Error::Parse {
                line: entry.line,
                key: key.to_string(),
                reason,
            }),
        }
    }

    fn required<T>(&mut self, key: &str, parse: impl Fn(&str) -> std::result::Result<T, String>) -> Result<T> {
        self.optional(key, parse)?
            .ok_or_else(|| Error::MissingKey(key.to_string()))
    }

    fn either(&mut self, a: &str, b: &str, to_rad: f64) -> Result<Option<f64>> {
        let x = self.optional(a, parse_num)?;
        let y = self.optional(b, parse_num)?;
        match (x, y) {
            (Some(_), Some(_)) => Err(self.error(b, format!("conflicts with `{a}`"))),
            (Some(v), None) => Ok(Some(v * to_rad)),
            (None, v) => Ok(v),
        }
    }

    /// `base_deg` or `base_rad`, returned in radians.
    fn angle(&mut self, base: &str) -> Result<Option<f64>> {
        let deg = format!("{base}_deg");
        let rad = format!("{base}_rad");
        match (self.optional(&deg, parse_num)?, self.optional(&rad, parse_num)?) {
            (Some(_), Some(_)) => Err(self.error(&rad, format!("conflicts with `{deg}`"))),
            (Some(v), None) => Ok(Some(v.to_radians())),
            (None, v) => Ok(v),
        }
    }

    fn rate(&mut self, base: &str) -> Result<Option<f64>> {
        self.either(&format!("{base}_degps"), &format!("{base}_radps"), 1f64.to_radians())
    }

    fn sensor(&mut self, prefix: &str, base: SensorParams<f64>) -> Result<SensorParams<f64>> {
        let k = |name: &str| format!("{prefix}{name}");
        let s = SensorParams {
            scan_rate: self.optional(&k("scan_rate"), parse_num)?.unwrap_or(base.scan_rate),
            fom: self.optional(&k("fom"), parse_num)?.unwrap_or(base.fom),
            sigma: self.optional(&k("sigma"), parse_num)?.unwrap_or(base.sigma),
            attenuation: self.optional(&k("atten_a"), parse_num)?.unwrap_or(base.attenuation),
            alpha_fov: self.angle(&k("alpha_fov"))?.unwrap_or(base.alpha_fov),
            p_alpha: self.optional(&k("p_alpha"), parse_num)?.unwrap_or(base.p_alpha),
            eps_fov: self.angle(&k("eps_fov"))?.unwrap_or(base.eps_fov),
            eps_de: self.angle(&k("eps_de"))?.unwrap_or(base.eps_de),
            p_eps: self.optional(&k("p_eps"), parse_num)?.unwrap_or(base.p_eps),
            height: self.optional(&k("height"), parse_num)?.unwrap_or(base.height),
            range_metric: self
                .optional(&k("range_metric"), parse_metric)?
                .unwrap_or(base.range_metric),
            loss_form: self.optional(&k("tl_form"), parse_loss)?.unwrap_or(base.loss_form),
        };
        let positive = [
            ("scan_rate", s.scan_rate),
            ("sigma", s.sigma),
            ("alpha_fov", s.alpha_fov),
            ("p_alpha", s.p_alpha),
            ("eps_fov", s.eps_fov),
            ("p_eps", s.p_eps),
            ("height", s.height),
        ];
        for (name, v) in positive {
            self.check(&k(name), v > 0.0, "must be positive")?;
        }
        self.check(&k("atten_a"), s.attenuation >= 0.0, "must be nonnegative")?;
        Ok(s)
    }

    /// Highest `N` among the `vehicle.N.*` keys.
    fn vehicle_count(&self) -> usize {
        self.pending
            .keys()
            .filter_map(|k| k.strip_prefix("vehicle.")?.split('.').next()?.parse::<usize>().ok())
            .max()
            .unwrap_or(0)
    }

    fn finish(self) -> Result<()> {
        match self.pending.iter().min_by_key(|(_, e)| e.line) {
            None => Ok(()),
            Some((key, entry)) => Err(Error::Parse {
                line: entry.line,
                key: key.clone(),
                reason: "unknown key".into(),
            }),
        }
    }
}

fn parse_num(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("`{s}` is not finite"))
    }
}

fn parse_int<T: FromStr>(s: &str) -> std::result::Result<T, String> {
    s.parse().map_err(|_| format!("`{s}` is not a nonnegative integer"))
}

fn parse_list<T: FromStr>(s: &str) -> std::result::Result<[T; 2], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 2 {
        return Err(format!("expected two comma-separated values, got `{s}`"));
    }
    let a = parts[0].parse().map_err(|_| format!("bad value `{}`", parts[0]))?;
    let b = parts[1].parse().map_err(|_| format!("bad value `{}`", parts[1]))?;
    Ok([a, b])
}

fn parse_pair(s: &str) -> std::result::Result<[f64; 2], String> {
    let [a, b] = parse_list::<f64>(s)?;
    if a.is_finite() && b.is_finite() {
        Ok([a, b])
    } else {
        Err(format!("`{s}` is not finite"))
    }
}

fn parse_switch(s: &str) -> std::result::Result<bool, String> {
    match s {
        "on" | "true" => Ok(true),
        "off" | "false" => Ok(false),
        _ => Err(format!("expected on or off, got `{s}`")),
    }
}

fn parse_side(s: &str) -> std::result::Result<RippleSide, String> {
    match s {
        "upper_left" => Ok(RippleSide::UpperLeft),
        "lower_right" => Ok(RippleSide::LowerRight),
        _ => Err(format!("expected upper_left or lower_right, got `{s}`")),
    }
}

fn parse_form(s: &str) -> std::result::Result<DomForm, String> {
    match s {
        "partition_of_unity" => Ok(DomForm::PartitionOfUnity),
        "literal" => Ok(DomForm::Literal),
        _ => Err(format!("expected partition_of_unity or literal, got `{s}`")),
    }
}

fn parse_metric(s: &str) -> std::result::Result<RangeMetric, String> {
    match s {
        "euclidean" => Ok(RangeMetric::Euclidean),
        "l1" => Ok(RangeMetric::L1),
        _ => Err(format!("expected euclidean or l1, got `{s}`")),
    }
}

fn parse_loss(s: &str) -> std::result::Result<LossForm, String> {
    match s {
        "standard" => Ok(LossForm::Standard),
        "literal" => Ok(LossForm::Literal),
        _ => Err(format!("expected standard or literal, got `{s}`")),
    }
}

fn side_name(s: RippleSide) -> &'static str {
    match s {
        RippleSide::UpperLeft => "upper_left",
        RippleSide::LowerRight => "lower_right",
    }
}

fn form_name(f: DomForm) -> &'static str {
    match f {
        DomForm::PartitionOfUnity => "partition_of_unity",
        DomForm::Literal => "literal",
    }
}

fn metric_name(m: RangeMetric) -> &'static str {
    match m {
        RangeMetric::Euclidean => "euclidean",
        RangeMetric::L1 => "l1",
    }
}

fn loss_name(l: LossForm) -> &'static str {
    match l {
        LossForm::Standard => "standard",
        LossForm::Literal => "literal",
    }
}

/// Shortest decimal that parses back to the same bits.
fn num(v: f64) -> String {
    format!("{v}")
}

fn pair(v: [f64; 2]) -> String {
    format!("{}, {}", num(v[0]), num(v[1]))
}

/// Writes the angle in the preferred unit when that survives the round
/// trip through the parser's conversion, radians otherwise.
fn angle_entry(base: &str, rad: f64, preferred: Unit) -> (String, String) {
    let deg = rad.to_degrees();
    let exact = deg.to_string().parse::<f64>().map(f64::to_radians) == Ok(rad);
    match preferred {
        Unit::Degrees if exact => (format!("{base}_deg"), num(deg)),
        _ => (format!("{base}_rad"), num(rad)),
    }
}

fn rate_entry(base: &str, radps: f64) -> (String, String) {
    let degps = radps.to_degrees();
    if (num(degps).parse::<f64>().unwrap() * 1f64.to_radians()) == radps {
        (format!("{base}_degps"), num(degps))
    } else {
        (format!("{base}_radps"), num(radps))
    }
}
