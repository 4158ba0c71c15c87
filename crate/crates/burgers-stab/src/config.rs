//! Experiment configuration: a plain sectioned key-value format.
//!
//! ```text
//! [experiment]
//! id = ex1
//! mode = linear              # linear | nonlinear
//! tables = stabilized        # stabilized | uncontrolled | both
//!
//! [physics]
//! eta = 1
//! nu0 = 0
//! v = 1, 1
//! omega = 24
//!
//! [steady_state]
//! ys = x1*x2*(1-x1)*(1-x2)
//!
//! [initial]
//! y0 = sin(pi*x1)*sin(pi*x2)   # or z0 = <expr>, exactly one of the two
//!
//! [control]
//! enabled = true
//! region = full                # full | rect x1a x1b x2a x2b
//!
//! [time]
//! dt_rule = h_over_2           # h_over_2 | fixed
//! dt = 0.001                   # required iff dt_rule = fixed
//! T = 0.1
//!
//! [mesh]
//! levels = 2, 3, 4, 5
//!
//! [forcing]
//! kind = none                  # none | manufactured
//! exact = exp(t)*sin(pi*x1)*sin(pi*x2)   # required iff manufactured
//!
//! [output]
//! directory = out/ex1
//! ```
//!
//! `#` starts a comment. Unknown sections or keys are hard errors.
//! Expressions stay as strings here and are parsed where used;
//! `parse(print(config))` reproduces the configuration exactly.

use crate::assembly::{ControlRegion, PhysicsParams};
use crate::error::{Error, Result};
use crate::expr;
use crate::timestepping::DtRule;
use std::collections::BTreeMap;
use std::fmt::Write as _;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Linear,
    Nonlinear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tables {
    Stabilized,
    Uncontrolled,
    Both,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub id: String,
    pub mode: Mode,
    pub tables: Tables,
    pub eta: f64,
    pub nu0: f64,
    pub v: [f64; 2],
    pub omega: f64,
    pub ys: String,
    /// exactly one of `y0` (physical initial state, shifted internally)
    /// or `z0` (already-shifted initial state)
    pub y0: Option<String>,
    pub z0: Option<String>,
    pub control_enabled: bool,
    pub control_region: ControlRegion,
    pub dt_rule: DtRule,
    pub t_final: f64,
    pub levels: Vec<u32>,
    pub forcing_exact: Option<String>,
    pub output_dir: String,
}

impl ExperimentConfig {
    pub fn physics(&self) -> PhysicsParams {
        PhysicsParams {
            eta: self.eta,
            nu0: self.nu0,
            v: self.v,
            omega: self.omega,
        }
    }

    /// Shifted initial state as an expression: `z0` directly, or
    /// `y0 - ys` composed symbolically.
    pub fn initial_shifted(&self) -> Result<expr::Expr> {
        match (&self.z0, &self.y0) {
            (Some(z0), None) => expr::parse(z0),
            (None, Some(y0)) => Ok(expr::Expr::sub(expr::parse(y0)?, expr::parse(&self.ys)?)),
            _ => Err(Error::Config(
                "[initial] must set exactly one of y0 or z0".into(),
            )),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.physics().validate()?;
        if self.levels.is_empty() {
            return Err(Error::Config("[mesh] levels must not be empty".into()));
        }
        for w in self.levels.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::Config(format!(
                    "[mesh] levels must be strictly increasing, got {:?}",
                    self.levels
                )));
            }
        }
        for &k in &self.levels {
            if !(1..=crate::mesh::MAX_LEVEL).contains(&k) {
                return Err(Error::Config(format!(
                    "[mesh] level {k} outside 1..={}",
                    crate::mesh::MAX_LEVEL
                )));
            }
        }
        if !(self.t_final > 0.0) {
            return Err(Error::Config("[time] T must be positive".into()));
        }
        if let DtRule::Fixed(dt) = self.dt_rule {
            if !(dt > 0.0) {
                return Err(Error::Config("[time] dt must be positive".into()));
            }
        }
        if matches!(self.tables, Tables::Stabilized | Tables::Both) && !self.control_enabled {
            return Err(Error::Config(
                "stabilized tables require control.enabled = true".into(),
            ));
        }
        if let ControlRegion::Rect { x1, x2 } = &self.control_region {
            if x1[0] > x1[1] || x2[0] > x2[1] {
                return Err(Error::Config(
                    "[control] rect bounds must satisfy a <= b per axis".into(),
                ));
            }
        }
        // expressions must parse
        expr::parse(&self.ys)
            .map_err(|e| Error::Config(format!("[steady_state] ys: {e}")))?;
        self.initial_shifted()?;
        if let Some(g) = &self.forcing_exact {
            expr::parse(g).map_err(|e| Error::Config(format!("[forcing] exact: {e}")))?;
        }
        Ok(())
    }

    /// Canonical rendering; parsing it back reproduces the config.
    pub fn print(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "[experiment]");
        let _ = writeln!(s, "id = {}", self.id);
        let _ = writeln!(
            s,
            "mode = {}",
            match self.mode {
                Mode::Linear => "linear",
                Mode::Nonlinear => "nonlinear",
            }
        );
        let _ = writeln!(
            s,
            "tables = {}",
            match self.tables {
                Tables::Stabilized => "stabilized",
                Tables::Uncontrolled => "uncontrolled",
                Tables::Both => "both",
            }
        );
        let _ = writeln!(s, "\n[domain]");
        let _ = writeln!(s, "kind = unit_square");
        let _ = writeln!(s, "\n[physics]");
        let _ = writeln!(s, "eta = {}", self.eta);
        let _ = writeln!(s, "nu0 = {}", self.nu0);
        let _ = writeln!(s, "v = {}, {}", self.v[0], self.v[1]);
        let _ = writeln!(s, "omega = {}", self.omega);
        let _ = writeln!(s, "\n[steady_state]");
        let _ = writeln!(s, "ys = {}", self.ys);
        let _ = writeln!(s, "\n[initial]");
        if let Some(y0) = &self.y0 {
            let _ = writeln!(s, "y0 = {y0}");
        }
        if let Some(z0) = &self.z0 {
            let _ = writeln!(s, "z0 = {z0}");
        }
        let _ = writeln!(s, "\n[control]");
        let _ = writeln!(s, "enabled = {}", self.control_enabled);
        match &self.control_region {
            ControlRegion::Full => {
                let _ = writeln!(s, "region = full");
            }
            ControlRegion::Rect { x1, x2 } => {
                let _ = writeln!(s, "region = rect {} {} {} {}", x1[0], x1[1], x2[0], x2[1]);
            }
        }
        let _ = writeln!(s, "\n[time]");
        match self.dt_rule {
            DtRule::HOver2 => {
                let _ = writeln!(s, "dt_rule = h_over_2");
            }
            DtRule::Fixed(dt) => {
                let _ = writeln!(s, "dt_rule = fixed");
                let _ = writeln!(s, "dt = {dt}");
            }
        }
        let _ = writeln!(s, "T = {}", self.t_final);
        let _ = writeln!(s, "\n[mesh]");
        let levels: Vec<String> = self.levels.iter().map(u32::to_string).collect();
        let _ = writeln!(s, "levels = {}", levels.join(", "));
        let _ = writeln!(s, "\n[forcing]");
        match &self.forcing_exact {
            None => {
                let _ = writeln!(s, "kind = none");
            }
            Some(exact) => {
                let _ = writeln!(s, "kind = manufactured");
                let _ = writeln!(s, "exact = {exact}");
            }
        }
        let _ = writeln!(s, "\n[output]");
        let _ = writeln!(s, "directory = {}", self.output_dir);
        s
    }
}

/// Raw sectioned key-value scan with duplicate detection.
fn scan_sections(text: &str) -> Result<BTreeMap<String, BTreeMap<String, String>>> {
    let mut sections: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
    let mut current: Option<String> = None;
    for (lineno, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            let name = name.trim().to_string();
            if sections.contains_key(&name) {
                return Err(Error::Config(format!(
                    "line {}: duplicate section [{name}]",
                    lineno + 1
                )));
            }
            sections.insert(name.clone(), BTreeMap::new());
            current = Some(name);
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Config(format!(
                "line {}: expected 'key = value', got '{line}'",
                lineno + 1
            )));
        };
        let Some(section) = &current else {
            return Err(Error::Config(format!(
                "line {}: key outside any section",
                lineno + 1
            )));
        };
        let key = key.trim().to_string();
        let entry = sections.get_mut(section).unwrap();
        if entry.contains_key(&key) {
            return Err(Error::Config(format!(
                "line {}: duplicate key '{key}' in [{section}]",
                lineno + 1
            )));
        }
        entry.insert(key, value.trim().to_string());
    }
    Ok(sections)
}

struct Section<'a> {
    name: &'a str,
    entries: BTreeMap<String, String>,
}

impl<'a> Section<'a> {
    fn take(&mut self, key: &str) -> Option<String> {
        self.entries.remove(key)
    }

    fn require(&mut self, key: &str) -> Result<String> {
        self.take(key)
            .ok_or_else(|| Error::Config(format!("[{}] missing key '{key}'", self.name)))
    }

    fn finish(self) -> Result<()> {
        if let Some(key) = self.entries.keys().next() {
            return Err(Error::Config(format!(
                "[{}] unknown key '{key}'",
                self.name
            )));
        }
        Ok(())
    }
}

fn parse_f64(section: &str, key: &str, value: &str) -> Result<f64> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("[{section}] {key}: not a number: '{value}'")))
}

/// Parse a configuration from text.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut sections = scan_sections(text)?;
    let known = [
        "experiment",
        "domain",
        "physics",
        "steady_state",
        "initial",
        "control",
        "time",
        "mesh",
        "forcing",
        "output",
    ];
    for name in sections.keys() {
        if !known.contains(&name.as_str()) {
            return Err(Error::Config(format!("unknown section [{name}]")));
        }
    }

    // the domain is fixed; the section is accepted for completeness
    if let Some(entries) = sections.remove("domain") {
        let mut s = Section {
            name: "domain",
            entries,
        };
        let kind = s.require("kind")?;
        if kind != "unit_square" {
            return Err(Error::Config(format!(
                "[domain] kind must be unit_square, got '{kind}'"
            )));
        }
        s.finish()?;
    }
    let mut section = |name: &'static str| -> Result<Section<'static>> {
        let entries = sections
            .remove(name)
            .ok_or_else(|| Error::Config(format!("missing section [{name}]")))?;
        Ok(Section {
            name,
            entries,
        })
    };

    let mut s = section("experiment")?;
    let id = s.require("id")?;
    let mode = match s.require("mode")?.as_str() {
        "linear" => Mode::Linear,
        "nonlinear" => Mode::Nonlinear,
        other => {
            return Err(Error::Config(format!(
                "[experiment] mode must be linear or nonlinear, got '{other}'"
            )))
        }
    };
    let tables = match s.require("tables")?.as_str() {
        "stabilized" => Tables::Stabilized,
        "uncontrolled" => Tables::Uncontrolled,
        "both" => Tables::Both,
        other => {
            return Err(Error::Config(format!(
                "[experiment] tables must be stabilized, uncontrolled or both, got '{other}'"
            )))
        }
    };
    s.finish()?;

    let mut s = section("physics")?;
    let eta = parse_f64("physics", "eta", &s.require("eta")?)?;
    let nu0 = parse_f64("physics", "nu0", &s.require("nu0")?)?;
    let v_raw = s.require("v")?;
    let parts: Vec<&str> = v_raw.split(',').map(str::trim).collect();
    if parts.len() != 2 {
        return Err(Error::Config(format!(
            "[physics] v must be 'vx, vy', got '{v_raw}'"
        )));
    }
    let v = [
        parse_f64("physics", "v", parts[0])?,
        parse_f64("physics", "v", parts[1])?,
    ];
    let omega = parse_f64("physics", "omega", &s.require("omega")?)?;
    s.finish()?;

    let mut s = section("steady_state")?;
    let ys = s.require("ys")?;
    s.finish()?;

    let mut s = section("initial")?;
    let y0 = s.take("y0");
    let z0 = s.take("z0");
    s.finish()?;

    let mut s = section("control")?;
    let enabled_raw = s.require("enabled")?;
    let control_enabled = match enabled_raw.as_str() {
        "true" => true,
        "false" => false,
        other => {
            return Err(Error::Config(format!(
                "[control] enabled must be true or false, got '{other}'"
            )))
        }
    };
    let region_raw = s.require("region")?;
    let control_region = if region_raw == "full" {
        ControlRegion::Full
    } else if let Some(rest) = region_raw.strip_prefix("rect") {
        let nums: Vec<&str> = rest.split_whitespace().collect();
        if nums.len() != 4 {
            return Err(Error::Config(format!(
                "[control] region rect needs four bounds, got '{region_raw}'"
            )));
        }
        ControlRegion::Rect {
            x1: [
                parse_f64("control", "region", nums[0])?,
                parse_f64("control", "region", nums[1])?,
            ],
            x2: [
                parse_f64("control", "region", nums[2])?,
                parse_f64("control", "region", nums[3])?,
            ],
        }
    } else {
        return Err(Error::Config(format!(
            "[control] region must be 'full' or 'rect a b c d', got '{region_raw}'"
        )));
    };
    s.finish()?;

    let mut s = section("time")?;
    let dt_rule = match s.require("dt_rule")?.as_str() {
        "h_over_2" => DtRule::HOver2,
        "fixed" => {
            let dt = parse_f64("time", "dt", &s.require("dt")?)?;
            DtRule::Fixed(dt)
        }
        other => {
            return Err(Error::Config(format!(
                "[time] dt_rule must be h_over_2 or fixed, got '{other}'"
            )))
        }
    };
    let t_final = parse_f64("time", "T", &s.require("T")?)?;
    s.finish()?;

    let mut s = section("mesh")?;
    let levels_raw = s.require("levels")?;
    let mut levels = Vec::new();
    for part in levels_raw.split(',') {
        let part = part.trim();
        let k: u32 = part
            .parse()
            .map_err(|_| Error::Config(format!("[mesh] levels: bad level '{part}'")))?;
        levels.push(k);
    }
    s.finish()?;

    let mut s = section("forcing")?;
    let forcing_exact = match s.require("kind")?.as_str() {
        "none" => None,
        "manufactured" => Some(s.require("exact")?),
        other => {
            return Err(Error::Config(format!(
                "[forcing] kind must be none or manufactured, got '{other}'"
            )))
        }
    };
    s.finish()?;

    let mut s = section("output")?;
    let output_dir = s.require("directory")?;
    s.finish()?;

    let config = ExperimentConfig {
        id,
        mode,
        tables,
        eta,
        nu0,
        v,
        omega,
        ys,
        y0,
        z0,
        control_enabled,
        control_region,
        dt_rule,
        t_final,
        levels,
        forcing_exact,
        output_dir,
    };
    config.validate()?;
    Ok(config)
}

/// Read and parse a configuration file.
pub fn load_config(path: &std::path::Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        Error::Config(format!("cannot read config '{}': {e}", path.display()))
    })?;
    parse_config(&text)
}
