//! Run configuration: a flat `key = value` format with `[section]` headers.
//!
//! ```text
//! [run]
//! scenario = two-qutrit
//! solver = null-space
//! format = csv
//! output = grid.csv
//!
//! [params]
//! lambda = 1.0
//!
//! [sweep]
//! axis1_name = beta_ls
//! axis1_start = -0.04
//! axis1_stop = 0.04
//! axis1_count = 21
//! ```
//!
//! Any key can be overridden by an environment variable
//! `SYNTHBATH_<SECTION>_<KEY>` in upper case, e.g. `SYNTHBATH_PARAMS_BETA_H`
//! or `SYNTHBATH_SWEEP_AXIS1_COUNT`.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::ValueEnum;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lindblad::SystemSpec;
use crate::scenarios::{
    build_driven_qutrit, build_engine, build_single_qutrit, build_two_qutrit, DrivenQutritParams,
    EngineParams, SingleQutritParams, TwoQutritParams,
};

pub const ENV_PREFIX: &str = "SYNTHBATH_";

const SECTIONS: [&str; 3] = ["run", "params", "sweep"];
const RUN_KEYS: [&str; 4] = ["scenario", "solver", "format", "output"];

/// Parameters that are solved for an energy and so depend on the others.
const DERIVED_TARGETS: [&str; 4] = ["beta_s", "beta_ls", "beta_rs", "beta_sl"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Single,
    TwoQutrit,
    Engine,
    Driven,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::Single => "single",
            Scenario::TwoQutrit => "two-qutrit",
            Scenario::Engine => "engine",
            Scenario::Driven => "driven",
        }
    }

    pub fn tunable(self) -> &'static [&'static str] {
        match self {
            Scenario::Single => SingleQutritParams::TUNABLE,
            Scenario::TwoQutrit => TwoQutritParams::TUNABLE,
            Scenario::Engine => EngineParams::TUNABLE,
            Scenario::Driven => DrivenQutritParams::TUNABLE,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SolverMode {
    #[default]
    NullSpace,
    Integrate,
    Both,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

fn parse_enum<T: ValueEnum>(key: &str, value: &str) -> Result<T> {
    T::from_str(value, true)
        .map_err(|_| Error::InvalidParameter(format!("invalid value `{value}` for `{key}`")))
}

impl FromStr for Scenario {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        parse_enum("scenario", s)
    }
}

impl FromStr for SolverMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        parse_enum("solver", s)
    }
}

impl FromStr for OutputFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        parse_enum("format", s)
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Axis {
    pub name: String,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Axis {
    /// Evenly spaced values with both endpoints included exactly.
    pub fn values(&self) -> Vec<f64> {
        let n = self.count;
        (0..n)
            .map(|i| {
                if i + 1 == n {
                    self.stop
                } else {
                    self.start + (self.stop - self.start) * i as f64 / (n - 1) as f64
                }
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Sweep {
    pub axis1: Axis,
    pub axis2: Option<Axis>,
}

impl Sweep {
    pub fn len(&self) -> usize {
        self.axis1.count * self.axis2.as_ref().map_or(1, |a| a.count)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Grid points ordered by `axis1`, then `axis2`.
    pub fn points(&self) -> Vec<(f64, Option<f64>)> {
        let v1 = self.axis1.values();
        match &self.axis2 {
            None => v1.into_iter().map(|a| (a, None)).collect(),
            Some(ax) => {
                let v2 = ax.values();
                v1.iter()
                    .flat_map(|&a| v2.iter().map(move |&b| (a, Some(b))))
                    .collect()
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub scenario: Scenario,
    /// Parameter overrides in file order.
    pub params: Vec<(String, f64)>,
    pub sweep: Option<Sweep>,
    pub output: Option<PathBuf>,
    pub format: OutputFormat,
    pub solver: SolverMode,
}

impl RunConfig {
    pub fn new(scenario: Scenario) -> Self {
        Self {
            scenario,
            params: Vec::new(),
            sweep: None,
            output: None,
            format: OutputFormat::default(),
            solver: SolverMode::default(),
        }
    }

    /// Parses `text` and applies overrides from the process environment.
    pub fn parse(text: &str) -> Result<Self> {
        Self::parse_with_env(text, std::env::vars())
    }

    pub fn parse_with_env(
        text: &str,
        env: impl IntoIterator<Item = (String, String)>,
    ) -> Result<Self> {
        let mut entries = parse_sections(text)?;
        for (k, v) in env {
            if let Some((section, key)) = env_key(&k) {
                set_entry(&mut entries, section, &key, v.trim());
            }
        }
        Self::from_entries(&entries)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidParameter(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    fn from_entries(entries: &[Entry]) -> Result<Self> {
        let get = |section: &str, key: &str| {
            entries
                .iter()
                .find(|e| e.section == section && e.key == key)
                .map(|e| e.value.as_str())
        };
        let scenario: Scenario = get("run", "scenario")
            .ok_or_else(|| Error::InvalidParameter("missing `scenario` in [run]".into()))?
            .parse()?;
        let mut cfg = Self::new(scenario);
        if let Some(v) = get("run", "solver") {
            cfg.solver = v.parse()?;
        }
        if let Some(v) = get("run", "format") {
            cfg.format = v.parse()?;
        }
        cfg.output = get("run", "output").map(PathBuf::from);

        for e in entries {
            match e.section.as_str() {
                "run" if !RUN_KEYS.contains(&e.key.as_str()) => {
                    return Err(Error::InvalidParameter(format!(
                        "unknown key `{}` in [run]",
                        e.key
                    )))
                }
                "params" => {
                    if !scenario.tunable().contains(&e.key.as_str()) {
                        return Err(Error::InvalidParameter(format!(
                            "`{}` is not a parameter of the {scenario} scenario",
                            e.key
                        )));
                    }
                    cfg.params
                        .push((e.key.clone(), parse_f64(&e.key, &e.value)?));
                }
                _ => {}
            }
        }

        let sweep_keys: Vec<&Entry> = entries.iter().filter(|e| e.section == "sweep").collect();
        if !sweep_keys.is_empty() {
            for e in &sweep_keys {
                let known = ["axis1", "axis2"].iter().any(|a| {
                    ["name", "start", "stop", "count"]
                        .iter()
                        .any(|f| e.key == format!("{a}_{f}"))
                });
                if !known {
                    return Err(Error::InvalidParameter(format!(
                        "unknown key `{}` in [sweep]",
                        e.key
                    )));
                }
            }
            let axis = |prefix: &str| -> Result<Option<Axis>> {
                let name = get("sweep", &format!("{prefix}_name"));
                let Some(name) = name else {
                    return Ok(None);
                };
                let field = |f: &str| {
                    let key = format!("{prefix}_{f}");
                    get("sweep", &key)
                        .ok_or_else(|| {
                            Error::InvalidParameter(format!("missing `{key}` in [sweep]"))
                        })
                        .map(|v| (key, v))
                };
                let (k, v) = field("start")?;
                let start = parse_f64(&k, v)?;
                let (k, v) = field("stop")?;
                let stop = parse_f64(&k, v)?;
                let (k, v) = field("count")?;
                let count: usize = v
                    .parse()
                    .map_err(|_| Error::InvalidParameter(format!("invalid `{k}` = `{v}`")))?;
                Ok(Some(Axis {
                    name: name.to_string(),
                    start,
                    stop,
                    count,
                }))
            };
            let axis1 = axis("axis1")?
                .ok_or_else(|| Error::InvalidParameter("missing `axis1_name` in [sweep]".into()))?;
            let axis2 = axis("axis2")?;
            cfg.sweep = Some(Sweep { axis1, axis2 });
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(sweep) = &self.sweep {
            for ax in std::iter::once(&sweep.axis1).chain(sweep.axis2.iter()) {
                if ax.count < 2 {
                    return Err(Error::InvalidParameter(format!(
                        "sweep axis `{}` needs at least 2 points",
                        ax.name
                    )));
                }
                if !self.scenario.tunable().contains(&ax.name.as_str()) {
                    return Err(Error::InvalidParameter(format!(
                        "sweep axis `{}` is not a parameter of the {} scenario",
                        ax.name, self.scenario
                    )));
                }
                if !(ax.start.is_finite() && ax.stop.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "sweep axis `{}` has non-finite bounds",
                        ax.name
                    )));
                }
            }
            if let Some(ax2) = &sweep.axis2 {
                if ax2.name == sweep.axis1.name {
                    return Err(Error::InvalidParameter("sweep axes must differ".into()));
                }
            }
        }
        Ok(())
    }

    /// Parameters for one point: configured overrides plus the axis values.
    pub fn params_at(&self, axis_values: &[(String, f64)]) -> Result<ScenarioParams> {
        let mut assignments = self.params.clone();
        assignments.extend(axis_values.iter().cloned());
        ScenarioParams::from_assignments(self.scenario, &assignments)
    }

    /// Whether any key in `names` is set by the configuration.
    pub fn sets_any(&self, names: &[&str]) -> bool {
        let in_params = self.params.iter().any(|(k, _)| names.contains(&k.as_str()));
        let in_sweep = self.sweep.as_ref().is_some_and(|s| {
            std::iter::once(&s.axis1)
                .chain(s.axis2.iter())
                .any(|a| names.contains(&a.name.as_str()))
        });
        in_params || in_sweep
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum ScenarioParams {
    Single(SingleQutritParams),
    TwoQutrit(TwoQutritParams),
    Engine(EngineParams),
    Driven(DrivenQutritParams),
}

impl ScenarioParams {
    pub fn defaults(scenario: Scenario) -> Self {
        match scenario {
            Scenario::Single => Self::Single(Default::default()),
            Scenario::TwoQutrit => Self::TwoQutrit(Default::default()),
            Scenario::Engine => Self::Engine(Default::default()),
            Scenario::Driven => Self::Driven(Default::default()),
        }
    }

    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        match self {
            Self::Single(p) => p.set(name, value),
            Self::TwoQutrit(p) => p.set(name, value),
            Self::Engine(p) => p.set(name, value),
            Self::Driven(p) => p.set(name, value),
        }
    }

    /// Applies assignments to the defaults. Synthetic-temperature targets are
    /// applied last since they are solved against the other parameters.
    pub fn from_assignments(scenario: Scenario, assignments: &[(String, f64)]) -> Result<Self> {
        let mut p = Self::defaults(scenario);
        let (targets, plain): (Vec<_>, Vec<_>) = assignments
            .iter()
            .partition(|(k, _)| DERIVED_TARGETS.contains(&k.as_str()));
        for (k, v) in plain.into_iter().chain(targets) {
            p.set(k, *v)?;
        }
        Ok(p)
    }

    pub fn build(&self) -> Result<SystemSpec> {
        match self {
            Self::Single(p) => build_single_qutrit(p),
            Self::TwoQutrit(p) => build_two_qutrit(p),
            Self::Engine(p) => build_engine(p),
            Self::Driven(p) => build_driven_qutrit(p),
        }
    }
}

#[derive(Debug)]
struct Entry {
    section: String,
    key: String,
    value: String,
}

fn set_entry(entries: &mut Vec<Entry>, section: &str, key: &str, value: &str) {
    match entries
        .iter_mut()
        .find(|e| e.section == section && e.key == key)
    {
        Some(e) => e.value = value.to_string(),
        None => entries.push(Entry {
            section: section.to_string(),
            key: key.to_string(),
            value: value.to_string(),
        }),
    }
}

fn parse_sections(text: &str) -> Result<Vec<Entry>> {
    let mut entries = Vec::new();
    let mut section: Option<String> = None;
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split(['#', ';']).next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            let name = name.trim().to_ascii_lowercase();
            if !SECTIONS.contains(&name.as_str()) {
                return Err(Error::InvalidParameter(format!(
                    "line {}: unknown section [{name}]",
                    n + 1
                )));
            }
            section = Some(name);
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::InvalidParameter(format!("line {}: expected `key = value`", n + 1))
        })?;
        let section = section.as_deref().ok_or_else(|| {
            Error::InvalidParameter(format!("line {}: key outside of a section", n + 1))
        })?;
        let key = key.trim().to_ascii_lowercase();
        if entries
            .iter()
            .any(|e: &Entry| e.section == section && e.key == key)
        {
            return Err(Error::InvalidParameter(format!(
                "line {}: duplicate key `{key}`",
                n + 1
            )));
        }
        set_entry(&mut entries, section, &key, value.trim());
    }
    Ok(entries)
}

/// Maps `SYNTHBATH_PARAMS_BETA_H` to `("params", "beta_h")`.
fn env_key(var: &str) -> Option<(&'static str, String)> {
    let rest = var.strip_prefix(ENV_PREFIX)?;
    SECTIONS.iter().find_map(|&s| {
        rest.strip_prefix(&s.to_ascii_uppercase())
            .and_then(|r| r.strip_prefix('_'))
            .filter(|k| !k.is_empty())
            .map(|k| (s, k.to_ascii_lowercase()))
    })
}

fn parse_f64(key: &str, value: &str) -> Result<f64> {
    value
        .parse()
        .map_err(|_| Error::InvalidParameter(format!("invalid number `{value}` for `{key}`")))
}

#[cfg(test)]
mod tests {
    use super::*;

    const GRID: &str = "
        [run]
        scenario = two-qutrit
        format = csv   # comment

        [params]
        lambda = 0.5

        [sweep]
        axis1_name = beta_ls
        axis1_start = -0.04
        axis1_stop = 0.04
        axis1_count = 21
        axis2_name = beta_rs
        axis2_start = -0.04
        axis2_stop = 0.04
        axis2_count = 21
    ";

    fn no_env() -> Vec<(String, String)> {
        Vec::new()
    }

    #[test]
    fn parses_grid() {
        let cfg = RunConfig::parse_with_env(GRID, no_env()).unwrap();
        assert_eq!(cfg.scenario, Scenario::TwoQutrit);
        assert_eq!(cfg.params, vec![("lambda".to_string(), 0.5)]);
        let sweep = cfg.sweep.unwrap();
        assert_eq!(sweep.len(), 441);
        let v = sweep.axis1.values();
        assert_eq!(v[0], -0.04);
        assert_eq!(v[20], 0.04);
        assert!(v[10].abs() < 1e-17);
        assert_eq!(sweep.points()[1], (-0.04, Some(v[1])));
    }

    #[test]
    fn env_overrides() {
        let env = vec![
            ("SYNTHBATH_PARAMS_LAMBDA".to_string(), "2".to_string()),
            ("SYNTHBATH_SWEEP_AXIS1_COUNT".to_string(), "3".to_string()),
            ("SYNTHBATH_RUN_SOLVER".to_string(), "integrate".to_string()),
            ("UNRELATED".to_string(), "x".to_string()),
        ];
        let cfg = RunConfig::parse_with_env(GRID, env).unwrap();
        assert_eq!(cfg.params, vec![("lambda".to_string(), 2.0)]);
        assert_eq!(cfg.sweep.unwrap().axis1.count, 3);
        assert_eq!(cfg.solver, SolverMode::Integrate);
    }

    #[test]
    fn rejects_bad_configs() {
        let cases = [
            "[run]\nscenario = nope",
            "[run]\nscenario = engine\n[params]\nlambda = 1",
            "[run]\nscenario = engine\n[sweep]\naxis1_name = beta_sl\naxis1_start = -2\naxis1_stop = -1\naxis1_count = 1",
            "[run]\nscenario = engine\n[sweep]\naxis1_name = foo\naxis1_start = -2\naxis1_stop = -1\naxis1_count = 3",
            "[run]\nscenario = engine\n[sweep]\naxis1_name = beta_sl\naxis1_stop = -1\naxis1_count = 3",
            "scenario = engine",
            "[run]\nscenario engine",
            "[other]\nx = 1",
            "[run]\nscenario = engine\nscenario = single",
            "[params]\nbeta_h = 1",
            "[run]\nscenario = single\n[params]\nbeta_h = abc",
        ];
        for text in cases {
            assert!(
                matches!(
                    RunConfig::parse_with_env(text, no_env()),
                    Err(Error::InvalidParameter(_))
                ),
                "{text}"
            );
        }
    }

    #[test]
    fn targets_applied_after_energies() {
        let assignments = vec![("beta_ls".to_string(), -0.02), ("e_s".to_string(), 8.0)];
        let ScenarioParams::TwoQutrit(p) =
            ScenarioParams::from_assignments(Scenario::TwoQutrit, &assignments).unwrap()
        else {
            panic!("wrong scenario");
        };
        assert_eq!(p.e_s, 8.0);
        assert!((p.beta_ls().unwrap() + 0.02).abs() < 1e-12);
    }
}
