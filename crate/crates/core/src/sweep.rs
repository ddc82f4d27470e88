//! Single runs and parameter grids.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::config::{OutputFormat, RunConfig, Scenario, ScenarioParams, SolverMode};
use crate::error::Error;
use crate::lindblad::{
    integrate_steady_state, solve_steady_state, SolveMethod, SteadyState, SystemSpec,
};
use crate::thermo::{flux_report, FluxReport};
use crate::tolerance;

pub const CSV_HEADER: &str = "scenario,axis1,axis2,beta_ls,beta_rs,qdot_L,qdot_R_or_W,\
sdot_vn_L,sdot_vn_R_or_W,sdot_cl_L,sdot_cl_R_or_W,power,sigma_prod,eta_total,residual,flags";

const ENGINE_RATES: [&str; 3] = ["gamma_h", "gamma_c", "gamma_w"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FailureCode {
    Config,
    Solver,
    Invariant,
}

impl FailureCode {
    pub fn exit_code(self) -> i32 {
        match self {
            FailureCode::Config => 2,
            FailureCode::Solver => 3,
            FailureCode::Invariant => 4,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            FailureCode::Config => "config",
            FailureCode::Solver => "solver",
            FailureCode::Invariant => "invariant",
        }
    }

    pub fn classify(e: &Error) -> Self {
        match e {
            Error::InvalidParameter(_)
            | Error::SingularOccupation(_)
            | Error::UnknownGroup(_)
            | Error::MissingInteraction
            | Error::NoValidFrame(_)
            | Error::DimensionMismatch { .. }
            | Error::NotSquare { .. } => FailureCode::Config,
            Error::NonUniqueSteadyState(_)
            | Error::PositivityViolation(_)
            | Error::SingularSystem
            | Error::ResidualTooLarge(_)
            | Error::Unstable(_) => FailureCode::Solver,
            Error::NotHermitian { .. }
            | Error::InvalidDensityMatrix(_)
            | Error::InvariantBreach(_)
            | Error::ImaginaryResidue(_) => FailureCode::Invariant,
        }
    }
}

#[derive(Debug)]
pub struct RunError {
    pub code: FailureCode,
    pub error: Error,
}

impl RunError {
    pub fn config(msg: impl Into<String>) -> Self {
        Self {
            code: FailureCode::Config,
            error: Error::InvalidParameter(msg.into()),
        }
    }
}

impl From<Error> for RunError {
    fn from(error: Error) -> Self {
        Self {
            code: FailureCode::classify(&error),
            error,
        }
    }
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} error: {}", self.code.as_str(), self.error)
    }
}

impl std::error::Error for RunError {}

#[derive(Clone, Debug, Serialize)]
pub struct SteadyStateSummary {
    pub method: SolveMethod,
    pub residual: f64,
    pub trace: f64,
    pub hermiticity_error: f64,
    pub min_eigenvalue: f64,
    pub populations: Vec<f64>,
    /// Trace distance between the two solvers when both were run.
    pub solver_distance: Option<f64>,
}

impl SteadyStateSummary {
    fn new(ss: &SteadyState, solver_distance: Option<f64>) -> Self {
        Self {
            method: ss.method,
            residual: ss.residual,
            trace: ss.sigma.op().trace().re,
            hermiticity_error: ss.sigma.op().hermiticity_error(),
            min_eigenvalue: ss.sigma.min_eigenvalue(),
            populations: ss.sigma.populations(),
            solver_distance,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub scenario: Scenario,
    pub params: ScenarioParams,
    /// Channel groups in construction order with their inverse temperatures.
    pub groups: Vec<(String, f64)>,
    pub steady_state: SteadyStateSummary,
    pub flux: FluxReport,
    pub flags: Vec<String>,
}

impl RunReport {
    /// Largest of the generator, first-law and entropy-balance residuals.
    pub fn residual(&self) -> f64 {
        self.steady_state
            .residual
            .max(self.flux.first_law_residual)
            .max(self.flux.entropy_balance_residual)
    }

    /// Balance identities that fail their tolerance.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.flux.first_law_residual > tolerance::BALANCE {
            out.push(format!(
                "first-law residual {:e}",
                self.flux.first_law_residual
            ));
        }
        if self.flux.entropy_balance_residual > tolerance::BALANCE {
            out.push(format!(
                "entropy-balance residual {:e}",
                self.flux.entropy_balance_residual
            ));
        }
        out
    }
}

/// Steady state by the requested solver. In `Both` mode the null-space
/// state is returned after checking it against the integrated one.
pub fn solve(spec: &SystemSpec, mode: SolverMode) -> crate::Result<(SteadyState, Option<f64>)> {
    match mode {
        SolverMode::NullSpace => Ok((solve_steady_state(spec)?, None)),
        SolverMode::Integrate => Ok((integrate_steady_state(spec)?, None)),
        SolverMode::Both => {
            let direct = solve_steady_state(spec)?;
            let integrated = integrate_steady_state(spec)?;
            let d = direct.sigma.trace_distance(&integrated.sigma)?;
            if d > tolerance::SOLVER_AGREEMENT {
                return Err(Error::InvariantBreach(format!(
                    "solvers disagree: trace distance {d:e}"
                )));
            }
            Ok((direct, Some(d)))
        }
    }
}

/// Builds, solves and reports one parameter point without judging balances.
pub fn evaluate(
    cfg: &RunConfig,
    axis_values: &[(String, f64)],
) -> std::result::Result<RunReport, RunError> {
    let params = cfg.params_at(axis_values)?;
    let spec = params.build()?;
    let (ss, distance) = solve(&spec, cfg.solver)?;
    let flux = flux_report(&spec, &ss.sigma)?;
    let mut flags = Vec::new();
    if flux.efficiencies.engine_regime {
        flags.push("engine".to_string());
    }
    if cfg.scenario == Scenario::Engine && !cfg.sets_any(&ENGINE_RATES) {
        flags.push("gamma_default".to_string());
    }
    Ok(RunReport {
        scenario: cfg.scenario,
        params,
        groups: spec
            .groups
            .iter()
            .map(|g| (g.label.clone(), g.beta))
            .collect(),
        steady_state: SteadyStateSummary::new(&ss, distance),
        flux,
        flags,
    })
}

pub fn run_single(cfg: &RunConfig) -> std::result::Result<RunReport, RunError> {
    if cfg.sweep.is_some() {
        return Err(RunError::config("`run` takes no [sweep] block; use `grid`"));
    }
    let report = evaluate(cfg, &[])?;
    let violations = report.violations();
    if !violations.is_empty() {
        return Err(Error::InvariantBreach(violations.join("; ")).into());
    }
    Ok(report)
}

#[derive(Clone, Debug, Serialize)]
pub struct GridRow {
    pub scenario: Scenario,
    pub axis1: Option<f64>,
    pub axis2: Option<f64>,
    pub beta_ls: f64,
    pub beta_rs: f64,
    pub qdot_l: f64,
    pub qdot_r_or_w: f64,
    pub sdot_vn_l: f64,
    pub sdot_vn_r_or_w: f64,
    pub sdot_cl_l: f64,
    pub sdot_cl_r_or_w: f64,
    pub power: f64,
    pub sigma_prod: f64,
    pub eta_total: f64,
    pub residual: f64,
    pub flags: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl GridRow {
    pub fn from_report(report: &RunReport, axis1: Option<f64>, axis2: Option<f64>) -> Self {
        let slot = |i: usize| {
            report
                .groups
                .get(i)
                .map(|(label, beta)| (label.as_str(), *beta))
        };
        let pick = |map: &BTreeMap<String, f64>, i: usize| {
            slot(i)
                .and_then(|(l, _)| map.get(l).copied())
                .unwrap_or(f64::NAN)
        };
        let mut flags = report.flags.clone();
        if !report.violations().is_empty() {
            flags.push(format!("fail:{}", FailureCode::Invariant.as_str()));
        }
        let f = &report.flux;
        Self {
            scenario: report.scenario,
            axis1,
            axis2,
            beta_ls: slot(0).map_or(f64::NAN, |s| s.1),
            beta_rs: slot(1).map_or(f64::NAN, |s| s.1),
            qdot_l: pick(&f.heat_flux, 0),
            qdot_r_or_w: pick(&f.heat_flux, 1),
            sdot_vn_l: pick(&f.entropy_flux_vn, 0),
            sdot_vn_r_or_w: pick(&f.entropy_flux_vn, 1),
            sdot_cl_l: pick(&f.entropy_flux_clausius, 0),
            sdot_cl_r_or_w: pick(&f.entropy_flux_clausius, 1),
            power: f.power,
            sigma_prod: f.entropy_production,
            eta_total: f.efficiencies.total,
            residual: report.residual(),
            flags,
            error: None,
        }
    }

    pub fn failed(
        scenario: Scenario,
        axis1: Option<f64>,
        axis2: Option<f64>,
        err: &RunError,
    ) -> Self {
        let nan = f64::NAN;
        Self {
            scenario,
            axis1,
            axis2,
            beta_ls: nan,
            beta_rs: nan,
            qdot_l: nan,
            qdot_r_or_w: nan,
            sdot_vn_l: nan,
            sdot_vn_r_or_w: nan,
            sdot_cl_l: nan,
            sdot_cl_r_or_w: nan,
            power: nan,
            sigma_prod: nan,
            eta_total: nan,
            residual: nan,
            flags: vec![format!("fail:{}", err.code.as_str())],
            error: Some(err.error.to_string()),
        }
    }

    pub fn is_failure(&self) -> bool {
        self.flags.iter().any(|f| f.starts_with("fail:"))
    }

    pub fn csv_line(&self) -> String {
        let opt = |x: Option<f64>| x.map(num).unwrap_or_default();
        let fields = [
            self.scenario.name().to_string(),
            opt(self.axis1),
            opt(self.axis2),
            num(self.beta_ls),
            num(self.beta_rs),
            num(self.qdot_l),
            num(self.qdot_r_or_w),
            num(self.sdot_vn_l),
            num(self.sdot_vn_r_or_w),
            num(self.sdot_cl_l),
            num(self.sdot_cl_r_or_w),
            num(self.power),
            num(self.sigma_prod),
            num(self.eta_total),
            num(self.residual),
            self.flags.join(";"),
        ];
        fields.join(",")
    }
}

/// Seventeen significant digits, so values round-trip exactly.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Clone, Debug, Serialize)]
pub struct GridResult {
    pub rows: Vec<GridRow>,
}

impl GridResult {
    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.is_failure()).count()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::with_capacity(256 * (self.rows.len() + 1));
        s.push_str(CSV_HEADER);
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.csv_line());
            s.push('\n');
        }
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.rows).expect("grid rows serialize") + "\n"
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Csv => self.to_csv(),
            OutputFormat::Json => self.to_json(),
        }
    }
}

/// Evaluates every grid point on `jobs` threads (`None`: one per core).
/// Failed points become NaN rows with a failure flag.
pub fn run_grid(cfg: &RunConfig, jobs: Option<usize>) -> std::result::Result<GridResult, RunError> {
    let sweep = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| RunError::config("`grid` needs a [sweep] block"))?;
    let points = sweep.points();
    let eval = |&(a1, a2): &(f64, Option<f64>)| {
        let mut axes = vec![(sweep.axis1.name.clone(), a1)];
        if let (Some(ax), Some(v)) = (&sweep.axis2, a2) {
            axes.push((ax.name.clone(), v));
        }
        match evaluate(cfg, &axes) {
            Ok(report) => GridRow::from_report(&report, Some(a1), a2),
            Err(e) => GridRow::failed(cfg.scenario, Some(a1), a2, &e),
        }
    };
    let rows = if jobs == Some(1) {
        points.iter().map(eval).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.unwrap_or(0))
            .build()
            .map_err(|e| RunError::config(format!("cannot start worker pool: {e}")))?;
        pool.install(|| points.par_iter().map(eval).collect())
    };
    Ok(GridResult { rows })
}

/// Writes `text` to `path`, or to stdout when no path is given.
pub fn write_output(path: Option<&std::path::Path>, text: &str) -> std::io::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_columns() {
        assert_eq!(CSV_HEADER.split(',').count(), 16);
    }

    #[test]
    fn number_format_round_trips() {
        for x in [0.1, -1.0 / 3.0, 1e-300, 12345.678e10] {
            let s = num(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
        assert_eq!(num(f64::NAN), "NaN");
    }

    #[test]
    fn classifies_errors() {
        assert_eq!(FailureCode::classify(&Error::SingularSystem).exit_code(), 3);
        assert_eq!(
            FailureCode::classify(&Error::InvalidParameter("x".into())).exit_code(),
            2
        );
        assert_eq!(
            FailureCode::classify(&Error::InvariantBreach("x".into())).exit_code(),
            4
        );
    }

    #[test]
    fn failed_point_yields_nan_row() {
        let mut cfg = RunConfig::new(Scenario::Single);
        cfg.sweep = Some(crate::config::Sweep {
            axis1: crate::config::Axis {
                name: "e_c".into(),
                start: 10.5,
                stop: 25.0,
                count: 2,
            },
            axis2: None,
        });
        let grid = run_grid(&cfg, Some(1)).unwrap();
        assert_eq!(grid.rows.len(), 2);
        assert!(!grid.rows[0].is_failure());
        assert!(grid.rows[1].is_failure());
        assert!(grid.rows[1].qdot_l.is_nan());
        assert_eq!(grid.failures(), 1);
        assert!(grid
            .to_csv()
            .lines()
            .nth(2)
            .unwrap()
            .ends_with("fail:config"));
    }
}
