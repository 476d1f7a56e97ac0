//! Dispatches a [`RunConfig`] and writes its artifacts.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;
use wdlab_core::timestepping::integrate;
use wdlab_core::verify::{
    blowup_correspondence_experiment, convergence_study, dual_formulation_check, equivalence_experiment,
    hs_energy_drift, hs_oracle_experiment, hs_spec, BlowupCase,
};
use wdlab_core::{Case, Error as CoreError, Field, Grid, HsData, Ops, RunSide, Termination};

use crate::config::{Command, RunConfig};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("serialization failed: {0}")]
    Json(#[from] serde_json::Error),
}

/// How a run ended. Blow-up is a valid outcome, not an error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Status {
    Completed,
    BlowUp { side: Option<RunSide>, t: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub config: RunConfig,
    pub version: String,
    pub termination: Status,
    pub metrics: Value,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub status: Status,
    pub files: Vec<PathBuf>,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> RunError + '_ {
    move |source| RunError::Io { path: path.to_path_buf(), source }
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), RunError> {
    let mut file = fs::File::create(path).map_err(io_err(path))?;
    file.write_all(contents).map_err(io_err(path))
}

fn write_json<S: Serialize>(path: &Path, value: &S) -> Result<(), RunError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_file(path, text.as_bytes())
}

/// `{:.16e}`: 17 significant digits, enough to round-trip any `f64`.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Snapshot CSV with header `x,v[,sigma]`. The `sigma` column is written
/// only for two-component runs with a configured second component.
pub fn snapshot_csv(grid: &Grid, v: &Field, sigma: Option<&Field>) -> String {
    let mut out = String::from(if sigma.is_some() { "x,v,sigma\n" } else { "x,v\n" });
    for j in 0..grid.n() {
        out.push_str(&format_float(grid.node(j)));
        out.push(',');
        out.push_str(&format_float(v[j]));
        if let Some(s) = sigma {
            out.push(',');
            out.push_str(&format_float(s[j]));
        }
        out.push('\n');
    }
    out
}

/// Runs `config`, writing artifacts into `dir` (created if missing).
pub fn run(config: &RunConfig, dir: &Path) -> Result<Outcome, RunError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut files = Vec::new();
    let result = match config.command {
        Command::Simulate => simulate(config, dir, &mut files),
        command => experiment(command, config).and_then(|report| {
            let path = dir.join("report.json");
            write_json(&path, &report)?;
            files.push(path);
            Ok((Status::Completed, report))
        }),
    };
    let (status, metrics) = match result {
        Ok(pair) => pair,
        Err(RunError::Core(CoreError::BlowUp { side, t })) => (Status::BlowUp { side: Some(side), t }, Value::Null),
        Err(e) => return Err(e),
    };
    let manifest =
        Manifest { config: config.clone(), version: VERSION.to_string(), termination: status, metrics };
    let path = dir.join("manifest.json");
    write_json(&path, &manifest)?;
    files.push(path);
    Ok(Outcome { status, files })
}

fn simulate(config: &RunConfig, dir: &Path, files: &mut Vec<PathBuf>) -> Result<(Status, Value), RunError> {
    let grid = config.grid();
    let ops = Ops::new(grid);
    let spec = config.equation_spec();
    let v0 = config.velocity_series().sample(&grid);
    let sigma0 = config.sigma_series().map(|s| s.sample(&grid));
    let initial = spec.state_from_velocity(&ops, &v0, sigma0.as_ref());
    let trajectory = integrate(&ops, &initial, &spec, &config.integrator_config())?;

    let mut rows = Vec::new();
    for (k, snap) in trajectory.snapshots.iter().enumerate() {
        let sigma = (spec.is_two_component() && config.sigma_initial.is_some()).then_some(&snap.state.sigma);
        let name = format!("snapshot_{k:04}.csv");
        let path = dir.join(&name);
        write_file(&path, snapshot_csv(&grid, &snap.v, sigma).as_bytes())?;
        files.push(path);
        rows.push(serde_json::json!({ "t": snap.t, "file": name, "v_max": snap.v.max_abs() }));
    }
    let status = match trajectory.termination {
        Termination::Completed => Status::Completed,
        Termination::BlowUp { t_detect } => Status::BlowUp { side: None, t: t_detect },
    };
    Ok((status, serde_json::json!({ "snapshots": rows })))
}

fn experiment(command: Command, config: &RunConfig) -> Result<Value, RunError> {
    let grid = config.grid();
    let spec = config.equation_spec();
    let v0 = || config.velocity_series().sample(&grid);
    let sigma0 = || config.sigma_series().map(|s| s.sample(&grid));
    let value = match command {
        Command::Simulate => unreachable!("handled by simulate"),
        Command::Equiv => serde_json::to_value(equivalence_experiment(&Case {
            grid,
            v0: v0(),
            sigma0: sigma0(),
            spec,
            check_times: config.check_times.clone(),
            dt: config.dt,
            tolerance: config.tolerance,
        })?)?,
        Command::HsExact => {
            let slope = config.velocity_series().derivative(config.length).sample(&grid);
            let rho = sigma0().expect("validated second component");
            let data = HsData::normalized(slope, rho, config.kappa, config.lambda, grid)?;
            let report = hs_oracle_experiment(&data, &config.check_times, config.dt, config.tolerance)?;
            let energy = hs_energy_drift(
                &grid,
                &data.initial_velocity(),
                data.rho0(),
                &hs_spec(&data),
                config.dt,
                &config.check_times,
                config.tolerance,
            )?;
            serde_json::json!({ "oracle": report, "energy": energy })
        }
        Command::Blowup => serde_json::to_value(blowup_correspondence_experiment(&BlowupCase {
            grid,
            v0: v0(),
            sigma0: sigma0(),
            spec,
            dt: config.dt,
            reference_horizon: config.horizon,
        })?)?,
        Command::Converge => {
            let sigma = config.sigma_series();
            serde_json::to_value(convergence_study(
                &config.velocity_series(),
                sigma.as_ref(),
                &spec,
                config.length,
                config.t_end,
                &config.resolutions,
                config.dt,
            )?)?
        }
        Command::Dual => serde_json::to_value(dual_formulation_check(
            &grid,
            &v0(),
            config.lambda,
            config.dt,
            config.t_end,
            config.tolerance,
        )?)?,
    };
    Ok(value)
}
