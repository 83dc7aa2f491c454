use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use ghzsim::experiments::{
    fmt_num, provenance_hash, run_sampled, scenario, Axis, AxisKind, Layout, RunSpec, Scenario, SweepResult, SCENARIOS,
};
use ghzsim::hilbert::HilbertSpace;
use ghzsim::model::{closed_space, coupling_hamiltonian, detuning_hamiltonian, laser_hamiltonian, open_space};
use ghzsim::pulses::{PulseSchedule, ScheduleKind};
use ghzsim::zeno::{analytic_eigensystem, compare_eigensystems, numeric_eigensystem};
use ghzsim::{Error, C64};
use nalgebra::DMatrix;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{OutputFormat, RunConfig};
use crate::CliError;

type Result<T> = std::result::Result<T, CliError>;

/// Default directory for sweep outputs when none is configured.
pub const DEFAULT_OUT: &str = "results";

fn space_for(cfg: &RunConfig) -> Result<std::sync::Arc<HilbertSpace>> {
    let n = cfg.params.n_atoms;
    Ok(if cfg.open() { open_space(n)? } else { closed_space(n)? })
}

fn print_json(out: &mut dyn Write, value: &impl Serialize) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

pub fn basis(cfg: &RunConfig, out: &mut dyn Write) -> Result<()> {
    let space = space_for(cfg)?;
    let layout = space.layout();
    let states: Vec<Value> = space
        .basis()
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let atoms: Vec<_> = s.atoms.iter().map(|l| l.label()).collect();
            json!({
                "index": i,
                "label": s.label(layout),
                "atoms": atoms.join(" "),
                "photons": s.photon_map(layout),
            })
        })
        .collect();
    print_json(out, &states)
}

/// Row-major `[re, im]` pairs.
fn dense_json(m: &DMatrix<C64>) -> Value {
    let rows: Vec<Vec<[f64; 2]>> =
        (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect();
    json!(rows)
}

pub fn hamiltonian(cfg: &RunConfig, time: Option<f64>, out: &mut dyn Write) -> Result<()> {
    let p = &cfg.params;
    let space = space_for(cfg)?;
    let labels: Vec<String> = space.basis().iter().map(|s| s.label(space.layout())).collect();
    let mut doc = json!({
        "n_atoms": p.n_atoms,
        "dim": space.dim(),
        "labels": labels,
        "coupling": dense_json(coupling_hamiltonian(&space, p)?.matrix()),
        "detuning": dense_json(detuning_hamiltonian(&space, p)?.matrix()),
    });
    if let Some(t) = time {
        let schedule = PulseSchedule::new(cfg.schedule(), p)?;
        let (o1, on) = schedule.drive(t);
        doc["laser"] = json!({
            "t": t,
            "schedule": cfg.schedule().label(),
            "matrix": dense_json(laser_hamiltonian(&space, o1, on, false)?.matrix()),
        });
    }
    print_json(out, &doc)
}

#[derive(Serialize)]
struct EigenRow {
    level: usize,
    degeneracy: usize,
    analytic: f64,
    numeric: f64,
    deviation: f64,
}

pub fn eigen(cfg: &RunConfig, out: &mut dyn Write) -> Result<()> {
    let p = &cfg.params;
    if p.n_atoms != 3 {
        return Err(Error::Config(format!("the closed-form spectrum covers N = 3 only, got N = {}", p.n_atoms)).into());
    }
    let space = closed_space(3)?;
    let analytic = analytic_eigensystem(p.g, p.v)?;
    let numeric = numeric_eigensystem(&coupling_hamiltonian(&space, p)?)?;
    let cmp = compare_eigensystems(&analytic, &numeric)?;
    let rows: Vec<EigenRow> = cmp
        .pairs
        .iter()
        .enumerate()
        .map(|(k, &(a, n))| EigenRow {
            level: k + 1,
            degeneracy: analytic.subspaces[k].len(),
            analytic: a,
            numeric: n,
            deviation: (a - n).abs(),
        })
        .collect();
    match cfg.format() {
        OutputFormat::Json => print_json(
            out,
            &json!({
                "g": p.g,
                "v": p.v,
                "levels": rows,
                "max_deviation": cmp.max_eigenvalue_error,
                "max_angle_sine": cmp.max_angle_sine,
            }),
        ),
        OutputFormat::Csv => {
            writeln!(out, "level,degeneracy,analytic,numeric,deviation")?;
            for r in &rows {
                writeln!(
                    out,
                    "{},{},{},{},{}",
                    r.level,
                    r.degeneracy,
                    fmt_num(r.analytic),
                    fmt_num(r.numeric),
                    fmt_num(r.deviation)
                )?;
            }
            writeln!(out, "# max deviation {}", fmt_num(cmp.max_eigenvalue_error))?;
            writeln!(out, "# max principal-angle sine {}", fmt_num(cmp.max_angle_sine))?;
            Ok(())
        }
    }
}

pub fn pulses(cfg: &RunConfig, points: usize, out: &mut dyn Write) -> Result<()> {
    let schedule = PulseSchedule::new(cfg.schedule(), &cfg.params)?;
    let table = schedule.table(points)?;
    match cfg.format() {
        OutputFormat::Json => print_json(out, &table),
        OutputFormat::Csv => {
            writeln!(out, "t,omega1,omega3,theta,theta_dot,omega_bar")?;
            for s in &table {
                let cols = [s.t, s.omega1, s.omega3, s.theta, s.theta_dot, s.omega_bar].map(fmt_num);
                writeln!(out, "{}", cols.join(","))?;
            }
            Ok(())
        }
    }
}

pub fn simulate(cfg: &RunConfig, out: &mut dyn Write) -> Result<()> {
    let spec = RunSpec::new(cfg.params.clone(), cfg.schedule(), cfg.open()).with_steps(cfg.steps());
    let observables = cfg.observables();
    let (steps, every) = (cfg.steps(), cfg.record_every());
    let mut marks: Vec<usize> = (0..=steps).step_by(every).collect();
    if marks.last() != Some(&steps) {
        marks.push(steps);
    }
    let fractions: Vec<f64> = marks.iter().map(|&k| k as f64 / steps as f64).collect();
    let (rows, diagnostics) = run_sampled(&spec, &fractions, &observables)?;
    log::info!("diagnostics: {diagnostics:?}");
    let times: Vec<f64> = fractions.iter().map(|f| f * cfg.params.tf).collect();

    let mut body = Vec::new();
    match cfg.format() {
        OutputFormat::Csv => {
            let names: Vec<&str> = observables.iter().map(|o| o.name()).collect();
            writeln!(body, "t,{}", names.join(","))?;
            for (t, row) in times.iter().zip(&rows) {
                let vals: Vec<String> = row.iter().map(|v| fmt_num(*v)).collect();
                writeln!(body, "{},{}", fmt_num(*t), vals.join(","))?;
            }
        }
        OutputFormat::Json => print_json(
            &mut body,
            &json!({ "observables": observables, "t": times, "values": rows, "diagnostics": diagnostics }),
        )?,
    }

    let Some(dir) = &cfg.output_dir else {
        out.write_all(&body)?;
        return Ok(());
    };
    let sidecar = cfg.to_file();
    let stem = format!("simulate-{}", provenance_hash(&sidecar)?);
    std::fs::create_dir_all(dir)?;
    let ext = match cfg.format() {
        OutputFormat::Csv => "csv",
        OutputFormat::Json => "json",
    };
    let data = dir.join(format!("{stem}.{ext}"));
    let config = dir.join(format!("{stem}.config.json"));
    std::fs::write(&data, &body)?;
    std::fs::write(&config, serde_json::to_string_pretty(&sidecar)? + "\n")?;
    let last: BTreeMap<String, f64> =
        observables.iter().zip(rows.last().into_iter().flatten()).map(|(o, v)| (o.name().to_string(), *v)).collect();
    print_json(out, &json!({ "data": data, "config": config, "final": last, "diagnostics": diagnostics }))
}

fn summary(result: &SweepResult, csv: &Path, json: &Path) -> Value {
    let s = &result.scenario;
    let mut stats = serde_json::Map::new();
    for o in &s.observables {
        let vals: Vec<f64> = result.series(*o).into_iter().flatten().collect();
        let entry = if result.cells.len() == 1 {
            json!(vals.first())
        } else {
            json!({
                "min": vals.iter().copied().reduce(f64::min),
                "max": vals.iter().copied().reduce(f64::max),
            })
        };
        stats.insert(o.name().to_string(), entry);
    }
    json!({
        "scenario": s.name,
        "hash": result.provenance.hash,
        "csv": csv,
        "sidecar": json,
        "cells": result.cells.len(),
        "failures": result.failures().len(),
        "values": stats,
    })
}

fn output_dir(cfg: &RunConfig) -> PathBuf {
    cfg.output_dir.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

fn write_sweep(cfg: &RunConfig, result: &SweepResult, out: &mut dyn Write) -> Result<()> {
    let (csv, json) = result.write_files(&output_dir(cfg))?;
    if !result.failures().is_empty() {
        log::warn!("{} of {} cells failed; see the CSV for error kinds", result.failures().len(), result.cells.len());
    }
    print_json(out, &summary(result, &csv, &json))
}

pub struct ScenarioArgs {
    pub name: Option<String>,
    pub list: bool,
    pub points: Option<usize>,
    pub ranges: Vec<(String, (f64, f64))>,
    pub serial: bool,
}

pub fn run_registered(cfg: &RunConfig, args: ScenarioArgs, out: &mut dyn Write) -> Result<()> {
    if args.list {
        let entries: Vec<Value> = SCENARIOS
            .iter()
            .map(|n| {
                let s = scenario(n)?;
                Ok(json!({ "name": n, "description": s.description, "cells": s.cell_count() }))
            })
            .collect::<std::result::Result<_, Error>>()?;
        return print_json(out, &entries);
    }
    let name = args
        .name
        .or_else(|| cfg.scenario.clone())
        .ok_or_else(|| CliError::Usage("a scenario name is required (or use --list)".into()))?;
    let mut overrides = cfg.scenario_overrides();
    overrides.points = args.points.or(overrides.points);
    overrides.ranges.extend(args.ranges);
    let s = scenario(&name)?.with_overrides(&overrides)?;
    let result = s.run(!args.serial)?;
    write_sweep(cfg, &result, out)
}

/// `name=lo:hi:n` for an even grid, or `name=a,b,c` for explicit values.
pub fn parse_axis(text: &str) -> std::result::Result<Axis, String> {
    let (name, spec) =
        text.split_once('=').ok_or_else(|| format!("expected name=lo:hi:n or name=a,b,..., got '{text}'"))?;
    let kind: AxisKind = name.trim().parse().map_err(|e: Error| e.to_string())?;
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| format!("'{s}' is not a number"));
    let axis = if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        let [lo, hi, n] = parts[..] else {
            return Err(format!("expected lo:hi:n, got '{spec}'"));
        };
        let n: usize = n.trim().parse().map_err(|_| format!("'{n}' is not a point count"))?;
        Axis::linspace(kind, num(lo)?, num(hi)?, n)
    } else {
        let values = spec.split(',').map(num).collect::<std::result::Result<Vec<_>, _>>()?;
        Axis::new(kind, values)
    };
    axis.map_err(|e| e.to_string())
}

/// `name=lo:hi`.
pub fn parse_range(text: &str) -> std::result::Result<(String, (f64, f64)), String> {
    let (name, spec) = text.split_once('=').ok_or_else(|| format!("expected name=lo:hi, got '{text}'"))?;
    let (lo, hi) = spec.split_once(':').ok_or_else(|| format!("expected lo:hi, got '{spec}'"))?;
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| format!("'{s}' is not a number"));
    Ok((name.trim().to_string(), (num(lo)?, num(hi)?)))
}

pub struct SweepArgs {
    pub name: String,
    pub axes: Vec<Axis>,
    pub lines: bool,
    pub serial: bool,
}

pub fn sweep(cfg: &RunConfig, args: SweepArgs, out: &mut dyn Write) -> Result<()> {
    if args.axes.is_empty() {
        return Err(CliError::Usage("at least one --axis is required".into()));
    }
    let schedule_axis = args.axes.iter().any(|a| a.kind == AxisKind::Schedule);
    let s = Scenario {
        name: args.name,
        description: "custom sweep".into(),
        base: cfg.params.clone(),
        schedule: if schedule_axis { ScheduleKind::Tqd } else { cfg.schedule() },
        open: cfg.open(),
        layout: if args.lines { Layout::Lines } else { Layout::Grid },
        axes: args.axes,
        observables: cfg.observables(),
        steps: cfg.steps(),
    };
    s.validate()?;
    let result = s.run(!args.serial)?;
    write_sweep(cfg, &result, out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_specs() {
        let a = parse_axis("tf=10:150:5").unwrap();
        assert_eq!(a.kind, AxisKind::Tf);
        assert_eq!(a.values, vec![10.0, 45.0, 80.0, 115.0, 150.0]);
        let b = parse_axis("n_atoms=3,5").unwrap();
        assert_eq!(b.values, vec![3.0, 5.0]);
        assert!(parse_axis("nope=1:2:3").is_err());
        assert!(parse_axis("tf=1:2").is_err());
        assert!(parse_axis("tf").is_err());
        assert_eq!(parse_range("dg=-0.05:0.05").unwrap(), ("dg".to_string(), (-0.05, 0.05)));
        assert!(parse_range("dg=1").is_err());
    }
}
