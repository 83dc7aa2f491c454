//! Scenario registry and sweep engine.
//!
//! A scenario fixes a base parameter set, a schedule, closed or open
//! dynamics and up to two sweep axes. Cells are independent runs and are
//! executed on the rayon pool; results are gathered in axis order so serial
//! and parallel runs agree bit for bit.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dynamics::{integrate_lindblad, integrate_schrodinger, Diagnostics, QuantumState, TimeGrid};
use crate::error::{Error, Result};
use crate::model::{closed_space, jump_operators, open_space, DrivenHamiltonian, SystemParams};
use crate::observables::{Observable, Probes};
use crate::pulses::{PulseSchedule, ScheduleKind};

/// Sweepable quantity. Deviation axes are relative: `x′ = x(1 + δ)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisKind {
    Omega0,
    Tf,
    Delta,
    Gamma,
    KappaC,
    KappaF,
    DeltaG,
    DeltaV,
    DeltaOmega0,
    DeltaT,
    NAtoms,
    /// `0` = adiabatic, `1` = transitionless.
    Schedule,
    /// Sampling time as a fraction of `t_f`.
    Time,
}

impl AxisKind {
    pub const ALL: [AxisKind; 13] = [
        AxisKind::Omega0,
        AxisKind::Tf,
        AxisKind::Delta,
        AxisKind::Gamma,
        AxisKind::KappaC,
        AxisKind::KappaF,
        AxisKind::DeltaG,
        AxisKind::DeltaV,
        AxisKind::DeltaOmega0,
        AxisKind::DeltaT,
        AxisKind::NAtoms,
        AxisKind::Schedule,
        AxisKind::Time,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AxisKind::Omega0 => "omega0",
            AxisKind::Tf => "tf",
            AxisKind::Delta => "delta",
            AxisKind::Gamma => "gamma",
            AxisKind::KappaC => "kappa_c",
            AxisKind::KappaF => "kappa_f",
            AxisKind::DeltaG => "dg",
            AxisKind::DeltaV => "dv",
            AxisKind::DeltaOmega0 => "domega0",
            AxisKind::DeltaT => "dT",
            AxisKind::NAtoms => "n_atoms",
            AxisKind::Schedule => "schedule",
            AxisKind::Time => "t",
        }
    }

    fn apply(self, base: &SystemParams, p: &mut SystemParams, x: f64) -> Result<()> {
        match self {
            AxisKind::Omega0 => p.omega0 = x,
            AxisKind::Tf => p.tf = x,
            AxisKind::Delta => p.delta = x,
            AxisKind::Gamma => p.gamma = x,
            AxisKind::KappaC => p.kappa_c = x,
            AxisKind::KappaF => p.kappa_f = x,
            AxisKind::DeltaG => p.g = base.g * (1.0 + x),
            AxisKind::DeltaV => p.v = base.v * (1.0 + x),
            AxisKind::DeltaOmega0 => p.omega0 = base.omega0 * (1.0 + x),
            AxisKind::DeltaT => p.tf = base.tf * (1.0 + x),
            AxisKind::NAtoms => p.set("n_atoms", x)?,
            AxisKind::Schedule | AxisKind::Time => {}
        }
        Ok(())
    }

    /// Axis value as written to CSV.
    pub fn format_value(self, x: f64) -> String {
        match self {
            AxisKind::Schedule => schedule_from_value(x).map(|s| s.label().to_string()).unwrap_or_else(|_| fmt_num(x)),
            AxisKind::NAtoms => format!("{}", x as i64),
            _ => fmt_num(x),
        }
    }
}

impl fmt::Display for AxisKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AxisKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        AxisKind::ALL.into_iter().find(|a| a.name() == s).ok_or_else(|| {
            let names: Vec<_> = AxisKind::ALL.iter().map(|a| a.name()).collect();
            Error::Config(format!("unknown axis '{s}' (known: {})", names.join(", ")))
        })
    }
}

fn schedule_from_value(x: f64) -> Result<ScheduleKind> {
    match x {
        0.0 => Ok(ScheduleKind::Adiabatic),
        1.0 => Ok(ScheduleKind::Tqd),
        other => Err(Error::Config(format!("schedule axis values are 0 (adiabatic) or 1 (tqd), got {other}"))),
    }
}

/// Numbers are written with 12 significant digits.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.11e}")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub kind: AxisKind,
    pub values: Vec<f64>,
    /// Excluded lower end of an axis built on a half-open interval.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub open_lower: Option<f64>,
}

impl Axis {
    pub fn new(kind: AxisKind, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Config(format!("axis '{kind}' has no values")));
        }
        if values.iter().any(|x| !x.is_finite()) {
            return Err(Error::Config(format!("axis '{kind}' has non-finite values")));
        }
        let inc = values.windows(2).all(|w| w[1] > w[0]);
        let dec = values.windows(2).all(|w| w[1] < w[0]);
        if !(inc || dec) {
            return Err(Error::Config(format!("axis '{kind}' must be strictly monotone")));
        }
        Ok(Self { kind, values, open_lower: None })
    }

    /// `n` evenly spaced values including both ends.
    pub fn linspace(kind: AxisKind, lo: f64, hi: f64, n: usize) -> Result<Self> {
        let values = match n {
            0 => Vec::new(),
            1 => vec![lo],
            _ => (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect(),
        };
        Self::new(kind, values)
    }

    /// `n` evenly spaced values on `(lo, hi]`.
    pub fn open_linspace(kind: AxisKind, lo: f64, hi: f64, n: usize) -> Result<Self> {
        let mut axis = Self::new(kind, (1..=n).map(|k| lo + (hi - lo) * k as f64 / n as f64).collect())?;
        axis.open_lower = Some(lo);
        Ok(axis)
    }

    /// Same kind and interval with `n` points.
    fn resampled(&self, range: Option<(f64, f64)>, n: usize) -> Result<Self> {
        let hi = *self.values.last().expect("nonempty");
        match (self.open_lower, range) {
            (Some(lo), None) => Self::open_linspace(self.kind, lo, hi, n),
            (Some(_), Some((lo, hi))) => Self::open_linspace(self.kind, lo, hi, n),
            (None, None) => Self::linspace(self.kind, self.values[0], hi, n),
            (None, Some((lo, hi))) => Self::linspace(self.kind, lo, hi, n),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// How the axes combine.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layout {
    /// Cartesian product of the axes (at most two).
    Grid,
    /// Each axis swept separately with the others at the base point.
    Lines,
}

/// One run of the simulator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSpec {
    pub params: SystemParams,
    pub schedule: ScheduleKind,
    pub open: bool,
    pub steps: usize,
}

impl RunSpec {
    pub fn new(params: SystemParams, schedule: ScheduleKind, open: bool) -> Self {
        Self { params, schedule, open, steps: crate::dynamics::DEFAULT_STEPS }
    }

    pub fn with_steps(mut self, steps: usize) -> Self {
        self.steps = steps;
        self
    }
}

/// Runs `spec` and evaluates `observables` at each time fraction in
/// `fractions` (rounded to the nearest step). Returns one row per fraction.
pub fn run_sampled(
    spec: &RunSpec,
    fractions: &[f64],
    observables: &[Observable],
) -> Result<(Vec<Vec<f64>>, Diagnostics)> {
    let p = &spec.params;
    p.validate()?;
    if !spec.open && p.is_dissipative() {
        return Err(Error::OpenSystemRequired(
            "decay rates are nonzero but the run is closed; enable the open system".into(),
        ));
    }
    let space = if spec.open { open_space(p.n_atoms)? } else { closed_space(p.n_atoms)? };
    let schedule = PulseSchedule::new(spec.schedule, p)?;
    let grid = TimeGrid::new(p.tf, spec.steps)?.recording_samples(100);
    schedule.validate_on(spec.steps)?;
    let h = DrivenHamiltonian::new(&space, schedule)?;
    let probes = Probes::new(&space, p, spec.schedule)?;

    let mut targets: Vec<(usize, usize)> = fractions
        .iter()
        .enumerate()
        .map(|(i, f)| {
            if !(0.0..=1.0).contains(f) {
                return Err(Error::Config(format!("time fraction {f} outside [0, 1]")));
            }
            Ok(((f * spec.steps as f64).round() as usize, i))
        })
        .collect::<Result<_>>()?;
    targets.sort_unstable();
    let mut rows = vec![Vec::new(); fractions.len()];
    let mut cursor = 0;
    let mut failure: Option<Error> = None;
    let mut eval = |step: usize, state: QuantumState| {
        while cursor < targets.len() && targets[cursor].0 == step {
            let row: Result<Vec<f64>> = observables.iter().map(|&o| probes.evaluate(o, &state)).collect();
            match row {
                Ok(r) => rows[targets[cursor].1] = r,
                Err(e) => failure = Some(e),
            }
            cursor += 1;
        }
    };
    let wanted = |step: usize| targets.iter().any(|t| t.0 == step);

    let psi0 = space.basis_vector(space.initial_index());
    let diagnostics = if spec.open {
        let jumps = jump_operators(&space, p)?;
        let rho0 = &psi0 * psi0.adjoint();
        integrate_lindblad(&h, &jumps, &rho0, &grid, &mut |step, _, rho| {
            if wanted(step) {
                eval(step, QuantumState::Mixed(rho.clone()));
            }
        })?
    } else {
        integrate_schrodinger(&h, &psi0, &grid, &mut |step, _, psi| {
            if wanted(step) {
                eval(step, QuantumState::Pure(psi.clone()));
            }
        })?
    };
    if let Some(e) = failure {
        return Err(e);
    }
    Ok((rows, diagnostics))
}

/// Final-time values of `observables`.
pub fn run_final(spec: &RunSpec, observables: &[Observable]) -> Result<(Vec<f64>, Diagnostics)> {
    let (mut rows, diag) = run_sampled(spec, &[1.0], observables)?;
    Ok((rows.remove(0), diag))
}

/// Final GHZ fidelity of `spec`.
pub fn final_fidelity(spec: &RunSpec) -> Result<f64> {
    Ok(run_final(spec, &[Observable::Fidelity])?.0[0])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub description: String,
    pub base: SystemParams,
    pub schedule: ScheduleKind,
    pub open: bool,
    pub layout: Layout,
    pub axes: Vec<Axis>,
    pub observables: Vec<Observable>,
    pub steps: usize,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        let n_time = self.axes.iter().filter(|a| a.kind == AxisKind::Time).count();
        if self.layout == Layout::Grid && self.axes.len() > 2 {
            return Err(Error::Config("a grid sweep has at most two axes".into()));
        }
        if n_time > 1 || (n_time == 1 && self.axes.last().map(|a| a.kind) != Some(AxisKind::Time)) {
            return Err(Error::Config("the time axis must be the last axis of a grid".into()));
        }
        if n_time == 1 && self.layout == Layout::Lines {
            return Err(Error::Config("line sweeps cannot include the time axis".into()));
        }
        if self.observables.is_empty() {
            return Err(Error::Config("no observables requested".into()));
        }
        for a in &self.axes {
            Axis::new(a.kind, a.values.clone())?;
        }
        Ok(())
    }

    /// Applies overrides and returns the adjusted scenario.
    pub fn with_overrides(mut self, o: &Overrides) -> Result<Self> {
        for (k, v) in &o.params {
            self.base.set(k, *v)?;
        }
        if let Some(s) = o.steps {
            self.steps = s;
        }
        if let Some(open) = o.open {
            self.open = open;
        }
        if let Some(s) = o.schedule {
            self.schedule = s;
        }
        if let Some(obs) = &o.observables {
            self.observables = obs.clone();
        }
        for axis in &mut self.axes {
            let name = axis.kind.name();
            let range = o.ranges.get(name).copied();
            let points = o.points;
            if range.is_none() && points.is_none() {
                continue;
            }
            if matches!(axis.kind, AxisKind::Schedule | AxisKind::NAtoms) {
                continue;
            }
            *axis = axis.resampled(range, points.unwrap_or(axis.len()))?;
        }
        for name in o.ranges.keys() {
            if !self.axes.iter().any(|a| a.kind.name() == name) {
                return Err(Error::Config(format!("scenario '{}' has no axis '{name}'", self.name)));
            }
        }
        self.validate()?;
        Ok(self)
    }

    pub fn cell_count(&self) -> usize {
        match self.layout {
            Layout::Grid => self.axes.iter().map(Axis::len).product(),
            Layout::Lines => self.axes.iter().map(Axis::len).sum(),
        }
    }

    fn time_axis(&self) -> Option<&Axis> {
        self.axes.iter().find(|a| a.kind == AxisKind::Time)
    }

    /// Independent runs: coordinates on the non-time axes.
    fn jobs(&self) -> Vec<Vec<(AxisKind, f64)>> {
        let non_time: Vec<&Axis> = self.axes.iter().filter(|a| a.kind != AxisKind::Time).collect();
        match self.layout {
            Layout::Lines => non_time.iter().flat_map(|a| a.values.iter().map(move |&x| vec![(a.kind, x)])).collect(),
            Layout::Grid => {
                let mut out = vec![Vec::new()];
                for a in non_time {
                    out = out
                        .into_iter()
                        .flat_map(|prefix| {
                            a.values.iter().map(move |&x| {
                                let mut c = prefix.clone();
                                c.push((a.kind, x));
                                c
                            })
                        })
                        .collect();
                }
                out
            }
        }
    }

    fn spec_for(&self, coords: &[(AxisKind, f64)]) -> Result<RunSpec> {
        let mut p = self.base.clone();
        let mut schedule = self.schedule;
        for &(kind, x) in coords {
            if kind == AxisKind::Schedule {
                schedule = schedule_from_value(x)?;
            }
            kind.apply(&self.base, &mut p, x)?;
        }
        Ok(RunSpec { params: p, schedule, open: self.open, steps: self.steps })
    }

    fn run_job(&self, coords: &[(AxisKind, f64)]) -> Vec<Cell> {
        let fractions: Vec<f64> = self.time_axis().map(|a| a.values.clone()).unwrap_or_else(|| vec![1.0]);
        let outcome = self.spec_for(coords).and_then(|spec| run_sampled(&spec, &fractions, &self.observables));
        let with_time = |f: f64| {
            let mut c = coords.to_vec();
            if self.time_axis().is_some() {
                c.push((AxisKind::Time, f));
            }
            c
        };
        match outcome {
            Ok((rows, diag)) => fractions
                .iter()
                .zip(rows)
                .map(|(&f, values)| Cell { coords: with_time(f), values, diagnostics: Some(diag), error: None })
                .collect(),
            Err(e) => fractions
                .iter()
                .map(|&f| Cell {
                    coords: with_time(f),
                    values: Vec::new(),
                    diagnostics: None,
                    error: Some(CellError { kind: e.kind().to_string(), message: e.to_string() }),
                })
                .collect(),
        }
    }

    /// Executes every cell; `parallel` selects the rayon pool.
    pub fn run(&self, parallel: bool) -> Result<SweepResult> {
        self.validate()?;
        let jobs = self.jobs();
        let per_job: Vec<Vec<Cell>> = if parallel {
            jobs.par_iter().map(|c| self.run_job(c)).collect()
        } else {
            jobs.iter().map(|c| self.run_job(c)).collect()
        };
        let cells: Vec<Cell> = per_job.into_iter().flatten().collect();
        let failed = cells.iter().filter(|c| c.error.is_some()).count();
        if failed > 0 {
            log::warn!("scenario {}: {failed} of {} cells failed", self.name, cells.len());
        }
        Ok(SweepResult { provenance: Provenance::of(self)?, scenario: self.clone(), cells })
    }
}

/// Adjustments applied on top of a registered scenario.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Overrides {
    /// Base-parameter assignments by key.
    pub params: BTreeMap<String, f64>,
    pub steps: Option<usize>,
    /// Points per axis.
    pub points: Option<usize>,
    /// `[lo, hi]` per axis name.
    pub ranges: BTreeMap<String, (f64, f64)>,
    pub open: Option<bool>,
    pub schedule: Option<ScheduleKind>,
    pub observables: Option<Vec<Observable>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellError {
    pub kind: String,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub coords: Vec<(AxisKind, f64)>,
    /// One value per scenario observable; empty on error.
    pub values: Vec<f64>,
    pub diagnostics: Option<Diagnostics>,
    pub error: Option<CellError>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    /// First 12 hex digits of the SHA-256 of the scenario definition.
    pub hash: String,
    pub version: String,
}

impl Provenance {
    fn of(s: &Scenario) -> Result<Self> {
        Ok(Self { hash: provenance_hash(s)?, version: env!("CARGO_PKG_VERSION").to_string() })
    }
}

/// First 12 hex digits of the SHA-256 of the JSON encoding of `value`.
pub fn provenance_hash<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let digest = Sha256::digest(serde_json::to_vec(value)?);
    Ok(hex::encode(digest)[..12].to_string())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub scenario: Scenario,
    pub cells: Vec<Cell>,
    pub provenance: Provenance,
}

impl SweepResult {
    pub fn file_stem(&self) -> String {
        format!("{}-{}", self.scenario.name, self.provenance.hash)
    }

    pub fn value(&self, cell: usize, obs: Observable) -> Option<f64> {
        let k = self.scenario.observables.iter().position(|&o| o == obs)?;
        self.cells.get(cell)?.values.get(k).copied()
    }

    /// Values of `obs` in cell order; `None` for failed cells.
    pub fn series(&self, obs: Observable) -> Vec<Option<f64>> {
        (0..self.cells.len()).map(|c| self.value(c, obs)).collect()
    }

    pub fn failures(&self) -> Vec<&Cell> {
        self.cells.iter().filter(|c| c.error.is_some()).collect()
    }

    /// Long-format CSV. Grids: `<axis1>,<axis2>,observable,value`; line
    /// sweeps: `axis,x,observable,value`. Failed cells carry `NaN` and the
    /// error kind in place of the observable.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let s = &self.scenario;
        match s.layout {
            Layout::Grid => {
                let mut header: Vec<&str> = s.axes.iter().map(|a| a.kind.name()).collect();
                header.extend(["observable", "value"]);
                writeln!(w, "{}", header.join(","))?;
            }
            Layout::Lines => writeln!(w, "axis,x,observable,value")?,
        }
        for cell in &self.cells {
            let coords: Vec<String> = match s.layout {
                Layout::Grid => cell.coords.iter().map(|(k, x)| k.format_value(*x)).collect(),
                Layout::Lines => {
                    cell.coords.iter().flat_map(|(k, x)| [k.name().to_string(), k.format_value(*x)]).collect()
                }
            };
            let prefix = coords.join(",");
            match &cell.error {
                Some(e) => writeln!(w, "{prefix},error:{},NaN", e.kind)?,
                None => {
                    for (o, v) in s.observables.iter().zip(&cell.values) {
                        if prefix.is_empty() {
                            writeln!(w, "{o},{}", fmt_num(*v))?;
                        } else {
                            writeln!(w, "{prefix},{o},{}", fmt_num(*v))?;
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Writes `<stem>.csv` and `<stem>.json` into `dir`.
    pub fn write_files(&self, dir: &Path) -> Result<(PathBuf, PathBuf)> {
        std::fs::create_dir_all(dir)?;
        let csv = dir.join(format!("{}.csv", self.file_stem()));
        let json = dir.join(format!("{}.json", self.file_stem()));
        self.write_csv(std::io::BufWriter::new(std::fs::File::create(&csv)?))?;
        serde_json::to_writer_pretty(std::io::BufWriter::new(std::fs::File::create(&json)?), self)?;
        Ok((csv, json))
    }
}

/// Names of the registered scenarios.
pub const SCENARIOS: &[&str] =
    &["fig4", "fig5", "fig6", "fig7", "fig8a", "fig8b", "fig9a", "fig9b", "fig10a", "fig10b", "headline", "natom"];

/// Default points per axis of two-dimensional sweeps.
pub const GRID_POINTS: usize = 41;
const SERIES_POINTS: usize = 201;
const DECAY_MAX: f64 = 0.01;

fn adiabatic_decay_point() -> SystemParams {
    SystemParams { tf: 153.0, omega0: 0.5, ..SystemParams::default() }
}

/// Looks up a registered scenario.
pub fn scenario(name: &str) -> Result<Scenario> {
    use AxisKind::*;
    let n = GRID_POINTS;
    let tqd = SystemParams::default();
    let mk = |description: &str,
              base: SystemParams,
              schedule: ScheduleKind,
              open: bool,
              layout: Layout,
              axes: Vec<Axis>,
              observables: Vec<Observable>| Scenario {
        name: name.to_string(),
        description: description.to_string(),
        base,
        schedule,
        open,
        layout,
        axes,
        observables,
        steps: crate::dynamics::DEFAULT_STEPS,
    };
    let decay_lines = || -> Result<Vec<Axis>> {
        [Gamma, KappaC, KappaF].into_iter().map(|k| Axis::linspace(k, 0.0, DECAY_MAX, n)).collect()
    };
    let populations = vec![Observable::PopPhi1, Observable::PopPhiLast, Observable::Fidelity, Observable::Leakage];
    let s = match name {
        "fig4" => mk(
            "adiabatic fidelity versus pulse amplitude and time",
            SystemParams { tf: 400.0, ..tqd },
            ScheduleKind::Adiabatic,
            false,
            Layout::Grid,
            vec![Axis::open_linspace(Omega0, 0.0, 0.3, n)?, Axis::open_linspace(Time, 0.0, 1.0, n)?],
            vec![Observable::Fidelity],
        ),
        "fig5" => mk(
            "adiabatic populations over time at t_f = 400",
            SystemParams { tf: 400.0, ..tqd },
            ScheduleKind::Adiabatic,
            false,
            Layout::Grid,
            vec![Axis::linspace(Time, 0.0, 1.0, SERIES_POINTS)?],
            populations,
        ),
        "fig6" => mk(
            "transitionless fidelity versus operation time and detuning",
            tqd,
            ScheduleKind::Tqd,
            false,
            Layout::Grid,
            vec![Axis::linspace(Tf, 10.0, 150.0, n)?, Axis::linspace(Delta, 0.5, 4.0, n)?],
            vec![Observable::Fidelity],
        ),
        "fig7" => mk(
            "transitionless and adiabatic populations over time at t_f = 72",
            tqd,
            ScheduleKind::Tqd,
            false,
            Layout::Grid,
            vec![Axis::new(Schedule, vec![0.0, 1.0])?, Axis::linspace(Time, 0.0, 1.0, SERIES_POINTS)?],
            populations,
        ),
        "fig8a" => mk(
            "transitionless fidelity versus each decay rate",
            tqd,
            ScheduleKind::Tqd,
            true,
            Layout::Lines,
            decay_lines()?,
            vec![Observable::Fidelity, Observable::Leakage],
        ),
        "fig8b" => mk(
            "adiabatic fidelity versus each decay rate at t_f = 153, omega0 = 0.5",
            adiabatic_decay_point(),
            ScheduleKind::Adiabatic,
            true,
            Layout::Lines,
            decay_lines()?,
            vec![Observable::Fidelity, Observable::Leakage],
        ),
        "fig9a" => mk(
            "transitionless fidelity versus emission and cavity decay",
            tqd,
            ScheduleKind::Tqd,
            true,
            Layout::Grid,
            vec![Axis::linspace(Gamma, 0.0, DECAY_MAX, n)?, Axis::linspace(KappaC, 0.0, DECAY_MAX, n)?],
            vec![Observable::Fidelity],
        ),
        "fig9b" => mk(
            "adiabatic fidelity versus emission and cavity decay at t_f = 153, omega0 = 0.5",
            adiabatic_decay_point(),
            ScheduleKind::Adiabatic,
            true,
            Layout::Grid,
            vec![Axis::linspace(Gamma, 0.0, DECAY_MAX, n)?, Axis::linspace(KappaC, 0.0, DECAY_MAX, n)?],
            vec![Observable::Fidelity],
        ),
        "fig10a" => mk(
            "transitionless fidelity versus relative deviations of g and v",
            tqd,
            ScheduleKind::Tqd,
            false,
            Layout::Grid,
            vec![Axis::linspace(DeltaG, -0.1, 0.1, n)?, Axis::linspace(DeltaV, -0.1, 0.1, n)?],
            vec![Observable::Fidelity],
        ),
        "fig10b" => mk(
            "transitionless fidelity versus relative deviations of t_f and omega0",
            tqd,
            ScheduleKind::Tqd,
            false,
            Layout::Grid,
            vec![Axis::linspace(DeltaT, -0.1, 0.1, n)?, Axis::linspace(DeltaOmega0, -0.1, 0.1, n)?],
            vec![Observable::Fidelity],
        ),
        "headline" => mk(
            "transitionless fidelity with the experimental decay rates",
            SystemParams::experimental(),
            ScheduleKind::Tqd,
            true,
            Layout::Grid,
            Vec::new(),
            vec![Observable::Fidelity, Observable::Leakage],
        ),
        "natom" => mk(
            "transitionless fidelity for N = 3, 5, 7 at t_f = 72",
            tqd,
            ScheduleKind::Tqd,
            false,
            Layout::Grid,
            vec![Axis::new(NAtoms, vec![3.0, 5.0, 7.0])?],
            vec![Observable::Fidelity, Observable::Leakage],
        ),
        other => {
            return Err(Error::UnknownScenario(format!("{other} (registered: {})", SCENARIOS.join(", "))));
        }
    };
    s.validate()?;
    Ok(s)
}

/// Runs a registered scenario with overrides on the rayon pool.
pub fn run_scenario(name: &str, overrides: &Overrides) -> Result<SweepResult> {
    scenario(name)?.with_overrides(overrides)?.run(true)
}

/// Same as [`run_scenario`] on the calling thread.
pub fn run_scenario_serial(name: &str, overrides: &Overrides) -> Result<SweepResult> {
    scenario(name)?.with_overrides(overrides)?.run(false)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(name: &str, points: usize) -> Scenario {
        let o = Overrides { points: Some(points), steps: Some(2000), ..Default::default() };
        scenario(name).unwrap().with_overrides(&o).unwrap()
    }

    #[test]
    fn registry_is_complete() {
        for name in SCENARIOS {
            let s = scenario(name).unwrap();
            assert_eq!(&s.name, name);
            s.validate().unwrap();
        }
        assert!(matches!(scenario("fig11"), Err(Error::UnknownScenario(_))));
    }

    #[test]
    fn default_grid_sizes() {
        assert_eq!(scenario("fig6").unwrap().cell_count(), 41 * 41);
        assert_eq!(scenario("fig9a").unwrap().cell_count(), 41 * 41);
        assert_eq!(scenario("fig8a").unwrap().cell_count(), 3 * 41);
        assert_eq!(scenario("headline").unwrap().cell_count(), 1);
        assert_eq!(scenario("natom").unwrap().cell_count(), 3);
        let fig4 = scenario("fig4").unwrap();
        assert_eq!(fig4.axes[0].values[0], 0.3 / 41.0);
        assert_eq!(*fig4.axes[0].values.last().unwrap(), 0.3);
    }

    #[test]
    fn axis_validation() {
        assert!(Axis::new(AxisKind::Tf, vec![]).is_err());
        assert!(Axis::new(AxisKind::Tf, vec![1.0, 1.0]).is_err());
        assert!(Axis::new(AxisKind::Tf, vec![1.0, 3.0, 2.0]).is_err());
        assert!(Axis::new(AxisKind::Tf, vec![3.0, 2.0]).is_ok());
        assert_eq!(Axis::linspace(AxisKind::Delta, 0.5, 4.0, 41).unwrap().values[40], 4.0);
        assert!("bogus".parse::<AxisKind>().is_err());
        for a in AxisKind::ALL {
            assert_eq!(a.name().parse::<AxisKind>().unwrap(), a);
        }
    }

    #[test]
    fn deviations_are_relative() {
        let s = scenario("fig10b").unwrap();
        let spec = s.spec_for(&[(AxisKind::DeltaT, 0.1), (AxisKind::DeltaOmega0, -0.1)]).unwrap();
        assert!((spec.params.tf - 79.2).abs() < 1e-12);
        assert!((spec.params.omega0 - 0.18).abs() < 1e-12);
        assert!((spec.params.t0() - 0.14 * 79.2).abs() < 1e-12);
    }

    #[test]
    fn overrides_reshape_axes() {
        let s = small("fig6", 5);
        assert_eq!(s.cell_count(), 25);
        assert_eq!(s.axes[0].values, vec![10.0, 45.0, 80.0, 115.0, 150.0]);
        let f4 = small("fig4", 4);
        assert_eq!(f4.axes[1].values, vec![0.25, 0.5, 0.75, 1.0]);
        let mut o = Overrides::default();
        o.ranges.insert("omega0".into(), (0.0, 0.1));
        assert!(scenario("fig6").unwrap().with_overrides(&o).is_err());
        o.params.insert("nonsense".into(), 1.0);
        assert!(scenario("fig4").unwrap().with_overrides(&o).is_err());
    }

    #[test]
    fn closed_run_rejects_rates() {
        let p = SystemParams { gamma: 0.01, ..SystemParams::default() };
        let spec = RunSpec::new(p, ScheduleKind::Tqd, false).with_steps(2000);
        assert!(matches!(final_fidelity(&spec), Err(Error::OpenSystemRequired(_))));
    }

    #[test]
    fn failed_cells_are_recorded() {
        let mut s = small("fig6", 2);
        s.axes[0] = Axis::new(AxisKind::Tf, vec![20.0, 40.0]).unwrap();
        s.axes[1] = Axis::new(AxisKind::Delta, vec![-1.0, 2.3]).unwrap();
        let r = s.run(false).unwrap();
        assert_eq!(r.cells.len(), 4);
        assert_eq!(r.failures().len(), 2);
        assert!(r.cells[0].error.is_some());
        assert!(r.cells[1].error.is_none());
        let mut csv = Vec::new();
        r.write_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert!(text.starts_with("tf,delta,observable,value\n"));
        assert!(text.contains("error:"));
    }

    #[test]
    fn serial_and_parallel_agree() {
        let s = small("fig10a", 3);
        let a = s.run(false).unwrap();
        let b = s.run(true).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.provenance.hash.len(), 12);
    }

    #[test]
    fn time_axis_rows() {
        let s = small("fig7", 5);
        let r = s.run(false).unwrap();
        assert_eq!(r.cells.len(), 2 * 5);
        let first = &r.cells[0];
        assert_eq!(first.coords, vec![(AxisKind::Schedule, 0.0), (AxisKind::Time, 0.0)]);
        assert_eq!(r.value(0, Observable::PopPhi1), Some(1.0));
        let mut csv = Vec::new();
        r.write_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert!(text.lines().nth(1).unwrap().starts_with("adiabatic,0.00000000000e0,pop:phi1,"));
    }

    #[test]
    fn line_layout_csv() {
        let mut s = small("fig8a", 2);
        s.steps = 1000;
        let r = s.run(false).unwrap();
        let mut csv = Vec::new();
        r.write_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("axis,x,observable,value"));
        assert!(lines.next().unwrap().starts_with("gamma,0.00000000000e0,fidelity,"));
        assert_eq!(text.lines().count(), 1 + 6 * 2);
    }

    #[test]
    fn hash_tracks_definition() {
        let a = Provenance::of(&scenario("fig6").unwrap()).unwrap();
        let b = Provenance::of(&small("fig6", 5)).unwrap();
        assert_ne!(a.hash, b.hash);
        assert_eq!(a, Provenance::of(&scenario("fig6").unwrap()).unwrap());
    }
}
