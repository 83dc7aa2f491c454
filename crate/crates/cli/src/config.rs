//! Run configuration: JSON file plus command-line flags.
//!
//! Precedence, lowest to highest: built-in defaults, preset, config file,
//! flags. Parameter values may be plain numbers (units of g) or strings with
//! physical units; see [`crate::units`].

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use ghzsim::dynamics::{DEFAULT_STEPS, MIN_STEPS};
use ghzsim::experiments::Overrides;
use ghzsim::model::{experimental, Branching, SystemParams, PARAM_KEYS};
use ghzsim::observables::Observable;
use ghzsim::pulses::ScheduleKind;
use ghzsim::{Error, Violation};
use serde::{Deserialize, Serialize};

use crate::units::{parse_quantity, Dimension};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    /// Ideal operating point, no decay.
    #[default]
    Ideal,
    /// Operating point with the experimental decay rates.
    Experimental,
}

impl Preset {
    fn params(self) -> SystemParams {
        match self {
            Preset::Ideal => SystemParams::default(),
            Preset::Experimental => SystemParams::experimental(),
        }
    }

    /// Reference coupling in rad/s for physical-unit inputs.
    fn g_reference(self) -> Option<f64> {
        match self {
            Preset::Ideal => None,
            Preset::Experimental => Some(experimental::G_HZ),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

/// Parameter value as written in a file or flag.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RawValue {
    Number(f64),
    Text(String),
}

impl RawValue {
    fn describe(&self) -> String {
        match self {
            RawValue::Number(x) => x.to_string(),
            RawValue::Text(s) => s.clone(),
        }
    }
}

/// On-disk configuration. Every field is optional.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<Preset>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, RawValue>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub branching: Option<Branching>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub schedule: Option<ScheduleKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub open: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub record_every: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub observables: Option<Vec<Observable>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scenario: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub overrides: Option<Overrides>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<OutputFormat>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, Error> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }
}

/// Settings given on the command line; `None` leaves the file value.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Flags {
    pub preset: Option<Preset>,
    pub params: BTreeMap<String, RawValue>,
    pub schedule: Option<ScheduleKind>,
    pub open: Option<bool>,
    pub steps: Option<usize>,
    pub record_every: Option<usize>,
    pub observables: Option<Vec<Observable>>,
    pub output_dir: Option<PathBuf>,
    pub format: Option<OutputFormat>,
}

/// Fully resolved configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub preset: Preset,
    /// Explicit parameter assignments, already in units of g.
    pub assigned: BTreeMap<String, f64>,
    pub branching: Option<Branching>,
    pub params: SystemParams,
    pub schedule: Option<ScheduleKind>,
    pub open: Option<bool>,
    pub steps: Option<usize>,
    pub record_every: Option<usize>,
    pub observables: Option<Vec<Observable>>,
    pub scenario: Option<String>,
    pub overrides: Overrides,
    pub output_dir: Option<PathBuf>,
    pub format: Option<OutputFormat>,
}

/// Samples written along a trajectory when `record_every` is not given.
const DEFAULT_SAMPLES: usize = 200;

impl RunConfig {
    pub fn schedule(&self) -> ScheduleKind {
        self.schedule.unwrap_or(ScheduleKind::Tqd)
    }

    /// Open when asked for, or implicitly when any decay rate is nonzero.
    pub fn open(&self) -> bool {
        self.open.unwrap_or_else(|| self.params.is_dissipative())
    }

    pub fn steps(&self) -> usize {
        self.steps.unwrap_or(DEFAULT_STEPS)
    }

    pub fn record_every(&self) -> usize {
        self.record_every.unwrap_or((self.steps() / DEFAULT_SAMPLES).max(1))
    }

    pub fn observables(&self) -> Vec<Observable> {
        self.observables.clone().unwrap_or_else(|| vec![Observable::Fidelity])
    }

    pub fn format(&self) -> OutputFormat {
        self.format.unwrap_or_default()
    }

    /// Overrides for a registered scenario: the file's `overrides`, then the
    /// preset's decay rates, then explicit parameters and solver settings.
    pub fn scenario_overrides(&self) -> Overrides {
        let mut o = self.overrides.clone();
        if self.preset == Preset::Experimental {
            let p = Preset::Experimental.params();
            o.params.insert("gamma".into(), p.gamma);
            o.params.insert("kappa_c".into(), p.kappa_c);
            o.params.insert("kappa_f".into(), p.kappa_f);
        }
        o.params.extend(self.assigned.iter().map(|(k, v)| (k.clone(), *v)));
        o.steps = self.steps.or(o.steps);
        o.open = self.open.or(o.open);
        o.schedule = self.schedule.or(o.schedule);
        if self.observables.is_some() {
            o.observables = self.observables.clone();
        }
        o
    }

    /// File form that re-parses to this configuration.
    pub fn to_file(&self) -> ConfigFile {
        let overrides = (self.overrides != Overrides::default()).then(|| self.overrides.clone());
        ConfigFile {
            preset: Some(self.preset),
            params: self.assigned.iter().map(|(k, v)| (k.clone(), RawValue::Number(*v))).collect(),
            branching: self.branching,
            schedule: self.schedule,
            open: self.open,
            steps: self.steps,
            record_every: self.record_every,
            observables: self.observables.clone(),
            scenario: self.scenario.clone(),
            overrides,
            output_dir: self.output_dir.clone(),
            format: self.format,
        }
    }
}

fn violation(key: &str, message: impl Into<String>) -> Violation {
    Violation::new(key, message)
}

/// Merges `file` and `flags` and validates the result. Every problem found
/// is reported at once.
pub fn resolve(file: ConfigFile, flags: Flags) -> Result<RunConfig, Error> {
    let mut violations = Vec::new();
    let preset = flags.preset.or(file.preset).unwrap_or_default();

    let mut raw = file.params.clone();
    raw.extend(flags.params);

    // Physical `g` sets the unit; everything else is then relative to it.
    let mut g_ref = preset.g_reference();
    if let Some(RawValue::Text(s)) = raw.get("g") {
        if let Some(w) = parse_quantity(s).ok().and_then(|q| q.angular_frequency()) {
            g_ref = Some(w);
        }
    }

    let mut assigned = BTreeMap::new();
    for (key, value) in &raw {
        if !PARAM_KEYS.contains(&key.as_str()) {
            violations.push(violation(key, format!("unknown parameter (known: {})", PARAM_KEYS.join(", "))));
            continue;
        }
        let converted = match value {
            RawValue::Number(x) => Ok(*x),
            RawValue::Text(s) => parse_quantity(s).and_then(|q| {
                if key == "g" && q.angular_frequency().is_some() {
                    Ok(1.0)
                } else {
                    q.to_natural(Dimension::of_param(key), g_ref)
                }
            }),
        };
        match converted {
            Ok(x) => {
                assigned.insert(key.clone(), x);
            }
            Err(e) => {
                violations.push(violation(key, format!("'{}': {e}", value.describe())));
            }
        }
    }

    let overrides = file.overrides.clone().unwrap_or_default();
    for (key, x) in &overrides.params {
        if let Some(y) = file.params.get(key) {
            if assigned.get(key) != Some(x) {
                violations.push(violation(
                    key,
                    format!("conflicting values in params ({}) and overrides.params ({x})", y.describe()),
                ));
            }
        }
    }

    let mut params = preset.params();
    if let Some(b) = file.branching {
        params.branching = b;
    }
    for (key, x) in &assigned {
        if let Err(e) = params.set(key, *x) {
            violations.push(violation(key, e.to_string()));
        }
    }
    violations.extend(params.violations());

    let steps = flags.steps.or(file.steps);
    if let Some(s) = steps {
        if s < MIN_STEPS {
            violations.push(violation("steps", format!("must be at least {MIN_STEPS}, got {s}")));
        }
    }
    let record_every = flags.record_every.or(file.record_every);
    if let Some(r) = record_every {
        if r == 0 || r > steps.unwrap_or(DEFAULT_STEPS) {
            violations.push(violation("record_every", format!("must lie in [1, steps], got {r}")));
        }
    }
    let open = flags.open.or(file.open);
    if open == Some(false) && params.is_dissipative() {
        violations.push(violation("open", "decay rates are nonzero but the system is closed"));
    }

    if !violations.is_empty() {
        return Err(Error::InvalidParams(violations));
    }
    Ok(RunConfig {
        preset,
        assigned,
        branching: file.branching,
        params,
        schedule: flags.schedule.or(file.schedule),
        open,
        steps,
        record_every,
        observables: flags.observables.or(file.observables),
        scenario: file.scenario,
        overrides,
        output_dir: flags.output_dir.or(file.output_dir),
        format: flags.format.or(file.format),
    })
}
