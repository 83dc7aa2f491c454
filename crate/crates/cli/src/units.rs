//! Physical-unit strings such as `2pi*750 MHz`, `1.52e5 Hz` or `45 deg`.

use std::f64::consts::PI;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum UnitError {
    #[error("cannot parse '{0}' as a number")]
    Number(String),
    #[error("{unit} is not a {expected} unit")]
    Mismatch { unit: String, expected: &'static str },
    #[error("physical units need a reference g; give g in physical units or use the experimental preset")]
    NoReference,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Unit {
    /// Bare number or explicit `g`: already in units of g (or 1/g for times).
    Natural,
    /// Angular frequency in rad/s times the prefix factor.
    Hertz(f64),
    /// Seconds times the prefix factor.
    Seconds(f64),
    Degrees,
    Radians,
}

impl Unit {
    fn name(self) -> String {
        match self {
            Unit::Natural => "g".into(),
            Unit::Hertz(s) => format!("Hz x {s:e}"),
            Unit::Seconds(s) => format!("s x {s:e}"),
            Unit::Degrees => "deg".into(),
            Unit::Radians => "rad".into(),
        }
    }
}

/// Dimension a parameter is measured in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dimension {
    Frequency,
    Time,
    Angle,
    Dimensionless,
}

impl Dimension {
    pub fn of_param(key: &str) -> Self {
        match key {
            "tf" => Dimension::Time,
            "alpha" => Dimension::Angle,
            "t0_frac" | "tc_frac" | "n_atoms" => Dimension::Dimensionless,
            _ => Dimension::Frequency,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quantity {
    pub value: f64,
    pub unit: Unit,
}

// Longest suffixes first so `ms` wins over `s` and `deg` over `g`.
const SUFFIXES: &[(&str, Unit)] = &[
    ("GHz", Unit::Hertz(1e9)),
    ("MHz", Unit::Hertz(1e6)),
    ("kHz", Unit::Hertz(1e3)),
    ("deg", Unit::Degrees),
    ("rad", Unit::Radians),
    ("1/g", Unit::Natural),
    ("Hz", Unit::Hertz(1.0)),
    ("ms", Unit::Seconds(1e-3)),
    ("us", Unit::Seconds(1e-6)),
    ("µs", Unit::Seconds(1e-6)),
    ("ns", Unit::Seconds(1e-9)),
    ("ps", Unit::Seconds(1e-12)),
    ("/g", Unit::Natural),
    ("s", Unit::Seconds(1.0)),
    ("g", Unit::Natural),
];

/// Parses `<expr> [unit]`, where `expr` is a product of numbers and `pi`
/// factors joined by `*`, `×` or `·` (`2pi` is shorthand for `2*pi`).
pub fn parse_quantity(text: &str) -> Result<Quantity, UnitError> {
    let s = text.trim();
    let (expr, unit) = SUFFIXES
        .iter()
        .find_map(|(suffix, unit)| s.strip_suffix(suffix).map(|rest| (rest.trim_end(), *unit)))
        .unwrap_or((s, Unit::Natural));
    let value = parse_product(expr).ok_or_else(|| UnitError::Number(text.to_string()))?;
    Ok(Quantity { value, unit })
}

fn parse_product(expr: &str) -> Option<f64> {
    if expr.trim().is_empty() {
        return None;
    }
    expr.split(['*', '×', '·']).try_fold(1.0, |acc, factor| {
        let f = factor.trim();
        let (coef, pi) = match f.strip_suffix("pi").or_else(|| f.strip_suffix('π')) {
            Some(c) => (c.trim(), PI),
            None => (f, 1.0),
        };
        let c = if coef.is_empty() && pi != 1.0 { 1.0 } else { coef.parse::<f64>().ok()? };
        Some(acc * c * pi)
    })
}

impl Quantity {
    /// Value in units of g for a parameter of `dim`. `g_ref` is the
    /// reference coupling in rad/s, needed only for physical units.
    pub fn to_natural(self, dim: Dimension, g_ref: Option<f64>) -> Result<f64, UnitError> {
        let mismatch = |expected| Err(UnitError::Mismatch { unit: self.unit.name(), expected });
        match (dim, self.unit) {
            (_, Unit::Natural) => Ok(self.value),
            (Dimension::Frequency, Unit::Hertz(s)) => Ok(self.value * s / g_ref.ok_or(UnitError::NoReference)?),
            (Dimension::Time, Unit::Seconds(s)) => Ok(self.value * s * g_ref.ok_or(UnitError::NoReference)?),
            (Dimension::Angle, Unit::Radians) => Ok(self.value),
            (Dimension::Angle, Unit::Degrees) => Ok(self.value.to_radians()),
            (Dimension::Frequency, _) => mismatch("frequency"),
            (Dimension::Time, _) => mismatch("time"),
            (Dimension::Angle, _) => mismatch("angle"),
            (Dimension::Dimensionless, _) => mismatch("dimensionless"),
        }
    }

    /// Rad/s value when this is a physical frequency.
    pub fn angular_frequency(self) -> Option<f64> {
        match self.unit {
            Unit::Hertz(s) => Some(self.value * s),
            _ => None,
        }
    }
}
