//! Fractional-STIRAP pulse pair, mixing angle and the counter-diabatic pulse.
//!
//! Times run over `[0, t_f]` with the two Gaussians centred at `t_f/2 ∓ t_0`.
//! The mixing angle derivative is evaluated from closed-form Gaussian
//! derivatives; the counter-diabatic amplitude takes a square root of it, so
//! finite differences would put their noise straight into the drive.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::SystemParams;
use crate::zeno::bright_normalizer;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleKind {
    /// Resonant fractional STIRAP with the Gaussian pair.
    Adiabatic,
    /// Detuned transitionless driving with `Ω̄ = √(NΔθ̇)` on both end atoms.
    Tqd,
}

impl ScheduleKind {
    pub fn label(self) -> &'static str {
        match self {
            ScheduleKind::Adiabatic => "adiabatic",
            ScheduleKind::Tqd => "tqd",
        }
    }
}

impl fmt::Display for ScheduleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for ScheduleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "adiabatic" => Ok(ScheduleKind::Adiabatic),
            "tqd" => Ok(ScheduleKind::Tqd),
            other => Err(Error::Config(format!("unknown schedule '{other}' (expected 'adiabatic' or 'tqd')"))),
        }
    }
}

/// Everything a schedule knows at one instant.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseSample {
    pub t: f64,
    pub omega1: f64,
    pub omega3: f64,
    pub theta: f64,
    pub theta_dot: f64,
    pub omega_bar: f64,
}

/// Values and time derivatives of the two Gaussian envelopes.
#[derive(Clone, Copy, Debug)]
struct Envelopes {
    /// Late Gaussian (centre `t_f/2 + t_0`) and its derivative.
    late: (f64, f64),
    /// Early Gaussian (centre `t_f/2 - t_0`) and its derivative.
    early: (f64, f64),
}

fn envelopes(t: f64, p: &SystemParams) -> Envelopes {
    let (t0, tc, tf) = (p.t0(), p.tc(), p.tf);
    let gauss = |centre: f64| {
        let x = t - centre;
        let e = (-(x * x) / (tc * tc)).exp();
        (e, -2.0 * x / (tc * tc) * e)
    };
    Envelopes { late: gauss(tf / 2.0 + t0), early: gauss(tf / 2.0 - t0) }
}

/// `(Ω₁(t), Ω₃(t))` of the fractional-STIRAP pair.
pub fn stirap_pair(t: f64, p: &SystemParams) -> (f64, f64) {
    let env = envelopes(t, p);
    let (s, c) = p.alpha.sin_cos();
    (s * p.omega0 * env.late.0, p.omega0 * env.early.0 + c * p.omega0 * env.late.0)
}

/// `(Ω̇₁(t), Ω̇₃(t))`.
pub fn stirap_pair_derivative(t: f64, p: &SystemParams) -> (f64, f64) {
    let env = envelopes(t, p);
    let (s, c) = p.alpha.sin_cos();
    (s * p.omega0 * env.late.1, p.omega0 * env.early.1 + c * p.omega0 * env.late.1)
}

/// `(θ, θ̇)` with `tan θ = Ω₁/Ω₃`.
pub fn mixing_angle(t: f64, p: &SystemParams) -> Result<(f64, f64)> {
    let (o1, o3) = stirap_pair(t, p);
    let (d1, d3) = stirap_pair_derivative(t, p);
    let norm2 = o1 * o1 + o3 * o3;
    if norm2 == 0.0 || !norm2.is_finite() {
        return Err(Error::UndefinedAngle(t));
    }
    Ok((o1.atan2(o3), (d1 * o3 - o1 * d3) / norm2))
}

/// Tolerance below which a negative `θ̇` is treated as rounding noise.
pub fn theta_dot_tolerance(p: &SystemParams) -> f64 {
    1e-12 * p.omega0 / p.tf
}

/// Counter-diabatic amplitude `√(NΔ·θ̇)` for a given angular velocity.
///
/// Eliminating the bright state at energy `NΔN₁²` gives the coupling
/// `−Ω̄²/(NΔ)` between the end states, which matches `−θ̇` for this amplitude.
pub fn cdd_amplitude(theta_dot: f64, delta: f64, n_atoms: usize, eps: f64) -> Result<f64> {
    if theta_dot < -eps {
        return Err(Error::NonMonotoneAngle { t: f64::NAN, theta_dot });
    }
    Ok((n_atoms as f64 * delta * theta_dot.max(0.0)).sqrt())
}

/// `Ω̄(t)` of the transitionless schedule.
pub fn tqd_pulse(t: f64, p: &SystemParams) -> Result<f64> {
    let (_, theta_dot) = mixing_angle(t, p)?;
    cdd_amplitude(theta_dot, p.delta, p.n_atoms, theta_dot_tolerance(p)).map_err(|e| match e {
        Error::NonMonotoneAngle { theta_dot, .. } => Error::NonMonotoneAngle { t, theta_dot },
        other => other,
    })
}

/// Pulse program of one run.
#[derive(Clone, Debug, PartialEq)]
pub struct PulseSchedule {
    kind: ScheduleKind,
    params: SystemParams,
}

impl PulseSchedule {
    pub fn new(kind: ScheduleKind, params: &SystemParams) -> Result<Self> {
        if kind == ScheduleKind::Tqd && params.delta <= 0.0 {
            return Err(Error::Config("the transitionless schedule needs delta > 0".into()));
        }
        Ok(Self { kind, params: params.clone() })
    }

    pub fn kind(&self) -> ScheduleKind {
        self.kind
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    pub fn sample(&self, t: f64) -> Result<PulseSample> {
        let (omega1, omega3) = stirap_pair(t, &self.params);
        let (theta, theta_dot) = mixing_angle(t, &self.params)?;
        let omega_bar = match self.kind {
            ScheduleKind::Tqd => tqd_pulse(t, &self.params)?,
            ScheduleKind::Adiabatic => 0.0,
        };
        Ok(PulseSample { t, omega1, omega3, theta, theta_dot, omega_bar })
    }

    /// Real laser amplitudes on the first and last atom. Negative `θ̇` within
    /// tolerance is clamped; call [`PulseSchedule::validate_on`] first to
    /// reject genuinely non-monotone programs.
    pub fn drive(&self, t: f64) -> (f64, f64) {
        match self.kind {
            ScheduleKind::Adiabatic => stirap_pair(t, &self.params),
            ScheduleKind::Tqd => {
                let p = &self.params;
                let theta_dot = mixing_angle(t, p).map(|a| a.1).unwrap_or(0.0);
                let bar = (p.n_atoms as f64 * p.delta * theta_dot.max(0.0)).sqrt();
                (bar, bar)
            }
        }
    }

    /// Checks every RK4 stage time of an `steps`-step grid over `[0, t_f]`.
    pub fn validate_on(&self, steps: usize) -> Result<()> {
        let dt = self.params.tf / steps as f64;
        for k in 0..=2 * steps {
            let t = 0.5 * dt * k as f64;
            mixing_angle(t, &self.params)?;
            if self.kind == ScheduleKind::Tqd {
                tqd_pulse(t, &self.params)?;
            }
        }
        Ok(())
    }

    /// `max_t |⟨η₀|∂_t η_±⟩| / |λ_±|` over `points` uniform samples of `[0, t_f]`.
    ///
    /// For the dark/bright triple the matrix element is `θ̇/√2` and the
    /// bright-state splitting is `N₁Ω`.
    pub fn adiabaticity(&self, points: usize) -> Result<f64> {
        let p = &self.params;
        let n1 = bright_normalizer(p.g, p.v, p.n_atoms);
        let mut worst: f64 = 0.0;
        for k in 0..points {
            let t = p.tf * k as f64 / (points - 1).max(1) as f64;
            let (o1, o3) = stirap_pair(t, p);
            let (_, theta_dot) = mixing_angle(t, p)?;
            let ratio = theta_dot.abs() / std::f64::consts::SQRT_2 / (n1 * o1.hypot(o3));
            worst = worst.max(ratio);
        }
        Ok(worst)
    }

    /// Uniform samples including both end points.
    pub fn table(&self, points: usize) -> Result<Vec<PulseSample>> {
        let n = points.max(2);
        (0..n).map(|k| self.sample(self.params.tf * k as f64 / (n - 1) as f64)).collect()
    }
}
