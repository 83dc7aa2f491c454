//! Populations, GHZ fidelities and the leakage diagnostic.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::dynamics::{QuantumState, Trajectory};
use crate::error::{Error, Result};
use crate::hilbert::HilbertSpace;
use crate::model::SystemParams;
use crate::pulses::ScheduleKind;
use crate::zeno::bright_state;
use crate::C64;

/// GHZ state reached by a schedule: `(φ₁ − φ_last)/√2` for the adiabatic
/// scheme, `(φ₁ + iφ_last)/√2` for the transitionless one.
#[derive(Clone, Debug, PartialEq)]
pub struct TargetState {
    pub method: ScheduleKind,
    pub n_atoms: usize,
    pub vector: DVector<C64>,
}

impl TargetState {
    pub fn new(space: &HilbertSpace, method: ScheduleKind) -> Result<Self> {
        let last =
            space.final_index().ok_or_else(|| Error::Config("final GHZ component is not in the basis".into()))?;
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut v = DVector::<C64>::zeros(space.dim());
        v[space.initial_index()] = C64::new(s, 0.0);
        v[last] = match method {
            ScheduleKind::Adiabatic => C64::new(-s, 0.0),
            ScheduleKind::Tqd => C64::new(0.0, s),
        };
        Ok(Self { method, n_atoms: space.n_atoms(), vector: v })
    }
}

fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::Dimension { expected, found });
    }
    Ok(())
}

/// `|⟨ψ|φ⟩|²` for a pure state.
pub fn population_pure(state: &DVector<C64>, psi: &DVector<C64>) -> Result<f64> {
    check_len(psi.len(), state.len())?;
    Ok(psi.dotc(state).norm_sqr())
}

/// `|⟨ψ|ρ|ψ⟩|`.
pub fn population_mixed(rho: &DMatrix<C64>, psi: &DVector<C64>) -> Result<f64> {
    check_len(psi.len(), rho.nrows())?;
    check_len(rho.nrows(), rho.ncols())?;
    Ok(psi.dotc(&(rho * psi)).norm())
}

pub fn population(state: &QuantumState, psi: &DVector<C64>) -> Result<f64> {
    match state {
        QuantumState::Pure(v) => population_pure(v, psi),
        QuantumState::Mixed(m) => population_mixed(m, psi),
    }
}

/// `F = |⟨GHZ|ρ|GHZ⟩|`. The schedule that produced the state must match the
/// target's method; the two targets differ by a relative phase of `i`.
pub fn ghz_fidelity(state: &QuantumState, target: &TargetState, schedule: ScheduleKind) -> Result<f64> {
    if target.method != schedule {
        return Err(Error::TargetMismatch { target: target.method.to_string(), schedule: schedule.to_string() });
    }
    population(state, &target.vector)
}

/// Final-state fidelity of a trajectory carrying run metadata.
pub fn trajectory_fidelity(tr: &Trajectory, target: &TargetState) -> Result<f64> {
    let schedule = tr
        .metadata
        .as_ref()
        .map(|m| m.schedule)
        .ok_or_else(|| Error::Config("trajectory has no schedule metadata".into()))?;
    ghz_fidelity(tr.final_state(), target, schedule)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Observable {
    #[serde(rename = "pop:phi1")]
    PopPhi1,
    #[serde(rename = "pop:phiLast")]
    PopPhiLast,
    #[serde(rename = "pop:bright")]
    PopBright,
    #[serde(rename = "fidelity")]
    Fidelity,
    #[serde(rename = "leakage")]
    Leakage,
}

impl Observable {
    pub const ALL: [Observable; 5] =
        [Observable::PopPhi1, Observable::PopPhiLast, Observable::PopBright, Observable::Fidelity, Observable::Leakage];

    pub fn name(self) -> &'static str {
        match self {
            Observable::PopPhi1 => "pop:phi1",
            Observable::PopPhiLast => "pop:phiLast",
            Observable::PopBright => "pop:bright",
            Observable::Fidelity => "fidelity",
            Observable::Leakage => "leakage",
        }
    }
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Observable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Observable::ALL.into_iter().find(|o| o.name() == s).ok_or_else(|| {
            let names: Vec<_> = Observable::ALL.iter().map(|o| o.name()).collect();
            Error::Config(format!("unknown observable '{s}' (known: {})", names.join(", ")))
        })
    }
}

/// Precomputed probe vectors for evaluating observables on one basis.
#[derive(Clone, Debug)]
pub struct Probes {
    phi1: DVector<C64>,
    phi_last: DVector<C64>,
    bright: DVector<C64>,
    target: TargetState,
}

impl Probes {
    pub fn new(space: &HilbertSpace, params: &SystemParams, schedule: ScheduleKind) -> Result<Self> {
        let last =
            space.final_index().ok_or_else(|| Error::Config("final GHZ component is not in the basis".into()))?;
        Ok(Self {
            phi1: space.basis_vector(space.initial_index()),
            phi_last: space.basis_vector(last),
            bright: bright_state(space, params.g, params.v)?,
            target: TargetState::new(space, schedule)?,
        })
    }

    pub fn target(&self) -> &TargetState {
        &self.target
    }

    pub fn evaluate(&self, obs: Observable, state: &QuantumState) -> Result<f64> {
        match obs {
            Observable::PopPhi1 => population(state, &self.phi1),
            Observable::PopPhiLast => population(state, &self.phi_last),
            Observable::PopBright => population(state, &self.bright),
            Observable::Fidelity => ghz_fidelity(state, &self.target, self.target.method),
            Observable::Leakage => Ok(1.0
                - population(state, &self.phi1)?
                - population(state, &self.bright)?
                - population(state, &self.phi_last)?),
        }
    }
}

#[cfg(test)]
mod tests {
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    use super::*;
    use crate::model::{closed_space, open_space};

    #[test]
    fn basis_and_mixed_populations() {
        let space = closed_space(3).unwrap();
        let phi1 = space.basis_vector(0);
        let rho = &phi1 * phi1.adjoint();
        assert_eq!(population_mixed(&rho, &phi1).unwrap(), 1.0);
        let mixed = DMatrix::<C64>::identity(11, 11) / C64::new(11.0, 0.0);
        for k in 0..11 {
            assert_relative_eq!(population_mixed(&mixed, &space.basis_vector(k)).unwrap(), 1.0 / 11.0, epsilon = 1e-15);
        }
        assert!(matches!(population_pure(&phi1, &DVector::zeros(3)), Err(Error::Dimension { .. })));
    }

    #[test]
    fn targets() {
        let space = closed_space(3).unwrap();
        let a = TargetState::new(&space, ScheduleKind::Adiabatic).unwrap();
        let t = TargetState::new(&space, ScheduleKind::Tqd).unwrap();
        assert_relative_eq!(a.vector.norm(), 1.0, epsilon = 1e-15);
        assert!(a.vector[10].re < 0.0);
        assert!(t.vector[10].im > 0.0);
        let support = t.vector.iter().filter(|z| z.norm() > 0.0).count();
        assert_eq!(support, 2);
        let open = open_space(3).unwrap();
        assert_eq!(TargetState::new(&open, ScheduleKind::Tqd).unwrap().vector.len(), 16);
        let five = closed_space(5).unwrap();
        assert_eq!(TargetState::new(&five, ScheduleKind::Tqd).unwrap().vector[18].im, std::f64::consts::FRAC_1_SQRT_2);
    }

    #[test]
    fn fidelity_of_target_and_mismatch() {
        let space = closed_space(3).unwrap();
        let t = TargetState::new(&space, ScheduleKind::Tqd).unwrap();
        let rho = QuantumState::Mixed(&t.vector * t.vector.adjoint());
        assert_relative_eq!(ghz_fidelity(&rho, &t, ScheduleKind::Tqd).unwrap(), 1.0, epsilon = 1e-15);
        let err = ghz_fidelity(&rho, &t, ScheduleKind::Adiabatic).unwrap_err();
        assert!(matches!(err, Error::TargetMismatch { .. }));
        // the other GHZ phase is only half of the target
        let a = TargetState::new(&space, ScheduleKind::Adiabatic).unwrap();
        let other = QuantumState::Pure(a.vector.clone());
        assert_relative_eq!(ghz_fidelity(&other, &t, ScheduleKind::Tqd).unwrap(), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn observable_names_round_trip() {
        for o in Observable::ALL {
            assert_eq!(o.name().parse::<Observable>().unwrap(), o);
            let json = serde_json::to_string(&o).unwrap();
            assert_eq!(json, format!("\"{}\"", o.name()));
        }
        assert!("pop:phi2".parse::<Observable>().is_err());
    }

    #[test]
    fn leakage_of_zeno_states_vanishes() {
        let space = closed_space(3).unwrap();
        let probes = Probes::new(&space, &SystemParams::default(), ScheduleKind::Tqd).unwrap();
        let t = probes.target().vector.clone();
        assert_relative_eq!(
            probes.evaluate(Observable::Leakage, &QuantumState::Pure(t)).unwrap(),
            0.0,
            epsilon = 1e-15
        );
        let phi3 = QuantumState::Pure(space.basis_vector(2));
        assert_relative_eq!(probes.evaluate(Observable::Leakage, &phi3).unwrap(), 1.0, epsilon = 1e-15);
    }

    fn arb_state() -> impl Strategy<Value = DVector<C64>> {
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 11).prop_filter_map("nonzero", |v| {
            let d = DVector::from_iterator(11, v.into_iter().map(|(a, b)| C64::new(a, b)));
            let n = d.norm();
            (n > 1e-3).then(|| d / C64::new(n, 0.0))
        })
    }

    proptest! {
        #[test]
        fn fidelity_ignores_global_phase(psi in arb_state(), phase in 0.0f64..std::f64::consts::TAU) {
            let space = closed_space(3).unwrap();
            let t = TargetState::new(&space, ScheduleKind::Tqd).unwrap();
            let mut rotated = t.clone();
            rotated.vector *= C64::from_polar(1.0, phase);
            let s = QuantumState::Pure(psi);
            let f1 = ghz_fidelity(&s, &t, ScheduleKind::Tqd).unwrap();
            let f2 = ghz_fidelity(&s, &rotated, ScheduleKind::Tqd).unwrap();
            prop_assert!((f1 - f2).abs() < 1e-14);
        }

        #[test]
        fn pure_and_density_definitions_agree(psi in arb_state()) {
            let space = closed_space(3).unwrap();
            let t = TargetState::new(&space, ScheduleKind::Adiabatic).unwrap();
            let rho = &psi * psi.adjoint();
            let f_pure = ghz_fidelity(&QuantumState::Pure(psi), &t, ScheduleKind::Adiabatic).unwrap();
            let f_mixed = ghz_fidelity(&QuantumState::Mixed(rho), &t, ScheduleKind::Adiabatic).unwrap();
            prop_assert!((f_pure - f_mixed).abs() <= 1e-12);
            prop_assert!((0.0..=1.0 + 1e-12).contains(&f_pure));
        }
    }
}
