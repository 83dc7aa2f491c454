//! Physical parameters, Hamiltonians and jump operators of the cavity chain.
//!
//! All rates are in units of the atom–cavity coupling at its nominal value
//! (so `g = 1` unless a deviation is being studied) and all times in units of
//! `1/g`.

use std::f64::consts::FRAC_PI_4;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dynamics::Hamiltonian;
use crate::error::{Error, Result, Violation};
use crate::hilbert::{
    build_reachable_space, AtomLevel, ChainLayout, Factor, HilbertSpace, ModeId, ModeKind, Operator, Stencil,
};
use crate::linalg::SparseMatrix;
use crate::pulses::{PulseSchedule, ScheduleKind};
use crate::C64;

/// Photon-number cutoff of every mode.
pub const PHOTON_CUTOFF: u8 = 1;

/// Spontaneous-emission branching into the three ground levels.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Branching {
    pub origin: f64,
    pub left: f64,
    pub right: f64,
}

impl Default for Branching {
    fn default() -> Self {
        Self { origin: 1.0 / 3.0, left: 1.0 / 3.0, right: 1.0 / 3.0 }
    }
}

impl Branching {
    pub fn fraction(&self, level: AtomLevel) -> f64 {
        match level {
            AtomLevel::Origin => self.origin,
            AtomLevel::Left => self.left,
            AtomLevel::Right => self.right,
            AtomLevel::Excited => 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemParams {
    /// Atom–cavity coupling.
    pub g: f64,
    /// Cavity–fiber coupling.
    pub v: f64,
    /// STIRAP pulse amplitude.
    pub omega0: f64,
    /// Pulse offset `t_0` as a fraction of `t_f`.
    pub t0_frac: f64,
    /// Pulse width `t_c` as a fraction of `t_f`.
    pub tc_frac: f64,
    /// Operation time.
    pub tf: f64,
    /// Detuning of the transitionless scheme.
    pub delta: f64,
    /// Fractional-STIRAP angle.
    pub alpha: f64,
    /// Total spontaneous-emission rate of each atom.
    pub gamma: f64,
    /// Decay rate of every cavity mode.
    pub kappa_c: f64,
    /// Decay rate of every fiber mode.
    pub kappa_f: f64,
    pub n_atoms: usize,
    pub branching: Branching,
}

impl Default for SystemParams {
    fn default() -> Self {
        Self {
            g: 1.0,
            v: 1.0,
            omega0: 0.2,
            t0_frac: 0.14,
            tc_frac: 0.19,
            tf: 72.0,
            delta: 2.3,
            alpha: FRAC_PI_4,
            gamma: 0.0,
            kappa_c: 0.0,
            kappa_f: 0.0,
            n_atoms: 3,
            branching: Branching::default(),
        }
    }
}

/// Experimental rates: `g = 2π·750 MHz`, `γ = 2π·2.62 MHz`,
/// `κ_c = 2π·3.5 MHz`, `κ_f = 1.52·10⁵ Hz`, in hertz (angular where noted).
pub mod experimental {
    use std::f64::consts::TAU;

    pub const G_HZ: f64 = TAU * 750e6;
    pub const GAMMA_HZ: f64 = TAU * 2.62e6;
    pub const KAPPA_C_HZ: f64 = TAU * 3.5e6;
    pub const KAPPA_F_HZ: f64 = 1.52e5;
}

/// Keys accepted by [`SystemParams::set`].
pub const PARAM_KEYS: &[&str] =
    &["g", "v", "omega0", "t0_frac", "tc_frac", "tf", "delta", "alpha", "gamma", "kappa_c", "kappa_f", "n_atoms"];

impl SystemParams {
    /// Default operating point with the experimental decay rates in units of g.
    pub fn experimental() -> Self {
        Self {
            gamma: experimental::GAMMA_HZ / experimental::G_HZ,
            kappa_c: experimental::KAPPA_C_HZ / experimental::G_HZ,
            kappa_f: experimental::KAPPA_F_HZ / experimental::G_HZ,
            ..Self::default()
        }
    }

    pub fn t0(&self) -> f64 {
        self.t0_frac * self.tf
    }

    pub fn tc(&self) -> f64 {
        self.tc_frac * self.tf
    }

    pub fn is_dissipative(&self) -> bool {
        self.gamma > 0.0 || self.kappa_c > 0.0 || self.kappa_f > 0.0
    }

    /// Every violated invariant, not just the first.
    pub fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut nonneg = |key: &str, x: f64| {
            if !(x >= 0.0 && x.is_finite()) {
                out.push(Violation::new(key, format!("must be a finite value >= 0, got {x}")));
            }
        };
        nonneg("g", self.g);
        nonneg("v", self.v);
        nonneg("omega0", self.omega0);
        nonneg("delta", self.delta);
        nonneg("gamma", self.gamma);
        nonneg("kappa_c", self.kappa_c);
        nonneg("kappa_f", self.kappa_f);
        nonneg("t0_frac", self.t0_frac);
        if !(self.tf > 0.0 && self.tf.is_finite()) {
            out.push(Violation::new("tf", format!("must be > 0, got {}", self.tf)));
        }
        if !(self.tc_frac > 0.0 && self.tc_frac.is_finite()) {
            out.push(Violation::new("tc_frac", format!("must be > 0, got {}", self.tc_frac)));
        }
        if self.g <= 0.0 || self.v <= 0.0 {
            out.push(Violation::new("g/v", "couplings must be strictly positive"));
        }
        if !self.alpha.is_finite() {
            out.push(Violation::new("alpha", "must be finite"));
        }
        if self.n_atoms < 3 || self.n_atoms.is_multiple_of(2) {
            out.push(Violation::new(
                "n_atoms",
                format!("must be odd and >= 3 (the scheme is defined for N = 2l + 1), got {}", self.n_atoms),
            ));
        }
        let b = self.branching;
        for (k, x) in [("branching.origin", b.origin), ("branching.left", b.left), ("branching.right", b.right)] {
            if x.is_nan() || x < 0.0 {
                out.push(Violation::new(k, format!("must be >= 0, got {x}")));
            }
        }
        let total = b.origin + b.left + b.right;
        if (total - 1.0).abs() > 1e-9 {
            out.push(Violation::new("branching", format!("fractions must sum to 1, got {total}")));
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidParams(v))
        }
    }

    /// Sets a scalar field by name.
    pub fn set(&mut self, key: &str, value: f64) -> Result<()> {
        match key {
            "g" => self.g = value,
            "v" => self.v = value,
            "omega0" => self.omega0 = value,
            "t0_frac" => self.t0_frac = value,
            "tc_frac" => self.tc_frac = value,
            "tf" => self.tf = value,
            "delta" => self.delta = value,
            "alpha" => self.alpha = value,
            "gamma" => self.gamma = value,
            "kappa_c" => self.kappa_c = value,
            "kappa_f" => self.kappa_f = value,
            "n_atoms" => {
                if value.fract() != 0.0 || value < 0.0 {
                    return Err(Error::InvalidParams(vec![Violation::new(
                        "n_atoms",
                        format!("must be a non-negative integer, got {value}"),
                    )]));
                }
                self.n_atoms = value as usize;
            }
            other => {
                return Err(Error::Config(format!("unknown parameter '{other}' (known: {})", PARAM_KEYS.join(", "))))
            }
        }
        Ok(())
    }
}

/// Which coupling constant weights a coherent stencil.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CouplingKind {
    AtomCavity,
    CavityFiber,
}

/// Coupling terms of `H_c` without their Hermitian conjugates:
/// `a_m |e⟩⟨g|` for every atom–cavity pair and `b_k† a_m` for every
/// fiber–cavity pair.
pub fn coupling_stencils(layout: &ChainLayout) -> Vec<(CouplingKind, Stencil)> {
    let mut out = Vec::new();
    for (atom, mode, level) in layout.atom_cavity_couplings() {
        let m = layout.mode_index(mode).expect("layout mode");
        out.push((
            CouplingKind::AtomCavity,
            Stencil::new(vec![Factor::Annihilate(m), Factor::Transition { atom, bra: AtomLevel::Excited, ket: level }]),
        ));
    }
    for k in 0..layout.n_atoms() - 1 {
        let f = layout.mode_index(ModeId::fiber(k)).expect("fiber mode");
        for partner in layout.fiber_partners(k) {
            let c = layout.mode_index(partner).expect("partner mode");
            out.push((CouplingKind::CavityFiber, Stencil::new(vec![Factor::Create(f), Factor::Annihilate(c)])));
        }
    }
    out
}

/// `|e⟩⟨g_o|` on `atom`.
pub fn laser_stencil(atom: usize) -> Stencil {
    Stencil::new(vec![Factor::Transition { atom, bra: AtomLevel::Excited, ket: AtomLevel::Origin }])
}

/// Every coherent generator: the coupling terms and the two end-atom lasers.
pub fn hamiltonian_stencils(layout: &ChainLayout) -> Vec<Stencil> {
    let mut out: Vec<Stencil> = coupling_stencils(layout).into_iter().map(|(_, s)| s).collect();
    out.push(laser_stencil(0));
    out.push(laser_stencil(layout.n_atoms() - 1));
    out
}

/// Decay channel of a jump operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum JumpChannel {
    Spontaneous { atom: usize, to: AtomLevel },
    Mode(ModeId),
}

impl JumpChannel {
    pub fn label(&self) -> String {
        match self {
            JumpChannel::Spontaneous { atom, to } => format!("sigma{}:{}", atom + 1, to),
            JumpChannel::Mode(m) => format!("a:{m}"),
        }
    }
}

pub fn jump_stencils(layout: &ChainLayout) -> Vec<(JumpChannel, Stencil)> {
    let mut out = Vec::new();
    for atom in 0..layout.n_atoms() {
        for to in AtomLevel::GROUND {
            out.push((
                JumpChannel::Spontaneous { atom, to },
                Stencil::new(vec![Factor::Transition { atom, bra: to, ket: AtomLevel::Excited }]),
            ));
        }
    }
    for (m, mode) in layout.modes().iter().enumerate() {
        out.push((JumpChannel::Mode(*mode), Stencil::new(vec![Factor::Annihilate(m)])));
    }
    out
}

/// The alternating fiber pattern only closes for an odd number of atoms.
fn chain_layout(n_atoms: usize) -> Result<ChainLayout> {
    if n_atoms < 3 || n_atoms.is_multiple_of(2) {
        return Err(Error::InvalidParams(vec![Violation::new(
            "n_atoms",
            format!("the chain is defined for odd N >= 3, got {n_atoms}"),
        )]));
    }
    ChainLayout::new(n_atoms)
}

/// Hamiltonian-only closure of the initial state (`4N − 1` states).
pub fn closed_space(n_atoms: usize) -> Result<Arc<HilbertSpace>> {
    let layout = chain_layout(n_atoms)?;
    let init = layout.initial_state();
    let stencils = hamiltonian_stencils(&layout);
    Ok(Arc::new(build_reachable_space(layout, init, &stencils, &[], PHOTON_CUTOFF)?))
}

/// Closure including the decay products of every jump operator.
pub fn open_space(n_atoms: usize) -> Result<Arc<HilbertSpace>> {
    let layout = chain_layout(n_atoms)?;
    let init = layout.initial_state();
    let stencils = hamiltonian_stencils(&layout);
    let jumps: Vec<Stencil> = jump_stencils(&layout).into_iter().map(|(_, s)| s).collect();
    Ok(Arc::new(build_reachable_space(layout, init, &stencils, &jumps, PHOTON_CUTOFF)?))
}

fn check_atoms(space: &HilbertSpace, params: &SystemParams) -> Result<()> {
    if space.n_atoms() != params.n_atoms {
        return Err(Error::Config(format!(
            "space built for {} atoms but parameters have n_atoms = {}",
            space.n_atoms(),
            params.n_atoms
        )));
    }
    Ok(())
}

fn coupling_sparse(space: &HilbertSpace, params: &SystemParams) -> Result<SparseMatrix> {
    let mut m = SparseMatrix::zeros(space.dim());
    for (kind, stencil) in coupling_stencils(space.layout()) {
        let w = match kind {
            CouplingKind::AtomCavity => params.g,
            CouplingKind::CavityFiber => params.v,
        };
        let term = space.stencil_matrix(&stencil)?;
        m.add_scaled(&term, C64::new(w, 0.0));
        m.add_scaled(&term.adjoint(), C64::new(w, 0.0));
    }
    m.compress();
    Ok(m)
}

fn detuning_sparse(space: &HilbertSpace, delta: f64) -> SparseMatrix {
    let mut m = SparseMatrix::zeros(space.dim());
    for (i, s) in space.basis().iter().enumerate() {
        if s.excited_atom().is_some() && delta != 0.0 {
            m.push(i, i, C64::new(delta, 0.0));
        }
    }
    m
}

/// `H_c`: atom–cavity couplings (weight g) and cavity–fiber couplings (weight v).
pub fn coupling_hamiltonian(space: &Arc<HilbertSpace>, params: &SystemParams) -> Result<Operator> {
    check_atoms(space, params)?;
    Operator::hermitian(space.clone(), coupling_sparse(space, params)?.to_dense())
}

/// `H_l`: `Ω₁|e⟩₁⟨g_o| + Ω_N|e⟩_N⟨g_o| + H.c.`; with `phase_fix` the last
/// atom's coefficient becomes `−iΩ_N`.
pub fn laser_hamiltonian(space: &Arc<HilbertSpace>, omega1: f64, omega_n: f64, phase_fix: bool) -> Result<Operator> {
    let laser = LaserTerms::new(space)?;
    let m = laser.matrix(omega1, omega_n, phase_fix);
    Operator::hermitian(space.clone(), m.to_dense())
}

/// `H_d = Δ Σ_k |e⟩_k⟨e|`.
pub fn detuning_hamiltonian(space: &Arc<HilbertSpace>, params: &SystemParams) -> Result<Operator> {
    check_atoms(space, params)?;
    Operator::hermitian(space.clone(), detuning_sparse(space, params.delta).to_dense())
}

#[derive(Clone, Debug)]
pub struct JumpOperator {
    pub channel: JumpChannel,
    pub operator: Operator,
    pub rate: f64,
}

impl JumpOperator {
    pub fn label(&self) -> String {
        self.channel.label()
    }
}

/// Lindblad operators: three branching channels per atom (rate
/// `γ·fraction`), one per cavity mode (`κ_c`) and one per fiber mode (`κ_f`).
pub fn jump_operators(space: &Arc<HilbertSpace>, params: &SystemParams) -> Result<Vec<JumpOperator>> {
    check_atoms(space, params)?;
    if !space.is_open() {
        return Err(Error::OpenSystemRequired(format!(
            "jump operators need the open-system basis (closed basis has {} states); \
             build it with model::open_space({})",
            space.dim(),
            space.n_atoms()
        )));
    }
    jump_stencils(space.layout())
        .into_iter()
        .map(|(channel, stencil)| {
            let rate = match channel {
                JumpChannel::Spontaneous { to, .. } => params.gamma * params.branching.fraction(to),
                JumpChannel::Mode(m) if m.kind == ModeKind::Fiber => params.kappa_f,
                JumpChannel::Mode(_) => params.kappa_c,
            };
            let operator = Operator::from_sparse(space.clone(), &space.stencil_matrix(&stencil)?)?;
            Ok(JumpOperator { channel, operator, rate })
        })
        .collect()
}

/// Unit-amplitude `|e⟩⟨g_o|` matrices of the two end atoms.
#[derive(Clone, Debug)]
struct LaserTerms {
    first: SparseMatrix,
    last: SparseMatrix,
}

impl LaserTerms {
    fn new(space: &HilbertSpace) -> Result<Self> {
        Ok(Self {
            first: space.stencil_matrix(&laser_stencil(0))?,
            last: space.stencil_matrix(&laser_stencil(space.n_atoms() - 1))?,
        })
    }

    fn push_into(&self, out: &mut SparseMatrix, omega1: f64, omega_n: f64, phase_fix: bool) {
        let c1 = C64::new(omega1, 0.0);
        let cn = if phase_fix { C64::new(0.0, -omega_n) } else { C64::new(omega_n, 0.0) };
        for (term, c) in [(&self.first, c1), (&self.last, cn)] {
            for &(i, j, z) in term.entries() {
                out.push(i, j, z * c);
                out.push(j, i, (z * c).conj());
            }
        }
    }

    fn matrix(&self, omega1: f64, omega_n: f64, phase_fix: bool) -> SparseMatrix {
        let mut m = SparseMatrix::zeros(self.first.dim());
        self.push_into(&mut m, omega1, omega_n, phase_fix);
        m
    }
}

/// `H(t) = H_c + H_d + H_l(t)` for a pulse schedule. The detuning is only
/// present for the transitionless schedule; the adiabatic scheme runs
/// resonantly.
#[derive(Clone, Debug)]
pub struct DrivenHamiltonian {
    static_part: SparseMatrix,
    laser: LaserTerms,
    schedule: PulseSchedule,
    phase_fix: bool,
}

impl DrivenHamiltonian {
    pub fn new(space: &Arc<HilbertSpace>, schedule: PulseSchedule) -> Result<Self> {
        let params = schedule.params();
        check_atoms(space, params)?;
        let mut static_part = coupling_sparse(space, params)?;
        if schedule.kind() == ScheduleKind::Tqd {
            static_part.add_scaled(&detuning_sparse(space, params.delta), C64::new(1.0, 0.0));
        }
        Ok(Self { static_part, laser: LaserTerms::new(space)?, schedule, phase_fix: false })
    }

    /// Applies `Ω_N → −iΩ_N` to the last atom's drive.
    pub fn with_phase_fix(mut self, on: bool) -> Self {
        self.phase_fix = on;
        self
    }

    pub fn schedule(&self) -> &PulseSchedule {
        &self.schedule
    }

    pub fn static_part(&self) -> &SparseMatrix {
        &self.static_part
    }
}

impl Hamiltonian for DrivenHamiltonian {
    fn dim(&self) -> usize {
        self.static_part.dim()
    }

    fn at(&self, t: f64) -> SparseMatrix {
        let mut m = SparseMatrix::zeros(self.dim());
        self.write_at(t, &mut m);
        m
    }

    fn write_at(&self, t: f64, out: &mut SparseMatrix) {
        let (o1, on) = self.schedule.drive(t);
        out.assign(&self.static_part);
        self.laser.push_into(out, o1, on, self.phase_fix);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{annihilation, excitation_operator};

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn coupling_pattern_on_canonical_basis() {
        let space = closed_space(3).unwrap();
        let p = SystemParams { g: 0.7, v: 1.3, ..SystemParams::default() };
        let h = coupling_hamiltonian(&space, &p).unwrap();
        let weights = [p.g, p.v, p.v, p.g, p.g, p.v, p.v, p.g];
        for (k, w) in weights.iter().enumerate() {
            // |phi_{k+2}> <-> |phi_{k+3}> in one-based labels
            assert_eq!(h.get(k + 2, k + 1), c(*w), "pair {}", k + 2);
            assert_eq!(h.get(k + 1, k + 2), c(*w));
        }
        let nnz = h.matrix().iter().filter(|z| z.norm() > 0.0).count();
        assert_eq!(nnz, 16);
        for k in 0..11 {
            assert_eq!(h.get(0, k), c(0.0));
        }
    }

    #[test]
    fn laser_elements() {
        let space = closed_space(3).unwrap();
        let h = laser_hamiltonian(&space, 0.3, 0.5, false).unwrap();
        assert_eq!(h.get(1, 0), c(0.3));
        assert_eq!(h.get(9, 10), c(0.5));
        let hf = laser_hamiltonian(&space, 0.3, 0.5, true).unwrap();
        assert_eq!(hf.get(9, 10), C64::new(0.0, -0.5));
        assert_eq!(hf.get(10, 9), C64::new(0.0, 0.5));
        let zero = laser_hamiltonian(&space, 0.0, 0.0, true).unwrap();
        assert!(zero.matrix().iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn detuning_diagonal() {
        let space = closed_space(3).unwrap();
        let p = SystemParams { delta: 1.7, ..SystemParams::default() };
        let h = detuning_hamiltonian(&space, &p).unwrap();
        assert_eq!(h.get(1, 1), c(1.7));
        assert_eq!(h.get(2, 2), c(0.0));
        assert!((h.matrix().trace() - c(3.0 * 1.7)).norm() < 1e-15);
    }

    #[test]
    fn jump_inventory() {
        let space = open_space(3).unwrap();
        let p = SystemParams { gamma: 0.3, kappa_c: 0.2, kappa_f: 0.1, ..SystemParams::default() };
        let jumps = jump_operators(&space, &p).unwrap();
        assert_eq!(jumps.len(), 15);
        let count = |pred: &dyn Fn(&JumpOperator) -> bool| jumps.iter().filter(|j| pred(j)).count();
        assert_eq!(count(&|j| matches!(j.channel, JumpChannel::Spontaneous { .. }) && (j.rate - 0.1).abs() < 1e-15), 9);
        assert_eq!(count(&|j| matches!(j.channel, JumpChannel::Mode(m) if m.is_cavity()) && j.rate == 0.2), 4);
        assert_eq!(count(&|j| matches!(j.channel, JumpChannel::Mode(m) if !m.is_cavity()) && j.rate == 0.1), 2);
    }

    #[test]
    fn fiber_jump_on_phi4() {
        let space = open_space(3).unwrap();
        let p = SystemParams { kappa_f: 0.05, ..SystemParams::default() };
        let jumps = jump_operators(&space, &p).unwrap();
        let b1 = jumps.iter().find(|j| j.channel == JumpChannel::Mode(ModeId::fiber(0))).unwrap();
        assert_eq!(b1.rate, 0.05);
        let out = b1.operator.apply(&space.basis_vector(3));
        let target = space.index_of(&crate::hilbert::BasisState {
            atoms: vec![AtomLevel::Left, AtomLevel::Left, AtomLevel::Right],
            photons: vec![0; 6],
        });
        let target = target.expect("decay product in open basis");
        assert!(target >= 11);
        assert_eq!(out[target], c(1.0));
        assert!((out.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn closed_space_rejected_for_jumps() {
        let space = closed_space(3).unwrap();
        let err = jump_operators(&space, &SystemParams::default()).unwrap_err();
        assert!(matches!(err, Error::OpenSystemRequired(_)));
        assert!(err.to_string().contains("open_space"));
    }

    #[test]
    fn jumps_lower_excitation_by_one() {
        let space = open_space(3).unwrap();
        let p = SystemParams { gamma: 1.0, kappa_c: 1.0, kappa_f: 1.0, ..SystemParams::default() };
        for j in jump_operators(&space, &p).unwrap() {
            for &(i, k, _) in j.operator.to_sparse().entries() {
                assert_eq!(space.state(i).excitations() + 1, space.state(k).excitations(), "{}", j.label());
            }
        }
    }

    #[test]
    fn excitation_number_commutes_with_hamiltonian() {
        for n in [3, 5, 7] {
            for space in [closed_space(n).unwrap(), open_space(n).unwrap()] {
                let p = SystemParams { n_atoms: n, g: 0.9, v: 1.4, ..SystemParams::default() };
                let h = coupling_hamiltonian(&space, &p).unwrap().plus(&detuning_hamiltonian(&space, &p).unwrap());
                let comm = h.commutator(&excitation_operator(&space));
                assert!(comm.matrix().iter().all(|z| z.norm() <= 1e-12));
                // lasers move population within the same excitation sector too
                let l = laser_hamiltonian(&space, 0.2, 0.3, true).unwrap();
                let n_op = excitation_operator(&space);
                let lc = l.commutator(&n_op);
                // the laser exchanges |g_o> <-> |e>, changing the count by one
                assert!(lc.matrix().iter().any(|z| z.norm() > 0.0));
            }
        }
    }

    #[test]
    fn real_symmetric_without_phase_fix() {
        let space = closed_space(3).unwrap();
        let sched = PulseSchedule::new(ScheduleKind::Tqd, &SystemParams::default()).unwrap();
        let h = DrivenHamiltonian::new(&space, sched).unwrap();
        for t in [0.0, 20.0, 36.0, 50.0, 72.0] {
            let m = h.at(t).to_dense();
            assert!(m.iter().all(|z| z.im == 0.0));
            assert!((&m - m.transpose()).iter().all(|z| z.norm() == 0.0));
        }
    }

    #[test]
    fn validation_lists_every_violation() {
        let p = SystemParams { n_atoms: 4, gamma: -1.0, tf: 0.0, ..SystemParams::default() };
        let v = p.violations();
        let keys: Vec<_> = v.iter().map(|v| v.key.as_str()).collect();
        assert!(keys.contains(&"n_atoms"));
        assert!(keys.contains(&"gamma"));
        assert!(keys.contains(&"tf"));
        assert!(v.iter().any(|v| v.message.contains("odd")));
    }

    #[test]
    fn experimental_rates_in_units_of_g() {
        let p = SystemParams::experimental();
        assert!((p.gamma - 2.62 / 750.0).abs() < 1e-15);
        assert!((p.kappa_c - 3.5 / 750.0).abs() < 1e-15);
        assert!((p.kappa_f - 1.52e5 / (std::f64::consts::TAU * 7.5e8)).abs() < 1e-18);
    }

    #[test]
    fn cavity_annihilation_on_open_basis() {
        let space = open_space(3).unwrap();
        let a = annihilation(&space, ModeId::cavity_left(0)).unwrap();
        let out = a.apply(&space.basis_vector(2));
        assert!((out.norm() - 1.0).abs() < 1e-15);
        assert!(out.iter().position(|z| z.norm() > 0.0).unwrap() >= 11);
    }
}
