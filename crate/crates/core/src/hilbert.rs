//! Atoms ⊗ cavity modes ⊗ fiber modes.
//!
//! The full tensor product is never enumerated. A [`HilbertSpace`] is the
//! breadth-first closure of an initial product state under a set of operator
//! [`Stencil`]s, which for the chain Hamiltonian is exactly the
//! single-excitation manifold listed state by state from the initial state to
//! the final GHZ component.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{max_abs_diff, SparseMatrix};
use crate::C64;

/// Internal state of a single four-level atom.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AtomLevel {
    /// `|e⟩`
    Excited,
    /// `|g_l⟩`, coupled to the left-circular cavity mode.
    Left,
    /// `|g_o⟩`, coupled to the classical laser on the end atoms.
    Origin,
    /// `|g_r⟩`, coupled to the right-circular cavity mode.
    Right,
}

impl AtomLevel {
    pub const ALL: [AtomLevel; 4] = [AtomLevel::Excited, AtomLevel::Left, AtomLevel::Origin, AtomLevel::Right];
    pub const GROUND: [AtomLevel; 3] = [AtomLevel::Origin, AtomLevel::Left, AtomLevel::Right];

    pub fn label(self) -> &'static str {
        match self {
            AtomLevel::Excited => "e",
            AtomLevel::Left => "gl",
            AtomLevel::Origin => "go",
            AtomLevel::Right => "gr",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        AtomLevel::ALL.into_iter().find(|l| l.label() == s)
    }
}

impl fmt::Display for AtomLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ModeKind {
    CavityLeft,
    CavityRight,
    Fiber,
}

/// A bosonic mode. `index` is the zero-based cavity position for cavity modes
/// and the zero-based fiber position for fiber modes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ModeId {
    pub kind: ModeKind,
    pub index: usize,
}

impl ModeId {
    pub fn cavity_left(index: usize) -> Self {
        Self { kind: ModeKind::CavityLeft, index }
    }

    pub fn cavity_right(index: usize) -> Self {
        Self { kind: ModeKind::CavityRight, index }
    }

    pub fn fiber(index: usize) -> Self {
        Self { kind: ModeKind::Fiber, index }
    }

    pub fn is_cavity(&self) -> bool {
        self.kind != ModeKind::Fiber
    }

    /// One-based label, e.g. `C2L`, `C3R`, `f1`.
    pub fn label(&self) -> String {
        match self.kind {
            ModeKind::CavityLeft => format!("C{}L", self.index + 1),
            ModeKind::CavityRight => format!("C{}R", self.index + 1),
            ModeKind::Fiber => format!("f{}", self.index + 1),
        }
    }
}

impl fmt::Display for ModeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Mode inventory of a chain of `n_atoms` cavities joined by `n_atoms - 1`
/// fibers. Cavity 1 has only a left mode, cavity N only a right mode and every
/// interior cavity both. Fibers alternate between joining left modes
/// (fiber 1, 3, ...) and right modes (fiber 2, 4, ...) of adjacent cavities.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainLayout {
    n_atoms: usize,
    modes: Vec<ModeId>,
}

impl ChainLayout {
    pub fn new(n_atoms: usize) -> Result<Self> {
        if n_atoms < 2 {
            return Err(Error::Config(format!("a chain needs at least 2 atoms, got {n_atoms}")));
        }
        let mut modes = Vec::new();
        for i in 0..n_atoms {
            if i + 1 < n_atoms {
                modes.push(ModeId::cavity_left(i));
            }
            if i > 0 {
                modes.push(ModeId::cavity_right(i));
            }
        }
        modes.extend((0..n_atoms - 1).map(ModeId::fiber));
        Ok(Self { n_atoms, modes })
    }

    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    pub fn modes(&self) -> &[ModeId] {
        &self.modes
    }

    pub fn mode_index(&self, mode: ModeId) -> Option<usize> {
        self.modes.iter().position(|m| *m == mode)
    }

    /// Cavity modes joined by fiber `k` (zero-based).
    pub fn fiber_partners(&self, k: usize) -> [ModeId; 2] {
        if k.is_multiple_of(2) {
            [ModeId::cavity_left(k), ModeId::cavity_left(k + 1)]
        } else {
            [ModeId::cavity_right(k), ModeId::cavity_right(k + 1)]
        }
    }

    /// `(atom, mode, ground level)` triples for every atom–cavity coupling.
    pub fn atom_cavity_couplings(&self) -> Vec<(usize, ModeId, AtomLevel)> {
        let mut out = Vec::new();
        for i in 0..self.n_atoms {
            if i + 1 < self.n_atoms {
                out.push((i, ModeId::cavity_left(i), AtomLevel::Left));
            }
            if i > 0 {
                out.push((i, ModeId::cavity_right(i), AtomLevel::Right));
            }
        }
        out
    }

    /// `|g_o g_l g_r g_l g_r … g_r⟩ ⊗ vacuum`.
    pub fn initial_state(&self) -> BasisState {
        let atoms = (0..self.n_atoms)
            .map(|i| match i {
                0 => AtomLevel::Origin,
                i if i % 2 == 1 => AtomLevel::Left,
                _ => AtomLevel::Right,
            })
            .collect();
        BasisState { atoms, photons: vec![0; self.modes.len()] }
    }

    /// `|g_l g_r g_l … g_o⟩ ⊗ vacuum`, the second GHZ component.
    pub fn final_state(&self) -> BasisState {
        let n = self.n_atoms;
        let atoms = (0..n)
            .map(|i| match i {
                i if i + 1 == n => AtomLevel::Origin,
                0 => AtomLevel::Left,
                i if i % 2 == 1 => AtomLevel::Right,
                _ => AtomLevel::Left,
            })
            .collect();
        BasisState { atoms, photons: vec![0; self.modes.len()] }
    }
}

/// Product state: one level per atom and one photon number per mode of the
/// owning [`ChainLayout`] (same order as [`ChainLayout::modes`]).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BasisState {
    pub atoms: Vec<AtomLevel>,
    pub photons: Vec<u8>,
}

impl BasisState {
    pub fn excitations(&self) -> usize {
        self.atoms.iter().filter(|l| **l == AtomLevel::Excited).count()
            + self.photons.iter().map(|&n| n as usize).sum::<usize>()
    }

    pub fn excited_atom(&self) -> Option<usize> {
        self.atoms.iter().position(|l| *l == AtomLevel::Excited)
    }

    pub fn is_vacuum(&self) -> bool {
        self.photons.iter().all(|&n| n == 0)
    }

    /// `|go gl gr⟩|C1L:0 …⟩`-style label.
    pub fn label(&self, layout: &ChainLayout) -> String {
        let atoms: Vec<_> = self.atoms.iter().map(|l| l.label()).collect();
        let photons: Vec<_> =
            layout.modes().iter().zip(&self.photons).filter(|(_, &n)| n > 0).map(|(m, n)| format!("{m}:{n}")).collect();
        if photons.is_empty() {
            format!("|{}>|vac>", atoms.join(" "))
        } else {
            format!("|{}>|{}>", atoms.join(" "), photons.join(","))
        }
    }

    pub fn photon_map(&self, layout: &ChainLayout) -> BTreeMap<String, u8> {
        layout.modes().iter().zip(&self.photons).map(|(m, &n)| (m.label(), n)).collect()
    }
}

/// One factor of an operator product acting on a single subsystem.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Factor {
    /// `|bra⟩⟨ket|` on one atom.
    Transition { atom: usize, bra: AtomLevel, ket: AtomLevel },
    /// Creation operator on the mode with the given layout index.
    Create(usize),
    /// Annihilation operator on the mode with the given layout index.
    Annihilate(usize),
}

impl Factor {
    fn adjoint(self) -> Self {
        match self {
            Factor::Transition { atom, bra, ket } => Factor::Transition { atom, bra: ket, ket: bra },
            Factor::Create(m) => Factor::Annihilate(m),
            Factor::Annihilate(m) => Factor::Create(m),
        }
    }
}

/// Product of single-subsystem factors that maps a basis state to at most one
/// other basis state. Factors are applied right to left.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stencil {
    factors: Vec<Factor>,
}

impl Stencil {
    pub fn new(factors: Vec<Factor>) -> Self {
        Self { factors }
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn adjoint(&self) -> Self {
        Self { factors: self.factors.iter().rev().map(|f| f.adjoint()).collect() }
    }

    /// Applies the product to `state`. `Ok(None)` means the result vanishes;
    /// a nonvanishing image with more than `cutoff` photons in a mode is an
    /// error.
    pub fn apply(&self, state: &BasisState, layout: &ChainLayout, cutoff: u8) -> Result<Option<(f64, BasisState)>> {
        let mut out = state.clone();
        let mut amp = 1.0;
        for f in self.factors.iter().rev() {
            match *f {
                Factor::Transition { atom, bra, ket } => {
                    if out.atoms[atom] != ket {
                        return Ok(None);
                    }
                    out.atoms[atom] = bra;
                }
                Factor::Annihilate(m) => {
                    let n = out.photons[m];
                    if n == 0 {
                        return Ok(None);
                    }
                    amp *= f64::from(n).sqrt();
                    out.photons[m] = n - 1;
                }
                Factor::Create(m) => {
                    let n = out.photons[m];
                    amp *= f64::from(n + 1).sqrt();
                    out.photons[m] = n.saturating_add(1);
                }
            }
        }
        if let Some(m) = out.photons.iter().position(|&n| n > cutoff) {
            return Err(Error::Truncation { mode: layout.modes()[m].label(), cutoff });
        }
        Ok(Some((amp, out)))
    }
}

/// Ordered basis with its inverse index. Immutable once built; share through
/// `Arc`.
#[derive(Clone, Debug)]
pub struct HilbertSpace {
    layout: ChainLayout,
    basis: Vec<BasisState>,
    index: HashMap<BasisState, usize>,
    cutoff: u8,
    /// Number of leading states produced by the Hamiltonian-only closure.
    coherent_dim: usize,
}

/// Breadth-first closure of `initial`.
///
/// The Hamiltonian stencils (each applied together with its adjoint) are
/// closed over first, which reproduces the canonical ordering of the
/// coherent manifold. If `jumps` is non-empty the decay products (and
/// anything the Hamiltonian reaches from them) are then appended in
/// first-reached order.
pub fn build_reachable_space(
    layout: ChainLayout,
    initial: BasisState,
    hamiltonian: &[Stencil],
    jumps: &[Stencil],
    cutoff: u8,
) -> Result<HilbertSpace> {
    build_closure(layout, initial, hamiltonian, jumps, cutoff, None)
}

fn build_closure(
    layout: ChainLayout,
    initial: BasisState,
    hamiltonian: &[Stencil],
    jumps: &[Stencil],
    cutoff: u8,
    blocked: Option<&BasisState>,
) -> Result<HilbertSpace> {
    if initial.atoms.len() != layout.n_atoms() || initial.photons.len() != layout.modes().len() {
        return Err(Error::Config("initial state does not match the chain layout".into()));
    }
    if initial.photons.iter().any(|&n| n > cutoff) {
        return Err(Error::Truncation { mode: "initial".into(), cutoff });
    }
    let coherent: Vec<Stencil> = hamiltonian.iter().flat_map(|s| [s.clone(), s.adjoint()]).collect();

    let mut basis = vec![initial.clone()];
    let mut index = HashMap::from([(initial, 0usize)]);

    let mut expand = |gens: &[&Stencil], basis: &mut Vec<BasisState>, start: usize| -> Result<()> {
        let mut cursor = start;
        while cursor < basis.len() {
            let state = basis[cursor].clone();
            for s in gens {
                if let Some((_, next)) = s.apply(&state, &layout, cutoff)? {
                    if Some(&next) == blocked || index.contains_key(&next) {
                        continue;
                    }
                    index.insert(next.clone(), basis.len());
                    basis.push(next);
                }
            }
            cursor += 1;
        }
        Ok(())
    };

    let coherent_refs: Vec<&Stencil> = coherent.iter().collect();
    expand(&coherent_refs, &mut basis, 0)?;
    let coherent_dim = basis.len();
    if !jumps.is_empty() {
        let all: Vec<&Stencil> = jumps.iter().chain(coherent.iter()).collect();
        expand(&all, &mut basis, 0)?;
    }

    Ok(HilbertSpace { layout, basis, index, cutoff, coherent_dim })
}

impl HilbertSpace {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn layout(&self) -> &ChainLayout {
        &self.layout
    }

    pub fn n_atoms(&self) -> usize {
        self.layout.n_atoms()
    }

    pub fn cutoff(&self) -> u8 {
        self.cutoff
    }

    pub fn basis(&self) -> &[BasisState] {
        &self.basis
    }

    pub fn state(&self, i: usize) -> &BasisState {
        &self.basis[i]
    }

    pub fn index_of(&self, state: &BasisState) -> Option<usize> {
        self.index.get(state).copied()
    }

    /// Dimension of the Hamiltonian-only part (a prefix of the basis).
    pub fn coherent_dim(&self) -> usize {
        self.coherent_dim
    }

    /// True when decay products were added by the closure.
    pub fn is_open(&self) -> bool {
        self.dim() > self.coherent_dim
    }

    pub fn initial_index(&self) -> usize {
        0
    }

    /// Index of the final GHZ component `|g_l g_r … g_o⟩|vac⟩`.
    pub fn final_index(&self) -> Option<usize> {
        self.index_of(&self.layout.final_state())
    }

    pub fn basis_vector(&self, i: usize) -> DVector<C64> {
        let mut v = DVector::zeros(self.dim());
        v[i] = C64::new(1.0, 0.0);
        v
    }

    /// Closure with `blocked` forbidden; used to check that every state of
    /// the coherent manifold is required.
    pub fn closure_without(&self, blocked: &BasisState, hamiltonian: &[Stencil]) -> Result<HilbertSpace> {
        build_closure(self.layout.clone(), self.basis[0].clone(), hamiltonian, &[], self.cutoff, Some(blocked))
    }

    /// Matrix of `stencil` restricted to this basis; images outside the basis
    /// are dropped.
    pub fn stencil_matrix(&self, stencil: &Stencil) -> Result<SparseMatrix> {
        let mut m = SparseMatrix::zeros(self.dim());
        for (j, state) in self.basis.iter().enumerate() {
            // Saturating the cutoff here only means the image lies outside the basis.
            let image = match stencil.apply(state, &self.layout, self.cutoff) {
                Ok(img) => img,
                Err(Error::Truncation { .. }) => None,
                Err(e) => return Err(e),
            };
            if let Some((amp, next)) = image {
                if let Some(i) = self.index_of(&next) {
                    m.push(i, j, C64::new(amp, 0.0));
                }
            }
        }
        Ok(m)
    }

    fn mode_position(&self, mode: ModeId) -> Result<usize> {
        self.layout.mode_index(mode).ok_or_else(|| Error::Config(format!("mode {mode} does not exist in this chain")))
    }
}

/// Dense operator tied to the basis of a [`HilbertSpace`].
#[derive(Clone, Debug)]
pub struct Operator {
    space: Arc<HilbertSpace>,
    matrix: DMatrix<C64>,
}

/// Tolerance for the Hermitian check in [`Operator::hermitian`].
pub const HERMITIAN_TOL: f64 = 1e-12;

impl Operator {
    pub fn new(space: Arc<HilbertSpace>, matrix: DMatrix<C64>) -> Result<Self> {
        let d = space.dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::Dimension { expected: d, found: matrix.nrows().max(matrix.ncols()) });
        }
        Ok(Self { space, matrix })
    }

    /// Like [`Operator::new`] but also verifies Hermiticity to [`HERMITIAN_TOL`].
    pub fn hermitian(space: Arc<HilbertSpace>, matrix: DMatrix<C64>) -> Result<Self> {
        let op = Self::new(space, matrix)?;
        let err = op.hermiticity_error();
        if err > HERMITIAN_TOL {
            return Err(Error::NotHermitian(err));
        }
        Ok(op)
    }

    pub fn zeros(space: Arc<HilbertSpace>) -> Self {
        let d = space.dim();
        Self { space, matrix: DMatrix::zeros(d, d) }
    }

    pub fn from_sparse(space: Arc<HilbertSpace>, m: &SparseMatrix) -> Result<Self> {
        Self::new(space, m.to_dense())
    }

    pub fn space(&self) -> &Arc<HilbertSpace> {
        &self.space
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.matrix[(row, col)]
    }

    pub fn adjoint(&self) -> Self {
        Self { space: self.space.clone(), matrix: self.matrix.adjoint() }
    }

    pub fn hermiticity_error(&self) -> f64 {
        max_abs_diff(&self.matrix, &self.matrix.adjoint())
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_error() <= tol
    }

    pub fn apply(&self, v: &DVector<C64>) -> DVector<C64> {
        &self.matrix * v
    }

    pub fn scale(&self, z: C64) -> Self {
        Self { space: self.space.clone(), matrix: &self.matrix * z }
    }

    pub fn plus(&self, other: &Operator) -> Self {
        Self { space: self.space.clone(), matrix: &self.matrix + &other.matrix }
    }

    pub fn compose(&self, other: &Operator) -> Self {
        Self { space: self.space.clone(), matrix: &self.matrix * &other.matrix }
    }

    pub fn commutator(&self, other: &Operator) -> Self {
        Self { space: self.space.clone(), matrix: &self.matrix * &other.matrix - &other.matrix * &self.matrix }
    }

    pub fn to_sparse(&self) -> SparseMatrix {
        SparseMatrix::from_dense(&self.matrix, 0.0)
    }
}

/// Annihilation operator of `mode`, restricted to the basis of `space`.
pub fn annihilation(space: &Arc<HilbertSpace>, mode: ModeId) -> Result<Operator> {
    let m = space.mode_position(mode)?;
    let sparse = space.stencil_matrix(&Stencil::new(vec![Factor::Annihilate(m)]))?;
    Operator::from_sparse(space.clone(), &sparse)
}

pub fn creation(space: &Arc<HilbertSpace>, mode: ModeId) -> Result<Operator> {
    Ok(annihilation(space, mode)?.adjoint())
}

pub fn number_operator(space: &Arc<HilbertSpace>, mode: ModeId) -> Result<Operator> {
    let a = annihilation(space, mode)?;
    Ok(a.adjoint().compose(&a))
}

/// `|bra⟩⟨ket|` on `atom`, identity on everything else.
pub fn atomic_op(space: &Arc<HilbertSpace>, atom: usize, bra: AtomLevel, ket: AtomLevel) -> Result<Operator> {
    if atom >= space.n_atoms() {
        return Err(Error::OutOfRange { index: atom, len: space.n_atoms() });
    }
    let sparse = space.stencil_matrix(&Stencil::new(vec![Factor::Transition { atom, bra, ket }]))?;
    Operator::from_sparse(space.clone(), &sparse)
}

/// `Σ_k |e⟩_k⟨e| + Σ_m a_m† a_m`.
pub fn excitation_operator(space: &Arc<HilbertSpace>) -> Operator {
    let d = space.dim();
    let diag = DVector::from_iterator(d, space.basis().iter().map(|s| C64::new(s.excitations() as f64, 0.0)));
    Operator { space: space.clone(), matrix: DMatrix::from_diagonal(&diag) }
}
