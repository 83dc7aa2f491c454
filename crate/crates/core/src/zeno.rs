//! Eigen-analysis of the coupling Hamiltonian and the effective models that
//! live in its zero-energy subspace.
//!
//! For three atoms the spectrum of `H_c` has nine distinct levels. The zero
//! level is threefold degenerate and spanned by the two ground states and the
//! bright state `|ψ₁⟩`; every other level is simple. Eigenvectors are
//! stored as columns in the order `φ₁, ψ₁, φ₁₁, ψ₂, …, ψ₉`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::dynamics::Hamiltonian;
use crate::error::{Error, Result};
use crate::hilbert::{HilbertSpace, ModeKind, Operator};
use crate::linalg::SparseMatrix;
use crate::model::{self, SystemParams};
use crate::pulses::PulseSchedule;
use crate::C64;

/// Relative tolerance used to group numerically degenerate eigenvalues.
pub const DEGENERACY_TOL: f64 = 1e-7;

/// `N₁ = 1/√(N + (N−1)(g/v)²)`, the bright-state normalizer.
pub fn bright_normalizer(g: f64, v: f64, n_atoms: usize) -> f64 {
    let r = g / v;
    let n = n_atoms as f64;
    1.0 / (n + (n - 1.0) * r * r).sqrt()
}

/// Closed-form constants of the three-atom eigensystem.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnalyticParameters {
    pub a: f64,
    pub epsilon1: f64,
    pub eta1: f64,
    pub chi1: f64,
    pub mu1: f64,
    pub zeta1: f64,
    pub delta1: f64,
    pub theta1: f64,
    pub epsilon2: f64,
    pub eta2: f64,
    pub chi2: f64,
    pub mu2: f64,
    pub zeta2: f64,
    pub delta2: f64,
    pub theta2: f64,
    /// `N₁ … N₉`.
    pub normalizers: [f64; 9],
}

impl AnalyticParameters {
    pub fn new(g: f64, v: f64) -> Self {
        let (g2, v2) = (g * g, v * v);
        let a = (g2 * g2 + 4.0 * v2 * v2).sqrt();
        let s2 = std::f64::consts::SQRT_2;
        let r1 = (g2 + 2.0 * v2 - a).sqrt();
        let q1 = (3.0 * g2 + 2.0 * v2 - a).sqrt();
        let r2 = (g2 + 2.0 * v2 + a).sqrt();
        let q2 = (3.0 * g2 + 2.0 * v2 + a).sqrt();
        Self {
            a,
            epsilon1: r1 / (s2 * g),
            eta1: (-g2 + 2.0 * v2 - a) / (2.0 * g * v),
            chi1: r1 * (g2 + a) / (2.0 * s2 * g * v2),
            mu1: q1 / (s2 * g),
            zeta1: (-g2 - 2.0 * v2 + a) / (2.0 * g * v),
            delta1: q1 * (-g2 + a) / (2.0 * s2 * g * v2),
            theta1: (-g2 + a) / v2,
            epsilon2: r2 / (s2 * g),
            eta2: (-g2 + 2.0 * v2 + a) / (2.0 * g * v),
            chi2: r2 * (-g2 + a) / (2.0 * s2 * g * v2),
            mu2: q2 / (s2 * g),
            zeta2: (g2 + 2.0 * v2 + a) / (2.0 * g * v),
            delta2: q2 * (g2 + a) / (2.0 * s2 * g * v2),
            theta2: (g2 + a) / v2,
            normalizers: [0.0; 9],
        }
    }

    /// Unnormalized coefficients of `ψ₁ … ψ₉` on `φ₂ … φ₁₀`.
    fn raw_vectors(&self, g: f64, v: f64) -> [[f64; 9]; 9] {
        let r = g / v;
        let (e1, h1, c1) = (self.epsilon1, self.eta1, self.chi1);
        let (m1, z1, d1, t1) = (self.mu1, self.zeta1, self.delta1, self.theta1);
        let (e2, h2, c2) = (self.epsilon2, self.eta2, self.chi2);
        let (m2, z2, d2, t2) = (self.mu2, self.zeta2, self.delta2, self.theta2);
        [
            [1.0, 0.0, -r, 0.0, 1.0, 0.0, -r, 0.0, 1.0],
            [-1.0, e1, -h1, -c1, 0.0, c1, h1, -e1, 1.0],
            [-1.0, -e1, -h1, c1, 0.0, -c1, h1, e1, 1.0],
            [1.0, -m1, -z1, d1, -t1, d1, -z1, -m1, 1.0],
            [1.0, m1, -z1, -d1, -t1, -d1, -z1, m1, 1.0],
            [-1.0, e2, -h2, c2, 0.0, -c2, h2, -e2, 1.0],
            [-1.0, -e2, -h2, -c2, 0.0, c2, h2, e2, 1.0],
            [1.0, -m2, z2, -d2, t2, -d2, z2, -m2, 1.0],
            [1.0, m2, z2, d2, t2, d2, z2, m2, 1.0],
        ]
    }
}

/// Spectral decomposition grouped into degenerate levels.
#[derive(Clone, Debug)]
pub struct ZenoEigensystem {
    /// Distinct eigenvalues, one per Zeno subspace.
    pub levels: Vec<f64>,
    /// Column indices spanning each level.
    pub subspaces: Vec<Vec<usize>>,
    /// Eigenvalue of each column.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors as columns.
    pub vectors: Operator,
    /// Present for the closed-form system only.
    pub parameters: Option<AnalyticParameters>,
}

impl ZenoEigensystem {
    pub fn space(&self) -> &Arc<HilbertSpace> {
        self.vectors.space()
    }

    pub fn column(&self, k: usize) -> DVector<C64> {
        self.vectors.matrix().column(k).into_owned()
    }

    /// Columns of the `k`-th subspace (0-based) as a matrix.
    pub fn subspace_basis(&self, k: usize) -> Result<DMatrix<C64>> {
        let cols = self.subspaces.get(k).ok_or(Error::OutOfRange { index: k, len: self.subspaces.len() })?;
        let m = self.vectors.matrix();
        Ok(DMatrix::from_columns(&cols.iter().map(|&c| m.column(c)).collect::<Vec<_>>()))
    }

    /// `max_k ‖H V_k − λ_k V_k‖` for the given Hamiltonian.
    pub fn residual(&self, h: &Operator) -> f64 {
        let hv = h.matrix() * self.vectors.matrix();
        let mut worst: f64 = 0.0;
        for (c, &lam) in self.eigenvalues.iter().enumerate() {
            let r = hv.column(c) - self.vectors.matrix().column(c) * C64::new(lam, 0.0);
            worst = worst.max(r.norm());
        }
        worst
    }

    /// `‖V†V − I‖_max`.
    pub fn orthonormality_error(&self) -> f64 {
        let v = self.vectors.matrix();
        let gram = v.adjoint() * v;
        let id = DMatrix::<C64>::identity(gram.nrows(), gram.ncols());
        crate::linalg::max_abs_diff(&gram, &id)
    }
}

/// Closed-form eigensystem of the three-atom coupling Hamiltonian.
///
/// The `ψ₆`/`ψ₇` expansions carry `|φ₄⟩` on their third component (the
/// only reading that is an eigenvector).
pub fn analytic_eigensystem(g: f64, v: f64) -> Result<ZenoEigensystem> {
    if !(g > 0.0 && v > 0.0) {
        return Err(Error::Config(format!("couplings must be positive, got g = {g}, v = {v}")));
    }
    let space = model::closed_space(3)?;
    let mut params = AnalyticParameters::new(g, v);
    let raw = params.raw_vectors(g, v);
    let (g2, v2, a) = (g * g, v * v, params.a);
    let l_a = ((g2 + 2.0 * v2 - a) / 2.0).sqrt();
    let l_b = ((3.0 * g2 + 2.0 * v2 - a) / 2.0).sqrt();
    let l_c = ((g2 + 2.0 * v2 + a) / 2.0).sqrt();
    let l_d = ((3.0 * g2 + 2.0 * v2 + a) / 2.0).sqrt();
    let levels = vec![0.0, -l_a, l_a, -l_b, l_b, -l_c, l_c, -l_d, l_d];

    let dim = space.dim();
    let mut vectors = DMatrix::<C64>::zeros(dim, dim);
    vectors[(0, 0)] = C64::new(1.0, 0.0);
    vectors[(dim - 1, 2)] = C64::new(1.0, 0.0);
    for (w, coeffs) in raw.iter().enumerate() {
        let norm = coeffs.iter().map(|c| c * c).sum::<f64>().sqrt();
        params.normalizers[w] = 1.0 / norm;
        let col = if w == 0 { 1 } else { w + 2 };
        for (k, c) in coeffs.iter().enumerate() {
            vectors[(k + 1, col)] = C64::new(c / norm, 0.0);
        }
    }
    let mut subspaces = vec![vec![0, 1, 2]];
    subspaces.extend((3..dim).map(|c| vec![c]));
    let mut eigenvalues = vec![0.0; 3];
    eigenvalues.extend_from_slice(&levels[1..]);
    Ok(ZenoEigensystem {
        levels,
        subspaces,
        eigenvalues,
        vectors: Operator::new(space, vectors)?,
        parameters: Some(params),
    })
}

/// Multiplies `col` by a unit phase so that the component at `anchor` (or,
/// if that vanishes, the largest component) is real and positive.
fn align_phase(col: &mut DVector<C64>, anchor: usize) {
    let pivot = if col[anchor].norm() > 1e-8 {
        anchor
    } else {
        col.iter().enumerate().max_by(|a, b| a.1.norm().total_cmp(&b.1.norm())).map(|(i, _)| i).unwrap_or(0)
    };
    let z = col[pivot];
    if z.norm() > 0.0 {
        let phase = z.conj() / z.norm();
        col.iter_mut().for_each(|c| *c *= phase);
    }
}

/// Full Hermitian diagonalization, ascending, degenerate levels grouped.
/// Each column is phase-aligned so its coefficient on the last
/// excited-atom state is real and positive.
pub fn numeric_eigensystem(h: &Operator) -> Result<ZenoEigensystem> {
    let err = h.hermiticity_error();
    if err > crate::hilbert::HERMITIAN_TOL {
        return Err(Error::NotHermitian(err));
    }
    let dim = h.dim();
    let eig = nalgebra::SymmetricEigen::new(h.matrix().clone());
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let anchor = h.space().basis().iter().rposition(|s| s.excited_atom().is_some()).unwrap_or(0);
    let scale = 1.0 + eig.eigenvalues.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut vectors = DMatrix::<C64>::zeros(dim, dim);
    let mut eigenvalues = Vec::with_capacity(dim);
    let mut levels: Vec<f64> = Vec::new();
    let mut subspaces: Vec<Vec<usize>> = Vec::new();
    for (c, &src) in order.iter().enumerate() {
        let lam = eig.eigenvalues[src];
        let mut col = eig.eigenvectors.column(src).into_owned();
        align_phase(&mut col, anchor);
        vectors.set_column(c, &col);
        eigenvalues.push(lam);
        match levels.last() {
            Some(&prev) if (lam - prev).abs() <= DEGENERACY_TOL * scale => {
                subspaces.last_mut().expect("nonempty").push(c);
            }
            _ => {
                levels.push(lam);
                subspaces.push(vec![c]);
            }
        }
    }
    for (level, cols) in levels.iter_mut().zip(&subspaces) {
        *level = cols.iter().map(|&c| eigenvalues[c]).sum::<f64>() / cols.len() as f64;
    }
    Ok(ZenoEigensystem {
        levels,
        subspaces,
        eigenvalues,
        vectors: Operator::new(h.space().clone(), vectors)?,
        parameters: None,
    })
}

/// Sine of the largest principal angle between the column spans of two
/// orthonormal bases of equal rank. Computed from the residual of projecting
/// `a` onto `b`, which stays accurate for tiny angles.
pub fn principal_angle_sine(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    let residual = a - b * (b.adjoint() * a);
    residual.singular_values().iter().fold(0.0f64, |m, &s| m.max(s))
}

/// Outcome of comparing two eigensystems level by level.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumComparison {
    /// Level pairs matched by nearest eigenvalue.
    pub pairs: Vec<(f64, f64)>,
    pub max_eigenvalue_error: f64,
    pub max_angle_sine: f64,
}

/// Matches every level of `a` to the nearest level of `b` with the same
/// degeneracy and reports the worst eigenvalue and subspace deviations.
pub fn compare_eigensystems(a: &ZenoEigensystem, b: &ZenoEigensystem) -> Result<SpectrumComparison> {
    if a.vectors.dim() != b.vectors.dim() || a.levels.len() != b.levels.len() {
        return Err(Error::Dimension { expected: a.levels.len(), found: b.levels.len() });
    }
    let mut pairs = Vec::new();
    let mut max_ev: f64 = 0.0;
    let mut max_angle: f64 = 0.0;
    for (k, &la) in a.levels.iter().enumerate() {
        let j = b
            .levels
            .iter()
            .enumerate()
            .filter(|(j, _)| b.subspaces[*j].len() == a.subspaces[k].len())
            .min_by(|x, y| (x.1 - la).abs().total_cmp(&(y.1 - la).abs()))
            .map(|(j, _)| j)
            .ok_or(Error::Dimension { expected: a.subspaces[k].len(), found: 0 })?;
        let lb = b.levels[j];
        pairs.push((la, lb));
        max_ev = max_ev.max((la - lb).abs());
        max_angle = max_angle.max(principal_angle_sine(&a.subspace_basis(k)?, &b.subspace_basis(j)?));
    }
    Ok(SpectrumComparison { pairs, max_eigenvalue_error: max_ev, max_angle_sine: max_angle })
}

/// `P_k = Σ_{β∈Z_k} |β⟩⟨β|`, with `k` one-based as in `Z₁ … Z₉`.
pub fn zeno_projector(eig: &ZenoEigensystem, k: usize) -> Result<Operator> {
    if k == 0 || k > eig.subspaces.len() {
        return Err(Error::OutOfRange { index: k, len: eig.subspaces.len() });
    }
    let v = eig.subspace_basis(k - 1)?;
    Operator::hermitian(eig.space().clone(), &v * v.adjoint())
}

fn require_odd(n: usize) -> Result<()> {
    if n < 3 || n.is_multiple_of(2) {
        return Err(Error::InvalidParams(vec![crate::Violation::new(
            "n_atoms",
            format!("the bright state is only defined for odd N >= 3, got {n}"),
        )]));
    }
    Ok(())
}

/// Zero-energy bright state: `+1` on every state with one excited atom,
/// `−g/v` on every state with one fiber photon, normalized.
pub fn bright_state(space: &HilbertSpace, g: f64, v: f64) -> Result<DVector<C64>> {
    require_odd(space.n_atoms())?;
    let modes = space.layout().modes();
    let mut out = DVector::<C64>::zeros(space.dim());
    for (i, s) in space.basis().iter().enumerate().take(space.coherent_dim()) {
        if s.excited_atom().is_some() && s.photons.iter().all(|&n| n == 0) {
            out[i] = C64::new(1.0, 0.0);
        } else if s.atoms.iter().all(|l| *l != crate::hilbert::AtomLevel::Excited) {
            let fiber = s.photons.iter().zip(modes).all(|(&n, m)| n == 0 || m.kind == ModeKind::Fiber);
            if fiber && s.excitations() == 1 {
                out[i] = C64::new(-g / v, 0.0);
            }
        }
    }
    let norm = out.norm();
    Ok(out / C64::new(norm, 0.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EffectiveVariant {
    /// Resonant three-level model.
    Resonant,
    /// Three-level model with the bright state shifted by `NΔN₁²`.
    Detuned,
    /// Two-level model after eliminating the bright state.
    Eliminated,
}

/// Reduced Hamiltonian over `(φ₁, ψ₁, φ_last)`, or `(φ₁, φ_last)` once
/// eliminated.
#[derive(Clone, Debug, PartialEq)]
pub struct EffectiveModel {
    pub variant: EffectiveVariant,
    pub matrix: DMatrix<C64>,
    pub n1: f64,
    pub n_atoms: usize,
    /// `NΔN₁/Ω̄` for the detuned and eliminated variants.
    pub detuning_ratio: Option<f64>,
}

impl EffectiveModel {
    /// Off-diagonal ground-state coupling `Ω_x` of the eliminated model.
    pub fn coupling(&self) -> Option<C64> {
        (self.variant == EffectiveVariant::Eliminated).then(|| self.matrix[(0, 1)])
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        crate::linalg::hermitian_eigenvalues(&self.matrix)
    }
}

fn laser_coefficients(omega1: f64, omega_n: f64, phase_fix: bool) -> (C64, C64) {
    let cn = if phase_fix { C64::new(0.0, -omega_n) } else { C64::new(omega_n, 0.0) };
    (C64::new(omega1, 0.0), cn)
}

/// `N₁(Ω₁|ψ₁⟩⟨φ₁| + Ω_N|ψ₁⟩⟨φ_last| + H.c.)`, plus `NΔN₁²|ψ₁⟩⟨ψ₁|` for the
/// detuned variant. The last-atom phase follows the same `phase_fix`
/// convention as the full laser Hamiltonian.
pub fn effective_hamiltonian(
    params: &SystemParams,
    omega1: f64,
    omega_n: f64,
    phase_fix: bool,
    variant: EffectiveVariant,
) -> Result<EffectiveModel> {
    require_odd(params.n_atoms)?;
    if variant == EffectiveVariant::Eliminated {
        return Err(Error::Config(
            "build the detuned model and call adiabatic_eliminate for the two-level variant".into(),
        ));
    }
    let n1 = bright_normalizer(params.g, params.v, params.n_atoms);
    let (c1, cn) = laser_coefficients(omega1, omega_n, phase_fix);
    let mut m = DMatrix::<C64>::zeros(3, 3);
    m[(1, 0)] = c1 * n1;
    m[(0, 1)] = (c1 * n1).conj();
    m[(1, 2)] = cn * n1;
    m[(2, 1)] = (cn * n1).conj();
    let mut ratio = None;
    if variant == EffectiveVariant::Detuned {
        m[(1, 1)] = C64::new(params.n_atoms as f64 * params.delta * n1 * n1, 0.0);
        let bar = omega1.abs().max(omega_n.abs());
        ratio = Some(params.n_atoms as f64 * params.delta * n1 / bar);
    }
    Ok(EffectiveModel { variant, matrix: m, n1, n_atoms: params.n_atoms, detuning_ratio: ratio })
}

/// Second-order elimination of the bright state from a detuned model:
/// `H_ij = −⟨i|H|ψ₁⟩⟨ψ₁|H|j⟩ / E_b`. The Stark shift is dropped when both
/// ground states carry the same shift.
pub fn adiabatic_eliminate(model: &EffectiveModel) -> Result<EffectiveModel> {
    if model.variant != EffectiveVariant::Detuned {
        return Err(Error::Config("adiabatic elimination needs the detuned model".into()));
    }
    let e_b = model.matrix[(1, 1)].re;
    let c = [model.matrix[(0, 1)], model.matrix[(2, 1)]];
    let mut m = DMatrix::<C64>::zeros(2, 2);
    for i in 0..2 {
        for j in 0..2 {
            m[(i, j)] = -c[i] * c[j].conj() / e_b;
        }
    }
    if (m[(0, 0)] - m[(1, 1)]).norm() <= 1e-15 * (1.0 + m[(0, 0)].norm()) {
        m[(0, 0)] = C64::new(0.0, 0.0);
        m[(1, 1)] = C64::new(0.0, 0.0);
    }
    if let Some(r) = model.detuning_ratio {
        if r < 1.0 {
            log::warn!("large-detuning condition violated: N*delta*N1 / omega_bar = {r:.3} < 1");
        }
    }
    Ok(EffectiveModel {
        variant: EffectiveVariant::Eliminated,
        matrix: m,
        n1: model.n1,
        n_atoms: model.n_atoms,
        detuning_ratio: model.detuning_ratio,
    })
}

/// Dark state `cos θ|φ₁⟩ − sin θ|φ_last⟩` of the resonant model, as a
/// three-component vector.
pub fn dark_state(theta: f64) -> DVector<C64> {
    DVector::from_vec(vec![C64::new(theta.cos(), 0.0), C64::new(0.0, 0.0), C64::new(-theta.sin(), 0.0)])
}

/// `dim × 3` isometry sending `(φ₁, ψ₁, φ_last)` into the full basis.
pub fn embedding(space: &HilbertSpace, g: f64, v: f64) -> Result<DMatrix<C64>> {
    let last = space.final_index().ok_or_else(|| Error::Config("final state is not in the basis".into()))?;
    let bright = bright_state(space, g, v)?;
    let mut e = DMatrix::<C64>::zeros(space.dim(), 3);
    e[(space.initial_index(), 0)] = C64::new(1.0, 0.0);
    e.set_column(1, &bright);
    e[(last, 2)] = C64::new(1.0, 0.0);
    Ok(e)
}

/// Time-dependent resonant or detuned three-level model driven by a pulse
/// schedule.
#[derive(Clone, Debug)]
pub struct EffectiveDriven {
    schedule: PulseSchedule,
    variant: EffectiveVariant,
    phase_fix: bool,
}

impl EffectiveDriven {
    pub fn new(schedule: PulseSchedule, variant: EffectiveVariant, phase_fix: bool) -> Result<Self> {
        require_odd(schedule.params().n_atoms)?;
        if variant == EffectiveVariant::Eliminated {
            return Err(Error::Config("the driven effective model is three-level".into()));
        }
        Ok(Self { schedule, variant, phase_fix })
    }
}

impl Hamiltonian for EffectiveDriven {
    fn dim(&self) -> usize {
        3
    }

    fn at(&self, t: f64) -> SparseMatrix {
        let (o1, on) = self.schedule.drive(t);
        let m = effective_hamiltonian(self.schedule.params(), o1, on, self.phase_fix, self.variant)
            .expect("validated at construction");
        SparseMatrix::from_dense(&m.matrix, 0.0)
    }
}
