//! Fixed-step RK4 integration of the Schrödinger and Lindblad equations.
//!
//! The master equation is written with the non-Hermitian generator
//! `K = H − (i/2) Σ r L†L`, so that `ρ̇ = −iKρ + iρK† + Σ r LρL†`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::SparseMatrix;
use crate::model::{JumpOperator, SystemParams};
use crate::pulses::ScheduleKind;
use crate::C64;

/// Time-dependent generator sampled at arbitrary times.
pub trait Hamiltonian: Send + Sync {
    fn dim(&self) -> usize;
    fn at(&self, t: f64) -> SparseMatrix;

    /// Writes `H(t)` into `out`; override to avoid reallocating per sample.
    fn write_at(&self, t: f64, out: &mut SparseMatrix) {
        *out = self.at(t);
    }
}

/// Time-independent Hamiltonian.
#[derive(Clone, Debug)]
pub struct Constant(pub SparseMatrix);

impl Hamiltonian for Constant {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn at(&self, _t: f64) -> SparseMatrix {
        self.0.clone()
    }
}

pub const DEFAULT_STEPS: usize = 20_000;
pub const MIN_STEPS: usize = 1_000;
pub const DEFAULT_TOLERANCE: f64 = 1e-6;
const ZERO: C64 = C64::new(0.0, 0.0);
const MINUS_I: C64 = C64::new(0.0, -1.0);

/// Uniform grid over `[0, t_end]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TimeGrid {
    pub t_end: f64,
    pub steps: usize,
    /// A state is recorded every `record_every` steps; the final step is
    /// always recorded.
    pub record_every: usize,
    /// Allowed drift of norm or trace and allowed negative eigenvalue.
    pub tolerance: f64,
}

impl TimeGrid {
    pub fn new(t_end: f64, steps: usize) -> Result<Self> {
        if steps < MIN_STEPS {
            return Err(Error::Config(format!("at least {MIN_STEPS} steps are required, got {steps}")));
        }
        if !(t_end > 0.0 && t_end.is_finite()) {
            return Err(Error::Config(format!("t_end must be positive, got {t_end}")));
        }
        Ok(Self { t_end, steps, record_every: steps, tolerance: DEFAULT_TOLERANCE })
    }

    pub fn with_default_steps(t_end: f64) -> Result<Self> {
        Self::new(t_end, DEFAULT_STEPS)
    }

    pub fn recording(mut self, every: usize) -> Self {
        self.record_every = every.max(1);
        self
    }

    /// Records approximately `samples` evenly spaced states.
    pub fn recording_samples(self, samples: usize) -> Self {
        let every = self.steps / samples.max(1);
        self.recording(every)
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tolerance = tol;
        self
    }

    pub fn dt(&self) -> f64 {
        self.t_end / self.steps as f64
    }

    pub fn time(&self, step: usize) -> f64 {
        if step == self.steps {
            self.t_end
        } else {
            self.dt() * step as f64
        }
    }

    pub fn records(&self, step: usize) -> bool {
        step.is_multiple_of(self.record_every) || step == self.steps
    }

    /// Step count suggested after a drift of `drift` against `tolerance`,
    /// assuming fourth-order convergence.
    fn refine(&self, drift: f64) -> usize {
        let factor = (drift / self.tolerance).powf(0.25).max(2.0) * 1.25;
        ((self.steps as f64 * factor).ceil() as usize).next_multiple_of(1000)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum QuantumState {
    Pure(DVector<C64>),
    Mixed(DMatrix<C64>),
}

impl QuantumState {
    pub fn dim(&self) -> usize {
        match self {
            QuantumState::Pure(v) => v.len(),
            QuantumState::Mixed(m) => m.nrows(),
        }
    }

    pub fn to_density(&self) -> DMatrix<C64> {
        match self {
            QuantumState::Pure(v) => v * v.adjoint(),
            QuantumState::Mixed(m) => m.clone(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub steps: usize,
    pub max_norm_drift: f64,
    pub max_trace_drift: f64,
    /// Smallest density-matrix eigenvalue over the recorded states.
    pub min_eigenvalue: f64,
    pub max_hermiticity_drift: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunMetadata {
    pub params: SystemParams,
    pub schedule: ScheduleKind,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub grid: TimeGrid,
    pub times: Vec<f64>,
    pub states: Vec<QuantumState>,
    pub diagnostics: Diagnostics,
    pub metadata: Option<RunMetadata>,
}

impl Trajectory {
    pub fn final_state(&self) -> &QuantumState {
        self.states.last().expect("trajectory records the final state")
    }

    pub fn with_metadata(mut self, meta: RunMetadata) -> Self {
        self.metadata = Some(meta);
        self
    }
}

fn check_dim(h: &dyn Hamiltonian, n: usize) -> Result<()> {
    if h.dim() != n {
        return Err(Error::Dimension { expected: h.dim(), found: n });
    }
    Ok(())
}

fn check_hermitian(h: &dyn Hamiltonian, grid: &TimeGrid) -> Result<()> {
    for t in [0.0, 0.5 * grid.t_end, grid.t_end] {
        let err = h.at(t).hermiticity_error();
        if err > crate::hilbert::HERMITIAN_TOL {
            return Err(Error::NotHermitian(err));
        }
    }
    Ok(())
}

/// Integrates `i∂ψ/∂t = H(t)ψ` without renormalization, handing the state
/// to `observer` at step 0 and after every step.
pub fn integrate_schrodinger(
    h: &dyn Hamiltonian,
    psi0: &DVector<C64>,
    grid: &TimeGrid,
    observer: &mut dyn FnMut(usize, f64, &DVector<C64>),
) -> Result<Diagnostics> {
    let n = psi0.len();
    check_dim(h, n)?;
    check_hermitian(h, grid)?;
    let norm0 = psi0.norm();
    if (norm0 - 1.0).abs() > grid.tolerance {
        return Err(Error::Config(format!("initial state must be normalized, norm = {norm0}")));
    }
    let dt = grid.dt();
    let mut psi = psi0.clone();
    let mut k: [DVector<C64>; 4] = std::array::from_fn(|_| DVector::zeros(n));
    let mut tmp = DVector::<C64>::zeros(n);
    let mut diag = Diagnostics { steps: grid.steps, ..Default::default() };
    observer(0, 0.0, &psi);

    let mut h0 = h.at(0.0);
    let mut hm = h0.clone();
    let mut h1 = h0.clone();
    for step in 0..grid.steps {
        let t = dt * step as f64;
        h.write_at(t + 0.5 * dt, &mut hm);
        h.write_at(grid.time(step + 1), &mut h1);
        h0.mul_vec_into(&psi, MINUS_I, &mut k[0]);
        tmp.copy_from(&psi);
        tmp.axpy(C64::new(0.5 * dt, 0.0), &k[0], C64::new(1.0, 0.0));
        hm.mul_vec_into(&tmp, MINUS_I, &mut k[1]);
        tmp.copy_from(&psi);
        tmp.axpy(C64::new(0.5 * dt, 0.0), &k[1], C64::new(1.0, 0.0));
        hm.mul_vec_into(&tmp, MINUS_I, &mut k[2]);
        tmp.copy_from(&psi);
        tmp.axpy(C64::new(dt, 0.0), &k[2], C64::new(1.0, 0.0));
        h1.mul_vec_into(&tmp, MINUS_I, &mut k[3]);
        let w = dt / 6.0;
        for i in 0..n {
            psi[i] += (k[0][i] + 2.0 * k[1][i] + 2.0 * k[2][i] + k[3][i]) * w;
        }

        std::mem::swap(&mut h0, &mut h1);

        let drift = (psi.norm() - 1.0).abs();
        diag.max_norm_drift = diag.max_norm_drift.max(drift);
        if drift.is_nan() || drift > grid.tolerance {
            return Err(Error::StepsTooFew {
                quantity: "norm",
                drift,
                tolerance: grid.tolerance,
                steps: grid.steps,
                suggested: grid.refine(drift),
            });
        }
        observer(step + 1, grid.time(step + 1), &psi);
    }
    Ok(diag)
}

/// [`integrate_schrodinger`] recording states on the grid's schedule.
pub fn evolve_schrodinger(h: &dyn Hamiltonian, psi0: &DVector<C64>, grid: &TimeGrid) -> Result<Trajectory> {
    let mut times = Vec::new();
    let mut states = Vec::new();
    let diagnostics = integrate_schrodinger(h, psi0, grid, &mut |step, t, psi| {
        if step == 0 || grid.records(step) {
            times.push(t);
            states.push(QuantumState::Pure(psi.clone()));
        }
    })?;
    Ok(Trajectory { grid: *grid, times, states, diagnostics, metadata: None })
}

/// Precomputed jump structure: `r_k L_k` entries and the damping term.
struct Dissipator {
    jumps: Vec<(f64, SparseMatrix)>,
    damping: SparseMatrix,
}

impl Dissipator {
    fn new(jumps: &[JumpOperator], n: usize) -> Result<Self> {
        let mut damping = SparseMatrix::zeros(n);
        let mut list = Vec::new();
        for j in jumps {
            if j.operator.dim() != n {
                return Err(Error::Dimension { expected: n, found: j.operator.dim() });
            }
            if j.rate < 0.0 {
                return Err(Error::Config(format!("negative rate for {}", j.label())));
            }
            if j.rate == 0.0 {
                continue;
            }
            let l = j.operator.to_sparse();
            let ldl = j.operator.adjoint().compose(&j.operator).to_sparse();
            damping.add_scaled(&ldl, C64::new(0.0, -0.5 * j.rate));
            list.push((j.rate, l));
        }
        damping.compress();
        Ok(Self { jumps: list, damping })
    }

    /// `out = −iKρ + iρK† + Σ r LρL†` with `K = H + damping`, using
    /// `iρK† = (−iKρ)†` for Hermitian `ρ`.
    fn apply(&self, h: &SparseMatrix, rho: &DMatrix<C64>, out: &mut DMatrix<C64>, scratch: &mut DMatrix<C64>) {
        let n = rho.nrows();
        let r = rho.as_slice();
        let left = scratch.as_mut_slice();
        left.fill(ZERO);
        for (lcol, rcol) in left.chunks_exact_mut(n).zip(r.chunks_exact(n)) {
            for &(i, k, z) in h.entries().iter().chain(self.damping.entries()) {
                lcol[i] += MINUS_I * z * rcol[k];
            }
        }
        let o = out.as_mut_slice();
        for j in 0..n {
            for i in 0..n {
                o[i + j * n] = left[i + j * n] + left[j + i * n].conj();
            }
        }
        for (rate, l) in &self.jumps {
            for &(a, b, x) in l.entries() {
                for &(c, d, y) in l.entries() {
                    o[a + c * n] += *rate * x * r[b + d * n] * y.conj();
                }
            }
        }
    }
}

fn min_eigenvalue(rho: &DMatrix<C64>) -> f64 {
    crate::linalg::hermitian_eigenvalues(rho).first().copied().unwrap_or(0.0)
}

/// Integrates the Lindblad equation from `rho0`, handing the state to
/// `observer` at step 0 and after every step. Positivity is checked on the
/// grid's recording schedule.
pub fn integrate_lindblad(
    h: &dyn Hamiltonian,
    jumps: &[JumpOperator],
    rho0: &DMatrix<C64>,
    grid: &TimeGrid,
    observer: &mut dyn FnMut(usize, f64, &DMatrix<C64>),
) -> Result<Diagnostics> {
    let n = rho0.nrows();
    if rho0.ncols() != n {
        return Err(Error::Dimension { expected: n, found: rho0.ncols() });
    }
    check_dim(h, n)?;
    check_hermitian(h, grid)?;
    let herm0 = crate::linalg::max_abs_diff(rho0, &rho0.adjoint());
    let tr0 = rho0.trace();
    if herm0 > 1e-12 || (tr0 - C64::new(1.0, 0.0)).norm() > grid.tolerance {
        return Err(Error::Config(format!(
            "initial density matrix must be Hermitian with unit trace (trace = {tr0}, asymmetry = {herm0:e})"
        )));
    }
    let e0 = min_eigenvalue(rho0);
    if e0 < -grid.tolerance {
        return Err(Error::Config(format!("initial density matrix is not positive (min eigenvalue {e0:e})")));
    }
    let diss = Dissipator::new(jumps, n)?;

    let dt = grid.dt();
    let mut rho = rho0.clone();
    let mut k: [DMatrix<C64>; 4] = std::array::from_fn(|_| DMatrix::zeros(n, n));
    let mut tmp = DMatrix::<C64>::zeros(n, n);
    let mut scratch = DMatrix::<C64>::zeros(n, n);
    let mut diag = Diagnostics { steps: grid.steps, min_eigenvalue: e0, ..Default::default() };
    observer(0, 0.0, &rho);

    let stage = |tmp: &mut DMatrix<C64>, rho: &DMatrix<C64>, k: &DMatrix<C64>, c: f64| {
        tmp.zip_zip_apply(rho, k, |out, r, kk| *out = r + kk * c);
    };
    let mut h0 = h.at(0.0);
    let mut hm = h0.clone();
    let mut h1 = h0.clone();
    for step in 0..grid.steps {
        let t = dt * step as f64;
        h.write_at(t + 0.5 * dt, &mut hm);
        h.write_at(grid.time(step + 1), &mut h1);
        diss.apply(&h0, &rho, &mut k[0], &mut scratch);
        stage(&mut tmp, &rho, &k[0], 0.5 * dt);
        diss.apply(&hm, &tmp, &mut k[1], &mut scratch);
        stage(&mut tmp, &rho, &k[1], 0.5 * dt);
        diss.apply(&hm, &tmp, &mut k[2], &mut scratch);
        stage(&mut tmp, &rho, &k[2], dt);
        diss.apply(&h1, &tmp, &mut k[3], &mut scratch);
        std::mem::swap(&mut h0, &mut h1);
        let w = dt / 6.0;
        for idx in 0..n * n {
            rho[idx] += (k[0][idx] + 2.0 * k[1][idx] + 2.0 * k[2][idx] + k[3][idx]) * w;
        }

        let drift = (rho.trace() - C64::new(1.0, 0.0)).norm();
        diag.max_trace_drift = diag.max_trace_drift.max(drift);
        if drift.is_nan() || drift > grid.tolerance {
            return Err(Error::StepsTooFew {
                quantity: "trace",
                drift,
                tolerance: grid.tolerance,
                steps: grid.steps,
                suggested: grid.refine(drift),
            });
        }
        if grid.records(step + 1) {
            let herm = crate::linalg::max_abs_diff(&rho, &rho.adjoint());
            diag.max_hermiticity_drift = diag.max_hermiticity_drift.max(herm);
            let e = min_eigenvalue(&rho);
            diag.min_eigenvalue = diag.min_eigenvalue.min(e);
            if e < -grid.tolerance {
                return Err(Error::Positivity { min: e, steps: grid.steps, suggested: grid.refine(-e) });
            }
        }
        observer(step + 1, grid.time(step + 1), &rho);
    }
    Ok(diag)
}

/// [`integrate_lindblad`] recording states on the grid's schedule.
pub fn evolve_lindblad(
    h: &dyn Hamiltonian,
    jumps: &[JumpOperator],
    rho0: &DMatrix<C64>,
    grid: &TimeGrid,
) -> Result<Trajectory> {
    let mut times = Vec::new();
    let mut states = Vec::new();
    let diagnostics = integrate_lindblad(h, jumps, rho0, grid, &mut |step, t, rho| {
        if step == 0 || grid.records(step) {
            times.push(t);
            states.push(QuantumState::Mixed(rho.clone()));
        }
    })?;
    Ok(Trajectory { grid: *grid, times, states, diagnostics, metadata: None })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use approx::assert_relative_eq;
    use proptest::prelude::*;

    use super::*;
    use crate::hilbert::{ModeId, Operator};
    use crate::model::{jump_operators, open_space, JumpChannel};

    fn rabi(omega: f64) -> Constant {
        let mut m = SparseMatrix::zeros(2);
        m.push(0, 1, C64::new(omega, 0.0));
        m.push(1, 0, C64::new(omega, 0.0));
        Constant(m)
    }

    fn ket(n: usize, i: usize) -> DVector<C64> {
        let mut v = DVector::zeros(n);
        v[i] = C64::new(1.0, 0.0);
        v
    }

    fn pure(s: &QuantumState) -> &DVector<C64> {
        match s {
            QuantumState::Pure(v) => v,
            QuantumState::Mixed(_) => panic!("expected a pure state"),
        }
    }

    #[test]
    fn grid_rules() {
        assert!(TimeGrid::new(1.0, 999).is_err());
        assert!(TimeGrid::new(0.0, 1000).is_err());
        let g = TimeGrid::new(2.0, 1000).unwrap().recording(300);
        let recorded: Vec<usize> = (0..=1000).filter(|&s| s == 0 || g.records(s)).collect();
        assert_eq!(recorded, vec![0, 300, 600, 900, 1000]);
        assert_eq!(g.time(1000), 2.0);
    }

    #[test]
    fn zero_hamiltonian_is_identity() {
        let h = Constant(SparseMatrix::zeros(3));
        let psi0 = DVector::from_vec(vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8), C64::new(0.0, 0.0)]);
        let tr = evolve_schrodinger(&h, &psi0, &TimeGrid::new(5.0, 1000).unwrap().recording(100)).unwrap();
        for s in &tr.states {
            assert_eq!(pure(s), &psi0);
        }
    }

    #[test]
    fn rabi_population() {
        let omega = 0.7;
        let grid = TimeGrid::new(10.0, 2000).unwrap().recording(100);
        let tr = evolve_schrodinger(&rabi(omega), &ket(2, 0), &grid).unwrap();
        for (t, s) in tr.times.iter().zip(&tr.states) {
            assert_relative_eq!(pure(s)[1].norm_sqr(), (omega * t).sin().powi(2), epsilon = 1e-9);
        }
        assert!(tr.diagnostics.max_norm_drift < 1e-9);
    }

    #[test]
    fn rk4_global_error_is_fourth_order() {
        let omega = 1.0;
        let t_end = 60.0;
        let err = |steps: usize| {
            let grid = TimeGrid::new(t_end, steps).unwrap().with_tolerance(1.0);
            let tr = evolve_schrodinger(&rabi(omega), &ket(2, 0), &grid).unwrap();
            let psi = pure(tr.final_state());
            let exact =
                DVector::from_vec(vec![C64::new((omega * t_end).cos(), 0.0), C64::new(0.0, -(omega * t_end).sin())]);
            (psi - exact).norm()
        };
        let (e1, e2, e4) = (err(1000), err(2000), err(4000));
        for ratio in [e1 / e2, e2 / e4] {
            assert!((8.0..=32.0).contains(&ratio), "ratio {ratio}");
        }
    }

    #[test]
    fn norm_drift_reports_refinement() {
        let grid = TimeGrid::new(2000.0, 1000).unwrap();
        match evolve_schrodinger(&rabi(1.0), &ket(2, 0), &grid) {
            Err(Error::StepsTooFew { quantity, suggested, .. }) => {
                assert_eq!(quantity, "norm");
                assert!(suggested >= 2000);
            }
            other => panic!("expected refinement error, got {other:?}"),
        }
    }

    #[test]
    fn dimension_mismatch() {
        let grid = TimeGrid::new(1.0, 1000).unwrap();
        assert!(matches!(evolve_schrodinger(&rabi(1.0), &ket(3, 0), &grid), Err(Error::Dimension { .. })));
    }

    fn decay_setup(rate: f64) -> (Arc<crate::hilbert::HilbertSpace>, Vec<JumpOperator>) {
        let space = open_space(3).unwrap();
        let p = SystemParams { kappa_f: rate, ..SystemParams::default() };
        let jumps = jump_operators(&space, &p).unwrap();
        (space, jumps)
    }

    #[test]
    fn fiber_photon_decays_exponentially() {
        let kappa = 0.3;
        let (space, jumps) = decay_setup(kappa);
        let h = Constant(SparseMatrix::zeros(space.dim()));
        let psi = space.basis_vector(3);
        let rho0 = &psi * psi.adjoint();
        let grid = TimeGrid::new(5.0, 1000).unwrap().recording(100);
        let tr = evolve_lindblad(&h, &jumps, &rho0, &grid).unwrap();
        for (t, s) in tr.times.iter().zip(&tr.states) {
            let QuantumState::Mixed(rho) = s else { panic!() };
            assert_relative_eq!(rho[(3, 3)].re, (-kappa * t).exp(), epsilon = 1e-10);
        }
        assert!(tr.diagnostics.max_trace_drift < 1e-12);
        assert!(jumps.iter().any(|j| j.channel == JumpChannel::Mode(ModeId::fiber(0))));
    }

    #[test]
    fn lindblad_without_rates_matches_schrodinger() {
        let (space, jumps) = decay_setup(0.0);
        let p = SystemParams { tf: 30.0, ..SystemParams::default() };
        let sched = crate::pulses::PulseSchedule::new(ScheduleKind::Tqd, &p).unwrap();
        let h = crate::model::DrivenHamiltonian::new(&space, sched).unwrap();
        let psi0 = space.basis_vector(0);
        let grid = TimeGrid::new(p.tf, 4000).unwrap();
        let a = evolve_schrodinger(&h, &psi0, &grid).unwrap();
        let b = evolve_lindblad(&h, &jumps, &(&psi0 * psi0.adjoint()), &grid).unwrap();
        let QuantumState::Mixed(rho) = b.final_state() else { panic!() };
        let diff = crate::linalg::max_abs_diff(&a.final_state().to_density(), rho);
        assert!(diff < 1e-8, "{diff}");
    }

    #[test]
    fn rejects_bad_density() {
        let h = Constant(SparseMatrix::zeros(2));
        let grid = TimeGrid::new(1.0, 1000).unwrap();
        let rho = DMatrix::from_diagonal(&DVector::from_vec(vec![C64::new(1.5, 0.0), C64::new(-0.5, 0.0)]));
        assert!(matches!(evolve_lindblad(&h, &[], &rho, &grid), Err(Error::Config(_))));
    }

    #[test]
    fn non_hermitian_hamiltonian_rejected() {
        let mut m = SparseMatrix::zeros(2);
        m.push(0, 1, C64::new(1.0, 0.0));
        let grid = TimeGrid::new(1.0, 1000).unwrap();
        assert!(matches!(evolve_schrodinger(&Constant(m), &ket(2, 0), &grid), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn operator_round_trip_dimension() {
        let space = open_space(3).unwrap();
        let op = Operator::zeros(space.clone());
        assert_eq!(op.to_sparse().dim(), space.dim());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn rabi_matches_closed_form(omega in 0.05f64..1.5, t_end in 1.0f64..20.0) {
            let grid = TimeGrid::new(t_end, 2000).unwrap();
            let tr = evolve_schrodinger(&rabi(omega), &ket(2, 0), &grid).unwrap();
            let p = pure(tr.final_state())[1].norm_sqr();
            prop_assert!((p - (omega * t_end).sin().powi(2)).abs() < 1e-8);
        }

        #[test]
        fn trace_and_positivity_preserved(gamma in 0.0f64..0.5, kc in 0.0f64..0.5) {
            let space = open_space(3).unwrap();
            let p = SystemParams { gamma, kappa_c: kc, kappa_f: 0.1, tf: 20.0, ..SystemParams::default() };
            let jumps = jump_operators(&space, &p).unwrap();
            let sched = crate::pulses::PulseSchedule::new(ScheduleKind::Adiabatic, &p).unwrap();
            let h = crate::model::DrivenHamiltonian::new(&space, sched).unwrap();
            let psi = space.basis_vector(0);
            let grid = TimeGrid::new(p.tf, 1000).unwrap().recording(50);
            let tr = evolve_lindblad(&h, &jumps, &(&psi * psi.adjoint()), &grid).unwrap();
            prop_assert!(tr.diagnostics.max_trace_drift <= 1e-6);
            prop_assert!(tr.diagnostics.min_eigenvalue >= -1e-6);
            prop_assert!(tr.diagnostics.max_hermiticity_drift <= 1e-10);
        }
    }
}
