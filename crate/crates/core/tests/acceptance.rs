//! End-to-end acceptance checks. Prints one `PASS`/`FAIL` line per criterion
//! and exits nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ghzsim::dynamics::{evolve_schrodinger, integrate_schrodinger, Constant, Diagnostics, TimeGrid};
use ghzsim::experiments::{final_fidelity, run_final, run_scenario, Overrides, RunSpec};
use ghzsim::linalg::SparseMatrix;
use ghzsim::model::{closed_space, coupling_hamiltonian, DrivenHamiltonian, SystemParams};
use ghzsim::observables::Observable;
use ghzsim::pulses::{PulseSchedule, ScheduleKind};
use ghzsim::zeno::{
    analytic_eigensystem, compare_eigensystems, embedding, numeric_eigensystem, EffectiveDriven, EffectiveVariant,
};

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn fidelity(
    params: SystemParams,
    schedule: ScheduleKind,
    open: bool,
    steps: usize,
) -> Result<(f64, Diagnostics), String> {
    let spec = RunSpec::new(params, schedule, open).with_steps(steps);
    let (values, diag) = run_final(&spec, &[Observable::Fidelity]).map_err(|e| e.to_string())?;
    Ok((values[0], diag))
}

fn eigensystem_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let (mut worst_ev, mut worst_angle) = (0.0f64, 0.0f64);
    let space = closed_space(3).map_err(|e| e.to_string())?;
    for _ in 0..20 {
        let (g, v) = (rng.random_range(0.5..2.0), rng.random_range(0.5..2.0));
        let p = SystemParams { g, v, ..SystemParams::default() };
        let h = coupling_hamiltonian(&space, &p).map_err(|e| e.to_string())?;
        let analytic = analytic_eigensystem(g, v).map_err(|e| e.to_string())?;
        let numeric = numeric_eigensystem(&h).map_err(|e| e.to_string())?;
        let cmp = compare_eigensystems(&analytic, &numeric).map_err(|e| e.to_string())?;
        worst_ev = worst_ev.max(cmp.max_eigenvalue_error);
        worst_angle = worst_angle.max(cmp.max_angle_sine.asin());
    }
    check(
        worst_ev <= 1e-9 && worst_angle <= 1e-8,
        format!("max eigenvalue error {worst_ev:.2e}, max principal angle {worst_angle:.2e} over 20 (g, v)"),
    )
}

fn adiabatic_baseline() -> Outcome {
    let p = SystemParams { tf: 400.0, ..SystemParams::default() };
    let f = final_fidelity(&RunSpec::new(p, ScheduleKind::Adiabatic, false)).map_err(|e| e.to_string())?;
    check(f >= 0.98, format!("adiabatic fidelity at t_f = 400: {f:.5} (need >= 0.98)"))
}

fn tqd_speedup() -> Outcome {
    let p = SystemParams::default();
    let tqd = final_fidelity(&RunSpec::new(p.clone(), ScheduleKind::Tqd, false)).map_err(|e| e.to_string())?;
    let adiabatic = final_fidelity(&RunSpec::new(p, ScheduleKind::Adiabatic, false)).map_err(|e| e.to_string())?;
    check(
        tqd >= 0.98 && tqd - adiabatic >= 0.15,
        format!(
            "t_f = 72: transitionless {tqd:.5} (need >= 0.98), adiabatic {adiabatic:.5}, gap {:.5} (need >= 0.15)",
            tqd - adiabatic
        ),
    )
}

fn headline() -> Outcome {
    let f = final_fidelity(&RunSpec::new(SystemParams::experimental(), ScheduleKind::Tqd, true))
        .map_err(|e| e.to_string())?;
    check((f - 0.9715).abs() <= 0.01, format!("experimental parameters: {f:.5} (need 0.9715 +/- 0.01)"))
}

fn fiber_decay() -> Outcome {
    let base =
        final_fidelity(&RunSpec::new(SystemParams::default(), ScheduleKind::Tqd, false)).map_err(|e| e.to_string())?;
    let mut worst = base;
    for k in 0..41 {
        let p = SystemParams { kappa_f: 0.01 * k as f64 / 40.0, ..SystemParams::default() };
        let f = final_fidelity(&RunSpec::new(p, ScheduleKind::Tqd, true)).map_err(|e| e.to_string())?;
        worst = worst.min(f);
    }
    check(
        base - worst < 0.01,
        format!(
            "kappa_f in [0, 0.01], 41 points: fidelity {base:.5} -> min {worst:.5}, drop {:.5} (need < 0.01)",
            base - worst
        ),
    )
}

fn robustness() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for name in ["fig10a", "fig10b"] {
        let sweep = run_scenario(name, &Overrides::default()).map_err(|e| e.to_string())?;
        let failures = sweep.failures().len();
        let min = sweep.series(Observable::Fidelity).into_iter().flatten().fold(f64::INFINITY, f64::min);
        ok &= failures == 0 && sweep.cells.len() == 41 * 41 && min >= 0.95;
        parts.push(format!("{name} min {min:.5} over {} cells ({failures} failed)", sweep.cells.len()));
    }
    check(ok, format!("{} (need >= 0.95)", parts.join(", ")))
}

fn n_independence() -> Outcome {
    let start = Instant::now();
    let mut parts = Vec::new();
    let mut ok = true;
    for n in [3, 5, 7] {
        let p = SystemParams { n_atoms: n, ..SystemParams::default() };
        let f = final_fidelity(&RunSpec::new(p, ScheduleKind::Tqd, false)).map_err(|e| e.to_string())?;
        ok &= f >= 0.97;
        parts.push(format!("N={n}: {f:.5}"));
    }
    let secs = start.elapsed().as_secs_f64();
    check(ok && secs < 60.0, format!("{} (need >= 0.97 each), {secs:.1} s", parts.join(", ")))
}

/// Global error of RK4 on a resonant two-level Rabi problem for `steps`.
fn rabi_error(steps: usize) -> Result<f64, String> {
    let (omega, t_end) = (1.0, 60.0);
    let mut h = SparseMatrix::zeros(2);
    h.push(0, 1, C64::new(omega, 0.0));
    h.push(1, 0, C64::new(omega, 0.0));
    let psi0 = DVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
    let grid = TimeGrid::new(t_end, steps).map_err(|e| e.to_string())?.with_tolerance(1.0);
    let mut last = psi0.clone();
    integrate_schrodinger(&Constant(h), &psi0, &grid, &mut |_, _, psi| last = psi.clone())
        .map_err(|e| e.to_string())?;
    let exact = DVector::from_vec(vec![C64::new((omega * t_end).cos(), 0.0), C64::new(0.0, -(omega * t_end).sin())]);
    Ok((last - exact).norm())
}

/// Smallest overlap between the full closed evolution and the embedded
/// three-level resonant model along an adiabatic run, plus the final one.
fn zeno_overlap(omega0: f64) -> Result<(f64, f64), String> {
    let p = SystemParams { omega0, tf: 400.0, ..SystemParams::default() };
    let space = closed_space(3).map_err(|e| e.to_string())?;
    let schedule = PulseSchedule::new(ScheduleKind::Adiabatic, &p).map_err(|e| e.to_string())?;
    let full = DrivenHamiltonian::new(&space, schedule.clone()).map_err(|e| e.to_string())?;
    let reduced = EffectiveDriven::new(schedule, EffectiveVariant::Resonant, false).map_err(|e| e.to_string())?;
    let grid = TimeGrid::with_default_steps(p.tf).map_err(|e| e.to_string())?.recording(100);
    let psi0 = space.basis_vector(space.initial_index());
    let phi0 = DVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)]);
    let a = evolve_schrodinger(&full, &psi0, &grid).map_err(|e| e.to_string())?;
    let b = evolve_schrodinger(&reduced, &phi0, &grid).map_err(|e| e.to_string())?;
    let e: DMatrix<C64> = embedding(&space, p.g, p.v).map_err(|e| e.to_string())?;
    let overlaps: Vec<f64> = a
        .states
        .iter()
        .zip(&b.states)
        .map(|(x, y)| match (x, y) {
            (ghzsim::dynamics::QuantumState::Pure(x), ghzsim::dynamics::QuantumState::Pure(y)) => {
                (&e * y).dotc(x).norm_sqr()
            }
            _ => 0.0,
        })
        .collect();
    let min = overlaps.iter().copied().fold(f64::INFINITY, f64::min);
    Ok((min, *overlaps.last().unwrap_or(&0.0)))
}

fn solver_integrity() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();

    let runs = [
        ("adiabatic t_f=400", SystemParams { tf: 400.0, ..SystemParams::default() }, ScheduleKind::Adiabatic, false),
        ("transitionless t_f=72", SystemParams::default(), ScheduleKind::Tqd, false),
        ("experimental", SystemParams::experimental(), ScheduleKind::Tqd, true),
    ];
    let (mut drift, mut min_eig, mut halving) = (0.0f64, 0.0f64, 0.0f64);
    for (_, p, schedule, open) in &runs {
        let (f1, d1) = fidelity(p.clone(), *schedule, *open, 20_000)?;
        let (f2, d2) = fidelity(p.clone(), *schedule, *open, 40_000)?;
        drift = drift.max(d1.max_norm_drift).max(d1.max_trace_drift).max(d2.max_norm_drift).max(d2.max_trace_drift);
        min_eig = min_eig.min(d1.min_eigenvalue).min(d2.min_eigenvalue);
        halving = halving.max((f1 - f2).abs());
    }
    ok &= drift <= 1e-6 && min_eig >= -1e-6 && halving <= 1e-6;
    parts.push(format!("drift {drift:.1e}, min eigenvalue {min_eig:.1e}, step-halving change {halving:.1e}"));

    let (e1, e2, e4) = (rabi_error(1000)?, rabi_error(2000)?, rabi_error(4000)?);
    let (r1, r2) = (e1 / e2, e2 / e4);
    ok &= (8.0..=32.0).contains(&r1) && (8.0..=32.0).contains(&r2);
    parts.push(format!("RK4 error ratios {r1:.2}, {r2:.2} (expect ~16)"));

    let (min_overlap, final_overlap) = zeno_overlap(0.05)?;
    ok &= min_overlap >= 0.999;
    parts.push(format!(
        "Zeno overlap at omega0=0.05: min {min_overlap:.5}, final {final_overlap:.5} (need min >= 0.999)"
    ));

    check(ok, parts.join("; "))
}

fn main() -> ExitCode {
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let criteria: [(u32, &str, fn() -> Outcome); 8] = [
        (1, "eigensystem oracle", eigensystem_oracle),
        (2, "adiabatic baseline", adiabatic_baseline),
        (3, "transitionless speedup", tqd_speedup),
        (4, "experimental headline fidelity", headline),
        (5, "fiber-decay insensitivity", fiber_decay),
        (6, "robustness surfaces", robustness),
        (7, "N-independence", n_independence),
        (8, "solver integrity", solver_integrity),
    ];
    let mut failed = 0;
    for (n, name, run) in criteria {
        let id = format!("criterion_{n}");
        if !filter.is_empty() && !filter.iter().any(|f| id.contains(f.as_str()) || name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {n} ({name}): {detail} [{secs:.1} s]"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {n} ({name}): {detail} [{secs:.1} s]");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
