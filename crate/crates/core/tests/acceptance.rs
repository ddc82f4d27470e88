//! Acceptance suite: one test per reference property, each printing a
//! PASS/FAIL line with the measured values.

use std::io::Write;

use synthbath::config::SolverMode;
use synthbath::verify::{self, CheckOutcome, Tolerances, VerifyOptions};

fn report(outcome: &CheckOutcome) {
    // Written to the raw handle so the line shows up without --nocapture.
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "[acceptance] {}", outcome.line());
    let _ = out.flush();
}

fn check(c: verify::Check) {
    let outcome = c(&VerifyOptions::default());
    report(&outcome);
    assert!(outcome.passed, "{}", outcome.line());
}

#[test]
fn tolerances_are_pinned() {
    let t = Tolerances::strict();
    assert_eq!(t.population_ratio, 1e-8);
    assert_eq!(t.heat_flux_zero, 1e-10);
    assert_eq!(t.entropy_flux_zero, 1e-9);
    assert_eq!(t.product_state, 1e-9);
    assert_eq!(t.balance, 1e-9);
    assert_eq!(t.unit_efficiency, 1e-8);
    assert_eq!(t.clausius_floor, -1e-12);
    assert_eq!(t.sign_deadband, 1e-10);
    let i = Tolerances::integrated();
    assert_eq!(i.balance, 1e-7);
    assert_eq!(i.clausius_floor, -1e-12);
    assert_eq!(synthbath::tolerance::SOLVER_AGREEMENT, 1e-7);
    assert_eq!(synthbath::tolerance::STEADY_STATE_RESIDUAL, 1e-9);
    assert_eq!(synthbath::tolerance::HERMITIAN, 1e-10);
    assert_eq!(synthbath::tolerance::MIN_EIGENVALUE, -1e-10);
    assert_eq!(verify::GRID_POINTS, 21);
    assert_eq!(verify::ENGINE_POINTS, 41);
}

#[test]
fn criterion_01_single_qutrit_equilibrium() {
    check(verify::single_qutrit_equilibrium);
}

#[test]
fn criterion_02_zeroth_law() {
    check(verify::zeroth_law);
}

#[test]
fn criterion_03_kelvin_planck_signs() {
    check(verify::kelvin_planck);
}

#[test]
fn criterion_04_clausius() {
    check(verify::clausius);
}

#[test]
fn criterion_05_entropy_flux_inversion() {
    check(verify::entropy_inversion);
}

#[test]
fn criterion_06_first_laws() {
    check(verify::first_laws);
}

#[test]
fn criterion_07_engine_regime() {
    check(verify::engine_regime);
}

#[test]
fn criterion_08_engine_decomposition() {
    check(verify::engine_decomposition);
}

#[test]
fn criterion_09_driven_qutrit() {
    check(verify::driven_qutrit);
}

#[test]
fn criterion_10_solver_oracle() {
    check(verify::solver_oracle);
}

#[test]
fn criterion_11_grid_determinism() {
    check(verify::determinism);
}

#[test]
fn occupation_fault_is_detected() {
    let opts = VerifyOptions {
        occupation_shift: 0.1,
        ..Default::default()
    };
    let outcome = verify::single_qutrit_equilibrium(&opts);
    report(&CheckOutcome {
        name: format!("fault injection (N+0.1) -> {}", outcome.name),
        passed: !outcome.passed,
        details: outcome.details.clone(),
    });
    assert!(!outcome.passed);
}

#[test]
fn integrated_solver_gives_same_verdicts() {
    let opts = VerifyOptions {
        solver: SolverMode::Integrate,
        ..Default::default()
    };
    for c in [
        verify::single_qutrit_equilibrium as verify::Check,
        verify::zeroth_law,
        verify::driven_qutrit,
    ] {
        let outcome = c(&opts);
        report(&CheckOutcome {
            name: format!("integrate-only {}", outcome.name),
            ..outcome.clone()
        });
        assert!(outcome.passed, "{}", outcome.line());
    }
}
