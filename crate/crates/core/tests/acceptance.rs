//! Acceptance gate: one test per release criterion. Each criterion carries
//! its own tolerance and wall-clock budget, pinned inside the library's
//! verification module; a budget overrun fails the criterion even when the
//! numbers are right. The tests run serialized so the timing budgets see an
//! otherwise idle machine, and each prints its one-line verdict to stderr.

use std::io::Write as _;
use std::sync::{Mutex, MutexGuard, OnceLock};

use freelyap::verify::{self, CriterionOutcome};

fn gate() -> MutexGuard<'static, ()> {
    static LOCK: OnceLock<Mutex<()>> = OnceLock::new();
    let lock = LOCK.get_or_init(|| Mutex::new(()));
    lock.lock().unwrap_or_else(|poisoned| poisoned.into_inner())
}

fn check(run: fn() -> CriterionOutcome) {
    let _serial = gate();
    let outcome = run();
    let line = outcome.line();
    let mut err = std::io::stderr().lock();
    writeln!(err, "{line}").ok();
    drop(err);
    assert!(outcome.passed, "{line}");
}

#[test]
fn c01_marginal_closed_form() {
    check(verify::criterion_01);
}

#[test]
fn c02_distribution_closed_form() {
    check(verify::criterion_02);
}

#[test]
fn c03_determinant_cross_method() {
    check(verify::criterion_03);
}

#[test]
fn c04_determinant_derivative() {
    check(verify::criterion_04);
}

#[test]
fn c05_product_additivity() {
    check(verify::criterion_05);
}

#[test]
fn c06_monotone_largest() {
    check(verify::criterion_06);
}

#[test]
fn c07_integral_equation() {
    check(verify::criterion_07);
}

#[test]
fn c08_mc_growth() {
    check(verify::criterion_08);
}

#[test]
fn c09_mc_spectrum() {
    check(verify::criterion_09);
}

#[test]
fn c10_mc_compression() {
    check(verify::criterion_10);
}

#[test]
fn c11_mc_projection_rank() {
    check(verify::criterion_11);
}
