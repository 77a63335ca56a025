//! Self-contained verification suite.
//!
//! Each criterion checks one end-to-end property of the pipeline — closed
//! forms, cross-method agreement, invariants, or Monte Carlo consistency —
//! against a pinned tolerance and a wall-clock budget. A criterion passes
//! only if both hold. The suite backs both `freelyap verify` and the
//! acceptance test target.

use std::time::Instant;

use serde::Serialize;

use crate::lyapunov::{
    exponent_cdf, fk_determinant, largest_exponent, marginal_exponent, newman_solve,
    s_from_determinant, DetMethod,
};
use crate::measure::SpectralMeasure;
use crate::rmt::{projected_rank, run_mc, EnsembleConfig, SampleMode, SingularLaw};
use crate::transform::SProduct;

/// Seed used by every stochastic criterion.
pub const VERIFY_SEED: u64 = 0x00C0_FFEE;

/// Result of one verification criterion.
#[derive(Clone, Debug, Serialize)]
pub struct CriterionOutcome {
    pub id: u32,
    pub name: String,
    pub passed: bool,
    /// Wall-clock time actually spent.
    pub seconds: f64,
    /// Budget the run must stay within to pass.
    pub budget_seconds: f64,
    /// Human-readable summary (worst error observed, or the failure).
    pub detail: String,
}

impl CriterionOutcome {
    /// One-line rendering: `criterion 03 determinant-cross-method: PASS (0.1s; ...)`.
    pub fn line(&self) -> String {
        format!(
            "criterion {:02} {}: {} ({:.2}s of {:.0}s; {})",
            self.id,
            self.name,
            if self.passed { "PASS" } else { "FAIL" },
            self.seconds,
            self.budget_seconds,
            self.detail
        )
    }
}

/// Full verification document.
#[derive(Clone, Debug, Serialize)]
pub struct VerifyDoc {
    pub schema_version: u32,
    pub passed: bool,
    pub criteria: Vec<CriterionOutcome>,
}

impl VerifyDoc {
    pub fn new(criteria: Vec<CriterionOutcome>) -> Self {
        VerifyDoc {
            schema_version: crate::io::SCHEMA_VERSION,
            passed: criteria.iter().all(|c| c.passed),
            criteria,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("verify serialization")
    }
}

fn outcome<F>(id: u32, name: &str, budget_seconds: f64, body: F) -> CriterionOutcome
where
    F: FnOnce() -> Result<String, String>,
{
    let start = Instant::now();
    let result = body();
    let seconds = start.elapsed().as_secs_f64();
    let (mut passed, detail) = match result {
        Ok(d) => (true, d),
        Err(d) => (false, d),
    };
    if seconds > budget_seconds {
        passed = false;
    }
    CriterionOutcome {
        id,
        name: name.to_string(),
        passed,
        seconds,
        budget_seconds,
        detail,
    }
}

fn err_str<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn check_worst(worst: f64, tol: f64, context: &str) -> Result<String, String> {
    if worst <= tol {
        Ok(format!("max abs error {worst:.3e} within {tol:.0e} {context}"))
    } else {
        Err(format!("max abs error {worst:.3e} exceeds {tol:.0e} {context}"))
    }
}

/// Marginal exponents of Marchenko–Pastur laws match `(1/2) ln(λ − t)`.
pub fn criterion_01() -> CriterionOutcome {
    outcome(1, "marginal-closed-form", 2.0, || {
        let mut worst: f64 = 0.0;
        for &lambda in &[0.5, 1.0, 2.0, 5.0] {
            let mu = SpectralMeasure::mp(lambda).map_err(err_str)?;
            let r = lambda.min(1.0);
            for i in 1..=19 {
                let t = r * i as f64 / 20.0;
                let f = marginal_exponent(&mu, t).map_err(err_str)?;
                let closed = 0.5 * (lambda - t).ln();
                worst = worst.max((f - closed).abs());
            }
        }
        check_worst(worst, 1e-8, "over 4 laws x 19 points")
    })
}

fn mp_exponent_cdf_closed(lambda: f64, x: f64) -> f64 {
    let r = lambda.min(1.0);
    let t_star = (lambda - (2.0 * x).exp()).clamp(0.0, r);
    (r - t_star) + if x >= 0.0 { 1.0 - r } else { 0.0 }
}

/// Exponent distribution functions of Marchenko–Pastur laws match the
/// closed form obtained by inverting the marginal profile.
pub fn criterion_02() -> CriterionOutcome {
    outcome(2, "distribution-closed-form", 2.0, || {
        let mut worst: f64 = 0.0;
        let ranges: [(f64, f64, f64); 3] =
            [(2.0, -0.2, 0.45), (0.5, -1.2, 0.2), (1.0, -3.0, 0.1)];
        for &(lambda, lo, hi) in &ranges {
            let mu = SpectralMeasure::mp(lambda).map_err(err_str)?;
            for i in 0..100 {
                let x = lo + (hi - lo) * i as f64 / 99.0;
                let got = exponent_cdf(&mu, x).map_err(err_str)?;
                let closed = mp_exponent_cdf_closed(lambda, x);
                worst = worst.max((got - closed).abs());
            }
        }
        check_worst(worst, 1e-8, "over 3 laws x 100 points")
    })
}

/// The two determinant routes agree, and the λ = 2 value matches its
/// independently computed reference.
pub fn criterion_03() -> CriterionOutcome {
    outcome(3, "determinant-cross-method", 2.0, || {
        let mut worst: f64 = 0.0;
        let mut det2 = f64::NAN;
        for &lambda in &[1.5, 2.0, 4.0] {
            let mu = SpectralMeasure::mp(lambda).map_err(err_str)?;
            let by_def = fk_determinant(&mu, DetMethod::Definition).map_err(err_str)?;
            let by_int = fk_determinant(&mu, DetMethod::SIntegral).map_err(err_str)?;
            let rel = (by_def.det - by_int.det).abs() / by_def.det.abs();
            worst = worst.max(rel);
            if lambda == 2.0 {
                det2 = by_def.det;
            }
        }
        let reference = 1.213061319425267;
        let ref_rel = (det2 - reference).abs() / reference;
        worst = worst.max(ref_rel);
        check_worst(worst, 1e-6, "relative, 3 laws + pinned reference")
    })
}

/// Differentiating the integrated exponent recovers the log S-transform.
pub fn criterion_04() -> CriterionOutcome {
    outcome(4, "determinant-derivative", 1.0, || {
        let mu = SpectralMeasure::mp(2.0).map_err(err_str)?;
        let mut worst: f64 = 0.0;
        for &t in &[0.25, 0.5, 0.75] {
            let got = s_from_determinant(&mu, t, 1e-4).map_err(err_str)?;
            let closed = -(2.0 - t).ln();
            worst = worst.max((got - closed).abs());
        }
        check_worst(worst, 1e-6, "over 3 interior points")
    })
}

/// Exponents add over free products: the profile of MP(2)·MP(3) is the sum
/// of the factor profiles.
pub fn criterion_05() -> CriterionOutcome {
    outcome(5, "product-additivity", 2.0, || {
        let mu2 = SpectralMeasure::mp(2.0).map_err(err_str)?;
        let mu3 = SpectralMeasure::mp(3.0).map_err(err_str)?;
        let product = SProduct::of(&mu2, &mu3).map_err(err_str)?;
        let mut worst: f64 = 0.0;
        for i in 1..=19 {
            let t = i as f64 / 20.0;
            let f = product.marginal_exponent(t).map_err(err_str)?;
            let closed = 0.5 * ((2.0 - t) * (3.0 - t)).ln();
            worst = worst.max((f - closed).abs());
        }
        check_worst(worst, 1e-8, "over 19 points")
    })
}

/// The marginal profile is non-increasing on the invertible range and its
/// supremum is `(1/2) ln m1`.
pub fn criterion_06() -> CriterionOutcome {
    outcome(6, "monotone-largest", 1.0, || {
        let atoms = SpectralMeasure::from_atoms(
            &[(1.0, 0.3), (2.0, 0.4), (5.0, 0.3)],
            "three-atoms",
        )
        .map_err(err_str)?;
        let mp2 = SpectralMeasure::mp(2.0).map_err(err_str)?;
        let mut worst: f64 = 0.0;
        for mu in [&mp2, &atoms] {
            let mut prev = f64::INFINITY;
            for i in 1..=199 {
                let t = i as f64 / 200.0;
                let f = marginal_exponent(mu, t).map_err(err_str)?;
                if f > prev + 1e-12 {
                    return Err(format!(
                        "profile of {} increases at t = {t}: {f} > {prev}",
                        mu.label()
                    ));
                }
                prev = f;
            }
            let top = largest_exponent(mu).map_err(err_str)?;
            if !top.corollary_applies {
                return Err(format!("{} unexpectedly fails the kernel check", mu.label()));
            }
            let expected = 0.5 * mu.moment(1).ln();
            let near_zero = marginal_exponent(mu, 1e-6).map_err(err_str)?;
            worst = worst
                .max((top.value - expected).abs())
                .max((near_zero - expected).abs());
        }
        check_worst(worst, 1e-6, "supremum vs (1/2) ln m1, 2 measures")
    })
}

/// The growth-threshold equation solver matches both the closed form and
/// the exponent distribution for full-rank laws.
pub fn criterion_07() -> CriterionOutcome {
    outcome(7, "integral-equation", 2.0, || {
        let mut worst: f64 = 0.0;
        let cases: [(f64, f64, f64); 2] = [(1.0, 0.05, 0.95), (2.0, 1.02, 1.40)];
        for &(lambda, lo, hi) in &cases {
            let mu = SpectralMeasure::mp(lambda).map_err(err_str)?;
            for i in 0..50 {
                let x = lo + (hi - lo) * i as f64 / 49.0;
                let h = newman_solve(&mu, x).map_err(err_str)?;
                // S_mp(w) = 1/(λ + w), so 1/x² = S(H − 1) gives H = x² − λ + 1.
                let closed = x * x - lambda + 1.0;
                let cdf = exponent_cdf(&mu, x.ln()).map_err(err_str)?;
                worst = worst.max((h - closed).abs()).max((h - cdf).abs());
            }
        }
        check_worst(worst, 1e-6, "vs closed form and distribution, 100 points")
    })
}

/// Monte Carlo frame-volume growth matches the integrated exponent.
pub fn criterion_08() -> CriterionOutcome {
    outcome(8, "mc-growth", 60.0, || {
        let cfg = EnsembleConfig {
            schema_version: crate::rmt::SCHEMA_VERSION,
            label: "verify-growth".into(),
            n: 256,
            steps: 200,
            trials: 2,
            seed: VERIFY_SEED,
            singular_law: SingularLaw::Mp { lambda: 1.0 },
            mode: SampleMode::Quantile,
            t_list: vec![0.25, 0.5, 0.75],
            compress_t_list: vec![],
            gates: None,
        };
        let report = run_mc(&cfg).map_err(err_str)?;
        let mut worst: f64 = 0.0;
        for g in &report.growth_rates {
            let err = g
                .abs_error
                .ok_or_else(|| "missing analytic growth reference".to_string())?;
            worst = worst.max(err);
        }
        check_worst(worst, 0.02, "growth vs integrated exponent, 3 fractions")
    })
}

/// The empirical exponent spectrum of a long product converges to the
/// analytic distribution.
pub fn criterion_09() -> CriterionOutcome {
    outcome(9, "mc-spectrum", 300.0, || {
        let cfg = EnsembleConfig {
            schema_version: crate::rmt::SCHEMA_VERSION,
            label: "verify-spectrum".into(),
            n: 256,
            steps: 2000,
            trials: 4,
            seed: VERIFY_SEED,
            singular_law: SingularLaw::Mp { lambda: 1.0 },
            mode: SampleMode::Quantile,
            t_list: vec![],
            compress_t_list: vec![],
            gates: None,
        };
        let report = run_mc(&cfg).map_err(err_str)?;
        let ks = report
            .ks_distance
            .ok_or_else(|| "missing ks distance".to_string())?;
        let mid = report.empirical_exponents[cfg.n / 2];
        let mid_target = 0.5 * 0.5f64.ln();
        let mid_err = (mid - mid_target).abs();
        if ks <= 0.08 && mid_err <= 0.03 {
            Ok(format!("ks {ks:.4} <= 0.08, mid-exponent error {mid_err:.4} <= 0.03"))
        } else {
            Err(format!("ks {ks:.4} (cap 0.08), mid-exponent error {mid_err:.4} (cap 0.03)"))
        }
    })
}

/// Corners of a conjugated projection reproduce the analytic compression
/// of the law: spectrum shape and support edges.
pub fn criterion_10() -> CriterionOutcome {
    outcome(10, "mc-compression", 60.0, || {
        let cfg = EnsembleConfig {
            schema_version: crate::rmt::SCHEMA_VERSION,
            label: "verify-compression".into(),
            n: 512,
            steps: 0,
            trials: 8,
            seed: VERIFY_SEED,
            singular_law: SingularLaw::Mp { lambda: 2.0 },
            mode: SampleMode::Quantile,
            t_list: vec![],
            compress_t_list: vec![0.5],
            gates: None,
        };
        let report = run_mc(&cfg).map_err(err_str)?;
        let c = &report.compression[0];
        let ks = c.ks.ok_or_else(|| "missing compression ks".to_string())?;
        let lo_err = (c.support_min - 0.5).abs();
        let hi_err = (c.support_max - 4.5).abs();
        if ks <= 0.08 && lo_err <= 0.1 && hi_err <= 0.1 {
            Ok(format!(
                "ks {ks:.4} <= 0.08, support [{:.4}, {:.4}] near [0.5, 4.5]",
                c.support_min, c.support_max
            ))
        } else {
            Err(format!(
                "ks {ks:.4} (cap 0.08), support [{:.4}, {:.4}] vs [0.5, 4.5] within 0.1",
                c.support_min, c.support_max
            ))
        }
    })
}

/// Column blocks of a sampled factor have exactly the generic rank forced
/// by the kernel of the law.
pub fn criterion_11() -> CriterionOutcome {
    outcome(11, "mc-projection-rank", 5.0, || {
        let cfg = EnsembleConfig {
            schema_version: crate::rmt::SCHEMA_VERSION,
            label: "verify-rank".into(),
            n: 500,
            steps: 1,
            trials: 1,
            seed: VERIFY_SEED,
            singular_law: SingularLaw::Mp { lambda: 0.4 },
            mode: SampleMode::Quantile,
            t_list: vec![],
            compress_t_list: vec![],
            gates: None,
        };
        let rank = projected_rank(&cfg, 0.3).map_err(err_str)?;
        if rank == 150 {
            Ok("rank of 150-column block is exactly 150".into())
        } else {
            Err(format!("rank of 150-column block is {rank}, expected 150"))
        }
    })
}

type CriterionFn = fn() -> CriterionOutcome;

const CRITERIA: [(u32, CriterionFn); 11] = [
    (1, criterion_01),
    (2, criterion_02),
    (3, criterion_03),
    (4, criterion_04),
    (5, criterion_05),
    (6, criterion_06),
    (7, criterion_07),
    (8, criterion_08),
    (9, criterion_09),
    (10, criterion_10),
    (11, criterion_11),
];

/// Runs the selected criteria (all of them when `only` is `None`) in id
/// order.
pub fn run_all(only: Option<&[u32]>) -> Vec<CriterionOutcome> {
    CRITERIA
        .iter()
        .filter(|(id, _)| only.is_none_or(|sel| sel.contains(id)))
        .map(|(_, f)| f())
        .collect()
}
