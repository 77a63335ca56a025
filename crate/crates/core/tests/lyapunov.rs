//! Tests for the exponent layer: marginal and integrated profiles, the
//! exponent distribution, extended determinants, the derivative identity,
//! and the growth-threshold equation. Reference values come from closed
//! forms of the Marchenko–Pastur family, a slow quadrature oracle, and a
//! Simpson integration of the library's own marginal (for the
//! integral/derivative consistency of independent code paths).

mod support;

use freelyap::lyapunov::{
    default_x_grid, exponent_cdf, exponent_distribution, fk_determinant, integrated_exponent,
    largest_exponent, lyapunov_profile, marginal_exponent, newman_solve, s_from_determinant,
    DetMethod,
};
use freelyap::measure::{LogValue, SpectralMeasure};
use freelyap::Error;
use support::oracle;

#[test]
fn marginal_matches_closed_form_on_interior_grid() {
    for &lambda in &[0.5, 1.0, 2.0, 5.0] {
        let mu = SpectralMeasure::mp(lambda).unwrap();
        let r = lambda.min(1.0);
        for i in 1..40 {
            let t = r * i as f64 / 40.0;
            let got = marginal_exponent(&mu, t).unwrap();
            let want = oracle::mp_marginal_closed(lambda, t);
            assert!(
                (got - want).abs() < 1e-9,
                "marginal at t = {t} for lambda {lambda}: {got} vs {want}"
            );
        }
    }
}

#[test]
fn marginal_beyond_rank_is_zero_with_boundary_layer() {
    let mu = SpectralMeasure::mp(0.5).unwrap();
    for &t in &[0.51, 0.7, 0.99] {
        assert_eq!(marginal_exponent(&mu, t).unwrap(), 0.0, "tail at t = {t}");
    }
    // The layer is anchored at the numerically computed rank.
    let r = mu.rank_r();
    assert!(matches!(marginal_exponent(&mu, r), Err(Error::Boundary(_))));
    assert!(matches!(
        marginal_exponent(&mu, r - 1e-10),
        Err(Error::Boundary(_))
    ));
    assert!(marginal_exponent(&mu, 0.0).is_err());
    assert!(marginal_exponent(&mu, 1.0).is_err());
    assert!(marginal_exponent(&mu, -0.3).is_err());
}

#[test]
fn integrated_exponent_reference_values() {
    let cases: [(f64, f64, f64); 10] = [
        (1.0, 0.25, -0.017119222830582),
        (1.0, 0.5, -0.076713204860014),
        (1.0, 0.75, -0.201713204860014),
        (1.0, 1.0, -0.5),
        (2.0, 0.25, 0.078483366116450),
        (2.0, 0.5, 0.139048349478822),
        (2.0, 1.0, 0.193147180559945),
        (1.5, 1.0, -0.022614373778890),
        (4.0, 1.0, 0.624670289237617),
        (3.0, 0.25, 0.131967179444255),
    ];
    for &(lambda, t, want) in &cases {
        let mu = SpectralMeasure::mp(lambda).unwrap();
        let got = integrated_exponent(&mu, t).unwrap();
        // Evaluation exactly at the rank costs a few 1e-9 from the clipped
        // boundary sliver of the inner integral.
        let tol = if t >= 1.0 { 5e-9 } else { 2e-9 };
        assert!(
            (got - want).abs() < tol,
            "integrated at t = {t} for lambda {lambda}: {got} vs {want}"
        );
        let closed = oracle::mp_integrated_closed(lambda, t);
        assert!((got - closed).abs() < tol);
    }
    // Rank-deficient case with an exact closed value.
    let low = SpectralMeasure::mp(0.5).unwrap();
    let got = integrated_exponent(&low, 0.25).unwrap();
    assert!((got + 0.125).abs() < 2e-9, "got {got}");
}

#[test]
fn integrated_exponent_saturates_beyond_rank() {
    let mu = SpectralMeasure::mp(0.5).unwrap();
    let at_rank = integrated_exponent(&mu, 0.6).unwrap();
    let later = integrated_exponent(&mu, 0.9).unwrap();
    let at_one = integrated_exponent(&mu, 1.0).unwrap();
    assert!((at_rank - later).abs() < 1e-12);
    assert!((later - at_one).abs() < 1e-12);
    let inside = integrated_exponent(&mu, 0.4999).unwrap();
    assert!(
        (at_rank - inside).abs() < 2e-3,
        "saturation level continuous with the interior: {at_rank} vs {inside}"
    );
    assert!(at_rank <= inside + 1e-12, "integral cannot grow past the rank");
}

#[test]
fn integrated_equals_simpson_of_marginal() {
    // Independent consistency: integrate the marginal profile numerically
    // and compare with the analytic integral. The sliver [0, eps] is
    // replaced by its first-order value eps * (1/2) ln m1.
    let atoms =
        SpectralMeasure::from_atoms(&[(1.0, 0.3), (2.0, 0.4), (5.0, 0.3)], "three").unwrap();
    let mp2 = SpectralMeasure::mp(2.0).unwrap();
    for mu in [&atoms, &mp2] {
        let eps = 1e-6;
        let upper = 0.9;
        let quad = oracle::simpson(
            |t| marginal_exponent(mu, t).unwrap(),
            eps,
            upper,
            1 << 12,
        );
        let head = eps * 0.5 * mu.moment(1).ln();
        let want = integrated_exponent(mu, upper).unwrap();
        let got = quad + head;
        assert!(
            (got - want).abs() < 1e-7,
            "integral consistency for {}: {got} vs {want}",
            mu.label()
        );
    }
}

#[test]
fn profile_grid_is_consistent_with_pointwise_evaluations() {
    let mu = SpectralMeasure::mp(2.0).unwrap();
    let profile = lyapunov_profile(&mu, 19).unwrap();
    assert_eq!(profile.t_grid.len(), 19);
    assert_eq!(profile.f_values.len(), 19);
    assert_eq!(profile.big_f_values.len(), 19);
    assert!((profile.rank_r - 1.0).abs() < 1e-11);
    for (i, &t) in profile.t_grid.iter().enumerate() {
        assert!(t > 0.0 && t < 1.0);
        let f = marginal_exponent(&mu, t).unwrap();
        let big = integrated_exponent(&mu, t).unwrap();
        assert!((profile.f_values[i] - f).abs() < 1e-12);
        assert!((profile.big_f_values[i] - big).abs() < 1e-12);
    }
    // Serialized field names follow the on-disk convention.
    let json = serde_json::to_value(&profile).unwrap();
    assert!(json.get("F_values").is_some());
    assert!(json.get("f_values").is_some());
}

#[test]
fn exponent_cdf_matches_closed_form() {
    for &lambda in &[0.5, 1.0, 2.0] {
        let mu = SpectralMeasure::mp(lambda).unwrap();
        for i in 0..60 {
            let x = -2.5 + 3.0 * i as f64 / 59.0;
            let got = exponent_cdf(&mu, x).unwrap();
            let want = oracle::mp_exponent_cdf_closed(lambda, x);
            assert!(
                (got - want).abs() < 1e-8,
                "distribution at x = {x} for lambda {lambda}: {got} vs {want}"
            );
        }
    }
}

#[test]
fn exponent_distribution_document_is_monotone_and_matches_cdf() {
    let mu = SpectralMeasure::mp(2.0).unwrap();
    let grid = default_x_grid(&mu, 41).unwrap();
    assert_eq!(grid.len(), 41);
    assert!(grid.windows(2).all(|w| w[1] > w[0]));
    let dist = exponent_distribution(&mu, Some(&grid)).unwrap();
    assert_eq!(dist.x_grid, grid);
    let mut prev = -1.0;
    for (i, &x) in grid.iter().enumerate() {
        let direct = exponent_cdf(&mu, x).unwrap();
        assert!((dist.cdf[i] - direct).abs() < 1e-12);
        assert!(dist.cdf[i] + 1e-12 >= prev, "monotone at {x}");
        prev = dist.cdf[i];
    }
    assert!(dist.cdf[0] < 0.02);
    assert!(dist.cdf[40] > 0.98);

    let default_run = exponent_distribution(&mu, None).unwrap();
    assert!(!default_run.x_grid.is_empty());
    assert_eq!(default_run.x_grid.len(), default_run.cdf.len());
}

#[test]
fn largest_exponent_value_and_kernel_flag() {
    let mu = SpectralMeasure::mp(2.0).unwrap();
    let top = largest_exponent(&mu).unwrap();
    assert!((top.value - 0.346573590279973).abs() < 1e-10);
    assert!(top.corollary_applies);
    let near = marginal_exponent(&mu, 1e-6).unwrap();
    assert!((near - top.value).abs() < 1e-6);

    let low = largest_exponent(&SpectralMeasure::mp(0.5).unwrap()).unwrap();
    assert!((low.value - 0.5 * 0.5f64.ln()).abs() < 1e-10);
    assert!(!low.corollary_applies, "kernel atom breaks the hypothesis");

    let atoms =
        SpectralMeasure::from_atoms(&[(1.0, 0.3), (2.0, 0.4), (5.0, 0.3)], "three").unwrap();
    let top = largest_exponent(&atoms).unwrap();
    assert!((top.value - 0.477755722513718).abs() < 1e-12);
}

#[test]
fn determinant_definition_route_reference_values() {
    let cases = [
        (1.5, 0.977639414484439),
        (2.0, 1.213061319425267),
        (4.0, 1.867630078169868),
    ];
    for &(lambda, want) in &cases {
        let mu = SpectralMeasure::mp(lambda).unwrap();
        let result = fk_determinant(&mu, DetMethod::Definition).unwrap();
        assert!(
            (result.det - want).abs() < 1e-8 * want,
            "determinant for lambda {lambda}: {} vs {want}",
            result.det
        );
        let log = result.log_det.finite().unwrap();
        assert!((log.exp() - result.det).abs() < 1e-13 * want);
        assert!(result.achieved_error < 1e-8);
    }
    // The shape-1 law gives exactly exp(-1/2).
    let mu1 = SpectralMeasure::mp(1.0).unwrap();
    let d1 = fk_determinant(&mu1, DetMethod::Definition).unwrap();
    assert!((d1.det - (-0.5f64).exp()).abs() < 1e-9);
}

#[test]
fn determinant_routes_agree_for_invertible_laws() {
    for &lambda in &[1.5, 2.0, 3.0, 4.0] {
        let mu = SpectralMeasure::mp(lambda).unwrap();
        let a = fk_determinant(&mu, DetMethod::Definition).unwrap();
        let b = fk_determinant(&mu, DetMethod::SIntegral).unwrap();
        let rel = (a.det - b.det).abs() / a.det;
        assert!(rel < 1e-7, "route disagreement for lambda {lambda}: {rel}");
    }
    let atoms =
        SpectralMeasure::from_atoms(&[(1.0, 0.3), (2.0, 0.4), (5.0, 0.3)], "three").unwrap();
    let a = fk_determinant(&atoms, DetMethod::Definition).unwrap();
    let b = fk_determinant(&atoms, DetMethod::SIntegral).unwrap();
    assert!((a.det - b.det).abs() / a.det < 1e-7);
    // Exact closed value for the atomic measure.
    let want = (0.5 * (0.4 * 2.0f64.ln() + 0.3 * 5.0f64.ln())).exp();
    assert!((a.det - want).abs() < 1e-12 * want);
}

#[test]
fn determinant_edge_conventions() {
    // The kernel atom is excluded from the definition route: the value is
    // the continuous-part integral, not zero.
    let low = SpectralMeasure::mp(0.5).unwrap();
    let d = fk_determinant(&low, DetMethod::Definition).unwrap();
    let want = (0.5 * oracle::mp_log_integral_quad(0.5)).exp();
    assert!((d.det - want).abs() < 1e-7, "{} vs {want}", d.det);
    // The integral route requires invertibility.
    assert!(matches!(
        fk_determinant(&low, DetMethod::SIntegral),
        Err(Error::Precondition(_))
    ));
    // The pure kernel measure has determinant one by the extended
    // convention (empty product over the positive spectrum).
    let zero = SpectralMeasure::point_mass(0.0).unwrap();
    let d = fk_determinant(&zero, DetMethod::Definition).unwrap();
    assert_eq!(d.det, 1.0);
    assert_eq!(d.log_det.finite(), Some(0.0));
}

#[test]
fn derivative_of_integral_recovers_log_s() {
    let mu = SpectralMeasure::mp(2.0).unwrap();
    for &t in &[0.25, 0.5, 0.75] {
        let got = s_from_determinant(&mu, t, 1e-4).unwrap();
        let want = -(2.0 - t).ln();
        assert!(
            (got - want).abs() < 1e-6,
            "derivative identity at t = {t}: {got} vs {want}"
        );
    }
    assert!(s_from_determinant(&mu, 0.5, 0.0).is_err());
    assert!(s_from_determinant(&mu, 0.5, 0.5).is_err());
}

#[test]
fn newman_equation_closed_forms() {
    let mu1 = SpectralMeasure::mp(1.0).unwrap();
    for i in 1..=9 {
        let x = i as f64 / 10.0;
        let h = newman_solve(&mu1, x).unwrap();
        assert!(
            (h - x * x).abs() < 1e-6,
            "shape-1 solution at x = {x}: {h} vs {}",
            x * x
        );
    }
    let mu2 = SpectralMeasure::mp(2.0).unwrap();
    for &x in &[1.05, 1.2, 1.35] {
        let h = newman_solve(&mu2, x).unwrap();
        let want = x * x - 1.0;
        assert!(
            (h - want).abs() < 1e-6,
            "shape-2 solution at x = {x}: {h} vs {want}"
        );
        let quad = oracle::newman_solve_quad(2.0, x);
        assert!((h - quad).abs() < 1e-5, "oracle agreement at x = {x}");
    }
}

#[test]
fn newman_equation_saturates_outside_the_growth_range() {
    let mu2 = SpectralMeasure::mp(2.0).unwrap();
    // Growth factors range over [1, sqrt(2)] for the shape-2 law.
    assert_eq!(newman_solve(&mu2, 0.5).unwrap(), 0.0);
    assert_eq!(newman_solve(&mu2, 0.9).unwrap(), 0.0);
    assert_eq!(newman_solve(&mu2, 2.0).unwrap(), 1.0);
    assert!(newman_solve(&mu2, 0.0).is_err());
    assert!(newman_solve(&mu2, -1.0).is_err());

    // A point mass concentrates all growth at one factor; the equation
    // degenerates there and resolves to full mass.
    let delta = SpectralMeasure::point_mass(4.0).unwrap();
    assert_eq!(newman_solve(&delta, 2.0).unwrap(), 1.0);
    assert_eq!(newman_solve(&delta, 1.0).unwrap(), 0.0);
    assert_eq!(newman_solve(&delta, 3.0).unwrap(), 1.0);
}

#[test]
fn log_value_accessor() {
    assert_eq!(LogValue::Finite(2.0).finite(), Some(2.0));
    assert_eq!(LogValue::MinusInfinity.finite(), None);
}
