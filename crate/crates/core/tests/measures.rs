//! Structural and quadrature tests for spectral measures: edges, masses,
//! moments, densities, distribution functions, quantiles, and logarithmic
//! integrals, checked against an independent slow-but-simple quadrature
//! oracle and against frozen reference values.

mod support;

use freelyap::measure::{LogValue, SpectralMeasure, DEFAULT_LOG_CUTOFFS};
use support::oracle;

const EDGE_CASES: [(f64, f64, f64); 5] = [
    (0.5, 0.085786437626905, 2.914213562373095),
    (1.5, 0.050510257216822, 4.949489742783178),
    (2.0, 0.17157287525381, 5.82842712474619),
    (3.0, 0.535898384862245, 7.464101615137754),
    (5.0, 1.527864045000421, 10.47213595499958),
];

#[test]
fn mp_edges_match_reference_values() {
    for &(lambda, a, b) in &EDGE_CASES {
        let (ga, gb) = freelyap::measure::mp_edges(lambda).unwrap();
        assert!((ga - a).abs() < 1e-12, "lower edge for lambda {lambda}");
        assert!((gb - b).abs() < 1e-12, "upper edge for lambda {lambda}");
        let (oa, ob) = oracle::mp_edges(lambda);
        assert!((ga - oa).abs() < 1e-12 && (gb - ob).abs() < 1e-12);
    }
}

#[test]
fn mp_mass_splits_between_atom_and_bulk() {
    for &lambda in &[0.25, 0.5, 0.9, 1.0, 1.5, 3.0] {
        let mu = SpectralMeasure::mp(lambda).unwrap();
        assert!((mu.total_mass() - 1.0).abs() < 1e-11, "lambda {lambda}");
        let expected_zero = (1.0 - lambda).max(0.0);
        assert!(
            (mu.zero_mass() - expected_zero).abs() < 1e-11,
            "kernel mass for lambda {lambda}"
        );
        assert!((mu.rank_r() - lambda.min(1.0)).abs() < 1e-11);
    }
}

#[test]
fn mp_moments_match_oracle_and_closed_forms() {
    for &lambda in &[0.5, 1.0, 2.0, 5.0] {
        let mu = SpectralMeasure::mp(lambda).unwrap();
        let m1 = mu.moment(1);
        let m2 = mu.moment(2);
        assert!((m1 - lambda).abs() < 1e-9, "first moment for lambda {lambda}");
        assert!(
            (m2 - (lambda * lambda + lambda)).abs() < 1e-8,
            "second moment for lambda {lambda}: {m2}"
        );
        let o1 = oracle::mp_integral(lambda, |x| x, 1 << 16);
        assert!((m1 - o1).abs() < 1e-7);
    }
}

#[test]
fn mp_density_matches_oracle_pointwise() {
    for &lambda in &[0.5, 2.0] {
        let mu = SpectralMeasure::mp(lambda).unwrap();
        let (a, b) = oracle::mp_edges(lambda);
        for i in 1..20 {
            let x = a + (b - a) * i as f64 / 20.0;
            let got = mu.density_at(x);
            let want = oracle::mp_density(lambda, x);
            assert!(
                (got - want).abs() < 1e-10 * (1.0 + want),
                "density at {x} for lambda {lambda}: {got} vs {want}"
            );
        }
        assert_eq!(mu.density_at(a - 0.01), 0.0);
        assert_eq!(mu.density_at(b + 0.01), 0.0);
    }
}

#[test]
fn mp_cdf_matches_oracle() {
    for &lambda in &[0.5, 1.0, 2.0] {
        let mu = SpectralMeasure::mp(lambda).unwrap();
        let (a, b) = oracle::mp_edges(lambda);
        for i in 0..=10 {
            let x = a + (b - a) * i as f64 / 10.0;
            let got = mu.cdf(x);
            let want = oracle::mp_cdf_quad(lambda, x);
            assert!(
                (got - want).abs() < 1e-8,
                "cdf at {x} for lambda {lambda}: {got} vs {want}"
            );
        }
        assert!((mu.cdf(b + 1.0) - 1.0).abs() < 1e-11);
    }
}

#[test]
fn quantile_inverts_cdf() {
    let mu = SpectralMeasure::mp(2.0).unwrap();
    for i in 1..40 {
        let p = i as f64 / 40.0;
        let x = mu.quantile(p).unwrap();
        assert!((mu.cdf(x) - p).abs() < 1e-9, "level {p}");
    }
    // Levels inside the kernel atom resolve to exactly zero.
    let low_rank = SpectralMeasure::mp(0.4).unwrap();
    for &p in &[0.1, 0.3, 0.59] {
        assert_eq!(low_rank.quantile(p).unwrap(), 0.0);
    }
    assert!(low_rank.quantile(0.8).unwrap() > 0.0);
    assert!(mu.quantile(0.0).is_err());
    assert!(mu.quantile(1.0).is_err());
}

#[test]
fn log_integral_reference_values() {
    // The square-root bulk at shape 1 integrates ln x to exactly -1.
    let mp1 = SpectralMeasure::mp(1.0).unwrap();
    match mp1.log_integral(&DEFAULT_LOG_CUTOFFS).unwrap() {
        LogValue::Finite(v) => assert!((v + 1.0).abs() < 1e-10, "got {v}"),
        LogValue::MinusInfinity => panic!("unexpected divergence"),
    }
    let cases = [
        (1.5, -0.045228747557781),
        (2.0, 0.386294361119891),
        (4.0, 1.249340578475233),
    ];
    for &(lambda, want) in &cases {
        let mu = SpectralMeasure::mp(lambda).unwrap();
        let got = mu
            .log_integral(&DEFAULT_LOG_CUTOFFS)
            .unwrap()
            .finite()
            .unwrap();
        assert!(
            (got - want).abs() < 1e-9,
            "log integral for lambda {lambda}: {got} vs {want}"
        );
        let closed = oracle::mp_log_integral_closed(lambda);
        assert!((got - closed).abs() < 1e-9);
    }
    // Rank-deficient law: the kernel atom is not part of the continuous
    // integral, which converges on the strictly positive bulk.
    let low = SpectralMeasure::mp(0.5).unwrap();
    let got = low
        .log_integral(&DEFAULT_LOG_CUTOFFS)
        .unwrap()
        .finite()
        .unwrap();
    let want = oracle::mp_log_integral_quad(0.5);
    assert!((got - want).abs() < 1e-8, "{got} vs {want}");
}

#[test]
fn atom_measures_integrate_exactly() {
    let mu = SpectralMeasure::from_atoms(&[(1.0, 0.3), (2.0, 0.4), (5.0, 0.3)], "three").unwrap();
    assert!((mu.total_mass() - 1.0).abs() < 1e-15);
    assert!((mu.moment(1) - 2.6).abs() < 1e-15);
    assert_eq!(mu.cdf(0.5), 0.0);
    assert!((mu.cdf(1.0) - 0.3).abs() < 1e-15);
    assert!((mu.cdf(3.0) - 0.7).abs() < 1e-15);
    assert!((mu.cdf(5.0) - 1.0).abs() < 1e-15);
    assert_eq!(mu.quantile(0.2).unwrap(), 1.0);
    assert_eq!(mu.quantile(0.5).unwrap(), 2.0);
    assert_eq!(mu.quantile(0.9).unwrap(), 5.0);
    let want = 0.4 * 2.0f64.ln() + 0.3 * 5.0f64.ln();
    let got = mu
        .log_integral(&DEFAULT_LOG_CUTOFFS)
        .unwrap()
        .finite()
        .unwrap();
    assert!((got - want).abs() < 1e-12);
}

#[test]
fn point_mass_basics() {
    let mu = SpectralMeasure::point_mass(3.0).unwrap();
    assert!((mu.moment(1) - 3.0).abs() < 1e-15);
    assert!((mu.moment(2) - 9.0).abs() < 1e-15);
    assert!(mu.is_invertible());
    assert_eq!(mu.sup_support(), 3.0);
    assert_eq!(mu.inf_support(), 3.0);
    let got = mu
        .log_integral(&DEFAULT_LOG_CUTOFFS)
        .unwrap()
        .finite()
        .unwrap();
    assert!((got - 3.0f64.ln()).abs() < 1e-15);
}

#[test]
fn compressed_at_full_fraction_equals_plain_law() {
    for &lambda in &[0.5, 1.0, 2.0] {
        let plain = SpectralMeasure::mp(lambda).unwrap();
        let full = SpectralMeasure::compressed_mp(1.0, lambda).unwrap();
        assert_eq!(
            freelyap::io::measure_to_json(&plain).replace(&format!("mp({lambda})"), "L"),
            freelyap::io::measure_to_json(&full).replace(full.label(), "L"),
            "lambda {lambda}"
        );
    }
}

#[test]
fn compressed_mp_structure_and_cdf() {
    let t = 0.5;
    let lambda = 2.0;
    let mu = SpectralMeasure::compressed_mp(t, lambda).unwrap();
    // Edges of the compressed bulk are exact for these parameters; the
    // support infimum itself is 0 because of the kernel atom.
    assert!((mu.segments()[0].a - 0.5).abs() < 1e-12);
    assert!((mu.segments()[0].b - 4.5).abs() < 1e-12);
    assert_eq!(mu.inf_support(), 0.0);
    assert!((mu.total_mass() - 1.0).abs() < 1e-11);
    // Atom at zero carries max(1 - lambda, 1 - t).
    assert!((mu.zero_mass() - 0.5).abs() < 1e-11);
    for i in 0..=8 {
        let x = 0.5 + 4.0 * i as f64 / 8.0;
        let got = mu.cdf(x);
        let want = oracle::cmp_cdf_quad(t, lambda, x);
        assert!(
            (got - want).abs() < 1e-8,
            "compressed cdf at {x}: {got} vs {want}"
        );
    }

    // When the fraction exceeds the rank, the kernel mass comes from the law.
    let wide = SpectralMeasure::compressed_mp(0.9, 0.4).unwrap();
    assert!((wide.zero_mass() - 0.6).abs() < 1e-11);
    let (oa, ob) = oracle::cmp_edges(0.9, 0.4);
    assert!((wide.segments()[0].a - oa).abs() < 1e-10);
    assert!((wide.segments()[0].b - ob).abs() < 1e-10);
}

#[test]
fn segment_round_trip_preserves_integrals() {
    let mu = SpectralMeasure::mp(1.5).unwrap();
    let text = freelyap::io::measure_to_json(&mu);
    let back = freelyap::io::measure_from_json(&text).unwrap();
    for i in 1..10 {
        let x = 0.5 * i as f64;
        assert!((mu.cdf(x) - back.cdf(x)).abs() < 1e-13);
    }
    assert!((mu.moment(1) - back.moment(1)).abs() < 1e-13);
}

#[test]
fn log_value_serialization_shape() {
    let finite = serde_json::to_value(LogValue::Finite(1.5)).unwrap();
    assert_eq!(finite["kind"], "finite");
    assert_eq!(finite["value"], 1.5);
    let inf = serde_json::to_value(LogValue::MinusInfinity).unwrap();
    assert_eq!(inf["kind"], "minus_infinity");
}
