use std::f64::consts::PI;

use painleve::asymptotics::{expected_constant, growth_exponent, richardson_with_offset};
use painleve::eigensolver::DEFAULT_TOL;
use painleve::*;
use proptest::prelude::*;

fn wkb(g: f64, epsilon: f64, n: usize) -> f64 {
    wkb_energy(WkbSpec::new(g, epsilon).unwrap(), n).unwrap()
}

fn gamma(x: f64) -> f64 {
    gamma_fn(x).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn cubic_oscillator_levels() {
    for n in 1..=10 {
        let direct = 2.0 * ((3.0 * PI).sqrt() * gamma(11.0 / 6.0) * n as f64 / gamma(1.0 / 3.0)).powf(1.2);
        assert!(rel(wkb(2.0, 1.0, n), direct) < 1e-13, "n = {n}");
    }
}

#[test]
fn quartic_oscillator_levels() {
    for n in 1..=10 {
        let inverted = 0.5 * (3.0 * n as f64 * (2.0 * PI).sqrt() * gamma(0.75) / gamma(0.25)).powf(4.0 / 3.0);
        assert!(rel(wkb(0.5, 2.0, n), inverted) < 1e-13, "n = {n}");
        let hermitian = (3.0 * n as f64 * PI.sqrt() * gamma(0.75) / gamma(0.25)).powf(4.0 / 3.0);
        let e = hermitian_quartic_energy::<f64>(n).unwrap();
        assert!(rel(e, hermitian) < 1e-13);
        assert!(rel(e / wkb(0.5, 2.0, n), 2f64.cbrt()) < 1e-13);
        assert!(rel(hermitian_quartic_energy::<f64>(2 * n).unwrap() / e, 2f64.powf(4.0 / 3.0)) < 1e-13);
    }
    assert!(hermitian_quartic_energy::<f64>(0).is_err());
}

#[test]
fn constants_are_the_large_n_limits_of_the_energies() {
    let c = closed_form_constants::<f64>();
    for n in 1..=40 {
        let x = n as f64;
        let cubic = wkb(2.0, 1.0, n);
        let inverted = wkb(0.5, 2.0, n);
        let hermitian = hermitian_quartic_energy::<f64>(n).unwrap();
        assert!(rel((2.0 * cubic).sqrt() / x.powf(0.6), c.B_I) < 1e-12);
        assert!(rel(-(cubic / 2.0).cbrt() / x.powf(0.4), c.C_I) < 1e-12);
        assert!(rel((2.0 * inverted).sqrt() / x.powf(2.0 / 3.0), c.B_II) < 1e-12);
        assert!(rel(hermitian.powf(0.25) / x.cbrt(), c.C_II) < 1e-12);
    }
}

#[test]
fn closed_form_values() {
    let c = closed_form_constants::<f64>();
    assert_eq!(format!("{:.8}", c.B_I), "2.09214674");
    assert_eq!(format!("{:.7}", c.C_I), "-1.0304844");
    assert_eq!(format!("{:.7}", c.B_II), "1.8624128");
    assert_eq!(format!("{:.8}", c.C_II), "1.21581166");
    assert!((c.C_II - 1.21581165).abs() < 1e-8);
    assert!((gamma(1.0 / 3.0) - 2.678938534708).abs() < 1e-12);
}

/// Polynomial extrapolation to `1/n = 0` through the last `k + 1` points.
fn neville(seq: &[f64], k: usize) -> f64 {
    let n0 = seq.len() - k;
    let xs: Vec<f64> = (0..=k).map(|j| 1.0 / (n0 + j) as f64).collect();
    let mut p: Vec<f64> = seq[n0 - 1..].to_vec();
    for m in 1..=k {
        for i in 0..=k - m {
            p[i] = (xs[i + m] * p[i] - xs[i] * p[i + 1]) / (xs[i + m] - xs[i]);
        }
    }
    p[0]
}

proptest! {
    #[test]
    fn richardson_is_polynomial_extrapolation_in_one_over_n(
        seq in prop::collection::vec(-10.0f64..10.0, 6..14),
        k in 1usize..5,
    ) {
        let r = richardson(&seq, k).unwrap();
        let oracle = neville(&seq, k);
        let scale = seq.iter().map(|s| s.abs()).fold(1.0, f64::max) * (2.0 * seq.len() as f64).powi(k as i32);
        prop_assert!((r.estimate - oracle).abs() <= 1e-11 * scale, "{} vs {oracle}", r.estimate);
        prop_assert!(r.stability >= 0.0);
    }
}

#[test]
fn richardson_examples() {
    assert_eq!(richardson(&[7.0; 9], 4).unwrap().estimate, 7.0);
    let s: Vec<f64> = (1..=12).map(|n| 2.0 + 3.0 / n as f64 + 5.0 / (n * n) as f64).collect();
    assert!((richardson(&s, 2).unwrap().estimate - 2.0).abs() < 1e-13);
    assert!(richardson(&s, 12).is_err());
    assert!(richardson_with_offset(&s, 2, 0.0).unwrap() == richardson(&s, 2).unwrap());
}

fn records(eq: Equation, kind: SearchKind, n: usize) -> Vec<EigenvalueRecord64> {
    let t = eigen_table(&EigenProblem::new(eq, kind).unwrap(), n, DEFAULT_TOL);
    assert!(t.is_complete(), "{:?}", t.failure);
    t.records
}

fn extract(eq: Equation, kind: SearchKind, records: &[EigenvalueRecord64], k: usize) -> ConstantEstimate<f64> {
    extract_constant(records, growth_exponent(eq, kind).unwrap(), k).unwrap()
}

#[test]
fn painleve_i_constants_from_eigenvalues() {
    let slope = records(Equation::PainleveI, SearchKind::SlopeEigen, 11);
    let e = extract(Equation::PainleveI, SearchKind::SlopeEigen, &slope, 5);
    assert!((e.combined.estimate - 2.0921467).abs() < 5e-7, "{}", e.combined.estimate);
    assert!(e.even.is_none());

    let value = records(Equation::PainleveI, SearchKind::ValueEigen, 15);
    let e = extract(Equation::PainleveI, SearchKind::ValueEigen, &value, 4);
    assert!((e.combined.estimate - -1.0304844).abs() < 1e-6, "{}", e.combined.estimate);

    // one record fewer moves the estimate by no more than the reported spread
    let shorter = extract(Equation::PainleveI, SearchKind::ValueEigen, &value[..14], 4);
    let drift = (shorter.combined.estimate - e.combined.estimate).abs();
    assert!(drift <= shorter.combined.stability.max(e.combined.stability), "{drift:e}");
}

#[test]
fn painleve_ii_constants_from_eigenvalues() {
    let c = closed_form_constants::<f64>();
    let value = records(Equation::PainleveII, SearchKind::ValueEigen, 14);
    let e = extract(Equation::PainleveII, SearchKind::ValueEigen, &value, 4);
    assert!((e.combined.estimate - 1.2158116).abs() < 1e-5, "{}", e.combined.estimate);

    let slope = records(Equation::PainleveII, SearchKind::SlopeEigen, 13);
    let e = extract(Equation::PainleveII, SearchKind::SlopeEigen, &slope, 3);
    let (even, odd) = (e.even.unwrap(), e.odd.unwrap());
    assert!((even.estimate - c.B_II).abs() < 1e-4, "{}", even.estimate);
    assert!((odd.estimate - c.B_II).abs() < 1e-4, "{}", odd.estimate);
    assert_eq!(e.combined.estimate, (even.estimate + odd.estimate) / 2.0);
}

#[test]
fn extraction_rejects_gapped_tables() {
    let mut slope = records(Equation::PainleveI, SearchKind::SlopeEigen, 6);
    slope.remove(2);
    assert!(extract_constant(&slope, 0.6, 3).is_err());
    assert!(extract_constant::<f64>(&[], 0.6, 3).is_err());
}

#[test]
fn toy_constant() {
    assert_eq!(expected_constant::<f64>(Equation::ToyModel, SearchKind::ToyEigen).unwrap(), 2f64.powf(5.0 / 6.0));
    assert_eq!(growth_exponent::<f64>(Equation::ToyModel, SearchKind::ToyEigen).unwrap(), 0.5);
}
