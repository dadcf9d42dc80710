use std::f64::consts::PI;

use proptest::prelude::*;
use shearlet_core::specfun::*;

const EULER: f64 = 0.577_215_664_901_532_9;

#[test]
fn gamma_examples() {
    assert_eq!(gamma(1.0).unwrap(), 1.0);
    assert_eq!(gamma(5.0).unwrap(), 24.0);
    assert!((gamma(0.5).unwrap() - 1.772_453_850_905_516).abs() < 1e-15);
    // Reference values from a 50-digit evaluation.
    for (x, v) in [(0.25, 3.625_609_908_221_908), (0.75, 1.225_416_702_465_177_6), (3.7, 4.170_651_783_796_603), (0.1, 9.513_507_698_668_732)] {
        assert!((gamma(x).unwrap() - v).abs() <= 1e-12 * v, "gamma({x})");
    }
    assert!(gamma(0.0).is_err());
    assert!(gamma(-2.0).is_err());
    assert!(gamma(f64::NAN).is_err());
}

#[test]
fn digamma_examples() {
    assert!((digamma(1.0).unwrap() + EULER).abs() < 1e-10);
    assert!((digamma(0.5).unwrap() + 1.963_510_026_021_423_5).abs() < 1e-10);
    assert!((digamma(2.0).unwrap() - 0.422_784_335_098_467_1).abs() < 1e-10);
    for (x, v) in [
        (0.25, -4.227_453_533_376_265),
        (0.75, -1.085_860_879_786_472_2),
        (1.5, 0.036_489_973_978_576_52),
        (3.7, 1.167_153_539_361_511_4),
        (10.0, 2.251_752_589_066_721),
    ] {
        assert!((digamma(x).unwrap() - v).abs() < 1e-10, "digamma({x})");
    }
    assert!(digamma(0.0).is_err());
}

#[test]
fn pitt_examples() {
    assert_eq!(pitt_constant(0.0, 2).unwrap(), 1.0);
    assert_eq!(pitt_constant(0.0, 7).unwrap(), 1.0);
    assert!((pitt_constant(0.5, 2).unwrap() - 4.839_705_716_423_275).abs() < 1e-12);
    assert!((pitt_constant(0.25, 3).unwrap() - 1.748_072_992_741_069_3).abs() < 1e-12);
    assert!((pitt_constant(0.25, 2).unwrap() - 2.181_088_012_037_923).abs() < 1e-12);
    assert!((pitt_constant(0.75, 2).unwrap() - 11.153_618_222_519_275).abs() < 1e-11);
    assert!(pitt_constant(1.0, 2).is_err());
    assert!(pitt_constant(-1e-9, 2).is_err());
    assert!(pitt_constant(0.5, 1).is_err());
}

#[test]
fn derivative_examples() {
    assert!((pitt_derivative_at_zero(2).unwrap() - (PI.ln() + 1.963_510_026_021_423_5)).abs() < 1e-10);
    assert!((pitt_derivative_at_zero(4).unwrap() - (PI.ln() + EULER)).abs() < 1e-10);
}

#[test]
fn derivative_matches_central_difference() {
    let h = 1e-5;
    for n in 2..=4 {
        let fd = (pitt_constant_unchecked(h, n).unwrap() - pitt_constant_unchecked(-h, n).unwrap()) / (2.0 * h);
        let d = pitt_derivative_at_zero(n).unwrap();
        // C_λ grows with λ: the slope at zero is +(ln π − ψ(n/4)).
        assert!((fd - d).abs() < 1e-6, "n={n}: fd={fd} closed={d}");
        assert!(d > 0.0);
    }
}

#[test]
fn pitt_is_increasing_in_lambda() {
    for n in 2..=4 {
        let vals: Vec<f64> = (0..50).map(|i| pitt_constant(i as f64 / 50.0, n).unwrap()).collect();
        assert!(vals.windows(2).all(|w| w[1] > w[0]), "n={n}");
    }
}

#[test]
fn constants_examples() {
    let c = uncertainty_constants(2).unwrap();
    assert!((c.beckner - (-1.963_510_026_021_423_5 - PI.ln())).abs() < 1e-10);
    assert!((c.sobolev + EULER).abs() < 1e-10);
    assert_eq!(c.heisenberg_stated, Some(0.079_577_471_545_947_67));
    assert_eq!(c.heisenberg_digamma, c.beckner.exp());
    assert!((c.heisenberg_digamma - (-EULER).exp() / (4.0 * PI)).abs() < 1e-12);
    let c3 = uncertainty_constants(3).unwrap();
    assert!((c3.beckner + 2.230_590_765_635_872).abs() < 1e-10);
    assert!((c3.sobolev - 0.036_489_973_978_576).abs() < 1e-10);
    assert!((c3.heisenberg_digamma - 0.107_464_924_794_625).abs() < 1e-10);
    assert_eq!(c3.heisenberg_stated, None);
    let c4 = uncertainty_constants(4).unwrap();
    assert!((c4.beckner + 1.721_945_550_750_933).abs() < 1e-10);
    for n in 2..=8 {
        assert!(uncertainty_constants(n).unwrap().beckner < 0.0, "n={n}");
    }
    assert!(uncertainty_constants(1).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn gamma_recurrence(x in 0.1f64..10.0) {
        let l = gamma(x + 1.0).unwrap();
        let r = x * gamma(x).unwrap();
        prop_assert!((l - r).abs() <= 1e-12 * l);
    }

    #[test]
    fn digamma_recurrence(x in 0.1f64..10.0) {
        let l = digamma(x + 1.0).unwrap();
        let r = digamma(x).unwrap() + 1.0 / x;
        prop_assert!((l - r).abs() <= 1e-10);
    }

    #[test]
    fn ln_gamma_consistent(x in 0.1f64..100.0) {
        let l = ln_gamma(x).unwrap();
        prop_assert!((l - gamma(x).unwrap().ln()).abs() <= 1e-11 * (1.0 + l.abs()));
    }
}
