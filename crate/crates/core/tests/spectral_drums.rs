use std::f64::consts::PI;

use fzeta::model::FractalString;
use fzeta::oracles::{rectangle_double_sum, spray_enumeration};
use fzeta::spectral::{counting_function, spectral_zeta, spray_spectral_zeta, EigenvalueModel};
use fzeta::C64;

#[test]
fn rectangle_matches_lattice_double_sum() {
    let model = EigenvalueModel::Rectangle { a: 1.0, b: 2.0 };
    let s = C64::new(4.5, 1.0);
    let z = spectral_zeta(&model, s, 50_000).unwrap();
    let (direct, tail) = rectangle_double_sum(1.0, 2.0, s, 2000);
    assert!((z.value - direct).norm() <= z.est_error + tail);
}

#[test]
fn string_drum_is_pi_scaled_factorization() {
    let model = EigenvalueModel::FractalStringDrum { string: FractalString::cantor() };
    let s = C64::new(2.0, 0.0);
    let z = spectral_zeta(&model, s, 0).unwrap();
    assert!((z.value.re - 1.0 / 42.0).abs() < 1e-13);
}

#[test]
fn spray_with_rectangular_base_is_a_plain_product() {
    let base = EigenvalueModel::Rectangle { a: 1.0, b: 1.0 };
    let s = C64::new(3.0, 0.0);
    let spray = spray_spectral_zeta(&base, 0.5, 2, s, 20_000).unwrap();
    let plain = spectral_zeta(&base, s, 20_000).unwrap();
    let q = 2.0 * 0.125;
    assert!((spray.value.re - plain.value.re * q / (1.0 - q)).abs() < 1e-14);
}

#[test]
fn spray_enumeration_at_a_complex_point() {
    let base = EigenvalueModel::Interval { length: 1.0 };
    let s = C64::new(3.0, 2.0);
    let formula = spray_spectral_zeta(&base, 1.0 / 3.0, 2, s, 1000).unwrap();
    let (sum, tail) = spray_enumeration(&base, 1.0 / 3.0, 2, s, 200_000).unwrap();
    assert!((formula.value - sum).norm() <= formula.est_error + tail);
}

#[test]
fn multiplicity_of_a_square_eigenvalue() {
    let sq = EigenvalueModel::Rectangle { a: 1.0, b: 1.0 };
    // 50 = 1 + 49 = 25 + 25 = 49 + 1
    let mu = 50.0 * PI * PI;
    let jump = counting_function(&sq, mu * (1.0 + 1e-12)).unwrap() - counting_function(&sq, mu * (1.0 - 1e-12)).unwrap();
    assert_eq!(jump, 3);
}
