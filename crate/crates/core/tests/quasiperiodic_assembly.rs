use fzeta::analysis::{estimate_dimensions, fit_log_periodic, pole_scan_form};
use fzeta::forms::Window;
use fzeta::model::{ExactReal, Classification};
use fzeta::numeric::distance_zeta;
use fzeta::quasiperiodic::{assembly_zeta_form, build_assembly};
use fzeta::tube::{geometric_grid, sample_tube, TubeTarget};
use fzeta::{Error, C64};

#[test]
fn three_component_assembly() {
    let a = build_assembly("0.4".parse().unwrap(), &[2, 3, 5]).unwrap();
    let form = assembly_zeta_form(&a, 0.5).unwrap();
    let s = C64::new(0.6, 2.0);
    let numeric = distance_zeta(&a.descriptor(), 0.5, s).unwrap();
    assert!((numeric.value - form.eval(s)).norm() < 1e-9 * numeric.value.norm());
    // the residue at D collects one contribution from each component
    let w = Window::new([0.3, 0.5], [-0.5, 0.5]).unwrap();
    assert_eq!(pole_scan_form(&form, &w, 2).unwrap().len(), 1);
}

#[test]
fn dependent_periods_are_refused() {
    let err = build_assembly(ExactReal::new(1, 2), &[4, 8]).unwrap_err();
    match err {
        Error::IndependenceViolation { certificate } => assert_eq!(certificate, vec![3, -2]),
        other => panic!("{other:?}"),
    }
}

#[test]
fn tube_function_of_the_union_is_not_periodic() {
    let a = build_assembly(ExactReal::new(1, 2), &[2, 3]).unwrap();
    let grid = geometric_grid(0.1, 0.995, 2400);
    let samples = sample_tube(TubeTarget::Set(&a.descriptor()), &grid).unwrap();
    let report = estimate_dimensions(&samples).unwrap();
    assert!((report.dim - 0.5).abs() < 0.02, "{}", report.dim);
    let fit = fit_log_periodic(&samples, 0.5, 2).unwrap();
    let class = fzeta::analysis::classify(&report, &fit);
    assert!(matches!(class, Classification::Nonperiodic { .. }), "{class:?}");
}
