//! The reproduction suite: eleven acceptance criteria, each run against an
//! independent oracle at a pinned tolerance.

use std::f64::consts::PI;
use std::time::Instant;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::analysis::{estimate_dimensions, fit_log_periodic, numeric_residue, pole_scan_form, richardson_residue};
use crate::convergence::{refinement_verdict, Verdict};
use crate::forms::{
    cantor_distance_zeta_form, sierpinski_relative_zeta_form, sphere_tube_zeta_form, Window,
};
use crate::model::{ExactReal, FractalString, GeneralizedCantorParams, RelativeFractalDrum, SetDescriptor, TubeSamples};
use crate::numeric::{
    abscissa_verdict, ball_local_functional_equation, cantor_distance_zeta, cantor_partial_sums, distance_zeta,
    functional_equation_check, harvey_polking_probe, relative_distance_zeta, relative_zeta_partials,
    sphere_tube_zeta, CarpetLadder,
};
use crate::oracles;
use crate::quasiperiodic::{assembly_zeta_form, build_assembly};
use crate::spectral::{log_grid, spectral_residue_check, spray_spectral_zeta, string_spectral_zeta, weyl_check, EigenvalueModel};
use crate::special::rpow;
use crate::tube::{self, exp_cusp_log_tube_volume, geometric_grid, sample_tube, TubeTarget};
use crate::{Error, Result, C64};

/// Outcome of one criterion.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: u32,
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl CriterionResult {
    /// One line: `PASS  3 sphere ... (0.12 s) detail`.
    pub fn line(&self) -> String {
        format!(
            "{} {:>2} {:<28} ({:.2} s) {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.seconds,
            self.detail
        )
    }
}

type Check = fn() -> Result<(bool, String)>;

const CRITERIA: [(u32, &str, Check); 11] = [
    (1, "cantor closed form", cantor_closed_form),
    (2, "residue identities", residue_identities),
    (3, "sphere", sphere),
    (4, "sierpinski carpet", carpet),
    (5, "functional equation", functional_equation),
    (6, "cusp drums", cusp_drums),
    (7, "scaling law", scaling_law),
    (8, "quasiperiodic gate", quasiperiodic_gate),
    (9, "spectral factorization", spectral_factorization),
    (10, "weyl checks", weyl_checks),
    (11, "abscissa properties", abscissa_properties),
];

/// Number of criteria in the suite.
pub fn criterion_count() -> usize {
    CRITERIA.len()
}

/// Runs criterion `id` (1-based). An evaluation error counts as a failure.
pub fn run_criterion(id: u32) -> Result<CriterionResult> {
    let (id, name, check) = *CRITERIA
        .iter()
        .find(|c| c.0 == id)
        .ok_or_else(|| Error::param(format!("no criterion {id}")))?;
    let start = Instant::now();
    let (passed, detail) = check().unwrap_or_else(|e| (false, format!("error: {e}")));
    Ok(CriterionResult {
        id,
        name: name.to_string(),
        passed,
        detail,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// Runs every criterion in order.
pub fn run_suite() -> Vec<CriterionResult> {
    CRITERIA
        .iter()
        .map(|c| run_criterion(c.0).expect("listed criterion"))
        .collect()
}

fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

fn random_s(r: &mut StdRng, re: (f64, f64), im: (f64, f64)) -> C64 {
    C64::new(r.gen_range(re.0..re.1), r.gen_range(im.0..im.1))
}

fn ternary() -> GeneralizedCantorParams {
    GeneralizedCantorParams::ternary()
}

fn cantor_dim() -> f64 {
    2f64.ln() / 3f64.ln()
}

fn cantor_closed_form() -> Result<(bool, String)> {
    let p = ternary();
    let delta = 0.25;
    let form = cantor_distance_zeta_form(&p, delta)?;
    let mut r = rng(1);
    let (mut worst_level, mut worst_oracle) = (0.0f64, 0.0f64);
    for _ in 0..20 {
        let s = random_s(&mut r, (0.7, 1.5), (-10.0, 10.0));
        let closed = form.eval(s);
        let level30 = cantor_distance_zeta(&p, delta, s, 30)?.value;
        let explicit = oracles::cantor_renormalized_zeta(&p, delta, s, 14)?;
        worst_level = worst_level.max((level30 - closed).norm() / closed.norm());
        worst_oracle = worst_oracle.max((explicit - closed).norm() / closed.norm());
    }
    Ok((
        worst_level <= 1e-6 && worst_oracle <= 1e-6,
        format!("max rel err level-30 {worst_level:.2e}, explicit level-14 {worst_oracle:.2e} (tol 1e-6)"),
    ))
}

fn cantor_samples(periods: usize) -> Result<TubeSamples> {
    let p = ternary();
    let ratio = (-p.period() / 128.0).exp();
    let grid = geometric_grid(p.gap_scale(), ratio, 128 * periods + 1);
    sample_tube(TubeTarget::Set(&SetDescriptor::cantor(p)), &grid)
}

fn residue_identities() -> Result<(bool, String)> {
    let p = ternary();
    let (d, t) = (cantor_dim(), p.period());
    let (m, a, c) = (2.0, 1.0 / 3.0, p.gap_scale());
    let form = cantor_distance_zeta_form(&p, 0.25)?;
    let f = |s: C64| form.eval(s);
    let fit = fit_log_periodic(&cantor_samples(12)?, d, 2)?;
    let mut worst_formula = 0.0f64;
    let mut worst_fourier = 0.0f64;
    let mut res_d = C64::new(0.0, 0.0);
    let mut err_d = 0.0;
    for k in [-1i32, 0, 1] {
        let sk = C64::new(d, 2.0 * PI * k as f64 / t);
        let numeric = numeric_residue(&f, sk, 0.1)?;
        // residue of the distance zeta at s_k, written out directly
        let formula = rpow(c, sk - 1.0) * (1.0 - m * a) / (sk * t);
        worst_formula = worst_formula.max((numeric - formula).norm());
        let fourier = fit.coefficient(k).ok_or_else(|| Error::param("missing coefficient"))? * (C64::new(1.0, 0.0) - sk);
        worst_fourier = worst_fourier.max((numeric - fourier).norm());
        if k == 0 {
            res_d = numeric;
            err_d = (numeric - numeric_residue(&f, sk, 0.05)?).norm() + 1e-12;
        }
    }
    let tilde = res_d.re / (1.0 - d);
    let tilde_err = err_d / (1.0 - d);
    let (lo, hi) = oracles::cantor_contents_by_merging(&p, 4000)?;
    let lower_formula = (2.0 * d / (1.0 - d)).powf(1.0 - d) / d;
    let upper_formula = c.powf(d - 1.0) * m * (1.0 - a) / (m - 1.0);
    let margin = (tilde - lo).min(hi - tilde);
    let targets = (lower_formula - 2.4950).abs() < 5e-4
        && (upper_formula - 2.5830).abs() < 5e-4
        && (lo - lower_formula).abs() < 1e-6
        && (hi - upper_formula).abs() < 1e-6;
    let pass = worst_formula <= 1e-4 && worst_fourier <= 1e-4 && margin >= 10.0 * tilde_err && targets;
    Ok((
        pass,
        format!(
            "formula {worst_formula:.1e}, fourier {worst_fourier:.1e}; {lo:.4} < {tilde:.4} < {hi:.4}, margin {margin:.2e} vs err {tilde_err:.1e}"
        ),
    ))
}

fn sphere() -> Result<(bool, String)> {
    let delta = 0.5;
    let form = sphere_tube_zeta_form(2, 1.0, delta)?;
    let mut r = rng(3);
    let mut worst = 0.0f64;
    let mut worst_oracle = 0.0f64;
    for _ in 0..10 {
        let s = random_s(&mut r, (1.2, 3.0), (-5.0, 5.0));
        let z = sphere_tube_zeta(2, 1.0, delta, s, 400)?;
        let closed = form.eval(s);
        worst = worst.max((z.value - closed).norm() / closed.norm());
        worst_oracle = worst_oracle.max((oracles::circle_tube_zeta(1.0, delta, s)? - closed).norm() / closed.norm());
    }
    let f = |s: C64| form.eval(s);
    let one = C64::new(1.0, 0.0);
    let res = numeric_residue(&f, one, 0.2)?;
    let res_err = (res - 4.0 * PI).norm();
    // measurable case: |A_t| / t is constant for t < R, so the content is its value at any such t
    let content = tube::sphere_tube_volume(2, 1.0, 0.25)? / 0.25;
    let analytic = form.residue(one)?;
    let exact = (analytic.re - content).abs() <= 4.0 * f64::EPSILON * content && analytic.im == 0.0;
    Ok((
        worst <= 1e-8 && worst_oracle <= 1e-12 && res_err <= 1e-8 && exact,
        format!("max rel err {worst:.1e}; |res - 4 pi| = {res_err:.1e}; res = content: {exact}"),
    ))
}

fn carpet() -> Result<(bool, String)> {
    let form = sierpinski_relative_zeta_form();
    let ladder = CarpetLadder::new(4, 7)?;
    let mut worst = 0.0f64;
    for s in [1.95, 2.2, 2.5] {
        let s = C64::new(s, 0.0);
        let z = ladder.relative_zeta(1.0, s, None)?;
        worst = worst.max((z.value - form.eval(s)).norm() / form.eval(s).norm());
    }
    let window = Window::new([1.5, 2.3], [-6.0, 6.0])?;
    let poles = pole_scan_form(&form, &window, 4)?;
    let d = 8f64.ln() / 3f64.ln();
    let p = 2.0 * PI / 3f64.ln();
    let expected: Vec<C64> = [-1.0, 0.0, 1.0].iter().map(|k| C64::new(d, k * p)).collect();
    let located = poles.len() == 3
        && expected
            .iter()
            .all(|e| poles.iter().any(|q| (q.location - e).norm() < 1e-6));
    // quoted residue 1 / (2^s s (s-1) ln 3) at each lattice point
    let mut worst_res = 0.0f64;
    for q in &poles {
        let s = q.location;
        let quoted = C64::new(1.0, 0.0) / (rpow(2.0, s) * s * (s - 1.0) * 3f64.ln());
        worst_res = worst_res.max((q.numeric_residue - quoted).norm() / quoted.norm());
    }
    Ok((
        worst <= 0.02 && located && worst_res <= 1e-8,
        format!("max rel err {worst:.2e} (tol 2e-2); {} poles; residue rel err {worst_res:.1e}", poles.len()),
    ))
}

fn functional_equation() -> Result<(bool, String)> {
    let mut r = rng(5);
    let cantor = SetDescriptor::cantor(ternary());
    let circle = SetDescriptor::Sphere {
        dim: 2,
        radius: ExactReal::integer(1),
        center: vec![ExactReal::integer(0); 2],
    };
    let mut failures = Vec::new();
    let mut worst_ratio = 0.0f64;
    let mut record = |label: &str, rep: crate::numeric::FunctionalEquationReport| {
        worst_ratio = worst_ratio.max(rep.discrepancy / rep.bound);
        if !rep.holds() {
            failures.push(format!("{label} at {}", rep.s));
        }
    };
    for _ in 0..20 {
        let s = random_s(&mut r, (0.7, 1.5), (-8.0, 8.0));
        record("cantor", functional_equation_check(&cantor, 0.25, s)?);
        let s = random_s(&mut r, (1.2, 3.0), (-8.0, 8.0));
        record("circle", functional_equation_check(&circle, 0.5, s)?);
        let s = random_s(&mut r, (2.2, 3.5), (-8.0, 8.0));
        record("ball-local", ball_local_functional_equation(2, 1.0, 0.5, s)?);
    }
    Ok((
        failures.is_empty(),
        if failures.is_empty() {
            format!("60 evaluations; max discrepancy / bound {worst_ratio:.2}")
        } else {
            format!("violations: {}", failures.join(", "))
        },
    ))
}

fn cusp_drums() -> Result<(bool, String)> {
    let drum = RelativeFractalDrum::cusp(ExactReal::integer(2));
    let grid = geometric_grid(1e-2, 0.98, 800);
    let samples = sample_tube(TubeTarget::Drum(&drum), &grid)?;
    let report = estimate_dimensions(&samples)?;
    let content = report.upper_content.finite().unwrap_or(f64::NAN);
    let f = |x: f64| relative_distance_zeta(&drum, Some(0.5), C64::new(x, 0.0)).map(|z| z.value);
    let residue = richardson_residue(&f, -1.0, 0.1)?.re;
    let dim_ok = (report.dim + 1.0).abs() <= 0.02;
    let content_ok = (content - 1.0 / 3.0).abs() <= 0.01 / 3.0;
    let residue_ok = (residue - 1.0).abs() <= 0.01;
    let t: f64 = 1e-3;
    let mut worst: f64 = f64::NEG_INFINITY;
    for r in [-1.0, -5.0, -20.0] {
        let log_v = exp_cusp_log_tube_volume(1.0, t);
        if log_v > oracles::exp_cusp_log_area_bound(t) + 1e-9 {
            return Ok((false, format!("exp cusp area {log_v} exceeds the quadrature bound")));
        }
        worst = worst.max(log_v - (2.0 - r) * t.ln());
    }
    let exp_ok = worst < 1e-6f64.ln();
    Ok((
        dim_ok && content_ok && residue_ok && exp_ok,
        format!(
            "dim {:.4}, content {content:.5}, residue {residue:.5}; exp cusp max ln ratio {worst:.1}",
            report.dim
        ),
    ))
}

fn scaling_law() -> Result<(bool, String)> {
    let drums = [
        RelativeFractalDrum::cusp(ExactReal::integer(2)),
        RelativeFractalDrum::string_drum(FractalString::geometric(0.5)),
    ];
    let ranges = [((-0.5, 2.0), (-6.0, 6.0)), ((0.3, 2.0), (-6.0, 6.0))];
    let mut r = rng(7);
    let mut worst_ratio = 0.0f64;
    let mut pass = true;
    for (drum, (re, im)) in drums.iter().zip(ranges) {
        for lambda in [ExactReal::new(1, 2), ExactReal::integer(2)] {
            let scaled = drum.scaled(lambda);
            let l = lambda.to_f64();
            for _ in 0..10 {
                let s = random_s(&mut r, re, im);
                let a = relative_distance_zeta(&scaled, None, s)?;
                let b = relative_distance_zeta(drum, None, s)?;
                let factor = rpow(l, s);
                let diff = (a.value - factor * b.value).norm();
                let bound = a.est_error + factor.norm() * b.est_error;
                worst_ratio = worst_ratio.max(diff / bound);
                pass &= diff <= bound;
            }
        }
    }
    Ok((pass, format!("40 evaluations; max discrepancy / combined error {worst_ratio:.2}")))
}

fn quasiperiodic_gate() -> Result<(bool, String)> {
    let half = ExactReal::new(1, 2);
    let accepted = build_assembly(half, &[2, 3])?;
    let cert = match build_assembly(half, &[2, 4]) {
        Err(Error::IndependenceViolation { certificate }) => Some(certificate),
        _ => None,
    };
    let rejected_triple = matches!(build_assembly(half, &[6, 12, 18]), Err(Error::IndependenceViolation { .. }));
    let delta = 0.5;
    let form = assembly_zeta_form(&accepted, delta)?;
    let mut worst = 0.0f64;
    for s in [C64::new(0.7, 0.0), C64::new(0.8, 4.0), C64::new(1.2, -9.0)] {
        let numeric = distance_zeta(&accepted.descriptor(), delta, s)?;
        worst = worst.max((numeric.value - form.eval(s)).norm() / numeric.value.norm());
    }
    let window = Window::new([0.25, 0.75], [-15.0, 15.0])?;
    let poles = pole_scan_form(&form, &window, 6)?;
    // lattice enumeration: i k 2 pi / T_i on Re s = 1/2
    let mut expected: Vec<f64> = Vec::new();
    for spacing in &accepted.lattice_spacings {
        let kmax = (15.0 / spacing).floor() as i64;
        for k in -kmax..=kmax {
            let y = k as f64 * spacing;
            if !expected.iter().any(|e| (e - y).abs() < 1e-9) {
                expected.push(y);
            }
        }
    }
    let matched = poles.len() == expected.len()
        && expected
            .iter()
            .all(|y| poles.iter().any(|p| (p.location - C64::new(0.5, *y)).norm() < 1e-6));
    let pass = cert.as_deref() == Some(&[2, -1][..]) && rejected_triple && worst <= 1e-5 && matched;
    Ok((
        pass,
        format!(
            "(2,4) certificate {cert:?}; (6,12,18) rejected {rejected_triple}; numeric rel err {worst:.1e}; {} of {} lattice poles",
            poles.len(),
            expected.len()
        ),
    ))
}

fn spectral_factorization() -> Result<(bool, String)> {
    let mut pass = true;
    let mut notes = Vec::new();
    let cases = [
        (FractalString::geometric(0.5), PI * PI / 18.0),
        (FractalString::cantor(), PI * PI / 42.0),
    ];
    for (string, at_two) in &cases {
        for s in [2.0, 3.0] {
            let s = C64::new(s, 0.0);
            let z = string_spectral_zeta(string, s)?;
            let (sum, tail) = oracles::string_double_sum(string, s, 1_000_000, 80)?;
            let diff = (z.value - sum).norm();
            pass &= diff <= z.est_error + tail;
            if s.re == 2.0 {
                pass &= (z.value.re - at_two).abs() <= 1e-12;
            }
            notes.push(format!("{diff:.1e}"));
        }
    }
    let interval = EigenvalueModel::Interval { length: 1.0 };
    let s = C64::new(4.0, 0.0);
    let spray = spray_spectral_zeta(&interval, 1.0 / 3.0, 2, s, 1000)?;
    let (enumerated, tail) = oracles::spray_enumeration(&interval, 1.0 / 3.0, 2, s, 1_000_000)?;
    let diff = (spray.value - enumerated).norm();
    pass &= diff <= spray.est_error + tail;
    pass &= (spray.value.re - 2.0 / 79.0 / 90.0).abs() <= 1e-15;
    Ok((
        pass,
        format!("string diffs [{}]; spray diff {diff:.1e} (bound {:.1e})", notes.join(", "), spray.est_error + tail),
    ))
}

fn weyl_checks() -> Result<(bool, String)> {
    let interval = weyl_check(&EigenvalueModel::Interval { length: 1.0 }, &log_grid(1.0, 1e6, 1000), None)?;
    let d = 2f64.ln() / 3f64.ln();
    let drum = EigenvalueModel::FractalStringDrum { string: FractalString::cantor() };
    let cantor = weyl_check(&drum, &log_grid(1e2, 1e6, 1000), Some(d))?;
    let exponent = cantor.exponent_frequency.unwrap_or(f64::NAN);
    let rect = spectral_residue_check(&EigenvalueModel::Rectangle { a: 1.0, b: 1.0 }, 20_000)?;
    Ok((
        interval.sup_abs_remainder <= 1.0 && (exponent - d).abs() <= 0.05 && rect.relative_error <= 0.02,
        format!(
            "interval sup |R| {:.3}; cantor string exponent {exponent:.4} vs {d:.4}; rectangle residue {:.5} vs {:.5}",
            interval.sup_abs_remainder, rect.estimate, rect.expected
        ),
    ))
}

fn abscissa_properties() -> Result<(bool, String)> {
    let p = ternary();
    let d = cantor_dim();
    let cantor_at = |x: f64| abscissa_verdict(&cantor_partial_sums(&p, C64::new(x, 0.0), 16, 8));
    let cantor_ok = cantor_at(d + 0.05) == Verdict::Converges && cantor_at(d - 0.05) == Verdict::Diverges;
    let drum = RelativeFractalDrum::cusp(ExactReal::integer(2));
    let cusp_at = |x: f64| -> Result<Verdict> {
        let partials: Vec<f64> = relative_zeta_partials(&drum, C64::new(x, 0.0), 8)?.iter().map(|z| z.re).collect();
        Ok(refinement_verdict(&partials, 1e-13))
    };
    let cusp_ok = cusp_at(-0.95)? == Verdict::Converges && cusp_at(-1.05)? == Verdict::Diverges;
    let set = SetDescriptor::cantor(p);
    let hp_low = harvey_polking_probe(&set, 0.2, 8)?.verdict;
    let hp_high = harvey_polking_probe(&set, 0.5, 8)?.verdict;
    let hp_ok = hp_low == Verdict::Converges && hp_high == Verdict::Diverges;
    Ok((
        cantor_ok && cusp_ok && hp_ok,
        format!("cantor flip {cantor_ok}, cusp flip {cusp_ok}; probe 0.2 {hp_low:?}, 0.5 {hp_high:?}"),
    ))
}

