//! First-principles evaluation of distance, tube, relative, geometric and
//! perturbed zeta functions. Nothing here uses a closed-form continuation;
//! the evaluators exist to check those continuations.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::convergence::{refinement_verdict, Verdict};
use crate::model::{
    FractalString, GeneralizedCantorParams, IntervalUnion1D, PointSet1D, Region, RelativeFractalDrum,
    SetDescriptor, TubeSamples,
};
use crate::quad::{gauss_kronrod, simpson_uniform};
use crate::special::{binomial, hurwitz_tail, riemann_zeta, rpow, unit_ball_volume};
use crate::tube::{
    self, distance_transform, planar_drum_field, rasterize, sphere_tube_volume, DistanceField2D,
};
use crate::{Error, Result, C64};

const EPS: f64 = f64::EPSILON;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    IntervalExact,
    Quadrature,
    Raster,
    Series,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::IntervalExact => "interval-exact",
            Method::Quadrature => "quadrature",
            Method::Raster => "raster",
            Method::Series => "series",
        }
    }
}

/// A zeta value with its estimated absolute error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZetaEvaluation {
    pub s: C64,
    pub value: C64,
    pub est_error: f64,
    pub method: Method,
}

impl ZetaEvaluation {
    fn new(s: C64, value: C64, est_error: f64, method: Method) -> Self {
        ZetaEvaluation {
            s,
            value,
            est_error,
            method,
        }
    }

    /// Relative error bound, `est_error / |value|`.
    pub fn relative_error(&self) -> f64 {
        self.est_error / self.value.norm()
    }
}

fn nonzero_s(s: C64) -> Result<()> {
    if s.norm() < 1e-300 {
        return Err(Error::domain("distance zeta integrand antiderivative is singular at s = 0"));
    }
    Ok(())
}

/// `int` of `d^(s-1)` over the part of a gap of width `w` within `delta` of its ends.
#[inline]
fn gap_term(w: f64, delta: f64, s: C64) -> C64 {
    rpow((0.5 * w).min(delta), s) * 2.0 / s
}

/// A finite subset of the real line.
#[derive(Clone, Copy, Debug)]
pub enum LineSet<'a> {
    Points(&'a PointSet1D),
    Intervals(&'a IntervalUnion1D),
}

/// Distance zeta function `int_{A_delta} d(x,A)^(s-1) dx` of a finite union of points or intervals.
///
/// Each gap of width `w` contributes `2 min(w/2, delta)^s / s`, each outer
/// collar `delta^s / s`. The interior of a fat set contributes `0^(s-1)`,
/// which is zero for `Re s > 1` and rejected otherwise.
pub fn distance_zeta_1d(set: LineSet<'_>, delta: f64, s: C64) -> Result<ZetaEvaluation> {
    if !(delta > 0.0) {
        return Err(Error::param("delta must be positive"));
    }
    nonzero_s(s)?;
    let intervals: Vec<[f64; 2]> = match set {
        LineSet::Points(p) => p.points.iter().map(|&x| [x, x]).collect(),
        LineSet::Intervals(u) => u.intervals.clone(),
    };
    if intervals.is_empty() {
        return Err(Error::param("empty set"));
    }
    if intervals.windows(2).any(|w| w[1][0] <= w[0][1]) {
        return Err(Error::param("points or intervals must be sorted and disjoint"));
    }
    let interior: f64 = intervals.iter().map(|iv| iv[1] - iv[0]).sum();
    if interior > 0.0 && s.re <= 1.0 {
        return Err(Error::domain(format!(
            "set has positive length {interior}; 0^(s-1) is infinite for Re s = {} <= 1",
            s.re
        )));
    }
    if s.re <= 0.0 {
        return Err(Error::diverge(format!(
            "distance zeta of a point set diverges for Re s = {} <= 0",
            s.re
        )));
    }
    let collar = rpow(delta, s) / s;
    let mut value = collar * 2.0;
    let mut magnitude = 2.0 * collar.norm();
    for w in intervals.windows(2) {
        let term = gap_term(w[1][0] - w[0][1], delta, s);
        value += term;
        magnitude += term.norm();
    }
    let n = intervals.len() as f64;
    Ok(ZetaEvaluation::new(s, value, 4.0 * EPS * n.log2().max(1.0) * magnitude, Method::IntervalExact))
}

/// Level-`k` gap contributions `S_k`, `k = 1..=levels`, of `C^(m,a)`.
///
/// Level `k` has `(m-1) m^(k-1)` gaps of width `2 c a^(k-1)`.
pub fn cantor_level_terms(params: &GeneralizedCantorParams, delta: f64, s: C64, levels: u32) -> Vec<C64> {
    let m = params.m as f64;
    let (c, ln_a) = (params.gap_scale(), -params.period());
    (1..=levels)
        .map(|k| {
            let half = c * ((k - 1) as f64 * ln_a).exp();
            let log_count = (m - 1.0).ln() + (k - 1) as f64 * m.ln();
            if half <= delta {
                (s * half.ln() + log_count).exp() * 2.0 / s
            } else {
                (s * delta.ln() + log_count).exp() * 2.0 / s
            }
        })
        .collect()
}

/// Numeric distance zeta function of `C^(m,a)`.
///
/// Sums the exact gap contributions level by level through `level`, then
/// closes the geometric remainder from the ratio of the last two level sums.
/// The error estimate is the change in that remainder when the ratio is
/// taken one level earlier.
pub fn cantor_distance_zeta(
    params: &GeneralizedCantorParams,
    delta: f64,
    s: C64,
    level: u32,
) -> Result<ZetaEvaluation> {
    params.validate()?;
    nonzero_s(s)?;
    if level < 4 {
        return Err(Error::param("need at least four levels"));
    }
    if !(delta > 0.0) {
        return Err(Error::param("delta must be positive"));
    }
    let terms = cantor_level_terms(params, delta, s, level);
    let l = terms.len();
    let ratio = terms[l - 1] / terms[l - 2];
    let ratio_prev = terms[l - 2] / terms[l - 3];
    if ratio.norm() >= 1.0 {
        return Err(Error::diverge(format!(
            "level sums grow by |{:.4}| per level at s = {s}: Re s is not above the dimension",
            ratio.norm()
        )));
    }
    let tail = terms[l - 1] * ratio / (1.0 - ratio);
    let tail_prev = terms[l - 1] * ratio_prev / (1.0 - ratio_prev);
    let collars = rpow(delta, s) * 2.0 / s;
    let mut value = collars;
    let mut magnitude = collars.norm();
    for t in &terms {
        value += *t;
        magnitude += t.norm();
    }
    value += tail;
    let err = (tail - tail_prev).norm() + 8.0 * EPS * magnitude * level as f64;
    Ok(ZetaEvaluation::new(s, value, err, Method::Series))
}

/// Partial sums of the Cantor distance zeta after `step, 2 step, ...` levels.
pub fn cantor_partial_sums(params: &GeneralizedCantorParams, s: C64, step: u32, count: usize) -> Vec<C64> {
    let c = params.gap_scale();
    let terms = cantor_level_terms(params, c, s, step * count as u32);
    let collars = rpow(c, s) * 2.0 / s;
    let mut acc = collars;
    let mut out = Vec::with_capacity(count);
    for (k, t) in terms.iter().enumerate() {
        acc += *t;
        if (k + 1) % step as usize == 0 {
            out.push(acc);
        }
    }
    out
}

/// Verdict on convergence of a sequence of complex partial values.
pub fn abscissa_verdict(partials: &[C64]) -> Verdict {
    let norms: Vec<f64> = partials.iter().map(|z| z.norm()).collect();
    refinement_verdict(&norms, 1e-13)
}

/// Geometric zeta function `sum_j l_j^s` with a certified tail bound.
pub fn geometric_zeta(string: &FractalString, s: C64) -> Result<ZetaEvaluation> {
    string.validate()?;
    match string {
        FractalString::Finite { lengths } => {
            let (v, mag) = lengths
                .iter()
                .fold((C64::new(0.0, 0.0), 0.0), |(v, m), &l| {
                    let t = rpow(l, s);
                    (v + t, m + t.norm())
                });
            Ok(ZetaEvaluation::new(s, v, 4.0 * EPS * mag * (lengths.len() as f64).log2().max(1.0), Method::Series))
        }
        FractalString::Lattice {
            scale,
            ratio,
            base_multiplicity,
            multiplicity_ratio,
        } => {
            let q = *multiplicity_ratio as f64;
            let step = rpow(*ratio, s) * q;
            if step.norm() >= 1.0 {
                return Err(Error::diverge(format!(
                    "geometric zeta diverges at s = {s}: level ratio has modulus {:.6}",
                    step.norm()
                )));
            }
            let first = rpow(*scale, s) * *base_multiplicity as f64;
            let mut term = first;
            let mut value = C64::new(0.0, 0.0);
            let mut mag = 0.0;
            let mut levels = 0;
            loop {
                value += term;
                mag += term.norm();
                levels += 1;
                let tail_bound = term.norm() * step.norm() / (1.0 - step.norm());
                if tail_bound <= 1e-17 * value.norm() || levels > 200_000 {
                    let err = tail_bound + 4.0 * EPS * mag * (levels as f64).sqrt();
                    return Ok(ZetaEvaluation::new(s, value, err, Method::Series));
                }
                term *= step;
            }
        }
        FractalString::Power { exponent } => {
            let w = s * *exponent;
            let (v, e) = hurwitz_tail(w, 1).map_err(|_| {
                Error::diverge(format!("sum of j^(-{exponent} s) diverges at s = {s}"))
            })?;
            Ok(ZetaEvaluation::new(s, v, e, Method::Series))
        }
        FractalString::Telescoping => {
            if s.re <= 0.5 {
                return Err(Error::diverge(format!("telescoping string zeta diverges at s = {s}")));
            }
            // explicit head, then (j(j+1))^{-s} = sum_k binom(-s,k) j^{-2s-k}
            let head_len = 2000u64;
            let mut value = C64::new(0.0, 0.0);
            for j in 1..=head_len {
                value += rpow(j as f64 * (j + 1) as f64, -s);
            }
            let mut coef = C64::new(1.0, 0.0);
            let mut err = 0.0;
            for k in 0..40u32 {
                let (h, e) = hurwitz_tail(s * 2.0 + k as f64, head_len + 1)?;
                let term = coef * h;
                value += term;
                err += coef.norm() * e;
                if term.norm() < 1e-18 * value.norm() {
                    err += term.norm();
                    break;
                }
                coef *= (-s - k as f64) / (k + 1) as f64;
            }
            Ok(ZetaEvaluation::new(s, value, err + 1e-15 * value.norm(), Method::Series))
        }
        FractalString::Scaled { factor, inner } => {
            let z = geometric_zeta(inner, s)?;
            let f = rpow(*factor, s);
            Ok(ZetaEvaluation::new(s, z.value * f, z.est_error * f.norm(), Method::Series))
        }
    }
}

/// `sum_{l_j > threshold} l_j^s` and the number of such lengths.
fn head_power_sum(string: &FractalString, threshold: f64, s: C64) -> (C64, f64) {
    let mut v = C64::new(0.0, 0.0);
    let mut count = 0.0;
    for b in string.blocks() {
        if b.length <= threshold {
            break;
        }
        v += rpow(b.length, s) * b.multiplicity;
        count += b.multiplicity;
    }
    (v, count)
}

/// Relative distance zeta of the string drum `(A_L, Omega_L)` restricted to `A_delta`.
///
/// With `delta = None` (or `delta >= l_1 / 2`) this is `2^(1-s) zeta_L(s) / s`.
pub fn string_drum_zeta(string: &FractalString, delta: Option<f64>, s: C64) -> Result<ZetaEvaluation> {
    nonzero_s(s)?;
    let z = geometric_zeta(string, s)?;
    let pre = rpow(2.0, C64::new(1.0, 0.0) - s) / s;
    let mut value = pre * z.value;
    let mut err = pre.norm() * z.est_error;
    if let Some(d) = delta {
        if !(d > 0.0) {
            return Err(Error::param("delta must be positive"));
        }
        let (head, count) = head_power_sum(string, 2.0 * d, s);
        value += -pre * head + rpow(d, s) * (2.0 * count) / s;
        err += 4.0 * EPS * (pre * head).norm();
    }
    Ok(ZetaEvaluation::new(s, value, err, Method::Series))
}

/// Smooth-model continuation of a tube function below the smallest sample.
#[derive(Clone)]
pub enum TailModel {
    /// `|A_t| = content * t^(N - dim)`.
    Constant { dim: f64, content: f64 },
    /// `|A_t| = t^(N - dim) G(log 1/t)` with `G` of period `period`.
    Periodic {
        dim: f64,
        period: f64,
        profile: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    },
}

impl std::fmt::Debug for TailModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TailModel::Constant { dim, content } => write!(f, "Constant {{ dim: {dim}, content: {content} }}"),
            TailModel::Periodic { dim, period, .. } => write!(f, "Periodic {{ dim: {dim}, period: {period} }}"),
        }
    }
}

impl TailModel {
    /// `int_{u_min}^inf e^{-u(s-N)} |A_{e^{-u}}| du`.
    fn tail(&self, s: C64, u_min: f64) -> Result<(C64, f64)> {
        match self {
            TailModel::Constant { dim, content } => {
                if s.re <= *dim {
                    return Err(Error::diverge(format!("tube zeta diverges for Re s <= {dim}")));
                }
                let v = (-(s - dim) * u_min).exp() * *content / (s - dim);
                Ok((v, 4.0 * EPS * v.norm()))
            }
            TailModel::Periodic { dim, period, profile } => {
                if s.re <= *dim {
                    return Err(Error::diverge(format!("tube zeta diverges for Re s <= {dim}")));
                }
                let sd = s - dim;
                let r = gauss_kronrod(
                    |u| (-sd * u).exp() * profile(u),
                    u_min,
                    u_min + period,
                    1e-15,
                    1e-14,
                    2000,
                );
                let factor = C64::new(1.0, 0.0) / (1.0 - (-sd * *period).exp());
                Ok((r.value * factor, r.error * factor.norm()))
            }
        }
    }
}

/// Splits indices of a grid into maximal runs of constant spacing.
fn uniform_runs(u: &[f64]) -> Vec<(usize, usize, f64)> {
    let mut runs = Vec::new();
    let mut start = 0;
    while start + 1 < u.len() {
        let h = u[start + 1] - u[start];
        let mut end = start + 1;
        while end + 1 < u.len() && ((u[end + 1] - u[end]) - h).abs() <= 1e-9 * h {
            end += 1;
        }
        runs.push((start, end, h));
        start = end;
    }
    runs
}

/// Tube zeta function `int_0^delta t^(s-N-1) |A_t| dt` from samples.
///
/// Works in `u = log(1/t)`: composite Simpson on each run of uniformly spaced
/// samples, plus the model tail below the smallest sample. Without a model
/// the tail is extrapolated from the local power law of the last decade and
/// counted in full as error; that needs samples down to `delta * 1e-6`.
pub fn tube_zeta_from_samples(
    samples: &TubeSamples,
    delta: f64,
    s: C64,
    model: Option<&TailModel>,
) -> Result<ZetaEvaluation> {
    let n_dim = samples.ambient_dim as f64;
    if samples.len() < 3 {
        return Err(Error::InsufficientRange("need at least three tube samples".into()));
    }
    let last = samples.samples.last().expect("nonempty");
    if (last.t - delta).abs() > 1e-12 * delta {
        return Err(Error::param(format!(
            "largest sample t = {} must equal delta = {delta}",
            last.t
        )));
    }
    // descending t, ascending u
    let pts: Vec<_> = samples.samples.iter().rev().collect();
    let u: Vec<f64> = pts.iter().map(|p| -p.t.ln()).collect();
    let sn = s - n_dim;
    let f: Vec<C64> = pts.iter().map(|p| rpow(p.t, sn) * p.volume).collect();
    let mut value = C64::new(0.0, 0.0);
    let mut err = 0.0;
    for (a, b, h) in uniform_runs(&u) {
        let seg = &f[a..=b];
        let full = simpson_uniform(seg, h);
        let intervals = b - a;
        if intervals >= 4 && intervals % 4 == 0 {
            // Richardson step; the uncorrected difference stays as the error bound
            let coarse: Vec<C64> = seg.iter().step_by(2).copied().collect();
            let diff = (full - simpson_uniform(&coarse, 2.0 * h)) / 15.0;
            value += full + diff;
            err += diff.norm();
        } else {
            value += full;
            let trap: C64 = (seg.iter().sum::<C64>() - (seg[0] + seg[intervals]) * 0.5) * h;
            err += (full - trap).norm();
        }
        // sample error bounds weighted by the largest Simpson weight
        for (k, p) in pts[a..=b].iter().enumerate() {
            let _ = k;
            err += rpow(p.t, sn).norm() * p.error_bound * h * 4.0 / 3.0;
        }
    }
    // rounding in the samples and in the weighted sum
    let abs_mass: f64 = f.iter().map(|z| z.norm()).sum::<f64>() * (u[u.len() - 1] - u[0]) / f.len() as f64;
    err += 4.0 * EPS * (f.len() as f64).sqrt() * abs_mass;
    let first = pts.last().expect("nonempty");
    let u_min = -first.t.ln();
    let (tail, tail_err) = match model {
        Some(m) => m.tail(s, u_min)?,
        None => {
            if first.t > delta * 1e-6 {
                return Err(Error::domain(format!(
                    "tail unbounded: smallest sample t = {} exceeds delta * 1e-6 and no model was given",
                    first.t
                )));
            }
            // local power law |A_t| ~ C t^p from the last decade
            let reference = pts
                .iter()
                .rev()
                .find(|p| p.t >= 10.0 * first.t)
                .unwrap_or(&pts[0]);
            let p = (reference.volume / first.volume).ln() / (reference.t / first.t).ln();
            let expo = sn + p;
            if expo.re <= 0.0 {
                return Err(Error::diverge(format!(
                    "tube zeta diverges: fitted exponent gives Re(s - N + p) = {} <= 0",
                    expo.re
                )));
            }
            let v = rpow(first.t, sn) * first.volume / expo;
            (v, v.norm())
        }
    };
    value += tail;
    err += tail_err + 8.0 * EPS * value.norm();
    Ok(ZetaEvaluation::new(s, value, err, Method::Quadrature))
}

/// Result of comparing both sides of `zeta_A = delta^(s-N)|A_delta| + (N-s) zeta~_A`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FunctionalEquationReport {
    pub s: C64,
    pub distance: ZetaEvaluation,
    pub tube: ZetaEvaluation,
    pub discrepancy: f64,
    pub bound: f64,
}

impl FunctionalEquationReport {
    pub fn holds(&self) -> bool {
        self.discrepancy <= self.bound
    }
}

/// Compares the two sides of the functional equation from independent evaluations.
pub fn functional_equation_residual(
    n: u32,
    delta: f64,
    volume_at_delta: f64,
    distance: ZetaEvaluation,
    tube: ZetaEvaluation,
) -> FunctionalEquationReport {
    let s = distance.s;
    let n_f = n as f64;
    let rhs = rpow(delta, s - n_f) * volume_at_delta + (C64::new(n_f, 0.0) - s) * tube.value;
    let discrepancy = (distance.value - rhs).norm();
    let bound = distance.est_error
        + (C64::new(n_f, 0.0) - s).norm() * tube.est_error
        + 16.0 * EPS * (distance.value.norm() + rhs.norm());
    FunctionalEquationReport {
        s,
        distance,
        tube,
        discrepancy,
        bound,
    }
}

/// Samples per multiplicative Cantor period used by the tube side.
const CANTOR_SAMPLES_PER_PERIOD: usize = 128;

/// Numeric tube zeta of `C^(m,a)`: exact samples on a grid whose nodes hit every
/// kink of the tube function, plus the periodic model below the last period.
pub fn cantor_tube_zeta(params: &GeneralizedCantorParams, delta: f64, s: C64, periods: usize) -> Result<ZetaEvaluation> {
    let c = params.gap_scale();
    let mut grid = Vec::new();
    if delta > c {
        let steps = 64;
        let r = (c / delta).powf(1.0 / steps as f64);
        grid.extend((0..steps).map(|k| delta * r.powi(k)));
    }
    let top = delta.min(c);
    // kinks sit at t = c a^n; start on one at or below delta
    let (start, offset) = if delta >= c {
        (c, 0.0)
    } else {
        let n = ((c / delta).ln() / params.period()).ceil();
        (c * (-(n * params.period())).exp(), n)
    };
    let _ = offset;
    let ratio = (-params.period() / CANTOR_SAMPLES_PER_PERIOD as f64).exp();
    if start < top {
        // smooth stretch between delta and the first kink below it
        let steps = 32;
        let r = (start / top).powf(1.0 / steps as f64);
        grid.extend((0..steps).map(|k| top * r.powi(k)));
    }
    grid.extend((0..=CANTOR_SAMPLES_PER_PERIOD * periods).map(|k| start * ratio.powi(k as i32)));
    grid.dedup_by(|a, b| (*a - *b).abs() <= 1e-15 * b.abs());
    let samples = tube::sample_tube(
        tube::TubeTarget::Set(&SetDescriptor::cantor(*params)),
        &grid,
    )?;
    let p = *params;
    let model = TailModel::Periodic {
        dim: params.dimension(),
        period: params.period(),
        profile: Arc::new(move |u| tube::cantor_profile(&p, u)),
    };
    tube_zeta_from_samples(&samples, delta, s, Some(&model))
}

/// Numeric tube zeta of a sphere from samples with a linear-collar tail model.
pub fn sphere_tube_zeta(n: u32, radius: f64, delta: f64, s: C64, samples_per_unit: usize) -> Result<ZetaEvaluation> {
    if !(delta < radius) {
        return Err(Error::domain("sphere tube zeta needs delta < R"));
    }
    let decades = 8.0;
    let count = ((decades * std::f64::consts::LN_10 * samples_per_unit as f64 / 4.0).ceil() as usize) * 4;
    let ratio = (-(decades * std::f64::consts::LN_10) / count as f64).exp();
    let grid = tube::geometric_grid(delta, ratio, count + 1);
    let set = SetDescriptor::Sphere {
        dim: n,
        radius: crate::model::ExactReal(
            num_rational::Ratio::approximate_float(radius).ok_or_else(|| Error::param("radius"))?,
        ),
        center: vec![],
    };
    let samples = tube::sample_tube(tube::TubeTarget::Set(&set), &grid)?;
    let content = 2.0 * n as f64 * unit_ball_volume(n) * radius.powi(n as i32 - 1);
    let model = TailModel::Constant {
        dim: n as f64 - 1.0,
        content,
    };
    let mut z = tube_zeta_from_samples(&samples, delta, s, Some(&model))?;
    // the model drops the O(t^3) part of the collar below the last sample
    let t_min = grid.last().copied().unwrap_or(delta);
    let cubic = unit_ball_volume(n) * 2.0 * binomial(n, 3) * radius.powi(n as i32 - 3) * t_min.powi(3);
    z.est_error += cubic * t_min.powf(s.re - n as f64) / (s.re - n as f64 + 3.0).max(1e-3);
    Ok(z)
}

/// Numeric distance zeta of a sphere, `int_0^delta t^(s-N) d|A_t|`, by radial quadrature.
pub fn sphere_distance_zeta(n: u32, radius: f64, delta: f64, s: C64) -> Result<ZetaEvaluation> {
    if !(delta < radius) {
        return Err(Error::domain("sphere distance zeta needs delta < R"));
    }
    let nf = n as f64;
    if s.re <= nf - 1.0 {
        return Err(Error::diverge(format!("sphere distance zeta diverges for Re s <= {}", nf - 1.0)));
    }
    let w = unit_ball_volume(n);
    let dv = move |t: f64| nf * w * ((radius + t).powi(n as i32 - 1) + (radius - t).powi(n as i32 - 1));
    let dv0 = dv(0.0);
    // dv(0) t^(s-N) integrates in closed form; the remainder vanishes like t^2
    let lead = rpow(delta, s - nf + 1.0) * dv0 / (s - nf + 1.0);
    let u0 = -delta.ln();
    let r = gauss_kronrod(
        |u| {
            let t = (-u).exp();
            rpow(t, s - nf + 1.0) * (dv(t) - dv0)
        },
        u0,
        u0 + 60.0,
        1e-16,
        1e-14,
        2000,
    );
    let value = lead + r.value;
    Ok(ZetaEvaluation::new(s, value, r.error + 8.0 * EPS * value.norm(), Method::Quadrature))
}

/// Local distance zeta of `R^N` at scale `r`: `int_0^delta t^(s-N) d/dt[omega_N (r+t)^N] dt`, `Re s > N`.
pub fn ball_local_distance_zeta(n: u32, r: f64, delta: f64, s: C64) -> Result<ZetaEvaluation> {
    let nf = n as f64;
    if s.re <= nf {
        return Err(Error::diverge(format!("local ball zeta needs Re s > {nf}")));
    }
    let w = unit_ball_volume(n);
    let u0 = -delta.ln();
    // decays like e^{-u(s-N+1)}; the cut leaves less than e^{-60}
    let span = 60.0 / (s.re - nf + 1.0);
    let q = gauss_kronrod(
        |u| {
            let t = (-u).exp();
            rpow(t, s - nf + 1.0) * (nf * w * (r + t).powi(n as i32 - 1))
        },
        u0,
        u0 + span,
        1e-300,
        1e-14,
        4000,
    );
    let cut = (-(s.re - nf + 1.0) * (u0 + span)).exp() * nf * w * (r + delta).powi(n as i32 - 1) / (s.re - nf + 1.0);
    Ok(ZetaEvaluation::new(s, q.value, q.error + cut + 8.0 * EPS * q.value.norm(), Method::Quadrature))
}

/// Local tube zeta of `R^N` from samples of `omega_N (r+t)^N`, `Re s > N`.
pub fn ball_local_tube_zeta(n: u32, r: f64, delta: f64, s: C64) -> Result<ZetaEvaluation> {
    let nf = n as f64;
    let w = unit_ball_volume(n);
    let decades = 12.0;
    let per_unit = 120.0;
    let count = ((decades * std::f64::consts::LN_10 * per_unit / 4.0).ceil() as usize) * 4;
    let ratio = (-(decades * std::f64::consts::LN_10) / count as f64).exp();
    let grid = tube::geometric_grid(delta, ratio, count + 1);
    let samples = TubeSamples::new(
        n,
        grid.iter()
            .map(|&t| crate::model::TubeSample {
                t,
                volume: w * (r + t).powi(n as i32),
                exact: true,
                error_bound: 0.0,
            })
            .collect(),
    )?;
    let model = TailModel::Constant { dim: nf, content: w * r.powi(n as i32) };
    let mut z = tube_zeta_from_samples(&samples, delta, s, Some(&model))?;
    // the model drops the linear term N omega_N r^(N-1) t below the last sample
    let t_min = *grid.last().expect("nonempty");
    let lin = nf * w * r.powi(n as i32 - 1).max(1.0) * (1.0 + t_min).powi(n as i32);
    z.est_error += lin * t_min.powf(s.re - nf + 1.0) / (s.re - nf + 1.0);
    Ok(z)
}

/// Functional-equation check for the local zeta functions of `R^N`.
pub fn ball_local_functional_equation(n: u32, r: f64, delta: f64, s: C64) -> Result<FunctionalEquationReport> {
    if (s - n as f64).norm() < 1e-12 {
        return Err(Error::domain(format!("s = N = {n} is excluded")));
    }
    let distance = ball_local_distance_zeta(n, r, delta, s)?;
    let tube_side = ball_local_tube_zeta(n, r, delta, s)?;
    let vol = unit_ball_volume(n) * (r + delta).powi(n as i32);
    Ok(functional_equation_residual(n, delta, vol, distance, tube_side))
}

/// Functional-equation check on a set descriptor.
///
/// Supported: Cantor blocks at unit scale and spheres. `s = N` is refused.
pub fn functional_equation_check(set: &SetDescriptor, delta: f64, s: C64) -> Result<FunctionalEquationReport> {
    let n = set.ambient_dim();
    if (s - n as f64).norm() < 1e-12 {
        return Err(Error::domain(format!("s = N = {n} is excluded: the tube zeta has a pole there")));
    }
    match set {
        SetDescriptor::CantorBlock { params, scale, .. } if scale.to_f64() == 1.0 => {
            let distance = cantor_distance_zeta(params, delta, s, 40)?;
            let tube_side = cantor_tube_zeta(params, delta, s, 12)?;
            let vol = tube::cantor_tube_function(params, delta)?;
            Ok(functional_equation_residual(1, delta, vol, distance, tube_side))
        }
        SetDescriptor::Sphere { dim, radius, .. } => {
            let r = radius.to_f64();
            let distance = sphere_distance_zeta(*dim, r, delta, s)?;
            let tube_side = sphere_tube_zeta(*dim, r, delta, s, 400)?;
            let vol = sphere_tube_volume(*dim, r, delta)?;
            Ok(functional_equation_residual(*dim, delta, vol, distance, tube_side))
        }
        other => Err(Error::unsupported(format!(
            "functional equation check is not available for {} sets",
            tube::variant_name(other)
        ))),
    }
}

/// Distance zeta function of an absolute set descriptor.
pub fn distance_zeta(set: &SetDescriptor, delta: f64, s: C64) -> Result<ZetaEvaluation> {
    set.validate()?;
    match set {
        SetDescriptor::PointSet1D { points } => {
            let mut p: Vec<f64> = points.iter().map(|x| x.to_f64()).collect();
            p.sort_by(f64::total_cmp);
            distance_zeta_1d(LineSet::Points(&PointSet1D { points: p }), delta, s)
        }
        SetDescriptor::IntervalUnion1D { intervals } => {
            let mut iv: Vec<[f64; 2]> = intervals.iter().map(|x| [x[0].to_f64(), x[1].to_f64()]).collect();
            iv.sort_by(|a, b| a[0].total_cmp(&b[0]));
            distance_zeta_1d(LineSet::Intervals(&IntervalUnion1D { intervals: iv }), delta, s)
        }
        SetDescriptor::CantorBlock { params, scale, .. } => {
            let lambda = scale.to_f64();
            let z = cantor_distance_zeta(params, delta / lambda, s, 40)?;
            let f = rpow(lambda, s);
            Ok(ZetaEvaluation::new(s, z.value * f, z.est_error * f.norm(), z.method))
        }
        SetDescriptor::StringEndpoints { string } => {
            let inner = string_drum_zeta(string, Some(delta), s)?;
            let collars = rpow(delta, s) * 2.0 / s;
            Ok(ZetaEvaluation::new(s, inner.value + collars, inner.est_error, Method::Series))
        }
        SetDescriptor::Sphere { dim, radius, .. } => sphere_distance_zeta(*dim, radius.to_f64(), delta, s),
        SetDescriptor::UnionOfDescriptors { members } if set.ambient_dim() == 1 => {
            let mut blocks = Vec::new();
            for m in members {
                let (lo, hi) = m.set.bounding_box()?;
                blocks.push((lo[0], hi[0], &m.set));
            }
            blocks.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut value = C64::new(0.0, 0.0);
            let mut err = 0.0;
            for (_, _, member) in &blocks {
                let z = distance_zeta(member, delta, s)?;
                value += z.value;
                err += z.est_error;
            }
            // facing collars inside each gap are replaced by the true gap contribution
            for w in blocks.windows(2) {
                value += gap_term(w[1].0 - w[0].1, delta, s) - rpow(delta, s) * 2.0 / s;
            }
            Ok(ZetaEvaluation::new(s, value, err, Method::Series))
        }
        SetDescriptor::PixelSet2D { .. } | SetDescriptor::SierpinskiCarpet { .. } => {
            let (lo, hi) = set.bounding_box()?;
            let extent = [lo[0] - delta, lo[1] - delta, hi[0] + delta, hi[1] + delta];
            let res = match set {
                SetDescriptor::SierpinskiCarpet { level } => 3usize.pow((*level).clamp(3, 7)) * 3 / 2,
                _ => 0,
            };
            let field = tube::raster_distance_field(set, res, extent)?;
            distance_zeta_2d(&field, None, delta, s, None)
        }
        other => Err(Error::unsupported(format!(
            "no distance zeta evaluator for {} sets",
            tube::variant_name(other)
        ))),
    }
}

/// Raster distance zeta `sum d^(s-2) * pixel_area` over pixels with `0 < d <= delta`.
///
/// Distances are measured from pixel centers to set pixel centers; the value
/// uses `d - h/2` (the distance to the nearest set pixel edge along an axis).
/// The error estimate is the spread between corrected and uncorrected sums
/// plus, for `Re s < 2`, the excluded zero-distance area weighted by
/// `(h/2)^(Re s - 2)`.
pub fn distance_zeta_2d(
    field: &DistanceField2D,
    inside: Option<&[bool]>,
    delta: f64,
    s: C64,
    tol: Option<f64>,
) -> Result<ZetaEvaluation> {
    let h = field.pixel_size();
    let area = field.pixel_area();
    let e = s - 2.0;
    let half = 0.5 * h;
    let (corrected, raw, zeros) = field
        .grid
        .par_iter()
        .enumerate()
        .filter(|(idx, d)| **d <= delta && inside.is_none_or(|m| m[*idx]))
        .map(|(_, &d)| {
            if d == 0.0 {
                (C64::new(0.0, 0.0), C64::new(0.0, 0.0), 1u64)
            } else {
                (rpow(d - half, e), rpow(d, e), 0)
            }
        })
        .reduce(
            || (C64::new(0.0, 0.0), C64::new(0.0, 0.0), 0),
            |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2),
        );
    let value = corrected * area;
    let mut err = ((corrected - raw) * area).norm();
    if s.re < 2.0 {
        err += zeros as f64 * area * half.powf(s.re - 2.0);
    }
    if let Some(t) = tol {
        if err > t * value.norm() {
            return Err(Error::TooCoarse { est_error: err / value.norm(), tol: t });
        }
    }
    Ok(ZetaEvaluation::new(s, value, err, Method::Raster))
}

/// Aitken extrapolation of the last three entries.
fn aitken(x: &[C64]) -> C64 {
    let n = x.len();
    let (a, b, c) = (x[n - 3], x[n - 2], x[n - 1]);
    let denom = c - b * 2.0 + a;
    if denom.norm() < 1e-300 {
        return c;
    }
    c - (c - b) * (c - b) / denom
}

/// Distance fields of the carpet at resolutions `3^min_level ..= 3^max_level`,
/// each at its own construction level, over the unit square.
pub struct CarpetLadder {
    fields: Vec<DistanceField2D>,
}

impl CarpetLadder {
    pub fn new(min_level: u32, max_level: u32) -> Result<Self> {
        if max_level < min_level + 3 {
            return Err(Error::param("carpet extrapolation needs at least four resolutions"));
        }
        let cap = tube::raster_cap();
        if 3usize.pow(max_level) > cap {
            return Err(Error::Capacity {
                what: "raster side length",
                needed: 3u128.pow(max_level),
                budget: cap as u128,
            });
        }
        let fields = (min_level..=max_level)
            .map(|level| {
                let n = 3usize.pow(level);
                let set = SetDescriptor::SierpinskiCarpet { level };
                let mask = rasterize(&set, n, n, [0.0, 0.0, 1.0, 1.0])?;
                let h = 1.0 / n as f64;
                Ok(DistanceField2D {
                    nx: n,
                    ny: n,
                    hx: h,
                    hy: h,
                    extent: [0.0, 0.0, 1.0, 1.0],
                    grid: distance_transform(&mask, n, n, h, h),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(CarpetLadder { fields })
    }

    /// Relative distance zeta of the carpet in the unit square.
    ///
    /// Each resolution misses the holes finer than its pixels; the
    /// sequence of raster sums is extrapolated with two overlapping Aitken
    /// steps and their spread is the error estimate.
    pub fn relative_zeta(&self, delta: f64, s: C64, tol: Option<f64>) -> Result<ZetaEvaluation> {
        let raw: Vec<C64> = self
            .fields
            .iter()
            .map(|f| distance_zeta_2d(f, None, delta, s, None).map(|z| z.value))
            .collect::<Result<_>>()?;
        let n = raw.len();
        let best = aitken(&raw);
        let previous = aitken(&raw[..n - 1]);
        let err = (best - previous).norm();
        if let Some(t) = tol {
            if err > t * best.norm() {
                return Err(Error::TooCoarse { est_error: err / best.norm(), tol: t });
            }
        }
        Ok(ZetaEvaluation::new(s, best, err, Method::Raster))
    }

    pub fn levels(&self) -> usize {
        self.fields.len()
    }
}

/// Profile of a cusp region bounding the drum at the origin.
#[derive(Clone, Copy, Debug)]
enum Cusp {
    Power { alpha: f64, scale: f64 },
    Exp { scale: f64 },
}

impl Cusp {
    fn from_region(region: &Region) -> Option<Cusp> {
        match region {
            Region::CuspRegion { alpha, scale } => Some(Cusp::Power {
                alpha: alpha.to_f64(),
                scale: scale.to_f64(),
            }),
            Region::ExpCuspRegion { scale } => Some(Cusp::Exp { scale: scale.to_f64() }),
            _ => None,
        }
    }

    fn scale(&self) -> f64 {
        match *self {
            Cusp::Power { scale, .. } | Cusp::Exp { scale } => scale,
        }
    }

    fn height(&self, x: f64) -> f64 {
        match *self {
            Cusp::Power { alpha, scale } => scale * (x / scale).powf(alpha),
            Cusp::Exp { scale } => scale * (-scale / x).exp(),
        }
    }

    fn log_height(&self, x: f64) -> f64 {
        match *self {
            Cusp::Power { alpha, scale } => scale.ln() + alpha * (x / scale).ln(),
            Cusp::Exp { scale } => scale.ln() - scale / x,
        }
    }

    /// `ln` of the angular width of `{phi : (r cos phi, r sin phi) in Omega}`.
    fn log_angle(&self, r: f64) -> f64 {
        let lambda = self.scale();
        let lo = if r > lambda { (lambda / r).acos() } else { 0.0 };
        if r <= lambda {
            let small = self.log_height(r) - r.ln();
            if small < -18.0 {
                // first order in the angle; the correction is below 1e-16 relative
                return small;
            }
        }
        let psi = |phi: f64| r * phi.sin() - self.height(r * phi.cos());
        let (mut a, mut b) = (lo, std::f64::consts::FRAC_PI_2);
        if psi(a) >= 0.0 {
            return f64::NEG_INFINITY;
        }
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if psi(mid) > 0.0 {
                b = mid;
            } else {
                a = mid;
            }
            if b - a <= 1e-16 * b {
                break;
            }
        }
        (0.5 * (a + b) - lo).ln()
    }

    fn outer_radius(&self) -> f64 {
        let l = self.scale();
        l.hypot(self.height(l))
    }
}

/// `int_{u_a}^{u_b} e^{-us} angle(e^{-u}) du`.
fn cusp_segment(cusp: Cusp, s: C64, ua: f64, ub: f64) -> (C64, f64) {
    let r = gauss_kronrod(
        |u| {
            let la = cusp.log_angle((-u).exp());
            if la == f64::NEG_INFINITY {
                C64::new(0.0, 0.0)
            } else {
                (-s * u + la).exp()
            }
        },
        ua,
        ub,
        1e-300,
        1e-13,
        4000,
    );
    (r.value, r.error)
}

/// Start of the radial integration in `u = ln(1/r)` and the kink at `r = lambda`.
fn cusp_limits(cusp: Cusp, delta: Option<f64>) -> (f64, f64) {
    let r_max = match delta {
        Some(d) => d.min(cusp.outer_radius()),
        None => cusp.outer_radius(),
    };
    let u0 = -r_max.ln();
    let u_kink = (-cusp.scale().ln()).max(u0);
    (u0, u_kink)
}

/// Distance from the kink at which the power-law tail is fitted.
const CUSP_SPAN: f64 = 40.0;

fn cusp_relative_zeta(cusp: Cusp, delta: Option<f64>, s: C64) -> Result<ZetaEvaluation> {
    nonzero_s(s).ok();
    let (u0, u1) = cusp_limits(cusp, delta);
    let mut value = C64::new(0.0, 0.0);
    let mut err = 0.0;
    if u1 > u0 {
        let (v, e) = cusp_segment(cusp, s, u0, u1);
        value += v;
        err += e;
    }
    match cusp {
        Cusp::Power { .. } => {
            let u_end = u1 + CUSP_SPAN;
            let (v, e) = cusp_segment(cusp, s, u1, u_end);
            value += v;
            err += e;
            let la = |u: f64| cusp.log_angle((-u).exp());
            let p = la(u_end - 1.0) - la(u_end);
            let p_prev = la(u_end - 2.0) - la(u_end - 1.0);
            let expo = s + p;
            if expo.re <= 0.0 {
                return Err(Error::diverge(format!(
                    "relative zeta diverges at s = {s}: Re s is not above {}",
                    -p
                )));
            }
            let head = (-s * u_end + la(u_end)).exp();
            let tail = head / expo;
            let tail_prev = head / (s + p_prev);
            value += tail;
            err += (tail - tail_prev).norm();
        }
        Cusp::Exp { scale } => {
            // the angle decays like exp(-lambda/r); stop where it is below e^-800 of the scale of s
            let u_end = ((800.0 + s.re.abs() * 10.0) / scale).ln().max(u1 + 1.0);
            let (v, e) = cusp_segment(cusp, s, u1, u_end);
            value += v;
            err += e;
        }
    }
    Ok(ZetaEvaluation::new(s, value, err + 8.0 * EPS * value.norm(), Method::Quadrature))
}

/// Relative distance zeta `int_{A_delta ∩ Omega} d(x,A)^(s-N) dx`; `delta = None` integrates over all of `Omega`.
pub fn relative_distance_zeta(drum: &RelativeFractalDrum, delta: Option<f64>, s: C64) -> Result<ZetaEvaluation> {
    drum.validate()?;
    if let Some(cusp) = Cusp::from_region(&drum.region) {
        let origin = matches!(&drum.set, SetDescriptor::PointSet1D { points }
            if points.len() == 1 && points[0].to_f64() == 0.0);
        if !origin || drum.ambient_dim != 2 {
            return Err(Error::unsupported("cusp drums are evaluated relative to the origin in the plane"));
        }
        return cusp_relative_zeta(cusp, delta, s);
    }
    match (&drum.set, &drum.region) {
        (SetDescriptor::StringEndpoints { string }, Region::HalfOpenComplement) => {
            string_drum_zeta(string, delta, s)
        }
        (SetDescriptor::SierpinskiCarpet { level }, Region::Box(b))
            if b.lo.iter().all(|x| x.to_f64() == 0.0) && b.hi.iter().all(|x| x.to_f64() == 1.0) =>
        {
            let top = (*level).clamp(4, 7);
            let ladder = CarpetLadder::new(top - 3, top)?;
            ladder.relative_zeta(delta.unwrap_or(1.0), s, None)
        }
        (set, region) if drum.ambient_dim == 2 => {
            let res = match set {
                SetDescriptor::SierpinskiCarpet { level } => 3usize.pow((*level).clamp(3, 7)),
                _ => 729,
            };
            let (field, inside) = planar_drum_field(set, region, res)?;
            distance_zeta_2d(&field, inside.as_deref(), delta.unwrap_or(f64::INFINITY), s, None)
        }
        (set, _) => Err(Error::unsupported(format!(
            "no relative zeta evaluator for {} sets in this region",
            tube::variant_name(set)
        ))),
    }
}

/// Partial values of a relative zeta integral at increasing truncation, for abscissa verdicts.
///
/// Cusp drums are truncated at `u = ln(1/r)` in steps of 10; string drums after
/// each further 16 blocks of lengths.
pub fn relative_zeta_partials(drum: &RelativeFractalDrum, s: C64, steps: usize) -> Result<Vec<C64>> {
    drum.validate()?;
    if let Some(cusp) = Cusp::from_region(&drum.region) {
        let (u0, u1) = cusp_limits(cusp, None);
        let mut acc = if u1 > u0 { cusp_segment(cusp, s, u0, u1).0 } else { C64::new(0.0, 0.0) };
        let mut out = Vec::with_capacity(steps);
        let mut u = u1;
        for _ in 0..steps {
            acc += cusp_segment(cusp, s, u, u + 10.0).0;
            u += 10.0;
            out.push(acc);
        }
        return Ok(out);
    }
    match (&drum.set, &drum.region) {
        (SetDescriptor::StringEndpoints { string }, Region::HalfOpenComplement) => {
            nonzero_s(s)?;
            let mut acc = C64::new(0.0, 0.0);
            let mut out = Vec::with_capacity(steps);
            for (k, b) in string.blocks().take(16 * steps).enumerate() {
                acc += rpow(0.5 * b.length, s) * (2.0 * b.multiplicity) / s;
                if (k + 1) % 16 == 0 {
                    out.push(acc);
                }
            }
            Ok(out)
        }
        _ => Err(Error::unsupported("partial sums are available for cusp and string drums")),
    }
}

/// `e^z - 1` without cancellation for small `z`.
fn complex_exp_m1(z: C64) -> C64 {
    let (sin, half) = (z.im.sin(), (0.5 * z.im).sin());
    C64::new(
        z.re.exp_m1() * z.im.cos() - 2.0 * half * half,
        z.re.exp() * sin,
    )
}

/// Rule for the perturbation `c_j` in `sum_j (j + c_j)^(-s)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Perturbation {
    Zero,
    /// `c_j = coef * j^exponent`.
    Power { coef: f64, exponent: f64 },
}

impl Perturbation {
    pub fn value(&self, j: u64) -> f64 {
        match *self {
            Perturbation::Zero => 0.0,
            Perturbation::Power { coef, exponent } => coef * (j as f64).powf(exponent),
        }
    }
}

/// Explicit terms of the perturbed Riemann zeta before the tail expansion.
const PERTURBED_HEAD: u64 = 4000;

/// `zeta_R(s) + sum_j [(j + c_j)^(-s) - j^(-s)]` for `Re s > 1`.
///
/// The tail of the difference series is expanded as
/// `sum_k binom(-s,k) coef^k sum_{j > J} j^(-s - k(1 - exponent))`,
/// each inner sum closed by Euler-Maclaurin.
pub fn perturbed_riemann_zeta(beta: f64, rule: Perturbation, s: C64) -> Result<ZetaEvaluation> {
    if !(beta < 1.0) {
        return Err(Error::param("perturbation exponent beta must be < 1"));
    }
    if let Perturbation::Power { exponent, .. } = rule {
        if exponent > beta {
            return Err(Error::param(format!("|c_j| grows like j^{exponent}, faster than j^{beta}")));
        }
    }
    if s.re <= 1.0 {
        return Err(Error::diverge(format!(
            "the defining series diverges for Re s = {} <= 1",
            s.re
        )));
    }
    for j in 1..=PERTURBED_HEAD {
        if j as f64 + rule.value(j) <= 0.0 {
            return Err(Error::param(format!("j + c_j must be positive, fails at j = {j}")));
        }
    }
    let z = riemann_zeta(s)?;
    let (coef, exponent) = match rule {
        Perturbation::Zero => {
            return Ok(ZetaEvaluation::new(s, z, 1e-13 * z.norm(), Method::Series));
        }
        Perturbation::Power { coef, exponent } => (coef, exponent),
    };
    let mut diff = C64::new(0.0, 0.0);
    for j in 1..=PERTURBED_HEAD {
        let jf = j as f64;
        // (j + c)^{-s} - j^{-s} = j^{-s} ((1 + c/j)^{-s} - 1)
        let x = rule.value(j) / jf;
        let log1p = C64::new(x.ln_1p(), 0.0);
        let inner = complex_exp_m1(-s * log1p);
        diff += rpow(jf, -s) * inner;
    }
    let mut err = 0.0;
    let mut binom = C64::new(1.0, 0.0);
    let mut coef_k = 1.0;
    for k in 1..64u32 {
        binom *= (-s - (k - 1) as f64) / k as f64;
        coef_k *= coef;
        let w = s + k as f64 * (1.0 - exponent);
        let (h, e) = hurwitz_tail(w, PERTURBED_HEAD + 1)?;
        let term = binom * coef_k * h;
        diff += term;
        err += (binom * coef_k).norm() * e;
        if term.norm() < 1e-18 * (z + diff).norm() {
            err += term.norm();
            break;
        }
    }
    let value = z + diff;
    Ok(ZetaEvaluation::new(s, value, err + 1e-13 * z.norm() + 1e-15 * value.norm(), Method::Series))
}

/// Outcome of a Harvey-Polking integrability probe.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegrabilityProbe {
    pub gamma: f64,
    pub verdict: Verdict,
    pub partials: Vec<f64>,
}

/// Decides whether `int_{A_delta} d(x,A)^(-gamma) dx` is finite by refinement.
///
/// Cantor blocks are refined 16 levels at a time, string endpoints 16 blocks at a time.
pub fn harvey_polking_probe(set: &SetDescriptor, gamma: f64, refinements: usize) -> Result<IntegrabilityProbe> {
    set.validate()?;
    let done = |verdict, partials| Ok(IntegrabilityProbe { gamma, verdict, partials });
    if gamma == 0.0 || gamma < 0.0 && set.ambient_dim() == 1 {
        // bounded integrand on a bounded neighborhood
        return done(Verdict::Converges, vec![]);
    }
    if gamma >= set.ambient_dim() as f64 {
        return done(Verdict::Diverges, vec![]);
    }
    let s = C64::new(set.ambient_dim() as f64 - gamma, 0.0);
    match set {
        SetDescriptor::CantorBlock { params, .. } => {
            let partials: Vec<f64> = cantor_partial_sums(params, s, 16, refinements).iter().map(|z| z.re).collect();
            done(refinement_verdict(&partials, 1e-13), partials)
        }
        SetDescriptor::StringEndpoints { string } => {
            let drum = RelativeFractalDrum::string_drum(string.clone());
            let partials: Vec<f64> = relative_zeta_partials(&drum, s, refinements)?.iter().map(|z| z.re).collect();
            done(refinement_verdict(&partials, 1e-13), partials)
        }
        SetDescriptor::PointSet1D { .. } => done(Verdict::Converges, vec![]),
        SetDescriptor::IntervalUnion1D { intervals } => {
            let fat = intervals.iter().any(|iv| iv[1] > iv[0]);
            done(if fat { Verdict::Diverges } else { Verdict::Converges }, vec![])
        }
        other => Err(Error::unsupported(format!(
            "integrability probe is not available for {} sets",
            tube::variant_name(other)
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{cantor_endpoints, ExactReal, TubeSample};
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn single_point() {
        let p = PointSet1D { points: vec![0.0] };
        let z = distance_zeta_1d(LineSet::Points(&p), 1.0, c(1.0, 0.0)).unwrap();
        assert_relative_eq!(z.value.re, 2.0, epsilon = 1e-15);
        assert!(distance_zeta_1d(LineSet::Points(&p), 1.0, c(-0.5, 0.0)).is_err());
    }

    #[test]
    fn fat_set_interior() {
        let u = IntervalUnion1D { intervals: vec![[0.0, 1.0]] };
        assert!(matches!(
            distance_zeta_1d(LineSet::Intervals(&u), 1.0, c(0.9, 0.0)),
            Err(Error::Domain(_))
        ));
        let z = distance_zeta_1d(LineSet::Intervals(&u), 1.0, c(2.0, 0.0)).unwrap();
        assert_relative_eq!(z.value.re, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn geometric_string_endpoints_at_two() {
        // inner gaps give sum (l_j/2)^2 = 1/12
        let g = FractalString::geometric(0.5);
        let z = string_drum_zeta(&g, None, c(2.0, 0.0)).unwrap();
        assert_relative_eq!(z.value.re, 1.0 / 12.0, epsilon = 1e-15);
        let brute: f64 = (1..60).map(|j| 2.0 * (0.5f64.powi(j) / 2.0).powi(2) / 2.0).sum();
        assert_relative_eq!(brute, 1.0 / 12.0, epsilon = 1e-15);
    }

    #[test]
    fn geometric_zeta_examples() {
        let z = geometric_zeta(&FractalString::geometric(0.5), c(1.0, 0.0)).unwrap();
        assert_relative_eq!(z.value.re, 1.0, epsilon = 1e-14);
        let z = geometric_zeta(&FractalString::cantor(), c(1.0, 0.0)).unwrap();
        assert_relative_eq!(z.value.re, 1.0, epsilon = 1e-14);
        let z = geometric_zeta(&FractalString::Power { exponent: 2.0 }, c(1.0, 0.0)).unwrap();
        assert!((z.value.re - PI * PI / 6.0).abs() <= 1e-13 + z.est_error);
        assert!(matches!(
            geometric_zeta(&FractalString::Power { exponent: 2.0 }, c(0.45, 0.0)),
            Err(Error::Divergence(_))
        ));
        let z = geometric_zeta(&FractalString::Telescoping, c(1.0, 0.0)).unwrap();
        assert!((z.value.re - 1.0).abs() < 1e-12, "{}", z.value);
    }

    #[test]
    fn telescoping_zeta_against_brute_force() {
        let s = c(1.3, 2.0);
        let z = geometric_zeta(&FractalString::Telescoping, s).unwrap();
        let mut brute = c(0.0, 0.0);
        for j in 1..2_000_000u64 {
            brute += rpow(j as f64 * (j + 1) as f64, -s);
        }
        // remaining terms are below 2e6^{-1.6} / 1.6
        assert!((z.value - brute).norm() < 1e-9, "{} {}", z.value, brute);
    }

    #[test]
    fn cantor_level_sums_match_explicit_endpoints() {
        // the endpoint set of the level-L prefractal has the level gaps plus m^L gaps of width a^L
        let p = GeneralizedCantorParams::new(3, ExactReal::new(1, 5)).unwrap();
        let level = 7;
        let pre = cantor_endpoints(&p, level).unwrap();
        let pts: Vec<f64> = pre.intervals.iter().flat_map(|iv| [iv[0], iv[1]]).collect();
        let s = c(0.8, 3.0);
        let delta = 0.5;
        let explicit = distance_zeta_1d(LineSet::Points(&PointSet1D { points: pts }), delta, s).unwrap();
        let terms = cantor_level_terms(&p, delta, s, level);
        let within = rpow(0.5 * 0.2f64.powi(level as i32), s) * (2.0 * 3f64.powi(level as i32)) / s;
        let levelwise: C64 = terms.iter().sum::<C64>() + within + rpow(delta, s) * 2.0 / s;
        assert!((explicit.value - levelwise).norm() < 1e-12 * levelwise.norm());
    }

    #[test]
    fn cantor_numeric_diverges_below_dimension() {
        let p = GeneralizedCantorParams::ternary();
        let d = p.dimension();
        assert!(matches!(cantor_distance_zeta(&p, 0.25, c(d - 0.05, 0.0), 30), Err(Error::Divergence(_))));
        for ds in [0.05, 0.2] {
            assert_eq!(abscissa_verdict(&cantor_partial_sums(&p, c(d + ds, 0.0), 16, 6)), Verdict::Converges);
            assert_eq!(abscissa_verdict(&cantor_partial_sums(&p, c(d - ds, 0.0), 16, 6)), Verdict::Diverges);
        }
    }

    #[test]
    fn tube_zeta_constant_volume() {
        // |A_t| = 1 in N = 1, delta = 1: int_0^1 t^{s-2} dt = 1/(s-1)
        let grid = tube::geometric_grid(1.0, 0.9, 200);
        let samples = TubeSamples::new(
            1,
            grid.iter()
                .map(|&t| TubeSample { t, volume: 1.0, exact: true, error_bound: 0.0 })
                .collect(),
        )
        .unwrap();
        let model = TailModel::Constant { dim: 1.0, content: 1.0 };
        let s = c(1.7, 0.4);
        let z = tube_zeta_from_samples(&samples, 1.0, s, Some(&model)).unwrap();
        let exact = C64::new(1.0, 0.0) / (s - 1.0);
        assert!((z.value - exact).norm() <= z.est_error.max(1e-9), "{} {} {}", z.value, exact, z.est_error);
    }

    #[test]
    fn tube_zeta_refuses_unbounded_tail() {
        let grid = tube::geometric_grid(1.0, 0.5, 8);
        let samples = TubeSamples::new(
            1,
            grid.iter().map(|&t| TubeSample { t, volume: t, exact: true, error_bound: 0.0 }).collect(),
        )
        .unwrap();
        assert!(matches!(tube_zeta_from_samples(&samples, 1.0, c(1.5, 0.0), None), Err(Error::Domain(_))));
    }

    #[test]
    fn circle_tube_zeta() {
        let s = c(1.6, 0.7);
        let z = sphere_tube_zeta(2, 1.0, 0.5, s, 400).unwrap();
        let exact = rpow(0.5, s - 1.0) * (4.0 * PI) / (s - 1.0);
        assert!((z.value - exact).norm() < 1e-8, "{} {}", z.value, exact);
        assert!((z.value - exact).norm() <= z.est_error + 1e-12);
    }

    #[test]
    fn functional_equation_cases() {
        let cantor = SetDescriptor::cantor(GeneralizedCantorParams::ternary());
        let r = functional_equation_check(&cantor, 0.25, c(1.0 + 1e-9, 0.0)).unwrap_or_else(|e| panic!("{e}"));
        assert!(r.discrepancy <= 1e-6 && r.holds(), "{r:?}");
        let r = functional_equation_check(&cantor, 0.1, c(0.9, 4.0)).unwrap();
        assert!(r.holds(), "{r:?}");
        let circle = SetDescriptor::Sphere { dim: 2, radius: ExactReal::integer(1), center: vec![] };
        let r = functional_equation_check(&circle, 0.5, c(1.5, 0.0)).unwrap();
        assert!(r.discrepancy <= 1e-8 && r.holds(), "{r:?}");
        assert!(matches!(functional_equation_check(&circle, 0.5, c(2.0, 0.0)), Err(Error::Domain(_))));
        for n in 1..=3 {
            let r = ball_local_functional_equation(n, 1.0, 0.5, c(n as f64 + 0.3, 2.0)).unwrap();
            assert!(r.holds() && r.discrepancy < 1e-8, "{r:?}");
        }
    }

    #[test]
    fn cusp_values_blow_up_at_abscissa() {
        let drum = RelativeFractalDrum::cusp(ExactReal::integer(2));
        let z0 = relative_distance_zeta(&drum, None, c(0.0, 0.0)).unwrap();
        assert!(z0.value.re.is_finite() && z0.value.re > 0.0);
        let a = relative_distance_zeta(&drum, None, c(-0.9, 0.0)).unwrap().value.re;
        let b = relative_distance_zeta(&drum, None, c(-0.99, 0.0)).unwrap().value.re;
        assert!(b >= 5.0 * a && a > 0.0, "{a} {b}");
        assert!(matches!(relative_distance_zeta(&drum, None, c(-1.05, 0.0)), Err(Error::Divergence(_))));
    }

    #[test]
    fn cusp_at_s_zero_matches_area_integral() {
        // s = 2 gives the area of Omega: int_0^1 x^2 dx = 1/3
        let drum = RelativeFractalDrum::cusp(ExactReal::integer(2));
        let z = relative_distance_zeta(&drum, None, c(2.0, 0.0)).unwrap();
        assert!((z.value.re - 1.0 / 3.0).abs() < 1e-10, "{}", z.value);
    }

    #[test]
    fn cusp_abscissa_verdicts() {
        let drum = RelativeFractalDrum::cusp(ExactReal::integer(2));
        for (s, want) in [(-0.95, Verdict::Converges), (-1.05, Verdict::Diverges)] {
            let partials = relative_zeta_partials(&drum, c(s, 0.0), 8).unwrap();
            assert_eq!(abscissa_verdict(&partials), want, "s = {s}");
        }
    }

    #[test]
    fn exp_cusp_is_entire_in_practice() {
        let drum = RelativeFractalDrum::exp_cusp();
        for s in [-5.0, -1.0, 0.5, 2.0] {
            let z = relative_distance_zeta(&drum, None, c(s, 0.0)).unwrap();
            assert!(z.value.re.is_finite() && z.value.re > 0.0);
        }
    }

    #[test]
    fn perturbed_zeta_cases() {
        let z = perturbed_riemann_zeta(0.0, Perturbation::Zero, c(2.0, 0.0)).unwrap();
        assert!((z.value.re - PI * PI / 6.0).abs() < 1e-12);
        let rule = Perturbation::Power { coef: 1.0, exponent: -1.0 };
        let z = perturbed_riemann_zeta(0.0, rule, c(3.0, 0.0)).unwrap();
        let brute: f64 = (1..200_000u64).map(|j| (j as f64 + 1.0 / j as f64).powi(-3)).sum::<f64>()
            + 0.5 / 200_000f64.powi(2);
        assert!((z.value.re - brute).abs() < 1e-10, "{} {brute}", z.value.re);
        let h = 1e-4;
        let near = perturbed_riemann_zeta(0.0, rule, c(1.0 + h, 0.0)).unwrap();
        assert!((h * near.value.re - 1.0).abs() < 1e-3);
        assert!(perturbed_riemann_zeta(0.0, rule, c(1.0, 0.0)).is_err());
    }

    #[test]
    fn harvey_polking_cantor() {
        let set = SetDescriptor::cantor(GeneralizedCantorParams::ternary());
        assert_eq!(harvey_polking_probe(&set, 0.2, 6).unwrap().verdict, Verdict::Converges);
        assert_eq!(harvey_polking_probe(&set, 0.5, 6).unwrap().verdict, Verdict::Diverges);
        assert_eq!(harvey_polking_probe(&set, 0.0, 6).unwrap().verdict, Verdict::Converges);
    }

    #[test]
    fn raster_single_pixel_unit_disk() {
        // s = 2: integrand 1, so the value is the disk area within the extent
        let n = 201;
        let mut mask = vec![false; n * n];
        mask[(n / 2) * n + n / 2] = true;
        let h = 4.0 / n as f64;
        let field = DistanceField2D {
            nx: n,
            ny: n,
            hx: h,
            hy: h,
            extent: [-2.0, -2.0, 2.0, 2.0],
            grid: distance_transform(&mask, n, n, h, h),
        };
        let z = distance_zeta_2d(&field, None, 1.0, c(2.0, 0.0), None).unwrap();
        assert!((z.value.re - PI).abs() < 0.05, "{}", z.value.re);
    }

    #[test]
    fn string_drum_scaling() {
        let drum = RelativeFractalDrum::string_drum(FractalString::Power { exponent: 2.0 });
        let s = c(1.2, 0.5);
        let base = relative_distance_zeta(&drum, None, s).unwrap();
        let scaled = relative_distance_zeta(&drum.scaled(ExactReal::new(1, 2)), None, s).unwrap();
        let diff = (scaled.value - rpow(0.5, s) * base.value).norm();
        assert!(diff <= scaled.est_error + base.est_error + 1e-14, "{diff}");
    }

    proptest! {
        #[test]
        fn distance_zeta_conjugate_symmetry(re in 0.7f64..2.0, im in -10.0f64..10.0) {
            let p = GeneralizedCantorParams::ternary();
            let a = cantor_distance_zeta(&p, 0.25, c(re, im), 30).unwrap().value;
            let b = cantor_distance_zeta(&p, 0.25, c(re, -im), 30).unwrap().value;
            prop_assert!((a - b.conj()).norm() <= 1e-12 * a.norm());
        }

        #[test]
        fn geometric_zeta_scaling(re in 0.8f64..3.0, im in -5.0f64..5.0, lam in 0.1f64..4.0) {
            let s = c(re, im);
            let base = FractalString::cantor();
            let z = geometric_zeta(&base, s).unwrap().value;
            let zs = geometric_zeta(&base.scaled(lam), s).unwrap().value;
            prop_assert!((zs - rpow(lam, s) * z).norm() <= 1e-12 * zs.norm().max(1e-300));
        }
    }
}
