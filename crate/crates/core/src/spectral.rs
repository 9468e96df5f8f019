//! Dirichlet Laplacian spectra of desk-scale drums: intervals, rectangles,
//! fractal string drums and self-similar sprays.
//!
//! Eigenvalues `mu_k` are counted with multiplicity. The spectral zeta
//! function is `sum_k mu_k^(-s/2)`, so for a string drum with lengths `l_j` it
//! equals `pi^(-s) zeta(s) zeta_L(s)`. [`string_spectral_zeta`] uses the
//! frequency normalization `k / l_j` and drops the `pi^(-s)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::model::FractalString;
use crate::numeric::{geometric_zeta, Method, ZetaEvaluation};
use crate::special::{hurwitz_tail, riemann_zeta, rpow, unit_ball_volume};
use crate::{Error, Result, C64};

/// Relative accuracy assumed for the accelerated eta series.
const ZETA_REL: f64 = 1e-13;

/// A drum whose Dirichlet eigenvalues are known in closed form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", deny_unknown_fields)]
pub enum EigenvalueModel {
    /// `(0, l)`, eigenvalues `(k pi / l)^2`.
    Interval { length: f64 },
    /// `(0, a) x (0, b)`, eigenvalues `pi^2 (m^2 / a^2 + n^2 / b^2)`.
    Rectangle { a: f64, b: f64 },
    /// Disjoint intervals of the string's lengths.
    FractalStringDrum { string: FractalString },
    /// `b^k` copies of the base scaled by `gamma^k` for each `k >= 1`.
    Spray {
        base: Box<EigenvalueModel>,
        gamma: f64,
        b: u32,
    },
}

impl EigenvalueModel {
    pub fn validate(&self) -> Result<()> {
        match self {
            EigenvalueModel::Interval { length } if !(*length > 0.0 && length.is_finite()) => {
                Err(Error::param(format!("interval length must be positive, got {length}")))
            }
            EigenvalueModel::Rectangle { a, b } if !(*a > 0.0 && *b > 0.0 && a.is_finite() && b.is_finite()) => {
                Err(Error::param(format!("rectangle sides must be positive, got {a} x {b}")))
            }
            EigenvalueModel::FractalStringDrum { string } => string.validate(),
            EigenvalueModel::Spray { base, gamma, b } => {
                if !(*gamma > 0.0 && *gamma < 1.0) {
                    return Err(Error::param(format!("spray ratio must lie in (0, 1), got {gamma}")));
                }
                if *b < 2 {
                    return Err(Error::param(format!("spray multiplicity must be >= 2, got {b}")));
                }
                if matches!(**base, EigenvalueModel::Spray { .. }) {
                    return Err(Error::unsupported("nested sprays"));
                }
                base.validate()
            }
            _ => Ok(()),
        }
    }

    /// Dimension `N` of the ambient space.
    pub fn ambient_dim(&self) -> u32 {
        match self {
            EigenvalueModel::Interval { .. } | EigenvalueModel::FractalStringDrum { .. } => 1,
            EigenvalueModel::Rectangle { .. } => 2,
            EigenvalueModel::Spray { base, .. } => base.ambient_dim(),
        }
    }

    /// Lebesgue measure of the drum, `None` when infinite.
    pub fn volume(&self) -> Option<f64> {
        match self {
            EigenvalueModel::Interval { length } => Some(*length),
            EigenvalueModel::Rectangle { a, b } => Some(a * b),
            EigenvalueModel::FractalStringDrum { string } => {
                let v = string.total_length();
                v.is_finite().then_some(v)
            }
            EigenvalueModel::Spray { base, gamma, b } => {
                let q = *b as f64 * gamma.powi(self.ambient_dim() as i32);
                (q < 1.0).then(|| base.volume().map(|v| v * q / (1.0 - q))).flatten()
            }
        }
    }

    /// Abscissa of convergence of the spectral zeta function.
    pub fn abscissa(&self) -> f64 {
        let n = self.ambient_dim() as f64;
        match self {
            EigenvalueModel::FractalStringDrum { string } => n.max(string.dimension()),
            EigenvalueModel::Spray { base, gamma, b } => {
                base.abscissa().max((*b as f64).ln() / -gamma.ln())
            }
            _ => n,
        }
    }

    /// All eigenvalues `<= mu`, sorted, with multiplicity.
    pub fn eigenvalues_up_to(&self, mu: f64) -> Result<Vec<f64>> {
        self.validate()?;
        let count = counting_function(self, mu)?;
        if count > 50_000_000 {
            return Err(Error::Capacity {
                what: "eigenvalues",
                needed: count as u128,
                budget: 50_000_000,
            });
        }
        let mut out = Vec::with_capacity(count as usize);
        self.push_eigenvalues(mu, 1.0, 1, &mut out);
        out.sort_by(f64::total_cmp);
        Ok(out)
    }

    /// The first `k` eigenvalues with multiplicity.
    pub fn first_eigenvalues(&self, k: usize) -> Result<Vec<f64>> {
        let vol = self
            .volume()
            .ok_or_else(|| Error::param("first_eigenvalues needs a finite volume"))?;
        let n = self.ambient_dim() as i32;
        // invert the leading Weyl term, then grow until enough are found
        let c = (2.0 * PI).powi(-n) * unit_ball_volume(n as u32) * vol;
        let mut mu = ((k as f64 + 1.0) / c).powf(2.0 / n as f64) * 1.1 + 1.0;
        loop {
            let mut ev = self.eigenvalues_up_to(mu)?;
            if ev.len() >= k {
                ev.truncate(k);
                return Ok(ev);
            }
            mu *= 1.5;
        }
    }

    fn push_eigenvalues(&self, mu: f64, scale2: f64, copies: u64, out: &mut Vec<f64>) {
        match self {
            EigenvalueModel::Interval { length } => {
                let top = interval_count(*length, mu * scale2);
                for k in 1..=top {
                    let v = (k as f64 * PI / length).powi(2) / scale2;
                    out.extend(std::iter::repeat_n(v, copies as usize));
                }
            }
            EigenvalueModel::Rectangle { a, b } => {
                let x = mu * scale2 / (PI * PI);
                let mut m = 1u64;
                while (m as f64 / a).powi(2) < x {
                    let rest = x - (m as f64 / a).powi(2);
                    let top = (b * rest.sqrt()).floor() as u64 + 1;
                    for n in 1..=top {
                        let v = rect_value(m, n, *a, *b);
                        if v <= mu * scale2 {
                            out.extend(std::iter::repeat_n(v / scale2, copies as usize));
                        }
                    }
                    m += 1;
                }
            }
            EigenvalueModel::FractalStringDrum { string } => {
                let cutoff = PI / (mu * scale2).sqrt();
                for blk in string.blocks().take_while(|blk| blk.length >= cutoff) {
                    EigenvalueModel::Interval { length: blk.length }.push_eigenvalues(
                        mu,
                        scale2,
                        copies * blk.multiplicity as u64,
                        out,
                    );
                }
            }
            EigenvalueModel::Spray { base, gamma, b } => {
                let (mut g2, mut mult) = (gamma * gamma, *b as u64);
                let smallest = base.lowest_eigenvalue();
                while smallest / (scale2 * g2) <= mu {
                    base.push_eigenvalues(mu, scale2 * g2, copies * mult, out);
                    g2 *= gamma * gamma;
                    mult *= *b as u64;
                }
            }
        }
    }

    fn lowest_eigenvalue(&self) -> f64 {
        match self {
            EigenvalueModel::Interval { length } => (PI / length).powi(2),
            EigenvalueModel::Rectangle { a, b } => PI * PI * (1.0 / (a * a) + 1.0 / (b * b)),
            EigenvalueModel::FractalStringDrum { string } => (PI / string.first_length()).powi(2),
            EigenvalueModel::Spray { base, gamma, .. } => base.lowest_eigenvalue() / (gamma * gamma),
        }
    }
}

/// `#{k >= 1 : (k pi / l)^2 <= mu}`, exact up to the rounding of the comparison.
fn interval_count(l: f64, mu: f64) -> u64 {
    if mu <= 0.0 {
        return 0;
    }
    let mut k = (l * mu.sqrt() / PI).floor() as u64;
    while ((k + 1) as f64 * PI / l).powi(2) <= mu {
        k += 1;
    }
    while k > 0 && (k as f64 * PI / l).powi(2) > mu {
        k -= 1;
    }
    k
}

fn rect_value(m: u64, n: u64, a: f64, b: f64) -> f64 {
    PI * PI * ((m as f64 / a).powi(2) + (n as f64 / b).powi(2))
}

/// Number of eigenvalues `<= mu`, counted with multiplicity.
pub fn counting_function(model: &EigenvalueModel, mu: f64) -> Result<u64> {
    model.validate()?;
    if !(mu > 0.0) {
        return Err(Error::domain(format!("counting function needs mu > 0, got {mu}")));
    }
    Ok(count_scaled(model, mu))
}

fn count_scaled(model: &EigenvalueModel, mu: f64) -> u64 {
    match model {
        EigenvalueModel::Interval { length } => interval_count(*length, mu),
        EigenvalueModel::Rectangle { a, b } => {
            let x = mu / (PI * PI);
            let mut total = 0;
            let mut m = 1u64;
            while (m as f64 / a).powi(2) < x {
                let rest = x - (m as f64 / a).powi(2);
                let mut n = (b * rest.sqrt()).floor() as u64;
                while rect_value(m, n + 1, *a, *b) <= mu {
                    n += 1;
                }
                while n > 0 && rect_value(m, n, *a, *b) > mu {
                    n -= 1;
                }
                total += n;
                m += 1;
            }
            total
        }
        EigenvalueModel::FractalStringDrum { string } => {
            let cutoff = PI / mu.sqrt();
            string
                .blocks()
                .take_while(|blk| blk.length >= cutoff)
                .map(|blk| blk.multiplicity as u64 * interval_count(blk.length, mu))
                .sum()
        }
        EigenvalueModel::Spray { base, gamma, b } => {
            let (mut scaled, mut mult, mut total) = (mu * gamma * gamma, *b as u64, 0);
            while scaled >= base.lowest_eigenvalue() {
                total += mult * count_scaled(base, scaled);
                scaled *= gamma * gamma;
                mult *= *b as u64;
            }
            total
        }
    }
}

/// `sum_k mu_k^(-s/2)` from the first `k_terms` eigenvalues plus a tail.
///
/// Intervals close with an Euler-Maclaurin tail. Rectangles close with the
/// two-term Weyl law, and the bound uses the largest observed remainder near
/// the cut. String drums and sprays factor through the geometric zeta function.
pub fn spectral_zeta(model: &EigenvalueModel, s: C64, k_terms: usize) -> Result<ZetaEvaluation> {
    model.validate()?;
    let abscissa = model.abscissa();
    if s.re <= abscissa {
        return Err(Error::diverge(format!(
            "spectral zeta needs Re s > {abscissa}, got s = {s}"
        )));
    }
    let k_terms = k_terms.max(1);
    match model {
        EigenvalueModel::Interval { length } => {
            let base = rpow(PI / length, -s);
            let head: C64 = (1..=k_terms).map(|k| rpow(k as f64, -s)).sum();
            let (tail, err) = hurwitz_tail(s, k_terms as u64 + 1)?;
            let value = base * (head + tail);
            Ok(ZetaEvaluation {
                s,
                value,
                est_error: base.norm() * err + 4.0 * f64::EPSILON * value.norm() * (k_terms as f64).sqrt(),
                method: Method::Series,
            })
        }
        EigenvalueModel::Rectangle { a, b } => rectangle_zeta(*a, *b, s, k_terms),
        EigenvalueModel::FractalStringDrum { string } => {
            let z = string_spectral_zeta(string, s)?;
            let f = rpow(PI, -s);
            Ok(ZetaEvaluation {
                s,
                value: z.value * f,
                est_error: z.est_error * f.norm(),
                method: Method::Series,
            })
        }
        EigenvalueModel::Spray { base, gamma, b } => spray_spectral_zeta(base, *gamma, *b, s, k_terms),
    }
}

fn rectangle_zeta(a: f64, b: f64, s: C64, k_terms: usize) -> Result<ZetaEvaluation> {
    let model = EigenvalueModel::Rectangle { a, b };
    let ev = model.first_eigenvalues(k_terms)?;
    // take whole multiplicity classes so the cut sits between distinct values
    let cut = *ev.last().expect("nonempty");
    let ev = model.eigenvalues_up_to(cut)?;
    let half = -s * 0.5;
    let mut head = C64::new(0.0, 0.0);
    for &mu in ev.iter().rev() {
        head += (half * mu.ln()).exp();
    }
    let area = a * b / (4.0 * PI);
    let edge = -(a + b) / (2.0 * PI);
    let weyl = |mu: f64| area * mu + edge * mu.sqrt() + 0.25;
    let one = C64::new(1.0, 0.0);
    let f_cut = rpow(cut, half);
    // int_cut^inf mu^(-s/2) dN_w + boundary term from the remainder at the cut
    let smooth = f_cut * cut * area / (s * 0.5 - one) + f_cut * cut.sqrt() * (edge * 0.5) / (s * 0.5 - 0.5);
    let r_cut = ev.len() as f64 - weyl(cut);
    let tail = smooth - f_cut * r_cut;
    // sup of the remainder near the cut, sampled at the distinct eigenvalues
    let start = ev.partition_point(|&m| m < 0.25 * cut);
    let mut sup_r: f64 = r_cut.abs();
    let mut i = start;
    while i < ev.len() {
        let mut j = i;
        while j + 1 < ev.len() && ev[j + 1] == ev[i] {
            j += 1;
        }
        sup_r = sup_r.max((j as f64 + 1.0 - weyl(ev[i])).abs()).max((i as f64 - weyl(ev[i])).abs());
        i = j + 1;
    }
    let value = head + tail;
    let est_error = 2.0 * sup_r * cut.powf(-0.5 * s.re) * s.norm() / s.re
        + 4.0 * f64::EPSILON * head.norm() * (ev.len() as f64).sqrt();
    Ok(ZetaEvaluation {
        s,
        value,
        est_error,
        method: Method::Series,
    })
}

/// `zeta(s) zeta_L(s)`, the zeta function of the frequencies `k / l_j`.
pub fn string_spectral_zeta(string: &FractalString, s: C64) -> Result<ZetaEvaluation> {
    if s.re <= 1.0 {
        return Err(Error::diverge(format!("string spectral zeta needs Re s > 1, got {s}")));
    }
    let r = riemann_zeta(s)?;
    let g = geometric_zeta(string, s)?;
    let value = r * g.value;
    Ok(ZetaEvaluation {
        s,
        value,
        est_error: r.norm() * g.est_error + ZETA_REL * value.norm(),
        method: Method::Series,
    })
}

/// `(b gamma^s / (1 - b gamma^s)) zeta*_base(s)` for the self-similar spray.
pub fn spray_spectral_zeta(
    base: &EigenvalueModel,
    gamma: f64,
    b: u32,
    s: C64,
    k_terms: usize,
) -> Result<ZetaEvaluation> {
    let model = EigenvalueModel::Spray {
        base: Box::new(base.clone()),
        gamma,
        b,
    };
    model.validate()?;
    if s.re <= model.abscissa() {
        return Err(Error::diverge(format!(
            "spray spectral zeta needs Re s > {}, got s = {s}",
            model.abscissa()
        )));
    }
    let q = rpow(gamma, s) * b as f64;
    let factor = q / (C64::new(1.0, 0.0) - q);
    let z = spectral_zeta(base, s, k_terms)?;
    let value = factor * z.value;
    Ok(ZetaEvaluation {
        s,
        value,
        est_error: factor.norm() * z.est_error + 4.0 * f64::EPSILON * value.norm(),
        method: z.method,
    })
}

/// Remainder of the one-term Weyl law on a grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeylReport {
    /// `(mu, N(mu), R(mu))`.
    pub points: Vec<(f64, u64, f64)>,
    pub sup_abs_remainder: f64,
    /// Least-squares slope of `ln |R|` against `ln mu`.
    pub exponent_mu: Option<f64>,
    /// The same slope against the frequency `ln sqrt(mu)`, i.e. twice `exponent_mu`.
    pub exponent_frequency: Option<f64>,
    /// `d / 2` for the caller's `d`, in the units of `exponent_mu`.
    pub expected_mu: Option<f64>,
}

/// Computes `R(mu) = N(mu) - (2 pi)^(-N) omega_N |Omega| mu^(N/2)` on the grid.
pub fn weyl_check(model: &EigenvalueModel, mu_grid: &[f64], d: Option<f64>) -> Result<WeylReport> {
    let vol = model
        .volume()
        .ok_or_else(|| Error::param("Weyl check needs a drum of finite volume"))?;
    let n = model.ambient_dim();
    let c = (2.0 * PI).powi(-(n as i32)) * unit_ball_volume(n) * vol;
    let mut points = Vec::with_capacity(mu_grid.len());
    for &mu in mu_grid {
        let count = counting_function(model, mu)?;
        points.push((mu, count, count as f64 - c * mu.powf(0.5 * n as f64)));
    }
    let sup_abs_remainder = points.iter().map(|p| p.2.abs()).fold(0.0, f64::max);
    let fit: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.2.abs() > 1e-9)
        .map(|p| (p.0.ln(), p.2.abs().ln()))
        .collect();
    let exponent_mu = slope(&fit);
    Ok(WeylReport {
        points,
        sup_abs_remainder,
        exponent_mu,
        exponent_frequency: exponent_mu.map(|e| 2.0 * e),
        expected_mu: d.map(|d| 0.5 * d),
    })
}

fn slope(xy: &[(f64, f64)]) -> Option<f64> {
    if xy.len() < 3 {
        return None;
    }
    let n = xy.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / n;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = xy.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Logarithmic grid of `count` points on `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count.max(2) - 1) as f64).exp())
        .collect()
}

/// Residue of the spectral zeta function at `s = N` against the Weyl constant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralResidueReport {
    /// `(h, h zeta*(N + h))` for `h = 0.1, 0.01, 0.001`.
    pub samples: Vec<(f64, f64)>,
    pub estimate: f64,
    /// `N omega_N |Omega| / (2 pi)^N`.
    pub expected: f64,
    pub relative_error: f64,
    /// Difference of the two Richardson estimates; large values mean slow convergence.
    pub extrapolation_residual: f64,
    pub slow_convergence: bool,
}

/// Richardson extrapolation of `(s - N) zeta*(s)` as `s` decreases to `N`.
pub fn spectral_residue_check(model: &EigenvalueModel, k_terms: usize) -> Result<SpectralResidueReport> {
    let vol = model
        .volume()
        .ok_or_else(|| Error::param("residue check needs a drum of finite volume"))?;
    let n = model.ambient_dim();
    if model.abscissa() > n as f64 {
        return Err(Error::unsupported("residue check at N when the abscissa exceeds N"));
    }
    let expected = n as f64 * unit_ball_volume(n) * vol / (2.0 * PI).powi(n as i32);
    let hs = [0.1, 0.01, 0.001];
    let samples = hs
        .iter()
        .map(|&h| spectral_zeta(model, C64::new(n as f64 + h, 0.0), k_terms).map(|z| (h, h * z.value.re)))
        .collect::<Result<Vec<_>>>()?;
    let r1 = (10.0 * samples[1].1 - samples[0].1) / 9.0;
    let r2 = (10.0 * samples[2].1 - samples[1].1) / 9.0;
    let relative_error = (r2 - expected).abs() / expected;
    let extrapolation_residual = (r2 - r1).abs();
    Ok(SpectralResidueReport {
        samples,
        estimate: r2,
        expected,
        relative_error,
        extrapolation_residual,
        slow_convergence: extrapolation_residual > 1e-2 * expected.abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn interval(l: f64) -> EigenvalueModel {
        EigenvalueModel::Interval { length: l }
    }

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn interval_values() {
        let z = spectral_zeta(&interval(PI), c(4.0, 0.0), 10).unwrap();
        assert!((z.value.re - PI.powi(4) / 90.0).abs() < 1e-13);
        let z3 = spectral_zeta(&interval(1.0), c(3.0, 0.0), 100).unwrap();
        let zeta3 = 1.202_056_903_159_594_3;
        assert!((z3.value.re - zeta3 / PI.powi(3)).abs() < 1e-14);
        assert!(z3.est_error < 1e-12);
        assert!(matches!(spectral_zeta(&interval(1.0), c(1.0, 2.0), 10), Err(Error::Divergence(_))));
    }

    #[test]
    fn rectangle_against_double_sum() {
        let model = EigenvalueModel::Rectangle { a: 1.0, b: 1.0 };
        let s = c(5.0, 0.0);
        let z = spectral_zeta(&model, s, 20_000).unwrap();
        let mut direct = 0.0;
        for m in 1..3000u64 {
            for n in 1..3000u64 {
                direct += (PI * PI * (m * m + n * n) as f64).powf(-2.5);
            }
        }
        assert!((z.value.re - direct).abs() <= z.est_error + 1e-12, "{} vs {direct}", z.value.re);
        assert!(z.est_error < 1e-9);
    }

    #[test]
    fn string_values() {
        let two = c(2.0, 0.0);
        let g = string_spectral_zeta(&FractalString::geometric(0.5), two).unwrap();
        assert!((g.value.re - PI * PI / 18.0).abs() < 1e-12);
        let cs = string_spectral_zeta(&FractalString::cantor(), two).unwrap();
        assert!((cs.value.re - PI * PI / 42.0).abs() < 1e-12);
        assert!(string_spectral_zeta(&FractalString::cantor(), c(1.0, 0.0)).is_err());
    }

    #[test]
    fn spray_example() {
        let z = spray_spectral_zeta(&interval(1.0), 1.0 / 3.0, 2, c(4.0, 0.0), 100).unwrap();
        let expected = 2.0 / 79.0 / 90.0;
        assert!((z.value.re - expected).abs() < 1e-15);
        let far = spray_spectral_zeta(&interval(1.0), 1.0 / 3.0, 2, c(40.0, 0.0), 100).unwrap();
        assert!(far.value.norm() < 1e-30);
    }

    #[test]
    fn counting_examples() {
        assert_eq!(counting_function(&interval(PI), 10.0).unwrap(), 3);
        let sq = EigenvalueModel::Rectangle { a: 1.0, b: 1.0 };
        // enumerate the lattice directly
        let mu = 5.0 * PI * PI;
        let direct = (1..10u64)
            .flat_map(|m| (1..10u64).map(move |n| (m, n)))
            .filter(|&(m, n)| PI * PI * (m * m + n * n) as f64 <= mu * (1.0 + 1e-12))
            .count() as u64;
        assert_eq!(counting_function(&sq, mu * (1.0 + 1e-12)).unwrap(), direct);
        assert_eq!(direct, 3);
        assert!(counting_function(&sq, 0.0).is_err());
    }

    #[test]
    fn eigenvalue_lists_are_consistent() {
        let models = [
            interval(2.0),
            EigenvalueModel::Rectangle { a: 1.0, b: 2.0 },
            EigenvalueModel::FractalStringDrum { string: FractalString::cantor() },
            EigenvalueModel::Spray { base: Box::new(interval(1.0)), gamma: 1.0 / 3.0, b: 2 },
        ];
        for m in &models {
            let ev = m.first_eigenvalues(500).unwrap();
            assert_eq!(ev.len(), 500);
            assert!(ev.windows(2).all(|w| w[0] <= w[1]));
            for (k, &mu) in ev.iter().enumerate() {
                // scaled copies round differently on the two paths
                assert!(counting_function(m, mu * (1.0 + 1e-12)).unwrap() as usize > k, "{m:?} k={k} mu={mu}");
            }
        }
    }

    #[test]
    fn interval_weyl_remainder_is_bounded() {
        let grid = log_grid(1.0, 1e6, 1000);
        let r = weyl_check(&interval(1.0), &grid, None).unwrap();
        assert!(r.sup_abs_remainder <= 1.0);
    }

    #[test]
    fn rectangle_weyl_exponent() {
        let sq = EigenvalueModel::Rectangle { a: 1.0, b: 1.0 };
        let r = weyl_check(&sq, &log_grid(1e3, 1e7, 200), Some(1.0)).unwrap();
        let e = r.exponent_mu.unwrap();
        assert!(e <= 0.6 && e > 0.4, "exponent {e}");
    }

    #[test]
    fn residues() {
        let r = spectral_residue_check(&interval(1.0), 1000).unwrap();
        assert!(r.relative_error < 1e-4, "{r:?}");
        assert!((r.expected - 1.0 / PI).abs() < 1e-15);
        let sq = EigenvalueModel::Rectangle { a: 1.0, b: 1.0 };
        let r = spectral_residue_check(&sq, 20_000).unwrap();
        assert!((r.expected - 1.0 / (2.0 * PI)).abs() < 1e-15);
        assert!(r.relative_error < 0.02, "{r:?}");
    }

    proptest! {
        #[test]
        fn counting_is_monotone(l in 0.1f64..10.0, mu in 1.0f64..1e5, step in 0.0f64..100.0) {
            let m = interval(l);
            prop_assert!(counting_function(&m, mu).unwrap() <= counting_function(&m, mu + step).unwrap());
            let r = EigenvalueModel::Rectangle { a: l, b: 1.0 };
            prop_assert!(counting_function(&r, mu).unwrap() <= counting_function(&r, mu + step).unwrap());
        }

        #[test]
        fn factorization_matches_double_sum(re in 1.5f64..4.0, im in -5.0f64..5.0) {
            let s = c(re, im);
            let z = string_spectral_zeta(&FractalString::geometric(0.5), s).unwrap();
            // sum over k <= K of k^-s, then l_j^s exactly by the geometric series
            let k_max = 20_000u64;
            let head: C64 = (1..=k_max).map(|k| rpow(k as f64, -s)).sum();
            let (tail, _) = hurwitz_tail(s, k_max + 1).unwrap();
            let q = rpow(0.5, s);
            let g = q / (C64::new(1.0, 0.0) - q);
            prop_assert!((z.value - (head + tail) * g).norm() < 1e-10 * z.value.norm().max(1.0));
        }
    }
}
