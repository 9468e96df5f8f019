//! Independent reference computations.
//!
//! Each oracle reaches its value by a route that shares no formula with the
//! closed forms it is used to check: explicit enumeration of a pre-fractal,
//! self-similar renormalization, brute-force sums or an antiderivative.

use std::f64::consts::PI;

use crate::model::{cantor_endpoints, FractalString, GeneralizedCantorParams, PointSet1D};
use crate::numeric::{distance_zeta_1d, LineSet};
use crate::spectral::EigenvalueModel;
use crate::special::rpow;
use crate::tube::interval_union_tube_volume;
use crate::{Error, Result, C64};

/// Distance zeta of `C^(m,a)` from the explicit level-`level` endpoint set.
///
/// The endpoints see every gap through `level` plus the `m^level` basic
/// intervals as gaps. Removing those and closing the rest by self-similarity,
/// `G = G_level / (1 - (m a^s)^level)`, gives the full gap sum for `delta >= c`.
pub fn cantor_renormalized_zeta(params: &GeneralizedCantorParams, delta: f64, s: C64, level: u32) -> Result<C64> {
    let c = params.gap_scale();
    if delta < c {
        return Err(Error::param(format!("renormalization needs delta >= {c}")));
    }
    let union = cantor_endpoints(params, level)?;
    let mut points: Vec<f64> = union.intervals.iter().flat_map(|iv| [iv[0], iv[1]]).collect();
    points.dedup();
    let z = distance_zeta_1d(LineSet::Points(&PointSet1D { points }), delta, s)?.value;
    let len = union.intervals[0][1] - union.intervals[0][0];
    let count = union.intervals.len() as f64;
    let basic = rpow(0.5 * len, s) * (2.0 * count) / s;
    let collars = rpow(delta, s) * 2.0 / s;
    let gaps = z - collars - basic;
    let q = (rpow(params.a(), s) * params.m as f64).powu(level);
    Ok(collars + gaps / (C64::new(1.0, 0.0) - q))
}

/// Lower and upper Minkowski contents of `C^(m,a)` by exact interval merging.
///
/// For `t >= c a^L` the `t`-neighborhood of the level-`L` pre-fractal equals
/// that of the Cantor set, so `|C_t| / t^(1-D)` is exact on one multiplicative
/// period. The extremes are located on a grid and polished by golden section.
pub fn cantor_contents_by_merging(params: &GeneralizedCantorParams, samples: usize) -> Result<(f64, f64)> {
    let level = 10;
    let union = cantor_endpoints(params, level)?;
    let d = params.dimension();
    let period = params.period();
    let c = params.gap_scale();
    // one period of u = ln(1/t), well inside the exact range
    let u0 = -(c * params.a().powi(3)).ln();
    let ratio = |u: f64| {
        let t = (-u).exp();
        interval_union_tube_volume(&union.intervals, t) / t.powf(1.0 - d)
    };
    let grid: Vec<(f64, f64)> = (0..samples)
        .map(|i| {
            let u = u0 + period * i as f64 / samples as f64;
            (u, ratio(u))
        })
        .collect();
    let h = period / samples as f64;
    let polish = |sign: f64| {
        let best = grid
            .iter()
            .copied()
            .max_by(|a, b| (sign * a.1).total_cmp(&(sign * b.1)))
            .expect("samples");
        let (mut a, mut b) = (best.0 - h, best.0 + h);
        let g = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..80 {
            let (x1, x2) = (b - g * (b - a), a + g * (b - a));
            if sign * ratio(x1) > sign * ratio(x2) {
                b = x2;
            } else {
                a = x1;
            }
        }
        let polished = ratio(0.5 * (a + b));
        if sign * polished > sign * best.1 {
            polished
        } else {
            best.1
        }
    };
    Ok((polish(-1.0), polish(1.0)))
}

/// Tube zeta of the unit-speed circle of radius `r` from the annulus area `4 pi r t`.
pub fn circle_tube_zeta(r: f64, delta: f64, s: C64) -> Result<C64> {
    if !(delta > 0.0 && delta <= r) {
        return Err(Error::param("annulus area is 4 pi r t only for t <= r"));
    }
    // int_0^delta t^(s-3) 4 pi r t dt
    Ok(rpow(delta, s - 1.0) * (4.0 * PI * r) / (s - 1.0))
}

/// `sum_{k <= k_max} sum_{blocks <= j_blocks} mult (k / l)^(-s)` with a bound on the omitted part.
pub fn string_double_sum(string: &FractalString, s: C64, k_max: u64, j_blocks: usize) -> Result<(C64, f64)> {
    let sigma = s.re;
    if sigma <= 1.0 {
        return Err(Error::diverge("double sum needs Re s > 1"));
    }
    let mut kept = C64::new(0.0, 0.0);
    let mut kept_mass = 0.0;
    for b in string.blocks().take(j_blocks) {
        kept += rpow(b.length, s) * b.multiplicity;
        kept_mass += b.length.powf(sigma) * b.multiplicity;
    }
    // omitted blocks, summed far enough that the remainder is negligible
    let omitted_mass: f64 = string
        .blocks()
        .skip(j_blocks)
        .take(4000)
        .map(|b| b.length.powf(sigma) * b.multiplicity)
        .sum();
    // compensated, smallest terms first
    let (mut head, mut comp) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
    for k in (1..=k_max).rev() {
        let y = rpow(k as f64, -s) - comp;
        let t = head + y;
        comp = (t - head) - y;
        head = t;
    }
    let k_tail = (k_max as f64).powf(1.0 - sigma) / (sigma - 1.0);
    let zeta_sigma: f64 = 1.0 + 1.0 / (sigma - 1.0);
    let bound = kept_mass * k_tail + omitted_mass * zeta_sigma + 8.0 * f64::EPSILON * (kept * head).norm() * (j_blocks as f64);
    Ok((kept * head, bound))
}

/// `sum mu^(-s/2)` over the first `k_terms` eigenvalues of a spray, enumerated copy by copy.
///
/// The bound integrates the leading Weyl law from the last eigenvalue, doubled.
pub fn spray_enumeration(base: &EigenvalueModel, gamma: f64, b: u32, s: C64, k_terms: usize) -> Result<(C64, f64)> {
    let model = EigenvalueModel::Spray {
        base: Box::new(base.clone()),
        gamma,
        b,
    };
    if model.ambient_dim() != 1 {
        return Err(Error::unsupported("spray enumeration oracle is one-dimensional"));
    }
    let ev = model.first_eigenvalues(k_terms)?;
    let mut sum = C64::new(0.0, 0.0);
    for &mu in ev.iter().rev() {
        sum += rpow(mu, -s * 0.5);
    }
    let vol = model.volume().ok_or_else(|| Error::param("spray volume is infinite"))?;
    let top = *ev.last().expect("nonempty");
    // N(mu) ~ vol sqrt(mu) / pi
    let tail = vol / PI * 0.5 * top.powf(0.5 - 0.5 * s.re) / (0.5 * s.re - 0.5);
    Ok((sum, 2.0 * tail + 1e-15 * sum.norm() * (k_terms as f64).sqrt()))
}

/// Brute-force `sum_{m, n <= n_max} (pi^2 (m^2/a^2 + n^2/b^2))^(-s/2)` with the omitted tail bound.
pub fn rectangle_double_sum(a: f64, b: f64, s: C64, n_max: u64) -> (C64, f64) {
    let mut sum = C64::new(0.0, 0.0);
    for m in (1..=n_max).rev() {
        for n in (1..=n_max).rev() {
            let mu = PI * PI * ((m as f64 / a).powi(2) + (n as f64 / b).powi(2));
            sum += rpow(mu, -s * 0.5);
        }
    }
    // every omitted term has mu >= pi^2 n_max^2 / max(a,b)^2; count them via the quarter annulus
    let sigma = s.re;
    let r0 = n_max as f64 / a.max(b);
    let tail = a * b * 0.5 * PI.powf(1.0 - sigma) * r0.powf(2.0 - sigma) / (sigma - 2.0) * 2.0;
    (sum, tail)
}

/// `ln |{|x| < t} ∩ {0 < y < e^(-1/x)}|` from the incomplete-gamma asymptotics,
/// `int_0^t e^(-1/x) dx = t^2 e^(-1/t) (1 - 2t + 6t^2 - ...)`; an upper bound for `t < 1/10`.
pub fn exp_cusp_log_area_bound(t: f64) -> f64 {
    -1.0 / t + 2.0 * t.ln() + (1.0 - 2.0 * t + 6.0 * t * t).ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::{cantor_distance_zeta_form, cantor_minkowski_contents};
    use crate::model::ExactReal;

    #[test]
    fn renormalized_cantor_matches_form() {
        let p = GeneralizedCantorParams::ternary();
        let f = cantor_distance_zeta_form(&p, 0.25).unwrap();
        for s in [C64::new(0.8, 0.0), C64::new(1.2, 7.0), C64::new(0.4, 1.0)] {
            let o = cantor_renormalized_zeta(&p, 0.25, s, 12).unwrap();
            assert!((o - f.eval(s)).norm() < 1e-10 * o.norm(), "{s}");
        }
        let p = GeneralizedCantorParams::new(3, ExactReal::new(1, 5)).unwrap();
        let f = cantor_distance_zeta_form(&p, 0.3).unwrap();
        let s = C64::new(0.9, -2.0);
        let o = cantor_renormalized_zeta(&p, 0.3, s, 8).unwrap();
        assert!((o - f.eval(s)).norm() < 1e-10 * o.norm());
    }

    #[test]
    fn merged_contents_match_formulas() {
        let p = GeneralizedCantorParams::ternary();
        let (lo, hi) = cantor_contents_by_merging(&p, 4000).unwrap();
        let (flo, fhi) = cantor_minkowski_contents(&p);
        assert!((lo - flo).abs() < 1e-7 * flo, "{lo} {flo}");
        assert!((hi - fhi).abs() < 1e-7 * fhi, "{hi} {fhi}");
    }

    #[test]
    fn double_sum_geometric() {
        let (v, bound) = string_double_sum(&FractalString::geometric(0.5), C64::new(2.0, 0.0), 100_000, 60).unwrap();
        assert!((v.re - PI * PI / 18.0).abs() <= bound);
        assert!(bound < 1e-4);
    }

    #[test]
    fn circle_oracle() {
        let z = circle_tube_zeta(1.0, 0.5, C64::new(2.0, 0.0)).unwrap();
        assert!((z.re - 2.0 * PI).abs() < 1e-14);
    }
}
