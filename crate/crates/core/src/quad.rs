//! One-dimensional quadrature: adaptive Gauss-Kronrod and composite Simpson.

use crate::C64;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: C64,
    pub error: f64,
    pub evaluations: usize,
}

fn kronrod15<F: Fn(f64) -> C64>(f: &F, a: f64, b: f64) -> (C64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kron += pair * WGK[j];
        if j % 2 == 1 {
            gauss += pair * WG[j / 2];
        }
    }
    let kron = kron * half;
    let gauss = gauss * half;
    (kron, (kron - gauss).norm())
}

/// Adaptive G7-K15 on `[a, b]` for a complex-valued integrand of a real variable.
///
/// Bisects the interval with the largest error estimate until the summed
/// estimate drops below `max(abs_tol, rel_tol * |I|)` or `max_intervals` is hit.
pub fn gauss_kronrod<F: Fn(f64) -> C64>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_intervals: usize,
) -> QuadResult {
    let mut intervals: Vec<(f64, f64, C64, f64)> = Vec::new();
    let (v, e) = kronrod15(&f, a, b);
    intervals.push((a, b, v, e));
    let mut evaluations = 15;
    loop {
        let total: C64 = intervals.iter().map(|iv| iv.2).sum();
        let err: f64 = intervals.iter().map(|iv| iv.3).sum();
        if err <= abs_tol.max(rel_tol * total.norm()) || intervals.len() >= max_intervals {
            return QuadResult {
                value: total,
                error: err,
                evaluations,
            };
        }
        let (worst, _) = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("nonempty");
        let (lo, hi, _, _) = intervals.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            // interval exhausted at machine precision
            let total: C64 = intervals.iter().map(|iv| iv.2).sum();
            let err: f64 = intervals.iter().map(|iv| iv.3).sum();
            return QuadResult {
                value: total,
                error: err,
                evaluations,
            };
        }
        let (v1, e1) = kronrod15(&f, lo, mid);
        let (v2, e2) = kronrod15(&f, mid, hi);
        evaluations += 30;
        intervals.push((lo, mid, v1, e1));
        intervals.push((mid, hi, v2, e2));
    }
}

/// Real-valued convenience wrapper around [`gauss_kronrod`].
pub fn gauss_kronrod_real<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> (f64, f64) {
    let r = gauss_kronrod(|x| C64::new(f(x), 0.0), a, b, abs_tol, rel_tol, 4000);
    (r.value.re, r.error)
}

/// Composite Simpson over uniformly spaced samples.
///
/// An odd number of intervals is closed with Simpson's 3/8 rule on the last
/// three. Needs at least two samples; two samples fall back to the trapezoid.
pub fn simpson_uniform(values: &[C64], h: f64) -> C64 {
    let n = values.len();
    match n {
        0 | 1 => C64::new(0.0, 0.0),
        2 => (values[0] + values[1]) * (0.5 * h),
        3 => (values[0] + values[1] * 4.0 + values[2]) * (h / 3.0),
        _ => {
            let intervals = n - 1;
            let (even_end, tail) = if intervals.is_multiple_of(2) {
                (n - 1, C64::new(0.0, 0.0))
            } else {
                let k = n - 4;
                let t = (values[k] + values[k + 1] * 3.0 + values[k + 2] * 3.0 + values[k + 3])
                    * (3.0 * h / 8.0);
                (k, t)
            };
            let mut s = values[0] + values[even_end];
            for (i, v) in values.iter().enumerate().take(even_end).skip(1) {
                s += *v * if i % 2 == 1 { 4.0 } else { 2.0 };
            }
            s * (h / 3.0) + tail
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronrod_polynomial_exact() {
        let r = gauss_kronrod(|x| C64::new(x.powi(5) - 3.0 * x, 0.0), 0.0, 2.0, 1e-14, 0.0, 50);
        assert!((r.value.re - (64.0 / 6.0 - 6.0)).abs() < 1e-12);
    }

    #[test]
    fn kronrod_endpoint_singularity() {
        // integral of x^{-1/2} over (0, 1] is 2
        let (v, _) = gauss_kronrod_real(|x| x.powf(-0.5), 0.0, 1.0, 1e-10, 1e-10);
        assert!((v - 2.0).abs() < 1e-8, "{v}");
    }

    #[test]
    fn kronrod_complex_oscillatory() {
        // int_0^pi e^{ix} dx = 2i
        let r = gauss_kronrod(|x| C64::new(0.0, x).exp(), 0.0, std::f64::consts::PI, 1e-13, 0.0, 100);
        assert!((r.value - C64::new(0.0, 2.0)).norm() < 1e-12);
    }

    #[test]
    fn simpson_handles_odd_interval_counts() {
        for n in [3usize, 4, 5, 8, 11] {
            let h = 1.0 / (n - 1) as f64;
            let vals: Vec<C64> = (0..n).map(|i| C64::new((i as f64 * h).powi(3), 0.0)).collect();
            let s = simpson_uniform(&vals, h);
            assert!((s.re - 0.25).abs() < 1e-14, "n={n} s={s}");
        }
    }
}
