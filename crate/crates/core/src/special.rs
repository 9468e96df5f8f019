//! Special functions shared by the evaluators.

use std::f64::consts::PI;

use crate::{Error, Result, C64};

/// Terms in the Borwein acceleration of the alternating eta series.
const ETA_TERMS: usize = 64;

/// `base^s` on the principal branch; `base` must be positive.
#[inline]
pub fn rpow(base: f64, s: C64) -> C64 {
    debug_assert!(base > 0.0);
    (s * base.ln()).exp()
}

/// Volume of the unit ball in `R^n`, `pi^(n/2) / Gamma(n/2 + 1)`.
pub fn unit_ball_volume(n: u32) -> f64 {
    // omega_n = 2 pi / n * omega_{n-2}
    let (mut w, start) = if n.is_multiple_of(2) { (1.0, 2) } else { (2.0, 3) };
    let mut k = start;
    while k <= n {
        w *= 2.0 * PI / k as f64;
        k += 2;
    }
    w
}

pub fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Riemann zeta function for `Re s > 0`, `s != 1`.
///
/// Evaluates the Dirichlet eta series with Borwein's binomial acceleration,
/// then divides by `1 - 2^(1-s)`.
pub fn riemann_zeta(s: C64) -> Result<C64> {
    if s.re <= 0.0 {
        return Err(Error::domain(format!(
            "riemann_zeta needs Re s > 0, got {s}"
        )));
    }
    if (s - 1.0).norm() < 1e-14 {
        return Err(Error::domain("riemann_zeta has a pole at s = 1"));
    }
    let n = ETA_TERMS;
    let mut d = Vec::with_capacity(n + 1);
    let mut term = 1.0 / n as f64;
    let mut acc = term;
    d.push(n as f64 * acc);
    for i in 0..n {
        term *= 4.0 * (n + i) as f64 * (n - i) as f64 / ((2 * i + 1) as f64 * (2 * i + 2) as f64);
        acc += term;
        d.push(n as f64 * acc);
    }
    let dn = d[n];
    let mut sum = C64::new(0.0, 0.0);
    for (k, dk) in d[..n].iter().enumerate() {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * (dk - dn) * rpow((k + 1) as f64, -s);
    }
    let denom = dn * (C64::new(1.0, 0.0) - rpow(2.0, C64::new(1.0, 0.0) - s));
    Ok(-sum / denom)
}

/// Terms summed explicitly before the Euler-Maclaurin remainder in [`hurwitz_tail`].
const TAIL_HEAD: u64 = 48;

/// `sum_{j >= n} j^(-w)` for `Re w > 1`, `n >= 1`, with an error bound.
///
/// Sums `TAIL_HEAD` terms directly and closes with Euler-Maclaurin through the
/// third derivative; the bound is the size of the next correction.
pub fn hurwitz_tail(w: C64, n: u64) -> Result<(C64, f64)> {
    if w.re <= 1.0 {
        return Err(Error::diverge(format!("sum of j^(-w) diverges for Re w <= 1, got w = {w}")));
    }
    let n = n.max(1);
    // push the cut far enough that the next Euler-Maclaurin term is tiny even for large |w|
    let cut = n + TAIL_HEAD.max((4.0 * w.norm()) as u64);
    let mut head = C64::new(0.0, 0.0);
    for j in n..cut {
        head += rpow(j as f64, -w);
    }
    let x = cut as f64;
    let fx = rpow(x, -w);
    let one = C64::new(1.0, 0.0);
    let integral = fx * x / (w - one);
    let d1 = -w * fx / x;
    let d3 = -w * (w + one) * (w + 2.0) * fx / (x * x * x);
    let em = integral + fx * 0.5 - d1 / 12.0 + d3 / 720.0;
    let next = (w * (w + one) * (w + 2.0) * (w + 3.0) * (w + 4.0)).norm() * fx.norm() / x.powi(5) / 30240.0;
    let value = head + em;
    Ok((value, next + 1e-16 * value.norm() * (cut - n) as f64))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_volumes() {
        assert!((unit_ball_volume(1) - 2.0).abs() < 1e-15);
        assert!((unit_ball_volume(2) - PI).abs() < 1e-15);
        assert!((unit_ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-14);
        assert!((unit_ball_volume(4) - PI * PI / 2.0).abs() < 1e-14);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), 10.0);
        assert_eq!(binomial(3, 0), 1.0);
        assert_eq!(binomial(3, 4), 0.0);
    }

    #[test]
    fn zeta_known_values() {
        let z2 = riemann_zeta(C64::new(2.0, 0.0)).unwrap();
        assert!((z2.re - PI * PI / 6.0).abs() < 1e-13);
        let z3 = riemann_zeta(C64::new(3.0, 0.0)).unwrap();
        assert!((z3.re - 1.202_056_903_159_594_2).abs() < 1e-13);
        let z4 = riemann_zeta(C64::new(4.0, 0.0)).unwrap();
        assert!((z4.re - PI.powi(4) / 90.0).abs() < 1e-13);
    }

    #[test]
    fn zeta_first_nontrivial_zero() {
        let z = riemann_zeta(C64::new(0.5, 14.134_725_141_734_693)).unwrap();
        assert!(z.norm() < 1e-9, "{z}");
    }

    #[test]
    fn zeta_near_pole_has_unit_residue() {
        let h = 1e-6;
        let z = riemann_zeta(C64::new(1.0 + h, 0.0)).unwrap();
        assert!((h * z.re - 1.0).abs() < 1e-5);
    }

    #[test]
    fn hurwitz_tail_matches_zeta() {
        let s = C64::new(2.5, 3.0);
        let (all, err) = hurwitz_tail(s, 1).unwrap();
        let z = riemann_zeta(s).unwrap();
        assert!((all - z).norm() < 1e-12 + err, "{all} {z}");
        let (t10, _) = hurwitz_tail(C64::new(2.0, 0.0), 11).unwrap();
        let head: f64 = (1..=10).map(|j| 1.0 / (j * j) as f64).sum();
        assert!((t10.re - (PI * PI / 6.0 - head)).abs() < 1e-13);
        assert!(hurwitz_tail(C64::new(1.0, 0.0), 1).is_err());
    }

    #[test]
    fn zeta_rejects_left_half_plane() {
        assert!(riemann_zeta(C64::new(-1.0, 0.0)).is_err());
        assert!(riemann_zeta(C64::new(1.0, 0.0)).is_err());
    }
}
