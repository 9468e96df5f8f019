//! Unions of generalized Cantor sets with a common dimension and rationally
//! independent multiplicative periods.
//!
//! Component `i` is `C^(m_i, a_i)` with `a_i = m_i^(-1/D)`, so every
//! component has dimension exactly `D` and period `T_i = ln(m_i) / D`. The
//! periods are rationally independent exactly when the prime exponent vectors
//! of the `m_i` are, which is decided here by integer row reduction.

use std::f64::consts::PI;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::forms::{cantor_distance_zeta_form, MeromorphicForm};
use crate::model::{BoxRegion, ExactReal, GeneralizedCantorParams, PlacedMember, SetDescriptor};
use crate::special::rpow;
use crate::{Error, Result, C64};

/// Prime exponents of an integer over a shared prime basis.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExponentVector {
    pub primes: Vec<u64>,
    pub exponents: Vec<u32>,
}

impl ExponentVector {
    /// The integer `prod p_j^(alpha_j)`.
    pub fn value(&self) -> u128 {
        self.primes
            .iter()
            .zip(&self.exponents)
            .map(|(&p, &e)| (p as u128).pow(e))
            .product()
    }
}

fn prime_factors(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n.is_multiple_of(p) {
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Factors each `m_i` by trial division over the union of their prime factors.
pub fn exponent_vectors(m_list: &[u64]) -> Result<Vec<ExponentVector>> {
    if let Some(m) = m_list.iter().find(|&&m| m < 2) {
        return Err(Error::param(format!("every m_i must be at least 2, got {m}")));
    }
    let factored: Vec<Vec<(u64, u32)>> = m_list.iter().map(|&m| prime_factors(m)).collect();
    let mut primes: Vec<u64> = factored.iter().flatten().map(|f| f.0).collect();
    primes.sort_unstable();
    primes.dedup();
    Ok(factored
        .iter()
        .map(|f| ExponentVector {
            primes: primes.clone(),
            exponents: primes
                .iter()
                .map(|p| f.iter().find(|x| x.0 == *p).map_or(0, |x| x.1))
                .collect(),
        })
        .collect())
}

/// Witness for the rank of a family of exponent vectors.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RankCertificate {
    /// Row echelon form with a pivot in every row.
    FullRank { echelon: Vec<Vec<i128>> },
    /// Integers `c_i`, not all zero, with `sum_i c_i e_i = 0`.
    Dependency { coefficients: Vec<i128> },
}

fn reduce_row(row: &mut [i128]) {
    let g = row.iter().fold(0i128, |g, &x| g.gcd(&x));
    if g > 1 {
        row.iter_mut().for_each(|x| *x /= g);
    }
}

/// Decides rational independence of the vectors exactly.
///
/// Eliminates on the augmented matrix `[E | I]` with integer row operations;
/// a row of `E` that vanishes carries its dependency in the identity block.
pub fn rationally_independent(vectors: &[ExponentVector]) -> Result<(bool, RankCertificate)> {
    let Some(first) = vectors.first() else {
        return Err(Error::param("need at least one exponent vector"));
    };
    let k = first.primes.len();
    if vectors.iter().any(|v| v.primes != first.primes) {
        return Err(Error::param("exponent vectors must share a prime basis"));
    }
    let n = vectors.len();
    let mut rows: Vec<Vec<i128>> = vectors
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let mut r: Vec<i128> = v.exponents.iter().map(|&e| e as i128).collect();
            r.extend((0..n).map(|j| i128::from(i == j)));
            r
        })
        .collect();
    let mut pivot_row = 0;
    for col in 0..k {
        let Some(p) = (pivot_row..n).find(|&r| rows[r][col] != 0) else {
            continue;
        };
        rows.swap(pivot_row, p);
        for r in 0..n {
            if r != pivot_row && rows[r][col] != 0 {
                let (a, b) = (rows[pivot_row][col], rows[r][col]);
                let g = a.gcd(&b);
                let (fa, fb) = (a / g, b / g);
                let pivot = rows[pivot_row].clone();
                for (x, y) in rows[r].iter_mut().zip(&pivot) {
                    *x = *x * fa - y * fb;
                }
                reduce_row(&mut rows[r]);
            }
        }
        pivot_row += 1;
        if pivot_row == n {
            break;
        }
    }
    if let Some(zero) = rows.iter().find(|r| r[..k].iter().all(|&x| x == 0)) {
        let mut coefficients = zero[k..].to_vec();
        reduce_row(&mut coefficients);
        if coefficients.iter().find(|&&x| x != 0).is_some_and(|&x| x < 0) {
            coefficients.iter_mut().for_each(|x| *x = -*x);
        }
        return Ok((false, RankCertificate::Dependency { coefficients }));
    }
    Ok((
        true,
        RankCertificate::FullRank {
            echelon: rows.iter().map(|r| r[..k].to_vec()).collect(),
        },
    ))
}

/// One Cantor component of an assembly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub m: u64,
    pub params: GeneralizedCantorParams,
    /// Unit placement interval `[lo, lo + 1]`.
    pub placement: [ExactReal; 2],
    /// `T_i = ln(m_i) / D`.
    pub period: f64,
}

/// Union of Cantor sets of a common dimension with independent periods.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuasiperiodicAssembly {
    pub common_dim: ExactReal,
    pub components: Vec<Component>,
    pub exponent_vectors: Vec<ExponentVector>,
    pub certificate: RankCertificate,
    /// Spacings `2 pi / T_i` of the principal pole lattices on `Re s = D`.
    pub lattice_spacings: Vec<f64>,
    pub label: String,
}

/// Builds the assembly for `m_list` at dimension `dim`, refusing rationally dependent periods.
///
/// Component `i` (from 0) is placed in `[2i, 2i + 1]`, leaving unit gaps.
pub fn build_assembly(dim: ExactReal, m_list: &[u64]) -> Result<QuasiperiodicAssembly> {
    if m_list.len() < 2 {
        return Err(Error::param("an assembly needs at least two components"));
    }
    let d = dim.to_f64();
    if !(d > 0.0 && d < 1.0) {
        return Err(Error::param(format!("common dimension must lie in (0, 1), got {dim}")));
    }
    let vectors = exponent_vectors(m_list)?;
    let (independent, certificate) = rationally_independent(&vectors)?;
    if !independent {
        let RankCertificate::Dependency { coefficients } = certificate else {
            unreachable!("dependent families carry a dependency")
        };
        return Err(Error::IndependenceViolation { certificate: coefficients });
    }
    let components = m_list
        .iter()
        .enumerate()
        .map(|(i, &m)| {
            let m32 = u32::try_from(m).map_err(|_| Error::param(format!("m = {m} is too large")))?;
            let params = GeneralizedCantorParams::with_dimension(m32, dim)?;
            if !(params.a() < 1.0 / m as f64) {
                return Err(Error::param(format!("a = {} is not below 1/m for m = {m}", params.a())));
            }
            let lo = 2 * i as i64;
            Ok(Component {
                m,
                params,
                placement: [ExactReal::integer(lo as i128), ExactReal::integer(lo as i128 + 1)],
                period: (m as f64).ln() / d,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let lattice_spacings = components.iter().map(|c| 2.0 * PI / c.period).collect();
    let n = components.len();
    Ok(QuasiperiodicAssembly {
        common_dim: dim,
        components,
        exponent_vectors: vectors,
        certificate,
        lattice_spacings,
        label: format!("transcendentally {n}-quasiperiodic (conditional on the transcendence theorem)"),
    })
}

/// Width of the gaps between consecutive placements.
const GAP: f64 = 1.0;

impl QuasiperiodicAssembly {
    pub fn dimension(&self) -> f64 {
        self.common_dim.to_f64()
    }

    /// The assembly as a union of placed Cantor blocks.
    pub fn descriptor(&self) -> SetDescriptor {
        SetDescriptor::UnionOfDescriptors {
            members: self
                .components
                .iter()
                .map(|c| PlacedMember {
                    set: SetDescriptor::CantorBlock {
                        params: c.params,
                        offset: c.placement[0],
                        scale: ExactReal::integer(1),
                    },
                    placement: BoxRegion {
                        lo: vec![c.placement[0]],
                        hi: vec![c.placement[1]],
                    },
                })
                .collect(),
        }
    }

    /// Smallest `delta` for which every component closed form applies.
    pub fn min_delta(&self) -> f64 {
        self.components
            .iter()
            .map(|c| c.params.gap_scale())
            .fold(0.0, f64::max)
    }
}

/// Closed form of the distance zeta function of the assembly.
///
/// Sum of the component Cantor forms plus, for each unit gap, the entire
/// correction `(2 min(1/2, delta)^s - 2 delta^s) / s` replacing the two facing collars.
pub fn assembly_zeta_form(assembly: &QuasiperiodicAssembly, delta: f64) -> Result<MeromorphicForm> {
    if delta < assembly.min_delta() {
        return Err(Error::param(format!(
            "delta = {delta} is below the largest component gap scale {}",
            assembly.min_delta()
        )));
    }
    let mut form: Option<MeromorphicForm> = None;
    for c in &assembly.components {
        let f = cantor_distance_zeta_form(&c.params, delta)?;
        form = Some(match form {
            None => f,
            Some(acc) => acc.plus(f),
        });
    }
    let gaps = (assembly.components.len() - 1) as f64;
    let half = (0.5 * GAP).min(delta);
    let (lh, ld) = (half.ln(), delta.ln());
    let correction = move |s: C64| {
        if s.norm() < 1e-8 {
            C64::new(2.0 * gaps * (lh - ld), 0.0)
        } else {
            (rpow(half, s) - rpow(delta, s)) * (2.0 * gaps) / s
        }
    };
    let mut form = form.expect("at least two components").plus_entire(correction);
    form.name = format!("{} assembly distance zeta", assembly.label);
    Ok(form)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::distance_zeta;
    use proptest::prelude::*;

    fn ev(m: &[u64]) -> Vec<ExponentVector> {
        exponent_vectors(m).unwrap()
    }

    #[test]
    fn factorization_examples() {
        let v = ev(&[2, 3]);
        assert_eq!(v[0].primes, vec![2, 3]);
        assert_eq!(v[0].exponents, vec![1, 0]);
        assert_eq!(v[1].exponents, vec![0, 1]);
        let v = ev(&[6, 12]);
        assert_eq!(v[0].exponents, vec![1, 1]);
        assert_eq!(v[1].exponents, vec![2, 1]);
        let v = ev(&[2, 4]);
        assert_eq!(v[0].primes, vec![2]);
        assert_eq!(v[1].exponents, vec![2]);
        assert!(exponent_vectors(&[1, 2]).is_err());
    }

    #[test]
    fn independence_examples() {
        assert!(rationally_independent(&ev(&[2, 3])).unwrap().0);
        let (ok, cert) = rationally_independent(&ev(&[2, 4])).unwrap();
        assert!(!ok);
        assert_eq!(cert, RankCertificate::Dependency { coefficients: vec![2, -1] });
        let (ok, cert) = rationally_independent(&ev(&[6, 12, 18])).unwrap();
        assert!(!ok);
        let RankCertificate::Dependency { coefficients } = cert else { panic!() };
        // check the dependency directly
        let v = ev(&[6, 12, 18]);
        for j in 0..v[0].primes.len() {
            let s: i128 = (0..3).map(|i| coefficients[i] * v[i].exponents[j] as i128).sum();
            assert_eq!(s, 0);
        }
        assert!(rationally_independent(&ev(&[2, 3, 5])).unwrap().0);
    }

    #[test]
    fn build_examples() {
        let a = build_assembly(ExactReal::new(1, 2), &[2, 3]).unwrap();
        assert!((a.components[0].params.a() - 0.25).abs() < 1e-15);
        assert!((a.components[1].params.a() - 1.0 / 9.0).abs() < 1e-15);
        assert!((a.components[0].period - 4f64.ln()).abs() < 1e-14);
        assert!((a.components[1].period - 9f64.ln()).abs() < 1e-14);
        assert!(matches!(
            build_assembly(ExactReal::new(1, 2), &[2, 4]),
            Err(Error::IndependenceViolation { .. })
        ));
        let b = build_assembly("0.4".parse().unwrap(), &[2, 3, 5]).unwrap();
        assert_eq!(b.components.len(), 3);
        assert_eq!(b.components[2].placement[0], ExactReal::integer(4));
    }

    #[test]
    fn assembly_form_matches_numeric_route() {
        let a = build_assembly(ExactReal::new(1, 2), &[2, 3]).unwrap();
        let delta = 0.3;
        let form = assembly_zeta_form(&a, delta).unwrap();
        for s in [C64::new(0.7, 0.0), C64::new(0.9, 3.0)] {
            let numeric = distance_zeta(&a.descriptor(), delta, s).unwrap();
            let rel = (form.eval(s) - numeric.value).norm() / numeric.value.norm();
            assert!(rel < 1e-8, "s={s} rel={rel}");
        }
        let d = C64::new(0.5, 0.0);
        let sum: C64 = a
            .components
            .iter()
            .map(|c| cantor_distance_zeta_form(&c.params, delta).unwrap().residue(d).unwrap())
            .sum();
        assert!((form.residue(d).unwrap() - sum).norm() < 1e-14);
    }

    proptest! {
        #[test]
        fn independence_is_permutation_invariant(ms in proptest::collection::vec(2u64..200, 2..5), rot in 0usize..4) {
            let mut permuted = ms.clone();
            let r = rot % permuted.len();
            permuted.rotate_left(r);
            let a = rationally_independent(&ev(&ms)).unwrap().0;
            let b = rationally_independent(&ev(&permuted)).unwrap().0;
            prop_assert_eq!(a, b);
        }

        #[test]
        fn dependencies_are_genuine(ms in proptest::collection::vec(2u64..100, 2..6)) {
            let v = ev(&ms);
            if let (false, RankCertificate::Dependency { coefficients }) = rationally_independent(&v).unwrap() {
                prop_assert!(coefficients.iter().any(|&c| c != 0));
                for j in 0..v[0].primes.len() {
                    let s: i128 = coefficients.iter().zip(&v).map(|(c, e)| c * e.exponents[j] as i128).sum();
                    prop_assert_eq!(s, 0);
                }
                // the product of m_i^(c_i) is 1
                let log: f64 = coefficients.iter().zip(&ms).map(|(c, m)| *c as f64 * (*m as f64).ln()).sum();
                prop_assert!(log.abs() < 1e-9);
            }
        }

        #[test]
        fn assembly_form_conjugate_symmetric(re in 0.55f64..2.0, im in -15.0f64..15.0) {
            let a = build_assembly(ExactReal::new(1, 2), &[2, 3]).unwrap();
            let f = assembly_zeta_form(&a, 0.5).unwrap();
            let s = C64::new(re, im);
            prop_assert!((f.eval(s.conj()) - f.eval(s).conj()).norm() <= 1e-10 * f.eval(s).norm());
        }
    }
}
