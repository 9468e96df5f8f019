//! Closed-form meromorphic continuations with their poles and residues.
//!
//! Each form carries an evaluator valid on the whole plane away from its
//! poles, an explicit pole set (isolated points plus vertical arithmetic
//! progressions) and an analytic residue rule.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::model::{FractalString, GeneralizedCantorParams};
use crate::special::{binomial, rpow, unit_ball_volume};
use crate::{Error, Result, C64};

/// Rectangle `re[0] <= Re s <= re[1]`, `im[0] <= Im s <= im[1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub re: [f64; 2],
    pub im: [f64; 2],
}

impl Window {
    pub fn new(re: [f64; 2], im: [f64; 2]) -> Result<Self> {
        if !(re[0] < re[1] && im[0] < im[1]) {
            return Err(Error::param("window bounds must be increasing"));
        }
        Ok(Window { re, im })
    }

    pub fn contains(&self, s: C64) -> bool {
        s.re >= self.re[0] && s.re <= self.re[1] && s.im >= self.im[0] && s.im <= self.im[1]
    }
}

/// Simple poles at `real + i spacing k`, `k` in `Z`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoleLattice {
    pub real: f64,
    pub spacing: f64,
}

impl PoleLattice {
    pub fn pole(&self, k: i64) -> C64 {
        C64::new(self.real, self.spacing * k as f64)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pole {
    pub location: C64,
    pub order: u32,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PoleSet {
    pub isolated: Vec<Pole>,
    pub lattices: Vec<PoleLattice>,
}

impl PoleSet {
    /// Poles inside `window`, sorted by imaginary then real part.
    pub fn in_window(&self, window: &Window) -> Vec<Pole> {
        let mut out: Vec<Pole> = self
            .isolated
            .iter()
            .copied()
            .filter(|p| window.contains(p.location))
            .collect();
        for l in &self.lattices {
            if l.real < window.re[0] || l.real > window.re[1] {
                continue;
            }
            let lo = (window.im[0] / l.spacing).ceil() as i64;
            let hi = (window.im[1] / l.spacing).floor() as i64;
            for k in lo..=hi {
                let location = l.pole(k);
                if !out.iter().any(|p| (p.location - location).norm() < 1e-12) {
                    out.push(Pole { location, order: 1 });
                }
            }
        }
        out.sort_by(|a, b| {
            a.location
                .im
                .total_cmp(&b.location.im)
                .then(a.location.re.total_cmp(&b.location.re))
        });
        out
    }

    /// Order of the pole at `s`, if `s` is one.
    pub fn order_at(&self, s: C64) -> Option<u32> {
        let tol = 1e-9 * s.norm().max(1.0);
        if let Some(p) = self.isolated.iter().find(|p| (p.location - s).norm() <= tol) {
            return Some(p.order);
        }
        self.lattices
            .iter()
            .find(|l| {
                let k = (s.im / l.spacing).round();
                (s - C64::new(l.real, l.spacing * k)).norm() <= tol
            })
            .map(|_| 1)
    }

    fn union(mut self, other: &PoleSet) -> PoleSet {
        for p in &other.isolated {
            if self.order_at(p.location).is_none() {
                self.isolated.push(*p);
            }
        }
        for l in &other.lattices {
            if !self.lattices.contains(l) {
                self.lattices.push(*l);
            }
        }
        self
    }
}

type Eval = Arc<dyn Fn(C64) -> C64 + Send + Sync>;

/// A meromorphic function on the whole plane with explicit poles and residues.
#[derive(Clone)]
pub struct MeromorphicForm {
    pub name: String,
    pub poles: PoleSet,
    pub whole_plane: bool,
    eval: Eval,
    residue: Eval,
}

impl fmt::Debug for MeromorphicForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MeromorphicForm")
            .field("name", &self.name)
            .field("poles", &self.poles)
            .finish_non_exhaustive()
    }
}

impl MeromorphicForm {
    pub fn new(
        name: impl Into<String>,
        poles: PoleSet,
        eval: impl Fn(C64) -> C64 + Send + Sync + 'static,
        residue: impl Fn(C64) -> C64 + Send + Sync + 'static,
    ) -> Self {
        MeromorphicForm {
            name: name.into(),
            poles,
            whole_plane: true,
            eval: Arc::new(eval),
            residue: Arc::new(residue),
        }
    }

    pub fn eval(&self, s: C64) -> C64 {
        (self.eval)(s)
    }

    /// Analytic residue at a pole of the form.
    pub fn residue(&self, pole: C64) -> Result<C64> {
        match self.poles.order_at(pole) {
            Some(_) => Ok((self.residue)(pole)),
            None => Err(Error::param(format!("{pole} is not a pole of {}", self.name))),
        }
    }

    /// Poles in `window` with their analytic residues.
    pub fn poles_in_window(&self, window: &Window) -> Vec<(Pole, C64)> {
        self.poles
            .in_window(window)
            .into_iter()
            .map(|p| (p, (self.residue)(p.location)))
            .collect()
    }

    /// `s -> lambda^s f(s)`.
    pub fn scaled(self, lambda: f64) -> MeromorphicForm {
        let (e, r) = (self.eval.clone(), self.residue.clone());
        MeromorphicForm {
            name: format!("{} scaled by {lambda}", self.name),
            poles: self.poles,
            whole_plane: self.whole_plane,
            eval: Arc::new(move |s| rpow(lambda, s) * e(s)),
            residue: Arc::new(move |s| rpow(lambda, s) * r(s)),
        }
    }

    /// `f + g`, with residues adding on shared poles.
    pub fn plus(self, other: MeromorphicForm) -> MeromorphicForm {
        let (e1, e2) = (self.eval.clone(), other.eval.clone());
        let (p1, p2) = (self.poles.clone(), other.poles.clone());
        let (r1, r2) = (self.residue.clone(), other.residue.clone());
        MeromorphicForm {
            name: format!("{} + {}", self.name, other.name),
            poles: self.poles.union(&other.poles),
            whole_plane: self.whole_plane && other.whole_plane,
            eval: Arc::new(move |s| e1(s) + e2(s)),
            residue: Arc::new(move |s| {
                let mut r = C64::new(0.0, 0.0);
                if p1.order_at(s).is_some() {
                    r += r1(s);
                }
                if p2.order_at(s).is_some() {
                    r += r2(s);
                }
                r
            }),
        }
    }

    /// Adds an entire function.
    pub fn plus_entire(self, g: impl Fn(C64) -> C64 + Send + Sync + 'static) -> MeromorphicForm {
        let e = self.eval.clone();
        MeromorphicForm {
            eval: Arc::new(move |s| e(s) + g(s)),
            ..self
        }
    }
}

/// Value at a removable singularity `s0`, as the mean over a small circle.
fn removable(f: &dyn Fn(C64) -> C64, s0: C64) -> C64 {
    let h = 1e-3;
    let nodes = 8;
    (0..nodes)
        .map(|k| f(s0 + C64::from_polar(h, 2.0 * PI * k as f64 / nodes as f64)))
        .sum::<C64>()
        / nodes as f64
}

/// Continuation of the distance zeta function of `C^(m,a)` for `delta >= c`.
///
/// `s = 0` is a removable point: the `-2/s` from the first term cancels the
/// collar term `2 delta^s / s`.
pub fn cantor_distance_zeta_form(params: &GeneralizedCantorParams, delta: f64) -> Result<MeromorphicForm> {
    params.validate()?;
    let c = params.gap_scale();
    if delta < c * (1.0 - 1e-12) {
        return Err(Error::param(format!(
            "closed form needs delta >= (1 - ma)/(2(m-1)) = {c}, got {delta}"
        )));
    }
    let m = params.m as f64;
    let a = params.a();
    let t = params.period();
    let one_minus_ma = 1.0 - m * a;
    let raw = move |s: C64| {
        rpow(c, s - 1.0) * one_minus_ma / (s * (1.0 - rpow(a, s) * m)) + rpow(delta, s) * 2.0 / s
    };
    let eval = move |s: C64| {
        if s.norm() < 1e-6 {
            removable(&raw, C64::new(0.0, 0.0))
        } else {
            raw(s)
        }
    };
    // 1 - m a^s has derivative -m a^s ln a = T at every lattice pole
    let residue = move |s: C64| rpow(c, s - 1.0) * one_minus_ma / (s * t);
    Ok(MeromorphicForm::new(
        format!("cantor distance zeta (m={}, a={})", params.m, a),
        PoleSet {
            isolated: vec![],
            lattices: vec![PoleLattice {
                real: params.dimension(),
                spacing: params.oscillatory_period(),
            }],
        },
        eval,
        residue,
    ))
}

/// Tube zeta from a distance form through `zeta = delta^(s-N)|A_delta| + (N - s) zeta~`.
///
/// `s = N` is removable because the distance form equals `|A_delta|` there.
pub fn tube_form_from_distance(distance: MeromorphicForm, n: u32, delta: f64, volume: f64) -> MeromorphicForm {
    let nf = n as f64;
    let d_eval = distance.eval.clone();
    let raw = move |s: C64| (d_eval(s) - rpow(delta, s - nf) * volume) / (C64::new(nf, 0.0) - s);
    let eval = move |s: C64| {
        if (s - nf).norm() < 1e-6 {
            removable(&raw, C64::new(nf, 0.0))
        } else {
            raw(s)
        }
    };
    let d_res = distance.residue.clone();
    let residue = move |s: C64| d_res(s) / (C64::new(nf, 0.0) - s);
    MeromorphicForm {
        name: format!("tube form of {}", distance.name),
        poles: distance.poles,
        whole_plane: distance.whole_plane,
        eval: Arc::new(eval),
        residue: Arc::new(residue),
    }
}

/// Tube zeta function of `C^(m,a)` for `delta >= c`.
pub fn cantor_tube_zeta_form(params: &GeneralizedCantorParams, delta: f64) -> Result<MeromorphicForm> {
    let d = cantor_distance_zeta_form(params, delta)?;
    Ok(tube_form_from_distance(d, 1, delta, 1.0 + 2.0 * delta))
}

/// Lower and upper Minkowski contents of `C^(m,a)`.
pub fn cantor_minkowski_contents(params: &GeneralizedCantorParams) -> (f64, f64) {
    let d = params.dimension();
    let m = params.m as f64;
    let lower = (2.0 * d / (1.0 - d)).powf(1.0 - d) / d;
    let upper = params.gap_scale().powf(d - 1.0) * m * (1.0 - params.a()) / (m - 1.0);
    (lower, upper)
}

fn check_sphere(n: u32, radius: f64, delta: f64) -> Result<()> {
    if n == 0 || !(radius > 0.0) || !(delta > 0.0) {
        return Err(Error::param("sphere needs N >= 1, R > 0, delta > 0"));
    }
    if delta >= radius {
        return Err(Error::domain(format!("sphere forms need delta < R, got delta = {delta}, R = {radius}")));
    }
    Ok(())
}

/// Tube zeta function of the sphere `S^(N-1)` of radius `R` in `R^N`.
pub fn sphere_tube_zeta_form(n: u32, radius: f64, delta: f64) -> Result<MeromorphicForm> {
    check_sphere(n, radius, delta)?;
    let w = unit_ball_volume(n);
    let nf = n as f64;
    let eval = move |s: C64| {
        (1..=n)
            .step_by(2)
            .map(|k| {
                let e = s - nf + k as f64;
                rpow(delta, e) * (2.0 * w * binomial(n, k) * radius.powi((n - k) as i32)) / e
            })
            .sum::<C64>()
    };
    let residue = move |s: C64| {
        let m = s.re.round() as u32;
        C64::new(2.0 * w * binomial(n, m) * radius.powi(m as i32), 0.0)
    };
    let isolated = (1..=n)
        .step_by(2)
        .map(|k| Pole {
            location: C64::new((n - k) as f64, 0.0),
            order: 1,
        })
        .collect();
    Ok(MeromorphicForm::new(
        format!("sphere tube zeta (N={n}, R={radius})"),
        PoleSet { isolated, lattices: vec![] },
        eval,
        residue,
    ))
}

/// Distance zeta function of the sphere, `N omega_N sum_k binom(N-1,k) R^(N-1-k) (1+(-1)^k) delta^(s-N+k+1)/(s-N+k+1)`.
pub fn sphere_distance_zeta_form(n: u32, radius: f64, delta: f64) -> Result<MeromorphicForm> {
    check_sphere(n, radius, delta)?;
    let w = unit_ball_volume(n);
    let nf = n as f64;
    let eval = move |s: C64| {
        (0..n)
            .step_by(2)
            .map(|k| {
                let e = s - nf + (k + 1) as f64;
                rpow(delta, e) * (2.0 * nf * w * binomial(n - 1, k) * radius.powi((n - 1 - k) as i32)) / e
            })
            .sum::<C64>()
    };
    let residue = move |s: C64| {
        let k = n - 1 - s.re.round() as u32;
        C64::new(2.0 * nf * w * binomial(n - 1, k) * radius.powi((n - 1 - k) as i32), 0.0)
    };
    let isolated = (0..n)
        .step_by(2)
        .map(|k| Pole {
            location: C64::new((n - 1 - k) as f64, 0.0),
            order: 1,
        })
        .collect();
    Ok(MeromorphicForm::new(
        format!("sphere distance zeta (N={n}, R={radius})"),
        PoleSet { isolated, lattices: vec![] },
        eval,
        residue,
    ))
}

/// Relative distance zeta function of the Sierpinski carpet in the unit square.
pub fn sierpinski_relative_zeta_form() -> MeromorphicForm {
    let ln3 = 3f64.ln();
    let eval = |s: C64| C64::new(8.0, 0.0) / (rpow(2.0, s) * s * (s - 1.0) * (rpow(3.0, s) - 8.0));
    let residue = move |s: C64| {
        if s.norm() < 1e-9 {
            C64::new(8.0 / 7.0, 0.0)
        } else if (s - 1.0).norm() < 1e-9 {
            C64::new(-0.8, 0.0)
        } else {
            rpow(2.0, -s) / (s * (s - 1.0) * ln3)
        }
    };
    MeromorphicForm::new(
        "sierpinski carpet relative zeta",
        PoleSet {
            isolated: vec![
                Pole { location: C64::new(0.0, 0.0), order: 1 },
                Pole { location: C64::new(1.0, 0.0), order: 1 },
            ],
            lattices: vec![PoleLattice {
                real: 8f64.ln() / ln3,
                spacing: 2.0 * PI / ln3,
            }],
        },
        eval,
        residue,
    )
}

/// Closed form of `zeta_L` for lattice and finite strings: `(scale, ratio, base, q)` or a finite list.
enum StringClosedForm {
    Lattice { scale: f64, ratio: f64, base: f64, q: f64 },
    Finite(Vec<f64>),
}

fn string_closed_form(string: &FractalString) -> Result<StringClosedForm> {
    match string {
        FractalString::Lattice {
            scale,
            ratio,
            base_multiplicity,
            multiplicity_ratio,
        } => Ok(StringClosedForm::Lattice {
            scale: *scale,
            ratio: *ratio,
            base: *base_multiplicity as f64,
            q: *multiplicity_ratio as f64,
        }),
        FractalString::Finite { lengths } => Ok(StringClosedForm::Finite(lengths.clone())),
        FractalString::Scaled { factor, inner } => Ok(match string_closed_form(inner)? {
            StringClosedForm::Lattice { scale, ratio, base, q } => StringClosedForm::Lattice {
                scale: scale * factor,
                ratio,
                base,
                q,
            },
            StringClosedForm::Finite(l) => StringClosedForm::Finite(l.iter().map(|x| x * factor).collect()),
        }),
        other => Err(Error::NoClosedForm(format!(
            "geometric zeta of {other:?} has no rational-exponential closed form"
        ))),
    }
}

/// Closed form of the geometric zeta function of a lattice or finite string.
pub fn geometric_zeta_form(string: &FractalString) -> Result<MeromorphicForm> {
    string.validate()?;
    Ok(match string_closed_form(string)? {
        StringClosedForm::Lattice { scale, ratio, base, q } => {
            let t = -ratio.ln();
            let eval = move |s: C64| rpow(scale, s) * base / (1.0 - rpow(ratio, s) * q);
            let residue = move |s: C64| rpow(scale, s) * base / t;
            MeromorphicForm::new(
                "geometric zeta",
                PoleSet {
                    isolated: vec![],
                    lattices: vec![PoleLattice { real: q.ln() / t, spacing: 2.0 * PI / t }],
                },
                eval,
                residue,
            )
        }
        StringClosedForm::Finite(lengths) => MeromorphicForm::new(
            "geometric zeta",
            PoleSet::default(),
            move |s| lengths.iter().map(|&l| rpow(l, s)).sum(),
            |_| C64::new(0.0, 0.0),
        ),
    })
}

/// Relative distance zeta `2^(1-s) zeta_L(s) / s` of the string drum.
pub fn string_relative_zeta_form(string: &FractalString) -> Result<MeromorphicForm> {
    string.validate()?;
    let closed = string_closed_form(string)?;
    let geo = geometric_zeta_form(string)?;
    let g_eval = geo.eval.clone();
    let eval = move |s: C64| rpow(2.0, 1.0 - s) * g_eval(s) / s;
    let mut poles = geo.poles.clone();
    let (residue, order_at_zero): (Eval, u32) = match closed {
        StringClosedForm::Lattice { scale, ratio, base, q } => {
            let t = -ratio.ln();
            let zero_on_lattice = q == 1.0;
            let g0 = base / (1.0 - q);
            let res: Eval = Arc::new(move |s: C64| {
                if s.norm() < 1e-9 {
                    if zero_on_lattice {
                        // 2b e^{sL} / (s^2 T (1 - sT/2 + ...)), L = ln(scale/2)
                        let l = (scale / 2.0).ln();
                        C64::new(2.0 * base / t * (l + 0.5 * t), 0.0)
                    } else {
                        C64::new(2.0 * g0, 0.0)
                    }
                } else {
                    rpow(2.0, 1.0 - s) * rpow(scale, s) * base / (s * t)
                }
            });
            (res, if zero_on_lattice { 2 } else { 1 })
        }
        StringClosedForm::Finite(lengths) => {
            let count = lengths.len() as f64;
            (Arc::new(move |_| C64::new(2.0 * count, 0.0)), 1)
        }
    };
    poles.isolated.push(Pole {
        location: C64::new(0.0, 0.0),
        order: order_at_zero,
    });
    Ok(MeromorphicForm {
        name: "string drum relative zeta".into(),
        poles,
        whole_plane: true,
        eval: Arc::new(eval),
        residue,
    })
}

/// Local tube zeta of `R^N` at scale `r`: `omega_N sum_k binom(N,k) r^k delta^(s-k)/(s-k)`.
pub fn local_ball_tube_zeta_form(n: u32, r: f64, delta: f64) -> Result<MeromorphicForm> {
    if n == 0 || !(r > 0.0) || !(delta > 0.0) {
        return Err(Error::param("local ball form needs N >= 1, r > 0, delta > 0"));
    }
    let w = unit_ball_volume(n);
    let eval = move |s: C64| {
        (0..=n)
            .map(|k| rpow(delta, s - k as f64) * (w * binomial(n, k) * r.powi(k as i32)) / (s - k as f64))
            .sum::<C64>()
    };
    let residue = move |s: C64| {
        let k = s.re.round() as u32;
        C64::new(w * binomial(n, k) * r.powi(k as i32), 0.0)
    };
    Ok(MeromorphicForm::new(
        format!("local tube zeta of R^{n}"),
        PoleSet {
            isolated: (0..=n).map(|k| Pole { location: C64::new(k as f64, 0.0), order: 1 }).collect(),
            lattices: vec![],
        },
        eval,
        residue,
    ))
}

/// Local distance zeta of `R^N`: `N omega_N sum_{k<N} binom(N-1,k) r^k delta^(s-k)/(s-k)`.
pub fn local_ball_distance_zeta_form(n: u32, r: f64, delta: f64) -> Result<MeromorphicForm> {
    if n == 0 || !(r > 0.0) || !(delta > 0.0) {
        return Err(Error::param("local ball form needs N >= 1, r > 0, delta > 0"));
    }
    let w = unit_ball_volume(n);
    let nf = n as f64;
    let eval = move |s: C64| {
        (0..n)
            .map(|k| rpow(delta, s - k as f64) * (nf * w * binomial(n - 1, k) * r.powi(k as i32)) / (s - k as f64))
            .sum::<C64>()
    };
    let residue = move |s: C64| {
        let k = s.re.round() as u32;
        C64::new(nf * w * binomial(n - 1, k) * r.powi(k as i32), 0.0)
    };
    Ok(MeromorphicForm::new(
        format!("local distance zeta of R^{n}"),
        PoleSet {
            isolated: (0..n).map(|k| Pole { location: C64::new(k as f64, 0.0), order: 1 }).collect(),
            lattices: vec![],
        },
        eval,
        residue,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ExactReal;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn ternary_cantor_dimension_and_residue() {
        let p = GeneralizedCantorParams::ternary();
        let f = cantor_distance_zeta_form(&p, 0.25).unwrap();
        let d = 2f64.ln() / 3f64.ln();
        assert_relative_eq!(f.poles.lattices[0].real, 0.630_929_753_571_457_4, epsilon = 1e-15);
        assert_relative_eq!(f.poles.lattices[0].spacing, 2.0 * PI / 3f64.ln(), epsilon = 1e-15);
        let r = f.residue(c(d, 0.0)).unwrap();
        let quoted = (1.0 / 3.0) / (d * 3f64.ln()) * (1.0f64 / 6.0).powf(d - 1.0);
        assert_relative_eq!(r.re, quoted, epsilon = 1e-14);
        assert!((r.re - 0.9316).abs() < 1e-4);
        assert!(f.residue(c(0.0, 0.0)).is_err());
        assert!(cantor_distance_zeta_form(&p, 0.1).is_err());
    }

    #[test]
    fn cantor_form_is_regular_at_zero() {
        let p = GeneralizedCantorParams::new(3, ExactReal::new(1, 5)).unwrap();
        let f = cantor_distance_zeta_form(&p, 0.3).unwrap();
        let near = f.eval(c(1e-4, 0.0));
        let at = f.eval(c(0.0, 0.0));
        assert!((near - at).norm() < 1e-3, "{near} {at}");
        assert!(at.norm() < 10.0);
    }

    #[test]
    fn cantor_form_at_one_is_tube_volume() {
        let p = GeneralizedCantorParams::ternary();
        let f = cantor_distance_zeta_form(&p, 0.25).unwrap();
        assert_relative_eq!(f.eval(c(1.0, 0.0)).re, 1.5, epsilon = 1e-14);
    }

    #[test]
    fn cantor_contents_match_quoted_decimals() {
        let (lo, hi) = cantor_minkowski_contents(&GeneralizedCantorParams::ternary());
        assert!((lo - 2.4950).abs() < 1e-4, "{lo}");
        assert!((hi - 2.5830).abs() < 1e-4, "{hi}");
    }

    #[test]
    fn sphere_examples() {
        let f = sphere_tube_zeta_form(2, 1.0, 0.5).unwrap();
        assert_eq!(f.poles.isolated.len(), 1);
        assert_relative_eq!(f.residue(c(1.0, 0.0)).unwrap().re, 4.0 * PI, epsilon = 1e-14);
        let f3 = sphere_tube_zeta_form(3, 1.0, 0.5).unwrap();
        let locs: Vec<f64> = f3.poles.isolated.iter().map(|p| p.location.re).collect();
        assert_eq!(locs, vec![2.0, 0.0]);
        assert_relative_eq!(f3.residue(c(2.0, 0.0)).unwrap().re, 8.0 * PI, epsilon = 1e-13);
        let f1 = sphere_tube_zeta_form(1, 1.0, 0.5).unwrap();
        assert_relative_eq!(f1.residue(c(0.0, 0.0)).unwrap().re, 4.0, epsilon = 1e-15);
        assert!(matches!(sphere_tube_zeta_form(2, 1.0, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn sphere_forms_satisfy_functional_equation() {
        for n in 1..=4u32 {
            let (r, delta) = (1.3, 0.4);
            let tube = sphere_tube_zeta_form(n, r, delta).unwrap();
            let dist = sphere_distance_zeta_form(n, r, delta).unwrap();
            let w = unit_ball_volume(n);
            let vol = w * ((r + delta).powi(n as i32) - (r - delta).powi(n as i32));
            for s in [c(0.3, 1.0), c(2.7, -0.4), c(-1.2, 3.0)] {
                let rhs = rpow(delta, s - n as f64) * vol + (n as f64 - s) * tube.eval(s);
                assert!((dist.eval(s) - rhs).norm() < 1e-12 * rhs.norm().max(1.0), "n={n} s={s}");
            }
        }
    }

    #[test]
    fn sierpinski_examples() {
        let f = sierpinski_relative_zeta_form();
        let d = f.poles.lattices[0].real;
        assert!((d - 1.8928).abs() < 1e-4);
        let r = f.residue(c(d, 0.0)).unwrap().re;
        assert!((r - 0.1451).abs() < 1e-4, "{r}");
        let p = f.poles.lattices[0].spacing;
        let base = 2f64.powf(-d) / (d * 3f64.ln());
        let ratios: Vec<f64> = [10i64, 20, 40]
            .iter()
            .map(|&k| f.residue(c(d, p * k as f64)).unwrap().norm() * (k * k) as f64 * p * p / base)
            .collect();
        for w in ratios.windows(2) {
            assert!((w[0] / w[1] - 1.0).abs() < 0.05, "{ratios:?}");
        }
    }

    #[test]
    fn string_form_examples() {
        let f = string_relative_zeta_form(&FractalString::geometric(0.5)).unwrap();
        assert_relative_eq!(f.eval(c(2.0, 0.0)).re, 1.0 / 12.0, epsilon = 1e-15);
        let cantor = string_relative_zeta_form(&FractalString::cantor()).unwrap();
        let lattice = cantor.poles.lattices[0];
        assert_relative_eq!(lattice.real, 2f64.ln() / 3f64.ln(), epsilon = 1e-15);
        assert!(cantor.poles.order_at(c(0.0, 0.0)).is_some());
        assert!(string_relative_zeta_form(&FractalString::Telescoping).is_err());
        let g = geometric_zeta_form(&FractalString::cantor()).unwrap();
        assert_relative_eq!(g.eval(c(1.0, 0.0)).re, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn ball_examples() {
        let f = local_ball_tube_zeta_form(1, 1.0, 0.5).unwrap();
        assert_eq!(f.poles.isolated.len(), 2);
        assert_relative_eq!(f.residue(c(1.0, 0.0)).unwrap().re, 2.0, epsilon = 1e-15);
        let f2 = local_ball_tube_zeta_form(2, 1.0, 0.5).unwrap();
        assert_eq!(f2.poles.isolated.len(), 3);
        let d2 = local_ball_distance_zeta_form(2, 1.0, 0.5).unwrap();
        assert_eq!(d2.poles.isolated.len(), 2);
        // the distance form is the functional-equation image of the tube form
        for n in 1..=3 {
            let (r, delta) = (0.7, 0.3);
            let t = local_ball_tube_zeta_form(n, r, delta).unwrap();
            let d = local_ball_distance_zeta_form(n, r, delta).unwrap();
            let vol = unit_ball_volume(n) * (r + delta).powi(n as i32);
            let s = c(0.4, 2.2);
            let rhs = rpow(delta, s - n as f64) * vol + (n as f64 - s) * t.eval(s);
            assert!((d.eval(s) - rhs).norm() < 1e-12 * rhs.norm());
        }
    }

    #[test]
    fn window_enumeration() {
        let f = cantor_distance_zeta_form(&GeneralizedCantorParams::ternary(), 0.25).unwrap();
        let w = Window::new([0.5, 0.8], [-10.0, 10.0]).unwrap();
        assert_eq!(f.poles.in_window(&w).len(), 3);
    }

    proptest! {
        #[test]
        fn forms_respect_conjugation(re in -3.0f64..3.0, im in -20.0f64..20.0) {
            let s = c(re, im);
            let forms = [
                cantor_distance_zeta_form(&GeneralizedCantorParams::ternary(), 0.25).unwrap(),
                sphere_tube_zeta_form(3, 1.0, 0.5).unwrap(),
                sierpinski_relative_zeta_form(),
                string_relative_zeta_form(&FractalString::cantor()).unwrap(),
                local_ball_tube_zeta_form(2, 1.0, 0.5).unwrap(),
            ];
            for f in &forms {
                let a = f.eval(s);
                let b = f.eval(s.conj()).conj();
                prop_assert!((a - b).norm() <= 1e-12 * a.norm().max(1.0), "{}", f.name);
            }
        }
    }
}
