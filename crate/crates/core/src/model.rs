//! Shared domain types: exact parameters, fractal strings, set and drum
//! descriptors, tube samples and the reports produced by the estimators.
//!
//! Descriptors are immutable values. Every number that appears in a JSON
//! descriptor is carried as an [`ExactReal`] (a decimal or `p/q` string) and
//! converted to binary64 only when an evaluator needs it.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use num_traits::Zero;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::{Error, Result, C64};

/// Default cap on the number of intervals a pre-fractal construction may emit.
pub const DEFAULT_CONSTRUCTION_BUDGET: u128 = 1 << 22;

/// Rational number stored exactly; written as `p/q` or as a finite decimal.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExactReal(pub Ratio<i128>);

impl ExactReal {
    pub fn new(numer: i128, denom: i128) -> Self {
        ExactReal(Ratio::new(numer, denom))
    }

    pub fn integer(n: i128) -> Self {
        ExactReal(Ratio::from_integer(n))
    }

    pub fn to_f64(self) -> f64 {
        *self.0.numer() as f64 / *self.0.denom() as f64
    }

    pub fn ratio(self) -> Ratio<i128> {
        self.0
    }
}

impl fmt::Display for ExactReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl FromStr for ExactReal {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let s = text.trim();
        let bad = || Error::Parse(format!("not an exact real: {text:?}"));
        if let Some((p, q)) = s.split_once('/') {
            let p: i128 = p.trim().parse().map_err(|_| bad())?;
            let q: i128 = q.trim().parse().map_err(|_| bad())?;
            if q == 0 {
                return Err(bad());
            }
            return Ok(ExactReal::new(p, q));
        }
        let (mantissa, exponent) = match s.find(['e', 'E']) {
            Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
            None => (s, 0),
        };
        let (neg, digits) = match mantissa.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
        };
        let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(bad());
        }
        if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let joined = format!("{int_part}{frac_part}");
        let mut numer: i128 = joined.trim_start_matches('0').parse().unwrap_or(0);
        if joined.len() > 36 {
            return Err(bad());
        }
        let scale = exponent - frac_part.len() as i32;
        let mut denom: i128 = 1;
        let pow10 = |k: u32| 10i128.checked_pow(k).ok_or_else(bad);
        if scale >= 0 {
            numer = numer.checked_mul(pow10(scale as u32)?).ok_or_else(bad)?;
        } else {
            denom = pow10((-scale) as u32)?;
        }
        if neg {
            numer = -numer;
        }
        Ok(ExactReal::new(numer, denom))
    }
}

impl Serialize for ExactReal {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ExactReal {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Text(String),
            Int(i64),
            Float(f64),
        }
        let text = match Repr::deserialize(deserializer)? {
            Repr::Text(s) => s,
            Repr::Int(i) => i.to_string(),
            Repr::Float(x) => format!("{x:?}"),
        };
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// How the contraction ratio of a generalized Cantor set is specified.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Contraction {
    /// Exact rational ratio `a`.
    Ratio { a: ExactReal },
    /// Ratio implied by a prescribed dimension: `a = m^(-1/dim)`.
    Dimension { dim: ExactReal },
}

/// Parameters `(m, a)` of the generalized Cantor set `C^(m,a)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneralizedCantorParams {
    pub m: u32,
    pub contraction: Contraction,
}

impl GeneralizedCantorParams {
    pub fn new(m: u32, a: ExactReal) -> Result<Self> {
        let p = GeneralizedCantorParams {
            m,
            contraction: Contraction::Ratio { a },
        };
        p.validate()?;
        Ok(p)
    }

    /// Builds `C^(m, m^(-1/dim))`, keeping the dimension exact.
    pub fn with_dimension(m: u32, dim: ExactReal) -> Result<Self> {
        let p = GeneralizedCantorParams {
            m,
            contraction: Contraction::Dimension { dim },
        };
        p.validate()?;
        Ok(p)
    }

    pub fn ternary() -> Self {
        GeneralizedCantorParams::new(2, ExactReal::new(1, 3)).expect("valid")
    }

    pub fn validate(&self) -> Result<()> {
        if self.m < 2 {
            return Err(Error::param(format!("m must be >= 2, got {}", self.m)));
        }
        match self.contraction {
            Contraction::Ratio { a } => {
                let r = a.ratio();
                if r <= Ratio::zero() || r * Ratio::from_integer(self.m as i128) >= Ratio::from_integer(1) {
                    return Err(Error::param(format!(
                        "need 0 < a < 1/m, got a = {a} with m = {}",
                        self.m
                    )));
                }
            }
            Contraction::Dimension { dim } => {
                let d = dim.ratio();
                if d <= Ratio::zero() || d >= Ratio::from_integer(1) {
                    return Err(Error::param(format!("dimension must lie in (0,1), got {dim}")));
                }
            }
        }
        Ok(())
    }

    pub fn exact_ratio(&self) -> Option<ExactReal> {
        match self.contraction {
            Contraction::Ratio { a } => Some(a),
            Contraction::Dimension { .. } => None,
        }
    }

    /// Multiplicative period `T = log(1/a)`.
    pub fn period(&self) -> f64 {
        match self.contraction {
            Contraction::Ratio { a } => -a.to_f64().ln(),
            Contraction::Dimension { dim } => (self.m as f64).ln() / dim.to_f64(),
        }
    }

    pub fn a(&self) -> f64 {
        match self.contraction {
            Contraction::Ratio { a } => a.to_f64(),
            Contraction::Dimension { .. } => (-self.period()).exp(),
        }
    }

    /// Box dimension `log_{1/a} m`.
    pub fn dimension(&self) -> f64 {
        match self.contraction {
            Contraction::Ratio { .. } => (self.m as f64).ln() / self.period(),
            Contraction::Dimension { dim } => dim.to_f64(),
        }
    }

    /// Half-width of the first-level holes, `(1 - m a) / (2 (m - 1))`.
    pub fn gap_scale(&self) -> f64 {
        (1.0 - self.m as f64 * self.a()) / (2.0 * (self.m as f64 - 1.0))
    }

    /// Oscillatory period `2 pi / T`, the spacing of the principal pole lattice.
    pub fn oscillatory_period(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.period()
    }
}

/// Sorted, pairwise disjoint closed intervals.
#[derive(Clone, Debug, PartialEq)]
pub struct IntervalUnion1D {
    pub intervals: Vec<[f64; 2]>,
}

impl IntervalUnion1D {
    pub fn total_length(&self) -> f64 {
        self.intervals.iter().map(|iv| iv[1] - iv[0]).sum()
    }
}

/// Strictly increasing finite point set.
#[derive(Clone, Debug, PartialEq)]
pub struct PointSet1D {
    pub points: Vec<f64>,
}

/// Level-`level` pre-fractal of `C^(m,a)` with exact rational endpoints.
pub fn cantor_intervals_exact(
    params: &GeneralizedCantorParams,
    level: u32,
    budget: u128,
) -> Result<Vec<(Ratio<i128>, Ratio<i128>)>> {
    let a = params
        .exact_ratio()
        .ok_or_else(|| Error::param("exact construction needs a rational contraction ratio"))?
        .ratio();
    let count = (params.m as u128)
        .checked_pow(level)
        .filter(|c| *c <= budget)
        .ok_or(Error::Capacity {
            what: "cantor intervals",
            needed: (params.m as u128).saturating_pow(level),
            budget,
        })?;
    let m = Ratio::from_integer(params.m as i128);
    let one = Ratio::from_integer(1);
    let hole = (one - m * a) / (m - one);
    let mut current = vec![(Ratio::zero(), one)];
    current.reserve(count as usize);
    for _ in 0..level {
        let mut next = Vec::with_capacity(current.len() * params.m as usize);
        for (lo, hi) in &current {
            let len = *hi - *lo;
            for j in 0..params.m {
                let j = Ratio::from_integer(j as i128);
                let start = *lo + j * (a + hole) * len;
                next.push((start, start + a * len));
            }
        }
        current = next;
    }
    Ok(current)
}

/// Level-`level` pre-fractal of `C^(m,a)`: `m^level` intervals of length `a^level` in `[0,1]`.
pub fn cantor_endpoints(params: &GeneralizedCantorParams, level: u32) -> Result<IntervalUnion1D> {
    cantor_endpoints_with_budget(params, level, DEFAULT_CONSTRUCTION_BUDGET)
}

pub fn cantor_endpoints_with_budget(
    params: &GeneralizedCantorParams,
    level: u32,
    budget: u128,
) -> Result<IntervalUnion1D> {
    params.validate()?;
    if params.exact_ratio().is_some() {
        let exact = cantor_intervals_exact(params, level, budget)?;
        let to_f = |r: Ratio<i128>| *r.numer() as f64 / *r.denom() as f64;
        return Ok(IntervalUnion1D {
            intervals: exact.into_iter().map(|(lo, hi)| [to_f(lo), to_f(hi)]).collect(),
        });
    }
    let needed = (params.m as u128).saturating_pow(level);
    if needed > budget {
        return Err(Error::Capacity {
            what: "cantor intervals",
            needed,
            budget,
        });
    }
    let a = params.a();
    let hole = (1.0 - params.m as f64 * a) / (params.m as f64 - 1.0);
    let mut current = vec![[0.0, 1.0]];
    for _ in 0..level {
        current = current
            .iter()
            .flat_map(|[lo, hi]| {
                let len = hi - lo;
                (0..params.m).map(move |j| {
                    let start = lo + j as f64 * (a + hole) * len;
                    [start, start + a * len]
                })
            })
            .collect();
    }
    Ok(IntervalUnion1D { intervals: current })
}

/// A bounded fractal string: nonincreasing positive lengths with finite sum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FractalString {
    /// Explicit finite list of lengths.
    Finite { lengths: Vec<f64> },
    /// Level `n >= 1` carries `base_multiplicity * multiplicity_ratio^(n-1)`
    /// copies of the length `scale * ratio^(n-1)`.
    Lattice {
        scale: f64,
        ratio: f64,
        base_multiplicity: u64,
        multiplicity_ratio: u64,
    },
    /// `l_j = j^(-exponent)` with `exponent > 1`.
    Power { exponent: f64 },
    /// `l_j = 1 / (j (j + 1))`.
    Telescoping,
    /// Every length of `inner` multiplied by `factor`.
    Scaled { factor: f64, inner: Box<FractalString> },
}

/// One run of equal lengths.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LengthBlock {
    pub length: f64,
    pub multiplicity: f64,
}

impl FractalString {
    /// `l_j = r^j`, `j >= 1`.
    pub fn geometric(r: f64) -> Self {
        FractalString::Lattice {
            scale: r,
            ratio: r,
            base_multiplicity: 1,
            multiplicity_ratio: 1,
        }
    }

    /// Lengths `3^(-n)` with multiplicity `2^(n-1)`: the gaps of the ternary Cantor set.
    pub fn cantor() -> Self {
        FractalString::Lattice {
            scale: 1.0 / 3.0,
            ratio: 1.0 / 3.0,
            base_multiplicity: 1,
            multiplicity_ratio: 2,
        }
    }

    /// Gap lengths of `C^(m,a)`.
    pub fn cantor_gaps(params: &GeneralizedCantorParams) -> Self {
        FractalString::Lattice {
            scale: 2.0 * params.gap_scale(),
            ratio: params.a(),
            base_multiplicity: (params.m - 1) as u64,
            multiplicity_ratio: params.m as u64,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            FractalString::Finite { lengths } => {
                if lengths.is_empty() {
                    return Err(Error::param("fractal string needs at least one length"));
                }
                if lengths.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
                    return Err(Error::param("lengths must be positive and finite"));
                }
                if lengths.windows(2).any(|w| w[1] > w[0]) {
                    return Err(Error::param("lengths must be nonincreasing"));
                }
            }
            FractalString::Lattice {
                scale,
                ratio,
                base_multiplicity,
                multiplicity_ratio,
            } => {
                if !(*scale > 0.0 && *ratio > 0.0 && *ratio < 1.0) {
                    return Err(Error::param("lattice string needs scale > 0 and 0 < ratio < 1"));
                }
                if *base_multiplicity == 0 || *multiplicity_ratio == 0 {
                    return Err(Error::param("multiplicities must be positive"));
                }
                if *multiplicity_ratio as f64 * ratio >= 1.0 {
                    return Err(Error::param("total length diverges: multiplicity_ratio * ratio >= 1"));
                }
            }
            FractalString::Power { exponent } => {
                if !(*exponent > 1.0) {
                    return Err(Error::param("power string needs exponent > 1"));
                }
            }
            FractalString::Telescoping => {}
            FractalString::Scaled { factor, inner } => {
                if !(*factor > 0.0 && factor.is_finite()) {
                    return Err(Error::param("scale factor must be positive"));
                }
                inner.validate()?;
            }
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        match self {
            FractalString::Finite { .. } => true,
            FractalString::Scaled { inner, .. } => inner.is_finite(),
            _ => false,
        }
    }

    /// Upper box dimension of the string (abscissa of its geometric zeta function).
    pub fn dimension(&self) -> f64 {
        match self {
            FractalString::Finite { .. } => 0.0,
            FractalString::Lattice {
                ratio,
                multiplicity_ratio,
                ..
            } => {
                if *multiplicity_ratio == 1 {
                    0.0
                } else {
                    (*multiplicity_ratio as f64).ln() / (1.0 / ratio).ln()
                }
            }
            FractalString::Power { exponent } => 1.0 / exponent,
            FractalString::Telescoping => 0.5,
            FractalString::Scaled { inner, .. } => inner.dimension(),
        }
    }

    /// Nonincreasing runs of equal lengths. Infinite for rule-generated strings.
    pub fn blocks(&self) -> Box<dyn Iterator<Item = LengthBlock> + '_> {
        match self {
            FractalString::Finite { lengths } => Box::new(lengths.iter().map(|&l| LengthBlock {
                length: l,
                multiplicity: 1.0,
            })),
            FractalString::Lattice {
                scale,
                ratio,
                base_multiplicity,
                multiplicity_ratio,
            } => {
                let (scale, ratio) = (*scale, *ratio);
                let (b, q) = (*base_multiplicity as f64, *multiplicity_ratio as f64);
                Box::new((0..).map(move |n: i32| LengthBlock {
                    length: scale * ratio.powi(n),
                    multiplicity: b * q.powi(n),
                }).take_while(|blk| blk.length > 0.0))
            }
            FractalString::Power { exponent } => {
                let p = *exponent;
                Box::new((1u64..).map(move |j| LengthBlock {
                    length: (j as f64).powf(-p),
                    multiplicity: 1.0,
                }))
            }
            FractalString::Telescoping => Box::new((1u64..).map(|j| LengthBlock {
                length: 1.0 / (j as f64 * (j + 1) as f64),
                multiplicity: 1.0,
            })),
            FractalString::Scaled { factor, inner } => {
                let f = *factor;
                Box::new(inner.blocks().map(move |b| LengthBlock {
                    length: f * b.length,
                    multiplicity: b.multiplicity,
                }))
            }
        }
    }

    /// Individual lengths `l_1 >= l_2 >= ...` (multiplicities expanded).
    pub fn lengths(&self) -> impl Iterator<Item = f64> + '_ {
        self.blocks().flat_map(|b| {
            let count = b.multiplicity as u64;
            std::iter::repeat_n(b.length, count as usize)
        })
    }

    pub fn first_length(&self) -> f64 {
        self.blocks().next().map(|b| b.length).unwrap_or(0.0)
    }

    /// Total length `sum_j l_j`.
    pub fn total_length(&self) -> f64 {
        self.tail_from(1).0
    }

    /// `sum_{j >= k} l_j` (1-based) together with a bound on its numerical error.
    pub fn tail_from(&self, k: u64) -> (f64, f64) {
        assert!(k >= 1);
        match self {
            FractalString::Finite { lengths } => {
                let v: f64 = lengths.iter().skip((k - 1) as usize).sum();
                (v, v * 1e-15)
            }
            FractalString::Lattice {
                scale,
                ratio,
                base_multiplicity,
                multiplicity_ratio,
            } => {
                let (b, q) = (*base_multiplicity as f64, *multiplicity_ratio as f64);
                // locate the level containing index k
                let mut skipped = 0.0f64;
                let mut n = 0i32;
                loop {
                    let mult = b * q.powi(n);
                    if skipped + mult >= k as f64 {
                        break;
                    }
                    skipped += mult;
                    n += 1;
                }
                let len = scale * ratio.powi(n);
                let remaining_here = b * q.powi(n) - (k as f64 - 1.0 - skipped);
                let next_levels = b * q.powi(n + 1) * scale * ratio.powi(n + 1) / (1.0 - q * ratio);
                let v = remaining_here * len + next_levels;
                (v, v * 1e-14)
            }
            FractalString::Power { exponent } => power_tail(*exponent, k),
            FractalString::Telescoping => (1.0 / k as f64, 1e-16 / k as f64),
            FractalString::Scaled { factor, inner } => {
                let (v, e) = inner.tail_from(k);
                (factor * v, factor * e)
            }
        }
    }

    pub fn scaled(&self, lambda: f64) -> FractalString {
        match self {
            FractalString::Finite { lengths } => FractalString::Finite {
                lengths: lengths.iter().map(|l| l * lambda).collect(),
            },
            FractalString::Lattice {
                scale,
                ratio,
                base_multiplicity,
                multiplicity_ratio,
            } => FractalString::Lattice {
                scale: scale * lambda,
                ratio: *ratio,
                base_multiplicity: *base_multiplicity,
                multiplicity_ratio: *multiplicity_ratio,
            },
            FractalString::Scaled { factor, inner } => FractalString::Scaled {
                factor: factor * lambda,
                inner: inner.clone(),
            },
            other => FractalString::Scaled {
                factor: lambda,
                inner: Box::new(other.clone()),
            },
        }
    }
}

/// `sum_{j >= k} j^(-p)`: explicit terms up to `k + 64`, then Euler-Maclaurin.
fn power_tail(p: f64, k: u64) -> (f64, f64) {
    let cut = k + 64;
    let mut head = 0.0;
    for j in k..cut {
        head += (j as f64).powf(-p);
    }
    let n = cut as f64;
    let em = n.powf(1.0 - p) / (p - 1.0) + 0.5 * n.powf(-p) + p * n.powf(-p - 1.0) / 12.0
        - p * (p + 1.0) * (p + 2.0) * n.powf(-p - 3.0) / 720.0;
    let bound = p * (p + 1.0) * (p + 2.0) * (p + 3.0) * (p + 4.0) * n.powf(-p - 5.0) / 30240.0;
    (head + em, bound + 1e-15 * (head + em))
}

/// Partial-tail sums `a_k = sum_{j >= k} l_j` for `k = 1..=count`.
pub fn string_endpoints(string: &FractalString, count: usize) -> Result<PointSet1D> {
    string.validate()?;
    if count == 0 {
        return Err(Error::param("count must be >= 1"));
    }
    if let FractalString::Finite { lengths } = string {
        if lengths.len() < count {
            return Err(Error::param(format!(
                "string has {} lengths, {} endpoints requested",
                lengths.len(),
                count
            )));
        }
    }
    let mut pts: Vec<f64> = (1..=count as u64).map(|k| string.tail_from(k).0).collect();
    pts.reverse();
    Ok(PointSet1D { points: pts })
}

/// Binary raster with a physical extent. `rows[j]` holds the pixels with
/// y-index `j` counted from the bottom edge; `'#'` marks a set pixel.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Raster {
    pub width: usize,
    pub height: usize,
    pub rows: Vec<String>,
    /// `[x0, y0, x1, y1]`
    pub extent: [ExactReal; 4],
}

impl Raster {
    pub fn from_mask(width: usize, height: usize, mask: &[bool], extent: [f64; 4]) -> Raster {
        let rows = (0..height)
            .map(|j| {
                (0..width)
                    .map(|i| if mask[j * width + i] { '#' } else { '.' })
                    .collect()
            })
            .collect();
        let ex = |x: f64| ExactReal(Ratio::approximate_float(x).unwrap_or_else(Ratio::zero));
        Raster {
            width,
            height,
            rows,
            extent: [ex(extent[0]), ex(extent[1]), ex(extent[2]), ex(extent[3])],
        }
    }

    pub fn mask(&self) -> Result<Vec<bool>> {
        if self.rows.len() != self.height {
            return Err(Error::param("raster row count does not match height"));
        }
        let mut mask = Vec::with_capacity(self.width * self.height);
        for row in &self.rows {
            if row.chars().count() != self.width {
                return Err(Error::param("raster row length does not match width"));
            }
            for c in row.chars() {
                match c {
                    '#' => mask.push(true),
                    '.' => mask.push(false),
                    other => return Err(Error::Parse(format!("unexpected raster symbol {other:?}"))),
                }
            }
        }
        Ok(mask)
    }

    pub fn extent_f64(&self) -> [f64; 4] {
        self.extent.map(|e| e.to_f64())
    }
}

/// Axis-aligned box given by its lower and upper corners.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxRegion {
    pub lo: Vec<ExactReal>,
    pub hi: Vec<ExactReal>,
}

impl BoxRegion {
    pub fn interval(lo: ExactReal, hi: ExactReal) -> Self {
        BoxRegion {
            lo: vec![lo],
            hi: vec![hi],
        }
    }

    fn f64_bounds(&self) -> (Vec<f64>, Vec<f64>) {
        (
            self.lo.iter().map(|x| x.to_f64()).collect(),
            self.hi.iter().map(|x| x.to_f64()).collect(),
        )
    }

    /// True when the interiors are disjoint.
    pub fn interiors_disjoint(&self, other: &BoxRegion) -> bool {
        self.lo
            .iter()
            .zip(&self.hi)
            .zip(other.lo.iter().zip(&other.hi))
            .any(|((alo, ahi), (blo, bhi))| ahi <= blo || bhi <= alo)
    }
}

/// Member of a union, with the box it is declared to occupy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlacedMember {
    pub set: SetDescriptor,
    pub placement: BoxRegion,
}

/// A bounded nonempty set `A`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", deny_unknown_fields)]
pub enum SetDescriptor {
    PointSet1D {
        points: Vec<ExactReal>,
    },
    IntervalUnion1D {
        intervals: Vec<[ExactReal; 2]>,
    },
    /// `offset + scale * C^(m,a)`.
    CantorBlock {
        params: GeneralizedCantorParams,
        offset: ExactReal,
        scale: ExactReal,
    },
    /// Endpoints `a_k = sum_{j >= k} l_j` of a fractal string, together with 0.
    StringEndpoints {
        string: FractalString,
    },
    Sphere {
        dim: u32,
        radius: ExactReal,
        center: Vec<ExactReal>,
    },
    PixelSet2D {
        raster: Raster,
    },
    /// Sierpinski carpet in the unit square, resolved to `level` construction steps.
    SierpinskiCarpet {
        level: u32,
    },
    UnionOfDescriptors {
        members: Vec<PlacedMember>,
    },
}

impl SetDescriptor {
    pub fn cantor(params: GeneralizedCantorParams) -> Self {
        SetDescriptor::CantorBlock {
            params,
            offset: ExactReal::integer(0),
            scale: ExactReal::integer(1),
        }
    }

    pub fn ambient_dim(&self) -> u32 {
        match self {
            SetDescriptor::PointSet1D { .. }
            | SetDescriptor::IntervalUnion1D { .. }
            | SetDescriptor::CantorBlock { .. }
            | SetDescriptor::StringEndpoints { .. } => 1,
            SetDescriptor::Sphere { dim, .. } => *dim,
            SetDescriptor::PixelSet2D { .. } | SetDescriptor::SierpinskiCarpet { .. } => 2,
            SetDescriptor::UnionOfDescriptors { members } => {
                members.first().map(|m| m.set.ambient_dim()).unwrap_or(1)
            }
        }
    }

    /// Bounding box as `(lo, hi)` per axis.
    pub fn bounding_box(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        Ok(match self {
            SetDescriptor::PointSet1D { points } => {
                let v: Vec<f64> = points.iter().map(|p| p.to_f64()).collect();
                let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                (vec![lo], vec![hi])
            }
            SetDescriptor::IntervalUnion1D { intervals } => {
                let lo = intervals.iter().map(|iv| iv[0].to_f64()).fold(f64::INFINITY, f64::min);
                let hi = intervals.iter().map(|iv| iv[1].to_f64()).fold(f64::NEG_INFINITY, f64::max);
                (vec![lo], vec![hi])
            }
            SetDescriptor::CantorBlock { offset, scale, .. } => {
                let o = offset.to_f64();
                (vec![o], vec![o + scale.to_f64()])
            }
            SetDescriptor::StringEndpoints { string } => (vec![0.0], vec![string.total_length()]),
            SetDescriptor::Sphere { dim, radius, center } => {
                let r = radius.to_f64();
                let c: Vec<f64> = if center.is_empty() {
                    vec![0.0; *dim as usize]
                } else {
                    center.iter().map(|x| x.to_f64()).collect()
                };
                (c.iter().map(|x| x - r).collect(), c.iter().map(|x| x + r).collect())
            }
            SetDescriptor::PixelSet2D { raster } => {
                let e = raster.extent_f64();
                (vec![e[0], e[1]], vec![e[2], e[3]])
            }
            SetDescriptor::SierpinskiCarpet { .. } => (vec![0.0, 0.0], vec![1.0, 1.0]),
            SetDescriptor::UnionOfDescriptors { members } => {
                let mut lo = vec![f64::INFINITY; self.ambient_dim() as usize];
                let mut hi = vec![f64::NEG_INFINITY; self.ambient_dim() as usize];
                for m in members {
                    let (l, h) = m.set.bounding_box()?;
                    for i in 0..lo.len() {
                        lo[i] = lo[i].min(l[i]);
                        hi[i] = hi[i].max(h[i]);
                    }
                }
                (lo, hi)
            }
        })
    }

    /// Checks the descriptor yields a well-defined bounded nonempty set.
    pub fn validate(&self) -> Result<()> {
        match self {
            SetDescriptor::PointSet1D { points } => {
                if points.is_empty() {
                    return Err(Error::param("point set is empty"));
                }
            }
            SetDescriptor::IntervalUnion1D { intervals } => {
                if intervals.is_empty() {
                    return Err(Error::param("interval union is empty"));
                }
                let mut sorted = intervals.clone();
                sorted.sort();
                for iv in &sorted {
                    if iv[0] > iv[1] {
                        return Err(Error::param("interval with lo > hi"));
                    }
                }
                if sorted.windows(2).any(|w| w[1][0] <= w[0][1]) {
                    return Err(Error::param("intervals must be pairwise disjoint"));
                }
            }
            SetDescriptor::CantorBlock { params, scale, .. } => {
                params.validate()?;
                if scale.ratio() <= Ratio::zero() {
                    return Err(Error::param("cantor block scale must be positive"));
                }
            }
            SetDescriptor::StringEndpoints { string } => string.validate()?,
            SetDescriptor::Sphere { dim, radius, center } => {
                if *dim == 0 || radius.ratio() <= Ratio::zero() {
                    return Err(Error::param("sphere needs dim >= 1 and radius > 0"));
                }
                if !center.is_empty() && center.len() != *dim as usize {
                    return Err(Error::param("sphere center has wrong dimension"));
                }
            }
            SetDescriptor::PixelSet2D { raster } => {
                let mask = raster.mask()?;
                if !mask.iter().any(|&b| b) {
                    return Err(Error::param("pixel set is empty"));
                }
            }
            SetDescriptor::SierpinskiCarpet { .. } => {}
            SetDescriptor::UnionOfDescriptors { members } => {
                if members.is_empty() {
                    return Err(Error::param("union has no members"));
                }
                let dim = members[0].set.ambient_dim();
                for (i, m) in members.iter().enumerate() {
                    m.set.validate()?;
                    if m.set.ambient_dim() != dim || m.placement.lo.len() != dim as usize {
                        return Err(Error::param("union members have mixed dimensions"));
                    }
                    let (lo, hi) = m.set.bounding_box()?;
                    let (plo, phi) = m.placement.f64_bounds();
                    let inside = (0..dim as usize).all(|k| lo[k] >= plo[k] - 1e-12 && hi[k] <= phi[k] + 1e-12);
                    if !inside {
                        return Err(Error::param(format!("member {i} extends outside its placement box")));
                    }
                    for (j, other) in members.iter().enumerate().skip(i + 1) {
                        if !m.placement.interiors_disjoint(&other.placement) {
                            return Err(Error::param(format!(
                                "placements of members {i} and {j} overlap"
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Image under `x -> lambda x`.
    pub fn scaled(&self, lambda: ExactReal) -> SetDescriptor {
        let mul = |x: &ExactReal| ExactReal(x.ratio() * lambda.ratio());
        match self {
            SetDescriptor::PointSet1D { points } => SetDescriptor::PointSet1D {
                points: points.iter().map(mul).collect(),
            },
            SetDescriptor::IntervalUnion1D { intervals } => SetDescriptor::IntervalUnion1D {
                intervals: intervals.iter().map(|iv| [mul(&iv[0]), mul(&iv[1])]).collect(),
            },
            SetDescriptor::CantorBlock { params, offset, scale } => SetDescriptor::CantorBlock {
                params: *params,
                offset: mul(offset),
                scale: mul(scale),
            },
            SetDescriptor::StringEndpoints { string } => SetDescriptor::StringEndpoints {
                string: string.scaled(lambda.to_f64()),
            },
            SetDescriptor::Sphere { dim, radius, center } => SetDescriptor::Sphere {
                dim: *dim,
                radius: mul(radius),
                center: center.iter().map(mul).collect(),
            },
            SetDescriptor::PixelSet2D { raster } => {
                let mut r = raster.clone();
                r.extent = r.extent.map(|e| mul(&e));
                SetDescriptor::PixelSet2D { raster: r }
            }
            SetDescriptor::SierpinskiCarpet { level } => {
                let raster = crate::tube::carpet_raster(*level, *level);
                SetDescriptor::PixelSet2D { raster }.scaled(lambda)
            }
            SetDescriptor::UnionOfDescriptors { members } => SetDescriptor::UnionOfDescriptors {
                members: members
                    .iter()
                    .map(|m| PlacedMember {
                        set: m.set.scaled(lambda),
                        placement: BoxRegion {
                            lo: m.placement.lo.iter().map(mul).collect(),
                            hi: m.placement.hi.iter().map(mul).collect(),
                        },
                    })
                    .collect(),
            },
        }
    }
}

/// Region `Omega` of a relative fractal drum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", deny_unknown_fields)]
pub enum Region {
    Box(BoxRegion),
    /// `{0 < x < scale, 0 < y < scale * (x / scale)^alpha}`.
    CuspRegion { alpha: ExactReal, scale: ExactReal },
    /// `{0 < x < scale, 0 < y < scale * exp(-scale / x)}`.
    ExpCuspRegion { scale: ExactReal },
    /// Open complement of `A` inside its convex hull; for string endpoints
    /// this is the union of the open intervals `(a_{k+1}, a_k)`.
    HalfOpenComplement,
    PixelRegion2D { raster: Raster },
}

/// Relative fractal drum `(A, Omega)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelativeFractalDrum {
    pub set: SetDescriptor,
    pub region: Region,
    pub ambient_dim: u32,
}

impl RelativeFractalDrum {
    /// Origin in the plane relative to the power cusp of exponent `alpha`.
    pub fn cusp(alpha: ExactReal) -> Self {
        RelativeFractalDrum {
            set: SetDescriptor::PointSet1D {
                points: vec![ExactReal::integer(0)],
            },
            region: Region::CuspRegion {
                alpha,
                scale: ExactReal::integer(1),
            },
            ambient_dim: 2,
        }
    }

    pub fn exp_cusp() -> Self {
        RelativeFractalDrum {
            set: SetDescriptor::PointSet1D {
                points: vec![ExactReal::integer(0)],
            },
            region: Region::ExpCuspRegion {
                scale: ExactReal::integer(1),
            },
            ambient_dim: 2,
        }
    }

    /// `(A_L, Omega_L)` for a fractal string.
    pub fn string_drum(string: FractalString) -> Self {
        RelativeFractalDrum {
            set: SetDescriptor::StringEndpoints { string },
            region: Region::HalfOpenComplement,
            ambient_dim: 1,
        }
    }

    /// Sierpinski carpet relative to the unit square.
    pub fn carpet(level: u32) -> Self {
        RelativeFractalDrum {
            set: SetDescriptor::SierpinskiCarpet { level },
            region: Region::Box(BoxRegion {
                lo: vec![ExactReal::integer(0); 2],
                hi: vec![ExactReal::integer(1); 2],
            }),
            ambient_dim: 2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.ambient_dim == 0 {
            return Err(Error::param("ambient dimension must be >= 1"));
        }
        match &self.region {
            Region::CuspRegion { alpha, scale } => {
                if alpha.ratio() <= Ratio::from_integer(1) || scale.ratio() <= Ratio::zero() {
                    return Err(Error::param("cusp needs alpha > 1 and scale > 0"));
                }
            }
            Region::ExpCuspRegion { scale } => {
                if scale.ratio() <= Ratio::zero() {
                    return Err(Error::param("cusp scale must be positive"));
                }
            }
            Region::Box(b) => {
                if b.lo.len() != self.ambient_dim as usize || b.hi.len() != b.lo.len() {
                    return Err(Error::param("box region has wrong dimension"));
                }
            }
            Region::HalfOpenComplement | Region::PixelRegion2D { .. } => {}
        }
        Ok(())
    }

    /// Image under `x -> lambda x` of both the set and the region.
    pub fn scaled(&self, lambda: ExactReal) -> RelativeFractalDrum {
        let mul = |x: &ExactReal| ExactReal(x.ratio() * lambda.ratio());
        let region = match &self.region {
            Region::Box(b) => Region::Box(BoxRegion {
                lo: b.lo.iter().map(mul).collect(),
                hi: b.hi.iter().map(mul).collect(),
            }),
            Region::CuspRegion { alpha, scale } => Region::CuspRegion {
                alpha: *alpha,
                scale: mul(scale),
            },
            Region::ExpCuspRegion { scale } => Region::ExpCuspRegion { scale: mul(scale) },
            Region::HalfOpenComplement => Region::HalfOpenComplement,
            Region::PixelRegion2D { raster } => {
                let mut r = raster.clone();
                r.extent = r.extent.map(|e| mul(&e));
                Region::PixelRegion2D { raster: r }
            }
        };
        RelativeFractalDrum {
            set: self.set.scaled(lambda),
            region,
            ambient_dim: self.ambient_dim,
        }
    }
}

/// One tube-function sample `(t, |A_t|)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TubeSample {
    pub t: f64,
    pub volume: f64,
    /// True when the volume comes from an exact formula.
    pub exact: bool,
    pub error_bound: f64,
}

/// Tube samples ordered by increasing `t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TubeSamples {
    pub ambient_dim: u32,
    pub samples: Vec<TubeSample>,
}

impl TubeSamples {
    pub fn new(ambient_dim: u32, mut samples: Vec<TubeSample>) -> Result<Self> {
        samples.sort_by(|a, b| a.t.total_cmp(&b.t));
        if samples.iter().any(|s| !(s.t > 0.0) || !(s.volume >= 0.0)) {
            return Err(Error::param("tube samples need t > 0 and volume >= 0"));
        }
        if samples.windows(2).any(|w| w[1].t <= w[0].t) {
            return Err(Error::param("tube sample abscissae must be strictly increasing"));
        }
        for w in samples.windows(2) {
            let slack = w[0].error_bound + w[1].error_bound + 1e-12 * w[1].volume;
            if w[1].volume + slack < w[0].volume {
                return Err(Error::param(format!(
                    "tube function decreases between t = {} and t = {}",
                    w[0].t, w[1].t
                )));
            }
        }
        Ok(TubeSamples {
            ambient_dim,
            samples,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Number of decades spanned by the sample abscissae.
    pub fn decades(&self) -> f64 {
        match (self.samples.first(), self.samples.last()) {
            (Some(a), Some(b)) => (b.t / a.t).log10(),
            _ => 0.0,
        }
    }
}

/// A located pole with its residues.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoleReport {
    pub location: C64,
    pub multiplicity: u32,
    pub analytic_residue: Option<C64>,
    pub numeric_residue: C64,
    pub residue_discrepancy: f64,
}

impl PoleReport {
    pub fn new(location: C64, multiplicity: u32, analytic: Option<C64>, numeric: C64) -> Self {
        PoleReport {
            location,
            multiplicity,
            analytic_residue: analytic,
            numeric_residue: numeric,
            residue_discrepancy: analytic.map(|a| (a - numeric).norm()).unwrap_or(0.0),
        }
    }
}

/// Dimension value that may be infinite.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DimValue {
    Finite(f64),
    PlusInfinity,
    MinusInfinity,
}

impl DimValue {
    pub fn value(self) -> f64 {
        match self {
            DimValue::Finite(x) => x,
            DimValue::PlusInfinity => f64::INFINITY,
            DimValue::MinusInfinity => f64::NEG_INFINITY,
        }
    }
}

/// Content value with the degenerate flags.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContentValue {
    Finite(f64),
    Zero,
    Infinite,
}

impl ContentValue {
    pub fn from_estimate(x: f64) -> Self {
        if !x.is_finite() || x >= 1e6 {
            ContentValue::Infinite
        } else if x <= 1e-6 {
            ContentValue::Zero
        } else {
            ContentValue::Finite(x)
        }
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ContentValue::Finite(x) => Some(x),
            _ => None,
        }
    }
}

/// Classification of a bounded set by the oscillation of its tube function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum Classification {
    Degenerate,
    Measurable,
    Periodic { period: f64, oscillatory_period: f64 },
    Nonperiodic { candidate_periods: Vec<f64> },
}

/// Upper/lower dimensions and contents estimated from tube samples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimensionReport {
    pub upper_dim: DimValue,
    pub lower_dim: DimValue,
    /// Point estimate used for the content evaluation.
    pub dim: f64,
    pub lower_content: ContentValue,
    pub upper_content: ContentValue,
    pub classification: Option<Classification>,
    /// Local slopes per window as `(t_center, slope)`.
    pub window_slopes: Vec<(f64, f64)>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> ExactReal {
        s.parse().unwrap()
    }

    #[test]
    fn exact_real_parsing() {
        assert_eq!(q("1/3"), ExactReal::new(1, 3));
        assert_eq!(q("0.25"), ExactReal::new(1, 4));
        assert_eq!(q("-1.5e-2"), ExactReal::new(-3, 200));
        assert_eq!(q("2"), ExactReal::integer(2));
        assert!("1/0".parse::<ExactReal>().is_err());
        assert!("abc".parse::<ExactReal>().is_err());
        assert_eq!(q("6/4").to_string(), "3/2");
    }

    #[test]
    fn cantor_param_validation() {
        assert!(GeneralizedCantorParams::new(2, q("1/2")).is_err());
        assert!(GeneralizedCantorParams::new(1, q("1/4")).is_err());
        assert!(GeneralizedCantorParams::new(3, q("0")).is_err());
        let p = GeneralizedCantorParams::ternary();
        assert!((p.dimension() - 2f64.ln() / 3f64.ln()).abs() < 1e-15);
        assert!((p.gap_scale() - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn ternary_first_level() {
        let u = cantor_endpoints(&GeneralizedCantorParams::ternary(), 1).unwrap();
        assert_eq!(u.intervals.len(), 2);
        assert!((u.intervals[0][1] - 1.0 / 3.0).abs() < 1e-16);
        assert!((u.intervals[1][0] - 2.0 / 3.0).abs() < 1e-16);
        let u0 = cantor_endpoints(&GeneralizedCantorParams::ternary(), 0).unwrap();
        assert_eq!(u0.intervals, vec![[0.0, 1.0]]);
    }

    #[test]
    fn five_ratio_second_level() {
        let p = GeneralizedCantorParams::new(3, q("1/5")).unwrap();
        let exact = cantor_intervals_exact(&p, 2, 1000).unwrap();
        assert_eq!(exact.len(), 9);
        let total: Ratio<i128> = exact.iter().map(|(lo, hi)| hi - lo).sum();
        assert_eq!(total, Ratio::new(9, 25));
        // level-1 blocks [0,1/5],[2/5,3/5],[4/5,1] are separated by 1/5
        assert_eq!(exact[3].0 - exact[2].1, Ratio::new(1, 5));
        assert_eq!(exact[2].1, Ratio::new(5, 25));
        assert_eq!(exact[3].0, Ratio::new(10, 25));
    }

    #[test]
    fn construction_budget_enforced() {
        let err = cantor_endpoints_with_budget(&GeneralizedCantorParams::ternary(), 30, 1 << 20);
        assert!(matches!(err, Err(Error::Capacity { .. })));
    }

    #[test]
    fn dimension_specified_cantor_matches_ratio() {
        let p = GeneralizedCantorParams::with_dimension(2, q("1/2")).unwrap();
        assert!((p.a() - 0.25).abs() < 1e-15);
        let u = cantor_endpoints(&p, 3).unwrap();
        assert!((u.total_length() - 0.5f64.powi(3)).abs() < 1e-14);
    }

    #[test]
    fn string_endpoint_examples() {
        let g = string_endpoints(&FractalString::geometric(0.5), 3).unwrap();
        assert_eq!(g.points.len(), 3);
        for (got, want) in g.points.iter().zip([0.25, 0.5, 1.0]) {
            assert!((got - want).abs() < 1e-14);
        }
        let c = string_endpoints(&FractalString::cantor(), 2).unwrap();
        assert!((c.points[1] - 1.0).abs() < 1e-14);
        assert!((c.points[0] - 2.0 / 3.0).abs() < 1e-14);
        let t = string_endpoints(&FractalString::Telescoping, 2).unwrap();
        assert!((t.points[1] - 1.0).abs() < 1e-15 && (t.points[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn power_string_tail_matches_brute_force() {
        let s = FractalString::Power { exponent: 2.0 };
        let (total, bound) = s.tail_from(1);
        assert!((total - std::f64::consts::PI.powi(2) / 6.0).abs() < 1e-12 + bound);
        let (t10, _) = s.tail_from(10);
        let head: f64 = (1..10).map(|j| 1.0 / (j * j) as f64).sum();
        assert!((t10 - (total - head)).abs() < 1e-13);
    }

    #[test]
    fn finite_string_must_be_nonincreasing() {
        let bad = FractalString::Finite {
            lengths: vec![0.1, 0.2],
        };
        assert!(bad.validate().is_err());
        assert!(string_endpoints(&FractalString::Finite { lengths: vec![0.5] }, 2).is_err());
    }

    #[test]
    fn union_rejects_overlapping_placements() {
        let block = |lo: i128| PlacedMember {
            set: SetDescriptor::CantorBlock {
                params: GeneralizedCantorParams::ternary(),
                offset: ExactReal::integer(lo),
                scale: ExactReal::integer(1),
            },
            placement: BoxRegion::interval(ExactReal::integer(lo), ExactReal::integer(lo + 1)),
        };
        let ok = SetDescriptor::UnionOfDescriptors {
            members: vec![block(0), block(1)],
        };
        assert!(ok.validate().is_ok());
        let mut overlapping = block(1);
        overlapping.placement = BoxRegion::interval(q("0.5"), q("2"));
        let bad = SetDescriptor::UnionOfDescriptors {
            members: vec![block(0), overlapping],
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn descriptor_json_roundtrip() {
        let d = RelativeFractalDrum::cusp(q("2"));
        let text = serde_json::to_string(&d).unwrap();
        assert!(text.contains("\"alpha\":\"2\""));
        let back: RelativeFractalDrum = serde_json::from_str(&text).unwrap();
        assert_eq!(back, d);
        let unknown = r#"{"variant":"PointSet1D","points":["0"],"extra":1}"#;
        assert!(serde_json::from_str::<SetDescriptor>(unknown).is_err());
    }

    #[test]
    fn tube_samples_reject_decreasing_volume() {
        let s = |t: f64, v: f64| TubeSample {
            t,
            volume: v,
            exact: true,
            error_bound: 0.0,
        };
        assert!(TubeSamples::new(1, vec![s(0.1, 1.0), s(0.2, 0.5)]).is_err());
        assert!(TubeSamples::new(1, vec![s(0.2, 1.0), s(0.1, 0.5)]).is_ok());
    }

    #[test]
    fn content_flags() {
        assert_eq!(ContentValue::from_estimate(2e6), ContentValue::Infinite);
        assert_eq!(ContentValue::from_estimate(1e-7), ContentValue::Zero);
        assert_eq!(ContentValue::from_estimate(0.5), ContentValue::Finite(0.5));
    }
}
