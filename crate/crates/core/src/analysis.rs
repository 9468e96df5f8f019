//! Residues, pole location, dimension and oscillation estimators, classification.

use std::f64::consts::{LN_10, PI};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::forms::{MeromorphicForm, Window};
use crate::model::{Classification, ContentValue, DimValue, DimensionReport, PoleReport, TubeSamples};
use crate::quad::gauss_kronrod;
use crate::{Error, Result, C64};

/// Analytic function of a complex variable shared across threads.
pub type ComplexFn<'a> = &'a (dyn Fn(C64) -> C64 + Sync);

/// Largest node count tried by [`numeric_residue`].
const MAX_RESIDUE_NODES: usize = 1 << 17;

/// `(1/2 pi i) oint f ds` over the circle `|s - pole| = radius`.
///
/// Uses the trapezoidal rule, which converges geometrically for analytic
/// integrands on a circle, doubling the node count until two successive
/// values agree within `1e-10` relative.
pub fn numeric_residue(f: ComplexFn<'_>, pole: C64, radius: f64) -> Result<C64> {
    if !(radius > 0.0) {
        return Err(Error::param("residue radius must be positive"));
    }
    let sum_nodes = |m: usize, offset: usize, stride: usize| -> (C64, f64) {
        (offset..m)
            .step_by(stride)
            .map(|j| {
                let z = C64::from_polar(radius, 2.0 * PI * j as f64 / m as f64);
                let v = f(pole + z);
                (v * z, v.norm())
            })
            .fold((C64::new(0.0, 0.0), 0.0f64), |(a, b), (v, n)| (a + v, b.max(n)))
    };
    let mut m = 16;
    let (mut acc, mut peak) = sum_nodes(m, 0, 1);
    let mut prev = acc / m as f64;
    while m < MAX_RESIDUE_NODES {
        // reuse the old nodes: the new ones are the odd indices of the doubled grid
        let (extra, p) = sum_nodes(2 * m, 1, 2);
        acc += extra;
        peak = peak.max(p);
        m *= 2;
        let value = acc / m as f64;
        if !value.re.is_finite() || !value.im.is_finite() {
            return Err(Error::NonStabilizing(format!("non-finite values on the circle around {pole}")));
        }
        let floor = 1e-14 * peak * radius;
        if (value - prev).norm() <= 1e-10 * value.norm() + floor && m >= 64 {
            return Ok(value);
        }
        prev = value;
    }
    Err(Error::NonStabilizing(format!(
        "contour residue at {pole} with radius {radius} did not stabilize; a second pole may be nearby"
    )))
}

/// Residue at a simple real pole `d` of a function known only to the right of it.
///
/// With `g(h) = h f(d + h)`, Richardson extrapolation of `g(h)` and `g(h/10)`
/// removes the linear term.
pub fn richardson_residue(f: &dyn Fn(f64) -> Result<C64>, d: f64, h: f64) -> Result<C64> {
    let g = |x: f64| f(d + x).map(|v| v * x);
    let (g1, g2) = (g(h)?, g(0.1 * h)?);
    Ok((g2 * 10.0 - g1) / 9.0)
}

/// A pole found by [`pole_scan`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScannedPole {
    pub location: C64,
    pub multiplicity: u32,
    pub residue: C64,
}

#[derive(Clone, Copy, Debug)]
struct Cell {
    x: [f64; 2],
    y: [f64; 2],
}

impl Cell {
    fn size(&self) -> f64 {
        (self.x[1] - self.x[0]).max(self.y[1] - self.y[0])
    }

    fn contains(&self, s: C64) -> bool {
        s.re > self.x[0] && s.re < self.x[1] && s.im > self.y[0] && s.im < self.y[1]
    }

    fn edge_distance(&self, s: C64) -> f64 {
        (s.re - self.x[0])
            .min(self.x[1] - s.re)
            .min(s.im - self.y[0])
            .min(self.y[1] - s.im)
    }

    fn corners(&self) -> [C64; 4] {
        [
            C64::new(self.x[0], self.y[0]),
            C64::new(self.x[1], self.y[0]),
            C64::new(self.x[1], self.y[1]),
            C64::new(self.x[0], self.y[1]),
        ]
    }

    /// Four children split off-center so symmetric pole lattices never sit on a split line.
    fn split(&self, frac: f64) -> [Cell; 4] {
        let xm = self.x[0] + frac * (self.x[1] - self.x[0]);
        let ym = self.y[0] + frac * (self.y[1] - self.y[0]);
        [
            Cell { x: [self.x[0], xm], y: [self.y[0], ym] },
            Cell { x: [xm, self.x[1]], y: [self.y[0], ym] },
            Cell { x: [self.x[0], xm], y: [ym, self.y[1]] },
            Cell { x: [xm, self.x[1]], y: [ym, self.y[1]] },
        ]
    }
}

struct Boundary {
    winding: i64,
    integral: C64,
    moment: C64,
    scale: f64,
}

/// Largest number of segments per edge when tracking the argument.
const MAX_EDGE_SEGMENTS: usize = 1 << 14;

/// Winding number of `f` and the integrals `oint f`, `oint s f` around a cell.
fn boundary(f: ComplexFn<'_>, cell: &Cell) -> Result<Boundary> {
    let corners = cell.corners();
    let mut total_arg = 0.0;
    let mut peak = 0.0f64;
    for e in 0..4 {
        let (a, b) = (corners[e], corners[(e + 1) % 4]);
        let mut n = 64;
        loop {
            let vals: Vec<C64> = (0..=n).map(|j| f(a + (b - a) * (j as f64 / n as f64))).collect();
            let bad = vals.iter().any(|v| !v.re.is_finite() || !v.im.is_finite() || v.norm() > 1e250 || v.norm() < 1e-250);
            let steps: Vec<f64> = vals.windows(2).map(|w| (w[1] / w[0]).arg()).collect();
            if !bad && steps.iter().all(|d| d.abs() <= 0.5) {
                total_arg += steps.iter().sum::<f64>();
                peak = vals.iter().fold(peak, |p, v| p.max(v.norm()));
                break;
            }
            n *= 2;
            if n > MAX_EDGE_SEGMENTS {
                return Err(Error::BoundaryPole(format!(
                    "argument of f is ill-conditioned on the edge from {a} to {b}"
                )));
            }
        }
    }
    let w = total_arg / (2.0 * PI);
    let winding = w.round();
    if (w - winding).abs() > 0.05 {
        return Err(Error::BoundaryPole(format!("winding number {w} is not close to an integer")));
    }
    let mut integral = C64::new(0.0, 0.0);
    let mut moment = C64::new(0.0, 0.0);
    for e in 0..4 {
        let (a, b) = (corners[e], corners[(e + 1) % 4]);
        let dir = b - a;
        let r = gauss_kronrod(|x| f(a + dir * x) * dir, 0.0, 1.0, 1e-300, 1e-13, 400);
        let rm = gauss_kronrod(
            |x| {
                let s = a + dir * x;
                f(s) * s * dir
            },
            0.0,
            1.0,
            1e-300,
            1e-13,
            400,
        );
        integral += r.value;
        moment += rm.value;
    }
    let perimeter = 2.0 * ((cell.x[1] - cell.x[0]) + (cell.y[1] - cell.y[0]));
    Ok(Boundary {
        winding: winding as i64,
        integral,
        moment,
        scale: peak * perimeter / (2.0 * PI),
    })
}

/// Subdivision depth below which cells keep splitting.
const MAX_DEPTH: u32 = 24;

fn scan_cell(f: ComplexFn<'_>, cell: Cell, depth: u32, frac: f64, out: &mut Vec<ScannedPole>) -> Result<()> {
    let b = boundary(f, &cell)?;
    let excess = -b.winding;
    let res_sum = b.integral / C64::new(0.0, 2.0 * PI);
    let significant = res_sum.norm() > 1e-9 * b.scale;
    if excess <= 0 && !significant {
        return Ok(());
    }
    if excess == 1 {
        let candidate = b.moment / b.integral;
        if cell.contains(candidate) {
            let d = cell.edge_distance(candidate);
            let tiny = (1e-3 * cell.size()).min(0.5 * d);
            let probe = Cell {
                x: [candidate.re - tiny, candidate.re + tiny],
                y: [candidate.im - tiny, candidate.im + tiny],
            };
            if let Ok(pb) = boundary(f, &probe) {
                if pb.winding == -1 {
                    let residue = numeric_residue(f, candidate, 0.5 * d)?;
                    if (residue - res_sum).norm() <= 1e-6 * residue.norm().max(1e-12 * b.scale) {
                        out.push(ScannedPole {
                            location: candidate,
                            multiplicity: 1,
                            residue,
                        });
                        return Ok(());
                    }
                }
            }
        }
    }
    if depth >= MAX_DEPTH || cell.size() < 1e-9 {
        if excess >= 1 {
            let center = C64::new(0.5 * (cell.x[0] + cell.x[1]), 0.5 * (cell.y[0] + cell.y[1]));
            out.push(ScannedPole {
                location: center,
                multiplicity: excess as u32,
                residue: res_sum,
            });
        }
        return Ok(());
    }
    for child in cell.split(frac) {
        scan_cell(f, child, depth + 1, frac, out)?;
    }
    Ok(())
}

/// Offsets of interior grid lines, as fractions of the cell width.
const GRID_SHIFT: [f64; 2] = [0.0731, 0.3131];
const SPLIT_FRACTION: [f64; 2] = [0.5173, 0.4619];

fn scan_grid(f: ComplexFn<'_>, window: &Window, grid: usize, attempt: usize) -> Result<Vec<ScannedPole>> {
    let lines = |lo: f64, hi: f64| -> Vec<f64> {
        let w = (hi - lo) / grid as f64;
        let mut v: Vec<f64> = (0..=grid)
            .map(|i| {
                if i == 0 || i == grid {
                    lo + i as f64 * w
                } else {
                    lo + (i as f64 + GRID_SHIFT[attempt]) * w
                }
            })
            .collect();
        v[grid] = hi;
        v
    };
    let xs = lines(window.re[0], window.re[1]);
    let ys = lines(window.im[0], window.im[1]);
    let cells: Vec<Cell> = (0..grid)
        .flat_map(|j| {
            let (xs, ys) = (&xs, &ys);
            (0..grid).map(move |i| Cell {
                x: [xs[i], xs[i + 1]],
                y: [ys[j], ys[j + 1]],
            })
        })
        .collect();
    let per_cell: Vec<Result<Vec<ScannedPole>>> = cells
        .par_iter()
        .map(|cell| {
            let mut out = Vec::new();
            scan_cell(f, *cell, 0, SPLIT_FRACTION[attempt], &mut out).map(|_| out)
        })
        .collect();
    let mut poles = Vec::new();
    for r in per_cell {
        poles.extend(r?);
    }
    poles.sort_by(|a, b| {
        a.location
            .im
            .total_cmp(&b.location.im)
            .then(a.location.re.total_cmp(&b.location.re))
    });
    Ok(poles)
}

/// Locates the poles of `f` in `window` by the argument principle.
///
/// The window is cut into `grid x grid` cells. A cell whose winding number
/// shows an excess of poles over zeros, or whose contour integral is not
/// negligible, is subdivided until it holds a single pole; the pole is then
/// placed by the ratio `oint s f / oint f` and its residue computed by
/// [`numeric_residue`]. If `f` is ill-conditioned on an interior grid line,
/// the grid is shifted once before giving up.
pub fn pole_scan(f: ComplexFn<'_>, window: &Window, grid: usize) -> Result<Vec<ScannedPole>> {
    if grid == 0 {
        return Err(Error::param("grid must be positive"));
    }
    match scan_grid(f, window, grid, 0) {
        Err(Error::BoundaryPole(_)) => scan_grid(f, window, grid, 1),
        other => other,
    }
}

/// [`pole_scan`] on a closed form, pairing each pole with its analytic residue.
pub fn pole_scan_form(form: &MeromorphicForm, window: &Window, grid: usize) -> Result<Vec<PoleReport>> {
    let f = |s: C64| form.eval(s);
    let found = pole_scan(&f, window, grid)?;
    let analytic = form.poles.in_window(window);
    Ok(found
        .into_iter()
        .map(|p| {
            let exact = analytic
                .iter()
                .find(|a| (a.location - p.location).norm() <= 1e-6 * a.location.norm().max(1.0));
            let (location, residue) = match exact {
                Some(a) => (a.location, form.residue(a.location).ok()),
                None => (p.location, None),
            };
            PoleReport::new(location, p.multiplicity, residue, p.residue)
        })
        .collect())
}

/// Samples in the `(ln t, ln V)` plane, smallest `t` first.
fn log_samples(samples: &TubeSamples) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut lt = Vec::with_capacity(samples.len());
    let mut lv = Vec::with_capacity(samples.len());
    for s in &samples.samples {
        if !(s.volume > 0.0) {
            return Err(Error::param(format!("tube volume must be positive, got {} at t = {}", s.volume, s.t)));
        }
        lt.push(s.t.ln());
        lv.push(s.volume.ln());
    }
    Ok((lt, lv))
}

fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
    }
    sxy / sxx
}

/// Dimension below which a drum is reported as `-infinity`.
const MINUS_INFINITY_DIM: f64 = -100.0;

/// Windows of one decade in `t`, stepped by 1/8 decade, over the smallest two decades.
fn window_slopes(lt: &[f64], lv: &[f64], n: f64) -> Vec<(f64, f64)> {
    let lo = lt[0];
    let top = lt[lt.len() - 1];
    let span = (top - lo).min(2.0 * LN_10);
    let width = LN_10.min(span);
    let step = LN_10 / 8.0;
    let mut out = Vec::new();
    let mut start = lo;
    while start + width <= lo + span + 1e-12 {
        let idx: Vec<usize> = (0..lt.len())
            .filter(|&i| lt[i] >= start - 1e-12 && lt[i] <= start + width + 1e-12)
            .collect();
        if idx.len() >= 3 {
            let x: Vec<f64> = idx.iter().map(|&i| lt[i]).collect();
            let y: Vec<f64> = idx.iter().map(|&i| lv[i]).collect();
            out.push(((start + 0.5 * width).exp(), n - ls_slope(&x, &y)));
        }
        start += step;
    }
    out
}

/// Upper/lower Minkowski dimensions and contents from tube samples.
///
/// Local slopes of `ln |A_t|` against `ln t` over one-decade windows give the
/// dimension range. If the normalized tube function is log-periodic, the
/// dimension is refined so that it is exactly periodic; contents are the
/// extremes of `|A_t| / t^(N - D)` on the smallest decade.
pub fn estimate_dimensions(samples: &TubeSamples) -> Result<DimensionReport> {
    let decades = samples.decades();
    if decades < 1.5 {
        return Err(Error::InsufficientRange(format!(
            "samples span {decades:.2} decades; at least 1.5 are needed"
        )));
    }
    let n = samples.ambient_dim as f64;
    let (lt, lv) = log_samples(samples)?;
    let slopes = window_slopes(&lt, &lv, n);
    if slopes.is_empty() {
        return Err(Error::InsufficientRange("no window holds three samples".into()));
    }
    let upper = slopes.iter().map(|w| w.1).fold(f64::NEG_INFINITY, f64::max);
    let lower = slopes.iter().map(|w| w.1).fold(f64::INFINITY, f64::min);
    if lower < MINUS_INFINITY_DIM {
        return Ok(DimensionReport {
            upper_dim: if upper < MINUS_INFINITY_DIM { DimValue::MinusInfinity } else { DimValue::Finite(upper) },
            lower_dim: DimValue::MinusInfinity,
            dim: f64::NEG_INFINITY,
            lower_content: ContentValue::Zero,
            upper_content: ContentValue::Zero,
            classification: Some(Classification::Degenerate),
            window_slopes: slopes,
        });
    }
    let cut = lt[0] + (lt[lt.len() - 1] - lt[0]).min(2.0 * LN_10);
    let k = lt.iter().take_while(|&&x| x <= cut + 1e-12).count();
    let mut dim = n - ls_slope(&lt[..k], &lv[..k]);
    dim = refine_dimension_by_period(&lt, &lv, n, dim);
    let k1 = lt.iter().take_while(|&&x| x <= lt[0] + LN_10 + 1e-12).count().max(2);
    let ratios = (0..k1).map(|i| (lv[i] - (n - dim) * lt[i]).exp());
    let (lo_c, hi_c) = ratios.fold((f64::INFINITY, 0.0f64), |(a, b), r| (a.min(r), b.max(r)));
    Ok(DimensionReport {
        upper_dim: DimValue::Finite(upper.max(dim)),
        lower_dim: DimValue::Finite(lower.min(dim)),
        dim,
        lower_content: ContentValue::from_estimate(lo_c),
        upper_content: ContentValue::from_estimate(hi_c),
        classification: None,
        window_slopes: slopes,
    })
}

/// If `G = |A_t| t^(D-N)` is periodic in `u = ln(1/t)`, adjusts `D` until it is exactly so.
fn refine_dimension_by_period(lt: &[f64], lv: &[f64], n: f64, dim: f64) -> f64 {
    // u ascending means t descending
    let u: Vec<f64> = lt.iter().rev().map(|x| -x).collect();
    let lvr: Vec<f64> = lv.iter().rev().copied().collect();
    let mut d = dim;
    for _ in 0..4 {
        let h: Vec<f64> = u.iter().zip(&lvr).map(|(u, v)| v + (n - d) * u).collect();
        let Some(period) = detect_period(&u, &h).period else {
            return d;
        };
        let span = u[u.len() - 1] - u[0];
        let reps = (span / period).floor().max(1.0);
        let lag = reps * period;
        if lag > span {
            return d;
        }
        let grid = Grid::new(&u, &h);
        let diffs: Vec<f64> = u
            .iter()
            .zip(&h)
            .filter(|(x, _)| **x + lag <= u[u.len() - 1])
            .map(|(x, y)| grid.at(x + lag) - y)
            .collect();
        if diffs.is_empty() {
            return d;
        }
        let mean = diffs.iter().sum::<f64>() / diffs.len() as f64;
        // h(u + lag) - h(u) = (D - d) * lag when D is the true dimension
        d += mean / lag;
    }
    d
}

/// Piecewise-linear interpolation on an increasing grid.
struct Grid<'a> {
    x: &'a [f64],
    y: &'a [f64],
    uniform: Option<f64>,
}

impl<'a> Grid<'a> {
    fn new(x: &'a [f64], y: &'a [f64]) -> Self {
        let h = (x[x.len() - 1] - x[0]) / (x.len() - 1) as f64;
        let uniform = x.windows(2).all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h).then_some(h);
        Grid { x, y, uniform }
    }

    fn at(&self, t: f64) -> f64 {
        let n = self.x.len();
        let i = match self.uniform {
            Some(h) => (((t - self.x[0]) / h).floor() as isize).clamp(0, n as isize - 2) as usize,
            None => self.x.partition_point(|&v| v <= t).clamp(1, n - 1) - 1,
        };
        let (x0, x1) = (self.x[i], self.x[i + 1]);
        let w = (t - x0) / (x1 - x0);
        self.y[i] * (1.0 - w) + self.y[i + 1] * w
    }
}

/// Outcome of the autocorrelation period search.
#[derive(Clone, Debug, Default)]
struct PeriodSearch {
    period: Option<f64>,
    candidates: Vec<(f64, f64)>,
}

/// Period search range and resolution in `u = ln(1/t)`.
const PERIOD_RANGE: [f64; 2] = [0.2, 5.0];
const PERIOD_STEP: f64 = 1e-4;
/// Normalized autocorrelation a single period must reach.
const PERIOD_ACCEPT: f64 = 0.999;

/// `1 - mean((h(u+L) - h(u))^2) / (2 var h)` over the overlap.
fn autocorrelation(grid: &Grid<'_>, var: f64, lag: f64) -> f64 {
    let last = grid.x[grid.x.len() - 1];
    let mut acc = 0.0;
    let mut count = 0usize;
    for (x, y) in grid.x.iter().zip(grid.y) {
        if x + lag > last {
            break;
        }
        let d = grid.at(x + lag) - y;
        acc += d * d;
        count += 1;
    }
    if count < 8 {
        return f64::NEG_INFINITY;
    }
    1.0 - acc / count as f64 / (2.0 * var)
}

fn detect_period(u: &[f64], h: &[f64]) -> PeriodSearch {
    let n = h.len() as f64;
    let mean = h.iter().sum::<f64>() / n;
    let var = h.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let span = u[u.len() - 1] - u[0];
    if var <= 1e-20 * mean * mean || span < 2.0 * PERIOD_RANGE[0] {
        return PeriodSearch::default();
    }
    let grid = Grid::new(u, h);
    let hi = PERIOD_RANGE[1].min(0.5 * span);
    let count = ((hi - PERIOD_RANGE[0]) / PERIOD_STEP).floor() as usize;
    let rho: Vec<f64> = (0..=count)
        .into_par_iter()
        .map(|k| autocorrelation(&grid, var, PERIOD_RANGE[0] + k as f64 * PERIOD_STEP))
        .collect();
    let mut peaks: Vec<(f64, f64)> = (1..rho.len().saturating_sub(1))
        .filter(|&k| rho[k] >= rho[k - 1] && rho[k] > rho[k + 1])
        .map(|k| (PERIOD_RANGE[0] + k as f64 * PERIOD_STEP, rho[k]))
        .collect();
    if peaks.is_empty() {
        return PeriodSearch::default();
    }
    let best = peaks.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    // the fundamental is the smallest lag that reaches the best correlation
    let fundamental = peaks.iter().find(|p| p.1 >= best - 1e-4).copied().expect("nonempty");
    let polished = golden_max(|l| autocorrelation(&grid, var, l), fundamental.0 - PERIOD_STEP, fundamental.0 + PERIOD_STEP);
    let rho_t = autocorrelation(&grid, var, polished);
    peaks.sort_by(|a, b| b.1.total_cmp(&a.1));
    let mut candidates: Vec<(f64, f64)> = Vec::new();
    for p in peaks {
        if candidates.iter().all(|c| (c.0 - p.0).abs() > 0.05) {
            candidates.push(p);
        }
        if candidates.len() == 2 {
            break;
        }
    }
    PeriodSearch {
        period: (rho_t >= PERIOD_ACCEPT).then_some(polished),
        candidates,
    }
}

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..60 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
        if b - a < 1e-12 {
            break;
        }
    }
    0.5 * (a + b)
}

/// Log-periodic fit of a tube function, `|A_t| = t^(N-D) G(ln 1/t)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OscillationFit {
    pub dim: f64,
    /// Detected period of `G` in `u = ln(1/t)`; unset for constant or aperiodic `G`.
    pub period: Option<f64>,
    /// One period of `G` as `(u, G(u))`.
    pub g_samples: Vec<(f64, f64)>,
    /// `(k, (1/T) int_0^T G(u) e^(-2 pi i k u / T) du)`.
    pub fourier: Vec<(i32, C64)>,
    /// Relative rms mismatch between `G(u)` and `G(u + T)`, or the relative spread for constant fits.
    pub fit_residual: f64,
    /// Strongest autocorrelation peaks when no single period is accepted.
    pub candidate_periods: Vec<f64>,
}

impl OscillationFit {
    pub fn mean(&self) -> f64 {
        self.fourier.iter().find(|c| c.0 == 0).map(|c| c.1.re).unwrap_or(f64::NAN)
    }

    pub fn coefficient(&self, k: i32) -> Option<C64> {
        self.fourier.iter().find(|c| c.0 == k).map(|c| c.1)
    }
}

/// `(1/T) int_a^{a+T} G(u) e^{-i w u} du` for the piecewise-linear interpolant of `(u, g)`.
fn linear_fourier(u: &[f64], g: &[f64], a: f64, period: f64, w: f64) -> C64 {
    let grid = Grid::new(u, g);
    let b = a + period;
    let mut knots = vec![a];
    knots.extend(u.iter().copied().filter(|&x| x > a && x < b));
    knots.push(b);
    let e = |x: f64| C64::new(0.0, -w * x).exp();
    let mut acc = C64::new(0.0, 0.0);
    for k in knots.windows(2) {
        let (x0, x1) = (k[0], k[1]);
        let (g0, g1) = (grid.at(x0), grid.at(x1));
        let h = x1 - x0;
        if w == 0.0 {
            acc += C64::new(0.5 * (g0 + g1) * h, 0.0);
            continue;
        }
        let iw = C64::new(0.0, w);
        let i0 = (e(x0) - e(x1)) / iw;
        let i1 = -e(x1) * h / iw + (e(x0) - e(x1)) / (iw * iw);
        acc += i0 * g0 + i1 * ((g1 - g0) / h);
    }
    acc / period
}

/// Fits `|A_t| t^(D-N)` as a periodic function of `u = ln(1/t)` and extracts its Fourier coefficients.
pub fn fit_log_periodic(samples: &TubeSamples, dim: f64, harmonics: u32) -> Result<OscillationFit> {
    if samples.len() < 16 {
        return Err(Error::InsufficientRange("need at least 16 samples for an oscillation fit".into()));
    }
    let n = samples.ambient_dim as f64;
    let pts: Vec<_> = samples.samples.iter().rev().collect();
    let u: Vec<f64> = pts.iter().map(|p| -p.t.ln()).collect();
    let g: Vec<f64> = pts.iter().map(|p| p.volume * p.t.powf(dim - n)).collect();
    let mean = g.iter().sum::<f64>() / g.len() as f64;
    let spread = g.iter().fold(0.0f64, |m, x| m.max((x - mean).abs())) / mean;
    let search = detect_period(&u, &g);
    let last = u[u.len() - 1];
    let harmonics = harmonics as i32;
    let Some(period) = search.period else {
        let range = last - u[0];
        let fourier = (-harmonics..=harmonics)
            .map(|k| (k, linear_fourier(&u, &g, u[0], range, 2.0 * PI * k as f64 / range)))
            .collect();
        return Ok(OscillationFit {
            dim,
            period: None,
            g_samples: u.iter().copied().zip(g.iter().copied()).collect(),
            fourier,
            fit_residual: spread,
            candidate_periods: search.candidates.iter().map(|c| c.0).collect(),
        });
    };
    // the period nearest t -> 0, where the remainder term is smallest
    let start = last - period;
    let fourier = (-harmonics..=harmonics)
        .map(|k| (k, linear_fourier(&u, &g, start, period, 2.0 * PI * k as f64 / period)))
        .collect();
    let grid = Grid::new(&u, &g);
    let diffs: Vec<f64> = u
        .iter()
        .zip(&g)
        .filter(|(x, _)| **x + period <= last)
        .map(|(x, y)| grid.at(x + period) - y)
        .collect();
    let rms = (diffs.iter().map(|d| d * d).sum::<f64>() / diffs.len() as f64).sqrt();
    Ok(OscillationFit {
        dim,
        period: Some(period),
        g_samples: u
            .iter()
            .copied()
            .zip(g.iter().copied())
            .filter(|(x, _)| *x >= start)
            .collect(),
        fourier,
        fit_residual: rms / mean,
        candidate_periods: vec![period],
    })
}

/// Relative oscillation amplitude below which `G` counts as constant.
const MEASURABLE_TOL: f64 = 1e-3;
/// Relative fit residual below which a single period is accepted.
const PERIODIC_TOL: f64 = 1e-3;
/// Spread of window dimensions above which the dimension is considered undetermined.
const DIM_SPREAD_TOL: f64 = 0.1;

/// Sorts a set into degenerate, measurable, periodic or nonperiodic.
pub fn classify(report: &DimensionReport, fit: &OscillationFit) -> Classification {
    let flagged = |c: ContentValue| !matches!(c, ContentValue::Finite(_));
    let spread = report.upper_dim.value() - report.lower_dim.value();
    if flagged(report.lower_content) || flagged(report.upper_content) || !(spread <= DIM_SPREAD_TOL) {
        return Classification::Degenerate;
    }
    let amplitude = fit
        .g_samples
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.1), b.max(p.1)));
    if (amplitude.1 - amplitude.0) <= MEASURABLE_TOL * fit.mean().abs() {
        return Classification::Measurable;
    }
    match fit.period {
        Some(t) if fit.fit_residual <= PERIODIC_TOL => Classification::Periodic {
            period: t,
            oscillatory_period: 2.0 * PI / t,
        },
        _ => Classification::Nonperiodic {
            candidate_periods: fit.candidate_periods.clone(),
        },
    }
}

/// Residue and content identities for one set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidueContentReport {
    pub dim: f64,
    /// Contour residue of the distance zeta function at `D`.
    pub distance_residue: C64,
    /// `distance_residue / (N - D)`.
    pub tube_residue: f64,
    pub lower_content: f64,
    pub upper_content: f64,
    pub fourier_mean: f64,
    pub measurable: bool,
    /// Distance of `tube_residue` from the nearer content, or from the common value if measurable.
    pub margin: f64,
    pub numerical_error: f64,
    pub holds: bool,
}

/// Checks `res(zeta~, D) = M` (measurable) or `M_* < res(zeta~, D) < M^*` with a margin of
/// ten times the numerical error (nonmeasurable).
///
/// The contents come from the caller, so that they can be computed by an independent route.
pub fn residue_content_check(
    distance_form: &MeromorphicForm,
    ambient_dim: u32,
    dim: f64,
    contents: (f64, f64),
    fit: &OscillationFit,
) -> Result<ResidueContentReport> {
    let f = |s: C64| distance_form.eval(s);
    let d = C64::new(dim, 0.0);
    let radius = 0.05;
    let r1 = numeric_residue(&f, d, radius)?;
    let r2 = numeric_residue(&f, d, 0.5 * radius)?;
    let err = (r1 - r2).norm() + 1e-12 * r1.norm();
    let tube_residue = r1.re / (ambient_dim as f64 - dim);
    let (lo, hi) = contents;
    let measurable = (hi - lo).abs() <= 1e-9 * hi.abs();
    let (margin, holds) = if measurable {
        let m = (tube_residue - hi).abs();
        (m, m <= 1e-8 * hi.abs() + 10.0 * err)
    } else {
        let m = (tube_residue - lo).min(hi - tube_residue);
        (m, m >= 10.0 * err && m > 0.0)
    };
    Ok(ResidueContentReport {
        dim,
        distance_residue: r1,
        tube_residue,
        lower_content: lo,
        upper_content: hi,
        fourier_mean: fit.mean(),
        measurable,
        margin,
        numerical_error: err,
        holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::{cantor_distance_zeta_form, sierpinski_relative_zeta_form, sphere_tube_zeta_form};
    use crate::model::{GeneralizedCantorParams, SetDescriptor, TubeSample};
    use crate::tube;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn cantor_samples(periods: usize) -> TubeSamples {
        let p = GeneralizedCantorParams::ternary();
        let c0 = p.gap_scale();
        let ratio = (-(p.period()) / 128.0).exp();
        let grid = tube::geometric_grid(c0, ratio, 128 * periods + 1);
        tube::sample_tube(tube::TubeTarget::Set(&SetDescriptor::cantor(p)), &grid).unwrap()
    }

    #[test]
    fn simple_pole_residue() {
        let f = |s: C64| C64::new(1.0, 0.0) / (s - 1.0);
        let r = numeric_residue(&f, c(1.0, 0.0), 0.3).unwrap();
        assert!((r - 1.0).norm() < 1e-12);
    }

    #[test]
    fn residue_is_radius_invariant() {
        let form = cantor_distance_zeta_form(&GeneralizedCantorParams::ternary(), 0.25).unwrap();
        let f = |s: C64| form.eval(s);
        let d = form.poles.lattices[0].pole(1);
        let a = numeric_residue(&f, d, 0.2).unwrap();
        let b = numeric_residue(&f, d, 0.1).unwrap();
        assert!((a - b).norm() <= 1e-9 * a.norm());
        assert!((a - form.residue(d).unwrap()).norm() <= 1e-8 * a.norm());
    }

    #[test]
    fn scan_finds_cantor_lattice() {
        let form = cantor_distance_zeta_form(&GeneralizedCantorParams::ternary(), 0.25).unwrap();
        let w = Window::new([0.5, 0.8], [-10.0, 10.0]).unwrap();
        let poles = pole_scan_form(&form, &w, 4).unwrap();
        assert_eq!(poles.len(), 3, "{poles:?}");
        for p in &poles {
            assert!(p.residue_discrepancy <= 1e-8 * p.numeric_residue.norm(), "{p:?}");
        }
    }

    #[test]
    fn scan_finds_single_carpet_pole() {
        let form = sierpinski_relative_zeta_form();
        let w = Window::new([1.5, 2.0], [-1.0, 1.0]).unwrap();
        let poles = pole_scan_form(&form, &w, 2).unwrap();
        assert_eq!(poles.len(), 1);
        assert!((poles[0].location.re - 8f64.ln() / 3f64.ln()).abs() < 1e-6);
    }

    #[test]
    fn scan_of_entire_function_is_empty() {
        let p = GeneralizedCantorParams::ternary();
        let f1 = cantor_distance_zeta_form(&p, 0.25).unwrap();
        let f2 = cantor_distance_zeta_form(&p, 0.4).unwrap();
        let diff = |s: C64| f1.eval(s) - f2.eval(s);
        let w = Window::new([0.3, 1.0], [-8.0, 8.0]).unwrap();
        assert!(pole_scan(&diff, &w, 4).unwrap().is_empty());
    }

    #[test]
    fn scan_handles_real_axis_poles() {
        let form = sphere_tube_zeta_form(3, 1.0, 0.5).unwrap();
        let w = Window::new([-1.0, 3.0], [-1.0, 1.0]).unwrap();
        let poles = pole_scan_form(&form, &w, 2).unwrap();
        assert_eq!(poles.len(), 2);
    }

    #[test]
    fn circle_dimension_and_content() {
        let grid = tube::geometric_grid(0.5, 0.95, 400);
        let set = SetDescriptor::Sphere {
            dim: 2,
            radius: crate::model::ExactReal::integer(1),
            center: vec![],
        };
        let s = tube::sample_tube(tube::TubeTarget::Set(&set), &grid).unwrap();
        let r = estimate_dimensions(&s).unwrap();
        assert!((r.dim - 1.0).abs() < 1e-6);
        match r.lower_content {
            ContentValue::Finite(m) => assert!((m - 4.0 * PI).abs() < 1e-3 * 4.0 * PI),
            other => panic!("{other:?}"),
        }
        let fit = fit_log_periodic(&s, 1.0, 4).unwrap();
        assert!(fit.period.is_none());
        assert_eq!(classify(&r, &fit), Classification::Measurable);
    }

    #[test]
    fn cantor_dimension_contents_and_period() {
        let s = cantor_samples(12);
        let r = estimate_dimensions(&s).unwrap();
        let d = 2f64.ln() / 3f64.ln();
        assert!((r.dim - d).abs() < 0.01, "{}", r.dim);
        let (ContentValue::Finite(lo), ContentValue::Finite(hi)) = (r.lower_content, r.upper_content) else {
            panic!("{r:?}")
        };
        assert!((lo / 2.4950 - 1.0).abs() < 0.01 && (hi / 2.5830 - 1.0).abs() < 0.01, "{lo} {hi}");
        let fit = fit_log_periodic(&s, d, 4).unwrap();
        assert!((fit.period.unwrap() - 3f64.ln()).abs() < 1e-4);
        for k in 1..=4 {
            let ck = fit.coefficient(k).unwrap();
            assert!((ck - fit.coefficient(-k).unwrap().conj()).norm() < 1e-12);
            assert!(ck.norm() < fit.mean());
        }
        assert!(matches!(classify(&r, &fit), Classification::Periodic { .. }));
    }

    #[test]
    fn insufficient_range() {
        let grid = tube::geometric_grid(1.0, 0.9, 20);
        let s = TubeSamples::new(
            1,
            grid.iter().map(|&t| TubeSample { t, volume: t, exact: true, error_bound: 0.0 }).collect(),
        )
        .unwrap();
        assert!(matches!(estimate_dimensions(&s), Err(Error::InsufficientRange(_))));
    }

    #[test]
    fn richardson_on_known_pole() {
        let f = |x: f64| Ok(C64::new(2.0 / (x - 1.0) + x * x, 0.0));
        let r = richardson_residue(&f, 1.0, 0.01).unwrap();
        // the quadratic term leaves an O(h^2) remainder
        assert!((r.re - 2.0).abs() < 1e-4);
    }
}
