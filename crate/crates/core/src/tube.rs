//! Tube functions `t -> |A_t|` and relative tube functions `t -> |A_t ∩ Omega|`.
//!
//! Exact formulas are used where they exist. Planar sets without one are
//! rasterized and measured with an exact Euclidean distance transform.

use rayon::prelude::*;

use crate::model::{
    ExactReal, FractalString, GeneralizedCantorParams, Raster, Region, RelativeFractalDrum,
    SetDescriptor, TubeSample, TubeSamples,
};
use crate::quad::gauss_kronrod_real;
use crate::special::unit_ball_volume;
use crate::{Error, Result};

/// Environment variable capping the raster side length.
pub const RASTER_CAP_ENV: &str = "FZETA_RASTER_CAP";
const DEFAULT_RASTER_CAP: usize = 8192;

pub fn raster_cap() -> usize {
    std::env::var(RASTER_CAP_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_RASTER_CAP)
}

/// Periodic profile `G(tau)` with `|C_t| = t^(1-D) G(log(1/t))` for `t < c`.
pub fn cantor_profile(params: &GeneralizedCantorParams, tau: f64) -> f64 {
    let m = params.m as f64;
    let a = params.a();
    let d = params.dimension();
    let c = params.gap_scale();
    let x = (tau + c.ln()) / params.period();
    let g = x.ceil() - x;
    c.powf(d - 1.0) * (m * a).powf(g) + 2.0 * c.powf(d) * m.powf(g)
}

/// `|C_t|` for the generalized Cantor set, `0 < t < c`.
pub fn cantor_tube_volume(params: &GeneralizedCantorParams, t: f64) -> Result<f64> {
    params.validate()?;
    let c = params.gap_scale();
    if !(t > 0.0 && t < c) {
        return Err(Error::domain(format!(
            "cantor tube formula holds for 0 < t < {c}, got t = {t}"
        )));
    }
    Ok(t.powf(1.0 - params.dimension()) * cantor_profile(params, -t.ln()))
}

/// `|C_t|` for every `t > 0`: the formula below `c`, full saturation `1 + 2t` above.
pub fn cantor_tube_function(params: &GeneralizedCantorParams, t: f64) -> Result<f64> {
    if t >= params.gap_scale() {
        return Ok(1.0 + 2.0 * t);
    }
    cantor_tube_volume(params, t)
}

/// Measure of the closed `t`-neighborhood of a finite union of sorted disjoint intervals.
pub fn interval_union_tube_volume(intervals: &[[f64; 2]], t: f64) -> f64 {
    if intervals.is_empty() {
        return 0.0;
    }
    let mut v = 2.0 * t;
    for iv in intervals {
        v += iv[1] - iv[0];
    }
    for w in intervals.windows(2) {
        v += (w[1][0] - w[0][1]).min(2.0 * t);
    }
    v
}

/// Number of lengths `l_j >= threshold` in a nonincreasing string.
pub fn saturated_count(string: &FractalString, threshold: f64) -> f64 {
    match string {
        FractalString::Power { exponent } => {
            let mut j = threshold.powf(-1.0 / exponent).floor();
            while j >= 1.0 && j.powf(-exponent) < threshold {
                j -= 1.0;
            }
            while (j + 1.0).powf(-exponent) >= threshold {
                j += 1.0;
            }
            j.max(0.0)
        }
        FractalString::Telescoping => {
            // 1 / (j (j + 1)) >= threshold  <=>  j (j + 1) <= 1 / threshold
            let bound = 1.0 / threshold;
            let mut j = ((-1.0 + (1.0 + 4.0 * bound).sqrt()) / 2.0).floor();
            while j >= 1.0 && j * (j + 1.0) > bound {
                j -= 1.0;
            }
            while (j + 1.0) * (j + 2.0) <= bound {
                j += 1.0;
            }
            j.max(0.0)
        }
        FractalString::Scaled { factor, inner } => saturated_count(inner, threshold / factor),
        _ => string
            .blocks()
            .take_while(|b| b.length >= threshold)
            .map(|b| b.multiplicity)
            .sum(),
    }
}

/// Inner tube of the string drum: `sum_{l_j >= 2t} 2t + sum_{l_j < 2t} l_j`.
pub fn string_tube_volume(string: &FractalString, t: f64) -> Result<f64> {
    string.validate()?;
    if !(t > 0.0) {
        return Err(Error::domain("string tube volume needs t > 0"));
    }
    let saturated = saturated_count(string, 2.0 * t);
    if let FractalString::Finite { lengths } = string {
        let k = saturated as usize;
        return Ok(2.0 * t * saturated + lengths[k..].iter().sum::<f64>());
    }
    let rest = string.tail_from(saturated as u64 + 1).0;
    Ok(2.0 * t * saturated + rest)
}

/// Two-sided `t`-collar of the sphere of radius `R` in `R^N`, `0 < t < R`.
pub fn sphere_tube_volume(n: u32, radius: f64, t: f64) -> Result<f64> {
    if n == 0 || !(radius > 0.0) {
        return Err(Error::param("sphere needs N >= 1 and R > 0"));
    }
    if !(t > 0.0 && t < radius) {
        return Err(Error::domain(format!(
            "sphere collar formula holds for 0 < t < R = {radius}, got {t}"
        )));
    }
    let n_i = n as i32;
    Ok(unit_ball_volume(n) * ((radius + t).powi(n_i) - (radius - t).powi(n_i)))
}

/// Euclidean distance from each pixel center to the nearest set pixel center.
#[derive(Clone, Debug)]
pub struct DistanceField2D {
    pub nx: usize,
    pub ny: usize,
    pub hx: f64,
    pub hy: f64,
    /// `[x0, y0, x1, y1]`
    pub extent: [f64; 4],
    /// Row-major, `grid[j * nx + i]` for pixel column `i`, row `j` from the bottom.
    pub grid: Vec<f64>,
}

impl DistanceField2D {
    pub fn pixel_size(&self) -> f64 {
        self.hx.max(self.hy)
    }

    pub fn pixel_area(&self) -> f64 {
        self.hx * self.hy
    }

    pub fn pixel_diagonal(&self) -> f64 {
        self.hx.hypot(self.hy)
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.grid[j * self.nx + i]
    }

    pub fn center(&self, i: usize, j: usize) -> (f64, f64) {
        (
            self.extent[0] + (i as f64 + 0.5) * self.hx,
            self.extent[1] + (j as f64 + 0.5) * self.hy,
        )
    }
}

/// One-dimensional squared distance transform (lower envelope of parabolas).
///
/// `f[q]` is the squared cost at sample `q` (infinite for "no site"),
/// samples are `h` apart. Writes `min_p f[p] + h^2 (q - p)^2` into `out`.
fn squared_edt_1d(f: &[f64], h: f64, out: &mut [f64]) {
    let n = f.len();
    let h2 = h * h;
    let mut v: Vec<usize> = Vec::with_capacity(n);
    let mut z: Vec<f64> = Vec::with_capacity(n + 1);
    for q in 0..n {
        if !f[q].is_finite() {
            continue;
        }
        let fq = f[q] + h2 * (q * q) as f64;
        let mut s = f64::NEG_INFINITY;
        while let Some(&p) = v.last() {
            let fp = f[p] + h2 * (p * p) as f64;
            s = (fq - fp) / (2.0 * h2 * (q - p) as f64);
            if s <= *z.last().expect("z tracks v") {
                v.pop();
                z.pop();
                s = f64::NEG_INFINITY;
            } else {
                break;
            }
        }
        v.push(q);
        z.push(s);
    }
    if v.is_empty() {
        out.iter_mut().for_each(|o| *o = f64::INFINITY);
        return;
    }
    let mut k = 0;
    for (q, o) in out.iter_mut().enumerate() {
        while k + 1 < v.len() && z[k + 1] < q as f64 {
            k += 1;
        }
        let p = v[k];
        let d = q as f64 - p as f64;
        *o = f[p] + h2 * d * d;
    }
}

/// Exact Euclidean distance transform of a binary mask (two separable passes).
pub fn distance_transform(mask: &[bool], nx: usize, ny: usize, hx: f64, hy: f64) -> Vec<f64> {
    assert_eq!(mask.len(), nx * ny);
    // column pass, stored transposed: cols[i * ny + j]
    let cols: Vec<f64> = (0..nx)
        .into_par_iter()
        .flat_map_iter(|i| {
            let f: Vec<f64> = (0..ny)
                .map(|j| if mask[j * nx + i] { 0.0 } else { f64::INFINITY })
                .collect();
            let mut out = vec![0.0; ny];
            squared_edt_1d(&f, hy, &mut out);
            out.into_iter()
        })
        .collect();
    (0..ny)
        .into_par_iter()
        .flat_map_iter(|j| {
            let f: Vec<f64> = (0..nx).map(|i| cols[i * ny + j]).collect();
            let mut out = vec![0.0; nx];
            squared_edt_1d(&f, hx, &mut out);
            out.into_iter().map(f64::sqrt)
        })
        .collect()
}

/// True when the center of pixel `(x, y)` lies in the level-`level` carpet of the unit square.
fn in_carpet(x: f64, y: f64, level: u32) -> bool {
    if !(0.0..=1.0).contains(&x) || !(0.0..=1.0).contains(&y) {
        return false;
    }
    let (mut x, mut y) = (x, y);
    for _ in 0..level {
        x *= 3.0;
        y *= 3.0;
        let (dx, dy) = (x.floor(), y.floor());
        if dx == 1.0 && dy == 1.0 {
            return false;
        }
        x -= dx;
        y -= dy;
    }
    true
}

/// Level-`level` carpet rasterized on `3^res_level` pixels per side of the unit square.
pub fn carpet_raster(level: u32, res_level: u32) -> Raster {
    let n = 3usize.pow(res_level);
    let h = 1.0 / n as f64;
    let mask: Vec<bool> = (0..n * n)
        .map(|idx| {
            let (i, j) = (idx % n, idx / n);
            in_carpet((i as f64 + 0.5) * h, (j as f64 + 0.5) * h, level)
        })
        .collect();
    let mut r = Raster::from_mask(n, n, &mask, [0.0, 0.0, 1.0, 1.0]);
    r.extent = [
        ExactReal::integer(0),
        ExactReal::integer(0),
        ExactReal::integer(1),
        ExactReal::integer(1),
    ];
    r
}

/// Rasterizes a planar set onto `nx x ny` pixels covering `extent`.
pub fn rasterize(set: &SetDescriptor, nx: usize, ny: usize, extent: [f64; 4]) -> Result<Vec<bool>> {
    let hx = (extent[2] - extent[0]) / nx as f64;
    let hy = (extent[3] - extent[1]) / ny as f64;
    let center = |idx: usize| {
        let (i, j) = (idx % nx, idx / nx);
        (extent[0] + (i as f64 + 0.5) * hx, extent[1] + (j as f64 + 0.5) * hy)
    };
    match set {
        SetDescriptor::PixelSet2D { raster } => {
            let src = raster.mask()?;
            let e = raster.extent_f64();
            if raster.width == nx && raster.height == ny && e == extent {
                return Ok(src);
            }
            let sx = (e[2] - e[0]) / raster.width as f64;
            let sy = (e[3] - e[1]) / raster.height as f64;
            Ok((0..nx * ny)
                .into_par_iter()
                .map(|idx| {
                    let (x, y) = center(idx);
                    let (u, v) = (((x - e[0]) / sx).floor(), ((y - e[1]) / sy).floor());
                    u >= 0.0
                        && v >= 0.0
                        && (u as usize) < raster.width
                        && (v as usize) < raster.height
                        && src[v as usize * raster.width + u as usize]
                })
                .collect())
        }
        SetDescriptor::SierpinskiCarpet { level } => Ok((0..nx * ny)
            .into_par_iter()
            .map(|idx| {
                let (x, y) = center(idx);
                in_carpet(x, y, *level)
            })
            .collect()),
        SetDescriptor::Sphere { dim: 2, radius, center: c } => {
            let r = radius.to_f64();
            let (cx, cy) = match c.as_slice() {
                [] => (0.0, 0.0),
                [x, y] => (x.to_f64(), y.to_f64()),
                _ => return Err(Error::param("circle center must have two coordinates")),
            };
            let half_diag = 0.5 * hx.hypot(hy);
            Ok((0..nx * ny)
                .into_par_iter()
                .map(|idx| {
                    let (x, y) = center(idx);
                    ((x - cx).hypot(y - cy) - r).abs() <= half_diag
                })
                .collect())
        }
        SetDescriptor::UnionOfDescriptors { members } => {
            let mut mask = vec![false; nx * ny];
            for m in members {
                let sub = rasterize(&m.set, nx, ny, extent)?;
                mask.iter_mut().zip(sub).for_each(|(a, b)| *a |= b);
            }
            Ok(mask)
        }
        other => Err(Error::unsupported(format!(
            "no planar rasterization for {} set",
            variant_name(other)
        ))),
    }
}

pub(crate) fn variant_name(set: &SetDescriptor) -> &'static str {
    match set {
        SetDescriptor::PointSet1D { .. } => "PointSet1D",
        SetDescriptor::IntervalUnion1D { .. } => "IntervalUnion1D",
        SetDescriptor::CantorBlock { .. } => "CantorBlock",
        SetDescriptor::StringEndpoints { .. } => "StringEndpoints",
        SetDescriptor::Sphere { .. } => "Sphere",
        SetDescriptor::PixelSet2D { .. } => "PixelSet2D",
        SetDescriptor::SierpinskiCarpet { .. } => "SierpinskiCarpet",
        SetDescriptor::UnionOfDescriptors { .. } => "UnionOfDescriptors",
    }
}

/// Exact distance field of a planar set rasterized at `resolution` pixels per side.
///
/// Pixel sets keep their native grid whatever `resolution` says. Analytic sets
/// need `resolution >= 16`.
pub fn raster_distance_field(
    set: &SetDescriptor,
    resolution: usize,
    extent: [f64; 4],
) -> Result<DistanceField2D> {
    let (nx, ny, extent) = match set {
        SetDescriptor::PixelSet2D { raster } if resolution == 0 || resolution == raster.width => {
            (raster.width, raster.height, raster.extent_f64())
        }
        _ => {
            if resolution < 16 {
                return Err(Error::param(format!(
                    "raster resolution must be >= 16, got {resolution}"
                )));
            }
            (resolution, resolution, extent)
        }
    };
    let cap = raster_cap();
    if nx.max(ny) > cap {
        return Err(Error::Capacity {
            what: "raster side length",
            needed: nx.max(ny) as u128,
            budget: cap as u128,
        });
    }
    if !(extent[2] > extent[0] && extent[3] > extent[1]) {
        return Err(Error::param("raster extent must have positive area"));
    }
    let mask = rasterize(set, nx, ny, extent)?;
    if !mask.iter().any(|&b| b) {
        return Err(Error::param("rasterized set is empty"));
    }
    let hx = (extent[2] - extent[0]) / nx as f64;
    let hy = (extent[3] - extent[1]) / ny as f64;
    Ok(DistanceField2D {
        nx,
        ny,
        hx,
        hy,
        extent,
        grid: distance_transform(&mask, nx, ny, hx, hy),
    })
}

/// Raster estimate of `|{x in region : d(x, A) <= t}|` with a boundary-pixel error bound.
///
/// Pixels whose distance lies within one pixel diagonal of `t` may be
/// misclassified; their total area is the reported bound.
pub fn raster_tube_volume(field: &DistanceField2D, inside: Option<&[bool]>, t: f64) -> (f64, f64) {
    let diag = field.pixel_diagonal();
    let (count, boundary) = field
        .grid
        .par_iter()
        .enumerate()
        .filter(|(idx, _)| inside.is_none_or(|m| m[*idx]))
        .map(|(_, &d)| ((d <= t) as u64, ((d - t).abs() <= diag) as u64))
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    let area = field.pixel_area();
    (count as f64 * area, boundary as f64 * area)
}

/// Point of the cusp graph `y = h(x)` where it crosses the circle `x^2 + y^2 = t^2`.
fn cusp_crossing<H: Fn(f64) -> f64>(h: &H, t: f64, x_end: f64) -> Option<f64> {
    let phi = |x: f64| h(x).powi(2) + x * x - t * t;
    if phi(x_end) <= 0.0 {
        return None;
    }
    let (mut lo, mut hi) = (0.0, x_end);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if phi(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-17 * hi {
            break;
        }
    }
    Some(0.5 * (lo + hi))
}

/// `int_0^x sqrt(t^2 - u^2) du`.
fn circle_antiderivative(t: f64, x: f64) -> f64 {
    let x = x.min(t);
    0.5 * (x * (t * t - x * x).max(0.0).sqrt() + t * t * (x / t).asin())
}

/// `int_a^b sqrt(t^2 - u^2) du` for `0 <= a <= b <= t`, without cancellation when `a` is close to `t`.
fn circular_cap(t: f64, a: f64, b: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    if a < 0.5 * t {
        return circle_antiderivative(t, b) - circle_antiderivative(t, a);
    }
    // v = t - u = y^2 turns the square-root endpoint into a smooth integrand
    let (y0, y1) = ((t - b).max(0.0).sqrt(), (t - a).sqrt());
    gauss_kronrod_real(|y| 2.0 * y * y * (2.0 * t - y * y).sqrt(), y0, y1, 0.0, 1e-14).0
}

/// `|B_t(0) ∩ Omega|` for the power cusp `{0 < x < lambda, 0 < y < lambda (x/lambda)^alpha}`.
pub fn power_cusp_tube_volume(alpha: f64, scale: f64, t: f64) -> f64 {
    let h = |x: f64| scale * (x / scale).powf(alpha);
    let area_under = |x: f64| scale.powf(1.0 - alpha) * x.powf(alpha + 1.0) / (alpha + 1.0);
    let x_end = t.min(scale);
    match cusp_crossing(&h, t, x_end) {
        None => area_under(x_end),
        Some(xs) => area_under(xs) + circular_cap(t, xs, x_end),
    }
}

/// `ln |B_t(0) ∩ Omega|` for the exponential cusp `{0 < x < lambda, 0 < y < lambda exp(-lambda/x)}`.
///
/// Returned in log form because the volume underflows binary64 for small `t`.
pub fn exp_cusp_log_tube_volume(scale: f64, t: f64) -> f64 {
    let h = |x: f64| scale * (-scale / x).exp();
    let x_end = t.min(scale);
    let xs = cusp_crossing(&h, t, x_end).unwrap_or(x_end);
    let z = scale / xs;
    let log_area = if z > 40.0 {
        // int_0^x lambda e^{-lambda/u} du ~ lambda x e^{-z} sum_k (-1)^k (k+1)! / z^(k+1)
        let mut series = 0.0;
        let mut term = 1.0 / z;
        for k in 0..12 {
            series += term;
            term *= -((k + 2) as f64) / z;
        }
        scale.ln() + xs.ln() - z + series.ln()
    } else {
        let (v, _) = gauss_kronrod_real(h, 0.0, xs, 0.0, 1e-13);
        v.ln()
    };
    // the circular cap beyond the crossing is bounded by (x_end - xs) h(xs)
    let cap = circular_cap(t, xs, x_end);
    if cap > 0.0 {
        let log_cap = cap.ln();
        let hi = log_area.max(log_cap);
        hi + ((log_area - hi).exp() + (log_cap - hi).exp()).ln()
    } else {
        log_area
    }
}

/// `|A_t ∩ Omega|` for a relative fractal drum.
pub fn relative_tube_volume(drum: &RelativeFractalDrum, t: f64) -> Result<f64> {
    Ok(relative_tube_sample(drum, t)?.volume)
}

fn is_origin(set: &SetDescriptor) -> bool {
    matches!(set, SetDescriptor::PointSet1D { points } if points.len() == 1 && points[0] == ExactReal::integer(0))
}

fn relative_tube_sample(drum: &RelativeFractalDrum, t: f64) -> Result<TubeSample> {
    drum.validate()?;
    if !(t > 0.0) {
        return Err(Error::domain("tube volume needs t > 0"));
    }
    let exact = |volume: f64| TubeSample {
        t,
        volume,
        exact: true,
        error_bound: 0.0,
    };
    match (&drum.set, &drum.region) {
        (set, Region::CuspRegion { alpha, scale }) if is_origin(set) && drum.ambient_dim == 2 => {
            Ok(exact(power_cusp_tube_volume(alpha.to_f64(), scale.to_f64(), t)))
        }
        (set, Region::ExpCuspRegion { scale }) if is_origin(set) && drum.ambient_dim == 2 => {
            Ok(exact(exp_cusp_log_tube_volume(scale.to_f64(), t).exp()))
        }
        (SetDescriptor::StringEndpoints { string }, Region::HalfOpenComplement) => {
            Ok(exact(string_tube_volume(string, t)?))
        }
        (set, region) if drum.ambient_dim == 2 => {
            let (field, inside) = planar_drum_field(set, region, default_planar_resolution(set))?;
            let (v, err) = raster_tube_volume(&field, inside.as_deref(), t);
            Ok(TubeSample {
                t,
                volume: v,
                exact: false,
                error_bound: err,
            })
        }
        (set, _) => Err(Error::unsupported(format!(
            "no relative tube evaluator for a {} set in this region",
            variant_name(set)
        ))),
    }
}

fn default_planar_resolution(set: &SetDescriptor) -> usize {
    match set {
        SetDescriptor::SierpinskiCarpet { level } => 3usize.pow((*level).clamp(3, 7)),
        SetDescriptor::PixelSet2D { raster } => raster.width,
        _ => 729,
    }
}

/// Distance field for a planar drum and the mask of pixels inside the region.
pub fn planar_drum_field(
    set: &SetDescriptor,
    region: &Region,
    resolution: usize,
) -> Result<(DistanceField2D, Option<Vec<bool>>)> {
    match region {
        Region::Box(b) => {
            if b.lo.len() != 2 {
                return Err(Error::param("planar drum needs a 2-D box"));
            }
            let extent = [b.lo[0].to_f64(), b.lo[1].to_f64(), b.hi[0].to_f64(), b.hi[1].to_f64()];
            let field = raster_distance_field(set, resolution, extent)?;
            Ok((field, None))
        }
        Region::PixelRegion2D { raster } => {
            let field = raster_distance_field(set, raster.width, raster.extent_f64())?;
            if field.nx != raster.width || field.ny != raster.height {
                return Err(Error::param("pixel region and set rasters differ in size"));
            }
            Ok((field, Some(raster.mask()?)))
        }
        _ => Err(Error::unsupported("planar raster drums need a Box or PixelRegion2D region")),
    }
}

/// What to sample: an absolute set or a relative drum.
#[derive(Clone, Copy, Debug)]
pub enum TubeTarget<'a> {
    Set(&'a SetDescriptor),
    Drum(&'a RelativeFractalDrum),
}

/// `t_k = t_max * ratio^k` for `k = 0..count`.
pub fn geometric_grid(t_max: f64, ratio: f64, count: usize) -> Vec<f64> {
    (0..count).map(|k| t_max * ratio.powi(k as i32)).collect()
}

fn set_tube_sample(set: &SetDescriptor, t: f64) -> Result<TubeSample> {
    let exact = |volume: f64| TubeSample {
        t,
        volume,
        exact: true,
        error_bound: 0.0,
    };
    match set {
        SetDescriptor::PointSet1D { points } => {
            let mut iv: Vec<[f64; 2]> = points.iter().map(|p| [p.to_f64(), p.to_f64()]).collect();
            iv.sort_by(|a, b| a[0].total_cmp(&b[0]));
            Ok(exact(interval_union_tube_volume(&iv, t)))
        }
        SetDescriptor::IntervalUnion1D { intervals } => {
            let mut iv: Vec<[f64; 2]> = intervals.iter().map(|p| [p[0].to_f64(), p[1].to_f64()]).collect();
            iv.sort_by(|a, b| a[0].total_cmp(&b[0]));
            Ok(exact(interval_union_tube_volume(&iv, t)))
        }
        SetDescriptor::CantorBlock { params, scale, .. } => {
            let lambda = scale.to_f64();
            Ok(exact(lambda * cantor_tube_function(params, t / lambda)?))
        }
        SetDescriptor::StringEndpoints { string } => Ok(exact(string_tube_volume(string, t)? + 2.0 * t)),
        SetDescriptor::Sphere { dim, radius, .. } => {
            let r = radius.to_f64();
            if t < r {
                Ok(exact(sphere_tube_volume(*dim, r, t)?))
            } else {
                Ok(exact(unit_ball_volume(*dim) * (r + t).powi(*dim as i32)))
            }
        }
        SetDescriptor::PixelSet2D { .. } | SetDescriptor::SierpinskiCarpet { .. } => {
            let (lo, hi) = set.bounding_box()?;
            let pad = t * 1.05 + 1e-12;
            let extent = [lo[0] - pad, lo[1] - pad, hi[0] + pad, hi[1] + pad];
            let res = match set {
                SetDescriptor::PixelSet2D { raster } => {
                    let e = raster.extent_f64();
                    let px = (e[2] - e[0]) / raster.width as f64;
                    (((extent[2] - extent[0]) / px).ceil() as usize).max(16)
                }
                _ => 729,
            };
            let field = raster_distance_field(set, res, extent)?;
            let (v, err) = raster_tube_volume(&field, None, t);
            Ok(TubeSample {
                t,
                volume: v,
                exact: false,
                error_bound: err,
            })
        }
        SetDescriptor::UnionOfDescriptors { members } if set.ambient_dim() == 1 => {
            let mut boxes: Vec<(f64, f64, &SetDescriptor)> = Vec::new();
            for m in members {
                let (lo, hi) = m.set.bounding_box()?;
                boxes.push((lo[0], hi[0], &m.set));
            }
            boxes.sort_by(|a, b| a.0.total_cmp(&b.0));
            let min_width = boxes.iter().map(|b| b.1 - b.0).fold(f64::INFINITY, f64::min);
            let min_gap = boxes.windows(2).map(|w| w[1].0 - w[0].1).fold(f64::INFINITY, f64::min);
            if t > min_gap + min_width {
                return Err(Error::domain(format!(
                    "union tube volume needs t <= {} so collars overlap only pairwise",
                    min_gap + min_width
                )));
            }
            let mut total = TubeSample {
                t,
                volume: 0.0,
                exact: true,
                error_bound: 0.0,
            };
            for (_, _, s) in &boxes {
                let part = set_tube_sample(s, t)?;
                total.volume += part.volume;
                total.exact &= part.exact;
                total.error_bound += part.error_bound;
            }
            for w in boxes.windows(2) {
                total.volume -= (2.0 * t - (w[1].0 - w[0].1)).max(0.0);
            }
            Ok(total)
        }
        other => Err(Error::unsupported(format!(
            "no tube evaluator for {} sets",
            variant_name(other)
        ))),
    }
}

/// Samples the tube function on a strictly decreasing grid of positive scales.
pub fn sample_tube(target: TubeTarget<'_>, t_grid: &[f64]) -> Result<TubeSamples> {
    if t_grid.is_empty() {
        return Err(Error::param("empty t grid"));
    }
    if t_grid.iter().any(|t| !(*t > 0.0)) || t_grid.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::param("t grid must be positive and strictly decreasing"));
    }
    let (dim, samples) = match target {
        TubeTarget::Set(set) => {
            set.validate()?;
            let samples: Result<Vec<TubeSample>> = t_grid.par_iter().map(|&t| set_tube_sample(set, t)).collect();
            (set.ambient_dim(), samples?)
        }
        TubeTarget::Drum(drum) => {
            let samples: Result<Vec<TubeSample>> = if drum.ambient_dim == 2
                && matches!(drum.region, Region::Box(_) | Region::PixelRegion2D { .. })
            {
                // one distance field serves the whole grid
                let (field, inside) =
                    planar_drum_field(&drum.set, &drum.region, default_planar_resolution(&drum.set))?;
                Ok(t_grid
                    .iter()
                    .map(|&t| {
                        let (v, e) = raster_tube_volume(&field, inside.as_deref(), t);
                        TubeSample {
                            t,
                            volume: v,
                            exact: false,
                            error_bound: e,
                        }
                    })
                    .collect())
            } else {
                t_grid.par_iter().map(|&t| relative_tube_sample(drum, t)).collect()
            };
            (drum.ambient_dim, samples?)
        }
    };
    TubeSamples::new(dim, samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::cantor_endpoints;
    use proptest::prelude::*;

    fn q(s: &str) -> ExactReal {
        s.parse().unwrap()
    }

    #[test]
    fn cantor_formula_matches_interval_merge() {
        for (m, a) in [(2u32, "1/3"), (3, "1/5"), (4, "1/7")] {
            let p = GeneralizedCantorParams::new(m, q(a)).unwrap();
            let c = p.gap_scale();
            let level = 9;
            let pre = cantor_endpoints(&p, level).unwrap();
            let floor = c * p.a().powi(level as i32);
            for k in 1..60 {
                let t = c * (0.97f64).powi(k);
                if t < floor {
                    break;
                }
                let exact = interval_union_tube_volume(&pre.intervals, t);
                let formula = cantor_tube_volume(&p, t).unwrap();
                assert!((formula - exact).abs() <= 1e-10 * exact, "m={m} t={t} {formula} {exact}");
            }
        }
    }

    #[test]
    fn cantor_domain() {
        let p = GeneralizedCantorParams::ternary();
        assert!(cantor_tube_volume(&p, 0.2).is_err());
        assert!(cantor_tube_volume(&p, 0.0).is_err());
        assert!((cantor_tube_function(&p, 0.5).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn string_tube_examples() {
        let g = FractalString::geometric(0.5);
        assert!((string_tube_volume(&g, 0.125).unwrap() - 0.75).abs() < 1e-14);
        assert!((string_tube_volume(&g, 0.3).unwrap() - 1.0).abs() < 1e-14);
        let c = FractalString::cantor();
        for n in 1..12 {
            let t = 3f64.powi(-n) / 2.0;
            // geometric realization: gaps of the ternary Cantor set, deeper levels summed as a tail
            let pre = cantor_endpoints(&GeneralizedCantorParams::ternary(), 14).unwrap();
            let gaps: Vec<f64> = pre.intervals.windows(2).map(|w| w[1][0] - w[0][1]).collect();
            let oracle: f64 = gaps.iter().map(|l| l.min(2.0 * t)).sum();
            let tail: f64 = (15..200).map(|k| 2f64.powi(k - 1) * 3f64.powi(-k)).sum();
            let got = string_tube_volume(&c, t).unwrap();
            assert!((got - (oracle + tail)).abs() < 1e-12, "n={n} {got} {}", oracle + tail);
        }
    }

    #[test]
    fn power_and_telescoping_saturation() {
        let p = FractalString::Power { exponent: 2.0 };
        assert_eq!(saturated_count(&p, 0.25), 2.0);
        assert_eq!(saturated_count(&p, 0.2), 2.0);
        let t = FractalString::Telescoping;
        assert_eq!(saturated_count(&t, 1.0 / 6.0), 2.0);
        assert_eq!(saturated_count(&t, 0.17), 1.0);
        let v = string_tube_volume(&t, 1.0 / 12.0).unwrap();
        // l_1 = 1/2, l_2 = 1/6 saturated, rest sums to 1/3
        assert!((v - (2.0 / 6.0 + 1.0 / 3.0)).abs() < 1e-15);
    }

    #[test]
    fn sphere_examples() {
        let pi = std::f64::consts::PI;
        assert!((sphere_tube_volume(2, 1.0, 0.2).unwrap() - 4.0 * pi * 0.2).abs() < 1e-14);
        assert!((sphere_tube_volume(1, 1.0, 0.3).unwrap() - 1.2).abs() < 1e-14);
        let v = sphere_tube_volume(3, 2.0, 0.1).unwrap();
        assert!((v - 4.0 * pi / 3.0 * 2.402).abs() < 1e-12);
        assert!(sphere_tube_volume(2, 1.0, 1.0).is_err());
    }

    #[test]
    fn edt_single_pixel_and_full() {
        let mut mask = vec![false; 9];
        mask[4] = true;
        let d = distance_transform(&mask, 3, 3, 0.5, 0.5);
        assert!((d[0] - 0.5 * 2f64.sqrt()).abs() < 1e-15);
        assert!((d[1] - 0.5).abs() < 1e-15);
        let full = distance_transform(&[true; 16], 4, 4, 1.0, 1.0);
        assert!(full.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn edt_matches_brute_force() {
        let (nx, ny) = (23, 17);
        let mask: Vec<bool> = (0..nx * ny).map(|i| (i * 7919) % 31 == 0).collect();
        let d = distance_transform(&mask, nx, ny, 0.3, 0.7);
        for (idx, &got) in d.iter().enumerate() {
            let (i, j) = ((idx % nx) as f64, (idx / nx) as f64);
            let best = (0..nx * ny)
                .filter(|&k| mask[k])
                .map(|k| {
                    let (u, v) = ((k % nx) as f64, (k / nx) as f64);
                    (0.3 * (i - u)).hypot(0.7 * (j - v))
                })
                .fold(f64::INFINITY, f64::min);
            assert!((got - best).abs() < 1e-12);
        }
    }

    #[test]
    fn carpet_field_within_one_diagonal_of_squares() {
        let set = SetDescriptor::SierpinskiCarpet { level: 5 };
        let field = raster_distance_field(&set, 243, [0.0, 0.0, 1.0, 1.0]).unwrap();
        // distance to the explicit level-2 hole in the center square's first sub-hole
        let (i, j) = (121, 121);
        let (x, y) = field.center(i, j);
        let oracle = (x - 1.0 / 3.0).min(2.0 / 3.0 - x).min(y - 1.0 / 3.0).min(2.0 / 3.0 - y);
        assert!((field.at(i, j) - oracle).abs() <= field.pixel_diagonal());
    }

    #[test]
    fn power_cusp_leading_term() {
        for t in [1e-3, 1e-4] {
            let v = power_cusp_tube_volume(2.0, 1.0, t);
            assert!((v / t.powi(3) - 1.0 / 3.0).abs() < 1e-4, "{}", v / t.powi(3));
        }
        // saturation: the whole region is inside a large ball
        assert!((power_cusp_tube_volume(2.0, 1.0, 2.0) - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn exp_cusp_log_volume_matches_quadrature() {
        let t = 0.05;
        let direct = gauss_kronrod_real(|x| (-1.0 / x).exp(), 0.0, t, 0.0, 1e-14).0;
        let lv = exp_cusp_log_tube_volume(1.0, t);
        assert!((lv - direct.ln()).abs() < 1e-8, "{lv} {}", direct.ln());
        assert!(exp_cusp_log_tube_volume(1.0, 1e-3) < -990.0);
    }

    #[test]
    fn sample_grid_order_and_flags() {
        let p = GeneralizedCantorParams::ternary();
        let grid = geometric_grid(p.gap_scale(), 3f64.powf(-1.0 / 8.0), 16);
        let s = sample_tube(TubeTarget::Set(&SetDescriptor::cantor(p)), &grid).unwrap();
        assert_eq!(s.len(), 16);
        assert!(s.samples.iter().all(|x| x.exact));
        assert!(s.samples.windows(2).all(|w| w[0].t < w[1].t));
        assert!(sample_tube(TubeTarget::Set(&SetDescriptor::cantor(p)), &[0.1, 0.2]).is_err());
    }

    #[test]
    fn circle_samples_are_linear() {
        let set = SetDescriptor::Sphere {
            dim: 2,
            radius: q("1"),
            center: vec![],
        };
        let s = sample_tube(TubeTarget::Set(&set), &geometric_grid(0.5, 0.5, 10)).unwrap();
        for x in &s.samples {
            assert!((x.volume - 4.0 * std::f64::consts::PI * x.t).abs() < 1e-13);
        }
    }

    #[test]
    fn pixel_set_error_bound_covers_disk() {
        let n = 64;
        let mut mask = vec![false; n * n];
        mask[(n / 2) * n + n / 2] = true;
        let raster = Raster::from_mask(n, n, &mask, [0.0, 0.0, 1.0, 1.0]);
        let set = SetDescriptor::PixelSet2D { raster };
        let sample = set_tube_sample(&set, 0.2).unwrap();
        let disk = std::f64::consts::PI * 0.04;
        assert!(!sample.exact);
        assert!((sample.volume - disk).abs() <= sample.error_bound, "{:?} {disk}", sample);
    }

    proptest! {
        #[test]
        fn cantor_profile_is_periodic(tau in 2.0f64..40.0, m in 2u32..6, q in 2i128..5) {
            let a = ExactReal::new(1, m as i128 * q);
            let p = GeneralizedCantorParams::new(m, a).unwrap();
            let g0 = cantor_profile(&p, tau);
            let g1 = cantor_profile(&p, tau + p.period());
            prop_assert!((g0 - g1).abs() <= 1e-12 * g0.abs().max(1.0));
        }

        #[test]
        fn tube_functions_are_monotone(t1 in 1e-8f64..0.15, f in 1.0f64..1.1) {
            let p = GeneralizedCantorParams::ternary();
            let t2 = (t1 * f).min(0.166);
            prop_assume!(t2 > t1);
            prop_assert!(cantor_tube_volume(&p, t2).unwrap() >= cantor_tube_volume(&p, t1).unwrap());
            let s = FractalString::Power { exponent: 1.5 };
            prop_assert!(string_tube_volume(&s, t2).unwrap() >= string_tube_volume(&s, t1).unwrap() - 1e-15);
            prop_assert!(power_cusp_tube_volume(2.5, 1.0, t2) >= power_cusp_tube_volume(2.5, 1.0, t1));
        }
    }
}
