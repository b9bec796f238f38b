//! Numerical checks on attractor and basin rasters: box-counting dimension,
//! connectivity, solid squares, the nontriviality criterion, expansivity of
//! the inverse maps and escape-time growth.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::attractor::{attractor_for, chaos_game, AttractorApprox};
use crate::basin::fast_basin_inverse;
use crate::error::{Error, Result};
use crate::grid::{CellRaster, Window};
use crate::ifs::IfsSystem;
use crate::render::{transport_raster, Direction};
use crate::space::Point;

/// Box-counting estimate and the largest deviation from the fitted line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimensionFit {
    pub estimate: f64,
    pub residual: f64,
}

/// Least-squares slope of `log N(s)` against `log(1/(s h))`, where `N(s)` is
/// the number of `s x s`-cell boxes meeting the raster and `s` runs over the
/// powers of two from `coarsest` down to `finest`.
pub fn box_dimension(raster: &CellRaster, coarsest: usize, finest: usize) -> Result<DimensionFit> {
    if raster.is_empty() {
        return Err(Error::Geometry(
            "box counting needs a nonempty raster".into(),
        ));
    }
    let mut sizes = Vec::new();
    let mut s = coarsest;
    while s >= finest.max(1) && s > 0 {
        sizes.push(s);
        s /= 2;
    }
    if sizes.len() < 3 {
        return Err(Error::DegenerateScaleRange(sizes.len()));
    }
    let points: Vec<(f64, f64)> = sizes
        .par_iter()
        .map(|&s| {
            let n = count_boxes(raster, s);
            ((1.0 / (s as f64 * raster.h())).ln(), (n as f64).ln())
        })
        .collect();
    let m = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / m;
    let my = points.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let residual = points
        .iter()
        .map(|p| (p.1 - (my + slope * (p.0 - mx))).abs())
        .fold(0.0, f64::max);
    Ok(DimensionFit {
        estimate: slope,
        residual,
    })
}

fn count_boxes(raster: &CellRaster, s: usize) -> usize {
    let (bx, by) = (raster.nx().div_ceil(s), raster.ny().div_ceil(s));
    let mut hit = vec![false; bx * by];
    for idx in raster.occupied() {
        let (i, j) = raster.grid().coords(idx);
        hit[(j / s) * bx + i / s] = true;
    }
    hit.iter().filter(|&&b| b).count()
}

/// Cell adjacency used for connectivity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Adjacency {
    Four,
    Eight,
}

/// Number of connected components of the occupied cells.
pub fn connected_components(raster: &CellRaster, adjacency: Adjacency) -> usize {
    let (nx, ny) = (raster.nx() as i64, raster.ny() as i64);
    let neighbours: &[(i64, i64)] = match adjacency {
        Adjacency::Four => &[(1, 0), (-1, 0), (0, 1), (0, -1)],
        Adjacency::Eight => &[
            (1, 0),
            (-1, 0),
            (0, 1),
            (0, -1),
            (1, 1),
            (1, -1),
            (-1, 1),
            (-1, -1),
        ],
    };
    let mut seen = vec![false; raster.bits().len()];
    let mut stack = Vec::new();
    let mut count = 0;
    for start in raster.occupied() {
        if seen[start] {
            continue;
        }
        count += 1;
        seen[start] = true;
        stack.push(start);
        while let Some(idx) = stack.pop() {
            let (i, j) = ((idx as i64) % nx, (idx as i64) / nx);
            for &(di, dj) in neighbours {
                let (a, b) = (i + di, j + dj);
                if a < 0 || b < 0 || a >= nx || b >= ny {
                    continue;
                }
                let n = (b * nx + a) as usize;
                if raster.get_index(n) && !seen[n] {
                    seen[n] = true;
                    stack.push(n);
                }
            }
        }
    }
    count
}

/// Side in cells of the largest fully occupied axis-aligned square.
pub fn max_solid_square(raster: &CellRaster) -> usize {
    let nx = raster.nx();
    let mut prev = vec![0usize; nx];
    let mut cur = vec![0usize; nx];
    let mut best = 0;
    for j in 0..raster.ny() {
        for i in 0..nx {
            cur[i] = if !raster.get(i, j) {
                0
            } else if i == 0 || j == 0 {
                1
            } else {
                1 + prev[i].min(prev[i - 1]).min(cur[i - 1])
            };
            best = best.max(cur[i]);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    best
}

/// Outcome of [`criterion_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct Criterion {
    pub nontrivial: bool,
    /// 1-based indices `i` with `wᵢ(A)` farther than `tol` from `A`.
    pub indices: Vec<usize>,
    pub per_map_hausdorff: Vec<f64>,
    /// Some map is only partially invertible, so `wᵢ(A) ≠ A` does not imply a
    /// nontrivial fast basin.
    pub partial_maps: bool,
}

/// Default tolerance of [`criterion_check`] in cells.
pub const CRITERION_TOL_CELLS: f64 = 3.0;

/// Per-map Hausdorff distance between `wᵢ(A)` and `A` on the attractor grid.
/// For total invertible maps the fast basin is strictly larger than `A`
/// exactly when some distance exceeds `tol`.
pub fn criterion_check(
    ifs: &IfsSystem,
    attractor: &AttractorApprox,
    tol: f64,
) -> Result<Criterion> {
    let a = &attractor.raster;
    let per_map_hausdorff = ifs
        .maps()
        .iter()
        .map(|m| transport_raster(m, Direction::Forward, a, a.grid())?.hausdorff(a))
        .collect::<Result<Vec<f64>>>()?;
    let indices: Vec<usize> = per_map_hausdorff
        .iter()
        .enumerate()
        .filter(|(_, d)| **d > tol)
        .map(|(i, _)| i + 1)
        .collect();
    Ok(Criterion {
        nontrivial: !indices.is_empty(),
        indices,
        per_map_hausdorff,
        partial_maps: !ifs.all_total(),
    })
}

/// Outcome of [`expansivity_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Expansivity {
    pub ok: bool,
    /// Smallest expansion factor of the inverse maps.
    pub l: f64,
    /// Radius of a ball around `x0` containing every `wᵢ⁻¹(x0)`.
    pub rho: f64,
    /// `rho / (l - l_tilde)`.
    pub r0: f64,
}

fn expansion_factor(ifs: &IfsSystem) -> Result<f64> {
    let unit = Window::new(0.0, 0.0, 1.0, 1.0)?;
    let region = ifs.window().copied().unwrap_or(unit);
    let mut l = f64::INFINITY;
    for m in ifs.maps() {
        l = l.min(m.inverse_expansivity(&region)?);
    }
    Ok(l)
}

fn check_factors(l: f64, l_tilde: f64) -> Result<()> {
    if l_tilde.is_nan() || l_tilde <= 1.0 {
        return Err(Error::NotExpansive(l_tilde));
    }
    if l.is_nan() || l <= l_tilde {
        return Err(Error::NotExpansive(l));
    }
    Ok(())
}

fn random_point_at(rng: &mut ChaCha8Rng, x0: &Point, r: f64) -> Point {
    let dim = x0.dim();
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        if norm > 1e-3 && norm <= 1.0 {
            let c: Vec<f64> = x0
                .coords()
                .iter()
                .zip(&v)
                .map(|(a, b)| a + r * b / norm)
                .collect();
            return Point::from_coords(&c).expect("same dimension as x0");
        }
    }
}

/// Verifies `d(wᵢ⁻¹(x), x0) >= l_tilde d(x, x0)` for every map on `samples`
/// random points with `r0 <= d(x, x0) <= 4 max(r0, 1)`.
pub fn expansivity_check(
    ifs: &IfsSystem,
    x0: &Point,
    l_tilde: f64,
    samples: usize,
    seed: u64,
) -> Result<Expansivity> {
    let l = expansion_factor(ifs)?;
    check_factors(l, l_tilde)?;
    let mut rho: f64 = 0.0;
    for m in ifs.maps() {
        rho = rho.max(m.apply_inverse(x0)?.distance(x0));
    }
    let r0 = rho / (l - l_tilde);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let hi = 4.0 * r0.max(1.0);
    let mut ok = true;
    for _ in 0..samples {
        let r = rng.gen_range(r0..=hi);
        let x = random_point_at(&mut rng, x0, r);
        let d = x.distance(x0);
        for m in ifs.maps() {
            let back = m.apply_inverse(&x)?.distance(x0);
            if back < l_tilde * d * (1.0 - 1e-12) {
                ok = false;
            }
        }
    }
    Ok(Expansivity { ok, l, rho, r0 })
}

/// Follows `orbits` random reverse orbits `y_{k+1} = w_{i_k}⁻¹(y_k)` of the
/// given length and checks `d(y_n, x0) >= l_tildeⁿ⁻ᵐ d(y_m, x0)` whenever
/// `d(y_m, x0) > r0`.
pub fn reverse_orbit_check(
    ifs: &IfsSystem,
    x0: &Point,
    l_tilde: f64,
    orbits: usize,
    length: usize,
    seed: u64,
) -> Result<bool> {
    let l = expansion_factor(ifs)?;
    check_factors(l, l_tilde)?;
    let mut rho: f64 = 0.0;
    for m in ifs.maps() {
        rho = rho.max(m.apply_inverse(x0)?.distance(x0));
    }
    let r0 = rho / (l - l_tilde);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..orbits {
        let r = rng.gen_range(0.0..=4.0 * r0.max(1.0));
        let mut orbit = vec![random_point_at(&mut rng, x0, r)];
        for _ in 0..length {
            let i = rng.gen_range(0..ifs.len());
            let next = ifs.maps()[i].apply_inverse(orbit.last().expect("nonempty"))?;
            orbit.push(next);
        }
        let d: Vec<f64> = orbit.iter().map(|y| y.distance(x0)).collect();
        for m in 0..d.len() {
            if d[m] <= r0 {
                continue;
            }
            for n in m + 1..d.len() {
                if d[n] < l_tilde.powi((n - m) as i32) * d[m] * (1.0 - 1e-9) {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Stay times are counted up to this many reverse steps.
pub const STAY_CAP: usize = 10_000;

/// Outcome of [`escape_time_demo`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EscapeDemo {
    pub a: Point,
    /// Steps `n` for which `w_{θ1}⁻ⁿ(a)` stays in the closed disk.
    pub achieved: usize,
    /// `d(a, w_{θ1}⁻¹(a))`.
    pub delta: f64,
    /// Distance from `a` to the disk boundary.
    pub margin: f64,
}

/// Finds an attractor point `a` whose reverse orbit under the constant word
/// `θ1` stays in the disk for at least `n_target` steps.
///
/// Candidates are chaos-game samples pulled towards the fixed point of
/// `w_{θ1}`. A candidate qualifies when `δ < Δ / (n Lⁿ)`, with `δ` its
/// displacement under `w_{θ1}⁻¹`, `Δ` its distance to the disk boundary and
/// `L` a Lipschitz bound of `w_{θ1}⁻¹`; this forces the first `n` reverse
/// steps to stay inside. The qualifying candidate with the largest `δ` is
/// returned with its verified stay time.
pub fn escape_time_demo(
    ifs: &IfsSystem,
    attractor: &AttractorApprox,
    theta1: usize,
    centre: &Point,
    radius: f64,
    n_target: usize,
    seed: u64,
) -> Result<EscapeDemo> {
    let w = *ifs.map(theta1)?;
    let lip = w.inverse_lipschitz_bound().ok_or_else(|| {
        Error::NotFound(format!(
            "map {theta1} has no global inverse Lipschitz bound"
        ))
    })?;
    let bound = n_target as f64 * lip.powi(n_target as i32);
    let mut best: Option<EscapeDemo> = None;
    for p in chaos_game(ifs, 2000, 64, seed)? {
        if !attractor.raster.within(&p, attractor.raster.h()) {
            continue;
        }
        let mut a = p;
        for _ in 0..64 {
            let delta = w.apply_inverse(&a)?.distance(&a);
            let margin = radius - a.distance(centre);
            if margin > 0.0 && delta * bound < margin && best.is_none_or(|b| delta > b.delta) {
                best = Some(EscapeDemo {
                    a,
                    achieved: 0,
                    delta,
                    margin,
                });
            }
            a = w.apply(&a)?;
        }
    }
    let mut demo =
        best.ok_or_else(|| Error::NotFound("no attractor sample satisfies the bound".into()))?;
    let mut y = demo.a;
    while demo.achieved < STAY_CAP {
        y = w.apply_inverse(&y)?;
        if y.distance(centre) > radius {
            break;
        }
        demo.achieved += 1;
    }
    Ok(demo)
}

/// Summary metrics of [`analyze`], printed as `key=value` lines.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisReport {
    pub dim_attractor: f64,
    pub dim_fast_basin: f64,
    pub fit_residuals: Vec<f64>,
    pub components_a: usize,
    pub components_b: usize,
    pub max_solid_square_a: usize,
    pub max_solid_square_b: usize,
    pub criterion_nontrivial: bool,
    pub per_map_hausdorff: Vec<f64>,
    pub expansivity_ok: bool,
    /// `(n_target, achieved, a)` for `n_target = 1..=5`.
    pub escape_times: Vec<(usize, usize, Point)>,
}

fn join<T: fmt::Display>(items: &[T]) -> String {
    items
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

impl fmt::Display for AnalysisReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "dim_attractor={}", self.dim_attractor)?;
        writeln!(f, "dim_fast_basin={}", self.dim_fast_basin)?;
        writeln!(f, "fit_residuals={}", join(&self.fit_residuals))?;
        writeln!(f, "components_A={}", self.components_a)?;
        writeln!(f, "components_B={}", self.components_b)?;
        writeln!(f, "max_solid_square_A={}", self.max_solid_square_a)?;
        writeln!(f, "max_solid_square_B={}", self.max_solid_square_b)?;
        writeln!(f, "criterion_nontrivial={}", self.criterion_nontrivial)?;
        writeln!(f, "per_map_hausdorff={}", join(&self.per_map_hausdorff))?;
        writeln!(f, "expansivity_ok={}", self.expansivity_ok)?;
        let escapes: Vec<String> = self
            .escape_times
            .iter()
            .map(|(n, t, a)| format!("{n}:{t}:{a}"))
            .collect();
        writeln!(f, "escape_times={}", escapes.join(";"))
    }
}

impl AnalysisReport {
    /// Parses the `key=value` form back into `(key, value)` pairs.
    pub fn parse_lines(text: &str) -> Vec<(String, String)> {
        text.lines()
            .filter_map(|l| l.split_once('='))
            .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
            .collect()
    }
}

/// Settings for [`analyze`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyzeOptions {
    pub nx: usize,
    pub k_max: usize,
    pub seed: u64,
}

/// Box dimensions of the attractor and of `{gen <= k_max}`, both on the
/// smallest square window around a chaos-game sample. Coarse boxes are
/// biased by how the grid happens to cut the set, so only boxes from
/// `nx/64` down to a quarter of that are fitted.
fn fitted_dimensions(
    ifs: &IfsSystem,
    nx: usize,
    k_max: usize,
) -> Result<(DimensionFit, DimensionFit)> {
    let pts = chaos_game(ifs, 20_000, 100, 0)?;
    let span = |f: &dyn Fn(&Point) -> f64| {
        let lo = pts.iter().map(f).fold(f64::INFINITY, f64::min);
        let hi = pts.iter().map(f).fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    };
    let (x0, x1) = span(&|p| p.x());
    let (y0, y1) = span(&|p| p.y());
    let side = (x1 - x0).max(y1 - y0);
    if !(side.is_finite() && side > 0.0) {
        return Err(Error::Geometry("attractor has no extent".into()));
    }
    let window = Window::new(x0, y0, x0 + side, y0 + side)?;
    let a = attractor_for(ifs, &window, nx)?;
    let field = fast_basin_inverse(ifs, &a, &window, nx, k_max)?;
    let coarsest = (nx / 64).max(4);
    let finest = coarsest / 4;
    Ok((
        box_dimension(&a.raster.resample(field.grid()), coarsest, finest)?,
        box_dimension(&field.level_set(k_max), coarsest, finest)?,
    ))
}

/// Runs every check on a planar total-map system over `window`: attractor
/// and fast basin `{gen <= K}` on the same grid, their dimensions,
/// components and solid squares, the nontriviality criterion with
/// tolerance `3h`, expansivity around the attractor's centre, and escape
/// times for `n = 1..=5` along map 1 in the disk of twice the attractor's
/// radius.
pub fn analyze(ifs: &IfsSystem, window: &Window, opts: AnalyzeOptions) -> Result<AnalysisReport> {
    let attractor = attractor_for(ifs, window, opts.nx)?;
    let field = fast_basin_inverse(ifs, &attractor, window, opts.nx, opts.k_max)?;
    let a = attractor.raster.resample(field.grid());
    let basin = field.level_set(opts.k_max);
    let h = a.h();
    let (centre, radius) = a
        .bounding_ball()
        .ok_or_else(|| Error::NotFound("empty attractor".into()))?;
    let (fit_a, fit_b) = fitted_dimensions(ifs, opts.nx, opts.k_max)?;
    let criterion = criterion_check(ifs, &attractor, CRITERION_TOL_CELLS * h)?;
    let expansivity_ok = expansion_factor(ifs)
        .and_then(|l| expansivity_check(ifs, &centre, (1.0 + l) / 2.0, 1000, opts.seed))
        .map(|e| e.ok)
        .unwrap_or(false);
    let escape_times = (1..=5)
        .filter_map(|n| {
            escape_time_demo(ifs, &attractor, 1, &centre, 2.0 * radius, n, opts.seed).ok()
        })
        .enumerate()
        .map(|(k, d)| (k + 1, d.achieved, d.a))
        .collect();
    Ok(AnalysisReport {
        dim_attractor: fit_a.estimate,
        dim_fast_basin: fit_b.estimate,
        fit_residuals: vec![fit_a.residual, fit_b.residual],
        components_a: connected_components(&a, Adjacency::Eight),
        components_b: connected_components(&basin, Adjacency::Eight),
        max_solid_square_a: max_solid_square(&a),
        max_solid_square_b: max_solid_square(&basin),
        criterion_nontrivial: criterion.nontrivial,
        per_map_hausdorff: criterion.per_map_hausdorff,
        expansivity_ok,
        escape_times,
    })
}
