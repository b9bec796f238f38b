//! Windows, cell grids and occupancy rasters.
//!
//! A [`CellRaster`] stands for the closed union of its occupied cells. All
//! covering routines select the cells whose interior meets the interior of
//! the covered shape (up to a relative tolerance of `1e-9` cell sides), which
//! yields an outer approximation of any shape with nonempty interior.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::space::{ModelSpace, Point};

const COVER_TOL: f64 = 1e-9;

/// Axis-aligned box `[xmin, xmax] x [ymin, ymax]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub xmin: f64,
    pub ymin: f64,
    pub xmax: f64,
    pub ymax: f64,
}

impl Window {
    pub fn new(xmin: f64, ymin: f64, xmax: f64, ymax: f64) -> Result<Self> {
        let finite = [xmin, ymin, xmax, ymax].iter().all(|v| v.is_finite());
        if !finite || xmin >= xmax || ymin > ymax {
            return Err(Error::Geometry(format!(
                "bad window {xmin} {ymin} {xmax} {ymax}"
            )));
        }
        Ok(Window {
            xmin,
            ymin,
            xmax,
            ymax,
        })
    }

    pub fn width(&self) -> f64 {
        self.xmax - self.xmin
    }

    pub fn height(&self) -> f64 {
        self.ymax - self.ymin
    }

    pub fn contains_window(&self, other: &Window) -> bool {
        other.xmin >= self.xmin
            && other.xmax <= self.xmax
            && other.ymin >= self.ymin
            && other.ymax <= self.ymax
    }
}

/// A window cut into `nx * ny` square cells of side `h`. Row 0 is the
/// bottom row (smallest y). A grid with `ny == 1` doubles as a grid on the
/// real line, in which case only x coordinates are used.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    window: Window,
    nx: usize,
    ny: usize,
    h: f64,
}

impl Grid {
    /// Square cells of side `width / nx`; the row count follows from the
    /// window height, which must be a whole number of cells.
    pub fn new(window: Window, nx: usize) -> Result<Self> {
        if nx == 0 {
            return Err(Error::Geometry("nx must be positive".into()));
        }
        let h = window.width() / nx as f64;
        let ny = (window.height() / h).round() as usize;
        Grid::from_parts(window, nx, ny)
    }

    /// A one-row grid on `[xmin, xmax]`; the window is `h` tall around y = 0.
    pub fn line(xmin: f64, xmax: f64, nx: usize) -> Result<Self> {
        if nx == 0 || xmin.is_nan() || xmax.is_nan() || xmin >= xmax {
            return Err(Error::Geometry("bad line grid".into()));
        }
        let h = (xmax - xmin) / nx as f64;
        Grid::from_parts(Window::new(xmin, -h / 2.0, xmax, h / 2.0)?, nx, 1)
    }

    /// The grid used for rasters on `space`: a one-row grid on the x range
    /// of `window` for the extended line, a square-cell grid otherwise.
    pub fn for_space(space: ModelSpace, window: &Window, nx: usize) -> Result<Self> {
        match space {
            ModelSpace::ExtendedLine => Grid::line(window.xmin, window.xmax, nx),
            ModelSpace::ComplexPlane2 => Err(Error::UnsupportedSpace("cplane2")),
            _ => Grid::new(*window, nx),
        }
    }

    pub fn from_parts(window: Window, nx: usize, ny: usize) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(Error::Geometry(format!("empty grid {nx}x{ny}")));
        }
        let h = window.width() / nx as f64;
        let hy = window.height() / ny as f64;
        if ((h - hy) / h).abs() > 1e-12 {
            return Err(Error::Geometry(format!(
                "cells are not square: {h} x {hy} (window {window:?}, {nx}x{ny})"
            )));
        }
        Ok(Grid { window, nx, ny, h })
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_line(&self) -> bool {
        self.ny == 1
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> (usize, usize) {
        (idx % self.nx, idx / self.nx)
    }

    /// `(x0, x1, y0, y1)` of cell `(i, j)`.
    pub fn cell_rect(&self, i: usize, j: usize) -> (f64, f64, f64, f64) {
        let x0 = self.window.xmin + i as f64 * self.h;
        let y0 = self.window.ymin + j as f64 * self.h;
        (x0, x0 + self.h, y0, y0 + self.h)
    }

    pub fn cell_center(&self, i: usize, j: usize) -> (f64, f64) {
        (
            self.window.xmin + (i as f64 + 0.5) * self.h,
            self.window.ymin + (j as f64 + 0.5) * self.h,
        )
    }

    /// The cell center as a point of the matching dimension.
    pub fn center_point(&self, idx: usize) -> Point {
        let (i, j) = self.coords(idx);
        let (x, y) = self.cell_center(i, j);
        if self.is_line() {
            Point::line(x)
        } else {
            Point::plane(x, y)
        }
    }

    /// Cell containing `p` (half-open cells; the upper window edge belongs to
    /// the last cell).
    pub fn cell_of(&self, p: &Point) -> Option<(usize, usize)> {
        if p.is_infinite() {
            return None;
        }
        let i = axis_cell(p.x(), self.window.xmin, self.h, self.nx)?;
        let j = if self.is_line() || p.dim() == 1 {
            0
        } else {
            axis_cell(p.y(), self.window.ymin, self.h, self.ny)?
        };
        Some((i, j))
    }

    /// Inclusive index range of cells along one axis whose open interval
    /// meets `(lo, hi)`; degenerate intervals select the cells whose closure
    /// contains the point.
    fn axis_range(&self, lo: f64, hi: f64, min: f64, n: usize) -> Option<(usize, usize)> {
        let tol = COVER_TOL * self.h;
        let (a, b) = if hi - lo > 2.0 * tol {
            (
                ((lo + tol - min) / self.h).floor(),
                ((hi - tol - min) / self.h).ceil() - 1.0,
            )
        } else {
            let m = 0.5 * (lo + hi);
            (
                ((m - tol - min) / self.h).floor(),
                ((m + tol - min) / self.h).floor(),
            )
        };
        let a = a.max(0.0);
        let b = b.min(n as f64 - 1.0);
        if a > b || b.is_nan() || a.is_nan() {
            None
        } else {
            Some((a as usize, b as usize))
        }
    }

    /// Calls `f` on every cell whose interior meets the open box.
    pub fn cover_rect(&self, x0: f64, x1: f64, y0: f64, y1: f64, mut f: impl FnMut(usize)) {
        let Some((i0, i1)) = self.axis_range(x0, x1, self.window.xmin, self.nx) else {
            return;
        };
        let (j0, j1) = if self.is_line() {
            (0, 0)
        } else {
            match self.axis_range(y0, y1, self.window.ymin, self.ny) {
                Some(r) => r,
                None => return,
            }
        };
        for j in j0..=j1 {
            for i in i0..=i1 {
                f(self.index(i, j));
            }
        }
    }

    /// Line grids: calls `f` on every cell meeting the interval `(lo, hi)`.
    pub fn cover_interval(&self, lo: f64, hi: f64, f: impl FnMut(usize)) {
        self.cover_rect(lo, hi, 0.0, 0.0, f)
    }

    /// Calls `f` on every cell whose interior meets the interior of the
    /// parallelogram with vertices `p0, p0+u, p0+u+v, p0+v`.
    pub fn cover_parallelogram(
        &self,
        p0: (f64, f64),
        u: (f64, f64),
        v: (f64, f64),
        mut f: impl FnMut(usize),
    ) {
        let xs = [p0.0, p0.0 + u.0, p0.0 + u.0 + v.0, p0.0 + v.0];
        let ys = [p0.1, p0.1 + u.1, p0.1 + u.1 + v.1, p0.1 + v.1];
        let (bx0, bx1) = min_max(&xs);
        let (by0, by1) = min_max(&ys);
        let axis_aligned = (u.0 == 0.0 || u.1 == 0.0) && (v.0 == 0.0 || v.1 == 0.0);
        if axis_aligned {
            self.cover_rect(bx0, bx1, by0, by1, f);
            return;
        }
        let tol = COVER_TOL * self.h;
        let normals = [unit_normal(u), unit_normal(v)];
        let proj: Vec<(f64, f64)> = normals
            .iter()
            .map(|n| min_max(&[0, 1, 2, 3].map(|k| xs[k] * n.0 + ys[k] * n.1)))
            .collect();
        self.cover_rect(bx0, bx1, by0, by1, |idx| {
            let (i, j) = self.coords(idx);
            let (x0, x1, y0, y1) = self.cell_rect(i, j);
            let separated = normals.iter().zip(&proj).any(|(n, &(lo, hi))| {
                let c = [
                    x0 * n.0 + y0 * n.1,
                    x1 * n.0 + y0 * n.1,
                    x0 * n.0 + y1 * n.1,
                    x1 * n.0 + y1 * n.1,
                ];
                let (clo, chi) = min_max(&c);
                chi.min(hi) - clo.max(lo) <= tol
            });
            if !separated {
                f(idx);
            }
        });
    }
}

fn axis_cell(v: f64, min: f64, h: f64, n: usize) -> Option<usize> {
    let t = (v - min) / h;
    if t.is_nan() || t < 0.0 || t > n as f64 {
        return None;
    }
    Some((t.floor() as usize).min(n - 1))
}

fn min_max(v: &[f64]) -> (f64, f64) {
    v.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        })
}

fn unit_normal(e: (f64, f64)) -> (f64, f64) {
    let n = (e.0 * e.0 + e.1 * e.1).sqrt();
    (-e.1 / n, e.0 / n)
}

/// Occupancy of the cells of a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct CellRaster {
    grid: Grid,
    bits: Vec<bool>,
}

impl CellRaster {
    pub fn empty(grid: Grid) -> Self {
        CellRaster {
            bits: vec![false; grid.len()],
            grid,
        }
    }

    pub fn full(grid: Grid) -> Self {
        CellRaster {
            bits: vec![true; grid.len()],
            grid,
        }
    }

    pub fn from_bits(grid: Grid, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != grid.len() {
            return Err(Error::Geometry(format!(
                "{} bits for {} cells",
                bits.len(),
                grid.len()
            )));
        }
        Ok(CellRaster { grid, bits })
    }

    /// Raster with the cells for which `f(i, j)` holds.
    pub fn from_fn(grid: Grid, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let bits = (0..grid.len())
            .map(|idx| {
                let (i, j) = grid.coords(idx);
                f(i, j)
            })
            .collect();
        CellRaster { grid, bits }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn window(&self) -> &Window {
        self.grid.window()
    }

    pub fn nx(&self) -> usize {
        self.grid.nx
    }

    pub fn ny(&self) -> usize {
        self.grid.ny
    }

    pub fn h(&self) -> f64 {
        self.grid.h
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.bits[self.grid.index(i, j)]
    }

    #[inline]
    pub fn get_index(&self, idx: usize) -> bool {
        self.bits[idx]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: bool) {
        let idx = self.grid.index(i, j);
        self.bits[idx] = v;
    }

    #[inline]
    pub fn set_index(&mut self, idx: usize, v: bool) {
        self.bits[idx] = v;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|b| *b)
    }

    pub fn occupied(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, b)| **b)
            .map(|(i, _)| i)
    }

    fn check_same(&self, other: &CellRaster) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::Geometry("rasters live on different grids".into()));
        }
        Ok(())
    }

    pub fn union_with(&mut self, other: &CellRaster) -> Result<()> {
        self.check_same(other)?;
        for (a, b) in self.bits.iter_mut().zip(&other.bits) {
            *a |= *b;
        }
        Ok(())
    }

    pub fn intersection(&self, other: &CellRaster) -> Result<CellRaster> {
        self.check_same(other)?;
        let bits = self
            .bits
            .iter()
            .zip(&other.bits)
            .map(|(a, b)| *a && *b)
            .collect();
        Ok(CellRaster {
            grid: self.grid,
            bits,
        })
    }

    pub fn is_subset_of(&self, other: &CellRaster) -> bool {
        self.grid == other.grid && self.bits.iter().zip(&other.bits).all(|(a, b)| !*a || *b)
    }

    /// Cells of `self` missing from `other`.
    pub fn missing_from(&self, other: &CellRaster) -> usize {
        self.bits
            .iter()
            .zip(&other.bits)
            .filter(|(a, b)| **a && !**b)
            .count()
    }

    /// Chebyshev dilation by `k` cells.
    pub fn dilate(&self, k: usize) -> CellRaster {
        if k == 0 {
            return self.clone();
        }
        let (nx, ny) = (self.nx(), self.ny());
        let mut rows = vec![false; self.bits.len()];
        for j in 0..ny {
            for i in 0..nx {
                if self.get(i, j) {
                    let lo = i.saturating_sub(k);
                    let hi = (i + k).min(nx - 1);
                    for ii in lo..=hi {
                        rows[j * nx + ii] = true;
                    }
                }
            }
        }
        let mut out = CellRaster::empty(self.grid);
        for j in 0..ny {
            for i in 0..nx {
                if rows[j * nx + i] {
                    let lo = j.saturating_sub(k);
                    let hi = (j + k).min(ny - 1);
                    for jj in lo..=hi {
                        out.bits[jj * nx + i] = true;
                    }
                }
            }
        }
        out
    }

    /// Outer approximation of the occupied set on another grid.
    pub fn resample(&self, grid: &Grid) -> CellRaster {
        if *grid == self.grid {
            return self.clone();
        }
        let mut out = CellRaster::empty(*grid);
        for idx in self.occupied() {
            let (i, j) = self.grid.coords(idx);
            let (x0, x1, y0, y1) = self.grid.cell_rect(i, j);
            grid.cover_rect(x0, x1, y0, y1, |d| out.bits[d] = true);
        }
        out
    }

    /// Whether `p` lies within distance `eps` of the union of occupied cells.
    pub fn within(&self, p: &Point, eps: f64) -> bool {
        if p.is_infinite() {
            return false;
        }
        let g = &self.grid;
        let line = g.is_line() || p.dim() == 1;
        let (x, y) = if line {
            (p.x(), g.cell_center(0, 0).1)
        } else {
            (p.x(), p.y())
        };
        let w = g.window;
        if x < w.xmin - eps || x > w.xmax + eps || y < w.ymin - eps || y > w.ymax + eps {
            return false;
        }
        // closed cells: a point on a cell edge touches both neighbours
        let clamp = |v: f64, n: usize| (v.max(0.0) as usize).min(n - 1);
        let range = |v: f64, min: f64, n: usize| {
            (
                clamp(((v - eps - min) / g.h).ceil() - 1.0, n),
                clamp(((v + eps - min) / g.h).floor(), n),
            )
        };
        let (i0, i1) = range(x, w.xmin, g.nx);
        let (j0, j1) = if line { (0, 0) } else { range(y, w.ymin, g.ny) };
        let eps2 = eps * eps;
        for j in j0..=j1 {
            for i in i0..=i1 {
                if !self.get(i, j) {
                    continue;
                }
                let (x0, x1, y0, y1) = g.cell_rect(i, j);
                let dx = (x0 - x).max(0.0).max(x - x1);
                let dy = if line {
                    0.0
                } else {
                    (y0 - y).max(0.0).max(y - y1)
                };
                if dx * dx + dy * dy <= eps2 {
                    return true;
                }
            }
        }
        false
    }

    /// Cells whose closed square lies at distance `< r` from some occupied
    /// cell: the open `r`-neighbourhood at cell resolution.
    pub fn neighborhood(&self, r: f64) -> CellRaster {
        let g = self.grid;
        let k = (r / g.h).ceil() as i64 + 1;
        let limit = r / g.h;
        let offsets: Vec<(i64, i64)> = (-k..=k)
            .flat_map(|dj| (-k..=k).map(move |di| (di, dj)))
            .filter(|&(di, dj)| {
                let gx = (di.abs() - 1).max(0) as f64;
                let gy = (dj.abs() - 1).max(0) as f64;
                (gx * gx + gy * gy).sqrt() < limit
            })
            .collect();
        let mut out = self.clone();
        let (nx, ny) = (g.nx as i64, g.ny as i64);
        for idx in self.occupied() {
            let (i, j) = g.coords(idx);
            for &(di, dj) in &offsets {
                let (a, b) = (i as i64 + di, j as i64 + dj);
                if a >= 0 && a < nx && b >= 0 && b < ny {
                    out.bits[(b * nx + a) as usize] = true;
                }
            }
        }
        out
    }

    /// Squared centre-to-centre distance (in cells) from every cell to the
    /// nearest occupied cell; `INFINITY` everywhere for an empty raster.
    pub fn distance_field(&self) -> Vec<f64> {
        let (nx, ny) = (self.nx(), self.ny());
        let inf = f64::INFINITY;
        let mut d: Vec<f64> = self
            .bits
            .iter()
            .map(|&b| if b { 0.0 } else { inf })
            .collect();
        let mut buf = vec![0.0; nx.max(ny)];
        let mut out = vec![0.0; nx.max(ny)];
        for j in 0..ny {
            buf[..nx].copy_from_slice(&d[j * nx..(j + 1) * nx]);
            edt_1d(&buf[..nx], &mut out[..nx]);
            d[j * nx..(j + 1) * nx].copy_from_slice(&out[..nx]);
        }
        for i in 0..nx {
            for j in 0..ny {
                buf[j] = d[j * nx + i];
            }
            edt_1d(&buf[..ny], &mut out[..ny]);
            for j in 0..ny {
                d[j * nx + i] = out[j];
            }
        }
        d
    }

    /// Hausdorff distance between the cell-centre sets of two rasters on the
    /// same grid, in world units. Infinite if exactly one is empty.
    pub fn hausdorff(&self, other: &CellRaster) -> Result<f64> {
        self.check_same(other)?;
        match (self.is_empty(), other.is_empty()) {
            (true, true) => return Ok(0.0),
            (true, false) | (false, true) => return Ok(f64::INFINITY),
            _ => {}
        }
        let da = self.distance_field();
        let db = other.distance_field();
        let one_sided = |bits: &[bool], d: &[f64]| {
            bits.iter()
                .zip(d)
                .filter(|(b, _)| **b)
                .map(|(_, v)| *v)
                .fold(0.0, f64::max)
        };
        let m = one_sided(&self.bits, &db).max(one_sided(&other.bits, &da));
        Ok(m.sqrt() * self.h())
    }

    /// Ball `(centre, radius)` containing every occupied cell.
    pub fn bounding_ball(&self) -> Option<(Point, f64)> {
        let g = &self.grid;
        let (mut x0, mut x1, mut y0, mut y1) = (
            f64::INFINITY,
            f64::NEG_INFINITY,
            f64::INFINITY,
            f64::NEG_INFINITY,
        );
        for idx in self.occupied() {
            let (i, j) = g.coords(idx);
            let (a, b, c, d) = g.cell_rect(i, j);
            x0 = x0.min(a);
            x1 = x1.max(b);
            y0 = y0.min(c);
            y1 = y1.max(d);
        }
        if x0 > x1 {
            return None;
        }
        let (cx, cy) = ((x0 + x1) / 2.0, (y0 + y1) / 2.0);
        if g.is_line() {
            Some((Point::line(cx), (x1 - x0) / 2.0))
        } else {
            Some((
                Point::plane(cx, cy),
                ((x1 - x0).powi(2) + (y1 - y0).powi(2)).sqrt() / 2.0,
            ))
        }
    }

    /// Serializes as `FBR1`: magic, `nx` and `ny` as little-endian `u32`, the
    /// window as four little-endian `f64` (xmin, ymin, xmax, ymax), then the
    /// cells row-major from row 0, packed eight per byte, most significant
    /// bit first.
    pub fn to_fbr1(&self) -> Vec<u8> {
        let mut out = geometry_header(b"FBR1", &self.grid);
        out.extend(pack_bits(&self.bits));
        out
    }

    pub fn from_fbr1(bytes: &[u8]) -> Result<Self> {
        let (grid, rest) = read_geometry(b"FBR1", bytes)?;
        let need = grid.len().div_ceil(8);
        if rest.len() != need {
            return Err(Error::Format(format!(
                "expected {need} payload bytes, found {}",
                rest.len()
            )));
        }
        let bits = (0..grid.len())
            .map(|k| rest[k / 8] & (0x80 >> (k % 8)) != 0)
            .collect();
        Ok(CellRaster { grid, bits })
    }

    pub fn write_fbr1(&self, path: &Path) -> Result<()> {
        write_file(path, &self.to_fbr1())
    }

    pub fn read_fbr1(path: &Path) -> Result<Self> {
        CellRaster::from_fbr1(&read_file(path)?)
    }
}

/// Felzenszwalb-Huttenlocher lower envelope of parabolas.
fn edt_1d(f: &[f64], d: &mut [f64]) {
    let n = f.len();
    let mut v = vec![0usize; n];
    let mut z = vec![0.0f64; n + 1];
    let mut k: usize = 0;
    let Some(q0) = f.iter().position(|x| x.is_finite()) else {
        d.iter_mut().for_each(|x| *x = f64::INFINITY);
        return;
    };
    v[0] = q0;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in q0 + 1..n {
        if !f[q].is_finite() {
            continue;
        }
        loop {
            let p = v[k];
            let s = ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64))
                / (2.0 * q as f64 - 2.0 * p as f64);
            if s <= z[k] && k > 0 {
                k -= 1;
            } else if s <= z[k] {
                // k == 0 and the new parabola dominates everywhere
                v[0] = q;
                z[0] = f64::NEG_INFINITY;
                z[1] = f64::INFINITY;
                break;
            } else {
                k += 1;
                v[k] = q;
                z[k] = s;
                z[k + 1] = f64::INFINITY;
                break;
            }
        }
    }
    let mut k = 0;
    for (q, out) in d.iter_mut().enumerate() {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let p = v[k];
        let dq = q as f64 - p as f64;
        *out = dq * dq + f[p];
    }
}

pub(crate) fn geometry_header(magic: &[u8; 4], grid: &Grid) -> Vec<u8> {
    let mut out = Vec::with_capacity(4 + 8 + 32 + grid.len() / 8 + 1);
    out.extend_from_slice(magic);
    out.extend_from_slice(&(grid.nx as u32).to_le_bytes());
    out.extend_from_slice(&(grid.ny as u32).to_le_bytes());
    for v in [
        grid.window.xmin,
        grid.window.ymin,
        grid.window.xmax,
        grid.window.ymax,
    ] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub(crate) fn read_geometry<'a>(magic: &[u8; 4], bytes: &'a [u8]) -> Result<(Grid, &'a [u8])> {
    if bytes.len() < 44 || &bytes[..4] != magic {
        return Err(Error::Format(format!(
            "missing {} header",
            String::from_utf8_lossy(magic)
        )));
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap()) as usize;
    let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
    let (nx, ny) = (u32_at(4), u32_at(8));
    let window = Window::new(f64_at(12), f64_at(20), f64_at(28), f64_at(36))?;
    Ok((Grid::from_parts(window, nx, ny)?, &bytes[44..]))
}

fn pack_bits(bits: &[bool]) -> Vec<u8> {
    let mut out = vec![0u8; bits.len().div_ceil(8)];
    for (k, b) in bits.iter().enumerate() {
        if *b {
            out[k / 8] |= 0x80 >> (k % 8);
        }
    }
    out
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut f = std::fs::File::create(path).map_err(io)?;
    f.write_all(bytes).map_err(io)
}

pub(crate) fn read_file(path: &Path) -> Result<Vec<u8>> {
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut buf = Vec::new();
    std::fs::File::open(path)
        .map_err(io)?
        .read_to_end(&mut buf)
        .map_err(io)?;
    Ok(buf)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(n: usize) -> Grid {
        Grid::new(Window::new(0.0, 0.0, 1.0, 1.0).unwrap(), n).unwrap()
    }

    #[test]
    fn grid_geometry() {
        let g = Grid::new(Window::new(-6.2, -6.2, 6.3, 6.3).unwrap(), 512).unwrap();
        assert_eq!(g.ny(), 512);
        assert!(Grid::from_parts(Window::new(0.0, 0.0, 1.0, 2.0).unwrap(), 4, 4).is_err());
        let l = Grid::line(-8.0, 8.0, 256).unwrap();
        assert_eq!((l.ny(), l.h()), (1, 1.0 / 16.0));
        assert_eq!(l.cell_of(&Point::line(1.49)), Some((151, 0)));
    }

    #[test]
    fn cover_aligned_and_rotated() {
        let g = unit(4);
        let mut cells = Vec::new();
        g.cover_rect(0.0, 0.25, 0.0, 0.25, |i| cells.push(i));
        assert_eq!(cells, vec![0]);
        cells.clear();
        // a diamond centred in cell (1,1) touching its edge midpoints
        g.cover_parallelogram((0.375, 0.25), (0.125, 0.125), (-0.125, 0.125), |i| {
            cells.push(i)
        });
        assert_eq!(cells, vec![g.index(1, 1)]);
        cells.clear();
        // bigger diamond spills into the 4-neighbours but not the diagonals
        g.cover_parallelogram((0.375, 0.2), (0.175, 0.175), (-0.175, 0.175), |i| {
            cells.push(i)
        });
        cells.sort();
        let mut want = vec![
            g.index(1, 0),
            g.index(0, 1),
            g.index(1, 1),
            g.index(2, 1),
            g.index(1, 2),
        ];
        want.sort();
        assert_eq!(cells, want);
    }

    #[test]
    fn dilate_and_subset() {
        let mut r = CellRaster::empty(unit(8));
        r.set(3, 3, true);
        let d = r.dilate(1);
        assert_eq!(d.count(), 9);
        assert!(r.is_subset_of(&d));
        assert!(!d.is_subset_of(&r));
    }

    #[test]
    fn distance_field_matches_brute_force() {
        let g = unit(16);
        let r = CellRaster::from_fn(g, |i, j| (i * 7 + j * 3) % 11 == 0);
        let d = r.distance_field();
        for (idx, &got) in d.iter().enumerate() {
            let (i, j) = g.coords(idx);
            let brute = r
                .occupied()
                .map(|o| {
                    let (a, b) = g.coords(o);
                    (a as f64 - i as f64).powi(2) + (b as f64 - j as f64).powi(2)
                })
                .fold(f64::INFINITY, f64::min);
            assert_eq!(got, brute, "cell {i},{j}");
        }
    }

    #[test]
    fn hausdorff_basic() {
        let g = unit(8);
        let mut a = CellRaster::empty(g);
        a.set(0, 0, true);
        let mut b = CellRaster::empty(g);
        b.set(3, 4, true);
        assert!((a.hausdorff(&b).unwrap() - 5.0 / 8.0).abs() < 1e-12);
        assert_eq!(a.hausdorff(&a).unwrap(), 0.0);
        assert_eq!(a.hausdorff(&CellRaster::empty(g)).unwrap(), f64::INFINITY);
    }

    #[test]
    fn within_distance() {
        let mut r = CellRaster::empty(unit(8));
        r.set(0, 0, true);
        assert!(r.within(&Point::plane(0.1, 0.1), 0.0));
        assert!(r.within(&Point::plane(0.125, 0.125), 0.0));
        assert!(!r.within(&Point::plane(0.2, 0.125), 0.05));
        assert!(r.within(&Point::plane(0.2, 0.125), 0.08));
        assert!(r.within(&Point::plane(-0.05, 0.0), 0.06));
    }

    #[test]
    fn fbr1_layout() {
        let mut r = CellRaster::empty(
            Grid::from_parts(Window::new(0.0, 0.0, 3.0, 1.0).unwrap(), 3, 1).unwrap(),
        );
        r.set(0, 0, true);
        r.set(2, 0, true);
        let bytes = r.to_fbr1();
        assert_eq!(&bytes[..4], b"FBR1");
        assert_eq!(&bytes[4..12], &[3, 0, 0, 0, 1, 0, 0, 0]);
        assert_eq!(bytes.len(), 44 + 1);
        assert_eq!(bytes[44], 0b1010_0000);
        assert_eq!(CellRaster::from_fbr1(&bytes).unwrap(), r);
        assert!(CellRaster::from_fbr1(&bytes[..40]).is_err());
    }
}
