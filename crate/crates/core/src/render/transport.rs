use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{CellRaster, Grid};
use crate::map::MapSpec;

/// Which way a map is applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

const CHUNK: usize = 4096;

/// Outer approximation on `dst` of the image of the occupied cells of `src`
/// under `map` (or its inverse), clipped to the destination window.
///
/// Affine images of a cell are covered exactly as parallelograms, Moebius
/// images as intervals (split at the pole), and halfsqrt images as boxes.
pub fn transport_raster(
    map: &MapSpec,
    direction: Direction,
    src: &CellRaster,
    dst: &Grid,
) -> Result<CellRaster> {
    let cells: Vec<usize> = src.occupied().collect();
    transport_cells(map, direction, src.grid(), &cells, dst)
}

/// Same as [`transport_raster`] for an explicit list of source cells.
pub(crate) fn transport_cells(
    map: &MapSpec,
    direction: Direction,
    src: &Grid,
    cells: &[usize],
    dst: &Grid,
) -> Result<CellRaster> {
    let effective = match (map, direction) {
        (MapSpec::HalfSqrt { .. }, _) | (_, Direction::Forward) => *map,
        (_, Direction::Inverse) => map.inverse()?,
    };
    if let MapSpec::ComplexAffine2 { .. } = effective {
        return Err(Error::UnsupportedSpace("cplane2"));
    }
    let parts: Vec<Result<Vec<usize>>> = cells
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut hits = Vec::with_capacity(chunk.len() * 4);
            for &idx in chunk {
                let (i, j) = src.coords(idx);
                cover_cell_image(&effective, direction, src.cell_rect(i, j), dst, &mut |d| {
                    hits.push(d)
                })?;
            }
            Ok(hits)
        })
        .collect();
    let mut out = CellRaster::empty(*dst);
    for part in parts {
        for d in part? {
            out.set_index(d, true);
        }
    }
    Ok(out)
}

fn cover_cell_image(
    map: &MapSpec,
    direction: Direction,
    (x0, x1, y0, y1): (f64, f64, f64, f64),
    dst: &Grid,
    emit: &mut dyn FnMut(usize),
) -> Result<()> {
    match *map {
        MapSpec::Affine2 { a, b, c, d, tx, ty } => {
            let p0 = (a * x0 + b * y0 + tx, c * x0 + d * y0 + ty);
            let hx = x1 - x0;
            let hy = y1 - y0;
            dst.cover_parallelogram(p0, (a * hx, c * hx), (b * hy, d * hy), emit);
        }
        MapSpec::Moebius1 { p, q, r, s } => cover_moebius_interval(p, q, r, s, x0, x1, dst, emit),
        MapSpec::HalfSqrt { tx } => match direction {
            Direction::Forward => {
                let (cx0, cx1) = (x0.max(0.0), x1.min(1.0));
                let (cy0, cy1) = (y0.max(0.5), y1);
                if cx0 < cx1 && cy0 < cy1 {
                    dst.cover_rect(cx0 / 2.0 + tx, cx1 / 2.0 + tx, cy0.sqrt(), cy1.sqrt(), emit);
                }
            }
            Direction::Inverse => {
                let (cx0, cx1) = (x0.max(tx), x1.min(tx + 0.5));
                let (cy0, cy1) = (y0.max(std::f64::consts::FRAC_1_SQRT_2), y1);
                if !(cx0 < cx1 && cy0 < cy1) {
                    return Err(Error::PartialMapsUnsupported);
                }
                dst.cover_rect(
                    2.0 * (cx0 - tx),
                    2.0 * (cx1 - tx),
                    cy0 * cy0,
                    cy1 * cy1,
                    emit,
                );
            }
        },
        MapSpec::ComplexAffine2 { .. } => return Err(Error::UnsupportedSpace("cplane2")),
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cover_moebius_interval(
    p: f64,
    q: f64,
    r: f64,
    s: f64,
    x0: f64,
    x1: f64,
    dst: &Grid,
    emit: &mut dyn FnMut(usize),
) {
    let f = |x: f64| (p * x + q) / (r * x + s);
    let increasing = p * s - q * r > 0.0;
    let pole = if r != 0.0 { Some(-s / r) } else { None };
    match pole {
        Some(z) if z > x0 && z < x1 => {
            // [x0, z) and (z, x1] map to two rays through infinity.
            let (a, b) = (f(x0), f(x1));
            if increasing {
                dst.cover_interval(a, f64::INFINITY, &mut *emit);
                dst.cover_interval(f64::NEG_INFINITY, b, &mut *emit);
            } else {
                dst.cover_interval(f64::NEG_INFINITY, a, &mut *emit);
                dst.cover_interval(b, f64::INFINITY, &mut *emit);
            }
        }
        Some(z) if z == x0 => {
            let b = f(x1);
            if increasing {
                dst.cover_interval(f64::NEG_INFINITY, b, emit);
            } else {
                dst.cover_interval(b, f64::INFINITY, emit);
            }
        }
        Some(z) if z == x1 => {
            let a = f(x0);
            if increasing {
                dst.cover_interval(a, f64::INFINITY, emit);
            } else {
                dst.cover_interval(f64::NEG_INFINITY, a, emit);
            }
        }
        _ => {
            let (a, b) = (f(x0), f(x1));
            dst.cover_interval(a.min(b), a.max(b), emit);
        }
    }
}
