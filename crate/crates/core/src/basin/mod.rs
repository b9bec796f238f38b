//! Fast basins, fractal continuations, slow basins and basin estimates.
//!
//! Two independent fast-basin algorithms are provided. [`fast_basin_inverse`]
//! rasterizes the sets `W⁻ᵏ(A)` from the attractor raster;
//! [`generation_forward`] searches the word tree forwards from a single
//! point. The forward search decides "`Wᵏ(x)` meets `A`" only up to a
//! tolerance `eps`, and for a contractive system every point of the plane
//! reaches the `eps`-neighbourhood of `A` eventually, so `K` and `eps` have to
//! be chosen together.

mod exact;
mod forward;
mod inverse;
mod membership;

use std::collections::HashSet;
use std::path::Path;

use rayon::prelude::*;

use crate::attractor::AttractorApprox;
use crate::error::{Error, Result};
use crate::grid::{
    geometry_header, read_file, read_geometry, write_file, CellRaster, Grid, Window,
};
use crate::ifs::IfsSystem;
use crate::space::Point;

pub use exact::{generation_forward_exact, ExtRational, RationalMoebius};
pub use forward::{generation_forward, generation_forward_field};
pub use inverse::{
    continuation, fast_basin_inverse, fast_basin_inverse_over, slow_basin, ContinuationApprox,
};
pub use membership::{AttractorSet, Interval, Membership, ParabolaGraph, Segment};

/// Largest cutoff a [`GenerationField`] can store.
pub const MAX_CUTOFF: usize = 254;

pub(crate) const UNSET: u8 = 255;

/// Per-cell fast-basin generation: the least `k` with `Wᵏ(cell)` meeting `A`.
#[derive(Debug, Clone, PartialEq)]
pub struct GenerationField {
    grid: Grid,
    gen: Vec<u8>,
    cutoff: usize,
    /// Membership tolerance of the forward algorithm, 0 for the inverse one.
    eps: f64,
}

impl GenerationField {
    /// A field with every cell unset.
    pub fn unset(grid: Grid, cutoff: usize, eps: f64) -> Self {
        GenerationField {
            grid,
            gen: vec![UNSET; grid.len()],
            cutoff,
            eps,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn gen(&self, i: usize, j: usize) -> Option<u8> {
        self.gen_index(self.grid.index(i, j))
    }

    pub fn gen_index(&self, idx: usize) -> Option<u8> {
        Some(self.gen[idx]).filter(|&g| g != UNSET)
    }

    pub fn set(&mut self, i: usize, j: usize, gen: Option<u8>) {
        let idx = self.grid.index(i, j);
        self.set_index(idx, gen);
    }

    pub fn set_index(&mut self, idx: usize, gen: Option<u8>) {
        self.gen[idx] = gen.unwrap_or(UNSET);
    }

    /// The cells with generation at most `k`.
    pub fn level_set(&self, k: usize) -> CellRaster {
        let bits = self
            .gen
            .iter()
            .map(|&g| g != UNSET && (g as usize) <= k)
            .collect();
        CellRaster::from_bits(self.grid, bits).expect("field and grid sizes agree")
    }

    /// Number of cells with generation exactly `k`.
    pub fn count_at(&self, k: u8) -> usize {
        self.gen.iter().filter(|&&g| g == k).count()
    }

    /// Serializes as `FBG1`: the `FBR1` geometry header, then one byte per
    /// cell row-major from row 0, 255 meaning unset.
    pub fn to_fbg1(&self) -> Vec<u8> {
        let mut out = geometry_header(b"FBG1", &self.grid);
        out.extend_from_slice(&self.gen);
        out
    }

    /// Parses `FBG1` bytes. The cutoff is taken to be the largest stored
    /// generation and `eps` is not recorded, so it comes back as 0.
    pub fn from_fbg1(bytes: &[u8]) -> Result<Self> {
        let (grid, rest) = read_geometry(b"FBG1", bytes)?;
        if rest.len() != grid.len() {
            return Err(Error::Format(format!(
                "expected {} payload bytes, found {}",
                grid.len(),
                rest.len()
            )));
        }
        let cutoff = rest
            .iter()
            .filter(|&&g| g != UNSET)
            .max()
            .copied()
            .unwrap_or(0) as usize;
        Ok(GenerationField {
            grid,
            gen: rest.to_vec(),
            cutoff,
            eps: 0.0,
        })
    }

    pub fn write_fbg1(&self, path: &Path) -> Result<()> {
        write_file(path, &self.to_fbg1())
    }

    pub fn read_fbg1(path: &Path) -> Result<Self> {
        GenerationField::from_fbg1(&read_file(path)?)
    }
}

fn check_cutoff(k: usize) -> Result<()> {
    if k > MAX_CUTOFF {
        Err(Error::CutoffTooLarge(k))
    } else {
        Ok(())
    }
}

/// Orbit sets larger than this are abandoned (the cell is left unmarked).
const MAX_ORBIT: usize = 1 << 16;

/// Basin-of-attraction estimate: a cell is marked when, for some `k <= K`,
/// every point of `Wᵏ({centre})` lies within `eps` of the attractor raster.
/// Orbit sets are thinned to one point per cell of the grid.
pub fn basin_estimate(
    ifs: &IfsSystem,
    attractor: &AttractorApprox,
    window: &Window,
    nx: usize,
    k_max: usize,
    eps: f64,
) -> Result<CellRaster> {
    ifs.require_total()?;
    let grid = Grid::for_space(ifs.space(), window, nx)?;
    let a = &attractor.raster;
    let h = grid.h();
    let key = |p: &Point| -> (i64, i64) {
        if p.is_infinite() {
            (i64::MAX, i64::MAX)
        } else {
            let y = if p.dim() == 1 { 0.0 } else { p.y() };
            ((p.x() / h).floor() as i64, (y / h).floor() as i64)
        }
    };
    let marked = |x: Point| -> bool {
        let mut orbit = vec![x];
        for k in 0..=k_max {
            if orbit.iter().all(|y| a.within(y, eps)) {
                return true;
            }
            if k == k_max {
                break;
            }
            let mut seen = HashSet::new();
            let mut next = Vec::new();
            for y in &orbit {
                for m in ifs.maps() {
                    let Ok(z) = m.apply(y) else { return false };
                    if seen.insert(key(&z)) {
                        next.push(z);
                    }
                }
            }
            if next.len() > MAX_ORBIT {
                return false;
            }
            orbit = next;
        }
        false
    };
    let bits = (0..grid.len())
        .into_par_iter()
        .map(|idx| marked(grid.center_point(idx)))
        .collect();
    CellRaster::from_bits(grid, bits)
}
