use std::collections::HashSet;

use rayon::prelude::*;

use super::{check_cutoff, GenerationField, UNSET};
use crate::attractor::AttractorApprox;
use crate::error::{Error, Result};
use crate::grid::{CellRaster, Grid, Window};
use crate::ifs::{IfsSystem, Word};
use crate::map::MapSpec;
use crate::render::{transport_cells, transport_raster, Direction};
use crate::space::Point;

/// Distinct inverse word maps tracked per generation before switching to
/// raster sweeps.
const MAP_BUDGET: usize = 1 << 14;
const MAX_REFINE: usize = 48;
/// Leaves are refined until they shrink attractor cells to this fraction of
/// a destination cell.
const LEAF_SHRINK: f64 = 0.5;
const KEY_SCALE: f64 = (1u64 << 32) as f64;

type MapKey = Vec<i64>;

fn map_key(m: &MapSpec) -> MapKey {
    let coeffs: Vec<f64> = match *m {
        MapSpec::Affine2 { a, b, c, d, tx, ty } => vec![a, b, c, d, tx, ty],
        MapSpec::Moebius1 { p, q, r, s } => {
            // projective: normalize by the largest coefficient
            let n = [p, q, r, s].iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
            let sign = [p, q, r, s]
                .into_iter()
                .find(|v| v.abs() == n)
                .unwrap_or(1.0)
                .signum();
            [p, q, r, s].iter().map(|v| v / n * sign).collect()
        }
        MapSpec::ComplexAffine2 {
            m11,
            m21,
            m22,
            t1,
            t2,
        } => [m11, m21, m22, t1, t2]
            .iter()
            .flat_map(|z| [z.re, z.im])
            .collect(),
        MapSpec::HalfSqrt { tx } => vec![tx],
    };
    coeffs
        .iter()
        .map(|v| (v * KEY_SCALE).round() as i64)
        .collect()
}

fn dedup(maps: Vec<MapSpec>) -> Vec<MapSpec> {
    let mut seen = HashSet::new();
    maps.into_iter()
        .filter(|m| seen.insert(map_key(m)))
        .collect()
}

fn distance_to_window(p: &Point, w: &Window, line: bool) -> f64 {
    let dx = (w.xmin - p.x()).max(0.0).max(p.x() - w.xmax);
    if line {
        return dx;
    }
    let dy = (w.ymin - p.y()).max(0.0).max(p.y() - w.ymax);
    dx.hypot(dy)
}

/// Splits `w_θ⁻¹(A)` into images of `A` under maps `w_θ⁻¹ ∘ w_σ` that do not
/// expand the attractor's window, so transporting the attractor raster
/// through them does not magnify its rasterization error. Pieces that
/// cannot reach the destination window are dropped.
struct Leaves<'a> {
    ifs: &'a IfsSystem,
    source: &'a Window,
    max_lip: f64,
    centre: Point,
    radius: f64,
    dst: &'a Window,
    line: bool,
}

impl Leaves<'_> {
    fn collect(&self, m: MapSpec, depth: usize, out: &mut Vec<MapSpec>) -> Result<()> {
        let lip = m.forward_lipschitz(self.source);
        if lip.is_finite() {
            if let Ok(c) = m.apply(&self.centre) {
                if !c.is_infinite()
                    && distance_to_window(&c, self.dst, self.line) > lip * self.radius
                {
                    return Ok(());
                }
            }
        }
        if lip <= self.max_lip * (1.0 + 1e-9) || depth >= MAX_REFINE {
            out.push(m);
            return Ok(());
        }
        for w in self.ifs.maps() {
            self.collect(m.compose(w)?, depth + 1, out)?;
        }
        Ok(())
    }

    fn of(&self, maps: &[MapSpec]) -> Result<Vec<MapSpec>> {
        let parts: Vec<Vec<MapSpec>> = maps
            .par_iter()
            .map(|m| {
                let mut out = Vec::new();
                self.collect(*m, 0, &mut out)?;
                Ok(out)
            })
            .collect::<Result<_>>()?;
        Ok(dedup(parts.into_iter().flatten().collect()))
    }
}

fn union_of_images(maps: &[MapSpec], a: &CellRaster, grid: &Grid) -> Result<CellRaster> {
    maps.par_iter()
        .try_fold(
            || CellRaster::empty(*grid),
            |mut acc, m| {
                acc.union_with(&transport_raster(m, Direction::Forward, a, grid)?)?;
                Ok(acc)
            },
        )
        .try_reduce(
            || CellRaster::empty(*grid),
            |mut x, y| {
                x.union_with(&y)?;
                Ok(x)
            },
        )
}

fn leaves_for<'a>(ifs: &'a IfsSystem, a: &'a CellRaster, grid: &'a Grid) -> Option<Leaves<'a>> {
    let (centre, radius) = a.bounding_ball()?;
    let max_lip = LEAF_SHRINK * grid.h() / a.h();
    Some(Leaves {
        ifs,
        source: a.window(),
        max_lip,
        centre,
        radius,
        dst: grid.window(),
        line: grid.is_line(),
    })
}

/// Continues `S_{k+1} = S_k ∪ W⁻¹(S_k)` on the field's grid from generation
/// `start` on, with `S_{start-1}` the cells already set. After the first
/// sweep only newly added cells are transported, which gives the same sets
/// because transport commutes with unions.
fn sweep_from(
    ifs: &IfsSystem,
    alphabet: &[usize],
    field: &mut GenerationField,
    start: usize,
) -> Result<()> {
    let grid = *field.grid();
    let maps: Vec<MapSpec> = alphabet
        .iter()
        .map(|&i| ifs.map(i).copied())
        .collect::<Result<_>>()?;
    let mut frontier: Vec<usize> = (0..grid.len()).filter(|&i| field.gen[i] != UNSET).collect();
    for k in start..=field.cutoff {
        if frontier.is_empty() {
            break;
        }
        let images: Vec<CellRaster> = maps
            .par_iter()
            .map(|m| transport_cells(m, Direction::Inverse, &grid, &frontier, &grid))
            .collect::<Result<_>>()?;
        let mut next = Vec::new();
        for img in &images {
            for idx in img.occupied() {
                if field.gen[idx] == UNSET {
                    field.gen[idx] = k as u8;
                    next.push(idx);
                }
            }
        }
        next.sort_unstable();
        frontier = next;
    }
    Ok(())
}

fn check_alphabet(ifs: &IfsSystem, alphabet: &[usize]) -> Result<()> {
    for &i in alphabet {
        ifs.map(i)?;
    }
    Ok(())
}

/// Fast basin by inverse iteration: `gen(c)` is the least `k` such that the
/// cell `c` meets (an outer approximation of) `W⁻ᵏ(A) = ⋃_{|θ|=k} w_θ⁻¹(A)`.
///
/// Each `w_θ⁻¹(A)` is rasterized directly from the attractor raster, split
/// into pieces that the inverse maps do not blow up, so the result is about
/// one cell fatter than the true set at every generation. Once the number of
/// distinct maps `w_θ⁻¹` exceeds a budget the remaining generations fall
/// back to raster sweeps `S_{k+1} = S_k ∪ W⁻¹(S_k)`, which are coarser.
pub fn fast_basin_inverse(
    ifs: &IfsSystem,
    attractor: &AttractorApprox,
    window: &Window,
    nx: usize,
    k_max: usize,
) -> Result<GenerationField> {
    let alphabet: Vec<usize> = (1..=ifs.len()).collect();
    fast_basin_inverse_over(ifs, &alphabet, attractor, window, nx, k_max)
}

/// [`fast_basin_inverse`] with the inverse iteration restricted to the maps
/// in `alphabet` (1-based indices): generation `k` is `⋃ w_θ⁻¹(A)` over words
/// `θ` of length `k` in that alphabet.
pub fn fast_basin_inverse_over(
    ifs: &IfsSystem,
    alphabet: &[usize],
    attractor: &AttractorApprox,
    window: &Window,
    nx: usize,
    k_max: usize,
) -> Result<GenerationField> {
    ifs.require_total()?;
    check_cutoff(k_max)?;
    check_alphabet(ifs, alphabet)?;
    let grid = Grid::for_space(ifs.space(), window, nx)?;
    let mut field = GenerationField::unset(grid, k_max, 0.0);
    let a = &attractor.raster;
    let Some(leaves) = leaves_for(ifs, a, &grid) else {
        return Ok(field);
    };
    let inverses: Vec<MapSpec> = alphabet
        .iter()
        .map(|&i| ifs.map(i)?.inverse())
        .collect::<Result<_>>()?;
    let mut words = vec![ifs.inverse_word_map(&Word::empty())?];
    for k in 0..=k_max {
        if words.len() > MAP_BUDGET {
            sweep_from(ifs, alphabet, &mut field, k)?;
            break;
        }
        // level 0 is the attractor raster itself, not a cover of its pieces
        let level = if k == 0 {
            a.resample(&grid)
        } else {
            union_of_images(&leaves.of(&words)?, a, &grid)?
        };
        for idx in level.occupied() {
            if field.gen[idx] == UNSET {
                field.gen[idx] = k as u8;
            }
        }
        if k < k_max {
            let next = words
                .iter()
                .flat_map(|m| inverses.iter().map(move |inv| m.compose(inv)))
                .collect::<Result<Vec<_>>>()?;
            words = dedup(next);
        }
    }
    Ok(field)
}

/// Stages `w_{θ1}⁻¹ ∘ ... ∘ w_{θk}⁻¹(A)` for `k = 0..=|prefix|`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuationApprox {
    pub word_prefix: Word,
    pub stages: Vec<CellRaster>,
}

impl ContinuationApprox {
    pub fn grid(&self) -> &Grid {
        self.stages[0].grid()
    }

    pub fn last(&self) -> &CellRaster {
        self.stages.last().expect("stage 0 always exists")
    }
}

/// Fractal continuation along a word prefix. Every stage is rasterized from
/// the attractor raster on its own, so errors do not build up from stage to
/// stage.
pub fn continuation(
    ifs: &IfsSystem,
    prefix: &Word,
    attractor: &AttractorApprox,
    window: &Window,
    nx: usize,
) -> Result<ContinuationApprox> {
    ifs.require_total()?;
    let grid = Grid::for_space(ifs.space(), window, nx)?;
    let a = &attractor.raster;
    let leaves = leaves_for(ifs, a, &grid);
    let mut stages = Vec::with_capacity(prefix.len() + 1);
    for k in 0..=prefix.len() {
        let map = ifs.inverse_word_map(&prefix.prefix(k))?;
        stages.push(match &leaves {
            Some(_) if k == 0 => a.resample(&grid),
            Some(l) => union_of_images(&l.of(&[map])?, a, &grid)?,
            None => CellRaster::empty(grid),
        });
    }
    Ok(ContinuationApprox {
        word_prefix: prefix.clone(),
        stages,
    })
}

/// Slow basin `⋃_{k<=K} W⁻ᵏ(N_r A)`: raster sweeps seeded with the cells
/// within distance `r` of the attractor raster.
pub fn slow_basin(
    ifs: &IfsSystem,
    attractor: &AttractorApprox,
    r: f64,
    window: &Window,
    nx: usize,
    k_max: usize,
) -> Result<CellRaster> {
    if r.is_nan() || r <= 0.0 {
        return Err(Error::InvalidRadius(r));
    }
    ifs.require_total()?;
    check_cutoff(k_max)?;
    let grid = Grid::for_space(ifs.space(), window, nx)?;
    let seed = attractor.raster.resample(&grid).neighborhood(r);
    let mut field = GenerationField::unset(grid, k_max, 0.0);
    for idx in seed.occupied() {
        field.gen[idx] = 0;
    }
    let alphabet: Vec<usize> = (1..=ifs.len()).collect();
    sweep_from(ifs, &alphabet, &mut field, 1)?;
    Ok(field.level_set(k_max))
}
