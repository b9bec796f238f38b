use rayon::prelude::*;

use crate::grid::CellRaster;
use crate::ifs::IfsSystem;
use crate::space::Point;

/// A set that can answer "is `p` within `eps` of me".
pub trait Membership: Sync {
    fn contains_within(&self, p: &Point, eps: f64) -> bool;

    /// A ball `(centre, radius)` containing the set, if known. Enables
    /// pruning in the forward search.
    fn bounding_ball(&self) -> Option<(Point, f64)>;
}

impl Membership for CellRaster {
    fn contains_within(&self, p: &Point, eps: f64) -> bool {
        self.within(p, eps)
    }

    fn bounding_ball(&self) -> Option<(Point, f64)> {
        CellRaster::bounding_ball(self)
    }
}

/// The interval `[lo, hi]` of the real line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Membership for Interval {
    fn contains_within(&self, p: &Point, eps: f64) -> bool {
        !p.is_infinite() && p.x() >= self.lo - eps && p.x() <= self.hi + eps
    }

    fn bounding_ball(&self) -> Option<(Point, f64)> {
        Some((
            Point::line((self.lo + self.hi) / 2.0),
            (self.hi - self.lo) / 2.0,
        ))
    }
}

/// The horizontal segment `[x0, x1] x {y}` of the plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub x0: f64,
    pub x1: f64,
    pub y: f64,
}

impl Membership for Segment {
    fn contains_within(&self, p: &Point, eps: f64) -> bool {
        let dx = (self.x0 - p.x()).max(0.0).max(p.x() - self.x1);
        let dy = p.y() - self.y;
        dx * dx + dy * dy <= eps * eps
    }

    fn bounding_ball(&self) -> Option<(Point, f64)> {
        Some((
            Point::plane((self.x0 + self.x1) / 2.0, self.y),
            (self.x1 - self.x0) / 2.0,
        ))
    }
}

/// The graph `{(z, z²)}` over the square `|Re z|, |Im z| <= half_width` in C².
///
/// Membership uses the vertical distance `|w - z²|`, an upper bound on the
/// true distance, so it may answer false for points just within `eps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParabolaGraph {
    pub half_width: f64,
}

impl Membership for ParabolaGraph {
    fn contains_within(&self, p: &Point, eps: f64) -> bool {
        let (z, w) = (p.z(), p.w());
        let s = self.half_width;
        z.re.abs() <= s && z.im.abs() <= s && (w - z * z).norm() <= eps
    }

    fn bounding_ball(&self) -> Option<(Point, f64)> {
        let r2 = 2.0 * self.half_width * self.half_width;
        Some((
            Point::from_coords(&[0.0; 4]).expect("four coordinates"),
            (r2 + r2 * r2).sqrt(),
        ))
    }
}

const MAX_DEPTH: usize = 40;

/// An attractor resolved below the cell size of its raster.
///
/// If `y` is within `eps` of `A = ⋃ wᵢ(A)` then some `wᵢ⁻¹(y)` is within
/// `eps Lip(wᵢ⁻¹)` of `A`, so queries with small `eps` are pulled back until
/// the tolerance is several cells wide and then answered by the raster.
/// Points farther than `eps` from the raster are rejected at once, since the
/// raster contains `A`. The test never rejects a point within `eps` of `A`.
pub struct AttractorSet<'a> {
    ifs: &'a IfsSystem,
    raster: &'a CellRaster,
    stretch: Vec<f64>,
    resolved: f64,
}

impl<'a> AttractorSet<'a> {
    pub fn new(ifs: &'a IfsSystem, raster: &'a CellRaster) -> Self {
        let stretch = ifs
            .maps()
            .iter()
            .map(|m| m.inverse_lipschitz_on(raster.window()))
            .collect();
        AttractorSet {
            ifs,
            raster,
            stretch,
            resolved: 8.0 * raster.h(),
        }
    }

    fn test(&self, y: &Point, eps: f64, depth: usize) -> bool {
        if !self.raster.within(y, eps) {
            return false;
        }
        if eps >= self.resolved || depth >= MAX_DEPTH {
            return true;
        }
        self.ifs
            .maps()
            .iter()
            .zip(&self.stretch)
            .any(|(m, &stretch)| {
                !stretch.is_finite()
                    || m.apply_inverse(y)
                        .is_ok_and(|z| self.test(&z, eps * stretch, depth + 1))
            })
    }

    /// The raster cells whose centre lies within half a cell diagonal of the
    /// attractor. Still an outer approximation, usually much tighter than
    /// the raster itself.
    pub fn tightened(&self) -> CellRaster {
        let grid = *self.raster.grid();
        let reach = if grid.is_line() {
            0.5
        } else {
            std::f64::consts::FRAC_1_SQRT_2
        } * grid.h()
            * (1.0 + 1e-9);
        let cells: Vec<usize> = self.raster.occupied().collect();
        let keep: Vec<bool> = cells
            .par_iter()
            .map(|&idx| self.test(&grid.center_point(idx), reach, 0))
            .collect();
        let mut out = CellRaster::empty(grid);
        for (&idx, k) in cells.iter().zip(keep) {
            out.set_index(idx, k);
        }
        out
    }
}

impl Membership for AttractorSet<'_> {
    fn contains_within(&self, p: &Point, eps: f64) -> bool {
        self.test(p, eps, 0)
    }

    fn bounding_ball(&self) -> Option<(Point, f64)> {
        self.raster.bounding_ball()
    }
}
