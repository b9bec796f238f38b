use rayon::prelude::*;

use super::{check_cutoff, GenerationField, Membership, UNSET};
use crate::error::Result;
use crate::grid::{Grid, Window};
use crate::ifs::IfsSystem;
use crate::space::Point;

/// Radii `ρ_m` such that a point needing at most `m` more steps to come
/// within `eps` of a set inside `B(c, R)` lies in `B(c, ρ_m)`. `None` when
/// some inverse map has no global Lipschitz bound.
fn reach_radii(
    ifs: &IfsSystem,
    centre: &Point,
    radius: f64,
    eps: f64,
    k_max: usize,
) -> Option<Vec<f64>> {
    let mut steps = Vec::with_capacity(ifs.len());
    for m in ifs.maps() {
        let lip = m.inverse_lipschitz_bound()?;
        let back = m.apply_inverse(centre).ok()?;
        let offset = back.distance(centre);
        if !offset.is_finite() {
            return None;
        }
        steps.push((offset, lip));
    }
    let mut radii = vec![radius + eps];
    for _ in 0..k_max {
        let prev = *radii.last().expect("nonempty");
        let next = steps.iter().map(|(o, l)| o + l * prev).fold(prev, f64::max);
        radii.push(next);
    }
    Some(radii)
}

/// How the tolerance of the forward search is measured.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Tolerance {
    /// `w_θ(x)` within `eps` of the set.
    Image,
    /// `w_θ(x)` within `eps` times the local stretch of `w_θ` at `x`, which
    /// bounds the distance from `x` to `w_θ⁻¹(A)` by `eps` to first order
    /// (exactly, for affine maps).
    Query,
}

struct Search<'a> {
    ifs: &'a IfsSystem,
    set: &'a dyn Membership,
    tolerance: Tolerance,
    centre: Point,
    radii: Option<Vec<f64>>,
}

impl<'a> Search<'a> {
    fn new(
        ifs: &'a IfsSystem,
        set: &'a dyn Membership,
        k_max: usize,
        eps: f64,
        tolerance: Tolerance,
    ) -> Self {
        // in query mode the image tolerance never exceeds eps for the
        // contractive affine maps, the only ones with global inverse bounds
        let (centre, radii) = match set.bounding_ball() {
            Some((c, r)) => (c, reach_radii(ifs, &c, r, eps, k_max)),
            None => (Point::line(0.0), None),
        };
        Search {
            ifs,
            set,
            tolerance,
            centre,
            radii,
        }
    }

    /// Depth-first search for a hit at depth `< best`, lowering `best`.
    fn visit(&self, y: &Point, tol: f64, depth: usize, best: &mut usize) {
        if self.set.contains_within(y, tol) {
            *best = depth;
            return;
        }
        if depth + 1 >= *best {
            return;
        }
        if let Some(radii) = &self.radii {
            let remaining = *best - 1 - depth;
            if y.distance(&self.centre) > radii[remaining] {
                return;
            }
        }
        for m in self.ifs.maps() {
            if depth + 1 >= *best {
                return;
            }
            // points outside a partial map's domain have no image
            if let Ok(z) = m.apply(y) {
                let next_tol = match self.tolerance {
                    Tolerance::Image => tol,
                    Tolerance::Query => tol * m.local_scale(y),
                };
                self.visit(&z, next_tol, depth + 1, best);
            }
        }
    }

    fn run(&self, x: &Point, eps: f64, k_max: usize) -> Option<usize> {
        let mut best = k_max + 1;
        self.visit(x, eps, 0, &mut best);
        (best <= k_max).then_some(best)
    }
}

/// Least `k <= k_max` such that some word of length `k` maps `x` within
/// `eps` of the set, or `None`.
///
/// The word tree is searched depth first in ascending index order. A branch
/// is cut when its point lies too far from the set to get within `eps` in
/// the remaining steps, using the Lipschitz bounds of the inverse maps; maps
/// without such a bound disable the cut.
///
/// For a contractive system every point eventually comes within any fixed
/// `eps` of the attractor, so `eps` and `k_max` have to be chosen together.
pub fn generation_forward(
    ifs: &IfsSystem,
    x: &Point,
    set: &dyn Membership,
    k_max: usize,
    eps: f64,
) -> Option<usize> {
    Search::new(ifs, set, k_max, eps, Tolerance::Image).run(x, eps, k_max)
}

/// Forward generations of the cell centres of a grid, in parallel.
///
/// Unlike [`generation_forward`], the tolerance is measured at the query
/// point: a centre `x` gets generation `k` when `w_θ(x)` lies within `eps`
/// times the accumulated local stretch of `w_θ`, i.e. when `x` is within
/// about `eps` of `w_θ⁻¹(A)` for some word of length `k`. With `eps` equal
/// to the cell size this marks roughly the cells meeting `W⁻ᵏ(A)`, which is
/// what [`super::fast_basin_inverse`] computes.
pub fn generation_forward_field(
    ifs: &IfsSystem,
    set: &dyn Membership,
    window: &Window,
    nx: usize,
    k_max: usize,
    eps: f64,
) -> Result<GenerationField> {
    check_cutoff(k_max)?;
    let grid = Grid::for_space(ifs.space(), window, nx)?;
    let search = Search::new(ifs, set, k_max, eps, Tolerance::Query);
    let gen = (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            search
                .run(&grid.center_point(idx), eps, k_max)
                .map_or(UNSET, |g| g as u8)
        })
        .collect();
    Ok(GenerationField {
        grid,
        gen,
        cutoff: k_max,
        eps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attractor::{compute_attractor, DEFAULT_MAX_ITERS};
    use crate::basin::{CellRaster, Interval};
    use crate::map::MapSpec;
    use crate::space::ModelSpace;

    fn sierpinski() -> IfsSystem {
        let m = |tx, ty| MapSpec::Affine2 {
            a: 0.5,
            b: 0.0,
            c: 0.0,
            d: 0.5,
            tx,
            ty,
        };
        IfsSystem::new(
            "sierpinski",
            ModelSpace::Plane2,
            vec![m(0.0, 0.0), m(0.5, 0.0), m(0.0, 0.5)],
        )
        .unwrap()
    }

    fn unit() -> Window {
        Window::new(0.0, 0.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn on_the_attractor_is_zero() {
        let ifs = sierpinski();
        let a = compute_attractor(&ifs, &unit(), 64, DEFAULT_MAX_ITERS).unwrap();
        assert_eq!(
            generation_forward(&ifs, &Point::plane(0.25, 0.25), &a.raster, 4, 0.0),
            Some(0)
        );
        assert_eq!(
            generation_forward(&ifs, &Point::plane(50.0, 50.0), &a.raster, 4, 1e-3),
            None
        );
    }

    #[test]
    fn float_moebius() {
        let ifs = IfsSystem::new(
            "moebius",
            ModelSpace::ExtendedLine,
            vec![
                MapSpec::Moebius1 {
                    p: 0.5,
                    q: 0.0,
                    r: 0.0,
                    s: 1.0,
                },
                MapSpec::Moebius1 {
                    p: 1.0,
                    q: 3.0,
                    r: -2.0,
                    s: 6.0,
                },
            ],
        )
        .unwrap();
        let a = Interval { lo: 0.0, hi: 1.0 };
        assert_eq!(
            generation_forward(&ifs, &Point::line(6.0), &a, 6, 0.0),
            Some(2)
        );
        assert_eq!(
            generation_forward(&ifs, &Point::line(0.5), &a, 6, 0.0),
            Some(0)
        );
    }

    #[test]
    fn pruning_does_not_change_results() {
        let ifs = sierpinski();
        let a = compute_attractor(&ifs, &unit(), 32, DEFAULT_MAX_ITERS).unwrap();
        struct NoBall<'a>(&'a CellRaster);
        impl Membership for NoBall<'_> {
            fn contains_within(&self, p: &Point, eps: f64) -> bool {
                self.0.within(p, eps)
            }
            fn bounding_ball(&self) -> Option<(Point, f64)> {
                None
            }
        }
        for k in 0..200 {
            let p = Point::plane(-3.0 + 0.037 * k as f64, 4.0 - 0.029 * k as f64);
            assert_eq!(
                generation_forward(&ifs, &p, &a.raster, 5, 0.01),
                generation_forward(&ifs, &p, &NoBall(&a.raster), 5, 0.01),
                "{p}"
            );
        }
    }

    #[test]
    fn query_tolerance_shrinks_with_depth() {
        let ifs = sierpinski();
        let a = compute_attractor(&ifs, &unit(), 64, DEFAULT_MAX_ITERS).unwrap();
        let w = Window::new(0.0, 0.0, 4.0, 4.0).unwrap();
        let eps = 1.0 / 16.0;
        let f = generation_forward_field(&ifs, &a.raster, &w, 64, 3, eps).unwrap();
        let mut later = 0;
        for idx in 0..f.grid().len() {
            let image = generation_forward(&ifs, &f.grid().center_point(idx), &a.raster, 3, eps);
            let query = f.gen_index(idx).map(usize::from);
            assert!(query.unwrap_or(4) >= image.unwrap_or(4));
            later += usize::from(query != image);
        }
        assert!(later > 0);
        let (i, j) = f.grid().cell_of(&Point::plane(0.2, 0.2)).unwrap();
        assert_eq!(f.gen(i, j), Some(0));
    }
}
