//! Attractors: cell-grid fixed points of the Hutchinson operator, the chaos
//! game, and an exact membership test for the right-angle Sierpinski gasket.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::basin::AttractorSet;
use crate::error::{Error, Result};
use crate::grid::{CellRaster, Grid, Window};
use crate::ifs::IfsSystem;
use crate::render::{transport_raster, Direction};
use crate::space::{ModelSpace, Point};

/// Default cap on Hutchinson iterations.
pub const DEFAULT_MAX_ITERS: usize = 1000;

/// Outer approximation of an attractor on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct AttractorApprox {
    pub raster: CellRaster,
    pub ifs_name: String,
    /// Hausdorff distance between the raster and its Hutchinson image on the
    /// same grid.
    pub self_consistency: f64,
}

impl AttractorApprox {
    pub fn grid(&self) -> &Grid {
        self.raster.grid()
    }
}

/// `W(S)` on the grid of `src`: union of the forward transports.
pub fn hutchinson_image(ifs: &IfsSystem, src: &CellRaster) -> Result<CellRaster> {
    let mut out = CellRaster::empty(*src.grid());
    for m in ifs.maps() {
        out.union_with(&transport_raster(m, Direction::Forward, src, src.grid())?)?;
    }
    Ok(out)
}

/// Iterates `S -> cells meeting W(S)` from the full window until the raster
/// stops changing, then drops the cells of the fixed point whose centre is
/// farther than half a cell diagonal from the attractor.
///
/// The maps must be contractive on the window (the halfsqrt family on the
/// strip qualifies) and the attractor must lie inside the window; the result
/// then contains the attractor.
pub fn compute_attractor(
    ifs: &IfsSystem,
    window: &Window,
    nx: usize,
    max_iters: usize,
) -> Result<AttractorApprox> {
    let grid = Grid::for_space(ifs.space(), window, nx)?;
    for (k, m) in ifs.maps().iter().enumerate() {
        let lip = m.forward_lipschitz(grid.window());
        if lip.is_nan() || lip >= 1.0 {
            return Err(Error::NotContractive {
                index: k + 1,
                lipschitz: lip,
            });
        }
    }
    let mut current = CellRaster::full(grid);
    for _ in 0..max_iters {
        let next = hutchinson_image(ifs, &current)?;
        if next == current {
            let raster = AttractorSet::new(ifs, &current).tightened();
            let self_consistency = raster.hausdorff(&hutchinson_image(ifs, &raster)?)?;
            return Ok(AttractorApprox {
                raster,
                ifs_name: ifs.name().to_string(),
                self_consistency,
            });
        }
        current = next;
    }
    Err(Error::DidNotStabilize(max_iters))
}

/// The attractor for computations on `window` with `nx` cells across.
///
/// When some map does not contract `window` (a Moebius pole inside it, say)
/// the raster is computed on a smaller window around a chaos-game sample
/// instead, made of whole cells of the same grid, so it resamples exactly.
pub fn attractor_for(ifs: &IfsSystem, window: &Window, nx: usize) -> Result<AttractorApprox> {
    match compute_attractor(ifs, window, nx, DEFAULT_MAX_ITERS) {
        Err(Error::NotContractive { .. }) => {}
        other => return other,
    }
    let grid = Grid::for_space(ifs.space(), window, nx)?;
    let h = grid.h();
    let pts: Vec<Point> = chaos_game(ifs, 20_000, 100, 0)?
        .into_iter()
        .filter(|p| !p.is_infinite())
        .collect();
    let span = |f: &dyn Fn(&Point) -> f64| {
        let lo = pts.iter().map(f).fold(f64::INFINITY, f64::min);
        let hi = pts.iter().map(f).fold(f64::NEG_INFINITY, f64::max);
        let pad = 0.1 * (hi - lo) + 2.0 * h;
        (lo - pad, hi + pad)
    };
    let w = grid.window();
    let cells = |(lo, hi): (f64, f64), origin: f64, n: usize| {
        let a = ((lo - origin) / h).floor().clamp(0.0, n as f64) as usize;
        let b = ((hi - origin) / h).ceil().clamp(0.0, n as f64) as usize;
        (a, b.max(a + 1).min(n))
    };
    let (i0, i1) = cells(span(&|p| p.x()), w.xmin, grid.nx());
    let (x0, x1) = (w.xmin + i0 as f64 * h, w.xmin + i1 as f64 * h);
    let sub = if grid.is_line() {
        Window::new(x0, 0.0, x1, 0.0)?
    } else {
        let (j0, j1) = cells(span(&|p| p.y()), w.ymin, grid.ny());
        Window::new(x0, w.ymin + j0 as f64 * h, x1, w.ymin + j1 as f64 * h)?
    };
    compute_attractor(ifs, &sub, i1 - i0, DEFAULT_MAX_ITERS)
}

fn start_point(space: ModelSpace) -> Point {
    match space {
        ModelSpace::ExtendedLine => Point::line(0.0),
        ModelSpace::Plane2 => Point::plane(0.0, 0.0),
        ModelSpace::ComplexPlane2 => Point::from_coords(&[0.0; 4]).unwrap(),
        ModelSpace::Strip2 => Point::plane(0.5, 1.0),
    }
}

/// Random-index orbit with uniform map choice. The index stream comes from a
/// ChaCha8 generator keyed by `seed`, so output is reproducible bit for bit.
pub fn chaos_game(
    ifs: &IfsSystem,
    n_points: usize,
    burn_in: usize,
    seed: u64,
) -> Result<Vec<Point>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = ifs.len();
    let mut x = start_point(ifs.space());
    let mut out = Vec::with_capacity(n_points);
    for step in 0..burn_in + n_points {
        let i = rng.gen_range(0..n);
        x = ifs.maps()[i].apply(&x)?;
        if step >= burn_in {
            out.push(x);
        }
    }
    Ok(out)
}

/// Membership of `(x, y)` in the right-angle Sierpinski gasket with vertices
/// `(0,0), (1,0), (0,1)`: true iff x and y have binary expansions with no
/// common 1 digit.
///
/// Every finite `f64` is a dyadic rational, and the digit peeling below
/// (doubling, subtracting one) is exact, so the answer is exact for the
/// given floating-point values.
pub fn gasket_member(x: f64, y: f64) -> bool {
    let (mut x, mut y) = (x, y);
    loop {
        if !(x >= 0.0 && y >= 0.0) || !sum_at_most(x, y, 1.0) {
            return false;
        }
        if x.fract() == 0.0 && y.fract() == 0.0 {
            // (0,0), (1,0) or (0,1)
            return true;
        }
        if sum_at_most(x, y, 0.5) {
            (x, y) = (2.0 * x, 2.0 * y);
        } else if x >= 0.5 {
            (x, y) = (2.0 * x - 1.0, 2.0 * y);
        } else if y >= 0.5 {
            (x, y) = (2.0 * x, 2.0 * y - 1.0);
        } else {
            // open middle triangle
            return false;
        }
    }
}

/// Exact `a + b <= c` via an error-free two-sum.
fn sum_at_most(a: f64, b: f64, c: f64) -> bool {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    s < c || (s == c && err <= 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::MapSpec;

    fn halving_line() -> IfsSystem {
        IfsSystem::new(
            "half",
            ModelSpace::ExtendedLine,
            vec![MapSpec::Moebius1 {
                p: 0.5,
                q: 0.0,
                r: 0.0,
                s: 1.0,
            }],
        )
        .unwrap()
    }

    #[test]
    fn gasket_examples() {
        assert!(gasket_member(0.5, 0.5));
        assert!(!gasket_member(0.4, 0.4));
        assert!(!gasket_member(0.5, 0.75));
        assert!(gasket_member(0.0, 0.0));
        assert!(gasket_member(1.0, 0.0));
        assert!(gasket_member(0.75, 0.25));
        assert!(!gasket_member(0.3, 0.3));
        assert!(gasket_member(1.0 / 1024.0, 1.0 / 1024.0));
        assert!(!gasket_member(-0.1, 0.0));
    }

    #[test]
    fn gasket_matches_digit_definition_on_dyadics() {
        // brute force over terminating expansions of length m and their
        // ...0111 alternatives
        let m = 6;
        let n = 1u32 << m;
        for a in 0..=n {
            for b in 0..=n {
                let expansions = |v: u32| -> Vec<Vec<u8>> {
                    // digits after the point, length m + 8, with the tail
                    let len = (m + 8) as usize;
                    let mut out = Vec::new();
                    if v == n {
                        out.push(vec![1; len]);
                        return out;
                    }
                    let mut d: Vec<u8> = (0..m).map(|k| ((v >> (m - 1 - k)) & 1) as u8).collect();
                    d.resize(len, 0);
                    out.push(d.clone());
                    if v > 0 {
                        let last = (0..m as usize).rev().find(|&k| d[k] == 1).unwrap();
                        let mut alt = d.clone();
                        alt[last] = 0;
                        for t in alt.iter_mut().skip(last + 1) {
                            *t = 1;
                        }
                        out.push(alt);
                    }
                    out
                };
                let want = expansions(a).iter().any(|ea| {
                    expansions(b)
                        .iter()
                        .any(|eb| ea.iter().zip(eb).all(|(p, q)| !(*p == 1 && *q == 1)))
                });
                let got = gasket_member(a as f64 / n as f64, b as f64 / n as f64);
                assert_eq!(got, want, "{a}/{n}, {b}/{n}");
            }
        }
    }

    #[test]
    fn single_contraction_on_the_line() {
        let w = Window::new(-1.0, 0.0, 1.0, 0.0).unwrap();
        let a = compute_attractor(&halving_line(), &w, 64, DEFAULT_MAX_ITERS).unwrap();
        let cells: Vec<usize> = a.raster.occupied().collect();
        assert_eq!(cells, vec![31, 32]);
        assert_eq!(a.self_consistency, 0.0);
    }

    #[test]
    fn chaos_game_single_map() {
        let pts = chaos_game(&halving_line(), 100, 64, 7).unwrap();
        assert_eq!(pts.len(), 100);
        assert!(pts.iter().all(|p| p.x().abs() < 1e-9));
    }

    #[test]
    fn chaos_game_reproducible() {
        let ifs = IfsSystem::new(
            "s",
            ModelSpace::Plane2,
            vec![
                MapSpec::Affine2 {
                    a: 0.5,
                    b: 0.0,
                    c: 0.0,
                    d: 0.5,
                    tx: 0.0,
                    ty: 0.0,
                },
                MapSpec::Affine2 {
                    a: 0.5,
                    b: 0.0,
                    c: 0.0,
                    d: 0.5,
                    tx: 0.5,
                    ty: 0.0,
                },
            ],
        )
        .unwrap();
        assert_eq!(
            chaos_game(&ifs, 50, 10, 3).unwrap(),
            chaos_game(&ifs, 50, 10, 3).unwrap()
        );
        assert_ne!(
            chaos_game(&ifs, 50, 10, 3).unwrap(),
            chaos_game(&ifs, 50, 10, 4).unwrap()
        );
    }

    #[test]
    fn not_contractive_rejected() {
        let ifs = IfsSystem::new("id", ModelSpace::Plane2, vec![MapSpec::identity2()]).unwrap();
        let w = Window::new(0.0, 0.0, 1.0, 1.0).unwrap();
        assert!(matches!(
            compute_attractor(&ifs, &w, 8, 10),
            Err(Error::NotContractive { index: 1, .. })
        ));
    }
}
