use std::path::Path;

use fastbasin::analysis::criterion_check;
use fastbasin::basin::{generation_forward_exact, ExtRational, RationalMoebius};
use fastbasin::render::{transport_raster, Direction};
use fastbasin::*;
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

fn load(name: &str) -> IfsSystem {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("examples")
        .join(format!("{name}.ifs"));
    load_ifs(&path).unwrap()
}

fn affine() -> impl Strategy<Value = MapSpec> {
    (
        -2.0..2.0f64,
        -2.0..2.0f64,
        -2.0..2.0f64,
        -2.0..2.0f64,
        -5.0..5.0f64,
        -5.0..5.0f64,
    )
        .prop_filter("well conditioned", |(a, b, c, d, _, _)| {
            (a * d - b * c).abs() > 0.05
        })
        .prop_map(|(a, b, c, d, tx, ty)| MapSpec::Affine2 { a, b, c, d, tx, ty })
}

fn moebius() -> impl Strategy<Value = MapSpec> {
    (-3.0..3.0f64, -3.0..3.0f64, -3.0..3.0f64, -3.0..3.0f64)
        .prop_filter("well conditioned", |(p, q, r, s)| {
            (p * s - q * r).abs() > 0.05
        })
        .prop_map(|(p, q, r, s)| MapSpec::Moebius1 { p, q, r, s })
}

fn close(a: &Point, b: &Point) -> bool {
    let scale = a.coords().iter().fold(1.0f64, |m, v| m.max(v.abs()));
    a.max_abs_diff(b) <= 1e-9 * scale
}

fn word(n: usize, max_len: usize) -> impl Strategy<Value = Word> {
    prop::collection::vec(1..=n, 0..=max_len).prop_map(Word::new)
}

/// A window containing the unit square, with a lower-left corner on a
/// sixteenth-cell lattice so that grids of 64 cells vary in alignment.
fn window_around_unit() -> impl Strategy<Value = Window> {
    (0u32..32, 0u32..32, 0u32..16).prop_map(|(x, y, s)| {
        let (x0, y0) = (-(x as f64) / 16.0, -(y as f64) / 16.0);
        let side = 1.0 + (x.max(y) + s) as f64 / 16.0;
        Window::new(x0, y0, x0 + side, y0 + side).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn affine_round_trip(m in affine(), x in -10.0..10.0f64, y in -10.0..10.0f64) {
        let p = Point::plane(x, y);
        prop_assert!(close(&m.apply_inverse(&m.apply(&p).unwrap()).unwrap(), &p));
        prop_assert!(close(&m.apply(&m.apply_inverse(&p).unwrap()).unwrap(), &p));
    }

    #[test]
    fn moebius_round_trip(m in moebius(), x in -10.0..10.0f64) {
        let p = Point::line(x);
        let back = m.apply_inverse(&m.apply(&p).unwrap()).unwrap();
        prop_assert!(back.is_infinite() || close(&back, &p), "{p} -> {back}");
    }

    #[test]
    fn word_composition(u in word(3, 4), v in word(3, 4), x in -4.0..4.0f64, y in -4.0..4.0f64) {
        let ifs = load("kigami");
        let p = Point::plane(x, y);
        let joint = ifs.apply_word(&u.concat(&v), &p).unwrap();
        let nested = ifs.apply_word(&u, &ifs.apply_word(&v, &p).unwrap()).unwrap();
        prop_assert_eq!(joint, nested);
    }

    #[test]
    fn inverse_maps_double_distances(
        i in 0usize..3,
        a in (-20.0..20.0f64, -20.0..20.0f64),
        b in (-20.0..20.0f64, -20.0..20.0f64),
    ) {
        let ifs = load("ifs01");
        let (p, q) = (Point::plane(a.0, a.1), Point::plane(b.0, b.1));
        let m = &ifs.maps()[i];
        let d = m.apply_inverse(&p).unwrap().distance(&m.apply_inverse(&q).unwrap());
        prop_assert!(d >= 2.0 * p.distance(&q) - 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn level_sets_and_containment_chain(w in window_around_unit(), k in 1usize..4) {
        let ifs = load("sierpinski");
        let a = attractor_for(&ifs, &w, 64).unwrap();
        let field = fast_basin_inverse(&ifs, &a, &w, 64, k).unwrap();
        prop_assert_eq!(&field.level_set(0), &a.raster);
        for j in 0..k {
            prop_assert!(field.level_set(j).is_subset_of(&field.level_set(j + 1)));
        }
        let slow = slow_basin(&ifs, &a, 2.0 * a.raster.h(), &w, 64, k).unwrap();
        prop_assert!(field.level_set(k).is_subset_of(&slow));
    }

    #[test]
    fn continuation_stages_nest(prefix in prop::collection::vec(1usize..=3, 4)) {
        let ifs = load("ifs01");
        let w = *ifs.window().unwrap();
        let a = attractor_for(&ifs, &w, 128).unwrap();
        let c = continuation(&ifs, &Word::new(prefix), &a, &w, 128).unwrap();
        prop_assert_eq!(c.stages.len(), 5);
        prop_assert_eq!(&c.stages[0], &a.raster);
        for k in 0..4 {
            prop_assert!(c.stages[k].is_subset_of(&c.stages[k + 1].dilate(1)));
        }
    }

    #[test]
    fn transport_is_monotone(seed in any::<u64>(), i in 0usize..3) {
        let ifs = load("kigami");
        let grid = Grid::new(Window::new(-1.0, -1.0, 2.0, 2.0).unwrap(), 64).unwrap();
        let mut state = seed | 1;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        let big = CellRaster::from_fn(grid, |_, _| next() % 3 != 0);
        let small = CellRaster::from_fn(grid, |i, j| big.get(i, j) && next() % 2 == 0);
        let m = &ifs.maps()[i];
        for dir in [Direction::Forward, Direction::Inverse] {
            let lo = transport_raster(m, dir, &small, &grid).unwrap();
            let hi = transport_raster(m, dir, &big, &grid).unwrap();
            prop_assert!(lo.is_subset_of(&hi));
        }
    }

    #[test]
    fn fbg1_round_trip(bits in prop::collection::vec(0u8..=6, 64 * 64), k in 0usize..6) {
        let grid = Grid::new(Window::new(-1.0, -2.0, 3.0, 2.0).unwrap(), 64).unwrap();
        let mut field = GenerationField::unset(grid, k, 0.0);
        for (idx, &g) in bits.iter().enumerate() {
            field.set_index(idx, (g as usize <= k).then_some(g));
        }
        let back = GenerationField::from_fbg1(&field.to_fbg1()).unwrap();
        prop_assert_eq!(back.grid(), field.grid());
        prop_assert_eq!(back.cutoff(), field.cutoff());
        for idx in 0..grid.len() {
            prop_assert_eq!(back.gen_index(idx), field.gen_index(idx));
        }
    }
}

fn moebius_system() -> IfsSystem {
    load("moebius1d")
}

fn rational(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bellman_consistency_exact(n in -64i64..64, d in 1i64..16) {
        let ifs = moebius_system();
        let (lo, hi) = (rational(0, 1), rational(1, 1));
        let k_max = 8;
        let x: ExtRational = Some(rational(n, d));
        let g = generation_forward_exact(&ifs, &x, &lo, &hi, k_max).unwrap();
        if let Some(g) = g.filter(|&g| g >= 1) {
            let maps: Vec<RationalMoebius> = ifs.maps().iter().map(|m| RationalMoebius::from_map(m).unwrap()).collect();
            let best = maps
                .iter()
                .filter_map(|m| generation_forward_exact(&ifs, &m.apply(&x), &lo, &hi, k_max - 1).unwrap())
                .min();
            prop_assert_eq!(Some(g), best.map(|b| b + 1));
        }
    }

    #[test]
    fn bellman_consistency_on_the_raster(x in -3.0..4.0f64, y in -3.0..4.0f64) {
        let ifs = load("sierpinski");
        let a = compute_attractor(&ifs, &Window::new(-1.0, -1.0, 3.0, 3.0).unwrap(), 128, 100).unwrap();
        let set = AttractorSet::new(&ifs, &a.raster);
        let eps = a.raster.h();
        let p = Point::plane(x, y);
        if let Some(g) = generation_forward(&ifs, &p, &set, 5, eps).filter(|&g| g >= 1) {
            let best = ifs
                .maps()
                .iter()
                .filter_map(|m| generation_forward(&ifs, &m.apply(&p).unwrap(), &set, 5, eps))
                .min()
                .unwrap();
            prop_assert!((g as i64 - 1 - best as i64).abs() <= 1, "g {g}, successors {best}");
        }
    }
}

#[test]
fn constant_word_continuations_lie_in_the_fast_basin() {
    let ifs = load("ifs01");
    let w = *ifs.window().unwrap();
    let a = attractor_for(&ifs, &w, 128).unwrap();
    let k = 3;
    let basin = fast_basin_inverse(&ifs, &a, &w, 128, k)
        .unwrap()
        .level_set(k)
        .dilate(1);
    for i in 1..=ifs.len() {
        let c = continuation(&ifs, &Word::new(vec![i; k]), &a, &w, 128).unwrap();
        assert!(c.last().is_subset_of(&basin), "constant word {i}");
    }
}

#[test]
fn restricted_alphabet_of_moving_maps() {
    let ifs = load("sierpinski");
    let w = *ifs.window().unwrap();
    let a = attractor_for(&ifs, &w, 128).unwrap();
    let moving = criterion_check(&ifs, &a, 3.0 * a.raster.h())
        .unwrap()
        .indices;
    assert_eq!(moving, vec![1, 2, 3]);
    let full = fast_basin_inverse(&ifs, &a, &w, 128, 3)
        .unwrap()
        .level_set(3);
    let mut restricted = fast_basin_inverse_over(&ifs, &moving, &a, &w, 128, 3)
        .unwrap()
        .level_set(3);
    restricted.union_with(&a.raster).unwrap();
    assert!(restricted.is_subset_of(&full.dilate(1)));
    assert!(full.is_subset_of(&restricted.dilate(1)));
}
