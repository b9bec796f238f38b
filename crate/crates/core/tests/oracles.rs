use std::path::Path;

use fastbasin::basin::{generation_forward_exact, Interval, Segment};
use fastbasin::render::{colorize, Palette, RgbImage};
use fastbasin::*;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

fn load(name: &str) -> IfsSystem {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("examples")
        .join(format!("{name}.ifs"));
    load_ifs(&path).unwrap()
}

/// Membership in the right-angle gasket by recursive halving. Doubling is
/// exact in binary floating point, so dyadic points are decided exactly.
fn in_gasket(x: f64, y: f64, depth: u32) -> bool {
    if x < 0.0 || y < 0.0 || x + y > 1.0 {
        return false;
    }
    if depth == 0 {
        return true;
    }
    (x <= 0.5 && y <= 0.5 && in_gasket(2.0 * x, 2.0 * y, depth - 1))
        || (x >= 0.5 && in_gasket(2.0 * x - 1.0, 2.0 * y, depth - 1))
        || (y >= 0.5 && in_gasket(2.0 * x, 2.0 * y - 1.0, depth - 1))
}

/// Least `k <= k_max` with `f_θ(p)` in the gasket for a word of length `k`.
fn gasket_generation(x: f64, y: f64, k_max: usize) -> Option<usize> {
    let mut level = vec![(x, y)];
    for k in 0..=k_max {
        if level.iter().any(|&(x, y)| in_gasket(x, y, 48)) {
            return Some(k);
        }
        level = level
            .iter()
            .flat_map(|&(x, y)| {
                [
                    (x / 2.0, y / 2.0),
                    (x / 2.0 + 0.5, y / 2.0),
                    (x / 2.0, y / 2.0 + 0.5),
                ]
            })
            .collect();
    }
    None
}

#[test]
fn gasket_oracle_agrees_with_library() {
    for (x, y) in [
        (0.25, 0.25),
        (0.75, 0.25),
        (0.375, 0.375),
        (0.5, 0.0),
        (0.3, 0.3),
        (0.6, 0.6),
    ] {
        assert_eq!(in_gasket(x, y, 48), gasket_member(x, y), "({x}, {y})");
    }
}

#[test]
fn point_outside_the_gasket_has_generation_one() {
    assert_eq!(gasket_generation(1.5, 0.5, 3), Some(1));
    let ifs = load("sierpinski");
    let w = Window::new(-1.0, -1.0, 3.0, 3.0).unwrap();
    let a = compute_attractor(&ifs, &w, 64, 100).unwrap();
    let field = fast_basin_inverse(&ifs, &a, &w, 64, 3).unwrap();
    let (i, j) = field.grid().cell_of(&Point::plane(1.5, 0.5)).unwrap();
    assert_eq!(field.gen(i, j), Some(1));
}

#[test]
fn inverse_generations_never_exceed_point_generations() {
    let ifs = load("sierpinski");
    let w = Window::new(-1.0, -1.0, 3.0, 3.0).unwrap();
    let a = compute_attractor(&ifs, &w, 64, 100).unwrap();
    let field = fast_basin_inverse(&ifs, &a, &w, 64, 3).unwrap();
    let mut checked = 0;
    for idx in 0..field.grid().len() {
        let c = field.grid().center_point(idx);
        if let Some(g) = gasket_generation(c.x(), c.y(), 3) {
            let got = field.gen_index(idx).map(usize::from);
            assert!(
                got.is_some_and(|k| k <= g),
                "cell {idx} at {c}: {got:?} > {g}"
            );
            checked += 1;
        }
    }
    assert!(checked > 100);
}

#[test]
fn doubled_twice_continuation_is_four_times_the_gasket() {
    let ifs = load("sierpinski");
    let w = Window::new(0.0, 0.0, 4.0, 4.0).unwrap();
    let a = compute_attractor(&ifs, &w, 128, 100).unwrap();
    let c = continuation(&ifs, &Word::new(vec![1, 1]), &a, &w, 128).unwrap();
    let grid = *c.grid();
    // a net of the gasket with spacing 1/256, scaled by four
    let mut net = vec![(0.0f64, 0.0f64)];
    for _ in 0..8 {
        net = net
            .iter()
            .flat_map(|&(x, y)| {
                [
                    (x / 2.0, y / 2.0),
                    (x / 2.0 + 0.5, y / 2.0),
                    (x / 2.0, y / 2.0 + 0.5),
                ]
            })
            .collect();
    }
    let mut scaled = CellRaster::empty(grid);
    for (x, y) in net {
        for p in [(x, y), (x + 1.0 / 256.0, y), (x, y + 1.0 / 256.0)] {
            if let Some((i, j)) = grid.cell_of(&Point::plane(4.0 * p.0, 4.0 * p.1)) {
                scaled.set(i, j, true);
            }
        }
    }
    assert!(scaled.is_subset_of(&c.stages[2].dilate(1)));
    assert!(c.stages[2].is_subset_of(&scaled.dilate(1)));
}

fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// `(p x + q) / (r x + s)` with `None` for infinity.
fn moebius(c: [i64; 4], x: &Option<BigRational>) -> Option<BigRational> {
    let [p, q, r, s] = c.map(|v| ratio(v, 1));
    match x {
        None => (!r.is_zero()).then(|| p / r),
        Some(x) => {
            let den = r * x + s;
            (!den.is_zero()).then(|| (p * x + q) / den)
        }
    }
}

#[test]
fn moebius_six_reaches_the_interval_in_two_steps() {
    // x/2 written as (x + 0)/(0 x + 2), and (x + 3)/(-2x + 6)
    let maps = [[1, 0, 0, 2], [1, 3, -2, 6]];
    let inside = |v: &Option<BigRational>| {
        v.as_ref()
            .is_some_and(|v| *v >= BigRational::zero() && *v <= BigRational::one())
    };
    let mut level = vec![Some(ratio(6, 1))];
    let mut found = None;
    for k in 0..=2 {
        if level.iter().any(inside) {
            found = Some(k);
            break;
        }
        level = level
            .iter()
            .flat_map(|x| maps.map(|m| moebius(m, x)))
            .collect();
    }
    assert_eq!(found, Some(2));
    assert_eq!(
        moebius(maps[1], &moebius(maps[1], &Some(ratio(6, 1)))),
        Some(ratio(1, 6))
    );

    let ifs = load("moebius1d");
    let exact =
        generation_forward_exact(&ifs, &Some(ratio(6, 1)), &ratio(0, 1), &ratio(1, 1), 6).unwrap();
    assert_eq!(exact, found);
    let float = generation_forward(
        &ifs,
        &Point::line(6.0),
        &Interval { lo: 0.0, hi: 1.0 },
        6,
        0.0,
    );
    assert_eq!(float, found);
}

/// Largest and smallest singular values of a 2x2 matrix from the
/// eigenvalues of its Gram matrix.
fn singular_values(a: f64, b: f64, c: f64, d: f64) -> (f64, f64) {
    let (p, q, r) = (a * a + c * c, a * b + c * d, b * b + d * d);
    let mean = (p + r) / 2.0;
    let spread = (((p - r) / 2.0).powi(2) + q * q).sqrt();
    ((mean + spread).sqrt(), (mean - spread).max(0.0).sqrt())
}

#[test]
fn expansion_factors_from_singular_values() {
    let unit = Window::new(0.0, 0.0, 1.0, 1.0).unwrap();
    for (name, expected) in [("ifs01", 2.0), ("kigami", 1.0 / 0.6)] {
        let ifs = load(name);
        let MapSpec::Affine2 { a, b, c, d, .. } = ifs.maps()[0] else {
            panic!("affine")
        };
        let (smax, smin) = singular_values(a, b, c, d);
        let l = ifs.maps()[0].inverse_expansivity(&unit).unwrap();
        assert!((1.0 / smax - expected).abs() < 1e-12, "{name}: {smax}");
        assert!((l - expected).abs() < 1e-12, "{name}: {l}");
        let (lib_max, lib_min) = ifs.maps()[0].singular_values().unwrap();
        assert!((lib_max - smax).abs() < 1e-12 && (lib_min - smin).abs() < 1e-12);
    }
}

#[test]
fn halfsqrt_forward_generations() {
    let ifs = load("halfsqrt");
    let segment = Segment {
        x0: 0.0,
        x1: 1.0,
        y: 1.0,
    };
    let p = Point::plane(0.5, 2.0);
    assert_eq!(generation_forward(&ifs, &p, &segment, 12, 0.0), None);
    // with eps = h the search stops at the first k with 2^(2^-k) - 1 <= h
    let h = 1.0 / 512.0;
    let k = (0..=12)
        .find(|&k| 2f64.powf(0.5f64.powi(k)) - 1.0 <= h)
        .map(|k| k as usize);
    assert_eq!(k, Some(9));
    assert_eq!(generation_forward(&ifs, &p, &segment, 12, h), k);
}

#[test]
fn moebius_basin_is_left_of_three_halves() {
    let ifs = load("moebius1d");
    let w = *ifs.window().unwrap();
    let a = attractor_for(&ifs, &w, 512).unwrap();
    let h = Grid::for_space(ifs.space(), &w, 512).unwrap().h();
    let est = basin_estimate(&ifs, &a, &w, 512, 40, h).unwrap();
    for idx in 0..est.grid().len() {
        let x = est.grid().center_point(idx).x();
        if x < 1.5 - h {
            assert!(est.get_index(idx), "x = {x} should be marked");
        } else if x > 1.5 + h {
            assert!(!est.get_index(idx), "x = {x} should not be marked");
        }
    }
    let (i, _) = est.grid().cell_of(&Point::line(1.6)).unwrap();
    assert!(!est.get(i, 0));
}

/// Header fields and pixel bytes of a binary PPM.
fn read_ppm(bytes: &[u8]) -> (usize, usize, usize, &[u8]) {
    let mut fields = Vec::new();
    let mut pos = 0;
    while fields.len() < 4 {
        while bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        fields.push(std::str::from_utf8(&bytes[start..pos]).unwrap().to_string());
    }
    assert_eq!(fields[0], "P6");
    let num = |k: usize| fields[k].parse::<usize>().unwrap();
    (num(1), num(2), num(3), &bytes[pos + 1..])
}

#[test]
fn background_images() {
    let grid = Grid::new(Window::new(0.0, 0.0, 1.0, 1.0).unwrap(), 8).unwrap();
    let img = colorize(&GenerationField::unset(grid, 4, 0.0), &Palette::default());
    assert!(img.data().chunks_exact(3).all(|p| p == [255, 255, 255]));

    let one = RgbImage::new(1, 1, [255, 255, 255]);
    let bytes = one.to_ppm();
    let (w, h, max, pixels) = read_ppm(&bytes);
    assert_eq!((w, h, max), (1, 1, 255));
    assert_eq!(pixels, &[255, 255, 255]);
}
