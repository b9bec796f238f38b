//! Model spaces and points.

use std::fmt;

use num_complex::Complex64;

/// The space an IFS acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelSpace {
    /// The real line with one point at infinity.
    ExtendedLine,
    /// The Euclidean plane.
    Plane2,
    /// Pairs of complex numbers, stored as four reals `(re z, im z, re w, im w)`.
    ComplexPlane2,
    /// The half strip `[0,1] x [1/2, inf)`.
    Strip2,
}

impl ModelSpace {
    pub fn dim(self) -> usize {
        match self {
            ModelSpace::ExtendedLine => 1,
            ModelSpace::Plane2 | ModelSpace::Strip2 => 2,
            ModelSpace::ComplexPlane2 => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ModelSpace::ExtendedLine => "line1ext",
            ModelSpace::Plane2 => "plane2",
            ModelSpace::ComplexPlane2 => "cplane2",
            ModelSpace::Strip2 => "strip2",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "line1ext" => ModelSpace::ExtendedLine,
            "plane2" => ModelSpace::Plane2,
            "cplane2" => ModelSpace::ComplexPlane2,
            "strip2" => ModelSpace::Strip2,
            _ => return None,
        })
    }

    /// Whether the finite point `p` belongs to this space.
    pub fn contains(self, p: &Point) -> bool {
        if p.dim() != self.dim() {
            return false;
        }
        if p.is_infinite() {
            return self == ModelSpace::ExtendedLine;
        }
        match self {
            ModelSpace::Strip2 => {
                let (x, y) = (p.x(), p.y());
                (0.0..=1.0).contains(&x) && y >= 0.5
            }
            _ => true,
        }
    }
}

/// A point of one of the model spaces.
///
/// Coordinates are finite unless the point is the point at infinity of the
/// extended line.
#[derive(Clone, Copy, PartialEq)]
pub struct Point {
    coords: [f64; 4],
    dim: u8,
    at_infinity: bool,
}

impl Point {
    pub fn line(x: f64) -> Self {
        Point {
            coords: [x, 0.0, 0.0, 0.0],
            dim: 1,
            at_infinity: false,
        }
    }

    pub fn infinity() -> Self {
        Point {
            coords: [0.0; 4],
            dim: 1,
            at_infinity: true,
        }
    }

    pub fn plane(x: f64, y: f64) -> Self {
        Point {
            coords: [x, y, 0.0, 0.0],
            dim: 2,
            at_infinity: false,
        }
    }

    pub fn complex_pair(z: Complex64, w: Complex64) -> Self {
        Point {
            coords: [z.re, z.im, w.re, w.im],
            dim: 4,
            at_infinity: false,
        }
    }

    /// Builds a point from a coordinate slice of length 1, 2 or 4.
    pub fn from_coords(c: &[f64]) -> Option<Self> {
        match c.len() {
            1 => Some(Point::line(c[0])),
            2 => Some(Point::plane(c[0], c[1])),
            4 => Some(Point::complex_pair(
                Complex64::new(c[0], c[1]),
                Complex64::new(c[2], c[3]),
            )),
            _ => None,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    pub fn is_infinite(&self) -> bool {
        self.at_infinity
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords[..self.dim()]
    }

    pub fn x(&self) -> f64 {
        self.coords[0]
    }

    pub fn y(&self) -> f64 {
        self.coords[1]
    }

    pub fn z(&self) -> Complex64 {
        Complex64::new(self.coords[0], self.coords[1])
    }

    pub fn w(&self) -> Complex64 {
        Complex64::new(self.coords[2], self.coords[3])
    }

    /// Euclidean distance. The point at infinity is at distance `+inf` from
    /// every finite point and at distance 0 from itself.
    pub fn distance(&self, other: &Point) -> f64 {
        match (self.at_infinity, other.at_infinity) {
            (true, true) => 0.0,
            (true, false) | (false, true) => f64::INFINITY,
            (false, false) => self
                .coords()
                .iter()
                .zip(other.coords())
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt(),
        }
    }

    /// Largest componentwise absolute difference; infinite if exactly one
    /// point is at infinity.
    pub fn max_abs_diff(&self, other: &Point) -> f64 {
        match (self.at_infinity, other.at_infinity) {
            (true, true) => 0.0,
            (true, false) | (false, true) => f64::INFINITY,
            (false, false) => self
                .coords()
                .iter()
                .zip(other.coords())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max),
        }
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.at_infinity {
            return write!(f, "(inf)");
        }
        write!(f, "(")?;
        for (i, c) in self.coords().iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}
