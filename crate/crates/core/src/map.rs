//! The map families an IFS can be built from.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::Window;
use crate::space::{ModelSpace, Point};

/// One map of an IFS.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MapSpec {
    /// `(x, y) -> (a x + b y + tx, c x + d y + ty)`.
    Affine2 {
        a: f64,
        b: f64,
        c: f64,
        d: f64,
        tx: f64,
        ty: f64,
    },
    /// `x -> (p x + q) / (r x + s)` on the extended line.
    Moebius1 { p: f64, q: f64, r: f64, s: f64 },
    /// `(z, w) -> (m11 z + t1, m21 z + m22 w + t2)`.
    ComplexAffine2 {
        m11: Complex64,
        m21: Complex64,
        m22: Complex64,
        t1: Complex64,
        t2: Complex64,
    },
    /// `(x, y) -> (x/2 + tx, sqrt(y))` on the strip. Only a homeomorphism onto
    /// its image.
    HalfSqrt { tx: f64 },
}

impl MapSpec {
    pub fn identity2() -> Self {
        MapSpec::Affine2 {
            a: 1.0,
            b: 0.0,
            c: 0.0,
            d: 1.0,
            tx: 0.0,
            ty: 0.0,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            MapSpec::Affine2 { .. } => "affine2",
            MapSpec::Moebius1 { .. } => "moebius1",
            MapSpec::ComplexAffine2 { .. } => "caffine2",
            MapSpec::HalfSqrt { .. } => "halfsqrt",
        }
    }

    pub fn space(&self) -> ModelSpace {
        match self {
            MapSpec::Affine2 { .. } => ModelSpace::Plane2,
            MapSpec::Moebius1 { .. } => ModelSpace::ExtendedLine,
            MapSpec::ComplexAffine2 { .. } => ModelSpace::ComplexPlane2,
            MapSpec::HalfSqrt { .. } => ModelSpace::Strip2,
        }
    }

    /// Total maps are bijections of their whole space.
    pub fn is_total(&self) -> bool {
        !matches!(self, MapSpec::HalfSqrt { .. })
    }

    /// Checks the non-degeneracy condition of the family.
    pub fn validate(&self) -> std::result::Result<(), String> {
        match *self {
            MapSpec::Affine2 { a, b, c, d, tx, ty } => {
                if ![a, b, c, d, tx, ty].iter().all(|v| v.is_finite()) {
                    return Err("non-finite coefficient".into());
                }
                if (a * d - b * c).abs() <= 0.0 {
                    return Err("ad - bc = 0".into());
                }
            }
            MapSpec::Moebius1 { p, q, r, s } => {
                if ![p, q, r, s].iter().all(|v| v.is_finite()) {
                    return Err("non-finite coefficient".into());
                }
                if (p * s - q * r).abs() <= 0.0 {
                    return Err("ps - qr = 0".into());
                }
            }
            MapSpec::ComplexAffine2 {
                m11,
                m21,
                m22,
                t1,
                t2,
            } => {
                if ![m11, m21, m22, t1, t2].iter().all(|v| v.is_finite()) {
                    return Err("non-finite coefficient".into());
                }
                if m11 == Complex64::new(0.0, 0.0) || m22 == Complex64::new(0.0, 0.0) {
                    return Err("m11 and m22 must be nonzero".into());
                }
            }
            MapSpec::HalfSqrt { tx } => {
                if tx != 0.0 && tx != 0.5 {
                    return Err("halfsqrt offset must be 0 or 0.5".into());
                }
            }
        }
        Ok(())
    }

    /// Evaluates the map at `x`.
    pub fn apply(&self, x: &Point) -> Result<Point> {
        match *self {
            MapSpec::Affine2 { a, b, c, d, tx, ty } => {
                let (u, v) = (x.x(), x.y());
                Ok(Point::plane(a * u + b * v + tx, c * u + d * v + ty))
            }
            MapSpec::Moebius1 { p, q, r, s } => Ok(moebius_eval(p, q, r, s, x)),
            MapSpec::ComplexAffine2 {
                m11,
                m21,
                m22,
                t1,
                t2,
            } => {
                let (z, w) = (x.z(), x.w());
                Ok(Point::complex_pair(m11 * z + t1, m21 * z + m22 * w + t2))
            }
            MapSpec::HalfSqrt { tx } => {
                if !ModelSpace::Strip2.contains(x) {
                    return Err(Error::OutsideDomain(x.to_string()));
                }
                Ok(Point::plane(x.x() / 2.0 + tx, x.y().sqrt()))
            }
        }
    }

    /// Evaluates the inverse map at `y`.
    pub fn apply_inverse(&self, y: &Point) -> Result<Point> {
        match *self {
            MapSpec::HalfSqrt { tx } => {
                let (u, v) = (y.x(), y.y());
                let in_image = y.dim() == 2
                    && (tx..=tx + 0.5).contains(&u)
                    && v >= std::f64::consts::FRAC_1_SQRT_2;
                if !in_image {
                    return Err(Error::OutsideImage(y.to_string()));
                }
                Ok(Point::plane(2.0 * (u - tx), v * v))
            }
            _ => self.inverse()?.apply(y),
        }
    }

    /// The inverse map as a map of the same family.
    pub fn inverse(&self) -> Result<MapSpec> {
        Ok(match *self {
            MapSpec::Affine2 { a, b, c, d, tx, ty } => {
                let det = a * d - b * c;
                let (ia, ib, ic, id) = (d / det, -b / det, -c / det, a / det);
                MapSpec::Affine2 {
                    a: ia,
                    b: ib,
                    c: ic,
                    d: id,
                    tx: -(ia * tx + ib * ty),
                    ty: -(ic * tx + id * ty),
                }
            }
            MapSpec::Moebius1 { p, q, r, s } => MapSpec::Moebius1 {
                p: s,
                q: -q,
                r: -r,
                s: p,
            },
            MapSpec::ComplexAffine2 {
                m11,
                m21,
                m22,
                t1,
                t2,
            } => {
                let i11 = m11.inv();
                let i22 = m22.inv();
                let i21 = -m21 * i11 * i22;
                MapSpec::ComplexAffine2 {
                    m11: i11,
                    m21: i21,
                    m22: i22,
                    t1: -t1 * i11,
                    t2: -(i21 * t1 + i22 * t2),
                }
            }
            MapSpec::HalfSqrt { .. } => return Err(Error::PartialMapsUnsupported),
        })
    }

    /// `self ∘ inner`, i.e. `inner` is applied first.
    pub fn compose(&self, inner: &MapSpec) -> Result<MapSpec> {
        Ok(match (*self, *inner) {
            (
                MapSpec::Affine2 { a, b, c, d, tx, ty },
                MapSpec::Affine2 {
                    a: a2,
                    b: b2,
                    c: c2,
                    d: d2,
                    tx: tx2,
                    ty: ty2,
                },
            ) => MapSpec::Affine2 {
                a: a * a2 + b * c2,
                b: a * b2 + b * d2,
                c: c * a2 + d * c2,
                d: c * b2 + d * d2,
                tx: a * tx2 + b * ty2 + tx,
                ty: c * tx2 + d * ty2 + ty,
            },
            (
                MapSpec::Moebius1 { p, q, r, s },
                MapSpec::Moebius1 {
                    p: p2,
                    q: q2,
                    r: r2,
                    s: s2,
                },
            ) => MapSpec::Moebius1 {
                p: p * p2 + q * r2,
                q: p * q2 + q * s2,
                r: r * p2 + s * r2,
                s: r * q2 + s * s2,
            },
            (
                MapSpec::ComplexAffine2 {
                    m11,
                    m21,
                    m22,
                    t1,
                    t2,
                },
                MapSpec::ComplexAffine2 {
                    m11: n11,
                    m21: n21,
                    m22: n22,
                    t1: u1,
                    t2: u2,
                },
            ) => MapSpec::ComplexAffine2 {
                m11: m11 * n11,
                m21: m21 * n11 + m22 * n21,
                m22: m22 * n22,
                t1: m11 * u1 + t1,
                t2: m21 * u1 + m22 * u2 + t2,
            },
            (MapSpec::HalfSqrt { .. }, _) | (_, MapSpec::HalfSqrt { .. }) => {
                return Err(Error::PartialMapsUnsupported)
            }
            (outer, inner) => {
                return Err(Error::Format(format!(
                    "cannot compose {} with {}",
                    outer.kind(),
                    inner.kind()
                )))
            }
        })
    }

    /// Singular values `(largest, smallest)` of the linear part, for the
    /// affine families.
    pub fn singular_values(&self) -> Option<(f64, f64)> {
        let (t, det) = match *self {
            MapSpec::Affine2 { a, b, c, d, .. } => {
                (a * a + b * b + c * c + d * d, (a * d - b * c).abs())
            }
            MapSpec::ComplexAffine2 { m11, m21, m22, .. } => (
                m11.norm_sqr() + m21.norm_sqr() + m22.norm_sqr(),
                (m11 * m22).norm(),
            ),
            _ => return None,
        };
        let disc = (t * t - 4.0 * det * det).max(0.0).sqrt();
        let smax = ((t + disc) / 2.0).sqrt();
        Some((smax, det / smax))
    }

    /// Forward Lipschitz constant on `window` (the y range is ignored on the
    /// extended line). Infinite when a Moebius pole lies in the window.
    pub fn forward_lipschitz(&self, window: &Window) -> f64 {
        match *self {
            MapSpec::Affine2 { .. } | MapSpec::ComplexAffine2 { .. } => {
                self.singular_values().map(|s| s.0).unwrap_or(f64::INFINITY)
            }
            MapSpec::Moebius1 { p, q, r, s } => {
                let det = (p * s - q * r).abs();
                det / min_abs_linear(r, s, window.xmin, window.xmax).powi(2)
            }
            MapSpec::HalfSqrt { .. } => {
                let ymin = window.ymin.max(0.5);
                (0.5f64).max(0.5 / ymin.sqrt())
            }
        }
    }

    /// Smallest stretch of the derivative at `x`: the least singular value of
    /// the Jacobian, or `|w'(x)|` on the line.
    pub fn local_scale(&self, x: &Point) -> f64 {
        match *self {
            MapSpec::Affine2 { .. } | MapSpec::ComplexAffine2 { .. } => {
                self.singular_values().map(|s| s.1).unwrap_or(0.0)
            }
            MapSpec::Moebius1 { p, q, r, s } => {
                if x.is_infinite() {
                    return 0.0;
                }
                let den = r * x.x() + s;
                (p * s - q * r).abs() / (den * den)
            }
            MapSpec::HalfSqrt { .. } => (0.5f64).min(0.5 / x.y().max(0.0).sqrt()),
        }
    }

    /// Lipschitz constant of the inverse on the image of `window` (the y
    /// range is ignored on the extended line).
    pub fn inverse_lipschitz_on(&self, window: &Window) -> f64 {
        match *self {
            MapSpec::Affine2 { .. } | MapSpec::ComplexAffine2 { .. } => {
                self.singular_values().map_or(f64::INFINITY, |s| 1.0 / s.1)
            }
            MapSpec::Moebius1 { p, q, r, s } => {
                let far = (r * window.xmin + s).abs().max((r * window.xmax + s).abs());
                far * far / (p * s - q * r).abs()
            }
            MapSpec::HalfSqrt { .. } => 2.0f64.max(2.0 * window.ymax.max(0.0).sqrt()),
        }
    }

    /// Upper bound on the Lipschitz constant of the inverse over the whole
    /// space, if one exists.
    pub fn inverse_lipschitz_bound(&self) -> Option<f64> {
        match self {
            MapSpec::Affine2 { .. } | MapSpec::ComplexAffine2 { .. } => {
                self.singular_values().map(|s| 1.0 / s.1)
            }
            MapSpec::Moebius1 { r, .. } if *r == 0.0 => {
                let MapSpec::Moebius1 { p, s, .. } = *self else {
                    unreachable!()
                };
                Some((s / p).abs())
            }
            _ => None,
        }
    }

    /// Largest `L` with `d(w⁻¹(y1), w⁻¹(y2)) >= L d(y1, y2)` for `y1, y2` in
    /// `region`. The region only matters for Moebius maps, where the bound is
    /// the smallest derivative of the inverse over the x range of the region.
    pub fn inverse_expansivity(&self, region: &Window) -> Result<f64> {
        match *self {
            MapSpec::Affine2 { .. } | MapSpec::ComplexAffine2 { .. } => {
                Ok(1.0 / self.singular_values().expect("affine").0)
            }
            MapSpec::Moebius1 { p, q, r, s } => {
                // (w⁻¹)'(y) = (ps - qr) / (p - r y)^2; |p - r y| is convex so
                // its maximum sits at an endpoint.
                let det = (p * s - q * r).abs();
                let far = (p - r * region.xmin).abs().max((p - r * region.xmax).abs());
                Ok(det / (far * far))
            }
            MapSpec::HalfSqrt { .. } => Err(Error::PartialMapsUnsupported),
        }
    }

    /// Like [`MapSpec::inverse_expansivity`] but fails with `NotExpansive`
    /// unless `L > 1`.
    pub fn require_inverse_expansive(&self, region: &Window) -> Result<f64> {
        let l = self.inverse_expansivity(region)?;
        if l <= 1.0 {
            return Err(Error::NotExpansive(l));
        }
        Ok(l)
    }
}

fn moebius_eval(p: f64, q: f64, r: f64, s: f64, x: &Point) -> Point {
    if x.is_infinite() {
        return if r == 0.0 {
            Point::infinity()
        } else {
            Point::line(p / r)
        };
    }
    let den = r * x.x() + s;
    if den == 0.0 {
        Point::infinity()
    } else {
        Point::line((p * x.x() + q) / den)
    }
}

/// Smallest `|r x + s|` over `x in [lo, hi]`.
fn min_abs_linear(r: f64, s: f64, lo: f64, hi: f64) -> f64 {
    let (a, b) = (r * lo + s, r * hi + s);
    if a.signum() != b.signum() || a == 0.0 || b == 0.0 {
        0.0
    } else {
        a.abs().min(b.abs())
    }
}
