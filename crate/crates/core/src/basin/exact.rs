//! Exact rational arithmetic for Moebius systems on the extended line.

use std::collections::BTreeSet;

use num_rational::BigRational;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::ifs::IfsSystem;
use crate::map::MapSpec;
use crate::space::ModelSpace;

/// A point of the extended rational line; `None` is the point at infinity.
pub type ExtRational = Option<BigRational>;

/// `x -> (p x + q) / (r x + s)` with rational coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalMoebius {
    pub p: BigRational,
    pub q: BigRational,
    pub r: BigRational,
    pub s: BigRational,
}

impl RationalMoebius {
    /// The exact value of a floating-point Moebius map.
    pub fn from_map(map: &MapSpec) -> Result<Self> {
        let MapSpec::Moebius1 { p, q, r, s } = *map else {
            return Err(Error::UnsupportedSpace(
                "exact arithmetic needs moebius1 maps",
            ));
        };
        let conv = |v: f64| {
            BigRational::from_float(v).ok_or_else(|| Error::Geometry(format!("non-finite {v}")))
        };
        Ok(RationalMoebius {
            p: conv(p)?,
            q: conv(q)?,
            r: conv(r)?,
            s: conv(s)?,
        })
    }

    pub fn apply(&self, x: &ExtRational) -> ExtRational {
        match x {
            None => {
                // limit at infinity is p / r
                if self.r.is_zero() {
                    None
                } else {
                    Some(&self.p / &self.r)
                }
            }
            Some(x) => {
                let den = &self.r * x + &self.s;
                if den.is_zero() {
                    None
                } else {
                    Some((&self.p * x + &self.q) / den)
                }
            }
        }
    }
}

/// Least `k <= k_max` such that some word of length `k` maps `x` into the
/// closed interval `[lo, hi]`, computed without rounding. Orbit points are
/// deduplicated level by level.
pub fn generation_forward_exact(
    ifs: &IfsSystem,
    x: &ExtRational,
    lo: &BigRational,
    hi: &BigRational,
    k_max: usize,
) -> Result<Option<usize>> {
    if ifs.space() != ModelSpace::ExtendedLine {
        return Err(Error::UnsupportedSpace(ifs.space().name()));
    }
    let maps = ifs
        .maps()
        .iter()
        .map(RationalMoebius::from_map)
        .collect::<Result<Vec<_>>>()?;
    let inside = |v: &ExtRational| v.as_ref().is_some_and(|v| v >= lo && v <= hi);
    let mut level: BTreeSet<ExtRational> = BTreeSet::from([x.clone()]);
    for k in 0..=k_max {
        if level.iter().any(inside) {
            return Ok(Some(k));
        }
        level = level
            .iter()
            .flat_map(|y| maps.iter().map(move |m| m.apply(y)))
            .collect();
    }
    Ok(None)
}
