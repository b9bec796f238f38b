//! Line-based IFS configuration files.
//!
//! ```text
//! # comment
//! space plane2            # plane2 | line1ext | cplane2 | strip2, default plane2
//! name sierpinski
//! window 0 0 1 1          # xmin ymin xmax ymax
//! map affine2 0.5 0 0 0.5 0 0
//! ```
//!
//! Map lines: `map affine2 a b c d tx ty`, `map moebius1 p q r s`,
//! `map caffine2 re11 im11 re21 im21 re22 im22 ret1 imt1 ret2 imt2`,
//! `map halfsqrt tx`. Map order defines the indices `1..=N`.

use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::Window;
use crate::ifs::{IfsSystem, MAX_MAPS};
use crate::map::MapSpec;
use crate::space::ModelSpace;

pub fn parse_ifs(text: &str) -> Result<IfsSystem> {
    let mut space: Option<ModelSpace> = None;
    let mut name: Option<String> = None;
    let mut window: Option<Window> = None;
    let mut maps: Vec<MapSpec> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut tokens = content.split_whitespace();
        let directive = tokens.next().unwrap_or_default();
        let rest: Vec<&str> = tokens.collect();
        match directive {
            "space" => {
                if space.is_some() {
                    return Err(syntax(line, "duplicate space directive"));
                }
                if !maps.is_empty() {
                    return Err(syntax(line, "space must precede the map lines"));
                }
                let [s] = rest[..] else {
                    return Err(syntax(
                        line,
                        "expected: space <plane2|line1ext|cplane2|strip2>",
                    ));
                };
                space = Some(
                    ModelSpace::from_name(s)
                        .ok_or_else(|| syntax(line, format!("unknown space '{s}'")))?,
                );
            }
            "name" => {
                if rest.is_empty() {
                    return Err(syntax(line, "expected: name <string>"));
                }
                name = Some(rest.join(" "));
            }
            "window" => {
                let v = numbers(line, &rest, 4)?;
                let w = Window::new(v[0], v[1], v[2], v[3]).map_err(|_| {
                    syntax(line, "window must satisfy xmin < xmax and ymin <= ymax")
                })?;
                window = Some(w);
            }
            "map" => {
                let Some((&kind, args)) = rest.split_first() else {
                    return Err(syntax(line, "expected: map <kind> <coefficients>"));
                };
                let map = parse_map(line, kind, args)?;
                let current = *space.get_or_insert(ModelSpace::Plane2);
                if map.space() != current {
                    return Err(Error::MixedSpaces {
                        line,
                        kind: map.kind(),
                        space: current.name(),
                    });
                }
                map.validate()
                    .map_err(|msg| Error::SingularMap { line, msg })?;
                maps.push(map);
                if maps.len() > MAX_MAPS {
                    return Err(Error::TooManyMaps(maps.len()));
                }
            }
            other => return Err(syntax(line, format!("unknown directive '{other}'"))),
        }
    }

    let space = space.unwrap_or(ModelSpace::Plane2);
    let ifs = IfsSystem::new(name.unwrap_or_else(|| "ifs".to_string()), space, maps)?;
    Ok(match window {
        Some(w) => ifs.with_window(w),
        None => ifs,
    })
}

/// Reads and parses a configuration file.
pub fn load_ifs(path: &Path) -> Result<IfsSystem> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_ifs(&text)
}

fn parse_map(line: usize, kind: &str, args: &[&str]) -> Result<MapSpec> {
    Ok(match kind {
        "affine2" => {
            let v = numbers(line, args, 6)?;
            MapSpec::Affine2 {
                a: v[0],
                b: v[1],
                c: v[2],
                d: v[3],
                tx: v[4],
                ty: v[5],
            }
        }
        "moebius1" => {
            let v = numbers(line, args, 4)?;
            MapSpec::Moebius1 {
                p: v[0],
                q: v[1],
                r: v[2],
                s: v[3],
            }
        }
        "caffine2" => {
            let v = numbers(line, args, 10)?;
            let c = |i: usize| Complex64::new(v[2 * i], v[2 * i + 1]);
            MapSpec::ComplexAffine2 {
                m11: c(0),
                m21: c(1),
                m22: c(2),
                t1: c(3),
                t2: c(4),
            }
        }
        "halfsqrt" => {
            let v = numbers(line, args, 1)?;
            MapSpec::HalfSqrt { tx: v[0] }
        }
        other => return Err(syntax(line, format!("unknown map kind '{other}'"))),
    })
}

fn numbers(line: usize, args: &[&str], n: usize) -> Result<Vec<f64>> {
    if args.len() != n {
        return Err(syntax(
            line,
            format!("expected {n} numbers, found {}", args.len()),
        ));
    }
    args.iter()
        .map(|a| {
            a.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| syntax(line, format!("invalid number '{a}'")))
        })
        .collect()
}

fn syntax(line: usize, msg: impl Into<String>) -> Error {
    Error::Syntax {
        line,
        msg: msg.into(),
    }
}
