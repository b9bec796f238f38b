//! Iterated function systems and words over their maps.

use std::fmt;

use crate::error::{Error, Result};
use crate::grid::Window;
use crate::map::MapSpec;
use crate::space::{ModelSpace, Point};

/// Largest number of maps an [`IfsSystem`] may hold.
pub const MAX_MAPS: usize = 64;

/// A finite family of invertible maps on one model space.
#[derive(Debug, Clone, PartialEq)]
pub struct IfsSystem {
    name: String,
    space: ModelSpace,
    maps: Vec<MapSpec>,
    window: Option<Window>,
}

impl IfsSystem {
    pub fn new(name: impl Into<String>, space: ModelSpace, maps: Vec<MapSpec>) -> Result<Self> {
        if maps.is_empty() {
            return Err(Error::EmptySystem);
        }
        if maps.len() > MAX_MAPS {
            return Err(Error::TooManyMaps(maps.len()));
        }
        for (i, m) in maps.iter().enumerate() {
            if m.space() != space {
                return Err(Error::MixedSpaces {
                    line: i + 1,
                    kind: m.kind(),
                    space: space.name(),
                });
            }
            m.validate()
                .map_err(|msg| Error::SingularMap { line: i + 1, msg })?;
        }
        Ok(IfsSystem {
            name: name.into(),
            space,
            maps,
            window: None,
        })
    }

    pub fn with_window(mut self, window: Window) -> Self {
        self.window = Some(window);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn space(&self) -> ModelSpace {
        self.space
    }

    pub fn maps(&self) -> &[MapSpec] {
        &self.maps
    }

    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }

    /// Map with 1-based index `i`.
    pub fn map(&self, i: usize) -> Result<&MapSpec> {
        if i == 0 || i > self.maps.len() {
            return Err(Error::IndexOutOfRange {
                index: i,
                n: self.maps.len(),
            });
        }
        Ok(&self.maps[i - 1])
    }

    /// Viewing window declared in the configuration, if any.
    pub fn window(&self) -> Option<&Window> {
        self.window.as_ref()
    }

    pub fn all_total(&self) -> bool {
        self.maps.iter().all(MapSpec::is_total)
    }

    pub(crate) fn require_total(&self) -> Result<()> {
        if self.all_total() {
            Ok(())
        } else {
            Err(Error::PartialMapsUnsupported)
        }
    }

    /// `w_{θ1} ∘ ... ∘ w_{θk}` at `x`: `θk` acts first, `θ1` last.
    pub fn apply_word(&self, word: &Word, x: &Point) -> Result<Point> {
        let mut y = *x;
        for &i in word.indices().iter().rev() {
            y = self.map(i)?.apply(&y)?;
        }
        Ok(y)
    }

    /// `w_{θ1}⁻¹ ∘ ... ∘ w_{θk}⁻¹` at `y`: `θk` acts first.
    pub fn apply_inverse_word(&self, word: &Word, y: &Point) -> Result<Point> {
        let mut x = *y;
        for &i in word.indices().iter().rev() {
            x = self.map(i)?.apply_inverse(&x)?;
        }
        Ok(x)
    }

    /// The single map `w_{θ1}⁻¹ ∘ ... ∘ w_{θk}⁻¹` (identity for the empty word).
    pub fn inverse_word_map(&self, word: &Word) -> Result<MapSpec> {
        self.require_total()?;
        let mut acc = identity_for(self.space)?;
        for &i in word.indices() {
            acc = acc.compose(&self.map(i)?.inverse()?)?;
        }
        Ok(acc)
    }
}

fn identity_for(space: ModelSpace) -> Result<MapSpec> {
    use num_complex::Complex64;
    Ok(match space {
        ModelSpace::Plane2 => MapSpec::identity2(),
        ModelSpace::ExtendedLine => MapSpec::Moebius1 {
            p: 1.0,
            q: 0.0,
            r: 0.0,
            s: 1.0,
        },
        ModelSpace::ComplexPlane2 => {
            let (one, zero) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
            MapSpec::ComplexAffine2 {
                m11: one,
                m21: zero,
                m22: one,
                t1: zero,
                t2: zero,
            }
        }
        ModelSpace::Strip2 => return Err(Error::PartialMapsUnsupported),
    })
}

/// A finite word over the map indices `1..=N`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Word(Vec<usize>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn new(indices: Vec<usize>) -> Self {
        Word(indices)
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The prefix `θ|k`.
    pub fn prefix(&self, k: usize) -> Word {
        Word(self.0[..k.min(self.0.len())].to_vec())
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn reversed(&self) -> Word {
        Word(self.0.iter().rev().copied().collect())
    }

    /// Parses `"1,2,3"` (commas or whitespace).
    pub fn parse(s: &str) -> Option<Word> {
        s.split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| t.parse::<usize>().ok())
            .collect::<Option<Vec<_>>>()
            .map(Word)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|i| i.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

impl From<Vec<usize>> for Word {
    fn from(v: Vec<usize>) -> Self {
        Word(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn moebius_example() -> IfsSystem {
        IfsSystem::new(
            "m",
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
        .unwrap()
    }

    #[test]
    fn empty_word_is_identity() {
        let ifs = moebius_example();
        let x = Point::line(6.0);
        assert_eq!(ifs.apply_word(&Word::empty(), &x).unwrap(), x);
    }

    #[test]
    fn word_order_convention() {
        let ifs = moebius_example();
        let x = Point::line(6.0);
        let y = ifs.apply_word(&Word::new(vec![2, 2]), &x).unwrap();
        assert!((y.x() - 1.0 / 6.0).abs() < 1e-15);
        let y = ifs.apply_word(&Word::new(vec![1, 2]), &x).unwrap();
        assert!((y.x() + 0.75).abs() < 1e-15);
    }

    #[test]
    fn index_out_of_range() {
        let ifs = moebius_example();
        let r = ifs.apply_word(&Word::new(vec![3]), &Point::line(0.0));
        assert!(matches!(r, Err(Error::IndexOutOfRange { index: 3, n: 2 })));
        assert!(ifs.map(0).is_err());
    }

    #[test]
    fn inverse_word_undoes_reversed_word() {
        let ifs = moebius_example();
        let w = Word::new(vec![1, 2, 2]);
        let y = Point::line(0.3);
        let x = ifs.apply_inverse_word(&w, &y).unwrap();
        let back = ifs.apply_word(&w.reversed(), &x).unwrap();
        assert!((back.x() - 0.3).abs() < 1e-12);
        let m = ifs.inverse_word_map(&w).unwrap();
        assert!((m.apply(&y).unwrap().x() - x.x()).abs() < 1e-12);
    }

    #[test]
    fn word_parse() {
        assert_eq!(Word::parse("1,2 3").unwrap(), Word::new(vec![1, 2, 3]));
        assert_eq!(Word::parse("").unwrap(), Word::empty());
        assert!(Word::parse("1,x").is_none());
    }
}
