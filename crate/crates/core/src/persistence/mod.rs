//! Sublevel-set persistence of a [`ScalarField`] on a cubical complex.
//!
//! Pixels are the 2-cells of the complex and every lower cell takes the
//! minimum value of the pixels whose closure contains it, so the sublevel set
//! at the foreground level of a signed distance field is the closed
//! foreground with 8-connected components.
//!
//! Two engines compute the H0/H1 diagram and must agree as multisets:
//!
//! * `reduce`: boundary-matrix reduction over GF(2) with clearing. Slow,
//!   simple, and the reference the other engine is tested against.
//! * `fast`: union-find with the elder rule for H0, and for H1 the same
//!   union-find on the dual graph (pixels plus one exterior node) run
//!   over the reversed filtration.
//!
//! Engines are selected by name through [`engine`].

mod fast;
mod filtration;
mod reduce;

pub use fast::persistence_fast;
pub use filtration::{build_filtration, Cell};
pub use reduce::persistence_reduce;

use std::cmp::Ordering;
use std::fmt;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::sedt::ScalarField;
use crate::{Error, Result};

/// Death value of a persistence pair. `Infinite` sorts after every finite value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Death {
    Finite(i64),
    Infinite,
}

impl Death {
    pub fn is_infinite(self) -> bool {
        matches!(self, Death::Infinite)
    }
}

impl fmt::Display for Death {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Death::Finite(v) => write!(f, "{v}"),
            Death::Infinite => f.write_str("inf"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PersistencePair {
    pub dim: u8,
    pub birth: i64,
    pub death: Death,
}

impl PersistencePair {
    pub fn finite(dim: u8, birth: i64, death: i64) -> Self {
        Self {
            dim,
            birth,
            death: Death::Finite(death),
        }
    }

    pub fn essential(dim: u8, birth: i64) -> Self {
        Self {
            dim,
            birth,
            death: Death::Infinite,
        }
    }

    /// `death - birth`, or `None` for an essential class.
    pub fn lifespan(&self) -> Option<i64> {
        match self.death {
            Death::Finite(d) => Some(d - self.birth),
            Death::Infinite => None,
        }
    }

    /// Whether the class exists in the sublevel set at `t`.
    pub fn alive_at(&self, t: i64) -> bool {
        self.birth <= t && Death::Finite(t) < self.death
    }
}

/// A multiset of persistence pairs for one image.
///
/// Pairs are kept in sorted order, so equality is multiset equality.
#[derive(Clone, Debug, Eq)]
pub struct PersistenceDiagram {
    pub image_id: String,
    pairs: Vec<PersistencePair>,
}

impl PartialEq for PersistenceDiagram {
    fn eq(&self, other: &Self) -> bool {
        self.pairs == other.pairs
    }
}

impl PersistenceDiagram {
    pub fn new(image_id: impl Into<String>, mut pairs: Vec<PersistencePair>) -> Self {
        pairs.sort_unstable();
        Self {
            image_id: image_id.into(),
            pairs,
        }
    }

    pub fn pairs(&self) -> &[PersistencePair] {
        &self.pairs
    }

    pub fn pairs_of_dim(&self, dim: u8) -> impl Iterator<Item = &PersistencePair> + '_ {
        self.pairs.iter().filter(move |p| p.dim == dim)
    }

    /// Number of classes of dimension `dim` alive at threshold `t`.
    pub fn alive_at(&self, dim: u8, t: i64) -> usize {
        self.pairs_of_dim(dim).filter(|p| p.alive_at(t)).count()
    }

    /// Adds `c` to every birth and finite death.
    pub fn shifted(&self, c: i64) -> Self {
        let pairs = self
            .pairs
            .iter()
            .map(|p| PersistencePair {
                dim: p.dim,
                birth: p.birth + c,
                death: match p.death {
                    Death::Finite(d) => Death::Finite(d + c),
                    Death::Infinite => Death::Infinite,
                },
            })
            .collect();
        Self::new(self.image_id.clone(), pairs)
    }

    /// `dim,birth,death` CSV with `inf` for essential classes.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("dim,birth,death\n");
        for p in &self.pairs {
            let _ = writeln!(out, "{},{},{}", p.dim, p.birth, p.death);
        }
        out
    }

    pub fn from_csv(image_id: impl Into<String>, text: &str) -> Result<Self> {
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some("dim,birth,death") {
            return Err(Error::Parse("diagram csv must start with dim,birth,death".into()));
        }
        let mut pairs = Vec::new();
        for line in lines.filter(|l| !l.trim().is_empty()) {
            let bad = || Error::Parse(format!("bad diagram row {line:?}"));
            let f: Vec<&str> = line.split(',').map(str::trim).collect();
            if f.len() != 3 {
                return Err(bad());
            }
            let dim: u8 = f[0].parse().map_err(|_| bad())?;
            if dim > 1 {
                return Err(bad());
            }
            let birth: i64 = f[1].parse().map_err(|_| bad())?;
            let death = match f[2] {
                "inf" => Death::Infinite,
                d => Death::Finite(d.parse().map_err(|_| bad())?),
            };
            pairs.push(PersistencePair { dim, birth, death });
        }
        Ok(Self::new(image_id, pairs))
    }

    /// Writes `<dir>/<image-id>.pd.csv`.
    pub fn write_to_dir(&self, dir: impl AsRef<Path>) -> Result<std::path::PathBuf> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let path = dir.join(format!("{}.pd.csv", self.image_id));
        fs::write(&path, self.to_csv()).map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default();
        let id = name.strip_suffix(".pd.csv").unwrap_or(name);
        Self::from_csv(id, &text)
    }
}

/// A persistence algorithm for sublevel filtrations of 2D fields.
pub trait PersistenceEngine: Send + Sync {
    /// Registry key.
    fn name(&self) -> &'static str;

    fn description(&self) -> &'static str;

    /// All H0/H1 pairs with positive persistence, plus the essential H0 class.
    fn pairs(&self, field: &ScalarField) -> Vec<PersistencePair>;

    fn diagram(&self, image_id: &str, field: &ScalarField) -> PersistenceDiagram {
        PersistenceDiagram::new(image_id, self.pairs(field))
    }
}

pub struct ReductionEngine;

impl PersistenceEngine for ReductionEngine {
    fn name(&self) -> &'static str {
        "reduce"
    }

    fn description(&self) -> &'static str {
        "boundary-matrix reduction with clearing (reference oracle)"
    }

    fn pairs(&self, field: &ScalarField) -> Vec<PersistencePair> {
        reduce::reduce_pairs(field)
    }
}

pub struct UnionFindEngine;

impl PersistenceEngine for UnionFindEngine {
    fn name(&self) -> &'static str {
        "fast"
    }

    fn description(&self) -> &'static str {
        "union-find with elder rule; H1 through the dual graph"
    }

    fn pairs(&self, field: &ScalarField) -> Vec<PersistencePair> {
        fast::fast_pairs(field)
    }
}

static ENGINES: &[&dyn PersistenceEngine] = &[&UnionFindEngine, &ReductionEngine];

/// Looks up a persistence engine by name.
pub fn engine(name: &str) -> Result<&'static dyn PersistenceEngine> {
    ENGINES
        .iter()
        .copied()
        .find(|e| e.name() == name)
        .ok_or_else(|| {
            Error::InvalidArgument(format!(
                "unknown persistence engine {name:?}; available: {}",
                engine_names().join(", ")
            ))
        })
}

pub fn engines() -> &'static [&'static dyn PersistenceEngine] {
    ENGINES
}

pub fn engine_names() -> Vec<&'static str> {
    ENGINES.iter().map(|e| e.name()).collect()
}

pub const DEFAULT_ENGINE: &str = "fast";

impl PartialOrd for PersistenceDiagram {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for PersistenceDiagram {
    fn cmp(&self, other: &Self) -> Ordering {
        self.pairs.cmp(&other.pairs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn infinite_death_sorts_last() {
        assert!(Death::Finite(i64::MAX) < Death::Infinite);
        assert!(PersistencePair::essential(0, 3).alive_at(i64::MAX));
        assert!(!PersistencePair::finite(1, -1, 1).alive_at(1));
        assert!(PersistencePair::finite(1, -1, 1).alive_at(-1));
    }

    #[test]
    fn equality_ignores_input_order() {
        let a = PersistenceDiagram::new(
            "a",
            vec![PersistencePair::finite(1, -1, 1), PersistencePair::essential(0, -2)],
        );
        let b = PersistenceDiagram::new(
            "b",
            vec![PersistencePair::essential(0, -2), PersistencePair::finite(1, -1, 1)],
        );
        assert_eq!(a, b);
    }

    #[test]
    fn csv_round_trip() {
        let d = PersistenceDiagram::new(
            "img",
            vec![
                PersistencePair::essential(0, -2),
                PersistencePair::finite(0, -2, -1),
                PersistencePair::finite(1, -1, 1),
            ],
        );
        let csv = d.to_csv();
        assert_eq!(csv, "dim,birth,death\n0,-2,-1\n0,-2,inf\n1,-1,1\n");
        assert_eq!(PersistenceDiagram::from_csv("img", &csv).unwrap(), d);
        assert!(PersistenceDiagram::from_csv("x", "dim,birth,death\n2,0,1\n").is_err());
        assert!(PersistenceDiagram::from_csv("x", "a,b\n").is_err());

        let dir = tempfile::tempdir().unwrap();
        let path = d.write_to_dir(dir.path()).unwrap();
        assert!(path.ends_with("img.pd.csv"));
        let back = PersistenceDiagram::read(&path).unwrap();
        assert_eq!(back.image_id, "img");
        assert_eq!(back, d);
    }

    #[test]
    fn registry_lookup() {
        assert_eq!(engine("fast").unwrap().name(), "fast");
        assert_eq!(engine("reduce").unwrap().name(), "reduce");
        assert!(engine("magic").is_err());
        assert_eq!(engine_names(), vec!["fast", "reduce"]);
    }
}
