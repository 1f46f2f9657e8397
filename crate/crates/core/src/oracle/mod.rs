//! Brute-force ground truth: exhaustive heap enumeration over a finite
//! universe, a set-valued denotation of formulas, and random generators.

mod denote;
mod enumerate;
mod generate;

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::heap::{Atom, FieldLabel, Location, Value};
use crate::semantics::SemanticsError;

pub use denote::{
    assignments, denote, denotes, oracle_equiv, oracle_witness, oracle_witness_within, Denoter,
    Witness, DEFAULT_BUDGET,
};
pub(crate) use enumerate::weighted_heap_count;
pub use enumerate::{
    compact_heaps, enumerate_heaps, for_each_compact_heap, heap_count, random_heap,
    random_heap_with, CompactEdge, CompactTarget, CompactUniverse,
};
pub use generate::{enumerate_formulas, random_ast, random_formula};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("enumeration needs {work} steps, over the budget of {budget}")]
    UniverseTooLarge { work: u128, budget: u128 },
    #[error("`{0}` lies outside the universe")]
    OutsideUniverse(String),
    #[error("invalid universe: {0}")]
    InvalidUniverse(String),
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
}

/// A finite universe of locations, labels and atoms, with a bound on the
/// number of edges per heap (`usize::MAX` for none).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UniverseSpec {
    pub locations: Vec<Location>,
    pub labels: Vec<FieldLabel>,
    pub atoms: Vec<Atom>,
    pub max_edges: usize,
}

impl Default for UniverseSpec {
    /// Locations `a, b, c`, labels `eps, f, g`, atom `nil`, at most 4 edges.
    fn default() -> Self {
        UniverseSpec {
            locations: ["a", "b", "c"].map(Location::new).to_vec(),
            labels: vec![
                FieldLabel::Eps,
                FieldLabel::named("f"),
                FieldLabel::named("g"),
            ],
            atoms: vec![Atom::Nil],
            max_edges: 4,
        }
    }
}

impl UniverseSpec {
    /// Locations, then atoms.
    pub fn values(&self) -> Vec<Value> {
        self.locations
            .iter()
            .cloned()
            .map(Value::Loc)
            .chain(self.atoms.iter().copied().map(Value::Atom))
            .collect()
    }

    /// Parses `key=value` settings separated by `;` or newlines, e.g.
    /// `locations=a,b,c;labels=eps,f,g;atoms=nil;max_edges=4`. Missing keys
    /// keep their defaults; `max_edges=none` removes the bound.
    pub fn parse(text: &str) -> Result<Self, OracleError> {
        let mut u = UniverseSpec::default();
        let bad = |m: String| OracleError::InvalidUniverse(m);
        for item in text.split([';', '\n']) {
            let item = item.split('#').next().unwrap_or("").trim();
            if item.is_empty() {
                continue;
            }
            let (key, val) = item
                .split_once('=')
                .ok_or_else(|| bad(format!("expected `key=value`, found `{item}`")))?;
            let list: Vec<&str> = val
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .collect();
            match key.trim() {
                "locations" => {
                    u.locations = list
                        .iter()
                        .map(|s| {
                            if is_ident(s) && *s != "nil" {
                                Ok(Location::new(*s))
                            } else {
                                Err(bad(format!("invalid location `{s}`")))
                            }
                        })
                        .collect::<Result<_, _>>()?
                }
                "labels" => {
                    u.labels = list
                        .iter()
                        .map(|s| match *s {
                            "eps" | "ε" => Ok(FieldLabel::Eps),
                            s if is_ident(s) => Ok(FieldLabel::named(s)),
                            s => Err(bad(format!("invalid label `{s}`"))),
                        })
                        .collect::<Result<_, _>>()?
                }
                "atoms" => {
                    u.atoms = list
                        .iter()
                        .map(|s| match *s {
                            "nil" => Ok(Atom::Nil),
                            s => s
                                .parse()
                                .map(Atom::Int)
                                .map_err(|_| bad(format!("invalid atom `{s}`"))),
                        })
                        .collect::<Result<_, _>>()?
                }
                "max_edges" => {
                    u.max_edges = match val.trim() {
                        "none" | "inf" => usize::MAX,
                        v => v
                            .parse()
                            .map_err(|_| bad(format!("invalid max_edges `{v}`")))?,
                    }
                }
                other => return Err(bad(format!("unknown key `{other}`"))),
            }
        }
        u.check()?;
        Ok(u)
    }

    /// Lists are duplicate-free and fit compact indexing.
    pub fn check(&self) -> Result<(), OracleError> {
        fn unique<T: Ord>(xs: &[T]) -> bool {
            xs.iter().collect::<BTreeSet<_>>().len() == xs.len()
        }
        if !unique(&self.locations) || !unique(&self.labels) || !unique(&self.atoms) {
            return Err(OracleError::InvalidUniverse("duplicate entries".into()));
        }
        if self.locations.len() > 255 || self.labels.len() > 255 || self.atoms.len() > 255 {
            return Err(OracleError::InvalidUniverse(
                "more than 255 entries in a list".into(),
            ));
        }
        Ok(())
    }
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_alphabetic() || c == '_')
        && chars.all(|c| c.is_alphanumeric() || c == '_')
}

impl fmt::Display for UniverseSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |xs: Vec<String>| xs.join(",");
        write!(
            f,
            "locations={};labels={};atoms={};max_edges=",
            join(self.locations.iter().map(|l| l.to_string()).collect()),
            join(self.labels.iter().map(|l| l.to_string()).collect()),
            join(self.atoms.iter().map(|a| a.to_string()).collect()),
        )?;
        if self.max_edges == usize::MAX {
            f.write_str("none")
        } else {
            write!(f, "{}", self.max_edges)
        }
    }
}
