//! Concrete heap graphs.
//!
//! A heap is a finite set of labelled points-to edges `source.label ↦ target`.
//! Only locations are graph vertices; atoms such as `nil` or integer literals
//! can be stored in a cell but never act as a shared vertex between two heaps.
//!
//! The [`Heap`] type itself does not enforce well-formedness, because
//! diagnostics (and some intermediate computations) need to talk about broken
//! heaps. [`validate_heap`] and [`validate_structure`] report what is wrong.

mod graph;
mod text;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

pub use graph::{bridges, component_count, components};
pub use text::{parse_heap_text, write_heap_text, HeapFormatError};

/// A symbolic heap location.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Location(String);

impl Location {
    /// Panics on an empty name.
    pub fn new(name: impl Into<String>) -> Self {
        let name = name.into();
        assert!(!name.is_empty(), "location names must be non-empty");
        Location(name)
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Immediate (non-address) cell contents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    Nil,
    Int(i64),
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Nil => f.write_str("nil"),
            Atom::Int(n) => write!(f, "{n}"),
        }
    }
}

/// What a cell holds: the address of another location or an atom.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Loc(Location),
    Atom(Atom),
}

impl Value {
    pub fn loc(name: impl Into<String>) -> Self {
        Value::Loc(Location::new(name))
    }

    pub fn nil() -> Self {
        Value::Atom(Atom::Nil)
    }

    pub fn as_loc(&self) -> Option<&Location> {
        match self {
            Value::Loc(l) => Some(l),
            Value::Atom(_) => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Loc(l) => l.fmt(f),
            Value::Atom(a) => a.fmt(f),
        }
    }
}

impl From<Location> for Value {
    fn from(l: Location) -> Self {
        Value::Loc(l)
    }
}

impl From<Atom> for Value {
    fn from(a: Atom) -> Self {
        Value::Atom(a)
    }
}

/// Edge label. `Eps` marks a plain pointer cell, `Named` an object field.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FieldLabel {
    Eps,
    Named(String),
}

impl FieldLabel {
    pub fn named(name: impl Into<String>) -> Self {
        FieldLabel::Named(name.into())
    }

    pub fn is_eps(&self) -> bool {
        matches!(self, FieldLabel::Eps)
    }
}

impl fmt::Display for FieldLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldLabel::Eps => f.write_str("eps"),
            FieldLabel::Named(n) => f.write_str(n),
        }
    }
}

/// A points-to edge `source.label ↦ target`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub source: Location,
    pub label: FieldLabel,
    pub target: Value,
}

impl Edge {
    pub fn new(source: Location, label: FieldLabel, target: Value) -> Self {
        Edge {
            source,
            label,
            target,
        }
    }

    /// Plain pointer edge `source ↦ target`, e.g. `Edge::plain("a", "b")`.
    /// `"nil"` and integer literals are read as atoms.
    pub fn plain(source: &str, target: &str) -> Self {
        Edge::new(
            Location::new(source),
            FieldLabel::Eps,
            value_from_str(target),
        )
    }

    /// Field edge `source.field ↦ target`.
    pub fn field(source: &str, field: &str, target: &str) -> Self {
        Edge::new(
            Location::new(source),
            FieldLabel::named(field),
            value_from_str(target),
        )
    }

    pub fn target_location(&self) -> Option<&Location> {
        self.target.as_loc()
    }

    /// `v` is the source or the target location of this edge.
    pub fn touches(&self, v: &Location) -> bool {
        self.source == *v || self.target_location() == Some(v)
    }

    /// Two edges occupy the same cell when they share source and label.
    pub fn same_cell(&self, other: &Edge) -> bool {
        self.source == other.source && self.label == other.label
    }

    /// Edges from one source must agree on being a plain pointer or an object.
    pub fn conflicts_with(&self, other: &Edge) -> bool {
        self.source == other.source
            && (self.label == other.label || self.label.is_eps() != other.label.is_eps())
    }
}

fn value_from_str(s: &str) -> Value {
    if s == "nil" {
        Value::nil()
    } else if let Ok(n) = s.parse::<i64>() {
        Value::Atom(Atom::Int(n))
    } else {
        Value::loc(s)
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.label {
            FieldLabel::Eps => write!(f, "{} -> {}", self.source, self.target),
            FieldLabel::Named(n) => write!(f, "{} .{} -> {}", self.source, n, self.target),
        }
    }
}

/// A finite set of edges.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Heap {
    edges: BTreeSet<Edge>,
}

impl Heap {
    pub fn new() -> Self {
        Heap::default()
    }

    pub fn edges(&self) -> &BTreeSet<Edge> {
        &self.edges
    }

    pub fn iter(&self) -> impl Iterator<Item = &Edge> {
        self.edges.iter()
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn contains(&self, e: &Edge) -> bool {
        self.edges.contains(e)
    }

    pub fn insert(&mut self, e: Edge) -> bool {
        self.edges.insert(e)
    }

    pub fn remove(&mut self, e: &Edge) -> bool {
        self.edges.remove(e)
    }

    /// Sources together with every location-valued target.
    pub fn vertices(&self) -> BTreeSet<Location> {
        let mut vs = BTreeSet::new();
        for e in &self.edges {
            vs.insert(e.source.clone());
            if let Some(t) = e.target_location() {
                vs.insert(t.clone());
            }
        }
        vs
    }

    /// Heap minus the given edges.
    pub fn without<'a>(&self, removed: impl IntoIterator<Item = &'a Edge>) -> Heap {
        let mut h = self.clone();
        for e in removed {
            h.edges.remove(e);
        }
        h
    }

    pub fn is_subheap_of(&self, other: &Heap) -> bool {
        self.edges.is_subset(&other.edges)
    }

    /// Source uniqueness and label discipline hold.
    pub fn is_well_formed(&self) -> bool {
        validate_structure(self).is_valid()
    }
}

impl FromIterator<Edge> for Heap {
    fn from_iter<T: IntoIterator<Item = Edge>>(iter: T) -> Self {
        Heap {
            edges: iter.into_iter().collect(),
        }
    }
}

impl<'a> IntoIterator for &'a Heap {
    type Item = &'a Edge;
    type IntoIter = std::collections::btree_set::Iter<'a, Edge>;

    fn into_iter(self) -> Self::IntoIter {
        self.edges.iter()
    }
}

impl fmt::Display for Heap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, e) in self.edges.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{e}")?;
        }
        f.write_str("}")
    }
}

/// Program-variable roots of a heap.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StackEnv {
    roots: BTreeMap<String, Location>,
}

impl StackEnv {
    pub fn new() -> Self {
        StackEnv::default()
    }

    /// Returns the previous root of `var`, if any.
    pub fn bind(&mut self, var: impl Into<String>, loc: Location) -> Option<Location> {
        self.roots.insert(var.into(), loc)
    }

    pub fn get(&self, var: &str) -> Option<&Location> {
        self.roots.get(var)
    }

    pub fn roots(&self) -> &BTreeMap<String, Location> {
        &self.roots
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }
}

impl<S: Into<String>> FromIterator<(S, Location)> for StackEnv {
    fn from_iter<T: IntoIterator<Item = (S, Location)>>(iter: T) -> Self {
        StackEnv {
            roots: iter.into_iter().map(|(k, v)| (k.into(), v)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// Two edges write the same `(source, label)` cell.
    DuplicateCell { source: Location, label: FieldLabel },
    /// A location has both a plain pointer edge and named field edges.
    MixedCell { source: Location },
    /// A stack variable points at a location that is not a heap vertex.
    DanglingRoot { var: String, location: Location },
    /// No directed path from any stack root reaches this vertex.
    Unreachable { vertex: Location },
    /// An undirected component holds no stack root.
    UnrootedComponent { vertices: Vec<Location> },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicateCell { source, label } => {
                write!(f, "cell {source}.{label} is assigned more than once")
            }
            Violation::MixedCell { source } => {
                write!(f, "{source} is both a plain pointer and an object")
            }
            Violation::DanglingRoot { var, location } => {
                write!(
                    f,
                    "stack variable {var} points to {location}, which is not in the heap"
                )
            }
            Violation::Unreachable { vertex } => {
                write!(f, "{vertex} is unreachable from every stack root")
            }
            Violation::UnrootedComponent { vertices } => {
                let names: Vec<_> = vertices.iter().map(|v| v.name()).collect();
                write!(
                    f,
                    "component {{{}}} is not pointed to by any stack variable",
                    names.join(", ")
                )
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    /// Only the cell-level violations, which make a heap unusable as a model.
    pub fn structural(&self) -> impl Iterator<Item = &Violation> {
        self.violations.iter().filter(|v| {
            matches!(
                v,
                Violation::DuplicateCell { .. } | Violation::MixedCell { .. }
            )
        })
    }
}

/// Cell-level checks only: source uniqueness and label discipline.
pub fn validate_structure(h: &Heap) -> ValidationReport {
    let mut violations = Vec::new();
    let mut by_source: BTreeMap<&Location, Vec<&FieldLabel>> = BTreeMap::new();
    for e in h.iter() {
        by_source.entry(&e.source).or_default().push(&e.label);
    }
    for (source, labels) in by_source {
        // labels arrive sorted, so duplicates are adjacent
        let mut reported = BTreeSet::new();
        for w in labels.windows(2) {
            if w[0] == w[1] && reported.insert(w[0]) {
                violations.push(Violation::DuplicateCell {
                    source: source.clone(),
                    label: w[0].clone(),
                });
            }
        }
        let plain = labels.iter().any(|l| l.is_eps());
        let named = labels.iter().any(|l| !l.is_eps());
        if plain && named {
            violations.push(Violation::MixedCell {
                source: source.clone(),
            });
        }
    }
    ValidationReport { violations }
}

/// Full validation against a stack: cell checks, dangling roots, directed
/// reachability from the roots, and unrooted components.
pub fn validate_heap(h: &Heap, s: &StackEnv) -> ValidationReport {
    let mut report = validate_structure(h);
    let vertices = h.vertices();

    for (var, loc) in s.roots() {
        if !vertices.contains(loc) {
            report.violations.push(Violation::DanglingRoot {
                var: var.clone(),
                location: loc.clone(),
            });
        }
    }

    let mut succ: BTreeMap<&Location, Vec<&Location>> = BTreeMap::new();
    for e in h.iter() {
        if let Some(t) = e.target_location() {
            succ.entry(&e.source).or_default().push(t);
        }
    }
    let mut seen: BTreeSet<&Location> = BTreeSet::new();
    let mut stack: Vec<&Location> = s
        .roots()
        .values()
        .filter(|l| vertices.contains(*l))
        .collect();
    while let Some(v) = stack.pop() {
        if seen.insert(v) {
            if let Some(next) = succ.get(v) {
                stack.extend(next.iter().copied());
            }
        }
    }
    for v in &vertices {
        if !seen.contains(v) {
            report
                .violations
                .push(Violation::Unreachable { vertex: v.clone() });
        }
    }

    for comp in components(h) {
        let vs = comp.vertices();
        if !s.roots().values().any(|r| vs.contains(r)) {
            report.violations.push(Violation::UnrootedComponent {
                vertices: vs.into_iter().collect(),
            });
        }
    }
    report
}
