use std::collections::BTreeSet;

use super::AlgebraError;
use crate::formula::{Formula, Term};
use crate::heap::{bridges, components, Edge, Heap, Location, Value};

/// The points-to cell describing one edge.
pub fn edge_formula(e: &Edge) -> Formula {
    let target = match &e.target {
        Value::Loc(l) => Term::sym(l.name()),
        Value::Atom(a) => Term::Atom(*a),
    };
    Formula::PointsTo {
        base: Term::sym(e.source.name()),
        label: e.label.clone(),
        target,
    }
}

/// A left-nested `*` chain of the cells of one connected heap, ordered so
/// that each cell meets the cells before it. Starts from the smallest edge
/// and always takes the smallest edge that connects. For a tree every step
/// meets the accumulated heap in exactly one vertex, so the chain evaluates
/// back to `h`; a cyclic heap yields a chain that evaluates to `false`.
pub fn conj_form(h: &Heap) -> Formula {
    let mut rest: Vec<&Edge> = h.iter().collect();
    let mut seen: BTreeSet<&Location> = BTreeSet::new();
    let mut chain = Vec::with_capacity(rest.len());
    while !rest.is_empty() {
        let pick = rest
            .iter()
            .position(|e| {
                seen.is_empty()
                    || seen.contains(&e.source)
                    || e.target_location().is_some_and(|t| seen.contains(t))
            })
            .unwrap_or(0);
        let e = rest.remove(pick);
        seen.insert(&e.source);
        if let Some(t) = e.target_location() {
            seen.insert(t);
        }
        chain.push(edge_formula(e));
    }
    Formula::conj_all(chain)
}

/// `+` of the conjunction forms of the components of `h`; `emp` for the
/// empty heap.
pub fn heap_formula(h: &Heap) -> Formula {
    Formula::disj_all(components(h).iter().map(conj_form))
}

/// Predicted number of components after deleting `e` from `h`: a bridge
/// with both ends still touched by other edges splits its component, an
/// edge that is the only one at all its endpoints takes its component with
/// it, and any other deletion leaves the count unchanged.
pub fn components_without(h: &Heap, e: &Edge) -> usize {
    let before = components(h).len();
    let touched = |v: &Location| h.iter().any(|d| d != e && d.touches(v));
    let ends: Vec<&Location> = std::iter::once(&e.source)
        .chain(e.target_location().filter(|t| **t != e.source))
        .collect();
    let alive = ends.iter().filter(|v| touched(v)).count();
    if alive == 0 {
        before - 1
    } else if ends.len() == 2 && alive == 2 && bridges(h).contains(e) {
        before + 1
    } else {
        before
    }
}

/// The formula describing `h` without `e`. Removing a bridge splits a
/// component, so the remainder is a `+` of component chains; a remainder
/// that stays in one piece is a single `*` chain, and nothing left is `emp`.
pub fn subtract_edge(h: &Heap, e: &Edge) -> Result<Formula, AlgebraError> {
    if !h.contains(e) {
        return Err(AlgebraError::EdgeNotPresent(e.clone()));
    }
    let rest = h.without([e]);
    let parts = components(&rest);
    debug_assert_eq!(parts.len(), components_without(h, e));
    Ok(Formula::disj_all(parts.iter().map(conj_form)))
}
