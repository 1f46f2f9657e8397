use crate::heap::{Edge, FieldLabel, Heap, Value};
use crate::oracle::UniverseSpec;

/// Sub-heap order: every edge of `h1` is an edge of `h2`.
pub fn leq(h1: &Heap, h2: &Heap) -> bool {
    h1.is_subheap_of(h2)
}

/// A maximal heap over `u`, ignoring its edge bound: every location is an
/// object holding all named fields of `u` (or a plain pointer when `u` has
/// no named labels), each pointing to the next location in a ring.
///
/// Maximal heaps are not unique, since targets can be chosen freely, so
/// this is one canonical representative rather than a greatest element.
pub fn supremum(u: &UniverseSpec) -> Heap {
    let named: Vec<&FieldLabel> = u.labels.iter().filter(|l| !l.is_eps()).collect();
    let has_eps = u.labels.iter().any(FieldLabel::is_eps);
    let n = u.locations.len();
    let mut h = Heap::new();
    for (i, src) in u.locations.iter().enumerate() {
        let target = Value::Loc(u.locations[(i + 1) % n].clone());
        if !named.is_empty() {
            for l in &named {
                h.insert(Edge::new(src.clone(), (*l).clone(), target.clone()));
            }
        } else if has_eps {
            h.insert(Edge::new(src.clone(), FieldLabel::Eps, target));
        }
    }
    h
}

/// No edge over `u` can be added to `h` without breaking source uniqueness
/// or label discipline.
pub fn is_maximal(h: &Heap, u: &UniverseSpec) -> bool {
    if !h.is_well_formed() {
        return false;
    }
    let targets = u.values();
    u.locations.iter().all(|src| {
        u.labels.iter().all(|label| {
            targets.iter().all(|t| {
                let e = Edge::new(src.clone(), label.clone(), t.clone());
                h.contains(&e) || h.iter().any(|d| d.conflicts_with(&e))
            })
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::enumerate_heaps;
    use crate::semantics::{conjoin, EvalResult, SignedHeap};

    fn heap(edges: &[Edge]) -> Heap {
        edges.iter().cloned().collect()
    }

    #[test]
    fn order_examples() {
        let ab = heap(&[Edge::plain("a", "b")]);
        assert!(leq(&Heap::new(), &ab));
        assert!(leq(
            &ab,
            &heap(&[Edge::plain("a", "b"), Edge::plain("b", "c")])
        ));
        assert!(!leq(&ab, &heap(&[Edge::plain("a", "c")])));
    }

    #[test]
    fn supremum_is_maximal_and_above_its_parts() {
        let u = UniverseSpec::default();
        let top = supremum(&u);
        assert_eq!(top.len(), 6);
        assert!(is_maximal(&top, &u));
        assert!(!is_maximal(&heap(&[Edge::field("a", "f", "b")]), &u));
        let plain = UniverseSpec {
            labels: vec![FieldLabel::Eps],
            ..UniverseSpec::default()
        };
        assert!(is_maximal(&supremum(&plain), &plain));
    }

    #[test]
    fn conjunction_is_an_upper_bound() {
        let u = UniverseSpec {
            max_edges: 2,
            ..UniverseSpec::default()
        };
        let hs: Vec<Heap> = enumerate_heaps(&u).collect();
        for a in &hs {
            assert!(leq(&Heap::new(), a));
            for b in &hs {
                if let EvalResult::Heap(c) = conjoin(&SignedHeap::from(a), &SignedHeap::from(b)) {
                    let c = c.to_heap().expect("positive");
                    assert!(leq(a, &c) && leq(b, &c));
                }
            }
        }
    }
}
