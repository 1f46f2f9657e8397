use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use strict_heap::algebra::{leq, normalize, push_inversion, subtract_edge};
use strict_heap::formula::{parse_formula, print_formula, Defs, Formula};
use strict_heap::heap::{component_count, components, Heap, Location};
use strict_heap::oracle::{oracle_equiv, random_ast, random_formula, random_heap, UniverseSpec};
use strict_heap::semantics::{
    conjoin_chain, eval_ground, eval_ground_in, match_formula, EvalResult, SignedHeap,
};
use strict_heap::{Edge, StackEnv};

const FUEL: usize = 8;

fn f(s: &str) -> Formula {
    parse_formula(s).unwrap()
}

fn small() -> UniverseSpec {
    UniverseSpec::parse("locations=a,b,c;labels=eps,f;atoms=nil;max_edges=2").unwrap()
}

fn heap(seed: u64) -> Heap {
    random_heap(&UniverseSpec::default(), seed)
}

/// Ground leaves: every symbol names a location and nothing is partial.
fn ground_leaves() -> Vec<Formula> {
    [
        "emp",
        "false",
        "a |-> b",
        "b |-> c",
        "c |-> a",
        "a.f |-> nil",
        "b.f |-> a",
    ]
    .map(f)
    .to_vec()
}

fn formula(seed: u64, leaves: &[Formula], size: usize) -> Formula {
    random_formula(&mut ChaCha8Rng::seed_from_u64(seed), leaves, size)
}

/// Components of the undirected graph ignoring self-loops are all trees.
fn is_forest(h: &Heap) -> bool {
    let mut parent: BTreeMap<Location, Location> = BTreeMap::new();
    fn root(p: &BTreeMap<Location, Location>, mut x: Location) -> Location {
        while p[&x] != x {
            x = p[&x].clone();
        }
        x
    }
    for v in h.vertices() {
        parent.insert(v.clone(), v);
    }
    for e in h.iter() {
        let Some(t) = e.target_location() else {
            continue;
        };
        if *t == e.source {
            continue;
        }
        let (a, b) = (root(&parent, e.source.clone()), root(&parent, t.clone()));
        if a == b {
            return false;
        }
        parent.insert(a, b);
    }
    true
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn printing_then_parsing_is_identity(seed in any::<u64>(), depth in 1usize..7) {
        let ast = random_ast(&mut ChaCha8Rng::seed_from_u64(seed), depth);
        let text = print_formula(&ast);
        prop_assert_eq!(parse_formula(&text), Ok(ast), "{}", text);
    }

    #[test]
    fn every_match_evaluates_to_the_heap(seed in any::<u64>(), size in 1usize..6) {
        let g = formula(seed, &ground_leaves(), size);
        prop_assume!(!g.contains_inv());
        let defs = Defs::new();
        let u = small();
        for h in strict_heap::oracle::enumerate_heaps(&u).take(200) {
            let bindings = match_formula(&g, &h, &StackEnv::new(), &defs, FUEL).unwrap();
            for b in &bindings {
                let got = eval_ground_in(&g, &defs, FUEL, &u.values(), &b.env).unwrap();
                prop_assert_eq!(got, EvalResult::Heap(SignedHeap::from(&h)), "{}", print_formula(&g));
            }
            // symbols are their own locations when evaluated
            let own = eval_ground(&g, &defs, FUEL).unwrap();
            let identity = bindings.iter().any(|b| {
                b.env.iter().all(|(k, v)| v.as_loc().is_some_and(|l| l.name() == k))
            });
            prop_assert_eq!(own == EvalResult::Heap(SignedHeap::from(&h)), identity);
        }
    }

    #[test]
    fn components_partition_the_heap(seed in any::<u64>()) {
        let h = heap(seed);
        let parts = components(&h);
        prop_assert_eq!(parts.len(), component_count(&h));
        let mut all = Heap::new();
        for (i, c) in parts.iter().enumerate() {
            prop_assert!(!c.is_empty());
            prop_assert_eq!(component_count(c), 1);
            for d in &parts[i + 1..] {
                prop_assert!(c.vertices().is_disjoint(&d.vertices()));
            }
            for e in c.iter() {
                prop_assert!(all.insert(e.clone()));
            }
        }
        prop_assert_eq!(all, h);
    }

    #[test]
    fn subtracting_an_edge_denotes_the_remainder(seed in any::<u64>()) {
        let h = heap(seed);
        for e in h.iter() {
            let rest = h.without([e]);
            if !is_forest(&rest) {
                continue;
            }
            let g = subtract_edge(&h, e).unwrap();
            let got = eval_ground(&g, &Defs::new(), FUEL).unwrap();
            prop_assert_eq!(got, EvalResult::Heap(SignedHeap::from(&rest)), "{}", print_formula(&g));
        }
    }

    #[test]
    fn pushing_inversion_preserves_meaning(seed in any::<u64>(), size in 1usize..10) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut g = random_formula(&mut rng, &ground_leaves(), size);
        if rng.gen_bool(0.5) {
            g = Formula::inv(g);
        }
        let defs = Defs::new();
        prop_assert_eq!(
            eval_ground(&g, &defs, FUEL).unwrap(),
            eval_ground(&push_inversion(&g), &defs, FUEL).unwrap(),
            "{}", print_formula(&g)
        );
    }

    #[test]
    fn subheap_order_is_a_partial_order(seed in any::<u64>(), a in any::<u64>(), b in any::<u64>()) {
        let h = heap(seed);
        let drop = |h: &Heap, mask: u64| -> Heap {
            h.iter().enumerate().filter(|(i, _)| mask >> (i % 64) & 1 == 1).map(|(_, e)| e.clone()).collect()
        };
        let h1 = drop(&h, a);
        let h2 = drop(&h1, b);
        prop_assert!(leq(&h, &h));
        prop_assert!(leq(&h2, &h1) && leq(&h1, &h));
        prop_assert!(leq(&h2, &h));
        let other = heap(a);
        prop_assert_eq!(leq(&h, &other) && leq(&other, &h), h == other);
    }

    #[test]
    fn mixed_sign_chains_are_order_independent(seed in any::<u64>(), n in 1usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let names = ["a", "b", "c"];
        let mut ops: Vec<SignedHeap> = (0..n)
            .map(|_| {
                let k = rng.gen_range(1..3);
                let edges: BTreeSet<Edge> = (0..k)
                    .map(|_| Edge::plain(names[rng.gen_range(0..3)], names[rng.gen_range(0..3)]))
                    .collect();
                let sign = if rng.gen_bool(0.3) { -1 } else { 1 };
                SignedHeap::from_entries(edges.into_iter().map(|e| (e, sign)))
            })
            .collect();
        let first = conjoin_chain(&ops);
        for _ in 0..6 {
            let i = rng.gen_range(0..n);
            let j = rng.gen_range(0..n);
            ops.swap(i, j);
            prop_assert_eq!(&conjoin_chain(&ops), &first);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn oracle_equivalence_is_an_equivalence(a in any::<u64>(), b in any::<u64>(), size in 1usize..5) {
        let leaves: Vec<Formula> =
            ["emp", "true", "true(a)", "a |-> b", "b |-> c", "ex y . y |-> a"].map(f).to_vec();
        let u = small();
        let defs = Defs::new();
        let eq = |x: &Formula, y: &Formula| oracle_equiv(x, y, &u, &defs, FUEL).unwrap();
        let g = formula(a, &leaves, size);
        let n = normalize(&g);
        let h = formula(b, &leaves, size);
        prop_assert!(eq(&g, &g));
        prop_assert_eq!(eq(&g, &h), eq(&h, &g));
        prop_assert!(eq(&g, &n));
        if eq(&n, &h) {
            prop_assert!(eq(&g, &h));
        }
    }
}
