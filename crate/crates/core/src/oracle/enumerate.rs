use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::UniverseSpec;
use crate::heap::{Atom, Edge, FieldLabel, Heap, Location, Value};
use crate::semantics::{HeapEdge, SignedHeapOf};

/// Target of a [`CompactEdge`]: an index into the universe's locations or
/// atoms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CompactTarget {
    Loc(u8),
    Atom(u8),
}

/// A small copyable edge over an indexed universe, for the exhaustive suites.
/// Label `0` is the plain label; named labels start at `1`. Ordering agrees
/// with the ordering of the [`Edge`]s they stand for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CompactEdge {
    pub source: u8,
    pub label: u8,
    pub target: CompactTarget,
}

impl HeapEdge for CompactEdge {
    type Vertex = u8;

    fn source(&self) -> u8 {
        self.source
    }

    fn target_vertex(&self) -> Option<u8> {
        match self.target {
            CompactTarget::Loc(l) => Some(l),
            CompactTarget::Atom(_) => None,
        }
    }

    fn conflicts_with(&self, other: &Self) -> bool {
        self.source == other.source
            && (self.label == other.label || (self.label == 0) != (other.label == 0))
    }
}

/// Index tables between a [`UniverseSpec`] and [`CompactEdge`]s. Names are
/// kept sorted so that compact and full edges order alike.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompactUniverse {
    locations: Vec<Location>,
    /// Named labels; compact label `i + 1` is `named[i]`.
    named: Vec<String>,
    has_eps: bool,
    atoms: Vec<Atom>,
}

impl CompactUniverse {
    /// Panics if the universe holds more than 255 locations, labels or atoms.
    pub fn new(u: &UniverseSpec) -> Self {
        let locations: BTreeSet<Location> = u.locations.iter().cloned().collect();
        let mut named = BTreeSet::new();
        let mut has_eps = false;
        for l in &u.labels {
            match l {
                FieldLabel::Eps => has_eps = true,
                FieldLabel::Named(n) => {
                    named.insert(n.clone());
                }
            }
        }
        let atoms: BTreeSet<Atom> = u.atoms.iter().copied().collect();
        assert!(
            locations.len() < 256 && named.len() < 255 && atoms.len() < 256,
            "universe too large for compact edges"
        );
        CompactUniverse {
            locations: locations.into_iter().collect(),
            named: named.into_iter().collect(),
            has_eps,
            atoms: atoms.into_iter().collect(),
        }
    }

    /// The same universe with extra atoms and labels, so that edges mentioning
    /// them can be represented. Enumeration still uses only the declared ones.
    pub(crate) fn extend(&mut self, labels: &BTreeSet<String>, atoms: &BTreeSet<Atom>) {
        let mut named: BTreeSet<String> = self.named.iter().cloned().collect();
        named.extend(labels.iter().cloned());
        let mut all: BTreeSet<Atom> = self.atoms.iter().copied().collect();
        all.extend(atoms.iter().copied());
        self.named = named.into_iter().collect();
        self.atoms = all.into_iter().collect();
    }

    pub fn locations(&self) -> &[Location] {
        &self.locations
    }

    pub fn location_index(&self, l: &Location) -> Option<u8> {
        self.locations.binary_search(l).ok().map(|i| i as u8)
    }

    pub fn label_index(&self, l: &FieldLabel) -> Option<u8> {
        match l {
            FieldLabel::Eps => Some(0),
            FieldLabel::Named(n) => self.named.binary_search(n).ok().map(|i| i as u8 + 1),
        }
    }

    pub fn target_index(&self, v: &Value) -> Option<CompactTarget> {
        match v {
            Value::Loc(l) => self.location_index(l).map(CompactTarget::Loc),
            Value::Atom(a) => self
                .atoms
                .binary_search(a)
                .ok()
                .map(|i| CompactTarget::Atom(i as u8)),
        }
    }

    pub fn compact(&self, e: &Edge) -> Option<CompactEdge> {
        Some(CompactEdge {
            source: self.location_index(&e.source)?,
            label: self.label_index(&e.label)?,
            target: self.target_index(&e.target)?,
        })
    }

    pub fn expand(&self, e: &CompactEdge) -> Edge {
        let label = match e.label {
            0 => FieldLabel::Eps,
            i => FieldLabel::Named(self.named[i as usize - 1].clone()),
        };
        let target = match e.target {
            CompactTarget::Loc(i) => Value::Loc(self.locations[i as usize].clone()),
            CompactTarget::Atom(i) => Value::Atom(self.atoms[i as usize]),
        };
        Edge::new(self.locations[e.source as usize].clone(), label, target)
    }

    pub fn expand_heap(&self, edges: &[CompactEdge]) -> Heap {
        edges.iter().map(|e| self.expand(e)).collect()
    }

    pub fn expand_signed(&self, h: &SignedHeapOf<CompactEdge>) -> SignedHeapOf<Edge> {
        SignedHeapOf::from_entries(h.entries().iter().map(|(e, m)| (self.expand(e), *m)))
    }

    pub fn compact_signed(&self, h: &SignedHeapOf<Edge>) -> Option<SignedHeapOf<CompactEdge>> {
        let entries: Option<Vec<_>> = h
            .entries()
            .iter()
            .map(|(e, m)| self.compact(e).map(|c| (c, *m)))
            .collect();
        entries.map(SignedHeapOf::from_entries)
    }

    pub(crate) fn targets(&self) -> Vec<CompactTarget> {
        (0..self.locations.len() as u8)
            .map(CompactTarget::Loc)
            .chain((0..self.atoms.len() as u8).map(CompactTarget::Atom))
            .collect()
    }

    /// Every valid out-edge set of location `src`, each sorted.
    pub(crate) fn configs(&self, src: u8, targets: &[CompactTarget]) -> Vec<Vec<CompactEdge>> {
        let mut out = vec![Vec::new()];
        if self.has_eps {
            for &t in targets {
                out.push(vec![CompactEdge {
                    source: src,
                    label: 0,
                    target: t,
                }]);
            }
        }
        // objects: every non-empty set of named fields, each with a target
        let mut partial: Vec<Vec<CompactEdge>> = vec![Vec::new()];
        for label in 1..=self.named.len() as u8 {
            let mut next = Vec::new();
            for p in &partial {
                next.push(p.clone());
                for &t in targets {
                    let mut q = p.clone();
                    q.push(CompactEdge {
                        source: src,
                        label,
                        target: t,
                    });
                    next.push(q);
                }
            }
            partial = next;
        }
        out.extend(partial.into_iter().filter(|p| !p.is_empty()));
        out
    }
}

/// Calls `visit` once for every heap over `u` with at most `u.max_edges`
/// edges, as a sorted slice of compact edges. Order is depth-first, not
/// sorted.
pub fn for_each_compact_heap(u: &UniverseSpec, mut visit: impl FnMut(&[CompactEdge])) {
    let cu = CompactUniverse::new(u);
    let targets = cu.targets();
    let configs: Vec<Vec<Vec<CompactEdge>>> = (0..cu.locations.len() as u8)
        .map(|s| cu.configs(s, &targets))
        .collect();
    let mut cur = Vec::new();
    walk(&configs, 0, u.max_edges, &mut cur, &mut visit);
}

fn walk(
    configs: &[Vec<Vec<CompactEdge>>],
    at: usize,
    budget: usize,
    cur: &mut Vec<CompactEdge>,
    visit: &mut impl FnMut(&[CompactEdge]),
) {
    if at == configs.len() {
        visit(cur);
        return;
    }
    for c in &configs[at] {
        if c.len() > budget {
            continue;
        }
        cur.extend_from_slice(c);
        walk(configs, at + 1, budget - c.len(), cur, visit);
        cur.truncate(cur.len() - c.len());
    }
}

/// All heaps over `u` as compact edge lists, ordered by size and then
/// lexicographically.
pub fn compact_heaps(u: &UniverseSpec) -> Vec<Vec<CompactEdge>> {
    let mut all = Vec::new();
    for_each_compact_heap(u, |h| all.push(h.to_vec()));
    all.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    all
}

/// Every heap over `u` satisfying source uniqueness and label discipline
/// with at most `u.max_edges` edges, each exactly once, ordered by size and
/// then lexicographically by edge list.
pub fn enumerate_heaps(u: &UniverseSpec) -> impl Iterator<Item = Heap> {
    let cu = CompactUniverse::new(u);
    compact_heaps(u)
        .into_iter()
        .map(move |h| cu.expand_heap(&h))
}

/// Number of heaps [`enumerate_heaps`] yields, without enumerating them.
pub fn heap_count(u: &UniverseSpec) -> u128 {
    weighted_heap_count(u, 1)
}

/// Sum over the heaps of `u` of `weight` to the power of their edge count,
/// saturating.
pub(crate) fn weighted_heap_count(u: &UniverseSpec, weight: u128) -> u128 {
    let cu = CompactUniverse::new(u);
    let t = (cu.locations.len() + cu.atoms.len()) as u128;
    let cap = u
        .max_edges
        .min(cu.locations.len() * (cu.named.len().max(1)));
    // per-location generating polynomial in the number of edges
    let mut per = vec![0u128; cu.named.len().max(1) + 1];
    per[0] = 1;
    if cu.has_eps {
        per[1] += t;
    }
    let mut binom = 1u128;
    for (k, slot) in per.iter_mut().enumerate().skip(1).take(cu.named.len()) {
        binom = binom * (cu.named.len() - k + 1) as u128 / k as u128;
        *slot = slot.saturating_add(binom.saturating_mul(t.saturating_pow(k as u32)));
    }
    let mut total = vec![0u128; cap + 1];
    total[0] = 1;
    for _ in 0..cu.locations.len() {
        let mut next = vec![0u128; cap + 1];
        for (i, a) in total.iter().enumerate() {
            for (j, b) in per.iter().enumerate() {
                if i + j <= cap {
                    next[i + j] = next[i + j].saturating_add(a.saturating_mul(*b));
                }
            }
        }
        total = next;
    }
    total.iter().enumerate().fold(0u128, |acc, (k, c)| {
        acc.saturating_add(c.saturating_mul(weight.saturating_pow(k as u32)))
    })
}

/// A deterministic pseudo-random heap over `u`. Every heap `enumerate_heaps`
/// yields has positive probability.
pub fn random_heap(u: &UniverseSpec, seed: u64) -> Heap {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_heap_with(u, &mut rng)
}

pub fn random_heap_with(u: &UniverseSpec, rng: &mut impl Rng) -> Heap {
    let cu = CompactUniverse::new(u);
    let targets = cu.targets();
    let mut order: Vec<u8> = (0..cu.locations.len() as u8).collect();
    order.shuffle(rng);
    let mut budget = u.max_edges;
    let mut edges = Vec::new();
    for src in order {
        let fitting: Vec<Vec<CompactEdge>> = cu
            .configs(src, &targets)
            .into_iter()
            .filter(|c| c.len() <= budget)
            .collect();
        // half the time leave the location out, so sparse heaps are common
        let pick = if rng.gen_bool(0.5) {
            &fitting[0]
        } else {
            &fitting[rng.gen_range(0..fitting.len())]
        };
        budget -= pick.len();
        edges.extend_from_slice(pick);
    }
    cu.expand_heap(&edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heap::validate_structure;

    fn universe(locs: &[&str], labels: &[&str], atoms: &[Atom], max_edges: usize) -> UniverseSpec {
        UniverseSpec {
            locations: locs.iter().map(|l| Location::new(*l)).collect(),
            labels: labels
                .iter()
                .map(|l| {
                    if *l == "eps" {
                        FieldLabel::Eps
                    } else {
                        FieldLabel::named(*l)
                    }
                })
                .collect(),
            atoms: atoms.to_vec(),
            max_edges,
        }
    }

    /// Brute force: all subsets of all possible edges, filtered by validity.
    fn brute_force(u: &UniverseSpec) -> BTreeSet<Heap> {
        let mut possible = Vec::new();
        let values: Vec<Value> = u.values();
        for s in &u.locations {
            for l in &u.labels {
                for v in &values {
                    possible.push(Edge::new(s.clone(), l.clone(), v.clone()));
                }
            }
        }
        assert!(possible.len() <= 20);
        let mut out = BTreeSet::new();
        for mask in 0u32..(1 << possible.len()) {
            if mask.count_ones() as usize > u.max_edges {
                continue;
            }
            let h: Heap = (0..possible.len())
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| possible[i].clone())
                .collect();
            if validate_structure(&h).is_valid() {
                out.insert(h);
            }
        }
        out
    }

    #[test]
    fn single_location_counts() {
        let u = universe(&["a"], &["eps"], &[Atom::Nil], 1);
        let hs: Vec<Heap> = enumerate_heaps(&u).collect();
        assert_eq!(hs.len(), 3);
        assert_eq!(hs[0], Heap::new());
        let zero = universe(&["a", "b"], &["eps", "f"], &[Atom::Nil], 0);
        assert_eq!(
            enumerate_heaps(&zero).collect::<Vec<_>>(),
            vec![Heap::new()]
        );
    }

    #[test]
    fn two_plain_locations_give_nine() {
        let u = universe(&["a", "b"], &["eps"], &[], usize::MAX);
        assert_eq!(enumerate_heaps(&u).count(), 9);
    }

    #[test]
    fn matches_brute_force_on_small_universes() {
        let cases = [
            universe(&["a", "b"], &["eps", "f"], &[Atom::Nil], usize::MAX),
            universe(&["a", "b"], &["eps", "f", "g"], &[], 3),
            universe(&["a", "b", "c"], &["f"], &[], usize::MAX),
            universe(&["a"], &["eps", "f", "g"], &[Atom::Nil, Atom::Int(1)], 2),
        ];
        for u in cases {
            let listed: Vec<Heap> = enumerate_heaps(&u).collect();
            let set: BTreeSet<Heap> = listed.iter().cloned().collect();
            assert_eq!(set.len(), listed.len(), "duplicates in {u}");
            assert_eq!(set, brute_force(&u), "universe {u}");
            assert_eq!(heap_count(&u), listed.len() as u128);
        }
    }

    #[test]
    fn order_is_by_size_then_edges() {
        let u = universe(&["a", "b"], &["eps", "f"], &[Atom::Nil], 3);
        let hs: Vec<Heap> = enumerate_heaps(&u).collect();
        for w in hs.windows(2) {
            let key = |h: &Heap| (h.len(), h.iter().cloned().collect::<Vec<_>>());
            assert!(key(&w[0]) < key(&w[1]));
        }
    }

    #[test]
    fn compact_order_matches_edge_order() {
        let u = UniverseSpec::default();
        let cu = CompactUniverse::new(&u);
        let hs = compact_heaps(&u);
        let singles: Vec<&Vec<CompactEdge>> = hs.iter().filter(|h| h.len() == 1).collect();
        for w in singles.windows(2) {
            assert!(cu.expand(&w[0][0]) < cu.expand(&w[1][0]));
        }
        for h in &hs {
            for e in h {
                assert_eq!(cu.compact(&cu.expand(e)), Some(*e));
            }
        }
    }

    #[test]
    fn random_heaps_are_deterministic_and_valid() {
        let u = UniverseSpec::default();
        assert_eq!(random_heap(&u, 0), random_heap(&u, 0));
        for seed in 0..1000 {
            let h = random_heap(&u, seed);
            assert!(validate_structure(&h).is_valid());
            assert!(h.len() <= u.max_edges);
        }
    }

    #[test]
    fn random_heaps_cover_a_small_universe() {
        let u = universe(&["a", "b"], &["eps"], &[], usize::MAX);
        let support: BTreeSet<Heap> = enumerate_heaps(&u).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let seen: BTreeSet<Heap> = (0..10_000)
            .map(|_| random_heap_with(&u, &mut rng))
            .collect();
        assert_eq!(seen, support);
    }
}
