use std::cmp::Ordering;
use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::hash::Hash;

use crate::heap::{Edge, Heap, Location};

/// What the algebra needs to know about an edge: its endpoints as graph
/// vertices and which pairs of edges may not coexist in one heap.
pub trait HeapEdge: Clone + Ord + Hash + fmt::Debug {
    type Vertex: Clone + Ord + Hash + fmt::Debug;

    fn source(&self) -> Self::Vertex;

    /// `None` for atom targets, which are not vertices.
    fn target_vertex(&self) -> Option<Self::Vertex>;

    /// Same cell, or a plain pointer next to a field of the same source.
    fn conflicts_with(&self, other: &Self) -> bool;
}

impl HeapEdge for Edge {
    type Vertex = Location;

    fn source(&self) -> Location {
        self.source.clone()
    }

    fn target_vertex(&self) -> Option<Location> {
        self.target_location().cloned()
    }

    fn conflicts_with(&self, other: &Edge) -> bool {
        Edge::conflicts_with(self, other)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sign {
    Pos,
    Neg,
}

/// An edge multiset with non-zero integer multiplicities.
///
/// Besides the entries it caches its vertex set and its *shape*: the sign of
/// a non-empty heap whose multiplicities are all `+1` or all `-1` and whose
/// edges are pairwise conflict-free. Only shaped heaps and `emp` take part in
/// `∘` and `∥`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SignedHeapOf<E: HeapEdge> {
    entries: Vec<(E, i32)>,
    vertices: Vec<E::Vertex>,
    shape: Option<Sign>,
}

impl<E: HeapEdge> Default for SignedHeapOf<E> {
    fn default() -> Self {
        SignedHeapOf {
            entries: Vec::new(),
            vertices: Vec::new(),
            shape: None,
        }
    }
}

impl<E: HeapEdge> SignedHeapOf<E> {
    pub fn emp() -> Self {
        Self::default()
    }

    /// Builds from arbitrary entries, summing repeats and dropping zeros.
    pub fn from_entries(entries: impl IntoIterator<Item = (E, i32)>) -> Self {
        let mut acc: BTreeMap<E, i32> = BTreeMap::new();
        for (e, m) in entries {
            *acc.entry(e).or_insert(0) += m;
        }
        Self::from_sorted(acc.into_iter().filter(|(_, m)| *m != 0).collect())
    }

    /// Every edge with multiplicity `+1`.
    pub fn positive(edges: impl IntoIterator<Item = E>) -> Self {
        Self::from_entries(edges.into_iter().map(|e| (e, 1)))
    }

    pub fn single(e: E) -> Self {
        Self::from_sorted(vec![(e, 1)])
    }

    fn from_sorted(entries: Vec<(E, i32)>) -> Self {
        let mut vertices = Vec::with_capacity(entries.len() * 2);
        for (e, _) in &entries {
            vertices.push(e.source());
            if let Some(t) = e.target_vertex() {
                vertices.push(t);
            }
        }
        vertices.sort();
        vertices.dedup();
        let shape = shape_of(&entries);
        SignedHeapOf {
            entries,
            vertices,
            shape,
        }
    }

    pub fn is_emp(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.is_emp()
    }

    /// Sorted by edge, no zero multiplicities.
    pub fn entries(&self) -> &[(E, i32)] {
        &self.entries
    }

    pub fn edges(&self) -> impl Iterator<Item = &E> {
        self.entries.iter().map(|(e, _)| e)
    }

    pub fn multiplicity(&self, e: &E) -> i32 {
        self.entries
            .binary_search_by(|(x, _)| x.cmp(e))
            .map(|i| self.entries[i].1)
            .unwrap_or(0)
    }

    /// Number of distinct edges.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn vertices(&self) -> &[E::Vertex] {
        &self.vertices
    }

    pub fn shape(&self) -> Option<Sign> {
        self.shape
    }

    /// All multiplicities are `+1` and no two edges conflict; `emp` included.
    pub fn is_plain_heap(&self) -> bool {
        self.is_emp() || self.shape == Some(Sign::Pos)
    }

    /// The formal inverse: every multiplicity negated.
    pub fn negate(&self) -> Self {
        SignedHeapOf {
            entries: self.entries.iter().map(|(e, m)| (e.clone(), -m)).collect(),
            vertices: self.vertices.clone(),
            shape: self.shape.map(|s| match s {
                Sign::Pos => Sign::Neg,
                Sign::Neg => Sign::Pos,
            }),
        }
    }

    /// Plain multiset addition, no connectivity checks.
    pub fn sum(&self, other: &Self) -> Self {
        let (a, b) = (&self.entries, &other.entries);
        let mut entries = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => {
                    entries.push(a[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    entries.push(b[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    let m = a[i].1 + b[j].1;
                    if m != 0 {
                        entries.push((a[i].0.clone(), m));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        entries.extend_from_slice(&a[i..]);
        entries.extend_from_slice(&b[j..]);
        Self::from_sorted(entries)
    }

    /// Union of two edge-disjoint heaps already known to form a shaped heap
    /// of sign `sign`.
    fn union_shaped(&self, other: &Self, sign: Sign) -> Self {
        let mut entries = Vec::with_capacity(self.len() + other.len());
        entries.extend_from_slice(&self.entries);
        entries.extend_from_slice(&other.entries);
        entries.sort_unstable_by(|x, y| x.0.cmp(&y.0));
        let mut vertices = Vec::with_capacity(self.vertices.len() + other.vertices.len());
        vertices.extend_from_slice(&self.vertices);
        vertices.extend_from_slice(&other.vertices);
        vertices.sort_unstable();
        vertices.dedup();
        SignedHeapOf {
            entries,
            vertices,
            shape: Some(sign),
        }
    }
}

fn shape_of<E: HeapEdge>(entries: &[(E, i32)]) -> Option<Sign> {
    let sign = match entries.first()?.1 {
        1 => Sign::Pos,
        -1 => Sign::Neg,
        _ => return None,
    };
    let m = if sign == Sign::Pos { 1 } else { -1 };
    if entries.iter().any(|(_, k)| *k != m) {
        return None;
    }
    for (i, (a, _)) in entries.iter().enumerate() {
        if entries[i + 1..].iter().any(|(b, _)| a.conflicts_with(b)) {
            return None;
        }
    }
    Some(sign)
}

/// Size of the intersection of two sorted, deduplicated slices, stopping
/// early once it exceeds `cap`. Returns the last common element seen.
fn common<'a, V: Ord>(a: &'a [V], b: &[V], cap: usize) -> (usize, Option<&'a V>) {
    let (mut i, mut j, mut n, mut last) = (0, 0, 0, None);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
            Ordering::Equal => {
                n += 1;
                last = Some(&a[i]);
                if n > cap {
                    break;
                }
                i += 1;
                j += 1;
            }
        }
    }
    (n, last)
}

/// Result of evaluating a heap term. `False` is an ordinary value.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EvalResultOf<E: HeapEdge> {
    Heap(SignedHeapOf<E>),
    False,
}

impl<E: HeapEdge> EvalResultOf<E> {
    pub fn is_false(&self) -> bool {
        matches!(self, EvalResultOf::False)
    }

    pub fn heap(&self) -> Option<&SignedHeapOf<E>> {
        match self {
            EvalResultOf::Heap(h) => Some(h),
            EvalResultOf::False => None,
        }
    }

    pub fn into_heap(self) -> Option<SignedHeapOf<E>> {
        match self {
            EvalResultOf::Heap(h) => Some(h),
            EvalResultOf::False => None,
        }
    }

    pub fn negate(&self) -> Self {
        match self {
            EvalResultOf::Heap(h) => EvalResultOf::Heap(h.negate()),
            EvalResultOf::False => EvalResultOf::False,
        }
    }
}

/// Strict conjunction `h1 ∘ h2`.
///
/// `emp` is the identity. Two heaps of the same sign connect iff their vertex
/// sets meet in exactly one vertex and no cells clash there. A positive and a
/// negative heap cancel their common edges; what remains must lie entirely on
/// one side and touch the cancelled part in exactly one vertex.
pub fn conjoin<E: HeapEdge>(h1: &SignedHeapOf<E>, h2: &SignedHeapOf<E>) -> EvalResultOf<E> {
    if h1.is_emp() {
        return EvalResultOf::Heap(h2.clone());
    }
    if h2.is_emp() {
        return EvalResultOf::Heap(h1.clone());
    }
    let (Some(s1), Some(s2)) = (h1.shape, h2.shape) else {
        return EvalResultOf::False;
    };
    if s1 == s2 {
        let (n, joint) = common(&h1.vertices, &h2.vertices, 1);
        if n != 1 {
            return EvalResultOf::False;
        }
        let joint = joint.expect("one common vertex");
        let at_joint = |h: &SignedHeapOf<E>| -> Vec<E> {
            h.edges()
                .filter(|e| &e.source() == joint)
                .cloned()
                .collect()
        };
        let (l, r) = (at_joint(h1), at_joint(h2));
        if l.iter().any(|a| r.iter().any(|b| a.conflicts_with(b))) {
            return EvalResultOf::False;
        }
        // conflicts need a common source, so the union is a shaped heap
        return EvalResultOf::Heap(h1.union_shaped(h2, s1));
    }

    let (pos, neg) = if s1 == Sign::Pos { (h1, h2) } else { (h2, h1) };
    let cancelled: Vec<E> = pos
        .edges()
        .filter(|e| neg.multiplicity(e) != 0)
        .cloned()
        .collect();
    let left_pos = pos.len() - cancelled.len();
    let left_neg = neg.len() - cancelled.len();
    if left_pos > 0 && left_neg > 0 {
        return EvalResultOf::False;
    }
    if left_pos == 0 && left_neg == 0 {
        return EvalResultOf::Heap(SignedHeapOf::emp());
    }
    let rest = h1.sum(h2);
    let c = SignedHeapOf::positive(cancelled);
    if common(&rest.vertices, &c.vertices, 1).0 == 1 {
        EvalResultOf::Heap(rest)
    } else {
        EvalResultOf::False
    }
}

/// Independent union `h1 ∥ h2`: same sign, no shared vertex; `emp` is the
/// identity.
pub fn disjoin<E: HeapEdge>(h1: &SignedHeapOf<E>, h2: &SignedHeapOf<E>) -> EvalResultOf<E> {
    if h1.is_emp() {
        return EvalResultOf::Heap(h2.clone());
    }
    if h2.is_emp() {
        return EvalResultOf::Heap(h1.clone());
    }
    match (h1.shape, h2.shape) {
        (Some(a), Some(b)) if a == b && common(&h1.vertices, &h2.vertices, 0).0 == 0 => {
            EvalResultOf::Heap(h1.union_shaped(h2, a))
        }
        _ => EvalResultOf::False,
    }
}

/// Folds `∘` over the operands in whatever order lets every step connect.
///
/// Whenever some completion order exists, every successful order ends in the
/// multiset sum of the operands, so the result does not depend on the order
/// found. Same-sign operands are consumed greedily: the number of vertices
/// each step shares with the accumulator always sums to the same total, so a
/// connected order that ever shares two vertices rules out every order.
/// Mixed signs fall back to a memoised search over subsets.
pub fn conjoin_chain<E: HeapEdge>(hs: &[SignedHeapOf<E>]) -> EvalResultOf<E> {
    let ops: Vec<&SignedHeapOf<E>> = hs.iter().filter(|h| !h.is_emp()).collect();
    match ops.len() {
        0 => return EvalResultOf::Heap(SignedHeapOf::emp()),
        1 => return EvalResultOf::Heap(ops[0].clone()),
        _ => {}
    }
    let Some(first) = ops[0].shape else {
        return EvalResultOf::False;
    };
    if ops.iter().any(|h| h.shape.is_none()) {
        return EvalResultOf::False;
    }
    if ops.iter().all(|h| h.shape == Some(first)) || ops.len() > 128 {
        return greedy_chain(&ops);
    }

    let full: u128 = if ops.len() == 128 {
        u128::MAX
    } else {
        (1u128 << ops.len()) - 1
    };
    let mut failed = HashSet::new();
    match search(&ops, SignedHeapOf::emp(), 0, full, &mut failed) {
        Some(h) => EvalResultOf::Heap(h),
        None => EvalResultOf::False,
    }
}

fn greedy_chain<E: HeapEdge>(ops: &[&SignedHeapOf<E>]) -> EvalResultOf<E> {
    let mut acc = ops[0].clone();
    let mut rest: Vec<&SignedHeapOf<E>> = ops[1..].to_vec();
    while !rest.is_empty() {
        let step = rest
            .iter()
            .enumerate()
            .find_map(|(i, h)| conjoin(&acc, h).into_heap().map(|r| (i, r)));
        match step {
            Some((i, r)) => {
                acc = r;
                rest.remove(i);
            }
            None => return EvalResultOf::False,
        }
    }
    EvalResultOf::Heap(acc)
}

fn search<E: HeapEdge>(
    ops: &[&SignedHeapOf<E>],
    acc: SignedHeapOf<E>,
    used: u128,
    full: u128,
    failed: &mut HashSet<u128>,
) -> Option<SignedHeapOf<E>> {
    if used == full {
        return Some(acc);
    }
    if failed.contains(&used) {
        return None;
    }
    for (i, h) in ops.iter().enumerate() {
        let bit = 1u128 << i;
        if used & bit != 0 {
            continue;
        }
        if let EvalResultOf::Heap(next) = conjoin(&acc, h) {
            if let Some(done) = search(ops, next, used | bit, full, failed) {
                return Some(done);
            }
        }
    }
    failed.insert(used);
    None
}

impl SignedHeapOf<Edge> {
    /// The underlying heap when every multiplicity is `+1`.
    pub fn to_heap(&self) -> Option<Heap> {
        self.entries
            .iter()
            .all(|(_, m)| *m == 1)
            .then(|| self.edges().cloned().collect())
    }
}

impl From<&Heap> for SignedHeapOf<Edge> {
    fn from(h: &Heap) -> Self {
        SignedHeapOf::positive(h.iter().cloned())
    }
}

impl From<Heap> for SignedHeapOf<Edge> {
    fn from(h: Heap) -> Self {
        SignedHeapOf::from(&h)
    }
}

impl<E: HeapEdge + fmt::Display> fmt::Display for SignedHeapOf<E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (e, m)) in self.entries.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            match m {
                1 => write!(f, "{e}")?,
                -1 => write!(f, "-({e})")?,
                m => write!(f, "{m}({e})")?,
            }
        }
        f.write_str("}")
    }
}

impl<E: HeapEdge + fmt::Display> fmt::Display for EvalResultOf<E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalResultOf::Heap(h) => h.fmt(f),
            EvalResultOf::False => f.write_str("false"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type SH = SignedHeapOf<Edge>;

    fn h(edges: &[(&str, &str)]) -> SH {
        SH::positive(edges.iter().map(|(a, b)| Edge::plain(a, b)))
    }

    fn ok(h: SH) -> EvalResultOf<Edge> {
        EvalResultOf::Heap(h)
    }

    #[test]
    fn same_cell_is_false() {
        assert_eq!(
            conjoin(&h(&[("a", "b")]), &h(&[("a", "d")])),
            EvalResultOf::False
        );
        assert_eq!(
            conjoin(&h(&[("a", "b")]), &h(&[("a", "b")])),
            EvalResultOf::False
        );
    }

    #[test]
    fn emp_is_the_identity() {
        let ab = h(&[("a", "b")]);
        assert_eq!(conjoin(&ab, &SH::emp()), ok(ab.clone()));
        assert_eq!(conjoin(&SH::emp(), &ab), ok(ab.clone()));
        assert_eq!(disjoin(&ab, &SH::emp()), ok(ab));
    }

    #[test]
    fn exactly_one_joining_point() {
        assert_eq!(
            conjoin(&h(&[("a", "b")]), &h(&[("c", "d")])),
            EvalResultOf::False
        );
        assert_eq!(
            conjoin(&h(&[("a", "b")]), &h(&[("b", "c")])),
            ok(h(&[("a", "b"), ("b", "c")]))
        );
        // two joining points
        assert_eq!(
            conjoin(&h(&[("a", "b"), ("b", "c")]), &h(&[("c", "a")])),
            EvalResultOf::False
        );
    }

    #[test]
    fn atoms_do_not_join() {
        assert_eq!(
            conjoin(&h(&[("a", "nil")]), &h(&[("b", "nil")])),
            EvalResultOf::False
        );
    }

    #[test]
    fn mixed_cell_at_joint_is_false() {
        let plain = h(&[("a", "b")]);
        let field = SH::single(Edge::field("a", "f", "c"));
        assert_eq!(conjoin(&plain, &field), EvalResultOf::False);
        let other = SH::single(Edge::field("a", "g", "d"));
        assert!(!conjoin(&field, &other).is_false());
    }

    #[test]
    fn inverse_cancels() {
        let g = h(&[("a", "b"), ("b", "c")]);
        assert_eq!(conjoin(&g, &g.negate()), ok(SH::emp()));
        assert_eq!(conjoin(&g.negate(), &g), ok(SH::emp()));
    }

    #[test]
    fn partial_cancellation_keeps_a_connected_rest() {
        let g = h(&[("a", "b"), ("b", "c")]);
        let bc = h(&[("b", "c")]);
        assert_eq!(conjoin(&g, &bc.negate()), ok(h(&[("a", "b")])));
        // removing a bridge from the middle leaves two pieces
        let chain = h(&[("a", "b"), ("b", "c"), ("c", "d")]);
        assert_eq!(conjoin(&chain, &bc.negate()), EvalResultOf::False);
        // nothing in common
        assert_eq!(conjoin(&g, &h(&[("x", "y")]).negate()), EvalResultOf::False);
    }

    #[test]
    fn disjoin_requires_independence() {
        assert_eq!(
            disjoin(&h(&[("a", "b")]), &h(&[("c", "d")])),
            ok(h(&[("a", "b"), ("c", "d")]))
        );
        assert_eq!(
            disjoin(&h(&[("a", "b")]), &h(&[("b", "c")])),
            EvalResultOf::False
        );
        assert_eq!(
            disjoin(&h(&[("a", "b")]), &h(&[("c", "d")]).negate()),
            EvalResultOf::False
        );
    }

    #[test]
    fn chains() {
        let chain = [h(&[("b", "c")]), h(&[("a", "b")]), h(&[("c", "d")])];
        assert_eq!(
            conjoin_chain(&chain),
            ok(h(&[("a", "b"), ("b", "c"), ("c", "d")]))
        );
        let triangle = [h(&[("a", "b")]), h(&[("b", "c")]), h(&[("c", "a")])];
        assert_eq!(conjoin_chain(&triangle), EvalResultOf::False);
        assert_eq!(conjoin_chain(&[SH::emp()]), ok(SH::emp()));
    }

    #[test]
    fn mixed_chain_searches_orders() {
        // {a->b} first cannot absorb -{b->c} before {b->c} arrives
        let ops = [
            h(&[("a", "b")]),
            h(&[("b", "c")]).negate(),
            h(&[("b", "c")]),
        ];
        assert_eq!(conjoin_chain(&ops), ok(h(&[("a", "b")])));
    }

    #[test]
    fn display_marks_negative_entries() {
        let g = SH::from_entries([(Edge::plain("a", "b"), 1), (Edge::field("c", "f", "d"), -1)]);
        assert_eq!(g.to_string(), "{a -> b, -(c .f -> d)}");
        assert_eq!(EvalResultOf::<Edge>::False.to_string(), "false");
    }

    #[test]
    fn mixed_chains_succeed_whenever_some_order_does() {
        let names = ["a", "b", "c"];
        let edges: Vec<Edge> = names
            .iter()
            .flat_map(|a| names.iter().map(move |b| Edge::plain(a, b)))
            .collect();
        let mut ops: Vec<SH> = Vec::new();
        for (i, e) in edges.iter().enumerate() {
            for sign in [1, -1] {
                ops.push(SH::from_entries([(e.clone(), sign)]));
                for d in edges[i + 1..].iter().filter(|d| !e.conflicts_with(d)) {
                    ops.push(SH::from_entries([(e.clone(), sign), (d.clone(), sign)]));
                }
            }
        }
        let fold = |xs: [&SH; 3]| {
            let mut acc = SH::emp();
            for x in xs {
                acc = conjoin(&acc, x).into_heap()?;
            }
            Some(acc)
        };
        for x in &ops {
            for y in &ops {
                for z in &ops {
                    let orders = [
                        [x, y, z],
                        [x, z, y],
                        [y, x, z],
                        [y, z, x],
                        [z, x, y],
                        [z, y, x],
                    ];
                    let want = orders.into_iter().find_map(fold);
                    let got = conjoin_chain(&[x.clone(), y.clone(), z.clone()]).into_heap();
                    assert_eq!(got, want, "{x} {y} {z}");
                }
            }
        }
    }
}
