//! Undirected structure of a heap: components and bridge edges.
//!
//! The undirected vertex graph of a heap has one undirected edge per heap edge
//! whose target is a location different from its source. Self-loops and
//! atom-valued edges contribute their source vertex but no undirected edge.

use std::collections::{BTreeMap, BTreeSet};

use super::{Edge, Heap, Location};

struct VertexIndex<'h> {
    ids: BTreeMap<&'h Location, usize>,
}

impl<'h> VertexIndex<'h> {
    fn new(h: &'h Heap) -> Self {
        let mut ids = BTreeMap::new();
        for e in h.iter() {
            let n = ids.len();
            ids.entry(&e.source).or_insert(n);
            if let Some(t) = e.target_location() {
                let n = ids.len();
                ids.entry(t).or_insert(n);
            }
        }
        VertexIndex { ids }
    }

    fn id(&self, l: &Location) -> usize {
        self.ids[l]
    }
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Maximal undirected-connected sub-heaps, ordered by their smallest edge.
pub fn components(h: &Heap) -> Vec<Heap> {
    let index = VertexIndex::new(h);
    let mut parent: Vec<usize> = (0..index.ids.len()).collect();
    for e in h.iter() {
        if let Some(t) = e.target_location() {
            let a = find(&mut parent, index.id(&e.source));
            let b = find(&mut parent, index.id(t));
            parent[a] = b;
        }
    }
    let mut groups: BTreeMap<usize, Heap> = BTreeMap::new();
    let mut order: Vec<usize> = Vec::new();
    for e in h.iter() {
        let root = find(&mut parent, index.id(&e.source));
        let group = groups.entry(root).or_insert_with(|| {
            order.push(root);
            Heap::new()
        });
        group.insert(e.clone());
    }
    // edges are visited in ascending order, so first-seen order is ordering by smallest edge
    order
        .into_iter()
        .map(|r| groups.remove(&r).expect("group exists"))
        .collect()
}

pub fn component_count(h: &Heap) -> usize {
    components(h).len()
}

/// Edges whose removal disconnects their endpoints in the undirected vertex
/// graph. Parallel edges between the same pair of vertices are never bridges.
pub fn bridges(h: &Heap) -> BTreeSet<Edge> {
    let index = VertexIndex::new(h);
    let n = index.ids.len();
    let edges: Vec<&Edge> = h.iter().collect();
    // adjacency: (neighbour, edge id)
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (id, e) in edges.iter().enumerate() {
        if let Some(t) = e.target_location() {
            if *t != e.source {
                let (a, b) = (index.id(&e.source), index.id(t));
                adj[a].push((b, id));
                adj[b].push((a, id));
            }
        }
    }

    let mut disc: Vec<Option<usize>> = vec![None; n];
    let mut low = vec![usize::MAX; n];
    let mut clock = 0;
    let mut out = BTreeSet::new();

    for start in 0..n {
        if disc[start].is_some() {
            continue;
        }
        disc[start] = Some(clock);
        low[start] = clock;
        clock += 1;
        // frames: (vertex, edge id used to enter it, next adjacency position)
        let mut stack: Vec<(usize, Option<usize>, usize)> = vec![(start, None, 0)];
        while let Some(frame) = stack.last_mut() {
            let (v, via, pos) = *frame;
            if pos < adj[v].len() {
                frame.2 += 1;
                let (w, id) = adj[v][pos];
                if Some(id) == via {
                    continue;
                }
                match disc[w] {
                    Some(t) => low[v] = low[v].min(t),
                    None => {
                        disc[w] = Some(clock);
                        low[w] = clock;
                        clock += 1;
                        stack.push((w, Some(id), 0));
                    }
                }
            } else {
                stack.pop();
                if let Some(&(parent, _, _)) = stack.last() {
                    low[parent] = low[parent].min(low[v]);
                    if low[v] > disc[parent].expect("visited") {
                        out.insert(edges[via.expect("non-root has entry edge")].clone());
                    }
                }
            }
        }
    }
    out
}
