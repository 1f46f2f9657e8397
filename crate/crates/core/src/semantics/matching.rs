use std::cell::Cell;
use std::collections::{BTreeMap, BTreeSet};

use super::eval::desugar;
use super::SemanticsError;
use crate::formula::{Defs, Formula, Term};
use crate::heap::{Edge, Heap, Location, StackEnv, Value};

/// One way a formula describes a heap: values for its free symbols and the
/// edges it accounts for.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Binding {
    pub env: BTreeMap<String, Value>,
    pub claimed: Heap,
}

/// Largest heap [`match_formula`] accepts.
pub const MAX_MATCH_EDGES: usize = 64;

/// All bindings under which `f` denotes exactly `h`.
///
/// Free symbols of `f` are pattern variables over locations; those bound in
/// `s` are fixed to their roots. Existential variables and predicate
/// parameters may also take atom values. Operands of `*` and `+` are matched
/// as sets, so `true` and `true(a)` may claim whichever leftover edges make
/// the whole formula fit, regardless of where they sit in the chain.
pub fn match_formula(
    f: &Formula,
    h: &Heap,
    s: &StackEnv,
    defs: &Defs,
    fuel: usize,
) -> Result<BTreeSet<Binding>, SemanticsError> {
    if f.contains_inv() {
        return Err(SemanticsError::InversionNotMatchable);
    }
    if h.len() > MAX_MATCH_EDGES {
        return Err(SemanticsError::HeapTooLarge(h.len()));
    }
    if !h.is_well_formed() {
        return Err(SemanticsError::MalformedHeap(h.to_string()));
    }
    let m = Matcher::new(h, defs);
    let free = f.free_symbols();
    let mut env = Env::new();
    for (var, loc) in s.roots() {
        if free.contains(var) {
            env.insert(var.clone(), Value::Loc(loc.clone()));
        }
    }
    let g = m.prepare(f);
    let full = m.full();
    let mut out = BTreeSet::new();
    for (env, claimed) in m.go(&g, full, &env, fuel)? {
        if claimed != full {
            continue;
        }
        out.insert(Binding {
            env: env.into_iter().filter(|(k, _)| free.contains(k)).collect(),
            claimed: h.clone(),
        });
    }
    Ok(out)
}

type Env = BTreeMap<String, Value>;
type Mask = u64;

struct Matcher<'a> {
    edges: Vec<&'a Edge>,
    /// Vertex set of each edge, as bits over `locations`.
    vmask: Vec<u128>,
    locations: Vec<Location>,
    defs: &'a Defs,
    counter: Cell<usize>,
}

fn is_pattern_var(name: &str) -> bool {
    !name.contains('#')
}

impl<'a> Matcher<'a> {
    fn new(h: &'a Heap, defs: &'a Defs) -> Self {
        let edges: Vec<&Edge> = h.iter().collect();
        let locations: Vec<Location> = h.vertices().into_iter().collect();
        let idx = |l: &Location| locations.binary_search(l).expect("vertex of h");
        let vmask = edges
            .iter()
            .map(|e| {
                let mut m = 1u128 << idx(&e.source);
                if let Some(t) = e.target_location() {
                    m |= 1u128 << idx(t);
                }
                m
            })
            .collect();
        Matcher {
            edges,
            vmask,
            locations,
            defs,
            counter: Cell::new(0),
        }
    }

    fn full(&self) -> Mask {
        if self.edges.len() == 64 {
            Mask::MAX
        } else {
            (1 << self.edges.len()) - 1
        }
    }

    fn vertices_of(&self, m: Mask) -> u128 {
        bits(m).fold(0, |acc, i| acc | self.vmask[i])
    }

    /// Desugars paths and gives every binder a unique internal name, which
    /// contains `#` and so can never clash with a user symbol.
    fn prepare(&self, f: &Formula) -> Formula {
        self.rename_binders(&desugar(f))
    }

    fn rename_binders(&self, f: &Formula) -> Formula {
        match f {
            Formula::Exists(v, body) => {
                let n = self.counter.get() + 1;
                self.counter.set(n);
                let stem = v.split('#').next().unwrap_or(v);
                let fresh = format!("{stem}#{n}");
                Formula::exists(
                    fresh.clone(),
                    self.rename_binders(&body.rename_free(v, &fresh)),
                )
            }
            Formula::Conj(l, r) => Formula::conj(self.rename_binders(l), self.rename_binders(r)),
            Formula::Disj(l, r) => Formula::disj(self.rename_binders(l), self.rename_binders(r)),
            Formula::Inv(x) => Formula::inv(self.rename_binders(x)),
            _ => f.clone(),
        }
    }

    fn unify(&self, t: &Term, v: &Value, env: &mut Env) -> bool {
        match t {
            Term::Atom(a) => *v == Value::Atom(*a),
            Term::Sym(s) => match env.get(s) {
                Some(b) => b == v,
                None if is_pattern_var(s) && v.as_loc().is_none() => false,
                None => {
                    env.insert(s.clone(), v.clone());
                    true
                }
            },
            Term::Path(..) => false,
        }
    }

    fn go(
        &self,
        f: &Formula,
        avail: Mask,
        env: &Env,
        fuel: usize,
    ) -> Result<Vec<(Env, Mask)>, SemanticsError> {
        let mut out = Vec::new();
        match f {
            Formula::Emp => out.push((env.clone(), 0)),
            Formula::False => {}
            Formula::True => {
                for sub in submasks(avail) {
                    out.push((env.clone(), sub));
                }
            }
            Formula::TrueOf(t) => {
                let resolved = match t {
                    Term::Sym(s) => env.get(s).cloned(),
                    Term::Atom(a) => Some(Value::Atom(*a)),
                    Term::Path(..) => return Ok(out),
                };
                match resolved {
                    Some(v) => {
                        for sub in submasks(self.sourced_at(avail, v.as_loc())) {
                            out.push((env.clone(), sub));
                        }
                    }
                    None => {
                        // claims nothing for any location outside the heap
                        out.push((env.clone(), 0));
                        for l in &self.locations {
                            let owned = self.sourced_at(avail, Some(l));
                            if owned == 0 {
                                continue;
                            }
                            let mut e = env.clone();
                            if !self.unify(t, &Value::Loc(l.clone()), &mut e) {
                                continue;
                            }
                            for sub in submasks(owned).filter(|m| *m != 0) {
                                out.push((e.clone(), sub));
                            }
                        }
                    }
                }
            }
            Formula::PointsTo {
                base,
                label,
                target,
            } => {
                for i in bits(avail) {
                    let edge = self.edges[i];
                    if edge.label != *label {
                        continue;
                    }
                    let mut e = env.clone();
                    if self.unify(base, &Value::Loc(edge.source.clone()), &mut e)
                        && self.unify(target, &edge.target, &mut e)
                    {
                        out.push((e, 1 << i));
                    }
                }
            }
            Formula::Conj(l, r) | Formula::Disj(l, r) => {
                let strict = matches!(f, Formula::Conj(..));
                for (e1, c1) in self.go(l, avail, env, fuel)? {
                    let v1 = self.vertices_of(c1);
                    for (e2, c2) in self.go(r, avail & !c1, &e1, fuel)? {
                        let shared = (v1 & self.vertices_of(c2)).count_ones();
                        let fits = if c1 == 0 || c2 == 0 {
                            true
                        } else if strict {
                            shared == 1
                        } else {
                            shared == 0
                        };
                        if fits {
                            out.push((e2, c1 | c2));
                        }
                    }
                }
            }
            Formula::Inv(_) => return Err(SemanticsError::InversionNotMatchable),
            Formula::Exists(v, body) => {
                for (mut e, c) in self.go(body, avail, env, fuel)? {
                    e.remove(v);
                    out.push((e, c));
                }
            }
            Formula::Call(name, args) => {
                let def = self
                    .defs
                    .get(name)
                    .ok_or_else(|| SemanticsError::UndefinedPredicate(name.clone()))?;
                if def.params.len() != args.len() {
                    return Err(SemanticsError::ArityMismatch {
                        pred: name.clone(),
                        given: args.len(),
                        expected: def.params.len(),
                    });
                }
                if fuel == 0 {
                    return Err(SemanticsError::FuelExhausted(name.clone()));
                }
                for clause in def.instantiate(args) {
                    let body = self.prepare(&clause);
                    out.extend(self.go(&body, avail, env, fuel - 1)?);
                }
            }
        }
        out.sort();
        out.dedup();
        Ok(out)
    }

    fn sourced_at(&self, avail: Mask, src: Option<&Location>) -> Mask {
        let Some(src) = src else { return 0 };
        bits(avail)
            .filter(|&i| &self.edges[i].source == src)
            .fold(0, |m, i| m | (1 << i))
    }
}

fn bits(m: Mask) -> impl Iterator<Item = usize> {
    (0..64).filter(move |i| m >> i & 1 == 1)
}

/// Every subset of `m`, including `0` and `m`.
fn submasks(m: Mask) -> impl Iterator<Item = Mask> {
    let mut next = Some(m);
    std::iter::from_fn(move || {
        let cur = next?;
        next = if cur == 0 { None } else { Some((cur - 1) & m) };
        Some(cur)
    })
}
