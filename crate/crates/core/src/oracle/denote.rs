use std::collections::{BTreeMap, BTreeSet};

use super::enumerate::{compact_heaps, CompactEdge, CompactUniverse};
use super::{OracleError, UniverseSpec};
use crate::formula::{Defs, Formula, Term};
use crate::heap::{Edge, FieldLabel, Location, Value};
use crate::semantics::{
    conjoin, desugar, disjoin, EvalResultOf, SemanticsError, SignedHeap, SignedHeapOf,
};

type Ch = SignedHeapOf<CompactEdge>;

/// Enumeration budget for [`oracle_equiv`]: heaps times symbol assignments.
pub const DEFAULT_BUDGET: u128 = 2_000_000;

/// A distinguishing model for two formulas.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    /// Locations assigned to the free symbols.
    pub env: BTreeMap<String, Location>,
    pub heap: SignedHeap,
    /// The heap is a model of the first formula (and not of the second).
    pub in_first: bool,
}

/// Set-valued meaning of formulas over a finite universe.
///
/// Each operator is lifted pointwise to sets: `A ∘ B` is every defined
/// `a ∘ b`, `A⁻¹` negates every member, `ex v` unions over the universe
/// values, and a call past the fuel limit denotes nothing. `true` stands for
/// every heap with at most `max_edges` edges, `true(a)` for every admissible
/// set of cells of `a`.
pub struct Denoter<'a> {
    cu: CompactUniverse,
    values: Vec<Value>,
    defs: &'a Defs,
    everything: Vec<Ch>,
    /// Admissible cell sets of each location, for `true(l)`.
    cells: Vec<Vec<Ch>>,
    max_edges: usize,
}

impl<'a> Denoter<'a> {
    /// `extra` formulas contribute labels and atoms that must be
    /// representable even if the universe does not enumerate them.
    pub fn new(u: &UniverseSpec, defs: &'a Defs, extra: &[&Formula]) -> Self {
        let mut cu = CompactUniverse::new(u);
        let (mut labels, mut atoms) = (BTreeSet::new(), BTreeSet::new());
        let mut collect = |f: &Formula| {
            f.visit(&mut |g| match g {
                Formula::PointsTo {
                    label,
                    target,
                    base,
                } => {
                    if let FieldLabel::Named(n) = label {
                        labels.insert(n.clone());
                    }
                    let mut b = base;
                    while let Term::Path(inner, field) = b {
                        labels.insert(field.clone());
                        b = inner;
                    }
                    if let Term::Atom(a) = target {
                        atoms.insert(*a);
                    }
                }
                Formula::Call(_, args) => {
                    for a in args {
                        if let Term::Atom(x) = a {
                            atoms.insert(*x);
                        }
                    }
                }
                _ => {}
            })
        };
        for f in extra {
            collect(f);
        }
        for d in defs.values() {
            for c in &d.clauses {
                collect(c);
            }
        }
        cu.extend(&labels, &atoms);
        // enumeration indexes the declared universe; recode into `cu`
        let base = CompactUniverse::new(u);
        let recode = |edges: &[CompactEdge]| {
            Ch::positive(
                edges
                    .iter()
                    .map(|e| cu.compact(&base.expand(e)).expect("declared edge")),
            )
        };
        let everything = compact_heaps(u).iter().map(|h| recode(h)).collect();
        let targets = base.targets();
        let cells = (0..base.locations().len() as u8)
            .map(|src| {
                base.configs(src, &targets)
                    .iter()
                    .map(|c| recode(c))
                    .collect()
            })
            .collect();
        Denoter {
            values: u.values(),
            cu,
            defs,
            everything,
            cells,
            max_edges: u.max_edges,
        }
    }

    pub fn universe(&self) -> &CompactUniverse {
        &self.cu
    }

    /// Meaning of `f` with free symbols read through `env` (symbols missing
    /// from it denote the location of the same name).
    pub fn denote(
        &self,
        f: &Formula,
        env: &BTreeMap<String, Value>,
        fuel: usize,
    ) -> Result<BTreeSet<Ch>, OracleError> {
        self.go(&desugar(f), &mut env.clone(), fuel)
    }

    fn resolve(
        &self,
        t: &Term,
        env: &BTreeMap<String, Value>,
    ) -> Result<Option<Value>, OracleError> {
        Ok(match t {
            Term::Sym(s) => Some(match env.get(s) {
                Some(v) => v.clone(),
                None => Value::loc(s.clone()),
            }),
            Term::Atom(a) => Some(Value::Atom(*a)),
            Term::Path(..) => None,
        })
    }

    fn go(
        &self,
        f: &Formula,
        env: &mut BTreeMap<String, Value>,
        fuel: usize,
    ) -> Result<BTreeSet<Ch>, OracleError> {
        let mut out = BTreeSet::new();
        match f {
            Formula::Emp => {
                out.insert(Ch::emp());
            }
            Formula::False => {}
            Formula::True => out.extend(self.everything.iter().cloned()),
            Formula::TrueOf(t) => match self.resolve(t, env)? {
                Some(Value::Loc(l)) => {
                    let src = self
                        .cu
                        .location_index(&l)
                        .ok_or_else(|| OracleError::OutsideUniverse(l.to_string()))?;
                    out.extend(self.cells[src as usize].iter().cloned());
                }
                _ => {
                    out.insert(Ch::emp());
                }
            },
            Formula::PointsTo {
                base,
                label,
                target,
            } => {
                let (Some(Value::Loc(src)), Some(tgt)) =
                    (self.resolve(base, env)?, self.resolve(target, env)?)
                else {
                    return Ok(out);
                };
                let e = Edge::new(src, label.clone(), tgt);
                let c = self
                    .cu
                    .compact(&e)
                    .ok_or_else(|| OracleError::OutsideUniverse(e.to_string()))?;
                out.insert(Ch::single(c));
            }
            Formula::Conj(l, r) | Formula::Disj(l, r) => {
                let a = self.go(l, env, fuel)?;
                if a.is_empty() {
                    return Ok(out);
                }
                let b = self.go(r, env, fuel)?;
                let op = if matches!(f, Formula::Conj(..)) {
                    conjoin::<CompactEdge>
                } else {
                    disjoin::<CompactEdge>
                };
                for x in &a {
                    for y in &b {
                        if let EvalResultOf::Heap(h) = op(x, y) {
                            out.insert(h);
                        }
                    }
                }
            }
            Formula::Inv(x) => out.extend(self.go(x, env, fuel)?.iter().map(|h| h.negate())),
            Formula::Exists(v, body) => {
                let saved = env.get(v).cloned();
                let mut res = Ok(());
                for val in &self.values {
                    env.insert(v.clone(), val.clone());
                    match self.go(body, env, fuel) {
                        Ok(p) => out.extend(p),
                        Err(e) => {
                            res = Err(e);
                            break;
                        }
                    }
                }
                restore(env, v, saved);
                res?;
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
                    }
                    .into());
                }
                if fuel == 0 {
                    return Ok(out);
                }
                let mut inner = BTreeMap::new();
                for (p, a) in def.params.iter().zip(args) {
                    match self.resolve(a, env)? {
                        Some(v) => inner.insert(p.clone(), v),
                        None => return Ok(out),
                    };
                }
                for clause in &def.clauses {
                    out.extend(self.go(&desugar(clause), &mut inner.clone(), fuel - 1)?);
                }
            }
        }
        Ok(out)
    }

    /// Members that count as observations: at most `max_edges` edges.
    pub fn observed(&self, s: BTreeSet<Ch>) -> BTreeSet<Ch> {
        s.into_iter()
            .filter(|h| h.len() <= self.max_edges)
            .collect()
    }
}

fn restore(env: &mut BTreeMap<String, Value>, v: &str, saved: Option<Value>) {
    match saved {
        Some(x) => env.insert(v.to_string(), x),
        None => env.remove(v),
    };
}

/// The meaning of `f` under one assignment of its free symbols, as a set of
/// signed heaps (unrestricted in size).
pub fn denote(
    f: &Formula,
    u: &UniverseSpec,
    defs: &Defs,
    fuel: usize,
    env: &BTreeMap<String, Location>,
) -> Result<BTreeSet<SignedHeap>, OracleError> {
    let d = Denoter::new(u, defs, &[f]);
    let env = env
        .iter()
        .map(|(k, l)| (k.clone(), Value::Loc(l.clone())))
        .collect();
    Ok(d.denote(f, &env, fuel)?
        .iter()
        .map(|h| d.universe().expand_signed(h))
        .collect())
}

/// Every assignment of `symbols` to universe locations, the identity (where
/// a symbol names a universe location) first.
pub fn assignments(
    symbols: &BTreeSet<String>,
    u: &UniverseSpec,
) -> Vec<BTreeMap<String, Location>> {
    let syms: Vec<&String> = symbols.iter().collect();
    let mut out: Vec<BTreeMap<String, Location>> = vec![BTreeMap::new()];
    for s in &syms {
        let mut next = Vec::with_capacity(out.len() * u.locations.len());
        for partial in &out {
            for l in &u.locations {
                let mut m = partial.clone();
                m.insert((*s).clone(), l.clone());
                next.push(m);
            }
        }
        out = next;
    }
    let identity_score =
        |m: &BTreeMap<String, Location>| m.iter().filter(|(k, l)| k.as_str() != l.name()).count();
    out.sort_by_key(|m| identity_score(m));
    out
}

/// Definitional equivalence over `u`: equal observable denotations under
/// every assignment of the free symbols to universe locations.
pub fn oracle_equiv(
    f1: &Formula,
    f2: &Formula,
    u: &UniverseSpec,
    defs: &Defs,
    fuel: usize,
) -> Result<bool, OracleError> {
    Ok(oracle_witness(f1, f2, u, defs, fuel)?.is_none())
}

/// A distinguishing model, or `None` when the formulas are equivalent. The
/// first assignment that differs supplies the smallest differing heap.
pub fn oracle_witness(
    f1: &Formula,
    f2: &Formula,
    u: &UniverseSpec,
    defs: &Defs,
    fuel: usize,
) -> Result<Option<Witness>, OracleError> {
    oracle_witness_within(f1, f2, u, defs, fuel, DEFAULT_BUDGET)
}

pub fn oracle_witness_within(
    f1: &Formula,
    f2: &Formula,
    u: &UniverseSpec,
    defs: &Defs,
    fuel: usize,
    budget: u128,
) -> Result<Option<Witness>, OracleError> {
    let mut symbols = f1.free_symbols();
    symbols.extend(f2.free_symbols());
    let envs = (u.locations.len() as u128).saturating_pow(symbols.len() as u32);
    let work = super::heap_count(u).saturating_mul(envs.max(1));
    if work > budget {
        return Err(OracleError::UniverseTooLarge { work, budget });
    }
    let d = Denoter::new(u, defs, &[f1, f2]);
    for env in assignments(&symbols, u) {
        let venv: BTreeMap<String, Value> = env
            .iter()
            .map(|(k, l)| (k.clone(), Value::Loc(l.clone())))
            .collect();
        let a = d.observed(d.denote(f1, &venv, fuel)?);
        let b = d.observed(d.denote(f2, &venv, fuel)?);
        if a == b {
            continue;
        }
        let pick = a
            .symmetric_difference(&b)
            .min_by(|x, y| x.len().cmp(&y.len()).then_with(|| x.cmp(y)))
            .expect("sets differ")
            .clone();
        return Ok(Some(Witness {
            env,
            in_first: a.contains(&pick),
            heap: d.universe().expand_signed(&pick),
        }));
    }
    Ok(None)
}

/// Whether `h` is in the denotation of `f` under `env`.
pub fn denotes(
    f: &Formula,
    h: &SignedHeap,
    u: &UniverseSpec,
    defs: &Defs,
    fuel: usize,
    env: &BTreeMap<String, Location>,
) -> Result<bool, OracleError> {
    let d = Denoter::new(u, defs, &[f]);
    let venv = env
        .iter()
        .map(|(k, l)| (k.clone(), Value::Loc(l.clone())))
        .collect();
    let Some(c) = d.universe().compact_signed(h) else {
        return Ok(false);
    };
    Ok(d.denote(f, &venv, fuel)?.contains(&c))
}
