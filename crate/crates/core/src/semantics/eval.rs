use std::collections::{BTreeMap, BTreeSet};

use super::{conjoin, disjoin, EvalResult, SemanticsError, SignedHeap};
use crate::formula::{fresh_name, Defs, Formula, Term};
use crate::heap::{Edge, FieldLabel, Value};

/// Rewrites `base.f1...fn.label |-> target` into a chain of single-hop cells
/// joined by fresh existentials, e.g. `a.f.g |-> x` becomes
/// `ex t . a.f |-> t * t.g |-> x`. A base without accessors is returned as a
/// plain points-to. Fresh names avoid everything in `avoid`.
pub fn desugar_path(
    base: &Term,
    label: &FieldLabel,
    target: &Term,
    avoid: &BTreeSet<String>,
) -> Formula {
    let mut fields = Vec::new();
    let mut root = base;
    while let Term::Path(b, f) = root {
        fields.push(f.as_str());
        root = b;
    }
    fields.reverse();
    if fields.is_empty() {
        return Formula::PointsTo {
            base: base.clone(),
            label: label.clone(),
            target: target.clone(),
        };
    }
    let mut avoid = avoid.clone();
    let mut vars = Vec::with_capacity(fields.len());
    for _ in &fields {
        let v = fresh_name("t", &avoid);
        avoid.insert(v.clone());
        vars.push(v);
    }
    let mut cells = Vec::with_capacity(fields.len() + 1);
    let mut from = root.clone();
    for (f, v) in fields.iter().zip(&vars) {
        cells.push(Formula::field(from, *f, Term::sym(v.clone())));
        from = Term::sym(v.clone());
    }
    cells.push(Formula::PointsTo {
        base: from,
        label: label.clone(),
        target: target.clone(),
    });
    vars.into_iter()
        .rev()
        .fold(Formula::conj_all(cells), |body, v| Formula::exists(v, body))
}

/// Desugars every field path in `f`.
pub fn desugar(f: &Formula) -> Formula {
    let avoid = f.all_names();
    desugar_with(f, &avoid)
}

fn desugar_with(f: &Formula, avoid: &BTreeSet<String>) -> Formula {
    match f {
        Formula::PointsTo {
            base,
            label,
            target,
        } => desugar_path(base, label, target, avoid),
        Formula::Conj(l, r) => Formula::conj(desugar_with(l, avoid), desugar_with(r, avoid)),
        Formula::Disj(l, r) => Formula::disj(desugar_with(l, avoid), desugar_with(r, avoid)),
        Formula::Inv(x) => Formula::inv(desugar_with(x, avoid)),
        Formula::Exists(v, body) => Formula::exists(v.clone(), desugar_with(body, avoid)),
        _ => f.clone(),
    }
}

/// Ground evaluation where free symbols denote locations of the same name.
/// Existentials range over those locations, a few fresh ones, and `nil`; use
/// [`eval_ground_in`] to fix the range explicitly.
pub fn eval_ground(f: &Formula, defs: &Defs, fuel: usize) -> Result<EvalResult, SemanticsError> {
    let names = f.all_names();
    let mut universe: Vec<Value> = f.free_symbols().into_iter().map(Value::loc).collect();
    let mut binders = 0;
    f.visit(&mut |g| binders += matches!(g, Formula::Exists(..)) as usize);
    let mut avoid = names;
    for _ in 0..binders + 2 {
        let n = fresh_name("n", &avoid);
        avoid.insert(n.clone());
        universe.push(Value::loc(n));
    }
    universe.push(Value::nil());
    eval_ground_in(f, defs, fuel, &universe, &BTreeMap::new())
}

/// Ground evaluation with an explicit existential range and symbol
/// environment; symbols missing from `env` denote locations of the same name.
///
/// An existential evaluates to the first value of `universe` for which its
/// body is not `false`; a call to the first clause that is not `false`.
pub fn eval_ground_in(
    f: &Formula,
    defs: &Defs,
    fuel: usize,
    universe: &[Value],
    env: &BTreeMap<String, Value>,
) -> Result<EvalResult, SemanticsError> {
    let ev = Evaluator { defs, universe };
    ev.eval(&desugar(f), &mut env.clone(), fuel)
}

struct Evaluator<'a> {
    defs: &'a Defs,
    universe: &'a [Value],
}

fn resolve(t: &Term, env: &BTreeMap<String, Value>) -> Option<Value> {
    match t {
        Term::Sym(s) => Some(env.get(s).cloned().unwrap_or_else(|| Value::loc(s.clone()))),
        Term::Atom(a) => Some(Value::Atom(*a)),
        Term::Path(..) => None,
    }
}

fn value_term(v: &Value) -> Term {
    match v {
        Value::Loc(l) => Term::sym(l.name()),
        Value::Atom(a) => Term::Atom(*a),
    }
}

impl Evaluator<'_> {
    fn eval(
        &self,
        f: &Formula,
        env: &mut BTreeMap<String, Value>,
        fuel: usize,
    ) -> Result<EvalResult, SemanticsError> {
        Ok(match f {
            Formula::Emp => EvalResult::Heap(SignedHeap::emp()),
            Formula::False => EvalResult::False,
            Formula::True | Formula::TrueOf(_) => {
                return Err(SemanticsError::NotGround(f.to_string()))
            }
            Formula::PointsTo {
                base,
                label,
                target,
            } => {
                let (Some(Value::Loc(src)), Some(tgt)) = (resolve(base, env), resolve(target, env))
                else {
                    return Ok(EvalResult::False);
                };
                EvalResult::Heap(SignedHeap::single(Edge::new(src, label.clone(), tgt)))
            }
            Formula::Conj(l, r) => {
                let a = self.eval(l, env, fuel)?;
                let b = self.eval(r, env, fuel)?;
                match (a, b) {
                    (EvalResult::Heap(a), EvalResult::Heap(b)) => conjoin(&a, &b),
                    _ => EvalResult::False,
                }
            }
            Formula::Disj(l, r) => {
                let a = self.eval(l, env, fuel)?;
                let b = self.eval(r, env, fuel)?;
                match (a, b) {
                    (EvalResult::Heap(a), EvalResult::Heap(b)) => disjoin(&a, &b),
                    _ => EvalResult::False,
                }
            }
            Formula::Inv(x) => self.eval(x, env, fuel)?.negate(),
            Formula::Exists(v, body) => {
                let saved = env.get(v).cloned();
                let mut out = Ok(EvalResult::False);
                for val in self.universe {
                    env.insert(v.clone(), val.clone());
                    out = self.eval(body, env, fuel);
                    if !matches!(out, Ok(EvalResult::False)) {
                        break;
                    }
                }
                restore(env, v, saved);
                out?
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
                let mut inner = BTreeMap::new();
                for (p, a) in def.params.iter().zip(args) {
                    match resolve(a, env) {
                        Some(v) => inner.insert(p.clone(), v),
                        None => return Ok(EvalResult::False),
                    };
                }
                for clause in &def.clauses {
                    match self.eval(&desugar(clause), &mut inner.clone(), fuel - 1)? {
                        EvalResult::False => continue,
                        ok => return Ok(ok),
                    }
                }
                EvalResult::False
            }
        })
    }
}

fn restore(env: &mut BTreeMap<String, Value>, v: &str, saved: Option<Value>) {
    match saved {
        Some(x) => env.insert(v.to_string(), x),
        None => env.remove(v),
    };
}

/// Substitutes symbol values into a formula, producing constants.
pub(crate) fn instantiate(f: &Formula, env: &BTreeMap<String, Value>) -> Formula {
    let map: BTreeMap<String, Term> = env
        .iter()
        .map(|(k, v)| (k.clone(), value_term(v)))
        .collect();
    f.substitute(&map)
}
