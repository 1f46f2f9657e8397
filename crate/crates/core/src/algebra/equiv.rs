use std::collections::BTreeMap;

use super::{normalize, AlgebraError};
use crate::formula::{Defs, Formula};
use crate::heap::{Heap, Location, StackEnv, Value};
use crate::oracle::{
    assignments, enumerate_heaps, heap_count, oracle_witness_within, OracleError, UniverseSpec,
    Witness, DEFAULT_BUDGET,
};
use crate::semantics::{eval_ground_in, match_formula, EvalResult, SignedHeap};

/// How an equivalence verdict was reached.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Both sides have the same normal form.
    NormalForm,
    /// Inversion-free formulas: the same heaps match under every assignment.
    Matching,
    /// Formulas without `true`: the same ground evaluation under every
    /// assignment.
    Evaluation,
    /// Everything else: the set-valued denotation.
    Denotation,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub method: Method,
    /// A distinguishing model, `None` when the formulas are equivalent.
    pub witness: Option<Witness>,
}

impl Verdict {
    pub fn equivalent(&self) -> bool {
        self.witness.is_none()
    }
}

/// Whether `f1` and `f2` describe the same heaps over `u`, under every
/// assignment of their free symbols to locations of `u`.
pub fn equivalent(
    f1: &Formula,
    f2: &Formula,
    u: &UniverseSpec,
    defs: &Defs,
    fuel: usize,
) -> Result<bool, AlgebraError> {
    Ok(decide(f1, f2, u, defs, fuel, DEFAULT_BUDGET)?.equivalent())
}

/// Decides equivalence and reports a witness on failure.
///
/// Equal normal forms settle it at once; a difference in normal form proves
/// nothing, so the decision falls back to checking every model over `u`.
/// `budget` caps enumerated heaps times symbol assignments.
pub fn decide(
    f1: &Formula,
    f2: &Formula,
    u: &UniverseSpec,
    defs: &Defs,
    fuel: usize,
    budget: u128,
) -> Result<Verdict, AlgebraError> {
    if normalize(f1) == normalize(f2) {
        return Ok(Verdict {
            method: Method::NormalForm,
            witness: None,
        });
    }
    let method = if !f1.contains_inv() && !f2.contains_inv() {
        Method::Matching
    } else if !f1.contains_true() && !f2.contains_true() {
        Method::Evaluation
    } else {
        Method::Denotation
    };
    if method == Method::Denotation {
        let witness = oracle_witness_within(f1, f2, u, defs, fuel, budget)?;
        return Ok(Verdict { method, witness });
    }
    let mut symbols = f1.free_symbols();
    symbols.extend(f2.free_symbols());
    let envs = assignments(&symbols, u);
    let heaps = if method == Method::Matching {
        heap_count(u)
    } else {
        1
    };
    let work = heaps.saturating_mul(envs.len() as u128);
    if work > budget {
        return Err(OracleError::UniverseTooLarge { work, budget }.into());
    }
    let witness = if method == Method::Matching {
        by_matching(f1, f2, u, defs, fuel, &envs)?
    } else {
        by_evaluation(f1, f2, u, defs, fuel, &envs)?
    };
    Ok(Verdict { method, witness })
}

fn by_matching(
    f1: &Formula,
    f2: &Formula,
    u: &UniverseSpec,
    defs: &Defs,
    fuel: usize,
    envs: &[BTreeMap<String, Location>],
) -> Result<Option<Witness>, AlgebraError> {
    let heaps: Vec<Heap> = enumerate_heaps(u).collect();
    for env in envs {
        let s: StackEnv = env.iter().map(|(k, l)| (k.clone(), l.clone())).collect();
        for h in &heaps {
            let a = !match_formula(f1, h, &s, defs, fuel)?.is_empty();
            let b = !match_formula(f2, h, &s, defs, fuel)?.is_empty();
            if a != b {
                return Ok(Some(Witness {
                    env: env.clone(),
                    heap: SignedHeap::from(h),
                    in_first: a,
                }));
            }
        }
    }
    Ok(None)
}

fn by_evaluation(
    f1: &Formula,
    f2: &Formula,
    u: &UniverseSpec,
    defs: &Defs,
    fuel: usize,
    envs: &[BTreeMap<String, Location>],
) -> Result<Option<Witness>, AlgebraError> {
    let values = u.values();
    for env in envs {
        let venv: BTreeMap<String, Value> = env
            .iter()
            .map(|(k, l)| (k.clone(), Value::Loc(l.clone())))
            .collect();
        let a = eval_ground_in(f1, defs, fuel, &values, &venv)?;
        let b = eval_ground_in(f2, defs, fuel, &values, &venv)?;
        let (heap, in_first) = match (a, b) {
            (a, b) if a == b => continue,
            (EvalResult::Heap(h), _) => (h, true),
            (EvalResult::False, EvalResult::Heap(h)) => (h, false),
            (EvalResult::False, EvalResult::False) => unreachable!("equal results"),
        };
        return Ok(Some(Witness {
            env: env.clone(),
            heap,
            in_first,
        }));
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_formula;
    use crate::heap::Edge;

    fn f(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    fn verdict(a: &str, b: &str) -> Verdict {
        decide(
            &f(a),
            &f(b),
            &UniverseSpec::default(),
            &Defs::new(),
            8,
            DEFAULT_BUDGET,
        )
        .unwrap()
    }

    #[test]
    fn commuted_chain() {
        let v = verdict("a |-> b * b |-> c", "b |-> c * a |-> b");
        assert!(v.equivalent());
        assert_eq!(v.method, Method::NormalForm);
    }

    #[test]
    fn distinct_cells_differ() {
        let v = verdict("a |-> b", "a |-> c");
        assert_eq!(v.method, Method::Matching);
        let w = v.witness.unwrap();
        assert!(w.in_first);
        assert_eq!(w.heap, SignedHeap::single(Edge::plain("a", "b")));
    }

    #[test]
    fn emp_is_an_identity() {
        assert!(verdict("a |-> b * emp", "a |-> b").equivalent());
        assert!(verdict("emp * a |-> b", "emp + a |-> b").equivalent());
    }

    #[test]
    fn matching_beyond_normal_forms() {
        // binder names keep the normal forms apart
        let v = verdict("ex y . a |-> y", "ex z . a |-> z");
        assert_eq!(v.method, Method::Matching);
        assert!(v.equivalent());
        assert!(!verdict("ex y . a |-> y", "a |-> b").equivalent());
        let v = verdict("true(a) * a.f |-> b", "a.f |-> b * true(a)");
        assert!(v.equivalent());
        let v = verdict("true(a)", "emp + true(a) * true(a)");
        assert!(v.equivalent());
    }

    #[test]
    fn ground_formulas_with_inverses() {
        let v = verdict("ex y . (a |-> y)^-1", "ex z . (a |-> z)^-1");
        assert_eq!(v.method, Method::Evaluation);
        assert!(v.equivalent());
        // equal when the symbols name distinct locations, but with a = b the
        // left side fails to connect
        let v = verdict("a |-> b * b |-> c * (a |-> b)^-1", "b |-> c");
        assert_eq!(v.method, Method::Evaluation);
        let w = v.witness.unwrap();
        assert!(!w.in_first);
        assert_eq!(w.env["a"], w.env["b"]);
        let v = verdict("(a |-> b)^-1", "a |-> b");
        assert!(!v.equivalent());
    }

    #[test]
    fn inverses_with_true_use_the_denotation() {
        let v = verdict("true * true^-1", "emp");
        assert_eq!(v.method, Method::Denotation);
        assert!(!v.equivalent());
    }

    #[test]
    fn budget_is_enforced() {
        let r = decide(
            &f("a |-> b"),
            &f("a |-> c"),
            &UniverseSpec::default(),
            &Defs::new(),
            8,
            10,
        );
        assert!(matches!(
            r,
            Err(AlgebraError::Oracle(OracleError::UniverseTooLarge { .. }))
        ));
    }
}
