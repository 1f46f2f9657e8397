use rand::seq::SliceRandom;
use rand::Rng;

use crate::formula::{Formula, Term};
use crate::heap::{Atom, FieldLabel};

/// Every formula of at most `max_size` nodes built from `leaves` with `^-1`,
/// `*` and `+`, smallest first.
pub fn enumerate_formulas(leaves: &[Formula], max_size: usize) -> Vec<Formula> {
    let mut by_size: Vec<Vec<Formula>> = vec![Vec::new()];
    for n in 1..=max_size {
        let mut cur = Vec::new();
        if n == 1 {
            cur.extend(leaves.iter().cloned());
        } else {
            for f in &by_size[n - 1] {
                cur.push(Formula::inv(f.clone()));
            }
            for k in 1..n - 1 {
                for l in &by_size[k] {
                    for r in &by_size[n - 1 - k] {
                        cur.push(Formula::conj(l.clone(), r.clone()));
                        cur.push(Formula::disj(l.clone(), r.clone()));
                    }
                }
            }
        }
        by_size.push(cur);
    }
    by_size.into_iter().flatten().collect()
}

/// A random formula of exactly `size` nodes over `leaves`.
pub fn random_formula(rng: &mut impl Rng, leaves: &[Formula], size: usize) -> Formula {
    assert!(size >= 1 && !leaves.is_empty());
    if size == 1 {
        return leaves.choose(rng).expect("non-empty").clone();
    }
    if size == 2 || rng.gen_ratio(1, 5) {
        return Formula::inv(random_formula(rng, leaves, size - 1));
    }
    let k = rng.gen_range(1..size - 1);
    let l = random_formula(rng, leaves, k);
    let r = random_formula(rng, leaves, size - 1 - k);
    if rng.gen_bool(0.5) {
        Formula::conj(l, r)
    } else {
        Formula::disj(l, r)
    }
}

const SYMS: &[&str] = &["a", "b", "c", "x", "y", "node", "next"];
const FIELDS: &[&str] = &["f", "g", "next", "val"];
const PREDS: &[&str] = &["list", "tree", "p"];

fn sym(rng: &mut impl Rng) -> String {
    SYMS.choose(rng).expect("non-empty").to_string()
}

fn value(rng: &mut impl Rng) -> Term {
    match rng.gen_range(0..4) {
        0 => Term::nil(),
        1 => Term::Atom(Atom::Int(rng.gen_range(-20..100))),
        _ => Term::sym(sym(rng)),
    }
}

/// A random AST of the shape the parser produces, at most `depth` levels
/// deep: paths only as points-to bases, always followed by a named label.
pub fn random_ast(rng: &mut impl Rng, depth: usize) -> Formula {
    if depth <= 1 || rng.gen_ratio(1, 4) {
        return random_leaf(rng);
    }
    match rng.gen_range(0..4) {
        0 => Formula::conj(random_ast(rng, depth - 1), random_ast(rng, depth - 1)),
        1 => Formula::disj(random_ast(rng, depth - 1), random_ast(rng, depth - 1)),
        2 => Formula::inv(random_ast(rng, depth - 1)),
        _ => Formula::exists(sym(rng), random_ast(rng, depth - 1)),
    }
}

fn random_leaf(rng: &mut impl Rng) -> Formula {
    match rng.gen_range(0..8) {
        0 => Formula::Emp,
        1 => Formula::True,
        2 => Formula::False,
        3 => Formula::TrueOf(Term::sym(sym(rng))),
        4 => {
            let args = (0..rng.gen_range(0..3)).map(|_| value(rng)).collect();
            Formula::call(*PREDS.choose(rng).expect("non-empty"), args)
        }
        _ => {
            let mut base = Term::sym(sym(rng));
            let hops = rng.gen_range(0..3);
            for _ in 0..hops {
                base = Term::path(base, *FIELDS.choose(rng).expect("non-empty"));
            }
            let label = if hops > 0 || rng.gen_bool(0.5) {
                FieldLabel::named(*FIELDS.choose(rng).expect("non-empty"))
            } else {
                FieldLabel::Eps
            };
            Formula::PointsTo {
                base,
                label,
                target: value(rng),
            }
        }
    }
}
