use crate::formula::{print_formula, Formula, Term};

/// Moves every `^-1` down to the leaves: `emp^-1` is `emp`, `false^-1` is
/// `false`, double inversions cancel, and inversion distributes over `*`,
/// `+` and `ex`. Remaining inversions sit directly above points-to cells,
/// calls, `true` and `true(t)`.
pub fn push_inversion(f: &Formula) -> Formula {
    push(f, false)
}

fn push(f: &Formula, negated: bool) -> Formula {
    match f {
        Formula::Inv(x) => push(x, !negated),
        Formula::Conj(l, r) => Formula::conj(push(l, negated), push(r, negated)),
        Formula::Disj(l, r) => Formula::disj(push(l, negated), push(r, negated)),
        Formula::Exists(v, body) => Formula::exists(v.clone(), push(body, negated)),
        Formula::Emp | Formula::False => f.clone(),
        leaf if negated => Formula::inv(leaf.clone()),
        leaf => leaf.clone(),
    }
}

/// Rewrites `f` to a canonical form that denotes the same heaps.
///
/// Inversions are pushed to the leaves, `emp` operands of `*` and `+` are
/// dropped, `false` absorbs, a single cell next to its own inverse cancels
/// to `emp`, `true(t) * true(t)` collapses to `true(t)`, existentials whose
/// variable does not occur are removed, and the two operands of each `*`
/// and `+` are ordered by their printed form. Chains are never
/// reassociated, since `*` is not associative on heaps that fail to connect.
/// The result is a fixpoint: `normalize(normalize(f)) == normalize(f)`.
pub fn normalize(f: &Formula) -> Formula {
    let mut cur = push_inversion(f);
    loop {
        let next = step(&cur, &mut Vec::new());
        if next == cur {
            return cur;
        }
        cur = next;
    }
}

fn step(f: &Formula, bound: &mut Vec<String>) -> Formula {
    match f {
        Formula::Conj(l, r) => {
            let (l, r) = (step(l, bound), step(r, bound));
            match (l, r) {
                (Formula::False, _) | (_, Formula::False) => Formula::False,
                (Formula::Emp, x) | (x, Formula::Emp) => x,
                (l, r) if cancels(&l, &r, bound) || cancels(&r, &l, bound) => Formula::Emp,
                (Formula::TrueOf(a), Formula::TrueOf(b))
                    if a == b && !matches!(a, Term::Path(..)) =>
                {
                    Formula::TrueOf(a)
                }
                (l, r) => ordered(l, r, Formula::conj),
            }
        }
        Formula::Disj(l, r) => {
            let (l, r) = (step(l, bound), step(r, bound));
            match (l, r) {
                (Formula::False, _) | (_, Formula::False) => Formula::False,
                (Formula::Emp, x) | (x, Formula::Emp) => x,
                (l, r) => ordered(l, r, Formula::disj),
            }
        }
        Formula::Inv(x) => match step(x, bound) {
            Formula::Emp => Formula::Emp,
            Formula::False => Formula::False,
            x => Formula::inv(x),
        },
        Formula::Exists(v, body) => {
            bound.push(v.clone());
            let body = step(body, bound);
            bound.pop();
            if body.free_symbols().contains(v) {
                Formula::exists(v.clone(), body)
            } else {
                body
            }
        }
        _ => f.clone(),
    }
}

fn ordered(l: Formula, r: Formula, make: fn(Formula, Formula) -> Formula) -> Formula {
    if print_formula(&l) <= print_formula(&r) {
        make(l, r)
    } else {
        make(r, l)
    }
}

/// `x * x^-1` for a single cell whose source is certainly a location: a
/// free symbol. A bound variable may take an atom, and then the cell
/// denotes no heap at all.
fn cancels(x: &Formula, y: &Formula, bound: &[String]) -> bool {
    let Formula::Inv(inner) = y else {
        return false;
    };
    match x {
        Formula::PointsTo {
            base: Term::Sym(s), ..
        } => **inner == *x && !bound.contains(s),
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_formula;

    fn f(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    fn norm(s: &str) -> String {
        print_formula(&normalize(&f(s)))
    }

    #[test]
    fn inversion_moves_to_leaves() {
        assert_eq!(
            push_inversion(&f("((a |-> b) * (b |-> c))^-1")),
            f("(a |-> b)^-1 * (b |-> c)^-1")
        );
        assert_eq!(push_inversion(&f("emp^-1")), Formula::Emp);
        assert_eq!(push_inversion(&f("((a |-> b)^-1)^-1")), f("a |-> b"));
        assert_eq!(
            push_inversion(&f("(a |-> b + (ex y . b |-> y))^-1")),
            f("(a |-> b)^-1 + (ex y . (b |-> y)^-1)")
        );
        assert_eq!(
            push_inversion(&f("(p(a) * true)^-1")),
            f("p(a)^-1 * true^-1")
        );
    }

    #[test]
    fn normal_forms() {
        assert_eq!(norm("a |-> b * emp * (a |-> b)^-1"), "emp");
        assert_eq!(norm("true(a) * true(a)"), "true(a)");
        assert_eq!(norm("false * a |-> b"), "false");
        assert_eq!(norm("b |-> c * a |-> b"), "a |-> b * b |-> c");
        assert_eq!(norm("emp + a |-> b"), "a |-> b");
        assert_eq!(norm("ex y . a |-> b"), "a |-> b");
        assert_eq!(norm("(((a |-> b)^-1)^-1)^-1 * a |-> b"), "emp");
    }

    #[test]
    fn bound_cells_do_not_cancel() {
        // y may be an atom, in which case neither side denotes a heap
        assert_eq!(
            norm("ex y . y |-> a * (y |-> a)^-1"),
            "ex y . (y |-> a)^-1 * y |-> a"
        );
    }

    #[test]
    fn chains_are_not_reassociated() {
        // a * b * a^-1 keeps its shape: only adjacent operands cancel
        let g = normalize(&f("a |-> b * b |-> c * (a |-> b)^-1"));
        assert!(matches!(g, Formula::Conj(..)));
        assert_eq!(normalize(&g), g);
    }
}
