use super::{Formula, Term};
use crate::heap::FieldLabel;

#[derive(Clone, Copy)]
struct Ctx {
    /// Lowest operator level that may appear without parentheses.
    min: u8,
    /// Nothing follows this position up to the enclosing bracket or end.
    open_end: bool,
    under_inv: bool,
}

const TOP: Ctx = Ctx {
    min: 1,
    open_end: true,
    under_inv: false,
};

/// Renders a formula in the parser's concrete syntax with the fewest
/// parentheses the precedence rules allow. Points-to operands of `^-1` keep
/// their parentheses so the postfix does not read as part of the value.
///
/// Parsing the output yields the same tree for every formula the parser can
/// produce; a `PointsTo` with a path base must carry a named label for that.
pub fn print_formula(f: &Formula) -> String {
    let mut out = String::new();
    print(f, TOP, &mut out);
    out
}

fn level(f: &Formula) -> u8 {
    match f {
        Formula::Disj(..) => 1,
        Formula::Conj(..) => 2,
        Formula::Inv(..) => 3,
        _ => 4,
    }
}

fn needs_parens(f: &Formula, ctx: Ctx) -> bool {
    match f {
        Formula::Exists(..) => !ctx.open_end,
        Formula::PointsTo { .. } => ctx.under_inv,
        _ => level(f) < ctx.min,
    }
}

fn print(f: &Formula, ctx: Ctx, out: &mut String) {
    if needs_parens(f, ctx) {
        out.push('(');
        print(f, TOP, out);
        out.push(')');
        return;
    }
    match f {
        Formula::Emp => out.push_str("emp"),
        Formula::True => out.push_str("true"),
        Formula::False => out.push_str("false"),
        Formula::TrueOf(t) => {
            out.push_str("true(");
            term(t, out);
            out.push(')');
        }
        Formula::PointsTo {
            base,
            label,
            target,
        } => {
            term(base, out);
            if let FieldLabel::Named(l) = label {
                out.push('.');
                out.push_str(l);
            }
            out.push_str(" |-> ");
            term(target, out);
        }
        Formula::Call(name, args) => {
            out.push_str(name);
            out.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                term(a, out);
            }
            out.push(')');
        }
        Formula::Disj(l, r) => {
            print(
                l,
                Ctx {
                    min: 1,
                    open_end: false,
                    under_inv: false,
                },
                out,
            );
            out.push_str(" + ");
            print(
                r,
                Ctx {
                    min: 2,
                    open_end: ctx.open_end,
                    under_inv: false,
                },
                out,
            );
        }
        Formula::Conj(l, r) => {
            print(
                l,
                Ctx {
                    min: 2,
                    open_end: false,
                    under_inv: false,
                },
                out,
            );
            out.push_str(" * ");
            print(
                r,
                Ctx {
                    min: 3,
                    open_end: ctx.open_end,
                    under_inv: false,
                },
                out,
            );
        }
        Formula::Inv(x) => {
            print(
                x,
                Ctx {
                    min: 3,
                    open_end: false,
                    under_inv: true,
                },
                out,
            );
            out.push_str("^-1");
        }
        Formula::Exists(v, body) => {
            out.push_str("ex ");
            out.push_str(v);
            out.push_str(" . ");
            print(
                body,
                Ctx {
                    min: 1,
                    open_end: ctx.open_end,
                    under_inv: false,
                },
                out,
            );
        }
    }
}

fn term(t: &Term, out: &mut String) {
    out.push_str(&t.to_string());
}
