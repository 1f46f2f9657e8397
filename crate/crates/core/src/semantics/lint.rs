use crate::formula::{print_formula, Formula};

/// Conjunctions whose right operand is neither a points-to nor a constant.
///
/// Such conjunctions are evaluated by the general joining-point rule, so
/// these are warnings about style, not errors.
pub fn lint(f: &Formula) -> Vec<String> {
    let mut out = Vec::new();
    f.visit(&mut |g| {
        if let Formula::Conj(_, r) = g {
            if !matches!(
                **r,
                Formula::PointsTo { .. }
                    | Formula::Emp
                    | Formula::True
                    | Formula::TrueOf(_)
                    | Formula::False
            ) {
                out.push(format!(
                    "right operand of `*` is not a points-to: {}",
                    print_formula(r)
                ));
            }
        }
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_formula;

    #[test]
    fn chains_are_clean() {
        let f = parse_formula("a |-> b * b |-> c * c.f |-> nil * emp * true(a)").unwrap();
        assert!(lint(&f).is_empty());
    }

    #[test]
    fn general_right_operands_are_flagged() {
        let f = parse_formula("a |-> b * (b |-> c * c |-> d) + x |-> y * list(x)").unwrap();
        assert_eq!(
            lint(&f),
            [
                "right operand of `*` is not a points-to: b |-> c * c |-> d",
                "right operand of `*` is not a points-to: list(x)",
            ]
        );
    }
}
