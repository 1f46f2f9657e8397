//! Heap formulas, abstract predicate definitions, and their concrete syntax.
//!
//! Surface syntax (ASCII, with Unicode aliases in parentheses):
//!
//! ```text
//! disj    := conj ('+' conj)*                  '+'   (∥)  independent union
//! conj    := postfix ('*' postfix)*            '*'   (∘)  strict conjunction
//! postfix := atom ('^-1')*                     '^-1' (⁻¹) inversion
//! atom    := 'emp' | 'true' ['(' ident ')'] | 'false'
//!          | path '|->' value                  '|->' (↦)
//!          | ident '(' [arg (',' arg)*] ')'
//!          | 'ex' ident '.' disj
//!          | '(' disj ')'
//! path    := ident ('.' ident)*
//! value   := ident | 'nil' | integer
//! ```
//!
//! Both binary operators associate to the left; `*` binds tighter than `+`.
//! A field path on the left of `|->` keeps its last accessor as the edge
//! label, so `a.f.g |-> x` is `PointsTo { base: a.f, label: g, target: x }`.

mod lexer;
mod parser;
mod printer;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::heap::{Atom, FieldLabel};

pub use lexer::Pos;
pub use parser::{
    merge_defs, parse_defs, parse_document, parse_formula, parse_spec_document, parse_spec_line,
    DefsError, Directive, Document, ParseError, SpecDocument,
};
pub use printer::print_formula;

/// Symbolic counterpart of a location or value inside a formula.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Sym(String),
    Atom(Atom),
    /// Field access `base.field`, nested to the left.
    Path(Box<Term>, String),
}

impl Term {
    pub fn sym(name: impl Into<String>) -> Self {
        Term::Sym(name.into())
    }

    pub fn nil() -> Self {
        Term::Atom(Atom::Nil)
    }

    pub fn path(base: Term, field: impl Into<String>) -> Self {
        Term::Path(Box::new(base), field.into())
    }

    /// The symbol at the root of a path, or the symbol itself.
    pub fn root_symbol(&self) -> Option<&str> {
        match self {
            Term::Sym(s) => Some(s),
            Term::Atom(_) => None,
            Term::Path(b, _) => b.root_symbol(),
        }
    }

    fn rename(&self, from: &str, to: &str) -> Term {
        match self {
            Term::Sym(s) if s == from => Term::Sym(to.to_string()),
            Term::Path(b, f) => Term::Path(Box::new(b.rename(from, to)), f.clone()),
            t => t.clone(),
        }
    }

    fn substitute(&self, map: &BTreeMap<String, Term>) -> Term {
        match self {
            Term::Sym(s) => map.get(s).cloned().unwrap_or_else(|| self.clone()),
            Term::Atom(_) => self.clone(),
            Term::Path(b, f) => Term::Path(Box::new(b.substitute(map)), f.clone()),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Sym(s) => f.write_str(s),
            Term::Atom(a) => a.fmt(f),
            Term::Path(b, field) => write!(f, "{b}.{field}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    Emp,
    True,
    /// All not otherwise described fields of one object.
    TrueOf(Term),
    False,
    PointsTo {
        base: Term,
        label: FieldLabel,
        target: Term,
    },
    Conj(Box<Formula>, Box<Formula>),
    Disj(Box<Formula>, Box<Formula>),
    Inv(Box<Formula>),
    Exists(String, Box<Formula>),
    Call(String, Vec<Term>),
}

impl Formula {
    /// Plain pointer `base |-> target`.
    pub fn points_to(base: Term, target: Term) -> Self {
        Formula::PointsTo {
            base,
            label: FieldLabel::Eps,
            target,
        }
    }

    /// Field cell `base.field |-> target`.
    pub fn field(base: Term, field: impl Into<String>, target: Term) -> Self {
        Formula::PointsTo {
            base,
            label: FieldLabel::named(field),
            target,
        }
    }

    pub fn conj(l: Formula, r: Formula) -> Self {
        Formula::Conj(Box::new(l), Box::new(r))
    }

    pub fn disj(l: Formula, r: Formula) -> Self {
        Formula::Disj(Box::new(l), Box::new(r))
    }

    pub fn inv(f: Formula) -> Self {
        Formula::Inv(Box::new(f))
    }

    pub fn exists(var: impl Into<String>, body: Formula) -> Self {
        Formula::Exists(var.into(), Box::new(body))
    }

    pub fn call(name: impl Into<String>, args: Vec<Term>) -> Self {
        Formula::Call(name.into(), args)
    }

    /// Left-nested `*` chain; `emp` for an empty iterator.
    pub fn conj_all(parts: impl IntoIterator<Item = Formula>) -> Self {
        parts
            .into_iter()
            .reduce(Formula::conj)
            .unwrap_or(Formula::Emp)
    }

    /// Left-nested `+` chain; `emp` for an empty iterator.
    pub fn disj_all(parts: impl IntoIterator<Item = Formula>) -> Self {
        parts
            .into_iter()
            .reduce(Formula::disj)
            .unwrap_or(Formula::Emp)
    }

    /// Number of formula nodes (terms are not counted).
    pub fn size(&self) -> usize {
        match self {
            Formula::Conj(l, r) | Formula::Disj(l, r) => 1 + l.size() + r.size(),
            Formula::Inv(f) | Formula::Exists(_, f) => 1 + f.size(),
            _ => 1,
        }
    }

    pub fn contains_inv(&self) -> bool {
        self.any(&|f| matches!(f, Formula::Inv(_)))
    }

    /// Mentions `true` or `true(_)`.
    pub fn contains_true(&self) -> bool {
        self.any(&|f| matches!(f, Formula::True | Formula::TrueOf(_)))
    }

    pub fn contains_call(&self) -> bool {
        self.any(&|f| matches!(f, Formula::Call(..)))
    }

    pub fn contains_exists(&self) -> bool {
        self.any(&|f| matches!(f, Formula::Exists(..)))
    }

    /// Some node satisfies `pred`.
    pub fn any(&self, pred: &dyn Fn(&Formula) -> bool) -> bool {
        if pred(self) {
            return true;
        }
        match self {
            Formula::Conj(l, r) | Formula::Disj(l, r) => l.any(pred) || r.any(pred),
            Formula::Inv(f) | Formula::Exists(_, f) => f.any(pred),
            _ => false,
        }
    }

    /// Symbols not bound by an enclosing `ex`.
    pub fn free_symbols(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        let mut term = |t: &Term, bound: &Vec<String>| {
            if let Some(s) = t.root_symbol() {
                if !bound.iter().any(|b| b == s) {
                    out.insert(s.to_string());
                }
            }
        };
        match self {
            Formula::Emp | Formula::True | Formula::False => {}
            Formula::TrueOf(t) => term(t, bound),
            Formula::PointsTo { base, target, .. } => {
                term(base, bound);
                term(target, bound);
            }
            Formula::Call(_, args) => {
                for a in args {
                    term(a, bound);
                }
            }
            Formula::Conj(l, r) | Formula::Disj(l, r) => {
                l.collect_free(bound, out);
                r.collect_free(bound, out);
            }
            Formula::Inv(f) => f.collect_free(bound, out),
            Formula::Exists(v, f) => {
                bound.push(v.clone());
                f.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    /// Every identifier used as a symbol or binder anywhere in the formula.
    pub fn all_names(&self) -> BTreeSet<String> {
        let mut out = self.free_symbols();
        self.visit(&mut |f| {
            if let Formula::Exists(v, body) = f {
                out.insert(v.clone());
                out.extend(body.free_symbols());
            }
        });
        out
    }

    /// Pre-order traversal.
    pub fn visit(&self, g: &mut dyn FnMut(&Formula)) {
        g(self);
        match self {
            Formula::Conj(l, r) | Formula::Disj(l, r) => {
                l.visit(g);
                r.visit(g);
            }
            Formula::Inv(f) | Formula::Exists(_, f) => f.visit(g),
            _ => {}
        }
    }

    /// Capture-avoiding substitution of free symbols by terms.
    pub fn substitute(&self, map: &BTreeMap<String, Term>) -> Formula {
        if map.is_empty() {
            return self.clone();
        }
        match self {
            Formula::Emp | Formula::True | Formula::False => self.clone(),
            Formula::TrueOf(t) => Formula::TrueOf(t.substitute(map)),
            Formula::PointsTo {
                base,
                label,
                target,
            } => Formula::PointsTo {
                base: base.substitute(map),
                label: label.clone(),
                target: target.substitute(map),
            },
            Formula::Call(p, args) => {
                Formula::Call(p.clone(), args.iter().map(|a| a.substitute(map)).collect())
            }
            Formula::Conj(l, r) => Formula::conj(l.substitute(map), r.substitute(map)),
            Formula::Disj(l, r) => Formula::disj(l.substitute(map), r.substitute(map)),
            Formula::Inv(f) => Formula::inv(f.substitute(map)),
            Formula::Exists(v, body) => {
                let mut inner = map.clone();
                inner.remove(v);
                let captured = inner.values().any(|t| t.root_symbol() == Some(v.as_str()));
                if captured {
                    let mut avoid = body.all_names();
                    avoid.extend(inner.keys().cloned());
                    for t in inner.values() {
                        if let Some(s) = t.root_symbol() {
                            avoid.insert(s.to_string());
                        }
                    }
                    let fresh = fresh_name(v, &avoid);
                    let renamed = body.rename_free(v, &fresh);
                    Formula::exists(fresh, renamed.substitute(&inner))
                } else {
                    Formula::exists(v.clone(), body.substitute(&inner))
                }
            }
        }
    }

    /// Renames free occurrences of `from`. `to` must not be bound inside.
    pub fn rename_free(&self, from: &str, to: &str) -> Formula {
        match self {
            Formula::Emp | Formula::True | Formula::False => self.clone(),
            Formula::TrueOf(t) => Formula::TrueOf(t.rename(from, to)),
            Formula::PointsTo {
                base,
                label,
                target,
            } => Formula::PointsTo {
                base: base.rename(from, to),
                label: label.clone(),
                target: target.rename(from, to),
            },
            Formula::Call(p, args) => {
                Formula::Call(p.clone(), args.iter().map(|a| a.rename(from, to)).collect())
            }
            Formula::Conj(l, r) => Formula::conj(l.rename_free(from, to), r.rename_free(from, to)),
            Formula::Disj(l, r) => Formula::disj(l.rename_free(from, to), r.rename_free(from, to)),
            Formula::Inv(f) => Formula::inv(f.rename_free(from, to)),
            Formula::Exists(v, _) if v == from => self.clone(),
            Formula::Exists(v, body) => Formula::exists(v.clone(), body.rename_free(from, to)),
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_formula(self))
    }
}

/// `base` itself if unused, otherwise `base` followed by the smallest unused
/// numeric suffix.
pub fn fresh_name(base: &str, avoid: &BTreeSet<String>) -> String {
    let stem = base.trim_end_matches(|c: char| c.is_ascii_digit());
    let stem = if stem.is_empty() { "v" } else { stem };
    if !avoid.contains(base) {
        return base.to_string();
    }
    (1..)
        .map(|i| format!("{stem}{i}"))
        .find(|n| !avoid.contains(n))
        .expect("unbounded supply of names")
}

/// A named, parameterised heap predicate. Each clause is an alternative
/// definition, tried in order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredicateDef {
    pub name: String,
    pub params: Vec<String>,
    pub clauses: Vec<Formula>,
}

impl PredicateDef {
    pub fn new(name: impl Into<String>, params: Vec<String>, clauses: Vec<Formula>) -> Self {
        PredicateDef {
            name: name.into(),
            params,
            clauses,
        }
    }

    /// Clauses with the parameters replaced by `args`.
    pub fn instantiate(&self, args: &[Term]) -> Vec<Formula> {
        let map: BTreeMap<String, Term> = self
            .params
            .iter()
            .cloned()
            .zip(args.iter().cloned())
            .collect();
        self.clauses.iter().map(|c| c.substitute(&map)).collect()
    }
}

impl fmt::Display for PredicateDef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "def {}({}) = ", self.name, self.params.join(", "))?;
        for (i, c) in self.clauses.iter().enumerate() {
            if i > 0 {
                f.write_str(" | ")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

pub type Defs = BTreeMap<String, PredicateDef>;

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(a: &str, b: &str) -> Formula {
        Formula::points_to(Term::sym(a), Term::sym(b))
    }

    #[test]
    fn free_symbols_skip_binders() {
        let f = Formula::exists(
            "y",
            Formula::conj(pt("x", "y"), Formula::call("list", vec![Term::sym("y")])),
        );
        assert_eq!(f.free_symbols(), BTreeSet::from(["x".to_string()]));
    }

    #[test]
    fn substitution_avoids_capture() {
        // ex y . x |-> y   with x := y   must not capture
        let f = Formula::exists("y", pt("x", "y"));
        let map = BTreeMap::from([("x".to_string(), Term::sym("y"))]);
        let g = f.substitute(&map);
        match &g {
            Formula::Exists(v, body) => {
                assert_ne!(v, "y");
                assert_eq!(**body, pt("y", v));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn fresh_names_skip_used() {
        let avoid = BTreeSet::from(["t".to_string(), "t1".to_string()]);
        assert_eq!(fresh_name("t", &avoid), "t2");
        assert_eq!(fresh_name("u", &avoid), "u");
    }

    #[test]
    fn size_counts_formula_nodes() {
        let f = Formula::inv(Formula::conj(pt("a", "b"), Formula::Emp));
        assert_eq!(f.size(), 4);
    }
}
