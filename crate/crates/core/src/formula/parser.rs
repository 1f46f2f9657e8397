use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use super::lexer::{lex, Pos, Tok, Token};
use super::{Defs, Formula, PredicateDef, Term};
use crate::heap::{Atom, FieldLabel};

const KEYWORDS: &[&str] = &["emp", "true", "false", "ex", "nil"];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub expected: Vec<String>,
    pub found: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: ", self.line, self.column)?;
        match self.expected.as_slice() {
            [] => write!(f, "unexpected {}", self.found),
            [one] => write!(f, "expected {one}, found {}", self.found),
            many => write!(
                f,
                "expected one of {}, found {}",
                many.join(", "),
                self.found
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DefsError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("predicate `{0}` is defined twice")]
    DuplicateDefinition(String),
    #[error("predicate `{0}` uses unbound symbol `{1}`")]
    UnboundSymbol(String, String),
    #[error("predicate `{pred}` calls `{callee}` with {given} argument(s), expected {expected}")]
    ArityMismatch {
        pred: String,
        callee: String,
        given: usize,
        expected: usize,
    },
}

struct Parser {
    toks: Vec<Token>,
    at: usize,
    expected: BTreeSet<String>,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn new(text: &str, first_line: usize) -> PResult<Self> {
        let toks = lex(text, first_line).map_err(|e| ParseError {
            line: e.pos.line,
            column: e.pos.column,
            expected: Vec::new(),
            found: format!("`{}`", e.found),
        })?;
        Ok(Parser {
            toks,
            at: 0,
            expected: BTreeSet::new(),
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.at].tok
    }

    fn peek2(&self) -> &Tok {
        &self.toks[(self.at + 1).min(self.toks.len() - 1)].tok
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].pos
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].tok.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        self.expected.clear();
        t
    }

    fn error(&self) -> ParseError {
        let pos = self.pos();
        ParseError {
            line: pos.line,
            column: pos.column,
            expected: self.expected.iter().cloned().collect(),
            found: self.peek().describe(),
        }
    }

    /// Consumes `tok` if it is next; records it as expected otherwise.
    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            self.expected.insert(format!("`{}`", tok.symbol()));
            false
        }
    }

    fn expect(&mut self, tok: &Tok) -> PResult<()> {
        if self.eat(tok) {
            Ok(())
        } else {
            Err(self.error())
        }
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        if matches!(self.peek(), Tok::Ident(s) if s == kw) {
            self.bump();
            true
        } else {
            self.expected.insert(format!("`{kw}`"));
            false
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                let s = s.clone();
                self.bump();
                Ok(s)
            }
            _ => {
                self.expected.insert("identifier".into());
                Err(self.error())
            }
        }
    }

    fn end(&mut self) -> PResult<()> {
        self.expect(&Tok::Eof)
    }

    fn disj(&mut self) -> PResult<Formula> {
        let mut f = self.conj()?;
        while self.eat(&Tok::Plus) {
            let r = self.conj()?;
            f = Formula::disj(f, r);
        }
        Ok(f)
    }

    fn conj(&mut self) -> PResult<Formula> {
        let mut f = self.postfix()?;
        while self.eat(&Tok::Star) {
            let r = self.postfix()?;
            f = Formula::conj(f, r);
        }
        Ok(f)
    }

    fn postfix(&mut self) -> PResult<Formula> {
        let mut f = self.atom()?;
        while self.eat(&Tok::InvMark) {
            f = Formula::inv(f);
        }
        Ok(f)
    }

    fn atom(&mut self) -> PResult<Formula> {
        match self.peek().clone() {
            Tok::LParen => {
                self.bump();
                let f = self.disj()?;
                self.expect(&Tok::RParen)?;
                Ok(f)
            }
            Tok::Ident(s) => match s.as_str() {
                "emp" => {
                    self.bump();
                    Ok(Formula::Emp)
                }
                "false" => {
                    self.bump();
                    Ok(Formula::False)
                }
                "true" => {
                    self.bump();
                    if self.eat(&Tok::LParen) {
                        let obj = self.ident()?;
                        self.expect(&Tok::RParen)?;
                        Ok(Formula::TrueOf(Term::Sym(obj)))
                    } else {
                        Ok(Formula::True)
                    }
                }
                "ex" => {
                    self.bump();
                    let v = self.ident()?;
                    self.expect(&Tok::Dot)?;
                    let body = self.disj()?;
                    Ok(Formula::exists(v, body))
                }
                "nil" => {
                    self.expected.extend(atom_starts());
                    Err(self.error())
                }
                _ if *self.peek2() == Tok::LParen => {
                    let name = self.ident()?;
                    self.bump();
                    let mut args = Vec::new();
                    if !self.eat(&Tok::RParen) {
                        loop {
                            args.push(self.value()?);
                            if self.eat(&Tok::RParen) {
                                break;
                            }
                            self.expect(&Tok::Comma)?;
                        }
                    }
                    Ok(Formula::Call(name, args))
                }
                _ => self.points_to(),
            },
            _ => {
                self.expected.extend(atom_starts());
                Err(self.error())
            }
        }
    }

    fn points_to(&mut self) -> PResult<Formula> {
        let mut fields = Vec::new();
        let root = self.ident()?;
        while self.eat(&Tok::Dot) {
            fields.push(self.ident()?);
        }
        self.expect(&Tok::MapsTo)?;
        let target = self.value()?;
        let mut base = Term::Sym(root);
        let label = match fields.pop() {
            None => FieldLabel::Eps,
            Some(last) => {
                for f in fields {
                    base = Term::path(base, f);
                }
                FieldLabel::Named(last)
            }
        };
        Ok(Formula::PointsTo {
            base,
            label,
            target,
        })
    }

    fn value(&mut self) -> PResult<Term> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(Term::Atom(Atom::Int(n)))
            }
            Tok::Ident(s) if s == "nil" => {
                self.bump();
                Ok(Term::Atom(Atom::Nil))
            }
            _ => {
                self.expected.insert("`nil`".into());
                self.expected.insert("integer".into());
                self.ident().map(Term::Sym)
            }
        }
    }

    fn def(&mut self) -> PResult<PredicateDef> {
        if !self.eat_keyword("def") {
            return Err(self.error());
        }
        let name = self.ident()?;
        self.expect(&Tok::LParen)?;
        let mut params = Vec::new();
        if !self.eat(&Tok::RParen) {
            loop {
                params.push(self.ident()?);
                if self.eat(&Tok::RParen) {
                    break;
                }
                self.expect(&Tok::Comma)?;
            }
        }
        self.expect(&Tok::Eq)?;
        let mut clauses = vec![self.disj()?];
        while self.eat(&Tok::Bar) {
            clauses.push(self.disj()?);
        }
        Ok(PredicateDef {
            name,
            params,
            clauses,
        })
    }
}

fn atom_starts() -> impl Iterator<Item = String> {
    ["`emp`", "`true`", "`false`", "`ex`", "`(`", "identifier"]
        .into_iter()
        .map(String::from)
}

/// Parses one formula.
pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    parse_formula_at(text, 1)
}

fn parse_formula_at(text: &str, line: usize) -> Result<Formula, ParseError> {
    let mut p = Parser::new(text, line)?;
    let f = p.disj()?;
    p.end()?;
    Ok(f)
}

fn check_def(d: &PredicateDef) -> Result<(), DefsError> {
    let params: BTreeSet<&str> = d.params.iter().map(String::as_str).collect();
    for clause in &d.clauses {
        if let Some(s) = clause
            .free_symbols()
            .into_iter()
            .find(|s| !params.contains(s.as_str()))
        {
            return Err(DefsError::UnboundSymbol(d.name.clone(), s));
        }
    }
    Ok(())
}

fn check_arities(defs: &Defs) -> Result<(), DefsError> {
    for d in defs.values() {
        for clause in &d.clauses {
            let mut err = None;
            clause.visit(&mut |f| {
                if let Formula::Call(callee, args) = f {
                    if let Some(target) = defs.get(callee) {
                        if target.params.len() != args.len() && err.is_none() {
                            err = Some(DefsError::ArityMismatch {
                                pred: d.name.clone(),
                                callee: callee.clone(),
                                given: args.len(),
                                expected: target.params.len(),
                            });
                        }
                    }
                }
            });
            if let Some(e) = err {
                return Err(e);
            }
        }
    }
    Ok(())
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let t = l.trim();
        (!t.is_empty() && !t.starts_with('#')).then_some((i + 1, l))
    })
}

fn first_word(line: &str) -> &str {
    let t = line.trim_start();
    let end = t
        .find(|c: char| !(c.is_alphanumeric() || c == '_'))
        .unwrap_or(t.len());
    &t[..end]
}

/// Parses `def name(p1, ..., pn) = clause | clause ...` lines.
pub fn parse_defs(text: &str) -> Result<Defs, DefsError> {
    let mut defs = Defs::new();
    for (line, content) in content_lines(text) {
        let mut p = Parser::new(content, line)?;
        let d = p.def()?;
        p.end()?;
        add_def(&mut defs, d)?;
    }
    check_arities(&defs)?;
    Ok(defs)
}

fn add_def(defs: &mut Defs, d: PredicateDef) -> Result<(), DefsError> {
    check_def(&d)?;
    if defs.contains_key(&d.name) {
        return Err(DefsError::DuplicateDefinition(d.name));
    }
    defs.insert(d.name.clone(), d);
    Ok(())
}

/// A non-definition line of a formula file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Directive {
    /// `check <formula>`: satisfaction against a heap model.
    Check(Formula),
    /// `query <formula>` or a bare formula line.
    Query(Formula),
}

impl Directive {
    pub fn formula(&self) -> &Formula {
        match self {
            Directive::Check(f) | Directive::Query(f) => f,
        }
    }
}

/// A formula file: definitions followed by checks and queries.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Document {
    pub defs: Defs,
    pub directives: Vec<Directive>,
}

pub fn parse_document(text: &str) -> Result<Document, DefsError> {
    let mut doc = Document::default();
    for (line, content) in content_lines(text) {
        match first_word(content) {
            "def" => {
                let mut p = Parser::new(content, line)?;
                let d = p.def()?;
                p.end()?;
                add_def(&mut doc.defs, d)?;
            }
            kw @ ("check" | "query") => {
                let mut p = Parser::new(content, line)?;
                p.bump();
                let f = p.disj()?;
                p.end()?;
                doc.directives.push(if kw == "check" {
                    Directive::Check(f)
                } else {
                    Directive::Query(f)
                });
            }
            _ => doc
                .directives
                .push(Directive::Query(parse_formula_at(content, line)?)),
        }
    }
    check_arities(&doc.defs)?;
    Ok(doc)
}

/// Parses `spec name: {pre} -> {post}`.
pub fn parse_spec_line(text: &str, line: usize) -> Result<(String, Formula, Formula), ParseError> {
    let mut p = Parser::new(text, line)?;
    if !p.eat_keyword("spec") {
        return Err(p.error());
    }
    let name = p.ident()?;
    p.expect(&Tok::Colon)?;
    p.expect(&Tok::LBrace)?;
    let pre = p.disj()?;
    p.expect(&Tok::RBrace)?;
    p.expect(&Tok::Arrow)?;
    p.expect(&Tok::LBrace)?;
    let post = p.disj()?;
    p.expect(&Tok::RBrace)?;
    p.end()?;
    Ok((name, pre, post))
}

/// A spec file: `spec name: {pre} -> {post}` lines mixed with definitions.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SpecDocument {
    pub defs: Defs,
    /// `(name, pre, post)` in file order.
    pub specs: Vec<(String, Formula, Formula)>,
}

pub fn parse_spec_document(text: &str) -> Result<SpecDocument, DefsError> {
    let mut doc = SpecDocument::default();
    for (line, content) in content_lines(text) {
        if first_word(content) == "spec" {
            doc.specs.push(parse_spec_line(content, line)?);
        } else {
            let mut p = Parser::new(content, line)?;
            let d = p.def()?;
            p.end()?;
            add_def(&mut doc.defs, d)?;
        }
    }
    check_arities(&doc.defs)?;
    Ok(doc)
}

/// Adds the definitions of `more` to `into`, rejecting duplicates, and
/// checks call arities across the combined set.
pub fn merge_defs(into: &mut Defs, more: Defs) -> Result<(), DefsError> {
    for (_, d) in more {
        add_def(into, d)?;
    }
    check_arities(into)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(a: &str, b: &str) -> Formula {
        Formula::points_to(Term::sym(a), Term::sym(b))
    }

    #[test]
    fn conj_binds_tighter_than_disj() {
        let f = parse_formula("a |-> b * c |-> d + e |-> f").unwrap();
        assert_eq!(
            f,
            Formula::disj(Formula::conj(pt("a", "b"), pt("c", "d")), pt("e", "f"))
        );
        let g = parse_formula("a |-> b + c |-> d * e |-> f").unwrap();
        assert_eq!(
            g,
            Formula::disj(pt("a", "b"), Formula::conj(pt("c", "d"), pt("e", "f")))
        );
    }

    #[test]
    fn operators_associate_left() {
        let f = parse_formula("a |-> b * b |-> c * c |-> d").unwrap();
        assert_eq!(
            f,
            Formula::conj(Formula::conj(pt("a", "b"), pt("b", "c")), pt("c", "d"))
        );
    }

    #[test]
    fn field_paths_nest_left() {
        let f = parse_formula("a.f1.f2 |-> x").unwrap();
        assert_eq!(
            f,
            Formula::field(Term::path(Term::sym("a"), "f1"), "f2", Term::sym("x"))
        );
    }

    #[test]
    fn postfix_inversion() {
        assert_eq!(parse_formula("emp^-1").unwrap(), Formula::inv(Formula::Emp));
        assert_eq!(
            parse_formula("((a |-> b)^-1)^-1").unwrap(),
            Formula::inv(Formula::inv(pt("a", "b")))
        );
    }

    #[test]
    fn existential_body_extends_right() {
        let f = parse_formula("ex y . x |-> y * list(y) + emp").unwrap();
        assert_eq!(
            f,
            Formula::exists(
                "y",
                Formula::disj(
                    Formula::conj(pt("x", "y"), Formula::call("list", vec![Term::sym("y")])),
                    Formula::Emp
                )
            )
        );
    }

    #[test]
    fn constants_and_values() {
        assert_eq!(
            parse_formula("true(a) * true * false * emp").unwrap(),
            Formula::conj(
                Formula::conj(
                    Formula::conj(Formula::TrueOf(Term::sym("a")), Formula::True),
                    Formula::False
                ),
                Formula::Emp
            )
        );
        assert_eq!(
            parse_formula("x |-> nil * y.v |-> -4").unwrap(),
            Formula::conj(
                Formula::points_to(Term::sym("x"), Term::nil()),
                Formula::field(Term::sym("y"), "v", Term::Atom(Atom::Int(-4)))
            )
        );
    }

    #[test]
    fn errors_carry_position_and_expectations() {
        let err = parse_formula("a |-> b *").unwrap_err();
        assert_eq!((err.line, err.column), (1, 10));
        assert!(err.expected.contains(&"`emp`".to_string()));
        assert_eq!(err.found, "end of input");

        let err = parse_formula("a b").unwrap_err();
        assert_eq!((err.line, err.column), (1, 3));
        assert!(err.expected.contains(&"`|->`".to_string()));

        assert!(parse_formula("(a |-> b").is_err());
        assert!(parse_formula("nil |-> a").is_err());
        assert!(parse_formula("a |-> emp").is_err());
    }

    #[test]
    fn list_definition() {
        let defs = parse_defs("def list(x) = emp + ex y . x |-> y * list(y)").unwrap();
        let d = &defs["list"];
        assert_eq!(d.params, ["x"]);
        assert_eq!(
            d.clauses,
            vec![Formula::disj(
                Formula::Emp,
                Formula::exists(
                    "y",
                    Formula::conj(pt("x", "y"), Formula::call("list", vec![Term::sym("y")]))
                )
            )]
        );
    }

    #[test]
    fn clause_alternatives() {
        let defs = parse_defs("def ls(x) = emp | ex y . x |-> y * ls(y)").unwrap();
        assert_eq!(defs["ls"].clauses.len(), 2);
    }

    #[test]
    fn object_predicate_with_remainder() {
        let defs = parse_defs("def pair(a) = a.fst |-> nil * true(a)").unwrap();
        assert_eq!(
            defs["pair"].clauses[0],
            Formula::conj(
                Formula::field(Term::sym("a"), "fst", Term::nil()),
                Formula::TrueOf(Term::sym("a"))
            )
        );
    }

    #[test]
    fn definition_errors() {
        assert_eq!(
            parse_defs("def bad(x) = y |-> nil"),
            Err(DefsError::UnboundSymbol("bad".into(), "y".into()))
        );
        assert_eq!(
            parse_defs("def p(x) = emp\n# again\ndef p(y) = emp"),
            Err(DefsError::DuplicateDefinition("p".into()))
        );
        assert!(matches!(
            parse_defs("def p(x) = q(x, x)\ndef q(y) = emp"),
            Err(DefsError::ArityMismatch { .. })
        ));
        match parse_defs("def p(x) = emp\ndef q(x) = x |->") {
            Err(DefsError::Parse(e)) => assert_eq!(e.line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn documents_mix_defs_and_directives() {
        let doc = parse_document(
            "# heap facts\ndef cell(x) = x |-> nil\ncheck cell(a) * true\nquery a |-> b\nemp\n",
        )
        .unwrap();
        assert_eq!(doc.defs.len(), 1);
        assert_eq!(doc.directives.len(), 3);
        assert!(matches!(doc.directives[0], Directive::Check(_)));
        assert_eq!(doc.directives[2], Directive::Query(Formula::Emp));
    }

    #[test]
    fn spec_documents() {
        let doc = parse_spec_document(
            "# heap ops\ndef cell(x) = ex v . x |-> v\nspec dispose: {cell(x)} -> {emp}\n",
        )
        .unwrap();
        assert_eq!(doc.specs.len(), 1);
        assert!(doc.defs.contains_key("cell"));
        assert!(parse_spec_document("spec s: {x |-> y} -> {p(x)}\nx |-> y").is_err());
    }

    #[test]
    fn spec_lines() {
        let (name, pre, post) = parse_spec_line("spec dispose: {x |-> y} -> {emp}", 1).unwrap();
        assert_eq!(name, "dispose");
        assert_eq!(pre, pt("x", "y"));
        assert_eq!(post, Formula::Emp);
        assert!(parse_spec_line("spec s: {x |-> y} {emp}", 1).is_err());
    }
}
