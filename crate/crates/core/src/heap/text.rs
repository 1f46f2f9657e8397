//! Line-oriented heap model files.
//!
//! ```text
//! # comment
//! stack x -> a
//! a -> b
//! b .next -> nil
//! ```

use std::fmt::Write as _;

use thiserror::Error;

use super::{Atom, Edge, FieldLabel, Heap, Location, StackEnv, Value};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct HeapFormatError {
    pub line: usize,
    pub message: String,
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_alphabetic() || c == '_')
        && chars.all(|c| c.is_alphanumeric() || c == '_')
}

fn parse_location(s: &str, line: usize) -> Result<Location, HeapFormatError> {
    if is_ident(s) && s != "nil" {
        Ok(Location::new(s))
    } else {
        Err(HeapFormatError {
            line,
            message: format!("expected a location name, found `{s}`"),
        })
    }
}

fn parse_value(s: &str, line: usize) -> Result<Value, HeapFormatError> {
    if s == "nil" {
        return Ok(Value::Atom(Atom::Nil));
    }
    if let Ok(n) = s.parse::<i64>() {
        return Ok(Value::Atom(Atom::Int(n)));
    }
    parse_location(s, line).map(Value::Loc)
}

/// Parses a heap file into its edges and stack roots. Duplicate edges and
/// rebinding a stack variable are rejected; cell conflicts are left to
/// validation.
pub fn parse_heap_text(text: &str) -> Result<(Heap, StackEnv), HeapFormatError> {
    let mut heap = Heap::new();
    let mut stack = StackEnv::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (lhs, rhs) = content.split_once("->").ok_or_else(|| HeapFormatError {
            line,
            message: "expected `->`".into(),
        })?;
        let lhs: Vec<&str> = lhs.split_whitespace().collect();
        let rhs = rhs.trim();
        if rhs.is_empty() || rhs.contains(char::is_whitespace) {
            return Err(HeapFormatError {
                line,
                message: format!("expected a single value after `->`, found `{rhs}`"),
            });
        }
        match lhs.as_slice() {
            ["stack", var] => {
                if !is_ident(var) {
                    return Err(HeapFormatError {
                        line,
                        message: format!("invalid stack variable `{var}`"),
                    });
                }
                let loc = parse_location(rhs, line)?;
                if stack.bind(*var, loc).is_some() {
                    return Err(HeapFormatError {
                        line,
                        message: format!("stack variable `{var}` bound twice"),
                    });
                }
            }
            [src] => {
                let (src, field) = match src.split_once('.') {
                    Some((s, f)) => (s, Some(f)),
                    None => (*src, None),
                };
                let e = edge(src, field, rhs, line)?;
                if !heap.insert(e) {
                    return Err(HeapFormatError {
                        line,
                        message: "duplicate edge".into(),
                    });
                }
            }
            [src, field] if field.starts_with('.') => {
                let e = edge(src, Some(&field[1..]), rhs, line)?;
                if !heap.insert(e) {
                    return Err(HeapFormatError {
                        line,
                        message: "duplicate edge".into(),
                    });
                }
            }
            _ => return Err(HeapFormatError {
                line,
                message:
                    "expected `stack <var> -> <loc>`, `<loc> -> <val>` or `<loc> .<field> -> <val>`"
                        .into(),
            }),
        }
    }
    Ok((heap, stack))
}

fn edge(src: &str, field: Option<&str>, rhs: &str, line: usize) -> Result<Edge, HeapFormatError> {
    let source = parse_location(src, line)?;
    let label = match field {
        None => FieldLabel::Eps,
        Some(f) if is_ident(f) => FieldLabel::named(f),
        Some(f) => {
            return Err(HeapFormatError {
                line,
                message: format!("invalid field name `{f}`"),
            })
        }
    };
    Ok(Edge::new(source, label, parse_value(rhs, line)?))
}

/// Inverse of [`parse_heap_text`]: stack lines first, then one edge per line.
pub fn write_heap_text(h: &Heap, s: &StackEnv) -> String {
    let mut out = String::new();
    for (var, loc) in s.roots() {
        let _ = writeln!(out, "stack {var} -> {loc}");
    }
    for e in h {
        let _ = writeln!(out, "{e}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_line_forms() {
        let text = "# two cells\nstack x -> a\n\na -> b   # plain\nb .next -> nil\nb.val -> -3\n";
        let (h, s) = parse_heap_text(text).unwrap();
        assert_eq!(s.get("x"), Some(&Location::new("a")));
        let expected: Heap = [
            Edge::plain("a", "b"),
            Edge::field("b", "next", "nil"),
            Edge::field("b", "val", "-3"),
        ]
        .into_iter()
        .collect();
        assert_eq!(h, expected);
        assert_eq!(parse_heap_text(&write_heap_text(&h, &s)).unwrap(), (h, s));
    }

    #[test]
    fn rejects_malformed_lines() {
        let err = parse_heap_text("a -> b\na b\n").unwrap_err();
        assert_eq!(err.line, 2);
        assert!(parse_heap_text("stack x -> nil").is_err());
        assert!(parse_heap_text("stack x -> a\nstack x -> b").is_err());
        assert!(parse_heap_text("nil -> a").is_err());
        assert!(parse_heap_text("a -> b c").is_err());
    }
}
