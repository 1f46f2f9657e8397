use std::fmt;

/// 1-based source position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Pos {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    Int(i64),
    MapsTo,
    Star,
    Plus,
    InvMark,
    LParen,
    RParen,
    Dot,
    Comma,
    Eq,
    Bar,
    Colon,
    LBrace,
    RBrace,
    Arrow,
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(n) => format!("`{n}`"),
            Tok::Eof => "end of input".into(),
            other => format!("`{}`", other.symbol()),
        }
    }

    pub(crate) fn symbol(&self) -> &'static str {
        match self {
            Tok::MapsTo => "|->",
            Tok::Star => "*",
            Tok::Plus => "+",
            Tok::InvMark => "^-1",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::Dot => ".",
            Tok::Comma => ",",
            Tok::Eq => "=",
            Tok::Bar => "|",
            Tok::Colon => ":",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::Arrow => "->",
            Tok::Ident(_) => "identifier",
            Tok::Int(_) => "integer",
            Tok::Eof => "end of input",
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

#[derive(Debug, Clone)]
pub(crate) struct LexError {
    pub pos: Pos,
    pub found: String,
}

/// Tokenises `text`; `first_line` is the line number of its first line.
pub(crate) fn lex(text: &str, first_line: usize) -> Result<Vec<Token>, LexError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, first_line, 1usize);

    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, column: col };
        let starts = |s: &str| {
            s.chars()
                .enumerate()
                .all(|(k, sc)| chars.get(i + k) == Some(&sc))
        };
        let (tok, width) = if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        } else if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        } else if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        } else if starts("|->") {
            (Tok::MapsTo, 3)
        } else if starts("^-1") {
            (Tok::InvMark, 3)
        } else if starts("->") {
            (Tok::Arrow, 2)
        } else if c == '-' || c.is_ascii_digit() {
            let mut j = i + 1;
            while j < chars.len() && chars[j].is_ascii_digit() {
                j += 1;
            }
            let s: String = chars[i..j].iter().collect();
            match s.parse::<i64>() {
                Ok(n) => (Tok::Int(n), j - i),
                Err(_) => return Err(LexError { pos, found: s }),
            }
        } else if c.is_alphabetic() || c == '_' {
            let mut j = i + 1;
            while j < chars.len() && (chars[j].is_alphanumeric() || chars[j] == '_') {
                j += 1;
            }
            (Tok::Ident(chars[i..j].iter().collect()), j - i)
        } else {
            let tok = match c {
                '*' | '∘' => Tok::Star,
                '+' | '∥' => Tok::Plus,
                '↦' => Tok::MapsTo,
                '⁻' if chars.get(i + 1) == Some(&'¹') => {
                    out.push(Token {
                        tok: Tok::InvMark,
                        pos,
                    });
                    i += 2;
                    col += 2;
                    continue;
                }
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '.' => Tok::Dot,
                ',' => Tok::Comma,
                '=' => Tok::Eq,
                '|' => Tok::Bar,
                ':' => Tok::Colon,
                '{' => Tok::LBrace,
                '}' => Tok::RBrace,
                _ => {
                    return Err(LexError {
                        pos,
                        found: c.to_string(),
                    })
                }
            };
            (tok, 1)
        };
        out.push(Token { tok, pos });
        i += width;
        col += width;
    }
    out.push(Token {
        tok: Tok::Eof,
        pos: Pos { line, column: col },
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        lex(s, 1).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn operators_and_aliases() {
        assert_eq!(
            toks("a |-> b * c ↦ -2 ∘ (d)^-1 + e ∥ f⁻¹"),
            vec![
                Tok::Ident("a".into()),
                Tok::MapsTo,
                Tok::Ident("b".into()),
                Tok::Star,
                Tok::Ident("c".into()),
                Tok::MapsTo,
                Tok::Int(-2),
                Tok::Star,
                Tok::LParen,
                Tok::Ident("d".into()),
                Tok::RParen,
                Tok::InvMark,
                Tok::Plus,
                Tok::Ident("e".into()),
                Tok::Plus,
                Tok::Ident("f".into()),
                Tok::InvMark,
                Tok::Eof,
            ]
        );
    }

    #[test]
    fn positions_track_lines() {
        let ts = lex("a\n  # note\n   b", 5).unwrap();
        assert_eq!(ts[1].pos, Pos { line: 7, column: 4 });
    }

    #[test]
    fn stray_character_is_an_error() {
        let err = lex("a ! b", 1).unwrap_err();
        assert_eq!(err.pos, Pos { line: 1, column: 3 });
    }
}
