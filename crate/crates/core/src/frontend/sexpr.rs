use std::fmt;

use crate::error::{Error, Result};

/// A parsed S-expression with the position of its first character.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SExpr {
    Atom {
        text: String,
        line: usize,
        column: usize,
    },
    List {
        items: Vec<SExpr>,
        line: usize,
        column: usize,
    },
}

impl SExpr {
    pub fn position(&self) -> (usize, usize) {
        match self {
            SExpr::Atom { line, column, .. } | SExpr::List { line, column, .. } => (*line, *column),
        }
    }

    pub fn as_atom(&self) -> Option<&str> {
        match self {
            SExpr::Atom { text, .. } => Some(text),
            SExpr::List { .. } => None,
        }
    }

    pub fn as_list(&self) -> Option<&[SExpr]> {
        match self {
            SExpr::List { items, .. } => Some(items),
            SExpr::Atom { .. } => None,
        }
    }

    /// The leading atom of a list, e.g. `assert` in `(assert ...)`.
    pub fn head(&self) -> Option<&str> {
        self.as_list()?.first()?.as_atom()
    }

    pub fn error(&self, message: impl Into<String>) -> Error {
        let (line, column) = self.position();
        Error::Syntax {
            line,
            column,
            message: message.into(),
        }
    }
}

impl fmt::Display for SExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SExpr::Atom { text, .. } => f.write_str(text),
            SExpr::List { items, .. } => {
                f.write_str("(")?;
                for (i, it) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{it}")?;
                }
                f.write_str(")")
            }
        }
    }
}

struct Reader<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    column: usize,
}

impl Reader<'_> {
    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn skip_trivia(&mut self) {
        while let Some(&c) = self.chars.peek() {
            if c == ';' {
                while self.chars.peek().is_some_and(|&c| c != '\n') {
                    self.bump();
                }
            } else if c.is_whitespace() {
                self.bump();
            } else {
                break;
            }
        }
    }

    fn err(&self, message: &str) -> Error {
        Error::Syntax {
            line: self.line,
            column: self.column,
            message: message.to_string(),
        }
    }

    fn expr(&mut self) -> Result<SExpr> {
        self.skip_trivia();
        let (line, column) = (self.line, self.column);
        match self.chars.peek().copied() {
            None => Err(self.err("unexpected end of input")),
            Some(')') => Err(self.err("unexpected `)`")),
            Some('(') => {
                self.bump();
                let mut items = Vec::new();
                loop {
                    self.skip_trivia();
                    match self.chars.peek() {
                        None => {
                            return Err(Error::Syntax {
                                line,
                                column,
                                message: "unclosed `(`".into(),
                            })
                        }
                        Some(')') => {
                            self.bump();
                            return Ok(SExpr::List {
                                items,
                                line,
                                column,
                            });
                        }
                        Some(_) => items.push(self.expr()?),
                    }
                }
            }
            Some('|') => {
                self.bump();
                let mut text = String::new();
                loop {
                    match self.bump() {
                        None => return Err(self.err("unclosed `|`")),
                        Some('|') => break,
                        Some(c) => text.push(c),
                    }
                }
                Ok(SExpr::Atom { text, line, column })
            }
            Some(_) => {
                let mut text = String::new();
                while let Some(&c) = self.chars.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' || c == ';' {
                        break;
                    }
                    text.push(c);
                    self.bump();
                }
                Ok(SExpr::Atom { text, line, column })
            }
        }
    }
}

/// Reads every top-level expression of `text`.
pub fn parse_sexprs(text: &str) -> Result<Vec<SExpr>> {
    let mut r = Reader {
        chars: text.chars().peekable(),
        line: 1,
        column: 1,
    };
    let mut out = Vec::new();
    loop {
        r.skip_trivia();
        if r.chars.peek().is_none() {
            return Ok(out);
        }
        out.push(r.expr()?);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nested_lists_and_comments() {
        let e = parse_sexprs("; header\n(a (b c) d) e").unwrap();
        assert_eq!(e.len(), 2);
        assert_eq!(e[0].to_string(), "(a (b c) d)");
        assert_eq!(e[1].position(), (2, 13));
    }

    #[test]
    fn unclosed_list_reports_its_start() {
        match parse_sexprs("\n  (a (b)") {
            Err(Error::Syntax { line, column, .. }) => assert_eq!((line, column), (2, 3)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn stray_close_paren() {
        assert!(matches!(
            parse_sexprs("a )"),
            Err(Error::Syntax {
                line: 1,
                column: 3,
                ..
            })
        ));
    }
}
