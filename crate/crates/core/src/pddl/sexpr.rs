//! Minimal s-expression reader with source positions.

use super::PddlError;

/// Line/column of a token, both 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Sexpr {
    Atom(String, Pos),
    List(Vec<Sexpr>, Pos),
}

impl Sexpr {
    pub fn pos(&self) -> Pos {
        match self {
            Sexpr::Atom(_, p) | Sexpr::List(_, p) => *p,
        }
    }

    pub fn as_atom(&self) -> Option<&str> {
        match self {
            Sexpr::Atom(s, _) => Some(s),
            Sexpr::List(..) => None,
        }
    }

    pub fn as_list(&self) -> Option<&[Sexpr]> {
        match self {
            Sexpr::List(items, _) => Some(items),
            Sexpr::Atom(..) => None,
        }
    }

    /// First element of a list when it is an atom.
    pub fn head(&self) -> Option<&str> {
        self.as_list()
            .and_then(|l| l.first())
            .and_then(Sexpr::as_atom)
    }
}

/// Parse exactly one top-level expression. Identifiers are lower-cased.
pub fn parse(text: &str) -> Result<Sexpr, PddlError> {
    let mut reader = Reader {
        chars: text.chars().peekable(),
        line: 1,
        col: 1,
    };
    reader.skip_ws();
    let expr = match reader.next_expr()? {
        Some(e) => e,
        None => return Err(reader.err("empty input")),
    };
    reader.skip_ws();
    if reader.chars.peek().is_some() {
        return Err(reader.err("trailing input after top-level expression"));
    }
    Ok(expr)
}

struct Reader<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    col: usize,
}

impl Reader<'_> {
    fn pos(&self) -> Pos {
        Pos {
            line: self.line,
            col: self.col,
        }
    }

    fn err(&self, msg: &str) -> PddlError {
        PddlError::Syntax {
            line: self.line,
            col: self.col,
            msg: msg.to_string(),
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn skip_ws(&mut self) {
        while let Some(&c) = self.chars.peek() {
            if c == ';' {
                while let Some(&c) = self.chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    self.bump();
                }
            } else if c.is_whitespace() {
                self.bump();
            } else {
                break;
            }
        }
    }

    fn next_expr(&mut self) -> Result<Option<Sexpr>, PddlError> {
        self.skip_ws();
        let start = self.pos();
        match self.chars.peek().copied() {
            None => Ok(None),
            Some(')') => Err(self.err("unexpected ')'")),
            Some('(') => {
                self.bump();
                let mut items = Vec::new();
                loop {
                    self.skip_ws();
                    match self.chars.peek() {
                        None => {
                            return Err(PddlError::Syntax {
                                line: start.line,
                                col: start.col,
                                msg: "unclosed '('".into(),
                            })
                        }
                        Some(')') => {
                            self.bump();
                            return Ok(Some(Sexpr::List(items, start)));
                        }
                        _ => {
                            if let Some(e) = self.next_expr()? {
                                items.push(e);
                            }
                        }
                    }
                }
            }
            Some(_) => {
                let mut s = String::new();
                while let Some(&c) = self.chars.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' || c == ';' {
                        break;
                    }
                    s.push(c.to_ascii_lowercase());
                    self.bump();
                }
                Ok(Some(Sexpr::Atom(s, start)))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn positions_and_comments() {
        let e = parse("; hi\n(a (B c)\n  d)").unwrap();
        let items = e.as_list().unwrap();
        assert_eq!(e.pos(), Pos { line: 2, col: 1 });
        assert_eq!(items[1].head(), Some("b"));
        assert_eq!(items[2].pos(), Pos { line: 3, col: 3 });
    }

    #[test]
    fn unclosed_reports_open_paren() {
        match parse("\n  (a (b)") {
            Err(PddlError::Syntax { line, col, .. }) => assert_eq!((line, col), (2, 3)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn stray_close() {
        assert!(matches!(
            parse("(a))"),
            Err(PddlError::Syntax {
                line: 1,
                col: 4,
                ..
            })
        ));
    }
}
