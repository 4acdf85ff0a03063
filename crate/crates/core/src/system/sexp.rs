//! S-expression reader with source positions.

use super::SystemError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Sexp {
    Atom(String, Pos),
    List(Vec<Sexp>, Pos),
}

impl Sexp {
    pub fn pos(&self) -> Pos {
        match self {
            Sexp::Atom(_, p) | Sexp::List(_, p) => *p,
        }
    }

    pub fn atom(&self) -> Option<&str> {
        match self {
            Sexp::Atom(s, _) => Some(s),
            Sexp::List(..) => None,
        }
    }

    pub fn list(&self) -> Option<&[Sexp]> {
        match self {
            Sexp::List(xs, _) => Some(xs),
            Sexp::Atom(..) => None,
        }
    }

    /// The head symbol of a non-empty list.
    pub fn head(&self) -> Option<&str> {
        self.list()?.first()?.atom()
    }
}

pub fn error(pos: Pos, expected: impl Into<String>) -> SystemError {
    SystemError::Parse {
        line: pos.line,
        col: pos.col,
        expected: expected.into(),
    }
}

struct Reader<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    pos: Pos,
}

impl Reader<'_> {
    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.pos.line += 1;
            self.pos.col = 1;
        } else {
            self.pos.col += 1;
        }
        Some(c)
    }

    fn skip_blank(&mut self) {
        while let Some(&c) = self.chars.peek() {
            if c == ';' {
                while let Some(c) = self.bump() {
                    if c == '\n' {
                        break;
                    }
                }
            } else if c.is_whitespace() {
                self.bump();
            } else {
                break;
            }
        }
    }

    fn read(&mut self) -> Result<Sexp, SystemError> {
        self.skip_blank();
        let start = self.pos;
        match self.chars.peek() {
            None => Err(error(start, "'(' or atom")),
            Some(')') => Err(error(start, "'(' or atom, found ')'")),
            Some('(') => {
                self.bump();
                let mut items = Vec::new();
                loop {
                    self.skip_blank();
                    match self.chars.peek() {
                        None => return Err(error(self.pos, "')'")),
                        Some(')') => {
                            self.bump();
                            return Ok(Sexp::List(items, start));
                        }
                        Some(_) => items.push(self.read()?),
                    }
                }
            }
            Some(_) => {
                let mut s = String::new();
                while let Some(&c) = self.chars.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' || c == ';' {
                        break;
                    }
                    s.push(c);
                    self.bump();
                }
                Ok(Sexp::Atom(s, start))
            }
        }
    }
}

/// Reads exactly one s-expression from `text`.
pub fn read_one(text: &str) -> Result<Sexp, SystemError> {
    let mut r = Reader {
        chars: text.chars().peekable(),
        pos: Pos { line: 1, col: 1 },
    };
    let s = r.read()?;
    r.skip_blank();
    if r.chars.peek().is_some() {
        return Err(error(r.pos, "end of input"));
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn positions_and_comments() {
        let s = read_one("; header\n(a (b c)\n  d)").unwrap();
        assert_eq!(s.pos(), Pos { line: 2, col: 1 });
        let xs = s.list().unwrap();
        assert_eq!(xs[2].pos(), Pos { line: 3, col: 3 });
        assert_eq!(xs[1].head(), Some("b"));
    }

    #[test]
    fn empty_and_unbalanced() {
        assert!(matches!(read_one(""), Err(SystemError::Parse { line: 1, col: 1, .. })));
        assert!(matches!(read_one("(a"), Err(SystemError::Parse { line: 1, col: 3, .. })));
        assert!(matches!(read_one("a)"), Err(SystemError::Parse { line: 1, col: 2, .. })));
    }
}
