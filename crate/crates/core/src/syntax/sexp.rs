//! S-expression reader with byte spans.

use std::fmt;

use super::ParseError;

/// Half-open byte range with the 1-based line and column of its start.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default, PartialOrd, Ord, Hash)]
pub struct SourceSpan {
    pub start: usize,
    pub end: usize,
    pub line: usize,
    pub column: usize,
}

impl SourceSpan {
    pub fn slice<'a>(&self, src: &'a str) -> &'a str {
        src.get(self.start..self.end).unwrap_or("")
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Sexp {
    Word(String, SourceSpan),
    List(Vec<Sexp>, SourceSpan),
}

impl Sexp {
    pub fn span(&self) -> SourceSpan {
        match self {
            Sexp::Word(_, s) | Sexp::List(_, s) => *s,
        }
    }

    pub fn word(&self) -> Option<&str> {
        match self {
            Sexp::Word(w, _) => Some(w),
            Sexp::List(..) => None,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Sexp::Word(w, _) => format!("`{w}`"),
            Sexp::List(..) => "a list".to_string(),
        }
    }
}

pub const MAX_NESTING: usize = 256;

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
    line: usize,
    column: usize,
}

impl Cursor<'_> {
    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn here(&self) -> SourceSpan {
        SourceSpan { start: self.pos, end: self.pos, line: self.line, column: self.column }
    }

    fn skip_trivia(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.bump();
            } else if c == ';' {
                while let Some(c) = self.peek() {
                    if c == '\n' {
                        break;
                    }
                    self.bump();
                }
            } else {
                break;
            }
        }
    }
}

fn is_delim(c: char) -> bool {
    c.is_whitespace() || c == '(' || c == ')' || c == ';'
}

/// Reads every top-level expression in `src`.
pub fn read_all(src: &str) -> Result<Vec<Sexp>, ParseError> {
    let mut cur = Cursor { src, pos: 0, line: 1, column: 1 };
    // Each open list: its items and the span of its opening paren.
    let mut stack: Vec<(Vec<Sexp>, SourceSpan)> = Vec::new();
    let mut top = Vec::new();
    loop {
        cur.skip_trivia();
        let start = cur.here();
        let Some(c) = cur.peek() else { break };
        let item = match c {
            '(' => {
                cur.bump();
                if stack.len() >= MAX_NESTING {
                    let span = SourceSpan { end: cur.pos, ..start };
                    return Err(ParseError::new(span, format!("nesting deeper than {MAX_NESTING}"), &[]));
                }
                stack.push((Vec::new(), start));
                continue;
            }
            ')' => {
                cur.bump();
                let Some((items, open)) = stack.pop() else {
                    let span = SourceSpan { end: cur.pos, ..start };
                    return Err(ParseError::new(span, "unbalanced `)`", &["end of input", "("]));
                };
                Sexp::List(items, SourceSpan { end: cur.pos, ..open })
            }
            _ => {
                while cur.peek().is_some_and(|c| !is_delim(c)) {
                    cur.bump();
                }
                let span = SourceSpan { end: cur.pos, ..start };
                Sexp::Word(src[start.start..cur.pos].to_string(), span)
            }
        };
        match stack.last_mut() {
            Some((items, _)) => items.push(item),
            None => top.push(item),
        }
    }
    if let Some((_, open)) = stack.last() {
        let span = SourceSpan { end: open.start + 1, ..*open };
        return Err(ParseError::new(span, "unclosed `(`", &[")"]));
    }
    Ok(top)
}

/// Reads exactly one expression.
pub fn read_one(src: &str) -> Result<Sexp, ParseError> {
    let mut all = read_all(src)?;
    match all.len() {
        1 => Ok(all.pop().expect("one item")),
        0 => Err(ParseError::new(SourceSpan::default(), "empty input", &["an expression"])),
        _ => Err(ParseError::new(all[1].span(), "trailing input after the expression", &["end of input"])),
    }
}
