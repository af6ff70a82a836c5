//! Recursive-descent parser for DSL source text.

use super::grammar::in_union_alphabet;
use super::{DslError, DslTree};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Open,
    Close,
}

struct Lexed {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Lexed>, DslError> {
    let mut out = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        match c {
            '\n' => {
                chars.next();
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                chars.next();
                col += 1;
            }
            '{' => {
                out.push(Lexed { tok: Tok::Open, line, col });
                chars.next();
                col += 1;
            }
            '}' => {
                out.push(Lexed { tok: Tok::Close, line, col });
                chars.next();
                col += 1;
            }
            c if c.is_ascii_lowercase() || c.is_ascii_digit() => {
                let (start_line, start_col) = (line, col);
                let mut ident = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_lowercase() || c.is_ascii_digit() || c == '-' {
                        ident.push(c);
                        chars.next();
                        col += 1;
                    } else {
                        break;
                    }
                }
                if !in_union_alphabet(&ident) {
                    return Err(DslError::Syntax {
                        line: start_line,
                        col: start_col,
                        message: format!("unknown token `{ident}`"),
                    });
                }
                out.push(Lexed {
                    tok: Tok::Ident(ident),
                    line: start_line,
                    col: start_col,
                });
            }
            other => {
                return Err(DslError::Syntax {
                    line,
                    col,
                    message: format!("unexpected character `{other}`"),
                })
            }
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Lexed>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Lexed> {
        self.toks.get(self.pos)
    }

    fn err_here(&self, message: impl Into<String>) -> DslError {
        let (line, col) = self
            .peek()
            .map(|l| (l.line, l.col))
            .unwrap_or_else(|| {
                self.toks
                    .last()
                    .map(|l| (l.line, l.col + 1))
                    .unwrap_or((1, 1))
            });
        DslError::Syntax {
            line,
            col,
            message: message.into(),
        }
    }

    fn node(&mut self) -> Result<DslTree, DslError> {
        let label = match self.peek() {
            Some(Lexed { tok: Tok::Ident(name), .. }) => {
                let name = name.clone();
                self.pos += 1;
                name
            }
            Some(Lexed { tok: Tok::Open, .. }) => {
                return Err(self.err_here("expected a token before `{`"))
            }
            Some(Lexed { tok: Tok::Close, .. }) => {
                return Err(self.err_here("unmatched `}`"))
            }
            None => return Err(self.err_here("unexpected end of input")),
        };
        let mut children = Vec::new();
        if matches!(self.peek(), Some(Lexed { tok: Tok::Open, .. })) {
            let open_at = self.pos;
            self.pos += 1;
            loop {
                match self.peek() {
                    Some(Lexed { tok: Tok::Close, .. }) => {
                        self.pos += 1;
                        break;
                    }
                    Some(_) => children.push(self.node()?),
                    None => {
                        let open = &self.toks[open_at];
                        return Err(DslError::Syntax {
                            line: open.line,
                            col: open.col,
                            message: format!("unclosed `{{` opened for `{label}`"),
                        });
                    }
                }
            }
            if children.is_empty() {
                let open = &self.toks[open_at];
                return Err(DslError::Syntax {
                    line: open.line,
                    col: open.col,
                    message: format!("empty block for `{label}`"),
                });
            }
        }
        Ok(DslTree::new(label, children))
    }
}

/// Parse DSL source into a tree.
///
/// Accepts any whitespace arrangement; child order follows source order.
/// The input must contain exactly one tree over the union alphabet.
pub fn parse(text: &str) -> Result<DslTree, DslError> {
    let toks = lex(text)?;
    if toks.is_empty() {
        return Err(DslError::Syntax {
            line: 1,
            col: 1,
            message: "empty input".to_string(),
        });
    }
    let mut p = Parser { toks, pos: 0 };
    let tree = p.node()?;
    if let Some(extra) = p.peek() {
        return Err(DslError::Syntax {
            line: extra.line,
            col: extra.col,
            message: "trailing input after the root block".to_string(),
        });
    }
    Ok(tree)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_nested_blocks() {
        let t = parse("body { row { label btn } footer { btn-home } }").unwrap();
        assert_eq!(t.node_count(), 6);
        assert_eq!(t.label(), "body");
        assert_eq!(t.children()[0].label(), "row");
        assert_eq!(t.children()[0].children()[1].label(), "btn");
        assert_eq!(t.children()[1].children()[0].label(), "btn-home");
    }

    #[test]
    fn single_token_is_a_leaf() {
        assert_eq!(parse("btn-home").unwrap(), DslTree::leaf("btn-home"));
    }

    #[test]
    fn unclosed_brace_reports_position() {
        let err = parse("row { label").unwrap_err();
        match err {
            DslError::Syntax { line, col, message } => {
                assert_eq!((line, col), (1, 5));
                assert!(message.contains("unclosed"), "{message}");
            }
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn unknown_token_reports_position() {
        let err = parse("body {\n  gizmo\n}").unwrap_err();
        match err {
            DslError::Syntax { line, col, message } => {
                assert_eq!((line, col), (2, 3));
                assert!(message.contains("gizmo"), "{message}");
            }
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn rejects_empty_and_trailing_input() {
        assert!(parse("").is_err());
        assert!(parse("   \n ").is_err());
        assert!(parse("btn btn").is_err());
        assert!(parse("row { } ").is_err());
        assert!(parse("} row").is_err());
    }
}
