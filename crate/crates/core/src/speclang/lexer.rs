use super::ParseError;

#[derive(Clone, Debug, PartialEq)]
pub enum TokenKind {
    Ident(String),
    Quoted(String),
    Number(f64),
    LBrace,
    RBrace,
    Colon,
    At,
    LParen,
    RParen,
    Equals,
    Eof,
}

impl TokenKind {
    pub fn describe(&self) -> String {
        match self {
            TokenKind::Ident(s) => format!("`{s}`"),
            TokenKind::Quoted(s) => format!("\"{s}\""),
            TokenKind::Number(v) => format!("number {v}"),
            TokenKind::LBrace => "`{`".into(),
            TokenKind::RBrace => "`}`".into(),
            TokenKind::Colon => "`:`".into(),
            TokenKind::At => "`@`".into(),
            TokenKind::LParen => "`(`".into(),
            TokenKind::RParen => "`)`".into(),
            TokenKind::Equals => "`=`".into(),
            TokenKind::Eof => "end of input".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub line: usize,
    pub column: usize,
    /// Byte range in the source.
    pub span: (usize, usize),
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

struct Cursor<'a> {
    src: &'a str,
    chars: std::iter::Peekable<std::str::CharIndices<'a>>,
    line: usize,
    column: usize,
}

impl<'a> Cursor<'a> {
    fn peek(&mut self) -> Option<(usize, char)> {
        self.chars.peek().copied()
    }

    fn bump(&mut self) -> Option<(usize, char)> {
        let next = self.chars.next();
        if let Some((_, c)) = next {
            if c == '\n' {
                self.line += 1;
                self.column = 1;
            } else {
                self.column += 1;
            }
        }
        next
    }

    fn offset(&mut self) -> usize {
        self.peek().map_or(self.src.len(), |(i, _)| i)
    }

    fn eat_digits(&mut self) -> usize {
        let mut n = 0;
        while self.peek().is_some_and(|(_, c)| c.is_ascii_digit()) {
            self.bump();
            n += 1;
        }
        n
    }
}

/// Splits `src` into tokens, ending with [`TokenKind::Eof`].
pub fn tokenize(src: &str) -> Result<Vec<Token>, ParseError> {
    let mut cur = Cursor { src, chars: src.char_indices().peekable(), line: 1, column: 1 };
    let mut tokens = Vec::new();
    loop {
        while let Some((_, c)) = cur.peek() {
            if c == '#' {
                while cur.peek().is_some_and(|(_, c)| c != '\n') {
                    cur.bump();
                }
            } else if c.is_whitespace() {
                cur.bump();
            } else {
                break;
            }
        }
        let (line, column) = (cur.line, cur.column);
        let Some((start, c)) = cur.peek() else {
            tokens.push(Token { kind: TokenKind::Eof, line, column, span: (src.len(), src.len()) });
            return Ok(tokens);
        };
        let punct = match c {
            '{' => Some(TokenKind::LBrace),
            '}' => Some(TokenKind::RBrace),
            ':' => Some(TokenKind::Colon),
            '@' => Some(TokenKind::At),
            '(' => Some(TokenKind::LParen),
            ')' => Some(TokenKind::RParen),
            '=' => Some(TokenKind::Equals),
            _ => None,
        };
        let kind = if let Some(k) = punct {
            cur.bump();
            k
        } else if is_ident_start(c) {
            while cur.peek().is_some_and(|(_, c)| is_ident_char(c)) {
                cur.bump();
            }
            TokenKind::Ident(src[start..cur.offset()].to_string())
        } else if c == '"' {
            cur.bump();
            let mut text = String::new();
            loop {
                match cur.bump() {
                    None | Some((_, '\n')) | Some((_, '\r')) => {
                        return Err(ParseError {
                            line,
                            column,
                            message: "unterminated quoted text".into(),
                            expected: vec!["closing `\"`".into()],
                        });
                    }
                    Some((_, '"')) => break,
                    Some((_, '\\')) => match cur.bump() {
                        Some((_, e @ ('"' | '\\'))) => text.push(e),
                        _ => {
                            return Err(ParseError::at(
                                cur.line,
                                cur.column - 1,
                                "unknown escape in quoted text; only \\\" and \\\\ are allowed",
                            ))
                        }
                    },
                    Some((_, ch)) => text.push(ch),
                }
            }
            TokenKind::Quoted(text)
        } else if c.is_ascii_digit() || c == '-' || c == '+' {
            cur.bump();
            let int_digits = cur.eat_digits() + usize::from(c.is_ascii_digit());
            if int_digits == 0 {
                return Err(ParseError {
                    line,
                    column,
                    message: format!("`{c}` must be followed by digits"),
                    expected: vec!["number".into()],
                });
            }
            if cur.peek().is_some_and(|(_, c)| c == '.') {
                cur.bump();
                if cur.eat_digits() == 0 {
                    return Err(ParseError::at(line, column, "malformed number: digits must follow `.`"));
                }
            }
            if cur.peek().is_some_and(|(_, c)| c == 'e' || c == 'E') {
                let mut look = cur.src[cur.offset() + 1..].chars();
                let next = look.next();
                let after = look.next();
                let exponent = match next {
                    Some(d) if d.is_ascii_digit() => true,
                    Some('+' | '-') => after.is_some_and(|d| d.is_ascii_digit()),
                    _ => false,
                };
                if exponent {
                    cur.bump();
                    if cur.peek().is_some_and(|(_, c)| c == '+' || c == '-') {
                        cur.bump();
                    }
                    cur.eat_digits();
                }
            }
            let text = &src[start..cur.offset()];
            let value: f64 = text.parse().map_err(|_| ParseError::at(line, column, format!("malformed number `{text}`")))?;
            if !value.is_finite() {
                return Err(ParseError::at(line, column, format!("number `{text}` is out of range")));
            }
            TokenKind::Number(value)
        } else {
            return Err(ParseError {
                line,
                column,
                message: format!("unexpected character `{}`", c.escape_debug()),
                expected: vec!["identifier".into(), "quoted text".into(), "number".into(), "punctuation".into()],
            });
        };
        let end = cur.offset();
        tokens.push(Token { kind, line, column, span: (start, end) });
    }
}
