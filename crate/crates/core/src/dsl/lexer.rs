use std::ops::Range;

use crate::model::{Pos, Span};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Ident,
    Str,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Arrow,
    Colon,
    Comma,
    Eq,
    EqEq,
    Dot,
    Eof,
}

impl TokenKind {
    pub fn describe(self) -> &'static str {
        match self {
            TokenKind::Ident => "identifier",
            TokenKind::Str => "string",
            TokenKind::LBrace => "`{`",
            TokenKind::RBrace => "`}`",
            TokenKind::LBracket => "`[`",
            TokenKind::RBracket => "`]`",
            TokenKind::Arrow => "`->`",
            TokenKind::Colon => "`:`",
            TokenKind::Comma => "`,`",
            TokenKind::Eq => "`=`",
            TokenKind::EqEq => "`==`",
            TokenKind::Dot => "`.`",
            TokenKind::Eof => "end of file",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    /// Identifier name or unescaped string value; empty for punctuation.
    pub text: String,
    pub span: Span,
    /// Byte range in the source.
    pub range: Range<usize>,
}

impl Token {
    pub fn is_word(&self, word: &str) -> bool {
        self.kind == TokenKind::Ident && self.text == word
    }

    pub fn describe(&self) -> String {
        match self.kind {
            TokenKind::Ident => format!("`{}`", self.text),
            TokenKind::Str => "string".to_string(),
            k => k.describe().to_string(),
        }
    }
}

/// `// ...` comment; `text` excludes the slashes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Comment {
    pub text: String,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LexError {
    UnexpectedChar(char, Span),
    UnterminatedString(Span),
}

#[derive(Debug, Default)]
pub struct Lexed {
    pub tokens: Vec<Token>,
    pub comments: Vec<Comment>,
    pub errors: Vec<LexError>,
}

struct Cursor<'a> {
    src: &'a str,
    offset: usize,
    line: u32,
    column: u32,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<char> {
        self.src[self.offset..].chars().next()
    }

    fn peek2(&self) -> Option<char> {
        let mut it = self.src[self.offset..].chars();
        it.next();
        it.next()
    }

    fn pos(&self) -> Pos {
        Pos::new(self.line, self.column)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.offset += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }
}

/// Splits source text into tokens and comments. Always ends with an `Eof`
/// token positioned after the last character.
pub fn lex(src: &str) -> Lexed {
    let mut cur = Cursor {
        src,
        offset: 0,
        line: 1,
        column: 1,
    };
    let mut out = Lexed::default();
    while let Some(c) = cur.peek() {
        let start = cur.pos();
        let begin = cur.offset;
        if c.is_whitespace() {
            cur.bump();
            continue;
        }
        if c == '/' && cur.peek2() == Some('/') {
            cur.bump();
            cur.bump();
            while let Some(ch) = cur.peek() {
                if ch == '\n' {
                    break;
                }
                cur.bump();
            }
            let text = src[begin + 2..cur.offset].trim_end_matches('\r').to_string();
            out.comments.push(Comment {
                text,
                span: Span::new(start, cur.pos()),
            });
            continue;
        }
        if c.is_ascii_alphabetic() {
            while cur
                .peek()
                .is_some_and(|ch| ch.is_ascii_alphanumeric() || ch == '_')
            {
                cur.bump();
            }
            out.tokens.push(Token {
                kind: TokenKind::Ident,
                text: src[begin..cur.offset].to_string(),
                span: Span::new(start, cur.pos()),
                range: begin..cur.offset,
            });
            continue;
        }
        if c == '"' {
            cur.bump();
            let mut value = String::new();
            let mut closed = false;
            while let Some(ch) = cur.peek() {
                if ch == '\n' {
                    break;
                }
                cur.bump();
                match ch {
                    '"' => {
                        closed = true;
                        break;
                    }
                    '\\' => match cur.peek() {
                        Some('"') => {
                            cur.bump();
                            value.push('"');
                        }
                        Some('\\') => {
                            cur.bump();
                            value.push('\\');
                        }
                        Some('n') => {
                            cur.bump();
                            value.push('\n');
                        }
                        _ => value.push('\\'),
                    },
                    other => value.push(other),
                }
            }
            let span = Span::new(start, cur.pos());
            if closed {
                out.tokens.push(Token {
                    kind: TokenKind::Str,
                    text: value,
                    span,
                    range: begin..cur.offset,
                });
            } else {
                out.errors.push(LexError::UnterminatedString(span));
            }
            continue;
        }
        cur.bump();
        let kind = match c {
            '{' => TokenKind::LBrace,
            '}' => TokenKind::RBrace,
            '[' => TokenKind::LBracket,
            ']' => TokenKind::RBracket,
            ':' => TokenKind::Colon,
            ',' => TokenKind::Comma,
            '.' => TokenKind::Dot,
            '-' if cur.peek() == Some('>') => {
                cur.bump();
                TokenKind::Arrow
            }
            '=' if cur.peek() == Some('=') => {
                cur.bump();
                TokenKind::EqEq
            }
            '=' => TokenKind::Eq,
            other => {
                out.errors
                    .push(LexError::UnexpectedChar(other, Span::new(start, cur.pos())));
                continue;
            }
        };
        out.tokens.push(Token {
            kind,
            text: String::new(),
            span: Span::new(start, cur.pos()),
            range: begin..cur.offset,
        });
    }
    let end = cur.pos();
    out.tokens.push(Token {
        kind: TokenKind::Eof,
        text: String::new(),
        span: Span::new(end, end),
        range: src.len()..src.len(),
    });
    out
}

/// Escapes a string value so that [`lex`] reads it back unchanged.
pub fn quote(value: &str) -> String {
    let mut s = String::with_capacity(value.len() + 2);
    s.push('"');
    for c in value.chars() {
        match c {
            '"' => s.push_str("\\\""),
            '\\' => s.push_str("\\\\"),
            '\n' => s.push_str("\\n"),
            other => s.push(other),
        }
    }
    s.push('"');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<TokenKind> {
        lex(src).tokens.iter().map(|t| t.kind).collect()
    }

    #[test]
    fn punctuation_and_words() {
        use TokenKind::*;
        assert_eq!(
            kinds("a -> b.read [X == Y] : , = { }"),
            vec![
                Ident, Arrow, Ident, Dot, Ident, LBracket, Ident, EqEq, Ident, RBracket, Colon,
                Comma, Eq, LBrace, RBrace, Eof
            ]
        );
    }

    #[test]
    fn comments_are_collected() {
        let l = lex("x // hello\ny");
        assert_eq!(l.comments.len(), 1);
        assert_eq!(l.comments[0].text, " hello");
        assert_eq!(l.tokens[1].span.start, Pos::new(2, 1));
    }

    #[test]
    fn string_escapes_roundtrip() {
        let l = lex(r#""a \"q\" \\ \n b""#);
        assert_eq!(l.tokens[0].text, "a \"q\" \\ \n b");
        let again = lex(&quote(&l.tokens[0].text));
        assert_eq!(again.tokens[0].text, l.tokens[0].text);
    }

    #[test]
    fn unterminated_string() {
        let l = lex("\"abc\nx");
        assert!(matches!(l.errors[0], LexError::UnterminatedString(_)));
        assert!(l.tokens[0].is_word("x"));
    }

    #[test]
    fn spans_are_one_based() {
        let l = lex("  ab");
        assert_eq!(l.tokens[0].span, Span::new(Pos::new(1, 3), Pos::new(1, 5)));
        assert_eq!(l.tokens[0].range, 2..4);
    }
}
